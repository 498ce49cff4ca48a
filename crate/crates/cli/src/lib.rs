//! The `wreathlab` command line.

use std::io::Write;
use std::path::PathBuf;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wreathlab::conjugacy::{decide, ConjStatus};
use wreathlab::magnus::WORD_GRAMMAR;
use wreathlab::separability::{
    closed_form_bound, conj_profile, cyclic_profile, depth_conjugacy, depth_cyclic, girth_profile,
    pro_p_nonsep_witness, residual_girth, short_profile, shortest_conjugator, BoundFormula, BoundParams, Depth,
    DepthProfile, Growth, MeasureConfig, CSV_HEADER,
};
use wreathlab::syntax::{parse_element, parse_group, parse_wreath_element, ELEMENT_GRAMMAR, GROUP_GRAMMAR};
use wreathlab::{magnus_embed, magnus_group, metabelian_conjugate, metabelian_is_identity, FreeWord};

pub mod config;

use config::{FileConfig, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] wreathlab::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "wreathlab",
    version,
    about = "Conjugacy and separability experiments in restricted wreath products"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Group, e.g. "Z/2 wr Z", "Z wr Z^2", "Z", "H" [default: Z/2 wr Z]
    #[arg(long, global = true)]
    pub group: Option<String>,
    /// Quotient family: "all" or "p<prime>" [default: all]
    #[arg(long, global = true)]
    pub family: Option<String>,
    /// Largest quotient index to try [default: 64]
    #[arg(long, global = true)]
    pub max_index: Option<u64>,
    /// Conjugator search radius [default: 6]
    #[arg(long, global = true)]
    pub conj_radius: Option<usize>,
    /// Cap on ball sizes [default: 1000000]
    #[arg(long, global = true, env = "WREATHLAB_MAX_CELLS")]
    pub max_cells: Option<usize>,
    /// Bounds with more decimal digits print as "overflow" [default: 10000]
    #[arg(long, global = true)]
    pub digit_cap: Option<usize>,
    /// Worker threads for measurement campaigns [default: 1]
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// Write CSV here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// INI-style file of `key = value` defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Omit the "# generated" line from CSV output
    #[arg(long, global = true)]
    pub no_stamp: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Conj,
    Cyclic,
    Girth,
    Short,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormulaArg {
    /// Conj_A(n)^(|B|^3); needs --b-order and --conj-a
    FiniteActing,
    /// needs the five growth parameters
    InfiniteBase,
    /// needs the five growth parameters
    FiniteBase,
    /// n^(n^(n^2))
    Abelian,
    /// 2^(n^(n^2))
    AbelianFiniteBase,
    /// n^(n^(n^d)); needs --d
    Nilpotent,
    /// 2^(n^(n^d)); needs --d
    NilpotentFiniteBase,
}

/// Growth parameters are written `const:C`, `poly:D`, `log:K` or `table:v0,v1,...`.
#[derive(Debug, Clone, Default, Args)]
pub struct BoundArgs {
    /// Closed-form bound to evaluate
    #[arg(long, value_enum)]
    pub bound: Option<FormulaArg>,
    /// Nilpotency degree
    #[arg(long)]
    pub d: Option<u32>,
    /// Order of the finite acting group
    #[arg(long)]
    pub b_order: Option<u64>,
    #[arg(long)]
    pub conj_a: Option<String>,
    #[arg(long)]
    pub conj_b: Option<String>,
    #[arg(long)]
    pub short_b: Option<String>,
    #[arg(long)]
    pub girth_b: Option<String>,
    #[arg(long)]
    pub cyclic_b: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether two wreath elements are conjugate
    Decide {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Least index of a wreath quotient separating two non-conjugate elements
    Depth {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Measure a separability function for n = 0..=n-max and print CSV
    Profile {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n_max: Option<usize>,
        #[command(flatten)]
        bound: BoundArgs,
    },
    /// Residual girth of a group at radius n
    Girth {
        #[arg(long)]
        n: usize,
    },
    /// Least index of a quotient in which x leaves the image of <b>
    Cyclic {
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Length of a shortest conjugator from x to y
    Short {
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Embed a free-group word into Z^m wr Z^m, or compare two words up to conjugacy
    Magnus {
        #[arg(long)]
        w1: String,
        #[arg(long)]
        w2: Option<String>,
        /// Rank of the free group; defaults to the largest generator used
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Report that [g,1] is outside K_b yet inside it in every p-quotient of A wr Z
    WitnessNonsep {
        /// Finite abelian p-group A
        #[arg(long, default_value = "Z/3")]
        base: String,
        #[arg(long, allow_hyphen_values = true)]
        b: i64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        k_max: u32,
    },
    /// Evaluate a bound for n = 0..=n-max, comparing with measured Conj(n) unless --no-measure
    CheckBounds {
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        no_measure: bool,
        #[command(flatten)]
        bound: BoundArgs,
    },
}

fn growth(flag: &str, v: Option<&String>) -> Result<Growth, CliError> {
    let v = v.ok_or_else(|| CliError::Usage(format!("--{flag} is required by this bound")))?;
    let bad = || {
        CliError::Usage(format!(
            "--{flag}: expected const:C, poly:D, log:K or table:v0,v1,..., got '{v}'"
        ))
    };
    let (kind, arg) = v.split_once(':').ok_or_else(bad)?;
    Ok(match kind {
        "const" => Growth::Const(arg.trim().parse().map_err(|_| bad())?),
        "poly" => Growth::Poly(arg.trim().parse().map_err(|_| bad())?),
        "log" => Growth::Log(arg.trim().parse().map_err(|_| bad())?),
        "table" => Growth::Table(
            arg.split(',')
                .map(|t| t.trim().parse())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?,
        ),
        _ => return Err(bad()),
    })
}

impl BoundArgs {
    pub fn formula(&self) -> Result<Option<BoundFormula>, CliError> {
        let Some(kind) = self.bound else {
            return Ok(None);
        };
        let d = || {
            self.d
                .ok_or_else(|| CliError::Usage("--d is required by this bound".into()))
        };
        let params = || -> Result<BoundParams, CliError> {
            Ok(BoundParams {
                short_b: growth("short-b", self.short_b.as_ref())?,
                girth_b: growth("girth-b", self.girth_b.as_ref())?,
                cyclic_b: growth("cyclic-b", self.cyclic_b.as_ref())?,
                conj_b: growth("conj-b", self.conj_b.as_ref())?,
                conj_a: growth("conj-a", self.conj_a.as_ref())?,
            })
        };
        Ok(Some(match kind {
            FormulaArg::FiniteActing => BoundFormula::FiniteActing {
                b_order: self
                    .b_order
                    .ok_or_else(|| CliError::Usage("--b-order is required by this bound".into()))?,
                conj_a: growth("conj-a", self.conj_a.as_ref())?,
            },
            FormulaArg::InfiniteBase => BoundFormula::InfiniteAbelianBase(params()?),
            FormulaArg::FiniteBase => BoundFormula::FiniteAbelianBase(params()?),
            FormulaArg::Abelian => BoundFormula::AbelianActing,
            FormulaArg::AbelianFiniteBase => BoundFormula::AbelianActingFiniteBase,
            FormulaArg::Nilpotent => BoundFormula::NilpotentActing(d()?),
            FormulaArg::NilpotentFiniteBase => BoundFormula::NilpotentActingFiniteBase(d()?),
        }))
    }
}

fn stamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

fn usage_with_grammar(e: CliError) -> CliError {
    match e {
        CliError::Core(wreathlab::Error::Parse(m)) | CliError::Core(wreathlab::Error::InvalidElement(m)) => {
            let m = m.split("; grammar:").next().unwrap_or_default().to_string();
            if m.contains("in word") {
                CliError::Usage(format!("{m}\n  {WORD_GRAMMAR}"))
            } else {
                CliError::Usage(format!("{m}\n  {GROUP_GRAMMAR}\n  {ELEMENT_GRAMMAR}"))
            }
        }
        other => other,
    }
}

struct Ctx<'a> {
    s: Settings,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn measure(&self) -> MeasureConfig {
        MeasureConfig {
            max_index: self.s.max_index,
            parallelism: self.s.parallelism,
            cap: self.s.max_cells,
            digit_cap: self.s.digit_cap,
        }
    }

    fn emit_csv(&mut self, body: String) -> Result<(), CliError> {
        let text = if self.s.stamp {
            format!("# generated {}\n{body}", stamp())
        } else {
            body
        };
        match &self.s.output {
            Some(p) => std::fs::write(p, text)?,
            None => self.out.write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn depth_line(&mut self, d: Depth) -> Result<i32, CliError> {
        writeln!(self.out, "{d}")?;
        Ok(if d == Depth::Unreached { EXIT_UNDECIDED } else { EXIT_OK })
    }
}

fn profile_exit(p: &DepthProfile) -> i32 {
    if p.rows.iter().any(|r| r.measured == Depth::Unreached) {
        EXIT_UNDECIDED
    } else {
        EXIT_OK
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    let file = match &cli.common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let n_max = match &cli.command {
        Command::Profile { n_max, .. } | Command::CheckBounds { n_max, .. } => *n_max,
        _ => None,
    };
    let s = Settings::resolve(&cli.common, n_max, &file)?;
    let mut ctx = Ctx { s, out };
    let spec = || parse_group(&ctx.s.group).map_err(CliError::from);
    match cli.command {
        Command::Decide { x, y } => {
            let g = spec()?;
            let w = g.as_wreath()?;
            let (x, y) = (parse_wreath_element(w, &x)?, parse_wreath_element(w, &y)?);
            let v = decide(
                w,
                &x,
                &y,
                ctx.s.family,
                ctx.s.max_index,
                ctx.s.conj_radius,
                ctx.s.max_cells,
            )?;
            writeln!(ctx.out, "{}", v.line(w))?;
            Ok(if matches!(v.status, ConjStatus::Exhausted { .. }) {
                EXIT_UNDECIDED
            } else {
                EXIT_OK
            })
        }
        Command::Depth { x, y } => {
            let g = spec()?;
            let w = g.as_wreath()?;
            let (x, y) = (parse_wreath_element(w, &x)?, parse_wreath_element(w, &y)?);
            let d = depth_conjugacy(w, &x, &y, ctx.s.family, ctx.s.max_index)?;
            ctx.depth_line(d)
        }
        Command::Profile { kind, bound, .. } => {
            let g = spec()?;
            let cfg = ctx.measure();
            let n = ctx.s.n_max;
            let mut prof = match kind {
                KindArg::Conj => conj_profile(g.as_wreath()?, n, ctx.s.family, &cfg)?,
                KindArg::Cyclic => cyclic_profile(g.as_plain()?, n, ctx.s.family, &cfg)?,
                KindArg::Girth => girth_profile(g.as_plain()?, n, ctx.s.family, &cfg)?,
                KindArg::Short => short_profile(g.as_plain()?, n, ctx.s.conj_radius, &cfg)?,
            };
            if let Some(f) = bound.formula()? {
                prof = prof.with_bound(&f, ctx.s.digit_cap);
            }
            ctx.emit_csv(prof.to_csv(None))?;
            Ok(profile_exit(&prof))
        }
        Command::Girth { n } => {
            let g = spec()?;
            let d = residual_girth(g.as_plain()?, ctx.s.family, n, ctx.s.max_index, ctx.s.max_cells)?;
            ctx.depth_line(d)
        }
        Command::Cyclic { b, x } => {
            let g = spec()?;
            let grp = g.as_plain()?;
            let (b, x) = (parse_element(grp, &b)?, parse_element(grp, &x)?);
            let d = depth_cyclic(grp, &b, &x, ctx.s.family, ctx.s.max_index)?;
            ctx.depth_line(d)
        }
        Command::Short { x, y } => {
            let g = spec()?;
            let grp = g.as_plain()?;
            let (x, y) = (parse_element(grp, &x)?, parse_element(grp, &y)?);
            match shortest_conjugator(grp, &x, &y, ctx.s.conj_radius, ctx.s.max_cells)? {
                Some((r, c)) => {
                    writeln!(ctx.out, "{r} conjugator={}", grp.format(&c))?;
                    Ok(EXIT_OK)
                }
                None => {
                    writeln!(ctx.out, "unreached r={}", ctx.s.conj_radius)?;
                    Ok(EXIT_UNDECIDED)
                }
            }
        }
        Command::Magnus { w1, w2, rank } => {
            let min_rank = rank.unwrap_or(1);
            let u = FreeWord::parse(&w1, min_rank)?;
            match w2 {
                None => {
                    let g = magnus_group(u.rank());
                    writeln!(ctx.out, "word={u}")?;
                    writeln!(ctx.out, "image={}", g.format(&magnus_embed(&u)))?;
                    writeln!(ctx.out, "identity={}", metabelian_is_identity(&u))?;
                    Ok(EXIT_OK)
                }
                Some(w2) => {
                    let v = FreeWord::parse(&w2, min_rank)?;
                    let verdict = metabelian_conjugate(&u, &v)?;
                    let g = magnus_group(u.rank().max(v.rank()));
                    writeln!(ctx.out, "{}", verdict.line(&g))?;
                    Ok(EXIT_OK)
                }
            }
        }
        Command::WitnessNonsep { base, b, p, k_max } => {
            let a = parse_group(&base)?;
            let report = pro_p_nonsep_witness(a.as_plain()?, b, p, k_max)?;
            writeln!(ctx.out, "{report}")?;
            Ok(EXIT_OK)
        }
        Command::CheckBounds { no_measure, bound, .. } => {
            let f = bound
                .formula()?
                .ok_or_else(|| CliError::Usage("check-bounds needs --bound".into()))?;
            let n = ctx.s.n_max;
            if no_measure {
                let mut body = format!("{CSV_HEADER}\n");
                for i in 0..=n {
                    let b = closed_form_bound(&f, i as u64, ctx.s.digit_cap);
                    body.push_str(&format!("bound,{},{i},-,{b},0\n", ctx.s.family));
                }
                ctx.emit_csv(body)?;
                return Ok(EXIT_OK);
            }
            let g = spec()?;
            let prof = conj_profile(g.as_wreath()?, n, ctx.s.family, &ctx.measure())?.with_bound(&f, ctx.s.digit_cap);
            ctx.emit_csv(prof.to_csv(None))?;
            let bad = prof.violations();
            if bad.is_empty() {
                writeln!(ctx.out, "# {}: no violations", f.name())?;
            } else {
                let ns: Vec<String> = bad.iter().map(|r| r.n.to_string()).collect();
                writeln!(ctx.out, "# {}: violations at n = {}", f.name(), ns.join(", "))?;
            }
            Ok(profile_exit(&prof))
        }
    }
}

/// Runs one command line, writing results to `out` and diagnostics to `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{}", e.render());
                    return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_USAGE
                    } else {
                        EXIT_OK
                    };
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let e = usage_with_grammar(e);
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}
