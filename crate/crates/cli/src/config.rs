//! Flat `key = value` campaign configs, merged under command-line flags.

use std::path::{Path, PathBuf};

use ini::Ini;
use wreathlab::groups::DEFAULT_CAP;
use wreathlab::quotients::Family;

use crate::CliError;

pub const KEYS: [&str; 10] = [
    "group",
    "family",
    "n-max",
    "max-index",
    "conj-radius",
    "max-cells",
    "digit-cap",
    "output",
    "parallelism",
    "no-stamp",
];

/// Values read from a config file; every field is optional.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct FileConfig {
    pub group: Option<String>,
    pub family: Option<String>,
    pub n_max: Option<usize>,
    pub max_index: Option<u64>,
    pub conj_radius: Option<usize>,
    pub max_cells: Option<usize>,
    pub digit_cap: Option<usize>,
    pub output: Option<PathBuf>,
    pub parallelism: Option<usize>,
    pub no_stamp: Option<bool>,
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{v}'")))
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let ini = Ini::load_from_file(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = FileConfig::default();
        // section headers are allowed but carry no meaning
        for (_, props) in ini.iter() {
            for (k, v) in props.iter() {
                let key = k.trim().replace('_', "-");
                match key.as_str() {
                    "group" => cfg.group = Some(v.to_string()),
                    "family" => cfg.family = Some(v.to_string()),
                    "n-max" => cfg.n_max = Some(num(&key, v)?),
                    "max-index" => cfg.max_index = Some(num(&key, v)?),
                    "conj-radius" => cfg.conj_radius = Some(num(&key, v)?),
                    "max-cells" => cfg.max_cells = Some(num(&key, v)?),
                    "digit-cap" => cfg.digit_cap = Some(num(&key, v)?),
                    "output" => cfg.output = Some(PathBuf::from(v)),
                    "parallelism" => cfg.parallelism = Some(num(&key, v)?),
                    "no-stamp" => cfg.no_stamp = Some(num(&key, v)?),
                    _ => {
                        return Err(CliError::Config(format!(
                            "unknown key '{k}'; known keys: {}",
                            KEYS.join(", ")
                        )))
                    }
                }
            }
        }
        Ok(cfg)
    }
}

/// Fully resolved settings: flag, then environment, then config file, then default.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub group: String,
    pub family: Family,
    pub n_max: usize,
    pub max_index: u64,
    pub conj_radius: usize,
    pub max_cells: usize,
    pub digit_cap: usize,
    pub output: Option<PathBuf>,
    pub parallelism: usize,
    pub stamp: bool,
}

pub const DEFAULT_GROUP: &str = "Z/2 wr Z";

impl Settings {
    pub fn resolve(flags: &crate::Common, n_max: Option<usize>, file: &FileConfig) -> Result<Settings, CliError> {
        let family_text = flags
            .family
            .clone()
            .or_else(|| file.family.clone())
            .unwrap_or_else(|| "all".into());
        let family = family_text.parse::<Family>().map_err(|_| {
            CliError::Usage(format!(
                "bad family '{family_text}'; use 'all' or 'p<prime>' such as p2"
            ))
        })?;
        let s = Settings {
            group: flags
                .group
                .clone()
                .or_else(|| file.group.clone())
                .unwrap_or_else(|| DEFAULT_GROUP.into()),
            family,
            n_max: n_max.or(file.n_max).unwrap_or(3),
            max_index: flags.max_index.or(file.max_index).unwrap_or(64),
            conj_radius: flags.conj_radius.or(file.conj_radius).unwrap_or(6),
            max_cells: flags.max_cells.or(file.max_cells).unwrap_or(DEFAULT_CAP),
            digit_cap: flags.digit_cap.or(file.digit_cap).unwrap_or(10_000),
            output: flags.output.clone().or_else(|| file.output.clone()),
            parallelism: flags.parallelism.or(file.parallelism).unwrap_or(1),
            stamp: !(flags.no_stamp || file.no_stamp.unwrap_or(false)),
        };
        for (name, v) in [
            ("max-cells", s.max_cells),
            ("digit-cap", s.digit_cap),
            ("parallelism", s.parallelism),
        ] {
            if v == 0 {
                return Err(CliError::Usage(format!("{name} must be positive")));
            }
        }
        if s.max_index == 0 {
            return Err(CliError::Usage("max-index must be positive".into()));
        }
        Ok(s)
    }
}
