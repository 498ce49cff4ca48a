use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("elements belong to different groups")]
    MixedOwners,
    #[error("enumeration exceeded the cap of {cap} elements")]
    CapExceeded { cap: usize },
    #[error("operation requires an abelian base group")]
    NonAbelianBase,
    #[error("acting group {0} is not supported by this decider")]
    UnsupportedActingGroup(String),
    #[error("no quotient enumeration for {0}")]
    UnsupportedDescriptor(String),
    #[error("operation requires finite groups")]
    NotFinite,
    #[error("the arguments are conjugate")]
    ArgumentsConjugate,
    #[error("the element lies in the subgroup")]
    ArgumentInSubgroup,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
