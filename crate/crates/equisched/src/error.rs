use thiserror::Error;

use crate::groups::GroupElement;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("element does not match the group structure: {0}")]
    StructureMismatch(String),
    #[error("enumeration cap of {cap} elements exceeded")]
    CapExceeded { cap: usize },
    #[error("not a homomorphism: relation fails at ({left:?}, {right:?})")]
    NotAHomomorphism { left: GroupElement, right: GroupElement },
    #[error("element is not in the group")]
    NotInGroup,
    #[error("not a subgroup: {0}")]
    NotASubgroup(String),
    #[error("action is not transitive: {0}")]
    NotTransitive(String),
    #[error("point is not in the set")]
    NotInSet,
    #[error("oracle cap of {cap} candidate maps exceeded")]
    OracleCapExceeded { cap: u128 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("parameters infeasible: {0}")]
    ParameterInfeasible(String),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),
    #[error("move leaves the hex window: {0}")]
    WindowOverflow(String),
    #[error("bundle and machine do not match: {0}")]
    MachineMismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
