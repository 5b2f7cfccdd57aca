use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid LTS `{lts}`: {reason}")]
    InvalidLts { lts: String, reason: String },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("label `{0}` has an empty base")]
    EmptyLabel(String),

    #[error("processes `{first}` and `{second}` both emit output `{base}!`")]
    AmbiguousOutput {
        base: String,
        first: String,
        second: String,
    },

    #[error("product exceeds the state bound of {bound} states")]
    StateBound { bound: usize },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("state map is not a bijection: {0}")]
    NotBijection(String),

    #[error("invalid permutable set: {0}")]
    InvalidPermutableSet(String),

    #[error("variable for {0} is not allocated")]
    UnknownVariable(String),

    #[error("generalization does not include the generalized assignment")]
    SelfInclusion,

    #[error("isomorphism preservation broken: permuted candidate {0} passes model checking")]
    IsomorphismBroken(String),

    #[error("{vars} variables exceed the oracle limit of {limit}")]
    TooManyVariables { vars: usize, limit: usize },

    #[error("no synthesizable process in network")]
    NothingToSynthesize,

    #[error("model file: {0}")]
    Model(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
