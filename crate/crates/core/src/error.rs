use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid payoffs: {0}")]
    InvalidPayoffs(String),
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("strategy `{name}` needs parameter {param}")]
    MissingParameter { name: String, param: &'static str },
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("duplicate strategy label `{0}`")]
    DuplicateLabel(String),
    #[error("pivot {0} is not a strict Nash vertex")]
    NotStrictNash(usize),
    #[error("solver: {0}")]
    Solver(String),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
