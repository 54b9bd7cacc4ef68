use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input: dimension mismatch, out-of-domain
    /// parameters, violated construction constraints.
    #[error("invalid input: {0}")]
    Input(String),

    /// A configured size or iteration cap was exceeded. `partial` carries the
    /// best value computed before the cap was hit, when one exists.
    #[error("capacity exceeded: {what} (limit {limit}){}", partial_suffix(.partial))]
    Capacity {
        what: String,
        limit: usize,
        partial: Option<f64>,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("observation {observation} has zero probability after action {action}")]
    ImpossibleObservation { action: usize, observation: usize },

    #[error("greedy ratio undefined: oracle value {0} is not positive")]
    UndefinedRatio(f64),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn partial_suffix(partial: &Option<f64>) -> String {
    match partial {
        Some(v) => format!(", partial value {v}"),
        None => String::new(),
    }
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn capacity(what: impl Into<String>, limit: usize) -> Self {
        Error::Capacity {
            what: what.into(),
            limit,
            partial: None,
        }
    }

    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }
}
