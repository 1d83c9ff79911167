use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model, policy or grid parameter violates its invariant. `field` is a
    /// dotted path such as `on.ratio_a`.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    /// An argument outside the operation's domain (e.g. `u` not in (0,1)).
    #[error("domain error: {0}")]
    Domain(String),

    /// An infinite series did not decay below its tolerance before `n_max` terms.
    #[error(
        "series truncation unsafe for {quantity}: reached n_max = {n_max} with last term {last_term:e} (epsilon {epsilon:e})"
    )]
    Truncation {
        quantity: &'static str,
        n_max: usize,
        last_term: f64,
        epsilon: f64,
    },

    /// A simulation safety cap was exceeded.
    #[error("simulation cap hit: {what} exceeded {cap}")]
    SimulationCap { what: &'static str, cap: u64 },

    #[error("replication {replication}: {source}")]
    Replication {
        replication: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Strips any [`Error::Replication`] wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Replication { source, .. } => source.root(),
            other => other,
        }
    }
}
