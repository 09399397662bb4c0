use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("panel input has no rows")]
    EmptyInput,

    #[error("unbalanced panel: individual `{id}` has no observation for period `{time}`")]
    UnbalancedPanel { id: String, time: String },

    #[error("non-finite value in column `{column}` (row {row})")]
    NonFiniteValue { row: usize, column: String },

    #[error("duplicate cell: (id=`{id}`, time=`{time}`) appears more than once")]
    DuplicateCell { id: String, time: String },

    #[error("invalid panel shape: {0}")]
    InvalidShape(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("design matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("weighted design matrix is rank deficient (rank {rank} < {columns} columns)")]
    RankDeficientUnderWeights { rank: usize, columns: usize },

    #[error("between regression needs more than {needed} individuals, got {n_individuals}")]
    TooFewIndividuals { n_individuals: usize, needed: usize },

    #[error("regressor {regressor} has no within-individual variation")]
    NoWithinVariation { regressor: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("no bootstrap start converged to a root ({starts} starts tried)")]
    NoConvergedRoot { starts: usize },

    #[error("infeasible contamination: {0}")]
    InfeasibleContamination(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed input rather than by estimation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyInput
                | Error::UnbalancedPanel { .. }
                | Error::NonFiniteValue { .. }
                | Error::DuplicateCell { .. }
                | Error::InvalidShape(_)
                | Error::Schema(_)
                | Error::Config(_)
                | Error::Csv(_)
                | Error::Io(_)
        )
    }
}
