use thiserror::Error;

use crate::lattice::SequencePair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported flow r = ({r_minus}, {r_plus})")]
    UnsupportedFlow { r_minus: usize, r_plus: usize },

    #[error("invalid scale factor: scaling requires c != 0")]
    InvalidScale,

    #[error("invalid spectral parameter: z must be nonzero")]
    InvalidParameter,

    #[error("window of {len} sites is too small for recursion order {order}")]
    InsufficientWindow { order: usize, len: usize },

    #[error("ladder of order {have} is too short, order {need} required")]
    InsufficientOrder { have: usize, need: usize },

    #[error("near-singular transfer at site {site}: |1 - alpha*beta| = {modulus:e}")]
    NearSingularTransfer { site: i64, modulus: f64 },

    #[error("singular operator: {0}")]
    SingularOperator(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("blowup at t = {time}: sup norm {sup_norm:e}")]
    Blowup {
        time: f64,
        sup_norm: f64,
        last_state: Box<SequencePair>,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Blowup { .. } | Error::SingularOperator(_) | Error::Numerical(_)
        )
    }
}
