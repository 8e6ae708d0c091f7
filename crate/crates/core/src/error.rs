use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `gamma = 0` turns `Z` into the single-mode operator `a1`.
    #[error("degenerate gamma = 0: Z reduces to the single-mode operator a1 (homodyne limit)")]
    DegenerateGamma,

    #[error("{what} out of domain: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("invalid state preparation: {0}")]
    InvalidState(String),

    #[error("ancilla preparation violates the zero-mean constraint: <q3> = {mean_q:e}, <p3> = {mean_p:e}")]
    AncillaMean { mean_q: f64, mean_p: f64 },

    #[error("weight truncation: tail mass {tail:e} beyond cutoff {cutoff} exceeds {bound:e}")]
    Truncation { cutoff: usize, tail: f64, bound: f64 },

    #[error(
        "grid does not cover the predicted outcome distribution; suggested bounds \
         x in [{x_min}, {x_max}], y in [{y_min}, {y_max}]"
    )]
    Coverage {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },

    #[error("grid mass {mass} outside [1 - {tol:e}, 1 + {tol:e}]")]
    Mass { mass: f64, tol: f64 },

    #[error("gamma = {gamma:e} too small for the Wigner convolution path (rescaled kernel unresolvable)")]
    RescalingOverflow { gamma: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}
