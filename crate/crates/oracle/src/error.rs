use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] naimark::Error),

    #[error("oracle input out of domain: {0}")]
    Domain(String),

    #[error("{prep} is not representable at n_max = {n_max}: photon tail {tail:e} exceeds {bound:e}")]
    Representability {
        prep: String,
        n_max: usize,
        tail: f64,
        bound: f64,
    },

    #[error("{check}: deviation {deviation:e} exceeds {tolerance:e}; increase n_max")]
    Accuracy {
        check: &'static str,
        deviation: f64,
        tolerance: f64,
    },

    #[error("quadrature disk r^2 <= {radius_sq} too small: displaced-state mass deficit {deficit:e} exceeds {bound:e}")]
    MassDeficit { radius_sq: f64, deficit: f64, bound: f64 },
}
