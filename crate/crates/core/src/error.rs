use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A covariance matrix violates physicality beyond tolerance.
    #[error("non-physical state: {0}")]
    NonPhysical(String),

    /// A Fock-space truncation is too small for the requested state.
    #[error("Fock cutoff too small: truncation weight {weight:.3e} exceeds {limit:.3e}")]
    CutoffTooSmall { weight: f64, limit: f64 },

    /// A root-finding bracket does not enclose a sign change.
    #[error("bracket error: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;
