use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("basis mismatch: {0}")]
    Basis(String),
    #[error("Hamiltonian is not Hermitian: {0}")]
    NonHermitian(String),
    #[error("non-finite coupling from term {term} at t = {t:e}")]
    NonFinite { term: String, t: f64 },
    #[error("unmatched pulse parameters: {0}; call match_generalized_rabi first")]
    Unmatched(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Param(msg()))
    }
}
