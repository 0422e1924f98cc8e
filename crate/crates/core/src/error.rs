use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{a} and {q} are not coprime")]
    NotCoprime { a: u64, q: u64 },

    #[error("{a}/{q} is not a fraction in [0, 1]")]
    NotInUnitInterval { a: u64, q: u64 },

    #[error("{a}/{q} is a boundary fraction of the Farey sequence of order {order}")]
    BoundaryFraction { a: u64, q: u64, order: u64 },

    #[error("denominator {q} exceeds the Farey order {order}")]
    DenominatorTooLarge { q: u64, order: u64 },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("no scatterer hit with denominator <= {bound} (omega = {omega})")]
    NoHit { omega: f64, bound: u64 },

    #[error("quadrature did not converge on [{lo}, {hi}]: estimated error {error:e}")]
    Quadrature { lo: f64, hi: f64, error: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
