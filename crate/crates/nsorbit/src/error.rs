use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Rigor(#[from] rigor::RigorError),

    #[error("forcing violates invariants: {0}")]
    ForcingInvalid(String),

    #[error("forcing has modes outside S_sol + S_sol")]
    ForcingSupport,

    #[error("generator closure exceeded the configured cap of {0} elements")]
    NonFiniteClosure(usize),

    #[error("mode {0} is not covered by the orbit catalog")]
    UncataloguedMode(String),

    #[error("invalid truncation scheme: {0}")]
    SchemeInvalid(String),

    #[error("essentially-2D flag set but component {0} of the velocity does not vanish")]
    NotActually2D(usize),

    #[error("finite block is numerically singular")]
    SingularFiniteBlock,

    #[error("Newton jacobian is numerically singular")]
    SingularJacobian,

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("orbit has no successful validation report")]
    NotValidated,

    #[error("input field is not curl-free: {0}")]
    NotCurlFree(String),

    #[error("file format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
