use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The rotation is (numerically) a π-turn, which sits at infinity in the
    /// vector representation.
    #[error("rotation is a pi-turn (1 + tr R = {0:e})")]
    PiTurn(f64),

    #[error("matrix is not a rotation (orthogonality defect {defect:e}, det {det})")]
    NotARotation { defect: f64, det: f64 },

    #[error("degenerate metric at grid node ({i}, {j})")]
    SingularPoint { i: usize, j: usize },

    #[error("principal directions undefined at umbilic grid node ({i}, {j})")]
    Umbilic { i: usize, j: usize },

    #[error("domain contains a singularity of the datum: {0}")]
    DomainExclusion(String),

    #[error("integrability violated: residual {0:e}")]
    IntegrabilityViolation(f64),

    #[error("compatibility ratio undefined: vanishing denominator")]
    UndefinedRatio,

    #[error("family parameter {t} outside [{t0}, {t1}]")]
    ParameterOutOfRange { t: f64, t0: f64, t1: f64 },

    #[error("theta = {0} is an endpoint of the catenoid-helicoid family, not a Scherk surface")]
    NotScherk(f64),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("mismatched grids: {0}")]
    GridMismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
