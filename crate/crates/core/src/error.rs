use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no bonds")]
    EmptyGraph,
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("bond `{bond}` refers to unknown vertex `{vertex}`")]
    DanglingEndpoint { bond: String, vertex: String },
    #[error("vertex `{0}` has no incident bonds")]
    IsolatedVertex(String),
    #[error("bond `{bond}` has invalid length {length}")]
    InvalidLength { bond: String, length: f64 },
    #[error("vertex `{vertex}`: condition has dimension {found}, vertex degree is {expected}")]
    DimensionMismatch {
        vertex: String,
        expected: usize,
        found: usize,
    },
    #[error("vertex degree must be positive")]
    ZeroDegree,
    #[error("invalid matrix pair: {0}")]
    InvalidMatrixPair(String),
    #[error("A + ikB is singular at k = {0}")]
    SingularMatrixPair(f64),
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("bond scattering matrix is not J-symmetric; the vacuum energy needs k-independent vertex conditions")]
    NotJSymmetric,
    #[error("bond `{bond}` of length {length} is not an integer multiple of the unit {unit}")]
    Incommensurate {
        bond: String,
        length: f64,
        unit: f64,
    },
    #[error("value {value} outside {expected}")]
    OutOfRange { value: f64, expected: &'static str },
    #[error("cut-off k_max is too small for t = {t}; need k_max >= {required_k_max}")]
    Truncation { t: f64, required_k_max: f64 },
    #[error("path enumeration budget exhausted at period {n} after {work} steps")]
    BudgetExceeded { n: usize, work: u64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error(
        "finite-difference step too large: error estimate {estimate:.3e} for value {value:.6e}"
    )]
    StepTooLarge { estimate: f64, value: f64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
