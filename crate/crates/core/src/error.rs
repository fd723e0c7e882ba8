use thiserror::Error;

/// Errors raised while building or evaluating learning graphs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dangling vertex: edge {edge} references undeclared vertex {vertex}")]
    DanglingVertex { edge: usize, vertex: String },
    #[error("negative weight literal {value} on edge {edge}")]
    NegativeWeight { edge: usize, value: f64 },
    #[error("index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("input {0} is not in the domain")]
    NotInDomain(String),
    #[error("input {input} has f = {actual}, expected {expected}")]
    WrongSide { input: String, expected: u8, actual: u8 },
    #[error("positive flow {flow} on edge {edge} with zero positive weight for input {input}")]
    FlowOnZeroWeight { edge: usize, input: String, flow: f64 },
    #[error("weight rule needs a logarithm, which the exact scalar type cannot represent")]
    InexactScalar,
    #[error("super edge does not have a unique flow sink")]
    NonUniqueSink,
    #[error("OR guarantee violated: positive input {input} has {found} positive children, expected at least {k}")]
    OrGuarantee { input: String, found: usize, k: usize },
    #[error("stage flow is not uniform: {0}")]
    NonUniformFlow(String),
    #[error("set map is not monotone: I({smaller:?}) is not contained in I({larger:?})")]
    NonMonotone { smaller: Vec<usize>, larger: Vec<usize> },
    #[error("certificate oracle returned {found} elements for input {input}, expected {expected}")]
    CertificateSize {
        input: String,
        found: usize,
        expected: usize,
    },
    #[error("inconsistent subfunction: {0}")]
    InconsistentSubfunction(String),
    #[error("complexity is zero on one side; cannot rebalance")]
    DegenerateComplexity,
    #[error("size cap exceeded: {what} = {value} > {cap}")]
    SizeCap {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
