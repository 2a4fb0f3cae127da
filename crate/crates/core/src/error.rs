use thiserror::Error;

/// Errors surfaced by kernel construction, sampling, and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// A coordinate or parameter fell outside its admissible range.
    #[error("{what} = {value} is outside its admissible range")]
    OutOfRange { what: &'static str, value: f64 },

    /// The kernel integrates to zero, so normalization is undefined.
    #[error("kernel has zero total mass, normalization is undefined")]
    ZeroMass,

    /// Two step graphons live on different partitions; re-bin explicitly first.
    #[error("bin counts differ ({left} vs {right}); re-bin to a common partition first")]
    BinMismatch { left: usize, right: usize },

    /// Exact subset enumeration was requested above the configured limit.
    #[error("n = {n} exceeds the exact enumeration limit {limit}; use the heuristic solver")]
    ExactLimitExceeded { n: usize, limit: usize },

    /// A finite chain's state count must be a multiple of the bin count.
    #[error("chain state count {m} is not a multiple of the bin count {n}")]
    MisalignedChain { m: usize, n: usize },

    /// A row of the discretized kernel has zero mass.
    #[error("row {row} of the discretized kernel has zero mass; kernel is not positive there")]
    ZeroChainRow { row: usize },

    /// Rejection sampling exhausted its trial budget, so the envelope
    /// certificate must be wrong for the supplied kernel.
    #[error("rejection sampler exceeded {trials} trials; the (delta, phi) certificate does not dominate this kernel")]
    CertificateViolation { trials: u64 },

    /// A sampling method is not available for the kernel at hand.
    #[error("sampler method `{method}` is not available for kernel `{kernel}`")]
    UnsupportedMethod { method: String, kernel: String },

    /// Kernel descriptor or matrix input failed validation.
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
