use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("station {station}: exhaustive sub-busy period unstable (mean load {load:.4} >= 1)")]
    UnstableStation { station: usize, load: f64 },

    #[error("population overflow at generation {generation}")]
    PopulationOverflow { generation: u64 },

    /// A sampled count exceeded the exactly-representable integer range.
    #[error("sampled count overflow")]
    CountOverflow,

    #[error("within-cycle service cap {cap} exceeded")]
    CycleCapExceeded { cap: u64 },

    #[error("{:.2}% of replicates hit a runtime cap (threshold {:.2}%)", fraction * 100.0, threshold * 100.0)]
    CapExhaustion { fraction: f64, threshold: f64 },

    #[error("parent type index {index} out of range 1..={m}")]
    BadTypeIndex { index: usize, m: usize },

    #[error("immigration is almost surely zero; life periods cannot start")]
    ImmigrationAlwaysZero,

    #[error("power iteration did not converge for matrix {matrix}")]
    SpectralRadiusDiverged { matrix: String },

    #[error("mean-level consistency failure: {0}")]
    Inconsistency(String),

    #[error("not enough samples: need at least {need}, have {have}")]
    NotEnoughSamples { need: usize, have: usize },

    #[error("degenerate tail window: order statistics in the tail are all equal")]
    DegenerateTail,

    #[error("nonpositive samples in tail window")]
    NonpositiveTail,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 guard violation, 4 cap
    /// exhaustion, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidArgument(_) => 2,
            Error::UnstableStation { .. } => 3,
            Error::CycleCapExceeded { .. }
            | Error::PopulationOverflow { .. }
            | Error::CapExhaustion { .. } => 4,
            _ => 1,
        }
    }
}
