use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid irrep label (p, q) = ({p}, {q}) for n = {n}")]
    InvalidIrrep { p: u32, q: u32, n: u32 },

    #[error("state {0} is not in the weight diagram of the irrep")]
    StateNotInIrrep(String),

    #[error("negative square-root argument {value:e} in ladder coefficient at {state}")]
    NegativeLadderArgument { value: f64, state: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("particle number {n} exceeds the dense limit {limit}")]
    TooManyParticles { n: u32, limit: u32 },

    #[error("type vector {0:?} admits no semistandard filling of the diagram")]
    IncompatibleType([u32; 3]),

    #[error("reduced basis rank {found} differs from irrep dimension {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("degenerate couplings: {0}")]
    DegenerateRates(String),

    #[error("steady state is not unique: null space has dimension {0}")]
    DegenerateSteadyState(usize),

    #[error("steady state solve failed: {0}")]
    SteadyState(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-positive hot heat current {0:e}; efficiency undefined")]
    NonPositiveHeatCurrent(f64),

    #[error("emitted flux {0:e} too small to normalise a correlation function")]
    VanishingFlux(f64),

    #[error("integration did not converge: {0}")]
    Integration(String),

    #[error("block decomposition defect: weights sum to {0}")]
    ReconstructionDefect(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
