use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("chain length {len} is below the minimum {min} for model `{model}`")]
    ChainTooShort { model: String, len: usize, min: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("bath `{0}` is not compatible with this model")]
    IncompatibleBath(String),

    #[error("state space of {states} configurations exceeds the enumeration cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u64 },

    #[error("packing scheme `{scheme}` is not compatible with model `{model}`")]
    IncompatibleScheme { scheme: String, model: String },

    #[error("observable `{observable}` is not defined for model `{model}`")]
    IncompatibleObservable { observable: String, model: String },

    #[error("sector-uniform dynamics requires a Krylov decomposition")]
    MissingDecomposition,

    #[error("the cut is empty")]
    EmptyCut,

    #[error("exhaustive search over {nodes} nodes exceeds the cap of {cap}")]
    ExhaustiveTooLarge { nodes: usize, cap: usize },

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("chain is not reversible with respect to its stationary measure")]
    NotReversible,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("node {0} has no outgoing probability mass")]
    NoOutgoingMass(usize),

    #[error("invalid simulation setup: {0}")]
    InvalidSimulation(String),

    #[error("fit window [{lo}, {hi}] holds fewer than two usable points")]
    EmptyFitWindow { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnknownModel(_) => "unknown_model",
            Error::InvalidParams(_) => "invalid_params",
            Error::ChainTooShort { .. } => "chain_too_short",
            Error::InvalidConfiguration(_) => "invalid_configuration",
            Error::IncompatibleBath(_) => "incompatible_bath",
            Error::StateSpaceTooLarge { .. } => "state_space_too_large",
            Error::IncompatibleScheme { .. } => "incompatible_scheme",
            Error::IncompatibleObservable { .. } => "incompatible_observable",
            Error::MissingDecomposition => "missing_decomposition",
            Error::EmptyCut => "empty_cut",
            Error::ExhaustiveTooLarge { .. } => "exhaustive_too_large",
            Error::OutOfRange(_) => "out_of_range",
            Error::NotReversible => "not_reversible",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NoOutgoingMass(_) => "no_outgoing_mass",
            Error::InvalidSimulation(_) => "invalid_simulation",
            Error::EmptyFitWindow { .. } => "empty_fit_window",
        }
    }
}
