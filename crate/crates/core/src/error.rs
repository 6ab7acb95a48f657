use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("derivative order {order} exceeds smoothness order {max}")]
    DerivativeOrder { order: usize, max: usize },

    #[error("derivative at the jump k=0 requires the one-sided flag")]
    DerivativeAtJump,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid size {needed} exceeds configured maximum {max}")]
    GridTooLarge { needed: usize, max: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("carrier wavenumber {k0} is not on the lattice")]
    CarrierOffLattice { k0: f64 },

    #[error("sampling budget exceeded ({0} evaluations)")]
    SamplingBudget(usize),

    #[error("near-singular denominator {value:.3e} at k = {k:.6} (margin {margin:.1e}); check the resonance report")]
    NearResonance { k: f64, value: f64, margin: f64 },

    #[error("kernel denominator vanishes on the lattice at (k, m) = ({k:.6}, {m:.6})")]
    KernelSingular { k: f64, m: f64 },

    #[error("inverse of the truncated weight is undefined (it vanishes near k = 0)")]
    TruncatedWeightInverse,

    #[error("instability guard tripped at t = {t:.6}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("step budget exceeded: {steps} steps > {budget}")]
    StepBudget { steps: usize, budget: usize },

    #[error("blow-up guard: max|A| grew by factor {factor:.3e} at T = {t_slow:.6}")]
    EnvelopeBlowup { t_slow: f64, factor: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("schedule mismatch: {0}")]
    ScheduleMismatch(String),

    #[error("study member failed at eps = {eps}: {source}")]
    StudyMember {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed container: {0}")]
    Container(String),
}
