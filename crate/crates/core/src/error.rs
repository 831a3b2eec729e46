use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-periodic phase: kappa = {kappa}, epsilon = {epsilon} gives {winding} windings over the period")]
    NonPeriodicPhase {
        kappa: f64,
        epsilon: f64,
        winding: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unstable mode k = {k}: |mu_k| = {mu} >= 1")]
    UnstableMode { k: i64, mu: f64 },

    #[error("stability condition violated: theta = {theta} >= 1 ({component})")]
    StabilityViolation { theta: f64, component: String },

    #[error("fixed-point non-convergence after {iterations} iterations (last update {residual:e})")]
    FixedPointNonConvergence { iterations: usize, residual: f64 },

    #[error("multi-index must have odd length, got {0}")]
    EvenMultiIndex(usize),

    #[error("multi-index entry {index} out of range for {len} wave vectors")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("saturation failure: wave-vector set still growing after {rounds} rounds ({size} vectors)")]
    SaturationFailure { rounds: usize, size: usize },

    #[error("near-resonant triple {triple:?}: |delta| = {delta:e} below tolerance")]
    NearResonance { triple: (usize, usize, usize), delta: f64 },

    #[error("modulation blow-up at t = {t}: max amplitude {amplitude}")]
    ModulationBlowUp { t: f64, amplitude: f64 },

    #[error("time {t} outside the solved range or off the stored time grid (T = {t_final})")]
    Extrapolation { t: f64, t_final: f64 },

    #[error("unresolved oracle grid: h_fine = {h_fine} > epsilon/8 = {limit}")]
    UnresolvedGrid { h_fine: f64, limit: f64 },

    #[error("self-convergence failure: step halving changed the result by {change:e} (tolerance {tol:e})")]
    SelfConvergence { change: f64, tol: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
