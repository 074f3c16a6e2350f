use thiserror::Error;

pub type Result<T> = std::result::Result<T, RuinError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuinError {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("no probability mass at value {0}")]
    EmptySite(usize),
    #[error("claim tail is empty above threshold {0}")]
    EmptyTail(f64),
    #[error("degenerate model: {0}")]
    DegenerateModel(String),
    #[error("distribution is degenerate at zero (Laplace value {0} >= 1)")]
    DegenerateAtZero(f64),
    #[error("net profit condition violated: {0}")]
    NpcViolation(String),
    #[error("model is not neutral: {0}")]
    NotNeutral(String),
    #[error("P(X = 0) = 0; shift the support before recursing")]
    NeedsShift,
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("root polishing failed (residual {residual:e})")]
    RootFailure { residual: f64 },
    #[error("P(all claims in a period are zero) = 0; relation cannot be inverted")]
    CannotInvert,
    #[error("initial survival block is inconsistent (residual {residual:e} at u = {u})")]
    InconsistentBlock { u: usize, residual: f64 },
    #[error("Monte Carlo block too noisy: CI width {width:e} exceeds {gate:e}")]
    BlockTooNoisy { width: f64, gate: f64 },
    #[error("state budget exceeded: reached horizon {achieved} of {requested} (psi = {psi_at_achieved})")]
    StateBudgetExceeded {
        achieved: usize,
        requested: usize,
        psi_at_achieved: f64,
    },
    #[error("coupling broken: {violations} path(s) with starred partial sum above original")]
    CouplingBroken { violations: u64 },
    #[error("censoring inconsistent with Spitzer estimate: ladder fraction {ladder:.5} vs {spitzer:.5} (z = {z:.2})")]
    CensoringTooHigh { ladder: f64, spitzer: f64, z: f64 },
}

impl RuinError {
    /// Model-validation failures as opposed to numerical ones.
    pub fn is_model_error(&self) -> bool {
        !self.is_numerical()
    }

    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            RuinError::RootFailure { .. }
                | RuinError::CouplingBroken { .. }
                | RuinError::InconsistentBlock { .. }
                | RuinError::BlockTooNoisy { .. }
                | RuinError::StateBudgetExceeded { .. }
                | RuinError::CensoringTooHigh { .. }
        )
    }
}
