//! Model descriptors for the three surplus processes.

use serde::{Deserialize, Serialize};

use crate::dist::{ClaimLaw, ContinuousClaim, IntegerPmf};
use crate::error::{Result, RuinError};
use crate::scalar::Scalar;

/// Which surplus level counts as ruin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Ruin when the surplus drops strictly below zero.
    #[default]
    Weak,
    /// Ruin when the surplus reaches zero or less at some `t >= 1`.
    Strict,
}

/// Sign of `premium income - expected claims` per period.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NetProfit {
    Positive,
    Neutral,
    Negative,
}

/// Discrete-time model with integer premium `c` per period and `N`
/// periodically repeating independent claim laws `X_1, ..., X_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct SeasonalModel<T> {
    pub c: usize,
    pub pmfs: Vec<IntegerPmf<T>>,
}

impl<T: Scalar> SeasonalModel<T> {
    pub fn new(c: usize, pmfs: Vec<IntegerPmf<T>>) -> Result<Self> {
        let m = Self { c, pmfs };
        m.validate()?;
        Ok(m)
    }

    pub fn homogeneous(c: usize, pmf: IntegerPmf<T>) -> Result<Self> {
        Self::new(c, vec![pmf])
    }

    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(RuinError::Domain("premium per period must be at least 1".into()));
        }
        if self.pmfs.is_empty() {
            return Err(RuinError::Domain("period length must be at least 1".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.pmfs.len()
    }

    /// Premium collected over one full period, `cN`.
    pub fn period_premium(&self) -> usize {
        self.c * self.period()
    }

    /// Law of `S_N = X_1 + ... + X_N`.
    pub fn period_sum(&self) -> IntegerPmf<T> {
        self.partial_sum(self.period())
    }

    /// Law of `X_1 + ... + X_l`.
    pub fn partial_sum(&self, l: usize) -> IntegerPmf<T> {
        self.pmfs[..l]
            .iter()
            .fold(IntegerPmf::point(0), |acc, p| acc.convolve(p))
    }

    pub fn expected_period_claims(&self) -> T {
        self.pmfs.iter().fold(T::zero(), |acc, p| acc + p.mean())
    }

    /// `cN - E S_N`.
    pub fn safety_margin(&self) -> T {
        T::from_usize(self.period_premium()).unwrap() - self.expected_period_claims()
    }

    pub fn net_profit(&self) -> NetProfit {
        let margin = self.safety_margin();
        let tol = T::mass_tolerance() * T::from_usize(self.period_premium().max(1)).unwrap();
        if margin.abs() <= tol {
            NetProfit::Neutral
        } else if margin > T::zero() {
            NetProfit::Positive
        } else {
            NetProfit::Negative
        }
    }

    /// `P(S_N = cN) = 1`: the surplus never moves at period ends.
    pub fn is_degenerate(&self) -> bool {
        self.period_sum().is_point_mass() == Some(self.period_premium())
    }

    /// Same model observed from the start of season `j` (0-based).
    pub fn rotated(&self, j: usize) -> Self {
        let n = self.period();
        Self {
            c: self.c,
            pmfs: (0..n).map(|i| self.pmfs[(i + j) % n].clone()).collect(),
        }
    }

    pub fn with_season(&self, j: usize, pmf: IntegerPmf<T>) -> Self {
        let mut out = self.clone();
        out.pmfs[j] = pmf;
        out
    }

    pub fn to_f64(&self) -> SeasonalModel<f64> {
        SeasonalModel {
            c: self.c,
            pmfs: self.pmfs.iter().map(|p| p.to_f64()).collect(),
        }
    }
}

/// Compound Poisson (Cramér–Lundberg) model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalModel {
    pub lambda: f64,
    pub c: f64,
    pub claim: ClaimLaw,
}

impl ClassicalModel {
    pub fn new(lambda: f64, c: f64, claim: impl Into<ClaimLaw>) -> Result<Self> {
        let m = Self {
            lambda,
            c,
            claim: claim.into(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(RuinError::Domain(format!("intensity must be positive, got {}", self.lambda)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(RuinError::Domain(format!("premium rate must be positive, got {}", self.c)));
        }
        self.claim.validate()
    }

    /// `rho = lambda E X / c`.
    pub fn load(&self) -> f64 {
        self.lambda * self.claim.mean() / self.c
    }

    pub fn is_neutral(&self) -> bool {
        (self.lambda * self.claim.mean() - self.c).abs() <= 1e-12 * self.c.max(1.0)
    }

    pub fn with_claim(&self, claim: impl Into<ClaimLaw>) -> Self {
        Self {
            claim: claim.into(),
            ..self.clone()
        }
    }

    /// The same process as a renewal model with `Exp(lambda)` inter-arrivals.
    pub fn as_andersen(&self) -> AndersenModel {
        AndersenModel {
            c: self.c,
            claim: self.claim.clone(),
            interarrival: ContinuousClaim::Exponential {
                mean: 1.0 / self.lambda,
            },
        }
    }
}

/// Renewal (E. Sparre Andersen) model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AndersenModel {
    pub c: f64,
    pub claim: ClaimLaw,
    pub interarrival: ContinuousClaim,
}

impl AndersenModel {
    pub fn new(c: f64, claim: impl Into<ClaimLaw>, interarrival: ContinuousClaim) -> Result<Self> {
        let m = Self {
            c,
            claim: claim.into(),
            interarrival,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(RuinError::Domain(format!("premium rate must be positive, got {}", self.c)));
        }
        self.claim.validate()?;
        self.interarrival.validate()?;
        if self.interarrival.point_value() == Some(0.0) {
            return Err(RuinError::DegenerateModel("inter-arrival time is identically zero".into()));
        }
        Ok(())
    }

    /// `E X - c E theta`.
    pub fn drift(&self) -> f64 {
        self.claim.mean() - self.c * self.interarrival.mean()
    }

    pub fn is_neutral(&self) -> bool {
        self.drift().abs() <= 1e-12 * (self.c * self.interarrival.mean()).max(1.0)
    }

    /// Both laws degenerate with `X = c theta`: the excluded trivial case.
    pub fn is_degenerate(&self) -> bool {
        match (self.claim.point_value(), self.interarrival.point_value()) {
            (Some(x), Some(t)) => (x - self.c * t).abs() <= 1e-12 * x.abs().max(1.0),
            _ => false,
        }
    }

    pub fn with_claim(&self, claim: impl Into<ClaimLaw>) -> Self {
        Self {
            claim: claim.into(),
            ..self.clone()
        }
    }
}
