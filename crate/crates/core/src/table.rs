//! Survival-probability tables.

use serde::Serialize;

use crate::model::Convention;
use crate::scalar::Scalar;

/// Rigorous lower/upper envelope around a computed table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bracket<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

/// `phi[k]` is the survival probability at surplus `k * grid_step`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurvivalTable<T> {
    pub convention: Convention,
    pub grid_step: f64,
    pub phi: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Bracket<T>>,
}

impl<T: Scalar> SurvivalTable<T> {
    /// Integer-surplus table for the discrete model.
    pub fn discrete(convention: Convention, phi: Vec<T>) -> Self {
        Self {
            convention,
            grid_step: 1.0,
            phi,
            bracket: None,
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn psi(&self) -> Vec<T> {
        self.phi.iter().map(|p| T::one() - p.clone()).collect()
    }

    pub fn u_values(&self) -> Vec<f64> {
        (0..self.phi.len()).map(|k| k as f64 * self.grid_step).collect()
    }

    /// Largest drop between consecutive entries (zero for a monotone table).
    pub fn max_decrease(&self) -> f64 {
        self.phi
            .windows(2)
            .map(|w| (w[0].as_f64() - w[1].as_f64()).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn within_unit_interval(&self, slack: f64) -> bool {
        self.phi
            .iter()
            .all(|p| (-slack..=1.0 + slack).contains(&p.as_f64()))
    }

    pub fn to_f64(&self) -> SurvivalTable<f64> {
        let conv = |v: &Vec<T>| v.iter().map(|p| p.as_f64()).collect::<Vec<_>>();
        SurvivalTable {
            convention: self.convention,
            grid_step: self.grid_step,
            phi: conv(&self.phi),
            bracket: self.bracket.as_ref().map(|b| Bracket {
                lower: conv(&b.lower),
                upper: conv(&b.upper),
            }),
        }
    }
}

impl SurvivalTable<f64> {
    /// Rigorous bounds on `phi(u)` for arbitrary `u` inside the grid, using
    /// monotonicity: lower from the node at or below `u`, upper from the node at or above.
    pub fn bracket_at(&self, u: f64) -> Option<(f64, f64)> {
        let (lower, upper) = match &self.bracket {
            Some(b) => (&b.lower, &b.upper),
            None => (&self.phi, &self.phi),
        };
        let pos = u / self.grid_step;
        let lo = pos.floor();
        let hi = pos.ceil();
        let (lo_i, hi_i) = (lo as usize, hi as usize);
        if u < 0.0 || hi_i >= self.phi.len() {
            return None;
        }
        Some((lower[lo_i], upper[hi_i]))
    }

    /// Central estimate at `u` by linear interpolation between grid nodes.
    pub fn value_at(&self, u: f64) -> Option<f64> {
        let pos = u / self.grid_step;
        let k = pos.floor() as usize;
        if u < 0.0 || k >= self.phi.len() {
            return None;
        }
        if k + 1 == self.phi.len() {
            return ((pos - k as f64).abs() < 1e-9).then(|| self.phi[k]);
        }
        let w = pos - k as f64;
        Some(self.phi[k] * (1.0 - w) + self.phi[k + 1] * w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_and_bracket() {
        let t = SurvivalTable {
            convention: Convention::Weak,
            grid_step: 0.5,
            phi: vec![0.2, 0.4, 0.6],
            bracket: Some(Bracket {
                lower: vec![0.1, 0.3, 0.5],
                upper: vec![0.3, 0.5, 0.7],
            }),
        };
        assert!((t.value_at(0.25).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(t.value_at(1.0), Some(0.6));
        assert_eq!(t.value_at(1.2), None);
        assert_eq!(t.bracket_at(0.7), Some((0.3, 0.7)));
        assert_eq!(t.bracket_at(0.5), Some((0.3, 0.5)));
        assert_eq!(t.max_decrease(), 0.0);
        assert!(t.within_unit_interval(0.0));
    }
}
