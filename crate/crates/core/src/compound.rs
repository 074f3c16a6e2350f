//! Compound-geometric sums `(1 - rho) sum_n rho^n F^{*n}(u)` on a uniform grid.
//!
//! A ladder-height law `F` is placed on the grid `k h` three ways. Rounding
//! every value up makes the sum stochastically larger (a lower bound for the
//! survival probability), rounding down makes it smaller (an upper bound),
//! and rounding to the nearest node, read with half the atom at the
//! evaluation point, gives a second-order central value.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RuinError};
use crate::table::{Bracket, SurvivalTable};
use crate::model::Convention;

/// Outputs at least this long are convolved in parallel.
const PAR_THRESHOLD: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Up,
    Down,
    Nearest,
}

/// Grid masses of a law given by its CDF (assumed continuous), nodes `0..=m`.
/// Mass beyond the last node is dropped.
pub fn discretize_cdf(cdf: impl Fn(f64) -> f64, h: f64, m: usize, rounding: Rounding) -> Vec<f64> {
    let at = |x: f64| if x <= 0.0 { 0.0 } else { cdf(x) };
    (0..=m)
        .map(|k| {
            let k = k as f64;
            let (lo, hi) = match rounding {
                Rounding::Down => (k * h, (k + 1.0) * h),
                Rounding::Up => ((k - 1.0) * h, k * h),
                Rounding::Nearest => ((k - 0.5) * h, (k + 0.5) * h),
            };
            (at(hi) - at(lo)).max(0.0)
        })
        .collect()
}

/// Grid masses of an empirical law, nodes `0..=m`.
pub fn discretize_sample(sample: &[f64], h: f64, m: usize, rounding: Rounding) -> Vec<f64> {
    let mut counts = vec![0u64; m + 1];
    for &x in sample {
        let pos = x / h;
        let k = match rounding {
            Rounding::Down => pos.floor(),
            Rounding::Up => pos.ceil(),
            Rounding::Nearest => pos.round(),
        };
        if k >= 0.0 && (k as usize) <= m {
            counts[k as usize] += 1;
        }
    }
    let n = sample.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// Smallest `N` with `rho^{N+1} / (1 - rho) < tol`.
pub fn terms_for(rho: f64, tol: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&rho) {
        return Err(RuinError::NpcViolation(format!("geometric parameter {rho} outside [0, 1)")));
    }
    if !(tol > 0.0) {
        return Err(RuinError::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if rho == 0.0 {
        return Ok(0);
    }
    let n = ((tol * (1.0 - rho)).ln() / rho.ln() - 1.0).ceil().max(0.0) as usize;
    // guard against rounding at the boundary
    Ok(if rho.powi(n as i32 + 1) / (1.0 - rho) < tol { n } else { n + 1 })
}

fn convolve_truncated(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len();
    let cell = |k: usize| -> f64 {
        let mut acc = 0.0;
        for j in 0..=k.min(b.len() - 1) {
            acc += b[j] * a[k - j];
        }
        acc
    };
    if len >= PAR_THRESHOLD {
        (0..len).into_par_iter().map(cell).collect()
    } else {
        (0..len).map(cell).collect()
    }
}

/// `(1 - rho) sum_{n=0}^{terms} rho^n g^{*n}` as grid masses (same length as `g`).
pub fn compound_geometric(g: &[f64], rho: f64, terms: usize) -> Vec<f64> {
    let mut total = vec![0.0; g.len()];
    let mut power = vec![0.0; g.len()];
    power[0] = 1.0;
    let mut weight = 1.0 - rho;
    for n in 0..=terms {
        if n > 0 {
            power = convolve_truncated(&power, g);
            weight *= rho;
        }
        for (t, p) in total.iter_mut().zip(&power) {
            *t += weight * p;
        }
    }
    total
}

/// `P(Y <= k h)` at every node.
pub fn cdf_inclusive(masses: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    masses
        .iter()
        .map(|m| {
            acc += m;
            acc.min(1.0)
        })
        .collect()
}

/// `P(Y < k h) + P(Y = k h) / 2` at every node.
pub fn cdf_half_node(masses: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    masses
        .iter()
        .map(|m| {
            let v = acc + 0.5 * m;
            acc += m;
            v.min(1.0)
        })
        .collect()
}

/// Result of a compound-geometric survival computation.
#[derive(Clone, Debug, Serialize)]
pub struct PkSeries {
    /// `psi(0)`, the geometric parameter.
    pub psi0: f64,
    pub grid_step: f64,
    /// Number of convolution powers kept.
    pub terms: usize,
    /// `psi0^{N+1} / (1 - psi0)`: bound on the dropped tail of the series.
    pub truncation_bound: f64,
    /// Ladder-height CDF at the grid nodes (nearest rounding, half node).
    pub ladder_cdf: Vec<f64>,
    pub table: SurvivalTable<f64>,
}

/// Ladder-height law on the grid under all three roundings.
pub struct GridLaw {
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    pub nearest: Vec<f64>,
}

impl GridLaw {
    pub fn from_cdf(cdf: impl Fn(f64) -> f64 + Copy, h: f64, m: usize) -> Self {
        Self {
            up: discretize_cdf(cdf, h, m, Rounding::Up),
            down: discretize_cdf(cdf, h, m, Rounding::Down),
            nearest: discretize_cdf(cdf, h, m, Rounding::Nearest),
        }
    }

    pub fn from_sample(sample: &[f64], h: f64, m: usize) -> Self {
        Self {
            up: discretize_sample(sample, h, m, Rounding::Up),
            down: discretize_sample(sample, h, m, Rounding::Down),
            nearest: discretize_sample(sample, h, m, Rounding::Nearest),
        }
    }
}

/// Survival table `phi(k h)`, `k = 0..=m`, with a rigorous bracket for the
/// given ladder law: rounding up and truncating give the lower bound,
/// rounding down plus the truncation remainder give the upper bound.
pub fn pk_table(law: &GridLaw, rho: f64, h: f64, tol: f64) -> Result<PkSeries> {
    let terms = terms_for(rho, tol)?;
    let remainder = if rho == 0.0 { 0.0 } else { rho.powi(terms as i32 + 1) / (1.0 - rho) };
    let lower = cdf_inclusive(&compound_geometric(&law.up, rho, terms));
    let upper: Vec<f64> = cdf_inclusive(&compound_geometric(&law.down, rho, terms))
        .into_iter()
        .map(|v| (v + (1.0 - rho) * remainder).min(1.0))
        .collect();
    let mut central = cdf_half_node(&compound_geometric(&law.nearest, rho, terms));
    // the node at u = 0 carries no atom of the continuous part
    central[0] = 1.0 - rho;
    for (c, (lo, hi)) in central.iter_mut().zip(lower.iter().zip(&upper)) {
        *c = c.clamp(*lo, *hi);
    }
    Ok(PkSeries {
        psi0: rho,
        grid_step: h,
        terms,
        truncation_bound: remainder,
        ladder_cdf: cdf_half_node(&law.nearest),
        table: SurvivalTable {
            convention: Convention::Weak,
            grid_step: h,
            phi: central,
            bracket: Some(Bracket { lower, upper }),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_count_meets_tolerance() {
        for &(rho, tol) in &[(0.8, 1e-6), (0.5, 1e-3), (0.975, 1e-8), (0.1, 1.0)] {
            let n = terms_for(rho, tol).unwrap();
            assert!(rho.powi(n as i32 + 1) / (1.0 - rho) < tol);
            if n > 0 {
                assert!(rho.powi(n as i32) / (1.0 - rho) >= tol);
            }
        }
        assert!(terms_for(1.0, 1e-6).is_err());
    }

    #[test]
    fn geometric_count_of_unit_steps() {
        // ladder height 1 exactly: Y = h * K with K geometric
        let g = vec![0.0, 1.0, 0.0, 0.0, 0.0];
        let y = compound_geometric(&g, 0.5, 60);
        for (k, v) in y.iter().enumerate() {
            assert!((v - 0.5f64.powi(k as i32 + 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn panjer_recursion_agrees() {
        // independent check: Panjer's recursion for the compound geometric law
        let g: Vec<f64> = discretize_cdf(|x| 1.0 - (-x).exp(), 0.1, 200, Rounding::Down);
        let rho = 0.7;
        let direct = compound_geometric(&g, rho, terms_for(rho, 1e-14).unwrap());
        let mut panjer = vec![0.0; g.len()];
        let scale = 1.0 / (1.0 - rho * g[0]);
        panjer[0] = (1.0 - rho) * scale;
        for k in 1..g.len() {
            let s: f64 = (1..=k).map(|j| g[j] * panjer[k - j]).sum();
            panjer[k] = rho * scale * s;
        }
        for (a, b) in direct.iter().zip(&panjer) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn sample_rounding() {
        let s = [0.0, 0.24, 0.26, 0.5];
        assert_eq!(discretize_sample(&s, 0.5, 2, Rounding::Down), vec![0.75, 0.25, 0.0]);
        assert_eq!(discretize_sample(&s, 0.5, 2, Rounding::Up), vec![0.25, 0.75, 0.0]);
        assert_eq!(discretize_sample(&s, 0.5, 2, Rounding::Nearest), vec![0.5, 0.5, 0.0]);
        assert_eq!(cdf_half_node(&[0.5, 0.5]), vec![0.25, 0.75]);
    }
}
