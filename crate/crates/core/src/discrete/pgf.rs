//! Survival probabilities as power-series coefficients of `P(s) / (G(s) - s^c)`.

use num_complex::Complex64;
use serde::Serialize;

use super::roots::{eval_real_poly, find_unit_disk_roots, outer_factor, solve_numerator, RootSet};
use super::series::series_divide;
use crate::dist::IntegerPmf;
use crate::error::{Result, RuinError};
use crate::model::{Convention, NetProfit, SeasonalModel};
use crate::scalar::Scalar;
use crate::table::SurvivalTable;

/// Full output of the homogeneous solver.
#[derive(Clone, Debug, Serialize)]
pub struct PgfSolution<T> {
    pub table: SurvivalTable<T>,
    /// Numerator `P` (ascending) of the model after any support shift.
    pub numerator: Vec<f64>,
    pub roots: RootSet,
    /// Minimum claim subtracted from the support (and from the premium).
    pub shift: usize,
}

/// Weak-convention `phi(0..=u_max)` for a homogeneous model with premium `c`.
///
/// With premium 1 (after removing the minimum claim) the division
/// `(c - EX) / (G(s) - s)` runs in `T` arithmetic, so exact rationals stay
/// exact. Larger premiums go through the roots in floating point.
pub fn survival_pgf_coefficients<T: Scalar>(
    pmf: &IntegerPmf<T>,
    c: usize,
    u_max: usize,
) -> Result<SurvivalTable<T>> {
    Ok(pgf_solution(pmf, c, u_max)?.table)
}

pub fn pgf_solution<T: Scalar>(pmf: &IntegerPmf<T>, c: usize, u_max: usize) -> Result<PgfSolution<T>> {
    let model = SeasonalModel::homogeneous(c, pmf.clone())?;
    if model.net_profit() != NetProfit::Positive {
        return Err(RuinError::NpcViolation(format!(
            "E X = {:?} is not below c = {c}",
            pmf.mean()
        )));
    }
    // E X < c forces min X < c
    let shift = pmf.min_value();
    let model = SeasonalModel::homogeneous(c - shift, pmf.shift_down(shift)?)?;
    let roots = find_unit_disk_roots(&model)?;
    let numerator = solve_numerator(&model, &roots)?;
    let terms = u_max + 1;
    let phi = if model.c == 1 {
        let g = model.pmfs[0].probs();
        let mut den: Vec<T> = g.to_vec();
        if den.len() < 2 {
            den.resize(2, T::zero());
        }
        den[1] = den[1].clone() - T::one();
        series_divide(&[model.safety_margin()], &den, terms)?
    } else {
        let r = outer_factor(&model, &roots);
        let r1: f64 = r.iter().sum();
        let q = series_divide(&[r1], &r, terms)?;
        let mut acc = 0.0;
        q.iter()
            .map(|&x| {
                acc += x;
                T::from_f64_lossy(acc)
            })
            .collect()
    };
    Ok(PgfSolution {
        table: SurvivalTable::discrete(Convention::Weak, phi),
        numerator,
        roots,
        shift,
    })
}

/// `sum_u phi(u) s^u` truncated to the table, for `|s| < 1`.
pub fn survival_series_at<T: Scalar>(phi: &[T], s: Complex64) -> Complex64 {
    let coeffs: Vec<f64> = phi.iter().map(|p| p.as_f64()).collect();
    eval_real_poly(&coeffs, s)
}
