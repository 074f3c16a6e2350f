//! Pollaczek–Khinchine computation for the compound Poisson model.

use serde::Serialize;

use crate::compound::{pk_table, GridLaw, PkSeries};
use crate::dist::{perturb_continuous, ClaimLaw};
use crate::error::{Result, RuinError};
use crate::model::ClassicalModel;

/// Default grid step for the integrated-tail discretization.
pub const DEFAULT_GRID_STEP: f64 = 0.01;

/// `psi(0) = lambda E X / c`; a load above one is rejected.
pub fn pk_psi0(model: &ClassicalModel) -> Result<f64> {
    model.validate()?;
    let rho = model.load();
    if model.is_neutral() {
        return Ok(1.0);
    }
    if rho > 1.0 {
        return Err(RuinError::NpcViolation(format!("load lambda E X / c = {rho} exceeds 1")));
    }
    Ok(rho)
}

/// Survival probabilities on `0, h, ..., >= u_max` from the integrated-tail
/// law of the claims. The series is cut at `N` terms with
/// `psi0^{N+1} / (1 - psi0) < tol`.
pub fn pk_survival(model: &ClassicalModel, u_max: f64, tol: f64, grid_step: f64) -> Result<PkSeries> {
    let rho = pk_psi0(model)?;
    if model.is_neutral() {
        return Err(RuinError::NpcViolation("neutral load: the series diverges".into()));
    }
    if !(grid_step > 0.0) || !(u_max >= 0.0) {
        return Err(RuinError::Domain(format!(
            "need grid_step > 0 and u_max >= 0, got {grid_step} and {u_max}"
        )));
    }
    let m = (u_max / grid_step - 1e-9).ceil().max(0.0) as usize;
    let law = integrated_tail_law(&model.claim, grid_step, m);
    pk_table(&law, rho, grid_step, tol)
}

/// Integrated-tail law `F_I` on the grid, from the exact tail integral.
pub fn integrated_tail_law(claim: &ClaimLaw, h: f64, m: usize) -> GridLaw {
    let mean = claim.mean();
    GridLaw::from_cdf(|x| (claim.tail_integral(x) / mean).min(1.0), h, m)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalSweepRow {
    pub epsilon: f64,
    pub psi0: f64,
    pub u: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_lower: Vec<f64>,
    pub phi_upper: Vec<f64>,
    pub terms: usize,
    pub truncation_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalSweep {
    pub a: f64,
    /// Set when the base model is not neutral; the sweep still runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub rows: Vec<ClassicalSweepRow>,
}

/// Replaces the claim by `X - eps 1{X > a}` for each `eps` and evaluates
/// `psi*(0)` and `phi*(u)` at the requested points.
pub fn epsilon_sweep_classical(
    model: &ClassicalModel,
    a: f64,
    eps_list: &[f64],
    u_list: &[f64],
    tol: f64,
    grid_step: f64,
) -> Result<ClassicalSweep> {
    let base = match &model.claim {
        ClaimLaw::Plain(c) => c.clone(),
        ClaimLaw::Perturbed(_) => {
            return Err(RuinError::Domain("sweep needs an unperturbed base claim".into()));
        }
    };
    let warning = (!model.is_neutral()).then(|| {
        RuinError::NotNeutral(format!("lambda E X - c = {}", model.lambda * base.mean() - model.c)).to_string()
    });
    let u_max = u_list.iter().copied().fold(0.0, f64::max);
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let starred = model.with_claim(perturb_continuous(&base, a, eps)?);
            let series = pk_survival(&starred, u_max, tol, grid_step)?;
            let t = &series.table;
            let pick = |u: f64| t.value_at(u).ok_or_else(|| RuinError::Domain(format!("u = {u} off grid")));
            let bracket = |u: f64| t.bracket_at(u).ok_or_else(|| RuinError::Domain(format!("u = {u} off grid")));
            let (mut phi, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());
            for &u in u_list {
                phi.push(pick(u)?);
                let (l, h) = bracket(u)?;
                lo.push(l);
                hi.push(h);
            }
            Ok(ClassicalSweepRow {
                epsilon: eps,
                psi0: series.psi0,
                u: u_list.to_vec(),
                phi,
                phi_lower: lo,
                phi_upper: hi,
                terms: series.terms,
                truncation_bound: series.truncation_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassicalSweep { a, warning, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ContinuousClaim;

    fn mm(c: f64) -> ClassicalModel {
        ClassicalModel::new(1.0, c, ContinuousClaim::exponential(1.0).unwrap()).unwrap()
    }

    #[test]
    fn psi0_examples() {
        assert_eq!(pk_psi0(&mm(1.0)).unwrap(), 1.0);
        assert!((pk_psi0(&mm(1.25)).unwrap() - 0.8).abs() < 1e-15);
        assert!(matches!(pk_psi0(&mm(0.8)), Err(RuinError::NpcViolation(_))));
        let e = ContinuousClaim::exponential(1.0).unwrap();
        let p = perturb_continuous(&e, 2f64.ln(), 0.2).unwrap();
        assert!((pk_psi0(&mm(1.0).with_claim(p)).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn exponential_claims_closed_form() {
        let s = pk_survival(&mm(1.25), 10.0, 1e-6, DEFAULT_GRID_STEP).unwrap();
        assert!(s.truncation_bound < 1e-6);
        for &u in &[0.0, 1.0, 2.0, 5.0, 10.0] {
            let exact = 1.0 - 0.8 * (-0.2 * u as f64).exp();
            let got = s.table.value_at(u).unwrap();
            assert!((got - exact).abs() < 1e-5, "u = {u}: {got} vs {exact}");
            let (lo, hi) = s.table.bracket_at(u).unwrap();
            assert!(lo <= exact + 1e-12 && exact <= hi + 1e-12);
        }
        assert!(s.table.max_decrease() == 0.0);
    }

    #[test]
    fn neutral_rejected() {
        assert!(matches!(pk_survival(&mm(1.0), 5.0, 1e-6, 0.01), Err(RuinError::NpcViolation(_))));
    }

    #[test]
    fn sweep_trend() {
        let sweep = epsilon_sweep_classical(&mm(1.0), 2f64.ln(), &[0.2, 0.1, 0.05], &[0.0, 1.0, 3.0], 1e-6, 0.02)
            .unwrap();
        assert!(sweep.warning.is_none());
        for row in &sweep.rows {
            assert!((row.psi0 - (1.0 - 0.5 * row.epsilon)).abs() < 1e-12);
        }
        for pair in sweep.rows.windows(2) {
            for k in 0..3 {
                assert!(pair[1].phi[k] <= pair[0].phi[k]);
            }
        }
        let off = epsilon_sweep_classical(&mm(1.25), 1.0, &[0.1], &[0.0], 1e-6, 0.05).unwrap();
        assert!(off.warning.unwrap().contains("not neutral"));
    }
}
