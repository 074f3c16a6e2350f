//! The `N`-step relation for seasonal models.
//!
//! Starting a period at surplus `u`, survival means
//! `phi(u) = sum_s w_u(s) phi(u + cN - s)`, where `w_u(s)` is the probability
//! that the period's claims total `s` without the surplus dropping below zero
//! at any intermediate step.

use num_complex::Complex64;
use serde::Serialize;

use super::dp::dp_survival_block;
use super::pgf::{pgf_solution, survival_series_at};
use super::roots::eval_real_poly;
use crate::error::{Result, RuinError};
use crate::mc::{simulate_ruin, DiscreteSampler, McConfig, McEstimate};
use crate::model::{Convention, SeasonalModel};
use crate::scalar::Scalar;
use crate::table::SurvivalTable;

/// Largest admissible deviation of the relation after extension.
pub const RELATION_TOL: f64 = 1e-8;
/// Slack on `[0, 1]` for extended values before the block is rejected.
const RANGE_SLACK: f64 = 1e-6;

/// `w_u(s)` for `s = 0..`; `u` may be negative (the strict-convention start).
pub fn period_weights<T: Scalar>(model: &SeasonalModel<T>, u: i64) -> Vec<T> {
    let c = model.c as i64;
    let mut w: Vec<T> = vec![T::one()];
    for (j, pmf) in model.pmfs.iter().enumerate() {
        let cap = u + (j as i64 + 1) * c;
        if cap < 0 {
            return Vec::new();
        }
        let len = (w.len() + pmf.max_value()).min(cap as usize + 1);
        let mut next = vec![T::zero(); len];
        for (a, wa) in w.iter().enumerate() {
            if wa.is_zero() {
                continue;
            }
            for (b, hb) in pmf.probs().iter().enumerate() {
                if a + b >= len {
                    break;
                }
                next[a + b] = next[a + b].clone() + wa.clone() * hb.clone();
            }
        }
        w = next;
    }
    w
}

fn relation_rhs<T: Scalar>(w: &[T], phi: &[T], top: usize) -> T {
    w.iter()
        .enumerate()
        .filter(|(s, _)| *s <= top)
        .fold(T::zero(), |acc, (s, ws)| acc + ws.clone() * phi[top - s].clone())
}

/// Extends `phi(0..cN)` to `phi(0..=u_max)` by solving the relation for its
/// highest-argument term, then re-checks the relation at every `u`.
pub fn seasonal_recurrence_step<T: Scalar>(
    model: &SeasonalModel<T>,
    block: &[T],
    u_max: usize,
) -> Result<SurvivalTable<T>> {
    let cn = model.period_premium();
    if block.len() != cn {
        return Err(RuinError::Domain(format!(
            "initial block needs cN = {cn} values, got {}",
            block.len()
        )));
    }
    for (u, v) in block.iter().enumerate() {
        let x = v.as_f64();
        if !(0.0..=1.0).contains(&x) {
            return Err(RuinError::InconsistentBlock {
                u,
                residual: x.min(1.0 - x).abs(),
            });
        }
    }
    let w0 = model
        .pmfs
        .iter()
        .fold(T::one(), |acc, p| acc * p.prob(0));
    if w0.is_zero() {
        return Err(RuinError::CannotInvert);
    }
    let saturated = model.period_sum().max_value();
    let full = period_weights(model, saturated as i64);
    let mut phi: Vec<T> = block.to_vec();
    phi.reserve(u_max.saturating_sub(phi.len()) + 1);
    for v in cn..=u_max.max(cn - 1) {
        let u = v - cn;
        let partial;
        let w: &[T] = if u >= saturated {
            &full
        } else {
            partial = period_weights(model, u as i64);
            &partial
        };
        let rest = w
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(s, _)| *s <= v)
            .fold(T::zero(), |acc, (s, ws)| acc + ws.clone() * phi[v - s].clone());
        let value = (phi[u].clone() - rest) / w0.clone();
        let x = value.as_f64();
        if !(-RANGE_SLACK..=1.0 + RANGE_SLACK).contains(&x) {
            return Err(RuinError::InconsistentBlock {
                u: v,
                residual: if x < 0.0 { -x } else { x - 1.0 },
            });
        }
        phi.push(value);
    }
    phi.truncate(u_max + 1);
    let worst = relation_residuals(model, &phi)
        .into_iter()
        .enumerate()
        .fold((0, 0.0), |best, (u, r)| if r > best.1 { (u, r) } else { best });
    if worst.1 > RELATION_TOL {
        return Err(RuinError::InconsistentBlock {
            u: worst.0,
            residual: worst.1,
        });
    }
    Ok(SurvivalTable::discrete(Convention::Weak, phi))
}

/// `|phi(u) - sum_s w_u(s) phi(u + cN - s)|` for every `u` the table covers.
pub fn relation_residuals<T: Scalar>(model: &SeasonalModel<T>, phi: &[T]) -> Vec<f64> {
    let cn = model.period_premium();
    (0..phi.len().saturating_sub(cn))
        .map(|u| {
            let w = period_weights(model, u as i64);
            (phi[u].clone() - relation_rhs(&w, phi, u + cn)).as_f64().abs()
        })
        .collect()
}

/// Strict-convention table from a weak one: `phi_hat(u) = phi(u - 1)`, with
/// `phi_hat(0)` taken from the relation started at `u = -1`. The result has
/// the same length as the input.
pub fn weak_to_strict<T: Scalar>(model: &SeasonalModel<T>, weak: &SurvivalTable<T>) -> Result<SurvivalTable<T>> {
    if weak.convention != Convention::Weak {
        return Err(RuinError::Domain("expected a weak-convention table".into()));
    }
    let top = model.period_premium() - 1;
    if weak.phi.len() <= top {
        return Err(RuinError::Domain(format!("table must reach u = {top}")));
    }
    let w = period_weights(model, -1);
    let mut phi = Vec::with_capacity(weak.phi.len());
    phi.push(relation_rhs(&w, &weak.phi, top));
    phi.extend(weak.phi[..weak.phi.len() - 1].iter().cloned());
    Ok(SurvivalTable::discrete(Convention::Strict, phi))
}

/// Where the first `cN` survival values of a seasonal model come from.
#[derive(Clone, Debug, PartialEq)]
pub enum BlockSource {
    /// Finite-horizon Monte Carlo, rejected when any Wilson interval is wider than `max_ci_width`.
    MonteCarlo { config: McConfig, max_ci_width: f64 },
    /// Finite-horizon dynamic programming.
    Dp { horizon: usize, max_states: usize },
}

impl BlockSource {
    pub fn monte_carlo(config: McConfig) -> Self {
        Self::MonteCarlo {
            config,
            max_ci_width: 1e-3,
        }
    }
}

/// Block values with the Monte Carlo estimates behind them, if any.
#[derive(Clone, Debug, Serialize)]
pub struct InitialBlock {
    pub phi: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<McEstimate>>,
}

pub fn initial_block(model: &SeasonalModel<f64>, source: &BlockSource) -> Result<InitialBlock> {
    let cn = model.period_premium();
    match source {
        BlockSource::Dp { horizon, max_states } => Ok(InitialBlock {
            phi: dp_survival_block(model, cn, *horizon, Convention::Weak, *max_states)?,
            estimates: None,
        }),
        BlockSource::MonteCarlo { config, max_ci_width } => {
            let sampler = DiscreteSampler::new(model);
            let mut estimates = Vec::with_capacity(cn);
            for v in 0..cn {
                let est = simulate_ruin(&sampler, v as f64, Convention::Weak, config)?;
                if est.ci_width() > *max_ci_width {
                    return Err(RuinError::BlockTooNoisy {
                        width: est.ci_width(),
                        gate: *max_ci_width,
                    });
                }
                estimates.push(est);
            }
            Ok(InitialBlock {
                phi: estimates.iter().map(|e| 1.0 - e.p_hat).collect(),
                estimates: Some(estimates),
            })
        }
    }
}

/// Weak-convention survival table of a seasonal model. Homogeneous models are
/// solved through the generating function; otherwise the block comes from
/// `source` and is extended by the relation.
pub fn seasonal_survival(
    model: &SeasonalModel<f64>,
    source: &BlockSource,
    u_max: usize,
) -> Result<(SurvivalTable<f64>, Option<InitialBlock>)> {
    if model.period() == 1 {
        return Ok((pgf_solution(&model.pmfs[0], model.c, u_max)?.table, None));
    }
    let block = initial_block(model, source)?;
    let table = seasonal_recurrence_step(model, &block.phi, u_max.max(model.period_premium() - 1))?;
    let table = SurvivalTable {
        phi: table.phi[..=u_max].to_vec(),
        ..table
    };
    Ok((table, Some(block)))
}

/// `m^{(j)}_i = phi_j(i) - phi_j(i - 1)` for `i < c`, with `phi_j(-1) = 0`;
/// `tables[j]` is the survival table of the model entered at season `j`.
pub fn m_vector(c: usize, tables: &[Vec<f64>]) -> Vec<f64> {
    tables
        .iter()
        .flat_map(|phi| (0..c).map(move |i| phi[i] - if i == 0 { 0.0 } else { phi[i - 1] }))
        .collect()
}

/// Numerator `sum_i u_i(s) v_i(s)` of the seasonal generating function for a
/// given `m`-vector (`cN` entries, season-major).
pub fn seasonal_numerator_at(model: &SeasonalModel<f64>, m: &[f64], s: Complex64) -> Complex64 {
    let c = model.c;
    let n = model.period();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 1..=n {
        let g_prev: Vec<f64> = model.partial_sum(i - 1).probs().to_vec();
        let u_i = s.powu((c * (n - i)) as u32) * eval_real_poly(&g_prev, s);
        let next = &m[(i % n) * c..(i % n) * c + c];
        let pmf = &model.pmfs[i - 1];
        let mut v_i = Complex64::new(0.0, 0.0);
        for (kp, mk) in next.iter().enumerate() {
            for k in kp..c {
                v_i += *mk * s.powu(k as u32) * pmf.cdf(k - kp);
            }
        }
        total += u_i * v_i;
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct PgfCheck {
    pub points: Vec<Complex64>,
    pub lhs: Vec<Complex64>,
    pub numerator: Vec<Complex64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Compares `Phi(s) (G_{S_N}(s) - s^{cN})`, with `Phi` the truncated series of
/// `phi`, against the numerator built from `m` at each point.
pub fn seasonal_pgf_verify(model: &SeasonalModel<f64>, m: &[f64], phi: &[f64], points: &[Complex64]) -> PgfCheck {
    let g = model.period_sum();
    let cn = model.period_premium() as u32;
    let mut lhs = Vec::with_capacity(points.len());
    let mut numerator = Vec::with_capacity(points.len());
    let mut residuals = Vec::with_capacity(points.len());
    for &s in points {
        let l = survival_series_at(phi, s) * (eval_real_poly(g.probs(), s) - s.powu(cn));
        let r = seasonal_numerator_at(model, m, s);
        residuals.push((l - r).norm());
        lhs.push(l);
        numerator.push(r);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    PgfCheck {
        points: points.to_vec(),
        lhs,
        numerator,
        residuals,
        max_residual,
    }
}

/// Probe points on circles of radius 0.2 and 0.5.
pub fn default_probe_points() -> Vec<Complex64> {
    [0.2, 0.5]
        .iter()
        .flat_map(|&r| (0..6).map(move |k| Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 3.0 + 0.1)))
        .collect()
}
