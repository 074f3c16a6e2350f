//! Exact finite-horizon ruin probabilities by forward dynamic programming.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RuinError};
use crate::model::{Convention, SeasonalModel};
use crate::scalar::Scalar;

/// Surplus vectors at least this long are updated in parallel.
const PAR_THRESHOLD: usize = 8192;
const PAR_CHUNK: usize = 4096;

/// `psi[t - 1]` is the probability of ruin within the first `t` steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpTrajectory<T> {
    pub u: usize,
    pub convention: Convention,
    pub psi: Vec<T>,
}

impl<T: Scalar> DpTrajectory<T> {
    pub fn horizon(&self) -> usize {
        self.psi.len()
    }

    /// `psi(u, T)` at the full horizon.
    pub fn last(&self) -> T {
        self.psi.last().cloned().unwrap_or_else(T::zero)
    }

    pub fn at(&self, t: usize) -> Option<&T> {
        t.checked_sub(1).and_then(|i| self.psi.get(i))
    }
}

fn step<T: Scalar>(old: &[T], pmf: &[T], c: usize, floor: usize) -> Vec<T> {
    let len = old.len() + c;
    // new[w] = sum_x h_x old[w - c + x]
    let cell = |w: usize| -> T {
        if w < floor {
            return T::zero();
        }
        let mut acc = T::zero();
        let lo = c.saturating_sub(w);
        for (x, h) in pmf.iter().enumerate().skip(lo) {
            let from = w + x - c;
            if from >= old.len() {
                break;
            }
            if !h.is_zero() {
                acc = acc + h.clone() * old[from].clone();
            }
        }
        acc
    };
    let mut out = vec![T::zero(); len];
    if len >= PAR_THRESHOLD {
        out.par_chunks_mut(PAR_CHUNK).enumerate().for_each(|(i, chunk)| {
            for (j, slot) in chunk.iter_mut().enumerate() {
                *slot = cell(i * PAR_CHUNK + j);
            }
        });
    } else {
        for (w, slot) in out.iter_mut().enumerate() {
            *slot = cell(w);
        }
    }
    out
}

/// Ruin probabilities `psi(u, t)` for `t = 1..=horizon` over surplus states
/// `0..=u + c t`. Fails with the partial result once more than `max_states`
/// states would be needed.
pub fn dp_finite_horizon<T: Scalar>(
    model: &SeasonalModel<T>,
    u: usize,
    horizon: usize,
    convention: Convention,
    max_states: usize,
) -> Result<DpTrajectory<T>> {
    if horizon == 0 {
        return Err(RuinError::Domain("horizon must be at least 1".into()));
    }
    model.validate()?;
    let floor = match convention {
        Convention::Weak => 0,
        Convention::Strict => 1,
    };
    let n = model.period();
    let mut mass = vec![T::zero(); u + 1];
    mass[u] = T::one();
    // tails[j][k] = P(X_j > k)
    let tails: Vec<Vec<T>> = model
        .pmfs
        .iter()
        .map(|p| {
            let probs = p.probs();
            let mut tail = vec![T::zero(); probs.len()];
            for k in (0..probs.len().saturating_sub(1)).rev() {
                tail[k] = tail[k + 1].clone() + probs[k + 1].clone();
            }
            tail
        })
        .collect();
    let mut psi = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        if mass.len() + model.c > max_states {
            return Err(RuinError::StateBudgetExceeded {
                achieved: t - 1,
                requested: horizon,
                psi_at_achieved: psi.last().map(|p: &T| p.as_f64()).unwrap_or(0.0),
            });
        }
        let probs = model.pmfs[(t - 1) % n].probs();
        // ruin accumulates the mass absorbed at each step, so psi never decreases
        let tail = &tails[(t - 1) % n];
        let absorbed = mass.iter().enumerate().fold(T::zero(), |acc, (v, m)| {
            match tail.get(v + model.c - floor) {
                Some(q) if !m.is_zero() => acc + m.clone() * q.clone(),
                _ => acc,
            }
        });
        let before = psi.last().cloned().unwrap_or_else(T::zero);
        psi.push(before + absorbed);
        mass = step(&mass, probs, model.c, floor);
    }
    Ok(DpTrajectory { u, convention, psi })
}

/// Survival probabilities `phi(v, T) = 1 - psi(v, T)` for `v = 0..count`.
pub fn dp_survival_block(
    model: &SeasonalModel<f64>,
    count: usize,
    horizon: usize,
    convention: Convention,
    max_states: usize,
) -> Result<Vec<f64>> {
    (0..count)
        .map(|v| dp_finite_horizon(model, v, horizon, convention, max_states).map(|t| 1.0 - t.last()))
        .collect()
}
