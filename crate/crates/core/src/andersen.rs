//! Spitzer series and ladder heights for the renewal model.
//!
//! With `S_n = sum_{k<=n} (X_k - c theta_k)`,
//! `psi(0) = 1 - exp(-A)` where `A = sum_n P(S_n > 0) / n`, and the survival
//! function is the compound-geometric sum of the ladder-height law `H` with
//! parameter `psi(0)`.

use serde::Serialize;

use crate::compound::{pk_table, GridLaw, PkSeries};
use crate::dist::perturb_continuous;
use crate::error::{Result, RuinError};
use crate::mc::{map_chunks, rng_substream, McConfig};
use crate::model::AndersenModel;
use crate::table::Bracket;

/// Fixed-point scale for per-path sums, so merged totals do not depend on chunking.
const FIXED: f64 = (1u64 << 40) as f64;

fn fixed(x: f64) -> i128 {
    (x * FIXED).round() as i128
}

/// Monte Carlo estimates of `P(S_n > 0)` and of the partial sums `A_n`.
#[derive(Clone, Debug, Serialize)]
pub struct SpitzerPartial {
    pub n_list: Vec<usize>,
    pub p_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `A_n = sum_{k<=n} p_hat_k / k`.
    pub a_n: Vec<f64>,
    pub a_stderr: Vec<f64>,
    pub psi0_lower: Vec<f64>,
    pub paths: u64,
    pub seed: u64,
    /// `count[n]` = number of paths with `S_n > 0` (`count[0] = 0`).
    #[serde(skip)]
    pub counts: Vec<u64>,
}

impl SpitzerPartial {
    pub fn n_max(&self) -> usize {
        self.counts.len() - 1
    }

    /// `A_n` for any `n <= n_max`, from the integer counts.
    pub fn a_at(&self, n: usize) -> f64 {
        let paths = self.paths as f64;
        (1..=n).map(|k| self.counts[k] as f64 / (k as f64 * paths)).sum()
    }

    pub fn a(&self) -> f64 {
        *self.a_n.last().unwrap()
    }

    pub fn a_sigma(&self) -> f64 {
        *self.a_stderr.last().unwrap()
    }
}

/// Simulates `paths` walks to `max(n_list)` steps with common random numbers.
pub fn spitzer_estimate(model: &AndersenModel, n_list: &[usize], config: &McConfig) -> Result<SpitzerPartial> {
    model.validate()?;
    let mut n_list = n_list.to_vec();
    n_list.sort_unstable();
    n_list.dedup();
    if n_list.first() == Some(&0) || n_list.is_empty() {
        return Err(RuinError::Domain("n_list needs positive entries".into()));
    }
    let n_max = *n_list.last().unwrap();
    let config = McConfig {
        horizon: n_max,
        ..config.clone()
    };
    config.validate()?;
    struct Part {
        counts: Vec<u64>,
        y: Vec<i128>,
        y2: Vec<i128>,
    }
    let parts = map_chunks(&config, |range| {
        let mut part = Part {
            counts: vec![0; n_max + 1],
            y: vec![0; n_list.len()],
            y2: vec![0; n_list.len()],
        };
        for path in range {
            let mut rng = rng_substream(config.seed, path);
            let mut s = 0.0;
            let mut y = 0.0;
            let mut probe = 0;
            for n in 1..=n_max {
                let theta = model.interarrival.sample(&mut rng);
                s += model.claim.sample(&mut rng) - model.c * theta;
                if s > 0.0 {
                    part.counts[n] += 1;
                    y += 1.0 / n as f64;
                }
                if n == n_list[probe] {
                    part.y[probe] += fixed(y);
                    part.y2[probe] += fixed(y * y);
                    probe += 1;
                }
            }
        }
        part
    });
    let mut counts = vec![0u64; n_max + 1];
    let mut y = vec![0i128; n_list.len()];
    let mut y2 = vec![0i128; n_list.len()];
    for part in parts {
        for (a, b) in counts.iter_mut().zip(part.counts) {
            *a += b;
        }
        for i in 0..n_list.len() {
            y[i] += part.y[i];
            y2[i] += part.y2[i];
        }
    }
    let paths = config.paths as f64;
    let mut out = SpitzerPartial {
        n_list: n_list.clone(),
        p_hat: Vec::new(),
        stderr: Vec::new(),
        a_n: Vec::new(),
        a_stderr: Vec::new(),
        psi0_lower: Vec::new(),
        paths: config.paths,
        seed: config.seed,
        counts,
    };
    for (i, &n) in n_list.iter().enumerate() {
        let p = out.counts[n] as f64 / paths;
        out.p_hat.push(p);
        out.stderr.push((p * (1.0 - p) / paths).sqrt());
        let a = out.a_at(n);
        let mean_y = y[i] as f64 / FIXED / paths;
        let var_y = (y2[i] as f64 / FIXED / paths - mean_y * mean_y).max(0.0);
        out.a_n.push(a);
        out.a_stderr.push((var_y / paths).sqrt());
        out.psi0_lower.push(1.0 - (-a).exp());
    }
    Ok(out)
}

/// Bracket `[1 - exp(-A_N), 1)` for `psi(0)` at the largest simulated `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Psi0Bracket {
    pub n: usize,
    pub a: f64,
    pub a_stderr: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn psi0_andersen(spitzer: &SpitzerPartial) -> Psi0Bracket {
    let a = spitzer.a();
    Psi0Bracket {
        n: spitzer.n_max(),
        a,
        a_stderr: spitzer.a_sigma(),
        lower: 1.0 - (-a).exp(),
        upper: 1.0,
    }
}

/// Heights of the first strictly positive partial sum, in path order.
#[derive(Clone, Debug, Serialize)]
pub struct LadderSample {
    pub heights: Vec<f64>,
    /// Paths with no ladder epoch within the horizon.
    pub censored: u64,
    pub paths: u64,
    pub horizon: usize,
    pub seed: u64,
}

impl LadderSample {
    /// Fraction of paths with a ladder epoch: an estimate of `psi(0)`.
    pub fn ladder_fraction(&self) -> f64 {
        self.heights.len() as f64 / self.paths as f64
    }
}

pub fn ladder_sample(model: &AndersenModel, config: &McConfig) -> Result<LadderSample> {
    model.validate()?;
    config.validate()?;
    let parts = map_chunks(config, |range| {
        let mut heights = Vec::new();
        let mut censored = 0u64;
        for path in range {
            let mut rng = rng_substream(config.seed, path);
            let mut s = 0.0;
            let mut found = false;
            for _ in 0..config.horizon {
                let theta = model.interarrival.sample(&mut rng);
                s += model.claim.sample(&mut rng) - model.c * theta;
                if s > 0.0 {
                    heights.push(s);
                    found = true;
                    break;
                }
            }
            censored += u64::from(!found);
        }
        (heights, censored)
    });
    let mut heights = Vec::new();
    let mut censored = 0;
    for (h, c) in parts {
        heights.extend(h);
        censored += c;
    }
    Ok(LadderSample {
        heights,
        censored,
        paths: config.paths,
        horizon: config.horizon,
        seed: config.seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CensoringCheck {
    pub ladder_fraction: f64,
    pub spitzer_psi0: f64,
    pub z: f64,
}

/// Compares the ladder fraction with `1 - exp(-A_N)`; more than 3 standard
/// errors apart means the horizon censors too many ladder epochs.
pub fn check_censoring(ladder: &LadderSample, spitzer: &SpitzerPartial) -> Result<CensoringCheck> {
    let p = ladder.ladder_fraction();
    let var_p = p * (1.0 - p) / ladder.paths as f64;
    let a = spitzer.a();
    let psi0 = 1.0 - (-a).exp();
    let sd_psi0 = (-a).exp() * spitzer.a_sigma();
    let sd = (var_p + sd_psi0 * sd_psi0).sqrt().max(1e-300);
    let z = (p - psi0) / sd;
    if z.abs() > 3.0 {
        return Err(RuinError::CensoringTooHigh {
            ladder: p,
            spitzer: psi0,
            z,
        });
    }
    Ok(CensoringCheck {
        ladder_fraction: p,
        spitzer_psi0: psi0,
        z,
    })
}

/// Survival table from the empirical ladder law and `psi(0) = 1 - exp(-A)`.
#[derive(Clone, Debug, Serialize)]
pub struct AndersenPk {
    /// Central table (bracket widened as described on [`pk_andersen_survival`]).
    pub series: PkSeries,
    /// `psi(0)` at `A - 3 sigma`, `A`, `A + 3 sigma`.
    pub rho: [f64; 3],
    /// DKW half-width of the empirical ladder CDF at level `DKW_ALPHA`.
    pub dkw: f64,
}

/// Failure probability of the DKW band on the empirical ladder law.
pub const DKW_ALPHA: f64 = 1e-3;

/// Compound-geometric survival table on `0, h, ..., >= u_max`.
///
/// The bracket combines the grid roundings and the series truncation with
/// `A +/- 3 sigma` and a DKW band `delta` on `H`, which moves the sum by at
/// most `delta rho / (1 - rho)`.
pub fn pk_andersen_survival(
    model: &AndersenModel,
    ladder: &LadderSample,
    spitzer: &SpitzerPartial,
    u_max: f64,
    tol: f64,
    grid_step: f64,
) -> Result<AndersenPk> {
    if model.drift() >= 0.0 || model.is_neutral() {
        return Err(RuinError::NpcViolation(format!(
            "E X - c E theta = {} is not negative",
            model.drift()
        )));
    }
    if ladder.heights.is_empty() {
        return Err(RuinError::Domain("no ladder heights sampled".into()));
    }
    if !(grid_step > 0.0) || !(u_max >= 0.0) {
        return Err(RuinError::Domain(format!(
            "need grid_step > 0 and u_max >= 0, got {grid_step} and {u_max}"
        )));
    }
    let a = spitzer.a();
    let sigma = spitzer.a_sigma();
    let rho_of = |x: f64| 1.0 - (-x.max(0.0)).exp();
    let rho = [rho_of(a - 3.0 * sigma), rho_of(a), rho_of(a + 3.0 * sigma)];
    let m = (u_max / grid_step - 1e-9).ceil().max(0.0) as usize;
    let law = GridLaw::from_sample(&ladder.heights, grid_step, m);
    let n = ladder.heights.len() as f64;
    let dkw = ((2.0 / DKW_ALPHA).ln() / (2.0 * n)).sqrt();
    let mut central = pk_table(&law, rho[1], grid_step, tol)?;
    let low = pk_table(&law, rho[2], grid_step, tol)?;
    let high = pk_table(&law, rho[0], grid_step, tol)?;
    let spread = dkw * rho[2] / (1.0 - rho[2]);
    let lower: Vec<f64> = low.table.bracket.as_ref().unwrap().lower.iter().map(|v| (v - spread).max(0.0)).collect();
    let upper: Vec<f64> = high.table.bracket.as_ref().unwrap().upper.iter().map(|v| (v + spread).min(1.0)).collect();
    // at u = 0 only the uncertainty in A matters
    let (mut lower, mut upper) = (lower, upper);
    lower[0] = 1.0 - rho[2];
    upper[0] = 1.0 - rho[0];
    // phi is nondecreasing, so running extremes are still valid bounds
    for k in 1..lower.len() {
        lower[k] = lower[k].max(lower[k - 1]);
    }
    for k in (0..upper.len().saturating_sub(1)).rev() {
        upper[k] = upper[k].min(upper[k + 1]);
    }
    for (c, (lo, hi)) in central.table.phi.iter_mut().zip(lower.iter().zip(&upper)) {
        *c = c.clamp(*lo, *hi);
    }
    central.table.bracket = Some(Bracket { lower, upper });
    Ok(AndersenPk { series: central, rho, dkw })
}

#[derive(Clone, Debug, Serialize)]
pub struct AndersenSweepRow {
    pub epsilon: f64,
    pub a: f64,
    pub a_stderr: f64,
    pub psi0_lower: f64,
    /// `exp(-A)`: an upper bound for `phi*(0)` up to Monte Carlo error.
    pub phi0_upper: f64,
}

/// Spitzer estimates for `X - eps 1{X > a}` at each `eps`, on common random numbers.
pub fn epsilon_sweep_andersen(
    model: &AndersenModel,
    a: f64,
    eps_list: &[f64],
    n_max: usize,
    config: &McConfig,
) -> Result<(bool, Vec<AndersenSweepRow>)> {
    let base = match &model.claim {
        crate::dist::ClaimLaw::Plain(c) => c.clone(),
        crate::dist::ClaimLaw::Perturbed(_) => {
            return Err(RuinError::Domain("sweep needs an unperturbed base claim".into()));
        }
    };
    let rows = eps_list
        .iter()
        .map(|&eps| {
            let starred = model.with_claim(perturb_continuous(&base, a, eps)?);
            let sp = spitzer_estimate(&starred, &[n_max], config)?;
            let b = psi0_andersen(&sp);
            Ok(AndersenSweepRow {
                epsilon: eps,
                a: b.a,
                a_stderr: b.a_stderr,
                psi0_lower: b.lower,
                phi0_upper: (-b.a).exp(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((model.is_neutral(), rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::ContinuousClaim;

    fn exp_exp(c: f64) -> AndersenModel {
        let e = ContinuousClaim::exponential(1.0).unwrap();
        AndersenModel::new(c, e.clone(), e).unwrap()
    }

    #[test]
    fn symmetric_walk_is_positive_half_the_time() {
        let sp = spitzer_estimate(&exp_exp(1.0), &[1, 10, 100], &McConfig::new(20_000, 1, 7)).unwrap();
        for (p, s) in sp.p_hat.iter().zip(&sp.stderr) {
            assert!((p - 0.5).abs() < 3.5 * s);
        }
        assert!(sp.a_n.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(sp.n_max(), 100);
    }

    #[test]
    fn chunking_does_not_change_results() {
        let m = exp_exp(1.3);
        let a = spitzer_estimate(&m, &[5, 50], &McConfig::new(3000, 1, 3).with_chunks(1)).unwrap();
        let b = spitzer_estimate(&m, &[5, 50], &McConfig::new(3000, 1, 3).with_chunks(7)).unwrap();
        assert_eq!(a.counts, b.counts);
        assert_eq!(a.a_stderr, b.a_stderr);
        let la = ladder_sample(&m, &McConfig::new(3000, 200, 3).with_chunks(1)).unwrap();
        let lb = ladder_sample(&m, &McConfig::new(3000, 200, 3).with_chunks(5)).unwrap();
        assert_eq!(la.heights, lb.heights);
    }

    #[test]
    fn exponential_ladder_and_psi0() {
        // Exp(1) claims, Exp(1) inter-arrivals, c = 1.25: psi(0) = 0.8
        let m = exp_exp(1.25);
        let sp = spitzer_estimate(&m, &[400], &McConfig::new(20_000, 1, 11)).unwrap();
        assert!((psi0_andersen(&sp).lower - 0.8).abs() < 4.0 * sp.a_sigma() * 0.2 + 0.01);
        let ladder = ladder_sample(&m, &McConfig::new(20_000, 400, 12)).unwrap();
        assert!(ladder.heights.iter().all(|&h| h > 0.0));
        check_censoring(&ladder, &sp).unwrap();
        let pk = pk_andersen_survival(&m, &ladder, &sp, 5.0, 1e-6, 0.02).unwrap();
        let t = &pk.series.table;
        for &u in &[0.0, 1.0, 3.0, 5.0] {
            let exact = 1.0 - 0.8 * (-0.2 * u as f64).exp();
            let (lo, hi) = t.bracket_at(u).unwrap();
            assert!(lo <= exact && exact <= hi, "u = {u}: [{lo}, {hi}] vs {exact}");
        }
    }

    #[test]
    fn short_horizon_is_flagged() {
        let m = exp_exp(1.05);
        let sp = spitzer_estimate(&m, &[2000], &McConfig::new(5_000, 1, 1)).unwrap();
        let ladder = ladder_sample(&m, &McConfig::new(5_000, 2, 2)).unwrap();
        assert!(matches!(check_censoring(&ladder, &sp), Err(RuinError::CensoringTooHigh { .. })));
        assert!(matches!(
            pk_andersen_survival(&exp_exp(1.0), &ladder, &sp, 1.0, 1e-6, 0.1),
            Err(RuinError::NpcViolation(_))
        ));
    }
}
