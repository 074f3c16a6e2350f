//! Path simulation of surplus processes and finite-horizon ruin estimators.

use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{ClaimLaw, CouplingPmf, CouplingSampler, IntegerPmf};
use crate::error::{Result, RuinError};
use crate::mc::estimate::McEstimate;
use crate::mc::rng::{rng_substream, StreamRng};
use crate::model::{AndersenModel, ClassicalModel, Convention, SeasonalModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub paths: u64,
    /// Periods for discrete models, claim events for continuous ones.
    pub horizon: usize,
    pub seed: u64,
    #[serde(default = "default_chunks")]
    pub chunks: usize,
}

fn default_chunks() -> usize {
    8
}

impl McConfig {
    pub fn new(paths: u64, horizon: usize, seed: u64) -> Self {
        Self {
            paths,
            horizon,
            seed,
            chunks: default_chunks(),
        }
    }

    pub fn with_chunks(mut self, chunks: usize) -> Self {
        self.chunks = chunks;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 || self.horizon == 0 || self.chunks == 0 {
            return Err(RuinError::Domain("paths, horizon and chunks must all be positive".into()));
        }
        Ok(())
    }

    /// Contiguous path-index ranges, one per chunk.
    pub fn chunk_ranges(&self) -> Vec<Range<u64>> {
        let chunks = (self.chunks as u64).min(self.paths).max(1);
        let base = self.paths / chunks;
        let extra = self.paths % chunks;
        let mut start = 0;
        (0..chunks)
            .map(|i| {
                let len = base + u64::from(i < extra);
                let r = start..start + len;
                start += len;
                r
            })
            .collect()
    }
}

/// Runs `work` over every chunk in parallel and returns the per-chunk results
/// in path order. Path `i` always draws from stream `i` of the seed.
pub fn map_chunks<T, F>(config: &McConfig, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync + Send,
{
    config.chunk_ranges().into_par_iter().map(|r| work(r)).collect()
}

/// A model whose surplus paths can be simulated.
pub trait RuinPaths: Sync {
    /// 1-based index of the first ruined step within `horizon`, if any.
    fn first_ruin<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> Option<usize>;
}

#[inline]
fn is_ruined(excess: f64, u: f64, convention: Convention) -> bool {
    match convention {
        Convention::Weak => excess > u,
        Convention::Strict => excess >= u,
    }
}

/// Prepared sampler for a [`SeasonalModel`].
#[derive(Clone, Debug)]
pub struct DiscreteSampler {
    c: i64,
    cumulative: Vec<Vec<f64>>,
}

impl DiscreteSampler {
    pub fn new(model: &SeasonalModel<f64>) -> Self {
        Self {
            c: model.c as i64,
            cumulative: model.pmfs.iter().map(cumulative_of).collect(),
        }
    }

    #[inline]
    fn draw<R: Rng + ?Sized>(&self, season: usize, rng: &mut R) -> i64 {
        draw_from(&self.cumulative[season], rng)
    }
}

fn cumulative_of(p: &IntegerPmf<f64>) -> Vec<f64> {
    let mut acc = 0.0;
    p.probs()
        .iter()
        .map(|h| {
            acc += h;
            acc
        })
        .collect()
}

#[inline]
fn draw_from<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> i64 {
    let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1) as i64
}

impl RuinPaths for DiscreteSampler {
    fn first_ruin<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> Option<usize> {
        let u = u as i64;
        let n = self.cumulative.len();
        let mut excess: i64 = 0;
        for t in 1..=horizon {
            excess += self.draw((t - 1) % n, rng) - self.c;
            let ruined = match convention {
                Convention::Weak => excess > u,
                Convention::Strict => excess >= u,
            };
            if ruined {
                return Some(t);
            }
        }
        None
    }
}

impl RuinPaths for AndersenModel {
    fn first_ruin<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> Option<usize> {
        let mut excess = 0.0;
        for n in 1..=horizon {
            let theta = self.interarrival.sample(rng);
            excess += self.claim.sample(rng) - self.c * theta;
            if is_ruined(excess, u, convention) {
                return Some(n);
            }
        }
        None
    }
}

impl RuinPaths for ClassicalModel {
    fn first_ruin<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> Option<usize> {
        let mut excess = 0.0;
        for n in 1..=horizon {
            let theta: f64 = rng.sample::<f64, _>(rand_distr::Exp1) / self.lambda;
            excess += self.claim.sample(rng) - self.c * theta;
            if is_ruined(excess, u, convention) {
                return Some(n);
            }
        }
        None
    }
}

/// Ruin counts by first-ruin step; `hist[t]` counts paths first ruined at step `t`.
fn ruin_histogram<M: RuinPaths + ?Sized>(
    model: &M,
    u: f64,
    convention: Convention,
    config: &McConfig,
    horizon: usize,
) -> Vec<u64> {
    let parts = map_chunks(config, |range| {
        let mut hist = vec![0u64; horizon + 1];
        for path in range {
            let mut rng = rng_substream(config.seed, path);
            if let Some(t) = model.first_ruin(u, horizon, convention, &mut rng) {
                hist[t] += 1;
            }
        }
        hist
    });
    let mut hist = vec![0u64; horizon + 1];
    for part in parts {
        for (h, p) in hist.iter_mut().zip(part) {
            *h += p;
        }
    }
    hist
}

/// Estimate of `psi(u, horizon)`.
pub fn simulate_ruin<M: RuinPaths + ?Sized>(
    model: &M,
    u: f64,
    convention: Convention,
    config: &McConfig,
) -> Result<McEstimate> {
    Ok(simulate_ruin_horizons(model, u, convention, config, &[config.horizon])?[0])
}

/// Estimates of `psi(u, T)` for several nested horizons on the same paths.
pub fn simulate_ruin_horizons<M: RuinPaths + ?Sized>(
    model: &M,
    u: f64,
    convention: Convention,
    config: &McConfig,
    horizons: &[usize],
) -> Result<Vec<McEstimate>> {
    config.validate()?;
    if !(u >= 0.0) {
        return Err(RuinError::Domain(format!("initial surplus must be nonnegative, got {u}")));
    }
    let max_h = horizons.iter().copied().max().unwrap_or(config.horizon);
    let hist = ruin_histogram(model, u, convention, config, max_h);
    let mut cumulative = Vec::with_capacity(hist.len());
    let mut acc = 0;
    for h in &hist {
        acc += h;
        cumulative.push(acc);
    }
    Ok(horizons
        .iter()
        .map(|&t| McEstimate::from_counts(cumulative[t.min(max_h)], config.paths))
        .collect())
}

/// One coupled path: first ruin of the starred and the original process.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoupledOutcome {
    pub starred_ruin: Option<usize>,
    pub original_ruin: Option<usize>,
    pub violated: bool,
}

/// A pair of processes driven by a coupling `(X*, X)`.
pub trait CoupledPaths: Sync {
    fn coupled_path<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> CoupledOutcome;
}

/// Discrete model whose season `season` is replaced by a coupled pair.
#[derive(Clone, Debug)]
pub struct DiscreteCoupling {
    base: DiscreteSampler,
    season: usize,
    pair: CouplingSampler,
}

impl DiscreteCoupling {
    pub fn new(model: &SeasonalModel<f64>, season: usize, coupling: &CouplingPmf<f64>) -> Result<Self> {
        if season >= model.period() {
            return Err(RuinError::Domain(format!(
                "season {season} out of range for period {}",
                model.period()
            )));
        }
        if coupling.original_marginal() != model.pmfs[season] {
            return Err(RuinError::InvalidPerturbation(
                "coupling's original marginal differs from the season's claim law".into(),
            ));
        }
        Ok(Self {
            base: DiscreteSampler::new(model),
            season,
            pair: coupling.sampler(),
        })
    }
}

impl CoupledPaths for DiscreteCoupling {
    fn coupled_path<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> CoupledOutcome {
        let u = u as i64;
        let n = self.base.cumulative.len();
        let c = self.base.c;
        let ruined = |s: i64| match convention {
            Convention::Weak => s > u,
            Convention::Strict => s >= u,
        };
        let (mut star, mut orig) = (0i64, 0i64);
        let mut out = CoupledOutcome {
            starred_ruin: None,
            original_ruin: None,
            violated: false,
        };
        for t in 1..=horizon {
            let season = (t - 1) % n;
            let (xs, x) = if season == self.season {
                let (a, b) = self.pair.sample(rng);
                (a as i64, b as i64)
            } else {
                let x = self.base.draw(season, rng);
                (x, x)
            };
            star += xs - c;
            orig += x - c;
            out.violated |= star > orig;
            if out.original_ruin.is_none() && ruined(orig) {
                out.original_ruin = Some(t);
            }
            if out.starred_ruin.is_none() && ruined(star) {
                out.starred_ruin = Some(t);
                break;
            }
        }
        out
    }
}

impl CoupledPaths for AndersenModel {
    fn coupled_path<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> CoupledOutcome {
        let (mut star, mut orig) = (0.0f64, 0.0f64);
        let mut out = CoupledOutcome {
            starred_ruin: None,
            original_ruin: None,
            violated: false,
        };
        for t in 1..=horizon {
            let theta = self.interarrival.sample(rng);
            let (xs, x) = match &self.claim {
                ClaimLaw::Perturbed(p) => p.sample_pair(rng),
                ClaimLaw::Plain(c) => {
                    let x = c.sample(rng);
                    (x, x)
                }
            };
            let premium = self.c * theta;
            star += xs - premium;
            orig += x - premium;
            out.violated |= star > orig;
            if out.original_ruin.is_none() && is_ruined(orig, u, convention) {
                out.original_ruin = Some(t);
            }
            if out.starred_ruin.is_none() && is_ruined(star, u, convention) {
                out.starred_ruin = Some(t);
                break;
            }
        }
        out
    }
}

impl CoupledPaths for ClassicalModel {
    fn coupled_path<R: Rng + ?Sized>(
        &self,
        u: f64,
        horizon: usize,
        convention: Convention,
        rng: &mut R,
    ) -> CoupledOutcome {
        self.as_andersen().coupled_path(u, horizon, convention, rng)
    }
}

/// Outcome of a coupled run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    pub violations: u64,
    /// Paths on which the two processes were ruined at the same step (or never).
    pub identical_paths: u64,
    pub horizons: Vec<usize>,
    pub starred: Vec<McEstimate>,
    pub original: Vec<McEstimate>,
}

impl DominanceReport {
    /// `psi*_hat <= psi_hat` at every probed horizon.
    pub fn ordering_holds(&self) -> bool {
        self.starred
            .iter()
            .zip(&self.original)
            .all(|(s, o)| s.p_hat <= o.p_hat)
    }
}

/// Simulates coupled paths; any path with `sum x* > sum x` is a hard failure.
pub fn simulate_coupled<M: CoupledPaths + ?Sized>(
    model: &M,
    u: f64,
    convention: Convention,
    config: &McConfig,
    horizons: &[usize],
) -> Result<DominanceReport> {
    let report = simulate_coupled_unchecked(model, u, convention, config, horizons)?;
    if report.violations > 0 {
        return Err(RuinError::CouplingBroken {
            violations: report.violations,
        });
    }
    Ok(report)
}

/// Like [`simulate_coupled`] but returns the report even when violations occur.
pub fn simulate_coupled_unchecked<M: CoupledPaths + ?Sized>(
    model: &M,
    u: f64,
    convention: Convention,
    config: &McConfig,
    horizons: &[usize],
) -> Result<DominanceReport> {
    config.validate()?;
    let horizons: Vec<usize> = if horizons.is_empty() {
        vec![config.horizon]
    } else {
        horizons.to_vec()
    };
    let max_h = *horizons.iter().max().unwrap();
    struct Tally {
        star: Vec<u64>,
        orig: Vec<u64>,
        violations: u64,
        identical: u64,
    }
    let parts = map_chunks(config, |range| {
        let mut tally = Tally {
            star: vec![0; max_h + 1],
            orig: vec![0; max_h + 1],
            violations: 0,
            identical: 0,
        };
        for path in range {
            let mut rng: StreamRng = rng_substream(config.seed, path);
            let out = model.coupled_path(u, max_h, convention, &mut rng);
            if let Some(t) = out.starred_ruin {
                tally.star[t] += 1;
            }
            if let Some(t) = out.original_ruin {
                tally.orig[t] += 1;
            }
            tally.violations += u64::from(out.violated);
            tally.identical += u64::from(out.starred_ruin == out.original_ruin);
        }
        tally
    });
    let mut star = vec![0u64; max_h + 1];
    let mut orig = vec![0u64; max_h + 1];
    let (mut violations, mut identical) = (0, 0);
    for p in parts {
        for t in 0..=max_h {
            star[t] += p.star[t];
            orig[t] += p.orig[t];
        }
        violations += p.violations;
        identical += p.identical;
    }
    let estimates = |hist: &[u64]| -> Vec<McEstimate> {
        horizons
            .iter()
            .map(|&h| McEstimate::from_counts(hist[..=h].iter().sum(), config.paths))
            .collect()
    };
    Ok(DominanceReport {
        violations,
        identical_paths: identical,
        starred: estimates(&star),
        original: estimates(&orig),
        horizons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{perturb_continuous, perturb_discrete, ContinuousClaim};

    fn neutral() -> SeasonalModel<f64> {
        SeasonalModel::homogeneous(1, IntegerPmf::from_pairs([(0, 0.5), (2, 0.5)]).unwrap()).unwrap()
    }

    #[test]
    fn one_period_ruin_probability() {
        let s = DiscreteSampler::new(&neutral());
        let est = simulate_ruin(&s, 0.0, Convention::Weak, &McConfig::new(100_000, 1, 5)).unwrap();
        assert!(est.agrees_with(0.5, 4.0), "{est:?}");
        assert!(est.ci95[0] <= 0.5 && 0.5 <= est.ci95[1]);
    }

    #[test]
    fn degenerate_model_never_ruins() {
        let one = ContinuousClaim::point(1.0).unwrap();
        let m = AndersenModel::new(1.0, one.clone(), one).unwrap();
        for u in [0.0, 3.0] {
            let est = simulate_ruin(&m, u, Convention::Weak, &McConfig::new(1000, 500, 1)).unwrap();
            assert_eq!(est.p_hat, 0.0);
        }
        let d = SeasonalModel::homogeneous(1, IntegerPmf::<f64>::point(1)).unwrap();
        let est = simulate_ruin(&DiscreteSampler::new(&d), 0.0, Convention::Weak, &McConfig::new(1000, 500, 1)).unwrap();
        assert_eq!(est.p_hat, 0.0);
    }

    #[test]
    fn chunking_does_not_change_counts() {
        let s = DiscreteSampler::new(&neutral());
        let run = |chunks| {
            let cfg = McConfig::new(10_001, 50, 9).with_chunks(chunks);
            simulate_ruin_horizons(&s, 2.0, Convention::Weak, &cfg, &[5, 20, 50]).unwrap()
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(8));
        assert_eq!(one, run(10_001));
    }

    #[test]
    fn estimates_monotone_in_horizon_and_surplus() {
        let s = DiscreteSampler::new(&neutral());
        let cfg = McConfig::new(20_000, 200, 3);
        let hs = [1, 2, 5, 10, 50, 100, 200];
        let by_t = simulate_ruin_horizons(&s, 0.0, Convention::Weak, &cfg, &hs).unwrap();
        assert!(by_t.windows(2).all(|w| w[0].p_hat <= w[1].p_hat));
        let mut prev = 1.0;
        for u in 0..6 {
            let p = simulate_ruin(&s, u as f64, Convention::Weak, &cfg).unwrap().p_hat;
            assert!(p <= prev);
            prev = p;
        }
    }

    #[test]
    fn strict_convention_shifts_by_one() {
        // Same paths: ruin_strict(u + 1) happens exactly when ruin_weak(u) does.
        let s = DiscreteSampler::new(&neutral());
        let cfg = McConfig::new(5_000, 100, 17);
        for u in 0..4 {
            let weak = simulate_ruin(&s, u as f64, Convention::Weak, &cfg).unwrap();
            let strict = simulate_ruin(&s, u as f64 + 1.0, Convention::Strict, &cfg).unwrap();
            assert_eq!(weak, strict);
        }
    }

    #[test]
    fn coupled_discrete_paths_dominate() {
        let m = neutral();
        let coupling = perturb_discrete(&m.pmfs[0], 2, 0, 0.2).unwrap();
        let pair = DiscreteCoupling::new(&m, 0, &coupling).unwrap();
        let report = simulate_coupled(&pair, 0.0, Convention::Weak, &McConfig::new(50_000, 200, 2), &[1, 10, 100, 200]).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.ordering_holds());
        assert!(report.starred[3].p_hat < report.original[3].p_hat);
    }

    #[test]
    fn identity_coupling_gives_identical_paths() {
        let m = neutral();
        let pair = DiscreteCoupling::new(&m, 0, &CouplingPmf::identity(&m.pmfs[0])).unwrap();
        let cfg = McConfig::new(20_000, 100, 4);
        let report = simulate_coupled(&pair, 1.0, Convention::Weak, &cfg, &[100]).unwrap();
        assert_eq!(report.starred, report.original);
        assert_eq!(report.identical_paths, cfg.paths);
        let plain = ClassicalModel::new(1.0, 1.0, ContinuousClaim::exponential(1.0).unwrap()).unwrap();
        let r2 = simulate_coupled(&plain, 0.0, Convention::Weak, &cfg, &[100]).unwrap();
        assert_eq!(r2.starred, r2.original);
    }

    #[test]
    fn coupled_continuous_paths_dominate() {
        let e = ContinuousClaim::exponential(1.0).unwrap();
        let p = perturb_continuous(&e, 2f64.ln(), 0.2).unwrap();
        let m = ClassicalModel::new(1.0, 1.0, p).unwrap();
        let report = simulate_coupled(&m, 0.0, Convention::Weak, &McConfig::new(20_000, 500, 8), &[10, 100, 500]).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.ordering_holds());
    }

    #[test]
    fn mismatched_coupling_is_rejected() {
        let m = neutral();
        let other = IntegerPmf::from_pairs([(0, 0.25), (2, 0.75)]).unwrap();
        let coupling = CouplingPmf::identity(&other);
        assert!(DiscreteCoupling::new(&m, 0, &coupling).is_err());
        assert!(DiscreteCoupling::new(&m, 1, &CouplingPmf::identity(&m.pmfs[0])).is_err());
    }
}
