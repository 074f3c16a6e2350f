use serde::{Deserialize, Serialize};

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Binomial proportion estimate with Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub n: u64,
    pub ci95: [f64; 2],
}

impl McEstimate {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        assert!(n > 0 && hits <= n);
        let nf = n as f64;
        let p = hits as f64 / nf;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / nf;
        let center = (p + z2 / (2.0 * nf)) / denom;
        let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
        Self {
            p_hat: p,
            stderr: (p * (1.0 - p) / nf).sqrt(),
            n,
            ci95: [
                if hits == 0 { 0.0 } else { (center - half).max(0.0) },
                if hits == n { 1.0 } else { (center + half).min(1.0) },
            ],
        }
    }

    pub fn hits(&self) -> u64 {
        (self.p_hat * self.n as f64).round() as u64
    }

    pub fn ci_width(&self) -> f64 {
        self.ci95[1] - self.ci95[0]
    }

    /// `|p_hat - target| <= k * stderr`, with a floor for zero-variance estimates.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        let floor = 1.0 / self.n as f64;
        (self.p_hat - target).abs() <= k * self.stderr.max(floor)
    }
}

/// Estimate tagged with the run that produced it (the JSON record format).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub p_hat: f64,
    pub stderr: f64,
    pub ci95: [f64; 2],
    pub paths: u64,
    pub horizon: usize,
    pub seed: u64,
}

impl EstimateRecord {
    pub fn new(est: &McEstimate, horizon: usize, seed: u64) -> Self {
        Self {
            p_hat: est.p_hat,
            stderr: est.stderr,
            ci95: est.ci95,
            paths: est.n,
            horizon,
            seed,
        }
    }
}
