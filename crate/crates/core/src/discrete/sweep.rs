//! Perturbation sweeps for the discrete-time model.

use serde::Serialize;

use super::pgf::survival_pgf_coefficients;
use super::seasonal::{seasonal_survival, BlockSource, InitialBlock};
use crate::dist::{choose_site, perturb_discrete, IntegerPmf};
use crate::error::Result;
use crate::model::{NetProfit, SeasonalModel};
use crate::scalar::Scalar;

#[derive(Clone, Debug, Serialize)]
pub struct DiscreteSweepRow<T> {
    pub epsilon: T,
    /// `(b, s)`: mass moves from value `b` down to value `s`.
    pub site: (usize, usize),
    pub starred_mean: T,
    pub phi: Vec<T>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscreteSweep<T> {
    /// False when the unperturbed model is not neutral; the sweep still runs.
    pub base_neutral: bool,
    pub rows: Vec<DiscreteSweepRow<T>>,
}

/// Survival of the perturbed homogeneous model `X*` for each `epsilon`.
pub fn epsilon_sweep_discrete<T: Scalar>(
    pmf: &IntegerPmf<T>,
    c: usize,
    eps_list: &[T],
    u_max: usize,
) -> Result<DiscreteSweep<T>> {
    let base = SeasonalModel::homogeneous(c, pmf.clone())?;
    let site = choose_site(pmf, c)?;
    let rows = eps_list
        .iter()
        .map(|eps| {
            let coupling = perturb_discrete(pmf, site.0, site.1, eps.clone())?;
            let starred = coupling.starred_marginal();
            Ok(DiscreteSweepRow {
                epsilon: eps.clone(),
                site,
                starred_mean: starred.mean(),
                phi: survival_pgf_coefficients(&starred, c, u_max)?.phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteSweep {
        base_neutral: base.net_profit() == NetProfit::Neutral,
        rows,
    })
}

/// Seasonal version: season `season` is perturbed; blocks come from `source`.
pub fn epsilon_sweep_seasonal(
    model: &SeasonalModel<f64>,
    season: usize,
    eps_list: &[f64],
    u_max: usize,
    source: &BlockSource,
) -> Result<(DiscreteSweep<f64>, Vec<Option<InitialBlock>>)> {
    let pmf = &model.pmfs[season];
    let site = choose_site(pmf, model.c)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut blocks = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let coupling = perturb_discrete(pmf, site.0, site.1, eps)?;
        let starred = model.with_season(season, coupling.starred_marginal());
        let (table, block) = seasonal_survival(&starred, source, u_max)?;
        rows.push(DiscreteSweepRow {
            epsilon: eps,
            site,
            starred_mean: starred.expected_period_claims(),
            phi: table.phi,
        });
        blocks.push(block);
    }
    Ok((
        DiscreteSweep {
            base_neutral: model.net_profit() == NetProfit::Neutral,
            rows,
        },
        blocks,
    ))
}
