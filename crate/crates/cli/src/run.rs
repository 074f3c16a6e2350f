//! Command dispatch. Every command returns its artifacts in memory; writing
//! them out is left to the caller.

use std::fmt;

use ruin_core::andersen::{
    check_censoring, epsilon_sweep_andersen, ladder_sample, pk_andersen_survival, psi0_andersen, spitzer_estimate,
    AndersenPk, CensoringCheck, LadderSample, Psi0Bracket, SpitzerPartial,
};
use ruin_core::classical::{epsilon_sweep_classical, pk_survival};
use ruin_core::discrete::{
    dp_finite_horizon, epsilon_sweep_discrete, epsilon_sweep_seasonal, find_unit_disk_roots, pgf_solution,
    relation_residuals, seasonal_survival, weak_to_strict, BlockSource, InitialBlock,
};
use ruin_core::dist::{choose_site, perturb_continuous, perturb_discrete, ClaimLaw};
use ruin_core::mc::{
    simulate_coupled_unchecked, simulate_ruin_horizons, DiscreteCoupling, DiscreteSampler, DominanceReport,
    EstimateRecord, McConfig,
};
use ruin_core::{AndersenModel, ClassicalModel, Convention, NetProfit, RuinError, SeasonalModel, SurvivalTable};
use serde::Serialize;

use crate::config::{BlockSourceKind, Command, ConfigError, ConfigErrorKind, ModelSpec, OutputFormat, RunConfig, Settings};
use crate::output::{json_bytes, Cell, CsvTable};

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Ruin(RuinError),
    Io(String),
    /// `verify` ran but some checks failed.
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(e) if e.kind == ConfigErrorKind::Io => 1,
            CliError::Config(_) => 2,
            CliError::Ruin(e) if e.is_numerical() => 3,
            CliError::Ruin(_) => 2,
            CliError::Io(_) => 1,
            CliError::ChecksFailed(_) => 3,
        }
    }

    fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Ruin(e) if e.is_numerical() => "numerical",
            CliError::Ruin(_) => "model",
            CliError::Io(_) => "io",
            CliError::ChecksFailed(_) => "verify",
        }
    }

    /// One-line JSON diagnostic for stderr.
    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Diag<'a> {
            error: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            pointer: Option<&'a str>,
        }
        let pointer = match self {
            CliError::Config(e) if !e.pointer.is_empty() => Some(e.pointer.as_str()),
            _ => None,
        };
        serde_json::to_string(&Diag {
            error: self.category(),
            message: self.to_string(),
            pointer,
        })
        .expect("diagnostic serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => e.fmt(f),
            CliError::Ruin(e) => e.fmt(f),
            CliError::Io(m) => f.write_str(m),
            CliError::ChecksFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<RuinError> for CliError {
    fn from(e: RuinError) -> Self {
        CliError::Ruin(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Artifacts of one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    /// Primary table (CSV) or document (JSON).
    pub main: Vec<u8>,
    /// Secondary CSV tables, keyed by the suffix inserted into the output name.
    pub extras: Vec<(String, Vec<u8>)>,
    /// Human-readable lines (warnings, PASS/FAIL).
    pub summary: Vec<String>,
    /// Number of failed checks (`verify` only).
    pub failures: usize,
}

impl Report {
    fn single(format: OutputFormat, csv: CsvTable, json: impl Serialize) -> Self {
        Self {
            main: match format {
                OutputFormat::Csv => csv.to_bytes(),
                OutputFormat::Json => json_bytes(&json),
            },
            ..Self::default()
        }
    }
}

pub fn run(config: &RunConfig) -> Result<Report> {
    let s = &config.settings;
    match (config.command, &config.model) {
        (Command::ComputeDiscrete, ModelSpec::Discrete(m)) => compute_discrete(config, m, s),
        (Command::ComputeClassical, ModelSpec::Classical(m)) => compute_classical(config, m, s),
        (Command::ComputeAndersen, ModelSpec::Andersen(m)) => compute_andersen(config, m, s),
        (Command::SweepEpsilon, ModelSpec::Discrete(m)) => sweep_discrete(m, s),
        (Command::SweepEpsilon, ModelSpec::Classical(m)) => sweep_classical(m, s),
        (Command::SweepEpsilon, ModelSpec::Andersen(m)) => sweep_andersen(m, s),
        (Command::Simulate, model) => simulate(config, model, s),
        (Command::Verify, ModelSpec::Discrete(m)) => verify_discrete(m, s),
        (Command::Verify, ModelSpec::Classical(m)) => verify_classical(m, s),
        (Command::Verify, ModelSpec::Andersen(m)) => verify_andersen(m, s),
        (command, model) => Err(CliError::Config(ConfigError {
            kind: ConfigErrorKind::Schema,
            pointer: "/model/kind".into(),
            message: format!("{command:?} cannot run on a {:?} model", model.kind()),
        })),
    }
}

#[derive(Serialize)]
struct ComplexJson {
    re: f64,
    im: f64,
}

fn block_source(s: &Settings) -> BlockSource {
    match s.block_source {
        BlockSourceKind::Mc => BlockSource::monte_carlo(s.mc.clone()),
        BlockSourceKind::Dp => BlockSource::Dp {
            horizon: s.dp_horizon,
            max_states: s.max_states,
        },
    }
}

fn require_positive_profit(model: &SeasonalModel<f64>) -> Result<()> {
    if model.is_degenerate() {
        return Err(RuinError::DegenerateModel("period claims equal the period premium surely".into()).into());
    }
    if model.net_profit() != NetProfit::Positive {
        return Err(RuinError::NpcViolation(format!(
            "expected period claims {} are not below the period premium {}",
            model.expected_period_claims(),
            model.period_premium()
        ))
        .into());
    }
    Ok(())
}

/// Weak table of a subcritical discrete model, plus its root set and block.
fn discrete_table(
    model: &SeasonalModel<f64>,
    s: &Settings,
    u_max: usize,
) -> Result<(SurvivalTable<f64>, ruin_core::discrete::RootSet, Option<InitialBlock>)> {
    require_positive_profit(model)?;
    if model.period() == 1 {
        let sol = pgf_solution(&model.pmfs[0], model.c, u_max)?;
        Ok((sol.table, sol.roots, None))
    } else {
        let roots = find_unit_disk_roots(model)?;
        let (table, block) = seasonal_survival(model, &block_source(s), u_max)?;
        Ok((table, roots, block))
    }
}

fn in_convention(model: &SeasonalModel<f64>, weak: SurvivalTable<f64>, conv: Convention) -> Result<SurvivalTable<f64>> {
    Ok(match conv {
        Convention::Weak => weak,
        Convention::Strict => weak_to_strict(model, &weak)?,
    })
}

fn compute_discrete(config: &RunConfig, model: &SeasonalModel<f64>, s: &Settings) -> Result<Report> {
    let u_max = s.u_max as usize;
    let (weak, roots, block) = discrete_table(model, s, u_max)?;
    let relation = relation_residuals(model, &weak.phi).into_iter().fold(0.0, f64::max);
    let table = in_convention(model, weak, s.convention)?;
    let psi = table.psi();
    let mut csv = CsvTable::new(&["u", "phi", "psi"]);
    for (u, (p, q)) in table.phi.iter().zip(&psi).enumerate() {
        csv.push(vec![u.into(), (*p).into(), (*q).into()]);
    }
    #[derive(Serialize)]
    struct Residuals {
        roots: f64,
        relation: f64,
    }
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a ModelSpec,
        convention: Convention,
        phi: &'a [f64],
        psi: &'a [f64],
        roots: Vec<ComplexJson>,
        unit_root_multiplicity: usize,
        residuals: Residuals,
        #[serde(skip_serializing_if = "Option::is_none")]
        block: Option<InitialBlock>,
    }
    let out = Out {
        model: &config.model,
        convention: s.convention,
        phi: &table.phi,
        psi: &psi,
        roots: roots.roots.iter().map(|z| ComplexJson { re: z.re, im: z.im }).collect(),
        unit_root_multiplicity: roots.unit_multiplicity,
        residuals: Residuals {
            roots: roots.residual,
            relation,
        },
        block,
    };
    Ok(Report::single(s.output.format, csv, out))
}

/// Grid coordinate `k h` without accumulated float noise in the printed value.
fn grid_u(k: usize, h: f64) -> f64 {
    (k as f64 * h * 1e9).round() / 1e9
}

fn bracketed_csv(table: &SurvivalTable<f64>) -> CsvTable {
    let mut csv = CsvTable::new(&["u", "phi_lower", "phi_upper", "psi"]);
    let b = table.bracket.as_ref().expect("compound-geometric tables carry a bracket");
    for k in 0..table.phi.len() {
        csv.push(vec![
            grid_u(k, table.grid_step).into(),
            b.lower[k].into(),
            b.upper[k].into(),
            (1.0 - table.phi[k]).into(),
        ]);
    }
    csv
}

#[derive(Serialize)]
struct BracketedJson {
    u: Vec<f64>,
    phi: Vec<f64>,
    phi_lower: Vec<f64>,
    phi_upper: Vec<f64>,
    psi: Vec<f64>,
}

impl BracketedJson {
    fn new(table: &SurvivalTable<f64>) -> Self {
        let b = table.bracket.as_ref().expect("compound-geometric tables carry a bracket");
        Self {
            u: (0..table.phi.len()).map(|k| grid_u(k, table.grid_step)).collect(),
            phi: table.phi.clone(),
            phi_lower: b.lower.clone(),
            phi_upper: b.upper.clone(),
            psi: table.psi(),
        }
    }
}

fn compute_classical(config: &RunConfig, model: &ClassicalModel, s: &Settings) -> Result<Report> {
    let series = pk_survival(model, s.u_max, s.tolerance, s.grid_step)?;
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a ModelSpec,
        psi0: f64,
        terms: usize,
        truncation_bound: f64,
        grid_step: f64,
        #[serde(flatten)]
        table: BracketedJson,
    }
    let out = Out {
        model: &config.model,
        psi0: series.psi0,
        terms: series.terms,
        truncation_bound: series.truncation_bound,
        grid_step: series.grid_step,
        table: BracketedJson::new(&series.table),
    };
    let mut report = Report::single(s.output.format, bracketed_csv(&series.table), out);
    report.summary.push(format!(
        "psi0 = {}, {} terms, truncation bound {:e}",
        series.psi0, series.terms, series.truncation_bound
    ));
    Ok(report)
}

fn spitzer_csv(sp: &SpitzerPartial) -> CsvTable {
    let mut csv = CsvTable::new(&["n", "p_hat", "stderr", "A_n", "psi0_lower"]);
    for i in 0..sp.n_list.len() {
        csv.push(vec![
            sp.n_list[i].into(),
            sp.p_hat[i].into(),
            sp.stderr[i].into(),
            sp.a_n[i].into(),
            sp.psi0_lower[i].into(),
        ]);
    }
    csv
}

#[derive(Serialize)]
struct LadderHistogram {
    bin_width: f64,
    /// `counts[k]` = heights in `[k h, (k + 1) h)`; the last entry collects the rest.
    counts: Vec<u64>,
    censored: u64,
    paths: u64,
    horizon: usize,
}

impl LadderHistogram {
    fn new(ladder: &LadderSample, h: f64, u_max: f64) -> Self {
        let bins = (u_max / h - 1e-9).ceil().max(1.0) as usize;
        let mut counts = vec![0u64; bins + 1];
        for &x in &ladder.heights {
            let k = ((x / h).floor() as usize).min(bins);
            counts[k] += 1;
        }
        Self {
            bin_width: h,
            counts,
            censored: ladder.censored,
            paths: ladder.paths,
            horizon: ladder.horizon,
        }
    }

    fn csv(&self) -> CsvTable {
        let mut csv = CsvTable::new(&["bin_lo", "bin_hi", "count"]);
        let last = self.counts.len() - 1;
        for (k, &n) in self.counts.iter().enumerate() {
            let hi: Cell = if k == last { "inf".into() } else { grid_u(k + 1, self.bin_width).into() };
            csv.push(vec![grid_u(k, self.bin_width).into(), hi, n.into()]);
        }
        csv
    }
}

fn compute_andersen(config: &RunConfig, model: &AndersenModel, s: &Settings) -> Result<Report> {
    if model.is_degenerate() {
        return Err(RuinError::DegenerateModel("claims equal premium income surely".into()).into());
    }
    let spitzer = spitzer_estimate(model, &s.n_list, &s.mc)?;
    let psi0 = psi0_andersen(&spitzer);
    let mut summary = vec![format!(
        "A_{} = {} (stderr {}), psi(0) >= {}",
        psi0.n, psi0.a, psi0.a_stderr, psi0.lower
    )];
    let mut ladder_part: Option<(LadderHistogram, CensoringCheck, AndersenPk)> = None;
    if model.drift() < 0.0 && !model.is_neutral() {
        let cfg = McConfig {
            horizon: s.ladder_horizon,
            ..s.mc.clone()
        };
        let ladder = ladder_sample(model, &cfg)?;
        let censoring = check_censoring(&ladder, &spitzer)?;
        let pk = pk_andersen_survival(model, &ladder, &spitzer, s.u_max, s.tolerance, s.grid_step)?;
        ladder_part = Some((LadderHistogram::new(&ladder, s.grid_step, s.u_max), censoring, pk));
    } else {
        summary.push("drift is not negative: survival table skipped".into());
    }
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a ModelSpec,
        spitzer: &'a SpitzerPartial,
        psi0: &'a Psi0Bracket,
        #[serde(skip_serializing_if = "Option::is_none")]
        ladder: Option<&'a LadderHistogram>,
        #[serde(skip_serializing_if = "Option::is_none")]
        censoring: Option<&'a CensoringCheck>,
        #[serde(skip_serializing_if = "Option::is_none")]
        rho: Option<[f64; 3]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        dkw: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        survival: Option<BracketedJson>,
    }
    let report = match s.output.format {
        OutputFormat::Json => Report {
            main: json_bytes(&Out {
                model: &config.model,
                spitzer: &spitzer,
                psi0: &psi0,
                ladder: ladder_part.as_ref().map(|p| &p.0),
                censoring: ladder_part.as_ref().map(|p| &p.1),
                rho: ladder_part.as_ref().map(|p| p.2.rho),
                dkw: ladder_part.as_ref().map(|p| p.2.dkw),
                survival: ladder_part.as_ref().map(|p| BracketedJson::new(&p.2.series.table)),
            }),
            ..Report::default()
        },
        OutputFormat::Csv => {
            let mut extras = Vec::new();
            if let Some((hist, _, pk)) = &ladder_part {
                extras.push(("phi".to_string(), bracketed_csv(&pk.series.table).to_bytes()));
                extras.push(("ladder".to_string(), hist.csv().to_bytes()));
            }
            Report {
                main: spitzer_csv(&spitzer).to_bytes(),
                extras,
                ..Report::default()
            }
        }
    };
    Ok(Report { summary, ..report })
}

fn strict_row(model: &SeasonalModel<f64>, season: usize, site: (usize, usize), eps: f64, weak: Vec<f64>) -> Result<Vec<f64>> {
    let coupling = perturb_discrete(&model.pmfs[season], site.0, site.1, eps)?;
    let starred = model.with_season(season, coupling.starred_marginal());
    Ok(weak_to_strict(&starred, &SurvivalTable::discrete(Convention::Weak, weak))?.phi)
}

fn sweep_discrete(model: &SeasonalModel<f64>, s: &Settings) -> Result<Report> {
    let u_max = s.u_max as usize;
    let sweep = if model.period() == 1 {
        epsilon_sweep_discrete(&model.pmfs[0], model.c, &s.epsilons, u_max)?
    } else {
        epsilon_sweep_seasonal(model, s.season, &s.epsilons, u_max, &block_source(s))?.0
    };
    let mut rows = Vec::with_capacity(sweep.rows.len());
    for row in sweep.rows {
        let phi = match s.convention {
            Convention::Weak => row.phi,
            Convention::Strict => strict_row(model, s.season, row.site, row.epsilon, row.phi)?,
        };
        rows.push((row.epsilon, row.site, row.starred_mean, phi));
    }
    let mut csv = CsvTable::new(&["epsilon", "u", "phi", "psi"]);
    for (eps, _, _, phi) in &rows {
        for (u, p) in phi.iter().enumerate() {
            csv.push(vec![(*eps).into(), u.into(), (*p).into(), (1.0 - p).into()]);
        }
    }
    #[derive(Serialize)]
    struct Row {
        epsilon: f64,
        starred_mean: f64,
        phi: Vec<f64>,
        psi: Vec<f64>,
    }
    #[derive(Serialize)]
    struct Out {
        convention: Convention,
        base_neutral: bool,
        season: usize,
        /// `(b, s)`: mass moves from claim value `b` to `s`.
        site: Option<(usize, usize)>,
        rows: Vec<Row>,
    }
    let out = Out {
        convention: s.convention,
        base_neutral: sweep.base_neutral,
        season: s.season,
        site: rows.first().map(|r| r.1),
        rows: rows
            .into_iter()
            .map(|(epsilon, _, starred_mean, phi)| Row {
                epsilon,
                starred_mean,
                psi: phi.iter().map(|p| 1.0 - p).collect(),
                phi,
            })
            .collect(),
    };
    let mut report = Report::single(s.output.format, csv, &out);
    if !out.base_neutral {
        report.summary.push("warning: the unperturbed model is not neutral".into());
    }
    Ok(report)
}

/// Default perturbation threshold: the median of an exponential claim with the same mean.
fn threshold(s: &Settings, claim: &ClaimLaw) -> f64 {
    s.threshold.unwrap_or_else(|| claim.mean() * std::f64::consts::LN_2)
}

fn sweep_classical(model: &ClassicalModel, s: &Settings) -> Result<Report> {
    let a = threshold(s, &model.claim);
    let sweep = epsilon_sweep_classical(model, a, &s.epsilons, &s.u_list, s.tolerance, s.grid_step)?;
    let mut csv = CsvTable::new(&["epsilon", "u", "phi_lower", "phi_upper", "psi"]);
    for row in &sweep.rows {
        for k in 0..row.u.len() {
            // psi(0) is the geometric parameter itself
            let psi = if row.u[k] == 0.0 { row.psi0 } else { 1.0 - row.phi[k] };
            csv.push(vec![row.epsilon.into(), row.u[k].into(), row.phi_lower[k].into(), row.phi_upper[k].into(), psi.into()]);
        }
    }
    let mut report = Report::single(s.output.format, csv, &sweep);
    report.summary.extend(sweep.warning.iter().map(|w| format!("warning: {w}")));
    Ok(report)
}

fn sweep_andersen(model: &AndersenModel, s: &Settings) -> Result<Report> {
    let a = threshold(s, &model.claim);
    let n_max = *s.n_list.iter().max().expect("validated non-empty");
    let (neutral, rows) = epsilon_sweep_andersen(model, a, &s.epsilons, n_max, &s.mc)?;
    let mut csv = CsvTable::new(&["epsilon", "n", "A_n", "a_stderr", "psi0_lower", "phi0_upper"]);
    for r in &rows {
        csv.push(vec![r.epsilon.into(), n_max.into(), r.a.into(), r.a_stderr.into(), r.psi0_lower.into(), r.phi0_upper.into()]);
    }
    #[derive(Serialize)]
    struct Out<'a> {
        a: f64,
        n: usize,
        base_neutral: bool,
        rows: &'a [ruin_core::andersen::AndersenSweepRow],
    }
    let mut report = Report::single(
        s.output.format,
        csv,
        Out {
            a,
            n: n_max,
            base_neutral: neutral,
            rows: &rows,
        },
    );
    if !neutral {
        report.summary.push("warning: the unperturbed model is not neutral".into());
    }
    Ok(report)
}

fn simulate(config: &RunConfig, model: &ModelSpec, s: &Settings) -> Result<Report> {
    let horizons = s.horizons();
    let cfg = McConfig {
        horizon: *horizons.iter().max().unwrap(),
        ..s.mc.clone()
    };
    let estimates = match model {
        ModelSpec::Discrete(m) => simulate_ruin_horizons(&DiscreteSampler::new(m), s.u, s.convention, &cfg, &horizons)?,
        ModelSpec::Classical(m) => simulate_ruin_horizons(m, s.u, s.convention, &cfg, &horizons)?,
        ModelSpec::Andersen(m) => simulate_ruin_horizons(m, s.u, s.convention, &cfg, &horizons)?,
    };
    let records: Vec<EstimateRecord> = estimates
        .iter()
        .zip(&horizons)
        .map(|(e, &t)| EstimateRecord::new(e, t, cfg.seed))
        .collect();
    let mut csv = CsvTable::new(&["horizon", "p_hat", "stderr", "ci_lo", "ci_hi", "paths", "seed"]);
    for r in &records {
        csv.push(vec![
            r.horizon.into(),
            r.p_hat.into(),
            r.stderr.into(),
            r.ci95[0].into(),
            r.ci95[1].into(),
            r.paths.into(),
            r.seed.into(),
        ]);
    }
    #[derive(Serialize)]
    struct Out<'a> {
        model: &'a ModelSpec,
        u: f64,
        convention: Convention,
        estimates: Vec<EstimateRecord>,
    }
    Ok(Report::single(
        s.output.format,
        csv,
        Out {
            model: &config.model,
            u: s.u,
            convention: s.convention,
            estimates: records,
        },
    ))
}

/// Outcome of one `verify` check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, outcome: std::result::Result<(bool, String), CliError>) -> Self {
        let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn checks_report(s: &Settings, checks: Vec<Check>) -> Report {
    let mut csv = CsvTable::new(&["check", "status", "detail"]);
    for c in &checks {
        csv.push(vec![c.name.clone().into(), (if c.passed { "PASS" } else { "FAIL" }).into(), c.detail.clone().into()]);
    }
    let failures = checks.iter().filter(|c| !c.passed).count();
    let mut summary: Vec<String> = checks.iter().map(Check::line).collect();
    summary.push(format!("{}: {} of {} checks passed", if failures == 0 { "PASS" } else { "FAIL" }, checks.len() - failures, checks.len()));
    Report {
        summary,
        failures,
        ..Report::single(s.output.format, csv, &checks)
    }
}

/// Probe horizons `1, 10, 100, ...` below `max`, then `max`.
fn decades(max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |t| t.checked_mul(10)).take_while(|&t| t < max).collect();
    out.push(max);
    out
}

fn probe_list(s: &Settings, max: usize) -> Vec<usize> {
    if s.horizons.is_empty() {
        decades(max)
    } else {
        s.horizons.clone()
    }
}

fn is_nondecreasing(xs: &[f64], slack: f64) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0] - slack)
}

fn join(values: &[(usize, f64)], label: &str) -> String {
    values.iter().map(|(t, p)| format!("{label}({t}) = {p:.6}")).collect::<Vec<_>>().join(", ")
}

fn smallest_epsilon(s: &Settings) -> Result<f64> {
    s.epsilons
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or_else(|| RuinError::Domain("no epsilon given".into()).into())
}

fn coupling_verdict(report: &DominanceReport) -> (bool, String) {
    let pairs: Vec<String> = report
        .horizons
        .iter()
        .zip(report.starred.iter().zip(&report.original))
        .map(|(t, (a, b))| format!("T = {t}: {:.6} <= {:.6}", a.p_hat, b.p_hat))
        .collect();
    (
        report.violations == 0 && report.ordering_holds(),
        format!("{} violation(s); {}", report.violations, pairs.join(", ")),
    )
}

fn verify_discrete(model: &SeasonalModel<f64>, s: &Settings) -> Result<Report> {
    let neutral = model.net_profit() == NetProfit::Neutral;
    let u = s.u as usize;
    let trend = Check::new("dp-trend", (|| {
        let probes = probe_list(s, s.dp_horizon);
        let t_max = *probes.iter().max().unwrap();
        let traj = dp_finite_horizon(model, u, t_max, s.convention, s.max_states)?;
        let monotone = is_nondecreasing(&traj.psi, 1e-12);
        let last = traj.last();
        let probed: Vec<(usize, f64)> = probes.iter().map(|&t| (t, traj.psi[t - 1])).collect();
        let reaches = !neutral || last >= s.trend_threshold;
        let mut detail = join(&probed, "psi");
        if !monotone {
            detail.push_str("; not nondecreasing");
        }
        if !reaches {
            detail.push_str(&format!("; below {}", s.trend_threshold));
        }
        Ok((monotone && reaches, detail))
    })());
    let coupling = Check::new("coupling", (|| {
        let eps = smallest_epsilon(s)?;
        let site = choose_site(&model.pmfs[s.season], model.c)?;
        let pair = perturb_discrete(&model.pmfs[s.season], site.0, site.1, eps)?;
        let coupled = DiscreteCoupling::new(model, s.season, &pair)?;
        let report = simulate_coupled_unchecked(&coupled, s.u, s.convention, &s.mc, &probe_list(s, s.mc.horizon))?;
        Ok(coupling_verdict(&report))
    })());
    let sweep = Check::new("epsilon-sweep", (|| {
        let mut eps = s.epsilons.clone();
        eps.sort_by(|a, b| b.total_cmp(a));
        let rows = if model.period() == 1 {
            epsilon_sweep_discrete(&model.pmfs[0], model.c, &eps, u)?.rows
        } else {
            epsilon_sweep_seasonal(model, s.season, &eps, u, &block_source(s))?.0.rows
        };
        let phi: Vec<f64> = rows.iter().map(|r| r.phi[u]).collect();
        let decreasing = phi.windows(2).all(|w| w[1] < w[0]);
        let mut detail = rows
            .iter()
            .map(|r| format!("phi*_{}({u}) = {:.6e}", r.epsilon, r.phi[u]))
            .collect::<Vec<_>>()
            .join(", ");
        let mut ok = decreasing;
        if !decreasing {
            detail.push_str("; not decreasing as epsilon shrinks");
        }
        if model.period() == 1 && model.c == 1 && u == 0 {
            // with unit premium, phi*(0) = (1 - E X*) / P(X* = 0)
            let worst = rows
                .iter()
                .map(|r| {
                    let p0 = model.pmfs[0].prob(0) + r.epsilon / r.site.0 as f64;
                    ((1.0 - r.starred_mean) / p0 - r.phi[0]).abs()
                })
                .fold(0.0, f64::max);
            ok &= worst <= 1e-12;
            detail.push_str(&format!("; closed form max error {worst:.1e}"));
        }
        Ok((ok, detail))
    })());
    Ok(checks_report(s, vec![trend, coupling, sweep]))
}

fn perturbed_claim(claim: &ClaimLaw, a: f64, eps: f64) -> Result<ClaimLaw> {
    let ClaimLaw::Plain(base) = claim else {
        return Err(RuinError::Domain("verify needs an unperturbed base claim".into()).into());
    };
    Ok(perturb_continuous(base, a, eps)?.into())
}

fn verify_classical(model: &ClassicalModel, s: &Settings) -> Result<Report> {
    let a = threshold(s, &model.claim);
    let psi0 = Check::new("psi0-formula", (|| {
        let sweep = epsilon_sweep_classical(model, a, &s.epsilons, &[0.0], s.tolerance, s.grid_step)?;
        let tail = model.claim.tail(a);
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for row in &sweep.rows {
            let want = model.load() - model.lambda * row.epsilon * tail / model.c;
            worst = worst.max((row.psi0 - want).abs());
            parts.push(format!("psi*_{}(0) = {}", row.epsilon, row.psi0));
        }
        Ok((worst <= 1e-12, format!("{}; max error {worst:.1e}", parts.join(", "))))
    })());
    let coupling = Check::new("coupling", (|| {
        let starred = model.with_claim(perturbed_claim(&model.claim, a, smallest_epsilon(s)?)?);
        let report = simulate_coupled_unchecked(&starred, s.u, s.convention, &s.mc, &probe_list(s, s.mc.horizon))?;
        Ok(coupling_verdict(&report))
    })());
    let trend = Check::new("mc-trend", (|| {
        let probes = probe_list(s, s.mc.horizon);
        let cfg = McConfig {
            horizon: *probes.iter().max().unwrap(),
            ..s.mc.clone()
        };
        let est = simulate_ruin_horizons(model, s.u, s.convention, &cfg, &probes)?;
        let values: Vec<f64> = est.iter().map(|e| e.p_hat).collect();
        let probed: Vec<(usize, f64)> = probes.iter().copied().zip(values.iter().copied()).collect();
        let reaches = !model.is_neutral() || *values.last().unwrap() >= s.trend_threshold;
        Ok((is_nondecreasing(&values, 0.0) && reaches, join(&probed, "psi_hat")))
    })());
    Ok(checks_report(s, vec![psi0, coupling, trend]))
}

fn verify_andersen(model: &AndersenModel, s: &Settings) -> Result<Report> {
    let a = threshold(s, &model.claim);
    let spitzer = Check::new("spitzer-trend", (|| {
        let sp = spitzer_estimate(model, &s.n_list, &s.mc)?;
        let probed: Vec<(usize, f64)> = sp.n_list.iter().copied().zip(sp.psi0_lower.iter().copied()).collect();
        let last = *sp.psi0_lower.last().unwrap();
        let reaches = !model.is_neutral() || last >= s.trend_threshold;
        Ok((is_nondecreasing(&sp.psi0_lower, 0.0) && reaches, join(&probed, "psi0_lower")))
    })());
    let coupling = Check::new("coupling", (|| {
        let starred = model.with_claim(perturbed_claim(&model.claim, a, smallest_epsilon(s)?)?);
        let report = simulate_coupled_unchecked(&starred, s.u, s.convention, &s.mc, &probe_list(s, s.mc.horizon))?;
        Ok(coupling_verdict(&report))
    })());
    let sweep = Check::new("epsilon-sweep", (|| {
        let mut eps = s.epsilons.clone();
        eps.sort_by(|x, y| y.total_cmp(x));
        let n_max = *s.n_list.iter().max().unwrap();
        let (_, rows) = epsilon_sweep_andersen(model, a, &eps, n_max, &s.mc)?;
        let values: Vec<f64> = rows.iter().map(|r| r.a).collect();
        let detail = rows
            .iter()
            .map(|r| format!("A*_{} = {:.4}", r.epsilon, r.a))
            .collect::<Vec<_>>()
            .join(", ");
        Ok((is_nondecreasing(&values, 0.0), detail))
    })());
    Ok(checks_report(s, vec![spitzer, coupling, sweep]))
}
