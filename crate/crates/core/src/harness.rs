//! Replication runner, summary statistics, the finite-N convergence check
//! and scenario sweeps.
//!
//! Each estimator is computed from the ledger of the design it belongs to:
//! CR from a customer-side experiment, LR from a listing-side experiment,
//! TSRN and TSRI-k from one two-sided experiment following the balance
//! schedule, and the cluster estimator from a cluster experiment whose
//! treated clusters are redrawn in every replication.
//!
//! Random streams are keyed by `(point, design, replication)`, so results do
//! not depend on thread count or scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::designs::{beta_weight, cluster_market, tsr_schedule, ClusterScenario, TsrSchedule};
use crate::error::{Error, Result};
use crate::estimators::{gte_true, DesignContext, EstimatorId};
use crate::finite_sim::{initial_mass, simulate_with_rng, Consideration, InitialState, SimConfig};
use crate::ledger::BookingLedger;
use crate::market::{expand_for_design, DesignSpec, ExpandedMarket, Intervention, MarketConfig};
use crate::mean_field::{booking_rates_mf, integrate, IntegratorSettings, RateWindow};
use crate::presets::{self, Scenario};
use crate::rng::{stream, SimRng};

const BOOTSTRAP_STREAM: u64 = 0xb007;
const KURTZ_STREAM: u64 = 0x4b75;
/// Cluster estimates average over all assignments up to this many listing types.
const MAX_ENUMERATED_CLUSTER_TYPES: usize = 12;

/// `(T0, T1) / min(λ, τ)`.
pub fn effective_window(lambda: f64, tau: f64, t0: f64, t1: f64) -> Result<(f64, f64)> {
    if !(t0 >= 0.0 && t1 > t0) {
        return Err(Error::InvalidConfig(format!("need 0 <= T0 < T1, got [{t0}, {t1}]")));
    }
    let scale = lambda.min(tau);
    Ok((t0 / scale, t1 / scale))
}

/// Treatment fractions for the single-sided designs and the TSR schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignOptions {
    pub cr_a_c: f64,
    pub lr_a_l: f64,
    pub schedule: TsrSchedule,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            cr_a_c: 0.5,
            lr_a_l: 0.5,
            schedule: TsrSchedule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum DesignKind {
    Cr,
    Lr,
    Tsr,
    Cluster,
}

impl DesignKind {
    const ALL: [DesignKind; 4] = [DesignKind::Cr, DesignKind::Lr, DesignKind::Tsr, DesignKind::Cluster];

    fn of(id: &EstimatorId) -> Self {
        match id {
            EstimatorId::NaiveCr => DesignKind::Cr,
            EstimatorId::NaiveLr => DesignKind::Lr,
            EstimatorId::Tsrn | EstimatorId::Tsri { .. } => DesignKind::Tsr,
            EstimatorId::ClusterLr => DesignKind::Cluster,
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }
}

/// A fixed design and the context its estimators read.
#[derive(Debug, Clone)]
struct FixedDesign {
    market: ExpandedMarket,
    ctx: DesignContext,
}

fn fixed_design(cfg: &MarketConfig, itv: &Intervention, kind: DesignKind, opts: &DesignOptions) -> Result<Option<FixedDesign>> {
    let balance = cfg.balance();
    let (design, ctx) = match kind {
        DesignKind::Cr => (
            DesignSpec::Cr { a_c: opts.cr_a_c },
            DesignContext { a_c: opts.cr_a_c, a_l: 1.0, beta: 1.0 },
        ),
        DesignKind::Lr => (
            DesignSpec::Lr { a_l: opts.lr_a_l },
            DesignContext { a_c: 1.0, a_l: opts.lr_a_l, beta: 0.0 },
        ),
        DesignKind::Tsr => {
            opts.schedule.validate()?;
            let (a_c, a_l) = tsr_schedule(balance, &opts.schedule);
            let beta = beta_weight(balance, opts.schedule.c_exponent);
            (DesignSpec::Tsr { a_c, a_l }, DesignContext { a_c, a_l, beta })
        }
        DesignKind::Cluster => return Ok(None),
    };
    Ok(Some(FixedDesign {
        market: expand_for_design(cfg, itv, &design)?,
        ctx,
    }))
}

fn cluster_design(cfg: &MarketConfig, itv: &Intervention, assignment: Vec<bool>) -> Result<FixedDesign> {
    let market = expand_for_design(cfg, itv, &DesignSpec::Cluster { assignment })?;
    let ctx = DesignContext {
        a_c: 1.0,
        a_l: market.a_l,
        beta: 0.0,
    };
    Ok(FixedDesign { market, ctx })
}

/// Uniform draw over assignments that treat some but not all listing types.
fn draw_cluster_assignment(n_types: usize, rng: &mut SimRng) -> Result<Vec<bool>> {
    if n_types < 2 {
        return Err(Error::InvalidDesign("cluster designs need at least two listing types".into()));
    }
    loop {
        let a: Vec<bool> = (0..n_types).map(|_| rng.random::<bool>()).collect();
        if a.iter().any(|&x| x) && !a.iter().all(|&x| x) {
            return Ok(a);
        }
    }
}

/// What to run for one market.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSpec {
    pub estimators: Vec<EstimatorId>,
    pub designs: DesignOptions,
    /// `t0`, `t1` are in units of `1 / min(λ, τ)` when `rescale_time` is set.
    pub sim: SimConfig,
    pub reps: usize,
    pub rescale_time: bool,
}

impl ReplicationSpec {
    fn window(&self, cfg: &MarketConfig) -> Result<(f64, f64)> {
        if self.rescale_time {
            effective_window(cfg.lambda, cfg.tau, self.sim.t0, self.sim.t1)
        } else {
            effective_window(1.0, 1.0, self.sim.t0, self.sim.t1)
        }
    }

    fn sim_for(&self, cfg: &MarketConfig) -> Result<SimConfig> {
        let (t0, t1) = self.window(cfg)?;
        let sc = SimConfig { t0, t1, ..self.sim.clone() };
        sc.validate()?;
        Ok(sc)
    }

    fn kinds(&self) -> Vec<DesignKind> {
        DesignKind::ALL
            .into_iter()
            .filter(|k| self.estimators.iter().any(|e| DesignKind::of(e) == *k))
            .collect()
    }
}

fn evaluate_into(out: &mut [f64], estimators: &[EstimatorId], kind: DesignKind, ledger: &BookingLedger, ctx: &DesignContext) -> Result<()> {
    for (slot, id) in out.iter_mut().zip(estimators) {
        if DesignKind::of(id) == kind {
            *slot = id.evaluate(ledger, ctx)?;
        }
    }
    Ok(())
}

/// Runs every replication and keeps each outcome, in replication order.
/// Estimates are aligned with `spec.estimators`.
pub fn run_replications_partial(cfg: &MarketConfig, itv: &Intervention, spec: &ReplicationSpec, point: u64) -> Result<Vec<Result<Vec<f64>>>> {
    let sc = spec.sim_for(cfg)?;
    let kinds = spec.kinds();
    let mut fixed = Vec::new();
    for &k in &kinds {
        if let Some(d) = fixed_design(cfg, itv, k, &spec.designs)? {
            fixed.push((k, d));
        }
    }
    let wants_cluster = kinds.contains(&DesignKind::Cluster);
    if wants_cluster && cfg.n_listing_types() < 2 {
        return Err(Error::InvalidDesign("cluster designs need at least two listing types".into()));
    }

    let one = |rep: usize| -> Result<Vec<f64>> {
        let mut est = vec![f64::NAN; spec.estimators.len()];
        for (k, d) in &fixed {
            let mut rng = stream(sc.seed, &[point, k.tag(), rep as u64]);
            let out = simulate_with_rng(&d.market, &sc, &mut rng)?;
            evaluate_into(&mut est, &spec.estimators, *k, &out.ledger, &d.ctx)?;
        }
        if wants_cluster {
            let mut rng = stream(sc.seed, &[point, DesignKind::Cluster.tag(), rep as u64]);
            let assignment = draw_cluster_assignment(cfg.n_listing_types(), &mut rng)?;
            let d = cluster_design(cfg, itv, assignment)?;
            let out = simulate_with_rng(&d.market, &sc, &mut rng)?;
            evaluate_into(&mut est, &spec.estimators, DesignKind::Cluster, &out.ledger, &d.ctx)?;
        }
        Ok(est)
    };

    Ok((0..spec.reps)
        .into_par_iter()
        .map(|rep| one(rep).map_err(|e| Error::Replication { index: rep, source: Box::new(e) }))
        .collect())
}

/// Runs every replication; fails with the lowest failing replication index.
pub fn run_replications(cfg: &MarketConfig, itv: &Intervention, spec: &ReplicationSpec, point: u64) -> Result<Vec<Vec<f64>>> {
    run_replications_partial(cfg, itv, spec, point)?.into_iter().collect()
}

/// Which mean-field ledger backs the deterministic rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanFieldMode {
    /// Rates averaged over the simulation window from the simulation's initial state.
    #[default]
    Window,
    /// Steady-state rates.
    Steady,
}

/// Deterministic estimates from mean-field ledgers.
///
/// The cluster estimate is averaged over all admissible assignments, which
/// is its expectation under the per-replication redraw.
pub fn mean_field_estimates(cfg: &MarketConfig, itv: &Intervention, spec: &ReplicationSpec, mode: MeanFieldMode) -> Result<Vec<f64>> {
    let (t0, t1) = spec.window(cfg)?;
    let ledger_of = |m: &ExpandedMarket| -> Result<BookingLedger> {
        let window = match mode {
            MeanFieldMode::Steady => RateWindow::steady(),
            MeanFieldMode::Window => RateWindow::Transient {
                t0,
                t1,
                initial: initial_mass(m, spec.sim.initial_state)?,
                settings: IntegratorSettings::default(),
            },
        };
        booking_rates_mf(m, &window)
    };
    let mut est = vec![f64::NAN; spec.estimators.len()];
    for k in spec.kinds() {
        if let Some(d) = fixed_design(cfg, itv, k, &spec.designs)? {
            evaluate_into(&mut est, &spec.estimators, k, &ledger_of(&d.market)?, &d.ctx)?;
            continue;
        }
        let n = cfg.n_listing_types();
        if !(2..=MAX_ENUMERATED_CLUSTER_TYPES).contains(&n) {
            return Err(Error::InvalidDesign(format!("cannot enumerate cluster assignments over {n} listing types")));
        }
        let mut sums = vec![0.0; spec.estimators.len()];
        let count = (1u32 << n) - 2;
        for mask in 1..(1u32 << n) - 1 {
            let assignment = (0..n).map(|t| mask >> t & 1 == 1).collect();
            let d = cluster_design(cfg, itv, assignment)?;
            let mut one = vec![0.0; spec.estimators.len()];
            evaluate_into(&mut one, &spec.estimators, k, &ledger_of(&d.market)?, &d.ctx)?;
            sums.iter_mut().zip(&one).for_each(|(s, x)| *s += x);
        }
        for (slot, (id, s)) in est.iter_mut().zip(spec.estimators.iter().zip(&sums)) {
            if DesignKind::of(id) == k {
                *slot = s / count as f64;
            }
        }
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapSpec {
    /// Number of resamples.
    pub b: usize,
    /// Interval coverage in percent.
    pub level: f64,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        BootstrapSpec { b: 1000, level: 95.0 }
    }
}

impl BootstrapSpec {
    pub fn validate(&self) -> Result<()> {
        if self.b < 100 {
            return Err(Error::InvalidConfig(format!("bootstrap needs at least 100 resamples, got {}", self.b)));
        }
        if !(self.level > 0.0 && self.level < 100.0) {
            return Err(Error::InvalidConfig(format!("bootstrap level must lie in (0, 100), got {}", self.level)));
        }
        Ok(())
    }
}

/// Summary of one estimator across replications.
///
/// `se` is the across-replication standard deviation (`n − 1` divisor) and
/// `rmse = √(bias² + se²)`. `rmse_empirical` is the root mean squared error
/// of the individual estimates, `√(bias² + se² (n − 1) / n)`. The interval
/// is a bootstrap percentile interval for the mean estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub bias: f64,
    pub se: f64,
    pub rmse: f64,
    pub rmse_empirical: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reps: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Bias, spread and bootstrap interval of `estimates` against `gte_true`.
///
/// Estimates are sorted first, so the result does not depend on their order.
pub fn summarize(estimates: &[f64], gte_true: f64, boot: &BootstrapSpec, seed: u64) -> Result<Summary> {
    let n = estimates.len();
    if n < 2 {
        return Err(Error::TooFewReplications(n));
    }
    boot.validate()?;
    let xs = sorted(estimates);
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let se = var.sqrt();
    let bias = mean - gte_true;
    let rmse = (bias * bias + var).sqrt();
    let rmse_empirical = (bias * bias + var * (nf - 1.0) / nf).sqrt();

    let mut rng = stream(seed, &[BOOTSTRAP_STREAM]);
    let mut means: Vec<f64> = (0..boot.b)
        .map(|_| (0..n).map(|_| xs[rng.random_range(0..n)]).sum::<f64>() / nf)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - boot.level / 100.0) / 2.0;
    Ok(Summary {
        mean,
        bias,
        se,
        rmse,
        rmse_empirical,
        ci_lo: quantile(&means, tail),
        ci_hi: quantile(&means, 1.0 - tail),
        reps: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Sim,
    MeanField,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Sim => "sim",
            Source::MeanField => "meanfield",
        }
    }
}

/// One output row. Mean-field rows have `se = 0`, a degenerate interval
/// and `reps = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub scenario: String,
    pub point: String,
    pub estimator: EstimatorId,
    pub source: Source,
    pub mean: f64,
    pub bias: f64,
    pub se: f64,
    pub rmse: f64,
    pub rmse_empirical: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub gte_true: f64,
    pub reps: usize,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 13] = [
    "scenario", "point", "estimator", "source", "mean", "bias", "se", "rmse", "ci_lo", "ci_hi", "gte_true", "reps", "seed",
];

impl StatRow {
    fn sim(scenario: &str, point: &str, estimator: EstimatorId, s: &Summary, gte_true: f64, seed: u64) -> Self {
        StatRow {
            scenario: scenario.into(),
            point: point.into(),
            estimator,
            source: Source::Sim,
            mean: s.mean,
            bias: s.bias,
            se: s.se,
            rmse: s.rmse,
            rmse_empirical: s.rmse_empirical,
            ci_lo: s.ci_lo,
            ci_hi: s.ci_hi,
            gte_true,
            reps: s.reps,
            seed,
        }
    }

    fn mean_field(scenario: &str, point: &str, estimator: EstimatorId, mean: f64, gte_true: f64, seed: u64) -> Self {
        let bias = mean - gte_true;
        StatRow {
            scenario: scenario.into(),
            point: point.into(),
            estimator,
            source: Source::MeanField,
            mean,
            bias,
            se: 0.0,
            rmse: bias.abs(),
            rmse_empirical: bias.abs(),
            ci_lo: mean,
            ci_hi: mean,
            gte_true,
            reps: 0,
            seed,
        }
    }

    /// Fields in [`CSV_HEADER`] order; floats use the shortest exact form.
    pub fn csv_record(&self) -> [String; 13] {
        [
            self.scenario.clone(),
            self.point.clone(),
            self.estimator.to_string(),
            self.source.as_str().into(),
            self.mean.to_string(),
            self.bias.to_string(),
            self.se.to_string(),
            self.rmse.to_string(),
            self.ci_lo.to_string(),
            self.ci_hi.to_string(),
            self.gte_true.to_string(),
            self.reps.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Summary rows for the simulation estimates of one point.
pub fn sim_rows(
    scenario: &str,
    point: &str,
    estimators: &[EstimatorId],
    reps: &[Vec<f64>],
    gte: f64,
    boot: &BootstrapSpec,
    seed: u64,
    point_index: u64,
) -> Result<Vec<StatRow>> {
    estimators
        .iter()
        .enumerate()
        .map(|(e, id)| {
            let xs: Vec<f64> = reps.iter().map(|r| r[e]).collect();
            let s = summarize(&xs, gte, boot, crate::rng::child_seed(seed, &[point_index, e as u64]))?;
            Ok(StatRow::sim(scenario, point, *id, &s, gte, seed))
        })
        .collect()
}

/// Deterministic rows for the same estimators.
pub fn mean_field_rows(scenario: &str, point: &str, estimators: &[EstimatorId], est: &[f64], gte: f64, seed: u64) -> Vec<StatRow> {
    estimators
        .iter()
        .zip(est)
        .map(|(id, &m)| StatRow::mean_field(scenario, point, *id, m, gte, seed))
        .collect()
}

/// Distances between finite traces and the mean-field path for one `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KurtzRow {
    pub n: usize,
    /// One sup-distance per seed, in seed order.
    pub distances: Vec<f64>,
    pub median: f64,
}

fn median(xs: &[f64]) -> f64 {
    quantile(&sorted(xs), 0.5)
}

/// `sup_{t ≤ horizon} max_l |Y_l(t)/N − s_l(t)|` for each `N` and seed, with
/// the mean-field path started at the simulation's initial state.
pub fn kurtz_check(m: &ExpandedMarket, ns: &[usize], seeds: &[u64], horizon: f64, init: InitialState, interval: f64) -> Result<Vec<KurtzRow>> {
    if ns.len() < 2 || seeds.is_empty() {
        return Err(Error::InvalidConfig("need at least two system sizes and one seed".into()));
    }
    if !(horizon > 0.0 && interval > 0.0) {
        return Err(Error::InvalidConfig("horizon and interval must be positive".into()));
    }
    let steps = (horizon / interval).round().max(1.0);
    let interval = horizon / steps;
    let mut rows = Vec::new();
    for &n in ns {
        let distances = seeds
            .par_iter()
            .map(|&seed| -> Result<f64> {
                let sc = SimConfig {
                    n_listings: n,
                    t0: 0.0,
                    t1: horizon,
                    seed,
                    consideration: Consideration::PerListingBernoulli,
                    initial_state: init,
                    trace_interval: interval,
                    record_events: false,
                };
                let mut rng = stream(seed, &[KURTZ_STREAM, n as u64]);
                let out = simulate_with_rng(m, &sc, &mut rng)?;
                let y0: Vec<f64> = out.trace.y[0].iter().zip(&m.rho).map(|(y, r)| y.min(*r)).collect();
                let settings = IntegratorSettings {
                    max_step: None,
                    record_interval: Some(interval),
                };
                let traj = integrate(&y0, m, horizon, settings)?;
                let mut sup = 0.0_f64;
                for (y, s) in out.trace.y.iter().zip(&traj.states) {
                    for (a, b) in y.iter().zip(s.iter()) {
                        sup = sup.max((a - b).abs());
                    }
                }
                Ok(sup)
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(KurtzRow {
            n,
            median: median(&distances),
            distances,
        });
    }
    Ok(rows)
}

/// Families of scenario points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSet {
    /// A named preset at each relative demand `λ/τ`.
    VaryBalance { preset: String, balances: Vec<f64> },
    VaryAvgUtility { balances: Vec<f64> },
    VaryCustomerHet { balances: Vec<f64> },
    VaryListingHet { balances: Vec<f64> },
    VaryHte { balances: Vec<f64> },
    /// Fixed-size consideration sets of `k` listings.
    FixedK { k: usize, balances: Vec<f64> },
    /// The two-cluster market at each cross/own utility ratio `y/x`.
    ClusterPreferenceRatio { ratios: Vec<f64> },
}

impl ScenarioSet {
    pub fn label(&self) -> &'static str {
        match self {
            ScenarioSet::VaryBalance { .. } => "vary_balance",
            ScenarioSet::VaryAvgUtility { .. } => "vary_avg_utility",
            ScenarioSet::VaryCustomerHet { .. } => "vary_customer_het",
            ScenarioSet::VaryListingHet { .. } => "vary_listing_het",
            ScenarioSet::VaryHte { .. } => "vary_hte",
            ScenarioSet::FixedK { .. } => "fixed_k",
            ScenarioSet::ClusterPreferenceRatio { .. } => "cluster_preference_ratio",
        }
    }
}

/// A market to evaluate inside a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub id: String,
    pub scenario: Scenario,
    pub consideration: Option<Consideration>,
}

fn across(variants: Vec<Scenario>, balances: &[f64]) -> Vec<SweepPoint> {
    variants
        .iter()
        .flat_map(|s| {
            balances.iter().map(move |&b| SweepPoint {
                id: format!("{}:{b}", s.name),
                scenario: s.at_balance(b),
                consideration: None,
            })
        })
        .collect()
}

/// Expands a scenario family into its points.
pub fn scenario_points(set: &ScenarioSet, n_listings: usize) -> Result<Vec<SweepPoint>> {
    Ok(match set {
        ScenarioSet::VaryBalance { preset, balances } => across(vec![presets::by_name(preset, n_listings)?], balances),
        ScenarioSet::VaryAvgUtility { balances } => {
            across(vec![presets::low_utility(), presets::medium_utility(), presets::high_utility()], balances)
        }
        ScenarioSet::VaryCustomerHet { balances } => {
            across(vec![presets::customer_hom(), presets::customer_het_l(), presets::customer_het_h()], balances)
        }
        ScenarioSet::VaryListingHet { balances } => {
            across(vec![presets::listing_hom(), presets::listing_het_l(), presets::listing_het_h()], balances)
        }
        ScenarioSet::VaryHte { balances } => across(
            vec![presets::hte_multiplicative(), presets::hte_amplify(), presets::hte_reverse()],
            balances,
        ),
        ScenarioSet::FixedK { k, balances } => {
            let mut points = across(vec![presets::fixed_k(*k, n_listings)?], balances);
            for p in &mut points {
                p.consideration = Some(Consideration::FixedK { k: *k });
            }
            points
        }
        ScenarioSet::ClusterPreferenceRatio { ratios } => ratios
            .iter()
            .map(|&r| {
                let (market, intervention, _) = cluster_market(&ClusterScenario::with_ratio(r))?;
                Ok(SweepPoint {
                    id: format!("y/x={r}"),
                    scenario: Scenario {
                        name: "cluster".into(),
                        market,
                        intervention,
                    },
                    consideration: None,
                })
            })
            .collect::<Result<Vec<_>>>()?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub scenario: ScenarioSet,
    #[serde(default = "EstimatorId::standard")]
    pub estimators: Vec<EstimatorId>,
    #[serde(default)]
    pub designs: DesignOptions,
    pub reps: usize,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub bootstrap: BootstrapSpec,
    #[serde(default = "yes")]
    pub rescale_time: bool,
    /// When false only mean-field rows are produced.
    #[serde(default = "yes")]
    pub simulate: bool,
    #[serde(default)]
    pub mean_field: MeanFieldMode,
}

fn yes() -> bool {
    true
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators requested".into()));
        }
        if self.simulate {
            if self.reps < 2 {
                return Err(Error::TooFewReplications(self.reps));
            }
            self.bootstrap.validate()?;
            self.sim.validate()?;
        }
        Ok(())
    }

    fn replication_spec(&self, point: &SweepPoint) -> ReplicationSpec {
        let mut sim = self.sim.clone();
        if let Some(c) = point.consideration {
            sim.consideration = c;
        }
        ReplicationSpec {
            estimators: self.estimators.clone(),
            designs: self.designs,
            sim,
            reps: self.reps,
            rescale_time: self.rescale_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub point: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepOutput {
    pub rows: Vec<StatRow>,
    pub failures: Vec<PointFailure>,
}

/// Evaluates one point: mean-field rows and, if requested, simulation rows.
pub fn evaluate_point(spec: &SweepSpec, label: &str, point: &SweepPoint, index: u64) -> Result<Vec<StatRow>> {
    let rs = spec.replication_spec(point);
    let (cfg, itv) = (&point.scenario.market, &point.scenario.intervention);
    let gte = gte_true(cfg, itv)?;
    let seed = spec.sim.seed;
    let mf = mean_field_estimates(cfg, itv, &rs, spec.mean_field)?;
    let mut rows = Vec::new();
    if spec.simulate {
        let reps = run_replications(cfg, itv, &rs, index)?;
        rows.extend(sim_rows(label, &point.id, &spec.estimators, &reps, gte, &spec.bootstrap, seed, index)?);
    }
    rows.extend(mean_field_rows(label, &point.id, &spec.estimators, &mf, gte, seed));
    Ok(rows)
}

/// Runs every point of the sweep. A failing point is recorded and skipped.
pub fn sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let label = spec.scenario.label();
    let points = scenario_points(&spec.scenario, spec.sim.n_listings)?;
    let mut out = SweepOutput::default();
    for (i, p) in points.iter().enumerate() {
        match evaluate_point(spec, label, p, i as u64) {
            Ok(rows) => out.rows.extend(rows),
            Err(e) => out.failures.push(PointFailure {
                point: p.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    Ok(out)
}
