mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use marketlab::asymptotics::{q_limit, two_listing_forms, LimitTable, Regime, SUPPLY_APPROX_MIN_BALANCE};
use marketlab::designs::{beta_weight, tsr_schedule};
use marketlab::estimators::{gte_true, DesignContext, EstimatorId};
use marketlab::finite_sim::{simulate, SimConfig};
use marketlab::harness::{
    effective_window, mean_field_estimates, mean_field_rows, run_replications_partial, sim_rows, sweep, MeanFieldMode,
    ReplicationSpec, ScenarioSet, Source, StatRow, SweepOutput, SweepSpec, CSV_HEADER,
};
use marketlab::market::{expand_for_design, DesignSpec, Intervention, MarketConfig};
use marketlab::mean_field::{booking_rates_at, steady_state};
use marketlab::{asymptotics, Error};
use serde_json::{json, Value};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "marketlab", version, about = "Marketplace experiment laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean-field steady state, booking rates and GTE.
    Steady(Common),
    /// Replicated finite-market experiments with summary statistics.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the booking events of one two-sided run as CSV.
        #[arg(long, value_name = "PATH")]
        events: Option<PathBuf>,
    },
    /// Demand- and supply-limit booking tables and estimator biases.
    Asymptotics(Common),
    /// The scenario sweep configured in the `sweep` section.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Skip simulation and emit only mean-field rows.
        #[arg(long)]
        mean_field_only: bool,
    },
    /// Cluster versus two-sided estimators over the preference-ratio grid.
    ClusterCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        mean_field_only: bool,
    },
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Built-in market; replaces the market of the config.
    #[arg(long)]
    preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Worker threads for replications.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_REPLICATION: u8 = 4;

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::StepSizeUnderflow { .. } | Error::NoConvergence { .. }) => EXIT_SOLVER,
        Some(Error::Replication { .. }) => EXIT_REPLICATION,
        _ => EXIT_VALIDATION,
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: exit_code(&error),
            error,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig {
            schema_version: config::SCHEMA_VERSION,
            ..RunConfig::default()
        },
    };
    if let Some(p) = &common.preset {
        cfg.preset = Some(p.clone());
        cfg.market = None;
        cfg.intervention = None;
    }
    if cfg.preset.is_none() && cfg.market.is_none() {
        cfg.preset = Some("calibration".into());
    }
    if let Some(seed) = common.seed {
        cfg.sim.seed = seed;
    }
    if let Some(reps) = common.reps {
        cfg.analysis.reps = reps;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json_bytes(v: &Value) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn rows_csv(rows: &[StatRow]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_record())?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

fn rows_output(format: Format, rows: &[StatRow], extra: Value) -> anyhow::Result<Vec<u8>> {
    match format {
        Format::Csv => rows_csv(rows),
        Format::Json => {
            let mut v = json!({
                "se_convention": "across-replication standard deviation",
                "rows": rows,
            });
            if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
                m.extend(e);
            }
            json_bytes(&v)
        }
    }
}

fn state_report(m: &marketlab::market::ExpandedMarket, tol: f64) -> CmdResult<Value> {
    let ss = steady_state(m, tol)?;
    let q = booking_rates_at(m, &ss.s_star)?;
    Ok(json!({
        "s_star": ss.s_star.0,
        "q": q.rates,
        "booking_rate": q.total(),
        "booking_probability": q.total() / m.lambda,
        "residual_norm": ss.residual_norm,
        "solver_iterations": ss.solver_iterations,
    }))
}

fn cmd_steady(common: &Common) -> CmdResult<()> {
    let cfg = load(common)?;
    let (market, itv) = cfg.scenario()?;
    let tol = cfg.analysis.steady_tol;
    let gc = expand_for_design(&market, &itv, &DesignSpec::GlobalControl)?;
    let gt = expand_for_design(&market, &itv, &DesignSpec::GlobalTreatment)?;
    let gc_report = state_report(&gc, tol)?;
    let gt_report = state_report(&gt, tol)?;
    let gte = gt_report["booking_rate"].as_f64().unwrap() - gc_report["booking_rate"].as_f64().unwrap();
    let mut out = json!({
        "lambda": market.lambda,
        "tau": market.tau,
        "balance": market.balance(),
        "global_control": gc_report,
        "global_treatment": gt_report,
        "gte": gte,
    });
    if let Some(d) = &cfg.design.experiment {
        let m = expand_for_design(&market, &itv, d)?;
        out["experiment"] = json!({ "design": d, "state": state_report(&m, tol)? });
    }
    if market.balance() >= SUPPLY_APPROX_MIN_BALANCE {
        let approx = asymptotics::supply_state_approx(&gc, market.balance());
        let exact = steady_state(&gc, tol)?.s_star;
        let worst = exact
            .iter()
            .zip(approx.iter())
            .filter(|(e, _)| **e > 0.0)
            .map(|(e, a)| (a - e).abs() / e)
            .fold(0.0_f64, f64::max);
        out["supply_limit"] = json!({
            "approx_s_global_control": approx.0,
            "max_relative_error": worst,
        });
    }
    emit(common.out.as_deref(), &json_bytes(&out)?)?;
    Ok(())
}

fn scenario_label(cfg: &RunConfig) -> String {
    cfg.preset.clone().unwrap_or_else(|| "custom".into())
}

fn replication_spec(cfg: &RunConfig) -> ReplicationSpec {
    ReplicationSpec {
        estimators: cfg.analysis.estimators.clone(),
        designs: cfg.design.options(),
        sim: cfg.sim.clone(),
        reps: cfg.analysis.reps,
        rescale_time: cfg.analysis.rescale_time,
    }
}

fn write_events(path: &Path, market: &MarketConfig, itv: &Intervention, cfg: &RunConfig) -> CmdResult<()> {
    let (a_c, a_l) = tsr_schedule(market.balance(), &cfg.design.schedule);
    let m = expand_for_design(market, itv, &DesignSpec::Tsr { a_c, a_l })?;
    let (t0, t1) = if cfg.analysis.rescale_time {
        effective_window(market.lambda, market.tau, cfg.sim.t0, cfg.sim.t1)?
    } else {
        (cfg.sim.t0, cfg.sim.t1)
    };
    let sc = SimConfig {
        t0,
        t1,
        record_events: true,
        ..cfg.sim.clone()
    };
    let out = simulate(&m, &sc)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "customer_condition", "listing_condition", "listing_type"])
        .map_err(anyhow::Error::from)?;
    for e in &out.events {
        w.write_record([
            e.time.to_string(),
            e.customer_condition.to_string(),
            e.listing_condition.to_string(),
            market.listings[e.listing_type].id.clone(),
        ])
        .map_err(anyhow::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow!("{e}"))?;
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_simulate(common: &Common, events: Option<&Path>) -> CmdResult<()> {
    let cfg = load(common)?;
    let (market, itv) = cfg.scenario()?;
    let spec = replication_spec(&cfg);
    if spec.reps < 2 {
        return Err(Error::TooFewReplications(spec.reps).into());
    }
    cfg.analysis.bootstrap.validate()?;
    let gte = gte_true(&market, &itv)?;
    let mf = mean_field_estimates(&market, &itv, &spec, MeanFieldMode::Window)?;
    let outcomes = run_replications_partial(&market, &itv, &spec, 0)?;
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for o in outcomes {
        match o {
            Ok(e) => ok.push(e),
            Err(e) => failed.push(e),
        }
    }
    let label = scenario_label(&cfg);
    let point = market.balance().to_string();
    let seed = cfg.sim.seed;
    let mut rows = Vec::new();
    if ok.len() >= 2 {
        rows.extend(sim_rows(&label, &point, &spec.estimators, &ok, gte, &cfg.analysis.bootstrap, seed, 0)?);
    }
    rows.extend(mean_field_rows(&label, &point, &spec.estimators, &mf, gte, seed));
    let failures: Vec<String> = failed.iter().map(|e| e.to_string()).collect();
    emit(
        common.out.as_deref(),
        &rows_output(common.format, &rows, json!({ "replication_failures": failures }))?,
    )?;
    if let Some(path) = events {
        write_events(path, &market, &itv, &cfg)?;
    }
    if let Some(first) = failed.into_iter().next() {
        return Err(Failure {
            code: EXIT_REPLICATION,
            error: anyhow!("{} of {} replications failed; first: {first}", failures.len(), spec.reps),
        });
    }
    Ok(())
}

fn limit_report(market: &MarketConfig, itv: &Intervention, cfg: &RunConfig, regime: Regime) -> CmdResult<Value> {
    let balance = match regime {
        Regime::DemandLimit => cfg.analysis.demand_limit_balance,
        Regime::SupplyLimit => cfg.analysis.supply_limit_balance,
    };
    let m = market.with_balance(balance);
    let opts = cfg.design.options();
    let (a_c, a_l) = tsr_schedule(balance, &opts.schedule);
    let beta = beta_weight(balance, opts.schedule.c_exponent);
    let designs = [
        ("CR", DesignSpec::Cr { a_c: opts.cr_a_c }, DesignContext { a_c: opts.cr_a_c, a_l: 1.0, beta: 1.0 }),
        ("LR", DesignSpec::Lr { a_l: opts.lr_a_l }, DesignContext { a_c: 1.0, a_l: opts.lr_a_l, beta: 0.0 }),
        ("TSR", DesignSpec::Tsr { a_c, a_l }, DesignContext { a_c, a_l, beta }),
    ];
    let mut tables: Vec<(&str, LimitTable, DesignContext)> = Vec::new();
    let mut design_json = serde_json::Map::new();
    for (name, d, ctx) in designs {
        let t = q_limit(&expand_for_design(&m, itv, &d)?, regime);
        design_json.insert(name.into(), json!({ "design": d, "q_over_scale": t.q_over_scale }));
        tables.push((name, t, ctx));
    }
    let gte = tables[0].1.gte_over_scale;
    let mut estimates = serde_json::Map::new();
    for id in &cfg.analysis.estimators {
        let family = match id {
            EstimatorId::NaiveCr => "CR",
            EstimatorId::NaiveLr => "LR",
            EstimatorId::Tsrn | EstimatorId::Tsri { .. } => "TSR",
            EstimatorId::ClusterLr => continue,
        };
        let (_, t, ctx) = tables.iter().find(|(n, _, _)| *n == family).unwrap();
        let e = id.evaluate(&t.ledger(), ctx)?;
        estimates.insert(id.to_string(), json!({ "estimate_over_scale": e, "bias_over_scale": e - gte }));
    }
    Ok(json!({
        "balance": balance,
        "scale": match regime { Regime::DemandLimit => "lambda", Regime::SupplyLimit => "tau" },
        "gte_over_scale": gte,
        "designs": design_json,
        "estimators": estimates,
    }))
}

fn cmd_asymptotics(common: &Common) -> CmdResult<()> {
    let cfg = load(common)?;
    let (market, itv) = cfg.scenario()?;
    let mut out = json!({
        "demand_limit": limit_report(&market, &itv, &cfg, Regime::DemandLimit)?,
        "supply_limit": limit_report(&market, &itv, &cfg, Regime::SupplyLimit)?,
    });
    if market.n_customer_types() == 1 && market.n_listing_types() == 1 {
        let c = &market.customers[0];
        let f = two_listing_forms(
            c.alpha[0] * c.v[0],
            itv.alpha_treated[0][0] * itv.v_treated[0][0],
            c.epsilon,
            market.lambda,
            market.tau,
            cfg.design.cr_a_c,
        );
        out["two_listing"] = serde_json::to_value(f).map_err(anyhow::Error::from)?;
    }
    emit(common.out.as_deref(), &json_bytes(&out)?)?;
    Ok(())
}

fn sweep_spec(cfg: &RunConfig, scenario: ScenarioSet, simulate: bool, mode: MeanFieldMode) -> SweepSpec {
    SweepSpec {
        scenario,
        estimators: cfg.analysis.estimators.clone(),
        designs: cfg.design.options(),
        reps: cfg.analysis.reps,
        sim: cfg.sim.clone(),
        bootstrap: cfg.analysis.bootstrap,
        rescale_time: cfg.analysis.rescale_time,
        simulate,
        mean_field: mode,
    }
}

fn finish_sweep(common: &Common, out: &SweepOutput, extra: Value) -> CmdResult<()> {
    let mut extra = extra;
    extra["failures"] = serde_json::to_value(&out.failures).map_err(anyhow::Error::from)?;
    emit(common.out.as_deref(), &rows_output(common.format, &out.rows, extra)?)?;
    if let Some(f) = out.failures.first() {
        return Err(Failure {
            code: EXIT_REPLICATION,
            error: anyhow!("{} sweep point(s) failed; first {}: {}", out.failures.len(), f.point, f.message),
        });
    }
    Ok(())
}

fn cmd_sweep(common: &Common, mean_field_only: bool) -> CmdResult<()> {
    let cfg = load(common)?;
    let section = cfg
        .sweep
        .clone()
        .ok_or_else(|| anyhow!("config has no sweep section"))?;
    let spec = sweep_spec(&cfg, section.scenario, section.simulate && !mean_field_only, MeanFieldMode::Window);
    let out = sweep(&spec)?;
    finish_sweep(common, &out, json!({}))
}

/// Whether the mean-field cluster bias moves in one direction along the grid.
fn cluster_bias_monotone(rows: &[StatRow]) -> bool {
    let biases: Vec<f64> = rows
        .iter()
        .filter(|r| r.source == Source::MeanField && r.estimator == EstimatorId::ClusterLr)
        .map(|r| r.bias)
        .collect();
    let steps: Vec<f64> = biases.windows(2).map(|w| w[1] - w[0]).collect();
    steps.iter().all(|d| *d >= -1e-12) || steps.iter().all(|d| *d <= 1e-12)
}

fn cmd_cluster_compare(common: &Common, mean_field_only: bool) -> CmdResult<()> {
    let mut cfg = load(common)?;
    cfg.analysis.estimators = vec![EstimatorId::ClusterLr, EstimatorId::NaiveLr, EstimatorId::Tsri { k: 2.0 }];
    let mut ratios = cfg.analysis.cluster_ratios.clone();
    ratios.sort_by(f64::total_cmp);
    let scenario = ScenarioSet::ClusterPreferenceRatio { ratios };
    let spec = sweep_spec(&cfg, scenario, !mean_field_only, MeanFieldMode::Steady);
    let out = sweep(&spec)?;
    let monotone = cluster_bias_monotone(&out.rows);
    if common.format == Format::Csv {
        eprintln!("mean-field cluster bias monotone in y/x: {monotone}");
    }
    finish_sweep(common, &out, json!({ "cluster_bias_monotone": monotone }))
}

fn run(cli: &Cli) -> CmdResult<()> {
    match &cli.command {
        Command::Steady(c) => cmd_steady(c),
        Command::Simulate { common, events } => cmd_simulate(common, events.as_deref()),
        Command::Asymptotics(c) => cmd_asymptotics(c),
        Command::Sweep { common, mean_field_only } => cmd_sweep(common, *mean_field_only),
        Command::ClusterCompare { common, mean_field_only } => cmd_cluster_compare(common, *mean_field_only),
    }
}

fn threads(cli: &Cli) -> Option<usize> {
    match &cli.command {
        Command::Steady(c) | Command::Asymptotics(c) => c.threads,
        Command::Simulate { common, .. } | Command::Sweep { common, .. } | Command::ClusterCompare { common, .. } => {
            common.threads
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match threads(&cli) {
        Some(0) => Err(Failure {
            code: EXIT_VALIDATION,
            error: anyhow!("--threads must be positive"),
        }),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(Failure {
                code: EXIT_VALIDATION,
                error: e.into(),
            }),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
