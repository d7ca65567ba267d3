//! `maxent` — command-line pipeline for pairwise maximum-entropy analysis of
//! binary sign panels: ingestion, model fitting, simulation, criticality
//! diagnostics, network topology and reversal prediction.

mod files;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use files::{fmt, read_model, read_panel, sha256_hex, write_file, write_model, panel_to_csv};
use maxent::approx::entropy_zeroth;
use maxent::core::{empirical_distribution, sample_moments};
use maxent::crit::{
    entropy_utility_relation, log_spaced_grid, response_function_scan, sampling_significance,
    zipf_test,
};
use maxent::exact::fit_exact_maxent;
use maxent::infer::{fit_rpml, invert_mean_field, invert_tap, RpmlConfig};
use maxent::ingest::{binarize_returns, load_price_tables, synchronize_panel};
use maxent::mcmc::{simulate_panel, ChainConfig};
use maxent::predict::{compare_reversal_models, fit_reversal_models, kfold_cross_validation};
use maxent::topo::{
    correlation_matrix, degree_distribution_fit, hierarchical_clusters, influence_dissimilarity,
    minimum_spanning_tree, ms_distance, sliding_window_series, WindowStatistic,
};
use maxent::MaxentError;
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "maxent",
    version,
    about = "Pairwise maximum-entropy toolkit for binary sign panels"
)]
struct Cli {
    /// JSON config file; command flags override config keys of the same name.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (also via MAXENT_THREADS); default: available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw price CSVs, synchronize timestamps and binarize returns.
    Ingest(IngestArgs),
    /// Fit a pairwise model to a sign panel.
    Fit(FitArgs),
    /// Sample a sign panel from a model with Glauber dynamics.
    Simulate(SimulateArgs),
    /// Criticality diagnostics.
    #[command(subcommand)]
    Crit(CritCommand),
    /// Network topology: trees, clusters, sliding structural series.
    #[command(subcommand)]
    Topo(TopoCommand),
    /// Trend-reversal prediction and evaluation.
    #[command(subcommand)]
    Predict(PredictCommand),
    /// Run the fast built-in benchmark fixtures and report their statistics.
    Bench,
}

#[derive(Args)]
struct IngestArgs {
    /// Raw price CSV (`timestamp,asset,open,close` or wide format).
    #[arg(long)]
    input: PathBuf,
    /// Output sign-panel CSV.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FitMethod {
    /// Exact enumeration fit (moment matching, small N).
    Exact,
    /// Regularized pseudo-maximum-likelihood.
    Rpml,
    /// Naive mean-field inversion.
    Mf,
    /// TAP (second-order) inversion.
    Tap,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    method: FitMethod,
    #[arg(long)]
    panel: PathBuf,
    /// Output model JSON.
    #[arg(long)]
    output: PathBuf,
    /// Penalty strength for rpml (default 1/M).
    #[arg(long)]
    lambda: Option<f64>,
    /// Memory lags for rpml.
    #[arg(long)]
    lags: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model JSON.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Equilibration sweeps before recording.
    #[arg(long)]
    equilibration: Option<usize>,
    /// Sweeps between recorded samples.
    #[arg(long)]
    spacing: Option<usize>,
    /// Stochasticity temperature (rescales beta).
    #[arg(long)]
    temperature: Option<f64>,
    /// Output sign-panel CSV.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum CritCommand {
    /// Entropy and response-function scan over rescaling temperatures.
    Scan(CritScanArgs),
    /// Sampling-significance diagnostic (H[s] vs H[K]).
    Significance(PanelOnlyArgs),
    /// Bounded power-law (Zipf) fit with bootstrap goodness of fit.
    Zipf(CritZipfArgs),
    /// Entropy-utility linearity diagnostic.
    EntropyUtility(CritEntropyUtilityArgs),
}

#[derive(Args)]
struct CritScanArgs {
    #[arg(long)]
    panel: PathBuf,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Output CSV `T,S,R_U`.
    #[arg(long)]
    output_csv: Option<PathBuf>,
}

#[derive(Args)]
struct PanelOnlyArgs {
    #[arg(long)]
    panel: PathBuf,
}

#[derive(Args)]
struct CritZipfArgs {
    #[arg(long)]
    panel: PathBuf,
    /// Parametric bootstrap replicates (>= 100).
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CritEntropyUtilityArgs {
    #[arg(long)]
    panel: PathBuf,
    /// Output CSV `x,y,weight` of occupancy-level points.
    #[arg(long)]
    output_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TreeMetric {
    /// Mantegna-Sornette correlation distance.
    Ms,
    /// Influence dissimilarity of TAP-inverted couplings.
    Influence,
}

#[derive(Subcommand)]
enum TopoCommand {
    /// Minimum spanning tree of an asset dissimilarity matrix.
    Mst(TopoMstArgs),
    /// Complete-linkage hierarchical clustering.
    Cluster(TopoClusterArgs),
    /// Structural statistic over sliding windows.
    Sliding(TopoSlidingArgs),
}

#[derive(Args)]
struct TopoMstArgs {
    #[arg(long)]
    panel: PathBuf,
    #[arg(long, value_enum, default_value = "ms")]
    metric: TreeMetric,
    /// Output CSV `i,j,weight` (tree edges).
    #[arg(long)]
    output_csv: Option<PathBuf>,
}

#[derive(Args)]
struct TopoClusterArgs {
    #[arg(long)]
    panel: PathBuf,
    #[arg(long)]
    clusters: Option<usize>,
    /// Output CSV `node_a,node_b,height` (dendrogram merges).
    #[arg(long)]
    output_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SlidingStatistic {
    TreeMs,
    TreeJ,
    TraceJ,
    DetJ,
    EntropyS0,
    AggregateH,
}

impl From<SlidingStatistic> for WindowStatistic {
    fn from(s: SlidingStatistic) -> Self {
        match s {
            SlidingStatistic::TreeMs => WindowStatistic::TreeLengthMs,
            SlidingStatistic::TreeJ => WindowStatistic::TreeLengthJ,
            SlidingStatistic::TraceJ => WindowStatistic::TraceJ,
            SlidingStatistic::DetJ => WindowStatistic::DetJ,
            SlidingStatistic::EntropyS0 => WindowStatistic::EntropyS0,
            SlidingStatistic::AggregateH => WindowStatistic::AggregateH,
        }
    }
}

#[derive(Args)]
struct TopoSlidingArgs {
    #[arg(long)]
    panel: PathBuf,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    shift: Option<usize>,
    #[arg(long, value_enum)]
    statistic: SlidingStatistic,
    /// Output CSV `start,start_time,value,centered`.
    #[arg(long)]
    output_csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum PredictCommand {
    /// k-fold cross-validated flip prediction.
    Cv(PredictCvArgs),
    /// Simultaneous-reversal model comparison (pairwise-W, Poisson, DG).
    Reversals(PredictReversalsArgs),
}

#[derive(Args)]
struct PredictCvArgs {
    #[arg(long)]
    panel: PathBuf,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Output CSV `alpha,tp_rate,fp_rate,accuracy` (mean curves).
    #[arg(long)]
    output_roc: Option<PathBuf>,
    /// Output CSV `time,asset,p_flip,actual` (held-out predictions).
    #[arg(long)]
    output_predictions: Option<PathBuf>,
}

#[derive(Args)]
struct PredictReversalsArgs {
    #[arg(long)]
    panel: PathBuf,
    /// Simulated draws for the dichotomized-Gaussian count distribution.
    #[arg(long)]
    dg_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV `count,empirical,pairwise,poisson,dg`.
    #[arg(long)]
    output_csv: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Config file: JSON object whose keys default any unset optional flag.
// ---------------------------------------------------------------------------

struct Overrides(Map<String, Value>);

impl Overrides {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Overrides(Map::new()));
        };
        let content = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let value: Value = serde_json::from_str(&content)
            .with_context(|| format!("parsing config {}", path.display()))?;
        match value {
            Value::Object(map) => Ok(Overrides(map)),
            _ => bail!("config {} must be a JSON object", path.display()),
        }
    }

    fn float(&self, flag: Option<f64>, key: &str, default: f64) -> f64 {
        flag.or_else(|| self.0.get(key).and_then(Value::as_f64))
            .unwrap_or(default)
    }

    fn count(&self, flag: Option<usize>, key: &str, default: usize) -> usize {
        flag.or_else(|| self.0.get(key).and_then(Value::as_u64).map(|v| v as usize))
            .unwrap_or(default)
    }

    fn seed(&self, flag: Option<u64>, key: &str, default: u64) -> u64 {
        flag.or_else(|| self.0.get(key).and_then(Value::as_u64))
            .unwrap_or(default)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("MAXENT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        // A failure here only means a pool already exists (e.g. in tests).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<MaxentError>()
                .map(|m| m.exit_code() as u8)
                .unwrap_or(1);
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = Overrides::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest(args) => ingest(args),
        Command::Fit(args) => fit(args, &cfg),
        Command::Simulate(args) => simulate(args, &cfg),
        Command::Crit(sub) => match sub {
            CritCommand::Scan(args) => crit_scan(args, &cfg),
            CritCommand::Significance(args) => crit_significance(args),
            CritCommand::Zipf(args) => crit_zipf(args, &cfg),
            CritCommand::EntropyUtility(args) => crit_entropy_utility(args),
        },
        Command::Topo(sub) => match sub {
            TopoCommand::Mst(args) => topo_mst(args),
            TopoCommand::Cluster(args) => topo_cluster(args, &cfg),
            TopoCommand::Sliding(args) => topo_sliding(args, &cfg),
        },
        Command::Predict(sub) => match sub {
            PredictCommand::Cv(args) => predict_cv(args, &cfg),
            PredictCommand::Reversals(args) => predict_reversals(args, &cfg),
        },
        Command::Bench => bench(),
    }
}

fn print_summary(value: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn csv_report(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

fn ingest(args: IngestArgs) -> Result<()> {
    let tables = load_price_tables(&args.input)?;
    let synced = synchronize_panel(&tables)?;
    let panel = binarize_returns(&synced)?;
    write_file(&args.output, &panel_to_csv(&panel))?;
    let checksum = sha256_hex(&args.output)?;
    print_summary(&json!({
        "command": "ingest",
        "assets": panel.n_assets(),
        "times": panel.n_times(),
        "output": args.output.display().to_string(),
        "sha256": checksum,
    }))
}

fn fit(args: FitArgs, cfg: &Overrides) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let m = panel.n_times();
    let (model, method) = match args.method {
        FitMethod::Exact => (fit_exact_maxent(&sample_moments(&panel))?, "exact"),
        FitMethod::Rpml => {
            let base = RpmlConfig::for_sample(m);
            let lambda = cfg.float(args.lambda, "lambda", base.lambda);
            let config = base
                .with_lags(cfg.count(args.lags, "lags", 0))
                .with_lambda(lambda);
            (fit_rpml(&panel, &config)?, "rpml")
        }
        FitMethod::Mf => (invert_mean_field(&sample_moments(&panel))?, "mf"),
        FitMethod::Tap => (invert_tap(&sample_moments(&panel))?.model, "tap"),
    };
    write_model(&args.output, &model)?;
    print_summary(&json!({
        "command": "fit",
        "method": method,
        "assets": panel.n_assets(),
        "samples": m,
        "max_abs_coupling": fmt(model.influences().amax()),
        "output": args.output.display().to_string(),
    }))
}

fn simulate(args: SimulateArgs, cfg: &Overrides) -> Result<()> {
    let model = read_model(&args.model)?;
    let samples = cfg.count(args.samples, "samples", 10_000);
    let seed = cfg.seed(args.seed, "seed", 1);
    let config = ChainConfig::new(samples, seed)
        .with_equilibration(cfg.count(args.equilibration, "equilibration", 10_000))
        .with_spacing(cfg.count(args.spacing, "spacing", 1))
        .with_temperature(cfg.float(args.temperature, "temperature", 1.0));
    let panel = simulate_panel(&model, &config)?;
    write_file(&args.output, &panel_to_csv(&panel))?;
    print_summary(&json!({
        "command": "simulate",
        "samples": samples,
        "seed": seed,
        "output": args.output.display().to_string(),
    }))
}

fn crit_scan(args: CritScanArgs, cfg: &Overrides) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let grid = log_spaced_grid(
        cfg.float(args.t_min, "t_min", 0.2),
        cfg.float(args.t_max, "t_max", 3.0),
        cfg.count(args.points, "points", 200),
    );
    let dist = empirical_distribution(&panel);
    let scan = response_function_scan(&dist, &grid)?;
    if let Some(path) = &args.output_csv {
        let rows = (0..scan.t_grid.len()).map(|k| {
            format!(
                "{},{},{}",
                fmt(scan.t_grid[k]),
                fmt(scan.entropy_curve[k]),
                fmt(scan.response_curve[k])
            )
        });
        write_file(path, &csv_report("T,S,R_U", rows))?;
    }
    print_summary(&json!({
        "command": "crit scan",
        "t_max": fmt(scan.t_max),
        "r_max": fmt(scan.r_max),
        "grid_points": scan.t_grid.len(),
    }))
}

fn crit_significance(args: PanelOnlyArgs) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let diag = sampling_significance(&panel);
    print_summary(&json!({
        "command": "crit significance",
        "h_s": fmt(diag.h_s),
        "h_k": fmt(diag.h_k),
        "h_s_bound": fmt(diag.h_s_bound),
        "sample_size": diag.sample_size,
        "n_units": diag.n_units,
        "occupancy_levels": diag.m_counts.len(),
    }))
}

fn crit_zipf(args: CritZipfArgs, cfg: &Overrides) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let dist = empirical_distribution(&panel);
    let fit = zipf_test(
        &dist,
        cfg.count(args.bootstrap, "bootstrap", 200),
        cfg.seed(args.seed, "seed", 1),
    )?;
    print_summary(&json!({
        "command": "crit zipf",
        "alpha_mle": fmt(fit.alpha_mle),
        "sigma_alpha": fmt(fit.sigma_alpha),
        "x_max": fit.x_max,
        "ks_statistic": fmt(fit.ks_statistic),
        "p_value": fmt(fit.p_value),
        "bootstrap_count": fit.bootstrap_count,
    }))
}

fn crit_entropy_utility(args: CritEntropyUtilityArgs) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let dist = empirical_distribution(&panel);
    let relation = entropy_utility_relation(&dist)?;
    if let Some(path) = &args.output_csv {
        let rows = relation
            .points
            .iter()
            .map(|(x, y, w)| format!("{},{},{}", fmt(*x), fmt(*y), fmt(*w)));
        write_file(path, &csv_report("x,y,weight", rows))?;
    }
    print_summary(&json!({
        "command": "crit entropy-utility",
        "slope": fmt(relation.slope),
        "intercept": fmt(relation.intercept),
        "relative_nonlinearity": fmt(relation.relative_nonlinearity),
        "levels": relation.points.len(),
    }))
}

fn topo_mst(args: TopoMstArgs) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let (dissimilarity, metric) = match args.metric {
        TreeMetric::Ms => {
            let (corr, _) = correlation_matrix(&panel)?;
            (ms_distance(&corr, panel.assets())?, "ms")
        }
        TreeMetric::Influence => {
            let inversion = invert_tap(&sample_moments(&panel))?;
            (influence_dissimilarity(&inversion.model)?, "influence")
        }
    };
    let tree = minimum_spanning_tree(&dissimilarity)?;
    let degree_fit = degree_distribution_fit(&tree);
    if let Some(path) = &args.output_csv {
        let rows = tree
            .edges
            .iter()
            .map(|e| format!("{},{},{}", e.0, e.1, fmt(e.2)));
        write_file(path, &csv_report("i,j,weight", rows))?;
    }
    print_summary(&json!({
        "command": "topo mst",
        "metric": metric,
        "total_length": fmt(tree.total_length),
        "edges": tree.edges.len(),
        "degree_alpha_ls": fmt(degree_fit.alpha_ls),
        "degree_alpha_mle": fmt(degree_fit.alpha_mle),
        "small_sample_warning": degree_fit.small_sample_warning,
    }))
}

fn topo_cluster(args: TopoClusterArgs, cfg: &Overrides) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let (corr, _) = correlation_matrix(&panel)?;
    let dissimilarity = ms_distance(&corr, panel.assets())?;
    let clusters = cfg.count(args.clusters, "clusters", 2);
    let clustering = hierarchical_clusters(&dissimilarity, clusters)?;
    if let Some(path) = &args.output_csv {
        let rows = clustering
            .merges
            .iter()
            .map(|(a, b, h)| format!("{a},{b},{}", fmt(*h)));
        write_file(path, &csv_report("node_a,node_b,height", rows))?;
    }
    let assignment: Vec<Value> = panel
        .assets()
        .iter()
        .zip(&clustering.labels)
        .map(|(asset, label)| json!({ "asset": asset, "cluster": label }))
        .collect();
    print_summary(&json!({
        "command": "topo cluster",
        "clusters": clusters,
        "assignment": assignment,
        "leaf_order": clustering.permutation,
    }))
}

fn topo_sliding(args: TopoSlidingArgs, cfg: &Overrides) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let width = cfg.count(args.width, "width", 100);
    let shift = cfg.count(args.shift, "shift", 1);
    let series = sliding_window_series(&panel, width, shift, args.statistic.into())?;
    if let Some(path) = &args.output_csv {
        let rows = (0..series.starts.len()).map(|k| {
            format!(
                "{},{},{},{}",
                series.starts[k],
                series.start_times[k],
                fmt(series.values[k]),
                fmt(series.centered[k])
            )
        });
        write_file(path, &csv_report("start,start_time,value,centered", rows))?;
    }
    print_summary(&json!({
        "command": "topo sliding",
        "windows": series.starts.len(),
        "width": width,
        "shift": shift,
    }))
}

fn predict_cv(args: PredictCvArgs, cfg: &Overrides) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let m = panel.n_times();
    let base = RpmlConfig::for_sample(m);
    let lambda = cfg.float(args.lambda, "lambda", base.lambda);
    let config = base
        .with_lags(cfg.count(args.lags, "lags", 0))
        .with_lambda(lambda);
    let folds = cfg.count(args.folds, "folds", 10);
    let report = kfold_cross_validation(&panel, &config, folds)?;
    if let Some(path) = &args.output_roc {
        let mean = &report.mean;
        let rows = (0..mean.thresholds.len()).map(|k| {
            format!(
                "{},{},{},{}",
                fmt(mean.thresholds[k]),
                fmt(mean.tp_rate[k]),
                fmt(mean.fp_rate[k]),
                fmt(mean.accuracy[k])
            )
        });
        write_file(path, &csv_report("alpha,tp_rate,fp_rate,accuracy", rows))?;
    }
    if let Some(path) = &args.output_predictions {
        let rows = report.predictions.iter().map(|(t, i, p, actual)| {
            format!(
                "{},{},{},{}",
                panel.times()[*t],
                panel.assets()[*i],
                fmt(*p),
                i32::from(*actual)
            )
        });
        write_file(path, &csv_report("time,asset,p_flip,actual", rows))?;
    }
    let (best_accuracy, best_threshold) = report.mean.best_accuracy();
    let per_asset: Vec<Value> = panel
        .assets()
        .iter()
        .zip(&report.per_asset)
        .map(|(asset, r)| json!({ "asset": asset, "auc": fmt(r.auc) }))
        .collect();
    print_summary(&json!({
        "command": "predict cv",
        "folds": folds,
        "mean_auc": fmt(report.mean.auc),
        "best_accuracy": fmt(best_accuracy),
        "best_threshold": fmt(best_threshold),
        "per_asset": per_asset,
    }))
}

fn predict_reversals(args: PredictReversalsArgs, cfg: &Overrides) -> Result<()> {
    let panel = read_panel(&args.panel)?;
    let models = fit_reversal_models(&panel)?;
    let comparison = compare_reversal_models(
        &panel,
        &models,
        cfg.count(args.dg_samples, "dg_samples", 100_000),
        cfg.seed(args.seed, "seed", 1),
    )?;
    if let Some(path) = &args.output_csv {
        let rows = (0..=panel.n_assets()).map(|k| {
            format!(
                "{k},{},{},{},{}",
                fmt(comparison.empirical.probabilities[k]),
                fmt(comparison.pairwise.probabilities[k]),
                fmt(comparison.poisson.probabilities[k]),
                fmt(comparison.dg.probabilities[k])
            )
        });
        write_file(path, &csv_report("count,empirical,pairwise,poisson,dg", rows))?;
    }
    print_summary(&json!({
        "command": "predict reversals",
        "kld_pairwise": fmt(comparison.kld_pairwise),
        "kld_poisson": fmt(comparison.kld_poisson),
        "kld_dg": fmt(comparison.kld_dg),
        "dg_clipped_pairs": models.dg.clipped_entries.len(),
    }))
}

/// Fast fixtures exercising the exact, crit and approx pipelines end to end.
fn bench() -> Result<()> {
    use maxent::approx::{bd_consensus_dynamics, BdModel};
    use maxent::core::CouplingModel;
    use maxent::exact::gibbs_distribution;

    // Exact 3x3 lattice rescaling scan.
    let lattice = CouplingModel::square_lattice(3, 1.0);
    let dist = gibbs_distribution(&lattice)?;
    let scan = response_function_scan(&dist, &maxent::crit::default_t_grid())?;

    // Critical consensus decay exponent.
    let bd = BdModel::new(1.0, 0.0, 1.0, 1)?;
    let trajectory = bd_consensus_dynamics(&bd, 0.5, 10_000)?;
    let points: Vec<(f64, f64)> = (100..=10_000)
        .map(|t| ((t as f64).ln(), trajectory[t].ln()))
        .collect();
    let n = points.len() as f64;
    let xb = points.iter().map(|p| p.0).sum::<f64>() / n;
    let yb = points.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = points.iter().map(|p| (p.0 - xb) * (p.1 - yb)).sum::<f64>()
        / points.iter().map(|p| (p.0 - xb) * (p.0 - xb)).sum::<f64>();

    // Independent-unit entropy sanity value.
    let s0 = entropy_zeroth(&[0.0; 9]);

    print_summary(&json!({
        "command": "bench",
        "lattice_t_max": fmt(scan.t_max),
        "lattice_r_max": fmt(scan.r_max),
        "consensus_decay_exponent": fmt(slope),
        "independent_entropy_9_units": fmt(s0),
    }))
}
