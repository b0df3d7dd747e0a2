use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde_json::json;

use marginlab::datagen::{
    apply_noise, check_assumptions, read_dataset_dir, sample_clean, write_dataset_dir,
};
use marginlab::diagnostics::{bayes_reference, check_events, corollary_bound, risk_report, theorem_bound};
use marginlab::gdflow::{train_gd, write_trace_csv, StepSizePolicy};
use marginlab::harness::{
    effective_threads, emit_csv, emit_plot, preset, read_records_file, result_from_records,
    run_sweep_with, HarnessError,
};
use marginlab::rng::mix;
use marginlab::solver::max_margin;
use marginlab::{
    Classifier, Dataset, GdConfig, Manifest, ModelSpec, NoiseSpec, Real, SolverConfig,
    SweepConfig,
};

#[derive(Parser)]
#[command(
    name = "marginlab",
    version,
    about = "max-margin linear classification experiments on synthetic mixtures"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a dataset and write dataset.csv + manifest.json to a directory
    Generate(GenerateArgs),
    /// Solve for the exact max-margin classifier of a stored dataset
    Solve(SolveArgs),
    /// Run gradient descent on the exponential loss, logging a trace
    Train(TrainArgs),
    /// Reference bounds, event checks, and risk measurement
    #[command(subcommand)]
    Diagnose(DiagnoseCmd),
    /// Run a full experiment grid, optionally resumable via a records file
    Sweep(SweepArgs),
    /// Render the SVG chart for an existing records file
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Model spec JSON file
    #[arg(long)]
    spec: PathBuf,
    /// Noise spec JSON file (omit for clean labels)
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Number of rows to sample
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Dataset directory written by `generate`
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    kkt_tol: Option<f64>,
    #[arg(long)]
    max_passes: Option<usize>,
    /// Write the classifier JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory written by `generate`
    #[arg(long)]
    data: PathBuf,
    /// Step size policy: `smoothness` or `fixed:<alpha>`
    #[arg(long, default_value = "smoothness")]
    step: String,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    /// Iterations between trace rows (default: iters/200)
    #[arg(long)]
    stride: Option<usize>,
    /// Stop early once the direction gap to the reference drops below this
    #[arg(long)]
    target: Option<f64>,
    /// Classifier JSON to compare directions against (e.g. `solve` output)
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Write the iteration trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the final iterate and summary as JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DiagnoseCmd {
    /// Closed-form risk bounds for a parameter point
    Bound(BoundArgs),
    /// Concentration event checks for a stored dataset
    Events(EventsArgs),
    /// Working-regime inequality checks for a stored dataset
    Assumptions(AssumptionsArgs),
    /// Measured and analytic risk of a classifier
    Risk(RiskArgs),
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    eta: f64,
    /// Constant in the exponent
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Squared mean norm; enables the general bound and the Bayes reference
    #[arg(long)]
    mu_norm_sq: Option<f64>,
    /// Signal height; with --s enables the rare/weak bound
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of signal coordinates
    #[arg(long)]
    s: Option<usize>,
}

#[derive(Args)]
struct EventsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 3.0)]
    c: f64,
    #[arg(long, default_value_t = 0.1)]
    c_prime: f64,
}

#[derive(Args)]
struct AssumptionsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Constant scaling the regime inequalities
    #[arg(long, default_value_t = 3.0)]
    big_c: f64,
    /// Lower floor on latent signal energy
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
}

#[derive(Args)]
struct RiskArgs {
    /// Classifier JSON (`solve` output, or a bare coordinate array)
    #[arg(long)]
    classifier: PathBuf,
    /// Dataset directory; its manifest supplies the model and noise
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model spec JSON (alternative to --data)
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Noise spec JSON (only with --spec; omit for clean labels)
    #[arg(long)]
    noise: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    m_test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Constant for the closed-form bounds in the report
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// Built-in grid: fig1, fig2, fig3, or fig4
    #[arg(long)]
    preset: Option<String>,
    /// Sweep config JSON (alternative to --preset)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    m_test: Option<usize>,
    /// JSONL records file; reruns resume from whatever is already there
    #[arg(long)]
    records: Option<PathBuf>,
    /// Write the per-trial table here
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the SVG chart here
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker thread cap (overrides MML_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    /// JSONL records file from a sweep
    #[arg(long)]
    records: PathBuf,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    // Die silently when a downstream pipe closes (`marginlab train | head`)
    // instead of panicking mid-print; Rust ignores SIGPIPE by default.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.cmd {
        Cmd::Generate(a) => generate(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Train(a) => train(a),
        Cmd::Diagnose(DiagnoseCmd::Bound(a)) => bound(a),
        Cmd::Diagnose(DiagnoseCmd::Events(a)) => events(a),
        Cmd::Diagnose(DiagnoseCmd::Assumptions(a)) => assumptions(a),
        Cmd::Diagnose(DiagnoseCmd::Risk(a)) => risk(a),
        Cmd::Sweep(a) => sweep(a),
        Cmd::Plot(a) => plot(a),
    }
}

fn open_dataset(dir: &Path) -> Result<(Dataset, Manifest), HarnessError> {
    read_dataset_dir::<Real>(dir)
        .map_err(|e| HarnessError::Invalid(format!("cannot load dataset {}: {e}", dir.display())))
}

/// Reads a JSON input file; failures count as config errors, not I/O errors.
fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| HarnessError::Invalid(format!("cannot parse {}: {e}", path.display())))
}

/// Accepts either a full `solve` output or a bare JSON array of coordinates.
fn load_weights(path: &Path) -> Result<Vec<Real>, HarnessError> {
    let text = fs::read_to_string(path)
        .map_err(|e| HarnessError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    if let Ok(clf) = serde_json::from_str::<Classifier>(&text) {
        return Ok(clf.w);
    }
    serde_json::from_str::<Vec<Real>>(&text).map_err(|_| {
        HarnessError::Invalid(format!(
            "{} is neither a classifier JSON nor a coordinate array",
            path.display()
        ))
    })
}

fn write_or_print(out: Option<&Path>, json: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => {
            fs::write(path, format!("{json}\n"))?;
            eprintln!("wrote {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<(), HarnessError> {
    let spec: ModelSpec = read_json(&a.spec)?;
    let noise: NoiseSpec = match &a.noise {
        Some(path) => read_json(path)?,
        None => NoiseSpec::None,
    };
    let clean = sample_clean(&spec, a.n, mix(a.seed, 1))?;
    let ds = apply_noise(&clean, &noise, &spec.mu(), mix(a.seed, 2))?;
    let manifest = Manifest {
        spec,
        noise,
        seed: a.seed,
        n: ds.n(),
        p: ds.p(),
    };
    write_dataset_dir(&a.out, &ds, &manifest)?;
    eprintln!("wrote {} ({} rows, {} columns)", a.out.display(), ds.n(), ds.p());
    Ok(())
}

fn solve(a: SolveArgs) -> Result<(), HarnessError> {
    let (ds, _) = open_dataset(&a.data)?;
    let mut cfg = SolverConfig::default();
    if let Some(t) = a.kkt_tol {
        cfg.kkt_tol = t;
    }
    if let Some(k) = a.max_passes {
        cfg.max_passes = k;
    }
    let clf = max_margin(&ds, &cfg)?;
    write_or_print(a.out.as_deref(), &serde_json::to_string_pretty(&clf)?)
}

fn parse_step(s: &str) -> Result<StepSizePolicy<Real>, HarnessError> {
    if s == "smoothness" {
        return Ok(StepSizePolicy::SmoothnessBound);
    }
    if let Some(rest) = s.strip_prefix("fixed:") {
        if let Ok(alpha) = rest.parse::<f64>() {
            if alpha > 0.0 && alpha.is_finite() {
                return Ok(StepSizePolicy::FixedAlpha(alpha));
            }
        }
    }
    Err(HarnessError::Invalid(format!(
        "bad step policy `{s}`; use `smoothness` or `fixed:<alpha>` with alpha > 0"
    )))
}

fn train(a: TrainArgs) -> Result<(), HarnessError> {
    let (ds, manifest) = open_dataset(&a.data)?;
    let cfg = GdConfig {
        policy: parse_step(&a.step)?,
        max_iters: a.iters,
        log_stride: a.stride.unwrap_or((a.iters / 200).max(1)),
        direction_gap_target: a.target,
    };
    let reference = a.reference.as_deref().map(load_weights).transpose()?;
    let mu = manifest.spec.mu();
    let (v, trace) = train_gd(&ds, &cfg, reference.as_deref(), Some(&mu))?;
    if let Some(path) = &a.trace {
        let mut file = fs::File::create(path)?;
        write_trace_csv(&trace, &mut file)?;
        eprintln!("wrote {}", path.display());
    }
    let summary = json!({
        "v": v,
        "iters_run": trace.iters_run,
        "step_size": trace.step_size,
        "sup_loss_ratio": trace.sup_loss_ratio,
        "early_stopped": trace.early_stopped,
        "final_direction_gap": trace.rows.last().map(|r| r.direction_gap),
    });
    write_or_print(a.out.as_deref(), &serde_json::to_string_pretty(&summary)?)
}

fn bound(a: BoundArgs) -> Result<(), HarnessError> {
    let mut out = serde_json::Map::new();
    if let Some(mu_sq) = a.mu_norm_sq {
        out.insert(
            "theorem_bound".into(),
            json!(theorem_bound(mu_sq, a.p, a.eta, a.c)),
        );
        out.insert(
            "bayes".into(),
            serde_json::to_value(bayes_reference(mu_sq.sqrt(), a.eta, a.c))?,
        );
    }
    if let (Some(gamma), Some(s)) = (a.gamma, a.s) {
        out.insert(
            "corollary_bound".into(),
            json!(corollary_bound(gamma, s, a.p, a.eta, a.c)),
        );
    }
    if out.is_empty() {
        return Err(HarnessError::Invalid(
            "need --mu-norm-sq, or --gamma with --s".into(),
        ));
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn events(a: EventsArgs) -> Result<(), HarnessError> {
    let (ds, manifest) = open_dataset(&a.data)?;
    let report = check_events(
        &ds,
        &manifest.spec.mu(),
        a.delta,
        a.c,
        a.c_prime,
        manifest.noise.eta(),
    )?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn assumptions(a: AssumptionsArgs) -> Result<(), HarnessError> {
    let (ds, manifest) = open_dataset(&a.data)?;
    let report = check_assumptions(
        &manifest.spec,
        ds.n(),
        a.delta,
        manifest.noise.eta(),
        a.big_c,
        a.kappa,
    );
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn risk(a: RiskArgs) -> Result<(), HarnessError> {
    let (spec, noise) = match (&a.data, &a.spec) {
        (Some(_), Some(_)) => {
            return Err(HarnessError::Invalid(
                "give either --data or --spec, not both".into(),
            ))
        }
        (Some(dir), None) => {
            let (_, manifest) = open_dataset(dir)?;
            (manifest.spec, manifest.noise)
        }
        (None, Some(path)) => {
            let spec: ModelSpec = read_json(path)?;
            let noise = match &a.noise {
                Some(p) => read_json(p)?,
                None => NoiseSpec::None,
            };
            (spec, noise)
        }
        (None, None) => {
            return Err(HarnessError::Invalid(
                "one of --data or --spec is required".into(),
            ))
        }
    };
    let w = load_weights(&a.classifier)?;
    let report = risk_report(&w, &spec, &noise, a.m_test, a.seed, a.c)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<(), HarnessError> {
    let mut cfg: SweepConfig = match (&a.preset, &a.config) {
        (Some(_), Some(_)) => {
            return Err(HarnessError::Invalid(
                "give either --preset or --config, not both".into(),
            ))
        }
        (Some(name), None) => preset(name)?,
        (None, Some(path)) => read_json(path)?,
        (None, None) => {
            return Err(HarnessError::Invalid(
                "one of --preset or --config is required".into(),
            ))
        }
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.base_seed {
        cfg.base_seed = s;
    }
    if let Some(m) = a.m_test {
        cfg.m_test = m;
    }
    let threads = a.threads.or_else(effective_threads);
    let result = run_sweep_with(&cfg, a.records.as_deref(), threads)?;

    println!(
        "{}: {} points x {} trials, {} records",
        result.config.name,
        result.points.len(),
        result.config.trials,
        result.records.len()
    );
    for (point, agg) in result.points.iter().zip(&result.aggregates) {
        println!(
            "  grid {:>3}  n={:>5} p={:>6} s={:>5} gamma={:<5} eta={:<5} mean_test_err={:<9.5} stderr={:<9.5} separable={}/{}",
            point.grid_id,
            point.n,
            point.p,
            point.s,
            point.gamma,
            point.eta,
            agg.mean_test_error,
            agg.stderr_test_error,
            agg.separable_count,
            agg.trials,
        );
    }
    if let Some(path) = &a.csv {
        emit_csv(&result, path)?;
        eprintln!("wrote {}", path.display());
    }
    if let Some(path) = &a.plot {
        emit_plot(&result, path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<(), HarnessError> {
    let (cfg, records) = read_records_file::<Real>(&a.records)?;
    let result = result_from_records(&cfg, records)?;
    emit_plot(&result, &a.out)?;
    eprintln!("wrote {}", a.out.display());
    Ok(())
}
