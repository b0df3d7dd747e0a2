//! Experiment sweeps: grids over (n, p, s, gamma, eta), deterministic
//! per-trial seeding, trial-level parallelism with incremental JSONL output
//! that interrupted runs resume from, and CSV/SVG artifacts.

mod svg;

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{
    apply_noise, fmt_float, sample_clean, ConfigError, ModelKind, ModelSpec, NoiseSpec, Rotation,
};
use crate::diagnostics::{self, mc_risk, DiagError};
use crate::gdflow::{train_gd, GdConfig, GdError, StepSizePolicy};
use crate::linalg;
use crate::rng::mix;
use crate::scalar::Scalar;
use crate::solver::{margin_stats, max_margin, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("unknown preset `{0}`; expected one of fig1, fig2, fig3, fig4")]
    UnknownPreset(String),
    #[error("records file was written by a different sweep config; refusing to mix results")]
    ConfigMismatch,
    #[error("nothing to emit: the result holds no records")]
    EmptyResult,
    #[error("records file is corrupt at line {line}: {detail}")]
    CorruptRecords { line: usize, detail: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("training: {0}")]
    Gd(#[from] GdError),
    #[error("diagnostics: {0}")]
    Diag(#[from] DiagError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// 1 for configuration mistakes, 2 for failures at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Invalid(_)
            | HarnessError::UnknownPreset(_)
            | HarnessError::ConfigMismatch
            | HarnessError::EmptyResult
            | HarnessError::CorruptRecords { .. }
            | HarnessError::Config(_)
            | HarnessError::Json(_) => 1,
            HarnessError::Solver(_)
            | HarnessError::Gd(_)
            | HarnessError::Diag(_)
            | HarnessError::Io(_) => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SweepModel<F> {
    RareWeak,
    BooleanRareWeak,
    /// Gaussian coordinates at common variance sigma^2 around the rare/weak
    /// mean (gamma on the first s coordinates).
    GaussianIso { sigma: F },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFlavor {
    RandomFlip,
    MarginTargetedFlip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SGrid {
    Values { values: Vec<usize> },
    /// s = round(p^beta), one grid entry per exponent.
    PowerRule { betas: Vec<f64> },
}

impl SGrid {
    fn len(&self) -> usize {
        match self {
            SGrid::Values { values } => values.len(),
            SGrid::PowerRule { betas } => betas.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig<F> {
    pub name: String,
    pub model: SweepModel<F>,
    pub rotation: Rotation,
    pub noise: NoiseFlavor,
    pub n_grid: Vec<usize>,
    pub p_grid: Vec<usize>,
    pub s_grid: SGrid,
    pub gamma_grid: Vec<F>,
    pub eta_grid: Vec<F>,
    pub trials: usize,
    pub m_test: usize,
    pub base_seed: u64,
    pub run_gd: bool,
    pub gd_iters: usize,
    pub record_events: bool,
}

impl<F: Scalar> SweepConfig<F> {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Invalid("trials must be at least 1".into()));
        }
        if self.m_test == 0 {
            return Err(HarnessError::Invalid("m_test must be at least 1".into()));
        }
        if self.run_gd && self.gd_iters == 0 {
            return Err(HarnessError::Invalid(
                "gd_iters must be at least 1 when run_gd is set".into(),
            ));
        }
        for (label, empty) in [
            ("n_grid", self.n_grid.is_empty()),
            ("p_grid", self.p_grid.is_empty()),
            ("s_grid", self.s_grid.len() == 0),
            ("gamma_grid", self.gamma_grid.is_empty()),
            ("eta_grid", self.eta_grid.is_empty()),
        ] {
            if empty {
                return Err(HarnessError::Invalid(format!("{label} must be nonempty")));
            }
        }
        if let SGrid::PowerRule { betas } = &self.s_grid {
            for &b in betas {
                if !(b > 0.0 && b <= 1.0) {
                    return Err(HarnessError::Invalid(format!(
                        "power-rule exponent {b} outside (0, 1]"
                    )));
                }
            }
        }
        // Every resolved point must build a valid model and noise spec;
        // failing here beats failing mid-sweep.
        for point in resolve_points(self)? {
            model_spec(&self.model, self.rotation, &point).validate()?;
            noise_spec(self.noise, point.eta).validate()?;
        }
        Ok(())
    }
}

/// One grid point with every symbol fixed. `beta` is kept alongside the
/// resolved s when the point came from a power rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPoint<F> {
    pub grid_id: usize,
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub beta: Option<f64>,
    pub gamma: F,
    pub eta: F,
}

/// Nesting order n -> p -> s -> gamma -> eta defines grid_id; the id is the
/// index into the returned Vec.
pub fn resolve_points<F: Scalar>(
    cfg: &SweepConfig<F>,
) -> Result<Vec<ResolvedPoint<F>>, HarnessError> {
    let mut points = Vec::new();
    for &n in &cfg.n_grid {
        for &p in &cfg.p_grid {
            let entries: Vec<(usize, Option<f64>)> = match &cfg.s_grid {
                SGrid::Values { values } => values.iter().map(|&s| (s, None)).collect(),
                SGrid::PowerRule { betas } => betas
                    .iter()
                    .map(|&b| ((p as f64).powf(b).round() as usize, Some(b)))
                    .collect(),
            };
            for (s, beta) in entries {
                if s > p {
                    return Err(HarnessError::Invalid(format!(
                        "s = {s} exceeds p = {p} at n = {n}"
                    )));
                }
                for &gamma in &cfg.gamma_grid {
                    for &eta in &cfg.eta_grid {
                        points.push(ResolvedPoint {
                            grid_id: points.len(),
                            n,
                            p,
                            s,
                            beta,
                            gamma,
                            eta,
                        });
                    }
                }
            }
        }
    }
    Ok(points)
}

fn model_spec<F: Scalar>(
    model: &SweepModel<F>,
    rotation: Rotation,
    point: &ResolvedPoint<F>,
) -> ModelSpec<F> {
    let kind = match model {
        SweepModel::RareWeak => ModelKind::RareWeak {
            s: point.s,
            gamma: point.gamma,
        },
        SweepModel::BooleanRareWeak => ModelKind::BooleanRareWeak {
            s: point.s,
            gamma: point.gamma,
        },
        SweepModel::GaussianIso { sigma } => {
            let mut mu = vec![F::zero(); point.p];
            for m in mu.iter_mut().take(point.s) {
                *m = point.gamma;
            }
            ModelKind::GaussianCc {
                mu,
                sigma_diag: vec![*sigma; point.p],
            }
        }
    };
    ModelSpec {
        p: point.p,
        kind,
        rotation,
    }
}

fn noise_spec<F: Scalar>(flavor: NoiseFlavor, eta: F) -> NoiseSpec<F> {
    match flavor {
        NoiseFlavor::RandomFlip => NoiseSpec::RandomFlip { eta },
        NoiseFlavor::MarginTargetedFlip => NoiseSpec::MarginTargetedFlip { eta },
    }
}

/// Substream seed for one (grid point, trial) cell.
pub fn trial_seed(base_seed: u64, grid_id: usize, trial: usize) -> u64 {
    mix(mix(base_seed, grid_id as u64), trial as u64)
}

/// Event-check constants used by sweeps when `record_events` is set.
pub const EVENTS_DELTA: f64 = 0.05;
pub const EVENTS_C: f64 = 3.0;
pub const EVENTS_C_PRIME: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSummary<F> {
    pub all_hold: bool,
    pub min_passing_c: F,
}

/// NaN round-trips as JSON null on the measurement fields below.
mod nan_as_null {
    use crate::scalar::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<F: Scalar, S: Serializer>(v: &F, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            ser.serialize_unit()
        } else {
            ser.serialize_f64(v.to_f64().unwrap())
        }
    }

    pub fn deserialize<'de, F: Scalar, D: Deserializer<'de>>(de: D) -> Result<F, D::Error> {
        let opt = Option::<f64>::deserialize(de)?;
        Ok(F::cast(opt.unwrap_or(f64::NAN)))
    }
}

/// Everything measured on one trial. Measurement fields hold NaN when the
/// instance was not solved (not separable, or the solver gave up).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Scalar + Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct TrialRecord<F> {
    pub point: ResolvedPoint<F>,
    pub trial: usize,
    pub seed: u64,
    pub separable: bool,
    #[serde(with = "nan_as_null")]
    pub train_error: F,
    #[serde(with = "nan_as_null")]
    pub test_error: F,
    #[serde(with = "nan_as_null")]
    pub test_ci: F,
    #[serde(with = "nan_as_null")]
    pub min_margin: F,
    #[serde(with = "nan_as_null")]
    pub norm_w: F,
    #[serde(with = "nan_as_null")]
    pub mu_dot_w: F,
    #[serde(with = "nan_as_null")]
    pub margin_ratio: F,
    pub n_noisy: usize,
    pub sup_a_max: Option<F>,
    pub dir_gap: Option<F>,
    pub events: Option<EventSummary<F>>,
    pub wall_ms: f64,
}

/// Test risk and halfwidth for one trained separator. Closed form (ci = 0)
/// for the all-Gaussian family under random flips; Monte Carlo otherwise.
fn measure_risk<F: Scalar>(
    cfg: &SweepConfig<F>,
    spec: &ModelSpec<F>,
    noise: &NoiseSpec<F>,
    w: &[F],
    seed: u64,
) -> Result<(F, F), HarnessError> {
    let analytic = matches!(cfg.model, SweepModel::GaussianIso { .. })
        && matches!(noise, NoiseSpec::RandomFlip { .. });
    if analytic {
        let w_latent: Vec<F> = match spec.rotation.matrix::<F>(spec.p) {
            Some(u) => u.matvec_t(w),
            None => w.to_vec(),
        };
        let risk = diagnostics::analytic_risk_gaussian(
            &w_latent,
            &spec.latent_mu(),
            &spec.latent_variances(),
            noise.eta(),
        )?;
        Ok((risk, F::zero()))
    } else {
        let mc = mc_risk(w, spec, noise, cfg.m_test, seed)?;
        Ok((mc.estimate, mc.ci_halfwidth))
    }
}

/// Generate, corrupt, solve, measure. Deterministic in (config, point,
/// trial); an unsolvable instance is recorded, not an error.
pub fn run_trial<F: Scalar>(
    cfg: &SweepConfig<F>,
    point: &ResolvedPoint<F>,
    trial: usize,
) -> Result<TrialRecord<F>, HarnessError> {
    let t0 = Instant::now();
    let seed = trial_seed(cfg.base_seed, point.grid_id, trial);
    let spec = model_spec(&cfg.model, cfg.rotation, point);
    let noise = noise_spec(cfg.noise, point.eta);
    let clean = sample_clean(&spec, point.n, mix(seed, 1))?;
    let mu = spec.mu();
    let ds = apply_noise(&clean, &noise, &mu, mix(seed, 2))?;

    let nan = F::nan();
    let mut rec = TrialRecord {
        point: point.clone(),
        trial,
        seed,
        separable: false,
        train_error: nan,
        test_error: nan,
        test_ci: nan,
        min_margin: nan,
        norm_w: nan,
        mu_dot_w: nan,
        margin_ratio: nan,
        n_noisy: ds.noisy().len(),
        sup_a_max: None,
        dir_gap: None,
        events: None,
        wall_ms: 0.0,
    };

    match max_margin(&ds, &SolverConfig::default()) {
        Ok(clf) => {
            rec.separable = true;
            let stats = margin_stats(&clf.w, &ds);
            rec.min_margin = stats.min_margin;
            let misses = stats.margins.iter().filter(|&&m| m <= F::zero()).count();
            rec.train_error = F::cast(misses as f64 / point.n as f64);
            rec.norm_w = linalg::norm(&clf.w);
            rec.mu_dot_w = linalg::dot(&mu, &clf.w);
            rec.margin_ratio =
                diagnostics::margin_ratio(&clf.w, &mu, point.p).unwrap_or(nan);
            let (risk, ci) = measure_risk(cfg, &spec, &noise, &clf.w, mix(seed, 3))?;
            rec.test_error = risk;
            rec.test_ci = ci;
            if cfg.run_gd {
                let gd_cfg = GdConfig {
                    policy: StepSizePolicy::SmoothnessBound,
                    max_iters: cfg.gd_iters,
                    log_stride: (cfg.gd_iters / 200).max(1),
                    direction_gap_target: None,
                };
                let (_, trace) = train_gd(&ds, &gd_cfg, Some(&clf.w), Some(&mu))?;
                rec.sup_a_max = Some(trace.sup_loss_ratio);
                rec.dir_gap = trace.rows.last().map(|r| r.direction_gap);
            }
        }
        Err(SolverError::NotSeparable { .. }) | Err(SolverError::NoConvergence { .. }) => {}
        Err(e) => return Err(e.into()),
    }

    if cfg.record_events {
        let report = diagnostics::check_events(
            &ds,
            &mu,
            F::cast(EVENTS_DELTA),
            F::cast(EVENTS_C),
            F::cast(EVENTS_C_PRIME),
            point.eta,
        )?;
        rec.events = Some(EventSummary {
            all_hold: report.all_hold(),
            min_passing_c: report.min_passing_c,
        });
    }

    rec.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(rec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Scalar + Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct PointAggregate<F> {
    pub grid_id: usize,
    pub trials: usize,
    pub separable_count: usize,
    /// Mean/stderr of test error over solved trials; NaN when none solved
    /// (stderr also NaN when only one was).
    #[serde(with = "nan_as_null")]
    pub mean_test_error: F,
    #[serde(with = "nan_as_null")]
    pub stderr_test_error: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Scalar + Serialize",
    deserialize = "F: Scalar + Deserialize<'de>"
))]
pub struct SweepResult<F> {
    pub config: SweepConfig<F>,
    pub points: Vec<ResolvedPoint<F>>,
    /// Sorted by (grid_id, trial).
    pub records: Vec<TrialRecord<F>>,
    pub aggregates: Vec<PointAggregate<F>>,
}

fn aggregate<F: Scalar>(
    points: &[ResolvedPoint<F>],
    records: &[TrialRecord<F>],
) -> Vec<PointAggregate<F>> {
    points
        .iter()
        .map(|point| {
            let mut vals = Vec::new();
            let mut trials = 0;
            for rec in records.iter().filter(|r| r.point.grid_id == point.grid_id) {
                trials += 1;
                if rec.separable {
                    vals.push(rec.test_error);
                }
            }
            let k = vals.len();
            let mean = if k == 0 {
                F::nan()
            } else {
                vals.iter().copied().sum::<F>() / F::cast(k as f64)
            };
            let stderr = if k < 2 {
                F::nan()
            } else {
                let var = vals
                    .iter()
                    .map(|&v| (v - mean) * (v - mean))
                    .sum::<F>()
                    / F::cast((k - 1) as f64);
                (var / F::cast(k as f64)).sqrt()
            };
            PointAggregate {
                grid_id: point.grid_id,
                trials,
                separable_count: k,
                mean_test_error: mean,
                stderr_test_error: stderr,
            }
        })
        .collect()
}

/// Assembles a result from any set of records for `cfg` (partial sets are
/// fine; aggregates cover what is there).
pub fn result_from_records<F: Scalar>(
    cfg: &SweepConfig<F>,
    mut records: Vec<TrialRecord<F>>,
) -> Result<SweepResult<F>, HarnessError> {
    let points = resolve_points(cfg)?;
    for rec in &records {
        if rec.point.grid_id >= points.len() || rec.trial >= cfg.trials {
            return Err(HarnessError::Invalid(format!(
                "record (grid {}, trial {}) is outside the config's grid",
                rec.point.grid_id, rec.trial
            )));
        }
    }
    records.sort_by_key(|r| (r.point.grid_id, r.trial));
    let aggregates = aggregate(&points, &records);
    Ok(SweepResult {
        config: cfg.clone(),
        points,
        records,
        aggregates,
    })
}

#[derive(Serialize, Deserialize)]
struct Echo<F> {
    config: SweepConfig<F>,
}

fn read_records_inner<F: Scalar + Serialize + for<'de> Deserialize<'de>>(
    path: &Path,
) -> Result<(SweepConfig<F>, Vec<TrialRecord<F>>, bool), HarnessError> {
    let text = fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().collect();
    if lines.is_empty() {
        return Err(HarnessError::CorruptRecords {
            line: 1,
            detail: "file is empty".into(),
        });
    }
    let echo: Echo<F> =
        serde_json::from_str(lines[0]).map_err(|e| HarnessError::CorruptRecords {
            line: 1,
            detail: e.to_string(),
        })?;
    let mut records = Vec::new();
    let mut torn = false;
    for (idx, line) in lines.iter().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<TrialRecord<F>>(line) {
            Ok(rec) => records.push(rec),
            Err(_) if idx == lines.len() - 1 => {
                torn = true;
                break;
            }
            Err(e) => {
                return Err(HarnessError::CorruptRecords {
                    line: idx + 1,
                    detail: e.to_string(),
                })
            }
        }
    }
    Ok((echo.config, records, torn))
}

/// Reads a records file: config echo on line 1, one record per line after.
/// A torn final line (interrupted write) is dropped; damage anywhere else
/// is an error.
pub fn read_records_file<F: Scalar + Serialize + for<'de> Deserialize<'de>>(
    path: &Path,
) -> Result<(SweepConfig<F>, Vec<TrialRecord<F>>), HarnessError> {
    let (cfg, records, _) = read_records_inner(path)?;
    Ok((cfg, records))
}

/// MML_THREADS, when set to a positive integer; anything else means "let
/// the pool decide".
pub fn effective_threads() -> Option<usize> {
    std::env::var("MML_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&k| k >= 1)
}

pub fn run_sweep<F: Scalar + Serialize + for<'de> Deserialize<'de>>(
    cfg: &SweepConfig<F>,
    records_path: Option<&Path>,
) -> Result<SweepResult<F>, HarnessError> {
    run_sweep_with(cfg, records_path, effective_threads())
}

/// Runs every (point, trial) cell not already present in the records file,
/// appending each finished record immediately. The result is identical for
/// any thread count and any resume boundary; only wall_ms varies.
pub fn run_sweep_with<F: Scalar + Serialize + for<'de> Deserialize<'de>>(
    cfg: &SweepConfig<F>,
    records_path: Option<&Path>,
    threads: Option<usize>,
) -> Result<SweepResult<F>, HarnessError> {
    cfg.validate()?;
    let points = resolve_points(cfg)?;

    let mut done: HashMap<(usize, usize), TrialRecord<F>> = HashMap::new();
    let mut writer: Option<fs::File> = None;
    if let Some(path) = records_path {
        if path.exists() {
            let (echo, records, torn) = read_records_inner::<F>(path)?;
            if echo != *cfg {
                return Err(HarnessError::ConfigMismatch);
            }
            if torn {
                // Rewrite the valid prefix so appends don't land after the
                // garbage tail.
                let mut f = fs::File::create(path)?;
                writeln!(f, "{}", serde_json::to_string(&Echo { config: cfg.clone() })?)?;
                for rec in &records {
                    writeln!(f, "{}", serde_json::to_string(rec)?)?;
                }
                f.flush()?;
                writer = Some(f);
            } else {
                writer = Some(fs::OpenOptions::new().append(true).open(path)?);
            }
            for rec in records {
                done.entry((rec.point.grid_id, rec.trial)).or_insert(rec);
            }
        } else {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)?;
                }
            }
            let mut f = fs::File::create(path)?;
            let echo = Echo { config: cfg.clone() };
            writeln!(f, "{}", serde_json::to_string(&echo)?)?;
            f.flush()?;
            writer = Some(f);
        }
    }

    let todo: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|g| (0..cfg.trials).map(move |t| (g, t)))
        .filter(|key| !done.contains_key(key))
        .collect();

    let fresh: Mutex<Vec<TrialRecord<F>>> = Mutex::new(Vec::with_capacity(todo.len()));
    let sink: Mutex<Option<fs::File>> = Mutex::new(writer);
    if !todo.is_empty() {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.unwrap_or(0))
            .build()
            .map_err(|e| HarnessError::Invalid(format!("thread pool: {e}")))?;
        pool.install(|| {
            todo.par_iter().try_for_each(|&(g, t)| {
                let rec = run_trial(cfg, &points[g], t)?;
                // One line per record, flushed at once, so a kill leaves at
                // most one torn line at the tail.
                let line = serde_json::to_string(&rec)?;
                let mut guard = sink.lock().unwrap();
                if let Some(f) = guard.as_mut() {
                    writeln!(f, "{line}")?;
                    f.flush()?;
                }
                drop(guard);
                fresh.lock().unwrap().push(rec);
                Ok::<(), HarnessError>(())
            })
        })?;
    }

    let mut records: Vec<TrialRecord<F>> = done.into_values().collect();
    records.extend(fresh.into_inner().unwrap());
    let expected = points.len() * cfg.trials;
    if records.len() != expected {
        return Err(HarnessError::Invalid(format!(
            "sweep finished with {} records, expected {expected}",
            records.len()
        )));
    }
    result_from_records(cfg, records)
}

/// 16 log-spaced dimensions from 100 to 3000.
pub fn log_p_grid() -> Vec<usize> {
    (0..16)
        .map(|i| (100.0 * 30f64.powf(i as f64 / 15.0)).round() as usize)
        .collect()
}

/// Canned experiment configs. Desk-scale default of 100 trials per point;
/// raise to 500 to reproduce the reference curves exactly.
pub fn preset(name: &str) -> Result<SweepConfig<f64>, HarnessError> {
    let base = SweepConfig {
        name: name.to_string(),
        model: SweepModel::BooleanRareWeak,
        rotation: Rotation::Identity,
        noise: NoiseFlavor::RandomFlip,
        n_grid: vec![100],
        p_grid: log_p_grid(),
        s_grid: SGrid::Values { values: vec![] },
        gamma_grid: vec![],
        eta_grid: vec![],
        trials: 100,
        m_test: 10_000,
        base_seed: 0,
        run_gd: false,
        gd_iters: 2_000,
        record_events: false,
    };
    Ok(match name {
        "fig1" => SweepConfig {
            s_grid: SGrid::Values { values: vec![100] },
            gamma_grid: vec![0.2],
            eta_grid: vec![0.05],
            base_seed: 1,
            ..base
        },
        "fig2" => SweepConfig {
            s_grid: SGrid::Values { values: vec![50] },
            gamma_grid: vec![0.1, 0.2, 0.3],
            eta_grid: vec![0.1],
            base_seed: 2,
            ..base
        },
        "fig3" => SweepConfig {
            p_grid: vec![500],
            s_grid: SGrid::Values {
                values: (2..=10).map(|k| k * 50).collect(),
            },
            gamma_grid: vec![0.1, 0.2, 0.3],
            eta_grid: vec![0.1],
            base_seed: 3,
            ..base
        },
        "fig4" => SweepConfig {
            s_grid: SGrid::PowerRule {
                betas: vec![0.5, 0.55, 0.65],
            },
            gamma_grid: vec![0.1],
            eta_grid: vec![0.1],
            base_seed: 4,
            ..base
        },
        other => return Err(HarnessError::UnknownPreset(other.to_string())),
    })
}

pub const CSV_HEADER: &str = "grid_id,p,s,gamma,eta,n,trial,seed,separable,train_err,test_err,\
test_ci,norm_w,mu_dot_w,margin_ratio,n_noisy,sup_Amax,dir_gap,wall_ms";

fn opt_float<F: Scalar>(v: Option<F>) -> String {
    match v {
        Some(x) => fmt_float(x),
        None => "NaN".to_string(),
    }
}

pub fn write_csv<F: Scalar, W: Write>(
    result: &SweepResult<F>,
    out: &mut W,
) -> Result<(), HarnessError> {
    if result.records.is_empty() {
        return Err(HarnessError::EmptyResult);
    }
    writeln!(out, "{CSV_HEADER}")?;
    for r in &result.records {
        let p = &r.point;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}",
            p.grid_id,
            p.p,
            p.s,
            fmt_float(p.gamma),
            fmt_float(p.eta),
            p.n,
            r.trial,
            r.seed,
            r.separable,
            fmt_float(r.train_error),
            fmt_float(r.test_error),
            fmt_float(r.test_ci),
            fmt_float(r.norm_w),
            fmt_float(r.mu_dot_w),
            fmt_float(r.margin_ratio),
            r.n_noisy,
            opt_float(r.sup_a_max),
            opt_float(r.dir_gap),
            r.wall_ms,
        )?;
    }
    Ok(())
}

pub fn emit_csv<F: Scalar>(result: &SweepResult<F>, path: &Path) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Mean test error against the swept axis as a standalone SVG, one curve
/// per remaining grid dimension, with a dashed noise-level reference line.
pub fn emit_plot<F: Scalar>(result: &SweepResult<F>, path: &Path) -> Result<(), HarnessError> {
    let doc = svg::render(result)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, doc)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn tiny_config() -> SweepConfig<f64> {
        SweepConfig {
            name: "tiny".into(),
            model: SweepModel::BooleanRareWeak,
            rotation: Rotation::Identity,
            noise: NoiseFlavor::RandomFlip,
            n_grid: vec![20],
            p_grid: vec![60],
            s_grid: SGrid::Values { values: vec![10] },
            gamma_grid: vec![0.3],
            eta_grid: vec![0.1],
            trials: 6,
            m_test: 1_000,
            base_seed: 11,
            run_gd: true,
            gd_iters: 200,
            record_events: true,
        }
    }

    fn zero_wall(mut r: TrialRecord<f64>) -> TrialRecord<f64> {
        r.wall_ms = 0.0;
        r
    }

    fn canonical_lines(result: &SweepResult<f64>) -> Vec<String> {
        result
            .records
            .iter()
            .map(|r| serde_json::to_string(&zero_wall(r.clone())).unwrap())
            .collect()
    }

    #[test]
    fn log_p_grid_spans_the_documented_range() {
        let g = log_p_grid();
        assert_eq!(g.len(), 16);
        assert_eq!(g[0], 100);
        assert_eq!(g[15], 3000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn presets_pin_the_documented_grids() {
        let f1 = preset("fig1").unwrap();
        assert_eq!(f1.gamma_grid, vec![0.2]);
        assert_eq!(f1.eta_grid, vec![0.05]);
        assert_eq!(f1.s_grid, SGrid::Values { values: vec![100] });
        assert_eq!(f1.n_grid, vec![100]);
        assert_eq!(f1.p_grid, log_p_grid());
        assert_eq!(f1.trials, 100);
        assert_eq!(f1.m_test, 10_000);
        assert!(matches!(f1.model, SweepModel::BooleanRareWeak));

        let f2 = preset("fig2").unwrap();
        assert_eq!(f2.s_grid, SGrid::Values { values: vec![50] });
        assert_eq!(f2.gamma_grid, vec![0.1, 0.2, 0.3]);
        assert_eq!(f2.eta_grid, vec![0.1]);

        let f3 = preset("fig3").unwrap();
        assert_eq!(f3.p_grid, vec![500]);
        assert_eq!(
            f3.s_grid,
            SGrid::Values {
                values: vec![100, 150, 200, 250, 300, 350, 400, 450, 500]
            }
        );
        assert_eq!(f3.gamma_grid, vec![0.1, 0.2, 0.3]);

        let f4 = preset("fig4").unwrap();
        assert_eq!(
            f4.s_grid,
            SGrid::PowerRule {
                betas: vec![0.5, 0.55, 0.65]
            }
        );
        assert_eq!(f4.gamma_grid, vec![0.1]);
        assert_eq!(f4.eta_grid, vec![0.1]);

        assert!(matches!(
            preset("fig9"),
            Err(HarnessError::UnknownPreset(_))
        ));
    }

    #[test]
    fn resolution_nests_grids_and_rejects_s_above_p() {
        let mut cfg = tiny_config();
        cfg.p_grid = vec![20, 40];
        cfg.s_grid = SGrid::Values { values: vec![5, 10] };
        cfg.gamma_grid = vec![0.1, 0.2];
        let pts = resolve_points(&cfg).unwrap();
        assert_eq!(pts.len(), 8);
        assert!(pts.iter().enumerate().all(|(i, p)| p.grid_id == i));
        // eta innermost, then gamma, then s, then p.
        assert_eq!((pts[0].p, pts[0].s, pts[0].gamma), (20, 5, 0.1));
        assert_eq!((pts[1].p, pts[1].s, pts[1].gamma), (20, 5, 0.2));
        assert_eq!((pts[2].p, pts[2].s, pts[2].gamma), (20, 10, 0.1));
        assert_eq!((pts[4].p, pts[4].s, pts[4].gamma), (40, 5, 0.1));

        cfg.s_grid = SGrid::Values { values: vec![30] };
        assert!(matches!(
            resolve_points(&cfg),
            Err(HarnessError::Invalid(_))
        ));

        cfg.s_grid = SGrid::PowerRule { betas: vec![0.5] };
        let pts = resolve_points(&cfg).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[0].s, 4); // round(20^0.5)
        assert_eq!(pts[0].beta, Some(0.5));
        assert_eq!(pts[2].s, 6); // round(40^0.5)
    }

    #[test]
    fn config_validation_rejects_bad_grids() {
        let mut cfg = tiny_config();
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(HarnessError::Invalid(_))));
        let mut cfg = tiny_config();
        cfg.gamma_grid = vec![];
        assert!(matches!(cfg.validate(), Err(HarnessError::Invalid(_))));
        let mut cfg = tiny_config();
        cfg.gamma_grid = vec![0.6]; // outside [0, 1/2) for the Boolean model
        assert!(matches!(cfg.validate(), Err(HarnessError::Config(_))));
        let mut cfg = tiny_config();
        cfg.s_grid = SGrid::PowerRule { betas: vec![1.5] };
        assert!(matches!(cfg.validate(), Err(HarnessError::Invalid(_))));
        assert!(tiny_config().validate().is_ok());
    }

    #[test]
    fn single_point_single_trial_yields_one_record() {
        let cfg = SweepConfig {
            trials: 1,
            run_gd: false,
            record_events: false,
            ..tiny_config()
        };
        let result = run_sweep_with(&cfg, None, Some(1)).unwrap();
        assert_eq!(result.records.len(), 1);
        assert_eq!(result.aggregates.len(), 1);
        let rec = &result.records[0];
        assert!(rec.separable);
        assert_eq!(rec.train_error, 0.0);
        assert!(rec.test_error.is_finite());
        assert!(rec.test_ci > 0.0);
        assert_eq!(result.aggregates[0].separable_count, 1);
        assert_eq!(result.aggregates[0].mean_test_error, rec.test_error);
        assert!(result.aggregates[0].stderr_test_error.is_nan());
    }

    #[test]
    fn records_are_identical_across_thread_counts() {
        let cfg = tiny_config();
        let a = run_sweep_with(&cfg, None, Some(1)).unwrap();
        let b = run_sweep_with(&cfg, None, Some(4)).unwrap();
        assert_eq!(canonical_lines(&a), canonical_lines(&b));
        assert_eq!(a.aggregates, b.aggregates);
    }

    #[test]
    fn every_separable_record_interpolates() {
        let cfg = tiny_config();
        let result = run_sweep_with(&cfg, None, Some(2)).unwrap();
        assert!(result.records.iter().any(|r| r.separable));
        for rec in &result.records {
            if rec.separable {
                assert_eq!(rec.train_error, 0.0);
                assert!(rec.min_margin > 0.9, "margin {}", rec.min_margin);
                assert!(rec.sup_a_max.is_some());
                assert!(rec.events.is_some());
            }
        }
    }

    #[test]
    fn resume_reproduces_the_uninterrupted_result() {
        let dir = tempdir().unwrap();
        let full_path = dir.path().join("full.jsonl");
        let cfg = tiny_config();
        let full = run_sweep_with(&cfg, Some(&full_path), Some(2)).unwrap();

        // Cut the file after 3 records and add a torn line, as if killed
        // mid-write.
        let text = fs::read_to_string(&full_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + cfg.trials);
        let cut_path = dir.path().join("cut.jsonl");
        let mut cut = lines[..4].join("\n");
        cut.push_str("\n{\"point\":{\"grid_id\":0,\"n\":20");
        fs::write(&cut_path, cut).unwrap();

        let resumed = run_sweep_with(&cfg, Some(&cut_path), Some(2)).unwrap();
        assert_eq!(canonical_lines(&full), canonical_lines(&resumed));

        // A completed file is reused as-is: no new work, same result.
        let again = run_sweep_with(&cfg, Some(&full_path), Some(2)).unwrap();
        assert_eq!(canonical_lines(&full), canonical_lines(&again));
        assert_eq!(
            fs::read_to_string(&full_path).unwrap(),
            text,
            "a complete records file must not change on rerun"
        );
    }

    #[test]
    fn resume_refuses_a_different_config() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let cfg = tiny_config();
        run_sweep_with(&cfg, Some(&path), Some(2)).unwrap();
        let other = SweepConfig {
            base_seed: 99,
            ..cfg
        };
        assert!(matches!(
            run_sweep_with(&other, Some(&path), Some(2)),
            Err(HarnessError::ConfigMismatch)
        ));
    }

    #[test]
    fn csv_is_pinned_and_refuses_empty_results() {
        let cfg = SweepConfig {
            trials: 2,
            ..tiny_config()
        };
        let result = run_sweep_with(&cfg, None, Some(1)).unwrap();
        let mut buf = Vec::new();
        write_csv(&result, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + result.records.len());
        assert!(lines[1].starts_with("0,60,10,"));

        let empty = SweepResult {
            records: vec![],
            ..result
        };
        let mut buf = Vec::new();
        assert!(matches!(
            write_csv(&empty, &mut buf),
            Err(HarnessError::EmptyResult)
        ));
        assert!(buf.is_empty());
    }

    #[test]
    fn mean_test_error_decreases_in_gamma_at_fixed_p() {
        let cfg = SweepConfig {
            name: "gamma-order".into(),
            n_grid: vec![100],
            p_grid: vec![500],
            s_grid: SGrid::Values { values: vec![50] },
            gamma_grid: vec![0.1, 0.3],
            eta_grid: vec![0.1],
            trials: 30,
            m_test: 2_000,
            base_seed: 7,
            run_gd: false,
            record_events: false,
            ..tiny_config()
        };
        let result = run_sweep_with(&cfg, None, None).unwrap();
        assert_eq!(result.aggregates.len(), 2);
        let weak = result.aggregates[0].mean_test_error;
        let strong = result.aggregates[1].mean_test_error;
        assert!(
            strong < weak,
            "stronger signal should test better: gamma=0.3 gives {strong}, gamma=0.1 gives {weak}"
        );
    }

    #[test]
    fn test_error_is_stable_across_test_seeds() {
        // Same trained separator, two independent test sets: the estimates
        // agree within their summed halfwidths.
        let cfg = SweepConfig {
            name: "two-seed".into(),
            p_grid: vec![1000],
            s_grid: SGrid::Values { values: vec![100] },
            n_grid: vec![100],
            gamma_grid: vec![0.2],
            eta_grid: vec![0.05],
            m_test: 10_000,
            ..tiny_config()
        };
        let points = resolve_points(&cfg).unwrap();
        let point = &points[0];
        let seed = trial_seed(cfg.base_seed, 0, 0);
        let spec = model_spec(&cfg.model, cfg.rotation, point);
        let noise = noise_spec(cfg.noise, point.eta);
        let clean = sample_clean(&spec, point.n, mix(seed, 1)).unwrap();
        let ds = apply_noise(&clean, &noise, &spec.mu(), mix(seed, 2)).unwrap();
        let clf = max_margin(&ds, &SolverConfig::default()).unwrap();
        let (e1, c1) = measure_risk(&cfg, &spec, &noise, &clf.w, 1001).unwrap();
        let (e2, c2) = measure_risk(&cfg, &spec, &noise, &clf.w, 2002).unwrap();
        assert!(
            (e1 - e2).abs() <= c1 + c2,
            "estimates {e1} and {e2} with halfwidths {c1} and {c2}"
        );
    }

    #[test]
    fn analytic_risk_is_used_for_the_gaussian_family() {
        let cfg = SweepConfig {
            name: "iso".into(),
            model: SweepModel::GaussianIso { sigma: 1.0 },
            s_grid: SGrid::Values { values: vec![10] },
            gamma_grid: vec![1.0],
            trials: 2,
            run_gd: false,
            record_events: false,
            ..tiny_config()
        };
        let result = run_sweep_with(&cfg, None, Some(1)).unwrap();
        for rec in &result.records {
            assert!(rec.separable);
            assert_eq!(rec.test_ci, 0.0);
            assert!(rec.test_error > 0.0 && rec.test_error < 0.5);
        }
    }

    #[test]
    fn svg_plot_is_deterministic_with_reference_line_and_series() {
        let cfg = SweepConfig {
            name: "plot".into(),
            p_grid: vec![40, 80],
            gamma_grid: vec![0.2, 0.4],
            trials: 2,
            m_test: 500,
            run_gd: false,
            record_events: false,
            ..tiny_config()
        };
        let result = run_sweep_with(&cfg, None, Some(2)).unwrap();
        let a = svg::render(&result).unwrap();
        let b = svg::render(&result).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<?xml"));
        assert_eq!(a.matches("<polyline").count(), 2, "one polyline per gamma");
        assert!(a.contains("stroke-dasharray"), "noise reference line");
        assert!(a.contains("olive"));
        assert!(a.contains("η = 0.1"));

        let empty = SweepResult {
            records: vec![],
            ..result
        };
        assert!(matches!(
            svg::render(&empty),
            Err(HarnessError::EmptyResult)
        ));
    }
}
