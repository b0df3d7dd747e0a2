//! Synthetic binary classification data: a clean label, a latent
//! sub-Gaussian attribute vector pushed through an optional rotation, and a
//! mean shift along the clean label. Label noise is applied afterwards as a
//! separate, seeded step so the clean labels stay available for diagnostics.
//!
//! Sampling is deterministic given (spec, n, seed): row k draws from its own
//! generator keyed by (seed, k), so growing n extends a dataset without
//! reshuffling earlier rows, and parallel callers can reproduce any row in
//! isolation.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write as IoWrite};
use std::path::Path;

use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::rng::{stream_rng, CoinPool};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("invalid noise spec: {0}")]
    InvalidNoise(String),
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Basis the latent attributes are expressed in. `SeededOrthogonal` applies
/// the orthogonal factor of a seeded Gaussian matrix (positive-diagonal
/// Gram-Schmidt, so the draw is Haar and reproducible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Rotation {
    Identity,
    SeededOrthogonal { seed: u64 },
}

impl Rotation {
    pub fn matrix<F: Scalar>(&self, p: usize) -> Option<Matrix<F>> {
        match *self {
            Rotation::Identity => None,
            Rotation::SeededOrthogonal { seed } => Some(rotation_matrix(p, seed)),
        }
    }
}

/// Orthogonal factor of a `p x p` matrix of seeded standard normals.
pub fn rotation_matrix<F: Scalar>(p: usize, seed: u64) -> Matrix<F> {
    let mut rng = stream_rng(seed, 0);
    let data: Vec<F> = (0..p * p)
        .map(|_| F::cast(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let mut m = Matrix::from_vec(p, p, data);
    linalg::orthonormalize_rows(&mut m);
    m
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelKind<F> {
    /// Class-conditional Gaussian: latent coordinate j is N(0, sigma_diag[j]),
    /// shifted by the clean label times `mu`.
    GaussianCc { mu: Vec<F>, sigma_diag: Vec<F> },
    /// Identity-covariance Gaussian whose mean is `gamma` on the first `s`
    /// coordinates and zero elsewhere.
    RareWeak { s: usize, gamma: F },
    /// All-±1 attributes; the first `s` coordinates equal the clean label
    /// with probability 1/2 + gamma, the rest are fair coins.
    BooleanRareWeak { s: usize, gamma: F },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec<F> {
    pub p: usize,
    pub kind: ModelKind<F>,
    pub rotation: Rotation,
}

impl<F: Scalar> ModelSpec<F> {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |m: String| Err(ConfigError::InvalidSpec(m));
        if self.p == 0 {
            return err("p must be at least 1".into());
        }
        match &self.kind {
            ModelKind::GaussianCc { mu, sigma_diag } => {
                if mu.len() != self.p {
                    return err(format!("mu has length {}, expected p = {}", mu.len(), self.p));
                }
                if sigma_diag.len() != self.p {
                    return err(format!(
                        "sigma_diag has length {}, expected p = {}",
                        sigma_diag.len(),
                        self.p
                    ));
                }
                if !mu.iter().all(|v| v.is_finite()) {
                    return err("mu must be finite".into());
                }
                if !sigma_diag.iter().all(|&s| s > F::zero() && s <= F::one()) {
                    return err("sigma_diag entries must lie in (0, 1]".into());
                }
            }
            ModelKind::RareWeak { s, gamma } => {
                if *s > self.p {
                    return err(format!("s = {s} exceeds p = {}", self.p));
                }
                if !(*gamma >= F::zero() && gamma.is_finite()) {
                    return err("gamma must be finite and nonnegative".into());
                }
            }
            ModelKind::BooleanRareWeak { s, gamma } => {
                if *s > self.p {
                    return err(format!("s = {s} exceeds p = {}", self.p));
                }
                if !(*gamma >= F::zero() && *gamma < F::cast(0.5)) {
                    return err("gamma must lie in [0, 1/2) for ±1 attributes".into());
                }
            }
        }
        Ok(())
    }

    /// Class mean in the latent (unrotated) basis.
    pub fn latent_mu(&self) -> Vec<F> {
        let mut mu = vec![F::zero(); self.p];
        match &self.kind {
            ModelKind::GaussianCc { mu: m, .. } => mu.copy_from_slice(m),
            ModelKind::RareWeak { s, gamma } => {
                for v in mu.iter_mut().take(*s) {
                    *v = *gamma;
                }
            }
            ModelKind::BooleanRareWeak { s, gamma } => {
                // E[x_j | y] = y((1/2+gamma) - (1/2-gamma)) = 2*gamma*y.
                for v in mu.iter_mut().take(*s) {
                    *v = F::cast(2.0) * *gamma;
                }
            }
        }
        mu
    }

    /// Class mean in the sampled basis (rotation applied).
    pub fn mu(&self) -> Vec<F> {
        let latent = self.latent_mu();
        match self.rotation.matrix::<F>(self.p) {
            None => latent,
            Some(u) => u.matvec(&latent),
        }
    }

    /// ||mu||^2; rotation-invariant, so computed in the latent basis.
    pub fn mu_norm_sq(&self) -> F {
        linalg::norm_sq(&self.latent_mu())
    }

    /// E||q||^2 of the centered latent vector.
    pub fn latent_second_moment(&self) -> F {
        match &self.kind {
            ModelKind::GaussianCc { sigma_diag, .. } => sigma_diag.iter().copied().sum(),
            ModelKind::RareWeak { .. } => F::cast(self.p as f64),
            ModelKind::BooleanRareWeak { s, gamma } => {
                // Relevant coordinates have variance 1 - 4*gamma^2, the rest 1.
                let four_g_sq = F::cast(4.0) * *gamma * *gamma;
                F::cast(self.p as f64) - F::cast(*s as f64) * four_g_sq
            }
        }
    }

    /// Per-coordinate variance of the centered latent vector.
    pub fn latent_variances(&self) -> Vec<F> {
        match &self.kind {
            ModelKind::GaussianCc { sigma_diag, .. } => sigma_diag.clone(),
            ModelKind::RareWeak { .. } => vec![F::one(); self.p],
            ModelKind::BooleanRareWeak { s, gamma } => {
                let four_g_sq = F::cast(4.0) * *gamma * *gamma;
                let mut v = vec![F::one(); self.p];
                for vi in v.iter_mut().take(*s) {
                    *vi = F::one() - four_g_sq;
                }
                v
            }
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self.kind {
            ModelKind::GaussianCc { .. } => "gaussian_cc",
            ModelKind::RareWeak { .. } => "rare_weak",
            ModelKind::BooleanRareWeak { .. } => "boolean_rare_weak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec<F> {
    None,
    /// Each label flips independently with probability eta.
    RandomFlip { eta: F },
    /// Flips exactly floor(eta * n) labels, chosen as the examples with the
    /// largest mu . z_k, concentrating the corruption where it hurts most.
    MarginTargetedFlip { eta: F },
}

impl<F: Scalar> NoiseSpec<F> {
    pub fn eta(&self) -> F {
        match *self {
            NoiseSpec::None => F::zero(),
            NoiseSpec::RandomFlip { eta } | NoiseSpec::MarginTargetedFlip { eta } => eta,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let eta = self.eta();
        if eta >= F::zero() && eta < F::cast(0.5) {
            Ok(())
        } else {
            Err(ConfigError::InvalidNoise(format!(
                "eta must lie in [0, 1/2), got {eta}"
            )))
        }
    }
}

/// Labeled design matrix with both label channels. `noisy` is always the
/// sorted set of indices where the two channels disagree; constructors
/// maintain that invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    x: Matrix<F>,
    y: Vec<i8>,
    y_tilde: Vec<i8>,
    noisy: Vec<usize>,
}

impl<F: Scalar> Dataset<F> {
    pub fn from_parts(x: Matrix<F>, y: Vec<i8>, y_tilde: Vec<i8>) -> Result<Self, ConfigError> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(ConfigError::InvalidData("empty design matrix".into()));
        }
        if y.len() != x.rows() || y_tilde.len() != x.rows() {
            return Err(ConfigError::InvalidData(format!(
                "label lengths ({}, {}) do not match n = {}",
                y.len(),
                y_tilde.len(),
                x.rows()
            )));
        }
        if !y.iter().chain(&y_tilde).all(|&v| v == 1 || v == -1) {
            return Err(ConfigError::InvalidData("labels must be +1 or -1".into()));
        }
        if !x.data().iter().all(|v| v.is_finite()) {
            return Err(ConfigError::InvalidData(
                "design matrix entries must be finite".into(),
            ));
        }
        let noisy = y
            .iter()
            .zip(&y_tilde)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(k, _)| k)
            .collect();
        Ok(Dataset { x, y, y_tilde, noisy })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn p(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Matrix<F> {
        &self.x
    }

    pub fn x_row(&self, k: usize) -> &[F] {
        self.x.row(k)
    }

    pub fn y(&self) -> &[i8] {
        &self.y
    }

    pub fn y_tilde(&self) -> &[i8] {
        &self.y_tilde
    }

    /// Indices where y != y_tilde, ascending.
    pub fn noisy(&self) -> &[usize] {
        &self.noisy
    }

    pub fn label(&self, k: usize) -> F {
        F::cast(self.y[k] as f64)
    }

    /// y_k * x_k as an owned vector.
    pub fn z_row(&self, k: usize) -> Vec<F> {
        let yk = self.label(k);
        self.x.row(k).iter().map(|&v| yk * v).collect()
    }

    /// Margin y_k (w . x_k).
    pub fn margin(&self, w: &[F], k: usize) -> F {
        self.label(k) * linalg::dot(w, self.x.row(k))
    }
}

/// Streams latent-basis clean samples one row at a time. Shared by dataset
/// sampling and Monte Carlo risk evaluation so both see the same process.
pub(crate) struct LatentRowGen {
    kind: RowKind,
}

enum RowKind {
    Gaussian { sqrt_sigma: Vec<f64>, mu: Vec<f64> },
    RareWeak { s: usize, gamma: f64 },
    Boolean { s: usize, p_align: f64 },
}

impl LatentRowGen {
    pub(crate) fn new<F: Scalar>(spec: &ModelSpec<F>) -> Self {
        let kind = match &spec.kind {
            ModelKind::GaussianCc { mu, sigma_diag } => RowKind::Gaussian {
                sqrt_sigma: sigma_diag
                    .iter()
                    .map(|s| s.to_f64().unwrap().sqrt())
                    .collect(),
                mu: mu.iter().map(|v| v.to_f64().unwrap()).collect(),
            },
            ModelKind::RareWeak { s, gamma } => RowKind::RareWeak {
                s: *s,
                gamma: gamma.to_f64().unwrap(),
            },
            ModelKind::BooleanRareWeak { s, gamma } => RowKind::Boolean {
                s: *s,
                p_align: 0.5 + gamma.to_f64().unwrap(),
            },
        };
        LatentRowGen { kind }
    }

    /// Fills `out` with one clean latent-basis sample and returns its label.
    /// Draw order (label bit, then coordinates in index order) is part of the
    /// determinism contract.
    pub(crate) fn fill<F: Scalar>(&self, rng: &mut ChaCha8Rng, out: &mut [F]) -> i8 {
        let y_tilde: i8 = if rng.next_u64() & 1 == 1 { 1 } else { -1 };
        let y = y_tilde as f64;
        match &self.kind {
            RowKind::Gaussian { sqrt_sigma, mu } => {
                for (j, o) in out.iter_mut().enumerate() {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = F::cast(sqrt_sigma[j] * g + y * mu[j]);
                }
            }
            RowKind::RareWeak { s, gamma } => {
                for (j, o) in out.iter_mut().enumerate() {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = F::cast(if j < *s { g + y * gamma } else { g });
                }
            }
            RowKind::Boolean { s, p_align } => {
                let mut pool = CoinPool::new();
                for (j, o) in out.iter_mut().enumerate() {
                    let v = if j < *s {
                        let aligned = rng.random::<f64>() < *p_align;
                        if aligned { y } else { -y }
                    } else if pool.flip(rng) {
                        1.0
                    } else {
                        -1.0
                    };
                    *o = F::cast(v);
                }
            }
        }
        y_tilde
    }
}

/// Draws n clean samples (y = y_tilde). Row k comes from the substream
/// (seed, k); the optional rotation is applied rowwise afterwards, so a
/// rotated dataset is exactly the rotation of the identity-basis dataset
/// drawn with the same seed.
pub fn sample_clean<F: Scalar>(
    spec: &ModelSpec<F>,
    n: usize,
    seed: u64,
) -> Result<Dataset<F>, ConfigError> {
    spec.validate()?;
    if n == 0 {
        return Err(ConfigError::InvalidData("n must be at least 1".into()));
    }
    let gen = LatentRowGen::new(spec);
    let p = spec.p;
    let mut x = Matrix::zeros(n, p);
    let mut labels = Vec::with_capacity(n);
    for k in 0..n {
        let mut rng = stream_rng(seed, k as u64);
        labels.push(gen.fill(&mut rng, x.row_mut(k)));
    }
    if let Some(u) = spec.rotation.matrix::<F>(p) {
        let mut rotated = Matrix::zeros(n, p);
        for k in 0..n {
            let out = u.matvec(x.row(k));
            rotated.row_mut(k).copy_from_slice(&out);
        }
        x = rotated;
    }
    Dataset::from_parts(x, labels.clone(), labels)
}

/// Corrupts the labels of a clean dataset. `mu` (the model mean in the
/// dataset's basis) is consulted only by `MarginTargetedFlip`; pass the
/// output of [`ModelSpec::mu`] or an empty slice for the other kinds.
pub fn apply_noise<F: Scalar>(
    clean: &Dataset<F>,
    noise: &NoiseSpec<F>,
    mu: &[F],
    seed: u64,
) -> Result<Dataset<F>, ConfigError> {
    noise.validate()?;
    if !clean.noisy().is_empty() {
        return Err(ConfigError::InvalidData(
            "apply_noise expects a clean dataset (y == y_tilde)".into(),
        ));
    }
    let n = clean.n();
    let mut y = clean.y_tilde().to_vec();
    match noise {
        NoiseSpec::None => {}
        NoiseSpec::RandomFlip { eta } => {
            let eta = eta.to_f64().unwrap();
            let mut rng = stream_rng(seed, 0);
            for yk in y.iter_mut() {
                if rng.random::<f64>() < eta {
                    *yk = -*yk;
                }
            }
        }
        NoiseSpec::MarginTargetedFlip { eta } => {
            if mu.len() != clean.p() {
                return Err(ConfigError::InvalidData(format!(
                    "mu has length {}, expected p = {}",
                    mu.len(),
                    clean.p()
                )));
            }
            let count = floor_count(eta.to_f64().unwrap(), n);
            let scores: Vec<F> = (0..n)
                .map(|k| clean.label(k) * linalg::dot(mu, clean.x_row(k)))
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                scores[b]
                    .partial_cmp(&scores[a])
                    .unwrap()
                    .then_with(|| a.cmp(&b))
            });
            for &k in order.iter().take(count) {
                y[k] = -y[k];
            }
        }
    }
    Dataset::from_parts(clean.x.clone(), y, clean.y_tilde.clone())
}

/// floor(eta * n) computed with a relative nudge so exact products like
/// 0.3 * 10 do not land just under the integer.
pub(crate) fn floor_count(eta: f64, n: usize) -> usize {
    let t = eta * n as f64;
    (t + 1e-9 * t.max(1.0)).floor() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck<F> {
    pub holds: bool,
    pub lhs: F,
    pub rhs: F,
}

/// One entry per regime condition; `lhs`/`rhs` are the two sides of the
/// inequality as evaluated, so reports stay useful when a condition fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport<F> {
    /// 0 <= delta < 1/C.
    pub failure_probability: AssumptionCheck<F>,
    /// n >= C log(1/delta).
    pub sample_size: AssumptionCheck<F>,
    /// p >= C max(||mu||^2 n, n^2 log(n/delta)).
    pub overparameterization: AssumptionCheck<F>,
    /// ||mu||^2 >= C log(n/delta).
    pub signal_strength: AssumptionCheck<F>,
    /// eta <= 1/C.
    pub noise_level: AssumptionCheck<F>,
    /// E||q||^2 >= kappa p.
    pub latent_energy: AssumptionCheck<F>,
}

impl<F: Scalar> AssumptionReport<F> {
    pub fn all_hold(&self) -> bool {
        self.failure_probability.holds
            && self.sample_size.holds
            && self.overparameterization.holds
            && self.signal_strength.holds
            && self.noise_level.holds
            && self.latent_energy.holds
    }
}

/// Evaluates the working-regime inequalities at a concrete constant `big_c`
/// and latent-energy floor `kappa`. Equality counts as satisfied.
pub fn check_assumptions<F: Scalar>(
    spec: &ModelSpec<F>,
    n: usize,
    delta: F,
    eta: F,
    big_c: F,
    kappa: F,
) -> AssumptionReport<F> {
    let nf = F::cast(n as f64);
    let p = F::cast(spec.p as f64);
    let mu_sq = spec.mu_norm_sq();
    let inv_c = F::one() / big_c;
    let log_inv_delta = (F::one() / delta).ln();
    let log_n_delta = (nf / delta).ln();

    let failure_probability = AssumptionCheck {
        holds: delta >= F::zero() && delta < inv_c,
        lhs: delta,
        rhs: inv_c,
    };
    let sample_size = AssumptionCheck {
        holds: nf >= big_c * log_inv_delta,
        lhs: nf,
        rhs: big_c * log_inv_delta,
    };
    let over_rhs = big_c * (mu_sq * nf).max(nf * nf * log_n_delta);
    let overparameterization = AssumptionCheck {
        holds: p >= over_rhs,
        lhs: p,
        rhs: over_rhs,
    };
    let signal_strength = AssumptionCheck {
        holds: mu_sq >= big_c * log_n_delta,
        lhs: mu_sq,
        rhs: big_c * log_n_delta,
    };
    let noise_level = AssumptionCheck {
        holds: eta <= inv_c,
        lhs: eta,
        rhs: inv_c,
    };
    let energy = spec.latent_second_moment();
    let latent_energy = AssumptionCheck {
        holds: energy >= kappa * p,
        lhs: energy,
        rhs: kappa * p,
    };
    AssumptionReport {
        failure_probability,
        sample_size,
        overparameterization,
        signal_strength,
        noise_level,
        latent_energy,
    }
}

/// Sidecar metadata stored next to a dataset CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest<F> {
    pub spec: ModelSpec<F>,
    pub noise: NoiseSpec<F>,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
}

/// Floats are emitted with 17 significant digits so f64 round-trips exactly.
pub(crate) fn fmt_float<F: Scalar>(x: F) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{:.16e}", x)
    }
}

pub fn write_dataset_csv<F: Scalar>(
    ds: &Dataset<F>,
    out: &mut dyn IoWrite,
) -> Result<(), ConfigError> {
    let p = ds.p();
    let mut header = String::from("y,y_tilde");
    for j in 1..=p {
        header.push_str(&format!(",x_{j}"));
    }
    writeln!(out, "{header}")?;
    for k in 0..ds.n() {
        let mut line = format!("{},{}", ds.y()[k], ds.y_tilde()[k]);
        for v in ds.x_row(k) {
            line.push(',');
            line.push_str(&fmt_float(*v));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_dataset_csv<F: Scalar>(input: &mut dyn std::io::Read) -> Result<Dataset<F>, ConfigError> {
    let reader = BufReader::new(input);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| ConfigError::Parse("empty dataset file".into()))??;
    let cols: Vec<&str> = header.trim_end().split(',').collect();
    if cols.len() < 3 || cols[0] != "y" || cols[1] != "y_tilde" {
        return Err(ConfigError::Parse(format!("unexpected header: {header}")));
    }
    let p = cols.len() - 2;
    let mut y = Vec::new();
    let mut y_tilde = Vec::new();
    let mut data: Vec<F> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != p + 2 {
            return Err(ConfigError::Parse(format!(
                "row {}: expected {} fields, got {}",
                lineno + 2,
                p + 2,
                fields.len()
            )));
        }
        let parse_label = |s: &str| {
            s.parse::<i8>()
                .map_err(|_| ConfigError::Parse(format!("bad label {s:?}")))
        };
        y.push(parse_label(fields[0])?);
        y_tilde.push(parse_label(fields[1])?);
        for f in &fields[2..] {
            let v: f64 = f
                .parse()
                .map_err(|_| ConfigError::Parse(format!("bad float {f:?}")))?;
            data.push(F::cast(v));
        }
    }
    let n = y.len();
    Dataset::from_parts(Matrix::from_vec(n, p, data), y, y_tilde)
}

/// Writes `dataset.csv` and `manifest.json` into `dir`.
pub fn write_dataset_dir<F: Scalar + Serialize>(
    dir: &Path,
    ds: &Dataset<F>,
    manifest: &Manifest<F>,
) -> Result<(), ConfigError> {
    fs::create_dir_all(dir)?;
    let mut csv = BufWriter::new(fs::File::create(dir.join("dataset.csv"))?);
    write_dataset_csv(ds, &mut csv)?;
    csv.flush().map_err(ConfigError::Io)?;
    let json = serde_json::to_string_pretty(manifest)?;
    fs::write(dir.join("manifest.json"), json)?;
    Ok(())
}

pub fn read_dataset_dir<F: Scalar + for<'de> Deserialize<'de>>(
    dir: &Path,
) -> Result<(Dataset<F>, Manifest<F>), ConfigError> {
    let mut csv = fs::File::open(dir.join("dataset.csv"))?;
    let ds = read_dataset_csv(&mut csv)?;
    let manifest: Manifest<F> = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    if manifest.n != ds.n() || manifest.p != ds.p() {
        return Err(ConfigError::Parse(format!(
            "manifest says n = {}, p = {}; dataset has n = {}, p = {}",
            manifest.n,
            manifest.p,
            ds.n(),
            ds.p()
        )));
    }
    Ok((ds, manifest))
}
