//! Measures of whether a trained separator behaves the way the
//! high-dimensional theory says it should: concentration events on the
//! training sample, alignment between the separator and the class mean,
//! closed-form and Monte Carlo test risk, and the explicit risk bounds the
//! experiments are compared against.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::{floor_count, ConfigError, Dataset, LatentRowGen, ModelKind, ModelSpec, NoiseSpec};
use crate::linalg;
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::solver::{max_margin, signed_rows, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum DiagError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// One concentration event: the observed statistic and the threshold it is
/// measured against, with `holds` recording the comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventCheck<F> {
    pub holds: bool,
    pub statistic: F,
    pub threshold: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport<F> {
    /// Smallest margin of the aggregate direction sum_k z_k.
    pub min_margin: F,
    pub separates: bool,
}

/// The regime events, evaluated on one concrete sample at concrete
/// constants. Alignment checks are absent when they are vacuous (zero mean,
/// or no example in the relevant group).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport<F> {
    /// p/c <= ||z_k||^2 <= c p for every k.
    pub norm_concentration: EventCheck<F>,
    /// |z_i . z_j| < c (||mu||^2 + sqrt(p log(n/delta))) for every pair.
    pub pairwise_incoherence: EventCheck<F>,
    /// |mu . z_k - ||mu||^2| < ||mu||^2 / 2 on clean examples.
    pub clean_alignment: Option<EventCheck<F>>,
    /// |mu . z_k + ||mu||^2| < ||mu||^2 / 2 on noisy examples.
    pub noisy_alignment: Option<EventCheck<F>>,
    /// |N| / n <= eta + c'.
    pub noisy_fraction: EventCheck<F>,
    pub separable: bool,
    pub witness: WitnessReport<F>,
    /// Infimum of constants c at which the two c-dependent events pass
    /// (attained for the norm event, approached for the pairwise one).
    pub min_passing_c: F,
}

impl<F: Scalar> EventReport<F> {
    pub fn all_hold(&self) -> bool {
        self.norm_concentration.holds
            && self.pairwise_incoherence.holds
            && self.clean_alignment.map_or(true, |e| e.holds)
            && self.noisy_alignment.map_or(true, |e| e.holds)
            && self.noisy_fraction.holds
            && self.separable
    }
}

/// Margins of the unnormalized aggregate direction v = sum_k z_k. In the
/// working regime this single vector already separates the sample, which is
/// the cheapest certificate of separability.
pub fn separability_witness<F: Scalar>(data: &Dataset<F>) -> WitnessReport<F> {
    let z = signed_rows(data);
    let mut v = vec![F::zero(); data.p()];
    for k in 0..data.n() {
        linalg::axpy(F::one(), z.row(k), &mut v);
    }
    let min_margin = (0..data.n())
        .map(|k| linalg::dot(z.row(k), &v))
        .fold(F::infinity(), F::min);
    WitnessReport {
        min_margin,
        separates: min_margin > F::zero(),
    }
}

pub fn check_events<F: Scalar>(
    data: &Dataset<F>,
    mu: &[F],
    delta: F,
    c: F,
    c_prime: F,
    eta: F,
) -> Result<EventReport<F>, DiagError> {
    let n = data.n();
    let p = data.p();
    if mu.len() != p {
        return Err(DiagError::InvalidInput(format!(
            "mu has length {}, expected p = {p}",
            mu.len()
        )));
    }
    if !(delta > F::zero() && delta < F::one()) {
        return Err(DiagError::InvalidInput("delta must lie in (0, 1)".into()));
    }
    if !(c > F::zero()) || c_prime < F::zero() {
        return Err(DiagError::InvalidInput(
            "c must be positive and c' nonnegative".into(),
        ));
    }
    let z = signed_rows(data);
    let pf = F::cast(p as f64);
    let nf = F::cast(n as f64);
    let mu_sq = linalg::norm_sq(mu);

    let mut s1 = F::zero();
    for k in 0..n {
        let nsq = linalg::norm_sq(z.row(k));
        let ratio = (nsq / pf).max(pf / nsq);
        s1 = s1.max(ratio);
    }
    let norm_concentration = EventCheck {
        holds: s1 <= c,
        statistic: s1,
        threshold: c,
    };

    let denom = mu_sq + (pf * (nf / delta).ln()).sqrt();
    let mut max_cross = F::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            max_cross = max_cross.max(linalg::dot(z.row(i), z.row(j)).abs());
        }
    }
    let s2 = max_cross / denom;
    let pairwise_incoherence = EventCheck {
        holds: s2 < c,
        statistic: s2,
        threshold: c,
    };

    let alignment = |ks: &[usize], sign: F| -> Option<EventCheck<F>> {
        if ks.is_empty() || mu_sq == F::zero() {
            return None;
        }
        let stat = ks
            .iter()
            .map(|&k| (linalg::dot(mu, z.row(k)) - sign * mu_sq).abs())
            .fold(F::zero(), F::max);
        let threshold = mu_sq / F::cast(2.0);
        Some(EventCheck {
            holds: stat < threshold,
            statistic: stat,
            threshold,
        })
    };
    let clean: Vec<usize> = (0..n).filter(|k| !data.noisy().contains(k)).collect();
    let clean_alignment = alignment(&clean, F::one());
    let noisy_alignment = alignment(data.noisy(), -F::one());

    let frac = F::cast(data.noisy().len() as f64) / nf;
    let noisy_fraction = EventCheck {
        holds: frac <= eta + c_prime,
        statistic: frac,
        threshold: eta + c_prime,
    };

    let separable = match max_margin(data, &SolverConfig::default()) {
        Ok(_) => true,
        // A positive-margin iterate witnesses separability even when the
        // tolerance was not reached.
        Err(SolverError::NoConvergence { .. }) => true,
        Err(_) => false,
    };
    let witness = separability_witness(data);
    let min_passing_c = F::one().max(s1).max(s2);

    Ok(EventReport {
        norm_concentration,
        pairwise_incoherence,
        clean_alignment,
        noisy_alignment,
        noisy_fraction,
        separable,
        witness,
        min_passing_c,
    })
}

/// (mu . w) sqrt(p) / (||w|| ||mu||^2): how much of the separator points
/// along the mean, on the scale where the theory predicts a constant.
pub fn margin_ratio<F: Scalar>(w: &[F], mu: &[F], p: usize) -> Result<F, DiagError> {
    if w.len() != mu.len() {
        return Err(DiagError::InvalidInput(format!(
            "w and mu have different lengths ({} vs {})",
            w.len(),
            mu.len()
        )));
    }
    let nw = linalg::norm(w);
    let mu_sq = linalg::norm_sq(mu);
    if nw == F::zero() || mu_sq == F::zero() {
        return Err(DiagError::ZeroVector);
    }
    Ok(linalg::dot(mu, w) * F::cast(p as f64).sqrt() / (nw * mu_sq))
}

/// Exact test risk of sign(w . x) under a diagonal-covariance Gaussian model
/// with random label flips at rate eta: (1 - eta) Phi(-m) + eta Phi(m),
/// where m = (mu . w) / sqrt(sum_j sigma_j w_j^2).
pub fn analytic_risk_gaussian<F: Scalar>(
    w: &[F],
    mu: &[F],
    sigma_diag: &[F],
    eta: F,
) -> Result<F, DiagError> {
    let p = w.len();
    if mu.len() != p || sigma_diag.len() != p {
        return Err(DiagError::InvalidInput(
            "w, mu, sigma_diag must have equal lengths".into(),
        ));
    }
    if !(eta >= F::zero() && eta < F::cast(0.5)) {
        return Err(DiagError::InvalidInput("eta must lie in [0, 1/2)".into()));
    }
    let var: F = w
        .iter()
        .zip(sigma_diag)
        .map(|(&wj, &sj)| sj * wj * wj)
        .sum();
    if var <= F::zero() {
        return Err(DiagError::ZeroVector);
    }
    let m = linalg::dot(mu, w) / var.sqrt();
    Ok((F::one() - eta) * (-m).normal_cdf() + eta * m.normal_cdf())
}

/// eta + exp(-c ||mu||^4 / p): test-risk guarantee for the max-margin
/// separator in the working regime, up to the constant c.
pub fn theorem_bound<F: Scalar>(mu_norm_sq: F, p: usize, eta: F, c: F) -> F {
    eta + (-c * mu_norm_sq * mu_norm_sq / F::cast(p as f64)).exp()
}

/// eta + exp(-c gamma^4 s^2 / p): the same guarantee specialized to the
/// rare/weak parameterization.
pub fn corollary_bound<F: Scalar>(gamma: F, s: usize, p: usize, eta: F, c: F) -> F {
    let g2s = gamma * gamma * F::cast(s as f64);
    eta + (-c * g2s * g2s / F::cast(p as f64)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesReference<F> {
    /// eta + (1 - 2 eta) Phi(-||mu||): exact optimal risk for the isotropic
    /// Gaussian model.
    pub exact_gaussian: F,
    /// eta + exp(-c ||mu||^2): the sub-Gaussian tail form of the same
    /// quantity.
    pub exp_bound: F,
}

pub fn bayes_reference<F: Scalar>(mu_norm: F, eta: F, c: F) -> BayesReference<F> {
    BayesReference {
        exact_gaussian: eta + (F::one() - F::cast(2.0) * eta) * (-mu_norm).normal_cdf(),
        exp_bound: eta + (-c * mu_norm * mu_norm).exp(),
    }
}

pub const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McRisk<F> {
    /// Raw error fraction.
    pub estimate: F,
    /// 95% Agresti-Coull halfwidth, strictly positive even at 0 errors.
    pub ci_halfwidth: F,
    pub samples: usize,
}

fn agresti_coull(errors: u64, m: usize) -> (f64, f64) {
    let z = 1.96;
    let nt = m as f64 + z * z;
    let pt = (errors as f64 + z * z / 2.0) / nt;
    (errors as f64 / m as f64, z * (pt * (1.0 - pt) / nt).sqrt())
}

/// Monte Carlo test risk of sign(w . x) on fresh draws from the model, with
/// label noise applied to the test stream. Samples are drawn in chunks of
/// [`MC_CHUNK`], each chunk from its own substream of `seed`, so the
/// estimate is a deterministic function of (w, spec, noise, m_test, seed).
/// A tie w . x = 0 counts as an error. Margin-targeted noise flips the
/// floor(eta * chunk) largest-score examples within each chunk.
pub fn mc_risk<F: Scalar>(
    w: &[F],
    spec: &ModelSpec<F>,
    noise: &NoiseSpec<F>,
    m_test: usize,
    seed: u64,
) -> Result<McRisk<F>, DiagError> {
    spec.validate()?;
    noise.validate()?;
    if w.len() != spec.p {
        return Err(DiagError::InvalidInput(format!(
            "w has length {}, expected p = {}",
            w.len(),
            spec.p
        )));
    }
    if m_test == 0 {
        return Err(DiagError::InvalidInput("m_test must be at least 1".into()));
    }
    // Work in the latent basis: w . (U q) = (U^T w) . q, so the rotation is
    // folded into the weight vector once instead of into every sample.
    let w_latent: Vec<F> = match spec.rotation.matrix::<F>(spec.p) {
        Some(u) => u.matvec_t(w),
        None => w.to_vec(),
    };
    let mu_latent = spec.latent_mu();
    let rowgen = LatentRowGen::new(spec);
    let eta = noise.eta().to_f64().unwrap();
    let targeted = matches!(noise, NoiseSpec::MarginTargetedFlip { .. });
    let random_flip = matches!(noise, NoiseSpec::RandomFlip { .. });

    let mut errors: u64 = 0;
    let mut buf = vec![F::zero(); spec.p];
    let mut done = 0usize;
    let mut chunk_idx = 0u64;
    let mut chunk: Vec<(F, F)> = Vec::new();
    while done < m_test {
        let size = (m_test - done).min(MC_CHUNK);
        let mut rng = stream_rng(seed, chunk_idx);
        if targeted {
            chunk.clear();
        }
        for _ in 0..size {
            let y_tilde = F::cast(rowgen.fill(&mut rng, &mut buf) as f64);
            let t = y_tilde * linalg::dot(&w_latent, &buf);
            if targeted {
                let score = y_tilde * linalg::dot(&mu_latent, &buf);
                chunk.push((score, t));
            } else {
                let flipped = random_flip && rng.random::<f64>() < eta;
                let err = if flipped { t >= F::zero() } else { t <= F::zero() };
                errors += err as u64;
            }
        }
        if targeted {
            let flips = floor_count(eta, size);
            let mut order: Vec<usize> = (0..size).collect();
            order.sort_by(|&a, &b| {
                chunk[b].0
                    .partial_cmp(&chunk[a].0)
                    .unwrap()
                    .then_with(|| a.cmp(&b))
            });
            let mut flip = vec![false; size];
            for &i in order.iter().take(flips) {
                flip[i] = true;
            }
            for (i, &(_, t)) in chunk.iter().enumerate() {
                let err = if flip[i] { t >= F::zero() } else { t <= F::zero() };
                errors += err as u64;
            }
        }
        done += size;
        chunk_idx += 1;
    }
    let (estimate, half) = agresti_coull(errors, m_test);
    Ok(McRisk {
        estimate: F::cast(estimate),
        ci_halfwidth: F::cast(half),
        samples: m_test,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport<F> {
    pub test_risk: F,
    /// Zero when the risk is computed in closed form.
    pub test_ci: F,
    pub analytic: bool,
    pub theorem_bound: F,
    /// Present for the rare/weak parameterizations.
    pub corollary_bound: Option<F>,
    pub bayes: BayesReference<F>,
    /// NaN when the mean or the separator is zero.
    pub margin_ratio: F,
}

/// Full risk picture for one separator: measured (or exact) test risk plus
/// every reference quantity it is compared against, all at constant `c`.
pub fn risk_report<F: Scalar>(
    w: &[F],
    spec: &ModelSpec<F>,
    noise: &NoiseSpec<F>,
    m_test: usize,
    seed: u64,
    c: F,
) -> Result<RiskReport<F>, DiagError> {
    spec.validate()?;
    noise.validate()?;
    let eta = noise.eta();
    let mu = spec.mu();
    let mu_norm_sq = spec.mu_norm_sq();
    let gaussian_model = matches!(
        spec.kind,
        ModelKind::GaussianCc { .. } | ModelKind::RareWeak { .. }
    );
    let (test_risk, test_ci, analytic) =
        if gaussian_model && !matches!(noise, NoiseSpec::MarginTargetedFlip { .. }) {
            let w_latent: Vec<F> = match spec.rotation.matrix::<F>(spec.p) {
                Some(u) => u.matvec_t(w),
                None => w.to_vec(),
            };
            let risk = analytic_risk_gaussian(
                &w_latent,
                &spec.latent_mu(),
                &spec.latent_variances(),
                eta,
            )?;
            (risk, F::zero(), true)
        } else {
            let mc = mc_risk(w, spec, noise, m_test, seed)?;
            (mc.estimate, mc.ci_halfwidth, false)
        };
    let corollary = match spec.kind {
        ModelKind::RareWeak { s, gamma } | ModelKind::BooleanRareWeak { s, gamma } => {
            Some(corollary_bound(gamma, s, spec.p, eta, c))
        }
        ModelKind::GaussianCc { .. } => None,
    };
    Ok(RiskReport {
        test_risk,
        test_ci,
        analytic,
        theorem_bound: theorem_bound(mu_norm_sq, spec.p, eta, c),
        corollary_bound: corollary,
        bayes: bayes_reference(mu_norm_sq.sqrt(), eta, c),
        margin_ratio: margin_ratio(w, &mu, spec.p).unwrap_or_else(|_| F::nan()),
    })
}
