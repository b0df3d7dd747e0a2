//! Gradient descent on the exponential surrogate loss R(v) = sum_k
//! exp(-y_k (v . x_k)), started at v = 0. On separable data the iterates
//! drift to infinity while their direction approaches the maximum-margin
//! separator; the trace records the quantities that make that drift
//! observable: the loss, the spread between the largest and smallest
//! per-example loss, the overlap with a reference direction, and the overlap
//! with the model mean.

use std::io::Write as IoWrite;

use thiserror::Error;

use crate::datagen::{fmt_float, Dataset};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;
use crate::solver::signed_rows;

#[derive(Debug, Error)]
pub enum GdError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("direction-gap early stopping needs a reference direction")]
    MissingReference,
    #[error("direction gap is undefined for a zero vector")]
    ZeroVector,
    /// Only raised under the smoothness-derived step size, where the loss is
    /// guaranteed nonincreasing; an increase means the data violate the
    /// premise of the bound.
    #[error("loss increased to {loss:e} at iteration {iter} despite the smoothness step size")]
    DivergingLoss { iter: usize, loss: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSizePolicy<F> {
    /// Constant step size chosen by the caller. No divergence protection.
    FixedAlpha(F),
    /// 1 / (n max_k ||z_k||^2): the loss starts at n and never increases,
    /// because the loss is L-smooth with L <= R(v) max_k ||z_k||^2 and
    /// R(v) <= n along the whole trajectory.
    SmoothnessBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdConfig<F> {
    pub policy: StepSizePolicy<F>,
    pub max_iters: usize,
    /// Iterates with index divisible by this are logged; the final iterate
    /// is always logged.
    pub log_stride: usize,
    /// Stop once 1 - cos(v, reference) falls to this value.
    pub direction_gap_target: Option<F>,
}

impl<F: Scalar> GdConfig<F> {
    fn validate(&self) -> Result<(), GdError> {
        if self.log_stride == 0 {
            return Err(GdError::InvalidConfig("log_stride must be at least 1".into()));
        }
        if let StepSizePolicy::FixedAlpha(a) = self.policy {
            if !(a > F::zero() && a.is_finite()) {
                return Err(GdError::InvalidConfig(
                    "fixed step size must be positive and finite".into(),
                ));
            }
        }
        if let Some(t) = self.direction_gap_target {
            if !(t >= F::zero()) {
                return Err(GdError::InvalidConfig(
                    "direction_gap_target must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One logged iterate. Fields without an input to measure against (no mean,
/// no reference, or v still zero) hold NaN rather than a fabricated number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<F> {
    pub iter: usize,
    pub loss: F,
    /// exp(u_max - u_min) at this iterate: the largest ratio between two
    /// per-example losses.
    pub loss_ratio_max: F,
    pub mu_dot_v: F,
    pub norm_v: F,
    pub direction_gap: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace<F> {
    pub rows: Vec<TraceRow<F>>,
    /// Largest loss ratio over every iterate, logged or not.
    pub sup_loss_ratio: F,
    /// Gradient steps actually taken.
    pub iters_run: usize,
    pub step_size: F,
    /// True when the direction-gap target triggered the stop.
    pub early_stopped: bool,
}

/// 1 - cos(a, b), in [0, 2]. Zero means parallel, 2 means antiparallel.
pub fn direction_gap<F: Scalar>(a: &[F], b: &[F]) -> Result<F, GdError> {
    let na = linalg::norm(a);
    let nb = linalg::norm(b);
    if na == F::zero() || nb == F::zero() {
        return Err(GdError::ZeroVector);
    }
    let cos = (linalg::dot(a, b) / (na * nb))
        .min(F::one())
        .max(-F::one());
    Ok(F::one() - cos)
}

/// Loss over margins u, computed as exp(m) sum_k exp(-u_k - m) with
/// m = max_k(-u_k), so no intermediate term overflows before the total does
/// and R(0) is exactly n.
fn loss_from_margins<F: Scalar>(u: &[F]) -> F {
    let m = u.iter().fold(F::neg_infinity(), |acc, &v| acc.max(-v));
    let sum: F = u.iter().map(|&v| (-v - m).exp()).sum();
    m.exp() * sum
}

pub fn exp_loss<F: Scalar>(data: &Dataset<F>, v: &[F]) -> F {
    let u: Vec<F> = (0..data.n()).map(|k| data.margin(v, k)).collect();
    loss_from_margins(&u)
}

/// Gradient of the loss: -sum_k z_k exp(-u_k), accumulated at the scale of
/// the largest term so the direction survives even when every term
/// underflows at its natural scale.
pub fn grad_exp_loss<F: Scalar>(data: &Dataset<F>, v: &[F]) -> Vec<F> {
    let n = data.n();
    let u: Vec<F> = (0..n).map(|k| data.margin(v, k)).collect();
    let m = u.iter().fold(F::neg_infinity(), |acc, &x| acc.max(-x));
    let mut g = vec![F::zero(); data.p()];
    for k in 0..n {
        let coef = -(-u[k] - m).exp() * data.label(k);
        linalg::axpy(coef, data.x_row(k), &mut g);
    }
    let scale = m.exp();
    for gi in g.iter_mut() {
        *gi *= scale;
    }
    g
}

/// Largest ratio between two per-example losses at margins u.
pub fn loss_ratio_max<F: Scalar>(u: &[F]) -> F {
    let max = u.iter().copied().fold(F::neg_infinity(), F::max);
    let min = u.iter().copied().fold(F::infinity(), F::min);
    (max - min).exp()
}

/// Runs gradient descent from v = 0. `reference_w` enables the direction-gap
/// column (and early stopping when `direction_gap_target` is set); `mu`
/// enables the mean-overlap column.
pub fn train_gd<F: Scalar>(
    data: &Dataset<F>,
    cfg: &GdConfig<F>,
    reference_w: Option<&[F]>,
    mu: Option<&[F]>,
) -> Result<(Vec<F>, TrainTrace<F>), GdError> {
    cfg.validate()?;
    let n = data.n();
    let p = data.p();
    if let Some(r) = reference_w {
        if r.len() != p {
            return Err(GdError::InvalidConfig(format!(
                "reference direction has length {}, expected p = {p}",
                r.len()
            )));
        }
        if linalg::norm_sq(r) == F::zero() {
            return Err(GdError::ZeroVector);
        }
    } else if cfg.direction_gap_target.is_some() {
        return Err(GdError::MissingReference);
    }
    if let Some(m) = mu {
        if m.len() != p {
            return Err(GdError::InvalidConfig(format!(
                "mean vector has length {}, expected p = {p}",
                m.len()
            )));
        }
    }

    let z: Matrix<F> = signed_rows(data);
    let max_row_sq = (0..n)
        .map(|k| linalg::norm_sq(z.row(k)))
        .fold(F::zero(), F::max);
    if max_row_sq == F::zero() {
        return Err(GdError::InvalidConfig(
            "every training vector is zero; the loss has no descent direction".into(),
        ));
    }
    let smoothness_policy = matches!(cfg.policy, StepSizePolicy::SmoothnessBound);
    let alpha = match cfg.policy {
        StepSizePolicy::FixedAlpha(a) => a,
        StepSizePolicy::SmoothnessBound => F::one() / (F::cast(n as f64) * max_row_sq),
    };

    let mut v = vec![F::zero(); p];
    let mut rows = Vec::new();
    let mut sup_ratio = F::one();
    let mut prev_loss = F::infinity();
    let mut t = 0usize;
    let (iters_run, early_stopped) = loop {
        let u: Vec<F> = (0..n).map(|k| linalg::dot(z.row(k), &v)).collect();
        let loss = loss_from_margins(&u);
        let ratio = loss_ratio_max(&u);
        sup_ratio = sup_ratio.max(ratio);
        if smoothness_policy && loss > prev_loss * (F::one() + F::cast(1e-9)) {
            return Err(GdError::DivergingLoss {
                iter: t,
                loss: loss.to_f64().unwrap_or(f64::NAN),
            });
        }
        prev_loss = loss;
        let norm_v = linalg::norm(&v);
        let gap = match reference_w {
            Some(r) if norm_v > F::zero() => direction_gap(&v, r)?,
            _ => F::nan(),
        };
        let mu_dot_v = mu.map_or(F::nan(), |m| linalg::dot(m, &v));
        let hit_target = cfg
            .direction_gap_target
            .map_or(false, |tgt| gap.is_finite() && gap <= tgt);
        let is_last = hit_target || t == cfg.max_iters;
        if t % cfg.log_stride == 0 || is_last {
            rows.push(TraceRow {
                iter: t,
                loss,
                loss_ratio_max: ratio,
                mu_dot_v,
                norm_v,
                direction_gap: gap,
            });
        }
        if is_last {
            break (t, hit_target);
        }
        for k in 0..n {
            let coef = (-u[k]).exp();
            if coef != F::zero() {
                linalg::axpy(alpha * coef, z.row(k), &mut v);
            }
        }
        t += 1;
    };
    Ok((
        v,
        TrainTrace {
            rows,
            sup_loss_ratio: sup_ratio,
            iters_run,
            step_size: alpha,
            early_stopped,
        },
    ))
}

pub fn write_trace_csv<F: Scalar>(
    trace: &TrainTrace<F>,
    out: &mut dyn IoWrite,
) -> std::io::Result<()> {
    writeln!(out, "iter,R,A_max,mu_dot_v,norm_v,direction_gap")?;
    for r in &trace.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.iter,
            fmt_float(r.loss),
            fmt_float(r.loss_ratio_max),
            fmt_float(r.mu_dot_v),
            fmt_float(r.norm_v),
            fmt_float(r.direction_gap),
        )?;
    }
    Ok(())
}
