//! Diederich–Fornaess exponent of a metric.
//!
//! The condition `Θ - c αα* ≻ 0` with `c = η/(1-η)` holds at a point iff
//! `Θ ≻ 0` and `c · s < 1`, where `s = α* Θ⁻¹ α` (Schur complement). The
//! exponent of a metric is therefore `1 / (1 + max s)`, or 0 when `Θ` fails
//! to be positive definite somewhere.

use ndarray::{ArrayD, Dimension, IxDyn, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{alpha_vector, theta_matrix, AlphaVectorField, MetricField, ThetaMatrixField};
use crate::model::{FoliatedModel, RealField};
use crate::tolerances;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentReport {
    pub eta: f64,
    /// `Θ ≻ 0` at every grid point.
    pub feasible: bool,
    pub min_theta_eig: f64,
    pub s_max: Option<f64>,
    pub argmax_point: Option<Vec<usize>>,
    /// Grid mean of `tr Θ`; zero on compact models.
    pub mean_trace_theta: f64,
    pub reason: Option<String>,
}

/// Smallest eigenvalue of a hermitian 2×2 matrix `[[a, b], [b̄, d]]`.
pub fn min_eig_2x2(a: f64, b: Complex64, d: f64) -> f64 {
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    mean - (half_gap * half_gap + b.norm_sqr()).sqrt()
}

fn theta_at(theta: &ThetaMatrixField, j: usize, k: usize, p: &IxDyn) -> Complex64 {
    theta.entry(j, k)[p]
}

/// Smallest eigenvalue of `Θ` per grid point.
pub fn min_eigenvalue_field(theta: &ThetaMatrixField) -> RealField {
    let t11 = theta.entry(0, 0);
    let mut out = ArrayD::zeros(t11.raw_dim());
    match theta.n() {
        1 => Zip::from(&mut out).and(t11).par_for_each(|o, z| *o = z.re),
        _ => Zip::from(&mut out)
            .and(t11)
            .and(theta.entry(0, 1))
            .and(theta.entry(1, 1))
            .par_for_each(|o, a, &b, d| *o = min_eig_2x2(a.re, b, d.re)),
    }
    out
}

/// `POSITIVITY · (1 + ‖Θ‖∞)`.
pub fn positivity_threshold(theta: &ThetaMatrixField) -> f64 {
    tolerances::POSITIVITY * (1.0 + theta.sup_norm())
}

fn argmin(f: &RealField) -> (Vec<usize>, f64) {
    let mut best = (Vec::new(), f64::INFINITY);
    for (idx, &v) in f.indexed_iter() {
        if v < best.1 {
            best = (idx.slice().to_vec(), v);
        }
    }
    best
}

fn argmax(f: &RealField) -> (Vec<usize>, f64) {
    let mut best = (Vec::new(), f64::NEG_INFINITY);
    for (idx, &v) in f.indexed_iter() {
        if v > best.1 {
            best = (idx.slice().to_vec(), v);
        }
    }
    best
}

/// `s = α* Θ⁻¹ α` from precomputed fields; fails at the first point (in
/// row-major order) where `Θ` is not strictly positive.
pub fn schur_field(alpha: &AlphaVectorField, theta: &ThetaMatrixField) -> Result<RealField> {
    let min_eig = min_eigenvalue_field(theta);
    let threshold = positivity_threshold(theta);
    if let Some((idx, &v)) = min_eig.indexed_iter().find(|(_, &v)| !(v > threshold)) {
        return Err(Error::NotPositive {
            point: idx.slice().to_vec(),
            min_eig: v,
        });
    }
    let a1 = &alpha.components[0];
    let mut s = ArrayD::zeros(a1.raw_dim());
    match theta.n() {
        1 => Zip::from(&mut s)
            .and(a1)
            .and(theta.entry(0, 0))
            .par_for_each(|o, a, t| *o = a.norm_sqr() / t.re),
        _ => {
            let a2 = &alpha.components[1];
            Zip::from(&mut s)
                .and(a1)
                .and(a2)
                .and(theta.entry(0, 0))
                .and(theta.entry(0, 1))
                .and(theta.entry(1, 1))
                .par_for_each(|o, &x1, &x2, a, &b, d| {
                    let (a, d) = (a.re, d.re);
                    let det = a * d - b.norm_sqr();
                    let cross = (b * x1.conj() * x2).re;
                    *o = (d * x1.norm_sqr() + a * x2.norm_sqr() - 2.0 * cross) / det;
                })
        }
    }
    Ok(s)
}

pub fn pointwise_s(model: &FoliatedModel, m: &MetricField) -> Result<RealField> {
    let alpha = alpha_vector(model, m)?;
    let theta = theta_matrix(model, &alpha)?;
    schur_field(&alpha, &theta)
}

/// Builds the report from precomputed `α` and `Θ`.
pub fn report_from_fields(
    model: &FoliatedModel,
    alpha: &AlphaVectorField,
    theta: &ThetaMatrixField,
) -> ExponentReport {
    let min_eig = min_eigenvalue_field(theta);
    let (min_point, min_theta_eig) = argmin(&min_eig);
    let mean_trace_theta = theta.mean_trace();
    match schur_field(alpha, theta) {
        Ok(s) => {
            let (point, s_max) = argmax(&s);
            ExponentReport {
                eta: 1.0 / (1.0 + s_max),
                feasible: true,
                min_theta_eig,
                s_max: Some(s_max),
                argmax_point: Some(point),
                mean_trace_theta,
                reason: None,
            }
        }
        Err(_) => {
            let reason = if model.is_compact() && mean_trace_theta.abs() <= tolerances::MEAN_TRACE {
                "mean trace Θ ≈ 0: Θ cannot be positive definite everywhere on a compact model"
                    .to_string()
            } else {
                format!("Θ not positive definite at {min_point:?}")
            };
            ExponentReport {
                eta: 0.0,
                feasible: false,
                min_theta_eig,
                s_max: None,
                argmax_point: None,
                mean_trace_theta,
                reason: Some(reason),
            }
        }
    }
}

/// Closed-form exponent `η_h = 1/(1 + max s)`; reported as a supremum.
pub fn exponent_of_metric(model: &FoliatedModel, m: &MetricField) -> Result<ExponentReport> {
    let alpha = alpha_vector(model, m)?;
    let theta = theta_matrix(model, &alpha)?;
    Ok(report_from_fields(model, &alpha, &theta))
}

/// Independent oracle: bisection on `η` testing the smallest eigenvalue of
/// `Θ - (η/(1-η)) αα*` over the grid directly.
pub fn exponent_bisection_oracle(model: &FoliatedModel, m: &MetricField, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("bisection tolerance must be positive, got {tol}")));
    }
    let alpha = alpha_vector(model, m)?;
    let theta = theta_matrix(model, &alpha)?;
    let threshold = positivity_threshold(&theta);
    let n = model.n();

    let admissible = |c: f64| -> bool {
        let mut ok = true;
        for (p, _) in theta.entry(0, 0).indexed_iter() {
            let at = |j, k| theta_at(&theta, j, k, &p) - c * alpha.components[j][&p] * alpha.components[k][&p].conj();
            let eig = if n == 1 {
                at(0, 0).re
            } else {
                min_eig_2x2(at(0, 0).re, at(0, 1), at(1, 1).re)
            };
            if !(eig > threshold) {
                ok = false;
                break;
            }
        }
        ok
    };

    if !admissible(0.0) {
        return Ok(0.0);
    }
    // η = 1 means c = ∞: only admissible when α vanishes identically
    if alpha.components.iter().all(|a| a.iter().all(|z| z.norm() == 0.0)) {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if admissible(mid / (1.0 - mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
