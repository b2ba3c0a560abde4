//! Derivative-free search over band-limited metrics.
//!
//! Phase 1 maximizes the smallest eigenvalue of `Θ` over the grid until the
//! metric becomes feasible or the simplex stalls. Phase 2 maximizes the
//! smoothed exponent `1 / (1 + T log Σ exp(s/T))` for a decreasing sequence
//! of temperatures `T`. The best true exponent seen at any evaluation is
//! returned, so a run started at a known metric can only improve on it.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::dfindex::{self, ExponentReport};
use crate::error::{Error, Result};
use crate::forms::{alpha_vector, theta_matrix, MetricField};
use crate::fourier::FourierParam;
use crate::model::FoliatedModel;

/// Stopping rules for [`nelder_mead`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    pub max_iters: usize,
    /// Stop when every vertex is within `xtol` of the best one (sup norm).
    pub xtol: f64,
    /// Stop when the spread of objective values is below `ftol`.
    pub ftol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// State handed to the per-iteration callback.
pub struct SimplexStep<'a> {
    pub iteration: usize,
    pub best: &'a [f64],
    pub best_f: f64,
    /// Largest sup-norm distance from a vertex to the best vertex.
    pub size: f64,
}

fn simplex_size(simplex: &[Vec<f64>]) -> f64 {
    simplex[1..]
        .iter()
        .map(|v| v.iter().zip(&simplex[0]).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
        .fold(0.0, f64::max)
}

/// Minimizes `f` with the standard Nelder–Mead simplex (reflection 1,
/// expansion 2, contraction ½, shrink ½). The initial simplex is `x0` plus
/// `x0 + steps[i] e_i`. The callback runs after every iteration and may stop
/// the search by returning `false`.
pub fn nelder_mead<F, C>(mut f: F, x0: &[f64], steps: &[f64], opts: SimplexOptions, mut callback: C) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
    C: FnMut(&SimplexStep) -> bool,
{
    let dim = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        let v = f(x);
        // NaN never wins a comparison
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evaluations)).collect();

    let order = |simplex: &mut Vec<Vec<f64>>, values: &mut Vec<f64>| {
        let mut idx: Vec<usize> = (0..simplex.len()).collect();
        // stable: ties keep their previous order
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        *simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        *values = idx.iter().map(|&i| values[i]).collect();
    };
    order(&mut simplex, &mut values);

    let mut iterations = 0;
    while iterations < opts.max_iters && dim > 0 {
        if simplex_size(&simplex) <= opts.xtol || values[dim] - values[0] <= opts.ftol {
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..dim)
            .map(|i| simplex[..dim].iter().map(|v| v[i]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let reflected = along(1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr < values[0] {
            let expanded = along(2.0);
            let fe = eval(&expanded, &mut evaluations);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let (contracted, fc) = if fr < values[dim] {
                let x = along(0.5);
                let v = eval(&x, &mut evaluations);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(&x, &mut evaluations);
                (x, v)
            };
            if fc < fr.min(values[dim]) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for k in 1..=dim {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(&simplex[k])
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    values[k] = eval(&shrunk, &mut evaluations);
                    simplex[k] = shrunk;
                }
            }
        }
        order(&mut simplex, &mut values);
        let step = SimplexStep {
            iteration: iterations,
            best: &simplex[0],
            best_f: values[0],
            size: simplex_size(&simplex),
        };
        if !callback(&step) {
            break;
        }
    }
    SimplexResult {
        x: simplex[0].clone(),
        f: values[0],
        iterations,
        evaluations,
    }
}

/// `T log Σ exp(s/T)`, an upper bound on `max s` that tends to it as `T → 0`.
pub fn logsumexp(values: impl Iterator<Item = f64> + Clone, temperature: f64) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.map(|v| ((v - max) / temperature).exp()).sum();
    max + temperature * sum.ln()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptConfig {
    pub phase1_iters: usize,
    /// Iterations per temperature in phase 2.
    pub phase2_iters: usize,
    /// Initial simplex edge in coefficient units.
    pub initial_step: f64,
    /// Scale of the seeded starting coefficients; 0 starts at the base metric.
    pub init_scale: f64,
    /// Annealing schedule for the smoothed maximum.
    pub temperatures: Vec<f64>,
    pub xtol: f64,
    pub ftol: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            phase1_iters: 200,
            phase2_iters: 150,
            initial_step: 0.05,
            init_scale: 0.0,
            temperatures: vec![0.1, 0.03, 0.01],
            xtol: 1e-9,
            ftol: 1e-12,
        }
    }
}

impl OptConfig {
    fn check(&self) -> Result<()> {
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::Config("initial_step must be positive".into()));
        }
        if !self.init_scale.is_finite() || self.init_scale < 0.0 {
            return Err(Error::Config("init_scale must be non-negative".into()));
        }
        if self.temperatures.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Config("temperatures must be positive".into()));
        }
        if !(self.xtol >= 0.0 && self.ftol >= 0.0) {
            return Err(Error::Config("xtol and ftol must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub phase: u8,
    pub min_eig: f64,
    pub s_max: Option<f64>,
    pub eta: f64,
    pub simplex_size: f64,
}

/// One row per simplex iteration, describing the best vertex so far.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub rows: Vec<TraceRow>,
    /// Coefficients of the returned metric.
    pub parameters: Vec<f64>,
    pub evaluations: usize,
}

impl OptimizationTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,min_eig,s_max,eta,simplex_size\n");
        for r in &self.rows {
            let s = r.s_max.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", r.iteration, r.min_eig, s, r.eta, r.simplex_size);
        }
        out
    }
}

pub struct Optimized {
    pub metric: MetricField,
    pub params: FourierParam,
    pub report: ExponentReport,
    pub trace: OptimizationTrace,
}

#[derive(Clone, Copy)]
struct Evaluation {
    min_eig: f64,
    threshold: f64,
    s_max: Option<f64>,
    eta: f64,
}

struct Search<'a> {
    model: &'a FoliatedModel,
    base: Option<&'a MetricField>,
    param: &'a FourierParam,
    best: Option<(Vec<f64>, Evaluation)>,
    evaluations: usize,
}

impl Search<'_> {
    fn metric(&self, x: &[f64]) -> Result<MetricField> {
        let mut u = self.param.with_params(x).synthesize(self.model)?;
        if let Some(base) = self.base {
            u += base.log_h();
        }
        MetricField::new(self.model, u)
    }

    /// Evaluates `x` and returns the schur field when feasible.
    fn evaluate(&mut self, x: &[f64]) -> (Evaluation, Option<crate::model::RealField>) {
        self.evaluations += 1;
        let failed = Evaluation {
            min_eig: f64::NEG_INFINITY,
            threshold: 0.0,
            s_max: None,
            eta: 0.0,
        };
        let Ok(m) = self.metric(x) else {
            return (failed, None);
        };
        let Ok(alpha) = alpha_vector(self.model, &m) else {
            return (failed, None);
        };
        let Ok(theta) = theta_matrix(self.model, &alpha) else {
            return (failed, None);
        };
        let min_eig = dfindex::min_eigenvalue_field(&theta)
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let threshold = dfindex::positivity_threshold(&theta);
        let (s_max, eta, s) = match dfindex::schur_field(&alpha, &theta) {
            Ok(s) => {
                let s_max = s.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                (Some(s_max), 1.0 / (1.0 + s_max), Some(s))
            }
            Err(_) => (None, 0.0, None),
        };
        let e = Evaluation {
            min_eig,
            threshold,
            s_max,
            eta,
        };
        let better = match &self.best {
            None => true,
            Some((_, b)) => {
                if b.s_max.is_some() || e.s_max.is_some() {
                    e.s_max.is_some() && (b.s_max.is_none() || e.eta > b.eta)
                } else {
                    e.min_eig > b.min_eig
                }
            }
        };
        if better {
            self.best = Some((x.to_vec(), e));
        }
        (e, s)
    }

    fn row(&self, phase: u8, iteration: usize, size: f64) -> TraceRow {
        let (_, b) = self.best.as_ref().expect("at least one evaluation");
        TraceRow {
            iteration,
            phase,
            min_eig: b.min_eig,
            s_max: b.s_max,
            eta: b.eta,
            simplex_size: size,
        }
    }
}

/// Searches `u = base + Fourier(param)` for the largest exponent. The seed
/// fixes the starting coefficients (scaled by `init_scale`) and the signs of
/// the initial simplex edges; runs are deterministic given the seed.
pub fn optimize_metric(
    model: &FoliatedModel,
    base: Option<&MetricField>,
    param: &FourierParam,
    config: &OptConfig,
    seed: u64,
) -> Result<Optimized> {
    config.check()?;
    param.check(model)?;
    if let Some(b) = base {
        model.check_shape(b.log_h().shape())?;
    }
    let seeded = FourierParam::seeded(model.dim(), param.cutoff, param.smoothness, param.amplitude, seed);
    let x0: Vec<f64> = seeded.to_params().iter().map(|v| v * config.init_scale).collect();
    let mut rng = SplitMix64::seed_from_u64(seed ^ 0x5eed_5eed_5eed_5eed);
    let steps: Vec<f64> = x0
        .iter()
        .map(|_| {
            if rng.next_u64() >> 63 == 0 {
                config.initial_step
            } else {
                -config.initial_step
            }
        })
        .collect();

    let mut search = Search {
        model,
        base,
        param,
        best: None,
        evaluations: 0,
    };
    let mut rows = Vec::new();
    let mut iteration = 0;
    let first = search.evaluate(&x0).0;
    rows.push(search.row(0, 0, config.initial_step));

    // phase 1: push min eig(Θ) above the positivity threshold
    if first.s_max.is_none() {
        let cell = std::cell::RefCell::new(&mut search);
        nelder_mead(
            |x| {
                let (e, _) = cell.borrow_mut().evaluate(x);
                -e.min_eig
            },
            &x0,
            &steps,
            SimplexOptions {
                max_iters: config.phase1_iters,
                xtol: config.xtol,
                ftol: config.ftol,
            },
            |step| {
                iteration += 1;
                let s = cell.borrow();
                rows.push(s.row(1, iteration, step.size));
                s.best.as_ref().is_none_or(|(_, b)| b.s_max.is_none())
            },
        );
    }

    // phase 2: anneal the smoothed maximum of s
    if search.best.as_ref().is_some_and(|(_, b)| b.s_max.is_some()) {
        for &temperature in &config.temperatures {
            let start = search.best.as_ref().map(|(x, _)| x.clone()).expect("feasible start");
            let cell = std::cell::RefCell::new(&mut search);
            nelder_mead(
                |x| {
                    let (e, s) = cell.borrow_mut().evaluate(x);
                    match s {
                        Some(s) => -1.0 / (1.0 + logsumexp(s.iter().copied(), temperature)),
                        // every feasible value lies in (-1, 0)
                        None => 1.0 + (e.threshold - e.min_eig).max(0.0),
                    }
                },
                &start,
                &steps,
                SimplexOptions {
                    max_iters: config.phase2_iters,
                    xtol: config.xtol,
                    ftol: config.ftol,
                },
                |step| {
                    iteration += 1;
                    rows.push(cell.borrow().row(2, iteration, step.size));
                    true
                },
            );
        }
    }

    let (x, _) = search.best.clone().expect("at least one evaluation");
    let metric = search.metric(&x)?;
    let report = dfindex::exponent_of_metric(model, &metric)?;
    Ok(Optimized {
        metric,
        params: param.with_params(&x),
        report,
        trace: OptimizationTrace {
            rows,
            parameters: x,
            evaluations: search.evaluations,
        },
    })
}
