#![allow(dead_code)]

use levi_flat::exterior::DifferentialForm;
use levi_flat::forms::MetricField;
use levi_flat::fourier::FourierParam;
use levi_flat::model::{ComplexField, FoliatedModel};
use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub const SQRT2_MINUS_1: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Metric family used for the compact-model checks: cutoff 4 on `T³`,
/// cutoff 1 on `T⁵` (the degree-5 bulk product aliases above that at 16⁵).
pub fn seeded_metric(model: &FoliatedModel, seed: u64) -> MetricField {
    let (cutoff, amplitude) = if model.n() == 1 { (4, 0.5) } else { (1, 0.15) };
    let u = FourierParam::seeded(model.dim(), cutoff, 2.0, amplitude, seed)
        .synthesize(model)
        .unwrap();
    MetricField::new(model, u).unwrap()
}

/// Quadratic patch metric plus a small seeded Fourier bump.
pub fn patch_metric(model: &FoliatedModel, seed: u64) -> MetricField {
    let n = model.n();
    let base = model.sample(|x| -(0..2 * n).map(|a| x[a] * x[a]).sum::<f64>());
    let bump = FourierParam::seeded(model.dim(), 1, 2.0, 0.05, seed)
        .synthesize(model)
        .unwrap();
    MetricField::new(model, base + bump).unwrap()
}

pub fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Complex band-limited field with independent real and imaginary parts.
pub fn band_limited(model: &FoliatedModel, cutoff: usize, seed: u64) -> ComplexField {
    let re = FourierParam::seeded(model.dim(), cutoff, 1.0, 1.0, seed).synthesize(model).unwrap();
    let im = FourierParam::seeded(model.dim(), cutoff, 1.0, 1.0, seed ^ 0xabcdef).synthesize(model).unwrap();
    ndarray::Zip::from(&re).and(&im).map_collect(|&a, &b| Complex64::new(a, b))
}

/// All strictly increasing `degree`-tuples of `0..dim`.
pub fn tuples(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for a in start..dim {
            cur.push(a);
            rec(a + 1, dim, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, degree, &mut Vec::new(), &mut out);
    out
}

/// A form of the given degree whose components are independent seeded
/// band-limited fields; roughly half of the tuples are populated.
pub fn seeded_form(model: &FoliatedModel, degree: usize, cutoff: usize, seed: u64) -> DifferentialForm {
    let mut rng = SplitMix64::seed_from_u64(seed);
    let all = tuples(model.dim(), degree);
    let mut form = DifferentialForm::zero(model, degree).unwrap();
    for (i, t) in all.iter().enumerate() {
        if i == 0 || rng.next_u64() & 1 == 1 {
            let field = band_limited(model, cutoff, rng.next_u64());
            form.add_component(t.clone(), field).unwrap();
        }
    }
    form
}
