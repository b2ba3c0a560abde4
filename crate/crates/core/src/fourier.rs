//! Band-limited Fourier families of metrics.
//!
//! A metric is parameterized as
//!
//! ```text
//! u(ξ) = A · Σ_{0 < |k|∞ ≤ K} Re(c_k e^{2πi k·ξ}) / (1 + |k|²)^p
//! ```
//!
//! where `ξ` are the coordinates rescaled to `[0, 1]` per axis and
//! `c_{-k} = conj(c_k)`. Only the canonical half of the frequencies (first
//! nonzero entry positive) is stored, in lexicographic order; `c_0` is a
//! gauge and is omitted. Seeded coefficients come from one SplitMix64 stream
//! consumed in that order, two uniform draws in `[-1, 1)` per frequency.

use ndarray::{ArrayD, Axis, IxDyn, Zip};
use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{FoliatedModel, RealField};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierParam {
    /// Per-axis frequency cutoff `K`.
    pub cutoff: usize,
    /// Smoothing exponent `p`.
    pub smoothness: f64,
    pub amplitude: f64,
    /// One coefficient per canonical frequency, see [`half_frequencies`].
    pub coefficients: Vec<Complex64>,
}

/// Canonical frequencies `k ∈ [-K, K]^dim` whose first nonzero entry is
/// positive, in lexicographic order.
pub fn half_frequencies(dim: usize, cutoff: usize) -> Vec<Vec<i64>> {
    let k = cutoff as i64;
    let mut out = Vec::new();
    let mut cur = vec![-k; dim];
    loop {
        if let Some(&first) = cur.iter().find(|&&v| v != 0) {
            if first > 0 {
                out.push(cur.clone());
            }
        }
        let mut a = dim;
        loop {
            if a == 0 {
                return out;
            }
            a -= 1;
            if cur[a] < k {
                cur[a] += 1;
                break;
            }
            cur[a] = -k;
        }
    }
}

fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * 2.0 - 1.0
}

impl FourierParam {
    /// Coefficients drawn from SplitMix64 seeded with `seed`.
    pub fn seeded(dim: usize, cutoff: usize, smoothness: f64, amplitude: f64, seed: u64) -> Self {
        let mut rng = SplitMix64::seed_from_u64(seed);
        let coefficients = half_frequencies(dim, cutoff)
            .iter()
            .map(|_| {
                let re = uniform(&mut rng);
                let im = uniform(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        Self {
            cutoff,
            smoothness,
            amplitude,
            coefficients,
        }
    }

    pub fn zeros(dim: usize, cutoff: usize, smoothness: f64, amplitude: f64) -> Self {
        Self {
            cutoff,
            smoothness,
            amplitude,
            coefficients: vec![Complex64::new(0.0, 0.0); half_frequencies(dim, cutoff).len()],
        }
    }

    /// Real parameter vector `(Re c_k, Im c_k)` per frequency.
    pub fn to_params(&self) -> Vec<f64> {
        self.coefficients.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn with_params(&self, params: &[f64]) -> Self {
        Self {
            coefficients: params
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
            ..self.clone()
        }
    }

    /// Requires `cutoff ≤ size/4` on every axis.
    pub fn check(&self, model: &FoliatedModel) -> Result<()> {
        if let Some(&size) = model.shape().iter().find(|&&s| self.cutoff > s / 4) {
            return Err(Error::Config(format!(
                "cutoff {} exceeds size/4 for an axis of size {size}",
                self.cutoff
            )));
        }
        let expected = half_frequencies(model.dim(), self.cutoff).len();
        if self.coefficients.len() != expected {
            return Err(Error::Config(format!(
                "expected {expected} coefficients, got {}",
                self.coefficients.len()
            )));
        }
        if !(self.smoothness.is_finite() && self.amplitude.is_finite()) {
            return Err(Error::Config("smoothness and amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Samples `u` on the model grid.
    pub fn synthesize(&self, model: &FoliatedModel) -> Result<RealField> {
        self.check(model)?;
        let dim = model.dim();
        let k = self.cutoff as i64;
        let width = 2 * self.cutoff + 1;
        // full coefficient tensor over [-K, K]^dim, weights included
        let mut spectrum = ArrayD::<Complex64>::zeros(IxDyn(&vec![width; dim]));
        for (freq, c) in half_frequencies(dim, self.cutoff).iter().zip(&self.coefficients) {
            let norm2: i64 = freq.iter().map(|v| v * v).sum();
            let w = self.amplitude / (1.0 + norm2 as f64).powf(self.smoothness);
            let pos: Vec<usize> = freq.iter().map(|&v| (v + k) as usize).collect();
            let neg: Vec<usize> = freq.iter().map(|&v| (k - v) as usize).collect();
            // k and -k each contribute Re(c e^{iθ}) = ½(c e^{iθ} + c̄ e^{-iθ})
            spectrum[IxDyn(&pos)] = w * c;
            spectrum[IxDyn(&neg)] = w * c.conj();
        }
        // contract one axis at a time against e^{2πi k ξ}
        let mut acc = spectrum;
        for axis in 0..dim {
            let size = model.shape()[axis];
            let denom = if model.is_compact() { size } else { size - 1 } as f64;
            let basis: Vec<Vec<Complex64>> = (0..size)
                .map(|i| {
                    (-k..=k)
                        .map(|f| {
                            let phase = if model.is_compact() {
                                // reduce exactly before scaling
                                (f * i as i64).rem_euclid(size as i64) as f64 / denom
                            } else {
                                f as f64 * i as f64 / denom
                            };
                            Complex64::from_polar(1.0, 2.0 * PI * phase)
                        })
                        .collect()
                })
                .collect();
            let mut shape = acc.shape().to_vec();
            shape[axis] = size;
            let mut next = ArrayD::<Complex64>::zeros(IxDyn(&shape));
            Zip::from(next.lanes_mut(Axis(axis)))
                .and(acc.lanes(Axis(axis)))
                .par_for_each(|mut dst, src| {
                    for (d, row) in dst.iter_mut().zip(&basis) {
                        let mut s = Complex64::new(0.0, 0.0);
                        for (b, c) in row.iter().zip(src.iter()) {
                            s += b * c;
                        }
                        *d = s;
                    }
                });
            acc = next;
        }
        Ok(acc.mapv(|z| z.re))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_set_is_canonical() {
        let freqs = half_frequencies(2, 1);
        assert_eq!(freqs, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert_eq!(half_frequencies(3, 2).len(), (125 - 1) / 2);
    }

    #[test]
    fn splitmix_reference_values() {
        // reference outputs of SplitMix64 seeded with 0
        let mut rng = SplitMix64::seed_from_u64(0);
        assert_eq!(rng.next_u64(), 0xe220a8397b1dcdaf);
        assert_eq!(rng.next_u64(), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let model = FoliatedModel::product_torus(1, 16).unwrap();
        let u = FourierParam::seeded(3, 3, 2.0, 0.0, 7).synthesize(&model).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn matches_direct_summation() {
        let model = FoliatedModel::product_torus(1, 8).unwrap();
        let p = FourierParam::seeded(3, 2, 1.5, 0.7, 42);
        let u = p.synthesize(&model).unwrap();
        let freqs = half_frequencies(3, 2);
        let direct = model.sample(|x| {
            freqs
                .iter()
                .zip(&p.coefficients)
                .map(|(f, c)| {
                    let n2: i64 = f.iter().map(|v| v * v).sum();
                    let phase: f64 = f.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                    2.0 * p.amplitude * (c * Complex64::from_polar(1.0, 2.0 * PI * phase)).re
                        / (1.0 + n2 as f64).powf(p.smoothness)
                })
                .sum()
        });
        let err = u.iter().zip(direct.iter()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(err < 1e-13, "{err}");
    }

    #[test]
    fn cutoff_above_quarter_grid_is_rejected() {
        let model = FoliatedModel::product_torus(1, 8).unwrap();
        assert!(matches!(
            FourierParam::seeded(3, 3, 2.0, 1.0, 1).synthesize(&model),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn params_round_trip() {
        let p = FourierParam::seeded(3, 1, 2.0, 1.0, 9);
        assert_eq!(p.with_params(&p.to_params()), p);
    }

    #[test]
    fn deterministic() {
        let model = FoliatedModel::patch(1, 9).unwrap();
        let a = FourierParam::seeded(3, 2, 2.0, 0.5, 3).synthesize(&model).unwrap();
        let b = FourierParam::seeded(3, 2, 2.0, 0.5, 3).synthesize(&model).unwrap();
        assert_eq!(a, b);
    }
}
