//! Concrete foliated models and the leafwise differential operators on them.
//!
//! Every model is a single foliated chart with coordinates ordered as
//! `(x_1, y_1, ..., x_n, y_n, t)`. Leaves of the product and patch models are
//! the slices `t = const`; the sheared torus carries the linear foliation
//! `t - λ·y = const`, whose leaves are dense when some `λ_j` is irrational.
//! Fields are stored row-major over that coordinate order.

use std::f64::consts::PI;

use ndarray::{ArrayD, Axis, IxDyn, Zip};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type RealField = ArrayD<f64>;
pub type ComplexField = ArrayD<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    PeriodicProduct,
    PeriodicSheared,
    OpenPatch,
}

impl ModelKind {
    pub fn is_periodic(self) -> bool {
        !matches!(self, ModelKind::OpenPatch)
    }
}

/// Points per axis, in coordinate order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridSpec {
    pub sizes: Vec<usize>,
}

impl GridSpec {
    pub fn new(sizes: Vec<usize>) -> Self {
        Self { sizes }
    }

    pub fn uniform(dim: usize, size: usize) -> Self {
        Self {
            sizes: vec![size; dim],
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Serializable description of a model; also the JSON sidecar written next
/// to field files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: usize,
    pub kind: ModelKind,
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub shear: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[f64; 2]>>,
}

impl ModelSpec {
    pub fn build(&self) -> Result<FoliatedModel> {
        let shear = if self.shear.is_empty() {
            vec![0.0; self.n]
        } else {
            self.shear.clone()
        };
        let bounds = match &self.bounds {
            Some(b) => b.iter().map(|&[lo, hi]| (lo, hi)).collect(),
            None => default_bounds(self.kind, 2 * self.n + 1),
        };
        FoliatedModel::new(
            self.n,
            self.kind,
            GridSpec::new(self.sizes.clone()),
            shear,
            bounds,
        )
    }
}

fn default_bounds(kind: ModelKind, dim: usize) -> Vec<(f64, f64)> {
    let b = if kind.is_periodic() {
        (0.0, 1.0)
    } else {
        (-1.0, 1.0)
    };
    vec![b; dim]
}

/// A validated foliated model. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FoliatedModel {
    n: usize,
    kind: ModelKind,
    grid: GridSpec,
    shear: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    spacing: Vec<f64>,
}

impl FoliatedModel {
    /// Validates and builds a model. Periodic axes cover `[lo, hi)`, patch
    /// axes the closed interval `[lo, hi]`.
    pub fn new(
        n: usize,
        kind: ModelKind,
        grid: GridSpec,
        shear: Vec<f64>,
        bounds: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::InvalidModel(format!(
                "leaf dimension must be 1 or 2, got {n}"
            )));
        }
        let dim = 2 * n + 1;
        if grid.sizes.len() != dim {
            return Err(Error::InvalidModel(format!(
                "expected {dim} grid sizes, got {}",
                grid.sizes.len()
            )));
        }
        if shear.len() != n {
            return Err(Error::InvalidModel(format!(
                "expected {n} shear coefficients, got {}",
                shear.len()
            )));
        }
        if bounds.len() != dim {
            return Err(Error::InvalidModel(format!(
                "expected {dim} axis bounds, got {}",
                bounds.len()
            )));
        }
        if shear.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidModel("shear must be finite".into()));
        }
        let sheared = shear.iter().any(|&l| l != 0.0);
        match kind {
            ModelKind::PeriodicSheared if !sheared => {
                return Err(Error::InvalidModel(
                    "sheared model needs a nonzero shear".into(),
                ))
            }
            ModelKind::PeriodicProduct | ModelKind::OpenPatch if sheared => {
                return Err(Error::InvalidModel(format!(
                    "{kind:?} model must have zero shear"
                )))
            }
            _ => {}
        }
        for (axis, &size) in grid.sizes.iter().enumerate() {
            if size < 4 {
                return Err(Error::InvalidModel(format!(
                    "axis {axis} has {size} points, need at least 4"
                )));
            }
            if kind.is_periodic() && size % 2 != 0 {
                return Err(Error::InvalidModel(format!(
                    "periodic axis {axis} has odd size {size}"
                )));
            }
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidModel(format!(
                    "axis {axis} has invalid bounds [{lo}, {hi}]"
                )));
            }
        }
        let spacing = grid
            .sizes
            .iter()
            .zip(&bounds)
            .map(|(&size, &(lo, hi))| {
                if kind.is_periodic() {
                    (hi - lo) / size as f64
                } else {
                    (hi - lo) / (size - 1) as f64
                }
            })
            .collect();
        Ok(Self {
            n,
            kind,
            grid,
            shear,
            bounds,
            spacing,
        })
    }

    /// Product torus `T^{2n+1}` with `size` points per axis.
    pub fn product_torus(n: usize, size: usize) -> Result<Self> {
        Self::new(
            n,
            ModelKind::PeriodicProduct,
            GridSpec::uniform(2 * n + 1, size),
            vec![0.0; n],
            default_bounds(ModelKind::PeriodicProduct, 2 * n + 1),
        )
    }

    pub fn sheared_torus(n: usize, size: usize, shear: Vec<f64>) -> Result<Self> {
        Self::new(
            n,
            ModelKind::PeriodicSheared,
            GridSpec::uniform(2 * n + 1, size),
            shear,
            default_bounds(ModelKind::PeriodicSheared, 2 * n + 1),
        )
    }

    /// Local patch `[-1, 1]^{2n+1}`.
    pub fn patch(n: usize, size: usize) -> Result<Self> {
        Self::new(
            n,
            ModelKind::OpenPatch,
            GridSpec::uniform(2 * n + 1, size),
            vec![0.0; n],
            default_bounds(ModelKind::OpenPatch, 2 * n + 1),
        )
    }

    pub fn spec(&self) -> ModelSpec {
        ModelSpec {
            n: self.n,
            kind: self.kind,
            sizes: self.grid.sizes.clone(),
            shear: self.shear.clone(),
            bounds: Some(self.bounds.iter().map(|&(lo, hi)| [lo, hi]).collect()),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Real dimension `2n + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn shape(&self) -> &[usize] {
        &self.grid.sizes
    }

    pub fn shear(&self) -> &[f64] {
        &self.shear
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// True for the compact (fully periodic) models.
    pub fn is_compact(&self) -> bool {
        self.kind.is_periodic()
    }

    pub fn x_axis(&self, j: usize) -> usize {
        2 * (j - 1)
    }

    pub fn y_axis(&self, j: usize) -> usize {
        2 * (j - 1) + 1
    }

    pub fn t_axis(&self) -> usize {
        2 * self.n
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn coordinate(&self, axis: usize, index: usize) -> f64 {
        self.bounds[axis].0 + index as f64 * self.spacing[axis]
    }

    /// Samples `f` at every grid point.
    pub fn sample<F>(&self, f: F) -> RealField
    where
        F: Fn(&[f64]) -> f64,
    {
        let mut x = vec![0.0; self.dim()];
        ArrayD::from_shape_fn(IxDyn(self.shape()), |idx| {
            for (axis, xi) in x.iter_mut().enumerate() {
                *xi = self.coordinate(axis, idx[axis]);
            }
            f(&x)
        })
    }

    pub fn sample_complex<F>(&self, f: F) -> ComplexField
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let mut x = vec![0.0; self.dim()];
        ArrayD::from_shape_fn(IxDyn(self.shape()), |idx| {
            for (axis, xi) in x.iter_mut().enumerate() {
                *xi = self.coordinate(axis, idx[axis]);
            }
            f(&x)
        })
    }

    pub fn zeros(&self) -> ComplexField {
        ArrayD::zeros(IxDyn(self.shape()))
    }

    pub fn check_shape(&self, shape: &[usize]) -> Result<()> {
        if shape != self.shape() {
            return Err(Error::SizeMismatch {
                expected: self.shape().to_vec(),
                found: shape.to_vec(),
            });
        }
        Ok(())
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim(),
            });
        }
        Ok(())
    }

    /// Coordinate partial derivative of a real field along `axis`.
    ///
    /// Periodic axes use the discrete Fourier derivative with the Nyquist
    /// mode of the derivative set to zero; patch axes use second-order
    /// central differences with second-order one-sided stencils at the ends.
    pub fn partial_derivative(&self, f: &RealField, axis: usize) -> Result<RealField> {
        self.check_shape(f.shape())?;
        self.check_axis(axis)?;
        let out = if self.kind.is_periodic() {
            self.spectral_derivative(f, axis)
        } else {
            self.finite_difference(f, axis)
        };
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("derivative along axis {axis}")));
        }
        Ok(out)
    }

    /// Partial derivative of a complex field, applied to the real and
    /// imaginary parts separately so that conjugation commutes with it
    /// bit for bit.
    pub fn partial_derivative_complex(
        &self,
        f: &ComplexField,
        axis: usize,
    ) -> Result<ComplexField> {
        self.check_shape(f.shape())?;
        let re = f.mapv(|z| z.re);
        let d_re = self.partial_derivative(&re, axis)?;
        if f.iter().all(|z| z.im == 0.0) {
            return Ok(d_re.mapv(|v| Complex64::new(v, 0.0)));
        }
        let im = f.mapv(|z| z.im);
        let d_im = self.partial_derivative(&im, axis)?;
        let mut out = self.zeros();
        Zip::from(&mut out)
            .and(&d_re)
            .and(&d_im)
            .par_for_each(|o, &a, &b| *o = Complex64::new(a, b));
        Ok(out)
    }

    fn spectral_derivative(&self, f: &RealField, axis: usize) -> RealField {
        let size = self.grid.sizes[axis];
        let (lo, hi) = self.bounds[axis];
        let period = hi - lo;
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let multipliers: Vec<f64> = (0..size)
            .map(|k| {
                let freq = if k < size / 2 {
                    k as f64
                } else if k == size / 2 {
                    0.0
                } else {
                    k as f64 - size as f64
                };
                2.0 * PI * freq / period
            })
            .collect();
        let norm = 1.0 / size as f64;

        let mut out = ArrayD::<f64>::zeros(f.raw_dim());
        Zip::from(out.lanes_mut(Axis(axis)))
            .and(f.lanes(Axis(axis)))
            .par_for_each(|mut dst, src| {
                let mut buf: Vec<Complex64> =
                    src.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                forward.process(&mut buf);
                for (c, &m) in buf.iter_mut().zip(&multipliers) {
                    // multiply by i*m
                    *c = Complex64::new(-m * c.im, m * c.re);
                }
                inverse.process(&mut buf);
                for (d, c) in dst.iter_mut().zip(&buf) {
                    *d = c.re * norm;
                }
            });
        out
    }

    fn finite_difference(&self, f: &RealField, axis: usize) -> RealField {
        let size = self.grid.sizes[axis];
        let inv = 1.0 / (2.0 * self.spacing[axis]);
        let mut out = ArrayD::<f64>::zeros(f.raw_dim());
        Zip::from(out.lanes_mut(Axis(axis)))
            .and(f.lanes(Axis(axis)))
            .par_for_each(|mut dst, src| {
                dst[0] = (-3.0 * src[0] + 4.0 * src[1] - src[2]) * inv;
                for i in 1..size - 1 {
                    dst[i] = (src[i + 1] - src[i - 1]) * inv;
                }
                let m = size - 1;
                dst[m] = (3.0 * src[m] - 4.0 * src[m - 1] + src[m - 2]) * inv;
            });
        out
    }

    /// Leafwise Wirtinger derivative `∂f/∂z^j` (or `∂f/∂z̄^j` when
    /// `conjugate`), with `1 <= j <= n`. On the sheared model the leaf
    /// direction of `y_j` is `∂/∂y_j + λ_j ∂/∂t`.
    pub fn wirtinger(&self, f: &ComplexField, j: usize, conjugate: bool) -> Result<ComplexField> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: self.n,
            });
        }
        let p = self.partial_derivative_complex(f, self.x_axis(j))?;
        let mut q = self.partial_derivative_complex(f, self.y_axis(j))?;
        let lambda = self.shear[j - 1];
        if lambda != 0.0 {
            let dt = self.partial_derivative_complex(f, self.t_axis())?;
            Zip::from(&mut q).and(&dt).par_for_each(|q, &d| {
                *q = Complex64::new(q.re + lambda * d.re, q.im + lambda * d.im);
            });
        }
        let mut out = p;
        // ½(P ∓ iQ), written componentwise
        if conjugate {
            Zip::from(&mut out).and(&q).par_for_each(|o, q| {
                *o = Complex64::new(0.5 * (o.re - q.im), 0.5 * (o.im + q.re));
            });
        } else {
            Zip::from(&mut out).and(&q).par_for_each(|o, q| {
                *o = Complex64::new(0.5 * (o.re + q.im), 0.5 * (o.im - q.re));
            });
        }
        Ok(out)
    }

    /// Wirtinger derivative of a real field.
    pub fn wirtinger_real(&self, f: &RealField, j: usize, conjugate: bool) -> Result<ComplexField> {
        self.wirtinger(&f.mapv(|v| Complex64::new(v, 0.0)), j, conjugate)
    }

    /// Transverse positions (mod 1) at which the leaf through the origin
    /// returns to the transversal `{x = 0, y ∈ ℤ^n}`, for all lattice steps
    /// `0 <= m_j < count`. For the product model every return is 0.
    pub fn leaf_returns(&self, count: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let mut steps = vec![0usize; self.n];
        loop {
            let tau: f64 = steps
                .iter()
                .zip(&self.shear)
                .map(|(&m, &l)| m as f64 * l)
                .sum();
            out.push(tau.rem_euclid(1.0));
            let mut k = 0;
            loop {
                if k == self.n {
                    return out;
                }
                steps[k] += 1;
                if steps[k] < count {
                    break;
                }
                steps[k] = 0;
                k += 1;
            }
        }
    }
}
