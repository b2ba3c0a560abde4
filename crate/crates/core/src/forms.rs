//! Connection, curvature and transverse forms of the normal bundle.
//!
//! With `u = log h` on the single foliated chart,
//!
//! ```text
//! α = Σ_j ∂u/∂z^j dz^j
//! Θ = Σ_{j,k} -∂²u/∂z^j∂z̄^k dz^j ∧ dz̄^k
//! η = e^u dτ,    dτ = dt - Σ_j λ_j dy_j
//! ```
//!
//! with `dz^j = dx_j + i dy_j`, so that `i dz ∧ dz̄ = 2 dx ∧ dy`.

use ndarray::{ArrayD, IxDyn, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exterior::{self, DifferentialForm};
use crate::model::{ComplexField, FoliatedModel, RealField};
use crate::tolerances;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `u = log h`, where `h` is the norm of the transverse vector `∂/∂t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    u: RealField,
}

impl MetricField {
    pub fn new(model: &FoliatedModel, u: RealField) -> Result<Self> {
        model.check_shape(u.shape())?;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("metric field".into()));
        }
        Ok(Self { u })
    }

    pub fn zero(model: &FoliatedModel) -> Self {
        Self {
            u: ArrayD::zeros(IxDyn(model.shape())),
        }
    }

    pub fn from_fn<F>(model: &FoliatedModel, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        Self::new(model, model.sample(f))
    }

    pub fn log_h(&self) -> &RealField {
        &self.u
    }

    pub fn into_inner(self) -> RealField {
        self.u
    }

    /// `u + φ`, for a field `φ` of the same shape.
    pub fn shifted(&self, phi: &RealField) -> Result<Self> {
        if phi.shape() != self.u.shape() {
            return Err(Error::SizeMismatch {
                expected: self.u.shape().to_vec(),
                found: phi.shape().to_vec(),
            });
        }
        Ok(Self { u: &self.u + phi })
    }
}

/// `α_j = ∂u/∂z^j` per grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaVectorField {
    pub components: Vec<ComplexField>,
}

/// Hermitian `Θ_{jk̄}` per grid point, stored row-major as `n*n` fields.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaMatrixField {
    n: usize,
    entries: Vec<ComplexField>,
}

impl ThetaMatrixField {
    /// Wraps `n*n` row-major entries without symmetrizing.
    pub fn from_entries(n: usize, entries: Vec<ComplexField>) -> Self {
        assert_eq!(entries.len(), n * n, "expected n*n entries");
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, j: usize, k: usize) -> &ComplexField {
        &self.entries[j * self.n + k]
    }

    /// `max |Θ_{jk̄} - conj(Θ_{kj̄})|` over the grid.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for k in 0..self.n {
                for (a, b) in self.entry(j, k).iter().zip(self.entry(k, j).iter()) {
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    /// `max |Θ_{jk̄}|` over entries and grid points.
    pub fn sup_norm(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|f| f.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Grid mean of `Re tr Θ`.
    pub fn mean_trace(&self) -> f64 {
        let len = self.entries[0].len() as f64;
        (0..self.n)
            .map(|j| self.entry(j, j).iter().map(|z| z.re).sum::<f64>())
            .sum::<f64>()
            / len
    }
}

pub fn alpha_vector(model: &FoliatedModel, m: &MetricField) -> Result<AlphaVectorField> {
    model.check_shape(m.u.shape())?;
    let components = (1..=model.n())
        .map(|j| model.wirtinger_real(&m.u, j, false))
        .collect::<Result<_>>()?;
    Ok(AlphaVectorField { components })
}

/// `Θ_{jk̄} = -∂_{z^j}(∂_{z̄^k} u)`, symmetrized to be exactly hermitian.
pub fn theta_matrix(
    model: &FoliatedModel,
    alpha: &AlphaVectorField,
) -> Result<ThetaMatrixField> {
    let n = model.n();
    let mut raw = Vec::with_capacity(n * n);
    for j in 1..=n {
        for k in 0..n {
            // ∂u/∂z̄^k = conj(α_k) exactly for real u
            let dzbar = alpha.components[k].mapv(|z| z.conj());
            let mut e = model.wirtinger(&dzbar, j, false)?;
            e.mapv_inplace(|z| -z);
            raw.push(e);
        }
    }
    let mut entries = raw.clone();
    for j in 0..n {
        for k in 0..n {
            let sym = &mut entries[j * n + k];
            Zip::from(sym)
                .and(&raw[j * n + k])
                .and(&raw[k * n + j])
                .par_for_each(|s, &a, &b| {
                    *s = if j == k {
                        Complex64::new(a.re, 0.0)
                    } else {
                        0.5 * (a + b.conj())
                    };
                });
        }
    }
    Ok(ThetaMatrixField { n, entries })
}

fn add_scaled(
    form: &mut DifferentialForm,
    a: usize,
    b: usize,
    coef: Complex64,
    field: &ComplexField,
) -> Result<()> {
    if a == b {
        return Ok(());
    }
    let (tuple, c) = if a < b {
        (vec![a, b], coef)
    } else {
        (vec![b, a], -coef)
    };
    form.add_component(tuple, field.mapv(|z| c * z))
}

/// `Σ_{j,k} A_{jk} dz^j ∧ dz̄^k` expanded into real components.
pub fn leaf_two_form(
    model: &FoliatedModel,
    coeff: impl Fn(usize, usize) -> ComplexField,
) -> Result<DifferentialForm> {
    let mut form = DifferentialForm::zero(model, 2)?;
    for j in 1..=model.n() {
        for k in 1..=model.n() {
            let f = coeff(j - 1, k - 1);
            let (xj, yj) = (model.x_axis(j), model.y_axis(j));
            let (xk, yk) = (model.x_axis(k), model.y_axis(k));
            // (dx_j + i dy_j) ∧ (dx_k - i dy_k)
            add_scaled(&mut form, xj, xk, Complex64::new(1.0, 0.0), &f)?;
            add_scaled(&mut form, xj, yk, -I, &f)?;
            add_scaled(&mut form, yj, xk, I, &f)?;
            add_scaled(&mut form, yj, yk, Complex64::new(1.0, 0.0), &f)?;
        }
    }
    Ok(form)
}

/// All forms derived from one metric, computed once.
#[derive(Clone, Debug)]
pub struct GeometricForms {
    pub alpha_vector: AlphaVectorField,
    pub theta_matrix: ThetaMatrixField,
    /// `α` as a 1-form.
    pub alpha: DifferentialForm,
    /// `Θ` as a 2-form.
    pub theta: DifferentialForm,
    pub eta: DifferentialForm,
}

impl GeometricForms {
    pub fn new(model: &FoliatedModel, m: &MetricField) -> Result<Self> {
        let alpha_vector = alpha_vector(model, m)?;
        let theta_matrix = theta_matrix(model, &alpha_vector)?;
        let alpha = alpha_form_from(model, &alpha_vector)?;
        let theta = leaf_two_form(model, |j, k| theta_matrix.entry(j, k).clone())?;
        let eta = eta_form(model, m)?;
        Ok(Self {
            alpha_vector,
            theta_matrix,
            alpha,
            theta,
            eta,
        })
    }

    /// `iΘ - c iα∧ᾱ`.
    pub fn curvature_factor(&self, c: f64) -> Result<DifferentialForm> {
        let aa = exterior::wedge(&self.alpha, &exterior::conj(&self.alpha))?;
        exterior::sub(
            &exterior::scale(I, &self.theta),
            &exterior::scale(I * c, &aa),
        )
    }

    /// `(iΘ - c iα∧ᾱ)^n ∧ η`, checked to be real.
    pub fn bulk(&self, model: &FoliatedModel, c: f64) -> Result<DifferentialForm> {
        if !c.is_finite() {
            return Err(Error::Config(format!("bulk coefficient must be finite, got {c}")));
        }
        let factor = self.curvature_factor(c)?;
        let power = exterior::wedge_power(model, &factor, model.n())?;
        let bulk = exterior::wedge(&power, &self.eta)?;
        check_real(&bulk, "bulk form")?;
        Ok(bulk)
    }

    /// `(iΘ - c iα∧ᾱ)^{n-1} ∧ iα ∧ η`; the empty power is 1.
    pub fn boundary(&self, model: &FoliatedModel, c: f64) -> Result<DifferentialForm> {
        let factor = self.curvature_factor(c)?;
        let power = exterior::wedge_power(model, &factor, model.n() - 1)?;
        let ia = exterior::scale(I, &self.alpha);
        exterior::wedge(&exterior::wedge(&power, &ia)?, &self.eta)
    }
}

fn alpha_form_from(model: &FoliatedModel, alpha: &AlphaVectorField) -> Result<DifferentialForm> {
    let mut form = DifferentialForm::zero(model, 1)?;
    for (j, a) in alpha.components.iter().enumerate() {
        form.add_component(vec![model.x_axis(j + 1)], a.clone())?;
        form.add_component(vec![model.y_axis(j + 1)], a.mapv(|z| I * z))?;
    }
    Ok(form)
}

fn check_real(form: &DifferentialForm, context: &str) -> Result<()> {
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for (_, f) in form.components() {
        for z in f.iter() {
            re = re.max(z.re.abs());
            im = im.max(z.im.abs());
        }
    }
    let bound = tolerances::BULK_IMAGINARY * re + tolerances::RESIDUAL_FLOOR;
    if im > bound {
        return Err(Error::ImaginaryPart {
            context: context.into(),
            imag: im,
            bound,
        });
    }
    Ok(())
}

/// `α = Σ_j α_j (dx_j + i dy_j)`.
pub fn alpha_form(model: &FoliatedModel, m: &MetricField) -> Result<DifferentialForm> {
    alpha_form_from(model, &alpha_vector(model, m)?)
}

/// The curvature 2-form and its coefficient matrix.
pub fn theta_form(
    model: &FoliatedModel,
    m: &MetricField,
) -> Result<(DifferentialForm, ThetaMatrixField)> {
    let theta = theta_matrix(model, &alpha_vector(model, m)?)?;
    let form = leaf_two_form(model, |j, k| theta.entry(j, k).clone())?;
    Ok((form, theta))
}

/// `η = e^u dτ`.
pub fn eta_form(model: &FoliatedModel, m: &MetricField) -> Result<DifferentialForm> {
    model.check_shape(m.u.shape())?;
    let h = m.u.mapv(|v| Complex64::new(v.exp(), 0.0));
    let mut form = DifferentialForm::zero(model, 1)?;
    for (j, &lambda) in model.shear().iter().enumerate() {
        if lambda != 0.0 {
            form.add_component(vec![model.y_axis(j + 1)], h.mapv(|z| -lambda * z))?;
        }
    }
    form.add_component(vec![model.t_axis()], h)?;
    Ok(form)
}

pub fn bulk_form(model: &FoliatedModel, m: &MetricField, c: f64) -> Result<DifferentialForm> {
    GeometricForms::new(model, m)?.bulk(model, c)
}

pub fn boundary_form(model: &FoliatedModel, m: &MetricField, c: f64) -> Result<DifferentialForm> {
    GeometricForms::new(model, m)?.boundary(model, c)
}

/// Real part of the single top component of a degree-`2n+1` form.
pub fn top_density(model: &FoliatedModel, form: &DifferentialForm) -> Result<RealField> {
    if form.degree() != model.dim() {
        return Err(Error::WrongDegree {
            expected: model.dim(),
            found: form.degree(),
        });
    }
    let top: Vec<usize> = (0..model.dim()).collect();
    Ok(match form.component(&top) {
        Some(f) => f.mapv(|z| z.re),
        None => ArrayD::zeros(IxDyn(model.shape())),
    })
}
