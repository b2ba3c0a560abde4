//! Differential forms on a model grid, stored in real coordinate components.
//!
//! A degree-`k` form is a map from strictly increasing coordinate tuples of
//! length `k` to complex component fields; absent tuples are zero. The
//! engine knows nothing about complex structure: `dz`/`dz̄` combinations are
//! assembled by the caller.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use ndarray::{ArrayD, IxDyn, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, FieldData};
use crate::model::{ComplexField, FoliatedModel};

/// Strictly increasing coordinate indices.
pub type Tuple = Vec<usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct DifferentialForm {
    dim: usize,
    degree: usize,
    shape: Vec<usize>,
    components: BTreeMap<Tuple, ComplexField>,
}

fn mask(t: &[usize]) -> u64 {
    t.iter().fold(0, |m, &i| m | (1 << i))
}

/// Sign of the permutation sorting the concatenation `i ++ j` of two
/// disjoint increasing tuples.
fn merge_sign(i: &[usize], j: &[usize]) -> bool {
    let inversions: usize = i
        .iter()
        .map(|&a| j.iter().filter(|&&b| b < a).count())
        .sum();
    inversions % 2 == 1
}

fn merged(i: &[usize], j: &[usize]) -> Tuple {
    let mut k: Tuple = i.iter().chain(j).copied().collect();
    k.sort_unstable();
    k
}

impl DifferentialForm {
    pub fn zero(model: &FoliatedModel, degree: usize) -> Result<Self> {
        Self::empty(model.dim(), degree, model.shape().to_vec())
    }

    fn empty(dim: usize, degree: usize, shape: Vec<usize>) -> Result<Self> {
        if degree > dim {
            return Err(Error::DegreeOverflow { degree, dim });
        }
        Ok(Self {
            dim,
            degree,
            shape,
            components: BTreeMap::new(),
        })
    }

    pub fn from_components<I>(model: &FoliatedModel, degree: usize, components: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Tuple, ComplexField)>,
    {
        let mut form = Self::zero(model, degree)?;
        for (tuple, field) in components {
            form.add_component(tuple, field)?;
        }
        Ok(form)
    }

    /// The 0-form `f`.
    pub fn scalar(model: &FoliatedModel, f: ComplexField) -> Result<Self> {
        Self::from_components(model, 0, [(vec![], f)])
    }

    /// The 1-form `f dx_axis`.
    pub fn one_form(model: &FoliatedModel, axis: usize, f: ComplexField) -> Result<Self> {
        Self::from_components(model, 1, [(vec![axis], f)])
    }

    /// Adds `field` to the component at `tuple`.
    pub fn add_component(&mut self, tuple: Tuple, field: ComplexField) -> Result<()> {
        if tuple.len() != self.degree
            || tuple.windows(2).any(|w| w[0] >= w[1])
            || tuple.iter().any(|&i| i >= self.dim)
        {
            return Err(Error::InvalidTuple(tuple));
        }
        if field.shape() != self.shape.as_slice() {
            return Err(Error::SizeMismatch {
                expected: self.shape.clone(),
                found: field.shape().to_vec(),
            });
        }
        match self.components.get_mut(&tuple) {
            Some(existing) => *existing += &field,
            None => {
                self.components.insert(tuple, field);
            }
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn component(&self, tuple: &[usize]) -> Option<&ComplexField> {
        self.components.get(tuple)
    }

    pub fn components(&self) -> impl Iterator<Item = (&Tuple, &ComplexField)> {
        self.components.iter()
    }

    /// Largest modulus over all components and grid points.
    pub fn sup_norm(&self) -> f64 {
        self.components
            .values()
            .flat_map(|f| f.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.shape != other.shape {
            return Err(Error::SizeMismatch {
                expected: self.shape.clone(),
                found: other.shape.clone(),
            });
        }
        Ok(())
    }
}

pub fn conj(a: &DifferentialForm) -> DifferentialForm {
    DifferentialForm {
        components: a
            .components
            .iter()
            .map(|(t, f)| (t.clone(), f.mapv(|z| z.conj())))
            .collect(),
        ..a.clone_empty()
    }
}

impl DifferentialForm {
    fn clone_empty(&self) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            shape: self.shape.clone(),
            components: BTreeMap::new(),
        }
    }
}

pub fn add(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    a.same_space(b)?;
    if a.degree != b.degree {
        return Err(Error::DegreeMismatch(a.degree, b.degree));
    }
    let mut out = a.clone();
    for (t, f) in &b.components {
        out.add_component(t.clone(), f.clone())?;
    }
    Ok(out)
}

pub fn sub(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    add(a, &scale(Complex64::new(-1.0, 0.0), b))
}

pub fn scale(c: Complex64, a: &DifferentialForm) -> DifferentialForm {
    DifferentialForm {
        components: a
            .components
            .iter()
            .map(|(t, f)| (t.clone(), f.mapv(|z| c * z)))
            .collect(),
        ..a.clone_empty()
    }
}

/// Multiplies every component pointwise by the scalar field `f`.
pub fn multiply(f: &ComplexField, a: &DifferentialForm) -> Result<DifferentialForm> {
    if f.shape() != a.shape.as_slice() {
        return Err(Error::SizeMismatch {
            expected: a.shape.clone(),
            found: f.shape().to_vec(),
        });
    }
    Ok(DifferentialForm {
        components: a
            .components
            .iter()
            .map(|(t, g)| (t.clone(), g * f))
            .collect(),
        ..a.clone_empty()
    })
}

struct Term<'a> {
    negative: bool,
    left: &'a ComplexField,
    right: &'a ComplexField,
}

/// Exterior product.
///
/// Contributions to each output component are summed in an order that
/// depends only on the unordered pair of input tuples, so
/// `wedge(a, b) == ±wedge(b, a)` holds bit for bit.
pub fn wedge(a: &DifferentialForm, b: &DifferentialForm) -> Result<DifferentialForm> {
    a.same_space(b)?;
    let degree = a.degree + b.degree;
    if degree > a.dim {
        return Err(Error::DegreeOverflow {
            degree,
            dim: a.dim,
        });
    }
    // output tuple -> (unordered mask pair -> terms)
    let mut groups: BTreeMap<Tuple, BTreeMap<(u64, u64), Vec<Term<'_>>>> = BTreeMap::new();
    for (i, fa) in &a.components {
        let mi = mask(i);
        for (j, fb) in &b.components {
            let mj = mask(j);
            if mi & mj != 0 {
                continue;
            }
            groups
                .entry(merged(i, j))
                .or_default()
                .entry((mi.min(mj), mi.max(mj)))
                .or_default()
                .push(Term {
                    negative: merge_sign(i, j),
                    left: fa,
                    right: fb,
                });
        }
    }
    let mut out = DifferentialForm::empty(a.dim, degree, a.shape.clone())?;
    for (k, group) in groups {
        let mut acc: ComplexField = ArrayD::zeros(IxDyn(&a.shape));
        for terms in group.values() {
            match terms.as_slice() {
                [t] => {
                    Zip::from(&mut acc)
                        .and(t.left)
                        .and(t.right)
                        .par_for_each(|o, &x, &y| {
                            let p = x * y;
                            if t.negative {
                                *o -= p
                            } else {
                                *o += p
                            }
                        });
                }
                [s, t] => {
                    // equal-degree factors can hit the same mask pair twice;
                    // summing the pair first keeps the result order-free
                    Zip::from(&mut acc)
                        .and(s.left)
                        .and(s.right)
                        .and(t.left)
                        .and(t.right)
                        .par_for_each(|o, &x1, &y1, &x2, &y2| {
                            let p1 = x1 * y1;
                            let p2 = x2 * y2;
                            let p1 = if s.negative { -p1 } else { p1 };
                            let p2 = if t.negative { -p2 } else { p2 };
                            *o += p1 + p2;
                        });
                }
                _ => unreachable!("at most two terms share a mask pair"),
            }
        }
        out.components.insert(k, acc);
    }
    Ok(out)
}

/// `n`-fold wedge power; the empty power is the constant 0-form 1.
pub fn wedge_power(model: &FoliatedModel, a: &DifferentialForm, power: usize) -> Result<DifferentialForm> {
    let mut out = DifferentialForm::scalar(model, ArrayD::from_elem(IxDyn(model.shape()), Complex64::new(1.0, 0.0)))?;
    for _ in 0..power {
        out = wedge(&out, a)?;
    }
    Ok(out)
}

/// Exterior derivative, using the model's coordinate derivatives.
pub fn ext_d(model: &FoliatedModel, a: &DifferentialForm) -> Result<DifferentialForm> {
    model.check_shape(&a.shape)?;
    if a.degree >= a.dim {
        return Err(Error::DegreeOverflow {
            degree: a.degree + 1,
            dim: a.dim,
        });
    }
    let mut out = DifferentialForm::empty(a.dim, a.degree + 1, a.shape.clone())?;
    for (i, f) in &a.components {
        for axis in (0..a.dim).filter(|x| !i.contains(x)) {
            let mut df = model.partial_derivative_complex(f, axis)?;
            // d(f dx_I) ∋ ∂_a f dx_a ∧ dx_I
            if i.iter().filter(|&&b| b < axis).count() % 2 == 1 {
                df.mapv_inplace(|z| -z);
            }
            out.add_component(merged(&[axis], i), df)?;
        }
    }
    Ok(out)
}

/// Integral of a top-degree form against the positively oriented volume
/// `dx_1 ∧ dy_1 ∧ ... ∧ dt`. Periodic axes use the trapezoidal rule (equal
/// weights), patch axes the composite trapezoid.
pub fn integrate_top(model: &FoliatedModel, a: &DifferentialForm) -> Result<Complex64> {
    if a.degree != a.dim {
        return Err(Error::WrongDegree {
            expected: a.dim,
            found: a.degree,
        });
    }
    model.check_shape(&a.shape)?;
    let top: Tuple = (0..a.dim).collect();
    let Some(f) = a.components.get(&top) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let weights: Vec<Vec<f64>> = (0..a.dim)
        .map(|axis| {
            let size = model.shape()[axis];
            let h = model.spacing()[axis];
            (0..size)
                .map(|i| {
                    if !model.is_compact() && (i == 0 || i == size - 1) {
                        0.5 * h
                    } else {
                        h
                    }
                })
                .collect()
        })
        .collect();
    let mut sum = Complex64::new(0.0, 0.0);
    for (idx, z) in f.indexed_iter() {
        let w: f64 = (0..a.dim).map(|axis| weights[axis][idx[axis]]).product();
        sum += z * w;
    }
    Ok(sum)
}

/// `sup|a - b| / (max(sup|a|, sup|b|) + floor)`.
pub fn relative_residual(a: &DifferentialForm, b: &DifferentialForm, floor: f64) -> Result<f64> {
    let diff = sub(a, b)?;
    Ok(diff.sup_norm() / (a.sup_norm().max(b.sup_norm()) + floor))
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    degree: usize,
    dim: usize,
    shape: Vec<usize>,
    components: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    tuple: Tuple,
    file: String,
}

/// Writes `<stem>.json` plus one complex `LFLD1` file per component.
pub fn save_form(dir: &Path, stem: &str, form: &DifferentialForm) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::new();
    for (n, (tuple, field)) in form.components.iter().enumerate() {
        let file = format!("{stem}.c{n}.lfld");
        io::write_field(dir.join(&file), &FieldData::Complex(field.clone()))?;
        entries.push(ManifestEntry {
            tuple: tuple.clone(),
            file,
        });
    }
    let manifest = Manifest {
        degree: form.degree,
        dim: form.dim,
        shape: form.shape.clone(),
        components: entries,
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(dir.join(format!("{stem}.json")), json)?;
    Ok(())
}

pub fn load_form(dir: &Path, stem: &str) -> Result<DifferentialForm> {
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(format!("{stem}.json")))?)?;
    let mut form = DifferentialForm::empty(manifest.dim, manifest.degree, manifest.shape)?;
    for entry in manifest.components {
        let field = io::read_field(dir.join(&entry.file))?.into_complex();
        form.add_component(entry.tuple, field)?;
    }
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn constant(model: &FoliatedModel, v: Complex64) -> ComplexField {
        ArrayD::from_elem(IxDyn(model.shape()), v)
    }

    fn torus() -> FoliatedModel {
        FoliatedModel::product_torus(1, 16).unwrap()
    }

    #[test]
    fn dx_wedge_dx_vanishes() {
        let m = torus();
        let dx = DifferentialForm::one_form(&m, 0, constant(&m, c(1.0))).unwrap();
        let w = wedge(&dx, &dx).unwrap();
        assert_eq!(w.degree(), 2);
        assert_eq!(w.components().count(), 0);
    }

    #[test]
    fn dx_dy_anticommute() {
        let m = torus();
        let dx = DifferentialForm::one_form(&m, 0, constant(&m, c(1.0))).unwrap();
        let dy = DifferentialForm::one_form(&m, 1, constant(&m, c(1.0))).unwrap();
        let xy = wedge(&dx, &dy).unwrap();
        let yx = wedge(&dy, &dx).unwrap();
        assert_eq!(xy, scale(c(-1.0), &yx));
        assert!(xy.component(&[0, 1]).unwrap().iter().all(|&z| z == c(1.0)));
    }

    #[test]
    fn dz_wedge_dzbar() {
        let m = torus();
        let dz = DifferentialForm::from_components(
            &m,
            1,
            [(vec![0], constant(&m, c(1.0))), (vec![1], constant(&m, I))],
        )
        .unwrap();
        let dzbar = conj(&dz);
        let w = wedge(&dz, &dzbar).unwrap();
        assert!(w
            .component(&[0, 1])
            .unwrap()
            .iter()
            .all(|&z| z == Complex64::new(0.0, -2.0)));
    }

    #[test]
    fn degree_errors() {
        let m = torus();
        let one = DifferentialForm::one_form(&m, 0, constant(&m, c(1.0))).unwrap();
        let two = wedge(&one, &DifferentialForm::one_form(&m, 1, constant(&m, c(1.0))).unwrap()).unwrap();
        let top = wedge(&two, &DifferentialForm::one_form(&m, 2, constant(&m, c(1.0))).unwrap()).unwrap();
        assert!(matches!(wedge(&two, &two), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(ext_d(&m, &top), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(integrate_top(&m, &two), Err(Error::WrongDegree { .. })));
        assert!(matches!(add(&one, &two), Err(Error::DegreeMismatch(1, 2))));
        assert!(DifferentialForm::zero(&m, 4).is_err());
        assert!(DifferentialForm::from_components(&m, 2, [(vec![1, 0], constant(&m, c(1.0)))]).is_err());
    }

    #[test]
    fn d_of_constant_is_zero() {
        let m = torus();
        let f = DifferentialForm::scalar(&m, constant(&m, c(2.5))).unwrap();
        let df = ext_d(&m, &f).unwrap();
        assert!(df.sup_norm() < 1e-12);
    }

    #[test]
    fn d_of_f_dx_matches_hand_expansion() {
        // d(sin 2πy dx) = 2π cos 2πy dy∧dx = -2π cos 2πy dx∧dy
        let m = torus();
        let f = m.sample_complex(|x| c((2.0 * PI * x[1]).sin()));
        let a = DifferentialForm::one_form(&m, 0, f).unwrap();
        let da = ext_d(&m, &a).unwrap();
        let expected = DifferentialForm::from_components(
            &m,
            2,
            [(vec![0, 1], m.sample_complex(|x| c(-2.0 * PI * (2.0 * PI * x[1]).cos())))],
        )
        .unwrap();
        assert!(sub(&da, &expected).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn integrate_volume_and_odd_function() {
        let m = torus();
        let vol = DifferentialForm::from_components(&m, 3, [(vec![0, 1, 2], constant(&m, c(1.0)))]).unwrap();
        assert!((integrate_top(&m, &vol).unwrap() - c(1.0)).norm() < 1e-14);
        let s = DifferentialForm::from_components(&m, 3, [(vec![0, 1, 2], m.sample_complex(|x| c((2.0 * PI * x[0]).sin())))]).unwrap();
        assert!(integrate_top(&m, &s).unwrap().norm() < 1e-15);
    }

    #[test]
    fn patch_trapezoid_integrates_linear_exactly() {
        let m = FoliatedModel::patch(1, 5).unwrap();
        let f = DifferentialForm::from_components(&m, 3, [(vec![0, 1, 2], m.sample_complex(|x| c(1.0 + x[0])))]).unwrap();
        assert!((integrate_top(&m, &f).unwrap() - c(8.0)).norm() < 1e-13);
    }

    #[test]
    fn pointwise_helpers() {
        let m = torus();
        let a = DifferentialForm::from_components(&m, 1, [(vec![0], m.sample_complex(|x| Complex64::new(x[0], x[1])))]).unwrap();
        assert_eq!(conj(&a).component(&[0]).unwrap()[[3, 4, 0]], Complex64::new(3.0 / 16.0, -4.0 / 16.0));
        assert_eq!(add(&a, &scale(c(-1.0), &a)).unwrap().sup_norm(), 0.0);
        assert_eq!(scale(I, &scale(I, &a)), scale(c(-1.0), &a));
    }

    #[test]
    fn save_and_load() {
        let m = torus();
        let a = DifferentialForm::from_components(&m, 2, [
            (vec![0, 2], m.sample_complex(|x| Complex64::new(x[0], -x[2]))),
            (vec![1, 2], constant(&m, I)),
        ]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_form(dir.path(), "beta", &a).unwrap();
        assert_eq!(load_form(dir.path(), "beta").unwrap(), a);
    }
}
