//! The exterior engine on its own: `dz ∧ dz̄`, graded commutativity, `d² = 0`,
//! Leibniz and Stokes on `T³`.
//!
//! cargo run --release --example exterior_laws

use levi_flat::exterior::{self, DifferentialForm};
use levi_flat::model::FoliatedModel;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() -> levi_flat::Result<()> {
    let model = FoliatedModel::product_torus(1, 32)?;
    let one = model.sample_complex(|_| Complex64::new(1.0, 0.0));
    let i_one = model.sample_complex(|_| Complex64::new(0.0, 1.0));
    let dz = exterior::add(
        &DifferentialForm::one_form(&model, 0, one.clone())?,
        &DifferentialForm::one_form(&model, 1, i_one)?,
    )?;
    let dz_bar = exterior::conj(&dz);
    let area = exterior::wedge(&dz, &dz_bar)?;
    println!("dz∧dz̄ on dx∧dy: {}", area.component(&[0, 1]).unwrap()[[0, 0, 0]]);

    let f = model.sample_complex(|x| Complex64::new((2.0 * PI * x[0]).sin() * (2.0 * PI * x[2]).cos(), (2.0 * PI * x[1]).sin()));
    let g = model.sample_complex(|x| Complex64::new((4.0 * PI * x[1]).cos(), 0.0));
    let a = DifferentialForm::one_form(&model, 2, f.clone())?;
    let b = DifferentialForm::one_form(&model, 0, g)?;

    let ab = exterior::wedge(&a, &b)?;
    let ba = exterior::wedge(&b, &a)?;
    println!("a∧b + b∧a = 0 exactly: {}", exterior::add(&ab, &ba)?.sup_norm() == 0.0);

    let dd = exterior::ext_d(&model, &exterior::ext_d(&model, &a)?)?;
    println!("‖d d a‖ = {:.1e}", dd.sup_norm());

    let lhs = exterior::ext_d(&model, &ab)?;
    let rhs = exterior::sub(
        &exterior::wedge(&exterior::ext_d(&model, &a)?, &b)?,
        &exterior::wedge(&a, &exterior::ext_d(&model, &b)?)?,
    )?;
    println!("Leibniz defect = {:.1e}", exterior::sub(&lhs, &rhs)?.sup_norm());

    let beta = DifferentialForm::from_components(&model, 2, [(vec![0, 2], f)])?;
    let total = exterior::integrate_top(&model, &exterior::ext_d(&model, &beta)?)?;
    println!("∫ dβ = {:.1e}", total.norm());
    Ok(())
}
