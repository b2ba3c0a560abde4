//! The bulk form `(iΘ - (1/n) iα∧ᾱ)^n ∧ η` is exact on a compact model, so
//! its integral vanishes. This example measures both facts on `T³` and `T⁵`.
//!
//! cargo run --release --example stokes_integral

use levi_flat::forms::{GeometricForms, MetricField};
use levi_flat::fourier::FourierParam;
use levi_flat::model::FoliatedModel;
use levi_flat::verify;

fn report(model: &FoliatedModel, param: &FourierParam) -> levi_flat::Result<()> {
    let m = MetricField::new(model, param.synthesize(model)?)?;
    let g = GeometricForms::new(model, &m)?;
    let c = 1.0 / model.n() as f64;
    let exact = verify::exactness(model, &g, c)?;
    let integral = verify::main_integral(model, &g)?;
    println!(
        "n = {}, sizes {:?}: exactness {:.2e}, ∫ bulk = {:.2e}{:+.2e}i (relative {:.2e})",
        model.n(),
        model.shape(),
        exact,
        integral.value.re,
        integral.value.im,
        integral.relative()
    );
    // any other weight leaves a non-exact bulk form
    println!("  exactness at c = 2/n: {:.2e}", verify::exactness(model, &g, 2.0 * c)?);
    Ok(())
}

fn main() -> levi_flat::Result<()> {
    let t3 = FoliatedModel::product_torus(1, 64)?;
    report(&t3, &FourierParam::seeded(3, 4, 2.0, 0.5, 11))?;
    let t5 = FoliatedModel::product_torus(2, 16)?;
    report(&t5, &FourierParam::seeded(5, 1, 2.0, 0.15, 11))?;
    Ok(())
}
