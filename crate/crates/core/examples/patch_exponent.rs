//! Exponent of `u = -(x² + y²)` on the patch `[-1, 1]³`: `Θ = 1`, `α = -z̄`,
//! so `s = |z|²` peaks at the corners with value 2 and `η_h = 1/3`.
//!
//! cargo run --release --example patch_exponent

use levi_flat::dfindex;
use levi_flat::forms::MetricField;
use levi_flat::fourier::FourierParam;
use levi_flat::model::FoliatedModel;

fn main() -> levi_flat::Result<()> {
    let model = FoliatedModel::patch(1, 17)?;
    let quadratic = MetricField::from_fn(&model, |x| -(x[0] * x[0] + x[1] * x[1]))?;
    let report = dfindex::exponent_of_metric(&model, &quadratic)?;
    let oracle = dfindex::exponent_bisection_oracle(&model, &quadratic, 1e-9)?;
    println!("closed form η = {:.9}, bisection η = {oracle:.9}", report.eta);
    println!("s_max = {:?} at {:?}", report.s_max, report.argmax_point);

    // perturbations of the quadratic metric
    for seed in 0..5 {
        let bump = FourierParam::seeded(3, 1, 2.0, 0.05, seed).synthesize(&model)?;
        let m = MetricField::new(&model, quadratic.log_h() + &bump)?;
        let r = dfindex::exponent_of_metric(&model, &m)?;
        let b = dfindex::exponent_bisection_oracle(&model, &m, 1e-9)?;
        println!("seed {seed}: η = {:.9} (bisection {b:.9}), min eig Θ = {:.3}", r.eta, r.min_theta_eig);
    }

    // the flat torus admits no feasible metric at all
    let torus = FoliatedModel::product_torus(1, 16)?;
    let u = FourierParam::seeded(3, 2, 2.0, 0.5, 1).synthesize(&torus)?;
    let r = dfindex::exponent_of_metric(&torus, &MetricField::new(&torus, u)?)?;
    println!("torus: η = {}, mean tr Θ = {:.1e}, {}", r.eta, r.mean_trace_theta, r.reason.unwrap_or_default());
    Ok(())
}
