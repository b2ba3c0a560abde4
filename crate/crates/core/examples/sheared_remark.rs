//! On a torus foliated by `t - λy = const` with irrational `λ` every leaf is
//! dense, yet `∫ iΘ∧η = ∫ iα∧ᾱ∧η` still holds in real dimension three.
//!
//! cargo run --release --example sheared_remark

use levi_flat::forms::MetricField;
use levi_flat::fourier::FourierParam;
use levi_flat::model::FoliatedModel;
use levi_flat::verify;

fn main() -> levi_flat::Result<()> {
    let lambda = std::f64::consts::SQRT_2 - 1.0;
    let model = FoliatedModel::sheared_torus(1, 64, vec![lambda])?;

    // successive returns of one leaf to the transversal y = 0
    let mut returns = model.leaf_returns(2000);
    returns.sort_by(f64::total_cmp);
    let gap = returns.windows(2).map(|w| w[1] - w[0]).fold(1.0 - returns[returns.len() - 1], f64::max);
    println!("largest gap between 2000 leaf returns: {gap:.2e}");

    for seed in 0..3 {
        let u = FourierParam::seeded(3, 4, 2.0, 0.5, seed).synthesize(&model)?;
        let r = verify::check_remark_equality(&model, &MetricField::new(&model, u)?)?;
        println!(
            "seed {seed}: ∫iΘ∧η = {:.12}, ∫iα∧ᾱ∧η = {:.12}, relative gap {:.1e}",
            r.curvature.re,
            r.connection.re,
            r.relative_difference()
        );
    }
    Ok(())
}
