//! Checks `dη = (α+ᾱ)∧η` and `dα∧η = Θ∧η` for seeded metrics on the flat
//! 3-torus.
//!
//! cargo run --release --example structure_identities -- [size] [seeds]

use levi_flat::forms::MetricField;
use levi_flat::fourier::FourierParam;
use levi_flat::model::FoliatedModel;
use levi_flat::verify;

fn main() -> levi_flat::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let size = args.next().unwrap_or(64);
    let seeds = args.next().unwrap_or(3) as u64;
    let model = FoliatedModel::product_torus(1, size)?;
    for seed in 0..seeds {
        let u = FourierParam::seeded(model.dim(), size / 16, 2.0, 0.5, seed).synthesize(&model)?;
        let r = verify::check_structure_identities(&model, &MetricField::new(&model, u)?)?;
        println!("seed {seed}: dη residual {:.2e}, dα∧η residual {:.2e}", r.d_eta, r.d_alpha);
    }
    Ok(())
}
