//! Simplex search over band-limited metrics. On the patch it improves on the
//! quadratic starting metric; on the torus it stays infeasible because the
//! mean of `tr Θ` vanishes.
//!
//! cargo run --release --example optimize_metric

use levi_flat::forms::MetricField;
use levi_flat::fourier::FourierParam;
use levi_flat::model::FoliatedModel;
use levi_flat::optimize::{optimize_metric, OptConfig};

fn main() -> levi_flat::Result<()> {
    let patch = FoliatedModel::patch(1, 17)?;
    let base = MetricField::from_fn(&patch, |x| -(x[0] * x[0] + x[1] * x[1]))?;
    let family = FourierParam::zeros(patch.dim(), 1, 2.0, 0.1);
    let config = OptConfig {
        phase2_iters: 120,
        temperatures: vec![0.05, 0.01],
        ..OptConfig::default()
    };
    let out = optimize_metric(&patch, Some(&base), &family, &config, 3)?;
    println!(
        "patch: η = {:.6} after {} iterations ({} evaluations), start 1/3",
        out.report.eta,
        out.trace.rows.len() - 1,
        out.trace.evaluations
    );

    let torus = FoliatedModel::product_torus(1, 16)?;
    let family = FourierParam::zeros(torus.dim(), 2, 2.0, 1.0);
    let config = OptConfig {
        phase1_iters: 100,
        init_scale: 0.2,
        ..OptConfig::default()
    };
    let out = optimize_metric(&torus, None, &family, &config, 0)?;
    println!(
        "torus: η = {}, best min eig Θ = {:.3}, mean tr Θ = {:.1e}",
        out.report.eta, out.report.min_theta_eig, out.report.mean_trace_theta
    );
    print!("{}", out.trace.to_csv().lines().take(4).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
