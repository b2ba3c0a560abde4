//! Writes a seeded metric as an LFLD1 file with its JSON sidecar, reads both
//! back and saves a differential form as a manifest plus component files.
//!
//! cargo run --release --example field_io -- [dir]

use levi_flat::exterior;
use levi_flat::forms::{self, MetricField};
use levi_flat::fourier::FourierParam;
use levi_flat::io::{self, FieldData};
use levi_flat::model::FoliatedModel;
use std::path::PathBuf;

fn main() -> levi_flat::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir).join("lfl-field-io");
    std::fs::create_dir_all(&dir)?;
    let model = FoliatedModel::product_torus(1, 16)?;
    let u = FourierParam::seeded(3, 3, 2.0, 1.0, 42).synthesize(&model)?;

    let path = dir.join("metric.lfld");
    io::write_field(&path, &FieldData::Real(u.clone()))?;
    io::write_sidecar(&path, &model.spec())?;
    let bytes = std::fs::read(&path)?;
    println!("{}: {} bytes, header {:?}", path.display(), bytes.len(), &bytes[..8]);

    let back = io::read_field(&path)?.into_real()?;
    let spec = io::read_sidecar(&path)?;
    println!("round trip exact: {}, sidecar model {:?}", back == u, spec.kind);

    let eta = forms::eta_form(&spec.build()?, &MetricField::new(&model, back)?)?;
    exterior::save_form(&dir, "eta", &eta)?;
    let loaded = exterior::load_form(&dir, "eta")?;
    println!("η saved with {} component(s), reload exact: {}", loaded.components().count(), loaded == eta);
    Ok(())
}
