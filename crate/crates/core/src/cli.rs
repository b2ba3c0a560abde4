//! Config-driven commands behind the `lfl` binary.
//!
//! One command reads one [`RunConfig`] (JSON, unknown keys rejected) plus
//! optional overrides, writes its outputs into the configured directory and
//! returns a [`RunReport`]. Reports carry no timing fields, so identical
//! configs give byte-identical reports. Exit codes: 0 pass, 2 tolerance
//! failure, 3 config error, 4 numerical error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Axis, Dimension};
use serde::{Deserialize, Serialize};

use crate::dfindex::{self, ExponentReport};
use crate::error::{Error, Result};
use crate::forms::{self, GeometricForms, MetricField};
use crate::fourier::FourierParam;
use crate::io::{self, FieldData};
use crate::model::{FoliatedModel, ModelSpec, RealField};
use crate::optimize::{self, OptConfig};
use crate::tolerances;
use crate::verify::{self, CheckRecord};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 2;

/// Published JSON schema of [`RunReport`] and [`MergedReport`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `u = -Σ (x_j² + y_j²)`; on the patch `Θ = I` and `η_h = 1/(1+2n)`.
    Quadratic,
    Zero,
    /// `u = ε cos(2π x_1)`.
    Cosine,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSource {
    /// An LFLD1 real field; a sidecar, if present, must match the model.
    File { path: PathBuf },
    SeededFourier {
        seed: u64,
        cutoff: usize,
        amplitude: f64,
        smoothness: f64,
    },
    Preset {
        name: Preset,
        #[serde(default)]
        epsilon: f64,
    },
}

/// Overrides for the default tolerances.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceOverrides {
    pub identity: Option<f64>,
    pub exactness: Option<f64>,
    pub integral: Option<f64>,
    pub remark_equality: Option<f64>,
    pub remark_realness: Option<f64>,
    pub bound_slack: Option<f64>,
    pub mean_trace: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub seed: u64,
    pub cutoff: usize,
    pub smoothness: f64,
    pub amplitude: f64,
    pub search: OptConfig,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            cutoff: 1,
            smoothness: 2.0,
            amplitude: 1.0,
            search: OptConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Params {
    /// Curvature weight for `check exactness`; defaults to `1/n`.
    pub c: Option<f64>,
    pub tolerances: ToleranceOverrides,
    pub bisection_tol: f64,
    pub optimizer: OptimizerSettings,
    /// Index along `t` of the plane written to CSV slices; defaults to 0.
    pub slice_t: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            c: None,
            tolerances: ToleranceOverrides::default(),
            bisection_tol: tolerances::ORACLE_BISECTION,
            optimizer: OptimizerSettings::default(),
            slice_t: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub metric: MetricSource,
    #[serde(default)]
    pub params: Params,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("lfl-out")
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Replaces the seed of a seeded source and of the optimizer.
    pub seed: Option<u64>,
    /// Replaces every axis size.
    pub size: Option<usize>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            if let MetricSource::SeededFourier { seed: s, .. } = &mut self.metric {
                *s = seed;
            }
            self.params.optimizer.seed = seed;
        }
        if let Some(size) = o.size {
            self.model.sizes.iter_mut().for_each(|s| *s = size);
        }
        if let Some(out) = &o.out {
            self.output_dir = out.clone();
        }
    }

    fn source_seed(&self) -> Option<u64> {
        match self.metric {
            MetricSource::SeededFourier { seed, .. } => Some(seed),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Identity,
    Exactness,
    Integral,
    Remark,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Identity => "identity",
            CheckKind::Exactness => "exactness",
            CheckKind::Integral => "integral",
            CheckKind::Remark => "remark",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    GenMetric,
    Check(CheckKind),
    Exponent,
    Optimize,
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::GenMetric => "gen-metric".into(),
            Command::Check(k) => format!("check-{}", k.name()),
            Command::Exponent => "exponent".into(),
            Command::Optimize => "optimize".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub command: String,
    pub model: Option<ModelSpec>,
    pub seed: Option<u64>,
    pub pass: bool,
    pub exit_code: i32,
    pub checks: Vec<CheckRecord>,
    pub exponent: Option<ExponentReport>,
    /// Named scalar results, e.g. the real and imaginary parts of an integral.
    pub quantities: BTreeMap<String, f64>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    pub error: Option<String>,
}

impl RunReport {
    fn new(command: Command, config: &RunConfig) -> Self {
        Self {
            command: command.name(),
            model: Some(config.model.clone()),
            seed: if command == Command::Optimize {
                Some(config.params.optimizer.seed)
            } else {
                config.source_seed()
            },
            pass: true,
            exit_code: EXIT_PASS,
            checks: Vec::new(),
            exponent: None,
            quantities: BTreeMap::new(),
            outputs: Vec::new(),
            error: None,
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.checks.iter().all(|c| c.pass);
        self.exit_code = if self.pass { EXIT_PASS } else { EXIT_TOLERANCE };
        self
    }

    fn failed(mut self, err: &Error) -> Self {
        self.pass = false;
        self.exit_code = err.exit_code();
        self.error = Some(err.to_string());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Several run reports; passes iff all of them pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergedReport {
    pub pass: bool,
    pub exit_code: i32,
    pub reports: Vec<RunReport>,
}

impl MergedReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn merge_reports(paths: &[PathBuf]) -> Result<MergedReport> {
    let reports = paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<RunReport>(&text)
                .map_err(|e| Error::Config(format!("{} is not a run report: {e}", p.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let exit_code = reports
        .iter()
        .map(|r| r.exit_code)
        .max()
        .unwrap_or(EXIT_PASS);
    Ok(MergedReport {
        pass,
        exit_code,
        reports,
    })
}

fn preset_metric(model: &FoliatedModel, name: Preset, epsilon: f64) -> Result<MetricField> {
    let n = model.n();
    match name {
        Preset::Zero => Ok(MetricField::zero(model)),
        Preset::Quadratic => MetricField::from_fn(model, |x| -(0..2 * n).map(|a| x[a] * x[a]).sum::<f64>()),
        Preset::Cosine => MetricField::from_fn(model, |x| epsilon * (2.0 * std::f64::consts::PI * x[0]).cos()),
    }
}

fn load_metric(model: &FoliatedModel, path: &Path) -> Result<MetricField> {
    let sidecar = io::sidecar_path(path);
    if sidecar.exists() {
        let spec = io::read_sidecar(path)?;
        if spec != model.spec() {
            return Err(Error::Config(format!(
                "{} describes a different model than the config",
                sidecar.display()
            )));
        }
    }
    let u = io::read_field(path)?.into_real()?;
    MetricField::new(model, u)
}

fn seeded_param(model: &FoliatedModel, source: &MetricSource) -> Option<FourierParam> {
    match *source {
        MetricSource::SeededFourier {
            seed,
            cutoff,
            amplitude,
            smoothness,
        } => Some(FourierParam::seeded(model.dim(), cutoff, smoothness, amplitude, seed)),
        _ => None,
    }
}

/// Builds the metric described by the config.
pub fn resolve_metric(model: &FoliatedModel, config: &RunConfig) -> Result<MetricField> {
    match &config.metric {
        MetricSource::File { path } => load_metric(model, path),
        MetricSource::Preset { name, epsilon } => preset_metric(model, *name, *epsilon),
        source => {
            let param = seeded_param(model, source).expect("seeded source");
            MetricField::new(model, param.synthesize(model)?)
        }
    }
}

/// CSV of `field` on the plane `t = t_index`, one row per point with the
/// leaf coordinates followed by the value.
pub fn plane_csv(model: &FoliatedModel, field: &RealField, t_index: usize) -> Result<String> {
    model.check_shape(field.shape())?;
    let t_axis = model.t_axis();
    if t_index >= model.shape()[t_axis] {
        return Err(Error::Config(format!(
            "slice_t {t_index} outside an axis of size {}",
            model.shape()[t_axis]
        )));
    }
    let mut out = String::new();
    for j in 1..=model.n() {
        let _ = write!(out, "x_{j},y_{j},");
    }
    out.push_str("value\n");
    let plane = field.index_axis(Axis(t_axis), t_index);
    for (idx, v) in plane.indexed_iter() {
        for (axis, &i) in idx.slice().iter().enumerate() {
            let _ = write!(out, "{},", model.coordinate(axis, i));
        }
        let _ = writeln!(out, "{v}");
    }
    Ok(out)
}

struct Writer<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Writer<'_> {
    fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn metric(&mut self, name: &str, model: &FoliatedModel, m: &MetricField) -> Result<()> {
        let path = self.dir.join(name);
        io::write_field(&path, &FieldData::Real(m.log_h().clone()))?;
        io::write_sidecar(&path, &model.spec())?;
        self.written.push(name.to_string());
        self.written.push(format!("{name}.json"));
        Ok(())
    }
}

fn tol(over: Option<f64>, default: f64) -> f64 {
    over.unwrap_or(default)
}

fn run_inner(command: Command, config: &RunConfig, report: &mut RunReport) -> Result<()> {
    let model = config.model.build()?;
    report.model = Some(model.spec());
    fs::create_dir_all(&config.output_dir)?;
    let mut out = Writer {
        dir: &config.output_dir,
        written: Vec::new(),
    };
    let t = &config.params.tolerances;
    let seed = report.seed;
    let n = model.n();
    let record = |name: &str, residual: f64, tolerance: f64| CheckRecord::new(name, &model, seed, residual, tolerance);

    match command {
        Command::GenMetric => {
            let param = seeded_param(&model, &config.metric)
                .ok_or_else(|| Error::Config("gen-metric needs a seeded_fourier metric source".into()))?;
            let m = MetricField::new(&model, param.synthesize(&model)?)?;
            report.quantities.insert(
                "sup_abs_u".into(),
                m.log_h().iter().fold(0.0f64, |a, v| a.max(v.abs())),
            );
            out.metric("metric.lfld", &model, &m)?;
        }
        Command::Check(kind) => {
            if !model.is_compact() {
                return Err(Error::InvalidModel(
                    "verification checks need a fully periodic model".into(),
                ));
            }
            let m = resolve_metric(&model, config)?;
            let g = GeometricForms::new(&model, &m)?;
            match kind {
                CheckKind::Identity => {
                    let r = verify::structure_identities(&model, &g)?;
                    let tolerance = tol(t.identity, tolerances::STRUCTURE_IDENTITY);
                    report.checks.push(record("identity-d-eta", r.d_eta, tolerance));
                    report.checks.push(record("identity-d-alpha", r.d_alpha, tolerance));
                }
                CheckKind::Exactness => {
                    let c = config.params.c.unwrap_or(1.0 / n as f64);
                    let residual = verify::exactness(&model, &g, c)?;
                    report.quantities.insert("c".into(), c);
                    report.quantities.insert("residual".into(), residual);
                    // only c = 1/n is exact
                    if c == 1.0 / n as f64 {
                        let tolerance = tol(t.exactness, verify::exactness_tolerance(n));
                        report.checks.push(record("exactness", residual, tolerance));
                    }
                }
                CheckKind::Integral => {
                    let r = verify::main_integral(&model, &g)?;
                    let tolerance = tol(t.integral, verify::main_integral_tolerance(n));
                    report.checks.push(record("main-integral", r.relative(), tolerance));
                    report.quantities.insert("integral_re".into(), r.value.re);
                    report.quantities.insert("integral_im".into(), r.value.im);
                    report.quantities.insert("integral_abs".into(), r.value.norm());
                    report.quantities.insert("bulk_sup".into(), r.bulk_sup);
                    report.quantities.insert("volume".into(), r.volume);
                    let bulk = g.bulk(&model, 1.0 / n as f64)?;
                    let density = forms::top_density(&model, &bulk)?;
                    out.text("bulk_slice.csv", &plane_csv(&model, &density, config.params.slice_t)?)?;
                }
                CheckKind::Remark => {
                    if n != 1 {
                        return Err(Error::InvalidModel(format!(
                            "the dimension-3 equality needs n = 1, got n = {n}"
                        )));
                    }
                    let r = verify::remark_integrals(&model, &g)?;
                    report.checks.push(record(
                        "remark-equality",
                        r.relative_difference(),
                        tol(t.remark_equality, tolerances::REMARK_EQUALITY),
                    ));
                    report.checks.push(record(
                        "remark-realness",
                        r.imaginary_defect(),
                        tol(t.remark_realness, tolerances::REMARK_REALNESS),
                    ));
                    report.quantities.insert("curvature_re".into(), r.curvature.re);
                    report.quantities.insert("curvature_im".into(), r.curvature.im);
                    report.quantities.insert("connection_re".into(), r.connection.re);
                    report.quantities.insert("connection_im".into(), r.connection.im);
                }
            }
        }
        Command::Exponent => {
            let m = resolve_metric(&model, config)?;
            let exponent = dfindex::exponent_of_metric(&model, &m)?;
            let bisection_tol = config.params.bisection_tol;
            let oracle = dfindex::exponent_bisection_oracle(&model, &m, bisection_tol)?;
            report.quantities.insert("eta_bisection".into(), oracle);
            report
                .checks
                .push(record("bisection-oracle", (exponent.eta - oracle).abs(), bisection_tol));
            push_bound_checks(&model, &exponent, t, &mut report.checks, &record);
            write_slices(&model, &m, config.params.slice_t, &mut out)?;
            report.exponent = Some(exponent);
        }
        Command::Optimize => {
            let base = resolve_metric(&model, config)?;
            let before = dfindex::exponent_of_metric(&model, &base)?;
            let s = &config.params.optimizer;
            let param = FourierParam::zeros(model.dim(), s.cutoff, s.smoothness, s.amplitude);
            let result = optimize::optimize_metric(&model, Some(&base), &param, &s.search, s.seed)?;
            report.quantities.insert("eta_start".into(), before.eta);
            report.quantities.insert("evaluations".into(), result.trace.evaluations as f64);
            report.checks.push(record(
                "no-regression",
                (before.eta - result.report.eta).max(0.0),
                0.0,
            ));
            push_bound_checks(&model, &result.report, t, &mut report.checks, &record);
            out.text("trace.csv", &result.trace.to_csv())?;
            out.metric("optimized.lfld", &model, &result.metric)?;
            write_slices(&model, &result.metric, config.params.slice_t, &mut out)?;
            report.exponent = Some(result.report);
        }
    }
    report.outputs = out.written;
    Ok(())
}

/// On compact models: `η ≤ 1/(n+1)` and the mean-trace obstruction.
fn push_bound_checks(
    model: &FoliatedModel,
    exponent: &ExponentReport,
    t: &ToleranceOverrides,
    checks: &mut Vec<CheckRecord>,
    record: &dyn Fn(&str, f64, f64) -> CheckRecord,
) {
    if !model.is_compact() {
        return;
    }
    let bound = 1.0 / (model.n() as f64 + 1.0);
    checks.push(record(
        "index-bound",
        (exponent.eta - bound).max(0.0),
        tol(t.bound_slack, tolerances::INDEX_BOUND_SLACK),
    ));
    checks.push(record(
        "mean-trace",
        exponent.mean_trace_theta.abs(),
        tol(t.mean_trace, tolerances::MEAN_TRACE),
    ));
}

fn write_slices(model: &FoliatedModel, m: &MetricField, t_index: usize, out: &mut Writer) -> Result<()> {
    let alpha = forms::alpha_vector(model, m)?;
    let theta = forms::theta_matrix(model, &alpha)?;
    let min_eig = dfindex::min_eigenvalue_field(&theta);
    out.text("min_eig_slice.csv", &plane_csv(model, &min_eig, t_index)?)?;
    // s is only defined where Θ is positive definite everywhere
    if let Ok(s) = dfindex::schur_field(&alpha, &theta) {
        out.text("s_slice.csv", &plane_csv(model, &s, t_index)?)?;
    }
    Ok(())
}

/// Runs `command`, writes `<command>.json` into the output directory and
/// returns the report. Errors become failing reports with the matching exit
/// code; only a failure to write the report itself is returned as `Err`.
pub fn run(command: Command, config: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new(command, config);
    let report = match run_inner(command, config, &mut report) {
        Ok(()) => report.finish(),
        Err(e) => report.failed(&e),
    };
    fs::create_dir_all(&config.output_dir)?;
    fs::write(
        config.output_dir.join(format!("{}.json", command.name())),
        report.to_json(),
    )?;
    Ok(report)
}
