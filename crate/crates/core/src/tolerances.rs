//! Numerical thresholds shared by the library, the checks and the tests.

/// Absolute floor added to relative-residual denominators so that the zero
/// metric yields a residual of 0 instead of 0/0.
pub const RESIDUAL_FLOOR: f64 = 1e-14;

/// Largest admissible `sup|Im|` of the bulk form relative to `sup|Re|`.
pub const BULK_IMAGINARY: f64 = 1e-9;

/// Strict positivity: `λ_min(Θ) > POSITIVITY * (1 + ‖Θ‖∞)`.
pub const POSITIVITY: f64 = 1e-12;

/// Structure identities `dη = (α+ᾱ)∧η` and `dα∧η = Θ∧η` on `T³`.
pub const STRUCTURE_IDENTITY: f64 = 1e-7;

/// `d(boundary) = bulk` with `c = 1/n`.
pub const EXACTNESS_N1: f64 = 1e-7;
pub const EXACTNESS_N2: f64 = 1e-5;

/// `|∫ bulk(1/n)|` relative to `‖bulk‖∞ · vol`.
pub const MAIN_INTEGRAL_N1: f64 = 1e-8;
pub const MAIN_INTEGRAL_N2: f64 = 1e-6;

/// Agreement of `∫ iΘ∧η` and `∫ iα∧ᾱ∧η` for `n = 1`, relative.
pub const REMARK_EQUALITY: f64 = 1e-8;
/// Both sides of the dimension-3 equality must be real to this level.
pub const REMARK_REALNESS: f64 = 1e-9;

/// Closed-form exponent vs. bisection.
pub const ORACLE_BISECTION: f64 = 1e-6;

/// Slack on the `1/(n+1)` bound for compact models.
pub const INDEX_BOUND_SLACK: f64 = 1e-9;

/// `|mean tr Θ|` on fully periodic models.
pub const MEAN_TRACE: f64 = 1e-10;

/// Exterior-engine laws on band-limited inputs.
pub const D_SQUARED: f64 = 1e-8;
pub const LEIBNIZ: f64 = 1e-7;
pub const STOKES: f64 = 1e-8;

/// Residual level below which spectral convergence is not required to
/// continue improving.
pub const CONVERGENCE_FLOOR: f64 = 1e-10;
/// Minimum residual reduction per grid doubling above the floor.
pub const CONVERGENCE_RATIO: f64 = 10.0;
