//! Default thresholds shared by the checks. Every report records the values
//! it actually used.

/// Relative `|F(ξy) - F(y)| / F(y)` accepted for a linear isometry.
pub const ISOMETRY: f64 = 1e-10;
/// Residual below which a fiber field counts as a solution.
pub const SOLUTION: f64 = 1e-8;
/// Relative error of the isometry kernel and Hessian identities.
pub const KERNEL: f64 = 1e-9;
/// Operator linearity.
pub const LINEARITY: f64 = 1e-10;
/// `f(λy) = λ² f(y)`.
pub const HOMOGENEITY: f64 = 1e-9;
/// `ξη = I`.
pub const INVERSE: f64 = 1e-12;
/// Closed forms against the generic jet pipeline.
pub const CLOSED_FORM: f64 = 1e-8;
/// Relative agreement of the two S-curvature paths.
pub const S_AGREEMENT: f64 = 1e-4;
/// Below this both S paths count as zero.
pub const S_ZERO: f64 = 2e-5;

/// Absolute floors under the Riemannian-control noise estimates.
pub const JET_FLOOR: f64 = 1e-9;
pub const S_FLOOR: f64 = 2e-6;
/// A quantity vanishes when it is below this multiple of its noise floor.
pub const NOISE_FACTOR: f64 = 10.0;

/// Identities evaluated in a normal chart.
pub const CHART_IDENTITY: f64 = 1e-8;
/// Indicatrix Cartan trace at the axis angles.
pub const AXIS_TRACE: f64 = 1e-10;
