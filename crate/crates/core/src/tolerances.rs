//! Default tolerances. Every one of these can be overridden from a config file.

/// Additive slack on inequality checks, multiplied by the data scale.
pub const INEQUALITY_SLACK: f64 = 1e-9;

/// Relative discrepancy allowed between the two sides of the duality identity.
pub const DUALITY_TOL: f64 = 1e-8;

/// Relative discrepancy allowed between direct and spectral convolution.
pub const SPECTRAL_TOL: f64 = 1e-10;

/// Equalities that hold up to rounding only.
pub const EXACT_EQUALITY: f64 = 1e-12;

/// Relative error for the `A_{n,u}` total-mass bookkeeping identity.
pub const BOOKKEEPING_TOL: f64 = 1e-10;

/// Agreement required between `B_p` and an independent quadrature oracle.
pub const B_ORACLE_TOL: f64 = 1e-6;

/// Captured-mass ratio a truncated square function must reach.
pub const CAPTURED_MASS_MIN: f64 = 0.999;
