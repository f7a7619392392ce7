//! Physical constants (CODATA 2018, exact SI values where defined).
//!
//! Every module reads constants from here; no other file carries a literal.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// Largest `ħΩ₀/k_BT` at which the Bose-Einstein factor is still evaluated;
/// above it the occupation is reported as exactly zero.
pub const MAX_BOSE_EXPONENT: f64 = 700.0;
