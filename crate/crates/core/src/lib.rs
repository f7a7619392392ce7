//! Noise spectra of a laser reflected from a suspended mirror, with the
//! mirror and the light both driven by zero-point field fluctuations.
//!
//! * [`analytic`]: closed-form heterodyne and homodyne photocurrent PSDs,
//!   imprecision, backaction and the standard quantum limit (SI units).
//! * [`qcheck`]: the same spectra from quantum input-output theory.
//! * [`sim`]: Monte Carlo simulation of the mirror and detector in the
//!   rotating frame, with Welch spectral estimation.
//! * [`metrology`]: sideband fits, asymmetry, thermometry and power sweeps.
//!
//! PSDs are two-sided in angular frequency:
//! `S(ω) = (1/2π) ∫ ⟨x(t)x(t+τ)⟩ e^{iωτ} dτ`.

pub mod analytic;
pub mod constants;
pub mod error;
pub mod exec;
pub mod metrology;
pub mod model;
pub mod qcheck;
pub mod quadrature;
pub mod sim;
pub mod spectrum;

pub use error::{Error, Result};
pub use exec::Execution;
pub use model::{mean_occupation, zero_point_amplitude, Bath, Detection, MechanicalOscillator, OpticalSetup, RegimeWarning};
pub use qcheck::{FrameDetection, FrameParams};
pub use sim::{SimConfig, TimeTrace, Window};
pub use spectrum::{Line, Spectrum, SpectrumUnit, WelchInfo};
