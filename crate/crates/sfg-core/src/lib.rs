//! Simulation and analysis library for coherent sum-frequency-generation (SFG)
//! detection of broadband time-energy correlated photon pairs.
//!
//! The library models a nonlinear interferometer in which a strong pump first
//! generates pairs of signal/idler modes across a wide spectrum, a spectral
//! shaper applies a programmable pair phase (offset, quadratic, quartic) plus a
//! uniform phase dither, and a second pass through the nonlinear medium
//! recombines the pairs back into the pump mode. The recombined field beats
//! against the residual pump at the interferometer dark port and is read out
//! with lock-in demodulation at the dither frequency.
//!
//! Main pieces:
//!
//! * [`spectral`] — discretized signal/idler mode-pair grid and spectral phase
//!   profiles.
//! * [`pump`] — closed-form perturbative solutions for the pair moments and
//!   the second-order pump-field correction, plus the dark-port output field.
//! * [`lockin`] — dithered homodyne readout, demodulation (numeric and
//!   closed-form), parameter scans and peak-width extraction.
//! * [`fock`] — exact evolution of the quantized three-wave-mixing Hamiltonian
//!   on a truncated number-state basis, used to validate the perturbative
//!   formulas.
//! * [`filter`] — classical matched-filter baseline and the time/frequency
//!   separability metric.

pub mod error;
pub mod filter;
pub mod fock;
pub mod lockin;
pub mod pump;
pub mod spectral;

pub use error::{Error, Result};
pub use filter::{ClassicalField, MatchedFilterOutput, SeparabilityReport};
pub use fock::{OracleSpace, OracleState, ValidationReport};
pub use lockin::{DemodMode, LockinResult, ScanResult, SeedConfig};
pub use pump::{ExpectationBundle, PairAmplitudeSet, ParametricConfig};
pub use spectral::{DensityShape, FrequencyConvention, ModeGrid, PhaseProfile};

/// Complex amplitude type used throughout.
pub type Complex = num_complex::Complex<f64>;
