//! Numerical model of free-space photon–atom coupling with deep parabolic
//! mirrors.
//!
//! The crate covers the whole chain from focusing geometry to observables:
//!
//! * [`geometry`]: dipole patterns, weighted solid angles, lens comparison,
//!   fluorescence collection budget;
//! * [`pupil`]: pupil-plane field modes, overlap η, waist optimization,
//!   clipping, aberrations and the coupling efficiency G;
//! * [`stokes`]: Stokes-parameter maps and the measured overlap;
//! * [`cw`]: continuous-wave transmission, phase shift, extinction and
//!   saturation, including fitting G from a saturation curve;
//! * [`pulses`]: temporal envelopes, temporal overlap η_t, AOM drive
//!   synthesis and absorption probability;
//! * [`spectral`]: elastic scattering of shaped pulses per spectral
//!   component;
//! * [`cavity`]: input–output model of an empty two-mirror resonator;
//! * [`io`]: the CSV and JSON file formats.
//!
//! All functions are pure; no global state is kept.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod constants;
pub mod cw;
pub mod error;
pub mod geometry;
pub mod io;
pub mod optimize;
pub mod pulses;
pub mod pupil;
pub mod quadrature;
pub mod spectral;
pub mod stokes;

pub use cavity::{CavityParams, CavityRates, CavityTrace, Drive, ExponentialDrive};
pub use constants::PhysicalConstants;
pub use cw::{CouplingParams, FitOptions, SaturationDataset, SaturationFit, Weighting};
pub use error::{Error, Result};
pub use geometry::{
    AngularRange, DipoleKind, DipoleSpec, LensCount, MirrorGeometry, FULL_SPHERE_WEIGHT,
};
pub use num_complex::Complex64;
pub use pulses::{PulseEnvelope, RampedExponential, TimeGrid};
pub use pupil::{Polarization, RadialPupilField, WaistOptimum};
pub use spectral::{Decomposition, EnergyBudget, SpectralPulse};
pub use stokes::{StokesMap, StokesReport, VectorField};
