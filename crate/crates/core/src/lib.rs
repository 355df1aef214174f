//! Simulation and reconstruction for induced-coherence optical tomography.
//!
//! The crate models a hybrid two-crystal interferometer at the amplitude
//! level: photon pairs from two coherently pumped down-conversion sources,
//! an undetected idler probing a layered sample, and a detected signal whose
//! fringes carry the sample information. On top of the interferometer it
//! provides time-domain delay scans, frequency-domain fringe synthesis with
//! photon-counting noise, FFT depth reconstruction with peak analysis, and
//! transverse raster imaging.
//!
//! Everything numeric is generic over [`numeric::Real`] (`f32` or `f64`);
//! the `*64` aliases below pin the common choice.

// Validation uses negated comparisons so NaN fails the checks too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detector;
pub mod error;
pub mod imaging;
pub mod interferometer;
pub mod io;
pub mod numeric;
pub mod pair_source;
pub mod sample;
pub mod spectra;
pub mod tomography;

pub use error::{Error, Result};
pub use numeric::Real;

pub type PairSourceParams64 = pair_source::PairSourceParams<f64>;
pub type InterferometerConfig64 = interferometer::InterferometerConfig<f64>;
pub type ModeAmplitudeState64 = interferometer::ModeAmplitudeState<f64>;
pub type Layer64 = sample::Layer<f64>;
pub type LayerStack64 = sample::LayerStack<f64>;
pub type ReflectionPath64 = sample::ReflectionPath<f64>;
pub type SignalSpectrum64 = spectra::SignalSpectrum<f64>;
pub type FringeRecord64 = spectra::FringeRecord<f64>;
pub type DetectorModel64 = detector::DetectorModel<f64>;
pub type DepthProfile64 = tomography::DepthProfile<f64>;
pub type Peak64 = tomography::Peak<f64>;
pub type SnrScene64 = tomography::SnrScene<f64>;
pub type BeamProfile64 = imaging::BeamProfile<f64>;
pub type PatternMask64 = imaging::PatternMask<f64>;
pub type ScanImage64 = imaging::ScanImage<f64>;
pub type ImagingScene64 = imaging::ImagingScene<f64>;
