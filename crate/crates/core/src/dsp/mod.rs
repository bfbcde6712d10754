//! Signal primitives shared by every other module: spectra, smoothing,
//! minimum-phase realization, velvet noise and convolution.

mod convolve;
mod minphase;
mod signal;
mod smoothing;
mod spectrum;
mod velvet;

pub use convolve::{convolve, delay_signal};
pub use minphase::{minimum_phase_fir, MAGNITUDE_FLOOR_DB};
pub use signal::{add_signals, amplitude_to_db, db_to_amplitude, power_to_db, ImpulseResponse};
pub use smoothing::{band_limited_smooth, fractional_octave_smooth, smooth_power, window_bounds};
pub use spectrum::{dft, dft_magnitude, ComplexSpectrum, MagnitudeSpectrum};
pub use velvet::{generate_velvet_noise, VelvetNoise, DEFAULT_VELVET_DENSITY};

pub(crate) use spectrum::power_spectrum;

/// Analysis FFT length at 44.1 kHz.
pub const DEFAULT_ANALYSIS_FFT: usize = 1 << 16;
