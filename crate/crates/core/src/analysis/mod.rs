//! Direct/reverberant decomposition, DRR curves, spectral deviation and
//! reverberation time.

mod decay;
mod deviation;
mod drr;
mod split;

pub use decay::{band_filter, energy_decay_curve, octave_band, schroeder_t60};
pub use deviation::spectral_deviation;
pub use drr::{drr_proposed, drr_spectrum, DrrCurve, POWER_FLOOR_DB};
pub use split::{
    detect_direct_onset, direct_window, split_direct_reverberant, SplitIR, SplitMode, DEFAULT_DIRECT_WINDOW_S,
    ONSET_THRESHOLD_DB,
};
