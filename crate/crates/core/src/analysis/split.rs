use serde::{Deserialize, Serialize};

use crate::dsp::ImpulseResponse;
use crate::error::{Error, Result};

/// Onset threshold relative to the absolute peak.
pub const ONSET_THRESHOLD_DB: f64 = -20.0;

/// Default direct window for band-limited direct pulses.
pub const DEFAULT_DIRECT_WINDOW_S: f64 = 0.0025;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SplitMode {
    /// Only the onset sample is direct sound.
    StrictSample,
    /// Samples within `window_s / 2` of the onset are direct sound.
    Windowed { window_s: f64 },
}

impl Default for SplitMode {
    fn default() -> Self {
        SplitMode::Windowed {
            window_s: DEFAULT_DIRECT_WINDOW_S,
        }
    }
}

/// An impulse response partitioned at the direct sound.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitIR {
    pub direct: ImpulseResponse,
    pub reverberant: ImpulseResponse,
    pub split_mode: SplitMode,
}

/// Index of the first sample within 20 dB of the absolute peak.
pub fn detect_direct_onset(ir: &ImpulseResponse) -> Result<usize> {
    if ir.is_empty() {
        return Err(Error::EmptySignal);
    }
    let peak = ir.samples().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return Err(Error::SilentSignal);
    }
    let threshold = peak * 10f64.powf(ONSET_THRESHOLD_DB / 20.0);
    Ok(ir
        .samples()
        .iter()
        .position(|x| x.abs() > threshold)
        .expect("peak exceeds threshold"))
}

/// Inclusive sample range treated as direct sound.
pub fn direct_window(onset: usize, len: usize, sample_rate_hz: u32, mode: SplitMode) -> (usize, usize) {
    match mode {
        SplitMode::StrictSample => (onset, onset),
        SplitMode::Windowed { window_s } => {
            let half = (window_s * sample_rate_hz as f64 / 2.0).round() as usize;
            (onset.saturating_sub(half), (onset + half).min(len - 1))
        }
    }
}

/// Splits `ir` at its known onset, or at the detected one.
pub fn split_direct_reverberant(ir: &ImpulseResponse, mode: SplitMode) -> Result<SplitIR> {
    if let SplitMode::Windowed { window_s } = mode {
        if !(window_s >= 0.0 && window_s.is_finite()) {
            return Err(Error::invalid("window_s", "must be non-negative"));
        }
    }
    let onset = match ir.direct_onset_index() {
        Some(n1) => n1,
        None => detect_direct_onset(ir)?,
    };
    let (lo, hi) = direct_window(onset, ir.len(), ir.sample_rate_hz(), mode);
    // -0.0 is the additive identity, so direct + reverberant gives back
    // every sample bit for bit, signed zeros included.
    let mut direct = vec![-0.0; ir.len()];
    let mut reverberant = ir.samples().to_vec();
    for i in lo..=hi {
        direct[i] = reverberant[i];
        reverberant[i] = -0.0;
    }
    let fs = ir.sample_rate_hz();
    Ok(SplitIR {
        direct: ImpulseResponse::with_onset(direct, fs, Some(onset))?,
        reverberant: ImpulseResponse::with_onset(reverberant, fs, Some(onset))?,
        split_mode: mode,
    })
}
