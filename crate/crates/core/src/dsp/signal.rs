use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sampled loudspeaker-room impulse response.
///
/// `direct_onset_index` marks the arrival of the first wavefront when it is
/// known (simulated responses carry it, measured ones are detected later).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpulseResponse {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    direct_onset_index: Option<usize>,
}

impl ImpulseResponse {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        Self::with_onset(samples, sample_rate_hz, None)
    }

    pub fn with_onset(samples: Vec<f64>, sample_rate_hz: u32, direct_onset_index: Option<usize>) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample_rate_hz", "must be positive"));
        }
        if let Some(pos) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid("samples", format!("non-finite value at index {pos}")));
        }
        if let Some(n1) = direct_onset_index {
            if n1 >= samples.len() {
                return Err(Error::invalid(
                    "direct_onset_index",
                    format!("{n1} is outside a signal of {} samples", samples.len()),
                ));
            }
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            direct_onset_index,
        })
    }

    /// A unit impulse of `len` samples with its pulse at `index`.
    pub fn delta(index: usize, len: usize, sample_rate_hz: u32) -> Result<Self> {
        if index >= len {
            return Err(Error::invalid("index", "delta position outside signal"));
        }
        let mut samples = vec![0.0; len];
        samples[index] = 1.0;
        Self::with_onset(samples, sample_rate_hz, Some(index))
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn direct_onset_index(&self) -> Option<usize> {
        self.direct_onset_index
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    /// Returns a copy zero-padded (never truncated) to at least `len` samples.
    pub fn padded_to(&self, len: usize) -> Self {
        let mut samples = self.samples.clone();
        if samples.len() < len {
            samples.resize(len, 0.0);
        }
        Self {
            samples,
            ..self.clone()
        }
    }

    pub(crate) fn ensure_rate(&self, other: &ImpulseResponse) -> Result<()> {
        if self.sample_rate_hz != other.sample_rate_hz {
            return Err(Error::SampleRateMismatch {
                expected: self.sample_rate_hz,
                found: other.sample_rate_hz,
            });
        }
        Ok(())
    }
}

/// Sample-wise sum of two signals, zero-padded to the longer length.
pub fn add_signals(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (o, x) in out.iter_mut().zip(a) {
        *o = *x;
    }
    for (o, x) in out.iter_mut().zip(b) {
        *o += *x;
    }
    out
}

pub fn amplitude_to_db(x: f64) -> f64 {
    20.0 * x.log10()
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn power_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}
