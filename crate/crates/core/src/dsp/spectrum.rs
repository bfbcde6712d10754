use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::signal::ImpulseResponse;
use crate::error::{Error, Result};

/// Complex DFT values over bins `0..=n_fft/2` of a real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    values: Vec<Complex64>,
    n_fft: usize,
    sample_rate_hz: u32,
}

/// Linear magnitudes over bins `0..=n_fft/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeSpectrum {
    values: Vec<f64>,
    n_fft: usize,
    sample_rate_hz: u32,
}

fn check_grid(n_fft: usize, sample_rate_hz: u32) -> Result<()> {
    if n_fft < 2 || !n_fft.is_power_of_two() {
        return Err(Error::invalid("n_fft", format!("{n_fft} is not a power of two >= 2")));
    }
    if sample_rate_hz == 0 {
        return Err(Error::invalid("sample_rate_hz", "must be positive"));
    }
    Ok(())
}

impl ComplexSpectrum {
    pub fn new(values: Vec<Complex64>, n_fft: usize, sample_rate_hz: u32) -> Result<Self> {
        check_grid(n_fft, sample_rate_hz)?;
        if values.len() != n_fft / 2 + 1 {
            return Err(Error::GridMismatch(format!(
                "{} values for n_fft {n_fft}",
                values.len()
            )));
        }
        Ok(Self {
            values,
            n_fft,
            sample_rate_hz,
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn magnitude(&self) -> MagnitudeSpectrum {
        MagnitudeSpectrum {
            values: self.values.iter().map(|c| c.norm()).collect(),
            n_fft: self.n_fft,
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    /// `|X[k]|^2` per bin.
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }
}

impl MagnitudeSpectrum {
    pub fn new(values: Vec<f64>, n_fft: usize, sample_rate_hz: u32) -> Result<Self> {
        check_grid(n_fft, sample_rate_hz)?;
        if values.len() != n_fft / 2 + 1 {
            return Err(Error::GridMismatch(format!(
                "{} values for n_fft {n_fft}",
                values.len()
            )));
        }
        if let Some(bin) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("values", format!("bin {bin} is negative or non-finite")));
        }
        Ok(Self {
            values,
            n_fft,
            sample_rate_hz,
        })
    }

    /// Builds a spectrum by evaluating `f` at every bin centre frequency.
    pub fn from_fn(n_fft: usize, sample_rate_hz: u32, f: impl Fn(f64) -> f64) -> Result<Self> {
        check_grid(n_fft, sample_rate_hz)?;
        let df = sample_rate_hz as f64 / n_fft as f64;
        let values = (0..=n_fft / 2).map(|k| f(k as f64 * df)).collect();
        Self::new(values, n_fft, sample_rate_hz)
    }

    pub fn constant(value: f64, n_fft: usize, sample_rate_hz: u32) -> Result<Self> {
        Self::from_fn(n_fft, sample_rate_hz, |_| value)
    }

    /// Same grid, new values. Values are validated.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.n_fft, self.sample_rate_hz)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_fft(&self) -> usize {
        self.n_fft
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn bin_spacing_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / self.n_fft as f64
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_spacing_hz()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.values.len()).map(|k| self.frequency(k)).collect()
    }

    /// Indices of bins whose centre frequency lies in `[low_hz, high_hz]`.
    pub fn bins_in_band(&self, low_hz: f64, high_hz: f64) -> std::ops::RangeInclusive<usize> {
        let df = self.bin_spacing_hz();
        let last = self.values.len() - 1;
        let lo = ((low_hz / df).ceil().max(0.0) as usize).min(last + 1);
        let hi = (high_hz / df).floor();
        if hi < 0.0 {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        let hi = (hi as usize).min(last);
        lo..=hi
    }

    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * v).collect()
    }

    pub fn to_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 20.0 * v.log10()).collect()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Clamps every bin to at least `max * 10^(floor_db/20)`.
    pub fn floored(&self, floor_db: f64) -> Self {
        let floor = self.max() * 10f64.powf(floor_db / 20.0);
        Self {
            values: self.values.iter().map(|v| v.max(floor)).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * gain).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn ensure_same_grid(&self, other: &MagnitudeSpectrum) -> Result<()> {
        if self.n_fft != other.n_fft || self.sample_rate_hz != other.sample_rate_hz {
            return Err(Error::GridMismatch(format!(
                "n_fft {} @ {} Hz vs n_fft {} @ {} Hz",
                self.n_fft, self.sample_rate_hz, other.n_fft, other.sample_rate_hz
            )));
        }
        Ok(())
    }
}

/// Forward DFT of a real signal, zero-padded (or truncated) to `n_fft`.
pub fn dft(samples: &[f64], n_fft: usize, sample_rate_hz: u32) -> Result<ComplexSpectrum> {
    check_grid(n_fft, sample_rate_hz)?;
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n_fft];
    for (b, &x) in buf.iter_mut().zip(samples) {
        b.re = x;
    }
    FftPlanner::new().plan_fft_forward(n_fft).process(&mut buf);
    buf.truncate(n_fft / 2 + 1);
    ComplexSpectrum::new(buf, n_fft, sample_rate_hz)
}

/// `|DFT(ir, n_fft)|` over bins `0..=n_fft/2`. Longer signals are truncated.
pub fn dft_magnitude(ir: &ImpulseResponse, n_fft: usize) -> Result<MagnitudeSpectrum> {
    Ok(dft(ir.samples(), n_fft, ir.sample_rate_hz())?.magnitude())
}

/// Power spectrum `|DFT|^2` of a raw signal.
pub(crate) fn power_spectrum(samples: &[f64], n_fft: usize, sample_rate_hz: u32) -> Result<Vec<f64>> {
    Ok(dft(samples, n_fft, sample_rate_hz)?.power())
}
