use std::fmt;

use serde::{Deserialize, Serialize};

use super::target::TargetSpec;
use crate::dsp::{
    dft, minimum_phase_fir, ImpulseResponse, MagnitudeSpectrum, DEFAULT_ANALYSIS_FFT, MAGNITUDE_FLOOR_DB,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignConfig {
    #[serde(default = "default_n_taps")]
    pub n_taps: usize,
    /// DFT length of the design grid.
    #[serde(default = "default_n_fft")]
    pub n_fft: usize,
    #[serde(default = "default_smoothing")]
    pub smoothing_fraction: f64,
    #[serde(default = "default_delay")]
    pub delay_s: f64,
    #[serde(default = "default_beta_in")]
    pub beta_in_band: f64,
    #[serde(default = "default_beta_out")]
    pub beta_out_band: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate_hz: u32,
}

fn default_n_taps() -> usize {
    8192
}
fn default_n_fft() -> usize {
    DEFAULT_ANALYSIS_FFT
}
fn default_smoothing() -> f64 {
    1.0 / 3.0
}
fn default_delay() -> f64 {
    0.010
}
fn default_beta_in() -> f64 {
    0.001
}
fn default_beta_out() -> f64 {
    1.0
}
fn default_sample_rate() -> u32 {
    44100
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            n_taps: default_n_taps(),
            n_fft: default_n_fft(),
            smoothing_fraction: default_smoothing(),
            delay_s: default_delay(),
            beta_in_band: default_beta_in(),
            beta_out_band: default_beta_out(),
            sample_rate_hz: default_sample_rate(),
        }
    }
}

impl DesignConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n_taps.is_power_of_two() {
            return Err(Error::invalid(
                "n_taps",
                format!("{} is not a power of two", self.n_taps),
            ));
        }
        if !self.n_fft.is_power_of_two() || self.n_fft < self.n_taps {
            return Err(Error::invalid(
                "n_fft",
                format!("{} must be a power of two no smaller than n_taps", self.n_fft),
            ));
        }
        if !(0.002..=0.050).contains(&self.delay_s) {
            return Err(Error::invalid(
                "delay_s",
                format!("{} s is outside the 2..50 ms precedence window", self.delay_s),
            ));
        }
        if !(self.smoothing_fraction >= 0.0 && self.smoothing_fraction.is_finite()) {
            return Err(Error::invalid("smoothing_fraction", "must be non-negative"));
        }
        if !(self.beta_in_band >= 0.0 && self.beta_out_band >= 0.0) {
            return Err(Error::invalid("beta", "regularization must be non-negative"));
        }
        if self.sample_rate_hz == 0 {
            return Err(Error::invalid("sample_rate_hz", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    ProposedSupporting,
    TraditionalInverse,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::ProposedSupporting => "proposed_supporting",
            FilterKind::TraditionalInverse => "traditional_inverse",
        })
    }
}

/// What a filter was designed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMetadata {
    pub config: DesignConfig,
    pub target: Option<TargetSpec>,
    pub gain_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompensationFilter {
    pub taps: Vec<f64>,
    pub kind: FilterKind,
    pub sample_rate_hz: u32,
    pub design_metadata: DesignMetadata,
    /// Magnitude the taps realize, on the design grid.
    pub design_magnitude: MagnitudeSpectrum,
}

impl CompensationFilter {
    /// Records the target and gain the filter was designed for.
    pub fn with_target(mut self, target: TargetSpec, gain_db: Option<f64>) -> Self {
        self.design_metadata.target = Some(target);
        self.design_metadata.gain_db = gain_db;
        self
    }

    /// Rebuilds a filter from stored taps. `design_magnitude` becomes the
    /// magnitude the taps realize on the metadata's design grid.
    pub fn from_taps(
        taps: Vec<f64>,
        kind: FilterKind,
        sample_rate_hz: u32,
        design_metadata: DesignMetadata,
    ) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptySignal);
        }
        let n_fft = design_metadata.config.n_fft;
        let design_magnitude = dft(&taps, n_fft, sample_rate_hz)?.magnitude();
        Ok(Self {
            taps,
            kind,
            sample_rate_hz,
            design_metadata,
            design_magnitude,
        })
    }

    pub fn is_silent(&self) -> bool {
        self.taps.iter().all(|t| *t == 0.0)
    }

    pub fn ensure_kind(&self, expected: FilterKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::KindMismatch {
                expected: expected.to_string(),
                found: self.kind.to_string(),
            });
        }
        Ok(())
    }
}

/// Root-mean-square magnitude over several responses, `sqrt(mean |H_i|^2)`.
pub fn average_power_response(irs: &[ImpulseResponse], n_fft: usize) -> Result<MagnitudeSpectrum> {
    let first = irs.first().ok_or(Error::EmptySignal)?;
    let mut acc = vec![0.0; n_fft / 2 + 1];
    for ir in irs {
        first.ensure_rate(ir)?;
        for (a, p) in acc
            .iter_mut()
            .zip(dft(ir.samples(), n_fft, ir.sample_rate_hz())?.power())
        {
            *a += p;
        }
    }
    let n = irs.len() as f64;
    MagnitudeSpectrum::new(
        acc.into_iter().map(|a| (a / n).sqrt()).collect(),
        n_fft,
        first.sample_rate_hz(),
    )
}

/// Supporting filter `w = sqrt(d_mod^2 - hp^2) / hs`, which tops the primary
/// response up to `d_mod` by energetic addition of the supporting path.
///
/// `hs` is floored at -100 dB below its maximum before division. Bins where
/// `w` is zero are floored the same way for the minimum-phase realization;
/// an everywhere-zero `w` yields silent taps.
pub fn design_supporting_filter(
    hp: &MagnitudeSpectrum,
    hs: &MagnitudeSpectrum,
    d_mod: &MagnitudeSpectrum,
    cfg: &DesignConfig,
) -> Result<CompensationFilter> {
    cfg.validate()?;
    hp.ensure_same_grid(hs)?;
    hp.ensure_same_grid(d_mod)?;
    check_grid(hp, cfg)?;
    if hs.max() <= 0.0 {
        return Err(Error::NonPositiveMagnitude { bin: 0 });
    }
    let hs = hs.floored(MAGNITUDE_FLOOR_DB);
    let mut w = Vec::with_capacity(hp.len());
    for k in 0..hp.len() {
        let (p, d) = (hp.values()[k], d_mod.values()[k]);
        if d < p {
            return Err(Error::NegativeRadicand { bin: k });
        }
        w.push(((d - p) * (d + p)).sqrt() / hs.values()[k]);
    }
    let design_magnitude = hp.with_values(w)?;
    let taps = if design_magnitude.max() == 0.0 {
        vec![0.0; cfg.n_taps]
    } else {
        minimum_phase_fir(&design_magnitude.floored(MAGNITUDE_FLOOR_DB), cfg.n_taps)?
    };
    Ok(CompensationFilter {
        taps,
        kind: FilterKind::ProposedSupporting,
        sample_rate_hz: cfg.sample_rate_hz,
        design_metadata: DesignMetadata {
            config: cfg.clone(),
            target: None,
            gain_db: None,
        },
        design_magnitude,
    })
}

/// Regularized inverse `w = h d / (h^2 + beta h)`, with `beta_in_band`
/// inside `band_hz` and `beta_out_band` elsewhere.
pub fn design_traditional_inverse(
    h: &MagnitudeSpectrum,
    d: &MagnitudeSpectrum,
    cfg: &DesignConfig,
    band_hz: [f64; 2],
) -> Result<CompensationFilter> {
    cfg.validate()?;
    h.ensure_same_grid(d)?;
    check_grid(h, cfg)?;
    if h.max() <= 0.0 {
        return Err(Error::NonPositiveMagnitude { bin: 0 });
    }
    let h = h.floored(MAGNITUDE_FLOOR_DB);
    let w: Vec<f64> = (0..h.len())
        .map(|k| {
            let f = h.frequency(k);
            let beta = if f >= band_hz[0] && f <= band_hz[1] {
                cfg.beta_in_band
            } else {
                cfg.beta_out_band
            };
            let hk = h.values()[k];
            hk * d.values()[k] / (hk * hk + beta * hk)
        })
        .collect();
    let design_magnitude = h.with_values(w)?;
    if design_magnitude.max() <= 0.0 {
        return Err(Error::NonPositiveMagnitude { bin: 0 });
    }
    let taps = minimum_phase_fir(&design_magnitude.floored(MAGNITUDE_FLOOR_DB), cfg.n_taps)?;
    Ok(CompensationFilter {
        taps,
        kind: FilterKind::TraditionalInverse,
        sample_rate_hz: cfg.sample_rate_hz,
        design_metadata: DesignMetadata {
            config: cfg.clone(),
            target: None,
            gain_db: None,
        },
        design_magnitude,
    })
}

fn check_grid(spec: &MagnitudeSpectrum, cfg: &DesignConfig) -> Result<()> {
    if spec.n_fft() != cfg.n_fft || spec.sample_rate_hz() != cfg.sample_rate_hz {
        return Err(Error::GridMismatch(format!(
            "spectrum n_fft {} @ {} Hz, config n_fft {} @ {} Hz",
            spec.n_fft(),
            spec.sample_rate_hz(),
            cfg.n_fft,
            cfg.sample_rate_hz
        )));
    }
    Ok(())
}
