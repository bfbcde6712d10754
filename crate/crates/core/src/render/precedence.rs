use serde::{Deserialize, Serialize};

use crate::design::TargetSpec;
use crate::dsp::{amplitude_to_db, MagnitudeSpectrum};
use crate::error::{Error, Result};

/// Slack (dB) allowed before an excess counts as a violation.
const VIOLATION_TOLERANCE_DB: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMargin {
    pub band_hz: [f64; 2],
    pub threshold_db: f64,
    /// Largest supporting-over-primary level in the band.
    pub max_level_db: f64,
    /// `threshold_db - max_level_db`; negative when violated.
    pub margin_db: f64,
    pub violating_bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecedenceReport {
    pub bands: Vec<BandMargin>,
}

impl PrecedenceReport {
    pub fn violations(&self) -> usize {
        self.bands.iter().map(|b| b.violating_bins).sum()
    }

    pub fn min_margin_db(&self) -> f64 {
        self.bands.iter().map(|b| b.margin_db).fold(f64::INFINITY, f64::min)
    }
}

/// Compares the supporting contribution with the primary response band by
/// band against the precedence thresholds. Bins outside the compensation
/// band are ignored.
pub fn verify_precedence_margin(
    primary_mag: &MagnitudeSpectrum,
    supporting_mag: &MagnitudeSpectrum,
    spec: &TargetSpec,
) -> Result<PrecedenceReport> {
    primary_mag.ensure_same_grid(supporting_mag)?;
    spec.validate()?;
    let mut bands = Vec::new();
    for t in &spec.precedence_thresholds {
        let lo = t.band_hz[0].max(spec.compensation_band_hz[0]);
        let hi = t.band_hz[1].min(spec.compensation_band_hz[1]);
        let mut max_level = f64::NEG_INFINITY;
        let mut violating = 0;
        for k in primary_mag.bins_in_band(lo, hi) {
            let f = primary_mag.frequency(k);
            if spec.threshold_db(f) != Some(t.threshold_db) {
                continue;
            }
            let p = primary_mag.values()[k];
            if p <= 0.0 {
                return Err(Error::NonPositiveMagnitude { bin: k });
            }
            let level = amplitude_to_db(supporting_mag.values()[k] / p);
            max_level = max_level.max(level);
            if level > t.threshold_db + VIOLATION_TOLERANCE_DB {
                violating += 1;
            }
        }
        bands.push(BandMargin {
            band_hz: t.band_hz,
            threshold_db: t.threshold_db,
            max_level_db: max_level,
            margin_db: t.threshold_db - max_level,
            violating_bins: violating,
        });
    }
    Ok(PrecedenceReport { bands })
}
