use serde::{Deserialize, Serialize};

use super::split::SplitIR;
use crate::dsp::{add_signals, power_spectrum, power_to_db, smooth_power, ImpulseResponse};
use crate::error::{Error, Result};

/// Relative power below which a bin counts as silent.
pub const POWER_FLOOR_DB: f64 = -120.0;

/// Direct-to-reverberant ratio per DFT bin.
///
/// `drr_db` is `+inf` where the smoothed reverberant power is below the
/// floor and `-inf` where no bin in the smoothing window carries direct
/// sound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrrCurve {
    pub frequencies_hz: Vec<f64>,
    pub drr_db: Vec<f64>,
}

impl DrrCurve {
    /// Values with frequency in `[low_hz, high_hz]`.
    pub fn band(&self, low_hz: f64, high_hz: f64) -> Vec<f64> {
        self.frequencies_hz
            .iter()
            .zip(&self.drr_db)
            .filter(|(f, _)| **f >= low_hz && **f <= high_hz)
            .map(|(_, d)| *d)
            .collect()
    }

    /// Population standard deviation (dB) of the finite values in a band.
    pub fn std_dev_db(&self, low_hz: f64, high_hz: f64) -> f64 {
        let v: Vec<f64> = self
            .band(low_hz, high_hz)
            .into_iter()
            .filter(|d| d.is_finite())
            .collect();
        if v.is_empty() {
            return 0.0;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        (v.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    }
}

/// DRR of a direct/reverberant pair.
///
/// The per-bin power ratio `|R|^2 / |D|^2` is smoothed and inverted, so any
/// filter applied to both parts cancels bin by bin before smoothing. For a
/// spectrally flat direct part this equals the ratio of the smoothed powers.
pub fn drr_spectrum(
    direct: &ImpulseResponse,
    reverberant: &ImpulseResponse,
    n_fft: usize,
    smoothing_fraction: f64,
) -> Result<DrrCurve> {
    direct.ensure_rate(reverberant)?;
    let fs = direct.sample_rate_hz();
    let pd = power_spectrum(direct.samples(), n_fft, fs)?;
    let pr = power_spectrum(reverberant.samples(), n_fft, fs)?;
    curve_from_powers(&pd, &pr, n_fft, fs, smoothing_fraction)
}

/// DRR of the proposed system: primary direct sound against the primary
/// reverberant part plus the rendered supporting contribution, summed in
/// the time domain.
pub fn drr_proposed(
    primary_split: &SplitIR,
    supporting_full: &ImpulseResponse,
    n_fft: usize,
    smoothing_fraction: f64,
) -> Result<DrrCurve> {
    primary_split.reverberant.ensure_rate(supporting_full)?;
    let reverberant = ImpulseResponse::new(
        add_signals(primary_split.reverberant.samples(), supporting_full.samples()),
        supporting_full.sample_rate_hz(),
    )?;
    drr_spectrum(&primary_split.direct, &reverberant, n_fft, smoothing_fraction)
}

fn curve_from_powers(pd: &[f64], pr: &[f64], n_fft: usize, fs: u32, fraction: f64) -> Result<DrrCurve> {
    let max_d = pd.iter().cloned().fold(0.0, f64::max);
    let max_r = pr.iter().cloned().fold(0.0, f64::max);
    if max_d == 0.0 {
        return Err(Error::SilentSignal);
    }
    let floor = 10f64.powf(POWER_FLOOR_DB / 10.0);
    let direct_floor = max_d * floor;
    let reverb_floor = max_d.max(max_r) * floor;

    let (ratio, valid): (Vec<f64>, Vec<f64>) = pd
        .iter()
        .zip(pr)
        .map(|(d, r)| if *d > direct_floor { (r / d, 1.0) } else { (0.0, 0.0) })
        .unzip();
    let ratio = smooth_power(&ratio, fraction)?;
    let valid = smooth_power(&valid, fraction)?;
    let reverb = smooth_power(pr, fraction)?;

    let bin_hz = fs as f64 / n_fft as f64;
    let drr_db = (0..pd.len())
        .map(|k| {
            if reverb[k] < reverb_floor {
                f64::INFINITY
            } else if valid[k] == 0.0 {
                f64::NEG_INFINITY
            } else {
                -power_to_db(ratio[k] / valid[k])
            }
        })
        .collect();
    Ok(DrrCurve {
        frequencies_hz: (0..pd.len()).map(|k| k as f64 * bin_hz).collect(),
        drr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{split_direct_reverberant, SplitMode};

    fn pulse(at: usize, amp: f64) -> ImpulseResponse {
        let mut x = vec![0.0; 1024];
        x[at] = amp;
        ImpulseResponse::new(x, 44100).unwrap()
    }

    #[test]
    fn half_amplitude_reverb_is_six_db() {
        let c = drr_spectrum(&pulse(10, 1.0), &pulse(700, 0.5), 1024, 1.0 / 3.0).unwrap();
        for d in &c.drr_db {
            assert!((d - 6.0206).abs() < 1e-3, "{d}");
        }
    }

    #[test]
    fn silent_reverb_is_infinite() {
        let c = drr_spectrum(&pulse(10, 1.0), &pulse(700, 0.0), 1024, 1.0 / 3.0).unwrap();
        assert!(c.drr_db.iter().all(|d| *d == f64::INFINITY));
    }

    #[test]
    fn frequencies_ascend() {
        let c = drr_spectrum(&pulse(10, 1.0), &pulse(700, 0.5), 256, 1.0 / 3.0).unwrap();
        assert_eq!(c.frequencies_hz.len(), 129);
        assert!(c.frequencies_hz.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn proposed_with_silent_support_reduces_to_plain() {
        let mut x = vec![0.0; 2048];
        x[100] = 1.0;
        x[900] = 0.3;
        x[1300] = -0.2;
        let split = split_direct_reverberant(&ImpulseResponse::new(x, 44100).unwrap(), SplitMode::default()).unwrap();
        let plain = drr_spectrum(&split.direct, &split.reverberant, 2048, 1.0 / 3.0).unwrap();
        let support = ImpulseResponse::new(vec![0.0; 3000], 44100).unwrap();
        let prop = drr_proposed(&split, &support, 2048, 1.0 / 3.0).unwrap();
        assert_eq!(plain, prop);
    }

    #[test]
    fn std_dev_ignores_sentinels() {
        let c = DrrCurve {
            frequencies_hz: vec![1.0, 2.0, 3.0, 4.0],
            drr_db: vec![1.0, f64::INFINITY, 3.0, 5.0],
        };
        let expected = (8.0f64 / 3.0).sqrt();
        assert!((c.std_dev_db(0.0, 10.0) - expected).abs() < 1e-12);
    }
}
