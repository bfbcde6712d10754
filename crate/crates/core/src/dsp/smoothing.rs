//! Fractional-octave smoothing on a uniform DFT grid.
//!
//! Every output bin is the mean power over the bins whose centre frequency
//! lies within `±fraction/2` octaves of its own centre frequency. The window
//! is rectangular in log-frequency and clipped at DC and Nyquist. Smoothing
//! is done on power and the square root is returned.

use super::spectrum::MagnitudeSpectrum;
use crate::error::{Error, Result};

/// Smooths a magnitude spectrum by `fraction` octaves (1/3 for third-octave).
pub fn fractional_octave_smooth(spec: &MagnitudeSpectrum, fraction: f64) -> Result<MagnitudeSpectrum> {
    let power = spec.power();
    let smoothed = smooth_power(&power, fraction)?;
    spec.with_values(smoothed.into_iter().map(f64::sqrt).collect())
}

/// Smooths only the bins in `[low_hz, high_hz]`, with every window clipped
/// to that band so nothing outside it leaks in. Other bins pass through.
pub fn band_limited_smooth(
    spec: &MagnitudeSpectrum,
    fraction: f64,
    low_hz: f64,
    high_hz: f64,
) -> Result<MagnitudeSpectrum> {
    let bins = spec.bins_in_band(low_hz, high_hz);
    let (first, last) = (*bins.start(), *bins.end());
    let mut values = spec.values().to_vec();
    if first > last {
        return spec.with_values(values);
    }
    let power = spec.power();
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(Error::invalid("fraction", format!("{fraction} must be >= 0")));
    }
    let prefix = CompensatedPrefix::new(&power);
    for k in first..=last {
        let (lo, hi) = window_bounds(k, power.len(), fraction);
        let (lo, hi) = (lo.max(first), hi.min(last));
        values[k] = (prefix.range_sum(lo, hi) / (hi - lo + 1) as f64).max(0.0).sqrt();
    }
    spec.with_values(values)
}

/// Inclusive window bounds for `bin` on a grid with `n_bins` bins.
pub fn window_bounds(bin: usize, n_bins: usize, fraction: f64) -> (usize, usize) {
    if bin == 0 {
        return (0, 0);
    }
    let half_width = 2f64.powf(fraction / 2.0);
    let k = bin as f64;
    let lo = (k / half_width).ceil() as usize;
    let hi = ((k * half_width).floor() as usize).min(n_bins - 1);
    (lo.min(bin), hi.max(bin))
}

/// Window-mean of a non-negative per-bin quantity (power or power ratio).
pub fn smooth_power(power: &[f64], fraction: f64) -> Result<Vec<f64>> {
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(Error::invalid("fraction", format!("{fraction} must be >= 0")));
    }
    if power.is_empty() {
        return Ok(Vec::new());
    }
    if fraction == 0.0 {
        return Ok(power.to_vec());
    }
    let prefix = CompensatedPrefix::new(power);
    Ok((0..power.len())
        .map(|k| {
            let (lo, hi) = window_bounds(k, power.len(), fraction);
            (prefix.range_sum(lo, hi) / (hi - lo + 1) as f64).max(0.0)
        })
        .collect())
}

/// Prefix sums kept as unevaluated (hi, lo) pairs so that window sums over a
/// spectrum with a 100+ dB dynamic range stay accurate.
struct CompensatedPrefix {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl CompensatedPrefix {
    fn new(values: &[f64]) -> Self {
        let mut hi = Vec::with_capacity(values.len() + 1);
        let mut lo = Vec::with_capacity(values.len() + 1);
        let (mut s, mut c) = (0.0f64, 0.0f64);
        hi.push(0.0);
        lo.push(0.0);
        for &v in values {
            // two-sum
            let t = s + v;
            let bp = t - s;
            let err = (s - (t - bp)) + (v - bp);
            s = t;
            c += err;
            hi.push(s);
            lo.push(c);
        }
        Self { hi, lo }
    }

    fn range_sum(&self, first: usize, last: usize) -> f64 {
        (self.hi[last + 1] - self.hi[first]) + (self.lo[last + 1] - self.lo[first])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(power: &[f64], df: f64, fraction: f64) -> Vec<f64> {
        let k = 2f64.powf(fraction / 2.0);
        (0..power.len())
            .map(|c| {
                let fc = c as f64 * df;
                let mut sum = 0.0;
                let mut n = 0usize;
                for (i, p) in power.iter().enumerate() {
                    let f = i as f64 * df;
                    if i == c || (fc > 0.0 && f >= fc / k && f <= fc * k) {
                        sum += p;
                        n += 1;
                    }
                }
                sum / n as f64
            })
            .collect()
    }

    #[test]
    fn constants_are_preserved() {
        let s = MagnitudeSpectrum::constant(0.37, 1024, 44100).unwrap();
        let out = fractional_octave_smooth(&s, 1.0 / 3.0).unwrap();
        for v in out.values() {
            assert!((v - 0.37).abs() < 1e-14);
        }
    }

    #[test]
    fn spike_matches_window_power_oracle() {
        let n_fft = 2048;
        let mut vals = vec![1e-3; n_fft / 2 + 1];
        vals[300] = 10.0;
        let s = MagnitudeSpectrum::new(vals, n_fft, 44100).unwrap();
        let out = fractional_octave_smooth(&s, 1.0 / 3.0).unwrap();
        let expected = oracle(&s.power(), s.bin_spacing_hz(), 1.0 / 3.0);
        for (k, (o, e)) in out.values().iter().zip(&expected).enumerate() {
            assert!((o * o - e).abs() <= 1e-9 * e, "bin {k}: {} vs {e}", o * o);
        }
        // the spike's power is shared only by bins whose window contains it
        let touched = out.values().iter().filter(|v| **v > 2e-3).count();
        assert!(touched > 1 && touched < 200);
    }

    #[test]
    fn zero_fraction_is_identity() {
        let vals: Vec<f64> = (0..513).map(|k| 1.0 + (k as f64 * 0.1).sin().abs()).collect();
        let s = MagnitudeSpectrum::new(vals, 1024, 48000).unwrap();
        assert_eq!(fractional_octave_smooth(&s, 0.0).unwrap(), s);
        // a tiny fraction collapses every window to one bin
        let out = fractional_octave_smooth(&s, 1e-9).unwrap();
        for (a, b) in out.values().iter().zip(s.values()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_fraction_is_rejected() {
        let s = MagnitudeSpectrum::constant(1.0, 16, 48000).unwrap();
        assert!(fractional_octave_smooth(&s, -0.1).is_err());
    }

    #[test]
    fn windows_clip_at_nyquist() {
        let (lo, hi) = window_bounds(512, 513, 1.0 / 3.0);
        assert_eq!(hi, 512);
        assert!(lo < 512);
    }

    #[test]
    fn band_limited_keeps_constants_in_band() {
        let s = MagnitudeSpectrum::constant(0.8, 4096, 44100).unwrap();
        let out = band_limited_smooth(&s, 1.0 / 3.0, 100.0, 20000.0).unwrap();
        for v in out.values() {
            assert!((v - 0.8).abs() < 1e-14);
        }
    }

    #[test]
    fn band_limited_ignores_energy_outside_the_band() {
        let n_fft = 4096;
        let mut vals = vec![1.0; n_fft / 2 + 1];
        let s0 = MagnitudeSpectrum::new(vals.clone(), n_fft, 44100).unwrap();
        let band = s0.bins_in_band(100.0, 20000.0);
        let (first, last) = (*band.start(), *band.end());
        vals[first - 1] = 1e6;
        vals[last + 1] = 1e6;
        let s = MagnitudeSpectrum::new(vals.clone(), n_fft, 44100).unwrap();
        let out = band_limited_smooth(&s, 1.0 / 3.0, 100.0, 20000.0).unwrap();
        for k in first..=last {
            assert!((out.values()[k] - 1.0).abs() < 1e-12, "bin {k}");
        }
        // out-of-band bins pass through untouched
        for k in (0..first).chain(last + 1..vals.len()) {
            assert_eq!(out.values()[k], vals[k]);
        }
    }

    #[test]
    fn band_limited_rejects_negative_fraction() {
        let s = MagnitudeSpectrum::constant(1.0, 1024, 44100).unwrap();
        assert!(band_limited_smooth(&s, -1.0, 100.0, 20000.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn power_scaling_commutes(
            vals in proptest::collection::vec(0.0f64..10.0, 129),
            c in 0.01f64..100.0,
        ) {
            let s = MagnitudeSpectrum::new(vals, 256, 48000).unwrap();
            let a = fractional_octave_smooth(&s.scaled(c.sqrt()), 1.0 / 3.0).unwrap();
            let b = fractional_octave_smooth(&s, 1.0 / 3.0).unwrap();
            for (x, y) in a.values().iter().zip(b.values()) {
                proptest::prop_assert!((x * x - c * y * y).abs() <= 1e-9 * (c * y * y).max(1e-12));
            }
        }

        #[test]
        fn matches_oracle(vals in proptest::collection::vec(0.0f64..10.0, 257)) {
            let s = MagnitudeSpectrum::new(vals, 512, 44100).unwrap();
            let out = fractional_octave_smooth(&s, 1.0 / 3.0).unwrap();
            let exp = oracle(&s.power(), s.bin_spacing_hz(), 1.0 / 3.0);
            for (o, e) in out.values().iter().zip(&exp) {
                proptest::prop_assert!((o * o - e).abs() <= 1e-9 * e.max(1e-12));
            }
        }
    }
}
