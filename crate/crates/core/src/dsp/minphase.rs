use num_complex::Complex64;
use rustfft::FftPlanner;

use super::spectrum::MagnitudeSpectrum;
use crate::error::{Error, Result};

/// Dynamic-range floor applied before any log or division, relative to the
/// spectrum maximum.
pub const MAGNITUDE_FLOOR_DB: f64 = -100.0;

/// Realizes `target_mag` as a causal minimum-phase FIR of `n_taps` taps.
///
/// Uses the real cepstrum on the `n_fft` grid of the target: log-magnitude,
/// inverse transform, fold the anti-causal half onto the causal half,
/// exponentiate and transform back. Bins must be strictly positive; apply
/// [`MagnitudeSpectrum::floored`] first when the target has nulls.
pub fn minimum_phase_fir(target_mag: &MagnitudeSpectrum, n_taps: usize) -> Result<Vec<f64>> {
    let n = target_mag.n_fft();
    if n_taps == 0 || n_taps > n {
        return Err(Error::invalid("n_taps", format!("{n_taps} must be in 1..={n}")));
    }
    if let Some(bin) = target_mag.values().iter().position(|v| *v <= 0.0) {
        return Err(Error::NonPositiveMagnitude { bin });
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let half = n / 2;

    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (k, &m) in target_mag.values().iter().enumerate() {
        buf[k].re = m.ln();
        if k > 0 && k < half {
            buf[n - k].re = m.ln();
        }
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;

    // causal folding of the (real, even) cepstrum
    let mut folded = vec![Complex64::new(0.0, 0.0); n];
    folded[0].re = buf[0].re * scale;
    for i in 1..half {
        folded[i].re = 2.0 * buf[i].re * scale;
    }
    folded[half].re = buf[half].re * scale;

    fwd.process(&mut folded);
    for c in folded.iter_mut() {
        *c = c.exp();
    }
    inv.process(&mut folded);
    Ok(folded[..n_taps].iter().map(|c| c.re * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{dft, fractional_octave_smooth};

    #[test]
    fn flat_magnitude_gives_delta() {
        let flat = MagnitudeSpectrum::constant(1.0, 1024, 48000).unwrap();
        let h = minimum_phase_fir(&flat, 256).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-9);
        assert!(h[1..].iter().all(|v| v.abs() < 1e-6));

        let twice = MagnitudeSpectrum::constant(2.0, 1024, 48000).unwrap();
        let h = minimum_phase_fir(&twice, 256).unwrap();
        assert!((h[0] - 2.0).abs() < 1e-9);
        assert!(h[1..].iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn rejects_zero_bins() {
        let mut vals = vec![1.0; 513];
        vals[17] = 0.0;
        let m = MagnitudeSpectrum::new(vals, 1024, 48000).unwrap();
        assert!(matches!(
            minimum_phase_fir(&m, 64),
            Err(Error::NonPositiveMagnitude { bin: 17 })
        ));
        assert!(minimum_phase_fir(&m.floored(MAGNITUDE_FLOOR_DB), 64).is_ok());
    }

    fn one_pole_like(fs: u32, n_fft: usize) -> MagnitudeSpectrum {
        // shelving curve with a resonant bump, smoothed
        let raw = MagnitudeSpectrum::from_fn(n_fft, fs, |f| {
            let shelf = 1.0 / (1.0 + (f / 800.0).powi(2)).sqrt() + 0.2;
            let bump = 1.0 + 1.5 * (-((f.max(1.0) / 3000.0).ln()).powi(2) / 0.05).exp();
            shelf * bump
        })
        .unwrap();
        fractional_octave_smooth(&raw, 1.0 / 3.0).unwrap()
    }

    #[test]
    fn round_trip_magnitude_within_half_db() {
        let fs = 44100;
        let n_fft = 1 << 15;
        let target = one_pole_like(fs, n_fft);
        let h = minimum_phase_fir(&target, 8192).unwrap();
        let measured = dft(&h, n_fft, fs).unwrap().magnitude();
        for k in target.bins_in_band(100.0, 20000.0) {
            let err = 20.0 * (measured.values()[k] / target.values()[k]).log10();
            assert!(err.abs() < 0.5, "bin {k}: {err} dB");
        }
    }

    #[test]
    fn energy_is_front_loaded() {
        let target = one_pole_like(44100, 1 << 14);
        let h = minimum_phase_fir(&target, 4096).unwrap();
        let total: f64 = h.iter().map(|v| v * v).sum();
        let head: f64 = h[..1024].iter().map(|v| v * v).sum();
        assert!(head / total >= 0.9, "{}", head / total);
    }
}
