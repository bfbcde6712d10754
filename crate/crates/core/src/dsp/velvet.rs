use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default pulse density: one pulse every 20 samples at 44.1 kHz.
pub const DEFAULT_VELVET_DENSITY: f64 = 2205.0;

/// Sparse ternary sequence with exactly one ±1 pulse per grid interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelvetNoise {
    samples: Vec<f64>,
    density_pulses_per_s: f64,
    grid_interval: usize,
    seed: u64,
}

impl VelvetNoise {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn density_pulses_per_s(&self) -> f64 {
        self.density_pulses_per_s
    }

    pub fn grid_interval(&self) -> usize {
        self.grid_interval
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn pulse_count(&self) -> usize {
        self.samples.iter().filter(|v| **v != 0.0).count()
    }

    /// The sequence scaled to unit energy, so that its mean power spectrum
    /// is flat at 0 dB.
    pub fn normalized(&self) -> Vec<f64> {
        let n = self.pulse_count();
        if n == 0 {
            return self.samples.clone();
        }
        let g = 1.0 / (n as f64).sqrt();
        self.samples.iter().map(|v| v * g).collect()
    }
}

/// Generates velvet noise of `duration_s` with one pulse per interval of
/// `round(fs / density)` samples. Pulse position within each interval and
/// its sign are drawn from a ChaCha stream seeded with `seed`.
pub fn generate_velvet_noise(
    duration_s: f64,
    density_pulses_per_s: f64,
    sample_rate_hz: u32,
    seed: u64,
) -> Result<VelvetNoise> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::invalid("duration_s", "must be positive"));
    }
    if !(density_pulses_per_s > 0.0 && density_pulses_per_s.is_finite()) {
        return Err(Error::invalid("density_pulses_per_s", "must be positive"));
    }
    let fs = sample_rate_hz as f64;
    if density_pulses_per_s > fs {
        return Err(Error::invalid(
            "density_pulses_per_s",
            format!("grid interval below one sample ({density_pulses_per_s} > {fs})"),
        ));
    }
    let grid = (fs / density_pulses_per_s).round() as usize;
    let len = (duration_s * fs).round() as usize;
    let intervals = len / grid;
    if intervals == 0 {
        return Err(Error::invalid("duration_s", "shorter than one grid interval"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![0.0; len];
    for m in 0..intervals {
        let offset = rng.random_range(0..grid);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        samples[m * grid + offset] = sign;
    }
    Ok(VelvetNoise {
        samples,
        density_pulses_per_s,
        grid_interval: grid,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{dft, fractional_octave_smooth};

    #[test]
    fn one_pulse_per_interval() {
        let v = generate_velvet_noise(1.0, 2205.0, 44100, 3).unwrap();
        assert_eq!(v.samples().len(), 44100);
        assert_eq!(v.grid_interval(), 20);
        assert_eq!(v.pulse_count(), 2205);
        for chunk in v.samples().chunks(20) {
            assert_eq!(chunk.iter().filter(|x| **x != 0.0).count(), 1);
            assert!(chunk.iter().all(|x| *x == 0.0 || x.abs() == 1.0));
        }
    }

    #[test]
    fn seeded_and_deterministic() {
        let a = generate_velvet_noise(0.5, 2205.0, 44100, 11).unwrap();
        let b = generate_velvet_noise(0.5, 2205.0, 44100, 11).unwrap();
        let c = generate_velvet_noise(0.5, 2205.0, 44100, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn signs_are_balanced() {
        let v = generate_velvet_noise(1.0, 2205.0, 44100, 5).unwrap();
        let pos = v.samples().iter().filter(|x| **x > 0.0).count() as f64;
        let frac = pos / v.pulse_count() as f64;
        assert!((frac - 0.5).abs() < 0.05, "{frac}");
    }

    #[test]
    fn density_above_sample_rate_is_rejected() {
        assert!(generate_velvet_noise(1.0, 50000.0, 44100, 0).is_err());
    }

    #[test]
    fn normalized_has_unit_energy() {
        let v = generate_velvet_noise(0.03, 2205.0, 44100, 1).unwrap();
        let e: f64 = v.normalized().iter().map(|x| x * x).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    fn band_deviation_db(power: &[f64], n_fft: usize) -> f64 {
        let mag = crate::dsp::MagnitudeSpectrum::new(power.iter().map(|p| p.sqrt()).collect(), n_fft, 44100).unwrap();
        let smooth = fractional_octave_smooth(&mag, 1.0 / 3.0).unwrap();
        let band: Vec<f64> = smooth
            .bins_in_band(100.0, 20000.0)
            .map(|k| 20.0 * smooth.values()[k].log10())
            .collect();
        let mean = band.iter().sum::<f64>() / band.len() as f64;
        band.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn smoothed_spectrum_is_flat() {
        // A single 1 s realization has ~23 independent spectral samples per
        // third-octave at 100 Hz, so the flatness bound is checked on the
        // mean power over ten seeds; one realization gets a looser bound.
        let n_fft = 1 << 16;
        let mut mean_power = vec![0.0; n_fft / 2 + 1];
        for seed in 0..10 {
            let v = generate_velvet_noise(1.0, 2205.0, 44100, seed).unwrap();
            let p = dft(&v.normalized(), n_fft, 44100).unwrap().power();
            let single = band_deviation_db(&p, n_fft);
            assert!(single <= 3.0, "seed {seed}: {single} dB");
            for (m, x) in mean_power.iter_mut().zip(p) {
                *m += x / 10.0;
            }
        }
        let worst = band_deviation_db(&mean_power, n_fft);
        assert!(worst <= 1.5, "deviation {worst} dB");
    }

    #[test]
    fn autocorrelation_is_impulsive() {
        let mut worst_mean = 0.0f64;
        let seeds = 10;
        let len = 4410;
        let mut acc = vec![0.0; 200];
        for seed in 0..seeds {
            let v = generate_velvet_noise(0.1, 2205.0, 44100, seed).unwrap();
            let x = v.samples();
            let r0: f64 = x.iter().map(|a| a * a).sum();
            assert_eq!(r0, v.pulse_count() as f64);
            for (lag, a) in acc.iter_mut().enumerate().skip(21) {
                let r: f64 = (0..len - lag).map(|i| x[i] * x[i + lag]).sum();
                *a += (r / r0).abs() / seeds as f64;
            }
        }
        for a in &acc[21..] {
            worst_mean = worst_mean.max(*a);
        }
        assert!(worst_mean < 0.1, "{worst_mean}");
    }
}
