use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dsp::ImpulseResponse;
use crate::error::{Error, Result};

/// Zero-phase octave band around `centre_hz`.
pub fn octave_band(ir: &ImpulseResponse, centre_hz: f64) -> Result<ImpulseResponse> {
    band_filter(ir, centre_hz / 2f64.sqrt(), centre_hz * 2f64.sqrt())
}

/// Zero-phase band-pass: unity between `low_hz` and `high_hz`, with
/// raised-cosine skirts a sixth of an octave wide either side of each edge.
pub fn band_filter(ir: &ImpulseResponse, low_hz: f64, high_hz: f64) -> Result<ImpulseResponse> {
    if ir.is_empty() {
        return Err(Error::EmptySignal);
    }
    let fs = ir.sample_rate_hz() as f64;
    if !(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0) {
        return Err(Error::invalid(
            "band",
            format!("{low_hz}..{high_hz} Hz is not inside the audio band"),
        ));
    }
    let centre_hz = (low_hz * high_hz).sqrt();
    let half_octaves = (high_hz / low_hz).log2() / 2.0;
    // room for the acausal skirt of the zero-phase response
    let n = (2 * ir.len()).next_power_of_two();
    let mut buf: Vec<Complex64> = ir.samples().iter().map(|x| Complex64::new(*x, 0.0)).collect();
    buf.resize(n, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let skirt = 1.0 / 6.0;
    for (k, v) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k);
        let f = bin as f64 * fs / n as f64;
        let x = if f > 0.0 {
            (f / centre_hz).log2().abs()
        } else {
            f64::INFINITY
        };
        let g = if x <= half_octaves - skirt {
            1.0
        } else if x >= half_octaves + skirt {
            0.0
        } else {
            0.5 * (1.0 + (std::f64::consts::PI * (x - half_octaves + skirt) / (2.0 * skirt)).cos())
        };
        *v *= g / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    ImpulseResponse::new(buf[..ir.len()].iter().map(|c| c.re).collect(), ir.sample_rate_hz())
}

/// Schroeder backward-integrated energy decay curve in dB, normalized to
/// 0 dB at the first sample.
pub fn energy_decay_curve(ir: &ImpulseResponse) -> Result<Vec<f64>> {
    if ir.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mut acc = 0.0;
    let mut edc: Vec<f64> = ir
        .samples()
        .iter()
        .rev()
        .map(|x| {
            acc += x * x;
            acc
        })
        .collect();
    edc.reverse();
    let total = edc[0];
    if total == 0.0 {
        return Err(Error::SilentSignal);
    }
    Ok(edc.iter().map(|e| 10.0 * (e / total).log10()).collect())
}

/// Reverberation time from a least-squares line through the decay curve
/// between -5 dB and -5 - `range_db` dB, extrapolated to 60 dB.
pub fn schroeder_t60(ir: &ImpulseResponse, range_db: f64) -> Result<f64> {
    let edc = energy_decay_curve(ir)?;
    let start = edc.iter().position(|e| *e <= -5.0);
    let end = edc.iter().position(|e| *e <= -5.0 - range_db);
    let (Some(start), Some(end)) = (start, end) else {
        return Err(Error::invalid(
            "ir",
            format!("decay does not span {range_db} dB below -5 dB"),
        ));
    };
    let fs = ir.sample_rate_hz() as f64;
    let n = (end - start + 1) as f64;
    let (mut st, mut se, mut stt, mut ste) = (0.0, 0.0, 0.0, 0.0);
    for (i, e) in edc[start..=end].iter().enumerate() {
        let t = (start + i) as f64 / fs;
        st += t;
        se += e;
        stt += t * t;
        ste += t * e;
    }
    let slope = (n * ste - st * se) / (n * stt - st * st);
    if !(slope < 0.0) {
        return Err(Error::invalid("ir", "energy does not decay"));
    }
    Ok(-60.0 / slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_recovers_t60() {
        let fs = 8000u32;
        let t60 = 0.5;
        // amplitude decays by 60 dB in t60 seconds
        let x: Vec<f64> = (0..8000)
            .map(|n| 10f64.powf(-3.0 * n as f64 / (t60 * fs as f64)))
            .collect();
        let ir = ImpulseResponse::new(x, fs).unwrap();
        let t = schroeder_t60(&ir, 20.0).unwrap();
        assert!((t - t60).abs() < 0.005, "{t}");
    }

    #[test]
    fn octave_band_passes_centre_and_rejects_far_tones() {
        let fs = 8000u32;
        let tone = |f: f64| {
            ImpulseResponse::new(
                (0..4000)
                    .map(|n| (2.0 * std::f64::consts::PI * f * n as f64 / fs as f64).sin())
                    .collect(),
                fs,
            )
            .unwrap()
        };
        let pass = octave_band(&tone(1000.0), 1000.0).unwrap();
        let stop = octave_band(&tone(250.0), 1000.0).unwrap();
        let mid = |ir: &ImpulseResponse| ir.samples()[1000..3000].iter().map(|x| x * x).sum::<f64>();
        let reference = mid(&tone(1000.0));
        assert!((mid(&pass) / reference - 1.0).abs() < 0.01);
        assert!(mid(&stop) / reference < 1e-4);
    }

    #[test]
    fn curve_starts_at_zero_db() {
        let ir = ImpulseResponse::new(vec![1.0, 0.5, 0.25], 1000).unwrap();
        let edc = energy_decay_curve(&ir).unwrap();
        assert_eq!(edc[0], 0.0);
        assert!(edc.windows(2).all(|w| w[1] < w[0]));
    }
}
