use crate::dsp::{amplitude_to_db, MagnitudeSpectrum};
use crate::error::{Error, Result};

/// Spectral deviation (dB): the sample standard deviation of the level of
/// `spec` over bins in `[f_low_hz, f_high_hz]` around its arithmetic mean
/// level. `spec` is expected to be smoothed already.
pub fn spectral_deviation(spec: &MagnitudeSpectrum, f_low_hz: f64, f_high_hz: f64) -> Result<f64> {
    let bins = spec.bins_in_band(f_low_hz, f_high_hz);
    let levels: Vec<f64> = bins.map(|k| amplitude_to_db(spec.values()[k])).collect();
    if levels.len() < 2 {
        return Err(Error::invalid(
            "band",
            format!("fewer than two bins in {f_low_hz}..{f_high_hz} Hz"),
        ));
    }
    if levels.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonPositiveMagnitude {
            bin: spec.bins_in_band(f_low_hz, f_high_hz).start()
                + levels.iter().position(|l| !l.is_finite()).unwrap_or(0),
        });
    }
    let n = levels.len() as f64;
    let rough = levels.iter().sum::<f64>() / n;
    let mean = rough + levels.iter().map(|l| l - rough).sum::<f64>() / n;
    let ss: f64 = levels.iter().map(|l| (l - mean).powi(2)).sum();
    Ok((ss / (levels.len() - 1) as f64).sqrt())
}
