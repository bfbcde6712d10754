//! Regularized inverse filter: how the regularization depth limits the
//! boost at a deep notch.

use roomcomp::design::{design_traditional_inverse, DesignConfig};
use roomcomp::dsp::{amplitude_to_db, MagnitudeSpectrum};

fn main() -> roomcomp::Result<()> {
    let base = DesignConfig::default();
    // flat response with a 20 dB dip at 120 Hz and a 6 dB rise at 2 kHz
    let h = MagnitudeSpectrum::from_fn(base.n_fft, base.sample_rate_hz, |f| {
        let dip = 1.0 - 0.9 * (-((f / 120.0).log2() * 6.0).powi(2)).exp();
        let rise = 1.0 + (-((f / 2000.0).log2() * 3.0).powi(2)).exp();
        dip * rise
    })?;
    let target = MagnitudeSpectrum::constant(1.0, base.n_fft, base.sample_rate_hz)?;

    println!("{:>8} {:>10} {:>10}", "beta", "120 Hz", "2 kHz");
    for beta in [0.0, 0.001, 0.01, 0.1, 1.0] {
        let cfg = DesignConfig {
            beta_in_band: beta,
            ..base.clone()
        };
        let w = design_traditional_inverse(&h, &target, &cfg, [70.0, 20000.0])?;
        let at = |f: f64| amplitude_to_db(w.design_magnitude.values()[(f / h.bin_spacing_hz()).round() as usize]);
        println!("{beta:>8} {:>+10.2} {:>+10.2}", at(120.0), at(2000.0));
    }
    Ok(())
}
