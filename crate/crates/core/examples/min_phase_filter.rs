//! Third-octave smoothing followed by a minimum-phase FIR realization.

use roomcomp::dsp::{amplitude_to_db, dft, fractional_octave_smooth, minimum_phase_fir, MagnitudeSpectrum};

fn main() -> roomcomp::Result<()> {
    let (n_fft, fs) = (65536, 44100);
    // a ragged response: a broad tilt plus a comb of narrow notches
    let raw = MagnitudeSpectrum::from_fn(n_fft, fs, |f| {
        let tilt = (1.0 + f / 2000.0).powf(-0.3);
        tilt * (1.0 - 0.9 * (f / 180.0 * std::f64::consts::PI).sin().powi(40))
    })?;
    let smooth = fractional_octave_smooth(&raw, 1.0 / 3.0)?;
    let taps = minimum_phase_fir(&smooth, 8192)?;

    let real = dft(&taps, n_fft, fs)?.magnitude();
    let real = fractional_octave_smooth(&real, 1.0 / 3.0)?;
    println!("{:>8} {:>9} {:>9} {:>9}", "Hz", "raw", "smoothed", "fir");
    for f in [63.0, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0] {
        let k = (f / raw.bin_spacing_hz()).round() as usize;
        println!(
            "{f:>8.0} {:>9.2} {:>9.2} {:>9.2}",
            amplitude_to_db(raw.values()[k]),
            amplitude_to_db(smooth.values()[k]),
            amplitude_to_db(real.values()[k])
        );
    }
    let peak = taps
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |m, (i, t)| if t.abs() > m.1 { (i, t.abs()) } else { m });
    println!("energy peak at tap {} of {}", peak.0, taps.len());
    Ok(())
}
