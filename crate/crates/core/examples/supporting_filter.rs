//! Designs the supporting-loudspeaker filter for one channel from measured
//! (here: synthetic) primary and supporting responses.
//!
//! cargo run --release --example supporting_filter [out.wav]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomcomp::dsp::{amplitude_to_db, ImpulseResponse};
use roomcomp::io::{write_wav, ProjectConfig};
use roomcomp::pipeline::design_channel;

const FS: u32 = 44100;

/// Unit direct pulse followed by exponentially decaying noise.
fn room_like(rng: &mut ChaCha8Rng, onset: usize, t60_s: f64) -> ImpulseResponse {
    let len = onset + (1.2 * t60_s * FS as f64) as usize;
    let decay = 6.91 / (t60_s * FS as f64);
    let mut x = vec![0.0; len];
    x[onset] = 1.0;
    for (i, s) in x.iter_mut().enumerate().skip(onset + 1) {
        *s = 0.05 * rng.random_range(-1.0..1.0) * (-decay * (i - onset) as f64).exp();
    }
    ImpulseResponse::with_onset(x, FS, Some(onset)).unwrap()
}

fn main() -> roomcomp::Result<()> {
    let cfg = ProjectConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let primary = [room_like(&mut rng, 300, 0.4), room_like(&mut rng, 305, 0.4)];
    let supporting = [room_like(&mut rng, 500, 0.4), room_like(&mut rng, 497, 0.4)];

    let design = design_channel(&cfg, 0, &primary, &supporting)?;
    let stats = design.constraint_stats(&cfg.target)?;
    println!("channel          {}", design.name);
    println!("supporting delay {} samples", design.delay_samples);
    println!("reference level  {:.2} dB", design.reference_level_db);
    println!("target gain      {:+.3} dB", design.gain_db);
    println!("raised bins      {}", stats.raised_bins);
    println!("lowered bins     {}", stats.lowered_bins);
    println!("residual         {:.2e}", design.reconstruction_residual());

    let w = &design.proposed.design_magnitude;
    for f in [50.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0] {
        let k = (f / w.bin_spacing_hz()).round() as usize;
        println!("  |w| at {f:>6.0} Hz  {:>8.2} dB", amplitude_to_db(w.values()[k]));
    }

    if let Some(path) = std::env::args().nth(1) {
        write_wav(path.as_ref(), &design.proposed.taps, FS)?;
        println!("wrote {path}");
    }
    Ok(())
}
