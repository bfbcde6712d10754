//! The default two-channel project end to end: simulate the room, design
//! both filters per channel, render all three systems and compare them.
//!
//! cargo run --release --example full_pipeline

use roomcomp::io::ProjectConfig;
use roomcomp::pipeline::{channel_precedence, run_channels, simulate, system_drr, System, DEVIATION_BAND_HZ};

fn main() -> roomcomp::Result<()> {
    let cfg = ProjectConfig::default();
    let (n_fft, fraction) = (cfg.design.n_fft, cfg.design.smoothing_fraction);

    let sim = simulate(&cfg)?;
    println!("simulated {} source/receiver pairs", sim.responses.len());

    for run in run_channels(&cfg, &sim)? {
        let d = &run.design;
        println!(
            "\n[{}] delay {} samples, gain {:+.2} dB",
            d.name, d.delay_samples, d.gain_db
        );

        let precedence = channel_precedence(&run.rendered, &cfg.target, n_fft, fraction)?;
        println!(
            "precedence: {} violating bins, min margin {:.2} dB",
            precedence.violations(),
            precedence.min_margin_db()
        );

        let sd = run.spectral_deviations(n_fft, fraction)?;
        let [lo, hi] = DEVIATION_BAND_HZ;
        for system in System::ALL {
            let spread: Vec<String> = run
                .rendered
                .iter()
                .map(|r| {
                    Ok(format!(
                        "{:.2}",
                        system_drr(r, system, n_fft, fraction)?.std_dev_db(lo, hi)
                    ))
                })
                .collect::<roomcomp::Result<_>>()?;
            println!(
                "{:<14} S_D {:.3} dB   DRR spread per receiver [{}] dB",
                system.name(),
                sd[&system],
                spread.join(", ")
            );
        }
    }
    Ok(())
}
