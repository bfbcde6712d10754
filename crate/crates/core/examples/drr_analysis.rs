//! Direct-to-reverberant ratio of a simulated response, and why a filter on
//! the primary loudspeaker alone cannot change it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomcomp::analysis::{drr_spectrum, split_direct_reverberant, SplitMode};
use roomcomp::dsp::{convolve, ImpulseResponse};
use roomcomp::room::{simulate_rir, ReceiverSpec, RoomSpec, SourceSpec};

fn main() -> roomcomp::Result<()> {
    let fs = 44100;
    let mut room = RoomSpec::default_listening_room();
    room.max_reflection_time_s = 0.5;
    let ir = simulate_rir(
        &room,
        &SourceSpec::omni([1.2, 1.1, 1.2]),
        &ReceiverSpec {
            position_m: [3.7, 2.9, 1.2],
        },
        fs,
    )?;
    let split = split_direct_reverberant(&ir, SplitMode::default())?;
    let drr = drr_spectrum(&split.direct, &split.reverberant, 65536, 1.0 / 3.0)?;

    // the same random filter applied to direct and reverberant parts
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w: Vec<f64> = (0..512).map(|_| rng.random_range(-1.0..1.0)).collect();
    let fd = ImpulseResponse::new(convolve(split.direct.samples(), &w)?, fs)?;
    let fr = ImpulseResponse::new(convolve(split.reverberant.samples(), &w)?, fs)?;
    let filtered = drr_spectrum(&fd, &fr, 65536, 1.0 / 3.0)?;

    println!("{:>8} {:>10} {:>10}", "Hz", "DRR dB", "filtered");
    for f in [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0] {
        let k = drr.frequencies_hz.iter().position(|x| *x >= f).unwrap();
        println!("{f:>8.0} {:>+10.2} {:>+10.2}", drr.drr_db[k], filtered.drr_db[k]);
    }
    println!("DRR spread 100 Hz..20 kHz: {:.2} dB", drr.std_dev_db(100.0, 20000.0));
    Ok(())
}
