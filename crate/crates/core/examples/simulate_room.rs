//! Shoebox room simulation: direct sound, reflections and decay time.
//!
//! cargo run --release --example simulate_room [out.wav]

use roomcomp::analysis::{band_filter, schroeder_t60};
use roomcomp::io::write_wav;
use roomcomp::room::{distance, simulate_components, ReceiverSpec, RoomSpec, SourceSpec, SurfaceAbsorption};

fn main() -> roomcomp::Result<()> {
    let fs = 44100;
    let mut room = RoomSpec::new([7.4, 4.6, 2.6], SurfaceAbsorption::uniform(0.3));
    room.max_reflection_time_s = 0.8;
    let src = SourceSpec::omni([1.2, 1.1, 1.2]);
    let rcv = ReceiverSpec {
        position_m: [3.7, 2.9, 1.2],
    };

    let parts = simulate_components(&room, &src, &rcv, fs)?;
    let ir = parts.full();
    let d = distance(src.position_m, rcv.position_m);
    println!("distance     {d:.3} m");
    println!("onset        {:?} samples", ir.direct_onset_index());
    println!("direct       {:.2} dB", 10.0 * parts.direct.energy().log10());
    println!("reverberant  {:.2} dB", 10.0 * parts.reverberant.energy().log10());

    let t60 = schroeder_t60(&band_filter(&ir, 250.0, 16000.0)?, 20.0)?;
    println!("T20 -> T60   {t60:.3} s (Sabine {:.3} s)", room.sabine_t60(3));

    if let Some(path) = std::env::args().nth(1) {
        write_wav(path.as_ref(), ir.samples(), fs)?;
        println!("wrote {path}");
    }
    Ok(())
}
