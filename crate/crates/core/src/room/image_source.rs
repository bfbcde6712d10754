//! Shoebox image-source simulation.
//!
//! Every image contributes a 32-tap Hann-windowed sinc placed at its
//! fractional arrival time, weighted per synthesis band by its reflection
//! factors and source directivity and divided by its path length. Band
//! weights are accumulated per band and realized once at the end through a
//! causal filter bank that sums exactly to a unit impulse, so an image with
//! equal gains in every band stays a clean band-unlimited pulse and no
//! image leaks energy ahead of its own arrival by more than the sinc
//! half-width.

use std::f64::consts::PI;

use super::directivity::{high_frequency_gain, transition_weight};
use super::spec::{distance, Directivity, ReceiverSpec, RoomSpec, SourceSpec};
use crate::dsp::{convolve, minimum_phase_fir, ImpulseResponse, MagnitudeSpectrum};
use crate::error::{Error, Result};

/// Centres of the synthesis octave bands (Hz).
pub const SYNTHESIS_BANDS_HZ: [f64; N_BANDS] = [
    31.25, 62.5, 125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 8000.0, 16000.0,
];
const N_BANDS: usize = 10;

/// Index into the six absorption bands used by each synthesis band.
/// Bands outside 125 Hz..4 kHz reuse the nearest measured coefficient.
const ABSORPTION_BAND_OF: [usize; N_BANDS] = [0, 0, 0, 1, 2, 3, 4, 5, 5, 5];

const KERNEL_TAPS: usize = 32;
const KERNEL_HALF: usize = KERNEL_TAPS / 2;
const BANK_TAPS: usize = 8192;

/// Direct and reverberant parts of a simulated response.
#[derive(Debug, Clone, PartialEq)]
pub struct RirComponents {
    pub direct: ImpulseResponse,
    pub reverberant: ImpulseResponse,
}

impl RirComponents {
    /// Sample-wise sum of both parts.
    pub fn full(&self) -> ImpulseResponse {
        let samples = self
            .direct
            .samples()
            .iter()
            .zip(self.reverberant.samples())
            .map(|(d, r)| d + r)
            .collect();
        ImpulseResponse::with_onset(samples, self.direct.sample_rate_hz(), self.direct.direct_onset_index())
            .expect("components share length and rate")
    }
}

/// Full impulse response from `src` to `rcv`.
pub fn simulate_rir(
    room: &RoomSpec,
    src: &SourceSpec,
    rcv: &ReceiverSpec,
    sample_rate_hz: u32,
) -> Result<ImpulseResponse> {
    Ok(simulate_components(room, src, rcv, sample_rate_hz)?.full())
}

/// The zeroth-order image alone (`direct`) and every other image
/// (`reverberant`).
pub fn simulate_components(
    room: &RoomSpec,
    src: &SourceSpec,
    rcv: &ReceiverSpec,
    sample_rate_hz: u32,
) -> Result<RirComponents> {
    room.validate()?;
    if sample_rate_hz == 0 {
        return Err(Error::invalid("sample_rate_hz", "must be positive"));
    }
    if !room.contains(src.position_m) {
        return Err(Error::Geometry(format!(
            "source at {:?} is outside the room",
            src.position_m
        )));
    }
    if !room.contains(rcv.position_m) {
        return Err(Error::Geometry(format!(
            "receiver at {:?} is outside the room",
            rcv.position_m
        )));
    }
    let direct_distance = distance(src.position_m, rcv.position_m);
    if direct_distance <= 0.0 {
        return Err(Error::Geometry("source and receiver coincide".into()));
    }
    let c = room.speed_of_sound_m_s;
    let max_distance = c * room.max_reflection_time_s;
    if max_distance < direct_distance {
        return Err(Error::Geometry(format!(
            "max_reflection_time_s {} is shorter than the direct path",
            room.max_reflection_time_s
        )));
    }

    let fs = sample_rate_hz as f64;
    let len = (room.max_reflection_time_s * fs).ceil() as usize + KERNEL_HALF + 1;
    let mut direct_acc = BandAccumulator::new(len);
    let mut reverb_acc = BandAccumulator::new(len);

    let pattern = Pattern::new(src, fs);
    let betas = reflection_factors(room);
    let [lx, ly, lz] = room.dimensions_m;
    let [xs, ys, zs] = src.position_m;
    let [xr, yr, zr] = rcv.position_m;
    let span = |l: f64| (max_distance / (2.0 * l)).ceil() as i64 + 1;
    let (nx_max, ny_max, nz_max) = (span(lx), span(ly), span(lz));

    let mut gains = [0.0; N_BANDS];
    for nx in -nx_max..=nx_max {
        for qx in 0..2i64 {
            let dx = (1 - 2 * qx) as f64 * xs + 2.0 * nx as f64 * lx - xr;
            if dx.abs() > max_distance {
                continue;
            }
            let fx = axis_factors(&betas[0], &betas[1], (nx - qx).abs(), nx.abs());
            for ny in -ny_max..=ny_max {
                for qy in 0..2i64 {
                    let dy = (1 - 2 * qy) as f64 * ys + 2.0 * ny as f64 * ly - yr;
                    let dxy2 = dx * dx + dy * dy;
                    if dxy2 > max_distance * max_distance {
                        continue;
                    }
                    let fy = axis_factors(&betas[2], &betas[3], (ny - qy).abs(), ny.abs());
                    for nz in -nz_max..=nz_max {
                        for qz in 0..2i64 {
                            let dz = (1 - 2 * qz) as f64 * zs + 2.0 * nz as f64 * lz - zr;
                            let r = (dxy2 + dz * dz).sqrt();
                            if r > max_distance {
                                continue;
                            }
                            let fz = axis_factors(&betas[4], &betas[5], (nz - qz).abs(), nz.abs());
                            // ray as it leaves the real source
                            let emitted = [
                                -((1 - 2 * qx) as f64) * dx,
                                -((1 - 2 * qy) as f64) * dy,
                                -((1 - 2 * qz) as f64) * dz,
                            ];
                            pattern.gains(emitted, r, &mut gains);
                            for b in 0..N_BANDS {
                                gains[b] *= fx[b] * fy[b] * fz[b] / r;
                            }
                            let is_direct = nx == 0 && ny == 0 && nz == 0 && qx == 0 && qy == 0 && qz == 0;
                            let acc = if is_direct { &mut direct_acc } else { &mut reverb_acc };
                            acc.add_pulse(r / c * fs, &gains);
                        }
                    }
                }
            }
        }
    }

    let bank = BandBank::new(sample_rate_hz)?;
    let onset = (fs * direct_distance / c).round() as usize;
    let direct = ImpulseResponse::with_onset(direct_acc.synthesize(&bank)?, sample_rate_hz, Some(onset))?;
    let reverberant = ImpulseResponse::with_onset(reverb_acc.synthesize(&bank)?, sample_rate_hz, Some(onset))?;
    Ok(RirComponents { direct, reverberant })
}

/// Pressure reflection factor `sqrt(1 - alpha)` per surface and synthesis band.
fn reflection_factors(room: &RoomSpec) -> [[f64; N_BANDS]; 6] {
    let mut out = [[0.0; N_BANDS]; 6];
    for (s, coeffs) in room.absorption.surfaces().iter().enumerate() {
        for b in 0..N_BANDS {
            out[s][b] = (1.0 - coeffs[ABSORPTION_BAND_OF[b]]).max(0.0).sqrt();
        }
    }
    out
}

fn axis_factors(
    low_wall: &[f64; N_BANDS],
    high_wall: &[f64; N_BANDS],
    low_hits: i64,
    high_hits: i64,
) -> [f64; N_BANDS] {
    let mut out = [0.0; N_BANDS];
    for b in 0..N_BANDS {
        out[b] = low_wall[b].powi(low_hits as i32) * high_wall[b].powi(high_hits as i32);
    }
    out
}

/// Directivity evaluated at the synthesis band centres.
struct Pattern {
    directivity: Directivity,
    aim: [f64; 3],
    weights: [f64; N_BANDS],
}

impl Pattern {
    fn new(src: &SourceSpec, fs: f64) -> Self {
        let mut weights = [0.0; N_BANDS];
        for (w, f) in weights.iter_mut().zip(SYNTHESIS_BANDS_HZ) {
            *w = transition_weight(&src.directivity, f.min(fs / 2.0));
        }
        Self {
            directivity: src.directivity,
            aim: src.aim_vector(),
            weights,
        }
    }

    fn gains(&self, dir: [f64; 3], norm: f64, out: &mut [f64; N_BANDS]) {
        if let Directivity::Omni = self.directivity {
            *out = [1.0; N_BANDS];
            return;
        }
        let cos = (dir[0] * self.aim[0] + dir[1] * self.aim[1] + dir[2] * self.aim[2]) / norm;
        let hf = high_frequency_gain(&self.directivity, cos.clamp(-1.0, 1.0));
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = 1.0 + w * (hf - 1.0);
        }
    }
}

/// Interleaved per-band pulse trains. Channel `b < 9` feeds lowpass `b` with
/// weight `g[b] - g[b+1]`, channel 9 is passed through with weight `g[9]`;
/// the bank telescopes to the band gains.
struct BandAccumulator {
    data: Vec<f64>,
    len: usize,
}

impl BandAccumulator {
    fn new(len: usize) -> Self {
        Self {
            data: vec![0.0; len * N_BANDS],
            len,
        }
    }

    fn add_pulse(&mut self, delay_samples: f64, gains: &[f64; N_BANDS]) {
        let mut weights = [0.0; N_BANDS];
        for b in 0..N_BANDS - 1 {
            weights[b] = gains[b] - gains[b + 1];
        }
        weights[N_BANDS - 1] = gains[N_BANDS - 1];

        let base = delay_samples.floor() as i64 - (KERNEL_HALF as i64 - 1);
        let kernel = windowed_sinc(delay_samples - base as f64);
        for (i, k) in kernel.iter().enumerate() {
            let n = base + i as i64;
            if n < 0 || n as usize >= self.len {
                continue;
            }
            let slot = &mut self.data[n as usize * N_BANDS..(n as usize + 1) * N_BANDS];
            for (s, w) in slot.iter_mut().zip(&weights) {
                *s += w * k;
            }
        }
    }

    fn synthesize(&self, bank: &BandBank) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = (0..self.len).map(|n| self.data[n * N_BANDS + N_BANDS - 1]).collect();
        for (b, lowpass) in bank.lowpass.iter().enumerate() {
            let channel: Vec<f64> = (0..self.len).map(|n| self.data[n * N_BANDS + b]).collect();
            if channel.iter().all(|v| *v == 0.0) {
                continue;
            }
            let filtered = convolve(&channel, lowpass)?;
            for (o, f) in out.iter_mut().zip(filtered) {
                *o += f;
            }
        }
        Ok(out)
    }
}

/// Hann-windowed sinc sampled at `t = i - offset`, `i = 0..32`, where
/// `offset` lies in `[15, 16)`.
fn windowed_sinc(offset: f64) -> [f64; KERNEL_TAPS] {
    let mut out = [0.0; KERNEL_TAPS];
    let t0 = -offset;
    let s0 = (PI * t0).sin();
    let step = 2.0 * PI / KERNEL_TAPS as f64;
    let (step_sin, step_cos) = step.sin_cos();
    let (mut ws, mut wc) = (step * t0).sin_cos();
    for (i, o) in out.iter_mut().enumerate() {
        let t = t0 + i as f64;
        *o = if t.abs() < 1e-12 {
            1.0
        } else if t.abs() >= KERNEL_HALF as f64 {
            0.0
        } else {
            let s = if i % 2 == 0 { s0 } else { -s0 };
            s / (PI * t) * 0.5 * (1.0 + wc)
        };
        let next_c = wc * step_cos - ws * step_sin;
        ws = ws * step_cos + wc * step_sin;
        wc = next_c;
    }
    out
}

/// Minimum-phase lowpass filters with cutoffs at the upper edges of the
/// first nine synthesis bands.
struct BandBank {
    lowpass: Vec<Vec<f64>>,
}

impl BandBank {
    fn new(sample_rate_hz: u32) -> Result<Self> {
        let n_fft = 4 * BANK_TAPS;
        let lowpass = SYNTHESIS_BANDS_HZ[..N_BANDS - 1]
            .iter()
            .map(|centre| {
                let edge = centre * 2f64.sqrt();
                let mag = MagnitudeSpectrum::from_fn(n_fft, sample_rate_hz, |f| {
                    let x = if f <= 0.0 { -1.0 } else { (f / edge).log2() };
                    let m = if x <= -0.25 {
                        1.0
                    } else if x >= 0.25 {
                        0.0
                    } else {
                        0.5 * (1.0 + (PI * (x + 0.25) / 0.5).cos())
                    };
                    m.max(1e-5)
                })?;
                minimum_phase_fir(&mag, BANK_TAPS)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { lowpass })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::room::spec::SurfaceAbsorption;

    fn shoebox(alpha: f64) -> RoomSpec {
        let mut room = RoomSpec::new([7.4, 4.6, 2.6], SurfaceAbsorption::uniform(alpha));
        room.max_reflection_time_s = 0.3;
        room
    }

    #[test]
    fn kernel_matches_direct_evaluation() {
        let offset = 15.37;
        let k = windowed_sinc(offset);
        for (i, v) in k.iter().enumerate() {
            let t = i as f64 - offset;
            let sinc = (PI * t).sin() / (PI * t);
            let w = 0.5 * (1.0 + (2.0 * PI * t / 32.0).cos());
            assert!((v - sinc * w).abs() < 1e-12, "{i}");
        }
        let integer = windowed_sinc(15.0);
        assert_eq!(integer[15], 1.0);
        assert!(integer.iter().enumerate().all(|(i, v)| i == 15 || v.abs() < 1e-12));
    }

    #[test]
    fn onset_is_ten_ms_for_3_43_m() {
        let room = shoebox(0.3);
        let src = SourceSpec::omni([1.0, 1.0, 1.2]);
        let rcv = ReceiverSpec {
            position_m: [4.43, 1.0, 1.2],
        };
        let ir = simulate_rir(&room, &src, &rcv, 44100).unwrap();
        assert_eq!(ir.direct_onset_index(), Some(441));
    }

    #[test]
    fn fully_absorbing_room_has_only_direct_sound() {
        let room = shoebox(1.0);
        let src = SourceSpec::omni([1.0, 1.0, 1.2]);
        let rcv = ReceiverSpec {
            position_m: [4.0, 2.5, 1.5],
        };
        let parts = simulate_components(&room, &src, &rcv, 44100).unwrap();
        assert!(parts.reverberant.samples().iter().all(|v| *v == 0.0));
        let full = simulate_rir(&room, &src, &rcv, 44100).unwrap();
        let rev_energy = full.energy() - parts.direct.energy();
        assert!(rev_energy.abs() < 1e-6 * parts.direct.energy());
    }

    #[test]
    fn components_partition_the_response() {
        let room = shoebox(0.3);
        let src = SourceSpec::aimed_at([1.2, 1.1, 1.2], [3.7, 2.9, 1.2], Directivity::two_way_default());
        let rcv = ReceiverSpec {
            position_m: [3.7, 2.9, 1.2],
        };
        let parts = simulate_components(&room, &src, &rcv, 44100).unwrap();
        let full = simulate_rir(&room, &src, &rcv, 44100).unwrap();
        for ((d, r), f) in parts
            .direct
            .samples()
            .iter()
            .zip(parts.reverberant.samples())
            .zip(full.samples())
        {
            assert_eq!((d + r).to_bits(), f.to_bits());
        }
    }

    #[test]
    fn geometry_errors() {
        let room = shoebox(0.3);
        let inside = ReceiverSpec {
            position_m: [2.0, 2.0, 1.0],
        };
        let outside = SourceSpec::omni([8.0, 1.0, 1.0]);
        assert!(simulate_rir(&room, &outside, &inside, 44100).is_err());
        let same = SourceSpec::omni([2.0, 2.0, 1.0]);
        assert!(simulate_rir(&room, &same, &inside, 44100).is_err());
    }

    #[test]
    fn direct_amplitude_follows_inverse_distance() {
        let room = shoebox(0.3);
        let src = SourceSpec::omni([1.0, 2.3, 1.3]);
        let near = ReceiverSpec {
            position_m: [2.5, 2.3, 1.3],
        };
        let far = ReceiverSpec {
            position_m: [4.0, 2.3, 1.3],
        };
        let energy = |r: &ReceiverSpec| simulate_components(&room, &src, r, 44100).unwrap().direct.energy();
        let ratio = energy(&near) / energy(&far);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn reciprocity_for_omni() {
        let room = shoebox(0.35);
        let a = [1.3, 0.9, 1.1];
        let b = [5.2, 3.1, 1.7];
        let ab = simulate_rir(&room, &SourceSpec::omni(a), &ReceiverSpec { position_m: b }, 44100).unwrap();
        let ba = simulate_rir(&room, &SourceSpec::omni(b), &ReceiverSpec { position_m: a }, 44100).unwrap();
        for (x, y) in ab.samples().iter().zip(ba.samples()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn more_absorption_means_less_reverberation() {
        let src = SourceSpec::omni([1.2, 1.1, 1.2]);
        let rcv = ReceiverSpec {
            position_m: [3.7, 2.9, 1.2],
        };
        let mut last = f64::INFINITY;
        for alpha in [0.1, 0.2, 0.4, 0.7] {
            let mut room = shoebox(alpha);
            room.absorption.floor[3] = (alpha + 0.2).min(1.0);
            let e = simulate_components(&room, &src, &rcv, 44100)
                .unwrap()
                .reverberant
                .energy();
            assert!(e < last);
            last = e;
        }
    }
}
