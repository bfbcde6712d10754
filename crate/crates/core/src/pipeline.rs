//! The whole simulate → design → render → analyze chain in memory.

use std::collections::BTreeMap;

use crate::analysis::{drr_spectrum, spectral_deviation, DrrCurve};
use crate::design::{
    apply_target_constraints, average_power_response, build_target, design_supporting_filter,
    design_traditional_inverse, optimize_target_gain, reference_level_db, CompensationFilter, DeficitProfile,
    TargetSpec,
};
use crate::dsp::{
    add_signals, band_limited_smooth, convolve, db_to_amplitude, fractional_octave_smooth, generate_velvet_noise,
    ImpulseResponse, MagnitudeSpectrum, VelvetNoise,
};
use crate::error::{Error, Result};
use crate::io::ProjectConfig;
use crate::render::{
    compute_supporting_delay_samples, render_proposed, render_supporting_contribution, render_traditional,
    verify_precedence_margin, PrecedenceReport, SystemLayout,
};
use crate::room::{simulate_components, RirComponents};

/// Band over which spectral deviation is reported.
pub const DEVIATION_BAND_HZ: [f64; 2] = [100.0, 20000.0];

/// Responses of every source at every receiver.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub sample_rate_hz: u32,
    pub responses: BTreeMap<(String, usize), RirComponents>,
}

impl Simulation {
    pub fn components(&self, source: &str, receiver: usize) -> Result<&RirComponents> {
        self.responses
            .get(&(source.to_string(), receiver))
            .ok_or_else(|| Error::MissingInput {
                what: format!("response of `{source}` at receiver {receiver}"),
                path: Default::default(),
            })
    }
}

/// Simulates all source/receiver pairs, one thread per pair.
pub fn simulate(cfg: &ProjectConfig) -> Result<Simulation> {
    cfg.validate()?;
    let fs = cfg.design.sample_rate_hz;
    let jobs: Vec<(String, usize)> = cfg
        .sources
        .keys()
        .flat_map(|s| (0..cfg.receivers.len()).map(move |r| (s.clone(), r)))
        .collect();
    let results: Vec<Result<RirComponents>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(s, r)| {
                let (src, rcv) = (&cfg.sources[s], &cfg.receivers[*r]);
                scope.spawn(move || simulate_components(&cfg.room, src, rcv, fs))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let mut responses = BTreeMap::new();
    for (key, result) in jobs.into_iter().zip(results) {
        responses.insert(key, result?);
    }
    Ok(Simulation {
        sample_rate_hz: fs,
        responses,
    })
}

/// Everything designed for one channel.
#[derive(Debug, Clone)]
pub struct ChannelDesign {
    pub name: String,
    pub layout: SystemLayout,
    pub delay_samples: usize,
    pub velvet: VelvetNoise,
    /// Smoothed primary response averaged over the design receivers.
    pub hp: MagnitudeSpectrum,
    /// Smoothed supporting response, measured through the decorrelator.
    pub hs: MagnitudeSpectrum,
    pub reference_level_db: f64,
    /// Unconstrained target at the reference level.
    pub target: MagnitudeSpectrum,
    pub gain_db: f64,
    pub d_mod: MagnitudeSpectrum,
    pub proposed: CompensationFilter,
    pub traditional: CompensationFilter,
}

/// How far the scaled target had to be moved to satisfy the constraints.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConstraintStats {
    /// In-band bins raised to the primary response.
    pub raised_bins: usize,
    /// In-band bins lowered to the precedence limit.
    pub lowered_bins: usize,
    /// Summed shortfall below the primary response (dB).
    pub lower_deficit_db: f64,
    /// Summed excess over the precedence limit (dB).
    pub upper_deficit_db: f64,
}

impl ChannelDesign {
    pub fn filters(&self) -> ChannelFilters {
        ChannelFilters {
            proposed: self.proposed.clone(),
            traditional: self.traditional.clone(),
            layout: self.layout.clone(),
            velvet: self.velvet.clone(),
        }
    }

    pub fn constraint_stats(&self, spec: &TargetSpec) -> Result<ConstraintStats> {
        let profile = DeficitProfile::new(&self.target, &self.hp, spec)?;
        let scaled = self.target.scaled(db_to_amplitude(self.gain_db));
        let limit = spec.precedence_limit(&self.hp);
        let mut stats = ConstraintStats {
            raised_bins: 0,
            lowered_bins: 0,
            lower_deficit_db: profile.lower(self.gain_db),
            upper_deficit_db: profile.upper(self.gain_db),
        };
        for k in self
            .hp
            .bins_in_band(spec.compensation_band_hz[0], spec.compensation_band_hz[1])
        {
            let d = scaled.values()[k];
            if d < self.hp.values()[k] {
                stats.raised_bins += 1;
            } else if d > limit.values()[k] {
                stats.lowered_bins += 1;
            }
        }
        Ok(stats)
    }

    /// Largest relative error of `sqrt(hp^2 + (w hs)^2)` against `d_mod`.
    pub fn reconstruction_residual(&self) -> f64 {
        let w = self.proposed.design_magnitude.values();
        (0..w.len())
            .map(|k| {
                let (p, s, d) = (self.hp.values()[k], self.hs.values()[k], self.d_mod.values()[k]);
                ((p * p + (w[k] * s).powi(2)).sqrt() - d).abs() / d
            })
            .fold(0.0, f64::max)
    }
}

/// Velvet sequence of the channel at `index`.
pub fn channel_velvet(cfg: &ProjectConfig, index: usize) -> Result<VelvetNoise> {
    generate_velvet_noise(
        cfg.decorrelation.duration_s,
        cfg.decorrelation.density_pulses_per_s,
        cfg.design.sample_rate_hz,
        cfg.velvet_seed(index),
    )
}

/// Designs both filters of the channel at `index` from the primary and
/// supporting responses at the two design receivers.
pub fn design_channel(
    cfg: &ProjectConfig,
    index: usize,
    primary: &[ImpulseResponse],
    supporting: &[ImpulseResponse],
) -> Result<ChannelDesign> {
    let channel = &cfg.channels[index];
    let d = &cfg.design;
    let layout = cfg.layout(channel);
    let delay_samples = compute_supporting_delay_samples(&layout, d.sample_rate_hz)?;
    let velvet = channel_velvet(cfg, index)?;

    let hp = fractional_octave_smooth(&average_power_response(primary, d.n_fft)?, d.smoothing_fraction)?;
    let decorrelated = supporting
        .iter()
        .map(|s| ImpulseResponse::new(convolve(s.samples(), &velvet.normalized())?, s.sample_rate_hz()))
        .collect::<Result<Vec<_>>>()?;
    let hs = fractional_octave_smooth(&average_power_response(&decorrelated, d.n_fft)?, d.smoothing_fraction)?;

    let reference = reference_level_db(&cfg.target, &hp)?;
    let target = build_target(&cfg.target, &hp, reference)?;
    let gain_db = optimize_target_gain(&target, &hp, &cfg.target)?;
    let d_mod = apply_target_constraints(&target.scaled(db_to_amplitude(gain_db)), &hp, &cfg.target)?;
    let proposed = design_supporting_filter(&hp, &hs, &d_mod, d)?.with_target(cfg.target.clone(), Some(gain_db));

    // regularization acts on responses normalized to the reference level
    let norm = 1.0 / db_to_amplitude(reference);
    let traditional = design_traditional_inverse(
        &hp.scaled(norm),
        &target.scaled(norm),
        d,
        cfg.target.compensation_band_hz,
    )?
    .with_target(cfg.target.clone(), None);

    Ok(ChannelDesign {
        name: channel.name.clone(),
        layout,
        delay_samples,
        velvet,
        hp,
        hs,
        reference_level_db: reference,
        target,
        gain_db,
        d_mod,
        proposed,
        traditional,
    })
}

/// What rendering one channel needs besides the room responses.
#[derive(Debug, Clone)]
pub struct ChannelFilters {
    pub proposed: CompensationFilter,
    pub traditional: CompensationFilter,
    pub layout: SystemLayout,
    pub velvet: VelvetNoise,
}

/// The three systems of one channel at one receiver.
#[derive(Debug, Clone)]
pub struct RenderedReceiver {
    pub receiver: usize,
    pub primary: RirComponents,
    pub uncompensated: ImpulseResponse,
    pub traditional: ImpulseResponse,
    pub traditional_direct: ImpulseResponse,
    pub traditional_reverberant: ImpulseResponse,
    pub proposed: ImpulseResponse,
    /// Delayed, filtered, decorrelated supporting path alone.
    pub supporting_contribution: ImpulseResponse,
}

pub fn render_receiver(
    filters: &ChannelFilters,
    receiver: usize,
    primary: &RirComponents,
    supporting: &ImpulseResponse,
) -> Result<RenderedReceiver> {
    let fs = supporting.sample_rate_hz();
    let full = primary.full();
    let contribution = render_supporting_contribution(supporting, &filters.proposed, &filters.layout, &filters.velvet)?;
    let contribution = if contribution.is_empty() {
        vec![0.0]
    } else {
        contribution
    };
    Ok(RenderedReceiver {
        receiver,
        traditional: render_traditional(&full, &filters.traditional)?,
        traditional_direct: render_traditional(&primary.direct, &filters.traditional)?,
        traditional_reverberant: render_traditional(&primary.reverberant, &filters.traditional)?,
        proposed: render_proposed(&full, supporting, &filters.proposed, &filters.layout, &filters.velvet)?,
        supporting_contribution: ImpulseResponse::new(contribution, fs)?,
        uncompensated: full,
        primary: primary.clone(),
    })
}

/// Supporting contribution against the primary response, both smoothed
/// power averages over the design receivers.
pub fn channel_precedence(
    rendered: &[RenderedReceiver],
    spec: &TargetSpec,
    n_fft: usize,
    fraction: f64,
) -> Result<PrecedenceReport> {
    let design = &rendered[..rendered.len().min(2)];
    let primary: Vec<ImpulseResponse> = design.iter().map(|r| r.uncompensated.clone()).collect();
    let support: Vec<ImpulseResponse> = design.iter().map(|r| r.supporting_contribution.clone()).collect();
    let primary = fractional_octave_smooth(&average_power_response(&primary, n_fft)?, fraction)?;
    let support = fractional_octave_smooth(&average_power_response(&support, n_fft)?, fraction)?;
    verify_precedence_margin(&primary, &support, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Uncompensated,
    Traditional,
    Proposed,
}

impl System {
    pub const ALL: [System; 3] = [System::Uncompensated, System::Traditional, System::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            System::Uncompensated => "uncompensated",
            System::Traditional => "traditional",
            System::Proposed => "proposed",
        }
    }
}

/// DRR of one system at one receiver, from its direct and reverberant parts.
pub fn system_drr(r: &RenderedReceiver, system: System, n_fft: usize, fraction: f64) -> Result<DrrCurve> {
    match system {
        System::Uncompensated => drr_spectrum(&r.primary.direct, &r.primary.reverberant, n_fft, fraction),
        System::Traditional => drr_spectrum(&r.traditional_direct, &r.traditional_reverberant, n_fft, fraction),
        System::Proposed => {
            let reverberant = ImpulseResponse::new(
                add_signals(r.primary.reverberant.samples(), r.supporting_contribution.samples()),
                r.proposed.sample_rate_hz(),
            )?;
            drr_spectrum(&r.primary.direct, &reverberant, n_fft, fraction)
        }
    }
}

pub fn system_response(r: &RenderedReceiver, system: System) -> &ImpulseResponse {
    match system {
        System::Uncompensated => &r.uncompensated,
        System::Traditional => &r.traditional,
        System::Proposed => &r.proposed,
    }
}

/// Unsmoothed power-average magnitude of one system over `rendered`.
pub fn system_average(rendered: &[RenderedReceiver], system: System, n_fft: usize) -> Result<MagnitudeSpectrum> {
    let irs: Vec<ImpulseResponse> = rendered.iter().map(|r| system_response(r, system).clone()).collect();
    average_power_response(&irs, n_fft)
}

/// Smoothed power-average magnitude of one system over `rendered`.
pub fn system_magnitude(
    rendered: &[RenderedReceiver],
    system: System,
    n_fft: usize,
    fraction: f64,
) -> Result<MagnitudeSpectrum> {
    fractional_octave_smooth(&system_average(rendered, system, n_fft)?, fraction)
}

/// Spectral deviation over `band_hz`, smoothing only within the band.
pub fn band_deviation(average: &MagnitudeSpectrum, fraction: f64, band_hz: [f64; 2]) -> Result<f64> {
    let smoothed = band_limited_smooth(average, fraction, band_hz[0], band_hz[1])?;
    spectral_deviation(&smoothed, band_hz[0], band_hz[1])
}

#[derive(Debug, Clone)]
pub struct ChannelRun {
    pub design: ChannelDesign,
    pub rendered: Vec<RenderedReceiver>,
}

impl ChannelRun {
    /// Spectral deviation of each system over the design receivers.
    pub fn spectral_deviations(&self, n_fft: usize, fraction: f64) -> Result<BTreeMap<System, f64>> {
        let mut out = BTreeMap::new();
        for s in System::ALL {
            let m = system_average(&self.rendered[..2], s, n_fft)?;
            out.insert(s, band_deviation(&m, fraction, DEVIATION_BAND_HZ)?);
        }
        Ok(out)
    }
}

/// Designs and renders every channel of a simulated project.
pub fn run_channels(cfg: &ProjectConfig, sim: &Simulation) -> Result<Vec<ChannelRun>> {
    cfg.channels
        .iter()
        .enumerate()
        .map(|(i, ch)| {
            let primary: Vec<ImpulseResponse> = (0..2)
                .map(|r| Ok(sim.components(&ch.primary, r)?.full()))
                .collect::<Result<_>>()?;
            let supporting: Vec<ImpulseResponse> = (0..2)
                .map(|r| Ok(sim.components(&ch.supporting, r)?.full()))
                .collect::<Result<_>>()?;
            let design = design_channel(cfg, i, &primary, &supporting)?;
            let filters = design.filters();
            let rendered = (0..cfg.receivers.len())
                .map(|r| {
                    render_receiver(
                        &filters,
                        r,
                        sim.components(&ch.primary, r)?,
                        &sim.components(&ch.supporting, r)?.full(),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ChannelRun { design, rendered })
        })
        .collect()
}
