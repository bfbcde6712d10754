//! The `roomcomp` command line: simulate, design, render and analyze, each
//! reading and writing plain files so every stage can be rerun on its own.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{split_direct_reverberant, DrrCurve, SplitMode};
use crate::design::{CompensationFilter, DesignMetadata, FilterKind};
use crate::dsp::{amplitude_to_db, dft_magnitude, generate_velvet_noise, ImpulseResponse, MagnitudeSpectrum};
use crate::error::{Error, Result};
use crate::io::{read_wav, write_csv, write_json, write_wav, ProjectConfig};
use crate::pipeline::{
    band_deviation, channel_precedence, design_channel, render_receiver, simulate, system_average, system_drr,
    ChannelFilters, ConstraintStats, RenderedReceiver, System, DEVIATION_BAND_HZ,
};
use crate::render::{compute_supporting_delay_samples, render_traditional, PrecedenceReport};
use crate::room::{distance, RirComponents};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RENDER_MANIFEST_FILE: &str = "render_manifest.json";
pub const PRECEDENCE_FILE: &str = "precedence_report.json";
pub const ANALYSIS_REPORT_FILE: &str = "analysis_report.json";
const COMPONENTS_DIR: &str = "components";
const CSV_HEADER: [&str; 2] = ["frequency_hz", "value_db"];

#[derive(Debug, Parser)]
#[command(
    name = "roomcomp",
    version,
    about = "Room compensation with a delayed, decorrelated supporting loudspeaker"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Project config (TOML). The built-in stereo room when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every source at every receiver.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Design one compensation filter per channel.
    Design {
        #[command(flatten)]
        common: Common,
        /// Directory written by `simulate`, or measured responses named alike.
        #[arg(long)]
        irs: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
    },
    /// Render uncompensated, traditional and proposed systems.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        irs: PathBuf,
        /// Directory holding both filters of every channel.
        #[arg(long)]
        filters: PathBuf,
    },
    /// DRR curves and spectral deviation of responses or of a render.
    Analyze {
        /// Audio files, directories of them, or render directories.
        #[arg(long, required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "drr,sd")]
        metrics: Vec<Metric>,
        /// Analysis settings come from the config's design section.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    Traditional,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Traditional => "traditional",
        }
    }

    pub fn kind(self) -> FilterKind {
        match self {
            Method::Proposed => FilterKind::ProposedSupporting,
            Method::Traditional => FilterKind::TraditionalInverse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Drr,
    Sd,
}

/// One simulated response in `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: String,
    pub receiver: usize,
    pub onset_index: usize,
    pub distance_m: f64,
}

pub type Manifest = BTreeMap<String, ManifestEntry>;

/// Sequence parameters of a velvet decorrelator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelvetParams {
    pub seed: u64,
    pub density_pulses_per_s: f64,
    pub duration_s: f64,
}

/// JSON written next to every filter WAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSidecar {
    pub channel: String,
    pub kind: FilterKind,
    pub sample_rate_hz: u32,
    pub n_taps: usize,
    pub metadata: DesignMetadata,
    pub velvet: VelvetParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub channel: String,
    pub n_taps: usize,
    pub gain_db: f64,
    pub reference_level_db: f64,
    pub delay_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction_residual: Option<f64>,
    pub constraints: ConstraintStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub method: Method,
    pub channels: Vec<ChannelReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedFiles {
    pub receiver: usize,
    pub uncompensated: String,
    pub traditional: String,
    pub proposed: String,
    pub primary_direct: String,
    pub primary_reverberant: String,
    pub traditional_direct: String,
    pub traditional_reverberant: String,
    pub supporting_contribution: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedChannel {
    pub channel: String,
    pub delay_samples: usize,
    pub proposed_filter: String,
    pub traditional_filter: String,
    pub receivers: Vec<RenderedFiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderManifest {
    pub sample_rate_hz: u32,
    pub n_fft: usize,
    pub smoothing_fraction: f64,
    /// Receivers the designs were computed for; spectral deviation averages
    /// over these.
    pub design_receivers: usize,
    pub channels: Vec<RenderedChannel>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct AnalysisReport {
    /// Spectral deviation (dB) per channel and system of each render.
    pub systems: BTreeMap<String, BTreeMap<System, f64>>,
    /// Spectral deviation (dB) per plain response.
    pub responses: BTreeMap<String, f64>,
}

/// Runs a parsed command line, printing a short summary to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common } => {
            let manifest = run_simulate(&load_config(&common)?, &common.out)?;
            println!("simulated {} responses into {}", manifest.len(), common.out.display());
        }
        Command::Design { common, irs, method } => {
            let report = run_design(&load_config(&common)?, &irs, &common.out, method)?;
            for c in &report.channels {
                println!(
                    "{} {}: {} taps, g* {:.3} dB, {} bins raised, {} lowered",
                    c.channel,
                    method.name(),
                    c.n_taps,
                    c.gain_db,
                    c.constraints.raised_bins,
                    c.constraints.lowered_bins
                );
            }
        }
        Command::Render { common, irs, filters } => {
            let reports = run_render(&load_config(&common)?, &irs, &filters, &common.out)?;
            for (channel, r) in &reports {
                println!(
                    "{channel}: {} precedence violations, minimum margin {:.2} dB",
                    r.violations(),
                    r.min_margin_db()
                );
            }
        }
        Command::Analyze {
            inputs,
            metrics,
            config,
            out,
        } => {
            let cfg = match config {
                Some(path) => ProjectConfig::load(&path)?,
                None => ProjectConfig::default(),
            };
            let report = run_analyze(&cfg, &inputs, &metrics, &out)?;
            for (channel, values) in &report.systems {
                for (system, sd) in values {
                    println!("sd {channel} {} {sd:.6}", system.name());
                }
            }
            for (stem, sd) in &report.responses {
                println!("sd {stem} {sd:.6}");
            }
        }
    }
    Ok(())
}

/// Process exit status for `err`: 2 for invalid configuration or
/// parameters, 1 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::Geometry(_) => 2,
        _ => 1,
    }
}

/// `roomcomp: error[<class>]: <message>` on one line.
pub fn diagnostic(err: &Error) -> String {
    let class = match err {
        Error::Config(_) | Error::InvalidParameter { .. } | Error::Geometry(_) => "config",
        Error::MissingInput { .. } => "missing-input",
        Error::KindMismatch { .. } => "kind-mismatch",
        Error::Audio { .. } => "audio",
        Error::Io { .. } => "io",
        Error::Json(_) => "json",
        _ => "dsp",
    };
    let message = err.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
    format!("roomcomp: error[{class}]: {message}")
}

fn load_config(common: &Common) -> Result<ProjectConfig> {
    let mut cfg = match &common.config {
        Some(path) => ProjectConfig::load(path)?,
        None => ProjectConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn response_stem(source: &str, receiver: usize) -> String {
    format!("{source}_r{receiver}")
}

pub fn run_simulate(cfg: &ProjectConfig, out: &Path) -> Result<Manifest> {
    let sim = simulate(cfg)?;
    let fs = sim.sample_rate_hz;
    let mut manifest = Manifest::new();
    for ((source, r), comps) in &sim.responses {
        let stem = response_stem(source, *r);
        let file = format!("{stem}.wav");
        write_wav(&out.join(&file), comps.full().samples(), fs)?;
        let dir = out.join(COMPONENTS_DIR);
        write_wav(&dir.join(format!("{stem}_direct.wav")), comps.direct.samples(), fs)?;
        write_wav(
            &dir.join(format!("{stem}_reverberant.wav")),
            comps.reverberant.samples(),
            fs,
        )?;
        manifest.insert(
            file,
            ManifestEntry {
                source: source.clone(),
                receiver: *r,
                onset_index: comps.direct.direct_onset_index().unwrap_or(0),
                distance_m: distance(cfg.sources[source].position_m, cfg.receivers[*r].position_m),
            },
        );
    }
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

fn read_manifest(dir: &Path) -> Result<Option<Manifest>> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(Some(serde_json::from_str(&text)?))
}

fn expect_rate(ir: &ImpulseResponse, cfg: &ProjectConfig) -> Result<()> {
    if ir.sample_rate_hz() != cfg.design.sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            expected: cfg.design.sample_rate_hz,
            found: ir.sample_rate_hz(),
        });
    }
    Ok(())
}

/// Full response of `source` at `receiver`.
fn load_response(cfg: &ProjectConfig, dir: &Path, source: &str, receiver: usize) -> Result<ImpulseResponse> {
    let path = dir.join(format!("{}.wav", response_stem(source, receiver)));
    if !path.exists() {
        return Err(Error::MissingInput {
            what: format!("response of `{source}` at receiver {receiver}"),
            path,
        });
    }
    let ir = read_wav(&path)?;
    expect_rate(&ir, cfg)?;
    Ok(ir)
}

/// Direct and reverberant parts of a response: the simulated components when
/// present, otherwise a windowed split of the full response.
fn load_components(
    cfg: &ProjectConfig,
    dir: &Path,
    manifest: Option<&Manifest>,
    source: &str,
    receiver: usize,
) -> Result<RirComponents> {
    let stem = response_stem(source, receiver);
    let onset = manifest
        .and_then(|m| m.get(&format!("{stem}.wav")))
        .map(|e| e.onset_index);
    let direct_path = dir.join(COMPONENTS_DIR).join(format!("{stem}_direct.wav"));
    let reverb_path = dir.join(COMPONENTS_DIR).join(format!("{stem}_reverberant.wav"));
    if direct_path.exists() && reverb_path.exists() {
        let (direct, reverberant) = (read_wav(&direct_path)?, read_wav(&reverb_path)?);
        expect_rate(&direct, cfg)?;
        direct.ensure_rate(&reverberant)?;
        if direct.len() != reverberant.len() {
            return Err(Error::invalid(
                "components",
                format!("{stem}: direct and reverberant lengths differ"),
            ));
        }
        let fs = direct.sample_rate_hz();
        return Ok(RirComponents {
            direct: ImpulseResponse::with_onset(direct.into_samples(), fs, onset)?,
            reverberant: ImpulseResponse::with_onset(reverberant.into_samples(), fs, onset)?,
        });
    }
    let full = load_response(cfg, dir, source, receiver)?;
    let full = ImpulseResponse::with_onset(full.samples().to_vec(), full.sample_rate_hz(), onset)?;
    let split = split_direct_reverberant(&full, SplitMode::default())?;
    Ok(RirComponents {
        direct: split.direct,
        reverberant: split.reverberant,
    })
}

fn filter_stem(channel: &str, method: Method) -> String {
    format!("{channel}_{}", method.name())
}

fn write_filter(
    dir: &Path,
    stem: &str,
    filter: &CompensationFilter,
    velvet: &VelvetParams,
    channel: &str,
) -> Result<()> {
    write_wav(&dir.join(format!("{stem}.wav")), &filter.taps, filter.sample_rate_hz)?;
    let sidecar = FilterSidecar {
        channel: channel.to_string(),
        kind: filter.kind,
        sample_rate_hz: filter.sample_rate_hz,
        n_taps: filter.taps.len(),
        metadata: filter.design_metadata.clone(),
        velvet: velvet.clone(),
    };
    write_json(&dir.join(format!("{stem}.json")), &sidecar)
}

/// Reads a filter and its sidecar, checking that it is of `kind`.
pub fn load_filter(dir: &Path, stem: &str, kind: FilterKind) -> Result<(CompensationFilter, FilterSidecar)> {
    let sidecar_path = dir.join(format!("{stem}.json"));
    if !sidecar_path.exists() {
        return Err(Error::MissingInput {
            what: format!("filter metadata `{stem}`"),
            path: sidecar_path,
        });
    }
    let text = std::fs::read_to_string(&sidecar_path).map_err(|e| Error::io(&sidecar_path, e))?;
    let sidecar: FilterSidecar = serde_json::from_str(&text)?;
    let taps = read_wav(&dir.join(format!("{stem}.wav")))?;
    if taps.sample_rate_hz() != sidecar.sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            expected: sidecar.sample_rate_hz,
            found: taps.sample_rate_hz(),
        });
    }
    let filter = CompensationFilter::from_taps(
        taps.into_samples(),
        sidecar.kind,
        sidecar.sample_rate_hz,
        sidecar.metadata.clone(),
    )?;
    filter.ensure_kind(kind)?;
    Ok((filter, sidecar))
}

fn spectrum_rows(spec: &MagnitudeSpectrum) -> impl Iterator<Item = (f64, f64)> + '_ {
    spec.values()
        .iter()
        .enumerate()
        .map(|(k, v)| (spec.frequency(k), amplitude_to_db(*v)))
}

fn curve_rows(curve: &DrrCurve) -> impl Iterator<Item = (f64, f64)> + '_ {
    curve.frequencies_hz.iter().copied().zip(curve.drr_db.iter().copied())
}

pub fn run_design(cfg: &ProjectConfig, irs: &Path, out: &Path, method: Method) -> Result<DesignReport> {
    let mut report = DesignReport {
        method,
        channels: Vec::new(),
    };
    for (i, ch) in cfg.channels.iter().enumerate() {
        let load = |source: &str| {
            (0..2)
                .map(|r| load_response(cfg, irs, source, r))
                .collect::<Result<Vec<_>>>()
        };
        let design = design_channel(cfg, i, &load(&ch.primary)?, &load(&ch.supporting)?)?;
        let (filter, target, residual) = match method {
            Method::Proposed => (&design.proposed, &design.d_mod, Some(design.reconstruction_residual())),
            Method::Traditional => (&design.traditional, &design.target, None),
        };
        let velvet = VelvetParams {
            seed: cfg.velvet_seed(i),
            density_pulses_per_s: cfg.decorrelation.density_pulses_per_s,
            duration_s: cfg.decorrelation.duration_s,
        };
        let stem = filter_stem(&ch.name, method);
        write_filter(out, &stem, filter, &velvet, &ch.name)?;
        write_csv(
            &out.join(format!("{stem}_target.csv")),
            CSV_HEADER,
            spectrum_rows(target),
        )?;
        let entry = ChannelReport {
            channel: ch.name.clone(),
            n_taps: filter.taps.len(),
            gain_db: design.gain_db,
            reference_level_db: design.reference_level_db,
            delay_samples: design.delay_samples,
            reconstruction_residual: residual,
            constraints: design.constraint_stats(&cfg.target)?,
        };
        report.channels.push(entry);
    }
    write_json(&out.join(format!("{}_design_report.json", method.name())), &report)?;
    Ok(report)
}

fn copy_filter(from: &Path, to: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(to).map_err(|e| Error::io(to, e))?;
    for ext in ["wav", "json"] {
        let (src, dst) = (from.join(format!("{stem}.{ext}")), to.join(format!("{stem}.{ext}")));
        let bytes = std::fs::read(&src).map_err(|e| Error::io(&src, e))?;
        crate::io::write_atomic(&dst, &bytes)?;
    }
    Ok(())
}

fn velvet_of(sidecar: &FilterSidecar) -> Result<crate::dsp::VelvetNoise> {
    let v = &sidecar.velvet;
    generate_velvet_noise(v.duration_s, v.density_pulses_per_s, sidecar.sample_rate_hz, v.seed)
}

pub fn run_render(
    cfg: &ProjectConfig,
    irs: &Path,
    filters: &Path,
    out: &Path,
) -> Result<BTreeMap<String, PrecedenceReport>> {
    let manifest = read_manifest(irs)?;
    let fs = cfg.design.sample_rate_hz;
    let mut rendered_manifest = RenderManifest {
        sample_rate_hz: fs,
        n_fft: cfg.design.n_fft,
        smoothing_fraction: cfg.design.smoothing_fraction,
        design_receivers: 2,
        channels: Vec::new(),
    };
    let mut reports = BTreeMap::new();
    for ch in &cfg.channels {
        let proposed_stem = filter_stem(&ch.name, Method::Proposed);
        let traditional_stem = filter_stem(&ch.name, Method::Traditional);
        let (proposed, sidecar) = load_filter(filters, &proposed_stem, FilterKind::ProposedSupporting)?;
        let (traditional, _) = load_filter(filters, &traditional_stem, FilterKind::TraditionalInverse)?;
        for f in [&proposed, &traditional] {
            if f.sample_rate_hz != fs {
                return Err(Error::SampleRateMismatch {
                    expected: fs,
                    found: f.sample_rate_hz,
                });
            }
        }
        let layout = cfg.layout(ch);
        let delay_samples = compute_supporting_delay_samples(&layout, fs)?;
        let set = ChannelFilters {
            proposed,
            traditional,
            velvet: velvet_of(&sidecar)?,
            layout,
        };
        let mut rendered = Vec::new();
        let mut files = Vec::new();
        for r in 0..cfg.receivers.len() {
            let primary = load_components(cfg, irs, manifest.as_ref(), &ch.primary, r)?;
            let supporting = load_response(cfg, irs, &ch.supporting, r)?;
            let rr = render_receiver(&set, r, &primary, &supporting)?;
            files.push(write_rendered(out, &ch.name, &rr)?);
            rendered.push(rr);
        }
        copy_filter(filters, out, &proposed_stem)?;
        copy_filter(filters, out, &traditional_stem)?;
        let report = channel_precedence(&rendered, &cfg.target, cfg.design.n_fft, cfg.design.smoothing_fraction)?;
        reports.insert(ch.name.clone(), report);
        rendered_manifest.channels.push(RenderedChannel {
            channel: ch.name.clone(),
            delay_samples,
            proposed_filter: proposed_stem,
            traditional_filter: traditional_stem,
            receivers: files,
        });
    }
    write_json(&out.join(PRECEDENCE_FILE), &reports)?;
    write_json(&out.join(RENDER_MANIFEST_FILE), &rendered_manifest)?;
    Ok(reports)
}

fn write_rendered(out: &Path, channel: &str, r: &RenderedReceiver) -> Result<RenderedFiles> {
    let stem = format!("{channel}_r{}", r.receiver);
    let write = |part: &str, ir: &ImpulseResponse| -> Result<String> {
        let file = format!("{stem}_{part}.wav");
        write_wav(&out.join(&file), ir.samples(), ir.sample_rate_hz())?;
        Ok(file)
    };
    Ok(RenderedFiles {
        receiver: r.receiver,
        uncompensated: write("uncompensated", &r.uncompensated)?,
        traditional: write("traditional", &r.traditional)?,
        proposed: write("proposed", &r.proposed)?,
        primary_direct: write("primary_direct", &r.primary.direct)?,
        primary_reverberant: write("primary_reverberant", &r.primary.reverberant)?,
        traditional_direct: write("traditional_direct", &r.traditional_direct)?,
        traditional_reverberant: write("traditional_reverberant", &r.traditional_reverberant)?,
        supporting_contribution: write("supporting_contribution", &r.supporting_contribution)?,
    })
}

/// Rebuilds the rendered receivers of one channel. Traditional direct and
/// reverberant parts are recomputed from the stored primary parts and taps,
/// so the filter cancels exactly in their ratio.
fn load_rendered(dir: &Path, ch: &RenderedChannel) -> Result<Vec<RenderedReceiver>> {
    let (traditional, _) = load_filter(dir, &ch.traditional_filter, FilterKind::TraditionalInverse)?;
    ch.receivers
        .iter()
        .map(|f| {
            let read = |file: &str| read_wav(&dir.join(file));
            let primary = RirComponents {
                direct: read(&f.primary_direct)?,
                reverberant: read(&f.primary_reverberant)?,
            };
            Ok(RenderedReceiver {
                receiver: f.receiver,
                uncompensated: read(&f.uncompensated)?,
                traditional: read(&f.traditional)?,
                proposed: read(&f.proposed)?,
                traditional_direct: render_traditional(&primary.direct, &traditional)?,
                traditional_reverberant: render_traditional(&primary.reverberant, &traditional)?,
                supporting_contribution: read(&f.supporting_contribution)?,
                primary,
            })
        })
        .collect()
}

pub fn run_analyze(cfg: &ProjectConfig, inputs: &[PathBuf], metrics: &[Metric], out: &Path) -> Result<AnalysisReport> {
    let n_fft = cfg.design.n_fft;
    let fraction = cfg.design.smoothing_fraction;
    let (want_drr, want_sd) = (metrics.contains(&Metric::Drr), metrics.contains(&Metric::Sd));
    let mut report = AnalysisReport::default();
    for input in inputs {
        if input.join(RENDER_MANIFEST_FILE).exists() {
            analyze_render(input, n_fft, fraction, want_drr, want_sd, out, &mut report)?;
            continue;
        }
        for file in audio_files(input)? {
            let stem = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let ir = read_wav(&file)?;
            let onset = file
                .parent()
                .map(read_manifest)
                .transpose()?
                .flatten()
                .and_then(|m| m.get(&format!("{stem}.wav")).map(|e| e.onset_index));
            let ir = ImpulseResponse::with_onset(ir.samples().to_vec(), ir.sample_rate_hz(), onset)?;
            if want_drr {
                let split = split_direct_reverberant(&ir, SplitMode::default())?;
                let curve = crate::analysis::drr_spectrum(&split.direct, &split.reverberant, n_fft, fraction)?;
                write_csv(&out.join(format!("{stem}_drr.csv")), CSV_HEADER, curve_rows(&curve))?;
            }
            if want_sd {
                let sd = band_deviation(&dft_magnitude(&ir, n_fft)?, fraction, DEVIATION_BAND_HZ)?;
                report.responses.insert(stem, sd);
            }
        }
    }
    write_json(&out.join(ANALYSIS_REPORT_FILE), &report)?;
    Ok(report)
}

fn analyze_render(
    dir: &Path,
    n_fft: usize,
    fraction: f64,
    want_drr: bool,
    want_sd: bool,
    out: &Path,
    report: &mut AnalysisReport,
) -> Result<()> {
    let path = dir.join(RENDER_MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: RenderManifest = serde_json::from_str(&text)?;
    for ch in &manifest.channels {
        let rendered = load_rendered(dir, ch)?;
        if want_drr {
            for r in &rendered {
                for s in System::ALL {
                    let curve = system_drr(r, s, n_fft, fraction)?;
                    let file = format!("{}_r{}_{}_drr.csv", ch.channel, r.receiver, s.name());
                    write_csv(&out.join(file), CSV_HEADER, curve_rows(&curve))?;
                }
            }
        }
        if want_sd {
            let design = &rendered[..manifest.design_receivers.min(rendered.len())];
            let mut values = BTreeMap::new();
            for s in System::ALL {
                let sd = band_deviation(&system_average(design, s, n_fft)?, fraction, DEVIATION_BAND_HZ)?;
                values.insert(s, sd);
            }
            report.systems.insert(ch.channel.clone(), values);
        }
    }
    Ok(())
}

/// `path` itself, or the WAV files directly inside it in name order.
fn audio_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.exists() {
        return Err(Error::MissingInput {
            what: "analysis input".into(),
            path: path.to_path_buf(),
        });
    }
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "wav"))
        .collect();
    files.sort();
    Ok(files)
}
