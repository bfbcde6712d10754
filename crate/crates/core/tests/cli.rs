use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use roomcomp::cli::{FilterSidecar, Manifest, RenderManifest};
use roomcomp::dsp::{amplitude_to_db, dft};
use roomcomp::io::{read_wav, write_wav, ProjectConfig};
use roomcomp::render::PrecedenceReport;

fn roomcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roomcomp"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = roomcomp(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Default project with a shorter reflection tail, written as TOML.
fn write_config(dir: &Path, edit: impl FnOnce(&mut ProjectConfig)) -> PathBuf {
    let mut cfg = ProjectConfig::default();
    cfg.room.max_reflection_time_s = 0.4;
    edit(&mut cfg);
    let path = dir.join("project.toml");
    std::fs::create_dir_all(dir).unwrap();
    std::fs::write(&path, cfg.to_toml_string().unwrap()).unwrap();
    path
}

/// simulate → design (both) → render → analyze, once for all tests.
struct Chain {
    _dir: tempfile::TempDir,
    config: PathBuf,
    irs: PathBuf,
    filters: PathBuf,
    render: PathBuf,
    analysis: PathBuf,
    analyze_stdout: String,
}

fn chain() -> &'static Chain {
    static CHAIN: OnceLock<Chain> = OnceLock::new();
    CHAIN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let config = write_config(&root, |_| {});
        let [irs, filters, render, analysis] = ["irs", "filters", "render", "analysis"].map(|d| root.join(d));
        ok(&["simulate", "--config", s(&config), "--out", s(&irs)]);
        for method in ["proposed", "traditional"] {
            ok(&[
                "design",
                "--config",
                s(&config),
                "--irs",
                s(&irs),
                "--out",
                s(&filters),
                "--method",
                method,
            ]);
        }
        ok(&[
            "render",
            "--config",
            s(&config),
            "--irs",
            s(&irs),
            "--filters",
            s(&filters),
            "--out",
            s(&render),
        ]);
        let analyze_stdout = ok(&[
            "analyze",
            "--config",
            s(&config),
            "--inputs",
            s(&render),
            "--out",
            s(&analysis),
        ]);
        Chain {
            _dir: dir,
            config,
            irs,
            filters,
            render,
            analysis,
            analyze_stdout,
        }
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("frequency_hz,value_db"));
    lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn simulate_writes_every_pair_and_a_manifest() {
    let c = chain();
    let manifest: Manifest = read_json(&c.irs.join("manifest.json"));
    assert_eq!(manifest.len(), 8);
    let cfg = ProjectConfig::load(&c.config).unwrap();
    for (file, e) in &manifest {
        assert_eq!(file, &format!("{}_r{}.wav", e.source, e.receiver));
        let ir = read_wav(&c.irs.join(file)).unwrap();
        assert_eq!(ir.sample_rate_hz(), 44100);
        let expected = (44100.0 * e.distance_m / cfg.room.speed_of_sound_m_s).round() as usize;
        assert_eq!(e.onset_index, expected);
        assert!(c
            .irs
            .join("components")
            .join(file.replace(".wav", "_direct.wav"))
            .exists());
    }
}

#[test]
fn source_outside_room_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |cfg| {
        cfg.sources.get_mut("supporting_right").unwrap().position_m = [50.0, 1.0, 1.0];
    });
    let out = roomcomp(&["simulate", "--config", s(&config), "--out", s(&dir.path().join("irs"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("roomcomp: error[config]:"), "{err}");
    assert!(err.contains("supporting_right"), "{err}");
}

#[test]
fn unparsable_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "schema_version = 1\nroom = 3\n").unwrap();
    let out = roomcomp(&["simulate", "--config", s(&path), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("roomcomp: error[config]:"));
}

#[test]
fn design_without_responses_names_the_missing_pair() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |_| {});
    let irs = dir.path().join("empty");
    std::fs::create_dir_all(&irs).unwrap();
    let out = roomcomp(&[
        "design",
        "--config",
        s(&config),
        "--irs",
        s(&irs),
        "--out",
        s(dir.path()),
        "--method",
        "proposed",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("roomcomp: error[missing-input]:"), "{err}");
    assert!(err.contains("`primary_left` at receiver 0"), "{err}");
}

#[test]
fn proposed_design_outputs() {
    let c = chain();
    let report: serde_json::Value = read_json(&c.filters.join("proposed_design_report.json"));
    for (i, ch) in ["left", "right"].iter().enumerate() {
        let entry = &report["channels"][i];
        assert_eq!(entry["channel"], *ch);
        assert_eq!(entry["n_taps"], 8192);
        assert!(entry["reconstruction_residual"].as_f64().unwrap() < 1e-9);
        let taps = read_wav(&c.filters.join(format!("{ch}_proposed.wav"))).unwrap();
        assert_eq!(taps.len(), 8192);
        let sidecar: FilterSidecar = read_json(&c.filters.join(format!("{ch}_proposed.json")));
        assert_eq!(sidecar.metadata.gain_db, entry["gain_db"].as_f64());
        let target = read_csv(&c.filters.join(format!("{ch}_proposed_target.csv")));
        assert_eq!(target.len(), 65536 / 2 + 1);
    }
}

#[test]
fn csv_is_two_columns_with_lf_endings() {
    let c = chain();
    let bytes = std::fs::read(c.filters.join("left_proposed_target.csv")).unwrap();
    assert!(!bytes.contains(&b'\r'));
    assert_eq!(*bytes.last().unwrap(), b'\n');
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.lines().all(|l| l.split(',').count() == 2));
}

#[test]
fn seed_flag_overrides_velvet_seed() {
    let c = chain();
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "design",
        "--config",
        s(&c.config),
        "--irs",
        s(&c.irs),
        "--out",
        s(dir.path()),
        "--method",
        "proposed",
        "--seed",
        "41",
    ]);
    let sidecar: FilterSidecar = read_json(&dir.path().join("right_proposed.json"));
    assert_eq!(sidecar.velvet.seed, 42);
}

#[test]
fn render_reports_no_precedence_violations() {
    let c = chain();
    let reports: std::collections::BTreeMap<String, PrecedenceReport> =
        read_json(&c.render.join("precedence_report.json"));
    assert_eq!(reports.len(), 2);
    for r in reports.values() {
        assert_eq!(r.violations(), 0);
    }
}

#[test]
fn rendered_direct_windows_are_identical() {
    let c = chain();
    let manifest: Manifest = read_json(&c.irs.join("manifest.json"));
    let render: RenderManifest = read_json(&c.render.join("render_manifest.json"));
    let half = (0.0025 * 44100.0 / 2.0_f64).round() as usize;
    for ch in &render.channels {
        let primary = if ch.channel == "left" {
            "primary_left"
        } else {
            "primary_right"
        };
        for f in &ch.receivers {
            let onset = manifest[&format!("{primary}_r{}.wav", f.receiver)].onset_index;
            let unc = read_wav(&c.render.join(&f.uncompensated)).unwrap();
            let prop = read_wav(&c.render.join(&f.proposed)).unwrap();
            for n in onset - half..=onset + half {
                assert_eq!(unc.samples()[n].to_bits(), prop.samples()[n].to_bits());
            }
        }
    }
}

#[test]
fn render_rejects_a_filter_of_the_wrong_kind() {
    let c = chain();
    let dir = tempfile::tempdir().unwrap();
    for ch in ["left", "right"] {
        for m in ["proposed", "traditional"] {
            // the traditional filter poses as the proposed one
            let from = if m == "proposed" { "traditional" } else { m };
            for ext in ["wav", "json"] {
                std::fs::copy(
                    c.filters.join(format!("{ch}_{from}.{ext}")),
                    dir.path().join(format!("{ch}_{m}.{ext}")),
                )
                .unwrap();
            }
        }
    }
    let out = roomcomp(&[
        "render",
        "--config",
        s(&c.config),
        "--irs",
        s(&c.irs),
        "--filters",
        s(dir.path()),
        "--out",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.starts_with("roomcomp: error[kind-mismatch]:"), "{err}");
}

#[test]
fn zero_supporting_filter_renders_the_uncompensated_system() {
    let c = chain();
    let dir = tempfile::tempdir().unwrap();
    let filters = dir.path().join("filters");
    std::fs::create_dir_all(&filters).unwrap();
    for ch in ["left", "right"] {
        for ext in ["wav", "json"] {
            let name = format!("{ch}_traditional.{ext}");
            std::fs::copy(c.filters.join(&name), filters.join(&name)).unwrap();
        }
        std::fs::copy(
            c.filters.join(format!("{ch}_proposed.json")),
            filters.join(format!("{ch}_proposed.json")),
        )
        .unwrap();
        write_wav(&filters.join(format!("{ch}_proposed.wav")), &vec![0.0; 8192], 44100).unwrap();
    }
    let out = dir.path().join("render");
    ok(&[
        "render",
        "--config",
        s(&c.config),
        "--irs",
        s(&c.irs),
        "--filters",
        s(&filters),
        "--out",
        s(&out),
    ]);
    for ch in ["left", "right"] {
        for r in 0..2 {
            let unc = std::fs::read(out.join(format!("{ch}_r{r}_uncompensated.wav"))).unwrap();
            let prop = std::fs::read(out.join(format!("{ch}_r{r}_proposed.wav"))).unwrap();
            assert_eq!(unc, prop);
        }
    }
}

#[test]
fn analyze_traditional_drr_matches_uncompensated() {
    let c = chain();
    for ch in ["left", "right"] {
        for r in 0..2 {
            let unc = read_csv(&c.analysis.join(format!("{ch}_r{r}_uncompensated_drr.csv")));
            let trad = read_csv(&c.analysis.join(format!("{ch}_r{r}_traditional_drr.csv")));
            assert_eq!(unc.len(), trad.len());
            for ((f, a), (g, b)) in unc.iter().zip(&trad) {
                assert_eq!(f, g);
                if f64::is_finite(*a) || f64::is_finite(*b) {
                    assert!((a - b).abs() <= 1e-6, "{ch} r{r} at {f} Hz: {a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn analyze_orders_spectral_deviation() {
    let c = chain();
    let report: serde_json::Value = read_json(&c.analysis.join("analysis_report.json"));
    for ch in ["left", "right"] {
        let sd = |system: &str| report["systems"][ch][system].as_f64().unwrap();
        assert!(sd("traditional") < sd("proposed"), "{ch}: {report}");
        assert!(sd("proposed") < sd("uncompensated"), "{ch}: {report}");
    }
    assert!(c.analyze_stdout.lines().any(|l| l.starts_with("sd left proposed ")));
}

#[test]
fn flat_spectrum_has_zero_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let mut pulse = vec![0.0; 4096];
    pulse[0] = 0.5;
    write_wav(&dir.path().join("flat.wav"), &pulse, 44100).unwrap();
    let stdout = ok(&[
        "analyze",
        "--inputs",
        s(&dir.path().join("flat.wav")),
        "--metrics",
        "sd",
        "--out",
        s(&dir.path().join("out")),
    ]);
    assert_eq!(stdout.trim(), "sd flat 0.000000");
    let report: serde_json::Value = read_json(&dir.path().join("out/analysis_report.json"));
    assert_eq!(report["responses"]["flat"].as_f64(), Some(0.0));
}

#[test]
fn corrupt_audio_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.wav");
    std::fs::write(&path, b"RIFF not really").unwrap();
    let out = roomcomp(&["analyze", "--inputs", s(&path), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("roomcomp: error[audio]:"));
}

#[test]
fn traditional_on_flat_room_without_regularization_is_unity() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), |cfg| {
        cfg.design.beta_in_band = 0.0;
        cfg.design.beta_out_band = 0.0;
    });
    let cfg = ProjectConfig::load(&config).unwrap();
    let irs = dir.path().join("irs");
    for source in cfg.sources.keys() {
        for r in 0..2 {
            let mut x = vec![0.0; 2048];
            x[100] = 0.25;
            write_wav(&irs.join(format!("{source}_r{r}.wav")), &x, 44100).unwrap();
        }
    }
    let out = dir.path().join("filters");
    ok(&[
        "design",
        "--config",
        s(&config),
        "--irs",
        s(&irs),
        "--out",
        s(&out),
        "--method",
        "traditional",
    ]);
    let taps = read_wav(&out.join("left_traditional.wav")).unwrap();
    let mag = dft(taps.samples(), 65536, 44100).unwrap().magnitude();
    let worst = mag
        .bins_in_band(20.0, 20000.0)
        .map(|k| amplitude_to_db(mag.values()[k]).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.01, "{worst} dB from unity");
}
