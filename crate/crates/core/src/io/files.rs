use std::io::{Cursor, Write};
use std::path::Path;

use serde::Serialize;

use crate::dsp::ImpulseResponse;
use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid("path", format!("{} has no file name", path.display())))?;
    let tmp = dir.join(format!(".{}.partial", name.to_string_lossy()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Mono 32-bit float WAV.
pub fn write_wav(path: &Path, samples: &[f64], sample_rate_hz: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sample_rate_hz,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let audio = |source| Error::Audio {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut buf, spec).map_err(audio)?;
        for s in samples {
            w.write_sample(*s as f32).map_err(audio)?;
        }
        w.finalize().map_err(audio)?;
    }
    write_atomic(path, &buf.into_inner())
}

/// Reads a mono WAV (float, or integer scaled to +-1) as an impulse response.
pub fn read_wav(path: &Path) -> Result<ImpulseResponse> {
    if !path.exists() {
        return Err(Error::MissingInput {
            what: "audio file".into(),
            path: path.to_path_buf(),
        });
    }
    let audio = |source| Error::Audio {
        path: path.to_path_buf(),
        source,
    };
    let mut r = hound::WavReader::open(path).map_err(audio)?;
    let spec = r.spec();
    if spec.channels != 1 {
        return Err(Error::invalid(
            "audio",
            format!("{} has {} channels, expected mono", path.display(), spec.channels),
        ));
    }
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => r
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(audio)?,
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            r.samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(audio)?
        }
    };
    if samples.is_empty() {
        return Err(Error::EmptySignal);
    }
    ImpulseResponse::new(samples, spec.sample_rate)
}

/// Two-column CSV with a header row and LF line endings.
pub fn write_csv(path: &Path, header: [&str; 2], rows: impl IntoIterator<Item = (f64, f64)>) -> Result<()> {
    write_atomic(path, csv_string(header, rows).as_bytes())
}

pub fn csv_string(header: [&str; 2], rows: impl IntoIterator<Item = (f64, f64)>) -> String {
    let mut out = format!("{},{}\n", header[0], header[1]);
    for (a, b) in rows {
        out.push_str(&format!("{a},{b}\n"));
    }
    out
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wav_round_trip_is_f32_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let x = vec![0.5, -0.25, 1e-3, 0.1];
        write_wav(&path, &x, 48000).unwrap();
        let ir = read_wav(&path).unwrap();
        assert_eq!(ir.sample_rate_hz(), 48000);
        for (a, b) in ir.samples().iter().zip(&x) {
            assert_eq!(*a, *b as f32 as f64);
        }
    }

    #[test]
    fn corrupt_wav_is_an_audio_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.wav");
        std::fs::write(&path, b"RIFFnot really").unwrap();
        assert!(matches!(read_wav(&path), Err(Error::Audio { .. })));
        assert!(matches!(
            read_wav(&dir.path().join("missing.wav")),
            Err(Error::MissingInput { .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(["frequency_hz", "value_db"], [(0.0, 1.5), (10.75, f64::INFINITY)]);
        assert_eq!(s, "frequency_hz,value_db\n0,1.5\n10.75,inf\n");
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.json");
        write_json(&path, &vec![1, 2]).unwrap();
        let names: Vec<_> = std::fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec![std::ffi::OsString::from("x.json")]);
    }
}
