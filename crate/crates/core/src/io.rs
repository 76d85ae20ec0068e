//! File formats: multichannel WAV and CSV for mic signals, RTF CSV export,
//! and the directional-impulse-response bundle.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::{csv_error, MicSignals};
use crate::directivity::MeasuredDirectivity;
use crate::error::{Error, Result};
use crate::oracle::Rtf;

fn hound_error(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    }
}

/// Writes channels as interleaved 32-bit float samples.
pub fn write_wav(path: &Path, signals: &MicSignals) -> Result<()> {
    let spec = hound::WavSpec {
        channels: signals.channel_count() as u16,
        sample_rate: signals.fs.round() as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| hound_error(path, e))?;
    for i in 0..signals.len() {
        for ch in &signals.channels {
            w.write_sample(ch[i] as f32).map_err(|e| hound_error(path, e))?;
        }
    }
    w.finalize().map_err(|e| hound_error(path, e))
}

/// Reads a float or integer WAV into per-channel sequences; directions are
/// not stored in WAV and come back empty.
pub fn read_wav(path: &Path) -> Result<MicSignals> {
    let mut r = hound::WavReader::open(path).map_err(|e| hound_error(path, e))?;
    let spec = r.spec();
    let n = spec.channels as usize;
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => r
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>(),
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f64;
            r.samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
        }
    }
    .map_err(|e| hound_error(path, e))?;
    let mut channels = vec![Vec::with_capacity(samples.len() / n.max(1)); n];
    for (i, v) in samples.into_iter().enumerate() {
        channels[i % n].push(v);
    }
    Ok(MicSignals {
        fs: spec.sample_rate as f64,
        start: 0,
        directions: Vec::new(),
        channels,
        normalization: None,
        lowpass: None,
    })
}

/// CSV: header `fs=<Hz>` followed by `theta=<rad>;phi=<rad>` per channel;
/// each row holds the sample index and one value per channel, printed in
/// shortest round-trip form.
pub fn write_csv(path: &Path, signals: &MicSignals) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec![format!("fs={}", signals.fs)];
    for q in 0..signals.channel_count() {
        header.push(match signals.directions.get(q) {
            Some((t, p)) => format!("theta={t};phi={p}"),
            None => format!("ch{}", q + 1),
        });
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let mut row = Vec::with_capacity(signals.channel_count() + 1);
    for i in 0..signals.len() {
        row.clear();
        row.push((signals.start + i as i64).to_string());
        row.extend(signals.channels.iter().map(|c| c[i].to_string()));
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<MicSignals> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    let fs = header
        .get(0)
        .and_then(|h| h.strip_prefix("fs="))
        .and_then(|v| v.parse::<f64>().ok())
        .ok_or_else(|| Error::format(path, "first header cell must be fs=<Hz>"))?;
    let mut directions = Vec::new();
    for h in header.iter().skip(1) {
        let parsed = h
            .strip_prefix("theta=")
            .and_then(|rest| rest.split_once(";phi="))
            .and_then(|(t, p)| Some((t.parse().ok()?, p.parse().ok()?)));
        if let Some(d) = parsed {
            directions.push(d);
        }
    }
    let n = header.len() - 1;
    if !directions.is_empty() && directions.len() != n {
        return Err(Error::format(path, "channel headers mix directions and labels"));
    }
    let mut channels = vec![Vec::new(); n];
    let mut start = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = || Error::format(path, format!("row {}: malformed number", i + 2));
        let idx: i64 = rec[0].parse().map_err(|_| bad())?;
        start.get_or_insert(idx);
        for (q, ch) in channels.iter_mut().enumerate() {
            ch.push(rec[q + 1].parse::<f64>().map_err(|_| bad())?);
        }
    }
    Ok(MicSignals {
        fs,
        start: start.unwrap_or(0),
        directions,
        channels,
        normalization: None,
        lowpass: None,
    })
}

/// RTF as CSV: `freq_hz` then magnitude (dB) and phase (rad) per channel.
pub fn write_rtf_csv(path: &Path, rtf: &Rtf) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header = vec!["freq_hz".to_string()];
    for q in 1..=rtf.channel_count() {
        header.push(format!("mic{q}_mag_db"));
        header.push(format!("mic{q}_phase_rad"));
    }
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for (k, f) in rtf.freqs.iter().enumerate() {
        let mut row = vec![f.to_string()];
        for ch in &rtf.values {
            row.push((20.0 * ch[k].norm().max(1e-300).log10()).to_string());
            row.push(ch[k].arg().to_string());
        }
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Manifest of a directional impulse-response bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleManifest {
    pub radius_m: f64,
    pub sample_rate_hz: f64,
    pub channels: usize,
    /// Path of the data file (`.wav` or `.csv`), relative to the manifest.
    pub data: PathBuf,
    pub directions: Vec<BundleDirection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDirection {
    pub theta_rad: f64,
    pub phi_rad: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

/// Loads a bundle manifest and its data file.
pub fn read_bundle(manifest: &Path) -> Result<MeasuredDirectivity> {
    let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let m: BundleManifest =
        toml::from_str(&text).map_err(|e| Error::format(manifest, e.to_string()))?;
    if m.directions.len() != m.channels {
        return Err(Error::format(
            manifest,
            format!("{} channels declared but {} directions listed", m.channels, m.directions.len()),
        ));
    }
    let weights = if m.directions.iter().all(|d| d.weight.is_some()) {
        Some(m.directions.iter().map(|d| d.weight.unwrap_or_default()).collect())
    } else if m.directions.iter().any(|d| d.weight.is_some()) {
        return Err(Error::format(manifest, "weights must be given for all directions or none"));
    } else {
        None
    };
    let data = manifest.parent().unwrap_or(Path::new(".")).join(&m.data);
    let responses = match data.extension().and_then(|e| e.to_str()) {
        Some("wav") => {
            let s = read_wav(&data)?;
            if (s.fs - m.sample_rate_hz).abs() > 0.5 {
                return Err(Error::format(&data, "sample rate differs from the manifest"));
            }
            s.channels
        }
        Some("csv") => read_matrix_csv(&data)?,
        _ => return Err(Error::format(&data, "bundle data must be .wav or .csv")),
    };
    if responses.len() != m.channels {
        return Err(Error::format(
            &data,
            format!("{} channels in data, {} declared", responses.len(), m.channels),
        ));
    }
    let directions = m.directions.iter().map(|d| (d.theta_rad, d.phi_rad)).collect();
    MeasuredDirectivity::new(m.radius_m, m.sample_rate_hz, directions, weights, responses)
        .map_err(|e| Error::format(manifest, e.to_string()))
}

/// Headerless CSV, one row per sample and one column per channel.
fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if cols.is_empty() {
            cols = vec![Vec::new(); rec.len()];
        }
        for (q, v) in rec.iter().enumerate() {
            cols[q].push(
                v.parse()
                    .map_err(|_| Error::format(path, format!("row {}: malformed number", i + 1)))?,
            );
        }
    }
    Ok(cols)
}

/// Writes `meas` as a manifest plus a CSV data file next to it.
pub fn write_bundle(manifest: &Path, meas: &MeasuredDirectivity) -> Result<()> {
    let data_name = PathBuf::from(
        manifest
            .file_stem()
            .map(|s| format!("{}.csv", s.to_string_lossy()))
            .unwrap_or_else(|| "data.csv".into()),
    );
    let m = BundleManifest {
        radius_m: meas.radius,
        sample_rate_hz: meas.sample_rate,
        channels: meas.channels(),
        data: data_name.clone(),
        directions: meas
            .directions
            .iter()
            .enumerate()
            .map(|(q, &(t, p))| BundleDirection {
                theta_rad: t,
                phi_rad: p,
                weight: meas.weights.as_ref().map(|w| w[q]),
            })
            .collect(),
    };
    let text = toml::to_string(&m).map_err(|e| Error::format(manifest, e.to_string()))?;
    std::fs::write(manifest, text).map_err(|e| Error::io(manifest, e))?;
    let data = manifest.parent().unwrap_or(Path::new(".")).join(data_name);
    let file = File::create(&data).map_err(|e| Error::io(&data, e))?;
    let mut w = BufWriter::new(file);
    for t in 0..meas.len() {
        let row: Vec<String> = meas.responses.iter().map(|r| r[t].to_string()).collect();
        writeln!(w, "{}", row.join(",")).map_err(|e| Error::io(&data, e))?;
    }
    w.flush().map_err(|e| Error::io(&data, e))
}
