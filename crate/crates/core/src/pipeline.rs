//! End-to-end runs driven by a [`RunConfig`]: simulation with file output,
//! comparison against the frequency-domain oracle, and pattern sweeps.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::array::{normalize_peak, synthesize_mic_signals, MicSignals};
use crate::config::{OutputFormat, Resolved, RunConfig};
use crate::directivity::{pattern_to_sh, AnalyticPattern};
use crate::error::{Error, Result};
use crate::ism::{ImageSelection, Simulation};
use crate::oracle::{fft_grid, rtf_compare, smir_rtf, spectrum, Deviation, Rtf};

/// Command-line overrides applied on top of a loaded configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub anechoic: bool,
    pub out_dir: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl Overrides {
    pub fn apply(&self, cfg: &RunConfig) -> RunConfig {
        let mut cfg = cfg.clone();
        if self.anechoic {
            cfg.sim.image_count = Some(1);
            cfg.sim.max_reflection_order = None;
        }
        if let Some(d) = &self.out_dir {
            cfg.output.dir = std::path::absolute(d).unwrap_or_else(|_| d.clone());
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        cfg
    }
}

/// Runs the engine and synthesizes the capsule signals.
pub fn simulate(res: &Resolved) -> Result<(Simulation, MicSignals)> {
    let sim = Simulation::new(&res.room, &res.source, res.array.center, res.array.radius, &res.sim)?;
    let zeta = sim.run()?;
    let mut signals = synthesize_mic_signals(&zeta, &res.array)?;
    signals.lowpass = res.sim.lowpass;
    Ok((sim, signals))
}

#[derive(Serialize)]
struct Provenance<'a> {
    generator: &'a str,
    version: &'a str,
    variant: &'a str,
    samples: usize,
    channels: usize,
    images: usize,
    normalization: f64,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    config: &'a RunConfig,
    provenance: Provenance<'a>,
}

/// Reads the configuration stored in a side-car file (provenance ignored).
pub fn load_sidecar(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table: toml::Table =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    table.remove("provenance");
    let text = toml::to_string(&table).map_err(|e| Error::format(path, e.to_string()))?;
    RunConfig::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
}

fn write_variant(cfg: &RunConfig, stem: &str, variant: &str, sim: &Simulation, signals: &MicSignals) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let signals = if cfg.output.normalize {
        normalize_peak(signals)?
    } else {
        signals.clone()
    };
    let mut files = Vec::new();
    if cfg.output.format.wav() {
        let p = dir.join(format!("{stem}.wav"));
        crate::io::write_wav(&p, &signals)?;
        files.push(p);
    }
    if cfg.output.format.csv() {
        let p = dir.join(format!("{stem}.csv"));
        crate::io::write_csv(&p, &signals)?;
        files.push(p);
    }
    let meta = dir.join(format!("{stem}.meta.toml"));
    let sidecar = Sidecar {
        config: cfg,
        provenance: Provenance {
            generator: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            variant,
            samples: signals.len(),
            channels: signals.channel_count(),
            images: sim.images().len(),
            normalization: signals.normalization.unwrap_or(1.0),
            files: files.iter().map(|p| p.display().to_string()).collect(),
        },
    };
    let text = toml::to_string(&sidecar).map_err(|e| Error::format(&meta, e.to_string()))?;
    std::fs::write(&meta, text).map_err(|e| Error::io(&meta, e))?;
    files.push(meta);
    Ok(files)
}

/// Simulates and writes signals plus side-car metadata; returns the files.
pub fn run_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let res = cfg.resolve()?;
    let (sim, signals) = simulate(&res)?;
    let mut files = write_variant(cfg, &cfg.output.name, "configured", &sim, &signals)?;
    if cfg.output.anechoic_variant && res.sim.images != ImageSelection::Count(1) {
        let mut ane_cfg = cfg.clone();
        ane_cfg.sim.image_count = Some(1);
        ane_cfg.sim.max_reflection_order = None;
        ane_cfg.output.anechoic_variant = false;
        let mut ane = res.clone();
        ane.sim.images = ImageSelection::Count(1);
        // keep the reverberant length so the two variants align sample by sample
        ane.sim.duration = Some(signals.len() as f64 / res.sim.fs);
        ane_cfg.sim.duration = ane.sim.duration;
        let (sim_a, sig_a) = simulate(&ane)?;
        files.extend(write_variant(
            &ane_cfg,
            &format!("{}_anechoic", cfg.output.name),
            "anechoic",
            &sim_a,
            &sig_a,
        )?);
    }
    Ok(files)
}

/// Deviation between engine and oracle for one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSummary {
    pub band: (f64, f64),
    pub per_mic: Vec<Deviation>,
}

impl BandSummary {
    pub fn max_db(&self) -> f64 {
        self.per_mic.iter().map(|d| d.max_db).fold(0.0, f64::max)
    }

    /// Mean over mics of the per-mic mean deviation.
    pub fn mean_db(&self) -> f64 {
        self.per_mic.iter().map(|d| d.mean_db).sum::<f64>() / self.per_mic.len() as f64
    }

    pub fn worst_mean_db(&self) -> f64 {
        self.per_mic.iter().map(|d| d.mean_db).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub engine: Rtf,
    pub oracle: Rtf,
    pub bands: Vec<BandSummary>,
    pub files: Vec<PathBuf>,
}

/// Engine and oracle transfer functions on the configured FFT grid.
pub fn compare_rtfs(cfg: &RunConfig) -> Result<(Rtf, Rtf)> {
    let res = cfg.resolve()?;
    let (sim, signals) = simulate(&res)?;
    let nfft = cfg.compare.nfft.max(signals.len().next_power_of_two());
    let freqs = fft_grid(res.sim.fs, nfft, cfg.compare.f_min, cfg.compare.f_max);
    if signals.fs != res.sim.fs {
        return Err(Error::Config("engine and oracle sample rates differ".into()));
    }
    let engine = spectrum(&signals, nfft, &freqs)?;
    let oracle = smir_rtf(
        sim.source(),
        sim.images(),
        &res.array,
        &freqs,
        res.sim.speed_of_sound,
        res.sim.order,
    )?;
    Ok((engine, oracle))
}

/// Runs both generators and writes RTFs and a per-mic deviation table.
pub fn run_compare(cfg: &RunConfig) -> Result<CompareReport> {
    let (engine, oracle) = compare_rtfs(cfg)?;
    let bands = cfg
        .compare
        .bands
        .iter()
        .map(|&[lo, hi]| {
            Ok(BandSummary {
                band: (lo, hi),
                per_mic: rtf_compare(&engine, &oracle, (lo, hi))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = &cfg.output.name;
    let p_engine = dir.join(format!("{name}_engine_rtf.csv"));
    let p_oracle = dir.join(format!("{name}_oracle_rtf.csv"));
    let p_dev = dir.join(format!("{name}_deviation.csv"));
    crate::io::write_rtf_csv(&p_engine, &engine)?;
    crate::io::write_rtf_csv(&p_oracle, &oracle)?;
    let mut text = String::from("mic,band_lo_hz,band_hi_hz,max_db,mean_db\n");
    for b in &bands {
        for (q, d) in b.per_mic.iter().enumerate() {
            text.push_str(&format!("{},{},{},{},{}\n", q + 1, b.band.0, b.band.1, d.max_db, d.mean_db));
        }
    }
    std::fs::write(&p_dev, text).map_err(|e| Error::io(&p_dev, e))?;
    Ok(CompareReport {
        engine,
        oracle,
        bands,
        files: vec![p_engine, p_oracle, p_dev],
    })
}

/// Pattern gain over `points` polar angles in `[0, π]` from the SH
/// coefficients truncated to `order`.
pub fn pattern_sweep(kind: AnalyticPattern, order: usize, points: usize) -> Vec<(f64, f64)> {
    let c = pattern_to_sh(kind).with_order(order);
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let theta = std::f64::consts::PI * i as f64 / (points - 1) as f64;
            (theta, c.evaluate(theta, 0.0).re)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_sweep_endpoints() {
        let s = pattern_sweep(AnalyticPattern::Cardioid, 5, 181);
        assert!((s[0].1 - 1.0).abs() < 1e-12);
        assert!(s[180].1.abs() < 1e-12);
        let b = pattern_sweep(AnalyticPattern::Bidirectional, 1, 3);
        assert!(b[1].1.abs() < 1e-12);
        // truncation below degree 1 leaves only the mean
        let o = pattern_sweep(AnalyticPattern::Cardioid, 0, 3);
        assert!(o.iter().all(|(_, v)| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn anechoic_override() {
        let cfg = Overrides {
            anechoic: true,
            ..Default::default()
        }
        .apply(&RunConfig::example());
        assert_eq!(cfg.image_selection(), ImageSelection::Count(1));
    }

    #[test]
    fn sidecar_reproduces_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::example();
        cfg.output.dir = dir.path().join("a");
        cfg.output.format = OutputFormat::Csv;
        cfg.sim.image_count = Some(4);
        let files = run_simulate(&cfg).unwrap();
        let meta = files.iter().find(|p| p.to_string_lossy().ends_with(".meta.toml")).unwrap();
        let mut again = load_sidecar(meta).unwrap();
        assert_eq!(again, cfg);
        again.output.dir = dir.path().join("b");
        run_simulate(&again).unwrap();
        let a = std::fs::read(dir.path().join("a/rir.csv")).unwrap();
        let b = std::fs::read(dir.path().join("b/rir.csv")).unwrap();
        assert_eq!(a, b);
    }
}
