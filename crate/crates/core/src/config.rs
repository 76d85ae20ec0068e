//! Run configuration: a strict TOML schema resolving to engine inputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::{load_mic_grid, LowpassSettings, MicArraySpec};
use crate::directivity::{AnalysisOptions, AnalyticPattern, DirectivitySpec, SourceSpec};
use crate::error::{Error, Result};
use crate::ism::{ImageSelection, RoomSpec, SimulationConfig};
use crate::kernel::KernelSampling;
use crate::sh::{direction_angles, EulerAngles};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub room: RoomSection,
    pub source: SourceSection,
    pub array: ArraySection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub compare: CompareSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSection {
    /// `[Lx, Ly, Lz]` in meters.
    pub dims: [f64; 3],
    /// Walls at x = 0, x = Lx, y = 0, y = Ly, z = 0, z = Lz.
    pub beta: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub position: [f64; 3],
    /// Analytic pattern name; exclusive with `bundle`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<AnalyticPattern>,
    /// Directional impulse-response bundle manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<PathBuf>,
    /// Point the source axis at; defaults to the array center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aim_at: Option<[f64; 3]>,
    /// Explicit orientation; exclusive with `aim_at`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<EulerAngles>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub farfield_compensation: bool,
    #[serde(default)]
    pub regularization: f64,
    #[serde(default = "default_max_condition")]
    pub max_condition: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub center: [f64; 3],
    pub radius: f64,
    /// CSV of `theta_rad,phi_rad` rows; default is the em32 table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub fs: f64,
    pub speed_of_sound: f64,
    pub order: usize,
    /// Nearest-image count (direct path included); exclusive with `max_reflection_order`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_reflection_order: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    pub sampling: KernelSampling,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            fs: 44_100.0,
            speed_of_sound: 343.0,
            order: 5,
            image_count: None,
            max_reflection_order: None,
            duration: None,
            sampling: KernelSampling::CellAverage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    pub enabled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_hz: Option<f64>,
    pub taps: usize,
    pub attenuation_db: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        let d = LowpassSettings::default();
        Self {
            enabled: false,
            cutoff_hz: d.cutoff_hz,
            taps: d.taps,
            attenuation_db: d.attenuation_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Wav,
    Csv,
    Both,
}

impl OutputFormat {
    pub fn wav(self) -> bool {
        matches!(self, OutputFormat::Wav | OutputFormat::Both)
    }

    pub fn csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// File stem of the outputs.
    pub name: String,
    pub format: OutputFormat,
    pub normalize: bool,
    /// Also write the direct-path-only variant.
    pub anechoic_variant: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            name: "rir".into(),
            format: OutputFormat::Both,
            normalize: false,
            anechoic_variant: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub enabled: bool,
    /// FFT length; also fixes the frequency grid (`k fs / nfft`).
    pub nfft: usize,
    pub f_min: f64,
    pub f_max: f64,
    /// Bands reported separately in the summary.
    pub bands: Vec<[f64; 2]>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            enabled: false,
            nfft: 8192,
            f_min: 100.0,
            f_max: 8000.0,
            bands: vec![[100.0, 3000.0], [3000.0, 8000.0]],
        }
    }
}

fn default_order() -> usize {
    5
}

fn default_max_condition() -> f64 {
    AnalysisOptions::default().max_condition
}

/// Engine inputs resolved from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Resolved {
    pub room: RoomSpec,
    pub source: SourceSpec,
    pub array: MicArraySpec,
    pub sim: SimulationConfig,
}

fn field(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

impl RunConfig {
    /// Parses TOML; relative paths are resolved against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| {
            Error::Config(e.to_string().trim_start_matches("TOML parse error ").trim().to_string())
        })?;
        cfg.rebase(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(b) = self.source.bundle.as_mut() {
            fix(b);
        }
        if let Some(g) = self.array.grid.as_mut() {
            fix(g);
        }
        fix(&mut self.output.dir);
    }

    /// Documented defaults with the cardioid shoebox scenario filled in.
    pub fn example() -> Self {
        Self {
            room: RoomSection {
                dims: [4.0, 6.0, 3.0],
                beta: [0.45, 0.7, 0.8, 0.5, 0.6, 0.75],
            },
            source: SourceSection {
                position: [1.0, 3.5, 2.1],
                pattern: Some(AnalyticPattern::Cardioid),
                bundle: None,
                aim_at: None,
                orientation: None,
                order: default_order(),
                farfield_compensation: false,
                regularization: 0.0,
                max_condition: default_max_condition(),
            },
            array: ArraySection {
                center: [2.5, 3.5, 2.1],
                radius: 0.042,
                grid: None,
            },
            sim: SimSection {
                image_count: Some(24),
                ..Default::default()
            },
            filter: FilterSection::default(),
            output: OutputSection::default(),
            compare: CompareSection::default(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        for (i, d) in self.room.dims.iter().enumerate() {
            if !(*d > 0.0 && d.is_finite()) {
                return Err(field(&format!("room.dims[{i}]"), format!("must be positive, got {d}")));
            }
        }
        for (i, b) in self.room.beta.iter().enumerate() {
            if !(0.0..=1.0).contains(b) {
                return Err(field(&format!("room.beta[{i}]"), format!("must lie in [0, 1], got {b}")));
            }
        }
        match (&self.source.pattern, &self.source.bundle) {
            (None, None) => return Err(field("source", "one of `pattern` or `bundle` is required")),
            (Some(_), Some(_)) => return Err(field("source", "`pattern` and `bundle` are exclusive")),
            _ => {}
        }
        if self.source.aim_at.is_some() && self.source.orientation.is_some() {
            return Err(field("source", "`aim_at` and `orientation` are exclusive"));
        }
        if let Some(o) = &self.source.orientation {
            EulerAngles::new(o.alpha, o.beta, o.gamma).map_err(|e| field("source.orientation", e))?;
        }
        if self.source.regularization < 0.0 {
            return Err(field("source.regularization", "must be non-negative"));
        }
        if !(self.array.radius > 0.0) {
            return Err(field("array.radius", format!("must be positive, got {}", self.array.radius)));
        }
        if !(self.sim.fs > 0.0) {
            return Err(field("sim.fs", format!("must be positive, got {}", self.sim.fs)));
        }
        if !(self.sim.speed_of_sound > 0.0) {
            return Err(field("sim.speed_of_sound", "must be positive"));
        }
        if self.sim.image_count.is_some() && self.sim.max_reflection_order.is_some() {
            return Err(field("sim", "`image_count` and `max_reflection_order` are exclusive"));
        }
        if self.sim.image_count == Some(0) {
            return Err(field("sim.image_count", "must be at least 1"));
        }
        if let Some(d) = self.sim.duration {
            if !(d > 0.0) {
                return Err(field("sim.duration", format!("must be positive, got {d}")));
            }
        }
        if self.filter.enabled {
            self.lowpass()
                .validate(self.sim.fs)
                .map_err(|e| field("filter", e.to_string().trim_start_matches("invalid configuration: ")))?;
        }
        if self.compare.nfft < 16 {
            return Err(field("compare.nfft", "must be at least 16"));
        }
        if !(self.compare.f_min > 0.0 && self.compare.f_max > self.compare.f_min) {
            return Err(field("compare", "need 0 < f_min < f_max"));
        }
        Ok(())
    }

    fn lowpass(&self) -> LowpassSettings {
        LowpassSettings {
            cutoff_hz: self.filter.cutoff_hz,
            taps: self.filter.taps,
            attenuation_db: self.filter.attenuation_db,
        }
    }

    pub fn image_selection(&self) -> ImageSelection {
        match (self.sim.image_count, self.sim.max_reflection_order) {
            (Some(n), _) => ImageSelection::Count(n),
            (None, Some(k)) => ImageSelection::MaxOrder(k),
            (None, None) => ImageSelection::Count(24),
        }
    }

    /// Builds engine inputs, reading any referenced files.
    pub fn resolve(&self) -> Result<Resolved> {
        self.validate()?;
        let room = RoomSpec::new(self.room.dims, self.room.beta).map_err(|e| field("room", e))?;
        let mics = match &self.array.grid {
            Some(p) => load_mic_grid(p)?,
            None => crate::array::eigenmike_directions(),
        };
        let array = MicArraySpec::new(self.array.center, self.array.radius, mics)
            .map_err(|e| field("array", e))?;
        let directivity = match (&self.source.pattern, &self.source.bundle) {
            (Some(p), _) => DirectivitySpec::Analytic(*p),
            (None, Some(b)) => DirectivitySpec::Measured(crate::io::read_bundle(b)?),
            (None, None) => unreachable!("validated"),
        };
        let orientation = match (&self.source.orientation, &self.source.aim_at) {
            (Some(o), _) => *o,
            (None, target) => {
                let t = target.unwrap_or(self.array.center);
                let p = self.source.position;
                let (theta, phi) = direction_angles([t[0] - p[0], t[1] - p[1], t[2] - p[2]]);
                EulerAngles::pointing_to(theta, phi)
            }
        };
        let source = SourceSpec {
            position: self.source.position,
            orientation,
            directivity,
            order: self.source.order,
            analysis: AnalysisOptions {
                regularization: self.source.regularization,
                max_condition: self.source.max_condition,
                farfield_compensation: self.source.farfield_compensation,
                speed_of_sound: self.sim.speed_of_sound,
            },
        };
        let sim = SimulationConfig {
            fs: self.sim.fs,
            speed_of_sound: self.sim.speed_of_sound,
            order: self.sim.order,
            images: self.image_selection(),
            duration: self.sim.duration,
            sampling: self.sim.sampling,
            lowpass: self.filter.enabled.then(|| self.lowpass()),
        };
        Ok(Resolved {
            room,
            source,
            array,
            sim,
        })
    }
}
