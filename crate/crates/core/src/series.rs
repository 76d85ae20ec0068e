use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sh::{ShMatrix, ShRotation};

/// Uniformly sampled sequence of SH coefficient sets.
///
/// Frame `i` sits at sample index `start + i`, i.e. time `(start + i) / fs`
/// relative to the emission instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ShTimeSeries {
    fs: f64,
    start: i64,
    order: usize,
    frames: Vec<ShMatrix>,
}

impl ShTimeSeries {
    pub fn new(fs: f64, start: i64, order: usize, frames: Vec<ShMatrix>) -> Result<Self> {
        if !(fs > 0.0) {
            return Err(Error::Config(format!("sample rate must be positive, got {fs}")));
        }
        if let Some(f) = frames.iter().find(|f| f.order() != order) {
            return Err(Error::Config(format!(
                "frame order {} differs from series order {order}",
                f.order()
            )));
        }
        Ok(Self {
            fs,
            start,
            order,
            frames,
        })
    }

    pub fn zeros(fs: f64, start: i64, order: usize, len: usize) -> Self {
        Self {
            fs,
            start,
            order,
            frames: vec![ShMatrix::zeros(order); len],
        }
    }

    /// A single frame at sample 0.
    pub fn impulse(fs: f64, coeffs: ShMatrix) -> Self {
        Self {
            fs,
            start: 0,
            order: coeffs.order(),
            frames: vec![coeffs],
        }
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn start_time(&self) -> f64 {
        self.start as f64 / self.fs
    }

    /// One past the last sample index.
    pub fn end(&self) -> i64 {
        self.start + self.frames.len() as i64
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frames(&self) -> &[ShMatrix] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [ShMatrix] {
        &mut self.frames
    }

    pub fn frame_at(&self, sample: i64) -> Option<&ShMatrix> {
        let i = sample - self.start;
        if i < 0 {
            return None;
        }
        self.frames.get(i as usize)
    }

    /// Time course of one coefficient.
    pub fn channel(&self, n: usize, m: i64) -> Vec<Complex64> {
        self.frames.iter().map(|f| f.get(n, m)).collect()
    }

    pub fn shifted(mut self, samples: i64) -> Self {
        self.start += samples;
        self
    }

    pub fn scale(&mut self, s: f64) {
        for f in &mut self.frames {
            f.scale(s);
        }
    }

    pub fn with_order(&self, order: usize) -> Self {
        Self {
            fs: self.fs,
            start: self.start,
            order,
            frames: self.frames.iter().map(|f| f.with_order(order)).collect(),
        }
    }

    pub fn map_frames(&self, f: impl Fn(&ShMatrix) -> ShMatrix) -> Self {
        let frames: Vec<ShMatrix> = self.frames.iter().map(f).collect();
        let order = frames.first().map_or(self.order, |f| f.order());
        Self {
            fs: self.fs,
            start: self.start,
            order,
            frames,
        }
    }

    pub fn rotated(&self, rotation: &ShRotation) -> Self {
        self.map_frames(|f| rotation.apply(f))
    }

    /// Adds `other` sample-aligned; samples outside `self`'s span are dropped.
    pub fn accumulate(&mut self, other: &ShTimeSeries) {
        assert_eq!(self.order, other.order, "SH order mismatch");
        for (i, f) in other.frames.iter().enumerate() {
            let idx = other.start + i as i64 - self.start;
            if idx >= 0 && (idx as usize) < self.frames.len() {
                self.frames[idx as usize] += f;
            }
        }
    }

    pub fn max_abs_diff(&self, other: &ShTimeSeries) -> f64 {
        let lo = self.start.min(other.start);
        let hi = self.end().max(other.end());
        let zero = ShMatrix::zeros(self.order.max(other.order));
        (lo..hi)
            .map(|k| {
                let a = self.frame_at(k).unwrap_or(&zero);
                let b = other.frame_at(k).unwrap_or(&zero);
                a.max_abs_diff(b)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.frames
            .iter()
            .flat_map(|f| f.as_slice().iter().map(|c| c.norm()))
            .fold(0.0, f64::max)
    }
}
