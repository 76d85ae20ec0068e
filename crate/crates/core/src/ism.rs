//! Image-source engine for cuboid rooms: lattice enumeration, parity
//! reflection of directivity, frame alignment, per-image propagation and
//! ordered summation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{lowpass, LowpassSettings};
use crate::directivity::SourceSpec;
use crate::error::{Error, Result};
use crate::kernel::{propagate_with_bank, KernelBank, KernelSampling, WavefrontGeometry};
use crate::series::ShTimeSeries;
use crate::sh::{direction_angles, flat_index, EulerAngles, ShMatrix, ShRotation};

/// Wall names in reflection-coefficient order.
pub const WALLS: [&str; 6] = ["x0", "x1", "y0", "y1", "z0", "z1"];

/// Cuboid room `[0, Lx] × [0, Ly] × [0, Lz]`; `beta` is indexed as walls at
/// x = 0, x = Lx, y = 0, y = Ly, z = 0, z = Lz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomSpec {
    pub dims: [f64; 3],
    pub beta: [f64; 6],
}

impl RoomSpec {
    pub fn new(dims: [f64; 3], beta: [f64; 6]) -> Result<Self> {
        let room = Self { dims, beta };
        room.validate()?;
        Ok(room)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::Config(format!("room dimensions must be positive, got {:?}", self.dims)));
        }
        if self.beta.iter().any(|&b| !(0.0..=1.0).contains(&b)) {
            return Err(Error::Config(format!(
                "reflection coefficients must lie in [0, 1], got {:?}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Strictly inside, with clearance `margin` to every wall.
    pub fn contains(&self, p: [f64; 3], margin: f64) -> bool {
        (0..3).all(|a| p[a] - margin > 0.0 && p[a] + margin < self.dims[a])
    }

    /// The room mirrored across `x = Lx / 2` (walls x0 and x1 swap).
    pub fn mirrored_x(&self) -> Self {
        let mut beta = self.beta;
        beta.swap(0, 1);
        Self { dims: self.dims, beta }
    }
}

/// One mirrored copy of the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSource {
    pub position: [f64; 3],
    /// Reflection counts per wall, ordered as [`WALLS`].
    pub counts: [u32; 6],
    /// Axis flips of the mirrored directivity.
    pub parity: [bool; 3],
    pub attenuation: f64,
    /// Lattice index `(q, p)` per axis: coordinate `(1 - 2p) x_s + 2 q L`.
    pub lattice: [(i64, u8); 3],
}

impl ImageSource {
    pub fn order(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_direct(&self) -> bool {
        self.order() == 0
    }

    pub fn distance_to(&self, p: [f64; 3]) -> f64 {
        distance(self.position, p)
    }
}

pub(crate) fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Which images to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageSelection {
    /// All images up to this total reflection order.
    MaxOrder(u32),
    /// The nearest `n` images to the array, direct path included.
    Count(usize),
}

fn lattice_image(room: &RoomSpec, src: [f64; 3], idx: [(i64, u8); 3]) -> ImageSource {
    let mut position = [0.0; 3];
    let mut counts = [0u32; 6];
    let mut parity = [false; 3];
    let mut attenuation = 1.0;
    for a in 0..3 {
        let (q, p) = idx[a];
        let sign = if p == 1 { -1.0 } else { 1.0 };
        position[a] = sign * src[a] + 2.0 * q as f64 * room.dims[a];
        counts[2 * a] = (q - p as i64).unsigned_abs() as u32;
        counts[2 * a + 1] = q.unsigned_abs() as u32;
        parity[a] = p == 1;
        attenuation *= room.beta[2 * a].powi(counts[2 * a] as i32)
            * room.beta[2 * a + 1].powi(counts[2 * a + 1] as i32);
    }
    ImageSource {
        position,
        counts,
        parity,
        attenuation,
        lattice: idx,
    }
}

fn lattice_block(room: &RoomSpec, src: [f64; 3], bound: i64) -> Vec<ImageSource> {
    let mut out = Vec::new();
    for qx in -bound..=bound {
        for px in 0..2u8 {
            for qy in -bound..=bound {
                for py in 0..2u8 {
                    for qz in -bound..=bound {
                        for pz in 0..2u8 {
                            out.push(lattice_image(room, src, [(qx, px), (qy, py), (qz, pz)]));
                        }
                    }
                }
            }
        }
    }
    out
}

fn sort_images(images: &mut [ImageSource], reference: [f64; 3]) {
    images.sort_by(|a, b| {
        a.distance_to(reference)
            .total_cmp(&b.distance_to(reference))
            .then_with(|| a.lattice.cmp(&b.lattice))
    });
}

/// Image sources sorted by distance to `reference` (the array center), ties
/// broken by lattice index.
pub fn enumerate_images(
    room: &RoomSpec,
    src: [f64; 3],
    reference: [f64; 3],
    selection: ImageSelection,
) -> Result<Vec<ImageSource>> {
    room.validate()?;
    if !room.contains(src, 0.0) {
        return Err(Error::Config(format!("source {src:?} is not strictly inside the room")));
    }
    match selection {
        ImageSelection::MaxOrder(k) => {
            let mut images: Vec<_> = lattice_block(room, src, k as i64 + 1)
                .into_iter()
                .filter(|im| im.order() <= k)
                .collect();
            sort_images(&mut images, reference);
            Ok(images)
        }
        ImageSelection::Count(0) => Err(Error::Config("image count must be at least 1".into())),
        ImageSelection::Count(n) => {
            // Any image outside the block |q| <= Q is at least 2 Q min(L)
            // away from a reference point inside the room.
            let lmin = room.dims.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut bound = 1i64;
            loop {
                let mut images = lattice_block(room, src, bound);
                sort_images(&mut images, reference);
                if images.len() >= n && images[n - 1].distance_to(reference) < 2.0 * bound as f64 * lmin {
                    images.truncate(n);
                    return Ok(images);
                }
                bound += 1;
            }
        }
    }
}

/// Mirror reflection of SH coefficients across the coordinate planes
/// selected by `parity = [x, y, z]`.
pub trait Reflect: Sized {
    fn reflect(&self, parity: [bool; 3]) -> Self;
}

fn reflect_slice(order: usize, input: &[num_complex::Complex64], parity: [bool; 3]) -> Vec<num_complex::Complex64> {
    let mut out = input.to_vec();
    if !parity.iter().any(|&p| p) {
        return out;
    }
    for n in 0..=order {
        for m in -(n as i64)..=(n as i64) {
            let mut src_m = m;
            let mut sign = 1.0;
            // x: φ → π - φ maps Yₙᵐ to Yₙ⁻ᵐ; y: φ → -φ adds (-1)^m
            if parity[0] ^ parity[1] {
                src_m = -m;
            }
            if parity[1] && m.rem_euclid(2) == 1 {
                sign = -sign;
            }
            if parity[2] && (n as i64 + m).rem_euclid(2) == 1 {
                sign = -sign;
            }
            out[flat_index(n, m)] = input[flat_index(n, src_m)] * sign;
        }
    }
    out
}

impl Reflect for ShMatrix {
    fn reflect(&self, parity: [bool; 3]) -> Self {
        ShMatrix::from_vec(self.order(), reflect_slice(self.order(), self.as_slice(), parity))
            .expect("order preserved")
    }
}

impl Reflect for ShTimeSeries {
    fn reflect(&self, parity: [bool; 3]) -> Self {
        self.map_frames(|f| f.reflect(parity))
    }
}

pub fn reflect_sh<T: Reflect>(coeffs: &T, parity: [bool; 3]) -> T {
    coeffs.reflect(parity)
}

/// Rotation bringing `image_pos` onto the `+z` axis of a frame centered at
/// `center`, its inverse, and the distance.
pub fn frame_align(center: [f64; 3], image_pos: [f64; 3]) -> Result<(EulerAngles, EulerAngles, f64)> {
    let d = [
        image_pos[0] - center[0],
        image_pos[1] - center[1],
        image_pos[2] - center[2],
    ];
    let rs = distance(image_pos, center);
    if rs == 0.0 {
        return Err(Error::Config("image source coincides with the array center".into()));
    }
    let (theta, phi) = direction_angles(d);
    if theta == 0.0 {
        return Ok((EulerAngles::IDENTITY, EulerAngles::IDENTITY, rs));
    }
    let back = EulerAngles::pointing_to(theta, phi);
    Ok((back.inverse(), back, rs))
}

/// Engine settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub fs: f64,
    pub speed_of_sound: f64,
    /// Output truncation order `N`.
    pub order: usize,
    pub images: ImageSelection,
    /// Output length in seconds; `None` covers the farthest image.
    pub duration: Option<f64>,
    pub sampling: KernelSampling,
    pub lowpass: Option<LowpassSettings>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            fs: 44_100.0,
            speed_of_sound: 343.0,
            order: 5,
            images: ImageSelection::Count(24),
            duration: None,
            sampling: KernelSampling::CellAverage,
            lowpass: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fs > 0.0) || !(self.speed_of_sound > 0.0) {
            return Err(Error::Config("sample rate and speed of sound must be positive".into()));
        }
        if let Some(d) = self.duration {
            if !(d > 0.0) {
                return Err(Error::Config(format!("duration must be positive, got {d}")));
            }
        }
        if let Some(lp) = &self.lowpass {
            lp.validate(self.fs)?;
        }
        Ok(())
    }
}

/// A validated, immutable simulation: room, source coefficients in room
/// orientation, array sphere and image set.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    center: [f64; 3],
    radius: f64,
    source: ShTimeSeries,
    images: Vec<ImageSource>,
}

impl Simulation {
    pub fn new(
        room: &RoomSpec,
        source: &SourceSpec,
        center: [f64; 3],
        radius: f64,
        config: &SimulationConfig,
    ) -> Result<Self> {
        config.validate()?;
        if !(radius > 0.0) {
            return Err(Error::Config(format!("array radius must be positive, got {radius}")));
        }
        if !room.contains(center, radius) {
            return Err(Error::Config(format!(
                "array sphere (center {center:?}, radius {radius} m) protrudes through a wall"
            )));
        }
        let images = enumerate_images(room, source.position, center, config.images)?;
        let coeffs = source.coefficients(config.fs)?;
        Self::from_parts(coeffs, images, center, radius, config)
    }

    /// Engine over an explicit image set and room-oriented source coefficients.
    pub fn from_parts(
        source: ShTimeSeries,
        images: Vec<ImageSource>,
        center: [f64; 3],
        radius: f64,
        config: &SimulationConfig,
    ) -> Result<Self> {
        config.validate()?;
        for im in &images {
            let rs = im.distance_to(center);
            if rs <= radius {
                return Err(Error::NearField { distance: rs, radius });
            }
        }
        Ok(Self {
            config: *config,
            center,
            radius,
            source,
            images,
        })
    }

    pub fn images(&self) -> &[ImageSource] {
        &self.images
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn source(&self) -> &ShTimeSeries {
        &self.source
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Output length in samples.
    pub fn output_len(&self) -> usize {
        match self.config.duration {
            Some(d) => (d * self.config.fs).ceil() as usize,
            None => {
                let far = self
                    .images
                    .iter()
                    .map(|im| im.distance_to(self.center))
                    .fold(0.0, f64::max);
                let last = ((far + self.radius) / self.config.speed_of_sound * self.config.fs).ceil() as i64
                    + self.source.end()
                    + 1;
                let taps = self.config.lowpass.map_or(0, |l| l.taps as i64);
                (last + taps).max(1) as usize
            }
        }
    }

    /// Contribution of one image in room orientation (before low-pass).
    pub fn contribution(&self, image: &ImageSource) -> Result<ShTimeSeries> {
        let (to_src, back, rs) = frame_align(self.center, image.position)?;
        let geometry = WavefrontGeometry::new(self.radius, rs, self.config.speed_of_sound)?;
        let local = self
            .source
            .reflect(image.parity)
            .rotated(&ShRotation::new(self.source.order(), to_src));
        let bank = KernelBank::new(
            &geometry,
            self.config.order,
            self.source.order(),
            self.config.fs,
            self.config.sampling,
        );
        let mut zeta = propagate_with_bank(&local, &bank);
        zeta.scale(image.attenuation);
        Ok(zeta.rotated(&ShRotation::new(self.config.order, back)))
    }

    /// Sum over a subset of images on the common grid starting at `t = 0`.
    pub fn run_subset(&self, images: &[ImageSource]) -> Result<ShTimeSeries> {
        let parts: Vec<ShTimeSeries> = images
            .par_iter()
            .map(|im| self.contribution(im))
            .collect::<Result<_>>()?;
        let mut out = ShTimeSeries::zeros(self.config.fs, 0, self.config.order, self.output_len());
        for p in &parts {
            out.accumulate(p);
        }
        if let Some(lp) = &self.config.lowpass {
            out = lowpass(&out, lp)?;
        }
        Ok(out)
    }

    /// Observed SH coefficients `ζₙᵐ(t)` in room orientation.
    pub fn run(&self) -> Result<ShTimeSeries> {
        self.run_subset(&self.images)
    }
}

/// One-shot convenience wrapper around [`Simulation`].
pub fn simulate_rir_sh(
    room: &RoomSpec,
    source: &SourceSpec,
    center: [f64; 3],
    radius: f64,
    config: &SimulationConfig,
) -> Result<ShTimeSeries> {
    Simulation::new(room, source, center, radius, config)?.run()
}
