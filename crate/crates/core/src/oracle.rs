//! Frequency-domain references: point-to-point image-source impulse
//! responses and an SH-domain room transfer function generator.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::array::{MicArraySpec, MicSignals};
use crate::error::{Error, Result};
use crate::ism::{distance, frame_align, ImageSource, Reflect};
use crate::series::ShTimeSeries;
use crate::sh::{bessel::sph_bessel_j_all, bessel::sph_hankel2_all, flat_index, sh_basis, ShMatrix, ShRotation};

/// Classical image-source response for an omnidirectional source: one
/// nearest-sample impulse of height `attenuation / (4π d)` per image.
pub fn p2p_rir(images: &[ImageSource], mic: [f64; 3], fs: f64, c: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for im in images {
        let d = distance(im.position, mic);
        let k = (d / c * fs).round();
        if k >= 0.0 && (k as usize) < len {
            out[k as usize] += im.attenuation / (4.0 * PI * d);
        }
    }
    out
}

/// Per-channel complex transfer values on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Rtf {
    pub freqs: Vec<f64>,
    /// `values[q][k]`.
    pub values: Vec<Vec<Complex64>>,
}

impl Rtf {
    pub fn new(freqs: Vec<f64>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        if freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("frequency grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| v.len() != freqs.len()) {
            return Err(Error::Config("every channel needs one value per frequency".into()));
        }
        Ok(Self { freqs, values })
    }

    pub fn channel_count(&self) -> usize {
        self.values.len()
    }
}

/// FFT bin frequencies `k fs / nfft` inside `[lo, hi]`.
pub fn fft_grid(fs: f64, nfft: usize, lo: f64, hi: f64) -> Vec<f64> {
    (1..=nfft / 2)
        .map(|k| k as f64 * fs / nfft as f64)
        .filter(|f| (lo..=hi).contains(f))
        .collect()
}

/// Spectrum of each channel (no `1/fs` scaling) at FFT bins of length
/// `nfft`, restricted to `freqs`, which must be bin frequencies.
pub fn spectrum(signals: &MicSignals, nfft: usize, freqs: &[f64]) -> Result<Rtf> {
    if nfft < signals.len() {
        return Err(Error::Config(format!(
            "FFT length {nfft} shorter than the signal ({} samples)",
            signals.len()
        )));
    }
    let df = signals.fs / nfft as f64;
    let bins: Vec<usize> = freqs
        .iter()
        .map(|f| {
            let k = (f / df).round();
            if (k * df - f).abs() > 1e-9 * df.max(1.0) || k as usize > nfft / 2 {
                Err(Error::Config(format!("{f} Hz is not an FFT bin for nfft = {nfft}")))
            } else {
                Ok(k as usize)
            }
        })
        .collect::<Result<_>>()?;
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let values = signals
        .channels
        .iter()
        .map(|ch| {
            let mut buf: Vec<Complex64> = ch.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            buf.resize(nfft, Complex64::new(0.0, 0.0));
            fft.process(&mut buf);
            bins.iter()
                .map(|&k| {
                    let shift = -2.0 * PI * k as f64 * signals.start as f64 / nfft as f64;
                    buf[k] * Complex64::from_polar(1.0, shift)
                })
                .collect()
        })
        .collect();
    Rtf::new(freqs.to_vec(), values)
}

fn dtft(series: &ShTimeSeries, f: f64) -> ShMatrix {
    let mut acc = ShMatrix::zeros(series.order());
    for (i, frame) in series.frames().iter().enumerate() {
        let t = (series.start() + i as i64) as f64 / series.fs();
        acc += &(frame * Complex64::from_polar(1.0, -2.0 * PI * f * t));
    }
    acc
}

/// Single-band SH room transfer function at the capsules of `mics`.
///
/// Each image is reflected and rotated with the engine's operators; the
/// source is treated as a far-field point radiator whose gain is the
/// directivity toward the array, and the interior field is expanded with
/// `jₙ(kr) hₙ⁽²⁾(k r_s)` up to `order`. Time convention `e^{+iωt}`.
pub fn smir_rtf(
    source: &ShTimeSeries,
    images: &[ImageSource],
    mics: &MicArraySpec,
    freqs: &[f64],
    speed_of_sound: f64,
    order: usize,
) -> Result<Rtf> {
    if freqs.iter().any(|&f| !(f > 0.0)) {
        return Err(Error::Config("oracle frequencies must be positive".into()));
    }
    let v_order = source.order();
    struct Prepared {
        to_src: ShRotation,
        back: ShRotation,
        rs: f64,
        parity: [bool; 3],
        attenuation: f64,
    }
    let prepared = images
        .iter()
        .map(|im| {
            let (to, back, rs) = frame_align(mics.center, im.position)?;
            if rs <= mics.radius {
                return Err(Error::NearField {
                    distance: rs,
                    radius: mics.radius,
                });
            }
            Ok(Prepared {
                to_src: ShRotation::new(v_order, to),
                back: ShRotation::new(order, back),
                rs,
                parity: im.parity,
                attenuation: im.attenuation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let basis: Vec<Vec<Complex64>> = mics
        .mics
        .iter()
        .map(|&(t, p)| sh_basis(order, t, p))
        .collect();
    let toward_array: Vec<f64> = (0..=v_order)
        .map(|v| ((2 * v + 1) as f64 / (4.0 * PI)).sqrt() * if v % 2 == 0 { 1.0 } else { -1.0 })
        .collect();

    let columns: Vec<Vec<Complex64>> = freqs
        .par_iter()
        .map(|&f| {
            let k = 2.0 * PI * f / speed_of_sound;
            let gamma = dtft(source, f);
            let jn = sph_bessel_j_all(order, k * mics.radius)?;
            let mut total = ShMatrix::zeros(order);
            for p in &prepared {
                let local = p.to_src.apply(&gamma.reflect(p.parity));
                let gain: Complex64 = (0..=v_order)
                    .map(|v| local.as_slice()[flat_index(v, 0)] * toward_array[v])
                    .sum();
                let hn = sph_hankel2_all(order, k * p.rs)?;
                let mut zeta = ShMatrix::zeros(order);
                for n in 0..=order {
                    let norm = ((2 * n + 1) as f64 / (4.0 * PI)).sqrt();
                    zeta.as_mut_slice()[flat_index(n, 0)] =
                        Complex64::new(0.0, -k) * jn[n] * hn[n] * norm * gain * p.attenuation;
                }
                total += &p.back.apply(&zeta);
            }
            Ok(basis
                .iter()
                .map(|y| total.as_slice().iter().zip(y).map(|(c, y)| c * y).sum())
                .collect())
        })
        .collect::<Result<_>>()?;

    let values = (0..basis.len())
        .map(|q| columns.iter().map(|col| col[q]).collect())
        .collect();
    Rtf::new(freqs.to_vec(), values)
}

/// Deviation statistics for one channel, in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviation {
    pub max_db: f64,
    pub mean_db: f64,
}

fn to_db(v: Complex64) -> f64 {
    20.0 * v.norm().max(1e-300).log10()
}

/// Per-channel magnitude deviation inside `band` after normalizing each
/// channel's peak over the whole grid to 0 dB.
pub fn rtf_compare(a: &Rtf, b: &Rtf, band: (f64, f64)) -> Result<Vec<Deviation>> {
    if a.freqs != b.freqs || a.channel_count() != b.channel_count() {
        return Err(Error::Config("RTFs are on different frequency grids or channel sets".into()));
    }
    let in_band: Vec<usize> = (0..a.freqs.len())
        .filter(|&k| (band.0..=band.1).contains(&a.freqs[k]))
        .collect();
    if in_band.is_empty() {
        return Err(Error::Config(format!("no frequencies inside {band:?} Hz")));
    }
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(va, vb)| {
            let da: Vec<f64> = va.iter().map(|&v| to_db(v)).collect();
            let db: Vec<f64> = vb.iter().map(|&v| to_db(v)).collect();
            let pa = da.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let pb = db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let devs: Vec<f64> = in_band
                .iter()
                .map(|&k| ((da[k] - pa) - (db[k] - pb)).abs())
                .collect();
            Deviation {
                max_db: devs.iter().cloned().fold(0.0, f64::max),
                mean_db: devs.iter().sum::<f64>() / devs.len() as f64,
            }
        })
        .collect())
}
