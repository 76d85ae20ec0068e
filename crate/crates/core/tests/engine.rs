use std::f64::consts::PI;

use num_complex::Complex64;

use tdw_smir::array::{synthesize_mic_signals, LowpassSettings, MicArraySpec, MicSignals};
use tdw_smir::directivity::{AnalyticPattern, DirectivitySpec, SourceSpec};
use tdw_smir::ism::{enumerate_images, ImageSelection, RoomSpec, Simulation, SimulationConfig};
use tdw_smir::oracle::{fft_grid, p2p_rir, smir_rtf, spectrum};
use tdw_smir::Error;

const SRC: [f64; 3] = [1.0, 3.5, 2.1];
const CENTER: [f64; 3] = [2.5, 3.5, 2.1];

fn room() -> RoomSpec {
    RoomSpec::new([4.0, 6.0, 3.0], [0.45, 0.7, 0.8, 0.5, 0.6, 0.75]).unwrap()
}

fn omni() -> SourceSpec {
    SourceSpec::aimed_at(SRC, CENTER, DirectivitySpec::Analytic(AnalyticPattern::Omnidirectional), 0)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn run(source: &SourceSpec, cfg: &SimulationConfig) -> (Simulation, MicSignals) {
    let sim = Simulation::new(&room(), source, CENTER, 0.042, cfg).unwrap();
    let mics = MicArraySpec::eigenmike(CENTER, 0.042).unwrap();
    let zeta = sim.run().unwrap();
    (sim, synthesize_mic_signals(&zeta, &mics).unwrap())
}

#[test]
fn anechoic_arrivals_follow_time_of_flight() {
    let cfg = SimulationConfig {
        images: ImageSelection::Count(1),
        ..Default::default()
    };
    let (_, sig) = run(&omni(), &cfg);
    let pos = MicArraySpec::eigenmike(CENTER, 0.042).unwrap().positions();
    for (q, ch) in sig.channels.iter().enumerate() {
        let d = dist(SRC, pos[q]);
        let peak = ch
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap()
            .0 as f64;
        assert!((peak - d / 343.0 * 44_100.0).abs() <= 1.5, "mic {}", q + 1);
        // amplitude measured as pulse area: exact inverse-distance law
        let area: f64 = ch.iter().sum();
        assert!((area * 4.0 * PI * d - 1.0).abs() < 1e-3, "mic {}", q + 1);
    }
}

#[test]
fn output_support_follows_the_window() {
    let cfg = SimulationConfig {
        images: ImageSelection::Count(1),
        duration: Some(0.01),
        ..Default::default()
    };
    let (sim, _) = run(&omni(), &cfg);
    let zeta = sim.run().unwrap();
    let lo = ((1.5f64 - 0.042) / 343.0 * 44_100.0).floor() as usize;
    let hi = ((1.5f64 + 0.042) / 343.0 * 44_100.0).ceil() as usize;
    for (i, f) in zeta.frames().iter().enumerate() {
        if i < lo || i > hi {
            assert_eq!(f.norm_sqr(), 0.0, "sample {i}");
        }
    }
}

#[test]
fn filtering_commutes_with_synthesis() {
    let lp = LowpassSettings::default();
    let card = SourceSpec::aimed_at(SRC, CENTER, DirectivitySpec::Analytic(AnalyticPattern::Cardioid), 5);
    let base = SimulationConfig {
        images: ImageSelection::Count(6),
        duration: Some(0.03),
        ..Default::default()
    };
    let (_, plain) = run(&card, &base);
    let (_, filtered_sh) = run(&card, &SimulationConfig { lowpass: Some(lp), ..base });
    let filtered_sig = tdw_smir::array::lowpass(&plain, &lp).unwrap();
    let scale = plain.max_abs();
    for (a, b) in filtered_sh.channels.iter().zip(&filtered_sig.channels) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-10 * scale);
        }
    }
}

#[test]
fn oracles_agree_at_low_frequencies() {
    // reverberant omni: spectrum of the point-to-point response vs SH oracle
    let cfg = SimulationConfig {
        images: ImageSelection::Count(24),
        ..Default::default()
    };
    let sim = Simulation::new(&room(), &omni(), CENTER, 0.042, &cfg).unwrap();
    let mics = MicArraySpec::eigenmike(CENTER, 0.042).unwrap();
    let nfft = 8192;
    let freqs = fft_grid(44_100.0, nfft, 50.0, 1000.0);
    let oracle = smir_rtf(sim.source(), sim.images(), &mics, &freqs, 343.0, 5).unwrap();
    let pos = mics.positions();
    let channels = pos.iter().map(|p| p2p_rir(sim.images(), *p, 44_100.0, 343.0, nfft)).collect();
    let p2p = MicSignals {
        fs: 44_100.0,
        start: 0,
        directions: mics.mics.clone(),
        channels,
        normalization: None,
        lowpass: None,
    };
    let p2p = spectrum(&p2p, nfft, &freqs).unwrap();
    // dB comparison away from interference notches; complex error everywhere
    for q in 0..32 {
        let peak = oracle.values[q].iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 0..freqs.len() {
            let a = oracle.values[q][k];
            let b = p2p.values[q][k];
            assert!((a - b).norm() < 0.1 * peak, "mic {} at {} Hz", q + 1, freqs[k]);
            if a.norm() > peak * 10f64.powf(-12.0 / 20.0) {
                assert!((20.0 * (a.norm() / b.norm()).log10()).abs() < 1.0, "mic {} at {} Hz", q + 1, freqs[k]);
            }
        }
    }
}

#[test]
fn engines_share_the_image_set() {
    let cfg = SimulationConfig::default();
    let sim = Simulation::new(&room(), &omni(), CENTER, 0.042, &cfg).unwrap();
    let direct = enumerate_images(&room(), SRC, CENTER, cfg.images).unwrap();
    assert_eq!(sim.images(), &direct[..]);
    assert_eq!(direct.len(), 24);
}

#[test]
fn omni_engine_matches_green_function_in_band() {
    let cfg = SimulationConfig {
        images: ImageSelection::Count(1),
        ..Default::default()
    };
    let (_, sig) = run(&omni(), &cfg);
    let nfft = 4096;
    let freqs = fft_grid(44_100.0, nfft, 100.0, 3000.0);
    let s = spectrum(&sig, nfft, &freqs).unwrap();
    let pos = MicArraySpec::eigenmike(CENTER, 0.042).unwrap().positions();
    for (q, p) in pos.iter().enumerate() {
        let d = dist(SRC, *p);
        for (k, f) in freqs.iter().enumerate() {
            let g = Complex64::from_polar(1.0 / (4.0 * PI * d), -2.0 * PI * f / 343.0 * d);
            assert!((20.0 * (s.values[q][k].norm() / g.norm()).log10()).abs() < 0.5);
        }
    }
}

#[test]
fn near_field_and_protrusion_errors() {
    let cfg = SimulationConfig::default();
    let near = SourceSpec::aimed_at([2.5, 3.5, 2.14], CENTER, DirectivitySpec::Analytic(AnalyticPattern::Cardioid), 5);
    assert!(matches!(
        Simulation::new(&room(), &near, CENTER, 0.042, &cfg),
        Err(Error::NearField { .. })
    ));
    assert!(Simulation::new(&room(), &omni(), [3.98, 3.5, 2.1], 0.042, &cfg).is_err());
}
