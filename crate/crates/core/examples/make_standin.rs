//! Writes the synthetic order-5 loudspeaker bundle used when no measured
//! directivity dataset is available.
//!
//! cargo run -p tdw-smir --example make_standin [-- <manifest path> [fs]]

use std::path::PathBuf;

use tdw_smir::directivity::synthetic_loudspeaker_measurement;
use tdw_smir::io::write_bundle;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let manifest = args.next().map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/standin/loudspeaker.toml")
    });
    let fs: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(44_100.0);
    if let Some(dir) = manifest.parent() {
        std::fs::create_dir_all(dir)?;
    }
    // 2 m matches common far-field measurement radii
    write_bundle(&manifest, &synthetic_loudspeaker_measurement(fs, 2.0))?;
    println!("wrote {}", manifest.display());
    Ok(())
}
