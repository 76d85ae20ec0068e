use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tdw_smir::config::{OutputFormat, RunConfig};
use tdw_smir::directivity::AnalyticPattern;
use tdw_smir::pipeline::{self, Overrides};
use tdw_smir::Error;

#[derive(Parser)]
#[command(name = "tdw-smir", version, about = "Spherical microphone array room impulse responses")]
struct Cli {
    /// Worker threads for the image loop (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the default configuration as commented TOML and exit.
    #[arg(long, global = true)]
    print_defaults: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and write capsule signals plus side-car metadata.
    Simulate(RunArgs),
    /// Compare engine and frequency-domain reference transfer functions.
    Compare(RunArgs),
    /// Print a directivity pattern over a polar sweep as CSV.
    Pattern(PatternArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Direct path only.
    #[arg(long)]
    anechoic: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct PatternArgs {
    /// omnidirectional (or omni), cardioid, subcardioid, hypercardioid or bidirectional
    kind: String,
    #[arg(long, default_value_t = 5)]
    order: usize,
    #[arg(long, default_value_t = 181)]
    points: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Wav,
    Csv,
    Both,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Wav => OutputFormat::Wav,
            Format::Csv => OutputFormat::Csv,
            Format::Both => OutputFormat::Both,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::Model(_) | Error::Domain(_) | Error::NearField { .. } | Error::IllConditioned { .. } => 3,
        Error::Io { .. } | Error::Format { .. } => 4,
    }
}

fn load(args: &RunArgs) -> Result<RunConfig, Error> {
    // side-cars written by `simulate` carry provenance next to the config
    let sidecar = args.config.to_string_lossy().ends_with(".meta.toml");
    let cfg = if sidecar {
        pipeline::load_sidecar(&args.config)?
    } else {
        RunConfig::load(&args.config)?
    };
    let ov = Overrides {
        anechoic: args.anechoic,
        out_dir: args.out_dir.clone(),
        format: args.format.map(Into::into),
    };
    Ok(ov.apply(&cfg))
}

fn compare(cfg: &RunConfig) -> Result<(), Error> {
    let report = pipeline::run_compare(cfg)?;
    println!("band_hz,max_db,mean_db,worst_mic_mean_db");
    for b in &report.bands {
        println!(
            "{}-{},{:.3},{:.3},{:.3}",
            b.band.0,
            b.band.1,
            b.max_db(),
            b.mean_db(),
            b.worst_mean_db()
        );
    }
    for f in &report.files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?;
    }
    if cli.print_defaults {
        print!("{}", defaults_toml());
        return Ok(());
    }
    match cli.command {
        None => Err(Error::Config("no subcommand given (try --help)".into())),
        Some(Command::Simulate(args)) => {
            let cfg = load(&args)?;
            for f in pipeline::run_simulate(&cfg)? {
                println!("{}", f.display());
            }
            if cfg.compare.enabled {
                compare(&cfg)?;
            }
            Ok(())
        }
        Some(Command::Compare(args)) => compare(&load(&args)?),
        Some(Command::Pattern(args)) => {
            let kind: AnalyticPattern = args.kind.parse()?;
            println!("theta_rad,value");
            for (t, v) in pipeline::pattern_sweep(kind, args.order, args.points) {
                println!("{t},{v}");
            }
            Ok(())
        }
    }
}

// Comments attached to `section.key` when printing defaults.
const DOCS: &[(&str, &str)] = &[
    ("room.dims", "room size [Lx, Ly, Lz] in meters"),
    ("room.beta", "pressure reflection coefficients: x = 0, x = Lx, y = 0, y = Ly, z = 0, z = Lz"),
    ("source.pattern", "omnidirectional | cardioid | subcardioid | hypercardioid | bidirectional (or bundle = \"manifest.toml\")"),
    ("source.order", "SH order of the source directivity"),
    ("source.farfield_compensation", "measured bundles only: undo 1/r spreading and the travel delay"),
    ("source.regularization", "Tikhonov weight for least-squares directivity analysis"),
    ("source.max_condition", "reject analysis grids with a larger condition number"),
    ("array.radius", "observation sphere radius in meters; grid = \"dirs.csv\" overrides the 32 capsules"),
    ("sim.fs", "sample rate in Hz"),
    ("sim.speed_of_sound", "m/s"),
    ("sim.order", "SH order of the observed field"),
    ("sim.sampling", "cell-average | point"),
    ("filter.enabled", "low-pass the capsule signals (off by default)"),
    ("filter.taps", "odd FIR length, Kaiser window"),
    ("output.format", "wav | csv | both"),
    ("output.anechoic_variant", "also write <name>_anechoic with the direct path only"),
    ("compare.nfft", "FFT length; frequencies are k fs / nfft"),
];

fn defaults_toml() -> String {
    let text = RunConfig::example().to_toml();
    let mut out = String::from(
        "# tdw-smir configuration with defaults.\n\
         # Omitted sections take these values; unknown keys are rejected.\n\
         # sim.image_count and sim.max_reflection_order are exclusive; with neither, 24 images are used.\n\
         # sim.duration (seconds) defaults to the last image arrival plus the kernel support.\n\n",
    );
    let mut section = String::new();
    for line in text.lines() {
        if let Some(s) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = s.to_string();
        } else if let Some((key, _)) = line.split_once(" = ") {
            let path = format!("{section}.{key}");
            if let Some((_, doc)) = DOCS.iter().find(|(k, _)| *k == path) {
                out.push_str("# ");
                out.push_str(doc);
                out.push('\n');
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
