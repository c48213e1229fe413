//! Command implementations behind the `circpat` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use circpat::forward::detector_signal;
use circpat::io::{
    decode_detector, decode_volume, detector_to_csv, encode_detector, encode_volume,
};
use circpat::metrics::metrics_report;
use circpat::noise::add_uniform_noise;
use circpat::range::range_report;
use circpat::recon::reconstruct_pipeline;
use circpat::{DataKind, DetectorData, PhantomSpec, RunConfig, Vec3, VolumeGrid};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

pub mod pgm;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

const NOISE_CONVENTION: &str =
    "uniform on [-level*A, level*A], A = max |value| over the dataset, one draw per sample in polar-major storage order (ChaCha8 seeded from rng_seed)";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Validation(String),
    #[error("range check failed: worst residual {worst:.3e} > threshold {threshold:.3e}")]
    RangeFailure { worst: f64, threshold: f64 },
    #[error(transparent)]
    Core(#[from] circpat::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Core(circpat::Error::Io(_)) => EXIT_IO,
            _ => EXIT_VALIDATION,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "circpat",
    version,
    about = "Photoacoustic tomography with circular detectors on a sphere"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate circular-detector data for a phantom.
    Simulate(SimulateArgs),
    /// Add seeded uniform noise to a data file.
    AddNoise(AddNoiseArgs),
    /// Reconstruct the initial pressure from a data file.
    Reconstruct(ReconstructArgs),
    /// Check the range conditions on a data file.
    Rangecheck(RangecheckArgs),
    /// Compare a reconstructed volume with a phantom.
    Metrics(MetricsArgs),
    /// Phantom file utilities.
    Phantom {
        #[command(subcommand)]
        command: PhantomCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum PhantomCommand {
    /// Parse and check a phantom file.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        config: ConfigArg,
    },
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// TOML file with `key = value` run parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub phantom: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write a CSV export next to the binary file.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct AddNoiseArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub config: ConfigArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RangecheckArgs {
    pub data: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub l_max: u32,
    #[arg(long, default_value_t = 5)]
    pub n_zeros: usize,
    #[arg(long, default_value_t = 0.02)]
    pub threshold: f64,
    /// Prefix for `<out>.csv` and `<out>.txt`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub volume: PathBuf,
    #[arg(long)]
    pub phantom: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::AddNoise(a) => add_noise(&a),
        Command::Reconstruct(a) => reconstruct(&a),
        Command::Rangecheck(a) => rangecheck(&a),
        Command::Metrics(a) => metrics(&a),
        Command::Phantom {
            command: PhantomCommand::Validate { file, config },
        } => validate_phantom(&file, &config),
    })
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `path` with `suffix` appended to the file name.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Loads the run configuration; a missing `--config` gives the defaults.
pub fn load_config(arg: &ConfigArg) -> CliResult<RunConfig> {
    let cfg = match &arg.config {
        None => RunConfig::default(),
        Some(p) => {
            let bytes = read(p)?;
            let text = String::from_utf8(bytes)
                .map_err(|_| CliError::Validation(format!("{}: not UTF-8", p.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
        }
    };
    Ok(cfg)
}

fn validated(cfg: RunConfig) -> CliResult<RunConfig> {
    cfg.validate()?;
    Ok(RunConfig {
        s_max: Some(cfg.resolved_s_max()),
        ..cfg
    })
}

fn load_phantom(path: &Path) -> CliResult<(PhantomSpec, String)> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Validation(format!("{}: not UTF-8", path.display())))?;
    let spec = PhantomSpec::from_json(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok((spec, sha256_hex(&bytes)))
}

fn load_detector(path: &Path) -> CliResult<(DetectorData, String)> {
    let bytes = read(path)?;
    let data = decode_detector(&bytes)?;
    Ok((data, sha256_hex(&bytes)))
}

fn write_sidecars(
    out: &Path,
    cfg: Option<&RunConfig>,
    provenance: serde_json::Value,
) -> CliResult<()> {
    if let Some(cfg) = cfg {
        let text = toml::to_string(cfg).map_err(|e| CliError::Validation(e.to_string()))?;
        write(&sidecar(out, ".config.toml"), text)?;
    }
    let text = serde_json::to_string_pretty(&provenance).expect("json value serializes");
    write(&sidecar(out, ".json"), text + "\n")
}

fn input_entry(path: &Path, hash: &str) -> serde_json::Value {
    json!({ "path": path.display().to_string(), "sha256": hash })
}

fn simulate(a: &SimulateArgs) -> CliResult<()> {
    let mut cfg = load_config(&a.config)?;
    if let Some(level) = a.noise {
        cfg.noise_level = level;
    }
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    let cfg = validated(cfg)?;
    let (spec, hash) = load_phantom(&a.phantom)?;
    for w in spec.support_warnings(cfg.r_det) {
        eprintln!("warning: {w}");
    }
    let grid = cfg.detector_grid()?;
    let mut data = detector_signal(&spec, grid, cfg.n_circle)?;
    if cfg.noise_level > 0.0 {
        data = add_uniform_noise(&data, cfg.noise_level, cfg.rng_seed)?;
    }
    write(&a.out, encode_detector(&data)?)?;
    if a.csv {
        write(&sidecar(&a.out, ".csv"), detector_to_csv(&data))?;
    }
    write_sidecars(
        &a.out,
        Some(&cfg),
        json!({
            "command": "simulate",
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": [input_entry(&a.phantom, &hash)],
            "config": cfg,
            "noise": { "level": cfg.noise_level, "seed": cfg.rng_seed, "convention": NOISE_CONVENTION },
            "shape": [grid.sphere.n_polar, grid.sphere.n_az, grid.n_t],
            "max_abs": data.max_abs(),
        }),
    )
}

fn add_noise(a: &AddNoiseArgs) -> CliResult<()> {
    if !(0.0..1.0).contains(&a.noise) {
        return Err(CliError::Validation(format!(
            "noise level must lie in [0, 1), got {}",
            a.noise
        )));
    }
    let (data, hash) = load_detector(&a.data)?;
    let noisy = add_uniform_noise(&data, a.noise, a.seed)?;
    write(&a.out, encode_detector(&noisy)?)?;
    write_sidecars(
        &a.out,
        None,
        json!({
            "command": "add-noise",
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": [input_entry(&a.data, &hash)],
            "noise": { "level": a.noise, "seed": a.seed, "convention": NOISE_CONVENTION, "amplitude": data.max_abs() },
        }),
    )
}

fn reconstruct(a: &ReconstructArgs) -> CliResult<()> {
    let cfg = validated(load_config(&a.config)?)?;
    let (data, hash) = load_detector(&a.data)?;
    if data.kind != DataKind::P {
        return Err(CliError::Validation(format!(
            "{}: expected circular-detector data, found {:?}",
            a.data.display(),
            data.kind
        )));
    }
    if a.config.config.is_some() && cfg.detector_grid()? != data.grid {
        return Err(CliError::Validation(format!(
            "{}: detector grid does not match the configuration",
            a.data.display()
        )));
    }
    let params = circpat::ReconParams {
        n_circle: cfg.n_circle,
        ..cfg.recon_params()?
    };
    let start = Instant::now();
    let rec = reconstruct_pipeline(&data, &params)?;
    let seconds = start.elapsed().as_secs_f64();
    write(&a.out, encode_volume(&rec.volume)?)?;

    let (w, h, values) = x2x3_slice(&rec.volume);
    write(&sidecar(&a.out, ".x2x3.pgm"), pgm::encode(w, h, &values))?;
    let spec = rec.volume.spec;
    let coords: Vec<f64> = (0..spec.n).map(|i| spec.coord(i)).collect();
    let along_x3 = profile_csv("x3", &coords, |c| rec.volume.sample(Vec3::new(0.0, 0.0, c)));
    let along_x2 = profile_csv("x2", &coords, |c| rec.volume.sample(Vec3::new(0.0, c, 0.5)));
    write(&sidecar(&a.out, ".profile_x3.csv"), along_x3)?;
    write(&sidecar(&a.out, ".profile_x2.csv"), along_x2)?;

    write_sidecars(
        &a.out,
        Some(&cfg),
        json!({
            "command": "reconstruct",
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": [input_entry(&a.data, &hash)],
            "config": cfg,
            "diagnostics": rec.diagnostics,
            "seconds": seconds,
        }),
    )
}

/// Values on the plane x₁ = 0 at the voxel-center lattice, top row at the
/// largest x₃.
pub fn x2x3_slice(vol: &VolumeGrid) -> (usize, usize, Vec<f64>) {
    let spec = vol.spec;
    let n = spec.n;
    let mut out = Vec::with_capacity(n * n);
    for k in (0..n).rev() {
        for j in 0..n {
            out.push(vol.sample(Vec3::new(0.0, spec.coord(j), spec.coord(k))));
        }
    }
    (n, n, out)
}

fn profile_csv(name: &str, coords: &[f64], f: impl Fn(f64) -> f64) -> String {
    let mut s = format!("{name},value\n");
    for &c in coords {
        s += &format!("{c:.17e},{:.17e}\n", f(c));
    }
    s
}

fn rangecheck(a: &RangecheckArgs) -> CliResult<()> {
    if !(a.threshold >= 0.0) {
        return Err(CliError::Usage("--threshold must be non-negative".into()));
    }
    let (data, _) = load_detector(&a.data)?;
    let report = range_report(&data, a.l_max, a.n_zeros)?;
    let summary = report.summary(a.threshold);
    print!("{summary}");
    if let Some(out) = &a.out {
        write(&sidecar(out, ".csv"), report.to_csv())?;
        write(&sidecar(out, ".txt"), &summary)?;
    }
    if report.passes(a.threshold) {
        Ok(())
    } else {
        Err(CliError::RangeFailure {
            worst: report.worst(),
            threshold: a.threshold,
        })
    }
}

fn metrics(a: &MetricsArgs) -> CliResult<()> {
    let vol = decode_volume(&read(&a.volume)?)?;
    let (spec, _) = load_phantom(&a.phantom)?;
    let report = metrics_report(&vol, &spec)?;
    let csv = report.to_csv();
    match &a.out {
        Some(p) => write(p, csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn validate_phantom(file: &Path, config: &ConfigArg) -> CliResult<()> {
    let cfg = validated(load_config(config)?)?;
    let (spec, _) = load_phantom(file)?;
    for w in spec.support_warnings(cfg.r_det) {
        println!("warning: {w}");
    }
    println!(
        "{}: {} component(s), symmetrize = {}",
        file.display(),
        spec.components.len(),
        spec.symmetrize
    );
    Ok(())
}
