//! Command-line driver.

use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use wavefuse_core::fusion::DEFAULT_WA_WEIGHT;
use wavefuse_core::metrics::qnr;
use wavefuse_core::tiling::plan_grid;
use wavefuse_core::wire::SampleEncoding;
use wavefuse_core::{FusionMethod, WaveletKind};

use crate::bench::{run_bench, BenchConfig, DEFAULT_SEED};
use crate::cluster::{run_master, run_worker, MasterConfig, WorkerExit};
use crate::error::{Error, Result};
use crate::io::{read_bands, read_gray, write_bands};
use crate::pad::pad_to_grid;
use crate::pool::fuse_tiled;

#[derive(Debug, Parser)]
#[command(name = "wavefuse", version, about = "Pan-sharpening over a tile grid, local or distributed")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fuse a PAN image with MS bands.
    Fuse(FuseArgs),
    /// Score a fused result against its inputs.
    Metrics(MetricsArgs),
    /// Time fusion on synthetic scenes.
    Bench(BenchArgs),
    /// Serve tiles to a master.
    Worker(WorkerArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodName {
    Wa,
    Ihs,
    Hdwt,
    Ddwt,
}

impl MethodName {
    pub fn with_weight(self, weight: f32) -> FusionMethod {
        match self {
            MethodName::Wa => FusionMethod::WeightedAverage { weight },
            MethodName::Ihs => FusionMethod::Ihs,
            MethodName::Hdwt => FusionMethod::DwtReplace(WaveletKind::Haar),
            MethodName::Ddwt => FusionMethod::DwtReplace(WaveletKind::Daubechies4),
        }
    }
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub pan: PathBuf,
    /// One PGM or PPM, or one PGM per band.
    #[arg(long, required = true)]
    pub ms: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub method: MethodName,
    /// PAN weight for `wa`.
    #[arg(long, default_value_t = DEFAULT_WA_WEIGHT)]
    pub weight: f32,
    #[arg(long, default_value = "1x1", value_parser = parse_size)]
    pub grid: (usize, usize),
    /// Threads for local fusion.
    #[arg(long, conflicts_with = "nodes")]
    pub workers: Option<usize>,
    /// Worker endpoints, host:port separated by commas.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Vec<String>,
    /// Send tiles as f32 instead of 8-bit samples.
    #[arg(long)]
    pub exact_transfer: bool,
    /// Seconds a worker may hold tiles without answering.
    #[arg(long, default_value_t = 30)]
    pub timeout: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// The fused image: one PPM or one PGM per band.
    #[arg(long, required = true)]
    pub fused: Vec<PathBuf>,
    #[arg(long, required = true)]
    pub ms: Vec<PathBuf>,
    #[arg(long)]
    pub pan: PathBuf,
    /// PAN/MS resolution ratio; checked against the image sizes.
    #[arg(long)]
    pub ratio: Option<usize>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "4070x3736")]
    pub sizes: Vec<(usize, usize)>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "wa,ihs,hdwt,ddwt")]
    pub methods: Vec<MethodName>,
    #[arg(long, default_value_t = DEFAULT_WA_WEIGHT)]
    pub weight: f32,
    #[arg(long, value_delimiter = ',', value_parser = parse_size, default_value = "2x2")]
    pub grid: Vec<(usize, usize)>,
    /// Worker counts; the first is the speedup baseline.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub workers: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub nodes: Vec<String>,
    #[arg(long)]
    pub exact_transfer: bool,
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write the rows as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WorkerArgs {
    /// Address to listen on, host:port.
    #[arg(long)]
    pub listen: String,
}

/// Parses `WxH`.
pub fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("expected a positive integer, got {v:?}"))
    };
    Ok((parse(w)?, parse(h)?))
}

fn interrupt_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let set = flag.clone();
    if let Err(e) = ctrlc::set_handler(move || set.store(true, Ordering::SeqCst)) {
        log::warn!("no interrupt handler: {e}");
    }
    flag
}

fn encoding(exact: bool) -> SampleEncoding {
    if exact {
        SampleEncoding::Float32
    } else {
        SampleEncoding::Byte
    }
}

fn checked_method(name: MethodName, weight: f32, bands: usize) -> Result<FusionMethod> {
    if name == MethodName::Ihs && bands != 3 {
        return Err(Error::Usage(format!("IHS requires 3 bands, got {bands}")));
    }
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::Usage(format!("weight {weight} outside [0, 1]")));
    }
    Ok(name.with_weight(weight))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fuse(args) => cmd_fuse(&args).map(|paths| {
            for p in paths {
                println!("{}", p.display());
            }
        }),
        Command::Metrics(args) => cmd_metrics(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Worker(args) => cmd_worker(&args),
    }
}

pub fn cmd_fuse(args: &FuseArgs) -> Result<Vec<PathBuf>> {
    if args.workers == Some(0) {
        return Err(Error::Usage("--workers must be at least 1".into()));
    }
    let pan = read_gray(&args.pan)?;
    let ms = read_bands(&args.ms)?;
    let method = checked_method(args.method, args.weight, ms.band_count())?;
    let (gw, gh) = args.grid;
    let padded = pad_to_grid(pan, ms, gw, gh)?;
    let (pw, ph) = padded.pan.dims();
    let grid = plan_grid(pw, ph, gw, gh)?;
    let fused = if args.nodes.is_empty() {
        let workers = args
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        fuse_tiled(&padded.pan, &padded.ms, method, &grid, workers)?
    } else {
        let cfg = MasterConfig {
            task_timeout: Duration::from_secs(args.timeout),
            encoding: encoding(args.exact_transfer),
            stop: Some(interrupt_flag()),
            ..MasterConfig::default()
        };
        run_master(&padded.pan, &padded.ms, method, &grid, &args.nodes, &cfg)?
    };
    write_bands(&args.out, &padded.crop(&fused)?)
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let fused = read_bands(&args.fused)?;
    let ms = read_bands(&args.ms)?;
    let pan = read_gray(&args.pan)?;
    if let Some(r) = args.ratio {
        if r == 0 || pan.dims() != (ms.width() * r, ms.height() * r) {
            return Err(Error::Usage(format!(
                "ratio {r} does not match PAN {}x{} and MS {}x{}",
                pan.width(),
                pan.height(),
                ms.width(),
                ms.height()
            )));
        }
    }
    let report = qnr(&fused, &ms, &pan)?;
    print!("{report}");
    if let Some(out) = &args.out {
        let record = json!({
            "ergas": report.ergas,
            "q_per_band": report.q_per_band,
            "d_lambda": report.d_lambda,
            "d_s": report.d_s,
            "qnr": report.qnr,
        });
        write_text(out, &format!("{record:#}\n"))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let methods = args
        .methods
        .iter()
        .map(|&m| checked_method(m, args.weight, 3))
        .collect::<Result<Vec<_>>>()?;
    let cfg = BenchConfig {
        sizes: args.sizes.clone(),
        methods,
        grids: args.grid.clone(),
        workers: args.workers.clone(),
        reps: args.reps,
        seed: args.seed,
        bands: 3,
        nodes: (!args.nodes.is_empty()).then(|| args.nodes.clone()),
        master: MasterConfig {
            encoding: encoding(args.exact_transfer),
            stop: (!args.nodes.is_empty()).then(interrupt_flag),
            ..MasterConfig::default()
        },
    };
    let report = run_bench(&cfg)?;
    print!("{}", report.render_tables());
    print!("{}", report.render_speedup(args.workers[0]));
    if let Some(out) = &args.out {
        write_text(out, &format!("{:#}\n", report.to_json()))?;
    }
    Ok(())
}

pub fn cmd_worker(args: &WorkerArgs) -> Result<()> {
    let listener = TcpListener::bind(&args.listen).map_err(|e| {
        Error::Usage(format!("cannot listen on {}: {e}", args.listen))
    })?;
    let stop = interrupt_flag();
    match run_worker(listener, &stop)? {
        WorkerExit::Shutdown => Ok(()),
        WorkerExit::Stopped => Err(Error::Interrupted),
    }
}
