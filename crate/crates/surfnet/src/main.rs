//! `surfnet` CLI: run the hotspot surface-network pipeline, sweep KDE
//! bandwidths, or chart an indices time series.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use surfnet::chart::emit_charts;
use surfnet::config::{load_region_geojson, parse_coord_mode, parse_horizon, PipelineConfig};
use surfnet::error::{Result, SurfnetError};
use surfnet::pipeline::{run_pipeline, run_sweep};

#[derive(Parser)]
#[command(name = "surfnet", version, about = "Mobility hotspot surface networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline: ingest, KDE surfaces, critical features,
    /// surface networks, and the graph-index time series.
    Run(PipelineArgs),
    /// Run the pipeline once per bandwidth and tabulate the per-window
    /// structure counts for comparison.
    Sweep(PipelineArgs),
    /// Render complexity and connectivity SVG panels from an indices CSV.
    Chart(ChartArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// TOML configuration file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input trajectory CSV (repeatable).
    #[arg(long)]
    input: Vec<PathBuf>,
    /// KDE bandwidth in meters; repeatable for `sweep`.
    #[arg(long)]
    bandwidth: Vec<f64>,
    /// Grid cell size in meters (default: bandwidth / 10).
    #[arg(long)]
    cell_size: Option<f64>,
    /// Time window width in seconds (default: 3600).
    #[arg(long)]
    window_secs: Option<i64>,
    /// Significant-peak threshold in [0, 1) (default: 0.10).
    #[arg(long)]
    threshold: Option<f64>,
    /// Region polygon GeoJSON (repeatable); region name is the file stem.
    #[arg(long)]
    region: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coordinate mode of inputs and regions: `degrees` or `meters`.
    #[arg(long)]
    coords: Option<String>,
    /// Horizon start, `YYYY-MM-DDTHH:MM:SS` (derived from data if unset).
    #[arg(long)]
    horizon_start: Option<String>,
    /// Horizon end, exclusive.
    #[arg(long)]
    horizon_end: Option<String>,
    /// Parallel jobs (default: env SURFNET_JOBS, then all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Also export per-window density grids as ESRI ASCII.
    #[arg(long)]
    export_raster: bool,
}

#[derive(Args)]
struct ChartArgs {
    /// Indices CSV produced by `run`.
    #[arg(long)]
    input: PathBuf,
    /// Directory for the two SVG files.
    #[arg(long)]
    out: PathBuf,
}

fn build_config(args: &PipelineArgs, sweep: bool) -> Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_toml_file(path)?,
        None => PipelineConfig::default(),
    };
    if !args.input.is_empty() {
        config.inputs = args.input.clone();
    }
    if let Some(coords) = &args.coords {
        config.coord_mode = parse_coord_mode(coords)?;
    }
    match (sweep, args.bandwidth.as_slice()) {
        (_, []) => {}
        (true, list) => config.sweep_bandwidths_m = list.to_vec(),
        (false, [h]) => config.bandwidth_m = *h,
        (false, _) => {
            return Err(SurfnetError::Config(
                "`run` takes a single --bandwidth; use `sweep` for several".into(),
            ))
        }
    }
    if let Some(v) = args.cell_size {
        config.cell_size_m = Some(v);
    }
    if let Some(v) = args.window_secs {
        config.window_secs = v;
    }
    if let Some(v) = args.threshold {
        config.significance_threshold = v;
    }
    if let Some(v) = &args.out {
        config.out_dir = v.clone();
    }
    if args.jobs.is_some() {
        config.jobs = args.jobs;
    }
    if args.export_raster {
        config.export_raster = true;
    }
    if let Some(horizon) =
        parse_horizon(args.horizon_start.as_deref(), args.horizon_end.as_deref())?
    {
        config.horizon = Some(horizon);
    }
    for path in &args.region {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "region".to_string());
        config.regions.push(load_region_geojson(path, &name)?);
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let config = build_config(&args, false)?;
            let output = run_pipeline(&config)?;
            println!(
                "surfnet run: {} input records ({} rejected rows), {} files",
                output.input_records, output.rejected_rows, output.file_count
            );
            for region in &output.regions {
                let windows = region.window_counts.len();
                let peaks: usize = region.window_counts.iter().map(|w| w.peaks).sum();
                let significant: usize =
                    region.window_counts.iter().map(|w| w.significant_peaks).sum();
                println!(
                    "  region {}: {windows} windows, {peaks} peaks ({significant} significant)",
                    region.name
                );
            }
            println!("manifest: {}", output.manifest_path.display());
        }
        Command::Sweep(args) => {
            let config = build_config(&args, true)?;
            let output = run_sweep(&config)?;
            if output.duplicate_bandwidths_removed > 0 {
                eprintln!(
                    "warning: removed {} duplicate sweep bandwidth(s)",
                    output.duplicate_bandwidths_removed
                );
            }
            println!(
                "surfnet sweep: {} rows across {} runs",
                output.rows.len(),
                output.manifest_paths.len()
            );
            println!("summary: {}", output.summary_path.display());
        }
        Command::Chart(args) => {
            let [complexity, connectivity] = emit_charts(&args.input, &args.out)?;
            println!("charts: {} {}", complexity.display(), connectivity.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("surfnet: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
