//! End-to-end orchestration: ingest, per-region per-window surfaces,
//! networks, indices, and the artifact manifest.
//!
//! Regions are processed independently (their projections are anchored on
//! their own centroids, so adding or removing one region never changes
//! another's outputs). Windows within a region run as parallel jobs; every
//! job is a pure function writing to job-unique paths, and artifacts are
//! merged in window order, so the output bytes do not depend on the
//! parallelism degree. The manifest is written last and lists every file
//! with its content hash; it contains no timestamps or absolute paths, so
//! identical input and configuration produce byte-identical manifests.

use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{PipelineConfig, RegionDefinition};
use crate::critical_lines::{extract_critical_lines, write_critical_lines_geojson};
use crate::critical_points::{extract_critical_points, write_critical_points_csv};
use crate::density::{estimate_density, KdeParams};
use crate::error::{Result, SurfnetError};
use crate::indices::{assemble_time_series, compute_indices, write_time_series_csv, WindowRow};
use crate::ingest::{
    bucket_by_window, extract_od_points, filter_noise, parse_trajectory_file, CoordMode,
    HourBucket, OdPoint, Projection, RegionSpec, TrajectoryRecord,
};
use crate::mesh::triangulate;
use crate::surface_network::{
    build_surface_network, euler_check, filter_significant_peaks, write_network_geojson,
    WindowSummary,
};

#[derive(Debug, Clone, Serialize)]
pub struct ManifestFile {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
struct ManifestParameters {
    coords: &'static str,
    bandwidth_m: f64,
    cell_size_m: f64,
    window_secs: i64,
    significance_threshold: f64,
    export_raster: bool,
}

#[derive(Debug, Clone, Serialize)]
struct RegionManifest {
    name: String,
    window_count: usize,
    horizon: Option<[String; 2]>,
    extent: [f64; 4],
    od_points: usize,
    trips_removed: usize,
    od_points_outside_horizon: usize,
    duplicate_time_pairs: usize,
}

#[derive(Debug, Clone, Serialize)]
struct InputStats {
    records: usize,
    rejected_rows: usize,
}

#[derive(Debug, Clone, Serialize)]
struct Manifest {
    parameters: ManifestParameters,
    input: InputStats,
    regions: Vec<RegionManifest>,
    files: Vec<ManifestFile>,
}

/// Per-window counts carried for sweep tables and CLI reporting.
#[derive(Debug, Clone, Copy)]
pub struct WindowCounts {
    pub window_index: usize,
    pub peaks: usize,
    pub pits: usize,
    pub passes: usize,
    pub significant_peaks: usize,
    pub v: usize,
    pub e: usize,
    pub mu: i64,
}

#[derive(Debug, Clone)]
pub struct RegionOutcome {
    pub name: String,
    pub window_counts: Vec<WindowCounts>,
    pub rows: Vec<WindowRow>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub out_dir: PathBuf,
    pub manifest_path: PathBuf,
    pub file_count: usize,
    pub input_records: usize,
    pub rejected_rows: usize,
    pub regions: Vec<RegionOutcome>,
}

/// Run the full pipeline for one configuration.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunOutput> {
    config.validate()?;
    let pool = thread_pool(config.jobs)?;
    let (records, rejected_rows) = read_inputs(config)?;

    let mut files: Vec<ManifestFile> = Vec::new();
    let mut region_manifests = Vec::new();
    let mut outcomes = Vec::new();
    for region in &config.regions {
        let produced = pool.install(|| process_region(config, region, &records))?;
        for (rel_path, bytes) in produced.files {
            files.push(write_artifact(&config.out_dir, &rel_path, &bytes)?);
        }
        region_manifests.push(produced.manifest);
        outcomes.push(produced.outcome);
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        parameters: ManifestParameters {
            coords: match config.coord_mode {
                CoordMode::Degrees => "degrees",
                CoordMode::Meters => "meters",
            },
            bandwidth_m: config.bandwidth_m,
            cell_size_m: config.resolved_cell_size(),
            window_secs: config.window_secs,
            significance_threshold: config.significance_threshold,
            export_raster: config.export_raster,
        },
        input: InputStats {
            records: records.len(),
            rejected_rows,
        },
        regions: region_manifests,
        files,
    };
    let manifest_path = config.out_dir.join("manifest.json");
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| SurfnetError::Internal(format!("manifest serialization: {e}")))?;
    manifest_bytes.push(b'\n');
    std::fs::write(&manifest_path, &manifest_bytes)
        .map_err(|e| SurfnetError::io(&manifest_path, e))?;

    Ok(RunOutput {
        out_dir: config.out_dir.clone(),
        manifest_path,
        file_count: manifest.files.len(),
        input_records: records.len(),
        rejected_rows,
        regions: outcomes,
    })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub bandwidth_m: f64,
    pub region: String,
    pub window_index: usize,
    pub peaks: usize,
    pub passes: usize,
    pub significant_peaks: usize,
    pub v: usize,
    pub e: usize,
    pub mu: i64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub summary_path: PathBuf,
    pub rows: Vec<SweepRow>,
    pub duplicate_bandwidths_removed: usize,
    pub manifest_paths: Vec<PathBuf>,
}

/// Run the pipeline once per sweep bandwidth and tabulate per-window
/// structure counts for comparison. Each run defaults its cell size to
/// bandwidth / 10 so grid resolution tracks the kernel.
pub fn run_sweep(config: &PipelineConfig) -> Result<SweepOutput> {
    if config.sweep_bandwidths_m.is_empty() {
        return Err(SurfnetError::Config(
            "sweep requires at least one bandwidth (sweep_bandwidths_m or --bandwidth)".into(),
        ));
    }
    let mut bandwidths: Vec<f64> = Vec::new();
    for &h in &config.sweep_bandwidths_m {
        if !bandwidths.contains(&h) {
            bandwidths.push(h);
        }
    }
    let duplicate_bandwidths_removed = config.sweep_bandwidths_m.len() - bandwidths.len();

    let mut rows = Vec::new();
    let mut manifest_paths = Vec::new();
    for &h in &bandwidths {
        let mut sub = config.clone();
        sub.bandwidth_m = h;
        sub.cell_size_m = None;
        sub.sweep_bandwidths_m = Vec::new();
        sub.out_dir = config.out_dir.join(format!("sweep_h{}", format_bandwidth(h)));
        let output = run_pipeline(&sub)?;
        manifest_paths.push(output.manifest_path);
        for region in &output.regions {
            for counts in &region.window_counts {
                rows.push(SweepRow {
                    bandwidth_m: h,
                    region: region.name.clone(),
                    window_index: counts.window_index,
                    peaks: counts.peaks,
                    passes: counts.passes,
                    significant_peaks: counts.significant_peaks,
                    v: counts.v,
                    e: counts.e,
                    mu: counts.mu,
                });
            }
        }
    }

    let mut csv = String::from(
        "bandwidth_m,region,window_index,peaks,passes,significant_peaks,v,e,mu\n",
    );
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.bandwidth_m,
            row.region,
            row.window_index,
            row.peaks,
            row.passes,
            row.significant_peaks,
            row.v,
            row.e,
            row.mu
        ));
    }
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| SurfnetError::io(&config.out_dir, e))?;
    let summary_path = config.out_dir.join("sweep_summary.csv");
    std::fs::write(&summary_path, csv.as_bytes()).map_err(|e| SurfnetError::io(&summary_path, e))?;

    Ok(SweepOutput {
        summary_path,
        rows,
        duplicate_bandwidths_removed,
        manifest_paths,
    })
}

fn format_bandwidth(h: f64) -> String {
    if h.fract() == 0.0 {
        format!("{}", h as i64)
    } else {
        format!("{h}")
    }
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let jobs = jobs.or_else(|| {
        std::env::var("SURFNET_JOBS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n > 0 {
            builder = builder.num_threads(n);
        }
    }
    builder
        .build()
        .map_err(|e| SurfnetError::Internal(format!("thread pool: {e}")))
}

fn read_inputs(config: &PipelineConfig) -> Result<(Vec<TrajectoryRecord>, usize)> {
    let mut records = Vec::new();
    let mut rejected = 0usize;
    for path in &config.inputs {
        let file = std::fs::File::open(path).map_err(|e| SurfnetError::io(path, e))?;
        let report = parse_trajectory_file(std::io::BufReader::new(file), config.coord_mode)?;
        rejected += report.rejects.len();
        records.extend(report.records);
    }
    Ok((records, rejected))
}

struct RegionProduct {
    files: Vec<(String, Vec<u8>)>,
    manifest: RegionManifest,
    outcome: RegionOutcome,
}

fn process_region(
    config: &PipelineConfig,
    region_def: &RegionDefinition,
    records: &[TrajectoryRecord],
) -> Result<RegionProduct> {
    let projection = region_projection(config.coord_mode, region_def);
    let region = RegionSpec {
        name: region_def.name.clone(),
        boundary: region_def
            .ring
            .iter()
            .map(|&(x, y)| projection.project(x, y))
            .collect(),
    };
    region.validate()?;

    let od = extract_od_points(records, &projection);
    let filtered = filter_noise(&od.points, &region)?;

    let horizon = config
        .horizon
        .or_else(|| derive_horizon(&filtered.kept, config.window_secs));
    let (buckets, dropped) = match horizon {
        Some(horizon) => {
            let out = bucket_by_window(&filtered.kept, config.window_secs, horizon)?;
            (out.buckets, out.dropped_outside_horizon)
        }
        None => (Vec::new(), 0),
    };

    let cell = config.resolved_cell_size();
    let points_xy: Vec<(f64, f64)> = filtered.kept.iter().map(|p| (p.x, p.y)).collect();
    let params = KdeParams::for_points(&points_xy, config.bandwidth_m, cell)?;

    let dir = sanitize_name(&region_def.name);
    let window_products: Vec<Result<WindowProduct>> = buckets
        .par_iter()
        .map(|bucket| process_window(bucket, &params, config, &dir))
        .collect();

    let mut files = Vec::new();
    let mut rows = Vec::new();
    let mut window_counts = Vec::new();
    for product in window_products {
        let product = product?;
        files.extend(product.files);
        rows.push(product.row);
        window_counts.push(product.counts);
    }

    let rows = assemble_time_series(rows)?;
    let mut indices_csv = Vec::new();
    write_time_series_csv(&rows, &mut indices_csv)
        .map_err(|e| SurfnetError::Internal(format!("indices csv: {e}")))?;
    files.push((format!("{dir}/indices.csv"), indices_csv));

    let manifest = RegionManifest {
        name: region_def.name.clone(),
        window_count: rows.len(),
        horizon: horizon.map(|(s, e)| {
            [
                s.format("%Y-%m-%dT%H:%M:%S").to_string(),
                e.format("%Y-%m-%dT%H:%M:%S").to_string(),
            ]
        }),
        extent: [
            params.extent.min_x,
            params.extent.min_y,
            params.extent.max_x,
            params.extent.max_y,
        ],
        od_points: filtered.kept.len(),
        trips_removed: filtered.removed_trips,
        od_points_outside_horizon: dropped,
        duplicate_time_pairs: od.duplicate_time_pairs,
    };

    Ok(RegionProduct {
        files,
        manifest,
        outcome: RegionOutcome {
            name: region_def.name.clone(),
            window_counts,
            rows,
        },
    })
}

fn region_projection(mode: CoordMode, region: &RegionDefinition) -> Projection {
    match mode {
        CoordMode::Meters => Projection::PreProjected,
        CoordMode::Degrees => {
            let (lon0, lat0) = ring_centroid(&region.ring);
            Projection::LocalEquirectangular { lon0, lat0 }
        }
    }
}

/// Area centroid of a simple ring (shoelace); falls back to the vertex mean
/// for degenerate rings.
fn ring_centroid(ring: &[(f64, f64)]) -> (f64, f64) {
    let n = ring.len();
    let mut twice_area = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let (x1, y1) = ring[i];
        let (x2, y2) = ring[(i + 1) % n];
        let w = x1 * y2 - x2 * y1;
        twice_area += w;
        cx += (x1 + x2) * w;
        cy += (y1 + y2) * w;
    }
    if twice_area.abs() < 1e-12 {
        let count = n.max(1) as f64;
        return (
            ring.iter().map(|p| p.0).sum::<f64>() / count,
            ring.iter().map(|p| p.1).sum::<f64>() / count,
        );
    }
    (cx / (3.0 * twice_area), cy / (3.0 * twice_area))
}

/// Whole-window horizon covering all point times, aligned to the epoch.
fn derive_horizon(points: &[OdPoint], window_secs: i64) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
    let min = points.iter().map(|p| p.time.timestamp()).min()?;
    let max = points.iter().map(|p| p.time.timestamp()).max()?;
    let start = min.div_euclid(window_secs) * window_secs;
    let end = (max.div_euclid(window_secs) + 1) * window_secs;
    Some((
        DateTime::from_timestamp(start, 0)?,
        DateTime::from_timestamp(end, 0)?,
    ))
}

fn sanitize_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

struct WindowProduct {
    files: Vec<(String, Vec<u8>)>,
    row: WindowRow,
    counts: WindowCounts,
}

fn process_window(
    bucket: &HourBucket,
    params: &KdeParams,
    config: &PipelineConfig,
    region_dir: &str,
) -> Result<WindowProduct> {
    let idx = bucket.window_index;
    let grid = estimate_density(&bucket.points, params)?;
    let mesh = triangulate(&grid)?;
    let set = extract_critical_points(&mesh)?;
    let lines = extract_critical_lines(&mesh, &set)?;
    let significant =
        filter_significant_peaks(&mesh, &set, &lines.ridgelines, config.significance_threshold)?;
    let significant_count = significant.peaks.len();
    let network = build_surface_network(significant.peaks, &lines.ridgelines, &params.extent)?;
    let euler = euler_check(set.peaks.len(), set.pits.len(), set.pass_count());
    let graph_indices = compute_indices(&network)?;

    let io_err = |e: std::io::Error| SurfnetError::Internal(format!("artifact encoding: {e}"));

    let mut files = Vec::new();
    let base = format!("{region_dir}/w{idx:04}");

    let mut csv = Vec::new();
    write_critical_points_csv(&mesh, &set, idx, &mut csv).map_err(io_err)?;
    files.push((format!("{base}/critical_points.csv"), csv));

    let mut lines_geojson = Vec::new();
    write_critical_lines_geojson(&mesh, &lines, idx, &mut lines_geojson).map_err(io_err)?;
    files.push((format!("{base}/critical_lines.geojson"), lines_geojson));

    let mut network_geojson = Vec::new();
    write_network_geojson(&mesh, &network, idx, &mut network_geojson).map_err(io_err)?;
    files.push((format!("{base}/network.geojson"), network_geojson));

    let summary = WindowSummary::new(idx, &network, euler);
    let mut summary_bytes = serde_json::to_vec_pretty(&summary)
        .map_err(|e| SurfnetError::Internal(format!("summary serialization: {e}")))?;
    summary_bytes.push(b'\n');
    files.push((format!("{base}/summary.json"), summary_bytes));

    if config.export_raster {
        let mut asc = Vec::new();
        grid.write_esri_ascii(&mut asc).map_err(io_err)?;
        files.push((format!("{base}/density.asc"), asc));
    }

    Ok(WindowProduct {
        files,
        row: WindowRow {
            window_index: idx,
            indices: graph_indices,
            euler_check: euler,
        },
        counts: WindowCounts {
            window_index: idx,
            peaks: set.peaks.len(),
            pits: set.pits.len(),
            passes: set.pass_count(),
            significant_peaks: significant_count,
            v: network.v(),
            e: network.e(),
            mu: graph_indices.mu,
        },
    })
}

fn write_artifact(out_dir: &Path, rel_path: &str, bytes: &[u8]) -> Result<ManifestFile> {
    let path = out_dir.join(rel_path);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| SurfnetError::io(parent, e))?;
    }
    std::fs::write(&path, bytes).map_err(|e| SurfnetError::io(&path, e))?;
    let digest = Sha256::digest(bytes);
    let sha256 = digest.iter().fold(String::with_capacity(64), |mut s, b| {
        s.push_str(&format!("{b:02x}"));
        s
    });
    Ok(ManifestFile {
        path: rel_path.to_string(),
        bytes: bytes.len(),
        sha256,
    })
}
