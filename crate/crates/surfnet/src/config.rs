//! Pipeline configuration: a declarative TOML file whose keys the CLI flags
//! mirror one-to-one, plus GeoJSON region loading.

use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::Deserialize;

use crate::error::{Result, SurfnetError};
use crate::ingest::CoordMode;

pub const DEFAULT_BANDWIDTH_M: f64 = 600.0;
pub const DEFAULT_WINDOW_SECS: i64 = 3600;
pub const DEFAULT_SIGNIFICANCE_THRESHOLD: f64 = 0.10;

/// One study region as read from configuration: name plus the exterior
/// ring in raw input coordinates (degrees or meters, per the coords mode).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDefinition {
    pub name: String,
    pub ring: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub coord_mode: CoordMode,
    pub regions: Vec<RegionDefinition>,
    pub bandwidth_m: f64,
    /// Defaults to bandwidth / 10 when unset.
    pub cell_size_m: Option<f64>,
    pub window_secs: i64,
    /// When unset the horizon is derived from the data, aligned to whole
    /// windows relative to the epoch.
    pub horizon: Option<(DateTime<Utc>, DateTime<Utc>)>,
    pub significance_threshold: f64,
    pub export_raster: bool,
    pub jobs: Option<usize>,
    pub sweep_bandwidths_m: Vec<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            inputs: Vec::new(),
            out_dir: PathBuf::from("out"),
            coord_mode: CoordMode::Degrees,
            regions: Vec::new(),
            bandwidth_m: DEFAULT_BANDWIDTH_M,
            cell_size_m: None,
            window_secs: DEFAULT_WINDOW_SECS,
            horizon: None,
            significance_threshold: DEFAULT_SIGNIFICANCE_THRESHOLD,
            export_raster: false,
            jobs: None,
            sweep_bandwidths_m: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn resolved_cell_size(&self) -> f64 {
        self.cell_size_m.unwrap_or(self.bandwidth_m / 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inputs.is_empty() {
            return Err(SurfnetError::Config("no input files given".into()));
        }
        if self.regions.is_empty() {
            return Err(SurfnetError::Config("no regions given".into()));
        }
        if !(self.bandwidth_m.is_finite() && self.bandwidth_m > 0.0) {
            return Err(SurfnetError::Config(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_m
            )));
        }
        let cell = self.resolved_cell_size();
        if !(cell.is_finite() && cell > 0.0) {
            return Err(SurfnetError::Config(format!(
                "cell size must be positive, got {cell}"
            )));
        }
        if cell > self.bandwidth_m {
            return Err(SurfnetError::Config(format!(
                "cell size {cell} exceeds bandwidth {}",
                self.bandwidth_m
            )));
        }
        if self.window_secs <= 0 {
            return Err(SurfnetError::Config(format!(
                "window width must be positive, got {} s",
                self.window_secs
            )));
        }
        if !(0.0..1.0).contains(&self.significance_threshold) {
            return Err(SurfnetError::Config(format!(
                "significance threshold must be in [0, 1), got {}",
                self.significance_threshold
            )));
        }
        if let Some((start, end)) = self.horizon {
            if end <= start {
                return Err(SurfnetError::Config("horizon end must be after start".into()));
            }
        }
        if let Some(h) = self
            .sweep_bandwidths_m
            .iter()
            .find(|h| !(h.is_finite() && **h > 0.0))
        {
            return Err(SurfnetError::Config(format!(
                "sweep bandwidth must be positive, got {h}"
            )));
        }
        let mut names: Vec<&str> = self.regions.iter().map(|r| r.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.regions.len() {
            return Err(SurfnetError::Config("duplicate region names".into()));
        }
        Ok(())
    }

    /// Load from a TOML file; relative paths resolve against the file's
    /// directory.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SurfnetError::io(path, e))?;
        let raw: RawConfig = toml::from_str(&text)
            .map_err(|e| SurfnetError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));

        let mut config = PipelineConfig {
            inputs: raw.input.iter().map(|p| base.join(p)).collect(),
            ..PipelineConfig::default()
        };
        if let Some(out_dir) = raw.out_dir {
            config.out_dir = base.join(out_dir);
        }
        if let Some(coords) = raw.coords {
            config.coord_mode = parse_coord_mode(&coords)?;
        }
        if let Some(v) = raw.bandwidth_m {
            config.bandwidth_m = v;
        }
        config.cell_size_m = raw.cell_size_m;
        if let Some(v) = raw.window_secs {
            config.window_secs = v;
        }
        config.horizon = parse_horizon(raw.horizon_start.as_deref(), raw.horizon_end.as_deref())?;
        if let Some(v) = raw.significance_threshold {
            config.significance_threshold = v;
        }
        if let Some(v) = raw.export_raster {
            config.export_raster = v;
        }
        config.jobs = raw.jobs;
        config.sweep_bandwidths_m = raw.sweep_bandwidths_m.unwrap_or_default();
        for region in raw.region {
            config
                .regions
                .push(load_region_geojson(&base.join(&region.geojson), &region.name)?);
        }
        Ok(config)
    }
}

pub fn parse_coord_mode(s: &str) -> Result<CoordMode> {
    match s {
        "degrees" => Ok(CoordMode::Degrees),
        "meters" => Ok(CoordMode::Meters),
        other => Err(SurfnetError::Config(format!(
            "coords must be `degrees` or `meters`, got `{other}`"
        ))),
    }
}

pub fn parse_horizon(
    start: Option<&str>,
    end: Option<&str>,
) -> Result<Option<(DateTime<Utc>, DateTime<Utc>)>> {
    match (start, end) {
        (None, None) => Ok(None),
        (Some(s), Some(e)) => Ok(Some((parse_time(s)?, parse_time(e)?))),
        _ => Err(SurfnetError::Config(
            "horizon_start and horizon_end must be given together".into(),
        )),
    }
}

fn parse_time(s: &str) -> Result<DateTime<Utc>> {
    NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
        .map(|t| t.and_utc())
        .map_err(|e| SurfnetError::Config(format!("bad timestamp `{s}`: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    input: Vec<String>,
    out_dir: Option<String>,
    coords: Option<String>,
    bandwidth_m: Option<f64>,
    cell_size_m: Option<f64>,
    window_secs: Option<i64>,
    horizon_start: Option<String>,
    horizon_end: Option<String>,
    significance_threshold: Option<f64>,
    export_raster: Option<bool>,
    jobs: Option<usize>,
    sweep_bandwidths_m: Option<Vec<f64>>,
    #[serde(default)]
    region: Vec<RawRegion>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    name: String,
    geojson: String,
}

/// Read the exterior ring of the first Polygon in a GeoJSON file. Accepts a
/// bare Polygon, a Feature, or a FeatureCollection; holes are rejected.
pub fn load_region_geojson(path: &Path, name: &str) -> Result<RegionDefinition> {
    let text = std::fs::read_to_string(path).map_err(|e| SurfnetError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| SurfnetError::Config(format!("{}: invalid JSON: {e}", path.display())))?;
    let geometry = find_polygon(&value).ok_or_else(|| {
        SurfnetError::Config(format!("{}: no Polygon geometry found", path.display()))
    })?;
    let rings = geometry["coordinates"].as_array().ok_or_else(|| {
        SurfnetError::Config(format!("{}: Polygon has no coordinates", path.display()))
    })?;
    if rings.len() != 1 {
        return Err(SurfnetError::Config(format!(
            "{}: polygons with holes are not supported ({} rings)",
            path.display(),
            rings.len()
        )));
    }
    let raw_ring = rings[0]
        .as_array()
        .ok_or_else(|| SurfnetError::Config(format!("{}: malformed ring", path.display())))?;
    let mut ring = Vec::with_capacity(raw_ring.len());
    for position in raw_ring {
        let coords = position.as_array();
        let x = coords.and_then(|c| c.first()).and_then(|v| v.as_f64());
        let y = coords.and_then(|c| c.get(1)).and_then(|v| v.as_f64());
        match (x, y) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => ring.push((x, y)),
            _ => {
                return Err(SurfnetError::Config(format!(
                    "{}: malformed ring position {position}",
                    path.display()
                )))
            }
        }
    }
    // GeoJSON rings repeat the first position at the end; our rings do not.
    if ring.len() >= 2 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 {
        return Err(SurfnetError::Config(format!(
            "{}: ring has fewer than 3 distinct vertices",
            path.display()
        )));
    }
    Ok(RegionDefinition {
        name: name.to_string(),
        ring,
    })
}

fn find_polygon(value: &serde_json::Value) -> Option<&serde_json::Value> {
    match value["type"].as_str()? {
        "Polygon" => Some(value),
        "Feature" => find_polygon(&value["geometry"]),
        "FeatureCollection" => value["features"].as_array()?.iter().find_map(find_polygon),
        _ => None,
    }
}
