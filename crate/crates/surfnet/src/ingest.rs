//! Trajectory ingestion: CSV parsing, loaded-trip OD extraction, region
//! noise filtering, and time-window bucketing.

use std::io::Read;

use chrono::{DateTime, NaiveDateTime, Utc};

use crate::error::{Result, SurfnetError};

/// Mean Earth radius used by the local equirectangular projection.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// One GPS fix as stored in the raw trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub car_id: String,
    pub time: DateTime<Utc>,
    /// Longitude in degrees, or easting in meters for pre-projected input.
    pub lon: f64,
    /// Latitude in degrees, or northing in meters for pre-projected input.
    pub lat: f64,
    pub speed: Option<f64>,
    pub direction: Option<f64>,
    pub is_load: bool,
}

/// Whether raw coordinates are geographic degrees or already projected meters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordMode {
    Degrees,
    Meters,
}

/// Planar projection applied to raw coordinates before any geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Local equirectangular about (lon0, lat0):
    /// x = R cos(lat0) dlon, y = R dlat (radians). Exactly invertible.
    LocalEquirectangular { lon0: f64, lat0: f64 },
    /// Input is already in projected meters; coordinates pass through.
    PreProjected,
}

impl Projection {
    pub fn project(&self, lon: f64, lat: f64) -> (f64, f64) {
        match *self {
            Projection::LocalEquirectangular { lon0, lat0 } => {
                let x = EARTH_RADIUS_M * lat0.to_radians().cos() * (lon - lon0).to_radians();
                let y = EARTH_RADIUS_M * (lat - lat0).to_radians();
                (x, y)
            }
            Projection::PreProjected => (lon, lat),
        }
    }

    pub fn unproject(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            Projection::LocalEquirectangular { lon0, lat0 } => {
                let lon = lon0 + (x / (EARTH_RADIUS_M * lat0.to_radians().cos())).to_degrees();
                let lat = lat0 + (y / EARTH_RADIUS_M).to_degrees();
                (lon, lat)
            }
            Projection::PreProjected => (x, y),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdKind {
    Origin,
    Destination,
}

/// Origin or destination of one loaded trip, in projected meters.
#[derive(Debug, Clone, PartialEq)]
pub struct OdPoint {
    pub car_id: String,
    pub kind: OdKind,
    pub x: f64,
    pub y: f64,
    pub time: DateTime<Utc>,
    /// Sequential per car, starting at 0.
    pub trip_id: u32,
}

/// Named study region bounded by a simple polygon in projected meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub name: String,
    /// Open ring: consecutive vertices, last implicitly joins back to first.
    pub boundary: Vec<(f64, f64)>,
}

/// One half-open time window [start, start + width) and the OD positions
/// falling inside it. Empty windows are kept so the series has no gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct HourBucket {
    pub window_index: usize,
    pub start: DateTime<Utc>,
    pub width_secs: i64,
    pub points: Vec<(f64, f64)>,
}

/// A row that failed validation, with its 1-based line number in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct RowReject {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct ParseReport {
    pub records: Vec<TrajectoryRecord>,
    pub rejects: Vec<RowReject>,
}

const EXPECTED_HEADER: [&str; 7] = ["car_id", "time", "lon", "lat", "speed", "direction", "is_load"];

/// Parse a trajectory CSV stream. Invalid rows are tallied in the report,
/// never silently dropped; a missing or wrong header is fatal.
pub fn parse_trajectory_file<R: Read>(reader: R, mode: CoordMode) -> Result<ParseReport> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let header = csv_reader
        .headers()
        .map_err(|e| SurfnetError::Parse(format!("cannot read CSV header: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != EXPECTED_HEADER {
        return Err(SurfnetError::Parse(format!(
            "bad header: expected `{}`, got `{}`",
            EXPECTED_HEADER.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut report = ParseReport::default();
    for (row_idx, row) in csv_reader.records().enumerate() {
        // Header is line 1.
        let line = row_idx as u64 + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                report.rejects.push(RowReject {
                    line,
                    reason: format!("malformed row: {e}"),
                });
                continue;
            }
        };
        match parse_row(&row, mode) {
            Ok(record) => report.records.push(record),
            Err(reason) => report.rejects.push(RowReject { line, reason }),
        }
    }
    Ok(report)
}

fn parse_row(row: &csv::StringRecord, mode: CoordMode) -> std::result::Result<TrajectoryRecord, String> {
    if row.len() != 7 {
        return Err(format!("expected 7 fields, got {}", row.len()));
    }
    let car_id = row[0].trim();
    if car_id.is_empty() {
        return Err("empty car_id".into());
    }
    let time = NaiveDateTime::parse_from_str(row[1].trim(), "%Y-%m-%dT%H:%M:%S")
        .map_err(|e| format!("bad time `{}`: {e}", &row[1]))?
        .and_utc();
    let lon: f64 = parse_f64(&row[2], "lon")?;
    let lat: f64 = parse_f64(&row[3], "lat")?;
    if mode == CoordMode::Degrees {
        if !(-180.0..=180.0).contains(&lon) {
            return Err(format!("lon {lon} out of [-180, 180]"));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(format!("lat {lat} out of [-90, 90]"));
        }
    }
    let speed = parse_opt_f64(&row[4], "speed")?;
    if let Some(s) = speed {
        if s < 0.0 {
            return Err(format!("negative speed {s}"));
        }
    }
    let direction = parse_opt_f64(&row[5], "direction")?;
    if let Some(d) = direction {
        if !(0.0..360.0).contains(&d) {
            return Err(format!("direction {d} out of [0, 360)"));
        }
    }
    let is_load = match row[6].trim() {
        "0" => false,
        "1" => true,
        other => return Err(format!("is_load must be 0 or 1, got `{other}`")),
    };
    Ok(TrajectoryRecord {
        car_id: car_id.to_string(),
        time,
        lon,
        lat,
        speed,
        direction,
        is_load,
    })
}

fn parse_f64(field: &str, name: &str) -> std::result::Result<f64, String> {
    let value: f64 = field
        .trim()
        .parse()
        .map_err(|e| format!("bad {name} `{field}`: {e}"))?;
    if !value.is_finite() {
        return Err(format!("non-finite {name}"));
    }
    Ok(value)
}

fn parse_opt_f64(field: &str, name: &str) -> std::result::Result<Option<f64>, String> {
    if field.trim().is_empty() {
        return Ok(None);
    }
    parse_f64(field, name).map(Some)
}

#[derive(Debug, Default)]
pub struct OdExtraction {
    pub points: Vec<OdPoint>,
    /// Count of record pairs sharing (car_id, time); kept, ordered by file
    /// position, but worth a warning since devices should not emit them.
    pub duplicate_time_pairs: usize,
}

/// Cut each car's fix sequence into loaded trips and emit their endpoints.
///
/// Records are first stably sorted by (car_id, time) so file order only
/// breaks exact timestamp ties. Every maximal run of `is_load = true`
/// becomes one trip: origin is the run's first record, destination its
/// last. Runs truncated by the start or end of a car's data still count.
pub fn extract_od_points(records: &[TrajectoryRecord], projection: &Projection) -> OdExtraction {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = &records[a];
        let rb = &records[b];
        (ra.car_id.as_str(), ra.time).cmp(&(rb.car_id.as_str(), rb.time))
    });

    let mut extraction = OdExtraction::default();
    let mut i = 0;
    while i < order.len() {
        let car = records[order[i]].car_id.as_str();
        let mut j = i;
        while j < order.len() && records[order[j]].car_id == car {
            if j > i
                && records[order[j]].time == records[order[j - 1]].time
            {
                extraction.duplicate_time_pairs += 1;
            }
            j += 1;
        }

        let mut trip_id: u32 = 0;
        let mut k = i;
        while k < j {
            if !records[order[k]].is_load {
                k += 1;
                continue;
            }
            let run_start = k;
            while k < j && records[order[k]].is_load {
                k += 1;
            }
            let run_end = k - 1;
            for (kind, idx) in [
                (OdKind::Origin, run_start),
                (OdKind::Destination, run_end),
            ] {
                let record = &records[order[idx]];
                let (x, y) = projection.project(record.lon, record.lat);
                extraction.points.push(OdPoint {
                    car_id: record.car_id.clone(),
                    kind,
                    x,
                    y,
                    time: record.time,
                    trip_id,
                });
            }
            trip_id += 1;
        }
        i = j;
    }
    extraction
}

impl RegionSpec {
    /// Reject rings that cannot bound a region: fewer than 3 distinct
    /// vertices, zero area, or self-intersection.
    pub fn validate(&self) -> Result<()> {
        let ring = &self.boundary;
        if ring.len() < 3 {
            return Err(SurfnetError::Config(format!(
                "region `{}`: polygon needs at least 3 vertices, got {}",
                self.name,
                ring.len()
            )));
        }
        for w in ring.windows(2) {
            if w[0] == w[1] {
                return Err(SurfnetError::Config(format!(
                    "region `{}`: repeated consecutive vertex",
                    self.name
                )));
            }
        }
        if ring[0] == ring[ring.len() - 1] {
            return Err(SurfnetError::Config(format!(
                "region `{}`: ring must not repeat the first vertex",
                self.name
            )));
        }
        if self.area().abs() <= 0.0 {
            return Err(SurfnetError::Config(format!(
                "region `{}`: polygon area is zero",
                self.name
            )));
        }
        let n = ring.len();
        for a in 0..n {
            let (p1, p2) = (ring[a], ring[(a + 1) % n]);
            for b in (a + 1)..n {
                // Skip edges sharing a vertex with edge `a`.
                if b == a || (b + 1) % n == a || b == (a + 1) % n {
                    continue;
                }
                let (q1, q2) = (ring[b], ring[(b + 1) % n]);
                if segments_properly_intersect(p1, p2, q1, q2) {
                    return Err(SurfnetError::Config(format!(
                        "region `{}`: polygon self-intersects (edges {a} and {b})",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Signed shoelace area (positive for counter-clockwise rings).
    pub fn area(&self) -> f64 {
        let ring = &self.boundary;
        let n = ring.len();
        let mut twice_area = 0.0;
        for i in 0..n {
            let (x1, y1) = ring[i];
            let (x2, y2) = ring[(i + 1) % n];
            twice_area += x1 * y2 - x2 * y1;
        }
        twice_area / 2.0
    }

    /// Even-odd containment; a point exactly on the boundary counts inside.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let ring = &self.boundary;
        let n = ring.len();
        for i in 0..n {
            if point_on_segment((x, y), ring[i], ring[(i + 1) % n]) {
                return true;
            }
        }
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (xi, yi) = ring[i];
            let (xj, yj) = ring[j];
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn point_on_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> bool {
    if cross(a, b, p) != 0.0 {
        return false;
    }
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_properly_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    // Collinear overlap also breaks simplicity.
    (d1 == 0.0 && point_on_segment(p1, q1, q2))
        || (d2 == 0.0 && point_on_segment(p2, q1, q2))
        || (d3 == 0.0 && point_on_segment(q1, p1, p2))
        || (d4 == 0.0 && point_on_segment(q2, p1, p2))
}

#[derive(Debug, Default)]
pub struct NoiseFilterOutcome {
    pub kept: Vec<OdPoint>,
    pub removed_trips: usize,
}

/// Drop every trip with an endpoint strictly outside the region; trips with
/// both endpoints inside (boundary included) pass through unmodified.
pub fn filter_noise(points: &[OdPoint], region: &RegionSpec) -> Result<NoiseFilterOutcome> {
    region.validate()?;
    let mut outcome = NoiseFilterOutcome::default();
    let mut i = 0;
    while i < points.len() {
        let car = points[i].car_id.as_str();
        let trip = points[i].trip_id;
        let mut j = i;
        while j < points.len() && points[j].car_id == car && points[j].trip_id == trip {
            j += 1;
        }
        let trip_points = &points[i..j];
        if trip_points.iter().all(|p| region.contains(p.x, p.y)) {
            outcome.kept.extend_from_slice(trip_points);
        } else {
            outcome.removed_trips += 1;
        }
        i = j;
    }
    Ok(outcome)
}

#[derive(Debug, Default)]
pub struct BucketOutcome {
    pub buckets: Vec<HourBucket>,
    pub dropped_outside_horizon: usize,
}

/// Assign each OD position to its half-open window within the horizon.
/// Windows with no points are still emitted so the series has no gaps.
pub fn bucket_by_window(
    points: &[OdPoint],
    window_secs: i64,
    horizon: (DateTime<Utc>, DateTime<Utc>),
) -> Result<BucketOutcome> {
    if window_secs <= 0 {
        return Err(SurfnetError::Config(format!(
            "window width must be positive, got {window_secs} s"
        )));
    }
    let (start, end) = horizon;
    if end <= start {
        return Err(SurfnetError::Config("empty horizon".into()));
    }
    let span = end.timestamp() - start.timestamp();
    let window_count = ((span + window_secs - 1) / window_secs) as usize;

    let mut buckets: Vec<HourBucket> = (0..window_count)
        .map(|i| HourBucket {
            window_index: i,
            start: start + chrono::Duration::seconds(window_secs * i as i64),
            width_secs: window_secs,
            points: Vec::new(),
        })
        .collect();

    let mut dropped = 0usize;
    for point in points {
        if point.time < start || point.time >= end {
            dropped += 1;
            continue;
        }
        let idx = ((point.time.timestamp() - start.timestamp()) / window_secs) as usize;
        buckets[idx].points.push((point.x, point.y));
    }
    Ok(BucketOutcome {
        buckets,
        dropped_outside_horizon: dropped,
    })
}
