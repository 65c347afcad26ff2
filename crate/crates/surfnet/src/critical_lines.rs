//! Ridgeline and course-line tracing.
//!
//! Every decomposed pass gets four critical neighbors (FCN): the extreme
//! element of each sign run around the pass, windowed with the
//! rotate-and-slide rule for degenerate passes. From the two ascending
//! members a ridgeline walks to the highest neighbor until it reaches a
//! peak; from the two descending members a course-line walks to the lowest
//! neighbor until it reaches a pit. Stepping onto another pass continues
//! from that pass's steepest same-direction FCN member not already on the
//! path; a literal reading of the source procedure would re-select the same
//! neighbor forever, so chaining is the implemented interpretation.
//! Traces that hit the mesh boundary, revisit a vertex, or exhaust a
//! chained pass's members stop incomplete; incompleteness is data, not an
//! error.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde_json::json;

use crate::critical_points::{
    classify_vertex, signed_difference, CriticalKind, CriticalPointSet, HeightKey, Sign,
};
use crate::error::{Result, SurfnetError};
use crate::mesh::{TinMesh, VertexId};

/// Identity of one decomposed pass: host vertex plus decomposition ordinal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PassId {
    pub vertex: VertexId,
    pub ordinal: u32,
}

impl fmt::Display for PassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.vertex, self.ordinal)
    }
}

/// Four critical neighbors of one decomposed pass: two ascending (above the
/// pass) and two descending (below it); all four ids are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassFcn {
    pub pass: PassId,
    pub ascending: [VertexId; 2],
    pub descending: [VertexId; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    Ridgeline,
    Courseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminus {
    Peak(VertexId),
    Pit(VertexId),
    /// Trace stepped onto the mesh frame before reaching an extremum.
    Boundary(VertexId),
    /// Chained onto a pass whose same-direction members were all used.
    PassChain(VertexId),
    /// Defensive cycle guard; cannot fire under strict monotone stepping.
    Revisit(VertexId),
}

impl Terminus {
    pub fn kind_str(&self) -> &'static str {
        match self {
            Terminus::Peak(_) => "peak",
            Terminus::Pit(_) => "pit",
            Terminus::Boundary(_) => "boundary",
            Terminus::PassChain(_) => "pass_chain",
            Terminus::Revisit(_) => "revisit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalLine {
    pub kind: LineKind,
    pub pass: PassId,
    /// Vertex path, pass first.
    pub path: Vec<VertexId>,
    pub terminus: Terminus,
    pub complete: bool,
    /// Planar polyline length in meters.
    pub length_m: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticalLineSet {
    pub ridgelines: Vec<CriticalLine>,
    pub courselines: Vec<CriticalLine>,
}

/// Critical-point lookups plus the FCN assignment of every pass.
#[derive(Debug, Clone, Default)]
pub struct CriticalIndex {
    peaks: HashSet<VertexId>,
    pits: HashSet<VertexId>,
    fcns_by_vertex: HashMap<VertexId, Vec<PassFcn>>,
    /// (vertex, ordinal) in ascending order, for deterministic iteration.
    ordered: Vec<PassFcn>,
}

impl CriticalIndex {
    pub fn build(mesh: &TinMesh, set: &CriticalPointSet) -> Result<Self> {
        let mut index = CriticalIndex {
            peaks: set.peaks.iter().copied().collect(),
            pits: set.pits.iter().copied().collect(),
            ..Default::default()
        };
        let mut seen = HashSet::new();
        for pass in &set.passes {
            if !seen.insert(pass.vertex) {
                continue;
            }
            let fcns = find_four_critical_neighbors(mesh, pass.vertex, pass.multiplicity)?;
            index.ordered.extend(fcns.iter().copied());
            index.fcns_by_vertex.insert(pass.vertex, fcns);
        }
        Ok(index)
    }

    pub fn pass_fcns(&self) -> &[PassFcn] {
        &self.ordered
    }

    pub fn is_peak(&self, v: VertexId) -> bool {
        self.peaks.contains(&v)
    }

    pub fn is_pit(&self, v: VertexId) -> bool {
        self.pits.contains(&v)
    }
}

/// Assign four critical neighbors to each of the `multiplicity` passes
/// decomposed from `vertex`.
///
/// Each sign run around the pass keeps only its extreme element (largest
/// height difference to the pass, ties by the total order). The reduced
/// ring is rotated to start at its lowest member; pass k then takes the
/// four consecutive members starting at position 2k, i.e. the first four,
/// then slide by two per extra pass.
pub fn find_four_critical_neighbors(
    mesh: &TinMesh,
    vertex: VertexId,
    multiplicity: u32,
) -> Result<Vec<PassFcn>> {
    let classification = classify_vertex(mesh, vertex)?;
    if classification.kind != CriticalKind::Pass {
        return Err(SurfnetError::InvalidInput(format!(
            "vertex {vertex} is {:?}, not a pass",
            classification.kind
        )));
    }
    if classification.multiplicity != Some(multiplicity) {
        return Err(SurfnetError::InvalidInput(format!(
            "vertex {vertex} has multiplicity {:?}, caller claimed {multiplicity}",
            classification.multiplicity
        )));
    }

    let (ring, _) = mesh.neighbor_ring(vertex)?;
    let center = HeightKey::of(mesh, vertex);
    let signs: Vec<Sign> = ring
        .iter()
        .map(|&u| signed_difference(&HeightKey::of(mesh, u), &center))
        .collect();
    let n = ring.len();

    // First cyclic run boundary; one exists because a pass has >= 4 flips.
    let start = (0..n)
        .find(|&i| signs[i] != signs[(i + n - 1) % n])
        .expect("pass ring has sign changes");

    // Reduce every run to its extreme element, in cyclic ring order.
    let mut reduced: Vec<(VertexId, Sign)> = Vec::new();
    let mut i = 0;
    while i < n {
        let run_sign = signs[(start + i) % n];
        let mut extreme = ring[(start + i) % n];
        let mut j = i + 1;
        while j < n && signs[(start + j) % n] == run_sign {
            let candidate = ring[(start + j) % n];
            let better = match run_sign {
                Sign::Plus => HeightKey::of(mesh, candidate) > HeightKey::of(mesh, extreme),
                Sign::Minus => HeightKey::of(mesh, candidate) < HeightKey::of(mesh, extreme),
            };
            if better {
                extreme = candidate;
            }
            j += 1;
        }
        reduced.push((extreme, run_sign));
        i = j;
    }

    let expected_runs = (2 * multiplicity + 2) as usize;
    if reduced.len() != expected_runs {
        return Err(SurfnetError::Internal(format!(
            "vertex {vertex}: {} sign runs, expected {expected_runs}",
            reduced.len()
        )));
    }

    // Rotate so the lowest member comes first; it is a descending member,
    // so the rotated ring alternates descending/ascending.
    let lowest = (0..reduced.len())
        .min_by_key(|&i| HeightKey::of(mesh, reduced[i].0))
        .unwrap();
    reduced.rotate_left(lowest);

    let mut fcns = Vec::with_capacity(multiplicity as usize);
    for ordinal in 0..multiplicity {
        let window = &reduced[2 * ordinal as usize..2 * ordinal as usize + 4];
        let mut ascending = Vec::with_capacity(2);
        let mut descending = Vec::with_capacity(2);
        for &(member, sign) in window {
            match sign {
                Sign::Plus => ascending.push(member),
                Sign::Minus => descending.push(member),
            }
        }
        if ascending.len() != 2 || descending.len() != 2 {
            return Err(SurfnetError::Internal(format!(
                "vertex {vertex} ordinal {ordinal}: FCN window not 2 up / 2 down"
            )));
        }
        fcns.push(PassFcn {
            pass: PassId { vertex, ordinal },
            ascending: [ascending[0], ascending[1]],
            descending: [descending[0], descending[1]],
        });
    }
    Ok(fcns)
}

/// Walk from one FCN member of `fcn` to an extremum by repeatedly stepping
/// to the highest (up) or lowest (down) neighbor under the total order.
pub fn trace_line(
    mesh: &TinMesh,
    index: &CriticalIndex,
    fcn: &PassFcn,
    start: VertexId,
    direction: TraceDirection,
) -> CriticalLine {
    let kind = match direction {
        TraceDirection::Up => LineKind::Ridgeline,
        TraceDirection::Down => LineKind::Courseline,
    };
    let mut path = vec![fcn.pass.vertex, start];
    let mut visited: HashSet<VertexId> = path.iter().copied().collect();

    let (terminus, complete) = loop {
        let current = *path.last().unwrap();
        if mesh.is_boundary(current) {
            break (Terminus::Boundary(current), false);
        }
        match direction {
            TraceDirection::Up if index.is_peak(current) => {
                break (Terminus::Peak(current), true);
            }
            TraceDirection::Down if index.is_pit(current) => {
                break (Terminus::Pit(current), true);
            }
            _ => {}
        }

        if let Some(fcns) = index.fcns_by_vertex.get(&current) {
            // Pass-chaining: continue from the steepest same-direction FCN
            // member of the encountered pass that is not already on the path.
            let mut members: Vec<VertexId> = fcns
                .iter()
                .flat_map(|f| match direction {
                    TraceDirection::Up => f.ascending,
                    TraceDirection::Down => f.descending,
                })
                .collect();
            members.sort_by_key(|&m| HeightKey::of(mesh, m));
            members.dedup();
            if direction == TraceDirection::Up {
                members.reverse();
            }
            match members.into_iter().find(|m| !visited.contains(m)) {
                Some(next) => {
                    visited.insert(next);
                    path.push(next);
                    continue;
                }
                None => break (Terminus::PassChain(current), false),
            }
        }

        let (ring, _) = mesh.neighbor_ring(current).expect("vertex exists");
        let next = match direction {
            TraceDirection::Up => *ring.iter().max_by_key(|&&u| HeightKey::of(mesh, u)).unwrap(),
            TraceDirection::Down => *ring.iter().min_by_key(|&&u| HeightKey::of(mesh, u)).unwrap(),
        };
        if !visited.insert(next) {
            break (Terminus::Revisit(next), false);
        }
        path.push(next);
    };

    let length_m = path
        .windows(2)
        .map(|w| {
            let (x1, y1, _) = mesh.position(w[0]);
            let (x2, y2, _) = mesh.position(w[1]);
            ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt()
        })
        .sum();

    CriticalLine {
        kind,
        pass: fcn.pass,
        path,
        terminus,
        complete,
        length_m,
    }
}

/// Trace the two ridgelines and two course-lines of every decomposed pass.
/// Ridgelines start from the higher ascending member first; course-lines
/// from the lower descending member first.
pub fn extract_critical_lines(mesh: &TinMesh, set: &CriticalPointSet) -> Result<CriticalLineSet> {
    let index = CriticalIndex::build(mesh, set)?;
    let per_pass: Vec<(Vec<CriticalLine>, Vec<CriticalLine>)> = index
        .pass_fcns()
        .par_iter()
        .map(|fcn| {
            let mut up = fcn.ascending;
            up.sort_by_key(|&m| HeightKey::of(mesh, m));
            up.reverse();
            let mut down = fcn.descending;
            down.sort_by_key(|&m| HeightKey::of(mesh, m));
            let ridgelines = up
                .iter()
                .map(|&m| trace_line(mesh, &index, fcn, m, TraceDirection::Up))
                .collect();
            let courselines = down
                .iter()
                .map(|&m| trace_line(mesh, &index, fcn, m, TraceDirection::Down))
                .collect();
            (ridgelines, courselines)
        })
        .collect();

    let mut lines = CriticalLineSet::default();
    for (ridgelines, courselines) in per_pass {
        lines.ridgelines.extend(ridgelines);
        lines.courselines.extend(courselines);
    }
    Ok(lines)
}

/// GeoJSON FeatureCollection of all lines as LineStrings.
pub fn write_critical_lines_geojson<W: Write>(
    mesh: &TinMesh,
    lines: &CriticalLineSet,
    window_index: usize,
    mut out: W,
) -> std::io::Result<()> {
    let features: Vec<serde_json::Value> = lines
        .ridgelines
        .iter()
        .chain(lines.courselines.iter())
        .map(|line| {
            let coords: Vec<[f64; 2]> = line
                .path
                .iter()
                .map(|&v| {
                    let (x, y, _) = mesh.position(v);
                    [x, y]
                })
                .collect();
            json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": coords },
                "properties": {
                    "kind": match line.kind {
                        LineKind::Ridgeline => "ridgeline",
                        LineKind::Courseline => "courseline",
                    },
                    "pass_id": line.pass.to_string(),
                    "terminus_kind": line.terminus.kind_str(),
                    "complete": line.complete,
                    "length_m": line.length_m,
                    "window_index": window_index,
                }
            })
        })
        .collect();
    let collection = json!({ "type": "FeatureCollection", "features": features });
    out.write_all(serde_json::to_string_pretty(&collection).unwrap().as_bytes())?;
    out.write_all(b"\n")
}
