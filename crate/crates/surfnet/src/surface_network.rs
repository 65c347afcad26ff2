//! Peak-ridgeline surface network assembly.
//!
//! Peaks survive the significance filter when their height stands at least
//! `threshold` above the highest pass they connect to, relative to their own
//! height; the ratio form keeps the decision invariant under positive
//! scaling of the surface. A pass is retained only when both of its
//! ridgelines are complete and end at surviving peaks, so every edge is
//! peak-terminated and the edge count stays even. The component count is
//! computed twice, by union-find and by depth-first search, and the two
//! must agree.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use serde::Serialize;
use serde_json::json;

use crate::critical_lines::{CriticalLine, PassId, Terminus};
use crate::critical_points::CriticalPointSet;
use crate::density::Extent;
use crate::error::{Result, SurfnetError};
use crate::mesh::{TinMesh, VertexId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkPeak {
    pub vertex: VertexId,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Junction metadata: one retained pass and the two peaks it joins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassNode {
    pub pass: PassId,
    pub peaks: (VertexId, VertexId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceNetwork {
    pub peaks: Vec<NetworkPeak>,
    /// Retained ridgelines; two per retained pass.
    pub ridgelines: Vec<CriticalLine>,
    pub pass_nodes: Vec<PassNode>,
    pub components: usize,
    pub total_ridgeline_length_km: f64,
    pub surface_area_km2: f64,
}

impl SurfaceNetwork {
    pub fn v(&self) -> usize {
        self.peaks.len()
    }

    pub fn e(&self) -> usize {
        self.ridgelines.len()
    }

    pub fn p(&self) -> usize {
        self.components
    }
}

/// Peaks + pits - passes (multiplicity counted); 1 for an ideal smooth
/// surface, deviations diagnose discretization effects.
pub fn euler_check(peaks: usize, pits: usize, passes: usize) -> i64 {
    peaks as i64 + pits as i64 - passes as i64
}

/// Significance test for one peak against the highest pass it connects to.
/// Peaks with no connected pass are unconditionally significant;
/// non-positive peak heights with a connected pass never are.
pub fn peak_is_significant(z_peak: f64, highest_pass_z: Option<f64>, threshold: f64) -> bool {
    match highest_pass_z {
        None => true,
        Some(z_pass) => z_peak > 0.0 && (z_peak - z_pass) / z_peak >= threshold,
    }
}

#[derive(Debug, Clone, Default)]
pub struct SignificantPeaks {
    pub peaks: Vec<NetworkPeak>,
    pub removed: usize,
    /// Peaks with non-positive height but a connected pass; removed and
    /// counted separately since they indicate a degenerate surface.
    pub degenerate: usize,
}

/// Keep peaks whose relative prominence over the highest pass connected by
/// a complete ridgeline meets the threshold.
pub fn filter_significant_peaks(
    mesh: &TinMesh,
    set: &CriticalPointSet,
    ridgelines: &[CriticalLine],
    threshold: f64,
) -> Result<SignificantPeaks> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(SurfnetError::Config(format!(
            "significance threshold must be in [0, 1), got {threshold}"
        )));
    }

    let mut highest_pass: HashMap<VertexId, f64> = HashMap::new();
    for line in ridgelines {
        if !line.complete {
            continue;
        }
        if let Terminus::Peak(peak) = line.terminus {
            let pass_z = mesh.z(line.pass.vertex);
            highest_pass
                .entry(peak)
                .and_modify(|z| *z = z.max(pass_z))
                .or_insert(pass_z);
        }
    }

    let mut out = SignificantPeaks::default();
    for &peak in &set.peaks {
        let (x, y, z) = mesh.position(peak);
        let connected = highest_pass.get(&peak).copied();
        if peak_is_significant(z, connected, threshold) {
            out.peaks.push(NetworkPeak { vertex: peak, x, y, z });
        } else if z <= 0.0 && connected.is_some() {
            out.degenerate += 1;
            out.removed += 1;
        } else {
            out.removed += 1;
        }
    }
    Ok(out)
}

/// Assemble the network of significant peaks and retained ridgelines and
/// compute its structural counts v, e, p, L, SA.
pub fn build_surface_network(
    significant_peaks: Vec<NetworkPeak>,
    all_ridgelines: &[CriticalLine],
    extent: &Extent,
) -> Result<SurfaceNetwork> {
    let peak_set: HashSet<VertexId> = significant_peaks.iter().map(|p| p.vertex).collect();

    let mut by_pass: HashMap<PassId, Vec<&CriticalLine>> = HashMap::new();
    for line in all_ridgelines {
        by_pass.entry(line.pass).or_default().push(line);
    }

    let mut pass_ids: Vec<PassId> = by_pass.keys().copied().collect();
    pass_ids.sort();

    let mut ridgelines = Vec::new();
    let mut pass_nodes = Vec::new();
    for pass in pass_ids {
        let lines = &by_pass[&pass];
        if lines.len() != 2 {
            return Err(SurfnetError::Internal(format!(
                "pass {pass} has {} ridgelines, expected 2",
                lines.len()
            )));
        }
        let termini: Vec<Option<VertexId>> = lines
            .iter()
            .map(|l| match l.terminus {
                Terminus::Peak(p) if l.complete => Some(p),
                _ => None,
            })
            .collect();
        let retained = termini
            .iter()
            .all(|t| t.is_some_and(|p| peak_set.contains(&p)));
        if retained {
            ridgelines.extend(lines.iter().map(|&l| l.clone()));
            pass_nodes.push(PassNode {
                pass,
                peaks: (termini[0].unwrap(), termini[1].unwrap()),
            });
        }
    }

    let components = count_components(&significant_peaks, &pass_nodes)?;
    // + 0.0 canonicalizes the -0.0 an empty sum produces.
    let total_ridgeline_length_km = ridgelines.iter().map(|l| l.length_m).sum::<f64>() / 1000.0 + 0.0;

    Ok(SurfaceNetwork {
        peaks: significant_peaks,
        ridgelines,
        pass_nodes,
        components,
        total_ridgeline_length_km,
        surface_area_km2: extent.area_km2(),
    })
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    fn component_count(&mut self) -> usize {
        let n = self.parent.len();
        (0..n).filter(|&i| self.find(i) == i).count()
    }
}

/// Connected components of the peak graph, computed by union-find and
/// cross-checked by depth-first traversal.
fn count_components(peaks: &[NetworkPeak], pass_nodes: &[PassNode]) -> Result<usize> {
    let index_of: HashMap<VertexId, usize> = peaks
        .iter()
        .enumerate()
        .map(|(i, p)| (p.vertex, i))
        .collect();

    let mut uf = UnionFind::new(peaks.len());
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); peaks.len()];
    for node in pass_nodes {
        let (a, b) = node.peaks;
        let (ia, ib) = match (index_of.get(&a), index_of.get(&b)) {
            (Some(&ia), Some(&ib)) => (ia, ib),
            _ => {
                return Err(SurfnetError::Internal(format!(
                    "pass {} joins a peak outside the significant set",
                    node.pass
                )))
            }
        };
        uf.union(ia, ib);
        adjacency[ia].push(ib);
        adjacency[ib].push(ia);
    }
    let by_union_find = uf.component_count();

    let mut seen = vec![false; peaks.len()];
    let mut by_dfs = 0usize;
    for start in 0..peaks.len() {
        if seen[start] {
            continue;
        }
        by_dfs += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
    }

    if by_union_find != by_dfs {
        return Err(SurfnetError::Internal(format!(
            "component count mismatch: union-find {by_union_find}, DFS {by_dfs}"
        )));
    }
    Ok(by_union_find)
}

/// Per-window structural summary attached next to the network GeoJSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowSummary {
    pub window_index: usize,
    pub v: usize,
    pub e: usize,
    pub p: usize,
    #[serde(rename = "L_km")]
    pub l_km: f64,
    #[serde(rename = "SA_km2")]
    pub sa_km2: f64,
    pub euler_check: i64,
}

impl WindowSummary {
    pub fn new(window_index: usize, network: &SurfaceNetwork, euler: i64) -> Self {
        WindowSummary {
            window_index,
            v: network.v(),
            e: network.e(),
            p: network.p(),
            l_km: network.total_ridgeline_length_km,
            sa_km2: network.surface_area_km2,
            euler_check: euler,
        }
    }
}

/// GeoJSON export: peak Points plus retained ridgeline LineStrings.
pub fn write_network_geojson<W: Write>(
    mesh: &TinMesh,
    network: &SurfaceNetwork,
    window_index: usize,
    mut out: W,
) -> std::io::Result<()> {
    let mut features: Vec<serde_json::Value> = network
        .peaks
        .iter()
        .map(|peak| {
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [peak.x, peak.y] },
                "properties": {
                    "role": "peak",
                    "vertex": peak.vertex,
                    "z": peak.z,
                    "window_index": window_index,
                }
            })
        })
        .collect();
    for line in &network.ridgelines {
        let coords: Vec<[f64; 2]> = line
            .path
            .iter()
            .map(|&v| {
                let (x, y, _) = mesh.position(v);
                [x, y]
            })
            .collect();
        features.push(json!({
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": {
                "role": "ridgeline",
                "pass_id": line.pass.to_string(),
                "length_m": line.length_m,
                "window_index": window_index,
            }
        }));
    }
    let collection = json!({ "type": "FeatureCollection", "features": features });
    out.write_all(serde_json::to_string_pretty(&collection).unwrap().as_bytes())?;
    out.write_all(b"\n")
}
