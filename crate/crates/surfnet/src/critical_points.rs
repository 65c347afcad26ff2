//! Classification of interior TIN vertices as peaks, pits, passes or
//! regular points from the cyclic sign pattern of neighbor height
//! differences.
//!
//! Height ties are resolved symbolically: keys compare by z, then x, then y,
//! which induces the same total order as overwriting tied heights with
//! coordinates but leaves the density values intact for the significance
//! filter. Sign changes are counted cyclically (the flip between the last
//! and first ring neighbor counts), so the count is even for every interior
//! vertex; an odd count means a broken ring and aborts.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Result, SurfnetError};
use crate::mesh::{TinMesh, VertexId};

/// Totally ordered height: z first, coordinates break exact ties.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightKey {
    pub z: f64,
    pub x: f64,
    pub y: f64,
}

impl HeightKey {
    pub fn of(mesh: &TinMesh, v: VertexId) -> Self {
        let (x, y, z) = mesh.position(v);
        HeightKey { z, x, y }
    }
}

impl Eq for HeightKey {}

impl PartialOrd for HeightKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeightKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.z
            .total_cmp(&other.z)
            .then(self.x.total_cmp(&other.x))
            .then(self.y.total_cmp(&other.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Sign of neighbor minus center under the total order; never zero for
/// distinct vertices.
pub fn signed_difference(neighbor: &HeightKey, center: &HeightKey) -> Sign {
    if neighbor > center {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Peak,
    Pit,
    Pass,
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub kind: CriticalKind,
    /// Cyclic sign-change count N_s; always even.
    pub sign_changes: u32,
    /// Decomposition count (N_s - 2) / 2, present for passes only.
    pub multiplicity: Option<u32>,
}

/// Classify one interior vertex. Boundary vertices have incomplete rings
/// and are rejected; callers must filter them out.
pub fn classify_vertex(mesh: &TinMesh, v: VertexId) -> Result<Classification> {
    let (ring, boundary) = mesh.neighbor_ring(v)?;
    if boundary {
        return Err(SurfnetError::InvalidInput(format!(
            "vertex {v} is on the mesh boundary and cannot be classified"
        )));
    }
    let center = HeightKey::of(mesh, v);
    let signs: Vec<Sign> = ring
        .iter()
        .map(|&u| signed_difference(&HeightKey::of(mesh, u), &center))
        .collect();

    let mut sign_changes = 0u32;
    for i in 0..signs.len() {
        if signs[i] != signs[(i + 1) % signs.len()] {
            sign_changes += 1;
        }
    }
    if !sign_changes.is_multiple_of(2) {
        return Err(SurfnetError::Internal(format!(
            "odd sign-change count {sign_changes} at vertex {v}; neighbor ring is broken"
        )));
    }

    let classification = match sign_changes {
        0 => {
            if signs.iter().all(|&s| s == Sign::Minus) {
                Classification {
                    kind: CriticalKind::Peak,
                    sign_changes,
                    multiplicity: None,
                }
            } else {
                Classification {
                    kind: CriticalKind::Pit,
                    sign_changes,
                    multiplicity: None,
                }
            }
        }
        2 => Classification {
            kind: CriticalKind::Regular,
            sign_changes,
            multiplicity: None,
        },
        n => Classification {
            kind: CriticalKind::Pass,
            sign_changes,
            multiplicity: Some((n - 2) / 2),
        },
    };
    Ok(classification)
}

/// One decomposed pass. A vertex with multiplicity m yields m records with
/// ordinals 0..m, all sharing the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassRecord {
    pub vertex: VertexId,
    pub ordinal: u32,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriticalPointSet {
    pub peaks: Vec<VertexId>,
    pub pits: Vec<VertexId>,
    pub passes: Vec<PassRecord>,
}

impl CriticalPointSet {
    /// Pass count with decomposition multiplicity.
    pub fn pass_count(&self) -> usize {
        self.passes.len()
    }
}

/// Classify every interior vertex, in ascending vertex-id order. Rows are
/// classified in parallel and merged in order, so the result does not
/// depend on thread count.
pub fn extract_critical_points(mesh: &TinMesh) -> Result<CriticalPointSet> {
    let ncols = mesh.ncols();
    let nrows = mesh.nrows();
    if ncols < 3 || nrows < 3 {
        // No interior vertices.
        return Ok(CriticalPointSet::default());
    }

    let rows: Vec<Result<Vec<(VertexId, Classification)>>> = (1..nrows - 1)
        .into_par_iter()
        .map(|row| {
            let mut found = Vec::new();
            for col in 1..ncols - 1 {
                let v = mesh.vertex_id(col, row);
                let c = classify_vertex(mesh, v)?;
                if c.kind != CriticalKind::Regular {
                    found.push((v, c));
                }
            }
            Ok(found)
        })
        .collect();

    let mut set = CriticalPointSet::default();
    for row in rows {
        for (v, c) in row? {
            match c.kind {
                CriticalKind::Peak => set.peaks.push(v),
                CriticalKind::Pit => set.pits.push(v),
                CriticalKind::Pass => {
                    let multiplicity = c.multiplicity.unwrap_or(1);
                    for ordinal in 0..multiplicity {
                        set.passes.push(PassRecord {
                            vertex: v,
                            ordinal,
                            multiplicity,
                        });
                    }
                }
                CriticalKind::Regular => unreachable!(),
            }
        }
    }
    Ok(set)
}

/// CSV export: `window_index,kind,x,y,z,multiplicity`, one row per peak,
/// pit, and decomposed pass.
pub fn write_critical_points_csv<W: Write>(
    mesh: &TinMesh,
    set: &CriticalPointSet,
    window_index: usize,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "window_index,kind,x,y,z,multiplicity")?;
    for &v in &set.peaks {
        let (x, y, z) = mesh.position(v);
        writeln!(out, "{window_index},peak,{x},{y},{z},1")?;
    }
    for &v in &set.pits {
        let (x, y, z) = mesh.position(v);
        writeln!(out, "{window_index},pit,{x},{y},{z},1")?;
    }
    for pass in &set.passes {
        let (x, y, z) = mesh.position(pass.vertex);
        writeln!(out, "{window_index},pass,{x},{y},{z},{}", pass.multiplicity)?;
    }
    Ok(())
}
