//! Triangulation of a density grid into a lattice TIN.
//!
//! Each unit cell is split by its lower-left to upper-right diagonal. On a
//! square lattice Delaunay is degenerate (every quad is cocircular), so the
//! fixed "/" diagonal is a valid Delaunay triangulation with ties broken the
//! same way everywhere. It gives every interior vertex exactly six
//! neighbors. Note the diagonal choice can flip the classification of
//! near-degenerate saddles; it is fixed here so results are reproducible.

use std::io::Write;

use crate::density::DensityGrid;
use crate::error::{Result, SurfnetError};

pub type VertexId = u32;

/// Ring neighbor offsets in counter-clockwise order starting from East,
/// i.e. from the neighbor with the smallest positive angle from +x.
const RING_OFFSETS: [(i64, i64); 6] = [(1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1)];

/// Triangulated lattice surface. Vertex (col, row) sits at the grid cell
/// center with z equal to the density value; vertex ids are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TinMesh {
    ncols: usize,
    nrows: usize,
    cell_size_m: f64,
    origin: (f64, f64),
    z: Vec<f64>,
    ring_offsets: Vec<u32>,
    ring_data: Vec<VertexId>,
}

/// Build the fixed-diagonal TIN over a grid of at least 2x2 cells.
pub fn triangulate(grid: &DensityGrid) -> Result<TinMesh> {
    if grid.ncols < 2 || grid.nrows < 2 {
        return Err(SurfnetError::InvalidInput(format!(
            "grid must be at least 2x2 to triangulate, got {}x{}",
            grid.ncols, grid.nrows
        )));
    }
    if grid.values.len() != grid.ncols * grid.nrows {
        return Err(SurfnetError::Internal(format!(
            "grid value count {} does not match {}x{}",
            grid.values.len(),
            grid.ncols,
            grid.nrows
        )));
    }
    if let Some(bad) = grid.values.iter().find(|v| !v.is_finite()) {
        return Err(SurfnetError::Internal(format!(
            "non-finite grid value {bad}"
        )));
    }

    let ncols = grid.ncols;
    let nrows = grid.nrows;
    let vertex_count = ncols * nrows;
    let mut ring_offsets = Vec::with_capacity(vertex_count + 1);
    let mut ring_data = Vec::with_capacity(vertex_count * 6);
    ring_offsets.push(0u32);
    for row in 0..nrows as i64 {
        for col in 0..ncols as i64 {
            for (dc, dr) in RING_OFFSETS {
                let (nc, nr) = (col + dc, row + dr);
                if nc >= 0 && nc < ncols as i64 && nr >= 0 && nr < nrows as i64 {
                    ring_data.push((nr as usize * ncols + nc as usize) as VertexId);
                }
            }
            ring_offsets.push(ring_data.len() as u32);
        }
    }

    Ok(TinMesh {
        ncols,
        nrows,
        cell_size_m: grid.cell_size_m,
        origin: grid.origin,
        z: grid.values.clone(),
        ring_offsets,
        ring_data,
    })
}

impl TinMesh {
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn vertex_count(&self) -> usize {
        self.ncols * self.nrows
    }

    pub fn triangle_count(&self) -> usize {
        2 * (self.ncols - 1) * (self.nrows - 1)
    }

    pub fn vertex_id(&self, col: usize, row: usize) -> VertexId {
        debug_assert!(col < self.ncols && row < self.nrows);
        (row * self.ncols + col) as VertexId
    }

    pub fn col_row(&self, v: VertexId) -> (usize, usize) {
        let v = v as usize;
        (v % self.ncols, v / self.ncols)
    }

    pub fn z(&self, v: VertexId) -> f64 {
        self.z[v as usize]
    }

    pub fn position(&self, v: VertexId) -> (f64, f64, f64) {
        let (col, row) = self.col_row(v);
        (
            self.origin.0 + (col as f64 + 0.5) * self.cell_size_m,
            self.origin.1 + (row as f64 + 0.5) * self.cell_size_m,
            self.z[v as usize],
        )
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        let (col, row) = self.col_row(v);
        col == 0 || row == 0 || col == self.ncols - 1 || row == self.nrows - 1
    }

    /// Ordered neighbor ring: CCW starting from the East neighbor. Interior
    /// vertices get a closed 6-cycle, boundary vertices an open chain.
    pub fn neighbor_ring(&self, v: VertexId) -> Result<(&[VertexId], bool)> {
        if (v as usize) >= self.vertex_count() {
            return Err(SurfnetError::InvalidInput(format!(
                "unknown vertex id {v} (mesh has {} vertices)",
                self.vertex_count()
            )));
        }
        let start = self.ring_offsets[v as usize] as usize;
        let end = self.ring_offsets[v as usize + 1] as usize;
        Ok((&self.ring_data[start..end], self.is_boundary(v)))
    }

    /// All triangles as CCW vertex triples, cell by cell.
    pub fn triangles(&self) -> impl Iterator<Item = [VertexId; 3]> + '_ {
        (0..self.nrows - 1).flat_map(move |row| {
            (0..self.ncols - 1).flat_map(move |col| {
                let ll = self.vertex_id(col, row);
                let lr = self.vertex_id(col + 1, row);
                let ur = self.vertex_id(col + 1, row + 1);
                let ul = self.vertex_id(col, row + 1);
                [[ll, lr, ur], [ll, ur, ul]]
            })
        })
    }

    /// V - E + F over unique edges and triangle faces; 1 for a disk.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for tri in self.triangles() {
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertex_count() as i64 - edges.len() as i64 + self.triangle_count() as i64
    }

    /// OBJ-style debug dump: `v x y z` then 1-based `f i j k`.
    pub fn write_obj<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in 0..self.vertex_count() as VertexId {
            let (x, y, z) = self.position(v);
            writeln!(out, "v {x} {y} {z}")?;
        }
        for tri in self.triangles() {
            writeln!(out, "f {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(ncols: usize, nrows: usize, values: Vec<f64>) -> DensityGrid {
        DensityGrid {
            ncols,
            nrows,
            cell_size_m: 1.0,
            origin: (0.0, 0.0),
            values,
        }
    }

    #[test]
    fn two_by_two_has_four_vertices_two_triangles() {
        let mesh = triangulate(&grid(2, 2, vec![0.0; 4])).unwrap();
        assert_eq!(mesh.vertex_count(), 4);
        assert_eq!(mesh.triangle_count(), 2);
        let tris: Vec<_> = mesh.triangles().collect();
        assert_eq!(tris, vec![[0, 1, 3], [0, 3, 2]]);
    }

    #[test]
    fn interior_ring_is_east_ne_north_west_sw_south() {
        let mesh = triangulate(&grid(3, 3, vec![0.0; 9])).unwrap();
        let (ring, boundary) = mesh.neighbor_ring(4).unwrap();
        assert!(!boundary);
        assert_eq!(ring, &[5, 8, 7, 3, 0, 1]);
    }

    #[test]
    fn diagonal_end_corner_has_three_neighbors() {
        let mesh = triangulate(&grid(3, 3, vec![0.0; 9])).unwrap();
        let (ring, boundary) = mesh.neighbor_ring(0).unwrap();
        assert!(boundary);
        assert_eq!(ring, &[1, 4, 3]);
        // The corner away from the diagonal only touches two neighbors.
        let (ring, boundary) = mesh.neighbor_ring(2).unwrap();
        assert!(boundary);
        assert_eq!(ring, &[5, 1]);
    }

    #[test]
    fn ring_queries_are_deterministic() {
        let mesh = triangulate(&grid(3, 3, vec![0.0; 9])).unwrap();
        assert_eq!(mesh.neighbor_ring(4).unwrap(), mesh.neighbor_ring(4).unwrap());
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let mesh = triangulate(&grid(2, 2, vec![0.0; 4])).unwrap();
        assert!(mesh.neighbor_ring(99).is_err());
    }

    #[test]
    fn too_small_grid_is_fatal() {
        assert!(triangulate(&grid(1, 2, vec![0.0; 2])).is_err());
    }

    #[test]
    fn euler_characteristic_is_one() {
        for (nc, nr) in [(2, 2), (3, 3), (5, 4), (7, 11)] {
            let mesh = triangulate(&grid(nc, nr, vec![0.0; nc * nr])).unwrap();
            assert_eq!(mesh.euler_characteristic(), 1, "{nc}x{nr}");
        }
    }

    #[test]
    fn rings_are_symmetric() {
        let mesh = triangulate(&grid(5, 4, vec![0.0; 20])).unwrap();
        for v in 0..mesh.vertex_count() as VertexId {
            let (ring, _) = mesh.neighbor_ring(v).unwrap();
            for &u in ring {
                let (back, _) = mesh.neighbor_ring(u).unwrap();
                assert!(back.contains(&v), "{u} ring missing {v}");
            }
        }
    }

    #[test]
    fn same_grid_serializes_identically() {
        let g = grid(4, 3, (0..12).map(|i| i as f64 * 0.5).collect());
        let mut a = Vec::new();
        triangulate(&g).unwrap().write_obj(&mut a).unwrap();
        let mut b = Vec::new();
        triangulate(&g).unwrap().write_obj(&mut b).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }
}
