//! Shared fixtures and independent oracles for integration tests.
//!
//! The oracles here deliberately avoid the library's TIN path: extrema are
//! found by raw 8-neighborhood scans on the grid, ascent walks use
//! 8-neighbor steepest steps, and cycle rank is counted from an explicit
//! DFS spanning forest.

// Not every test target uses every oracle.
#![allow(dead_code)]

use surfnet::density::DensityGrid;

/// Sample f(x, y) on an ncols x nrows lattice with unit cells whose centers
/// sit at integer coordinates symmetric about the origin.
pub fn analytic_grid(ncols: usize, nrows: usize, f: impl Fn(f64, f64) -> f64) -> DensityGrid {
    let origin = (-(ncols as f64) / 2.0, -(nrows as f64) / 2.0);
    let mut values = Vec::with_capacity(ncols * nrows);
    for row in 0..nrows {
        for col in 0..ncols {
            let x = origin.0 + (col as f64 + 0.5);
            let y = origin.1 + (row as f64 + 0.5);
            values.push(f(x, y));
        }
    }
    DensityGrid {
        ncols,
        nrows,
        cell_size_m: 1.0,
        origin,
        values,
    }
}

pub fn gaussian(x: f64, y: f64, cx: f64, cy: f64, sigma: f64, amp: f64) -> f64 {
    let dx = x - cx;
    let dy = y - cy;
    amp * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
}

fn neighbors_8(col: usize, row: usize, ncols: usize, nrows: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(8);
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let (c, r) = (col as i64 + dc, row as i64 + dr);
            if c >= 0 && r >= 0 && (c as usize) < ncols && (r as usize) < nrows {
                out.push((c as usize, r as usize));
            }
        }
    }
    out
}

/// Interior cells strictly higher than all 8 neighbors.
pub fn local_maxima_8(grid: &DensityGrid) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for row in 1..grid.nrows - 1 {
        for col in 1..grid.ncols - 1 {
            let z = grid.value(col, row);
            if neighbors_8(col, row, grid.ncols, grid.nrows)
                .into_iter()
                .all(|(c, r)| grid.value(c, r) < z)
            {
                out.push((col, row));
            }
        }
    }
    out
}

/// Interior cells strictly lower than all 8 neighbors.
pub fn local_minima_8(grid: &DensityGrid) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for row in 1..grid.nrows - 1 {
        for col in 1..grid.ncols - 1 {
            let z = grid.value(col, row);
            if neighbors_8(col, row, grid.ncols, grid.nrows)
                .into_iter()
                .all(|(c, r)| grid.value(c, r) > z)
            {
                out.push((col, row));
            }
        }
    }
    out
}

/// Walk uphill to the strictly highest 8-neighbor until no neighbor is
/// higher; intended for tie-free fixtures.
pub fn steepest_ascent_8(grid: &DensityGrid, start: (usize, usize)) -> (usize, usize) {
    let mut current = start;
    for _ in 0..grid.ncols * grid.nrows {
        let (col, row) = current;
        let z = grid.value(col, row);
        let best = neighbors_8(col, row, grid.ncols, grid.nrows)
            .into_iter()
            .max_by(|&(c1, r1), &(c2, r2)| grid.value(c1, r1).total_cmp(&grid.value(c2, r2)))
            .unwrap();
        if grid.value(best.0, best.1) <= z {
            return current;
        }
        current = best;
    }
    current
}

/// Cycle rank from an explicit DFS spanning forest: e minus the number of
/// tree edges. `links` are peak index pairs (one per pass), each standing
/// for two ridgeline edges, so `e` is supplied by the caller.
pub fn cycle_rank_by_spanning_forest(vertex_count: usize, links: &[(usize, usize)], e: usize) -> i64 {
    let mut adjacency = vec![Vec::new(); vertex_count];
    for &(a, b) in links {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut seen = vec![false; vertex_count];
    let mut forest_edges = 0usize;
    for start in 0..vertex_count {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    forest_edges += 1;
                    stack.push(j);
                }
            }
        }
    }
    e as i64 - forest_edges as i64
}
