//! Shared fixtures for unit tests: analytic surfaces sampled on a lattice
//! with unit spacing and cell centers at integer coordinates centered on 0.

use crate::density::DensityGrid;

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
