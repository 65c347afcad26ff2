//! Kernel density estimation on a regular grid.
//!
//! Densities are evaluated at cell centers with the quartic (biweight)
//! kernel K(u) = (3/pi)(1 - |u|^2)^2 for |u| <= 1 and 0 outside, so each
//! point contributes unit mass: f(x) = (1/(n h^2)) sum_i K((x - x_i)/h).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Result, SurfnetError};

/// Axis-aligned analysis extent in projected meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extent {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Extent {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area_km2(&self) -> f64 {
        self.width() * self.height() / 1.0e6
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeParams {
    pub bandwidth_m: f64,
    pub cell_size_m: f64,
    pub extent: Extent,
}

impl KdeParams {
    /// Extent from the point bounding box padded by the bandwidth on every
    /// side, so no kernel mass falls off the grid.
    pub fn for_points(points: &[(f64, f64)], bandwidth_m: f64, cell_size_m: f64) -> Result<Self> {
        let mut min_x = f64::INFINITY;
        let mut min_y = f64::INFINITY;
        let mut max_x = f64::NEG_INFINITY;
        let mut max_y = f64::NEG_INFINITY;
        for &(x, y) in points {
            if !x.is_finite() || !y.is_finite() {
                return Err(SurfnetError::InvalidInput(format!(
                    "non-finite point coordinate ({x}, {y})"
                )));
            }
            min_x = min_x.min(x);
            min_y = min_y.min(y);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
        }
        if points.is_empty() {
            // Degenerate but valid: a minimal extent around the origin.
            min_x = 0.0;
            min_y = 0.0;
            max_x = 0.0;
            max_y = 0.0;
        }
        let params = KdeParams {
            bandwidth_m,
            cell_size_m,
            extent: Extent {
                min_x: min_x - bandwidth_m,
                min_y: min_y - bandwidth_m,
                max_x: max_x + bandwidth_m,
                max_y: max_y + bandwidth_m,
            },
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_m.is_finite() && self.bandwidth_m > 0.0) {
            return Err(SurfnetError::Config(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_m
            )));
        }
        if !(self.cell_size_m.is_finite() && self.cell_size_m > 0.0) {
            return Err(SurfnetError::Config(format!(
                "cell size must be positive, got {}",
                self.cell_size_m
            )));
        }
        if self.cell_size_m > self.bandwidth_m {
            return Err(SurfnetError::Config(format!(
                "cell size {} exceeds bandwidth {}; the kernel could fall between cell centers",
                self.cell_size_m, self.bandwidth_m
            )));
        }
        if !(self.extent.width() > 0.0 && self.extent.height() > 0.0) {
            return Err(SurfnetError::Config("extent must have positive area".into()));
        }
        Ok(())
    }
}

/// Raster of density values (per square meter), row-major with row 0 at the
/// south edge; `origin` is the lower-left corner of the extent.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub cell_size_m: f64,
    pub origin: (f64, f64),
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    /// Coordinates of the cell center.
    pub fn center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.cell_size_m,
            self.origin.1 + (row as f64 + 0.5) * self.cell_size_m,
        )
    }

    /// Midpoint-rule integral of the surface over the grid.
    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_size_m * self.cell_size_m
    }

    /// ESRI ASCII grid, north row first.
    pub fn write_esri_ascii<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "ncols {}", self.ncols)?;
        writeln!(out, "nrows {}", self.nrows)?;
        writeln!(out, "xllcorner {}", self.origin.0)?;
        writeln!(out, "yllcorner {}", self.origin.1)?;
        writeln!(out, "cellsize {}", self.cell_size_m)?;
        writeln!(out, "NODATA_value -9999")?;
        for row in (0..self.nrows).rev() {
            let mut line = String::new();
            for col in 0..self.ncols {
                if col > 0 {
                    line.push(' ');
                }
                line.push_str(&format!("{}", self.value(col, row)));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Evaluate the KDE surface of `points` on the grid described by `params`.
///
/// With no points the grid is all zeros. Evaluation is parallel per row;
/// each cell gathers candidate points from a bandwidth-sized bin index in a
/// fixed order, so results do not depend on thread count.
pub fn estimate_density(points: &[(f64, f64)], params: &KdeParams) -> Result<DensityGrid> {
    params.validate()?;
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(SurfnetError::InvalidInput(format!(
                "non-finite point coordinate ({x}, {y})"
            )));
        }
    }

    let cell = params.cell_size_m;
    let h = params.bandwidth_m;
    let ncols = (params.extent.width() / cell).ceil().max(1.0) as usize;
    let nrows = (params.extent.height() / cell).ceil().max(1.0) as usize;
    let origin = (params.extent.min_x, params.extent.min_y);

    let mut grid = DensityGrid {
        ncols,
        nrows,
        cell_size_m: cell,
        origin,
        values: vec![0.0; ncols * nrows],
    };
    if points.is_empty() {
        return Ok(grid);
    }

    // Bandwidth-sized bins: all points within h of a cell center live in the
    // 3x3 bin block around the center's bin.
    let mut bins: HashMap<(i64, i64), Vec<(f64, f64)>> = HashMap::new();
    for &p in points {
        bins.entry(bin_of(p, h)).or_default().push(p);
    }

    let n = points.len() as f64;
    let scale = 3.0 / (PI * n * h * h);
    let h2 = h * h;

    let rows: Vec<Vec<f64>> = (0..nrows)
        .into_par_iter()
        .map(|row| {
            let mut out = Vec::with_capacity(ncols);
            let cy = origin.1 + (row as f64 + 0.5) * cell;
            for col in 0..ncols {
                let cx = origin.0 + (col as f64 + 0.5) * cell;
                let (bx, by) = bin_of((cx, cy), h);
                let mut acc = 0.0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let Some(candidates) = bins.get(&(bx + dx, by + dy)) else {
                            continue;
                        };
                        for &(px, py) in candidates {
                            let ddx = cx - px;
                            let ddy = cy - py;
                            let u2 = (ddx * ddx + ddy * ddy) / h2;
                            if u2 <= 1.0 {
                                let t = 1.0 - u2;
                                acc += t * t;
                            }
                        }
                    }
                }
                out.push(acc * scale);
            }
            out
        })
        .collect();

    let mut values = Vec::with_capacity(ncols * nrows);
    for row in rows {
        values.extend(row);
    }
    grid.values = values;
    Ok(grid)
}

fn bin_of(p: (f64, f64), h: f64) -> (i64, i64) {
    ((p.0 / h).floor() as i64, (p.1 / h).floor() as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_point_set_gives_all_zero_grid() {
        let params = KdeParams {
            bandwidth_m: 600.0,
            cell_size_m: 60.0,
            extent: Extent { min_x: 0.0, min_y: 0.0, max_x: 1200.0, max_y: 1200.0 },
        };
        let grid = estimate_density(&[], &params).unwrap();
        assert!(grid.values.iter().all(|&v| v == 0.0));
        assert_eq!(grid.ncols, 20);
        assert_eq!(grid.nrows, 20);
    }

    #[test]
    fn single_point_peak_value_is_three_over_pi_h_squared() {
        // Extent chosen so a cell center lands exactly on the point:
        // xll = -615, cell = 30 -> center of column 20 is -615 + 20.5*30 = 0.
        let h = 600.0;
        let params = KdeParams {
            bandwidth_m: h,
            cell_size_m: 30.0,
            extent: Extent { min_x: -615.0, min_y: -615.0, max_x: 615.0, max_y: 615.0 },
        };
        let grid = estimate_density(&[(0.0, 0.0)], &params).unwrap();
        assert_eq!(grid.center(20, 20), (0.0, 0.0));
        let expected = 3.0 / (PI * h * h);
        let got = grid.value(20, 20);
        assert!(
            ((got - expected) / expected).abs() < 1e-12,
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn cells_beyond_bandwidth_are_zero() {
        let params = KdeParams {
            bandwidth_m: 100.0,
            cell_size_m: 10.0,
            extent: Extent { min_x: -500.0, min_y: -500.0, max_x: 500.0, max_y: 500.0 },
        };
        let grid = estimate_density(&[(0.0, 0.0)], &params).unwrap();
        for row in 0..grid.nrows {
            for col in 0..grid.ncols {
                let (cx, cy) = grid.center(col, row);
                if (cx * cx + cy * cy).sqrt() > 100.0 {
                    assert_eq!(grid.value(col, row), 0.0, "cell ({col},{row}) at ({cx},{cy})");
                }
            }
        }
    }

    #[test]
    fn four_point_mass_integrates_to_one_percent_accuracy() {
        let h = 600.0;
        let points = [(0.0, 0.0), (400.0, 150.0), (-300.0, 500.0), (100.0, -700.0)];
        let params = KdeParams::for_points(&points, h, h / 20.0).unwrap();
        let grid = estimate_density(&points, &params).unwrap();
        let mass = grid.riemann_sum();
        assert!((mass - 1.0).abs() <= 0.01, "mass = {mass}");
    }

    #[test]
    fn translation_equivariance_with_exact_offsets() {
        let h = 100.0;
        let points = [(10.0, 20.0), (45.0, -30.0), (5.0, 5.0)];
        let params = KdeParams::for_points(&points, h, 25.0).unwrap();
        let grid = estimate_density(&points, &params).unwrap();

        let (dx, dy) = (4096.0, -1024.0);
        let shifted: Vec<_> = points.iter().map(|&(x, y)| (x + dx, y + dy)).collect();
        let shifted_params = KdeParams {
            bandwidth_m: h,
            cell_size_m: 25.0,
            extent: Extent {
                min_x: params.extent.min_x + dx,
                min_y: params.extent.min_y + dy,
                max_x: params.extent.max_x + dx,
                max_y: params.extent.max_y + dy,
            },
        };
        let shifted_grid = estimate_density(&shifted, &shifted_params).unwrap();
        assert_eq!(grid.values, shifted_grid.values);
    }

    #[test]
    fn unnormalized_sum_is_additive_over_point_sets() {
        let h = 200.0;
        let a = [(0.0, 0.0), (50.0, 80.0)];
        let b = [(-60.0, 40.0), (10.0, -90.0), (70.0, 0.0)];
        let all: Vec<_> = a.iter().chain(b.iter()).copied().collect();
        let params = KdeParams::for_points(&all, h, 20.0).unwrap();

        let grid_a = estimate_density(&a, &params).unwrap();
        let grid_b = estimate_density(&b, &params).unwrap();
        let grid_all = estimate_density(&all, &params).unwrap();

        for i in 0..grid_all.values.len() {
            let unnorm_all = grid_all.values[i] * all.len() as f64;
            let unnorm_sum = grid_a.values[i] * a.len() as f64 + grid_b.values[i] * b.len() as f64;
            let diff = (unnorm_all - unnorm_sum).abs();
            let scale = unnorm_all.abs().max(1e-30);
            assert!(diff / scale < 1e-9, "cell {i}: {unnorm_all} vs {unnorm_sum}");
        }
    }

    #[test]
    fn rejects_non_finite_points() {
        let params = KdeParams {
            bandwidth_m: 10.0,
            cell_size_m: 5.0,
            extent: Extent { min_x: 0.0, min_y: 0.0, max_x: 10.0, max_y: 10.0 },
        };
        assert!(matches!(
            estimate_density(&[(f64::NAN, 0.0)], &params),
            Err(SurfnetError::InvalidInput(_))
        ));
    }

    #[test]
    fn esri_ascii_header_and_row_order() {
        let grid = DensityGrid {
            ncols: 2,
            nrows: 2,
            cell_size_m: 10.0,
            origin: (100.0, 200.0),
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        let mut buffer = Vec::new();
        grid.write_esri_ascii(&mut buffer).unwrap();
        let text = String::from_utf8(buffer).unwrap();
        let expected = "ncols 2\nnrows 2\nxllcorner 100\nyllcorner 200\ncellsize 10\nNODATA_value -9999\n3 4\n1 2\n";
        assert_eq!(text, expected);
    }
}
