//! The seven graph indices of a surface network and their time series.
//!
//! mu = e - v + p, ND = L/SA, alpha = (e - v + p) / (v(v-1)/2 - (v-1)),
//! beta = e/v, gamma = e / (v(v-1)/2), eta = L/e, theta = L/v. A zero
//! denominator yields an explicit undefined marker (`NA` in the CSV), never
//! a crash or infinity. alpha can exceed 1 when parallel passes make the
//! network multigraph-like; it is reported as computed, not clamped.

use std::io::Write;

use serde::Serialize;

use crate::error::{Result, SurfnetError};
use crate::surface_network::SurfaceNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphIndices {
    pub v: usize,
    pub e: usize,
    pub p: usize,
    #[serde(rename = "L_km")]
    pub l_km: f64,
    #[serde(rename = "SA_km2")]
    pub sa_km2: f64,
    pub mu: i64,
    pub nd: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
}

pub fn compute_indices(network: &SurfaceNetwork) -> Result<GraphIndices> {
    compute_indices_from_counts(
        network.v(),
        network.e(),
        network.p(),
        network.total_ridgeline_length_km,
        network.surface_area_km2,
    )
}

pub fn compute_indices_from_counts(
    v: usize,
    e: usize,
    p: usize,
    l_km: f64,
    sa_km2: f64,
) -> Result<GraphIndices> {
    let mu = e as i64 - v as i64 + p as i64;
    if mu < 0 {
        return Err(SurfnetError::Internal(format!(
            "cyclomatic number e - v + p = {mu} is negative (v={v}, e={e}, p={p})"
        )));
    }

    let pairs = (v * v.saturating_sub(1)) / 2;
    let alpha_denominator = pairs as i64 - (v as i64 - 1).max(0);

    Ok(GraphIndices {
        v,
        e,
        p,
        l_km,
        sa_km2,
        mu,
        nd: (sa_km2 > 0.0).then(|| l_km / sa_km2),
        alpha: (alpha_denominator > 0).then(|| mu as f64 / alpha_denominator as f64),
        beta: (v > 0).then(|| e as f64 / v as f64),
        gamma: (pairs > 0).then(|| e as f64 / pairs as f64),
        eta: (e > 0).then(|| l_km / e as f64),
        theta: (v > 0).then(|| l_km / v as f64),
    })
}

/// One time-series row: the indices of one window plus its Euler check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowRow {
    pub window_index: usize,
    #[serde(flatten)]
    pub indices: GraphIndices,
    pub euler_check: i64,
}

/// Order rows by window index and verify the series is gap-free from 0.
pub fn assemble_time_series(mut rows: Vec<WindowRow>) -> Result<Vec<WindowRow>> {
    rows.sort_by_key(|r| r.window_index);
    for (i, row) in rows.iter().enumerate() {
        if row.window_index != i {
            return Err(SurfnetError::Internal(format!(
                "window series has a gap: expected index {i}, found {}",
                row.window_index
            )));
        }
    }
    Ok(rows)
}

fn na(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// CSV export with `NA` for undefined ratios.
pub fn write_time_series_csv<W: Write>(rows: &[WindowRow], mut out: W) -> std::io::Result<()> {
    writeln!(
        out,
        "window_index,v,e,p,L_km,SA_km2,mu,nd,alpha,beta,gamma,eta,theta,euler_check"
    )?;
    for row in rows {
        let x = &row.indices;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.window_index,
            x.v,
            x.e,
            x.p,
            x.l_km,
            x.sa_km2,
            x.mu,
            na(x.nd),
            na(x.alpha),
            na(x.beta),
            na(x.gamma),
            na(x.eta),
            na(x.theta),
            row.euler_check,
        )?;
    }
    Ok(())
}
