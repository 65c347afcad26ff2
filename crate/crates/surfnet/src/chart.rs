//! SVG line charts over the indices time-series CSV: one complexity panel
//! (mu, nd, beta) and one connectivity panel (alpha, gamma, eta, theta).
//!
//! Series are normalized to their own range so differently scaled indices
//! share one panel; the legend carries the original range. Undefined values
//! leave gaps, isolated defined points still get markers, and a series with
//! no defined values at all is omitted from the plot with a legend note.

use std::path::{Path, PathBuf};

use crate::error::{Result, SurfnetError};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 210.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 48.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

struct SeriesTable {
    windows: Vec<usize>,
    mu: Vec<Option<f64>>,
    nd: Vec<Option<f64>>,
    alpha: Vec<Option<f64>>,
    beta: Vec<Option<f64>>,
    gamma: Vec<Option<f64>>,
    eta: Vec<Option<f64>>,
    theta: Vec<Option<f64>>,
}

const EXPECTED_HEADER: &str =
    "window_index,v,e,p,L_km,SA_km2,mu,nd,alpha,beta,gamma,eta,theta,euler_check";

fn parse_indices_csv(path: &Path) -> Result<SeriesTable> {
    let text = std::fs::read_to_string(path).map_err(|e| SurfnetError::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SurfnetError::Config(format!("{}: empty CSV", path.display())))?;
    if header != EXPECTED_HEADER {
        return Err(SurfnetError::Config(format!(
            "{}: unexpected header `{header}`",
            path.display()
        )));
    }

    let mut table = SeriesTable {
        windows: Vec::new(),
        mu: Vec::new(),
        nd: Vec::new(),
        alpha: Vec::new(),
        beta: Vec::new(),
        gamma: Vec::new(),
        eta: Vec::new(),
        theta: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(SurfnetError::Config(format!(
                "{}: row {} has {} fields, expected 14",
                path.display(),
                i + 2,
                fields.len()
            )));
        }
        let bad_row = |field: &str| {
            SurfnetError::Config(format!(
                "{}: row {}: bad value `{field}`",
                path.display(),
                i + 2
            ))
        };
        let window: usize = fields[0].parse().map_err(|_| bad_row(fields[0]))?;
        let opt = |field: &str| -> Result<Option<f64>> {
            if field == "NA" {
                Ok(None)
            } else {
                field.parse::<f64>().map(Some).map_err(|_| bad_row(field))
            }
        };
        table.windows.push(window);
        table.mu.push(opt(fields[6])?);
        table.nd.push(opt(fields[7])?);
        table.alpha.push(opt(fields[8])?);
        table.beta.push(opt(fields[9])?);
        table.gamma.push(opt(fields[10])?);
        table.eta.push(opt(fields[11])?);
        table.theta.push(opt(fields[12])?);
    }
    Ok(table)
}

/// Render `complexity.svg` and `connectivity.svg` from an indices CSV.
pub fn emit_charts(csv_path: &Path, out_dir: &Path) -> Result<[PathBuf; 2]> {
    let table = parse_indices_csv(csv_path)?;
    std::fs::create_dir_all(out_dir).map_err(|e| SurfnetError::io(out_dir, e))?;

    let complexity = render_chart(
        "Complexity over time",
        &table.windows,
        &[
            ("mu", &table.mu),
            ("nd", &table.nd),
            ("beta", &table.beta),
        ],
    );
    let connectivity = render_chart(
        "Connectivity over time",
        &table.windows,
        &[
            ("alpha", &table.alpha),
            ("gamma", &table.gamma),
            ("eta", &table.eta),
            ("theta", &table.theta),
        ],
    );

    let complexity_path = out_dir.join("complexity.svg");
    let connectivity_path = out_dir.join("connectivity.svg");
    std::fs::write(&complexity_path, complexity)
        .map_err(|e| SurfnetError::io(&complexity_path, e))?;
    std::fs::write(&connectivity_path, connectivity)
        .map_err(|e| SurfnetError::io(&connectivity_path, e))?;
    Ok([complexity_path, connectivity_path])
}

fn render_chart(title: &str, windows: &[usize], series: &[(&str, &Vec<Option<f64>>)]) -> String {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let n = windows.len();
    let x_of = |i: usize| -> f64 {
        if n <= 1 {
            MARGIN_LEFT + plot_w / 2.0
        } else {
            MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-size=\"16\">{title}</text>\n",
        MARGIN_LEFT
    ));
    // Frame.
    svg.push_str(&format!(
        "  <rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#999\"/>\n"
    ));
    // X ticks.
    let step = (n / 24).max(1);
    for (i, w) in windows.iter().enumerate() {
        if i % step != 0 && i != n - 1 {
            continue;
        }
        let x = x_of(i);
        let y = MARGIN_TOP + plot_h;
        svg.push_str(&format!(
            "  <line x1=\"{x}\" y1=\"{y}\" x2=\"{x}\" y2=\"{}\" stroke=\"#999\"/>\n",
            y + 4.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{x}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{w}</text>\n",
            y + 16.0
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">window</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    ));
    svg.push_str(&format!(
        "  <text x=\"16\" y=\"{}\" font-size=\"11\" transform=\"rotate(-90 16 {})\" \
         text-anchor=\"middle\">normalized per series</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    let mut legend_y = MARGIN_TOP + 10.0;
    for (series_idx, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[series_idx % PALETTE.len()];
        let defined: Vec<f64> = values.iter().filter_map(|v| *v).collect();
        let legend_x = WIDTH - MARGIN_RIGHT + 16.0;

        if defined.is_empty() {
            svg.push_str(&format!(
                "  <text x=\"{legend_x}\" y=\"{legend_y}\" font-size=\"11\" fill=\"#666\">{name} \
                 (no data; omitted)</text>\n"
            ));
            legend_y += 18.0;
            continue;
        }

        let min = defined.iter().copied().fold(f64::INFINITY, f64::min);
        let max = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let y_of = |v: f64| -> f64 {
            let t = if max > min { (v - min) / (max - min) } else { 0.5 };
            MARGIN_TOP + plot_h * (1.0 - t)
        };

        // Line segments between consecutive defined points; gaps at NA.
        for i in 1..values.len() {
            if let (Some(a), Some(b)) = (values[i - 1], values[i]) {
                svg.push_str(&format!(
                    "  <line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" \
                     stroke-width=\"1.5\" class=\"segment-{name}\"/>\n",
                    x_of(i - 1),
                    y_of(a),
                    x_of(i),
                    y_of(b)
                ));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                svg.push_str(&format!(
                    "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\" \
                     class=\"marker-{name}\"/>\n",
                    x_of(i),
                    y_of(*v)
                ));
            }
        }
        svg.push_str(&format!(
            "  <rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            legend_x,
            legend_y - 9.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{legend_y}\" font-size=\"11\">{name} ({min:.4}..{max:.4})</text>\n",
            legend_x + 14.0
        ));
        legend_y += 18.0;
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_csv(dir: &Path, rows: &[&str]) -> PathBuf {
        let path = dir.join("indices.csv");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "{EXPECTED_HEADER}").unwrap();
        for row in rows {
            writeln!(f, "{row}").unwrap();
        }
        path
    }

    #[test]
    fn renders_both_panels_with_expected_series() {
        let dir = tempfile::tempdir().unwrap();
        let rows: Vec<String> = (0..18)
            .map(|i| format!("{i},4,5,1,12,48,2,0.25,0.666,1.25,0.833,2.4,3,1"))
            .collect();
        let row_refs: Vec<&str> = rows.iter().map(|s| s.as_str()).collect();
        let csv = write_csv(dir.path(), &row_refs);
        let [complexity, connectivity] = emit_charts(&csv, dir.path()).unwrap();
        let complexity_svg = std::fs::read_to_string(complexity).unwrap();
        let connectivity_svg = std::fs::read_to_string(connectivity).unwrap();
        for name in ["mu", "nd", "beta"] {
            assert!(complexity_svg.contains(&format!("marker-{name}")));
        }
        for name in ["alpha", "gamma", "eta", "theta"] {
            assert!(connectivity_svg.contains(&format!("marker-{name}")));
        }
    }

    #[test]
    fn all_na_series_is_omitted_with_note() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_csv(
            dir.path(),
            &["0,0,0,0,0,1,0,0,NA,NA,NA,NA,NA,0", "1,0,0,0,0,1,0,0,NA,NA,NA,NA,NA,0"],
        );
        let [complexity, connectivity] = emit_charts(&csv, dir.path()).unwrap();
        let complexity_svg = std::fs::read_to_string(complexity).unwrap();
        let connectivity_svg = std::fs::read_to_string(connectivity).unwrap();
        assert!(complexity_svg.contains("beta (no data; omitted)"));
        assert!(connectivity_svg.contains("alpha (no data; omitted)"));
        assert!(!connectivity_svg.contains("marker-alpha"));
        // mu and nd are defined (0) and still plotted.
        assert!(complexity_svg.contains("marker-mu"));
    }

    #[test]
    fn single_row_yields_markers_without_segments() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_csv(dir.path(), &["0,4,5,1,12,48,2,0.25,0.666,1.25,0.833,2.4,3,1"]);
        let [complexity, _] = emit_charts(&csv, dir.path()).unwrap();
        let svg = std::fs::read_to_string(complexity).unwrap();
        assert!(svg.contains("marker-mu"));
        assert!(!svg.contains("segment-mu"));
    }

    #[test]
    fn malformed_csv_is_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "nope\n1,2,3\n").unwrap();
        assert!(matches!(
            emit_charts(&path, dir.path()),
            Err(SurfnetError::Config(_))
        ));
        let truncated = write_csv(dir.path(), &["0,1,2"]);
        assert!(matches!(
            emit_charts(&truncated, dir.path()),
            Err(SurfnetError::Config(_))
        ));
    }
}
