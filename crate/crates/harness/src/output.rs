//! Artifact writers: CSV with a metadata trailer, legacy VTK, SVG plots and JSON summaries.
//! Every file is written to a temporary file in the target directory and renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use leray_strip::geometry::Mesh;
use leray_strip::solver::Solution;
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, HarnessResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> HarnessResult<()> {
    let io = |source| HarnessError::Io { path: path.to_path_buf(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// First 16 hex digits of the SHA-256 of `text`.
pub fn config_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Trailing comment line of every CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub config_hash: String,
}

impl Metadata {
    pub fn line(&self) -> String {
        format!("# leray-strip {VERSION} config={}\n", self.config_hash)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn to_bytes(&self, meta: &Metadata) -> HarnessResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let mut bytes = w.into_inner().map_err(|e| HarnessError::Csv(e.into_error().into()))?;
        bytes.extend_from_slice(meta.line().as_bytes());
        Ok(bytes)
    }

    pub fn write(&self, path: &Path, meta: &Metadata) -> HarnessResult<()> {
        atomic_write(path, &self.to_bytes(meta)?)
    }

    /// Aligned plain-text rendering for the terminal.
    pub fn render(&self) -> String {
        let n = self.header.len();
        let mut width = vec![0; n];
        for r in std::iter::once(&self.header).chain(&self.rows) {
            for (k, c) in r.iter().enumerate().take(n) {
                width[k] = width[k].max(c.len());
            }
        }
        let mut out = String::new();
        for r in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = r.iter().enumerate().map(|(k, c)| format!("{c:>w$}", w = width[k])).collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Shortest round-trip form, in exponent notation for very small or large magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Legacy ASCII VTK of a solution on quadratic triangles, with point vectors `velocity` and
/// scalars `pressure` (linear pressure averaged onto edge midpoints).
pub fn vtk_solution(solution: &Solution) -> String {
    let dofs = solution.system.dofs();
    let n = dofs.n_nodes();
    let nv = dofs.n_vertices();
    let mut pressure = vec![0.0; n];
    pressure[..nv].copy_from_slice(&solution.field.pressure[..nv]);
    for el in &dofs.elements {
        for (k, (a, b)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
            pressure[el[3 + k]] = 0.5 * (solution.field.pressure[el[a]] + solution.field.pressure[el[b]]);
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\n");
    s.push_str(&format!("leray-strip {VERSION} solution phi={} alpha={}\n", solution.config.phi, solution.config.alpha));
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    s.push_str(&format!("POINTS {n} double\n"));
    for x in &dofs.nodes {
        s.push_str(&format!("{} {} 0\n", x[0], x[1]));
    }
    let ne = dofs.elements.len();
    s.push_str(&format!("CELLS {ne} {}\n", ne * 7));
    for el in &dofs.elements {
        s.push_str(&format!("6 {} {} {} {} {} {}\n", el[0], el[1], el[2], el[3], el[4], el[5]));
    }
    s.push_str(&format!("CELL_TYPES {ne}\n"));
    for _ in 0..ne {
        s.push_str("22\n");
    }
    s.push_str(&format!("POINT_DATA {n}\nVECTORS velocity double\n"));
    for i in 0..n {
        let u = solution.field.node_velocity(i);
        s.push_str(&format!("{} {} 0\n", u[0], u[1]));
    }
    s.push_str("SCALARS pressure double 1\nLOOKUP_TABLE default\n");
    for p in &pressure {
        s.push_str(&format!("{p}\n"));
    }
    s
}

/// Legacy ASCII VTK of a vector field sampled at the vertices of a linear triangle mesh.
pub fn vtk_vertex_field(title: &str, mesh: &Mesh, name: &str, values: &[[f64; 2]]) -> String {
    let n = mesh.vertices.len();
    let ne = mesh.triangles.len();
    let mut s = format!("# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS {n} double\n");
    for x in &mesh.vertices {
        s.push_str(&format!("{} {} 0\n", x[0], x[1]));
    }
    s.push_str(&format!("CELLS {ne} {}\n", ne * 4));
    for t in &mesh.triangles {
        s.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    s.push_str(&format!("CELL_TYPES {ne}\n"));
    for _ in 0..ne {
        s.push_str("5\n");
    }
    s.push_str(&format!("POINT_DATA {n}\nVECTORS {name} double\n"));
    for v in values {
        s.push_str(&format!("{} {} 0\n", v[0], v[1]));
    }
    s
}

/// One polyline of a plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Minimal SVG line plot; `log_y` plots `log10 y` and drops non-positive values.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], log_y: bool) -> String {
    let (w, h, m) = (640.0, 420.0, 60.0);
    let tf = |y: f64| if log_y { y.log10() } else { y };
    let pts: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().filter(|p| !log_y || p.1 > 0.0).map(|p| (p.0, tf(p.1))).filter(|p| p.0.is_finite() && p.1.is_finite()).collect()).collect();
    let all = pts.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.0);
        x1 = x1.max(p.0);
        y0 = y0.min(p.1);
        y1 = y1.max(p.1);
    }
    if !(x0 < x1) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if !(y0 < y1) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let esc = |t: &str| t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n");
    s.push_str(&format!("<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"));
    s.push_str(&format!("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", w / 2.0, esc(title)));
    s.push_str(&format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        w - 2.0 * m,
        h - 2.0 * m
    ));
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{:.3}</text>\n", sx(fx), h - m + 16.0, fx));
        let label = if log_y { format!("1e{fy:.1}") } else { format!("{fy:.3e}") };
        s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{label}</text>\n", m - 4.0, sy(fy) + 4.0));
    }
    s.push_str(&format!("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", w / 2.0, h - 16.0, esc(x_label)));
    s.push_str(&format!("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n", h / 2.0, h / 2.0, esc(y_label)));
    for (k, (ser, p)) in series.iter().zip(&pts).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = p.iter().map(|q| format!("{:.2},{:.2}", sx(q.0), sy(q.1))).collect();
        s.push_str(&format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n", path.join(" ")));
        for q in p {
            s.push_str(&format!("<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n", sx(q.0), sy(q.1)));
        }
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            w - m - 120.0,
            m + 16.0 + 16.0 * k as f64,
            esc(&ser.label)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Pretty JSON with a trailing newline.
pub fn summary_text(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}
