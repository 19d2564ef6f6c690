//! Wall curves: analytic graphs or cubic splines, reparametrized by arc length.

use crate::error::{Error, Result};
use crate::linalg::{DirectSolver, Triplets};
use crate::quadrature::GaussLegendre;

/// Which wall a curve describes. The fluid lies to the left of the lower wall and to the
/// right of the upper wall when both are traversed with increasing `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WallSide {
    Lower,
    Upper,
}

impl WallSide {
    /// `+1` for the lower wall, `-1` for the upper wall.
    pub fn orientation(self) -> f64 {
        match self {
            WallSide::Lower => 1.0,
            WallSide::Upper => -1.0,
        }
    }
}

/// One stored sample of a boundary curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    /// Unit normal pointing out of the fluid.
    pub normal: [f64; 2],
    pub kappa: f64,
}

/// Smooth step `S(xi) = (1 + tanh(k tan(pi (xi - 1/2)))) / 2`, flat outside (0, 1).
///
/// Returns `S`, `dS/dxi` and `d2S/dxi2`.
pub fn smooth_step(xi: f64, k: f64) -> [f64; 3] {
    if xi <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if xi >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let pi = std::f64::consts::PI;
    let tn = (pi * (xi - 0.5)).tan();
    let u = k * tn;
    let sec2 = 1.0 + tn * tn;
    let du = k * pi * sec2;
    let ddu = 2.0 * k * pi * pi * tn * sec2;
    let th = u.tanh();
    let a = u.abs();
    if a > 350.0 {
        return [if u > 0.0 { 1.0 } else { 0.0 }, 0.0, 0.0];
    }
    let e = (-2.0 * a).exp();
    let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    let s = if u > 0.0 { 1.0 - e / (1.0 + e) } else { e / (1.0 + e) };
    [s, 0.5 * sech2 * du, 0.5 * sech2 * (ddu - 2.0 * th * du * du)]
}

/// Analytic wall graphs `x2 = g(x1)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WallGraph {
    Flat { height: f64 },
    /// Smooth monotone transition from `y_left` to `y_right` over `[x_left, x_right]`.
    Step { x_left: f64, x_right: f64, y_left: f64, y_right: f64, steepness: f64 },
    /// Bump `base + amplitude * 4 S (1 - S)` over `[x_left, x_right]`.
    Bump { x_left: f64, x_right: f64, base: f64, amplitude: f64, steepness: f64 },
}

impl WallGraph {
    /// `g`, `g'`, `g''` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        match *self {
            WallGraph::Flat { height } => [height, 0.0, 0.0],
            WallGraph::Step { x_left, x_right, y_left, y_right, steepness } => {
                let l = x_right - x_left;
                let [s, ds, dds] = smooth_step((x - x_left) / l, steepness);
                let jump = y_right - y_left;
                [y_left + jump * s, jump * ds / l, jump * dds / (l * l)]
            }
            WallGraph::Bump { x_left, x_right, base, amplitude, steepness } => {
                let l = x_right - x_left;
                let [s, ds, dds] = smooth_step((x - x_left) / l, steepness);
                let b = 4.0 * s * (1.0 - s);
                let db = 4.0 * ds * (1.0 - 2.0 * s);
                let ddb = 4.0 * (dds * (1.0 - 2.0 * s) - 2.0 * ds * ds);
                [base + amplitude * b, amplitude * db / l, amplitude * ddb / (l * l)]
            }
        }
    }

    fn transition(&self) -> Option<(f64, f64)> {
        match *self {
            WallGraph::Flat { .. } => None,
            WallGraph::Step { x_left, x_right, .. } | WallGraph::Bump { x_left, x_right, .. } => {
                Some((x_left, x_right))
            }
        }
    }
}

/// End condition of a cubic spline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplineEnds {
    NotAKnot,
    /// Prescribed first derivatives of both coordinates at the two ends.
    Clamped { start: [f64; 2], end: [f64; 2] },
}

#[derive(Debug, Clone)]
struct CubicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    fn new(knots: &[f64], values: &[f64], ends: Option<(f64, f64)>) -> Result<Self> {
        let n = knots.len() - 1;
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<f64> = (0..n).map(|i| (values[i + 1] - values[i]) / h[i]).collect();
        let mut t = Triplets::new(n + 1, n + 1);
        let mut rhs = vec![0.0; n + 1];
        for i in 1..n {
            t.push(i, i - 1, h[i - 1]);
            t.push(i, i, 2.0 * (h[i - 1] + h[i]));
            t.push(i, i + 1, h[i]);
            rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
        }
        match ends {
            Some((d0, dn)) => {
                t.push(0, 0, 2.0 * h[0]);
                t.push(0, 1, h[0]);
                rhs[0] = 6.0 * (slope[0] - d0);
                t.push(n, n - 1, h[n - 1]);
                t.push(n, n, 2.0 * h[n - 1]);
                rhs[n] = 6.0 * (dn - slope[n - 1]);
            }
            None => {
                t.push(0, 0, h[1]);
                t.push(0, 1, -(h[0] + h[1]));
                t.push(0, 2, h[0]);
                t.push(n, n - 2, h[n - 1]);
                t.push(n, n - 1, -(h[n - 2] + h[n - 1]));
                t.push(n, n, h[n - 2]);
            }
        }
        let second = DirectSolver::new(t.to_csr())?.solve(&rhs, 1e-12)?;
        Ok(Self { knots: knots.to_vec(), values: values.to_vec(), second })
    }

    fn eval(&self, u: f64) -> [f64; 3] {
        let n = self.knots.len() - 1;
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&u)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let (u0, u1) = (self.knots[i], self.knots[i + 1]);
        let h = u1 - u0;
        let (a, b) = (u1 - u, u - u0);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let c0 = y0 / h - m0 * h / 6.0;
        let c1 = y1 / h - m1 * h / 6.0;
        let v = m0 * a * a * a / (6.0 * h) + m1 * b * b * b / (6.0 * h) + c0 * a + c1 * b;
        let d = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1;
        let dd = m0 * a / h + m1 * b / h;
        [v, d, dd]
    }
}

/// Analytic parametrization `u -> (point, d/du, d2/du2)`.
pub type ParametricFn = std::sync::Arc<dyn Fn(f64) -> ([f64; 2], [f64; 2], [f64; 2]) + Send + Sync>;

#[derive(Clone)]
enum Source {
    Graph(WallGraph),
    Spline { x: CubicSpline, y: CubicSpline },
    Parametric(ParametricFn),
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Graph(g) => f.debug_tuple("Graph").field(g).finish(),
            Source::Spline { .. } => f.write_str("Spline"),
            Source::Parametric(_) => f.write_str("Parametric"),
        }
    }
}

impl Source {
    /// Position, first and second derivative with respect to the raw parameter.
    fn derivs(&self, u: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        match self {
            Source::Graph(g) => {
                let [v, d, dd] = g.eval(u);
                ([u, v], [1.0, d], [0.0, dd])
            }
            Source::Spline { x, y } => {
                let [xv, xd, xdd] = x.eval(u);
                let [yv, yd, ydd] = y.eval(u);
                ([xv, yv], [xd, yd], [xdd, ydd])
            }
            Source::Parametric(p) => p(u),
        }
    }
}

/// Geometric data at one arc-length position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub kappa: f64,
}

/// Arc-length parametrized wall with exact straight continuation beyond its flat thresholds.
///
/// Curvature follows the sign convention `dT/ds = kappa n_in`, with `T` the tangent along
/// increasing `x1` and `n_in = -normal` pointing into the fluid.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    side: WallSide,
    source: Source,
    u_knots: Vec<f64>,
    s_knots: Vec<f64>,
    s_flat_left: f64,
    s_flat_right: f64,
    left: CurvePoint,
    right: CurvePoint,
    samples: Vec<CurveSample>,
    gauss: GaussLegendre<f64>,
}

const SAMPLE_SPACING: f64 = 0.01;

impl BoundaryCurve {
    /// Wall given as a graph over `x1`; arc length is measured so that the distorted part
    /// spans `[-L/2, L/2]`, or `s = x1` for a flat wall.
    pub fn from_graph(graph: WallGraph, side: WallSide) -> Result<Self> {
        let (u0, u1) = graph.transition().unwrap_or((0.0, 0.0));
        let pieces = if u1 > u0 { 2048 } else { 0 };
        let knots: Vec<f64> = (0..=pieces).map(|i| u0 + (u1 - u0) * i as f64 / pieces.max(1) as f64).collect();
        Self::build(Source::Graph(graph), side, knots, None)
    }

    /// Cubic spline through `points` (chord-length parameter), arc length starting at
    /// `s_start` (or centered on the curve's midpoint when `None`).
    pub fn from_points(points: &[[f64; 2]], side: WallSide, ends: SplineEnds, s_start: Option<f64>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::Geometry(format!("need at least 4 points, got {}", points.len())));
        }
        check_simple_polyline(points)?;
        let mut knots = vec![0.0];
        for w in points.windows(2) {
            let d = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            knots.push(knots.last().unwrap() + d);
        }
        let xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = points.iter().map(|p| p[1]).collect();
        let (ex, ey) = match ends {
            SplineEnds::NotAKnot => (None, None),
            SplineEnds::Clamped { start, end } => (Some((start[0], end[0])), Some((start[1], end[1]))),
        };
        let source = Source::Spline { x: CubicSpline::new(&knots, &xs, ex)?, y: CubicSpline::new(&knots, &ys, ey)? };
        let mut fine = Vec::with_capacity(4 * knots.len());
        for w in knots.windows(2) {
            for j in 0..4 {
                fine.push(w[0] + (w[1] - w[0]) * j as f64 / 4.0);
            }
        }
        fine.push(*knots.last().unwrap());
        Self::build(source, side, fine, s_start)
    }

    /// Analytic curve on `[u0, u1]` with arc length starting at `s_start`.
    pub fn from_parametric(f: ParametricFn, u0: f64, u1: f64, side: WallSide, s_start: f64) -> Result<Self> {
        if !(u1 > u0) {
            return Err(Error::Geometry("empty parameter interval".into()));
        }
        let knots: Vec<f64> = (0..=2048).map(|i| u0 + (u1 - u0) * i as f64 / 2048.0).collect();
        Self::build(Source::Parametric(f), side, knots, Some(s_start))
    }

    fn build(source: Source, side: WallSide, u_knots: Vec<f64>, s_start: Option<f64>) -> Result<Self> {
        let gauss = GaussLegendre::new(8);
        let mut s_knots = vec![0.0; u_knots.len()];
        for i in 1..u_knots.len() {
            let piece = gauss.integrate(u_knots[i - 1], u_knots[i], |u| speed(&source, u));
            s_knots[i] = s_knots[i - 1] + piece;
        }
        let total = *s_knots.last().unwrap();
        let shift = match (s_start, &source) {
            (Some(s), _) => s,
            (None, Source::Graph(_)) if total == 0.0 => u_knots[0],
            (None, _) => -0.5 * total,
        };
        for s in &mut s_knots {
            *s += shift;
        }
        let s_flat_left = s_knots[0];
        let s_flat_right = *s_knots.last().unwrap();
        let mut curve = Self {
            side,
            left: raw_point(&source, side, u_knots[0]),
            right: raw_point(&source, side, *u_knots.last().unwrap()),
            source,
            u_knots,
            s_knots,
            s_flat_left,
            s_flat_right,
            samples: Vec::new(),
            gauss,
        };
        let lo = s_flat_left - 1.0;
        let hi = s_flat_right + 1.0;
        let n = (((hi - lo) / SAMPLE_SPACING).ceil() as usize).max(200);
        let ds = (hi - lo) / n as f64;
        curve.samples = (0..=n)
            .map(|i| {
                let s = lo + ds * i as f64;
                let p = curve.eval(s);
                CurveSample { s, point: p.point, tangent: p.tangent, normal: p.normal, kappa: p.kappa }
            })
            .collect();
        Ok(curve)
    }

    pub fn side(&self) -> WallSide {
        self.side
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn s_flat_left(&self) -> f64 {
        self.s_flat_left
    }

    pub fn s_flat_right(&self) -> f64 {
        self.s_flat_right
    }

    /// Arc length of the curved portion.
    pub fn curved_length(&self) -> f64 {
        self.s_flat_right - self.s_flat_left
    }

    /// Raw parameter at arc length `s` inside the curved portion.
    fn param_at(&self, s: f64) -> f64 {
        let n = self.s_knots.len();
        let i = match self.s_knots.binary_search_by(|k| k.total_cmp(&s)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let (s0, s1) = (self.s_knots[i], self.s_knots[i + 1]);
        let (u0, u1) = (self.u_knots[i], self.u_knots[i + 1]);
        let mut u = u0 + (u1 - u0) * (s - s0) / (s1 - s0);
        for _ in 0..30 {
            let arc = s0 + self.gauss.integrate(u0, u, |v| speed(&self.source, v));
            let du = (arc - s) / speed(&self.source, u);
            u -= du;
            if du.abs() <= 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
        u
    }

    /// Point, tangent, outward normal and curvature at arc length `s`.
    pub fn eval(&self, s: f64) -> CurvePoint {
        if s <= self.s_flat_left || self.s_knots.len() < 2 {
            return extend(&self.left, s - self.s_flat_left);
        }
        if s >= self.s_flat_right {
            return extend(&self.right, s - self.s_flat_right);
        }
        raw_point(&self.source, self.side, self.param_at(s))
    }

    /// Arc length of the wall point above/below `x1`; requires a graph-like wall.
    pub fn s_at_x1(&self, x1: f64) -> Result<f64> {
        if x1 <= self.left.point[0] || self.s_knots.len() < 2 {
            return Ok(self.s_flat_left + (x1 - self.left.point[0]) / self.left.tangent[0]);
        }
        if x1 >= self.right.point[0] {
            return Ok(self.s_flat_right + (x1 - self.right.point[0]) / self.right.tangent[0]);
        }
        let (mut lo, mut hi) = (self.s_flat_left, self.s_flat_right);
        let mut s = lo + (hi - lo) * (x1 - self.left.point[0]) / (self.right.point[0] - self.left.point[0]);
        for _ in 0..200 {
            let p = self.eval(s);
            let f = p.point[0] - x1;
            if f.abs() <= 1e-14 * (1.0 + x1.abs()) {
                return Ok(s);
            }
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let newton = s - f / p.tangent[0];
            s = if p.tangent[0] > 1e-3 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 1e-15 * (1.0 + s.abs()) {
                return Ok(s);
            }
        }
        Err(Error::Geometry(format!("wall is not a graph near x1 = {x1}")))
    }

    /// True if the wall is a graph over `x1` (tangent has positive `x1` component).
    pub fn is_graph_like(&self) -> bool {
        self.samples.iter().all(|p| p.tangent[0] > 1e-9)
    }

    /// Distance from `x` to the wall (straight continuations included).
    pub fn distance_to(&self, x: [f64; 2]) -> f64 {
        let ray = |p: &CurvePoint, dir: f64| {
            let d = [x[0] - p.point[0], x[1] - p.point[1]];
            let along = (d[0] * p.tangent[0] + d[1] * p.tangent[1]) * dir;
            if along > 0.0 {
                (d[0] * p.tangent[1] - d[1] * p.tangent[0]).abs()
            } else {
                f64::INFINITY
            }
        };
        let mut best = ray(&self.left, -1.0).min(ray(&self.right, 1.0));
        for w in self.samples.windows(2) {
            best = best.min(segment_distance(x, w[0].point, w[1].point));
        }
        best
    }
}

fn speed(source: &Source, u: f64) -> f64 {
    let (_, d, _) = source.derivs(u);
    (d[0] * d[0] + d[1] * d[1]).sqrt()
}

fn raw_point(source: &Source, side: WallSide, u: f64) -> CurvePoint {
    let (p, d, dd) = source.derivs(u);
    let sp = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let tangent = [d[0] / sp, d[1] / sp];
    let signed = (d[0] * dd[1] - d[1] * dd[0]) / (sp * sp * sp);
    let o = side.orientation();
    CurvePoint { point: p, tangent, normal: [o * tangent[1], -o * tangent[0]], kappa: o * signed }
}

fn extend(end: &CurvePoint, ds: f64) -> CurvePoint {
    CurvePoint {
        point: [end.point[0] + ds * end.tangent[0], end.point[1] + ds * end.tangent[1]],
        tangent: end.tangent,
        normal: end.normal,
        kappa: 0.0,
    }
}

pub(crate) fn segment_distance(x: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ax = [x[0] - a[0], x[1] - a[1]];
    let l2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if l2 > 0.0 { ((ax[0] * ab[0] + ax[1] * ab[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    ((ax[0] - t * ab[0]).powi(2) + (ax[1] - t * ab[1]).powi(2)).sqrt()
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    let d1 = orient(r, s, p);
    let d2 = orient(r, s, q);
    let d3 = orient(p, q, r);
    let d4 = orient(p, q, s);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], c: [f64; 2], d: f64| {
        d == 0.0 && c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    on(r, s, p, d1) || on(r, s, q, d2) || on(p, q, r, d3) || on(p, q, s, d4)
}

fn check_simple_polyline(points: &[[f64; 2]]) -> Result<()> {
    for (i, w) in points.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(Error::Geometry(format!("repeated point at index {i}")));
        }
    }
    let n = points.len() - 1;
    for i in 0..n {
        for j in (i + 2)..n {
            if segments_cross(points[i], points[i + 1], points[j], points[j + 1]) {
                return Err(Error::Geometry(format!("polyline self-intersects: segments {i} and {j}")));
            }
        }
    }
    Ok(())
}

/// Reparametrizes a raw polyline by arc length starting at `s = 0` (not-a-knot spline).
pub fn arclength_reparametrize(points: &[[f64; 2]], side: WallSide) -> Result<BoundaryCurve> {
    BoundaryCurve::from_points(points, side, SplineEnds::NotAKnot, Some(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_derivatives_match_differences() {
        for k in [0.5, 1.0, 2.0] {
            for i in 1..40 {
                let xi = i as f64 / 40.0;
                let h = 1e-5;
                let [_, d, dd] = smooth_step(xi, k);
                let fd = (smooth_step(xi + h, k)[0] - smooth_step(xi - h, k)[0]) / (2.0 * h);
                let fdd = (smooth_step(xi + h, k)[1] - smooth_step(xi - h, k)[1]) / (2.0 * h);
                assert!((d - fd).abs() < 1e-7 * (1.0 + d.abs()), "k={k} xi={xi}");
                assert!((dd - fdd).abs() < 1e-6 * (1.0 + dd.abs()), "k={k} xi={xi}");
            }
        }
        assert_eq!(smooth_step(1e-12, 1.0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn straight_segment() {
        let pts: Vec<[f64; 2]> = (0..6).map(|i| [i as f64 * 0.7, 0.0]).collect();
        let c = arclength_reparametrize(&pts, WallSide::Lower).unwrap();
        for p in c.samples() {
            assert!(p.kappa.abs() < 1e-12);
            assert!((p.tangent[0] - 1.0).abs() < 1e-12 && p.tangent[1].abs() < 1e-12);
            assert!((p.normal[1] + 1.0).abs() < 1e-12);
        }
        assert!((c.curved_length() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn circular_arc_curvature() {
        let r0 = 2.0;
        let pts: Vec<[f64; 2]> = (0..=480)
            .map(|i| {
                let th = -std::f64::consts::FRAC_PI_2 + 1.2 * i as f64 / 480.0;
                [r0 * th.cos(), r0 * th.sin()]
            })
            .collect();
        let c = arclength_reparametrize(&pts, WallSide::Lower).unwrap();
        let l = c.curved_length();
        assert!((l - 2.4).abs() < 1e-6);
        for k in 1..50 {
            let s = l * k as f64 / 50.0;
            let p = c.eval(s);
            assert!((p.kappa - 1.0 / r0).abs() < 1e-6, "s={s} kappa={}", p.kappa);
            let r = (p.point[0].powi(2) + p.point[1].powi(2)).sqrt();
            assert!((r - r0).abs() < 1e-8);
        }
    }

    #[test]
    fn tanh_wall_curvature_at_center() {
        // x2 = tanh(x1): g'(0) = 1, g''(0) = 0, g'''(0) = -2; check nearby points as well
        let pts: Vec<[f64; 2]> = (0..=1600).map(|i| {
            let x = -3.0 + 6.0 * i as f64 / 1600.0;
            [x, x.tanh()]
        }).collect();
        let c = arclength_reparametrize(&pts, WallSide::Lower).unwrap();
        for x in [-0.5, 0.0, 0.3] {
            let s = c.s_at_x1(x).unwrap();
            let p = c.eval(s);
            let th: f64 = x.tanh();
            let g1 = 1.0 - th * th;
            let g2 = -2.0 * th * g1;
            let exact = g2 / (1.0 + g1 * g1).powf(1.5);
            assert!((p.kappa - exact).abs() < 1e-6, "x={x}: {} vs {exact}", p.kappa);
            assert!((p.point[1] - th).abs() < 1e-8);
        }
    }

    #[test]
    fn self_intersection_rejected() {
        let pts = [[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, -1.0], [0.5, 2.0]];
        assert!(matches!(arclength_reparametrize(&pts, WallSide::Lower), Err(Error::Geometry(_))));
        assert!(arclength_reparametrize(&pts[..3], WallSide::Lower).is_err());
    }

    #[test]
    fn graph_wall_samples_are_unit_and_uniform() {
        let g = WallGraph::Step { x_left: -4.0, x_right: 0.0, y_left: 0.5, y_right: 0.0, steepness: 1.0 };
        let c = BoundaryCurve::from_graph(g, WallSide::Lower).unwrap();
        let ds = c.samples()[1].s - c.samples()[0].s;
        for w in c.samples().windows(2) {
            assert!((w[1].s - w[0].s - ds).abs() < 1e-9);
        }
        for p in c.samples() {
            let t = p.tangent[0].hypot(p.tangent[1]);
            let n = p.normal[0].hypot(p.normal[1]);
            assert!((t - 1.0).abs() < 1e-12 && (n - 1.0).abs() < 1e-12);
            assert!((p.tangent[0] * p.normal[0] + p.tangent[1] * p.normal[1]).abs() < 1e-12);
            if p.s <= c.s_flat_left() || p.s >= c.s_flat_right() {
                assert_eq!(p.kappa, 0.0);
            }
        }
        // arc length symmetric about the distorted part, unit speed
        assert!((c.s_flat_left() + c.s_flat_right()).abs() < 1e-12);
        let s = 0.37;
        let h = 1e-6;
        let a = c.eval(s - h).point;
        let b = c.eval(s + h).point;
        assert!((((b[0] - a[0]).hypot(b[1] - a[1])) / (2.0 * h) - 1.0).abs() < 1e-8);
    }
}
