//! Strips made of two straight ends joined by a compact distorted part.

use std::sync::Arc;

use super::chart::CurvilinearChart;
use super::curve::{BoundaryCurve, SplineEnds, WallGraph, WallSide};
use crate::error::{Error, Result};

/// Parameters of the S-bend family: the lower wall drops smoothly by `amplitude` over
/// `length`, the left section has width `c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SBendParams {
    pub amplitude: f64,
    pub length: f64,
    pub steepness: f64,
    pub c0: f64,
}

impl Default for SBendParams {
    fn default() -> Self {
        Self { amplitude: 0.5, length: 4.0, steepness: 1.0, c0: 1.0 }
    }
}

/// Parameters of the constriction family: a bump of height `amplitude` on the lower wall,
/// mirrored on the upper wall when `symmetric`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrictionParams {
    pub amplitude: f64,
    pub length: f64,
    pub steepness: f64,
    pub symmetric: bool,
}

impl Default for ConstrictionParams {
    fn default() -> Self {
        Self { amplitude: 0.25, length: 4.0, steepness: 1.0, symmetric: false }
    }
}

/// Named geometry family.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryKind {
    Straight,
    SBend(SBendParams),
    Constriction(ConstrictionParams),
    Samples,
}

/// Strip with straight ends: `{x1 > 0, 0 < x2 < 1}` on the right and a straight section of
/// width `c0` for `x1 < x_left` on the left.
#[derive(Debug, Clone)]
pub struct StripGeometry {
    pub lower: Arc<BoundaryCurve>,
    pub upper: Arc<BoundaryCurve>,
    pub c0: f64,
    /// `x1` where the distorted part starts (`-length`, or 0 for a straight strip).
    pub x_left: f64,
    /// Height of the lower wall in the left straight section.
    pub left_offset: f64,
    pub kind: GeometryKind,
}

impl StripGeometry {
    /// The straight unit strip.
    pub fn straight() -> Self {
        let lower = BoundaryCurve::from_graph(WallGraph::Flat { height: 0.0 }, WallSide::Lower).expect("flat wall");
        let upper = BoundaryCurve::from_graph(WallGraph::Flat { height: 1.0 }, WallSide::Upper).expect("flat wall");
        Self { lower: Arc::new(lower), upper: Arc::new(upper), c0: 1.0, x_left: 0.0, left_offset: 0.0, kind: GeometryKind::Straight }
    }

    pub fn s_bend(p: SBendParams) -> Result<Self> {
        if !(p.length > 0.0 && p.c0 > 0.0 && p.steepness > 0.0) {
            return Err(Error::Parameter(format!("invalid s_bend parameters {p:?}")));
        }
        let lo = WallGraph::Step { x_left: -p.length, x_right: 0.0, y_left: p.amplitude, y_right: 0.0, steepness: p.steepness };
        let up = WallGraph::Step { x_left: -p.length, x_right: 0.0, y_left: p.amplitude + p.c0, y_right: 1.0, steepness: p.steepness };
        let g = Self {
            lower: Arc::new(BoundaryCurve::from_graph(lo, WallSide::Lower)?),
            upper: Arc::new(BoundaryCurve::from_graph(up, WallSide::Upper)?),
            c0: p.c0,
            x_left: -p.length,
            left_offset: p.amplitude,
            kind: GeometryKind::SBend(p),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn constriction(p: ConstrictionParams) -> Result<Self> {
        if !(p.length > 0.0 && p.steepness > 0.0) {
            return Err(Error::Parameter(format!("invalid constriction parameters {p:?}")));
        }
        let lo = WallGraph::Bump { x_left: -p.length, x_right: 0.0, base: 0.0, amplitude: p.amplitude, steepness: p.steepness };
        let up = if p.symmetric {
            WallGraph::Bump { x_left: -p.length, x_right: 0.0, base: 1.0, amplitude: -p.amplitude, steepness: p.steepness }
        } else {
            WallGraph::Flat { height: 1.0 }
        };
        let g = Self {
            lower: Arc::new(BoundaryCurve::from_graph(lo, WallSide::Lower)?),
            upper: Arc::new(BoundaryCurve::from_graph(up, WallSide::Upper)?),
            c0: 1.0,
            x_left: -p.length,
            left_offset: 0.0,
            kind: GeometryKind::Constriction(p),
        };
        g.validate()?;
        Ok(g)
    }

    /// Walls from sample points ordered by increasing `x1`. Both walls must start at the
    /// same `x1 < 0` and end on `x1 = 0` at heights 0 (lower) and 1 (upper); the ends are
    /// joined to the straight sections with horizontal tangents.
    pub fn from_samples(lower: &[[f64; 2]], upper: &[[f64; 2]]) -> Result<Self> {
        let (Some(l0), Some(l1), Some(u0), Some(u1)) = (lower.first(), lower.last(), upper.first(), upper.last()) else {
            return Err(Error::Geometry("empty wall sample list".into()));
        };
        let tol = 1e-9;
        if l1[0].abs() > tol || l1[1].abs() > tol || u1[0].abs() > tol || (u1[1] - 1.0).abs() > tol {
            return Err(Error::Geometry("walls must end at (0, 0) and (0, 1)".into()));
        }
        if (l0[0] - u0[0]).abs() > tol || l0[0] >= 0.0 {
            return Err(Error::Geometry("walls must start at a common x1 < 0".into()));
        }
        let c0 = u0[1] - l0[1];
        if c0 <= 0.0 {
            return Err(Error::Geometry("left section has non-positive width".into()));
        }
        let ends = SplineEnds::Clamped { start: [1.0, 0.0], end: [1.0, 0.0] };
        let g = Self {
            lower: Arc::new(BoundaryCurve::from_points(lower, WallSide::Lower, ends, None)?),
            upper: Arc::new(BoundaryCurve::from_points(upper, WallSide::Upper, ends, None)?),
            c0,
            x_left: l0[0],
            left_offset: l0[1],
            kind: GeometryKind::Samples,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if !self.lower.is_graph_like() || !self.upper.is_graph_like() {
            return Err(Error::Geometry("walls must be graphs over x1".into()));
        }
        let sep = self.wall_separation();
        if !(sep > 0.0) {
            return Err(Error::Geometry("walls touch or cross".into()));
        }
        Ok(())
    }

    /// Half the arc length of the distorted part of the lower wall.
    pub fn s0(&self) -> f64 {
        0.5 * self.lower.curved_length()
    }

    pub fn length(&self) -> f64 {
        -self.x_left
    }

    pub fn curve(&self, side: WallSide) -> &Arc<BoundaryCurve> {
        match side {
            WallSide::Lower => &self.lower,
            WallSide::Upper => &self.upper,
        }
    }

    /// Wall heights above `x1`.
    pub fn wall_heights(&self, x1: f64) -> Result<(f64, f64)> {
        let lo = self.lower.eval(self.lower.s_at_x1(x1)?).point[1];
        let hi = self.upper.eval(self.upper.s_at_x1(x1)?).point[1];
        Ok((lo, hi))
    }

    pub fn contains(&self, x: [f64; 2], tol: f64) -> bool {
        match self.wall_heights(x[0]) {
            Ok((lo, hi)) => x[1] >= lo - tol && x[1] <= hi + tol,
            Err(_) => false,
        }
    }

    /// Smallest distance from a lower-wall sample to the upper wall.
    pub fn wall_separation(&self) -> f64 {
        let a = self.lower.samples().iter().map(|p| self.upper.distance_to(p.point)).fold(f64::INFINITY, f64::min);
        let b = self.upper.samples().iter().map(|p| self.lower.distance_to(p.point)).fold(f64::INFINITY, f64::min);
        a.min(b)
    }

    /// Chart depth `0.45 min R_z` for one wall, where `R_z = min(1 / kappa+, d_opp / 2)` is
    /// the local interior-disk radius at each wall sample.
    pub fn chart_depth(&self, side: WallSide) -> f64 {
        let (own, other) = match side {
            WallSide::Lower => (&self.lower, &self.upper),
            WallSide::Upper => (&self.upper, &self.lower),
        };
        let r = own
            .samples()
            .iter()
            .map(|p| {
                let curv = if p.kappa > 0.0 { 1.0 / p.kappa } else { f64::INFINITY };
                curv.min(0.5 * other.distance_to(p.point))
            })
            .fold(f64::INFINITY, f64::min);
        0.45 * r
    }

    /// Chart attached to a wall with the default depth.
    pub fn chart(&self, side: WallSide) -> CurvilinearChart {
        CurvilinearChart::new(self.curve(side).clone(), self.chart_depth(side)).expect("positive chart depth")
    }
}
