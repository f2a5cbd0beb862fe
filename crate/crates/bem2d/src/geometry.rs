//! Boundary geometry: parametric segments and the curves built from them.
//!
//! A [`BoundaryCurve`] is an ordered list of [`SegmentMap`]s, each a smooth
//! injective map from the reference interval `[0, 1]` into the plane.
//! Consecutive segments share endpoints; corners of polygonal boundaries are
//! always segment joints, so meshes (which subdivide segments) automatically
//! keep corners as nodes.
//!
//! All built-in curves are scaled so that their diameter stays at or below
//! `1/2`.  The single-layer operator of the Laplacian is only elliptic when
//! the boundary has logarithmic capacity below one; keeping the diameter
//! under one half leaves a comfortable margin, and the applied scale is
//! recorded on the curve so experiment logs can report it.

use crate::error::Error;
use crate::quadrature::gauss_legendre;

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

#[derive(Clone, Debug)]
enum SegmentKind {
    Line { a: Point2, b: Point2 },
    /// Circular arc, traversed from `angle0` to `angle1` (radians).
    Arc {
        center: Point2,
        radius: f64,
        angle0: f64,
        angle1: f64,
    },
}

/// Smooth parametric map from `[0, 1]` onto one piece of the boundary.
#[derive(Clone, Debug)]
pub struct SegmentMap {
    kind: SegmentKind,
}

impl SegmentMap {
    pub fn line(a: Point2, b: Point2) -> Self {
        SegmentMap {
            kind: SegmentKind::Line { a, b },
        }
    }

    pub fn arc(center: Point2, radius: f64, angle0: f64, angle1: f64) -> Self {
        SegmentMap {
            kind: SegmentKind::Arc {
                center,
                radius,
                angle0,
                angle1,
            },
        }
    }

    /// Parameter interval; always the reference interval.
    pub fn param_interval(&self) -> (f64, f64) {
        (0.0, 1.0)
    }

    pub fn position(&self, t: f64) -> Point2 {
        match &self.kind {
            SegmentKind::Line { a, b } => *a + (*b - *a) * t,
            SegmentKind::Arc {
                center,
                radius,
                angle0,
                angle1,
            } => {
                let ang = angle0 + (angle1 - angle0) * t;
                *center + Point2::new(ang.cos(), ang.sin()) * *radius
            }
        }
    }

    /// Derivative of [`Self::position`] with respect to the parameter
    /// (not normalized).
    pub fn tangent(&self, t: f64) -> Point2 {
        match &self.kind {
            SegmentKind::Line { a, b } => *b - *a,
            SegmentKind::Arc {
                center: _,
                radius,
                angle0,
                angle1,
            } => {
                let span = angle1 - angle0;
                let ang = angle0 + span * t;
                Point2::new(-ang.sin(), ang.cos()) * (*radius * span)
            }
        }
    }

    /// `|position'(t)|`, the metric factor between parameter and arclength.
    pub fn speed(&self, t: f64) -> f64 {
        self.tangent(t).norm()
    }

    /// Signed curvature (positive where the curve bends counterclockwise).
    pub fn curvature(&self, _t: f64) -> f64 {
        match &self.kind {
            SegmentKind::Line { .. } => 0.0,
            SegmentKind::Arc {
                radius, angle0, angle1, ..
            } => {
                if angle1 > angle0 {
                    1.0 / radius
                } else {
                    -1.0 / radius
                }
            }
        }
    }
}

/// Which of the built-in boundaries a curve is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveFamily {
    Circle,
    LShape,
    Slit,
}

/// An oriented boundary curve: ordered segments, closed flag, recorded scale.
#[derive(Clone, Debug)]
pub struct BoundaryCurve {
    segments: Vec<SegmentMap>,
    closed: bool,
    scale: f64,
    family: CurveFamily,
}

/// Default scales that put each built-in curve at diameter exactly or
/// safely below 1/2.
pub const CIRCLE_DEFAULT_SCALE_TIMES_RADIUS: f64 = 0.25;
pub const LSHAPE_DEFAULT_SCALE: f64 = 0.15;
pub const SLIT_DEFAULT_SCALE: f64 = 0.5;

impl BoundaryCurve {
    /// Circle of the given radius, scaled by the default factor
    /// `0.25 / radius` so the effective diameter is `1/2`.
    pub fn circle(radius: f64) -> Result<Self, Error> {
        Self::circle_scaled(radius, CIRCLE_DEFAULT_SCALE_TIMES_RADIUS / radius)
    }

    /// Circle of radius `radius * scale` centred at the origin, split into
    /// four quarter arcs (counterclockwise, starting at angle 0).
    pub fn circle_scaled(radius: f64, scale: f64) -> Result<Self, Error> {
        check_positive("radius", radius)?;
        check_positive("scale", scale)?;
        let r = radius * scale;
        check_diameter(2.0 * r)?;
        let c = Point2::new(0.0, 0.0);
        let q = std::f64::consts::FRAC_PI_2;
        let segments = (0..4)
            .map(|i| SegmentMap::arc(c, r, i as f64 * q, (i + 1) as f64 * q))
            .collect();
        Ok(BoundaryCurve {
            segments,
            closed: true,
            scale,
            family: CurveFamily::Circle,
        })
    }

    /// Rotationally symmetric L-shaped hexagon with a reentrant (270 degree)
    /// corner at the origin, traversed counterclockwise.
    pub fn lshape() -> Result<Self, Error> {
        Self::lshape_scaled(LSHAPE_DEFAULT_SCALE)
    }

    pub fn lshape_scaled(scale: f64) -> Result<Self, Error> {
        check_positive("scale", scale)?;
        let verts = [
            (0.0, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
            (0.0, -1.0),
        ];
        check_diameter(2.0 * std::f64::consts::SQRT_2 * scale)?;
        let pts: Vec<Point2> = verts
            .iter()
            .map(|&(x, y)| Point2::new(x * scale, y * scale))
            .collect();
        let segments = (0..6)
            .map(|i| SegmentMap::line(pts[i], pts[(i + 1) % 6]))
            .collect();
        Ok(BoundaryCurve {
            segments,
            closed: true,
            scale,
            family: CurveFamily::LShape,
        })
    }

    /// Open straight slit from `(-1/2, 0)` to `(1/2, 0)`, scaled about the
    /// origin.
    pub fn slit() -> Result<Self, Error> {
        Self::slit_scaled(SLIT_DEFAULT_SCALE)
    }

    pub fn slit_scaled(scale: f64) -> Result<Self, Error> {
        check_positive("scale", scale)?;
        check_diameter(scale)?;
        let a = Point2::new(-0.5 * scale, 0.0);
        let b = Point2::new(0.5 * scale, 0.0);
        Ok(BoundaryCurve {
            segments: vec![SegmentMap::line(a, b)],
            closed: false,
            scale,
            family: CurveFamily::Slit,
        })
    }

    pub fn segments(&self) -> &[SegmentMap] {
        &self.segments
    }

    pub fn segment(&self, i: usize) -> &SegmentMap {
        &self.segments[i]
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn family(&self) -> CurveFamily {
        self.family
    }

    /// Unit normal at parameter `t` of segment `seg`.
    ///
    /// For closed counterclockwise curves this is the exterior normal
    /// (the unit tangent rotated clockwise).  Open arcs have no interior;
    /// there the convention is the counterclockwise rotation, which makes
    /// the normal of the built-in slit point in `+y`.
    pub fn normal(&self, seg: usize, t: f64) -> Point2 {
        let tau = self.segments[seg].tangent(t);
        let n = tau.norm();
        if self.closed {
            Point2::new(tau.y / n, -tau.x / n)
        } else {
            Point2::new(-tau.y / n, tau.x / n)
        }
    }

    /// Arclength of the parameter interval `[t0, t1]` of segment `seg`,
    /// computed by composite Gauss quadrature, refined until the value is
    /// stable to a relative `1e-13`.
    pub fn arclength(&self, seg: usize, t0: f64, t1: f64) -> f64 {
        let rule = gauss_legendre(16);
        let map = &self.segments[seg];
        let mut pieces = 1usize;
        let mut prev = f64::INFINITY;
        loop {
            let mut total = 0.0;
            for p in 0..pieces {
                let a = t0 + (t1 - t0) * p as f64 / pieces as f64;
                let b = t0 + (t1 - t0) * (p + 1) as f64 / pieces as f64;
                total += rule.integrate_on(a, b, |t| map.speed(t));
            }
            if (total - prev).abs() <= 1e-13 * total.abs() || pieces >= 64 {
                return total;
            }
            prev = total;
            pieces *= 2;
        }
    }

    /// Total arclength of the curve.
    pub fn total_arclength(&self) -> f64 {
        (0..self.segments.len())
            .map(|s| self.arclength(s, 0.0, 1.0))
            .sum()
    }

    /// Diameter of the curve (max distance between boundary points),
    /// estimated from a parameter sampling; exact for the built-ins.
    pub fn diameter(&self) -> f64 {
        let mut pts = Vec::new();
        for seg in &self.segments {
            for i in 0..=16 {
                pts.push(seg.position(i as f64 / 16.0));
            }
        }
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                d = d.max(pts[i].dist(pts[j]));
            }
        }
        d
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), Error> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidGeometry(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_diameter(diam: f64) -> Result<(), Error> {
    if diam >= 1.0 {
        return Err(Error::InvalidGeometry(format!(
            "scaled diameter {diam} reaches 1; single-layer ellipticity needs diameter < 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn circle_default_scale_gives_quarter_radius() {
        let c = BoundaryCurve::circle(1.0).unwrap();
        assert_eq!(c.segments().len(), 4);
        assert!(c.is_closed());
        assert_relative_eq!(c.total_arclength(), 2.0 * std::f64::consts::PI * 0.25, max_relative = 1e-12);
        assert_relative_eq!(c.diameter(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn circle_scale_override() {
        // radius 0.4 at scale 1: arclength 2*pi*0.4
        let c = BoundaryCurve::circle_scaled(0.4, 1.0).unwrap();
        assert_relative_eq!(c.total_arclength(), 2.0 * std::f64::consts::PI * 0.4, max_relative = 1e-12);
        assert_eq!(c.scale(), 1.0);
        // radius 1, scale 0.25: diameter 1/2
        let c = BoundaryCurve::circle_scaled(1.0, 0.25).unwrap();
        assert_relative_eq!(c.diameter(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(BoundaryCurve::circle(-1.0).is_err());
        assert!(BoundaryCurve::circle(0.0).is_err());
        assert!(BoundaryCurve::circle_scaled(1.0, 0.6).is_err()); // diameter 1.2
        assert!(BoundaryCurve::slit_scaled(-0.5).is_err());
        assert!(BoundaryCurve::lshape_scaled(f64::NAN).is_err());
    }

    #[test]
    fn lshape_shape_and_scale() {
        let c = BoundaryCurve::lshape().unwrap();
        assert_eq!(c.segments().len(), 6);
        assert!(c.is_closed());
        // diameter 2*sqrt(2)*scale < 1 for the default scale
        let d = 2.0 * std::f64::consts::SQRT_2 * LSHAPE_DEFAULT_SCALE;
        assert!(d < 1.0);
        assert_relative_eq!(c.diameter(), d, max_relative = 1e-12);
        // total arclength = 8 * scale
        assert_relative_eq!(c.total_arclength(), 8.0 * LSHAPE_DEFAULT_SCALE, max_relative = 1e-12);
        // segment joints include the reentrant corner at the origin
        let first = c.segment(0).position(0.0);
        assert_relative_eq!(first.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(first.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn circle_normal_points_outward() {
        let c = BoundaryCurve::circle(1.0).unwrap();
        for seg in 0..4 {
            for &t in &[0.1, 0.5, 0.9] {
                let x = c.segment(seg).position(t);
                let n = c.normal(seg, t);
                assert_relative_eq!(n.norm(), 1.0, max_relative = 1e-14);
                // outward normal of a circle about the origin is x/|x|
                assert_relative_eq!(n.x, x.x / x.norm(), epsilon = 1e-13);
                assert_relative_eq!(n.y, x.y / x.norm(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn slit_normal_is_plus_y() {
        let c = BoundaryCurve::slit().unwrap();
        assert!(!c.is_closed());
        let n = c.normal(0, 0.3);
        assert_relative_eq!(n.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(n.y, 1.0, epsilon = 1e-15);
        // endpoints at +-1/4 for the default scale 1/2
        assert_relative_eq!(c.segment(0).position(0.0).x, -0.25, epsilon = 1e-15);
        assert_relative_eq!(c.segment(0).position(1.0).x, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn lshape_normal_on_bottom_edge() {
        // Edge from (-1,-1) to (0,-1) (scaled): exterior normal is -y.
        let c = BoundaryCurve::lshape().unwrap();
        let n = c.normal(4, 0.5);
        assert_relative_eq!(n.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(n.y, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn arclength_partial_arc() {
        let c = BoundaryCurve::circle(1.0).unwrap();
        // Half of a quarter arc of the radius-1/4 circle: pi/16... times radius
        let got = c.arclength(0, 0.25, 0.75);
        assert_relative_eq!(got, 0.25 * std::f64::consts::FRAC_PI_2 * 0.5, max_relative = 1e-12);
    }

    #[test]
    fn tangent_consistency_with_finite_differences() {
        let c = BoundaryCurve::lshape().unwrap();
        let circle = BoundaryCurve::circle(1.0).unwrap();
        for (curve, seg) in [(&c, 2usize), (&circle, 1usize)] {
            let t = 0.37;
            let h = 1e-6;
            let fd = (curve.segment(seg).position(t + h) - curve.segment(seg).position(t - h)) * (0.5 / h);
            let tan = curve.segment(seg).tangent(t);
            assert_relative_eq!(fd.x, tan.x, epsilon = 1e-8);
            assert_relative_eq!(fd.y, tan.y, epsilon = 1e-8);
        }
    }
}
