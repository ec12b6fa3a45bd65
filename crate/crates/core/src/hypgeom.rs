//! Hyperbolic trigonometry in curvature −1.
//!
//! Triangles are described by their three side lengths only. Points of the
//! hyperboloid model `x0² − x1² − x2² = 1, x0 > 0` are used as transient charts
//! when new lengths have to be measured (hexagon construction, midpoint
//! subdivision); no global coordinates are ever stored.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance on the strict triangle inequality.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Side lengths of a geodesic triangle; `len[k]` is the side opposite corner `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleLengths {
    len: [f64; 3],
}

impl TriangleLengths {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_array([a, b, c])
    }

    pub fn from_array(len: [f64; 3]) -> Result<Self> {
        let [a, b, c] = len;
        let degenerate = || Error::DegenerateTriangle(a, b, c);
        if !len.iter().all(|l| l.is_finite() && *l > 0.0) {
            return Err(degenerate());
        }
        let perimeter = a + b + c;
        let slack = DEGENERACY_TOL * perimeter;
        if b + c - a <= slack || a + c - b <= slack || a + b - c <= slack {
            return Err(degenerate());
        }
        Ok(Self { len })
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.len
    }

    /// Interior angle at `corner`, i.e. between the two sides adjacent to it.
    ///
    /// Uses the half-angle form `tan(α/2)² = sinh(s−b)·sinh(s−c) / (sinh s·sinh(s−a))`,
    /// which agrees with the law of cosines but keeps full relative accuracy for
    /// small triangles.
    pub fn angle(&self, corner: usize) -> f64 {
        let a = self.len[corner % 3];
        let b = self.len[(corner + 1) % 3];
        let c = self.len[(corner + 2) % 3];
        let s = 0.5 * (a + b + c);
        let num = ((s - b).sinh() * (s - c).sinh()).sqrt();
        let den = (s.sinh() * (s - a).sinh()).sqrt();
        2.0 * num.atan2(den)
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.angle(0), self.angle(1), self.angle(2)]
    }

    /// Hyperbolic area, equal to the angle defect `π − α − β − γ`.
    ///
    /// Evaluated with the hyperbolic L'Huilier formula so that tiny triangles
    /// do not lose their area to cancellation.
    pub fn area(&self) -> Result<f64> {
        let [a, b, c] = self.len;
        let s = 0.5 * (a + b + c);
        let prod = (0.5 * s).tanh()
            * (0.5 * (s - a)).tanh()
            * (0.5 * (s - b)).tanh()
            * (0.5 * (s - c)).tanh();
        if prod.is_nan() || prod <= 0.0 {
            return Err(Error::DegenerateTriangle(a, b, c));
        }
        Ok(4.0 * prod.sqrt().atan())
    }

    /// Area of the Euclidean triangle with the same side lengths (Kahan's form of Heron).
    pub fn euclidean_area(&self) -> f64 {
        euclidean_area(self.len)
    }
}

/// Kahan's form of Heron's formula for side lengths `len`.
pub fn euclidean_area(mut len: [f64; 3]) -> f64 {
    len.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = len;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

/// Angle opposite the edge selected by `opposite` (0, 1 or 2) of a valid triangle.
pub fn angle_from_lengths(t: &TriangleLengths, opposite: usize) -> f64 {
    t.angle(opposite)
}

pub fn area_from_lengths(t: &TriangleLengths) -> Result<f64> {
    t.area()
}

/// In a right-angled hexagon with alternate sides `a1, a2, a3`, the length of the
/// side opposite `a3` (the one joining `a1` to `a2`).
pub fn hexagon_opposite_side(a1: f64, a2: f64, a3: f64) -> Result<f64> {
    if !(a1 > 0.0 && a2 > 0.0 && a3 > 0.0) || !(a1.is_finite() && a2.is_finite() && a3.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "hexagon sides must be positive and finite, got ({a1}, {a2}, {a3})"
        )));
    }
    let cosh_b = (a3.cosh() + a1.cosh() * a2.cosh()) / (a1.sinh() * a2.sinh());
    if !cosh_b.is_finite() {
        return Err(Error::InvalidInput(format!(
            "hexagon relation overflows for ({a1}, {a2}, {a3})"
        )));
    }
    Ok(cosh_b.acosh())
}

/// Length of the seam joining cuffs 1 and 2 in a pair of pants with cuff lengths
/// `l1, l2, l3`: the common perpendicular between the two cuffs.
pub fn hexagon_seam_length(l1: f64, l2: f64, l3: f64) -> Result<f64> {
    hexagon_opposite_side(0.5 * l1, 0.5 * l2, 0.5 * l3)
}

/// Point on the upper sheet of the hyperboloid `x0² − x1² − x2² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperboloidPoint {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
}

#[inline]
pub fn minkowski_dot(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    p[0] * q[0] - p[1] * q[1] - p[2] * q[2]
}

impl HyperboloidPoint {
    pub const ORIGIN: Self = Self { x0: 1.0, x1: 0.0, x2: 0.0 };

    /// Lifts `(x1, x2)` onto the hyperboloid.
    pub fn from_spatial(x1: f64, x2: f64) -> Self {
        Self { x0: (1.0 + x1 * x1 + x2 * x2).sqrt(), x1, x2 }
    }

    /// Point at distance `r` from the origin in direction `theta`.
    pub fn polar(r: f64, theta: f64) -> Self {
        Self { x0: r.cosh(), x1: r.sinh() * theta.cos(), x2: r.sinh() * theta.sin() }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x0, self.x1, self.x2]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self { x0: a[0], x1: a[1], x2: a[2] }
    }

    pub fn minkowski_norm(&self) -> f64 {
        let a = self.as_array();
        minkowski_dot(&a, &a)
    }

    /// Projects a timelike vector with positive `x0` back onto the hyperboloid.
    pub fn normalized(v: [f64; 3]) -> Self {
        let n = minkowski_dot(&v, &v).sqrt();
        Self::from_array([v[0] / n, v[1] / n, v[2] / n])
    }

    /// Hyperbolic distance, `cosh d = ⟨p, q⟩`, evaluated as `2·asinh(‖p − q‖/2)`
    /// to stay accurate for nearby points.
    pub fn distance(&self, other: &Self) -> f64 {
        let diff = [other.x0 - self.x0, other.x1 - self.x1, other.x2 - self.x2];
        let chord2 = -minkowski_dot(&diff, &diff);
        2.0 * (0.5 * chord2.max(0.0).sqrt()).asinh()
    }

    /// Point at fraction `s ∈ [0, 1]` of the way along the geodesic to `other`.
    pub fn geodesic_toward(&self, other: &Self, s: f64) -> Self {
        let d = self.distance(other);
        if d == 0.0 {
            return *self;
        }
        // sinh-weighted slerp; exact on the geodesic through both points
        let w0 = ((1.0 - s) * d).sinh() / d.sinh();
        let w1 = (s * d).sinh() / d.sinh();
        let p = self.as_array();
        let q = other.as_array();
        Self::normalized([
            w0 * p[0] + w1 * q[0],
            w0 * p[1] + w1 * q[1],
            w0 * p[2] + w1 * q[2],
        ])
    }
}

/// Midpoint of the geodesic segment between two distinct points.
pub fn geodesic_midpoint(p: &HyperboloidPoint, q: &HyperboloidPoint) -> Result<HyperboloidPoint> {
    if p.distance(q) == 0.0 {
        return Err(Error::InvalidInput("midpoint of coincident points".into()));
    }
    let a = p.as_array();
    let b = q.as_array();
    Ok(HyperboloidPoint::normalized([a[0] + b[0], a[1] + b[1], a[2] + b[2]]))
}

/// Places a triangle in the hyperboloid chart: corner 0 at the origin, corner 1
/// on the positive `x1` axis, corner 2 in the upper half (counter-clockwise).
pub fn triangle_chart(t: &TriangleLengths) -> [HyperboloidPoint; 3] {
    let [_, b, c] = t.lengths();
    let alpha = t.angle(0);
    [
        HyperboloidPoint::ORIGIN,
        HyperboloidPoint::polar(c, 0.0),
        HyperboloidPoint::polar(b, alpha),
    ]
}

/// Orthonormal moving frame (position, forward, left) used to trace polygons.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub position: [f64; 3],
    pub forward: [f64; 3],
    pub left: [f64; 3],
}

impl Default for Frame {
    fn default() -> Self {
        Self { position: [1.0, 0.0, 0.0], forward: [0.0, 1.0, 0.0], left: [0.0, 0.0, 1.0] }
    }
}

impl Frame {
    pub fn point(&self) -> HyperboloidPoint {
        HyperboloidPoint::from_array(self.position)
    }

    /// Moves `s` along the forward geodesic.
    pub fn advance(&mut self, s: f64) {
        let (ch, sh) = (s.cosh(), s.sinh());
        let p = self.position;
        let u = self.forward;
        for k in 0..3 {
            self.position[k] = ch * p[k] + sh * u[k];
            self.forward[k] = sh * p[k] + ch * u[k];
        }
    }

    /// Rotates the heading counter-clockwise by `theta`.
    pub fn turn_left(&mut self, theta: f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let u = self.forward;
        let n = self.left;
        for k in 0..3 {
            self.forward[k] = c * u[k] + s * n[k];
            self.left[k] = -s * u[k] + c * n[k];
        }
    }
}

/// Corners of the right-angled hexagon whose sides, counter-clockwise from the
/// origin, have the given lengths. The first side starts at the origin heading
/// along `x1`.
pub fn right_angled_hexagon(sides: [f64; 6]) -> [HyperboloidPoint; 6] {
    let mut frame = Frame::default();
    let mut corners = [HyperboloidPoint::ORIGIN; 6];
    for (k, side) in sides.iter().enumerate() {
        corners[k] = frame.point();
        frame.advance(*side);
        frame.turn_left(0.5 * PI);
    }
    corners
}
