//! Poincaré disk model of the hyperbolic plane.
//!
//! The metric is conformal, `g = λ(p)² · (dx² + dy²)` with
//! `λ(p) = 2 / (1 − |p|²)`, so only the scale factor is stored. Möbius maps
//! are written directly on `(x, y)` pairs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Points closer than this to the unit circle are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-12;

/// Point of the open unit disk.
///
/// Carries `1 − |z|²` alongside the coordinates so that points near the
/// boundary keep a relatively accurate metric factor through Möbius maps.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(into = "[f64; 2]", try_from = "[f64; 2]")]
pub struct DiskPoint {
    x: f64,
    y: f64,
    defect: f64,
}

pub const ORIGIN: DiskPoint = DiskPoint {
    x: 0.0,
    y: 0.0,
    defect: 1.0,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `1 − x² − y²` with compensated arithmetic.
fn defect_of(x: f64, y: f64) -> f64 {
    let (xx, yy) = (x * x, y * y);
    let (ex, ey) = (x.mul_add(x, -xx), y.mul_add(y, -yy));
    let (s1, e1) = two_sum(1.0, -xx);
    let (s2, e2) = two_sum(s1, -yy);
    s2 + ((e1 + e2) - (ex + ey))
}

impl DiskPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let r2 = x * x + y * y;
        if !(r2.is_finite() && r2 < 1.0 - BOUNDARY_MARGIN) {
            return Err(GeomError::OutsideDisk { x, y });
        }
        Ok(Self {
            x,
            y,
            defect: defect_of(x, y),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// `1 − |z|²`.
    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl PartialEq for DiskPoint {
    fn eq(&self, other: &Self) -> bool {
        self.x == other.x && self.y == other.y
    }
}

impl From<DiskPoint> for [f64; 2] {
    fn from(p: DiskPoint) -> Self {
        p.coords()
    }
}

impl TryFrom<[f64; 2]> for DiskPoint {
    type Error = GeomError;

    fn try_from(c: [f64; 2]) -> Result<Self> {
        DiskPoint::new(c[0], c[1])
    }
}

/// Tangent vector at a disk point, stored by its Euclidean components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HTangent {
    pub base: DiskPoint,
    pub vx: f64,
    pub vy: f64,
}

impl HTangent {
    pub fn new(base: DiskPoint, vx: f64, vy: f64) -> Self {
        Self { base, vx, vy }
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.vx.hypot(self.vy)
    }

    pub fn hyp_norm(&self) -> f64 {
        metric_scale(&self.base) * self.euclidean_norm()
    }

    /// Rescales to hyperbolic length one; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        let n = self.hyp_norm();
        if n == 0.0 {
            return *self;
        }
        Self::new(self.base, self.vx / n, self.vy / n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MobiusDirection {
    /// `z ↦ (z − p) / (1 − p̄ z)`, sending `p` to the origin.
    ToOrigin,
    /// `z ↦ (z + p) / (1 + p̄ z)`, sending the origin to `p`.
    FromOrigin,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusIsometry {
    pub p: DiskPoint,
    pub direction: MobiusDirection,
}

impl MobiusIsometry {
    pub fn to_origin(p: DiskPoint) -> Self {
        Self {
            p,
            direction: MobiusDirection::ToOrigin,
        }
    }

    pub fn from_origin(p: DiskPoint) -> Self {
        Self {
            p,
            direction: MobiusDirection::FromOrigin,
        }
    }

    pub fn inverse(&self) -> Self {
        let direction = match self.direction {
            MobiusDirection::ToOrigin => MobiusDirection::FromOrigin,
            MobiusDirection::FromOrigin => MobiusDirection::ToOrigin,
        };
        Self { p: self.p, direction }
    }

    fn sign(&self) -> f64 {
        match self.direction {
            MobiusDirection::ToOrigin => -1.0,
            MobiusDirection::FromOrigin => 1.0,
        }
    }

    /// Returns the image of `z`, the complex derivative there, and `|1 + q̄ z|²`.
    fn eval(&self, z: [f64; 2]) -> ([f64; 2], [f64; 2], f64) {
        let s = self.sign();
        let p = [s * self.p.x, s * self.p.y];
        // With q = ±p the map is (z + q) / (1 + q̄ z).
        let num = [z[0] + p[0], z[1] + p[1]];
        let qbar_z = cmul([p[0], -p[1]], z);
        let den = [1.0 + qbar_z[0], qbar_z[1]];
        let w = cdiv(num, den);
        let dw = cdiv([self.p.defect, 0.0], cmul(den, den));
        (w, dw, den[0] * den[0] + den[1] * den[1])
    }
}

fn cmul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]]
}

fn cdiv(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let d = b[0] * b[0] + b[1] * b[1];
    [
        (a[0] * b[0] + a[1] * b[1]) / d,
        (a[1] * b[0] - a[0] * b[1]) / d,
    ]
}

/// Conformal factor `λ(p) = 2 / (1 − |p|²)`.
pub fn metric_scale(p: &DiskPoint) -> f64 {
    2.0 / p.defect
}

pub fn hyp_inner(u: &HTangent, v: &HTangent) -> Result<f64> {
    if u.base != v.base {
        return Err(GeomError::MismatchedBase);
    }
    let lam = metric_scale(&u.base);
    Ok(lam * lam * (u.vx * v.vx + u.vy * v.vy))
}

/// Hyperbolic distance.
///
/// Evaluated as `2 asinh(|P − Q| / sqrt((1 − |P|²)(1 − |Q|²)))`, which equals
/// the arccosh form but keeps full precision for nearby points.
pub fn hyp_distance(p: &DiskPoint, q: &DiskPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let chord = dx.hypot(dy);
    let denom = (p.defect * q.defect).sqrt();
    2.0 * (chord / denom).asinh()
}

/// The textbook arccosh form, kept for cross-checking.
pub fn hyp_distance_acosh(p: &DiskPoint, q: &DiskPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let arg = 1.0 + 2.0 * (dx * dx + dy * dy) / (p.defect * q.defect);
    arg.acosh()
}

pub fn mobius_apply(m: &MobiusIsometry, z: &DiskPoint) -> DiskPoint {
    let (w, _, den2) = m.eval(z.coords());
    // 1 − |T z|² = (1 − |p|²)(1 − |z|²) / |1 + q̄ z|².
    let defect = m.p.defect * z.defect / den2;
    let r2 = w[0] * w[0] + w[1] * w[1];
    // |w| < 1 holds analytically; rounding can only push it to the margin.
    let s = if r2 < 1.0 - BOUNDARY_MARGIN {
        1.0
    } else {
        (1.0 - 2.0 * BOUNDARY_MARGIN).sqrt() / r2.sqrt()
    };
    DiskPoint {
        x: w[0] * s,
        y: w[1] * s,
        defect,
    }
}

/// Differential of the Möbius map applied to a tangent vector.
pub fn mobius_pushforward(m: &MobiusIsometry, t: &HTangent) -> HTangent {
    let (_, dw, _) = m.eval(t.base.coords());
    let v = cmul(dw, [t.vx, t.vy]);
    HTangent::new(mobius_apply(m, &t.base), v[0], v[1])
}

/// Largest relative change, under `m`, of the distance `d(p, q)` and of the
/// hyperbolic length of `t`. Both are zero for an isometry.
pub fn isometry_residual(m: &MobiusIsometry, p: &DiskPoint, q: &DiskPoint, t: &HTangent) -> f64 {
    let d0 = hyp_distance(p, q);
    let d1 = hyp_distance(&mobius_apply(m, p), &mobius_apply(m, q));
    let n0 = t.hyp_norm();
    let n1 = mobius_pushforward(m, t).hyp_norm();
    ((d1 - d0).abs() / d0.max(1.0)).max((n1 - n0).abs() / n0.max(1.0))
}

/// Hyperbolic area of the disk `|z| ≤ t` about the origin.
///
/// Composite Simpson in the radius, uniform trapezoid in the angle.
/// `resolution` is the number of radial intervals (rounded up to even).
pub fn disk_area(t: f64, resolution: usize) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(GeomError::InvalidParameter(format!(
            "disk radius must lie in (0, 1), got {t}"
        )));
    }
    if resolution == 0 {
        return Err(GeomError::InvalidParameter("resolution must be positive".into()));
    }
    let n = resolution + resolution % 2;
    let h = t / n as f64;
    let f = |r: f64| {
        let d = 1.0 - r * r;
        4.0 * r / (d * d)
    };
    let mut radial = f(0.0) + f(t);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        radial += w * f(k as f64 * h);
    }
    radial *= h / 3.0;
    // The integrand does not depend on the angle; the periodic trapezoid rule
    // is exact for it.
    let n_theta = 64;
    let dtheta = 2.0 * PI / n_theta as f64;
    Ok((0..n_theta).map(|_| radial * dtheta).sum())
}

/// Closed form `2π (2 / (1 − t²) − 2)`.
pub fn disk_area_closed_form(t: f64) -> f64 {
    2.0 * PI * (2.0 / (1.0 - t * t) - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> DiskPoint {
        DiskPoint::new(x, y).unwrap()
    }

    #[test]
    fn metric_scale_values() {
        assert_eq!(metric_scale(&ORIGIN), 2.0);
        assert!((metric_scale(&pt(0.5, 0.0)) - 8.0 / 3.0).abs() < 1e-15);
        assert!((metric_scale(&pt(0.0, 0.8)) - 2.0 / 0.36).abs() < 1e-14);
    }

    #[test]
    fn boundary_points_are_rejected() {
        assert!(DiskPoint::new(1.0, 0.0).is_err());
        assert!(DiskPoint::new(0.6, 0.8).is_err());
        assert!(DiskPoint::new(1.0 - 1e-13, 0.0).is_err());
        assert!(DiskPoint::new(f64::NAN, 0.0).is_err());
        assert!(DiskPoint::new(0.999, 0.0).is_ok());
    }

    #[test]
    fn inner_product_examples() {
        let e1 = HTangent::new(ORIGIN, 1.0, 0.0);
        assert_eq!(hyp_inner(&e1, &e1).unwrap(), 4.0);
        let p = pt(0.3, -0.2);
        let a = HTangent::new(p, 1.0, 0.0);
        let b = HTangent::new(p, 0.0, 1.0);
        assert_eq!(hyp_inner(&a, &b).unwrap(), 0.0);
        let q = pt(0.5, 0.0);
        let c = HTangent::new(q, 1.0, 0.0);
        assert!((hyp_inner(&c, &c).unwrap() - 64.0 / 9.0).abs() < 1e-13);
        assert_eq!(hyp_inner(&a, &c), Err(GeomError::MismatchedBase));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hyp_distance(&ORIGIN, &ORIGIN), 0.0);
        let d = hyp_distance(&ORIGIN, &pt(0.5, 0.0));
        assert!((d - 3f64.ln()).abs() < 1e-15);
        assert!((d - (5.0f64 / 3.0).acosh()).abs() < 1e-15);
        let (p, q) = (pt(0.1, 0.7), pt(-0.4, 0.2));
        assert!((hyp_distance(&p, &q) - hyp_distance_acosh(&p, &q)).abs() < 1e-13);
    }

    #[test]
    fn mobius_examples() {
        let p = pt(0.5, 0.0);
        let to = MobiusIsometry::to_origin(p);
        let from = MobiusIsometry::from_origin(p);
        let o = mobius_apply(&to, &p);
        assert!(o.x().abs() < 1e-15 && o.y().abs() < 1e-15);
        let back = mobius_apply(&from, &ORIGIN);
        assert_eq!(back, p);
        let img = mobius_apply(&to, &ORIGIN);
        assert_eq!(img.coords(), [-0.5, 0.0]);
    }

    #[test]
    fn identity_parameter_leaves_tangents_alone() {
        let m = MobiusIsometry::to_origin(ORIGIN);
        let t = HTangent::new(pt(0.2, 0.4), 0.3, -0.7);
        let s = mobius_pushforward(&m, &t);
        assert_eq!(s, t);
    }

    #[test]
    fn disk_area_matches_closed_form() {
        for &t in &[0.3, 0.5, 0.9] {
            let a = disk_area(t, 2000).unwrap();
            let c = disk_area_closed_form(t);
            assert!(((a - c) / c).abs() < 1e-9, "t={t}: {a} vs {c}");
        }
        let half = disk_area(0.5f64.sqrt(), 4000).unwrap();
        assert!((half - 4.0 * PI).abs() < 1e-8);
        // 2π(2/(1−t²) − 2) = 2π  ⇔  t² = 1/3
        let third = disk_area(1.0 / 3f64.sqrt(), 4000).unwrap();
        assert!((third - 2.0 * PI).abs() < 1e-8);
        assert!(disk_area(1.0, 10).is_err());
        assert!(disk_area(0.0, 10).is_err());
    }

    #[test]
    fn unit_tangent_has_euclidean_length_at_most_half() {
        for &(x, y) in &[(0.0, 0.0), (0.5, 0.1), (-0.9, 0.3), (0.0, -0.99)] {
            let p = pt(x, y);
            let t = HTangent::new(p, 0.3, 0.8).normalized();
            let e = t.euclidean_norm();
            assert!((e - (1.0 - p.norm_sq()) / 2.0).abs() < 1e-15);
            assert!(e <= 0.5);
        }
    }
}
