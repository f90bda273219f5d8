//! Parametric immersed surfaces and their pointwise extrinsic geometry.

pub mod expr;
pub mod geometry;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::dual::{Dual, Jet3, Real, SecondJet};
use crate::error::{GeomError, Result};
pub use expr::Expr;
pub use geometry::{FirstFundamentalForm, Forms, PrincipalFrame, SecondFundamentalForm};

/// `|φ_u × φ_v|` below this counts as a failed immersion.
pub const IMMERSION_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ParamPoint {
    pub u: f64,
    pub v: f64,
}

impl ParamPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Rect {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        let ok = [u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite())
            && u_min < u_max
            && v_min < v_max;
        if !ok {
            return Err(GeomError::InvalidParameter(format!(
                "degenerate rectangle [{u_min}, {u_max}] x [{v_min}, {v_max}]"
            )));
        }
        Ok(Self {
            u_min,
            u_max,
            v_min,
            v_max,
        })
    }

    pub fn contains(&self, p: ParamPoint) -> bool {
        p.u >= self.u_min && p.u <= self.u_max && p.v >= self.v_min && p.v <= self.v_max
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.u_min >= self.u_min
            && other.u_max <= self.u_max
            && other.v_min >= self.v_min
            && other.v_max <= self.v_max
    }
}

/// Which immersion a [`SurfaceImmersion`] evaluates.
#[derive(Clone, Debug)]
pub enum SurfaceKind {
    /// Tractroid `(sech s cos w, sech s sin w, s − tanh s)` with
    /// `s = u (1 + warp·sin v)` and `w = v + twist·s`.
    ///
    /// Nonzero twist and warp tilt and bend the coordinate lines away from
    /// the curvature lines, so no frame quantity is trivially constant along
    /// a grid axis.
    Pseudosphere { twist: f64, warp: f64 },
    /// Dini's helicoid-like surface, curvature `−1 / (a² + b²)`.
    Dini { a: f64, b: f64 },
    /// `r (sin u cos v, sin u sin v, cos u)`; `φ_u × φ_v` points outward.
    Sphere { radius: f64 },
    /// `(u, v, 0)`.
    Plane,
    /// Analytic patch given by expressions in `u`, `v`.
    Custom(Arc<[Expr; 3]>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DerivativeSource {
    /// Hand-written partials when the surface has them, otherwise AD.
    Auto,
    /// Always nested dual numbers.
    AutoDiff,
}

#[derive(Clone, Debug)]
pub struct SurfaceImmersion {
    kind: SurfaceKind,
    domain: Rect,
    scale: f64,
    derivatives: DerivativeSource,
}

/// Pointwise principal data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TangentVector {
    /// Parameter-coordinate components.
    pub coords: [f64; 2],
    /// Ambient components.
    pub ambient: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShapeSpectrum {
    pub kappa1: f64,
    pub kappa2: f64,
    pub dir1: TangentVector,
    pub dir2: TangentVector,
    pub alpha: f64,
}

/// Orthonormal frame at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FramePoint {
    pub e1: TangentVector,
    pub e2: TangentVector,
    pub normal: [f64; 3],
}

/// Asymptotic directions with the coframe-dual pair at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticFrame {
    pub big_e1: TangentVector,
    pub big_e2: TangentVector,
    /// `η¹`, `η²` as coefficients against `θ¹, θ²`.
    pub eta1: [f64; 2],
    pub eta2: [f64; 2],
    pub alpha: f64,
}

impl SurfaceImmersion {
    pub fn new(kind: SurfaceKind, domain: Rect) -> Self {
        Self {
            kind,
            domain,
            scale: 1.0,
            derivatives: DerivativeSource::Auto,
        }
    }

    /// Tractroid patch on `[u_cut, 3] × [−π, π]`. Needs `|warp| ≤ 1/2`
    /// so the warped chart stays clear of the singular edge.
    pub fn pseudosphere(u_cut: f64, twist: f64, warp: f64) -> Result<Self> {
        if !(u_cut > 0.0 && u_cut < 3.0) {
            return Err(GeomError::InvalidParameter(format!(
                "pseudosphere u_cut must lie in (0, 3), got {u_cut}"
            )));
        }
        if !(twist.is_finite() && warp.abs() <= 0.5) {
            return Err(GeomError::InvalidParameter(format!(
                "pseudosphere needs finite twist and |warp| <= 1/2, got twist = {twist}, warp = {warp}"
            )));
        }
        Ok(Self::new(
            SurfaceKind::Pseudosphere { twist, warp },
            Rect::new(u_cut, 3.0, -PI, PI)?,
        ))
    }

    /// Dini patch on `[−π, π] × [0.15, 1.4]`, staying below the cusp at `v = π/2`.
    pub fn dini(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b.is_finite()) {
            return Err(GeomError::InvalidParameter(format!(
                "Dini constants need a > 0, got a = {a}, b = {b}"
            )));
        }
        Ok(Self::new(SurfaceKind::Dini { a, b }, Rect::new(-PI, PI, 0.15, 1.4)?))
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeomError::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self::new(
            SurfaceKind::Sphere { radius },
            Rect::new(0.1, PI - 0.1, -PI, PI)?,
        ))
    }

    pub fn plane() -> Self {
        Self::new(
            SurfaceKind::Plane,
            Rect::new(-1.0, 1.0, -1.0, 1.0).expect("static rectangle"),
        )
    }

    pub fn custom(x: &str, y: &str, z: &str, domain: Rect) -> Result<Self> {
        let exprs = [Expr::parse(x)?, Expr::parse(y)?, Expr::parse(z)?];
        Ok(Self::new(SurfaceKind::Custom(Arc::new(exprs)), domain))
    }

    pub fn with_domain(mut self, domain: Rect) -> Self {
        self.domain = domain;
        self
    }

    pub fn with_derivatives(mut self, source: DerivativeSource) -> Self {
        self.derivatives = source;
        self
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn domain(&self) -> Rect {
        self.domain
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Composes with the dilation `x ↦ k x` of ambient space.
    pub fn dilate(&self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeomError::InvalidParameter(format!(
                "dilation factor must be positive, got {k}"
            )));
        }
        let mut out = self.clone();
        out.scale *= k;
        Ok(out)
    }

    /// Position, generic over the scalar so it can be differentiated.
    pub fn position<T: Real>(&self, u: T, v: T) -> [T; 3] {
        let p = match &self.kind {
            SurfaceKind::Pseudosphere { twist, warp } => {
                let s = u * (T::one() + T::cst(*warp) * v.sin());
                let w = v + T::cst(*twist) * s;
                let r = s.cosh().recip();
                [r * w.cos(), r * w.sin(), s - s.tanh()]
            }
            SurfaceKind::Dini { a, b } => {
                let (a, b) = (T::cst(*a), T::cst(*b));
                let sv = v.sin();
                let half = v * T::cst(0.5);
                [
                    a * u.cos() * sv,
                    a * u.sin() * sv,
                    a * (v.cos() + half.tan().ln()) + b * u,
                ]
            }
            SurfaceKind::Sphere { radius } => {
                let r = T::cst(*radius);
                let su = u.sin();
                [r * su * v.cos(), r * su * v.sin(), r * u.cos()]
            }
            SurfaceKind::Plane => [u, v, T::zero()],
            SurfaceKind::Custom(e) => [e[0].eval(u, v), e[1].eval(u, v), e[2].eval(u, v)],
        };
        let k = T::cst(self.scale);
        [k * p[0], k * p[1], k * p[2]]
    }

    pub fn has_analytic_partials(&self) -> bool {
        matches!(
            self.kind,
            SurfaceKind::Pseudosphere { .. } | SurfaceKind::Sphere { .. } | SurfaceKind::Plane
        )
    }

    /// All partials up to order three via nested dual numbers.
    pub fn jet_ad(&self, p: ParamPoint) -> Jet3 {
        Jet3::from_ad(p.u, p.v, |u, v| self.position(u, v))
    }

    /// Hand-written partials up to order three, when the surface has them.
    pub fn jet_analytic(&self, p: ParamPoint) -> Option<Jet3> {
        let jet = match &self.kind {
            SurfaceKind::Pseudosphere { twist, warp } => {
                let s0 = p.u * (1.0 + warp * p.v.sin());
                let outer = tractroid_jet(s0, p.v, *twist);
                let (sn, cs) = p.v.sin_cos();
                let (b, u) = (*warp, p.u);
                Jet3::reparametrize_first(
                    &outer,
                    [s0, 1.0 + b * sn, u * b * cs, 0.0, b * cs, -u * b * sn, 0.0, 0.0, -b * sn, -u * b * cs],
                )
            }
            SurfaceKind::Sphere { radius } => sphere_jet(p.u, p.v, *radius),
            SurfaceKind::Plane => Jet3 {
                p: [p.u, p.v, 0.0],
                u: [1.0, 0.0, 0.0],
                v: [0.0, 1.0, 0.0],
                uu: [0.0; 3],
                uv: [0.0; 3],
                vv: [0.0; 3],
                uuu: [0.0; 3],
                uuv: [0.0; 3],
                uvv: [0.0; 3],
                vvv: [0.0; 3],
            },
            _ => return None,
        };
        Some(scale_jet(jet, self.scale))
    }

    /// Jet from the configured derivative source, with a domain check.
    pub fn jet(&self, p: ParamPoint) -> Result<Jet3> {
        self.check_domain(p)?;
        Ok(self.jet_unchecked(p))
    }

    fn jet_unchecked(&self, p: ParamPoint) -> Jet3 {
        match self.derivatives {
            DerivativeSource::Auto => self.jet_analytic(p).unwrap_or_else(|| self.jet_ad(p)),
            DerivativeSource::AutoDiff => self.jet_ad(p),
        }
    }

    /// Second-order jet only; cheaper than [`Self::jet`] for AD surfaces.
    pub fn second_jet(&self, p: ParamPoint) -> Result<SecondJet<f64>> {
        self.check_domain(p)?;
        if self.derivatives == DerivativeSource::Auto {
            if let Some(j) = self.jet_analytic(p) {
                return Ok(j.second());
            }
        }
        type D2 = Dual<Dual<f64>>;
        let u: D2 = Dual::var_u(Dual::var_u(p.u));
        let v: D2 = Dual::var_v(Dual::var_v(p.v));
        let r = self.position(u, v);
        Ok(SecondJet {
            u: r.map(|x| x.du.re),
            v: r.map(|x| x.dv.re),
            uu: r.map(|x| x.du.du),
            uv: r.map(|x| x.du.dv),
            vv: r.map(|x| x.dv.dv),
        })
    }

    fn check_domain(&self, p: ParamPoint) -> Result<()> {
        if self.domain.contains(p) {
            Ok(())
        } else {
            Err(GeomError::OutOfDomain { u: p.u, v: p.v })
        }
    }

    fn forms_at(&self, p: ParamPoint) -> Result<(SecondJet<f64>, Forms<f64>)> {
        let jet = self.second_jet(p)?;
        let f = geometry::forms(&jet, IMMERSION_TOL).ok_or_else(|| {
            let n = geometry::cross(&jet.u, &jet.v);
            GeomError::ImmersionFailure {
                u: p.u,
                v: p.v,
                norm: geometry::dot(&n, &n).sqrt(),
            }
        })?;
        Ok((jet, f))
    }

    pub fn fundamental_forms(
        &self,
        p: ParamPoint,
    ) -> Result<(FirstFundamentalForm, SecondFundamentalForm)> {
        let (_, f) = self.forms_at(p)?;
        Ok((f.first, f.second))
    }

    pub fn unit_normal(&self, p: ParamPoint) -> Result<[f64; 3]> {
        Ok(self.forms_at(p)?.1.normal)
    }

    /// `(LN − M²) / (EG − F²)`.
    pub fn gaussian_curvature(&self, p: ParamPoint) -> Result<f64> {
        Ok(self.forms_at(p)?.1.gaussian_curvature())
    }

    /// Raw eigenvalues of the shape operator, larger first; defined for any sign of `K`.
    pub fn shape_eigenvalues(&self, p: ParamPoint) -> Result<(f64, f64)> {
        Ok(self.forms_at(p)?.1.shape_eigenvalues())
    }

    pub fn shape_operator(&self, p: ParamPoint) -> Result<[[f64; 2]; 2]> {
        Ok(self.forms_at(p)?.1.shape_operator())
    }

    /// Principal frame with the basepoint sign rule: `e₁` has positive first
    /// coordinate component, ties broken by a positive second component.
    pub fn principal_frame(&self, p: ParamPoint) -> Result<PrincipalFrame<f64>> {
        let (jet, f) = self.forms_at(p)?;
        let k = f.gaussian_curvature();
        if !(k < 0.0) {
            return Err(GeomError::NotHyperbolic { u: p.u, v: p.v, k });
        }
        let raw = geometry::principal_frame(&jet, &f, 1.0);
        let sign = basepoint_sign(raw.e1);
        Ok(if sign > 0.0 {
            raw
        } else {
            geometry::principal_frame(&jet, &f, sign)
        })
    }

    /// Principal frame with `e₁` oriented to have a nonnegative Euclidean
    /// coordinate dot product with `reference`.
    pub fn principal_frame_aligned(
        &self,
        p: ParamPoint,
        reference: [f64; 2],
    ) -> Result<PrincipalFrame<f64>> {
        let (jet, f) = self.forms_at(p)?;
        let k = f.gaussian_curvature();
        if !(k < 0.0) {
            return Err(GeomError::NotHyperbolic { u: p.u, v: p.v, k });
        }
        let raw = geometry::principal_frame(&jet, &f, 1.0);
        let d = raw.e1[0] * reference[0] + raw.e1[1] * reference[1];
        Ok(if d >= 0.0 {
            raw
        } else {
            geometry::principal_frame(&jet, &f, -1.0)
        })
    }

    /// Principal frame carrying exact first partials, from the third-order jet.
    pub fn principal_frame_dual(&self, p: ParamPoint, sign: f64) -> Result<PrincipalFrame<Dual<f64>>> {
        let jet = self.jet(p)?.lift();
        let f = geometry::forms(&jet, IMMERSION_TOL).ok_or_else(|| GeomError::ImmersionFailure {
            u: p.u,
            v: p.v,
            norm: 0.0,
        })?;
        let k = f.gaussian_curvature().re;
        if !(k < 0.0) {
            return Err(GeomError::NotHyperbolic { u: p.u, v: p.v, k });
        }
        Ok(geometry::principal_frame(&jet, &f, sign))
    }

    pub fn principal_data(&self, p: ParamPoint) -> Result<ShapeSpectrum> {
        let (jet, f) = self.forms_at(p)?;
        let k = f.gaussian_curvature();
        if !(k < 0.0) {
            return Err(GeomError::NotHyperbolic { u: p.u, v: p.v, k });
        }
        let fr = self.principal_frame(p)?;
        let dir2 = f.eigenvector(fr.kappa2);
        Ok(ShapeSpectrum {
            kappa1: fr.kappa1,
            kappa2: fr.kappa2,
            dir1: TangentVector {
                coords: fr.e1,
                ambient: fr.e1_bar,
            },
            dir2: TangentVector {
                coords: dir2,
                ambient: geometry::push(&jet, &dir2),
            },
            alpha: fr.alpha,
        })
    }

    pub fn frame_point(&self, p: ParamPoint) -> Result<FramePoint> {
        let fr = self.principal_frame(p)?;
        Ok(frame_point_of(&fr))
    }

    /// Normal curvature along the unit vector at angle `beta` from `e₁`, two ways:
    /// Euler's formula and `sff` on the rotated vector.
    pub fn normal_curvature(&self, p: ParamPoint, beta: f64) -> Result<(f64, f64)> {
        let (_, f) = self.forms_at(p)?;
        let fr = self.principal_frame(p)?;
        let euler = fr.kappa1 * beta.cos().powi(2) + fr.kappa2 * beta.sin().powi(2);
        let w = [
            beta.cos() * fr.e1[0] + beta.sin() * fr.e2[0],
            beta.cos() * fr.e1[1] + beta.sin() * fr.e2[1],
        ];
        Ok((euler, f.second.eval(&w)))
    }

    /// `sff` on an arbitrary coordinate-component vector.
    pub fn sff(&self, p: ParamPoint, w: [f64; 2]) -> Result<f64> {
        Ok(self.forms_at(p)?.1.second.eval(&w))
    }

    pub fn asymptotic_frame(&self, p: ParamPoint) -> Result<AsymptoticFrame> {
        let jet = self.second_jet(p)?;
        let fr = self.principal_frame(p)?;
        Ok(asymptotic_of(&jet, &fr))
    }
}

pub(crate) fn asymptotic_of(jet: &SecondJet<f64>, fr: &PrincipalFrame<f64>) -> AsymptoticFrame {
    let (a, b) = fr.asymptotic();
    let (eta1, eta2) = fr.eta_frame();
    AsymptoticFrame {
        big_e1: TangentVector {
            coords: a,
            ambient: geometry::push(jet, &a),
        },
        big_e2: TangentVector {
            coords: b,
            ambient: geometry::push(jet, &b),
        },
        eta1,
        eta2,
        alpha: fr.alpha,
    }
}

pub(crate) fn frame_point_of(fr: &PrincipalFrame<f64>) -> FramePoint {
    FramePoint {
        e1: TangentVector {
            coords: fr.e1,
            ambient: fr.e1_bar,
        },
        e2: TangentVector {
            coords: fr.e2,
            ambient: fr.e2_bar,
        },
        normal: fr.e3_bar,
    }
}

pub(crate) fn basepoint_sign(e1: [f64; 2]) -> f64 {
    if e1[0] > 0.0 || (e1[0] == 0.0 && e1[1] > 0.0) {
        1.0
    } else {
        -1.0
    }
}

fn scale_jet(j: Jet3, k: f64) -> Jet3 {
    let s = |a: [f64; 3]| a.map(|x| k * x);
    Jet3 {
        p: s(j.p),
        u: s(j.u),
        v: s(j.v),
        uu: s(j.uu),
        uv: s(j.uv),
        vv: s(j.vv),
        uuu: s(j.uuu),
        uuv: s(j.uuv),
        uvv: s(j.uvv),
        vvv: s(j.vvv),
    }
}

/// `R(u) e^{iw}` partials: `∂_u^a ∂_v^b = (D + iτ)^a (i)^b R e^{iw}`, where
/// `D` differentiates `R` and `w = v + τu`. `rd[k]` holds `R^{(k)}(u)`.
fn revolution_partial(rd: &[f64; 4], tau: f64, a: usize, b: usize, w: f64) -> [f64; 2] {
    // Binomial expansion of (D + iτ)^a applied to R.
    let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    let mut c = [0.0, 0.0];
    for k in 0..=a {
        // (iτ)^(a−k)
        let pw = ipow(a - k, tau);
        let coef = binom[a][k] * rd[k];
        c[0] += coef * pw[0];
        c[1] += coef * pw[1];
    }
    // times i^b
    let ib = ipow(b, 1.0);
    let c = [c[0] * ib[0] - c[1] * ib[1], c[0] * ib[1] + c[1] * ib[0]];
    let e = [w.cos(), w.sin()];
    [c[0] * e[0] - c[1] * e[1], c[0] * e[1] + c[1] * e[0]]
}

/// `(i t)^n` as a complex pair.
fn ipow(n: usize, t: f64) -> [f64; 2] {
    let m = t.powi(n as i32);
    match n % 4 {
        0 => [m, 0.0],
        1 => [0.0, m],
        2 => [-m, 0.0],
        _ => [0.0, -m],
    }
}

fn revolution_jet(rd: [f64; 4], zd: [f64; 4], tau: f64, u_shift_w: f64) -> Jet3 {
    let w = u_shift_w;
    let at = |a: usize, b: usize| {
        let q = revolution_partial(&rd, tau, a, b, w);
        let z = if b == 0 { zd[a] } else { 0.0 };
        [q[0], q[1], z]
    };
    Jet3 {
        p: at(0, 0),
        u: at(1, 0),
        v: at(0, 1),
        uu: at(2, 0),
        uv: at(1, 1),
        vv: at(0, 2),
        uuu: at(3, 0),
        uuv: at(2, 1),
        uvv: at(1, 2),
        vvv: at(0, 3),
    }
}

fn tractroid_jet(u: f64, v: f64, tau: f64) -> Jet3 {
    let s = 1.0 / u.cosh();
    let t = u.tanh();
    let rd = [
        s,
        -s * t,
        s * (t * t - s * s),
        -s * t * t * t + 5.0 * s * s * s * t,
    ];
    let zd = [
        u - t,
        t * t,
        2.0 * t * s * s,
        2.0 * s.powi(4) - 4.0 * t * t * s * s,
    ];
    revolution_jet(rd, zd, tau, v + tau * u)
}

fn sphere_jet(u: f64, v: f64, r: f64) -> Jet3 {
    let (su, cu) = u.sin_cos();
    let rd = [r * su, r * cu, -r * su, -r * cu];
    let zd = [r * cu, -r * su, -r * cu, r * su];
    revolution_jet(rd, zd, 0.0, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_jets_agree_with_ad() {
        let ps = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap();
        let sp = SurfaceImmersion::sphere(1.3).unwrap();
        let pl = SurfaceImmersion::plane();
        for &(u, v) in &[(0.3, 0.1), (1.0, -2.0), (2.5, 3.0)] {
            let p = ParamPoint::new(u, v);
            for s in [&ps, &sp, &pl] {
                let a = s.jet_analytic(p).unwrap();
                let d = s.jet_ad(p);
                assert!(a.max_abs_diff(&d) < 1e-12, "{:?} at {p:?}", s.kind());
            }
        }
    }

    #[test]
    fn dilation_rejects_nonpositive_factors() {
        let s = SurfaceImmersion::plane();
        assert!(s.dilate(0.0).is_err());
        assert!(s.dilate(-1.0).is_err());
        assert!(s.dilate(f64::NAN).is_err());
        assert_eq!(s.dilate(2.0).unwrap().scale(), 2.0);
    }

    #[test]
    fn domain_is_enforced() {
        let s = SurfaceImmersion::pseudosphere(0.2, 0.0, 0.0).unwrap();
        assert!(matches!(
            s.jet(ParamPoint::new(0.1, 0.0)),
            Err(GeomError::OutOfDomain { .. })
        ));
        assert!(s.jet(ParamPoint::new(0.2, 0.0)).is_ok());
    }

    #[test]
    fn degenerate_immersion_is_reported() {
        let s = SurfaceImmersion::custom("u", "u", "0", Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap())
            .unwrap();
        assert!(matches!(
            s.fundamental_forms(ParamPoint::new(0.0, 0.0)),
            Err(GeomError::ImmersionFailure { .. })
        ));
    }
}
