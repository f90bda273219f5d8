//! Pointwise extrinsic geometry from a second-order jet.
//!
//! Everything here is generic over [`Real`]: evaluated on `f64` it gives
//! values, evaluated on [`Dual<f64>`](crate::dual::Dual) lifted from a
//! third-order jet it gives exact first partials of curvatures and frames.

use serde::Serialize;

use crate::dual::{Real, SecondJet};

pub(crate) fn dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn scale<T: Real>(s: T, a: &[T; 3]) -> [T; 3] {
    [s * a[0], s * a[1], s * a[2]]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FirstFundamentalForm<T = f64> {
    pub e: T,
    pub f: T,
    pub g: T,
}

impl<T: Real> FirstFundamentalForm<T> {
    pub fn det(&self) -> T {
        self.e * self.g - self.f * self.f
    }

    /// `⟨a, b⟩` for coordinate-component tangent vectors.
    pub fn inner(&self, a: &[T; 2], b: &[T; 2]) -> T {
        self.e * a[0] * b[0] + self.f * (a[0] * b[1] + a[1] * b[0]) + self.g * a[1] * b[1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SecondFundamentalForm<T = f64> {
    pub l: T,
    pub m: T,
    pub n: T,
}

impl<T: Real> SecondFundamentalForm<T> {
    /// `sff(a)` on a coordinate-component tangent vector.
    pub fn eval(&self, a: &[T; 2]) -> T {
        self.l * a[0] * a[0] + T::cst(2.0) * self.m * a[0] * a[1] + self.n * a[1] * a[1]
    }
}

/// Fundamental forms and unit normal `φ_u × φ_v / |φ_u × φ_v|`.
#[derive(Clone, Copy, Debug)]
pub struct Forms<T> {
    pub first: FirstFundamentalForm<T>,
    pub second: SecondFundamentalForm<T>,
    pub normal: [T; 3],
    /// `|φ_u × φ_v|`, which equals `sqrt(EG − F²)`.
    pub area_factor: T,
}

/// Returns `None` when `|φ_u × φ_v|` falls below `tol`.
pub fn forms<T: Real>(jet: &SecondJet<T>, tol: f64) -> Option<Forms<T>> {
    let n = cross(&jet.u, &jet.v);
    let len = dot(&n, &n).sqrt();
    if !(len.re() >= tol) {
        return None;
    }
    let normal = scale(len.recip(), &n);
    Some(Forms {
        first: FirstFundamentalForm {
            e: dot(&jet.u, &jet.u),
            f: dot(&jet.u, &jet.v),
            g: dot(&jet.v, &jet.v),
        },
        second: SecondFundamentalForm {
            l: dot(&jet.uu, &normal),
            m: dot(&jet.uv, &normal),
            n: dot(&jet.vv, &normal),
        },
        normal,
        area_factor: len,
    })
}

impl<T: Real> Forms<T> {
    /// Shape operator `I⁻¹ II` acting on coordinate columns.
    pub fn shape_operator(&self) -> [[T; 2]; 2] {
        let (i1, i2) = (&self.first, &self.second);
        let inv = i1.det().recip();
        [
            [
                (i1.g * i2.l - i1.f * i2.m) * inv,
                (i1.g * i2.m - i1.f * i2.n) * inv,
            ],
            [
                (i1.e * i2.m - i1.f * i2.l) * inv,
                (i1.e * i2.n - i1.f * i2.m) * inv,
            ],
        ]
    }

    pub fn gaussian_curvature(&self) -> T {
        (self.second.l * self.second.n - self.second.m * self.second.m) / self.first.det()
    }

    /// Eigenvalues of the shape operator, larger first.
    pub fn shape_eigenvalues(&self) -> (T, T) {
        let s = self.shape_operator();
        let half_tr = (s[0][0] + s[1][1]) * T::cst(0.5);
        let half_gap = (s[0][0] - s[1][1]) * T::cst(0.5);
        let disc = half_gap * half_gap + s[0][1] * s[1][0];
        // Umbilic points give a slightly negative discriminant through rounding.
        let root = if disc.re() <= 0.0 { T::zero() } else { disc.sqrt() };
        (half_tr + root, half_tr - root)
    }

    /// Unit eigenvector (in the induced metric) of the shape operator for
    /// eigenvalue `lambda`, in coordinate components. The sign is whatever
    /// the better-conditioned null-vector formula produces.
    pub fn eigenvector(&self, lambda: T) -> [T; 2] {
        let s = self.shape_operator();
        let a = [s[0][1], lambda - s[0][0]];
        let b = [lambda - s[1][1], s[1][0]];
        let na = a[0].re().hypot(a[1].re());
        let nb = b[0].re().hypot(b[1].re());
        let v = if na >= nb { a } else { b };
        let len = self.first.inner(&v, &v).sqrt();
        [v[0] / len, v[1] / len]
    }

    /// Quarter turn counter-clockwise in the induced metric, consistent with
    /// the orientation of the normal.
    pub fn rotate(&self, a: &[T; 2]) -> [T; 2] {
        let i1 = &self.first;
        let s = self.area_factor.recip();
        [
            -(i1.f * a[0] + i1.g * a[1]) * s,
            (i1.e * a[0] + i1.f * a[1]) * s,
        ]
    }
}

pub(crate) fn push<T: Real>(jet: &SecondJet<T>, a: &[T; 2]) -> [T; 3] {
    [0, 1, 2].map(|k| a[0] * jet.u[k] + a[1] * jet.v[k])
}

/// Principal frame and asymptotic angle at a point with `K < 0`.
#[derive(Clone, Copy, Debug)]
pub struct PrincipalFrame<T> {
    pub kappa1: T,
    pub kappa2: T,
    pub alpha: T,
    /// `e₁`, `e₂` in parameter-coordinate components.
    pub e1: [T; 2],
    pub e2: [T; 2],
    /// `ē₁`, `ē₂`, `ē₃` in ambient components.
    pub e1_bar: [T; 3],
    pub e2_bar: [T; 3],
    pub e3_bar: [T; 3],
    /// `sqrt(EG − F²)`; the area form is this times `du ∧ dv`.
    pub area_factor: T,
}

/// Builds the principal frame with `e₁` multiplied by `sign` (±1).
///
/// Callers must have checked `K < 0` on the real part.
pub fn principal_frame<T: Real>(jet: &SecondJet<T>, f: &Forms<T>, sign: f64) -> PrincipalFrame<T> {
    let (k1, k2) = f.shape_eigenvalues();
    let raw = f.eigenvector(k1);
    let e1 = [raw[0] * T::cst(sign), raw[1] * T::cst(sign)];
    let e2 = f.rotate(&e1);
    PrincipalFrame {
        kappa1: k1,
        kappa2: k2,
        alpha: k1.atan(),
        e1,
        e2,
        e1_bar: push(jet, &e1),
        e2_bar: push(jet, &e2),
        e3_bar: f.normal,
        area_factor: f.area_factor,
    }
}

/// Frame with `e₁` along `∂/∂u`, for surfaces where the principal frame is
/// unavailable (umbilic or positively curved). Curvature slots are NaN.
pub fn coordinate_frame<T: Real>(jet: &SecondJet<T>, f: &Forms<T>) -> PrincipalFrame<T> {
    let e1 = [f.first.e.sqrt().recip(), T::zero()];
    let e2 = f.rotate(&e1);
    let nan = T::cst(f64::NAN);
    PrincipalFrame {
        kappa1: nan,
        kappa2: nan,
        alpha: nan,
        e1,
        e2,
        e1_bar: push(jet, &e1),
        e2_bar: push(jet, &e2),
        e3_bar: f.normal,
        area_factor: f.area_factor,
    }
}

impl<T: Real> PrincipalFrame<T> {
    /// Coframe `θ¹, θ²` in coordinate components: the rows of `[e₁ e₂]⁻¹`.
    pub fn coframe(&self) -> [[T; 2]; 2] {
        let det = self.e1[0] * self.e2[1] - self.e2[0] * self.e1[1];
        let inv = det.recip();
        [
            [self.e2[1] * inv, -self.e2[0] * inv],
            [-self.e1[1] * inv, self.e1[0] * inv],
        ]
    }

    /// Coordinate components of the 1-form `a θ¹ + b θ²`.
    pub fn form_to_coords(&self, a: T, b: T) -> [T; 2] {
        let th = self.coframe();
        [a * th[0][0] + b * th[1][0], a * th[0][1] + b * th[1][1]]
    }

    /// Frame components `(f(e₁), f(e₂))` of a coordinate-component 1-form.
    pub fn form_to_frame(&self, c: &[T; 2]) -> [T; 2] {
        [
            c[0] * self.e1[0] + c[1] * self.e1[1],
            c[0] * self.e2[0] + c[1] * self.e2[1],
        ]
    }

    /// Asymptotic directions `E₁ = cos α e₁ − sin α e₂`, `E₂ = cos α e₁ + sin α e₂`
    /// in coordinate components.
    pub fn asymptotic(&self) -> ([T; 2], [T; 2]) {
        let (s, c) = (self.alpha.sin(), self.alpha.cos());
        (
            [c * self.e1[0] - s * self.e2[0], c * self.e1[1] - s * self.e2[1]],
            [c * self.e1[0] + s * self.e2[0], c * self.e1[1] + s * self.e2[1]],
        )
    }

    /// Frame components of the dual pair `η¹, η²`.
    pub fn eta_frame(&self) -> ([T; 2], [T; 2]) {
        let half = T::cst(0.5);
        let sec = self.alpha.cos().recip() * half;
        let csc = self.alpha.sin().recip() * half;
        ([sec, -csc], [sec, csc])
    }
}
