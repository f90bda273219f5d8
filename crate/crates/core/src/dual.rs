//! Forward-mode automatic differentiation over the two surface parameters.
//!
//! [`Dual<T>`] carries a value together with its partials along `u` and `v`.
//! Nesting (`Dual<Dual<f64>>`, `Dual<Dual<Dual<f64>>>`) yields mixed partials
//! of higher order, which is how surface jets up to order three are obtained.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Scalar type accepted by the generic geometry pipeline.
pub trait Real:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Send
    + Sync
{
    fn cst(x: f64) -> Self;
    /// Plain value with all derivative parts stripped.
    fn re(&self) -> f64;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self {
        self.sin() / self.cos()
    }
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn abs(self) -> Self {
        if self.re() < 0.0 {
            -self
        } else {
            self
        }
    }
    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { Self::cst(1.0) / self } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::cst(1.0);
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base *= base;
            k >>= 1;
        }
        acc
    }
    fn powf(self, p: Self) -> Self {
        (p * self.ln()).exp()
    }
    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Real for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn asin(self) -> Self {
        f64::asin(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: Self) -> Self {
        f64::powf(self, p)
    }
}

/// Value plus first partials along the two parameter directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
    pub dv: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, du: T, dv: T) -> Self {
        Self { re, du, dv }
    }

    pub fn constant(re: T) -> Self {
        Self::new(re, T::zero(), T::zero())
    }

    /// Independent variable `u` seeded at `x`.
    pub fn var_u(x: T) -> Self {
        Self::new(x, T::one(), T::zero())
    }

    /// Independent variable `v` seeded at `x`.
    pub fn var_v(x: T) -> Self {
        Self::new(x, T::zero(), T::one())
    }

    /// Chain rule for a scalar function with value `f` and derivative `df` at `re`.
    #[inline]
    fn chain(self, f: T, df: T) -> Self {
        Self::new(f, df * self.du, df * self.dv)
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du, self.dv + o.dv)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du, self.dv - o.dv)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.re * o.re,
            self.du * o.re + self.re * o.du,
            self.dv * o.re + self.re * o.dv,
        )
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.re;
        let q = self.re * inv;
        Self::new(q, (self.du - q * o.du) * inv, (self.dv - q * o.dv) * inv)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du, -self.dv)
    }
}

impl<T: Real> AddAssign for Dual<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> SubAssign for Dual<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> MulAssign for Dual<T> {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(x: f64) -> Self {
        Self::constant(T::cst(x))
    }
    fn re(&self) -> f64 {
        self.re.re()
    }
    fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }
    fn tan(self) -> Self {
        let t = self.re.tan();
        self.chain(t, T::one() + t * t)
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.re.ln(), self.re.recip())
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        self.chain(s, T::cst(0.5) / s)
    }
    fn atan(self) -> Self {
        self.chain(self.re.atan(), (T::one() + self.re * self.re).recip())
    }
    fn sinh(self) -> Self {
        self.chain(self.re.sinh(), self.re.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.re.cosh(), self.re.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, T::one() - t * t)
    }
    fn asin(self) -> Self {
        let d = (T::one() - self.re * self.re).sqrt().recip();
        self.chain(self.re.asin(), d)
    }
    fn acos(self) -> Self {
        let d = -(T::one() - self.re * self.re).sqrt().recip();
        self.chain(self.re.acos(), d)
    }
    fn powf(self, p: Self) -> Self {
        let f = self.re.powf(p.re);
        let mut out = self.chain(f, p.re * self.re.powf(p.re - T::one()));
        // The exponent's own variation only contributes for positive bases.
        if self.re.re() > 0.0 {
            let l = f * self.re.ln();
            out.du += l * p.du;
            out.dv += l * p.dv;
        }
        out
    }
}

/// Third-order jet of a map `(u, v) -> R^3`: position and every partial up
/// to total order three.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    pub p: [f64; 3],
    pub u: [f64; 3],
    pub v: [f64; 3],
    pub uu: [f64; 3],
    pub uv: [f64; 3],
    pub vv: [f64; 3],
    pub uuu: [f64; 3],
    pub uuv: [f64; 3],
    pub uvv: [f64; 3],
    pub vvv: [f64; 3],
}

type D3 = Dual<Dual<Dual<f64>>>;

impl Jet3 {
    /// Runs `f` on triply nested duals and reads off every partial.
    pub fn from_ad<F>(u: f64, v: f64, f: F) -> Self
    where
        F: Fn(D3, D3) -> [D3; 3],
    {
        let uu = Dual::var_u(Dual::var_u(Dual::var_u(u)));
        let vv = Dual::var_v(Dual::var_v(Dual::var_v(v)));
        let r = f(uu, vv);
        let pick = |g: &dyn Fn(&D3) -> f64| [g(&r[0]), g(&r[1]), g(&r[2])];
        Jet3 {
            p: pick(&|x| x.re.re.re),
            u: pick(&|x| x.du.re.re),
            v: pick(&|x| x.dv.re.re),
            uu: pick(&|x| x.du.du.re),
            uv: pick(&|x| x.du.dv.re),
            vv: pick(&|x| x.dv.dv.re),
            uuu: pick(&|x| x.du.du.du),
            uuv: pick(&|x| x.du.du.dv),
            uvv: pick(&|x| x.du.dv.dv),
            vvv: pick(&|x| x.dv.dv.dv),
        }
    }

    /// Jet of `(u, v) ↦ outer(s(u, v), v)` by the chain rule, where `outer`
    /// is the jet of a map in `(s, v)` at `(s(u, v), v)` and `sj` holds the
    /// partials of `s` in the order `[s, u, v, uu, uv, vv, uuu, uuv, uvv, vvv]`.
    pub fn reparametrize_first(outer: &Jet3, sj: [f64; 10]) -> Self {
        let [_, su, sv, suu, suv, svv, suuu, suuv, suvv, svvv] = sj;
        let o = outer;
        let f = |k: usize| {
            let (t1, tv) = (o.u[k], o.v[k]);
            let (t11, t1v, tvv) = (o.uu[k], o.uv[k], o.vv[k]);
            let (t111, t11v, t1vv, tvvv) = (o.uuu[k], o.uuv[k], o.uvv[k], o.vvv[k]);
            [
                o.p[k],
                t1 * su,
                t1 * sv + tv,
                t11 * su * su + t1 * suu,
                t11 * su * sv + t1v * su + t1 * suv,
                t11 * sv * sv + 2.0 * t1v * sv + tvv + t1 * svv,
                t111 * su * su * su + 3.0 * t11 * su * suu + t1 * suuu,
                (t111 * sv + t11v) * su * su
                    + 2.0 * t11 * su * suv
                    + (t11 * sv + t1v) * suu
                    + t1 * suuv,
                (t111 * sv + t11v) * su * sv
                    + t11 * su * svv
                    + (t11v * sv + t1vv) * su
                    + 2.0 * (t11 * sv + t1v) * suv
                    + t1 * suvv,
                (t111 * sv + t11v) * sv * sv
                    + 2.0 * t11 * sv * svv
                    + 2.0 * (t11v * sv + t1vv) * sv
                    + 2.0 * t1v * svv
                    + t1vv * sv
                    + tvvv
                    + (t11 * sv + t1v) * svv
                    + t1 * svvv,
            ]
        };
        let c = [f(0), f(1), f(2)];
        let g = |i: usize| [c[0][i], c[1][i], c[2][i]];
        Jet3 {
            p: g(0),
            u: g(1),
            v: g(2),
            uu: g(3),
            uv: g(4),
            vv: g(5),
            uuu: g(6),
            uuv: g(7),
            uvv: g(8),
            vvv: g(9),
        }
    }

    /// Iterates `(name, vector)` pairs, used when comparing two jets.
    pub fn entries(&self) -> [(&'static str, [f64; 3]); 10] {
        [
            ("p", self.p),
            ("u", self.u),
            ("v", self.v),
            ("uu", self.uu),
            ("uv", self.uv),
            ("vv", self.vv),
            ("uuu", self.uuu),
            ("uuv", self.uuv),
            ("uvv", self.uvv),
            ("vvv", self.vvv),
        ]
    }

    /// Largest componentwise difference against another jet.
    pub fn max_abs_diff(&self, other: &Jet3) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .flat_map(|((_, a), (_, b))| (0..3).map(move |k| (a[k] - b[k]).abs()))
            .fold(0.0, f64::max)
    }

    /// Second-order jet whose entries carry their own first partials.
    pub fn lift(&self) -> SecondJet<Dual<f64>> {
        let d = |x: [f64; 3], xu: [f64; 3], xv: [f64; 3]| {
            [0, 1, 2].map(|k| Dual::new(x[k], xu[k], xv[k]))
        };
        SecondJet {
            u: d(self.u, self.uu, self.uv),
            v: d(self.v, self.uv, self.vv),
            uu: d(self.uu, self.uuu, self.uuv),
            uv: d(self.uv, self.uuv, self.uvv),
            vv: d(self.vv, self.uvv, self.vvv),
        }
    }

    pub fn second(&self) -> SecondJet<f64> {
        SecondJet {
            u: self.u,
            v: self.v,
            uu: self.uu,
            uv: self.uv,
            vv: self.vv,
        }
    }
}

/// First and second partials of the immersion, over a generic scalar.
#[derive(Clone, Copy, Debug)]
pub struct SecondJet<T> {
    pub u: [T; 3],
    pub v: [T; 3],
    pub uu: [T; 3],
    pub uv: [T; 3],
    pub vv: [T; 3],
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_rules() {
        let x = Dual::var_u(2.0);
        let y = Dual::var_v(3.0);
        let f = x * x * y / (x + y);
        // f = x^2 y / (x + y)
        let fx = (2.0 * 2.0 * 3.0 * 5.0 - 4.0 * 3.0) / 25.0;
        let fy = (4.0 * 5.0 - 12.0) / 25.0;
        assert!((f.re - 12.0 / 5.0).abs() < 1e-15);
        assert!((f.du - fx).abs() < 1e-15);
        assert!((f.dv - fy).abs() < 1e-15);
    }

    #[test]
    fn nested_duals_give_mixed_partials() {
        // f = sin(u) * exp(2v): f_uuv = -sin(u) * 2 exp(2v)
        let (u, v) = (0.7, -0.3);
        let jet = Jet3::from_ad(u, v, |a, b| {
            let f = a.sin() * (b * D3::cst(2.0)).exp();
            [f, a, b]
        });
        let e = (2.0 * v).exp();
        assert!((jet.uuv[0] + u.sin() * 2.0 * e).abs() < 1e-14);
        assert!((jet.vvv[0] - u.sin() * 8.0 * e).abs() < 1e-13);
        assert!((jet.uuu[0] + u.cos() * e).abs() < 1e-14);
        assert_eq!(jet.u[1], 1.0);
        assert_eq!(jet.uu[1], 0.0);
    }

    #[test]
    fn elementary_derivatives_match_closed_forms() {
        let x = 0.4;
        let d = |f: fn(Dual<f64>) -> Dual<f64>| f(Dual::var_u(x)).du;
        assert!((d(|t| t.atan()) - 1.0 / (1.0 + x * x)).abs() < 1e-15);
        assert!((d(|t| t.tanh()) - 1.0 / x.cosh().powi(2)).abs() < 1e-15);
        assert!((d(|t| t.sqrt()) - 0.5 / x.sqrt()).abs() < 1e-15);
        assert!((d(|t| t.ln()) - 1.0 / x).abs() < 1e-15);
        assert!((d(|t| t.tan()) - 1.0 / x.cos().powi(2)).abs() < 1e-14);
        assert!((d(|t| t.asin()) - 1.0 / (1.0 - x * x).sqrt()).abs() < 1e-15);
        assert!((d(|t| t.powi(-3)) + 3.0 * x.powi(-4)).abs() < 1e-12);
        assert!((d(|t| t.powf(Dual::cst(2.5))) - 2.5 * x.powf(1.5)).abs() < 1e-14);
    }
}
