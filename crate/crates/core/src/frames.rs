//! Exterior calculus in the moving coframe on a uniform parameter grid.
//!
//! Forms are stored by their components against `θ¹, θ²` (1-forms) or
//! `θ¹ ∧ θ²` (2-forms). The exterior derivative converts to coordinate
//! components, differentiates with centered differences, and converts back.
//! Boundary layers use one-sided second-order stencils and are tracked by a
//! per-field `margin`; residuals only look at points at least
//! [`RESIDUAL_MARGIN`] layers in.

use rayon::prelude::*;
use serde::Serialize;

use crate::dual::Dual;
use crate::error::{GeomError, Result};
use crate::surface::geometry::{self, dot, PrincipalFrame};
use crate::surface::{basepoint_sign, ParamPoint, Rect, SurfaceImmersion, IMMERSION_TOL};

/// Boundary layers excluded from every residual.
pub const RESIDUAL_MARGIN: usize = 2;

/// Smallest admissible `κ₁ − κ₂` when dividing by it.
pub const CURVATURE_GAP_TOL: f64 = 1e-8;

/// Tolerance on `|K + 1|` for checks that need a unit-negative-curvature patch.
pub const UNIT_CURVATURE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub u0: f64,
    pub v0: f64,
    pub h: f64,
    pub nu: usize,
    pub nv: usize,
}

impl GridSpec {
    /// Grid of spacing `h` anchored at the lower-left corner of `rect`.
    /// The upper edges are rounded to the nearest whole number of steps.
    pub fn over(rect: &Rect, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(GeomError::InvalidParameter(format!("grid spacing must be positive, got {h}")));
        }
        let nu = ((rect.u_max - rect.u_min) / h).round() as usize + 1;
        let nv = ((rect.v_max - rect.v_min) / h).round() as usize + 1;
        if nu < 5 || nv < 5 {
            return Err(GeomError::InsufficientGrid(format!(
                "{nu} x {nv} points; at least 5 per axis are needed"
            )));
        }
        Ok(Self {
            u0: rect.u_min,
            v0: rect.v_min,
            h,
            nu,
            nv,
        })
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nu + i
    }

    pub fn ij(&self, idx: usize) -> (usize, usize) {
        (idx % self.nu, idx / self.nu)
    }

    pub fn point(&self, i: usize, j: usize) -> ParamPoint {
        ParamPoint::new(self.u0 + i as f64 * self.h, self.v0 + j as f64 * self.h)
    }

    pub fn rect(&self) -> Rect {
        Rect {
            u_min: self.u0,
            u_max: self.u0 + (self.nu - 1) as f64 * self.h,
            v_min: self.v0,
            v_max: self.v0 + (self.nv - 1) as f64 * self.h,
        }
    }

    fn interior(&self, idx: usize, margin: usize) -> bool {
        let (i, j) = self.ij(idx);
        i >= margin && j >= margin && i + margin < self.nu && j + margin < self.nv
    }
}

#[derive(Clone, Debug)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// Exact `(∂/∂u, ∂/∂v)` when the field came from the dual-number path.
    pub exact_grad: Option<Vec<[f64; 2]>>,
    /// Outer layers computed with one-sided stencils.
    pub margin: usize,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Self {
        Self {
            grid,
            values,
            exact_grad: None,
            margin: 0,
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(ParamPoint) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (i, j) = grid.ij(k);
                f(grid.point(i, j))
            })
            .collect();
        Self::new(grid, values)
    }

    fn map2(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
            exact_grad: None,
            margin: self.margin.max(other.margin),
        }
    }

    /// Max of `|self|` over points at least `margin` layers in.
    pub fn max_abs_interior(&self, margin: usize) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(k, _)| self.grid.interior(*k, margin))
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }
}

/// `a θ¹ + b θ²`.
#[derive(Clone, Debug)]
pub struct OneFormField {
    pub a: ScalarField,
    pub b: ScalarField,
}

impl OneFormField {
    pub fn new(a: ScalarField, b: ScalarField) -> Self {
        OneFormField { a, b }
    }

    fn from_pointwise(grid: GridSpec, margin: usize, f: impl Fn(usize) -> [f64; 2] + Sync + Send) -> Self {
        let ab: Vec<[f64; 2]> = (0..grid.len()).into_par_iter().map(f).collect();
        let mk = |k: usize| ScalarField {
            grid,
            values: ab.iter().map(|x| x[k]).collect(),
            exact_grad: None,
            margin,
        };
        OneFormField { a: mk(0), b: mk(1) }
    }

    pub fn margin(&self) -> usize {
        self.a.margin.max(self.b.margin)
    }

    /// Evaluation on the frame vectors: `(f(e₁), f(e₂))` at grid index `k`.
    pub fn at(&self, k: usize) -> [f64; 2] {
        [self.a.values[k], self.b.values[k]]
    }

    pub fn sub(&self, other: &OneFormField) -> OneFormField {
        OneFormField {
            a: self.a.map2(&other.a, |x, y| x - y),
            b: self.b.map2(&other.b, |x, y| x - y),
        }
    }

    /// Pointwise product with a scalar field.
    pub fn scaled(&self, s: &ScalarField) -> OneFormField {
        OneFormField {
            a: self.a.map2(s, |x, y| x * y),
            b: self.b.map2(s, |x, y| x * y),
        }
    }

    /// Max over interior points of `max(|a|, |b|)`.
    pub fn max_abs_interior(&self, margin: usize) -> f64 {
        self.a.max_abs_interior(margin).max(self.b.max_abs_interior(margin))
    }
}

/// `c θ¹ ∧ θ²`.
#[derive(Clone, Debug)]
pub struct TwoFormField {
    pub c: ScalarField,
}

impl TwoFormField {
    pub fn margin(&self) -> usize {
        self.c.margin
    }

    pub fn sub(&self, other: &TwoFormField) -> TwoFormField {
        TwoFormField {
            c: self.c.map2(&other.c, |x, y| x - y),
        }
    }

    pub fn add(&self, other: &TwoFormField) -> TwoFormField {
        TwoFormField {
            c: self.c.map2(&other.c, |x, y| x + y),
        }
    }
}

/// `f ∧ g = (f(e₁) g(e₂) − f(e₂) g(e₁)) θ¹ ∧ θ²`.
pub fn wedge(f: &OneFormField, g: &OneFormField) -> TwoFormField {
    let n = f.a.values.len();
    let values = (0..n)
        .map(|k| f.a.values[k] * g.b.values[k] - f.b.values[k] * g.a.values[k])
        .collect();
    TwoFormField {
        c: ScalarField {
            grid: f.a.grid,
            values,
            exact_grad: None,
            margin: f.margin().max(g.margin()),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FrameKind {
    /// `e₁` along the positive principal direction.
    Principal,
    /// `e₁` along `∂/∂u`; no curvature data.
    Coordinate,
}

/// Frame samples on a grid, each carrying exact first partials.
#[derive(Clone, Debug)]
pub struct FrameField {
    pub grid: GridSpec,
    pub kind: FrameKind,
    samples: Vec<PrincipalFrame<Dual<f64>>>,
    gauss: Vec<f64>,
}

fn re_frame(f: &PrincipalFrame<Dual<f64>>) -> PrincipalFrame<f64> {
    let r2 = |a: &[Dual<f64>; 2]| a.map(|x| x.re);
    let r3 = |a: &[Dual<f64>; 3]| a.map(|x| x.re);
    PrincipalFrame {
        kappa1: f.kappa1.re,
        kappa2: f.kappa2.re,
        alpha: f.alpha.re,
        e1: r2(&f.e1),
        e2: r2(&f.e2),
        e1_bar: r3(&f.e1_bar),
        e2_bar: r3(&f.e2_bar),
        e3_bar: r3(&f.e3_bar),
        area_factor: f.area_factor.re,
    }
}

fn flip(f: &mut PrincipalFrame<Dual<f64>>) {
    for x in f.e1.iter_mut().chain(f.e2.iter_mut()) {
        *x = -*x;
    }
    for x in f.e1_bar.iter_mut().chain(f.e2_bar.iter_mut()) {
        *x = -*x;
    }
}

fn ambient_dot(a: &PrincipalFrame<Dual<f64>>, b: &PrincipalFrame<Dual<f64>>) -> f64 {
    let x = a.e1_bar.map(|x| x.re);
    let y = b.e1_bar.map(|x| x.re);
    dot(&x, &y)
}

/// Principal frame field over `grid`, with the sign of `e₁` propagated by
/// continuity from the corner `(u0, v0)`: along the first row, then up each
/// column.
pub fn frame_field(surface: &SurfaceImmersion, grid: GridSpec) -> Result<FrameField> {
    build_field(surface, grid, FrameKind::Principal)
}

/// Frame field with `e₁ = φ_u / |φ_u|`; usable on any immersed patch.
pub fn coordinate_frame_field(surface: &SurfaceImmersion, grid: GridSpec) -> Result<FrameField> {
    build_field(surface, grid, FrameKind::Coordinate)
}

fn build_field(surface: &SurfaceImmersion, grid: GridSpec, kind: FrameKind) -> Result<FrameField> {
    if !surface.domain().contains_rect(&grid.rect()) {
        return Err(GeomError::Precondition(format!(
            "grid {:?} is not inside the surface domain {:?}",
            grid.rect(),
            surface.domain()
        )));
    }
    let computed: Vec<(PrincipalFrame<Dual<f64>>, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = grid.ij(k);
            let p = grid.point(i, j);
            let jet = surface.jet(p)?.lift();
            let f = geometry::forms(&jet, IMMERSION_TOL).ok_or(GeomError::ImmersionFailure {
                u: p.u,
                v: p.v,
                norm: 0.0,
            })?;
            let gauss = f.gaussian_curvature().re;
            let frame = match kind {
                FrameKind::Principal => {
                    if !(gauss < 0.0) {
                        return Err(GeomError::NotHyperbolic { u: p.u, v: p.v, k: gauss });
                    }
                    geometry::principal_frame(&jet, &f, 1.0)
                }
                FrameKind::Coordinate => geometry::coordinate_frame(&jet, &f),
            };
            Ok((frame, gauss))
        })
        .collect::<Result<_>>()?;
    let (mut samples, gauss): (Vec<_>, Vec<_>) = computed.into_iter().unzip();

    if kind == FrameKind::Principal {
        let first = samples[0].e1.map(|x| x.re);
        if basepoint_sign(first) < 0.0 {
            flip(&mut samples[0]);
        }
        for i in 1..grid.nu {
            let (prev, cur) = (grid.idx(i - 1, 0), grid.idx(i, 0));
            if ambient_dot(&samples[prev], &samples[cur]) < 0.0 {
                flip(&mut samples[cur]);
            }
        }
        for i in 0..grid.nu {
            for j in 1..grid.nv {
                let (prev, cur) = (grid.idx(i, j - 1), grid.idx(i, j));
                if ambient_dot(&samples[prev], &samples[cur]) < 0.0 {
                    flip(&mut samples[cur]);
                }
            }
        }
        for j in 0..grid.nv {
            for i in 0..grid.nu {
                let k = grid.idx(i, j);
                if i + 1 < grid.nu && ambient_dot(&samples[k], &samples[grid.idx(i + 1, j)]) <= 0.0 {
                    return Err(GeomError::Resolution(i, j, i + 1, j));
                }
                if j + 1 < grid.nv && ambient_dot(&samples[k], &samples[grid.idx(i, j + 1)]) <= 0.0 {
                    return Err(GeomError::Resolution(i, j, i, j + 1));
                }
            }
        }
    }

    Ok(FrameField {
        grid,
        kind,
        samples,
        gauss,
    })
}

/// One-sided or centered second-order partials of a grid function.
fn partials(grid: &GridSpec, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let h2 = 2.0 * grid.h;
    let d = |at: &dyn Fn(usize) -> f64, i: usize, n: usize| -> f64 {
        if i == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / h2
        } else if i == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / h2
        } else {
            (at(i + 1) - at(i - 1)) / h2
        }
    };
    let mut du = vec![0.0; f.len()];
    let mut dv = vec![0.0; f.len()];
    for j in 0..grid.nv {
        for i in 0..grid.nu {
            let k = grid.idx(i, j);
            du[k] = d(&|ii| f[grid.idx(ii, j)], i, grid.nu);
            dv[k] = d(&|jj| f[grid.idx(i, jj)], j, grid.nv);
        }
    }
    (du, dv)
}

impl FrameField {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn frame(&self, k: usize) -> PrincipalFrame<f64> {
        re_frame(&self.samples[k])
    }

    pub fn frame_dual(&self, k: usize) -> &PrincipalFrame<Dual<f64>> {
        &self.samples[k]
    }

    pub fn gaussian_curvature(&self) -> ScalarField {
        ScalarField::new(self.grid, self.gauss.clone())
    }

    fn require_principal(&self, what: &str) -> Result<()> {
        match self.kind {
            FrameKind::Principal => Ok(()),
            FrameKind::Coordinate => Err(GeomError::Precondition(format!(
                "{what} needs a principal frame field"
            ))),
        }
    }

    /// `|K + 1| ≤ UNIT_CURVATURE_TOL` everywhere on the grid.
    pub fn require_unit_negative(&self, what: &str) -> Result<()> {
        self.require_principal(what)?;
        let worst = self.gauss.iter().map(|k| (k + 1.0).abs()).fold(0.0, f64::max);
        if worst > UNIT_CURVATURE_TOL {
            return Err(GeomError::Precondition(format!(
                "{what} needs K = -1 on the patch; max |K + 1| = {worst:e}"
            )));
        }
        Ok(())
    }

    fn dual_scalar(&self, pick: impl Fn(&PrincipalFrame<Dual<f64>>) -> Dual<f64>) -> ScalarField {
        let (values, grads): (Vec<f64>, Vec<[f64; 2]>) = self
            .samples
            .iter()
            .map(|s| {
                let x = pick(s);
                (x.re, [x.du, x.dv])
            })
            .unzip();
        ScalarField {
            grid: self.grid,
            values,
            exact_grad: Some(grads),
            margin: 0,
        }
    }

    pub fn kappa1(&self) -> ScalarField {
        self.dual_scalar(|s| s.kappa1)
    }

    pub fn kappa2(&self) -> ScalarField {
        self.dual_scalar(|s| s.kappa2)
    }

    pub fn alpha(&self) -> ScalarField {
        self.dual_scalar(|s| s.alpha)
    }

    /// Maximum angle (radians) between the `e₁` lines of adjacent samples.
    pub fn max_adjacent_angle(&self) -> f64 {
        let g = &self.grid;
        let ang = |a: usize, b: usize| ambient_dot(&self.samples[a], &self.samples[b]).clamp(-1.0, 1.0).acos();
        let mut worst: f64 = 0.0;
        for j in 0..g.nv {
            for i in 0..g.nu {
                let k = g.idx(i, j);
                if i + 1 < g.nu {
                    worst = worst.max(ang(k, g.idx(i + 1, j)));
                }
                if j + 1 < g.nv {
                    worst = worst.max(ang(k, g.idx(i, j + 1)));
                }
            }
        }
        worst
    }

    /// Frame components of a 1-form given by coordinate components.
    pub fn from_coords(&self, margin: usize, coords: impl Fn(usize) -> [f64; 2] + Sync + Send) -> OneFormField {
        OneFormField::from_pointwise(self.grid, margin, |k| self.frame(k).form_to_frame(&coords(k)))
    }

    fn to_coords(&self, f: &OneFormField) -> (Vec<f64>, Vec<f64>) {
        (0..self.len())
            .map(|k| {
                let c = self.frame(k).form_to_coords(f.a.values[k], f.b.values[k]);
                (c[0], c[1])
            })
            .unzip()
    }

    /// `df` for a scalar field, by finite differences.
    pub fn d_scalar(&self, s: &ScalarField) -> OneFormField {
        let (du, dv) = partials(&self.grid, &s.values);
        self.from_coords(s.margin + 1, |k| [du[k], dv[k]])
    }

    /// `df` for a scalar field from its exact gradient.
    pub fn d_scalar_exact(&self, s: &ScalarField) -> Result<OneFormField> {
        let g = s
            .exact_grad
            .as_ref()
            .ok_or_else(|| GeomError::Precondition("field has no exact gradient".into()))?;
        Ok(self.from_coords(0, |k| g[k]))
    }

    /// Exterior derivative of a 1-form, re-expressed against `θ¹ ∧ θ²`.
    pub fn exterior_d(&self, f: &OneFormField) -> TwoFormField {
        let (cu, cv) = self.to_coords(f);
        let (_, dv_of_u) = partials(&self.grid, &cu);
        let (du_of_v, _) = partials(&self.grid, &cv);
        let values = (0..self.len())
            .map(|k| (du_of_v[k] - dv_of_u[k]) / self.samples[k].area_factor.re)
            .collect();
        TwoFormField {
            c: ScalarField {
                grid: self.grid,
                values,
                exact_grad: None,
                margin: f.margin() + 1,
            },
        }
    }

    /// `θ¹ = (1, 0)`, `θ² = (0, 1)` in frame components.
    pub fn coframe(&self) -> (OneFormField, OneFormField) {
        (
            OneFormField::from_pointwise(self.grid, 0, |_| [1.0, 0.0]),
            OneFormField::from_pointwise(self.grid, 0, |_| [0.0, 1.0]),
        )
    }

    /// `⟨dē_j, ē_k⟩` by centered differences of the sampled ambient frame.
    fn ambient_form(
        &self,
        from: impl Fn(&PrincipalFrame<f64>) -> [f64; 3],
        onto: impl Fn(&PrincipalFrame<f64>) -> [f64; 3] + Sync,
    ) -> OneFormField {
        let frames: Vec<PrincipalFrame<f64>> = (0..self.len()).map(|k| self.frame(k)).collect();
        let comp: Vec<Vec<f64>> = (0..3).map(|c| frames.iter().map(|f| from(f)[c]).collect()).collect();
        let d: Vec<(Vec<f64>, Vec<f64>)> = comp.iter().map(|c| partials(&self.grid, c)).collect();
        self.from_coords(1, |k| {
            let target = onto(&frames[k]);
            let du = [d[0].0[k], d[1].0[k], d[2].0[k]];
            let dv = [d[0].1[k], d[1].1[k], d[2].1[k]];
            [dot(&du, &target), dot(&dv, &target)]
        })
    }

    /// `⟨dē_j, ē_k⟩` from exact frame partials.
    fn exact_form(&self, j: usize, k: usize) -> OneFormField {
        OneFormField::from_pointwise(self.grid, 0, |idx| {
            let s = &self.samples[idx];
            let pick = |n: usize| match n {
                0 => s.e1_bar,
                1 => s.e2_bar,
                _ => s.e3_bar,
            };
            let (src, dst) = (pick(j), pick(k));
            let target = dst.map(|x| x.re);
            let du = src.map(|x| x.du);
            let dv = src.map(|x| x.dv);
            self.frame(idx).form_to_frame(&[dot(&du, &target), dot(&dv, &target)])
        })
    }

    /// Full connection matrix `ω^k_j = ⟨dē_j, ē_k⟩` at one sample, from exact
    /// partials, as frame components. Index order `[j][k]`.
    pub fn connection_matrix_exact(&self, idx: usize) -> [[[f64; 2]; 3]; 3] {
        let s = &self.samples[idx];
        let fr = self.frame(idx);
        let vecs = [s.e1_bar, s.e2_bar, s.e3_bar];
        let mut out = [[[0.0; 2]; 3]; 3];
        for (j, src) in vecs.iter().enumerate() {
            for (k, dst) in vecs.iter().enumerate() {
                let target = dst.map(|x| x.re);
                let c = [dot(&src.map(|x| x.du), &target), dot(&src.map(|x| x.dv), &target)];
                out[j][k] = fr.form_to_frame(&c);
            }
        }
        out
    }

    /// Connection form `ω₁²` three ways.
    pub fn connection_form(&self) -> Result<ConnectionForms> {
        self.require_principal("connection_form")?;
        let ambient = self.ambient_form(|f| f.e1_bar, |f| f.e2_bar);
        let exact = self.exact_form(0, 1);
        let mut gap_fail = None;
        for (k, s) in self.samples.iter().enumerate() {
            let gap = s.kappa1.re - s.kappa2.re;
            if !(gap > CURVATURE_GAP_TOL) {
                gap_fail = Some((k, gap));
                break;
            }
        }
        if let Some((k, gap)) = gap_fail {
            let (i, j) = self.grid.ij(k);
            let p = self.grid.point(i, j);
            return Err(GeomError::CurvatureGap { u: p.u, v: p.v, gap });
        }
        let principal = OneFormField::from_pointwise(self.grid, 0, |k| {
            let s = &self.samples[k];
            let fr = self.frame(k);
            let gap = s.kappa1.re - s.kappa2.re;
            let dk1 = [s.kappa1.du, s.kappa1.dv];
            let dk2 = [s.kappa2.du, s.kappa2.dv];
            let dk1_e2 = dk1[0] * fr.e2[0] + dk1[1] * fr.e2[1];
            let dk2_e1 = dk2[0] * fr.e1[0] + dk2[1] * fr.e1[1];
            [dk1_e2 / gap, dk2_e1 / gap]
        });
        Ok(ConnectionForms {
            ambient,
            principal,
            exact,
        })
    }

    /// `tan α dα(e₂) θ¹ + cot α dα(e₁) θ²` from exact partials of `α`.
    pub fn connection_from_alpha(&self) -> Result<OneFormField> {
        self.require_principal("connection_from_alpha")?;
        Ok(OneFormField::from_pointwise(self.grid, 0, |k| {
            let s = &self.samples[k];
            let fr = self.frame(k);
            let da = [s.alpha.du, s.alpha.dv];
            let da_e1 = da[0] * fr.e1[0] + da[1] * fr.e1[1];
            let da_e2 = da[0] * fr.e2[0] + da[1] * fr.e2[1];
            [fr.alpha.tan() * da_e2, da_e1 / fr.alpha.tan()]
        }))
    }

    /// `ω₁³`, `ω₂³` from principal curvatures and from the ambient frame.
    pub fn normal_connection_forms(&self) -> Result<NormalConnection> {
        self.require_principal("normal_connection_forms")?;
        let omega13 = OneFormField::from_pointwise(self.grid, 0, |k| [self.samples[k].kappa1.re, 0.0]);
        let omega23 = OneFormField::from_pointwise(self.grid, 0, |k| [0.0, self.samples[k].kappa2.re]);
        Ok(NormalConnection {
            omega13,
            omega23,
            omega13_ambient: self.ambient_form(|f| f.e1_bar, |f| f.e3_bar),
            omega23_ambient: self.ambient_form(|f| f.e2_bar, |f| f.e3_bar),
        })
    }

    /// `η¹ = ½(sec α θ¹ − csc α θ²)`, `η² = ½(sec α θ¹ + csc α θ²)`.
    pub fn eta(&self) -> Result<(OneFormField, OneFormField)> {
        self.require_principal("eta")?;
        Ok((
            OneFormField::from_pointwise(self.grid, 0, |k| self.frame(k).eta_frame().0),
            OneFormField::from_pointwise(self.grid, 0, |k| self.frame(k).eta_frame().1),
        ))
    }
}

#[derive(Clone, Debug)]
pub struct ConnectionForms {
    /// `⟨dē₁, ē₂⟩` with `dē₁` from differences of the sampled frame.
    pub ambient: OneFormField,
    /// `(dκ₁(e₂) θ¹ + dκ₂(e₁) θ²) / (κ₁ − κ₂)`.
    pub principal: OneFormField,
    /// `⟨dē₁, ē₂⟩` from exact partials.
    pub exact: OneFormField,
}

#[derive(Clone, Debug)]
pub struct NormalConnection {
    pub omega13: OneFormField,
    pub omega23: OneFormField,
    pub omega13_ambient: OneFormField,
    pub omega23_ambient: OneFormField,
}

/// One named residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub check: &'static str,
    /// The identity being tested, written out.
    pub identity: &'static str,
    pub value: f64,
}

impl Residual {
    fn new(check: &'static str, identity: &'static str, value: f64) -> Self {
        Self { check, identity, value }
    }
}

/// Five structure-equation residuals plus the Gauss-equation check.
pub fn check_structure(field: &FrameField) -> Result<Vec<Residual>> {
    field.require_principal("check_structure")?;
    let m = RESIDUAL_MARGIN;
    let (th1, th2) = field.coframe();
    let omega = field.connection_form()?.ambient;
    let nc = field.normal_connection_forms()?;
    let d_th1 = field.exterior_d(&th1);
    let d_th2 = field.exterior_d(&th2);
    let d_om = field.exterior_d(&omega);
    let d_om13 = field.exterior_d(&nc.omega13);
    let d_om23 = field.exterior_d(&nc.omega23);
    let r = |t: TwoFormField| t.c.max_abs_interior(m);
    let gauss = {
        let k = field.gaussian_curvature();
        r(d_om.add(&TwoFormField { c: k }))
    };
    Ok(vec![
        Residual::new(
            "structure_dtheta1",
            "d theta1 = omega12 ^ theta2",
            r(d_th1.sub(&wedge(&omega, &th2))),
        ),
        Residual::new(
            "structure_dtheta2",
            "d theta2 = -omega12 ^ theta1",
            r(d_th2.add(&wedge(&omega, &th1))),
        ),
        Residual::new(
            "structure_domega12",
            "d omega12 = -omega13 ^ omega23",
            r(d_om.add(&wedge(&nc.omega13, &nc.omega23))),
        ),
        Residual::new(
            "structure_domega13",
            "d omega13 = omega12 ^ omega23",
            r(d_om13.sub(&wedge(&omega, &nc.omega23))),
        ),
        Residual::new(
            "structure_domega23",
            "d omega23 = -omega12 ^ omega13",
            r(d_om23.add(&wedge(&omega, &nc.omega13))),
        ),
        Residual::new("gauss_equation", "d omega12 = -K theta1 ^ theta2", gauss),
    ])
}

/// Gauss equation alone, for any frame kind: max of `|c(dω₁²) + K|`.
pub fn check_gauss(field: &FrameField) -> Residual {
    let omega = field.ambient_form(|f| f.e1_bar, |f| f.e2_bar);
    let d_om = field.exterior_d(&omega);
    let k = field.gaussian_curvature();
    Residual::new(
        "gauss_equation",
        "d omega12 = -K theta1 ^ theta2",
        d_om.add(&TwoFormField { c: k }).c.max_abs_interior(RESIDUAL_MARGIN),
    )
}

/// `(κ₁ − κ₂) ω₁² = dκ₁(e₂) θ¹ + dκ₂(e₁) θ²` against the ambient `ω₁²`.
pub fn check_lemma_connprin(field: &FrameField) -> Result<Residual> {
    let c = field.connection_form()?;
    Ok(Residual::new(
        "connection_principal",
        "(k1 - k2) omega12 = dk1(e2) theta1 + dk2(e1) theta2",
        c.ambient.sub(&c.principal).max_abs_interior(RESIDUAL_MARGIN),
    ))
}

/// `ω₁² = tan α dα(e₂) θ¹ + cot α dα(e₁) θ²` against the ambient `ω₁²`.
pub fn check_lemma_connalpha(field: &FrameField) -> Result<Residual> {
    field.require_unit_negative("check_lemma_connalpha")?;
    let c = field.connection_form()?;
    let via_alpha = field.connection_from_alpha()?;
    Ok(Residual::new(
        "connection_alpha",
        "omega12 = tan(alpha) dalpha(e2) theta1 + cot(alpha) dalpha(e1) theta2",
        c.ambient.sub(&via_alpha).max_abs_interior(RESIDUAL_MARGIN),
    ))
}

/// Pointwise consistency of the two exact expressions:
/// `tan α dα = dκ₁/(κ₁−κ₂)` on `e₂` and `cot α dα = dκ₂/(κ₁−κ₂)` on `e₁`.
pub fn check_alpha_principal_consistency(field: &FrameField) -> Result<Residual> {
    field.require_unit_negative("check_alpha_principal_consistency")?;
    let via_alpha = field.connection_from_alpha()?;
    let c = field.connection_form()?;
    Ok(Residual::new(
        "alpha_principal_consistency",
        "dk1/(k1-k2) = tan(alpha) dalpha, dk2/(k1-k2) = cot(alpha) dalpha",
        via_alpha.sub(&c.principal).max_abs_interior(0),
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaClosedReport {
    pub d_eta1: Residual,
    pub d_eta2: Residual,
    pub d_sec_theta1: Residual,
    pub d_csc_theta2: Residual,
}

/// `dη¹ = dη² = 0`, with the intermediate identities on `sec α θ¹` and `csc α θ²`.
pub fn check_eta_closed(field: &FrameField) -> Result<EtaClosedReport> {
    field.require_unit_negative("check_eta_closed")?;
    let m = RESIDUAL_MARGIN;
    let (eta1, eta2) = field.eta()?;
    let sec_th1 = OneFormField::from_pointwise(field.grid, 0, |k| [1.0 / field.frame(k).alpha.cos(), 0.0]);
    let csc_th2 = OneFormField::from_pointwise(field.grid, 0, |k| [0.0, 1.0 / field.frame(k).alpha.sin()]);
    let r = |f: &OneFormField| field.exterior_d(f).c.max_abs_interior(m);
    Ok(EtaClosedReport {
        d_eta1: Residual::new("eta1_closed", "d eta1 = 0", r(&eta1)),
        d_eta2: Residual::new("eta2_closed", "d eta2 = 0", r(&eta2)),
        d_sec_theta1: Residual::new("sec_theta1_closed", "d(sec(alpha) theta1) = 0", r(&sec_th1)),
        d_csc_theta2: Residual::new("csc_theta2_closed", "d(csc(alpha) theta2) = 0", r(&csc_th2)),
    })
}

/// `R(h) / R(h/2)`.
pub fn convergence_rate(coarse: f64, fine: f64) -> f64 {
    coarse / fine
}

/// Round trip `θ → η → θ` on frame components:
/// `θ¹ = cos α (η¹ + η²)`, `θ² = sin α (−η¹ + η²)`.
pub fn theta_eta_roundtrip(alpha: f64, theta: [f64; 2]) -> [f64; 2] {
    // Components against η: f = p η¹ + q η², with f(E_i) read off directly.
    let (s, c) = alpha.sin_cos();
    let p = c * theta[0] - s * theta[1];
    let q = c * theta[0] + s * theta[1];
    // Back: θ¹ = cos α (η¹ + η²), θ² = sin α (−η¹ + η²), so
    // p η¹ + q η² = ((p + q) / (2 cos α)) θ¹ + ((q − p) / (2 sin α)) θ².
    [(p + q) / (2.0 * c), (q - p) / (2.0 * s)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid(h: f64) -> (SurfaceImmersion, GridSpec) {
        let s = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap();
        let g = GridSpec::over(&Rect::new(1.0, 1.1, 0.0, 0.1).unwrap(), h).unwrap();
        (s, g)
    }

    #[test]
    fn grid_rounding_and_indexing() {
        let g = GridSpec::over(&Rect::new(0.0, 1.0, 0.0, 0.5).unwrap(), 0.1).unwrap();
        assert_eq!((g.nu, g.nv), (11, 6));
        assert_eq!(g.ij(g.idx(3, 4)), (3, 4));
        assert!(GridSpec::over(&Rect::new(0.0, 0.2, 0.0, 1.0).unwrap(), 0.1).is_err());
    }

    #[test]
    fn wedge_is_antisymmetric() {
        let (s, g) = small_grid(0.02);
        let f = frame_field(&s, g).unwrap();
        let a = f.connection_form().unwrap().exact;
        let (_, th2) = f.coframe();
        let x = wedge(&a, &th2);
        let y = wedge(&th2, &a);
        for k in 0..x.c.values.len() {
            assert_eq!(x.c.values[k], -y.c.values[k]);
        }
    }

    #[test]
    fn coordinate_form_du_is_closed() {
        let (s, g) = small_grid(0.01);
        let f = frame_field(&s, g).unwrap();
        let du = f.from_coords(0, |_| [1.0, 0.0]);
        let d = f.exterior_d(&du);
        assert!(d.c.max_abs_interior(1) < 1e-11);
    }

    #[test]
    fn sign_rule_at_basepoint() {
        let (s, g) = small_grid(0.02);
        let f = frame_field(&s, g).unwrap();
        let e1 = f.frame(0).e1;
        assert!(e1[0] > 0.0 || (e1[0] == 0.0 && e1[1] > 0.0));
        assert!(f.max_adjacent_angle() < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn principal_requirements_are_enforced() {
        let s = SurfaceImmersion::sphere(1.0).unwrap();
        let g = GridSpec::over(&Rect::new(1.0, 1.1, 0.0, 0.1).unwrap(), 0.02).unwrap();
        assert!(matches!(frame_field(&s, g), Err(GeomError::NotHyperbolic { .. })));
        let c = coordinate_frame_field(&s, g).unwrap();
        assert!(matches!(c.connection_form(), Err(GeomError::Precondition(_))));
        assert!(check_structure(&c).is_err());
    }

    #[test]
    fn roundtrip_theta_eta_identity() {
        for &alpha in &[0.1, 0.5, 1.2, 1.5] {
            for theta in [[1.0, 0.0], [0.0, 1.0], [0.3, -2.0]] {
                let r = theta_eta_roundtrip(alpha, theta);
                assert!((r[0] - theta[0]).abs() < 1e-12 && (r[1] - theta[1]).abs() < 1e-12);
            }
        }
    }
}
