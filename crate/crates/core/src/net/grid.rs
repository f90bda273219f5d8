//! Chebyshev net of an asymptotic coordinate system and the checks run on it.
//!
//! The lattice point `(x¹, x²)` is reached by flowing along `E₁` for time
//! `x¹` from the origin, then along `E₂` for time `x²`. The first leg is
//! shared; every column is an independent flow.

use rayon::prelude::*;
use serde::Serialize;

use super::flow::{default_step, integrate_flow, trace, Asymptotic, AsymptoticField, FlowPath};
use crate::error::{GeomError, Result};
use crate::surface::{ParamPoint, SurfaceImmersion};

/// Oriented data at one lattice point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetPoint {
    pub point: ParamPoint,
    /// `Θ = 2α ∈ (0, π)`.
    pub theta: f64,
    /// `E₁`, `E₂` in parameter components, oriented consistently with the net.
    pub big_e1: [f64; 2],
    pub big_e2: [f64; 2],
}

/// Both halves of a flow from a lattice line, each starting at the shared
/// point (`x = 0`).
#[derive(Clone, Debug, Default, Serialize)]
pub struct SplitPath {
    pub forward: FlowPath,
    pub backward: FlowPath,
}

impl SplitPath {
    /// Dense path from the shared start to signed time index `k` (in flow
    /// steps), inclusive.
    fn segment(&self, k: isize) -> &[ParamPoint] {
        let p = if k >= 0 { &self.forward } else { &self.backward };
        let n = (k.unsigned_abs() + 1).min(p.points.len());
        &p.points[..n]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NetGrid {
    pub a: f64,
    pub n: usize,
    /// Lattice spacing `2a / n`.
    pub h: f64,
    pub origin: ParamPoint,
    /// Integration step; divides `h` exactly.
    pub flow_step: f64,
    /// Row-major in `j` (the `x²` index); `None` where a flow left the patch.
    pub points: Vec<Option<NetPoint>>,
    /// Largest step-halving estimate over the lattice.
    pub flow_error: f64,
    #[serde(skip)]
    leg: SplitPath,
    #[serde(skip)]
    columns: Vec<SplitPath>,
}

/// One CSV row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NetRow {
    pub i: usize,
    pub j: usize,
    pub x1: f64,
    pub x2: f64,
    pub u: Option<f64>,
    pub v: Option<f64>,
    pub theta: Option<f64>,
    pub valid: bool,
}

impl NetGrid {
    pub fn side(&self) -> usize {
        self.n + 1
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.side() + i
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h - self.a
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&NetPoint> {
        self.points[self.idx(i, j)].as_ref()
    }

    pub fn theta(&self, i: usize, j: usize) -> Option<f64> {
        self.get(i, j).map(|p| p.theta)
    }

    pub fn valid_count(&self) -> usize {
        self.points.iter().filter(|p| p.is_some()).count()
    }

    pub fn rows(&self) -> Vec<NetRow> {
        let s = self.side();
        (0..s * s)
            .map(|k| {
                let (i, j) = (k % s, k / s);
                let p = self.points[k];
                NetRow {
                    i,
                    j,
                    x1: self.x(i),
                    x2: self.x(j),
                    u: p.map(|q| q.point.u),
                    v: p.map(|q| q.point.v),
                    theta: p.map(|q| q.theta),
                    valid: p.is_some(),
                }
            })
            .collect()
    }

    /// Largest `a' ≤ a` on the lattice whose centered square is fully valid.
    pub fn largest_valid_a(&self) -> f64 {
        let c = self.n / 2;
        let mut best = 0;
        for k in 0..=c {
            let ok = (c - k..=c + k).all(|i| (c - k..=c + k).all(|j| self.get(i, j).is_some()));
            if !ok {
                break;
            }
            best = k;
        }
        best as f64 * self.h
    }
}

fn oriented_point(surface: &SurfaceImmersion, p: ParamPoint, which: Asymptotic, reference: [f64; 2]) -> Result<NetPoint> {
    let fr = surface.principal_frame(p)?;
    let (mut e1, mut e2) = fr.asymptotic();
    let r = match which {
        Asymptotic::E1 => e1,
        Asymptotic::E2 => e2,
    };
    if r[0] * reference[0] + r[1] * reference[1] < 0.0 {
        e1 = [-e1[0], -e1[1]];
        e2 = [-e2[0], -e2[1]];
    }
    Ok(NetPoint {
        point: p,
        theta: 2.0 * fr.alpha,
        big_e1: e1,
        big_e2: e2,
    })
}

fn split_trace(
    field: &AsymptoticField,
    start: ParamPoint,
    reference: [f64; 2],
    dt: f64,
    steps: usize,
) -> Result<SplitPath> {
    Ok(SplitPath {
        forward: trace(field, start, reference, dt, steps)?,
        backward: trace(field, start, reference, -dt, steps)?,
    })
}

/// Samples of a split path at lattice offsets `−half..=half`, plus the
/// step-halving error estimate at each.
fn lattice_samples(
    field: &AsymptoticField,
    path: &SplitPath,
    start: ParamPoint,
    reference: [f64; 2],
    m: usize,
    half: usize,
) -> Result<(Vec<Option<(ParamPoint, [f64; 2])>>, f64)> {
    let fine = split_trace(field, start, reference, path.forward.dt / 2.0, 2 * m * half)?;
    let mut out = vec![None; 2 * half + 1];
    let mut err: f64 = 0.0;
    for (sgn, coarse, fine) in [(1isize, &path.forward, &fine.forward), (-1, &path.backward, &fine.backward)] {
        for k in 0..=half {
            let (c, f) = (k * m, 2 * k * m);
            if c < coarse.points.len() {
                let slot = (half as isize + sgn * k as isize) as usize;
                out[slot] = Some((coarse.points[c], coarse.directions[c]));
                if f < fine.points.len() {
                    let (p, q) = (coarse.points[c], fine.points[f]);
                    err = err.max((p.u - q.u).hypot(p.v - q.v) / 15.0);
                }
            }
        }
    }
    Ok((out, err))
}

/// Net on `[−a, a]²` with `n` intervals per axis (`n` even, so the origin is
/// a lattice point). `a = 0` gives the single point at the origin.
pub fn build_net(surface: &SurfaceImmersion, origin: ParamPoint, a: f64, n: usize) -> Result<NetGrid> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(GeomError::InvalidParameter(format!("net half-width must be nonnegative, got {a}")));
    }
    if a == 0.0 {
        let base = surface.principal_frame(origin)?;
        let (e1, e2) = base.asymptotic();
        return Ok(NetGrid {
            a,
            n: 0,
            h: 0.0,
            origin,
            flow_step: 0.0,
            points: vec![Some(NetPoint {
                point: origin,
                theta: 2.0 * base.alpha,
                big_e1: e1,
                big_e2: e2,
            })],
            flow_error: 0.0,
            leg: SplitPath::default(),
            columns: vec![SplitPath::default()],
        });
    }
    if n < 2 || n % 2 != 0 {
        return Err(GeomError::InvalidParameter(format!(
            "net resolution must be a positive even number, got {n}"
        )));
    }
    let h = 2.0 * a / n as f64;
    let m = (h / default_step(h) - 1e-9).ceil().max(1.0) as usize;
    let dt = h / m as f64;
    let half = n / 2;
    let steps = m * half;

    let f1 = AsymptoticField::new(surface, Asymptotic::E1);
    let f2 = AsymptoticField::new(surface, Asymptotic::E2);

    let base = surface.principal_frame(origin)?;
    let (e1_0, _) = base.asymptotic();
    let leg = split_trace(&f1, origin, e1_0, dt, steps)?;
    let (leg_points, leg_err) = lattice_samples(&f1, &leg, origin, e1_0, m, half)?;

    let side = n + 1;
    let columns: Vec<Result<(SplitPath, Vec<Option<NetPoint>>, f64)>> = leg_points
        .par_iter()
        .map(|lp| {
            let Some((p, d1)) = *lp else {
                return Ok((SplitPath::default(), vec![None; side], 0.0));
            };
            let start = oriented_point(surface, p, Asymptotic::E1, d1)?;
            let col = split_trace(&f2, p, start.big_e2, dt, steps)?;
            let (samples, err) = lattice_samples(&f2, &col, p, start.big_e2, m, half)?;
            let pts = samples
                .into_iter()
                .map(|s| s.map(|(q, d2)| oriented_point(surface, q, Asymptotic::E2, d2)).transpose())
                .collect::<Result<Vec<_>>>()?;
            Ok((col, pts, err))
        })
        .collect();

    let mut points = vec![None; side * side];
    let mut cols = Vec::with_capacity(side);
    let mut flow_error = leg_err;
    for (i, c) in columns.into_iter().enumerate() {
        let (col, pts, err) = c?;
        flow_error = flow_error.max(err);
        for (j, p) in pts.into_iter().enumerate() {
            points[j * side + i] = p;
        }
        cols.push(col);
    }
    let grid = NetGrid {
        a,
        n,
        h,
        origin,
        flow_step: dt,
        points,
        flow_error,
        leg,
        columns: cols,
    };
    if grid.valid_count() <= 1 {
        return Err(GeomError::EmptyGrid);
    }
    Ok(grid)
}

/// Largest `|G_{E₁→E₂}(x) − G_{E₂→E₁}(x)|` over the sampled lattice indices
/// whose both paths stay inside the patch, with the number of such samples.
pub fn flow_commutation(surface: &SurfaceImmersion, grid: &NetGrid, samples: &[(usize, usize)]) -> Result<(f64, usize)> {
    let f1 = AsymptoticField::new(surface, Asymptotic::E1);
    let f2 = AsymptoticField::new(surface, Asymptotic::E2);
    let origin = grid.get(grid.n / 2, grid.n / 2).ok_or(GeomError::EmptyGrid)?;
    let res: Vec<Option<f64>> = samples
        .par_iter()
        .map(|&(i, j)| {
            let Some(target) = grid.get(i, j) else {
                return Ok(None);
            };
            let first = integrate_flow(&f2, origin.point, origin.big_e2, grid.x(j), grid.flow_step)?;
            if first.exited {
                return Ok(None);
            }
            let e = oriented_point(surface, first.endpoint, Asymptotic::E2, first.direction)?;
            let second = integrate_flow(&f1, first.endpoint, e.big_e1, grid.x(i), grid.flow_step)?;
            if second.exited {
                return Ok(None);
            }
            let (p, q) = (second.endpoint, target.point);
            Ok(Some((p.u - q.u).hypot(p.v - q.v)))
        })
        .collect::<Result<_>>()?;
    let used: Vec<f64> = res.into_iter().flatten().collect();
    Ok((used.iter().cloned().fold(0.0, f64::max), used.len()))
}

/// `η¹`, `η²` in parameter components, oriented so `η^i(E_i) = 1` for the
/// net orientation given by `reference` on the field `which`.
fn eta_coords(
    surface: &SurfaceImmersion,
    p: ParamPoint,
    which: Asymptotic,
    reference: [f64; 2],
) -> Result<[[f64; 2]; 2]> {
    let fr = surface.principal_frame(p)?;
    let (e1, e2) = fr.asymptotic();
    let r = match which {
        Asymptotic::E1 => e1,
        Asymptotic::E2 => e2,
    };
    let s = if r[0] * reference[0] + r[1] * reference[1] < 0.0 { -1.0 } else { 1.0 };
    let (a, b) = fr.eta_frame();
    let c1 = fr.form_to_coords(a[0], a[1]);
    let c2 = fr.form_to_coords(b[0], b[1]);
    Ok([[s * c1[0], s * c1[1]], [s * c2[0], s * c2[1]]])
}

/// `∫ (η¹, η²)` along a polyline by Simpson's rule on each chord. Because
/// both forms are closed, chords and the curve give the same integral.
fn line_integral(surface: &SurfaceImmersion, path: &[ParamPoint], which: Asymptotic, refs: &dyn Fn(usize) -> [f64; 2]) -> Result<[f64; 2]> {
    let mut acc = [0.0; 2];
    for k in 0..path.len().saturating_sub(1) {
        let (p, q) = (path[k], path[k + 1]);
        let mid = ParamPoint::new(0.5 * (p.u + q.u), 0.5 * (p.v + q.v));
        let r = refs(k);
        let (ep, em, eq) = (
            eta_coords(surface, p, which, r)?,
            eta_coords(surface, mid, which, r)?,
            eta_coords(surface, q, which, refs(k + 1))?,
        );
        let d = [q.u - p.u, q.v - p.v];
        for (c, slot) in acc.iter_mut().enumerate() {
            let f = |e: &[[f64; 2]; 2]| e[c][0] * d[0] + e[c][1] * d[1];
            *slot += (f(&ep) + 4.0 * f(&em) + f(&eq)) / 6.0;
        }
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InverseReport {
    /// `max |F(G(x)) − x|` over the samples.
    pub residual: f64,
    /// `max |F²|` along the sampled stretch of the first leg.
    pub leg_second_coordinate: f64,
    pub samples: usize,
}

/// `F(G(x))` against `x`, integrating `η` along the stored flow paths.
pub fn check_f_inverse(surface: &SurfaceImmersion, grid: &NetGrid, samples: &[(usize, usize)]) -> Result<InverseReport> {
    let c = (grid.n / 2) as isize;
    let m = (grid.h / grid.flow_step).round() as isize;
    let per: Vec<Option<(f64, f64)>> = samples
        .par_iter()
        .map(|&(i, j)| {
            if grid.get(i, j).is_none() {
                return Ok(None);
            }
            let ki = (i as isize - c) * m;
            let kj = (j as isize - c) * m;
            let leg = grid.leg.segment(ki);
            let col = grid.columns[i].segment(kj);
            let lp = if ki >= 0 { &grid.leg.forward } else { &grid.leg.backward };
            let cp = if kj >= 0 { &grid.columns[i].forward } else { &grid.columns[i].backward };
            let f_leg = line_integral(surface, leg, Asymptotic::E1, &|k| lp.directions[k])?;
            let f_col = line_integral(surface, col, Asymptotic::E2, &|k| cp.directions[k])?;
            let x = [grid.x(i), grid.x(j)];
            let r = (f_leg[0] + f_col[0] - x[0]).abs().max((f_leg[1] + f_col[1] - x[1]).abs());
            Ok(Some((r, f_leg[1].abs())))
        })
        .collect::<Result<_>>()?;
    let used: Vec<(f64, f64)> = per.into_iter().flatten().collect();
    Ok(InverseReport {
        residual: used.iter().map(|x| x.0).fold(0.0, f64::max),
        leg_second_coordinate: used.iter().map(|x| x.1).fold(0.0, f64::max),
        samples: used.len(),
    })
}

/// `M_α = [[cos α, cos α], [−sin α, sin α]]` with its singular values
/// (larger first) and determinant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JacobianData {
    pub matrix: [[f64; 2]; 2],
    pub singular_values: [f64; 2],
    pub det: f64,
}

/// Singular values of a 2×2 matrix, larger first.
pub fn singular_values_2x2(m: [[f64; 2]; 2]) -> [f64; 2] {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let p = (a + d).hypot(c - b);
    let q = (a - d).hypot(b + c);
    [(p + q) / 2.0, (p - q).abs() / 2.0]
}

pub fn jacobian_data(alpha: f64) -> Result<JacobianData> {
    if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
        return Err(GeomError::InvalidParameter(format!("alpha must lie in (0, pi/2), got {alpha}")));
    }
    let (s, c) = alpha.sin_cos();
    let matrix = [[c, c], [-s, s]];
    Ok(JacobianData {
        matrix,
        singular_values: singular_values_2x2(matrix),
        det: c * s + c * s,
    })
}

/// `max |det M_{Θ/2} − sin Θ|` over valid lattice points.
pub fn jacobian_det_residual(grid: &NetGrid) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in grid.points.iter().flatten() {
        let j = jacobian_data(p.theta / 2.0)?;
        worst = worst.max((j.det - p.theta.sin()).abs());
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SineGordonReport {
    /// Max of `|cross difference / 4h² − sin Θ|`.
    pub residual: f64,
    pub h: f64,
    pub points: usize,
}

fn cross_points(grid: &NetGrid) -> Vec<(usize, usize, [f64; 5])> {
    let n = grid.n;
    let mut out = Vec::new();
    for j in 1..n {
        for i in 1..n {
            let t = |a: usize, b: usize| grid.theta(a, b);
            if let (Some(c), Some(pp), Some(pm), Some(mp), Some(mm)) = (
                t(i, j),
                t(i + 1, j + 1),
                t(i + 1, j - 1),
                t(i - 1, j + 1),
                t(i - 1, j - 1),
            ) {
                out.push((i, j, [c, pp, pm, mp, mm]));
            }
        }
    }
    out
}

/// `∂²Θ/∂x¹∂x² − sin Θ` by the four-point cross stencil.
pub fn sine_gordon_residual(grid: &NetGrid) -> Result<SineGordonReport> {
    let pts = cross_points(grid);
    if pts.is_empty() {
        return Err(GeomError::InsufficientGrid(
            "no lattice point has its four diagonal neighbours".into(),
        ));
    }
    let h2 = 4.0 * grid.h * grid.h;
    let residual = pts
        .iter()
        .map(|(_, _, t)| ((t[1] - t[2] - t[3] + t[4]) / h2 - t[0].sin()).abs())
        .fold(0.0, f64::max);
    Ok(SineGordonReport {
        residual,
        h: grid.h,
        points: pts.len(),
    })
}

/// `ω₁²(E₁) = −½ ∂Θ/∂x¹` and `ω₁²(E₂) = ½ ∂Θ/∂x²`, with `ω₁²` from exact
/// frame partials and the `Θ` derivatives by centered lattice differences.
pub fn connection_eta_residual(surface: &SurfaceImmersion, grid: &NetGrid) -> Result<f64> {
    let n = grid.n;
    let idx: Vec<(usize, usize)> = (1..n).flat_map(|j| (1..n).map(move |i| (i, j))).collect();
    let res: Vec<Option<f64>> = idx
        .par_iter()
        .map(|&(i, j)| {
            let t = |a: usize, b: usize| grid.theta(a, b);
            let (Some(p), Some(xp), Some(xm), Some(yp), Some(ym)) =
                (grid.get(i, j), t(i + 1, j), t(i - 1, j), t(i, j + 1), t(i, j - 1))
            else {
                return Ok(None);
            };
            let d1 = (xp - xm) / (2.0 * grid.h);
            let d2 = (yp - ym) / (2.0 * grid.h);
            let fr = surface.principal_frame_dual(p.point, 1.0)?;
            let e1 = fr.e1_bar;
            let e2 = fr.e2_bar.map(|x| x.re);
            let w = [
                e1[0].du * e2[0] + e1[1].du * e2[1] + e1[2].du * e2[2],
                e1[0].dv * e2[0] + e1[1].dv * e2[1] + e1[2].dv * e2[2],
            ];
            let on = |v: [f64; 2]| w[0] * v[0] + w[1] * v[1];
            Ok(Some((on(p.big_e1) + 0.5 * d1).abs().max((on(p.big_e2) - 0.5 * d2).abs())))
        })
        .collect::<Result<_>>()?;
    let used: Vec<f64> = res.into_iter().flatten().collect();
    if used.is_empty() {
        return Err(GeomError::InsufficientGrid("no lattice point has all four neighbours".into()));
    }
    Ok(used.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaReport {
    pub a: f64,
    pub n: usize,
    /// Composite Simpson of `sin Θ` over `[−a, a]²`.
    pub quadrature_area: f64,
    /// `Θ(a,a) − Θ(−a,a) − Θ(a,−a) + Θ(−a,−a)`.
    pub corner_area: f64,
    pub difference: f64,
    pub relative_difference: f64,
    /// `corner_area < 2π`.
    pub bound_2pi: bool,
}

pub fn area_two_ways(grid: &NetGrid) -> Result<AreaReport> {
    if grid.points.iter().any(|p| p.is_none()) {
        return Err(GeomError::MissingCorners {
            largest_valid_a: grid.largest_valid_a(),
        });
    }
    let n = grid.n;
    let w = |k: usize| -> f64 {
        if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut sum = 0.0;
    for j in 0..=n {
        for i in 0..=n {
            sum += w(i) * w(j) * grid.theta(i, j).unwrap_or(f64::NAN).sin();
        }
    }
    let quadrature_area = sum * (grid.h / 3.0).powi(2);
    let t = |i, j| grid.theta(i, j).unwrap_or(f64::NAN);
    let corner_area = t(n, n) - t(0, n) - t(n, 0) + t(0, 0);
    let difference = quadrature_area - corner_area;
    Ok(AreaReport {
        a: grid.a,
        n,
        quadrature_area,
        corner_area,
        difference,
        relative_difference: difference.abs() / quadrature_area.abs().max(f64::MIN_POSITIVE),
        bound_2pi: corner_area < 2.0 * std::f64::consts::PI,
    })
}
