//! Picard iteration for flows of unit-speed fields on the Poincaré disk.
//!
//! A field of hyperbolic length one has Euclidean length `(1 − |z|²)/2 ≤ 1/2`,
//! so on the box `|y| ≤ b` with time half-width `a` the iteration certifies a
//! solution on `(−ε, ε)` with `ε = min(a, b / M)`, `M = 1/2`.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::hyperbolic::{mobius_apply, mobius_pushforward, DiskPoint, HTangent, MobiusIsometry};

/// Euclidean-component vector field on the open unit disk.
pub type DiskField<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

/// Field of hyperbolic length one pointing at angle `angle(x, y)`.
#[derive(Clone, Copy, Debug)]
pub struct UnitField {
    pub name: &'static str,
    pub angle: fn(f64, f64) -> f64,
}

impl UnitField {
    pub fn eval(&self, z: [f64; 2]) -> [f64; 2] {
        let s = 0.5 * (1.0 - z[0] * z[0] - z[1] * z[1]);
        let (sn, cs) = (self.angle)(z[0], z[1]).sin_cos();
        [s * cs, s * sn]
    }
}

/// Five smooth unit fields used by the demo and the tests.
pub fn sample_fields() -> [UnitField; 5] {
    [
        UnitField {
            name: "constant",
            angle: |_, _| 0.0,
        },
        UnitField {
            name: "tilted",
            angle: |_, _| 1.0,
        },
        UnitField {
            name: "shear",
            angle: |x, _| 1.0 + 2.0 * x,
        },
        UnitField {
            name: "saddle",
            angle: |x, y| 3.0 * x * y,
        },
        UnitField {
            name: "arg_one_plus_z_squared",
            angle: |x, y| (2.0 * x * y).atan2(1.0 + x * x - y * y),
        },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PicardOptions {
    /// Time half-width.
    pub a: f64,
    /// Radius of the box around the start.
    pub b: f64,
    /// Speed bound.
    pub m: f64,
    /// Time intervals on `[−a, a]`; rounded up to a multiple of 4.
    pub intervals: usize,
    pub max_iterations: usize,
    /// Stop when successive iterates differ by less than this.
    pub tolerance: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 0.5,
            m: 0.5,
            intervals: 4000,
            max_iterations: 200,
            tolerance: 1e-13,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardCertificate {
    pub start: [f64; 2],
    /// `min(a, b / M)`.
    pub epsilon: f64,
    pub interval: [f64; 2],
    pub iterations: usize,
    /// Sup-norm distances between successive iterates.
    pub differences: Vec<f64>,
    /// Largest ratio of successive differences once they fall below `b`.
    pub contraction_ratio: f64,
    /// Largest Euclidean speed seen along any iterate.
    pub max_speed: f64,
    /// Largest `|y(t) − y(0)|` seen along any iterate, in the recentered chart.
    pub max_displacement: f64,
    /// `max |y(t) − y(0) − ∫₀ᵗ X(y)|` with the integral by Simpson's rule.
    pub integral_residual: f64,
    /// Solution at `t = −ε` and `t = ε`, in the original chart.
    pub endpoints: [[f64; 2]; 2],
    pub certified: bool,
}

/// Checks `|X|_hyp = 1` on a polar sample of the disk out to radius 0.95.
pub fn check_unit_field(field: DiskField) -> Result<()> {
    for ir in 0..20 {
        let r = 0.05 * ir as f64;
        for ia in 0..24 {
            let t = ia as f64 * std::f64::consts::TAU / 24.0;
            let z = [r * t.cos(), r * t.sin()];
            let v = field(z);
            let hyp = 2.0 * v[0].hypot(v[1]) / (1.0 - r * r);
            if (hyp - 1.0).abs() > 1e-8 {
                return Err(GeomError::Precondition(format!(
                    "field has hyperbolic length {hyp} at ({:.3}, {:.3}); expected 1",
                    z[0], z[1]
                )));
            }
        }
    }
    Ok(())
}

/// Cumulative trapezoid from the center node outward.
fn integrate_from_center(f: &[[f64; 2]], dt: f64) -> Vec<[f64; 2]> {
    let n = f.len() - 1;
    let c = n / 2;
    let mut out = vec![[0.0; 2]; n + 1];
    for k in c + 1..=n {
        for d in 0..2 {
            out[k][d] = out[k - 1][d] + 0.5 * dt * (f[k - 1][d] + f[k][d]);
        }
    }
    for k in (0..c).rev() {
        for d in 0..2 {
            out[k][d] = out[k + 1][d] - 0.5 * dt * (f[k + 1][d] + f[k][d]);
        }
    }
    out
}

/// Picard iteration for `y' = X(y)`, `y(0) = start`, on `[−a, a]`.
fn iterate(field: DiskField, start: [f64; 2], opts: &PicardOptions) -> Result<(PicardCertificate, Vec<[f64; 2]>)> {
    let n = opts.intervals.div_ceil(4).max(1) * 4;
    let dt = 2.0 * opts.a / n as f64;
    let c = n / 2;
    let mut y = vec![start; n + 1];
    let mut differences = Vec::new();
    let mut max_speed: f64 = 0.0;
    let mut max_disp: f64 = 0.0;
    let mut iterations = 0;
    let eval = |y: &[[f64; 2]]| -> Result<Vec<[f64; 2]>> {
        y.iter()
            .map(|z| {
                if z[0] * z[0] + z[1] * z[1] >= 1.0 {
                    return Err(GeomError::OutsideDisk { x: z[0], y: z[1] });
                }
                Ok(field(*z))
            })
            .collect()
    };
    for _ in 0..opts.max_iterations {
        let fx = eval(&y)?;
        max_speed = fx.iter().map(|v| v[0].hypot(v[1])).fold(max_speed, f64::max);
        let integral = integrate_from_center(&fx, dt);
        let next: Vec<[f64; 2]> = integral.iter().map(|d| [start[0] + d[0], start[1] + d[1]]).collect();
        let diff = next
            .iter()
            .zip(&y)
            .map(|(p, q)| (p[0] - q[0]).hypot(p[1] - q[1]))
            .fold(0.0, f64::max);
        max_disp = integral.iter().map(|d| d[0].hypot(d[1])).fold(max_disp, f64::max);
        y = next;
        iterations += 1;
        differences.push(diff);
        if diff < opts.tolerance {
            break;
        }
    }
    let fx = eval(&y)?;
    max_speed = fx.iter().map(|v| v[0].hypot(v[1])).fold(max_speed, f64::max);

    // Simpson on node pairs from the center; only even offsets are checked.
    let mut integral_residual: f64 = 0.0;
    for dir in [1isize, -1] {
        let mut acc = [0.0; 2];
        let mut k = 0isize;
        while (k + 2) as usize <= c {
            let i = |o: isize| (c as isize + dir * o) as usize;
            for d in 0..2 {
                acc[d] += dir as f64 * dt / 3.0 * (fx[i(k)][d] + 4.0 * fx[i(k + 1)][d] + fx[i(k + 2)][d]);
            }
            k += 2;
            let z = y[i(k)];
            let r = (z[0] - start[0] - acc[0]).hypot(z[1] - start[1] - acc[1]);
            integral_residual = integral_residual.max(r);
        }
    }

    let contraction_ratio = differences
        .windows(2)
        .filter(|w| w[0] < opts.b && w[0] > 1e3 * opts.tolerance)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let epsilon = opts.a.min(opts.b / opts.m);
    let converged = differences.last().is_some_and(|d| *d < opts.tolerance);
    let certified = converged
        && max_speed <= opts.m + 1e-10
        && max_disp <= opts.b + 1e-12
        && contraction_ratio < 1.0
        && integral_residual < 1e-6;
    Ok((
        PicardCertificate {
            start,
            epsilon,
            interval: [-epsilon, epsilon],
            iterations,
            differences,
            contraction_ratio,
            max_speed,
            max_displacement: max_disp,
            integral_residual,
            endpoints: [y[0], y[n]],
            certified,
        },
        y,
    ))
}

/// Runs the demo from the origin.
pub fn picard_existence_demo(field: DiskField, opts: &PicardOptions) -> Result<PicardCertificate> {
    check_unit_field(field)?;
    Ok(iterate(field, [0.0, 0.0], opts)?.0)
}

/// Runs the demo from `p` by moving `p` to the origin with a Möbius isometry,
/// iterating there on the transported field, and mapping the solution back.
pub fn picard_recentered(field: DiskField, p: DiskPoint, opts: &PicardOptions) -> Result<PicardCertificate> {
    check_unit_field(field)?;
    let to = MobiusIsometry::to_origin(p);
    let from = to.inverse();
    let moved = move |w: [f64; 2]| -> [f64; 2] {
        let Ok(wp) = DiskPoint::new(w[0], w[1]) else {
            return [f64::NAN; 2];
        };
        let z = mobius_apply(&from, &wp);
        let x = field(z.coords());
        let t = mobius_pushforward(&to, &HTangent::new(z, x[0], x[1]));
        [t.vx, t.vy]
    };
    check_unit_field(&moved)?;
    let (mut cert, _) = iterate(&moved, [0.0, 0.0], opts)?;
    let back = |w: [f64; 2]| -> Result<[f64; 2]> { Ok(mobius_apply(&from, &DiskPoint::new(w[0], w[1])?).coords()) };
    cert.endpoints = [back(cert.endpoints[0])?, back(cert.endpoints[1])?];
    cert.start = p.coords();
    Ok(cert)
}
