//! Integral curves of line fields in parameter coordinates.
//!
//! Fields are only defined up to sign (principal and asymptotic directions
//! are line fields), so the integrator keeps the orientation continuous by
//! aligning each evaluation with the direction at the previous accepted
//! point. Steps are fixed-size classical RK4; accuracy is validated by one
//! step-halving pass.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::surface::{ParamPoint, Rect, SurfaceImmersion};

/// Tangent line field on a parameter rectangle.
pub trait LineField: Sync {
    fn domain(&self) -> Rect;

    /// Some unit vector spanning the line at `p`, in parameter components.
    fn direction(&self, p: ParamPoint) -> Result<[f64; 2]>;

    /// Direction at `p` oriented to agree with `reference`.
    fn oriented(&self, p: ParamPoint, reference: [f64; 2]) -> Result<[f64; 2]> {
        if !self.domain().contains(p) {
            return Err(GeomError::OutOfDomain { u: p.u, v: p.v });
        }
        let d = self.direction(p)?;
        Ok(if d[0] * reference[0] + d[1] * reference[1] < 0.0 {
            [-d[0], -d[1]]
        } else {
            d
        })
    }
}

/// Constant vector field, mostly for tests and controls.
#[derive(Clone, Copy, Debug)]
pub struct ConstantField {
    pub velocity: [f64; 2],
    pub domain: Rect,
}

impl LineField for ConstantField {
    fn domain(&self) -> Rect {
        self.domain
    }

    fn direction(&self, _p: ParamPoint) -> Result<[f64; 2]> {
        Ok(self.velocity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Asymptotic {
    E1,
    E2,
}

/// One of the two asymptotic line fields of a negatively curved surface.
#[derive(Clone, Debug)]
pub struct AsymptoticField<'a> {
    pub surface: &'a SurfaceImmersion,
    pub which: Asymptotic,
    /// Restricts the flow to a sub-rectangle of the surface domain.
    pub domain: Rect,
}

impl<'a> AsymptoticField<'a> {
    pub fn new(surface: &'a SurfaceImmersion, which: Asymptotic) -> Self {
        Self {
            surface,
            which,
            domain: surface.domain(),
        }
    }
}

impl LineField for AsymptoticField<'_> {
    fn domain(&self) -> Rect {
        self.domain
    }

    fn direction(&self, p: ParamPoint) -> Result<[f64; 2]> {
        let (e1, e2) = self.surface.principal_frame(p)?.asymptotic();
        Ok(match self.which {
            Asymptotic::E1 => e1,
            Asymptotic::E2 => e2,
        })
    }
}

/// Endpoint of an integral curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowResult {
    pub endpoint: ParamPoint,
    pub time_reached: f64,
    pub exited: bool,
    /// Last point reached before leaving the domain.
    pub exit_point: Option<ParamPoint>,
    /// Oriented field direction at the endpoint.
    pub direction: [f64; 2],
    /// Richardson estimate `|x_{h/2} − x_h| / 15`.
    pub error_estimate: f64,
}

impl FlowResult {
    /// Whether the step-halving estimate meets `tol` per unit time.
    pub fn validated(&self, tol_per_unit_time: f64) -> bool {
        self.error_estimate <= tol_per_unit_time * self.time_reached.abs().max(f64::EPSILON)
    }
}

/// Default step: `min(1e-3, spacing / 10)`.
pub fn default_step(spacing: f64) -> f64 {
    1e-3_f64.min(spacing / 10.0)
}

fn add(p: ParamPoint, v: [f64; 2], s: f64) -> ParamPoint {
    ParamPoint::new(p.u + s * v[0], p.v + s * v[1])
}

/// One RK4 step of signed size `dt`. `dir` is the oriented field direction
/// at `p`; the returned direction is the oriented field at the new point.
pub fn rk4_step<F: LineField + ?Sized>(
    field: &F,
    p: ParamPoint,
    dir: [f64; 2],
    dt: f64,
) -> Result<(ParamPoint, [f64; 2])> {
    let k1 = dir;
    let k2 = field.oriented(add(p, k1, dt / 2.0), k1)?;
    let k3 = field.oriented(add(p, k2, dt / 2.0), k2)?;
    let k4 = field.oriented(add(p, k3, dt), k3)?;
    let next = ParamPoint::new(
        p.u + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p.v + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    );
    let d = field.oriented(next, k4)?;
    Ok((next, d))
}

/// Samples of a curve at uniform times `0, dt, 2dt, ...`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FlowPath {
    pub dt: f64,
    pub points: Vec<ParamPoint>,
    pub directions: Vec<[f64; 2]>,
}

impl FlowPath {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Fixed-step trace of `steps` steps of signed size `dt`, stopping early at
/// the first step that leaves the domain.
pub fn trace<F: LineField + ?Sized>(
    field: &F,
    start: ParamPoint,
    reference: [f64; 2],
    dt: f64,
    steps: usize,
) -> Result<FlowPath> {
    let d0 = field.oriented(start, reference)?;
    let mut path = FlowPath {
        dt,
        points: Vec::with_capacity(steps + 1),
        directions: Vec::with_capacity(steps + 1),
    };
    path.points.push(start);
    path.directions.push(d0);
    let (mut p, mut d) = (start, d0);
    for _ in 0..steps {
        match rk4_step(field, p, d, dt) {
            Ok((q, e)) => {
                p = q;
                d = e;
                path.points.push(p);
                path.directions.push(d);
            }
            Err(GeomError::OutOfDomain { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(path)
}

struct Run {
    point: ParamPoint,
    dir: [f64; 2],
    time: f64,
    exited: bool,
}

// Creeps toward the boundary by halving the step when a step fails.
fn run<F: LineField + ?Sized>(field: &F, start: ParamPoint, d0: [f64; 2], t: f64, step: f64) -> Result<Run> {
    let n = (t.abs() / step).ceil().max(1.0) as usize;
    let dt = t / n as f64;
    let (mut p, mut d, mut time) = (start, d0, 0.0);
    let mut h = dt;
    while (t - time).abs() > 1e-14 * t.abs().max(1.0) {
        let h_now = if (t - time).abs() < h.abs() { t - time } else { h };
        match rk4_step(field, p, d, h_now) {
            Ok((q, e)) => {
                p = q;
                d = e;
                time += h_now;
            }
            Err(GeomError::OutOfDomain { .. }) => {
                h /= 2.0;
                if h.abs() < 1e-12 {
                    return Ok(Run { point: p, dir: d, time, exited: true });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Run { point: p, dir: d, time: t, exited: false })
}

/// Flow for signed time `t` from `start`, with `reference` fixing the
/// orientation at the start.
pub fn integrate_flow<F: LineField + ?Sized>(
    field: &F,
    start: ParamPoint,
    reference: [f64; 2],
    t: f64,
    step: f64,
) -> Result<FlowResult> {
    if !(step > 0.0 && t.is_finite()) {
        return Err(GeomError::InvalidParameter(format!(
            "flow needs a positive step and finite time, got step = {step}, t = {t}"
        )));
    }
    let d0 = field.oriented(start, reference)?;
    if t == 0.0 {
        return Ok(FlowResult {
            endpoint: start,
            time_reached: 0.0,
            exited: false,
            exit_point: None,
            direction: d0,
            error_estimate: 0.0,
        });
    }
    let coarse = run(field, start, d0, t, step)?;
    let fine = run(field, start, d0, t, step / 2.0)?;
    if fine.exited || coarse.exited {
        let r = if fine.exited { &fine } else { &coarse };
        return Ok(FlowResult {
            endpoint: r.point,
            time_reached: r.time,
            exited: true,
            exit_point: Some(r.point),
            direction: r.dir,
            error_estimate: f64::NAN,
        });
    }
    let err = (fine.point.u - coarse.point.u).hypot(fine.point.v - coarse.point.v) / 15.0;
    Ok(FlowResult {
        endpoint: fine.point,
        time_reached: t,
        exited: false,
        exit_point: None,
        direction: fine.dir,
        error_estimate: err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn box_domain() -> Rect {
        Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let f = ConstantField {
            velocity: [0.6, 0.8],
            domain: box_domain(),
        };
        let p = ParamPoint::new(0.1, 0.2);
        let r = integrate_flow(&f, p, [1.0, 0.0], 0.0, 1e-3).unwrap();
        assert_eq!(r.endpoint, p);
        assert!(!r.exited);
    }

    #[test]
    fn constant_field_is_straight() {
        let f = ConstantField {
            velocity: [0.6, 0.8],
            domain: box_domain(),
        };
        let r = integrate_flow(&f, ParamPoint::new(0.0, 0.0), [1.0, 0.0], 0.5, 1e-3).unwrap();
        assert!((r.endpoint.u - 0.3).abs() < 1e-14 && (r.endpoint.v - 0.4).abs() < 1e-14);
        // The reference only fixes orientation: an opposite reference reverses it.
        let back = integrate_flow(&f, ParamPoint::new(0.0, 0.0), [-1.0, 0.0], 0.5, 1e-3).unwrap();
        assert!((back.endpoint.u + 0.3).abs() < 1e-14);
    }

    #[test]
    fn leaving_the_domain_is_reported() {
        let f = ConstantField {
            velocity: [1.0, 0.0],
            domain: box_domain(),
        };
        let r = integrate_flow(&f, ParamPoint::new(0.0, 0.0), [1.0, 0.0], 3.0, 1e-2).unwrap();
        assert!(r.exited);
        assert!(r.time_reached < 3.0 && r.time_reached > 0.99);
        assert!((r.endpoint.u - 1.0).abs() < 1e-6);
    }

    #[test]
    fn forward_then_backward_returns() {
        let s = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap();
        let f = AsymptoticField::new(&s, Asymptotic::E1);
        let p = ParamPoint::new(1.5, 0.3);
        let fwd = integrate_flow(&f, p, [1.0, 0.0], 0.4, 1e-3).unwrap();
        let back = integrate_flow(&f, fwd.endpoint, fwd.direction, -0.4, 1e-3).unwrap();
        assert!((back.endpoint.u - p.u).abs() < 1e-8 && (back.endpoint.v - p.v).abs() < 1e-8);
        assert!(fwd.validated(1e-9));
    }
}
