use std::f64::consts::PI;

use framecheck::frames::{
    check_alpha_principal_consistency, check_eta_closed, check_lemma_connalpha, check_lemma_connprin,
    check_structure, frame_field, GridSpec, Residual,
};
use framecheck::hyperbolic::{
    disk_area, disk_area_closed_form, isometry_residual, DiskPoint, HTangent, MobiusIsometry,
};
use framecheck::net::{
    area_two_ways, build_net, check_f_inverse, connection_eta_residual, flow_commutation, jacobian_det_residual,
    picard_existence_demo, picard_recentered, sample_fields, sine_gordon_residual, AreaReport, NetGrid,
    PicardCertificate, PicardOptions,
};
use framecheck::surface::{ParamPoint, SurfaceImmersion};
use framecheck::GeomError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{Format, Resolved, SurfaceConfig};
use crate::error::CliError;
use crate::output::{write_json, write_net_csv};

/// Result of a command: whether every check passed, and what to print.
pub struct Outcome {
    pub passed: bool,
    pub lines: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub identity: String,
    /// Spacing at the fine level.
    pub h: Option<f64>,
    pub residual: f64,
    pub coarse_h: Option<f64>,
    pub coarse_residual: Option<f64>,
    pub rate: Option<f64>,
    /// Window the rate must fall in, when the rate is asserted.
    pub rate_window: Option<[f64; 2]>,
    pub tolerance: f64,
    pub pass: bool,
    pub note: Option<String>,
}

impl CheckRecord {
    fn single(cfg: &Resolved, check: &str, identity: &str, h: Option<f64>, residual: f64) -> Self {
        let tolerance = cfg.tolerance(check);
        Self {
            check: check.into(),
            identity: identity.into(),
            h,
            residual,
            coarse_h: None,
            coarse_residual: None,
            rate: None,
            rate_window: None,
            tolerance,
            pass: residual < tolerance,
            note: None,
        }
    }

    fn two_level(cfg: &Resolved, check: &str, identity: &str, h: [f64; 2], residual: [f64; 2]) -> Self {
        let tolerance = cfg.tolerance(check);
        let rate = residual[0] / residual[1];
        let [lo, hi] = cfg.rate_window;
        Self {
            check: check.into(),
            identity: identity.into(),
            h: Some(h[1]),
            residual: residual[1],
            coarse_h: Some(h[0]),
            coarse_residual: Some(residual[0]),
            rate: Some(rate),
            rate_window: Some(cfg.rate_window),
            tolerance,
            pass: residual[1] < tolerance && rate >= lo && rate <= hi,
            note: None,
        }
    }

    fn failed(cfg: &Resolved, check: &str, identity: &str, note: String) -> Self {
        let mut r = Self::single(cfg, check, identity, None, f64::NAN);
        r.pass = false;
        r.note = Some(note);
        r
    }

    fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let rate = self.rate.map(|r| format!(" rate {r:.3}")).unwrap_or_default();
        let note = self.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
        format!(
            "{status} {:<28} residual {:.3e} < {:.1e}{rate}{note}",
            self.check, self.residual, self.tolerance
        )
    }
}

#[derive(Serialize)]
struct Header<'a> {
    command: &'a str,
    surface: &'a SurfaceConfig,
    seed: u64,
}

fn header<'a>(cfg: &'a Resolved, command: &'a str) -> Header<'a> {
    Header {
        command,
        surface: &cfg.config.surface,
        seed: cfg.seed,
    }
}

fn wrote(lines: &mut Vec<String>, path: std::path::PathBuf) {
    lines.push(format!("wrote {}", path.display()));
}


#[derive(Clone, Copy, Debug, Serialize)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub count: usize,
}

impl Stats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for &x in values {
            min = min.min(x);
            max = max.max(x);
            sum += x;
        }
        Some(Self {
            min,
            max,
            mean: sum / values.len() as f64,
            count: values.len(),
        })
    }
}

#[derive(Serialize)]
struct SurfaceInfo<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    domain: [f64; 4],
    h: f64,
    points: usize,
    gaussian_curvature: Option<Stats>,
    max_unit_curvature_deviation: f64,
    kappa1: Option<Stats>,
    kappa2: Option<Stats>,
    alpha: Option<Stats>,
    /// Smallest `|X_u × X_v|` over the sample.
    immersion_margin: f64,
    notices: Vec<String>,
}

pub fn surface_info(cfg: &Resolved) -> Result<Outcome, CliError> {
    let s = &cfg.surface;
    let grid = GridSpec::over(&cfg.patch, cfg.h)?;
    let pts: Vec<ParamPoint> = (0..grid.nv)
        .flat_map(|j| (0..grid.nu).map(move |i| (i, j)))
        .map(|(i, j)| grid.point(i, j))
        .collect();
    let (mut k, mut k1, mut k2, mut alpha) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut margin = f64::INFINITY;
    let mut first_error: Option<(ParamPoint, GeomError)> = None;
    let mut non_hyperbolic = 0;
    for &p in &pts {
        let (first, _) = s.fundamental_forms(p)?;
        margin = margin.min(first.det().sqrt());
        let kk = s.gaussian_curvature(p)?;
        let (a, b) = s.shape_eigenvalues(p)?;
        k.push(kk);
        k1.push(a);
        k2.push(b);
        match s.principal_data(p) {
            Ok(d) => alpha.push(d.alpha),
            Err(e) => {
                non_hyperbolic += 1;
                first_error.get_or_insert((p, e));
            }
        }
    }
    let mut notices = Vec::new();
    if let Some((p, e)) = first_error {
        notices.push(format!(
            "principal and asymptotic data unavailable at {non_hyperbolic} of {} points; first at ({}, {}): {e}",
            pts.len(),
            p.u,
            p.v
        ));
    }
    let dev = k.iter().map(|x| (x + 1.0).abs()).fold(0.0, f64::max);
    if dev > 1e-6 {
        notices.push(format!(
            "curvature is not identically -1 (max deviation {dev:.3e}); checks that assume K = -1 will refuse this surface"
        ));
    }
    let info = SurfaceInfo {
        header: header(cfg, "surface-info"),
        domain: [cfg.patch.u_min, cfg.patch.u_max, cfg.patch.v_min, cfg.patch.v_max],
        h: grid.h,
        points: pts.len(),
        gaussian_curvature: Stats::of(&k),
        max_unit_curvature_deviation: dev,
        kappa1: Stats::of(&k1),
        kappa2: Stats::of(&k2),
        alpha: Stats::of(&alpha),
        immersion_margin: margin,
        notices: notices.clone(),
    };
    let mut lines = Vec::new();
    let show = |name: &str, st: Option<Stats>| match st {
        Some(st) => format!("{name:<6} min {:.12e} max {:.12e} mean {:.12e}", st.min, st.max, st.mean),
        None => format!("{name:<6} unavailable"),
    };
    lines.push(format!("{} points on {:?}", pts.len(), info.domain));
    lines.push(show("K", info.gaussian_curvature));
    lines.push(show("kappa1", info.kappa1));
    lines.push(show("kappa2", info.kappa2));
    lines.push(show("alpha", info.alpha));
    lines.push(format!("immersion margin {margin:.6e}"));
    lines.extend(notices.iter().map(|n| format!("notice: {n}")));
    if cfg.wants(Format::Json) {
        wrote(&mut lines, write_json(&cfg.output, "report.json", &info)?);
    }
    Ok(Outcome { passed: true, lines })
}


fn frame_residuals(s: &SurfaceImmersion, cfg: &Resolved, h: f64) -> Result<Vec<Residual>, CliError> {
    let f = frame_field(s, GridSpec::over(&cfg.patch, h)?)?;
    let mut out = check_structure(&f)?;
    out.push(check_lemma_connprin(&f)?);
    out.push(check_lemma_connalpha(&f)?);
    let eta = check_eta_closed(&f)?;
    out.extend([eta.d_eta1, eta.d_eta2, eta.d_sec_theta1, eta.d_csc_theta2]);
    out.push(check_alpha_principal_consistency(&f)?);
    Ok(out)
}

fn lattice_samples(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.gen_range(0..=n), rng.gen_range(0..=n))).collect()
}

fn random_disk_point(rng: &mut ChaCha8Rng, radius: f64) -> DiskPoint {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..2.0 * PI);
    DiskPoint::new(r * t.cos(), r * t.sin()).expect("inside the unit disk")
}

fn mobius_samples(seed: u64, samples: usize, ring: Option<f64>) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let p = match ring {
            Some(t) => {
                let a = rng.gen_range(0.0..2.0 * PI);
                DiskPoint::new(t * a.cos(), t * a.sin()).expect("inside the unit disk")
            }
            None => random_disk_point(&mut rng, 0.95),
        };
        let q = random_disk_point(&mut rng, ring.unwrap_or(0.95));
        let c = random_disk_point(&mut rng, 0.95);
        let m = if k % 2 == 0 {
            MobiusIsometry::to_origin(c)
        } else {
            MobiusIsometry::from_origin(c)
        };
        let v = HTangent::new(p, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        worst = worst.max(isometry_residual(&m, &p, &q, &v));
    }
    worst
}

fn net_records(cfg: &Resolved) -> Result<Vec<CheckRecord>, CliError> {
    let s = &cfg.surface;
    let (coarse, fine) = rayon::join(
        || build_net(s, cfg.origin, cfg.a, cfg.n),
        || build_net(s, cfg.origin, cfg.a, 2 * cfg.n),
    );
    let (coarse, fine) = (coarse?, fine?);
    let mut out = Vec::new();
    let (a, b) = (sine_gordon_residual(&coarse)?, sine_gordon_residual(&fine)?);
    out.push(CheckRecord::two_level(
        cfg,
        "sine_gordon",
        "d2 Theta / dx1 dx2 = sin Theta",
        [a.h, b.h],
        [a.residual, b.residual],
    ));
    let (a, b) = (connection_eta_residual(s, &coarse)?, connection_eta_residual(s, &fine)?);
    out.push(CheckRecord::two_level(
        cfg,
        "connection_eta",
        "omega12(E1) = -1/2 dTheta/dx1, omega12(E2) = 1/2 dTheta/dx2",
        [coarse.h, fine.h],
        [a, b],
    ));

    let samples = lattice_samples(cfg.n, cfg.samples, cfg.seed);
    let (comm, used) = flow_commutation(s, &coarse, &samples)?;
    let mut r = CheckRecord::single(
        cfg,
        "flow_commutation",
        "flow E1 then E2 = flow E2 then E1",
        Some(coarse.h),
        comm,
    );
    r.note = Some(format!("{used} of {} sampled lattice points inside the patch", samples.len()));
    out.push(r);
    let inv = check_f_inverse(s, &coarse, &samples)?;
    let mut r = CheckRecord::single(cfg, "net_inverse", "F(G(x)) = x", Some(coarse.h), inv.residual);
    r.note = Some(format!("{} sampled lattice points", inv.samples));
    out.push(r);
    out.push(CheckRecord::single(
        cfg,
        "jacobian_determinant",
        "det M_(Theta/2) = sin Theta",
        Some(coarse.h),
        jacobian_det_residual(&coarse)?,
    ));

    match area_two_ways(&coarse) {
        Ok(rep) => {
            out.push(CheckRecord::single(
                cfg,
                "area_two_ways",
                "integral of sin Theta = corner sum of Theta",
                Some(coarse.h),
                rep.relative_difference,
            ));
            out.push(CheckRecord::single(
                cfg,
                "corner_area_bound",
                "corner sum of Theta < 2 pi",
                Some(coarse.h),
                rep.corner_area / (2.0 * PI),
            ));
        }
        Err(GeomError::MissingCorners { largest_valid_a }) => {
            let note = format!("net has missing points; largest valid a is {largest_valid_a}");
            out.push(CheckRecord::failed(cfg, "area_two_ways", "integral of sin Theta = corner sum of Theta", note.clone()));
            out.push(CheckRecord::failed(cfg, "corner_area_bound", "corner sum of Theta < 2 pi", note));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    domain: [f64; 4],
    net: NetSettings,
    checks: Vec<CheckRecord>,
    passed: bool,
}

#[derive(Serialize)]
struct NetSettings {
    origin: [f64; 2],
    a: f64,
    n: [usize; 2],
}

pub fn verify(cfg: &Resolved) -> Result<Outcome, CliError> {
    let s = &cfg.surface;
    let (h_c, h_f) = (2.0 * cfg.h, cfg.h);
    let ((coarse, fine), nets) = rayon::join(
        || rayon::join(|| frame_residuals(s, cfg, h_c), || frame_residuals(s, cfg, h_f)),
        || net_records(cfg),
    );
    let (coarse, fine, nets) = (coarse?, fine?, nets?);

    let mut checks = Vec::new();
    for (c, f) in coarse.iter().zip(&fine) {
        checks.push(if f.check == "alpha_principal_consistency" {
            CheckRecord::single(cfg, f.check, f.identity, Some(h_f), f.value)
        } else {
            CheckRecord::two_level(cfg, f.check, f.identity, [h_c, h_f], [c.value, f.value])
        });
    }
    checks.extend(nets);
    checks.push(CheckRecord::single(
        cfg,
        "mobius_invariance",
        "d(Mp, Mq) = d(p, q), |dM v| = |v|",
        None,
        mobius_samples(cfg.seed, cfg.disk_samples, None),
    ));

    let passed = checks.iter().all(|c| c.pass);
    let mut lines: Vec<String> = checks.iter().map(CheckRecord::line).collect();
    let failed = checks.iter().filter(|c| !c.pass).count();
    lines.push(format!("{} checks, {failed} failed", checks.len()));
    let report = VerifyReport {
        header: header(cfg, "verify"),
        domain: [cfg.patch.u_min, cfg.patch.u_max, cfg.patch.v_min, cfg.patch.v_max],
        net: NetSettings {
            origin: [cfg.origin.u, cfg.origin.v],
            a: cfg.a,
            n: [cfg.n, 2 * cfg.n],
        },
        checks,
        passed,
    };
    if cfg.wants(Format::Json) {
        wrote(&mut lines, write_json(&cfg.output, "report.json", &report)?);
    }
    Ok(Outcome { passed, lines })
}


/// Largest half-width whose net around the origin has no missing points,
/// found by bisection on coarse nets.
fn largest_valid_a(s: &SurfaceImmersion, origin: ParamPoint, a: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, a);
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        match build_net(s, origin, mid, 4) {
            Ok(g) if g.valid_count() == g.points.len() => lo = mid,
            _ => hi = mid,
        }
    }
    lo
}

fn build_or_hint(cfg: &Resolved) -> Result<NetGrid, CliError> {
    match build_net(&cfg.surface, cfg.origin, cfg.a, cfg.n) {
        Err(GeomError::EmptyGrid) => Err(CliError::Failed {
            message: format!(
                "net is empty: every flow from the origin leaves the patch; largest valid a is about {:.6e}",
                largest_valid_a(&cfg.surface, cfg.origin, cfg.a)
            ),
        }),
        r => Ok(r?),
    }
}

#[derive(Serialize)]
struct NetSummary<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    origin: [f64; 2],
    a: f64,
    n: usize,
    h: f64,
    flow_step: f64,
    flow_error: f64,
    points: usize,
    valid_points: usize,
    largest_valid_a: f64,
    theta: Option<Stats>,
    sine_gordon_residual: Option<f64>,
}

pub fn net(cfg: &Resolved) -> Result<Outcome, CliError> {
    let grid = build_or_hint(cfg)?;
    let thetas: Vec<f64> = grid.points.iter().flatten().map(|p| p.theta).collect();
    let summary = NetSummary {
        header: header(cfg, "net"),
        origin: [cfg.origin.u, cfg.origin.v],
        a: grid.a,
        n: grid.n,
        h: grid.h,
        flow_step: grid.flow_step,
        flow_error: grid.flow_error,
        points: grid.points.len(),
        valid_points: grid.valid_count(),
        largest_valid_a: grid.largest_valid_a(),
        theta: Stats::of(&thetas),
        sine_gordon_residual: sine_gordon_residual(&grid).ok().map(|r| r.residual),
    };
    let mut lines = vec![format!(
        "net a = {} n = {}: {} of {} lattice points valid",
        grid.a,
        grid.n,
        summary.valid_points,
        summary.points
    )];
    if cfg.wants(Format::Csv) {
        wrote(&mut lines, write_net_csv(&cfg.output, &grid)?);
    }
    if cfg.wants(Format::Json) {
        wrote(&mut lines, write_json(&cfg.output, "net_summary.json", &summary)?);
    }
    Ok(Outcome { passed: true, lines })
}


#[derive(Serialize)]
struct AreaOutput<'a> {
    #[serde(flatten)]
    header: Header<'a>,
    origin: [f64; 2],
    area: AreaReport,
    checks: Vec<CheckRecord>,
    passed: bool,
}

pub fn area(cfg: &Resolved) -> Result<Outcome, CliError> {
    let grid = build_or_hint(cfg)?;
    let rep = match area_two_ways(&grid) {
        Err(GeomError::MissingCorners { largest_valid_a: on_lattice }) => {
            let hint = on_lattice.max(largest_valid_a(&cfg.surface, cfg.origin, cfg.a));
            return Err(CliError::Failed {
                message: format!(
                    "net has lattice points outside the patch, so the corner formula does not apply; largest valid a is about {hint:.6e}"
                ),
            });
        }
        r => r?,
    };
    let checks = vec![
        CheckRecord::single(
            cfg,
            "area_two_ways",
            "integral of sin Theta = corner sum of Theta",
            Some(grid.h),
            rep.relative_difference,
        ),
        CheckRecord::single(
            cfg,
            "corner_area_bound",
            "corner sum of Theta < 2 pi",
            Some(grid.h),
            rep.corner_area / (2.0 * PI),
        ),
    ];
    let passed = checks.iter().all(|c| c.pass);
    let mut lines = vec![format!(
        "quadrature {:.15e}, corners {:.15e}, 2 pi {:.15e}",
        rep.quadrature_area,
        rep.corner_area,
        2.0 * PI
    )];
    lines.extend(checks.iter().map(CheckRecord::line));
    let out = AreaOutput {
        header: header(cfg, "area"),
        origin: [cfg.origin.u, cfg.origin.v],
        area: rep,
        checks,
        passed,
    };
    if cfg.wants(Format::Json) {
        wrote(&mut lines, write_json(&cfg.output, "report.json", &out)?);
    }
    Ok(Outcome { passed, lines })
}


#[derive(Serialize)]
struct AreaRow {
    t: f64,
    quadrature: f64,
    closed_form: f64,
    relative_error: f64,
    ratio_to_2pi: f64,
    invariance_residual: f64,
    pass: bool,
}

#[derive(Serialize)]
struct PicardRow {
    field: String,
    start: [f64; 2],
    certified: bool,
    interval: [f64; 2],
    iterations: usize,
    final_difference: Option<f64>,
    contraction_ratio: f64,
    max_speed: f64,
    max_displacement: f64,
    integral_residual: f64,
    endpoints: [[f64; 2]; 2],
    pass: bool,
}

impl PicardRow {
    fn new(field: &str, c: PicardCertificate, tol: f64) -> Self {
        Self {
            field: field.into(),
            start: c.start,
            pass: c.certified && c.integral_residual < tol,
            certified: c.certified,
            interval: c.interval,
            iterations: c.iterations,
            final_difference: c.differences.last().copied(),
            contraction_ratio: c.contraction_ratio,
            max_speed: c.max_speed,
            max_displacement: c.max_displacement,
            integral_residual: c.integral_residual,
            endpoints: c.endpoints,
        }
    }
}

#[derive(Serialize)]
struct HyperbolicReport<'a> {
    command: &'a str,
    seed: u64,
    resolution: usize,
    samples_per_row: usize,
    disk_area: Vec<AreaRow>,
    picard: Vec<PicardRow>,
    passed: bool,
}

pub fn hyperbolic(cfg: &Resolved) -> Result<Outcome, CliError> {
    let (area_tol, inv_tol) = (cfg.tolerance("disk_area"), cfg.tolerance("mobius_invariance"));
    let mut rows = Vec::new();
    for (k, &t) in cfg.radii.iter().enumerate() {
        let q = disk_area(t, cfg.resolution)?;
        let exact = disk_area_closed_form(t);
        let rel = if exact == 0.0 { q.abs() } else { (q - exact).abs() / exact };
        let inv = mobius_samples(cfg.seed.wrapping_add(k as u64), cfg.disk_samples, Some(t));
        rows.push(AreaRow {
            t,
            quadrature: q,
            closed_form: exact,
            relative_error: rel,
            ratio_to_2pi: q / (2.0 * PI),
            invariance_residual: inv,
            pass: rel < area_tol && inv < inv_tol,
        });
    }

    let opts = PicardOptions::default();
    let tol = cfg.tolerance("picard_integral");
    let mut picard = Vec::new();
    for f in sample_fields() {
        let c = picard_existence_demo(&|z| f.eval(z), &opts)?;
        picard.push(PicardRow::new(f.name, c, tol));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = random_disk_point(&mut rng, 0.8);
    let f = sample_fields()[4];
    let c = picard_recentered(&|z| f.eval(z), start, &opts)?;
    picard.push(PicardRow::new(&format!("{} (recentered)", f.name), c, tol));

    let passed = rows.iter().all(|r| r.pass) && picard.iter().all(|r| r.pass);
    let mut lines = vec![format!(
        "{:>10} {:>22} {:>22} {:>10} {:>12} {:>10}",
        "t", "area", "closed form", "rel err", "area / 2pi", "isometry"
    )];
    for r in &rows {
        lines.push(format!(
            "{:>10.6} {:>22.12} {:>22.12} {:>10.2e} {:>12.6} {:>10.2e}{}",
            r.t,
            r.quadrature,
            r.closed_form,
            r.relative_error,
            r.ratio_to_2pi,
            r.invariance_residual,
            if r.pass { "" } else { "  FAIL" }
        ));
    }
    for p in &picard {
        lines.push(format!(
            "{} picard {:<36} on ({}, {}) speed {:.12} residual {:.2e}",
            if p.pass { "PASS" } else { "FAIL" },
            p.field,
            p.interval[0],
            p.interval[1],
            p.max_speed,
            p.integral_residual
        ));
    }
    let report = HyperbolicReport {
        command: "hyperbolic",
        seed: cfg.seed,
        resolution: cfg.resolution,
        samples_per_row: cfg.disk_samples,
        disk_area: rows,
        picard,
        passed,
    };
    if cfg.wants(Format::Json) {
        wrote(&mut lines, write_json(&cfg.output, "hyperbolic.json", &report)?);
    }
    Ok(Outcome { passed, lines })
}
