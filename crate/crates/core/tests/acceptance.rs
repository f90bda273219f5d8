//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::Instant;

use framecheck::frames::{
    check_eta_closed, check_lemma_connalpha, check_lemma_connprin, check_structure, frame_field, GridSpec,
};
use framecheck::hyperbolic::{
    disk_area, disk_area_closed_form, isometry_residual, DiskPoint, HTangent, MobiusIsometry,
};
use framecheck::net::{
    area_two_ways, build_net, check_f_inverse, flow_commutation, jacobian_data, picard_existence_demo,
    picard_recentered, sample_fields, sine_gordon_residual, NetGrid, PicardOptions,
};
use framecheck::surface::{DerivativeSource, ParamPoint, Rect, SurfaceImmersion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn pseudosphere() -> SurfaceImmersion {
    SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap()
}

fn patch() -> Rect {
    Rect::new(1.0, 1.2, 0.0, 0.2).unwrap()
}

fn lattice(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.gen_range(0..=n), rng.gen_range(0..=n))).collect()
}

fn sphere_sign() -> Outcome {
    let s = SurfaceImmersion::sphere(1.0).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let p = ParamPoint::new(0.2 + 2.7 * i as f64 / 19.0, -3.0 + 6.0 * j as f64 / 19.0);
            let (k1, k2) = s.shape_eigenvalues(p).map_err(|e| e.to_string())?;
            worst = worst.max((k1 + 1.0).abs()).max((k2 + 1.0).abs());
        }
    }
    if worst < 1e-9 {
        Ok(format!("max |kappa + 1| = {worst:.2e} over 400 points"))
    } else {
        Err(format!("max |kappa + 1| = {worst:.2e}"))
    }
}

fn pseudosphere_curvature() -> Outcome {
    let s = pseudosphere();
    let ad = s.clone().with_derivatives(DerivativeSource::AutoDiff);
    let d = s.domain();
    let (mut k_err, mut path_err): (f64, f64) = (0.0, 0.0);
    for i in 0..100 {
        for j in 0..100 {
            let p = ParamPoint::new(
                (d.u_min + (d.u_max - d.u_min) * i as f64 / 99.0).min(d.u_max),
                (d.v_min + (d.v_max - d.v_min) * j as f64 / 99.0).min(d.v_max),
            );
            let k = s.gaussian_curvature(p).map_err(|e| e.to_string())?;
            let k_ad = ad.gaussian_curvature(p).map_err(|e| e.to_string())?;
            k_err = k_err.max((k + 1.0).abs());
            path_err = path_err.max((k - k_ad).abs());
        }
    }
    let msg = format!("max |K + 1| = {k_err:.2e}, analytic vs AD = {path_err:.2e} over 10^4 points");
    if k_err < 1e-8 && path_err < 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rate_ok(r: f64) -> bool {
    (3.0..=5.0).contains(&r)
}

fn cartan() -> Outcome {
    let s = pseudosphere();
    let coarse = check_structure(&frame_field(&s, GridSpec::over(&patch(), 2e-3).unwrap()).unwrap())
        .map_err(|e| e.to_string())?;
    let fine = check_structure(&frame_field(&s, GridSpec::over(&patch(), 1e-3).unwrap()).unwrap())
        .map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for (c, f) in coarse.iter().zip(&fine).take(5) {
        let rate = c.value / f.value;
        ok &= rate_ok(rate) && f.value < 1e-5;
        parts.push(format!("{} {:.1e} (rate {:.2})", f.check, f.value, rate));
    }
    let msg = parts.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn lemmas() -> Outcome {
    let s = pseudosphere();
    let run = |h: f64| -> Result<Vec<(String, f64)>, String> {
        let f = frame_field(&s, GridSpec::over(&patch(), h).unwrap()).map_err(|e| e.to_string())?;
        let p = check_lemma_connprin(&f).map_err(|e| e.to_string())?;
        let a = check_lemma_connalpha(&f).map_err(|e| e.to_string())?;
        let e = check_eta_closed(&f).map_err(|e| e.to_string())?;
        Ok([p, a, e.d_eta1, e.d_eta2]
            .into_iter()
            .map(|r| (r.check.to_string(), r.value))
            .collect())
    };
    let (coarse, fine) = (run(2e-3)?, run(1e-3)?);
    let mut ok = true;
    let mut parts = Vec::new();
    for ((name, c), (_, f)) in coarse.iter().zip(&fine) {
        let rate = c / f;
        ok &= rate_ok(rate) && *f < 1e-5;
        parts.push(format!("{name} {f:.1e} (rate {rate:.2})"));
    }
    let msg = parts.join(", ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn sine_gordon(n100: &NetGrid, n200: &NetGrid) -> Outcome {
    let a = sine_gordon_residual(n100).map_err(|e| e.to_string())?;
    let b = sine_gordon_residual(n200).map_err(|e| e.to_string())?;
    let rate = a.residual / b.residual;
    let msg = format!("n=100 residual {:.2e}, n=200 residual {:.2e}, rate {rate:.2}", a.residual, b.residual);
    if a.residual < 1e-3 && rate_ok(rate) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn areas(n100: &NetGrid) -> Outcome {
    let s = pseudosphere();
    let r = area_two_ways(n100).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut valid, mut worst) = (0, f64::NEG_INFINITY);
    let mut violations = 0;
    for _ in 0..100 {
        let o = ParamPoint::new(rng.gen_range(0.8..2.5), rng.gen_range(-2.0..2.0));
        let a = rng.gen_range(0.05..0.8);
        let Ok(g) = build_net(&s, o, a, 8) else { continue };
        if let Ok(rep) = area_two_ways(&g) {
            valid += 1;
            worst = worst.max(rep.corner_area);
            if !(rep.corner_area < 2.0 * PI) {
                violations += 1;
            }
        }
    }
    let msg = format!(
        "relative difference {:.2e} (quadrature {:.10}, corners {:.10}); {valid}/100 random nets valid, max corner area {worst:.4} < 2pi",
        r.relative_difference, r.quadrature_area, r.corner_area
    );
    if r.relative_difference < 1e-4 && r.bound_2pi && violations == 0 && valid > 0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn hyperbolic_area() -> Outcome {
    let mut worst: f64 = 0.0;
    for t in [0.3, 0.5, 1.0 / 3f64.sqrt(), 0.9, 0.99] {
        let q = disk_area(t, 200_000).map_err(|e| e.to_string())?;
        worst = worst.max((q - disk_area_closed_form(t)).abs() / disk_area_closed_form(t));
    }
    let at_critical = disk_area(1.0 / 3f64.sqrt(), 200_000).map_err(|e| e.to_string())?;
    let crit = (at_critical - 2.0 * PI).abs() / (2.0 * PI);
    let big = disk_area(0.999, 200_000).map_err(|e| e.to_string())? / (2.0 * PI);
    let msg = format!("max relative error {worst:.2e}, t=1/sqrt3 off 2pi by {crit:.2e}, t=0.999 is {big:.1} x 2pi");
    if worst < 1e-6 && crit < 1e-6 && big > 900.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn isometries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let point = |rng: &mut ChaCha8Rng| {
        let r = 0.95 * rng.gen::<f64>().sqrt();
        let t = rng.gen_range(0.0..2.0 * PI);
        DiskPoint::new(r * t.cos(), r * t.sin()).unwrap()
    };
    let mut worst: f64 = 0.0;
    for k in 0..1000 {
        let (p, q, c) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let m = if k % 2 == 0 { MobiusIsometry::to_origin(c) } else { MobiusIsometry::from_origin(c) };
        let v = HTangent::new(p, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        worst = worst.max(isometry_residual(&m, &p, &q, &v));
    }
    let msg = format!("max invariance residual {worst:.2e} over 10^3 samples");
    if worst < 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn picard() -> Outcome {
    let opts = PicardOptions::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for f in sample_fields() {
        let c = picard_existence_demo(&|z| f.eval(z), &opts).map_err(|e| e.to_string())?;
        ok &= c.certified
            && c.interval == [-1.0, 1.0]
            && c.max_speed <= 0.5 + 1e-10
            && c.integral_residual < 1e-6;
        parts.push(format!("{} speed {:.6} residual {:.1e}", f.name, c.max_speed, c.integral_residual));
    }
    let f = sample_fields()[4];
    let c = picard_recentered(&|z| f.eval(z), DiskPoint::new(0.7, 0.2).unwrap(), &opts)
        .map_err(|e| e.to_string())?;
    ok &= c.certified;
    parts.push(format!("recentered at (0.7, 0.2) certified {}", c.certified));
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn coordinate_map(n100: &NetGrid) -> Outcome {
    let s = pseudosphere();
    let samples = lattice(100, 50, 10);
    let (comm, used) = flow_commutation(&s, n100, &samples).map_err(|e| e.to_string())?;
    let inv = check_f_inverse(&s, n100, &samples).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut sv: f64 = 0.0;
    for _ in 0..100 {
        let a = rng.gen_range(1e-6..FRAC_PI_2 - 1e-6);
        let j = jacobian_data(a).map_err(|e| e.to_string())?;
        let mut want = [2f64.sqrt() * a.cos(), 2f64.sqrt() * a.sin()];
        want.sort_by(|x, y| y.total_cmp(x));
        sv = sv.max((j.singular_values[0] - want[0]).abs()).max((j.singular_values[1] - want[1]).abs());
    }
    let msg = format!(
        "commutation {comm:.2e} ({used} points), F(G(x)) - x {:.2e} ({} points), singular values {sv:.2e}",
        inv.residual, inv.samples
    );
    if comm < 1e-6 && used == 50 && inv.residual < 1e-6 && inv.samples == 50 && sv < 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn scaling() -> Outcome {
    let s = pseudosphere();
    let mut worst: f64 = 0.0;
    for k in [0.5, 2.0, 10.0] {
        let t = s.dilate(k).map_err(|e| e.to_string())?;
        for i in 0..10 {
            for j in 0..10 {
                let p = ParamPoint::new(0.5 + 0.2 * i as f64, -2.0 + 0.4 * j as f64);
                let (a1, a2) = s.shape_eigenvalues(p).map_err(|e| e.to_string())?;
                let (b1, b2) = t.shape_eigenvalues(p).map_err(|e| e.to_string())?;
                worst = worst.max(((b1 * k - a1) / a1).abs()).max(((b2 * k - a2) / a2).abs());
            }
        }
    }
    let msg = format!("max relative error {worst:.2e} for k in {{0.5, 2, 10}}");
    if worst < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let s = pseudosphere();
    let origin = ParamPoint::new(1.5, 0.0);
    let n100 = build_net(&s, origin, 0.5, 100).expect("net n=100");
    let n200 = build_net(&s, origin, 0.5, 200).expect("net n=200");

    let results: Vec<(&str, Outcome)> = vec![
        ("1 sphere sign", sphere_sign()),
        ("2 pseudosphere curvature", pseudosphere_curvature()),
        ("3 structure equations", cartan()),
        ("4 connection and closedness", lemmas()),
        ("5 sine-Gordon", sine_gordon(&n100, &n200)),
        ("6 area two ways", areas(&n100)),
        ("7 hyperbolic disk area", hyperbolic_area()),
        ("8 isometry invariance", isometries()),
        ("9 Picard existence", picard()),
        ("10 coordinate map", coordinate_map(&n100)),
        ("11 scaling", scaling()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(m) => println!("PASS [{name}] {m}"),
            Err(m) => {
                failed += 1;
                println!("FAIL [{name}] {m}");
            }
        }
    }
    println!(
        "{} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
