use framecheck::surface::{DerivativeSource, ParamPoint, Rect, SurfaceImmersion};
use framecheck::GeomError;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn tractroid_principal_curvatures() {
    let s = SurfaceImmersion::pseudosphere(0.2, 0.0, 0.0).unwrap();
    for u in [0.5, 1.0, 1.7, 2.5] {
        for v in [-2.0, 0.0, 0.9] {
            let (k1, k2) = s.shape_eigenvalues(ParamPoint::new(u, v)).unwrap();
            assert!(close(k1, f64::sinh(u), 1e-12), "k1 = {k1} at u = {u}");
            assert!(close(k2, -1.0 / f64::sinh(u), 1e-12), "k2 = {k2} at u = {u}");
        }
    }
    let (k1, _) = s.shape_eigenvalues(ParamPoint::new(1.0, 0.0)).unwrap();
    assert!(close(k1, 1.175_201_193_643_80, 1e-13));
}

#[test]
fn twisted_tractroid_mean_curvature() {
    let s = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.0).unwrap();
    let (k1, k2) = s.shape_eigenvalues(ParamPoint::new(1.0, 0.4)).unwrap();
    assert!(close(0.5 * (k1 + k2), 0.162_141_532_702_240, 1e-12));
    assert!(close(k1 * k2, -1.0, 1e-12));
}

#[test]
fn dini_curvature_is_constant() {
    let s = SurfaceImmersion::dini(1.0, 0.2).unwrap();
    for v in [0.7, 1.2] {
        for u in [-1.0, 0.0, 2.0] {
            let k = s.gaussian_curvature(ParamPoint::new(u, v)).unwrap();
            assert!(close(k, -1.0 / 1.04, 1e-10), "K = {k}");
        }
    }
    let unit = SurfaceImmersion::dini(0.8, 0.6).unwrap();
    let k = unit.gaussian_curvature(ParamPoint::new(0.3, 1.0)).unwrap();
    assert!(close(k, -1.0, 1e-10));
}

#[test]
fn sphere_and_plane() {
    let s = SurfaceImmersion::sphere(2.0).unwrap();
    let k = s.gaussian_curvature(ParamPoint::new(1.0, 0.5)).unwrap();
    assert!(close(k, 0.25, 1e-12));
    let p = SurfaceImmersion::plane();
    let d = p.domain();
    let mid = ParamPoint::new(0.5 * (d.u_min + d.u_max), 0.5 * (d.v_min + d.v_max));
    assert_eq!(p.shape_eigenvalues(mid).unwrap(), (0.0, 0.0));
    assert!(matches!(p.principal_frame(mid), Err(GeomError::NotHyperbolic { .. })));
}

#[test]
fn custom_surface_matches_builtin() {
    let dom = Rect::new(0.5, 2.5, -1.0, 1.0).unwrap();
    let c = SurfaceImmersion::custom("sech(u)*cos(v)", "sech(u)*sin(v)", "u - tanh(u)", dom).unwrap();
    let b = SurfaceImmersion::pseudosphere(0.2, 0.0, 0.0).unwrap();
    let p = ParamPoint::new(1.3, 0.2);
    let (a1, a2) = c.shape_eigenvalues(p).unwrap();
    let (b1, b2) = b.shape_eigenvalues(p).unwrap();
    assert!(close(a1, b1, 1e-12) && close(a2, b2, 1e-12));
}

#[test]
fn custom_surface_rejects_bad_expression() {
    let dom = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let r = SurfaceImmersion::custom("u +", "v", "0", dom);
    assert!(matches!(r, Err(GeomError::Expr { .. })));
}

#[test]
fn derivative_paths_agree_on_frames() {
    let s = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap();
    let ad = s.clone().with_derivatives(DerivativeSource::AutoDiff);
    let p = ParamPoint::new(1.4, -0.7);
    let (f, g) = (s.principal_frame(p).unwrap(), ad.principal_frame(p).unwrap());
    for k in 0..2 {
        assert!((f.e1[k] - g.e1[k]).abs() < 1e-12);
        assert!((f.e2[k] - g.e2[k]).abs() < 1e-12);
    }
    assert!((f.alpha - g.alpha).abs() < 1e-12);
}

#[test]
fn asymptotic_directions_are_null() {
    let s = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap();
    let p = ParamPoint::new(1.1, 0.3);
    let (e1, e2) = s.principal_frame(p).unwrap().asymptotic();
    assert!(s.sff(p, e1).unwrap().abs() < 1e-12);
    assert!(s.sff(p, e2).unwrap().abs() < 1e-12);
}

#[test]
fn alpha_is_arctan_kappa1() {
    let s = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap();
    let fr = s.principal_frame(ParamPoint::new(0.9, 1.0)).unwrap();
    assert!((fr.alpha - fr.kappa1.atan()).abs() < 1e-14);
    assert!((fr.kappa1 * fr.kappa2 + 1.0).abs() < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(SurfaceImmersion::pseudosphere(0.0, 0.5, 0.1).is_err());
    assert!(SurfaceImmersion::pseudosphere(0.2, 0.5, 0.7).is_err());
    assert!(SurfaceImmersion::sphere(-1.0).is_err());
    assert!(SurfaceImmersion::dini(0.0, 1.0).is_err());
    let s = SurfaceImmersion::pseudosphere(0.2, 0.5, 0.1).unwrap();
    assert!(s.dilate(0.0).is_err());
    assert!(matches!(
        s.gaussian_curvature(ParamPoint::new(-5.0, 0.0)),
        Err(GeomError::OutOfDomain { .. })
    ));
}
