use toral::cli::cone_sample;
use toral::cones::{check_cone_invariance, empirical_rates, ConeField, ConeKind};
use toral::linear::{cat_matrix, t4_matrix};
use toral::maps::MapConfig;
use toral::{LinearPart, SampleGrid, TorusMap};

fn golden_sq() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

fn alpha() -> f64 {
    t4_matrix()
        .eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, f64::max)
}

#[test]
fn linear_t4_matrix_passes_with_exact_expansion() {
    let f = TorusMap::linear(t4_matrix());
    let cones = ConeField::for_linear(&f, ConeKind::Unstable, 1.0).unwrap();
    let c =
        check_cone_invariance(&f, &cones, &SampleGrid::uniform(4, 200, 1).points(), 64, 2).unwrap();
    assert!(c.passed && c.margin > 0.0);
    assert!((c.mu_min.unwrap() - alpha()).abs() < 1e-6, "{:?}", c.mu_min);
}

#[test]
fn identity_fails() {
    let f = TorusMap::linear(LinearPart::identity(4));
    let cones = ConeField::for_linear(&f, ConeKind::Unstable, 1.0).unwrap();
    let c =
        check_cone_invariance(&f, &cones, &SampleGrid::uniform(4, 50, 1).points(), 64, 2).unwrap();
    assert!(!c.passed && c.margin <= 0.0);
    assert!((c.mu_min.unwrap() - 1.0).abs() < 1e-12);
    assert!(c.witness.is_some());
}

#[test]
fn cat_margin_matches_closed_form() {
    // in the orthonormal eigenframe a boundary vector at angle θ maps to
    // angle atan(tan θ / φ⁴)
    let f = TorusMap::linear(cat_matrix());
    for a in [0.5, 1.0, 2.0] {
        let cones = ConeField::for_linear(&f, ConeKind::Unstable, a).unwrap();
        let c = check_cone_invariance(&f, &cones, &SampleGrid::uniform(2, 20, 3).points(), 32, 4)
            .unwrap();
        let th = (1.0 / a).atan();
        let want = th - ((1.0 / a) / golden_sq().powi(2)).atan();
        assert!(
            (c.margin - want).abs() < 1e-6,
            "a = {a}: {} vs {want}",
            c.margin
        );
    }
}

#[test]
fn t4_example_unstable_cones() {
    let model = MapConfig::named("t4-example-default")
        .unwrap()
        .build()
        .unwrap();
    let pts = cone_sample(&model, 4000, 5);
    let mut passes = Vec::new();
    for a in [0.5, 1.0, 1.5, 2.0] {
        let cones = ConeField::for_model(&model, ConeKind::Unstable, a).unwrap();
        let c = check_cone_invariance(model.torus_map(), &cones, &pts, 64, 6).unwrap();
        if a == 1.0 {
            assert!(c.passed && c.margin > 0.0 && c.mu_min.unwrap() > 3.0);
        }
        passes.push(c.passed);
    }
    // narrowing the cone keeps a pass
    for w in passes.windows(2) {
        assert!(!w[0] || w[1], "{passes:?}");
    }
}

#[test]
fn empirical_rates_of_the_cat_map() {
    let f = TorusMap::linear(cat_matrix());
    let u = ConeField::for_linear(&f, ConeKind::Unstable, 1.0).unwrap();
    let s = ConeField::for_linear(&f, ConeKind::Stable, 1.0).unwrap();
    let r = empirical_rates(&f, &u, &s, &SampleGrid::uniform(2, 50, 7).points(), 10).unwrap();
    assert!((r.lambda_u - golden_sq()).abs() < 1e-8);
    assert!((r.lambda_s - 1.0 / golden_sq()).abs() < 1e-8);
}

#[test]
fn mane_and_t4_rates() {
    let mane = MapConfig::named("mane-t2-default")
        .unwrap()
        .build()
        .unwrap();
    let u = ConeField::for_model(&mane, ConeKind::Unstable, 1.0).unwrap();
    let s = ConeField::for_model(&mane, ConeKind::Stable, 1.0).unwrap();
    let pts = SampleGrid::uniform(2, 400, 8).points();
    let cert = check_cone_invariance(mane.torus_map(), &u, &pts, 64, 9).unwrap();
    let r = empirical_rates(mane.torus_map(), &u, &s, &pts, 12).unwrap();
    assert!(cert.passed && r.lambda_u > 1.0 + cert.margin);
    assert!(
        cert.mu_min.unwrap() <= r.lambda_u + 1e-12,
        "{:?} vs {}",
        cert.mu_min,
        r.lambda_u
    );
    // contraction is weakest at the deformed fixed point
    assert!(r.lambda_s_spread[1] > 1.0 / golden_sq());

    let t4 = MapConfig::named("t4-example-default")
        .unwrap()
        .build()
        .unwrap();
    let u = ConeField::for_model(&t4, ConeKind::Unstable, 1.0).unwrap();
    let s = ConeField::for_model(&t4, ConeKind::Stable, 1.0).unwrap();
    let pts = SampleGrid::uniform(4, 200, 10).points();
    let r = empirical_rates(t4.torus_map(), &u, &s, &pts, 8).unwrap();
    assert!(
        (r.lambda_u - alpha()).abs() < 0.05 * alpha(),
        "{}",
        r.lambda_u
    );
    let cert = check_cone_invariance(t4.torus_map(), &u, &pts, 64, 11).unwrap();
    assert!(
        cert.mu_min.unwrap() <= r.lambda_u * (1.0 + 1e-12),
        "{:?} vs {}",
        cert.mu_min,
        r.lambda_u
    );
}

#[test]
fn invalid_cones_rejected() {
    let f = TorusMap::linear(cat_matrix());
    assert!(ConeField::for_linear(&f, ConeKind::Unstable, 0.0).is_err());
    let t4 = TorusMap::linear(t4_matrix());
    let cones = ConeField::for_linear(&t4, ConeKind::Unstable, 1.0).unwrap();
    assert!(
        check_cone_invariance(&f, &cones, &SampleGrid::uniform(2, 5, 1).points(), 8, 1).is_err()
    );
    assert!(check_cone_invariance(&t4, &cones, &[], 8, 1).is_err());
}
