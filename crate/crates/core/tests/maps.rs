use proptest::prelude::*;
use toral::linear::{cat_matrix, t4_matrix};
use toral::maps::horseshoe::mat_norm;
use toral::maps::{
    HorseshoeIsotopy, HorseshoeParams, ManeMap, ManeParams, MapConfig, MapModel, T4Example,
    T4Params, REGISTRY,
};
use toral::{Error, SampleGrid, TorusMap, TorusPoint};

fn mane() -> ManeMap {
    ManeMap::new(ManeParams::default()).unwrap()
}

fn t4() -> T4Example {
    T4Example::new(T4Params::default()).unwrap()
}

fn iso() -> HorseshoeIsotopy {
    HorseshoeIsotopy::new(HorseshoeParams::default()).unwrap()
}

fn mat_vec(a: &nalgebra::DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn registry_maps_build() {
    for (name, _) in REGISTRY {
        let model = MapConfig::named(name).unwrap().build().unwrap();
        let d = model.torus_map().dim();
        assert!(d == 2 || d == 4, "{name}");
    }
    assert!(matches!(MapConfig::named("nope"), Err(Error::Config(_))));
    let cfg = MapConfig::named("t4-example-default").unwrap();
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(MapConfig::from_json(&text).unwrap(), cfg);
    let lin = MapConfig::from_json(r#"{"kind":"linear","matrix":[[2,1],[1,1]]}"#)
        .unwrap()
        .build()
        .unwrap();
    assert!(matches!(lin, MapModel::Linear(_)));
}

#[test]
fn invalid_parameters_rejected() {
    assert!(ManeMap::new(ManeParams {
        r: 0.3,
        ..ManeParams::default()
    })
    .is_err());
    assert!(ManeMap::new(ManeParams {
        mu: 0.1,
        ..ManeParams::default()
    })
    .is_err());
    assert!(T4Example::new(T4Params {
        delta: 0.3,
        ..T4Params::default()
    })
    .is_err());
    assert!(T4Example::new(T4Params {
        delta: 0.0,
        ..T4Params::default()
    })
    .is_err());
    assert!(HorseshoeIsotopy::new(HorseshoeParams {
        scale: -1.0,
        ..HorseshoeParams::default()
    })
    .is_err());
}

#[test]
fn linear_map_is_matrix_multiplication() {
    let f = TorusMap::linear(t4_matrix());
    let a = t4_matrix().matrix();
    let a_inv = t4_matrix().inverse().matrix();
    for x in SampleGrid::uniform(4, 50, 3).points() {
        let want = TorusPoint::wrapped(&mat_vec(&a, x.coords()));
        assert!(max_diff(f.apply(&x).coords(), want.coords()) < 1e-12);
        let lift = f.apply_lift(&x.lift());
        assert!(max_diff(lift.coords(), &mat_vec(&a, x.coords())) < 1e-12);
        let inv = TorusPoint::wrapped(&mat_vec(&a_inv, x.coords()));
        assert!(toral::torus_dist(&f.invert(&x).unwrap(), &inv).unwrap() < 1e-10);
    }
}

fn round_trip(f: &TorusMap, seed: u64) -> f64 {
    SampleGrid::uniform(f.dim(), 1000, seed)
        .points()
        .iter()
        .map(|x| toral::torus_dist(&f.invert(&f.apply(x)).unwrap(), x).unwrap())
        .fold(0.0, f64::max)
}

#[test]
fn inverse_round_trips() {
    let m = mane();
    assert!(round_trip(m.torus_map(), 1) < 1e-9);
    let ex = t4();
    assert!(round_trip(ex.torus_map(), 2) < 1e-9);
    // points inside the chart, where Newton does real work
    let pts = ex.sample_chart_points(1000, 3);
    let f = ex.torus_map();
    let worst = pts
        .iter()
        .map(|x| toral::torus_dist(&f.invert(&f.apply(x)).unwrap(), x).unwrap())
        .fold(0.0, f64::max);
    assert!(worst < 1e-9, "{worst}");
    // forward residual of the inverse
    for y in pts.iter().take(200) {
        let x = f.invert(y).unwrap();
        assert!(toral::torus_dist(&f.apply(&x), y).unwrap() < 1e-10);
    }
}

/// Central differences of the lift, relative to the Jacobian's size.
fn jacobian_error(f: &TorusMap, x: &TorusPoint) -> f64 {
    let d = f.dim();
    let j = f.jacobian(x);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for c in 0..d {
        let mut p = x.coords().to_vec();
        let mut q = p.clone();
        p[c] += h;
        q[c] -= h;
        let (mut fp, mut fq) = (vec![0.0; d], vec![0.0; d]);
        f.apply_lift_raw(&p, &mut fp);
        f.apply_lift_raw(&q, &mut fq);
        for r in 0..d {
            let fd = (fp[r] - fq[r]) / (2.0 * h);
            worst = worst.max((fd - j[(r, c)]).abs());
        }
    }
    worst / j.abs().max()
}

#[test]
fn jacobians_match_finite_differences() {
    let m = mane();
    for x in SampleGrid::uniform(2, 1000, 4).points() {
        assert!(jacobian_error(m.torus_map(), &x) < 1e-4);
    }
    let ex = t4();
    let mut pts = ex.sample_chart_points(700, 5);
    pts.extend(SampleGrid::uniform(4, 300, 6).points());
    for x in &pts {
        let e = jacobian_error(ex.torus_map(), x);
        assert!(e < 1e-4, "{e} at {x:?}");
    }
}

#[test]
fn mane_fixed_point_and_support() {
    let m = mane();
    let f = m.torus_map();
    let o = TorusPoint::origin(2);
    assert_eq!(f.apply(&o).coords(), &[0.0, 0.0]);
    // stable eigenvector of the cat map is an eigenvector of Df(0) with eigenvalue μ
    let ls = (3.0 - 5f64.sqrt()) / 2.0;
    let es = [1.0, ls - 2.0];
    let j = f.jacobian(&o);
    let w = mat_vec(&j, &es);
    assert!((w[0] - 1.5 * es[0]).abs() < 1e-8 && (w[1] - 1.5 * es[1]).abs() < 1e-8);
    // zero displacement off B(0, r)
    let a = cat_matrix().matrix();
    for x in SampleGrid::uniform(2, 2000, 7).points() {
        if toral::torus_dist(&x, &o).unwrap() > m.params.r {
            let want = TorusPoint::wrapped(&mat_vec(&a, x.coords()));
            assert!(toral::torus_dist(&f.apply(&x), &want).unwrap() < 1e-14);
        }
    }
}

/// Whether some lift x + k, k ∈ {−1,0,1}⁴, has chart coordinates in the support box.
fn in_any_lift_chart(ex: &T4Example, x: &TorusPoint) -> bool {
    (0..81).any(|code: usize| {
        let mut y = x.coords().to_vec();
        let mut c = code;
        for v in y.iter_mut() {
            *v += (c % 3) as f64 - 1.0;
            c /= 3;
        }
        let mut xi = [0.0; 4];
        ex.frame().to_chart(&y, &mut xi);
        ex.in_chart(&xi)
    })
}

#[test]
fn t4_example_structure() {
    let ex = t4();
    let f = ex.torus_map();
    let o = TorusPoint::origin(4);
    assert!(toral::torus_dist(&f.apply(&o), &o).unwrap() < 1e-15);
    let a = t4_matrix().matrix();
    let mut outside = 0;
    for x in SampleGrid::uniform(4, 3000, 8).points() {
        if !in_any_lift_chart(&ex, &x) {
            outside += 1;
            assert!(f.displacement(&x).iter().all(|&c| c == 0.0));
            let want = TorusPoint::wrapped(&mat_vec(&a, x.coords()));
            assert!(toral::torus_dist(&f.apply(&x), &want).unwrap() < 1e-12);
        }
    }
    assert!(outside > 2900);

    // chart Jacobian at 0 is block diagonal with the transverse eigenvalues
    let ev = ex.eigenvalues();
    let j = ex.chart_jacobian(&[0.0; 4]);
    assert!((j[0] - ev[0]).abs() < 1e-12 && (j[15] - ev[3]).abs() < 1e-12);
    for (r, c) in [
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 0),
        (2, 0),
        (3, 0),
        (1, 3),
        (2, 3),
        (3, 1),
        (3, 2),
    ] {
        assert!(j[r * 4 + c].abs() < 1e-12, "entry ({r},{c})");
    }
}

#[test]
fn t4_clamp_boundary_is_continuous() {
    let ex = t4();
    let d = ex.delta();
    for (k, z) in [[0.003, -0.002], [0.01, 0.004], [-0.006, 0.0]]
        .iter()
        .enumerate()
    {
        let angle = 0.3 + k as f64;
        let at = |r: f64| ex.chart_map(&[r * angle.cos(), z[0], z[1], r * angle.sin()]);
        let (lo, hi) = (at(d * (1.0 - 1e-12)), at(d * (1.0 + 1e-12)));
        assert!(max_diff(&lo, &hi) < 1e-8);
    }
}

#[test]
fn horseshoe_isotopy_items() {
    let h = iso();
    let l = h.lambda_ws();
    let lin = |z: [f64; 2]| {
        [
            l[0][0] * z[0] + l[0][1] * z[1],
            l[1][0] * z[0] + l[1][1] * z[1],
        ]
    };
    for z in [[0.3, -0.2], [0.0, 0.9], [-0.5, 0.5]] {
        let w = h.map(0.75, z).unwrap();
        assert!(max_diff(&w, &lin(z)) < 1e-14);
    }
    for k in 0..16 {
        let a = k as f64 * 0.4;
        let z = [0.8 * a.cos(), 0.8 * a.sin()];
        assert!(max_diff(&h.map(0.2, z).unwrap(), &lin(z)) < 1e-14);
    }
    for t in [0.0, 0.1, 0.4, 1.0] {
        assert!(max_diff(&h.map(t, [0.0, 0.0]).unwrap(), &[0.0, 0.0]) < 1e-15);
    }
    assert!(matches!(h.map(0.0, [0.9, 0.9]), Err(Error::Domain(_))));
}

#[test]
fn rescaled_horseshoe() {
    let h = iso();
    let l = h.lambda_ws();
    for t in [0.05, 0.3, 1.0] {
        let z = [t * 0.8, t * 0.7];
        let w = h.rescaled(t, z).unwrap();
        assert!(
            max_diff(
                &w,
                &[
                    l[0][0] * z[0] + l[0][1] * z[1],
                    l[1][0] * z[0] + l[1][1] * z[1]
                ]
            ) < 1e-14
        );
        assert!(max_diff(&h.rescaled(t, [0.0, 0.0]).unwrap(), &[0.0, 0.0]) < 1e-15);
    }
    assert!(h.rescaled(0.0, [0.1, 0.1]).is_err());
    let mut worst: f64 = 0.0;
    for p in SampleGrid::uniform(3, 10_000, 9).points() {
        let c = p.coords();
        let t = 1e-3 + c[0] * (1.0 - 1e-3);
        let z = [(2.0 * c[1] - 1.0) * t, (2.0 * c[2] - 1.0) * t];
        let (_, dz) = h.rescaled_with_jacobian(t, z).unwrap();
        worst = worst.max(mat_norm(&dz));
    }
    assert!(worst <= 3.0 + 1e-6, "{worst}");
}

#[test]
fn markov_crossing() {
    let h = iso();
    assert!(h.markov_check(0.0, 2000).verified);
    let r = h.markov_check(1.0, 2000);
    assert!(!r.verified && r.witness.is_some() && r.reason.is_some());
}

fn unit() -> impl Strategy<Value = f64> {
    0.0f64..1.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lift_equivariance(x in prop::collection::vec(unit(), 4), k in prop::collection::vec(-1i64..=1, 4), y in prop::collection::vec(unit(), 2)) {
        for (f, p) in [(t4().torus_map().clone(), x.clone()), (mane().torus_map().clone(), y.clone())] {
            let d = f.dim();
            let kk = &k[..d];
            let a = f.linear_part().matrix();
            let base = f.apply_lift(&TorusPoint::wrapped(&p).lift());
            let shifted = f.apply_lift(&TorusPoint::wrapped(&p).lift().translate(kk));
            let ak = mat_vec(&a, &kk.iter().map(|&v| v as f64).collect::<Vec<_>>());
            for i in 0..d {
                prop_assert!((shifted.coords()[i] - base.coords()[i] - ak[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_is_projected_lift(x in prop::collection::vec(unit(), 4)) {
        let ex = t4();
        let f = ex.torus_map();
        let p = TorusPoint::wrapped(&x);
        let via_lift = toral::torus::project(&f.apply_lift(&p.lift()));
        prop_assert!(toral::torus_dist(&via_lift, &f.apply(&p)).unwrap() < 1e-14);
    }
}
