use proptest::prelude::*;
use toral::entropy::{
    bowen_inequality_check, certify_jump, count_table, estimate_entropy, estimate_on_sample,
    greedy_separated, separated_count, spanning_count, transitivity_scan, CertifyParams,
    EntropyParams, OrbitCache,
};
use toral::linear::{cat_matrix, t4_matrix};
use toral::maps::{MapConfig, MapModel};
use toral::{Error, LinearPart, SampleGrid, TorusMap, TorusPoint};

fn identity2() -> TorusMap {
    TorusMap::linear(LinearPart::identity(2))
}

fn cat() -> TorusMap {
    TorusMap::linear(cat_matrix())
}

fn log_golden() -> f64 {
    ((3.0 + 5f64.sqrt()) / 2.0).ln()
}

/// Brute-force dynamical distance from explicit orbits.
fn orbit_distance(f: &TorusMap, x: &[f64], y: &[f64], n: usize) -> f64 {
    let (mut a, mut b) = (TorusPoint::wrapped(x), TorusPoint::wrapped(y));
    let mut d: f64 = 0.0;
    for _ in 0..n {
        d = d.max(toral::torus_dist(&a, &b).unwrap());
        a = f.apply(&a);
        b = f.apply(&b);
    }
    d
}

#[test]
fn identity_separation_examples() {
    let k = [0.1, 0.1, 0.4, 0.1];
    assert_eq!(separated_count(&identity2(), &k, 5, 0.5).unwrap().0, 1);
    assert_eq!(separated_count(&identity2(), &k, 5, 0.2).unwrap().0, 2);
    assert!(matches!(
        separated_count(&identity2(), &[], 1, 0.1),
        Err(Error::EmptySample(_))
    ));
    assert!(separated_count(&identity2(), &k, 0, 0.1).is_err());
    assert!(separated_count(&identity2(), &k, 1, 0.0).is_err());
}

#[test]
fn spanning_examples() {
    for n in [1, 4, 9] {
        for eps in [0.5, 0.01] {
            assert_eq!(spanning_count(&cat(), &[0.3, 0.6], n, eps).unwrap(), 1);
        }
    }
    let k = SampleGrid::uniform(2, 500, 3).coords();
    let counts: Vec<usize> = (1..=6)
        .map(|n| spanning_count(&identity2(), &k, n, 0.1).unwrap())
        .collect();
    assert!(counts.iter().all(|&c| c == counts[0]), "{counts:?}");
}

#[test]
fn cat_counts_grow_at_the_area_rate() {
    // normalize at n = 4, predict n = 8 from φ^{2·4}; a 10⁴ sample is
    // exhausted by n = 8 and the regular grid is permuted by the cat map
    let k = SampleGrid::uniform(2, 100_000, 1).coords();
    let s4 = separated_count(&cat(), &k, 4, 0.1).unwrap().0 as f64;
    let s8 = separated_count(&cat(), &k, 8, 0.1).unwrap().0 as f64;
    let predicted = s4 * (4.0 * log_golden()).exp();
    let ratio = s8 / predicted;
    assert!(
        (0.5..=2.0).contains(&ratio),
        "s4 {s4}, s8 {s8}, ratio {ratio}"
    );
}

#[test]
fn sandwich_on_cat_map() {
    let cache = OrbitCache::new(&cat(), &SampleGrid::uniform(2, 1000, 4).coords(), 10).unwrap();
    let params = EntropyParams {
        ns: (1..=10).collect(),
        epsilons: vec![0.2, 0.1, 0.05, 0.025],
        ..Default::default()
    };
    let table = count_table(&cache, &params).unwrap();
    assert_eq!(table.sandwich_rows(), 30);
    assert!(
        table.sandwich_violations().is_empty(),
        "{:?}",
        table.sandwich_violations()
    );
    assert!(table.rows.iter().all(|r| r.spanning <= r.separated));
}

#[test]
fn identity_estimate_is_zero() {
    let est = estimate_entropy(
        &identity2(),
        &SampleGrid::uniform(2, 5000, 5),
        &EntropyParams::default(),
    )
    .unwrap();
    assert!(est.value < 0.05, "{}", est.value);
}

#[test]
fn cat_estimate_in_band() {
    let est = estimate_entropy(
        &cat(),
        &SampleGrid::uniform(2, 30_000, 6),
        &EntropyParams::default(),
    )
    .unwrap();
    let ratio = est.value / log_golden();
    assert!((0.75..=1.10).contains(&ratio), "{ratio}");
    assert!(est.band[0] <= est.value && est.value <= est.band[1]);
    // saturated rows never enter a fit window
    for fit in &est.rates {
        for n in &fit.window {
            let row = est
                .table
                .rows
                .iter()
                .find(|r| r.n == *n && r.eps == fit.eps)
                .unwrap();
            assert!(!row.saturated);
        }
    }
}

#[test]
fn parameters_are_validated() {
    let g = SampleGrid::uniform(2, 10, 1);
    let bad = [
        EntropyParams {
            ns: vec![3, 2],
            ..Default::default()
        },
        EntropyParams {
            ns: vec![0, 1],
            ..Default::default()
        },
        EntropyParams {
            epsilons: vec![0.1, 0.2],
            ..Default::default()
        },
        EntropyParams {
            epsilons: vec![],
            ..Default::default()
        },
    ];
    for p in bad {
        assert!(matches!(
            estimate_entropy(&cat(), &g, &p),
            Err(Error::InvalidParameter(_))
        ));
    }
    assert!(estimate_entropy(
        &cat(),
        &SampleGrid::uniform(4, 10, 1),
        &EntropyParams::default()
    )
    .is_err());
}

#[test]
fn chart_plane_horseshoe_entropy() {
    let model = MapConfig::named("t4-example-default")
        .unwrap()
        .build()
        .unwrap();
    let MapModel::T4(ex) = &model else {
        unreachable!()
    };
    let [r0, r1] = ex.isotopy().rectangles();
    let q = [
        r0.x0.min(r1.x0),
        r0.x1.max(r1.x1),
        r0.y0.min(r1.y0),
        r0.y1.max(r1.y1),
    ];
    let coords: Vec<f64> = ex
        .center_plane_grid(q, 150)
        .iter()
        .flat_map(|p| p.coords().to_vec())
        .collect();
    let params = EntropyParams {
        ns: (1..=12).collect(),
        epsilons: vec![0.016, 0.008, 0.004, 0.002],
        ..Default::default()
    };
    let est = estimate_on_sample(model.torus_map(), &coords, &params).unwrap();
    assert!(est.value > 0.5 * 2f64.ln(), "{}", est.value);
}

#[test]
fn transitivity_examples() {
    let id = transitivity_scan(&identity2(), &TorusPoint::wrapped(&[0.3, 0.8]), 10_000, 4).unwrap();
    assert!(id
        .iter()
        .all(|c| c.visited == 1 && (c.fraction - 1.0 / 256.0).abs() < 1e-15));
    let curve = transitivity_scan(
        &cat(),
        &TorusPoint::wrapped(&[0.1234567, 0.7654321]),
        1_000_000,
        5,
    )
    .unwrap();
    assert!(curve.last().unwrap().fraction > 0.99);
    assert!(curve
        .windows(2)
        .all(|w| w[0].visited <= w[1].visited && w[0].iterations < w[1].iterations));
    assert_eq!(curve.last().unwrap().iterations, 1_000_000);
    assert!(transitivity_scan(&cat(), &TorusPoint::origin(2), 0, 5).is_err());
}

#[test]
fn bowen_check_on_linear_map() {
    let h = cat_matrix().entropy().unwrap();
    let r = bowen_inequality_check(h, h, &[0.0], 0.2);
    assert!(r.passes && r.excess.abs() < 1e-15);
    assert!(!bowen_inequality_check(h + 0.5, h, &[0.0], 0.2).passes);
}

#[test]
fn certificate_needs_a_horseshoe() {
    let lin = MapModel::Linear(TorusMap::linear(t4_matrix()));
    let c = certify_jump(&lin, &CertifyParams::default()).unwrap();
    assert!(!c.markov_verified && c.certified_lower_bound.is_none());

    let t4 = MapConfig::named("t4-example-default")
        .unwrap()
        .build()
        .unwrap();
    let c = certify_jump(&t4, &CertifyParams::default()).unwrap();
    let target = 2f64.ln() + (10.91f64 * 0.9).ln();
    assert!(c.markov_verified && c.certified_lower_bound.unwrap() >= target);
    assert!(c.certified_lower_bound.unwrap() > c.linear_entropy + 0.5);

    let refused = certify_jump(
        &t4,
        &CertifyParams {
            t: 1.0,
            ..CertifyParams::default()
        },
    )
    .unwrap();
    assert!(
        !refused.markov_verified
            && refused.certified_lower_bound.is_none()
            && refused.reason.is_some()
    );
    assert!(refused.markov.unwrap().witness.is_some());
}

fn small_sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..120)
        .prop_map(|mut v| {
            if v.len() % 2 == 1 {
                v.pop();
            }
            v
        })
        .prop_filter("nonempty", |v| !v.is_empty())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_sets_are_separated_and_span(k in small_sample(), n in 1usize..6, eps in 0.03f64..0.3) {
        let f = cat();
        let (count, set) = separated_count(&f, &k, n, eps).unwrap();
        prop_assert_eq!(count, set.len());
        let pt = |i: usize| &k[2 * i..2 * i + 2];
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                prop_assert!(orbit_distance(&f, pt(i as usize), pt(j as usize), n) > eps);
            }
        }
        for i in 0..k.len() / 2 {
            prop_assert!(set.iter().any(|&c| orbit_distance(&f, pt(i), pt(c as usize), n) <= eps));
        }
        let span = spanning_count(&f, &k, n, eps).unwrap();
        prop_assert!(span >= 1 && span <= count);
    }

    #[test]
    fn seeded_greedy_keeps_the_seed(k in small_sample(), eps in 0.05f64..0.3) {
        let cache = OrbitCache::new(&cat(), &k, 5).unwrap();
        let base = greedy_separated(&cache, 2, eps, &[]);
        let grown = greedy_separated(&cache, 5, eps, &base);
        prop_assert!(grown.starts_with(&base));
    }

    #[test]
    fn counts_are_monotone(seed in 0u64..1000) {
        let cache = OrbitCache::new(&cat(), &SampleGrid::uniform(2, 300, seed).coords(), 8).unwrap();
        let params = EntropyParams { ns: (1..=8).collect(), epsilons: vec![0.2, 0.1, 0.05], ..Default::default() };
        let t = count_table(&cache, &params).unwrap();
        let at = |n: usize, e: f64| t.rows.iter().find(|r| r.n == n && r.eps == e).unwrap().separated;
        for &e in &params.epsilons {
            for n in 2..=8 {
                prop_assert!(at(n, e) >= at(n - 1, e));
            }
        }
        for n in 1..=8 {
            prop_assert!(at(n, 0.1) >= at(n, 0.2) && at(n, 0.05) >= at(n, 0.1));
        }
    }
}
