//! End-to-end runs of the acceptance experiments behind `toral repro`.

use std::time::Instant;

use serde::Serialize;

use crate::cones::{check_cone_invariance, ConeField, ConeKind};
use crate::entropy::{
    bowen_inequality_check, certify_jump, coverage_csv, estimate_entropy, fiber_entropy,
    transitivity_scan, CertifyParams, EntropyParams,
};
use crate::error::Result;
use crate::linear::{cat_matrix, t4_matrix, LinearPart};
use crate::maps::{MapConfig, Perturbation, TorusMap};
use crate::semiconj::{
    class_center_alignment, constant_displacement_solution, preimage_class, solve_franks,
    CenterFrame, ClassSearch, SolverParams,
};
use crate::torus::{SampleGrid, TorusPoint};

use super::cone_sample;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproRow {
    pub criterion: u32,
    pub name: String,
    pub passed: bool,
    /// The measured quantity the check compares.
    pub value: f64,
    pub target: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproSettings {
    pub cat_samples: usize,
    pub mane_grid: usize,
    pub defect_points: usize,
    pub bowen_samples: usize,
    pub class_points: usize,
    pub cone_samples: usize,
    pub t4_grid: usize,
    pub scan_iterations: u64,
}

impl Default for ReproSettings {
    fn default() -> Self {
        ReproSettings {
            cat_samples: 100_000,
            mane_grid: 512,
            defect_points: 1000,
            bowen_samples: 100_000,
            class_points: 20,
            cone_samples: 10_000,
            t4_grid: 16,
            scan_iterations: 10_000_000,
        }
    }
}

impl ReproSettings {
    pub fn quick() -> Self {
        ReproSettings {
            cat_samples: 30_000,
            mane_grid: 128,
            defect_points: 200,
            bowen_samples: 30_000,
            class_points: 5,
            cone_samples: 1000,
            t4_grid: 12,
            scan_iterations: 2_000_000,
        }
    }
}

struct Timer(Instant);

impl Timer {
    fn start() -> Self {
        Timer(Instant::now())
    }

    fn row(
        &self,
        criterion: u32,
        name: &str,
        passed: bool,
        value: f64,
        target: impl Into<String>,
    ) -> ReproRow {
        ReproRow {
            criterion,
            name: name.into(),
            passed,
            value,
            target: target.into(),
            seconds: self.0.elapsed().as_secs_f64(),
        }
    }
}

/// Largest real root of x⁴ − 10x³ − 10x² + x + 1 by bisection on [10, 11].
fn companion_root() -> f64 {
    let p = |x: f64| (((x - 10.0) * x - 10.0) * x + 1.0) * x + 1.0;
    let (mut lo, mut hi) = (10.0f64, 11.0f64);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if p(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    0.5 * (lo + hi)
}

pub fn run_repro(s: &ReproSettings, seed: u64) -> Result<Vec<ReproRow>> {
    let mut rows = Vec::new();

    let t = Timer::start();
    let h = t4_matrix().entropy()?;
    let err = (h - companion_root().ln()).abs();
    rows.push(t.row(
        1,
        "linear entropy of paper-t4",
        err < 1e-9,
        err,
        "|h - log alpha| < 1e-9",
    ));

    let t = Timer::start();
    let cat = TorusMap::linear(cat_matrix());
    let est = estimate_entropy(
        &cat,
        &SampleGrid::uniform(2, s.cat_samples, seed),
        &EntropyParams::default(),
    )?;
    let ratio = est.value / cat_matrix().entropy()?;
    let ok = (0.75..=1.10).contains(&ratio) && est.table.sandwich_violations().is_empty();
    rows.push(t.row(
        2,
        "cat map Bowen estimate",
        ok,
        ratio,
        "ratio in [0.75, 1.10] and sandwich holds",
    ));

    let t = Timer::start();
    let c = [0.1, -0.05];
    let shifted = TorusMap::new(
        cat_matrix(),
        Perturbation::Constant(c.to_vec()),
        "cat-shift",
    )?;
    let sol = solve_franks(&shifted, &[32, 32], &SolverParams::default())?;
    let exact = constant_displacement_solution(&cat_matrix().matrix(), &c)?;
    let err = sol
        .field
        .values()
        .chunks(2)
        .flat_map(|u| u.iter().zip(&exact).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    rows.push(t.row(
        3,
        "constant displacement closed form",
        err < 1e-8,
        err,
        "max error < 1e-8",
    ));

    let t = Timer::start();
    let mane_model = MapConfig::named("mane-t2-default")?.build()?;
    let mane = mane_model.torus_map();
    let sol = solve_franks(mane, &[s.mane_grid, s.mane_grid], &SolverParams::default())?;
    let split = cat_matrix().spectral_split()?;
    let bound = split.stable_step_norm().max(split.unstable_step_norm()) + 0.05;
    let worst = sol
        .field
        .history
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let ok = sol.field.residual < 1e-6 && sol.field.iterations <= 200 && worst <= bound;
    rows.push(t.row(
        3,
        "Mane solver convergence",
        ok,
        worst,
        format!("residual < 1e-6 and ratio <= {bound:.4}"),
    ));

    let t = Timer::start();
    let pts = SampleGrid::uniform(2, s.defect_points, seed.wrapping_add(1)).points();
    let defect = sol.conjugacy_defect(&pts)?;
    let ok = defect < 5.0 * sol.field.residual.max(f64::EPSILON);
    rows.push(t.row(
        3,
        "semi-conjugacy defect",
        ok,
        defect,
        "defect < 5 x residual",
    ));

    let t = Timer::start();
    let origin = TorusPoint::origin(2);
    let hx = sol.evaluate_h(&origin)?;
    let center = CenterFrame::for_model(&mane_model);
    let cands = ClassSearch::default().candidates(&origin, center.as_ref());
    let params = EntropyParams {
        ns: (1..=20).collect(),
        epsilons: vec![0.04, 0.02, 0.01, 0.005],
        ..Default::default()
    };
    let fe = fiber_entropy(&sol, &hx, &cands, 1e-6, &params)?;
    let ok = fe.interval_bound_holds() && fe.estimate.value < 0.1;
    rows.push(t.row(
        4,
        "Mane fiber entropy",
        ok,
        fe.estimate.value,
        "rate < 0.1 and interval bound for n <= 20",
    ));

    let t = Timer::start();
    let est = estimate_entropy(
        mane,
        &SampleGrid::uniform(2, s.bowen_samples, seed),
        &EntropyParams::default(),
    )?;
    let report = bowen_inequality_check(
        est.value,
        cat_matrix().entropy()?,
        &[fe.estimate.value],
        0.2,
    );
    rows.push(t.row(
        4,
        "Bowen inequality on the Mane map",
        report.passes,
        report.excess,
        "excess <= 0.2",
    ));

    let t = Timer::start();
    let t4 = MapConfig::named("t4-example-default")?.build()?;
    let cert = certify_jump(
        &t4,
        &CertifyParams {
            seed,
            ..CertifyParams::default()
        },
    )?;
    let target = t4.linear_part().entropy()? + 0.5;
    let bound = cert.certified_lower_bound.unwrap_or(0.0);
    let ok = cert.markov_verified && bound >= target && cert.mu_min.is_some_and(|m| m > 3.0);
    rows.push(t.row(
        5,
        "entropy jump certificate",
        ok,
        bound,
        format!("bound >= {target:.4}"),
    ));

    let t = Timer::start();
    let pts = cone_sample(&t4, s.cone_samples, seed);
    let cones = ConeField::for_model(&t4, ConeKind::Unstable, 1.0)?;
    let cc = check_cone_invariance(t4.torus_map(), &cones, &pts, 64, seed)?;
    let id = TorusMap::linear(LinearPart::identity(4));
    let id_cones = ConeField::for_linear(&id, ConeKind::Unstable, 1.0)?;
    let ic = check_cone_invariance(&id, &id_cones, &pts[..pts.len().min(1000)], 64, seed)?;
    let ok = cc.passed && cc.margin > 0.0 && !ic.passed;
    rows.push(t.row(
        6,
        "unstable cone invariance",
        ok,
        cc.margin,
        "margin > 0, identity fails",
    ));

    let t = Timer::start();
    let mut worst_excess = f64::NEG_INFINITY;
    for y in SampleGrid::uniform(2, s.class_points, seed.wrapping_add(2)).points() {
        let x = sol.evaluate_h(&y)?;
        let cands = ClassSearch::default().candidates(&y, center.as_ref());
        let class = preimage_class(&sol, &x, &cands, 1e-9, 10)?;
        let bound = 2.0 * sol.field.sup_norm().max(class.orbit_displacement_sup) + class.tol;
        for &(_, d) in &class.iterate_diameters {
            worst_excess = worst_excess.max(d - bound);
        }
    }
    rows.push(t.row(
        7,
        "Mane class diameters",
        worst_excess <= 0.0,
        worst_excess,
        "diam - (2|u| + tol) <= 0",
    ));

    let t = Timer::start();
    let field = solve_franks(t4.torus_map(), &[s.t4_grid; 4], &SolverParams::default())?;
    let p = TorusPoint::origin(4);
    let hp = field.evaluate_h(&p)?;
    let cf = CenterFrame::for_model(&t4).expect("center plane");
    let search = ClassSearch {
        box_half_width: 0.001,
        box_points: 3,
        center_half_width: 0.25,
        center_points: 201,
    };
    let class = preimage_class(&field, &hp, &search.candidates(&p, Some(&cf)), 3e-3, 0)?;
    let align = class_center_alignment(&class, &cf);
    rows.push(t.row(
        7,
        "T4 class center alignment",
        align > 0.95 && class.members.len() > 1,
        align,
        "> 0.95",
    ));

    let t = Timer::start();
    let x0 = SampleGrid::uniform(4, 1, seed).points().remove(0);
    let curve = transitivity_scan(t4.torus_map(), &x0, s.scan_iterations, 3)?;
    let last = curve.last().map(|c| c.fraction).unwrap_or(0.0);
    let monotone = curve.windows(2).all(|w| w[0].visited <= w[1].visited);
    rows.push(t.row(
        8,
        "T4 orbit coverage",
        last > 0.9 && monotone,
        last,
        "> 0.9 at 1/8, nondecreasing",
    ));

    let t = Timer::start();
    let small = EntropyParams {
        ns: (1..=6).collect(),
        epsilons: vec![0.1, 0.05],
        ..Default::default()
    };
    let g = SampleGrid::uniform(2, 5000, seed);
    let a = estimate_entropy(mane, &g, &small)?.table.to_csv_string();
    let b = estimate_entropy(mane, &g, &small)?.table.to_csv_string();
    let c1 = coverage_csv(&transitivity_scan(
        mane,
        &TorusPoint::wrapped(&[0.3, 0.7]),
        100_000,
        5,
    )?);
    let c2 = coverage_csv(&transitivity_scan(
        mane,
        &TorusPoint::wrapped(&[0.3, 0.7]),
        100_000,
        5,
    )?);
    let same = a == b && c1 == c2;
    rows.push(t.row(
        9,
        "byte-identical reruns",
        same,
        if same { 0.0 } else { 1.0 },
        "identical CSV bytes",
    ));

    Ok(rows)
}
