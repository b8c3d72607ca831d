//! The class h⁻¹(h(0)) of the Mañé map and the entropy inside it.

use toral::entropy::{fiber_entropy, EntropyParams};
use toral::maps::{MapConfig, MapModel};
use toral::semiconj::{
    class_center_alignment, solve_franks, CenterFrame, ClassSearch, SolverParams,
};
use toral::TorusPoint;

fn main() -> toral::Result<()> {
    let model = MapConfig::named("mane-t2-default")?.build()?;
    let MapModel::Mane(mane) = &model else {
        unreachable!()
    };
    let sol = solve_franks(model.torus_map(), &[256, 256], &SolverParams::default())?;

    let origin = TorusPoint::origin(2);
    let hx = sol.evaluate_h(&origin)?;
    let cf = CenterFrame::for_model(&model);
    let candidates = ClassSearch::default().candidates(&origin, cf.as_ref());
    let fe = fiber_entropy(&sol, &hx, &candidates, 1e-6, &EntropyParams::default())?;

    let class = &fe.class;
    println!(
        "{} members, diameter {:.5}",
        class.members.len(),
        class.diameter
    );
    if let Some(s) = mane.stable_fixed_point() {
        println!(
            "stable fixed points at ±{s:.5}, segment length {:.5}",
            2.0 * s
        );
    }
    if let Some(cf) = &cf {
        println!(
            "alignment with the stable direction {:.4}",
            class_center_alignment(class, cf)
        );
    }
    for (n, d) in &class.iterate_diameters {
        println!("  diam fⁿ(class), n = {n:>3}: {d:.5}");
    }
    println!(
        "fiber entropy {:.4}, length bound {:.4}",
        fe.estimate.value, fe.length_bound
    );
    println!("interval bound holds: {}", fe.interval_bound_holds());
    Ok(())
}
