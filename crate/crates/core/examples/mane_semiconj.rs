//! Solve for the semi-conjugacy of the Mañé deformation onto the cat map.

use toral::maps::MapConfig;
use toral::semiconj::{solve_franks, SolverParams};
use toral::SampleGrid;

fn main() -> toral::Result<()> {
    let model = MapConfig::named("mane-t2-default")?.build()?;
    let sol = solve_franks(model.torus_map(), &[128, 128], &SolverParams::default())?;
    let u = &sol.field;

    for (k, w) in u.history.windows(2).enumerate() {
        println!(
            "iter {:>3}  residual {:.3e}  ratio {:.4}",
            k + 1,
            w[1],
            w[1] / w[0]
        );
    }
    println!(
        "converged {} after {} iterations, residual {:.3e}",
        u.converged, u.iterations, u.residual
    );
    println!(
        "sup |u| = {:.5}, a priori bound {:.5}",
        u.sup_norm(),
        u.a_priori_bound
    );
    let defect = sol.conjugacy_defect(&SampleGrid::uniform(2, 1000, 2).points())?;
    println!("off-grid defect |h∘f − A∘h| = {defect:.3e}");
    Ok(())
}
