//! Coverage of a dyadic grid by a single orbit.

use toral::entropy::transitivity_scan;
use toral::maps::MapConfig;
use toral::TorusPoint;

fn main() -> toral::Result<()> {
    let runs = [
        ("cat", vec![0.1234567, 0.7654321], 6),
        ("mane-t2-default", vec![0.1234567, 0.7654321], 6),
        (
            "t4-example-default",
            vec![0.1234, 0.2345, 0.3456, 0.4567],
            3,
        ),
    ];
    for (name, x0, bits) in runs {
        let model = MapConfig::named(name)?.build()?;
        let curve = transitivity_scan(
            model.torus_map(),
            &TorusPoint::wrapped(&x0),
            1_000_000,
            bits,
        )?;
        println!("{name}");
        for c in curve
            .iter()
            .filter(|c| c.iterations.is_power_of_two() || c.iterations == 1_000_000)
        {
            println!(
                "  {:>8} iterates  {:>6} cells  {:.4}",
                c.iterations, c.visited, c.fraction
            );
        }
    }
    Ok(())
}
