//! Build maps from names and JSON, round-trip points through the inverse.

use toral::maps::{MapConfig, REGISTRY};
use toral::{torus_dist, SampleGrid};

fn main() -> toral::Result<()> {
    for (name, about) in REGISTRY {
        let cfg = MapConfig::named(name)?;
        let text = serde_json::to_string(&cfg).expect("config serializes");
        let model = MapConfig::from_json(&text)?.build()?;
        let f = model.torus_map();

        let mut worst: f64 = 0.0;
        for x in SampleGrid::uniform(f.dim(), 500, 1).points() {
            let back = f.invert(&f.apply(&x))?;
            worst = worst.max(torus_dist(&back, &x)?);
        }
        println!("{name}: {about}");
        println!("  {text}");
        println!("  dim {}, max |f⁻¹(f(x)) − x| = {worst:.2e}", f.dim());
    }

    let custom = MapConfig::from_json(
        r#"{"kind":"linear","matrix":[[3,1],[2,1]],"translation":[0.1,0.0]}"#,
    )?;
    let f = custom.build()?;
    println!("custom: h_top(A) = {:.4}", f.linear_part().entropy()?);
    Ok(())
}
