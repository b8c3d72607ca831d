//! Sampled cone invariance and growth rates for each built-in map.

use toral::cli::cone_sample;
use toral::cones::{check_cone_invariance, empirical_rates, ConeField, ConeKind};
use toral::maps::{MapConfig, REGISTRY};

fn main() -> toral::Result<()> {
    for (name, _) in REGISTRY {
        let model = MapConfig::named(name)?.build()?;
        let f = model.torus_map();
        let pts = cone_sample(&model, 2000, 1);
        let u = ConeField::for_model(&model, ConeKind::Unstable, 1.0)?;
        let s = ConeField::for_model(&model, ConeKind::Stable, 1.0)?;
        let cert = check_cone_invariance(f, &u, &pts, 64, 2)?;
        let rates = empirical_rates(f, &u, &s, &pts, 10)?;
        println!(
            "{name:<20} passed {:<5} margin {:+.4}  μ_min {:.4}  λ_u {:.4}  λ_s {:.4}",
            cert.passed,
            cert.margin,
            cert.mu_min.unwrap_or(f64::NAN),
            rates.lambda_u,
            rates.lambda_s,
        );
        if let Some(w) = &cert.witness {
            println!("  worst point {:?}", w.point);
        }
    }
    Ok(())
}
