//! Certify that the T⁴ example has more entropy than its linear part.

use toral::entropy::{certify_jump, CertifyParams};
use toral::maps::MapConfig;

fn main() -> toral::Result<()> {
    let model = MapConfig::named("t4-example-default")?.build()?;
    for t in [0.0, 1.0] {
        let c = certify_jump(
            &model,
            &CertifyParams {
                t,
                ..CertifyParams::default()
            },
        )?;
        println!("t = {t}");
        println!("  Markov crossing verified: {}", c.markov_verified);
        if let (Some(mu), Some(margin)) = (c.mu_min, c.cone_margin) {
            println!(
                "  unstable expansion ≥ {mu:.4}, cone margin {margin:.4} over {} points",
                c.sampled_points
            );
        }
        println!("  h_top(A) = {:.4}", c.linear_entropy);
        match (c.certified_lower_bound, &c.reason) {
            (Some(b), _) => println!("  h_top(f) ≥ {b:.4} (jump {:.4})", b - c.linear_entropy),
            (None, Some(r)) => println!("  refused: {r}"),
            (None, None) => println!("  refused"),
        }
    }
    Ok(())
}
