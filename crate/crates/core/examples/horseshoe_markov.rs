//! The center-plane horseshoe isotopy: rectangles, crossing check, derivative bound.

use toral::maps::horseshoe::mat_norm;
use toral::maps::{HorseshoeIsotopy, HorseshoeParams};

fn main() -> toral::Result<()> {
    let h = HorseshoeIsotopy::new(HorseshoeParams::default())?;
    for (i, r) in h.rectangles().iter().enumerate() {
        println!(
            "R{i}: [{:.4}, {:.4}] × [{:.4}, {:.4}]",
            r.x0, r.x1, r.y0, r.y1
        );
    }
    println!("support radius {:.4}", h.support_radius());

    let c = h.fold_center();
    println!(
        "fold center ({:.4}, {:.4}), |Λ_ws| = {:.4}",
        c[0],
        c[1],
        mat_norm(&h.lambda_ws())
    );
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let report = h.markov_check(t, 2000);
        let dg = h.derivative_bound(&[t], 100, 100);
        print!(
            "t = {t:<4}  sup |DG_t| = {dg:.4}  Markov {}",
            report.verified
        );
        match &report.reason {
            Some(r) => println!(" ({r})"),
            None => println!(),
        }
    }
    let times: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    println!(
        "sup |DG| over the isotopy: {:.4}",
        h.derivative_bound(&times, 200, 200)
    );
    Ok(())
}
