//! Separated and spanning counts for the cat map, with the fitted rate.

use toral::entropy::{estimate_entropy, EntropyParams};
use toral::linear::cat_matrix;
use toral::{SampleGrid, TorusMap};

fn main() -> toral::Result<()> {
    let a = cat_matrix();
    let exact = a.entropy()?;
    let f = TorusMap::linear(a);
    let est = estimate_entropy(
        &f,
        &SampleGrid::uniform(2, 30_000, 1),
        &EntropyParams::default(),
    )?;

    print!("{}", est.table.to_csv_string());
    for fit in &est.rates {
        match fit.rate {
            Some(r) => println!(
                "eps {:<6} rate {r:.4} ± {:.4} over n = {:?}",
                fit.eps, fit.stderr, fit.window
            ),
            None => println!("eps {:<6} no usable window", fit.eps),
        }
    }
    println!(
        "estimate {:.4}, band [{:.4}, {:.4}], exact {exact:.4}",
        est.value, est.band[0], est.band[1]
    );
    println!(
        "sandwich violations: {}",
        est.table.sandwich_violations().len()
    );
    Ok(())
}
