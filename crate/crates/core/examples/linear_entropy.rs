//! Entropy and splitting of the two built-in hyperbolic matrices.

use toral::linear::{cat_matrix, t4_matrix};

fn main() -> toral::Result<()> {
    for (name, a) in [("cat", cat_matrix()), ("paper-t4", t4_matrix())] {
        let test = a.is_hyperbolic(1e-9);
        let split = a.spectral_split()?;
        let (ds, du) = split.dims();
        println!(
            "{name}: det {}, hyperbolic {} (closest |λ| {:.4})",
            a.det(),
            test.hyperbolic,
            test.closest_modulus
        );
        for l in a.eigenvalues() {
            println!("  λ = {:.6} {:+.6}i  |λ| = {:.6}", l.re, l.im, l.norm());
        }
        println!("  dim E^s = {ds}, dim E^u = {du}");
        println!(
            "  contraction {:.4}, expansion {:.4}",
            split.contraction_rate, split.expansion_rate
        );
        println!("  h_top = {:.6}", a.entropy()?);
    }
    Ok(())
}
