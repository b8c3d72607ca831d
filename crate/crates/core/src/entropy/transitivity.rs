//! Orbit coverage of dyadic boxes, a heuristic for transitivity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{TorusMap, MAX_DIM};
use crate::torus::TorusPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub iterations: u64,
    pub visited: u64,
    pub fraction: f64,
}

/// Fraction of the 2^{bits·d} boxes of side 2^{−bits} met by x₀, …, f^{N−1}(x₀),
/// reported at N = 1, 2, 4, … and at N itself.
pub fn transitivity_scan(
    f: &TorusMap,
    x0: &TorusPoint,
    iterations: u64,
    bits: u32,
) -> Result<Vec<CoveragePoint>> {
    let d = f.dim();
    if x0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x0.dim(),
        });
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter("need at least one iterate".into()));
    }
    if bits == 0 || bits as usize * d > 32 {
        return Err(Error::InvalidParameter(format!(
            "{bits} bits per axis in dimension {d} is out of range"
        )));
    }
    let side = 1u64 << bits;
    let total = 1u64 << (bits as usize * d);
    let mut seen = vec![0u64; total.div_ceil(64) as usize];
    let mut visited = 0u64;
    let mut x = [0.0; MAX_DIM];
    x[..d].copy_from_slice(x0.coords());
    let mut next = [0.0; MAX_DIM];
    let mut out = Vec::new();
    let mut checkpoint = 1u64;
    for it in 1..=iterations {
        let mut key = 0u64;
        for &c in &x[..d] {
            key = key * side + ((c * side as f64) as u64).min(side - 1);
        }
        let (w, b) = ((key / 64) as usize, key % 64);
        if seen[w] >> b & 1 == 0 {
            seen[w] |= 1 << b;
            visited += 1;
        }
        if it == checkpoint || it == iterations {
            out.push(CoveragePoint {
                iterations: it,
                visited,
                fraction: visited as f64 / total as f64,
            });
            checkpoint = checkpoint.saturating_mul(2);
        }
        f.apply_raw(&x[..d], &mut next[..d]);
        x[..d].copy_from_slice(&next[..d]);
    }
    Ok(out)
}

pub fn coverage_csv(curve: &[CoveragePoint]) -> String {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["iterations", "visited", "fraction"])
            .expect("memory");
        for p in curve {
            w.write_record([
                p.iterations.to_string(),
                p.visited.to_string(),
                p.fraction.to_string(),
            ])
            .expect("memory");
        }
        w.flush().expect("memory");
    }
    String::from_utf8(buf).expect("ascii")
}
