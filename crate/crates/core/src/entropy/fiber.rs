//! Entropy inside a fiber h⁻¹(x) of the semi-conjugacy, and Bowen's
//! inequality h(f) ≤ h(A) + sup of fiber entropies.

use serde::{Deserialize, Serialize};

use super::{estimate_on_sample, EntropyEstimate, EntropyParams};
use crate::error::{Error, Result};
use crate::semiconj::{preimage_class, FranksSolution, PreimageClass};
use crate::torus::{reduce, LiftPoint, TorusPoint};

/// One row of the interval bound log s(n,ε,K) ≤ log(n·(L/ε + 1)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalBoundRow {
    pub n: usize,
    pub eps: f64,
    pub log_count: f64,
    pub log_bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberEstimate {
    pub class: PreimageClass,
    /// max over 0 ≤ i < n_max of diam fⁱ(K) in the cover.
    pub length_bound: f64,
    pub estimate: EntropyEstimate,
    pub interval_bound: Vec<IntervalBoundRow>,
}

impl FiberEstimate {
    pub fn interval_bound_holds(&self) -> bool {
        self.interval_bound.iter().all(|r| r.holds)
    }
}

/// Samples [x] by thresholding the candidates, then runs the separated
/// and spanning counts on the sampled class.
pub fn fiber_entropy(
    sol: &FranksSolution,
    x: &TorusPoint,
    candidates: &[LiftPoint],
    tol: f64,
    params: &EntropyParams,
) -> Result<FiberEstimate> {
    params.validate()?;
    let err = sol.refined_error_estimate();
    if err > tol / 10.0 {
        return Err(Error::InvalidParameter(format!(
            "semi-conjugacy accuracy {err:.3e} is too coarse for class tolerance {tol:.3e}"
        )));
    }
    let class = preimage_class(sol, x, candidates, tol, 0)?;
    let f = sol.map();
    let horizon = *params.ns.last().expect("validated");
    let mut cur: Vec<LiftPoint> = class.members.iter().map(|m| LiftPoint(m.clone())).collect();
    let mut length_bound: f64 = 0.0;
    for i in 0..horizon {
        if i > 0 {
            cur = cur.iter().map(|p| f.apply_lift(p)).collect();
        }
        length_bound = length_bound.max(diameter(&cur));
    }
    let coords: Vec<f64> = class
        .members
        .iter()
        .flat_map(|m| m.iter().map(|&c| reduce(c)))
        .collect();
    let estimate = estimate_on_sample(f, &coords, params)?;
    let interval_bound = estimate
        .table
        .rows
        .iter()
        .map(|r| {
            let log_count = (r.separated as f64).ln();
            let log_bound = (r.n as f64 * (length_bound / r.eps + 1.0)).ln();
            IntervalBoundRow {
                n: r.n,
                eps: r.eps,
                log_count,
                log_bound,
                holds: log_count <= log_bound + 1e-12,
            }
        })
        .collect();
    Ok(FiberEstimate {
        class,
        length_bound,
        estimate,
        interval_bound,
    })
}

fn diameter(points: &[LiftPoint]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let s: f64 = a
                .coords()
                .iter()
                .zip(b.coords())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            best = best.max(s);
        }
    }
    best.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowenReport {
    pub estimate: f64,
    pub linear_entropy: f64,
    pub max_fiber_rate: f64,
    /// estimate − (linear_entropy + max_fiber_rate)
    pub excess: f64,
    pub slack: f64,
    pub passes: bool,
}

pub fn bowen_inequality_check(
    estimate: f64,
    linear_entropy: f64,
    fiber_rates: &[f64],
    slack: f64,
) -> BowenReport {
    let max_fiber_rate = fiber_rates.iter().copied().fold(0.0, f64::max);
    let excess = estimate - (linear_entropy + max_fiber_rate);
    BowenReport {
        estimate,
        linear_entropy,
        max_fiber_rate,
        excess,
        slack,
        passes: excess <= slack,
    }
}
