//! Bowen-style entropy estimates from separated and spanning sets.

mod certify;
mod counting;
mod fiber;
mod transitivity;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::TorusMap;
use crate::torus::SampleGrid;

pub use certify::{certify_jump, CertifyParams, JumpCertificate};
pub use counting::{
    greedy_separated, greedy_spanning, separated_count, spanning_count, OrbitCache,
};
pub use fiber::{
    bowen_inequality_check, fiber_entropy, BowenReport, FiberEstimate, IntervalBoundRow,
};
pub use transitivity::{coverage_csv, transitivity_scan, CoveragePoint};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BowenRow {
    pub n: usize,
    pub eps: f64,
    pub separated: usize,
    pub spanning: usize,
    pub sample: usize,
    pub saturated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BowenCountTable {
    pub rows: Vec<BowenRow>,
}

impl BowenCountTable {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "eps", "separated", "spanning", "sample"])
            .map_err(csv_err)?;
        for r in &self.rows {
            out.write_record([
                r.n.to_string(),
                r.eps.to_string(),
                r.separated.to_string(),
                r.spanning.to_string(),
                r.sample.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }

    fn row(&self, n: usize, eps: f64) -> Option<&BowenRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && (r.eps - eps).abs() <= 1e-12 * eps)
    }

    /// Rows violating N(n,ε) ≤ s(n,ε) ≤ N(n,ε/2), among rows whose ε/2
    /// partner is in the table.
    pub fn sandwich_violations(&self) -> Vec<(usize, f64)> {
        self.rows
            .iter()
            .filter(|r| {
                let upper = self
                    .row(r.n, r.eps / 2.0)
                    .map(|h| r.separated <= h.spanning)
                    .unwrap_or(true);
                r.spanning > r.separated || !upper
            })
            .map(|r| (r.n, r.eps))
            .collect()
    }

    /// Rows for which the ε/2 partner exists.
    pub fn sandwich_rows(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| self.row(r.n, r.eps / 2.0).is_some())
            .count()
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Least-squares slope of log(separated) against n for one ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub eps: f64,
    pub rate: Option<f64>,
    pub stderr: f64,
    pub window: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub schema_version: u32,
    pub table: BowenCountTable,
    pub rates: Vec<RateFit>,
    /// max over ε of the fitted rates (0 if nothing could be fitted).
    pub value: f64,
    /// value ± 2 standard errors of the winning fit, clamped at 0.
    pub band: [f64; 2],
    pub best_eps: Option<f64>,
}

fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let stderr = if xs.len() > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
            .sum();
        (rss / (k - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

impl EntropyEstimate {
    /// Refit from a table. For each ε, the unsaturated rows are ordered by
    /// n and the slope is taken over the last ⌈half⌉ of them.
    pub fn from_table(table: BowenCountTable) -> Self {
        let mut eps_list: Vec<f64> = Vec::new();
        for r in &table.rows {
            if !eps_list.contains(&r.eps) {
                eps_list.push(r.eps);
            }
        }
        let mut rates = Vec::new();
        for &eps in &eps_list {
            let mut rows: Vec<&BowenRow> = table
                .rows
                .iter()
                .filter(|r| r.eps == eps && !r.saturated)
                .collect();
            rows.sort_by_key(|r| r.n);
            let take = rows.len().div_ceil(2);
            let window: Vec<&BowenRow> = rows[rows.len() - take..].to_vec();
            let (rate, stderr) = if window.len() >= 2 {
                let xs: Vec<f64> = window.iter().map(|r| r.n as f64).collect();
                let ys: Vec<f64> = window.iter().map(|r| (r.separated as f64).ln()).collect();
                let (s, e) = fit_line(&xs, &ys);
                (Some(s.max(0.0)), e)
            } else {
                (None, 0.0)
            };
            rates.push(RateFit {
                eps,
                rate,
                stderr,
                window: window.iter().map(|r| r.n).collect(),
            });
        }
        let best = rates
            .iter()
            .filter(|r| r.rate.is_some())
            .max_by(|a, b| a.rate.unwrap().total_cmp(&b.rate.unwrap()));
        let (value, band, best_eps) = match best {
            Some(b) => {
                let v = b.rate.unwrap();
                (
                    v,
                    [(v - 2.0 * b.stderr).max(0.0), v + 2.0 * b.stderr],
                    Some(b.eps),
                )
            }
            None => (0.0, [0.0, 0.0], None),
        };
        EntropyEstimate {
            schema_version: SCHEMA_VERSION,
            table,
            rates,
            value,
            band,
            best_eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EntropyParams {
    /// Ascending horizons.
    pub ns: Vec<usize>,
    /// Descending scales.
    pub epsilons: Vec<f64>,
    /// A row is saturated when separated > fraction·sample.
    pub saturation: f64,
}

impl Default for EntropyParams {
    fn default() -> Self {
        EntropyParams {
            ns: (1..=12).collect(),
            epsilons: vec![0.16, 0.08, 0.04, 0.02],
            saturation: 0.5,
        }
    }
}

impl EntropyParams {
    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.epsilons.is_empty() {
            return Err(Error::InvalidParameter(
                "n-range and ε-list must be nonempty".into(),
            ));
        }
        if self.ns.contains(&0) || self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "n-range must be positive and strictly ascending".into(),
            ));
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0))
            || self.epsilons.windows(2).any(|w| w[0] <= w[1])
        {
            return Err(Error::InvalidParameter(
                "ε-list must be positive and strictly descending".into(),
            ));
        }
        Ok(())
    }
}

/// Counts for every (n, ε) on a cached sample.
///
/// For each ε the separated set at n seeds the one at the next n, and the
/// set at the previous (larger) ε is tried as a seed as well; the larger
/// result is kept. This makes counts nondecreasing in n and nonincreasing
/// in ε for a fixed sample.
pub fn count_table(cache: &OrbitCache, params: &EntropyParams) -> Result<BowenCountTable> {
    params.validate()?;
    let sample = cache.len();
    let mut rows = Vec::new();
    let mut prev_eps: Vec<Vec<u32>> = vec![Vec::new(); params.ns.len()];
    for &eps in &params.epsilons {
        let mut prev_n: Vec<u32> = Vec::new();
        let mut sets = Vec::with_capacity(params.ns.len());
        for (k, &n) in params.ns.iter().enumerate() {
            if n > cache.horizon() {
                return Err(Error::InvalidParameter(format!(
                    "horizon {n} exceeds the cached orbit length"
                )));
            }
            let mut set = greedy_separated(cache, n, eps, &prev_n);
            if set.len() < prev_eps[k].len() {
                let other = greedy_separated(cache, n, eps, &prev_eps[k]);
                if other.len() > set.len() {
                    set = other;
                }
            }
            let saturated = set.len() as f64 > params.saturation * sample as f64;
            // a saturated row carries no rate information; its maximal
            // separated set already spans
            let spanning = if saturated {
                set.len()
            } else {
                greedy_spanning(cache, n, eps, &set)
            };
            rows.push(BowenRow {
                n,
                eps,
                separated: set.len(),
                spanning,
                sample,
                saturated,
            });
            prev_n = set.clone();
            sets.push(set);
        }
        prev_eps = sets;
    }
    Ok(BowenCountTable { rows })
}

/// Estimate on an explicit point sample (`d` coordinates per point).
pub fn estimate_on_sample(
    f: &TorusMap,
    coords: &[f64],
    params: &EntropyParams,
) -> Result<EntropyEstimate> {
    params.validate()?;
    let horizon = *params.ns.last().expect("validated");
    let cache = OrbitCache::new(f, coords, horizon)?;
    Ok(EntropyEstimate::from_table(count_table(&cache, params)?))
}

pub fn estimate_entropy(
    f: &TorusMap,
    grid: &SampleGrid,
    params: &EntropyParams,
) -> Result<EntropyEstimate> {
    grid.validate()?;
    if grid.dim() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: grid.dim(),
        });
    }
    if grid.is_empty() {
        return Err(Error::EmptySample("sample grid is empty".into()));
    }
    estimate_on_sample(f, &grid.coords(), params)
}
