//! Orbit caches and greedy (n,ε)-separated / spanning sets.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::maps::{TorusMap, MAX_DIM};

/// Orbit segments x, f(x), …, f^{n−1}(x) of a finite sample, flat.
#[derive(Debug, Clone)]
pub struct OrbitCache {
    d: usize,
    len: usize,
    count: usize,
    data: Vec<f64>,
}

impl OrbitCache {
    /// `coords` holds `d` values per point.
    pub fn new(f: &TorusMap, coords: &[f64], len: usize) -> Result<Self> {
        let d = f.dim();
        if coords.is_empty() {
            return Err(Error::EmptySample(
                "orbit cache needs at least one point".into(),
            ));
        }
        if coords.len() % d != 0 {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: coords.len() % d,
            });
        }
        let len = len.max(1);
        let count = coords.len() / d;
        let mut data = vec![0.0; count * len * d];
        data.par_chunks_mut(len * d)
            .zip(coords.par_chunks(d))
            .for_each(|(orbit, x)| {
                orbit[..d].copy_from_slice(x);
                for t in 1..len {
                    let (prev, cur) = orbit.split_at_mut(t * d);
                    f.apply_raw(&prev[(t - 1) * d..], &mut cur[..d]);
                }
            });
        Ok(OrbitCache {
            d,
            len,
            count,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Longest horizon stored.
    pub fn horizon(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn at(&self, i: usize, t: usize) -> &[f64] {
        let o = (i * self.len + t) * self.d;
        &self.data[o..o + self.d]
    }

    #[inline]
    fn dist2(&self, i: usize, j: usize, t: usize) -> f64 {
        let (a, b) = (self.at(i, t), self.at(j, t));
        let mut s = 0.0;
        for k in 0..self.d {
            let d = (a[k] - b[k]).abs();
            let d = if d > 0.5 { 1.0 - d } else { d };
            s += d * d;
        }
        s
    }

    /// max_{0≤t<n} torus_dist(fᵗxᵢ, fᵗxⱼ).
    pub fn dynamical_distance(&self, i: usize, j: usize, n: usize) -> f64 {
        (0..n.min(self.len))
            .map(|t| self.dist2(i, j, t))
            .fold(0.0, f64::max)
            .sqrt()
    }

    /// dynamical distance ≤ ε, testing the latest time first.
    #[inline]
    fn within(&self, i: usize, j: usize, n: usize, eps2: f64) -> bool {
        (0..n).rev().all(|t| self.dist2(i, j, t) <= eps2)
    }
}

/// Spatial hash of points by their cells at a few key times. Two points
/// at dynamical distance ≤ ε sit in adjacent cells at every key time
/// because the cell side 1/m is at least ε.
struct CellIndex<'a> {
    cache: &'a OrbitCache,
    m: usize,
    times: Vec<usize>,
    map: FxHashMap<u64, Vec<u32>>,
}

impl<'a> CellIndex<'a> {
    fn new(cache: &'a OrbitCache, n: usize, eps: f64) -> Self {
        let m = ((1.0 / eps).floor() as usize).max(1);
        let mut times = vec![0];
        if cache.d <= 2 && n > 1 {
            times.push(n - 1);
        }
        CellIndex {
            cache,
            m,
            times,
            map: FxHashMap::default(),
        }
    }

    #[inline]
    fn cells(&self, i: usize, out: &mut [usize; 2 * MAX_DIM]) -> usize {
        let mut k = 0;
        for &t in &self.times {
            for &c in self.cache.at(i, t) {
                out[k] = ((c * self.m as f64) as usize).min(self.m - 1);
                k += 1;
            }
        }
        k
    }

    #[inline]
    fn encode(&self, cells: &[usize]) -> u64 {
        cells.iter().fold(0u64, |acc, &c| {
            acc.wrapping_mul(self.m as u64).wrapping_add(c as u64)
        })
    }

    fn insert(&mut self, i: usize) {
        let mut c = [0usize; 2 * MAX_DIM];
        let k = self.cells(i, &mut c);
        let key = self.encode(&c[..k]);
        self.map.entry(key).or_default().push(i as u32);
    }

    /// Calls `visit` on every indexed point in a neighbouring cell until it
    /// returns true; reports whether it did.
    fn any_near(&self, i: usize, mut visit: impl FnMut(u32) -> bool) -> bool {
        let mut base = [0usize; 2 * MAX_DIM];
        let k = self.cells(i, &mut base);
        let m = self.m;
        // distinct neighbour cells per key axis
        let mut opts = [[0usize; 3]; 2 * MAX_DIM];
        let mut nopt = [0usize; 2 * MAX_DIM];
        for a in 0..k {
            let c = base[a];
            let cand = [c, (c + m - 1) % m, (c + 1) % m];
            let mut n = 0;
            for v in cand {
                if !opts[a][..n].contains(&v) {
                    opts[a][n] = v;
                    n += 1;
                }
            }
            nopt[a] = n;
        }
        let mut pick = [0usize; 2 * MAX_DIM];
        let mut cells = [0usize; 2 * MAX_DIM];
        loop {
            for a in 0..k {
                cells[a] = opts[a][pick[a]];
            }
            if let Some(list) = self.map.get(&self.encode(&cells[..k])) {
                for &j in list {
                    if visit(j) {
                        return true;
                    }
                }
            }
            let mut a = 0;
            loop {
                if a == k {
                    return false;
                }
                pick[a] += 1;
                if pick[a] < nopt[a] {
                    break;
                }
                pick[a] = 0;
                a += 1;
            }
        }
    }
}

/// Greedy maximal (n,ε)-separated subset of the cache, scanning points in
/// index order after the (already separated) `seed`.
pub fn greedy_separated(cache: &OrbitCache, n: usize, eps: f64, seed: &[u32]) -> Vec<u32> {
    let n = n.min(cache.horizon()).max(1);
    let eps2 = eps * eps;
    let mut idx = CellIndex::new(cache, n, eps);
    let mut chosen: Vec<u32> = seed.to_vec();
    let mut is_center = vec![false; cache.len()];
    for &c in seed {
        is_center[c as usize] = true;
        idx.insert(c as usize);
    }
    for i in 0..cache.len() {
        if is_center[i] {
            continue;
        }
        if !idx.any_near(i, |j| cache.within(i, j as usize, n, eps2)) {
            chosen.push(i as u32);
            is_center[i] = true;
            idx.insert(i);
        }
    }
    chosen
}

/// Size of a greedy (n,ε)-spanning subset of the sample (closed balls).
///
/// Points are scanned in index order; an uncovered point i is covered by
/// the center, among i and the `POOL` points of B(i,ε) farthest from i,
/// whose ball holds the most uncovered points. `separated` is a maximal
/// separated set, hence spanning, and caps the result.
pub fn greedy_spanning(cache: &OrbitCache, n: usize, eps: f64, separated: &[u32]) -> usize {
    const POOL: usize = 8;
    let n = n.min(cache.horizon()).max(1);
    let eps2 = eps * eps;
    let mut idx = CellIndex::new(cache, n, eps);
    for i in 0..cache.len() {
        idx.insert(i);
    }
    let mut covered = vec![false; cache.len()];
    let mut count = 0usize;
    let mut ball: Vec<u32> = Vec::new();
    let mut pool: Vec<(f64, u32)> = Vec::new();
    for i in 0..cache.len() {
        if covered[i] {
            continue;
        }
        pool.clear();
        idx.any_near(i, |j| {
            if j as usize != i && cache.within(i, j as usize, n, eps2) {
                pool.push((cache.dynamical_distance(i, j as usize, n), j));
            }
            false
        });
        pool.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        pool.truncate(POOL);
        let mut best = (0usize, i as u32);
        for c in std::iter::once(i as u32).chain(pool.iter().map(|p| p.1)) {
            let mut score = 0usize;
            idx.any_near(c as usize, |j| {
                if !covered[j as usize] && cache.within(c as usize, j as usize, n, eps2) {
                    score += 1;
                }
                false
            });
            if score > best.0 {
                best = (score, c);
            }
        }
        ball.clear();
        let c = best.1 as usize;
        idx.any_near(c, |j| {
            if cache.within(c, j as usize, n, eps2) {
                ball.push(j);
            }
            false
        });
        for &j in &ball {
            covered[j as usize] = true;
        }
        count += 1;
        if count >= separated.len() {
            return separated.len();
        }
    }
    count.min(separated.len())
}

/// Greedy (n,ε)-separated count of a sample, with the selected indices.
pub fn separated_count(
    f: &TorusMap,
    coords: &[f64],
    n: usize,
    eps: f64,
) -> Result<(usize, Vec<u32>)> {
    check_args(n, eps)?;
    let cache = OrbitCache::new(f, coords, n)?;
    let set = greedy_separated(&cache, n, eps, &[]);
    Ok((set.len(), set))
}

/// Size of a greedy (n,ε)-spanning subset of the sample.
pub fn spanning_count(f: &TorusMap, coords: &[f64], n: usize, eps: f64) -> Result<usize> {
    check_args(n, eps)?;
    let cache = OrbitCache::new(f, coords, n)?;
    let set = greedy_separated(&cache, n, eps, &[]);
    Ok(greedy_spanning(&cache, n, eps, &set))
}

pub(crate) fn check_args(n: usize, eps: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "horizon n must be at least 1".into(),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ε = {eps} must be positive"
        )));
    }
    Ok(())
}
