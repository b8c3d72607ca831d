//! The Franks semi-conjugacy h̃ = Id + u with h̃∘F = A∘h̃.
//!
//! u is periodic and satisfies A·u(x) = p(x) + u(F(x)). Split along the
//! invariant subspaces of A, the unstable part is a fixed point of
//! u ↦ A⁻¹P_u[p + u∘F] and the stable part of u ↦ P_s[A·u∘F⁻¹ − p∘F⁻¹];
//! both are sup-norm contractions. The grid solver runs the two updates
//! jointly (Jacobi style, multilinear reads). Off-grid values are refined
//! by unrolling each update along the orbit, which damps the grid error by
//! the contraction factor of A to the unrolling depth.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::SpectralSplit;
use crate::maps::{row_major, Frame, MapModel, TorusMap, MAX_DIM};
use crate::torus::{dist_raw, nearest_coord, reduce, LiftPoint, TorusPoint};

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"TORALDF1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub max_iter: usize,
    /// Stop once the grid update changes no node by more than this.
    pub tol: f64,
    /// Relative damping targeted by the refined evaluation.
    pub refine_tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            max_iter: 200,
            tol: 1e-8,
            refine_tol: 1e-10,
        }
    }
}

/// Grid samples of u on [0,1)^d, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    resolution: Vec<usize>,
    values: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual after each iteration.
    pub history: Vec<f64>,
    /// C·‖p‖∞ with C the shadowing constant of A.
    pub a_priori_bound: f64,
}

/// Sidecar record written next to the binary field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldReport {
    pub schema_version: u32,
    pub map: String,
    pub resolution: Vec<usize>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub sup_norm: f64,
    pub class_diameter_bound: f64,
    pub a_priori_bound: f64,
    pub history: Vec<f64>,
}

impl DisplacementField {
    pub fn zeros(resolution: Vec<usize>) -> Self {
        let d = resolution.len();
        let n: usize = resolution.iter().product();
        DisplacementField {
            resolution,
            values: vec![0.0; n * d],
            residual: 0.0,
            iterations: 0,
            converged: true,
            history: Vec::new(),
            a_priori_bound: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn nodes(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest grid spacing.
    pub fn spacing(&self) -> f64 {
        self.resolution
            .iter()
            .map(|&r| 1.0 / r as f64)
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        let d = self.dim();
        self.values
            .chunks(d)
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// K = 2‖u‖∞, the bound on class diameters.
    pub fn class_diameter_bound(&self) -> f64 {
        2.0 * self.sup_norm()
    }

    fn node_coords(&self, idx: usize, out: &mut [f64]) {
        let mut rem = idx;
        for ax in (0..self.dim()).rev() {
            let r = self.resolution[ax];
            out[ax] = (rem % r) as f64 / r as f64;
            rem /= r;
        }
    }

    /// Multilinear periodic interpolation of u at x.
    #[inline]
    pub fn interpolate(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for ax in 0..d {
            let r = self.resolution[ax];
            let t = reduce(x[ax]) * r as f64;
            let i = t.floor();
            frac[ax] = t - i;
            base[ax] = (i as usize) % r;
        }
        out[..d].fill(0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = 0usize;
            for ax in 0..d {
                let r = self.resolution[ax];
                let hi = (corner >> (d - 1 - ax)) & 1 == 1;
                let k = if hi { (base[ax] + 1) % r } else { base[ax] };
                w *= if hi { frac[ax] } else { 1.0 - frac[ax] };
                idx = idx * r + k;
            }
            if w == 0.0 {
                continue;
            }
            let v = &self.values[idx * d..(idx + 1) * d];
            for i in 0..d {
                out[i] += w * v[i];
            }
        }
    }

    pub fn report(&self, map: &str) -> FieldReport {
        FieldReport {
            schema_version: SCHEMA_VERSION,
            map: map.to_string(),
            resolution: self.resolution.clone(),
            residual: self.residual,
            iterations: self.iterations,
            converged: self.converged,
            sup_norm: self.sup_norm(),
            class_diameter_bound: self.class_diameter_bound(),
            a_priori_bound: self.a_priori_bound,
            history: self.history.clone(),
        }
    }

    /// Binary layout: magic, d (u64), d resolutions (u64), then the values
    /// as little-endian f64, node-major.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        for &r in &self.resolution {
            w.write_all(&(r as u64).to_le_bytes())?;
        }
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Config("not a displacement field file".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let d = u64::from_le_bytes(word) as usize;
        if d == 0 || d > MAX_DIM {
            return Err(Error::Config(format!("field dimension {d} out of range")));
        }
        let mut resolution = Vec::with_capacity(d);
        for _ in 0..d {
            r.read_exact(&mut word)?;
            resolution.push(u64::from_le_bytes(word) as usize);
        }
        if resolution.contains(&0) {
            return Err(Error::Config("zero grid resolution in field file".into()));
        }
        let mut field = DisplacementField::zeros(resolution);
        for v in field.values.iter_mut() {
            r.read_exact(&mut word)?;
            *v = f64::from_le_bytes(word);
        }
        Ok(field)
    }

    /// Write `<stem>.bin` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str, map: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let f = std::fs::File::create(dir.join(format!("{stem}.bin")))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_binary(&mut w)?;
        w.flush()?;
        let report = serde_json::to_string_pretty(&self.report(map))?;
        std::fs::write(dir.join(format!("{stem}.json")), report + "\n")?;
        Ok(())
    }
}

/// Solver output bundled with what the refined evaluation needs.
#[derive(Debug, Clone)]
pub struct FranksSolution {
    map: TorusMap,
    pub field: DisplacementField,
    ps: Vec<f64>,
    pu: Vec<f64>,
    a: Vec<f64>,
    a_inv: Vec<f64>,
    depth_stable: usize,
    depth_unstable: usize,
    damping: f64,
}

fn mv(m: &[f64], d: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..d {
        out[i] = (0..d).map(|j| m[i * d + j] * x[j]).sum();
    }
}

fn depth_for(rate: f64, tol: f64) -> usize {
    if rate <= 0.0 {
        return 1;
    }
    ((tol.ln() / rate.ln()).ceil() as usize).clamp(1, 5000)
}

/// Sup of |p| over a grid, an input to the a-priori bound.
fn displacement_sup(f: &TorusMap, res: &[usize]) -> f64 {
    let field = DisplacementField::zeros(res.to_vec());
    let d = f.dim();
    (0..field.nodes())
        .into_par_iter()
        .map(|i| {
            let mut x = [0.0; MAX_DIM];
            field.node_coords(i, &mut x[..d]);
            let mut p = [0.0; MAX_DIM];
            f.displacement_raw(&x[..d], &mut p[..d]);
            p[..d].iter().map(|c| c * c).sum::<f64>().sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

pub fn solve_franks(
    f: &TorusMap,
    resolution: &[usize],
    params: &SolverParams,
) -> Result<FranksSolution> {
    let d = f.dim();
    if resolution.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: resolution.len(),
        });
    }
    if resolution.contains(&0) {
        return Err(Error::InvalidParameter(
            "grid resolution must be positive".into(),
        ));
    }
    let split = f.linear_part().spectral_split()?;
    let ps = row_major(&split.stable_projector);
    let ms = row_major(&(split.matrix() * &split.stable_projector));
    let mu = row_major(&(split.inverse_matrix() * &split.unstable_projector));

    let mut field = DisplacementField::zeros(resolution.to_vec());
    let n = field.nodes();
    // per node: F(x), F⁻¹(x), constant term −P_s p(F⁻¹x) + A⁻¹P_u p(x)
    let pre: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            let mut x = [0.0; MAX_DIM];
            field.node_coords(i, &mut x[..d]);
            let mut out = vec![0.0; 3 * d];
            f.apply_raw(&x[..d], &mut out[..d]);
            let mut xb = [0.0; MAX_DIM];
            f.invert_raw(&x[..d], &mut xb[..d])?;
            out[d..2 * d].copy_from_slice(&xb[..d]);
            let mut pb = [0.0; MAX_DIM];
            f.displacement_raw(&xb[..d], &mut pb[..d]);
            let mut p = [0.0; MAX_DIM];
            f.displacement_raw(&x[..d], &mut p[..d]);
            let mut t1 = [0.0; MAX_DIM];
            let mut t2 = [0.0; MAX_DIM];
            mv(&ps, d, &pb[..d], &mut t1[..d]);
            mv(&mu, d, &p[..d], &mut t2[..d]);
            for k in 0..d {
                out[2 * d + k] = t2[k] - t1[k];
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .concat();

    let mut next = vec![0.0; n * d];
    for it in 0..params.max_iter {
        let cur = &field;
        let residual = next
            .par_chunks_mut(d)
            .enumerate()
            .map(|(i, out)| {
                let row = &pre[i * 3 * d..(i + 1) * 3 * d];
                let mut uf = [0.0; MAX_DIM];
                let mut ub = [0.0; MAX_DIM];
                cur.interpolate(&row[..d], &mut uf[..d]);
                cur.interpolate(&row[d..2 * d], &mut ub[..d]);
                let mut s = [0.0; MAX_DIM];
                let mut u = [0.0; MAX_DIM];
                mv(&ms, d, &ub[..d], &mut s[..d]);
                mv(&mu, d, &uf[..d], &mut u[..d]);
                let old = &cur.values[i * d..(i + 1) * d];
                let mut change = 0.0;
                for k in 0..d {
                    out[k] = s[k] + u[k] + row[2 * d + k];
                    change += (out[k] - old[k]) * (out[k] - old[k]);
                }
                change.sqrt()
            })
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut field.values, &mut next);
        field.history.push(residual);
        field.residual = residual;
        field.iterations = it + 1;
        if residual < params.tol {
            break;
        }
    }
    field.converged = field.residual < params.tol;
    field.a_priori_bound = split.shadowing_constant() * displacement_sup(f, resolution);
    Ok(FranksSolution::new(
        f.clone(),
        field,
        &split,
        params.refine_tol,
    ))
}

impl FranksSolution {
    /// Wrap an existing field (for instance one read from disk).
    pub fn new(
        map: TorusMap,
        field: DisplacementField,
        split: &SpectralSplit,
        refine_tol: f64,
    ) -> Self {
        FranksSolution {
            ps: row_major(&split.stable_projector),
            pu: row_major(&split.unstable_projector),
            a: row_major(split.matrix()),
            a_inv: row_major(split.inverse_matrix()),
            depth_stable: depth_for(split.contraction_rate, refine_tol),
            depth_unstable: depth_for(1.0 / split.expansion_rate, refine_tol),
            damping: {
                let ks = depth_for(split.contraction_rate, refine_tol) as i32;
                let ku = depth_for(1.0 / split.expansion_rate, refine_tol) as i32;
                split
                    .contraction_rate
                    .powi(ks)
                    .max(split.expansion_rate.powi(-ku))
            },
            map,
            field,
        }
    }

    pub fn map(&self) -> &TorusMap {
        &self.map
    }

    pub fn depths(&self) -> (usize, usize) {
        (self.depth_stable, self.depth_unstable)
    }

    /// Rough bound on |u_refined − u|: the grid error, bounded by the
    /// a-priori bound plus the field's own size and its unconverged part,
    /// damped by the unrolling.
    pub fn refined_error_estimate(&self) -> f64 {
        let rate = self.damping.max(0.0);
        let grid = self.field.a_priori_bound + self.field.sup_norm() + self.field.residual * 10.0;
        grid * rate
    }

    /// u(x) by unrolling both updates along the orbit of x.
    pub fn displacement_raw(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.map.dim();
        let mut tmp = [0.0; MAX_DIM];
        let mut p = [0.0; MAX_DIM];
        let mut v = [0.0; MAX_DIM];

        // stable: backward orbit, then Horner from the deepest point
        let ks = self.depth_stable;
        let mut orbit = vec![0.0; (ks + 1) * d];
        orbit[..d].copy_from_slice(&x[..d]);
        for j in 1..=ks {
            let (prev, cur) = orbit.split_at_mut(j * d);
            self.map.invert_raw(&prev[(j - 1) * d..], &mut cur[..d])?;
        }
        self.field.interpolate(&orbit[ks * d..], &mut tmp[..d]);
        mv(&self.ps, d, &tmp[..d], &mut v[..d]);
        for j in (1..=ks).rev() {
            self.map
                .displacement_raw(&orbit[j * d..(j + 1) * d], &mut p[..d]);
            mv(&self.a, d, &v[..d], &mut tmp[..d]);
            for k in 0..d {
                tmp[k] -= p[k];
            }
            mv(&self.ps, d, &tmp[..d], &mut v[..d]);
        }
        let stable = v;

        // unstable: forward orbit
        let ku = self.depth_unstable;
        let mut orbit = vec![0.0; (ku + 1) * d];
        orbit[..d].copy_from_slice(&x[..d]);
        for j in 1..=ku {
            let (prev, cur) = orbit.split_at_mut(j * d);
            self.map.apply_raw(&prev[(j - 1) * d..], &mut cur[..d]);
        }
        self.field.interpolate(&orbit[ku * d..], &mut tmp[..d]);
        mv(&self.pu, d, &tmp[..d], &mut v[..d]);
        for j in (0..ku).rev() {
            self.map
                .displacement_raw(&orbit[j * d..(j + 1) * d], &mut p[..d]);
            for k in 0..d {
                p[k] += v[k];
            }
            mv(&self.pu, d, &p[..d], &mut tmp[..d]);
            mv(&self.a_inv, d, &tmp[..d], &mut v[..d]);
        }
        for k in 0..d {
            out[k] = stable[k] + v[k];
        }
        Ok(())
    }

    /// h(x) = x + u(x) mod 1.
    pub fn evaluate_h(&self, x: &TorusPoint) -> Result<TorusPoint> {
        let d = x.dim();
        let mut u = vec![0.0; d];
        self.displacement_raw(x.coords(), &mut u)?;
        let h: Vec<f64> = x.coords().iter().zip(&u).map(|(a, b)| a + b).collect();
        Ok(TorusPoint::wrapped(&h))
    }

    /// h̃(x̃) = x̃ + u(x̃).
    pub fn evaluate_h_lift(&self, x: &LiftPoint) -> Result<LiftPoint> {
        let mut u = vec![0.0; x.dim()];
        let r: Vec<f64> = x.coords().iter().map(|&c| reduce(c)).collect();
        self.displacement_raw(&r, &mut u)?;
        Ok(LiftPoint(
            x.coords().iter().zip(&u).map(|(a, b)| a + b).collect(),
        ))
    }

    /// max over the points of torus_dist(h(f(x)), A·h(x)).
    pub fn conjugacy_defect(&self, points: &[TorusPoint]) -> Result<f64> {
        let d = self.map.dim();
        let errs = points
            .par_iter()
            .map(|x| -> Result<f64> {
                let fx = self.map.apply(x);
                let hfx = self.evaluate_h(&fx)?;
                let hx = self.evaluate_h(x)?;
                let mut ahx = vec![0.0; d];
                mv(&self.a, d, hx.coords(), &mut ahx);
                let ahx: Vec<f64> = ahx.into_iter().map(reduce).collect();
                Ok(dist_raw(hfx.coords(), &ahx))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(errs.into_iter().fold(0.0, f64::max))
    }
}

/// Candidate points for a class search around y0: a box in torus
/// coordinates and, when a center frame is given, a finer grid on the
/// center plane through y0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassSearch {
    pub box_half_width: f64,
    pub box_points: usize,
    pub center_half_width: f64,
    pub center_points: usize,
}

impl Default for ClassSearch {
    fn default() -> Self {
        ClassSearch {
            box_half_width: 0.02,
            box_points: 9,
            center_half_width: 0.25,
            center_points: 401,
        }
    }
}

/// A chart frame and the indices of its center axes.
#[derive(Debug, Clone)]
pub struct CenterFrame {
    pub frame: Frame,
    pub axes: Vec<usize>,
}

impl CenterFrame {
    /// Center directions of a built model: the stable line of the Mañé
    /// map, the center plane of the T⁴ example, none for linear maps.
    pub fn for_model(model: &MapModel) -> Option<Self> {
        match model {
            MapModel::Linear(_) => None,
            MapModel::Mane(m) => Some(CenterFrame {
                frame: m.frame().clone(),
                axes: vec![0],
            }),
            MapModel::T4(ex) => Some(CenterFrame {
                frame: ex.frame().clone(),
                axes: vec![1, 2],
            }),
        }
    }
}

impl ClassSearch {
    pub fn candidates(&self, y0: &TorusPoint, center: Option<&CenterFrame>) -> Vec<LiftPoint> {
        let d = y0.dim();
        let mut out = vec![y0.lift()];
        let line = |m: usize, hw: f64| -> Vec<f64> {
            if m <= 1 {
                return vec![0.0];
            }
            (0..m)
                .map(|i| -hw + 2.0 * hw * i as f64 / (m - 1) as f64)
                .collect()
        };
        let offs = line(self.box_points, self.box_half_width);
        let total = offs.len().pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut p = y0.coords().to_vec();
            for ax in (0..d).rev() {
                p[ax] += offs[rem % offs.len()];
                rem /= offs.len();
            }
            out.push(LiftPoint(p));
        }
        if let Some(c) = center {
            let offs = line(self.center_points, self.center_half_width);
            let k = c.axes.len();
            let total = offs.len().pow(k as u32);
            let mut xi = vec![0.0; d];
            let mut x = vec![0.0; d];
            for idx in 0..total {
                let mut rem = idx;
                xi.fill(0.0);
                for &ax in c.axes.iter().rev() {
                    xi[ax] = offs[rem % offs.len()];
                    rem /= offs.len();
                }
                c.frame.from_chart(&xi, &mut x);
                out.push(LiftPoint(
                    y0.coords().iter().zip(&x).map(|(a, b)| a + b).collect(),
                ));
            }
        }
        out
    }
}

/// Sampled members of h⁻¹(x) with their geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreimageClass {
    pub base: TorusPoint,
    pub tol: f64,
    /// Members as lifts near the search center.
    pub members: Vec<Vec<f64>>,
    pub diameter: f64,
    /// (n, diam fⁿ[x]) in the cover.
    pub iterate_diameters: Vec<(i32, f64)>,
    /// sup |u| over the members and the iterates measured, which bounds
    /// each diam fⁿ[x] by twice itself.
    pub orbit_displacement_sup: f64,
}

fn lift_diameter(points: &[Vec<f64>]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            best = best.max(s);
        }
    }
    best.sqrt()
}

/// Threshold the candidates by torus_dist(h(y), x) < tol and measure
/// diam fⁿ of the result for |n| ≤ `iterates`.
pub fn preimage_class(
    sol: &FranksSolution,
    x: &TorusPoint,
    candidates: &[LiftPoint],
    tol: f64,
    iterates: u32,
) -> Result<PreimageClass> {
    let anchor = candidates.first().cloned().unwrap_or_else(|| x.lift());
    let keep = candidates
        .par_iter()
        .map(|c| -> Result<Option<Vec<f64>>> {
            let y = TorusPoint::wrapped(c.coords());
            let hy = sol.evaluate_h(&y)?;
            if dist_raw(hy.coords(), x.coords()) < tol {
                Ok(Some(
                    y.coords()
                        .iter()
                        .zip(anchor.coords())
                        .map(|(&v, &a)| nearest_coord(v, a))
                        .collect(),
                ))
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut members: Vec<Vec<f64>> = keep.into_iter().flatten().collect();
    members.dedup();
    if members.is_empty() {
        return Err(Error::EmptySample(format!(
            "no candidate within {tol} of the class of {:?}; refine the search or raise tol",
            x.coords()
        )));
    }
    let diameter = lift_diameter(&members);
    let f = sol.map();
    let mut iterate_diameters = vec![(0, diameter)];
    let mut orbit_displacement_sup = refined_sup(sol, &members)?;
    for dir in [1i32, -1] {
        let mut cur: Vec<Vec<f64>> = members.clone();
        for n in 1..=iterates as i32 {
            cur = cur
                .par_iter()
                .map(|p| -> Result<Vec<f64>> {
                    let l = LiftPoint(p.clone());
                    Ok(if dir > 0 {
                        f.apply_lift(&l).0
                    } else {
                        f.invert_lift(&l)?.0
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            iterate_diameters.push((dir * n, lift_diameter(&cur)));
            orbit_displacement_sup = orbit_displacement_sup.max(refined_sup(sol, &cur)?);
        }
    }
    iterate_diameters.sort_by_key(|e| e.0);
    Ok(PreimageClass {
        base: x.clone(),
        tol,
        members,
        diameter,
        iterate_diameters,
        orbit_displacement_sup,
    })
}

fn refined_sup(sol: &FranksSolution, points: &[Vec<f64>]) -> Result<f64> {
    let d = sol.map().dim();
    points
        .par_iter()
        .map(|p| -> Result<f64> {
            let y: Vec<f64> = p.iter().map(|&c| reduce(c)).collect();
            let mut u = vec![0.0; d];
            sol.displacement_raw(&y, &mut u)?;
            Ok(u.iter().map(|v| v * v).sum::<f64>().sqrt())
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Fraction of the point cloud's variance lying in the center axes of
/// the frame; 1 for clouds of fewer than two points.
pub fn class_center_alignment(class: &PreimageClass, center: &CenterFrame) -> f64 {
    let m = &class.members;
    if m.len() < 2 {
        return 1.0;
    }
    let d = m[0].len();
    let mut chart: Vec<Vec<f64>> = Vec::with_capacity(m.len());
    for p in m {
        let mut xi = vec![0.0; d];
        center.frame.to_chart(p, &mut xi);
        chart.push(xi);
    }
    let mean: Vec<f64> = (0..d)
        .map(|k| chart.iter().map(|v| v[k]).sum::<f64>() / chart.len() as f64)
        .collect();
    let var: Vec<f64> = (0..d)
        .map(|k| chart.iter().map(|v| (v[k] - mean[k]).powi(2)).sum::<f64>())
        .collect();
    let total: f64 = var.iter().sum();
    if total == 0.0 {
        return 1.0;
    }
    center.axes.iter().map(|&k| var[k]).sum::<f64>() / total
}

/// Closed form for F = A·x + c: u ≡ (A − I)⁻¹c.
pub fn constant_displacement_solution(a: &DMatrix<f64>, c: &[f64]) -> Result<Vec<f64>> {
    let d = c.len();
    let m = a - DMatrix::<f64>::identity(d, d);
    let sol = m
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(c))
        .ok_or_else(|| Error::Numerical("A − I is singular".into()))?;
    Ok(sol.iter().copied().collect())
}
