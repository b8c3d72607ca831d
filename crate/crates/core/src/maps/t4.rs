//! The T⁴ example: the companion matrix with a horseshoe planted in its
//! two-dimensional weak-stable (center) plane at the fixed point 0.
//!
//! Chart coordinates ξ = (ξ₁, z, ξ₄) come from the eigenframe of A with
//! the middle pair orthonormalized. In the chart
//!
//!   H(ξ) = (λ₁ξ₁, A_c·Φ_w(δ·S_t(z/δ)), λᵘξ₄),  t = clamp((ξ₁² + ξ₄²)/δ², 0, 1),
//!
//! where S_t is the horseshoe shear (so λ_ws∘S_t = h_t) and Φ_w is a
//! compactly supported diffeomorphism equal to L = A_c⁻¹λ_ws near z = 0
//! when w = 1 and to the identity far away. w = w(ξ₁, ξ₄) is a plateau
//! bump, so H is exactly (λ₁ξ₁, δ·h_t(z/δ), λᵘξ₄) on the horseshoe region
//! and the linear block map outside the support box.
//!
//! Φ_w = Twist ∘ U ∘ D₂ ∘ D₁ ∘ Uᵀ realizes the polar decomposition
//! L = R(γ)·U·diag(p₁, p₂)·Uᵀ: each Dᵢ rescales one axis through a
//! monotone profile blended by a bump in the other coordinate, and the
//! twist rotates by γ·w·b(|z|). Every factor has an explicit inverse.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::horseshoe::{mat_mul, mat_vec, HorseshoeIsotopy, HorseshoeParams, Mat2, Vec2};
use super::profiles::{solve_increasing, Bump, SlopeProfile};
use super::{ChartMap, Frame, Perturbation, TorusMap};
use crate::error::{Error, Result};
use crate::linear::{t4_matrix, LinearPart};
use crate::torus::{nearest_coord, TorusPoint};

/// Shape of the blend, in units of δ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlendParams {
    /// |ξ₁|, |ξ₄| below which the transverse weight is 1.
    pub transverse_plateau: f64,
    /// Support half-width in ξ₁ and ξ₄.
    pub transverse_half_width: f64,
    /// Support half-width in each center coordinate.
    pub center_half_width: f64,
    /// Half-width of the region where Φ equals L.
    pub core: f64,
    pub bump_taper: f64,
    pub twist_taper: f64,
}

impl Default for BlendParams {
    fn default() -> Self {
        BlendParams {
            transverse_plateau: 0.75,
            transverse_half_width: 2.0,
            center_half_width: 2.8,
            core: 0.55,
            bump_taper: 0.8,
            twist_taper: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct T4Params {
    pub delta: f64,
    pub horseshoe: HorseshoeParams,
    pub blend: BlendParams,
}

impl Default for T4Params {
    fn default() -> Self {
        T4Params {
            delta: 0.1,
            horseshoe: HorseshoeParams::default(),
            blend: BlendParams::default(),
        }
    }
}

/// A profile-driven rescaling g(x) = x + (p − 1)·R·q(x/R) of one axis.
#[derive(Debug, Clone, Copy)]
struct AxisScaling {
    slope: f64,
    radius: f64,
    profile: SlopeProfile,
}

impl AxisScaling {
    #[inline]
    fn deviation(&self, x: f64) -> (f64, f64) {
        let (q, k) = self.profile.odd(x / self.radius);
        ((self.slope - 1.0) * self.radius * q, (self.slope - 1.0) * k)
    }

    fn max_deviation(&self) -> f64 {
        (self.slope - 1.0).abs() * self.radius * self.profile.max_value()
    }

    fn min_slope(&self) -> f64 {
        let c = self.slope - 1.0;
        (1.0 + c).min(1.0 - c * self.profile.gamma()).min(1.0)
    }
}

#[derive(Debug, Clone)]
struct CenterBlend {
    u: Mat2,
    gamma: f64,
    d1: AxisScaling,
    d2: AxisScaling,
    b1: Bump,
    b2: Bump,
    twist: Bump,
}

impl CenterBlend {
    /// Φ_w(z) with ∂/∂z and ∂/∂w.
    #[inline]
    fn eval(&self, w: f64, z: Vec2) -> (Vec2, Mat2, Vec2) {
        let ut = transpose(&self.u);
        let v = mat_vec(&ut, z);
        let (x, y) = (v[0], v[1]);
        let (b, db) = self.b1.eval(y);
        let (dev, ddev) = self.d1.deviation(x);
        let x1 = x + w * b * dev;
        let j1 = [[1.0 + w * b * ddev, w * db * dev], [0.0, 1.0]];
        let w1 = [b * dev, 0.0];
        let (b2, db2) = self.b2.eval(x1);
        let (dev2, ddev2) = self.d2.deviation(y);
        let y2 = y + w * b2 * dev2;
        let j2 = [[1.0, 0.0], [w * db2 * dev2, 1.0 + w * b2 * ddev2]];
        let w2 = [0.0, b2 * dev2];
        let m = mat_vec(&self.u, [x1, y2]);
        let r = m[0].hypot(m[1]);
        let (bt, dbt) = self.twist.eval(r);
        let th = self.gamma * w * bt;
        let (s, c) = th.sin_cos();
        let rot = [[c, -s], [s, c]];
        let drot = [[-s, -c], [c, -s]];
        let out = mat_vec(&rot, m);
        let rm = mat_vec(&drot, m);
        let dth = if r > 0.0 {
            [
                self.gamma * w * dbt * m[0] / r,
                self.gamma * w * dbt * m[1] / r,
            ]
        } else {
            [0.0, 0.0]
        };
        let jt = [
            [rot[0][0] + rm[0] * dth[0], rot[0][1] + rm[0] * dth[1]],
            [rot[1][0] + rm[1] * dth[0], rot[1][1] + rm[1] * dth[1]],
        ];
        let jtu = mat_mul(&jt, &self.u);
        let jac = mat_mul(&mat_mul(&jtu, &mat_mul(&j2, &j1)), &ut);
        let inner = mat_vec(&j2, w1);
        let dw_inner = mat_vec(&jtu, [inner[0] + w2[0], inner[1] + w2[1]]);
        let dw = [
            dw_inner[0] + rm[0] * self.gamma * bt,
            dw_inner[1] + rm[1] * self.gamma * bt,
        ];
        (out, jac, dw)
    }

    fn inverse(&self, w: f64, out: Vec2) -> Result<Vec2> {
        let r = out[0].hypot(out[1]);
        let th = self.gamma * w * self.twist.eval(r).0;
        let (s, c) = th.sin_cos();
        let m = mat_vec(&[[c, s], [-s, c]], out);
        let v = mat_vec(&transpose(&self.u), m);
        let (x1, y2) = (v[0], v[1]);
        let b2 = self.b2.eval(x1).0;
        let bound2 = w * b2 * self.d2.max_deviation() + 1e-14;
        let y = solve_increasing(
            |y| {
                let (dv, ddv) = self.d2.deviation(y);
                (y + w * b2 * dv, 1.0 + w * b2 * ddv)
            },
            y2,
            y2 - bound2,
            y2 + bound2,
            1e-17,
        )?;
        let b = self.b1.eval(y).0;
        let bound1 = w * b * self.d1.max_deviation() + 1e-14;
        let x = solve_increasing(
            |x| {
                let (dv, ddv) = self.d1.deviation(x);
                (x + w * b * dv, 1.0 + w * b * ddv)
            },
            x1,
            x1 - bound1,
            x1 + bound1,
            1e-17,
        )?;
        Ok(mat_vec(&self.u, [x, y]))
    }
}

fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

fn inverse2(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

#[derive(Debug, Clone)]
pub struct T4Chart {
    frame: Frame,
    half_widths: [f64; 4],
    delta: f64,
    lambda_1: f64,
    lambda_u: f64,
    a_c: Mat2,
    a_c_inv: Mat2,
    iso: HorseshoeIsotopy,
    blend: CenterBlend,
    transverse: Bump,
}

impl T4Chart {
    #[inline]
    fn param(&self, x1: f64, x4: f64) -> (f64, f64, f64) {
        let d2 = self.delta * self.delta;
        let t = (x1 * x1 + x4 * x4) / d2;
        if t >= 1.0 {
            (1.0, 0.0, 0.0)
        } else {
            (t, 2.0 * x1 / d2, 2.0 * x4 / d2)
        }
    }

    #[inline]
    fn weight(&self, x1: f64, x4: f64) -> (f64, f64, f64) {
        let (a, da) = self.transverse.eval(x1);
        let (b, db) = self.transverse.eval(x4);
        (a * b, da * b, a * db)
    }

    /// Center component of H together with ∂/∂z, ∂/∂ξ₁, ∂/∂ξ₄.
    #[inline]
    fn center(&self, xi: &[f64]) -> (Vec2, Mat2, Vec2, Vec2) {
        let d = self.delta;
        let (t, dt1, dt4) = self.param(xi[0], xi[3]);
        let (w, dw1, dw4) = self.weight(xi[0], xi[3]);
        let (s, ds, dsdt) = self.iso.shear(t, [xi[1] / d, xi[2] / d]);
        let (o, jo, dow) = self.blend.eval(w, [d * s[0], d * s[1]]);
        let c = mat_vec(&self.a_c, o);
        let jz = mat_mul(&self.a_c, &mat_mul(&jo, &ds));
        let dt_dir = mat_vec(&jo, [d * dsdt[0], d * dsdt[1]]);
        let col = |dtx: f64, dwx: f64| {
            mat_vec(
                &self.a_c,
                [
                    dt_dir[0] * dtx + dow[0] * dwx,
                    dt_dir[1] * dtx + dow[1] * dwx,
                ],
            )
        };
        (c, jz, col(dt1, dw1), col(dt4, dw4))
    }
}

impl ChartMap for T4Chart {
    fn frame(&self) -> &Frame {
        &self.frame
    }

    fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    fn map(&self, xi: &[f64], out: &mut [f64]) {
        let (c, ..) = self.center(xi);
        out[0] = self.lambda_1 * xi[0];
        out[1] = c[0];
        out[2] = c[1];
        out[3] = self.lambda_u * xi[3];
    }

    fn jacobian(&self, xi: &[f64], out: &mut [f64]) {
        let (_, jz, j1, j4) = self.center(xi);
        out[..16].fill(0.0);
        out[0] = self.lambda_1;
        for r in 0..2 {
            let row = (r + 1) * 4;
            out[row] = j1[r];
            out[row + 1] = jz[r][0];
            out[row + 2] = jz[r][1];
            out[row + 3] = j4[r];
        }
        out[15] = self.lambda_u;
    }

    fn inverse(&self, eta: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.delta;
        let x1 = eta[0] / self.lambda_1;
        let x4 = eta[3] / self.lambda_u;
        let (t, ..) = self.param(x1, x4);
        let (w, ..) = self.weight(x1, x4);
        let o = mat_vec(&self.a_c_inv, [eta[1], eta[2]]);
        let win = self.blend.inverse(w, o)?;
        let z = self.iso.shear_inverse(t, [win[0] / d, win[1] / d])?;
        out[0] = x1;
        out[1] = d * z[0];
        out[2] = d * z[1];
        out[3] = x4;
        Ok(())
    }
}

/// The assembled example with its chart data.
#[derive(Debug, Clone)]
pub struct T4Example {
    pub params: T4Params,
    chart: Arc<T4Chart>,
    map: TorusMap,
    eigenvalues: [f64; 4],
}

impl T4Example {
    pub fn new(params: T4Params) -> Result<Self> {
        let delta = params.delta;
        if !(delta > 0.0 && delta < 0.25) {
            return Err(Error::InvalidParameter(format!(
                "δ = {delta} must lie in (0, 1/4)"
            )));
        }
        let bp = params.blend;
        if !(0.5f64.sqrt() < bp.transverse_plateau
            && bp.transverse_plateau < bp.transverse_half_width)
        {
            return Err(Error::InvalidParameter(
                "transverse plateau must exceed 1/√2 and stay below the half-width".into(),
            ));
        }
        let a = t4_matrix();
        let (frame, eigenvalues) = adapted_frame(&a)?;
        let lam = frame.inverse_matrix() * a.matrix() * frame.matrix();
        let a_c = [[lam[(1, 1)], lam[(1, 2)]], [lam[(2, 1)], lam[(2, 2)]]];
        let a_c_inv = inverse2(&a_c);
        let iso = HorseshoeIsotopy::new(params.horseshoe)?;
        let l = mat_mul(&a_c_inv, &iso.lambda_ws());
        let blend = polar_blend(&l, delta, &bp)?;
        let half_widths = [
            bp.transverse_half_width * delta,
            bp.center_half_width * delta,
            bp.center_half_width * delta,
            bp.transverse_half_width * delta,
        ];
        let rc = half_widths[1];
        let reach = [
            blend.d1.radius.hypot(blend.b1.support()),
            blend.b2.support().hypot(blend.d2.radius),
            blend.twist.support(),
            iso.support_radius() * delta,
        ];
        if let Some(r) = reach.iter().find(|&&r| r >= rc) {
            return Err(Error::InvalidParameter(format!(
                "blend reaches {r:.4} beyond the center half-width {rc:.4}"
            )));
        }
        check_embedding(&frame, &half_widths)?;
        let chart = Arc::new(T4Chart {
            frame,
            half_widths,
            delta,
            lambda_1: lam[(0, 0)],
            lambda_u: lam[(3, 3)],
            a_c,
            a_c_inv,
            iso,
            blend,
            transverse: Bump::new(
                bp.transverse_plateau * delta,
                (bp.transverse_half_width - bp.transverse_plateau) * delta,
            ),
        });
        let map = TorusMap::new(a, Perturbation::Chart(chart.clone()), "t4-example")?;
        Ok(T4Example {
            params,
            chart,
            map,
            eigenvalues,
        })
    }

    pub fn torus_map(&self) -> &TorusMap {
        &self.map
    }

    pub fn isotopy(&self) -> &HorseshoeIsotopy {
        &self.chart.iso
    }

    pub fn frame(&self) -> &Frame {
        &self.chart.frame
    }

    pub fn delta(&self) -> f64 {
        self.chart.delta
    }

    pub fn half_widths(&self) -> [f64; 4] {
        self.chart.half_widths
    }

    /// Eigenvalues of A ordered (sss, ss, s, u).
    pub fn eigenvalues(&self) -> [f64; 4] {
        self.eigenvalues
    }

    /// Block of E⁻¹AE acting on the center coordinates.
    pub fn center_block(&self) -> Mat2 {
        self.chart.a_c
    }

    pub fn chart_map(&self, xi: &[f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        self.chart.map(xi, &mut out);
        out
    }

    pub fn chart_jacobian(&self, xi: &[f64; 4]) -> [f64; 16] {
        let mut out = [0.0; 16];
        self.chart.jacobian(xi, &mut out);
        out
    }

    pub fn in_chart(&self, xi: &[f64; 4]) -> bool {
        self.chart.in_support(xi)
    }

    /// Torus point with chart coordinates ξ.
    pub fn point_from_chart(&self, xi: &[f64; 4]) -> TorusPoint {
        let mut x = [0.0; 4];
        self.chart.frame.from_chart(xi, &mut x);
        TorusPoint::wrapped(&x)
    }

    /// Seeded uniform points of the support box, as torus points.
    pub fn sample_chart_points(&self, n: usize, seed: u64) -> Vec<TorusPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hw = self.chart.half_widths;
        (0..n)
            .map(|_| {
                let mut xi = [0.0; 4];
                for (x, w) in xi.iter_mut().zip(hw) {
                    *x = rng.random_range(-w..w);
                }
                self.point_from_chart(&xi)
            })
            .collect()
    }

    /// Torus points on the center plane over δ·Q, where Q = [x0,x1]×[y0,y1]
    /// is given in horseshoe units, sampled on an m×m grid.
    pub fn center_plane_grid(&self, q: [f64; 4], m: usize) -> Vec<TorusPoint> {
        let d = self.chart.delta;
        let step = |lo: f64, hi: f64, i: usize| {
            if m > 1 {
                lo + (hi - lo) * i as f64 / (m - 1) as f64
            } else {
                0.5 * (lo + hi)
            }
        };
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(self.point_from_chart(&[
                    0.0,
                    d * step(q[0], q[1], i),
                    d * step(q[2], q[3], j),
                    0.0,
                ]));
            }
        }
        out
    }

    /// Chart coordinates of the representative of x nearest to 0.
    pub fn chart_coords(&self, x: &TorusPoint) -> [f64; 4] {
        let mut x0 = [0.0; 4];
        for (o, c) in x0.iter_mut().zip(x.coords()) {
            *o = nearest_coord(*c, 0.0);
        }
        let mut xi = [0.0; 4];
        self.chart.frame.to_chart(&x0, &mut xi);
        xi
    }
}

/// Unit eigenvectors of a matrix with real simple spectrum, sorted by
/// modulus, with the middle two Gram–Schmidt orthonormalized.
fn adapted_frame(a: &LinearPart) -> Result<(Frame, [f64; 4])> {
    let ev = a.eigenvalues();
    if ev.len() != 4 || ev.iter().any(|l| l.im.abs() > 1e-9) {
        return Err(Error::Numerical("expected four real eigenvalues".into()));
    }
    let m = a.matrix();
    let mut cols = Vec::new();
    for l in &ev {
        let shifted = &m - DMatrix::<f64>::identity(4, 4) * l.re;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested V");
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let mut v: Vec<f64> = vt.row(imin).iter().copied().collect();
        let (_, big) =
            v.iter().enumerate().fold(
                (0, 0.0),
                |acc, (i, &c)| if c.abs() > acc.1 { (i, c.abs()) } else { acc },
            );
        let pivot = v.iter().copied().find(|c| c.abs() == big).unwrap_or(1.0);
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt() * pivot.signum();
        v.iter_mut().for_each(|c| *c /= n);
        cols.push(v);
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let proj = dot(&cols[1], &cols[2]);
    let mut q2: Vec<f64> = cols[2]
        .iter()
        .zip(&cols[1])
        .map(|(s, c)| s - proj * c)
        .collect();
    let n2 = dot(&q2, &q2).sqrt();
    q2.iter_mut().for_each(|c| *c /= n2);
    cols[2] = q2;
    let e = DMatrix::from_fn(4, 4, |i, j| cols[j][i]);
    Ok((Frame::new(e)?, [ev[0].re, ev[1].re, ev[2].re, ev[3].re]))
}

fn polar_blend(l: &Mat2, delta: f64, bp: &BlendParams) -> Result<CenterBlend> {
    // P = sqrt(LᵀL), R(γ) = L·P⁻¹
    let ltl = mat_mul(&transpose(l), l);
    let det = (ltl[0][0] * ltl[1][1] - ltl[0][1] * ltl[1][0]).sqrt();
    let tr = (ltl[0][0] + ltl[1][1] + 2.0 * det).sqrt();
    let p = [
        [(ltl[0][0] + det) / tr, ltl[0][1] / tr],
        [ltl[1][0] / tr, (ltl[1][1] + det) / tr],
    ];
    let rot = mat_mul(l, &inverse2(&p));
    if (rot[0][0] * rot[1][1] - rot[0][1] * rot[1][0] - 1.0).abs() > 1e-9 {
        return Err(Error::Numerical("L must preserve orientation".into()));
    }
    let gamma = rot[1][0].atan2(rot[0][0]);
    // eigenvectors of the symmetric P, larger eigenvalue first
    let (a, b, c) = (p[0][0], p[0][1], p[1][1]);
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (p1, p2) = (mean + rad, mean - rad);
    let th = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = th.sin_cos();
    let u = [[co, -s], [s, co]];
    let core = bp.core * delta;
    let (hi, lo) = if p1 >= 1.0 && p2 <= 1.0 {
        (p1, p2)
    } else {
        return Err(Error::InvalidParameter(format!(
            "polar factor eigenvalues {p1:.4}, {p2:.4} do not straddle 1"
        )));
    };
    let d1 = AxisScaling {
        slope: hi,
        radius: core / 0.25,
        profile: SlopeProfile::new(0.25, 0.4, 0.85)?,
    };
    let d2 = AxisScaling {
        slope: lo,
        radius: core / 0.5,
        profile: SlopeProfile::new(0.5, 0.6, 0.8)?,
    };
    if d1.min_slope() <= 0.05 || d2.min_slope() <= 0.05 {
        return Err(Error::InvalidParameter("axis rescalings would fold".into()));
    }
    Ok(CenterBlend {
        u,
        gamma,
        d1,
        d2,
        b1: Bump::new(core, bp.bump_taper * delta),
        b2: Bump::new(hi * core, bp.bump_taper * delta),
        twist: Bump::new(hi * core, bp.twist_taper * delta),
    })
}

/// No nonzero integer vector k may satisfy |(E⁻¹k)ᵢ| < 2ρᵢ for all i,
/// otherwise two translates of the support box overlap.
fn check_embedding(frame: &Frame, rho: &[f64; 4]) -> Result<()> {
    let e = frame.matrix();
    let einv = frame.inverse_matrix();
    // any offending k satisfies |k_i| ≤ Σ_j |E_ij|·2ρ_j
    let bound: Vec<i64> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| e[(i, j)].abs() * 2.0 * rho[j])
                .sum::<f64>()
                .floor() as i64
        })
        .collect();
    let mut k = [0i64; 4];
    fn rec(
        i: usize,
        k: &mut [i64; 4],
        bound: &[i64],
        einv: &DMatrix<f64>,
        rho: &[f64; 4],
    ) -> Option<[i64; 4]> {
        if i == 4 {
            if k.iter().all(|&c| c == 0) {
                return None;
            }
            let ok = (0..4).all(|r| {
                (0..4)
                    .map(|c| einv[(r, c)] * k[c] as f64)
                    .sum::<f64>()
                    .abs()
                    < 2.0 * rho[r]
            });
            return if ok { Some(*k) } else { None };
        }
        for v in -bound[i]..=bound[i] {
            k[i] = v;
            if let Some(hit) = rec(i + 1, k, bound, einv, rho) {
                return Some(hit);
            }
        }
        None
    }
    if let Some(hit) = rec(0, &mut k, &bound, &einv, rho) {
        return Err(Error::InvalidParameter(format!(
            "chart box overlaps its translate by {hit:?}; decrease δ"
        )));
    }
    Ok(())
}
