//! One-dimensional building blocks: smoothstep, plateau bumps, slope
//! profiles with zero mean, and a safeguarded monotone root finder.

use crate::error::{Error, Result};

/// Quintic smoothstep 10u³ − 15u⁴ + 6u⁵ clamped to [0,1], with derivative.
#[inline]
pub fn smoothstep(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        (0.0, 0.0)
    } else if u >= 1.0 {
        (1.0, 0.0)
    } else {
        let u2 = u * u;
        (
            u2 * u * (10.0 - 15.0 * u + 6.0 * u2),
            30.0 * u2 * (1.0 - u) * (1.0 - u),
        )
    }
}

/// ∫₀ᵘ smoothstep, continued linearly past u = 1.
#[inline]
fn smoothstep_integral(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        0.5 + (u - 1.0)
    } else {
        let u4 = u * u * u * u;
        u4 * (2.5 - 3.0 * u + u * u)
    }
}

/// Even C² bump: 1 on |y| ≤ plateau, 0 on |y| ≥ plateau + width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub plateau: f64,
    pub width: f64,
}

impl Bump {
    pub fn new(plateau: f64, width: f64) -> Self {
        Bump { plateau, width }
    }

    pub fn support(&self) -> f64 {
        self.plateau + self.width
    }

    /// Value and derivative at y.
    #[inline]
    pub fn eval(&self, y: f64) -> (f64, f64) {
        let a = y.abs();
        if a <= self.plateau {
            return (1.0, 0.0);
        }
        let (s, ds) = smoothstep((a - self.plateau) / self.width);
        (1.0 - s, -ds / self.width * y.signum())
    }
}

/// Slope profile k on [0,1]: 1 on [0,sp], smooth drop to −γ on [sp,sa],
/// −γ on [sa,sb], smooth return to 0 on [sb,1]. γ is chosen so that
/// ∫₀¹ k = 0, hence q(σ) = ∫₀^σ k vanishes for σ ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeProfile {
    sp: f64,
    sa: f64,
    sb: f64,
    gamma: f64,
}

impl SlopeProfile {
    pub fn new(sp: f64, sa: f64, sb: f64) -> Result<Self> {
        if !(0.0 < sp && sp < sa && sa < sb && sb < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "slope profile breakpoints {sp}, {sa}, {sb} not increasing in (0,1)"
            )));
        }
        let gamma = (sp + 0.5 * (sa - sp)) / (0.5 * (sa - sp) + (sb - sa) + 0.5 * (1.0 - sb));
        Ok(SlopeProfile { sp, sa, sb, gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn plateau(&self) -> f64 {
        self.sp
    }

    /// k(σ) for σ ≥ 0.
    #[inline]
    pub fn slope(&self, o: f64) -> f64 {
        let g = self.gamma;
        if o <= self.sp {
            1.0
        } else if o <= self.sa {
            1.0 - (1.0 + g) * smoothstep((o - self.sp) / (self.sa - self.sp)).0
        } else if o <= self.sb {
            -g
        } else if o < 1.0 {
            -g * (1.0 - smoothstep((o - self.sb) / (1.0 - self.sb)).0)
        } else {
            0.0
        }
    }

    /// q(σ) = ∫₀^σ k for σ ≥ 0.
    #[inline]
    pub fn value(&self, o: f64) -> f64 {
        let g = self.gamma;
        if o <= self.sp {
            return o;
        }
        let a = self.sa - self.sp;
        if o <= self.sa {
            return o - (1.0 + g) * a * smoothstep_integral((o - self.sp) / a);
        }
        let qa = self.sa - (1.0 + g) * a * 0.5;
        if o <= self.sb {
            return qa - g * (o - self.sa);
        }
        if o >= 1.0 {
            return 0.0;
        }
        let b = 1.0 - self.sb;
        let qb = qa - g * (self.sb - self.sa);
        qb - g * ((o - self.sb) - b * smoothstep_integral((o - self.sb) / b))
    }

    /// Odd extension: (q(x), q'(x)) = (sign(x)·q(|x|), k(|x|)).
    #[inline]
    pub fn odd(&self, x: f64) -> (f64, f64) {
        let a = x.abs();
        (self.value(a).copysign(x), self.slope(a))
    }

    /// max over σ of q(σ).
    pub fn max_value(&self) -> f64 {
        // q increases while k > 0, so the maximum sits at the zero of k in the ramp
        let (mut lo, mut hi) = (self.sp, self.sa);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if self.slope(m) > 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        self.value(lo)
    }
}

/// Root of an increasing function f(x) = target inside [lo, hi]; f returns
/// (value, derivative). Newton steps that leave the bracket fall back to
/// bisection.
pub fn solve_increasing(
    f: impl Fn(f64) -> (f64, f64),
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo > target || fhi < target {
        return Err(Error::Numerical(format!(
            "monotone solve: target {target} not bracketed by [{flo}, {fhi}]"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        let r = fx - target;
        if r.abs() <= tol {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - r / dfx;
        x = if dfx > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= f64::EPSILON * x.abs().max(1e-300) {
            return Ok(x);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_has_zero_mean() {
        let p = SlopeProfile::new(0.1, 0.25, 0.85).unwrap();
        assert!(p.value(1.0).abs() < 1e-15);
        assert!(p.value(0.9999999).abs() < 1e-12);
        let n = 200_000;
        let h = 1.0 / n as f64;
        let integral: f64 = (0..n).map(|i| p.slope((i as f64 + 0.5) * h) * h).sum();
        assert!(integral.abs() < 1e-9);
    }

    #[test]
    fn profile_value_integrates_slope() {
        let p = SlopeProfile::new(0.25, 0.4, 0.85).unwrap();
        for &o in &[0.05, 0.3, 0.37, 0.5, 0.8, 0.9, 0.97] {
            let h = 1e-6;
            let fd = (p.value(o + h) - p.value(o - h)) / (2.0 * h);
            assert!(
                (fd - p.slope(o)).abs() < 1e-6,
                "at {o}: {fd} vs {}",
                p.slope(o)
            );
        }
    }

    #[test]
    fn bump_derivative() {
        let b = Bump::new(0.3, 0.5);
        for &y in &[-0.7, -0.5, 0.1, 0.45, 0.79] {
            let h = 1e-7;
            let fd = (b.eval(y + h).0 - b.eval(y - h).0) / (2.0 * h);
            assert!((fd - b.eval(y).1).abs() < 1e-6);
        }
    }

    #[test]
    fn monotone_solver() {
        let x = solve_increasing(
            |x| (x * x * x + x, 3.0 * x * x + 1.0),
            10.0,
            -5.0,
            5.0,
            1e-14,
        )
        .unwrap();
        assert!((x * x * x + x - 10.0).abs() < 1e-12);
    }
}
