//! Limit distributions of the scaled exit time and of the scaled number of
//! cushion collisions as the puncture radius shrinks to zero.
//!
//! With `ψ(x) = (1-x)/x · (1 + ln(x/(1-x)))` on `[1/2, 1)`, the tail of the
//! scaled exit time is
//!
//! ```text
//! H(t) = 1 - 2t/ζ(2)               0 < t < 1/2
//!      = 2/ζ(2) ∫_t^1 ψ(x) dx      1/2 ≤ t < 1
//!      = 0                         t ≥ 1
//! ```
//!
//! and the tail of the scaled collision count is
//! `F(t) = 4/π ∫_0^{π/4} H(t / (cos ω + sin ω)) dω`.
//!
//! Note that `ψ` decreases from `ψ(1/2) = 1` to `ψ(1-) = 0`.

use std::f64::consts::{FRAC_PI_4, LN_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// `ζ(2) = π²/6`.
pub const ZETA2: f64 = PI * PI / 6.0;

/// Magnitude of the slope of `F` on `[0, 1/2]`: `4√2 ln(1+√2) / (π ζ(2))`.
pub fn f_linear_slope() -> f64 {
    4.0 * SQRT_2 * (1.0 + SQRT_2).ln() / (PI * ZETA2)
}

/// First moment of the limit law of the scaled exit time, `ln 2 / ζ(2)`.
pub fn first_moment() -> f64 {
    LN_2 / ZETA2
}

fn dilog_series(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut power = t;
    let mut n = 1.0f64;
    while power > 1e-18 * n * n {
        sum += power / (n * n);
        power *= t;
        n += 1.0;
    }
    sum
}

/// `Li₂(t) = Σ tⁿ/n²` on `[0, 1]`.
pub fn dilog(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::invalid("t", format!("dilog needs t in [0, 1], got {t}")));
    }
    if t == 1.0 {
        return Ok(ZETA2);
    }
    if t <= 0.5 {
        Ok(dilog_series(t))
    } else {
        // Li₂(t) + Li₂(1-t) = ζ(2) - ln t ln(1-t)
        let s = 1.0 - t;
        Ok(ZETA2 - t.ln() * s.ln() - dilog_series(s))
    }
}

/// `ψ` on `[1/2, 1]`, with `ψ(1) = 0` by continuity.
pub fn psi(x: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&x) {
        return Err(Error::invalid("x", format!("psi needs x in [1/2, 1], got {x}")));
    }
    Ok(psi_unchecked(x))
}

fn psi_unchecked(x: f64) -> f64 {
    if x >= 1.0 {
        return 0.0;
    }
    let r = (1.0 - x) / x;
    r * (1.0 - r.ln())
}

/// `∫_t^1 ψ` for `t ∈ [1/2, 1]` in closed form. The dilogarithm identity is
/// applied in its reflected form, which avoids cancellation as `t → 1`.
pub fn psi_tail_integral(t: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&t) {
        return Err(Error::invalid("t", format!("need t in [1/2, 1], got {t}")));
    }
    if t == 1.0 {
        return Ok(0.0);
    }
    let s = 1.0 - t;
    let (lt, ls) = (t.ln(), s.ln());
    // ζ(2) - Li₂(t) = ln t ln(1-t) + Li₂(1-t)
    Ok(lt * ls + dilog(s)? - 0.5 * lt * lt + s * (ls - lt - 1.0))
}

/// Limit tail `H(t)` of the scaled exit time.
pub fn h_limit(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", format!("H needs t > 0, got {t}")));
    }
    Ok(h_limit_unchecked(t))
}

/// `H` extended by `H(0) = 1`.
pub(crate) fn h_limit_unchecked(t: f64) -> f64 {
    if t < 0.5 {
        1.0 - 2.0 * t / ZETA2
    } else if t < 1.0 {
        2.0 / ZETA2 * psi_tail_integral(t).expect("t in [1/2, 1)")
    } else {
        0.0
    }
}

/// `H(t)` for `t >= 0`, with the right limit `H(0+) = 1` at zero.
pub fn h_limit_closed(t: f64) -> Result<f64> {
    if t == 0.0 {
        Ok(1.0)
    } else {
        h_limit(t)
    }
}

/// Limit density `h = -H'`.
pub fn h_density(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", format!("h needs t > 0, got {t}")));
    }
    Ok(h_density_unchecked(t))
}

fn h_density_unchecked(t: f64) -> f64 {
    if t <= 0.5 {
        2.0 / ZETA2
    } else if t <= 1.0 {
        2.0 / ZETA2 * psi_unchecked(t)
    } else {
        0.0
    }
}

/// Kink angles of `ω ↦ H(t / (cos ω + sin ω))` in `(0, π/4)`.
fn f_breaks(t: f64) -> Vec<f64> {
    [2.0 * t, t]
        .iter()
        .filter_map(|&v| {
            let s = v / SQRT_2;
            (s <= 1.0).then(|| s.asin() - FRAC_PI_4)
        })
        .filter(|w| *w > 0.0 && *w < FRAC_PI_4)
        .collect()
}

/// Closed-form evaluators plus the quadrature-based ones, all sharing one
/// quadrature configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    pub quadrature: Quadrature,
}

impl LimitLaw {
    pub fn new(quadrature: Quadrature) -> Self {
        LimitLaw { quadrature }
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        psi(x)
    }

    pub fn dilog(&self, t: f64) -> Result<f64> {
        dilog(t)
    }

    pub fn h_limit(&self, t: f64) -> Result<f64> {
        h_limit(t)
    }

    pub fn h_density(&self, t: f64) -> Result<f64> {
        h_density(t)
    }

    /// `∫_t^1 ψ` by quadrature.
    pub fn psi_tail_quadrature(&self, t: f64) -> Result<f64> {
        if !(0.5..=1.0).contains(&t) {
            return Err(Error::invalid("t", format!("need t in [1/2, 1], got {t}")));
        }
        self.quadrature.integrate(psi_unchecked, t, 1.0, &[])
    }

    /// Limit tail `F(t)` of the scaled collision count, integrating over `[0, π/4]`.
    pub fn f_limit(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid("t", format!("F needs t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        if t >= SQRT_2 {
            return Ok(0.0);
        }
        let g = |w: f64| h_limit_unchecked(t / (w.cos() + w.sin()));
        let v = self.quadrature.integrate(g, 0.0, FRAC_PI_4, &f_breaks(t))?;
        Ok(v / FRAC_PI_4)
    }

    /// The same tail written as `4/π ∫_{π/4}^{π/2} H(t / (√2 sin ω)) dω`.
    pub fn f_limit_alt(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid("t", format!("F needs t >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        if t >= SQRT_2 {
            return Ok(0.0);
        }
        let g = |w: f64| h_limit_unchecked(t / (SQRT_2 * w.sin()));
        let breaks: Vec<f64> = [2.0 * t, t]
            .iter()
            .filter_map(|&v| {
                let s = v / SQRT_2;
                (s <= 1.0).then(|| s.asin())
            })
            .collect();
        let v = self
            .quadrature
            .integrate(g, FRAC_PI_4, 2.0 * FRAC_PI_4, &breaks)?;
        Ok(v / FRAC_PI_4)
    }

    /// `c_r`, the `r`-th moment of the limit law of the scaled exit time,
    /// from its integral representation over `[0, 1/2]`.
    pub fn moment_c(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid("r", format!("need r > 0, got {r}")));
        }
        let integrand = |x: f64| {
            let l = (-x).ln_1p();
            // 1 - (1-x)^k without cancellation near x = 0
            let one_minus = |k: f64| -(k * l).exp_m1();
            let d = x * (1.0 - x);
            x.powf(r) + x * (1.0 - x).powf(r - 1.0) + one_minus(r) / (r * d)
                - one_minus(r + 1.0) / ((r + 1.0) * d)
        };
        let v = self.quadrature.integrate(integrand, 0.0, 0.5, &[])?;
        Ok(2.0 / ZETA2 * v)
    }

    /// `∫_0^1 t^r h(t) dt` by quadrature of the density.
    pub fn moment_from_density(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::invalid("r", format!("need r > 0, got {r}")));
        }
        let flat = 0.5f64.powf(r + 1.0) / (r + 1.0);
        let curved = self
            .quadrature
            .integrate(|t| t.powf(r) * psi_unchecked(t), 0.5, 1.0, &[])?;
        Ok(2.0 / ZETA2 * (flat + curved))
    }

    /// Residuals of the identities tying the limit objects together.
    pub fn identity_suite(&self) -> Result<IdentityReport> {
        let mut entries = Vec::new();
        let mut push = |name: String, lhs: f64, rhs: f64| {
            entries.push(Residual {
                name,
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
            })
        };

        push(
            "dilog(1/2) = pi^2/12 - ln^2(2)/2".into(),
            dilog(0.5)?,
            PI * PI / 12.0 - 0.5 * LN_2 * LN_2,
        );
        push(
            "int_{1/2}^1 psi = (zeta(2) - 1)/2".into(),
            self.psi_tail_quadrature(0.5)?,
            0.5 * (ZETA2 - 1.0),
        );
        for k in 0..20 {
            let t = 0.5 + (k as f64 + 0.5) / 40.0;
            let lt = t.ln();
            let closed = dilog(1.0)? - dilog(t)? - 0.5 * lt * lt
                + (1.0 - t) * (((1.0 - t) / t).ln() - 1.0);
            push(
                format!("int_t^1 psi closed form at t = {t}"),
                self.psi_tail_quadrature(t)?,
                closed,
            );
        }
        let mass = self
            .quadrature
            .integrate(h_density_unchecked, 0.0, 1.0, &[0.5])?;
        push("int_0^1 h = 1".into(), mass, 1.0);
        push(
            "H continuous at 1/2".into(),
            1.0 - 2.0 * 0.5 / ZETA2,
            2.0 / ZETA2 * psi_tail_integral(0.5)?,
        );
        Ok(IdentityReport { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub entries: Vec<Residual>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }
}
