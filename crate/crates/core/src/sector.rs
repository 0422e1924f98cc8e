//! The vertical-scatterer model: a segment `{q} × [a - 1/Q, a + 1/Q]` at every
//! lattice point `(q, a)` with `a/q` a Farey fraction of order `Q`.
//!
//! Every ray from the origin with slope in `[0, 1]` meets one of these
//! segments at some `q <= Q`. The set of slopes whose ray first meets the
//! segment at `(q, a)` is an interval (its sector) whose endpoints are fixed by
//! the neighbor denominators `q'`, `q''`:
//!
//! | case | lower slope          | upper slope          |
//! |------|----------------------|----------------------|
//! | I1   | `(a - 1/Q) / q`      | `(a + 1/Q) / q`      |
//! | I2   | `(a' + 1/Q) / q'`    | `(a + 1/Q) / q`      |
//! | I3   | `(a - 1/Q) / q`      | `(a'' - 1/Q) / q''`  |
//! | I4   | `(a' + 1/Q) / q'`    | `(a'' - 1/Q) / q''`  |
//!
//! `0/1` owns `[0, 1/Q]` and `1/1` owns `[max(1 - 1/Q, 1/Q), 1]`. Adjacent
//! sectors share endpoints, so the widths telescope to the full angle.
//!
//! The asymptotic widths use `γ = a/q` in the factor `1 + γ²`.

use std::cmp::Ordering;
use std::fmt;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::farey::{classify_case, gcd, mod_inverse, Case, CaseTag, FareyIter, FareyTriple, Fraction, UnitInterval};
use crate::lattice::CandidateDenominators;
use crate::limits::ZETA2;
use crate::quadrature::Quadrature;

/// An exact slope `num / den`, where `den` is a denominator times the order `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slope {
    pub num: i64,
    pub den: i64,
}

impl Slope {
    fn scaled(a: u64, q: u64, order: u64, shift: i64) -> Slope {
        Slope {
            num: (a * order) as i64 + shift,
            den: (q * order) as i64,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Ord for Slope {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl PartialOrd for Slope {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `arctan(hi) - arctan(lo)` for exact slopes, clamped at zero. Evaluated as a
/// single arctangent of the exact difference quotient.
pub fn angle_between(lo: Slope, hi: Slope) -> f64 {
    let (ln, ld, hn, hd) = (lo.num as i128, lo.den as i128, hi.num as i128, hi.den as i128);
    let diff = hn * ld - ln * hd;
    if diff <= 0 {
        return 0.0;
    }
    (diff as f64 / (hd * ld + hn * ln) as f64).atan()
}

/// The segment `{q} × [a - h, a + h]` with `h = 1/Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerticalScatterer {
    pub center: Fraction,
    pub order: u64,
}

impl VerticalScatterer {
    pub fn half_height(&self) -> f64 {
        1.0 / self.order as f64
    }
}

/// The first-hit sector of one scatterer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorRecord {
    pub frac: Fraction,
    pub lo: Slope,
    pub hi: Slope,
    pub width_exact: f64,
    pub width_asym: f64,
    /// `None` for the boundary fractions `0/1` and `1/1`.
    pub case: Option<CaseTag>,
}

impl SectorRecord {
    pub fn contains_slope(&self, s: f64) -> bool {
        self.lo.to_f64() <= s && s <= self.hi.to_f64()
    }
}

/// Main term of the asymptotic sector width.
pub fn width_asymptotic(frac: Fraction, order: u64, tag: Option<CaseTag>) -> f64 {
    let (a, q, big) = (frac.numerator() as f64, frac.denominator() as f64, order as f64);
    let g = 1.0 + (a / q) * (a / q);
    match tag {
        None => {
            if frac.numerator() == 0 {
                1.0 / big
            } else {
                1.0 / (2.0 * big)
            }
        }
        Some(CaseTag { case, abar }) => {
            let abar = abar as f64;
            match case {
                Case::I1 => 2.0 / (big * q * g),
                Case::I2 => (big - q + abar) / (big * q * abar * g),
                Case::I3 => (big - abar) / (big * q * (q - abar) * g),
                Case::I4 => (big - q) / (big * abar * (q - abar) * g),
            }
        }
    }
}

/// Exact first-hit sector of the scatterer at `frac`.
pub fn sector_exact(frac: Fraction, order: u64) -> Result<SectorRecord> {
    if order == 0 {
        return Err(Error::invalid("order", "the Farey order must be >= 1"));
    }
    if frac.denominator() > order {
        return Err(Error::DenominatorTooLarge {
            q: frac.denominator(),
            order,
        });
    }
    let (a, q) = (frac.numerator(), frac.denominator());
    let (lo, hi, case) = if frac.is_boundary() {
        let big = order as i64;
        if a == 0 {
            (Slope { num: 0, den: big }, Slope { num: 1, den: big }, None)
        } else {
            let lo = Slope { num: (big - 1).max(1), den: big };
            (lo, Slope { num: big, den: big }, None)
        }
    } else {
        let tag = classify_case(frac, order)?;
        let t = FareyTriple::around(frac, order)?;
        let below = Slope::scaled(a, q, order, -1);
        let above = Slope::scaled(a, q, order, 1);
        let left = Slope::scaled(t.prev.numerator(), t.prev.denominator(), order, 1);
        let right = Slope::scaled(t.next.numerator(), t.next.denominator(), order, -1);
        let (lo, hi) = match tag.case {
            Case::I1 => (below, above),
            Case::I2 => (left, above),
            Case::I3 => (below, right),
            Case::I4 => (left, right),
        };
        (lo, hi, Some(tag))
    };
    Ok(SectorRecord {
        frac,
        lo,
        hi,
        width_exact: angle_between(lo, hi),
        width_asym: width_asymptotic(frac, order, case),
        case,
    })
}

/// Sectors of every Farey fraction of order `order` in `interval`, ascending.
pub fn sectors(order: u64, interval: UnitInterval, exec: Execution) -> Result<Vec<SectorRecord>> {
    let fracs: Vec<Fraction> = FareyIter::new(order, interval)?.collect();
    exec.map_slice(&fracs, |f| sector_exact(*f, order))
        .into_iter()
        .collect()
}

/// Index of the sector containing slope `s`; a slope on a shared endpoint
/// goes to the lower sector.
pub fn locate_sector(sectors: &[SectorRecord], s: f64) -> Option<usize> {
    let idx = sectors.partition_point(|r| r.hi.to_f64() < s);
    sectors.get(idx).filter(|r| r.contains_slope(s)).map(|_| idx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub order: u64,
    pub interval: UnitInterval,
    pub sectors: usize,
    pub sum_of_widths: f64,
    /// `arctan(hi) - arctan(lo)` of the interval.
    pub expected: f64,
    pub defect: f64,
}

/// Sums the exact sector widths over the Farey fractions in `interval`.
pub fn sector_partition_check(order: u64, interval: UnitInterval) -> Result<PartitionCheck> {
    let mut sum = 0.0;
    let mut count = 0;
    for f in FareyIter::new(order, interval)? {
        sum += sector_exact(f, order)?.width_exact;
        count += 1;
    }
    let expected = interval.angle();
    Ok(PartitionCheck {
        order,
        interval,
        sectors: count,
        sum_of_widths: sum,
        expected,
        defect: (sum - expected).abs(),
    })
}

/// First scatterer of the vertical model met by the ray at angle `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalHit {
    pub target: Fraction,
    /// Length of the ray up to the line `x = q`.
    pub path_length: f64,
    /// Grid lines `x = k` and `y = k` crossed strictly before the hit.
    pub reflections: u64,
}

impl VerticalHit {
    /// `x` coordinate of the hit, which is the target denominator.
    pub fn reach(&self) -> u64 {
        self.target.denominator()
    }
}

/// Number of integers `k >= 1` with `k < y`.
#[inline]
pub(crate) fn crossings_before(y: f64) -> u64 {
    if y <= 0.0 {
        0
    } else {
        (y.ceil() as u64).saturating_sub(1)
    }
}

fn check_octant(omega: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_4).contains(&omega) {
        return Err(Error::invalid(
            "omega",
            format!("angle must lie in [0, pi/4], got {omega}"),
        ));
    }
    Ok(())
}

/// First vertical scatterer of order `order` hit by the ray at angle `omega`.
pub fn first_hit_vertical(omega: f64, order: u64) -> Result<VerticalHit> {
    check_octant(omega)?;
    if order == 0 {
        return Err(Error::invalid("order", "the Farey order must be >= 1"));
    }
    let s = omega.tan().min(1.0);
    let h = 1.0 / order as f64;
    let hit = |q: u64| -> Option<u64> {
        let y = q as f64 * s;
        let lo = y.floor() as u64;
        [lo, lo + 1]
            .into_iter()
            .find(|&a| a <= q && (y - a as f64).abs() <= h)
    };
    let found = CandidateDenominators::new(s, order)
        .find_map(|q| hit(q).map(|a| (q, a)))
        .or_else(|| (1..=order).find_map(|q| hit(q).map(|a| (q, a))));
    let (q, a) = found.ok_or(Error::NoHit { omega, bound: order })?;
    // a non-reduced hit (kq, ka) implies the reduced point is hit earlier
    let d = gcd(a, q);
    let (q, a) = (q / d, a / d);
    let path_length = q as f64 / omega.cos();
    let y = q as f64 * s;
    Ok(VerticalHit {
        target: Fraction::new(a, q)?,
        path_length,
        reflections: (q - 1) + crossings_before(y),
    })
}

/// `S_{I,Q}(t)`: sum of the asymptotic sector widths over fractions in
/// `interval` with denominator `q > tQ`.
pub fn sector_sum_s(t: f64, order: u64, interval: UnitInterval) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", format!("need t > 0, got {t}")));
    }
    let cut = t * order as f64;
    let mut sum = 0.0;
    for f in FareyIter::new(order, interval)? {
        if f.denominator() as f64 > cut {
            let tag = if f.is_boundary() {
                None
            } else {
                Some(classify_case(f, order)?)
            };
            sum += width_asymptotic(f, order, tag);
        }
    }
    Ok(sum)
}

/// The Farey sums whose limits are known in closed form or by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FareySumKind {
    /// `ā ∈ [0, q]`, weight `1/(Qq(1+γ²))`.
    C35i,
    /// `ā ∈ [0, Q-q]`, weight `1/(Qq(1+γ²))`.
    C35iiA,
    /// `ā ∈ [2q-Q, q]`, weight `1/(Qq(1+γ²))`.
    C35iiB,
    /// `ā ∈ [2q-Q, Q-q]`, weight `1/(Qq(1+γ²))`, range inside `(1/2, 2/3]`.
    C35iii,
    /// `ā ∈ (Q-q, q]`, weight `(Q-q)/(Qqā(1+γ²))`.
    C36A,
    /// `ā ∈ [0, 2q-Q)`, weight `(Q-q)/(Qq(q-ā)(1+γ²))`.
    C36B,
}

impl FareySumKind {
    fn t_range(self) -> (f64, f64, bool) {
        // (lower bound, upper bound, lower bound is exclusive of 0-only)
        match self {
            FareySumKind::C35i => (0.0, 1.0, true),
            FareySumKind::C35iii => (0.5, 2.0 / 3.0, true),
            _ => (0.5, 1.0, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FareySumCheck {
    pub kind: FareySumKind,
    pub lhs_sum: f64,
    pub rhs_integral: f64,
}

impl FareySumCheck {
    pub fn abs_diff(&self) -> f64 {
        (self.lhs_sum - self.rhs_integral).abs()
    }

    pub fn rel_diff(&self) -> f64 {
        self.abs_diff() / self.rhs_integral.abs()
    }
}

/// Finite Farey sum over `t1 Q < q <= t2 Q` and its limiting value.
pub fn farey_sum_check(
    kind: FareySumKind,
    t1: f64,
    t2: f64,
    order: u64,
    interval: UnitInterval,
) -> Result<FareySumCheck> {
    let (min, max, _) = kind.t_range();
    if !(t1 > min && t1 <= t2 && t2 <= max) {
        return Err(Error::invalid(
            "t1, t2",
            format!("{kind:?} needs {min} < t1 <= t2 <= {max}, got t1 = {t1}, t2 = {t2}"),
        ));
    }
    if order == 0 {
        return Err(Error::invalid("order", "the Farey order must be >= 1"));
    }
    let c_i = interval.angle();
    let rhs = match kind {
        FareySumKind::C35i => c_i * (t2 - t1) / ZETA2,
        FareySumKind::C35iiA | FareySumKind::C35iiB => {
            c_i / ZETA2 * ((t2 / t1).ln() - (t2 - t1))
        }
        FareySumKind::C35iii => c_i / ZETA2 * (2.0 * (t2 / t1).ln() - 3.0 * (t2 - t1)),
        FareySumKind::C36A | FareySumKind::C36B => {
            let g = |x: f64| (1.0 - x) / x * (x / (1.0 - x)).ln();
            c_i / ZETA2 * Quadrature::default().integrate(g, t1, t2, &[])?
        }
    };

    let big = order as i64;
    let q_lo = (t1 * order as f64).floor() as u64 + 1;
    let q_hi = ((t2 * order as f64).floor() as u64).min(order);
    let mut lhs = 0.0;
    for q in q_lo..=q_hi {
        let qi = q as i64;
        let qf = q as f64;
        for a in 0..=q {
            if gcd(a, q) != 1 || !interval.contains(Fraction::new_unchecked(a, q)) {
                continue;
            }
            let abar = if q == 1 { 0 } else { mod_inverse(a, q)? } as i64;
            let keep = match kind {
                FareySumKind::C35i => true,
                FareySumKind::C35iiA => abar <= big - qi,
                FareySumKind::C35iiB => abar >= 2 * qi - big,
                FareySumKind::C35iii => abar >= 2 * qi - big && abar <= big - qi,
                FareySumKind::C36A => abar > big - qi,
                FareySumKind::C36B => abar < 2 * qi - big,
            };
            if !keep {
                continue;
            }
            let gamma = a as f64 / qf;
            let g = 1.0 + gamma * gamma;
            let bigf = order as f64;
            lhs += match kind {
                FareySumKind::C36A => (bigf - qf) / (bigf * qf * abar as f64 * g),
                FareySumKind::C36B => (bigf - qf) / (bigf * qf * (qf - abar as f64) * g),
                _ => 1.0 / (bigf * qf * g),
            };
        }
    }
    Ok(FareySumCheck {
        kind,
        lhs_sum: lhs,
        rhs_integral: rhs,
    })
}
