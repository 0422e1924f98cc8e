//! Farey fractions of a given order and the neighbor structure around them.
//!
//! Everything here is exact integer arithmetic. Consecutive fractions
//! `a/q < a'/q'` of order `Q` satisfy `a'q - aq' = 1` and `q + q' > Q`, and
//! the neighbor denominators of an interior fraction are determined by the
//! inverse `ā` of `a` modulo `q`:
//!
//! ```text
//! q'  = q * floor((Q - ā) / q) + ā      (left neighbor)
//! q'' = q * floor((Q + ā) / q) - ā      (right neighbor)
//! ```

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// An irreducible fraction `a/q` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    a: u64,
    q: u64,
}

impl Fraction {
    pub const ZERO: Fraction = Fraction { a: 0, q: 1 };
    pub const ONE: Fraction = Fraction { a: 1, q: 1 };

    pub fn new(a: u64, q: u64) -> Result<Self> {
        if q == 0 || a > q {
            return Err(Error::NotInUnitInterval { a, q });
        }
        if gcd(a, q) != 1 {
            return Err(Error::NotCoprime { a, q });
        }
        Ok(Fraction { a, q })
    }

    /// Callers must guarantee `gcd(a, q) = 1` and `a <= q`.
    pub(crate) const fn new_unchecked(a: u64, q: u64) -> Self {
        Fraction { a, q }
    }

    #[inline]
    pub fn numerator(&self) -> u64 {
        self.a
    }

    #[inline]
    pub fn denominator(&self) -> u64 {
        self.q
    }

    /// `0/1` or `1/1`.
    pub fn is_boundary(&self) -> bool {
        self.q == 1
    }

    pub fn to_f64(&self) -> f64 {
        self.a as f64 / self.q as f64
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.a as u128 * other.q as u128).cmp(&(other.a as u128 * self.q as u128))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.a, self.q)
    }
}

/// Inverse of `a` modulo `q`, in `[1, q - 1]`.
pub fn mod_inverse(a: u64, q: u64) -> Result<u64> {
    if q < 2 || a == 0 || a >= q {
        return Err(Error::invalid(
            "a",
            format!("need 1 <= a <= q - 1 and q >= 2, got a = {a}, q = {q}"),
        ));
    }
    // extended Euclid on (a, q), tracking only the coefficient of a
    let (mut r0, mut r1) = (q as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    if r0 != 1 {
        return Err(Error::NotCoprime { a, q });
    }
    Ok(s0.rem_euclid(q as i128) as u64)
}

/// Closed subinterval `[lo, hi]` of `[0, 1]`. Both endpoints are inclusive;
/// a fraction `a/q` belongs to it when `lo <= a as f64 / q as f64 <= hi`,
/// which is exact for endpoints written as decimal literals of the same value.
/// `lo > hi` is allowed and denotes the empty interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitInterval {
    pub lo: f64,
    pub hi: f64,
}

impl UnitInterval {
    pub const FULL: UnitInterval = UnitInterval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi > 1.0 {
            return Err(Error::invalid(
                "interval",
                format!("[{lo}, {hi}] is not inside [0, 1]"),
            ));
        }
        Ok(UnitInterval { lo, hi })
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, frac: Fraction) -> bool {
        let v = frac.to_f64();
        self.lo <= v && v <= self.hi
    }

    pub fn contains_slope(&self, s: f64) -> bool {
        self.lo <= s && s <= self.hi
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    /// `c_I`: the angle subtended by the slopes in the interval.
    pub fn angle(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi.atan() - self.lo.atan()
        }
    }
}

impl Default for UnitInterval {
    fn default() -> Self {
        Self::FULL
    }
}

fn check_order(order: u64) -> Result<()> {
    if order == 0 {
        return Err(Error::invalid("order", "the Farey order must be >= 1"));
    }
    Ok(())
}

/// Smallest fraction of order `order` that is `>= lo`.
fn first_at_or_above(order: u64, lo: f64) -> Fraction {
    if lo <= 0.0 {
        return Fraction::ZERO;
    }
    let mut best = Fraction::ONE;
    for q in 1..=order {
        let qf = q as f64;
        let mut a = (lo * qf).ceil().min(qf) as u64;
        while a > 0 && (a - 1) as f64 / qf >= lo {
            a -= 1;
        }
        while a < q && (a as f64 / qf) < lo {
            a += 1;
        }
        if (a as f64 / qf) < lo {
            continue;
        }
        let cand = Fraction::new_unchecked(a, q);
        // ties keep the smaller denominator, which is the reduced form
        if cand < best {
            best = cand;
        }
    }
    best
}

/// Successor of `frac` in the Farey sequence of order `order`, or `None` at `1/1`.
pub fn successor(frac: Fraction, order: u64) -> Option<Fraction> {
    let (a, q) = (frac.a, frac.q);
    if q == 1 {
        return if a == 0 {
            Some(Fraction::new_unchecked(1, order))
        } else {
            None
        };
    }
    let abar = mod_inverse(a, q).ok()?;
    let q2 = q * ((order + abar) / q) - abar;
    let a2 = (a * q2 + 1) / q;
    Some(Fraction::new_unchecked(a2, q2))
}

/// Predecessor of `frac` in the Farey sequence of order `order`, or `None` at `0/1`.
pub fn predecessor(frac: Fraction, order: u64) -> Option<Fraction> {
    let (a, q) = (frac.a, frac.q);
    if q == 1 {
        return if a == 1 {
            Some(Fraction::new_unchecked(order - 1, order))
        } else {
            None
        };
    }
    let abar = mod_inverse(a, q).ok()?;
    let q1 = q * ((order - abar) / q) + abar;
    let a1 = (a * q1 - 1) / q;
    Some(Fraction::new_unchecked(a1, q1))
}

/// Streams the Farey fractions of a given order inside an interval, ascending.
#[derive(Debug, Clone)]
pub struct FareyIter {
    order: u64,
    hi: f64,
    prev: Option<Fraction>,
    next: Option<Fraction>,
}

impl FareyIter {
    pub fn new(order: u64, interval: UnitInterval) -> Result<Self> {
        check_order(order)?;
        let next = if interval.is_empty() {
            None
        } else {
            Some(first_at_or_above(order, interval.lo)).filter(|f| interval.contains(*f))
        };
        Ok(FareyIter {
            order,
            hi: interval.hi,
            prev: None,
            next,
        })
    }
}

impl Iterator for FareyIter {
    type Item = Fraction;

    fn next(&mut self) -> Option<Fraction> {
        let cur = self.next?;
        let after = match self.prev {
            None => successor(cur, self.order),
            Some(p) => {
                if cur == Fraction::ONE {
                    None
                } else {
                    // next-term recurrence for consecutive p < cur
                    let k = (self.order + p.q) / cur.q;
                    Some(Fraction::new_unchecked(k * cur.a - p.a, k * cur.q - p.q))
                }
            }
        };
        self.prev = Some(cur);
        self.next = after.filter(|f| f.to_f64() <= self.hi);
        Some(cur)
    }
}

/// All Farey fractions of order `order` inside `interval`, ascending.
pub fn enumerate_farey(order: u64, interval: UnitInterval) -> Result<Vec<Fraction>> {
    Ok(FareyIter::new(order, interval)?.collect())
}

/// Number of fractions in the Farey sequence of order `order` on `[0, 1]`,
/// `1 + sum_{q <= order} phi(q)`.
pub fn farey_len(order: u64) -> u64 {
    let n = order as usize;
    let mut phi: Vec<u64> = (0..=order).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            for m in (p..=n).step_by(p) {
                phi[m] -= phi[m] / p as u64;
            }
        }
    }
    1 + phi[1..].iter().sum::<u64>()
}

fn check_interior(frac: Fraction, order: u64) -> Result<()> {
    check_order(order)?;
    if frac.q > order {
        return Err(Error::DenominatorTooLarge { q: frac.q, order });
    }
    if frac.is_boundary() {
        return Err(Error::BoundaryFraction {
            a: frac.a,
            q: frac.q,
            order,
        });
    }
    Ok(())
}

/// Denominators `(q', q'')` of the left and right Farey neighbors of an interior fraction.
pub fn neighbor_denominators(frac: Fraction, order: u64) -> Result<(u64, u64)> {
    check_interior(frac, order)?;
    let q = frac.q;
    let abar = mod_inverse(frac.a, q)?;
    let left = q * ((order - abar) / q) + abar;
    let right = q * ((order + abar) / q) - abar;
    Ok((left, right))
}

/// Three consecutive Farey fractions `prev < mid < next`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FareyTriple {
    pub prev: Fraction,
    pub mid: Fraction,
    pub next: Fraction,
}

impl FareyTriple {
    pub fn around(mid: Fraction, order: u64) -> Result<Self> {
        let (q1, q2) = neighbor_denominators(mid, order)?;
        let (a, q) = (mid.a, mid.q);
        Ok(FareyTriple {
            prev: Fraction::new_unchecked((a * q1 - 1) / q, q1),
            mid,
            next: Fraction::new_unchecked((a * q2 + 1) / q, q2),
        })
    }
}

/// Which of the four configurations of `(q', q, q'')` an interior fraction is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    /// `q < min(q', q'')`
    I1,
    /// `q' < q < q''`
    I2,
    /// `q'' < q < q'`
    I3,
    /// `q > max(q', q'')`
    I4,
}

impl Case {
    pub const ALL: [Case; 4] = [Case::I1, Case::I2, Case::I3, Case::I4];

    pub fn as_str(&self) -> &'static str {
        match self {
            Case::I1 => "I1",
            Case::I2 => "I2",
            Case::I3 => "I3",
            Case::I4 => "I4",
        }
    }

    /// Ground-truth classification from the three denominators.
    pub fn from_denominators(q_left: u64, q: u64, q_right: u64) -> Case {
        match (q_left > q, q_right > q) {
            (true, true) => Case::I1,
            (false, true) => Case::I2,
            (true, false) => Case::I3,
            (false, false) => Case::I4,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseTag {
    pub case: Case,
    /// Inverse of the numerator modulo the denominator.
    pub abar: u64,
}

/// The closed ranges `I_q^(1..4)` of `[0, q]` that `ā` is tested against, as
/// `(lo, hi)` pairs; `lo > hi` means empty.
pub fn case_ranges(q: u64, order: u64) -> [(i64, i64); 4] {
    let (q, big) = (q as i64, order as i64);
    [
        ((2 * q - big).max(0), (big - q).min(q)),
        ((2 * q - big).max(big - q), q),
        (0, (2 * q - big - 1).min(big - q)),
        (big - q, 2 * q - big),
    ]
}

/// Classifies an interior fraction by the membership of `ā` in `I_q^(k)`.
/// Where `ā` sits on an endpoint shared by two ranges the neighbor
/// denominators decide.
pub fn classify_case(frac: Fraction, order: u64) -> Result<CaseTag> {
    check_interior(frac, order)?;
    let q = frac.q;
    let abar = mod_inverse(frac.a, q)?;
    let x = abar as i64;
    let ranges = case_ranges(q, order);
    let mut hit = Case::ALL
        .iter()
        .zip(ranges.iter())
        .filter(|(_, (lo, hi))| *lo <= x && x <= *hi)
        .map(|(c, _)| *c);
    let case = match (hit.next(), hit.next()) {
        (Some(c), None) => c,
        _ => {
            let (q1, q2) = neighbor_denominators(frac, order)?;
            Case::from_denominators(q1, q, q2)
        }
    };
    Ok(CaseTag { case, abar })
}
