//! Circular scatterers of radius `ε` at every nonzero lattice point.
//!
//! The ray leaves the origin at angle `ω ∈ [0, π/4]`. Unfolding the square
//! table turns the billiard trajectory into this straight ray, so the first
//! exit time is the distance to the first disk it enters and the number of
//! cushion collisions is the number of grid lines crossed before that.
//! Other directions reduce to this octant by the dihedral symmetries of the
//! square.
//!
//! The disk at `(q, a)` is hit iff `|a cos ω - q sin ω| <= ε`, i.e. iff
//! `|q tan ω - a| <= ε / cos ω`. The first hit therefore has the smallest `q`
//! with `‖q tan ω‖ <= ε / cos ω`, which is a best approximation denominator of
//! `tan ω`; [`first_exit`] only inspects those.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey::Fraction;
use crate::lattice::CandidateDenominators;
use crate::sector::crossings_before;

/// Slack on the closed-disk hit test.
pub const HIT_TOLERANCE: f64 = 1e-12;

/// Above this radius the candidate walk is skipped in favor of a plain scan.
const CANDIDATE_MAX_EPSILON: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitRecord {
    pub omega: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub reflections: u64,
    /// Center of the disk hit, `(q, a)` stored as `a/q`.
    pub target: Fraction,
    pub hit_point: (f64, f64),
}

impl ExitRecord {
    pub fn scaled_tau(&self) -> f64 {
        self.epsilon * self.tau
    }

    pub fn scaled_reflections(&self) -> f64 {
        self.epsilon * self.reflections as f64
    }
}

fn check_inputs(omega: f64, epsilon: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_4).contains(&omega) {
        return Err(Error::invalid(
            "omega",
            format!("angle must lie in [0, pi/4], got {omega}"),
        ));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid(
            "epsilon",
            format!("radius must lie in (0, 1/2), got {epsilon}"),
        ));
    }
    Ok(())
}

/// `⌈1/ε⌉ + 2`; some disk with `q` up to this bound always meets the ray.
pub fn search_bound(epsilon: f64) -> u64 {
    (1.0 / epsilon).ceil() as u64 + 2
}

#[derive(Debug, Clone, Copy)]
struct Ray {
    cos: f64,
    sin: f64,
    epsilon: f64,
}

impl Ray {
    fn new(omega: f64, epsilon: f64) -> Self {
        Ray {
            cos: omega.cos(),
            sin: omega.sin(),
            epsilon,
        }
    }

    /// Entry parameter into the disk at `(q, a)`, if the ray meets it.
    #[inline]
    fn entry(&self, q: u64, a: u64) -> Option<f64> {
        let (x, y) = (q as f64, a as f64);
        let d = (y * self.cos - x * self.sin).abs();
        if d > self.epsilon + HIT_TOLERANCE {
            return None;
        }
        let along = x * self.cos + y * self.sin;
        Some(along - (self.epsilon * self.epsilon - d * d).max(0.0).sqrt())
    }

    /// Earliest entry among the points in column `q` near the ray.
    fn column(&self, q: u64, a_lo: u64, a_hi: u64) -> Option<(f64, u64)> {
        (a_lo..=a_hi.min(q))
            .filter_map(|a| self.entry(q, a).map(|t| (t, a)))
            .min_by(|x, y| x.0.total_cmp(&y.0))
    }

    fn band(&self, q: u64) -> (u64, u64) {
        let y = q as f64 * (self.sin / self.cos);
        let f = y.floor() as u64;
        (f.saturating_sub(1), f + 2)
    }

    fn record(&self, omega: f64, tau: f64, q: u64, a: u64) -> Result<ExitRecord> {
        let (x, y) = (tau * self.cos, tau * self.sin);
        Ok(ExitRecord {
            omega,
            epsilon: self.epsilon,
            tau,
            reflections: crossings_before(x) + crossings_before(y),
            target: Fraction::new(a, q)?,
            hit_point: (x, y),
        })
    }

    /// Best entry among columns `q_lo..=q_hi`, ties to the smaller `q`.
    fn best_in(&self, q_lo: u64, q_hi: u64) -> Option<(f64, u64, u64)> {
        let mut best: Option<(f64, u64, u64)> = None;
        for q in q_lo..=q_hi {
            let (lo, hi) = self.band(q);
            if let Some((t, a)) = self.column(q, lo, hi) {
                if best.is_none_or(|b| t < b.0) {
                    best = Some((t, q, a));
                }
            }
        }
        best
    }
}

/// First disk met by the ray at angle `omega` among disks of radius `epsilon`.
pub fn first_exit(omega: f64, epsilon: f64) -> Result<ExitRecord> {
    check_inputs(omega, epsilon)?;
    let ray = Ray::new(omega, epsilon);
    let bound = search_bound(epsilon);
    let s = (omega.tan()).min(1.0);
    let first = if epsilon <= CANDIDATE_MAX_EPSILON {
        CandidateDenominators::new(s, bound).find(|&q| {
            let (lo, hi) = ray.band(q);
            ray.column(q, lo, hi).is_some()
        })
    } else {
        None
    };
    let first = match first {
        Some(q) => Some(q),
        None => (1..=bound).find(|&q| {
            let (lo, hi) = ray.band(q);
            ray.column(q, lo, hi).is_some()
        }),
    };
    let q0 = first.ok_or(Error::NoHit { omega, bound })?;
    // along-ray positions of hits in later columns are at least 1 - 2ε further
    // out, so only the next couple of columns can still compete for large ε
    let (tau, q, a) = ray
        .best_in(q0, q0 + 2)
        .expect("column q0 contains a hit");
    ray.record(omega, tau, q, a)
}

/// [`first_exit`] by scanning every column up to `q_max`. Within a column only
/// `a` in `[⌊q tan ω⌋ - 1, ⌊q tan ω⌋ + 2]` is tested; every other point is at
/// perpendicular distance at least `cos ω >= 1/√2` from the ray.
pub fn brute_force_exit(omega: f64, epsilon: f64, q_max: u64) -> Result<ExitRecord> {
    check_inputs(omega, epsilon)?;
    let ray = Ray::new(omega, epsilon);
    let (tau, q, a) = ray.best_in(1, q_max).ok_or(Error::NoHit {
        omega,
        bound: q_max,
    })?;
    ray.record(omega, tau, q, a)
}

/// Vertical half-extents at `x = q` of the cone of rays from the origin that
/// meet the disk of radius `ε` at `(q, a)`: the cone spans
/// `[a - eps_minus, a + eps_plus]` on that line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentWidths {
    pub eps_plus: f64,
    pub eps_minus: f64,
}

/// Solves `ε = ε_± q / √(q² + (a ± ε_±)²)`, the distance from `(q, a)` to the
/// line through the origin and `(q, a ± ε_±)`:
///
/// ```text
/// ε_± = (ε q √(q² + a² - ε²) ± a ε²) / (q² - ε²) = ε / cos(arctan(a/q)) + O(ε²/q)
/// ```
pub fn tangent_widths(q: u64, a: u64, epsilon: f64) -> Result<TangentWidths> {
    if q == 0 || a > q {
        return Err(Error::invalid(
            "q, a",
            format!("need q >= 1 and 0 <= a <= q, got q = {q}, a = {a}"),
        ));
    }
    if !(epsilon > 0.0) || epsilon >= q as f64 {
        return Err(Error::invalid(
            "epsilon",
            format!("need 0 < epsilon < q, got {epsilon}"),
        ));
    }
    let (qf, af, e) = (q as f64, a as f64, epsilon);
    let den = qf * qf - e * e;
    let root = e * qf * (qf * qf + af * af - e * e).sqrt() / den;
    let shift = af * e * e / den;
    Ok(TangentWidths {
        eps_plus: root + shift,
        eps_minus: root - shift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end.0 - self.start.0).hypot(self.end.1 - self.start.1)
    }

    pub fn direction(&self) -> (f64, f64) {
        let len = self.length();
        ((self.end.0 - self.start.0) / len, (self.end.1 - self.start.1) / len)
    }
}

/// The billiard path on the unit table, one segment per straight piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldedTrajectory {
    pub segments: Vec<Segment>,
    pub total_length: f64,
}

/// `x` reflected into `[0, 1]`: the triangle wave with period 2.
#[inline]
pub fn fold(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    if r > 1.0 {
        2.0 - r
    } else {
        r
    }
}

/// Folds the unfolded ray of `record` back onto the unit table. A pass
/// through a grid corner produces a zero-length segment between the two
/// reflections, so there is always one segment more than reflections.
pub fn fold_trajectory(record: &ExitRecord) -> FoldedTrajectory {
    let (c, s) = (record.omega.cos(), record.omega.sin());
    let (hx, hy) = record.hit_point;
    let mut breaks: Vec<f64> = Vec::with_capacity(record.reflections as usize + 2);
    breaks.push(0.0);
    breaks.extend((1..=crossings_before(hx)).map(|k| k as f64 / c));
    breaks.extend((1..=crossings_before(hy)).map(|k| k as f64 / s));
    breaks[1..].sort_by(f64::total_cmp);
    breaks.push(record.tau);

    let point = |t: f64| -> (f64, f64) { (fold(t * c), fold(t * s)) };
    let segments: Vec<Segment> = breaks
        .windows(2)
        .map(|w| Segment {
            start: point(w[0]),
            end: point(w[1]),
        })
        .collect();
    FoldedTrajectory {
        segments,
        total_length: record.tau,
    }
}

/// Vertical-model orders bracketing the disk model on `[omega0, omega1]`:
/// `Q⁻ = ⌊cos ω₁ / (ε + ε^{3/2})⌋` and `Q⁺ = ⌈cos ω₀ / (ε - ε^{3/2})⌉`.
///
/// On that range `1/Q⁺ <= ε_±(q, a) <= 1/Q⁻` for the relevant disks, so the
/// vertical segments of half-height `1/Q⁻` are hit no later than the disks and
/// those of half-height `1/Q⁺` no earlier, up to a bounded slack.
pub fn bracketing_orders(epsilon: f64, omega0: f64, omega1: f64) -> Result<(u64, u64)> {
    if !(0.0 <= omega0 && omega0 <= omega1 && omega1 <= FRAC_PI_4) {
        return Err(Error::invalid(
            "omega0, omega1",
            format!("need 0 <= omega0 <= omega1 <= pi/4, got {omega0}, {omega1}"),
        ));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid("epsilon", format!("need 0 < epsilon < 1, got {epsilon}")));
    }
    let e32 = epsilon * epsilon.sqrt();
    let lower = (omega1.cos() / (epsilon + e32)).floor() as u64;
    let upper = (omega0.cos() / (epsilon - e32)).ceil() as u64;
    Ok((lower.max(1), upper.max(1)))
}
