//! A quick self-check of the library invariants, sized to finish in seconds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::billiard::{brute_force_exit, first_exit, search_bound, tangent_widths};
use crate::error::Result;
use crate::exec::Execution;
use crate::farey::{case_ranges, enumerate_farey, mod_inverse, neighbor_denominators, Case, UnitInterval};
use crate::limits::LimitLaw;
use crate::sector::{first_hit_vertical, locate_sector, sector_partition_check, sectors};
use crate::stats::{default_t_grid, empirical_h, SampleSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub entries: Vec<CheckEntry>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }
}

/// Tangent half-widths from the tangent lines through the origin, intersected
/// with `x = q`.
pub fn tangent_widths_geometric(q: u64, a: u64, epsilon: f64) -> (f64, f64) {
    let (qf, af) = (q as f64, a as f64);
    let center = af.atan2(qf);
    let half = (epsilon / qf.hypot(af)).asin();
    (qf * (center + half).tan() - af, af - qf * (center - half).tan())
}

/// Counts interior fractions of order `order` whose enumerated neighbors
/// disagree with the neighbor formulas or whose `ā` falls outside the range
/// of the case read off from the neighbors.
pub fn farey_mismatches(order: u64) -> Result<usize> {
    let f = enumerate_farey(order, UnitInterval::FULL)?;
    let mut bad = 0;
    for w in f.windows(3) {
        let (prev, mid, next) = (w[0], w[1], w[2]);
        let q = mid.denominator();
        let (ql, qr) = neighbor_denominators(mid, order)?;
        let adjacent = prev.denominator() * mid.numerator() == prev.numerator() * q + 1
            && mid.denominator() * next.numerator() == mid.numerator() * next.denominator() + 1;
        if !adjacent || ql != prev.denominator() || qr != next.denominator() {
            bad += 1;
            continue;
        }
        let case = Case::from_denominators(ql, q, qr);
        let idx = Case::ALL.iter().position(|c| *c == case).expect("listed");
        let abar = mod_inverse(mid.numerator(), q)? as i64;
        let (lo, hi) = case_ranges(q, order)[idx];
        if !(lo <= abar && abar <= hi) {
            bad += 1;
        }
    }
    Ok(bad)
}

fn entry(name: &str, passed: bool, detail: String) -> CheckEntry {
    CheckEntry {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn run_suite(exec: Execution) -> Result<CheckReport> {
    let mut entries = Vec::new();

    let identities = LimitLaw::default().identity_suite()?;
    let worst = identities.max_residual();
    entries.push(entry(
        "limit-law identities",
        worst < 1e-9,
        format!("max residual {worst:.3e} over {} identities", identities.entries.len()),
    ));

    let mut bad = 0;
    for order in 1..=150 {
        bad += farey_mismatches(order)?;
    }
    entries.push(entry(
        "Farey neighbors and case ranges",
        bad == 0,
        format!("{bad} mismatches for orders up to 150"),
    ));

    let mut worst: f64 = 0.0;
    for order in [1, 2, 10, 100, 500] {
        worst = worst.max(sector_partition_check(order, UnitInterval::FULL)?.defect);
    }
    entries.push(entry(
        "sector partition",
        worst < 1e-10,
        format!("max defect {worst:.3e}"),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut misses = 0;
    for order in [10u64, 50, 200] {
        let all = sectors(order, UnitInterval::FULL, exec)?;
        for _ in 0..2000 {
            let w = rng.random_range(0.0..FRAC_PI_4);
            let hit = first_hit_vertical(w, order)?;
            if locate_sector(&all, w.tan()).map(|i| all[i].frac) != Some(hit.target) {
                misses += 1;
            }
        }
    }
    entries.push(entry(
        "vertical first hit lies in its sector",
        misses == 0,
        format!("{misses} mismatches in 6000 angles"),
    ));

    let mut disagree = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let w = rng.random_range(0.0..=FRAC_PI_4);
        let e = rng.random_range(1e-3..=1e-1);
        let fast = first_exit(w, e)?;
        let slow = brute_force_exit(w, e, search_bound(e))?;
        if fast.target != slow.target {
            disagree += 1;
        }
        worst = worst.max((fast.tau - slow.tau).abs());
    }
    entries.push(entry(
        "first exit matches exhaustive scan",
        disagree == 0 && worst < 1e-12,
        format!("{disagree} target mismatches, max |dtau| {worst:.3e}"),
    ));

    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let q = rng.random_range(1..=1000u64);
        let a = rng.random_range(0..=q);
        let e = rng.random_range(1e-6..0.5);
        let w = tangent_widths(q, a, e)?;
        let (plus, minus) = tangent_widths_geometric(q, a, e);
        worst = worst.max((w.eps_plus - plus).abs()).max((w.eps_minus - minus).abs());
    }
    entries.push(entry(
        "tangent widths match tangent construction",
        worst < 1e-12,
        format!("max deviation {worst:.3e}"),
    ));

    let h = empirical_h(0.01, &SampleSpec::midpoint(20_000), &default_t_grid(), exec)?;
    let monotone = h.values.windows(2).all(|w| w[1] <= w[0]);
    let bounded = h.values.iter().all(|v| (0.0..=1.0).contains(v));
    entries.push(entry(
        "empirical tail is monotone and bounded",
        monotone && bounded && h.values[0] == 1.0,
        format!("value at t = 0 is {}", h.values[0]),
    ));

    Ok(CheckReport { entries })
}
