//! Geometric invariants of the two scatterer models, checked against
//! independent brute-force constructions.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_4, SQRT_2};

use billiard_core::billiard::{first_exit, fold_trajectory, tangent_widths, ExitRecord};
use billiard_core::farey::{enumerate_farey, gcd, Fraction};
use billiard_core::sector::{
    first_hit_vertical, locate_sector, sector_partition_check, sector_sum_s, sectors, Slope,
};
use billiard_core::stats::{default_t_grid, empirical_h_vertical, sandwich, SampleSpec};
use billiard_core::{Execution, UnitInterval};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every lattice point `(q, a)` with `1 <= q <= q_max` and `0 <= a <= q`,
/// keeping the smallest entry parameter into its disk.
fn scan_disks(omega: f64, epsilon: f64, q_max: u64) -> (f64, u64, u64) {
    let (c, s) = (omega.cos(), omega.sin());
    let mut best = (f64::INFINITY, 0, 0);
    for q in 1..=q_max {
        for a in 0..=q {
            let (x, y) = (q as f64, a as f64);
            let d = (y * c - x * s).abs();
            if d <= epsilon + 1e-12 {
                let t = x * c + y * s - (epsilon * epsilon - d * d).max(0.0).sqrt();
                if t < best.0 {
                    best = (t, q, a);
                }
            }
        }
    }
    best
}

fn check_record(r: &ExitRecord) {
    let (q, a) = (r.target.denominator() as f64, r.target.numerator() as f64);
    let (hx, hy) = r.hit_point;
    // coordinates near 1e4 carry rounding of order 1e-12 themselves
    let tol = 1e-12 * r.tau.max(1.0);
    assert!(((hx - q).hypot(hy - a) - r.epsilon).abs() < tol, "{r:?}");
    assert!((hx - r.tau * r.omega.cos()).abs() < tol);
    assert!((hy - r.tau * r.omega.sin()).abs() < tol);
    assert!(r.scaled_tau() <= SQRT_2 + 2.0 * r.epsilon);
    assert!(r.scaled_reflections() <= SQRT_2 + 2.0 * r.epsilon);
    let drift = r.reflections as f64 - r.tau * (r.omega.cos() + r.omega.sin());
    assert!(drift.abs() <= 2.0, "{r:?}: {drift}");
}

#[test]
fn first_exit_matches_full_lattice_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..3000 {
        let w = rng.random_range(0.0..=FRAC_PI_4);
        let e = rng.random_range(0.02..0.49);
        let r = first_exit(w, e).unwrap();
        let (t, q, a) = scan_disks(w, e, (1.0 / e).ceil() as u64 + 2);
        assert_eq!((r.target.denominator(), r.target.numerator()), (q, a), "w = {w}, e = {e}");
        assert!((r.tau - t).abs() < 1e-12);
        check_record(&r);
    }
}

#[test]
fn exit_invariants_on_small_radii() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..50_000 {
        let w = rng.random_range(0.0..=FRAC_PI_4);
        let e = 10f64.powf(rng.random_range(-5.0..-1.0));
        let r = first_exit(w, e).unwrap();
        check_record(&r);
        worst = worst.max((r.reflections as f64 - r.tau * (w.cos() + w.sin())).abs());
    }
    // the drift regularly exceeds 1, so a bound of 1 would not hold
    assert!(worst > 1.0, "{worst}");
}

#[test]
fn exit_time_is_nonincreasing_in_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let radii: Vec<f64> = (0..40).map(|k| 0.45 * 0.8f64.powi(k)).collect();
    for _ in 0..2000 {
        let w = rng.random_range(0.0..=FRAC_PI_4);
        let taus: Vec<f64> = radii.iter().map(|&e| first_exit(w, e).unwrap().tau).collect();
        for pair in taus.windows(2) {
            assert!(pair[0] <= pair[1] + 1e-12, "w = {w}: {taus:?}");
        }
    }
}

#[test]
fn diagonal_and_axis_launches() {
    let r = first_exit(FRAC_PI_4, 1e-3).unwrap();
    assert_eq!(r.target, Fraction::ONE);
    assert_eq!(r.reflections, 0);
    let r = first_exit(0.0, 0.3).unwrap();
    assert!((r.tau - 0.7).abs() < 1e-15);
}

#[test]
fn folded_trajectory_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5000 {
        let w = rng.random_range(0.0..=FRAC_PI_4);
        let e = 10f64.powf(rng.random_range(-3.0..-0.5));
        let r = first_exit(w, e).unwrap();
        let f = fold_trajectory(&r);
        assert_eq!(f.segments.len() as u64, r.reflections + 1);
        let total: f64 = f.segments.iter().map(|s| s.length()).sum();
        assert!((total - r.tau).abs() < 1e-9 * r.tau.max(1.0), "{total} vs {}", r.tau);
        assert_eq!(f.total_length, r.tau);
        assert_eq!(f.segments[0].start, (0.0, 0.0));
        for s in &f.segments {
            for p in [s.start, s.end] {
                assert!((-1e-9..=1.0 + 1e-9).contains(&p.0) && (-1e-9..=1.0 + 1e-9).contains(&p.1));
            }
        }
        let moving: Vec<_> = f.segments.iter().filter(|s| s.length() > 1e-9).collect();
        for pair in f.segments.windows(2) {
            let gap = (pair[0].end.0 - pair[1].start.0).hypot(pair[0].end.1 - pair[1].start.1);
            assert!(gap < 1e-9);
        }
        for s in &moving {
            // unfolding: every piece is the ray direction up to sign flips
            let (dx, dy) = s.direction();
            assert!((dx.abs() - w.cos()).abs() < 1e-6 && (dy.abs() - w.sin()).abs() < 1e-6);
        }
        for pair in moving.windows(2) {
            let (a, b) = (pair[0].direction(), pair[1].direction());
            let flips = usize::from(a.0.signum() != b.0.signum() && a.0.abs() > 1e-9)
                + usize::from(a.1.signum() != b.1.signum() && a.1.abs() > 1e-9);
            assert!((1..=2).contains(&flips));
        }
    }
}

#[test]
fn tangent_widths_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20_000 {
        let q = rng.random_range(1..=2000u64);
        let a = rng.random_range(0..=q);
        let e = 10f64.powf(rng.random_range(-6.0..-0.4));
        let t = tangent_widths(q, a, e).unwrap();
        assert!(t.eps_plus > 0.0 && t.eps_minus > 0.0);
        assert!(t.eps_plus >= t.eps_minus);
        let lead = e * (q as f64).hypot(a as f64) / q as f64;
        for v in [t.eps_plus, t.eps_minus] {
            assert!((v - lead).abs() <= 2.0 * e * e / q as f64 + 1e-15, "({q}, {a}, {e})");
        }
    }
}

#[test]
fn pointwise_sandwich_by_vertical_models() {
    for (lo, hi) in [(0.0, 0.05), (0.3, 0.34), (0.6, 0.63), (0.95, 1.0)] {
        let spec = SampleSpec::midpoint(20_000).with_interval(UnitInterval::new(lo, hi).unwrap());
        let r = sandwich(1e-3, &spec, &default_t_grid(), Execution::Parallel).unwrap();
        assert!(r.bracketed(), "[{lo}, {hi}]: {} violations", r.pointwise_violations);
    }
}

#[test]
fn partition_for_every_order_up_to_500() {
    for order in 1..=500 {
        let c = sector_partition_check(order, UnitInterval::FULL).unwrap();
        assert!(c.defect < 1e-10, "Q = {order}: {}", c.defect);
    }
    let iv = UnitInterval::new(0.2, 0.7).unwrap();
    for order in [50, 200] {
        let c = sector_partition_check(order, iv).unwrap();
        // the sectors of the extreme fractions stick out of the interval
        assert!(c.defect < 2.0 / order as f64);
    }
}

#[test]
fn shadow_ordering_for_consecutive_fractions() {
    for order in 1..=500u64 {
        let big = order as i64;
        let f = enumerate_farey(order, UnitInterval::FULL).unwrap();
        for w in f.windows(2) {
            let (a, q) = (w[0].numerator() as i64, w[0].denominator() as i64);
            let (a2, q2) = (w[1].numerator() as i64, w[1].denominator() as i64);
            let t_a = Slope { num: a * big, den: q * big };
            let t_s = Slope { num: a2 * big - 1, den: q2 * big };
            let t_n = Slope { num: a * big + 1, den: q * big };
            let t_a2 = Slope { num: a2 * big, den: q2 * big };
            assert!(t_a <= t_s && t_s < t_n && t_n <= t_a2, "Q = {order}: {} {}", w[0], w[1]);
        }
    }
}

#[test]
fn vertical_hit_agrees_with_sectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for order in [10u64, 50, 200] {
        let all = sectors(order, UnitInterval::FULL, Execution::Parallel).unwrap();
        for _ in 0..100_000 {
            let w = rng.random_range(0.0..FRAC_PI_4);
            let hit = first_hit_vertical(w, order).unwrap();
            let idx = locate_sector(&all, w.tan()).unwrap();
            assert_eq!(all[idx].frac, hit.target, "Q = {order}, w = {w}");
            assert_eq!(all[idx].frac.cmp(&hit.target), Ordering::Equal);
            assert!((hit.path_length * w.cos() - hit.reach() as f64).abs() < 1e-9);
            let a = hit.target.numerator() as f64;
            assert!((hit.path_length * w.sin() - a).abs() <= 1.0 / order as f64 + 1e-12);
        }
    }
}

#[test]
fn vertical_hit_matches_lattice_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for order in [3u64, 17, 120, 700] {
        let h = 1.0 / order as f64;
        for _ in 0..3000 {
            let w = rng.random_range(0.0..=FRAC_PI_4);
            let s = w.tan();
            let (q, a) = (1..=order)
                .flat_map(|q| (0..=q).map(move |a| (q, a)))
                .find(|&(q, a)| gcd(a, q) == 1 && (q as f64 * s - a as f64).abs() <= h)
                .unwrap();
            let hit = first_hit_vertical(w, order).unwrap();
            assert_eq!(hit.target, Fraction::new(a, q).unwrap(), "Q = {order}, w = {w}");
        }
    }
}

#[test]
fn vertical_reflection_count_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for order in [10u64, 100, 1000] {
        for _ in 0..50_000 {
            let w = rng.random_range(0.0..=FRAC_PI_4);
            let hit = first_hit_vertical(w, order).unwrap();
            let drift = (hit.reflections as f64 - hit.path_length * (w.cos() + w.sin())).abs();
            assert!(drift <= 2.0 + 1.0 / order as f64);
            worst = worst.max(drift);
        }
    }
    println!("largest |R - l (cos w + sin w)| observed: {worst:.4}");
}

#[test]
fn vertical_tail_tracks_asymptotic_sector_sum() {
    let ts = [0.25, 0.4, 0.6, 0.8];
    for order in [250u64, 1000] {
        let v = empirical_h_vertical(order, &SampleSpec::midpoint(400_000), &ts, Execution::Parallel).unwrap();
        let measure = v.angle_measure();
        let mut worst: f64 = 0.0;
        for (t, m) in ts.iter().zip(&measure) {
            let s = sector_sum_s(*t, order, UnitInterval::FULL).unwrap();
            worst = worst.max((m - s).abs());
        }
        assert!(worst < 20.0 / order as f64, "Q = {order}: {worst}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn first_exit_is_the_nearest_disk(w in 0.0f64..=FRAC_PI_4, e in 0.03f64..0.45) {
        let r = first_exit(w, e).unwrap();
        let (t, q, a) = scan_disks(w, e, (1.0 / e).ceil() as u64 + 2);
        prop_assert_eq!((r.target.denominator(), r.target.numerator()), (q, a));
        prop_assert!((r.tau - t).abs() < 1e-12);
    }

    #[test]
    fn sector_widths_are_nonnegative(order in 1u64..300) {
        let all = sectors(order, UnitInterval::FULL, Execution::Sequential).unwrap();
        for s in &all {
            prop_assert!(s.lo <= s.hi);
            prop_assert!(s.width_exact >= 0.0);
            prop_assert!(s.width_asym >= 0.0);
        }
    }
}
