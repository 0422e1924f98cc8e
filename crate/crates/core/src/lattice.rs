//! Candidate denominators for "which lattice point does a ray of slope `s`
//! pass closest to first".
//!
//! The smallest `q` with `‖q s‖ <= δ` is a best approximation of the second
//! kind, hence a convergent denominator of `s`. The iterator below walks the
//! continued fraction of the exact binary value of `s` and yields the
//! convergent and intermediate-fraction denominators in increasing order.

/// `s` in `(0, 1]` as an exact reduced ratio `num / den`, or `None` if the
/// binary exponent is too small to fit the denominator in 127 bits.
fn dyadic(s: f64) -> Option<(u128, u128)> {
    debug_assert!(s > 0.0 && s <= 1.0);
    let bits = s.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    // s = mantissa * 2^e with e <= 0
    let shift = (-e) as u32;
    let tz = mantissa.trailing_zeros().min(shift);
    let (m, shift) = ((mantissa >> tz) as u128, shift - tz);
    if shift > 126 {
        return None;
    }
    Some((m, 1u128 << shift))
}

#[derive(Debug, Clone)]
pub(crate) struct CandidateDenominators {
    q_max: u64,
    // remaining complete quotient x_num / x_den
    x_num: u128,
    x_den: u128,
    q_prev: u128,
    q_cur: u128,
    partial: u128,
    step: u128,
    last: u128,
    started: bool,
    done: bool,
}

impl CandidateDenominators {
    /// Denominators `<= q_max` for slope `s` in `[0, 1]`. The sequence always
    /// starts with `1`; it is exhaustive (every `q` up to `q_max`) only when
    /// `exhausted_early` reports `true`, i.e. the expansion ran out first.
    pub(crate) fn new(s: f64, q_max: u64) -> Self {
        let mut it = CandidateDenominators {
            q_max,
            x_num: 0,
            x_den: 0,
            q_prev: 0,
            q_cur: 1,
            partial: 0,
            step: 0,
            last: 0,
            started: false,
            done: false,
        };
        match (s > 0.0 && s <= 1.0).then(|| dyadic(s)).flatten() {
            Some((num, den)) => {
                let a0 = num / den;
                it.x_num = den;
                it.x_den = num - a0 * den;
            }
            // s = 0 or too small to expand: only q = 1 is offered
            None => it.x_den = 0,
        }
        it
    }
}

impl Iterator for CandidateDenominators {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.last = 1;
            return Some(1);
        }
        loop {
            if self.step < self.partial {
                self.step += 1;
                let q = self.q_prev + self.step * self.q_cur;
                if q > self.q_max as u128 {
                    self.done = true;
                    return None;
                }
                if q > self.last {
                    self.last = q;
                    return Some(q as u64);
                }
                continue;
            }
            if self.partial > 0 {
                let next = self.q_prev + self.partial * self.q_cur;
                self.q_prev = self.q_cur;
                self.q_cur = next;
            }
            if self.x_den == 0 {
                self.done = true;
                return None;
            }
            self.partial = self.x_num / self.x_den;
            (self.x_num, self.x_den) = (self.x_den, self.x_num % self.x_den);
            self.step = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nearest(q: u64, s: f64) -> (u64, f64) {
        let y = q as f64 * s;
        let a = y.round();
        (a as u64, (y - a).abs())
    }

    #[test]
    fn dyadic_is_exact() {
        assert_eq!(dyadic(0.5), Some((1, 2)));
        assert_eq!(dyadic(1.0), Some((1, 1)));
        assert_eq!(dyadic(0.375), Some((3, 8)));
        let (n, d) = dyadic(0.1).unwrap();
        assert_eq!(n as f64 / d as f64, 0.1);
        assert!(dyadic(1e-300).is_none());
    }

    #[test]
    fn denominators_of_known_expansions() {
        // 0.375 = [0; 2, 1, 2]: convergent denominators 1, 2, 3, 8
        let v: Vec<u64> = CandidateDenominators::new(0.375, 100).collect();
        assert_eq!(v, vec![1, 2, 3, 5, 8]);
        let v: Vec<u64> = CandidateDenominators::new(0.0, 100).collect();
        assert_eq!(v, vec![1]);
        let v: Vec<u64> = CandidateDenominators::new(1.0, 100).collect();
        assert_eq!(v, vec![1]);
        assert!(CandidateDenominators::new(0.1234567, 50).all(|q| q <= 50));
    }

    #[test]
    fn second_kind_best_approximations_are_offered() {
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for _ in 0..2000 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let s = (state >> 11) as f64 / (1u64 << 53) as f64;
            let cands: Vec<u64> = CandidateDenominators::new(s, 500).collect();
            assert!(cands.windows(2).all(|w| w[0] < w[1]));
            let mut best = f64::INFINITY;
            for q in 1..=500u64 {
                let d = nearest(q, s).1;
                if d < best {
                    best = d;
                    assert!(cands.contains(&q), "s = {s}, q = {q}");
                }
            }
        }
    }
}
