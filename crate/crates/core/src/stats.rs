//! Empirical tail functions over samples of the launch angle, and their
//! distance to the limit laws.
//!
//! Angles are sampled on `[arctan lo, arctan hi]` for a slope interval
//! `[lo, hi]`; the default is the whole octant. With the midpoint rule every
//! sample carries the same angle measure, so a tail proportion `count / N` is
//! the normalized measure of the set of angles above the threshold.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::billiard::{bracketing_orders, first_exit, ExitRecord};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::farey::UnitInterval;
use crate::limits::{h_limit_closed, LimitLaw};
use crate::sector::first_hit_vertical;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `ε τ̃_ε(ω)`.
    Tau,
    /// `ε R̃_ε(ω)`.
    R,
    /// `l_{1/Q}(ω) cos ω / Q = q / Q` in the vertical model.
    VerticalL,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Tau => "tau",
            Quantity::R => "R",
            Quantity::VerticalL => "vertical_l",
        }
    }

    /// Limit of the normalized tail at `t >= 0`.
    pub fn limit(&self, law: &LimitLaw, t: f64) -> Result<f64> {
        match self {
            Quantity::Tau | Quantity::VerticalL => h_limit_closed(t),
            Quantity::R => law.f_limit(t),
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tau" => Ok(Quantity::Tau),
            "R" | "r" => Ok(Quantity::R),
            "vertical_l" => Ok(Quantity::VerticalL),
            other => Err(Error::invalid(
                "quantity",
                format!("expected tau, R or vertical_l, got {other}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum SampleRule {
    /// `ω_i = ω_lo + (i + 1/2) (ω_hi - ω_lo) / N`.
    #[default]
    Midpoint,
    /// `N` independent uniform angles from a seeded generator.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n_samples: usize,
    /// Slope interval; angles are drawn from its arctangent image.
    pub interval: UnitInterval,
    pub rule: SampleRule,
}

impl SampleSpec {
    pub fn midpoint(n_samples: usize) -> Self {
        SampleSpec {
            n_samples,
            interval: UnitInterval::FULL,
            rule: SampleRule::Midpoint,
        }
    }

    pub fn with_interval(mut self, interval: UnitInterval) -> Self {
        self.interval = interval;
        self
    }

    pub fn with_rule(mut self, rule: SampleRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn angle_range(&self) -> (f64, f64) {
        (self.interval.lo.atan(), self.interval.hi.atan())
    }

    /// The sampled angles, in a fixed order.
    pub fn angles(&self) -> Result<Vec<f64>> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", "need at least one sample"));
        }
        let (lo, hi) = self.angle_range();
        let n = self.n_samples;
        let width = hi - lo;
        Ok(match self.rule {
            SampleRule::Midpoint => (0..n)
                .map(|i| (lo + (i as f64 + 0.5) * width / n as f64).min(hi))
                .collect(),
            SampleRule::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..n)
                    .map(|_| if width > 0.0 { rng.random_range(lo..hi) } else { lo })
                    .collect()
            }
        })
    }
}

/// Ascending grid `0, step, 2 step, ..., t_max`.
pub fn t_grid(t_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::invalid(
            "t grid",
            format!("need step > 0 and t_max >= 0, got step = {step}, t_max = {t_max}"),
        ));
    }
    let n = (t_max / step + 1e-9).floor() as usize;
    // rounded so that printed grid points read as typed, e.g. 0.565
    Ok((0..=n).map(|k| (k as f64 * step * 1e12).round() / 1e12).collect())
}

/// Grid with step `0.005` on `[0, 1.6]`.
pub fn default_t_grid() -> Vec<f64> {
    t_grid(1.6, 0.005).expect("valid constants")
}

/// Proportion of `values` strictly above each `t`.
pub fn tail_proportions(values: &[f64], t_grid: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            let at_most = sorted.partition_point(|&v| v <= t);
            (sorted.len() - at_most) as f64 / n
        })
        .collect()
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::invalid("t_grid", "empty grid"));
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) || t_grid[0] < 0.0 {
        return Err(Error::invalid("t_grid", "grid must be ascending and nonnegative"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    pub quantity: Quantity,
    /// `ε` for the disk model, `Q` for the vertical model.
    pub parameter: f64,
    pub t_grid: Vec<f64>,
    /// Tail proportions, normalized so that the full angle range has mass one.
    pub values: Vec<f64>,
    pub spec: SampleSpec,
}

impl EmpiricalCdf {
    /// Unnormalized angle measure of each tail set.
    pub fn angle_measure(&self) -> Vec<f64> {
        let (lo, hi) = self.spec.angle_range();
        self.values.iter().map(|v| v * (hi - lo)).collect()
    }

    /// Limit law on the same grid.
    pub fn limit_values(&self, law: &LimitLaw) -> Result<Vec<f64>> {
        self.t_grid.iter().map(|&t| self.quantity.limit(law, t)).collect()
    }

    /// `sup_t |empirical - limit|` over the grid.
    pub fn sup_distance(&self, law: &LimitLaw) -> Result<f64> {
        let limit = self.limit_values(law)?;
        Ok(self
            .values
            .iter()
            .zip(&limit)
            .map(|(e, l)| (e - l).abs())
            .fold(0.0, f64::max))
    }

    /// Largest distance to the limit over grid points in `[lo, hi]`.
    pub fn local_distance(&self, law: &LimitLaw, lo: f64, hi: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (t, e) in self.t_grid.iter().zip(&self.values) {
            if (lo..=hi).contains(t) {
                worst = worst.max((e - self.quantity.limit(law, *t)?).abs());
            }
        }
        Ok(worst)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid(
            "epsilon",
            format!("radius must lie in (0, 1/2), got {epsilon}"),
        ));
    }
    Ok(())
}

/// First exits for every sampled angle, in sample order.
pub fn exit_samples(epsilon: f64, spec: &SampleSpec, exec: Execution) -> Result<Vec<ExitRecord>> {
    check_epsilon(epsilon)?;
    let angles = spec.angles()?;
    exec.map_slice(&angles, |&w| first_exit(w, epsilon))
        .into_iter()
        .collect()
}

/// Tail of `quantity` built from precomputed exits.
pub fn cdf_from_exits(
    records: &[ExitRecord],
    quantity: Quantity,
    epsilon: f64,
    spec: &SampleSpec,
    t_grid: &[f64],
) -> Result<EmpiricalCdf> {
    check_t_grid(t_grid)?;
    let values: Vec<f64> = match quantity {
        Quantity::Tau => records.iter().map(ExitRecord::scaled_tau).collect(),
        Quantity::R => records.iter().map(ExitRecord::scaled_reflections).collect(),
        Quantity::VerticalL => {
            return Err(Error::invalid("quantity", "vertical_l is not a disk-model quantity"))
        }
    };
    Ok(EmpiricalCdf {
        quantity,
        parameter: epsilon,
        t_grid: t_grid.to_vec(),
        values: tail_proportions(&values, t_grid),
        spec: *spec,
    })
}

/// `H_ε` on `t_grid`: proportion of angles with `ε τ̃_ε(ω) > t`.
pub fn empirical_h(epsilon: f64, spec: &SampleSpec, t_grid: &[f64], exec: Execution) -> Result<EmpiricalCdf> {
    check_t_grid(t_grid)?;
    let records = exit_samples(epsilon, spec, exec)?;
    cdf_from_exits(&records, Quantity::Tau, epsilon, spec, t_grid)
}

/// `F_ε` on `t_grid`: proportion of angles with `ε R̃_ε(ω) > t`.
pub fn empirical_f(epsilon: f64, spec: &SampleSpec, t_grid: &[f64], exec: Execution) -> Result<EmpiricalCdf> {
    check_t_grid(t_grid)?;
    let records = exit_samples(epsilon, spec, exec)?;
    cdf_from_exits(&records, Quantity::R, epsilon, spec, t_grid)
}

/// `H̃_{I,Q}` normalized by the angle of `I`: proportion of angles whose first
/// vertical hit has `q > tQ`.
pub fn empirical_h_vertical(order: u64, spec: &SampleSpec, t_grid: &[f64], exec: Execution) -> Result<EmpiricalCdf> {
    check_t_grid(t_grid)?;
    if order == 0 {
        return Err(Error::invalid("order", "the Farey order must be >= 1"));
    }
    let angles = spec.angles()?;
    let reach: Vec<u64> = exec
        .map_slice(&angles, |&w| first_hit_vertical(w, order).map(|h| h.reach()))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut sorted = reach;
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let big = order as f64;
    let values = t_grid
        .iter()
        .map(|&t| {
            let at_most = sorted.partition_point(|&q| q as f64 <= t * big);
            (sorted.len() - at_most) as f64 / n
        })
        .collect();
    Ok(EmpiricalCdf {
        quantity: Quantity::VerticalL,
        parameter: big,
        t_grid: t_grid.to_vec(),
        values,
        spec: *spec,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub epsilon: f64,
    pub sup_distance: f64,
    /// Distance to the limit over `t ∈ [0.95, 1.05]`, recorded for observation.
    pub local_distance_near_one: f64,
    pub n_samples: usize,
    /// Wall-clock time; the only field that varies between identical runs.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub quantity: Quantity,
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn distances(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.sup_distance).collect()
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].sup_distance < w[0].sup_distance)
    }
}

/// Sup distance to the limit law for each `ε` in a descending list.
pub fn sweep(
    epsilons: &[f64],
    spec: &SampleSpec,
    t_grid: &[f64],
    quantity: Quantity,
    exec: Execution,
) -> Result<SweepReport> {
    if epsilons.is_empty() {
        return Err(Error::invalid("epsilons", "need at least one radius"));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("epsilons", "radii must be strictly descending"));
    }
    if quantity == Quantity::VerticalL {
        return Err(Error::invalid("quantity", "sweeps run over disk radii"));
    }
    let law = LimitLaw::default();
    let mut entries = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let start = Instant::now();
        let records = exit_samples(epsilon, spec, exec)?;
        let cdf = cdf_from_exits(&records, quantity, epsilon, spec, t_grid)?;
        entries.push(SweepEntry {
            epsilon,
            sup_distance: cdf.sup_distance(&law)?,
            local_distance_near_one: cdf.local_distance(&law, 0.95, 1.05)?,
            n_samples: spec.n_samples,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(SweepReport { quantity, entries })
}

/// `ε^r ∫_I τ̃_ε^r dω / |I|` as a sample mean.
pub fn moment_from_exits(records: &[ExitRecord], r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid("r", format!("need r > 0, got {r}")));
    }
    if records.is_empty() {
        return Err(Error::invalid("records", "need at least one exit"));
    }
    let sum: f64 = records.iter().map(|e| e.scaled_tau().powf(r)).sum();
    Ok(sum / records.len() as f64)
}

pub fn empirical_moment(r: f64, epsilon: f64, spec: &SampleSpec, exec: Execution) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::invalid("r", format!("need r > 0, got {r}")));
    }
    let records = exit_samples(epsilon, spec, exec)?;
    moment_from_exits(&records, r)
}

/// Disk-model tail on an angle range next to the two vertical-model tails
/// that bracket it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub epsilon: f64,
    pub q_minus: u64,
    pub q_plus: u64,
    pub t_grid: Vec<f64>,
    /// Proportion with `ε l_{1/Q⁻} > t + 2ε`.
    pub lower: Vec<f64>,
    /// Proportion with `ε τ̃_ε > t`.
    pub middle: Vec<f64>,
    /// Proportion with `ε l_{1/Q⁺} > t - 2ε`.
    pub upper: Vec<f64>,
    /// Samples violating `l_{1/Q⁻} - 2 <= τ̃_ε <= l_{1/Q⁺} + 2`.
    pub pointwise_violations: usize,
}

impl SandwichReport {
    pub fn bracketed(&self) -> bool {
        self.pointwise_violations == 0
            && self
                .lower
                .iter()
                .zip(&self.middle)
                .zip(&self.upper)
                .all(|((lo, mid), hi)| lo <= mid && mid <= hi)
    }
}

/// Compares the disk model at `epsilon` with the vertical models of orders
/// [`bracketing_orders`] on the slope interval of `spec`.
pub fn sandwich(epsilon: f64, spec: &SampleSpec, t_grid: &[f64], exec: Execution) -> Result<SandwichReport> {
    check_epsilon(epsilon)?;
    check_t_grid(t_grid)?;
    let (w0, w1) = spec.angle_range();
    let (q_minus, q_plus) = bracketing_orders(epsilon, w0, w1)?;
    let angles = spec.angles()?;
    let triples: Vec<(f64, f64, f64)> = exec
        .map_slice(&angles, |&w| -> Result<(f64, f64, f64)> {
            let lo = first_hit_vertical(w, q_minus)?.path_length;
            let tau = first_exit(w, epsilon)?.tau;
            let hi = first_hit_vertical(w, q_plus)?.path_length;
            Ok((lo, tau, hi))
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let pointwise_violations = triples
        .iter()
        .filter(|(lo, tau, hi)| !(lo - 2.0 <= *tau && *tau <= hi + 2.0))
        .count();
    let scaled = |pick: fn(&(f64, f64, f64)) -> f64| -> Vec<f64> {
        triples.iter().map(|x| epsilon * pick(x)).collect()
    };
    let shifted = |grid_shift: f64| -> Vec<f64> { t_grid.iter().map(|t| t + grid_shift).collect() };
    let lower = tail_proportions(&scaled(|x| x.0), &shifted(2.0 * epsilon));
    let middle = tail_proportions(&scaled(|x| x.1), t_grid);
    let upper = tail_proportions(&scaled(|x| x.2), &shifted(-2.0 * epsilon));
    Ok(SandwichReport {
        epsilon,
        q_minus,
        q_plus,
        t_grid: t_grid.to_vec(),
        lower,
        middle,
        upper,
        pointwise_violations,
    })
}
