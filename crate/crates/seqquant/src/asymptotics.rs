//! Small-cost asymptotics of the optimal sequential test: the Wald cost
//! approximation, the sequential cost coefficient that ranks quantizer
//! designs as the per-sample cost vanishes, suboptimality intervals for
//! alternating schedules, mixture rationalization, and the multi-sensor
//! construction.
//!
//! Everything here lives at the coefficient level: the optimal cost of a
//! design behaves like `G * c * ln(1/c)` as `c -> 0`, where
//! `G = prior0/D0 + prior1/D1` for a stationary design, so design
//! comparisons reduce to comparisons of `G`.

use serde::Serialize;

use crate::divergence::binary_kl;
use crate::error::{Error, Result};
use crate::models::{mix_channels, InducedChannel, Priors};

/// Sequential cost coefficient of a (blockwise) stationary design:
/// `G = T*prior0/d0_sum + T*prior1/d1_sum`, where the sums aggregate the KL
/// divergences over one period (or across sensors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostCoefficient {
    pub value: f64,
    pub d0_sum: f64,
    pub d1_sum: f64,
    pub period: usize,
}

impl CostCoefficient {
    fn build(priors: Priors, d0_sum: f64, d1_sum: f64, period: usize) -> Self {
        let t = period as f64;
        CostCoefficient {
            value: t * priors.prior0 / d0_sum + t * priors.prior1 / d1_sum,
            d0_sum,
            d1_sum,
            period,
        }
    }
}

/// Wald's approximation of the sequential cost at error probabilities
/// `(alpha, beta)`:
///
/// ```text
/// J~ = c*prior0*D(alpha, 1-beta)/d0 + c*prior1*D(1-beta, alpha)/d1
///      + prior0*alpha + prior1*beta
/// ```
pub fn wald_cost(
    alpha: f64,
    beta: f64,
    c: f64,
    priors: Priors,
    d0: f64,
    d1: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0 && alpha < 1.0 && beta < 1.0 && alpha + beta < 1.0) {
        return Err(Error::domain(format!(
            "need alpha, beta in (0,1) with alpha + beta < 1, got ({alpha}, {beta})"
        )));
    }
    if !(c > 0.0 && d0 > 0.0 && d1 > 0.0) {
        return Err(Error::domain("c, d0, d1 must be positive"));
    }
    Ok(c * priors.prior0 * binary_kl(alpha, 1.0 - beta)? / d0
        + c * priors.prior1 * binary_kl(1.0 - beta, alpha)? / d1
        + priors.prior0 * alpha
        + priors.prior1 * beta)
}

/// Error probabilities minimizing the Wald approximation in the small-cost
/// regime: `alpha* = c*prior1/(d1*prior0)`, `beta* = c*prior0/(d0*prior1)`.
///
/// Values at or above 1/2 mean `c` is too large for the asymptotic formula;
/// no clamping is performed.
pub fn optimal_errors(c: f64, priors: Priors, d0: f64, d1: f64) -> Result<(f64, f64)> {
    if !(c > 0.0 && d0 > 0.0 && d1 > 0.0) {
        return Err(Error::domain("c, d0, d1 must be positive"));
    }
    let alpha = c * priors.prior1 / (d1 * priors.prior0);
    let beta = c * priors.prior0 / (d0 * priors.prior1);
    if alpha >= 0.5 || beta >= 0.5 {
        return Err(Error::RegimeError { alpha, beta });
    }
    Ok((alpha, beta))
}

/// Sequential cost coefficient of a stationary design.
pub fn cost_coefficient(priors: Priors, channel: &InducedChannel) -> Result<CostCoefficient> {
    if channel.d0() <= 0.0 || channel.d1() <= 0.0 {
        return Err(Error::DegenerateChannel {
            d0: channel.d0(),
            d1: channel.d1(),
        });
    }
    Ok(CostCoefficient::build(priors, channel.d0(), channel.d1(), 1))
}

/// Sequential cost coefficient of a blockwise stationary design with one
/// channel per slot of the period.
pub fn blockwise_coefficient(
    priors: Priors,
    channels: &[InducedChannel],
) -> Result<CostCoefficient> {
    if channels.is_empty() {
        return Err(Error::domain("period must contain at least one channel"));
    }
    let mut d0_sum = 0.0;
    let mut d1_sum = 0.0;
    for ch in channels {
        if ch.d0() <= 0.0 || ch.d1() <= 0.0 {
            return Err(Error::DegenerateChannel {
                d0: ch.d0(),
                d1: ch.d1(),
            });
        }
        d0_sum += ch.d0();
        d1_sum += ch.d1();
    }
    Ok(CostCoefficient::build(priors, d0_sum, d1_sum, channels.len()))
}

/// A range of prior ratios `prior0/prior1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriorInterval {
    pub lower: f64,
    pub upper: f64,
}

fn require_ordering(ch1: &InducedChannel, ch2: &InducedChannel) -> Result<()> {
    if !(ch1.d0() < ch2.d0() && ch1.d1() > ch2.d1()) {
        return Err(Error::AssumptionViolated(format!(
            "need d0(first) < d0(second) and d1(first) > d1(second); got d0 = ({}, {}), d1 = ({}, {})",
            ch1.d0(),
            ch2.d0(),
            ch1.d1(),
            ch2.d1()
        )));
    }
    Ok(())
}

/// The open interval `(U, V)` of prior ratios on which the design
/// alternating between `ch1` and `ch2` has a strictly smaller cost
/// coefficient than either stationary design.
///
/// Requires the asymmetry ordering `d0(ch1) < d0(ch2)` and
/// `d1(ch1) > d1(ch2)`; below `U` the alternating coefficient sits between
/// the two stationary ones (first design best), above `V` the order flips.
pub fn asymmetry_interval(ch1: &InducedChannel, ch2: &InducedChannel) -> Result<PriorInterval> {
    require_ordering(ch1, ch2)?;
    let (a0, a1) = (ch1.d0(), ch1.d1());
    let (b0, b1) = (ch2.d0(), ch2.d1());
    let lower = a0 * (a1 - b1) * (a0 + b0) / (a1 * (a1 + b1) * (b0 - a0));
    let upper = b0 * (a1 - b1) * (a0 + b0) / (b1 * (a1 + b1) * (b0 - a0));
    if !(lower > 0.0 && lower < upper) {
        return Err(Error::AssumptionViolated(format!(
            "interval degenerated: ({lower}, {upper})"
        )));
    }
    Ok(PriorInterval { lower, upper })
}

/// The prior ratio at which the two stationary cost coefficients cross.
///
/// The arguments are relabeled internally so that the asymmetry ordering
/// holds; channels where one dominates the other (or that are identical)
/// have no crossover.
pub fn crossover_ratio(ch1: &InducedChannel, ch2: &InducedChannel) -> Result<f64> {
    let (lo, hi) = if ch1.d0() < ch2.d0() && ch1.d1() > ch2.d1() {
        (ch1, ch2)
    } else if ch2.d0() < ch1.d0() && ch2.d1() > ch1.d1() {
        (ch2, ch1)
    } else {
        return Err(Error::AssumptionViolated(
            "one channel dominates the other (or they coincide); coefficients never cross"
                .to_string(),
        ));
    };
    let (a0, a1) = (lo.d0(), lo.d1());
    let (b0, b1) = (hi.d0(), hi.d1());
    Ok(a0 * b0 * (b1 - a1) / (a1 * b1 * (a0 - b0)))
}

/// Pairwise comparison of two channels by both KL divergences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Dominance {
    /// First channel at least as informative in both divergences, not equal.
    Dominates,
    DominatedBy,
    Incomparable,
    Equal,
}

/// Compares `(d0, d1)` of two channels; equality within `1e-12` per
/// component.
pub fn dominance(ch1: &InducedChannel, ch2: &InducedChannel) -> Dominance {
    const TOL: f64 = 1e-12;
    let eq0 = (ch1.d0() - ch2.d0()).abs() <= TOL;
    let eq1 = (ch1.d1() - ch2.d1()).abs() <= TOL;
    if eq0 && eq1 {
        return Dominance::Equal;
    }
    let ge0 = ch1.d0() >= ch2.d0() - TOL;
    let ge1 = ch1.d1() >= ch2.d1() - TOL;
    let le0 = ch2.d0() >= ch1.d0() - TOL;
    let le1 = ch2.d1() >= ch1.d1() - TOL;
    if ge0 && ge1 {
        Dominance::Dominates
    } else if le0 && le1 {
        Dominance::DominatedBy
    } else {
        Dominance::Incomparable
    }
}

/// A periodic schedule derived from mixture weights: component `i` runs for
/// `counts[i]` consecutive steps out of each period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PeriodicPlan {
    pub counts: Vec<usize>,
    pub period: usize,
}

fn rounded_counts(weights: &[f64], n: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = weights
        .iter()
        .map(|&w| (w * n as f64 + 0.5).floor() as usize)
        .collect();
    let mut total: isize = counts.iter().map(|&q| q as isize).sum();
    // Repair the sum by the largest-remainder rule, ties broken by index.
    while total != n as isize {
        let mut best = 0usize;
        let mut best_rem = f64::NEG_INFINITY;
        for (i, &q) in counts.iter().enumerate() {
            let rem = weights[i] * n as f64 - q as f64;
            let keyed = if total < n as isize { rem } else { -rem };
            if keyed > best_rem && (total < n as isize || counts[i] > 0) {
                best_rem = keyed;
                best = i;
            }
        }
        if total < n as isize {
            counts[best] += 1;
            total += 1;
        } else {
            counts[best] -= 1;
            total -= 1;
        }
    }
    counts
}

/// Replaces a randomized stationary design by a periodic deterministic one
/// with a strictly smaller cost coefficient.
///
/// Searches periods `N = 2, 3, ..` up to `n_max` for integer counts
/// `q_i ~ w_i * N` whose per-period average divergences strictly exceed both
/// divergences of the mixture channel; Jensen strictness of the KL
/// divergence guarantees such a period exists once `N` is large enough.
pub fn rationalize_mixture(
    weights: &[f64],
    channels: &[InducedChannel],
    n_max: usize,
) -> Result<PeriodicPlan> {
    if weights.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            left: weights.len(),
            right: channels.len(),
        });
    }
    if n_max < 2 {
        return Err(Error::domain("n_max must be at least 2"));
    }
    // Effectively deterministic mixtures have no strict improvement.
    let mut distinct: Vec<usize> = Vec::new();
    for (i, (&w, ch)) in weights.iter().zip(channels).enumerate() {
        if w <= 0.0 {
            continue;
        }
        let dup = distinct.iter().any(|&j| {
            let (a0, a1) = channels[j].to_full();
            let (b0, b1) = ch.to_full();
            a0.len() == b0.len()
                && a0.iter().zip(&b0).all(|(x, y)| (x - y).abs() <= 1e-12)
                && a1.iter().zip(&b1).all(|(x, y)| (x - y).abs() <= 1e-12)
        });
        if !dup {
            distinct.push(i);
        }
    }
    if distinct.len() < 2 {
        return Err(Error::NotRandomized);
    }
    let mixture = mix_channels(weights, channels)?;
    let mut best_margin = f64::NEG_INFINITY;
    for n in 2..=n_max {
        let counts = rounded_counts(weights, n);
        let avg0: f64 = counts
            .iter()
            .zip(channels)
            .map(|(&q, ch)| q as f64 * ch.d0())
            .sum::<f64>()
            / n as f64;
        let avg1: f64 = counts
            .iter()
            .zip(channels)
            .map(|(&q, ch)| q as f64 * ch.d1())
            .sum::<f64>()
            / n as f64;
        let margin = (avg0 - mixture.d0()).min(avg1 - mixture.d1());
        best_margin = best_margin.max(margin);
        if avg0 > mixture.d0() && avg1 > mixture.d1() {
            return Ok(PeriodicPlan { counts, period: n });
        }
    }
    Err(Error::NotFound { best_margin })
}

/// Coefficient report for the `d`-sensor construction built from two
/// per-sensor channels.
#[derive(Debug, Clone, Serialize)]
pub struct MultisensorReport {
    /// `per_count[k]`: coefficient of the stationary design in which `k`
    /// sensors use the first channel and `d - k` the second.
    pub per_count: Vec<CostCoefficient>,
    /// Coefficient of the design where one sensor alternates between the
    /// two channels and the rest stay on the second.
    pub nonstationary: CostCoefficient,
    /// Prior ratios on which every stationary count choice loses to the
    /// alternating design.
    pub interval: PriorInterval,
}

/// Multi-sensor coefficients for `d` independent sensors choosing between
/// `ch_a` and `ch_b` per time step.
///
/// Requires `d0(ch_a) > d0(ch_b)` and `d1(ch_a) < d1(ch_b)`: each channel
/// must be the better one under exactly one hypothesis.
pub fn multisensor_coefficients(
    d: usize,
    ch_a: &InducedChannel,
    ch_b: &InducedChannel,
    priors: Priors,
) -> Result<MultisensorReport> {
    if d < 1 {
        return Err(Error::domain("need at least one sensor"));
    }
    // Same asymmetry as the alternating construction, stated with the
    // roles swapped.
    require_ordering(ch_b, ch_a)?;
    let (a0, a1) = (ch_a.d0(), ch_a.d1());
    let (b0, b1) = (ch_b.d0(), ch_b.d1());
    let df = d as f64;
    let per_count = (0..=d)
        .map(|k| {
            let kf = k as f64;
            CostCoefficient::build(
                priors,
                kf * a0 + (df - kf) * b0,
                kf * a1 + (df - kf) * b1,
                1,
            )
        })
        .collect();
    let nonstationary = CostCoefficient::build(
        priors,
        a0 + (2.0 * df - 1.0) * b0,
        a1 + (2.0 * df - 1.0) * b1,
        2,
    );
    let common = (b1 - a1) / (a0 - b0) * (a0 + (2.0 * df - 1.0) * b0) / (a1 + (2.0 * df - 1.0) * b1);
    let lower = common * b0 / b1;
    let upper = common * (a0 + (df - 1.0) * b0) / (a1 + (df - 1.0) * b1);
    if !(lower > 0.0 && lower < upper) {
        return Err(Error::AssumptionViolated(format!(
            "multisensor interval degenerated: ({lower}, {upper})"
        )));
    }
    Ok(MultisensorReport {
        per_count,
        nonstationary,
        interval: PriorInterval { lower, upper },
    })
}
