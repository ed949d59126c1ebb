//! Monte Carlo simulation of two-threshold sequential probability ratio
//! tests over quantized observations.
//!
//! Each trial draws the hypothesis from the prior, streams quantized outputs
//! through the schedule, accumulates the log-likelihood ratio
//! `L_n = sum ln(g1(u)/g0(u))`, stops the first time `L_n` leaves `(a, b)`,
//! and declares 1 exactly when `L_N >= b`. Overshoot is simulated
//! faithfully; nothing is truncated.
//!
//! Reproducibility: trial `t` runs on stream `t` of a counter-based
//! generator seeded once, so serial and parallel executions produce
//! bitwise-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{induce, HypothesisPair, InducedChannel, QuantizerSchedule};
use crate::{asymptotics, divergence};

/// Default per-trial step cap; bounded-LLR channels terminate long before
/// this, so a hit signals a misconfigured spec.
pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// A fully specified sequential test: thresholds, quantizer schedule,
/// hypothesis pair, and per-sample cost.
#[derive(Debug, Clone)]
pub struct SprtSpec {
    pub a: f64,
    pub b: f64,
    pub schedule: QuantizerSchedule,
    pub hp: HypothesisPair,
    pub c: f64,
}

impl SprtSpec {
    pub fn new(
        a: f64,
        b: f64,
        schedule: QuantizerSchedule,
        hp: HypothesisPair,
        c: f64,
    ) -> Result<Self> {
        if !(a < 0.0 && 0.0 < b) {
            return Err(Error::domain(format!("need a < 0 < b, got ({a}, {b})")));
        }
        if !(c > 0.0) {
            return Err(Error::domain("c must be positive"));
        }
        Ok(SprtSpec { a, b, schedule, hp, c })
    }

    /// Channels induced by the schedule: prefix entries then cycle entries.
    fn induced(&self) -> Result<(Vec<InducedChannel>, Vec<InducedChannel>)> {
        let prefix = self
            .schedule
            .prefix()
            .iter()
            .map(|q| induce(q, &self.hp))
            .collect::<Result<Vec<_>>>()?;
        let cycle = self
            .schedule
            .cycle()
            .iter()
            .map(|q| induce(q, &self.hp))
            .collect::<Result<Vec<_>>>()?;
        Ok((prefix, cycle))
    }
}

/// Wald thresholds that would achieve error probabilities `(alpha, beta)`
/// if the likelihood ratio hit them exactly: `a = ln(beta/(1-alpha))`,
/// `b = ln((1-beta)/alpha)`.
pub fn thresholds_from_errors(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && beta > 0.0 && alpha < 1.0 && beta < 1.0 && alpha + beta < 1.0) {
        return Err(Error::domain(format!(
            "need alpha, beta in (0,1) with alpha + beta < 1, got ({alpha}, {beta})"
        )));
    }
    Ok(((beta / (1.0 - alpha)).ln(), ((1.0 - beta) / alpha).ln()))
}

/// Estimates from a batch of simulated trials.
///
/// Error rates are conditional on the sampled hypothesis; `cost_hat` is the
/// prior-weighted empirical cost `mean(c N + error indicator)` over all
/// trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub trials: u64,
    pub h0_trials: u64,
    pub h1_trials: u64,
    pub alpha_hat: f64,
    pub alpha_stderr: f64,
    pub beta_hat: f64,
    pub beta_stderr: f64,
    pub mean_n0: f64,
    pub mean_n0_stderr: f64,
    pub mean_n1: f64,
    pub mean_n1_stderr: f64,
    /// Mean terminal log-likelihood ratio under each hypothesis.
    pub mean_llr0: f64,
    pub mean_llr1: f64,
    pub mean_llr1_stderr: f64,
    pub cost_hat: f64,
    pub cost_stderr: f64,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct Trial {
    h: bool,
    n: u64,
    llr: f64,
    decide_one: bool,
}

fn run_trial(
    spec: &SprtSpec,
    prefix: &[InducedChannel],
    cycle: &[InducedChannel],
    seed: u64,
    trial: u64,
    cap: u64,
) -> Option<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let h = rng.random::<f64>() < spec.hp.prior1();
    let mut llr = 0.0f64;
    let mut n = 0u64;
    loop {
        if n >= cap {
            return None;
        }
        let ch = if (n as usize) < prefix.len() {
            &prefix[n as usize]
        } else {
            &cycle[(n as usize - prefix.len()) % cycle.len()]
        };
        let dist = if h { ch.g1() } else { ch.g0() };
        let draw = rng.random::<f64>();
        let mut acc = 0.0;
        let mut u = dist.len() - 1;
        for (i, &w) in dist.iter().enumerate() {
            acc += w;
            if draw < acc {
                u = i;
                break;
            }
        }
        llr += ch.llr(u);
        n += 1;
        if llr <= spec.a || llr >= spec.b {
            return Some(Trial {
                h,
                n,
                llr,
                decide_one: llr >= spec.b,
            });
        }
    }
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone, n: u64) -> (f64, f64) {
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Runs `trials` independent SPRT trials with the default step cap.
pub fn run_sprt(spec: &SprtSpec, trials: u64, seed: u64) -> Result<SimulationResult> {
    run_sprt_with_cap(spec, trials, seed, DEFAULT_STEP_CAP)
}

/// As [`run_sprt`] with an explicit per-trial step cap. Any trial hitting
/// the cap fails the whole run.
pub fn run_sprt_with_cap(
    spec: &SprtSpec,
    trials: u64,
    seed: u64,
    cap: u64,
) -> Result<SimulationResult> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let (prefix, cycle) = spec.induced()?;
    let outcomes: Vec<Option<Trial>> = (0..trials)
        .into_par_iter()
        .map(|t| run_trial(spec, &prefix, &cycle, seed, t, cap))
        .collect();
    let capped = outcomes.iter().filter(|o| o.is_none()).count();
    if capped > 0 {
        return Err(Error::NonTermination { capped, cap });
    }
    let outcomes: Vec<Trial> = outcomes.into_iter().map(|o| o.unwrap()).collect();

    // Aggregation in trial order keeps results independent of thread count.
    let h0: Vec<&Trial> = outcomes.iter().filter(|t| !t.h).collect();
    let h1: Vec<&Trial> = outcomes.iter().filter(|t| t.h).collect();
    let (alpha_hat, alpha_stderr) =
        mean_and_stderr(h0.iter().map(|t| f64::from(t.decide_one)), h0.len() as u64);
    let (beta_hat, beta_stderr) =
        mean_and_stderr(h1.iter().map(|t| f64::from(!t.decide_one)), h1.len() as u64);
    let (mean_n0, mean_n0_stderr) = mean_and_stderr(h0.iter().map(|t| t.n as f64), h0.len() as u64);
    let (mean_n1, mean_n1_stderr) = mean_and_stderr(h1.iter().map(|t| t.n as f64), h1.len() as u64);
    let (mean_llr0, _) = mean_and_stderr(h0.iter().map(|t| t.llr), h0.len() as u64);
    let (mean_llr1, mean_llr1_stderr) =
        mean_and_stderr(h1.iter().map(|t| t.llr), h1.len() as u64);
    let cost = |t: &Trial| spec.c * t.n as f64 + f64::from(t.decide_one != t.h);
    let (cost_hat, cost_stderr) = mean_and_stderr(outcomes.iter().map(cost), trials);

    Ok(SimulationResult {
        trials,
        h0_trials: h0.len() as u64,
        h1_trials: h1.len() as u64,
        alpha_hat,
        alpha_stderr,
        beta_hat,
        beta_stderr,
        mean_n0,
        mean_n0_stderr,
        mean_n1,
        mean_n1_stderr,
        mean_llr0,
        mean_llr1,
        mean_llr1_stderr,
        cost_hat,
        cost_stderr,
        seed,
    })
}

/// Per-trial trace rows (`trial,hypothesis,N,L_N,decision`) for debugging;
/// same trial streams as [`run_sprt`].
pub fn write_trace<W: std::io::Write>(
    spec: &SprtSpec,
    trials: u64,
    seed: u64,
    mut w: W,
) -> Result<()> {
    let (prefix, cycle) = spec.induced()?;
    writeln!(w, "trial,hypothesis,N,L_N,decision").map_err(|e| Error::domain(e.to_string()))?;
    for t in 0..trials {
        let trial = run_trial(spec, &prefix, &cycle, seed, t, DEFAULT_STEP_CAP)
            .ok_or(Error::NonTermination { capped: 1, cap: DEFAULT_STEP_CAP })?;
        writeln!(
            w,
            "{},{},{},{},{}",
            t,
            u8::from(trial.h),
            trial.n,
            trial.llr,
            u8::from(trial.decide_one)
        )
        .map_err(|e| Error::domain(e.to_string()))?;
    }
    Ok(())
}

/// Comparison of an empirical cost against the Wald approximation evaluated
/// at the estimated error probabilities.
///
/// The approximation error of the Wald cost for a bounded-LLR channel is at
/// most `2 c M`; the tolerance adds three standard errors for the Monte
/// Carlo noise.
#[derive(Debug, Clone, Serialize)]
pub struct WaldComparison {
    pub cost_hat: f64,
    pub wald_estimate: f64,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `|cost_hat - J~(alpha_hat, beta_hat)| <= 2 c M + 3 stderr` for a
/// stationary schedule.
pub fn compare_with_wald(result: &SimulationResult, spec: &SprtSpec) -> Result<WaldComparison> {
    if !spec.schedule.is_stationary() {
        return Err(Error::domain(
            "Wald comparison applies to stationary schedules only",
        ));
    }
    let ch = induce(&spec.schedule.cycle()[0], &spec.hp)?;
    // An error count of zero makes the plug-in ln(1/alpha) blow up; the
    // threshold bracket bounds the true rates away from zero, so clamp the
    // estimates there: alpha >= (1-beta) e^{-(b+M)}, beta >= (1-alpha) e^{a-M}.
    let m = ch.llr_bound();
    let alpha = result
        .alpha_hat
        .max((1.0 - result.beta_hat) * (-(spec.b + m)).exp());
    let beta = result
        .beta_hat
        .max((1.0 - result.alpha_hat) * (spec.a - m).exp());
    let wald_estimate =
        asymptotics::wald_cost(alpha, beta, spec.c, spec.hp.priors(), ch.d0(), ch.d1())?;
    let deviation = (result.cost_hat - wald_estimate).abs();
    let bound = 2.0 * spec.c * ch.llr_bound() + 3.0 * result.cost_stderr;
    Ok(WaldComparison {
        cost_hat: result.cost_hat,
        wald_estimate,
        deviation,
        bound,
        pass: deviation <= bound,
    })
}

/// Convenience: binary divergence evaluated at estimated errors, used by
/// terminal-LLR diagnostics.
pub fn terminal_llr_center(alpha_hat: f64, beta_hat: f64) -> Result<f64> {
    divergence::binary_kl(1.0 - beta_hat, alpha_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::models::Quantizer;

    fn b_spec(a: f64, b: f64, c: f64) -> SprtSpec {
        let p = builtin::counterexample();
        SprtSpec::new(
            a,
            b,
            QuantizerSchedule::stationary(p.design("B").unwrap().clone()),
            p.hypothesis,
            c,
        )
        .unwrap()
    }

    #[test]
    fn threshold_formulas() {
        let (a, b) = thresholds_from_errors(0.01, 0.02).unwrap();
        assert!((a - (0.02f64 / 0.99).ln()).abs() < 1e-15);
        assert!((b - (0.98f64 / 0.01).ln()).abs() < 1e-15);
        assert!(a < 0.0 && b > 0.0);
        // Symmetric case: b = -a.
        let (a, b) = thresholds_from_errors(0.05, 0.05).unwrap();
        assert!((a + b).abs() < 1e-15);
        assert!(thresholds_from_errors(0.6, 0.5).is_err());
        assert!(thresholds_from_errors(0.0, 0.5).is_err());
    }

    #[test]
    fn spec_validation() {
        let p = builtin::counterexample();
        let sched = QuantizerSchedule::stationary(p.design("B").unwrap().clone());
        assert!(SprtSpec::new(1.0, 2.0, sched.clone(), p.hypothesis.clone(), 0.01).is_err());
        assert!(SprtSpec::new(-1.0, 2.0, sched, p.hypothesis, 0.01).is_ok());
    }

    #[test]
    fn reruns_are_bitwise_identical() {
        let spec = b_spec(-3.0, 3.0, 0.01);
        let r1 = run_sprt(&spec, 2000, 7).unwrap();
        let r2 = run_sprt(&spec, 2000, 7).unwrap();
        assert_eq!(r1, r2);
        let r3 = run_sprt(&spec, 2000, 8).unwrap();
        assert_ne!(r1, r3);
    }

    #[test]
    fn termination_and_stopping_state() {
        let spec = b_spec(-2.0, 2.0, 0.01);
        let r = run_sprt(&spec, 5000, 1).unwrap();
        assert!(r.mean_n0 >= 1.0 && r.mean_n1 >= 1.0);
        assert!(r.alpha_hat >= 0.0 && r.alpha_hat <= 1.0);
        // Terminal LLR cannot sit inside (a, b); the means reflect drift.
        assert!(r.mean_llr0 < 0.0);
        assert!(r.mean_llr1 > 0.0);
    }

    #[test]
    fn symmetric_channel_has_symmetric_errors() {
        let hp = HypothesisPair::new(vec![0.8, 0.2], vec![0.2, 0.8], 0.5).unwrap();
        let q = Quantizer::deterministic(vec![0, 1], 2).unwrap();
        let spec = SprtSpec::new(
            -2.0,
            2.0,
            QuantizerSchedule::stationary(q),
            hp,
            0.01,
        )
        .unwrap();
        let r = run_sprt(&spec, 40_000, 3).unwrap();
        let sigma = (r.alpha_stderr.powi(2) + r.beta_stderr.powi(2)).sqrt();
        assert!(
            (r.alpha_hat - r.beta_hat).abs() <= 3.0 * sigma,
            "alpha {} vs beta {} (3 sigma = {})",
            r.alpha_hat,
            r.beta_hat,
            3.0 * sigma
        );
    }

    #[test]
    fn step_cap_is_fatal() {
        // Thresholds so wide the walk cannot exit within the cap.
        let spec = b_spec(-1e9, 1e9, 0.01);
        assert!(matches!(
            run_sprt_with_cap(&spec, 10, 1, 50),
            Err(Error::NonTermination { .. })
        ));
    }

    #[test]
    fn monotone_in_thresholds() {
        let spec_narrow = b_spec(-2.0, 2.0, 0.01);
        let spec_wide = b_spec(-2.0, 6.0, 0.01);
        let rn = run_sprt(&spec_narrow, 60_000, 5).unwrap();
        let rw = run_sprt(&spec_wide, 60_000, 5).unwrap();
        // Raising b with a fixed drives alpha down.
        assert!(rw.alpha_hat < rn.alpha_hat + 3.0 * (rn.alpha_stderr + rw.alpha_stderr));
    }

    #[test]
    fn wald_comparison_passes_on_design_b() {
        let p = builtin::counterexample();
        let ch = induce(p.design("B").unwrap(), &p.hypothesis).unwrap();
        let c = 1e-3;
        let (alpha, beta) =
            asymptotics::optimal_errors(c, p.hypothesis.priors(), ch.d0(), ch.d1()).unwrap();
        let (a, b) = thresholds_from_errors(alpha, beta).unwrap();
        let spec = b_spec(a, b, c);
        let r = run_sprt(&spec, 50_000, 11).unwrap();
        let cmp = compare_with_wald(&r, &spec).unwrap();
        assert!(cmp.pass, "deviation {} > bound {}", cmp.deviation, cmp.bound);
    }

    #[test]
    fn wald_comparison_rejects_periodic_schedules() {
        let p = builtin::counterexample();
        let sched = QuantizerSchedule::new(
            vec![],
            vec![
                p.design("A").unwrap().clone(),
                p.design("B").unwrap().clone(),
            ],
        )
        .unwrap();
        let spec = SprtSpec::new(-2.0, 2.0, sched, p.hypothesis, 0.01).unwrap();
        let r = run_sprt(&spec, 1000, 2).unwrap();
        assert!(compare_with_wald(&r, &spec).is_err());
    }

    #[test]
    fn trace_has_expected_shape() {
        let spec = b_spec(-2.0, 2.0, 0.01);
        let mut buf = Vec::new();
        write_trace(&spec, 5, 9, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "trial,hypothesis,N,L_N,decision");
        assert_eq!(lines.len(), 6);
    }
}
