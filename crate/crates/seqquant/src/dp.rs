//! Exact optimal sequential cost by value iteration on the posterior.
//!
//! The posterior probability `p = P(H = 1 | observations)` is a sufficient
//! statistic; the optimal cost-to-go satisfies the fixed-point equation
//!
//! ```text
//! J(p) = min{ g(p), c + sum_u J(p'(p, u)) * m(u | p) }
//! ```
//!
//! with stop-now cost `g(p) = min(p, 1 - p)`, predictive output mass
//! `m(u | p) = p g1(u) + (1 - p) g0(u)`, and Bayes update
//! `p' = p g1(u) / m(u | p)`. Value functions are tabulated on either a
//! uniform posterior grid or, for very small per-sample costs, a grid
//! uniform in log-odds `ln(p / (1 - p))`, where the Bayes update is a pure
//! shift and the continue-region boundaries stay resolved. Iteration starts
//! from `J = g`, which makes every sweep pointwise nonincreasing.
//!
//! Sweeps are parallelized across grid points; each point sums its outputs
//! in a fixed order, so results are bitwise identical for a fixed
//! configuration regardless of thread count.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::InducedChannel;

/// Per-sample costs at or below this level automatically select the
/// log-odds grid.
pub const LOG_ODDS_SWITCH: f64 = 1e-4;

/// Stop-now cost: the Bayes risk of deciding immediately at posterior `p`.
#[inline]
pub fn stop_cost(p: f64) -> f64 {
    p.min(1.0 - p)
}

#[inline]
fn sigmoid(l: f64) -> f64 {
    1.0 / (1.0 + (-l).exp())
}

/// Grid selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GridChoice {
    /// Uniform in `p` unless `c <= LOG_ODDS_SWITCH`, then log-odds with a
    /// half-range of `ln(1/c) + 8`.
    #[default]
    Auto,
    Uniform,
    /// Uniform in `ln(p/(1-p))` on `[-half_range, half_range]`; `None`
    /// means the automatic half-range.
    LogOdds { half_range: Option<f64> },
}

/// The resolved grid a value function lives on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum GridKind {
    Uniform { n: usize },
    LogOdds { n: usize, half_range: f64 },
}

impl GridKind {
    pub fn len(&self) -> usize {
        match *self {
            GridKind::Uniform { n } | GridKind::LogOdds { n, .. } => n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Posterior at grid index `i`.
    pub fn point(&self, i: usize) -> f64 {
        match *self {
            GridKind::Uniform { n } => i as f64 / (n - 1) as f64,
            GridKind::LogOdds { n, half_range } => {
                sigmoid(-half_range + 2.0 * half_range * i as f64 / (n - 1) as f64)
            }
        }
    }

    fn resolve(choice: GridChoice, n: usize, c: f64) -> GridKind {
        let auto_range = (1.0 / c).ln() + 8.0;
        match choice {
            GridChoice::Uniform => GridKind::Uniform { n },
            GridChoice::LogOdds { half_range } => GridKind::LogOdds {
                n,
                half_range: half_range.unwrap_or(auto_range),
            },
            GridChoice::Auto => {
                if c <= LOG_ODDS_SWITCH {
                    GridKind::LogOdds {
                        n,
                        half_range: auto_range,
                    }
                } else {
                    GridKind::Uniform { n }
                }
            }
        }
    }
}

/// Configuration of the value-iteration solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpConfig {
    /// Number of grid points (default 100_001, minimum 101).
    pub grid_size: usize,
    /// Sweep cap (default 500).
    pub max_iters: usize,
    /// Sup-norm convergence threshold (default 1e-7).
    pub tol: f64,
    /// Per-sample cost.
    pub c: f64,
    pub grid: GridChoice,
}

impl DpConfig {
    pub fn new(c: f64) -> Self {
        DpConfig {
            grid_size: 100_001,
            max_iters: 500,
            tol: 1e-7,
            c,
            grid: GridChoice::Auto,
        }
    }

    pub fn with_grid_size(mut self, n: usize) -> Self {
        self.grid_size = n;
        self
    }

    pub fn with_max_iters(mut self, it: usize) -> Self {
        self.max_iters = it;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.grid_size < 101 {
            return Err(Error::domain(format!(
                "grid_size {} below minimum 101",
                self.grid_size
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain("tol must be positive"));
        }
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::domain("c must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::domain("max_iters must be positive"));
        }
        Ok(())
    }
}

/// A tabulated cost-to-go function.
///
/// `converged` is false when the sweep cap was hit before the tolerance;
/// the table then holds the last iterate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueFunction {
    pub grid: GridKind,
    pub values: Vec<f64>,
    pub cost_c: f64,
    /// Which schedule slot this table belongs to.
    pub channel_tag: String,
    pub converged: bool,
    pub iterations: usize,
    pub last_change: f64,
}

impl ValueFunction {
    /// Cost-to-go at an arbitrary posterior, linearly interpolated; exact at
    /// grid points. Outside a log-odds grid's range the stop-now cost is
    /// returned (those posteriors are deep inside the stop region).
    pub fn value_at(&self, p: f64) -> f64 {
        assert!((0.0..=1.0).contains(&p), "posterior out of range: {p}");
        match self.grid {
            GridKind::Uniform { n } => {
                let t = p * (n - 1) as f64;
                let i = (t.floor() as usize).min(n - 2);
                let frac = t - i as f64;
                self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
            }
            GridKind::LogOdds { n, half_range } => {
                if p <= 0.0 || p >= 1.0 {
                    return 0.0;
                }
                let l = (p / (1.0 - p)).ln();
                if l <= -half_range || l >= half_range {
                    return stop_cost(p);
                }
                let t = (l + half_range) / (2.0 * half_range) * (n - 1) as f64;
                let i = (t.floor() as usize).min(n - 2);
                let frac = t - i as f64;
                self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
            }
        }
    }

    /// Grid posteriors.
    pub fn points(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|i| self.grid.point(i)).collect()
    }

    /// Smallest and largest grid posterior where continuing strictly beats
    /// stopping; `None` when the test stops immediately everywhere.
    pub fn continue_region(&self) -> Option<(f64, f64)> {
        let mut lo = None;
        let mut hi = None;
        for i in 0..self.grid.len() {
            let p = self.grid.point(i);
            if self.values[i] + 1e-12 < stop_cost(p) {
                if lo.is_none() {
                    lo = Some(p);
                }
                hi = Some(p);
            }
        }
        Some((lo?, hi?))
    }

    /// Writes the table as CSV with header `p,J`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "p,J")?;
        for i in 0..self.grid.len() {
            writeln!(w, "{},{}", self.grid.point(i), self.values[i])?;
        }
        Ok(())
    }
}

/// One-step Bayes update of the posterior on seeing support output `u`.
pub fn posterior_update(p: f64, u: usize, channel: &InducedChannel) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("posterior {p} outside [0,1]")));
    }
    if u >= channel.support_len() {
        return Err(Error::domain(format!(
            "output {u} outside support of size {}",
            channel.support_len()
        )));
    }
    let num = p * channel.g1()[u];
    let den = num + (1.0 - p) * channel.g0()[u];
    if den <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(num / den)
}

/// Precomputed per-channel data for one sweep.
struct SweepChannel<'a> {
    ch: &'a InducedChannel,
    /// Log-odds index shift per support output (log-odds grids only).
    shifts: Vec<f64>,
}

impl<'a> SweepChannel<'a> {
    fn new(ch: &'a InducedChannel, grid: &GridKind) -> Self {
        let shifts = match *grid {
            GridKind::Uniform { .. } => Vec::new(),
            GridKind::LogOdds { n, half_range } => {
                let step = 2.0 * half_range / (n - 1) as f64;
                (0..ch.support_len()).map(|u| ch.llr(u) / step).collect()
            }
        };
        SweepChannel { ch, shifts }
    }
}

/// Applies the Bellman operator once: `dst = min(g, c + E[src at updated
/// posterior])`.
fn sweep(grid: &GridKind, sc: &SweepChannel, c: f64, src: &[f64], dst: &mut [f64]) {
    let n = grid.len();
    match *grid {
        GridKind::Uniform { .. } => {
            let scale = (n - 1) as f64;
            dst.par_iter_mut().enumerate().for_each(|(i, out)| {
                let p = i as f64 / scale;
                let mut cont = 0.0;
                for u in 0..sc.ch.support_len() {
                    let num = p * sc.ch.g1()[u];
                    let m = num + (1.0 - p) * sc.ch.g0()[u];
                    let t = num / m * scale;
                    let j = (t.floor() as usize).min(n - 2);
                    let frac = t - j as f64;
                    cont += (src[j] * (1.0 - frac) + src[j + 1] * frac) * m;
                }
                *out = stop_cost(p).min(c + cont);
            });
        }
        GridKind::LogOdds { n, half_range } => {
            let step = 2.0 * half_range / (n - 1) as f64;
            dst.par_iter_mut().enumerate().for_each(|(i, out)| {
                let l = -half_range + step * i as f64;
                let p = sigmoid(l);
                let mut cont = 0.0;
                for u in 0..sc.ch.support_len() {
                    let m = p * sc.ch.g1()[u] + (1.0 - p) * sc.ch.g0()[u];
                    let t = i as f64 + sc.shifts[u];
                    let v = if t >= 0.0 && t <= (n - 1) as f64 {
                        let j = (t.floor() as usize).min(n - 2);
                        let frac = t - j as f64;
                        src[j] * (1.0 - frac) + src[j + 1] * frac
                    } else {
                        // Off-grid posteriors are deep in the stop region.
                        let lp = l + sc.ch.llr(u);
                        sigmoid(-lp.abs())
                    };
                    cont += v * m;
                }
                *out = stop_cost(p).min(c + cont);
            });
        }
    }
}

fn initial_table(grid: &GridKind) -> Vec<f64> {
    (0..grid.len()).map(|i| stop_cost(grid.point(i))).collect()
}

fn sup_change_and_monotone(old: &[f64], new: &[f64]) -> Result<f64> {
    let mut change = 0.0f64;
    let mut rise = 0.0f64;
    for (&a, &b) in old.iter().zip(new) {
        change = change.max((a - b).abs());
        rise = rise.max(b - a);
    }
    if rise > 1e-9 {
        return Err(Error::domain(format!(
            "Bellman sweep increased a value by {rise}; operator is not monotone"
        )));
    }
    Ok(change)
}

/// Value iteration for a stationary design.
pub fn solve_stationary(channel: &InducedChannel, cfg: &DpConfig) -> Result<ValueFunction> {
    cfg.validate()?;
    let grid = GridKind::resolve(cfg.grid, cfg.grid_size, cfg.c);
    let sc = SweepChannel::new(channel, &grid);
    let mut cur = initial_table(&grid);
    let mut next = vec![0.0; cur.len()];
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        sweep(&grid, &sc, cfg.c, &cur, &mut next);
        change = sup_change_and_monotone(&cur, &next)?;
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        if change < cfg.tol {
            break;
        }
    }
    Ok(ValueFunction {
        grid,
        values: cur,
        cost_c: cfg.c,
        channel_tag: "stationary".to_string(),
        converged: change < cfg.tol,
        iterations,
        last_change: change,
    })
}

/// Coupled value iteration for a periodic design with one channel per slot.
///
/// Slot `t`'s table is the cost-to-go when the next sample will be quantized
/// by `channels[t]`; the design's cost at prior `p` is slot 0's value there.
pub fn solve_periodic(channels: &[InducedChannel], cfg: &DpConfig) -> Result<Vec<ValueFunction>> {
    cfg.validate()?;
    if channels.is_empty() {
        return Err(Error::domain("period must contain at least one channel"));
    }
    let t_len = channels.len();
    let grid = GridKind::resolve(cfg.grid, cfg.grid_size, cfg.c);
    let scs: Vec<SweepChannel> = channels.iter().map(|ch| SweepChannel::new(ch, &grid)).collect();
    let mut cur: Vec<Vec<f64>> = (0..t_len).map(|_| initial_table(&grid)).collect();
    let mut next: Vec<Vec<f64>> = (0..t_len).map(|_| vec![0.0; grid.len()]).collect();
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    for _ in 0..cfg.max_iters {
        change = 0.0;
        for t in 0..t_len {
            let src = &cur[(t + 1) % t_len];
            sweep(&grid, &scs[t], cfg.c, src, &mut next[t]);
        }
        for t in 0..t_len {
            change = change.max(sup_change_and_monotone(&cur[t], &next[t])?);
        }
        std::mem::swap(&mut cur, &mut next);
        iterations += 1;
        if change < cfg.tol {
            break;
        }
    }
    let converged = change < cfg.tol;
    Ok(cur
        .into_iter()
        .enumerate()
        .map(|(t, values)| ValueFunction {
            grid: grid.clone(),
            values,
            cost_c: cfg.c,
            channel_tag: format!("slot{t}"),
            converged,
            iterations,
            last_change: change,
        })
        .collect())
}

/// Cost at `prior_p` of running the given channel sequence first and then
/// following the (converged) tail policy forever.
///
/// Backward induction: the tail table is pushed through one Bellman sweep
/// per prefix element after the first, and the first element is applied
/// pointwise at `prior_p`, so a one-element prefix needs no extra grids.
pub fn prefix_cost(prefix: &[InducedChannel], tail: &ValueFunction, prior_p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prior_p) {
        return Err(Error::domain(format!("prior {prior_p} outside [0,1]")));
    }
    if !tail.converged {
        return Err(Error::NoConvergence {
            iterations: tail.iterations,
            last_change: tail.last_change,
        });
    }
    if prefix.is_empty() {
        return Ok(tail.value_at(prior_p));
    }
    let c = tail.cost_c;
    // Tables for prefix steps 1.. (step 0 is evaluated pointwise).
    let mut table = tail.values.clone();
    let mut scratch = vec![0.0; table.len()];
    for ch in prefix[1..].iter().rev() {
        let sc = SweepChannel::new(ch, &tail.grid);
        sweep(&tail.grid, &sc, c, &table, &mut scratch);
        std::mem::swap(&mut table, &mut scratch);
    }
    let vf1 = ValueFunction {
        grid: tail.grid.clone(),
        values: table,
        cost_c: c,
        channel_tag: "prefix".to_string(),
        converged: true,
        iterations: tail.iterations,
        last_change: tail.last_change,
    };
    let ch = &prefix[0];
    let mut cont = 0.0;
    for u in 0..ch.support_len() {
        let m = prior_p * ch.g1()[u] + (1.0 - prior_p) * ch.g0()[u];
        let pu = posterior_update(prior_p, u, ch)?;
        cont += vf1.value_at(pu) * m;
    }
    Ok(stop_cost(prior_p).min(c + cont))
}
