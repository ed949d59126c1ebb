//! Numerical verification of the structural facts the design machinery
//! rests on: the unnormalized-KL reassignment inequality, quasiconcavity of
//! the cost coefficient, the pseudo-threshold property of optimal
//! quantizers, threshold-rule optimality under exhaustive search, and the
//! closed-form inequality behind the quasiconcavity proof.
//!
//! Every check is deterministic given its parameters and seed, counts
//! failures over randomized samples or grid cells, and keeps at most ten
//! failing witnesses.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::cost_coefficient;
use crate::divergence::{binary_kl, unnormalized_divergences};
use crate::error::{Error, Result};
use crate::models::{induce, DeterministicQuantizer, HypothesisPair, Quantizer};
use crate::quantize::{enumerate_quantizers, is_llr_threshold};

/// Outcome of one randomized or grid-based check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples_or_cells: u64,
    pub failures: u64,
    /// Most negative slack observed (positive slack everywhere means the
    /// property held with room to spare).
    pub worst_margin: f64,
    /// Failing inputs, capped at ten.
    pub witnesses: Vec<String>,
    pub seed: u64,
}

impl CheckReport {
    fn new(name: &str, seed: u64) -> Self {
        CheckReport {
            name: name.to_string(),
            samples_or_cells: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            witnesses: Vec::new(),
            seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn record(&mut self, slack: f64, witness: impl FnOnce() -> String) {
        self.samples_or_cells += 1;
        self.worst_margin = self.worst_margin.min(slack);
        if slack < 0.0 {
            self.failures += 1;
            if self.witnesses.len() < 10 {
                self.witnesses.push(witness());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Unnormalized-KL reassignment inequality
// ---------------------------------------------------------------------------

/// For positive pairs `a, b, c` with `a1/a0 < b1/b0 < c1/c0`, at least one
/// of the two reassignments must strictly increase both unnormalized
/// divergences:
///
/// ```text
/// Dt0(a; b+c) > Dt0(b; c+a)  and  Dt1(a; b+c) > Dt1(b; c+a),   or
/// Dt0(c; a+b) > Dt0(b; c+a)  and  Dt1(c; a+b) > Dt1(b; c+a).
/// ```
///
/// Draws random positive sextuples by rejection (exact ratio ties are
/// re-drawn) and counts violations of the disjunction.
pub fn check_unnormalized_kl_lemma(samples: u64, seed: u64) -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("unnormalized-kl-lemma", seed);
    let mut drawn = 0;
    while drawn < samples {
        let v: [f64; 6] = std::array::from_fn(|_| rng.random_range(0.01..1.0));
        let mut pairs = [(v[0], v[1]), (v[2], v[3]), (v[4], v[5])];
        pairs.sort_by(|p, q| (p.1 * q.0).partial_cmp(&(q.1 * p.0)).unwrap());
        let [a, b, c] = pairs;
        if a.1 * b.0 == b.1 * a.0 || b.1 * c.0 == c.1 * b.0 {
            continue; // tie: outside the lemma's hypothesis
        }
        drawn += 1;
        let sum = |p: (f64, f64), q: (f64, f64)| (p.0 + q.0, p.1 + q.1);
        let base = unnormalized_divergences(b, sum(c, a)).unwrap();
        let first = unnormalized_divergences(a, sum(b, c)).unwrap();
        let second = unnormalized_divergences(c, sum(a, b)).unwrap();
        let slack1 = (first.0 - base.0).min(first.1 - base.1);
        let slack2 = (second.0 - base.0).min(second.1 - base.1);
        let slack = slack1.max(slack2);
        report.record(slack, || format!("a={a:?} b={b:?} c={c:?}"));
    }
    report
}

// ---------------------------------------------------------------------------
// Quasiconcavity of F(a0, a1) = c0/(D(a0,a1)+d0) + c1/(D(a1,a0)+d1)
// ---------------------------------------------------------------------------

fn coefficient_surface(x: f64, y: f64, c: (f64, f64), d: (f64, f64)) -> f64 {
    c.0 / (binary_kl(x, y).expect("interior point") + d.0)
        + c.1 / (binary_kl(y, x).expect("interior point") + d.1)
}

/// Both quasiconcavity sub-checks of the coefficient surface.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiconcavityReport {
    /// `F(lambda P + (1-lambda) Q) >= min(F(P), F(Q))` on random segments.
    pub combination: CheckReport,
    /// `h' Hess(F) h < 0` for tangent directions `h` perpendicular to the
    /// gradient, by central finite differences.
    pub curvature: CheckReport,
}

impl QuasiconcavityReport {
    pub fn passed(&self) -> bool {
        self.combination.passed() && self.curvature.passed()
    }
}

const FD_STEP: f64 = 1e-5;
const DOMAIN_MARGIN: f64 = 1e-3;

fn sample_domain_point(
    rng: &mut ChaCha8Rng,
    off_diagonal: bool,
    side: Option<bool>,
) -> (f64, f64) {
    loop {
        let x = rng.random_range(DOMAIN_MARGIN..1.0 - DOMAIN_MARGIN);
        let y = rng.random_range(DOMAIN_MARGIN..1.0 - DOMAIN_MARGIN);
        if off_diagonal && (x - y).abs() < DOMAIN_MARGIN {
            continue;
        }
        if let Some(upper) = side {
            if (x > y) != upper {
                continue;
            }
        }
        return (x, y);
    }
}

/// Verifies quasiconcavity of the coefficient surface for fixed
/// nonnegative constants `(c0, c1)` (at least one positive) and `(d0, d1)`.
///
/// When `d0 = d1 = 0` the surface blows up on the diagonal, so segment
/// endpoints are restricted to a common side of it; with positive offsets
/// the whole square is sampled. Curvature points always stay `1e-3` away
/// from the boundary and the diagonal.
pub fn check_quasiconcavity(
    c0: f64,
    c1: f64,
    d0: f64,
    d1: f64,
    combination_samples: u64,
    curvature_samples: u64,
    seed: u64,
) -> Result<QuasiconcavityReport> {
    if c0 < 0.0 || c1 < 0.0 || d0 < 0.0 || d1 < 0.0 || (c0 == 0.0 && c1 == 0.0) {
        return Err(Error::domain(
            "constants must be nonnegative with c0 + c1 > 0",
        ));
    }
    let c = (c0, c1);
    let d = (d0, d1);
    let zero_offsets = d0 == 0.0 && d1 == 0.0;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut combination = CheckReport::new("quasiconcavity-combination", seed);
    for _ in 0..combination_samples {
        let side = if zero_offsets {
            Some(rng.random::<bool>())
        } else {
            None
        };
        let p = sample_domain_point(&mut rng, zero_offsets, side);
        let q = sample_domain_point(&mut rng, zero_offsets, side);
        let lambda: f64 = rng.random_range(0.0..1.0);
        let mid = (
            lambda * p.0 + (1.0 - lambda) * q.0,
            lambda * p.1 + (1.0 - lambda) * q.1,
        );
        let f_mid = coefficient_surface(mid.0, mid.1, c, d);
        let f_min = coefficient_surface(p.0, p.1, c, d).min(coefficient_surface(q.0, q.1, c, d));
        let slack = f_mid - f_min + 1e-9 * f_mid.abs();
        combination.record(slack, || format!("P={p:?} Q={q:?} lambda={lambda}"));
    }

    let mut curvature = CheckReport::new("quasiconcavity-curvature", seed);
    let h = FD_STEP;
    let mut produced = 0;
    while produced < curvature_samples {
        let (x, y) = sample_domain_point(&mut rng, true, None);
        if x < DOMAIN_MARGIN + 2.0 * h
            || x > 1.0 - DOMAIN_MARGIN - 2.0 * h
            || y < DOMAIN_MARGIN + 2.0 * h
            || y > 1.0 - DOMAIN_MARGIN - 2.0 * h
        {
            continue;
        }
        let f = |x: f64, y: f64| coefficient_surface(x, y, c, d);
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
            / (4.0 * h * h);
        let norm = (fx * fx + fy * fy).sqrt();
        if norm == 0.0 {
            continue;
        }
        produced += 1;
        let t = (-fy / norm, fx / norm);
        let quad = t.0 * t.0 * fxx + 2.0 * t.0 * t.1 * fxy + t.1 * t.1 * fyy;
        let scale = fxx.abs().max(fyy.abs()).max(fxy.abs()).max(1.0);
        let slack = 1e-6 * scale - quad;
        curvature.record(slack, || format!("x={x} y={y} quad={quad}"));
    }

    Ok(QuasiconcavityReport {
        combination,
        curvature,
    })
}

// ---------------------------------------------------------------------------
// Closed-form inequality in (u, v) with u <= 1 <= v
// ---------------------------------------------------------------------------

/// Left and right sides of the final closed-form inequality, which holds
/// for all `u <= 1 <= v` with equality exactly at `u = v = 1`.
pub fn final_inequality_sides(u: f64, v: f64) -> (f64, f64) {
    let s = 0.5 * (u + v);
    let r = (u * v).sqrt();
    let tu = 2.0 * u.sqrt() + 0.5 * (u + 1.0);
    let tv = (v * (v + 1.0) / 2.0).cbrt();
    let lhs = (s + 2.0 * r) * (s + 3.0 * r + 4.0 * u * v) * (3.0 * tv - tu);
    let rhs = tu * tv * (s + 5.0 * r) * (v - u);
    (lhs, rhs)
}

/// Evaluates `lhs - rhs` of [`final_inequality_sides`] over a product grid,
/// counting cells whose relative margin drops below `-1e-9`.
pub fn check_final_inequality(u_grid: &[f64], v_grid: &[f64]) -> CheckReport {
    assert!(
        u_grid.iter().all(|&u| u > 0.0 && u <= 1.0),
        "u grid must lie in (0, 1]"
    );
    assert!(v_grid.iter().all(|&v| v >= 1.0), "v grid must lie in [1, inf)");
    let mut report = CheckReport::new("final-inequality-grid", 0);
    for &u in u_grid {
        for &v in v_grid {
            let (lhs, rhs) = final_inequality_sides(u, v);
            let rel = (lhs - rhs) / lhs.abs().max(rhs.abs()).max(1.0);
            report.record(rel + 1e-9, || format!("u={u} v={v} lhs={lhs} rhs={rhs}"));
        }
    }
    report
}

// ---------------------------------------------------------------------------
// Pseudo-threshold property and constructive improvement
// ---------------------------------------------------------------------------

/// Output masses and KL divergences of a raw map, ignoring empty levels.
/// `None` when the induced distributions coincide (no information).
fn map_divergences(map: &[usize], k: usize, hp: &HypothesisPair) -> Option<(f64, f64)> {
    let mut g0 = vec![0.0; k];
    let mut g1 = vec![0.0; k];
    for (x, &u) in map.iter().enumerate() {
        g0[u] += hp.f0()[x];
        g1[u] += hp.f1()[x];
    }
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for u in 0..k {
        if g0[u] > 0.0 {
            d0 += g0[u] * (g0[u] / g1[u]).ln();
            d1 += g1[u] * (g1[u] / g0[u]).ln();
        }
    }
    if d0 <= 0.0 || d1 <= 0.0 {
        return None;
    }
    Some((d0, d1))
}

/// Checks the necessary optimality condition: for each output pair
/// `u1 != u2`, the aggregate ratio `g1(u1)/g0(u1)` must avoid the open
/// interval spanned by the pointwise ratios of `u2`'s preimage.
pub fn check_pseudo_llr(q: &DeterministicQuantizer, hp: &HypothesisPair) -> CheckReport {
    assert_eq!(q.input_size(), hp.alphabet_size(), "alphabet mismatch");
    let k = q.output_size();
    let mut g0 = vec![0.0; k];
    let mut g1 = vec![0.0; k];
    for (x, &u) in q.map().iter().enumerate() {
        g0[u] += hp.f0()[x];
        g1[u] += hp.f1()[x];
    }
    let mut report = CheckReport::new("pseudo-llr", 0);
    for u1 in 0..k {
        if g0[u1] <= 0.0 {
            continue;
        }
        for u2 in 0..k {
            if u1 == u2 || g0[u2] <= 0.0 {
                continue;
            }
            let pre = q.preimage(u2);
            let lo = *pre
                .iter()
                .min_by(|&&a, &&b| hp.ratio_cmp(a, b))
                .expect("nonempty");
            let hi = *pre
                .iter()
                .max_by(|&&a, &&b| hp.ratio_cmp(a, b))
                .expect("nonempty");
            // g1(u1)/g0(u1) strictly between r(lo) and r(hi)? Decided by
            // exact cross-products; the log-distance is only reported.
            let above_lo = g1[u1] * hp.f0()[lo] > hp.f1()[lo] * g0[u1];
            let below_hi = g1[u1] * hp.f0()[hi] < hp.f1()[hi] * g0[u1];
            let violation = above_lo && below_hi;
            let r1 = (g1[u1] / g0[u1]).ln();
            let raw = (hp.ratio(lo).ln() - r1).max(r1 - hp.ratio(hi).ln());
            let slack = if violation {
                raw.min(-f64::MIN_POSITIVE)
            } else {
                raw.max(0.0)
            };
            report.record(slack, || {
                format!(
                    "level {u1} ratio {} inside ({}, {}) of level {u2}",
                    g1[u1] / g0[u1],
                    hp.ratio(lo),
                    hp.ratio(hi)
                )
            });
        }
    }
    report
}

fn strictly_bigger(new: f64, old: f64) -> bool {
    new > old + 1e-12 * old.abs().max(1.0)
}

/// Constructively improves a quantizer that violates the threshold
/// structure.
///
/// A pseudo-threshold violation is repaired by reassigning the minimal- or
/// maximal-ratio tie group of the offending level; one of the two moves
/// raises both divergences strictly. When only the level-interleaving is
/// wrong, the witness point is merged one way or the other, keeping
/// whichever side has the lower cost coefficient at the pair's prior.
pub fn improve_non_llr(
    q: &DeterministicQuantizer,
    hp: &HypothesisPair,
) -> Result<DeterministicQuantizer> {
    assert_eq!(q.input_size(), hp.alphabet_size(), "alphabet mismatch");
    let k = q.output_size();
    let (d0, d1) = map_divergences(q.map(), k, hp)
        .ok_or_else(|| Error::NoImprovement("channel is degenerate".to_string()))?;

    let mut g0 = vec![0.0; k];
    let mut g1 = vec![0.0; k];
    for (x, &u) in q.map().iter().enumerate() {
        g0[u] += hp.f0()[x];
        g1[u] += hp.f1()[x];
    }

    // Pseudo-threshold violations: move an extreme tie group of u2 to u1.
    for u1 in 0..k {
        if g0[u1] <= 0.0 {
            continue;
        }
        for u2 in 0..k {
            if u1 == u2 || g0[u2] <= 0.0 {
                continue;
            }
            let pre = q.preimage(u2);
            let lo = *pre.iter().min_by(|&&a, &&b| hp.ratio_cmp(a, b)).unwrap();
            let hi = *pre.iter().max_by(|&&a, &&b| hp.ratio_cmp(a, b)).unwrap();
            let above_lo = g1[u1] * hp.f0()[lo] > hp.f1()[lo] * g0[u1];
            let below_hi = g1[u1] * hp.f0()[hi] < hp.f1()[hi] * g0[u1];
            if !(above_lo && below_hi) {
                continue;
            }
            for extreme in [lo, hi] {
                let mut map = q.map().to_vec();
                for &x in &pre {
                    if hp.ratio_cmp(x, extreme) == Ordering::Equal {
                        map[x] = u1;
                    }
                }
                if let Some((n0, n1)) = map_divergences(&map, k, hp) {
                    if n0 >= d0 - 1e-15
                        && n1 >= d1 - 1e-15
                        && (strictly_bigger(n0, d0) || strictly_bigger(n1, d1))
                    {
                        return DeterministicQuantizer::new(map, k);
                    }
                }
            }
        }
    }

    // Interleaved levels without an aggregate violation: merge around the
    // witness point, in whichever direction costs less.
    let priors = hp.priors();
    let g = |dd: (f64, f64)| priors.prior0 / dd.0 + priors.prior1 / dd.1;
    let current = g((d0, d1));
    let mut best: Option<(f64, Vec<usize>)> = None;
    for u1 in 0..k {
        let pre1 = q.preimage(u1);
        if pre1.is_empty() {
            continue;
        }
        let lo = *pre1.iter().min_by(|&&a, &&b| hp.ratio_cmp(a, b)).unwrap();
        let hi = *pre1.iter().max_by(|&&a, &&b| hp.ratio_cmp(a, b)).unwrap();
        for u2 in 0..k {
            if u1 == u2 {
                continue;
            }
            for &x2 in &q.preimage(u2) {
                let inside = hp.ratio_cmp(x2, lo) == Ordering::Greater
                    && hp.ratio_cmp(x2, hi) == Ordering::Less;
                if !inside {
                    continue;
                }
                // Move the witness into the surrounding level ...
                let mut merged = q.map().to_vec();
                merged[x2] = u1;
                // ... or split the surrounding level at the witness.
                let mut split = q.map().to_vec();
                for &x in &pre1 {
                    if hp.ratio_cmp(x, x2) != Ordering::Greater {
                        split[x] = u2;
                    }
                }
                for cand in [merged, split] {
                    if let Some(dd) = map_divergences(&cand, k, hp) {
                        let val = g(dd);
                        if val < current - 1e-12 * current
                            && best.as_ref().is_none_or(|(b, _)| val < *b)
                        {
                            best = Some((val, cand));
                        }
                    }
                }
            }
        }
    }
    if let Some((_, map)) = best {
        return DeterministicQuantizer::new(map, k);
    }
    Err(Error::NoImprovement(
        "no reassignment or merge strictly improves the quantizer".to_string(),
    ))
}

// ---------------------------------------------------------------------------
// Threshold-rule optimality by exhaustive search
// ---------------------------------------------------------------------------

const REL_TOL: f64 = 1e-10;

/// Exhaustively minimizes the cost coefficient over all deterministic
/// quantizers with at most `k` outputs and asserts the minimum is attained
/// (within `1e-10` relative) by a likelihood-ratio threshold rule.
pub fn verify_llr_optimality(hp: &HypothesisPair, k: usize) -> Result<CheckReport> {
    let quantizers = enumerate_quantizers(hp.alphabet_size(), k)?;
    let priors = hp.priors();
    let mut g_min = f64::INFINITY;
    let mut g_llr_min = f64::INFINITY;
    let mut evaluated = 0u64;
    for q in &quantizers {
        let Some((d0, d1)) = map_divergences(q.map(), k, hp) else {
            continue;
        };
        evaluated += 1;
        let g = priors.prior0 / d0 + priors.prior1 / d1;
        g_min = g_min.min(g);
        if is_llr_threshold(q, hp) {
            g_llr_min = g_llr_min.min(g);
        }
    }
    if !g_min.is_finite() {
        return Err(Error::domain(
            "every quantizer is degenerate for this pair",
        ));
    }
    let mut report = CheckReport::new("llr-optimality", 0);
    report.samples_or_cells = evaluated;
    let slack = REL_TOL - (g_llr_min - g_min) / g_min;
    report.worst_margin = slack;
    if slack < 0.0 {
        report.failures = 1;
        report
            .witnesses
            .push(format!("best overall {g_min} vs best threshold rule {g_llr_min}"));
    }
    Ok(report)
}

/// Repeats [`verify_llr_optimality`] over randomly drawn hypothesis pairs
/// with alphabet sizes up to six and binary or ternary outputs.
pub fn verify_llr_optimality_random(pairs: u64, seed: u64) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("llr-optimality-random", seed);
    for _ in 0..pairs {
        let n = rng.random_range(2..=6usize);
        let k = if rng.random::<bool>() { 2 } else { 3 };
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / s).collect()
        };
        let f0 = draw(&mut rng);
        let f1 = draw(&mut rng);
        let prior1 = rng.random_range(0.05..0.95);
        let hp = HypothesisPair::new(f0, f1, prior1).expect("positive entries");
        let inner = verify_llr_optimality(&hp, k)?;
        report.record(inner.worst_margin, || {
            format!("pair with |X|={n}, K={k}: {:?}", inner.witnesses)
        });
    }
    Ok(report)
}

/// Random mixtures of binary deterministic quantizers never undercut the
/// best deterministic threshold rule's coefficient.
pub fn verify_extreme_points(hp: &HypothesisPair, samples: u64, seed: u64) -> Result<CheckReport> {
    let quantizers = enumerate_quantizers(hp.alphabet_size(), 2)?;
    let priors = hp.priors();
    let mut channels = Vec::new();
    let mut g_llr_min = f64::INFINITY;
    for q in &quantizers {
        let Ok(ch) = induce(&Quantizer::Deterministic(q.clone()), hp) else {
            continue;
        };
        if is_llr_threshold(q, hp) {
            g_llr_min = g_llr_min.min(cost_coefficient(priors, &ch)?.value);
        }
        channels.push(ch);
    }
    if channels.is_empty() || !g_llr_min.is_finite() {
        return Err(Error::domain("no usable binary quantizers for this pair"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new("extreme-points", seed);
    for _ in 0..samples {
        // Dirichlet(1, .., 1) weights.
        let raw: Vec<f64> = (0..channels.len())
            .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0f64).ln())
            .collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.into_iter().map(|w| w / total).collect();
        let mut g0 = vec![0.0; 2];
        let mut g1 = vec![0.0; 2];
        for (w, ch) in weights.iter().zip(&channels) {
            let (c0, c1) = ch.to_full();
            for u in 0..2 {
                g0[u] += w * c0[u];
                g1[u] += w * c1[u];
            }
        }
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for u in 0..2 {
            if g0[u] > 0.0 && g1[u] > 0.0 {
                d0 += g0[u] * (g0[u] / g1[u]).ln();
                d1 += g1[u] * (g1[u] / g0[u]).ln();
            }
        }
        if d0 <= 0.0 || d1 <= 0.0 {
            // Mixture carries no information; its coefficient is infinite
            // and cannot undercut anything.
            report.record(1.0, String::new);
            continue;
        }
        let g_mix = priors.prior0 / d0 + priors.prior1 / d1;
        let slack = (g_mix - g_llr_min) / g_llr_min + REL_TOL;
        report.record(slack, || format!("weights {weights:?} gave {g_mix} < {g_llr_min}"));
    }
    Ok(report)
}

/// Exploratory only: samples the combination inequality for mixtures of
/// quantizers with more than two outputs, where quasiconcavity is an open
/// conjecture. Reports margins; a negative margin here is a data point, not
/// a bug.
pub fn explore_randomized_quasiconcavity(
    hp: &HypothesisPair,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<CheckReport> {
    let quantizers = enumerate_quantizers(hp.alphabet_size(), k)?;
    let priors = hp.priors();
    let channels: Vec<_> = quantizers
        .iter()
        .filter_map(|q| induce(&Quantizer::Deterministic(q.clone()), hp).ok())
        .collect();
    if channels.len() < 2 {
        return Err(Error::domain("not enough usable quantizers"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = CheckReport::new(&format!("explore-quasiconcavity-k{k}"), seed);
    let coefficient = |weights: &[f64]| -> Option<f64> {
        let mut g0 = vec![0.0; k];
        let mut g1 = vec![0.0; k];
        for (w, ch) in weights.iter().zip(&channels) {
            let (c0, c1) = ch.to_full();
            for u in 0..k {
                g0[u] += w * c0[u];
                g1[u] += w * c1[u];
            }
        }
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for u in 0..k {
            if g0[u] > 0.0 && g1[u] > 0.0 {
                d0 += g0[u] * (g0[u] / g1[u]).ln();
                d1 += g1[u] * (g1[u] / g0[u]).ln();
            }
        }
        (d0 > 0.0 && d1 > 0.0).then(|| priors.prior0 / d0 + priors.prior1 / d1)
    };
    for _ in 0..samples {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let raw: Vec<f64> = (0..channels.len())
                .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0f64).ln())
                .collect();
            let t: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / t).collect()
        };
        let wp = draw(&mut rng);
        let wq = draw(&mut rng);
        let lambda: f64 = rng.random_range(0.0..1.0);
        let wm: Vec<f64> = wp
            .iter()
            .zip(&wq)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        let (Some(gp), Some(gq), Some(gm)) =
            (coefficient(&wp), coefficient(&wq), coefficient(&wm))
        else {
            continue;
        };
        let slack = (gm - gp.min(gq)) / gp.min(gq) + REL_TOL;
        report.record(slack, || format!("lambda={lambda} margin={slack}"));
    }
    Ok(report)
}
