//! Enumeration of deterministic quantizers and likelihood-ratio threshold
//! structure.
//!
//! Quantizers are enumerated in canonical form: output labels renamed in
//! order of first occurrence over the input alphabet, which quotients out
//! output-relabeling symmetry. A quantizer is a likelihood-ratio threshold
//! rule when every output level's preimage is a contiguous block of the
//! alphabet sorted by `f1(x)/f0(x)`, with points of exactly equal ratio free
//! to sit on either side of a block boundary.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::models::{DeterministicQuantizer, HypothesisPair};

/// Default cap on `K^|X|` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 21;

/// All deterministic quantizers from an alphabet of `alphabet_size` points
/// onto at most `k` output levels, canonicalized under output relabeling,
/// constant maps excluded, in lexicographic order of the canonical map.
pub fn enumerate_quantizers(alphabet_size: usize, k: usize) -> Result<Vec<DeterministicQuantizer>> {
    enumerate_quantizers_with_budget(alphabet_size, k, DEFAULT_ENUMERATION_BUDGET)
}

/// As [`enumerate_quantizers`] with an explicit budget on `K^|X|`.
pub fn enumerate_quantizers_with_budget(
    alphabet_size: usize,
    k: usize,
    budget: u128,
) -> Result<Vec<DeterministicQuantizer>> {
    if alphabet_size < 2 || k < 2 {
        return Err(Error::domain(format!(
            "need alphabet_size >= 2 and k >= 2, got ({alphabet_size}, {k})"
        )));
    }
    let required = (k as u128)
        .checked_pow(alphabet_size as u32)
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::SizeLimit { required, budget });
    }
    // Canonical maps are exactly the restricted-growth strings bounded by k:
    // map[0] = 0 and map[x] <= max(map[..x]) + 1.
    let mut out = Vec::new();
    let mut current = vec![0usize; alphabet_size];
    fn rec(
        current: &mut Vec<usize>,
        pos: usize,
        max_used: usize,
        k: usize,
        out: &mut Vec<DeterministicQuantizer>,
    ) {
        if pos == current.len() {
            if max_used > 0 {
                out.push(
                    DeterministicQuantizer::new(current.clone(), k).expect("canonical map valid"),
                );
            }
            return;
        }
        let top = (max_used + 1).min(k - 1);
        for u in 0..=top {
            current[pos] = u;
            rec(current, pos + 1, max_used.max(u), k, out);
        }
    }
    rec(&mut current, 1, 0, k, &mut out);
    Ok(out)
}

fn level_extremes(
    q: &DeterministicQuantizer,
    hp: &HypothesisPair,
) -> Vec<Option<(usize, usize)>> {
    // Per output level: alphabet points with minimal / maximal ratio.
    let mut ext: Vec<Option<(usize, usize)>> = vec![None; q.output_size()];
    for x in 0..q.input_size() {
        let u = q.apply(x);
        ext[u] = Some(match ext[u] {
            None => (x, x),
            Some((lo, hi)) => (
                if hp.ratio_cmp(x, lo) == Ordering::Less { x } else { lo },
                if hp.ratio_cmp(x, hi) == Ordering::Greater { x } else { hi },
            ),
        });
    }
    ext
}

/// Whether `q` is a likelihood-ratio threshold rule for the pair `hp`.
///
/// Two conditions must hold for every pair of nonempty levels `u != v`:
/// no point of `v` has a ratio strictly between the ratio extremes of `u`,
/// and the closed ratio spans of `u` and `v` share at most a single value.
/// Together these are equivalent to the existence of a contiguous
/// assignment in ratio order, with ties placed freely at block boundaries.
pub fn is_llr_threshold(q: &DeterministicQuantizer, hp: &HypothesisPair) -> bool {
    assert_eq!(q.input_size(), hp.alphabet_size(), "alphabet mismatch");
    let ext = level_extremes(q, hp);
    let levels: Vec<usize> = (0..q.output_size()).filter(|&u| ext[u].is_some()).collect();
    for &u in &levels {
        let (ulo, uhi) = ext[u].unwrap();
        for &v in &levels {
            if u == v {
                continue;
            }
            let (vlo, vhi) = ext[v].unwrap();
            // A point of v strictly inside u's span.
            for x in 0..q.input_size() {
                if q.apply(x) == v
                    && hp.ratio_cmp(x, ulo) == Ordering::Greater
                    && hp.ratio_cmp(x, uhi) == Ordering::Less
                {
                    return false;
                }
            }
            // Spans overlapping in more than one point (only reachable
            // through ties; a two-point overlap cannot be made contiguous).
            if u < v {
                let lo = if hp.ratio_cmp(ulo, vlo) == Ordering::Less { vlo } else { ulo };
                let hi = if hp.ratio_cmp(uhi, vhi) == Ordering::Less { uhi } else { vhi };
                if hp.ratio_cmp(lo, hi) == Ordering::Less {
                    return false;
                }
            }
        }
    }
    true
}

/// Builds the deterministic quantizer that buckets each alphabet point by
/// its likelihood ratio against a strictly increasing threshold list, then
/// names bucket `l` with `labels[l]`.
///
/// A ratio exactly equal to a threshold goes to the lower bucket.
pub fn make_llr_quantizer(
    hp: &HypothesisPair,
    thresholds: &[f64],
    labels: &[usize],
) -> Result<DeterministicQuantizer> {
    let k = thresholds.len() + 1;
    if labels.len() != k {
        return Err(Error::DimensionMismatch {
            left: labels.len(),
            right: k,
        });
    }
    for w in thresholds.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::domain("thresholds must be strictly increasing"));
        }
    }
    let mut seen = vec![false; k];
    for &l in labels {
        if l >= k || seen[l] {
            return Err(Error::domain("labels must be a permutation of 0..K-1"));
        }
        seen[l] = true;
    }
    let mut used = vec![false; k];
    let mut map = Vec::with_capacity(hp.alphabet_size());
    for x in 0..hp.alphabet_size() {
        let r = hp.ratio(x);
        let bucket = thresholds.iter().filter(|&&t| t < r).count();
        used[bucket] = true;
        map.push(labels[bucket]);
    }
    if let Some(empty) = (0..k).find(|&b| !used[b]) {
        return Err(Error::EmptyLevel {
            level: labels[empty],
        });
    }
    DeterministicQuantizer::new(map, k)
}

/// Recovers a threshold/label description of an LLR threshold quantizer
/// whose point ratios are pairwise distinct. Thresholds are placed at
/// geometric means of adjacent block-extreme ratios.
pub fn llr_description(
    q: &DeterministicQuantizer,
    hp: &HypothesisPair,
) -> Option<(Vec<f64>, Vec<usize>)> {
    if !is_llr_threshold(q, hp) {
        return None;
    }
    let mut order: Vec<usize> = (0..q.input_size()).collect();
    order.sort_by(|&x, &y| hp.ratio_cmp(x, y));
    for w in order.windows(2) {
        if hp.ratio_cmp(w[0], w[1]) == Ordering::Equal {
            return None; // tie: description not unique
        }
    }
    let mut labels = Vec::new();
    let mut thresholds = Vec::new();
    for (i, &x) in order.iter().enumerate() {
        let u = q.apply(x);
        if labels.last() != Some(&u) {
            labels.push(u);
            if i > 0 {
                thresholds.push((hp.ratio(order[i - 1]) * hp.ratio(x)).sqrt());
            }
        }
    }
    Some((thresholds, labels))
}
