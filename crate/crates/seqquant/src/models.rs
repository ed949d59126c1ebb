//! Core domain types: hypothesis pairs on finite alphabets, deterministic and
//! randomized quantizers, induced output channels, and periodic quantizer
//! schedules.
//!
//! All types are immutable after construction and validate their invariants
//! in the constructor, so downstream code can rely on normalized
//! distributions, mutual absolute continuity, and bounded log-likelihood
//! ratios without re-checking.

use serde::{Deserialize, Serialize};

use crate::divergence::kl;
use crate::error::{Error, Result};

/// Tolerance for probability-vector normalization: inputs whose sum is
/// within this distance of 1 are renormalized, anything further off is
/// rejected.
pub const NORMALIZATION_TOL: f64 = 1e-12;

fn validated_distribution(v: &[f64], name: &str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::domain(format!("{name} is empty")));
    }
    let mut sum = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() || x < 0.0 {
            return Err(Error::domain(format!("{name}[{i}] = {x} is not a probability")));
        }
        sum += x;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::domain(format!("{name} sums to {sum}, not 1")));
    }
    Ok(v.iter().map(|&x| x / sum).collect())
}

/// Prior probabilities of the two hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub prior0: f64,
    pub prior1: f64,
}

impl Priors {
    /// Builds the pair from `P(H = 1)`; both priors must be interior.
    pub fn new(prior1: f64) -> Result<Self> {
        if !(prior1 > 0.0 && prior1 < 1.0) {
            return Err(Error::domain(format!("prior1 = {prior1} must lie in (0,1)")));
        }
        Ok(Priors {
            prior0: 1.0 - prior1,
            prior1,
        })
    }

    /// Prior ratio `prior0 / prior1`.
    pub fn ratio(&self) -> f64 {
        self.prior0 / self.prior1
    }

    /// Priors with the given ratio `prior0 / prior1`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::domain(format!("prior ratio {ratio} must be positive")));
        }
        Priors::new(1.0 / (1.0 + ratio))
    }
}

/// A simple-vs-simple hypothesis pair on a finite alphabet: conditional
/// distributions `f0`, `f1` and the prior.
///
/// Construction enforces normalization, mutual absolute continuity
/// (`f0[x] > 0` iff `f1[x] > 0`), and interior priors.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisPair {
    f0: Vec<f64>,
    f1: Vec<f64>,
    priors: Priors,
}

impl HypothesisPair {
    pub fn new(f0: Vec<f64>, f1: Vec<f64>, prior1: f64) -> Result<Self> {
        if f0.len() != f1.len() {
            return Err(Error::DimensionMismatch {
                left: f0.len(),
                right: f1.len(),
            });
        }
        let f0 = validated_distribution(&f0, "f0")?;
        let f1 = validated_distribution(&f1, "f1")?;
        for (i, (&a, &b)) in f0.iter().zip(f1.iter()).enumerate() {
            if (a > 0.0) != (b > 0.0) {
                return Err(Error::AbsoluteContinuityViolation { index: i });
            }
        }
        Ok(HypothesisPair {
            f0,
            f1,
            priors: Priors::new(prior1)?,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.f0.len()
    }

    pub fn f0(&self) -> &[f64] {
        &self.f0
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    pub fn priors(&self) -> Priors {
        self.priors
    }

    pub fn prior0(&self) -> f64 {
        self.priors.prior0
    }

    pub fn prior1(&self) -> f64 {
        self.priors.prior1
    }

    /// Likelihood ratio `f1(x) / f0(x)` at an alphabet point.
    pub fn ratio(&self, x: usize) -> f64 {
        self.f1[x] / self.f0[x]
    }

    /// Compares likelihood ratios of two alphabet points exactly, via
    /// cross-multiplication, so ties are decided without quotient rounding.
    pub fn ratio_cmp(&self, x: usize, y: usize) -> std::cmp::Ordering {
        let lhs = self.f1[x] * self.f0[y];
        let rhs = self.f1[y] * self.f0[x];
        lhs.partial_cmp(&rhs).expect("finite masses")
    }
}

/// Serialization schema: `{"f0": [...], "f1": [...], "prior1": p}` with
/// `prior0` derived.
#[derive(Serialize, Deserialize)]
struct HypothesisPairRepr {
    f0: Vec<f64>,
    f1: Vec<f64>,
    prior1: f64,
}

impl Serialize for HypothesisPair {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HypothesisPairRepr {
            f0: self.f0.clone(),
            f1: self.f1.clone(),
            prior1: self.priors.prior1,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HypothesisPair {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = HypothesisPairRepr::deserialize(d)?;
        HypothesisPair::new(repr.f0, repr.f1, repr.prior1).map_err(serde::de::Error::custom)
    }
}

/// A deterministic quantizer: a map from the observation alphabet to the
/// output alphabet `{0, .., output_size - 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicQuantizer {
    map: Vec<usize>,
    output_size: usize,
}

impl DeterministicQuantizer {
    pub fn new(map: Vec<usize>, output_size: usize) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::domain("quantizer map is empty"));
        }
        if output_size == 0 {
            return Err(Error::domain("output alphabet is empty"));
        }
        for (x, &u) in map.iter().enumerate() {
            if u >= output_size {
                return Err(Error::domain(format!(
                    "map[{x}] = {u} outside output alphabet of size {output_size}"
                )));
            }
        }
        Ok(DeterministicQuantizer { map, output_size })
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn input_size(&self) -> usize {
        self.map.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// Alphabet points mapped to output `u`.
    pub fn preimage(&self, u: usize) -> Vec<usize> {
        (0..self.map.len()).filter(|&x| self.map[x] == u).collect()
    }

    /// Relabels outputs in order of first occurrence, the canonical form
    /// used for duplicate-free enumeration.
    pub fn canonicalize(&self) -> DeterministicQuantizer {
        let mut relabel: Vec<Option<usize>> = vec![None; self.output_size];
        let mut next = 0;
        let map = self
            .map
            .iter()
            .map(|&u| {
                *relabel[u].get_or_insert_with(|| {
                    let v = next;
                    next += 1;
                    v
                })
            })
            .collect();
        DeterministicQuantizer {
            map,
            output_size: self.output_size,
        }
    }
}

/// A quantizer: either a single deterministic map or a randomized mixture of
/// deterministic maps over the same input/output alphabets.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantizer {
    Deterministic(DeterministicQuantizer),
    Randomized {
        weights: Vec<f64>,
        components: Vec<DeterministicQuantizer>,
    },
}

impl Quantizer {
    pub fn deterministic(map: Vec<usize>, output_size: usize) -> Result<Self> {
        Ok(Quantizer::Deterministic(DeterministicQuantizer::new(
            map,
            output_size,
        )?))
    }

    pub fn randomized(weights: Vec<f64>, components: Vec<DeterministicQuantizer>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("randomized quantizer needs at least one component"));
        }
        if weights.len() != components.len() {
            return Err(Error::DimensionMismatch {
                left: weights.len(),
                right: components.len(),
            });
        }
        let weights = validated_distribution(&weights, "weights")?;
        let (n, k) = (components[0].input_size(), components[0].output_size());
        for c in &components[1..] {
            if c.input_size() != n || c.output_size() != k {
                return Err(Error::domain("mixture components disagree on alphabet sizes"));
            }
        }
        Ok(Quantizer::Randomized { weights, components })
    }

    pub fn input_size(&self) -> usize {
        match self {
            Quantizer::Deterministic(q) => q.input_size(),
            Quantizer::Randomized { components, .. } => components[0].input_size(),
        }
    }

    pub fn output_size(&self) -> usize {
        match self {
            Quantizer::Deterministic(q) => q.output_size(),
            Quantizer::Randomized { components, .. } => components[0].output_size(),
        }
    }
}

/// Serialization schema: `{"map": [...]}` for deterministic quantizers
/// (output size inferred as `max + 1`) or
/// `{"weights": [...], "components": [[...], ...]}` for mixtures.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum QuantizerRepr {
    Deterministic { map: Vec<usize> },
    Randomized {
        weights: Vec<f64>,
        components: Vec<Vec<usize>>,
    },
}

fn inferred_output_size(maps: &[&[usize]]) -> usize {
    maps.iter()
        .flat_map(|m| m.iter().copied())
        .max()
        .map_or(1, |m| m + 1)
}

impl Serialize for Quantizer {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Quantizer::Deterministic(q) => QuantizerRepr::Deterministic { map: q.map.clone() },
            Quantizer::Randomized { weights, components } => QuantizerRepr::Randomized {
                weights: weights.clone(),
                components: components.iter().map(|c| c.map.clone()).collect(),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quantizer {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = QuantizerRepr::deserialize(d)?;
        let out = match repr {
            QuantizerRepr::Deterministic { map } => {
                let k = inferred_output_size(&[&map]);
                Quantizer::deterministic(map, k)
            }
            QuantizerRepr::Randomized { weights, components } => {
                let refs: Vec<&[usize]> = components.iter().map(|c| c.as_slice()).collect();
                let k = inferred_output_size(&refs);
                let comps = components
                    .into_iter()
                    .map(|m| DeterministicQuantizer::new(m, k))
                    .collect::<Result<Vec<_>>>();
                comps.and_then(|c| Quantizer::randomized(weights, c))
            }
        };
        out.map_err(serde::de::Error::custom)
    }
}

/// Output distributions a quantizer induces under the two hypotheses,
/// restricted to the common support, together with both KL divergences and
/// the log-likelihood-ratio bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InducedChannel {
    output_size: usize,
    /// Original output labels retained in the support.
    outputs: Vec<usize>,
    g0: Vec<f64>,
    g1: Vec<f64>,
    /// `ln(g1[u] / g0[u])` per support output.
    llrs: Vec<f64>,
    /// `D(g0 || g1)`.
    d0: f64,
    /// `D(g1 || g0)`.
    d1: f64,
    /// `max_u |ln(g1[u] / g0[u])|`.
    llr_bound: f64,
}

impl InducedChannel {
    /// Builds a channel from output distributions over the full output
    /// alphabet. Outputs with zero mass under both hypotheses are dropped;
    /// zero mass under exactly one hypothesis is rejected; identical
    /// induced distributions are rejected as degenerate.
    pub fn from_distributions(g0_full: &[f64], g1_full: &[f64]) -> Result<Self> {
        if g0_full.len() != g1_full.len() {
            return Err(Error::DimensionMismatch {
                left: g0_full.len(),
                right: g1_full.len(),
            });
        }
        let g0_full = validated_distribution(g0_full, "g0")?;
        let g1_full = validated_distribution(g1_full, "g1")?;
        let mut outputs = Vec::new();
        let mut g0 = Vec::new();
        let mut g1 = Vec::new();
        for u in 0..g0_full.len() {
            match (g0_full[u] > 0.0, g1_full[u] > 0.0) {
                (true, true) => {
                    outputs.push(u);
                    g0.push(g0_full[u]);
                    g1.push(g1_full[u]);
                }
                (false, false) => {}
                _ => return Err(Error::AbsoluteContinuityViolation { index: u }),
            }
        }
        if outputs.is_empty() {
            return Err(Error::domain("channel has empty support"));
        }
        let d0 = kl(&g0, &g1)?;
        let d1 = kl(&g1, &g0)?;
        if d0 == 0.0 || d1 == 0.0 {
            return Err(Error::DegenerateChannel { d0, d1 });
        }
        let llrs: Vec<f64> = g0.iter().zip(&g1).map(|(&a, &b)| (b / a).ln()).collect();
        let llr_bound = llrs.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
        Ok(InducedChannel {
            output_size: g0_full.len(),
            outputs,
            g0,
            g1,
            llrs,
            d0,
            d1,
            llr_bound,
        })
    }

    /// Size of the common support.
    pub fn support_len(&self) -> usize {
        self.outputs.len()
    }

    /// Original output alphabet size (before dropping zero-mass outputs).
    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn g0(&self) -> &[f64] {
        &self.g0
    }

    pub fn g1(&self) -> &[f64] {
        &self.g1
    }

    /// Log-likelihood-ratio increment of support output `u`.
    pub fn llr(&self, u: usize) -> f64 {
        self.llrs[u]
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn llr_bound(&self) -> f64 {
        self.llr_bound
    }

    /// Output distributions expanded back to the full output alphabet.
    pub fn to_full(&self) -> (Vec<f64>, Vec<f64>) {
        let mut g0 = vec![0.0; self.output_size];
        let mut g1 = vec![0.0; self.output_size];
        for (i, &u) in self.outputs.iter().enumerate() {
            g0[u] = self.g0[i];
            g1[u] = self.g1[i];
        }
        (g0, g1)
    }
}

/// Distribution of a quantizer's output under each hypothesis.
///
/// For a deterministic quantizer the output masses are sums of input masses
/// over each preimage; a randomized quantizer induces the weight-convex
/// combination of its components' output distributions.
pub fn induce(q: &Quantizer, hp: &HypothesisPair) -> Result<InducedChannel> {
    if q.input_size() != hp.alphabet_size() {
        return Err(Error::DimensionMismatch {
            left: q.input_size(),
            right: hp.alphabet_size(),
        });
    }
    let k = q.output_size();
    let mut g0 = vec![0.0; k];
    let mut g1 = vec![0.0; k];
    match q {
        Quantizer::Deterministic(det) => {
            for (x, &u) in det.map().iter().enumerate() {
                g0[u] += hp.f0()[x];
                g1[u] += hp.f1()[x];
            }
        }
        Quantizer::Randomized { weights, components } => {
            for (w, det) in weights.iter().zip(components) {
                for (x, &u) in det.map().iter().enumerate() {
                    g0[u] += w * hp.f0()[x];
                    g1[u] += w * hp.f1()[x];
                }
            }
        }
    }
    InducedChannel::from_distributions(&g0, &g1)
}

/// Convex combination of channels over a shared output alphabet.
pub fn mix_channels(weights: &[f64], channels: &[InducedChannel]) -> Result<InducedChannel> {
    if weights.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            left: weights.len(),
            right: channels.len(),
        });
    }
    if channels.is_empty() {
        return Err(Error::domain("no channels to mix"));
    }
    let weights = validated_distribution(weights, "weights")?;
    let k = channels[0].output_size();
    let mut g0 = vec![0.0; k];
    let mut g1 = vec![0.0; k];
    for (w, ch) in weights.iter().zip(channels) {
        if ch.output_size() != k {
            return Err(Error::DimensionMismatch {
                left: ch.output_size(),
                right: k,
            });
        }
        let (c0, c1) = ch.to_full();
        for u in 0..k {
            g0[u] += w * c0[u];
            g1[u] += w * c1[u];
        }
    }
    InducedChannel::from_distributions(&g0, &g1)
}

/// A periodic quantizer schedule: an optional non-repeating prefix followed
/// by a cycle applied forever.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSchedule {
    prefix: Vec<Quantizer>,
    cycle: Vec<Quantizer>,
}

impl QuantizerSchedule {
    pub fn new(prefix: Vec<Quantizer>, cycle: Vec<Quantizer>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::domain("schedule cycle must be nonempty"));
        }
        let n = cycle[0].input_size();
        for q in prefix.iter().chain(cycle.iter()) {
            if q.input_size() != n {
                return Err(Error::domain("schedule quantizers disagree on input alphabet"));
            }
        }
        Ok(QuantizerSchedule { prefix, cycle })
    }

    pub fn stationary(q: Quantizer) -> Self {
        QuantizerSchedule {
            prefix: Vec::new(),
            cycle: vec![q],
        }
    }

    pub fn prefix(&self) -> &[Quantizer] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[Quantizer] {
        &self.cycle
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    /// Quantizer used at (0-based) time step `n`.
    pub fn at(&self, n: u64) -> &Quantizer {
        let p = self.prefix.len() as u64;
        if n < p {
            &self.prefix[n as usize]
        } else {
            &self.cycle[((n - p) % self.cycle.len() as u64) as usize]
        }
    }

    /// True when the schedule applies one fixed quantizer at every step.
    pub fn is_stationary(&self) -> bool {
        self.prefix.is_empty() && self.cycle.len() == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn hypothesis_pair_validation() {
        assert!(HypothesisPair::new(vec![0.5, 0.5], vec![0.3, 0.7], 0.5).is_ok());
        // Prior must be interior.
        assert!(HypothesisPair::new(vec![0.5, 0.5], vec![0.3, 0.7], 0.0).is_err());
        // Mutual absolute continuity.
        assert!(matches!(
            HypothesisPair::new(vec![0.5, 0.5, 0.0], vec![0.5, 0.4, 0.1], 0.5),
            Err(Error::AbsoluteContinuityViolation { index: 2 })
        ));
        // Off-by-more-than-tolerance normalization.
        assert!(HypothesisPair::new(vec![0.5, 0.6], vec![0.3, 0.7], 0.5).is_err());
    }

    #[test]
    fn induce_reproduces_design_channels() {
        let p = builtin::counterexample();
        let a = induce(p.design("A").unwrap(), &p.hypothesis).unwrap();
        assert!((a.g0()[0] - 0.8).abs() < 1e-15);
        assert!((a.g1()[0] - 1.0 / 3.0).abs() < 1e-15);
        let b = induce(p.design("B").unwrap(), &p.hypothesis).unwrap();
        assert!((b.g0()[0] - 0.9999).abs() < 1e-15);
        assert!((b.g1()[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_quantizer_recovers_the_pair() {
        let p = builtin::counterexample();
        let id = Quantizer::deterministic(vec![0, 1, 2], 3).unwrap();
        let ch = induce(&id, &p.hypothesis).unwrap();
        for x in 0..3 {
            assert!((ch.g0()[x] - p.hypothesis.f0()[x]).abs() < 1e-15);
            assert!((ch.g1()[x] - p.hypothesis.f1()[x]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_map_is_degenerate() {
        let p = builtin::counterexample();
        let q = Quantizer::deterministic(vec![0, 0, 0], 2).unwrap();
        assert!(matches!(
            induce(&q, &p.hypothesis),
            Err(Error::DegenerateChannel { .. })
        ));
    }

    #[test]
    fn mixture_channel_is_convex_combination() {
        let p = builtin::counterexample();
        let a = p.design("A").unwrap().clone();
        let b = p.design("B").unwrap().clone();
        let (Quantizer::Deterministic(da), Quantizer::Deterministic(db)) = (a, b) else {
            unreachable!()
        };
        let mix = Quantizer::randomized(vec![0.25, 0.75], vec![da, db]).unwrap();
        let ch = induce(&mix, &p.hypothesis).unwrap();
        let ca = induce(p.design("A").unwrap(), &p.hypothesis).unwrap();
        let cb = induce(p.design("B").unwrap(), &p.hypothesis).unwrap();
        for u in 0..2 {
            let want0 = 0.25 * ca.g0()[u] + 0.75 * cb.g0()[u];
            let want1 = 0.25 * ca.g1()[u] + 0.75 * cb.g1()[u];
            assert!((ch.g0()[u] - want0).abs() < 1e-12);
            assert!((ch.g1()[u] - want1).abs() < 1e-12);
        }
        // Same channel via mix_channels.
        let mixed = mix_channels(&[0.25, 0.75], &[ca, cb]).unwrap();
        assert!((mixed.d0() - ch.d0()).abs() < 1e-12);
        assert!((mixed.d1() - ch.d1()).abs() < 1e-12);
    }

    #[test]
    fn channel_drops_empty_outputs() {
        let ch = InducedChannel::from_distributions(&[0.7, 0.0, 0.3], &[0.4, 0.0, 0.6]).unwrap();
        assert_eq!(ch.support_len(), 2);
        assert_eq!(ch.outputs(), &[0, 2]);
        assert_eq!(ch.output_size(), 3);
        assert!(matches!(
            InducedChannel::from_distributions(&[0.7, 0.0, 0.3], &[0.4, 0.1, 0.5]),
            Err(Error::AbsoluteContinuityViolation { index: 1 })
        ));
    }

    #[test]
    fn schedule_indexing() {
        let p = builtin::counterexample();
        let a = p.design("A").unwrap().clone();
        let b = p.design("B").unwrap().clone();
        let s = QuantizerSchedule::new(vec![a.clone()], vec![b.clone(), a.clone()]).unwrap();
        assert_eq!(s.at(0), &a);
        assert_eq!(s.at(1), &b);
        assert_eq!(s.at(2), &a);
        assert_eq!(s.at(3), &b);
        assert!(!s.is_stationary());
        assert!(QuantizerSchedule::stationary(a).is_stationary());
    }

    #[test]
    fn serde_round_trip() {
        let p = builtin::counterexample();
        let js = serde_json::to_string(&p.hypothesis).unwrap();
        let back: HypothesisPair = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p.hypothesis);

        let q = p.design("B").unwrap();
        let js = serde_json::to_string(q).unwrap();
        assert_eq!(js, r#"{"map":[0,0,1]}"#);
        let back: Quantizer = serde_json::from_str(&js).unwrap();
        assert_eq!(&back, q);

        let mix: Quantizer =
            serde_json::from_str(r#"{"weights":[0.5,0.5],"components":[[0,1,1],[0,0,1]]}"#)
                .unwrap();
        assert_eq!(mix.output_size(), 2);
    }
}
