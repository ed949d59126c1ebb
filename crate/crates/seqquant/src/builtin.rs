//! Built-in problems usable without any input files.

use crate::models::{HypothesisPair, Quantizer};

/// A named hypothesis pair bundled with named quantizer designs and default
/// experiment parameters.
#[derive(Debug, Clone)]
pub struct BuiltinProblem {
    pub name: &'static str,
    pub hypothesis: HypothesisPair,
    pub designs: Vec<(&'static str, Quantizer)>,
    /// Default per-sample cost for this problem.
    pub default_c: f64,
}

impl BuiltinProblem {
    pub fn design(&self, name: &str) -> Option<&Quantizer> {
        self.designs
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, q)| q)
    }
}

/// The three-point problem on which stationary designs are beaten by a
/// schedule that switches quantizers: `f0 = [8/10, 1999/10000, 1/10000]`,
/// `f1` uniform, prior `P(H=1) = 0.08`, per-sample cost `0.01`, and the
/// three binary designs
///
/// - `A`: `{1} | {2,3}`
/// - `B`: `{1,2} | {3}`
/// - `C`: `{1,3} | {2}`
pub fn counterexample() -> BuiltinProblem {
    let hypothesis = HypothesisPair::new(
        vec![8.0 / 10.0, 1999.0 / 10000.0, 1.0 / 10000.0],
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        0.08,
    )
    .expect("valid by construction");
    let designs = vec![
        ("A", Quantizer::deterministic(vec![0, 1, 1], 2).unwrap()),
        ("B", Quantizer::deterministic(vec![0, 0, 1], 2).unwrap()),
        ("C", Quantizer::deterministic(vec![0, 1, 0], 2).unwrap()),
    ];
    BuiltinProblem {
        name: "counterexample",
        hypothesis,
        designs,
        default_c: 0.01,
    }
}

/// Look up a builtin problem by name.
pub fn by_name(name: &str) -> Option<BuiltinProblem> {
    match name.to_ascii_lowercase().as_str() {
        "counterexample" => Some(counterexample()),
        _ => None,
    }
}

/// Names of all builtin problems.
pub fn names() -> Vec<&'static str> {
    vec!["counterexample"]
}
