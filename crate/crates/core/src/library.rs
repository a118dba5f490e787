//! Standard weighted relations used throughout tests, examples and the CLI.

use crate::model::WeightedRelation;
use crate::rational::ExtRational;

/// Min-UnCut edge cost on `{0,1}`: 0 when the labels differ, 1 otherwise.
pub fn phi_xor() -> WeightedRelation {
    WeightedRelation::from_fn("xor", 2, 2, |t| {
        ExtRational::from_integer(if t[0] != t[1] { 0 } else { 1 })
    })
    .expect("small table")
}

/// Cut cost on `{0,1}`: 0 when the labels agree, 1 otherwise.
pub fn phi_cut() -> WeightedRelation {
    WeightedRelation::from_fn("cut", 2, 2, |t| {
        ExtRational::from_integer(if t[0] == t[1] { 0 } else { 1 })
    })
    .expect("small table")
}

/// Unary preference for label 0 on `{0,1}`.
pub fn phi_u() -> WeightedRelation {
    WeightedRelation::from_fn("u", 2, 1, |t| ExtRational::from_integer(t[0] as i64))
        .expect("small table")
}

/// Crisp disequality on a domain of size `d`.
pub fn neq(d: usize) -> WeightedRelation {
    WeightedRelation::from_fn("neq", d, 2, |t| {
        if t[0] != t[1] {
            ExtRational::zero()
        } else {
            ExtRational::Infinity
        }
    })
    .expect("small table")
}

/// Crisp equality on a domain of size `d`.
pub fn eq(d: usize) -> WeightedRelation {
    WeightedRelation::from_fn("eq", d, 2, |t| {
        if t[0] == t[1] {
            ExtRational::zero()
        } else {
            ExtRational::Infinity
        }
    })
    .expect("small table")
}

/// Name of the crisp singleton relation `{(label)}`.
pub fn constant_name(label: usize) -> String {
    format!("const_{label}")
}

/// The crisp unary relation `{(label)}` on a domain of size `d`.
pub fn constant(d: usize, label: usize) -> WeightedRelation {
    WeightedRelation::crisp(constant_name(label), d, 1, [vec![label]]).expect("small table")
}

/// Constant-0 relation of the given arity.
pub fn zero(name: impl Into<String>, d: usize, arity: usize) -> WeightedRelation {
    WeightedRelation::from_fn(name, d, arity, |_| ExtRational::zero()).expect("small table")
}
