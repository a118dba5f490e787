//! Exhaustive ground truth.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::Result;
use crate::model::{for_each_assignment, Assignment, Instance};
use crate::rational::ExtRational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BruteForce {
    /// Minimum value; `inf` when unsatisfiable.
    pub value: ExtRational,
    /// All optimal assignments in lexicographic order; empty when unsatisfiable.
    pub optima: Vec<Assignment>,
}

/// Minimises `instance` by enumerating all `d^n ≤ cap` assignments.
pub fn brute_force(instance: &Instance, cap: u64) -> Result<BruteForce> {
    let mut value = ExtRational::Infinity;
    let mut optima = Vec::new();
    for_each_assignment(instance, cap, |a, v| {
        if v.is_infinite() {
            return;
        }
        match v.cmp(&value) {
            Ordering::Less => {
                value = v;
                optima.clear();
                optima.push(Assignment(a.to_vec()));
            }
            Ordering::Equal => optima.push(Assignment(a.to_vec())),
            Ordering::Greater => {}
        }
    })?;
    Ok(BruteForce { value, optima })
}

/// Minimum value only, without collecting optima.
pub fn brute_force_value(instance: &Instance, cap: u64) -> Result<ExtRational> {
    let mut value = ExtRational::Infinity;
    for_each_assignment(instance, cap, |_, v| {
        if v < value {
            value = v;
        }
    })?;
    Ok(value)
}
