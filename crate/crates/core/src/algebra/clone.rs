//! Finite parts of generated clones.

use std::collections::BTreeSet;

use super::fractional::for_each_vector;
use super::operation::{compose, Operation};
use crate::error::{Error, Result};

/// Cap on the size of each arity's part of the clone.
pub const DEFAULT_CLONE_CAP: usize = 1 << 16;

/// All operations of arity `1..=bound` in the clone generated by `seeds`.
///
/// The `ℓ`-ary part is the closure of the `ℓ` projections under
/// `g_1, …, g_m ↦ f[g_1, …, g_m]` for every seed `f`; seeds of any arity
/// take part. Output is sorted by arity, then table.
pub fn clone_generate(seeds: &[Operation], domain: usize, bound: usize, cap: usize) -> Result<Vec<Operation>> {
    if seeds.iter().any(|f| f.domain() != domain) {
        return Err(Error::Structural("seeds must share the domain".into()));
    }
    let mut out = Vec::new();
    for arity in 1..=bound {
        let mut part: BTreeSet<Operation> = (0..arity)
            .map(|i| Operation::projection(domain, arity, i))
            .collect::<Result<_>>()?;
        loop {
            let current: Vec<Operation> = part.iter().cloned().collect();
            let mut fresh = Vec::new();
            let mut failure = None;
            for f in seeds {
                for_each_vector(&current, f.arity(), |gs| {
                    let gs: Vec<Operation> = gs.iter().map(|&g| g.clone()).collect();
                    match compose(f, &gs) {
                        Ok(h) if !part.contains(&h) => fresh.push(h),
                        Ok(_) => {}
                        Err(e) => failure = Some(e),
                    }
                    failure.is_none()
                });
            }
            if let Some(e) = failure {
                return Err(e);
            }
            if fresh.is_empty() {
                break;
            }
            part.extend(fresh);
            if part.len() > cap {
                return Err(Error::Resource(format!(
                    "clone part of arity {arity} exceeds {cap} operations"
                )));
            }
        }
        out.extend(part);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_only() {
        let ops = clone_generate(&[], 2, 2, DEFAULT_CLONE_CAP).unwrap();
        assert_eq!(ops.len(), 3);
        assert!(ops.contains(&Operation::identity(2)));
    }

    #[test]
    fn min_generates_ternary_min() {
        let ops = clone_generate(&[Operation::min(2)], 2, 3, DEFAULT_CLONE_CAP).unwrap();
        let g3 = Operation::from_fn(2, 3, |t| t[0].min(t[1]).min(t[2])).unwrap();
        assert!(ops.contains(&g3));
        // Closed under composition with min up to the bound.
        let set: BTreeSet<&Operation> = ops.iter().collect();
        for a in ops.iter().filter(|o| o.arity() == 2) {
            for b in ops.iter().filter(|o| o.arity() == 2) {
                let h = compose(&Operation::min(2), &[a.clone(), b.clone()]).unwrap();
                assert!(set.contains(&h));
            }
        }
    }

    #[test]
    fn majority_generates_four_ary_wnu() {
        let m = Operation::majority(2);
        let ops = clone_generate(std::slice::from_ref(&m), 2, 4, DEFAULT_CLONE_CAP).unwrap();
        let g4 = Operation::from_fn(2, 4, |t| m.apply(&t[..3])).unwrap();
        assert!(ops.contains(&g4));
        for k in 1..=4 {
            for i in 0..k {
                assert!(ops.contains(&Operation::projection(2, k, i).unwrap()));
            }
        }
    }
}
