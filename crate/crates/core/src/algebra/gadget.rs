//! Replacing `opt(I)` constraints by weighted copies of `I`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::{for_each_assignment, opt_relation, Instance, Language};
use crate::rational::{ceil_to_integer, ExtRational};

/// The rewritten instance with the quantities that fix its offset.
#[derive(Clone, Debug)]
pub struct GadgetResult {
    pub instance: Instance,
    /// Copies of `I` per `opt(I)` constraint.
    pub copies: BigInt,
    /// Sum of the largest finite values of the other constraints of `J′`.
    pub upper: BigRational,
    /// Sum of the smallest finite values of the other constraints of `J′`.
    pub lower: BigRational,
    /// Least gap between a suboptimal satisfying value of `I` and `min(I)`.
    pub gap: Option<BigRational>,
    /// Number of `opt(I)` constraints in `J′`.
    pub replaced: usize,
    pub min_i: BigRational,
}

impl GadgetResult {
    /// `C·N·min(I)`, the amount by which `min(J)` exceeds `min(J′)`.
    pub fn offset(&self) -> BigRational {
        BigRational::from_integer(&self.copies * BigInt::from(self.replaced)) * &self.min_i
    }
}

/// `⌈(U − L + 1)/Δ⌉`, or 1 without a gap.
pub fn gadget_constant(upper: &BigRational, lower: &BigRational, gap: Option<&BigRational>) -> BigInt {
    match gap {
        None => BigInt::one(),
        Some(delta) => {
            let c = ceil_to_integer(&((upper - lower + BigRational::one()) / delta));
            c.max(BigInt::one())
        }
    }
}

/// Rewrites `J′`, an instance over `Γ ∪ {opt(I)}` whose extra relation is
/// called `opt_name`, into an instance over `Γ` on the same variables. Every
/// `opt(I)` constraint becomes `C` copies of `I` with variable `i` of `I`
/// mapped to position `i` of the scope.
///
/// `I` must be over `Γ` and satisfiable; `opt_name` must name a relation
/// equal to `opt(I)`. Enumerates `d^n(I) ≤ cap` assignments of `I`.
pub fn opt_gadget(
    gamma: &Arc<Language>,
    i: &Instance,
    j_prime: &Instance,
    opt_name: &str,
    cap: u64,
) -> Result<GadgetResult> {
    let mut best: Option<BigRational> = None;
    let mut values: Vec<BigRational> = Vec::new();
    for_each_assignment(i, cap, |_, v| {
        if let ExtRational::Finite(q) = v {
            values.push(q);
        }
    })?;
    for v in &values {
        if best.as_ref().is_none_or(|b| v < b) {
            best = Some(v.clone());
        }
    }
    let min_i = best.ok_or_else(|| Error::Unsatisfiable("opt(I) is undefined for unsatisfiable I".into()))?;
    let gap = values
        .iter()
        .filter(|v| **v > min_i)
        .map(|v| v - &min_i)
        .min();

    let opt_id = j_prime
        .language()
        .lookup(opt_name)
        .ok_or_else(|| Error::Structural(format!("J′ has no relation `{opt_name}`")))?;
    let expected = opt_relation(i, opt_name, cap)?;
    if *j_prime.language().relation(opt_id) != expected {
        return Err(Error::Structural(format!("`{opt_name}` is not opt(I)")));
    }
    if i.language().domain_size() != gamma.domain_size() || j_prime.domain_size() != gamma.domain_size() {
        return Err(Error::Structural("domains of Γ, I and J′ differ".into()));
    }

    let mut upper = BigRational::zero();
    let mut lower = BigRational::zero();
    let mut replaced = 0;
    for c in j_prime.constraints() {
        if c.relation == opt_id {
            replaced += 1;
            continue;
        }
        let phi = j_prime.relation_of(c);
        if let Some(ExtRational::Finite(hi)) = phi.max_finite() {
            upper += hi;
        }
        if let Some(ExtRational::Finite(lo)) = phi.min_finite() {
            lower += lo;
        }
    }
    let copies = gadget_constant(&upper, &lower, gap.as_ref());

    let mut out = Instance::new(gamma.clone(), j_prime.num_vars());
    for c in j_prime.constraints() {
        if c.relation != opt_id {
            out.add_named(j_prime.relation_of(c).name(), c.scope.clone())?;
            continue;
        }
        let mut n = BigInt::zero();
        while n < copies {
            for ic in i.constraints() {
                let scope = ic.scope.iter().map(|&v| c.scope[v]).collect();
                out.add_named(i.relation_of(ic).name(), scope)?;
            }
            n += 1;
        }
    }
    Ok(GadgetResult {
        instance: out,
        copies,
        upper,
        lower,
        gap,
        replaced,
        min_i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Domain, WeightedRelation, DEFAULT_ASSIGNMENT_CAP};
    use crate::oracle::brute_force_value;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn constant_formula() {
        assert_eq!(gadget_constant(&q(5), &q(0), Some(&q(1))), BigInt::from(6));
        assert_eq!(gadget_constant(&q(5), &q(0), None), BigInt::one());
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(gadget_constant(&q(2), &q(1), Some(&half)), BigInt::from(4));
    }

    fn gamma() -> Arc<Language> {
        let w = WeightedRelation::from_fn("w", 2, 2, |t| ExtRational::from_integer((t[0] + 2 * t[1]) as i64)).unwrap();
        let u = WeightedRelation::from_fn("u", 2, 1, |t| ExtRational::from_integer(3 * t[0] as i64)).unwrap();
        Arc::new(Language::with_relations(Domain::new(2).unwrap(), [w, u]).unwrap())
    }

    #[test]
    fn round_trip_on_three_variables() {
        let g = gamma();
        let mut i = Instance::new(g.clone(), 2);
        i.add_named("w", vec![0, 1]).unwrap();
        let opt = opt_relation(&i, "opt_i", DEFAULT_ASSIGNMENT_CAP).unwrap();
        let mut rels: Vec<WeightedRelation> = g.relations().to_vec();
        rels.push(opt);
        let lang = Arc::new(Language::with_relations(g.domain(), rels).unwrap());
        let mut jp = Instance::new(lang, 3);
        jp.add_named("u", vec![0]).unwrap();
        jp.add_named("w", vec![2, 1]).unwrap();
        jp.add_named("opt_i", vec![1, 2]).unwrap();

        let r = opt_gadget(&g, &i, &jp, "opt_i", DEFAULT_ASSIGNMENT_CAP).unwrap();
        // U = 3 + 3, L = 0, Δ = 1.
        assert_eq!(r.copies, BigInt::from(7));
        assert_eq!(r.replaced, 1);
        assert_eq!(r.instance.constraints().len(), 2 + 7);
        let min_jp = brute_force_value(&jp, DEFAULT_ASSIGNMENT_CAP).unwrap();
        let min_j = brute_force_value(&r.instance, DEFAULT_ASSIGNMENT_CAP).unwrap();
        assert_eq!(min_jp, ExtRational::Finite(min_j.finite().unwrap() - r.offset()));
    }

    #[test]
    fn all_optimal_means_one_copy() {
        let flat = Arc::new(
            Language::with_relations(
                Domain::new(2).unwrap(),
                [WeightedRelation::crisp("c", 2, 1, [vec![1]]).unwrap()],
            )
            .unwrap(),
        );
        let mut one = Instance::new(flat.clone(), 1);
        one.add_named("c", vec![0]).unwrap();
        let mut rels = flat.relations().to_vec();
        rels.push(opt_relation(&one, "opt", DEFAULT_ASSIGNMENT_CAP).unwrap());
        let mut jp = Instance::new(Arc::new(Language::with_relations(flat.domain(), rels).unwrap()), 2);
        jp.add_named("opt", vec![1]).unwrap();
        let r = opt_gadget(&flat, &one, &jp, "opt", DEFAULT_ASSIGNMENT_CAP).unwrap();
        assert_eq!(r.copies, BigInt::one());
        assert_eq!(r.gap, None);
    }

    #[test]
    fn unsatisfiable_inner_instance() {
        let flat = Arc::new(
            Language::with_relations(
                Domain::new(2).unwrap(),
                [WeightedRelation::crisp("none", 2, 1, []).unwrap()],
            )
            .unwrap(),
        );
        let mut i = Instance::new(flat.clone(), 1);
        i.add_named("none", vec![0]).unwrap();
        let jp = Instance::new(flat.clone(), 1);
        assert!(matches!(
            opt_gadget(&flat, &i, &jp, "opt", DEFAULT_ASSIGNMENT_CAP),
            Err(Error::Unsatisfiable(_))
        ));
    }
}
