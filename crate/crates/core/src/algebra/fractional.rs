//! Polymorphisms and fractional polymorphisms.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::operation::Operation;
use crate::error::{Error, Result};
use crate::model::{Language, WeightedRelation};
use crate::rational::ExtRational;

/// A probability distribution over `k`-ary operations with rational weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalOperation {
    domain: usize,
    arity: usize,
    weights: BTreeMap<Operation, BigRational>,
}

impl FractionalOperation {
    /// Validates and merges `(operation, weight)` pairs. Weights must be
    /// positive and sum to exactly one.
    pub fn new(weights: impl IntoIterator<Item = (Operation, BigRational)>) -> Result<Self> {
        let mut map: BTreeMap<Operation, BigRational> = BTreeMap::new();
        for (op, w) in weights {
            if !w.is_positive() {
                return Err(Error::Structural(format!("non-positive weight {w}")));
            }
            *map.entry(op).or_insert_with(BigRational::zero) += w;
        }
        let first = map
            .keys()
            .next()
            .ok_or_else(|| Error::Structural("empty fractional operation".into()))?;
        let (domain, arity) = (first.domain(), first.arity());
        if map.keys().any(|op| op.domain() != domain || op.arity() != arity) {
            return Err(Error::Structural(
                "operations of a fractional operation must share domain and arity".into(),
            ));
        }
        let total: BigRational = map.values().sum();
        if !total.is_one() {
            return Err(Error::Structural(format!("weights sum to {total}, not 1")));
        }
        Ok(FractionalOperation {
            domain,
            arity,
            weights: map,
        })
    }

    pub fn point_mass(op: Operation) -> Self {
        FractionalOperation::new([(op, BigRational::one())]).expect("unit weight")
    }

    /// Uniform distribution over the listed operations.
    pub fn uniform(ops: impl IntoIterator<Item = Operation>) -> Result<Self> {
        let ops: Vec<Operation> = ops.into_iter().collect();
        let w = BigRational::new(BigInt::one(), BigInt::from(ops.len().max(1)));
        FractionalOperation::new(ops.into_iter().map(|op| (op, w.clone())))
    }

    /// `τ_k`: each `k`-ary projection with weight `1/k`.
    pub fn uniform_projections(domain: usize, arity: usize) -> Result<Self> {
        FractionalOperation::uniform(
            (0..arity)
                .map(|i| Operation::projection(domain, arity, i))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// `½·min + ½·max` under the natural label order.
    pub fn submodular(domain: usize) -> Self {
        FractionalOperation::uniform([Operation::min(domain), Operation::max(domain)])
            .expect("two binary operations")
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn weights(&self) -> &BTreeMap<Operation, BigRational> {
        &self.weights
    }

    pub fn weight(&self, op: &Operation) -> BigRational {
        self.weights.get(op).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = &Operation> {
        self.weights.keys()
    }
}

/// Calls `visit` on every `k`-vector of entries from `items`.
pub(crate) fn for_each_vector<T>(items: &[T], k: usize, mut visit: impl FnMut(&[&T]) -> bool) {
    if items.is_empty() {
        return;
    }
    let mut idx = vec![0usize; k];
    let mut refs: Vec<&T> = vec![&items[0]; k];
    loop {
        for (r, &i) in refs.iter_mut().zip(&idx) {
            *r = &items[i];
        }
        if !visit(&refs) {
            return;
        }
        if !crate::tuples::next_tuple(&mut idx, items.len()) {
            return;
        }
    }
}

/// Whether `feas(φ)` is closed under coordinatewise application of `f`.
pub fn is_polymorphism(f: &Operation, phi: &WeightedRelation) -> Result<bool> {
    Ok(polymorphism_violation(f, phi)?.is_none())
}

/// A `k`-vector of feasible tuples that `f` maps outside `feas(φ)`.
pub fn polymorphism_violation(
    f: &Operation,
    phi: &WeightedRelation,
) -> Result<Option<Vec<Vec<usize>>>> {
    let feas = phi.feasible_tuples()?;
    let mut found = None;
    for_each_vector(&feas, f.arity(), |rows| {
        let rows: Vec<&[usize]> = rows.iter().map(|r| r.as_slice()).collect();
        let image = f.apply_rows(&rows);
        if phi.is_feasible(&image) {
            true
        } else {
            found = Some(rows.iter().map(|r| r.to_vec()).collect());
            false
        }
    });
    Ok(found)
}

/// Why a fractional operation fails to be a fractional polymorphism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FpolViolation {
    /// Some support operation is not a polymorphism of `relation`.
    NotPolymorphism {
        relation: String,
        tuples: Vec<Vec<usize>>,
    },
    /// The averaging inequality fails: `expected > average`.
    Inequality {
        relation: String,
        tuples: Vec<Vec<usize>>,
        expected: ExtRational,
        average: ExtRational,
    },
}

/// First violation of the fractional-polymorphism condition, scanning
/// relations in order and tuple vectors lexicographically.
pub fn find_fpol_violation(
    omega: &FractionalOperation,
    language: &Language,
) -> Result<Option<FpolViolation>> {
    if omega.domain() != language.domain_size() {
        return Err(Error::Structural(
            "fractional operation and language have different domains".into(),
        ));
    }
    let k = omega.arity();
    let k_q = BigRational::from_integer(BigInt::from(k));
    for phi in language.relations() {
        let feas = phi.feasible_tuples()?;
        let values: Vec<BigRational> = feas
            .iter()
            .map(|t| phi.value(t).finite().cloned().expect("feasible"))
            .collect();
        let mut violation = None;
        let indices: Vec<usize> = (0..feas.len()).collect();
        for_each_vector(&indices, k, |picked| {
            let rows: Vec<&[usize]> = picked.iter().map(|&&i| feas[i].as_slice()).collect();
            let sum: BigRational = picked.iter().map(|&&i| &values[i]).sum();
            let mut expected_times_k = BigRational::zero();
            for (op, w) in omega.weights() {
                let image = op.apply_rows(&rows);
                match phi.value(&image) {
                    ExtRational::Finite(v) => expected_times_k += w * v * &k_q,
                    ExtRational::Infinity => {
                        violation = Some(FpolViolation::NotPolymorphism {
                            relation: phi.name().to_string(),
                            tuples: rows.iter().map(|r| r.to_vec()).collect(),
                        });
                        return false;
                    }
                }
            }
            if expected_times_k > sum {
                violation = Some(FpolViolation::Inequality {
                    relation: phi.name().to_string(),
                    tuples: rows.iter().map(|r| r.to_vec()).collect(),
                    expected: ExtRational::Finite(expected_times_k / &k_q),
                    average: ExtRational::Finite(sum / &k_q),
                });
                return false;
            }
            true
        });
        if violation.is_some() {
            return Ok(violation);
        }
    }
    Ok(None)
}

pub fn is_fractional_polymorphism(omega: &FractionalOperation, language: &Language) -> Result<bool> {
    Ok(find_fpol_violation(omega, language)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::model::Domain;

    fn lang(rels: impl IntoIterator<Item = WeightedRelation>) -> Language {
        Language::with_relations(Domain::new(2).unwrap(), rels).unwrap()
    }

    #[test]
    fn every_operation_preserves_finite_valued() {
        let xor = library::phi_xor();
        crate::algebra::operation::for_each_operation(2, 2, false, 1 << 16, |f| {
            assert!(is_polymorphism(f, &xor).unwrap());
        })
        .unwrap();
    }

    #[test]
    fn min_breaks_crisp_disequality() {
        let neq = library::neq(2);
        let v = polymorphism_violation(&Operation::min(2), &neq).unwrap().unwrap();
        let rows: Vec<&[usize]> = v.iter().map(|r| r.as_slice()).collect();
        assert_eq!(Operation::min(2).apply_rows(&rows), vec![0, 0]);
    }

    #[test]
    fn projections_preserve_everything() {
        for phi in [library::neq(2), library::phi_u(), library::eq(2)] {
            for i in 0..3 {
                let p = Operation::projection(2, 3, i).unwrap();
                assert!(is_polymorphism(&p, &phi).unwrap());
            }
        }
    }

    #[test]
    fn submodular_improves_cut_not_xor() {
        let omega = FractionalOperation::submodular(2);
        assert!(is_fractional_polymorphism(&omega, &lang([library::phi_cut()])).unwrap());
        let v = find_fpol_violation(&omega, &lang([library::phi_xor()])).unwrap().unwrap();
        match v {
            FpolViolation::Inequality {
                tuples,
                expected,
                average,
                ..
            } => {
                assert_eq!(tuples, vec![vec![0, 1], vec![1, 0]]);
                assert_eq!(expected, ExtRational::one());
                assert_eq!(average, ExtRational::zero());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn projection_point_mass_and_tau_always_improve() {
        let l = lang([library::phi_xor(), library::phi_u(), library::neq(2)]);
        let id = FractionalOperation::point_mass(Operation::identity(2));
        assert!(is_fractional_polymorphism(&id, &l).unwrap());
        // A lone k-ary projection (k ≥ 2) does not average: φ(x_1) can exceed
        // the mean over x_1..x_k.
        let p = FractionalOperation::point_mass(Operation::projection(2, 2, 0).unwrap());
        assert!(!is_fractional_polymorphism(&p, &l).unwrap());
        for k in 1..=3 {
            let tau = FractionalOperation::uniform_projections(2, k).unwrap();
            assert!(is_fractional_polymorphism(&tau, &l).unwrap());
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        let half = BigRational::new(1.into(), 2.into());
        assert!(FractionalOperation::new([(Operation::min(2), half.clone())]).is_err());
        assert!(FractionalOperation::new([
            (Operation::min(2), half.clone()),
            (Operation::identity(2), half.clone())
        ])
        .is_err());
        let merged =
            FractionalOperation::new([(Operation::min(2), half.clone()), (Operation::min(2), half)])
                .unwrap();
        assert_eq!(merged.support().count(), 1);
    }
}
