//! Deterministic generators for languages and instances.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::algebra::fractional::{is_fractional_polymorphism, FractionalOperation};
use crate::algebra::operation::Operation;
use crate::error::{Error, Result};
use crate::library;
use crate::model::{Domain, Instance, Language, WeightedRelation};
use crate::rational::ExtRational;
use crate::tuples::all_tuples;

/// SplitMix64 stream with a documented bounded-sampling rule, so seeds
/// reproduce across implementations.
///
/// * `next_u64`: the standard SplitMix64 step (golden-gamma increment
///   `0x9E3779B97F4A7C15`, then the two xor-shift-multiply rounds).
/// * `below(n)`: draw `x`; reject while `x < (2^64 - n) mod n`; return
///   `x mod n`.
/// * `split()`: a child stream seeded with the parent's next output.
#[derive(Clone, Debug)]
pub struct SplitMix {
    inner: SplitMix64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix {
            inner: SplitMix64::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return (x % n) as usize;
            }
        }
    }

    /// Bernoulli draw with probability `num/den`.
    pub fn chance(&mut self, num: usize, den: usize) -> bool {
        self.below(den) < num
    }

    pub fn split(&mut self) -> SplitMix {
        SplitMix::new(self.next_u64())
    }

    /// `count` distinct values from `0..n` in increasing order.
    pub fn distinct(&mut self, n: usize, count: usize) -> Vec<usize> {
        assert!(count <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..count {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        let mut out = pool[..count].to_vec();
        out.sort_unstable();
        out
    }
}

/// Parameters of the rejection samplers.
#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    /// Finite values are drawn uniformly from `0..=max_value`.
    pub max_value: usize,
    /// Each entry is `+∞` with probability `p_inf.0 / p_inf.1`.
    pub p_inf: (usize, usize),
    /// Proposals tried per relation before giving up.
    pub max_attempts: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_value: 10,
            p_inf: (0, 1),
            max_attempts: 200_000,
        }
    }
}

/// Which relations to draw.
#[derive(Clone, Debug)]
pub struct Shape {
    pub domain: usize,
    /// One relation per entry, of that arity.
    pub arities: Vec<usize>,
    /// Crisp tables (0 or `+∞`) instead of valued ones.
    pub crisp: bool,
}

fn random_table(rng: &mut SplitMix, name: &str, shape: &Shape, arity: usize, cfg: &GenConfig) -> Result<WeightedRelation> {
    let entries: Vec<ExtRational> = all_tuples(shape.domain, arity)
        .map(|_| {
            if shape.crisp {
                if rng.chance(1, 2) {
                    ExtRational::zero()
                } else {
                    ExtRational::Infinity
                }
            } else if cfg.p_inf.0 > 0 && rng.chance(cfg.p_inf.0, cfg.p_inf.1) {
                ExtRational::Infinity
            } else {
                ExtRational::from_integer(rng.below(cfg.max_value + 1) as i64)
            }
        })
        .collect();
    WeightedRelation::from_fn(name, shape.domain, arity, |t| {
        entries[crate::tuples::tuple_index(t, shape.domain) as usize].clone()
    })
}

/// A language of relations improved by `omega`, one per arity of `shape`,
/// named `r0, r1, …`. Every relation has a feasible tuple and is checked
/// with the exact fractional-polymorphism test.
pub fn gen_improved(seed: u64, omega: &FractionalOperation, shape: &Shape, cfg: &GenConfig) -> Result<Language> {
    if omega.domain() != shape.domain {
        return Err(Error::Structural("ω and shape have different domains".into()));
    }
    let domain = Domain::new(shape.domain)?;
    let mut rng = SplitMix::new(seed);
    let mut lang = Language::new(domain);
    for (i, &arity) in shape.arities.iter().enumerate() {
        let name = format!("r{i}");
        let mut attempts = 0;
        let relation = loop {
            if attempts == cfg.max_attempts {
                return Err(Error::RejectionLimit(format!(
                    "no improved relation of arity {arity} in {} attempts",
                    cfg.max_attempts
                )));
            }
            attempts += 1;
            let phi = random_table(&mut rng, &name, shape, arity, cfg)?;
            if phi.feasible_indices()?.is_empty() {
                continue;
            }
            let single = Language::with_relations(domain, [phi.clone()])?;
            if is_fractional_polymorphism(omega, &single)? {
                break phi;
            }
        };
        lang.push(relation)?;
    }
    Ok(lang)
}

/// Random instance over `language`: `m` constraints on `n` variables,
/// relation chosen uniformly among those of arity `≤ n`, scope of distinct
/// variables.
pub fn gen_instance(seed: u64, language: Arc<Language>, n: usize, m: usize) -> Result<Instance> {
    let usable: Vec<usize> = (0..language.len())
        .filter(|&r| language.relation(r).arity() <= n)
        .collect();
    let mut inst = Instance::new(language.clone(), n);
    if usable.is_empty() {
        return Ok(inst);
    }
    let mut rng = SplitMix::new(seed);
    for _ in 0..m {
        let r = usable[rng.below(usable.len())];
        let arity = language.relation(r).arity();
        let mut scope = rng.distinct(n, arity);
        // Random order within the scope.
        for i in (1..scope.len()).rev() {
            let j = rng.below(i + 1);
            scope.swap(i, j);
        }
        inst.add(r, scope)?;
    }
    Ok(inst)
}

/// Boolean submodular language (relations of arity `1..=arity`, two each)
/// with a random instance of `count` constraints on `n` variables.
pub fn gen_submodular(seed: u64, n: usize, arity: usize, count: usize) -> Result<(Arc<Language>, Instance)> {
    let mut rng = SplitMix::new(seed);
    let shape = Shape {
        domain: 2,
        arities: (1..=arity).flat_map(|a| [a, a]).collect(),
        crisp: false,
    };
    let lang = Arc::new(gen_improved(
        rng.next_u64(),
        &FractionalOperation::submodular(2),
        &shape,
        &GenConfig::default(),
    )?);
    let inst = gen_instance(rng.next_u64(), lang.clone(), n, count)?;
    Ok((lang, inst))
}

/// Min-UnCut: one `φ_xor` constraint per edge of a simple graph.
pub fn gen_min_uncut(n: usize, edges: &[(usize, usize)]) -> Result<Instance> {
    let lang = Arc::new(Language::with_relations(Domain::new(2)?, [library::phi_xor()])?);
    let mut seen = BTreeSet::new();
    let mut inst = Instance::new(lang, n);
    for &(a, b) in edges {
        if a == b || !seen.insert((a.min(b), a.max(b))) {
            return Err(Error::Structural(format!("edge ({a},{b}) is a loop or repeated")));
        }
        inst.add(0, vec![a, b])?;
    }
    Ok(inst)
}

/// Edges of the cycle on `n ≥ 3` vertices.
pub fn cycle(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}

/// `⅔·majority + ⅓·minority` on `{0,1}`, the Boolean form of an MJN triple.
pub fn mjn_boolean() -> FractionalOperation {
    FractionalOperation::new([
        (Operation::majority(2), BigRational::new(BigInt::from(2), BigInt::from(3))),
        (Operation::minority(2), BigRational::new(BigInt::from(1), BigInt::from(3))),
    ])
    .expect("weights sum to one")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_value;
    use crate::model::DEFAULT_ASSIGNMENT_CAP;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of SplitMix64 seeded with 0.
        let mut r = SplitMix::new(0);
        assert_eq!(r.next_u64(), 0xE220A8397B1DCDAF);
        assert_eq!(r.next_u64(), 0x6E789E6AA1B965F4);
    }

    #[test]
    fn min_uncut_values() {
        let v = |n, e: &[(usize, usize)]| brute_force_value(&gen_min_uncut(n, e).unwrap(), DEFAULT_ASSIGNMENT_CAP).unwrap();
        assert_eq!(v(3, &cycle(3)), ExtRational::one());
        assert_eq!(v(2, &[(0, 1)]), ExtRational::zero());
        assert_eq!(v(5, &cycle(5)), ExtRational::one());
        assert_eq!(gen_min_uncut(3, &cycle(3)).unwrap().constraints().len(), 3);
        assert!(gen_min_uncut(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn submodular_checker_examples() {
        let sub = FractionalOperation::submodular(2);
        let ok = WeightedRelation::from_fn("s", 2, 2, |t| ExtRational::from_integer([0, 3, 2, 1][t[0] * 2 + t[1]])).unwrap();
        let single = |r: WeightedRelation| Language::with_relations(Domain::new(2).unwrap(), [r]).unwrap();
        assert!(is_fractional_polymorphism(&sub, &single(ok)).unwrap());
        assert!(!is_fractional_polymorphism(&sub, &single(library::phi_xor())).unwrap());
        assert!(is_fractional_polymorphism(&sub, &single(library::zero("z", 2, 3))).unwrap());
    }

    #[test]
    fn generators_are_deterministic_and_verified() {
        let (l1, i1) = gen_submodular(9, 4, 3, 6).unwrap();
        let (l2, i2) = gen_submodular(9, 4, 3, 6).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(i1, i2);
        assert!(is_fractional_polymorphism(&FractionalOperation::submodular(2), &l1).unwrap());

        let shape = Shape { domain: 2, arities: vec![2, 3], crisp: false };
        let mjn = gen_improved(3, &mjn_boolean(), &shape, &GenConfig::default()).unwrap();
        assert!(is_fractional_polymorphism(&mjn_boolean(), &mjn).unwrap());
        // Improved by the MJN triple without being submodular.
        let cfg = GenConfig { p_inf: (1, 2), ..GenConfig::default() };
        let found = (0..40).any(|seed| {
            let l = gen_improved(seed, &mjn_boolean(), &Shape { domain: 2, arities: vec![2], crisp: false }, &cfg).unwrap();
            !is_fractional_polymorphism(&FractionalOperation::submodular(2), &l).unwrap()
        });
        assert!(found);

        let crisp = Shape { domain: 2, arities: vec![2, 3], crisp: true };
        let maj = FractionalOperation::point_mass(Operation::majority(2));
        let l = gen_improved(5, &maj, &crisp, &GenConfig::default()).unwrap();
        assert!(l.is_crisp());
    }

    #[test]
    fn rejection_limit() {
        let shape = Shape { domain: 2, arities: vec![3], crisp: false };
        let cfg = GenConfig { max_attempts: 1, ..GenConfig::default() };
        let r = (0..50).map(|s| gen_improved(s, &mjn_boolean(), &shape, &cfg)).find(|r| r.is_err());
        assert!(matches!(r, Some(Err(Error::RejectionLimit(_)))));
    }
}
