//! Membership in the support clone `supp(Γ)`.
//!
//! `f ∈ supp(Γ)` iff some fractional polymorphism gives `f` positive weight.
//! The search is an LP over all `k`-ary polymorphisms `g` with variables
//! `ω(g)`:
//!
//! ```text
//! max  Σ_{g ∈ C} ω(g)
//! s.t. Σ_g ω(g)·k·φ(g(x_1..x_k)) ≤ Σ_j φ(x_j)   for φ ∈ Γ, x_j ∈ feas(φ)
//!      Σ_g ω(g) = 1,  ω ≥ 0
//! ```
//!
//! `supp(Γ)` is closed under permuting arguments and averaging `ω` over
//! argument permutations keeps it a fractional polymorphism, so it suffices
//! to search symmetric `ω`. Rows then depend only on the multiset
//! `{x_1..x_k}` and columns only on the permutation orbit of `g`; columns
//! with identical coefficients are merged. When the optimum is 0 the row
//! duals are a non-negative `z` with `Σ z·(k·φ(g(x)) − Σφ(x_j)) ≥ 0` for
//! every polymorphism `g` and `> 0` on `C`, which becomes the instance
//! `I_f` on variables `D^k`.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fractional::{
    for_each_vector, is_fractional_polymorphism, is_polymorphism, polymorphism_violation,
    FractionalOperation,
};
use super::operation::{for_each_operation, Operation};
use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, verify_certificate, Bound, LinearProgram, LpStatus, RowRelation, Sense, SimplexOptions};
use crate::model::{Instance, Language};
use crate::rational::lcm_of_denominators;
use crate::tuples::{checked_pow, tuple_index};

/// Per-call limits.
#[derive(Clone, Copy, Debug)]
pub struct SuppOptions {
    /// Cap on `d^(d^k)`, the number of raw `k`-ary operations.
    pub max_ops: u64,
    /// Cap on `Σ_φ |feas(φ)|^k`.
    pub max_vectors: u64,
    /// Cap on the number of constraints in a witness instance.
    pub max_witness_constraints: u64,
    pub simplex: SimplexOptions,
}

impl Default for SuppOptions {
    fn default() -> Self {
        SuppOptions {
            max_ops: 1 << 16,
            max_vectors: 1 << 20,
            max_witness_constraints: 1_000_000,
            simplex: SimplexOptions::default(),
        }
    }
}

/// Answer to a support-membership query.
#[derive(Clone, Debug)]
pub struct SuppMembership {
    pub member: bool,
    /// The queried operation, or for set queries the candidate found.
    pub operation: Operation,
    /// A verified fractional polymorphism with `operation` in its support.
    pub witness_fpol: Option<FractionalOperation>,
    /// An instance `I` over `Γ` on variables `D^k` (variable `i` is the
    /// `k`-tuple of index `i`) with `operation ∉ pol(opt(I))`.
    pub witness_instance: Option<Instance>,
    /// Whether the query was settled because `operation ∉ pol(Γ)`.
    pub not_polymorphism: bool,
    /// Optimum of the LP, when one was solved.
    pub lp_optimum: Option<BigRational>,
    /// Exact re-check of the LP outcome.
    pub certificate_verified: bool,
}

pub fn supp_membership(f: &Operation, language: &Language, options: &SuppOptions) -> Result<SuppMembership> {
    supp_membership_any(std::slice::from_ref(f), language, options)
}

/// Whether some operation of `candidates` (all of one arity) lies in
/// `supp(Γ)`.
pub fn supp_membership_any(
    candidates: &[Operation],
    language: &Language,
    options: &SuppOptions,
) -> Result<SuppMembership> {
    let first = candidates
        .first()
        .ok_or_else(|| Error::Structural("no candidate operations".into()))?;
    let (d, k) = (language.domain_size(), first.arity());
    if candidates.iter().any(|c| c.arity() != k || c.domain() != d) {
        return Err(Error::Structural(
            "candidates must share the language's domain and one arity".into(),
        ));
    }
    checked_pow(d, k)
        .and_then(|cells| checked_pow(d, cells as usize))
        .filter(|&n| n <= options.max_ops)
        .ok_or_else(|| {
            Error::Resource(format!(
                "{d}^({d}^{k}) operations exceed the cap of {}",
                options.max_ops
            ))
        })?;

    let mut polymorphic = Vec::new();
    for c in candidates {
        if is_language_polymorphism(c, language)? {
            polymorphic.push(c.clone());
        }
    }
    if polymorphic.is_empty() {
        return not_polymorphism_answer(first, language);
    }

    let rows = RowSystem::new(language, k, options)?;
    let orbit_targets: std::collections::HashSet<Operation> = polymorphic
        .iter()
        .flat_map(permutation_orbit)
        .collect();

    // Merge columns by (coefficients, candidate flag), keeping the first
    // operation seen as representative.
    let mut classes: HashMap<(Vec<i128>, bool), usize> = HashMap::new();
    let mut columns: Vec<(Operation, Vec<i128>, bool)> = Vec::new();
    let idempotent_only = contains_all_constants(language);
    let mut failure = None;
    for_each_operation(d, k, idempotent_only, u64::MAX, |g| {
        if failure.is_some() {
            return;
        }
        match rows.coefficients(g) {
            Ok(Some(coeffs)) => {
                let flag = orbit_targets.contains(g);
                let key = (coeffs, flag);
                if !classes.contains_key(&key) {
                    classes.insert(key.clone(), columns.len());
                    columns.push((g.clone(), key.0, flag));
                }
            }
            Ok(None) => {}
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }

    // Rows that every column satisfies are implied by Σw = 1 and dropped.
    // A column is dropped when another is no larger on every remaining row
    // and at least as good in the objective; moving its weight over keeps
    // any solution feasible, and the dual inequality for it follows from
    // the dominating one. Rows identical on the surviving columns are
    // kept once, the copies get dual 0.
    let active = |columns: &[(Operation, Vec<i128>, bool)]| -> Vec<usize> {
        (0..rows.rhs.len())
            .filter(|&r| columns.iter().any(|(_, c, _)| c[r] > rows.rhs[r]))
            .collect()
    };
    let initial_rows = active(&columns);
    let columns = prune_dominated(columns, &initial_rows);
    let mut kept_rows = Vec::new();
    let mut seen_rows = std::collections::HashSet::new();
    for r in active(&columns) {
        let key: Vec<i128> = columns
            .iter()
            .map(|(_, c, _)| c[r])
            .chain([rows.rhs[r]])
            .collect();
        if seen_rows.insert(key) {
            kept_rows.push(r);
        }
    }

    let mut lp = LinearProgram::new(Sense::Maximize);
    for (i, (_, _, flag)) in columns.iter().enumerate() {
        let cost = if *flag { BigRational::one() } else { BigRational::zero() };
        lp.add_var(format!("w{i}"), Bound::NonNegative, cost);
    }
    for &r in &kept_rows {
        lp.add_row(
            format!("avg{r}"),
            columns
                .iter()
                .enumerate()
                .map(|(i, (_, c, _))| (i, BigRational::from_integer(BigInt::from(c[r])))),
            RowRelation::Le,
            BigRational::from_integer(BigInt::from(rows.rhs[r])),
        )?;
    }
    lp.add_row(
        "sum",
        (0..columns.len()).map(|i| (i, BigRational::one())),
        RowRelation::Eq,
        BigRational::one(),
    )?;
    let outcome = solve_lp_with(&lp, options.simplex)?;
    let certificate_verified = verify_certificate(&lp, &outcome);
    if outcome.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "support LP is feasible and bounded but reported {:?}",
            outcome.status
        )));
    }
    let optimum = outcome.objective.clone().expect("optimal");

    if optimum.is_positive() {
        let mut weights: Vec<(Operation, BigRational)> = Vec::new();
        let mut found = None;
        for ((rep, _, flag), w) in columns.iter().zip(&outcome.primal) {
            if !w.is_positive() {
                continue;
            }
            let orbit = permutation_orbit(rep);
            if *flag && found.is_none() {
                found = polymorphic.iter().find(|c| orbit.contains(c)).cloned();
            }
            let share = w / BigRational::from_integer(BigInt::from(orbit.len()));
            weights.extend(orbit.into_iter().map(|g| (g, share.clone())));
        }
        let omega = FractionalOperation::new(weights)?;
        let operation = found.ok_or_else(|| Error::Internal("positive optimum without a candidate".into()))?;
        if omega.weight(&operation).is_zero() || !is_fractional_polymorphism(&omega, language)? {
            return Err(Error::Internal("support witness failed verification".into()));
        }
        return Ok(SuppMembership {
            member: true,
            operation,
            witness_fpol: Some(omega),
            witness_instance: None,
            not_polymorphism: false,
            lp_optimum: Some(optimum),
            certificate_verified,
        });
    }

    // Row duals of the maximisation are non-negative on ≤ rows.
    let mut z: Vec<BigRational> = vec![BigRational::zero(); rows.rhs.len()];
    for (r, y) in kept_rows.iter().zip(&outcome.dual) {
        z[*r] = y * &rows.scale[*r];
    }
    let witness = rows.witness_instance(language, &z, options)?;
    Ok(SuppMembership {
        member: false,
        operation: polymorphic[0].clone(),
        witness_fpol: None,
        witness_instance: Some(witness),
        not_polymorphism: false,
        lp_optimum: Some(optimum),
        certificate_verified,
    })
}

/// Drops columns dominated on `rows` by an earlier kept column.
fn prune_dominated(columns: Vec<(Operation, Vec<i128>, bool)>, rows: &[usize]) -> Vec<(Operation, Vec<i128>, bool)> {
    let mut order: Vec<(i128, bool, usize)> = columns
        .iter()
        .enumerate()
        .map(|(i, (_, c, flag))| (rows.iter().map(|&r| c[r]).sum(), !flag, i))
        .collect();
    order.sort();
    let mut kept: Vec<usize> = Vec::new();
    for &(_, _, b) in &order {
        let (_, cb, fb) = &columns[b];
        let dominated = kept.iter().any(|&a| {
            let (_, ca, fa) = &columns[a];
            (*fa || !*fb) && rows.iter().all(|&r| ca[r] <= cb[r])
        });
        if !dominated {
            kept.push(b);
        }
    }
    kept.sort_unstable();
    let mut keep = vec![false; columns.len()];
    for i in kept {
        keep[i] = true;
    }
    columns
        .into_iter()
        .zip(keep)
        .filter_map(|(c, k)| k.then_some(c))
        .collect()
}

pub fn is_language_polymorphism(f: &Operation, language: &Language) -> Result<bool> {
    for phi in language.relations() {
        if !is_polymorphism(f, phi)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn contains_all_constants(language: &Language) -> bool {
    let d = language.domain_size();
    (0..d).all(|a| {
        language.relations().iter().any(|r| {
            r.arity() == 1 && (0..d).all(|x| r.is_feasible(&[x]) == (x == a))
        })
    })
}

/// `{g(x_π(1), …, x_π(k)) : π ∈ S_k}`, sorted.
pub fn permutation_orbit(g: &Operation) -> Vec<Operation> {
    let k = g.arity();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    loop {
        let p = perm.clone();
        out.push(
            Operation::from_fn(g.domain(), k, |t| {
                let args: Vec<usize> = p.iter().map(|&i| t[i]).collect();
                g.apply(&args)
            })
            .expect("same table size"),
        );
        if !next_permutation(&mut perm) {
            break;
        }
    }
    out.sort();
    out.dedup();
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// The averaging rows, one per relation and multiset of `k` feasible tuples,
/// scaled to integers.
struct RowSystem {
    k: usize,
    d: usize,
    /// Per relation: dense integer values (`None` = infeasible), arity.
    relations: Vec<(Vec<Option<i128>>, usize)>,
    /// Every ordered vector: (relation, row, argument index per coordinate,
    /// the vector's feasible tuples).
    vectors: Vec<(usize, usize, Vec<usize>, Vec<Vec<usize>>)>,
    /// `#orderings · Σ_j ψ(x_j)` per row.
    rhs: Vec<i128>,
    /// Factor turning a row dual into the per-ordering multiplicity `z`.
    scale: Vec<BigRational>,
}

impl RowSystem {
    fn new(language: &Language, k: usize, options: &SuppOptions) -> Result<Self> {
        let d = language.domain_size();
        let mut relations = Vec::new();
        let mut vectors = Vec::new();
        let mut rhs: Vec<i128> = Vec::new();
        let mut scale = Vec::new();
        let mut total: u64 = 0;
        for (ri, phi) in language.relations().iter().enumerate() {
            let values = phi.dense_values()?;
            let finite: Vec<&BigRational> = values.iter().filter_map(|v| v.finite()).collect();
            let lcm = lcm_of_denominators(finite.iter().copied());
            let lcm_q = BigRational::from_integer(lcm.clone());
            let ints = values
                .iter()
                .map(|v| match v.finite() {
                    None => Ok(None),
                    Some(q) => (q * &lcm_q)
                        .to_integer()
                        .to_i64()
                        .map(|x| Some(x as i128))
                        .ok_or_else(|| Error::Arithmetic("relation value too large".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            let feas = phi.feasible_tuples()?;
            total = checked_pow(feas.len(), k)
                .and_then(|c| c.checked_add(total))
                .filter(|&t| t <= options.max_vectors)
                .ok_or_else(|| Error::Resource("too many tuple vectors for the support LP".into()))?;
            let m = phi.arity();
            let mut row_of: HashMap<Vec<usize>, usize> = HashMap::new();
            let indices: Vec<usize> = (0..feas.len()).collect();
            for_each_vector(&indices, k, |picked| {
                let picked: Vec<usize> = picked.iter().map(|&&i| i).collect();
                let mut key = picked.clone();
                key.sort_unstable();
                let row = *row_of.entry(key).or_insert_with(|| {
                    rhs.push(0);
                    scale.push(BigRational::zero());
                    rhs.len() - 1
                });
                let args: Vec<usize> = (0..m)
                    .map(|j| {
                        let column: Vec<usize> = picked.iter().map(|&i| feas[i][j]).collect();
                        tuple_index(&column, d) as usize
                    })
                    .collect();
                let sum: i128 = picked
                    .iter()
                    .map(|&i| ints[tuple_index(&feas[i], d) as usize].expect("feasible"))
                    .sum();
                rhs[row] += sum;
                vectors.push((ri, row, args, picked.iter().map(|&i| feas[i].clone()).collect()));
                true
            });
            for &row in row_of.values() {
                scale[row] = lcm_q.clone();
            }
            relations.push((ints, m));
        }
        Ok(RowSystem {
            k,
            d,
            relations,
            vectors,
            rhs,
            scale,
        })
    }

    /// Column of `g`: `Σ_{orderings} k·ψ(g(x))` per row, or `None` when `g`
    /// is not a polymorphism.
    fn coefficients(&self, g: &Operation) -> Result<Option<Vec<i128>>> {
        let table = g.table();
        let mut out = vec![0i128; self.rhs.len()];
        for (ri, row, args, _) in &self.vectors {
            let (values, _) = &self.relations[*ri];
            let idx = args.iter().fold(0usize, |acc, &a| acc * self.d + table[a]);
            match values[idx] {
                Some(v) => out[*row] += self.k as i128 * v,
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    /// `I_f`: for every ordered vector `(x_1..x_k)` of row `r`, `z_r` copies
    /// of its relation on the variables `(x_1[j], …, x_k[j])`, scaled to
    /// integers. Crisp relations are added once per vector so that
    /// assignments breaking them are infeasible.
    fn witness_instance(&self, language: &Language, z: &[BigRational], options: &SuppOptions) -> Result<Instance> {
        let lcm = lcm_of_denominators(z.iter());
        let lcm_q = BigRational::from_integer(lcm);
        let ints: Vec<BigInt> = z.iter().map(|v| (v * &lcm_q).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        let g = if g.is_zero() { BigInt::one() } else { g };
        let counts: Vec<u64> = ints
            .iter()
            .map(|v| (v / &g).to_u64())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Resource("witness multiplicities too large".into()))?;
        let n = checked_pow(self.d, self.k).expect("small") as usize;
        let mut inst = Instance::new(Arc::new(language.clone()), n);
        let mut added: u64 = 0;
        for (ri, row, args, _) in &self.vectors {
            let crisp = language.relation(*ri).is_crisp();
            let copies = if crisp { counts[*row].max(1) } else { counts[*row] };
            added += copies;
            if added > options.max_witness_constraints {
                return Err(Error::Resource("witness instance too large".into()));
            }
            for _ in 0..copies {
                inst.add(*ri, args.clone())?;
            }
        }
        Ok(inst)
    }
}

/// `f ∉ pol(Γ)`: the violated relation on the offending vector, lifted to
/// variables `D^k`.
fn not_polymorphism_answer(f: &Operation, language: &Language) -> Result<SuppMembership> {
    let d = language.domain_size();
    let k = f.arity();
    for (ri, phi) in language.relations().iter().enumerate() {
        if let Some(rows) = polymorphism_violation(f, phi)? {
            let n = checked_pow(d, k).expect("small") as usize;
            let mut inst = Instance::new(Arc::new(language.clone()), n);
            let scope = (0..phi.arity())
                .map(|j| {
                    let column: Vec<usize> = rows.iter().map(|r| r[j]).collect();
                    tuple_index(&column, d) as usize
                })
                .collect();
            inst.add(ri, scope)?;
            return Ok(SuppMembership {
                member: false,
                operation: f.clone(),
                witness_fpol: None,
                witness_instance: Some(inst),
                not_polymorphism: true,
                lp_optimum: None,
                certificate_verified: true,
            });
        }
    }
    Err(Error::Internal("no violated relation found".into()))
}

/// The operation `D^k → D` read off an assignment of a witness instance.
pub fn assignment_as_operation(d: usize, k: usize, assignment: &[usize]) -> Result<Operation> {
    Operation::from_table(d, k, assignment.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;
    use crate::model::Domain;
    use crate::oracle::brute_force;

    fn lang(rels: impl IntoIterator<Item = crate::model::WeightedRelation>) -> Language {
        Language::with_relations(Domain::new(2).unwrap(), rels).unwrap()
    }

    fn projection_table(d: usize, k: usize, i: usize) -> Vec<usize> {
        Operation::projection(d, k, i).unwrap().table().to_vec()
    }

    #[test]
    fn min_supports_cut() {
        let l = lang([library::phi_cut()]);
        let ans = supp_membership(&Operation::min(2), &l, &SuppOptions::default()).unwrap();
        assert!(ans.member);
        assert!(ans.certificate_verified);
        let omega = ans.witness_fpol.unwrap();
        assert!(is_fractional_polymorphism(&omega, &l).unwrap());
        assert!(omega.weight(&Operation::min(2)).is_positive());
    }

    #[test]
    fn min_not_in_supp_of_xor() {
        let l = lang([library::phi_xor()]);
        let f = Operation::min(2);
        let ans = supp_membership(&f, &l, &SuppOptions::default()).unwrap();
        assert!(!ans.member);
        assert!(ans.certificate_verified);
        let inst = ans.witness_instance.unwrap();
        assert_eq!(inst.num_vars(), 4);
        let bf = brute_force(&inst, 1 << 16).unwrap();
        for i in 0..2 {
            assert!(bf.optima.iter().any(|a| a.0 == projection_table(2, 2, i)));
        }
        assert!(!bf.optima.iter().any(|a| a.0 == f.table()));
    }

    #[test]
    fn projections_are_always_members() {
        let l = lang([library::phi_xor(), library::neq(2), library::phi_u()]);
        for k in 1..=3 {
            for i in 0..k {
                let p = Operation::projection(2, k, i).unwrap();
                let ans = supp_membership(&p, &l, &SuppOptions::default()).unwrap();
                assert!(ans.member, "proj {i} of {k}");
                assert!(is_fractional_polymorphism(&ans.witness_fpol.unwrap(), &l).unwrap());
            }
        }
    }

    #[test]
    fn non_polymorphism_short_circuits() {
        let l = lang([library::neq(2)]);
        let ans = supp_membership(&Operation::min(2), &l, &SuppOptions::default()).unwrap();
        assert!(!ans.member && ans.not_polymorphism);
        let inst = ans.witness_instance.unwrap();
        let bf = brute_force(&inst, 1 << 16).unwrap();
        assert!(!bf.optima.iter().any(|a| a.0 == Operation::min(2).table()));
    }

    #[test]
    fn orbits() {
        assert_eq!(permutation_orbit(&Operation::min(2)).len(), 1);
        assert_eq!(permutation_orbit(&Operation::projection(2, 3, 0).unwrap()).len(), 3);
    }

    #[test]
    fn operation_cap() {
        let l = Language::with_relations(Domain::new(3).unwrap(), [library::neq(3)]).unwrap();
        let f = Operation::majority(3);
        assert!(matches!(
            supp_membership(&f, &l, &SuppOptions::default()),
            Err(Error::Resource(_))
        ));
    }
}
