//! `(k, ℓ)`-minimality for crisp networks.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::relaxation::{SaPoint, SaProgram};
use crate::tuples::{all_tuples, subsets_up_to};

/// A crisp network: scopes (sorted, distinct variables) with allowed tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrispNetwork {
    pub num_vars: usize,
    pub domain: usize,
    pub constraints: Vec<(Vec<usize>, BTreeSet<Vec<usize>>)>,
}

impl CrispNetwork {
    pub fn new(num_vars: usize, domain: usize) -> Self {
        CrispNetwork {
            num_vars,
            domain,
            constraints: Vec::new(),
        }
    }

    pub fn add(
        &mut self,
        scope: Vec<usize>,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<()> {
        if scope.is_empty()
            || scope.windows(2).any(|w| w[0] >= w[1])
            || scope.iter().any(|&v| v >= self.num_vars)
        {
            return Err(Error::Structural(format!(
                "scope {scope:?} must be non-empty, sorted, distinct and in range"
            )));
        }
        let tuples: BTreeSet<Vec<usize>> = tuples.into_iter().collect();
        if tuples
            .iter()
            .any(|t| t.len() != scope.len() || t.iter().any(|&x| x >= self.domain))
        {
            return Err(Error::Structural("tuple does not fit its scope".into()));
        }
        self.constraints.push((scope, tuples));
        Ok(())
    }

    /// Feasibility network of an instance; repeated variables in a scope
    /// keep only tuples that agree on them.
    pub fn from_instance(instance: &Instance) -> Result<Self> {
        let mut net = CrispNetwork::new(instance.num_vars(), instance.domain_size());
        for c in instance.constraints() {
            let mut scope = c.scope.clone();
            scope.sort_unstable();
            scope.dedup();
            let mut tuples = BTreeSet::new();
            'tuples: for t in instance.relation_of(c).feasible_tuples()? {
                let mut s = vec![usize::MAX; scope.len()];
                for (v, &x) in c.scope.iter().zip(&t) {
                    let slot = &mut s[scope.binary_search(v).expect("in scope")];
                    if *slot != usize::MAX && *slot != x {
                        continue 'tuples;
                    }
                    *slot = x;
                }
                tuples.insert(s);
            }
            net.add(scope, tuples)?;
        }
        Ok(net)
    }

    /// The support structure `supp(λ_i)` of an SA point.
    pub fn from_supports(program: &SaProgram, point: &SaPoint) -> Self {
        let mut net = CrispNetwork::new(program.instance.num_vars(), program.domain_size());
        for (i, term) in program.terms.iter().enumerate() {
            net.constraints
                .push((term.scope.clone(), point.support(program, i).into_iter().collect()));
        }
        net
    }

    pub fn satisfies(&self, assignment: &[usize]) -> bool {
        self.constraints.iter().all(|(scope, tuples)| {
            let t: Vec<usize> = scope.iter().map(|&v| assignment[v]).collect();
            tuples.contains(&t)
        })
    }

    /// Adds `D^S` for every non-empty `S`, `|S| ≤ ℓ`, that is not a scope.
    pub fn pad(&mut self, l: usize) {
        let present: BTreeSet<Vec<usize>> = self.constraints.iter().map(|(s, _)| s.clone()).collect();
        for scope in subsets_up_to(self.num_vars, l) {
            if scope.is_empty() || present.contains(&scope) {
                continue;
            }
            let full = all_tuples(self.domain, scope.len()).collect();
            self.constraints.push((scope, full));
        }
    }

    /// Pairs `(i, j, positions)` with `S_j ⊆ S_i`, `|S_j| ≤ k`, `i ≠ j`, where
    /// `positions` locate `S_j` inside `S_i`.
    fn projection_pairs(&self, k: usize) -> Vec<(usize, usize, Vec<usize>)> {
        let mut by_scope: HashMap<&[usize], Vec<usize>> = HashMap::new();
        for (j, (scope, _)) in self.constraints.iter().enumerate() {
            by_scope.entry(scope.as_slice()).or_default().push(j);
        }
        let mut out = Vec::new();
        for (i, (scope, _)) in self.constraints.iter().enumerate() {
            for positions in subsets_up_to(scope.len(), k) {
                if positions.is_empty() {
                    continue;
                }
                let sub: Vec<usize> = positions.iter().map(|&p| scope[p]).collect();
                for &j in by_scope.get(sub.as_slice()).into_iter().flatten() {
                    if j != i {
                        out.push((i, j, positions.clone()));
                    }
                }
            }
        }
        out
    }
}

fn project(tuples: &BTreeSet<Vec<usize>>, positions: &[usize]) -> BTreeSet<Vec<usize>> {
    tuples
        .iter()
        .map(|t| positions.iter().map(|&p| t[p]).collect())
        .collect()
}

/// Prunes to the `(k, ℓ)`-minimal fixpoint. `None` means some constraint
/// became empty, so the network has no solution.
pub fn establish_minimality(net: &CrispNetwork, k: usize, l: usize) -> Result<Option<CrispNetwork>> {
    if k == 0 || k > l {
        return Err(Error::Structural(format!("need 1 ≤ k ≤ ℓ, got k = {k}, ℓ = {l}")));
    }
    let mut net = net.clone();
    net.pad(l);
    let pairs = net.projection_pairs(k);
    loop {
        let mut changed = false;
        for (i, j, positions) in &pairs {
            let projected = project(&net.constraints[*i].1, positions);
            let cj = &mut net.constraints[*j].1;
            let before = cj.len();
            cj.retain(|t| projected.contains(t));
            changed |= cj.len() != before;
            let cj = net.constraints[*j].1.clone();
            let ci = &mut net.constraints[*i].1;
            let before = ci.len();
            ci.retain(|s| cj.contains(&positions.iter().map(|&p| s[p]).collect::<Vec<_>>()));
            changed |= ci.len() != before;
        }
        if net.constraints.iter().any(|(_, c)| c.is_empty()) {
            return Ok(None);
        }
        if !changed {
            return Ok(Some(net));
        }
    }
}

/// Both conditions of `(k, ℓ)`-minimality, checked exactly.
pub fn is_minimal(net: &CrispNetwork, k: usize, l: usize) -> bool {
    let present: BTreeSet<&[usize]> = net.constraints.iter().map(|(s, _)| s.as_slice()).collect();
    let all_scopes = subsets_up_to(net.num_vars, l)
        .into_iter()
        .filter(|s| !s.is_empty())
        .all(|s| present.contains(s.as_slice()));
    all_scopes
        && net
            .projection_pairs(k)
            .iter()
            .all(|(i, j, positions)| project(&net.constraints[*i].1, positions) == net.constraints[*j].1)
}
