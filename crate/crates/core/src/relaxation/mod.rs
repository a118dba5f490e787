//! The Sherali–Adams `SA(k, ℓ)` relaxation.
//!
//! Every term `i` carries a distribution `λ_i` over the assignments of its
//! scope `S_i` (a sorted set of variables). The program is
//!
//! ```text
//! min  Σ_i Σ_s λ_i(s) φ_i(s)
//! s.t. λ_j(t) − Σ_{s : s|S_j = t} λ_i(s) = 0   for i ≠ j, S_j ⊆ S_i, |S_j| ≤ k
//!      Σ_s λ_i(s) = 1                          for every term i
//!      λ ≥ 0
//! ```
//!
//! with a constant-0 padding term for every non-empty `S ⊆ V`, `|S| ≤ ℓ`,
//! that no constraint covers. Tuples of infinite cost have no column.

mod lift;
mod slackness;
mod solve;

pub use lift::{apply_fractional, saturate_support, supports_closed_under};
pub use slackness::{check_complementary_slackness, SlacknessReport};
pub use solve::{dump_solution, point_of_assignment, solve_sa, solve_sa_with, solve_sa_with_costs, SaPoint, SaSolution, SaStatus};

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lp::{Bound, LinearProgram, RowRelation, Sense};
use crate::model::Instance;
use crate::rational::ExtRational;
use crate::tuples::{all_tuples, checked_pow, subsets_up_to};

/// Largest supported `ℓ`.
pub const MAX_LEVEL: usize = 4;

/// Cap on the number of λ columns.
pub const MAX_COLUMNS: u64 = 1_000_000;

/// Prefix of padding term names.
pub const PAD_PREFIX: &str = "__pad_";

/// Labels each variable may take. Pinning a variable is a one-label mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMask {
    allowed: Vec<Vec<bool>>,
}

impl LabelMask {
    pub fn full(num_vars: usize, d: usize) -> Self {
        LabelMask {
            allowed: vec![vec![true; d]; num_vars],
        }
    }

    /// Every variable restricted to `labels`.
    pub fn labels(num_vars: usize, d: usize, labels: &[usize]) -> Self {
        let mut row = vec![false; d];
        for &l in labels {
            row[l] = true;
        }
        LabelMask {
            allowed: vec![row; num_vars],
        }
    }

    pub fn pin(&mut self, var: usize, label: usize) {
        for (l, a) in self.allowed[var].iter_mut().enumerate() {
            *a = l == label;
        }
    }

    pub fn allows(&self, var: usize, label: usize) -> bool {
        self.allowed[var][label]
    }

    fn allows_tuple(&self, scope: &[usize], tuple: &[usize]) -> bool {
        scope.iter().zip(tuple).all(|(&v, &x)| self.allowed[v][x])
    }
}

/// One block of λ variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaTerm {
    /// Index into the instance's constraints; `None` for padding.
    pub constraint: Option<usize>,
    pub name: String,
    /// Sorted, distinct variables.
    pub scope: Vec<usize>,
    /// Columns of this term: allowed finite-cost tuples over `scope` in
    /// lexicographic order.
    pub tuples: Vec<Vec<usize>>,
    pub values: Vec<BigRational>,
    offset: usize,
}

impl SaTerm {
    pub fn is_padding(&self) -> bool {
        self.constraint.is_none()
    }

    /// Column index of `tuple` within this term.
    pub fn position(&self, tuple: &[usize]) -> Option<usize> {
        self.tuples.binary_search_by(|t| t.as_slice().cmp(tuple)).ok()
    }

    /// Cost of `tuple`, `inf` when it has no column.
    pub fn value(&self, tuple: &[usize]) -> ExtRational {
        self.position(tuple)
            .map_or(ExtRational::Infinity, |p| ExtRational::Finite(self.values[p].clone()))
    }

    pub fn offset(&self) -> usize {
        self.offset
    }
}

/// What an LP row of the program encodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SaRow {
    /// `Σ_s λ_term(s) = 1`; its dual is `z_term`.
    Sum { term: usize },
    /// `λ_sub(tuple) = Σ_{s|S_sub = tuple} λ_sup(s)`; its dual is
    /// `y(sub, tuple, sup)`.
    Marginal {
        sub: usize,
        tuple: Vec<usize>,
        sup: usize,
    },
}

#[derive(Clone, Debug)]
pub struct SaProgram {
    pub k: usize,
    pub l: usize,
    pub instance: Instance,
    pub terms: Vec<SaTerm>,
    /// Aligned with `lp.rows`.
    pub rows: Vec<SaRow>,
    pub lp: LinearProgram,
    scope_index: HashMap<Vec<usize>, Vec<usize>>,
}

impl SaProgram {
    pub fn domain_size(&self) -> usize {
        self.instance.domain_size()
    }

    pub fn num_columns(&self) -> usize {
        self.lp.num_vars()
    }

    /// Terms whose scope is exactly `scope` (sorted).
    pub fn terms_with_scope(&self, scope: &[usize]) -> &[usize] {
        self.scope_index.get(scope).map_or(&[], Vec::as_slice)
    }

    /// Row index of the `Σ λ_i = 1` row of each term.
    pub fn sum_rows(&self) -> Vec<usize> {
        let mut out = vec![0; self.terms.len()];
        for (r, row) in self.rows.iter().enumerate() {
            if let SaRow::Sum { term } = row {
                out[*term] = r;
            }
        }
        out
    }

    /// The same polytope with per-term, per-column costs replaced.
    pub fn lp_with_costs(&self, costs: &[Vec<BigRational>]) -> Result<LinearProgram> {
        if costs.len() != self.terms.len()
            || costs.iter().zip(&self.terms).any(|(c, t)| c.len() != t.tuples.len())
        {
            return Err(Error::Structural("cost vector does not match the program".into()));
        }
        let mut lp = self.lp.clone();
        lp.objective = costs.iter().flatten().cloned().collect();
        Ok(lp)
    }
}

pub fn build_sa(instance: &Instance, k: usize, l: usize) -> Result<SaProgram> {
    build_sa_masked(
        instance,
        k,
        l,
        &LabelMask::full(instance.num_vars(), instance.domain_size()),
    )
}

fn pad_name(scope: &[usize]) -> String {
    let vars: Vec<String> = scope.iter().map(|v| format!("x{v}")).collect();
    format!("{PAD_PREFIX}{}", vars.join("_"))
}

/// Feasible, mask-allowed tuples of a constraint over its sorted distinct
/// scope. Repeated variables keep only tuples that agree on them.
fn constraint_tuples(
    instance: &Instance,
    index: usize,
    mask: &LabelMask,
) -> Result<(Vec<usize>, BTreeMap<Vec<usize>, BigRational>)> {
    let c = &instance.constraints()[index];
    let rel = instance.relation_of(c);
    let mut scope = c.scope.clone();
    scope.sort_unstable();
    scope.dedup();
    let pos: Vec<usize> = c
        .scope
        .iter()
        .map(|v| scope.binary_search(v).expect("variable in scope"))
        .collect();
    let mut out = BTreeMap::new();
    'tuples: for t in rel.feasible_tuples()? {
        let mut s = vec![usize::MAX; scope.len()];
        for (p, &x) in t.iter().enumerate() {
            let slot = &mut s[pos[p]];
            if *slot != usize::MAX && *slot != x {
                continue 'tuples;
            }
            *slot = x;
        }
        if mask.allows_tuple(&scope, &s) {
            let v = rel.value(&t).finite().cloned().expect("feasible tuple");
            out.insert(s, v);
        }
    }
    Ok((scope, out))
}

/// Builds `SA(k, ℓ)` with variables restricted by `mask`.
pub fn build_sa_masked(
    instance: &Instance,
    k: usize,
    l: usize,
    mask: &LabelMask,
) -> Result<SaProgram> {
    if k == 0 || k > l || l > MAX_LEVEL {
        return Err(Error::Structural(format!(
            "need 1 ≤ k ≤ ℓ ≤ {MAX_LEVEL}, got k = {k}, ℓ = {l}"
        )));
    }
    let d = instance.domain_size();
    let n = instance.num_vars();
    let mut terms: Vec<SaTerm> = Vec::new();
    let mut columns: u64 = 0;
    let mut push_term = |terms: &mut Vec<SaTerm>,
                         constraint: Option<usize>,
                         name: String,
                         scope: Vec<usize>,
                         entries: BTreeMap<Vec<usize>, BigRational>|
     -> Result<()> {
        columns += entries.len() as u64;
        if columns > MAX_COLUMNS {
            return Err(Error::Resource(format!(
                "SA program needs more than {MAX_COLUMNS} columns"
            )));
        }
        let (tuples, values) = entries.into_iter().unzip();
        terms.push(SaTerm {
            constraint,
            name,
            scope,
            tuples,
            values,
            offset: 0,
        });
        Ok(())
    };

    for i in 0..instance.constraints().len() {
        let (scope, entries) = constraint_tuples(instance, i, mask)?;
        let name = instance.relation_of(&instance.constraints()[i]).name().to_string();
        push_term(&mut terms, Some(i), name, scope, entries)?;
    }
    let covered: std::collections::HashSet<Vec<usize>> =
        terms.iter().map(|t| t.scope.clone()).collect();
    let subsets = subsets_up_to(n, l);
    for scope in subsets.into_iter().filter(|s| !s.is_empty()) {
        if covered.contains(&scope) {
            continue;
        }
        if checked_pow(d, scope.len()).is_none_or(|c| c > MAX_COLUMNS) {
            return Err(Error::Resource("padding scope too large".into()));
        }
        let entries = all_tuples(d, scope.len())
            .filter(|t| mask.allows_tuple(&scope, t))
            .map(|t| (t, BigRational::zero()))
            .collect();
        push_term(&mut terms, None, pad_name(&scope), scope, entries)?;
    }

    let mut lp = LinearProgram::new(Sense::Minimize);
    for (i, term) in terms.iter_mut().enumerate() {
        term.offset = lp.num_vars();
        for (t, v) in term.tuples.iter().zip(&term.values) {
            let labels: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            lp.add_var(format!("l{i}_{}", labels.join("_")), Bound::NonNegative, v.clone());
        }
    }
    let mut scope_index: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (i, term) in terms.iter().enumerate() {
        scope_index.entry(term.scope.clone()).or_default().push(i);
    }

    let mut rows = Vec::new();
    let one = BigRational::one();
    for (i, term) in terms.iter().enumerate() {
        lp.add_row(
            format!("sum{i}"),
            (0..term.tuples.len()).map(|c| (term.offset + c, one.clone())),
            RowRelation::Eq,
            one.clone(),
        )?;
        rows.push(SaRow::Sum { term: i });
        let m = term.scope.len();
        for positions in subsets_up_to(m, k).into_iter().filter(|p| !p.is_empty()) {
            let sub_scope: Vec<usize> = positions.iter().map(|&p| term.scope[p]).collect();
            let Some(subs) = scope_index.get(&sub_scope) else {
                continue;
            };
            let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
            for (c, s) in term.tuples.iter().enumerate() {
                let t: Vec<usize> = positions.iter().map(|&p| s[p]).collect();
                groups.entry(t).or_default().push(term.offset + c);
            }
            for &j in subs.iter().filter(|&&j| j != i) {
                let sub = &terms[j];
                for t in all_tuples(d, sub_scope.len()) {
                    let own = sub.position(&t).map(|c| sub.offset + c);
                    let projected = groups.get(&t);
                    if own.is_none() && projected.is_none() {
                        continue;
                    }
                    let coeffs = own.into_iter().map(|c| (c, one.clone())).chain(
                        projected
                            .into_iter()
                            .flatten()
                            .map(|&c| (c, -one.clone())),
                    );
                    let labels: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                    lp.add_row(
                        format!("m{j}_{}_{i}", labels.join("_")),
                        coeffs,
                        RowRelation::Eq,
                        BigRational::zero(),
                    )?;
                    rows.push(SaRow::Marginal {
                        sub: j,
                        tuple: t,
                        sup: i,
                    });
                }
            }
        }
    }
    Ok(SaProgram {
        k,
        l,
        instance: instance.clone(),
        terms,
        rows,
        lp,
        scope_index,
    })
}
