//! Weighted relations, languages, instances and assignments.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::ExtRational;
use crate::tuples::{all_tuples, checked_pow, index_to_tuple, tuple_index};

/// Tables with at most this many entries are stored densely.
pub const DENSE_TABLE_LIMIT: u64 = 1_000_000;

/// Largest arity accepted anywhere.
pub const MAX_ARITY: usize = 32;

/// Upper bound on tuple enumeration when a sparse table has a finite default.
pub const FEASIBLE_ENUMERATION_LIMIT: u64 = 10_000_000;

/// Finite label set `{0, …, d-1}`.
///
/// Input files must declare at least two labels. Single-label domains only
/// arise as cores computed from larger languages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Domain(usize);

impl Domain {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > 255 {
            return Err(Error::Structural(format!(
                "domain size {size} outside 1..=255"
            )));
        }
        Ok(Domain(size))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn labels(self) -> std::ops::Range<usize> {
        0..self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Table {
    Dense(Vec<ExtRational>),
    Sparse {
        default: ExtRational,
        entries: BTreeMap<u64, ExtRational>,
    },
}

/// A total map `D^m → Q ∪ {∞}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedRelation {
    name: String,
    domain: usize,
    arity: usize,
    table: Table,
}

impl WeightedRelation {
    /// Builds a dense table by evaluating `f` on every tuple.
    pub fn from_fn(
        name: impl Into<String>,
        domain: usize,
        arity: usize,
        f: impl Fn(&[usize]) -> ExtRational,
    ) -> Result<Self> {
        let size = Self::table_size(domain, arity)?;
        if size > DENSE_TABLE_LIMIT {
            return Err(Error::Resource(format!(
                "dense table of {size} entries exceeds {DENSE_TABLE_LIMIT}"
            )));
        }
        let values = all_tuples(domain, arity).map(|t| f(&t)).collect();
        Ok(WeightedRelation {
            name: name.into(),
            domain,
            arity,
            table: Table::Dense(values),
        })
    }

    /// Builds a table from explicit entries; unlisted tuples take `default`.
    pub fn from_entries(
        name: impl Into<String>,
        domain: usize,
        arity: usize,
        default: ExtRational,
        entries: impl IntoIterator<Item = (Vec<usize>, ExtRational)>,
    ) -> Result<Self> {
        let size = Self::table_size(domain, arity)?;
        let mut map = BTreeMap::new();
        for (tuple, value) in entries {
            if tuple.len() != arity {
                return Err(Error::Structural(format!(
                    "tuple of length {} in relation of arity {arity}",
                    tuple.len()
                )));
            }
            if let Some(&x) = tuple.iter().find(|&&x| x >= domain) {
                return Err(Error::Structural(format!("label {x} out of range")));
            }
            map.insert(tuple_index(&tuple, domain), value);
        }
        let table = if size <= DENSE_TABLE_LIMIT {
            let mut values = vec![default; size as usize];
            for (i, v) in map {
                values[i as usize] = v;
            }
            Table::Dense(values)
        } else {
            map.retain(|_, v| *v != default);
            Table::Sparse {
                default,
                entries: map,
            }
        };
        Ok(WeightedRelation {
            name: name.into(),
            domain,
            arity,
            table,
        })
    }

    /// Crisp relation: 0 on `tuples`, +∞ elsewhere.
    pub fn crisp(
        name: impl Into<String>,
        domain: usize,
        arity: usize,
        tuples: impl IntoIterator<Item = Vec<usize>>,
    ) -> Result<Self> {
        Self::from_entries(
            name,
            domain,
            arity,
            ExtRational::Infinity,
            tuples.into_iter().map(|t| (t, ExtRational::zero())),
        )
    }

    fn table_size(domain: usize, arity: usize) -> Result<u64> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::Structural(format!(
                "arity {arity} outside 1..={MAX_ARITY}"
            )));
        }
        checked_pow(domain, arity)
            .filter(|&n| n < u64::MAX / 2)
            .ok_or_else(|| Error::Resource(format!("table {domain}^{arity} too large")))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn tuple_count(&self) -> u64 {
        checked_pow(self.domain, self.arity).expect("validated at construction")
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.table, Table::Dense(_))
    }

    pub fn value_at(&self, index: u64) -> &ExtRational {
        match &self.table {
            Table::Dense(v) => &v[index as usize],
            Table::Sparse { default, entries } => entries.get(&index).unwrap_or(default),
        }
    }

    pub fn value(&self, tuple: &[usize]) -> &ExtRational {
        debug_assert_eq!(tuple.len(), self.arity);
        self.value_at(tuple_index(tuple, self.domain))
    }

    pub fn is_feasible(&self, tuple: &[usize]) -> bool {
        self.value(tuple).is_finite()
    }

    /// The sparse default, if the table is sparse.
    pub fn sparse_default(&self) -> Option<&ExtRational> {
        match &self.table {
            Table::Dense(_) => None,
            Table::Sparse { default, .. } => Some(default),
        }
    }

    /// Entries that differ from `default`, in index order.
    pub fn entries_except(&self, default: &ExtRational) -> Vec<(u64, ExtRational)> {
        match &self.table {
            Table::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| *x != default)
                .map(|(i, x)| (i as u64, x.clone()))
                .collect(),
            Table::Sparse {
                default: d,
                entries,
            } => {
                let mut out: Vec<(u64, ExtRational)> = entries
                    .iter()
                    .filter(|(_, x)| *x != default)
                    .map(|(&i, x)| (i, x.clone()))
                    .collect();
                if d != default {
                    // Only reachable for tables above the dense limit.
                    let size = self.tuple_count();
                    let listed: std::collections::BTreeSet<u64> =
                        entries.keys().copied().collect();
                    out.extend(
                        (0..size)
                            .filter(|i| !listed.contains(i))
                            .map(|i| (i, d.clone())),
                    );
                    out.sort_by_key(|(i, _)| *i);
                }
                out
            }
        }
    }

    /// Indices of feasible tuples in increasing order.
    pub fn feasible_indices(&self) -> Result<Vec<u64>> {
        match &self.table {
            Table::Dense(v) => Ok(v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.is_finite())
                .map(|(i, _)| i as u64)
                .collect()),
            Table::Sparse { default, entries } => {
                if default.is_infinite() {
                    Ok(entries
                        .iter()
                        .filter(|(_, x)| x.is_finite())
                        .map(|(&i, _)| i)
                        .collect())
                } else {
                    let size = self.tuple_count();
                    if size > FEASIBLE_ENUMERATION_LIMIT {
                        return Err(Error::Resource(format!(
                            "relation `{}` has {size} tuples with a finite default",
                            self.name
                        )));
                    }
                    Ok((0..size).filter(|&i| self.value_at(i).is_finite()).collect())
                }
            }
        }
    }

    /// Feasible tuples in lexicographic order.
    pub fn feasible_tuples(&self) -> Result<Vec<Vec<usize>>> {
        Ok(self
            .feasible_indices()?
            .into_iter()
            .map(|i| index_to_tuple(i, self.domain, self.arity))
            .collect())
    }

    /// Values of all tuples, densely. Fails above the dense limit.
    pub fn dense_values(&self) -> Result<Vec<ExtRational>> {
        match &self.table {
            Table::Dense(v) => Ok(v.clone()),
            Table::Sparse { .. } => Err(Error::Resource(format!(
                "relation `{}` is too large for a dense view",
                self.name
            ))),
        }
    }

    pub fn is_crisp(&self) -> bool {
        let zero = ExtRational::zero();
        match &self.table {
            Table::Dense(v) => v.iter().all(|x| x.is_infinite() || *x == zero),
            Table::Sparse { default, entries } => std::iter::once(default)
                .chain(entries.values())
                .all(|x| x.is_infinite() || *x == zero),
        }
    }

    /// Smallest finite value, if any tuple is feasible.
    pub fn min_finite(&self) -> Option<ExtRational> {
        self.finite_values().min().cloned()
    }

    /// Largest finite value, if any tuple is feasible.
    pub fn max_finite(&self) -> Option<ExtRational> {
        self.finite_values().max().cloned()
    }

    fn finite_values(&self) -> Box<dyn Iterator<Item = &ExtRational> + '_> {
        match &self.table {
            Table::Dense(v) => Box::new(v.iter().filter(|x| x.is_finite())),
            Table::Sparse { default, entries } => {
                let base = entries.values().filter(|x| x.is_finite());
                if default.is_finite() && (entries.len() as u64) < self.tuple_count() {
                    Box::new(base.chain(std::iter::once(default)))
                } else {
                    Box::new(base)
                }
            }
        }
    }

    /// The crisp feasibility relation: 0 where finite, +∞ elsewhere.
    pub fn feas_relation(&self) -> WeightedRelation {
        let map = |x: &ExtRational| {
            if x.is_finite() {
                ExtRational::zero()
            } else {
                ExtRational::Infinity
            }
        };
        let table = match &self.table {
            Table::Dense(v) => Table::Dense(v.iter().map(map).collect()),
            Table::Sparse { default, entries } => Table::Sparse {
                default: map(default),
                entries: entries.iter().map(|(&i, x)| (i, map(x))).collect(),
            },
        };
        WeightedRelation {
            name: format!("feas_{}", self.name),
            domain: self.domain,
            arity: self.arity,
            table,
        }
    }

    /// The crisp relation of tuples attaining the minimum value.
    pub fn opt_relation(&self) -> Result<WeightedRelation> {
        let tuples = self.feasible_tuples()?;
        let best = tuples.iter().map(|t| self.value(t)).min().cloned();
        let keep: Vec<Vec<usize>> = match best {
            Some(b) => tuples.into_iter().filter(|t| *self.value(t) == b).collect(),
            None => Vec::new(),
        };
        WeightedRelation::crisp(format!("opt_{}", self.name), self.domain, self.arity, keep)
    }

    /// Restriction onto the labels `keep` (sorted, distinct), relabelled so
    /// that `keep[i]` becomes `i`.
    pub fn restrict(&self, keep: &[usize]) -> Result<WeightedRelation> {
        let d = keep.len();
        WeightedRelation::from_fn(self.name.clone(), d, self.arity, |t| {
            let orig: Vec<usize> = t.iter().map(|&x| keep[x]).collect();
            self.value(&orig).clone()
        })
    }
}

/// A finite set of named weighted relations over one domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Language {
    domain: Domain,
    relations: Vec<WeightedRelation>,
    index: HashMap<String, usize>,
}

impl Language {
    pub fn new(domain: Domain) -> Self {
        Language {
            domain,
            relations: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn with_relations(
        domain: Domain,
        relations: impl IntoIterator<Item = WeightedRelation>,
    ) -> Result<Self> {
        let mut lang = Language::new(domain);
        for r in relations {
            lang.push(r)?;
        }
        Ok(lang)
    }

    pub fn push(&mut self, relation: WeightedRelation) -> Result<usize> {
        if relation.domain() != self.domain.size() {
            return Err(Error::Structural(format!(
                "relation `{}` is over a domain of size {}, language has {}",
                relation.name(),
                relation.domain(),
                self.domain.size()
            )));
        }
        if self.index.contains_key(relation.name()) {
            return Err(Error::Structural(format!(
                "duplicate relation name `{}`",
                relation.name()
            )));
        }
        let id = self.relations.len();
        self.index.insert(relation.name().to_string(), id);
        self.relations.push(relation);
        Ok(id)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn domain_size(&self) -> usize {
        self.domain.size()
    }

    pub fn relations(&self) -> &[WeightedRelation] {
        &self.relations
    }

    pub fn relation(&self, id: usize) -> &WeightedRelation {
        &self.relations[id]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn is_crisp(&self) -> bool {
        self.relations.iter().all(WeightedRelation::is_crisp)
    }

    /// The sub-language induced by `keep`, relabelled onto `0..keep.len()`.
    pub fn restrict(&self, keep: &[usize]) -> Result<Language> {
        let domain = Domain::new(keep.len())?;
        Language::with_relations(
            domain,
            self.relations
                .iter()
                .map(|r| r.restrict(keep))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

/// One valued constraint: a relation applied to a tuple of variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub relation: usize,
    pub scope: Vec<usize>,
}

/// `I(x_1, …, x_n) = Σ_i φ_i(scope_i)` over a fixed language.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    language: Arc<Language>,
    language_path: Option<String>,
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl Instance {
    pub fn new(language: Arc<Language>, num_vars: usize) -> Self {
        Instance {
            language,
            language_path: None,
            num_vars,
            constraints: Vec::new(),
        }
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.language_path = Some(path.into());
        self
    }

    pub fn add(&mut self, relation: usize, scope: Vec<usize>) -> Result<()> {
        let rel = self.language.relations.get(relation).ok_or_else(|| {
            Error::Structural(format!("unknown relation index {relation}"))
        })?;
        if rel.arity() != scope.len() {
            return Err(Error::Structural(format!(
                "relation `{}` has arity {} but scope has {} variables",
                rel.name(),
                rel.arity(),
                scope.len()
            )));
        }
        if let Some(&v) = scope.iter().find(|&&v| v >= self.num_vars) {
            return Err(Error::Structural(format!(
                "variable x{v} out of range (instance has {} variables)",
                self.num_vars
            )));
        }
        self.constraints.push(Constraint { relation, scope });
        Ok(())
    }

    pub fn add_named(&mut self, name: &str, scope: Vec<usize>) -> Result<()> {
        let id = self
            .language
            .lookup(name)
            .ok_or_else(|| Error::Structural(format!("unknown relation `{name}`")))?;
        self.add(id, scope)
    }

    pub fn language(&self) -> &Arc<Language> {
        &self.language
    }

    pub fn language_path(&self) -> Option<&str> {
        self.language_path.as_deref()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn domain_size(&self) -> usize {
        self.language.domain_size()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn relation_of(&self, c: &Constraint) -> &WeightedRelation {
        self.language.relation(c.relation)
    }

    /// The same constraints over another language that has a relation of the
    /// same name and arity for every relation used.
    pub fn rebind(&self, language: Arc<Language>) -> Result<Instance> {
        let mut out = Instance::new(language, self.num_vars);
        for c in &self.constraints {
            out.add_named(self.relation_of(c).name(), c.scope.clone())?;
        }
        Ok(out)
    }

    /// Objective value of a total assignment.
    pub fn eval(&self, assignment: &Assignment) -> Result<ExtRational> {
        self.check_assignment(assignment)?;
        let mut total = ExtRational::zero();
        let mut buf = Vec::new();
        for c in &self.constraints {
            buf.clear();
            buf.extend(c.scope.iter().map(|&v| assignment.0[v]));
            total = &total + self.relation_of(c).value(&buf);
            if total.is_infinite() {
                break;
            }
        }
        Ok(total)
    }

    pub fn check_assignment(&self, assignment: &Assignment) -> Result<()> {
        if assignment.0.len() != self.num_vars {
            return Err(Error::Structural(format!(
                "assignment has {} labels for {} variables",
                assignment.0.len(),
                self.num_vars
            )));
        }
        let d = self.domain_size();
        if let Some(&x) = assignment.0.iter().find(|&&x| x >= d) {
            return Err(Error::Structural(format!("label {x} out of range")));
        }
        Ok(())
    }
}

/// A total map from variables to labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn labels(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "x{i}={x}")?;
        }
        Ok(())
    }
}

/// Default cap on `d^n` for exhaustive enumeration of assignments.
pub const DEFAULT_ASSIGNMENT_CAP: u64 = 1_000_000;

/// Visits every assignment in lexicographic order with its value.
pub fn for_each_assignment(
    instance: &Instance,
    cap: u64,
    mut visit: impl FnMut(&[usize], ExtRational),
) -> Result<()> {
    let d = instance.domain_size();
    let n = instance.num_vars();
    match checked_pow(d, n) {
        Some(count) if count <= cap => {}
        _ => {
            return Err(Error::Resource(format!(
                "{d}^{n} assignments exceed the cap of {cap}"
            )))
        }
    }
    let mut current = vec![0usize; n];
    let mut buf = Vec::new();
    loop {
        let mut total = ExtRational::zero();
        for c in instance.constraints() {
            buf.clear();
            buf.extend(c.scope.iter().map(|&v| current[v]));
            total = &total + instance.relation_of(c).value(&buf);
            if total.is_infinite() {
                break;
            }
        }
        visit(&current, total);
        if !crate::tuples::next_tuple(&mut current, d) {
            break;
        }
    }
    Ok(())
}

/// The crisp `n`-ary relation of optimal assignments of `instance`.
///
/// Empty when the instance is unsatisfiable.
pub fn opt_relation(instance: &Instance, name: &str, cap: u64) -> Result<WeightedRelation> {
    if instance.num_vars() == 0 {
        return Err(Error::Structural(
            "opt relation of an instance without variables".into(),
        ));
    }
    let mut best = ExtRational::Infinity;
    let mut optima: Vec<Vec<usize>> = Vec::new();
    for_each_assignment(instance, cap, |a, v| {
        if v.is_infinite() {
            return;
        }
        match v.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = v;
                optima.clear();
                optima.push(a.to_vec());
            }
            std::cmp::Ordering::Equal => optima.push(a.to_vec()),
            std::cmp::Ordering::Greater => {}
        }
    })?;
    WeightedRelation::crisp(name, instance.domain_size(), instance.num_vars(), optima)
}
