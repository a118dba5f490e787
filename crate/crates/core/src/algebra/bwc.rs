//! The bounded width condition on support clones.
//!
//! `supp(Γ)` satisfies it iff it contains a ternary WNU `f` and a 4-ary WNU
//! `g` with `f(y,x,x) = g(y,x,x,x)`. The test assumes `Γ` is a core with
//! constants added, so every support operation is idempotent.

use serde::Serialize;

use super::fractional::FractionalOperation;
use super::operation::{compose, for_each_operation, is_wnu, satisfies_bwc_identity, Operation};
use super::support::{supp_membership, supp_membership_any, SuppOptions};
use crate::error::{Error, Result};
use crate::model::Language;

/// How a positive answer was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BwcRoute {
    TrivialDomain,
    Tournament,
    Majority,
    BooleanSearch,
    Candidates,
}

#[derive(Clone, Debug)]
pub struct BwcWitness {
    pub f: Operation,
    pub g: Operation,
    pub route: BwcRoute,
    /// The support operation the pair was built from, with its fractional
    /// polymorphism. For the Boolean search and candidates this is `f`.
    pub generator: Option<(Operation, FractionalOperation)>,
    /// Whether `f` and `g` were themselves confirmed by a support query;
    /// false when the query exceeded the caps and only clone closure
    /// vouches for them.
    pub pair_checked: bool,
}

#[derive(Clone, Debug)]
pub enum BwcVerdict {
    Yes(Box<BwcWitness>),
    No,
    Unknown(String),
}

impl BwcVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, BwcVerdict::Yes(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            BwcVerdict::Yes(_) => "yes",
            BwcVerdict::No => "no",
            BwcVerdict::Unknown(_) => "unknown",
        }
    }
}

/// Binary conservative commutative operations, in table order.
pub fn tournaments(d: usize) -> Result<Vec<Operation>> {
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|a| (a + 1..d).map(move |b| (a, b))).collect();
    if pairs.len() > 16 {
        return Err(Error::Resource(format!("2^{} tournaments", pairs.len())));
    }
    let mut out = Vec::new();
    for mask in 0..1usize << pairs.len() {
        let pick = |x: usize, y: usize| {
            if x == y {
                return x;
            }
            let (a, b) = (x.min(y), x.max(y));
            let p = pairs.iter().position(|&q| q == (a, b)).expect("pair");
            if mask >> p & 1 == 0 {
                a
            } else {
                b
            }
        };
        out.push(Operation::from_fn(d, 2, |t| pick(t[0], t[1]))?);
    }
    out.sort();
    Ok(out)
}

/// Ternary operations with `m(x,x,y) = m(x,y,x) = m(y,x,x) = x`.
pub fn majorities(d: usize, cap: u64) -> Result<Vec<Operation>> {
    let mut out = Vec::new();
    for_each_operation(d, 3, true, cap, |m| {
        if m.is_majority() {
            out.push(m.clone());
        }
    })?;
    Ok(out)
}

/// `t(t(x,y),z)` and `t(t(t(x,y),z),w)`.
pub fn pair_from_tournament(t: &Operation) -> Result<(Operation, Operation)> {
    let d = t.domain();
    let p = |k, i| Operation::projection(d, k, i);
    let f = compose(t, &[compose(t, &[p(3, 0)?, p(3, 1)?])?, p(3, 2)?])?;
    let g = compose(t, &[compose(t, &[compose(t, &[p(4, 0)?, p(4, 1)?])?, p(4, 2)?])?, p(4, 3)?])?;
    Ok((f, g))
}

/// `m` and `m(x_1, x_2, x_3)` as a 4-ary operation.
pub fn pair_from_majority(m: &Operation) -> Result<(Operation, Operation)> {
    let d = m.domain();
    let p = |i| Operation::projection(d, 4, i);
    Ok((m.clone(), compose(m, &[p(0)?, p(1)?, p(2)?])?))
}

/// Ternary WNUs on `{0,1}`: min, max, majority and minority.
fn boolean_ternary_wnus() -> Result<Vec<Operation>> {
    let mut out = Vec::new();
    for_each_operation(2, 3, true, u64::MAX, |f| {
        if is_wnu(f) {
            out.push(f.clone());
        }
    })?;
    Ok(out)
}

/// 4-ary WNUs on `{0,1}` linked to `f` by the identity.
fn boolean_partners(f: &Operation) -> Result<Vec<Operation>> {
    let mut out = Vec::new();
    for_each_operation(2, 4, true, u64::MAX, |g| {
        if is_wnu(g) && satisfies_bwc_identity(f, g) {
            out.push(g.clone());
        }
    })?;
    Ok(out)
}

fn trivial_pair(d: usize) -> Result<(Operation, Operation)> {
    Ok((Operation::constant(d, 3, 0)?, Operation::constant(d, 4, 0)?))
}

/// Whether `op ∈ supp(Γ)`; `None` when the query exceeds the caps.
fn in_supp(op: &Operation, language: &Language, options: &SuppOptions) -> Result<Option<bool>> {
    match supp_membership(op, language, options) {
        Ok(ans) => Ok(Some(ans.member)),
        Err(Error::Resource(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runtime checks on a pair built by composition.
fn finish(
    f: Operation,
    g: Operation,
    route: BwcRoute,
    generator: (Operation, FractionalOperation),
    language: &Language,
    options: &SuppOptions,
) -> Result<BwcVerdict> {
    if !is_wnu(&f) || !is_wnu(&g) || !satisfies_bwc_identity(&f, &g) {
        return Err(Error::Internal(format!("{route:?} route produced an invalid pair")));
    }
    let mut pair_checked = true;
    for op in [&f, &g] {
        match in_supp(op, language, options)? {
            Some(true) => {}
            Some(false) => {
                return Err(Error::Internal(
                    "composition of support operations left the support".into(),
                ))
            }
            None => pair_checked = false,
        }
    }
    Ok(BwcVerdict::Yes(Box::new(BwcWitness {
        f,
        g,
        route,
        generator: Some(generator),
        pair_checked,
    })))
}

/// Decides the condition for `Γ` (a core with constants).
///
/// Order: one-label domain; a tournament in the support; a majority in the
/// support; on `{0,1}` the exhaustive search over WNU pairs, which makes a
/// negative answer final. Larger domains without a fast-path hit give
/// `Unknown`.
pub fn bwc_test(language: &Language, options: &SuppOptions) -> Result<BwcVerdict> {
    bwc_test_with_candidates(language, &[], options)
}

/// As [`bwc_test`], additionally trying user-supplied `(f, g)` pairs before
/// giving up with `Unknown`.
pub fn bwc_test_with_candidates(
    language: &Language,
    candidates: &[(Operation, Operation)],
    options: &SuppOptions,
) -> Result<BwcVerdict> {
    let d = language.domain_size();
    if d == 1 {
        let (f, g) = trivial_pair(1)?;
        return Ok(BwcVerdict::Yes(Box::new(BwcWitness {
            f,
            g,
            route: BwcRoute::TrivialDomain,
            generator: None,
            pair_checked: true,
        })));
    }
    let mut skipped = Vec::new();

    match tournaments(d).and_then(|ts| supp_membership_any(&ts, language, options)) {
        Ok(ans) if ans.member => {
            let t = ans.operation;
            let (f, g) = pair_from_tournament(&t)?;
            let w = ans.witness_fpol.expect("member witness");
            return finish(f, g, BwcRoute::Tournament, (t, w), language, options);
        }
        Ok(_) => {}
        Err(Error::Resource(msg)) => skipped.push(format!("tournaments: {msg}")),
        Err(e) => return Err(e),
    }

    match majorities(d, options.max_ops).and_then(|ms| {
        if ms.is_empty() {
            Err(Error::Internal("no majority operations".into()))
        } else {
            supp_membership_any(&ms, language, options)
        }
    }) {
        Ok(ans) if ans.member => {
            let m = ans.operation;
            let (f, g) = pair_from_majority(&m)?;
            let w = ans.witness_fpol.expect("member witness");
            return finish(f, g, BwcRoute::Majority, (m, w), language, options);
        }
        Ok(_) => {}
        Err(Error::Resource(msg)) => skipped.push(format!("majorities: {msg}")),
        Err(e) => return Err(e),
    }

    if d == 2 {
        match boolean_search(language, options) {
            Ok(verdict) => return Ok(verdict),
            Err(Error::Resource(msg)) => skipped.push(format!("boolean search: {msg}")),
            Err(e) => return Err(e),
        }
    }

    for (f, g) in candidates {
        if f.domain() != d || g.domain() != d {
            return Err(Error::Structural("candidate pair over the wrong domain".into()));
        }
        if !is_wnu(f) || !is_wnu(g) || !satisfies_bwc_identity(f, g) {
            continue;
        }
        let fa = supp_membership(f, language, options)?;
        if !fa.member {
            continue;
        }
        if supp_membership(g, language, options)?.member {
            return Ok(BwcVerdict::Yes(Box::new(BwcWitness {
                f: f.clone(),
                g: g.clone(),
                route: BwcRoute::Candidates,
                generator: Some((f.clone(), fa.witness_fpol.expect("member witness"))),
                pair_checked: true,
            })));
        }
    }

    let mut reason = format!("no fast-path operation in the support on a domain of size {d}");
    if !skipped.is_empty() {
        reason.push_str("; skipped ");
        reason.push_str(&skipped.join("; "));
    }
    Ok(BwcVerdict::Unknown(reason))
}

fn boolean_search(language: &Language, options: &SuppOptions) -> Result<BwcVerdict> {
    for f in boolean_ternary_wnus()? {
        let fa = supp_membership(&f, language, options)?;
        if !fa.member {
            continue;
        }
        let partners = boolean_partners(&f)?;
        let ga = supp_membership_any(&partners, language, options)?;
        if ga.member {
            let g = ga.operation;
            if !is_wnu(&g) || !satisfies_bwc_identity(&f, &g) {
                return Err(Error::Internal("boolean search returned an invalid pair".into()));
            }
            return Ok(BwcVerdict::Yes(Box::new(BwcWitness {
                generator: Some((f.clone(), fa.witness_fpol.expect("member witness"))),
                f,
                g,
                route: BwcRoute::BooleanSearch,
                pair_checked: true,
            })));
        }
    }
    Ok(BwcVerdict::No)
}
