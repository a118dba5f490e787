use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;

use super::{SaPoint, SaProgram};
use crate::algebra::fractional::{for_each_vector, FractionalOperation};
use crate::algebra::operation::Operation;
use crate::error::{Error, Result};

/// Cap on `Σ_i |supp λ_i|^m · |supp ω|` work items.
pub const APPLY_TERM_CAP: u64 = 10_000_000;

/// `λ^ω_i(s) = Pr_{f∼ω, s_1..s_m∼λ_i}[f(s_1, …, s_m) = s]`, computed as an
/// exact expectation over the product distribution.
pub fn apply_fractional(
    program: &SaProgram,
    point: &SaPoint,
    omega: &FractionalOperation,
) -> Result<SaPoint> {
    if omega.domain() != program.domain_size() {
        return Err(Error::Structural("fractional operation has the wrong domain".into()));
    }
    let m = omega.arity() as u32;
    let mut work: u64 = 0;
    let mut lambda = Vec::with_capacity(program.terms.len());
    for (i, term) in program.terms.iter().enumerate() {
        let support: Vec<(usize, &BigRational)> = point.lambda[i]
            .iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero())
            .collect();
        work = (support.len() as u64)
            .checked_pow(m)
            .and_then(|w| w.checked_mul(omega.weights().len() as u64))
            .and_then(|w| w.checked_add(work))
            .unwrap_or(u64::MAX);
        if work > APPLY_TERM_CAP {
            return Err(Error::Resource(format!(
                "applying ω needs more than {APPLY_TERM_CAP} terms"
            )));
        }
        let mut acc: BTreeMap<Vec<usize>, BigRational> = BTreeMap::new();
        for_each_vector(&support, omega.arity(), |picked| {
            let mut weight = picked[0].1.clone();
            for p in &picked[1..] {
                weight *= p.1;
            }
            let rows: Vec<&[usize]> = picked.iter().map(|p| term.tuples[p.0].as_slice()).collect();
            for (f, w) in omega.weights() {
                *acc.entry(f.apply_rows(&rows)).or_insert_with(BigRational::zero) += &weight * w;
            }
            true
        });
        let mut col = vec![BigRational::zero(); term.tuples.len()];
        for (s, w) in acc {
            let p = term.position(&s).ok_or_else(|| {
                Error::Structural(format!(
                    "ω moves mass of term {i} onto an infeasible tuple {s:?}"
                ))
            })?;
            col[p] = w;
        }
        lambda.push(col);
    }
    Ok(SaPoint { lambda })
}

/// Whether every term's support is closed under coordinatewise `f`.
pub fn supports_closed_under(program: &SaProgram, point: &SaPoint, f: &Operation) -> bool {
    (0..program.terms.len()).all(|i| {
        let support = point.support(program, i);
        let mut closed = true;
        for_each_vector(&support, f.arity(), |rows| {
            let rows: Vec<&[usize]> = rows.iter().map(|r| r.as_slice()).collect();
            let image = f.apply_rows(&rows);
            closed = support.binary_search(&image).is_ok();
            closed
        });
        closed
    })
}

fn support_grew(program: &SaProgram, before: &SaPoint, after: &SaPoint) -> bool {
    (0..program.terms.len()).any(|i| {
        before.lambda[i]
            .iter()
            .zip(&after.lambda[i])
            .any(|(b, a)| b.is_zero() && !a.is_zero())
    })
}

/// Replaces `λ` by `½(λ + λ^ω)` while some `ω` enlarges a support. At the
/// fixpoint every support is closed under every operation in every
/// `supp(ω)`. Returns the point and the number of averaging steps.
pub fn saturate_support(
    program: &SaProgram,
    point: &SaPoint,
    witnesses: &[FractionalOperation],
) -> Result<(SaPoint, usize)> {
    let mut current = point.clone();
    let mut steps = 0;
    loop {
        let mut changed = false;
        for omega in witnesses {
            let lifted = apply_fractional(program, &current, omega)?;
            if support_grew(program, &current, &lifted) {
                current = current.midpoint(&lifted);
                steps += 1;
                changed = true;
            }
        }
        if !changed {
            return Ok((current, steps));
        }
    }
}
