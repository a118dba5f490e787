use std::fmt::Write;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{SaProgram, SaRow};
use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, LinearProgram, LpOutcome, LpStatus, SimplexOptions};
use crate::rational::{format_rational, ExtRational};

/// A point of the SA polytope: one vector per term, aligned with the term's
/// columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaPoint {
    pub lambda: Vec<Vec<BigRational>>,
}

impl SaPoint {
    pub fn flatten(&self) -> Vec<BigRational> {
        self.lambda.iter().flatten().cloned().collect()
    }

    pub fn objective(&self, program: &SaProgram) -> BigRational {
        program.lp.objective_value(&self.flatten())
    }

    /// Non-negativity, `Σ λ_i = 1` and every marginal row, exactly.
    pub fn is_feasible(&self, program: &SaProgram) -> bool {
        if self.lambda.len() != program.terms.len()
            || self
                .lambda
                .iter()
                .zip(&program.terms)
                .any(|(l, t)| l.len() != t.tuples.len())
        {
            return false;
        }
        let x = self.flatten();
        x.iter().all(|v| !v.is_negative())
            && program.lp.rows.iter().all(|row| row.activity(&x) == row.rhs)
    }

    /// Tuples of term `i` with positive mass.
    pub fn support(&self, program: &SaProgram, i: usize) -> Vec<Vec<usize>> {
        program.terms[i]
            .tuples
            .iter()
            .zip(&self.lambda[i])
            .filter(|(_, w)| w.is_positive())
            .map(|(t, _)| t.clone())
            .collect()
    }

    /// `½·self + ½·other`.
    pub fn midpoint(&self, other: &SaPoint) -> SaPoint {
        let half = BigRational::new(1.into(), 2.into());
        SaPoint {
            lambda: self
                .lambda
                .iter()
                .zip(&other.lambda)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x + y) * &half).collect())
                .collect(),
        }
    }

    fn from_primal(program: &SaProgram, x: &[BigRational]) -> SaPoint {
        SaPoint {
            lambda: program
                .terms
                .iter()
                .map(|t| x[t.offset..t.offset + t.tuples.len()].to_vec())
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SaStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaSolution {
    pub status: SaStatus,
    /// `inf` when infeasible.
    pub objective: ExtRational,
    /// Optimal λ; `None` when infeasible.
    pub point: Option<SaPoint>,
    /// `z_i` per term.
    pub z: Vec<BigRational>,
    /// Dual of every LP row; marginal rows carry `y(sub, tuple, sup)`.
    pub row_duals: Vec<BigRational>,
    pub outcome: LpOutcome,
}

impl SaSolution {
    pub fn value(&self) -> &ExtRational {
        &self.objective
    }
}

pub fn solve_sa(program: &SaProgram) -> Result<SaSolution> {
    solve_sa_with(program, SimplexOptions::default())
}

pub fn solve_sa_with(program: &SaProgram, options: SimplexOptions) -> Result<SaSolution> {
    solve_lp_program(program, &program.lp, options)
}

/// Minimises `Σ costs_i(s) λ_i(s)` over the program's polytope. Used to
/// reach arbitrary vertices, not only optimal ones.
pub fn solve_sa_with_costs(program: &SaProgram, costs: &[Vec<BigRational>]) -> Result<SaSolution> {
    let lp = program.lp_with_costs(costs)?;
    solve_lp_program(program, &lp, SimplexOptions::default())
}

fn solve_lp_program(
    program: &SaProgram,
    lp: &LinearProgram,
    options: SimplexOptions,
) -> Result<SaSolution> {
    let outcome = solve_lp_with(lp, options)?;
    match outcome.status {
        LpStatus::Optimal => {
            let point = SaPoint::from_primal(program, &outcome.primal);
            let z = program
                .sum_rows()
                .into_iter()
                .map(|r| outcome.dual[r].clone())
                .collect();
            Ok(SaSolution {
                status: SaStatus::Optimal,
                objective: ExtRational::Finite(outcome.objective.clone().expect("optimal")),
                point: Some(point),
                z,
                row_duals: outcome.dual.clone(),
                outcome,
            })
        }
        LpStatus::Infeasible => Ok(SaSolution {
            status: SaStatus::Infeasible,
            objective: ExtRational::Infinity,
            point: None,
            z: Vec::new(),
            row_duals: Vec::new(),
            outcome,
        }),
        LpStatus::Unbounded => Err(Error::Internal(
            "SA program reported unbounded; every λ is a distribution".into(),
        )),
    }
}

fn scope_text(scope: &[usize]) -> String {
    let vars: Vec<String> = scope.iter().map(|v| format!("x{v}")).collect();
    format!("{{{}}}", vars.join(","))
}

fn tuple_text(t: &[usize]) -> String {
    let labels: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", labels.join(","))
}

/// Text rendering of supports and duals:
/// `term <i> scope <S>: <tuple> = p/q`, then `z <i> = p/q` and non-zero
/// `y <sub> <tuple> <sup> = p/q` lines.
pub fn dump_solution(program: &SaProgram, solution: &SaSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status {:?}", solution.status);
    let _ = writeln!(out, "objective {}", solution.objective);
    let Some(point) = &solution.point else {
        return out;
    };
    for (i, term) in program.terms.iter().enumerate() {
        for (t, w) in term.tuples.iter().zip(&point.lambda[i]) {
            if w.is_positive() {
                let _ = writeln!(
                    out,
                    "term {i} scope {}: {} = {}",
                    scope_text(&term.scope),
                    tuple_text(t),
                    format_rational(w)
                );
            }
        }
    }
    for (i, z) in solution.z.iter().enumerate() {
        let _ = writeln!(out, "z {i} = {}", format_rational(z));
    }
    for (row, y) in program.rows.iter().zip(&solution.row_duals) {
        if let SaRow::Marginal { sub, tuple, sup } = row {
            if !y.is_zero() {
                let _ = writeln!(out, "y {sub} {} {sup} = {}", tuple_text(tuple), format_rational(y));
            }
        }
    }
    out
}

/// Point mass on one assignment of every term; feasible iff `σ` has finite
/// cost and respects the mask.
pub fn point_of_assignment(program: &SaProgram, sigma: &[usize]) -> Option<SaPoint> {
    let mut lambda = Vec::with_capacity(program.terms.len());
    for term in &program.terms {
        let t: Vec<usize> = term.scope.iter().map(|&v| sigma[v]).collect();
        let p = term.position(&t)?;
        let mut col = vec![BigRational::zero(); term.tuples.len()];
        col[p] = BigRational::one();
        lambda.push(col);
    }
    Some(SaPoint { lambda })
}
