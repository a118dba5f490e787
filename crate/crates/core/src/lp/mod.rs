//! Exact rational linear programming.
//!
//! Programs are solved with a two-phase primal simplex on a sparse-row
//! tableau. Pivots follow Dantzig's rule and fall back to Bland's rule
//! during long degenerate runs; ties break by index, so the same input
//! always produces the same pivot sequence. Every outcome carries a certificate that
//! [`verify_certificate`] re-checks with exact arithmetic:
//!
//! * optimal: a primal point and a dual vector with equal objectives,
//! * infeasible: a Farkas combination of the rows,
//! * unbounded: a feasible point and an improving ray.

mod certificate;
mod dump;
mod q;
mod simplex;

pub use certificate::verify_certificate;
pub use dump::to_lp_text;
pub use simplex::{solve_lp, solve_lp_with, SimplexOptions};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowRelation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bound {
    NonNegative,
    Free,
}

/// One linear constraint `Σ coeffs · x (≤|=|≥) rhs`, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRow {
    pub name: String,
    pub coeffs: Vec<(usize, BigRational)>,
    pub relation: RowRelation,
    pub rhs: BigRational,
}

impl LinearRow {
    pub fn activity(&self, x: &[BigRational]) -> BigRational {
        self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub var_names: Vec<String>,
    pub objective: Vec<BigRational>,
    pub bounds: Vec<Bound>,
    pub rows: Vec<LinearRow>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            var_names: Vec::new(),
            objective: Vec::new(),
            bounds: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: impl Into<String>, bound: Bound, cost: BigRational) -> usize {
        self.var_names.push(name.into());
        self.objective.push(cost);
        self.bounds.push(bound);
        self.var_names.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    /// Adds a row. Repeated variables are merged and zero coefficients
    /// dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, BigRational)>,
        relation: RowRelation,
        rhs: BigRational,
    ) -> Result<usize> {
        let mut merged: Vec<(usize, BigRational)> = coeffs.into_iter().collect();
        if let Some((j, _)) = merged.iter().find(|(j, _)| *j >= self.num_vars()) {
            return Err(Error::Structural(format!(
                "row references undeclared variable {j}"
            )));
        }
        merged.sort_by_key(|(j, _)| *j);
        let mut out: Vec<(usize, BigRational)> = Vec::with_capacity(merged.len());
        for (j, a) in merged {
            match out.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => out.push((j, a)),
            }
        }
        out.retain(|(_, a)| !a.is_zero());
        self.rows.push(LinearRow {
            name: name.into(),
            coeffs: out,
            relation,
            rhs,
        });
        Ok(self.rows.len() - 1)
    }

    pub fn objective_value(&self, x: &[BigRational]) -> BigRational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a solve together with its certificate.
///
/// Dual values follow the sign convention of the program's sense: the
/// objective equals `Σ_r rhs_r · dual_r`. For minimisation, `≤` rows carry
/// non-positive and `≥` rows non-negative duals; maximisation flips both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub objective: Option<BigRational>,
    /// Optimal point, or a feasible point when unbounded.
    pub primal: Vec<BigRational>,
    pub dual: Vec<BigRational>,
    /// Row multipliers proving infeasibility: `≤` rows non-negative, `≥`
    /// rows non-positive, the combination has non-negative coefficients on
    /// non-negative variables, zero on free ones, and right-hand side `-1`.
    pub farkas: Option<Vec<BigRational>>,
    /// Improving direction when unbounded.
    pub ray: Option<Vec<BigRational>>,
    pub pivots: usize,
}
