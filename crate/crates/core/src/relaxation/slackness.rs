use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{SaProgram, SaRow, SaSolution, SaStatus};
use crate::rational::ExtRational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlacknessReport {
    /// `σ` has a column in every term (finite cost, allowed by the mask).
    pub feasible: bool,
    /// Rows `(i, σ(S_i))` with `λ*_i(σ(S_i)) > 0` are all tight.
    pub support_rows_tight: bool,
    /// Every row `(i, σ(S_i))` is tight.
    pub all_rows_tight: bool,
    /// `Σ_i z*_i`.
    pub dual_sum: ExtRational,
    /// `Σ_i φ_i(σ(S_i))`.
    pub primal_sum: ExtRational,
    /// `Σ_i` of the y-terms of rows `(i, σ(S_i))`; zero by telescoping.
    pub telescoping_residual: ExtRational,
    pub holds: bool,
}

/// Substitutes `σ` into the dual rows `z_i ≤ φ_i(s) + Σ_j y(j, s|S_j, i) −
/// Σ_j y(i, s, j)` at `s = σ(S_i)`.
pub fn check_complementary_slackness(
    program: &SaProgram,
    solution: &SaSolution,
    sigma: &[usize],
) -> SlacknessReport {
    let failed = |primal_sum| SlacknessReport {
        feasible: false,
        support_rows_tight: false,
        all_rows_tight: false,
        dual_sum: ExtRational::Infinity,
        primal_sum,
        telescoping_residual: ExtRational::zero(),
        holds: false,
    };
    let (SaStatus::Optimal, Some(point)) = (solution.status, &solution.point) else {
        return failed(ExtRational::Infinity);
    };
    let images: Vec<Vec<usize>> = program
        .terms
        .iter()
        .map(|t| t.scope.iter().map(|&v| sigma[v]).collect())
        .collect();
    let mut positions = Vec::with_capacity(program.terms.len());
    for (term, s) in program.terms.iter().zip(&images) {
        match term.position(s) {
            Some(p) => positions.push(p),
            None => return failed(ExtRational::Infinity),
        }
    }
    let mut reduced: Vec<BigRational> = program
        .terms
        .iter()
        .zip(&positions)
        .zip(&solution.z)
        .map(|((t, &p), z)| &t.values[p] - z)
        .collect();
    let base_sum: BigRational = reduced.iter().sum();
    for (row, y) in program.rows.iter().zip(&solution.row_duals) {
        if let SaRow::Marginal { sub, tuple, sup } = row {
            if *tuple == images[*sub] {
                reduced[*sub] -= y;
                reduced[*sup] += y;
            }
        }
    }
    let residual = reduced.iter().sum::<BigRational>() - base_sum;
    let support_rows_tight = reduced
        .iter()
        .zip(&positions)
        .zip(&point.lambda)
        .all(|((r, &p), l)| !l[p].is_positive() || r.is_zero());
    let all_rows_tight = reduced.iter().all(Zero::is_zero);
    let dual_sum: BigRational = solution.z.iter().sum();
    let primal_sum: BigRational = program
        .terms
        .iter()
        .zip(&positions)
        .map(|(t, &p)| t.values[p].clone())
        .sum();
    let holds = support_rows_tight && dual_sum == primal_sum;
    SlacknessReport {
        feasible: true,
        support_rows_tight,
        all_rows_tight,
        dual_sum: ExtRational::Finite(dual_sum),
        primal_sum: ExtRational::Finite(primal_sum),
        telescoping_residual: ExtRational::Finite(residual),
        holds,
    }
}
