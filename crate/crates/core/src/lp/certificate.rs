use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Bound, LinearProgram, LpOutcome, LpStatus, RowRelation, Sense};

fn row_satisfied(activity: &BigRational, relation: RowRelation, rhs: &BigRational) -> bool {
    match relation {
        RowRelation::Le => activity <= rhs,
        RowRelation::Eq => activity == rhs,
        RowRelation::Ge => activity >= rhs,
    }
}

fn primal_feasible(lp: &LinearProgram, x: &[BigRational]) -> bool {
    x.len() == lp.num_vars()
        && lp
            .bounds
            .iter()
            .zip(x)
            .all(|(b, v)| *b == Bound::Free || !v.is_negative())
        && lp
            .rows
            .iter()
            .all(|row| row_satisfied(&row.activity(x), row.relation, &row.rhs))
}

/// `Σ_r w_r · a_r`, the row combination as a dense coefficient vector.
fn combine(lp: &LinearProgram, weights: &[BigRational]) -> Vec<BigRational> {
    let mut g = vec![BigRational::zero(); lp.num_vars()];
    for (w, row) in weights.iter().zip(&lp.rows) {
        if w.is_zero() {
            continue;
        }
        for (j, a) in &row.coeffs {
            g[*j] += w * a;
        }
    }
    g
}

/// Re-checks an outcome against its program with exact arithmetic.
pub fn verify_certificate(lp: &LinearProgram, outcome: &LpOutcome) -> bool {
    match outcome.status {
        LpStatus::Optimal => verify_optimal(lp, outcome),
        LpStatus::Infeasible => verify_farkas(lp, outcome),
        LpStatus::Unbounded => verify_unbounded(lp, outcome),
    }
}

fn verify_optimal(lp: &LinearProgram, outcome: &LpOutcome) -> bool {
    let x = &outcome.primal;
    let y = &outcome.dual;
    if !primal_feasible(lp, x) || y.len() != lp.rows.len() {
        return false;
    }
    // Work in minimisation form: for max, negate costs and duals.
    let flip = lp.sense == Sense::Maximize;
    let pi: Vec<BigRational> = y.iter().map(|v| if flip { -v } else { v.clone() }).collect();
    let signs_ok = lp.rows.iter().zip(&pi).all(|(row, p)| match row.relation {
        RowRelation::Le => !p.is_positive(),
        RowRelation::Ge => !p.is_negative(),
        RowRelation::Eq => true,
    });
    if !signs_ok {
        return false;
    }
    let g = combine(lp, &pi);
    let reduced_ok = lp.objective.iter().zip(&g).zip(&lp.bounds).all(|((c, gj), b)| {
        let c = if flip { -c.clone() } else { c.clone() };
        let d = c - gj;
        match b {
            Bound::NonNegative => !d.is_negative(),
            Bound::Free => d.is_zero(),
        }
    });
    if !reduced_ok {
        return false;
    }
    let primal_obj = lp.objective_value(x);
    let dual_obj: BigRational = y.iter().zip(&lp.rows).map(|(v, row)| v * &row.rhs).sum();
    outcome.objective.as_ref() == Some(&primal_obj) && primal_obj == dual_obj
}

fn verify_farkas(lp: &LinearProgram, outcome: &LpOutcome) -> bool {
    let Some(mu) = &outcome.farkas else {
        return false;
    };
    if mu.len() != lp.rows.len() {
        return false;
    }
    let signs_ok = lp.rows.iter().zip(mu).all(|(row, m)| match row.relation {
        RowRelation::Le => !m.is_negative(),
        RowRelation::Ge => !m.is_positive(),
        RowRelation::Eq => true,
    });
    if !signs_ok {
        return false;
    }
    let g = combine(lp, mu);
    let coeffs_ok = g.iter().zip(&lp.bounds).all(|(gj, b)| match b {
        Bound::NonNegative => !gj.is_negative(),
        Bound::Free => gj.is_zero(),
    });
    let rhs: BigRational = mu.iter().zip(&lp.rows).map(|(m, row)| m * &row.rhs).sum();
    coeffs_ok && rhs == -BigRational::one()
}

fn verify_unbounded(lp: &LinearProgram, outcome: &LpOutcome) -> bool {
    let Some(ray) = &outcome.ray else {
        return false;
    };
    if !primal_feasible(lp, &outcome.primal) || ray.len() != lp.num_vars() {
        return false;
    }
    let bounds_ok = lp
        .bounds
        .iter()
        .zip(ray)
        .all(|(b, v)| *b == Bound::Free || !v.is_negative());
    let rows_ok = lp.rows.iter().all(|row| {
        let a = row.activity(ray);
        row_satisfied(&a, row.relation, &BigRational::zero())
    });
    let gain = lp.objective_value(ray);
    let improving = match lp.sense {
        Sense::Minimize => gain.is_negative(),
        Sense::Maximize => gain.is_positive(),
    };
    bounds_ok && rows_ok && improving
}
