use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::q::Q;
use super::{Bound, LinearProgram, LpOutcome, LpStatus, RowRelation, Sense};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Upper bound on `rows × columns` of the standard-form tableau.
    pub max_cells: u64,
    /// Safety net on the number of pivots; the pivot rule never cycles, so
    /// hitting it means the program is far beyond desk scale.
    pub max_pivots: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            max_cells: 10_000_000,
            max_pivots: 5_000_000,
        }
    }
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_RUN: usize = 50;

type SparseRow = Vec<(usize, Q)>;

fn entry(row: &SparseRow, col: usize) -> Option<&Q> {
    row.binary_search_by_key(&col, |(j, _)| *j)
        .ok()
        .map(|k| &row[k].1)
}

/// `row - factor · pivot_row`, dropping cancelled entries.
fn subtract_scaled(row: &SparseRow, factor: &Q, pivot_row: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(row.len() + pivot_row.len());
    let (mut a, mut b) = (row.iter().peekable(), pivot_row.iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (Some((ja, va)), Some((jb, vb))) => {
                if ja < jb {
                    out.push((*ja, va.clone()));
                    a.next();
                } else if jb < ja {
                    out.push((*jb, factor.mul(vb).neg()));
                    b.next();
                } else {
                    let v = va.sub_mul(factor, vb);
                    if !v.is_zero() {
                        out.push((*ja, v));
                    }
                    a.next();
                    b.next();
                }
            }
            (Some((ja, va)), None) => {
                out.push((*ja, va.clone()));
                a.next();
            }
            (None, Some((jb, vb))) => {
                out.push((*jb, factor.mul(vb).neg()));
                b.next();
            }
            (None, None) => break,
        }
    }
    out
}

/// Standard-form layout: which tableau columns represent which variables.
struct Layout {
    plus: Vec<usize>,
    minus: Vec<Option<usize>>,
    /// Row sign applied so that every right-hand side is non-negative.
    sign: Vec<bool>,
    /// Column holding `+e_r` in the initial tableau (slack or artificial).
    unit: Vec<usize>,
    first_artificial: usize,
    ncols: usize,
}

struct Tableau {
    rows: Vec<SparseRow>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    reduced: Vec<Q>,
    value: Q,
    pivots: usize,
    max_pivots: usize,
}

enum LoopEnd {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = entry(&self.rows[r], c).expect("pivot entry").clone();
        let mut prow = std::mem::take(&mut self.rows[r]);
        if !p.is_one() {
            let inv = p.recip();
            for (_, v) in prow.iter_mut() {
                *v = v.mul(&inv);
            }
            self.rhs[r] = self.rhs[r].mul(&inv);
        }
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = entry(&self.rows[i], c).cloned() {
                self.rows[i] = subtract_scaled(&self.rows[i], &f, &prow);
                if !prhs.is_zero() {
                    self.rhs[i] = self.rhs[i].sub_mul(&f, &prhs);
                }
            }
        }
        let f = self.reduced[c].clone();
        if !f.is_zero() {
            for (j, a) in &prow {
                self.reduced[*j] = self.reduced[*j].sub_mul(&f, a);
            }
            self.value = self.value.add(&f.mul(&prhs));
        }
        self.rows[r] = prow;
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Dantzig's rule (most negative reduced cost, lowest index on ties)
    /// while pivots make progress; after `DEGENERATE_RUN` consecutive
    /// degenerate pivots, Bland's rule until the objective moves again.
    /// Bland never cycles and every non-degenerate pivot strictly improves
    /// the objective, so no basis repeats. The leaving row is the minimum
    /// ratio row whose basic column has the lowest index.
    fn run(&mut self, eligible_below: usize) -> Result<LoopEnd> {
        let mut degenerate_run = 0usize;
        loop {
            let entering = if degenerate_run >= DEGENERATE_RUN {
                (0..eligible_below).find(|&j| self.reduced[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..eligible_below {
                    if self.reduced[j].is_negative()
                        && best.is_none_or(|b| self.reduced[j] < self.reduced[b])
                    {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else {
                return Ok(LoopEnd::Optimal);
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let Some(a) = entry(row, c) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].div(a);
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = best else {
                return Ok(LoopEnd::Unbounded(c));
            };
            if ratio.is_zero() {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
            if self.pivots > self.max_pivots {
                return Err(Error::Resource(format!(
                    "simplex exceeded {} pivots",
                    self.max_pivots
                )));
            }
        }
    }

    /// Recomputes reduced costs and objective value for column costs `cost`.
    fn price(&mut self, cost: &[Q]) {
        self.reduced = cost.to_vec();
        self.value = Q::zero();
        for (r, row) in self.rows.iter().enumerate() {
            let cb = &cost[self.basis[r]];
            if cb.is_zero() {
                continue;
            }
            for (j, a) in row {
                self.reduced[*j] = self.reduced[*j].sub_mul(cb, a);
            }
            self.value = self.value.add(&cb.mul(&self.rhs[r]));
        }
    }

    fn column_values(&self, ncols: usize) -> Vec<BigRational> {
        let mut x = vec![BigRational::zero(); ncols];
        for (r, &b) in self.basis.iter().enumerate() {
            x[b] = self.rhs[r].to_ratio();
        }
        x
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    solve_lp_with(lp, SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, options: SimplexOptions) -> Result<LpOutcome> {
    let n = lp.num_vars();
    let m = lp.rows.len();

    let mut ncols = 0;
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for b in &lp.bounds {
        plus.push(ncols);
        ncols += 1;
        minus.push(match b {
            Bound::Free => {
                ncols += 1;
                Some(ncols - 1)
            }
            Bound::NonNegative => None,
        });
    }
    let mut slack = Vec::with_capacity(m);
    for row in &lp.rows {
        slack.push(match row.relation {
            RowRelation::Eq => None,
            _ => {
                ncols += 1;
                Some(ncols - 1)
            }
        });
    }
    let first_artificial = ncols;
    let sign: Vec<bool> = lp.rows.iter().map(|r| !r.rhs.is_negative()).collect();
    let mut unit = Vec::with_capacity(m);
    for (r, row) in lp.rows.iter().enumerate() {
        let slack_is_unit = match row.relation {
            RowRelation::Le => sign[r],
            RowRelation::Ge => !sign[r],
            RowRelation::Eq => false,
        };
        if slack_is_unit {
            unit.push(slack[r].expect("inequality slack"));
        } else {
            unit.push(ncols);
            ncols += 1;
        }
    }
    let layout = Layout {
        plus,
        minus,
        sign,
        unit,
        first_artificial,
        ncols,
    };
    let cells = (m as u64).saturating_mul(layout.ncols as u64);
    if cells > options.max_cells {
        return Err(Error::Resource(format!(
            "tableau of {m}×{} = {cells} cells exceeds {}",
            layout.ncols, options.max_cells
        )));
    }

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (r, row) in lp.rows.iter().enumerate() {
        let s = |q: Q| if layout.sign[r] { q } else { q.neg() };
        let mut entries: SparseRow = Vec::with_capacity(row.coeffs.len() * 2 + 2);
        for (j, a) in &row.coeffs {
            let a = Q::from_ratio(a);
            if let Some(mc) = layout.minus[*j] {
                entries.push((mc, s(a.neg())));
            }
            entries.push((layout.plus[*j], s(a)));
        }
        if let Some(sc) = slack[r] {
            let unit_coeff = match row.relation {
                RowRelation::Le => Q::one(),
                _ => Q::one().neg(),
            };
            entries.push((sc, s(unit_coeff)));
        }
        if layout.unit[r] >= layout.first_artificial {
            entries.push((layout.unit[r], Q::one()));
        }
        entries.sort_by_key(|(j, _)| *j);
        rows.push(entries);
        rhs.push(s(Q::from_ratio(&row.rhs)));
    }

    let mut t = Tableau {
        rows,
        rhs,
        basis: layout.unit.clone(),
        reduced: Vec::new(),
        value: Q::zero(),
        pivots: 0,
        max_pivots: options.max_pivots,
    };

    // Phase one: minimise the sum of artificials.
    if layout.first_artificial < layout.ncols {
        let mut cost1 = vec![Q::zero(); layout.ncols];
        for c in cost1.iter_mut().skip(layout.first_artificial) {
            *c = Q::one();
        }
        t.price(&cost1);
        t.run(layout.ncols)?;
        if t.value.is_positive() {
            let farkas = farkas_from_phase_one(lp, &layout, &t, &cost1);
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                objective: None,
                primal: Vec::new(),
                dual: Vec::new(),
                farkas: Some(farkas),
                ray: None,
                pivots: t.pivots,
            });
        }
        // Drive zero-level artificials out of the basis where the row allows.
        for r in 0..m {
            if t.basis[r] < layout.first_artificial {
                continue;
            }
            let replacement = t.rows[r]
                .iter()
                .find(|(j, _)| *j < layout.first_artificial)
                .map(|(j, _)| *j);
            if let Some(c) = replacement {
                t.pivot(r, c);
            }
        }
    }

    // Phase two on the original costs (in minimisation form).
    let mut cost2 = vec![Q::zero(); layout.ncols];
    for (j, c) in lp.objective.iter().enumerate() {
        let c = match lp.sense {
            Sense::Minimize => Q::from_ratio(c),
            Sense::Maximize => Q::from_ratio(c).neg(),
        };
        if let Some(mc) = layout.minus[j] {
            cost2[mc] = c.neg();
        }
        cost2[layout.plus[j]] = c;
    }
    t.price(&cost2);
    let end = t.run(layout.first_artificial)?;
    let cols = t.column_values(layout.ncols);
    let primal = original_values(&layout, &cols, n);

    match end {
        LoopEnd::Optimal => {
            let dual: Vec<BigRational> = (0..m)
                .map(|r| {
                    let pi = -t.reduced[layout.unit[r]].to_ratio();
                    let pi = if layout.sign[r] { pi } else { -pi };
                    match lp.sense {
                        Sense::Minimize => pi,
                        Sense::Maximize => -pi,
                    }
                })
                .collect();
            let objective = lp.objective_value(&primal);
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                objective: Some(objective),
                primal,
                dual,
                farkas: None,
                ray: None,
                pivots: t.pivots,
            })
        }
        LoopEnd::Unbounded(c) => {
            let mut dir = vec![BigRational::zero(); layout.ncols];
            dir[c] = BigRational::one();
            for (r, row) in t.rows.iter().enumerate() {
                if let Some(a) = entry(row, c) {
                    dir[t.basis[r]] = -a.to_ratio();
                }
            }
            let ray = original_values(&layout, &dir, n);
            Ok(LpOutcome {
                status: LpStatus::Unbounded,
                objective: None,
                primal,
                dual: Vec::new(),
                farkas: None,
                ray: Some(ray),
                pivots: t.pivots,
            })
        }
    }
}

fn original_values(layout: &Layout, cols: &[BigRational], n: usize) -> Vec<BigRational> {
    (0..n)
        .map(|j| {
            let v = cols[layout.plus[j]].clone();
            match layout.minus[j] {
                Some(mc) => v - &cols[mc],
                None => v,
            }
        })
        .collect()
}

/// Phase-one duals give `π` with `A'ᵀπ ≤ 0` on real columns and `b'ᵀπ > 0`;
/// the negated, row-sign-corrected vector is a Farkas certificate, scaled so
/// the combined right-hand side is exactly `-1`.
fn farkas_from_phase_one(
    lp: &LinearProgram,
    layout: &Layout,
    t: &Tableau,
    phase_one_cost: &[Q],
) -> Vec<BigRational> {
    let mut mu: Vec<BigRational> = (0..lp.rows.len())
        .map(|r| {
            let u = layout.unit[r];
            let pi = phase_one_cost[u].sub(&t.reduced[u]).to_ratio();
            if layout.sign[r] {
                -pi
            } else {
                pi
            }
        })
        .collect();
    let combined: BigRational = mu.iter().zip(&lp.rows).map(|(m, row)| m * &row.rhs).sum();
    if combined.is_negative() {
        let scale = -combined.recip();
        for v in mu.iter_mut() {
            *v *= &scale;
        }
    }
    mu
}
