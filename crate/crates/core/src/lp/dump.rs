use std::fmt::Write;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Bound, LinearProgram, RowRelation, Sense};
use crate::rational::format_rational;

fn term(out: &mut String, first: bool, coeff: &BigRational, var: &str) {
    let neg = coeff.is_negative();
    let abs = coeff.abs();
    let sign = match (first, neg) {
        (true, false) => "",
        (true, true) => "-",
        (false, false) => " + ",
        (false, true) => " - ",
    };
    if abs.is_one() {
        let _ = write!(out, "{sign}{var}");
    } else {
        let _ = write!(out, "{sign}{} {var}", format_rational(&abs));
    }
}

/// Renders the program in the familiar `Minimize / Subject To / Bounds / End`
/// text layout. Coefficients are printed exactly, as `p/q` when fractional.
pub fn to_lp_text(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense {
        Sense::Minimize => "Minimize\n obj: ",
        Sense::Maximize => "Maximize\n obj: ",
    });
    let mut first = true;
    for (j, c) in lp.objective.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        term(&mut out, first, c, &lp.var_names[j]);
        first = false;
    }
    if first {
        out.push('0');
    }
    out.push_str("\nSubject To\n");
    for row in &lp.rows {
        let _ = write!(out, " {}: ", row.name);
        let mut first = true;
        for (j, a) in &row.coeffs {
            term(&mut out, first, a, &lp.var_names[*j]);
            first = false;
        }
        if first {
            out.push('0');
        }
        let rel = match row.relation {
            RowRelation::Le => "<=",
            RowRelation::Eq => "=",
            RowRelation::Ge => ">=",
        };
        let _ = writeln!(out, " {rel} {}", format_rational(&row.rhs));
    }
    let free: Vec<&str> = lp
        .bounds
        .iter()
        .zip(&lp.var_names)
        .filter(|(b, _)| **b == Bound::Free)
        .map(|(_, n)| n.as_str())
        .collect();
    if !free.is_empty() {
        out.push_str("Bounds\n");
        for name in free {
            let _ = writeln!(out, " {name} free");
        }
    }
    out.push_str("End\n");
    out
}
