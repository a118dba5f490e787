//! Finite operations `D^k → D` and their composition.

use std::fmt;

use crate::error::{Error, Result};
use crate::tuples::{all_tuples, bounded_pow, tuple_index};

/// Largest operation table we are willing to materialise.
pub const MAX_OPERATION_TABLE: u64 = 1 << 20;

/// A `k`-ary operation on `{0, …, d-1}`, stored as a lexicographic table.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operation {
    domain: usize,
    arity: usize,
    table: Vec<usize>,
}

impl Operation {
    pub fn from_table(domain: usize, arity: usize, table: Vec<usize>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Structural("operations must have arity ≥ 1".into()));
        }
        let size = bounded_pow(domain, arity, MAX_OPERATION_TABLE, "operation table")?;
        if table.len() != size {
            return Err(Error::Structural(format!(
                "operation table has {} entries, expected {size}",
                table.len()
            )));
        }
        if let Some(&x) = table.iter().find(|&&x| x >= domain) {
            return Err(Error::Structural(format!("operation value {x} out of range")));
        }
        Ok(Operation {
            domain,
            arity,
            table,
        })
    }

    pub fn from_fn(domain: usize, arity: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        bounded_pow(domain, arity, MAX_OPERATION_TABLE, "operation table")?;
        let table = all_tuples(domain, arity).map(|t| f(&t)).collect();
        Operation::from_table(domain, arity, table)
    }

    /// `proj^(k)_i`, with `i` counted from 0.
    pub fn projection(domain: usize, arity: usize, i: usize) -> Result<Self> {
        if i >= arity {
            return Err(Error::Structural(format!(
                "projection index {i} out of range for arity {arity}"
            )));
        }
        Operation::from_fn(domain, arity, |t| t[i])
    }

    pub fn identity(domain: usize) -> Self {
        Operation::projection(domain, 1, 0).expect("unary identity")
    }

    pub fn constant(domain: usize, arity: usize, value: usize) -> Result<Self> {
        Operation::from_fn(domain, arity, |_| value)
    }

    /// Binary minimum under the natural label order.
    pub fn min(domain: usize) -> Self {
        Operation::from_fn(domain, 2, |t| t[0].min(t[1])).expect("binary table")
    }

    /// Binary maximum under the natural label order.
    pub fn max(domain: usize) -> Self {
        Operation::from_fn(domain, 2, |t| t[0].max(t[1])).expect("binary table")
    }

    /// Ternary majority; on all-distinct arguments returns the first one.
    pub fn majority(domain: usize) -> Self {
        Operation::from_fn(domain, 3, |t| {
            if t[1] == t[2] {
                t[1]
            } else {
                t[0]
            }
        })
        .expect("ternary table")
    }

    /// Ternary minority on `{0,1}`: `x ⊕ y ⊕ z`. For larger domains,
    /// `minority(x,x,y) = y` on repeated patterns and the first argument
    /// otherwise.
    pub fn minority(domain: usize) -> Self {
        Operation::from_fn(domain, 3, |t| {
            if domain == 2 {
                t[0] ^ t[1] ^ t[2]
            } else if t[0] == t[1] {
                t[2]
            } else if t[0] == t[2] {
                t[1]
            } else {
                t[0]
            }
        })
        .expect("ternary table")
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, args: &[usize]) -> usize {
        debug_assert_eq!(args.len(), self.arity);
        self.table[tuple_index(args, self.domain) as usize]
    }

    /// Coordinatewise application to `k` tuples of equal length `m`.
    pub fn apply_rows(&self, rows: &[&[usize]]) -> Vec<usize> {
        debug_assert_eq!(rows.len(), self.arity);
        let m = rows.first().map_or(0, |r| r.len());
        let mut args = vec![0; self.arity];
        (0..m)
            .map(|j| {
                for (a, r) in args.iter_mut().zip(rows) {
                    *a = r[j];
                }
                self.apply(&args)
            })
            .collect()
    }

    pub fn is_idempotent(&self) -> bool {
        (0..self.domain).all(|x| self.apply(&vec![x; self.arity]) == x)
    }

    pub fn is_conservative(&self) -> bool {
        all_tuples(self.domain, self.arity)
            .zip(&self.table)
            .all(|(t, v)| t.contains(v))
    }

    pub fn is_commutative_binary(&self) -> bool {
        self.arity == 2
            && (0..self.domain)
                .all(|x| (0..self.domain).all(|y| self.apply(&[x, y]) == self.apply(&[y, x])))
    }

    /// Unary bijection test.
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.domain];
        self.arity == 1
            && self.table.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
    }

    /// The image `f(D^k)` as a sorted label list.
    pub fn image(&self) -> Vec<usize> {
        let mut seen = vec![false; self.domain];
        for &v in &self.table {
            seen[v] = true;
        }
        (0..self.domain).filter(|&x| seen[x]).collect()
    }

    /// `f(x, …, x, y, x, …, x)` with `y` at `position`.
    pub fn one_off(&self, x: usize, y: usize, position: usize) -> usize {
        let mut args = vec![x; self.arity];
        args[position] = y;
        self.apply(&args)
    }

    /// Majority identities `f(y,x,x) = f(x,y,x) = f(x,x,y) = x`.
    pub fn is_majority(&self) -> bool {
        self.arity == 3
            && (0..self.domain).all(|x| {
                (0..self.domain).all(|y| (0..3).all(|p| self.one_off(x, y, p) == x))
            })
    }

    /// Minority identities `f(y,x,x) = f(x,y,x) = f(x,x,y) = y`.
    pub fn is_minority(&self) -> bool {
        self.arity == 3
            && (0..self.domain).all(|x| {
                (0..self.domain).all(|y| (0..3).all(|p| self.one_off(x, y, p) == y))
            })
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}/{}:", self.arity, self.domain)?;
        for v in &self.table {
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

/// `f[g_1, …, g_k](x) = f(g_1(x), …, g_k(x))`.
pub fn compose(f: &Operation, gs: &[Operation]) -> Result<Operation> {
    if gs.len() != f.arity() {
        return Err(Error::Structural(format!(
            "composing a {}-ary operation with {} operations",
            f.arity(),
            gs.len()
        )));
    }
    let inner = gs[0].arity();
    if gs.iter().any(|g| g.arity() != inner || g.domain() != f.domain()) {
        return Err(Error::Structural(
            "inner operations must share arity and domain".into(),
        ));
    }
    let size = gs[0].table.len();
    let mut args = vec![0; f.arity()];
    let table = (0..size)
        .map(|i| {
            for (a, g) in args.iter_mut().zip(gs) {
                *a = g.table[i];
            }
            f.apply(&args)
        })
        .collect();
    Operation::from_table(f.domain(), inner, table)
}

/// Weak near-unanimity: idempotent and all one-off patterns agree.
pub fn is_wnu(f: &Operation) -> bool {
    if f.arity() < 2 || !f.is_idempotent() {
        return false;
    }
    (0..f.domain()).all(|x| {
        (0..f.domain()).all(|y| {
            let first = f.one_off(x, y, 0);
            (1..f.arity()).all(|p| f.one_off(x, y, p) == first)
        })
    })
}

/// The ternary/4-ary linking identity `f(y,x,x) = g(y,x,x,x)`.
pub fn satisfies_bwc_identity(f: &Operation, g: &Operation) -> bool {
    f.arity() == 3
        && g.arity() == 4
        && f.domain() == g.domain()
        && (0..f.domain())
            .all(|x| (0..f.domain()).all(|y| f.one_off(x, y, 0) == g.one_off(x, y, 0)))
}

/// Calls `visit` on every `k`-ary operation on a `d`-element domain, in
/// lexicographic table order, optionally only idempotent ones.
pub fn for_each_operation(
    d: usize,
    k: usize,
    idempotent_only: bool,
    cap: u64,
    mut visit: impl FnMut(&Operation),
) -> Result<()> {
    let cells = bounded_pow(d, k, MAX_OPERATION_TABLE, "operation table")?;
    let free: Vec<usize> = if idempotent_only {
        let diag: Vec<usize> = (0..d)
            .map(|x| tuple_index(&vec![x; k], d) as usize)
            .collect();
        (0..cells).filter(|i| !diag.contains(i)).collect()
    } else {
        (0..cells).collect()
    };
    bounded_pow(d, free.len(), cap, "operation enumeration")?;
    let mut table = vec![0usize; cells];
    if idempotent_only {
        for x in 0..d {
            table[tuple_index(&vec![x; k], d) as usize] = x;
        }
    }
    loop {
        visit(&Operation {
            domain: d,
            arity: k,
            table: table.clone(),
        });
        // Odometer over the free cells, last cell fastest.
        let mut advanced = false;
        for &cell in free.iter().rev() {
            table[cell] += 1;
            if table[cell] < d {
                advanced = true;
                break;
            }
            table[cell] = 0;
        }
        if !advanced {
            break;
        }
    }
    Ok(())
}
