//! Mixed-radix indexing of tuples over a finite domain.
//!
//! A tuple `(t_0, …, t_{m-1})` over labels `0..d` has index
//! `t_0·d^{m-1} + … + t_{m-1}`, so lexicographic tuple order and index order
//! coincide.

use crate::error::{Error, Result};

/// `d^m`, or `None` on overflow.
pub fn checked_pow(d: usize, m: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..m {
        acc = acc.checked_mul(d as u64)?;
    }
    Some(acc)
}

/// `d^m` bounded by `cap`; errors with a resource message when exceeded.
pub fn bounded_pow(d: usize, m: usize, cap: u64, what: &str) -> Result<usize> {
    match checked_pow(d, m) {
        Some(n) if n <= cap => Ok(n as usize),
        _ => Err(Error::Resource(format!(
            "{what}: {d}^{m} exceeds the cap of {cap}"
        ))),
    }
}

pub fn tuple_index(tuple: &[usize], d: usize) -> u64 {
    tuple.iter().fold(0u64, |acc, &x| acc * d as u64 + x as u64)
}

pub fn index_to_tuple(mut index: u64, d: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for slot in out.iter_mut().rev() {
        *slot = (index % d as u64) as usize;
        index /= d as u64;
    }
    out
}

/// Advances `tuple` to its lexicographic successor; returns false after the
/// last tuple (leaving it reset to all zeros).
pub fn next_tuple(tuple: &mut [usize], d: usize) -> bool {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < d {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Iterator over all of `D^m` in lexicographic order.
pub struct Tuples {
    current: Option<Vec<usize>>,
    d: usize,
}

impl Iterator for Tuples {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let mut next = out.clone();
        self.current = if next_tuple(&mut next, self.d) {
            Some(next)
        } else {
            None
        };
        Some(out)
    }
}

pub fn all_tuples(d: usize, m: usize) -> Tuples {
    Tuples {
        current: if d == 0 && m > 0 { None } else { Some(vec![0; m]) },
        d,
    }
}

/// All subsets of `0..n` of size `1..=max_size`, each sorted, ordered by size
/// and then lexicographically.
pub fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=max_size.min(n) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(combo.clone());
            let mut i = size;
            let mut advanced = false;
            while i > 0 {
                i -= 1;
                if combo[i] < n - size + i {
                    combo[i] += 1;
                    for j in i + 1..size {
                        combo[j] = combo[j - 1] + 1;
                    }
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for (i, t) in all_tuples(3, 3).enumerate() {
            assert_eq!(tuple_index(&t, 3), i as u64);
            assert_eq!(index_to_tuple(i as u64, 3, 3), t);
        }
        assert_eq!(all_tuples(2, 0).count(), 1);
        assert_eq!(all_tuples(3, 2).count(), 9);
    }

    #[test]
    fn subsets_are_enumerated_by_size() {
        let s = subsets_up_to(4, 2);
        assert_eq!(s.len(), 4 + 6);
        assert_eq!(s[0], vec![0]);
        assert_eq!(s[4], vec![0, 1]);
        assert_eq!(s.last().unwrap(), &vec![2, 3]);
        assert_eq!(subsets_up_to(6, 3).len(), 6 + 15 + 20);
    }

    #[test]
    fn pow_cap() {
        assert!(bounded_pow(2, 16, 1 << 16, "x").is_ok());
        assert!(bounded_pow(2, 17, 1 << 16, "x").is_err());
        assert_eq!(checked_pow(10, 30), None);
    }
}
