//! Exact rationals for the tableau: machine-word fractions while they fit,
//! `BigRational` otherwise.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Invariant: `Small(n, d)` has `d > 0`, `gcd(n, d) = 1`, and `n`, `d` both
/// away from `i64::MIN` so negation cannot overflow. `Big` is used only when
/// the reduced value does not fit `Small`.
#[derive(Clone, Debug)]
pub(crate) enum Q {
    Small(i64, i64),
    Big(BigRational),
}

/// Binary gcd.
fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 || b == 0 {
        return a | b;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

fn gcd128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64) as i128;
    }
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i128
}

impl Q {
    pub(crate) fn zero() -> Q {
        Q::Small(0, 1)
    }

    pub(crate) fn one() -> Q {
        Q::Small(1, 1)
    }

    /// Reduces `n/d` (with `d ≠ 0`) computed in 128 bits.
    fn from_i128(mut n: i128, mut d: i128) -> Q {
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        let fits = |v: i128| v > i64::MIN as i128 && v <= i64::MAX as i128;
        if fits(n) && fits(d) {
            Q::Small(n as i64, d as i64)
        } else {
            Q::Big(BigRational::new(BigInt::from(n), BigInt::from(d)))
        }
    }

    fn from_big(q: BigRational) -> Q {
        match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => Q::Small(n, d),
            _ => Q::Big(q),
        }
    }

    pub(crate) fn from_ratio(q: &BigRational) -> Q {
        Q::from_big(q.clone())
    }

    pub(crate) fn to_ratio(&self) -> BigRational {
        match self {
            Q::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Q::Big(q) => q.clone(),
        }
    }

    pub(crate) fn is_zero(&self) -> bool {
        match self {
            Q::Small(n, _) => *n == 0,
            Q::Big(q) => q.is_zero(),
        }
    }

    pub(crate) fn is_one(&self) -> bool {
        match self {
            Q::Small(n, d) => *n == 1 && *d == 1,
            Q::Big(q) => q.is_one(),
        }
    }

    pub(crate) fn is_positive(&self) -> bool {
        match self {
            Q::Small(n, _) => *n > 0,
            Q::Big(q) => q.is_positive(),
        }
    }

    pub(crate) fn is_negative(&self) -> bool {
        match self {
            Q::Small(n, _) => *n < 0,
            Q::Big(q) => q.is_negative(),
        }
    }

    pub(crate) fn neg(&self) -> Q {
        match self {
            Q::Small(n, d) => Q::Small(-n, *d),
            Q::Big(q) => Q::Big(-q),
        }
    }

    pub(crate) fn recip(&self) -> Q {
        match self {
            Q::Small(n, d) => Q::from_i128(*d as i128, *n as i128),
            Q::Big(q) => Q::from_big(q.recip()),
        }
    }

    pub(crate) fn add(&self, other: &Q) -> Q {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    Q::from_i128(a + c, b)
                } else {
                    Q::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Q::from_big(self.to_ratio() + other.to_ratio()),
        }
    }

    pub(crate) fn sub(&self, other: &Q) -> Q {
        self.add(&other.neg())
    }

    pub(crate) fn mul(&self, other: &Q) -> Q {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => {
                Q::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Q::from_big(self.to_ratio() * other.to_ratio()),
        }
    }

    pub(crate) fn div(&self, other: &Q) -> Q {
        self.mul(&other.recip())
    }

    /// `self - f·x`, the tableau update.
    pub(crate) fn sub_mul(&self, f: &Q, x: &Q) -> Q {
        match (self, f, x) {
            (Q::Small(a, b), Q::Small(fn_, fd), Q::Small(xn, xd)) => {
                let (pn, pd) = (*fn_ as i128 * *xn as i128, *fd as i128 * *xd as i128);
                let (a, b) = (*a as i128, *b as i128);
                // Products of two i64 fit i128; the sum needs one more check.
                match (a.checked_mul(pd), pn.checked_mul(b), b.checked_mul(pd)) {
                    (Some(l), Some(r), Some(den)) => match l.checked_sub(r) {
                        Some(num) => Q::from_i128(num, den),
                        None => self.sub(&f.mul(x)),
                    },
                    _ => self.sub(&f.mul(x)),
                }
            }
            _ => self.sub(&f.mul(x)),
        }
    }
}

impl PartialEq for Q {
    fn eq(&self, other: &Q) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Q {}

impl PartialOrd for Q {
    fn partial_cmp(&self, other: &Q) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Q {
    fn cmp(&self, other: &Q) -> Ordering {
        match (self, other) {
            (Q::Small(a, b), Q::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_ratio().cmp(&other.to_ratio()),
        }
    }
}
