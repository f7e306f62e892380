//! The min-sensitive partial order.
//!
//! `a ⪕ b` compares minima first. On a tie, the vector whose minimum is
//! attained on a strictly smaller index set is larger; if the argmin sets
//! coincide, the comparison recurses on the coordinates outside the argmin,
//! keeping their original relative order.
//!
//! The comparisons are generic over any totally ordered coordinate type so the
//! lattice oracle can run them on scaled integers. No tolerance exists here:
//! argmin sets are compared by exact equality.

use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderResult {
    Equal,
    Less,
    Greater,
    Incomparable,
}

/// A nonempty vector of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RVector(Vec<Rational>);

impl RVector {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        Ok(RVector(coords))
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> &Rational {
        self.0.iter().min().expect("nonempty")
    }

    pub fn argmin(&self) -> Vec<usize> {
        argmin_set(&self.0)
    }

    pub fn leq(&self, other: &RVector) -> Result<bool> {
        min_sensitive_leq(&self.0, &other.0)
    }

    pub fn compare(&self, other: &RVector) -> Result<OrderResult> {
        compare(&self.0, &other.0)
    }
}

impl fmt::Display for RVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Zero-based indices attaining the minimum. Empty only for an empty slice.
pub fn argmin_set<T: Ord>(a: &[T]) -> Vec<usize> {
    let Some(m) = a.iter().min() else {
        return Vec::new();
    };
    a.iter().enumerate().filter(|(_, x)| *x == m).map(|(i, _)| i).collect()
}

pub fn min_sensitive_leq<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<bool> {
    check_dims(a.len(), b.len())?;
    Ok(leq_unchecked(a, b))
}

pub(crate) fn leq_unchecked<T: Ord + Clone>(a: &[T], b: &[T]) -> bool {
    let mut a: Vec<T> = a.to_vec();
    let mut b: Vec<T> = b.to_vec();
    loop {
        if a == b {
            return true;
        }
        if a.len() == 1 {
            return a[0] <= b[0];
        }
        let (min_a, min_b) = (a.iter().min().unwrap(), b.iter().min().unwrap());
        if min_a != min_b {
            return min_a < min_b;
        }
        let arg_a = argmin_set(&a);
        let arg_b = argmin_set(&b);
        if arg_a == arg_b {
            // a != b, so the common argmin is a proper subset.
            a = restrict(&a, &arg_a);
            b = restrict(&b, &arg_b);
            continue;
        }
        // Argmin b ⊊ Argmin a; both lists are sorted.
        return arg_b.len() < arg_a.len() && arg_b.iter().all(|i| arg_a.binary_search(i).is_ok());
    }
}

fn restrict<T: Clone>(v: &[T], removed: &[usize]) -> Vec<T> {
    v.iter().enumerate().filter(|(i, _)| removed.binary_search(i).is_err()).map(|(_, x)| x.clone()).collect()
}

pub fn compare<T: Ord + Clone>(a: &[T], b: &[T]) -> Result<OrderResult> {
    check_dims(a.len(), b.len())?;
    if a == b {
        return Ok(OrderResult::Equal);
    }
    Ok(match (leq_unchecked(a, b), leq_unchecked(b, a)) {
        (true, false) => OrderResult::Less,
        (false, true) => OrderResult::Greater,
        (false, false) => OrderResult::Incomparable,
        (true, true) => unreachable!("antisymmetry"),
    })
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    if left == 0 {
        return Err(Error::EmptyVector);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn remark_pairs() {
        assert!(!min_sensitive_leq(&v(&[0, 1]), &v(&[1, 0])).unwrap());
        assert!(min_sensitive_leq(&v(&[0, 2]), &v(&[1, 1])).unwrap());
        assert!(min_sensitive_leq(&v(&[3, -1, 2]), &v(&[3, -1, 2])).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        assert!(matches!(
            min_sensitive_leq(&v(&[0, 5, 5]), &v(&[0, 5])),
            Err(Error::DimensionMismatch { left: 3, right: 2 })
        ));
        assert!(compare::<Rational>(&[], &[]).is_err());
    }

    #[test]
    fn compare_cases() {
        assert_eq!(compare(&v(&[0, 1]), &v(&[1, 0])).unwrap(), OrderResult::Incomparable);
        assert_eq!(compare(&v(&[0, 0]), &v(&[0, 0])).unwrap(), OrderResult::Equal);
        assert_eq!(compare(&v(&[1, 1]), &v(&[0, 2])).unwrap(), OrderResult::Greater);
        assert_eq!(compare(&v(&[0, 2]), &v(&[1, 1])).unwrap(), OrderResult::Less);
    }

    #[test]
    fn argmin_examples() {
        assert_eq!(argmin_set(&v(&[2, 1, 1])), vec![1, 2]);
        assert_eq!(argmin_set(&v(&[5])), vec![0]);
        assert_eq!(argmin_set(&v(&[0, 0, 0])), vec![0, 1, 2]);
    }

    #[test]
    fn smaller_argmin_wins() {
        // Same minimum; b attains it on {0} only.
        assert!(min_sensitive_leq(&v(&[0, 0, 9]), &v(&[0, 1, 1])).unwrap());
        assert!(!min_sensitive_leq(&v(&[0, 1, 1]), &v(&[0, 0, 9])).unwrap());
    }

    #[test]
    fn recursion_uses_surviving_coordinates() {
        // Common argmin {0}; the rest compares (3, 1) against (1, 2): min 1 on both,
        // argmins {1} vs {0} -> incomparable.
        assert_eq!(compare(&v(&[0, 3, 1]), &v(&[0, 1, 2])).unwrap(), OrderResult::Incomparable);
        assert!(min_sensitive_leq(&v(&[0, 1, 5]), &v(&[0, 2, 2])).unwrap());
    }

    #[test]
    fn rvector_requires_coordinates() {
        assert!(RVector::new(vec![]).is_err());
        let a = RVector::new(v(&[2, 1, 1])).unwrap();
        assert_eq!(a.argmin(), vec![1, 2]);
        assert_eq!(a.min(), &int(1));
        assert_eq!(a.to_string(), "(2, 1, 1)");
    }

    fn small_vec(n: usize) -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(-2i64..=2, n)
    }

    fn triple() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, Vec<i64>)> {
        (1usize..=5).prop_flat_map(|n| (small_vec(n), small_vec(n), small_vec(n)))
    }

    proptest! {
        #[test]
        fn partial_order_axioms((a, b, c) in triple()) {
            let ab = leq_unchecked(&a, &b);
            let ba = leq_unchecked(&b, &a);
            let bc = leq_unchecked(&b, &c);
            prop_assert!(leq_unchecked(&a, &a));
            if ab && ba {
                prop_assert_eq!(&a, &b);
            }
            if ab && bc {
                prop_assert!(leq_unchecked(&a, &c));
            }
            if ab {
                prop_assert!(a.iter().min() <= b.iter().min());
            }
            if a.iter().zip(&b).all(|(x, y)| x <= y) {
                prop_assert!(ab);
            }
        }
    }
}
