//! Exact dense linear algebra: reduced row echelon form over a field, and
//! fraction-free rank / constant-pivot inversion over polynomial matrices.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::gaussian::GaussianRational;
use super::wpoly::WPoly;

pub trait Field: Clone + PartialEq + Zero + One
where
    for<'a> &'a Self: Add<&'a Self, Output = Self>
        + Sub<&'a Self, Output = Self>
        + Mul<&'a Self, Output = Self>
        + Div<&'a Self, Output = Self>
        + Neg<Output = Self>,
{
}

impl Field for BigRational {}
impl Field for GaussianRational {}

/// In-place reduced row echelon form. Returns the pivot columns in order.
pub fn rref<T: Field>(m: &mut [Vec<T>]) -> Vec<usize>
where
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + Div<&'a T, Output = T>
        + Neg<Output = T>,
{
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = &T::one() / &m[r][c];
        for j in c..cols {
            m[r][j] = &m[r][j] * &inv;
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..cols {
                if m[r][j].is_zero() {
                    continue;
                }
                let t = &f * &m[r][j];
                m[i][j] = &m[i][j] - &t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: Field>(m: &[Vec<T>]) -> usize
where
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + Div<&'a T, Output = T>
        + Neg<Output = T>,
{
    let mut c = m.to_vec();
    rref(&mut c).len()
}

/// Outcome of solving `A x = b`.
#[derive(Clone, Debug, PartialEq)]
pub enum Solution<T> {
    Unique(Vec<T>),
    /// A particular solution and the dimension of the solution space.
    Family(Vec<T>, usize),
    Inconsistent,
}

pub fn solve<T: Field>(a: &[Vec<T>], b: &[T], n_unknowns: usize) -> Solution<T>
where
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + Div<&'a T, Output = T>
        + Neg<Output = T>,
{
    let mut aug: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&n_unknowns) {
        return Solution::Inconsistent;
    }
    let mut x = vec![T::zero(); n_unknowns];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][n_unknowns].clone();
    }
    if pivots.len() == n_unknowns {
        Solution::Unique(x)
    } else {
        Solution::Family(x, n_unknowns - pivots.len())
    }
}

/// Express `target` in the span of `basis` (each a vector of equal length).
pub fn express_in<T: Field>(basis: &[Vec<T>], target: &[T]) -> Option<Vec<T>>
where
    for<'a> &'a T: Add<&'a T, Output = T>
        + Sub<&'a T, Output = T>
        + Mul<&'a T, Output = T>
        + Div<&'a T, Output = T>
        + Neg<Output = T>,
{
    let n = basis.len();
    let len = target.len();
    let a: Vec<Vec<T>> = (0..len).map(|i| basis.iter().map(|v| v[i].clone()).collect()).collect();
    match solve(&a, target, n) {
        Solution::Unique(x) => Some(x),
        Solution::Family(x, _) => Some(x),
        Solution::Inconsistent => None,
    }
}

/// Rank over the fraction field of the polynomial ring, by fraction-free
/// (Bareiss) elimination. Pivots prefer constants, then fewest terms.
pub fn symbolic_rank(m: &[Vec<WPoly>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a = m.to_vec();
    let mut prev: Option<WPoly> = None;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pick = (r..rows)
            .filter(|&i| !a[i][c].is_zero())
            .min_by_key(|&i| (a[i][c].as_constant().is_none(), a[i][c].n_terms()));
        let Some(p) = pick else { continue };
        a.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let t = &(&a[r][c] * &a[i][j]) - &(&a[i][c] * &a[r][j]);
                a[i][j] = match &prev {
                    None => t,
                    Some(d) => t.div_exact(d).expect("Bareiss division must be exact"),
                };
            }
            a[i][c] = WPoly::zero(a[i][c].table());
        }
        prev = Some(a[r][c].clone());
        r += 1;
    }
    r
}

/// Inverse of a square polynomial matrix using only constant pivots, which
/// succeeds exactly for the unipotent-by-constant block shapes of graded frames.
pub fn invert_constant_pivot(m: &[Vec<WPoly>]) -> Option<Vec<Vec<WPoly>>> {
    let n = m.len();
    if n == 0 {
        return Some(vec![]);
    }
    let table = m[0][0].table().clone();
    let mut a = m.to_vec();
    let mut inv: Vec<Vec<WPoly>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { WPoly::one(&table) } else { WPoly::zero(&table) }).collect())
        .collect();
    let mut used = vec![false; n];
    let mut pivot_row_of_col = vec![usize::MAX; n];
    for c in 0..n {
        let p = (0..n).find(|&i| !used[i] && a[i][c].as_constant().map(|x| !x.is_zero()).unwrap_or(false))?;
        used[p] = true;
        pivot_row_of_col[c] = p;
        let s = a[p][c].as_constant().unwrap().inv();
        for j in 0..n {
            a[p][j] = a[p][j].scale(&s);
            inv[p][j] = inv[p][j].scale(&s);
        }
        for i in 0..n {
            if i == p || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in 0..n {
                if !a[p][j].is_zero() {
                    a[i][j] = &a[i][j] - &(&f * &a[p][j]);
                }
                if !inv[p][j].is_zero() {
                    inv[i][j] = &inv[i][j] - &(&f * &inv[p][j]);
                }
            }
        }
    }
    // row p now holds e_c; reorder so that row c of the result is row p
    Some((0..n).map(|c| inv[pivot_row_of_col[c]].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::VariableTable;
    use num_bigint::BigInt;
    use std::sync::Arc;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn rref_rank_and_solve() {
        let m = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(1), q(0), q(1)]];
        assert_eq!(rank(&m), 2);
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        match solve(&a, &[q(3), q(4)], 2) {
            Solution::Unique(x) => assert_eq!(x, vec![q(1), q(1)]),
            other => panic!("{other:?}"),
        }
        assert_eq!(solve(&[vec![q(1)], vec![q(1)]], &[q(1), q(2)], 1), Solution::Inconsistent);
    }

    #[test]
    fn symbolic_rank_detects_generic_dependence() {
        let t = Arc::new(VariableTable::new(&[2]));
        let z = WPoly::var(&t, t.z());
        let one = WPoly::one(&t);
        // rows (1, z) and (z, z^2) are dependent over the fraction field
        let m = vec![vec![one.clone(), z.clone()], vec![z.clone(), &z * &z]];
        assert_eq!(symbolic_rank(&m), 1);
        let m2 = vec![vec![z.clone(), one.clone()], vec![one.clone(), z.clone()]];
        assert_eq!(symbolic_rank(&m2), 2);
    }

    #[test]
    fn constant_pivot_inverse() {
        let t = Arc::new(VariableTable::new(&[2]));
        let z = WPoly::var(&t, t.z());
        let one = WPoly::one(&t);
        let zero = WPoly::zero(&t);
        let m = vec![vec![one.clone(), z.clone()], vec![zero.clone(), one.scale(&GaussianRational::from_int(2))]];
        let inv = invert_constant_pivot(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = WPoly::zero(&t);
                for k in 0..2 {
                    s = &s + &(&m[i][k] * &inv[k][j]);
                }
                assert_eq!(s, if i == j { one.clone() } else { zero.clone() });
            }
        }
    }
}
