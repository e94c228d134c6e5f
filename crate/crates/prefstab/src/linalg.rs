//! Exact Gaussian elimination.

use crate::rational::Q;
use num_traits::Zero;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinSol {
    Unique(Vec<Q>),
    Inconsistent,
    Underdetermined,
}

/// Solves `a x = b` for `a` with any shape.
pub fn solve(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> LinSol {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&k| !a[k][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        b.swap(r, p);
        let pv = a[r][c].clone();
        for v in a[r].iter_mut() {
            *v /= &pv;
        }
        b[r] /= &pv;
        for k in 0..rows {
            if k != r && !a[k][c].is_zero() {
                let f = a[k][c].clone();
                for j in 0..cols {
                    let d = &f * &a[r][j];
                    a[k][j] -= d;
                }
                let d = &f * &b[r];
                b[k] -= d;
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if b[r..].iter().any(|v| !v.is_zero()) {
        return LinSol::Inconsistent;
    }
    if pivots.len() < cols {
        return LinSol::Underdetermined;
    }
    let mut x = vec![Q::zero(); cols];
    for (k, &c) in pivots.iter().enumerate() {
        x[c] = b[k].clone();
    }
    LinSol::Unique(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    #[test]
    fn square_system() {
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        assert_eq!(solve(a, vec![q(3), q(5)]), LinSol::Unique(vec![qr(4, 5), qr(7, 5)]));
    }

    #[test]
    fn degenerate_systems() {
        let a = vec![vec![q(1), q(1)], vec![q(2), q(2)]];
        assert_eq!(solve(a.clone(), vec![q(1), q(2)]), LinSol::Underdetermined);
        assert_eq!(solve(a, vec![q(1), q(3)]), LinSol::Inconsistent);
        let tall = vec![vec![q(1)], vec![q(2)], vec![q(3)]];
        assert_eq!(solve(tall, vec![q(1), q(2), q(3)]), LinSol::Unique(vec![q(1)]));
    }
}
