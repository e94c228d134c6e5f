//! Exact two-phase simplex with Bland's rule. All variables are nonnegative.

use crate::rational::Q;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Lp {
    pub n_vars: usize,
    /// Maximized.
    pub objective: Vec<Q>,
    pub constraints: Vec<(Vec<Q>, Cmp, Q)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

impl Lp {
    pub fn new(n_vars: usize) -> Lp {
        Lp {
            n_vars,
            objective: vec![Q::zero(); n_vars],
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, row: Vec<Q>, cmp: Cmp, rhs: Q) {
        assert_eq!(row.len(), self.n_vars);
        self.constraints.push((row, cmp, rhs));
    }
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Q {
        &self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pr = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pr) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over columns where `allowed` is true. Returns false if unbounded.
    fn run(&mut self, cost: &[Q], allowed: &[bool]) -> bool {
        loop {
            let mut entering = None;
            for j in 0..self.width {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.rows[r][j].is_zero() {
                        rc -= &cost[b] * &self.rows[r][j];
                    }
                }
                if rc.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut best: Option<(usize, Q)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][c];
                if a.is_positive() {
                    let ratio = self.rhs(r) / a;
                    let better = match &best {
                        None => true,
                        Some((br, bv)) => {
                            ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br])
                        }
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }

    fn objective_value(&self, cost: &[Q]) -> Q {
        self.basis
            .iter()
            .enumerate()
            .map(|(r, &b)| &cost[b] * self.rhs(r))
            .sum()
    }
}

pub fn solve(lp: &Lp) -> LpResult {
    let n = lp.n_vars;
    let m = lp.constraints.len();
    let mut rows_in: Vec<(Vec<Q>, Cmp, Q)> = Vec::with_capacity(m);
    for (row, cmp, rhs) in &lp.constraints {
        if rhs.is_negative() {
            let flipped = match cmp {
                Cmp::Le => Cmp::Ge,
                Cmp::Ge => Cmp::Le,
                Cmp::Eq => Cmp::Eq,
            };
            rows_in.push((row.iter().map(|v| -v).collect(), flipped, -rhs));
        } else {
            rows_in.push((row.clone(), *cmp, rhs.clone()));
        }
    }
    let n_slack = rows_in.iter().filter(|r| r.1 != Cmp::Eq).count();
    let n_art = rows_in.iter().filter(|r| r.1 != Cmp::Le).count();
    let width = n + n_slack + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut si, mut ai) = (n, n + n_slack);
    for (row, cmp, rhs) in &rows_in {
        let mut t = vec![Q::zero(); width + 1];
        t[..n].clone_from_slice(row);
        t[width] = rhs.clone();
        match cmp {
            Cmp::Le => {
                t[si] = Q::one();
                basis.push(si);
                si += 1;
            }
            Cmp::Ge => {
                t[si] = -Q::one();
                si += 1;
                t[ai] = Q::one();
                basis.push(ai);
                ai += 1;
            }
            Cmp::Eq => {
                t[ai] = Q::one();
                basis.push(ai);
                ai += 1;
            }
        }
        rows.push(t);
    }
    let mut tab = Tableau { rows, basis, width };
    let art_start = n + n_slack;
    if n_art > 0 {
        let mut cost = vec![Q::zero(); width];
        for c in cost.iter_mut().skip(art_start) {
            *c = -Q::one();
        }
        let allowed = vec![true; width];
        tab.run(&cost, &allowed);
        if !tab.objective_value(&cost).is_zero() {
            return LpResult::Infeasible;
        }
        // Drive zero-level artificials out of the basis where possible.
        let mut r = 0;
        while r < tab.rows.len() {
            if tab.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&c| !tab.rows[r][c].is_zero()) {
                    tab.pivot(r, c);
                } else {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
            r += 1;
        }
    }
    let mut cost = vec![Q::zero(); width];
    cost[..n].clone_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
    if !tab.run(&cost, &allowed) {
        return LpResult::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(r).clone();
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpResult::Optimal { value, x }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = Lp::new(2);
        lp.objective = vec![q(3), q(5)];
        lp.add(vec![q(1), q(0)], Cmp::Le, q(4));
        lp.add(vec![q(0), q(2)], Cmp::Le, q(12));
        lp.add(vec![q(3), q(2)], Cmp::Le, q(18));
        assert_eq!(
            solve(&lp),
            LpResult::Optimal {
                value: q(36),
                x: vec![q(2), q(6)]
            }
        );
    }

    #[test]
    fn equality_and_ge() {
        // max -x - y, x + y = 1, x >= 1/3
        let mut lp = Lp::new(2);
        lp.objective = vec![q(-1), q(0)];
        lp.add(vec![q(1), q(1)], Cmp::Eq, q(1));
        lp.add(vec![q(1), q(0)], Cmp::Ge, qr(1, 3));
        match solve(&lp) {
            LpResult::Optimal { value, x } => {
                assert_eq!(value, qr(-1, 3));
                assert_eq!(x, vec![qr(1, 3), qr(2, 3)]);
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = Lp::new(1);
        lp.add(vec![q(1)], Cmp::Ge, q(2));
        lp.add(vec![q(1)], Cmp::Le, q(1));
        assert_eq!(solve(&lp), LpResult::Infeasible);
        let mut lp = Lp::new(1);
        lp.objective = vec![q(1)];
        lp.add(vec![q(1)], Cmp::Ge, q(0));
        assert_eq!(solve(&lp), LpResult::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = Lp::new(2);
        lp.objective = vec![q(1), q(0)];
        lp.add(vec![q(1), q(1)], Cmp::Eq, q(1));
        lp.add(vec![q(2), q(2)], Cmp::Eq, q(2));
        match solve(&lp) {
            LpResult::Optimal { value, .. } => assert_eq!(value, q(1)),
            r => panic!("{r:?}"),
        }
    }
}
