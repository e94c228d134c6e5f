//! Polynomials with exact rational coefficients: multivariate in the mutant
//! shares and the observability degree, and univariate root tools.

use crate::rational::{fmt_q, Q};
use crate::ring::Ring;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Eps(usize),
    P,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Eps(j) => write!(f, "eps{}", j + 1),
            Var::P => write!(f, "p"),
        }
    }
}

pub type Monomial = BTreeMap<Var, u32>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Q>,
}

pub type EpsPolynomial = Poly;

impl Poly {
    pub fn constant(c: Q) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::new(), c);
        }
        Poly { terms }
    }

    pub fn var(v: Var) -> Poly {
        let mut m = Monomial::new();
        m.insert(v, 1);
        let mut terms = BTreeMap::new();
        terms.insert(m, Q::one());
        Poly { terms }
    }

    pub fn eps(j: usize) -> Poly {
        Poly::var(Var::Eps(j))
    }

    pub fn p() -> Poly {
        Poly::var(Var::P)
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Q> {
        &self.terms
    }

    fn push(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.values().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut v: Vec<Var> = self.terms.keys().flat_map(|m| m.keys().copied()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn constant_term(&self) -> Q {
        self.terms
            .get(&Monomial::new())
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.terms.keys().all(|m| m.is_empty()) {
            Some(self.constant_term())
        } else {
            None
        }
    }

    /// Evaluates at the given assignment. Missing variables are an error.
    pub fn eval(&self, at: &BTreeMap<Var, Q>) -> Option<Q> {
        let mut acc = Q::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in m {
                let x = at.get(v)?;
                t *= crate::rational::pow(x, k as usize);
            }
            acc += t;
        }
        Some(acc)
    }

    pub fn substitute(&self, v: Var, by: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m, c) in &self.terms {
            let mut rest = m.clone();
            let k = rest.remove(&v).unwrap_or(0);
            let mut t = Poly {
                terms: BTreeMap::from([(rest, c.clone())]),
            };
            for _ in 0..k {
                t = t.times(by);
            }
            out = out.plus(&t);
        }
        out
    }

    pub fn substitute_q(&self, v: Var, x: &Q) -> Poly {
        self.substitute(v, &Poly::constant(x.clone()))
    }

    /// Restriction to the ray where every share variable equals `t`.
    /// Any remaining `P` must have been substituted already.
    pub fn diagonal(&self) -> Option<UPoly> {
        let mut c: Vec<Q> = Vec::new();
        for (m, coef) in &self.terms {
            if m.contains_key(&Var::P) {
                return None;
            }
            let d: u32 = m.values().sum();
            let d = d as usize;
            if c.len() <= d {
                c.resize(d + 1, Q::zero());
            }
            c[d] += coef;
        }
        Some(UPoly::new(c))
    }

    /// Univariate view in `v` when it is the only variable.
    pub fn univariate(&self, v: Var) -> Option<UPoly> {
        let mut c: Vec<Q> = Vec::new();
        for (m, coef) in &self.terms {
            if m.keys().any(|w| *w != v) {
                return None;
            }
            let d = *m.get(&v).unwrap_or(&0) as usize;
            if c.len() <= d {
                c.resize(d + 1, Q::zero());
            }
            c[d] += coef;
        }
        Some(UPoly::new(c))
    }

    pub fn monomial_key(m: &Monomial) -> String {
        if m.is_empty() {
            return "1".to_string();
        }
        m.iter()
            .map(|(v, k)| if *k == 1 { v.to_string() } else { format!("{v}^{k}") })
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut o = serde_json::Map::new();
        for (m, c) in &self.terms {
            o.insert(Poly::monomial_key(m), serde_json::Value::String(fmt_q(c)));
        }
        serde_json::Value::Object(o)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            if m.is_empty() {
                write!(f, "{}", fmt_q(&a))?;
            } else if a.is_one() {
                write!(f, "{}", Poly::monomial_key(m))?;
            } else {
                write!(f, "{}*{}", fmt_q(&a), Poly::monomial_key(m))?;
            }
        }
        Ok(())
    }
}

impl Ring for Poly {
    fn nil() -> Self {
        Poly::default()
    }
    fn unit() -> Self {
        Poly::constant(Q::one())
    }
    fn from_q(x: &Q) -> Self {
        Poly::constant(x.clone())
    }
    fn plus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.push(m.clone(), c.clone());
        }
        r
    }
    fn minus(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.push(m.clone(), -c);
        }
        r
    }
    fn times(&self, o: &Self) -> Self {
        let mut r = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = m1.clone();
                for (v, k) in m2 {
                    *m.entry(*v).or_insert(0) += k;
                }
                r.push(m, c1 * c2);
            }
        }
        r
    }
    fn is_nil(&self) -> bool {
        self.terms.is_empty()
    }
    fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Poly::default();
        }
        Poly {
            terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect(),
        }
    }
}

/// Univariate polynomial, coefficients from the constant term up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly {
    c: Vec<Q>,
}

/// A real root given exactly or by an isolating interval `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootBound {
    Exact(Q),
    Between(Q, Q),
}

impl RootBound {
    pub fn lower(&self) -> &Q {
        match self {
            RootBound::Exact(x) | RootBound::Between(x, _) => x,
        }
    }

    pub fn upper(&self) -> &Q {
        match self {
            RootBound::Exact(x) | RootBound::Between(_, x) => x,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, RootBound::Exact(_))
    }
}

const DIVISOR_CAP: u64 = 1_000_000_000_000;
const REFINE_BITS: u32 = 40;

impl UPoly {
    pub fn new(mut c: Vec<Q>) -> UPoly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly { c }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.c.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Lowest-order nonzero coefficient: its sign is the sign just right of 0.
    pub fn lowest(&self) -> Option<(usize, &Q)> {
        self.c.iter().enumerate().find(|(_, x)| !x.is_zero())
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, x)| x * Q::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    fn lead(&self) -> &Q {
        self.c.last().expect("nonzero polynomial")
    }

    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.c.clone();
        let dd = d.c.len() - 1;
        if r.len() <= dd {
            return (UPoly::new(vec![]), self.clone());
        }
        let mut quo = vec![Q::zero(); r.len() - dd];
        for k in (0..quo.len()).rev() {
            let f = &r[k + dd] / d.lead();
            if !f.is_zero() {
                for (j, dc) in d.c.iter().enumerate() {
                    r[k + j] -= &f * dc;
                }
            }
            quo[k] = f;
        }
        (UPoly::new(quo), UPoly::new(r))
    }

    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let l = a.lead().clone();
        UPoly::new(a.c.iter().map(|x| x / &l).collect())
    }

    pub fn square_free(&self) -> UPoly {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    fn sturm(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(UPoly::new(r.c.iter().map(|x| -x).collect()));
        }
        seq
    }

    fn sign_changes(seq: &[UPoly], x: &Q) -> usize {
        let mut last = 0i8;
        let mut n = 0;
        for p in seq {
            let v = p.eval(x);
            let s = if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    n += 1;
                }
                last = s;
            }
        }
        n
    }

    /// Rational roots, by the rational root theorem. `None` when the
    /// coefficients are too large to enumerate divisors.
    pub fn rational_roots(&self) -> Option<Vec<Q>> {
        if self.is_zero() {
            return Some(vec![]);
        }
        let mut out = Vec::new();
        let mut p = self.clone();
        if p.c[0].is_zero() {
            out.push(Q::zero());
            let k = p.c.iter().position(|x| !x.is_zero()).unwrap();
            p = UPoly::new(p.c[k..].to_vec());
        }
        if p.degree() == Some(0) {
            return Some(out);
        }
        let l = p
            .c
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = p.c.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
        let a0 = ints[0].abs();
        let an = ints.last().unwrap().abs();
        let cap = BigInt::from(DIVISOR_CAP);
        if a0 > cap || an > cap {
            return None;
        }
        let dn = divisors(&a0);
        let dd = divisors(&an);
        let mut cands: Vec<Q> = Vec::new();
        for a in &dn {
            for b in &dd {
                let r = Q::new(a.clone(), b.clone());
                cands.push(r.clone());
                cands.push(-r);
            }
        }
        cands.sort();
        cands.dedup();
        for r in cands {
            if p.eval(&r).is_zero() {
                out.push(r);
            }
        }
        out.sort();
        Some(out)
    }

    /// All distinct real roots in the open interval `(lo, hi)`, ascending.
    pub fn roots_in(&self, lo: &Q, hi: &Q) -> Vec<RootBound> {
        if self.is_zero() || self.degree() == Some(0) {
            return vec![];
        }
        let sf = self.square_free();
        let mut out: Vec<RootBound> = Vec::new();
        let mut rest = sf.clone();
        if let Some(rs) = sf.rational_roots() {
            for r in rs {
                rest = rest.div_rem(&UPoly::new(vec![-r.clone(), Q::one()])).0;
                if &r > lo && &r < hi {
                    out.push(RootBound::Exact(r));
                }
            }
        }
        if rest.degree().unwrap_or(0) > 0 {
            let seq = rest.sturm();
            let mut stack = vec![(lo.clone(), hi.clone())];
            while let Some((a, b)) = stack.pop() {
                // Count roots in (a, b); b itself is handled by the split logic.
                let mut count = Self::sign_changes(&seq, &a) as i64 - Self::sign_changes(&seq, &b) as i64;
                if rest.eval(&b).is_zero() {
                    count -= 1;
                }
                if count <= 0 {
                    continue;
                }
                if count == 1 {
                    out.push(rest.isolate(&seq, a, b));
                    continue;
                }
                let mid = (&a + &b) / Q::from_integer(2.into());
                if rest.eval(&mid).is_zero() {
                    out.push(RootBound::Exact(mid.clone()));
                }
                stack.push((a, mid.clone()));
                stack.push((mid, b));
            }
        }
        out.sort_by(|x, y| x.lower().cmp(y.lower()));
        out
    }

    fn isolate(&self, seq: &[UPoly], mut a: Q, mut b: Q) -> RootBound {
        let width = Q::new(BigInt::one(), BigInt::one() << REFINE_BITS);
        while &b - &a > width {
            let mid = (&a + &b) / Q::from_integer(2.into());
            let v = self.eval(&mid);
            if v.is_zero() {
                return RootBound::Exact(mid);
            }
            let left = Self::sign_changes(seq, &a) as i64 - Self::sign_changes(seq, &mid) as i64;
            if left >= 1 {
                b = mid;
            } else {
                a = mid;
            }
        }
        RootBound::Between(a, b)
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut out = Vec::new();
    let r = n.sqrt();
    let mut d = BigInt::one();
    while d <= r {
        if (n % &d).is_zero() {
            out.push(d.clone());
            let e = n / &d;
            if e != d {
                out.push(e);
            }
        }
        d += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    #[test]
    fn expand_and_evaluate() {
        let e = Poly::eps(0);
        let p = Ring::times(&e.one_minus(), &Poly::constant(q(1)));
        let f = Ring::plus(&p, &Ring::times(&e, &Poly::constant(q(3))));
        assert_eq!(f.to_string(), "1 + 2*eps1");
        let at = BTreeMap::from([(Var::Eps(0), qr(1, 2))]);
        assert_eq!(f.eval(&at), Some(q(2)));
    }

    #[test]
    fn substitution_and_diagonal() {
        let f = Ring::times(&Poly::eps(0), &Poly::eps(1));
        let g = Ring::plus(&f, &Poly::p());
        let h = g.substitute_q(Var::P, &q(0));
        assert_eq!(h.diagonal().unwrap().coeffs(), &[q(0), q(0), q(1)]);
        assert!(g.diagonal().is_none());
    }

    #[test]
    fn rational_and_irrational_roots() {
        // (x - 1/3)(x^2 - 2)
        let f = UPoly::new(vec![qr(2, 3), q(-2), qr(-1, 3), q(1)]);
        let r = f.roots_in(&q(0), &q(2));
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], RootBound::Exact(qr(1, 3)));
        match &r[1] {
            RootBound::Between(a, b) => {
                assert!(a * a < q(2) && b * b > q(2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repeated_roots() {
        // (x - 1/2)^2 (x - 3/4)
        let a = UPoly::new(vec![qr(-1, 2), q(1)]);
        let b = UPoly::new(vec![qr(-3, 4), q(1)]);
        let mul = |x: &UPoly, y: &UPoly| {
            let mut c = vec![Q::zero(); x.coeffs().len() + y.coeffs().len() - 1];
            for (i, u) in x.coeffs().iter().enumerate() {
                for (j, v) in y.coeffs().iter().enumerate() {
                    c[i + j] += u * v;
                }
            }
            UPoly::new(c)
        };
        let f = mul(&mul(&a, &a), &b);
        assert_eq!(
            f.roots_in(&q(0), &q(1)),
            vec![RootBound::Exact(qr(1, 2)), RootBound::Exact(qr(3, 4))]
        );
    }
}
