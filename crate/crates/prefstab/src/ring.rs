//! Minimal commutative-ring interface so payoff and fitness formulas can run
//! over exact rationals or over polynomials in the shares and in `p`.

use crate::rational::Q;
use num_traits::{One, Zero};

pub trait Ring: Clone + std::fmt::Debug {
    fn nil() -> Self;
    fn unit() -> Self;
    fn from_q(x: &Q) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn is_nil(&self) -> bool;

    fn scale(&self, c: &Q) -> Self {
        self.times(&Self::from_q(c))
    }

    fn power(&self, k: usize) -> Self {
        let mut r = Self::unit();
        for _ in 0..k {
            r = r.times(self);
        }
        r
    }

    fn one_minus(&self) -> Self {
        Self::unit().minus(self)
    }
}

impl Ring for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
}

pub fn sum<R: Ring>(items: impl IntoIterator<Item = R>) -> R {
    items.into_iter().fold(R::nil(), |a, b| a.plus(&b))
}
