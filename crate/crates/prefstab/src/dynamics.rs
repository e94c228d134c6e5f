//! Discrete replicator dynamics over type shares with frozen strategies.

use crate::config::{average_fitness, Configuration};
use crate::error::{structural, Result};
use crate::rational::{floor_to, to_decimal, Q};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicatorRule {
    /// Added to every fitness after subtracting the population minimum.
    pub shift: Q,
    /// Shares are rounded down to multiples of `10^-digits`; the largest share
    /// absorbs the remainder so every population still sums to one.
    pub digits: u32,
}

impl ReplicatorRule {
    /// Shift `1 + |min payoff|`, forty decimal digits.
    pub fn for_config(config: &Configuration) -> ReplicatorRule {
        ReplicatorRule {
            shift: Q::from_integer(1.into()) + config.game.min_payoff().abs(),
            digits: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub shares: Vec<Vec<Q>>,
    pub fitness: Vec<Vec<Q>>,
}

fn fitness_table(config: &Configuration) -> Result<Vec<Vec<Q>>> {
    (0..config.n())
        .map(|i| {
            (0..config.mu.populations[i].types.len())
                .map(|t| average_fitness(config, i, t))
                .collect()
        })
        .collect()
}

/// Runs `steps` updates; the result holds the initial point and one point per step.
pub fn simulate(config: &Configuration, steps: i64, rule: &ReplicatorRule) -> Result<Vec<TrajectoryPoint>> {
    if steps <= 0 {
        return structural("the number of steps must be positive");
    }
    if !rule.shift.is_positive() {
        return structural("the shift must be positive");
    }
    let den = BigInt::from(10u32).pow(rule.digits);
    let mut current = config.clone();
    let mut out = Vec::with_capacity(steps as usize + 1);
    for step in 0..=steps as usize {
        let fitness = fitness_table(&current)?;
        out.push(TrajectoryPoint {
            step,
            shares: current.mu.shares(),
            fitness: fitness.clone(),
        });
        if step == steps as usize {
            break;
        }
        for (i, pop) in current.mu.populations.iter_mut().enumerate() {
            let f_min = fitness[i].iter().min().cloned().unwrap_or_else(Q::zero);
            let weights: Vec<Q> = pop
                .shares
                .iter()
                .zip(&fitness[i])
                .map(|(s, f)| {
                    let w = f - &f_min + &rule.shift;
                    s * if w.is_negative() { Q::zero() } else { w }
                })
                .collect();
            let total: Q = weights.iter().sum();
            let mut next: Vec<Q> = weights.iter().map(|w| floor_to(&(w / &total), &den)).collect();
            let big = (0..next.len()).max_by(|&a, &b| next[a].cmp(&next[b]).then(b.cmp(&a))).unwrap_or(0);
            let rest: Q = next.iter().enumerate().filter(|(k, _)| *k != big).map(|(_, x)| x.clone()).sum();
            next[big] = Q::from_integer(1.into()) - rest;
            pop.shares = next;
        }
    }
    Ok(out)
}

/// CSV with columns `step,population,type,share,fitness`; indices are 1-based.
pub fn to_csv(points: &[TrajectoryPoint], digits: usize) -> String {
    let mut s = String::from("step,population,type,share,fitness\n");
    for p in points {
        for (i, (sh, fi)) in p.shares.iter().zip(&p.fitness).enumerate() {
            for (t, (x, f)) in sh.iter().zip(fi).enumerate() {
                let _ = writeln!(s, "{},{},{},{},{}", p.step, i + 1, t + 1, to_decimal(x, digits), to_decimal(f, digits));
            }
        }
    }
    s
}
