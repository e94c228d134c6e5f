//! Sufficiency routes for stability, invasion barriers and observability
//! thresholds.

use super::{StabilityVerdict, StableRoute};
use crate::config::{aggregate_outcome, status_weight, Configuration, Regime};
use crate::efficiency::{dominance_of, efficiency_status, Dominance};
use crate::equilibrium::{classify_nash, is_aggregate_strong_nash_pure, is_pure_nash, is_strict_nash_pure, Tri};
use crate::error::{structural, Result};
use crate::game::{cartesian, expected_payoff, nonempty_subsets, pure_profile, Game, MixedStrategy};
use crate::linalg::{self, LinSol};
use crate::poly::{Poly, RootBound, UPoly, Var};
use crate::rational::{fmt_q, Q};
use crate::ring::Ring;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Pure outcome played with certainty, if there is one.
pub(crate) fn pure_outcome(config: &Configuration) -> Option<Vec<usize>> {
    let out = aggregate_outcome(config);
    out.correlated.point_mass().map(|k| config.game.profile(k))
}

/// True when every incumbent type has `a[i]` as its strictly dominant action.
pub(crate) fn all_dominant(config: &Configuration, a: &[usize]) -> bool {
    config.mu.populations.iter().enumerate().all(|(i, pop)| {
        pop.types
            .iter()
            .all(|t| t.strictly_dominant_action(&config.game) == Some(a[i]))
    })
}

fn with_action(a: &[usize], i: usize, x: usize) -> Vec<usize> {
    let mut b = a.to_vec();
    b[i] = x;
    b
}

/// Barrier for dominant-action incumbents at an aggregate strong equilibrium:
/// the minimum over proper coalitions `S` of `m_S / (m_S + B_S)`, where `m_S`
/// is the least total loss of `S` from a joint deviation and `B_S` the largest
/// total loss it inflicts on everyone else.
pub fn aggregate_strong_barrier(game: &Game, a: &[usize]) -> Q {
    let n = game.n();
    let base = game.payoff_vec(a);
    let mut best = Q::one();
    for s in nonempty_subsets(n) {
        if s.len() == n {
            continue;
        }
        let dims: Vec<usize> = s.iter().map(|&i| game.num_actions(i)).collect();
        let mut m_s: Option<Q> = None;
        let mut b_s = Q::zero();
        for choice in cartesian(&dims) {
            let mut prof = a.to_vec();
            for (k, &i) in s.iter().enumerate() {
                prof[i] = choice[k];
            }
            if prof == a {
                continue;
            }
            let v = game.payoff_vec(&prof);
            let loss: Q = s.iter().map(|&i| &base[i] - &v[i]).sum();
            m_s = Some(match m_s {
                Some(m) if m <= loss => m,
                _ => loss,
            });
            let inflicted: Q = (0..n)
                .filter(|i| !s.contains(i))
                .map(|i| {
                    let d = &base[i] - &v[i];
                    if d.is_positive() {
                        d
                    } else {
                        Q::zero()
                    }
                })
                .sum();
            if inflicted > b_s {
                b_s = inflicted;
            }
        }
        if let Some(m) = m_s {
            if b_s.is_positive() {
                let bound = &m / (&m + &b_s);
                if bound < best {
                    best = bound;
                }
            }
        }
    }
    best
}

pub(crate) fn aggregate_strong_route(config: &Configuration) -> Option<StableRoute> {
    let a = pure_outcome(config)?;
    if !all_dominant(config, &a) || !is_aggregate_strong_nash_pure(&config.game, &a) {
        return None;
    }
    let g = &config.game;
    Some(StableRoute {
        name: "aggregate-strong-equilibrium",
        premises: vec![
            format!("every incumbent type plays its strictly dominant action in {}", g.profile_label(&a)),
            "the outcome is an aggregate strong equilibrium".into(),
        ],
        barrier: Some(aggregate_strong_barrier(g, &a)),
        notes: vec![],
    })
}

/// Vertices of `{x in simplex(m) : rows . x <= 0}`.
fn vertices(m: usize, rows: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let mut ineq: Vec<Vec<Q>> = rows.to_vec();
    for k in 0..m {
        let mut r = vec![Q::zero(); m];
        r[k] = -Q::one();
        ineq.push(r);
    }
    let mut out: Vec<Vec<Q>> = Vec::new();
    let pick = m - 1;
    let total = ineq.len();
    let mut idx: Vec<usize> = (0..pick).collect();
    loop {
        let mut a: Vec<Vec<Q>> = idx.iter().map(|&k| ineq[k].clone()).collect();
        let mut b = vec![Q::zero(); pick];
        a.push(vec![Q::one(); m]);
        b.push(Q::one());
        if let LinSol::Unique(x) = linalg::solve(a, b) {
            let feasible = ineq
                .iter()
                .all(|r| r.iter().zip(&x).map(|(c, v)| c * v).sum::<Q>() <= Q::zero());
            if feasible && !out.contains(&x) {
                out.push(x);
            }
        }
        if pick == 0 {
            break;
        }
        let mut k = pick;
        while k > 0 && idx[k - 1] == total - pick + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for l in k..pick {
            idx[l] = idx[l - 1] + 1;
        }
    }
    out.sort();
    out
}

struct SideBounds {
    /// Largest ratio of the incumbent's loss to the mutant's shortfall.
    c: Q,
    /// Least shortfall of a mutant whose match outcome differs from the status quo.
    gap: Q,
}

/// Bounds for a mutant in population `j` against the incumbent of the other
/// population, over every behaviour the incumbent may meet with a best reply.
fn side_bounds(config: &Configuration, a: &[usize], j: usize, base: &[Q]) -> Option<SideBounds> {
    let g = &config.game;
    let o = 1 - j;
    let u_o = &config.mu.populations[o].types[0].utilities;
    let m = g.num_actions(j);
    let prof = |x: usize, y: usize| if j == 0 { vec![x, y] } else { vec![y, x] };
    let mut c = Q::zero();
    let mut gap: Option<Q> = None;
    for y in 0..g.num_actions(o) {
        let rows: Vec<Vec<Q>> = (0..g.num_actions(o))
            .filter(|&z| z != y)
            .map(|z| (0..m).map(|x| &u_o[g.index(&prof(x, z))] - &u_o[g.index(&prof(x, y))]).collect())
            .collect();
        let verts = vertices(m, &rows);
        let star = MixedStrategy::pure(a[j], m);
        let contains_star = verts.iter().any(|v| v.as_slice() == star.weights())
            || rows.iter().all(|r| r[a[j]] <= Q::zero());
        for v in &verts {
            let val = |i: usize| -> Q { (0..m).map(|x| &v[x] * g.payoff(&prof(x, y), i)).sum() };
            let u = val(j);
            if u > base[j] {
                return None;
            }
            let s = &base[j] - &u;
            let l = &base[o] - val(o);
            if s.is_zero() {
                if l.is_positive() {
                    return None;
                }
            } else {
                let r = &l / &s;
                if r > c {
                    c = r;
                }
            }
            let is_star = y == a[o] && v.as_slice() == star.weights();
            if !is_star {
                gap = Some(match gap {
                    Some(gp) if gp <= s => gp,
                    _ => s.clone(),
                });
            }
        }
        if y == a[o] && contains_star && verts.len() > 1 {
            gap = Some(Q::zero());
        }
    }
    Some(SideBounds {
        c,
        gap: gap.unwrap_or_else(Q::one),
    })
}

fn approx(x: f64) -> Q {
    let d = 1000i64;
    Q::new(((x * d as f64).round() as i64).max(1).into(), d.into())
}

/// Two-population bounding argument for a monomorphic outcome under full
/// observability. The barrier balances a weighted payoff tradeoff `lambda`.
pub(crate) fn pairwise_route(config: &Configuration, grid: usize) -> Option<StableRoute> {
    let g = &config.game;
    if g.n() != 2 || config.mu.type_counts() != vec![1, 1] || !matches!(config.regime, Regime::P1 { .. }) {
        return None;
    }
    let a = pure_outcome(config)?;
    if !efficiency_status(g, &pure_profile(g, &a), grid).ok()?.is_pareto_efficient() {
        return None;
    }
    let base = g.payoff_vec(&a);
    let s1 = side_bounds(config, &a, 0, &base)?;
    let s2 = side_bounds(config, &a, 1, &base)?;
    // lambda = (1, r) with lambda . (pi(a') - pi(a)) <= 0 for every pure a'.
    let mut lo = Q::zero();
    let mut hi: Option<Q> = None;
    for prof in g.profiles() {
        let v = g.payoff_vec(&prof);
        let d0 = &v[0] - &base[0];
        let d1 = &v[1] - &base[1];
        if d1.is_positive() {
            if !d0.is_negative() {
                return None;
            }
            let b = -&d0 / &d1;
            hi = Some(match hi {
                Some(h) if h <= b => h,
                _ => b,
            });
        } else if d1.is_negative() {
            let b = -&d0 / &d1;
            if b > lo {
                lo = b;
            }
        } else if d0.is_positive() {
            return None;
        }
    }
    if let Some(h) = &hi {
        if h < &lo || !h.is_positive() {
            return None;
        }
    }
    let c1 = s1.c.clone();
    let c2 = s2.c.clone();
    let barrier_at = |r: &Q| -> Q {
        let b1 = Q::one() / (Q::one() + r * &c1);
        let b2 = r / (r + &c2);
        b1.min(b2)
    };
    let mut cands = vec![Q::one(), lo.clone()];
    if let Some(h) = &hi {
        cands.push(h.clone());
    }
    if c1.is_positive() {
        let ratio = (c2.to_f64()? / c1.to_f64()?).sqrt();
        cands.push(approx(ratio));
    } else {
        cands.push(Q::from_integer(1_000_000.into()));
    }
    let feasible = |r: &Q| r.is_positive() && r >= &lo && hi.as_ref().map_or(true, |h| r <= h);
    let (r, barrier) = cands
        .iter()
        .filter(|r| feasible(r))
        .map(|r| (r.clone(), barrier_at(r)))
        .max_by(|x, y| x.1.cmp(&y.1))?;
    let gap_bound = |j: usize, gap: &Q| -> Q {
        let vals: Vec<Q> = g.profiles().map(|p| g.payoff(&p, j).clone()).collect();
        let hi = vals.iter().max().cloned().unwrap_or_else(Q::zero);
        let lo = vals.iter().min().cloned().unwrap_or_else(Q::zero);
        if gap.is_zero() {
            Q::zero()
        } else {
            gap / (gap + hi - lo)
        }
    };
    Some(StableRoute {
        name: "pairwise-bounding",
        premises: vec![
            format!("{} is Pareto efficient", g.profile_label(&a)),
            "no mutant facing a best-replying incumbent beats the status quo".into(),
            format!("incumbent losses are at most {} and {} times the mutant shortfalls", fmt_q(&c2), fmt_q(&c1)),
            format!("tradeoff weights (1, {}) make every outcome weakly worse", fmt_q(&r)),
        ],
        barrier: Some(barrier),
        notes: vec![
            format!("gap bound for population 1: {}", fmt_q(&gap_bound(0, &s1.gap))),
            format!("gap bound for population 2: {}", fmt_q(&gap_bound(1, &s2.gap))),
        ],
    })
}

/// Two players, dominant-action incumbents, strict and efficient pure outcome.
pub(crate) fn dominant_efficient_route(config: &Configuration, grid: usize) -> Option<StableRoute> {
    let g = &config.game;
    if g.n() != 2 || matches!(config.regime, Regime::P0 { .. }) {
        return None;
    }
    let a = pure_outcome(config)?;
    if !all_dominant(config, &a) || !is_strict_nash_pure(g, &a) {
        return None;
    }
    if !efficiency_status(g, &pure_profile(g, &a), grid).ok()?.is_pareto_efficient() {
        return None;
    }
    Some(StableRoute {
        name: "dominant-efficient-strict",
        premises: vec![
            format!("every incumbent type plays its strictly dominant action in {}", g.profile_label(&a)),
            "the outcome is a strict Nash equilibrium".into(),
            "the outcome is Pareto efficient".into(),
        ],
        barrier: None,
        notes: vec![],
    })
}

/// Unobserved types, monomorphic materialists at a strict, completely mixed
/// or unique Nash equilibrium.
pub(crate) fn materialist_route(config: &Configuration, support_limit: usize) -> Option<StableRoute> {
    let g = &config.game;
    let Regime::P0 { s } = &config.regime else { return None };
    if config.mu.type_counts().iter().any(|&k| k != 1) {
        return None;
    }
    if !config.mu.populations.iter().all(|p| p.types[0].is_materialist(g)) {
        return None;
    }
    let x: Vec<MixedStrategy> = s.iter().map(|v| v[0].clone()).collect();
    let class = classify_nash(g, &x, support_limit).ok()?;
    let why = if class.strict {
        "strict"
    } else if class.completely_mixed {
        "completely mixed"
    } else if class.unique == Tri::Yes {
        "the unique equilibrium"
    } else {
        return None;
    };
    Some(StableRoute {
        name: "materialist-equilibrium",
        premises: vec![
            "every incumbent type is materialist".into(),
            format!("{} is a Nash equilibrium that is {}", g.render_profile(&x), why),
        ],
        barrier: None,
        notes: vec![],
    })
}

/// Unobserved types with dominant-action incumbents at a Nash equilibrium in
/// which at most one player is indifferent to some deviation.
pub(crate) fn dominant_unobserved_route(config: &Configuration) -> Option<StableRoute> {
    let g = &config.game;
    if !matches!(config.regime, Regime::P0 { .. }) {
        return None;
    }
    let a = pure_outcome(config)?;
    if !all_dominant(config, &a) || !is_pure_nash(g, &a) {
        return None;
    }
    let n = g.n();
    let base = g.payoff_vec(&a);
    let mut loose = Vec::new();
    let mut barrier = Q::one();
    for j in 0..n {
        let mut strict = true;
        for x in (0..g.num_actions(j)).filter(|&x| x != a[j]) {
            let gap = &base[j] - g.payoff(&with_action(&a, j, x), j);
            if !gap.is_positive() {
                strict = false;
                continue;
            }
            // Worst case of the payoff difference over opponents' profiles.
            let mut dims = g.action_counts();
            dims[j] = 1;
            let worst = cartesian(&dims)
                .into_iter()
                .map(|mut b| {
                    b[j] = x;
                    let dev = g.payoff(&b, j).clone();
                    b[j] = a[j];
                    dev - g.payoff(&b, j)
                })
                .max()
                .unwrap_or_else(Q::zero);
            if (&gap + &worst).is_positive() && n > 1 {
                let bound = &gap / (Q::from_integer(((n - 1) as i64).into()) * (&gap + &worst));
                if bound < barrier {
                    barrier = bound;
                }
            }
        }
        if !strict {
            loose.push(j);
        }
    }
    if loose.len() > 1 {
        return None;
    }
    let mut premises = vec![
        format!("every incumbent type plays its strictly dominant action in {}", g.profile_label(&a)),
        "the outcome is a Nash equilibrium".into(),
    ];
    premises.push(match loose.first() {
        None => "the equilibrium is strict".into(),
        Some(j) => format!("only population {} has a payoff-neutral deviation", j + 1),
    });
    Some(StableRoute {
        name: "dominant-unobserved",
        premises,
        barrier: Some(barrier),
        notes: vec![],
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thresholds {
    /// Above this degree every player prefers the dominating handshake.
    pub p_bar_high: Q,
    pub high_exact: bool,
    /// Below this degree a profitable deviator invades; absent when the
    /// outcome is a Nash equilibrium.
    pub p_bar_low: Option<Q>,
    pub low_exact: bool,
}

/// Advantage of a handshake mutant, as a polynomial in the observability degree.
pub fn handshake_advantage(game: &Game, a: &[usize], sigma: &[MixedStrategy], i: usize) -> Result<UPoly> {
    let n = game.n();
    let star = pure_profile(game, a);
    let base = game.payoff(a, i).clone();
    let p = Poly::p();
    let mut total = Poly::default();
    for mask in 0u32..(1 << n) {
        let prof: Vec<MixedStrategy> = (0..n)
            .map(|j| if mask & (1 << j) != 0 { star[j].clone() } else { sigma[j].clone() })
            .collect();
        let v = &expected_payoff(game, &prof)?[i] - &base;
        let k = mask.count_ones() as usize;
        total = total.plus(&status_weight(&p, n, k).scale(&v));
    }
    Ok(total.univariate(Var::P).expect("polynomial in p"))
}

fn last_root_upper(u: &UPoly) -> (Q, bool) {
    let mut c = u.coeffs().to_vec();
    while c.first().is_some_and(Zero::is_zero) {
        c.remove(0);
    }
    let u = UPoly::new(c);
    match u.roots_in(&Q::zero(), &Q::one()).last() {
        Some(RootBound::Exact(r)) => (r.clone(), true),
        Some(RootBound::Between(_, hi)) => (hi.clone(), false),
        None => (Q::zero(), true),
    }
}

/// Observability thresholds for a pure outcome `a` and a strategy profile
/// `sigma` that strictly improves every player's payoff.
pub fn observability_thresholds(game: &Game, a: &[usize], sigma: &[MixedStrategy]) -> Result<Thresholds> {
    let n = game.n();
    game.check_profile(&pure_profile(game, a))?;
    game.check_profile(sigma)?;
    let u = expected_payoff(game, sigma)?;
    let v = game.payoff_vec(a);
    if dominance_of(&u, &v) != Dominance::Strong {
        return structural(format!(
            "{} does not strictly improve every payoff over {}",
            game.render_profile(sigma),
            game.profile_label(a)
        ));
    }
    let mut high = Q::zero();
    let mut high_exact = true;
    for i in 0..n {
        let (r, exact) = last_root_upper(&handshake_advantage(game, a, sigma, i)?);
        if r > high {
            high = r;
            high_exact = exact;
        }
    }
    let (low, low_exact) = match low_threshold(game, a) {
        Some((q, e)) => (Some(q), e),
        None => (None, true),
    };
    Ok(Thresholds {
        p_bar_high: high,
        high_exact,
        p_bar_low: low,
        low_exact,
    })
}

/// Conservative degree below which the most profitable unilateral deviator
/// gains, whatever the observers reply: `(1 - p)^(n - 1) (gain + loss) = loss`.
pub fn low_threshold(game: &Game, a: &[usize]) -> Option<(Q, bool)> {
    let n = game.n();
    let v = game.payoff_vec(a);
    let (k, x, gain) = best_deviation(game, a)?;
    let mut loss = Q::zero();
    for prof in cartesian(&game.action_counts()) {
        if prof[k] == x {
            let l = &v[k] - game.payoff(&prof, k);
            if l > loss {
                loss = l;
            }
        }
    }
    if loss.is_zero() {
        return Some((Q::one(), true));
    }
    let target = &loss / (&gain + &loss);
    if n == 2 {
        return Some((Q::one() - target, true));
    }
    let one_minus = UPoly::new(vec![Q::one(), -Q::one()]);
    let mut f = UPoly::new(vec![Q::one()]);
    for _ in 0..n - 1 {
        f = mul(&f, &one_minus);
    }
    let mut c = f.coeffs().to_vec();
    c[0] -= &target;
    Some(match UPoly::new(c).roots_in(&Q::zero(), &Q::one()).first() {
        Some(RootBound::Exact(r)) => (r.clone(), true),
        Some(RootBound::Between(lo, _)) => (lo.clone(), false),
        None => (Q::zero(), true),
    })
}

fn mul(x: &UPoly, y: &UPoly) -> UPoly {
    let mut c = vec![Q::zero(); x.coeffs().len() + y.coeffs().len()];
    for (i, a) in x.coeffs().iter().enumerate() {
        for (j, b) in y.coeffs().iter().enumerate() {
            c[i + j] += a * b;
        }
    }
    UPoly::new(c)
}

/// Most profitable unilateral pure deviation from `a`, if any.
pub(crate) fn best_deviation(game: &Game, a: &[usize]) -> Option<(usize, usize, Q)> {
    let mut best: Option<(usize, usize, Q)> = None;
    for k in 0..game.n() {
        for x in 0..game.num_actions(k) {
            let gain = game.payoff(&with_action(a, k, x), k) - game.payoff(a, k);
            if gain.is_positive() && best.as_ref().map_or(true, |b| gain > b.2) {
                best = Some((k, x, gain));
            }
        }
    }
    best
}

/// Uniform invasion barrier reported by a stability route, if it has one.
pub fn uniform_invasion_barrier(verdict: &StabilityVerdict) -> Option<Q> {
    match verdict {
        StabilityVerdict::Stable(r) => r.barrier.clone(),
        _ => None,
    }
}
