//! Nash equilibrium checks, enumeration and refinements.

use crate::error::{structural, Error, Result};
use crate::game::{
    as_pure, cartesian, expected_payoff, grid_strategies, nonempty_subsets, profile_ring,
    pure_profile, Game, MixedProfile, MixedStrategy,
};
use crate::linalg::{self, LinSol};
use crate::poly::UPoly;
use crate::rational::Q;
use crate::ring::Ring;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

/// Value of each pure action of player `i` against the others' strategies,
/// evaluated on an arbitrary utility tensor.
pub fn action_values<R: Ring>(game: &Game, tensor: &[Q], st: &[Vec<R>], i: usize) -> Vec<R> {
    let m = game.num_actions(i);
    let mut s = st.to_vec();
    (0..m)
        .map(|a| {
            let mut e = vec![R::nil(); m];
            e[a] = R::unit();
            s[i] = e;
            game.multilinear(tensor, &s)
        })
        .collect()
}

/// First pure action of `i` strictly better than `st[i]` under `tensor`.
pub fn profitable_deviation(game: &Game, tensor: &[Q], st: &[Vec<Q>], i: usize) -> Option<(usize, Q)> {
    let vals = action_values(game, tensor, st, i);
    let cur: Q = vals.iter().zip(&st[i]).map(|(v, w)| v * w).sum();
    vals.into_iter()
        .enumerate()
        .find(|(_, v)| *v > cur)
        .map(|(a, v)| (a, v - cur))
}

pub fn is_nash(game: &Game, profile: &[MixedStrategy]) -> Result<bool> {
    game.check_profile(profile)?;
    let st: Vec<Vec<Q>> = profile_ring(profile);
    Ok((0..game.n()).all(|i| profitable_deviation(game, game.tensor(i), &st, i).is_none()))
}

fn require_pure(game: &Game, profile: &[MixedStrategy]) -> Result<Vec<usize>> {
    game.check_profile(profile)?;
    as_pure(profile).ok_or_else(|| Error::Structural("profile must be pure".into()))
}

pub fn is_strict_nash_pure(game: &Game, a: &[usize]) -> bool {
    (0..game.n()).all(|i| {
        let base = game.payoff(a, i);
        (0..game.num_actions(i)).filter(|&k| k != a[i]).all(|k| {
            let mut d = a.to_vec();
            d[i] = k;
            game.payoff(&d, i) < base
        })
    })
}

pub fn is_strict_nash(game: &Game, profile: &[MixedStrategy]) -> Result<bool> {
    let a = require_pure(game, profile)?;
    Ok(is_strict_nash_pure(game, &a))
}

pub fn is_pure_nash(game: &Game, a: &[usize]) -> bool {
    (0..game.n()).all(|i| {
        let base = game.payoff(a, i);
        (0..game.num_actions(i)).all(|k| {
            let mut d = a.to_vec();
            d[i] = k;
            game.payoff(&d, i) <= base
        })
    })
}

pub fn enumerate_pure_nash(game: &Game) -> Vec<Vec<usize>> {
    game.profiles().filter(|a| is_pure_nash(game, a)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedNash {
    pub equilibria: Vec<MixedProfile>,
    /// False when some support combination within the limit had a
    /// continuum or irrational solutions that were not enumerated.
    pub complete: bool,
}

pub fn solve_mixed_nash(game: &Game, support_limit: usize) -> Result<MixedNash> {
    if support_limit == 0 {
        return structural("support_limit must be at least 1");
    }
    let n = game.n();
    let max_a = game.action_counts().into_iter().max().unwrap();
    let lim = support_limit.min(max_a);
    let mut out = MixedNash {
        equilibria: Vec::new(),
        complete: true,
    };
    if lim == 1 {
        for a in enumerate_pure_nash(game) {
            out.equilibria.push(pure_profile(game, &a));
        }
        return Ok(out);
    }
    match n {
        2 => solve_two_player(game, lim, &mut out),
        3 if lim <= 2 => solve_three_player(game, &mut out),
        _ => {
            return Err(Error::SolverLimit(format!(
                "mixed equilibria for {n} players with supports up to {lim} are not supported"
            )))
        }
    }
    out.equilibria.sort();
    out.equilibria.dedup();
    Ok(out)
}

fn subsets_up_to(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut v: Vec<Vec<usize>> = (1u32..(1 << m))
        .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s| s.len() <= k)
        .collect();
    v.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    v
}

/// Strategy of the opponent `j` on `supp_j` making `i` indifferent across `supp_i`.
fn indifference(game: &Game, i: usize, supp_i: &[usize], j: usize, supp_j: &[usize]) -> LinSol {
    let k = supp_j.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &ai in supp_i {
        let mut row = Vec::with_capacity(k + 1);
        for &aj in supp_j {
            let mut prof = vec![0; 2];
            prof[i] = ai;
            prof[j] = aj;
            row.push(game.payoff(&prof, i).clone());
        }
        row.push(-Q::one());
        a.push(row);
        b.push(Q::zero());
    }
    let mut row = vec![Q::one(); k];
    row.push(Q::zero());
    a.push(row);
    b.push(Q::one());
    linalg::solve(a, b)
}

fn embed(game: &Game, j: usize, supp: &[usize], w: &[Q]) -> Option<MixedStrategy> {
    let mut v = vec![Q::zero(); game.num_actions(j)];
    for (&a, x) in supp.iter().zip(w) {
        if !x.is_positive() {
            return None;
        }
        v[a] = x.clone();
    }
    MixedStrategy::new(v).ok()
}

fn solve_two_player(game: &Game, lim: usize, out: &mut MixedNash) {
    let s1 = subsets_up_to(game.num_actions(0), lim);
    let s2 = subsets_up_to(game.num_actions(1), lim);
    for a in &s1 {
        for b in &s2 {
            let y = indifference(game, 0, a, 1, b);
            let x = indifference(game, 1, b, 0, a);
            let (xs, ys) = match (x, y) {
                (LinSol::Unique(x), LinSol::Unique(y)) => (x, y),
                (LinSol::Inconsistent, _) | (_, LinSol::Inconsistent) => continue,
                _ => {
                    out.complete = false;
                    continue;
                }
            };
            let (Some(sx), Some(sy)) = (
                embed(game, 0, a, &xs[..a.len()]),
                embed(game, 1, b, &ys[..b.len()]),
            ) else {
                continue;
            };
            let prof = vec![sx, sy];
            if is_nash(game, &prof).unwrap_or(false) {
                out.equilibria.push(prof);
            }
        }
    }
}

/// Indifference of player `i` between its two support actions as an affine
/// function of the other two players' first-action weights.
/// Returns coefficients `[c, c_u, c_v, c_uv]` for players `(u, v)` in increasing order.
fn bilinear_gap(game: &Game, i: usize, supp: &[Vec<usize>]) -> [Q; 4] {
    let others: Vec<usize> = (0..3).filter(|&k| k != i).collect();
    // value(a_u, a_v) of action difference
    let diff = |xu: usize, xv: usize| -> Q {
        let mut p = vec![0; 3];
        p[others[0]] = supp[others[0]][xu.min(supp[others[0]].len() - 1)];
        p[others[1]] = supp[others[1]][xv.min(supp[others[1]].len() - 1)];
        p[i] = supp[i][0];
        let hi = game.payoff(&p, i).clone();
        p[i] = supp[i][1];
        hi - game.payoff(&p, i)
    };
    // With u-weight t_u on its first support action and (1 - t_u) on its
    // second (or the same action if u is pure), the gap is bilinear.
    let d00 = diff(0, 0);
    let d01 = diff(0, 1);
    let d10 = diff(1, 0);
    let d11 = diff(1, 1);
    // g = t_u t_v d00 + t_u (1-t_v) d01 + (1-t_u) t_v d10 + (1-t_u)(1-t_v) d11
    let c = d11.clone();
    let cu = &d01 - &d11;
    let cv = &d10 - &d11;
    let cuv = &d00 - &d01 - &d10 + &d11;
    [c, cu, cv, cuv]
}

fn unit_interval_open(t: &Q) -> bool {
    t.is_positive() && *t < Q::one()
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

fn mixed2(game: &Game, j: usize, supp: &[usize], t: &Q) -> MixedStrategy {
    let mut v = vec![Q::zero(); game.num_actions(j)];
    if supp.len() == 1 {
        v[supp[0]] = Q::one();
    } else {
        v[supp[0]] = t.clone();
        v[supp[1]] = Q::one() - t;
    }
    MixedStrategy::new(v).expect("valid weights")
}

fn solve_three_player(game: &Game, out: &mut MixedNash) {
    let sets: Vec<Vec<Vec<usize>>> = (0..3).map(|i| subsets_up_to(game.num_actions(i), 2)).collect();
    for s0 in &sets[0] {
        for s1 in &sets[1] {
            for s2 in &sets[2] {
                let supp = vec![s0.clone(), s1.clone(), s2.clone()];
                three_player_support(game, &supp, out);
            }
        }
    }
}

fn three_player_support(game: &Game, supp: &[Vec<usize>], out: &mut MixedNash) {
    let mixed: Vec<usize> = (0..3).filter(|&i| supp[i].len() == 2).collect();
    let try_push = |ts: [Q; 3], out: &mut MixedNash| {
        let prof: MixedProfile = (0..3).map(|j| mixed2(game, j, &supp[j], &ts[j])).collect();
        if is_nash(game, &prof).unwrap_or(false) {
            out.equilibria.push(prof);
        }
    };
    let one = Q::one();
    match mixed.len() {
        0 => try_push([one.clone(), one.clone(), one], out),
        1 => {
            let i = mixed[0];
            let g = bilinear_gap(game, i, supp);
            if !g[0].is_zero() {
                return;
            }
            // Player i is indifferent; its weight t is pinned only by the
            // others' best-reply inequalities, which are affine in t.
            let mut lo = Q::zero();
            let mut hi = Q::one();
            for k in (0..3).filter(|&k| k != i) {
                let a = supp[k][0];
                for dev in 0..game.num_actions(k) {
                    // payoff(dev) - payoff(a) = u + v t must stay <= 0
                    let val = |first: bool, act: usize| {
                        let mut p: Vec<usize> = (0..3).map(|j| supp[j][0]).collect();
                        if !first {
                            p[i] = supp[i][1];
                        }
                        p[k] = act;
                        game.payoff(&p, k).clone()
                    };
                    let f1 = val(true, dev) - val(true, a);
                    let f0 = val(false, dev) - val(false, a);
                    let v = &f1 - &f0;
                    if v.is_zero() {
                        if f0.is_positive() {
                            return;
                        }
                    } else {
                        let root = -&f0 / &v;
                        if v.is_positive() {
                            hi = hi.min(root);
                        } else {
                            lo = lo.max(root);
                        }
                    }
                }
            }
            if lo == hi {
                if unit_interval_open(&lo) {
                    let mut ts = [Q::one(), Q::one(), Q::one()];
                    ts[i] = lo;
                    try_push(ts, out);
                }
            } else if lo < hi {
                out.complete = false;
            }
        }
        2 => {
            let (i, j) = (mixed[0], mixed[1]);
            // Player i's gap depends on j's weight only (the third player is pure).
            let solve_for = |who: usize, other: usize| -> Option<Option<Q>> {
                let g = bilinear_gap(game, who, supp);
                let others: Vec<usize> = (0..3).filter(|&k| k != who).collect();
                // pure third player sits at t = 1 for its slot
                let (c0, c1) = if others[0] == other {
                    (&g[0] + &g[2], &g[1] + &g[3])
                } else {
                    (&g[0] + &g[1], &g[2] + &g[3])
                };
                if c1.is_zero() {
                    if c0.is_zero() {
                        None
                    } else {
                        Some(None)
                    }
                } else {
                    Some(Some(-c0 / c1))
                }
            };
            let (Some(tj), Some(ti)) = (solve_for(i, j), solve_for(j, i)) else {
                out.complete = false;
                return;
            };
            let (Some(tj), Some(ti)) = (tj, ti) else { return };
            if unit_interval_open(&ti) && unit_interval_open(&tj) {
                let mut ts = [Q::one(), Q::one(), Q::one()];
                ts[i] = ti;
                ts[j] = tj;
                try_push(ts, out);
            }
        }
        _ => {
            // g1(t2,t3) = 0, g2(t1,t3) = 0, g3(t1,t2) = 0
            let g1 = bilinear_gap(game, 0, supp);
            let g2 = bilinear_gap(game, 1, supp);
            let g3 = bilinear_gap(game, 2, supp);
            // t2 = -(g1c + g1v t3) / (g1u + g1uv t3) = n2 / d2
            let n2 = [-g1[0].clone(), -g1[2].clone()];
            let d2 = [g1[1].clone(), g1[3].clone()];
            // g3 in (t1, t2): c + u t1 + v t2 + uv t1 t2 = 0 → t1 = -(c d2 + v n2) / (u d2 + uv n2)
            let lin = |a: &[Q; 2], s: &Q, b: &[Q; 2], r: &Q| [&a[0] * s + &b[0] * r, &a[1] * s + &b[1] * r];
            let n1 = lin(&d2, &-g3[0].clone(), &n2, &-g3[2].clone());
            let d1 = lin(&d2, &g3[1], &n2, &g3[3]);
            // g2 in (t1, t3): c + u t1 + v t3 + uv t1 t3 = 0, times d1:
            // c d1 + u n1 + v t3 d1 + uv t3 n1 = 0
            let mut poly = vec![Q::zero(); 3];
            for k in 0..2 {
                poly[k] += &g2[0] * &d1[k] + &g2[1] * &n1[k];
                poly[k + 1] += &g2[2] * &d1[k] + &g2[3] * &n1[k];
            }
            let up = UPoly::new(poly);
            let roots: Vec<Q> = match up.degree() {
                None => {
                    out.complete = false;
                    return;
                }
                Some(0) => vec![],
                Some(1) => vec![-&up.coeffs()[0] / &up.coeffs()[1]],
                Some(_) => {
                    let (c, b, a) = (&up.coeffs()[0], &up.coeffs()[1], &up.coeffs()[2]);
                    let disc = b * b - Q::from_integer(BigInt::from(4)) * a * c;
                    if disc.is_negative() {
                        vec![]
                    } else if let Some(sq) = rational_sqrt(&disc) {
                        let two_a = a * Q::from_integer(BigInt::from(2));
                        vec![(-b + &sq) / &two_a, (-b - sq) / two_a]
                    } else {
                        // Irrational candidates may lie in the unit cube.
                        out.complete = false;
                        vec![]
                    }
                }
            };
            for t3 in roots {
                if !unit_interval_open(&t3) {
                    continue;
                }
                let den2 = &d2[0] + &d2[1] * &t3;
                let den1 = &d1[0] + &d1[1] * &t3;
                if den2.is_zero() || den1.is_zero() {
                    out.complete = false;
                    continue;
                }
                let t2 = (&n2[0] + &n2[1] * &t3) / den2;
                let t1 = (&n1[0] + &n1[1] * &t3) / den1;
                if unit_interval_open(&t1) && unit_interval_open(&t2) {
                    try_push([t1, t2, t3], out);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NashClass {
    pub strict: bool,
    pub completely_mixed: bool,
    pub unique: Tri,
}

pub fn classify_nash(game: &Game, profile: &[MixedStrategy], support_limit: usize) -> Result<NashClass> {
    if !is_nash(game, profile)? {
        return Err(Error::Contract("profile is not a Nash equilibrium".into()));
    }
    let strict = match as_pure(profile) {
        Some(a) => is_strict_nash_pure(game, &a),
        None => false,
    };
    let completely_mixed = profile.iter().all(|s| s.weights().iter().all(|w| w.is_positive()));
    let max_a = game.action_counts().into_iter().max().unwrap();
    let pure = enumerate_pure_nash(game);
    let mut unique = Tri::Unknown;
    if pure.iter().any(|a| pure_profile(game, a) != profile) {
        unique = Tri::No;
    } else {
        let mut lim = support_limit.max(1).min(max_a);
        let res = loop {
            match solve_mixed_nash(game, lim) {
                Ok(r) => break Some(r),
                Err(_) if lim > 1 => lim = if game.n() == 3 { lim.min(2) } else { 1 },
                Err(_) => break None,
            }
            if lim == 1 {
                break solve_mixed_nash(game, 1).ok();
            }
        };
        if let Some(r) = res {
            if r.equilibria.iter().any(|e| e.as_slice() != profile) {
                unique = Tri::No;
            } else if r.complete && lim >= max_a && r.equilibria.len() == 1 {
                unique = Tri::Yes;
            }
        }
    }
    Ok(NashClass {
        strict,
        completely_mixed,
        unique,
    })
}

fn deviation_profiles(game: &Game, x: &[usize], coalition: &[usize]) -> Vec<Vec<usize>> {
    let dims: Vec<usize> = coalition.iter().map(|&j| game.num_actions(j)).collect();
    cartesian(&dims)
        .into_iter()
        .filter_map(|choice| {
            let mut d = x.to_vec();
            for (k, &j) in coalition.iter().enumerate() {
                d[j] = choice[k];
            }
            (d != x).then_some(d)
        })
        .collect()
}

pub fn is_aggregate_strong_nash_pure(game: &Game, x: &[usize]) -> bool {
    nonempty_subsets(game.n()).iter().all(|coal| {
        let base: Q = coal.iter().map(|&j| game.payoff(x, j)).sum();
        deviation_profiles(game, x, coal)
            .iter()
            .all(|d| coal.iter().map(|&j| game.payoff(d, j)).sum::<Q>() < base)
    })
}

pub fn is_aggregate_strong_nash(game: &Game, profile: &[MixedStrategy]) -> Result<bool> {
    let x = require_pure(game, profile)?;
    Ok(is_aggregate_strong_nash_pure(game, &x))
}

/// Cap on mixed-deviation evaluations in the grid phase.
pub const STRICTLY_STRONG_GRID_CAP: usize = 20_000;

pub fn is_strictly_strong_nash(game: &Game, profile: &[MixedStrategy], grid_resolution: usize) -> Result<Tri> {
    if grid_resolution == 0 {
        return structural("grid_resolution must be at least 1");
    }
    let x = require_pure(game, profile)?;
    if is_aggregate_strong_nash_pure(game, &x) {
        return Ok(Tri::Yes);
    }
    let coalitions = nonempty_subsets(game.n());
    // Pure deviations leaving every member at least as well off.
    for coal in &coalitions {
        for d in deviation_profiles(game, &x, coal) {
            if coal.iter().all(|&j| game.payoff(&d, j) >= game.payoff(&x, j)) {
                return Ok(Tri::No);
            }
        }
    }
    // A fixed member hurt by every pure deviation of the coalition is hurt by
    // every mixed one too.
    let fixed_victim = coalitions.iter().all(|coal| {
        coal.iter().any(|&k| {
            deviation_profiles(game, &x, coal)
                .iter()
                .all(|d| game.payoff(d, k) < game.payoff(&x, k))
        })
    });
    if fixed_victim {
        return Ok(Tri::Yes);
    }
    let base = pure_profile(game, &x);
    let here = expected_payoff(game, &base)?;
    let mut budget = STRICTLY_STRONG_GRID_CAP;
    for coal in coalitions.iter().filter(|c| c.len() >= 2) {
        let grids: Vec<Vec<MixedStrategy>> = coal
            .iter()
            .map(|&j| grid_strategies(game.num_actions(j), grid_resolution))
            .collect();
        let dims: Vec<usize> = grids.iter().map(Vec::len).collect();
        for choice in cartesian(&dims) {
            if budget == 0 {
                return Ok(Tri::Unknown);
            }
            let mut prof = base.clone();
            for (k, &j) in coal.iter().enumerate() {
                prof[j] = grids[k][choice[k]].clone();
            }
            if prof == base {
                continue;
            }
            budget -= 1;
            let v = expected_payoff(game, &prof)?;
            if coal.iter().all(|&j| v[j] >= here[j]) {
                return Ok(Tri::No);
            }
        }
    }
    Ok(Tri::Unknown)
}
