//! Pareto dominance and efficiency with LP-backed certificates.

use crate::equilibrium::Tri;
use crate::error::Result;
use crate::game::{cartesian, expected_payoff, grid_strategies, pure_profile, Game, MixedProfile};
use crate::lp::{self, Cmp, Lp, LpResult};
use crate::rational::Q;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dominance {
    None,
    Weak,
    Strong,
}

pub fn dominance_of(u: &[Q], v: &[Q]) -> Dominance {
    if u.iter().zip(v).all(|(a, b)| a > b) {
        Dominance::Strong
    } else if u.iter().zip(v).all(|(a, b)| a >= b) && u.iter().zip(v).any(|(a, b)| a > b) {
        Dominance::Weak
    } else {
        Dominance::None
    }
}

/// How `sigma` relates to `sigma_prime`: does `sigma` dominate it?
pub fn dominance_relation(game: &Game, sigma: &[crate::game::MixedStrategy], sigma_prime: &[crate::game::MixedStrategy]) -> Result<Dominance> {
    let u = expected_payoff(game, sigma)?;
    let v = expected_payoff(game, sigma_prime)?;
    Ok(dominance_of(&u, &v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EfficiencyStatus {
    ParetoEfficient,
    /// A product-strategy dominator was found.
    Dominated {
        certificate: MixedProfile,
        relation: Dominance,
        weakly_efficient: Tri,
    },
    /// Only correlated dominators exist among those found, and no correlated
    /// strategy strictly improves everyone: weakly efficient, Pareto status open.
    WeaklyEfficientOnly,
    Unknown,
}

impl EfficiencyStatus {
    pub fn is_pareto_efficient(&self) -> bool {
        matches!(self, EfficiencyStatus::ParetoEfficient)
    }

    pub fn name(&self) -> &'static str {
        match self {
            EfficiencyStatus::ParetoEfficient => "pareto_efficient",
            EfficiencyStatus::Dominated { .. } => "dominated",
            EfficiencyStatus::WeaklyEfficientOnly => "weakly_efficient_only",
            EfficiencyStatus::Unknown => "unknown",
        }
    }
}

/// Cap on grid profiles examined when searching for a product dominator.
pub const GRID_CAP: usize = 50_000;

/// Max over correlated strategies of `sum_i t_i` with `pi_i(phi) >= v_i + t_i`.
pub fn correlated_slack_sum(game: &Game, v: &[Q]) -> (Q, Vec<Q>) {
    let k = game.num_profiles();
    let n = game.n();
    let mut lp = Lp::new(k + n);
    for i in 0..n {
        lp.objective[k + i] = Q::one();
        let mut row: Vec<Q> = game.tensor(i).to_vec();
        row.extend((0..n).map(|j| if j == i { -Q::one() } else { Q::zero() }));
        lp.add(row, Cmp::Ge, v[i].clone());
    }
    let mut row = vec![Q::one(); k];
    row.extend(vec![Q::zero(); n]);
    lp.add(row, Cmp::Eq, Q::one());
    match lp::solve(&lp) {
        LpResult::Optimal { value, x } => (value, x[..k].to_vec()),
        other => panic!("slack LP is always feasible and bounded: {other:?}"),
    }
}

/// Max over correlated strategies of `m` with `pi_i(phi) >= v_i + m` for all i.
pub fn correlated_common_slack(game: &Game, v: &[Q]) -> Q {
    let k = game.num_profiles();
    let n = game.n();
    let mut lp = Lp::new(k + 2);
    lp.objective[k] = Q::one();
    lp.objective[k + 1] = -Q::one();
    for i in 0..n {
        let mut row: Vec<Q> = game.tensor(i).to_vec();
        row.push(-Q::one());
        row.push(Q::one());
        lp.add(row, Cmp::Ge, v[i].clone());
    }
    let mut row = vec![Q::one(); k];
    row.extend([Q::zero(), Q::zero()]);
    lp.add(row, Cmp::Eq, Q::one());
    match lp::solve(&lp) {
        LpResult::Optimal { value, .. } => value,
        other => panic!("common-slack LP is always feasible and bounded: {other:?}"),
    }
}

pub fn efficiency_status(game: &Game, sigma: &[crate::game::MixedStrategy], grid_resolution: usize) -> Result<EfficiencyStatus> {
    let v = expected_payoff(game, sigma)?;
    efficiency_status_of_payoff(game, &v, grid_resolution)
}

/// Efficiency of a payoff vector attained in the game.
pub fn efficiency_status_of_payoff(game: &Game, v: &[Q], grid_resolution: usize) -> Result<EfficiencyStatus> {
    let (slack, _) = correlated_slack_sum(game, v);
    if slack.is_zero() {
        return Ok(EfficiencyStatus::ParetoEfficient);
    }
    let weak_lp = || {
        if correlated_common_slack(game, v).is_positive() {
            Tri::Unknown
        } else {
            Tri::Yes
        }
    };
    let mut first_weak: Option<MixedProfile> = None;
    for a in game.profiles() {
        match dominance_of(&game.payoff_vec(&a), v) {
            Dominance::Strong => {
                return Ok(EfficiencyStatus::Dominated {
                    certificate: pure_profile(game, &a),
                    relation: Dominance::Strong,
                    weakly_efficient: Tri::No,
                })
            }
            Dominance::Weak if first_weak.is_none() => first_weak = Some(pure_profile(game, &a)),
            _ => {}
        }
    }
    let grids: Vec<_> = (0..game.n())
        .map(|i| grid_strategies(game.num_actions(i), grid_resolution.max(1)))
        .collect();
    let dims: Vec<usize> = grids.iter().map(Vec::len).collect();
    for choice in cartesian(&dims).into_iter().take(GRID_CAP) {
        let prof: MixedProfile = choice.iter().enumerate().map(|(i, &k)| grids[i][k].clone()).collect();
        let u = expected_payoff(game, &prof)?;
        match dominance_of(&u, v) {
            Dominance::Strong => {
                return Ok(EfficiencyStatus::Dominated {
                    certificate: prof,
                    relation: Dominance::Strong,
                    weakly_efficient: Tri::No,
                })
            }
            Dominance::Weak if first_weak.is_none() => first_weak = Some(prof),
            _ => {}
        }
    }
    let weakly = weak_lp();
    if let Some(c) = first_weak {
        return Ok(EfficiencyStatus::Dominated {
            certificate: c,
            relation: Dominance::Weak,
            weakly_efficient: weakly,
        });
    }
    Ok(match weakly {
        Tri::Yes => EfficiencyStatus::WeaklyEfficientOnly,
        _ => EfficiencyStatus::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pd() -> Game {
        Game::from_ints(&[&["C1", "D1"], &["C2", "D2"]], &[&[2, 2], &[0, 3], &[3, 0], &[1, 1]]).unwrap()
    }

    fn coordination() -> Game {
        Game::from_ints(&[&["a11", "a12"], &["a21", "a22"]], &[&[5, 5], &[0, 0], &[0, 0], &[5, 10]]).unwrap()
    }

    #[test]
    fn pd_cases() {
        let g = pd();
        assert_eq!(efficiency_status(&g, &pure_profile(&g, &[0, 0]), 10).unwrap(), EfficiencyStatus::ParetoEfficient);
        match efficiency_status(&g, &pure_profile(&g, &[1, 1]), 10).unwrap() {
            EfficiencyStatus::Dominated { certificate, relation, weakly_efficient } => {
                assert_eq!(certificate, pure_profile(&g, &[0, 0]));
                assert_eq!(relation, Dominance::Strong);
                assert_eq!(weakly_efficient, Tri::No);
            }
            s => panic!("{s:?}"),
        }
    }

    #[test]
    fn coordination_weakly_efficient() {
        let g = coordination();
        match efficiency_status(&g, &pure_profile(&g, &[0, 0]), 10).unwrap() {
            EfficiencyStatus::Dominated { certificate, relation, weakly_efficient } => {
                assert_eq!(certificate, pure_profile(&g, &[1, 1]));
                assert_eq!(relation, Dominance::Weak);
                assert_eq!(weakly_efficient, Tri::Yes);
            }
            s => panic!("{s:?}"),
        }
        assert_eq!(
            dominance_relation(&g, &pure_profile(&g, &[1, 1]), &pure_profile(&g, &[0, 0])).unwrap(),
            Dominance::Weak
        );
        let p = pure_profile(&g, &[0, 0]);
        assert_eq!(dominance_relation(&g, &p, &p).unwrap(), Dominance::None);
    }
}
