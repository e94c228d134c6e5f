//! Post-entry equilibria close to the incumbents' strategies.

use super::{post_entry_configuration, InvaderCertificate, MutantAssignment};
use crate::config::{fitness_p0, validate_configuration, Configuration, MutantSubProfile, Regime};
use crate::error::{Error, Result};
use crate::game::{cartesian, MixedStrategy};
use crate::linalg::{self, LinSol};
use crate::rational::{fmt_q, Q};
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct NearbyEquilibrium {
    pub configuration: Configuration,
    pub assignment: MutantAssignment,
    /// Rebalanced strategy of each population's incumbent.
    pub incumbents: Vec<MixedStrategy>,
    /// Largest squared Euclidean distance of an incumbent from its old strategy.
    pub distance_sq: Q,
    pub within_eta: bool,
}

#[derive(Debug, Clone)]
pub enum NearbyOutcome {
    Found(NearbyEquilibrium),
    NotFound(String),
}

fn squared_distance(x: &MixedStrategy, y: &MixedStrategy) -> Q {
    x.weights().iter().zip(y.weights()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Two populations with unobserved types: the incumbents keep their supports
/// and rebalance so that their opponents stay indifferent across them.
pub fn nearby_equilibrium(
    config: &Configuration,
    mutants: &MutantSubProfile,
    mutant_strategies: &[MixedStrategy],
    eta: &Q,
) -> Result<NearbyOutcome> {
    let g = &config.game;
    let Regime::P0 { s } = &config.regime else {
        return Ok(NearbyOutcome::NotFound("only unobserved types are supported".into()));
    };
    if g.n() != 2 || config.mu.type_counts() != vec![1, 1] {
        return Ok(NearbyOutcome::NotFound("only two monomorphic populations are supported".into()));
    }
    if mutant_strategies.len() != mutants.coalition.len() {
        return Err(Error::Structural("one strategy per mutant".into()));
    }
    for (k, &j) in mutants.coalition.iter().enumerate() {
        if mutant_strategies[k].len() != g.num_actions(j) {
            return Err(Error::Structural("mutant strategy has the wrong length".into()));
        }
        let e = &mutants.shares[k];
        for a in s[j][0].support() {
            let w = s[j][0].weight(a);
            if w < &Q::one() {
                let room = w.clone().min(Q::one() - w);
                if e >= &room {
                    return Err(Error::Bound(format!(
                        "mutant share {} in population {} must stay below {}",
                        fmt_q(e),
                        j + 1,
                        fmt_q(&room)
                    )));
                }
            }
        }
    }
    let mut incumbents = Vec::new();
    for i in 0..2 {
        let o = 1 - i;
        let own = &s[i][0];
        let supp = own.support();
        let k = mutants.coalition.iter().position(|&j| j == i);
        let (e, q) = match k {
            Some(k) => (mutants.shares[k].clone(), Some(&mutant_strategies[k])),
            None => (Q::zero(), None),
        };
        let u = &config.mu.populations[o].types[0].utilities;
        let prof = |a: usize, b: usize| if o == 0 { vec![a, b] } else { vec![b, a] };
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for a in s[o][0].support() {
            let mut row: Vec<Q> = supp.iter().map(|&b| (Q::one() - &e) * &u[g.index(&prof(a, b))]).collect();
            row.push(-Q::one());
            rows.push(row);
            let fixed: Q = match q {
                Some(q) => (0..g.num_actions(i)).map(|b| &e * q.weight(b) * &u[g.index(&prof(a, b))]).sum(),
                None => Q::zero(),
            };
            rhs.push(-fixed);
        }
        let mut total: Vec<Q> = vec![Q::one(); supp.len()];
        total.push(Q::zero());
        rows.push(total);
        rhs.push(Q::one());
        let LinSol::Unique(sol) = linalg::solve(rows, rhs) else {
            return Ok(NearbyOutcome::NotFound(format!("indifference system for population {} is not uniquely solvable", i + 1)));
        };
        let mut w = vec![Q::zero(); g.num_actions(i)];
        for (k, &b) in supp.iter().enumerate() {
            if sol[k].is_negative() {
                return Ok(NearbyOutcome::NotFound(format!("rebalanced strategy of population {} leaves the simplex", i + 1)));
            }
            w[b] = sol[k].clone();
        }
        incumbents.push(MixedStrategy::new(w)?);
    }
    let mut assignment = MutantAssignment::default();
    for (k, &j) in mutants.coalition.iter().enumerate() {
        assignment.s.insert(j, mutant_strategies[k].clone());
    }
    for (i, x) in incumbents.iter().enumerate() {
        assignment.incumbent_s.insert((i, 0), x.clone());
    }
    let post = post_entry_configuration(config, mutants, &assignment)?;
    let report = validate_configuration(&post);
    if let Some(v) = report.violation {
        return Ok(NearbyOutcome::NotFound(format!(
            "rebalanced strategies are not an equilibrium: population {} gains {} by switching to {}",
            v.player + 1,
            fmt_q(&v.gain),
            g.label(v.player, v.deviation)
        )));
    }
    let distance_sq = (0..2).map(|i| squared_distance(&incumbents[i], &s[i][0])).max().unwrap_or_else(Q::zero);
    let within_eta = distance_sq <= eta * eta;
    Ok(NearbyOutcome::Found(NearbyEquilibrium {
        configuration: post,
        assignment,
        incumbents,
        distance_sq,
        within_eta,
    }))
}

/// Checks a continuity certificate: the radius respects the Lipschitz bound
/// and perturbed incumbents within it still leave the mutant ahead.
pub(crate) fn verify_continuity(config: &Configuration, cert: &InvaderCertificate, eta: &Q, gap: &Q) -> Result<()> {
    let g = &config.game;
    let Regime::P0 { s } = &config.regime else {
        return Err(Error::Contract("continuity certificates need unobserved types".into()));
    };
    let [k] = cert.coalition[..] else {
        return Err(Error::Contract("continuity certificates have a single mutant".into()));
    };
    if eta > &super::search::continuity_radius(g, k, gap) || !eta.is_positive() {
        return Err(Error::Contract("radius exceeds the Lipschitz bound".into()));
    }
    let mutant = cert.assignment.s.get(&k).ok_or_else(|| Error::Contract("missing mutant strategy".into()))?;
    let half = Q::new(1.into(), 2.into());
    let step = eta * &half;
    for toward in cartesian(&g.action_counts()) {
        let perturbed: Vec<Vec<MixedStrategy>> = s
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let e = MixedStrategy::pure(toward[i], g.num_actions(i));
                v.iter().map(|x| x.mix(&e, &step)).collect()
            })
            .collect();
        let mut full = perturbed.clone();
        full[k].push(mutant.clone());
        let mut shares = config.mu.shares();
        for x in shares[k].iter_mut() {
            *x *= &half;
        }
        shares[k].push(half.clone());
        let fm = fitness_p0(g, &shares, &full, k, full[k].len() - 1);
        for t in 0..perturbed[k].len() {
            let d = &fm - fitness_p0(g, &shares, &full, k, t);
            if d < gap * &half {
                return Err(Error::Contract("perturbed incumbents close the gap".into()));
            }
        }
    }
    Ok(())
}
