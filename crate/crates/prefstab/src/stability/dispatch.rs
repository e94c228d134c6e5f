//! Route selection for stability verdicts.

use super::routes::{
    aggregate_strong_route, dominant_efficient_route, dominant_unobserved_route, materialist_route, pairwise_route,
};
use super::search::{
    deviation_p0, deviation_partial, handshake_p1, handshake_partial, mismatch_p1, search_p0, search_p1,
    search_partial, Outcome,
};
use super::{verify_certificate, Instability, InvaderCertificate, StabilityOptions, StabilityVerdict, UnknownReason};
use crate::config::{average_fitness, is_balanced, validate_configuration, Configuration, Regime};
use crate::error::{structural, Error, Result};
use crate::game::nonempty_subsets;
use rayon::prelude::*;

fn require_valid(config: &Configuration) -> Result<()> {
    let report = validate_configuration(config);
    match report.violation {
        None => Ok(()),
        Some(v) => Err(Error::Contract(format!(
            "strategies are not an equilibrium: population {} gains by deviating to {}",
            v.player + 1,
            config.game.label(v.player, v.deviation)
        ))),
    }
}

fn unbalanced(config: &Configuration) -> Option<StabilityVerdict> {
    if is_balanced(config) {
        return None;
    }
    for (i, pop) in config.mu.populations.iter().enumerate() {
        let fitness: Vec<_> = (0..pop.types.len())
            .map(|t| average_fitness(config, i, t).expect("type exists"))
            .collect();
        if fitness.windows(2).any(|w| w[0] != w[1]) {
            return Some(StabilityVerdict::Unstable(Instability::Unbalanced { population: i, fitness }));
        }
    }
    None
}

fn verified(config: &Configuration, cert: Option<InvaderCertificate>) -> Option<InvaderCertificate> {
    cert.filter(|c| verify_certificate(config, c).is_ok())
}

fn explicit_constructions(config: &Configuration, coalition: Option<&[usize]>, opts: &StabilityOptions) -> Option<InvaderCertificate> {
    let n = config.n();
    let all = coalition.map_or(true, |c| c.len() == n);
    let single = |k: &InvaderCertificate| coalition.map_or(true, |c| c == k.coalition.as_slice());
    let mut tries: Vec<Box<dyn Fn() -> Option<InvaderCertificate> + '_>> = Vec::new();
    match &config.regime {
        Regime::P1 { .. } => {
            if all {
                tries.push(Box::new(|| handshake_p1(config, opts)));
            }
            tries.push(Box::new(|| mismatch_p1(config, opts)));
        }
        Regime::P0 { .. } => tries.push(Box::new(|| deviation_p0(config))),
        Regime::Partial { .. } => {
            if all {
                tries.push(Box::new(|| handshake_partial(config, opts)));
            }
            tries.push(Box::new(|| deviation_partial(config, opts)));
        }
    }
    tries
        .into_iter()
        .find_map(|f| verified(config, f().filter(|c| single(c))))
}

fn search(config: &Configuration, coalition: &[usize], opts: &StabilityOptions) -> Outcome {
    let out = match &config.regime {
        Regime::P1 { .. } => search_p1(config, coalition, opts),
        Regime::P0 { .. } => search_p0(config, coalition, opts),
        Regime::Partial { .. } => search_partial(config, coalition, opts),
    };
    match out {
        Outcome::Found(c) if verify_certificate(config, &c).is_err() => Outcome::Exhausted,
        other => other,
    }
}

/// Searches for a certificate that mutants in `coalition` invade.
pub fn find_invader(config: &Configuration, coalition: &[usize], opts: &StabilityOptions) -> Result<Option<InvaderCertificate>> {
    require_valid(config)?;
    if coalition.is_empty() || coalition.windows(2).any(|w| w[0] >= w[1]) || coalition.iter().any(|&j| j >= config.n()) {
        return structural("the coalition must be a sorted nonempty set of populations");
    }
    if let Some(c) = explicit_constructions(config, Some(coalition), opts) {
        return Ok(Some(c));
    }
    match search(config, coalition, opts) {
        Outcome::Found(c) => Ok(Some(*c)),
        Outcome::Exhausted => Ok(None),
        Outcome::CapHit => Err(Error::SolverLimit(format!(
            "search for coalition {:?} exceeded {} nodes",
            coalition.iter().map(|j| j + 1).collect::<Vec<_>>(),
            opts.node_cap
        ))),
    }
}

pub fn check_stability(config: &Configuration, opts: &StabilityOptions) -> Result<StabilityVerdict> {
    require_valid(config)?;
    if let Some(v) = unbalanced(config) {
        return Ok(v);
    }
    if opts.aggregate_fitness {
        return invader_search(config, opts);
    }
    let stable = match &config.regime {
        Regime::P1 { .. } => aggregate_strong_route(config)
            .or_else(|| pairwise_route(config, opts.grid_resolution))
            .or_else(|| dominant_efficient_route(config, opts.grid_resolution)),
        Regime::P0 { .. } => {
            if deviation_p0(config).is_none() {
                materialist_route(config, opts.support_limit)
                    .or_else(|| dominant_unobserved_route(config))
                    .or_else(|| aggregate_strong_route(config))
            } else {
                None
            }
        }
        Regime::Partial { .. } => {
            aggregate_strong_route(config).or_else(|| dominant_efficient_route(config, opts.grid_resolution))
        }
    };
    if let Some(r) = stable {
        return Ok(StabilityVerdict::Stable(r));
    }
    invader_search(config, opts)
}

fn invader_search(config: &Configuration, opts: &StabilityOptions) -> Result<StabilityVerdict> {
    if let Some(c) = explicit_constructions(config, None, opts) {
        return Ok(StabilityVerdict::Unstable(Instability::Certificate(Box::new(c))));
    }
    let coalitions = nonempty_subsets(config.n());
    let results: Vec<Outcome> = coalitions.par_iter().map(|c| search(config, c, opts)).collect();
    let mut capped = Vec::new();
    for (c, r) in coalitions.iter().zip(results) {
        match r {
            Outcome::Found(cert) => return Ok(StabilityVerdict::Unstable(Instability::Certificate(cert))),
            Outcome::CapHit => capped.push(c.iter().map(|j| j + 1).collect::<Vec<_>>()),
            Outcome::Exhausted => {}
        }
    }
    Ok(if capped.is_empty() {
        StabilityVerdict::Unknown {
            reason: UnknownReason::SearchExhausted,
            detail: match &config.regime {
                Regime::P0 { .. } => "no sufficiency route applies and no mutant with unchanged incumbents invades; nearby-equilibrium construction fails".into(),
                _ => "no sufficiency route applies and the bounded invader search found no certificate".into(),
            },
        }
    } else {
        StabilityVerdict::Unknown {
            reason: UnknownReason::SolverLimit,
            detail: format!("search node cap reached for coalitions {capped:?}"),
        }
    })
}
