//! Stability verdicts: sufficiency routes, invader certificates with exact
//! share polynomials, nearby equilibria and observability thresholds.

mod dispatch;
mod nearby;
mod routes;
mod search;

pub use dispatch::{check_stability, find_invader};
pub use nearby::{nearby_equilibrium, NearbyEquilibrium, NearbyOutcome};
pub use routes::{aggregate_strong_barrier, handshake_advantage, low_threshold, observability_thresholds, uniform_invasion_barrier, Thresholds};

use crate::config::{
    fitness_p0, fitness_p1, fitness_partial, margins_p0, margins_p1, margins_partial, Configuration,
    MutantSubProfile, Population, PreferenceDistribution, PreferenceType, Regime,
};
use crate::error::{structural, Error, Result};
use crate::game::{MixedProfile, MixedStrategy};
use crate::poly::{Poly, UPoly, Var};
use crate::rational::Q;
use crate::ring::Ring;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityOptions {
    pub grid_resolution: usize,
    pub support_limit: usize,
    /// Search-tree nodes explored per coalition before giving up.
    pub node_cap: usize,
    /// Compare summed fitness across the coalition instead of per population.
    pub aggregate_fitness: bool,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            grid_resolution: 10,
            support_limit: 3,
            node_cap: 200_000,
            aggregate_fitness: false,
        }
    }
}

/// Strategies for every post-entry match or type involving a mutant.
/// Mutant type index in population `j` is the incumbent count of `j`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MutantAssignment {
    pub b: BTreeMap<Vec<usize>, MixedProfile>,
    /// Unobserved strategy of each coalition member's mutant, by population.
    pub s: BTreeMap<usize, MixedStrategy>,
    /// Replacement unobserved strategies for incumbents `(population, type)`.
    pub incumbent_s: BTreeMap<(usize, usize), MixedStrategy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffPolynomial {
    pub population: usize,
    pub incumbent: usize,
    /// Mutant fitness minus incumbent fitness.
    pub poly: Poly,
}

/// Shares run along `eps_j = t` for every coalition member, `0 < t < t_upper`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub t_upper: Q,
    /// False when `t_upper` is a rational lower bound on an irrational root.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertificateKind {
    /// The assignment is itself a post-entry equilibrium on the region.
    Focal,
    /// Every post-entry equilibrium within `eta` of the incumbents' strategies
    /// leaves the mutant ahead by at least `gap / 2`, whatever the shares.
    Continuity { eta: Q, gap: Q },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvaderCertificate {
    pub route: &'static str,
    pub coalition: Vec<usize>,
    pub mutant_types: Vec<PreferenceType>,
    pub assignment: MutantAssignment,
    pub diffs: Vec<DiffPolynomial>,
    /// Incumbent type each coalition member's mutant is compared against.
    pub witnesses: Vec<(usize, usize)>,
    /// Equilibrium margins that depend on the shares and must stay nonnegative.
    pub constraints: Vec<Poly>,
    pub region: Region,
    pub kind: CertificateKind,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StableRoute {
    pub name: &'static str,
    pub premises: Vec<String>,
    pub barrier: Option<Q>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    SearchExhausted,
    SolverLimit,
}

impl UnknownReason {
    pub fn name(&self) -> &'static str {
        match self {
            UnknownReason::SearchExhausted => "search-exhausted",
            UnknownReason::SolverLimit => "solver-limit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instability {
    Certificate(Box<InvaderCertificate>),
    Unbalanced { population: usize, fitness: Vec<Q> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StabilityVerdict {
    Stable(StableRoute),
    Unstable(Instability),
    Unknown { reason: UnknownReason, detail: String },
}

impl StabilityVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityVerdict::Stable(_) => "stable",
            StabilityVerdict::Unstable(_) => "unstable",
            StabilityVerdict::Unknown { .. } => "unknown",
        }
    }

    pub fn certificate(&self) -> Option<&InvaderCertificate> {
        match self {
            StabilityVerdict::Unstable(Instability::Certificate(c)) => Some(c),
            _ => None,
        }
    }
}

/// Post-entry types: each coalition member's mutant appended to its population.
pub fn post_entry_types(config: &Configuration, coalition: &[usize], mutant_types: &[PreferenceType]) -> Vec<Vec<PreferenceType>> {
    let mut types = config.types();
    for (k, &j) in coalition.iter().enumerate() {
        types[j].push(mutant_types[k].clone());
    }
    types
}

/// Post-entry shares with `eps_j` symbolic.
pub fn symbolic_shares(config: &Configuration, coalition: &[usize]) -> Vec<Vec<Poly>> {
    config
        .mu
        .populations
        .iter()
        .enumerate()
        .map(|(i, pop)| {
            let mut v: Vec<Poly> = pop.shares.iter().map(Poly::from_q).collect();
            if coalition.contains(&i) {
                let e = Poly::eps(i);
                let keep = e.one_minus();
                v = v.iter().map(|s| s.times(&keep)).collect();
                v.push(e);
            }
            v
        })
        .collect()
}

/// An indifferent type for `role` that differs from every incumbent.
pub fn fresh_indifferent(config: &Configuration, role: usize) -> PreferenceType {
    let mut level = 0i64;
    loop {
        let t = PreferenceType::indifferent_at(&config.game, role, Q::from_integer(level.into()));
        if !config.mu.populations[role].types.iter().any(|u| u.utilities == t.utilities) {
            return t;
        }
        level += 1;
    }
}

pub(crate) fn post_entry_counts(config: &Configuration, coalition: &[usize]) -> Vec<usize> {
    config
        .mu
        .type_counts()
        .iter()
        .enumerate()
        .map(|(i, &k)| if coalition.contains(&i) { k + 1 } else { k })
        .collect()
}

/// Full post-entry strategy functions.
pub(crate) fn full_behavior(
    config: &Configuration,
    coalition: &[usize],
    assignment: &MutantAssignment,
) -> Result<(BTreeMap<Vec<usize>, MixedProfile>, Vec<Vec<MixedStrategy>>)> {
    let counts = post_entry_counts(config, coalition);
    let inc = config.mu.type_counts();
    let mut b = BTreeMap::new();
    if let Some(b0) = config.regime.b() {
        for th in crate::game::cartesian(&counts) {
            let has_mutant = th.iter().enumerate().any(|(i, &t)| t >= inc[i]);
            let prof = if has_mutant {
                assignment
                    .b
                    .get(&th)
                    .cloned()
                    .ok_or_else(|| Error::Structural(format!("assignment misses match {th:?}")))?
            } else {
                b0[&th].clone()
            };
            config.game.check_profile(&prof)?;
            b.insert(th, prof);
        }
    }
    let mut s = Vec::new();
    if let Some(s0) = config.regime.s() {
        for (i, si) in s0.iter().enumerate() {
            let mut v: Vec<MixedStrategy> = si
                .iter()
                .enumerate()
                .map(|(t, x)| assignment.incumbent_s.get(&(i, t)).cloned().unwrap_or_else(|| x.clone()))
                .collect();
            if coalition.contains(&i) {
                v.push(
                    assignment
                        .s
                        .get(&i)
                        .cloned()
                        .ok_or_else(|| Error::Structural(format!("assignment misses the mutant strategy of population {}", i + 1)))?,
                );
            }
            s.push(v);
        }
    }
    Ok((b, s))
}

/// All equilibrium margins of the post-entry configuration, symbolic in the shares.
pub(crate) fn symbolic_margins(config: &Configuration, coalition: &[usize], types: &[Vec<PreferenceType>], assignment: &MutantAssignment) -> Result<Vec<Poly>> {
    let (b, s) = full_behavior(config, coalition, assignment)?;
    let shares = symbolic_shares(config, coalition);
    let g = &config.game;
    Ok(match &config.regime {
        Regime::P1 { .. } => margins_p1(g, types, &b).into_iter().map(|m| Poly::constant(m.value)).collect(),
        Regime::P0 { .. } => margins_p0(g, types, &shares, &s).into_iter().map(|m| m.value).collect(),
        Regime::Partial { p, .. } => margins_partial(g, types, &shares, &b, &s, &Poly::constant(p.clone()))
            .into_iter()
            .map(|m| m.value)
            .collect(),
    })
}

pub(crate) fn symbolic_fitness(config: &Configuration, coalition: &[usize], assignment: &MutantAssignment, i: usize, t: usize) -> Result<Poly> {
    let (b, s) = full_behavior(config, coalition, assignment)?;
    let shares = symbolic_shares(config, coalition);
    let g = &config.game;
    Ok(match &config.regime {
        Regime::P1 { .. } => fitness_p1(g, &shares, &b, i, t),
        Regime::P0 { .. } => fitness_p0(g, &shares, &s, i, t),
        Regime::Partial { p, .. } => fitness_partial(g, &shares, &b, &s, &Poly::constant(p.clone()), i, t),
    })
}

/// True when the polynomial is nonnegative on some interval `(0, t)`.
pub fn nonneg_near_zero(u: &UPoly) -> bool {
    match u.lowest() {
        None => true,
        Some((_, c)) => c.is_positive(),
    }
}

pub fn diagonal(p: &Poly) -> UPoly {
    p.diagonal().expect("share polynomial without p")
}

/// Largest `t_upper <= 1` such that none of `polys` has a root in `(0, t_upper)`.
pub fn region_for(polys: &[UPoly]) -> Region {
    let mut t = Q::one();
    let mut exact = true;
    for u in polys {
        if u.is_zero() {
            continue;
        }
        if let Some(r) = u.roots_in(&Q::zero(), &Q::one()).first() {
            if r.lower() < &t {
                t = r.lower().clone();
                exact = r.is_exact();
            }
        }
    }
    Region { t_upper: t, exact }
}

pub fn fitness_diff_polynomials(config: &Configuration, mutants: &MutantSubProfile, assignment: &MutantAssignment) -> Result<Vec<DiffPolynomial>> {
    let coalition = &mutants.coalition;
    let types = post_entry_types(config, coalition, &mutants.types);
    for (k, &j) in coalition.iter().enumerate() {
        if config.mu.populations[j].types.iter().any(|u| u.utilities == mutants.types[k].utilities) {
            return structural("mutant type coincides with an incumbent");
        }
    }
    let margins = symbolic_margins(config, coalition, &types, assignment)?;
    for m in &margins {
        if !nonneg_near_zero(&diagonal(m)) {
            return structural(format!("assignment is not an equilibrium near zero shares: margin {m}"));
        }
    }
    let inc = config.mu.type_counts();
    let mut out = Vec::new();
    for &j in coalition {
        let fm = symbolic_fitness(config, coalition, assignment, j, inc[j])?;
        for t in 0..inc[j] {
            let fi = symbolic_fitness(config, coalition, assignment, j, t)?;
            out.push(DiffPolynomial {
                population: j,
                incumbent: t,
                poly: fm.minus(&fi),
            });
        }
    }
    Ok(out)
}

/// Picks one witness per coalition member and the validity region, if the
/// polynomials certify an advantage for small equal shares.
pub(crate) fn assess(
    coalition: &[usize],
    diffs: &[DiffPolynomial],
    margins: &[Poly],
    aggregate: bool,
) -> Option<(Vec<(usize, usize)>, Region, Vec<Poly>)> {
    let constraints: Vec<Poly> = margins.iter().filter(|m| m.as_constant().is_none()).cloned().collect();
    for m in margins {
        if !nonneg_near_zero(&diagonal(m)) {
            return None;
        }
    }
    let mut witnesses = Vec::new();
    let mut polys: Vec<UPoly> = Vec::new();
    if aggregate {
        let mut total = Poly::default();
        for &j in coalition {
            let d = diffs.iter().find(|d| d.population == j)?;
            witnesses.push((j, d.incumbent));
            total = total.plus(&d.poly);
        }
        let u = diagonal(&total);
        if u.is_zero() || !nonneg_near_zero(&u) {
            return None;
        }
        polys.push(u);
    } else {
        let mut strict = false;
        for &j in coalition {
            let cands: Vec<(&DiffPolynomial, UPoly)> = diffs
                .iter()
                .filter(|d| d.population == j)
                .map(|d| (d, diagonal(&d.poly)))
                .filter(|(_, u)| nonneg_near_zero(u))
                .collect();
            let pick = cands.iter().find(|(_, u)| !u.is_zero()).or(cands.first())?;
            strict |= !pick.1.is_zero();
            witnesses.push((j, pick.0.incumbent));
            polys.push(pick.1.clone());
        }
        if !strict {
            return None;
        }
    }
    polys.extend(constraints.iter().map(diagonal));
    let region = region_for(&polys);
    if !region.t_upper.is_positive() {
        return None;
    }
    Some((witnesses, region, constraints))
}

/// Explicit post-entry configuration at numeric shares (structure only).
pub fn post_entry_configuration(config: &Configuration, mutants: &MutantSubProfile, assignment: &MutantAssignment) -> Result<Configuration> {
    let mu = crate::config::post_entry(&config.mu, mutants)?;
    let (b, s) = full_behavior(config, &mutants.coalition, assignment)?;
    let regime = match &config.regime {
        Regime::P1 { .. } => Regime::P1 { b },
        Regime::P0 { .. } => Regime::P0 { s },
        Regime::Partial { p, .. } => Regime::Partial { p: p.clone(), b, s },
    };
    Configuration::unchecked(config.game.clone(), mu, regime)
}

pub(crate) fn build_certificate(
    config: &Configuration,
    route: &'static str,
    coalition: Vec<usize>,
    mutant_types: Vec<PreferenceType>,
    assignment: MutantAssignment,
    aggregate: bool,
    notes: Vec<String>,
) -> Option<InvaderCertificate> {
    let types = post_entry_types(config, &coalition, &mutant_types);
    let margins = symbolic_margins(config, &coalition, &types, &assignment).ok()?;
    let probe = MutantSubProfile {
        coalition: coalition.clone(),
        types: mutant_types.clone(),
        shares: vec![Q::new(1.into(), 2.into()); coalition.len()],
    };
    let diffs = fitness_diff_polynomials(config, &probe, &assignment).ok()?;
    let (witnesses, region, constraints) = assess(&coalition, &diffs, &margins, aggregate)?;
    Some(InvaderCertificate {
        route,
        coalition,
        mutant_types,
        assignment,
        diffs,
        witnesses,
        constraints,
        region,
        kind: CertificateKind::Focal,
        notes,
    })
}

/// Three rational sample points strictly inside the region.
pub fn sample_points(region: &Region) -> Vec<Q> {
    [2, 3, 7]
        .iter()
        .map(|d| &region.t_upper / Q::from_integer((*d).into()))
        .collect()
}

/// Re-derives the certificate's claims on explicit post-entry configurations.
pub fn verify_certificate(config: &Configuration, cert: &InvaderCertificate) -> Result<()> {
    if let CertificateKind::Continuity { eta, gap } = &cert.kind {
        return nearby::verify_continuity(config, cert, eta, gap);
    }
    let inc = config.mu.type_counts();
    for t in sample_points(&cert.region) {
        let mutants = MutantSubProfile::new(cert.coalition.clone(), cert.mutant_types.clone(), vec![t.clone(); cert.coalition.len()])?;
        let post = post_entry_configuration(config, &mutants, &cert.assignment)?;
        let report = crate::config::validate_configuration(&post);
        if !report.ok {
            return Err(Error::Contract(format!("post-entry assignment fails equilibrium check at t = {}", crate::rational::fmt_q(&t))));
        }
        let at: BTreeMap<Var, Q> = cert.coalition.iter().map(|&j| (Var::Eps(j), t.clone())).collect();
        let mut strict = false;
        let mut total = Q::zero();
        for d in &cert.diffs {
            let direct = crate::config::average_fitness(&post, d.population, inc[d.population])?
                - crate::config::average_fitness(&post, d.population, d.incumbent)?;
            let v = d.poly.eval(&at).ok_or_else(|| Error::Contract("unbound share variable".into()))?;
            if v != direct {
                return Err(Error::Contract("polynomial and direct fitness disagree".into()));
            }
            if cert.witnesses.contains(&(d.population, d.incumbent)) {
                if v.is_negative() && cert.route != "aggregate-fitness" {
                    return Err(Error::Contract("witness difference is negative inside the region".into()));
                }
                strict |= v.is_positive();
                total += &v;
            }
        }
        if !strict || total.is_negative() {
            return Err(Error::Contract("no strict advantage inside the region".into()));
        }
    }
    Ok(())
}

/// Shares of the post-entry distribution at `eps_j = t`.
pub fn post_entry_at(mu: &PreferenceDistribution, coalition: &[usize], types: &[PreferenceType], t: &Q) -> Result<PreferenceDistribution> {
    let mut pops: Vec<Population> = mu.populations.clone();
    for (k, &j) in coalition.iter().enumerate() {
        let keep = Q::one() - t;
        for s in pops[j].shares.iter_mut() {
            *s *= &keep;
        }
        pops[j].types.push(types[k].clone());
        pops[j].shares.push(t.clone());
    }
    Ok(PreferenceDistribution { populations: pops })
}
