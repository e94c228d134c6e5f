//! Invader constructions and bounded searches for invasion certificates.

use super::routes::{best_deviation, handshake_advantage, pure_outcome};
use super::{
    build_certificate, fresh_indifferent, post_entry_counts, post_entry_types, CertificateKind, DiffPolynomial,
    InvaderCertificate, MutantAssignment, Region, StabilityOptions,
};
use crate::config::{aggregate_outcome, Configuration, PreferenceType, Regime};
use crate::efficiency::{efficiency_status, Dominance, EfficiencyStatus};
use crate::equilibrium::action_values;
use crate::game::{cartesian, expected_payoff, grid_strategies, profile_ring, pure_profile, Game, MixedProfile, MixedStrategy};
use crate::poly::Poly;
use crate::rational::{fmt_q, Q};
use num_traits::{One, Signed, Zero};

pub(crate) enum Outcome {
    Found(Box<InvaderCertificate>),
    Exhausted,
    CapHit,
}

/// Mixed mutant profiles tried in the all-mutant match, beyond pure ones.
const MIXED_COMBO_CAP: usize = 4096;

fn mutant_types(config: &Configuration, coalition: &[usize]) -> Vec<PreferenceType> {
    coalition.iter().map(|&j| fresh_indifferent(config, j)).collect()
}

/// Pure best-reply profiles of the incumbents `rest` (with utilities `utils`)
/// when the players outside `rest` follow `fixed`.
fn incumbent_replies(game: &Game, fixed: &[Option<MixedStrategy>], utils: &[&[Q]]) -> Vec<MixedProfile> {
    let n = game.n();
    let rest: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    let dims: Vec<usize> = rest.iter().map(|&i| game.num_actions(i)).collect();
    let mut out = Vec::new();
    for choice in cartesian(&dims) {
        let prof: MixedProfile = (0..n)
            .map(|i| match &fixed[i] {
                Some(x) => x.clone(),
                None => {
                    let k = rest.iter().position(|&r| r == i).unwrap();
                    MixedStrategy::pure(choice[k], game.num_actions(i))
                }
            })
            .collect();
        let st: Vec<Vec<Q>> = profile_ring(&prof);
        let ok = rest.iter().enumerate().all(|(k, &i)| {
            let vals = action_values(game, utils[i], &st, i);
            vals.iter().all(|v| v <= &vals[choice[k]])
        });
        if ok {
            out.push(prof);
        }
    }
    out
}

fn dense_mul(x: &[Q], y: &[Q]) -> Vec<Q> {
    let mut c = vec![Q::zero(); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            c[i + j] += a * b;
        }
    }
    c
}

/// First coefficients up to `upto` certify nonnegativity so far.
fn prefix_ok(c: &[Q], upto: usize) -> bool {
    for x in c.iter().take(upto) {
        if x.is_positive() {
            return true;
        }
        if x.is_negative() {
            return false;
        }
    }
    true
}

struct P1Search<'a> {
    config: &'a Configuration,
    coalition: Vec<usize>,
    mutants: Vec<PreferenceType>,
    matches: Vec<Vec<usize>>,
    levels: Vec<usize>,
    options: Vec<Vec<MixedProfile>>,
    /// deltas[match][option][(member, incumbent type)] coefficients in t.
    deltas: Vec<Vec<Vec<Vec<Q>>>>,
    keys: Vec<(usize, usize)>,
    aggregate: bool,
    budget: usize,
    hit_cap: bool,
}

impl P1Search<'_> {
    fn check(&self, d: &[Vec<Q>], upto: usize) -> bool {
        if self.aggregate {
            let len = d[0].len();
            let mut sum = vec![Q::zero(); len];
            for (k, (_, t)) in self.keys.iter().enumerate() {
                if *t == 0 {
                    for (s, x) in sum.iter_mut().zip(&d[k]) {
                        *s += x;
                    }
                }
            }
            return prefix_ok(&sum, upto);
        }
        (0..self.coalition.len()).all(|q| {
            self.keys
                .iter()
                .enumerate()
                .filter(|(_, (m, _))| *m == q)
                .any(|(k, _)| prefix_ok(&d[k], upto))
        })
    }

    fn rec(&mut self, idx: usize, d: &mut Vec<Vec<Q>>, chosen: &mut Vec<usize>) -> Option<InvaderCertificate> {
        if self.budget == 0 {
            self.hit_cap = true;
            return None;
        }
        self.budget -= 1;
        let prev_level = if idx == 0 { 0 } else { self.levels[idx - 1] };
        let next_level = self.levels.get(idx).copied();
        if idx > 0 && next_level != Some(prev_level) {
            let upto = if next_level.is_none() { usize::MAX } else { prev_level };
            if !self.check(d, upto) {
                return None;
            }
        }
        if idx == self.matches.len() {
            let mut assignment = MutantAssignment::default();
            for (k, th) in self.matches.iter().enumerate() {
                assignment.b.insert(th.clone(), self.options[k][chosen[k]].clone());
            }
            return build_certificate(
                self.config,
                "search",
                self.coalition.clone(),
                self.mutants.clone(),
                assignment,
                self.aggregate,
                vec![],
            );
        }
        for o in 0..self.options[idx].len() {
            for (k, delta) in self.deltas[idx][o].iter().enumerate() {
                for (x, y) in d[k].iter_mut().zip(delta) {
                    *x += y;
                }
            }
            chosen.push(o);
            let found = self.rec(idx + 1, d, chosen);
            chosen.pop();
            for (k, delta) in self.deltas[idx][o].iter().enumerate() {
                for (x, y) in d[k].iter_mut().zip(delta) {
                    *x -= y;
                }
            }
            if found.is_some() {
                return found;
            }
            if self.hit_cap {
                return None;
            }
        }
        None
    }
}

/// Depth-first search over pure behaviour in every match involving mutants,
/// level by level in the number of mutants, under full observability.
pub(crate) fn search_p1(config: &Configuration, coalition: &[usize], opts: &StabilityOptions) -> Outcome {
    let Regime::P1 { b } = &config.regime else { return Outcome::Exhausted };
    let g = &config.game;
    let n = g.n();
    let inc = config.mu.type_counts();
    let counts = post_entry_counts(config, coalition);
    let mutants = mutant_types(config, coalition);
    let types = post_entry_types(config, coalition, &mutants);
    let shares = config.mu.shares();
    let share_poly = |i: usize, t: usize| -> Vec<Q> {
        if t >= inc[i] {
            vec![Q::zero(), Q::one()]
        } else if coalition.contains(&i) {
            vec![shares[i][t].clone(), -shares[i][t].clone()]
        } else {
            vec![shares[i][t].clone()]
        }
    };
    let weight = |th: &[usize], i: usize| -> Vec<Q> {
        let mut w = vec![Q::one()];
        for (k, &t) in th.iter().enumerate() {
            if k != i {
                w = dense_mul(&w, &share_poly(k, t));
            }
        }
        w.resize(n, Q::zero());
        w
    };
    let keys: Vec<(usize, usize)> = coalition
        .iter()
        .enumerate()
        .flat_map(|(q, &j)| (0..inc[j]).map(move |t| (q, t)))
        .collect();
    let contribution = |th: &[usize], prof: &MixedProfile| -> Vec<Vec<Q>> {
        let v = expected_payoff(g, prof).expect("valid profile");
        keys.iter()
            .map(|&(q, t)| {
                let j = coalition[q];
                let w = weight(th, j);
                if th[j] >= inc[j] {
                    w.iter().map(|x| x * &v[j]).collect()
                } else if th[j] == t {
                    w.iter().map(|x| -(x * &v[j])).collect()
                } else {
                    vec![Q::zero(); n]
                }
            })
            .collect()
    };
    let mut d: Vec<Vec<Q>> = vec![vec![Q::zero(); n]; keys.len()];
    for (th, prof) in b {
        for (k, c) in contribution(th, prof).into_iter().enumerate() {
            for (x, y) in d[k].iter_mut().zip(c) {
                *x += y;
            }
        }
    }
    let mut matches: Vec<Vec<usize>> = cartesian(&counts)
        .into_iter()
        .filter(|th| th.iter().enumerate().any(|(i, &t)| t >= inc[i]))
        .collect();
    let level = |th: &[usize]| th.iter().enumerate().filter(|(i, &t)| t >= inc[*i]).count();
    matches.sort_by_key(|th| (level(th), th.clone()));
    let utils: Vec<Vec<&[Q]>> = matches
        .iter()
        .map(|th| (0..n).map(|i| types[i][th[i]].utilities.as_slice()).collect())
        .collect();
    let mut options = Vec::new();
    for (m, th) in matches.iter().enumerate() {
        let movers: Vec<usize> = (0..n).filter(|&i| th[i] >= inc[i]).collect();
        let dims: Vec<usize> = movers.iter().map(|&i| g.num_actions(i)).collect();
        let mut opts_here = Vec::new();
        let push_for = |xs: Vec<MixedStrategy>, out: &mut Vec<MixedProfile>| {
            let mut fixed: Vec<Option<MixedStrategy>> = vec![None; n];
            for (k, &i) in movers.iter().enumerate() {
                fixed[i] = Some(xs[k].clone());
            }
            out.extend(incumbent_replies(g, &fixed, &utils[m]));
        };
        for choice in cartesian(&dims) {
            let xs = movers
                .iter()
                .zip(&choice)
                .map(|(&i, &a)| MixedStrategy::pure(a, g.num_actions(i)))
                .collect();
            push_for(xs, &mut opts_here);
        }
        if movers.len() == coalition.len() && movers.len() >= 2 && opts.grid_resolution > 0 {
            let grids: Vec<Vec<MixedStrategy>> = movers
                .iter()
                .map(|&i| grid_strategies(g.num_actions(i), opts.grid_resolution))
                .collect();
            let total: usize = grids.iter().map(Vec::len).product();
            if total <= MIXED_COMBO_CAP {
                let gdims: Vec<usize> = grids.iter().map(Vec::len).collect();
                for choice in cartesian(&gdims) {
                    let xs: Vec<MixedStrategy> = choice.iter().enumerate().map(|(k, &c)| grids[k][c].clone()).collect();
                    if xs.iter().all(|x| x.pure_action().is_some()) {
                        continue;
                    }
                    push_for(xs, &mut opts_here);
                }
            }
        }
        options.push(opts_here);
    }
    let deltas: Vec<Vec<Vec<Vec<Q>>>> = matches
        .iter()
        .zip(&options)
        .map(|(th, os)| os.iter().map(|p| contribution(th, p)).collect())
        .collect();
    let levels = matches.iter().map(|th| level(th)).collect();
    let mut s = P1Search {
        config,
        coalition: coalition.to_vec(),
        mutants,
        matches,
        levels,
        options,
        deltas,
        keys,
        aggregate: opts.aggregate_fitness,
        budget: opts.node_cap,
        hit_cap: false,
    };
    match s.rec(0, &mut d, &mut Vec::new()) {
        Some(c) => Outcome::Found(Box::new(c)),
        None if s.hit_cap => Outcome::CapHit,
        None => Outcome::Exhausted,
    }
}

/// Indifferent mutants copy the behaviour of an incumbent profile whose
/// outcome is Pareto dominated, except against each other.
pub(crate) fn handshake_p1(config: &Configuration, opts: &StabilityOptions) -> Option<InvaderCertificate> {
    let Regime::P1 { b } = &config.regime else { return None };
    let g = &config.game;
    let n = g.n();
    let coalition: Vec<usize> = (0..n).collect();
    let inc = config.mu.type_counts();
    let counts = post_entry_counts(config, &coalition);
    for (bar, prof) in b {
        let Ok(EfficiencyStatus::Dominated { certificate, relation, .. }) = efficiency_status(g, prof, opts.grid_resolution) else {
            continue;
        };
        let mut assignment = MutantAssignment::default();
        for th in cartesian(&counts) {
            let mutant: Vec<bool> = (0..n).map(|i| th[i] >= inc[i]).collect();
            if !mutant.iter().any(|&m| m) {
                continue;
            }
            let prof = if mutant.iter().all(|&m| m) {
                certificate.clone()
            } else {
                let mimic: Vec<usize> = (0..n).map(|i| if mutant[i] { bar[i] } else { th[i] }).collect();
                b[&mimic].clone()
            };
            assignment.b.insert(th, prof);
        }
        let note = format!(
            "{} {} dominates {}",
            g.render_profile(&certificate),
            if relation == Dominance::Strong { "strictly" } else { "weakly" },
            g.render_profile(prof)
        );
        let cert = build_certificate(
            config,
            "handshake",
            coalition.clone(),
            mutant_types(config, &coalition),
            assignment,
            opts.aggregate_fitness,
            vec![note],
        );
        if cert.is_some() {
            return cert;
        }
    }
    None
}

/// A single indifferent mutant copies the better of two incumbent types
/// against one opponent profile and the worse one elsewhere.
pub(crate) fn mismatch_p1(config: &Configuration, opts: &StabilityOptions) -> Option<InvaderCertificate> {
    let Regime::P1 { b } = &config.regime else { return None };
    let g = &config.game;
    let n = g.n();
    let inc = config.mu.type_counts();
    for j in 0..n {
        if inc[j] < 2 {
            continue;
        }
        let coalition = vec![j];
        let counts = post_entry_counts(config, &coalition);
        for th in b.keys().filter(|th| th[j] == 0) {
            let value = |t: usize| -> Q {
                let mut k = th.clone();
                k[j] = t;
                expected_payoff(g, &b[&k]).expect("valid")[j].clone()
            };
            for hi in 0..inc[j] {
                for lo in 0..inc[j] {
                    if value(hi) <= value(lo) {
                        continue;
                    }
                    let mut assignment = MutantAssignment::default();
                    for m in cartesian(&counts).into_iter().filter(|m| m[j] == inc[j]) {
                        let same = (0..n).all(|i| i == j || m[i] == th[i]);
                        let mut k = m.clone();
                        k[j] = if same { hi } else { lo };
                        assignment.b.insert(m, b[&k].clone());
                    }
                    let cert = build_certificate(
                        config,
                        "type-mismatch",
                        coalition.clone(),
                        mutant_types(config, &coalition),
                        assignment,
                        opts.aggregate_fitness,
                        vec![],
                    );
                    if cert.is_some() {
                        return cert;
                    }
                }
            }
        }
    }
    None
}

/// Unobserved types: pure mutant strategies against unchanged incumbents.
pub(crate) fn search_p0(config: &Configuration, coalition: &[usize], opts: &StabilityOptions) -> Outcome {
    let g = &config.game;
    let dims: Vec<usize> = coalition.iter().map(|&j| g.num_actions(j)).collect();
    let mutants = mutant_types(config, coalition);
    let mut budget = opts.node_cap;
    for choice in cartesian(&dims) {
        if budget == 0 {
            return Outcome::CapHit;
        }
        budget -= 1;
        let mut assignment = MutantAssignment::default();
        for (k, &j) in coalition.iter().enumerate() {
            assignment.s.insert(j, MixedStrategy::pure(choice[k], g.num_actions(j)));
        }
        if let Some(c) = build_certificate(config, "search", coalition.to_vec(), mutants.clone(), assignment, opts.aggregate_fitness, vec![]) {
            return Outcome::Found(Box::new(c));
        }
    }
    Outcome::Exhausted
}

/// Unobserved types with an aggregate outcome that is not a Nash equilibrium:
/// a mutant committed to a better reply gains against every nearby equilibrium.
pub(crate) fn deviation_p0(config: &Configuration) -> Option<InvaderCertificate> {
    let g = &config.game;
    let Regime::P0 { s } = &config.regime else { return None };
    let x = aggregate_outcome(config).product?;
    let st: Vec<Vec<Q>> = profile_ring(&x);
    let mut best: Option<(usize, usize, Q)> = None;
    for k in 0..g.n() {
        let vals = action_values(g, g.tensor(k), &st, k);
        let cur: Q = vals.iter().zip(x[k].weights()).map(|(v, w)| v * w).sum();
        for (a, v) in vals.iter().enumerate() {
            let gain = v - &cur;
            if gain.is_positive() && best.as_ref().map_or(true, |b| gain > b.2) {
                best = Some((k, a, gain));
            }
        }
    }
    let (k, a, _) = best?;
    let mutant = PreferenceType::dominant(g, k, a);
    if config.mu.populations[k].types.iter().any(|t| t.utilities == mutant.utilities) {
        return None;
    }
    let mut assignment = MutantAssignment::default();
    assignment.s.insert(k, MixedStrategy::pure(a, g.num_actions(k)));
    let note = format!("{} is not a Nash equilibrium", g.render_profile(&x));
    if let Some(c) = build_certificate(config, "profitable-deviation", vec![k], vec![mutant.clone()], assignment.clone(), false, vec![note.clone()]) {
        return Some(c);
    }
    // Incumbents would re-optimise: bound the gain over every nearby equilibrium.
    let vals = action_values(g, g.tensor(k), &st, k);
    let mut diffs = Vec::new();
    let mut gap: Option<Q> = None;
    for (t, own) in s[k].iter().enumerate() {
        let cur: Q = vals.iter().zip(own.weights()).map(|(v, w)| v * w).sum();
        let d = &vals[a] - cur;
        gap = Some(match gap {
            Some(gp) if gp <= d => gp,
            _ => d.clone(),
        });
        diffs.push(DiffPolynomial {
            population: k,
            incumbent: t,
            poly: Poly::constant(d),
        });
    }
    let gap = gap?;
    if !gap.is_positive() {
        return None;
    }
    let eta = continuity_radius(g, k, &gap);
    Some(InvaderCertificate {
        route: "profitable-deviation",
        coalition: vec![k],
        mutant_types: vec![mutant],
        assignment,
        diffs,
        witnesses: vec![(k, 0)],
        constraints: vec![],
        region: Region {
            t_upper: Q::one(),
            exact: true,
        },
        kind: CertificateKind::Continuity { eta: eta.clone(), gap },
        notes: vec![note, format!("every post-entry equilibrium within {} of the incumbents favours the mutant", fmt_q(&eta))],
    })
}

/// Radius within which moving the incumbents' strategies changes the
/// mutant's advantage by at most half of `gap`.
pub(crate) fn continuity_radius(g: &Game, k: usize, gap: &Q) -> Q {
    let vals: Vec<&Q> = g.tensor(k).iter().collect();
    let range = vals.iter().max().copied().cloned().unwrap_or_else(Q::zero) - vals.iter().min().copied().cloned().unwrap_or_else(Q::zero);
    let m = (0..g.n()).map(|i| g.num_actions(i)).max().unwrap_or(1);
    let denom = Q::from_integer(2.into()) * range * Q::from_integer(((g.n() * m) as i64).into());
    gap / denom
}

/// Partial observability: indifferent mutants reveal a strictly better
/// profile to each other and play the status quo otherwise.
pub(crate) fn handshake_partial(config: &Configuration, opts: &StabilityOptions) -> Option<InvaderCertificate> {
    let Regime::Partial { p, .. } = &config.regime else { return None };
    let g = &config.game;
    let a = pure_outcome(config)?;
    let EfficiencyStatus::Dominated { certificate: sigma, relation: Dominance::Strong, .. } =
        efficiency_status(g, &pure_profile(g, &a), opts.grid_resolution).ok()?
    else {
        return None;
    };
    for i in 0..g.n() {
        if !handshake_advantage(g, &a, &sigma, i).ok()?.eval(p).is_positive() {
            return None;
        }
    }
    let coalition: Vec<usize> = (0..g.n()).collect();
    let mut note = vec![format!("{} strictly dominates {}", g.render_profile(&sigma), g.render_profile(&pure_profile(g, &a)))];
    if let Ok(th) = super::routes::observability_thresholds(g, &a, &sigma) {
        note.push(format!("advantage is positive for every p above {}", fmt_q(&th.p_bar_high)));
    }
    handshake_like(config, &coalition, &a, &sigma, "handshake", opts, note)
}

fn handshake_like(
    config: &Configuration,
    coalition: &[usize],
    a: &[usize],
    sigma: &[MixedStrategy],
    route: &'static str,
    opts: &StabilityOptions,
    notes: Vec<String>,
) -> Option<InvaderCertificate> {
    let g = &config.game;
    let n = g.n();
    let inc = config.mu.type_counts();
    let counts = post_entry_counts(config, coalition);
    let star = pure_profile(g, a);
    let mut assignment = MutantAssignment::default();
    for &j in coalition {
        assignment.s.insert(j, star[j].clone());
    }
    for th in cartesian(&counts) {
        let movers: Vec<usize> = (0..n).filter(|&i| th[i] >= inc[i]).collect();
        if movers.is_empty() {
            continue;
        }
        let prof = if movers.len() == coalition.len() { sigma.to_vec() } else { star.clone() };
        assignment.b.insert(th, prof);
    }
    build_certificate(
        config,
        route,
        coalition.to_vec(),
        mutant_types(config, coalition),
        assignment,
        opts.aggregate_fitness,
        notes,
    )
}

/// Partial observability: handshakes over every coalition and pure profile,
/// with the outsiders' observed replies ranging over pure profiles.
pub(crate) fn search_partial(config: &Configuration, coalition: &[usize], opts: &StabilityOptions) -> Outcome {
    let g = &config.game;
    let n = g.n();
    let Some(a) = pure_outcome(config) else { return Outcome::Exhausted };
    let mut budget = opts.node_cap;
    for choice in cartesian(&g.action_counts()) {
        if coalition.iter().all(|&j| choice[j] == a[j]) {
            continue;
        }
        if (0..n).any(|i| !coalition.contains(&i) && choice[i] != a[i]) && coalition.len() == n {
            continue;
        }
        if budget == 0 {
            return Outcome::CapHit;
        }
        budget -= 1;
        let sigma = pure_profile(g, &choice);
        if let Some(c) = handshake_like(config, coalition, &a, &sigma, "search", opts, vec![]) {
            return Outcome::Found(Box::new(c));
        }
    }
    Outcome::Exhausted
}

/// Partial observability with a profitable unilateral deviation: a mutant
/// committed to it gains while types are rarely observed.
pub(crate) fn deviation_partial(config: &Configuration, opts: &StabilityOptions) -> Option<InvaderCertificate> {
    let Regime::Partial { .. } = &config.regime else { return None };
    let g = &config.game;
    let n = g.n();
    let a = pure_outcome(config)?;
    let (k, x, _) = best_deviation(g, &a)?;
    let mutant = PreferenceType::dominant(g, k, x);
    if config.mu.populations[k].types.iter().any(|t| t.utilities == mutant.utilities) {
        return None;
    }
    let coalition = vec![k];
    let inc = config.mu.type_counts();
    let counts = post_entry_counts(config, &coalition);
    let mut dims = g.action_counts();
    dims[k] = 1;
    let mut notes = vec![format!("{} is not a Nash equilibrium", g.profile_label(&a))];
    if let Some((lo, _)) = super::routes::low_threshold(g, &a) {
        notes.push(format!("advantage is positive for every p below {}", fmt_q(&lo)));
    }
    for reply in cartesian(&dims) {
        let mut assignment = MutantAssignment::default();
        assignment.s.insert(k, MixedStrategy::pure(x, g.num_actions(k)));
        for th in cartesian(&counts).into_iter().filter(|th| th[k] == inc[k]) {
            let prof: MixedProfile = (0..n)
                .map(|i| if i == k { MixedStrategy::pure(x, g.num_actions(k)) } else { MixedStrategy::pure(reply[i], g.num_actions(i)) })
                .collect();
            assignment.b.insert(th, prof);
        }
        if let Some(c) = build_certificate(config, "profitable-deviation", coalition.clone(), vec![mutant.clone()], assignment, opts.aggregate_fitness, notes.clone()) {
            return Some(c);
        }
    }
    None
}

