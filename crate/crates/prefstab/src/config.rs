//! Preference types, distributions and configurations for the three
//! observability regimes, with equilibrium validation and fitness.

use crate::equilibrium::action_values;
use crate::error::{structural, Error, Result};
use crate::game::{cartesian, profile_ring, CorrelatedStrategy, Game, MixedProfile, MixedStrategy};
use crate::rational::{fmt_q, Q};
use crate::ring::{sum, Ring};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Materialist,
    Indifferent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceType {
    pub role: usize,
    pub utilities: Vec<Q>,
    pub tags: Vec<Tag>,
}

/// `u = a v + b` with `a > 0`.
fn is_positive_affine(u: &[Q], v: &[Q]) -> bool {
    let Some(k) = (1..v.len()).find(|&k| v[k] != v[0]) else {
        return u.iter().all(|x| *x == u[0]);
    };
    let a = (&u[k] - &u[0]) / (&v[k] - &v[0]);
    if !a.is_positive() {
        return false;
    }
    let b = &u[0] - &a * &v[0];
    u.iter().zip(v).all(|(x, y)| *x == &a * y + &b)
}

impl PreferenceType {
    pub fn new(game: &Game, role: usize, utilities: Vec<Q>, mut tags: Vec<Tag>) -> Result<PreferenceType> {
        if role >= game.n() {
            return structural(format!("type role {role} out of range"));
        }
        if utilities.len() != game.num_profiles() {
            return structural("utility tensor does not cover every action profile");
        }
        tags.sort();
        tags.dedup();
        let t = PreferenceType { role, utilities, tags };
        if t.tags.contains(&Tag::Materialist) && !t.is_materialist(game) {
            return structural(format!(
                "type tagged materialist for player {} is not a positive affine transform of its payoff",
                role + 1
            ));
        }
        if t.tags.contains(&Tag::Indifferent) && !t.is_indifferent() {
            return structural("type tagged indifferent has non-constant utilities");
        }
        Ok(t)
    }

    pub fn materialist(game: &Game, role: usize) -> PreferenceType {
        PreferenceType {
            role,
            utilities: game.tensor(role).to_vec(),
            tags: vec![Tag::Materialist],
        }
    }

    pub fn indifferent(game: &Game, role: usize) -> PreferenceType {
        PreferenceType {
            role,
            utilities: vec![Q::zero(); game.num_profiles()],
            tags: vec![Tag::Indifferent],
        }
    }

    /// Indifferent type distinguished by its constant level.
    pub fn indifferent_at(game: &Game, role: usize, level: Q) -> PreferenceType {
        PreferenceType {
            role,
            utilities: vec![level; game.num_profiles()],
            tags: vec![Tag::Indifferent],
        }
    }

    /// Utility 1 on profiles where `role` plays `action`, 0 elsewhere.
    pub fn dominant(game: &Game, role: usize, action: usize) -> PreferenceType {
        let utilities = game
            .profiles()
            .map(|a| if a[role] == action { Q::one() } else { Q::zero() })
            .collect();
        PreferenceType {
            role,
            utilities,
            tags: vec![],
        }
    }

    pub fn is_indifferent(&self) -> bool {
        self.utilities.iter().all(|x| *x == self.utilities[0])
    }

    pub fn is_materialist(&self, game: &Game) -> bool {
        is_positive_affine(&self.utilities, game.tensor(self.role))
    }

    /// The action that is strictly better than every other against every
    /// pure opponent profile, if any.
    pub fn strictly_dominant_action(&self, game: &Game) -> Option<usize> {
        let i = self.role;
        let m = game.num_actions(i);
        (0..m).find(|&a| {
            game.profiles().filter(|x| x[i] == a).all(|x| {
                (0..m).filter(|&b| b != a).all(|b| {
                    let mut y = x.clone();
                    y[i] = b;
                    self.utilities[game.index(&x)] > self.utilities[game.index(&y)]
                })
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    pub types: Vec<PreferenceType>,
    pub shares: Vec<Q>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceDistribution {
    pub populations: Vec<Population>,
}

impl PreferenceDistribution {
    pub fn new(game: &Game, populations: Vec<Population>) -> Result<PreferenceDistribution> {
        let d = PreferenceDistribution { populations };
        d.check(game)?;
        Ok(d)
    }

    pub fn monomorphic(types: Vec<PreferenceType>) -> PreferenceDistribution {
        PreferenceDistribution {
            populations: types
                .into_iter()
                .map(|t| Population {
                    types: vec![t],
                    shares: vec![Q::one()],
                })
                .collect(),
        }
    }

    pub fn check(&self, game: &Game) -> Result<()> {
        if self.populations.len() != game.n() {
            return structural("one population per player is required");
        }
        for (i, pop) in self.populations.iter().enumerate() {
            if pop.types.is_empty() || pop.types.len() != pop.shares.len() {
                return structural(format!("population {} needs one share per type", i + 1));
            }
            for t in &pop.types {
                if t.role != i || t.utilities.len() != game.num_profiles() {
                    return structural(format!("type in population {} has the wrong role or shape", i + 1));
                }
            }
            if pop.shares.iter().any(|s| !s.is_positive()) {
                return structural(format!("population {} has a nonpositive share", i + 1));
            }
            let total: Q = pop.shares.iter().sum();
            if !total.is_one() {
                return Err(Error::ShareSum(format!(
                    "population {} shares sum to {}",
                    i + 1,
                    fmt_q(&total)
                )));
            }
            for (k, t) in pop.types.iter().enumerate() {
                if pop.types[..k].iter().any(|u| u.utilities == t.utilities) {
                    return structural(format!("population {} lists the same type twice", i + 1));
                }
            }
        }
        Ok(())
    }

    pub fn type_counts(&self) -> Vec<usize> {
        self.populations.iter().map(|p| p.types.len()).collect()
    }

    pub fn shares(&self) -> Vec<Vec<Q>> {
        self.populations.iter().map(|p| p.shares.clone()).collect()
    }

    pub fn types(&self) -> Vec<Vec<PreferenceType>> {
        self.populations.iter().map(|p| p.types.clone()).collect()
    }

    /// All type profiles in the support, lexicographic.
    pub fn support(&self) -> Vec<Vec<usize>> {
        cartesian(&self.type_counts())
    }

    pub fn weight(&self, theta: &[usize]) -> Q {
        theta
            .iter()
            .enumerate()
            .map(|(i, &t)| self.populations[i].shares[t].clone())
            .product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Regime {
    P1 {
        b: BTreeMap<Vec<usize>, MixedProfile>,
    },
    P0 {
        s: Vec<Vec<MixedStrategy>>,
    },
    Partial {
        p: Q,
        b: BTreeMap<Vec<usize>, MixedProfile>,
        s: Vec<Vec<MixedStrategy>>,
    },
}

impl Regime {
    pub fn mode(&self) -> &'static str {
        match self {
            Regime::P1 { .. } => "p1",
            Regime::P0 { .. } => "p0",
            Regime::Partial { .. } => "partial",
        }
    }

    pub fn p(&self) -> Q {
        match self {
            Regime::P1 { .. } => Q::one(),
            Regime::P0 { .. } => Q::zero(),
            Regime::Partial { p, .. } => p.clone(),
        }
    }

    pub fn b(&self) -> Option<&BTreeMap<Vec<usize>, MixedProfile>> {
        match self {
            Regime::P1 { b } | Regime::Partial { b, .. } => Some(b),
            Regime::P0 { .. } => None,
        }
    }

    pub fn s(&self) -> Option<&Vec<Vec<MixedStrategy>>> {
        match self {
            Regime::P0 { s } | Regime::Partial { s, .. } => Some(s),
            Regime::P1 { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    pub game: Game,
    pub mu: PreferenceDistribution,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// "b" for an observed-match condition, "s" for an unobserved one.
    pub condition: &'static str,
    /// Type profile for "b", or the single type index for "s".
    pub types: Vec<usize>,
    pub player: usize,
    pub deviation: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub gain: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violation: Option<Violation>,
}

/// Best-response margin: assigned utility minus utility of a pure deviation.
#[derive(Debug, Clone)]
pub struct Margin<R> {
    pub condition: &'static str,
    pub types: Vec<usize>,
    pub player: usize,
    pub deviation: usize,
    pub value: R,
}

/// Weight of an observation-status subset: `p^(m - k) (1 - p)^k`.
pub fn status_weight<R: Ring>(p: &R, m: usize, k: usize) -> R {
    p.power(m - k).times(&p.one_minus().power(k))
}

/// Subsets of `players` as bitmasks over the full player set.
fn subsets_of(players: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << players.len()) {
        out.push(
            players
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &j)| j)
                .collect(),
        );
    }
    out
}

/// Strategy profile played by match `theta` when the players in `ignorant` do
/// not observe types.
pub fn match_profile(
    b: &BTreeMap<Vec<usize>, MixedProfile>,
    s: &[Vec<MixedStrategy>],
    theta: &[usize],
    ignorant: &[usize],
) -> MixedProfile {
    let bp = &b[theta];
    (0..theta.len())
        .map(|j| {
            if ignorant.contains(&j) {
                s[j][theta[j]].clone()
            } else {
                bp[j].clone()
            }
        })
        .collect()
}

fn others_weight<R: Ring>(shares: &[Vec<R>], theta: &[usize], i: usize) -> R {
    let mut w = R::unit();
    for (j, &t) in theta.iter().enumerate() {
        if j != i {
            w = w.times(&shares[j][t]);
        }
    }
    w
}

fn opponent_profiles(counts: &[usize], i: usize, t: usize) -> Vec<Vec<usize>> {
    let mut c = counts.to_vec();
    c[i] = 1;
    cartesian(&c)
        .into_iter()
        .map(|mut th| {
            th[i] = t;
            th
        })
        .collect()
}

fn counts_of<R>(shares: &[Vec<R>]) -> Vec<usize> {
    shares.iter().map(Vec::len).collect()
}

/// Average fitness of type `t` in population `i` when types are observed.
pub fn fitness_p1<R: Ring>(game: &Game, shares: &[Vec<R>], b: &BTreeMap<Vec<usize>, MixedProfile>, i: usize, t: usize) -> R {
    sum(opponent_profiles(&counts_of(shares), i, t).into_iter().map(|th| {
        let st: Vec<Vec<Q>> = profile_ring(&b[&th]);
        others_weight(shares, &th, i).scale(&game.multilinear(game.tensor(i), &st))
    }))
}

/// Share-weighted mixture of each population's strategies.
pub fn aggregate_strategies<R: Ring>(shares: &[Vec<R>], s: &[Vec<MixedStrategy>]) -> Vec<Vec<R>> {
    shares
        .iter()
        .zip(s)
        .map(|(sh, st)| {
            let m = st[0].len();
            (0..m)
                .map(|a| sum(sh.iter().zip(st).map(|(w, x)| w.scale(x.weight(a)))))
                .collect()
        })
        .collect()
}

/// Average fitness of type `t` in population `i` when types are unobserved.
pub fn fitness_p0<R: Ring>(game: &Game, shares: &[Vec<R>], s: &[Vec<MixedStrategy>], i: usize, t: usize) -> R {
    let mut x = aggregate_strategies(shares, s);
    x[i] = s[i][t].into_ring();
    game.multilinear(game.tensor(i), &x)
}

/// Average fitness under partial observability with degree `p`.
pub fn fitness_partial<R: Ring>(
    game: &Game,
    shares: &[Vec<R>],
    b: &BTreeMap<Vec<usize>, MixedProfile>,
    s: &[Vec<MixedStrategy>],
    p: &R,
    i: usize,
    t: usize,
) -> R {
    let n = game.n();
    let all: Vec<usize> = (0..n).collect();
    let statuses = subsets_of(&all);
    sum(opponent_profiles(&counts_of(shares), i, t).into_iter().map(|th| {
        let inner = sum(statuses.iter().map(|tset| {
            let prof = match_profile(b, s, &th, tset);
            let v = game.multilinear(game.tensor(i), &profile_ring::<Q>(&prof));
            status_weight(p, n, tset.len()).scale(&v)
        }));
        others_weight(shares, &th, i).times(&inner)
    }))
}

pub fn margins_p1(game: &Game, types: &[Vec<PreferenceType>], b: &BTreeMap<Vec<usize>, MixedProfile>) -> Vec<Margin<Q>> {
    let mut out = Vec::new();
    for (th, prof) in b {
        let st: Vec<Vec<Q>> = profile_ring(prof);
        for i in 0..game.n() {
            let u = &types[i][th[i]].utilities;
            let vals = action_values(game, u, &st, i);
            let cur: Q = vals.iter().zip(&st[i]).map(|(v, w)| v * w).sum();
            for (a, v) in vals.iter().enumerate() {
                out.push(Margin {
                    condition: "b",
                    types: th.clone(),
                    player: i,
                    deviation: a,
                    value: &cur - v,
                });
            }
        }
    }
    out
}

pub fn margins_p0<R: Ring>(game: &Game, types: &[Vec<PreferenceType>], shares: &[Vec<R>], s: &[Vec<MixedStrategy>]) -> Vec<Margin<R>> {
    let x = aggregate_strategies(shares, s);
    let mut out = Vec::new();
    for i in 0..game.n() {
        for (t, ty) in types[i].iter().enumerate() {
            let vals = action_values(game, &ty.utilities, &x, i);
            let cur = sum(vals.iter().zip(s[i][t].weights()).map(|(v, w)| v.scale(w)));
            for (a, v) in vals.iter().enumerate() {
                out.push(Margin {
                    condition: "s",
                    types: vec![t],
                    player: i,
                    deviation: a,
                    value: cur.minus(v),
                });
            }
        }
    }
    out
}

/// Margins of pure deviations for `i` against `opp` (own slot ignored),
/// relative to the assigned strategy `own`.
fn gaps(game: &Game, u: &[Q], opp: &MixedProfile, own: &MixedStrategy, i: usize) -> Vec<Q> {
    let st: Vec<Vec<Q>> = profile_ring(opp);
    let vals = action_values(game, u, &st, i);
    let cur: Q = vals.iter().zip(own.weights()).map(|(v, w)| v * w).sum();
    vals.iter().map(|v| &cur - v).collect()
}

pub fn margins_partial<R: Ring>(
    game: &Game,
    types: &[Vec<PreferenceType>],
    shares: &[Vec<R>],
    b: &BTreeMap<Vec<usize>, MixedProfile>,
    s: &[Vec<MixedStrategy>],
    p: &R,
) -> Vec<Margin<R>> {
    let n = game.n();
    let mut out = Vec::new();
    for i in 0..n {
        let others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let statuses = subsets_of(&others);
        let m = game.num_actions(i);
        // Observed: b_i(theta) against the actual opponents.
        for th in b.keys() {
            let u = &types[i][th[i]].utilities;
            let mut acc = vec![R::nil(); m];
            for tset in &statuses {
                let prof = match_profile(b, s, th, tset);
                let g = gaps(game, u, &prof, &b[th][i], i);
                let w = status_weight(p, n - 1, tset.len());
                for a in 0..m {
                    acc[a] = acc[a].plus(&w.scale(&g[a]));
                }
            }
            for (a, v) in acc.into_iter().enumerate() {
                out.push(Margin {
                    condition: "b",
                    types: th.clone(),
                    player: i,
                    deviation: a,
                    value: v,
                });
            }
        }
        // Unobserved: s_i(t) against the population mixture.
        for t in 0..types[i].len() {
            let u = &types[i][t].utilities;
            let mut acc = vec![R::nil(); m];
            for th in opponent_profiles(&counts_of(shares), i, t) {
                let ow = others_weight(shares, &th, i);
                for tset in &statuses {
                    let prof = match_profile(b, s, &th, tset);
                    let g = gaps(game, u, &prof, &s[i][t], i);
                    let w = status_weight(p, n - 1, tset.len()).times(&ow);
                    for a in 0..m {
                        acc[a] = acc[a].plus(&w.scale(&g[a]));
                    }
                }
            }
            for (a, v) in acc.into_iter().enumerate() {
                out.push(Margin {
                    condition: "s",
                    types: vec![t],
                    player: i,
                    deviation: a,
                    value: v,
                });
            }
        }
    }
    out
}

impl Configuration {
    /// Structural checks only; equilibrium conditions are not verified.
    pub fn unchecked(game: Game, mu: PreferenceDistribution, regime: Regime) -> Result<Configuration> {
        mu.check(&game)?;
        let support = mu.support();
        let counts = mu.type_counts();
        let check_b = |b: &BTreeMap<Vec<usize>, MixedProfile>| -> Result<()> {
            for th in &support {
                let prof = b
                    .get(th)
                    .ok_or_else(|| Error::Structural(format!("no observed-match profile for types {th:?}")))?;
                game.check_profile(prof)?;
            }
            if b.len() != support.len() {
                return structural("observed-match profiles given for types outside the support");
            }
            Ok(())
        };
        let check_s = |s: &Vec<Vec<MixedStrategy>>| -> Result<()> {
            if s.len() != game.n() {
                return structural("one strategy list per population is required");
            }
            for (i, si) in s.iter().enumerate() {
                if si.len() != counts[i] {
                    return structural(format!("population {} needs one strategy per type", i + 1));
                }
                for st in si {
                    if st.len() != game.num_actions(i) {
                        return structural(format!("strategy for player {} has the wrong length", i + 1));
                    }
                }
            }
            Ok(())
        };
        match &regime {
            Regime::P1 { b } => check_b(b)?,
            Regime::P0 { s } => check_s(s)?,
            Regime::Partial { p, b, s } => {
                if !p.is_positive() || *p >= Q::one() {
                    return structural("partial observability needs 0 < p < 1");
                }
                check_b(b)?;
                check_s(s)?;
            }
        }
        Ok(Configuration { game, mu, regime })
    }

    pub fn new(game: Game, mu: PreferenceDistribution, regime: Regime) -> Result<Configuration> {
        let c = Configuration::unchecked(game, mu, regime)?;
        let r = validate_configuration(&c);
        if let Some(v) = r.violation {
            return Err(Error::Contract(format!(
                "not an equilibrium: player {} gains {} by deviating to {} ({} condition, types {:?})",
                v.player + 1,
                fmt_q(&v.gain),
                c.game.label(v.player, v.deviation),
                v.condition,
                v.types
            )));
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.game.n()
    }

    pub fn types(&self) -> Vec<Vec<PreferenceType>> {
        self.mu.types()
    }

    /// Regime-specific margins at the configuration's own shares.
    pub fn margins(&self) -> Vec<Margin<Q>> {
        let types = self.types();
        let shares = self.mu.shares();
        match &self.regime {
            Regime::P1 { b } => margins_p1(&self.game, &types, b),
            Regime::P0 { s } => margins_p0(&self.game, &types, &shares, s),
            Regime::Partial { p, b, s } => margins_partial(&self.game, &types, &shares, b, s, p),
        }
    }

    /// Replaces the strategies by the strictly dominant actions of every
    /// type, for the requested degree of observability.
    pub fn with_observability(&self, p: &Q) -> Result<Configuration> {
        if p.is_negative() || *p > Q::one() {
            return structural("observability degree must lie in [0, 1]");
        }
        let same = match &self.regime {
            Regime::P1 { .. } => p.is_one(),
            Regime::P0 { .. } => p.is_zero(),
            Regime::Partial { p: q, .. } => q == p,
        };
        if same {
            return Ok(self.clone());
        }
        let mut dom = Vec::new();
        for pop in &self.mu.populations {
            let mut d = Vec::new();
            for t in &pop.types {
                d.push(t.strictly_dominant_action(&self.game).ok_or_else(|| {
                    Error::Structural(
                        "changing the observability degree needs every type to have a strictly dominant action"
                            .into(),
                    )
                })?);
            }
            dom.push(d);
        }
        let b: BTreeMap<Vec<usize>, MixedProfile> = self
            .mu
            .support()
            .into_iter()
            .map(|th| {
                let prof = th
                    .iter()
                    .enumerate()
                    .map(|(i, &t)| MixedStrategy::pure(dom[i][t], self.game.num_actions(i)))
                    .collect();
                (th, prof)
            })
            .collect();
        let s: Vec<Vec<MixedStrategy>> = dom
            .iter()
            .enumerate()
            .map(|(i, d)| d.iter().map(|&a| MixedStrategy::pure(a, self.game.num_actions(i))).collect())
            .collect();
        let regime = if p.is_one() {
            Regime::P1 { b }
        } else if p.is_zero() {
            Regime::P0 { s }
        } else {
            Regime::Partial { p: p.clone(), b, s }
        };
        Configuration::new(self.game.clone(), self.mu.clone(), regime)
    }
}

pub fn validate_configuration(config: &Configuration) -> ValidationReport {
    for m in config.margins() {
        if m.value.is_negative() {
            return ValidationReport {
                ok: false,
                violation: Some(Violation {
                    condition: m.condition,
                    types: m.types,
                    player: m.player,
                    deviation: m.deviation,
                    gain: -m.value,
                }),
            };
        }
    }
    ValidationReport {
        ok: true,
        violation: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateOutcome {
    pub correlated: CorrelatedStrategy,
    /// Present when the distribution is a product of its marginals.
    pub product: Option<MixedProfile>,
}

pub fn aggregate_outcome(config: &Configuration) -> AggregateOutcome {
    let g = &config.game;
    let n = g.n();
    let mut phi = vec![Q::zero(); g.num_profiles()];
    let add = |phi: &mut Vec<Q>, w: &Q, prof: &MixedProfile| {
        let c = CorrelatedStrategy::from_product(g, prof).expect("validated profile");
        for (x, y) in phi.iter_mut().zip(c.weights()) {
            *x += w * y;
        }
    };
    match &config.regime {
        Regime::P1 { b } => {
            for th in config.mu.support() {
                add(&mut phi, &config.mu.weight(&th), &b[&th]);
            }
        }
        Regime::P0 { s } => {
            let x = aggregate_strategies(&config.mu.shares(), s);
            let prof: MixedProfile = x.into_iter().map(|w| MixedStrategy::new(w).expect("mixture")).collect();
            let c = CorrelatedStrategy::from_product(g, &prof).expect("mixture");
            return AggregateOutcome {
                correlated: c,
                product: Some(prof),
            };
        }
        Regime::Partial { p, b, s } => {
            let all: Vec<usize> = (0..n).collect();
            for th in config.mu.support() {
                let w = config.mu.weight(&th);
                for tset in subsets_of(&all) {
                    let sw = &w * status_weight(p, n, tset.len());
                    add(&mut phi, &sw, &match_profile(b, s, &th, &tset));
                }
            }
        }
    }
    let correlated = CorrelatedStrategy::new(g, phi).expect("mixture of distributions");
    let marginals: MixedProfile = (0..n)
        .map(|i| {
            let mut w = vec![Q::zero(); g.num_actions(i)];
            for (k, x) in correlated.weights().iter().enumerate() {
                w[g.profile(k)[i]] += x;
            }
            MixedStrategy::new(w).expect("marginal")
        })
        .collect();
    let product = (CorrelatedStrategy::from_product(g, &marginals).ok().as_ref() == Some(&correlated))
        .then_some(marginals);
    AggregateOutcome { correlated, product }
}

pub fn average_fitness(config: &Configuration, population: usize, ty: usize) -> Result<Q> {
    if population >= config.n() || ty >= config.mu.populations[population].types.len() {
        return structural("unknown type");
    }
    let shares = config.mu.shares();
    Ok(match &config.regime {
        Regime::P1 { b } => fitness_p1(&config.game, &shares, b, population, ty),
        Regime::P0 { s } => fitness_p0(&config.game, &shares, s, population, ty),
        Regime::Partial { p, b, s } => fitness_partial(&config.game, &shares, b, s, p, population, ty),
    })
}

pub fn is_balanced(config: &Configuration) -> bool {
    (0..config.n()).all(|i| {
        let k = config.mu.populations[i].types.len();
        let f0 = average_fitness(config, i, 0).expect("type exists");
        (1..k).all(|t| average_fitness(config, i, t).expect("type exists") == f0)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutantSubProfile {
    pub coalition: Vec<usize>,
    pub types: Vec<PreferenceType>,
    pub shares: Vec<Q>,
}

impl MutantSubProfile {
    pub fn new(coalition: Vec<usize>, types: Vec<PreferenceType>, shares: Vec<Q>) -> Result<MutantSubProfile> {
        if coalition.is_empty() {
            return structural("the mutant coalition must be nonempty");
        }
        if coalition.windows(2).any(|w| w[0] >= w[1]) {
            return structural("the mutant coalition must be sorted without repeats");
        }
        if types.len() != coalition.len() || shares.len() != coalition.len() {
            return structural("one mutant type and share per coalition member");
        }
        for (k, &j) in coalition.iter().enumerate() {
            if types[k].role != j {
                return structural("mutant type role does not match its population");
            }
            if !shares[k].is_positive() || shares[k] >= Q::one() {
                return structural("mutant shares must lie in (0, 1)");
            }
        }
        Ok(MutantSubProfile {
            coalition,
            types,
            shares,
        })
    }

    pub fn norm(&self) -> Q {
        self.shares.iter().max().cloned().unwrap_or_else(Q::zero)
    }
}

pub fn post_entry(mu: &PreferenceDistribution, mutants: &MutantSubProfile) -> Result<PreferenceDistribution> {
    if mutants.coalition.is_empty() {
        return structural("the mutant coalition must be nonempty");
    }
    let mut out = mu.clone();
    for (k, &j) in mutants.coalition.iter().enumerate() {
        let pop = out
            .populations
            .get_mut(j)
            .ok_or_else(|| Error::Structural("coalition member out of range".into()))?;
        let t = &mutants.types[k];
        if pop.types.iter().any(|u| u.utilities == t.utilities) {
            return structural(format!("mutant type in population {} coincides with an incumbent", j + 1));
        }
        let e = &mutants.shares[k];
        let keep = Q::one() - e;
        for s in pop.shares.iter_mut() {
            *s *= &keep;
        }
        pop.types.push(t.clone());
        pop.shares.push(e.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::pure_profile;
    use crate::rational::{q, qr};

    fn pd() -> Game {
        Game::from_ints(&[&["C1", "D1"], &["C2", "D2"]], &[&[2, 2], &[0, 3], &[3, 0], &[1, 1]]).unwrap()
    }

    #[test]
    fn tags_are_checked() {
        let g = pd();
        let u: Vec<Q> = g.tensor(0).iter().map(|x| x * q(2) + q(1)).collect();
        assert!(PreferenceType::new(&g, 0, u.clone(), vec![Tag::Materialist]).is_ok());
        let neg: Vec<Q> = u.iter().map(|x| -x).collect();
        assert!(PreferenceType::new(&g, 0, neg, vec![Tag::Materialist]).is_err());
        assert!(PreferenceType::new(&g, 0, u, vec![Tag::Indifferent]).is_err());
    }

    #[test]
    fn pd_cooperation_rejected_at_p0() {
        let g = pd();
        let mu = PreferenceDistribution::monomorphic(vec![
            PreferenceType::materialist(&g, 0),
            PreferenceType::materialist(&g, 1),
        ]);
        let s = vec![vec![MixedStrategy::pure(0, 2)], vec![MixedStrategy::pure(0, 2)]];
        let c = Configuration::unchecked(g.clone(), mu.clone(), Regime::P0 { s }).unwrap();
        let r = validate_configuration(&c);
        assert!(!r.ok);
        let v = r.violation.unwrap();
        assert_eq!((v.player, v.deviation, v.gain), (0, 1, q(1)));
        let s = vec![vec![MixedStrategy::pure(1, 2)], vec![MixedStrategy::pure(1, 2)]];
        let c = Configuration::new(g.clone(), mu, Regime::P0 { s }).unwrap();
        assert_eq!(aggregate_outcome(&c).correlated.point_mass(), Some(g.index(&[1, 1])));
        assert!(is_balanced(&c));
        assert_eq!(average_fitness(&c, 0, 0).unwrap(), q(1));
    }

    #[test]
    fn shares_rescaled_on_entry() {
        let g = pd();
        let mu = PreferenceDistribution::monomorphic(vec![
            PreferenceType::materialist(&g, 0),
            PreferenceType::materialist(&g, 1),
        ]);
        let m = MutantSubProfile::new(vec![0], vec![PreferenceType::indifferent(&g, 0)], vec![qr(1, 10)]).unwrap();
        let post = post_entry(&mu, &m).unwrap();
        assert_eq!(post.populations[0].shares, vec![qr(9, 10), qr(1, 10)]);
        assert!(MutantSubProfile::new(vec![], vec![], vec![]).is_err());
        let clash = MutantSubProfile::new(vec![0], vec![PreferenceType::materialist(&g, 0)], vec![qr(1, 10)]).unwrap();
        assert!(post_entry(&mu, &clash).is_err());
    }

    #[test]
    fn share_sum_error() {
        let g = pd();
        let pop = |i| Population {
            types: vec![PreferenceType::materialist(&g, i)],
            shares: vec![qr(1, 2)],
        };
        let e = PreferenceDistribution::new(&g, vec![pop(0), pop(1)]).unwrap_err();
        assert!(e.to_string().contains("share-sum violation"));
    }

    #[test]
    fn partial_point_mass() {
        let g = pd();
        let mu = PreferenceDistribution::monomorphic(vec![
            PreferenceType::materialist(&g, 0),
            PreferenceType::materialist(&g, 1),
        ]);
        let c = Configuration::new(g.clone(), mu, Regime::P0 { s: vec![vec![MixedStrategy::pure(1, 2)], vec![MixedStrategy::pure(1, 2)]] }).unwrap();
        let c = c.with_observability(&qr(1, 2)).unwrap();
        let out = aggregate_outcome(&c);
        assert_eq!(out.product, Some(pure_profile(&g, &[1, 1])));
    }
}
