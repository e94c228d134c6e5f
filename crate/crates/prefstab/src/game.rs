//! Finite normal-form games with exact payoffs.

use crate::error::{structural, Error, Result};
use crate::rational::{fmt_q, q_from_json, Q};
use crate::ring::Ring;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_players: usize,
    pub max_actions: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_players: 4,
            max_actions: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Game {
    actions: Vec<Vec<String>>,
    /// `payoffs[i][k]` is player i's payoff at profile index k.
    payoffs: Vec<Vec<Q>>,
    strides: Vec<usize>,
}

impl Game {
    /// `payoffs` is indexed by profile (lexicographic, first player most
    /// significant), then by player.
    pub fn new(actions: Vec<Vec<String>>, payoffs: Vec<Vec<Q>>) -> Result<Game> {
        Self::with_caps(actions, payoffs, Caps::default())
    }

    pub fn with_caps(actions: Vec<Vec<String>>, payoffs: Vec<Vec<Q>>, caps: Caps) -> Result<Game> {
        let n = actions.len();
        if n < 2 {
            return structural("a game needs at least two players");
        }
        if n > caps.max_players {
            return Err(Error::CapExceeded(format!(
                "{n} players exceeds cap {}",
                caps.max_players
            )));
        }
        for (i, a) in actions.iter().enumerate() {
            if a.is_empty() {
                return structural(format!("player {} has no actions", i + 1));
            }
            if a.len() > caps.max_actions {
                return Err(Error::CapExceeded(format!(
                    "player {} has {} actions, cap is {}",
                    i + 1,
                    a.len(),
                    caps.max_actions
                )));
            }
            for (k, l) in a.iter().enumerate() {
                if l.is_empty() || l.contains(',') || l.trim() != l {
                    return structural(format!("invalid action label {l:?}"));
                }
                if a[..k].contains(l) {
                    return structural(format!("duplicate action label {l:?}"));
                }
            }
        }
        let mut strides = vec![1; n];
        for i in (0..n - 1).rev() {
            strides[i] = strides[i + 1] * actions[i + 1].len();
        }
        let total = strides[0] * actions[0].len();
        if payoffs.len() != total {
            return structural(format!(
                "expected {total} payoff vectors, got {}",
                payoffs.len()
            ));
        }
        let mut by_player = vec![Vec::with_capacity(total); n];
        for (k, v) in payoffs.into_iter().enumerate() {
            if v.len() != n {
                return structural(format!("payoff vector {k} has length {}", v.len()));
            }
            for (i, x) in v.into_iter().enumerate() {
                by_player[i].push(x);
            }
        }
        Ok(Game {
            actions,
            payoffs: by_player,
            strides,
        })
    }

    /// Convenience constructor with integer payoffs in lexicographic order.
    pub fn from_ints(actions: &[&[&str]], payoffs: &[&[i64]]) -> Result<Game> {
        let acts = actions
            .iter()
            .map(|a| a.iter().map(|s| s.to_string()).collect())
            .collect();
        let pays = payoffs
            .iter()
            .map(|v| v.iter().map(|&x| crate::rational::q(x)).collect())
            .collect();
        Game::new(acts, pays)
    }

    pub fn n(&self) -> usize {
        self.actions.len()
    }

    pub fn num_actions(&self, i: usize) -> usize {
        self.actions[i].len()
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.actions.iter().map(|a| a.len()).collect()
    }

    pub fn num_profiles(&self) -> usize {
        self.strides[0] * self.actions[0].len()
    }

    pub fn actions(&self) -> &[Vec<String>] {
        &self.actions
    }

    pub fn label(&self, i: usize, a: usize) -> &str {
        &self.actions[i][a]
    }

    pub fn action_index(&self, i: usize, label: &str) -> Option<usize> {
        self.actions[i].iter().position(|l| l == label)
    }

    pub fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn profile(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        for s in &self.strides {
            out.push(idx / s);
            idx %= s;
        }
        out
    }

    pub fn profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_profiles()).map(move |k| self.profile(k))
    }

    pub fn payoff(&self, profile: &[usize], i: usize) -> &Q {
        &self.payoffs[i][self.index(profile)]
    }

    pub fn payoff_vec(&self, profile: &[usize]) -> Vec<Q> {
        let k = self.index(profile);
        self.payoffs.iter().map(|p| p[k].clone()).collect()
    }

    pub fn tensor(&self, i: usize) -> &[Q] {
        &self.payoffs[i]
    }

    pub fn profile_label(&self, profile: &[usize]) -> String {
        profile
            .iter()
            .enumerate()
            .map(|(i, &a)| self.label(i, a))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_profile_label(&self, key: &str) -> Result<Vec<usize>> {
        let parts: Vec<&str> = key.split(',').map(str::trim).collect();
        if parts.len() != self.n() {
            return structural(format!("profile key {key:?} has wrong length"));
        }
        parts
            .iter()
            .enumerate()
            .map(|(i, l)| {
                self.action_index(i, l)
                    .ok_or_else(|| Error::Structural(format!("unknown action {l:?} for player {}", i + 1)))
            })
            .collect()
    }

    pub fn min_payoff(&self) -> Q {
        self.payoffs
            .iter()
            .flatten()
            .min()
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    /// Multilinear extension of `tensor` at independent strategies.
    pub fn multilinear<R: Ring>(&self, tensor: &[Q], strategies: &[Vec<R>]) -> R {
        let mut acc = R::nil();
        self.ml_rec(tensor, strategies, 0, 0, None, &mut acc);
        acc
    }

    fn ml_rec<R: Ring>(
        &self,
        tensor: &[Q],
        st: &[Vec<R>],
        i: usize,
        base: usize,
        w: Option<&R>,
        acc: &mut R,
    ) {
        if i == self.n() {
            let v = &tensor[base];
            if Zero::is_zero(v) {
                return;
            }
            let term = match w {
                Some(w) => w.scale(v),
                None => R::from_q(v),
            };
            *acc = acc.plus(&term);
            return;
        }
        for (a, x) in st[i].iter().enumerate() {
            if x.is_nil() {
                continue;
            }
            let nw = match w {
                Some(w) => w.times(x),
                None => x.clone(),
            };
            self.ml_rec(tensor, st, i + 1, base + a * self.strides[i], Some(&nw), acc);
        }
    }

    pub fn check_profile(&self, profile: &[MixedStrategy]) -> Result<()> {
        if profile.len() != self.n() {
            return structural(format!(
                "profile has {} components, game has {} players",
                profile.len(),
                self.n()
            ));
        }
        for (i, s) in profile.iter().enumerate() {
            if s.len() != self.num_actions(i) {
                return structural(format!(
                    "strategy for player {} has {} weights, expected {}",
                    i + 1,
                    s.len(),
                    self.num_actions(i)
                ));
            }
        }
        Ok(())
    }

    pub fn from_json(v: &Value) -> Result<Game> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Structural("game must be an object".into()))?;
        let actions: Vec<Vec<String>> = serde_json::from_value(
            obj.get("actions")
                .cloned()
                .ok_or_else(|| Error::Structural("missing \"actions\"".into()))?,
        )
        .map_err(|e| Error::Structural(format!("bad \"actions\": {e}")))?;
        if let Some(p) = obj.get("players") {
            if p.as_u64() != Some(actions.len() as u64) {
                return structural("\"players\" does not match the number of action lists");
            }
        }
        let pay = obj
            .get("payoffs")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Structural("missing \"payoffs\" object".into()))?;
        let n = actions.len();
        let total: usize = actions.iter().map(Vec::len).product();
        let mut slots: Vec<Option<Vec<Q>>> = vec![None; total];
        let probe = Game::new(actions.clone(), vec![vec![Q::zero(); n]; total])?;
        for (key, val) in pay {
            let prof = probe.parse_profile_label(key)?;
            let arr = val
                .as_array()
                .ok_or_else(|| Error::Structural(format!("payoff for {key:?} must be an array")))?;
            if arr.len() != n {
                return structural(format!("payoff for {key:?} must have {n} entries"));
            }
            let vals = arr.iter().map(q_from_json).collect::<Result<Vec<_>>>()?;
            let k = probe.index(&prof);
            if slots[k].is_some() {
                return structural(format!("duplicate payoff entry {key:?}"));
            }
            slots[k] = Some(vals);
        }
        let mut payoffs = Vec::with_capacity(total);
        for (k, s) in slots.into_iter().enumerate() {
            match s {
                Some(v) => payoffs.push(v),
                None => {
                    return structural(format!(
                        "missing payoff for profile {}",
                        probe.profile_label(&probe.profile(k))
                    ))
                }
            }
        }
        Game::new(actions, payoffs)
    }

    pub fn to_json(&self) -> Value {
        let mut pay = Map::new();
        for prof in self.profiles() {
            let v: Vec<Value> = self
                .payoff_vec(&prof)
                .iter()
                .map(|x| Value::String(fmt_q(x)))
                .collect();
            pay.insert(self.profile_label(&prof), Value::Array(v));
        }
        json!({"players": self.n(), "actions": self.actions, "payoffs": pay})
    }

    pub fn strategy_from_json(&self, i: usize, v: &Value) -> Result<MixedStrategy> {
        let m = self.num_actions(i);
        match v {
            Value::String(l) => {
                let a = self.action_index(i, l).ok_or_else(|| {
                    Error::Structural(format!("unknown action {l:?} for player {}", i + 1))
                })?;
                Ok(MixedStrategy::pure(a, m))
            }
            Value::Object(o) => {
                let mut w = vec![Q::zero(); m];
                for (l, x) in o {
                    let a = self.action_index(i, l).ok_or_else(|| {
                        Error::Structural(format!("unknown action {l:?} for player {}", i + 1))
                    })?;
                    w[a] = q_from_json(x)?;
                }
                MixedStrategy::new(w)
            }
            other => structural(format!("bad strategy {other}")),
        }
    }

    pub fn strategy_to_json(&self, i: usize, s: &MixedStrategy) -> Value {
        if let Some(a) = s.pure_action() {
            return Value::String(self.label(i, a).to_string());
        }
        let mut o = Map::new();
        for (a, w) in s.weights().iter().enumerate() {
            if !w.is_zero() {
                o.insert(self.label(i, a).to_string(), Value::String(fmt_q(w)));
            }
        }
        Value::Object(o)
    }

    pub fn profile_to_json(&self, p: &[MixedStrategy]) -> Value {
        Value::Array(
            p.iter()
                .enumerate()
                .map(|(i, s)| self.strategy_to_json(i, s))
                .collect(),
        )
    }

    pub fn render_strategy(&self, i: usize, s: &MixedStrategy) -> String {
        match s.pure_action() {
            Some(a) => self.label(i, a).to_string(),
            None => {
                let parts: Vec<String> = s
                    .weights()
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(a, w)| format!("{}:{}", self.label(i, a), fmt_q(w)))
                    .collect();
                format!("({})", parts.join(" "))
            }
        }
    }

    pub fn render_profile(&self, p: &[MixedStrategy]) -> String {
        let parts: Vec<String> = p
            .iter()
            .enumerate()
            .map(|(i, s)| self.render_strategy(i, s))
            .collect();
        format!("({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MixedStrategy(Vec<Q>);

impl MixedStrategy {
    pub fn new(weights: Vec<Q>) -> Result<MixedStrategy> {
        if weights.is_empty() {
            return structural("empty mixed strategy");
        }
        if weights.iter().any(|w| w.is_negative()) {
            return structural("negative probability in mixed strategy");
        }
        let s: Q = weights.iter().sum();
        if !s.is_one() {
            return structural(format!("mixed strategy sums to {}", fmt_q(&s)));
        }
        Ok(MixedStrategy(weights))
    }

    pub fn pure(a: usize, m: usize) -> MixedStrategy {
        let mut w = vec![Q::zero(); m];
        w[a] = Q::one();
        MixedStrategy(w)
    }

    pub fn uniform(m: usize) -> MixedStrategy {
        MixedStrategy(vec![Q::new(1.into(), (m as i64).into()); m])
    }

    pub fn weights(&self) -> &[Q] {
        &self.0
    }

    pub fn weight(&self, a: usize) -> &Q {
        &self.0[a]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&a| !self.0[a].is_zero()).collect()
    }

    pub fn pure_action(&self) -> Option<usize> {
        self.0.iter().position(|w| w.is_one())
    }

    /// `(1-t) self + t other`.
    pub fn mix(&self, other: &MixedStrategy, t: &Q) -> MixedStrategy {
        let s = Q::one() - t;
        MixedStrategy(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a * &s + b * t)
                .collect(),
        )
    }

    pub fn into_ring<R: Ring>(&self) -> Vec<R> {
        self.0.iter().map(R::from_q).collect()
    }
}

pub type MixedProfile = Vec<MixedStrategy>;

pub fn pure_profile(game: &Game, a: &[usize]) -> MixedProfile {
    a.iter()
        .enumerate()
        .map(|(i, &k)| MixedStrategy::pure(k, game.num_actions(i)))
        .collect()
}

pub fn as_pure(profile: &[MixedStrategy]) -> Option<Vec<usize>> {
    profile.iter().map(|s| s.pure_action()).collect()
}

pub fn profile_ring<R: Ring>(profile: &[MixedStrategy]) -> Vec<Vec<R>> {
    profile.iter().map(|s| s.into_ring()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelatedStrategy(Vec<Q>);

impl CorrelatedStrategy {
    pub fn new(game: &Game, weights: Vec<Q>) -> Result<CorrelatedStrategy> {
        if weights.len() != game.num_profiles() {
            return structural("correlated strategy has the wrong number of entries");
        }
        if weights.iter().any(|w| w.is_negative()) {
            return structural("negative probability in correlated strategy");
        }
        let s: Q = weights.iter().sum();
        if !s.is_one() {
            return structural(format!("correlated strategy sums to {}", fmt_q(&s)));
        }
        Ok(CorrelatedStrategy(weights))
    }

    pub fn from_product(game: &Game, profile: &[MixedStrategy]) -> Result<CorrelatedStrategy> {
        game.check_profile(profile)?;
        let w = game
            .profiles()
            .map(|a| {
                a.iter()
                    .enumerate()
                    .map(|(i, &k)| profile[i].weight(k).clone())
                    .product()
            })
            .collect();
        Ok(CorrelatedStrategy(w))
    }

    pub fn weights(&self) -> &[Q] {
        &self.0
    }

    /// Returns the profile index if the distribution is a point mass.
    pub fn point_mass(&self) -> Option<usize> {
        self.0.iter().position(|w| w.is_one())
    }
}

pub fn expected_payoff(game: &Game, profile: &[MixedStrategy]) -> Result<Vec<Q>> {
    game.check_profile(profile)?;
    let st: Vec<Vec<Q>> = profile_ring(profile);
    Ok((0..game.n())
        .map(|i| game.multilinear(game.tensor(i), &st))
        .collect())
}

pub fn expected_payoff_correlated(game: &Game, phi: &CorrelatedStrategy) -> Result<Vec<Q>> {
    if phi.0.len() != game.num_profiles() {
        return structural("correlated strategy does not match the game");
    }
    Ok((0..game.n())
        .map(|i| {
            game.tensor(i)
                .iter()
                .zip(&phi.0)
                .map(|(v, w)| v * w)
                .sum()
        })
        .collect())
}

pub fn coalition_payoff_sum(game: &Game, coalition: &[usize], profile: &[MixedStrategy]) -> Result<Q> {
    if coalition.is_empty() {
        return structural("coalition must be nonempty");
    }
    if coalition.iter().any(|&j| j >= game.n()) {
        return structural("coalition member out of range");
    }
    let v = expected_payoff(game, profile)?;
    Ok(coalition.iter().map(|&j| v[j].clone()).sum())
}

/// All nonempty subsets of `0..n` as sorted vectors, by size then lexicographically.
pub fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|m| (0..n).filter(|&i| m & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Iterates over the cross product of `0..dims[k]`.
pub fn cartesian(dims: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &d in dims {
        let mut next = Vec::with_capacity(out.len() * d);
        for prefix in &out {
            for k in 0..d {
                let mut p = prefix.clone();
                p.push(k);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Mixed strategies on `m` actions with weights in multiples of `1/res`.
pub fn grid_strategies(m: usize, res: usize) -> Vec<MixedStrategy> {
    fn rec(m: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<MixedStrategy>) {
        if cur.len() == m - 1 {
            cur.push(left);
            out.push(MixedStrategy(
                cur.iter()
                    .map(|&k| Q::new((k as i64).into(), (res as i64).into()))
                    .collect(),
            ));
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(m, left - k, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, res, res, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    fn bos() -> Game {
        Game::from_ints(
            &[&["Faithful", "Philandering"], &["Coy", "Fast"]],
            &[&[2, 2], &[5, 5], &[0, 0], &[15, -5]],
        )
        .unwrap()
    }

    #[test]
    fn pure_payoff_lookup() {
        let g = bos();
        let p = pure_profile(&g, &[0, 1]);
        assert_eq!(expected_payoff(&g, &p).unwrap(), vec![q(5), q(5)]);
    }

    #[test]
    fn json_round_trip() {
        let g = bos();
        let s = serde_json::to_string(&g.to_json()).unwrap();
        let g2 = Game::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(g, g2);
        assert_eq!(s, serde_json::to_string(&g2.to_json()).unwrap());
    }

    #[test]
    fn missing_entry_rejected() {
        let v = serde_json::json!({"players": 2, "actions": [["a"], ["b", "c"]], "payoffs": {"a,b": ["1", "1"]}});
        assert!(matches!(Game::from_json(&v), Err(Error::Structural(_))));
    }

    #[test]
    fn caps_enforced() {
        let acts = vec![vec!["a".to_string(); 1]; 5];
        let r = Game::new(acts, vec![vec![Q::zero(); 5]]);
        assert!(matches!(r, Err(Error::CapExceeded(_))));
    }

    #[test]
    fn dimension_mismatch() {
        let g = bos();
        let p = vec![MixedStrategy::pure(0, 2)];
        assert!(expected_payoff(&g, &p).is_err());
        assert!(coalition_payoff_sum(&g, &[], &pure_profile(&g, &[0, 0])).is_err());
    }

    #[test]
    fn grid_counts() {
        assert_eq!(grid_strategies(2, 10).len(), 11);
        assert_eq!(grid_strategies(3, 2).len(), 6);
        assert_eq!(grid_strategies(3, 2)[0].weights(), &[q(1), q(0), q(0)]);
        let m = MixedStrategy::pure(0, 2).mix(&MixedStrategy::pure(1, 2), &qr(1, 4));
        assert_eq!(m.weights(), &[qr(3, 4), qr(1, 4)]);
    }

    #[test]
    fn subsets_order() {
        assert_eq!(
            nonempty_subsets(3),
            vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2], vec![0, 1, 2]]
        );
    }
}
