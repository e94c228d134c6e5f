#![allow(dead_code)]

use num_traits::{One, Signed, Zero};
use prefstab::config::{
    aggregate_strategies, average_fitness, fitness_p0, fitness_p1, fitness_partial, is_balanced, status_weight,
    validate_configuration, Configuration, MutantSubProfile, Population, PreferenceDistribution, PreferenceType, Regime,
};
use prefstab::corpus;
use prefstab::game::{
    cartesian, expected_payoff, expected_payoff_correlated, nonempty_subsets, pure_profile, CorrelatedStrategy, Game,
    MixedProfile, MixedStrategy,
};
use prefstab::poly::{Poly, Var};
use prefstab::rational::{pow, q, qr, Q};
use prefstab::ring::Ring;
use prefstab::stability::{
    check_stability, find_invader, post_entry_configuration, verify_certificate, InvaderCertificate, StabilityOptions,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub fn random_q(rng: &mut StdRng) -> Q {
    qr(rng.gen_range(-24..=24), rng.gen_range(1..=12))
}

pub fn random_game(rng: &mut StdRng, n: usize, max_actions: usize) -> Game {
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=max_actions)).collect();
    let actions = counts
        .iter()
        .enumerate()
        .map(|(i, &m)| (0..m).map(|a| format!("a{}{}", i + 1, a + 1)).collect())
        .collect();
    let total: usize = counts.iter().product();
    let payoffs = (0..total).map(|_| (0..n).map(|_| random_q(rng)).collect()).collect();
    Game::new(actions, payoffs).unwrap()
}

pub fn random_strategy(rng: &mut StdRng, m: usize) -> MixedStrategy {
    loop {
        let w: Vec<i64> = (0..m).map(|_| rng.gen_range(0..=6)).collect();
        let s: i64 = w.iter().sum();
        if s > 0 {
            return MixedStrategy::new(w.iter().map(|&x| qr(x, s)).collect()).unwrap();
        }
    }
}

pub fn random_profile(rng: &mut StdRng, g: &Game) -> MixedProfile {
    (0..g.n()).map(|i| random_strategy(rng, g.num_actions(i))).collect()
}

/// Expected payoff by summing over every pure profile.
pub fn brute_payoff(g: &Game, prof: &[MixedStrategy], i: usize) -> Q {
    g.profiles()
        .map(|a| {
            let w: Q = a.iter().enumerate().map(|(j, &k)| prof[j].weight(k).clone()).product();
            w * g.payoff(&a, i)
        })
        .sum()
}

pub fn multilinear_case(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(2..=3);
    let g = random_game(&mut rng, n, 3);
    let prof = random_profile(&mut rng, &g);
    let v = expected_payoff(&g, &prof).unwrap();
    let phi = CorrelatedStrategy::from_product(&g, &prof).unwrap();
    ensure!(v == expected_payoff_correlated(&g, &phi).unwrap(), "product and correlated payoffs differ");
    for (i, vi) in v.iter().enumerate() {
        ensure!(*vi == brute_payoff(&g, &prof, i), "payoff of player {i} differs from the direct sum");
    }
    let a: Vec<usize> = (0..n).map(|i| rng.gen_range(0..g.num_actions(i))).collect();
    ensure!(expected_payoff(&g, &pure_profile(&g, &a)).unwrap() == g.payoff_vec(&a), "pure profile payoff");
    let j = rng.gen_range(0..n);
    let other = random_strategy(&mut rng, g.num_actions(j));
    let t = qr(rng.gen_range(0..=7), 7);
    let mut mixed = prof.clone();
    mixed[j] = prof[j].mix(&other, &t);
    let mut alt = prof.clone();
    alt[j] = other;
    let lhs = expected_payoff(&g, &mixed).unwrap();
    let va = expected_payoff(&g, &alt).unwrap();
    for i in 0..n {
        ensure!(lhs[i] == (Q::one() - &t) * &v[i] + &t * &va[i], "payoff is not linear in player {j}'s strategy");
    }
    Ok(())
}

/// Balanced unobserved configuration: every population has indifferent
/// types mixing over its first two actions, and each player's payoffs are
/// shifted so those two actions earn the same against the others.
pub fn balanced_p0(rng: &mut StdRng) -> Configuration {
    let n = rng.gen_range(2..=3);
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
    let actions: Vec<Vec<String>> = counts
        .iter()
        .enumerate()
        .map(|(i, &m)| (0..m).map(|a| format!("a{}{}", i + 1, a + 1)).collect())
        .collect();
    let total: usize = counts.iter().product();
    let mut payoffs: Vec<Vec<Q>> = (0..total).map(|_| (0..n).map(|_| random_q(rng)).collect()).collect();
    let shape = Game::new(actions.clone(), payoffs.clone()).unwrap();
    let mut shares = Vec::new();
    let mut strategies = Vec::new();
    for &m in &counts {
        let k = rng.gen_range(1..=3);
        let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
        let s: i64 = raw.iter().sum();
        shares.push(raw.iter().map(|&x| qr(x, s)).collect::<Vec<Q>>());
        strategies.push(
            (0..k)
                .map(|_| {
                    let w = qr(rng.gen_range(0..=4), 4);
                    let mut v = vec![Q::zero(); m];
                    v[1] = Q::one() - &w;
                    v[0] = w;
                    MixedStrategy::new(v).unwrap()
                })
                .collect::<Vec<_>>(),
        );
    }
    let x = aggregate_strategies(&shares, &strategies);
    for i in 0..n {
        let value = |pay: &Vec<Vec<Q>>, a: usize| -> Q {
            shape
                .profiles()
                .filter(|p| p[i] == a)
                .map(|p| {
                    let w: Q = (0..n).filter(|&j| j != i).map(|j| x[j][p[j]].clone()).product();
                    w * &pay[shape.index(&p)][i]
                })
                .sum()
        };
        let gap = value(&payoffs, 0) - value(&payoffs, 1);
        for p in shape.profiles().filter(|p| p[i] == 1) {
            payoffs[shape.index(&p)][i] += &gap;
        }
    }
    let g = Game::new(actions, payoffs).unwrap();
    let pops = (0..n)
        .map(|i| Population {
            types: (0..shares[i].len()).map(|k| PreferenceType::indifferent_at(&g, i, q(k as i64))).collect(),
            shares: shares[i].clone(),
        })
        .collect();
    let mu = PreferenceDistribution::new(&g, pops).unwrap();
    Configuration::new(g, mu, Regime::P0 { s: strategies }).unwrap()
}

pub fn balanced_p0_case(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let c = balanced_p0(&mut rng);
    ensure!(validate_configuration(&c).ok, "generated configuration is not an equilibrium");
    ensure!(is_balanced(&c), "generated configuration is not balanced");
    let x: MixedProfile = aggregate_strategies(&c.mu.shares(), c.regime.s().unwrap())
        .into_iter()
        .map(|w| MixedStrategy::new(w).unwrap())
        .collect();
    for i in 0..c.n() {
        let target = brute_payoff(&c.game, &x, i);
        for t in 0..c.mu.populations[i].types.len() {
            let f = average_fitness(&c, i, t).unwrap();
            ensure!(f == target, "population {i} type {t}: fitness {f} but aggregate payoff {target}");
        }
    }
    Ok(())
}

pub fn status_weight_case(p: &Q) -> Check {
    for n in 1..=3usize {
        let total: Q = cartesian(&vec![2; n]).iter().map(|t| status_weight(p, n, t.iter().sum())).sum();
        ensure!(total.is_one(), "weights sum to {total} at p = {p}, n = {n}");
        let binomial: Q = (0..=n)
            .map(|k| {
                let c = (0..k).fold(Q::one(), |acc, j| acc * q((n - j) as i64) / q(j as i64 + 1));
                c * pow(p, n - k) * pow(&(Q::one() - p), k)
            })
            .sum();
        ensure!(binomial.is_one(), "binomial expansion sums to {binomial}");
    }
    Ok(())
}

/// Every certificate the built-in scenarios produce, from the full check and
/// from each single-coalition search.
pub fn corpus_certificates() -> Vec<(Configuration, InvaderCertificate)> {
    let opts = StabilityOptions::default();
    let mut configs: Vec<Configuration> = corpus::SCENARIOS.iter().map(|(n, _)| corpus::load(n)).collect();
    let pd = corpus::load("ex6_pd");
    for p in [qr(1, 100), qr(1, 2), qr(99, 100)] {
        configs.push(pd.with_observability(&p).unwrap());
    }
    let mut out = Vec::new();
    for c in configs {
        if let Some(cert) = check_stability(&c, &opts).unwrap().certificate() {
            out.push((c.clone(), cert.clone()));
        }
        for j in nonempty_subsets(c.n()) {
            if let Ok(Some(cert)) = find_invader(&c, &j, &opts) {
                out.push((c.clone(), cert));
            }
        }
    }
    out
}

pub fn certificate_case(c: &Configuration, cert: &InvaderCertificate) -> Check {
    verify_certificate(c, cert).map_err(|e| e.to_string())?;
    let top = cert.region.t_upper.clone();
    for d in [2, 3, 7] {
        let t = &top / q(d);
        let mutants =
            MutantSubProfile::new(cert.coalition.clone(), cert.mutant_types.clone(), vec![t.clone(); cert.coalition.len()])
                .unwrap();
        let post = post_entry_configuration(c, &mutants, &cert.assignment).unwrap();
        ensure!(validate_configuration(&post).ok, "{}: not an equilibrium at t = {t}", cert.route);
        let at: BTreeMap<Var, Q> = (0..c.n()).map(|j| (Var::Eps(j), t.clone())).collect();
        for diff in &cert.diffs {
            let i = diff.population;
            let mutant = c.mu.populations[i].types.len();
            let direct =
                average_fitness(&post, i, mutant).unwrap() - average_fitness(&post, i, diff.incumbent).unwrap();
            ensure!(diff.poly.eval(&at).unwrap() == direct, "{}: population {i} disagrees at t = {t}", cert.route);
            ensure!(!direct.is_negative(), "{}: mutants lose in population {i}", cert.route);
        }
    }
    Ok(())
}


fn symbolic_shares(rng: &mut StdRng, counts: &[usize]) -> Vec<Vec<Poly>> {
    counts
        .iter()
        .enumerate()
        .map(|(j, &k)| match k {
            1 => vec![Poly::unit()],
            2 => vec![Poly::unit().minus(&Poly::eps(j)), Poly::eps(j)],
            _ => {
                let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
                let s: i64 = raw.iter().sum();
                raw.iter().map(|&x| Poly::constant(qr(x, s))).collect()
            }
        })
        .collect()
}

pub fn partial_extremes_case(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(2..=3);
    let g = random_game(&mut rng, n, 2);
    let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    let shares = symbolic_shares(&mut rng, &counts);
    let b: BTreeMap<Vec<usize>, MixedProfile> =
        cartesian(&counts).into_iter().map(|th| (th, random_profile(&mut rng, &g))).collect();
    let s: Vec<Vec<MixedStrategy>> = (0..n)
        .map(|i| (0..counts[i]).map(|_| random_strategy(&mut rng, g.num_actions(i))).collect())
        .collect();
    for i in 0..n {
        for t in 0..counts[i] {
            let f = fitness_partial(&g, &shares, &b, &s, &Poly::p(), i, t);
            ensure!(f.substitute_q(Var::P, &Q::one()) == fitness_p1(&g, &shares, &b, i, t), "p = 1 differs");
            ensure!(f.substitute_q(Var::P, &Q::zero()) == fitness_p0(&g, &shares, &s, i, t), "p = 0 differs");
        }
    }
    Ok(())
}
