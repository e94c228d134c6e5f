//! Built-in example scenarios and the numeric facts they must reproduce.

use crate::config::{average_fitness, validate_configuration, Configuration, MutantSubProfile, PreferenceType};
use crate::dynamics::{simulate, ReplicatorRule};
use crate::efficiency::{efficiency_status, Dominance, EfficiencyStatus};
use crate::equilibrium::{is_aggregate_strong_nash_pure, is_strict_nash_pure, is_strictly_strong_nash, Tri};
use crate::game::{cartesian, pure_profile, Game, MixedProfile, MixedStrategy};
use crate::poly::UPoly;
use crate::rational::{fmt_q, q, qr, Q};
use crate::scenario;
use crate::stability::{
    check_stability, find_invader, fitness_diff_polynomials, nearby_equilibrium, observability_thresholds,
    post_entry_configuration, uniform_invasion_barrier, verify_certificate, MutantAssignment, NearbyOutcome,
    StabilityOptions, StabilityVerdict,
};
use num_traits::{One, Signed, Zero};

pub const SCENARIOS: &[(&str, &str)] = &[
    ("ex1_battle_of_sexes", include_str!("../scenarios/ex1_battle_of_sexes.json")),
    ("ex2_coordination_a11a21", include_str!("../scenarios/ex2_coordination_a11a21.json")),
    ("ex2_coordination_a12a22", include_str!("../scenarios/ex2_coordination_a12a22.json")),
    ("ex3_three_player", include_str!("../scenarios/ex3_three_player.json")),
    ("ex4_three_player", include_str!("../scenarios/ex4_three_player.json")),
    ("ex5_p0", include_str!("../scenarios/ex5_p0.json")),
    ("ex6_pd", include_str!("../scenarios/ex6_pd.json")),
    ("nongeneric_materialist", include_str!("../scenarios/nongeneric_materialist.json")),
    ("nongeneric_dominant", include_str!("../scenarios/nongeneric_dominant.json")),
];

pub fn load(name: &str) -> Configuration {
    let text = SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .unwrap_or_else(|| panic!("no built-in scenario {name}"))
        .1;
    scenario::parse(text).expect("built-in scenario is valid")
}

#[derive(Debug, Clone)]
pub struct Check {
    pub example: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn expect(cond: bool, ok: impl Into<String>, bad: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(bad.into())
    }
}

fn verdict_name(v: &StabilityVerdict) -> String {
    match v {
        StabilityVerdict::Stable(r) => format!("stable via {}", r.name),
        StabilityVerdict::Unstable(_) => match v.certificate() {
            Some(c) => format!("unstable via {}", c.route),
            None => "unstable (unbalanced)".into(),
        },
        StabilityVerdict::Unknown { reason, .. } => format!("unknown ({})", reason.name()),
    }
}

/// Assignment for monomorphic populations where every coalition member
/// mutates: `by_movers` maps the set of mutants in a match to its profile.
pub fn monomorphic_assignment(game: &Game, by_movers: &dyn Fn(&[usize]) -> Vec<usize>) -> MutantAssignment {
    let n = game.n();
    let mut a = MutantAssignment::default();
    for th in cartesian(&vec![2; n]) {
        let movers: Vec<usize> = (0..n).filter(|&i| th[i] == 1).collect();
        if movers.is_empty() {
            continue;
        }
        a.b.insert(th, pure_profile(game, &by_movers(&movers)));
    }
    a
}

pub fn indifferent_mutants(config: &Configuration, coalition: &[usize], share: Q) -> MutantSubProfile {
    let types = coalition
        .iter()
        .map(|&j| crate::stability::fresh_indifferent(config, j))
        .collect();
    MutantSubProfile::new(coalition.to_vec(), types, vec![share; coalition.len()]).expect("valid mutants")
}

/// Assignment listed for the three-player example with bilateral deviations.
pub fn ex3_assignment(game: &Game) -> MutantAssignment {
    monomorphic_assignment(game, &|m: &[usize]| match m {
        [0, 1] => vec![1, 1, 0],
        [0, 2] => vec![2, 0, 1],
        [1, 2] => vec![0, 2, 2],
        _ => vec![0, 0, 0],
    })
}

/// Assignment listed for the three-player example where every deviation hurts the deviants.
pub fn ex4_assignment(game: &Game) -> MutantAssignment {
    monomorphic_assignment(game, &|m: &[usize]| match m {
        [0, 1] => vec![0, 1, 0],
        [0, 2] => vec![1, 0, 0],
        [1, 2] => vec![0, 0, 1],
        _ => vec![0, 0, 0],
    })
}

fn diagonal_all_equal(config: &Configuration, a: &MutantAssignment, expected: &UPoly) -> Outcome {
    let mutants = indifferent_mutants(config, &[0, 1, 2], qr(1, 100));
    let diffs = fitness_diff_polynomials(config, &mutants, a).map_err(|e| e.to_string())?;
    let texts: Vec<String> = diffs.iter().map(|d| d.poly.to_string()).collect();
    let ok = diffs.iter().all(|d| d.poly.diagonal().as_ref() == Some(expected));
    expect(ok, format!("differences {texts:?}"), format!("differences {texts:?}"))
}

fn upoly(c: &[i64]) -> UPoly {
    UPoly::new(c.iter().map(|&x| q(x)).collect())
}

fn stability(config: &Configuration) -> std::result::Result<StabilityVerdict, String> {
    check_stability(config, &StabilityOptions::default()).map_err(|e| e.to_string())
}

fn certificate_checks(config: &Configuration, v: &StabilityVerdict) -> Outcome {
    match v.certificate() {
        Some(c) => verify_certificate(config, c)
            .map(|_| "certificate re-verified at three sample shares".to_string())
            .map_err(|e| e.to_string()),
        None => Err(format!("expected a certificate, got {}", verdict_name(v))),
    }
}

fn ex1() -> Vec<(&'static str, Outcome)> {
    let c = load("ex1_battle_of_sexes");
    let g = &c.game;
    let mut out = Vec::new();
    let f: Vec<Q> = (0..2).map(|i| average_fitness(&c, i, 0).unwrap()).collect();
    out.push((
        "validates with incumbent fitness 5",
        expect(validate_configuration(&c).ok && f == vec![q(5), q(5)], "fitness 5, 5", format!("fitness {f:?}")),
    ));
    let v = stability(&c);
    out.push((
        "stable with a uniform barrier of at least 3/18",
        match &v {
            Ok(v) => {
                let b = uniform_invasion_barrier(v);
                expect(
                    b.as_ref().is_some_and(|b| b >= &qr(3, 18)),
                    format!("{}, barrier {}", verdict_name(v), b.as_ref().map(fmt_q).unwrap_or_default()),
                    verdict_name(v),
                )
            }
            Err(e) => Err(e.clone()),
        },
    ));
    // Incumbent male: at least 5 against incumbent females, at least the
    // smallest payoff against mutants. Mutant male mixing q on Faithful: the
    // incumbent female replies Coy unless q = 1.
    let lo = g.profiles().map(|p| g.payoff(&p, 0).clone()).min().unwrap();
    let hi = g.profiles().map(|p| g.payoff(&p, 0).clone()).max().unwrap();
    let mut bad = Vec::new();
    for k in 0..10 {
        let q1 = qr(k, 10);
        let x = MixedStrategy::new(vec![q1.clone(), Q::one() - &q1]).unwrap();
        let female = &c.mu.populations[1].types[0].utilities;
        let vals: Vec<Q> = (0..2)
            .map(|y| (0..2).map(|a| x.weight(a) * &female[g.index(&[a, y])]).sum())
            .collect();
        let best = vals.iter().max().unwrap().clone();
        let mutant_vs_incumbent = (0..2)
            .filter(|&y| vals[y] == best)
            .map(|y| (0..2).map(|a| x.weight(a) * g.payoff(&[a, y], 0)).sum::<Q>())
            .max()
            .unwrap();
        // (5 - m)(1 - e) + lo e - m (1 - e) - hi e > 0 on (0, 3/18]
        let five = average_fitness(&c, 0, 0).unwrap();
        let gap = UPoly::new(vec![
            &five - &mutant_vs_incumbent,
            -(&five - &mutant_vs_incumbent) + &lo - &hi,
        ]);
        let edge = qr(3, 18);
        if !(gap.eval(&Q::zero()).is_positive() && !gap.eval(&edge).is_negative() && gap.roots_in(&Q::zero(), &edge).is_empty()) {
            bad.push(fmt_q(&q1));
        }
        if mutant_vs_incumbent != &q(2) * &q1 {
            bad.push(format!("reply payoff at {}", fmt_q(&q1)));
        }
    }
    out.push((
        "bounds 5(1-e2) and 2q1(1-e2)+15e2 separate below 3/18",
        expect(bad.is_empty() && lo.is_zero() && hi == q(15), "holds for q1 in {0, 1/10, ..., 9/10}", format!("fails at {bad:?}")),
    ));
    out
}

fn ex2() -> Vec<(&'static str, Outcome)> {
    let lo = load("ex2_coordination_a11a21");
    let hi = load("ex2_coordination_a12a22");
    let g = &lo.game;
    let mut out = Vec::new();
    out.push(("(a11,a21) is a strict Nash equilibrium", expect(is_strict_nash_pure(g, &[0, 0]), "strict", "not strict")));
    let st = efficiency_status(g, &pure_profile(g, &[0, 0]), 10);
    out.push((
        "(a11,a21) is weakly efficient and weakly dominated by (a12,a22)",
        match st {
            Ok(EfficiencyStatus::Dominated { certificate, relation: Dominance::Weak, weakly_efficient: Tri::Yes }) => expect(
                certificate == pure_profile(g, &[1, 1]),
                "dominated weakly by (a12,a22)",
                format!("dominator {}", g.render_profile(&certificate)),
            ),
            other => Err(format!("{other:?}")),
        },
    ));
    let inv = find_invader(&lo, &[0, 1], &StabilityOptions::default());
    out.push((
        "invaders of (a11,a21) coordinate on (a12,a22)",
        match inv {
            Ok(Some(c)) => {
                let both = c.assignment.b.get(&vec![1, 1]).cloned();
                expect(
                    both == Some(pure_profile(g, &[1, 1])) && verify_certificate(&lo, &c).is_ok(),
                    format!("certificate via {}", c.route),
                    "unexpected certificate",
                )
            }
            Ok(None) => Err("no certificate".into()),
            Err(e) => Err(e.to_string()),
        },
    ));
    out.push((
        "(a12,a22) is an aggregate strong equilibrium",
        expect(is_aggregate_strong_nash_pure(g, &[1, 1]), "yes", "no"),
    ));
    let mut verdicts = Vec::new();
    let mut all = true;
    for p in [q(1), qr(1, 10), qr(1, 2), qr(9, 10)] {
        let v = hi.with_observability(&p).map_err(|e| e.to_string()).and_then(|c| stability(&c));
        let s = v.as_ref().map(verdict_name).unwrap_or_else(|e| e.clone());
        all &= matches!(v, Ok(StabilityVerdict::Stable(_)));
        verdicts.push(format!("p={}: {s}", fmt_q(&p)));
    }
    out.push(("(a12,a22) is stable at p = 1, 1/10, 1/2, 9/10", expect(all, verdicts.join("; "), verdicts.join("; "))));
    out.push((
        "no strict dominator of (a11,a21) for observability thresholds",
        match observability_thresholds(g, &[0, 0], &pure_profile(g, &[1, 1])) {
            Err(e) => Ok(e.to_string()),
            Ok(t) => Err(format!("unexpected thresholds {t:?}")),
        },
    ));
    out
}

fn ex3() -> Vec<(&'static str, Outcome)> {
    let c = load("ex3_three_player");
    let mut out = Vec::new();
    let v = stability(&c);
    out.push((
        "unstable at full observability",
        v.as_ref().map_err(|e| e.clone()).and_then(|v| certificate_checks(&c, v)),
    ));
    out.push(("listed assignment gives 7t^2 on the diagonal", diagonal_all_equal(&c, &ex3_assignment(&c.game), &upoly(&[0, 0, 7]))));
    out
}

fn ex4() -> Vec<(&'static str, Outcome)> {
    let c = load("ex4_three_player");
    let g = &c.game;
    let mut out = Vec::new();
    let v = stability(&c);
    out.push((
        "unstable at full observability",
        v.as_ref().map_err(|e| e.clone()).and_then(|v| certificate_checks(&c, v)),
    ));
    out.push(("listed assignment gives t + 6t^2 on the diagonal", diagonal_all_equal(&c, &ex4_assignment(g), &upoly(&[0, 1, 6]))));
    let star = [0usize, 0, 0];
    let mut bad = Vec::new();
    for a in g.profiles() {
        for i in 0..3 {
            if a[i] != star[i] && g.payoff(&a, i) >= g.payoff(&star, i) {
                bad.push(g.profile_label(&a));
            }
        }
    }
    out.push(("every deviation lowers every deviant's payoff", expect(bad.is_empty(), "exhaustive over pure profiles", format!("{bad:?}"))));
    out.push((
        "strictly strong check is not contradicted",
        match is_strictly_strong_nash(g, &pure_profile(g, &star), 10) {
            Ok(Tri::No) => Err("reported a profitable coalition deviation".into()),
            Ok(t) => Ok(format!("{t:?}")),
            Err(e) => Err(e.to_string()),
        },
    ));
    out
}

/// Incumbent weight on the first action after rebalancing.
pub fn ex5_closed_form(e: &Q, x: &MixedStrategy) -> Q {
    (Q::one() - e * (Q::one() + x.weight(0) - x.weight(1))) / (q(2) * (Q::one() - e))
}

fn ex5() -> Vec<(&'static str, Outcome)> {
    let c = load("ex5_p0");
    let g = &c.game;
    let mut out = Vec::new();
    out.push(("half-half strategies are an equilibrium", expect(validate_configuration(&c).ok, "valid", "invalid")));
    let samples = [
        vec![qr(1, 1), q(0), q(0)],
        vec![q(0), q(0), q(1)],
        vec![qr(1, 3), qr(1, 3), qr(1, 3)],
        vec![qr(1, 10), qr(3, 5), qr(3, 10)],
    ];
    let mut bad = Vec::new();
    for e in [qr(1, 10), qr(1, 4)] {
        for w in &samples {
            let x = MixedStrategy::new(w.clone()).unwrap();
            let mutants = MutantSubProfile::new(
                vec![0, 1],
                vec![PreferenceType::indifferent(g, 0), PreferenceType::indifferent(g, 1)],
                vec![e.clone(), e.clone()],
            )
            .unwrap();
            match nearby_equilibrium(&c, &mutants, &[x.clone(), x.clone()], &q(1)) {
                Ok(NearbyOutcome::Found(n)) => {
                    for i in 0..2 {
                        if n.incumbents[i].weight(0) != &ex5_closed_form(&e, &x) {
                            bad.push(format!("e={} q={:?}", fmt_q(&e), w.iter().map(fmt_q).collect::<Vec<_>>()));
                        }
                    }
                }
                other => bad.push(format!("{other:?}")),
            }
        }
    }
    out.push(("rebalanced weights match (1 - e(1+q1-q2)) / (2(1-e))", expect(bad.is_empty(), "eps in {1/10, 1/4}, four mutant strategies", format!("{bad:?}"))));
    // With incumbents rebalanced, the aggregate is ((1-e q3)/2, (1-e q3)/2, e q3).
    let mut bad = Vec::new();
    for (e, strict) in [(qr(1, 10), true), (qr(1, 6), true), (qr(19, 100), true), (qr(1, 5), false)] {
        let x = MixedStrategy::new(vec![q(0), q(0), q(1)]).unwrap();
        let mutants = indifferent_mutants(&c, &[0, 1], e.clone());
        if let Ok(NearbyOutcome::Found(n)) = nearby_equilibrium(&c, &mutants, &[x.clone(), x], &q(1)) {
            let agg = crate::config::aggregate_outcome(&n.configuration).product.unwrap();
            let val = |a: usize| -> Q { (0..3).map(|b| agg[1].weight(b) * g.payoff(&[a, b], 0)).sum() };
            let margin = val(0) - val(2);
            let closed = (Q::one() - q(5) * &e) / q(2);
            if margin != closed || margin.is_positive() != strict {
                bad.push(fmt_q(&e));
            }
        } else {
            bad.push(format!("no nearby equilibrium at {}", fmt_q(&e)));
        }
    }
    out.push(("a_i3 is strictly inferior exactly while eps < 1/5", expect(bad.is_empty(), "margin (1 - 5 e q3)/2 at q3 = 1", format!("{bad:?}"))));
    let (dey, assign) = ex5_divergent(&c);
    let mut bad = Vec::new();
    for i in 0..2 {
        let before = &c.regime.s().expect("unobserved strategies")[i][0];
        let after = &assign.incumbent_s[&(i, 0)];
        let d: Q = (0..3).map(|a| (before.weight(a) - after.weight(a)) * (before.weight(a) - after.weight(a))).sum();
        if d != qr(1, 2) {
            bad.push(format!("squared distance {}", fmt_q(&d)));
        }
    }
    for e in [qr(1, 10), qr(1, 3), qr(1, 2), qr(9, 10)] {
        let m = MutantSubProfile::new(vec![0, 1], dey.clone(), vec![e.clone(), e.clone()]).unwrap();
        match post_entry_configuration(&c, &m, &assign) {
            Ok(post) => {
                let ok = validate_configuration(&post).ok
                    && (0..2).all(|i| average_fitness(&post, i, 1).unwrap() > average_fitness(&post, i, 0).unwrap());
                if !ok {
                    bad.push(fmt_q(&e));
                }
            }
            Err(err) => bad.push(err.to_string()),
        }
    }
    out.push((
        "divergent equilibrium is valid and favours mutants for every share",
        expect(bad.is_empty(), "incumbents on a_i1, mutants half on a_i1 and a_i3; squared distance 1/2", format!("{bad:?}")),
    ));
    out
}

/// Mutant types and strategies of the equilibrium far from the incumbents'.
pub fn ex5_divergent(c: &Configuration) -> (Vec<PreferenceType>, MutantAssignment) {
    let g = &c.game;
    let mut types = Vec::new();
    for i in 0..2 {
        let mut u = vec![Q::zero(); g.num_profiles()];
        for p in [[0, 0], [0, 2], [2, 0], [2, 2]] {
            u[g.index(&p)] = q(1);
        }
        u[g.index(&[1, 1])] = q(2);
        types.push(PreferenceType::new(g, i, u, vec![]).unwrap());
    }
    let mut a = MutantAssignment::default();
    for i in 0..2 {
        a.s.insert(i, MixedStrategy::new(vec![qr(1, 2), q(0), qr(1, 2)]).unwrap());
        a.incumbent_s.insert((i, 0), MixedStrategy::pure(0, 3));
    }
    (types, a)
}

fn ex6() -> Vec<(&'static str, Outcome)> {
    let base = load("ex6_pd");
    let g = &base.game;
    let mut out = Vec::new();
    let p0 = base.with_observability(&q(0)).unwrap();
    out.push((
        "stable without observability",
        match stability(&p0) {
            Ok(v @ StabilityVerdict::Stable(_)) => Ok(verdict_name(&v)),
            Ok(v) => Err(verdict_name(&v)),
            Err(e) => Err(e),
        },
    ));
    let mut bad = Vec::new();
    for p in [qr(1, 100), qr(1, 2), qr(99, 100)] {
        let c = base.with_observability(&p).unwrap();
        match stability(&c) {
            Ok(v) => match v.certificate() {
                Some(cert) => {
                    let want = UPoly::new(vec![Q::zero(), p.clone()]);
                    if !cert.diffs.iter().all(|d| d.poly.diagonal().as_ref() == Some(&want)) || verify_certificate(&c, cert).is_err() {
                        bad.push(fmt_q(&p));
                    }
                }
                None => bad.push(format!("{} at {}", verdict_name(&v), fmt_q(&p))),
            },
            Err(e) => bad.push(e),
        }
    }
    out.push(("unstable with advantage eps p at p = 1/100, 1/2, 99/100", expect(bad.is_empty(), "advantage eps p", format!("{bad:?}"))));
    out.push((
        "upper observability threshold is 0",
        match observability_thresholds(g, &[1, 1], &pure_profile(g, &[0, 0])) {
            Ok(t) => expect(t.p_bar_high.is_zero(), "p_bar_high = 0", format!("p_bar_high = {}", fmt_q(&t.p_bar_high))),
            Err(e) => Err(e.to_string()),
        },
    ));
    let (grow, flat) = ex6_dynamics(&base);
    out.push(("handshake mutants grow for 100 steps", grow));
    out.push(("mimicking mutants keep their share for 100 steps", flat));
    out
}

/// Handshake assignment for two populations at a pure outcome `a`.
pub fn handshake_assignment(game: &Game, a: &[usize], sigma: &[usize]) -> MutantAssignment {
    let mut m = monomorphic_assignment(game, &|movers: &[usize]| if movers.len() == 2 { sigma.to_vec() } else { a.to_vec() });
    for i in 0..2 {
        m.s.insert(i, MixedStrategy::pure(a[i], game.num_actions(i)));
    }
    m
}

fn ex6_dynamics(base: &Configuration) -> (Outcome, Outcome) {
    let g = &base.game;
    let c = base.with_observability(&qr(1, 2)).unwrap();
    let mutants = indifferent_mutants(&c, &[0, 1], qr(1, 100));
    let rule = ReplicatorRule::for_config(&c);
    let run = |a: &MutantAssignment| -> std::result::Result<Vec<Vec<Q>>, String> {
        let post = post_entry_configuration(&c, &mutants, a).map_err(|e| e.to_string())?;
        if !validate_configuration(&post).ok {
            return Err("assignment is not an equilibrium".into());
        }
        let traj = simulate(&post, 100, &rule).map_err(|e| e.to_string())?;
        Ok(traj.iter().map(|p| vec![p.shares[0][1].clone(), p.shares[1][1].clone()]).collect())
    };
    let grow = run(&handshake_assignment(g, &[1, 1], &[0, 0])).and_then(|s| {
        let ok = s.windows(2).all(|w| w[1][0] > w[0][0] && w[1][1] > w[0][1]);
        expect(ok, format!("share after 100 steps {}", crate::rational::to_decimal(&s[100][0], 6)), "share failed to grow")
    });
    let mut mimic = handshake_assignment(g, &[1, 1], &[1, 1]);
    mimic.b.values_mut().for_each(|p: &mut MixedProfile| *p = pure_profile(g, &[1, 1]));
    let flat = run(&mimic).and_then(|s| expect(s.iter().all(|x| x[0] == qr(1, 100) && x[1] == qr(1, 100)), "share stays 1/100", "share moved"));
    (grow, flat)
}

fn nongeneric() -> Vec<(&'static str, Outcome)> {
    let mut out = Vec::new();
    let m = load("nongeneric_materialist");
    out.push((
        "materialist configuration gets no stability route",
        match stability(&m) {
            Ok(v @ StabilityVerdict::Stable(_)) => Err(verdict_name(&v)),
            Ok(v) => Ok(verdict_name(&v)),
            Err(e) => Err(e),
        },
    ));
    let d = load("nongeneric_dominant");
    out.push((
        "dominant-action configuration on (a11,a21) is stable without observability",
        match stability(&d) {
            Ok(v @ StabilityVerdict::Stable(_)) => Ok(verdict_name(&v)),
            Ok(v) => Err(verdict_name(&v)),
            Err(e) => Err(e),
        },
    ));
    out
}

pub const EXAMPLES: &[&str] = &["ex1", "ex2", "ex3", "ex4", "ex5", "ex6", "nongeneric"];

pub fn run(filter: Option<&str>) -> Vec<Check> {
    let mut out = Vec::new();
    for &name in EXAMPLES {
        if filter.is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let checks = match name {
            "ex1" => ex1(),
            "ex2" => ex2(),
            "ex3" => ex3(),
            "ex4" => ex4(),
            "ex5" => ex5(),
            "ex6" => ex6(),
            _ => nongeneric(),
        };
        for (label, r) in checks {
            let (passed, detail) = match r {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            out.push(Check {
                example: name,
                name: label,
                passed,
                detail,
            });
        }
    }
    out
}
