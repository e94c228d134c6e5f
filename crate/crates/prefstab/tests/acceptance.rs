mod common;

use common::Check;
use num_traits::{One, Signed, Zero};
use prefstab::config::{
    average_fitness, is_balanced, validate_configuration, Configuration, MutantSubProfile, PreferenceType, Regime,
};
use prefstab::corpus::load;
use prefstab::dynamics::{simulate, ReplicatorRule};
use prefstab::efficiency::{efficiency_status, Dominance, EfficiencyStatus};
use prefstab::equilibrium::{is_strictly_strong_nash, Tri};
use prefstab::game::{cartesian, grid_strategies, nonempty_subsets, pure_profile, Game, MixedProfile, MixedStrategy};
use prefstab::poly::{Poly, UPoly, Var};
use prefstab::rational::{q, qr, to_decimal, Q};
use prefstab::ring::Ring;
use prefstab::stability::{
    check_stability, find_invader, fitness_diff_polynomials, nearby_equilibrium, observability_thresholds,
    post_entry_configuration, uniform_invasion_barrier, MutantAssignment, NearbyOutcome, StabilityOptions,
    StabilityVerdict,
};
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

// Written straight to stderr so the lines show up without --nocapture.
macro_rules! say {
    ($($arg:tt)+) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stderr(), $($arg)+);
    }};
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn opts() -> StabilityOptions {
    StabilityOptions::default()
}

fn verdict(c: &Configuration) -> Result<StabilityVerdict, String> {
    check_stability(c, &opts()).map_err(|e| e.to_string())
}

/// Utility of `u` at a mixed profile, summed over pure profiles.
fn utility(g: &Game, u: &[Q], prof: &[MixedStrategy]) -> Q {
    g.profiles()
        .map(|a| {
            let w: Q = a.iter().enumerate().map(|(j, &k)| prof[j].weight(k).clone()).product();
            w * &u[g.index(&a)]
        })
        .sum()
}

fn objective(g: &Game, i: usize) -> Vec<Q> {
    g.profiles().map(|a| g.payoff(&a, i).clone()).collect()
}

fn is_best_reply(g: &Game, u: &[Q], i: usize, prof: &[MixedStrategy]) -> bool {
    let here = utility(g, u, prof);
    (0..g.num_actions(i)).all(|a| {
        let mut dev = prof.to_vec();
        dev[i] = MixedStrategy::pure(a, g.num_actions(i));
        utility(g, u, &dev) <= here
    })
}

/// Fitness of type `t` in population `i` for monomorphic incumbents (type 0)
/// and mutants (type 1) with the given mutant shares and match profiles.
fn direct_fitness(g: &Game, eps: &[Option<Q>], b: &BTreeMap<Vec<usize>, MixedProfile>, i: usize, t: usize) -> Q {
    let n = g.n();
    let counts: Vec<usize> = eps.iter().map(|e| if e.is_some() { 2 } else { 1 }).collect();
    let mut total = Q::zero();
    for th in cartesian(&counts) {
        if th[i] != t {
            continue;
        }
        let mut w = Q::one();
        for j in (0..n).filter(|&j| j != i) {
            w *= match (&eps[j], th[j]) {
                (None, _) => Q::one(),
                (Some(e), 0) => Q::one() - e,
                (Some(e), _) => e.clone(),
            };
        }
        total += w * utility(g, &objective(g, i), &b[&th]);
    }
    total
}

fn incumbent_utilities(c: &Configuration) -> Vec<Vec<Q>> {
    c.mu.populations.iter().map(|p| p.types[0].utilities.clone()).collect()
}

struct PostEntry {
    b: BTreeMap<Vec<usize>, MixedProfile>,
    fitness: Vec<Vec<Q>>,
}

/// Every focal equilibrium of a two-population monomorphic observed
/// configuration after indifferent mutants enter, with match strategies drawn
/// from a grid: `res` for matches with one mutant, `res_both` when mutants meet.
fn enumerate_entries(c: &Configuration, coalition: &[usize], eps: &[Q; 2], res: usize, res_both: usize) -> Vec<PostEntry> {
    let g = &c.game;
    let Regime::P1 { b } = &c.regime else { panic!("observed regime expected") };
    let star = b[&vec![0, 0]].clone();
    let utils = incumbent_utilities(c);
    let e: Vec<Option<Q>> = (0..2).map(|j| coalition.contains(&j).then(|| eps[j].clone())).collect();
    let counts: Vec<usize> = e.iter().map(|x| if x.is_some() { 2 } else { 1 }).collect();
    let matches: Vec<Vec<usize>> = cartesian(&counts).into_iter().filter(|th| th.contains(&1)).collect();
    let options: Vec<Vec<MixedProfile>> = matches
        .iter()
        .map(|th| {
            let r = if th.iter().all(|&t| t == 1) { res_both } else { res };
            let mut out = Vec::new();
            for x in grid_strategies(g.num_actions(0), r) {
                for y in grid_strategies(g.num_actions(1), r) {
                    let prof = vec![x.clone(), y];
                    if (0..2).all(|i| th[i] == 1 || is_best_reply(g, &utils[i], i, &prof)) {
                        out.push(prof);
                    }
                }
            }
            out
        })
        .collect();
    let mut out = Vec::new();
    for pick in cartesian(&options.iter().map(Vec::len).collect::<Vec<_>>()) {
        let mut full = BTreeMap::new();
        full.insert(vec![0, 0], star.clone());
        for (k, th) in matches.iter().enumerate() {
            full.insert(th.clone(), options[k][pick[k]].clone());
        }
        let fitness = (0..2).map(|i| (0..counts[i]).map(|t| direct_fitness(g, &e, &full, i, t)).collect()).collect();
        out.push(PostEntry { b: full, fitness });
    }
    out
}

/// Mutants fail when some coalition member earns strictly less than its
/// incumbent, or coexist when every population is balanced.
fn repelled(p: &PostEntry, coalition: &[usize]) -> bool {
    coalition.iter().any(|&j| p.fitness[j][0] > p.fitness[j][1]) || p.fitness.iter().all(|f| f.iter().all(|x| *x == f[0]))
}

fn scan_barrier(c: &Configuration, barrier: &Q, res: usize) -> Result<usize, String> {
    let below = |k: i64| barrier * qr(k, 100);
    let samples = [[below(1), below(1)], [below(50), below(10)], [below(10), below(50)], [below(99), below(99)]];
    let mut seen = 0;
    for coalition in nonempty_subsets(2) {
        for eps in &samples {
            for p in enumerate_entries(c, &coalition, eps, res, 2) {
                seen += 1;
                ensure!(repelled(&p, &coalition), "mutants {coalition:?} invade at shares {eps:?}: {:?}", p.fitness);
            }
        }
    }
    Ok(seen)
}

fn criterion_1() -> Check {
    let c = load("ex1_battle_of_sexes");
    let g = &c.game;
    ensure!(validate_configuration(&c).ok, "configuration is not an equilibrium");
    ensure!(is_balanced(&c), "configuration is not balanced");
    let star = pure_profile(g, &[0, 1]);
    for i in 0..2 {
        ensure!(average_fitness(&c, i, 0).unwrap() == q(5), "incumbent fitness in population {i} is not 5");
        ensure!(utility(g, &objective(g, i), &star) == q(5), "(Faithful, Fast) does not pay 5");
    }
    let v = verdict(&c)?;
    let StabilityVerdict::Stable(route) = &v else { return Err(format!("verdict {}", v.name())) };
    let barrier = uniform_invasion_barrier(&v).ok_or("no uniform invasion barrier reported")?;
    ensure!(barrier >= qr(3, 18), "barrier {barrier} is below 3/18");
    // every focal equilibrium below the reported barrier repels the mutants
    let seen = scan_barrier(&c, &barrier, 5)?;
    // the stated bounds, over every focal equilibrium with q1 != 1
    let mut bounded = 0;
    for eps in [[qr(1, 100), qr(1, 100)], [qr(1, 10), qr(3, 20)], [qr(1, 7), qr(1, 7)], [qr(1, 2), qr(1, 6)]] {
        for p in enumerate_entries(&c, &[0, 1], &eps, 10, 2) {
            let q1 = p.b[&vec![1, 0]][0].weight(0).clone();
            if q1.is_one() {
                continue;
            }
            bounded += 1;
            let e2 = &eps[1];
            ensure!(p.fitness[0][0] >= q(5) * (Q::one() - e2), "incumbent bound fails at q1 = {q1}");
            ensure!(
                p.fitness[0][1] <= q(2) * &q1 * (Q::one() - e2) + q(15) * e2,
                "mutant bound fails at q1 = {q1}"
            );
            if e2 < &qr(3, 18) {
                ensure!(p.fitness[0][0] > p.fitness[0][1], "mutants match incumbents at q1 = {q1}, e2 = {e2}");
            }
        }
    }
    // the gap between the bounds is linear in e2, positive at 0 and nonnegative at 3/18
    for k in 0..10 {
        let q1 = qr(k, 10);
        let gap = |e: &Q| q(5) * (Q::one() - e) - (q(2) * &q1 * (Q::one() - e) + q(15) * e);
        ensure!(gap(&Q::zero()).is_positive() && !gap(&qr(3, 18)).is_negative(), "bounds cross below 3/18 at q1 = {q1}");
    }
    say!(
        "  ex1: {} ({}), barrier {barrier}; {seen} focal equilibria repelled; bounds hold on {bounded}",
        route.name,
        route.notes.join("; ")
    );
    Ok(())
}

/// Match profiles for three monomorphic populations keyed by the set of mutants.
fn three_player_b(g: &Game, by_movers: &dyn Fn(&[usize]) -> [usize; 3]) -> BTreeMap<Vec<usize>, MixedProfile> {
    cartesian(&[2, 2, 2])
        .into_iter()
        .map(|th| {
            let movers: Vec<usize> = (0..3).filter(|&i| th[i] == 1).collect();
            let a = by_movers(&movers);
            (th, pure_profile(g, &a))
        })
        .collect()
}

fn three_player_case(name: &str, by_movers: &dyn Fn(&[usize]) -> [usize; 3], expected: &UPoly, label: &str) -> Check {
    let c = load(name);
    let g = &c.game;
    let v = verdict(&c)?;
    let cert = v.certificate().ok_or_else(|| format!("verdict {}", v.name()))?;
    common::certificate_case(&c, cert)?;
    let b = three_player_b(g, by_movers);
    let mut assignment = MutantAssignment::default();
    for (th, p) in &b {
        if th.contains(&1) {
            assignment.b.insert(th.clone(), p.clone());
        }
    }
    let types: Vec<PreferenceType> = (0..3).map(|i| PreferenceType::indifferent(g, i)).collect();
    let probe = MutantSubProfile::new(vec![0, 1, 2], types.clone(), vec![qr(1, 10); 3]).unwrap();
    let diffs = fitness_diff_polynomials(&c, &probe, &assignment).map_err(|e| e.to_string())?;
    for d in &diffs {
        ensure!(d.poly.diagonal().as_ref() == Some(expected), "population {} differs by {}", d.population, d.poly);
    }
    for t in [qr(1, 100), qr(1, 10), qr(1, 3), qr(1, 2)] {
        let e = vec![Some(t.clone()); 3];
        let post = post_entry_configuration(&c, &MutantSubProfile::new(vec![0, 1, 2], types.clone(), vec![t.clone(); 3]).unwrap(), &assignment)
            .map_err(|e| e.to_string())?;
        ensure!(validate_configuration(&post).ok, "listed assignment is not an equilibrium at {t}");
        for i in 0..3 {
            let diff = direct_fitness(g, &e, &b, i, 1) - direct_fitness(g, &e, &b, i, 0);
            ensure!(diff == expected.eval(&t), "population {i} differs by {diff} at {t}");
        }
    }
    say!("  {name}: unstable via {}; listed assignment differs by {label} per population", cert.route);
    Ok(())
}

fn criterion_2() -> Check {
    let listed = |m: &[usize]| match m {
        [0, 1] => [1, 1, 0],
        [0, 2] => [2, 0, 1],
        [1, 2] => [0, 2, 2],
        _ => [0, 0, 0],
    };
    three_player_case("ex3_three_player", &listed, &UPoly::new(vec![q(0), q(0), q(7)]), "7t^2")
}

fn criterion_3() -> Check {
    let listed = |m: &[usize]| match m {
        [0, 1] => [0, 1, 0],
        [0, 2] => [1, 0, 0],
        [1, 2] => [0, 0, 1],
        _ => [0, 0, 0],
    };
    three_player_case("ex4_three_player", &listed, &UPoly::new(vec![q(0), q(1), q(6)]), "t + 6t^2")?;
    let g = load("ex4_three_player").game;
    let star = [0usize, 0, 0];
    let mut checked = 0;
    for a in g.profiles() {
        for i in (0..3).filter(|&i| a[i] != star[i]) {
            checked += 1;
            ensure!(g.payoff(&a, i) < g.payoff(&star, i), "deviant {i} does not lose at {:?}", a);
        }
    }
    let ss = is_strictly_strong_nash(&g, &pure_profile(&g, &star), 10).map_err(|e| e.to_string())?;
    ensure!(ss != Tri::No, "strictly strong check reports a profitable coalition");
    say!("  ex4: {checked} deviant payoffs all drop; strictly strong check says {ss:?}");
    Ok(())
}

fn criterion_4() -> Check {
    let low = load("ex2_coordination_a11a21");
    let high = load("ex2_coordination_a12a22");
    let g = &low.game;
    for i in 0..2 {
        for a in 0..2 {
            if a != 0 {
                let mut dev = vec![0, 0];
                dev[i] = a;
                ensure!(g.payoff(&dev, i) < g.payoff(&[0, 0], i), "(a11,a21) is not strict");
            }
        }
    }
    // player 1 already earns its maximum at (a11,a21), so nothing improves both
    let best1 = g.profiles().map(|a| g.payoff(&a, 0).clone()).max().unwrap();
    ensure!(g.payoff(&[0, 0], 0) == &best1, "(a11,a21) is not weakly efficient");
    ensure!(
        g.payoff(&[1, 1], 0) >= g.payoff(&[0, 0], 0) && g.payoff(&[1, 1], 1) > g.payoff(&[0, 0], 1),
        "(a12,a22) does not weakly dominate"
    );
    match efficiency_status(g, &pure_profile(g, &[0, 0]), 10).map_err(|e| e.to_string())? {
        EfficiencyStatus::Dominated { relation: Dominance::Weak, weakly_efficient: Tri::Yes, .. } => {}
        other => return Err(format!("efficiency status {other:?}")),
    }
    let cert = find_invader(&low, &[0, 1], &opts()).map_err(|e| e.to_string())?.ok_or("no invader for (a11,a21)")?;
    common::certificate_case(&low, &cert)?;
    // aggregate strong: every coalition deviation lowers the coalition's total
    for coalition in nonempty_subsets(2) {
        for a in g.profiles() {
            if coalition.iter().all(|&j| a[j] == 1) || (0..2).any(|j| !coalition.contains(&j) && a[j] != 1) {
                continue;
            }
            let sum = |p: &[usize]| -> Q { coalition.iter().map(|&j| g.payoff(p, j).clone()).sum() };
            ensure!(sum(&a) < sum(&[1, 1]), "coalition {coalition:?} gains at {a:?}");
        }
    }
    let mut names = Vec::new();
    for p in [q(1), qr(1, 10), qr(1, 2), qr(9, 10)] {
        let c = high.with_observability(&p).map_err(|e| e.to_string())?;
        let v = verdict(&c)?;
        ensure!(matches!(v, StabilityVerdict::Stable(_)), "(a12,a22) is {} at p = {p}", v.name());
        names.push(format!("p={p}"));
    }
    let barrier = uniform_invasion_barrier(&verdict(&high)?).ok_or("no barrier for (a12,a22)")?;
    let seen = scan_barrier(&high, &barrier, 4)?;
    say!(
        "  ex2: (a11,a21) invaded via {}; (a12,a22) stable at {} with barrier {barrier}, {seen} focal equilibria repelled",
        cert.route,
        names.join(", ")
    );
    Ok(())
}

fn criterion_5() -> Check {
    let c = load("ex5_p0");
    let g = &c.game;
    ensure!(validate_configuration(&c).ok, "half-half strategies are not an equilibrium");
    let Regime::P0 { s } = &c.regime else { return Err("expected unobserved regime".into()) };
    let half = MixedStrategy::new(vec![qr(1, 2), qr(1, 2), q(0)]).unwrap();
    ensure!(s[0][0] == half && s[1][0] == half, "incumbents do not play (1/2, 1/2, 0)");
    for i in 0..2 {
        let u = &c.mu.populations[i].types[0].utilities;
        ensure!(is_best_reply(g, u, i, &[half.clone(), half.clone()]), "player {i} has a better reply");
    }
    let samples = [
        (q(1), q(0)),
        (q(0), q(1)),
        (q(0), q(0)),
        (qr(1, 3), qr(1, 3)),
        (qr(1, 10), qr(3, 5)),
        (qr(1, 2), q(0)),
    ];
    let mut count = 0;
    for e in [qr(1, 10), qr(1, 4)] {
        for (q1, q2) in &samples {
            let x = MixedStrategy::new(vec![q1.clone(), q2.clone(), Q::one() - q1 - q2]).unwrap();
            let mutants = MutantSubProfile::new(
                vec![0, 1],
                vec![PreferenceType::indifferent(g, 0), PreferenceType::indifferent(g, 1)],
                vec![e.clone(), e.clone()],
            )
            .unwrap();
            let found = match nearby_equilibrium(&c, &mutants, &[x.clone(), x.clone()], &q(1)).map_err(|e| e.to_string())? {
                NearbyOutcome::Found(n) => n,
                NearbyOutcome::NotFound(why) => return Err(why),
            };
            let p1 = (Q::one() - &e * (Q::one() + q1 - q2)) / (q(2) * (Q::one() - &e));
            let p2 = (Q::one() - &e * (Q::one() - q1 + q2)) / (q(2) * (Q::one() - &e));
            for i in 0..2 {
                let w = found.incumbents[i].weights();
                ensure!(w[0] == p1 && w[1] == p2 && w[2].is_zero(), "incumbent {i} plays {w:?} at e = {e}");
            }
            ensure!(validate_configuration(&found.configuration).ok, "rebalanced strategies are not an equilibrium");
            count += 1;
        }
    }
    // a_i3 against the rebalanced aggregate ((1 - e q3)/2, (1 - e q3)/2, e q3)
    let u = objective(g, 0);
    for (e, q3) in [(qr(1, 10), q(1)), (qr(1, 6), q(1)), (qr(199, 1000), q(1)), (qr(1, 5), q(1)), (qr(1, 4), qr(1, 2)), (qr(3, 10), q(1))] {
        let m = &e * &q3;
        let xj = MixedStrategy::new(vec![(Q::one() - &m) / q(2), (Q::one() - &m) / q(2), m.clone()]).unwrap();
        let val = |a: usize| utility(g, &u, &[MixedStrategy::pure(a, 3), xj.clone()]);
        ensure!(val(0) == val(1), "a_i1 and a_i2 differ");
        ensure!(val(0) == q(3) - q(3) * &m, "a_i1 earns {}", val(0));
        ensure!(val(2) == (q(5) - &m) / q(2), "a_i3 earns {}", val(2));
        ensure!((val(0) > val(2)) == (m < qr(1, 5)), "inferiority of a_i3 flips at e q3 = {m}");
    }
    // incumbents on (1,0,0) and mutants on (1/2,0,1/2) for any shares
    let mut types = Vec::new();
    for i in 0..2 {
        let mut w = vec![Q::zero(); 9];
        for a in [[0, 0], [0, 2], [2, 0], [2, 2]] {
            w[g.index(&a)] = q(1);
        }
        w[g.index(&[1, 1])] = q(2);
        types.push(PreferenceType::new(g, i, w, vec![]).unwrap());
    }
    let mut assignment = MutantAssignment::default();
    for i in 0..2 {
        assignment.s.insert(i, MixedStrategy::new(vec![qr(1, 2), q(0), qr(1, 2)]).unwrap());
        assignment.incumbent_s.insert((i, 0), MixedStrategy::pure(0, 3));
    }
    let far: Q = (0..3).map(|a| (half.weight(a) - MixedStrategy::pure(0, 3).weight(a)).pow(2)).sum();
    ensure!(far == qr(1, 2), "far equilibrium is at squared distance {far}");
    let mut shares = 0;
    for e1 in [qr(1, 100), qr(1, 3), qr(1, 2), qr(9, 10)] {
        for e2 in [qr(1, 50), qr(1, 3), qr(3, 4)] {
            let m = MutantSubProfile::new(vec![0, 1], types.clone(), vec![e1.clone(), e2.clone()]).unwrap();
            let post = post_entry_configuration(&c, &m, &assignment).map_err(|e| e.to_string())?;
            ensure!(validate_configuration(&post).ok, "far equilibrium fails at shares {e1}, {e2}");
            for i in 0..2 {
                let e = if i == 0 { &e2 } else { &e1 };
                // opponent aggregate mixes (1,0,0) and (1/2,0,1/2)
                let opp = MixedStrategy::new(vec![Q::one() - e / q(2), q(0), e / q(2)]).unwrap();
                let inc = utility(g, &u_of(g, i), &order(i, MixedStrategy::pure(0, 3), opp.clone()));
                let mu = utility(g, &u_of(g, i), &order(i, assignment.s[&i].clone(), opp));
                ensure!(average_fitness(&post, i, 0).unwrap() == inc, "incumbent fitness differs");
                ensure!(mu > inc, "mutants in population {i} do not gain at shares {e1}, {e2}");
            }
            shares += 1;
        }
    }
    say!("  ex5: closed form matched in {count} cases; far equilibrium favours mutants at {shares} share pairs");
    Ok(())
}

fn u_of(g: &Game, i: usize) -> Vec<Q> {
    objective(g, i)
}

fn order(i: usize, own: MixedStrategy, other: MixedStrategy) -> Vec<MixedStrategy> {
    if i == 0 {
        vec![own, other]
    } else {
        vec![other, own]
    }
}

fn criterion_6() -> Check {
    let base = load("ex6_pd");
    let g = &base.game;
    for i in 0..2 {
        let mut dev = vec![1, 1];
        dev[i] = 0;
        ensure!(g.payoff(&dev, i) < g.payoff(&[1, 1], i), "(D,D) is not strict");
    }
    let p0 = base.with_observability(&q(0)).map_err(|e| e.to_string())?;
    let v0 = verdict(&p0)?;
    let StabilityVerdict::Stable(route) = &v0 else { return Err(format!("p = 0 gives {}", v0.name())) };
    let e = Poly::eps(0);
    let p = Poly::p();
    let one = Poly::unit();
    let mix = p
        .power(2)
        .scale(&q(2))
        .plus(&p.times(&one.minus(&p)).scale(&q(3)))
        .plus(&one.minus(&p).power(2));
    let advantage = one.minus(&e).plus(&e.times(&mix)).minus(&one);
    for pv in [qr(1, 100), qr(1, 2), qr(99, 100)] {
        let c = base.with_observability(&pv).map_err(|e| e.to_string())?;
        let v = verdict(&c)?;
        let cert = v.certificate().ok_or_else(|| format!("p = {pv} gives {}", v.name()))?;
        common::certificate_case(&c, cert)?;
        let want = advantage.substitute_q(Var::P, &pv).univariate(Var::Eps(0)).unwrap();
        ensure!(want == UPoly::new(vec![q(0), pv.clone()]), "advantage does not simplify to e p");
        for d in &cert.diffs {
            ensure!(d.poly.diagonal().as_ref() == Some(&want), "difference {} at p = {pv}", d.poly);
        }
    }
    let t = observability_thresholds(g, &[1, 1], &pure_profile(g, &[0, 0])).map_err(|e| e.to_string())?;
    ensure!(t.p_bar_high.is_zero(), "p_bar_high = {}", t.p_bar_high);
    say!("  ex6: p = 0 stable via {}; advantage e p at p = 1/100, 1/2, 99/100; p_bar_high = 0", route.name);
    Ok(())
}

fn criterion_7() -> Check {
    let m = load("nongeneric_materialist");
    let g = &m.game;
    let v = verdict(&m)?;
    ensure!(!matches!(v, StabilityVerdict::Stable(_)), "materialist configuration reported stable");
    let x = MixedStrategy::pure(2, 3);
    let eta = qr(1, 10);
    for e in [qr(1, 100), qr(1, 10)] {
        let mutants = MutantSubProfile::new(vec![1], vec![PreferenceType::indifferent(g, 1)], vec![e.clone()]).unwrap();
        match nearby_equilibrium(&m, &mutants, std::slice::from_ref(&x), &eta).map_err(|e| e.to_string())? {
            NearbyOutcome::NotFound(_) => {}
            NearbyOutcome::Found(_) => return Err(format!("nearby equilibrium found at {e}")),
        }
        // a12 beats a11 by e, so materialists in population 1 leave a11 entirely
        let opp = MixedStrategy::new(vec![Q::one() - &e, q(0), e.clone()]).unwrap();
        let u = objective(g, 0);
        let gain = utility(g, &u, &[MixedStrategy::pure(1, 2), opp.clone()]) - utility(g, &u, &[MixedStrategy::pure(0, 2), opp]);
        ensure!(gain == e, "a12 gains {gain}");
    }
    let d = load("nongeneric_dominant");
    let vd = verdict(&d)?;
    let StabilityVerdict::Stable(route) = &vd else { return Err(format!("dominant types give {}", vd.name())) };
    say!("  nongeneric: materialist {}; dominant types stable via {}", v.name(), route.name);
    Ok(())
}

fn criterion_8() -> Check {
    for seed in 0..200 {
        common::multilinear_case(seed).map_err(|e| format!("game {seed}: {e}"))?;
    }
    for seed in 0..100 {
        common::balanced_p0_case(seed).map_err(|e| format!("configuration {seed}: {e}"))?;
    }
    for k in 0..20 {
        common::status_weight_case(&qr(k, 19))?;
    }
    let certs = common::corpus_certificates();
    for (c, cert) in &certs {
        common::certificate_case(c, cert)?;
    }
    for seed in 0..40 {
        common::partial_extremes_case(seed).map_err(|e| format!("case {seed}: {e}"))?;
    }
    say!("  properties: 200 games, 100 balanced configurations, 20 p values, {} certificates, 40 substitutions", certs.len());
    Ok(())
}

fn criterion_9() -> Check {
    let c = load("ex6_pd");
    let g = &c.game;
    let eps = qr(1, 100);
    let types = vec![PreferenceType::indifferent(g, 0), PreferenceType::indifferent(g, 1)];
    let mutants = MutantSubProfile::new(vec![0, 1], types, vec![eps.clone(), eps.clone()]).unwrap();
    let run = |both: [usize; 2]| -> Result<Vec<[Q; 2]>, String> {
        let mut a = MutantAssignment::default();
        a.b.insert(vec![1, 0], pure_profile(g, &[1, 1]));
        a.b.insert(vec![0, 1], pure_profile(g, &[1, 1]));
        a.b.insert(vec![1, 1], pure_profile(g, &both));
        for i in 0..2 {
            a.s.insert(i, MixedStrategy::pure(1, 2));
        }
        let post = post_entry_configuration(&c, &mutants, &a).map_err(|e| e.to_string())?;
        ensure!(validate_configuration(&post).ok, "assignment is not an equilibrium");
        let adv = average_fitness(&post, 0, 1).unwrap() - average_fitness(&post, 0, 0).unwrap();
        let expected = if both == [0, 0] { &eps * qr(1, 2) } else { Q::zero() };
        ensure!(adv == expected, "initial advantage {adv}");
        let traj = simulate(&post, 100, &ReplicatorRule::for_config(&post)).map_err(|e| e.to_string())?;
        ensure!(traj.len() == 101, "trajectory has {} points", traj.len());
        Ok(traj.iter().map(|p| [p.shares[0][1].clone(), p.shares[1][1].clone()]).collect())
    };
    let grow = run([0, 0])?;
    for (k, w) in grow.windows(2).enumerate() {
        ensure!(w[1][0] > w[0][0] && w[1][1] > w[0][1], "mutant share does not grow at step {}", k + 1);
    }
    let flat = run([1, 1])?;
    for (k, s) in flat.iter().enumerate() {
        ensure!(s[0] == eps && s[1] == eps, "mimic share moves at step {k}");
    }
    say!(
        "  dynamics: mutant share {} -> {} over 100 steps; mimics stay at {eps}",
        to_decimal(&grow[0][0], 6),
        to_decimal(&grow[100][0], 6)
    );
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("battle of the sexes barrier and bounds", criterion_1),
        ("three-player bilateral deviations invade", criterion_2),
        ("three-player averaged advantage invades", criterion_3),
        ("coordination game efficiency and stability", criterion_4),
        ("unobserved nearby equilibria", criterion_5),
        ("prisoner's dilemma across observability", criterion_6),
        ("non-generic game needs dominant types", criterion_7),
        ("property suites", criterion_8),
        ("replicator corroboration", criterion_9),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = f();
        let took = start.elapsed();
        if result.is_ok() && took > Duration::from_secs(10) {
            result = Err(format!("took {took:?}"));
        }
        match &result {
            Ok(()) => say!("criterion {}: PASS {name} ({took:.2?})", k + 1),
            Err(e) => {
                say!("criterion {}: FAIL {name}: {e}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
