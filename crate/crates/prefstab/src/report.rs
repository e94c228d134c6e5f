//! JSON reports for validation, stability verdicts and invader certificates.

use crate::config::{is_balanced, validate_configuration, average_fitness, Configuration, PreferenceType, Regime};
use crate::game::{Caps, Game};
use crate::rational::fmt_q;
use crate::stability::{
    CertificateKind, Instability, InvaderCertificate, MutantAssignment, StabilityOptions, StabilityVerdict,
};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub fn header(options: Option<&StabilityOptions>) -> Map<String, Value> {
    let caps = Caps::default();
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("tool".into(), json!({"name": "prefstab", "version": env!("CARGO_PKG_VERSION")}));
    m.insert("caps".into(), json!({"max_players": caps.max_players, "max_actions": caps.max_actions}));
    if let Some(o) = options {
        m.insert(
            "options".into(),
            json!({
                "grid_resolution": o.grid_resolution,
                "support_limit": o.support_limit,
                "node_cap": o.node_cap,
                "aggregate_fitness": o.aggregate_fitness,
            }),
        );
    }
    m
}

fn regime_json(config: &Configuration) -> Value {
    match &config.regime {
        Regime::Partial { p, .. } => json!({"mode": "partial", "p": fmt_q(p)}),
        r => json!({"mode": r.mode()}),
    }
}

pub fn fitness_table(config: &Configuration) -> Value {
    Value::Array(
        config
            .mu
            .populations
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Value::Array(
                    (0..p.types.len())
                        .map(|t| json!(fmt_q(&average_fitness(config, i, t).expect("type exists"))))
                        .collect(),
                )
            })
            .collect(),
    )
}

pub fn validation_report(config: &Configuration) -> Value {
    let mut m = header(None);
    let r = validate_configuration(config);
    m.insert("regime".into(), regime_json(config));
    m.insert("valid".into(), json!(r.ok));
    if let Some(v) = &r.violation {
        m.insert(
            "violation".into(),
            json!({
                "condition": v.condition,
                "types": v.types,
                "population": v.player + 1,
                "deviation": config.game.label(v.player, v.deviation),
                "gain": fmt_q(&v.gain),
            }),
        );
    }
    m.insert("balanced".into(), json!(is_balanced(config)));
    m.insert("fitness".into(), fitness_table(config));
    Value::Object(m)
}

fn type_json(game: &Game, t: &PreferenceType) -> Value {
    let utilities: Map<String, Value> = game
        .profiles()
        .map(|p| (game.profile_label(&p), json!(fmt_q(&t.utilities[game.index(&p)]))))
        .collect();
    json!({"population": t.role + 1, "utilities": utilities})
}

fn key(th: &[usize]) -> String {
    th.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
}

pub fn assignment_json(game: &Game, a: &MutantAssignment) -> Value {
    let b: Map<String, Value> = a.b.iter().map(|(th, p)| (key(th), game.profile_to_json(p))).collect();
    let s: Map<String, Value> = a
        .s
        .iter()
        .map(|(j, x)| ((j + 1).to_string(), game.strategy_to_json(*j, x)))
        .collect();
    let inc: Map<String, Value> = a
        .incumbent_s
        .iter()
        .map(|((j, t), x)| (format!("{},{}", j + 1, t), game.strategy_to_json(*j, x)))
        .collect();
    json!({"matches": b, "mutant_strategies": s, "incumbent_strategies": inc})
}

pub fn certificate_json(game: &Game, c: &InvaderCertificate) -> Value {
    let diffs: Vec<Value> = c
        .diffs
        .iter()
        .map(|d| {
            let diag = d.poly.diagonal().map(|u| u.coeffs().iter().map(|x| json!(fmt_q(x))).collect::<Vec<_>>());
            json!({
                "population": d.population + 1,
                "incumbent": d.incumbent,
                "polynomial": d.poly.to_json(),
                "text": d.poly.to_string(),
                "diagonal_coefficients": diag,
            })
        })
        .collect();
    let kind = match &c.kind {
        CertificateKind::Focal => json!({"kind": "focal"}),
        CertificateKind::Continuity { eta, gap } => json!({"kind": "continuity", "eta": fmt_q(eta), "gap": fmt_q(gap)}),
    };
    json!({
        "route": c.route,
        "coalition": c.coalition.iter().map(|j| j + 1).collect::<Vec<_>>(),
        "mutant_types": c.mutant_types.iter().map(|t| type_json(game, t)).collect::<Vec<_>>(),
        "assignment": assignment_json(game, &c.assignment),
        "differences": diffs,
        "witnesses": c.witnesses.iter().map(|(j, t)| json!({"population": j + 1, "incumbent": t})).collect::<Vec<_>>(),
        "constraints": c.constraints.iter().map(|p| p.to_json()).collect::<Vec<_>>(),
        "region": {"ray": "eps_j = t for every coalition member", "t_upper": fmt_q(&c.region.t_upper), "exact": c.region.exact},
        "equilibrium": kind,
        "notes": c.notes,
    })
}

pub fn verdict_json(config: &Configuration, verdict: &StabilityVerdict, options: &StabilityOptions) -> Value {
    let mut m = header(Some(options));
    m.insert("regime".into(), regime_json(config));
    m.insert("verdict".into(), json!(verdict.name()));
    match verdict {
        StabilityVerdict::Stable(r) => {
            m.insert(
                "route".into(),
                json!({
                    "name": r.name,
                    "premises": r.premises,
                    "uniform_barrier": r.barrier.as_ref().map(fmt_q),
                    "notes": r.notes,
                }),
            );
        }
        StabilityVerdict::Unstable(Instability::Certificate(c)) => {
            m.insert("certificate".into(), certificate_json(&config.game, c));
        }
        StabilityVerdict::Unstable(Instability::Unbalanced { population, fitness }) => {
            m.insert(
                "balance_violation".into(),
                json!({"population": population + 1, "fitness": fitness.iter().map(fmt_q).collect::<Vec<_>>()}),
            );
        }
        StabilityVerdict::Unknown { reason, detail } => {
            m.insert("unknown".into(), json!({"reason": reason.name(), "detail": detail}));
        }
    }
    Value::Object(m)
}

/// Short human-readable summary of a verdict.
pub fn verdict_text(config: &Configuration, verdict: &StabilityVerdict) -> String {
    let g = &config.game;
    match verdict {
        StabilityVerdict::Stable(r) => {
            let mut s = format!("Stable ({})\n", r.name);
            for p in &r.premises {
                s += &format!("  premise: {p}\n");
            }
            if let Some(b) = &r.barrier {
                s += &format!("  uniform invasion barrier: {}\n", fmt_q(b));
            }
            for n in &r.notes {
                s += &format!("  {n}\n");
            }
            s
        }
        StabilityVerdict::Unstable(Instability::Certificate(c)) => {
            let mut s = format!(
                "Unstable ({}), coalition {:?}\n",
                c.route,
                c.coalition.iter().map(|j| j + 1).collect::<Vec<_>>()
            );
            for d in &c.diffs {
                s += &format!("  population {} vs incumbent type {}: {}\n", d.population + 1, d.incumbent + 1, d.poly);
            }
            s += &format!("  valid for 0 < t < {} on eps_j = t\n", fmt_q(&c.region.t_upper));
            for (th, p) in &c.assignment.b {
                s += &format!("  match {}: {}\n", key(th), g.render_profile(p));
            }
            for (j, x) in &c.assignment.s {
                s += &format!("  mutant {} plays {}\n", j + 1, g.render_strategy(*j, x));
            }
            for n in &c.notes {
                s += &format!("  {n}\n");
            }
            s
        }
        StabilityVerdict::Unstable(Instability::Unbalanced { population, fitness }) => format!(
            "Unstable (unbalanced): population {} has fitness {}\n",
            population + 1,
            fitness.iter().map(fmt_q).collect::<Vec<_>>().join(", ")
        ),
        StabilityVerdict::Unknown { reason, detail } => format!("Unknown ({}): {}\n", reason.name(), detail),
    }
}
