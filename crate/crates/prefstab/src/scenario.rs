//! Scenario files: a game, preference populations and a regime.

use crate::config::{Configuration, Population, PreferenceDistribution, PreferenceType, Regime, Tag};
use crate::error::{structural, Error, Result};
use crate::game::{Game, MixedProfile, MixedStrategy};
use crate::rational::{parse_q, q_from_json, Q};
use serde_json::Value;
use std::collections::BTreeMap;

fn field<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Structural(format!("{ctx}: missing \"{key}\"")))
}

fn parse_type(game: &Game, role: usize, v: &Value) -> Result<PreferenceType> {
    let tags: Vec<Tag> = match v.get("tags") {
        Some(t) => serde_json::from_value(t.clone())
            .map_err(|e| Error::Structural(format!("bad tags: {e}")))?,
        None => vec![],
    };
    if let Some(d) = v.get("dominant") {
        let label = d
            .as_str()
            .ok_or_else(|| Error::Structural("\"dominant\" must be an action label".into()))?;
        let a = game
            .action_index(role, label)
            .ok_or_else(|| Error::Structural(format!("unknown action {label:?}")))?;
        let t = PreferenceType::dominant(game, role, a);
        return PreferenceType::new(game, role, t.utilities, tags);
    }
    let utilities = match v.get("utilities") {
        Some(Value::Object(o)) => {
            let mut u: Vec<Option<Q>> = vec![None; game.num_profiles()];
            for (key, x) in o {
                let prof = game.parse_profile_label(key)?;
                u[game.index(&prof)] = Some(q_from_json(x)?);
            }
            u.into_iter()
                .enumerate()
                .map(|(k, x)| {
                    x.ok_or_else(|| {
                        Error::Structural(format!(
                            "utilities miss profile {}",
                            game.profile_label(&game.profile(k))
                        ))
                    })
                })
                .collect::<Result<Vec<Q>>>()?
        }
        Some(Value::Array(a)) => a.iter().map(q_from_json).collect::<Result<Vec<Q>>>()?,
        Some(_) => return structural("\"utilities\" must be an object or an array"),
        None if tags.contains(&Tag::Materialist) => game.tensor(role).to_vec(),
        None if tags.contains(&Tag::Indifferent) => vec![Q::from_integer(0.into()); game.num_profiles()],
        None => return structural("type needs \"utilities\", \"dominant\" or a materialist/indifferent tag"),
    };
    PreferenceType::new(game, role, utilities, tags)
}

fn parse_index_key(key: &str, n: usize) -> Result<Vec<usize>> {
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    if parts.len() != n {
        return structural(format!("type-profile key {key:?} must have {n} indices"));
    }
    parts
        .iter()
        .map(|p| p.parse::<usize>().map_err(|_| Error::Structural(format!("bad type index in {key:?}"))))
        .collect()
}

fn parse_b(game: &Game, mu: &PreferenceDistribution, v: &Value) -> Result<BTreeMap<Vec<usize>, MixedProfile>> {
    let o = v
        .as_object()
        .ok_or_else(|| Error::Structural("\"b\" must be an object".into()))?;
    let parse_prof = |x: &Value| -> Result<MixedProfile> {
        let arr = x
            .as_array()
            .ok_or_else(|| Error::Structural("a profile must be an array of strategies".into()))?;
        if arr.len() != game.n() {
            return structural("a profile needs one strategy per player");
        }
        arr.iter().enumerate().map(|(i, s)| game.strategy_from_json(i, s)).collect()
    };
    let default = o.get("*").map(parse_prof).transpose()?;
    let mut b = BTreeMap::new();
    for (k, x) in o {
        if k != "*" {
            b.insert(parse_index_key(k, game.n())?, parse_prof(x)?);
        }
    }
    for th in mu.support() {
        if !b.contains_key(&th) {
            match &default {
                Some(d) => {
                    b.insert(th, d.clone());
                }
                None => return structural(format!("\"b\" has no entry for types {th:?}")),
            }
        }
    }
    Ok(b)
}

fn parse_s(game: &Game, mu: &PreferenceDistribution, v: &Value) -> Result<Vec<Vec<MixedStrategy>>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Structural("\"s\" must be an array with one object per population".into()))?;
    if arr.len() != game.n() {
        return structural("\"s\" needs one entry per population");
    }
    let mut out = Vec::new();
    for (i, x) in arr.iter().enumerate() {
        let o = x
            .as_object()
            .ok_or_else(|| Error::Structural("each \"s\" entry maps type index to strategy".into()))?;
        let default = o.get("*").map(|d| game.strategy_from_json(i, d)).transpose()?;
        let k = mu.populations[i].types.len();
        let mut si = Vec::new();
        for t in 0..k {
            match o.get(&t.to_string()) {
                Some(st) => si.push(game.strategy_from_json(i, st)?),
                None => match &default {
                    Some(d) => si.push(d.clone()),
                    None => return structural(format!("\"s\" has no strategy for type {t} of population {}", i + 1)),
                },
            }
        }
        out.push(si);
    }
    Ok(out)
}

/// Parses a scenario, checking structure only.
pub fn parse_unchecked(text: &str) -> Result<Configuration> {
    let v: Value = serde_json::from_str(text)?;
    let game = Game::from_json(field(&v, "game", "scenario")?)?;
    let pops = field(&v, "populations", "scenario")?
        .as_array()
        .ok_or_else(|| Error::Structural("\"populations\" must be an array".into()))?;
    if pops.len() != game.n() {
        return structural("one population per player is required");
    }
    let mut populations = Vec::new();
    for (i, p) in pops.iter().enumerate() {
        let types = field(p, "types", "population")?
            .as_array()
            .ok_or_else(|| Error::Structural("\"types\" must be an array".into()))?
            .iter()
            .map(|t| parse_type(&game, i, t))
            .collect::<Result<Vec<_>>>()?;
        let shares = match p.get("shares") {
            Some(s) => s
                .as_array()
                .ok_or_else(|| Error::Structural("\"shares\" must be an array".into()))?
                .iter()
                .map(q_from_json)
                .collect::<Result<Vec<_>>>()?,
            None if types.len() == 1 => vec![Q::from_integer(1.into())],
            None => return structural("\"shares\" is required for polymorphic populations"),
        };
        populations.push(Population { types, shares });
    }
    let mu = PreferenceDistribution { populations };
    mu.check(&game)?;
    let r = field(&v, "regime", "scenario")?;
    let mode = field(r, "mode", "regime")?
        .as_str()
        .ok_or_else(|| Error::Structural("\"mode\" must be a string".into()))?;
    let regime = match mode {
        "p1" => Regime::P1 {
            b: parse_b(&game, &mu, field(r, "b", "regime")?)?,
        },
        "p0" => Regime::P0 {
            s: parse_s(&game, &mu, field(r, "s", "regime")?)?,
        },
        "partial" => {
            let p = match field(r, "p", "regime")? {
                Value::String(s) => parse_q(s)?,
                other => q_from_json(other)?,
            };
            Regime::Partial {
                p,
                b: parse_b(&game, &mu, field(r, "b", "regime")?)?,
                s: parse_s(&game, &mu, field(r, "s", "regime")?)?,
            }
        }
        other => return structural(format!("unknown regime mode {other:?}")),
    };
    Configuration::unchecked(game, mu, regime)
}

/// Parses and validates a scenario.
pub fn parse(text: &str) -> Result<Configuration> {
    let c = parse_unchecked(text)?;
    Configuration::new(c.game, c.mu, c.regime)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PD: &str = r#"{
      "game": {"players": 2, "actions": [["C1","D1"],["C2","D2"]],
               "payoffs": {"C1,C2": ["2","2"], "C1,D2": ["0","3"], "D1,C2": ["3","0"], "D1,D2": ["1","1"]}},
      "populations": [{"types": [{"tags": ["materialist"]}]}, {"types": [{"tags": ["materialist"]}]}],
      "regime": {"mode": "partial", "p": "1/2", "b": {"*": ["D1","D2"]}, "s": [{"*": "D1"}, {"0": "D2"}]}
    }"#;

    #[test]
    fn parses_partial() {
        let c = parse(PD).unwrap();
        assert_eq!(c.regime.mode(), "partial");
    }

    #[test]
    fn parse_error_position() {
        match parse("{\n  \"game\": [,\n}") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_equilibrium_rejected() {
        let bad = PD.replace(r#""*": "D1""#, r#""*": "C1""#);
        assert!(matches!(parse(&bad), Err(Error::Contract(_))));
        assert!(parse_unchecked(&bad).is_ok());
    }
}
