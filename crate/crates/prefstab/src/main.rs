use clap::{Args, Parser, Subcommand};
use prefstab::config::{is_balanced, validate_configuration, Configuration, MutantSubProfile};
use prefstab::dynamics::{simulate, to_csv, ReplicatorRule};
use prefstab::error::Error;
use prefstab::rational::{fmt_q, parse_q, Q};
use prefstab::report::{certificate_json, header, validation_report, verdict_json, verdict_text};
use prefstab::stability::{check_stability, find_invader, post_entry_configuration, StabilityOptions, StabilityVerdict};
use prefstab::{corpus, scenario};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

const OK: u8 = 0;
const OTHER: u8 = 1;
const INVALID: u8 = 2;
const UNSTABLE: u8 = 3;
const UNKNOWN: u8 = 4;

#[derive(Parser)]
#[command(name = "prefstab", version, about = "Evolutionary stability of preference configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the strategies are an equilibrium and report type fitness.
    Validate {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide stability: exit 0 stable, 3 unstable, 4 unknown.
    Stability {
        scenario: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        json: bool,
    },
    /// Look for an invader certificate for one coalition of populations.
    Invade {
        scenario: PathBuf,
        /// Comma-separated populations, counted from 1.
        #[arg(long, value_delimiter = ',', required = true)]
        coalition: Vec<usize>,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        json: bool,
    },
    /// Replicator trajectory as CSV, optionally after an invasion.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: i64,
        /// Inject the invaders found for this coalition (populations counted from 1).
        #[arg(long, value_delimiter = ',')]
        coalition: Vec<usize>,
        /// Mutant share for every coalition member.
        #[arg(long, default_value = "1/100")]
        eps: String,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 12)]
        digits: usize,
    },
    /// Replay the built-in examples and report each check.
    Examples {
        #[arg(long)]
        filter: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct SearchArgs {
    /// Observability: p0, p1, or a rational such as 1/2.
    #[arg(long)]
    p: Option<String>,
    #[arg(long, default_value_t = 10)]
    grid: usize,
    #[arg(long, default_value_t = 3)]
    support_limit: usize,
    #[arg(long)]
    aggregate_fitness: bool,
}

impl SearchArgs {
    fn options(&self) -> StabilityOptions {
        StabilityOptions {
            grid_resolution: self.grid,
            support_limit: self.support_limit,
            aggregate_fitness: self.aggregate_fitness,
            ..StabilityOptions::default()
        }
    }

    fn apply(&self, config: Configuration) -> Result<Configuration, Failure> {
        let Some(p) = &self.p else { return Ok(config) };
        let p: Q = match p.as_str() {
            "p0" => Q::from_integer(0.into()),
            "p1" => Q::from_integer(1.into()),
            s => parse_q(s).map_err(|e| Failure::usage(e.to_string()))?,
        };
        config.with_observability(&p).map_err(Failure::from)
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: String) -> Failure {
        Failure { code: OTHER, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Parse { .. } | Error::Structural(_) | Error::ShareSum(_) | Error::Contract(_) => INVALID,
            _ => OTHER,
        };
        Failure { code, message: e.to_string() }
    }
}

fn load(path: &PathBuf) -> Result<Configuration, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(scenario::parse(&text)?)
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn verdict_code(v: &StabilityVerdict) -> u8 {
    match v {
        StabilityVerdict::Stable(_) => OK,
        StabilityVerdict::Unstable(_) => UNSTABLE,
        StabilityVerdict::Unknown { .. } => UNKNOWN,
    }
}

fn coalition_indices(config: &Configuration, raw: &[usize]) -> Result<Vec<usize>, Failure> {
    let mut out = Vec::new();
    for &j in raw {
        if j == 0 || j > config.n() {
            return Err(Failure::usage(format!("population {j} is out of range 1..={}", config.n())));
        }
        out.push(j - 1);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn validate(path: &PathBuf, as_json: bool) -> Result<u8, Failure> {
    let config = load(path)?;
    let report = validation_report(&config);
    if as_json {
        print_json(&report);
    } else {
        let g = &config.game;
        let r = validate_configuration(&config);
        println!("regime: {}", config.regime.mode());
        println!("equilibrium: {}", if r.ok { "yes" } else { "no" });
        if let Some(v) = &r.violation {
            println!(
                "  population {} gains {} by switching to {} ({} condition)",
                v.player + 1,
                fmt_q(&v.gain),
                g.label(v.player, v.deviation),
                v.condition
            );
        }
        println!("balanced: {}", if is_balanced(&config) { "yes" } else { "no" });
        println!("population  type  share  fitness");
        for (i, pop) in config.mu.populations.iter().enumerate() {
            for t in 0..pop.types.len() {
                let f = prefstab::config::average_fitness(&config, i, t)?;
                println!("{:>10}  {:>4}  {:>5}  {}", i + 1, t + 1, fmt_q(&pop.shares[t]), fmt_q(&f));
            }
        }
        println!();
        print_json(&report);
    }
    if !validate_configuration(&config).ok {
        Ok(INVALID)
    } else if !is_balanced(&config) {
        Ok(UNSTABLE)
    } else {
        Ok(OK)
    }
}

fn stability(path: &PathBuf, search: &SearchArgs, as_json: bool) -> Result<u8, Failure> {
    let config = search.apply(load(path)?)?;
    let options = search.options();
    let verdict = check_stability(&config, &options)?;
    if as_json {
        print_json(&verdict_json(&config, &verdict, &options));
    } else {
        print!("{}", verdict_text(&config, &verdict));
    }
    Ok(verdict_code(&verdict))
}

fn invade(path: &PathBuf, coalition: &[usize], search: &SearchArgs, as_json: bool) -> Result<u8, Failure> {
    let config = search.apply(load(path)?)?;
    let options = search.options();
    let coalition = coalition_indices(&config, coalition)?;
    let found = find_invader(&config, &coalition, &options)?;
    if as_json {
        let mut m = header(Some(&options));
        m.insert(
            "coalition".into(),
            json!(coalition.iter().map(|j| j + 1).collect::<Vec<_>>()),
        );
        m.insert(
            "certificate".into(),
            found.as_ref().map(|c| certificate_json(&config.game, c)).unwrap_or(Value::Null),
        );
        print_json(&Value::Object(m));
    } else {
        match &found {
            Some(c) => {
                let v = StabilityVerdict::Unstable(prefstab::stability::Instability::Certificate(Box::new(c.clone())));
                print!("{}", verdict_text(&config, &v));
            }
            None => println!("no invader found within the search limits"),
        }
    }
    Ok(if found.is_some() { UNSTABLE } else { UNKNOWN })
}

fn run_simulation(
    path: &PathBuf,
    steps: i64,
    coalition: &[usize],
    eps: &str,
    search: &SearchArgs,
    digits: usize,
) -> Result<u8, Failure> {
    let config = search.apply(load(path)?)?;
    let start = if coalition.is_empty() {
        config
    } else {
        let coalition = coalition_indices(&config, coalition)?;
        let eps = parse_q(eps).map_err(|e| Failure::usage(e.to_string()))?;
        let Some(c) = find_invader(&config, &coalition, &search.options())? else {
            return Err(Failure { code: UNKNOWN, message: "no invader found for this coalition".into() });
        };
        let mutants = MutantSubProfile::new(coalition.clone(), c.mutant_types.clone(), vec![eps; coalition.len()])?;
        let post = post_entry_configuration(&config, &mutants, &c.assignment)?;
        if !validate_configuration(&post).ok {
            return Err(Failure {
                code: INVALID,
                message: "the invader assignment is not an equilibrium at this share".into(),
            });
        }
        post
    };
    let points = simulate(&start, steps, &ReplicatorRule::for_config(&start))?;
    print!("{}", to_csv(&points, digits));
    Ok(OK)
}

fn examples(filter: Option<&str>, as_json: bool) -> u8 {
    let checks = corpus::run(filter);
    if as_json {
        let mut m = header(None);
        m.insert(
            "checks".into(),
            Value::Array(
                checks
                    .iter()
                    .map(|c| json!({"example": c.example, "check": c.name, "passed": c.passed, "detail": c.detail}))
                    .collect(),
            ),
        );
        print_json(&Value::Object(m));
    } else {
        for c in &checks {
            println!("{} {}: {} ({})", if c.passed { "pass" } else { "FAIL" }, c.example, c.name, c.detail);
        }
        let failed = checks.iter().filter(|c| !c.passed).count();
        println!("{} checks, {} failed", checks.len(), failed);
    }
    if checks.iter().all(|c| c.passed) {
        OK
    } else {
        OTHER
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("PREFSTAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { OTHER } else { OK });
        }
    };
    configure_threads();
    let result = match &cli.command {
        Command::Validate { scenario, json } => validate(scenario, *json),
        Command::Stability { scenario, search, json } => stability(scenario, search, *json),
        Command::Invade { scenario, coalition, search, json } => invade(scenario, coalition, search, *json),
        Command::Simulate { scenario, steps, coalition, eps, search, digits } => {
            run_simulation(scenario, *steps, coalition, eps, search, *digits)
        }
        Command::Examples { filter, json } => Ok(examples(filter.as_deref(), *json)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
