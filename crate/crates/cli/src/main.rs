//! Command-line front end: every subcommand takes JSON on the command line,
//! from a file (`@path`), or on stdin, and emits a JSON report stamped with
//! the tool version and an input hash. Exit codes: 0 success/consistent,
//! 2 inconsistency found, 3 hypotheses unverifiable, 64 malformed input,
//! 65 mathematical precondition failure.

use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::Zero;
use serde_json::{json, Value};

use fourforms::counterexamples::{haar_construction, identity_construction, prop2_construction};
use fourforms::elimination::eliminate;
use fourforms::engine::{q_mode_check, special_case_derivations, sweep, SpecialCase, SweepConfig};
use fourforms::error::Error;
use fourforms::forms::{condition_indices, identically_distributed, joint_pmf, Mode};
use fourforms::json as schema;
use fourforms::reduction::{reduce_coefficients, Reduction};
use fourforms::spectral::nonvanishing;
use fourforms::{admissible, verify_instance, Group, Pmf, Rat};

#[derive(Parser)]
#[command(
    name = "fourforms",
    version,
    about = "Exact identical-distribution checking on finitely generated abelian groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether an integer acts non-trivially on a group
    Admissible {
        /// Group: JSON or shorthand like Z, Z^2, Z3, Z2xZ6
        group: String,
        /// The integer to test
        scalar: String,
    },
    /// Structurally classify a pmf (degenerate / haar shift / other)
    Classify {
        /// Pmf JSON ('@file' or '-' for stdin)
        pmf: Option<String>,
    },
    /// Exact joint laws of (L1,L2) and (L3,L4) for an instance
    Joint {
        /// Instance JSON
        spec: Option<String>,
    },
    /// Exact identical-distribution test for an instance
    Check {
        /// Instance JSON
        spec: Option<String>,
    },
    /// Full hypothesis/conclusion verdict for an instance
    Verify {
        /// Instance JSON (or a counterexample certificate)
        spec: Option<String>,
    },
    /// Symbolic finite-difference elimination for a form system
    Eliminate(EliminateArgs),
    /// Coefficient reduction with case routing
    Reduce {
        /// Form system JSON ({"a":[..],"b":[..],"c":[..],"d":[..]})
        system: String,
        /// Group: JSON or shorthand
        group: String,
    },
    /// Emit a certified witness instance
    #[command(subcommand)]
    Counterexample(CounterexampleCommand),
    /// Reproduce a special-case substitution derivation with certification
    SpecialCase {
        /// x3_heyde or x2_darmois
        kind: String,
    },
    /// Randomized theorem-consistency sweep (JSON lines + summary)
    Sweep(SweepArgs),
}

#[derive(Args)]
struct EliminateArgs {
    /// Form system JSON; alternatively give --a/--b/--c/--d
    system: Option<String>,
    /// Comma-separated coefficients of L1
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    d: Option<String>,
    /// Number of left-hand functions (default: all)
    #[arg(long)]
    m: Option<usize>,
    /// Degree of the polynomial summand, if present
    #[arg(long)]
    q_degree: Option<usize>,
    /// Print the human-readable trace instead of JSON
    #[arg(long)]
    trace: bool,
}

#[derive(Subcommand)]
enum CounterexampleCommand {
    /// Two-point law on an order-p element; both pair laws coincide exactly
    Prop2 {
        #[arg(long)]
        group: String,
        /// Element JSON; defaults to the first prime-order torsion element
        #[arg(long)]
        x0: Option<String>,
        /// Weight m with 1/2 < m < 1, e.g. 3/5
        #[arg(long, default_value = "3/5")]
        m: String,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Haar-tail construction on the 2- or 3-element group
    Haar {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// JSON array of atom arrays for the leading laws (defaults provided)
        #[arg(long)]
        leading: Option<String>,
    },
    /// The identity-shaped system with an empty condition set
    Identity {
        /// Pmf JSON
        pmf: Option<String>,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep seed (fixed default for reproducibility)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of instances
    #[arg(long, default_value_t = 2000)]
    count: usize,
    /// Comma-separated groups (shorthand), default Z3,Z5,Z
    #[arg(long)]
    groups: Option<String>,
    /// Variables per instance
    #[arg(long, default_value_t = 2)]
    variables: usize,
    /// Coefficient bound
    #[arg(long, default_value_t = 2)]
    bound: i64,
    /// Worker threads (or FOURFORMS_WORKERS)
    #[arg(long)]
    workers: Option<usize>,
    /// Emit only the summary, not per-instance lines
    #[arg(long)]
    summary_only: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify_error(&err))
        }
    }
}

fn classify_error(err: &Error) -> u8 {
    match err {
        Error::Schema(_) | Error::InvalidGroup(_) | Error::InvalidPmf(_) => 64,
        _ => 65,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Admissible { group, scalar } => {
            let group = parse_group(&group)?;
            let value: BigInt = scalar
                .parse()
                .map_err(|_| Error::Schema(format!("bad integer {scalar:?}")))?;
            let result = admissible(&group, &value);
            println!("{result}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { pmf } => {
            let text = read_input(pmf)?;
            let pmf = schema::pmf_from_json(&parse_json(&text)?)?;
            let classification = pmf.classify();
            let vanishing_report = nonvanishing(&pmf);
            let report = json!({
                "classification": classification.label(),
                "detail": classification.to_string(),
                "nonvanishing": vanishing_report.nonvanishing,
                "nonvanishing_exhaustive": vanishing_report.exhaustive,
            });
            print_report(report, &text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Joint { spec } => {
            let text = read_input(spec)?;
            let spec = schema::instance_from_json(&parse_json(&text)?)?;
            let lhs = joint_pmf(spec.system().a(), spec.system().b(), spec.dists())?;
            let rhs = joint_pmf(spec.system().c(), spec.system().d(), spec.dists())?;
            let report = json!({
                "first_pair": schema::pmf_to_json(&lhs),
                "second_pair": schema::pmf_to_json(&rhs),
                "equal": lhs == rhs,
            });
            print_report(report, &text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { spec } => {
            let text = read_input(spec)?;
            let spec = schema::instance_from_json(&parse_json(&text)?)?;
            let identical = identically_distributed(&spec)?;
            let report = json!({
                "identically_distributed": identical,
                "condition_set": condition_indices(spec.system(), spec.group())
                    .iter().map(|i| i + 1).collect::<Vec<_>>(),
            });
            print_report(report, &text);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { spec } => {
            let text = read_input(spec)?;
            let value = parse_json(&text)?;
            let (instance_value, certificate) = pick_instance(value);
            let spec = schema::instance_from_json(&instance_value)?;
            let mut verdict = match spec.mode() {
                Mode::QIndependent => q_mode_check(&spec)?,
                Mode::Independent => verify_instance(&spec)?,
            };
            if let Some(cert) = certificate {
                annotate_from_certificate(&mut verdict, &spec, &cert);
            }
            let code = verdict.exit_code() as u8;
            print_report(verdict.to_json(), &text);
            Ok(ExitCode::from(code))
        }
        Command::Eliminate(args) => {
            let (system, text) = eliminate_system(&args)?;
            let lhs_count = args.m.unwrap_or(system.len());
            let derivation = eliminate(&system, lhs_count, args.q_degree)?;
            if args.trace {
                print!("{}", derivation.trace());
            } else {
                print_report(derivation.to_json(), &text);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Reduce { system, group } => {
            let system_value = parse_json(&read_input(Some(system))?)?;
            let system = schema::system_from_json(&system_value)?;
            let group = parse_group(&group)?;
            // renumber the condition indices to the front
            let condition = condition_indices(&system, &group);
            if condition.is_empty() {
                return Err(Error::Precondition(
                    "no index satisfies the admissibility condition".into(),
                ));
            }
            let mut order: Vec<usize> = condition.clone();
            order.extend((0..system.len()).filter(|j| !condition.contains(j)));
            let permuted = system.permuted(&order);
            let report = match reduce_coefficients(&permuted, &group, condition.len())? {
                Reduction::CaseOne(reduced) => json!({
                    "case": 1,
                    "variable_order": order.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "reduced": reduced.to_json(),
                }),
                Reduction::CaseTwo(route) => json!({
                    "case": 2,
                    "variable_order": order.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "substitution": {
                        "u": format!("{}·y", route.u_coefficient),
                        "v": format!("{}·y", route.v_coefficient),
                    },
                    "product_coefficients": route.product_coefficients.iter()
                        .map(|x| x.to_string()).collect::<Vec<_>>(),
                    "lhs_kill_coefficients": route.lhs_kill_coefficients.iter()
                        .map(|x| x.to_string()).collect::<Vec<_>>(),
                    "fully_collapses": route.fully_collapses,
                }),
            };
            print_report(report, &format!("{system_value}{group}"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Counterexample(kind) => {
            let (certificate, input) = match kind {
                CounterexampleCommand::Prop2 { group, x0, m, n } => {
                    let group = parse_group(&group)?;
                    let x0 = match x0 {
                        Some(text) => schema::element_from_json(&group, &parse_json(&text)?)?,
                        None => default_prime_order_element(&group)?,
                    };
                    let weight = parse_rational(&m)?;
                    (
                        prop2_construction(&group, &x0, weight, n)?,
                        format!("prop2 {group} {m}"),
                    )
                }
                CounterexampleCommand::Haar { group, n, leading } => {
                    let group = parse_group(&group)?;
                    let leading = match leading {
                        Some(text) => {
                            let value = parse_json(&text)?;
                            let entries = value.as_array().ok_or_else(|| {
                                Error::Schema("leading must be a JSON array".into())
                            })?;
                            entries
                                .iter()
                                .map(|e| schema::pmf_from_atoms_json(&group, e))
                                .collect::<Result<Vec<_>, _>>()?
                        }
                        None => vec![default_skewed_pmf(&group)?; n.saturating_sub(2)],
                    };
                    (
                        haar_construction(&group, n, leading)?,
                        format!("haar {group} {n}"),
                    )
                }
                CounterexampleCommand::Identity { pmf } => {
                    let text = read_input(pmf)?;
                    let mu = schema::pmf_from_json(&parse_json(&text)?)?;
                    (identity_construction(mu)?, text)
                }
            };
            print_report(certificate.to_json(), &input);
            Ok(ExitCode::SUCCESS)
        }
        Command::SpecialCase { kind } => {
            let case = match kind.as_str() {
                "x3_heyde" => SpecialCase::X3Heyde,
                "x2_darmois" => SpecialCase::X2Darmois,
                other => {
                    return Err(Error::Schema(format!(
                        "unknown special case {other:?}; use x3_heyde or x2_darmois"
                    )))
                }
            };
            let report = special_case_derivations(case)?;
            let ok = report.all_identity_tuples_degenerate;
            print_report(report.to_json(), &kind);
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Sweep(args) => {
            let groups = match &args.groups {
                Some(spec) => spec
                    .split(',')
                    .map(parse_group)
                    .collect::<Result<Vec<_>, _>>()?,
                None => vec![Group::cyclic(3), Group::cyclic(5), Group::lattice(1)],
            };
            let workers = args
                .workers
                .or_else(|| {
                    std::env::var("FOURFORMS_WORKERS")
                        .ok()
                        .and_then(|v| v.parse().ok())
                })
                .unwrap_or(1);
            let mut config = SweepConfig {
                count: args.count,
                groups,
                variables: args.variables,
                coefficient_bound: args.bound,
                workers,
                ..Default::default()
            };
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            let outcome = sweep(&config)?;
            if !args.summary_only {
                for record in &outcome.records {
                    println!("{}", record.to_json());
                }
            }
            let summary = outcome.summary_json(&config);
            print_report(summary, &format!("{}", config.seed));
            Ok(if outcome.inconsistent == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
    }
}

/// Accepts a bare instance, a counterexample certificate, or a wrapped
/// report; returns the instance object plus the surrounding certificate.
fn pick_instance(value: Value) -> (Value, Option<Value>) {
    if value.get("instance").is_some() {
        return (value["instance"].clone(), Some(value));
    }
    if let Some(report) = value.get("report") {
        if report.get("instance").is_some() {
            return (report["instance"].clone(), Some(report.clone()));
        }
    }
    (value, None)
}

/// Folds a counterexample certificate's claims into the verdict notes: which
/// indices the construction targets and how their laws classify there.
fn annotate_from_certificate(
    verdict: &mut fourforms::Verdict,
    spec: &fourforms::InstanceSpec,
    certificate: &Value,
) {
    let Some(kind) = certificate.get("kind").and_then(Value::as_str) else {
        return;
    };
    let targets: Vec<usize> = certificate
        .get("condition_set")
        .and_then(Value::as_array)
        .map(|items| {
            items
                .iter()
                .filter_map(Value::as_u64)
                .map(|i| i as usize - 1)
                .collect()
        })
        .unwrap_or_default();
    for &index in &targets {
        if index >= spec.dists().len() {
            continue;
        }
        let classification = spec.dists()[index].classify();
        if !classification.is_degenerate() {
            verdict.notes.push(format!(
                "{kind} construction targets variable {}: conclusion fails there \
                 (classification {classification})",
                index + 1,
            ));
        }
    }
    if verdict.condition_set.is_empty() && !targets.is_empty() {
        verdict.notes.push(format!(
            "the targeted determinants act trivially on this group, so the ambient \
             condition set is empty; see the {kind} certificate"
        ));
    }
}

fn eliminate_system(args: &EliminateArgs) -> Result<(fourforms::FormSystem, String), Error> {
    if let (Some(a), Some(b), Some(c), Some(d)) = (&args.a, &args.b, &args.c, &args.d) {
        let parse = |v: &str| -> Result<Vec<i64>, Error> {
            v.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Schema(format!("bad coefficient {tok:?}")))
                })
                .collect()
        };
        let system =
            fourforms::FormSystem::from_i64(&parse(a)?, &parse(b)?, &parse(c)?, &parse(d)?)?;
        return Ok((system, format!("{a}|{b}|{c}|{d}")));
    }
    let text = read_input(args.system.clone())?;
    let system = schema::system_from_json(&parse_json(&text)?)?;
    Ok((system, text))
}

/// First torsion element of prime order, for prop2 defaults.
fn default_prime_order_element(group: &Group) -> Result<fourforms::GroupElement, Error> {
    for candidate in group.torsion_elements() {
        if let Some(order) = fourforms::counterexamples::element_order(&candidate) {
            if order >= 2 && is_prime_u64(order) {
                return Ok(candidate);
            }
        }
    }
    Err(Error::Precondition(format!(
        "{group} has no element of prime order"
    )))
}

fn is_prime_u64(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Mildly skewed two-point law used as the default leading distribution.
fn default_skewed_pmf(group: &Group) -> Result<Pmf, Error> {
    let one = group
        .torsion_elements()
        .into_iter()
        .find(|e| !e.is_zero())
        .ok_or_else(|| Error::Precondition(format!("{group} has no torsion")))?;
    Pmf::from_weights(
        group,
        vec![
            (group.zero(), Ratio::new(BigInt::from(3), BigInt::from(4))),
            (one, Ratio::new(BigInt::from(1), BigInt::from(4))),
        ],
    )
}

fn parse_rational(text: &str) -> Result<Rat, Error> {
    let mut parts = text.splitn(2, '/');
    let num: BigInt = parts
        .next()
        .unwrap()
        .trim()
        .parse()
        .map_err(|_| Error::Schema(format!("bad rational {text:?}")))?;
    let den: BigInt = match parts.next() {
        Some(d) => d
            .trim()
            .parse()
            .map_err(|_| Error::Schema(format!("bad rational {text:?}")))?,
        None => BigInt::from(1),
    };
    if den.is_zero() {
        return Err(Error::Schema("zero denominator".into()));
    }
    Ok(Ratio::new(num, den))
}

/// Accepts group JSON or shorthand like "Z", "Z^2", "Z3", "Z(3)", "Z2xZ6".
fn parse_group(text: &str) -> Result<Group, Error> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        return schema::group_from_json(&parse_json(trimmed)?);
    }
    let mut rank = 0usize;
    let mut factors = Vec::new();
    for token in trimmed.split(['x', '*']) {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let rest = token
            .strip_prefix('Z')
            .or_else(|| token.strip_prefix('z'))
            .ok_or_else(|| Error::Schema(format!("bad group token {token:?}")))?;
        let rest = rest.trim();
        if rest.is_empty() {
            rank += 1;
        } else if let Some(power) = rest.strip_prefix('^') {
            rank += power
                .parse::<usize>()
                .map_err(|_| Error::Schema(format!("bad lattice power {token:?}")))?;
        } else {
            let inner = rest
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .unwrap_or(rest);
            factors.push(
                inner
                    .parse::<u64>()
                    .map_err(|_| Error::Schema(format!("bad cyclic order {token:?}")))?,
            );
        }
    }
    Group::from_cyclic_orders(rank, &factors)
}

fn read_input(arg: Option<String>) -> Result<String, Error> {
    match arg {
        Some(text) if text == "-" => read_stdin(),
        Some(text) => match text.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path)
                .map_err(|e| Error::Schema(format!("cannot read {path}: {e}"))),
            None => Ok(text),
        },
        None => read_stdin(),
    }
}

fn read_stdin() -> Result<String, Error> {
    let mut buffer = String::new();
    std::io::stdin()
        .read_to_string(&mut buffer)
        .map_err(|e| Error::Schema(format!("cannot read stdin: {e}")))?;
    Ok(buffer)
}

fn parse_json(text: &str) -> Result<Value, Error> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("bad JSON: {e}")))
}

fn print_report(report: Value, input: &str) {
    let wrapped = json!({
        "tool": { "name": "fourforms", "version": env!("CARGO_PKG_VERSION") },
        "input_hash": schema::fnv64_hex(input.as_bytes()),
        "report": report,
    });
    println!("{}", serde_json::to_string_pretty(&wrapped).unwrap());
}
