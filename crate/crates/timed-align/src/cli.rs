//! Command-line surface. Thin plumbing around the library: each
//! subcommand reads its files, calls one library entry point, and
//! renders the result as plain text or JSON.
//!
//! Exit codes form the machine-readable contract:
//!
//! | code | meaning                                              |
//! |------|------------------------------------------------------|
//! | 0    | success; for `validate`, the trace is valid          |
//! | 1    | `validate` ran fine and the verdict is invalid       |
//! | 2    | unreadable input: bad flags, files, or parse errors  |
//! | 3    | precondition failed (not a run, not linear, not EFC) |
//! | 4    | no valid timing / no usable aligned candidate        |
//! | 5    | exhaustive-search size guard tripped                 |

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::causal::{
    chain_intervals, delay_distance, is_valid_timing, manhattan, unroll_prefix, CausalProcess,
    NotLinear, TimingFunction, UnrollError, ValidityVerdict,
};
use crate::delay::{align_delay, DelayError};
use crate::fixtures::looping_pair_net;
use crate::general::{
    align_general, CostConfig, EditOp, GeneralAlignment, GeneralError,
};
use crate::io::{
    parse_net, parse_trace, resolve_trace, serialize_trace, NetParseError, ResolveError,
    TimedTrace, TraceParseError, TraceStep,
};
use crate::oracle::{mixed_distance, Metric, OracleError};
use crate::stamp::{align_stamp, cost_graphs, export_lp, ExportError, StampError};
use crate::synth::linear_instance_of_len;
use crate::time::{format_time, parse_time, Time, TimeParseError};
use crate::tpn::{simulate_random, SimulateError, TimePetriNet, TransitionId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NO_TIMING: i32 = 4;
pub const EXIT_GUARD: i32 = 5;

/// Anything a subcommand can fail with, bucketed by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Net {
        path: PathBuf,
        #[source]
        source: NetParseError,
    },
    #[error("{path}: {source}")]
    Trace {
        path: PathBuf,
        #[source]
        source: TraceParseError,
    },
    #[error("{path}: {source}")]
    Resolve {
        path: PathBuf,
        #[source]
        source: ResolveError,
    },
    #[error("--{flag}: {source}")]
    Flag {
        flag: &'static str,
        #[source]
        source: TimeParseError,
    },
    #[error(transparent)]
    Config(#[from] crate::general::ConfigError),
    #[error(transparent)]
    NotARun(UnrollError),
    #[error(transparent)]
    NotLinear(#[from] NotLinear),
    #[error("net is not extended free choice; delay alignment is undefined on it")]
    NotEfc,
    #[error("the traces resolve to different runs; distances compare two timings of one run")]
    RunsDiffer,
    #[error("the trace is empty; nothing to export")]
    EmptyTrace,
    #[error(transparent)]
    Simulate(SimulateError),
    #[error(transparent)]
    General(GeneralError),
    #[error("{0}")]
    NoValidTiming(String),
    #[error("{0}")]
    Guard(String),
    /// Library-reported inconsistency that the CLI's own plumbing should
    /// have made impossible (mismatched lengths, foreign processes).
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Io { .. }
            | CliError::Net { .. }
            | CliError::Trace { .. }
            | CliError::Resolve { .. }
            | CliError::Flag { .. }
            | CliError::Config(_) => EXIT_PARSE,
            CliError::NotARun(_)
            | CliError::NotLinear(_)
            | CliError::NotEfc
            | CliError::RunsDiffer
            | CliError::EmptyTrace
            | CliError::Simulate(_)
            | CliError::Internal(_) => EXIT_PRECONDITION,
            CliError::General(GeneralError::EmptyLanguage) => EXIT_PRECONDITION,
            CliError::General(GeneralError::NoUsableCandidate { .. }) => EXIT_NO_TIMING,
            CliError::NoValidTiming(_) => EXIT_NO_TIMING,
            CliError::Guard(_) => EXIT_GUARD,
        }
    }
}

fn internal(err: impl std::fmt::Display) -> CliError {
    CliError::Internal(err.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Stamp,
    Delay,
}

impl MetricArg {
    fn metric(self) -> Metric {
        match self {
            MetricArg::Stamp => Metric::Stamp,
            MetricArg::Delay => Metric::Delay,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DistanceMetricArg {
    Stamp,
    Delay,
    Mixed,
}

#[derive(Parser)]
#[command(
    name = "timed-align",
    version,
    about = "Timed conformance checking for time Petri nets"
)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether a timed trace is a valid execution of a net.
    Validate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Align a timed trace: repair its timestamps against its own run,
    /// or (with --general) also search nearby runs via edit operations.
    Align {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// Timing distance to minimize.
        #[arg(long, value_enum, default_value_t = MetricArg::Stamp)]
        metric: MetricArg,
        /// Search over candidate runs with inserts and deletes instead
        /// of keeping the observed run fixed.
        #[arg(long)]
        general: bool,
        /// Candidate runs to examine in general mode.
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Cost of one insert or delete in general mode (rational).
        #[arg(long, default_value = "1")]
        ca: String,
        /// Weight of one unit of timing distance in general mode (rational).
        #[arg(long, default_value = "1")]
        ct: String,
    },
    /// Distance between two timed traces over the same run of a net.
    Distance {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        t1: PathBuf,
        #[arg(long)]
        t2: PathBuf,
        #[arg(long, value_enum, default_value_t = DistanceMetricArg::Stamp)]
        metric: DistanceMetricArg,
    },
    /// Sample a random valid timed run of a net and print it as a trace.
    Generate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Give up if the final marking is not reached within this many events.
        #[arg(long, default_value_t = 64)]
        max_events: usize,
    },
    /// Print the stamp-alignment problem of a trace as a linear program.
    ExportLp {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Print the per-prefix cost functions of a stamp alignment, one
    /// line per function, for external plotting.
    DumpGraphs {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Time the aligners on random instances of the given sizes and
    /// print `size,seconds` rows.
    Bench {
        #[arg(long, value_enum, default_value_t = MetricArg::Stamp)]
        metric: MetricArg,
        /// Comma-separated instance sizes (events per run).
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Repetitions per size; the median is reported.
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

/// Exit code plus the rendered report. Reports for codes 0 and 1 belong
/// on stdout, everything else on stderr.
pub struct CommandOutcome {
    pub code: i32,
    pub report: String,
}

struct Outcome {
    code: i32,
    text: String,
    json: Value,
}

impl Outcome {
    fn ok(text: String, json: Value) -> Outcome {
        Outcome {
            code: EXIT_OK,
            text,
            json,
        }
    }
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run_command<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
            return CommandOutcome {
                code,
                report: err.render().to_string(),
            };
        }
    };
    let format = cli.format;
    match dispatch(cli.command) {
        Ok(outcome) => CommandOutcome {
            code: outcome.code,
            report: match format {
                Format::Text => outcome.text,
                Format::Json => format!("{}\n", outcome.json),
            },
        },
        Err(err) => {
            let code = err.code();
            let report = match format {
                Format::Text => format!("error: {err}\n"),
                Format::Json => format!("{}\n", json!({ "error": err.to_string(), "code": code })),
            };
            CommandOutcome { code, report }
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate { net, trace } => cmd_validate(&net, &trace),
        Command::Align {
            net,
            trace,
            metric,
            general,
            k,
            ca,
            ct,
        } => {
            if general {
                cmd_align_general(&net, &trace, metric, k, &ca, &ct)
            } else {
                cmd_align_fixed_run(&net, &trace, metric)
            }
        }
        Command::Distance { net, t1, t2, metric } => cmd_distance(&net, &t1, &t2, metric),
        Command::Generate {
            net,
            seed,
            max_events,
        } => cmd_generate(&net, seed, max_events),
        Command::ExportLp { net, trace } => cmd_export_lp(&net, &trace),
        Command::DumpGraphs { net, trace } => cmd_dump_graphs(&net, &trace),
        Command::Bench {
            metric,
            sizes,
            reps,
            seed,
        } => cmd_bench(metric, &sizes, reps.max(1), seed),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_net(path: &Path) -> Result<TimePetriNet, CliError> {
    parse_net(&read(path)?).map_err(|source| CliError::Net {
        path: path.to_path_buf(),
        source,
    })
}

fn load_trace(path: &Path) -> Result<TimedTrace, CliError> {
    parse_trace(&read(path)?).map_err(|source| CliError::Trace {
        path: path.to_path_buf(),
        source,
    })
}

fn load_resolved(
    net: &TimePetriNet,
    path: &Path,
) -> Result<(Vec<TransitionId>, Vec<Time>), CliError> {
    let trace = load_trace(path)?;
    resolve_trace(net, &trace).map_err(|source| CliError::Resolve {
        path: path.to_path_buf(),
        source,
    })
}

fn joined_times(values: &[Time]) -> String {
    values
        .iter()
        .map(format_time)
        .collect::<Vec<_>>()
        .join(",")
}

fn json_times(values: &[Time]) -> Value {
    Value::Array(values.iter().map(|t| Value::String(format_time(t))).collect())
}

fn cmd_validate(net_path: &Path, trace_path: &Path) -> Result<Outcome, CliError> {
    let net = load_net(net_path)?;
    let (run, stamps) = load_resolved(&net, trace_path)?;
    let cp = match unroll_prefix(&net, &run) {
        Ok(cp) => cp,
        // A trace whose transition sequence cannot fire is an invalid
        // observation, not a usage error.
        Err(err @ (UnrollError::NotFireable { .. } | UnrollError::Unsafe { .. })) => {
            return Ok(Outcome {
                code: EXIT_INVALID,
                text: format!("invalid: {err}\n"),
                json: json!({ "verdict": "invalid", "reason": err.to_string() }),
            });
        }
        Err(err) => return Err(CliError::NotARun(err)),
    };
    let tau = TimingFunction::from_times(stamps);
    match is_valid_timing(&net, &cp, &tau).map_err(internal)? {
        ValidityVerdict::Valid => Ok(Outcome::ok(
            "valid\n".to_string(),
            json!({ "verdict": "valid" }),
        )),
        ValidityVerdict::Invalid { event, violation } => {
            let name = net.transition_name(cp.transition_of(event)).to_string();
            Ok(Outcome {
                code: EXIT_INVALID,
                text: format!("invalid: event {} (`{name}`): {violation}\n", event.0),
                json: json!({
                    "verdict": "invalid",
                    "event": event.0,
                    "transition": name,
                    "reason": violation.to_string(),
                }),
            })
        }
    }
}

fn unrolled(net: &TimePetriNet, run: &[TransitionId]) -> Result<CausalProcess, CliError> {
    unroll_prefix(net, run).map_err(CliError::NotARun)
}

fn cmd_align_fixed_run(
    net_path: &Path,
    trace_path: &Path,
    metric: MetricArg,
) -> Result<Outcome, CliError> {
    let net = load_net(net_path)?;
    let (run, stamps) = load_resolved(&net, trace_path)?;
    let cp = unrolled(&net, &run)?;
    match metric {
        MetricArg::Stamp => {
            if run.is_empty() {
                return Ok(Outcome::ok(
                    "cost 0\ngamma \n".to_string(),
                    json!({ "cost": "0", "gamma": [] }),
                ));
            }
            let intervals = chain_intervals(&net, &cp)?;
            let al = align_stamp(&intervals, &stamps).map_err(internal)?;
            Ok(Outcome::ok(
                format!(
                    "cost {}\ngamma {}\n",
                    format_time(&al.cost),
                    joined_times(al.gamma.values())
                ),
                json!({
                    "cost": format_time(&al.cost),
                    "gamma": json_times(al.gamma.values()),
                }),
            ))
        }
        MetricArg::Delay => {
            let tau = TimingFunction::from_times(stamps);
            let al = align_delay(&net, &cp, &tau).map_err(|err| match err {
                DelayError::NotEfc => CliError::NotEfc,
                DelayError::NoValidTiming { .. } => CliError::NoValidTiming(err.to_string()),
                other => internal(other),
            })?;
            Ok(Outcome::ok(
                format!(
                    "cost {}\ngamma {}\nflow {}\n",
                    format_time(&al.cost),
                    joined_times(al.gamma.values()),
                    joined_times(al.flow_gamma.values())
                ),
                json!({
                    "cost": format_time(&al.cost),
                    "gamma": json_times(al.gamma.values()),
                    "flow": json_times(al.flow_gamma.values()),
                }),
            ))
        }
    }
}

fn script_text(net: &TimePetriNet, script: &[EditOp]) -> String {
    script
        .iter()
        .map(|op| match op {
            EditOp::Match {
                position,
                transition,
            } => format!("match({position},{})", net.transition_name(*transition)),
            EditOp::Delete { position } => format!("delete({position})"),
            EditOp::Insert { transition } => {
                format!("insert({})", net.transition_name(*transition))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn script_json(net: &TimePetriNet, script: &[EditOp]) -> Value {
    Value::Array(
        script
            .iter()
            .map(|op| match op {
                EditOp::Match {
                    position,
                    transition,
                } => json!({
                    "op": "match",
                    "position": position,
                    "transition": net.transition_name(*transition),
                }),
                EditOp::Delete { position } => json!({ "op": "delete", "position": position }),
                EditOp::Insert { transition } => json!({
                    "op": "insert",
                    "transition": net.transition_name(*transition),
                }),
            })
            .collect(),
    )
}

fn general_outcome(net: &TimePetriNet, al: &GeneralAlignment) -> Outcome {
    let aligned_text = al
        .aligned_word
        .iter()
        .map(|(label, stamp)| format!("{label}@{}", format_time(stamp)))
        .collect::<Vec<_>>()
        .join(",");
    Outcome::ok(
        format!(
            "total {}\naction-cost {}\ntime-cost {}\naligned {aligned_text}\nscript {}\n",
            format_time(&al.total),
            format_time(&al.action_cost),
            format_time(&al.time_cost),
            script_text(net, &al.edit_script)
        ),
        json!({
            "total": format_time(&al.total),
            "action_cost": format_time(&al.action_cost),
            "time_cost": format_time(&al.time_cost),
            "aligned": al
                .aligned_word
                .iter()
                .map(|(label, stamp)| json!([label, format_time(stamp)]))
                .collect::<Vec<_>>(),
            "script": script_json(net, &al.edit_script),
        }),
    )
}

fn cmd_align_general(
    net_path: &Path,
    trace_path: &Path,
    metric: MetricArg,
    k: usize,
    ca: &str,
    ct: &str,
) -> Result<Outcome, CliError> {
    let net = load_net(net_path)?;
    let word = load_trace(trace_path)?.pairs();
    let ca = parse_time(ca).map_err(|source| CliError::Flag { flag: "ca", source })?;
    let ct = parse_time(ct).map_err(|source| CliError::Flag { flag: "ct", source })?;
    let config = CostConfig::new(ca, ct, k)?;
    let al = align_general(&net, &word, &config, metric.metric()).map_err(CliError::General)?;
    Ok(general_outcome(&net, &al))
}

fn cmd_distance(
    net_path: &Path,
    t1_path: &Path,
    t2_path: &Path,
    metric: DistanceMetricArg,
) -> Result<Outcome, CliError> {
    let net = load_net(net_path)?;
    let (run1, stamps1) = load_resolved(&net, t1_path)?;
    let (run2, stamps2) = load_resolved(&net, t2_path)?;
    if run1 != run2 {
        return Err(CliError::RunsDiffer);
    }
    let tau1 = TimingFunction::from_times(stamps1);
    let tau2 = TimingFunction::from_times(stamps2);
    let distance = match metric {
        DistanceMetricArg::Stamp => manhattan(&tau1, &tau2).map_err(internal)?,
        DistanceMetricArg::Delay => {
            let cp = unrolled(&net, &run1)?;
            delay_distance(&cp, &tau1, &tau2).map_err(internal)?
        }
        DistanceMetricArg::Mixed => {
            let cp = unrolled(&net, &run1)?;
            mixed_distance(&cp, &tau1, &tau2).map_err(|err| match err {
                OracleError::TooManyEvents { .. } => CliError::Guard(err.to_string()),
                other => internal(other),
            })?
        }
    };
    Ok(Outcome::ok(
        format!("{}\n", format_time(&distance)),
        json!({ "distance": format_time(&distance) }),
    ))
}

fn cmd_generate(net_path: &Path, seed: u64, max_events: usize) -> Result<Outcome, CliError> {
    let net = load_net(net_path)?;
    let run = simulate_random(&net, seed, max_events).map_err(CliError::Simulate)?;
    let steps = run
        .into_iter()
        .map(|(t, stamp)| {
            let action = net.label(t).to_string();
            // Name the transition explicitly only when the label alone
            // would be ambiguous on this net.
            let transition = (net.transitions_labeled(&action).len() > 1)
                .then(|| net.transition_name(t).to_string());
            TraceStep {
                action,
                stamp,
                transition,
            }
        })
        .collect();
    let trace = TimedTrace { steps };
    let json_steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| match &s.transition {
            Some(t) => json!({
                "action": s.action,
                "stamp": format_time(&s.stamp),
                "transition": t,
            }),
            None => json!({ "action": s.action, "stamp": format_time(&s.stamp) }),
        })
        .collect();
    Ok(Outcome::ok(
        serialize_trace(&trace),
        json!({ "steps": json_steps }),
    ))
}

fn cmd_export_lp(net_path: &Path, trace_path: &Path) -> Result<Outcome, CliError> {
    let net = load_net(net_path)?;
    let (run, stamps) = load_resolved(&net, trace_path)?;
    let cp = unrolled(&net, &run)?;
    let tau = TimingFunction::from_times(stamps);
    let lp = export_lp(&net, &cp, &tau).map_err(|err| match err {
        ExportError::NotLinear(e) => CliError::NotLinear(e),
        ExportError::Stamp(StampError::Empty) => CliError::EmptyTrace,
        ExportError::Stamp(other) => internal(other),
    })?;
    Ok(Outcome::ok(lp.clone(), json!({ "lp": lp })))
}

fn cmd_dump_graphs(net_path: &Path, trace_path: &Path) -> Result<Outcome, CliError> {
    let net = load_net(net_path)?;
    let (run, stamps) = load_resolved(&net, trace_path)?;
    let cp = unrolled(&net, &run)?;
    if run.is_empty() {
        return Err(CliError::EmptyTrace);
    }
    let intervals = chain_intervals(&net, &cp)?;
    let graphs = cost_graphs(&intervals, &stamps).map_err(internal)?;
    let lines: Vec<String> = graphs
        .iter()
        .enumerate()
        .map(|(i, g)| g.dump_line(i + 1))
        .collect();
    Ok(Outcome::ok(
        format!("{}\n", lines.join("\n")),
        json!({ "graphs": lines }),
    ))
}

fn median(mut secs: Vec<f64>) -> f64 {
    secs.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    secs[secs.len() / 2]
}

fn cmd_bench(
    metric: MetricArg,
    sizes: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Outcome, CliError> {
    let mut rows: Vec<(usize, f64)> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        // Seed per row so a row's instance does not depend on which
        // other sizes were requested.
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
        let secs = match metric {
            MetricArg::Stamp => {
                let inst = linear_instance_of_len(&mut rng, n.max(1), 6, 3 * n.max(1) as i64);
                let intervals: Vec<_> = inst
                    .net
                    .transition_ids()
                    .map(|t| inst.net.interval(t).clone())
                    .collect();
                let runs: Vec<f64> = (0..reps)
                    .map(|_| {
                        let start = Instant::now();
                        let al = align_stamp(&intervals, inst.sigma.values());
                        std::hint::black_box(&al);
                        start.elapsed().as_secs_f64()
                    })
                    .collect();
                median(runs)
            }
            MetricArg::Delay => {
                let net = looping_pair_net();
                let a = net.find_transition("a").expect("fixture");
                let b = net.find_transition("b").expect("fixture");
                let run: Vec<TransitionId> = (0..n.max(1))
                    .map(|i| if i % 2 == 0 { a } else { b })
                    .collect();
                let cp = unrolled(&net, &run)?;
                let mut now = 0i64;
                let tau = TimingFunction::from_times(
                    (0..n.max(1))
                        .map(|_| {
                            now += rng.gen_range(0..=2);
                            crate::time::time(now)
                        })
                        .collect(),
                );
                let runs: Vec<f64> = (0..reps)
                    .map(|_| {
                        let start = Instant::now();
                        let al = align_delay(&net, &cp, &tau);
                        std::hint::black_box(&al);
                        start.elapsed().as_secs_f64()
                    })
                    .collect();
                median(runs)
            }
        };
        rows.push((n, secs));
    }
    let text = rows
        .iter()
        .map(|(n, s)| format!("{n},{s:.6}\n"))
        .collect::<String>();
    let json_rows: Vec<Value> = rows
        .iter()
        .map(|&(n, s)| json!({ "n": n, "seconds": s }))
        .collect();
    Ok(Outcome::ok(text, json!({ "rows": json_rows })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> CommandOutcome {
        run_command(std::iter::once("timed-align").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_with_the_parse_code() {
        let out = run(&["align", "--metric", "sideways"]);
        assert_eq!(out.code, EXIT_PARSE);
        let out = run(&["no-such-command"]);
        assert_eq!(out.code, EXIT_PARSE);
    }

    #[test]
    fn help_and_version_exit_cleanly() {
        let out = run(&["--help"]);
        assert_eq!(out.code, EXIT_OK);
        assert!(out.report.contains("validate"));
        assert!(out.report.contains("dump-graphs"));
        let out = run(&["--version"]);
        assert_eq!(out.code, EXIT_OK);
    }

    #[test]
    fn missing_files_exit_with_the_parse_code() {
        let out = run(&["validate", "--net", "/nonexistent.net", "--trace", "/nonexistent.csv"]);
        assert_eq!(out.code, EXIT_PARSE);
        assert!(out.report.contains("/nonexistent.net"));
    }

    #[test]
    fn error_reports_can_be_json() {
        let out = run(&[
            "validate",
            "--net",
            "/nonexistent.net",
            "--trace",
            "/nonexistent.csv",
            "--format",
            "json",
        ]);
        assert_eq!(out.code, EXIT_PARSE);
        let v: Value = serde_json::from_str(out.report.trim()).unwrap();
        assert_eq!(v["code"], 2);
        assert!(v["error"].as_str().unwrap().contains("/nonexistent.net"));
    }

    #[test]
    fn bench_reports_one_row_per_size() {
        let out = run(&["bench", "--sizes", "3,5", "--reps", "1"]);
        assert_eq!(out.code, EXIT_OK);
        let lines: Vec<&str> = out.report.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("3,"));
        assert!(lines[1].starts_with("5,"));

        let out = run(&[
            "bench", "--metric", "delay", "--sizes", "4", "--reps", "1", "--format", "json",
        ]);
        assert_eq!(out.code, EXIT_OK);
        let v: Value = serde_json::from_str(out.report.trim()).unwrap();
        assert_eq!(v["rows"][0]["n"], 4);
        assert!(v["rows"][0]["seconds"].as_f64().unwrap() >= 0.0);
    }
}
