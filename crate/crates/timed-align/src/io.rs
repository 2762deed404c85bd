//! Line-oriented text formats for nets and traces. The net format
//! carries an explicit `tpn 1` version header and one declaration per
//! line; traces are bare comma-separated records. Both accept `#`
//! comments and blank lines, keep all numbers as exact rationals
//! (integers, `p/q`, or decimals on input; integers or `p/q` on
//! output), and serialize deterministically so that parsing and
//! re-serializing a document reproduces it byte for byte.
//!
//! Net documents look like:
//!
//! ```text
//! tpn 1
//! name fork-join
//!
//! place p0
//! place p1
//!
//! transition a a 0 inf
//! transition b b 1 1
//!
//! arc p0 a
//! arc a p1
//!
//! initial p0 1
//! final p1 1
//! ```
//!
//! Trace records are `action,timestamp` with an optional third field
//! naming the exact transition, for nets where one label is carried by
//! several transitions.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::time::{
    format_time, parse_time, parse_time_bound, Time, TimeParseError,
};
use crate::tpn::{
    IntervalError, NetBuildError, StaticInterval, TimePetriNet, TransitionId,
};

/// Version header expected as the first significant line of a net file.
pub const NET_HEADER: &str = "tpn 1";

/// Error from [`parse_net`], carrying the 1-based source line.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetParseError {
    #[error("line {line}: expected the `{NET_HEADER}` header before any declaration")]
    MissingHeader { line: usize },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Number {
        line: usize,
        #[source]
        source: TimeParseError,
    },
    #[error("line {line}: invalid static interval: {source}")]
    Interval {
        line: usize,
        #[source]
        source: IntervalError,
    },
    #[error("line {line}: arc endpoint `{name}` is not declared")]
    DanglingArc { line: usize, name: String },
    #[error(transparent)]
    Build(#[from] NetBuildError),
}

fn syntax(line: usize, reason: impl Into<String>) -> NetParseError {
    NetParseError::Syntax {
        line,
        reason: reason.into(),
    }
}

/// Parses a net document. Declarations may appear in any order as long
/// as places and transitions precede the arcs and markings that
/// mention them; errors carry the offending line.
pub fn parse_net(text: &str) -> Result<TimePetriNet, NetParseError> {
    let mut b = TimePetriNet::builder();
    let mut saw_header = false;
    let mut last_line = 0;
    let mut declared: HashSet<String> = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        if !saw_header {
            if body == NET_HEADER {
                saw_header = true;
                continue;
            }
            return Err(NetParseError::MissingHeader { line });
        }
        let (keyword, rest) = match body.split_once(char::is_whitespace) {
            Some((k, r)) => (k, r.trim()),
            None => (body, ""),
        };
        let fields: Vec<&str> = rest.split_whitespace().collect();
        match keyword {
            "name" => {
                if rest.is_empty() {
                    return Err(syntax(line, "expected `name <text>`"));
                }
                b.name(rest);
            }
            "describe" => {
                b.description(rest);
            }
            "place" => {
                let [name] = fields[..] else {
                    return Err(syntax(line, "expected `place <name>`"));
                };
                b.place(name);
                declared.insert(name.to_string());
            }
            "transition" => {
                let [name, label, eft, lft] = fields[..] else {
                    return Err(syntax(
                        line,
                        "expected `transition <name> <label> <eft> <lft>`",
                    ));
                };
                let eft = parse_time(eft).map_err(|source| NetParseError::Number {
                    line,
                    source,
                })?;
                let lft = parse_time_bound(lft).map_err(|source| NetParseError::Number {
                    line,
                    source,
                })?;
                let interval = StaticInterval::new(eft, lft)
                    .map_err(|source| NetParseError::Interval { line, source })?;
                b.transition(name, label, interval);
                declared.insert(name.to_string());
            }
            "arc" => {
                let [from, to] = fields[..] else {
                    return Err(syntax(line, "expected `arc <from> <to>`"));
                };
                for name in [from, to] {
                    if !declared.contains(name) {
                        return Err(NetParseError::DanglingArc {
                            line,
                            name: name.to_string(),
                        });
                    }
                }
                b.arc(from, to);
            }
            "initial" | "final" => {
                let [place, tokens] = fields[..] else {
                    return Err(syntax(
                        line,
                        format!("expected `{keyword} <place> <tokens>`"),
                    ));
                };
                if !declared.contains(place) {
                    return Err(NetParseError::DanglingArc {
                        line,
                        name: place.to_string(),
                    });
                }
                let tokens: u32 = tokens
                    .parse()
                    .map_err(|_| syntax(line, "token count must be a non-negative integer"))?;
                if keyword == "initial" {
                    b.initial(place, tokens);
                } else {
                    b.final_marking(place, tokens);
                }
            }
            other => {
                return Err(syntax(line, format!("unknown declaration `{other}`")));
            }
        }
    }
    if !saw_header {
        return Err(NetParseError::MissingHeader {
            line: last_line + 1,
        });
    }
    Ok(b.build()?)
}

/// Serializes a net in the canonical layout: header, name/description,
/// then places, transitions, arcs (in declaration order), and markings,
/// with one blank line between non-empty sections.
pub fn serialize_net(net: &TimePetriNet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{NET_HEADER}");
    if let Some(name) = net.name() {
        let _ = writeln!(out, "name {}", name.replace('\n', " "));
    }
    if let Some(d) = net.description() {
        let _ = writeln!(out, "describe {}", d.replace('\n', " "));
    }
    out.push('\n');
    for p in net.place_ids() {
        let _ = writeln!(out, "place {}", net.place_name(p));
    }
    out.push('\n');
    for t in net.transition_ids() {
        let iv = net.interval(t);
        let _ = writeln!(
            out,
            "transition {} {} {} {}",
            net.transition_name(t),
            net.label(t),
            format_time(iv.eft()),
            iv.lft()
        );
    }
    out.push('\n');
    for (from, to) in net.arcs() {
        let _ = writeln!(out, "arc {from} {to}");
    }
    out.push('\n');
    for p in net.place_ids() {
        let tokens = net.initial_marking().tokens(p);
        if tokens > 0 {
            let _ = writeln!(out, "initial {} {}", net.place_name(p), tokens);
        }
    }
    for p in net.place_ids() {
        let tokens = net.final_marking().tokens(p);
        if tokens > 0 {
            let _ = writeln!(out, "final {} {}", net.place_name(p), tokens);
        }
    }
    out
}

/// One observed step: an action label, its timestamp, and optionally
/// the exact transition that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub action: String,
    pub stamp: Time,
    pub transition: Option<String>,
}

/// An observed timed word with nondecreasing timestamps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimedTrace {
    pub steps: Vec<TraceStep>,
}

impl TimedTrace {
    /// The `(label, timestamp)` view used by the aligners.
    pub fn pairs(&self) -> Vec<(String, Time)> {
        self.steps
            .iter()
            .map(|s| (s.action.clone(), s.stamp.clone()))
            .collect()
    }

    pub fn stamps(&self) -> Vec<Time> {
        self.steps.iter().map(|s| s.stamp.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Error from [`parse_trace`], carrying the 1-based source line.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceParseError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Number {
        line: usize,
        #[source]
        source: TimeParseError,
    },
    #[error("line {line}: timestamps must be nondecreasing ({prev} then {got})")]
    Decreasing { line: usize, prev: Time, got: Time },
    #[error("line {line}: timestamps must be non-negative, got {got}")]
    Negative { line: usize, got: Time },
}

/// Parses a trace: one `action,timestamp[,transition]` record per line.
/// An empty document is the empty trace.
pub fn parse_trace(text: &str) -> Result<TimedTrace, TraceParseError> {
    let mut steps: Vec<TraceStep> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = body.split(',').map(str::trim).collect();
        let (action, stamp, transition) = match fields[..] {
            [a, s] => (a, s, None),
            [a, s, t] => (a, s, Some(t)),
            _ => {
                return Err(TraceParseError::Syntax {
                    line,
                    reason: "expected `action,timestamp` or `action,timestamp,transition`"
                        .to_string(),
                })
            }
        };
        if action.is_empty() {
            return Err(TraceParseError::Syntax {
                line,
                reason: "action must be non-empty".to_string(),
            });
        }
        let stamp = parse_time(stamp).map_err(|source| TraceParseError::Number {
            line,
            source,
        })?;
        if stamp < Time::from_integer(0.into()) {
            return Err(TraceParseError::Negative { line, got: stamp });
        }
        if let Some(prev) = steps.last() {
            if stamp < prev.stamp {
                return Err(TraceParseError::Decreasing {
                    line,
                    prev: prev.stamp.clone(),
                    got: stamp,
                });
            }
        }
        steps.push(TraceStep {
            action: action.to_string(),
            stamp,
            transition: transition.map(str::to_string),
        });
    }
    Ok(TimedTrace { steps })
}

/// Serializes a trace in the format [`parse_trace`] reads.
pub fn serialize_trace(trace: &TimedTrace) -> String {
    let mut out = String::new();
    for step in &trace.steps {
        match &step.transition {
            Some(t) => {
                let _ = writeln!(out, "{},{},{}", step.action, format_time(&step.stamp), t);
            }
            None => {
                let _ = writeln!(out, "{},{}", step.action, format_time(&step.stamp));
            }
        }
    }
    out
}

/// Error from [`resolve_trace`]; `step` is 1-based.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("step {step}: no transition carries label `{label}`")]
    UnknownLabel { step: usize, label: String },
    #[error(
        "step {step}: label `{label}` is carried by {count} transitions; \
         add an explicit transition column to the trace"
    )]
    AmbiguousLabel {
        step: usize,
        label: String,
        count: usize,
    },
    #[error("step {step}: unknown transition `{name}`")]
    UnknownTransition { step: usize, name: String },
    #[error("step {step}: transition `{name}` carries label `{actual}`, not `{label}`")]
    LabelMismatch {
        step: usize,
        name: String,
        actual: String,
        label: String,
    },
}

/// Maps each trace step to a concrete transition: by the explicit
/// transition column when present, otherwise by its label, which must
/// then be unambiguous in the net.
pub fn resolve_trace(
    net: &TimePetriNet,
    trace: &TimedTrace,
) -> Result<(Vec<TransitionId>, Vec<Time>), ResolveError> {
    let mut run = Vec::with_capacity(trace.len());
    let mut stamps = Vec::with_capacity(trace.len());
    for (idx, step) in trace.steps.iter().enumerate() {
        let t = match &step.transition {
            Some(name) => {
                let t = net
                    .find_transition(name)
                    .ok_or_else(|| ResolveError::UnknownTransition {
                        step: idx + 1,
                        name: name.clone(),
                    })?;
                if net.label(t) != step.action {
                    return Err(ResolveError::LabelMismatch {
                        step: idx + 1,
                        name: name.clone(),
                        actual: net.label(t).to_string(),
                        label: step.action.clone(),
                    });
                }
                t
            }
            None => {
                let candidates = net.transitions_labeled(&step.action);
                match candidates[..] {
                    [] => {
                        return Err(ResolveError::UnknownLabel {
                            step: idx + 1,
                            label: step.action.clone(),
                        })
                    }
                    [t] => t,
                    _ => {
                        return Err(ResolveError::AmbiguousLabel {
                            step: idx + 1,
                            label: step.action.clone(),
                            count: candidates.len(),
                        })
                    }
                }
            }
        };
        run.push(t);
        stamps.push(step.stamp.clone());
    }
    Ok((run, stamps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{branch_choice_net, chain_six, fork_join_net, loop_net};
    use crate::synth::random_efc_instance;
    use crate::time::{ratio, time};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_a_small_net_document() {
        let text = "\
# a two-step chain
tpn 1
name demo
describe two steps, then done

place p0
place p1
place p2

transition s start 0 inf
transition f finish 1/2 2.5

arc p0 s
arc s p1
arc p1 f
arc f p2

initial p0 1
final p2 1
";
        let net = parse_net(text).unwrap();
        assert_eq!(net.name(), Some("demo"));
        assert_eq!(net.description(), Some("two steps, then done"));
        assert_eq!(net.place_count(), 3);
        assert_eq!(net.transition_count(), 2);
        let f = net.find_transition("f").unwrap();
        assert_eq!(net.label(f), "finish");
        assert_eq!(net.interval(f).eft(), &ratio(1, 2));
        assert_eq!(
            net.interval(f).lft(),
            &crate::time::TimeBound::Finite(ratio(5, 2))
        );
        let s = net.find_transition("s").unwrap();
        assert!(net.interval(s).lft().is_finite() == false);
    }

    #[test]
    fn net_errors_carry_line_numbers() {
        let err = parse_net("place p0\n").unwrap_err();
        assert_eq!(err, NetParseError::MissingHeader { line: 1 });

        let err = parse_net("tpn 1\nplace p0\nplace\n").unwrap_err();
        assert!(matches!(err, NetParseError::Syntax { line: 3, .. }));

        let err = parse_net("tpn 1\ntransition t t 3 2\n").unwrap_err();
        assert!(matches!(
            err,
            NetParseError::Interval {
                line: 2,
                source: IntervalError::Empty { .. }
            }
        ));

        let err = parse_net("tpn 1\nplace p0\narc p0 ghost\n").unwrap_err();
        assert_eq!(
            err,
            NetParseError::DanglingArc {
                line: 3,
                name: "ghost".to_string()
            }
        );

        let err = parse_net("tpn 1\ntransition t t zero 2\n").unwrap_err();
        assert!(matches!(err, NetParseError::Number { line: 2, .. }));
    }

    #[test]
    fn fixture_nets_round_trip_byte_identically() {
        for net in [
            fork_join_net(),
            loop_net(),
            branch_choice_net(),
            chain_six(),
        ] {
            let once = serialize_net(&net);
            let reparsed = parse_net(&once).unwrap();
            assert_eq!(serialize_net(&reparsed), once);
        }
    }

    #[test]
    fn random_nets_round_trip_byte_identically() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let inst = random_efc_instance(&mut rng, 5, 4);
            let once = serialize_net(&inst.net);
            let reparsed = parse_net(&once).unwrap();
            assert_eq!(serialize_net(&reparsed), once);
        }
    }

    #[test]
    fn bundled_files_match_the_programmatic_fixtures() {
        let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
        for (file, net) in [
            ("example1.net", fork_join_net()),
            ("chain-six.net", chain_six()),
            ("chain-three.net", crate::fixtures::chain_three()),
        ] {
            let text = std::fs::read_to_string(format!("{dir}/{file}")).unwrap();
            assert_eq!(text, serialize_net(&net), "{file} drifted from its fixture");
            assert_eq!(serialize_net(&parse_net(&text).unwrap()), text);
        }
        let text = std::fs::read_to_string(format!("{dir}/example1-run.csv")).unwrap();
        let trace = parse_trace(&text).unwrap();
        let (run, stamps) = resolve_trace(&fork_join_net(), &trace).unwrap();
        assert_eq!(run.len(), 5);
        assert_eq!(stamps[4], time(5));
    }

    #[test]
    fn parses_the_plain_trace_format() {
        let trace = parse_trace("a,1\nb,2\nd,3\ne,4\nf,5\n").unwrap();
        assert_eq!(trace.len(), 5);
        assert_eq!(trace.steps[0].action, "a");
        assert_eq!(trace.steps[4].stamp, time(5));
        assert!(trace.steps.iter().all(|s| s.transition.is_none()));

        assert!(parse_trace("").unwrap().is_empty());
        assert!(parse_trace("# only a comment\n\n").unwrap().is_empty());

        let trace = parse_trace("a,0.5\na,3/2,a2\n").unwrap();
        assert_eq!(trace.steps[0].stamp, ratio(1, 2));
        assert_eq!(trace.steps[1].transition.as_deref(), Some("a2"));
    }

    #[test]
    fn trace_errors_carry_line_numbers() {
        let err = parse_trace("a,2\nb,1\n").unwrap_err();
        assert_eq!(
            err,
            TraceParseError::Decreasing {
                line: 2,
                prev: time(2),
                got: time(1)
            }
        );
        let err = parse_trace("a,-1\n").unwrap_err();
        assert!(matches!(err, TraceParseError::Negative { line: 1, .. }));
        let err = parse_trace("a\n").unwrap_err();
        assert!(matches!(err, TraceParseError::Syntax { line: 1, .. }));
        let err = parse_trace("a,oops\n").unwrap_err();
        assert!(matches!(err, TraceParseError::Number { line: 1, .. }));
    }

    #[test]
    fn traces_round_trip_with_normalized_numbers() {
        let trace = parse_trace("a,0.25\nb,2,b\nc,7/2\n").unwrap();
        let text = serialize_trace(&trace);
        assert_eq!(text, "a,1/4\nb,2,b\nc,7/2\n");
        assert_eq!(parse_trace(&text).unwrap(), trace);
    }

    #[test]
    fn resolves_labels_and_explicit_transitions() {
        let net = fork_join_net();
        let trace = parse_trace("a,1\nb,2\nd,4\ne,5\nf,6\n").unwrap();
        let (run, stamps) = resolve_trace(&net, &trace).unwrap();
        let names: Vec<&str> = run.iter().map(|&t| net.transition_name(t)).collect();
        assert_eq!(names, ["a", "b", "d", "e", "f"]);
        assert_eq!(stamps[2], time(4));

        let net = branch_choice_net();
        let err = resolve_trace(&net, &parse_trace("a,0\n").unwrap()).unwrap_err();
        assert_eq!(
            err,
            ResolveError::AmbiguousLabel {
                step: 1,
                label: "a".to_string(),
                count: 5
            }
        );
        let (run, _) = resolve_trace(&net, &parse_trace("a,0,a1\na,0,a2\n").unwrap()).unwrap();
        let names: Vec<&str> = run.iter().map(|&t| net.transition_name(t)).collect();
        assert_eq!(names, ["a1", "a2"]);

        let err = resolve_trace(&net, &parse_trace("b,0,a1\n").unwrap()).unwrap_err();
        assert!(matches!(err, ResolveError::LabelMismatch { step: 1, .. }));
        let err = resolve_trace(&net, &parse_trace("z,0\n").unwrap()).unwrap_err();
        assert!(matches!(err, ResolveError::UnknownLabel { step: 1, .. }));
        let err = resolve_trace(&net, &parse_trace("a,0,nope\n").unwrap()).unwrap_err();
        assert!(matches!(err, ResolveError::UnknownTransition { step: 1, .. }));
    }
}
