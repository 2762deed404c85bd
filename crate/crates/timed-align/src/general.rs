//! Combined action-and-time conformance: when the observed action
//! sequence itself may disagree with the net, alignment happens in two
//! stages. A best-first search over the synchronous product of the
//! trace and the untimed net proposes candidate runs close to the
//! observation under insert/delete edit distance; each candidate
//! borrows timestamps from the observation and is then aligned by the
//! purely timed machinery; the candidate with the lowest combined cost
//! wins.
//!
//! The pipeline is deliberately naive: each candidate is timed against
//! its own run's constraints only, so on nets where an untaken branch
//! imposes urgency the winning timed word need not replay on the full
//! net. Sequential nets and delay-metric alignments do not have this
//! gap.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use num::Zero;
use thiserror::Error;

use crate::causal::{chain_intervals, unroll, TimingFunction};
use crate::delay::align_delay;
use crate::oracle::Metric;
use crate::stamp::align_stamp;
use crate::time::Time;
use crate::tpn::{Marking, TimePetriNet, TransitionId};

/// One edit step turning the observed action sequence into a run. The
/// variant order is load-bearing: the search breaks ties toward
/// matches, then log-move deletions, then model-move insertions, which
/// keeps returned scripts in a canonical delete-before-insert shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EditOp {
    /// Word position `position` is explained by firing `transition`.
    Match {
        position: usize,
        transition: TransitionId,
    },
    /// Log move: word position `position` has no counterpart in the run.
    Delete { position: usize },
    /// Model move: `transition` fires without a matching observation.
    Insert { transition: TransitionId },
}

/// Candidate untimed run produced by the edit-distance search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UntimedCandidate {
    pub run: Vec<TransitionId>,
    pub script: Vec<EditOp>,
    /// Action-edit cost: the per-edit price times the number of
    /// insertions and deletions in `script`.
    pub action_cost: Time,
}

/// Error from the candidate search and the combined pipeline.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneralError {
    #[error("the net's final marking is unreachable, so it has no runs at all")]
    EmptyLanguage,
    #[error("no candidate run admits the chosen metric: {reasons}")]
    NoUsableCandidate { reasons: String },
}

/// Error from [`CostConfig::new`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("action-edit cost must be positive, got {0}")]
    NonPositiveActionCost(Time),
    #[error("time-edit cost must be positive, got {0}")]
    NonPositiveTimeCost(Time),
    #[error("candidate count must be at least 1")]
    NoCandidates,
}

/// Prices for the combined objective: `c_action` per inserted or
/// deleted action, `c_time` per unit of timed-alignment cost, and the
/// number of candidate runs the untimed stage hands to the timed one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostConfig {
    c_action: Time,
    c_time: Time,
    k: usize,
}

impl CostConfig {
    pub fn new(c_action: Time, c_time: Time, k: usize) -> Result<CostConfig, ConfigError> {
        if c_action <= Time::zero() {
            return Err(ConfigError::NonPositiveActionCost(c_action));
        }
        if c_time <= Time::zero() {
            return Err(ConfigError::NonPositiveTimeCost(c_time));
        }
        if k == 0 {
            return Err(ConfigError::NoCandidates);
        }
        Ok(CostConfig { c_action, c_time, k })
    }

    pub fn c_action(&self) -> &Time {
        &self.c_action
    }

    pub fn c_time(&self) -> &Time {
        &self.c_time
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Result of the combined pipeline: the winning run as a timed word,
/// how it was obtained from the observation, and the cost split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralAlignment {
    /// Labels of the winning run paired with its aligned timestamps.
    pub aligned_word: Vec<(String, Time)>,
    pub edit_script: Vec<EditOp>,
    pub action_cost: Time,
    pub time_cost: Time,
    /// `action_cost + c_time · time_cost`.
    pub total: Time,
}

/// Search node: a partial edit script, where it stands in the word, and
/// the marking it has driven the net to. Ordering ignores the marking
/// and run because the script determines both.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Path {
    cost: Time,
    labels: Vec<String>,
    names: Vec<String>,
    script: Vec<EditOp>,
    position: usize,
    marking: Marking,
    run: Vec<TransitionId>,
}

impl Path {
    fn key(&self) -> (&Time, &Vec<String>, &Vec<String>, &Vec<EditOp>, usize) {
        (&self.cost, &self.labels, &self.names, &self.script, self.position)
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn one_safe(net: &TimePetriNet, marking: &Marking) -> bool {
    net.place_ids().all(|p| marking.tokens(p) <= 1)
}

/// Markings from which the final marking is reachable, computed over
/// the one-safe fragment of the untimed reachability graph. Pruning the
/// search to this set is what keeps it terminating even on nets whose
/// language is empty or finite.
fn coreachable_markings(net: &TimePetriNet) -> HashSet<Marking> {
    let mut seen: HashSet<Marking> = HashSet::new();
    let mut edges: Vec<(Marking, Marking)> = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(net.initial_marking().clone());
    queue.push_back(net.initial_marking().clone());
    while let Some(m) = queue.pop_front() {
        for t in net.transition_ids() {
            if !net.is_enabled(t, &m) {
                continue;
            }
            let next = net.fire_untimed(&m, t);
            if !one_safe(net, &next) {
                continue;
            }
            edges.push((m.clone(), next.clone()));
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    let mut co: HashSet<Marking> = HashSet::new();
    co.insert(net.final_marking().clone());
    loop {
        let mut grew = false;
        for (from, to) in &edges {
            if co.contains(to) && !co.contains(from) {
                co.insert(from.clone());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    co
}

enum StopRule {
    /// Finish the cost level of the k-th cheapest distinct run.
    Count(usize),
    /// Collect every run within one action edit of the best.
    Margin,
}

/// Best-first enumeration of the net's untimed runs by edit distance to
/// `word`. Sync moves are free; every insertion (model move) and
/// deletion (log move) costs `c_action`, so path costs grow strictly
/// along insert loops and the search terminates. Runs are deduplicated,
/// keeping each run's cheapest script, and the result is sorted by
/// action cost, then by label sequence, then by transition names.
fn search_candidates(
    net: &TimePetriNet,
    word: &[&str],
    c_action: &Time,
    stop: StopRule,
) -> Result<Vec<UntimedCandidate>, GeneralError> {
    let co = coreachable_markings(net);
    if !co.contains(net.initial_marking()) {
        return Err(GeneralError::EmptyLanguage);
    }

    let mut heap: BinaryHeap<std::cmp::Reverse<Path>> = BinaryHeap::new();
    heap.push(std::cmp::Reverse(Path {
        cost: Time::zero(),
        labels: Vec::new(),
        names: Vec::new(),
        script: Vec::new(),
        position: 0,
        marking: net.initial_marking().clone(),
        run: Vec::new(),
    }));

    let mut found: Vec<UntimedCandidate> = Vec::new();
    let mut seen_runs: HashSet<Vec<TransitionId>> = HashSet::new();
    let mut cutoff: Option<Time> = None;

    while let Some(std::cmp::Reverse(path)) = heap.pop() {
        if let Some(cut) = &cutoff {
            if path.cost > *cut {
                break;
            }
        }

        if path.position == word.len() && &path.marking == net.final_marking() {
            if seen_runs.insert(path.run.clone()) {
                found.push(UntimedCandidate {
                    run: path.run.clone(),
                    script: path.script.clone(),
                    action_cost: path.cost.clone(),
                });
                match stop {
                    StopRule::Count(k) => {
                        if cutoff.is_none() && seen_runs.len() == k {
                            cutoff = Some(path.cost.clone());
                        }
                    }
                    StopRule::Margin => {
                        if cutoff.is_none() {
                            cutoff = Some(&path.cost + c_action);
                        }
                    }
                }
            }
            // A goal can still be extended when the final marking has
            // outgoing behavior (loops), so fall through.
        }

        let after_insert = matches!(path.script.last(), Some(EditOp::Insert { .. }));

        if path.position < word.len() {
            // Sync: a transition carrying the observed label fires.
            for t in net.transitions_labeled(word[path.position]) {
                if let Some(next) = fire_within(net, &path.marking, t, &co) {
                    let mut p = extended(&path, net, t, next);
                    p.script.push(EditOp::Match {
                        position: path.position,
                        transition: t,
                    });
                    p.position += 1;
                    heap.push(std::cmp::Reverse(p));
                }
            }
            // Log move. Forbidding it directly after a model move keeps
            // one canonical interleaving per delete/insert block.
            if !after_insert {
                let mut p = path.clone();
                p.cost += c_action;
                p.script.push(EditOp::Delete {
                    position: path.position,
                });
                p.position += 1;
                heap.push(std::cmp::Reverse(p));
            }
        }

        // Model moves: any fireable transition.
        for t in net.transition_ids() {
            if let Some(next) = fire_within(net, &path.marking, t, &co) {
                let mut p = extended(&path, net, t, next);
                p.cost += c_action;
                p.script.push(EditOp::Insert { transition: t });
                heap.push(std::cmp::Reverse(p));
            }
        }
    }

    found.sort_by(|a, b| {
        let la: Vec<&str> = a.run.iter().map(|&t| net.label(t)).collect();
        let lb: Vec<&str> = b.run.iter().map(|&t| net.label(t)).collect();
        let na: Vec<&str> = a.run.iter().map(|&t| net.transition_name(t)).collect();
        let nb: Vec<&str> = b.run.iter().map(|&t| net.transition_name(t)).collect();
        (&a.action_cost, la, na).cmp(&(&b.action_cost, lb, nb))
    });
    if let StopRule::Count(k) = stop {
        found.truncate(k);
    }
    Ok(found)
}

/// Fires `t` if enabled and the result is one-safe and can still reach
/// the final marking.
fn fire_within(
    net: &TimePetriNet,
    marking: &Marking,
    t: TransitionId,
    co: &HashSet<Marking>,
) -> Option<Marking> {
    if !net.is_enabled(t, marking) {
        return None;
    }
    let next = net.fire_untimed(marking, t);
    if !one_safe(net, &next) || !co.contains(&next) {
        return None;
    }
    Some(next)
}

fn extended(path: &Path, net: &TimePetriNet, t: TransitionId, next: Marking) -> Path {
    let mut p = path.clone();
    p.labels.push(net.label(t).to_string());
    p.names.push(net.transition_name(t).to_string());
    p.run.push(t);
    p.marking = next;
    p
}

/// The `k` cheapest distinct untimed runs of the net under insert/delete
/// edit distance to `word`, each action edit costing `c_action`.
/// Results are sorted by cost, ties broken by the run's label sequence
/// and then its transition names.
pub fn untimed_align_kbest(
    net: &TimePetriNet,
    word: &[&str],
    k: usize,
    c_action: &Time,
) -> Result<Vec<UntimedCandidate>, GeneralError> {
    search_candidates(net, word, c_action, StopRule::Count(k.max(1)))
}

/// Alternative stopping rule: every distinct run whose action cost is
/// within one `c_action` of the cheapest, however many there are.
pub fn untimed_align_threshold(
    net: &TimePetriNet,
    word: &[&str],
    c_action: &Time,
) -> Result<Vec<UntimedCandidate>, GeneralError> {
    search_candidates(net, word, c_action, StopRule::Margin)
}

/// Error from [`transfer_timestamps`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransferError {
    #[error("edit script visits word position {got} where position {expected} was due")]
    PositionOrder { expected: usize, got: usize },
    #[error("edit script covers {covered} of {expected} word positions")]
    Incomplete { covered: usize, expected: usize },
}

/// Executes an edit script against a timed word, producing the candidate
/// run and the timestamps its events inherit: matched events keep their
/// observed stamp, deleted positions drop theirs, and inserted events
/// borrow the stamp of the closest surviving observation before them —
/// or the first one after them when they precede every survivor, so a
/// run that merely substitutes the head of the word stays aligned with
/// the observation's clock. Zero is used only when nothing survives.
pub fn transfer_timestamps(
    word: &[(String, Time)],
    script: &[EditOp],
) -> Result<(Vec<TransitionId>, TimingFunction), TransferError> {
    let mut due = 0usize;
    for op in script {
        if let EditOp::Match { position, .. } | EditOp::Delete { position } = op {
            if *position != due {
                return Err(TransferError::PositionOrder {
                    expected: due,
                    got: *position,
                });
            }
            due += 1;
        }
    }
    if due != word.len() {
        return Err(TransferError::Incomplete {
            covered: due,
            expected: word.len(),
        });
    }

    let mut run = Vec::new();
    let mut stamps: Vec<Option<Time>> = Vec::new();
    let mut last: Option<Time> = None;
    for op in script {
        match op {
            EditOp::Match {
                position,
                transition,
            } => {
                let s = word[*position].1.clone();
                run.push(*transition);
                stamps.push(Some(s.clone()));
                last = Some(s);
            }
            EditOp::Insert { transition } => {
                run.push(*transition);
                stamps.push(last.clone());
            }
            EditOp::Delete { .. } => {}
        }
    }
    let first = stamps
        .iter()
        .flatten()
        .next()
        .cloned()
        .unwrap_or_else(Time::zero);
    let sigma = stamps
        .into_iter()
        .map(|s| s.unwrap_or_else(|| first.clone()))
        .collect();
    Ok((run, TimingFunction::from_times(sigma)))
}

/// Combined action-and-time alignment: generates the `config.k()` best
/// untimed candidates, times each one, and returns the candidate
/// minimizing `action_cost + c_time · time_cost`. Ties keep the
/// candidate with the lower action cost, then the lexicographically
/// smaller run, matching the candidate order.
///
/// The stamp metric applies only to candidates whose process is a
/// chain; the delay metric needs an extended-free-choice net and skips
/// candidates that admit no valid timing. Candidates failing the metric
/// are dropped with a notice, and it is an error when none remain.
pub fn align_general(
    net: &TimePetriNet,
    word: &[(String, Time)],
    config: &CostConfig,
    metric: Metric,
) -> Result<GeneralAlignment, GeneralError> {
    let actions: Vec<&str> = word.iter().map(|(l, _)| l.as_str()).collect();
    let candidates = untimed_align_kbest(net, &actions, config.k(), config.c_action())?;
    best_timed_candidate(net, word, candidates, config, metric)
}

/// [`align_general`] with the threshold stopping rule instead of a
/// fixed candidate count.
pub fn align_general_threshold(
    net: &TimePetriNet,
    word: &[(String, Time)],
    config: &CostConfig,
    metric: Metric,
) -> Result<GeneralAlignment, GeneralError> {
    let actions: Vec<&str> = word.iter().map(|(l, _)| l.as_str()).collect();
    let candidates = untimed_align_threshold(net, &actions, config.c_action())?;
    best_timed_candidate(net, word, candidates, config, metric)
}

fn best_timed_candidate(
    net: &TimePetriNet,
    word: &[(String, Time)],
    candidates: Vec<UntimedCandidate>,
    config: &CostConfig,
    metric: Metric,
) -> Result<GeneralAlignment, GeneralError> {
    if metric == Metric::Delay && !net.is_extended_free_choice() {
        return Err(GeneralError::NoUsableCandidate {
            reasons: "the delay metric needs an extended-free-choice net".to_string(),
        });
    }

    let mut best: Option<GeneralAlignment> = None;
    let mut reasons: Vec<String> = Vec::new();
    for cand in candidates {
        let (run, sigma) =
            transfer_timestamps(word, &cand.script).expect("search scripts are well formed");
        debug_assert_eq!(run, cand.run);
        let cp = unroll(net, &run).expect("candidate runs reach the final marking");
        let timed = match metric {
            Metric::Stamp => match chain_intervals(net, &cp) {
                Ok(intervals) if intervals.is_empty() => {
                    Ok((Time::zero(), TimingFunction::from_times(Vec::new())))
                }
                Ok(intervals) => align_stamp(&intervals, sigma.values())
                    .map(|a| (a.cost, a.gamma))
                    .map_err(|e| e.to_string()),
                Err(e) => Err(e.to_string()),
            },
            Metric::Delay => align_delay(net, &cp, &sigma)
                .map(|a| (a.cost, a.gamma))
                .map_err(|e| e.to_string()),
        };
        let (time_cost, gamma) = match timed {
            Ok(pair) => pair,
            Err(reason) => {
                reasons.push(format!("run {}: {reason}", run_names(net, &run)));
                continue;
            }
        };
        let total = &cand.action_cost + config.c_time() * &time_cost;
        if best.as_ref().map_or(true, |b| total < b.total) {
            let aligned_word = run
                .iter()
                .zip(gamma.values())
                .map(|(&t, x)| (net.label(t).to_string(), x.clone()))
                .collect();
            best = Some(GeneralAlignment {
                aligned_word,
                edit_script: cand.script,
                action_cost: cand.action_cost,
                time_cost,
                total,
            });
        }
    }
    best.ok_or(GeneralError::NoUsableCandidate {
        reasons: reasons.join("; "),
    })
}

fn run_names(net: &TimePetriNet, run: &[TransitionId]) -> String {
    let names: Vec<&str> = run.iter().map(|&t| net.transition_name(t)).collect();
    names.join(",")
}
