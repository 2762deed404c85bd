//! Causal processes: partially ordered unrollings of net runs.
//!
//! A causal process records one run of a net as an occurrence net —
//! conditions are individual tokens, events are transition firings, and
//! every condition has at most one producer and one consumer. Timing
//! functions attach a timestamp to every event; the two views of a timed
//! run live here:
//!
//! * the *stamp* view, absolute timestamps per event, compared with
//!   [`manhattan`];
//! * the *delay* view, each event's offset from the moment its input
//!   tokens were all available, computed by [`flow`] and compared with
//!   [`delay_distance`].
//!
//! [`is_valid_timing`] decides whether a timing function describes a run
//! the net can actually perform, including the urgency rule; it has a
//! general checker and a faster one for extended-free-choice nets, and the
//! two agree on their common domain.

use crate::time::Time;
use crate::tpn::{Marking, PlaceId, StaticInterval, TimePetriNet, TransitionId};
use num::Zero;
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Index of a condition (token occurrence) within a causal process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CondId(pub usize);

/// Index of an event (firing occurrence) within a causal process; event
/// ids are assigned in run order, so they form a stable topological index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub usize);

impl fmt::Display for CondId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Debug)]
struct Condition {
    place: PlaceId,
    producer: Option<EventId>,
    consumer: Option<EventId>,
}

#[derive(Clone, Debug)]
struct Event {
    transition: TransitionId,
    preset: Vec<CondId>,
    postset: Vec<CondId>,
}

/// A causal process of a net run.
#[derive(Clone, Debug)]
pub struct CausalProcess {
    conditions: Vec<Condition>,
    events: Vec<Event>,
    min: Vec<CondId>,
}

/// Error from the explicit process builder.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CpBuildError {
    #[error("condition {0} does not exist")]
    UnknownCondition(CondId),
    #[error("condition {0} is already consumed")]
    AlreadyConsumed(CondId),
    #[error("consumed conditions do not match the preset of transition {0}")]
    PresetMismatch(TransitionId),
}

/// Builds a causal process condition by condition; used by [`unroll`] and
/// directly by tests that need a process [`unroll`] cannot produce (for
/// example when a run is not 1-safe but the process itself is still
/// meaningful).
pub struct CpBuilder<'a> {
    net: &'a TimePetriNet,
    cp: CausalProcess,
}

impl<'a> CpBuilder<'a> {
    /// Starts a process with one minimal condition per initial token.
    pub fn new(net: &'a TimePetriNet) -> CpBuilder<'a> {
        let mut cp = CausalProcess {
            conditions: Vec::new(),
            events: Vec::new(),
            min: Vec::new(),
        };
        for p in net.place_ids() {
            for _ in 0..net.initial_marking().tokens(p) {
                let id = CondId(cp.conditions.len());
                cp.conditions.push(Condition {
                    place: p,
                    producer: None,
                    consumer: None,
                });
                cp.min.push(id);
            }
        }
        CpBuilder { net, cp }
    }

    /// Currently unconsumed conditions holding tokens of place `p`.
    pub fn available(&self, p: PlaceId) -> Vec<CondId> {
        self.cp
            .condition_ids()
            .filter(|&c| {
                self.cp.conditions[c.0].place == p && self.cp.conditions[c.0].consumer.is_none()
            })
            .collect()
    }

    /// Appends an event of `t` consuming exactly the given conditions; one
    /// fresh condition per postset place is created.
    pub fn add_event(
        &mut self,
        t: TransitionId,
        consumed: &[CondId],
    ) -> Result<EventId, CpBuildError> {
        for &c in consumed {
            if c.0 >= self.cp.conditions.len() {
                return Err(CpBuildError::UnknownCondition(c));
            }
            if self.cp.conditions[c.0].consumer.is_some() {
                return Err(CpBuildError::AlreadyConsumed(c));
            }
        }
        let mut places: Vec<PlaceId> = consumed
            .iter()
            .map(|&c| self.cp.conditions[c.0].place)
            .collect();
        places.sort();
        if places != self.net.preset(t) {
            return Err(CpBuildError::PresetMismatch(t));
        }

        let event = EventId(self.cp.events.len());
        for &c in consumed {
            self.cp.conditions[c.0].consumer = Some(event);
        }
        let mut postset = Vec::new();
        for &p in self.net.postset(t) {
            let id = CondId(self.cp.conditions.len());
            self.cp.conditions.push(Condition {
                place: p,
                producer: Some(event),
                consumer: None,
            });
            postset.push(id);
        }
        self.cp.events.push(Event {
            transition: t,
            preset: consumed.to_vec(),
            postset,
        });
        Ok(event)
    }

    /// Read-only view of the process built so far.
    pub fn process(&self) -> &CausalProcess {
        &self.cp
    }

    pub fn finish(self) -> CausalProcess {
        self.cp
    }
}

/// Error from [`unroll`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum UnrollError {
    #[error("initial marking is not 1-safe at place `{place}`")]
    UnsafeInitial { place: String },
    #[error("step {step}: transition `{transition}` is not fireable (place `{place}` is empty)")]
    NotFireable {
        step: usize,
        transition: String,
        place: String,
    },
    #[error("step {step}: firing `{transition}` puts a second token on place `{place}`")]
    Unsafe {
        step: usize,
        transition: String,
        place: String,
    },
    #[error("run ends in {reached}, not the final marking {expected}")]
    FinalMarkingMismatch { reached: String, expected: String },
}

/// Unrolls an untimed run into its causal process, without requiring the
/// run to reach the final marking. Timing is deliberately ignored: the
/// process records which token each firing consumed, nothing more.
pub fn unroll_prefix(
    net: &TimePetriNet,
    run: &[TransitionId],
) -> Result<CausalProcess, UnrollError> {
    if let Some(&p) = net.initial_marking().overfull_places().first() {
        return Err(UnrollError::UnsafeInitial {
            place: net.place_name(p).to_string(),
        });
    }
    let mut builder = CpBuilder::new(net);
    // With a 1-safe prefix there is at most one available condition per
    // place; track it directly.
    let mut holder: Vec<Option<CondId>> = vec![None; net.place_count()];
    for &c in &builder.cp.min {
        holder[builder.cp.conditions[c.0].place.0] = Some(c);
    }
    for (step, &t) in run.iter().enumerate() {
        let mut consumed = Vec::new();
        for &p in net.preset(t) {
            match holder[p.0].take() {
                Some(c) => consumed.push(c),
                None => {
                    return Err(UnrollError::NotFireable {
                        step,
                        transition: net.transition_name(t).to_string(),
                        place: net.place_name(p).to_string(),
                    })
                }
            }
        }
        let event = builder.add_event(t, &consumed).expect("tracked tokens");
        for (&c, &p) in builder.cp.events[event.0]
            .postset
            .clone()
            .iter()
            .zip(net.postset(t))
        {
            if holder[p.0].is_some() {
                return Err(UnrollError::Unsafe {
                    step,
                    transition: net.transition_name(t).to_string(),
                    place: net.place_name(p).to_string(),
                });
            }
            holder[p.0] = Some(c);
        }
    }
    Ok(builder.finish())
}

/// Unrolls an untimed run that must lead from the initial to the final
/// marking; see [`unroll_prefix`] for the relaxed variant.
pub fn unroll(net: &TimePetriNet, run: &[TransitionId]) -> Result<CausalProcess, UnrollError> {
    let cp = unroll_prefix(net, run)?;
    let mut reached = Marking::empty(net.place_count());
    for c in cp.final_cut() {
        let p = cp.place_of(c);
        reached.set_tokens(p, reached.tokens(p) + 1);
    }
    if reached != *net.final_marking() {
        return Err(UnrollError::FinalMarkingMismatch {
            reached: net.format_marking(&reached),
            expected: net.format_marking(net.final_marking()),
        });
    }
    Ok(cp)
}

impl CausalProcess {
    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn condition_count(&self) -> usize {
        self.conditions.len()
    }

    pub fn event_ids(&self) -> impl Iterator<Item = EventId> {
        (0..self.events.len()).map(EventId)
    }

    pub fn condition_ids(&self) -> impl Iterator<Item = CondId> {
        (0..self.conditions.len()).map(CondId)
    }

    pub fn transition_of(&self, e: EventId) -> TransitionId {
        self.events[e.0].transition
    }

    pub fn preset_conds(&self, e: EventId) -> &[CondId] {
        &self.events[e.0].preset
    }

    pub fn postset_conds(&self, e: EventId) -> &[CondId] {
        &self.events[e.0].postset
    }

    pub fn place_of(&self, c: CondId) -> PlaceId {
        self.conditions[c.0].place
    }

    pub fn producer(&self, c: CondId) -> Option<EventId> {
        self.conditions[c.0].producer
    }

    pub fn consumer(&self, c: CondId) -> Option<EventId> {
        self.conditions[c.0].consumer
    }

    pub fn min_conditions(&self) -> &[CondId] {
        &self.min
    }

    /// Direct causal predecessors of `e`: producers of its preset,
    /// deduplicated, ascending.
    pub fn pred_events(&self, e: EventId) -> Vec<EventId> {
        let mut preds: Vec<EventId> = self.events[e.0]
            .preset
            .iter()
            .filter_map(|&c| self.conditions[c.0].producer)
            .collect();
        preds.sort();
        preds.dedup();
        preds
    }

    /// Conditions never consumed; the tokens left when the run ends.
    pub fn final_cut(&self) -> BTreeSet<CondId> {
        self.condition_ids()
            .filter(|&c| self.conditions[c.0].consumer.is_none())
            .collect()
    }

    /// `ancestors[b.0][a.0]` iff `a` is a strict causal predecessor of `b`.
    pub fn ancestor_table(&self) -> Vec<Vec<bool>> {
        let n = self.events.len();
        let mut anc = vec![vec![false; n]; n];
        for e in 0..n {
            for pred in self.pred_events(EventId(e)) {
                anc[e][pred.0] = true;
                // Event ids are topological, so pred's row is complete.
                let (before, row) = anc.split_at_mut(e);
                for (i, &flag) in before[pred.0].iter().enumerate() {
                    row[0][i] |= flag;
                }
            }
        }
        anc
    }

    /// `true` when the causal order is total, i.e. the process is a chain
    /// in event-id order.
    pub fn is_linear(&self) -> bool {
        let anc = self.ancestor_table();
        (1..self.events.len()).all(|i| anc[i][i - 1])
    }

    /// Checks that this process is a causal process *of* `net`: ids in
    /// range, pre/postsets matching the host transitions, minimal
    /// conditions matching the initial marking, and producer/consumer
    /// links consistent.
    pub fn check_against(&self, net: &TimePetriNet) -> Result<(), CpNetMismatch> {
        let mut min_marking = Marking::empty(net.place_count());
        for c in self.condition_ids() {
            let cond = &self.conditions[c.0];
            if cond.place.0 >= net.place_count() {
                return Err(CpNetMismatch::new(format!("condition {c} has a foreign place")));
            }
            if cond.producer.is_none() {
                if !self.min.contains(&c) {
                    return Err(CpNetMismatch::new(format!(
                        "condition {c} lacks a producer but is not minimal"
                    )));
                }
                min_marking.set_tokens(cond.place, min_marking.tokens(cond.place) + 1);
            }
        }
        if min_marking != *net.initial_marking() {
            return Err(CpNetMismatch::new(
                "minimal conditions do not match the initial marking".to_string(),
            ));
        }
        for e in self.event_ids() {
            let event = &self.events[e.0];
            if event.transition.0 >= net.transition_count() {
                return Err(CpNetMismatch::new(format!("event {e} has a foreign transition")));
            }
            let mut pre: Vec<PlaceId> = event.preset.iter().map(|&c| self.place_of(c)).collect();
            pre.sort();
            if pre != net.preset(event.transition) {
                return Err(CpNetMismatch::new(format!(
                    "event {e} does not consume the preset of its transition"
                )));
            }
            let mut post: Vec<PlaceId> = event.postset.iter().map(|&c| self.place_of(c)).collect();
            post.sort();
            if post != net.postset(event.transition) {
                return Err(CpNetMismatch::new(format!(
                    "event {e} does not produce the postset of its transition"
                )));
            }
            for &c in &event.preset {
                if self.conditions[c.0].consumer != Some(e) {
                    return Err(CpNetMismatch::new(format!("condition link broken at {e}")));
                }
                if let Some(prod) = self.conditions[c.0].producer {
                    if prod >= e {
                        return Err(CpNetMismatch::new(format!(
                            "event ids are not topological at {e}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The process and net do not fit together.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("process/net mismatch: {reason}")]
pub struct CpNetMismatch {
    pub reason: String,
}

impl CpNetMismatch {
    pub(crate) fn new(reason: String) -> CpNetMismatch {
        CpNetMismatch { reason }
    }
}

/// A timestamp per event, indexed by event id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimingFunction(Vec<Time>);

/// A delay per event (its flow), indexed by event id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowFunction(Vec<Time>);

macro_rules! event_vec_impl {
    ($name:ident) => {
        impl $name {
            pub fn from_times(values: Vec<Time>) -> $name {
                $name(values)
            }

            pub fn from_ints(values: &[i64]) -> $name {
                $name(values.iter().map(|&v| crate::time::time(v)).collect())
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn get(&self, e: EventId) -> &Time {
                &self.0[e.0]
            }

            pub fn values(&self) -> &[Time] {
                &self.0
            }
        }
    };
}

event_vec_impl!(TimingFunction);
event_vec_impl!(FlowFunction);

/// Error shared by the per-event map operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EventMapError {
    #[error("expected {expected} per-event values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

fn check_len(cp: &CausalProcess, len: usize) -> Result<(), EventMapError> {
    if len != cp.event_count() {
        return Err(EventMapError::LengthMismatch {
            expected: cp.event_count(),
            got: len,
        });
    }
    Ok(())
}

/// Latest timestamp among producers of `conds` restricted to the preset
/// places of `t`, or zero when only minimal conditions feed it. This is
/// the time of enabledness: the moment `t`'s input tokens were all there.
pub fn toe(
    net: &TimePetriNet,
    cp: &CausalProcess,
    tau: &TimingFunction,
    conds: &BTreeSet<CondId>,
    t: TransitionId,
) -> Time {
    let mut best = Time::zero();
    for &c in conds {
        if !net.preset(t).contains(&cp.place_of(c)) {
            continue;
        }
        if let Some(producer) = cp.producer(c) {
            best = best.max(tau.get(producer).clone());
        }
    }
    best
}

/// Enabledness time of a single event: latest producer timestamp of its
/// preset conditions, or zero for events fed only by minimal conditions.
pub fn event_toe(cp: &CausalProcess, tau: &TimingFunction, e: EventId) -> Time {
    let mut best = Time::zero();
    for &c in cp.preset_conds(e) {
        if let Some(producer) = cp.producer(c) {
            best = best.max(tau.get(producer).clone());
        }
    }
    best
}

/// Turns absolute timestamps into flows: each event's delay since its
/// input tokens were available. Events without predecessor events keep
/// their absolute timestamp.
pub fn flow(cp: &CausalProcess, tau: &TimingFunction) -> Result<FlowFunction, EventMapError> {
    check_len(cp, tau.len())?;
    let values = cp
        .event_ids()
        .map(|e| {
            if cp.pred_events(e).is_empty() {
                tau.get(e).clone()
            } else {
                tau.get(e) - event_toe(cp, tau, e)
            }
        })
        .collect();
    Ok(FlowFunction(values))
}

/// Inverse of [`flow`]: rebuilds absolute timestamps from flows in
/// topological order. On linear processes this is a prefix sum.
pub fn unflow(cp: &CausalProcess, flows: &FlowFunction) -> Result<TimingFunction, EventMapError> {
    check_len(cp, flows.len())?;
    let mut tau: Vec<Time> = Vec::with_capacity(cp.event_count());
    for e in cp.event_ids() {
        let preds = cp.pred_events(e);
        let reference = if preds.is_empty() {
            Time::zero()
        } else {
            preds
                .iter()
                .map(|p| tau[p.0].clone())
                .max()
                .unwrap()
                .max(Time::zero())
        };
        tau.push(flows.get(e) + reference);
    }
    Ok(TimingFunction(tau))
}

/// Error from [`cut`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CutError {
    #[error("event set is not downward-closed: {event} is included but its predecessor {missing} is not")]
    NotDownwardClosed { event: EventId, missing: EventId },
}

/// The marking (as conditions) reached after exactly the events of
/// `events` have fired: their postsets plus the minimal conditions, minus
/// everything they consumed. `events` must be downward-closed.
pub fn cut(cp: &CausalProcess, events: &BTreeSet<EventId>) -> Result<BTreeSet<CondId>, CutError> {
    for &e in events {
        for pred in cp.pred_events(e) {
            if !events.contains(&pred) {
                return Err(CutError::NotDownwardClosed { event: e, missing: pred });
            }
        }
    }
    let mut result: BTreeSet<CondId> = cp.min_conditions().iter().copied().collect();
    for &e in events {
        result.extend(cp.postset_conds(e).iter().copied());
    }
    for &e in events {
        for c in cp.preset_conds(e) {
            result.remove(c);
        }
    }
    Ok(result)
}

/// Error from [`earlier`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum EarlierError {
    #[error("timing is not monotone: the set of events before {event} is not downward-closed")]
    NotDownwardClosed { event: EventId },
}

/// Events strictly before `e` under `tau`: smaller timestamp, or equal
/// timestamp and causally before `e`. For monotone timings the result is
/// downward-closed; otherwise the violation is reported.
pub fn earlier(
    cp: &CausalProcess,
    tau: &TimingFunction,
    e: EventId,
) -> Result<BTreeSet<EventId>, EarlierError> {
    let anc = cp.ancestor_table();
    let stamp = tau.get(e);
    let result: BTreeSet<EventId> = cp
        .event_ids()
        .filter(|&other| {
            other != e
                && (tau.get(other) < stamp || (tau.get(other) == stamp && anc[e.0][other.0]))
        })
        .collect();
    for &other in &result {
        for pred in cp.pred_events(other) {
            if !result.contains(&pred) {
                return Err(EarlierError::NotDownwardClosed { event: e });
            }
        }
    }
    Ok(result)
}

/// Why a timing function is invalid for its process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TimingViolation {
    /// The event fires before its transition's earliest firing time has
    /// elapsed since its tokens arrived.
    BelowEft {
        transition: String,
        earliest: Time,
        got: Time,
    },
    /// Some transition enabled alongside the event passed its deadline
    /// before the event fired.
    MissedDeadline {
        event_stamp: Time,
        urgent: String,
        deadline: Time,
    },
    /// The process simply stops although a transition was still due.
    Incomplete { urgent: String, deadline: Time },
}

impl fmt::Display for TimingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimingViolation::BelowEft {
                transition,
                earliest,
                got,
            } => write!(
                f,
                "`{transition}` fires at {got}, before its earliest possible time {earliest}"
            ),
            TimingViolation::MissedDeadline {
                event_stamp,
                urgent,
                deadline,
            } => write!(
                f,
                "firing at {event_stamp} lets enabled `{urgent}` pass its deadline {deadline}"
            ),
            TimingViolation::Incomplete { urgent, deadline } => write!(
                f,
                "process ends although `{urgent}` was due by {deadline}"
            ),
        }
    }
}

/// Outcome of a validity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidityVerdict {
    Valid,
    Invalid {
        /// Offending event, or the last event for completeness failures.
        event: EventId,
        violation: TimingViolation,
    },
}

impl ValidityVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidityVerdict::Valid)
    }
}

/// Error from the validity checkers (distinct from an invalid verdict).
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidityCheckError {
    #[error(transparent)]
    Mismatch(#[from] CpNetMismatch),
    #[error(transparent)]
    Length(#[from] EventMapError),
    #[error("net is not extended free choice; use the general checker")]
    NotExtendedFreeChoice,
}

/// Checks `tau` against the net semantics, dispatching to the fast
/// extended-free-choice checker when the net allows it.
pub fn is_valid_timing(
    net: &TimePetriNet,
    cp: &CausalProcess,
    tau: &TimingFunction,
) -> Result<ValidityVerdict, ValidityCheckError> {
    if net.is_extended_free_choice() {
        is_valid_timing_efc(net, cp, tau)
    } else {
        is_valid_timing_general(net, cp, tau)
    }
}

/// General validity checker, straight from the definition: every event
/// waits out its earliest firing time, and no transition enabled at the
/// moment an event fires has already passed its deadline; finally, the
/// run may only stop once nothing is overdue.
pub fn is_valid_timing_general(
    net: &TimePetriNet,
    cp: &CausalProcess,
    tau: &TimingFunction,
) -> Result<ValidityVerdict, ValidityCheckError> {
    cp.check_against(net)?;
    check_len(cp, tau.len())?;

    for e in cp.event_ids() {
        let t = cp.transition_of(e);
        let earliest = event_toe(cp, tau, e) + net.interval(t).eft();
        if *tau.get(e) < earliest {
            return Ok(ValidityVerdict::Invalid {
                event: e,
                violation: TimingViolation::BelowEft {
                    transition: net.transition_name(t).to_string(),
                    earliest,
                    got: tau.get(e).clone(),
                },
            });
        }
    }

    for e in cp.event_ids() {
        let before = earlier(cp, tau, e).expect("monotone after the earliest-time pass");
        let conds = cut(cp, &before).expect("downward-closed");
        let mut marking = Marking::empty(net.place_count());
        for &c in &conds {
            let p = cp.place_of(c);
            marking.set_tokens(p, marking.tokens(p) + 1);
        }
        for u in net.enabled(&marking) {
            let enabled_since = toe(net, cp, tau, &conds, u);
            let deadline = net.interval(u).lft().plus(&enabled_since);
            if deadline.lt_time(tau.get(e)) {
                let deadline = deadline.as_finite().cloned().expect("finite deadline");
                return Ok(ValidityVerdict::Invalid {
                    event: e,
                    violation: TimingViolation::MissedDeadline {
                        event_stamp: tau.get(e).clone(),
                        urgent: net.transition_name(u).to_string(),
                        deadline,
                    },
                });
            }
        }
    }

    check_completeness(net, cp, tau)
}

/// Fast validity checker for extended-free-choice nets: per-event checks
/// against the preset group's joint deadline plus the completeness check
/// at the end of the run.
pub fn is_valid_timing_efc(
    net: &TimePetriNet,
    cp: &CausalProcess,
    tau: &TimingFunction,
) -> Result<ValidityVerdict, ValidityCheckError> {
    if !net.is_extended_free_choice() {
        return Err(ValidityCheckError::NotExtendedFreeChoice);
    }
    cp.check_against(net)?;
    check_len(cp, tau.len())?;

    for e in cp.event_ids() {
        let t = cp.transition_of(e);
        let since = event_toe(cp, tau, e);
        let earliest = &since + net.interval(t).eft();
        if *tau.get(e) < earliest {
            return Ok(ValidityVerdict::Invalid {
                event: e,
                violation: TimingViolation::BelowEft {
                    transition: net.transition_name(t).to_string(),
                    earliest,
                    got: tau.get(e).clone(),
                },
            });
        }
        // While the event's tokens sit there, every transition of its
        // preset group is enabled; the flow may not outwait the group.
        let deadline = net.group_lft(t).plus(&since);
        if deadline.lt_time(tau.get(e)) {
            let urgent = net
                .preset_group(t)
                .iter()
                .copied()
                .find(|&u| net.interval(u).lft() == net.group_lft(t))
                .expect("group attains its minimum");
            return Ok(ValidityVerdict::Invalid {
                event: e,
                violation: TimingViolation::MissedDeadline {
                    event_stamp: tau.get(e).clone(),
                    urgent: net.transition_name(urgent).to_string(),
                    deadline: deadline.as_finite().cloned().expect("finite deadline"),
                },
            });
        }
    }

    check_completeness(net, cp, tau)
}

/// A process may only end once no enabled transition is overdue: every
/// extension of the final cut must still be fireable at the last stamp.
fn check_completeness(
    net: &TimePetriNet,
    cp: &CausalProcess,
    tau: &TimingFunction,
) -> Result<ValidityVerdict, ValidityCheckError> {
    let Some(last) = tau.values().iter().cloned().max() else {
        return Ok(ValidityVerdict::Valid); // no events, nothing overdue
    };
    let conds = cp.final_cut();
    let mut marking = Marking::empty(net.place_count());
    for &c in &conds {
        let p = cp.place_of(c);
        marking.set_tokens(p, marking.tokens(p) + 1);
    }
    for u in net.enabled(&marking) {
        let enabled_since = toe(net, cp, tau, &conds, u);
        let deadline = net.interval(u).lft().plus(&enabled_since);
        if deadline.lt_time(&last) {
            let event = cp
                .event_ids()
                .max_by_key(|&e| tau.get(e).clone())
                .expect("non-empty");
            return Ok(ValidityVerdict::Invalid {
                event,
                violation: TimingViolation::Incomplete {
                    urgent: net.transition_name(u).to_string(),
                    deadline: deadline.as_finite().cloned().expect("finite deadline"),
                },
            });
        }
    }
    Ok(ValidityVerdict::Valid)
}

/// Sum of absolute stamp differences between two timings on the same
/// event set.
pub fn manhattan(t1: &TimingFunction, t2: &TimingFunction) -> Result<Time, EventMapError> {
    if t1.len() != t2.len() {
        return Err(EventMapError::LengthMismatch {
            expected: t1.len(),
            got: t2.len(),
        });
    }
    Ok(t1
        .values()
        .iter()
        .zip(t2.values())
        .map(|(a, b)| crate::time::abs_diff(a, b))
        .sum())
}

/// Sum of absolute flow differences between two timings of `cp`.
pub fn delay_distance(
    cp: &CausalProcess,
    t1: &TimingFunction,
    t2: &TimingFunction,
) -> Result<Time, EventMapError> {
    let f1 = flow(cp, t1)?;
    let f2 = flow(cp, t2)?;
    Ok(f1
        .values()
        .iter()
        .zip(f2.values())
        .map(|(a, b)| crate::time::abs_diff(a, b))
        .sum())
}

/// Error from [`chain_intervals`].
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("process is not linear; stamp alignment needs a totally ordered run")]
pub struct NotLinear;

/// Static intervals of a linear process's transitions in chain order; the
/// input the stamp alignment works on.
pub fn chain_intervals(
    net: &TimePetriNet,
    cp: &CausalProcess,
) -> Result<Vec<StaticInterval>, NotLinear> {
    if !cp.is_linear() {
        return Err(NotLinear);
    }
    Ok(cp
        .event_ids()
        .map(|e| net.interval(cp.transition_of(e)).clone())
        .collect())
}
