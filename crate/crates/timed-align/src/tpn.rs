//! Time Petri nets and their timed firing semantics.
//!
//! A net couples an ordinary place/transition net with a static firing
//! interval per transition: once a transition becomes enabled, a clock
//! starts; the transition may fire only after its earliest firing time and
//! — the urgency rule — an enabled transition must fire or be disabled no
//! later than its latest firing time. Both replay of recorded runs
//! ([`replay_timed`]) and randomized simulation ([`simulate_random`]) live
//! here, together with the structural test used to pick the fast alignment
//! path ([`TimePetriNet::is_extended_free_choice`]).

use crate::time::{time, Time, TimeBound};
use num::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

/// Index of a place within its net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlaceId(pub usize);

/// Index of a transition within its net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransitionId(pub usize);

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p#{}", self.0)
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t#{}", self.0)
    }
}

/// Static firing interval `[eft, lft]` of a transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticInterval {
    eft: Time,
    lft: TimeBound,
}

/// Error building a [`StaticInterval`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntervalError {
    #[error("earliest firing time {eft} is negative")]
    NegativeEft { eft: Time },
    #[error("empty interval: earliest firing time {eft} exceeds latest {lft}")]
    Empty { eft: Time, lft: TimeBound },
}

impl StaticInterval {
    pub fn new(eft: Time, lft: TimeBound) -> Result<StaticInterval, IntervalError> {
        if eft < Time::zero() {
            return Err(IntervalError::NegativeEft { eft });
        }
        if lft.lt_time(&eft) {
            return Err(IntervalError::Empty { eft, lft });
        }
        Ok(StaticInterval { eft, lft })
    }

    /// Convenience constructor for integer bounds; panics on an empty
    /// interval, so reserve it for literals.
    pub fn closed(eft: i64, lft: i64) -> StaticInterval {
        StaticInterval::new(time(eft), TimeBound::finite(lft)).expect("non-empty interval literal")
    }

    /// Convenience constructor for `[eft, inf)`; panics on negative `eft`.
    pub fn unbounded(eft: i64) -> StaticInterval {
        StaticInterval::new(time(eft), TimeBound::Infinite).expect("valid interval literal")
    }

    pub fn eft(&self) -> &Time {
        &self.eft
    }

    pub fn lft(&self) -> &TimeBound {
        &self.lft
    }
}

impl fmt::Display for StaticInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.eft, self.lft)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Place {
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Transition {
    pub name: String,
    pub label: String,
    pub interval: StaticInterval,
    pub preset: Vec<PlaceId>,
    pub postset: Vec<PlaceId>,
}

/// Token count per place.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Marking(Vec<u32>);

impl Marking {
    pub fn empty(place_count: usize) -> Marking {
        Marking(vec![0; place_count])
    }

    pub fn tokens(&self, p: PlaceId) -> u32 {
        self.0[p.0]
    }

    pub fn set_tokens(&mut self, p: PlaceId, n: u32) {
        self.0[p.0] = n;
    }

    /// Places whose token count exceeds one; empty on 1-safe markings.
    pub fn overfull_places(&self) -> Vec<PlaceId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 1)
            .map(|(i, _)| PlaceId(i))
            .collect()
    }

    pub fn marked_places(&self) -> Vec<PlaceId> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, _)| PlaceId(i))
            .collect()
    }

    fn consume(&mut self, places: &[PlaceId]) {
        for &p in places {
            debug_assert!(self.0[p.0] > 0, "consuming from an empty place");
            self.0[p.0] -= 1;
        }
    }

    fn produce(&mut self, places: &[PlaceId]) {
        for &p in places {
            self.0[p.0] += 1;
        }
    }
}

/// A time Petri net: places, interval-labelled transitions, arcs and the
/// initial/final markings that delimit complete runs.
#[derive(Clone, Debug)]
pub struct TimePetriNet {
    name: Option<String>,
    description: Option<String>,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    arcs: Vec<(String, String)>,
    initial: Marking,
    final_marking: Marking,
    // Derived structure, computed once at build time.
    consumers: Vec<Vec<TransitionId>>,
    groups: Vec<Vec<TransitionId>>,
    group_lfts: Vec<TimeBound>,
}

/// Error raised while assembling a net.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetBuildError {
    #[error("invalid identifier `{0}` (must be non-empty, without whitespace, `#` or `,`)")]
    BadIdentifier(String),
    #[error("duplicate identifier `{0}` (place and transition names share one namespace)")]
    DuplicateIdentifier(String),
    #[error("arc endpoint `{0}` is not a declared place or transition")]
    DanglingArc(String),
    #[error("arc `{0} -> {1}` must connect a place and a transition")]
    ArcKindMismatch(String, String),
    #[error("duplicate arc `{0} -> {1}`")]
    DuplicateArc(String, String),
    #[error("marking refers to unknown place `{0}`")]
    UnknownPlace(String),
    #[error("invalid interval for transition `{name}`: {source}")]
    BadInterval {
        name: String,
        #[source]
        source: IntervalError,
    },
}

fn valid_identifier(s: &str) -> bool {
    !s.is_empty() && !s.contains(|c: char| c.is_whitespace() || c == '#' || c == ',' || c == ';')
}

/// Incremental net constructor; declare places and transitions before the
/// arcs that use them.
pub struct NetBuilder {
    name: Option<String>,
    description: Option<String>,
    places: Vec<Place>,
    transitions: Vec<(String, String, StaticInterval)>,
    arcs: Vec<(String, String)>,
    initial: Vec<(String, u32)>,
    final_marking: Vec<(String, u32)>,
}

impl NetBuilder {
    pub fn new() -> NetBuilder {
        NetBuilder {
            name: None,
            description: None,
            places: Vec::new(),
            transitions: Vec::new(),
            arcs: Vec::new(),
            initial: Vec::new(),
            final_marking: Vec::new(),
        }
    }

    pub fn name(&mut self, name: &str) -> &mut Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn description(&mut self, description: &str) -> &mut Self {
        self.description = Some(description.to_string());
        self
    }

    pub fn place(&mut self, name: &str) -> &mut Self {
        self.places.push(Place {
            name: name.to_string(),
        });
        self
    }

    pub fn transition(&mut self, name: &str, label: &str, interval: StaticInterval) -> &mut Self {
        self.transitions
            .push((name.to_string(), label.to_string(), interval));
        self
    }

    /// Adds an arc; the direction (place to transition or back) is derived
    /// from the endpoint kinds at build time.
    pub fn arc(&mut self, from: &str, to: &str) -> &mut Self {
        self.arcs.push((from.to_string(), to.to_string()));
        self
    }

    pub fn initial(&mut self, place: &str, tokens: u32) -> &mut Self {
        self.initial.push((place.to_string(), tokens));
        self
    }

    pub fn final_marking(&mut self, place: &str, tokens: u32) -> &mut Self {
        self.final_marking.push((place.to_string(), tokens));
        self
    }

    pub fn build(&self) -> Result<TimePetriNet, NetBuildError> {
        let mut seen: HashMap<&str, ()> = HashMap::new();
        for p in &self.places {
            if !valid_identifier(&p.name) {
                return Err(NetBuildError::BadIdentifier(p.name.clone()));
            }
            if seen.insert(&p.name, ()).is_some() {
                return Err(NetBuildError::DuplicateIdentifier(p.name.clone()));
            }
        }
        for (name, label, _) in &self.transitions {
            if !valid_identifier(name) {
                return Err(NetBuildError::BadIdentifier(name.clone()));
            }
            if !valid_identifier(label) {
                return Err(NetBuildError::BadIdentifier(label.clone()));
            }
            if seen.insert(name, ()).is_some() {
                return Err(NetBuildError::DuplicateIdentifier(name.clone()));
            }
        }

        let place_ids: HashMap<&str, PlaceId> = self
            .places
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), PlaceId(i)))
            .collect();
        let transition_ids: HashMap<&str, TransitionId> = self
            .transitions
            .iter()
            .enumerate()
            .map(|(i, (name, _, _))| (name.as_str(), TransitionId(i)))
            .collect();

        let mut transitions: Vec<Transition> = self
            .transitions
            .iter()
            .map(|(name, label, interval)| {
                StaticInterval::new(interval.eft.clone(), interval.lft.clone())
                    .map_err(|source| NetBuildError::BadInterval {
                        name: name.clone(),
                        source,
                    })
                    .map(|interval| Transition {
                        name: name.clone(),
                        label: label.clone(),
                        interval,
                        preset: Vec::new(),
                        postset: Vec::new(),
                    })
            })
            .collect::<Result<_, _>>()?;

        let mut seen_arcs: HashMap<(&str, &str), ()> = HashMap::new();
        for (from, to) in &self.arcs {
            if seen_arcs.insert((from, to), ()).is_some() {
                return Err(NetBuildError::DuplicateArc(from.clone(), to.clone()));
            }
            match (
                place_ids.get(from.as_str()),
                transition_ids.get(from.as_str()),
                place_ids.get(to.as_str()),
                transition_ids.get(to.as_str()),
            ) {
                (Some(&p), None, None, Some(&t)) => transitions[t.0].preset.push(p),
                (None, Some(&t), Some(&p), None) => transitions[t.0].postset.push(p),
                (None, None, _, _) => return Err(NetBuildError::DanglingArc(from.clone())),
                (_, _, None, None) => return Err(NetBuildError::DanglingArc(to.clone())),
                _ => return Err(NetBuildError::ArcKindMismatch(from.clone(), to.clone())),
            }
        }
        for t in &mut transitions {
            t.preset.sort();
            t.postset.sort();
        }

        let mut initial = Marking::empty(self.places.len());
        for (name, tokens) in &self.initial {
            let &p = place_ids
                .get(name.as_str())
                .ok_or_else(|| NetBuildError::UnknownPlace(name.clone()))?;
            initial.set_tokens(p, *tokens);
        }
        let mut final_marking = Marking::empty(self.places.len());
        for (name, tokens) in &self.final_marking {
            let &p = place_ids
                .get(name.as_str())
                .ok_or_else(|| NetBuildError::UnknownPlace(name.clone()))?;
            final_marking.set_tokens(p, *tokens);
        }

        let mut consumers: Vec<Vec<TransitionId>> = vec![Vec::new(); self.places.len()];
        for (i, t) in transitions.iter().enumerate() {
            for &p in &t.preset {
                consumers[p.0].push(TransitionId(i));
            }
        }

        // Group transitions by identical preset; the group's latest firing
        // time is what urgency lets the whole conflict cluster wait for.
        let mut by_preset: BTreeMap<Vec<PlaceId>, Vec<TransitionId>> = BTreeMap::new();
        for (i, t) in transitions.iter().enumerate() {
            by_preset
                .entry(t.preset.clone())
                .or_default()
                .push(TransitionId(i));
        }
        let mut groups = vec![Vec::new(); transitions.len()];
        let mut group_lfts = vec![TimeBound::Infinite; transitions.len()];
        for members in by_preset.values() {
            let lft = members
                .iter()
                .map(|&t| transitions[t.0].interval.lft.clone())
                .min()
                .expect("non-empty group");
            for &t in members {
                groups[t.0] = members.clone();
                group_lfts[t.0] = lft.clone();
            }
        }

        Ok(TimePetriNet {
            name: self.name.clone(),
            description: self.description.clone(),
            places: self.places.clone(),
            transitions,
            arcs: self.arcs.clone(),
            initial,
            final_marking,
            consumers,
            groups,
            group_lfts,
        })
    }
}

impl Default for NetBuilder {
    fn default() -> Self {
        NetBuilder::new()
    }
}

impl TimePetriNet {
    pub fn builder() -> NetBuilder {
        NetBuilder::new()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn place_count(&self) -> usize {
        self.places.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn place_name(&self, p: PlaceId) -> &str {
        &self.places[p.0].name
    }

    pub fn transition_name(&self, t: TransitionId) -> &str {
        &self.transitions[t.0].name
    }

    pub fn label(&self, t: TransitionId) -> &str {
        &self.transitions[t.0].label
    }

    pub fn interval(&self, t: TransitionId) -> &StaticInterval {
        &self.transitions[t.0].interval
    }

    pub fn preset(&self, t: TransitionId) -> &[PlaceId] {
        &self.transitions[t.0].preset
    }

    pub fn postset(&self, t: TransitionId) -> &[PlaceId] {
        &self.transitions[t.0].postset
    }

    /// Arcs in declaration order, as name pairs.
    pub fn arcs(&self) -> &[(String, String)] {
        &self.arcs
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn final_marking(&self) -> &Marking {
        &self.final_marking
    }

    pub fn find_place(&self, name: &str) -> Option<PlaceId> {
        self.places
            .iter()
            .position(|p| p.name == name)
            .map(PlaceId)
    }

    pub fn find_transition(&self, name: &str) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .map(TransitionId)
    }

    pub fn transition_ids(&self) -> impl Iterator<Item = TransitionId> {
        (0..self.transitions.len()).map(TransitionId)
    }

    pub fn place_ids(&self) -> impl Iterator<Item = PlaceId> {
        (0..self.places.len()).map(PlaceId)
    }

    /// Transitions carrying the given observable label, in id order.
    pub fn transitions_labeled(&self, label: &str) -> Vec<TransitionId> {
        self.transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.label == label)
            .map(|(i, _)| TransitionId(i))
            .collect()
    }

    /// Transitions consuming from place `p`, in id order.
    pub fn consumers(&self, p: PlaceId) -> &[TransitionId] {
        &self.consumers[p.0]
    }

    /// All transitions whose preset equals `t`'s preset (including `t`).
    pub fn preset_group(&self, t: TransitionId) -> &[TransitionId] {
        &self.groups[t.0]
    }

    /// Minimum latest firing time over `t`'s preset group.
    pub fn group_lft(&self, t: TransitionId) -> &TimeBound {
        &self.group_lfts[t.0]
    }

    pub fn is_enabled(&self, t: TransitionId, marking: &Marking) -> bool {
        self.transitions[t.0]
            .preset
            .iter()
            .all(|&p| marking.tokens(p) > 0)
    }

    /// Transitions enabled at `marking`, in id order.
    pub fn enabled(&self, marking: &Marking) -> Vec<TransitionId> {
        self.transition_ids()
            .filter(|&t| self.is_enabled(t, marking))
            .collect()
    }

    /// Fires `t` untimed: consumes the preset, produces the postset.
    pub fn fire_untimed(&self, marking: &Marking, t: TransitionId) -> Marking {
        debug_assert!(self.is_enabled(t, marking));
        let mut next = marking.clone();
        next.consume(&self.transitions[t.0].preset);
        next.produce(&self.transitions[t.0].postset);
        next
    }

    /// `true` when any two transitions with overlapping presets have equal
    /// presets. On such nets urgency is decided per preset group, which is
    /// what the linear-time delay alignment exploits.
    pub fn is_extended_free_choice(&self) -> bool {
        for (i, a) in self.transitions.iter().enumerate() {
            for b in self.transitions.iter().skip(i + 1) {
                let overlap = a.preset.iter().any(|p| b.preset.contains(p));
                if overlap && a.preset != b.preset {
                    return false;
                }
            }
        }
        true
    }

    /// Formats a marking using place names, e.g. `{p0, p3:2}`.
    pub fn format_marking(&self, marking: &Marking) -> String {
        let mut parts = Vec::new();
        for p in self.place_ids() {
            match marking.tokens(p) {
                0 => {}
                1 => parts.push(self.place_name(p).to_string()),
                n => parts.push(format!("{}:{}", self.place_name(p), n)),
            }
        }
        format!("{{{}}}", parts.join(", "))
    }
}

/// A net state: marking plus one clock per enabled transition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetState {
    pub marking: Marking,
    pub clocks: BTreeMap<TransitionId, Time>,
}

impl NetState {
    /// The initial state: initial marking, all enabled clocks at zero.
    pub fn initial(net: &TimePetriNet) -> NetState {
        let marking = net.initial_marking().clone();
        let clocks = net
            .enabled(&marking)
            .into_iter()
            .map(|t| (t, Time::zero()))
            .collect();
        NetState { marking, clocks }
    }
}

/// Why a single timed firing was rejected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FireError {
    #[error("delay {delay} is negative")]
    NegativeDelay { delay: Time },
    #[error("transition `{transition}` is not enabled")]
    NotEnabled { transition: String },
    #[error("transition `{transition}` fires at clock {clock}, before its earliest firing time {eft}")]
    TooEarly {
        transition: String,
        clock: Time,
        eft: Time,
    },
    #[error("urgency violated: enabled transition `{blocking}` would pass its latest firing time {lft} (clock would reach {clock})")]
    Urgency {
        blocking: String,
        clock: Time,
        lft: TimeBound,
    },
}

/// Fires `t` after waiting `delay` time units from `state`.
///
/// Enforces the three timed firing rules: the clock of `t` must have
/// reached its earliest firing time, no enabled transition's clock may
/// pass its latest firing time while waiting, and clocks are updated with
/// the persist/reset rule (transitions still enabled after removing the
/// consumed tokens keep their advanced clock; freshly enabled ones restart
/// at zero).
pub fn fire(
    net: &TimePetriNet,
    state: &NetState,
    t: TransitionId,
    delay: &Time,
) -> Result<NetState, FireError> {
    if *delay < Time::zero() {
        return Err(FireError::NegativeDelay {
            delay: delay.clone(),
        });
    }
    if !net.is_enabled(t, &state.marking) {
        return Err(FireError::NotEnabled {
            transition: net.transition_name(t).to_string(),
        });
    }
    for (&u, clock) in &state.clocks {
        let advanced = clock + delay;
        if net.interval(u).lft().lt_time(&advanced) {
            return Err(FireError::Urgency {
                blocking: net.transition_name(u).to_string(),
                clock: advanced,
                lft: net.interval(u).lft().clone(),
            });
        }
    }
    let clock_t = &state.clocks[&t] + delay;
    if clock_t < *net.interval(t).eft() {
        return Err(FireError::TooEarly {
            transition: net.transition_name(t).to_string(),
            clock: clock_t,
            eft: net.interval(t).eft().clone(),
        });
    }

    let mut intermediate = state.marking.clone();
    intermediate.consume(net.preset(t));
    let mut marking = intermediate.clone();
    marking.produce(net.postset(t));

    let mut clocks = BTreeMap::new();
    for u in net.enabled(&marking) {
        let clock = if net.is_enabled(u, &intermediate) {
            // Still enabled with the consumed tokens removed: persists.
            &state.clocks[&u] + delay
        } else {
            // Newly enabled (or re-enabled by the produced tokens): resets.
            Time::zero()
        };
        clocks.insert(u, clock);
    }
    Ok(NetState { marking, clocks })
}

/// Why a replay declared a run invalid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayViolation {
    /// Timestamps must be non-decreasing from time zero onwards.
    TimestampDecrease { previous: Time, current: Time },
    Firing(FireError),
    /// A place collected more than one token; the net is not 1-safe here.
    UnsafeMarking { place: String },
    FinalMarkingMismatch { reached: String, expected: String },
}

impl fmt::Display for ReplayViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayViolation::TimestampDecrease { previous, current } => {
                write!(f, "timestamp {current} decreases below {previous}")
            }
            ReplayViolation::Firing(e) => write!(f, "{e}"),
            ReplayViolation::UnsafeMarking { place } => {
                write!(f, "place `{place}` holds more than one token")
            }
            ReplayViolation::FinalMarkingMismatch { reached, expected } => {
                write!(f, "run ends in {reached}, expected {expected}")
            }
        }
    }
}

/// Outcome of replaying a timed run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayVerdict {
    Valid,
    /// `step` is the run index at which the violation occurred;
    /// `run.len()` marks a final-marking mismatch after the last firing.
    Invalid {
        step: usize,
        violation: ReplayViolation,
    },
}

impl ReplayVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ReplayVerdict::Valid)
    }
}

/// Replays `run` (transition, absolute timestamp) from the initial state
/// and reports the first violation, if any. Invalidity is a verdict, not
/// an error: every run gets an answer.
pub fn replay_timed(net: &TimePetriNet, run: &[(TransitionId, Time)]) -> ReplayVerdict {
    if let Some(&place) = net.initial_marking().overfull_places().first() {
        return ReplayVerdict::Invalid {
            step: 0,
            violation: ReplayViolation::UnsafeMarking {
                place: net.place_name(place).to_string(),
            },
        };
    }
    let mut state = NetState::initial(net);
    let mut now = Time::zero();
    for (step, (t, stamp)) in run.iter().enumerate() {
        if *stamp < now {
            return ReplayVerdict::Invalid {
                step,
                violation: ReplayViolation::TimestampDecrease {
                    previous: now,
                    current: stamp.clone(),
                },
            };
        }
        let delay = stamp - &now;
        match fire(net, &state, *t, &delay) {
            Ok(next) => state = next,
            Err(e) => {
                return ReplayVerdict::Invalid {
                    step,
                    violation: ReplayViolation::Firing(e),
                }
            }
        }
        if let Some(&place) = state.marking.overfull_places().first() {
            return ReplayVerdict::Invalid {
                step,
                violation: ReplayViolation::UnsafeMarking {
                    place: net.place_name(place).to_string(),
                },
            };
        }
        now = stamp.clone();
    }
    if state.marking != *net.final_marking() {
        return ReplayVerdict::Invalid {
            step: run.len(),
            violation: ReplayViolation::FinalMarkingMismatch {
                reached: net.format_marking(&state.marking),
                expected: net.format_marking(net.final_marking()),
            },
        };
    }
    ReplayVerdict::Valid
}

/// Error from [`simulate_random`]; both variants report the run built so
/// far.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimulateError {
    #[error("simulation deadlocked after {} events without reaching the final marking", partial.len())]
    Deadlock { partial: Vec<(TransitionId, Time)> },
    #[error("simulation did not reach the final marking within {} events", partial.len())]
    MaxEventsExceeded { partial: Vec<(TransitionId, Time)> },
}

/// Produces a random timed run that replays as valid.
///
/// Each step samples a transition and a delay from the urgency-feasible
/// window (on a half-unit grid anchored at the window start, capped when
/// every latest firing time is infinite). Whenever the current marking
/// equals the final marking the simulation stops with probability 1/2, so
/// nets whose initial marking is also final yield short and empty runs.
/// Identical seeds yield identical runs.
pub fn simulate_random(
    net: &TimePetriNet,
    seed: u64,
    max_events: usize,
) -> Result<Vec<(TransitionId, Time)>, SimulateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = NetState::initial(net);
    let mut now = Time::zero();
    let mut run = Vec::new();
    let step = crate::time::ratio(1, 2);

    loop {
        let at_final = state.marking == *net.final_marking();
        let enabled = net.enabled(&state.marking);
        if at_final && (enabled.is_empty() || run.len() >= max_events || rng.gen_bool(0.5)) {
            return Ok(run);
        }
        if enabled.is_empty() {
            return Err(SimulateError::Deadlock { partial: run });
        }
        if run.len() >= max_events {
            return Err(SimulateError::MaxEventsExceeded { partial: run });
        }

        // Urgency cap: the delay may not push any enabled clock past its
        // latest firing time.
        let cap: TimeBound = enabled
            .iter()
            .filter_map(|&t| {
                net.interval(t)
                    .lft()
                    .as_finite()
                    .map(|lft| TimeBound::Finite(lft - &state.clocks[&t]))
            })
            .min()
            .unwrap_or(TimeBound::Infinite);

        let mut choices: Vec<(TransitionId, Time)> = Vec::new();
        for &t in &enabled {
            let lo = (net.interval(t).eft() - &state.clocks[&t]).max(Time::zero());
            if cap.lt_time(&lo) {
                continue; // cannot reach its earliest firing time in time
            }
            let hi = match &cap {
                TimeBound::Finite(h) => h.clone(),
                TimeBound::Infinite => &lo + time(8),
            };
            let slots = crate::time::floor_int(&((&hi - &lo) / &step));
            let slots: u64 = slots.try_into().unwrap_or(u64::MAX).min(16);
            let k = rng.gen_range(0..=slots);
            choices.push((t, &lo + time(k as i64) * &step));
        }
        debug_assert!(
            !choices.is_empty(),
            "some transition is always firable within the urgency cap"
        );
        let (t, delay) = choices[rng.gen_range(0..choices.len())].clone();
        state = fire(net, &state, t, &delay).expect("sampled firing is feasible");
        now += &delay;
        run.push((t, now.clone()));
    }
}
