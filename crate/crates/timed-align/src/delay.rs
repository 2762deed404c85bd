//! Delay-only alignment on extended free choice nets.
//!
//! The delay metric compares runs by their flow values — the waiting time
//! each event adds on top of its latest direct cause — so a single late
//! event is charged once, not propagated to every successor. On extended
//! free choice nets an optimal correction is local: each event's flow is
//! clamped into the window `[eft, l]` where `l` is the minimal latest
//! firing time over the transition's preset group, because the group
//! shares its tokens and the earliest group deadline caps any member.
//! The per-event clamp is a lower bound on any valid timing's cost, and
//! the scheduler below realizes it whenever a valid timing of the process
//! exists, firing events in deadline order so that urgency violations
//! surface as soon as they are forced.
//!
//! The scheduler tracks a firing-deadline table of the currently enabled
//! transitions. Each round it takes the entries with the soonest deadline
//! (`toe + l`), fires the process event with the smallest topological
//! index among those transitions, and refreshes the table: the whole
//! preset group leaves when its tokens are consumed, and freshly enabled
//! transitions enter with their time of enabling recomputed from the
//! corrected stamps of the producing events.

use crate::causal::{flow, CausalProcess, CpNetMismatch, EventId, FlowFunction, TimingFunction};
use crate::time::{abs_diff, Time, TimeBound};
use crate::tpn::{Marking, TimePetriNet, TransitionId};
use num::Zero;
use thiserror::Error;

/// One row of the scheduler's deadline table: transition `t` has been
/// enabled since `toe`; its flow window is `[eft, l]` with `l` the
/// minimal latest firing time over its preset group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiringDeadline {
    pub transition: TransitionId,
    pub eft: Time,
    pub l: TimeBound,
    pub toe: Time,
}

/// Result of a delay alignment: minimal total flow adjustment, the
/// corrected timing, and its flow values.
#[derive(Clone, Debug)]
pub struct DelayAlignment {
    pub cost: Time,
    pub gamma: TimingFunction,
    pub flow_gamma: FlowFunction,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DelayError {
    #[error("net is not extended free choice; delay alignment is undefined on it")]
    NotEfc,
    #[error(transparent)]
    Mismatch(#[from] CpNetMismatch),
    #[error("{events} events but {stamps} observed timestamps")]
    LengthMismatch { events: usize, stamps: usize },
    #[error("no valid timing at step {step}: {why}")]
    NoValidTiming { step: usize, why: String },
}

/// Window clamp: the closest point to `x` inside `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("empty window: lower bound {lo} exceeds upper bound {hi}")]
pub struct EmptyWindow {
    pub lo: Time,
    pub hi: Time,
}

pub fn clamp(x: &Time, lo: &Time, hi: &TimeBound) -> Result<Time, EmptyWindow> {
    if hi.lt_time(lo) {
        return Err(EmptyWindow {
            lo: lo.clone(),
            hi: hi.as_finite().cloned().expect("a bound below lo is finite"),
        });
    }
    Ok(if x < lo {
        lo.clone()
    } else if hi.lt_time(x) {
        hi.as_finite().cloned().expect("a bound below x is finite")
    } else {
        x.clone()
    })
}

fn unsafe_prefix(step: usize, place: &str) -> DelayError {
    CpNetMismatch::new(format!(
        "prefix marking after step {step} is not 1-safe at place {place}"
    ))
    .into()
}

/// Minimal-cost flow correction of `sigma` over the process `cp`.
///
/// Errors with [`DelayError::NoValidTiming`] when urgency forces a
/// transition the process has no event for, when an event's flow window
/// is empty, or when the finished schedule leaves an enabled transition
/// past its deadline. In the first two cases no valid timing of `cp`
/// exists at all. In the last case the verdict is about this schedule:
/// the per-event clamps are fixed before the end of the run is known, so
/// a costlier valid timing may exist that the local strategy cannot
/// reach. Nets whose final marking enables no transition never hit it.
pub fn align_delay(
    net: &TimePetriNet,
    cp: &CausalProcess,
    sigma: &TimingFunction,
) -> Result<DelayAlignment, DelayError> {
    if !net.is_extended_free_choice() {
        return Err(DelayError::NotEfc);
    }
    cp.check_against(net)?;
    if sigma.len() != cp.event_count() {
        return Err(DelayError::LengthMismatch {
            events: cp.event_count(),
            stamps: sigma.len(),
        });
    }
    let f_sigma = flow(cp, sigma).expect("length checked above");
    let n = cp.event_count();

    // The running cut, as the unique token per place of a 1-safe prefix.
    let mut holder: Vec<Option<crate::causal::CondId>> = vec![None; net.place_count()];
    for &c in cp.min_conditions() {
        let p = cp.place_of(c);
        if holder[p.0].is_some() {
            return Err(unsafe_prefix(0, net.place_name(p)));
        }
        holder[p.0] = Some(c);
    }

    let table_entry = |t: TransitionId, toe: Time| FiringDeadline {
        transition: t,
        eft: net.interval(t).eft().clone(),
        l: net.group_lft(t).clone(),
        toe,
    };
    let mut fd: Vec<Option<FiringDeadline>> = vec![None; net.transition_count()];
    let mut marking = Marking::empty(net.place_count());
    for (p, slot) in holder.iter().enumerate() {
        if slot.is_some() {
            marking.set_tokens(crate::tpn::PlaceId(p), 1);
        }
    }
    for t in net.enabled(&marking) {
        fd[t.0] = Some(table_entry(t, Time::zero()));
    }

    // Events of each transition in topological order; `heads` skips the
    // already-fired prefix.
    let mut by_transition: Vec<Vec<EventId>> = vec![Vec::new(); net.transition_count()];
    for e in cp.event_ids() {
        by_transition[cp.transition_of(e).0].push(e);
    }
    let mut heads = vec![0usize; net.transition_count()];

    let mut gamma = vec![Time::zero(); n];
    let mut flows = vec![Time::zero(); n];
    let mut fired = vec![false; n];

    let available = |e: EventId, holder: &[Option<crate::causal::CondId>]| {
        cp.preset_conds(e)
            .iter()
            .all(|&c| holder[cp.place_of(c).0] == Some(c))
    };

    for step in 0..n {
        // The soonest deadline among enabled transitions.
        let soonest = fd
            .iter()
            .flatten()
            .map(|entry| entry.l.plus(&entry.toe))
            .min()
            .ok_or_else(|| {
                CpNetMismatch::new(format!(
                    "no transition is enabled after step {step} but {} events remain",
                    n - step
                ))
            })?;

        // Among the transitions attaining it, the available event with
        // the smallest topological index. A condition has at most one
        // consumer, so at most one event of `t` can hold the current
        // tokens: the consumer of the token on `t`'s first input place.
        let mut pick: Option<(EventId, TransitionId)> = None;
        for entry in fd.iter().flatten() {
            if entry.l.plus(&entry.toe) != soonest {
                continue;
            }
            let t = entry.transition;
            let candidate = match net.preset(t).first() {
                Some(&p) => holder[p.0].and_then(|c| cp.consumer(c)),
                // No input places: every unfired event of t is available.
                None => {
                    let queue = &by_transition[t.0];
                    let head = &mut heads[t.0];
                    while *head < queue.len() && fired[queue[*head].0] {
                        *head += 1;
                    }
                    queue.get(*head).copied()
                }
            };
            if let Some(e) = candidate {
                if !fired[e.0]
                    && cp.transition_of(e) == t
                    && available(e, &holder)
                    && pick.map_or(true, |(p, _)| e < p)
                {
                    pick = Some((e, t));
                }
            }
        }
        let Some((e, t)) = pick else {
            let urgent: Vec<String> = fd
                .iter()
                .flatten()
                .filter(|entry| entry.l.plus(&entry.toe) == soonest)
                .map(|entry| net.transition_name(entry.transition).to_string())
                .collect();
            return Err(DelayError::NoValidTiming {
                step,
                why: format!(
                    "urgency forces one of [{}] to fire by {soonest} but the process has no event for them",
                    urgent.join(", ")
                ),
            });
        };

        let entry = fd[t.0].clone().expect("picked from the table");
        let f = clamp(f_sigma.get(e), &entry.eft, &entry.l).map_err(|w| {
            DelayError::NoValidTiming {
                step,
                why: format!(
                    "event {e} of {} needs a flow in the empty window [{}, {}]",
                    net.transition_name(t),
                    w.lo,
                    w.hi
                ),
            }
        })?;
        gamma[e.0] = &entry.toe + &f;
        flows[e.0] = f;
        fired[e.0] = true;

        // Consume the preset: the whole group loses its tokens.
        for &c in cp.preset_conds(e) {
            holder[cp.place_of(c).0] = None;
        }
        for &w in net.preset_group(t) {
            fd[w.0] = None;
        }

        // Produce the postset and admit freshly enabled transitions with
        // their time of enabling under the corrected stamps.
        for &c in cp.postset_conds(e) {
            let p = cp.place_of(c);
            if holder[p.0].is_some() {
                return Err(unsafe_prefix(step, net.place_name(p)));
            }
            holder[p.0] = Some(c);
        }
        for &c in cp.postset_conds(e) {
            for &t2 in net.consumers(cp.place_of(c)) {
                if fd[t2.0].is_some() {
                    continue;
                }
                if !net.preset(t2).iter().all(|&p| holder[p.0].is_some()) {
                    continue;
                }
                let toe = net
                    .preset(t2)
                    .iter()
                    .filter_map(|&p| holder[p.0])
                    .filter_map(|c| cp.producer(c))
                    .map(|prod| gamma[prod.0].clone())
                    .max()
                    .unwrap_or_else(Time::zero);
                fd[t2.0] = Some(table_entry(t2, toe));
            }
        }
    }

    // The run may only end once nothing enabled is already overdue; the
    // table now holds exactly the transitions enabled at the final cut,
    // checked against their own latest firing times.
    if let Some(last) = gamma.iter().max().cloned() {
        for entry in fd.iter().flatten() {
            let deadline = net.interval(entry.transition).lft().plus(&entry.toe);
            if deadline.lt_time(&last) {
                return Err(DelayError::NoValidTiming {
                    step: n,
                    why: format!(
                        "the schedule ends at {last} but {} has been enabled since {} and must fire by {deadline}",
                        net.transition_name(entry.transition),
                        entry.toe
                    ),
                });
            }
        }
    }

    let cost = flows
        .iter()
        .zip(f_sigma.values())
        .map(|(a, b)| abs_diff(a, b))
        .sum();
    Ok(DelayAlignment {
        cost,
        gamma: TimingFunction::from_times(gamma),
        flow_gamma: FlowFunction::from_times(flows),
    })
}
