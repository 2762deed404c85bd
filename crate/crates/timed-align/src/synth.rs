//! Random instance generators for differential testing: sequential
//! chains for the stamp aligner and extended-free-choice nets with
//! concurrency, joins, and competing deadlines for the delay aligner.
//! Both are sized for the exhaustive oracle.

use rand::Rng;

use crate::causal::TimingFunction;
use crate::fixtures::chain_net;
use crate::time::time;
use crate::tpn::{StaticInterval, TimePetriNet, TransitionId};

/// A chain net together with an observed stamp vector for its full run.
#[derive(Clone, Debug)]
pub struct LinearInstance {
    pub net: TimePetriNet,
    pub sigma: TimingFunction,
}

/// Random sequential instance: a chain of `1..=max_events` transitions
/// with integer intervals inside `[0, max_bound]` and i.i.d. integer
/// observed stamps in `[0, max_stamp]`. The observation is arbitrary —
/// it need not be valid, monotone, or even close to feasible.
pub fn random_linear_instance(
    rng: &mut impl Rng,
    max_events: usize,
    max_bound: i64,
    max_stamp: i64,
) -> LinearInstance {
    let len = rng.gen_range(1..=max_events.max(1));
    linear_instance_of_len(rng, len, max_bound, max_stamp)
}

/// [`random_linear_instance`] with the chain length fixed instead of
/// sampled; the benchmarks need rows of an exact size.
pub fn linear_instance_of_len(
    rng: &mut impl Rng,
    len: usize,
    max_bound: i64,
    max_stamp: i64,
) -> LinearInstance {
    let bounds: Vec<(i64, i64)> = (0..len)
        .map(|_| {
            let eft = rng.gen_range(0..=max_bound);
            (eft, rng.gen_range(eft..=max_bound))
        })
        .collect();
    let sigma = TimingFunction::from_times(
        (0..len).map(|_| time(rng.gen_range(0..=max_stamp))).collect(),
    );
    LinearInstance {
        net: chain_net(&bounds),
        sigma,
    }
}

/// An extended-free-choice net, one of its runs, and an observation.
#[derive(Clone, Debug)]
pub struct EfcInstance {
    pub net: TimePetriNet,
    pub run: Vec<TransitionId>,
    pub sigma: TimingFunction,
}

/// Random extended-free-choice instance built by forward construction.
///
/// Each step picks a block of one or two currently marked places as a
/// preset, attaches one or two transitions to exactly that block (so
/// presets are pairwise equal or disjoint and the net is extended free
/// choice by construction), fires one member of the group, and routes
/// its output to fresh places. Postsets being fresh keeps the net
/// acyclic and one-safe; blocks drawn across steps create joins and
/// concurrency; unfired group members become transitions that are
/// enabled for a while and then disabled, exercising shared deadlines.
///
/// Every created preset block is consumed by its fired transition, so
/// the final marking (the places left over) enables nothing. On such
/// nets the delay aligner's end-of-run completeness check is vacuous,
/// which makes exhaustive-search comparisons exact.
///
/// Intervals are integers inside `[0, max_bound]`; observed stamps are
/// prefix sums of increments in `[0, max_bound]`, so the observation is
/// monotone like a parsed trace but otherwise unconstrained.
pub fn random_efc_instance(
    rng: &mut impl Rng,
    max_events: usize,
    max_bound: i64,
) -> EfcInstance {
    let events = rng.gen_range(1..=max_events.max(1));
    let mut b = TimePetriNet::builder();
    b.name("random-efc");

    let mut place_count = 0usize;
    let mut fresh_place = |b: &mut crate::tpn::NetBuilder, n: usize| -> Vec<String> {
        (0..n)
            .map(|_| {
                let name = format!("p{place_count}");
                place_count += 1;
                b.place(&name);
                name
            })
            .collect()
    };

    let initial = fresh_place(&mut b, rng.gen_range(1..=2));
    for p in &initial {
        b.initial(p, 1);
    }
    // Marked places not yet consumed by any fired transition.
    let mut pool: Vec<String> = initial;
    let mut run_names: Vec<String> = Vec::new();

    for step in 0..events {
        let block_size = rng.gen_range(1..=pool.len().min(2));
        let mut block = Vec::with_capacity(block_size);
        for _ in 0..block_size {
            let at = rng.gen_range(0..pool.len());
            block.push(pool.swap_remove(at));
        }

        let group_size = rng.gen_range(1..=2);
        let fired = rng.gen_range(0..group_size);
        for member in 0..group_size {
            let name = if member == fired {
                format!("t{step}")
            } else {
                format!("t{step}x{member}")
            };
            let eft = rng.gen_range(0..=max_bound);
            let lft = rng.gen_range(eft..=max_bound);
            b.transition(&name, &name, StaticInterval::closed(eft, lft));
            for p in &block {
                b.arc(p, &name);
            }
            if member == fired {
                let outputs = fresh_place(&mut b, rng.gen_range(1..=2));
                for p in &outputs {
                    b.arc(&name, p);
                }
                pool.extend(outputs);
                run_names.push(name);
            }
        }
    }

    for p in &pool {
        b.final_marking(p, 1);
    }
    let net = b.build().expect("forward construction is well formed");
    let run: Vec<TransitionId> = run_names
        .iter()
        .map(|name| net.find_transition(name).expect("just declared"))
        .collect();

    let mut stamp = 0i64;
    let sigma = TimingFunction::from_times(
        (0..events)
            .map(|_| {
                stamp += rng.gen_range(0..=max_bound);
                time(stamp)
            })
            .collect(),
    );
    EfcInstance { net, run, sigma }
}
