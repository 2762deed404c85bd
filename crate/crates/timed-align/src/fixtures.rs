//! Small reference nets and processes used across the test suite, the
//! bundled example files and the benchmarks.
//!
//! Each fixture is built programmatically so tests can cross-check the
//! file parser against an independent construction of the same net.

use crate::causal::{CausalProcess, CpBuilder, TimingFunction};
use crate::time::{time, Time};
use crate::tpn::{StaticInterval, TimePetriNet, TransitionId};

/// Looks up transitions by name and attaches integer timestamps.
pub fn timed_run(net: &TimePetriNet, steps: &[(&str, i64)]) -> Vec<(TransitionId, Time)> {
    steps
        .iter()
        .map(|&(name, stamp)| {
            (
                net.find_transition(name)
                    .unwrap_or_else(|| panic!("no transition named `{name}`")),
                time(stamp),
            )
        })
        .collect()
}

/// Looks up transitions by name.
pub fn untimed_run(net: &TimePetriNet, names: &[&str]) -> Vec<TransitionId> {
    names
        .iter()
        .map(|&name| {
            net.find_transition(name)
                .unwrap_or_else(|| panic!("no transition named `{name}`"))
        })
        .collect()
}

/// The running example net: a forks into two branches — a b/c choice and
/// a timed self-loop d next to e — joined again by f.
///
/// ```text
///        ┌─ p1 ─ b[1,1] ─┐
/// p0 ─ a ┤     c[0,2]    ├ p3,p4 ─ f[0,3] ─ p5
///        └─ p2 ─ e[1,4] ─┘
///              d[1,3] (self-loop on p2)
/// ```
pub fn fork_join_net() -> TimePetriNet {
    let mut b = TimePetriNet::builder();
    b.name("fork-join");
    for p in ["p0", "p1", "p2", "p3", "p4", "p5"] {
        b.place(p);
    }
    b.transition("a", "a", StaticInterval::unbounded(0));
    b.transition("b", "b", StaticInterval::closed(1, 1));
    b.transition("c", "c", StaticInterval::closed(0, 2));
    b.transition("d", "d", StaticInterval::closed(1, 3));
    b.transition("e", "e", StaticInterval::closed(1, 4));
    b.transition("f", "f", StaticInterval::closed(0, 3));
    b.arc("p0", "a").arc("a", "p1").arc("a", "p2");
    b.arc("p1", "b").arc("b", "p3");
    b.arc("p1", "c").arc("c", "p3");
    b.arc("p2", "d").arc("d", "p2");
    b.arc("p2", "e").arc("e", "p4");
    b.arc("p3", "f").arc("p4", "f").arc("f", "p5");
    b.initial("p0", 1).final_marking("p5", 1);
    b.build().expect("fixture net")
}

/// A pure chain net `p0 -t1-> p1 -t2-> ...` with the given finite
/// intervals; transition `ti` is labelled `ti`.
pub fn chain_net(intervals: &[(i64, i64)]) -> TimePetriNet {
    let mut b = TimePetriNet::builder();
    b.name("chain");
    for i in 0..=intervals.len() {
        b.place(&format!("p{i}"));
    }
    for (i, &(eft, lft)) in intervals.iter().enumerate() {
        let name = format!("t{}", i + 1);
        b.transition(&name, &name, StaticInterval::closed(eft, lft));
        b.arc(&format!("p{i}"), &name);
        b.arc(&name, &format!("p{}", i + 1));
    }
    b.initial("p0", 1);
    b.final_marking(&format!("p{}", intervals.len()), 1);
    b.build().expect("fixture net")
}

/// Three-step chain `[0,1];[2,2];[1,1]` used by the distance examples.
pub fn chain_three() -> TimePetriNet {
    chain_net(&[(0, 1), (2, 2), (1, 1)])
}

/// Six-step chain `[0,1];[2,2];[2,4];[0,1];[0,0];[2,4]` used by the
/// stamp-alignment walkthrough.
pub fn chain_six() -> TimePetriNet {
    chain_net(&[(0, 1), (2, 2), (2, 4), (0, 1), (0, 0), (2, 4)])
}

/// The complete run `t1, t2, ...` of a chain net.
pub fn chain_run(net: &TimePetriNet) -> Vec<TransitionId> {
    net.transition_ids().collect()
}

/// A cyclic net whose initial marking is also final: a fast self-loop `a`
/// competing with `b`, then a c/d choice and e back to the start.
pub fn loop_net() -> TimePetriNet {
    let mut b = TimePetriNet::builder();
    b.name("loop");
    b.place("q").place("p1").place("p2");
    b.transition("a", "a", StaticInterval::closed(0, 2));
    b.transition("b", "b", StaticInterval::closed(2, 2));
    b.transition("c", "c", StaticInterval::closed(2, 3));
    b.transition("d", "d", StaticInterval::closed(0, 3));
    b.transition("e", "e", StaticInterval::closed(2, 2));
    b.arc("q", "a").arc("a", "q");
    b.arc("q", "b").arc("b", "p1");
    b.arc("p1", "c").arc("c", "p2");
    b.arc("p1", "d").arc("d", "p2");
    b.arc("p2", "e").arc("e", "q");
    b.initial("q", 1).final_marking("q", 1);
    b.build().expect("fixture net")
}

/// Two independent one-step branches plus a join transition that never
/// fires; the returned process contains just the two branch events.
pub fn join_pair_net() -> (TimePetriNet, CausalProcess) {
    let mut b = TimePetriNet::builder();
    b.name("join-pair");
    for p in ["s1", "s2", "m1", "m2", "out"] {
        b.place(p);
    }
    b.transition("u", "u", StaticInterval::closed(0, 10));
    b.transition("v", "v", StaticInterval::closed(0, 10));
    b.transition("join", "j", StaticInterval::closed(0, 10));
    b.arc("s1", "u").arc("u", "m1");
    b.arc("s2", "v").arc("v", "m2");
    b.arc("m1", "join").arc("m2", "join").arc("join", "out");
    b.initial("s1", 1).initial("s2", 1).final_marking("out", 1);
    let net = b.build().expect("fixture net");
    let run = untimed_run(&net, &["u", "v"]);
    let cp = crate::causal::unroll_prefix(&net, &run).expect("fireable prefix");
    (net, cp)
}

/// A branching process with a two-token place: c and d both feed the
/// place consumed by g, and g takes d's (later) token. Because the run is
/// not 1-safe it is built by hand rather than unrolled. Returns the
/// process together with its reference timing.
pub fn branching_join_process() -> (TimePetriNet, CausalProcess, TimingFunction) {
    let mut builder = TimePetriNet::builder();
    builder.name("branching-join");
    for p in ["i1", "i2", "pa", "pb1", "pb2", "pcd", "pe", "pf", "pg"] {
        builder.place(p);
    }
    builder.transition("a", "a", StaticInterval::closed(0, 2));
    builder.transition("b", "b", StaticInterval::closed(0, 1));
    builder.transition("c", "c", StaticInterval::closed(3, 3));
    builder.transition("d", "d", StaticInterval::closed(6, 8));
    builder.transition("e", "e", StaticInterval::closed(6, 8));
    builder.transition("f", "f", StaticInterval::closed(0, 1));
    builder.transition("g", "g", StaticInterval::closed(3, 5));
    builder.arc("i1", "a").arc("a", "pa");
    builder.arc("i2", "b").arc("b", "pb1").arc("b", "pb2");
    builder.arc("pa", "c").arc("c", "pcd");
    builder.arc("pb1", "d").arc("d", "pcd");
    builder.arc("pb2", "e").arc("e", "pe");
    builder.arc("pe", "f").arc("f", "pf");
    builder.arc("pcd", "g").arc("g", "pg");
    builder.initial("i1", 1).initial("i2", 1);
    builder
        .final_marking("pcd", 1)
        .final_marking("pf", 1)
        .final_marking("pg", 1);
    let net = builder.build().expect("fixture net");

    let t = |name: &str| net.find_transition(name).unwrap();
    let mut cp = CpBuilder::new(&net);
    let i1 = cp.available(net.find_place("i1").unwrap())[0];
    let i2 = cp.available(net.find_place("i2").unwrap())[0];
    cp.add_event(t("a"), &[i1]).unwrap();
    cp.add_event(t("b"), &[i2]).unwrap();
    let pa = cp.available(net.find_place("pa").unwrap())[0];
    cp.add_event(t("c"), &[pa]).unwrap();
    let pb1 = cp.available(net.find_place("pb1").unwrap())[0];
    let ev_d = cp.add_event(t("d"), &[pb1]).unwrap();
    let pb2 = cp.available(net.find_place("pb2").unwrap())[0];
    cp.add_event(t("e"), &[pb2]).unwrap();
    let pe = cp.available(net.find_place("pe").unwrap())[0];
    cp.add_event(t("f"), &[pe]).unwrap();
    // Two tokens sit on pcd; g takes the one d produced.
    let pcd_tokens = cp.available(net.find_place("pcd").unwrap());
    let from_d = pcd_tokens
        .into_iter()
        .find(|&c| cp.process().producer(c) == Some(ev_d))
        .unwrap();
    cp.add_event(t("g"), &[from_d]).unwrap();
    let cp = cp.finish();
    let tau = TimingFunction::from_ints(&[1, 2, 5, 6, 6, 8, 8]);
    (net, cp, tau)
}

/// One initial choice between two label-`a` steps and a label-`b` step,
/// each branch continuing with two more instantaneous `a` steps into the
/// shared sink. The slow branch starts with `b` at time 100.
pub fn branch_choice_net() -> TimePetriNet {
    let mut b = TimePetriNet::builder();
    b.name("branch-choice");
    for p in ["p0", "u1", "u2", "l1", "l2", "end"] {
        b.place(p);
    }
    b.transition("a1", "a", StaticInterval::closed(0, 0));
    b.transition("a2", "a", StaticInterval::closed(0, 0));
    b.transition("a3", "a", StaticInterval::closed(0, 0));
    b.transition("b1", "b", StaticInterval::closed(100, 100));
    b.transition("a4", "a", StaticInterval::closed(0, 0));
    b.transition("a5", "a", StaticInterval::closed(0, 0));
    b.arc("p0", "a1").arc("a1", "u1");
    b.arc("u1", "a2").arc("a2", "u2");
    b.arc("u2", "a3").arc("a3", "end");
    b.arc("p0", "b1").arc("b1", "l1");
    b.arc("l1", "a4").arc("a4", "l2");
    b.arc("l2", "a5").arc("a5", "end");
    b.initial("p0", 1).final_marking("end", 1);
    b.build().expect("fixture net")
}

/// Two self-loop transitions on one place; runs of any length replay and
/// the net's initial marking is also final. Used by the scaling benches.
pub fn looping_pair_net() -> TimePetriNet {
    let mut b = TimePetriNet::builder();
    b.name("looping-pair");
    b.place("q");
    b.transition("a", "a", StaticInterval::closed(1, 2));
    b.transition("b", "b", StaticInterval::closed(0, 3));
    b.arc("q", "a").arc("a", "q");
    b.arc("q", "b").arc("b", "q");
    b.initial("q", 1).final_marking("q", 1);
    b.build().expect("fixture net")
}
