//! Acceptance suite: one test per release criterion, each printing a
//! single PASS/FAIL line (visible with `--nocapture`). Costs are
//! compared as exact rationals with zero tolerance; wall-clock bounds
//! and scaling slopes use the constants pinned here.

use std::panic::AssertUnwindSafe;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use timed_align::causal::{
    delay_distance, flow, is_valid_timing, manhattan, unflow, unroll_prefix, CausalProcess,
    FlowFunction, TimingFunction,
};
use timed_align::delay::{align_delay, DelayError};
use timed_align::fixtures::{
    branch_choice_net, chain_run, chain_six, chain_three, fork_join_net, loop_net,
    looping_pair_net, untimed_run,
};
use timed_align::general::{align_general, CostConfig};
use timed_align::oracle::{brute_align, mixed_distance, Grid, Metric, OracleError};
use timed_align::plf::ConvexPlf;
use timed_align::stamp::{align_stamp, cost_graphs};
use timed_align::synth::{
    linear_instance_of_len, random_efc_instance, random_linear_instance, EfcInstance,
    LinearInstance,
};
use timed_align::time::{abs_diff, ratio, snap_up, time, Time, TimeBound};
use timed_align::tpn::{
    replay_timed, simulate_random, ReplayVerdict, StaticInterval, TimePetriNet, TransitionId,
};

/// Runs one criterion body and prints its PASS/FAIL line. The line goes
/// straight to the process stdout (one atomic write) so it shows up even
/// when the harness captures test output.
fn criterion(number: usize, what: &str, body: impl FnOnce()) {
    let report = |verdict: &str| {
        use std::io::Write;
        let line = format!("acceptance criterion {number} ({what}): {verdict}\n");
        let mut out = std::io::stdout().lock();
        let _ = out.write_all(line.as_bytes());
        let _ = out.flush();
    };
    match std::panic::catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => report("PASS"),
        Err(cause) => {
            report("FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

fn times(values: &[i64]) -> TimingFunction {
    TimingFunction::from_ints(values)
}

fn full_chain_process(net: &TimePetriNet) -> CausalProcess {
    unroll_prefix(net, &chain_run(net)).expect("chain run fires")
}

/// The 200 sequential instances shared by the exhaustive-search and
/// property criteria: at most five events, integer interval bounds at
/// most 4, integer observations at most 12.
fn sequential_instances() -> Vec<LinearInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ea1);
    (0..200)
        .map(|_| random_linear_instance(&mut rng, 5, 4, 12))
        .collect()
}

/// The 200 extended-free-choice instances shared by the delay and
/// property criteria: at most five events, integer data at most 4.
fn concurrent_instances() -> Vec<EfcInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xefc);
    (0..200)
        .map(|_| random_efc_instance(&mut rng, 5, 4))
        .collect()
}

fn intervals_of(net: &TimePetriNet) -> Vec<StaticInterval> {
    net.transition_ids().map(|t| net.interval(t).clone()).collect()
}

#[test]
fn criterion_1_six_step_stamp_walkthrough() {
    criterion(1, "six-step stamp walkthrough", || {
        let net = chain_six();
        let sigma: Vec<Time> = [1, 2, 4, 6, 6, 8].iter().map(|&v| time(v)).collect();
        let intervals = intervals_of(&net);

        let start = Instant::now();
        let al = align_stamp(&intervals, &sigma).unwrap();
        let elapsed = start.elapsed();

        assert_eq!(al.cost, time(2), "minimum cost must be exactly 2");
        assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");

        // The returned repair is valid and really costs 2.
        let cp = full_chain_process(&net);
        assert!(is_valid_timing(&net, &cp, &al.gamma).unwrap().is_valid());
        assert_eq!(
            manhattan(&TimingFunction::from_times(sigma.clone()), &al.gamma).unwrap(),
            time(2)
        );

        // The reference optimum is one admissible answer: itself valid
        // with cost 2. Any other cost-2 valid repair passes equally.
        let reference = times(&[0, 2, 5, 6, 6, 8]);
        assert!(is_valid_timing(&net, &cp, &reference).unwrap().is_valid());
        assert_eq!(
            manhattan(&TimingFunction::from_times(sigma), &reference).unwrap(),
            time(2)
        );
    });
}

#[test]
fn criterion_2_three_step_metric_comparison() {
    criterion(2, "three-step metric comparison", || {
        let net = chain_three();
        let cp = full_chain_process(&net);
        let sigma = times(&[3, 4, 5]);
        let expected_gamma = times(&[1, 3, 4]);

        let stamp = align_stamp(&intervals_of(&net), sigma.values()).unwrap();
        assert_eq!(stamp.cost, time(4));
        assert_eq!(stamp.gamma, expected_gamma);

        let delay = align_delay(&net, &cp, &sigma).unwrap();
        assert_eq!(delay.cost, time(3));
        assert_eq!(delay.gamma, expected_gamma);

        let mixed = mixed_distance(&cp, &sigma, &expected_gamma).unwrap();
        assert_eq!(mixed, time(2));
    });
}

#[test]
fn criterion_3_stamp_aligner_matches_exhaustive_search() {
    criterion(3, "stamp aligner matches exhaustive search", || {
        // Horizon 20 covers the whole feasible set: along a chain every
        // firing time is at most the sum of the latest bounds, 5 * 4.
        let grid = Grid::unit(20);
        let start = Instant::now();
        for (index, inst) in sequential_instances().iter().enumerate() {
            let fast = align_stamp(&intervals_of(&inst.net), inst.sigma.values()).unwrap();
            let cp = full_chain_process(&inst.net);
            let brute = brute_align(&inst.net, &cp, &inst.sigma, Metric::Stamp, &grid).unwrap();
            assert_eq!(fast.cost, brute.cost, "instance {index}");
        }
        let elapsed = start.elapsed();
        assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    });
}

#[test]
fn criterion_4_delay_aligner_matches_exhaustive_search() {
    criterion(4, "delay aligner matches exhaustive search", || {
        // Horizon 25 covers the whole feasible set: five events of
        // depth at most five with bounds at most 4 stay below 20.
        let grid = Grid::unit(25);
        for (index, inst) in concurrent_instances().iter().enumerate() {
            let cp = unroll_prefix(&inst.net, &inst.run).unwrap();
            let fast = align_delay(&inst.net, &cp, &inst.sigma);
            let brute = brute_align(&inst.net, &cp, &inst.sigma, Metric::Delay, &grid);
            match (fast, brute) {
                (Ok(fast), Ok(brute)) => {
                    assert_eq!(fast.cost, brute.cost, "instance {index}");
                    assert!(
                        is_valid_timing(&inst.net, &cp, &fast.gamma).unwrap().is_valid(),
                        "instance {index}: returned repair must be valid"
                    );
                }
                (Err(DelayError::NoValidTiming { .. }), Err(OracleError::EmptyFeasibleSet)) => {}
                (fast, brute) => panic!(
                    "instance {index}: aligner and exhaustive search disagree: \
                     {fast:?} vs {brute:?}"
                ),
            }
        }
    });
}

#[test]
fn criterion_5_replay_and_process_validity_agree() {
    criterion(5, "replay and process validity agree", || {
        let nets = [fork_join_net(), loop_net(), chain_three(), chain_six()];
        let mut rng = ChaCha8Rng::seed_from_u64(0x5a5a);
        let mut simulated = 0usize;
        for net in &nets {
            for seed in 0..125u64 {
                let run = simulate_random(net, seed, 40).unwrap();
                simulated += 1;

                // The sampled run is valid under both notions.
                assert_eq!(replay_timed(net, &run), ReplayVerdict::Valid, "seed {seed}");
                let untimed: Vec<TransitionId> = run.iter().map(|&(t, _)| t).collect();
                let stamps: Vec<Time> = run.iter().map(|(_, s)| s.clone()).collect();
                let cp = unroll_prefix(net, &untimed).unwrap();
                assert!(
                    is_valid_timing(net, &cp, &TimingFunction::from_times(stamps.clone()))
                        .unwrap()
                        .is_valid(),
                    "seed {seed}"
                );

                // Nudge one timestamp (keeping the sequence nondecreasing,
                // which replay requires of any observation) and check that
                // both notions still return the same verdict.
                if run.is_empty() {
                    continue;
                }
                for _ in 0..2 {
                    let mut nudged = stamps.clone();
                    let at = rng.gen_range(0..nudged.len());
                    let deltas = [
                        time(-2),
                        time(-1),
                        ratio(-1, 2),
                        ratio(1, 2),
                        time(1),
                        time(2),
                    ];
                    nudged[at] += &deltas[rng.gen_range(0..deltas.len())];
                    for i in 1..nudged.len() {
                        if nudged[i] < nudged[i - 1] {
                            nudged[i] = nudged[i - 1].clone();
                        }
                    }
                    let timed: Vec<(TransitionId, Time)> = untimed
                        .iter()
                        .zip(&nudged)
                        .map(|(&t, s)| (t, s.clone()))
                        .collect();
                    let replay_ok = replay_timed(net, &timed) == ReplayVerdict::Valid;
                    let validity_ok =
                        is_valid_timing(net, &cp, &TimingFunction::from_times(nudged))
                            .unwrap()
                            .is_valid();
                    assert_eq!(
                        replay_ok, validity_ok,
                        "seed {seed}: replay and validity disagree on a nudged timing"
                    );
                }
            }
        }
        assert_eq!(simulated, 500);
    });
}

fn median_secs(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    samples[samples.len() / 2]
}

fn timed_median(reps: usize, mut work: impl FnMut()) -> f64 {
    let samples: Vec<f64> = (0..reps)
        .map(|_| {
            let start = Instant::now();
            work();
            start.elapsed().as_secs_f64()
        })
        .collect();
    median_secs(samples)
}

fn stamp_repair_time(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let inst = linear_instance_of_len(rng, n, 6, 3 * n as i64);
    let intervals = intervals_of(&inst.net);
    timed_median(3, || {
        let al = align_stamp(&intervals, inst.sigma.values()).unwrap();
        std::hint::black_box(&al);
    })
}

fn delay_repair_time(rng: &mut ChaCha8Rng, n: usize) -> f64 {
    let net = looping_pair_net();
    let a = net.find_transition("a").unwrap();
    let b = net.find_transition("b").unwrap();
    let run: Vec<TransitionId> = (0..n).map(|i| if i % 2 == 0 { a } else { b }).collect();
    let cp = unroll_prefix(&net, &run).unwrap();
    let mut now = 0i64;
    let tau = TimingFunction::from_times(
        (0..n)
            .map(|_| {
                now += rng.gen_range(0..=2);
                time(now)
            })
            .collect(),
    );
    timed_median(5, || {
        let al = align_delay(&net, &cp, &tau).unwrap();
        std::hint::black_box(&al);
    })
}

#[test]
fn criterion_6_scaling() {
    criterion(6, "scaling", || {
        // Sequential repair: quadratic at worst. Compare medians at
        // n = 100 and n = 1000; the log-log slope must stay below 2.5
        // and the large instances must finish well within a minute.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1e);
        let t_small = stamp_repair_time(&mut rng, 100);
        let large_start = Instant::now();
        let t_large = stamp_repair_time(&mut rng, 1000);
        assert!(
            large_start.elapsed().as_secs_f64() < 60.0,
            "three n=1000 repairs took {:?}",
            large_start.elapsed()
        );
        let stamp_slope = (t_large / t_small).ln() / 10f64.ln();
        assert!(
            stamp_slope <= 2.5,
            "stamp slope {stamp_slope:.2} from {t_small:.4}s to {t_large:.4}s"
        );

        // Delay repair: linear in the number of events for a fixed net.
        let d_small = delay_repair_time(&mut rng, 200);
        let d_large = delay_repair_time(&mut rng, 2000);
        let delay_slope = (d_large / d_small).ln() / 10f64.ln();
        assert!(
            delay_slope <= 1.3,
            "delay slope {delay_slope:.2} from {d_small:.4}s to {d_large:.4}s"
        );
    });
}

/// Minimum of a convex piecewise-linear graph over `[lo, hi]`, taken
/// independently of the library's own window operation: convexity puts
/// the minimum at a window endpoint or an interior breakpoint.
fn window_min(g: &ConvexPlf, lo: &Time, hi: &Time) -> Time {
    let (dom_lo, dom_hi) = g.domain();
    let mut lo = lo.clone().max(dom_lo.clone());
    let mut hi = hi.clone();
    if let TimeBound::Finite(end) = dom_hi {
        lo = lo.min(end.clone());
        hi = hi.min(end.clone());
    }
    assert!(lo <= hi, "window misses the domain");
    let mut best = g.eval(&lo).min(g.eval(&hi));
    for seg in g.segments() {
        if seg.left > lo && seg.left < hi {
            best = best.min(g.eval(&seg.left));
        }
    }
    best
}

/// Every point worth probing on `g`: its breakpoints plus the integer
/// grid across its (finite) domain.
fn probe_points(g: &ConvexPlf) -> Vec<Time> {
    let (lo, hi) = g.domain();
    let TimeBound::Finite(hi) = hi else {
        panic!("finite domains only in these instances");
    };
    let mut xs = vec![lo.clone(), hi.clone()];
    for seg in g.segments() {
        xs.push(seg.left.clone());
    }
    let mut x = snap_up(lo, &time(1));
    while &x <= hi {
        xs.push(x.clone());
        x += time(1);
    }
    xs.retain(|x| x >= lo && x <= hi);
    xs
}

fn check_recursion_identity(intervals: &[StaticInterval], sigma: &[Time]) {
    let graphs = cost_graphs(intervals, sigma).unwrap();
    for (i, g) in graphs.iter().enumerate() {
        g.validate().unwrap_or_else(|why| panic!("step {i}: {why}"));
        for x in probe_points(g) {
            let expected = if i == 0 {
                abs_diff(&x, &sigma[0])
            } else {
                let a = intervals[i].eft();
                let TimeBound::Finite(b) = intervals[i].lft() else {
                    panic!("finite bounds only in these instances");
                };
                abs_diff(&x, &sigma[i]) + window_min(&graphs[i - 1], &(&x - b), &(&x - a))
            };
            assert_eq!(g.eval(&x), expected, "step {i} at {x}");
        }
    }
}

#[test]
fn criterion_7_metric_property_suites() {
    criterion(7, "metric property suites", || {
        let chain = chain_six();
        let chain_cp = full_chain_process(&chain);
        let fj = fork_join_net();
        let fj_cp = unroll_prefix(&fj, &untimed_run(&fj, &["a", "b", "d", "e", "f"])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0xa110);

        // Metric axioms for the stamp and delay distances: 1000 exact
        // sampled triples split across a chain and a concurrent process.
        for (cp, events) in [(&chain_cp, 6usize), (&fj_cp, 5usize)] {
            let random_tau = |rng: &mut ChaCha8Rng| {
                TimingFunction::from_times(
                    (0..events).map(|_| ratio(rng.gen_range(-8..=32), 2)).collect(),
                )
            };
            for _ in 0..500 {
                let x = random_tau(&mut rng);
                let y = random_tau(&mut rng);
                let z = random_tau(&mut rng);
                let dt = |p: &TimingFunction, q: &TimingFunction| manhattan(p, q).unwrap();
                let dth =
                    |p: &TimingFunction, q: &TimingFunction| delay_distance(cp, p, q).unwrap();
                let metrics: [&dyn Fn(&TimingFunction, &TimingFunction) -> Time; 2] =
                    [&dt, &dth];
                for d in metrics {
                    assert!(d(&x, &y) >= time(0));
                    assert_eq!(d(&x, &x), time(0));
                    assert_eq!(d(&x, &y) == time(0), x == y);
                    assert_eq!(d(&x, &y), d(&y, &x));
                    assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z));
                }
            }
        }

        // Flow/unflow is a bijection: 1000 random monotone timings come
        // back unchanged, and flows round-trip the other way too.
        for (cp, events) in [(&chain_cp, 6usize), (&fj_cp, 5usize)] {
            for _ in 0..500 {
                let mut values: Vec<Time> = Vec::with_capacity(events);
                for e in cp.event_ids() {
                    let base = cp
                        .preset_conds(e)
                        .iter()
                        .filter_map(|&c| cp.producer(c))
                        .map(|p| values[p.0].clone())
                        .max()
                        .unwrap_or_else(|| time(0));
                    values.push(base + ratio(rng.gen_range(0..=6), 2));
                }
                let tau = TimingFunction::from_times(values);
                let f = flow(cp, &tau).unwrap();
                assert_eq!(unflow(cp, &f).unwrap(), tau);

                let raw = FlowFunction::from_times(
                    (0..events).map(|_| ratio(rng.gen_range(0..=12), 2)).collect(),
                );
                assert_eq!(flow(cp, &unflow(cp, &raw).unwrap()).unwrap(), raw);
            }
        }

        // Convexity and the defining recursion of every intermediate
        // cost graph, for the walkthrough chains and all 200 random
        // sequential instances.
        check_recursion_identity(&intervals_of(&chain), &[1, 2, 4, 6, 6, 8].map(time));
        check_recursion_identity(&intervals_of(&chain_three()), &[3, 4, 5].map(time));
        for inst in sequential_instances() {
            check_recursion_identity(&intervals_of(&inst.net), inst.sigma.values());
        }

        // The mixed distance never exceeds either pure metric, on every
        // exhaustive-search instance and its aligned repairs.
        let mut checked = 0usize;
        for inst in sequential_instances() {
            let cp = full_chain_process(&inst.net);
            let mut repairs = vec![align_stamp(&intervals_of(&inst.net), inst.sigma.values())
                .unwrap()
                .gamma];
            if let Ok(d) = align_delay(&inst.net, &cp, &inst.sigma) {
                repairs.push(d.gamma);
            }
            for gamma in repairs {
                let mixed = mixed_distance(&cp, &inst.sigma, &gamma).unwrap();
                assert!(mixed <= manhattan(&inst.sigma, &gamma).unwrap());
                assert!(mixed <= delay_distance(&cp, &inst.sigma, &gamma).unwrap());
                checked += 1;
            }
        }
        for inst in concurrent_instances() {
            let cp = unroll_prefix(&inst.net, &inst.run).unwrap();
            if let Ok(d) = align_delay(&inst.net, &cp, &inst.sigma) {
                let mixed = mixed_distance(&cp, &inst.sigma, &d.gamma).unwrap();
                assert!(mixed <= manhattan(&inst.sigma, &d.gamma).unwrap());
                assert!(mixed <= delay_distance(&cp, &inst.sigma, &d.gamma).unwrap());
                checked += 1;
            }
        }
        assert!(checked >= 400, "only {checked} mixed-distance comparisons ran");
    });
}

#[test]
fn criterion_8_run_edit_pipeline() {
    criterion(8, "run-edit pipeline", || {
        let net = branch_choice_net();
        let word: Vec<(String, Time)> = (0..3).map(|_| ("a".to_string(), time(100))).collect();

        // With two candidate runs the aligner may leave the observed
        // labels for the branch whose timing fits: one substitution
        // (a delete plus an insert) and no time cost at all.
        let config = CostConfig::new(time(1), ratio(1, 10), 2).unwrap();
        let best = align_general(&net, &word, &config, Metric::Stamp).unwrap();
        assert_eq!(best.total, time(2));
        let labels: Vec<&str> = best.aligned_word.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["b", "a", "a"]);

        // With a single candidate it must keep the label-perfect run and
        // pay for all the timing damage instead: 300 units at weight 1/10.
        let config = CostConfig::new(time(1), ratio(1, 10), 1).unwrap();
        let only = align_general(&net, &word, &config, Metric::Stamp).unwrap();
        assert_eq!(only.total, time(30));
    });
}
