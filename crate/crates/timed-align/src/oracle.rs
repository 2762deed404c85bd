//! Brute-force reference implementations at desk scale.
//!
//! Everything here trades speed for being obviously correct so that the
//! fast aligners can be cross-checked on small instances: exhaustive
//! grid enumeration of valid timings, minimum-cost search over that
//! enumeration for either metric, and the mixed-move distance between
//! two fixed timings of the same run.

use num::{One, Signed, Zero};
use thiserror::Error;

use crate::causal::{
    delay_distance, is_valid_timing_general, manhattan, CausalProcess, EventMapError,
    TimingFunction, ValidityCheckError,
};
use crate::time::{abs_diff, snap_up, time, Time, TimeBound};
use crate::tpn::TimePetriNet;

/// Largest run the exhaustive searches accept by default. The
/// `TIMED_ALIGN_GUARD` environment variable overrides it for local
/// experimentation; exceeding the effective limit is a hard error
/// either way.
pub const EVENT_LIMIT: usize = 8;

fn effective_limit() -> usize {
    std::env::var("TIMED_ALIGN_GUARD")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(EVENT_LIMIT)
}

/// Search lattice for the enumeration: candidate stamps are the
/// non-negative multiples of `step` up to `horizon`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grid {
    step: Time,
    horizon: Time,
}

/// Error from [`Grid::new`].
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("grid step must be positive, got {0}")]
    NonPositiveStep(Time),
    #[error("grid horizon must be non-negative, got {0}")]
    NegativeHorizon(Time),
}

impl Grid {
    pub fn new(step: Time, horizon: Time) -> Result<Grid, GridError> {
        if step <= Time::zero() {
            return Err(GridError::NonPositiveStep(step));
        }
        if horizon < Time::zero() {
            return Err(GridError::NegativeHorizon(horizon));
        }
        Ok(Grid { step, horizon })
    }

    /// Unit-step grid over `0..=horizon`, the right lattice for
    /// integer-valued instances.
    pub fn unit(horizon: i64) -> Grid {
        Grid::new(Time::one(), time(horizon)).expect("unit grid is well formed")
    }

    pub fn step(&self) -> &Time {
        &self.step
    }

    pub fn horizon(&self) -> &Time {
        &self.horizon
    }
}

/// Which per-event cost an alignment search minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Absolute timestamp differences.
    Stamp,
    /// Absolute flow (enabledness-to-firing delay) differences.
    Delay,
}

/// Error from the oracle searches.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("run has {events} events, above the exhaustive-search limit of {limit}")]
    TooManyEvents { events: usize, limit: usize },
    #[error("no valid timing lies on the grid")]
    EmptyFeasibleSet,
    #[error(transparent)]
    Check(#[from] ValidityCheckError),
    #[error(transparent)]
    Length(#[from] EventMapError),
}

fn guard(cp: &CausalProcess) -> Result<(), OracleError> {
    let limit = effective_limit();
    if cp.event_count() > limit {
        return Err(OracleError::TooManyEvents {
            events: cp.event_count(),
            limit,
        });
    }
    Ok(())
}

/// All timing functions of `cp` that lie on the grid and satisfy the
/// net semantics, in lexicographic order of their stamp vectors.
///
/// Candidates are generated event by event in run order. An event's
/// stamps range from its enabling time plus the earliest firing time up
/// to the deadline of its own transition (or the horizon when that is
/// unbounded); urgency caused by other transitions and end-of-run
/// completeness are left to the full validity checker, which filters
/// the generated combinations.
pub fn enumerate_valid_timings(
    net: &TimePetriNet,
    cp: &CausalProcess,
    grid: &Grid,
) -> Result<Vec<TimingFunction>, OracleError> {
    guard(cp)?;
    cp.check_against(net).map_err(ValidityCheckError::from)?;
    let mut stamps = Vec::with_capacity(cp.event_count());
    let mut out = Vec::new();
    extend_timing(net, cp, grid, &mut stamps, &mut out);
    Ok(out)
}

fn extend_timing(
    net: &TimePetriNet,
    cp: &CausalProcess,
    grid: &Grid,
    stamps: &mut Vec<Time>,
    out: &mut Vec<TimingFunction>,
) {
    if stamps.len() == cp.event_count() {
        let tau = TimingFunction::from_times(stamps.clone());
        let verdict = is_valid_timing_general(net, cp, &tau)
            .expect("process was validated against the net");
        if verdict.is_valid() {
            out.push(tau);
        }
        return;
    }
    let e = crate::causal::EventId(stamps.len());
    // Producers of earlier-indexed conditions are already stamped, so the
    // enabling time of `e` is fully determined by the prefix.
    let mut toe = Time::zero();
    for &c in cp.preset_conds(e) {
        if let Some(p) = cp.producer(c) {
            toe = toe.max(stamps[p.0].clone());
        }
    }
    let interval = net.interval(cp.transition_of(e));
    let cap = match interval.lft() {
        TimeBound::Finite(l) => (toe.clone() + l).min(grid.horizon().clone()),
        TimeBound::Infinite => grid.horizon().clone(),
    };
    let mut x = snap_up(&(toe + interval.eft()), grid.step());
    while x <= cap {
        stamps.push(x.clone());
        extend_timing(net, cp, grid, stamps, out);
        stamps.pop();
        x += grid.step();
    }
}

/// Minimum-cost timing found by exhaustive search.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteAlignment {
    pub cost: Time,
    pub gamma: TimingFunction,
}

/// Exhaustive minimum-cost alignment: enumerates every valid timing on
/// the grid and returns the cheapest one under the chosen metric (the
/// first such timing in enumeration order when there are ties).
///
/// Exact whenever some optimal timing lies on the grid, which holds for
/// integer-valued instances searched with a unit step and a horizon
/// past the last interesting stamp.
pub fn brute_align(
    net: &TimePetriNet,
    cp: &CausalProcess,
    sigma: &TimingFunction,
    metric: Metric,
    grid: &Grid,
) -> Result<BruteAlignment, OracleError> {
    let mut best: Option<BruteAlignment> = None;
    for gamma in enumerate_valid_timings(net, cp, grid)? {
        let cost = match metric {
            Metric::Stamp => manhattan(sigma, &gamma)?,
            Metric::Delay => delay_distance(cp, sigma, &gamma)?,
        };
        if best.as_ref().map_or(true, |b| cost < b.cost) {
            best = Some(BruteAlignment { cost, gamma });
        }
    }
    best.ok_or(OracleError::EmptyFeasibleSet)
}

/// Minimum cost of rewriting `t1` into `t2` when both move kinds are
/// available: a delay move at event `e` shifts `e` and all its causal
/// successors by some amount `d_e` at cost `|d_e|`, and a stamp move
/// pays the per-event difference that remains. Any move sequence
/// collapses to one net delay per event followed by one stamp edit per
/// event, so the distance is
///
/// ```text
/// min over d of  Σ_e |d_e|  +  Σ_e |δ(e) − Σ_{a ⊑ e} d_a|
/// ```
///
/// with `δ = t2 − t1` and `⊑` the reflexive causal order of the run.
///
/// The objective is a convex piecewise-linear function of `d` that
/// grows in every direction, so its minimum is attained at a vertex of
/// the hyperplane arrangement formed by the kinks `d_e = 0` and
/// `Σ_{a ⊑ e} d_a = δ(e)`. The search solves every n-subset of those 2n
/// hyperplanes (skipping singular systems) and takes the best value,
/// which is exact with no grid assumptions. Guarded by [`EVENT_LIMIT`]:
/// the subset count is C(2n, n).
pub fn mixed_distance(
    cp: &CausalProcess,
    t1: &TimingFunction,
    t2: &TimingFunction,
) -> Result<Time, OracleError> {
    guard(cp)?;
    let n = cp.event_count();
    for t in [t1, t2] {
        if t.len() != n {
            return Err(OracleError::Length(EventMapError::LengthMismatch {
                expected: n,
                got: t.len(),
            }));
        }
    }
    if n == 0 {
        return Ok(Time::zero());
    }

    let delta: Vec<Time> = t2
        .values()
        .iter()
        .zip(t1.values())
        .map(|(b, a)| b - a)
        .collect();

    // Reflexive ancestor sets as bitmasks over run indices.
    let strict = cp.ancestor_table();
    let mut anc = vec![0u32; n];
    for e in 0..n {
        anc[e] |= 1 << e;
        for a in 0..n {
            if strict[e][a] {
                anc[e] |= 1 << a;
            }
        }
    }

    let objective = |d: &[Time]| -> Time {
        let mut total = Time::zero();
        for e in 0..n {
            total += d[e].abs();
            let shift: Time = (0..n)
                .filter(|a| anc[e] >> a & 1 == 1)
                .map(|a| d[a].clone())
                .sum();
            total += abs_diff(&delta[e], &shift);
        }
        total
    };

    let mut best: Option<Time> = None;
    // Split the events into those contributing a "no delay here" plane
    // and those contributing an "accumulated delay matches δ" plane;
    // every n-of-2n subset of planes arises from exactly one split.
    for zeroed in 0u32..1 << n {
        let wanted = n - zeroed.count_ones() as usize;
        for matched in 0u32..1 << n {
            if matched.count_ones() as usize != wanted {
                continue;
            }
            let mut lhs = vec![vec![Time::zero(); n]; n];
            let mut rhs = vec![Time::zero(); n];
            let mut row = 0;
            for e in 0..n {
                if zeroed >> e & 1 == 1 {
                    lhs[row][e] = Time::one();
                    row += 1;
                }
            }
            for e in 0..n {
                if matched >> e & 1 == 1 {
                    for a in 0..n {
                        if anc[e] >> a & 1 == 1 {
                            lhs[row][a] = Time::one();
                        }
                    }
                    rhs[row] = delta[e].clone();
                    row += 1;
                }
            }
            if let Some(d) = solve_square(lhs, rhs) {
                let cost = objective(&d);
                if best.as_ref().map_or(true, |b| cost < *b) {
                    best = Some(cost);
                }
            }
        }
    }
    Ok(best.expect("the all-zero-delay system is always solvable"))
}

/// Gauss–Jordan elimination over the rationals; `None` when the system
/// is singular.
fn solve_square(mut lhs: Vec<Vec<Time>>, mut rhs: Vec<Time>) -> Option<Vec<Time>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !lhs[r][col].is_zero())?;
        lhs.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = lhs[col].clone();
        let pivot_rhs = rhs[col].clone();
        let p = pivot_row[col].clone();
        for r in 0..n {
            if r == col || lhs[r][col].is_zero() {
                continue;
            }
            let f = &lhs[r][col] / &p;
            for c in col..n {
                let delta = &pivot_row[c] * &f;
                lhs[r][c] -= delta;
            }
            rhs[r] -= &pivot_rhs * &f;
        }
    }
    Some((0..n).map(|i| &rhs[i] / &lhs[i][i]).collect())
}
