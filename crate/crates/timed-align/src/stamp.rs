//! Timestamp-only alignment for sequential runs.
//!
//! Given a chain of firing intervals and the observed timestamps of a
//! sequential run, find corrected timestamps that make the run fireable
//! while minimizing the total absolute change. The solver sweeps a convex
//! piecewise-linear cost graph forward over the run — windowed minimum
//! for each firing interval, plus an absolute-deviation term for each
//! observed stamp — then walks backward through the stored graphs to
//! extract one optimal correction, preferring values close to the
//! observation.
//!
//! The same problem can be written as an L1 regression with difference
//! constraints; [`lp_text`]/[`export_lp`] emit that formulation for an
//! external LP solver.

use crate::causal::{chain_intervals, CausalProcess, NotLinear, TimingFunction};
use crate::plf::ConvexPlf;
use crate::time::{abs_diff, Time, TimeBound};
use crate::tpn::{StaticInterval, TimePetriNet};
use num::Zero;
use std::fmt::Write as _;
use thiserror::Error;

/// Result of a stamp alignment: minimal total adjustment, one corrected
/// timing attaining it, and the cost graph after each step (graph `i`
/// maps a timestamp for event `i` to the cheapest cost of the prefix).
#[derive(Clone, Debug)]
pub struct StampAlignment {
    pub cost: Time,
    pub gamma: TimingFunction,
    pub graphs: Vec<ConvexPlf>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum StampError {
    #[error("the run is empty")]
    Empty,
    #[error("{events} intervals but {stamps} observed timestamps")]
    LengthMismatch { events: usize, stamps: usize },
}

fn clamp_finite(x: &Time, lo: &Time, hi: &Time) -> Time {
    debug_assert!(lo <= hi);
    if x < lo {
        lo.clone()
    } else if x > hi {
        hi.clone()
    } else {
        x.clone()
    }
}

/// Sweeps the cost graphs forward; graph `i` is the optimal prefix cost
/// as a function of the timestamp assigned to event `i`.
pub fn cost_graphs(
    intervals: &[StaticInterval],
    sigma: &[Time],
) -> Result<Vec<ConvexPlf>, StampError> {
    if intervals.is_empty() {
        return Err(StampError::Empty);
    }
    if intervals.len() != sigma.len() {
        return Err(StampError::LengthMismatch {
            events: intervals.len(),
            stamps: sigma.len(),
        });
    }
    let mut graphs = Vec::with_capacity(intervals.len());
    let first = ConvexPlf::flat(intervals[0].eft().clone(), intervals[0].lft().clone());
    graphs.push(first.add_abs(&sigma[0]));
    for (si, stamp) in intervals.iter().zip(sigma).skip(1) {
        let prev = graphs.last().expect("seeded above");
        graphs.push(prev.min_window(si.eft(), si.lft()).add_abs(stamp));
    }
    Ok(graphs)
}

/// Extracts one optimal corrected timing from the stored graphs. Each
/// step restricts the previous graph to the timestamps compatible with
/// the already-fixed successor and clamps the observation into the
/// minimizing region, so every corrected stamp is as close to its
/// observation as optimality allows.
pub fn backtrack(
    intervals: &[StaticInterval],
    sigma: &[Time],
    graphs: &[ConvexPlf],
) -> Vec<Time> {
    assert_eq!(intervals.len(), graphs.len());
    assert_eq!(sigma.len(), graphs.len());
    let n = graphs.len();
    let mut gamma = vec![Time::zero(); n];
    let last = graphs[n - 1].minimum().expect("bounded below");
    gamma[n - 1] = match &last.right {
        TimeBound::Finite(hi) => clamp_finite(&sigma[n - 1], &last.left, hi),
        TimeBound::Infinite => sigma[n - 1].clone().max(last.left),
    };
    for i in (0..n - 1).rev() {
        let next = &gamma[i + 1];
        let si = &intervals[i + 1];
        // Timestamps for event i that let event i+1 fire at gamma[i+1].
        let lo = match si.lft() {
            TimeBound::Finite(lft) => next - lft,
            TimeBound::Infinite => graphs[i].base_x().clone(),
        };
        let hi = next - si.eft();
        let (mlo, mhi, _) = graphs[i].argmin_on(&lo, &hi);
        gamma[i] = clamp_finite(&sigma[i], &mlo, &mhi);
    }
    gamma
}

/// Minimal-cost timestamp correction for a chain of firing intervals.
pub fn align_stamp(
    intervals: &[StaticInterval],
    sigma: &[Time],
) -> Result<StampAlignment, StampError> {
    let graphs = cost_graphs(intervals, sigma)?;
    let cost = graphs
        .last()
        .expect("non-empty")
        .minimum()
        .expect("bounded below")
        .value;
    let gamma = backtrack(intervals, sigma, &graphs);
    debug_assert_eq!(
        gamma.iter().zip(sigma).map(|(g, s)| abs_diff(g, s)).sum::<Time>(),
        cost
    );
    Ok(StampAlignment {
        cost,
        gamma: TimingFunction::from_times(gamma),
        graphs,
    })
}

/// The same problem as an `lp`-format linear program: per-event residual
/// variables `ai`/`bi` split `gi - sigma_i` into positive and negative
/// parts, and difference constraints chain consecutive corrected stamps
/// through the firing interval.
pub fn lp_text(intervals: &[StaticInterval], sigma: &[Time]) -> Result<String, StampError> {
    if intervals.is_empty() {
        return Err(StampError::Empty);
    }
    if intervals.len() != sigma.len() {
        return Err(StampError::LengthMismatch {
            events: intervals.len(),
            stamps: sigma.len(),
        });
    }
    let mut out = String::new();
    let terms: Vec<String> = (1..=intervals.len())
        .map(|i| format!("a{i} + b{i}"))
        .collect();
    writeln!(out, "min: {};", terms.join(" + ")).expect("string write");
    writeln!(out).expect("string write");
    for (i, stamp) in sigma.iter().enumerate() {
        writeln!(out, "g{0} - a{0} + b{0} = {1};", i + 1, stamp).expect("string write");
    }
    writeln!(out).expect("string write");
    writeln!(out, "g1 >= {};", intervals[0].eft()).expect("string write");
    if let TimeBound::Finite(lft) = intervals[0].lft() {
        writeln!(out, "g1 <= {lft};").expect("string write");
    }
    for (i, si) in intervals.iter().enumerate().skip(1) {
        writeln!(out, "g{} - g{} >= {};", i + 1, i, si.eft()).expect("string write");
        if let TimeBound::Finite(lft) = si.lft() {
            writeln!(out, "g{} - g{} <= {};", i + 1, i, lft).expect("string write");
        }
    }
    writeln!(out).expect("string write");
    let frees: Vec<String> = (1..=intervals.len()).map(|i| format!("g{i}")).collect();
    writeln!(out, "free {};", frees.join(", ")).expect("string write");
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error(transparent)]
    NotLinear(#[from] NotLinear),
    #[error(transparent)]
    Stamp(#[from] StampError),
}

/// LP text for the runs of a sequential process against a net.
pub fn export_lp(
    net: &TimePetriNet,
    cp: &CausalProcess,
    sigma: &TimingFunction,
) -> Result<String, ExportError> {
    let intervals = chain_intervals(net, cp)?;
    if sigma.len() != intervals.len() {
        return Err(StampError::LengthMismatch {
            events: intervals.len(),
            stamps: sigma.len(),
        }
        .into());
    }
    Ok(lp_text(&intervals, sigma.values())?)
}
