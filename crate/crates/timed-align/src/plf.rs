//! Convex piecewise-linear cost graphs.
//!
//! The stamp alignment sweeps a cost graph over the run: after step `i`
//! the graph maps a candidate timestamp for event `i` to the cheapest
//! total adjustment of the first `i` events ending there. Two operations
//! drive the sweep — adding `|x - anchor|` for the next observed stamp
//! ([`ConvexPlf::add_abs`]) and taking a windowed minimum for the next
//! firing interval ([`ConvexPlf::min_window`]). Both preserve convexity
//! and add at most two segments, which keeps the whole sweep quadratic.
//!
//! Graphs are stored as contiguous segments with integer slopes plus the
//! value at the left end of the domain; all breakpoints are exact
//! rationals.

use crate::time::{time, Time, TimeBound};
use num::Zero;
use std::fmt::Write as _;

/// One linear piece: `[left, right]` with an integer slope. Segments of a
/// graph are contiguous, so `right` always equals the next `left`; only
/// the final segment may be unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub left: Time,
    pub slope: i64,
    pub right: TimeBound,
}

/// The minimizing region of a convex graph: the value is attained exactly
/// on `[left, right]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlfMinimum {
    pub left: Time,
    pub right: TimeBound,
    pub value: Time,
}

/// A convex piecewise-linear function on a closed (possibly right-
/// unbounded) interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPlf {
    base_y: Time,
    segments: Vec<Segment>,
}

impl ConvexPlf {
    /// The constant-zero graph on `[left, right]`; the seed of the sweep.
    /// `right` may equal `left` (a single-point domain).
    pub fn flat(left: Time, right: TimeBound) -> ConvexPlf {
        assert!(right.ge_time(&left), "empty domain");
        ConvexPlf {
            base_y: Time::zero(),
            segments: vec![Segment {
                left,
                slope: 0,
                right,
            }],
        }
    }

    /// Left end of the domain.
    pub fn base_x(&self) -> &Time {
        &self.segments[0].left
    }

    /// Value at the left end of the domain.
    pub fn base_y(&self) -> &Time {
        &self.base_y
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn domain(&self) -> (&Time, &TimeBound) {
        (
            &self.segments[0].left,
            &self.segments[self.segments.len() - 1].right,
        )
    }

    fn contains(&self, x: &Time) -> bool {
        let (lo, hi) = self.domain();
        x >= lo && hi.ge_time(x)
    }

    /// Evaluates the graph at `x`, which must lie in the domain.
    pub fn eval(&self, x: &Time) -> Time {
        assert!(self.contains(x), "evaluation outside the domain");
        let mut y = self.base_y.clone();
        for seg in &self.segments {
            if seg.right.ge_time(x) {
                y += time(seg.slope) * (x - &seg.left);
                return y;
            }
            let right = seg.right.as_finite().expect("non-final segments are finite");
            y += time(seg.slope) * (right - &seg.left);
        }
        unreachable!("x is inside the domain");
    }

    /// The minimizing region, or `None` when the graph is unbounded below
    /// (a negative slope running to infinity).
    pub fn minimum(&self) -> Option<PlfMinimum> {
        let mut y = self.base_y.clone();
        for seg in &self.segments {
            if seg.slope < 0 {
                let right = seg.right.as_finite()?;
                y += time(seg.slope) * (right - &seg.left);
                continue;
            }
            // First non-descending segment: the minimum starts at its left
            // end and extends over the flat part, if any.
            let left = seg.left.clone();
            let right = if seg.slope == 0 {
                seg.right.clone()
            } else {
                TimeBound::Finite(seg.left.clone())
            };
            return Some(PlfMinimum {
                left,
                right,
                value: y,
            });
        }
        // All slopes negative: minimum at the (finite) right end.
        let last = self.segments.last().expect("non-empty");
        let right = last.right.as_finite()?.clone();
        Some(PlfMinimum {
            left: right.clone(),
            right: TimeBound::Finite(right),
            value: y,
        })
    }

    /// Minimizing interval of the graph restricted to `[lo, hi]`, which
    /// must intersect the domain. Returns `(left, right, value)`.
    pub fn argmin_on(&self, lo: &Time, hi: &Time) -> (Time, Time, Time) {
        let (dlo, dhi) = self.domain();
        let lo = lo.max(dlo).clone();
        let hi = match dhi {
            TimeBound::Finite(d) => hi.min(d).clone(),
            TimeBound::Infinite => hi.clone(),
        };
        assert!(lo <= hi, "window misses the domain");
        let m = self.minimum().expect("bounded below");
        if m.left > hi {
            // Restricted graph is still descending: minimum at the right.
            let v = self.eval(&hi);
            (hi.clone(), hi, v)
        } else if m.right.lt_time(&lo) {
            // Restricted graph is ascending: minimum at the left.
            let v = self.eval(&lo);
            (lo.clone(), lo, v)
        } else {
            let left = m.left.max(lo);
            let right = match &m.right {
                TimeBound::Finite(r) => r.min(&hi).clone(),
                TimeBound::Infinite => hi,
            };
            (left, right, m.value)
        }
    }

    /// Adds `|x - anchor|` pointwise: slopes left of the anchor drop by
    /// one, slopes right of it rise by one, and at most one breakpoint is
    /// inserted at the anchor.
    pub fn add_abs(&self, anchor: &Time) -> ConvexPlf {
        let base_y = &self.base_y + crate::time::abs_diff(self.base_x(), anchor);
        let mut segments = Vec::with_capacity(self.segments.len() + 1);
        for seg in &self.segments {
            if !seg.right.ge_time(anchor) || seg.right == TimeBound::Finite(anchor.clone()) {
                // Entirely at or left of the anchor.
                segments.push(Segment {
                    left: seg.left.clone(),
                    slope: seg.slope - 1,
                    right: seg.right.clone(),
                });
            } else if seg.left >= *anchor {
                segments.push(Segment {
                    left: seg.left.clone(),
                    slope: seg.slope + 1,
                    right: seg.right.clone(),
                });
            } else {
                segments.push(Segment {
                    left: seg.left.clone(),
                    slope: seg.slope - 1,
                    right: TimeBound::Finite(anchor.clone()),
                });
                segments.push(Segment {
                    left: anchor.clone(),
                    slope: seg.slope + 1,
                    right: seg.right.clone(),
                });
            }
        }
        let result = ConvexPlf { base_y, segments };
        debug_assert_eq!(result.validate(), Ok(()));
        result
    }

    /// Windowed minimum: `g'(x) = min { g(x') : x - x' in [a, b] }` on the
    /// domain `[lo + a, hi + b]`. Descending segments shift right by `a`,
    /// ascending ones by `b`, and the minimizing region widens into a
    /// plateau in between.
    pub fn min_window(&self, a: &Time, b: &TimeBound) -> ConvexPlf {
        assert!(b.ge_time(a), "empty window");
        let m = self.minimum().expect("bounded below");
        let mut segments: Vec<Segment> = Vec::with_capacity(self.segments.len() + 1);

        // Descending part, shifted by a.
        for seg in &self.segments {
            if seg.left >= m.left {
                break;
            }
            let right = match &seg.right {
                TimeBound::Finite(r) => r.min(&m.left).clone(),
                TimeBound::Infinite => m.left.clone(),
            };
            segments.push(Segment {
                left: &seg.left + a,
                slope: seg.slope,
                right: TimeBound::Finite(&right + a),
            });
        }

        // Plateau between m+a and m'+b.
        let plateau_left = &m.left + a;
        let plateau_right = match (&m.right, b) {
            (TimeBound::Finite(r), TimeBound::Finite(b)) => TimeBound::Finite(r + b),
            _ => TimeBound::Infinite,
        };
        if plateau_right != TimeBound::Finite(plateau_left.clone()) {
            segments.push(Segment {
                left: plateau_left,
                slope: 0,
                right: plateau_right.clone(),
            });
        }

        // Ascending part, shifted by b (absent when the window or the
        // domain is right-unbounded).
        if let (TimeBound::Finite(m_right), TimeBound::Finite(b)) = (&m.right, b) {
            for seg in &self.segments {
                match &seg.right {
                    TimeBound::Finite(r) if r <= m_right => continue,
                    _ => {}
                }
                let left = seg.left.clone().max(m_right.clone());
                segments.push(Segment {
                    left: &left + b,
                    slope: seg.slope,
                    right: seg.right.plus(b),
                });
            }
        }

        // A window on a single-point graph produces just the plateau; in
        // every other case the parts glue seamlessly.
        if segments.is_empty() {
            segments.push(Segment {
                left: &m.left + a,
                slope: 0,
                right: plateau_right,
            });
        }
        let result = ConvexPlf {
            base_y: self.base_y.clone(),
            segments,
        };
        debug_assert_eq!(result.validate(), Ok(()));
        result
    }

    /// Checks the representation invariants; tests call this on every
    /// intermediate graph.
    pub fn validate(&self) -> Result<(), String> {
        if self.segments.is_empty() {
            return Err("no segments".to_string());
        }
        for (i, seg) in self.segments.iter().enumerate() {
            let last = i + 1 == self.segments.len();
            match &seg.right {
                TimeBound::Infinite if !last => {
                    return Err(format!("segment {i} is unbounded but not last"))
                }
                TimeBound::Infinite => {}
                TimeBound::Finite(r) => {
                    if r < &seg.left {
                        return Err(format!("segment {i} is reversed"));
                    }
                    if r == &seg.left && self.segments.len() > 1 {
                        return Err(format!("segment {i} is empty"));
                    }
                    if !last && self.segments[i + 1].left != *r {
                        return Err(format!("gap after segment {i}"));
                    }
                }
            }
            if i > 0 && self.segments[i - 1].slope >= seg.slope {
                return Err(format!("slopes not strictly increasing at segment {i}"));
            }
        }
        Ok(())
    }

    /// One dump line, `index; base_x; base_y; (left,slope,right)...`, the
    /// format the command-line graph dump emits for plotting.
    pub fn dump_line(&self, index: usize) -> String {
        let mut out = format!("{}; {}; {}; ", index, self.base_x(), self.base_y);
        for seg in &self.segments {
            write!(out, "({},{},{})", seg.left, seg.slope, seg.right).expect("string write");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::ratio;

    fn seg(left: i64, slope: i64, right: i64) -> Segment {
        Segment {
            left: time(left),
            slope,
            right: TimeBound::finite(right),
        }
    }

    #[test]
    fn flat_graph_evaluates_to_its_base() {
        let g = ConvexPlf::flat(time(2), TimeBound::finite(5));
        assert_eq!(g.eval(&time(2)), time(0));
        assert_eq!(g.eval(&ratio(7, 2)), time(0));
        assert_eq!(
            g.minimum().unwrap(),
            PlfMinimum {
                left: time(2),
                right: TimeBound::finite(5),
                value: time(0)
            }
        );
    }

    #[test]
    fn add_abs_splits_at_the_anchor() {
        let g = ConvexPlf::flat(time(0), TimeBound::finite(4)).add_abs(&time(1));
        assert_eq!(g.segments(), &[seg(0, -1, 1), seg(1, 1, 4)]);
        assert_eq!(*g.base_y(), time(1));
        assert_eq!(g.eval(&time(0)), time(1));
        assert_eq!(g.eval(&time(1)), time(0));
        assert_eq!(g.eval(&time(3)), time(2));
        assert_eq!(g.validate(), Ok(()));
    }

    #[test]
    fn add_abs_with_the_anchor_outside_the_domain() {
        let g = ConvexPlf::flat(time(2), TimeBound::finite(3)).add_abs(&time(5));
        assert_eq!(g.segments(), &[seg(2, -1, 3)]);
        assert_eq!(*g.base_y(), time(3)); // |2 - 5|
        assert_eq!(g.eval(&time(3)), time(2));

        let g = ConvexPlf::flat(time(2), TimeBound::finite(3)).add_abs(&time(0));
        assert_eq!(g.segments(), &[seg(2, 1, 3)]);
        assert_eq!(*g.base_y(), time(2));
    }

    #[test]
    fn min_window_shifts_and_widens_the_plateau() {
        // V-shape |x-1| on [0,4], window [2,4].
        let g = ConvexPlf::flat(time(0), TimeBound::finite(4))
            .add_abs(&time(1))
            .min_window(&time(2), &TimeBound::finite(4));
        assert_eq!(g.segments(), &[seg(2, -1, 3), seg(3, 0, 5), seg(5, 1, 8)]);
        assert_eq!(*g.base_y(), time(1));
        // Pointwise: g'(x) = min over x' in [x-4, x-2] of |x'-1|.
        assert_eq!(g.eval(&time(2)), time(1));
        assert_eq!(g.eval(&time(4)), time(0));
        assert_eq!(g.eval(&time(7)), time(2));
    }

    #[test]
    fn min_window_with_a_point_window_translates() {
        let g = ConvexPlf::flat(time(0), TimeBound::finite(4))
            .add_abs(&time(1))
            .min_window(&time(2), &TimeBound::finite(2));
        assert_eq!(g.segments(), &[seg(2, -1, 3), seg(3, 1, 6)]);
        assert_eq!(g.eval(&time(3)), time(0));
    }

    #[test]
    fn min_window_with_an_unbounded_window_has_a_flat_tail() {
        let g = ConvexPlf::flat(time(0), TimeBound::finite(4))
            .add_abs(&time(1))
            .min_window(&time(0), &TimeBound::Infinite);
        assert_eq!(
            g.segments(),
            &[
                seg(0, -1, 1),
                Segment {
                    left: time(1),
                    slope: 0,
                    right: TimeBound::Infinite
                }
            ]
        );
        assert_eq!(g.minimum().unwrap().right, TimeBound::Infinite);
    }

    #[test]
    fn point_domains_flow_through_both_operations() {
        let g = ConvexPlf::flat(time(2), TimeBound::finite(2)).add_abs(&time(5));
        assert_eq!(*g.base_y(), time(3));
        let g = g.min_window(&time(2), &TimeBound::finite(2));
        assert_eq!(g.eval(&time(4)), time(3));
        let g = g.min_window(&time(0), &TimeBound::finite(1));
        assert_eq!(g.segments().len(), 1);
        assert_eq!(g.eval(&time(4)), time(3));
        assert_eq!(g.eval(&time(5)), time(3));
    }

    #[test]
    fn minimum_is_none_when_unbounded_below() {
        let g = ConvexPlf {
            base_y: time(0),
            segments: vec![Segment {
                left: time(0),
                slope: -1,
                right: TimeBound::Infinite,
            }],
        };
        assert_eq!(g.minimum(), None);
    }

    #[test]
    fn argmin_on_clips_the_window() {
        // V at 1 on [0,4].
        let g = ConvexPlf::flat(time(0), TimeBound::finite(4)).add_abs(&time(1));
        assert_eq!(g.argmin_on(&time(0), &time(4)), (time(1), time(1), time(0)));
        assert_eq!(g.argmin_on(&time(2), &time(4)), (time(2), time(2), time(1)));
        assert_eq!(
            g.argmin_on(&time(-3), &ratio(1, 2)),
            (ratio(1, 2), ratio(1, 2), ratio(1, 2))
        );
    }

    /// Minimum of a convex graph over `[lo, hi] ∩ domain` by checking the
    /// interval ends and every interior breakpoint — no slope walking, so
    /// it cross-checks `minimum`/`min_window` rather than reusing them.
    fn brute_min_on(g: &ConvexPlf, lo: &Time, hi: &TimeBound) -> Option<Time> {
        let (dlo, dhi) = g.domain();
        let lo = lo.max(dlo).clone();
        let hi = match (hi, dhi) {
            (TimeBound::Finite(h), TimeBound::Finite(d)) => h.min(d).clone(),
            (TimeBound::Finite(h), TimeBound::Infinite) => h.clone(),
            (TimeBound::Infinite, TimeBound::Finite(d)) => d.clone(),
            (TimeBound::Infinite, TimeBound::Infinite) => panic!("unbounded probe"),
        };
        if lo > hi {
            return None;
        }
        let mut best = g.eval(&lo).min(g.eval(&hi));
        for seg in g.segments() {
            if seg.left > lo && seg.left < hi {
                best = best.min(g.eval(&seg.left));
            }
        }
        Some(best)
    }

    #[test]
    fn random_op_sequences_stay_convex_and_match_direct_evaluation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let lo = rng.gen_range(-4..=4);
            let hi = lo + rng.gen_range(0..=5);
            let mut g =
                ConvexPlf::flat(time(lo), TimeBound::finite(hi)).add_abs(&time(rng.gen_range(-5..=9)));
            let mut ops = 1;
            for _ in 0..rng.gen_range(0..4) {
                let a = time(rng.gen_range(0..=3));
                let b = TimeBound::finite(rng.gen_range(0..=3)).plus(&a);
                let anchor = time(rng.gen_range(-5..=9));
                let next = g.min_window(&a, &b).add_abs(&anchor);
                assert_eq!(next.validate(), Ok(()));
                // Pointwise recursion check at every breakpoint and a few
                // half-integer grid points of the result.
                let mut probes: Vec<Time> = next.segments().iter().map(|s| s.left.clone()).collect();
                let (nlo, nhi) = next.domain();
                if let TimeBound::Finite(nhi) = nhi {
                    probes.push(nhi.clone());
                    let mut x = nlo.clone();
                    while &x <= nhi {
                        probes.push(x.clone());
                        x += ratio(1, 2);
                    }
                }
                for x in probes {
                    let expect = brute_min_on(&g, &(&x - b.as_finite().unwrap()), &TimeBound::Finite(&x - &a))
                        .expect("window hits the domain")
                        + crate::time::abs_diff(&x, &anchor);
                    assert_eq!(next.eval(&x), expect, "mismatch at {x}");
                }
                g = next;
                ops += 1;
            }
            // Segment growth stays linear in the number of operations.
            assert!(g.segments().len() <= 2 * ops + 1);
        }
    }

    #[test]
    fn dump_line_format() {
        let g = ConvexPlf::flat(time(0), TimeBound::finite(4)).add_abs(&ratio(3, 2));
        assert_eq!(g.dump_line(1), "1; 0; 3/2; (0,-1,3/2)(3/2,1,4)");
    }
}
