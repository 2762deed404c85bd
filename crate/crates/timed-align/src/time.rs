//! Exact time arithmetic.
//!
//! All timestamps, delays and costs in this crate are exact rationals
//! ([`Time`]); latest firing times may additionally be unbounded
//! ([`TimeBound`]). Keeping everything rational makes every comparison in
//! the replay and alignment code exact, so there are no tolerance knobs
//! anywhere in the library.

use num::{BigInt, BigRational, One, Signed, Zero};
use std::fmt;
use thiserror::Error;

/// Exact rational time value.
pub type Time = BigRational;

/// Builds an integer time value.
pub fn time(n: i64) -> Time {
    BigRational::from_integer(BigInt::from(n))
}

/// Builds the rational time value `numer / denom`.
///
/// Panics if `denom` is zero.
pub fn ratio(numer: i64, denom: i64) -> Time {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Absolute value of a time difference, `|a - b|`.
pub fn abs_diff(a: &Time, b: &Time) -> Time {
    (a - b).abs()
}

/// A time value that may be `+inf`; used for latest firing times and for
/// the right end of half-open piecewise-linear domains.
///
/// The derived order places every finite value below [`TimeBound::Infinite`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeBound {
    Finite(Time),
    Infinite,
}

impl TimeBound {
    /// Finite integer bound.
    pub fn finite(n: i64) -> TimeBound {
        TimeBound::Finite(time(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, TimeBound::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Time> {
        match self {
            TimeBound::Finite(t) => Some(t),
            TimeBound::Infinite => None,
        }
    }

    /// `self + t`, where `inf + t = inf`.
    pub fn plus(&self, t: &Time) -> TimeBound {
        match self {
            TimeBound::Finite(b) => TimeBound::Finite(b + t),
            TimeBound::Infinite => TimeBound::Infinite,
        }
    }

    /// `self >= t` for a finite `t` (infinite bounds dominate everything).
    pub fn ge_time(&self, t: &Time) -> bool {
        match self {
            TimeBound::Finite(b) => b >= t,
            TimeBound::Infinite => true,
        }
    }

    /// `self < t` for a finite `t`.
    pub fn lt_time(&self, t: &Time) -> bool {
        !self.ge_time(t)
    }
}

impl fmt::Display for TimeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBound::Finite(t) => write!(f, "{}", t),
            TimeBound::Infinite => write!(f, "inf"),
        }
    }
}

/// Error produced when a textual time value cannot be parsed.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid time value `{input}`: {reason}")]
pub struct TimeParseError {
    pub input: String,
    pub reason: String,
}

fn parse_error(input: &str, reason: &str) -> TimeParseError {
    TimeParseError {
        input: input.to_string(),
        reason: reason.to_string(),
    }
}

/// Parses a rational time value.
///
/// Accepted forms: integers (`3`, `-2`), fractions (`5/4`, `-1/2`) and
/// decimals (`1.25`), all converted exactly. Decimals are a parse-time
/// convenience only; serialization always uses the integer or fraction
/// form.
pub fn parse_time(input: &str) -> Result<Time, TimeParseError> {
    let s = input.trim();
    if s.is_empty() {
        return Err(parse_error(input, "empty"));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    if body.is_empty() {
        return Err(parse_error(input, "missing digits"));
    }
    let value = if let Some((numer, denom)) = body.split_once('/') {
        let n = parse_digits(numer).ok_or_else(|| parse_error(input, "bad numerator"))?;
        let d = parse_digits(denom).ok_or_else(|| parse_error(input, "bad denominator"))?;
        if d.is_zero() {
            return Err(parse_error(input, "zero denominator"));
        }
        BigRational::new(n, d)
    } else if let Some((whole, frac)) = body.split_once('.') {
        let w = if whole.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(whole).ok_or_else(|| parse_error(input, "bad integer part"))?
        };
        if frac.is_empty() {
            return Err(parse_error(input, "missing fractional digits"));
        }
        let f = parse_digits(frac).ok_or_else(|| parse_error(input, "bad fractional part"))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        BigRational::new(w * &scale + f, scale)
    } else {
        let n = parse_digits(body).ok_or_else(|| parse_error(input, "bad integer"))?;
        BigRational::from_integer(n)
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses a time bound: either a rational time value or `inf`.
pub fn parse_time_bound(input: &str) -> Result<TimeBound, TimeParseError> {
    let s = input.trim();
    if s == "inf" {
        Ok(TimeBound::Infinite)
    } else {
        parse_time(s).map(TimeBound::Finite)
    }
}

/// Formats a time value the way the file formats and reports expect:
/// integers bare, everything else as `numer/denom`.
pub fn format_time(t: &Time) -> String {
    t.to_string()
}

/// Largest integer `k` with `k <= t`.
pub fn floor_int(t: &Time) -> BigInt {
    t.floor().to_integer()
}

/// Smallest integer `k` with `k >= t`.
pub fn ceil_int(t: &Time) -> BigInt {
    t.ceil().to_integer()
}

/// Snaps `t` up to the next multiple of `step` (including `t` itself).
pub fn snap_up(t: &Time, step: &Time) -> Time {
    let q = (t / step).ceil();
    q * step
}

/// Snaps `t` down to the previous multiple of `step` (including `t` itself).
pub fn snap_down(t: &Time, step: &Time) -> Time {
    let q = (t / step).floor();
    q * step
}

/// `true` when `t` is an integer multiple of `step`.
pub fn on_grid(t: &Time, step: &Time) -> bool {
    (t / step).is_integer()
}

#[allow(unused)]
fn one() -> Time {
    BigRational::one()
}
