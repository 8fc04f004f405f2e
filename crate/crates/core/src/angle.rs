//! Window centers and their arithmetic class.
//!
//! Which limit process applies depends on whether `s` lies in `πℤ` and on
//! whether `s/(2π)` is rational. A center given as an exact fraction of `π`
//! is classified by integer arithmetic; a decimal center falls back to a
//! continued-fraction test.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default denominator cap for rational classification and the tilt.
pub const DEFAULT_Q_MAX: u64 = 64;
/// Tolerance of the continued-fraction test on decimal inputs.
pub const RATIONAL_TOL: f64 = 1e-12;

/// In config files an angle is a number (radians) or a string such as
/// `"1/2*pi"`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AngleRepr", into = "AngleRepr")]
pub enum Angle {
    Radians(f64),
    /// `π · num / den`.
    PiFraction { num: i64, den: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleClass {
    /// `s/(2π)` irrational.
    Irrational,
    /// `s = 2πp/q` with `gcd(p, q) = 1`.
    Rational { p: i64, q: u64 },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<AngleRepr> for Angle {
    type Error = Error;
    fn try_from(r: AngleRepr) -> Result<Self> {
        match r {
            AngleRepr::Number(x) => Ok(Angle::Radians(x)),
            AngleRepr::Text(t) => t.parse(),
        }
    }
}

impl From<Angle> for AngleRepr {
    fn from(a: Angle) -> Self {
        match a {
            Angle::Radians(x) => AngleRepr::Number(x),
            pi @ Angle::PiFraction { .. } => AngleRepr::Text(pi.to_string()),
        }
    }
}

impl From<f64> for Angle {
    fn from(s: f64) -> Self {
        Angle::Radians(s)
    }
}

impl Angle {
    pub fn pi_fraction(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("π-fraction with zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den);
        Ok(Angle::PiFraction {
            num: num / g as i64,
            den: den / g,
        })
    }

    pub fn radians(&self) -> f64 {
        match *self {
            Angle::Radians(s) => s,
            Angle::PiFraction { num, den } => PI * num as f64 / den as f64,
        }
    }

    /// Class of `s/(2π)`; rational denominators above `q_max` are an error.
    pub fn classify(&self, q_max: u64) -> Result<AngleClass> {
        match *self {
            Angle::PiFraction { num, den } => {
                // s/(2π) = num / (2 den)
                let (den2, g) = (2 * den, gcd(num.unsigned_abs(), 2 * den));
                let (p, q) = (num / g as i64, den2 / g);
                if q > q_max {
                    Err(Error::RationalOverflow { q, q_max })
                } else {
                    Ok(AngleClass::Rational { p, q })
                }
            }
            Angle::Radians(s) => Ok(classify_decimal(s / (2.0 * PI), q_max.min(DEFAULT_Q_MAX))),
        }
    }

    /// Whether `s ∈ πℤ`.
    pub fn on_pi_lattice(&self) -> bool {
        match *self {
            Angle::PiFraction { den, .. } => den == 1,
            Angle::Radians(s) => matches!(
                classify_decimal(s / (2.0 * PI), 2),
                AngleClass::Rational { q: 1 | 2, .. }
            ),
        }
    }
}

impl std::fmt::Display for Angle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Angle::Radians(s) => write!(f, "{s}"),
            Angle::PiFraction { num, den } => write!(f, "{num}/{den}*pi"),
        }
    }
}

impl std::str::FromStr for Angle {
    type Err = Error;

    /// Accepts a decimal (`1.3`) or a fraction of π (`1/2*pi`, `pi`, `3*pi`).
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        let bad = || Error::InvalidArgument(format!("cannot parse angle `{text}`"));
        if let Some(head) = t.strip_suffix("pi") {
            let head = head.trim().trim_end_matches('*').trim();
            let (num, den) = match head.split_once('/') {
                Some((n, d)) => (
                    n.trim().parse::<i64>().map_err(|_| bad())?,
                    d.trim().parse::<u64>().map_err(|_| bad())?,
                ),
                None if head.is_empty() => (1, 1),
                None if head == "-" => (-1, 1),
                None => (head.parse::<i64>().map_err(|_| bad())?, 1),
            };
            Angle::pi_fraction(num, den)
        } else {
            t.parse::<f64>().map(Angle::Radians).map_err(|_| bad())
        }
    }
}

fn classify_decimal(x: f64, q_cap: u64) -> AngleClass {
    // continued-fraction convergents of x
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1u64, 1i64, 0u64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        let ai = a as i64;
        let (p2, q2) = (ai * p1 + p0, ai.unsigned_abs() * q1 + q0);
        if q2 > q_cap {
            break;
        }
        if (x - p2 as f64 / q2 as f64).abs() < RATIONAL_TOL {
            return AngleClass::Rational { p: p2, q: q2 };
        }
        let frac = y - a;
        if frac == 0.0 {
            break;
        }
        y = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    AngleClass::Irrational
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// `(cos, sin)` of `2π r / q`, exact at multiples of a quarter turn and
/// symmetric under the octant reflections.
pub fn cos_sin_2pi_frac(r: i64, q: u64) -> (f64, f64) {
    let q = q as i128;
    let r = (r as i128).rem_euclid(q);
    let quadrant = (4 * r) / q;
    let rem = 4 * r - quadrant * q;
    let (c, s) = if rem == 0 {
        (1.0, 0.0)
    } else if 2 * rem > q {
        let (s, c) = (std::f64::consts::FRAC_PI_2 * (q - rem) as f64 / q as f64).sin_cos();
        (s, c)
    } else {
        let (s, c) = (std::f64::consts::FRAC_PI_2 * rem as f64 / q as f64).sin_cos();
        (c, s)
    };
    match quadrant {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    }
}
