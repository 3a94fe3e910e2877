use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One preconditioner exponent: a finite real `>= 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinite => 0.0,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
            return Ok(Exponent::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("cannot parse exponent {s:?}")))?;
        if v.is_infinite() && v > 0.0 {
            return Ok(Exponent::Infinite);
        }
        Ok(Exponent::Finite(v))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Exponent::Finite(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Conjugate exponents `(p, q)` with `1/p + 1/q = 1`.
///
/// The left preconditioner is raised to `-1/(2p)` and the right one to
/// `-1/(2q)`; an infinite exponent makes that side the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentPair {
    p: Exponent,
    q: Exponent,
}

const CONJUGATE_TOL: f64 = 1e-12;

impl ExponentPair {
    pub fn new(p: Exponent, q: Exponent) -> Result<Self> {
        for e in [p, q] {
            if let Exponent::Finite(v) = e {
                if !(v.is_finite() && v >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "exponent must be >= 1 or inf, got {v}"
                    )));
                }
            }
        }
        let sum = p.reciprocal() + q.reciprocal();
        if (sum - 1.0).abs() > CONJUGATE_TOL {
            return Err(Error::InvalidParameter(format!(
                "exponents ({p}, {q}) are not conjugate: 1/p + 1/q = {sum}"
            )));
        }
        Ok(Self { p, q })
    }

    /// `p = q = 2`, one fourth root on each side.
    pub fn shampoo() -> Self {
        Self {
            p: Exponent::Finite(2.0),
            q: Exponent::Finite(2.0),
        }
    }

    /// Finite `p > 1` with its conjugate `q = p/(p-1)`.
    pub fn two_sided(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "two-sided exponent must be finite and > 1, got {p}"
            )));
        }
        Self::new(Exponent::Finite(p), Exponent::Finite(p / (p - 1.0)))
    }

    /// `(1, ∞)`: only the left factor, raised to `-1/2`.
    pub fn left_only() -> Self {
        Self {
            p: Exponent::Finite(1.0),
            q: Exponent::Infinite,
        }
    }

    /// `(∞, 1)`: only the right factor, raised to `-1/2`.
    pub fn right_only() -> Self {
        Self {
            p: Exponent::Infinite,
            q: Exponent::Finite(1.0),
        }
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    /// Power applied to the left preconditioner, `-1/(2p)`.
    pub fn left_power(&self) -> f64 {
        -0.5 * self.p.reciprocal()
    }

    /// Power applied to the right preconditioner, `-1/(2q)`.
    pub fn right_power(&self) -> f64 {
        -0.5 * self.q.reciprocal()
    }
}

impl Default for ExponentPair {
    fn default() -> Self {
        Self::shampoo()
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, q={})", self.p, self.q)
    }
}

impl<'de> Deserialize<'de> for ExponentPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            p: Exponent,
            q: Exponent,
        }
        let raw = Raw::deserialize(d)?;
        ExponentPair::new(raw.p, raw.q).map_err(serde::de::Error::custom)
    }
}
