//! q-deformed logarithm and exponential.
//!
//! Both functions switch to the natural log/exp when the index sits within
//! [`Q1_EPS`] of 1. Away from the seam the deformed forms are evaluated as
//! `expm1((1-q) ln x) / (1-q)` and `exp(ln_1p((1-q) x) / (1-q))`, which keeps
//! the two branches consistent as q approaches 1.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Distance from q = 1 below which the limit branch (natural log/exp) is used.
pub const Q1_EPS: f64 = 1e-8;

/// The entropic index q >= 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EntropicIndex(f64);

impl EntropicIndex {
    /// The Shannon index q = 1.
    pub const ONE: EntropicIndex = EntropicIndex(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q >= 0.0 {
            Ok(EntropicIndex(q))
        } else {
            Err(Error::InvalidIndex(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True when q is far enough from 1 to use the deformed closed forms.
    pub fn deformed(self) -> bool {
        (self.0 - 1.0).abs() > Q1_EPS
    }

    /// The index 2 - q, used by the Rényi/Tsallis relative-entropy bridge.
    ///
    /// Returns an error for q > 2, where the dual index would be negative.
    pub fn dual(self) -> Result<Self> {
        EntropicIndex::new(2.0 - self.0)
    }

    fn one_minus(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for EntropicIndex {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        EntropicIndex::new(q)
    }
}

impl From<EntropicIndex> for f64 {
    fn from(q: EntropicIndex) -> f64 {
        q.0
    }
}

impl std::fmt::Display for EntropicIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// ln_q without argument validation; `x` must be positive.
#[inline]
pub(crate) fn ln_q(x: f64, q: EntropicIndex) -> f64 {
    if q.deformed() {
        let a = q.one_minus();
        (a * x.ln()).exp_m1() / a
    } else {
        x.ln()
    }
}

/// The q-logarithm `(x^{1-q} - 1) / (1 - q)`, natural log at q = 1.
pub fn q_log(x: f64, q: EntropicIndex) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(ln_q(x, q))
    } else {
        Err(Error::Domain {
            what: "q-logarithm requires a finite positive argument",
            value: x,
        })
    }
}

/// The q-exponential `{1 + (1-q) x}^{1/(1-q)}`, natural exp at q = 1.
///
/// Where `1 + (1-q) x <= 0` the function is undefined and
/// [`Error::Undefined`] is returned.
pub fn q_exp(x: f64, q: EntropicIndex) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain {
            what: "q-exponential argument is NaN",
            value: x,
        });
    }
    if !q.deformed() {
        return Ok(x.exp());
    }
    let a = q.one_minus();
    let t = a * x;
    if t <= -1.0 {
        return Err(Error::Undefined { base: 1.0 + t });
    }
    Ok((t.ln_1p() / a).exp())
}
