//! Arithmetic on the extended half-line `[0, ∞]`.
//!
//! Every monotone function in this crate maps `[0, ∞]` into itself, so the
//! toolkit needs a value type where `1/0 = ∞`, `1/∞ = 0`, `log ∞ = ∞` and
//! `x + ∞ = ∞` are ordinary, total operations. `ExtReal` is that type: a
//! tagged nonnegative finite value or the point at infinity. Reports never
//! contain IEEE infinities; `ExtReal` serializes infinity as the string
//! `"inf"`.

use serde::{Deserialize, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

/// A nonnegative extended real: a finite value in `[0, ∞)` or `∞`.
#[derive(Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);
    pub const ONE: ExtReal = ExtReal::Finite(1.0);

    /// Wraps a raw `f64`, mapping IEEE `+inf` (and anything above the finite
    /// range) to `Infinity`. Panics on NaN or negative input: those are
    /// programming errors, not data.
    pub fn new(v: f64) -> ExtReal {
        assert!(!v.is_nan(), "ExtReal::new(NaN)");
        assert!(v >= 0.0, "ExtReal::new(negative: {v})");
        if v.is_infinite() {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(v)
        }
    }

    /// Fallible constructor for untrusted numeric data.
    pub fn try_new(v: f64) -> Option<ExtReal> {
        if v.is_nan() || v < 0.0 {
            None
        } else if v.is_infinite() {
            Some(ExtReal::Infinity)
        } else {
            Some(ExtReal::Finite(v))
        }
    }

    /// Converts back to `f64`, with `Infinity -> f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    /// `1/x` with the conventions `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(self) -> ExtReal {
        match self {
            ExtReal::Infinity => ExtReal::ZERO,
            ExtReal::Finite(v) if v == 0.0 => ExtReal::Infinity,
            ExtReal::Finite(v) => ExtReal::Finite(1.0 / v),
        }
    }

    /// Natural log into the two-sided extended line (`log 0 = -∞`), as a raw
    /// `f64` because the result may be negative.
    pub fn ln(self) -> f64 {
        match self {
            ExtReal::Infinity => f64::INFINITY,
            ExtReal::Finite(v) => v.ln(),
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    fn total_cmp(&self, other: &ExtReal) -> Ordering {
        match (self, other) {
            (ExtReal::Infinity, ExtReal::Infinity) => Ordering::Equal,
            (ExtReal::Infinity, ExtReal::Finite(_)) => Ordering::Greater,
            (ExtReal::Finite(_), ExtReal::Infinity) => Ordering::Less,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl std::ops::Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::new(a + b),
            _ => ExtReal::Infinity,
        }
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => serializer.serialize_f64(*v),
            ExtReal::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<ExtReal, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => ExtReal::try_new(v)
                .ok_or_else(|| D::Error::custom(format!("invalid extended real {v}"))),
            Raw::Str(s) if s == "inf" => Ok(ExtReal::Infinity),
            Raw::Str(s) => Err(D::Error::custom(format!("invalid extended real {s:?}"))),
        }
    }
}

/// `ln(e^a + e^b)` without overflow; tolerates `-inf` inputs.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(e^a - e^b)` for `a > b`; returns `-inf` when the difference underflows.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b, "log_sub_exp needs a >= b, got {a} < {b}");
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = b - a; // <= 0
    // e^a - e^b = e^a (1 - e^d)
    a + (-d.exp()).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_conventions() {
        assert_eq!(ExtReal::ZERO.recip(), ExtReal::Infinity);
        assert_eq!(ExtReal::Infinity.recip(), ExtReal::ZERO);
        assert_eq!(ExtReal::Infinity.ln(), f64::INFINITY);
        assert_eq!(
            ExtReal::new(3.0) + ExtReal::Infinity,
            ExtReal::Infinity
        );
        assert_eq!(ExtReal::new(f64::INFINITY), ExtReal::Infinity);
    }

    #[test]
    fn order_puts_infinity_on_top() {
        assert!(ExtReal::Finite(1e300) < ExtReal::Infinity);
        assert!(ExtReal::Finite(2.0) > ExtReal::Finite(1.0));
        assert!(ExtReal::Infinity >= ExtReal::Infinity);
    }

    #[test]
    fn serializes_infinity_as_string() {
        let json = serde_json::to_string(&ExtReal::Infinity).unwrap();
        assert_eq!(json, "\"inf\"");
        let back: ExtReal = serde_json::from_str(&json).unwrap();
        assert!(back.is_infinite());
        let num: ExtReal = serde_json::from_str("2.5").unwrap();
        assert_eq!(num, ExtReal::Finite(2.5));
    }

    #[test]
    fn log_space_helpers() {
        let v = log_add_exp(700.0, 700.0);
        assert!((v - (700.0 + std::f64::consts::LN_2)).abs() < 1e-12);
        let w = log_sub_exp(1.0, 0.0);
        assert!((w.exp() - (1.0f64.exp() - 1.0)).abs() < 1e-12);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }
}

/// Serde helper for `f64` fields that may legitimately hold `±inf`
/// (serialized as the strings `"inf"` / `"-inf"`, which plain JSON cannot
/// carry as numbers).
pub mod serde_f64_ext {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Raw::Str(s) => Err(D::Error::custom(format!("invalid extended f64 {s:?}"))),
        }
    }
}
