//! Extended-real values.
//!
//! Rate functions and free energies take values in `(-inf, +inf]`; log
//! probabilities take values in `[-inf, 0]`. Both infinities are carried by
//! dedicated variants rather than IEEE infinities or large sentinels, and both
//! serialize as the strings `"inf"` / `"neg_inf"`.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A real number or `+inf`.
///
/// The derived ordering places every finite value below `Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    pub const ZERO: Extended = Extended::Finite(0.0);

    /// Maps `+inf` to [`Extended::Infinite`]; everything else must be finite.
    pub fn from_f64(v: f64) -> Self {
        if v == f64::INFINITY {
            Extended::Infinite
        } else {
            debug_assert!(v.is_finite(), "non-finite value {v} in extended real");
            Extended::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    /// IEEE view, `+inf` for [`Extended::Infinite`].
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn min(self, other: Extended) -> Extended {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `self - c` for a finite offset.
    pub fn shift(self, c: f64) -> Extended {
        match self {
            Extended::Finite(v) => Extended::Finite(v - c),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl From<f64> for Extended {
    fn from(v: f64) -> Self {
        Extended::from_f64(v)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

/// A log probability: a finite non-positive real or `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum LogValue {
    NegInfinite,
    Finite(f64),
}

impl LogValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            LogValue::Finite(v) => Some(v),
            LogValue::NegInfinite => None,
        }
    }

    pub fn is_neg_infinite(self) -> bool {
        matches!(self, LogValue::NegInfinite)
    }

    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::NEG_INFINITY)
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogValue::Finite(v) => write!(f, "{v}"),
            LogValue::NegInfinite => f.write_str("neg_inf"),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => s.serialize_f64(*v),
            Extended::Infinite => s.serialize_str("inf"),
        }
    }
}

impl Serialize for LogValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LogValue::Finite(v) => s.serialize_f64(*v),
            LogValue::NegInfinite => s.serialize_str("neg_inf"),
        }
    }
}

struct MarkedFloat;

impl Visitor<'_> for MarkedFloat {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a number, \"inf\" or \"neg_inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
        match v {
            "inf" => Ok(f64::INFINITY),
            "neg_inf" => Ok(f64::NEG_INFINITY),
            other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = d.deserialize_any(MarkedFloat)?;
        if v == f64::NEG_INFINITY || v.is_nan() {
            return Err(de::Error::custom("extended real cannot be -inf"));
        }
        Ok(Extended::from_f64(v))
    }
}

impl<'de> Deserialize<'de> for LogValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = d.deserialize_any(MarkedFloat)?;
        if v == f64::NEG_INFINITY {
            Ok(LogValue::NegInfinite)
        } else if v.is_finite() {
            Ok(LogValue::Finite(v))
        } else {
            Err(de::Error::custom("log value cannot be +inf"))
        }
    }
}
