//! Extended reals for imputation levels and thresholds.
//!
//! Only comparisons and a handful of model-specific evaluations are defined on
//! the infinite values. Arithmetic has to go through [`ExtReal::finite`], so an
//! accidental `inf - inf` cannot slip into a payoff.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Builds a value from an `f64`, mapping `±inf` onto the infinite variants.
    pub fn new(x: f64) -> Result<Self, ModelError> {
        if x.is_nan() {
            Err(ModelError::NotANumber)
        } else if x == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Finite(x))
        }
    }

    /// Panics on NaN. Intended for literals and already-validated values.
    pub fn from_f64(x: f64) -> Self {
        Self::new(x).expect("NaN is not an extended real")
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Lossless view as `f64`, with the infinities mapped to `f64` infinities.
    /// Callers use this for comparisons with finite bounds, never for sums.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Clamps into `[lo, hi]` (assumes `lo <= hi`).
    pub fn clamp(self, lo: Self, hi: Self) -> Self {
        self.max(lo).min(hi)
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> Self {
        ExtReal::from_f64(x)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.total_cmp(b),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        self.to_f64() == *other
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.to_f64().partial_cmp(other)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("+inf"),
            ExtReal::Finite(x) => match f.precision() {
                Some(p) => write!(f, "{x:.p$}"),
                None => write!(f, "{x}"),
            },
        }
    }
}

impl std::str::FromStr for ExtReal {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+inf" | "inf" | "+infinity" | "infinity" => Ok(ExtReal::PosInf),
            "-inf" | "-infinity" => Ok(ExtReal::NegInf),
            other => other
                .parse::<f64>()
                .map_err(|_| ModelError::BadExtReal(other.to_string()))
                .and_then(|x| {
                    if x.is_finite() {
                        Ok(ExtReal::Finite(x))
                    } else {
                        Err(ModelError::BadExtReal(other.to_string()))
                    }
                }),
        }
    }
}

/// Finite values serialize as JSON numbers, infinities as `"+inf"` / `"-inf"`.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PosInf => serializer.serialize_str("+inf"),
            ExtReal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(x) => ExtReal::new(x).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinities_at_the_ends() {
        let mut v = vec![
            ExtReal::PosInf,
            ExtReal::Finite(3.0),
            ExtReal::NegInf,
            ExtReal::Finite(-1e300),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                ExtReal::NegInf,
                ExtReal::Finite(-1e300),
                ExtReal::Finite(3.0),
                ExtReal::PosInf
            ]
        );
    }

    #[test]
    fn nan_is_rejected() {
        assert!(ExtReal::new(f64::NAN).is_err());
        assert!("nan".parse::<ExtReal>().is_err());
    }

    #[test]
    fn parses_sentinels() {
        assert_eq!("+inf".parse::<ExtReal>().unwrap(), ExtReal::PosInf);
        assert_eq!("-inf".parse::<ExtReal>().unwrap(), ExtReal::NegInf);
        assert_eq!("2.5".parse::<ExtReal>().unwrap(), ExtReal::Finite(2.5));
    }

    #[test]
    fn clamp_and_minmax() {
        let lo = ExtReal::Finite(0.0);
        let hi = ExtReal::Finite(10.0);
        assert_eq!(ExtReal::PosInf.clamp(lo, hi), hi);
        assert_eq!(ExtReal::NegInf.clamp(lo, hi), lo);
        assert_eq!(ExtReal::Finite(4.0).clamp(lo, hi), ExtReal::Finite(4.0));
        assert_eq!(ExtReal::NegInf.max(lo), lo);
    }
}
