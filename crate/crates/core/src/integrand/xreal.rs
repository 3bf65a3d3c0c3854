use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A real number or `−∞`. `+∞` and NaN are not representable.
#[derive(Clone, Copy, Default)]
pub struct XReal(f64);

impl XReal {
    pub const NEG_INF: XReal = XReal(f64::NEG_INFINITY);
    pub const ZERO: XReal = XReal(0.0);

    /// Maps `−∞` to [`NEG_INF`](Self::NEG_INF).
    ///
    /// # Panics
    /// On NaN or `+∞`; these indicate a model bug rather than a payoff.
    pub fn from_f64(x: f64) -> Self {
        assert!(
            !x.is_nan() && x != f64::INFINITY,
            "extended real cannot hold {x}"
        );
        XReal(x)
    }

    /// Like [`from_f64`](Self::from_f64) but reports invalid input.
    pub fn try_from_f64(x: f64) -> Option<Self> {
        (!x.is_nan() && x != f64::INFINITY).then_some(XReal(x))
    }

    pub fn is_neg_inf(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_finite(self) -> bool {
        !self.is_neg_inf()
    }

    pub fn finite(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    /// Raw value; `−∞` comes back as `f64::NEG_INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.0
    }

    /// Multiplication by a nonnegative scalar; `0·(−∞)` is taken as `0`.
    pub fn scale(self, lambda: f64) -> Self {
        debug_assert!(lambda >= 0.0);
        if lambda == 0.0 {
            XReal::ZERO
        } else {
            XReal(self.0 * lambda)
        }
    }

    /// Absolute distance, `+∞` if exactly one side is `−∞`, `0` if both are.
    pub fn distance(self, other: XReal) -> f64 {
        match (self.finite(), other.finite()) {
            (Some(a), Some(b)) => (a - b).abs(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        }
    }

    /// Equality up to absolute tolerance, with `−∞` only equal to itself.
    pub fn approx_eq(self, other: XReal, tol: f64) -> bool {
        self.distance(other) <= tol
    }
}

impl Add for XReal {
    type Output = XReal;
    fn add(self, rhs: XReal) -> XReal {
        XReal(self.0 + rhs.0)
    }
}

impl PartialEq for XReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for XReal {}

impl PartialOrd for XReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for XReal {
    fn cmp(&self, other: &Self) -> Ordering {
        // -0.0 and 0.0 compare equal, unlike total_cmp
        self.0.partial_cmp(&other.0).expect("XReal never holds NaN")
    }
}

impl From<f64> for XReal {
    fn from(x: f64) -> Self {
        XReal::from_f64(x)
    }
}

impl fmt::Debug for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_neg_inf() {
            f.write_str("-inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

/// Scientific notation with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for XReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.finite() {
            Some(x) => serialize_f64(&x, s),
            None => s.serialize_str("-inf"),
        }
    }
}

/// Serializes through a raw JSON number so the digit count is fixed.
pub fn serialize_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = serde_json::value::RawValue::from_string(format_f64(*x))
        .map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

pub fn serialize_f64_seq<S: Serializer>(x: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|&v| XReal::from_f64(v)))
}

pub fn serialize_f64_nested<S: Serializer>(x: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(
        x.iter()
            .map(|v| v.iter().map(|&w| XReal::from_f64(w)).collect::<Vec<_>>()),
    )
}

impl<'de> Deserialize<'de> for XReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = XReal;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a finite number or \"-inf\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<XReal, E> {
                if x.is_finite() {
                    Ok(XReal(x))
                } else {
                    Err(E::custom(format!("{x} is not an admissible value")))
                }
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<XReal, E> {
                Ok(XReal(x as f64))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<XReal, E> {
                Ok(XReal(x as f64))
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<XReal, E> {
                match s {
                    "-inf" | "-Infinity" | "-infinity" => Ok(XReal::NEG_INF),
                    _ => Err(E::custom(format!("unrecognized value {s:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbing_arithmetic() {
        let a = XReal::from_f64(2.0);
        assert!((a + XReal::NEG_INF).is_neg_inf());
        assert!(XReal::NEG_INF.scale(3.0).is_neg_inf());
        assert_eq!(XReal::NEG_INF.scale(0.0), XReal::ZERO);
        assert_eq!(a.max(XReal::NEG_INF), a);
        assert!(XReal::NEG_INF < XReal::from_f64(-1e300));
        assert_eq!(XReal::from_f64(-0.0), XReal::ZERO);
    }

    #[test]
    #[should_panic]
    fn positive_infinity_is_rejected() {
        let _ = XReal::from_f64(f64::INFINITY);
    }

    #[test]
    fn json_round_trip() {
        let xs = [
            XReal::from_f64(0.632_120_558_828_557_7),
            XReal::from_f64(-1.0 / 3.0),
            XReal::NEG_INF,
            XReal::ZERO,
        ];
        let s = serde_json::to_string(&xs).unwrap();
        assert!(s.contains("\"-inf\""));
        let back: Vec<XReal> = serde_json::from_str(&s).unwrap();
        for (a, b) in xs.iter().zip(&back) {
            assert_eq!(a.to_f64().to_bits(), b.to_f64().to_bits());
        }
    }
}
