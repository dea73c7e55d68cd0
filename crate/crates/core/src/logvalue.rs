//! Signed log-domain scalars.
//!
//! Volumes of a few hundred feature vectors routinely reach `e^500`, far past
//! what an `f64` holds, so every determinant-like quantity is carried as a
//! sign plus the natural log of its magnitude.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Serialize};

/// A real number stored as `sign * exp(log_magnitude)`.
///
/// Zero is represented by `sign == 0` and `log_magnitude == -inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogValue {
    sign: i8,
    #[serde(with = "crate::serde_float")]
    log_magnitude: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    pub const ONE: LogValue = LogValue {
        sign: 1,
        log_magnitude: 0.0,
    };

    /// Builds a positive value from its natural logarithm. `-inf` maps to zero.
    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                sign: 1,
                log_magnitude: ln,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        match x.partial_cmp(&0.0) {
            Some(Ordering::Greater) => LogValue {
                sign: 1,
                log_magnitude: x.ln(),
            },
            Some(Ordering::Less) => LogValue {
                sign: -1,
                log_magnitude: (-x).ln(),
            },
            _ => Self::ZERO,
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// Natural log of the magnitude; `-inf` for zero.
    pub fn log_magnitude(&self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn is_positive(&self) -> bool {
        self.sign > 0
    }

    /// Converts back to a plain float; overflows to `±inf` outside the `f64` range.
    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.log_magnitude.exp()
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::ONE;
        }
        let sign = if self.sign < 0 && n % 2 == 0 {
            1
        } else {
            self.sign
        };
        LogValue {
            sign,
            log_magnitude: self.log_magnitude * f64::from(n),
        }
    }

    /// Sums an iterator of values without leaving the log domain.
    pub fn sum<I: IntoIterator<Item = LogValue>>(values: I) -> LogValue {
        values.into_iter().fold(LogValue::ZERO, |acc, v| acc + v)
    }
}

impl Default for LogValue {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return Self::ZERO;
        }
        LogValue {
            sign: self.sign * rhs.sign,
            log_magnitude: self.log_magnitude + rhs.log_magnitude,
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;

    /// Division by zero yields a value with `log_magnitude == +inf`.
    fn div(self, rhs: LogValue) -> LogValue {
        if self.is_zero() {
            return Self::ZERO;
        }
        let sign = if rhs.is_zero() {
            self.sign
        } else {
            self.sign * rhs.sign
        };
        LogValue {
            sign,
            log_magnitude: self.log_magnitude - rhs.log_magnitude,
        }
    }
}

impl Add for LogValue {
    type Output = LogValue;

    fn add(self, rhs: LogValue) -> LogValue {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.log_magnitude >= rhs.log_magnitude {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let ratio = (small.log_magnitude - big.log_magnitude).exp();
        if big.sign == small.sign {
            LogValue {
                sign: big.sign,
                log_magnitude: big.log_magnitude + ratio.ln_1p(),
            }
        } else if ratio >= 1.0 {
            Self::ZERO
        } else {
            LogValue {
                sign: big.sign,
                log_magnitude: big.log_magnitude + (-ratio).ln_1p(),
            }
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.log_magnitude.partial_cmp(&other.log_magnitude),
                _ => other.log_magnitude.partial_cmp(&self.log_magnitude),
            },
            ord => Some(ord),
        }
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.log_magnitude),
            _ => write!(f, "-exp({})", self.log_magnitude),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn round_trips_plain_values() {
        for x in [3.5, -2.0, 1e-300, 0.0] {
            assert_relative_eq!(LogValue::from_f64(x).to_f64(), x, max_relative = 1e-14);
        }
        assert!(LogValue::from_f64(0.0).is_zero());
    }

    #[test]
    fn arithmetic_matches_floats() {
        let a = LogValue::from_f64(6.0);
        let b = LogValue::from_f64(-4.0);
        assert_relative_eq!((a + b).to_f64(), 2.0, max_relative = 1e-14);
        assert_relative_eq!((b + a).to_f64(), 2.0, max_relative = 1e-14);
        assert_relative_eq!((a * b).to_f64(), -24.0, max_relative = 1e-14);
        assert_relative_eq!((a / b).to_f64(), -1.5, max_relative = 1e-14);
        assert!((a + LogValue::from_f64(-6.0)).is_zero());
        assert_relative_eq!(b.powi(2).to_f64(), 16.0, max_relative = 1e-14);
    }

    #[test]
    fn sums_beyond_float_range() {
        let huge = LogValue::from_ln(800.0);
        let total = LogValue::sum([huge, huge]);
        assert_relative_eq!(total.log_magnitude(), 800.0 + 2f64.ln(), epsilon = 1e-12);
        assert!(huge > LogValue::ONE);
        assert!(LogValue::from_f64(-1.0) < LogValue::ZERO);
    }
}
