//! Signed values stored as `sign * exp(log_magnitude)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogScaledValue {
    pub log_magnitude: f64,
    /// +1, -1, or 0 for an exact zero (log_magnitude is then ignored).
    pub sign: i8,
}

impl LogScaledValue {
    pub const ZERO: Self = Self {
        log_magnitude: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: Self = Self {
        log_magnitude: 0.0,
        sign: 1,
    };

    pub fn from_ln(log_magnitude: f64) -> Self {
        if log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                log_magnitude,
                sign: 1,
            }
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self {
                log_magnitude: v.abs().ln(),
                sign: if v > 0.0 { 1 } else { -1 },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Natural log of a positive value; `None` for zero or negative values.
    pub fn ln(&self) -> Option<f64> {
        (self.sign > 0).then_some(self.log_magnitude)
    }

    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_magnitude.exp(),
        }
    }

    pub fn mul(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self {
            log_magnitude: self.log_magnitude + other.log_magnitude,
            sign: self.sign * other.sign,
        }
    }

    pub fn neg(self) -> Self {
        Self {
            sign: -self.sign,
            ..self
        }
    }

    /// Multiplies by the positive real `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        if self.is_zero() {
            self
        } else {
            Self {
                log_magnitude: self.log_magnitude + ln_factor,
                ..self
            }
        }
    }

    pub fn add(self, other: Self) -> Self {
        if self.is_zero() {
            return other;
        }
        if other.is_zero() {
            return self;
        }
        let (big, small) = if self.log_magnitude >= other.log_magnitude {
            (self, other)
        } else {
            (other, self)
        };
        let r = (small.log_magnitude - big.log_magnitude).exp();
        if big.sign == small.sign {
            Self {
                log_magnitude: big.log_magnitude + r.ln_1p(),
                sign: big.sign,
            }
        } else if r == 1.0 {
            Self::ZERO
        } else {
            Self {
                log_magnitude: big.log_magnitude + (-r).ln_1p(),
                sign: big.sign,
            }
        }
    }
}

/// `ln(sum(exp(x)))` with a max shift; empty or all `-inf` gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

#[inline]
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// A positive quantity `exp(ln)` carried together with `d ln / dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LogDeriv {
    pub ln: f64,
    pub dln: f64,
}

impl LogDeriv {
    pub const ZERO: Self = Self {
        ln: f64::NEG_INFINITY,
        dln: 0.0,
    };
    pub const ONE: Self = Self { ln: 0.0, dln: 0.0 };

    #[inline]
    pub fn mul(self, other: Self) -> Self {
        if self.ln == f64::NEG_INFINITY || other.ln == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self {
            ln: self.ln + other.ln,
            dln: self.dln + other.dln,
        }
    }

    /// Sum of two positive quantities; the log-derivative is the
    /// weight-averaged log-derivative of the parts.
    #[inline]
    pub fn add(self, other: Self) -> Self {
        if self.ln == f64::NEG_INFINITY {
            return other;
        }
        if other.ln == f64::NEG_INFINITY {
            return self;
        }
        let (hi, lo) = if self.ln >= other.ln {
            (self, other)
        } else {
            (other, self)
        };
        let w = (lo.ln - hi.ln).exp();
        Self {
            ln: hi.ln + w.ln_1p(),
            dln: (hi.dln + w * lo.dln) / (1.0 + w),
        }
    }
}
