//! Extended natural values used by the value-iteration engine.
//!
//! Values live in `{0, ..., cap} ∪ {∞}` where `cap = |V| * W` for the graph at
//! hand. Any finite value that would exceed the cap is saturated to infinity.

use std::fmt;

/// A value in the extended naturals, with `u64::MAX` reserved for infinity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(u64);

impl Value {
    pub const INFINITY: Value = Value(u64::MAX);
    pub const ZERO: Value = Value(0);

    /// A finite value. Panics if `v` collides with the infinity sentinel.
    pub fn finite(v: u64) -> Value {
        assert!(v != u64::MAX, "finite value overflows the sentinel");
        Value(v)
    }

    pub fn is_finite(self) -> bool {
        self.0 != u64::MAX
    }

    pub fn is_infinite(self) -> bool {
        self.0 == u64::MAX
    }

    /// The finite payload, if any.
    pub fn as_finite(self) -> Option<u64> {
        if self.is_finite() {
            Some(self.0)
        } else {
            None
        }
    }

    /// `self ⊖ w = max(self - w, 0)`, saturated to infinity above `cap`.
    /// Infinity is absorbing: `∞ ⊖ w = ∞` for every finite `w`.
    pub fn minus_weight(self, w: i64, cap: u64) -> Value {
        if self.is_infinite() {
            return Value::INFINITY;
        }
        let raw = (self.0 as i128) - (w as i128);
        let clamped = raw.max(0);
        if clamped > cap as i128 {
            Value::INFINITY
        } else {
            Value(clamped as u64)
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_finite() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "inf")
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Value {
        Value::finite(v)
    }
}
