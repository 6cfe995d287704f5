use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Expr;

/// Program size; [`Cost::INFINITE`] marks programs that must never be
/// extracted. Addition saturates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cost(u64);

impl Cost {
    pub const ZERO: Cost = Cost(0);
    pub const INFINITE: Cost = Cost(u64::MAX);

    pub fn new(value: u64) -> Cost {
        Cost(value.min(u64::MAX - 1))
    }

    pub fn is_finite(self) -> bool {
        self != Cost::INFINITE
    }

    /// The finite value, if any.
    pub fn value(self) -> Option<u64> {
        self.is_finite().then_some(self.0)
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        if !self.is_finite() || !rhs.is_finite() {
            return Cost::INFINITE;
        }
        Cost::new(self.0.saturating_add(rhs.0))
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("inf"),
        }
    }
}

/// Serialized as a number, or `null` for [`Cost::INFINITE`].
impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map_or(Cost::INFINITE, Cost::new))
    }
}

/// Node count: every constructor, literal and variable counts one (a vector
/// literal `[a, b, c]` therefore costs four). Inverse forms cost infinity.
pub fn cost(e: &Expr) -> Cost {
    let (op, children) = e.to_op();
    if op.is_inverse() {
        return Cost::INFINITE;
    }
    Cost(1) + children.into_iter().map(cost).sum()
}
