//! Scalar types the geometric kernels are generic over.
//!
//! Floating point (`f32`, `f64`) is the working representation. Exact
//! rationals are supported so that identities between canonical forms can be
//! checked with zero tolerance; rationals only admit rotations by multiples of
//! a quarter turn, where sine and cosine are exact.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Signed + Send + Sync + 'static {
    /// Converts a literal; `None` for non-finite input.
    fn from_literal(value: f64) -> Option<Self>;

    fn to_real(&self) -> f64;

    /// Sine and cosine of an angle given in degrees, or `None` if the scalar
    /// type cannot represent them.
    fn sin_cos_degrees(&self) -> Option<(Self, Self)>;
}

/// Exact values of (sin, cos) when `degrees` is a whole multiple of 90.
fn quarter_turn(degrees: f64) -> Option<(i8, i8)> {
    let quarters = degrees / 90.0;
    if quarters.fract() != 0.0 {
        return None;
    }
    Some(match (quarters as i64).rem_euclid(4) {
        0 => (0, 1),
        1 => (1, 0),
        2 => (0, -1),
        _ => (-1, 0),
    })
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_literal(value: f64) -> Option<Self> {
                value.is_finite().then_some(value as $t)
            }

            fn to_real(&self) -> f64 {
                *self as f64
            }

            fn sin_cos_degrees(&self) -> Option<(Self, Self)> {
                if let Some((s, c)) = quarter_turn(*self as f64) {
                    return Some((s as $t, c as $t));
                }
                Some(self.to_radians().sin_cos())
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn from_literal(value: f64) -> Option<Self> {
        BigRational::from_f64(value)
    }

    fn to_real(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn sin_cos_degrees(&self) -> Option<(Self, Self)> {
        let degrees = self.to_real();
        let (s, c) = quarter_turn(degrees)?;
        // Guard against rationals that merely round to a multiple of 90.
        let back = BigRational::from_f64(degrees)?;
        if &back != self && !(self.is_zero() && back.is_zero()) {
            return None;
        }
        Some((BigRational::from_i8(s)?, BigRational::from_i8(c)?))
    }
}

/// Rounds to 12 significant decimal digits. Used wherever floating-point
/// values become hashconsing keys or are folded into literals.
pub fn round_sig(value: f64) -> f64 {
    if !value.is_finite() {
        return value;
    }
    // Scientific formatting rounds correctly; parsing back yields the nearest
    // double to the 12-digit decimal.
    let rounded: f64 = format!("{value:.11e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}
