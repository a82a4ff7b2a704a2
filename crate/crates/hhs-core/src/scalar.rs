//! Floating-point scalar abstraction shared by the metric layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real number type used for edge lengths and distances.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Slack used when comparing sums of path lengths.
    const TOLERANCE: Self;

    /// Converts an `f64` literal, panicking only on unrepresentable input.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Scalar for f64 {
    const TOLERANCE: f64 = 1e-9;
}

impl Scalar for f32 {
    const TOLERANCE: f32 = 1e-4;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(2.5), 2.5);
        assert_eq!(<f32 as Scalar>::lit(2.5).as_f64(), 2.5);
        assert_eq!(f64::half() * 4.0, 2.0);
    }
}
