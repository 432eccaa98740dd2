//! Scalar abstractions shared by the auction and network code.
//!
//! Auction clearing only needs ordered ring arithmetic, so it is generic over
//! [`Money`] and runs unchanged on `f64`, `f32` or exact rationals. The network
//! code needs transcendental functions and is generic over [`Real`].

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Ordered arithmetic type usable for bids, payments and values.
pub trait Money: Num + Copy + PartialOrd + Debug {}

impl<T: Num + Copy + PartialOrd + Debug> Money for T {}

/// Floating-point type usable for network parameters and probabilities.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + AddAssign + SubAssign + MulAssign + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Sum of a slice of money values.
pub fn total<T: Money>(xs: impl IntoIterator<Item = T>) -> T {
    xs.into_iter().fold(T::zero(), |acc, x| acc + x)
}
