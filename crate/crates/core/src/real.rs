//! Scalar abstraction for the analytic layers.
//!
//! All closed-form computations (photon-number distributions, no-click
//! moments, condition values, cluster model) are generic over [`Real`],
//! which is implemented for `f32` and `f64`. The Monte Carlo simulator,
//! the dataset estimators and the CLI are fixed to `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: f32 or f64.
pub trait Real:
    Float + FromPrimitive + Sum + AddAssign + Display + Debug + Send + Sync + 'static
{
    /// Tail-mass target of the default truncation policy: a fraction of
    /// the machine epsilon (5.6e-17 for f64), far below the documented
    /// 1e-12 ceiling. Moment sums weight the tail by powers of n, so the
    /// mass target has to sit below machine precision for second moments
    /// to come out at 1e-12 accuracy.
    fn tail_target() -> Self {
        Self::epsilon() / Self::from_f64(4.0).unwrap()
    }

    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).unwrap()
    }
}

impl Real for f32 {}
impl Real for f64 {}
