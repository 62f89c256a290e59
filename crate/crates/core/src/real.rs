use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for every metric, feature and statistic in this crate.
///
/// Satisfied by `f32` and `f64`; the crate-root aliases fix `f64` as the
/// default precision.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_usize_(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    fn from_f64_(x: f64) -> Self {
        Self::from_f64(x).expect("f64 representable")
    }

    fn to_f64_(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    fn half() -> Self {
        Self::from_f64_(0.5)
    }

    fn two() -> Self {
        Self::from_f64_(2.0)
    }

    fn ten() -> Self {
        Self::from_f64_(10.0)
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + std::iter::Sum
        + std::fmt::Debug
        + std::fmt::Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// Mean of a slice; zero for an empty slice.
pub fn mean<F: Real>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::zero();
    }
    xs.iter().copied().sum::<F>() / F::from_usize_(xs.len())
}

/// Sample variance (n - 1 denominator); zero when fewer than two values.
pub fn sample_variance<F: Real>(xs: &[F]) -> F {
    if xs.len() < 2 {
        return F::zero();
    }
    let m = mean(xs);
    let ss = xs.iter().map(|&x| (x - m) * (x - m)).sum::<F>();
    ss / F::from_usize_(xs.len() - 1)
}

/// Median of an unsorted slice; even lengths average the two middle values.
/// Zero for an empty slice.
pub fn median<F: Real>(xs: &[F]) -> F {
    if xs.is_empty() {
        return F::zero();
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / F::two()
    }
}
