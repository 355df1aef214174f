//! Scalar abstraction and small numeric helpers shared by every module.
//!
//! All physics code is generic over [`Real`], a bundle of num-traits bounds
//! that both `f32` and `f64` satisfy. Concrete `f64` aliases for the main
//! domain types live at the crate root.

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps};

/// Floating-point scalar the simulation runs on.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssignOps
    + Sum<Self>
    + fmt::Display
    + fmt::Debug
    + rustfft::FftNum
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssignOps
        + Sum<Self>
        + fmt::Display
        + fmt::Debug
        + rustfft::FftNum
{
}

/// Vacuum speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Bring an `f64` literal into the working scalar type.
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Tolerance used for normalization and unitarity checks: the documented
/// 1e-12 bound for f64, loosened to a few ulps for narrower scalars.
#[inline]
pub fn norm_tolerance<R: Real>() -> R {
    lit::<R>(1e-12).max(R::epsilon() * lit(64.0))
}

/// One SplitMix64 step.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent RNG seed for a grid index. Draws keyed this way do
/// not depend on evaluation order or thread count.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

/// Error function (Abramowitz & Stegun 7.1.26, |error| < 1.5e-7).
pub fn erf<R: Real>(x: R) -> R {
    let sign = if x < R::zero() { -R::one() } else { R::one() };
    let x = x.abs();
    let t = R::one() / (R::one() + lit::<R>(0.327_591_1) * x);
    let poly = ((((lit::<R>(1.061_405_429) * t - lit::<R>(1.453_152_027)) * t
        + lit::<R>(1.421_413_741))
        * t
        - lit::<R>(0.284_496_736))
        * t
        + lit::<R>(0.254_829_592))
        * t;
    sign * (R::one() - poly * (-x * x).exp())
}

/// Standard normal cumulative distribution function.
#[inline]
pub fn normal_cdf<R: Real>(z: R) -> R {
    lit::<R>(0.5) * (R::one() + erf(z / R::SQRT_2()))
}

/// sin(x)/x with the x -> 0 limit handled.
#[inline]
pub fn sinc<R: Real>(x: R) -> R {
    if x.abs() < lit(1e-9) {
        R::one()
    } else {
        x.sin() / x
    }
}

/// Ordinary least squares y = a*x + b; returns (slope, intercept, r_squared).
pub fn linear_fit<R: Real>(points: &[(R, R)]) -> (R, R, R) {
    let n = lit::<R>(points.len() as f64);
    let sx: R = points.iter().map(|p| p.0).sum();
    let sy: R = points.iter().map(|p| p.1).sum();
    let sxx: R = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: R = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: R = points.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let ss_res: R = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let r2 = if ss_tot > R::zero() {
        R::one() - ss_res / ss_tot
    } else {
        R::one()
    };
    (slope, intercept, r2)
}
