//! Numeric abstraction shared by every algorithm in the crate.
//!
//! Weights, acceptance probabilities and LP coefficients are all written
//! against [`Scalar`], so the same code runs on `f32`/`f64` for Monte Carlo
//! work and on [`BigRational`] wherever an exact answer is required.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// True when the value should be treated as zero by pivoting and
    /// feasibility checks. Exact types answer exactly.
    fn is_negligible(&self) -> bool;

    fn from_usize_lossless(v: usize) -> Self {
        Self::from_usize(v).expect("usize fits every scalar type")
    }

    /// `num / den` in this scalar type.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("i64 fits") / Self::from_i64(den).expect("i64 fits")
    }

    /// `2^k` for small `k`.
    fn pow2(k: u32) -> Self {
        let mut out = Self::one();
        let two = Self::one() + Self::one();
        for _ in 0..k {
            out = out * two.clone();
        }
        out
    }

    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Converts an `f64` into this scalar. Exact for rationals (every finite
    /// double is a dyadic rational).
    fn from_f64_value(v: f64) -> Option<Self>;

    fn from_rational(q: &BigRational) -> Self;
}

impl Scalar for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-12
    }

    fn from_f64_value(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-6
    }

    fn from_f64_value(v: f64) -> Option<Self> {
        v.is_finite().then_some(v as f32)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.to_f32().unwrap_or(f32::NAN)
    }
}

impl Scalar for BigRational {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn from_f64_value(v: f64) -> Option<Self> {
        BigRational::from_float(v)
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }
}

/// Builds an exact rational `num / den`.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Harmonic number `H_k = 1 + 1/2 + ... + 1/k`, with `H_0 = 0`.
pub fn harmonic<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::zero(), |acc, i| acc + T::one() / T::from_usize_lossless(i))
}

/// Renders an exact rational as `"num/den"`, always including the
/// denominator.
pub fn fraction_string(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_fraction(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}
