//! Bit-reproducible math.
//!
//! IEEE-754 basic operations (add, subtract, multiply, divide, compare,
//! floor, abs) round identically on every conforming platform, but the
//! transcendental functions in platform math libraries do not. Everything
//! here is built from basic operations only, so game rules that use these
//! functions instead of `f64::sin` and friends produce the same bits on every
//! client.
//!
//! The functions are generic over [`DetFloat`] (implemented for `f32` and
//! `f64`); the `det_*` wrappers fix the scalar to `f64`.

// Coefficients are kept as the exact decimal literals they were fitted as.
#![allow(clippy::excessive_precision)]

mod exp;
mod rng;
mod trig;

use std::fmt::Debug;

use num_traits::{Float, FloatConst};

pub use exp::{exp, ln};
pub use rng::DetRng;
pub use trig::{cos, sin, tan};

/// A binary floating point type whose exponent field can be manipulated
/// directly.
pub trait DetFloat: Float + FloatConst + Debug {
    /// Converts a decimal literal; rounding happens once, at conversion.
    fn lit(v: f64) -> Self;

    /// Exactly `2^k`. `k` must lie in the normal exponent range.
    fn exp2i(k: i32) -> Self;

    /// For positive finite `self` returns `(m, e)` with `self = m * 2^e` and
    /// `m` in `[1, 2)`.
    fn split_exponent(self) -> (Self, i32);

    /// High part of ln 2 with trailing zero bits, so `k * ln2_hi` is exact for
    /// every exponent `k` that can occur.
    fn ln2_hi() -> Self;
    fn ln2_lo() -> Self;

    /// Inputs above this overflow `exp`.
    fn exp_overflow() -> Self;
    /// Inputs below this underflow `exp` to zero.
    fn exp_underflow() -> Self;
}

impl DetFloat for f64 {
    fn lit(v: f64) -> Self {
        v
    }

    fn exp2i(k: i32) -> Self {
        debug_assert!((-1022..=1023).contains(&k));
        f64::from_bits(((k + 1023) as u64) << 52)
    }

    fn split_exponent(self) -> (Self, i32) {
        debug_assert!(self > 0.0 && self.is_finite());
        let (x, bias) = if self < f64::MIN_POSITIVE { (self * Self::exp2i(54), 54) } else { (self, 0) };
        let bits = x.to_bits();
        let e = ((bits >> 52) & 0x7ff) as i32 - 1023;
        let m = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | (1023u64 << 52));
        (m, e - bias)
    }

    fn ln2_hi() -> Self {
        6.931_471_803_691_238_164_90e-1
    }

    fn ln2_lo() -> Self {
        1.908_214_929_270_587_700_02e-10
    }

    fn exp_overflow() -> Self {
        7.097_827_128_933_84e2
    }

    fn exp_underflow() -> Self {
        -7.451_332_191_019_412e2
    }
}

impl DetFloat for f32 {
    fn lit(v: f64) -> Self {
        v as f32
    }

    fn exp2i(k: i32) -> Self {
        debug_assert!((-126..=127).contains(&k));
        f32::from_bits(((k + 127) as u32) << 23)
    }

    fn split_exponent(self) -> (Self, i32) {
        debug_assert!(self > 0.0 && self.is_finite());
        let (x, bias) = if self < f32::MIN_POSITIVE { (self * Self::exp2i(25), 25) } else { (self, 0) };
        let bits = x.to_bits();
        let e = ((bits >> 23) & 0xff) as i32 - 127;
        let m = f32::from_bits((bits & 0x007f_ffff) | (127u32 << 23));
        (m, e - bias)
    }

    fn ln2_hi() -> Self {
        6.931_457_519_5e-1
    }

    fn ln2_lo() -> Self {
        1.428_606_765_3e-6
    }

    fn exp_overflow() -> Self {
        8.872_283_6e1
    }

    fn exp_underflow() -> Self {
        -1.039_720_8e2
    }
}

pub fn det_sin(x: f64) -> f64 {
    sin(x)
}

pub fn det_cos(x: f64) -> f64 {
    cos(x)
}

pub fn det_tan(x: f64) -> f64 {
    tan(x)
}

pub fn det_exp(x: f64) -> f64 {
    exp(x)
}

pub fn det_ln(x: f64) -> f64 {
    ln(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp2i_is_exact() {
        assert_eq!(f64::exp2i(0), 1.0);
        assert_eq!(f64::exp2i(-3), 0.125);
        assert_eq!(f64::exp2i(1023), 2f64.powi(1023));
        assert_eq!(f64::exp2i(-1022), f64::MIN_POSITIVE);
        assert_eq!(f32::exp2i(10), 1024.0);
        assert_eq!(f32::exp2i(-126), f32::MIN_POSITIVE);
    }

    #[test]
    fn split_exponent_round_trips() {
        for x in [1.0, 1.5, 3.0, 0.1, 1e300, 5e-324, 2.2e-308, 123456.789] {
            let (m, e) = f64::split_exponent(x);
            assert!((1.0..2.0).contains(&m), "{x}: {m}");
            let back = if e < -1022 { m * f64::exp2i(e + 64) * f64::exp2i(-64) } else { m * f64::exp2i(e.min(1023)) };
            assert_eq!(back, x);
        }
        let (m, e) = f32::split_exponent(1e-40f32);
        assert!((1.0..2.0).contains(&m));
        assert_eq!(m * f32::exp2i(e + 32) * f32::exp2i(-32), 1e-40f32);
    }

    #[test]
    fn ln2_split_is_consistent() {
        assert!((f64::ln2_hi() + f64::ln2_lo() - std::f64::consts::LN_2).abs() < 1e-16);
        // trailing zeros: k * hi exact for |k| < 2^11
        assert_eq!(f64::ln2_hi().to_bits() & 0x1f, 0);
        assert!(((f32::ln2_hi() + f32::ln2_lo()) - std::f32::consts::LN_2).abs() < 1e-7);
    }
}
