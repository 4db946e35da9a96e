use super::DetFloat;

/// `e^r ~ 1 + r * (1 + r * (c2 + r * (c3 + ...)))` on `|r| <= ln2 / 2`.
/// Chebyshev fit with the constant and linear terms pinned to 1, relative
/// error about 1.1e-10.
const EXP_POLY: [f64; 8] = [
    1.0,
    1.0,
    0.500_000_004_711_775_767_4,
    0.166_666_667_189_975_085_2,
    0.041_666_352_896_775_156_79,
    0.008_333_298_483_754_886_026,
    0.001_394_110_843_397_267_461,
    0.000_198_992_739_586_493_601_6,
];

/// `ln m = 2 atanh(s)` with `s = (m - 1) / (m + 1)`: coefficients of the odd
/// series `s * (2 + 2/3 z + 2/5 z^2 + ...)`, `z = s^2`.
const LN_SERIES: [f64; 8] = [
    2.0,
    0.666_666_666_666_666_666_7,
    0.4,
    0.285_714_285_714_285_714_3,
    0.222_222_222_222_222_222_2,
    0.181_818_181_818_181_818_2,
    0.153_846_153_846_153_846_2,
    0.133_333_333_333_333_333_3,
];

const SCALE_SHIFT: i32 = 64;

fn horner<F: DetFloat>(coeffs: &[f64], x: F) -> F {
    coeffs.iter().rev().fold(F::zero(), |acc, &c| acc * x + F::lit(c))
}

/// `p * 2^k` with at most one rounding, at the very end.
fn scale<F: DetFloat>(p: F, k: i32) -> F {
    let max = F::max_exponent();
    let min = F::min_exponent();
    if k > max {
        p * F::exp2i(max) * F::exp2i(k - max)
    } else if k < min {
        p * F::exp2i(k + SCALE_SHIFT) * F::exp2i(-SCALE_SHIFT)
    } else {
        p * F::exp2i(k)
    }
}

trait ExponentRange {
    fn max_exponent() -> i32;
    fn min_exponent() -> i32;
}

impl<F: DetFloat> ExponentRange for F {
    fn max_exponent() -> i32 {
        // Largest k with exp2i(k) finite: the exponent of MAX.
        F::max_value().split_exponent().1
    }

    fn min_exponent() -> i32 {
        F::min_positive_value().split_exponent().1
    }
}

/// `e^x` via `x = k ln2 + r`, `|r| <= ln2 / 2`, a fixed polynomial for `e^r`
/// and an exact power of two for `2^k`. Overflows to `+inf` and underflows
/// to `0`.
pub fn exp<F: DetFloat>(x: F) -> F {
    if x.is_nan() {
        return x;
    }
    if x > F::exp_overflow() {
        return F::infinity();
    }
    if x < F::exp_underflow() {
        return F::zero();
    }
    let k = (x * F::LOG2_E() + F::lit(0.5)).floor();
    let r = (x - k * F::ln2_hi()) - k * F::ln2_lo();
    let k = k.to_i32().expect("exponent within range after the overflow checks");
    scale(horner(&EXP_POLY, r), k)
}

/// Natural logarithm. `ln(x)` is NaN for `x <= 0` and for NaN, `+inf` for
/// `+inf`.
pub fn ln<F: DetFloat>(x: F) -> F {
    if x.is_nan() || x <= F::zero() {
        return F::nan();
    }
    if x.is_infinite() {
        return x;
    }
    let (mut m, mut e) = x.split_exponent();
    if m > F::SQRT_2() {
        m = m / F::lit(2.0);
        e += 1;
    }
    let one = F::one();
    let s = (m - one) / (m + one);
    let ln_m = s * horner(&LN_SERIES, s * s);
    let e = <F as num_traits::NumCast>::from(e).expect("small integer");
    e * F::ln2_hi() + (ln_m + e * F::ln2_lo())
}
