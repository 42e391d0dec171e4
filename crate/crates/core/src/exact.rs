//! Big-number helpers shared by the exact computations.

use num_bigint::{BigInt, Sign};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub fn big_binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    binomial(BigInt::from(n), BigInt::from(k))
}

pub fn big_pow(base: u64, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

/// `num / den` correctly rounded to within a few ulps, without a gcd and
/// without overflowing intermediate doubles.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    assert!(!den.is_zero(), "zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    let (a, b) = (num.magnitude(), den.magnitude());
    // Scale so the integer quotient carries about 64 significant bits.
    let shift = 64 + b.bits() as i64 - a.bits() as i64;
    let q = if shift >= 0 { (a << shift as u64) / b } else { a / (b << (-shift) as u64) };
    let mag = q.to_f64().unwrap_or(f64::INFINITY);
    let value = scale_pow2(mag, -shift);
    if negative {
        -value
    } else {
        value
    }
}

fn scale_pow2(x: f64, e: i64) -> f64 {
    // Split the exponent so each factor stays representable.
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    ratio_to_f64(r.numer(), r.denom())
}

/// `ln |b|` for any non-zero integer.
pub fn ln_abs(b: &BigInt) -> f64 {
    let bits = b.bits();
    if bits < 1000 {
        return b.to_f64().expect("fits in a double").abs().ln();
    }
    let shift = bits - 64;
    let top = (b.magnitude() >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_conversion() {
        assert_eq!(ratio_to_f64(&BigInt::from(1), &BigInt::from(3)), 1.0 / 3.0);
        assert_eq!(ratio_to_f64(&BigInt::from(-6), &BigInt::from(4)), -1.5);
        let big = big_pow(4, 700);
        let r = ratio_to_f64(&(big.clone() * 3), &(big * 7));
        assert!((r - 3.0 / 7.0).abs() < 1e-16);
        let tiny = ratio_to_f64(&BigInt::from(1), &big_pow(2, 1070));
        assert!(tiny > 0.0 && (tiny.log2() + 1070.0).abs() < 1e-9);
        let r = rational_to_f64(&BigRational::new(BigInt::from(22), BigInt::from(7)));
        assert_eq!(r, 22.0 / 7.0);
    }

    #[test]
    fn log_of_big() {
        let b = big_pow(3, 2000);
        assert!((ln_abs(&b) - 2000.0 * 3f64.ln()).abs() < 1e-9);
        assert!((ln_abs(&BigInt::from(-8)) - 8f64.ln()).abs() < 1e-15);
        assert_eq!(big_binomial(5, 2), BigInt::from(10));
        assert!(big_binomial(2, 5).is_zero());
    }
}
