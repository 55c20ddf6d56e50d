//! Arbitrary-precision nonnegative reals in binary fixed point.
//!
//! The deterministic fidelity mixes square roots of big integers, so its
//! value has no rational closed form; we carry it as `mant / 2^frac_bits`
//! with enough guard bits to certify the requested accuracy.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Nonnegative real `mant / 2^frac_bits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Precise {
    mant: BigUint,
    frac_bits: u32,
}

impl Precise {
    pub fn from_scaled(mant: BigUint, frac_bits: u32) -> Self {
        Self { mant, frac_bits }
    }

    pub fn zero(frac_bits: u32) -> Self {
        Self {
            mant: BigUint::zero(),
            frac_bits,
        }
    }

    pub fn one(frac_bits: u32) -> Self {
        Self {
            mant: BigUint::one() << frac_bits,
            frac_bits,
        }
    }

    /// Floor of `num/den` in fixed point.
    pub fn from_ratio(num: &BigUint, den: &BigUint, frac_bits: u32) -> Self {
        Self {
            mant: (num << frac_bits) / den,
            frac_bits,
        }
    }

    pub fn from_rational(r: &BigRational, frac_bits: u32) -> Self {
        assert!(!r.is_negative());
        Self::from_ratio(
            &r.numer().to_biguint().unwrap(),
            &r.denom().to_biguint().unwrap(),
            frac_bits,
        )
    }

    /// Floor square root of a nonnegative integer, in fixed point.
    pub fn sqrt_int(x: &BigUint, frac_bits: u32) -> Self {
        Self {
            mant: (x << (2 * frac_bits)).sqrt(),
            frac_bits,
        }
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mant
    }

    pub fn as_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.mant.clone()),
            BigInt::from(BigUint::one() << self.frac_bits),
        )
    }

    /// `(self·d + 1) / (d + 1)` — the average-fidelity affine map.
    pub fn affine_avg(&self, d: u32) -> Self {
        let num = &self.mant * d + (BigUint::one() << self.frac_bits);
        Self {
            mant: num / (d + 1u32),
            frac_bits: self.frac_bits,
        }
    }

    pub fn to_f64(&self) -> f64 {
        big_ratio_to_f64(&self.mant, &(BigUint::one() << self.frac_bits))
    }

    /// Decimal rendering with `sig` significant digits, fixed notation,
    /// trailing zeros trimmed.
    pub fn to_decimal(&self, sig: usize) -> String {
        decimal_string(&self.mant, &(BigUint::one() << self.frac_bits), sig)
    }

    /// |a − b| / max(a, tiny) as f64, for precision self-consistency checks.
    pub fn relative_diff(&self, other: &Precise) -> f64 {
        let a = self.as_rational();
        let b = other.as_rational();
        if a.is_zero() && b.is_zero() {
            return 0.0;
        }
        let diff = (&a - &b).abs();
        let denom = if a.is_zero() { b } else { a };
        let q = diff / denom;
        big_ratio_to_f64(
            &q.numer().to_biguint().unwrap(),
            &q.denom().to_biguint().unwrap(),
        )
    }
}

/// `num/den` as f64 without overflowing intermediate conversions.
pub fn big_ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    // keep ~80 significant bits of each
    let shift_n = (nb - 80).max(0);
    let shift_d = (db - 80).max(0);
    let n = (num >> shift_n as u64).to_f64().unwrap();
    let d = (den >> shift_d as u64).to_f64().unwrap();
    (n / d) * 2f64.powi((shift_n - shift_d) as i32)
}

/// Decimal rendering of the exact nonnegative rational `num/den`.
pub fn decimal_string(num: &BigUint, den: &BigUint, sig: usize) -> String {
    assert!(sig >= 1);
    assert!(!den.is_zero());
    if num.is_zero() {
        return "0".to_string();
    }
    let ten = BigUint::from(10u32);
    // initial exponent estimate from bit lengths
    let mut e10 = ((num.bits() as f64 - den.bits() as f64) * std::f64::consts::LOG10_2).floor()
        as i64;
    let (digits, e10) = loop {
        let s = sig as i64 - 1 - e10;
        let (n, d) = if s >= 0 {
            (num * ten.pow(s as u32), den.clone())
        } else {
            (num.clone(), den * ten.pow((-s) as u32))
        };
        // round half up
        let q = (&n * 2u32 + &d) / (&d * 2u32);
        let lo = ten.pow(sig as u32 - 1);
        let hi = ten.pow(sig as u32);
        if q < lo {
            e10 -= 1;
        } else if q >= hi {
            // either estimate off or rounding carried over a power of ten
            if q == hi {
                break (q / &ten, e10 + 1);
            }
            e10 += 1;
        } else {
            break (q, e10);
        }
    };
    let ds = digits.to_str_radix(10);
    debug_assert_eq!(ds.len(), sig);
    let mut out = String::new();
    if e10 < 0 {
        out.push_str("0.");
        for _ in 0..(-e10 - 1) {
            out.push('0');
        }
        out.push_str(&ds);
    } else if (e10 as usize) + 1 >= sig {
        out.push_str(&ds);
        for _ in 0..(e10 as usize + 1 - sig) {
            out.push('0');
        }
    } else {
        let split = e10 as usize + 1;
        out.push_str(&ds[..split]);
        out.push('.');
        out.push_str(&ds[split..]);
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Decimal rendering of a nonnegative `BigRational`.
pub fn rational_decimal(r: &BigRational, sig: usize) -> String {
    assert!(!r.is_negative());
    decimal_string(
        &r.numer().to_biguint().unwrap(),
        &r.denom().to_biguint().unwrap(),
        sig,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_and_ratio() {
        let s = Precise::sqrt_int(&BigUint::from(2u32), 128);
        let v = s.to_f64();
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-15);
        let r = Precise::from_ratio(&BigUint::from(1u32), &BigUint::from(3u32), 96);
        assert!((r.to_f64() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn affine_map() {
        let f = Precise::from_ratio(&BigUint::from(5u32), &BigUint::from(8u32), 128);
        let avg = f.affine_avg(2);
        assert!((avg.to_f64() - 0.75).abs() < 1e-15);
        let one = Precise::one(64);
        assert!((one.affine_avg(7).to_f64() - 1.0).abs() < 1e-18);
    }

    #[test]
    fn decimal_rendering() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        assert_eq!(rational_decimal(&third, 6), "0.333333");
        let r = BigRational::new(BigInt::from(13), BigInt::from(32));
        assert_eq!(rational_decimal(&r, 12), "0.40625");
        let r = BigRational::new(BigInt::from(1), BigInt::from(1));
        assert_eq!(rational_decimal(&r, 12), "1");
        let r = BigRational::new(BigInt::from(2), BigInt::from(1));
        assert_eq!(rational_decimal(&r, 4), "2");
        let r = BigRational::new(BigInt::from(1), BigInt::from(100));
        assert_eq!(rational_decimal(&r, 3), "0.01");
        let r = BigRational::new(BigInt::from(999999), BigInt::from(1000));
        assert_eq!(rational_decimal(&r, 3), "1000");
        let r = BigRational::new(BigInt::from(12345), BigInt::from(10));
        assert_eq!(rational_decimal(&r, 5), "1234.5");
        let zero = BigRational::zero();
        assert_eq!(rational_decimal(&zero, 8), "0");
    }

    #[test]
    fn decimal_of_fixed_point() {
        let s = Precise::sqrt_int(&BigUint::from(3u32), 160);
        // (2+√3)/8
        let f = Precise::from_scaled(
            (s.mantissa() + (BigUint::from(2u32) << 160)) >> 3,
            160,
        );
        assert_eq!(f.to_decimal(9), "0.466506351");
    }

    #[test]
    fn relative_diff_small() {
        let a = Precise::sqrt_int(&BigUint::from(7u32), 64);
        let b = Precise::sqrt_int(&BigUint::from(7u32), 128);
        assert!(a.relative_diff(&b) < 1e-18);
        assert!(a.relative_diff(&b) >= 0.0);
    }
}
