//! Arbitrary-precision complex arithmetic on top of binary big floats.
//!
//! Values are immutable after construction; both parts carry the same
//! precision. Transcendental functions go through a thread-local constants
//! cache so values stay `Send + Sync`.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint, Sign as IntSign};
use num_rational::BigRational;
use num_traits::Zero;
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::polycore::gaussian::GaussianRational;

pub type Real = BigFloat;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Runs `f` with the thread-local constants cache.
pub fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

pub fn pi(p: usize) -> Real {
    with_consts(|cc| cc.pi(p, RM))
}

pub fn two_pi(p: usize) -> Real {
    let pi = pi(p);
    pi.add(&pi, p, RM)
}

/// 2^e at precision p.
pub fn pow2(e: i64, p: usize) -> Real {
    let mut one = BigFloat::from_u8(1, p);
    let cur = one.exponent().unwrap_or(0);
    one.set_exponent(cur + e as astro_float::Exponent);
    one
}

pub fn real_from_f64(x: f64, p: usize) -> Real {
    BigFloat::from_f64(x, p)
}

pub fn real_from_i64(x: i64, p: usize) -> Real {
    BigFloat::from_i64(x, p)
}

/// Exact conversion of a big integer (decimal digits parse exactly when the
/// precision covers the bit length).
pub fn real_from_bigint(x: &BigInt, p: usize) -> Real {
    let bits = x.bits() as usize + 64;
    let pp = p.max(bits);
    with_consts(|cc| BigFloat::parse(&x.to_string(), Radix::Dec, pp, RM, cc))
}

pub fn real_from_rational(x: &BigRational, p: usize) -> Real {
    if x.is_zero() {
        return BigFloat::from_u8(0, p);
    }
    let num = real_from_bigint(x.numer(), p + 64);
    let den = real_from_bigint(x.denom(), p + 64);
    num.div(&den, p, RM)
}

/// Rounds a real to the nearest integer, ties away from zero.
pub fn real_to_bigint_round(x: &Real) -> Result<BigInt> {
    if x.is_nan() || x.is_inf() {
        return Err(Error::NonFiniteValue);
    }
    if x.is_zero() {
        return Ok(BigInt::zero());
    }
    let (words, nbits, sign, exp, _) = x.as_raw_parts().ok_or(Error::NonFiniteValue)?;
    // value = 0.mantissa * 2^exp, mantissa words little-endian
    let mut bytes = Vec::with_capacity(words.len() * 8);
    for w in words {
        bytes.extend_from_slice(&w.to_le_bytes());
    }
    let m = BigUint::from_bytes_le(&bytes);
    let shift = nbits as i64 - exp as i64;
    let mag = if shift <= 0 {
        m << ((-shift) as usize)
    } else {
        let s = shift as usize;
        let floor = &m >> s;
        // round-half-away: inspect the bit below the cut
        if s >= 1 && ((&m >> (s - 1)) & BigUint::from(1u8)) == BigUint::from(1u8) {
            floor + BigUint::from(1u8)
        } else {
            floor
        }
    };
    let s = if sign == Sign::Neg {
        IntSign::Minus
    } else {
        IntSign::Plus
    };
    Ok(BigInt::from_biguint(s, mag))
}

/// An arbitrary-precision complex number; `re` and `im` share `precision_bits`.
#[derive(Clone, PartialEq)]
pub struct MPComplex {
    pub re: Real,
    pub im: Real,
    pub precision_bits: usize,
}

impl MPComplex {
    pub fn new(re: Real, im: Real, p: usize) -> Self {
        MPComplex {
            re,
            im,
            precision_bits: p,
        }
    }

    pub fn zero(p: usize) -> Self {
        MPComplex::new(BigFloat::from_u8(0, p), BigFloat::from_u8(0, p), p)
    }

    pub fn one(p: usize) -> Self {
        MPComplex::new(BigFloat::from_u8(1, p), BigFloat::from_u8(0, p), p)
    }

    pub fn i(p: usize) -> Self {
        MPComplex::new(BigFloat::from_u8(0, p), BigFloat::from_u8(1, p), p)
    }

    pub fn from_f64(re: f64, im: f64, p: usize) -> Self {
        MPComplex::new(BigFloat::from_f64(re, p), BigFloat::from_f64(im, p), p)
    }

    pub fn from_i64(re: i64, im: i64, p: usize) -> Self {
        MPComplex::new(BigFloat::from_i64(re, p), BigFloat::from_i64(im, p), p)
    }

    pub fn from_gaussian(g: &GaussianRational, p: usize) -> Self {
        MPComplex::new(
            real_from_rational(&g.re, p),
            real_from_rational(&g.im, p),
            p,
        )
    }

    /// 2*pi*i*k
    pub fn two_pi_i_times(k: i64, p: usize) -> Self {
        let tp = two_pi(p);
        let im = tp.mul(&BigFloat::from_i64(k, p), p, RM);
        MPComplex::new(BigFloat::from_u8(0, p), im, p)
    }

    pub fn is_finite(&self) -> bool {
        !(self.re.is_nan() || self.re.is_inf() || self.im.is_nan() || self.im.is_inf())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn p(&self) -> usize {
        self.precision_bits
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let p = self.p().max(rhs.p());
        MPComplex::new(self.re.add(&rhs.re, p, RM), self.im.add(&rhs.im, p, RM), p)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let p = self.p().max(rhs.p());
        MPComplex::new(self.re.sub(&rhs.re, p, RM), self.im.sub(&rhs.im, p, RM), p)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let p = self.p().max(rhs.p());
        let re = self
            .re
            .mul(&rhs.re, p, RM)
            .sub(&self.im.mul(&rhs.im, p, RM), p, RM);
        let im = self
            .re
            .mul(&rhs.im, p, RM)
            .add(&self.im.mul(&rhs.re, p, RM), p, RM);
        MPComplex::new(re, im, p)
    }

    pub fn mul_real(&self, rhs: &Real) -> Self {
        let p = self.p();
        MPComplex::new(self.re.mul(rhs, p, RM), self.im.mul(rhs, p, RM), p)
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        let p = self.p().max(rhs.p());
        let d = rhs.norm_sqr();
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let re = self
            .re
            .mul(&rhs.re, p, RM)
            .add(&self.im.mul(&rhs.im, p, RM), p, RM)
            .div(&d, p, RM);
        let im = self
            .im
            .mul(&rhs.re, p, RM)
            .sub(&self.re.mul(&rhs.im, p, RM), p, RM)
            .div(&d, p, RM);
        Ok(MPComplex::new(re, im, p))
    }

    pub fn neg(&self) -> Self {
        MPComplex::new(self.re.neg(), self.im.neg(), self.p())
    }

    pub fn conj(&self) -> Self {
        MPComplex::new(self.re.clone(), self.im.neg(), self.p())
    }

    /// re^2 + im^2 as a real.
    pub fn norm_sqr(&self) -> Real {
        let p = self.p();
        self.re
            .mul(&self.re, p, RM)
            .add(&self.im.mul(&self.im, p, RM), p, RM)
    }

    /// |z|
    pub fn abs(&self) -> Real {
        let p = self.p();
        self.norm_sqr().sqrt(p, RM)
    }

    /// Principal argument in (-pi, pi], via atan with quadrant corrections.
    pub fn arg(&self) -> Real {
        let p = self.p();
        let pi_v = pi(p);
        if self.re.is_zero() && self.im.is_zero() {
            return BigFloat::from_u8(0, p);
        }
        if self.re.is_zero() {
            let half_pi = pi_v.div(&BigFloat::from_u8(2, p), p, RM);
            return if self.im.is_positive() {
                half_pi
            } else {
                half_pi.neg()
            };
        }
        let base = with_consts(|cc| self.im.div(&self.re, p, RM).atan(p, RM, cc));
        if self.re.is_positive() {
            base
        } else if self.im.is_negative() {
            base.sub(&pi_v, p, RM)
        } else {
            // im >= 0, re < 0: arg in (pi/2, pi]
            base.add(&pi_v, p, RM)
        }
    }

    /// Complex exponential.
    pub fn exp(&self) -> Self {
        let p = self.p();
        with_consts(|cc| {
            let r = self.re.exp(p, RM, cc);
            let c = self.im.cos(p, RM, cc);
            let s = self.im.sin(p, RM, cc);
            MPComplex::new(r.mul(&c, p, RM), r.mul(&s, p, RM), p)
        })
    }

    /// Principal logarithm: ln|z| + i*arg(z), arg in (-pi, pi].
    pub fn ln(&self) -> Result<Self> {
        let p = self.p();
        if self.is_zero() {
            return Err(Error::NonFiniteValue);
        }
        let m = self.abs();
        let re = with_consts(|cc| m.ln(p, RM, cc));
        Ok(MPComplex::new(re, self.arg(), p))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.p();
        if self.is_zero() {
            return MPComplex::zero(p);
        }
        let half = self.arg().div(&BigFloat::from_u8(2, p), p, RM);
        let r = self.abs().sqrt(p, RM);
        with_consts(|cc| {
            MPComplex::new(
                r.mul(&half.cos(p, RM, cc), p, RM),
                r.mul(&half.sin(p, RM, cc), p, RM),
                p,
            )
        })
    }

    /// Distance |self - rhs|.
    pub fn dist(&self, rhs: &Self) -> Real {
        self.sub(rhs).abs()
    }

    /// Reduces precision (or re-tags at higher precision) deterministically.
    pub fn with_precision(&self, p: usize) -> Self {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        re.set_precision(p, RM).expect("precision update");
        im.set_precision(p, RM).expect("precision update");
        MPComplex::new(re, im, p)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (real_to_f64(&self.re), real_to_f64(&self.im))
    }
}

impl fmt::Display for MPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*i", self.re, self.im)
    }
}

impl fmt::Debug for MPComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64();
        write!(f, "({re:e} + {im:e}i @{})", self.precision_bits)
    }
}

pub fn real_to_f64(x: &Real) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let mut v = x.clone();
    let _ = v.set_precision(64, RM);
    let (words, nbits, sign, exp, _) = match v.as_raw_parts() {
        Some(t) => t,
        None => return 0.0,
    };
    if words.is_empty() {
        return 0.0;
    }
    let m = words[words.len() - 1] as f64 / 2f64.powi(64) + {
        if words.len() > 1 {
            words[words.len() - 2] as f64 / 2f64.powi(128)
        } else {
            0.0
        }
    };
    let _ = nbits;
    let val = m * 2f64.powi(exp);
    if sign == Sign::Neg {
        -val
    } else {
        val
    }
}

/// Compares two reals; NaN sorts above everything (treated as +inf poison).
pub fn real_cmp(a: &Real, b: &Real) -> Ordering {
    match a.cmp(b) {
        Some(v) if v < 0 => Ordering::Less,
        Some(v) if v > 0 => Ordering::Greater,
        Some(_) => Ordering::Equal,
        None => {
            if a.is_nan() && b.is_nan() {
                Ordering::Equal
            } else if a.is_nan() {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
    }
}

pub fn real_max(a: Real, b: Real) -> Real {
    if real_cmp(&a, &b) == Ordering::Less {
        b
    } else {
        a
    }
}

/// Decimal string round-trippable at precision p (correctly rounded output).
pub fn real_to_decimal(x: &Real) -> String {
    with_consts(|cc| {
        x.format(Radix::Dec, RM, cc)
            .unwrap_or_else(|_| "NaN".to_string())
    })
}

pub fn real_from_decimal(s: &str, p: usize) -> Result<Real> {
    let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, p, RM, cc));
    if v.is_nan() {
        return Err(Error::InputParse(format!("bad decimal literal `{s}`")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    fn close(a: &Real, b: &Real, tol_exp: i64) -> bool {
        let d = a.sub(b, P, RM).abs();
        real_cmp(&d, &pow2(tol_exp, P)) != Ordering::Greater
    }

    #[test]
    fn exp_ln_roundtrip() {
        let z = MPComplex::from_f64(0.7, -2.3, P);
        let w = z.exp().ln().unwrap();
        assert!(close(&z.re, &w.re, -240));
        assert!(close(&z.im, &w.im, -240));
    }

    #[test]
    fn principal_log_branch() {
        // ln(-1) = i*pi (arg in (-pi, pi])
        let z = MPComplex::from_i64(-1, 0, P);
        let l = z.ln().unwrap();
        assert!(l.re.is_zero() || close(&l.re, &BigFloat::from_u8(0, P), -250));
        assert!(close(&l.im, &pi(P), -250));
        // ln of lower half plane has negative imaginary part
        let z2 = MPComplex::from_i64(-1, -1, P);
        assert!(z2.ln().unwrap().im.is_negative());
    }

    #[test]
    fn arg_quadrants() {
        let q1 = MPComplex::from_i64(1, 1, P).arg();
        let q2 = MPComplex::from_i64(-1, 1, P).arg();
        let q3 = MPComplex::from_i64(-1, -1, P).arg();
        let q4 = MPComplex::from_i64(1, -1, P).arg();
        let quarter = pi(P).div(&BigFloat::from_u8(4, P), P, RM);
        let tq = pi(P)
            .mul(&BigFloat::from_u8(3, P), P, RM)
            .div(&BigFloat::from_u8(4, P), P, RM);
        assert!(close(&q1, &quarter, -250));
        assert!(close(&q2, &tq, -250));
        assert!(close(&q3, &tq.neg(), -250));
        assert!(close(&q4, &quarter.neg(), -250));
    }

    #[test]
    fn sqrt_squares_back() {
        let z = MPComplex::from_f64(-3.25, 1.5, P);
        let s = z.sqrt();
        let back = s.mul(&s);
        assert!(close(&back.re, &z.re, -240));
        assert!(close(&back.im, &z.im, -240));
        // principal branch: Re(sqrt) >= 0
        assert!(!s.re.is_negative());
    }

    #[test]
    fn two_pi_i_exp_is_one() {
        let z = MPComplex::two_pi_i_times(3, P);
        let e = z.exp();
        assert!(close(&e.re, &BigFloat::from_u8(1, P), -250));
        assert!(close(&e.im, &BigFloat::from_u8(0, P), -250));
    }

    #[test]
    fn bigint_round_trip() {
        for v in [0i64, 1, -1, 7, -100, 123456789] {
            let r = real_from_i64(v, P);
            assert_eq!(real_to_bigint_round(&r).unwrap(), BigInt::from(v));
        }
        // rounding
        let x = real_from_f64(2.5, P);
        assert_eq!(real_to_bigint_round(&x).unwrap(), BigInt::from(3));
        let x = real_from_f64(-2.5, P);
        assert_eq!(real_to_bigint_round(&x).unwrap(), BigInt::from(-3));
        let x = real_from_f64(2.49, P);
        assert_eq!(real_to_bigint_round(&x).unwrap(), BigInt::from(2));
    }

    #[test]
    fn decimal_round_trip_bit_exact() {
        let x = pi(P).mul(&real_from_f64(0.1234, P), P, RM);
        let s = real_to_decimal(&x);
        let back = real_from_decimal(&s, P).unwrap();
        assert_eq!(x, back);
    }

    #[test]
    fn pow2_values() {
        assert_eq!(pow2(3, P), real_from_i64(8, P));
        let half = pow2(-1, P);
        assert_eq!(half, real_from_f64(0.5, P));
    }
}
