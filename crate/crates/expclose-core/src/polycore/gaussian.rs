//! Exact arithmetic in the Gaussian rationals Q(i).
//!
//! A value is a pair of reduced `BigRational`s; denominators stay positive and
//! fractions reduced because `num-rational` normalizes on construction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    pub fn zero() -> Self {
        GaussianRational {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        GaussianRational {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        GaussianRational {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        GaussianRational {
            re: BigRational::from_integer(BigInt::from(n)),
            im: BigRational::zero(),
        }
    }

    pub fn from_parts(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussianRational {
            re: BigRational::new(BigInt::from(re_num), BigInt::from(re_den)),
            im: BigRational::new(BigInt::from(im_num), BigInt::from(im_den)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// |z|^2 = re^2 + im^2, an exact rational.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::InexactDivision);
        }
        let n = self.norm_sqr();
        Ok(GaussianRational {
            re: &self.re / &n,
            im: -(&self.im / &n),
        })
    }

    /// Parses `a`, `a/b`, `c*i`, `a/b+c/d*i`, `a/b-c/d*i`, `i`, `-i`.
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::PolyParse("empty coefficient".into()));
        }
        // split into real and imaginary summands at a top-level +/- (not the leading sign)
        let bytes = s.as_bytes();
        let mut split = None;
        for k in 1..bytes.len() {
            if (bytes[k] == b'+' || bytes[k] == b'-')
                && bytes[k - 1] != b'e'
                && bytes[k - 1] != b'+'
                && bytes[k - 1] != b'-'
            {
                split = Some(k);
                // keep scanning: the last +/- separates the imaginary tail
            }
            let _ = k;
        }
        // a single summand: either pure real or pure imaginary
        let parse_rat = |t: &str| -> Result<BigRational> {
            let (num, den) = match t.split_once('/') {
                Some((n, d)) => (n, d),
                None => (t, "1"),
            };
            let n: BigInt = num
                .parse()
                .map_err(|_| Error::PolyParse(format!("bad integer `{num}`")))?;
            let d: BigInt = den
                .parse()
                .map_err(|_| Error::PolyParse(format!("bad integer `{den}`")))?;
            if d.is_zero() {
                return Err(Error::PolyParse("zero denominator".into()));
            }
            Ok(BigRational::new(n, d))
        };
        let parse_imag = |t: &str| -> Result<BigRational> {
            // forms: `i`, `-i`, `c*i`, `c/d*i`
            let body = t
                .strip_suffix("*i")
                .or_else(|| t.strip_suffix('i'))
                .ok_or_else(|| Error::PolyParse(format!("bad imaginary part `{t}`")))?;
            if body.is_empty() {
                return Ok(BigRational::one());
            }
            if body == "-" {
                return Ok(-BigRational::one());
            }
            parse_rat(body)
        };
        if let Some(k) = split {
            let (head, tail) = (&s[..k], &s[k..]);
            if !tail.ends_with('i') {
                return Err(Error::PolyParse(format!("expected imaginary tail in `{s}`")));
            }
            let re = parse_rat(head)?;
            let sign = if tail.starts_with('-') {
                -BigRational::one()
            } else {
                BigRational::one()
            };
            let im = parse_imag(tail.trim_start_matches(['+', '-']))? * sign;
            Ok(GaussianRational { re, im })
        } else if s.ends_with('i') {
            Ok(GaussianRational {
                re: BigRational::zero(),
                im: parse_imag(&s)?,
            })
        } else {
            Ok(GaussianRational {
                re: parse_rat(&s)?,
                im: BigRational::zero(),
            })
        }
    }

    /// True when both parts are integers (denominator 1).
    pub fn is_gaussian_integer(&self) -> bool {
        self.re.is_integer() && self.im.is_integer()
    }
}

fn fmt_rat(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rat(&self.re));
        }
        let im_part = format!("{}*i", fmt_rat(&self.im.abs()));
        if self.re.is_zero() {
            if self.im.is_negative() {
                return write!(f, "-{im_part}");
            }
            return write!(f, "{im_part}");
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}", fmt_rat(&self.re), sign, im_part)
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        let inv = rhs.inverse().expect("division by zero in Q(i)");
        self * &inv
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

/// Gcd in the Gaussian integers Z[i] (inputs must be Gaussian integers).
/// The result is only defined up to a unit; callers normalize separately.
pub fn gaussian_int_gcd(a: &GaussianRational, b: &GaussianRational) -> GaussianRational {
    debug_assert!(a.is_gaussian_integer() && b.is_gaussian_integer());
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        // nearest-integer quotient keeps |r| < |b| (Z[i] is Euclidean)
        let q = (&a / &b).round_to_gaussian_int();
        let r = &a - &(&q * &b);
        a = b;
        b = r;
    }
    a
}

impl GaussianRational {
    fn round_to_gaussian_int(&self) -> GaussianRational {
        GaussianRational {
            re: self.re.round(),
            im: self.im.round(),
        }
    }

    /// Canonical unit multiple: the representative u*self (u in {1,i,-1,-i})
    /// with Re > 0 and Im >= 0, or (0, Im > 0) patterns excluded by Re > 0 rule.
    /// Returns (canonical, unit) with canonical = unit * self.
    pub fn canonical_unit(&self) -> (GaussianRational, GaussianRational) {
        if self.is_zero() {
            return (self.clone(), GaussianRational::one());
        }
        let units = [
            GaussianRational::one(),
            GaussianRational::i(),
            GaussianRational::from_int(-1),
            -&GaussianRational::i(),
        ];
        for u in units {
            let c = &u * self;
            let pos_re = c.re.is_positive();
            let nonneg_im = !c.im.is_negative();
            if (pos_re && nonneg_im) || (c.re.is_zero() && c.im.is_positive()) {
                return (c, u);
            }
        }
        unreachable!("one unit multiple always lands in the canonical quadrant")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re_n: i64, re_d: i64, im_n: i64, im_d: i64) -> GaussianRational {
        GaussianRational::from_parts(re_n, re_d, im_n, im_d)
    }

    #[test]
    fn arithmetic_basics() {
        let a = g(1, 2, 3, 4);
        let b = g(-2, 1, 1, 3);
        let sum = &a + &b;
        assert_eq!(sum, g(-3, 2, 13, 12));
        // i * i = -1
        let i = GaussianRational::i();
        assert_eq!(&i * &i, GaussianRational::from_int(-1));
        // division round-trips
        let q = &a / &b;
        assert_eq!(&q * &b, a);
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in [
            "3", "-3", "1/2", "-7/3", "i", "-i", "2*i", "-5/2*i", "1/2+3/4*i", "-1+2*i",
            "3-1/2*i",
        ] {
            let v = GaussianRational::parse(s).unwrap();
            let printed = v.to_string();
            let back = GaussianRational::parse(&printed).unwrap();
            assert_eq!(v, back, "roundtrip failed for {s} -> {printed}");
        }
        assert_eq!(GaussianRational::parse("1/2+3/4*i").unwrap(), g(1, 2, 3, 4));
        assert!(GaussianRational::parse("1/0").is_err());
    }

    #[test]
    fn gaussian_gcd_euclidean() {
        // gcd(2, 1+i): 2 = -i (1+i)^2, so gcd is 1+i up to a unit
        let a = GaussianRational::from_int(2);
        let b = g(1, 1, 1, 1);
        let d = gaussian_int_gcd(&a, &b);
        assert_eq!(d.norm_sqr(), BigRational::from_integer(BigInt::from(2)));
    }

    #[test]
    fn canonical_unit_quadrant() {
        for v in [g(-1, 1, 2, 1), g(0, 1, -3, 1), g(2, 1, -1, 1), g(-5, 1, 0, 1)] {
            let (c, u) = v.canonical_unit();
            assert_eq!(&u * &v, c);
            assert!(
                (c.re.is_positive() && !c.im.is_negative())
                    || (c.re.is_zero() && c.im.is_positive())
            );
        }
    }
}
