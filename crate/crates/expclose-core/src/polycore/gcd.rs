//! Content extraction, exact division, multivariate gcd, and square-free
//! parts — the elimination support triangularize needs. Gcds use the primitive
//! polynomial remainder sequence with recursive content gcds; sizes stay at
//! desk scale and every path is deterministic.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::polycore::gaussian::{gaussian_int_gcd, GaussianRational};
use crate::polycore::poly::MultiPoly;

/// Scalar canonicalization: returns the primitive Gaussian-integer form of
/// `p` (unit-normalized so the lexicographically-leading coefficient sits in
/// the canonical quadrant). Zero stays zero.
pub fn make_primitive(p: &MultiPoly) -> MultiPoly {
    if p.is_zero() {
        return p.clone();
    }
    // clear denominators
    let mut den_lcm = num_bigint::BigInt::one();
    for c in p.terms.values() {
        den_lcm = den_lcm.lcm(c.re.denom());
        den_lcm = den_lcm.lcm(c.im.denom());
    }
    let scale = GaussianRational::new(
        BigRational::from_integer(den_lcm),
        BigRational::from_integer(num_bigint::BigInt::from(0)),
    );
    let q = p.scale(&scale);
    // divide by the Z[i] gcd of all coefficients
    let mut g = GaussianRational::zero();
    for c in q.terms.values() {
        g = gaussian_int_gcd(&g, c);
        if g.norm_sqr() == BigRational::one() {
            break;
        }
    }
    let prim = if g.is_zero() {
        q
    } else {
        let inv = g.inverse().expect("nonzero gcd");
        q.scale(&inv)
    };
    // unit normalization against the leading coefficient
    let (_, unit) = prim
        .leading()
        .map(|(_, c)| c.canonical_unit())
        .unwrap_or((GaussianRational::one(), GaussianRational::one()));
    prim.scale(&unit)
}

/// Exact polynomial division; errors if `q` does not divide `p`.
pub fn exact_div(p: &MultiPoly, q: &MultiPoly) -> Result<MultiPoly> {
    debug_assert_eq!(p.num_vars, q.num_vars);
    if q.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let (lq_m, lq_c) = q.leading().expect("nonzero divisor");
    let lq_m = lq_m.clone();
    let lq_c = lq_c.clone();
    let mut rem = p.clone();
    let mut quot = MultiPoly::zero(p.num_vars);
    while !rem.is_zero() {
        let (lm, lc) = rem.leading().expect("nonzero remainder");
        let mut t = vec![0u32; p.num_vars];
        for (k, (&a, &b)) in lm.iter().zip(lq_m.iter()).enumerate() {
            if a < b {
                return Err(Error::InexactDivision);
            }
            t[k] = a - b;
        }
        let c = lc / &lq_c;
        let mut mono = MultiPoly::zero(p.num_vars);
        mono.add_term(t, c);
        quot = quot.add(&mono);
        rem = rem.sub(&mono.mul(q));
    }
    Ok(quot)
}

/// Pseudo-remainder of `a` by `b` in variable `v`:
/// lc(b)^(da-db+1) * a = q*b + r with deg_v r < deg_v b.
pub fn pseudo_rem(a: &MultiPoly, b: &MultiPoly, v: usize) -> MultiPoly {
    let db = b.degree_in(v);
    debug_assert!(db > 0 || !b.is_zero());
    let lc_b = b.coeffs_in(v).pop().expect("nonzero divisor");
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lc_r = r.coeffs_in(v).pop().expect("nonzero remainder");
        // r <- lc_b * r - lc_r * v^(dr-db) * b
        let mut shift = MultiPoly::zero(a.num_vars);
        let mut e = vec![0u32; a.num_vars];
        e[v] = dr - db;
        shift.add_term(e, GaussianRational::one());
        r = r.mul(&lc_b).sub(&lc_r.mul(&shift).mul(b));
        debug_assert!(r.is_zero() || r.degree_in(v) < dr);
    }
    r
}

/// Content of `p` with respect to `v`: the gcd of its `v`-coefficients.
pub fn content_in(p: &MultiPoly, v: usize) -> MultiPoly {
    let mut g = MultiPoly::zero(p.num_vars);
    for c in p.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, &c);
        if !g.is_zero() && g.total_degree() == 0 {
            break;
        }
    }
    if g.is_zero() {
        MultiPoly::zero(p.num_vars)
    } else {
        make_primitive(&g)
    }
}

/// Primitive part with respect to `v`.
pub fn primitive_part_in(p: &MultiPoly, v: usize) -> Result<MultiPoly> {
    if p.is_zero() {
        return Ok(p.clone());
    }
    let c = content_in(p, v);
    if c.total_degree() == 0 {
        return Ok(make_primitive(p));
    }
    Ok(make_primitive(&exact_div(p, &c)?))
}

/// Multivariate gcd over Q(i), primitive and unit-normalized.
pub fn gcd(p: &MultiPoly, q: &MultiPoly) -> MultiPoly {
    if p.is_zero() {
        return make_primitive(q);
    }
    if q.is_zero() {
        return make_primitive(p);
    }
    if p.total_degree() == 0 || q.total_degree() == 0 {
        return MultiPoly::one(p.num_vars);
    }
    // main variable: highest index occurring in either
    let v = (0..p.num_vars)
        .rev()
        .find(|&k| p.degree_in(k) > 0 || q.degree_in(k) > 0)
        .expect("nonconstant polynomials have a variable");
    if p.degree_in(v) == 0 {
        return gcd(p, &content_in(q, v));
    }
    if q.degree_in(v) == 0 {
        return gcd(&content_in(p, v), q);
    }
    let cont_gcd = gcd(&content_in(p, v), &content_in(q, v));
    let mut a = primitive_part_in(p, v).expect("content divides");
    let mut b = primitive_part_in(q, v).expect("content divides");
    if a.degree_in(v) < b.degree_in(v) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let r = pseudo_rem(&a, &b, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            // coprime in v
            return make_primitive(&cont_gcd);
        }
        a = b;
        b = primitive_part_in(&r, v).expect("content divides");
    }
    make_primitive(&cont_gcd.mul(&b))
}

/// Square-free part of `p` with respect to `v`: p / gcd(p, dp/dv),
/// primitive and unit-normalized.
pub fn square_free_in(p: &MultiPoly, v: usize) -> Result<MultiPoly> {
    if p.is_zero() || p.degree_in(v) == 0 {
        return Ok(make_primitive(p));
    }
    let dp = p.partial(v)?;
    let g = gcd(p, &dp);
    if g.total_degree() == 0 {
        return Ok(make_primitive(p));
    }
    // divisibility holds over the field, scalar normalization is irrelevant
    Ok(make_primitive(&exact_div(p, &g)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::gaussian::GaussianRational;

    fn x(nv: usize, k: usize) -> MultiPoly {
        MultiPoly::var(nv, k)
    }

    #[test]
    fn exact_div_roundtrip() {
        // (x+y)(x-y) / (x+y) = x - y
        let a = x(2, 0).add(&x(2, 1));
        let b = x(2, 0).sub(&x(2, 1));
        let prod = a.mul(&b);
        assert_eq!(exact_div(&prod, &a).unwrap(), b);
        assert!(exact_div(&a, &b).is_err());
    }

    #[test]
    fn gcd_with_common_factor() {
        // gcd((x+y)^2 (x-1), (x+y)(x^2)) = x+y up to unit
        let s = x(2, 0).add(&x(2, 1));
        let p = s.pow(2).mul(&x(2, 0).sub(&MultiPoly::one(2)));
        let q = s.mul(&x(2, 0).pow(2));
        let g = gcd(&p, &q);
        assert_eq!(g, make_primitive(&s));
    }

    #[test]
    fn gcd_coprime() {
        let p = x(2, 0).add(&MultiPoly::one(2));
        let q = x(2, 1).sub(&MultiPoly::one(2));
        let g = gcd(&p, &q);
        assert_eq!(g.total_degree(), 0);
    }

    #[test]
    fn square_free_strips_squares() {
        // (u - x)^2 (u + 1) in vars (x, u) -> (u - x)(u + 1)
        let u = x(2, 1);
        let xx = x(2, 0);
        let f = u.sub(&xx).pow(2).mul(&u.add(&MultiPoly::one(2)));
        let sf = square_free_in(&f, 1).unwrap();
        let expect = make_primitive(&u.sub(&xx).mul(&u.add(&MultiPoly::one(2))));
        assert_eq!(sf, expect);
    }

    #[test]
    fn primitive_normalizes_scalars() {
        // 2/3 * (x + 1) -> x + 1; i*(x+1) -> x + 1 (times canonical unit)
        let p = x(1, 0).add(&MultiPoly::one(1));
        let scaled = p.scale(&GaussianRational::from_parts(2, 3, 0, 1));
        assert_eq!(make_primitive(&scaled), p);
        let rotated = p.scale(&GaussianRational::i());
        assert_eq!(make_primitive(&rotated), p);
    }

    #[test]
    fn content_extraction() {
        // (x^2) * u + (x^2) in vars (x, u): content in u is x^2... gcd(x^2, x^2) = x^2
        let xx = x(2, 0).pow(2);
        let u = x(2, 1);
        let p = xx.mul(&u).add(&xx);
        let c = content_in(&p, 1);
        assert_eq!(c, xx);
        let pp = primitive_part_in(&p, 1).unwrap();
        assert_eq!(pp, u.add(&MultiPoly::one(2)));
    }
}
