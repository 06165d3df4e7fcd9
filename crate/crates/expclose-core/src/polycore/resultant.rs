//! Resultants by Sylvester-matrix determinants over the polynomial ring.
//!
//! The determinant uses fraction-free Bareiss elimination: every division is
//! exact, so intermediate entries stay polynomial.

use crate::error::{Error, Result};
use crate::polycore::gcd::exact_div;
use crate::polycore::poly::MultiPoly;

/// Sylvester matrix of `p`, `q` in the variable `v`; entries are polynomials
/// in the remaining variables (same variable space, `v`-degree zero).
pub fn sylvester_matrix(p: &MultiPoly, q: &MultiPoly, v: usize) -> Result<Vec<Vec<MultiPoly>>> {
    let dp = p.degree_in(v) as usize;
    let dq = q.degree_in(v) as usize;
    if dp == 0 || dq == 0 {
        return Err(Error::ResultantDegreeZero {
            degree: dp.min(dq),
        });
    }
    let pc = p.coeffs_in(v);
    let qc = q.coeffs_in(v);
    let n = dp + dq;
    let zero = MultiPoly::zero(p.num_vars);
    let mut m = vec![vec![zero.clone(); n]; n];
    // dq rows of p's coefficients (descending degree), then dp rows of q's
    for r in 0..dq {
        for (k, c) in pc.iter().rev().enumerate() {
            m[r][r + k] = c.clone();
        }
    }
    for r in 0..dp {
        for (k, c) in qc.iter().rev().enumerate() {
            m[dq + r][r + k] = c.clone();
        }
    }
    Ok(m)
}

/// Determinant of a polynomial matrix by fraction-free Bareiss elimination.
pub fn bareiss_det(mut m: Vec<Vec<MultiPoly>>, term_bound: usize) -> Result<MultiPoly> {
    let n = m.len();
    if n == 0 {
        return Err(Error::ResultantDegreeZero { degree: 0 });
    }
    let nv = m[0][0].num_vars;
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut sign_flip = false;
    let mut prev_pivot = MultiPoly::one(nv);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&r| !m[r][k].is_zero());
            match swap {
                Some(r) => {
                    m.swap(k, r);
                    sign_flip = !sign_flip;
                }
                None => return Ok(MultiPoly::zero(nv)),
            }
        }
        let pivot = m[k][k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let num = m[i][j].mul(&pivot).sub(&m[i][k].mul(&m[k][j]));
                let e = exact_div(&num, &prev_pivot)?;
                e.guard_terms(term_bound)?;
                m[i][j] = e;
            }
            m[i][k] = MultiPoly::zero(nv);
        }
        prev_pivot = pivot;
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if sign_flip { det.neg() } else { det })
}

/// Resultant of `p` and `q` with respect to variable `v`. Vanishes at a point
/// of the remaining variables iff `p` and `q` share a root in `v` there (or
/// both leading coefficients vanish).
pub fn resultant(p: &MultiPoly, q: &MultiPoly, v: usize, term_bound: usize) -> Result<MultiPoly> {
    let m = sylvester_matrix(p, q, v)?;
    bareiss_det(m, term_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::gcd::make_primitive;
    use crate::polycore::poly::{poly_from_text, VarSet};

    const BOUND: usize = 100_000;

    /// Independent oracle: cofactor (Laplace) expansion, no elimination.
    fn cofactor_det(m: &[Vec<MultiPoly>]) -> MultiPoly {
        let n = m.len();
        let nv = m[0][0].num_vars;
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = MultiPoly::zero(nv);
        for (j, top) in m[0].iter().enumerate() {
            if top.is_zero() {
                continue;
            }
            let minor: Vec<Vec<MultiPoly>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, e)| e.clone())
                        .collect()
                })
                .collect();
            let sub = cofactor_det(&minor);
            let term = top.mul(&sub);
            acc = if j % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            };
        }
        acc
    }

    fn tri(n: usize, s: &str) -> MultiPoly {
        poly_from_text(s, VarSet::Triangular { n }).unwrap()
    }

    #[test]
    fn linear_resultants() {
        // res_u(u - x1, u - x2) = x2 - x1 up to sign
        let n = 2;
        let p = tri(n, "u + -1*x1");
        let q = tri(n, "u + -1*x2");
        let r = resultant(&p, &q, 2, BOUND).unwrap();
        let expect = tri(n, "x2 + -1*x1");
        assert!(r == expect || r == expect.neg(), "got {r:?}");
    }

    #[test]
    fn substitution_resultant() {
        // res_u(u^2 - x1, u - 2) = 4 - x1 up to sign
        let n = 1;
        let p = tri(n, "u^2 + -1*x1");
        let q = tri(n, "u + -2");
        let r = resultant(&p, &q, 1, BOUND).unwrap();
        let expect = tri(n, "4 + -1*x1");
        assert!(r == expect || r == expect.neg(), "got {r:?}");
    }

    #[test]
    fn derived_sylvester_example() {
        // res_u(u^2 + x1 u + 1, u + x2) = x2^2 - x1 x2 + 1 up to sign,
        // cross-checked against the cofactor-expansion oracle
        let n = 2;
        let p = tri(n, "u^2 + x1*u + 1");
        let q = tri(n, "u + x2");
        let m = sylvester_matrix(&p, &q, 2).unwrap();
        let oracle = cofactor_det(&m);
        let r = resultant(&p, &q, 2, BOUND).unwrap();
        assert_eq!(r, oracle);
        let expect = tri(n, "x2^2 + -1*x1*x2 + 1");
        assert!(r == expect || r == expect.neg(), "got {r:?}");
    }

    #[test]
    fn bareiss_matches_cofactor_on_random_systems() {
        // deterministic pseudo-random small polys in (x1, u)
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..12 {
            let mut p = MultiPoly::zero(2);
            let mut q = MultiPoly::zero(2);
            for du in 0..=2u32 {
                for dx in 0..=1u32 {
                    let c1 = (next() % 7) as i64 - 3;
                    let c2 = (next() % 7) as i64 - 3;
                    p.add_term(
                        vec![dx, du],
                        crate::polycore::gaussian::GaussianRational::from_int(c1),
                    );
                    q.add_term(
                        vec![dx, du],
                        crate::polycore::gaussian::GaussianRational::from_int(c2),
                    );
                }
            }
            if p.degree_in(1) == 0 || q.degree_in(1) == 0 {
                continue;
            }
            let m = sylvester_matrix(&p, &q, 1).unwrap();
            let oracle = cofactor_det(&m);
            let fast = bareiss_det(m, BOUND).unwrap();
            assert_eq!(make_primitive(&fast), make_primitive(&oracle));
            assert_eq!(fast, oracle);
        }
    }

    #[test]
    fn degree_zero_rejected() {
        let p = tri(1, "x1");
        let q = tri(1, "u + 1");
        assert!(matches!(
            resultant(&p, &q, 1, BOUND),
            Err(Error::ResultantDegreeZero { .. })
        ));
    }

    #[test]
    fn shared_root_makes_zero_resultant() {
        // p = (u - x1) * (u + 1), q = (u - x1) * (u + 2): common factor -> res = 0
        let n = 1;
        let f = tri(n, "u + -1*x1");
        let p = f.mul(&tri(n, "u + 1"));
        let q = f.mul(&tri(n, "u + 2"));
        let r = resultant(&p, &q, 1, BOUND).unwrap();
        assert!(r.is_zero());
    }
}
