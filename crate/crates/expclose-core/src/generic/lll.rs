//! Lenstra–Lenstra–Lovász basis reduction over the integers with exact
//! rational Gram–Schmidt bookkeeping. Exactness keeps relation detection
//! deterministic; reduction quality only affects completeness because all
//! candidates are re-verified by evaluation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Basis = Vec<Vec<BigInt>>;

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_qi(a: &[BigRational], b: &[BigInt]) -> BigRational {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * BigRational::from_integer(y.clone()))
        .sum()
}

fn dot_qq(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// In-place LLL reduction with Lovász parameter `delta` (as a rational).
/// Rows of `basis` are the lattice vectors.
pub fn lll_reduce(basis: &mut Basis, delta: &BigRational) {
    let n = basis.len();
    if n <= 1 {
        return;
    }
    let dim = basis[0].len();
    // Gram-Schmidt: b*_k and mu[k][j]
    let mut bstar: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); dim]; n];
    let mut bnorm: Vec<BigRational> = vec![BigRational::zero(); n];
    let mut mu: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];

    let recompute = |basis: &Basis,
                     bstar: &mut Vec<Vec<BigRational>>,
                     bnorm: &mut Vec<BigRational>,
                     mu: &mut Vec<Vec<BigRational>>| {
        for k in 0..n {
            let mut v: Vec<BigRational> = basis[k]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            for j in 0..k {
                let m = if bnorm[j].is_zero() {
                    BigRational::zero()
                } else {
                    dot_qi(&bstar[j], &basis[k]) / &bnorm[j]
                };
                mu[k][j] = m.clone();
                for c in 0..dim {
                    let t = &bstar[j][c] * &m;
                    v[c] -= t;
                }
            }
            bnorm[k] = dot_qq(&v, &v);
            bstar[k] = v;
        }
    };
    recompute(basis, &mut bstar, &mut bnorm, &mut mu);

    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut k = 1usize;
    let mut guard = 0usize;
    let max_steps = 10_000 + 200 * n * n;
    while k < n && guard < max_steps {
        guard += 1;
        // size reduction of b_k against b_j, j < k
        for j in (0..k).rev() {
            if mu[k][j].abs() > half {
                let q = round_rational(&mu[k][j]);
                if !q.is_zero() {
                    for c in 0..dim {
                        let t = &basis[j][c] * &q;
                        basis[k][c] -= t;
                    }
                }
            }
        }
        recompute(basis, &mut bstar, &mut bnorm, &mut mu);
        // Lovász condition: ||b*_k||^2 >= (delta - mu_k,k-1^2) ||b*_{k-1}||^2
        let lhs = bnorm[k].clone();
        let rhs = (delta - &(&mu[k][k - 1] * &mu[k][k - 1])) * &bnorm[k - 1];
        if lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            recompute(basis, &mut bstar, &mut bnorm, &mut mu);
            k = k.max(2) - 1;
        }
    }
}

fn round_rational(x: &BigRational) -> BigInt {
    use num_integer::Integer;
    let two = BigInt::from(2);
    let num = x.numer() * &two + x.denom(); // (2num + den) / (2den) floored
    let den = x.denom() * &two;
    num.div_floor(&den)
}

/// Squared Euclidean norm of an integer vector.
pub fn norm_sqr(v: &[BigInt]) -> BigInt {
    dot(v, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn vec_i64(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn rounding_behaviour() {
        assert_eq!(round_rational(&rat(1, 2)), BigInt::from(1));
        assert_eq!(round_rational(&rat(-1, 2)), BigInt::from(0));
        assert_eq!(round_rational(&rat(7, 3)), BigInt::from(2));
        assert_eq!(round_rational(&rat(-7, 3)), BigInt::from(-2));
    }

    #[test]
    fn reduces_classic_lattice() {
        // rows (1, 1, 1), (-1, 0, 2), (3, 5, 6): a standard small example
        let mut b = vec![vec_i64(&[1, 1, 1]), vec_i64(&[-1, 0, 2]), vec_i64(&[3, 5, 6])];
        lll_reduce(&mut b, &rat(99, 100));
        // first vector should be short (norm^2 <= 2 here: (0,1,0) achievable)
        let n0 = norm_sqr(&b[0]);
        assert!(n0 <= BigInt::from(2), "first vector too long: {b:?}");
    }

    #[test]
    fn finds_planted_short_vector() {
        // plant r = (1, 1, -1) against scaled data cols: rows [e_i | C*v_i]
        // with v_1 + v_2 - v_3 = 0
        let c: i64 = 1 << 40;
        let v1 = 314159265i64;
        let v2 = 271828182i64;
        let v3 = v1 + v2;
        let mut b = vec![
            vec_i64(&[1, 0, 0, c * 0 + v1]),
            vec_i64(&[0, 1, 0, v2]),
            vec_i64(&[0, 0, 1, v3]),
        ];
        // scale the data column
        for row in b.iter_mut() {
            row[3] *= c;
        }
        lll_reduce(&mut b, &rat(99, 100));
        let found = b.iter().any(|row| {
            (row[0] == BigInt::from(1)
                && row[1] == BigInt::from(1)
                && row[2] == BigInt::from(-1))
                || (row[0] == BigInt::from(-1)
                    && row[1] == BigInt::from(-1)
                    && row[2] == BigInt::from(1))
        });
        assert!(found, "planted relation not surfaced: {b:?}");
    }
}
