//! Dense complex linear algebra at working precision: LU solves for Newton
//! steps, one-sided Jacobi SVD for numerical ranks, kernels, and minimum-norm
//! least squares.

use astro_float::RoundingMode;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::polycore::mpc::{pow2, real_cmp, MPComplex, Real};

const RM: RoundingMode = RoundingMode::ToEven;

/// Row-major complex matrix.
#[derive(Clone, Debug)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<MPComplex>,
}

impl CMat {
    pub fn zero(rows: usize, cols: usize, p: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![MPComplex::zero(p); rows * cols],
        }
    }

    pub fn identity(n: usize, p: usize) -> Self {
        let mut m = Self::zero(n, n, p);
        for k in 0..n {
            *m.at_mut(k, k) = MPComplex::one(p);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, p: usize, mut f: impl FnMut(usize, usize) -> MPComplex) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        let _ = p;
        CMat { rows, cols, data }
    }

    pub fn at(&self, i: usize, j: usize) -> &MPComplex {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut MPComplex {
        &mut self.data[i * self.cols + j]
    }

    pub fn col(&self, j: usize) -> Vec<MPComplex> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    /// A * v for a column vector v.
    pub fn apply(&self, v: &[MPComplex]) -> Vec<MPComplex> {
        assert_eq!(v.len(), self.cols);
        let p = self.data.first().map(|z| z.p()).unwrap_or(64);
        (0..self.rows)
            .map(|i| {
                let mut acc = MPComplex::zero(p);
                for j in 0..self.cols {
                    acc = acc.add(&self.at(i, j).mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows);
        let p = self.data.first().map(|z| z.p()).unwrap_or(64);
        let mut out = CMat::zero(self.rows, rhs.cols, p);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let t = a.mul(rhs.at(k, j));
                    *out.at_mut(i, j) = out.at(i, j).add(&t);
                }
            }
        }
        out
    }
}

/// Solves A x = b by LU with partial pivoting on magnitude.
pub fn lu_solve(a: &CMat, b: &[MPComplex], p: usize) -> Result<Vec<MPComplex>> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(b.len(), a.rows);
    let n = a.rows;
    let mut m = a.clone();
    let mut rhs: Vec<MPComplex> = b.to_vec();
    let tiny = pow2(-(p as i64) + 8, p);
    for k in 0..n {
        // pivot: largest magnitude in column k at or below row k
        let mut best = k;
        let mut best_mag = m.at(k, k).norm_sqr();
        for r in k + 1..n {
            let mag = m.at(r, k).norm_sqr();
            if real_cmp(&mag, &best_mag) == Ordering::Greater {
                best = r;
                best_mag = mag;
            }
        }
        if real_cmp(&best_mag.sqrt(p, RM), &tiny) != Ordering::Greater {
            return Err(Error::SingularMatrix);
        }
        if best != k {
            for j in 0..n {
                let tmp = m.at(k, j).clone();
                *m.at_mut(k, j) = m.at(best, j).clone();
                *m.at_mut(best, j) = tmp;
            }
            rhs.swap(k, best);
        }
        let pivot = m.at(k, k).clone();
        for r in k + 1..n {
            let factor = m.at(r, k).div(&pivot)?;
            if factor.is_zero() {
                continue;
            }
            for j in k..n {
                let t = factor.mul(m.at(k, j));
                *m.at_mut(r, j) = m.at(r, j).sub(&t);
            }
            let t = factor.mul(&rhs[k]);
            rhs[r] = rhs[r].sub(&t);
        }
    }
    // back substitution
    let mut x = vec![MPComplex::zero(p); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for j in k + 1..n {
            acc = acc.sub(&m.at(k, j).mul(&x[j]));
        }
        x[k] = acc.div(m.at(k, k))?;
    }
    Ok(x)
}

/// Singular value decomposition by one-sided Jacobi: A = U diag(s) V^H with
/// `s` descending. `u` columns are defined only where `s[j]` is well above
/// zero; callers threshold through `numerical_rank`.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<Real>,
    pub v: CMat,
}

pub fn svd(a: &CMat, p: usize) -> Svd {
    let mut w = a.clone();
    let n = a.cols;
    let mut v = CMat::identity(n, p);
    let eps = pow2(-(p as i64) + 8, p);
    let max_sweeps = 60;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                // 2x2 Gram block of columns i, j
                let mut alpha = Real::from_u8(0, p);
                let mut beta = Real::from_u8(0, p);
                let mut gamma = MPComplex::zero(p);
                for r in 0..w.rows {
                    let ai = w.at(r, i);
                    let aj = w.at(r, j);
                    alpha = alpha.add(&ai.norm_sqr(), p, RM);
                    beta = beta.add(&aj.norm_sqr(), p, RM);
                    gamma = gamma.add(&ai.conj().mul(aj));
                }
                let g = gamma.abs();
                // convergence test: |gamma|^2 <= eps^2 * alpha * beta
                let lhs = g.mul(&g, p, RM);
                let rhs = eps
                    .mul(&eps, p, RM)
                    .mul(&alpha, p, RM)
                    .mul(&beta, p, RM);
                if real_cmp(&lhs, &rhs) != Ordering::Greater || g.is_zero() {
                    continue;
                }
                rotated = true;
                // phase: e^{-i phi} = conj(gamma)/|gamma|
                let phase = gamma.conj().mul_real(&g.reciprocal(p, RM));
                // real Jacobi angle for [[alpha, g], [g, beta]]
                let two = Real::from_u8(2, p);
                let tau = beta.sub(&alpha, p, RM).div(&two.mul(&g, p, RM), p, RM);
                let t = {
                    let one = Real::from_u8(1, p);
                    let abs_tau = tau.abs();
                    let denom = abs_tau.add(
                        &one.add(&tau.mul(&tau, p, RM), p, RM).sqrt(p, RM),
                        p,
                        RM,
                    );
                    let mag = one.div(&denom, p, RM);
                    if tau.is_negative() {
                        mag.neg()
                    } else {
                        mag
                    }
                };
                let one = Real::from_u8(1, p);
                let c = one
                    .add(&t.mul(&t, p, RM), p, RM)
                    .sqrt(p, RM)
                    .reciprocal(p, RM);
                let s = t.mul(&c, p, RM);
                // column update with J = diag(1, phase) * [[c, s], [-s, c]]:
                // a_i' = c*a_i - s*phase*a_j ; a_j' = s*a_i + c*phase*a_j
                for r in 0..w.rows {
                    let ai = w.at(r, i).clone();
                    let aj_ph = w.at(r, j).mul(&phase);
                    *w.at_mut(r, i) = ai.mul_real(&c).sub(&aj_ph.mul_real(&s));
                    *w.at_mut(r, j) = ai.mul_real(&s).add(&aj_ph.mul_real(&c));
                }
                for r in 0..n {
                    let vi = v.at(r, i).clone();
                    let vj_ph = v.at(r, j).mul(&phase);
                    *v.at_mut(r, i) = vi.mul_real(&c).sub(&vj_ph.mul_real(&s));
                    *v.at_mut(r, j) = vi.mul_real(&s).add(&vj_ph.mul_real(&c));
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // singular values = column norms; sort descending, carrying V (and U)
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<Real> = (0..n)
        .map(|j| {
            let mut acc = Real::from_u8(0, p);
            for r in 0..w.rows {
                acc = acc.add(&w.at(r, j).norm_sqr(), p, RM);
            }
            acc.sqrt(p, RM)
        })
        .collect();
    order.sort_by(|&x, &y| real_cmp(&norms[y], &norms[x]));
    let s: Vec<Real> = order.iter().map(|&j| norms[j].clone()).collect();
    let mut u = CMat::zero(a.rows, n, p);
    let mut v_sorted = CMat::zero(n, n, p);
    for (new_j, &old_j) in order.iter().enumerate() {
        let nz = !s[new_j].is_zero();
        for r in 0..a.rows {
            *u.at_mut(r, new_j) = if nz {
                w.at(r, old_j).mul_real(&s[new_j].reciprocal(p, RM))
            } else {
                MPComplex::zero(p)
            };
        }
        for r in 0..n {
            *v_sorted.at_mut(r, new_j) = v.at(r, old_j).clone();
        }
    }
    Svd { u, s, v: v_sorted }
}

pub fn singular_values(a: &CMat, p: usize) -> Vec<Real> {
    svd(a, p).s
}

/// Count of singular values at or above `threshold`.
pub fn numerical_rank(s: &[Real], threshold: &Real) -> usize {
    s.iter()
        .filter(|v| real_cmp(v, threshold) != Ordering::Less)
        .count()
}

/// Columns of V spanning the numerical kernel (singular values below
/// `threshold`).
pub fn kernel_basis(a: &CMat, threshold: &Real, p: usize) -> CMat {
    let d = svd(a, p);
    let rank = numerical_rank(&d.s, threshold);
    let n = a.cols;
    let mut k = CMat::zero(n, n - rank, p);
    for (out_j, j) in (rank..n).enumerate() {
        for r in 0..n {
            *k.at_mut(r, out_j) = d.v.at(r, j).clone();
        }
    }
    k
}

/// Minimum-norm least-squares solve via the SVD pseudoinverse with rank
/// thresholding: x = V S^+ U^H b.
pub fn min_norm_solve(a: &CMat, b: &[MPComplex], threshold: &Real, p: usize) -> Vec<MPComplex> {
    let d = svd(a, p);
    let rank = numerical_rank(&d.s, threshold);
    let mut x = vec![MPComplex::zero(p); a.cols];
    for j in 0..rank {
        // coefficient = (u_j^H b) / s_j
        let mut dot = MPComplex::zero(p);
        for r in 0..a.rows {
            dot = dot.add(&d.u.at(r, j).conj().mul(&b[r]));
        }
        let coeff = dot.mul_real(&d.s[j].reciprocal(p, RM));
        for r in 0..a.cols {
            x[r] = x[r].add(&d.v.at(r, j).mul(&coeff));
        }
    }
    x
}
