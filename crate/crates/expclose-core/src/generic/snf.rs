//! Exact integer-matrix algorithms: Smith normal form with transform
//! tracking, rational rank by a second route, and row-lattice saturation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn int_matrix_from_i64(rows: &[&[i64]]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

/// Smith normal form: U * A * V = D with U, V unimodular and D diagonal with
/// d_1 | d_2 | ... Returns the invariant factors and `v_inv` (the inverse of
/// V), whose first `rank` rows form a basis of the saturation of the row
/// lattice of A.
pub struct Snf {
    pub invariant_factors: Vec<BigInt>,
    pub rank: usize,
    pub v_inv: IntMatrix,
}

pub fn smith_normal_form(a: &IntMatrix) -> Snf {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m = a.clone();
    // v_inv tracks inverse column operations as row operations on the left
    let mut v_inv = identity(cols);

    let col_swap = |m: &mut IntMatrix, vi: &mut IntMatrix, i: usize, j: usize| {
        for row in m.iter_mut() {
            row.swap(i, j);
        }
        vi.swap(i, j);
    };
    // col_j += q * col_i  =>  (V^-1) row_i -= q * row_j
    let col_add = |m: &mut IntMatrix, vi: &mut IntMatrix, i: usize, j: usize, q: &BigInt| {
        for row in m.iter_mut() {
            let t = &row[i] * q;
            row[j] += t;
        }
        for c in 0..vi[0].len() {
            let t = &vi[j][c] * q;
            vi[i][c] -= t;
        }
    };
    let col_neg = |m: &mut IntMatrix, vi: &mut IntMatrix, j: usize| {
        for row in m.iter_mut() {
            row[j] = -row[j].clone();
        }
        for c in 0..vi[0].len() {
            vi[j][c] = -vi[j][c].clone();
        }
    };

    let mut k = 0usize;
    while k < rows.min(cols) {
        // find a pivot: smallest nonzero |entry| in the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if !m[i][j].is_zero() {
                    let better = match &pivot {
                        None => true,
                        Some((pi, pj)) => m[i][j].abs() < m[*pi][*pj].abs(),
                    };
                    if better {
                        pivot = Some((i, j));
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        m.swap(k, pi);
        if pj != k {
            col_swap(&mut m, &mut v_inv, k, pj);
        }
        if m[k][k].is_negative() {
            col_neg(&mut m, &mut v_inv, k);
        }
        // clear row and column k by exact/euclidean reduction
        let mut dirty = true;
        while dirty {
            dirty = false;
            for i in k + 1..rows {
                if m[i][k].is_zero() {
                    continue;
                }
                let q = div_round(&m[i][k], &m[k][k]);
                for j in k..cols {
                    let t = &m[k][j] * &q;
                    m[i][j] -= t;
                }
                if !m[i][k].is_zero() {
                    // remainder became the smaller pivot
                    m.swap(k, i);
                    if m[k][k].is_negative() {
                        col_neg(&mut m, &mut v_inv, k);
                    }
                    dirty = true;
                }
            }
            for j in k + 1..cols {
                if m[k][j].is_zero() {
                    continue;
                }
                let q = div_round(&m[k][j], &m[k][k]);
                col_add(&mut m, &mut v_inv, k, j, &-q);
                if !m[k][j].is_zero() {
                    col_swap(&mut m, &mut v_inv, k, j);
                    if m[k][k].is_negative() {
                        col_neg(&mut m, &mut v_inv, k);
                    }
                    dirty = true;
                }
            }
        }
        // divisibility pass: every entry of the trailing block must be
        // divisible by the pivot
        let mut fixed = false;
        'scan: for i in k + 1..rows {
            for j in k + 1..cols {
                if !(&m[i][j] % &m[k][k]).is_zero() {
                    // fold row i into row k via column j
                    col_add(&mut m, &mut v_inv, j, k, &BigInt::one());
                    for c in k..cols {
                        let t = m[i][c].clone();
                        m[k][c] += t;
                    }
                    fixed = true;
                    break 'scan;
                }
            }
        }
        if fixed {
            continue; // redo elimination at the same k
        }
        k += 1;
    }

    let rank = (0..rows.min(cols)).take_while(|&t| !m[t][t].is_zero()).count();
    let invariant_factors = (0..rank).map(|t| m[t][t].abs()).collect();
    Snf {
        invariant_factors,
        rank,
        v_inv,
    }
}

/// Rounded integer division (nearest, ties toward zero-ish); any consistent
/// choice works for the reduction loop.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let (q, r) = a.div_rem(b);
    let two_r = r.abs() * BigInt::from(2);
    if two_r > b.abs() {
        if (r.is_negative()) == (b.is_negative()) {
            q + BigInt::one()
        } else {
            q - BigInt::one()
        }
    } else {
        q
    }
}

/// Rank over Q by exact fraction-free Gaussian elimination — the independent
/// second route for the dimension equality checks.
pub fn rational_rank(a: &IntMatrix) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .collect()
        })
        .collect();
    let mut rank = 0usize;
    let mut row = 0usize;
    for col in 0..cols {
        let pivot = (row..rows).find(|&r| !m[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        m.swap(row, pr);
        let pv = m[row][col].clone();
        for r in row + 1..rows {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pv;
            for c in col..cols {
                let t = &m[row][c] * &f;
                m[r][c] -= t;
            }
        }
        rank += 1;
        row += 1;
        if row == rows {
            break;
        }
    }
    rank
}

/// Basis of the saturation of the row lattice of `a`: the first `rank` rows
/// of V^-1 from the Smith decomposition. Rows are primitive and span the same
/// Q-rowspace as `a`.
pub fn saturate_rows(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    snf.v_inv[..snf.rank].to_vec()
}

/// Exact rational kernel basis of `a` (right null space), as rational row
/// vectors. Used for L_M comparisons.
pub fn rational_kernel(a: &IntMatrix) -> Vec<Vec<BigRational>> {
    let rows = a.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| BigRational::from_integer(v.clone()))
                .collect()
        })
        .collect();
    // reduced row echelon form
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..cols {
        let pivot = (row..rows).find(|&r| !m[r][col].is_zero());
        let Some(pr) = pivot else { continue };
        m.swap(row, pr);
        let pv = m[row][col].clone();
        for c in col..cols {
            m[row][c] = &m[row][c] / &pv;
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..cols {
                    let t = &m[row][c] * &f;
                    m[r][c] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    let mut kernel = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (prow, &pcol) in pivots.iter().enumerate() {
            v[pcol] = -m[prow][free].clone();
        }
        kernel.push(v);
    }
    kernel
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_known_invariants() {
        // [[2, 4], [0, 6]]: det 12, gcd 2 -> invariant factors 2, 6
        let a = int_matrix_from_i64(&[&[2, 4], &[0, 6]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.rank, 2);
        assert_eq!(
            snf.invariant_factors,
            vec![BigInt::from(2), BigInt::from(6)]
        );
    }

    #[test]
    fn snf_classic_example() {
        let a = int_matrix_from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let snf = smith_normal_form(&a);
        // known SNF: diag(2, 6, 12)
        assert_eq!(
            snf.invariant_factors,
            vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]
        );
        // second example: gcd of entries 2, gcd of 2x2 minors 4, |det| 624
        let b = int_matrix_from_i64(&[&[2, 4, 4], &[-6, 6, 12], &[10, 4, 16]]);
        let snf_b = smith_normal_form(&b);
        assert_eq!(
            snf_b.invariant_factors,
            vec![BigInt::from(2), BigInt::from(2), BigInt::from(156)]
        );
    }

    #[test]
    fn snf_rank_matches_rational_rank_randomized() {
        let mut state = 0xdeadbeefcafef00du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..200 {
            let n = (next() % 5 + 1) as usize;
            let m_rows = (next() % n as u64 + 1) as usize;
            let a: IntMatrix = (0..m_rows)
                .map(|_| {
                    (0..n)
                        .map(|_| BigInt::from((next() % 19) as i64 - 9))
                        .collect()
                })
                .collect();
            let snf = smith_normal_form(&a);
            assert_eq!(snf.rank, rational_rank(&a), "matrix {a:?}");
            // divisibility chain
            for w in snf.invariant_factors.windows(2) {
                assert!((&w[1] % &w[0]).is_zero(), "chain broken: {:?}", snf.invariant_factors);
            }
        }
    }

    #[test]
    fn saturation_spans_same_rowspace() {
        // rows (2, 4), (0, 6): saturation is full Z^2 (Q-rowspace is Q^2)
        let a = int_matrix_from_i64(&[&[2, 4], &[0, 6]]);
        let sat = saturate_rows(&a);
        assert_eq!(sat.len(), 2);
        let snf = smith_normal_form(&sat);
        assert_eq!(
            snf.invariant_factors,
            vec![BigInt::one(), BigInt::one()],
            "saturation must be unimodular on its span"
        );
        // single row (2, 4) saturates to (1, 2)
        let b = int_matrix_from_i64(&[&[2, 4]]);
        let sat_b = saturate_rows(&b);
        assert_eq!(sat_b.len(), 1);
        let g = sat_b[0][0].gcd(&sat_b[0][1]);
        assert!(g.is_one(), "row must be primitive: {sat_b:?}");
        // same Q-rowspace: (2,4) is a rational multiple of the saturated row
        let cross = &sat_b[0][0] * BigInt::from(4) - &sat_b[0][1] * BigInt::from(2);
        assert!(cross.is_zero());
    }

    #[test]
    fn kernel_is_annihilated() {
        let a = int_matrix_from_i64(&[&[1, 1, 0], &[0, 2, 2]]);
        let k = rational_kernel(&a);
        assert_eq!(k.len(), 1);
        for row in &a {
            let mut acc = BigRational::zero();
            for (c, v) in row.iter().enumerate() {
                acc += BigRational::from_integer(v.clone()) * &k[0][c];
            }
            assert!(acc.is_zero());
        }
    }
}
