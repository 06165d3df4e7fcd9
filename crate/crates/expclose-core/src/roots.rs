//! All roots of a univariate complex polynomial by Durand–Kerner iteration
//! with deterministic starting points.

use astro_float::RoundingMode;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::polycore::mpc::{pow2, real_cmp, real_max, MPComplex, Real};

const RM: RoundingMode = RoundingMode::ToEven;

/// Evaluates a polynomial given low-to-high coefficients (Horner).
pub fn horner(coeffs: &[MPComplex], z: &MPComplex) -> MPComplex {
    let p = z.p();
    let mut acc = MPComplex::zero(p);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add(c);
    }
    acc
}

/// All `d` roots of `c_0 + c_1 u + ... + c_d u^d` (with multiplicity,
/// clustered). The leading coefficient must be nonzero; callers guard
/// numerically-vanishing leads separately.
pub fn all_roots(coeffs: &[MPComplex], p: usize, max_iter: usize) -> Result<Vec<MPComplex>> {
    assert!(coeffs.len() >= 2, "degree must be at least 1");
    let lead = coeffs.last().expect("nonempty");
    if lead.is_zero() {
        return Err(Error::SingularLeadingCoefficient);
    }
    let d = coeffs.len() - 1;
    // monicize
    let monic: Vec<MPComplex> = coeffs
        .iter()
        .map(|c| c.div(lead).expect("nonzero lead"))
        .collect();
    if d == 1 {
        return Ok(vec![monic[0].neg()]);
    }
    // Cauchy-style radius: 1 + max |c_k|
    let mut radius = Real::from_u8(1, p);
    for c in monic.iter().take(d) {
        radius = real_max(radius, c.abs());
    }
    radius = radius.add(&Real::from_u8(1, p), p, RM);
    // deterministic spread: radius * (0.4 + 0.9i)^(k+1)
    let seed = MPComplex::from_f64(0.4, 0.9, p);
    let mut w: Vec<MPComplex> = Vec::with_capacity(d);
    let mut acc = seed.clone();
    for _ in 0..d {
        w.push(acc.mul_real(&radius));
        acc = acc.mul(&seed);
    }
    let stop = pow2(-(p as i64) * 3 / 4, p);
    let loose_stop = pow2(-(p as i64) / 2, p);
    for iter in 0..max_iter {
        let mut max_step = Real::from_u8(0, p);
        for k in 0..d {
            let val = horner(&monic, &w[k]);
            let mut denom = MPComplex::one(p);
            for (l, wl) in w.iter().enumerate() {
                if l != k {
                    denom = denom.mul(&w[k].sub(wl));
                }
            }
            if denom.is_zero() {
                // coincident iterates: nudge deterministically
                w[k] = w[k].add(&MPComplex::from_f64(1e-3, 2e-3, p));
                max_step = real_max(max_step, Real::from_u8(1, p));
                continue;
            }
            let delta = val.div(&denom)?;
            w[k] = w[k].sub(&delta);
            max_step = real_max(max_step, delta.abs());
        }
        let scale = w
            .iter()
            .map(|z| z.abs())
            .fold(Real::from_u8(1, p), real_max);
        let tight = stop.mul(&scale, p, RM);
        if real_cmp(&max_step, &tight) != Ordering::Greater {
            return Ok(w);
        }
        // multiple roots stall around sqrt(eps); accept a looser stop late
        if iter > max_iter / 2 {
            let loose = loose_stop.mul(&scale, p, RM);
            if real_cmp(&max_step, &loose) != Ordering::Greater {
                return Ok(w);
            }
        }
    }
    Err(Error::RootsNoConvergence { max_iter })
}

/// Sorts roots by magnitude ascending, ties by principal argument ascending.
/// This is the branch enumeration order. Imaginary parts below the root-solve
/// noise floor are snapped to zero for the comparison so roots on the
/// negative real axis sort at arg = +pi, not -pi.
pub fn sort_roots(mut roots: Vec<MPComplex>) -> Vec<MPComplex> {
    let snapped_arg = |z: &MPComplex| -> Real {
        let p = z.p();
        let mag = z.abs();
        let floor = mag.mul(&pow2(-(p as i64) / 2, p), p, RM);
        if real_cmp(&z.im.abs(), &floor) != Ordering::Greater {
            MPComplex::new(z.re.clone(), Real::from_u8(0, p), p).arg()
        } else if real_cmp(&z.re.abs(), &floor) != Ordering::Greater {
            MPComplex::new(Real::from_u8(0, p), z.im.clone(), p).arg()
        } else {
            z.arg()
        }
    };
    roots.sort_by(|a, b| {
        let p = a.p().max(b.p());
        let ma = a.abs();
        let mb = b.abs();
        // magnitudes within the noise floor count as tied
        let gap = ma.sub(&mb, p, RM).abs();
        let floor = real_max(ma.clone(), mb.clone()).mul(&pow2(-(p as i64) / 2, p), p, RM);
        let tied = real_cmp(&gap, &floor) != Ordering::Greater;
        if tied {
            real_cmp(&snapped_arg(a), &snapped_arg(b))
        } else {
            real_cmp(&ma, &mb)
        }
    });
    roots
}

/// Index of the root nearest to `target`.
pub fn nearest_root(roots: &[MPComplex], target: &MPComplex) -> usize {
    let mut best = 0usize;
    let mut best_d = roots[0].dist(target);
    for (k, r) in roots.iter().enumerate().skip(1) {
        let d = r.dist(target);
        if real_cmp(&d, &best_d) == Ordering::Less {
            best = k;
            best_d = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 256;

    fn c(re: f64, im: f64) -> MPComplex {
        MPComplex::from_f64(re, im, P)
    }

    fn assert_root_set(coeffs: &[MPComplex], expected: &[(f64, f64)], tol: f64) {
        let roots = sort_roots(all_roots(coeffs, P, 500).unwrap());
        assert_eq!(roots.len(), expected.len());
        for (r, (ere, eim)) in roots.iter().zip(expected.iter()) {
            let (re, im) = r.to_f64();
            assert!(
                (re - ere).abs() < tol && (im - eim).abs() < tol,
                "root ({re}, {im}) vs expected ({ere}, {eim})"
            );
        }
    }

    #[test]
    fn quadratic_roots() {
        // u^2 - 1: roots -1, 1 (sorted by arg: tie on magnitude, -1 has arg pi > 0)
        let coeffs = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        assert_root_set(&coeffs, &[(1.0, 0.0), (-1.0, 0.0)], 1e-40);
    }

    #[test]
    fn sqrt_branches_of_2pi_i() {
        // u^2 - 2*pi*i: branch order puts arg -3pi/4 before pi/4
        let tp = MPComplex::two_pi_i_times(1, P);
        let coeffs = [tp.neg(), MPComplex::zero(P), MPComplex::one(P)];
        let roots = sort_roots(all_roots(&coeffs, P, 500).unwrap());
        let (r0re, r0im) = roots[0].to_f64();
        let (r1re, r1im) = roots[1].to_f64();
        let s = (std::f64::consts::PI).sqrt(); // sqrt(2pi)/sqrt(2) = sqrt(pi)
        assert!((r0re + s).abs() < 1e-12 && (r0im + s).abs() < 1e-12, "{r0re},{r0im}");
        assert!((r1re - s).abs() < 1e-12 && (r1im - s).abs() < 1e-12, "{r1re},{r1im}");
    }

    #[test]
    fn cubic_with_known_roots() {
        // (u-1)(u-2i)(u+3) = expand: roots 1, 2i, -3
        let one = c(1.0, 0.0);
        let r1 = c(1.0, 0.0);
        let r2 = c(0.0, 2.0);
        let r3 = c(-3.0, 0.0);
        // coefficients of (u - r1)(u - r2)(u - r3)
        let e1 = r1.add(&r2).add(&r3);
        let e2 = r1.mul(&r2).add(&r1.mul(&r3)).add(&r2.mul(&r3));
        let e3 = r1.mul(&r2).mul(&r3);
        let coeffs = [e3.neg(), e2, e1.neg(), one];
        assert_root_set(&coeffs, &[(1.0, 0.0), (0.0, 2.0), (-3.0, 0.0)], 1e-40);
    }

    #[test]
    fn nearest_tracking() {
        let roots = vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 5.0)];
        assert_eq!(nearest_root(&roots, &c(0.9, 0.2)), 0);
        assert_eq!(nearest_root(&roots, &c(0.4, 4.0)), 2);
    }

    #[test]
    fn double_root_clusters() {
        // (u - 2)^2: DK stalls at ~sqrt(eps); both iterates should sit near 2
        let coeffs = [c(4.0, 0.0), c(-4.0, 0.0), c(1.0, 0.0)];
        let roots = all_roots(&coeffs, P, 500).unwrap();
        for r in roots {
            let (re, im) = r.to_f64();
            assert!((re - 2.0).abs() < 1e-15 && im.abs() < 1e-15);
        }
    }
}
