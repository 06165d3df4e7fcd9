//! Varieties V in C^n x (C*)^n and numerical certification of the main
//! hypotheses: dim V = n and dominance of both coordinate projections.
//!
//! Dominance is certified by tangent-space rank at randomly sampled smooth
//! points, never symbolically; every report carries the precision and
//! tolerance that scope the certificate.

use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::generic::snf::{rational_rank, IntMatrix};
use crate::linalg::{kernel_basis, min_norm_solve, numerical_rank, singular_values, CMat};
use crate::polycore::mpc::{real_cmp, real_max, MPComplex, Real};
use crate::polycore::poly::{Monomial, MultiPoly};

/// A generator with approximate (non-Q(i)) coefficients, usable only in
/// numeric paths. `radius` records the coefficient enclosure stated in the
/// input file.
#[derive(Clone, Debug)]
pub struct ApproxPoly {
    pub num_vars: usize,
    pub terms: Vec<(Monomial, MPComplex)>,
    pub radius: Real,
}

impl ApproxPoly {
    pub fn eval(&self, point: &[MPComplex]) -> Result<MPComplex> {
        if point.len() != self.num_vars {
            return Err(Error::ArityMismatch {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        let p = point.iter().map(|z| z.p()).max().unwrap_or(64);
        let mut acc = MPComplex::zero(p);
        for (m, c) in &self.terms {
            let mut t = c.with_precision(p);
            for (v, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&point[v]);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    pub fn partial(&self, var: usize) -> ApproxPoly {
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            if m[var] == 0 {
                continue;
            }
            let mut e = m.clone();
            let k = e[var];
            e[var] -= 1;
            terms.push((e, c.mul(&MPComplex::from_i64(k as i64, 0, c.p()))));
        }
        ApproxPoly {
            num_vars: self.num_vars,
            terms,
            radius: self.radius.clone(),
        }
    }
}

/// V given by exact generators over Q(i) (plus optional approximate ones) in
/// the 2n variables (x_1..x_n, y_1..y_n).
#[derive(Clone, Debug)]
pub struct ExpVariety {
    pub n: usize,
    pub generators: Vec<MultiPoly>,
    pub approx_generators: Vec<ApproxPoly>,
    pub coefficient_field_note: String,
}

impl ExpVariety {
    pub fn new(
        n: usize,
        generators: Vec<MultiPoly>,
        approx_generators: Vec<ApproxPoly>,
        coefficient_field_note: String,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InputParse("n must be positive".into()));
        }
        if generators.is_empty() && approx_generators.is_empty() {
            return Err(Error::InputParse("generator list is empty".into()));
        }
        for g in &generators {
            if g.num_vars != 2 * n {
                return Err(Error::ArityMismatch {
                    expected: 2 * n,
                    got: g.num_vars,
                });
            }
        }
        for g in &approx_generators {
            if g.num_vars != 2 * n {
                return Err(Error::ArityMismatch {
                    expected: 2 * n,
                    got: g.num_vars,
                });
            }
        }
        Ok(ExpVariety {
            n,
            generators,
            approx_generators,
            coefficient_field_note,
        })
    }

    pub fn from_generators(n: usize, generators: Vec<MultiPoly>) -> Result<Self> {
        Self::new(n, generators, Vec::new(), "Q(i)".to_string())
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len() + self.approx_generators.len()
    }

    pub fn eval_generators(&self, point: &[MPComplex]) -> Result<Vec<MPComplex>> {
        let mut out = Vec::with_capacity(self.num_generators());
        for g in &self.generators {
            out.push(g.eval(point)?);
        }
        for g in &self.approx_generators {
            out.push(g.eval(point)?);
        }
        Ok(out)
    }

    /// Max generator residual |g_j(point)|.
    pub fn max_residual(&self, point: &[MPComplex]) -> Result<Real> {
        let p = point.iter().map(|z| z.p()).max().unwrap_or(64);
        let mut m = Real::from_u8(0, p);
        for v in self.eval_generators(point)? {
            m = real_max(m, v.abs());
        }
        Ok(m)
    }

    /// Jacobian of all generators at `point` (rows: generators, cols: 2n).
    pub fn jacobian(&self, point: &[MPComplex], p: usize) -> Result<CMat> {
        let k = self.num_generators();
        let mut j = CMat::zero(k, 2 * self.n, p);
        for (r, g) in self.generators.iter().enumerate() {
            for c in 0..2 * self.n {
                *j.at_mut(r, c) = g.partial(c)?.eval(point)?;
            }
        }
        for (ra, g) in self.approx_generators.iter().enumerate() {
            let r = self.generators.len() + ra;
            for c in 0..2 * self.n {
                *j.at_mut(r, c) = g.partial(c).eval(point)?;
            }
        }
        Ok(j)
    }
}

/// A point certified against the generators, y-part off the coordinate
/// hyperplanes.
#[derive(Clone, Debug)]
pub struct SamplePoint {
    pub coords: Vec<MPComplex>,
    pub max_residual: Real,
}

impl SamplePoint {
    pub fn x_part(&self, n: usize) -> &[MPComplex] {
        &self.coords[..n]
    }

    pub fn y_part(&self, n: usize) -> &[MPComplex] {
        &self.coords[n..]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    Pi1,
    Pi2,
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HypothesisReport {
    pub dim_estimate: i64,
    pub pi1_dominant: bool,
    pub pi2_dominant: bool,
    pub samples_used: usize,
    pub precision_bits: usize,
    pub tolerance_exp: i64,
    pub rng_seed: u64,
}

fn mix_seed(base: u64, sample: u64, retry: u64) -> u64 {
    base ^ sample.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ retry.wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

fn random_start(v: &ExpVariety, rng: &mut ChaCha12Rng, p: usize) -> Vec<MPComplex> {
    let n = v.n;
    let mut coords = Vec::with_capacity(2 * n);
    for idx in 0..2 * n {
        let mut z = MPComplex::from_f64(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0, p);
        if idx >= n {
            // keep y starts away from the coordinate hyperplanes
            for _ in 0..20 {
                let (re, im) = z.to_f64();
                if re * re + im * im >= 0.25 {
                    break;
                }
                z = MPComplex::from_f64(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0, p);
            }
        }
        coords.push(z);
    }
    coords
}

fn sup_norm(values: &[MPComplex]) -> Real {
    let p = values.iter().map(|z| z.p()).max().unwrap_or(64);
    values
        .iter()
        .map(|z| z.abs())
        .fold(Real::from_u8(0, p), real_max)
}

/// Gauss–Newton with minimum-norm steps (SVD pseudoinverse) and step
/// halving; converges to a nearby point of the variety from a random start.
fn newton_to_variety(
    v: &ExpVariety,
    mut z: Vec<MPComplex>,
    cfg: &RunConfig,
) -> Result<Vec<MPComplex>> {
    let p = cfg.precision_bits;
    let tol = cfg.tol();
    let thr = cfg.rank_threshold();
    let mut f = v.eval_generators(&z)?;
    let mut fnorm = sup_norm(&f);
    for _ in 0..cfg.max_iter {
        if real_cmp(&fnorm, &tol) != Ordering::Greater {
            return Ok(z);
        }
        let jac = v.jacobian(&z, p)?;
        let neg_f: Vec<MPComplex> = f.iter().map(|w| w.neg()).collect();
        let step = min_norm_solve(&jac, &neg_f, &thr, p);
        let mut lambda_shift = 0i64;
        let mut accepted = false;
        while lambda_shift <= 60 {
            let trial: Vec<MPComplex> = z
                .iter()
                .zip(&step)
                .map(|(zi, si)| {
                    let scaled = si.mul_real(&crate::polycore::mpc::pow2(-lambda_shift, p));
                    zi.add(&scaled)
                })
                .collect();
            let tf = v.eval_generators(&trial)?;
            let tn = sup_norm(&tf);
            if real_cmp(&tn, &fnorm) == Ordering::Less {
                z = trial;
                f = tf;
                fnorm = tn;
                accepted = true;
                break;
            }
            lambda_shift += 1;
        }
        if !accepted {
            return Err(Error::SampleNoConvergence {
                retries: cfg.sample_retries,
            });
        }
    }
    if real_cmp(&fnorm, &tol) != Ordering::Greater {
        Ok(z)
    } else {
        Err(Error::SampleNoConvergence {
            retries: cfg.sample_retries,
        })
    }
}

/// Samples a point on V with residual at most 2^(-precision/2); retries with
/// fresh random starts up to the configured budget. Failure modes distinguish
/// non-convergence from samples pinned to a coordinate hyperplane.
pub fn sample_point(v: &ExpVariety, cfg: &RunConfig, sample_index: u64) -> Result<SamplePoint> {
    let p = cfg.precision_bits;
    let y_zero = cfg.rank_threshold();
    let mut converged_on_hyperplane = false;
    let mut converged_any = false;
    for retry in 0..cfg.sample_retries.max(1) {
        let mut rng =
            ChaCha12Rng::seed_from_u64(mix_seed(cfg.rng_seed, sample_index, retry as u64));
        let start = random_start(v, &mut rng, p);
        let Ok(coords) = newton_to_variety(v, start, cfg) else {
            continue;
        };
        converged_any = true;
        let y_hit = coords[v.n..]
            .iter()
            .any(|y| real_cmp(&y.abs(), &y_zero) != Ordering::Greater);
        if y_hit {
            converged_on_hyperplane = true;
            continue;
        }
        let max_residual = v.max_residual(&coords)?;
        return Ok(SamplePoint {
            coords,
            max_residual,
        });
    }
    if converged_any && converged_on_hyperplane {
        Err(Error::SamplesOnCoordinateHyperplane)
    } else {
        Err(Error::SampleNoConvergence {
            retries: cfg.sample_retries,
        })
    }
}

/// Per-sample analysis shared by the hypothesis checks.
struct SampleAnalysis {
    dim: usize,
    tangent_dim: usize,
    pi1_full: bool,
    pi2_full: bool,
    tangent: CMat,
    point: SamplePoint,
}

fn analyze_sample(v: &ExpVariety, cfg: &RunConfig, sample_index: u64) -> Result<SampleAnalysis> {
    let p = cfg.precision_bits;
    let thr = cfg.rank_threshold();
    let pt = sample_point(v, cfg, sample_index)?;
    let jac = v.jacobian(&pt.coords, p)?;
    let svals = singular_values(&jac, p);
    let rank = numerical_rank(&svals, &thr);
    let dim = 2 * v.n - rank;
    let tangent = kernel_basis(&jac, &thr, p);
    let tangent_dim = tangent.cols;
    let proj_rank = |rows: std::ops::Range<usize>| -> usize {
        let m = CMat::from_fn(v.n, tangent.cols, p, |i, j| {
            tangent.at(rows.start + i, j).clone()
        });
        numerical_rank(&singular_values(&m, p), &thr)
    };
    let pi1_full = proj_rank(0..v.n) == v.n;
    let pi2_full = proj_rank(v.n..2 * v.n) == v.n;
    Ok(SampleAnalysis {
        dim,
        tangent_dim,
        pi1_full,
        pi2_full,
        tangent,
        point: pt,
    })
}

fn collect_samples(v: &ExpVariety, cfg: &RunConfig) -> Result<Vec<SampleAnalysis>> {
    let mut out = Vec::new();
    let mut last_err = None;
    for s in 0..cfg.samples {
        match analyze_sample(v, cfg, s as u64) {
            Ok(a) => out.push(a),
            Err(e) => last_err = Some(e),
        }
    }
    if out.is_empty() {
        return Err(last_err.unwrap_or(Error::SampleNoConvergence {
            retries: cfg.sample_retries,
        }));
    }
    Ok(out)
}

fn majority<T: Ord + Clone + std::fmt::Debug>(votes: &[T]) -> Result<T> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    for v in votes {
        *counts.entry(v.clone()).or_insert(0) += 1;
    }
    let (best, cnt) = counts
        .iter()
        .max_by_key(|(_, &c)| c)
        .map(|(k, &c)| (k.clone(), c))
        .expect("nonempty votes");
    if 2 * cnt > votes.len() {
        Ok(best)
    } else {
        Err(Error::RankUnstable {
            details: format!("votes {votes:?} have no strict majority"),
        })
    }
}

/// Estimates dim V as 2n minus the numerical Jacobian rank, majority-voted
/// across samples.
pub fn estimate_dimension(v: &ExpVariety, cfg: &RunConfig) -> Result<usize> {
    let samples = collect_samples(v, cfg)?;
    let votes: Vec<usize> = samples.iter().map(|a| a.dim).collect();
    majority(&votes)
}

/// True iff the chosen projection restricted to the numerical tangent space
/// has full rank n at a majority of sampled smooth points.
/// Requires the dimension hypothesis dim V = n.
pub fn check_dominant(v: &ExpVariety, which: Projection, cfg: &RunConfig) -> Result<bool> {
    let samples = collect_samples(v, cfg)?;
    let dim_votes: Vec<usize> = samples.iter().map(|a| a.dim).collect();
    let dim = majority(&dim_votes)?;
    if dim != v.n {
        return Err(Error::DimensionHypothesisFailed {
            got: dim as i64,
            expected: v.n as i64,
        });
    }
    let votes: Vec<bool> = samples
        .iter()
        .filter(|a| a.tangent_dim == v.n)
        .map(|a| match which {
            Projection::Pi1 => a.pi1_full,
            Projection::Pi2 => a.pi2_full,
        })
        .collect();
    if votes.is_empty() {
        return Err(Error::RankUnstable {
            details: "no smooth samples for the dominance vote".into(),
        });
    }
    majority(&votes)
}

/// Runs the full hypothesis battery with one shared sample set.
pub fn hypothesis_report(v: &ExpVariety, cfg: &RunConfig) -> Result<HypothesisReport> {
    let samples = collect_samples(v, cfg)?;
    let dim_votes: Vec<usize> = samples.iter().map(|a| a.dim).collect();
    let dim = majority(&dim_votes)?;
    let (pi1, pi2) = if dim == v.n {
        let smooth: Vec<&SampleAnalysis> =
            samples.iter().filter(|a| a.tangent_dim == v.n).collect();
        if smooth.is_empty() {
            (false, false)
        } else {
            let v1: Vec<bool> = smooth.iter().map(|a| a.pi1_full).collect();
            let v2: Vec<bool> = smooth.iter().map(|a| a.pi2_full).collect();
            (majority(&v1)?, majority(&v2)?)
        }
    } else {
        (false, false)
    };
    Ok(HypothesisReport {
        dim_estimate: dim as i64,
        pi1_dominant: pi1,
        pi2_dominant: pi2,
        samples_used: samples.len(),
        precision_bits: cfg.precision_bits,
        tolerance_exp: cfg.tol_exponent(),
        rng_seed: cfg.rng_seed,
    })
}

#[derive(Clone, Debug)]
pub struct RotundityCheck {
    pub matrix: IntMatrix,
    pub required_rank: usize,
    pub estimated_dim: usize,
    pub ok: bool,
}

/// Consistency check of dim(M . V) >= rank(M) for supplied integer matrices:
/// the pushforward differential of (x, y) -> (Mx, y^M) on the tangent space,
/// rank-estimated at samples. Requires certified pi_1 dominance upstream.
pub fn rotundity_spot_check(
    v: &ExpVariety,
    matrices: &[IntMatrix],
    cfg: &RunConfig,
) -> Result<Vec<RotundityCheck>> {
    let p = cfg.precision_bits;
    let thr = cfg.rank_threshold();
    let samples = collect_samples(v, cfg)?;
    let mut out = Vec::new();
    for m in matrices {
        let rows = m.len();
        let required = rational_rank(m);
        let mut votes: Vec<usize> = Vec::new();
        for a in &samples {
            let t = &a.tangent;
            let y = a.point.y_part(v.n);
            // pushforward: [[M * T_x], [sum_i M_ji T_y[i]/y_i]]
            let mut d = CMat::zero(2 * rows, t.cols, p);
            for (j, mrow) in m.iter().enumerate() {
                for col in 0..t.cols {
                    let mut top = MPComplex::zero(p);
                    let mut bot = MPComplex::zero(p);
                    for i in 0..v.n {
                        if mrow[i].is_zero() {
                            continue;
                        }
                        let c = crate::polycore::mpc::real_from_bigint(&mrow[i], p);
                        top = top.add(&t.at(i, col).mul_real(&c));
                        let frac = t.at(v.n + i, col).div(&y[i])?;
                        bot = bot.add(&frac.mul_real(&c));
                    }
                    *d.at_mut(j, col) = top;
                    *d.at_mut(rows + j, col) = bot;
                }
            }
            votes.push(numerical_rank(&singular_values(&d, p), &thr));
        }
        let estimated = majority(&votes)?;
        out.push(RotundityCheck {
            matrix: m.clone(),
            required_rank: required,
            estimated_dim: estimated,
            ok: estimated >= required,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::poly::{poly_from_text, VarSet};
    use num_bigint::BigInt;

    fn cfg() -> RunConfig {
        RunConfig::default()
    }

    fn variety(n: usize, gens: &[&str]) -> ExpVariety {
        let vars = VarSet::Variety { n };
        let polys = gens
            .iter()
            .map(|s| poly_from_text(s, vars).unwrap())
            .collect();
        ExpVariety::from_generators(n, polys).unwrap()
    }

    #[test]
    fn sample_identity_graph() {
        // V: y1 - x1 -> a point (a, a), a != 0
        let v = variety(1, &["y1 + -1*x1"]);
        let s = sample_point(&v, &cfg(), 0).unwrap();
        let d = s.coords[0].dist(&s.coords[1]);
        assert!(real_cmp(&d, &cfg().tol()) != Ordering::Greater);
        assert!(real_cmp(&s.max_residual, &cfg().tol()) != Ordering::Greater);
    }

    #[test]
    fn sample_constant_fiber() {
        // V: y1 - 2 -> points (t, 2)
        let v = variety(1, &["y1 + -2"]);
        let s = sample_point(&v, &cfg(), 3).unwrap();
        let two = MPComplex::from_i64(2, 0, cfg().precision_bits);
        let d = s.coords[1].dist(&two);
        assert!(real_cmp(&d, &cfg().tol()) != Ordering::Greater);
    }

    #[test]
    fn sample_swap_graph() {
        let v = variety(2, &["y1 + -1*x2", "y2 + -1*x1"]);
        let s = sample_point(&v, &cfg(), 1).unwrap();
        assert!(real_cmp(&s.coords[2].dist(&s.coords[1]), &cfg().tol()) != Ordering::Greater);
        assert!(real_cmp(&s.coords[3].dist(&s.coords[0]), &cfg().tol()) != Ordering::Greater);
    }

    #[test]
    fn dimension_of_graphs() {
        assert_eq!(estimate_dimension(&variety(1, &["y1 + -1*x1"]), &cfg()).unwrap(), 1);
        assert_eq!(
            estimate_dimension(&variety(2, &["y1 + -1*x2", "y2 + -1*x1"]), &cfg()).unwrap(),
            2
        );
    }

    #[test]
    fn dimension_of_cut_down_variety() {
        // {y1 - x1, x1 - x2, y2 - 1} in n=2 has dimension 1
        let v = variety(2, &["y1 + -1*x1", "x1 + -1*x2", "y2 + -1"]);
        assert_eq!(estimate_dimension(&v, &cfg()).unwrap(), 1);
    }

    #[test]
    fn dominance_of_identity_graph() {
        let v = variety(1, &["y1 + -1*x1"]);
        assert!(check_dominant(&v, Projection::Pi1, &cfg()).unwrap());
        assert!(check_dominant(&v, Projection::Pi2, &cfg()).unwrap());
    }

    #[test]
    fn constant_variety_fails_pi2() {
        let v = variety(1, &["y1 + -2"]);
        assert!(check_dominant(&v, Projection::Pi1, &cfg()).unwrap());
        assert!(!check_dominant(&v, Projection::Pi2, &cfg()).unwrap());
    }

    #[test]
    fn swap_graph_dominant_both() {
        let v = variety(2, &["y1 + -1*x2", "y2 + -1*x1"]);
        let rep = hypothesis_report(&v, &cfg()).unwrap();
        assert_eq!(rep.dim_estimate, 2);
        assert!(rep.pi1_dominant && rep.pi2_dominant);
    }

    #[test]
    fn hypothesis_report_deterministic() {
        let v = variety(2, &["y1 + -1*x2", "y2 + -1*x1"]);
        let a = hypothesis_report(&v, &cfg()).unwrap();
        let b = hypothesis_report(&v, &cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn product_dimension_adds() {
        // V' = {y1 - x1} (n=1), V'' = {y1 - 2} (n=1); product in n=2
        let gp = poly_from_text("y1 + -1*x1", VarSet::Variety { n: 1 }).unwrap();
        let gq = poly_from_text("y1 + -2", VarSet::Variety { n: 1 }).unwrap();
        let g1 = gp.embed_vars(&[0, 2], 4);
        let g2 = gq.embed_vars(&[1, 3], 4);
        let v = ExpVariety::from_generators(2, vec![g1, g2]).unwrap();
        assert_eq!(estimate_dimension(&v, &cfg()).unwrap(), 2);
    }

    #[test]
    fn rotundity_identity_graph() {
        let v = variety(2, &["y1 + -1*x2", "y2 + -1*x1"]);
        let id: IntMatrix = vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        let rank1: IntMatrix = vec![vec![BigInt::from(1), BigInt::from(1)]];
        let checks = rotundity_spot_check(&v, &[id, rank1], &cfg()).unwrap();
        assert!(checks.iter().all(|c| c.ok), "{checks:?}");
        assert_eq!(checks[0].estimated_dim, 2);
        assert!(checks[1].estimated_dim >= 1);
    }

    #[test]
    fn residual_recheck_matches_stored() {
        let v = variety(2, &["y1 + -1*x2", "y2 + -1*x1"]);
        let s = sample_point(&v, &cfg(), 0).unwrap();
        let again = v.max_residual(&s.coords).unwrap();
        assert_eq!(real_cmp(&again, &s.max_residual), Ordering::Equal);
    }
}
