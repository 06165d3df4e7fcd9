//! Solves systems e^{z_i} = f_i(z) with polynomial or algebraic right-hand
//! sides: damped fixed-point iteration seeded at 2 pi i k, Newton polish on
//! G_i(z) = z_i - log f_i(z) - 2 pi i k_i, and residual certificates.
//!
//! The principal logarithm is fixed throughout; branch multiplicity is
//! carried entirely by the seed. Non-convergence is a per-seed failure,
//! never a refutation.

use astro_float::RoundingMode;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::linalg::{lu_solve, CMat};
use crate::polycore::mpc::{pow2, real_cmp, real_max, MPComplex, Real};
use crate::polycore::poly::MultiPoly;
use crate::roots::{all_roots, nearest_root, sort_roots};
use crate::triangularize::{triangularize, TriangularSystem};
use crate::variety::{hypothesis_report, sample_point, ExpVariety};

const RM: RoundingMode = RoundingMode::ToEven;

/// Starting lattice point 2 pi i k with per-coordinate branch choices for
/// algebraic right-hand sides. Every k_i is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seed {
    pub k: Vec<i64>,
    pub branch_choice: Vec<usize>,
}

impl Seed {
    pub fn new(k: Vec<i64>, branch_choice: Vec<usize>) -> Result<Self> {
        if let Some(idx) = k.iter().position(|&v| v == 0) {
            return Err(Error::SeedZeroComponent { index: idx });
        }
        let branch_choice = if branch_choice.is_empty() {
            vec![0; k.len()]
        } else {
            branch_choice
        };
        if branch_choice.len() != k.len() {
            return Err(Error::InvalidConfig(
                "branch choice length must match seed length".into(),
            ));
        }
        Ok(Seed { k, branch_choice })
    }

    pub fn first_branch(k: Vec<i64>) -> Result<Self> {
        Seed::new(k, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.k.len()
    }
}

/// A solved point with recomputable residual certificates.
#[derive(Clone, Debug)]
pub struct SolutionPoint {
    pub z: Vec<MPComplex>,
    pub y: Vec<MPComplex>,
    pub residual_exp: Real,
    pub residual_var: Real,
    pub seed: Seed,
    pub precision_bits: usize,
    pub stage_log: Vec<String>,
}

impl SolutionPoint {
    /// Recomputes max_i |e^{z_i} - y_i| at the stored precision.
    pub fn recompute_residual_exp(&self) -> Real {
        residual_exp_of(&self.z, &self.y, self.precision_bits)
    }
}

fn residual_exp_of(z: &[MPComplex], y: &[MPComplex], p: usize) -> Real {
    let mut worst = Real::from_u8(0, p);
    for (zi, yi) in z.iter().zip(y) {
        worst = real_max(worst, zi.exp().sub(yi).abs());
    }
    worst
}

/// Right-hand side f with values and logarithmic derivatives
/// d(log f_i)/dz_j = (df_i/dz_j) / f_i.
enum Rhs<'a> {
    Poly(&'a [MultiPoly]),
    Algebraic(&'a TriangularSystem),
}

/// Branch-tracking state for the algebraic case.
#[derive(Clone)]
struct Track {
    prev: Vec<Option<MPComplex>>,
}

struct RhsEval {
    f: Vec<MPComplex>,
    track: Track,
}

impl<'a> Rhs<'a> {
    fn n(&self) -> usize {
        match self {
            Rhs::Poly(ps) => ps.len(),
            Rhs::Algebraic(t) => t.n,
        }
    }

    /// Values f(z); for algebraic systems the root with the seed's branch
    /// index is taken on the first evaluation and the nearest root to the
    /// previous value thereafter.
    fn eval(
        &self,
        z: &[MPComplex],
        track: &Track,
        seed: &Seed,
        step: usize,
        cfg: &RunConfig,
    ) -> Result<RhsEval> {
        let p = cfg.precision_bits;
        match self {
            Rhs::Poly(ps) => {
                let f = ps.iter().map(|q| q.eval(z)).collect::<Result<Vec<_>>>()?;
                Ok(RhsEval {
                    f,
                    track: track.clone(),
                })
            }
            Rhs::Algebraic(t) => {
                let guard = cfg.singularity_radius();
                let mut f = Vec::with_capacity(t.n);
                let mut next = track.clone();
                for i in 0..t.n {
                    let coeffs = t.univariate_at(i, z, p)?;
                    let lead = coeffs.last().expect("degree >= 1");
                    if real_cmp(&lead.abs(), &guard) != Ordering::Greater {
                        return Err(Error::SingularLeadingCoefficient);
                    }
                    let roots = all_roots(&coeffs, p, cfg.max_iter.max(200))?;
                    let chosen = match &track.prev[i] {
                        None => {
                            let sorted = sort_roots(roots);
                            let b = seed.branch_choice[i];
                            if b >= sorted.len() {
                                return Err(Error::BranchChoiceOutOfRange {
                                    coord: i,
                                    chosen: b,
                                    count: sorted.len(),
                                });
                            }
                            sorted[b].clone()
                        }
                        Some(prev) => {
                            let k = nearest_root(&roots, prev);
                            let chosen = roots[k].clone();
                            // discriminant-crossing guard: another root within
                            // 2^(-p/4) of the tracked one rejects the seed
                            for (l, r) in roots.iter().enumerate() {
                                if l != k
                                    && real_cmp(&r.dist(&chosen), &guard) != Ordering::Greater
                                {
                                    return Err(Error::BranchCollision { coord: i, step });
                                }
                            }
                            chosen
                        }
                    };
                    next.prev[i] = Some(chosen.clone());
                    f.push(chosen);
                }
                Ok(RhsEval { f, track: next })
            }
        }
    }

    /// Logarithmic derivative matrix L with L[i][j] = (df_i/dz_j)/f_i,
    /// evaluated at z with the already-tracked values f.
    fn log_jacobian(&self, z: &[MPComplex], f: &[MPComplex], p: usize) -> Result<CMat> {
        let n = self.n();
        let mut l = CMat::zero(n, n, p);
        match self {
            Rhs::Poly(ps) => {
                for (i, q) in ps.iter().enumerate() {
                    for j in 0..n {
                        let d = q.partial(j)?.eval(z)?;
                        *l.at_mut(i, j) = d.div(&f[i])?;
                    }
                }
            }
            Rhs::Algebraic(t) => {
                for i in 0..n {
                    let mut point = z.to_vec();
                    point.push(f[i].clone());
                    let du = t.polys[i].partial(t.n)?.eval(&point)?;
                    if du.is_zero() {
                        return Err(Error::SingularLeadingCoefficient);
                    }
                    for j in 0..n {
                        let dx = t.polys[i].partial(j)?.eval(&point)?;
                        // implicit differentiation: df/dz_j = -(dp/dx_j)/(dp/du)
                        let dfdz = dx.neg().div(&du)?;
                        *l.at_mut(i, j) = dfdz.div(&f[i])?;
                    }
                }
            }
        }
        Ok(l)
    }
}

fn sup_norm(values: &[MPComplex], p: usize) -> Real {
    values
        .iter()
        .map(|v| v.abs())
        .fold(Real::from_u8(0, p), real_max)
}

/// G_i(z) = z_i - log f_i(z) - 2 pi i k_i with the principal logarithm.
fn residual_g(
    z: &[MPComplex],
    f: &[MPComplex],
    anchors: &[MPComplex],
    guard: &Real,
    step: usize,
) -> Result<Vec<MPComplex>> {
    let mut g = Vec::with_capacity(z.len());
    for (i, (zi, fi)) in z.iter().zip(f).enumerate() {
        if real_cmp(&fi.abs(), guard) != Ordering::Greater {
            return Err(Error::SeedRejectedLogSingularity { index: i, step });
        }
        let lf = fi.ln()?;
        g.push(zi.sub(&lf).sub(&anchors[i]));
    }
    Ok(g)
}

fn range_check(z: &[MPComplex], step: usize, p: usize) -> Result<()> {
    let cap = pow2(32, p);
    for zi in z {
        if !zi.is_finite() || real_cmp(&zi.abs(), &cap) == Ordering::Greater {
            return Err(Error::NumericRangeExceeded { step });
        }
    }
    Ok(())
}

fn solve_with_rhs(rhs: &Rhs, seed: &Seed, cfg: &RunConfig) -> Result<SolutionPoint> {
    cfg.validate()?;
    let n = rhs.n();
    if seed.n() != n {
        return Err(Error::InvalidConfig(format!(
            "seed length {} does not match system size {n}",
            seed.n()
        )));
    }
    let p = cfg.precision_bits;
    let tol = cfg.tol();
    let guard = cfg.singularity_radius();
    let anchors: Vec<MPComplex> = seed
        .k
        .iter()
        .map(|&k| MPComplex::two_pi_i_times(k, p))
        .collect();
    let mut z: Vec<MPComplex> = anchors.clone();
    let mut track = Track {
        prev: vec![None; n],
    };
    let mut stage_log = Vec::new();

    let ev = rhs.eval(&z, &track, seed, 0, cfg)?;
    track = ev.track;
    let mut f = ev.f;
    let mut g = residual_g(&z, &f, &anchors, &guard, 0)?;
    let mut gnorm = sup_norm(&g, p);

    // switch to Newton once |G| is inside the quadratic basin
    let newton_gate = pow2(-8, p);
    let mut used_newton = false;
    let mut fp_steps = 0usize;
    let mut newton_steps = 0usize;

    for step in 1..=cfg.max_iter {
        range_check(&z, step, p)?;
        // convergence target keeps |e^z - y| <= tol with margin
        let fmax = real_max(Real::from_u8(1, p), sup_norm(&f, p));
        let target = tol.div(&fmax, p, RM).mul(&pow2(-3, p), p, RM);
        if real_cmp(&gnorm, &target) != Ordering::Greater {
            break;
        }
        let newton_phase = used_newton || real_cmp(&gnorm, &newton_gate) != Ordering::Greater;
        let direction: Vec<MPComplex> = if newton_phase {
            used_newton = true;
            // J = I - L, solve J d = -G
            let l = rhs.log_jacobian(&z, &f, p)?;
            let mut jac = CMat::identity(n, p);
            for i in 0..n {
                for j in 0..n {
                    let cur = jac.at(i, j).sub(l.at(i, j));
                    *jac.at_mut(i, j) = cur;
                }
            }
            let neg_g: Vec<MPComplex> = g.iter().map(|w| w.neg()).collect();
            lu_solve(&jac, &neg_g, p)?
        } else {
            // fixed-point direction: (2 pi i k + log f(z)) - z = -G
            g.iter().map(|w| w.neg()).collect()
        };
        let mut accepted = false;
        for halving in 0..=60i64 {
            let lambda = pow2(-halving, p);
            let trial: Vec<MPComplex> = z
                .iter()
                .zip(&direction)
                .map(|(zi, di)| zi.add(&di.mul_real(&lambda)))
                .collect();
            let tev = match rhs.eval(&trial, &track, seed, step, cfg) {
                Ok(e) => e,
                Err(Error::BranchCollision { .. }) if halving < 60 => continue,
                Err(e) => return Err(e),
            };
            let tg = match residual_g(&trial, &tev.f, &anchors, &guard, step) {
                Ok(gg) => gg,
                Err(Error::SeedRejectedLogSingularity { .. }) if halving < 60 => continue,
                Err(e) => return Err(e),
            };
            let tn = sup_norm(&tg, p);
            if real_cmp(&tn, &gnorm) == Ordering::Less {
                z = trial;
                f = tev.f;
                track = tev.track;
                g = tg;
                gnorm = tn;
                accepted = true;
                break;
            }
        }
        if newton_phase {
            newton_steps += 1;
        } else {
            fp_steps += 1;
        }
        if !accepted {
            if !newton_phase {
                // stalled fixed point: force the Newton phase next round
                used_newton = true;
                continue;
            }
            return Err(Error::MaxIterExceeded {
                max_iter: cfg.max_iter,
            });
        }
        if step == cfg.max_iter {
            return Err(Error::MaxIterExceeded {
                max_iter: cfg.max_iter,
            });
        }
    }

    let fmax = real_max(Real::from_u8(1, p), sup_norm(&f, p));
    let target = tol.div(&fmax, p, RM).mul(&pow2(-3, p), p, RM);
    if real_cmp(&gnorm, &target) == Ordering::Greater {
        return Err(Error::MaxIterExceeded {
            max_iter: cfg.max_iter,
        });
    }
    stage_log.push(format!(
        "fixed-point steps: {fp_steps}, newton steps: {newton_steps}"
    ));

    let y = f;
    let residual_exp = residual_exp_of(&z, &y, p);
    if real_cmp(&residual_exp, &tol) == Ordering::Greater {
        return Err(Error::MaxIterExceeded {
            max_iter: cfg.max_iter,
        });
    }
    let residual_var = match rhs {
        Rhs::Poly(ps) => {
            let mut worst = Real::from_u8(0, p);
            for (q, yi) in ps.iter().zip(&y) {
                worst = real_max(worst, q.eval(&z)?.sub(yi).abs());
            }
            worst
        }
        Rhs::Algebraic(t) => t.residual_at(&z, &y)?,
    };
    Ok(SolutionPoint {
        z,
        y,
        residual_exp,
        residual_var,
        seed: seed.clone(),
        precision_bits: p,
        stage_log,
    })
}

/// Solves e^{z_i} = P_i(z) for nonzero polynomials P_i in n variables.
pub fn solve_masser_poly(
    polys: &[MultiPoly],
    seed: &Seed,
    cfg: &RunConfig,
) -> Result<SolutionPoint> {
    if polys.is_empty() {
        return Err(Error::InvalidConfig("empty system".into()));
    }
    for q in polys {
        if q.is_zero() {
            return Err(Error::InvalidConfig(
                "Masser systems need nonzero right-hand sides".into(),
            ));
        }
        if q.num_vars != polys.len() {
            return Err(Error::ArityMismatch {
                expected: polys.len(),
                got: q.num_vars,
            });
        }
    }
    solve_with_rhs(&Rhs::Poly(polys), seed, cfg)
}

/// Solves e^{z_i} = f_i(z) where f_i is the branch-tracked root of
/// p_i(z, u) = 0 selected by the seed.
pub fn solve_masser_algebraic(
    t: &TriangularSystem,
    seed: &Seed,
    cfg: &RunConfig,
) -> Result<SolutionPoint> {
    for (i, &b) in seed.branch_choice.iter().enumerate() {
        if i < t.degrees_in_u.len() && b >= t.degrees_in_u[i] as usize {
            return Err(Error::BranchChoiceOutOfRange {
                coord: i,
                chosen: b,
                count: t.degrees_in_u[i] as usize,
            });
        }
    }
    solve_with_rhs(&Rhs::Algebraic(t), seed, cfg)
}

/// Full pipeline: hypothesis gate, witness sample, triangularization,
/// algebraic solve, and a final residual check against the original
/// generators.
pub fn solve_on_variety(v: &ExpVariety, seed: &Seed, cfg: &RunConfig) -> Result<SolutionPoint> {
    let report = hypothesis_report(v, cfg).map_err(|e| e.at_stage("hypothesis"))?;
    if report.dim_estimate != v.n as i64 {
        return Err(Error::HypothesisGate(format!(
            "dim estimate {} != n = {}",
            report.dim_estimate, v.n
        ))
        .at_stage("hypothesis"));
    }
    if !report.pi1_dominant {
        return Err(Error::HypothesisGate("pi_1 is not dominant".into()).at_stage("hypothesis"));
    }
    if cfg.require_both_dominant && !report.pi2_dominant {
        return Err(Error::HypothesisGate("pi_2 is not dominant".into()).at_stage("hypothesis"));
    }
    let witness = sample_point(v, cfg, 0).map_err(|e| e.at_stage("sample"))?;
    let t = triangularize(v, &witness, cfg).map_err(|e| e.at_stage("triangularize"))?;
    let mut sol =
        solve_masser_algebraic(&t, seed, cfg).map_err(|e| e.at_stage("solve"))?;
    // re-check against the original generators
    let mut point = sol.z.clone();
    point.extend(sol.y.iter().cloned());
    let resid = v
        .max_residual(&point)
        .map_err(|e| e.at_stage("certify"))?;
    if real_cmp(&resid, &cfg.tol()) == Ordering::Greater {
        return Err(Error::ExtraneousComponent {
            residual: crate::polycore::mpc::real_to_decimal(&resid),
        }
        .at_stage("certify"));
    }
    sol.residual_var = resid;
    sol.stage_log.insert(
        0,
        format!(
            "hypothesis: dim={}, pi1={}, pi2={}",
            report.dim_estimate, report.pi1_dominant, report.pi2_dominant
        ),
    );
    Ok(sol)
}

/// Re-solves from a returned point at a (typically doubled) precision; used
/// by the precision-monotonicity checks.
pub fn refine_algebraic(
    t: &TriangularSystem,
    sol: &SolutionPoint,
    cfg: &RunConfig,
) -> Result<SolutionPoint> {
    let p = cfg.precision_bits;
    let rhs = Rhs::Algebraic(t);
    let seed = sol.seed.clone();
    let z0: Vec<MPComplex> = sol.z.iter().map(|c| c.with_precision(p)).collect();
    let track = Track {
        prev: sol
            .y
            .iter()
            .map(|c| Some(c.with_precision(p)))
            .collect(),
    };
    polish(&rhs, &seed, z0, track, cfg)
}

pub fn refine_poly(
    polys: &[MultiPoly],
    sol: &SolutionPoint,
    cfg: &RunConfig,
) -> Result<SolutionPoint> {
    let rhs = Rhs::Poly(polys);
    let seed = sol.seed.clone();
    let z0: Vec<MPComplex> = sol
        .z
        .iter()
        .map(|c| c.with_precision(cfg.precision_bits))
        .collect();
    let track = Track {
        prev: vec![None; seed.n()],
    };
    polish(&rhs, &seed, z0, track, cfg)
}

/// Newton-only polish from a given start.
fn polish(
    rhs: &Rhs,
    seed: &Seed,
    mut z: Vec<MPComplex>,
    mut track: Track,
    cfg: &RunConfig,
) -> Result<SolutionPoint> {
    let p = cfg.precision_bits;
    let tol = cfg.tol();
    let guard = cfg.singularity_radius();
    let n = rhs.n();
    let anchors: Vec<MPComplex> = seed
        .k
        .iter()
        .map(|&k| MPComplex::two_pi_i_times(k, p))
        .collect();
    let ev = rhs.eval(&z, &track, seed, 0, cfg)?;
    track = ev.track;
    let mut f = ev.f;
    let mut g = residual_g(&z, &f, &anchors, &guard, 0)?;
    let mut gnorm = sup_norm(&g, p);
    for step in 1..=cfg.max_iter {
        let fmax = real_max(Real::from_u8(1, p), sup_norm(&f, p));
        let target = tol.div(&fmax, p, RM).mul(&pow2(-3, p), p, RM);
        if real_cmp(&gnorm, &target) != Ordering::Greater {
            break;
        }
        let l = rhs.log_jacobian(&z, &f, p)?;
        let mut jac = CMat::identity(n, p);
        for i in 0..n {
            for j in 0..n {
                let cur = jac.at(i, j).sub(l.at(i, j));
                *jac.at_mut(i, j) = cur;
            }
        }
        let neg_g: Vec<MPComplex> = g.iter().map(|w| w.neg()).collect();
        let d = lu_solve(&jac, &neg_g, p)?;
        let mut accepted = false;
        for halving in 0..=60i64 {
            let lambda = pow2(-halving, p);
            let trial: Vec<MPComplex> = z
                .iter()
                .zip(&d)
                .map(|(zi, di)| zi.add(&di.mul_real(&lambda)))
                .collect();
            let tev = rhs.eval(&trial, &track, seed, step, cfg)?;
            let tg = residual_g(&trial, &tev.f, &anchors, &guard, step)?;
            let tn = sup_norm(&tg, p);
            if real_cmp(&tn, &gnorm) == Ordering::Less {
                z = trial;
                f = tev.f;
                track = tev.track;
                g = tg;
                gnorm = tn;
                accepted = true;
                break;
            }
        }
        if !accepted || step == cfg.max_iter {
            return Err(Error::MaxIterExceeded {
                max_iter: cfg.max_iter,
            });
        }
    }
    let y = f;
    let residual_exp = residual_exp_of(&z, &y, p);
    let residual_var = match rhs {
        Rhs::Poly(ps) => {
            let mut worst = Real::from_u8(0, p);
            for (q, yi) in ps.iter().zip(&y) {
                worst = real_max(worst, q.eval(&z)?.sub(yi).abs());
            }
            worst
        }
        Rhs::Algebraic(t) => t.residual_at(&z, &y)?,
    };
    Ok(SolutionPoint {
        z,
        y,
        residual_exp,
        residual_var,
        seed: seed.clone(),
        precision_bits: p,
        stage_log: vec!["newton polish".to_string()],
    })
}
