//! Seed enumeration with post-hoc torus exclusion and Zariski-density
//! evidence accumulation. Seeds run in a worker pool; exclusion-list updates
//! are applied by a single aggregator in seed order, so output is a pure
//! function of (variety, plan, config).

use rayon::prelude::*;
use std::cmp::Ordering;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::generic::{audit, multiplicative_residual, GenericityReport, Torus, Verdict};
use crate::linalg::{numerical_rank, singular_values, CMat};
use crate::masser::{solve_masser_algebraic, Seed, SolutionPoint};
use crate::polycore::mpc::{real_cmp, real_to_decimal, MPComplex};
use crate::triangularize::triangularize;
use crate::variety::{hypothesis_report, sample_point, ExpVariety};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchPolicy {
    First,
    All,
}

#[derive(Clone, Debug)]
pub struct SweepPlan {
    /// Per-coordinate inclusive integer ranges; the value 0 is always skipped.
    pub seed_box: Vec<(i64, i64)>,
    pub branch_policy: BranchPolicy,
    pub excluded_tori: Vec<Torus>,
    /// Maximum number of seeds attempted.
    pub budget: usize,
    /// Allow sweeping when pi_2 dominance is not certified (recorded).
    pub override_dominance_gate: bool,
}

impl SweepPlan {
    pub fn new(seed_box: Vec<(i64, i64)>, budget: usize) -> Self {
        SweepPlan {
            seed_box,
            branch_policy: BranchPolicy::First,
            excluded_tori: Vec::new(),
            budget,
            override_dominance_gate: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.seed_box.len() != n {
            return Err(Error::InvalidPlan(format!(
                "seed box has {} coordinates, variety needs {n}",
                self.seed_box.len()
            )));
        }
        if self.budget == 0 {
            return Err(Error::InvalidPlan("budget must be at least 1".into()));
        }
        for (i, &(lo, hi)) in self.seed_box.iter().enumerate() {
            if lo > hi {
                return Err(Error::InvalidPlan(format!(
                    "empty range {lo}..{hi} in coordinate {i}"
                )));
            }
            let has_nonzero = (lo..=hi).any(|k| k != 0);
            if !has_nonzero {
                return Err(Error::InvalidPlan(format!(
                    "range {lo}..{hi} in coordinate {i} contains no nonzero seed"
                )));
            }
        }
        Ok(())
    }

    /// Lexicographic seed enumeration, zeros skipped, truncated to budget.
    pub fn seeds(&self) -> Vec<Vec<i64>> {
        let mut all = vec![Vec::new()];
        for &(lo, hi) in &self.seed_box {
            let mut next = Vec::new();
            for prefix in &all {
                for k in lo..=hi {
                    if k == 0 {
                        continue;
                    }
                    let mut s = prefix.clone();
                    s.push(k);
                    next.push(s);
                }
            }
            all = next;
        }
        all.truncate(self.budget);
        all
    }
}

#[derive(Clone, Debug)]
pub enum SeedOutcome {
    /// Presumed generic at the plan's height bound.
    Accepted {
        solution: SolutionPoint,
        report: GenericityReport,
    },
    /// e^z lies on a previously excluded torus (matched row recorded).
    ExcludedByTorus {
        solution: SolutionPoint,
        torus_index: usize,
        matched_row: Vec<num_bigint::BigInt>,
        residual: String,
    },
    /// Audit found relations; the associated tori join the exclusion list.
    RelationsFound {
        solution: SolutionPoint,
        report: GenericityReport,
    },
    /// Solver rejected the seed or failed to converge.
    Failed { reason: String },
}

#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub seed: Seed,
    pub outcome: SeedOutcome,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub accepted: Vec<(Seed, SolutionPoint, GenericityReport)>,
    pub log: Vec<SweepRecord>,
    pub tori_found: Vec<Torus>,
    /// True when the budget ran out with zero presumed-generic solutions;
    /// never a disproof.
    pub budget_exhausted_without_generic: bool,
}

fn torus_matches(
    torus: &Torus,
    z: &[MPComplex],
    cfg: &RunConfig,
) -> Result<Option<(Vec<num_bigint::BigInt>, String)>> {
    let tol = cfg.tol();
    for row in &torus.identity_component_matrix {
        let (resid, _m0) = multiplicative_residual(row, z, cfg.precision_bits)?;
        if real_cmp(&resid, &tol) != Ordering::Greater {
            return Ok(Some((row.clone(), real_to_decimal(&resid))));
        }
    }
    Ok(None)
}

fn same_torus(a: &Torus, b: &Torus) -> bool {
    a.identity_component_matrix == b.identity_component_matrix
}

/// Sweeps the seed box: solves per seed, audits each convergent solution,
/// sets aside solutions on excluded tori, and appends newly witnessed tori
/// for subsequent seeds.
pub fn sweep(v: &ExpVariety, plan: &SweepPlan, cfg: &RunConfig) -> Result<SweepResult> {
    plan.validate(v.n)?;
    cfg.validate()?;
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
    if !report.pi2_dominant && !plan.override_dominance_gate {
        return Err(Error::HypothesisGate(
            "pi_2 is not dominant (pass the override to sweep anyway)".into(),
        )
        .at_stage("hypothesis"));
    }

    // the triangular system is seed-independent: hoist it
    let witness = sample_point(v, cfg, 0).map_err(|e| e.at_stage("sample"))?;
    let tri = triangularize(v, &witness, cfg).map_err(|e| e.at_stage("triangularize"))?;

    // expand seeds by branch policy
    let mut attempts: Vec<Seed> = Vec::new();
    for k in plan.seeds() {
        match plan.branch_policy {
            BranchPolicy::First => {
                attempts.push(Seed::first_branch(k)?);
            }
            BranchPolicy::All => {
                let mut branch_sets = vec![Vec::new()];
                for &d in &tri.degrees_in_u {
                    let mut next = Vec::new();
                    for prefix in &branch_sets {
                        for b in 0..d as usize {
                            let mut s: Vec<usize> = prefix.clone();
                            s.push(b);
                            next.push(s);
                        }
                    }
                    branch_sets = next;
                }
                for branches in branch_sets {
                    attempts.push(Seed::new(k.clone(), branches)?);
                }
            }
        }
    }

    // workers solve and audit; exclusion is applied afterwards in seed order
    let solved: Vec<(Seed, Result<(SolutionPoint, GenericityReport)>)> = attempts
        .par_iter()
        .map(|seed| {
            let outcome = solve_masser_algebraic(&tri, seed, cfg).and_then(|sol| {
                // re-check against the original generators
                let mut point = sol.z.clone();
                point.extend(sol.y.iter().cloned());
                let resid = v.max_residual(&point)?;
                if real_cmp(&resid, &cfg.tol()) == Ordering::Greater {
                    return Err(Error::ExtraneousComponent {
                        residual: real_to_decimal(&resid),
                    });
                }
                let rep = audit(&sol, cfg.height_bound, cfg.precision_bits)?;
                Ok((sol, rep))
            });
            (seed.clone(), outcome)
        })
        .collect();

    let mut excluded: Vec<Torus> = plan.excluded_tori.clone();
    let initial_excluded = excluded.len();
    let mut log = Vec::with_capacity(solved.len());
    let mut accepted = Vec::new();
    for (seed, outcome) in solved {
        match outcome {
            Err(e) => log.push(SweepRecord {
                seed,
                outcome: SeedOutcome::Failed {
                    reason: e.to_string(),
                },
            }),
            Ok((sol, rep)) => {
                let mut hit = None;
                for (ti, torus) in excluded.iter().enumerate() {
                    if let Some((row, resid)) = torus_matches(torus, &sol.z, cfg)? {
                        hit = Some((ti, row, resid));
                        break;
                    }
                }
                if let Some((torus_index, matched_row, residual)) = hit {
                    log.push(SweepRecord {
                        seed,
                        outcome: SeedOutcome::ExcludedByTorus {
                            solution: sol,
                            torus_index,
                            matched_row,
                            residual,
                        },
                    });
                } else if rep.verdict == Verdict::RelationsFound {
                    for t in &rep.tori {
                        if !excluded.iter().any(|e| same_torus(e, t)) {
                            excluded.push(t.clone());
                        }
                    }
                    log.push(SweepRecord {
                        seed,
                        outcome: SeedOutcome::RelationsFound {
                            solution: sol,
                            report: rep,
                        },
                    });
                } else {
                    accepted.push((seed.clone(), sol.clone(), rep.clone()));
                    log.push(SweepRecord {
                        seed,
                        outcome: SeedOutcome::Accepted {
                            solution: sol,
                            report: rep,
                        },
                    });
                }
            }
        }
    }
    let tori_found = excluded.split_off(initial_excluded);
    let exhausted = accepted.is_empty();
    Ok(SweepResult {
        accepted,
        log,
        tori_found,
        budget_exhausted_without_generic: exhausted,
    })
}

#[derive(Clone, Debug)]
pub struct DensityEvidence {
    pub solutions_used: usize,
    pub degree: usize,
    pub monomial_count: usize,
    pub monomial_rank: usize,
    pub full: bool,
    pub inconclusive: bool,
    pub reason: Option<String>,
}

/// All exponent vectors in `vars` variables with total degree at most `d`,
/// in a fixed deterministic order.
fn monomials_up_to(vars: usize, d: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; vars];
    fn rec(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, idx: usize, remaining: u32) {
        if idx == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=remaining {
            cur[idx] = e;
            rec(out, cur, idx + 1, remaining - e);
        }
        cur[idx] = 0;
    }
    rec(&mut out, &mut cur, 0, d as u32);
    out
}

/// Rank of the monomial-evaluation matrix on the solution set: full rank
/// certifies that no polynomial of total degree <= d in (z, y) vanishes on
/// all solutions. Too few solutions is inconclusive, never false.
pub fn density_evidence(
    solutions: &[SolutionPoint],
    d: usize,
    cfg: &RunConfig,
) -> Result<DensityEvidence> {
    if solutions.is_empty() {
        return Err(Error::NoSolutions);
    }
    let n = solutions[0].z.len();
    let p = cfg.precision_bits;
    let monos = monomials_up_to(2 * n, d);
    let count = monos.len();
    let mut m = CMat::zero(solutions.len(), count, p);
    for (r, sol) in solutions.iter().enumerate() {
        let mut point: Vec<MPComplex> = sol.z.iter().map(|c| c.with_precision(p)).collect();
        point.extend(sol.y.iter().map(|c| c.with_precision(p)));
        for (c, mono) in monos.iter().enumerate() {
            let mut acc = MPComplex::one(p);
            for (v, &e) in mono.iter().enumerate() {
                for _ in 0..e {
                    acc = acc.mul(&point[v]);
                }
            }
            *m.at_mut(r, c) = acc;
        }
    }
    let rank = numerical_rank(&singular_values(&m, p), &cfg.rank_threshold());
    let too_few = solutions.len() < count;
    Ok(DensityEvidence {
        solutions_used: solutions.len(),
        degree: d,
        monomial_count: count,
        monomial_rank: rank,
        full: !too_few && rank == count,
        inconclusive: too_few,
        reason: too_few.then(|| {
            format!(
                "{} solutions cannot witness rank {count}; need at least {count}",
                solutions.len()
            )
        }),
    })
}
