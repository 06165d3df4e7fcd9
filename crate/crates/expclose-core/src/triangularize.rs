//! Reduction of a variety with dominant pi_1 to a triangular system: for each
//! coordinate, iterated resultants eliminate the other y-variables, extraneous
//! factors are discarded by residual filtering at a witness point, and the
//! output polynomials are content-free and square-free in u.

use std::cmp::Ordering;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::polycore::gcd::{gcd, make_primitive, primitive_part_in, square_free_in};
use crate::polycore::mpc::{pow2, real_cmp, real_to_decimal, MPComplex, Real};
use crate::polycore::poly::MultiPoly;
use crate::polycore::resultant::resultant;
use crate::roots::all_roots;
use crate::variety::{ExpVariety, SamplePoint};

/// Per-coordinate polynomials p_i(x_1..x_n, u) with each y_i algebraic over
/// the x-coordinates. Stored square-free and content-free in u.
#[derive(Clone, Debug)]
pub struct TriangularSystem {
    pub n: usize,
    pub polys: Vec<MultiPoly>,
    pub degrees_in_u: Vec<u32>,
}

impl TriangularSystem {
    pub fn new(n: usize, polys: Vec<MultiPoly>) -> Result<Self> {
        if polys.len() != n {
            return Err(Error::InputParse(format!(
                "triangular system needs {n} polynomials, got {}",
                polys.len()
            )));
        }
        let u = n; // u is the last variable
        let mut degrees = Vec::with_capacity(n);
        for (i, p) in polys.iter().enumerate() {
            if p.num_vars != n + 1 {
                return Err(Error::ArityMismatch {
                    expected: n + 1,
                    got: p.num_vars,
                });
            }
            let d = p.degree_in(u);
            if p.is_zero() || d == 0 {
                return Err(Error::EliminationCollapsed { coord: i });
            }
            if is_constant_times_u(p, u) {
                return Err(Error::InputParse(format!(
                    "p_{} is a constant multiple of u",
                    i + 1
                )));
            }
            let dp = p.partial(u)?;
            if gcd(p, &dp).degree_in(u) != 0 {
                return Err(Error::InputParse(format!(
                    "p_{} is not square-free in u",
                    i + 1
                )));
            }
            degrees.push(d);
        }
        Ok(TriangularSystem {
            n,
            polys,
            degrees_in_u: degrees,
        })
    }

    /// Coefficient list (low to high in u) of p_i at a numeric x-point.
    pub fn univariate_at(&self, i: usize, x: &[MPComplex], p: usize) -> Result<Vec<MPComplex>> {
        let mut point = x.to_vec();
        point.push(MPComplex::zero(p));
        self.polys[i]
            .coeffs_in(self.n)
            .iter()
            .map(|c| c.eval(&point))
            .collect()
    }

    /// Residual |p_i(x, u)|-style evaluation for certificates.
    pub fn residual_at(&self, x: &[MPComplex], y: &[MPComplex]) -> Result<Real> {
        let p = x.iter().map(|z| z.p()).max().unwrap_or(64);
        let mut worst = Real::from_u8(0, p);
        for (i, poly) in self.polys.iter().enumerate() {
            let mut point = x.to_vec();
            point.push(y[i].clone());
            let v = poly.eval(&point)?.abs();
            worst = crate::polycore::mpc::real_max(worst, v);
        }
        Ok(worst)
    }
}

fn is_constant_times_u(p: &MultiPoly, u: usize) -> bool {
    p.num_terms() == 1
        && p.terms
            .keys()
            .next()
            .map(|m| {
                m[u] == 1 && m.iter().enumerate().all(|(k, &e)| k == u || e == 0)
            })
            .unwrap_or(false)
}

/// Upper bound on the fiber cardinality over generic x: the product of the
/// u-degrees.
pub fn fiber_bound(t: &TriangularSystem) -> u64 {
    t.degrees_in_u.iter().map(|&d| d as u64).product()
}

/// Number of distinct fiber points over a numeric x-point: the product of the
/// per-coordinate distinct root counts. Errors when a leading coefficient
/// degenerates (near the discriminant locus callers should resample).
pub fn fiber_count_at(t: &TriangularSystem, x: &[MPComplex], cfg: &RunConfig) -> Result<usize> {
    let p = cfg.precision_bits;
    let cluster = cfg.rank_threshold();
    let mut total = 1usize;
    for i in 0..t.n {
        let coeffs = t.univariate_at(i, x, p)?;
        let lead = coeffs.last().expect("degree >= 1");
        if real_cmp(&lead.abs(), &cfg.singularity_radius()) != Ordering::Greater {
            return Err(Error::SingularLeadingCoefficient);
        }
        let roots = all_roots(&coeffs, p, cfg.max_iter)?;
        // count roots modulo clustering
        let mut distinct: Vec<MPComplex> = Vec::new();
        for r in roots {
            let dup = distinct
                .iter()
                .any(|s| real_cmp(&s.dist(&r), &cluster) != Ordering::Greater);
            if !dup {
                distinct.push(r);
            }
        }
        total *= distinct.len().max(1);
    }
    Ok(total)
}

/// Eliminates variable `var` from the generator set by pairing everything
/// against a deterministic pivot with resultants. Zero resultants (shared
/// factors) are resolved through the witness: the vanishing branch survives.
fn eliminate_var(
    mut polys: Vec<MultiPoly>,
    var: usize,
    witness: &[MPComplex],
    filter_tol: &Real,
    term_bound: usize,
) -> Result<Vec<MultiPoly>> {
    let coord = var;
    loop {
        let (mut with_var, mut rest): (Vec<MultiPoly>, Vec<MultiPoly>) =
            polys.into_iter().partition(|p| p.degree_in(var) > 0);
        if with_var.is_empty() {
            return Ok(rest);
        }
        // deterministic pivot: minimal (degree in var, term count, insertion order)
        let pivot_idx = (0..with_var.len())
            .min_by_key(|&k| (with_var[k].degree_in(var), with_var[k].num_terms(), k))
            .expect("nonempty");
        let pivot = with_var.remove(pivot_idx);
        let mut restart = None;
        for q in &with_var {
            let r = make_primitive(&resultant(q, &pivot, var, term_bound)?);
            if r.is_zero() {
                // shared factor: keep the branch that vanishes at the witness
                let g = gcd(q, &pivot);
                let g_res = g.eval(witness)?.abs();
                if real_cmp(&g_res, filter_tol) != Ordering::Greater {
                    restart = Some((q.clone(), pivot.clone(), g, true));
                } else {
                    restart = Some((q.clone(), pivot.clone(), g, false));
                }
                break;
            }
            r.guard_terms(term_bound)?;
            rest.push(r);
        }
        match restart {
            None => return Ok(rest),
            Some((q, piv, g, keep_gcd)) => {
                if g.degree_in(var) == 0 {
                    return Err(Error::EliminationCollapsed { coord });
                }
                // rebuild the working set and redo this variable
                let mut next = rest;
                next.extend(with_var.into_iter().filter(|w| *w != q));
                if keep_gcd {
                    next.push(g);
                } else {
                    next.push(make_primitive(&crate::polycore::gcd::exact_div(&q, &g)?));
                    next.push(make_primitive(&crate::polycore::gcd::exact_div(&piv, &g)?));
                }
                polys = next;
            }
        }
    }
}

/// Produces the triangular system through the witness: for each i the other
/// y-variables are eliminated j-ascending, candidates are filtered by
/// residual vanishing at the witness, and the survivor is reduced to its
/// square-free, content-free form in u.
pub fn triangularize(
    v: &ExpVariety,
    witness: &SamplePoint,
    cfg: &RunConfig,
) -> Result<TriangularSystem> {
    if !v.approx_generators.is_empty() {
        return Err(Error::ApproxCoefficientsInElimination);
    }
    let n = v.n;
    let p = cfg.precision_bits;
    // iterated resultants amplify the witness residual; filter at half the
    // working digits
    let filter_tol = pow2(-(p as i64) / 4, p);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut polys: Vec<MultiPoly> = v.generators.iter().map(make_primitive).collect();
        for j in 0..n {
            if j == i {
                continue;
            }
            polys = eliminate_var(polys, n + j, &witness.coords, &filter_tol, cfg.term_bound)?;
        }
        let u_var = n + i;
        let mut best: Option<(u32, usize, MultiPoly)> = None;
        let mut best_residual: Option<Real> = None;
        for c in polys.into_iter().filter(|c| c.degree_in(u_var) > 0) {
            let pp = primitive_part_in(&c, u_var)?;
            let sf = square_free_in(&pp, u_var)?;
            if sf.degree_in(u_var) == 0 {
                continue;
            }
            let resid = sf.eval(&witness.coords)?.abs();
            let better_resid = match &best_residual {
                None => true,
                Some(b) => real_cmp(&resid, b) == Ordering::Less,
            };
            if better_resid {
                best_residual = Some(resid.clone());
            }
            if real_cmp(&resid, &filter_tol) == Ordering::Greater {
                continue; // extraneous at the witness
            }
            let key = (sf.degree_in(u_var), sf.num_terms());
            let better = match &best {
                None => true,
                Some((d, t, _)) => (key.0, key.1) < (*d, *t),
            };
            if better {
                best = Some((key.0, key.1, sf));
            }
        }
        let Some((_, _, poly)) = best else {
            return Err(Error::AllFactorsExtraneous {
                coord: i,
                best_residual: best_residual
                    .map(|r| real_to_decimal(&r))
                    .unwrap_or_else(|| "none".to_string()),
            });
        };
        // unit-normalize against the u-leading coefficient so degree-one
        // systems come out monic in u
        let poly = {
            let lead_coeff = poly
                .coeffs_in(u_var)
                .pop()
                .and_then(|c| c.leading().map(|(_, s)| s.clone()))
                .expect("positive degree in u");
            let (_, unit) = lead_coeff.canonical_unit();
            poly.scale(&unit)
        };
        // remap (x_1..x_n, y_i) -> (x_1..x_n, u)
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.push(u_var);
        let projected = poly.project_vars(&mapping, n + 1)?;
        out.push(projected);
    }
    TriangularSystem::new(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::poly::{poly_from_text, poly_to_text, VarSet};
    use crate::variety::sample_point;

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

    fn tri_poly(n: usize, s: &str) -> MultiPoly {
        poly_from_text(s, VarSet::Triangular { n }).unwrap()
    }

    #[test]
    fn already_triangular_swap() {
        let v = variety(2, &["y1 + -1*x2", "y2 + -1*x1"]);
        let w = sample_point(&v, &cfg(), 0).unwrap();
        let t = triangularize(&v, &w, &cfg()).unwrap();
        assert_eq!(t.polys[0], tri_poly(2, "u + -1*x2"));
        assert_eq!(t.polys[1], tri_poly(2, "u + -1*x1"));
        assert_eq!(t.degrees_in_u, vec![1, 1]);
    }

    #[test]
    fn derived_elimination_example() {
        // V = {y1 y2 - 1, y1 - x1}: p1 = u - x1, p2 = x1 u - 1
        let v = variety(2, &["y1*y2 + -1", "y1 + -1*x1"]);
        let w = sample_point(&v, &cfg(), 0).unwrap();
        let t = triangularize(&v, &w, &cfg()).unwrap();
        assert_eq!(
            t.polys[0],
            tri_poly(2, "u + -1*x1"),
            "p1 = {}",
            poly_to_text(&t.polys[0], VarSet::Triangular { n: 2 })
        );
        assert_eq!(
            t.polys[1],
            tri_poly(2, "x1*u + -1"),
            "p2 = {}",
            poly_to_text(&t.polys[1], VarSet::Triangular { n: 2 })
        );
    }

    #[test]
    fn single_generator_square() {
        let v = variety(1, &["y1^2 + -1*x1"]);
        let w = sample_point(&v, &cfg(), 0).unwrap();
        let t = triangularize(&v, &w, &cfg()).unwrap();
        assert_eq!(t.polys[0], tri_poly(1, "u^2 + -1*x1"));
        assert_eq!(fiber_bound(&t), 2);
    }

    #[test]
    fn soundness_at_witness() {
        let v = variety(2, &["y1*y2 + -1", "y1 + -1*x1"]);
        let w = sample_point(&v, &cfg(), 0).unwrap();
        let t = triangularize(&v, &w, &cfg()).unwrap();
        let x = w.x_part(2).to_vec();
        let y = w.y_part(2).to_vec();
        let resid = t.residual_at(&x, &y).unwrap();
        let filter = pow2(-(cfg().precision_bits as i64) / 4, cfg().precision_bits);
        assert!(real_cmp(&resid, &filter) != Ordering::Greater);
    }

    #[test]
    fn fiber_bounds() {
        // p1 = u - x2, p2 = u - x1 -> 1
        let t = TriangularSystem::new(
            2,
            vec![tri_poly(2, "u + -1*x2"), tri_poly(2, "u + -1*x1")],
        )
        .unwrap();
        assert_eq!(fiber_bound(&t), 1);
        // p1 = u^3 + x1 u + 1, p2 = u^2 - x2 -> 6
        let t = TriangularSystem::new(
            2,
            vec![tri_poly(2, "u^3 + x1*u + 1"), tri_poly(2, "u^2 + -1*x2")],
        )
        .unwrap();
        assert_eq!(fiber_bound(&t), 6);
    }

    #[test]
    fn containment_near_witness() {
        // fresh samples of the triangular component satisfy the original
        // generators
        let v = variety(2, &["y1*y2 + -1", "y1 + -1*x1"]);
        let c = cfg();
        let p = c.precision_bits;
        let w = sample_point(&v, &c, 0).unwrap();
        let t = triangularize(&v, &w, &c).unwrap();
        let mut state = 777u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2e-3 - 1e-3
        };
        let loose = pow2(-(p as i64) / 4, p);
        for _ in 0..10 {
            let x: Vec<MPComplex> = w
                .x_part(2)
                .iter()
                .map(|z| z.add(&MPComplex::from_f64(next(), next(), p)))
                .collect();
            let mut y = Vec::new();
            for i in 0..2 {
                let coeffs = t.univariate_at(i, &x, p).unwrap();
                let roots = all_roots(&coeffs, p, 500).unwrap();
                let prev = &w.coords[2 + i];
                let k = crate::roots::nearest_root(&roots, prev);
                y.push(roots[k].clone());
            }
            let mut point = x.clone();
            point.extend(y);
            let resid = v.max_residual(&point).unwrap();
            assert!(
                real_cmp(&resid, &loose) != Ordering::Greater,
                "generator residual too large on component sample"
            );
        }
    }

    #[test]
    fn fiber_count_within_bound() {
        let t = TriangularSystem::new(
            2,
            vec![tri_poly(2, "u^3 + x1*u + 1"), tri_poly(2, "u^2 + -1*x2")],
        )
        .unwrap();
        let c = cfg();
        let p = c.precision_bits;
        let mut state = 424242u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        let mut checked = 0;
        while checked < 10 {
            let x = vec![
                MPComplex::from_f64(next(), next(), p),
                MPComplex::from_f64(next(), next(), p),
            ];
            match fiber_count_at(&t, &x, &c) {
                Ok(count) => {
                    assert!((1..=6).contains(&count), "count {count} out of range");
                    checked += 1;
                }
                Err(_) => continue, // discriminant hit, resample
            }
        }
    }

    #[test]
    fn constant_times_u_rejected() {
        let bad = tri_poly(1, "u");
        assert!(TriangularSystem::new(1, vec![bad]).is_err());
    }

    #[test]
    fn non_square_free_rejected() {
        // (u - x1)^2
        let sq = tri_poly(1, "u + -1*x1").pow(2);
        assert!(TriangularSystem::new(1, vec![sq]).is_err());
    }

    #[test]
    fn transcendental_coordinate_reported() {
        // V = {y1 - x1} viewed in n = 2: y2 is unconstrained
        let v = variety(2, &["y1 + -1*x1"]);
        let w = sample_point(&v, &cfg(), 0).unwrap();
        let e = triangularize(&v, &w, &cfg());
        assert!(matches!(e, Err(Error::AllFactorsExtraneous { coord: 1, .. })));
    }
}
