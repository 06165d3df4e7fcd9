//! Serialization records: input file schema (varieties and triangular
//! systems, discriminated by a `form` field) and output records in which
//! every high-precision number is a decimal string with an explicit
//! precision field, so reports reproduce bit-exactly across platforms.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::generic::{
    GenericityReport, Hyperplane, IntegerRelationMatrix, RelationKind, Torus, Verdict,
};
use crate::masser::{Seed, SolutionPoint};
use crate::polycore::gaussian::GaussianRational;
use crate::polycore::mpc::{real_from_decimal, real_to_decimal, MPComplex};
use crate::polycore::poly::{poly_to_text, MultiPoly, VarSet};
use crate::sweep::{DensityEvidence, SeedOutcome, SweepRecord, SweepResult};
use crate::triangularize::TriangularSystem;
use crate::variety::{ApproxPoly, ExpVariety, HypothesisReport};

// ---------------------------------------------------------------------------
// input schema

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermRecord {
    /// `a/b`, `a/b+c/d*i`, or `@name` referencing an approx_coeffs block.
    pub coeff: String,
    pub exps: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproxCoeffRecord {
    pub name: String,
    pub value_re: String,
    pub value_im: String,
    pub radius: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "form")]
pub enum InputFile {
    #[serde(rename = "variety")]
    Variety {
        n: usize,
        generators: Vec<Vec<TermRecord>>,
        #[serde(default)]
        approx_coeffs: Vec<ApproxCoeffRecord>,
        #[serde(default)]
        coefficient_field_note: Option<String>,
    },
    #[serde(rename = "triangular")]
    Triangular {
        n: usize,
        polys: Vec<Vec<TermRecord>>,
    },
}

pub fn parse_input(text: &str) -> Result<InputFile> {
    serde_json::from_str(text).map_err(|e| Error::InputParse(e.to_string()))
}

fn terms_to_poly(terms: &[TermRecord], num_vars: usize) -> Result<MultiPoly> {
    let mut p = MultiPoly::zero(num_vars);
    for t in terms {
        if t.exps.len() != num_vars {
            return Err(Error::InputParse(format!(
                "term exponent vector has length {}, expected {num_vars}",
                t.exps.len()
            )));
        }
        if t.coeff.starts_with('@') {
            return Err(Error::InputParse(
                "approximate coefficient reference in an exact generator".into(),
            ));
        }
        p.add_term(t.exps.clone(), GaussianRational::parse(&t.coeff)?);
    }
    Ok(p)
}

/// Splits generator term lists into exact polynomials and approximate ones
/// (any term whose coefficient is an `@name` reference).
pub fn variety_from_input(file: &InputFile, precision_bits: usize) -> Result<ExpVariety> {
    let InputFile::Variety {
        n,
        generators,
        approx_coeffs,
        coefficient_field_note,
    } = file
    else {
        return Err(Error::InputParse(
            "expected a file with form = \"variety\"".into(),
        ));
    };
    let n = *n;
    let mut exact = Vec::new();
    let mut approx = Vec::new();
    for gen in generators {
        let is_approx = gen.iter().any(|t| t.coeff.starts_with('@'));
        if !is_approx {
            exact.push(terms_to_poly(gen, 2 * n)?);
            continue;
        }
        let mut terms = Vec::new();
        let mut radius = crate::polycore::mpc::pow2(-(precision_bits as i64), precision_bits);
        for t in gen {
            if t.exps.len() != 2 * n {
                return Err(Error::InputParse("bad exponent arity".into()));
            }
            let c = if let Some(name) = t.coeff.strip_prefix('@') {
                let block = approx_coeffs
                    .iter()
                    .find(|b| b.name == name)
                    .ok_or_else(|| {
                        Error::InputParse(format!("unknown approx coefficient `@{name}`"))
                    })?;
                let re = real_from_decimal(&block.value_re, precision_bits)?;
                let im = real_from_decimal(&block.value_im, precision_bits)?;
                let r = real_from_decimal(&block.radius, precision_bits)?;
                radius = crate::polycore::mpc::real_max(radius, r);
                MPComplex::new(re, im, precision_bits)
            } else {
                MPComplex::from_gaussian(&GaussianRational::parse(&t.coeff)?, precision_bits)
            };
            terms.push((t.exps.clone(), c));
        }
        approx.push(ApproxPoly {
            num_vars: 2 * n,
            terms,
            radius,
        });
    }
    ExpVariety::new(
        n,
        exact,
        approx,
        coefficient_field_note
            .clone()
            .unwrap_or_else(|| "Q(i)".to_string()),
    )
}

pub fn triangular_from_input(file: &InputFile) -> Result<TriangularSystem> {
    let InputFile::Triangular { n, polys } = file else {
        return Err(Error::InputParse(
            "expected a file with form = \"triangular\"".into(),
        ));
    };
    let ps = polys
        .iter()
        .map(|terms| terms_to_poly(terms, *n + 1))
        .collect::<Result<Vec<_>>>()?;
    TriangularSystem::new(*n, ps)
}

fn poly_to_terms(p: &MultiPoly) -> Vec<TermRecord> {
    p.terms
        .iter()
        .map(|(m, c)| TermRecord {
            coeff: c.to_string(),
            exps: m.clone(),
        })
        .collect()
}

pub fn triangular_to_input(t: &TriangularSystem) -> InputFile {
    InputFile::Triangular {
        n: t.n,
        polys: t.polys.iter().map(poly_to_terms).collect(),
    }
}

pub fn variety_to_input(v: &ExpVariety) -> InputFile {
    InputFile::Variety {
        n: v.n,
        generators: v.generators.iter().map(poly_to_terms).collect(),
        approx_coeffs: Vec::new(),
        coefficient_field_note: Some(v.coefficient_field_note.clone()),
    }
}

// ---------------------------------------------------------------------------
// output records

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComplexRecord {
    pub re: String,
    pub im: String,
}

impl ComplexRecord {
    pub fn of(z: &MPComplex) -> Self {
        ComplexRecord {
            re: real_to_decimal(&z.re),
            im: real_to_decimal(&z.im),
        }
    }

    pub fn to_complex(&self, precision_bits: usize) -> Result<MPComplex> {
        Ok(MPComplex::new(
            real_from_decimal(&self.re, precision_bits)?,
            real_from_decimal(&self.im, precision_bits)?,
            precision_bits,
        ))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SolutionRecord {
    pub z: Vec<ComplexRecord>,
    pub y: Vec<ComplexRecord>,
    pub residual_exp: String,
    pub residual_var: String,
    pub seed_k: Vec<i64>,
    pub branch_choice: Vec<usize>,
    pub precision_bits: usize,
    pub stage_log: Vec<String>,
}

impl SolutionRecord {
    pub fn of(s: &SolutionPoint) -> Self {
        SolutionRecord {
            z: s.z.iter().map(ComplexRecord::of).collect(),
            y: s.y.iter().map(ComplexRecord::of).collect(),
            residual_exp: real_to_decimal(&s.residual_exp),
            residual_var: real_to_decimal(&s.residual_var),
            seed_k: s.seed.k.clone(),
            branch_choice: s.seed.branch_choice.clone(),
            precision_bits: s.precision_bits,
            stage_log: s.stage_log.clone(),
        }
    }

    pub fn to_solution(&self) -> Result<SolutionPoint> {
        let p = self.precision_bits;
        Ok(SolutionPoint {
            z: self
                .z
                .iter()
                .map(|c| c.to_complex(p))
                .collect::<Result<Vec<_>>>()?,
            y: self
                .y
                .iter()
                .map(|c| c.to_complex(p))
                .collect::<Result<Vec<_>>>()?,
            residual_exp: real_from_decimal(&self.residual_exp, p)?,
            residual_var: real_from_decimal(&self.residual_var, p)?,
            seed: Seed::new(self.seed_k.clone(), self.branch_choice.clone())?,
            precision_bits: p,
            stage_log: self.stage_log.clone(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RelationRecord {
    pub rows: Vec<Vec<String>>,
    pub kind: String,
    pub height: String,
    pub witness_error: String,
}

impl RelationRecord {
    pub fn of(m: &IntegerRelationMatrix) -> Self {
        RelationRecord {
            rows: m
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v.to_string()).collect())
                .collect(),
            kind: match m.kind {
                RelationKind::Additive => "additive".to_string(),
                RelationKind::Multiplicative => "multiplicative".to_string(),
            },
            height: m.height.to_string(),
            witness_error: m.witness_error.clone(),
        }
    }

    pub fn to_matrix(&self) -> Result<IntegerRelationMatrix> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| {
                        BigInt::from_str(v)
                            .map_err(|_| Error::InputParse(format!("bad integer `{v}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let kind = match self.kind.as_str() {
            "additive" => RelationKind::Additive,
            "multiplicative" => RelationKind::Multiplicative,
            other => {
                return Err(Error::InputParse(format!("bad relation kind `{other}`")));
            }
        };
        IntegerRelationMatrix::new(rows, kind, self.witness_error.clone())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TorusRecord {
    pub relation: RelationRecord,
    pub dim: usize,
    pub identity_component_matrix: Vec<Vec<String>>,
}

impl TorusRecord {
    pub fn of(t: &Torus) -> Self {
        TorusRecord {
            relation: RelationRecord::of(&t.matrix),
            dim: t.dim,
            identity_component_matrix: t
                .identity_component_matrix
                .iter()
                .map(|r| r.iter().map(|v| v.to_string()).collect())
                .collect(),
        }
    }

    pub fn to_torus(&self) -> Result<Torus> {
        Ok(Torus {
            matrix: self.relation.to_matrix()?,
            dim: self.dim,
            identity_component_matrix: self
                .identity_component_matrix
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|v| {
                            BigInt::from_str(v)
                                .map_err(|_| Error::InputParse(format!("bad integer `{v}`")))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct HyperplaneRecord {
    pub relation: RelationRecord,
    pub dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct GenericityRecord {
    pub verdict: String,
    pub relations: Vec<RelationRecord>,
    pub hyperplanes: Vec<HyperplaneRecord>,
    pub tori: Vec<TorusRecord>,
    pub height_bound: u64,
    pub precision_bits: usize,
    pub tolerance_exp: i64,
    pub td_proxy: usize,
    pub scope_note: String,
}

impl GenericityRecord {
    pub fn of(r: &GenericityReport) -> Self {
        GenericityRecord {
            verdict: match r.verdict {
                Verdict::PresumedGeneric => "presumed_generic".to_string(),
                Verdict::RelationsFound => "relations_found".to_string(),
            },
            relations: r.relations.iter().map(RelationRecord::of).collect(),
            hyperplanes: r
                .hyperplanes
                .iter()
                .map(|h| HyperplaneRecord {
                    relation: RelationRecord::of(&h.matrix),
                    dim: h.dim,
                })
                .collect(),
            tori: r.tori.iter().map(TorusRecord::of).collect(),
            height_bound: r.height_bound,
            precision_bits: r.precision_bits,
            tolerance_exp: r.tolerance_exp,
            td_proxy: r.td_proxy,
            scope_note: r.scope_note.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct DensityRecord {
    pub solutions_used: usize,
    pub degree: usize,
    pub monomial_count: usize,
    pub monomial_rank: usize,
    pub full: bool,
    pub inconclusive: bool,
    pub reason: Option<String>,
}

impl DensityRecord {
    pub fn of(e: &DensityEvidence) -> Self {
        DensityRecord {
            solutions_used: e.solutions_used,
            degree: e.degree,
            monomial_count: e.monomial_count,
            monomial_rank: e.monomial_rank,
            full: e.full,
            inconclusive: e.inconclusive,
            reason: e.reason.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SweepRecordOut {
    pub seed_k: Vec<i64>,
    pub branch_choice: Vec<usize>,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<GenericityRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub torus_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_row: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl SweepRecordOut {
    pub fn of(r: &SweepRecord) -> Self {
        let base = SweepRecordOut {
            seed_k: r.seed.k.clone(),
            branch_choice: r.seed.branch_choice.clone(),
            status: String::new(),
            solution: None,
            report: None,
            torus_index: None,
            matched_row: None,
            residual: None,
            reason: None,
        };
        match &r.outcome {
            SeedOutcome::Accepted { solution, report } => SweepRecordOut {
                status: "accepted".into(),
                solution: Some(SolutionRecord::of(solution)),
                report: Some(GenericityRecord::of(report)),
                ..base
            },
            SeedOutcome::ExcludedByTorus {
                solution,
                torus_index,
                matched_row,
                residual,
            } => SweepRecordOut {
                status: "excluded_by_torus".into(),
                solution: Some(SolutionRecord::of(solution)),
                torus_index: Some(*torus_index),
                matched_row: Some(matched_row.iter().map(|v| v.to_string()).collect()),
                residual: Some(residual.clone()),
                ..base
            },
            SeedOutcome::RelationsFound { solution, report } => SweepRecordOut {
                status: "relations_found".into(),
                solution: Some(SolutionRecord::of(solution)),
                report: Some(GenericityRecord::of(report)),
                ..base
            },
            SeedOutcome::Failed { reason } => SweepRecordOut {
                status: "failed".into(),
                reason: Some(reason.clone()),
                ..base
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SweepResultRecord {
    pub accepted: Vec<SweepRecordOut>,
    pub log: Vec<SweepRecordOut>,
    pub tori_found: Vec<TorusRecord>,
    pub budget_exhausted_without_generic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityRecord>,
}

impl SweepResultRecord {
    pub fn of(r: &SweepResult, density: Option<&DensityEvidence>) -> Self {
        SweepResultRecord {
            accepted: r
                .log
                .iter()
                .filter(|rec| matches!(rec.outcome, SeedOutcome::Accepted { .. }))
                .map(SweepRecordOut::of)
                .collect(),
            log: r.log.iter().map(SweepRecordOut::of).collect(),
            tori_found: r.tori_found.iter().map(TorusRecord::of).collect(),
            budget_exhausted_without_generic: r.budget_exhausted_without_generic,
            density: density.map(DensityRecord::of),
        }
    }
}

/// Top-level report envelope: every report carries the config echo.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub command: String,
    pub config: RunConfig,
    pub result: T,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("records serialize")
}

/// Text rendering of a triangular system in the polynomial text form.
pub fn triangular_to_text(t: &TriangularSystem) -> String {
    let vars = VarSet::Triangular { n: t.n };
    t.polys
        .iter()
        .enumerate()
        .map(|(i, p)| format!("p{} = {}", i + 1, poly_to_text(p, vars)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Text rendering of a hypothesis report.
pub fn hypothesis_to_text(r: &HypothesisReport) -> String {
    format!(
        "dim = {}\npi1_dominant = {}\npi2_dominant = {}\nsamples = {}\nprecision_bits = {}\ntolerance = 2^{}\nrng_seed = {}",
        r.dim_estimate,
        r.pi1_dominant,
        r.pi2_dominant,
        r.samples_used,
        r.precision_bits,
        r.tolerance_exp,
        r.rng_seed
    )
}

pub fn hyperplane_of(h: &Hyperplane) -> HyperplaneRecord {
    HyperplaneRecord {
        relation: RelationRecord::of(&h.matrix),
        dim: h.dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::masser::solve_masser_poly;

    #[test]
    fn input_file_roundtrip() {
        let text = r#"{
            "form": "variety",
            "n": 2,
            "generators": [
                [ {"coeff": "1", "exps": [0,0,1,0]}, {"coeff": "-1", "exps": [0,1,0,0]} ],
                [ {"coeff": "1", "exps": [0,0,0,1]}, {"coeff": "-1", "exps": [1,0,0,0]} ]
            ]
        }"#;
        let file = parse_input(text).unwrap();
        let v = variety_from_input(&file, 256).unwrap();
        assert_eq!(v.n, 2);
        assert_eq!(v.generators.len(), 2);
        let back = variety_to_input(&v);
        let v2 = variety_from_input(&back, 256).unwrap();
        assert_eq!(v.generators, v2.generators);
    }

    #[test]
    fn approx_coeff_parsing() {
        let text = r#"{
            "form": "variety",
            "n": 1,
            "generators": [
                [ {"coeff": "1", "exps": [0,1]}, {"coeff": "@c", "exps": [0,0]} ]
            ],
            "approx_coeffs": [
                {"name": "c", "value_re": "-1.414213562373095", "value_im": "0", "radius": "1e-15"}
            ]
        }"#;
        let file = parse_input(text).unwrap();
        let v = variety_from_input(&file, 256).unwrap();
        assert_eq!(v.generators.len(), 0);
        assert_eq!(v.approx_generators.len(), 1);
        // unknown reference errors
        let bad = text.replace("@c", "@missing");
        let file = parse_input(&bad).unwrap();
        assert!(variety_from_input(&file, 256).is_err());
    }

    #[test]
    fn solution_record_roundtrip_bit_exact() {
        let sol = solve_masser_poly(
            &[MultiPoly::var(1, 0)],
            &Seed::first_branch(vec![1]).unwrap(),
            &RunConfig::default(),
        )
        .unwrap();
        let rec = SolutionRecord::of(&sol);
        let json = to_json(&rec);
        let back: SolutionRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(rec, back);
        let sol2 = back.to_solution().unwrap();
        assert_eq!(sol.z[0], sol2.z[0]);
        assert_eq!(sol.y[0], sol2.y[0]);
        // re-serializing is byte-identical
        assert_eq!(json, to_json(&SolutionRecord::of(&sol2)));
    }

    #[test]
    fn triangular_input_rejects_bad_systems() {
        let text = r#"{
            "form": "triangular",
            "n": 1,
            "polys": [ [ {"coeff": "1", "exps": [0,1]} ] ]
        }"#;
        let file = parse_input(text).unwrap();
        assert!(triangular_from_input(&file).is_err(), "u alone is constant*u");
    }
}
