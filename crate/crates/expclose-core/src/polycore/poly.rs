//! Sparse multivariate polynomials over Q(i).
//!
//! Terms live in a `BTreeMap` keyed by exponent vectors (lexicographic order),
//! which keeps every iteration deterministic. No zero coefficients are stored.

use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::polycore::gaussian::GaussianRational;
use crate::polycore::mpc::MPComplex;

pub type Monomial = Vec<u32>;

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    pub num_vars: usize,
    pub terms: BTreeMap<Monomial, GaussianRational>,
}

impl MultiPoly {
    pub fn zero(num_vars: usize) -> Self {
        MultiPoly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: GaussianRational, num_vars: usize) -> Self {
        let mut p = Self::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; num_vars], c);
        }
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(GaussianRational::one(), num_vars)
    }

    pub fn var(num_vars: usize, index: usize) -> Self {
        assert!(index < num_vars, "variable index out of range");
        let mut exps = vec![0; num_vars];
        exps[index] = 1;
        let mut p = Self::zero(num_vars);
        p.terms.insert(exps, GaussianRational::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, exps: Monomial, coeff: GaussianRational) {
        debug_assert_eq!(exps.len(), self.num_vars);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = &*e.get() + &coeff;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.num_vars, rhs.num_vars);
        let mut out = Self::zero(self.num_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let exps: Monomial = m1.iter().zip(m2.iter()).map(|(a, b)| a + b).collect();
                out.add_term(exps, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.num_vars);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m[var]).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Formal partial derivative with respect to `var`.
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.num_vars {
            return Err(Error::VarIndexOutOfRange {
                index: var,
                num_vars: self.num_vars,
            });
        }
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            if m[var] == 0 {
                continue;
            }
            let mut e = m.clone();
            let k = e[var];
            e[var] -= 1;
            out.add_term(e, c * &GaussianRational::from_int(k as i64));
        }
        Ok(out)
    }

    /// Evaluates at a complex point via per-variable power tables.
    pub fn eval(&self, point: &[MPComplex]) -> Result<MPComplex> {
        if point.len() != self.num_vars {
            return Err(Error::ArityMismatch {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        let p = point.iter().map(|z| z.p()).max().unwrap_or(64);
        // power tables up to the max degree per variable
        let mut powers: Vec<Vec<MPComplex>> = Vec::with_capacity(self.num_vars);
        for v in 0..self.num_vars {
            let d = self.degree_in(v) as usize;
            let mut tab = Vec::with_capacity(d + 1);
            tab.push(MPComplex::one(p));
            for k in 1..=d {
                let prev = &tab[k - 1];
                tab.push(prev.mul(&point[v]));
            }
            powers.push(tab);
        }
        let mut acc = MPComplex::zero(p);
        for (m, c) in &self.terms {
            let mut t = MPComplex::from_gaussian(c, p);
            for (v, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[v][e as usize]);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// Exact evaluation at a Q(i) point.
    pub fn eval_exact(&self, point: &[GaussianRational]) -> Result<GaussianRational> {
        if point.len() != self.num_vars {
            return Err(Error::ArityMismatch {
                expected: self.num_vars,
                got: point.len(),
            });
        }
        let mut acc = GaussianRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t = &t * &point[v];
                }
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// Coefficients with respect to `var`: entry d is the coefficient of var^d,
    /// a polynomial in the same variable space with var-degree zero.
    pub fn coeffs_in(&self, var: usize) -> Vec<MultiPoly> {
        let d = self.degree_in(var) as usize;
        let mut out = vec![Self::zero(self.num_vars); d + 1];
        for (m, c) in &self.terms {
            let k = m[var] as usize;
            let mut e = m.clone();
            e[var] = 0;
            out[k].add_term(e, c.clone());
        }
        out
    }

    /// Leading term in the map's lexicographic order.
    pub fn leading(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.iter().next_back()
    }

    /// Remaps variables: `new[i] = old[mapping[i]]`; variables not listed must
    /// not occur. Used to project a 2n-variable eliminant onto (x_1..x_n, u).
    pub fn project_vars(&self, mapping: &[usize], new_num_vars: usize) -> Result<Self> {
        let mut keep = vec![usize::MAX; self.num_vars];
        for (new_idx, &old_idx) in mapping.iter().enumerate() {
            keep[old_idx] = new_idx;
        }
        let mut out = Self::zero(new_num_vars);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; new_num_vars];
            for (old_idx, &exp) in m.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                if keep[old_idx] == usize::MAX {
                    return Err(Error::VarIndexOutOfRange {
                        index: old_idx,
                        num_vars: new_num_vars,
                    });
                }
                e[keep[old_idx]] = exp;
            }
            out.add_term(e, c.clone());
        }
        Ok(out)
    }

    /// Embeds into a larger variable space: `new[mapping[i]] = old[i]`.
    pub fn embed_vars(&self, mapping: &[usize], new_num_vars: usize) -> Self {
        debug_assert_eq!(mapping.len(), self.num_vars);
        let mut out = Self::zero(new_num_vars);
        for (m, c) in &self.terms {
            let mut e = vec![0u32; new_num_vars];
            for (old_idx, &exp) in m.iter().enumerate() {
                e[mapping[old_idx]] = exp;
            }
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn guard_terms(&self, bound: usize) -> Result<()> {
        if self.terms.len() > bound {
            return Err(Error::TermBudgetExceeded {
                count: self.terms.len(),
                bound,
            });
        }
        Ok(())
    }
}

/// Variable naming for the text form: x1..xn, y1..yn for variety polynomials
/// (2n variables) and x1..xn, u for triangular ones (n+1 variables).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarSet {
    Variety { n: usize },
    Triangular { n: usize },
}

impl VarSet {
    pub fn num_vars(&self) -> usize {
        match self {
            VarSet::Variety { n } => 2 * n,
            VarSet::Triangular { n } => n + 1,
        }
    }

    pub fn name(&self, index: usize) -> String {
        match self {
            VarSet::Variety { n } => {
                if index < *n {
                    format!("x{}", index + 1)
                } else {
                    format!("y{}", index - n + 1)
                }
            }
            VarSet::Triangular { n } => {
                if index < *n {
                    format!("x{}", index + 1)
                } else {
                    "u".to_string()
                }
            }
        }
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        let bad = || Error::PolyParse(format!("unknown variable `{name}`"));
        match self {
            VarSet::Variety { n } => {
                let (head, num) = name.split_at(1);
                let k: usize = num.parse().map_err(|_| bad())?;
                if k == 0 || k > *n {
                    return Err(bad());
                }
                match head {
                    "x" => Ok(k - 1),
                    "y" => Ok(n + k - 1),
                    _ => Err(bad()),
                }
            }
            VarSet::Triangular { n } => {
                if name == "u" {
                    return Ok(*n);
                }
                let (head, num) = name.split_at(1);
                if head != "x" {
                    return Err(bad());
                }
                let k: usize = num.parse().map_err(|_| bad())?;
                if k == 0 || k > *n {
                    return Err(bad());
                }
                Ok(k - 1)
            }
        }
    }
}

/// Renders the text form `coeff * x1^e1 * ...`; complex coefficients are
/// parenthesized so terms can be split on ` + `.
pub fn poly_to_text(p: &MultiPoly, vars: VarSet) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (m, c) in &p.terms {
        let constant_mono = m.iter().all(|&e| e == 0);
        let mut factors = Vec::new();
        let is_one = c.im.is_zero() && c.re == num_rational::BigRational::from_integer(1.into());
        if constant_mono || !is_one {
            factors.push(if c.im.is_zero() {
                c.to_string()
            } else {
                format!("({c})")
            });
        }
        for (v, &e) in m.iter().enumerate() {
            if e == 1 {
                factors.push(vars.name(v));
            } else if e > 1 {
                factors.push(format!("{}^{}", vars.name(v), e));
            }
        }
        parts.push(factors.join("*"));
    }
    parts.join(" + ")
}

/// Parses the text form produced by `poly_to_text`.
pub fn poly_from_text(s: &str, vars: VarSet) -> Result<MultiPoly> {
    let nv = vars.num_vars();
    let mut out = MultiPoly::zero(nv);
    let s = s.trim();
    if s == "0" {
        return Ok(out);
    }
    // splits on '*' only at paren depth zero
    fn split_factors(term: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let mut depth = 0usize;
        let mut start = 0usize;
        for (k, ch) in term.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                '*' if depth == 0 => {
                    out.push(&term[start..k]);
                    start = k + 1;
                }
                _ => {}
            }
        }
        out.push(&term[start..]);
        out
    }
    for term in s.split(" + ") {
        let term = term.trim();
        let mut exps = vec![0u32; nv];
        let mut coeff = GaussianRational::one();
        for factor in split_factors(term) {
            let f = factor.trim();
            if f.is_empty() {
                return Err(Error::PolyParse(format!("empty factor in `{term}`")));
            }
            if f.starts_with('(') {
                let inner = f
                    .strip_prefix('(')
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(|| Error::PolyParse(format!("unbalanced parens in `{f}`")))?;
                coeff = &coeff * &GaussianRational::parse(inner)?;
            } else if f == "i" || f == "-i" {
                coeff = &coeff * &GaussianRational::parse(f)?;
            } else if f.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
                let (name, exp) = match f.split_once('^') {
                    Some((n, e)) => {
                        let e: u32 = e
                            .parse()
                            .map_err(|_| Error::PolyParse(format!("bad exponent in `{f}`")))?;
                        (n, e)
                    }
                    None => (f, 1),
                };
                exps[vars.index(name)?] += exp;
            } else {
                coeff = &coeff * &GaussianRational::parse(f)?;
            }
        }
        out.add_term(exps, coeff);
    }
    Ok(out)
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MultiPoly[{} vars, {} terms]",
            self.num_vars,
            self.terms.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::mpc::{pow2, real_cmp};
    use std::cmp::Ordering;

    const P: usize = 256;

    fn gr(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    #[test]
    fn eval_cancellation() {
        // x1 + x2 at (1, -1) -> 0
        let p = MultiPoly::var(2, 0).add(&MultiPoly::var(2, 1));
        let v = p
            .eval(&[MPComplex::from_i64(1, 0, P), MPComplex::from_i64(-1, 0, P)])
            .unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn eval_i_times_minus_i() {
        // x1*x2 - 1 at (i, -i) -> 0
        let p = MultiPoly::var(2, 0)
            .mul(&MultiPoly::var(2, 1))
            .sub(&MultiPoly::one(2));
        let v = p
            .eval(&[MPComplex::from_i64(0, 1, P), MPComplex::from_i64(0, -1, P)])
            .unwrap();
        assert!(v.is_zero());
    }

    #[test]
    fn eval_square_derived() {
        // u - x1^2 at (3+4i, -7+24i) -> 0, since (3+4i)^2 = -7+24i
        let x = MultiPoly::var(2, 0);
        let u = MultiPoly::var(2, 1);
        let p = u.sub(&x.mul(&x));
        let v = p
            .eval(&[MPComplex::from_i64(3, 4, P), MPComplex::from_i64(-7, 24, P)])
            .unwrap();
        let mag = v.abs();
        assert!(real_cmp(&mag, &pow2(-200, P)) == Ordering::Less);
    }

    #[test]
    fn eval_arity_mismatch() {
        let p = MultiPoly::var(2, 0);
        assert!(matches!(
            p.eval(&[MPComplex::one(P)]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn partial_examples() {
        // d/dx1 (x1^2 x2) = 2 x1 x2
        let x1 = MultiPoly::var(2, 0);
        let x2 = MultiPoly::var(2, 1);
        let p = x1.pow(2).mul(&x2);
        let d = p.partial(0).unwrap();
        let expect = x1.mul(&x2).scale(&gr(2));
        assert_eq!(d, expect);
        // d/dx2 (x1) = 0
        assert!(x1.partial(1).unwrap().is_zero());
        // d/du (u^3 - x1 u) = 3u^2 - x1 in vars (x1, u)
        let u = MultiPoly::var(2, 1);
        let q = u.pow(3).sub(&x1.mul(&u));
        let dq = q.partial(1).unwrap();
        let expect = u.pow(2).scale(&gr(3)).sub(&x1);
        assert_eq!(dq, expect);
    }

    #[test]
    fn text_roundtrip() {
        let vars = VarSet::Variety { n: 2 };
        let x1 = MultiPoly::var(4, 0);
        let y2 = MultiPoly::var(4, 3);
        let p = x1
            .pow(2)
            .scale(&GaussianRational::from_parts(1, 2, -3, 4))
            .add(&y2.scale(&gr(-2)))
            .add(&MultiPoly::one(4));
        let text = poly_to_text(&p, vars);
        let back = poly_from_text(&text, vars).unwrap();
        assert_eq!(p, back, "text was: {text}");
    }

    #[test]
    fn triangular_text_roundtrip() {
        let vars = VarSet::Triangular { n: 2 };
        // x1*u - 1
        let p = MultiPoly::var(3, 0)
            .mul(&MultiPoly::var(3, 2))
            .sub(&MultiPoly::one(3));
        let text = poly_to_text(&p, vars);
        assert_eq!(text, "-1 + x1*u");
        assert_eq!(poly_from_text(&text, vars).unwrap(), p);
    }

    #[test]
    fn project_and_embed() {
        // y2 - x1 in 4 vars (n=2) projected to (x1, x2, u) with u = y2
        let p = MultiPoly::var(4, 3).sub(&MultiPoly::var(4, 0));
        let t = p.project_vars(&[0, 1, 3], 3).unwrap();
        let expect = MultiPoly::var(3, 2).sub(&MultiPoly::var(3, 0));
        assert_eq!(t, expect);
        // projecting a poly that uses y1 with the same mapping fails
        let q = MultiPoly::var(4, 2);
        assert!(q.project_vars(&[0, 1, 3], 3).is_err());
        // embed back
        let back = expect.embed_vars(&[0, 1, 3], 4);
        assert_eq!(back, p);
    }
}
