//! Differential monomials `b(z) Π (f^{(i)})^{q_i}` and polynomials (sums of
//! them), with their degree/weight statistics.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{differentiate, MeroExpr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffPolyError {
    #[error("monomial needs at least one positive exponent")]
    NoPositiveExponent,
    #[error("monomial coefficient must be a rational function of z")]
    NonRationalCoefficient,
    #[error("polynomial needs at least one monomial")]
    Empty,
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
}

/// `coeff · Π_i (f^{(i)})^{exponents[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMonomial {
    coeff: MeroExpr,
    exponents: Vec<u32>,
}

impl DiffMonomial {
    pub fn new(coeff: MeroExpr, exponents: Vec<u32>) -> Result<Self, DiffPolyError> {
        if !exponents.iter().any(|&q| q > 0) {
            return Err(DiffPolyError::NoPositiveExponent);
        }
        if !coeff.is_rational() {
            return Err(DiffPolyError::NonRationalCoefficient);
        }
        let mut exponents = exponents;
        while exponents.last() == Some(&0) {
            exponents.pop();
        }
        Ok(DiffMonomial { coeff, exponents })
    }

    /// Monomial with coefficient one.
    pub fn unit(exponents: Vec<u32>) -> Result<Self, DiffPolyError> {
        Self::new(MeroExpr::one(), exponents)
    }

    pub fn coeff(&self) -> &MeroExpr {
        &self.coeff
    }

    /// Exponent of `f^{(i)}` (zero past the order).
    pub fn exponent(&self, i: usize) -> u32 {
        self.exponents.get(i).copied().unwrap_or(0)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn weight(&self) -> u32 {
        self.exponents.iter().enumerate().map(|(i, &q)| (i as u32 + 1) * q).sum()
    }

    /// `Σ i·q_i`, the weight in excess of the degree.
    pub fn derivative_weight(&self) -> u32 {
        self.exponents.iter().enumerate().map(|(i, &q)| i as u32 * q).sum()
    }

    /// Highest derivative index present.
    pub fn order(&self) -> usize {
        self.exponents.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffPolynomial {
    monomials: Vec<DiffMonomial>,
}

/// Statistics of a differential polynomial. `nu` is the largest
/// derivative weight, `qstar`/`qkstar` the smallest exponents of `f` and of
/// `f^{(k)}` across monomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PolyStats {
    pub d_max: u32,
    pub d_min: u32,
    pub gamma: u32,
    pub nu: u32,
    pub qstar: u32,
    pub qkstar: u32,
    pub k: usize,
    pub homogeneous: bool,
}

impl PolyStats {
    /// Degree of a homogeneous polynomial (the upper degree otherwise).
    pub fn d(&self) -> u32 {
        self.d_max
    }
}

impl DiffPolynomial {
    pub fn new(monomials: Vec<DiffMonomial>) -> Result<Self, DiffPolyError> {
        if monomials.is_empty() {
            return Err(DiffPolyError::Empty);
        }
        Ok(DiffPolynomial { monomials })
    }

    pub fn monomial(m: DiffMonomial) -> Self {
        DiffPolynomial { monomials: vec![m] }
    }

    /// Unit-coefficient polynomial from exponent vectors.
    pub fn from_exponents(rows: &[&[u32]]) -> Result<Self, DiffPolyError> {
        Self::new(rows.iter().map(|r| DiffMonomial::unit(r.to_vec())).collect::<Result<_, _>>()?)
    }

    pub fn monomials(&self) -> &[DiffMonomial] {
        &self.monomials
    }

    pub fn order(&self) -> usize {
        self.monomials.iter().map(DiffMonomial::order).max().unwrap_or(0)
    }

    pub fn stats(&self) -> PolyStats {
        let k = self.order();
        let ms = &self.monomials;
        let d_max = ms.iter().map(DiffMonomial::degree).max().unwrap_or(0);
        let d_min = ms.iter().map(DiffMonomial::degree).min().unwrap_or(0);
        PolyStats {
            d_max,
            d_min,
            gamma: ms.iter().map(DiffMonomial::weight).max().unwrap_or(0),
            nu: ms.iter().map(DiffMonomial::derivative_weight).max().unwrap_or(0),
            qstar: ms.iter().map(|m| m.exponent(0)).min().unwrap_or(0),
            qkstar: ms.iter().map(|m| m.exponent(k)).min().unwrap_or(0),
            k,
            homogeneous: d_max == d_min,
        }
    }

    /// Concatenation of monomial lists.
    pub fn plus(&self, other: &DiffPolynomial) -> DiffPolynomial {
        let mut monomials = self.monomials.clone();
        monomials.extend(other.monomials.iter().cloned());
        DiffPolynomial { monomials }
    }

    /// True for a single monomial with a nonzero constant coefficient.
    pub fn is_constant_monomial(&self) -> bool {
        matches!(self.monomials.as_slice(), [m] if m.coeff.as_const().is_some_and(|c| c.norm() > 0.0))
    }
}

/// `P[f]` as an expression. Derivatives of `f` are computed once and shared.
pub fn apply(p: &DiffPolynomial, f: &MeroExpr) -> MeroExpr {
    let k = p.order();
    let mut ders = vec![f.clone()];
    for i in 0..k {
        let next = differentiate(&ders[i]);
        ders.push(next);
    }
    MeroExpr::add(p.monomials.iter().map(|m| {
        let mut factors = vec![m.coeff.clone()];
        for (i, &q) in m.exponents.iter().enumerate() {
            if q > 0 {
                factors.push(MeroExpr::powi(ders[i].clone(), q as i32));
            }
        }
        MeroExpr::mul(factors)
    }))
}

/// Checks whose hypotheses are statements about `P`.
pub const POLYNOMIAL_CHECKS: [&str; 8] = ["thm_1", "thm_2", "thm_3", "thm_e", "thm_f", "thm_g", "lem_35", "lem_36"];

/// Hypothesis clauses of a check that `p` fails, as readable messages.
/// Empty means the check applies.
pub fn validate_hypotheses(p: &DiffPolynomial, check_id: &str) -> Result<Vec<String>, DiffPolyError> {
    let s = p.stats();
    let ms = p.monomials();
    let mut v = Vec::new();
    let min_q0 = ms.iter().map(|m| m.exponent(0)).min().unwrap_or(0);
    let min_qk = s.qkstar;
    let homogeneous = |v: &mut Vec<String>| {
        if !s.homogeneous {
            v.push(format!("not homogeneous (degrees {}..{})", s.d_min, s.d_max));
        }
    };
    let lower = |v: &mut Vec<String>, q0: u32, qk: u32| {
        if min_q0 < q0 {
            v.push(format!("q0={min_q0} < {q0}"));
        }
        if min_qk < qk {
            v.push(format!("q{}={min_qk} < {qk}", s.k));
        }
    };
    let single = |v: &mut Vec<String>| {
        if !p.is_constant_monomial() {
            v.push("needs a single monomial with a nonzero constant coefficient".to_string());
        }
    };
    let d = s.d() as i64;
    let nu = s.nu as i64;
    let k = s.k as i64;
    match check_id {
        "thm_1" | "thm_e" => {
            if check_id == "thm_e" {
                single(&mut v);
            }
            homogeneous(&mut v);
            if s.k < 2 {
                v.push(format!("k={} < 2", s.k));
            }
            lower(&mut v, 2, 2);
        }
        "thm_2" | "thm_f" => {
            if check_id == "thm_f" {
                single(&mut v);
            }
            homogeneous(&mut v);
            if s.k < 1 {
                v.push("k=0 < 1".to_string());
            }
            lower(&mut v, 1, 1);
            if d - nu <= 2 {
                v.push(format!("d-nu={} <= 2", d - nu));
            }
        }
        "thm_g" => {
            single(&mut v);
            if s.k < 1 {
                v.push("k=0 < 1".to_string());
            }
            lower(&mut v, 1, 1);
            if d - nu < 5 - min_q0 as i64 {
                v.push(format!("d-nu={} < 5-q0={}", d - nu, 5 - min_q0 as i64));
            }
        }
        "thm_3" => {
            homogeneous(&mut v);
            if s.k < 1 {
                v.push("k=0 < 1".to_string());
            }
            lower(&mut v, 1, 1);
            let lhs = d + k * s.qstar as i64;
            let rhs = 2 * (k + 1) + nu;
            if lhs <= rhs {
                v.push(format!("d+k*q*={lhs} <= 2(k+1)+nu={rhs}"));
            }
        }
        "lem_35" => {
            homogeneous(&mut v);
            lower(&mut v, 1, 0);
        }
        "lem_36" => {
            homogeneous(&mut v);
            lower(&mut v, 1, 1);
        }
        other => return Err(DiffPolyError::UnknownCheck(other.to_string())),
    }
    Ok(v)
}
