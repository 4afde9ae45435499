//! Per-radius inequality checks with hypothesis validation and an
//! asymptotic verdict.
//!
//! Each check is written as `lhs ≤ rhs + S(r, f)` with both sides linear
//! combinations of characteristics and counting functions. The error term
//! is not modelled pointwise; instead rows are normalized by `max(T(r,f),1)`
//! and the verdict looks at the median over the largest radii.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::diffpoly::{apply, validate_hypotheses, DiffPolyError, DiffPolynomial, PolyStats};
use crate::expr::identity::is_identically_zero_with;
use crate::expr::{
    differentiate, is_constant, is_identically_zero, nth_derivative, ConstTest, IdentityConfig, MeroExpr, ZeroTest,
};
use crate::locator::divisor_subtract;
use crate::nevanlinna::{counting, radius_grid, CountMode, DivisorTable, NevConfig, NevError};

#[cfg(test)]
mod tests;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("check `{0}` needs a differential polynomial")]
    MissingPolynomial(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("verdict needs at least 8 rows, got {0}")]
    TooFewRows(usize),
    #[error(transparent)]
    Numerical(#[from] NevError),
}

impl From<DiffPolyError> for CheckError {
    fn from(e: DiffPolyError) -> Self {
        match e {
            DiffPolyError::UnknownCheck(s) => CheckError::UnknownCheck(s),
            other => CheckError::BadParameter(other.to_string()),
        }
    }
}

/// A check together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum CheckId {
    ThmA,
    ThmB { k: u32 },
    ThmC { n: u32, p: u32, k: u32, alpha: MeroExpr, a: MeroExpr },
    ThmD { l: u32, n: u32, k: u32 },
    ThmE,
    ThmF,
    ThmG,
    Thm1,
    Thm2,
    Thm3,
    Lem31,
    Lem32 { k: u32 },
    Lem33,
    Lem35,
    Lem36,
}

pub const CHECK_NAMES: [&str; 15] = [
    "thm_a", "thm_b", "thm_c", "thm_d", "thm_e", "thm_f", "thm_g", "thm_1", "thm_2", "thm_3", "lem_31", "lem_32",
    "lem_33", "lem_35", "lem_36",
];

/// Optional parameters; unset ones take the defaults of each check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckParams {
    pub k: Option<u32>,
    pub l: Option<u32>,
    pub n: Option<u32>,
    pub p: Option<u32>,
    pub alpha: Option<MeroExpr>,
    pub a: Option<MeroExpr>,
}

impl CheckId {
    pub fn build(name: &str, params: &CheckParams) -> Result<CheckId, CheckError> {
        let k = |d| params.k.unwrap_or(d);
        let used = |allowed: &[&str]| -> Result<(), CheckError> {
            let set = [
                ("k", params.k.is_some()),
                ("l", params.l.is_some()),
                ("n", params.n.is_some()),
                ("p", params.p.is_some()),
                ("alpha", params.alpha.is_some()),
                ("a", params.a.is_some()),
            ];
            match set.iter().find(|(name, on)| *on && !allowed.contains(name)) {
                Some((p, _)) => Err(CheckError::BadParameter(format!("`{name}` takes no parameter `{p}`"))),
                None => Ok(()),
            }
        };
        let id = match name {
            "thm_a" => CheckId::ThmA,
            "thm_b" => {
                used(&["k"])?;
                CheckId::ThmB { k: k(1) }
            }
            "thm_c" => {
                used(&["k", "n", "p", "alpha", "a"])?;
                CheckId::ThmC {
                    n: params.n.unwrap_or(1),
                    p: params.p.unwrap_or(1),
                    k: k(1),
                    alpha: params.alpha.clone().unwrap_or_else(MeroExpr::one),
                    a: params.a.clone().unwrap_or_else(MeroExpr::one),
                }
            }
            "thm_d" => {
                used(&["k", "l", "n"])?;
                CheckId::ThmD { l: params.l.unwrap_or(3), n: params.n.unwrap_or(1), k: k(1) }
            }
            "lem_32" => {
                used(&["k"])?;
                CheckId::Lem32 { k: k(2) }
            }
            _ => {
                used(&[])?;
                match name {
                    "thm_e" => CheckId::ThmE,
                    "thm_f" => CheckId::ThmF,
                    "thm_g" => CheckId::ThmG,
                    "thm_1" => CheckId::Thm1,
                    "thm_2" => CheckId::Thm2,
                    "thm_3" => CheckId::Thm3,
                    "lem_31" => CheckId::Lem31,
                    "lem_33" => CheckId::Lem33,
                    "lem_35" => CheckId::Lem35,
                    "lem_36" => CheckId::Lem36,
                    other => return Err(CheckError::UnknownCheck(other.to_string())),
                }
            }
        };
        Ok(id)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CheckId::ThmA => "thm_a",
            CheckId::ThmB { .. } => "thm_b",
            CheckId::ThmC { .. } => "thm_c",
            CheckId::ThmD { .. } => "thm_d",
            CheckId::ThmE => "thm_e",
            CheckId::ThmF => "thm_f",
            CheckId::ThmG => "thm_g",
            CheckId::Thm1 => "thm_1",
            CheckId::Thm2 => "thm_2",
            CheckId::Thm3 => "thm_3",
            CheckId::Lem31 => "lem_31",
            CheckId::Lem32 { .. } => "lem_32",
            CheckId::Lem33 => "lem_33",
            CheckId::Lem35 => "lem_35",
            CheckId::Lem36 => "lem_36",
        }
    }

    /// Checks whose statement involves a differential polynomial.
    pub fn needs_polynomial(&self) -> bool {
        matches!(
            self,
            CheckId::ThmE
                | CheckId::ThmF
                | CheckId::ThmG
                | CheckId::Thm1
                | CheckId::Thm2
                | CheckId::Thm3
                | CheckId::Lem33
                | CheckId::Lem35
                | CheckId::Lem36
        )
    }

    /// Equality rather than inequality.
    pub fn is_equality(&self) -> bool {
        matches!(self, CheckId::Lem31)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckId::ThmB { k } | CheckId::Lem32 { k } => write!(f, "{}(k={k})", self.name()),
            CheckId::ThmC { n, p, k, alpha, a } => write!(f, "thm_c(n={n},p={p},k={k},alpha={alpha},a={a})"),
            CheckId::ThmD { l, n, k } => write!(f, "thm_d(l={l},n={n},k={k})"),
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
    HypothesisViolation,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Vacuous => "vacuous",
            Verdict::HypothesisViolation => "hypothesis_violation",
        })
    }
}

/// Numerical tolerances of a check run.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Pass threshold for the top-quartile median residual.
    pub epsilon: f64,
    /// Absolute tolerance of equality checks.
    pub equality_tol: f64,
    pub nev: NevConfig,
    /// Seed of the sampled identity test used for the vacuity decision.
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { epsilon: 0.05, equality_tol: 5e-3, nev: NevConfig::default(), seed: IdentityConfig::default().seed }
    }
}

/// How the unmodelled error term is absorbed.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SlackModel {
    pub epsilon: f64,
    pub normalization: &'static str,
    pub statistic: &'static str,
    pub equality_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckRow {
    pub requested_r: f64,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// `T(r, f)` used for the normalization.
    pub t: f64,
    pub perturbed_r: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowFailure {
    pub requested_r: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_id: String,
    pub violations: Vec<String>,
    pub rows: Vec<CheckRow>,
    pub failures: Vec<RowFailure>,
    pub verdict: Verdict,
    pub worst_residual: Option<f64>,
    pub slack: SlackModel,
    pub stats: Option<PolyStats>,
}

/// Median of the residuals of the largest quarter of the radii (rows
/// must be sorted by radius).
pub fn top_quartile_median(residuals: &[f64]) -> f64 {
    let n = residuals.len();
    let q = n.div_ceil(4);
    let mut top: Vec<f64> = residuals[n - q..].to_vec();
    top.sort_by(f64::total_cmp);
    if q % 2 == 1 {
        top[q / 2]
    } else {
        0.5 * (top[q / 2 - 1] + top[q / 2])
    }
}

/// Pass iff the top-quartile median residual is at most `epsilon`.
pub fn verdict(residuals: &[f64], epsilon: f64) -> Result<Verdict, CheckError> {
    if residuals.len() < 8 {
        return Err(CheckError::TooFewRows(residuals.len()));
    }
    Ok(if top_quartile_median(residuals) <= epsilon { Verdict::Pass } else { Verdict::Fail })
}

/// Pass iff every `|lhs − rhs|` is within `tol`.
pub fn equality_verdict(diffs: &[f64], tol: f64) -> Result<Verdict, CheckError> {
    if diffs.len() < 8 {
        return Err(CheckError::TooFewRows(diffs.len()));
    }
    Ok(if diffs.iter().all(|d| d.abs() <= tol) { Verdict::Pass } else { Verdict::Fail })
}

/// The 32 log-spaced radii in `[2, 40]`.
pub fn default_radii() -> Vec<f64> {
    radius_grid(2.0, 40.0, 32, true)
}

/// The constant in front of the counting term, as a function of the
/// polynomial statistics. `None` for checks without such a constant.
pub fn multiplier(id: &CheckId, s: &PolyStats) -> Option<f64> {
    let d = s.d() as f64;
    let nu = s.nu as f64;
    let k = s.k as f64;
    let q = s.qstar as f64;
    Some(match id {
        CheckId::ThmA | CheckId::ThmB { .. } => 6.0,
        CheckId::ThmD { l, .. } => 1.0 / (*l as f64 - 2.0),
        CheckId::Thm1 | CheckId::ThmE => 1.0 / (q - 1.0),
        CheckId::Thm2 | CheckId::ThmF => 1.0 / (d - nu - 2.0),
        CheckId::Thm3 => (k + 1.0) / (d + k * q - nu - 2.0 * (k + 1.0)),
        CheckId::ThmG => 1.0 / (d - nu - 4.0 + q),
        _ => return None,
    })
}

/// One ingredient of a side of a check.
#[derive(Debug, Clone)]
enum Term {
    /// `T(r, e)`.
    Char(MeroExpr),
    /// Counting function of the zeros (or poles) of `e`.
    Zeros(MeroExpr, CountMode),
    Poles(MeroExpr, CountMode),
    /// Zeros of the first expression with those of the second removed
    /// pointwise.
    ZerosMinus(MeroExpr, MeroExpr),
}

impl Term {
    fn exprs(&self) -> Vec<&MeroExpr> {
        match self {
            Term::Char(e) | Term::Zeros(e, _) | Term::Poles(e, _) => vec![e],
            Term::ZerosMinus(a, b) => vec![a, b],
        }
    }

    fn value(&self, table: &DivisorTable, r: f64, cfg: &NevConfig) -> Result<f64, NevError> {
        Ok(match self {
            Term::Char(e) => table.characteristic_at(e, r, cfg)?.t,
            Term::Zeros(e, mode) => counting(table.zeros(e), r, *mode),
            Term::Poles(e, mode) => counting(table.poles(e), r, *mode),
            Term::ZerosMinus(a, b) => {
                let d = divisor_subtract(table.zeros(a), table.zeros(b))?;
                counting(&d, r, CountMode::Full)
            }
        })
    }
}

type Side = Vec<(f64, Term)>;

fn side_value(side: &Side, table: &DivisorTable, r: f64, cfg: &NevConfig) -> Result<f64, NevError> {
    side.iter().try_fold(0.0, |acc, (c, t)| Ok(acc + c * t.value(table, r, cfg)?))
}

fn minus_one(e: MeroExpr) -> MeroExpr {
    e - MeroExpr::one()
}

fn hypotheses(id: &CheckId, f: &MeroExpr, p: Option<&DiffPolynomial>) -> Result<Vec<String>, CheckError> {
    let mut v = Vec::new();
    if let Some(p) = p.filter(|_| id.needs_polynomial()) {
        // Lem33 only needs the polynomial to exist.
        if !matches!(id, CheckId::Lem33) {
            v.extend(validate_hypotheses(p, id.name())?);
        }
    }
    match id {
        CheckId::Lem31 => {
            if !matches!(is_constant(f), ConstTest::NonConstant) {
                v.push("g must be non-constant".to_string());
            }
        }
        _ => {
            if f.is_rational() {
                v.push("f must be transcendental".to_string());
            }
        }
    }
    match id {
        CheckId::ThmB { k } if *k < 1 => v.push("k=0 < 1".to_string()),
        CheckId::ThmC { p, k, alpha, a, .. } => {
            if *p < 1 {
                v.push("p=0 < 1".to_string());
            }
            if *k < 1 {
                v.push("k=0 < 1".to_string());
            }
            for (name, e) in [("alpha", alpha), ("a", a)] {
                if !e.is_rational() {
                    v.push(format!("{name} must be a rational function"));
                } else if is_identically_zero(e) == ZeroTest::Zero {
                    v.push(format!("{name} must not vanish identically"));
                }
            }
        }
        CheckId::ThmD { l, n, k } => {
            if *l < 3 {
                v.push(format!("l={l} < 3"));
            }
            if *n < 1 {
                v.push("n=0 < 1".to_string());
            }
            if *k < 1 {
                v.push("k=0 < 1".to_string());
            }
        }
        CheckId::Lem32 { k } if *k < 2 => v.push(format!("k={k} < 2")),
        _ => {}
    }
    Ok(v)
}

/// `(lhs, rhs)` of a check, with `f` its function and `pf = P[f]`.
fn sides(id: &CheckId, f: &MeroExpr, pf: Option<&MeroExpr>, s: Option<&PolyStats>) -> (Side, Side) {
    use CountMode::*;
    let tf = || Term::Char(f.clone());
    let pf1 = || minus_one(pf.expect("polynomial").clone());
    let stats = || s.expect("polynomial");
    let mult = |id: &CheckId| multiplier(id, stats()).expect("check has a multiplier");
    match id {
        CheckId::ThmA | CheckId::ThmB { .. } => {
            let k = if let CheckId::ThmB { k } = id { *k as usize } else { 1 };
            let h = minus_one(MeroExpr::powi(f.clone(), 2) * nth_derivative(f, k));
            (vec![(1.0, tf())], vec![(6.0, Term::Zeros(h, Full))])
        }
        CheckId::ThmC { n, p, k, alpha, a } => {
            let psi = MeroExpr::mul([
                alpha.clone(),
                if *n == 0 { MeroExpr::one() } else { MeroExpr::powi(f.clone(), *n as i32) },
                MeroExpr::powi(nth_derivative(f, *k as usize), *p as i32),
            ]);
            let lhs = vec![((p + n) as f64, tf())];
            let rhs = vec![
                (1.0, Term::Poles(f.clone(), Reduced)),
                (1.0, Term::Zeros(f.clone(), Reduced)),
                (*p as f64, Term::Zeros(f.clone(), Capped(*k))),
                (1.0, Term::Zeros(psi - a.clone(), Reduced)),
            ];
            (lhs, rhs)
        }
        CheckId::ThmD { l, n, k } => {
            let h = minus_one(MeroExpr::powi(f.clone(), *l as i32) * MeroExpr::powi(nth_derivative(f, *k as usize), *n as i32));
            (vec![(1.0, tf())], vec![(1.0 / (*l as f64 - 2.0), Term::Zeros(h, Reduced))])
        }
        CheckId::Thm1 | CheckId::ThmE => (vec![(1.0, tf())], vec![(mult(id), Term::Zeros(pf1(), Full))]),
        CheckId::Thm2 | CheckId::ThmF | CheckId::Thm3 | CheckId::ThmG => {
            (vec![(1.0, tf())], vec![(mult(id), Term::Zeros(pf1(), Reduced))])
        }
        CheckId::Lem31 => {
            let g1 = differentiate(f);
            let lhs = vec![(1.0, Term::Poles(g1.clone() / f.clone(), Full)), (-1.0, Term::Poles(f.clone() / g1.clone(), Full))];
            let rhs = vec![
                (1.0, Term::Poles(f.clone(), Reduced)),
                (1.0, Term::Zeros(f.clone(), Full)),
                (-1.0, Term::Zeros(g1, Full)),
            ];
            (lhs, rhs)
        }
        CheckId::Lem32 { k } => (
            vec![((*k as f64) - 1.0, Term::Poles(f.clone(), Reduced))],
            vec![(1.0, Term::Zeros(nth_derivative(f, *k as usize), Full))],
        ),
        CheckId::Lem33 => {
            let gamma = stats().gamma as f64;
            (vec![(1.0, Term::Char(pf.expect("polynomial").clone()))], vec![(gamma, tf())])
        }
        CheckId::Lem35 => {
            let d = stats().d() as f64;
            let pf = pf.expect("polynomial");
            let rhs = vec![
                (d, Term::Zeros(f.clone(), Full)),
                (1.0, Term::Poles(f.clone(), Reduced)),
                (1.0, Term::Zeros(pf1(), Full)),
                (-1.0, Term::Zeros(differentiate(pf), Full)),
            ];
            (vec![(d, tf())], rhs)
        }
        CheckId::Lem36 => {
            let s = stats();
            let d = s.d() as f64;
            let pf = pf.expect("polynomial");
            let k = s.k as u32;
            let rhs = vec![
                (1.0, Term::Poles(f.clone(), Reduced)),
                (1.0, Term::Zeros(f.clone(), Reduced)),
                (s.nu as f64, Term::Zeros(f.clone(), TruncGeReduced(k + 1))),
                (d - s.qstar as f64, Term::Zeros(f.clone(), TruncLe(k.max(1)))),
                (1.0, Term::Zeros(pf1(), Reduced)),
                (-1.0, Term::ZerosMinus(differentiate(pf), f.clone() * pf1())),
            ];
            (vec![(d, tf())], rhs)
        }
    }
}

/// Runs a check of `f` (and `P`, where the check needs one) on `radii`.
pub fn check(
    id: &CheckId,
    f: &MeroExpr,
    p: Option<&DiffPolynomial>,
    radii: &[f64],
    tol: &Tolerances,
) -> Result<CheckReport, CheckError> {
    if id.needs_polynomial() && p.is_none() {
        return Err(CheckError::MissingPolynomial(id.name().to_string()));
    }
    let stats = p.filter(|_| id.needs_polynomial()).map(DiffPolynomial::stats);
    let slack = SlackModel {
        epsilon: tol.epsilon,
        normalization: "max(T(r,f),1)",
        statistic: if id.is_equality() { "max |lhs-rhs|" } else { "median of top-quartile residuals" },
        equality_tol: id.is_equality().then_some(tol.equality_tol),
    };
    let mut report = CheckReport {
        check_id: id.to_string(),
        violations: hypotheses(id, f, p)?,
        rows: vec![],
        failures: vec![],
        verdict: Verdict::HypothesisViolation,
        worst_residual: None,
        slack,
        stats,
    };
    if !report.violations.is_empty() {
        return Ok(report);
    }
    let pf = p.filter(|_| id.needs_polynomial()).map(|p| apply(p, f));
    if pf.as_ref().is_some_and(|e| is_identically_zero_with(e, &IdentityConfig::with_seed(tol.seed)) == ZeroTest::Zero) {
        report.verdict = Verdict::Vacuous;
        return Ok(report);
    }
    if radii.len() < 8 {
        return Err(CheckError::TooFewRows(radii.len()));
    }
    let (lhs, rhs) = sides(id, f, pf.as_ref(), stats.as_ref());
    let norm = Term::Char(f.clone());
    let mut exprs: Vec<MeroExpr> = vec![f.clone()];
    for (_, t) in lhs.iter().chain(&rhs) {
        exprs.extend(t.exprs().into_iter().cloned());
    }
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    let cfg = &tol.nev;
    let table = DivisorTable::build(&exprs, r_max, cfg)?;
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rows: Vec<Result<CheckRow, RowFailure>> = sorted
        .par_iter()
        .map(|&req| {
            let row = || -> Result<CheckRow, NevError> {
                let (r, moved) = table.safe_radius(req, cfg)?;
                let l = side_value(&lhs, &table, r, cfg)?;
                let rv = side_value(&rhs, &table, r, cfg)?;
                let t = norm.value(&table, r, cfg)?;
                let residual = if id.is_equality() { l - rv } else { (l - rv) / t.max(1.0) };
                Ok(CheckRow { requested_r: req, r, lhs: l, rhs: rv, residual, t, perturbed_r: moved })
            };
            row().map_err(|e| RowFailure { requested_r: req, error: e.to_string() })
        })
        .collect();
    for row in rows {
        match row {
            Ok(r) => report.rows.push(r),
            Err(e) => report.failures.push(e),
        }
    }
    let residuals: Vec<f64> = report.rows.iter().map(|r| r.residual).collect();
    report.worst_residual = if id.is_equality() {
        residuals.iter().map(|x| x.abs()).reduce(f64::max)
    } else {
        residuals.iter().copied().reduce(f64::max)
    };
    report.verdict =
        if id.is_equality() { equality_verdict(&residuals, tol.equality_tol)? } else { verdict(&residuals, tol.epsilon)? };
    Ok(report)
}
