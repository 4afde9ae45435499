//! The JSON run specification.

use serde::{Deserialize, Serialize};

use nevlab_core::diffpoly::{DiffMonomial, DiffPolynomial};
use nevlab_core::expr::{parse_expr, MeroExpr};
use nevlab_core::nevanlinna::radius_grid;
use nevlab_core::theorems::{CheckId, CheckParams, Tolerances};

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub function: String,
    #[serde(default)]
    pub polynomial: Option<PolySpec>,
    pub radii: RadiiSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub tolerances: TolSpec,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolySpec {
    pub monomials: Vec<MonomialSpec>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    #[serde(default = "one")]
    pub coeff: String,
    pub exponents: Vec<u32>,
}

fn one() -> String {
    "1".to_string()
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RadiiSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default = "log_spacing")]
    pub spacing: Spacing,
}

fn log_spacing() -> Spacing {
    Spacing::Log
}

/// One check. `function` and `polynomial` override the top-level ones.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub id: String,
    #[serde(default)]
    pub params: ParamSpec,
    #[serde(default)]
    pub function: Option<String>,
    #[serde(default)]
    pub polynomial: Option<PolySpec>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub k: Option<u32>,
    pub l: Option<u32>,
    pub n: Option<u32>,
    pub p: Option<u32>,
    pub alpha: Option<String>,
    pub a: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    pub epsilon_verdict: Option<f64>,
    pub equality_tol: Option<f64>,
    pub quadrature_tol: Option<f64>,
    pub ring_rel: Option<f64>,
    pub merge_rel: Option<f64>,
    pub polish_rel: Option<f64>,
    pub cluster_rel: Option<f64>,
}

/// A spec that has been parsed and checked, ready to run.
pub struct Resolved {
    pub function: MeroExpr,
    pub polynomial: Option<DiffPolynomial>,
    pub radii: Vec<f64>,
    pub checks: Vec<ResolvedCheck>,
    pub tol: Tolerances,
}

pub struct ResolvedCheck {
    pub id: CheckId,
    pub function: MeroExpr,
    pub polynomial: Option<DiffPolynomial>,
}

fn expr(text: &str, what: &str) -> Result<MeroExpr, String> {
    parse_expr(text).map_err(|e| format!("{what} `{text}`: {e}"))
}

fn poly(p: &PolySpec) -> Result<DiffPolynomial, String> {
    let ms = p
        .monomials
        .iter()
        .map(|m| DiffMonomial::new(expr(&m.coeff, "coefficient")?, m.exponents.clone()).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    DiffPolynomial::new(ms).map_err(|e| e.to_string())
}

impl RunSpec {
    pub fn from_json(text: &str) -> Result<RunSpec, String> {
        serde_json::from_str(text).map_err(|e| format!("spec: {e}"))
    }

    /// Parses every expression and applies the invariants. `seed`
    /// overrides the spec's seed.
    pub fn resolve(&self, seed: Option<u64>, for_checks: bool) -> Result<Resolved, String> {
        let r = &self.radii;
        if !(r.start > 0.0 && r.start < r.stop && r.stop.is_finite()) {
            return Err(format!("radii: need 0 < start < stop, got {} and {}", r.start, r.stop));
        }
        if r.count == 0 || (for_checks && r.count < 8) {
            return Err(format!("radii: count {} is too small", r.count));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("epsilon_verdict", t.epsilon_verdict),
            ("equality_tol", t.equality_tol),
            ("quadrature_tol", t.quadrature_tol),
            ("ring_rel", t.ring_rel),
            ("merge_rel", t.merge_rel),
            ("polish_rel", t.polish_rel),
            ("cluster_rel", t.cluster_rel),
        ] {
            if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
                return Err(format!("tolerances: {name} must be positive"));
            }
        }
        let mut tol = Tolerances::default();
        tol.epsilon = t.epsilon_verdict.unwrap_or(tol.epsilon);
        tol.equality_tol = t.equality_tol.unwrap_or(tol.equality_tol);
        tol.nev.quad.abs_tol = t.quadrature_tol.unwrap_or(tol.nev.quad.abs_tol);
        let loc = &mut tol.nev.locator;
        loc.ring_rel = t.ring_rel.unwrap_or(loc.ring_rel);
        loc.merge_rel = t.merge_rel.unwrap_or(loc.merge_rel);
        loc.polish_rel = t.polish_rel.unwrap_or(loc.polish_rel);
        loc.cluster_rel = t.cluster_rel.unwrap_or(loc.cluster_rel);
        if let Some(s) = seed.or(self.seed) {
            tol.seed = s;
        }
        let function = expr(&self.function, "function")?;
        let polynomial = self.polynomial.as_ref().map(poly).transpose()?;
        let checks = self
            .checks
            .iter()
            .map(|c| {
                let params = CheckParams {
                    k: c.params.k,
                    l: c.params.l,
                    n: c.params.n,
                    p: c.params.p,
                    alpha: c.params.alpha.as_deref().map(|s| expr(s, "alpha")).transpose()?,
                    a: c.params.a.as_deref().map(|s| expr(s, "a")).transpose()?,
                };
                let id = CheckId::build(&c.id, &params).map_err(|e| e.to_string())?;
                let function = c.function.as_deref().map(|s| expr(s, "function")).transpose()?.unwrap_or_else(|| function.clone());
                let polynomial = match &c.polynomial {
                    Some(p) => Some(poly(p)?),
                    None => polynomial.clone(),
                };
                if id.needs_polynomial() && polynomial.is_none() {
                    return Err(format!("check `{}` needs a polynomial", c.id));
                }
                Ok(ResolvedCheck { id, function, polynomial })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let radii = radius_grid(r.start, r.stop, r.count, r.spacing == Spacing::Log);
        Ok(Resolved { function, polynomial, radii, checks, tol })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"{
        "function": "exp(z)",
        "polynomial": {"monomials": [{"coeff": "1", "exponents": [2, 0, 2]}]},
        "radii": {"start": 2, "stop": 40, "count": 32, "spacing": "log"},
        "checks": [{"id": "thm_1"}, {"id": "lem_32", "params": {"k": 3}, "function": "tan(z)"}],
        "seed": 7
    }"#;

    #[test]
    fn parses_and_resolves() {
        let s = RunSpec::from_json(BASIC).unwrap();
        let r = s.resolve(None, true).unwrap();
        assert_eq!(r.radii.len(), 32);
        assert_eq!(r.tol.seed, 7);
        assert_eq!(r.checks[1].id.to_string(), "lem_32(k=3)");
        assert_eq!(s.resolve(Some(9), true).unwrap().tol.seed, 9);
        // Round trip through the serializer.
        let again = RunSpec::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(RunSpec::from_json(&BASIC.replace("\"seed\"", "\"sede\"")).is_err());
        let s = RunSpec::from_json(&BASIC.replace("\"count\": 32", "\"count\": 4")).unwrap();
        assert!(s.resolve(None, true).is_err());
        assert!(s.resolve(None, false).is_ok());
        let s = RunSpec::from_json(&BASIC.replace("\"start\": 2", "\"start\": 50")).unwrap();
        assert!(s.resolve(None, false).is_err());
        let s = RunSpec::from_json(&BASIC.replace("exp(z)", "exp(z")).unwrap();
        assert!(s.resolve(None, false).is_err());
        let s = RunSpec::from_json(&BASIC.replace("thm_1", "thm_9")).unwrap();
        assert!(s.resolve(None, true).is_err());
    }
}
