use super::*;
use crate::diffpoly::DiffPolynomial;
use crate::expr::parse_expr;

fn pe(s: &str) -> MeroExpr {
    parse_expr(s).unwrap()
}

#[test]
fn verdict_examples() {
    assert_eq!(verdict(&[-3.0; 8], 0.05), Ok(Verdict::Pass));
    assert_eq!(verdict(&[0.5; 8], 0.05), Ok(Verdict::Fail));
    assert_eq!(verdict(&[0.0; 7], 0.05), Err(CheckError::TooFewRows(7)));
    // Residuals decaying like 1/log r, scaled to run from 0.4 down to 0.03.
    let radii = default_radii();
    let (a, b) = (1.0 / radii[0].ln(), 1.0 / radii[31].ln());
    let res: Vec<f64> = radii.iter().map(|r| 0.03 + (0.4 - 0.03) * (1.0 / r.ln() - b) / (a - b)).collect();
    let med = top_quartile_median(&res);
    assert!(med > 0.03 && med < 0.05, "{med}");
    assert_eq!(verdict(&res, 0.05), Ok(Verdict::Pass));
}

#[test]
fn quartile_median_small_cases() {
    // Eight rows: the top two are averaged.
    assert_eq!(top_quartile_median(&[9.0, 9.0, 9.0, 9.0, 9.0, 9.0, 1.0, 3.0]), 2.0);
    // Nine rows: the top three, middle one.
    assert_eq!(top_quartile_median(&[9.0, 9.0, 9.0, 9.0, 9.0, 9.0, 5.0, 1.0, 3.0]), 3.0);
}

#[test]
fn multipliers_on_example_polynomials() {
    let p1 = DiffPolynomial::from_exponents(&[&[2, 1, 2, 2], &[2, 2, 1, 2]]).unwrap().stats();
    let p2 = DiffPolynomial::from_exponents(&[&[6, 1, 0, 1], &[6, 0, 1, 1]]).unwrap().stats();
    let p3 = DiffPolynomial::from_exponents(&[&[5, 3], &[3, 5]]).unwrap().stats();
    assert_eq!(multiplier(&CheckId::Thm1, &p1), Some(1.0));
    assert_eq!(multiplier(&CheckId::Thm2, &p2), Some(1.0));
    assert_eq!(multiplier(&CheckId::Thm3, &p3), Some(1.0));
    assert_eq!(multiplier(&CheckId::ThmA, &p1), Some(6.0));
    assert_eq!(multiplier(&CheckId::ThmD { l: 5, n: 1, k: 1 }, &p1), Some(1.0 / 3.0));
    let m = DiffPolynomial::from_exponents(&[&[3, 0, 1]]).unwrap().stats();
    // d=4, nu=2, q0=3: 1/(4-2-4+3).
    assert_eq!(multiplier(&CheckId::ThmG, &m), Some(1.0));
    assert_eq!(multiplier(&CheckId::Lem31, &m), None);
}

#[test]
fn ids_parse_and_print() {
    let id = CheckId::build("thm_b", &CheckParams { k: Some(2), ..Default::default() }).unwrap();
    assert_eq!(id.to_string(), "thm_b(k=2)");
    assert_eq!(CheckId::build("lem_32", &CheckParams::default()).unwrap(), CheckId::Lem32 { k: 2 });
    assert!(matches!(CheckId::build("thm_9", &CheckParams::default()), Err(CheckError::UnknownCheck(_))));
    assert!(matches!(
        CheckId::build("thm_1", &CheckParams { k: Some(2), ..Default::default() }),
        Err(CheckError::BadParameter(_))
    ));
    for name in CHECK_NAMES {
        assert_eq!(CheckId::build(name, &CheckParams::default()).unwrap().name(), name);
    }
}

#[test]
fn violations_emit_no_rows() {
    let p = DiffPolynomial::from_exponents(&[&[1, 1]]).unwrap();
    let r = check(&CheckId::Thm1, &pe("exp(z)"), Some(&p), &default_radii(), &Tolerances::default()).unwrap();
    assert_eq!(r.verdict, Verdict::HypothesisViolation);
    assert!(r.rows.is_empty() && r.violations.contains(&"q0=1 < 2".to_string()));
    let r = check(&CheckId::ThmA, &pe("z^2"), None, &default_radii(), &Tolerances::default()).unwrap();
    assert_eq!(r.verdict, Verdict::HypothesisViolation);
    assert!(r.rows.is_empty());
    assert!(matches!(
        check(&CheckId::Thm2, &pe("exp(z)"), None, &default_radii(), &Tolerances::default()),
        Err(CheckError::MissingPolynomial(_))
    ));
}

#[test]
fn vanishing_polynomial_is_vacuous() {
    let p = DiffPolynomial::from_exponents(&[&[2, 1, 2, 2]])
        .unwrap()
        .plus(&DiffPolynomial::monomial(crate::diffpoly::DiffMonomial::new(MeroExpr::real(-1.0), vec![2, 2, 1, 2]).unwrap()));
    let r = check(&CheckId::Thm1, &pe("exp(z)"), Some(&p), &default_radii(), &Tolerances::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Vacuous);
    assert!(r.rows.is_empty());
}

#[test]
fn thm_a_on_exponential() {
    let r = check(&CheckId::ThmA, &pe("exp(z)"), None, &default_radii(), &Tolerances::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Pass);
    assert_eq!(r.rows.len(), 32);
    let last = r.rows.last().unwrap();
    // T = r/π and N ≈ 3r/π, so lhs/rhs → 1/18.
    assert!((last.lhs / last.rhs - 1.0 / 18.0).abs() < 0.01, "{last:?}");
}
