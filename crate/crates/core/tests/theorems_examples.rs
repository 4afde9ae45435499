//! The inequality suite on closed-form functions.

use std::f64::consts::PI;

use nevlab_core::diffpoly::{DiffMonomial, DiffPolynomial};
use nevlab_core::expr::{parse_expr, MeroExpr};
use nevlab_core::theorems::{check, default_radii, CheckId, CheckReport, Tolerances, Verdict};

fn pe(s: &str) -> MeroExpr {
    parse_expr(s).unwrap()
}

fn poly(rows: &[(f64, &[u32])]) -> DiffPolynomial {
    DiffPolynomial::new(rows.iter().map(|(c, q)| DiffMonomial::new(MeroExpr::real(*c), q.to_vec()).unwrap()).collect())
        .unwrap()
}

fn run(id: CheckId, f: &str, p: Option<&DiffPolynomial>) -> CheckReport {
    let r = check(&id, &pe(f), p, &default_radii(), &Tolerances::default()).unwrap();
    assert!(r.failures.is_empty(), "{id}: {:?}", r.failures);
    r
}

fn assert_pass(r: &CheckReport) {
    assert_eq!(r.verdict, Verdict::Pass, "{} worst {:?} rows {:?}", r.check_id, r.worst_residual, r.rows.last());
}

#[test]
fn suite_passes() {
    let sq = poly(&[(1.0, &[2, 0, 2])]);
    let p2 = poly(&[(1.0, &[6, 1, 0, 1]), (2.0, &[6, 0, 1, 1])]);
    let p3 = poly(&[(1.0, &[5, 3]), (1.0, &[3, 5])]);
    assert_pass(&run(CheckId::ThmA, "exp(z)", None));
    assert_pass(&run(CheckId::ThmB { k: 2 }, "exp(z)", None));
    assert_pass(&run(CheckId::ThmD { l: 3, n: 1, k: 1 }, "exp(z)", None));
    assert_pass(&run(CheckId::Thm1, "exp(z)", Some(&sq)));
    assert_pass(&run(CheckId::Thm2, "exp(z)", Some(&p2)));
    assert_pass(&run(CheckId::Thm3, "exp(z)", Some(&p3)));
    assert_pass(&run(CheckId::Lem32 { k: 2 }, "tan(z)", None));
    assert_pass(&run(CheckId::Lem32 { k: 3 }, "tan(z)", None));
    assert_pass(&run(CheckId::Lem33, "exp(z)", Some(&p2)));
    assert_pass(&run(CheckId::Lem35, "exp(z)", Some(&p2)));
    assert_pass(&run(CheckId::Lem36, "exp(z)", Some(&p2)));
}

#[test]
fn thm_1_residual_follows_closed_form() {
    let r = run(CheckId::Thm1, "exp(z)", Some(&poly(&[(1.0, &[2, 0, 2])])));
    assert_pass(&r);
    // T = r/π and N(r, 1/(e^{4z}-1)) = 4r/π - log 4 up to tiny terms, so
    // the residual is -3 + log 4 / T plus a term oscillating as zeros
    // cross the circle.
    for row in &r.rows {
        assert!((row.t - row.r / PI).abs() < 1e-8);
    }
    for row in r.rows.iter().filter(|row| row.r >= 10.0) {
        assert!((row.residual - (-3.0 + 4f64.ln() / row.t)).abs() < 5e-3, "{row:?}");
    }
}

#[test]
fn example_polynomial_is_vacuous() {
    let p = poly(&[(1.0, &[2, 1, 2, 2]), (-1.0, &[2, 2, 1, 2])]);
    let r = run(CheckId::Thm1, "exp(z)", Some(&p));
    assert_eq!(r.verdict, Verdict::Vacuous);
    assert!(r.rows.is_empty());
}

#[test]
fn monomial_specializations_agree() {
    let m = poly(&[(1.0, &[2, 0, 2])]);
    let a = run(CheckId::Thm1, "exp(z)", Some(&m));
    let b = run(CheckId::ThmE, "exp(z)", Some(&m));
    assert_eq!(a.rows, b.rows);
    let m = poly(&[(1.0, &[5, 1])]);
    let a = run(CheckId::Thm2, "exp(-z)", Some(&m));
    let b = run(CheckId::ThmF, "exp(-z)", Some(&m));
    assert_eq!(a.rows, b.rows);
    assert_pass(&a);
    assert_pass(&run(CheckId::ThmG, "exp(-z)", Some(&m)));
}

#[test]
fn thm_c_on_tangent_and_exponential() {
    let id = CheckId::ThmC { n: 1, p: 1, k: 1, alpha: MeroExpr::one(), a: MeroExpr::one() };
    assert_pass(&run(id, "tan(z)", None));
    // Sharp for the exponential: both sides are 3r/π and the gap is the
    // bounded term log 3, which the grid cannot push below epsilon.
    let id = CheckId::ThmC { n: 2, p: 1, k: 1, alpha: MeroExpr::one(), a: MeroExpr::one() };
    let r = run(id, "exp(z)", None);
    for row in r.rows.iter().filter(|row| row.r >= 10.0) {
        assert!((row.lhs - row.rhs - 3f64.ln()).abs() < 3e-2, "{row:?}");
    }
}

#[test]
fn log_derivative_divisor_identity() {
    for g in ["(z-1)*exp(z)", "sin(z)", "(z^2-1)/(z^2+1)"] {
        let r = run(CheckId::Lem31, g, None);
        assert_eq!(r.verdict, Verdict::Pass, "{g}: {:?}", r.worst_residual);
        assert!(r.rows.iter().all(|row| (row.lhs - row.rhs).abs() <= 5e-3));
    }
}

#[test]
fn pole_bound_has_slack_for_tangent() {
    let r = run(CheckId::Lem32 { k: 2 }, "tan(z)", None);
    let top = &r.rows[24..];
    assert!(top.iter().all(|row| row.lhs <= row.rhs + 0.05 * row.t.max(1.0)), "{top:?}");
}
