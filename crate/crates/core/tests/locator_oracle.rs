//! Locator against independent oracles: companion-matrix eigenvalues of an
//! exact square-free factorization, and closed-form roots.

#[path = "support/companion.rs"]
mod companion;

use num_bigint::BigInt;
use num_rational::BigRational;

use nevlab_core::expr::{parse_expr, MeroExpr};
use nevlab_core::locator::{find_zeros, winding_number_expr, LocatorConfig, LocatorError};

use companion::{poly_string, random_case, seeded, square_free, Poly};

#[test]
fn random_integer_polynomials_match_companion_roots() {
    let mut rng = seeded(20_240_601);
    let cfg = LocatorConfig::default();
    let r = 6.5;
    for trial in 0..100 {
        let (c, want) = random_case(&mut rng);
        let e = parse_expr(&poly_string(&c)).unwrap();
        let d = find_zeros(&e, r, &cfg).unwrap_or_else(|err| panic!("trial {trial} {c:?}: {err}"));
        assert!(!d.flagged, "trial {trial} {c:?}");
        assert_eq!(d.points.len(), want.len(), "trial {trial} {c:?}: {d:?} vs {want:?}");
        for (z, m) in &want {
            let p = d
                .points
                .iter()
                .find(|p| (p.location - z).norm() <= 1e-8)
                .unwrap_or_else(|| panic!("trial {trial} {c:?}: root {z} missing from {d:?}"));
            assert_eq!(p.mult, *m, "trial {trial} {c:?}");
        }
    }
}

#[test]
fn square_free_sanity() {
    // (z-1)^2 (z+2)^3 z
    let p: Vec<i64> = vec![0, 8, -4, -10, 1, 4, 1];
    let exact: Poly = p.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
    let parts = square_free(&exact);
    let mults: Vec<u32> = parts.iter().map(|(_, m)| *m).collect();
    assert_eq!(mults, vec![1, 2, 3]);
    assert!(parts.iter().all(|(f, _)| f.len() == 2));
}

const SUITE: [&str; 9] = [
    "exp(z)-1",
    "exp(3*z)-1",
    "sin(z)",
    "(z-1)*exp(z)",
    "z^3*(z-1)",
    "exp(4*z)-1",
    "cos(z) - z",
    "3*exp(8*z) - 1",
    "z*exp(2*z) + exp(-z) - 2",
];

#[test]
fn conservation_on_suite() {
    let cfg = LocatorConfig::default();
    for s in SUITE {
        let e: MeroExpr = parse_expr(s).unwrap();
        for r0 in [2.0, 5.5, 11.0, 23.0, 40.0] {
            // Step off rings that pass too close to a zero.
            let r = (0..10)
                .map(|i| r0 * (1.0 + 1e-4 * i as f64))
                .find(|&r| !matches!(find_zeros(&e, r, &cfg), Err(LocatorError::RingTooClose { .. })))
                .unwrap();
            let d = find_zeros(&e, r, &cfg).unwrap_or_else(|err| panic!("{s} r={r}: {err}"));
            let w = winding_number_expr(&e, r, &cfg).unwrap();
            assert_eq!(d.degree() as i64, w, "{s} r={r}");
        }
    }
}

#[test]
fn closed_form_exponential_roots() {
    let cfg = LocatorConfig::default();
    let e = parse_expr("exp(4*z)-1").unwrap();
    let d = find_zeros(&e, 40.0, &cfg).unwrap();
    // Roots iπk/2 with |k| ≤ 25.
    assert_eq!(d.degree(), 51);
    for p in &d.points {
        let k = p.location.im / (std::f64::consts::PI / 2.0);
        assert!((k - k.round()).abs() < 1e-10 && p.location.re.abs() < 1e-10 && p.mult == 1);
    }
}
