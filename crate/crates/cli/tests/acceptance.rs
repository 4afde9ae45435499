//! Acceptance criteria 1 to 9. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/support/companion.rs"]
mod companion;

use std::f64::consts::{E, LN_2, PI, TAU};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde_json::Value;

use nevlab_core::diffpoly::{apply, validate_hypotheses, DiffPolynomial};
use nevlab_core::expr::{is_identically_zero, parse_expr, MeroExpr, ZeroTest};
use nevlab_core::locator::{divisor_of, find_zeros, winding_number_expr, LocatorConfig, LocatorError, Target};
use nevlab_core::nevanlinna::{characteristic, counting, proximity, CountMode, DivisorTable, NevConfig};
use nevlab_core::theorems::{check, default_radii, CheckId, Tolerances};

const EPSILON_VERDICT: f64 = 0.05;
const EQUALITY_TOL: f64 = 5e-3;
const PROXIMITY_TOL: f64 = 1e-8;
const LOG_TOL: f64 = 1e-9;
const COUNT_TOL: f64 = 1e-3;
const EXACT_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-8;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn pe(s: &str) -> MeroExpr {
    parse_expr(s).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn examples() -> [(DiffPolynomial, &'static str, &'static str); 3] {
    let p1 = DiffPolynomial::from_exponents(&[&[2, 1, 2, 2]]).unwrap();
    let p1 = p1.plus(&negated(&[2, 2, 1, 2]));
    let p2 = DiffPolynomial::from_exponents(&[&[6, 1, 0, 1], &[6, 0, 1, 1]]).unwrap();
    let p3 = DiffPolynomial::from_exponents(&[&[5, 3]]).unwrap().plus(&negated(&[3, 5]));
    [(p1, "exp(z)", "thm_1"), (p2, "exp(-z)", "thm_2"), (p3, "exp(z)", "thm_3")]
}

fn negated(exponents: &[u32]) -> DiffPolynomial {
    use nevlab_core::diffpoly::DiffMonomial;
    DiffPolynomial::monomial(DiffMonomial::new(MeroExpr::real(-1.0), exponents.to_vec()).unwrap())
}

fn symbolic_vacuity() -> Outcome {
    let t = Instant::now();
    for (p, f, id) in examples() {
        let v = is_identically_zero(&apply(&p, &pe(f)));
        ensure(v == ZeroTest::Zero, || format!("{id} example at {f}: {v:?}"))?;
    }
    within(t.elapsed(), Duration::from_secs(1))?;
    Ok(format!("3 examples vanish in {:.2?}", t.elapsed()))
}

fn stats_oracle() -> Outcome {
    let want = [(7, 11, 2, 3), (8, 5, 6, 3), (8, 5, 3, 1)];
    for ((p, _, id), (d, nu, q, k)) in examples().into_iter().zip(want) {
        let s = p.stats();
        let got = (s.d(), s.nu, s.qstar, s.k);
        ensure(got == (d, nu, q, k), || format!("{id}: got {got:?}, want {:?}", (d, nu, q, k)))?;
        let v = validate_hypotheses(&p, id).map_err(|e| e.to_string())?;
        ensure(v.is_empty(), || format!("{id}: violations {v:?}"))?;
    }
    Ok("(d, nu, q*, k) match, no violations".to_string())
}

fn proximity_oracle() -> Outcome {
    let t = Instant::now();
    let m = proximity(&pe("exp(z)"), PI).map_err(|e| e.to_string())?;
    ensure((m - 1.0).abs() <= PROXIMITY_TOL, || format!("m(pi, e^z) = {m}"))?;
    let mut worst: f64 = (m - 1.0).abs();
    for r in [E, E * E] {
        let m = proximity(&pe("z"), r).map_err(|e| e.to_string())?;
        let tt = characteristic(&pe("1/z"), r).map_err(|e| e.to_string())?.t;
        ensure((m - r.ln()).abs() <= LOG_TOL, || format!("m({r}, z) = {m}"))?;
        ensure((tt - r.ln()).abs() <= LOG_TOL, || format!("T({r}, 1/z) = {tt}"))?;
        worst = worst.max((m - r.ln()).abs()).max((tt - r.ln()).abs());
    }
    within(t.elapsed(), Duration::from_secs(5))?;
    Ok(format!("max error {worst:.1e}"))
}

fn counting_oracle() -> Outcome {
    let cfg = LocatorConfig::default();
    let (zeros, _) = divisor_of(&pe("exp(z)-1"), 10.0, Target::Finite(Complex64::new(0.0, 0.0)), &cfg)
        .map_err(|e| e.to_string())?;
    let n = counting(&zeros, 10.0, CountMode::Full);
    ensure((n - 3.2320).abs() <= COUNT_TOL, || format!("N(10) = {n}"))?;
    let closed = 10f64.ln() + 2.0 * (10.0 / TAU).ln();
    ensure((n - closed).abs() <= EXACT_TOL, || format!("N(10) = {n}, closed form {closed}"))?;
    let d = find_zeros(&pe("z^3*(z-1)"), 3.0, &cfg).map_err(|e| e.to_string())?;
    for r in [1.5, 2.0, 3.0f64] {
        let capped = counting(&d, r, CountMode::Capped(2));
        let trunc = counting(&d, r, CountMode::TruncLe(2));
        ensure((capped - 3.0 * r.ln()).abs() <= EXACT_TOL, || format!("capped at {r}: {capped}"))?;
        ensure((trunc - r.ln()).abs() <= EXACT_TOL, || format!("truncated at {r}: {trunc}"))?;
    }
    Ok(format!("N(10, 1/(e^z-1)) = {n:.6}"))
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

fn locator_conservation() -> Outcome {
    let t = Instant::now();
    let cfg = LocatorConfig::default();
    let mut circles = 0;
    for s in SUITE {
        let e = pe(s);
        for r0 in [2.0, 5.5, 11.0, 23.0, 40.0] {
            let r = (0..10)
                .map(|i| r0 * (1.0 + 1e-4 * i as f64))
                .find(|&r| !matches!(find_zeros(&e, r, &cfg), Err(LocatorError::RingTooClose { .. })))
                .ok_or_else(|| format!("{s}: no usable circle near {r0}"))?;
            let d = find_zeros(&e, r, &cfg).map_err(|err| format!("{s} r={r}: {err}"))?;
            let w = winding_number_expr(&e, r, &cfg).map_err(|err| format!("{s} r={r}: {err}"))?;
            ensure(d.degree() as i64 == w, || format!("{s} r={r}: {} located, winding {w}", d.degree()))?;
            circles += 1;
        }
    }
    let mut rng = companion::seeded(20_240_601);
    for trial in 0..100 {
        let (c, want) = companion::random_case(&mut rng);
        let e = pe(&companion::poly_string(&c));
        let d = find_zeros(&e, 6.5, &cfg).map_err(|err| format!("trial {trial} {c:?}: {err}"))?;
        ensure(d.points.len() == want.len(), || format!("trial {trial} {c:?}: {} roots, want {}", d.points.len(), want.len()))?;
        for (z, m) in &want {
            let hit = d.points.iter().find(|p| (p.location - z).norm() <= ROOT_TOL);
            ensure(hit.is_some_and(|p| p.mult == *m), || format!("trial {trial} {c:?}: root {z} (x{m}) not matched"))?;
        }
    }
    within(t.elapsed(), Duration::from_secs(60))?;
    Ok(format!("{circles} circles, 100 polynomials in {:.2?}", t.elapsed()))
}

fn first_fundamental_theorem() -> Outcome {
    let cfg = NevConfig::default();
    let mut worst: f64 = 0.0;
    for f in ["exp(z)", "tan(z)", "(z-1)*exp(z)/z"] {
        for a in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            let f = pe(f);
            let g = MeroExpr::one() / (f.clone() - MeroExpr::constant(a));
            let table = DivisorTable::build(&[f.clone(), g.clone()], 40.0, &cfg).map_err(|e| e.to_string())?;
            let bound = a.norm().ln().max(0.0) + LN_2 + 0.5;
            for &r in &default_radii() {
                let (r, _) = table.safe_radius(r, &cfg).map_err(|e| e.to_string())?;
                let tf = table.characteristic_at(&f, r, &cfg).map_err(|e| e.to_string())?.t;
                let tg = table.characteristic_at(&g, r, &cfg).map_err(|e| e.to_string())?.t;
                let gap = (tf - tg).abs();
                ensure(gap <= bound, || format!("a={a}, r={r}: gap {gap} > {bound}"))?;
                worst = worst.max(gap);
            }
        }
    }
    Ok(format!("max gap {worst:.4}"))
}

fn log_derivative_identity() -> Outcome {
    let tol = Tolerances { equality_tol: EQUALITY_TOL, ..Tolerances::default() };
    let mut worst: f64 = 0.0;
    for g in ["(z-1)*exp(z)", "sin(z)", "(z^2-1)/(z^2+1)"] {
        let r = check(&CheckId::Lem31, &pe(g), None, &default_radii(), &tol).map_err(|e| format!("{g}: {e}"))?;
        ensure(r.failures.is_empty() && r.rows.len() == 32, || format!("{g}: {} rows, failures {:?}", r.rows.len(), r.failures))?;
        for row in &r.rows {
            let gap = (row.lhs - row.rhs).abs();
            ensure(gap <= EQUALITY_TOL, || format!("{g} r={}: |lhs-rhs| = {gap}", row.r))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!("max |lhs-rhs| {worst:.1e}"))
}

fn suite_spec() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs/suite.json")
}

fn run_suite(out: &Path) -> Result<(i32, Duration), String> {
    let t = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_nevlab"))
        .args(["check", "--reproducible", "--format", "json", "--spec"])
        .arg(suite_spec())
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    Ok((status.status.code().unwrap_or(-1), t.elapsed()))
}

fn inequality_suite(dir: &Path) -> Outcome {
    let out = dir.join("first.json");
    let (code, took) = run_suite(&out)?;
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let checks = report["checks"].as_array().ok_or("no checks in report")?;
    ensure(checks.len() == 11, || format!("{} checks reported", checks.len()))?;
    for c in checks {
        ensure(c["slack"]["epsilon"].as_f64() == Some(EPSILON_VERDICT), || format!("epsilon {}", c["slack"]["epsilon"]))?;
        ensure(c["verdict"] == "pass", || format!("{}: {}", c["check_id"], c["verdict"]))?;
    }
    ensure(code == 0, || format!("exit code {code}"))?;
    within(took, Duration::from_secs(300))?;
    Ok(format!("11 checks pass in {took:.2?}"))
}

fn determinism(dir: &Path) -> Outcome {
    let a = dir.join("first.json");
    if !a.exists() {
        run_suite(&a)?;
    }
    let b = dir.join("second.json");
    run_suite(&b)?;
    let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
    let (x, y) = (read(&a)?, read(&b)?);
    ensure(x == y, || "reports differ".to_string())?;
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = entry.map_err(|e| e.to_string())?.path();
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        if let Some(rest) = name.strip_prefix("first_") {
            let other = dir.join(format!("second_{rest}"));
            ensure(read(&p)? == read(&other)?, || format!("{name} differs"))?;
        }
    }
    Ok(format!("{} identical bytes", x.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("symbolic vacuity", Box::new(symbolic_vacuity)),
        ("stats oracle", Box::new(stats_oracle)),
        ("proximity oracle", Box::new(proximity_oracle)),
        ("counting oracle", Box::new(counting_oracle)),
        ("locator conservation", Box::new(locator_conservation)),
        ("first fundamental theorem", Box::new(first_fundamental_theorem)),
        ("logarithmic derivative identity", Box::new(log_derivative_identity)),
        ("inequality suite", Box::new(|| inequality_suite(dir.path()))),
        ("determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
