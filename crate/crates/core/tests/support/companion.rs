//! Companion-matrix root oracle for integer polynomials. Shared by test
//! targets through `#[path]`.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Poly = Vec<BigRational>; // ascending coefficients, no trailing zeros

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn deriv(p: &Poly) -> Poly {
    trim(p.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect())
}

fn sub(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

fn divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let mut r = a.clone();
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - b.len() + 1];
    let lead = b.last().unwrap().clone();
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] = &r[i + shift] - &c * bc;
        }
        q[shift] = c;
        r = trim(r);
    }
    (trim(q), r)
}

fn monic(p: Poly) -> Poly {
    let lead = p.last().unwrap().clone();
    p.into_iter().map(|c| c / &lead).collect()
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_empty() {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    monic(a)
}

fn is_one(p: &Poly) -> bool {
    p.len() == 1 && p[0].is_one()
}

/// Yun's algorithm: `f = c · Π a_i^i` with square-free, coprime `a_i`.
pub fn square_free(f: &Poly) -> Vec<(Poly, u32)> {
    let df = deriv(f);
    let b = gcd(f, &df);
    let mut c = divrem(f, &b).0;
    let mut d = sub(&divrem(&df, &b).0, &deriv(&c));
    let mut out = Vec::new();
    let mut i = 1;
    while c.len() != 1 {
        let a = gcd(&c, &d);
        if !is_one(&a) {
            out.push((a.clone(), i));
        }
        c = divrem(&c, &a).0;
        d = sub(&divrem(&d, &a).0, &deriv(&c));
        i += 1;
    }
    out
}

fn to_f64(p: &Poly) -> Vec<f64> {
    p.iter()
        .map(|c| {
            let n: f64 = c.numer().to_string().parse().unwrap();
            let d: f64 = c.denom().to_string().parse().unwrap();
            n / d
        })
        .collect()
}

pub fn roots(p: &[f64]) -> Vec<Complex64> {
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    let lead = p[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    let eval = |z: Complex64| {
        let v = p.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &c| a * z + c);
        let d = p.iter().enumerate().skip(1).rev().fold(Complex64::new(0.0, 0.0), |a, (i, &c)| a * z + c * i as f64);
        (v, d)
    };
    m.complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..20 {
                let (v, d) = eval(z);
                if d.norm() == 0.0 {
                    break;
                }
                z -= v / d;
            }
            z
        })
        .collect()
}

pub fn poly_string(coeffs: &[i64]) -> String {
    coeffs.iter().enumerate().map(|(i, c)| format!("({c})*z^{i}").replace("*z^0", "")).collect::<Vec<_>>().join(" + ")
}

/// Coefficients (ascending) of a random integer polynomial of degree 1..=8
/// with entries in [-5, 5], and its roots with multiplicities.
pub fn random_case(rng: &mut ChaCha8Rng) -> (Vec<i64>, Vec<(Complex64, u32)>) {
    let deg = rng.random_range(1..=8usize);
    let mut c: Vec<i64> = (0..=deg).map(|_| rng.random_range(-5..=5)).collect();
    while c[deg] == 0 {
        c[deg] = rng.random_range(-5..=5);
    }
    let exact = trim(c.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect());
    let mut want = Vec::new();
    for (factor, m) in square_free(&exact) {
        for z in roots(&to_f64(&factor)) {
            want.push((z, m));
        }
    }
    (c, want)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
