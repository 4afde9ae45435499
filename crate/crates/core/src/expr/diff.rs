//! Symbolic differentiation with respect to `z`.

use std::collections::HashMap;

use super::{MeroExpr, Node};

/// Derivative of `e`. Shared subtrees are differentiated once.
pub fn differentiate(e: &MeroExpr) -> MeroExpr {
    let mut memo = HashMap::new();
    d(e, &mut memo)
}

/// `n`-th derivative; `n = 0` returns `e` itself.
pub fn nth_derivative(e: &MeroExpr, n: usize) -> MeroExpr {
    let mut out = e.clone();
    for _ in 0..n {
        out = differentiate(&out);
    }
    out
}

fn d(e: &MeroExpr, memo: &mut HashMap<MeroExpr, MeroExpr>) -> MeroExpr {
    if let Some(hit) = memo.get(e) {
        return hit.clone();
    }
    let out = match e.node() {
        Node::Const(_) => MeroExpr::zero(),
        Node::Var => MeroExpr::one(),
        Node::Add(xs) => MeroExpr::add(xs.iter().map(|x| d(x, memo)).collect::<Vec<_>>()),
        Node::Mul(xs) => {
            let mut terms = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                let dx = d(x, memo);
                if dx.is_zero_const() {
                    continue;
                }
                let mut fs: Vec<MeroExpr> = xs.clone();
                fs[i] = dx;
                terms.push(MeroExpr::mul(fs));
            }
            MeroExpr::add(terms)
        }
        Node::Neg(x) => MeroExpr::neg(d(x, memo)),
        Node::Div(u, v) => {
            let du = d(u, memo);
            let dv = d(v, memo);
            let first = MeroExpr::div(du, v.clone());
            if dv.is_zero_const() {
                first
            } else {
                let second = MeroExpr::div(MeroExpr::mul([u.clone(), dv]), MeroExpr::powi(v.clone(), 2));
                MeroExpr::add([first, MeroExpr::neg(second)])
            }
        }
        Node::IntPow(b, n) => {
            let db = d(b, memo);
            MeroExpr::mul([MeroExpr::real(*n as f64), MeroExpr::powi(b.clone(), n - 1), db])
        }
        Node::Exp(a) => MeroExpr::mul([d(a, memo), e.clone()]),
    };
    memo.insert(e.clone(), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, parse_expr, to_exp_poly};
    use num_complex::Complex64;

    #[test]
    fn exp_linear() {
        let e = parse_expr("exp(3*z)").unwrap();
        let de = differentiate(&e);
        let want = to_exp_poly(&parse_expr("3*exp(3*z)").unwrap()).unwrap();
        assert!(to_exp_poly(&de).unwrap().approx_eq(&want));
    }

    #[test]
    fn reciprocal() {
        let de = differentiate(&parse_expr("1/z").unwrap());
        for z0 in [Complex64::new(0.5, 0.1), Complex64::new(-2.0, 3.0)] {
            let v = eval(&de, z0).unwrap();
            assert!((v + 1.0 / (z0 * z0)).norm() < 1e-14);
        }
    }

    #[test]
    fn product_against_finite_difference() {
        let e = parse_expr("z^2*exp(z)").unwrap();
        let de = differentiate(&e);
        let z0 = Complex64::new(0.7, 0.3);
        let h = 1e-5;
        let fd = (eval(&e, z0 + h).unwrap() - eval(&e, z0 - h).unwrap()) / (2.0 * h);
        let exact = (z0 * z0 + 2.0 * z0) * z0.exp();
        assert!((eval(&de, z0).unwrap() - exact).norm() < 1e-12);
        assert!((fd - exact).norm() < 1e-8);
    }

    #[test]
    fn nth_of_exp() {
        let e = parse_expr("exp(2*z)").unwrap();
        let d3 = nth_derivative(&e, 3);
        let z0 = Complex64::new(0.1, 0.2);
        assert!((eval(&d3, z0).unwrap() - 8.0 * (2.0 * z0).exp()).norm() < 1e-12);
        assert_eq!(nth_derivative(&e, 0), e);
    }
}
