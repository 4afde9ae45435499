//! Normal form `num / den` with both parts entire.
//!
//! Both parts are kept factored: a constant times powers of structurally
//! distinct bases. Bases are `z`, sums, or a single exponential (numerator
//! only, since `e^u` never vanishes and would only add spurious structure to
//! a denominator). Common factors are cancelled structurally; divisors
//! cancel any remaining common zeros pointwise.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use super::exppoly::{to_exp_poly, FREQ_TOL};
use super::{MeroExpr, Node};

/// The expression divides by something that simplifies to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("denominator is identically zero")]
pub struct ZeroDenominator;

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub base: MeroExpr,
    pub power: u32,
}

#[derive(Debug, Clone)]
struct Frac {
    coeff: Complex64,
    num: Vec<Factor>,
    den: Vec<Factor>,
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn merge(into: &mut Vec<Factor>, base: &MeroExpr, power: u32) {
    if power == 0 {
        return;
    }
    match into.iter_mut().find(|f| f.base == *base) {
        Some(f) => f.power += power,
        None => into.push(Factor { base: base.clone(), power }),
    }
}

fn power_of(fs: &[Factor], base: &MeroExpr) -> u32 {
    fs.iter().find(|f| f.base == *base).map_or(0, |f| f.power)
}

fn product(coeff: Complex64, fs: &[Factor]) -> MeroExpr {
    let mut parts = vec![MeroExpr::constant(coeff)];
    parts.extend(fs.iter().map(|f| MeroExpr::powi(f.base.clone(), f.power as i32)));
    MeroExpr::mul(parts)
}

impl Frac {
    fn constant(c: Complex64) -> Frac {
        Frac { coeff: c, num: vec![], den: vec![] }
    }

    fn is_zero(&self) -> bool {
        self.coeff == ZERO
    }

    /// Collapses all exponential factors into one canonical `e^{s z}` and
    /// moves constant parts of the exponent into the coefficient.
    fn normalize_exp(&mut self) {
        let mut args = Vec::new();
        let mut keep = Vec::new();
        for f in self.num.drain(..) {
            match f.base.node() {
                Node::Exp(a) => args.push(MeroExpr::mul([MeroExpr::real(f.power as f64), a.clone()])),
                _ => keep.push(f),
            }
        }
        let mut den_keep = Vec::new();
        for f in self.den.drain(..) {
            match f.base.node() {
                Node::Exp(a) => args.push(MeroExpr::mul([MeroExpr::real(-(f.power as f64)), a.clone()])),
                _ => den_keep.push(f),
            }
        }
        self.num = keep;
        self.den = den_keep;
        if args.is_empty() {
            return;
        }
        let total = MeroExpr::add(args);
        match to_exp_poly(&total) {
            Ok(p) => match p.terms() {
                [] => {}
                [t] if t.freq.norm() <= FREQ_TOL && t.poly.len() <= 2 => {
                    self.coeff *= t.poly[0].exp();
                    let slope = t.poly.get(1).copied().unwrap_or(ZERO);
                    if slope != ZERO {
                        let arg = MeroExpr::mul([MeroExpr::constant(slope), MeroExpr::z()]);
                        self.num.push(Factor { base: MeroExpr::exp(arg), power: 1 });
                    }
                }
                _ => self.num.push(Factor { base: MeroExpr::exp(total), power: 1 }),
            },
            Err(_) => self.num.push(Factor { base: MeroExpr::exp(total), power: 1 }),
        }
    }

    fn cancel(&mut self) {
        for d in self.den.iter_mut() {
            if let Some(n) = self.num.iter_mut().find(|n| n.base == d.base) {
                let m = n.power.min(d.power);
                n.power -= m;
                d.power -= m;
            }
        }
        self.num.retain(|f| f.power > 0);
        self.den.retain(|f| f.power > 0);
    }

    fn mul(&self, other: &Frac) -> Frac {
        if self.is_zero() || other.is_zero() {
            return Frac::constant(ZERO);
        }
        let mut out = self.clone();
        out.coeff *= other.coeff;
        for f in &other.num {
            merge(&mut out.num, &f.base, f.power);
        }
        for f in &other.den {
            merge(&mut out.den, &f.base, f.power);
        }
        let exps: Vec<u32> =
            out.num.iter().filter(|f| matches!(f.base.node(), Node::Exp(_))).map(|f| f.power).collect();
        if exps.len() > 1 || exps.iter().any(|&p| p > 1) {
            out.normalize_exp();
        }
        out.cancel();
        out
    }

    fn inv(&self) -> Result<Frac, ZeroDenominator> {
        if self.is_zero() {
            return Err(ZeroDenominator);
        }
        let mut out = Frac { coeff: ONE / self.coeff, num: self.den.clone(), den: self.num.clone() };
        out.normalize_exp();
        Ok(out)
    }

    fn powi(&self, n: i32) -> Result<Frac, ZeroDenominator> {
        if n < 0 {
            return self.powi(-n)?.inv();
        }
        let n32 = n as u32;
        let mut out = Frac {
            coeff: self.coeff.powi(n),
            num: self.num.iter().map(|f| Factor { base: f.base.clone(), power: f.power * n32 }).collect(),
            den: self.den.iter().map(|f| Factor { base: f.base.clone(), power: f.power * n32 }).collect(),
        };
        if n32 > 1 && out.num.iter().any(|f| matches!(f.base.node(), Node::Exp(_))) {
            out.normalize_exp();
        }
        Ok(out)
    }

    /// Sum over a common denominator, pulling shared numerator factors out
    /// of the new sum.
    fn sum(terms: Vec<Frac>) -> Result<Frac, ZeroDenominator> {
        let mut terms: Vec<Frac> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        match terms.len() {
            0 => return Ok(Frac::constant(ZERO)),
            1 => return Ok(terms.pop().unwrap()),
            _ => {}
        }
        let mut lcm: Vec<Factor> = Vec::new();
        for t in &terms {
            for f in &t.den {
                match lcm.iter_mut().find(|g| g.base == f.base) {
                    Some(g) => g.power = g.power.max(f.power),
                    None => lcm.push(f.clone()),
                }
            }
        }
        let nums: Vec<Vec<Factor>> = terms
            .iter()
            .map(|t| {
                let mut n = t.num.clone();
                for g in &lcm {
                    merge(&mut n, &g.base, g.power - power_of(&t.den, &g.base));
                }
                n
            })
            .collect();
        let mut common: Vec<Factor> = nums[0].clone();
        for n in &nums[1..] {
            for c in common.iter_mut() {
                c.power = c.power.min(power_of(n, &c.base));
            }
        }
        common.retain(|c| c.power > 0);
        let rests: Vec<MeroExpr> = terms
            .iter()
            .zip(&nums)
            .map(|(t, n)| {
                let rest: Vec<Factor> = n
                    .iter()
                    .map(|f| Factor { base: f.base.clone(), power: f.power - power_of(&common, &f.base) })
                    .filter(|f| f.power > 0)
                    .collect();
                product(t.coeff, &rest)
            })
            .collect();
        let s = MeroExpr::add(rests);
        let rest_frac = match s.node() {
            Node::Const(c) => Frac::constant(*c),
            Node::Add(_) => Frac { coeff: ONE, num: vec![Factor { base: s.clone(), power: 1 }], den: vec![] },
            _ => convert(&s, &mut HashMap::new())?,
        };
        let outer = Frac { coeff: ONE, num: common, den: lcm };
        Ok(outer.mul(&rest_frac))
    }
}

fn convert(e: &MeroExpr, memo: &mut HashMap<MeroExpr, Result<Frac, ZeroDenominator>>) -> Result<Frac, ZeroDenominator> {
    if let Some(hit) = memo.get(e) {
        return hit.clone();
    }
    let out = match e.node() {
        Node::Const(c) => Ok(Frac::constant(*c)),
        Node::Var => Ok(Frac { coeff: ONE, num: vec![Factor { base: e.clone(), power: 1 }], den: vec![] }),
        Node::Add(xs) => xs.iter().map(|x| convert(x, memo)).collect::<Result<Vec<_>, _>>().and_then(Frac::sum),
        Node::Mul(xs) => {
            let mut acc = Ok(Frac::constant(ONE));
            for x in xs {
                acc = acc.and_then(|a| Ok(a.mul(&convert(x, memo)?)));
            }
            acc
        }
        Node::Neg(x) => convert(x, memo).map(|mut f| {
            f.coeff = -f.coeff;
            f
        }),
        Node::Div(a, b) => convert(b, memo).and_then(|d| d.inv()).and_then(|d| Ok(convert(a, memo)?.mul(&d))),
        Node::IntPow(b, n) => convert(b, memo).and_then(|f| f.powi(*n)),
        Node::Exp(_) => {
            let mut f = Frac { coeff: ONE, num: vec![Factor { base: e.clone(), power: 1 }], den: vec![] };
            f.normalize_exp();
            Ok(f)
        }
    };
    memo.insert(e.clone(), out.clone());
    out
}

/// `num / den` representation of a meromorphic expression.
#[derive(Debug, Clone)]
pub struct QuotientForm {
    /// Entire numerator, `coeff · Π num_factors`.
    pub num: MeroExpr,
    /// Entire denominator, `Π den_factors` (1 when empty).
    pub den: MeroExpr,
    coeff: Complex64,
    num_factors: Vec<Factor>,
    den_factors: Vec<Factor>,
}

impl QuotientForm {
    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    /// Numerator factors, excluding the constant coefficient.
    pub fn num_factors(&self) -> &[Factor] {
        &self.num_factors
    }

    pub fn den_factors(&self) -> &[Factor] {
        &self.den_factors
    }

    /// Zero after structural simplification (a sufficient test only).
    pub fn is_zero(&self) -> bool {
        self.coeff == ZERO
    }

    pub fn is_entire(&self) -> bool {
        self.den_factors.is_empty()
    }
}

pub fn to_quotient(e: &MeroExpr) -> Result<QuotientForm, ZeroDenominator> {
    let f = convert(e, &mut HashMap::new())?;
    Ok(QuotientForm {
        num: if f.is_zero() { MeroExpr::zero() } else { product(f.coeff, &f.num) },
        den: product(ONE, &f.den),
        coeff: f.coeff,
        num_factors: f.num,
        den_factors: f.den,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{eval, parse_expr};

    fn check_pointwise(s: &str) -> QuotientForm {
        let e = parse_expr(s).unwrap();
        let q = to_quotient(&e).unwrap();
        for z0 in [Complex64::new(0.31, 0.72), Complex64::new(-1.3, 0.4), Complex64::new(0.9, -2.1)] {
            let v = eval(&e, z0).unwrap();
            let w = eval(&q.num, z0).unwrap() / eval(&q.den, z0).unwrap();
            assert!((v - w).norm() <= 1e-12 * (1.0 + v.norm()), "{s}: {v} vs {w}");
        }
        q
    }

    #[test]
    fn reciprocal_plus_z() {
        let q = check_pointwise("1/z + z");
        assert_eq!(q.den, MeroExpr::z());
        assert_eq!(q.num_factors().len(), 1);
        assert!(matches!(q.num_factors()[0].base.node(), Node::Add(_)));
    }

    #[test]
    fn sine_is_entire() {
        let q = check_pointwise("sin(z)");
        assert!(q.is_entire());
    }

    #[test]
    fn squared_quotient() {
        let q = check_pointwise("(exp(z)/z)^2");
        assert_eq!(q.den_factors(), &[Factor { base: MeroExpr::z(), power: 2 }]);
        assert_eq!(q.num_factors().len(), 1);
        let Node::Exp(arg) = q.num_factors()[0].base.node() else { panic!() };
        assert_eq!(*arg, MeroExpr::mul([MeroExpr::real(2.0), MeroExpr::z()]));
    }

    #[test]
    fn exponentials_leave_the_denominator() {
        let q = check_pointwise("z/exp(z) + 1/(z*exp(2*z))");
        assert_eq!(q.den, MeroExpr::z());
        let q = check_pointwise("exp(z)/exp(z)");
        assert!(q.num_factors().is_empty() && q.den_factors().is_empty());
        assert_eq!(q.coeff(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn structural_cancellation() {
        let q = check_pointwise("z^2/z");
        assert_eq!(q.num, MeroExpr::z());
        assert!(q.is_entire());
        let q = check_pointwise("(z-1)/((z-1)*z)");
        assert_eq!(q.den, MeroExpr::z());
    }

    #[test]
    fn harder_shapes() {
        for s in [
            "tan(z)",
            "(z-1)*exp(z)/z",
            "(z^2-1)/(z^2+1)",
            "1/(1/z + 1/(z-1))",
            "(exp(2*z)-1)/(exp(z)-1) - exp(z) - 1",
            "tan(z)^2 + 1/tan(z) - z^-3",
            "exp(z^2)/z + exp(z^2)",
        ] {
            check_pointwise(s);
        }
    }

    #[test]
    fn zero_denominator() {
        assert_eq!(to_quotient(&parse_expr("1/(z-z)").unwrap()).unwrap_err(), ZeroDenominator);
    }
}
