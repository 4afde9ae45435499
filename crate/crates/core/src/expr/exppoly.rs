//! Exponential polynomials `Σ p_λ(z) e^{λz}`: a canonical form in which
//! identity is decidable (up to floating-point cancellation).

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use super::{MeroExpr, Node};

/// Frequencies closer than this are the same frequency.
pub const FREQ_TOL: f64 = 1e-12;
/// A coefficient is zero when it is this small relative to the magnitude of
/// the terms that produced it.
const CANCEL_REL: f64 = 1e-12;
/// Cap on the number of stored coefficients.
const MAX_COEFFS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum NotInClass {
    #[error("exp applied to a non-linear argument")]
    NonLinearExponent,
    #[error("expression is not entire")]
    NotEntire,
    #[error("canonical form too large")]
    TooLarge,
}

/// `poly[j]` is the coefficient of `z^j`; the last entry is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub freq: Complex64,
    pub poly: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

#[derive(Default)]
struct Acc {
    slots: Vec<(Complex64, Vec<(Complex64, f64)>)>,
}

impl Acc {
    fn slot(&mut self, freq: Complex64) -> &mut Vec<(Complex64, f64)> {
        let k = match self.slots.iter().position(|(f, _)| (f - freq).norm() <= FREQ_TOL) {
            Some(k) => k,
            None => {
                self.slots.push((freq, Vec::new()));
                self.slots.len() - 1
            }
        };
        &mut self.slots[k].1
    }

    fn push(&mut self, freq: Complex64, j: usize, v: Complex64, mag: f64) {
        let s = self.slot(freq);
        if s.len() <= j {
            s.resize(j + 1, (Complex64::new(0.0, 0.0), 0.0));
        }
        s[j].0 += v;
        s[j].1 += mag;
    }

    fn finish(self) -> ExpPoly {
        let mut terms = Vec::new();
        for (freq, coeffs) in self.slots {
            let mut poly: Vec<Complex64> = coeffs
                .into_iter()
                .map(|(v, mag)| if v.norm() <= CANCEL_REL * mag { Complex64::new(0.0, 0.0) } else { v })
                .collect();
            while poly.last().is_some_and(|c| c.norm() == 0.0) {
                poly.pop();
            }
            if !poly.is_empty() {
                terms.push(ExpTerm { freq, poly });
            }
        }
        terms.sort_by(|a, b| a.freq.re.total_cmp(&b.freq.re).then(a.freq.im.total_cmp(&b.freq.im)));
        ExpPoly { terms }
    }
}

fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(Complex64::new(0.0, 0.0), 0, c)
    }

    /// `c · z^degree · e^{freq·z}`.
    pub fn monomial(freq: Complex64, degree: usize, c: Complex64) -> Self {
        let mut acc = Acc::default();
        acc.push(freq, degree, c, c.norm());
        acc.finish()
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_coeffs(&self) -> usize {
        self.terms.iter().map(|t| t.poly.len()).sum()
    }

    /// The value when the function is constant.
    pub fn as_constant(&self) -> Option<Complex64> {
        match self.terms.as_slice() {
            [] => Some(Complex64::new(0.0, 0.0)),
            [t] if t.freq.norm() <= FREQ_TOL && t.poly.len() == 1 => Some(t.poly[0]),
            _ => None,
        }
    }

    /// `c · e^{λz}` with no polynomial part: the units of the ring.
    pub fn as_unit(&self) -> Option<(Complex64, Complex64)> {
        match self.terms.as_slice() {
            [t] if t.poly.len() == 1 => Some((t.poly[0], t.freq)),
            _ => None,
        }
    }

    fn feed(&self, acc: &mut Acc, scale: Complex64) {
        for t in &self.terms {
            for (j, &c) in t.poly.iter().enumerate() {
                let v = c * scale;
                acc.push(t.freq, j, v, v.norm());
            }
        }
    }

    pub fn add(&self, other: &ExpPoly) -> ExpPoly {
        let mut acc = Acc::default();
        self.feed(&mut acc, Complex64::new(1.0, 0.0));
        other.feed(&mut acc, Complex64::new(1.0, 0.0));
        acc.finish()
    }

    pub fn sub(&self, other: &ExpPoly) -> ExpPoly {
        let mut acc = Acc::default();
        self.feed(&mut acc, Complex64::new(1.0, 0.0));
        other.feed(&mut acc, Complex64::new(-1.0, 0.0));
        acc.finish()
    }

    pub fn scale(&self, c: Complex64) -> ExpPoly {
        let mut acc = Acc::default();
        self.feed(&mut acc, c);
        acc.finish()
    }

    /// Multiplies by `e^{-mu z}`.
    pub fn shift(&self, mu: Complex64) -> ExpPoly {
        let mut acc = Acc::default();
        for t in &self.terms {
            for (j, &c) in t.poly.iter().enumerate() {
                acc.push(t.freq - mu, j, c, c.norm());
            }
        }
        acc.finish()
    }

    pub fn mul(&self, other: &ExpPoly) -> Result<ExpPoly, NotInClass> {
        let bound: usize = self
            .terms
            .iter()
            .flat_map(|a| other.terms.iter().map(move |b| a.poly.len() + b.poly.len() - 1))
            .sum();
        if bound > MAX_COEFFS {
            return Err(NotInClass::TooLarge);
        }
        let mut acc = Acc::default();
        for a in &self.terms {
            for b in &other.terms {
                let freq = a.freq + b.freq;
                for (i, &x) in a.poly.iter().enumerate() {
                    for (j, &y) in b.poly.iter().enumerate() {
                        let v = x * y;
                        acc.push(freq, i + j, v, v.norm());
                    }
                }
            }
        }
        Ok(acc.finish())
    }

    pub fn pow(&self, n: u32) -> Result<ExpPoly, NotInClass> {
        let mut result = ExpPoly::constant(Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base)?;
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn derivative(&self) -> ExpPoly {
        let mut acc = Acc::default();
        for t in &self.terms {
            for (j, &c) in t.poly.iter().enumerate() {
                let v = t.freq * c;
                acc.push(t.freq, j, v, v.norm());
                if j > 0 {
                    let w = c * j as f64;
                    acc.push(t.freq, j - 1, w, w.norm());
                }
            }
        }
        acc.finish()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.terms.iter().map(|t| (t.freq * z).exp() * horner(&t.poly, z)).sum()
    }

    /// Sum of the magnitudes of all terms at `z`.
    pub fn eval_abs(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.terms
            .iter()
            .map(|t| (t.freq * z).re.exp() * t.poly.iter().rev().fold(0.0, |acc, c| acc * r + c.norm()))
            .sum()
    }

    /// Largest `k` such that `z^k` divides every polynomial part.
    pub fn z_content(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.poly.iter().position(|c| c.norm() > 0.0).unwrap_or(0))
            .min()
            .unwrap_or(0)
    }

    /// Divides by `z^k`; `k` must not exceed [`Self::z_content`].
    pub fn div_z_power(&self, k: usize) -> ExpPoly {
        ExpPoly {
            terms: self.terms.iter().map(|t| ExpTerm { freq: t.freq, poly: t.poly[k..].to_vec() }).collect(),
        }
    }

    /// Midpoint of the bounding box of the frequencies.
    pub fn frequency_center(&self) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let (mut lo, mut hi) = (self.terms[0].freq, self.terms[0].freq);
        for t in &self.terms {
            lo = Complex64::new(lo.re.min(t.freq.re), lo.im.min(t.freq.im));
            hi = Complex64::new(hi.re.max(t.freq.re), hi.im.max(t.freq.im));
        }
        (lo + hi) * 0.5
    }

    pub fn approx_eq(&self, other: &ExpPoly) -> bool {
        self.sub(other).is_zero()
    }

    pub fn to_expr(&self) -> MeroExpr {
        let z = MeroExpr::z();
        let mut parts = Vec::new();
        for t in &self.terms {
            let poly = MeroExpr::add(t.poly.iter().enumerate().filter(|(_, c)| c.norm() > 0.0).map(|(j, &c)| {
                MeroExpr::mul([MeroExpr::constant(c), MeroExpr::powi(z.clone(), j as i32)])
            }));
            if t.freq.norm() == 0.0 {
                parts.push(poly);
            } else {
                let arg = MeroExpr::mul([MeroExpr::constant(t.freq), z.clone()]);
                parts.push(MeroExpr::mul([poly, MeroExpr::exp(arg)]));
            }
        }
        MeroExpr::add(parts)
    }
}

/// Canonical form of an entire expression, when it is an exponential
/// polynomial.
pub fn to_exp_poly(e: &MeroExpr) -> Result<ExpPoly, NotInClass> {
    let mut memo = HashMap::new();
    convert(e, &mut memo)
}

fn invert_unit(p: &ExpPoly) -> Result<ExpPoly, NotInClass> {
    match p.as_unit() {
        Some((c, freq)) => Ok(ExpPoly::monomial(-freq, 0, 1.0 / c)),
        None => Err(NotInClass::NotEntire),
    }
}

fn convert(e: &MeroExpr, memo: &mut HashMap<MeroExpr, Result<ExpPoly, NotInClass>>) -> Result<ExpPoly, NotInClass> {
    if let Some(hit) = memo.get(e) {
        return hit.clone();
    }
    let out = (|| match e.node() {
        Node::Const(c) => Ok(ExpPoly::constant(*c)),
        Node::Var => Ok(ExpPoly::monomial(Complex64::new(0.0, 0.0), 1, Complex64::new(1.0, 0.0))),
        Node::Add(xs) => {
            let mut acc = Acc::default();
            for x in xs {
                convert(x, memo)?.feed(&mut acc, Complex64::new(1.0, 0.0));
            }
            let p = acc.finish();
            if p.num_coeffs() > MAX_COEFFS {
                return Err(NotInClass::TooLarge);
            }
            Ok(p)
        }
        Node::Mul(xs) => {
            let mut p = ExpPoly::constant(Complex64::new(1.0, 0.0));
            for x in xs {
                p = p.mul(&convert(x, memo)?)?;
            }
            Ok(p)
        }
        Node::Neg(x) => Ok(convert(x, memo)?.scale(Complex64::new(-1.0, 0.0))),
        Node::Div(a, b) => {
            let inv = invert_unit(&convert(b, memo)?)?;
            convert(a, memo)?.mul(&inv)
        }
        Node::IntPow(b, n) => {
            let base = convert(b, memo)?;
            if *n > 0 {
                base.pow(*n as u32)
            } else {
                invert_unit(&base)?.pow(n.unsigned_abs())
            }
        }
        Node::Exp(a) => {
            let arg = convert(a, memo)?;
            match arg.terms() {
                [] => Ok(ExpPoly::constant(Complex64::new(1.0, 0.0))),
                [t] if t.freq.norm() <= FREQ_TOL && t.poly.len() <= 2 => {
                    let slope = t.poly.get(1).copied().unwrap_or_default();
                    Ok(ExpPoly::monomial(slope, 0, t.poly[0].exp()))
                }
                _ => Err(NotInClass::NonLinearExponent),
            }
        }
    })();
    memo.insert(e.clone(), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn ep(s: &str) -> Result<ExpPoly, NotInClass> {
        to_exp_poly(&parse_expr(s).unwrap())
    }

    #[test]
    fn square_of_exp_cancels() {
        assert!(ep("exp(z)*exp(z) - exp(2*z)").unwrap().is_zero());
    }

    #[test]
    fn mixed_terms() {
        let p = ep("z*exp(-z) + 3").unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[0].freq, Complex64::new(-1.0, 0.0));
        assert_eq!(p.terms()[0].poly, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(p.terms()[1].freq, Complex64::new(0.0, 0.0));
        assert_eq!(p.terms()[1].poly, vec![Complex64::new(3.0, 0.0)]);
    }

    #[test]
    fn nonlinear_exponent_is_rejected() {
        assert_eq!(ep("exp(z^2)"), Err(NotInClass::NonLinearExponent));
        assert_eq!(ep("exp(exp(z))"), Err(NotInClass::NonLinearExponent));
        assert_eq!(ep("1/z"), Err(NotInClass::NotEntire));
    }

    #[test]
    fn units_divide() {
        let p = ep("(z*exp(2*z) + exp(z))/(2*exp(z))").unwrap();
        let q = ep("0.5*z*exp(z) + 0.5").unwrap();
        assert!(p.approx_eq(&q));
        let r = ep("exp(z)^-2 * exp(2*z)").unwrap();
        assert_eq!(r.as_constant(), Some(Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn trig_identity() {
        let p = ep("sin(z)^2 + cos(z)^2 - 1").unwrap();
        assert!(p.is_zero(), "{p:?}");
    }

    #[test]
    fn derivative_and_eval() {
        let p = ep("z^2*exp(3*z) - z").unwrap();
        let dp = p.derivative();
        let z0 = Complex64::new(0.2, -0.4);
        let want = (2.0 * z0 + 3.0 * z0 * z0) * (3.0 * z0).exp() - 1.0;
        assert!((dp.eval(z0) - want).norm() < 1e-13);
        let back = to_exp_poly(&p.to_expr()).unwrap();
        assert!(back.approx_eq(&p));
    }

    #[test]
    fn size_guard() {
        assert_eq!(ep("(z+exp(z)+exp(2.5*z))^400"), Err(NotInClass::TooLarge));
    }
}
