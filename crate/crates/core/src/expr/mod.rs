//! Expression trees for meromorphic functions of one complex variable `z`.
//!
//! The class is closed under `+`, `-`, `*`, `/`, integer powers and `exp` of
//! entire subexpressions. Trees are immutable and reference counted, so
//! derivatives and differential polynomials share their subtrees freely.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_complex::Complex64;

pub mod diff;
pub mod eval;
pub mod exppoly;
pub mod identity;
pub mod parse;
pub mod quotient;

pub use diff::{differentiate, nth_derivative};
pub use eval::{eval, PoleSignal, Tape};
pub use exppoly::{to_exp_poly, ExpPoly, ExpTerm, NotInClass};
pub use identity::{is_constant, is_identically_zero, ConstTest, IdentityConfig, ZeroTest};
pub use parse::{parse_expr, ParseError};
pub use quotient::{to_quotient, Factor, QuotientForm, ZeroDenominator};

/// One node of an expression tree.
#[derive(Clone, Debug)]
pub enum Node {
    Const(Complex64),
    Var,
    Add(Vec<MeroExpr>),
    Mul(Vec<MeroExpr>),
    Neg(MeroExpr),
    Div(MeroExpr, MeroExpr),
    /// Nonzero integer exponent.
    IntPow(MeroExpr, i32),
    Exp(MeroExpr),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
}

/// A meromorphic function given as an expression tree.
///
/// Equality and hashing are structural (`z+1` and `1+z` are different
/// trees); use [`is_identically_zero`] for mathematical identity.
#[derive(Clone)]
pub struct MeroExpr(Arc<Inner>);

fn const_bits(c: Complex64) -> (u64, u64) {
    // +0.0 and -0.0 are the same constant.
    let norm = |x: f64| if x == 0.0 { 0.0f64.to_bits() } else { x.to_bits() };
    (norm(c.re), norm(c.im))
}

fn node_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    match node {
        Node::Const(c) => {
            0u8.hash(&mut h);
            const_bits(*c).hash(&mut h);
        }
        Node::Var => 1u8.hash(&mut h),
        Node::Add(xs) => {
            2u8.hash(&mut h);
            for x in xs {
                x.0.hash.hash(&mut h);
            }
        }
        Node::Mul(xs) => {
            3u8.hash(&mut h);
            for x in xs {
                x.0.hash.hash(&mut h);
            }
        }
        Node::Neg(x) => {
            4u8.hash(&mut h);
            x.0.hash.hash(&mut h);
        }
        Node::Div(a, b) => {
            5u8.hash(&mut h);
            a.0.hash.hash(&mut h);
            b.0.hash.hash(&mut h);
        }
        Node::IntPow(b, n) => {
            6u8.hash(&mut h);
            b.0.hash.hash(&mut h);
            n.hash(&mut h);
        }
        Node::Exp(a) => {
            7u8.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
    }
    h.finish()
}

impl MeroExpr {
    /// Wraps a node without any simplification.
    ///
    /// # Panics
    /// If the node breaks a tree invariant: a zero `IntPow` exponent, a
    /// literal zero denominator, or an empty `Add`/`Mul`.
    pub fn from_node(node: Node) -> Self {
        match &node {
            Node::IntPow(_, 0) => panic!("IntPow exponent must be nonzero"),
            Node::Div(_, d) if d.as_const() == Some(Complex64::new(0.0, 0.0)) => {
                panic!("literal zero denominator")
            }
            Node::Add(xs) | Node::Mul(xs) if xs.is_empty() => panic!("empty n-ary node"),
            _ => {}
        }
        let hash = node_hash(&node);
        MeroExpr(Arc::new(Inner { node, hash }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    pub fn constant(c: Complex64) -> Self {
        Self::from_node(Node::Const(c))
    }

    pub fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    /// The independent variable.
    pub fn z() -> Self {
        Self::from_node(Node::Var)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero_const(&self) -> bool {
        self.as_const().is_some_and(|c| c == Complex64::new(0.0, 0.0))
    }

    pub fn is_one_const(&self) -> bool {
        self.as_const().is_some_and(|c| c == Complex64::new(1.0, 0.0))
    }

    /// Sum with light folding: nested sums are flattened, constants
    /// collected and zeros dropped.
    pub fn add(terms: impl IntoIterator<Item = MeroExpr>) -> Self {
        let mut flat = Vec::new();
        let mut constant = Complex64::new(0.0, 0.0);
        for t in terms {
            match t.node() {
                Node::Add(inner) => {
                    for u in inner {
                        match u.as_const() {
                            Some(c) => constant += c,
                            None => flat.push(u.clone()),
                        }
                    }
                }
                Node::Const(c) => constant += *c,
                _ => flat.push(t),
            }
        }
        if constant != Complex64::new(0.0, 0.0) {
            flat.insert(0, Self::constant(constant));
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => Self::from_node(Node::Add(flat)),
        }
    }

    /// Product with light folding: nested products are flattened, constants
    /// multiplied together and a zero factor annihilates.
    pub fn mul(factors: impl IntoIterator<Item = MeroExpr>) -> Self {
        let mut flat = Vec::new();
        let mut constant = Complex64::new(1.0, 0.0);
        for f in factors {
            match f.node() {
                Node::Mul(inner) => {
                    for u in inner {
                        match u.as_const() {
                            Some(c) => constant *= c,
                            None => flat.push(u.clone()),
                        }
                    }
                }
                Node::Const(c) => constant *= *c,
                _ => flat.push(f),
            }
        }
        if constant == Complex64::new(0.0, 0.0) {
            return Self::zero();
        }
        if constant != Complex64::new(1.0, 0.0) || flat.is_empty() {
            flat.insert(0, Self::constant(constant));
        }
        match flat.len() {
            1 => flat.pop().unwrap(),
            _ => Self::from_node(Node::Mul(flat)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(x: MeroExpr) -> Self {
        match x.node() {
            Node::Const(c) => Self::constant(-*c),
            Node::Neg(inner) => inner.clone(),
            _ => Self::from_node(Node::Neg(x)),
        }
    }

    /// Quotient with light folding.
    ///
    /// # Panics
    /// If `den` is the literal constant zero.
    #[allow(clippy::should_implement_trait)]
    pub fn div(num: MeroExpr, den: MeroExpr) -> Self {
        if den.is_one_const() || num.is_zero_const() {
            return num;
        }
        if let (Some(a), Some(b)) = (num.as_const(), den.as_const()) {
            if b != Complex64::new(0.0, 0.0) {
                return Self::constant(a / b);
            }
        }
        Self::from_node(Node::Div(num, den))
    }

    /// Integer power; `x^0` folds to one.
    pub fn powi(base: MeroExpr, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        if n == 1 {
            return base;
        }
        match base.node() {
            Node::Const(c) if *c != Complex64::new(0.0, 0.0) || n > 0 => {
                Self::constant(c.powi(n))
            }
            Node::IntPow(b, m) => match m.checked_mul(n) {
                Some(k) => Self::from_node(Node::IntPow(b.clone(), k)),
                None => Self::from_node(Node::IntPow(base.clone(), n)),
            },
            _ => Self::from_node(Node::IntPow(base, n)),
        }
    }

    pub fn exp(arg: MeroExpr) -> Self {
        if arg.is_zero_const() {
            return Self::one();
        }
        Self::from_node(Node::Exp(arg))
    }

    /// Number of distinct nodes in the expression DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        fn walk(e: &MeroExpr, seen: &mut std::collections::HashSet<*const Inner>) {
            if !seen.insert(Arc::as_ptr(&e.0)) {
                return;
            }
            for c in e.children() {
                walk(c, seen);
            }
        }
        walk(self, &mut seen);
        seen.len()
    }

    pub fn children(&self) -> Vec<&MeroExpr> {
        match self.node() {
            Node::Const(_) | Node::Var => vec![],
            Node::Add(xs) | Node::Mul(xs) => xs.iter().collect(),
            Node::Neg(x) | Node::IntPow(x, _) | Node::Exp(x) => vec![x],
            Node::Div(a, b) => vec![a, b],
        }
    }

    pub fn contains_exp(&self) -> bool {
        matches!(self.node(), Node::Exp(_)) || self.children().iter().any(|c| c.contains_exp())
    }

    pub fn contains_var(&self) -> bool {
        matches!(self.node(), Node::Var) || self.children().iter().any(|c| c.contains_var())
    }

    /// Structural sufficient condition for having no poles: every divisor
    /// is a nonvanishing constant or exponential.
    pub fn is_entire(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Var => true,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().all(MeroExpr::is_entire),
            Node::Neg(x) => x.is_entire(),
            Node::Exp(a) => a.is_entire(),
            Node::IntPow(b, n) => {
                if *n > 0 {
                    b.is_entire()
                } else {
                    b.is_nonvanishing() && b.is_entire()
                }
            }
            Node::Div(a, b) => a.is_entire() && b.is_nonvanishing() && b.is_entire(),
        }
    }

    fn is_nonvanishing(&self) -> bool {
        match self.node() {
            Node::Const(c) => *c != Complex64::new(0.0, 0.0),
            Node::Exp(_) => true,
            Node::Neg(x) | Node::IntPow(x, _) => x.is_nonvanishing(),
            Node::Mul(xs) => xs.iter().all(MeroExpr::is_nonvanishing),
            Node::Div(a, b) => a.is_nonvanishing() && b.is_nonvanishing(),
            Node::Var | Node::Add(_) => false,
        }
    }

    /// True when the expression is a rational function of `z`.
    pub fn is_rational(&self) -> bool {
        !self.contains_exp()
    }
}

impl PartialEq for MeroExpr {
    fn eq(&self, other: &Self) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        if self.0.hash != other.0.hash {
            return false;
        }
        match (self.node(), other.node()) {
            (Node::Const(a), Node::Const(b)) => const_bits(*a) == const_bits(*b),
            (Node::Var, Node::Var) => true,
            (Node::Add(a), Node::Add(b)) | (Node::Mul(a), Node::Mul(b)) => a == b,
            (Node::Neg(a), Node::Neg(b)) | (Node::Exp(a), Node::Exp(b)) => a == b,
            (Node::Div(a, b), Node::Div(c, d)) => a == c && b == d,
            (Node::IntPow(a, n), Node::IntPow(b, m)) => n == m && a == b,
            _ => false,
        }
    }
}

impl Eq for MeroExpr {}

impl Hash for MeroExpr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for MeroExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "Const({c})"),
            Node::Var => write!(f, "z"),
            Node::Add(xs) => f.debug_tuple("Add").field(xs).finish(),
            Node::Mul(xs) => f.debug_tuple("Mul").field(xs).finish(),
            Node::Neg(x) => f.debug_tuple("Neg").field(x).finish(),
            Node::Div(a, b) => f.debug_tuple("Div").field(a).field(b).finish(),
            Node::IntPow(b, n) => f.debug_tuple("IntPow").field(b).field(n).finish(),
            Node::Exp(a) => f.debug_tuple("Exp").field(a).finish(),
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) if c.re >= 0.0 => write!(f, "{}", c.re),
        (_, true) => write!(f, "(-{})", -c.re),
        (true, false) => write!(f, "({}*i)", c.im),
        (false, false) => {
            if c.im >= 0.0 {
                write!(f, "({}+{}*i)", c.re, c.im)
            } else {
                write!(f, "({}-{}*i)", c.re, -c.im)
            }
        }
    }
}

/// Renders in the input grammar, so `parse_expr(&e.to_string())` evaluates
/// identically to `e`.
impl fmt::Display for MeroExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_const(f, *c),
            Node::Var => write!(f, "z"),
            Node::Add(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Node::Mul(xs) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Node::Neg(x) => write!(f, "(-{x})"),
            Node::Div(a, b) => write!(f, "({a}/{b})"),
            Node::IntPow(b, n) => write!(f, "({b})^{n}"),
            Node::Exp(a) => write!(f, "exp({a})"),
        }
    }
}

impl std::ops::Add for MeroExpr {
    type Output = MeroExpr;
    fn add(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::add([self, rhs])
    }
}

impl std::ops::Sub for MeroExpr {
    type Output = MeroExpr;
    fn sub(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::add([self, MeroExpr::neg(rhs)])
    }
}

impl std::ops::Mul for MeroExpr {
    type Output = MeroExpr;
    fn mul(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::mul([self, rhs])
    }
}

impl std::ops::Div for MeroExpr {
    type Output = MeroExpr;
    fn div(self, rhs: MeroExpr) -> MeroExpr {
        MeroExpr::div(self, rhs)
    }
}

impl std::ops::Neg for MeroExpr {
    type Output = MeroExpr;
    fn neg(self) -> MeroExpr {
        MeroExpr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structural_equality_ignores_sharing() {
        let a = MeroExpr::exp(MeroExpr::z() * MeroExpr::real(3.0));
        let b = MeroExpr::exp(MeroExpr::z() * MeroExpr::real(3.0));
        assert_eq!(a, b);
        assert_ne!(a, MeroExpr::exp(MeroExpr::z()));
    }

    #[test]
    fn builders_fold_trivial_structure() {
        let z = MeroExpr::z();
        assert_eq!(MeroExpr::mul([MeroExpr::one(), z.clone()]), z);
        assert!(MeroExpr::mul([MeroExpr::zero(), z.clone()]).is_zero_const());
        assert_eq!(MeroExpr::add([MeroExpr::zero(), z.clone()]), z);
        assert_eq!(MeroExpr::powi(z.clone(), 1), z);
        assert!(MeroExpr::powi(z.clone(), 0).is_one_const());
        assert_eq!(MeroExpr::neg(MeroExpr::neg(z.clone())), z);
        assert_eq!(
            MeroExpr::powi(MeroExpr::powi(z.clone(), 2), -3),
            MeroExpr::from_node(Node::IntPow(z, -6))
        );
    }

    #[test]
    #[should_panic(expected = "literal zero denominator")]
    fn zero_denominator_is_rejected() {
        let _ = MeroExpr::from_node(Node::Div(MeroExpr::one(), MeroExpr::zero()));
    }

    #[test]
    fn entire_detection() {
        let z = MeroExpr::z();
        assert!(MeroExpr::div(z.clone(), MeroExpr::real(2.0)).is_entire());
        assert!(MeroExpr::div(z.clone(), MeroExpr::exp(z.clone())).is_entire());
        assert!(!MeroExpr::div(MeroExpr::one(), z.clone()).is_entire());
        assert!(!MeroExpr::powi(z, -2).is_entire());
    }
}
