//! Identity tests: exact on exponential polynomials, sampled otherwise.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::exppoly::FREQ_TOL;
use super::{differentiate, to_exp_poly, to_quotient, MeroExpr, Node, Tape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    ProbablyZero,
    ProbablyNonZero,
}

impl ZeroTest {
    pub fn is_zero_like(self) -> bool {
        matches!(self, ZeroTest::Zero | ZeroTest::ProbablyZero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstTest {
    Constant(Complex64),
    NonConstant,
    Unknown,
}

/// Parameters of the sampled fallback.
#[derive(Debug, Clone)]
pub struct IdentityConfig {
    pub seed: u64,
    pub points_per_circle: usize,
    pub radii: [f64; 2],
    /// A sample counts as zero when `|e(z)| ≤ rel_threshold · scale(z)`.
    pub rel_threshold: f64,
}

impl Default for IdentityConfig {
    fn default() -> Self {
        IdentityConfig { seed: 0x5EED, points_per_circle: 8, radii: [0.7, 1.3], rel_threshold: 1e-9 }
    }
}

impl IdentityConfig {
    pub fn with_seed(seed: u64) -> Self {
        IdentityConfig { seed, ..Self::default() }
    }

    pub fn sample_points(&self) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pts = Vec::with_capacity(2 * self.points_per_circle);
        for &r in &self.radii {
            for _ in 0..self.points_per_circle {
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                pts.push(Complex64::from_polar(r, theta));
            }
        }
        pts
    }
}

fn sampled(e: &MeroExpr, cfg: &IdentityConfig) -> ZeroTest {
    let tape = Tape::compile(std::slice::from_ref(e));
    let mut seen = 0;
    for z in cfg.sample_points() {
        if let Ok((v, scale)) = tape.eval_with_scale(z) {
            seen += 1;
            if v.norm() > cfg.rel_threshold * scale {
                return ZeroTest::ProbablyNonZero;
            }
        }
    }
    if seen == 0 {
        ZeroTest::ProbablyNonZero
    } else {
        ZeroTest::ProbablyZero
    }
}

pub fn is_identically_zero(e: &MeroExpr) -> ZeroTest {
    is_identically_zero_with(e, &IdentityConfig::default())
}

/// Works factor by factor on the numerator of [`to_quotient`]: the
/// expression vanishes iff one factor does.
pub fn is_identically_zero_with(e: &MeroExpr, cfg: &IdentityConfig) -> ZeroTest {
    let q = match to_quotient(e) {
        Ok(q) => q,
        Err(_) => return sampled(e, cfg),
    };
    if q.is_zero() {
        return ZeroTest::Zero;
    }
    let mut uncertain = Vec::new();
    for f in q.num_factors() {
        match f.base.node() {
            Node::Exp(_) | Node::Var => {}
            _ => match to_exp_poly(&f.base) {
                Ok(p) if p.is_zero() => return ZeroTest::Zero,
                Ok(_) => {}
                Err(_) => uncertain.push(&f.base),
            },
        }
    }
    for b in &uncertain {
        if sampled(b, cfg) == ZeroTest::ProbablyZero {
            return ZeroTest::ProbablyZero;
        }
    }
    if uncertain.is_empty() {
        ZeroTest::NonZero
    } else {
        ZeroTest::ProbablyNonZero
    }
}

pub fn is_constant(e: &MeroExpr) -> ConstTest {
    is_constant_with(e, &IdentityConfig::default())
}

/// Exact when numerator and denominator are exponential polynomials: the
/// quotient `N/D` is constant iff `N'D - ND'` vanishes.
pub fn is_constant_with(e: &MeroExpr, cfg: &IdentityConfig) -> ConstTest {
    let Ok(q) = to_quotient(e) else {
        return ConstTest::Unknown;
    };
    if q.is_zero() {
        return ConstTest::Constant(Complex64::new(0.0, 0.0));
    }
    if let (Ok(n), Ok(d)) = (to_exp_poly(&q.num), to_exp_poly(&q.den)) {
        if n.is_zero() {
            return ConstTest::Constant(Complex64::new(0.0, 0.0));
        }
        if let (Ok(a), Ok(b)) = (n.derivative().mul(&d), n.mul(&d.derivative())) {
            if !a.approx_eq(&b) {
                return ConstTest::NonConstant;
            }
            // Read the ratio off the largest denominator coefficient.
            let mut best = (0.0, Complex64::new(0.0, 0.0), 0usize, Complex64::new(0.0, 0.0));
            for t in d.terms() {
                for (j, c) in t.poly.iter().enumerate() {
                    if c.norm() > best.0 {
                        best = (c.norm(), t.freq, j, *c);
                    }
                }
            }
            let (_, freq, j, dc) = best;
            let nc = n
                .terms()
                .iter()
                .find(|t| (t.freq - freq).norm() <= FREQ_TOL)
                .and_then(|t| t.poly.get(j).copied())
                .unwrap_or_default();
            return ConstTest::Constant(nc / dc);
        }
    }
    let de = differentiate(e);
    match is_identically_zero_with(&de, cfg) {
        ZeroTest::Zero | ZeroTest::ProbablyZero => {
            let tape = Tape::compile(std::slice::from_ref(e));
            cfg.sample_points()
                .into_iter()
                .find_map(|z| tape.eval1(z).ok())
                .map_or(ConstTest::Unknown, ConstTest::Constant)
        }
        _ => ConstTest::NonConstant,
    }
}
