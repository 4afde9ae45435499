//! Proximity, counting and characteristic functions.
//!
//! Divisors are located once on a disk slightly larger than the biggest
//! radius of interest and restricted downward. A radius that passes within
//! `ring_rel·r` of a known zero or pole is nudged (outward first) before
//! anything is evaluated on it.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{to_exp_poly, to_quotient, ExpPoly, MeroExpr, Node, Tape};
use crate::locator::{divisor_of, Divisor, LocatorConfig, LocatorError, Target};
use crate::quad::{integrate, QuadError, QuadOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NevError {
    #[error(transparent)]
    Locator(#[from] LocatorError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("expression has an identically zero denominator")]
    ZeroDenominator,
    #[error("evaluation overflowed on |z| = {0}")]
    Overflow(f64),
    #[error("no radius within 1e-3 relative of {0} keeps clear of every zero and pole")]
    NoSafeRadius(f64),
    #[error("radius {r} lies outside the located disk of radius {located}")]
    OutsideTable { r: f64, located: f64 },
}

/// Weighting of divisor points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountMode {
    Full,
    Reduced,
    /// Only points of multiplicity at most `k`.
    TruncLe(u32),
    TruncLeReduced(u32),
    /// Only points of multiplicity at least `k`.
    TruncGe(u32),
    TruncGeReduced(u32),
    /// Each point weighted `min(mult, k)`.
    Capped(u32),
}

impl CountMode {
    pub fn weight(self, mult: u32) -> u32 {
        match self {
            CountMode::Full => mult,
            CountMode::Reduced => u32::from(mult > 0),
            CountMode::TruncLe(k) => if mult <= k { mult } else { 0 },
            CountMode::TruncLeReduced(k) => u32::from(mult > 0 && mult <= k),
            CountMode::TruncGe(k) => if mult >= k { mult } else { 0 },
            CountMode::TruncGeReduced(k) => u32::from(mult > 0 && mult >= k),
            CountMode::Capped(k) => mult.min(k),
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountMode::Full => write!(f, "full"),
            CountMode::Reduced => write!(f, "reduced"),
            CountMode::TruncLe(k) => write!(f, "trunc_le({k})"),
            CountMode::TruncLeReduced(k) => write!(f, "trunc_le_reduced({k})"),
            CountMode::TruncGe(k) => write!(f, "trunc_ge({k})"),
            CountMode::TruncGeReduced(k) => write!(f, "trunc_ge_reduced({k})"),
            CountMode::Capped(k) => write!(f, "capped({k})"),
        }
    }
}

impl FromStr for CountMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "full" => return Ok(CountMode::Full),
            "reduced" => return Ok(CountMode::Reduced),
            _ => {}
        }
        let (name, rest) = s.split_once('(').ok_or_else(|| format!("unknown counting mode `{s}`"))?;
        let k: u32 = rest
            .strip_suffix(')')
            .and_then(|k| k.trim().parse().ok())
            .filter(|&k| k > 0)
            .ok_or_else(|| format!("bad parameter in `{s}`"))?;
        Ok(match name.trim() {
            "trunc_le" => CountMode::TruncLe(k),
            "trunc_le_reduced" => CountMode::TruncLeReduced(k),
            "trunc_ge" => CountMode::TruncGe(k),
            "trunc_ge_reduced" => CountMode::TruncGeReduced(k),
            "capped" => CountMode::Capped(k),
            _ => return Err(format!("unknown counting mode `{s}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingSpec {
    pub target: Target,
    pub mode: CountMode,
}

/// Integrated counting function of the part of `div` in `|z| ≤ r`:
/// `Σ_{0<|a|≤r} w·log(r/|a|) + w₀·log r`.
pub fn counting(div: &Divisor, r: f64, mode: CountMode) -> f64 {
    div.points
        .iter()
        .filter(|p| p.location.norm() <= r)
        .map(|p| {
            let w = mode.weight(p.mult) as f64;
            let a = p.location.norm();
            if a == 0.0 {
                w * r.ln()
            } else {
                w * (r / a).ln()
            }
        })
        .sum()
}

#[derive(Debug, Clone)]
pub struct NevConfig {
    pub locator: LocatorConfig,
    pub quad: QuadOptions,
    /// Radius nudges are multiples of `perturb_step·r`, at most
    /// `perturb_steps` of them in each direction.
    pub perturb_step: f64,
    pub perturb_steps: u32,
    /// Minimum number of samples used to bracket the kinks of `log⁺`.
    pub min_samples: usize,
}

impl Default for NevConfig {
    fn default() -> Self {
        NevConfig {
            locator: LocatorConfig::default(),
            quad: QuadOptions { abs_tol: 1e-9, rel_tol: 1e-12, max_evals: 400_000 },
            perturb_step: 1e-4,
            perturb_steps: 10,
            min_samples: 64,
        }
    }
}

enum Part {
    /// `exp(arg)`: the log-modulus is `Re arg`.
    Exp(Tape),
    /// Exponential polynomial, evaluated with its largest exponential
    /// factored out.
    Sum(ExpPoly),
    Other(Tape),
}

/// `log|f|` evaluated factor by factor, so that large exponentials never
/// overflow.
struct LogModulus {
    log_coeff: f64,
    parts: Vec<(Part, f64)>,
    /// Rough oscillation rate per unit length, used to size the kink scan.
    rate: f64,
}

impl LogModulus {
    fn new(f: &MeroExpr) -> Result<Self, NevError> {
        let q = to_quotient(f).map_err(|_| NevError::ZeroDenominator)?;
        let mut parts = Vec::new();
        let mut rate = 0.0;
        for (factors, sign) in [(q.num_factors(), 1.0), (q.den_factors(), -1.0)] {
            for fac in factors {
                let power = sign * fac.power as f64;
                let part = match fac.base.node() {
                    Node::Exp(arg) => Part::Exp(Tape::compile(std::slice::from_ref(arg))),
                    _ => match to_exp_poly(&fac.base) {
                        Ok(p) => {
                            let lam = p.terms().iter().map(|t| t.freq.norm()).fold(0.0, f64::max);
                            let deg = p.terms().iter().map(|t| t.poly.len()).max().unwrap_or(1);
                            rate += fac.power as f64 * (lam + deg as f64);
                            Part::Sum(p)
                        }
                        Err(_) => {
                            rate += fac.power as f64 * 4.0;
                            Part::Other(Tape::compile(std::slice::from_ref(&fac.base)))
                        }
                    },
                };
                parts.push((part, power));
            }
        }
        let log_coeff = if q.is_zero() { f64::NEG_INFINITY } else { q.coeff().norm().ln() };
        Ok(LogModulus { log_coeff, parts, rate })
    }

    fn eval(&self, z: Complex64) -> Option<f64> {
        let mut acc = self.log_coeff;
        if acc == f64::NEG_INFINITY {
            return Some(acc);
        }
        for (part, power) in &self.parts {
            let l = match part {
                Part::Exp(t) => t.eval1(z).ok()?.re,
                Part::Sum(p) => {
                    let top = p.terms().iter().map(|t| (t.freq * z).re).fold(f64::NEG_INFINITY, f64::max);
                    let s: Complex64 = p
                        .terms()
                        .iter()
                        .map(|t| {
                            let poly = t.poly.iter().rev().fold(Complex64::new(0.0, 0.0), |a, &c| a * z + c);
                            poly * (t.freq * z - top).exp()
                        })
                        .sum();
                    top + s.norm().ln()
                }
                Part::Other(t) => t.eval1(z).ok()?.norm().ln(),
            };
            acc += power * l;
        }
        Some(acc)
    }
}

/// `(1/2π)∫ log⁺|f(re^{iθ})| dθ`.
///
/// The zero crossings of `log|f|` are bracketed on a uniform scan, refined
/// by bisection and passed to the quadrature as breakpoints.
pub fn proximity(f: &MeroExpr, r: f64) -> Result<f64, NevError> {
    proximity_with(f, r, &NevConfig::default())
}

pub fn proximity_with(f: &MeroExpr, r: f64, cfg: &NevConfig) -> Result<f64, NevError> {
    let lm = LogModulus::new(f)?;
    proximity_of(&lm, r, cfg)
}

fn proximity_of(lm: &LogModulus, r: f64, cfg: &NevConfig) -> Result<f64, NevError> {
    if lm.log_coeff == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let g = |t: f64| lm.eval(Complex64::from_polar(r, t));
    let n = cfg.min_samples.max((16.0 * lm.rate * r).ceil() as usize);
    let mut samples = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let t = TAU * j as f64 / n as f64;
        samples.push((t, g(t).ok_or(NevError::Overflow(r))?));
    }
    let mut breaks = vec![0.0];
    for w in samples.windows(2) {
        let ((mut a, fa), (mut b, fb)) = (w[0], w[1]);
        if (fa > 0.0) == (fb > 0.0) {
            continue;
        }
        let pos_a = fa > 0.0;
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if b - a <= 1e-15 * TAU {
                break;
            }
            match g(m) {
                Some(v) if (v > 0.0) == pos_a => a = m,
                Some(_) => b = m,
                None => break,
            }
        }
        let t = 0.5 * (a + b);
        if t > *breaks.last().unwrap() {
            breaks.push(t);
        }
    }
    if *breaks.last().unwrap() < TAU {
        breaks.push(TAU);
    }
    let mut overflow = false;
    let opts = QuadOptions { abs_tol: cfg.quad.abs_tol * TAU, ..cfg.quad };
    let res = integrate(
        |t| match g(t) {
            Some(v) => [v.max(0.0)],
            None => {
                overflow = true;
                [0.0]
            }
        },
        &breaks,
        &opts,
    )?;
    if overflow {
        return Err(NevError::Overflow(r));
    }
    Ok(res.value[0] / TAU)
}

/// Values of the characteristic at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    /// Radius actually used.
    pub r: f64,
    pub m: f64,
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub perturbed_r: bool,
}

/// Zeros and poles of a set of functions on a common disk.
#[derive(Debug, Clone)]
pub struct DivisorTable {
    radius: f64,
    entries: HashMap<MeroExpr, (Divisor, Divisor)>,
    ring_rel: f64,
}

impl DivisorTable {
    /// Locates the zeros and poles of every expression in a disk a little
    /// larger than `r_max`, so that nudged radii stay inside it.
    pub fn build(exprs: &[MeroExpr], r_max: f64, cfg: &NevConfig) -> Result<Self, NevError> {
        let mut uniq: Vec<MeroExpr> = Vec::new();
        for e in exprs {
            if !uniq.contains(e) {
                uniq.push(e.clone());
            }
        }
        let base = r_max * (1.0 + 2.0 * cfg.perturb_step * cfg.perturb_steps as f64);
        let mut last = None;
        for i in 0..=cfg.perturb_steps {
            let radius = base * (1.0 + cfg.perturb_step * i as f64);
            let found: Result<Vec<_>, LocatorError> = uniq
                .par_iter()
                .map(|e| divisor_of(e, radius, Target::Finite(Complex64::new(0.0, 0.0)), &cfg.locator))
                .collect();
            match found {
                Ok(divs) => {
                    let entries = uniq.iter().cloned().zip(divs).collect();
                    return Ok(DivisorTable { radius, entries, ring_rel: cfg.locator.ring_rel });
                }
                Err(e @ LocatorError::RingTooClose { .. }) => last = Some(e),
                Err(e) => return Err(e.into()),
            }
        }
        Err(last.map_or(NevError::NoSafeRadius(base), NevError::Locator))
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Zeros of `e`. Panics if `e` was not part of the build.
    pub fn zeros(&self, e: &MeroExpr) -> &Divisor {
        &self.entries.get(e).expect("expression not in table").0
    }

    pub fn poles(&self, e: &MeroExpr) -> &Divisor {
        &self.entries.get(e).expect("expression not in table").1
    }

    fn clear_of_points(&self, r: f64) -> bool {
        let delta = self.ring_rel * r;
        self.entries
            .values()
            .flat_map(|(z, p)| z.points.iter().chain(&p.points))
            .all(|p| (p.location.norm() - r).abs() >= delta)
    }

    /// The requested radius, or the nearest nudge of it (outward first)
    /// that keeps clear of every located point. The flag is set when the
    /// radius moved.
    pub fn safe_radius(&self, r: f64, cfg: &NevConfig) -> Result<(f64, bool), NevError> {
        for i in 0..=cfg.perturb_steps {
            for sign in [1.0, -1.0] {
                if i == 0 && sign < 0.0 {
                    continue;
                }
                let rr = r * (1.0 + sign * cfg.perturb_step * i as f64);
                if rr > self.radius * (1.0 - self.ring_rel) {
                    return Err(NevError::OutsideTable { r: rr, located: self.radius });
                }
                if self.clear_of_points(rr) {
                    return Ok((rr, i > 0));
                }
            }
        }
        Err(NevError::NoSafeRadius(r))
    }

    /// Characteristic of a tabulated expression at an already safe radius.
    pub fn characteristic_at(&self, f: &MeroExpr, r: f64, cfg: &NevConfig) -> Result<RadialSample, NevError> {
        let m = proximity_with(f, r, cfg)?;
        let n = counting(self.poles(f), r, CountMode::Full);
        Ok(RadialSample { r, m, n, t: m + n, perturbed_r: false })
    }
}

/// `T(r, f) = m(r, f) + N(r, f)`, nudging the radius when a zero or pole is
/// too close to the circle.
pub fn characteristic(f: &MeroExpr, r: f64) -> Result<RadialSample, NevError> {
    let cfg = NevConfig::default();
    let mut out = radial_grid_with(f, &[r], &cfg)?;
    out.pop().unwrap()
}

/// Characteristic on each radius. The divisors are located once; a radius
/// that cannot be evaluated yields an error in its slot.
pub fn radial_grid(f: &MeroExpr, radii: &[f64]) -> Result<Vec<Result<RadialSample, NevError>>, NevError> {
    radial_grid_with(f, radii, &NevConfig::default())
}

pub fn radial_grid_with(
    f: &MeroExpr,
    radii: &[f64],
    cfg: &NevConfig,
) -> Result<Vec<Result<RadialSample, NevError>>, NevError> {
    let Some(&r_max) = radii.iter().max_by(|a, b| a.total_cmp(b)) else {
        return Ok(vec![]);
    };
    let table = DivisorTable::build(std::slice::from_ref(f), r_max, cfg)?;
    Ok(radii
        .par_iter()
        .map(|&r| {
            let (rr, moved) = table.safe_radius(r, cfg)?;
            let mut s = table.characteristic_at(f, rr, cfg)?;
            s.perturbed_r = moved;
            Ok(s)
        })
        .collect())
}

/// `count` log-spaced (or evenly spaced) radii from `start` to `stop`.
pub fn radius_grid(start: f64, stop: f64, count: usize, log: bool) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    (0..count)
        .map(|i| {
            let s = i as f64 / (count - 1) as f64;
            if log {
                (start.ln() + s * (stop.ln() - start.ln())).exp()
            } else {
                start + s * (stop - start)
            }
        })
        .collect()
}
