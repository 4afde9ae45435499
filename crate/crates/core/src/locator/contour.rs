//! Argument-principle integrals of `g'/g` along segments and arcs.
//!
//! The path is cut into panels until, on every panel, the 15-point Kronrod
//! estimate of `∫ g'/g` agrees with the 7-point Gauss estimate and with the
//! principal logarithm of `g(b)/g(a)`. Summing the principal argument
//! increments then gives the winding exactly; the quadrature certifies
//! that no panel hides a full turn.

use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

use crate::expr::{differentiate, ExpPoly, MeroExpr, PoleSignal, Tape};
use crate::quad::{gk15_combine, gk15_nodes};

/// An entire function that can report derivatives of order `k` and `k+1`.
pub(crate) trait Analytic: Sync {
    fn pair(&self, k: usize, z: Complex64) -> Result<(Complex64, Complex64), PoleSignal>;
}

/// Highest derivative order a search may ask for.
pub(crate) const MAX_ORDER: usize = 7;

pub(crate) struct ExpPolyFn {
    ders: Vec<ExpPoly>,
}

impl ExpPolyFn {
    pub(crate) fn new(p: ExpPoly) -> Self {
        let mut ders = vec![p];
        for i in 0..MAX_ORDER {
            let d = ders[i].derivative();
            ders.push(d);
        }
        ExpPolyFn { ders }
    }
}

impl Analytic for ExpPolyFn {
    fn pair(&self, k: usize, z: Complex64) -> Result<(Complex64, Complex64), PoleSignal> {
        let a = self.ders[k].eval(z);
        let b = self.ders[k + 1].eval(z);
        if a.is_finite() && b.is_finite() {
            Ok((a, b))
        } else {
            Err(PoleSignal { overflow: true })
        }
    }
}

/// Symbolic derivatives compiled on first use.
pub(crate) struct TapeFn {
    exprs: Mutex<Vec<MeroExpr>>,
    tapes: Vec<OnceLock<Tape>>,
}

impl TapeFn {
    pub(crate) fn new(g: MeroExpr) -> Self {
        TapeFn { exprs: Mutex::new(vec![g]), tapes: (0..MAX_ORDER).map(|_| OnceLock::new()).collect() }
    }

    fn expr(&self, i: usize) -> MeroExpr {
        let mut ex = self.exprs.lock().unwrap();
        while ex.len() <= i {
            let d = differentiate(ex.last().unwrap());
            ex.push(d);
        }
        ex[i].clone()
    }
}

impl Analytic for TapeFn {
    fn pair(&self, k: usize, z: Complex64) -> Result<(Complex64, Complex64), PoleSignal> {
        self.tapes[k].get_or_init(|| Tape::compile(&[self.expr(k), self.expr(k + 1)])).eval2(z)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Path {
    Segment { a: Complex64, b: Complex64 },
    /// `center + radius·e^{iθ}` for θ from `t0` to `t1`.
    Arc { center: Complex64, radius: f64, t0: f64, t1: f64 },
}

impl Path {
    fn point(&self, s: f64) -> Complex64 {
        match *self {
            Path::Segment { a, b } => a + (b - a) * s,
            Path::Arc { center, radius, t0, t1 } => center + Complex64::from_polar(radius, t0 + s * (t1 - t0)),
        }
    }

    fn velocity(&self, s: f64) -> Complex64 {
        match *self {
            Path::Segment { a, b } => b - a,
            Path::Arc { radius, t0, t1, .. } => {
                Complex64::i() * Complex64::from_polar(radius, t0 + s * (t1 - t0)) * (t1 - t0)
            }
        }
    }

    fn length(&self, s0: f64, s1: f64) -> f64 {
        match *self {
            Path::Segment { a, b } => (b - a).norm() * (s1 - s0),
            Path::Arc { radius, t0, t1, .. } => radius * (t1 - t0).abs() * (s1 - s0),
        }
    }

    pub(crate) fn circle(center: Complex64, radius: f64) -> Path {
        Path::Arc { center, radius, t0: 0.0, t1: std::f64::consts::TAU }
    }
}

/// Accumulated result along a path.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PathIntegral {
    /// Sum of principal argument increments of `g`.
    pub darg: f64,
    /// `∫ g'/g dz`.
    pub log_int: Complex64,
    /// `∫ z g'/g dz`.
    pub moment: Complex64,
    /// Smallest Newton step length `|g/g'|` seen, and where.
    pub min_newton: f64,
    pub min_newton_at: Complex64,
}

impl PathIntegral {
    pub(crate) fn zero() -> Self {
        PathIntegral {
            darg: 0.0,
            log_int: Complex64::new(0.0, 0.0),
            moment: Complex64::new(0.0, 0.0),
            min_newton: f64::INFINITY,
            min_newton_at: Complex64::new(0.0, 0.0),
        }
    }

    pub(crate) fn reversed(&self) -> Self {
        PathIntegral { darg: -self.darg, log_int: -self.log_int, moment: -self.moment, ..*self }
    }

    pub(crate) fn join(&self, other: &PathIntegral) -> Self {
        let (min_newton, min_newton_at) = if other.min_newton < self.min_newton {
            (other.min_newton, other.min_newton_at)
        } else {
            (self.min_newton, self.min_newton_at)
        };
        PathIntegral {
            darg: self.darg + other.darg,
            log_int: self.log_int + other.log_int,
            moment: self.moment + other.moment,
            min_newton,
            min_newton_at,
        }
    }

    /// Winding of a closed loop.
    pub(crate) fn winding(&self) -> i64 {
        (self.darg / std::f64::consts::TAU).round() as i64
    }

    /// Distance of the quadrature value from the winding integer.
    pub(crate) fn residual(&self) -> f64 {
        (self.log_int.im / std::f64::consts::TAU - self.winding() as f64).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum PathError {
    /// A zero lies on (or numerically on) the path near this point.
    Hit(Complex64),
    Overflow,
    Budget,
}

const MAX_PANEL_DEPTH: u32 = 48;
const MAX_EVALS: usize = 2_000_000;

fn sample(g: &dyn Analytic, z: Complex64) -> Result<(Complex64, Complex64), PathError> {
    let (v, d) = g.pair(0, z).map_err(|_| PathError::Overflow)?;
    if v == Complex64::new(0.0, 0.0) {
        return Err(PathError::Hit(z));
    }
    Ok((v, d))
}

fn newton_len(v: Complex64, d: Complex64) -> f64 {
    let n = (v / d).norm();
    if n.is_finite() {
        n
    } else {
        f64::INFINITY
    }
}

/// Integrates `g'/g` along `path`, starting from `panels` equal panels.
pub(crate) fn integrate_path(g: &dyn Analytic, path: &Path, panels: usize) -> Result<PathIntegral, PathError> {
    let mut out = PathIntegral::zero();
    let mut evals = 0usize;
    let n = panels.max(1);
    let mut stack: Vec<(f64, f64, u32)> =
        (0..n).rev().map(|i| (i as f64 / n as f64, (i + 1) as f64 / n as f64, 0)).collect();
    while let Some((s0, s1, depth)) = stack.pop() {
        evals += 17;
        if evals > MAX_EVALS {
            return Err(PathError::Budget);
        }
        let za = path.point(s0);
        let zb = path.point(s1);
        let (ga, da) = sample(g, za)?;
        let (gb, db) = sample(g, zb)?;
        let mut min_newton = newton_len(ga, da);
        let mut min_at = za;
        let nb = newton_len(gb, db);
        if nb < min_newton {
            min_newton = nb;
            min_at = zb;
        }
        let nodes = gk15_nodes(s0, s1);
        let mut vals = [[0.0f64; 4]; 15];
        let mut bad = false;
        for (v, &s) in vals.iter_mut().zip(&nodes) {
            let z = path.point(s);
            let (gv, dv) = sample(g, z)?;
            let w = dv / gv * path.velocity(s);
            let m = z * w;
            if !(w.is_finite() && m.is_finite()) {
                bad = true;
            }
            *v = [w.re, w.im, m.re, m.im];
            let nl = newton_len(gv, dv);
            if nl < min_newton {
                min_newton = nl;
                min_at = z;
            }
        }
        let accept = !bad && {
            let (k, gs) = gk15_combine(s0, s1, &vals);
            let kk = Complex64::new(k[0], k[1]);
            let gg = Complex64::new(gs[0], gs[1]);
            let lg = (gb / ga).ln();
            let ok = (kk - gg).norm() <= 1e-3 * kk.norm().max(1.0)
                && (kk.re - lg.re).abs() <= 0.05
                && (kk.im - lg.im).abs() <= 0.05
                && lg.im.abs() <= 2.0
                && path.length(s0, s1) <= 8.0 * min_newton;
            if ok {
                out = out.join(&PathIntegral {
                    darg: lg.im,
                    log_int: kk,
                    moment: Complex64::new(k[2], k[3]),
                    min_newton,
                    min_newton_at: min_at,
                });
            }
            ok
        };
        if !accept {
            let mid = 0.5 * (s0 + s1);
            if depth >= MAX_PANEL_DEPTH || mid <= s0 || mid >= s1 {
                return Err(PathError::Hit(min_at));
            }
            stack.push((mid, s1, depth + 1));
            stack.push((s0, mid, depth + 1));
        }
        if out.min_newton > min_newton && !accept {
            out.min_newton = min_newton;
            out.min_newton_at = min_at;
        }
    }
    Ok(out)
}

/// Newton iteration on `g^{(k)}`.
pub(crate) fn newton(g: &dyn Analytic, k: usize, z0: Complex64, tol: f64, max_iter: usize) -> Option<Complex64> {
    let mut z = z0;
    for _ in 0..max_iter {
        let (v, d) = g.pair(k, z).ok()?;
        if v == Complex64::new(0.0, 0.0) {
            return Some(z);
        }
        let step = v / d;
        if !step.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() < tol {
            return Some(z);
        }
    }
    None
}
