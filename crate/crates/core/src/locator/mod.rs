//! Zeros and poles inside a disk, with multiplicities.
//!
//! Zeros are found by recursive subdivision of a square driven by boundary
//! winding numbers: a cell with one zero is handed to Newton, a small cell
//! with several is tested as a single multiple zero, anything else is split
//! into four. Every count comes from [`contour`] integrals, and the final
//! divisor is checked against the winding on the circle itself.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::expr::{to_exp_poly, to_quotient, MeroExpr, Node, QuotientForm};

pub mod contour;

use contour::{integrate_path, newton, Analytic, ExpPolyFn, Path, PathError, PathIntegral, TapeFn, MAX_ORDER};

/// Tolerances of the locator, all relative to the disk radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatorConfig {
    /// No zero or pole may lie within `ring_rel·r` of the circle.
    pub ring_rel: f64,
    /// Points closer than `merge_rel·r` are one point.
    pub merge_rel: f64,
    /// Newton stops when the step is below `polish_rel·r`.
    pub polish_rel: f64,
    pub newton_max_iter: usize,
    /// Cells smaller than `cluster_rel·r` are accepted as one point.
    pub cluster_rel: f64,
    pub max_depth: u32,
    /// Multiplicity circles have radius `mult_rel` times the distance to
    /// the nearest other zero, but at least `mult_floor`.
    pub mult_rel: f64,
    pub mult_floor: f64,
}

impl Default for LocatorConfig {
    fn default() -> Self {
        LocatorConfig {
            ring_rel: 1e-4,
            merge_rel: 1e-7,
            polish_rel: 1e-13,
            newton_max_iter: 50,
            cluster_rel: 1e-10,
            max_depth: 40,
            mult_rel: 1e-3,
            mult_floor: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisorPoint {
    pub location: Complex64,
    pub mult: u32,
}

impl Serialize for DivisorPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("DivisorPoint", 3)?;
        st.serialize_field("re", &self.location.re)?;
        st.serialize_field("im", &self.location.im)?;
        st.serialize_field("mult", &self.mult)?;
        st.end()
    }
}

/// Finite multiset of points in the closed disk `|z| ≤ radius`, sorted by
/// `(re, im)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divisor {
    pub radius: f64,
    pub points: Vec<DivisorPoint>,
    /// Some point could not be polished or resolved.
    #[serde(skip)]
    pub flagged: bool,
}

fn cmp_loc(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

impl Divisor {
    pub fn empty(radius: f64) -> Self {
        Divisor { radius, points: vec![], flagged: false }
    }

    /// Builds a divisor, merging points within `merge_tol`, dropping
    /// points outside the disk and snapping near-origin points to 0.
    pub fn from_points(radius: f64, pts: impl IntoIterator<Item = DivisorPoint>, merge_tol: f64) -> Self {
        let mut pts: Vec<DivisorPoint> = pts
            .into_iter()
            .filter(|p| p.mult > 0)
            .map(|mut p| {
                if p.location.norm() < merge_tol {
                    p.location = Complex64::new(0.0, 0.0);
                }
                p
            })
            .collect();
        pts.sort_by(|a, b| cmp_loc(&a.location, &b.location));
        let mut out: Vec<DivisorPoint> = Vec::with_capacity(pts.len());
        for p in pts {
            match out.iter_mut().find(|q| (q.location - p.location).norm() <= merge_tol) {
                Some(q) => {
                    if p.mult > q.mult {
                        q.location = p.location;
                    }
                    q.mult += p.mult;
                }
                None => out.push(p),
            }
        }
        out.retain(|p| p.location.norm() <= radius);
        out.sort_by(|a, b| cmp_loc(&a.location, &b.location));
        Divisor { radius, points: out, flagged: false }
    }

    pub fn degree(&self) -> u64 {
        self.points.iter().map(|p| p.mult as u64).sum()
    }

    /// Multiplicity at `z`, matching within `tol`.
    pub fn mult_at(&self, z: Complex64, tol: f64) -> u32 {
        self.points.iter().filter(|p| (p.location - z).norm() <= tol).map(|p| p.mult).sum()
    }

    /// The part inside the smaller disk `|z| ≤ r`.
    pub fn restrict(&self, r: f64) -> Divisor {
        Divisor {
            radius: r,
            points: self.points.iter().filter(|p| p.location.norm() <= r).copied().collect(),
            flagged: self.flagged,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocatorError {
    #[error("a zero or pole lies within {distance:.3e} of the circle |z| = {radius}")]
    RingTooClose { radius: f64, distance: f64 },
    #[error("winding integral {value} is not close to an integer")]
    NonIntegerResidual { value: f64 },
    #[error("subdivision depth exceeded")]
    MaxDepthExceeded { partial: Divisor },
    #[error("located {found} zeros but the boundary winding is {expected}")]
    CountMismatch { expected: i64, found: u64, partial: Divisor },
    #[error("function is identically zero")]
    IdenticallyZero,
    #[error("expression is not entire")]
    NotEntire,
    #[error("expression has an identically zero denominator")]
    ZeroDenominator,
    #[error("evaluation overflowed on a contour")]
    Overflow,
    #[error("contour integration did not converge")]
    QuadratureFailed,
    #[error("divisors have different radii ({0} vs {1})")]
    RadiusMismatch(f64, f64),
}

impl LocatorError {
    /// The partial divisor carried by the error, if any.
    pub fn partial(&self) -> Option<&Divisor> {
        match self {
            LocatorError::MaxDepthExceeded { partial } | LocatorError::CountMismatch { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Value whose preimage is wanted: a finite `a` or the poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Finite(Complex64),
    Infinity,
}

/// An entire factor prepared for searching.
enum Prepared {
    /// `z^k · g` with `g` nonvanishing at 0 when it is an exponential
    /// polynomial.
    Fn { origin: u32, g: Box<dyn Analytic + Send> },
    /// Never vanishes.
    Unit,
}

fn prepare(base: &MeroExpr) -> Result<Prepared, LocatorError> {
    match base.node() {
        Node::Exp(_) => return Ok(Prepared::Unit),
        Node::Const(c) if c.norm() > 0.0 => return Ok(Prepared::Unit),
        _ => {}
    }
    match to_exp_poly(base) {
        Ok(p) => {
            if p.is_zero() {
                return Err(LocatorError::IdenticallyZero);
            }
            let k = p.z_content();
            let g = p.div_z_power(k);
            let g = g.shift(g.frequency_center());
            if g.as_unit().is_some() {
                return Ok(if k == 0 { Prepared::Unit } else { Prepared::Fn { origin: k as u32, g: Box::new(ExpPolyFn::new(g)) } });
            }
            Ok(Prepared::Fn { origin: k as u32, g: Box::new(ExpPolyFn::new(g)) })
        }
        Err(_) => Ok(Prepared::Fn { origin: 0, g: Box::new(TapeFn::new(base.clone())) }),
    }
}

fn path_err(e: PathError, fallback: LocatorError) -> LocatorError {
    match e {
        PathError::Overflow => LocatorError::Overflow,
        PathError::Budget => LocatorError::QuadratureFailed,
        PathError::Hit(_) => fallback,
    }
}

/// Winding of `g` around the circle `|z - center| = radius`.
fn circle_integral(g: &dyn Analytic, center: Complex64, radius: f64) -> Result<PathIntegral, PathError> {
    integrate_path(g, &Path::circle(center, radius), 16)
}

/// Winding over `|z| = r`, checking that no zero sits on the ring.
fn ring_winding(g: &dyn Analytic, r: f64, cfg: &LocatorConfig) -> Result<i64, LocatorError> {
    let delta = cfg.ring_rel * r;
    let too_close = |at: Complex64| {
        // Confirm with Newton that a zero really is near the ring.
        match newton(g, 0, at, cfg.polish_rel * r, cfg.newton_max_iter) {
            Some(z0) if (z0.norm() - r).abs() < delta => {
                Some(LocatorError::RingTooClose { radius: r, distance: (z0.norm() - r).abs() })
            }
            _ => None,
        }
    };
    let w = match circle_integral(g, Complex64::new(0.0, 0.0), r) {
        Ok(w) => w,
        Err(PathError::Hit(at)) => {
            return Err(too_close(at).unwrap_or(LocatorError::RingTooClose { radius: r, distance: 0.0 }))
        }
        Err(e) => return Err(path_err(e, LocatorError::QuadratureFailed)),
    };
    if w.min_newton < 4.0 * delta {
        if let Some(err) = too_close(w.min_newton_at) {
            return Err(err);
        }
    }
    if w.residual() > 0.25 {
        return Err(LocatorError::NonIntegerResidual { value: w.log_int.im / std::f64::consts::TAU });
    }
    Ok(w.winding())
}

/// Net winding (zeros minus poles) of a quotient over `|z| = r`.
pub fn winding_number(q: &QuotientForm, r: f64, cfg: &LocatorConfig) -> Result<i64, LocatorError> {
    if q.is_zero() {
        return Err(LocatorError::IdenticallyZero);
    }
    let mut total = 0i64;
    for (factors, sign) in [(q.num_factors(), 1i64), (q.den_factors(), -1i64)] {
        for f in factors {
            if let Prepared::Fn { origin, g } = prepare(&f.base)? {
                let w = origin as i64 + ring_winding(g.as_ref(), r, cfg)?;
                total += sign * f.power as i64 * w;
            }
        }
    }
    Ok(total)
}

/// [`winding_number`] of an expression.
pub fn winding_number_expr(e: &MeroExpr, r: f64, cfg: &LocatorConfig) -> Result<i64, LocatorError> {
    let q = to_quotient(e).map_err(|_| LocatorError::ZeroDenominator)?;
    winding_number(&q, r, cfg)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: Complex64,
    hi: Complex64,
    count: i64,
    moment: Complex64,
    depth: u32,
}

impl Cell {
    fn center(&self) -> Complex64 {
        (self.lo + self.hi) * 0.5
    }

    fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.lo.re - margin && z.re <= self.hi.re + margin && z.im >= self.lo.im - margin && z.im <= self.hi.im + margin
    }

    fn outside_disk(&self, r: f64) -> bool {
        let dx = if self.lo.re > 0.0 { self.lo.re } else if self.hi.re < 0.0 { -self.hi.re } else { 0.0 };
        let dy = if self.lo.im > 0.0 { self.lo.im } else if self.hi.im < 0.0 { -self.hi.im } else { 0.0 };
        (dx * dx + dy * dy).sqrt() > r * (1.0 + 1e-9)
    }

    /// Zero estimate from the contour moment.
    fn mean(&self) -> Complex64 {
        let m = self.moment / (Complex64::new(0.0, std::f64::consts::TAU) * self.count as f64);
        if m.is_finite() && self.contains(m, 0.0) {
            m
        } else {
            self.center()
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    z: Complex64,
    count: u32,
    flagged: bool,
}

struct Search<'a> {
    g: &'a dyn Analytic,
    r: f64,
    cfg: LocatorConfig,
}

const SPLITS: [f64; 7] = [0.5, 0.47, 0.53, 0.44, 0.56, 0.41, 0.59];

enum CellOutcome {
    Found(Vec<Candidate>),
    Depth(Vec<Candidate>),
}

impl Search<'_> {
    fn seg(&self, a: Complex64, b: Complex64) -> Result<PathIntegral, PathError> {
        integrate_path(self.g, &Path::Segment { a, b }, 2)
    }

    /// Integrals around the boundary of the rectangle `[lo, hi]`.
    fn boxed(&self, lo: Complex64, hi: Complex64) -> Result<PathIntegral, PathError> {
        let c = [lo, Complex64::new(hi.re, lo.im), hi, Complex64::new(lo.re, hi.im)];
        let mut acc = PathIntegral::zero();
        for i in 0..4 {
            acc = acc.join(&self.seg(c[i], c[(i + 1) % 4])?);
        }
        Ok(acc)
    }

    /// Tries to split `cell` into four children at the given fractions.
    fn split(&self, cell: &Cell, fx: f64, fy: f64) -> Option<[Cell; 4]> {
        let (lo, hi) = (cell.lo, cell.hi);
        let xm = lo.re + fx * (hi.re - lo.re);
        let ym = lo.im + fy * (hi.im - lo.im);
        let xs = [lo.re, xm, hi.re];
        let ys = [lo.im, ym, hi.im];
        let p = |i: usize, j: usize| Complex64::new(xs[i], ys[j]);
        // Horizontal half-edges h[i][j] from p(i,j) to p(i+1,j); vertical
        // v[i][j] from p(i,j) to p(i,j+1).
        let jobs: Vec<(Complex64, Complex64)> = (0..2)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| (p(i, j), p(i + 1, j)))
            .chain((0..3).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| (p(i, j), p(i, j + 1))))
            .collect();
        let results: Vec<Result<PathIntegral, PathError>> = jobs.par_iter().map(|&(a, b)| self.seg(a, b)).collect();
        let mut ints = Vec::with_capacity(12);
        let min_gap = 1e-4 * (hi - lo).norm();
        for r in results {
            let r = r.ok()?;
            if r.min_newton < min_gap {
                return None;
            }
            ints.push(r);
        }
        let h = |i: usize, j: usize| ints[i * 3 + j];
        let v = |i: usize, j: usize| ints[6 + i * 2 + j];
        let mut cells = [*cell; 4];
        let mut total = 0;
        for (k, (i, j)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
            let loop_int = h(i, j).join(&v(i + 1, j)).join(&h(i, j + 1).reversed()).join(&v(i, j).reversed());
            if loop_int.residual() > 0.25 {
                return None;
            }
            let count = loop_int.winding();
            if count < 0 {
                return None;
            }
            total += count;
            cells[k] = Cell {
                lo: p(i, j),
                hi: p(i + 1, j + 1),
                count,
                moment: loop_int.moment,
                depth: cell.depth + 1,
            };
        }
        (total == cell.count).then_some(cells)
    }

    fn polish_simple(&self, cell: &Cell) -> Candidate {
        let tol = self.cfg.polish_rel * self.r;
        let margin = 0.1 * cell.diameter();
        for start in [cell.mean(), cell.center()] {
            if let Some(z) = newton(self.g, 0, start, tol, self.cfg.newton_max_iter) {
                if cell.contains(z, margin) {
                    return Candidate { z, count: 1, flagged: false };
                }
            }
        }
        Candidate { z: cell.mean(), count: 1, flagged: true }
    }

    /// A cell with `n ≥ 2` zeros may hold one zero of order `n`: then it is
    /// a simple zero of `g^{(n-1)}` and the winding around it is `n`.
    fn try_multiple(&self, cell: &Cell) -> Option<Candidate> {
        let n = cell.count as usize;
        if !(2..MAX_ORDER).contains(&n) {
            return None;
        }
        let z = newton(self.g, n - 1, cell.mean(), self.cfg.polish_rel * self.r, self.cfg.newton_max_iter)?;
        if !cell.contains(z, 0.1 * cell.diameter()) {
            return None;
        }
        // Near an expanded multiple root the values drown in rounding noise,
        // so widen the test circle a few decades when the smallest fails.
        let base = self.cfg.merge_rel * self.r;
        for scale in [1.0, 10.0, 100.0, 1000.0] {
            let rho = base * scale;
            if 2.0 * rho > cell.diameter() {
                break;
            }
            if let Ok(w) = circle_integral(self.g, z, rho) {
                if w.residual() < 0.25 && w.winding() == cell.count {
                    return Some(Candidate { z, count: n as u32, flagged: false });
                }
            }
        }
        None
    }

    fn process(&self, cell: Cell) -> CellOutcome {
        if cell.count == 0 || cell.outside_disk(self.r) {
            return CellOutcome::Found(vec![]);
        }
        if cell.count == 1 {
            return CellOutcome::Found(vec![self.polish_simple(&cell)]);
        }
        if cell.diameter() < self.cfg.cluster_rel * self.r {
            return CellOutcome::Found(vec![Candidate { z: cell.mean(), count: cell.count as u32, flagged: false }]);
        }
        if let Some(c) = self.try_multiple(&cell) {
            return CellOutcome::Found(vec![c]);
        }
        if cell.depth >= self.cfg.max_depth {
            return CellOutcome::Depth(vec![Candidate { z: cell.mean(), count: cell.count as u32, flagged: true }]);
        }
        let children = SPLITS.iter().find_map(|&f| self.split(&cell, f, f));
        let Some(children) = children else {
            return CellOutcome::Found(vec![Candidate { z: cell.mean(), count: cell.count as u32, flagged: true }]);
        };
        let outcomes: Vec<CellOutcome> = children.into_par_iter().map(|c| self.process(c)).collect();
        let mut all = Vec::new();
        let mut depth = false;
        for o in outcomes {
            match o {
                CellOutcome::Found(v) => all.extend(v),
                CellOutcome::Depth(v) => {
                    depth = true;
                    all.extend(v)
                }
            }
        }
        if depth {
            CellOutcome::Depth(all)
        } else {
            CellOutcome::Found(all)
        }
    }

    /// Multiplicity by winding on a small circle around each candidate.
    fn multiplicities(&self, cands: &mut [Candidate]) {
        let zs: Vec<Complex64> = cands.iter().map(|c| c.z).collect();
        let mults: Vec<Option<i64>> = zs
            .par_iter()
            .enumerate()
            .map(|(i, &z)| {
                let nearest = zs
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, w)| (w - z).norm())
                    .fold(self.r, f64::min);
                let rho = (self.cfg.mult_rel * nearest).max(self.cfg.mult_floor);
                circle_integral(self.g, z, rho).ok().filter(|w| w.residual() < 0.25).map(|w| w.winding())
            })
            .collect();
        for (c, m) in cands.iter_mut().zip(mults) {
            match m {
                Some(m) if m >= 1 => c.count = m as u32,
                _ => c.flagged = true,
            }
        }
    }

    fn run(&self, expected: i64) -> Result<Vec<Candidate>, LocatorError> {
        if expected == 0 {
            return Ok(vec![]);
        }
        let mut half = 1.05 * self.r;
        let offset = Complex64::new(0.0131, 0.0097) * self.r;
        for _ in 0..8 {
            let lo = offset - Complex64::new(half, half);
            let hi = offset + Complex64::new(half, half);
            match self.boxed(lo, hi) {
                Ok(w) if w.residual() <= 0.25 && w.min_newton >= 1e-6 * half => {
                    let root = Cell { lo, hi, count: w.winding(), moment: w.moment, depth: 0 };
                    let (mut cands, depth) = match self.process(root) {
                        CellOutcome::Found(v) => (v, false),
                        CellOutcome::Depth(v) => (v, true),
                    };
                    self.multiplicities(&mut cands);
                    if depth {
                        return Err(LocatorError::MaxDepthExceeded { partial: self.divisor(&cands) });
                    }
                    return Ok(cands);
                }
                Ok(_) | Err(PathError::Hit(_)) => half *= 1.0123,
                Err(e) => return Err(path_err(e, LocatorError::QuadratureFailed)),
            }
        }
        Err(LocatorError::QuadratureFailed)
    }

    fn divisor(&self, cands: &[Candidate]) -> Divisor {
        let mut d = Divisor::from_points(
            self.r,
            cands.iter().map(|c| DivisorPoint { location: c.z, mult: c.count }),
            self.cfg.merge_rel * self.r,
        );
        d.flagged = cands.iter().any(|c| c.flagged);
        d
    }
}

fn find_factor_zeros(base: &MeroExpr, r: f64, cfg: &LocatorConfig) -> Result<Divisor, LocatorError> {
    let (origin, g) = match prepare(base)? {
        Prepared::Unit => return Ok(Divisor::empty(r)),
        Prepared::Fn { origin, g } => (origin, g),
    };
    let expected = ring_winding(g.as_ref(), r, cfg)?;
    let search = Search { g: g.as_ref(), r, cfg: *cfg };
    let mut cands = search.run(expected)?;
    if origin > 0 {
        cands.push(Candidate { z: Complex64::new(0.0, 0.0), count: origin, flagged: false });
    }
    let d = search.divisor(&cands);
    let found = d.degree();
    if found != (expected + origin as i64) as u64 {
        return Err(LocatorError::CountMismatch { expected: expected + origin as i64, found, partial: d });
    }
    Ok(d)
}

/// Zeros of an entire expression in `|z| ≤ r`, with multiplicity.
///
/// Each factor of the numerator of [`to_quotient`] is searched separately;
/// exponential factors never vanish and are skipped.
pub fn find_zeros(e: &MeroExpr, r: f64, cfg: &LocatorConfig) -> Result<Divisor, LocatorError> {
    let q = to_quotient(e).map_err(|_| LocatorError::ZeroDenominator)?;
    if !q.is_entire() {
        return Err(LocatorError::NotEntire);
    }
    zeros_of_factors(&q, r, cfg, true)
}

fn zeros_of_factors(q: &QuotientForm, r: f64, cfg: &LocatorConfig, numerator: bool) -> Result<Divisor, LocatorError> {
    if q.is_zero() {
        return Err(LocatorError::IdenticallyZero);
    }
    let factors = if numerator { q.num_factors() } else { q.den_factors() };
    let parts: Vec<Result<(Divisor, u32), LocatorError>> =
        factors.par_iter().map(|f| find_factor_zeros(&f.base, r, cfg).map(|d| (d, f.power))).collect();
    let mut pts = Vec::new();
    let mut flagged = false;
    for p in parts {
        let (d, power) = p?;
        flagged |= d.flagged;
        pts.extend(d.points.iter().map(|p| DivisorPoint { location: p.location, mult: p.mult * power }));
    }
    let mut d = Divisor::from_points(r, pts, cfg.merge_rel * r);
    d.flagged = flagged;
    Ok(d)
}

/// Pointwise `max(A − B, 0)`, matching points within `tol`.
fn subtract_with(a: &Divisor, b: &Divisor, tol: f64) -> Divisor {
    let pts = a.points.iter().map(|p| DivisorPoint { location: p.location, mult: p.mult.saturating_sub(b.mult_at(p.location, tol)) });
    let mut d = Divisor::from_points(a.radius, pts, 0.0);
    d.flagged = a.flagged || b.flagged;
    d
}

/// `A − B` clamped at zero, matching points within the default merge
/// tolerance.
pub fn divisor_subtract(a: &Divisor, b: &Divisor) -> Result<Divisor, LocatorError> {
    if (a.radius - b.radius).abs() > 1e-12 * a.radius.max(b.radius) {
        return Err(LocatorError::RadiusMismatch(a.radius, b.radius));
    }
    Ok(subtract_with(a, b, LocatorConfig::default().merge_rel * a.radius))
}

/// `(a-points, poles)` of `f` in `|z| ≤ r`. For [`Target::Infinity`] the
/// poles are returned in both slots.
pub fn divisor_of(f: &MeroExpr, r: f64, target: Target, cfg: &LocatorConfig) -> Result<(Divisor, Divisor), LocatorError> {
    let q = to_quotient(f).map_err(|_| LocatorError::ZeroDenominator)?;
    let tol = cfg.merge_rel * r;
    let den_zeros = if q.is_entire() { Divisor::empty(r) } else { zeros_of_factors(&q, r, cfg, false)? };
    let poles = if den_zeros.is_empty() {
        den_zeros.clone()
    } else {
        let num_zeros = zeros_of_factors(&q, r, cfg, true)?;
        subtract_with(&den_zeros, &num_zeros, tol)
    };
    let a = match target {
        Target::Infinity => return Ok((poles.clone(), poles)),
        Target::Finite(a) => a,
    };
    let h = if a == Complex64::new(0.0, 0.0) {
        q.num.clone()
    } else {
        MeroExpr::add([q.num.clone(), MeroExpr::neg(MeroExpr::mul([MeroExpr::constant(a), q.den.clone()]))])
    };
    let hz = find_zeros(&h, r, cfg)?;
    Ok((subtract_with(&hz, &den_zeros, tol), poles))
}
