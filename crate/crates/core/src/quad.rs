//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Abscissae of the 15-point rule on `[a, b]`, in increasing order.
pub fn gk15_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 15];
    for k in 0..7 {
        out[k] = c - h * XGK[k];
        out[14 - k] = c + h * XGK[k];
    }
    out[7] = c;
    out
}

/// Kronrod and Gauss estimates on `[a, b]` from values at [`gk15_nodes`].
pub fn gk15_combine<const N: usize>(a: f64, b: f64, vals: &[[f64; N]; 15]) -> ([f64; N], [f64; N]) {
    let h = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for i in 0..N {
        let mut ks = WGK[7] * vals[7][i];
        let mut gs = WG[3] * vals[7][i];
        for j in 0..7 {
            let pair = vals[j][i] + vals[14 - j][i];
            ks += WGK[j] * pair;
            if j % 2 == 1 {
                gs += WG[j / 2] * pair;
            }
        }
        k[i] = ks * h;
        g[i] = gs * h;
    }
    (k, g)
}

fn max_diff<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 1e-12, max_evals: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("quadrature budget exceeded; achieved error estimate {achieved:.3e}")]
    BudgetExceeded { achieved: f64 },
    #[error("integrand not finite at {at}")]
    NonFinite { at: f64 },
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn panel<const N: usize, F: FnMut(f64) -> [f64; N]>(f: &mut F, a: f64, b: f64) -> Result<Piece<N>, QuadError> {
    let xs = gk15_nodes(a, b);
    let mut vals = [[0.0; N]; 15];
    for (v, &x) in vals.iter_mut().zip(&xs) {
        *v = f(x);
        if v.iter().any(|y| !y.is_finite()) {
            return Err(QuadError::NonFinite { at: x });
        }
    }
    let (k, g) = gk15_combine(a, b, &vals);
    Ok(Piece { a, b, value: k, error: max_diff(&k, &g) })
}

/// Integrates `f` over `[points[0], points.last()]`, with the interior
/// points as forced breakpoints. Stops when the summed error estimate is
/// below `max(abs_tol, rel_tol·|value|)` (componentwise maximum norm).
pub fn integrate<const N: usize, F: FnMut(f64) -> [f64; N]>(
    mut f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<N>, QuadError> {
    assert!(points.len() >= 2, "need an interval");
    let span = (points[points.len() - 1] - points[0]).abs();
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Piece<N>> = Vec::new();
    let mut evals = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(panel(&mut f, w[0], w[1])?);
            evals += 15;
        }
    }
    loop {
        let total = |heap: &BinaryHeap<Piece<N>>, done: &[Piece<N>]| {
            let mut v = [0.0; N];
            let mut e = 0.0;
            for p in heap.iter().chain(done) {
                for (acc, x) in v.iter_mut().zip(&p.value) {
                    *acc += x;
                }
                e += p.error;
            }
            (v, e)
        };
        let (value, error) = total(&heap, &done);
        let scale = value.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if error <= opts.abs_tol.max(opts.rel_tol * scale) {
            return Ok(QuadResult { value, error, evals });
        }
        let Some(worst) = heap.pop() else {
            return Err(QuadError::BudgetExceeded { achieved: error });
        };
        if evals + 30 > opts.max_evals {
            heap.push(worst);
            let (_, error) = total(&heap, &done);
            return Err(QuadError::BudgetExceeded { achieved: error });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if worst.b - worst.a < 1e-13 * span || mid <= worst.a || mid >= worst.b {
            done.push(worst);
            continue;
        }
        heap.push(panel(&mut f, worst.a, mid)?);
        heap.push(panel(&mut f, mid, worst.b)?);
        evals += 30;
    }
}
