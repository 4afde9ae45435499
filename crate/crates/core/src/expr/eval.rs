//! Pointwise evaluation.
//!
//! [`Tape`] flattens one or more expressions into a shared, deduplicated
//! instruction list so hot loops (contour quadrature, Newton steps) pay for
//! each common subexpression once.

use std::cell::RefCell;
use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use super::{MeroExpr, Node};

/// Evaluation hit a pole, or produced a non-finite value (`overflow`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{}", if *.overflow { "evaluation overflowed" } else { "evaluation hit a pole" })]
pub struct PoleSignal {
    pub overflow: bool,
}

#[derive(Debug, Clone)]
enum Op {
    Const(Complex64),
    Var,
    Add(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    Div(u32, u32),
    Powi(u32, i32),
    Exp(u32),
}

#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    args: Vec<u32>,
    outputs: Vec<u32>,
}

thread_local! {
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

impl Tape {
    pub fn compile(exprs: &[MeroExpr]) -> Tape {
        let mut tape = Tape { ops: Vec::new(), args: Vec::new(), outputs: Vec::new() };
        let mut index = HashMap::new();
        for e in exprs {
            let slot = tape.emit(e, &mut index);
            tape.outputs.push(slot);
        }
        tape
    }

    fn emit(&mut self, e: &MeroExpr, index: &mut HashMap<MeroExpr, u32>) -> u32 {
        if let Some(&slot) = index.get(e) {
            return slot;
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(*c),
            Node::Var => Op::Var,
            Node::Add(xs) | Node::Mul(xs) => {
                let slots: Vec<u32> = xs.iter().map(|x| self.emit(x, index)).collect();
                let start = self.args.len() as u32;
                self.args.extend(slots);
                if matches!(e.node(), Node::Add(_)) {
                    Op::Add(start, xs.len() as u32)
                } else {
                    Op::Mul(start, xs.len() as u32)
                }
            }
            Node::Neg(x) => Op::Neg(self.emit(x, index)),
            Node::Div(a, b) => {
                let a = self.emit(a, index);
                Op::Div(a, self.emit(b, index))
            }
            Node::IntPow(b, n) => Op::Powi(self.emit(b, index), *n),
            Node::Exp(a) => Op::Exp(self.emit(a, index)),
        };
        let slot = self.ops.len() as u32;
        self.ops.push(op);
        index.insert(e.clone(), slot);
        slot
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Runs the tape, leaving every intermediate in `buf`.
    fn run(&self, z: Complex64, buf: &mut Vec<Complex64>) -> Result<(), PoleSignal> {
        let zero = Complex64::new(0.0, 0.0);
        buf.clear();
        buf.reserve(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var => z,
                Op::Add(s, n) => self.args[s as usize..(s + n) as usize].iter().map(|&k| buf[k as usize]).sum(),
                Op::Mul(s, n) => {
                    self.args[s as usize..(s + n) as usize].iter().map(|&k| buf[k as usize]).product()
                }
                Op::Neg(a) => -buf[a as usize],
                Op::Div(a, b) => {
                    let den = buf[b as usize];
                    if den == zero {
                        return Err(PoleSignal { overflow: false });
                    }
                    buf[a as usize] / den
                }
                Op::Powi(b, n) => {
                    let base = buf[b as usize];
                    if n < 0 && base == zero {
                        return Err(PoleSignal { overflow: false });
                    }
                    base.powi(n)
                }
                Op::Exp(a) => buf[a as usize].exp(),
            };
            buf.push(v);
        }
        for &o in &self.outputs {
            let v = buf[o as usize];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(PoleSignal { overflow: true });
            }
        }
        Ok(())
    }

    /// Writes all outputs into `out`.
    pub fn eval_into(&self, z: Complex64, out: &mut [Complex64]) -> Result<(), PoleSignal> {
        SCRATCH.with(|cell| {
            let mut buf = cell.borrow_mut();
            self.run(z, &mut buf)?;
            for (dst, &o) in out.iter_mut().zip(&self.outputs) {
                *dst = buf[o as usize];
            }
            Ok(())
        })
    }

    /// Value of the first output.
    pub fn eval1(&self, z: Complex64) -> Result<Complex64, PoleSignal> {
        let mut out = [Complex64::new(0.0, 0.0)];
        self.eval_into(z, &mut out)?;
        Ok(out[0])
    }

    /// Values of the first two outputs, typically `g` and `g'`.
    pub fn eval2(&self, z: Complex64) -> Result<(Complex64, Complex64), PoleSignal> {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        self.eval_into(z, &mut out)?;
        Ok((out[0], out[1]))
    }

    /// First output together with a magnitude scale: the value the
    /// expression would have if no sum ever cancelled. Used to judge
    /// whether a small value is a rounding artefact.
    pub fn eval_with_scale(&self, z: Complex64) -> Result<(Complex64, f64), PoleSignal> {
        SCRATCH.with(|cell| {
            let mut buf = cell.borrow_mut();
            self.run(z, &mut buf)?;
            let mut scale: Vec<f64> = Vec::with_capacity(self.ops.len());
            for (k, op) in self.ops.iter().enumerate() {
                let s = match *op {
                    Op::Const(_) | Op::Var | Op::Exp(_) => buf[k].norm(),
                    Op::Add(s, n) => self.args[s as usize..(s + n) as usize].iter().map(|&j| scale[j as usize]).sum(),
                    Op::Mul(s, n) => {
                        self.args[s as usize..(s + n) as usize].iter().map(|&j| scale[j as usize]).product()
                    }
                    Op::Neg(a) => scale[a as usize],
                    Op::Div(a, b) => scale[a as usize] / buf[b as usize].norm(),
                    Op::Powi(b, n) if n > 0 => scale[b as usize].powi(n),
                    Op::Powi(_, _) => buf[k].norm(),
                };
                scale.push(s);
            }
            let o = self.outputs[0] as usize;
            Ok((buf[o], scale[o]))
        })
    }
}

/// Value of `e` at `z`.
pub fn eval(e: &MeroExpr, z: Complex64) -> Result<Complex64, PoleSignal> {
    Tape::compile(std::slice::from_ref(e)).eval1(z)
}
