//! Straight-line expression tape with reverse-mode gradients.
//!
//! Each region's smooth log-term is lowered to a [`Tape`]: a list of
//! instructions in topological order where every operand refers to an
//! earlier slot. A forward sweep fills the value slots; the reverse sweep
//! accumulates adjoints from the output back to the inputs.

use super::dist::{normal_lp, normal_lp_grad, uniform_lp, uniform_lp_grad};

pub type Slot = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    Const(f64),
    Input(usize),
    Add(Slot, Slot),
    Sub(Slot, Slot),
    Mul(Slot, Slot),
    Div(Slot, Slot),
    Neg(Slot),
    Exp(Slot),
    Log(Slot),
    Powf(Slot, f64),
    /// Normal log-density of `x` given mean and stddev.
    NormalLp(Slot, Slot, Slot),
    /// Uniform log-density of `x` on `[a, b)`.
    UniformLp(Slot, Slot, Slot),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn push(&mut self, op: Op) -> Slot {
        self.ops.push(op);
        (self.ops.len() - 1) as Slot
    }

    pub fn constant(&mut self, v: f64) -> Slot {
        self.push(Op::Const(v))
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    /// Forward sweep into `vals`; returns the last slot's value.
    pub fn forward(&self, x: &[f64], vals: &mut Vec<f64>) -> f64 {
        vals.clear();
        vals.reserve(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Input(i) => x[i],
                Op::Add(a, b) => vals[a as usize] + vals[b as usize],
                Op::Sub(a, b) => vals[a as usize] - vals[b as usize],
                Op::Mul(a, b) => vals[a as usize] * vals[b as usize],
                Op::Div(a, b) => vals[a as usize] / vals[b as usize],
                Op::Neg(a) => -vals[a as usize],
                Op::Exp(a) => vals[a as usize].exp(),
                Op::Log(a) => vals[a as usize].ln(),
                Op::Powf(a, e) => vals[a as usize].powf(e),
                Op::NormalLp(x, m, s) => {
                    normal_lp(vals[x as usize], vals[m as usize], vals[s as usize])
                }
                Op::UniformLp(x, a, b) => {
                    uniform_lp(vals[x as usize], vals[a as usize], vals[b as usize])
                }
            };
            vals.push(v);
        }
        vals.last().copied().unwrap_or(0.0)
    }

    /// Value and gradient with respect to every input coordinate. `grad`
    /// must have the state's length and is overwritten.
    pub fn gradient(
        &self,
        x: &[f64],
        vals: &mut Vec<f64>,
        adj: &mut Vec<f64>,
        grad: &mut [f64],
    ) -> f64 {
        let out = self.forward(x, vals);
        grad.iter_mut().for_each(|g| *g = 0.0);
        if self.ops.is_empty() {
            return out;
        }
        adj.clear();
        adj.resize(self.ops.len(), 0.0);
        *adj.last_mut().unwrap() = 1.0;
        for (i, op) in self.ops.iter().enumerate().rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            match *op {
                Op::Const(_) => {}
                Op::Input(k) => grad[k] += g,
                Op::Add(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] += g;
                }
                Op::Sub(a, b) => {
                    adj[a as usize] += g;
                    adj[b as usize] -= g;
                }
                Op::Mul(a, b) => {
                    let (va, vb) = (vals[a as usize], vals[b as usize]);
                    adj[a as usize] += g * vb;
                    adj[b as usize] += g * va;
                }
                Op::Div(a, b) => {
                    let vb = vals[b as usize];
                    adj[a as usize] += g / vb;
                    adj[b as usize] -= g * vals[i] / vb;
                }
                Op::Neg(a) => adj[a as usize] -= g,
                Op::Exp(a) => adj[a as usize] += g * vals[i],
                Op::Log(a) => adj[a as usize] += g / vals[a as usize],
                Op::Powf(a, e) => {
                    let va = vals[a as usize];
                    adj[a as usize] += g * e * va.powf(e - 1.0);
                }
                Op::NormalLp(x, m, s) => {
                    let d = normal_lp_grad(vals[x as usize], vals[m as usize], vals[s as usize]);
                    adj[x as usize] += g * d[0];
                    adj[m as usize] += g * d[1];
                    adj[s as usize] += g * d[2];
                }
                Op::UniformLp(_, a, b) => {
                    let d = uniform_lp_grad(vals[a as usize], vals[b as usize]);
                    adj[a as usize] += g * d[1];
                    adj[b as usize] += g * d[2];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        // f(x0, x1) = x0 * exp(x1) / (x0 + 2)
        let mut t = Tape::new();
        let x0 = t.push(Op::Input(0));
        let x1 = t.push(Op::Input(1));
        let e = t.push(Op::Exp(x1));
        let num = t.push(Op::Mul(x0, e));
        let two = t.constant(2.0);
        let den = t.push(Op::Add(x0, two));
        t.push(Op::Div(num, den));

        let x = [1.5, -0.4];
        let (mut v, mut a) = (Vec::new(), Vec::new());
        let mut g = [0.0; 2];
        let f = t.gradient(&x, &mut v, &mut a, &mut g);
        let exact = |x0: f64, x1: f64| x0 * x1.exp() / (x0 + 2.0);
        assert!((f - exact(x[0], x[1])).abs() < 1e-15);
        let d0 = 2.0 * x[1].exp() / (x[0] + 2.0).powi(2);
        assert!((g[0] - d0).abs() < 1e-14);
        assert!((g[1] - f).abs() < 1e-14);
    }

    #[test]
    fn repeated_input_accumulates() {
        let mut t = Tape::new();
        let x = t.push(Op::Input(0));
        let sq = t.push(Op::Powf(x, 3.0));
        t.push(Op::Neg(sq));
        let mut g = [0.0];
        t.gradient(&[2.0], &mut Vec::new(), &mut Vec::new(), &mut g);
        assert_eq!(g[0], -12.0);
    }

    #[test]
    fn empty_tape_is_zero() {
        let t = Tape::new();
        let mut g = [1.0];
        assert_eq!(
            t.gradient(&[3.0], &mut Vec::new(), &mut Vec::new(), &mut g),
            0.0
        );
        assert_eq!(g[0], 0.0);
    }
}
