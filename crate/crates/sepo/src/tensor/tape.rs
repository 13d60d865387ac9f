//! Reverse-mode autodiff on an explicit operation tape.
//!
//! A `Tape` records every primitive op of one forward pass. Parameters are
//! lifted onto the tape as named leaves, the loss is built from tape ops,
//! and `backward` replays the record in reverse, producing a gradient for
//! every registered leaf (exactly zero for leaves the loss never touched).
//! Tapes are one-shot: persistent parameters live outside as `Tensor`s and
//! a fresh tape is built per loss evaluation.

use std::sync::atomic::{AtomicU32, Ordering};

use super::kernels;
use super::Tensor;
use crate::error::{Error, Result};

static TAPE_COUNTER: AtomicU32 = AtomicU32::new(0);

/// Handle to a value recorded on a specific tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var {
    tape: u32,
    idx: u32,
}

#[derive(Debug)]
enum Op {
    Leaf,
    Const,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    Scale(u32, f64),
    AddScalar(u32, f64),
    /// [m,k] x [k,n]
    MatMul(u32, u32),
    /// [m,n] + [n] broadcast over rows
    AddRow(u32, u32),
    /// [m,n] * [n] broadcast over rows
    MulRow(u32, u32),
    Tanh(u32),
    Exp(u32),
    Ln(u32),
    Square(u32),
    Clamp(u32, f64, f64),
    MinElem(u32, u32),
    MaxElem(u32, u32),
    SumAll(u32),
    MeanAll(u32),
    /// [m,n] -> [m]
    SumRows(u32),
    /// [m,n] -> [m], one column index per row
    SelectCols(u32, Vec<usize>),
    LogSoftmaxRows(u32),
    Reshape(u32),
    /// 1-D slice [start, end)
    Slice(u32, usize),
    /// any + scalar var, broadcast
    AddBcast(u32, u32),
}

struct Node {
    value: Tensor,
    op: Op,
    name: Option<String>,
}

/// Recorded forward pass plus leaf registry.
pub struct Tape {
    id: u32,
    nodes: Vec<Node>,
    leaves: Vec<u32>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            id: TAPE_COUNTER.fetch_add(1, Ordering::Relaxed),
            nodes: Vec::new(),
            leaves: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor, op: Op, name: Option<String>) -> Var {
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node { value, op, name });
        Var { tape: self.id, idx }
    }

    fn node(&self, v: Var) -> Result<&Node> {
        if v.tape != self.id {
            return Err(Error::Contract(
                "var belongs to a different tape".to_string(),
            ));
        }
        Ok(&self.nodes[v.idx as usize])
    }

    pub fn value(&self, v: Var) -> Result<&Tensor> {
        Ok(&self.node(v)?.value)
    }

    /// Register a trainable leaf. Its gradient is always present after
    /// `backward`, as exact zeros when unused.
    pub fn leaf(&mut self, name: &str, value: &Tensor) -> Var {
        let var = self.push(value.clone(), Op::Leaf, Some(name.to_string()));
        self.leaves.push(var.idx);
        var
    }

    /// Record a constant (no gradient tracked).
    pub fn constant(&mut self, value: &Tensor) -> Var {
        self.push(value.clone(), Op::Const, None)
    }

    pub fn constant_owned(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Const, None)
    }

    fn binary_same_shape(&self, a: Var, b: Var, what: &str) -> Result<(Vec<usize>, usize)> {
        let ta = &self.node(a)?.value;
        let tb = &self.node(b)?.value;
        if !ta.same_shape(tb) {
            return Err(Error::Shape(format!(
                "{what}: {:?} vs {:?}",
                ta.shape(),
                tb.shape()
            )));
        }
        Ok((ta.shape().to_vec(), ta.len()))
    }

    fn elementwise<F: Fn(f64, f64) -> f64>(
        &mut self,
        a: Var,
        b: Var,
        what: &str,
        f: F,
        op: Op,
    ) -> Result<Var> {
        let (shape, _) = self.binary_same_shape(a, b, what)?;
        let va = self.node(a)?.value.values();
        let vb = self.node(b)?.value.values();
        let data: Vec<f64> = va.iter().zip(vb).map(|(x, y)| f(*x, *y)).collect();
        Ok(self.push(Tensor::new(shape, data)?, op, None))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "add", |x, y| x + y, Op::Add(a.idx, b.idx))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "sub", |x, y| x - y, Op::Sub(a.idx, b.idx))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "mul", |x, y| x * y, Op::Mul(a.idx, b.idx))
    }

    pub fn min_elem(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "min", f64::min, Op::MinElem(a.idx, b.idx))
    }

    pub fn max_elem(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(a, b, "max", f64::max, Op::MaxElem(a.idx, b.idx))
    }

    fn unary<F: Fn(f64) -> f64>(&mut self, a: Var, f: F, op: Op) -> Result<Var> {
        let t = &self.node(a)?.value;
        let shape = t.shape().to_vec();
        let data: Vec<f64> = t.values().iter().map(|&x| f(x)).collect();
        Ok(self.push(Tensor::new(shape, data)?, op, None))
    }

    pub fn neg(&mut self, a: Var) -> Result<Var> {
        self.unary(a, |x| -x, Op::Neg(a.idx))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        self.unary(a, |x| c * x, Op::Scale(a.idx, c))
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Result<Var> {
        self.unary(a, |x| x + c, Op::AddScalar(a.idx, c))
    }

    pub fn tanh(&mut self, a: Var) -> Result<Var> {
        self.unary(a, f64::tanh, Op::Tanh(a.idx))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        self.unary(a, f64::exp, Op::Exp(a.idx))
    }

    pub fn ln(&mut self, a: Var) -> Result<Var> {
        self.unary(a, f64::ln, Op::Ln(a.idx))
    }

    pub fn square(&mut self, a: Var) -> Result<Var> {
        self.unary(a, |x| x * x, Op::Square(a.idx))
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Result<Var> {
        self.unary(a, |x| x.clamp(lo, hi), Op::Clamp(a.idx, lo, hi))
    }

    fn dims2(t: &Tensor, what: &str) -> Result<(usize, usize)> {
        match t.shape() {
            [m, n] => Ok((*m, *n)),
            s => Err(Error::Shape(format!("{what}: expected rank 2, got {s:?}"))),
        }
    }

    /// [m,k] x [k,n] -> [m,n].
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let ta = &self.node(a)?.value;
        let tb = &self.node(b)?.value;
        let (m, k) = Self::dims2(ta, "matmul lhs")?;
        let (k2, n) = Self::dims2(tb, "matmul rhs")?;
        if k != k2 {
            return Err(Error::Shape(format!(
                "matmul: [{m},{k}] x [{k2},{n}] inner dims differ"
            )));
        }
        let mut out = vec![0.0; m * n];
        kernels::matmul(ta.values(), tb.values(), m, k, n, &mut out);
        Ok(self.push(
            Tensor::new(vec![m, n], out)?,
            Op::MatMul(a.idx, b.idx),
            None,
        ))
    }

    fn row_broadcast(&self, a: Var, row: Var, what: &str) -> Result<(usize, usize)> {
        let ta = &self.node(a)?.value;
        let tr = &self.node(row)?.value;
        let (m, n) = Self::dims2(ta, what)?;
        if tr.shape() != [n] {
            return Err(Error::Shape(format!(
                "{what}: row {:?} does not match [{m},{n}]",
                tr.shape()
            )));
        }
        Ok((m, n))
    }

    /// [m,n] + [n] (row broadcast over rows).
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (m, n) = self.row_broadcast(a, row, "add_row")?;
        let va = self.node(a)?.value.values();
        let vr = self.node(row)?.value.values();
        let mut out = va.to_vec();
        kernels::add_row_inplace(&mut out, vr);
        Ok(self.push(
            Tensor::new(vec![m, n], out)?,
            Op::AddRow(a.idx, row.idx),
            None,
        ))
    }

    /// [m,n] * [n] (row broadcast over rows).
    pub fn mul_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (m, n) = self.row_broadcast(a, row, "mul_row")?;
        let va = self.node(a)?.value.values();
        let vr = self.node(row)?.value.values();
        let mut out = Vec::with_capacity(m * n);
        for chunk in va.chunks(n) {
            out.extend(chunk.iter().zip(vr).map(|(x, y)| x * y));
        }
        Ok(self.push(
            Tensor::new(vec![m, n], out)?,
            Op::MulRow(a.idx, row.idx),
            None,
        ))
    }

    pub fn sum_all(&mut self, a: Var) -> Result<Var> {
        let s: f64 = self.node(a)?.value.values().iter().sum();
        Ok(self.push(Tensor::scalar(s)?, Op::SumAll(a.idx), None))
    }

    pub fn mean_all(&mut self, a: Var) -> Result<Var> {
        let t = &self.node(a)?.value;
        if t.is_empty() {
            return Err(Error::Shape("mean of empty tensor".to_string()));
        }
        let s: f64 = t.values().iter().sum::<f64>() / t.len() as f64;
        Ok(self.push(Tensor::scalar(s)?, Op::MeanAll(a.idx), None))
    }

    /// [m,n] -> [m], summing each row.
    pub fn sum_rows(&mut self, a: Var) -> Result<Var> {
        let t = &self.node(a)?.value;
        let (m, n) = Self::dims2(t, "sum_rows")?;
        let data: Vec<f64> = t.values().chunks(n).map(|r| r.iter().sum()).collect();
        Ok(self.push(
            Tensor::new(vec![m], data)?,
            Op::SumRows(a.idx),
            None,
        ))
    }

    /// [m,n] -> [m], picking `cols[i]` from row i.
    pub fn select_cols(&mut self, a: Var, cols: &[usize]) -> Result<Var> {
        let t = &self.node(a)?.value;
        let (m, n) = Self::dims2(t, "select_cols")?;
        if cols.len() != m {
            return Err(Error::Shape(format!(
                "select_cols: {} indices for {m} rows",
                cols.len()
            )));
        }
        if let Some(&bad) = cols.iter().find(|&&c| c >= n) {
            return Err(Error::Contract(format!(
                "select_cols: column {bad} out of range {n}"
            )));
        }
        let v = t.values();
        let data: Vec<f64> = cols.iter().enumerate().map(|(i, &c)| v[i * n + c]).collect();
        Ok(self.push(
            Tensor::new(vec![m], data)?,
            Op::SelectCols(a.idx, cols.to_vec()),
            None,
        ))
    }

    /// Row-wise log-softmax of a [m,n] tensor.
    pub fn log_softmax_rows(&mut self, a: Var) -> Result<Var> {
        let t = &self.node(a)?.value;
        let (m, n) = Self::dims2(t, "log_softmax_rows")?;
        let mut out = vec![0.0; m * n];
        kernels::log_softmax_rows(t.values(), n, &mut out);
        Ok(self.push(
            Tensor::new(vec![m, n], out)?,
            Op::LogSoftmaxRows(a.idx),
            None,
        ))
    }

    pub fn reshape(&mut self, a: Var, shape: Vec<usize>) -> Result<Var> {
        let t = &self.node(a)?.value;
        let want: usize = shape.iter().product();
        if want != t.len() {
            return Err(Error::Shape(format!(
                "reshape {:?} -> {:?}",
                t.shape(),
                shape
            )));
        }
        let data = t.values().to_vec();
        Ok(self.push(Tensor::new(shape, data)?, Op::Reshape(a.idx), None))
    }

    /// 1-D slice [start, end).
    pub fn slice(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let t = &self.node(a)?.value;
        if t.shape().len() != 1 || end > t.len() || start > end {
            return Err(Error::Shape(format!(
                "slice [{start},{end}) of shape {:?}",
                t.shape()
            )));
        }
        let data = t.values()[start..end].to_vec();
        Ok(self.push(
            Tensor::new(vec![end - start], data)?,
            Op::Slice(a.idx, start),
            None,
        ))
    }

    /// Broadcast-add a scalar var to every element of `a`.
    pub fn add_bcast(&mut self, a: Var, s: Var) -> Result<Var> {
        let ts = &self.node(s)?.value;
        if !ts.is_scalar() {
            return Err(Error::Shape(format!(
                "add_bcast rhs must be scalar, got {:?}",
                ts.shape()
            )));
        }
        let sv = ts.values()[0];
        let t = &self.node(a)?.value;
        let shape = t.shape().to_vec();
        let data: Vec<f64> = t.values().iter().map(|&x| x + sv).collect();
        Ok(self.push(
            Tensor::new(shape, data)?,
            Op::AddBcast(a.idx, s.idx),
            None,
        ))
    }

    /// Reverse sweep from a scalar loss. Yields a gradient for every
    /// registered leaf; leaves the loss never touched get exact zeros.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        let loss_node = self.node(loss)?;
        if !loss_node.value.is_scalar() {
            return Err(Error::Contract(format!(
                "backward expects a scalar loss, got shape {:?}",
                loss_node.value.shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.idx as usize] = Some(vec![1.0]);

        for i in (0..=loss.idx as usize).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            self.accumulate(i, &g, &mut grads)?;
            grads[i] = Some(g);
        }

        let mut out = Gradients {
            tape: self.id,
            entries: Vec::with_capacity(self.leaves.len()),
        };
        for &leaf in &self.leaves {
            let node = &self.nodes[leaf as usize];
            let shape = node.value.shape().to_vec();
            let data = grads[leaf as usize]
                .take()
                .unwrap_or_else(|| vec![0.0; node.value.len()]);
            let name = node.name.clone().unwrap_or_default();
            out.entries.push((leaf, name, Tensor::new(shape, data)?));
        }
        Ok(out)
    }

    fn accumulate(
        &self,
        i: usize,
        g: &[f64],
        grads: &mut [Option<Vec<f64>>],
    ) -> Result<()> {
        let node = &self.nodes[i];
        let out_val = node.value.values();
        let mut bump = |idx: u32, f: &mut dyn FnMut(&mut [f64])| {
            let slot = &mut grads[idx as usize];
            if slot.is_none() {
                *slot = Some(vec![0.0; self.nodes[idx as usize].value.len()]);
            }
            f(slot.as_mut().unwrap());
        };

        match &node.op {
            Op::Leaf | Op::Const => {}
            Op::Add(a, b) => {
                bump(*a, &mut |d| axpy(d, g, 1.0));
                bump(*b, &mut |d| axpy(d, g, 1.0));
            }
            Op::Sub(a, b) => {
                bump(*a, &mut |d| axpy(d, g, 1.0));
                bump(*b, &mut |d| axpy(d, g, -1.0));
            }
            Op::Mul(a, b) => {
                let va = self.nodes[*a as usize].value.values().to_vec();
                let vb = self.nodes[*b as usize].value.values().to_vec();
                bump(*a, &mut |d| {
                    for ((d, &g), &b) in d.iter_mut().zip(g).zip(&vb) {
                        *d += g * b;
                    }
                });
                bump(*b, &mut |d| {
                    for ((d, &g), &a) in d.iter_mut().zip(g).zip(&va) {
                        *d += g * a;
                    }
                });
            }
            Op::Neg(a) => bump(*a, &mut |d| axpy(d, g, -1.0)),
            Op::Scale(a, c) => {
                let c = *c;
                bump(*a, &mut |d| axpy(d, g, c));
            }
            Op::AddScalar(a, _) => bump(*a, &mut |d| axpy(d, g, 1.0)),
            Op::MatMul(a, b) => {
                let ta = &self.nodes[*a as usize].value;
                let tb = &self.nodes[*b as usize].value;
                let (m, k) = (ta.shape()[0], ta.shape()[1]);
                let n = tb.shape()[1];
                let va = ta.values().to_vec();
                let vb = tb.values().to_vec();
                bump(*a, &mut |d| {
                    // dA += g . B^T
                    let mut tmp = vec![0.0; m * k];
                    kernels::matmul_bt(g, &vb, m, n, k, &mut tmp);
                    axpy(d, &tmp, 1.0);
                });
                bump(*b, &mut |d| {
                    // dB += A^T . g
                    let mut tmp = vec![0.0; k * n];
                    kernels::matmul_at(&va, g, m, k, n, &mut tmp);
                    axpy(d, &tmp, 1.0);
                });
            }
            Op::AddRow(a, row) => {
                let n = self.nodes[*row as usize].value.len();
                bump(*a, &mut |d| axpy(d, g, 1.0));
                bump(*row, &mut |d| {
                    for chunk in g.chunks(n) {
                        for (d, &gv) in d.iter_mut().zip(chunk) {
                            *d += gv;
                        }
                    }
                });
            }
            Op::MulRow(a, row) => {
                let n = self.nodes[*row as usize].value.len();
                let vr = self.nodes[*row as usize].value.values().to_vec();
                let va = self.nodes[*a as usize].value.values().to_vec();
                bump(*a, &mut |d| {
                    for (chunk_d, chunk_g) in d.chunks_mut(n).zip(g.chunks(n)) {
                        for ((d, &g), &r) in chunk_d.iter_mut().zip(chunk_g).zip(&vr) {
                            *d += g * r;
                        }
                    }
                });
                bump(*row, &mut |d| {
                    for (chunk_g, chunk_a) in g.chunks(n).zip(va.chunks(n)) {
                        for ((d, &g), &a) in d.iter_mut().zip(chunk_g).zip(chunk_a) {
                            *d += g * a;
                        }
                    }
                });
            }
            Op::Tanh(a) => {
                bump(*a, &mut |d| {
                    for ((d, &g), &y) in d.iter_mut().zip(g).zip(out_val) {
                        *d += g * (1.0 - y * y);
                    }
                });
            }
            Op::Exp(a) => {
                bump(*a, &mut |d| {
                    for ((d, &g), &y) in d.iter_mut().zip(g).zip(out_val) {
                        *d += g * y;
                    }
                });
            }
            Op::Ln(a) => {
                let vx = self.nodes[*a as usize].value.values().to_vec();
                bump(*a, &mut |d| {
                    for ((d, &g), &x) in d.iter_mut().zip(g).zip(&vx) {
                        *d += g / x;
                    }
                });
            }
            Op::Square(a) => {
                let vx = self.nodes[*a as usize].value.values().to_vec();
                bump(*a, &mut |d| {
                    for ((d, &g), &x) in d.iter_mut().zip(g).zip(&vx) {
                        *d += 2.0 * x * g;
                    }
                });
            }
            Op::Clamp(a, lo, hi) => {
                let (lo, hi) = (*lo, *hi);
                let vx = self.nodes[*a as usize].value.values().to_vec();
                bump(*a, &mut |d| {
                    for ((d, &g), &x) in d.iter_mut().zip(g).zip(&vx) {
                        if x >= lo && x <= hi {
                            *d += g;
                        }
                    }
                });
            }
            Op::MinElem(a, b) | Op::MaxElem(a, b) => {
                // Route each element's gradient to whichever operand won;
                // ties go to the first operand.
                let va = self.nodes[*a as usize].value.values().to_vec();
                bump(*a, &mut |d| {
                    for ((d, &g), (&y, &x)) in
                        d.iter_mut().zip(g).zip(out_val.iter().zip(&va))
                    {
                        if y == x {
                            *d += g;
                        }
                    }
                });
                bump(*b, &mut |d| {
                    for ((d, &g), (&y, &x)) in
                        d.iter_mut().zip(g).zip(out_val.iter().zip(&va))
                    {
                        if y != x {
                            *d += g;
                        }
                    }
                });
            }
            Op::SumAll(a) => {
                let gv = g[0];
                bump(*a, &mut |d| {
                    for d in d.iter_mut() {
                        *d += gv;
                    }
                });
            }
            Op::MeanAll(a) => {
                let len = self.nodes[*a as usize].value.len();
                let gv = g[0] / len as f64;
                bump(*a, &mut |d| {
                    for d in d.iter_mut() {
                        *d += gv;
                    }
                });
            }
            Op::SumRows(a) => {
                let n = self.nodes[*a as usize].value.shape()[1];
                bump(*a, &mut |d| {
                    for (chunk, &gv) in d.chunks_mut(n).zip(g) {
                        for d in chunk {
                            *d += gv;
                        }
                    }
                });
            }
            Op::SelectCols(a, cols) => {
                let n = self.nodes[*a as usize].value.shape()[1];
                bump(*a, &mut |d| {
                    for (i, (&c, &gv)) in cols.iter().zip(g).enumerate() {
                        d[i * n + c] += gv;
                    }
                });
            }
            Op::LogSoftmaxRows(a) => {
                let n = self.nodes[*a as usize].value.shape()[1];
                bump(*a, &mut |d| {
                    for ((chunk_d, chunk_g), chunk_y) in
                        d.chunks_mut(n).zip(g.chunks(n)).zip(out_val.chunks(n))
                    {
                        let gsum: f64 = chunk_g.iter().sum();
                        for ((d, &g), &y) in chunk_d.iter_mut().zip(chunk_g).zip(chunk_y) {
                            *d += g - y.exp() * gsum;
                        }
                    }
                });
            }
            Op::Reshape(a) => bump(*a, &mut |d| axpy(d, g, 1.0)),
            Op::Slice(a, start) => {
                let start = *start;
                bump(*a, &mut |d| {
                    for (d, &gv) in d[start..start + g.len()].iter_mut().zip(g) {
                        *d += gv;
                    }
                });
            }
            Op::AddBcast(a, s) => {
                bump(*a, &mut |d| axpy(d, g, 1.0));
                let gsum: f64 = g.iter().sum();
                bump(*s, &mut |d| d[0] += gsum);
            }
        }
        Ok(())
    }
}

fn axpy(dst: &mut [f64], src: &[f64], alpha: f64) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += alpha * s;
    }
}

/// Result of a backward sweep: one gradient per registered leaf.
pub struct Gradients {
    tape: u32,
    entries: Vec<(u32, String, Tensor)>,
}

impl Gradients {
    pub fn get(&self, leaf: Var) -> Result<&Tensor> {
        if leaf.tape != self.tape {
            return Err(Error::Contract(
                "gradient lookup with a var from a different tape".to_string(),
            ));
        }
        self.entries
            .iter()
            .find(|(idx, _, _)| *idx == leaf.idx)
            .map(|(_, _, t)| t)
            .ok_or_else(|| Error::Contract("var is not a registered leaf".to_string()))
    }

    /// (name, gradient) pairs in registration order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(_, n, t)| (n.as_str(), t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec_t(v: &[f64]) -> Tensor {
        Tensor::vector(v.to_vec()).unwrap()
    }

    #[test]
    fn linear_gradient_is_input() {
        // loss = sum(w * x), x fixed -> grad(w) = x
        let mut tape = Tape::new();
        let w = tape.leaf("w", &vec_t(&[1.0, -2.0, 0.5]));
        let x = tape.constant(&vec_t(&[3.0, 4.0, 5.0]));
        let prod = tape.mul(w, x).unwrap();
        let loss = tape.sum_all(prod).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w).unwrap().values(), &[3.0, 4.0, 5.0]);
    }

    #[test]
    fn unused_leaf_gets_exact_zero() {
        let mut tape = Tape::new();
        let used = tape.leaf("used", &vec_t(&[2.0]));
        let unused = tape.leaf("unused", &vec_t(&[7.0, 8.0]));
        let loss = tape.sum_all(used).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(unused).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(grads.get(used).unwrap().values(), &[1.0]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut tape = Tape::new();
        let w = tape.leaf("w", &vec_t(&[1.0, 2.0]));
        assert!(matches!(tape.backward(w), Err(Error::Contract(_))));
    }

    #[test]
    fn cross_tape_var_rejected() {
        let mut t1 = Tape::new();
        let mut t2 = Tape::new();
        let a = t1.leaf("a", &vec_t(&[1.0]));
        let b = t2.leaf("b", &vec_t(&[1.0]));
        assert!(t1.add(a, b).is_err());
    }

    #[test]
    fn tape_isolation() {
        // Gradients from one tape are untouched by building and running another.
        let mut t1 = Tape::new();
        let w1 = t1.leaf("w", &vec_t(&[2.0]));
        let l1 = t1.sum_all(w1).unwrap();
        let g1 = t1.backward(l1).unwrap();
        let before = g1.get(w1).unwrap().values().to_vec();

        let mut t2 = Tape::new();
        let w2 = t2.leaf("w", &vec_t(&[100.0]));
        let s = t2.scale(w2, 50.0).unwrap();
        let l2 = t2.sum_all(s).unwrap();
        let _ = t2.backward(l2).unwrap();

        assert_eq!(g1.get(w1).unwrap().values(), before.as_slice());
    }

    #[test]
    fn matmul_matches_hand_computation() {
        let mut tape = Tape::new();
        let a = tape.constant(&Tensor::matrix(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let b = tape.constant(&Tensor::matrix(2, 2, vec![5.0, 6.0, 7.0, 8.0]).unwrap());
        let c = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(c).unwrap().values(), &[19.0, 22.0, 43.0, 50.0]);
    }

    #[test]
    fn select_cols_and_logsoftmax() {
        let mut tape = Tape::new();
        let logits = tape.constant(&Tensor::matrix(2, 3, vec![0.0; 6]).unwrap());
        let ls = tape.log_softmax_rows(logits).unwrap();
        let picked = tape.select_cols(ls, &[0, 2]).unwrap();
        let v = tape.value(picked).unwrap().values().to_vec();
        let expect = -(3.0f64).ln();
        assert!((v[0] - expect).abs() < 1e-12);
        assert!((v[1] - expect).abs() < 1e-12);
    }

    #[test]
    fn clamp_blocks_gradient_outside_bounds() {
        let mut tape = Tape::new();
        let w = tape.leaf("w", &vec_t(&[3.0, 0.5]));
        let c = tape.clamp(w, 0.0, 1.0).unwrap();
        let loss = tape.sum_all(c).unwrap();
        let grads = tape.backward(loss).unwrap();
        assert_eq!(grads.get(w).unwrap().values(), &[0.0, 1.0]);
    }

    #[test]
    fn non_finite_op_output_rejected() {
        let mut tape = Tape::new();
        let x = tape.constant(&vec_t(&[-1.0]));
        assert!(matches!(tape.ln(x), Err(Error::NonFinite(_))));
    }
}
