//! Shared arithmetic kernels. Both the tape forward pass and the
//! no-gradient inference paths call into these, so training-time and
//! execution-time arithmetic is bit-identical.

/// out[m,n] = a[m,k] * b[k,n], row-major.
pub fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    out.fill(0.0);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let brow = &b[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

/// out[m,n] = a[m,k] * b[n,k]^T.
pub fn matmul_bt(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        for j in 0..n {
            let brow = &b[j * k..(j + 1) * k];
            out[i * n + j] = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    }
}

/// out[k,n] = a[m,k]^T * b[m,n].
pub fn matmul_at(a: &[f64], b: &[f64], m: usize, k: usize, n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(out.len(), k * n);
    out.fill(0.0);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let brow = &b[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let orow = &mut out[p * n..(p + 1) * n];
            for (o, &bv) in orow.iter_mut().zip(brow) {
                *o += av * bv;
            }
        }
    }
}

/// rows[m,n] += row[n] broadcast over every row.
pub fn add_row_inplace(data: &mut [f64], row: &[f64]) {
    for chunk in data.chunks_mut(row.len()) {
        for (d, r) in chunk.iter_mut().zip(row) {
            *d += r;
        }
    }
}

pub fn tanh_inplace(data: &mut [f64]) {
    for v in data.iter_mut() {
        *v = v.tanh();
    }
}

/// y = x*W + b for x[m,k], W[k,n], b[n].
pub fn affine(x: &[f64], w: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    matmul(x, w, m, k, n, &mut out);
    add_row_inplace(&mut out, b);
    out
}

/// Numerically stable log-softmax over each row of a [m,n] buffer.
pub fn log_softmax_rows(data: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(data.len(), out.len());
    for (row, orow) in data.chunks(n).zip(out.chunks_mut(n)) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        for (o, &v) in orow.iter_mut().zip(row) {
            *o = v - lse;
        }
    }
}
