//! Batch linear algebra for the dense networks.
//!
//! Every kernel has a fixed floating-point evaluation order, so the parallel
//! paths (over independent output rows) are bit-identical to the sequential
//! ones regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::mat::Matrix;

/// Dot product with four fixed accumulator lanes. The lane split keeps the
/// summation order deterministic while letting the compiler vectorize.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let quads = a.len() / 4;
    let mut acc = [0.0f64; 4];
    for i in 0..quads {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in quads * 4..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

#[inline]
fn axpy(acc: &mut [f64], scale: f64, x: &[f64]) {
    for (a, &v) in acc.iter_mut().zip(x) {
        *a += scale * v;
    }
}

/// `x * w^T + bias`: activations (batch x in) against row-major weights
/// (out x in), yielding (batch x out).
pub fn affine(x: &Matrix, w: &Matrix, bias: &[f64]) -> Matrix {
    #[cfg(feature = "parallel")]
    {
        let mut z = Matrix::zeros(x.rows, w.rows);
        z.data
            .par_chunks_mut(w.rows)
            .enumerate()
            .for_each(|(b, row)| affine_row(x.row(b), w, bias, row));
        z
    }
    #[cfg(not(feature = "parallel"))]
    {
        affine_sequential(x, w, bias)
    }
}

/// Sequential reference path for [`affine`]; bit-identical output.
pub fn affine_sequential(x: &Matrix, w: &Matrix, bias: &[f64]) -> Matrix {
    let mut z = Matrix::zeros(x.rows, w.rows);
    for b in 0..x.rows {
        affine_row(x.row(b), w, bias, z.row_mut(b));
    }
    z
}

#[inline]
fn affine_row(x: &[f64], w: &Matrix, bias: &[f64], out: &mut [f64]) {
    for (o, slot) in out.iter_mut().enumerate() {
        *slot = dot(x, w.row(o)) + bias[o];
    }
}

/// Propagate deltas through the weights: `delta * w`, (batch x out) times
/// (out x in) giving (batch x in).
pub fn backprop_input(delta: &Matrix, w: &Matrix) -> Matrix {
    #[cfg(feature = "parallel")]
    {
        let mut dx = Matrix::zeros(delta.rows, w.cols);
        dx.data
            .par_chunks_mut(w.cols)
            .enumerate()
            .for_each(|(b, row)| backprop_input_row(delta.row(b), w, row));
        dx
    }
    #[cfg(not(feature = "parallel"))]
    {
        backprop_input_sequential(delta, w)
    }
}

/// Sequential reference path for [`backprop_input`]; bit-identical output.
pub fn backprop_input_sequential(delta: &Matrix, w: &Matrix) -> Matrix {
    let mut dx = Matrix::zeros(delta.rows, w.cols);
    for b in 0..delta.rows {
        backprop_input_row(delta.row(b), w, dx.row_mut(b));
    }
    dx
}

#[inline]
fn backprop_input_row(delta: &[f64], w: &Matrix, out: &mut [f64]) {
    for (o, &d) in delta.iter().enumerate() {
        if d != 0.0 {
            axpy(out, d, w.row(o));
        }
    }
}

/// Weight gradient `delta^T * x`: (batch x out) against (batch x in) giving
/// (out x in). Each output row sums over the batch in index order.
pub fn grad_weights(delta: &Matrix, x: &Matrix) -> Matrix {
    #[cfg(feature = "parallel")]
    {
        let mut dw = Matrix::zeros(delta.cols, x.cols);
        let out_dim = delta.cols;
        dw.data
            .par_chunks_mut(x.cols)
            .enumerate()
            .for_each(|(o, row)| grad_weights_row(delta, x, o, out_dim, row));
        dw
    }
    #[cfg(not(feature = "parallel"))]
    {
        grad_weights_sequential(delta, x)
    }
}

/// Sequential reference path for [`grad_weights`]; bit-identical output.
pub fn grad_weights_sequential(delta: &Matrix, x: &Matrix) -> Matrix {
    let mut dw = Matrix::zeros(delta.cols, x.cols);
    let out_dim = delta.cols;
    for o in 0..delta.cols {
        let row_start = o * x.cols;
        grad_weights_row(delta, x, o, out_dim, &mut dw.data[row_start..row_start + x.cols]);
    }
    dw
}

#[inline]
fn grad_weights_row(delta: &Matrix, x: &Matrix, o: usize, out_dim: usize, row: &mut [f64]) {
    for b in 0..delta.rows {
        let d = delta.data[b * out_dim + o];
        if d != 0.0 {
            axpy(row, d, x.row(b));
        }
    }
}

/// Bias gradient: per-output sums of the deltas over the batch.
pub fn grad_bias(delta: &Matrix) -> Vec<f64> {
    let mut db = vec![0.0f64; delta.cols];
    for b in 0..delta.rows {
        for (acc, &d) in db.iter_mut().zip(delta.row(b)) {
            *acc += d;
        }
    }
    db
}

/// Concatenate two matrices with equal row counts side by side.
pub fn hconcat(a: &Matrix, b: &Matrix) -> Matrix {
    assert_eq!(a.rows, b.rows, "row count mismatch in hconcat");
    let mut out = Matrix::zeros(a.rows, a.cols + b.cols);
    for r in 0..a.rows {
        let row = out.row_mut(r);
        row[..a.cols].copy_from_slice(a.row(r));
        row[a.cols..].copy_from_slice(b.row(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(seed: u64, rows: usize, cols: usize) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix {
            rows,
            cols,
            data: (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    #[test]
    fn dot_matches_naive_sum() {
        let a = random_matrix(1, 1, 117);
        let b = random_matrix(2, 1, 117);
        let naive: f64 = a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum();
        assert!((dot(&a.data, &b.data) - naive).abs() < 1e-12);
    }

    #[test]
    fn parallel_kernels_match_sequential_bit_for_bit() {
        let x = random_matrix(3, 37, 53);
        let w = random_matrix(4, 29, 53);
        let bias: Vec<f64> = (0..29).map(|i| i as f64 * 0.01).collect();
        assert_eq!(affine(&x, &w, &bias), affine_sequential(&x, &w, &bias));

        let delta = random_matrix(5, 37, 29);
        assert_eq!(backprop_input(&delta, &w), backprop_input_sequential(&delta, &w));
        assert_eq!(grad_weights(&delta, &x), grad_weights_sequential(&delta, &x));
    }

    #[test]
    fn affine_matches_hand_computation() {
        // 2x2 input, 1 output neuron
        let x = Matrix::from_rows(vec![vec![1.0, 2.0], vec![-0.5, 0.25]]);
        let w = Matrix::from_rows(vec![vec![3.0, -1.0]]);
        let z = affine(&x, &w, &[0.5]);
        assert_eq!(z.row(0), &[1.0 * 3.0 - 2.0 + 0.5]);
        assert_eq!(z.row(1), &[-1.5 - 0.25 + 0.5]);
    }

    #[test]
    fn grad_kernels_match_naive_triple_loop() {
        let delta = random_matrix(6, 9, 7);
        let x = random_matrix(7, 9, 11);
        let dw = grad_weights(&delta, &x);
        for o in 0..7 {
            for i in 0..11 {
                let mut acc = 0.0;
                for b in 0..9 {
                    acc += delta.row(b)[o] * x.row(b)[i];
                }
                assert!((dw.row(o)[i] - acc).abs() < 1e-12);
            }
        }
        let db = grad_bias(&delta);
        for o in 0..7 {
            let acc: f64 = (0..9).map(|b| delta.row(b)[o]).sum();
            assert!((db[o] - acc).abs() < 1e-12);
        }
    }
}
