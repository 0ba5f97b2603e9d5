//! Regression deltas over per-frame feature trajectories.

use crate::mat::Matrix;

/// First-order regression delta with window `n` and replicated edge frames:
/// `delta[t] = sum_{i=1..n} i*(x[t+i] - x[t-i]) / (2*sum i^2)`.
pub fn compute_delta(traj: &Matrix, n: usize) -> Matrix {
    assert!(n >= 1, "delta window must be at least 1");
    let norm = 2.0 * (1..=n).map(|i| (i * i) as f64).sum::<f64>();
    let k = traj.rows;
    let clamp = |t: isize| -> usize { t.clamp(0, k as isize - 1) as usize };

    let mut out = Matrix::zeros(k, traj.cols);
    for t in 0..k {
        for i in 1..=n {
            let fwd = traj.row(clamp(t as isize + i as isize));
            let bwd = traj.row(clamp(t as isize - i as isize));
            let row = out.row_mut(t);
            for (d, (a, b)) in row.iter_mut().zip(fwd.iter().zip(bwd)) {
                *d += i as f64 * (a - b);
            }
        }
        for d in out.row_mut(t) {
            *d /= norm;
        }
    }
    out
}

/// Delta and double-delta (delta of delta) trajectories.
pub fn compute_deltas(traj: &Matrix, n: usize) -> (Matrix, Matrix) {
    let delta = compute_delta(traj, n);
    let ddelta = compute_delta(&delta, n);
    (delta, ddelta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_trajectory_has_zero_deltas() {
        let traj = Matrix::from_rows(vec![vec![3.0, -1.0]; 6]);
        let (d, dd) = compute_deltas(&traj, 2);
        assert!(d.data.iter().all(|&v| v == 0.0));
        assert!(dd.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_ramp_has_constant_delta_in_the_interior() {
        let c = 0.37;
        let traj = Matrix::from_rows((0..12).map(|t| vec![c * t as f64]).collect());
        let (d, dd) = compute_deltas(&traj, 2);
        for t in 2..10 {
            assert!((d.row(t)[0] - c).abs() < 1e-14, "t={t}");
        }
        for t in 4..8 {
            assert!(dd.row(t)[0].abs() < 1e-14, "t={t}");
        }
    }

    #[test]
    fn matches_brute_force_formula_with_edge_replication() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let k = 10;
        let dims = 3;
        let traj = Matrix::from_rows(
            (0..k).map(|_| (0..dims).map(|_| rng.random_range(-1.0..1.0)).collect()).collect(),
        );
        let n = 2;
        let d = compute_delta(&traj, n);
        let norm: f64 = 2.0 * (1..=n).map(|i| (i * i) as f64).sum::<f64>();
        for t in 0..k {
            for c in 0..dims {
                let mut acc = 0.0;
                for i in 1..=n {
                    let fwd = traj.row((t + i).min(k - 1))[c];
                    let bwd = traj.row(t.saturating_sub(i))[c];
                    acc += i as f64 * (fwd - bwd);
                }
                acc /= norm;
                let rel = (d.row(t)[c] - acc).abs() / acc.abs().max(1e-12);
                assert!(rel < 1e-12, "t={t} c={c}");
            }
        }
    }
}
