//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use ndarray::Array2;

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Unsorted eigenpairs; `vectors` holds one eigenvector per column.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
    pub sweeps: usize,
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += a[[i, j]] * a[[i, j]];
        }
    }
    (2.0 * sum).sqrt()
}

/// Diagonalizes `matrix` with cyclic Jacobi rotations until the Frobenius
/// norm of the off-diagonal part is at most `tolerance`.
///
/// Only the upper triangle is read; the input is assumed symmetric.
pub fn jacobi_eigen(matrix: &Array2<f64>, tolerance: f64, max_sweeps: usize) -> Result<SymmetricEigen> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "jacobi_eigen needs a square matrix");

    let mut a = matrix.clone();
    for i in 0..n {
        for j in 0..i {
            a[[i, j]] = a[[j, i]];
        }
    }
    let mut v = Array2::<f64>::eye(n);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= tolerance {
            break;
        }
        if sweeps == max_sweeps {
            return Err(Error::ConvergenceFailure { sweeps, off_norm: off });
        }
        sweeps += 1;

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                // Rotation angle from the 2x2 symmetric Schur decomposition.
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[[r, p]];
                        let arq = a[[r, q]];
                        let new_rp = c * arp - s * arq;
                        let new_rq = s * arp + c * arq;
                        a[[r, p]] = new_rp;
                        a[[p, r]] = new_rp;
                        a[[r, q]] = new_rq;
                        a[[q, r]] = new_rq;
                    }
                }
                for r in 0..n {
                    let vrp = v[[r, p]];
                    let vrq = v[[r, q]];
                    v[[r, p]] = c * vrp - s * vrq;
                    v[[r, q]] = s * vrp + c * vrq;
                }
            }
        }
    }

    Ok(SymmetricEigen {
        values: (0..n).map(|i| a[[i, i]]).collect(),
        vectors: v,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn check_residual(m: &Array2<f64>, eig: &SymmetricEigen) {
        for k in 0..m.nrows() {
            let col = eig.vectors.column(k);
            let mv = m.dot(&col);
            for i in 0..m.nrows() {
                assert!((mv[i] - eig.values[k] * col[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let m = array![[3.0, 0.0], [0.0, 1.0]];
        let eig = jacobi_eigen(&m, DEFAULT_TOLERANCE, DEFAULT_MAX_SWEEPS).unwrap();
        assert_eq!(eig.sweeps, 0);
        assert_eq!(eig.values, vec![3.0, 1.0]);
    }

    #[test]
    fn two_by_two() {
        let m = array![[2.0, 1.0], [1.0, 2.0]];
        let eig = jacobi_eigen(&m, DEFAULT_TOLERANCE, DEFAULT_MAX_SWEEPS).unwrap();
        let mut vals = eig.values.clone();
        vals.sort_by(f64::total_cmp);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        check_residual(&m, &eig);
    }

    #[test]
    fn dense_symmetric() {
        let m = array![
            [4.0, -2.0, 1.0, 0.5],
            [-2.0, 5.0, 0.3, -1.0],
            [1.0, 0.3, 3.0, 2.0],
            [0.5, -1.0, 2.0, 6.0]
        ];
        let eig = jacobi_eigen(&m, DEFAULT_TOLERANCE, DEFAULT_MAX_SWEEPS).unwrap();
        check_residual(&m, &eig);
        let trace: f64 = eig.values.iter().sum();
        assert!((trace - 18.0).abs() < 1e-12);
        let vtv = eig.vectors.t().dot(&eig.vectors);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[[i, j]] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sweep_cap_reports_failure() {
        let m = array![[1.0, 0.9, 0.5], [0.9, 1.0, 0.2], [0.5, 0.2, 1.0]];
        assert!(matches!(jacobi_eigen(&m, 0.0, 0), Err(Error::ConvergenceFailure { sweeps: 0, .. })));
    }
}
