//! Minimal dense linear algebra for the selector fit.
//!
//! The only consumer solves tiny least-squares systems (at most a handful of
//! features), so a cyclic Jacobi eigendecomposition of the Gram matrix is
//! plenty: it is deterministic, has no branching on data order, and gives a
//! rank-revealing pseudoinverse. `min_norm_least_squares` returns the
//! minimum-norm solution `pinv(X) y` via the identity
//! `pinv(X) = pinv(X^T X) X^T`.

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as columns, so
/// `A = V diag(l) V^T`.
#[allow(clippy::needless_range_loop)] // index loops mirror the rotation algebra
pub fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= scale * 1e-15 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq.abs() <= scale * 1e-18 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[p][k] = a[k][p];
                        a[k][q] = s * akp + c * akq;
                        a[q][k] = a[k][q];
                    }
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

/// Minimum-norm least-squares solution of `X w = y` for row-major `X`.
///
/// Eigenvalues of `X^T X` below `1e-12 * max_eigenvalue` are treated as rank
/// deficiency and dropped, which is what makes the solution minimum-norm on
/// underdetermined systems.
pub fn min_norm_least_squares(x_rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    assert_eq!(x_rows.len(), y.len(), "row/target count mismatch");
    let p = x_rows.first().map_or(0, |r| r.len());
    if p == 0 {
        return Vec::new();
    }
    let mut gram = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for (row, &target) in x_rows.iter().zip(y) {
        assert_eq!(row.len(), p, "ragged design matrix");
        for i in 0..p {
            for j in 0..p {
                gram[i][j] += row[i] * row[j];
            }
            rhs[i] += row[i] * target;
        }
    }
    let (eigenvalues, vectors) = jacobi_eigen(gram);
    let max_eig = eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let mut w = vec![0.0; p];
    if max_eig == 0.0 {
        return w;
    }
    let tol = max_eig * 1e-12;
    for i in 0..p {
        if eigenvalues[i] <= tol {
            continue;
        }
        let mut proj = 0.0;
        for k in 0..p {
            proj += vectors[k][i] * rhs[k];
        }
        let coeff = proj / eigenvalues[i];
        for k in 0..p {
            w[k] += coeff * vectors[k][i];
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_from(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let a = mat_from(&[
            &[4.0, 1.0, 0.5, 0.0],
            &[1.0, 3.0, 0.2, 0.1],
            &[0.5, 0.2, 2.0, 0.3],
            &[0.0, 0.1, 0.3, 1.0],
        ]);
        let (l, v) = jacobi_eigen(a.clone());
        let n = a.len();
        for i in 0..n {
            for j in 0..n {
                let mut rebuilt = 0.0;
                for k in 0..n {
                    rebuilt += v[i][k] * l[k] * v[j][k];
                }
                assert!(
                    (rebuilt - a[i][j]).abs() < 1e-12,
                    "mismatch at ({i},{j}): {rebuilt} vs {}",
                    a[i][j]
                );
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        let a = mat_from(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let (_, v) = jacobi_eigen(a);
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = (0..2).map(|k| v[k][i] * v[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn overdetermined_full_rank_solution() {
        // y = 2 + 3x fitted through the design [1, x].
        let x = mat_from(&[&[1.0, 0.0], &[1.0, 1.0], &[1.0, 2.0]]);
        let w = min_norm_least_squares(&x, &[2.0, 5.0, 8.0]);
        assert!((w[0] - 2.0).abs() < 1e-12);
        assert!((w[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn underdetermined_takes_min_norm() {
        // One equation, two unknowns: w0 + w1 = 2. Min-norm answer is (1, 1).
        let x = mat_from(&[&[1.0, 1.0]]);
        let w = min_norm_least_squares(&x, &[2.0]);
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicated_column_splits_weight() {
        // x and a copy of x: min-norm splits the slope evenly.
        let x = mat_from(&[&[1.0, 1.0], &[2.0, 2.0], &[3.0, 3.0]]);
        let w = min_norm_least_squares(&x, &[2.0, 4.0, 6.0]);
        assert!((w[0] - 1.0).abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_gives_zero_solution() {
        let x = mat_from(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let w = min_norm_least_squares(&x, &[1.0, 2.0]);
        assert_eq!(w, vec![0.0, 0.0]);
    }
}
