use crate::numerics::Matrix;
use crate::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending and the matching orthonormal
/// eigenvectors as matrix columns, so `m = V diag(l) V^T`. `tol` bounds
/// both the accepted input asymmetry and the final off-diagonal residual.
/// Adequate and fully deterministic for the order-<=64 matrices used
/// here; not meant for large eigenproblems.
pub fn sym_eig(m: &Matrix, tol: f64) -> Result<(Vec<f64>, Matrix)> {
    if m.rows() != m.cols() {
        return Err(Error::validation(format!(
            "sym_eig requires a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    m.check_finite()?;
    let res = m.symmetry_residual();
    if res > tol {
        return Err(Error::validation(format!(
            "matrix is not symmetric within {tol:e}: residual {res:e}"
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut v = Matrix::identity(n);

    if n == 1 {
        return Ok((vec![a.get(0, 0)], v));
    }

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diag_max(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                // Standard two-sided rotation choosing the smaller angle.
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s);
            }
        }
    }
    if !converged && off_diag_max(&a) > tol {
        return Err(Error::numerical(format!(
            "Jacobi iteration did not converge within {MAX_SWEEPS} sweeps \
             (off-diagonal residual {:e} > {tol:e})",
            off_diag_max(&a)
        )));
    }

    // Sort eigenpairs by eigenvalue, descending.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, new_j, v.get(i, old_j));
        }
    }
    Ok((eigenvalues, vectors))
}

fn off_diag_max(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            m = m.max(a.get(i, j).abs());
        }
    }
    m
}

/// Applies the rotation J(p,q)^T A J(p,q) and accumulates V <- V J.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let apq = a.get(p, q);
    a.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
    a.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for i in 0..n {
        if i != p && i != q {
            let aip = a.get(i, p);
            let aiq = a.get(i, q);
            a.set(i, p, c * aip - s * aiq);
            a.set(p, i, c * aip - s * aiq);
            a.set(i, q, s * aip + c * aiq);
            a.set(q, i, s * aip + c * aiq);
        }
    }
    for i in 0..n {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, c * vip - s * viq);
        v.set(i, q, s * vip + c * viq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    const TOL: f64 = 1e-12;

    #[test]
    fn identity_has_unit_eigenvalues() {
        let (vals, _) = sym_eig(&Matrix::identity(2), TOL).unwrap();
        assert_eq!(vals, vec![1.0, 1.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let (vals, vecs) = sym_eig(&m, TOL).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        // Eigenvectors are (1,1)/sqrt(2) and (1,-1)/sqrt(2) up to sign.
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = vecs.col(0);
        let v1 = vecs.col(1);
        assert!((v0[0].abs() - inv_sqrt2).abs() < 1e-12);
        assert!((v0[0] - v0[1]).abs() < 1e-12);
        assert!((v1[0].abs() - inv_sqrt2).abs() < 1e-12);
        assert!((v1[0] + v1[1]).abs() < 1e-12);
    }

    fn random_symmetric(n: usize, rng: &mut Rng) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.uniform_in(-1.0, 1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    // Reconstruction oracle: rebuild V diag(l) V^T and compare entrywise.
    #[test]
    fn random_8x8_reconstruction() {
        let mut rng = Rng::new(0x5eed);
        for trial in 0..10 {
            let m = random_symmetric(8, &mut rng);
            let (vals, vecs) = sym_eig(&m, TOL).unwrap();
            let mut lam = Matrix::zeros(8, 8);
            for i in 0..8 {
                lam.set(i, i, vals[i]);
            }
            let rebuilt = vecs.matmul(&lam).matmul(&vecs.transpose());
            assert!(
                rebuilt.max_abs_diff(&m) <= 1e-8,
                "trial {trial}: reconstruction residual {}",
                rebuilt.max_abs_diff(&m)
            );

            // Trace identity and orthonormality.
            let trace: f64 = (0..8).map(|i| m.get(i, i)).sum();
            let sum: f64 = vals.iter().sum();
            assert!((trace - sum).abs() <= 1e-8);
            let vtv = vecs.transpose().matmul(&vecs);
            assert!(vtv.max_abs_diff(&Matrix::identity(8)) <= 1e-8);

            // Sorted descending.
            for w in vals.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_input() {
        let m = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&m, TOL), Err(Error::Validation(_))));
    }
}
