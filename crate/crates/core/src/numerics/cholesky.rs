use crate::numerics::Matrix;
use crate::{Error, Result};

/// Lower-triangular Cholesky factor of a symmetric positive definite
/// matrix, kept around so repeated solves and log-determinants reuse the
/// factorization (the Gaussian-process fits lean on this).
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors `a = L L^T`. Fails with the offending pivot index if `a`
    /// is not positive definite.
    pub fn factor(a: &Matrix) -> Result<Self> {
        if a.rows() != a.cols() {
            return Err(Error::validation(format!(
                "Cholesky requires a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        a.check_finite()?;
        let n = a.rows();
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::numerical(format!(
                    "non-positive-definite pivot {d:e} at index {j}"
                )));
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(Cholesky { l })
    }

    /// Solves `a x = b` by forward/back substitution.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n, "dimension mismatch");
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l.get(i, k) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                y[i] -= self.l.get(k, i) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        y
    }

    /// log det(a) = 2 sum log L_ii.
    pub fn log_det(&self) -> f64 {
        (0..self.l.rows())
            .map(|i| self.l.get(i, i).ln())
            .sum::<f64>()
            * 2.0
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }
}

/// One-shot SPD solve; factor once with [`Cholesky::factor`] when solving
/// against many right-hand sides.
pub fn cholesky_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::validation(format!(
            "rhs length {} does not match matrix order {}",
            b.len(),
            a.rows()
        )));
    }
    Ok(Cholesky::factor(a)?.solve(b))
}
