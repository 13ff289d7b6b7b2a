//! Minimization of the spectral contrastive objective over finite-input
//! encoders.
//!
//! For an encoder table `phi` (row per input), the objective is
//!
//! ```text
//! L(phi) = -2 sum_ij s_plus[i][j] <phi_i, phi_j>
//!          + sum_ij p_i p_j <phi_i, phi_j>^2
//! ```
//!
//! Substituting `u_i = sqrt(p_i) phi_i` turns this into the rank-k
//! approximation problem `|| A - U U^T ||_F^2 - || A ||_F^2` with
//! `A[i][j] = s_plus[i][j] / sqrt(p_i p_j)`, so the global minimizer is
//! built from the top-k eigenpairs of the normalized positive-pair
//! adjacency with negative eigenvalues clamped to zero. The gradient
//! descent route optimizes the same objective directly and is checked
//! against the closed form.

use serde::{Deserialize, Serialize};

use crate::augmentation_graph::{normalized_adjacency, PositivePairMatrix};
use crate::numerics::{sym_eig, Matrix, Rng};
use crate::{Error, Result};

const EIG_TOL: f64 = 1e-12;
const INIT_SCALE: f64 = 0.01;

/// Per-input feature table: row `i` is the embedding of input `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EncoderJson", into = "EncoderJson")]
pub struct Encoder {
    n: usize,
    k: usize,
    features: Matrix,
}

#[derive(Serialize, Deserialize)]
struct EncoderJson {
    n: usize,
    k: usize,
    features: Vec<Vec<f64>>,
}

impl TryFrom<EncoderJson> for Encoder {
    type Error = Error;
    fn try_from(j: EncoderJson) -> Result<Self> {
        let features = Matrix::from_rows(&j.features)?;
        Encoder::new(features).and_then(|e| {
            if e.n != j.n || e.k != j.k {
                Err(Error::validation("encoder dimensions disagree with features"))
            } else {
                Ok(e)
            }
        })
    }
}

impl From<Encoder> for EncoderJson {
    fn from(e: Encoder) -> Self {
        EncoderJson {
            n: e.n,
            k: e.k,
            features: e.features.to_nested(),
        }
    }
}

impl Encoder {
    pub fn new(features: Matrix) -> Result<Self> {
        features.check_finite()?;
        if features.cols() == 0 {
            return Err(Error::validation("feature dimension must be at least 1"));
        }
        Ok(Encoder {
            n: features.rows(),
            k: features.cols(),
            features,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    /// Embedding of input `x`.
    pub fn embed(&self, x: usize) -> &[f64] {
        self.features.row(x)
    }
}

/// Evaluates the objective for an encoder against a positive-pair
/// distribution and a sampling distribution for the quadratic term.
pub fn spectral_loss(e: &Encoder, sp: &PositivePairMatrix, p_u: &[f64]) -> Result<f64> {
    let n = sp.dim();
    if e.node_count() != n || p_u.len() != n {
        return Err(Error::validation(format!(
            "dimension mismatch: encoder {} nodes, pairs {}x{}, p_u {}",
            e.node_count(),
            n,
            n,
            p_u.len()
        )));
    }
    let gram = e.features.matmul(&e.features.transpose());
    let mut loss = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = gram.get(i, j);
            loss += -2.0 * sp.matrix().get(i, j) * g + p_u[i] * p_u[j] * g * g;
        }
    }
    Ok(loss)
}

/// Gradient of [`spectral_loss`] with respect to the feature table:
/// `-4 S F + 4 ((p p^T) .* (F F^T)) F`.
pub fn spectral_loss_gradient(features: &Matrix, sp: &PositivePairMatrix, p: &[f64]) -> Matrix {
    let n = sp.dim();
    let gram = features.matmul(&features.transpose());
    let mut weighted = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            weighted.set(i, j, p[i] * p[j] * gram.get(i, j) - sp.matrix().get(i, j));
        }
    }
    weighted.matmul(features).scale(4.0)
}

/// Exact minimizer of the objective at feature dimension `k`: scaled
/// top-k eigenvectors of the normalized adjacency, unnormalized by the
/// node marginals. Negative eigenvalues cannot lower the loss and are
/// clamped to zero before the square root.
pub fn pretrain_closed_form(sp: &PositivePairMatrix, k: usize) -> Result<Encoder> {
    let n = sp.dim();
    if k == 0 || k > n {
        return Err(Error::validation(format!(
            "feature dimension must satisfy 1 <= k <= {n}, got {k}"
        )));
    }
    let adj = normalized_adjacency(sp)?;
    let (vals, vecs) = sym_eig(&adj, EIG_TOL)?;
    let w = sp.marginals();
    let mut features = Matrix::zeros(n, k);
    for j in 0..k {
        let scale = vals[j].max(0.0).sqrt();
        for i in 0..n {
            features.set(i, j, vecs.get(i, j) * scale / w[i].sqrt());
        }
    }
    Encoder::new(features)
}

/// Full-batch gradient descent on the objective from a small uniform
/// random initialization. The sampling distribution for the quadratic
/// term is the positive-pair marginal. `steps = 0` returns the
/// initialization untouched.
pub fn pretrain_gd(
    sp: &PositivePairMatrix,
    k: usize,
    steps: usize,
    lr: f64,
    rng: &mut Rng,
) -> Result<Encoder> {
    let n = sp.dim();
    if k == 0 || k > n {
        return Err(Error::validation(format!(
            "feature dimension must satisfy 1 <= k <= {n}, got {k}"
        )));
    }
    if !(lr > 0.0) {
        return Err(Error::validation(format!("learning rate must be positive, got {lr}")));
    }
    let p = sp.marginals();
    let mut features = Matrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            features.set(i, j, rng.uniform_in(-INIT_SCALE, INIT_SCALE));
        }
    }
    for step in 0..steps {
        let grad = spectral_loss_gradient(&features, sp, &p);
        for i in 0..n {
            for j in 0..k {
                features.set(i, j, features.get(i, j) - lr * grad.get(i, j));
            }
        }
        if features.check_finite().is_err() {
            return Err(Error::numerical(format!(
                "gradient descent diverged at step {step}"
            )));
        }
    }
    Encoder::new(features)
}
