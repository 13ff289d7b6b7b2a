//! Linear probing on frozen encoders and exact tabular ERM with
//! configurable fine-tuning augmentation distributions.
//!
//! The probe is the exact ridge minimizer of the squared loss against
//! one-hot class targets, trained on augmented source inputs: labels come
//! from the source node, features from its augmented image. Tabular ERM
//! under 0-1 loss decomposes per node into a weighted vote, which is what
//! [`erm_minimizers`] computes; nodes no augmented source input can reach
//! stay `Free`, and the minimizer set's best and worst completions bound
//! the achievable target error.

use serde::{Deserialize, Serialize};

use crate::augmentation_graph::{AugmentationGraph, DomainLabel};
use crate::numerics::{Cholesky, Matrix};
use crate::spectral::Encoder;
use crate::{Error, Result};

const KERNEL_ROW_TOL: f64 = 1e-12;

/// Fine-tuning augmentation kernel over graph nodes; row x = A_ft(.|x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FtAugmentation {
    kernel: Matrix,
}

impl FtAugmentation {
    pub fn from_kernel(kernel: Matrix) -> Result<Self> {
        kernel.check_finite()?;
        if kernel.rows() != kernel.cols() {
            return Err(Error::validation("augmentation kernel must be square"));
        }
        for i in 0..kernel.rows() {
            let row = kernel.row(i);
            if row.iter().any(|&v| v < 0.0) {
                return Err(Error::validation(format!(
                    "augmentation kernel row {i} has negative entries"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > KERNEL_ROW_TOL {
                return Err(Error::validation(format!(
                    "augmentation kernel row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(FtAugmentation { kernel })
    }

    /// No fine-tuning augmentations: the identity kernel.
    pub fn identity(n: usize) -> Self {
        FtAugmentation {
            kernel: Matrix::identity(n),
        }
    }

    /// Reuses a graph's generic augmentation kernel at fine-tuning time.
    pub fn from_graph(g: &AugmentationGraph) -> Self {
        FtAugmentation {
            kernel: g.a_pre().clone(),
        }
    }

    pub fn kernel(&self) -> &Matrix {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.rows()
    }
}

/// Ridge linear head `b` (r x k) over encoder features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProbe {
    b: Matrix,
    eta: f64,
}

impl LinearProbe {
    pub fn weights(&self) -> &Matrix {
        &self.b
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn num_classes(&self) -> u32 {
        self.b.rows() as u32
    }
}

/// Exact ridge regression of one-hot class targets on augmented source
/// features: `B = M_yphi (M_phiphi + eta I)^{-1}` with the moment
/// matrices averaged over uniform source inputs and the augmentation
/// kernel.
pub fn fit_linear_probe(
    e: &Encoder,
    g: &AugmentationGraph,
    aug: &FtAugmentation,
    eta: f64,
) -> Result<LinearProbe> {
    let n = g.node_count();
    if e.node_count() != n || aug.dim() != n {
        return Err(Error::validation(format!(
            "dimension mismatch: {n} nodes, encoder {}, augmentation {}",
            e.node_count(),
            aug.dim()
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::validation(format!(
            "ridge weight must be positive, got {eta}"
        )));
    }
    let sources = g.source_nodes();
    if sources.is_empty() {
        return Err(Error::validation("graph has no source nodes"));
    }
    let k = e.dim();
    let r = g.num_classes() as usize;
    let p_s = 1.0 / sources.len() as f64;

    let mut m_ff = Matrix::zeros(k, k);
    let mut m_yf = Matrix::zeros(r, k);
    for &x in &sources {
        let class_row = (g.class_of(x) - 1) as usize;
        for xp in 0..n {
            let w = p_s * aug.kernel().get(x, xp);
            if w == 0.0 {
                continue;
            }
            let phi = e.embed(xp);
            for a in 0..k {
                let wa = w * phi[a];
                for b in 0..k {
                    m_ff.set(a, b, m_ff.get(a, b) + wa * phi[b]);
                }
                m_yf.set(class_row, a, m_yf.get(class_row, a) + wa);
            }
        }
    }

    let mut reg = m_ff.clone();
    for i in 0..k {
        reg.set(i, i, reg.get(i, i) + eta);
    }
    // SPD by construction for eta > 0; a failure here is a genuine
    // numerical problem, not bad input.
    let chol = Cholesky::factor(&reg)
        .map_err(|e| Error::numerical(format!("regularized Gram factorization failed: {e}")))?;
    let mut b = Matrix::zeros(r, k);
    for row in 0..r {
        let solved = chol.solve(m_yf.row(row));
        for (col, v) in solved.iter().enumerate() {
            b.set(row, col, *v);
        }
    }
    Ok(LinearProbe { b, eta })
}

/// Argmax class prediction; ties break toward the smaller label index.
pub fn classify(p: &LinearProbe, e: &Encoder, x: usize) -> u32 {
    let scores = p.b.matvec(e.embed(x));
    let mut best = 0usize;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    (best + 1) as u32
}

/// Fraction of target nodes (uniform target distribution) misclassified
/// by `predict`.
pub fn target_error(predict: impl Fn(usize) -> u32, g: &AugmentationGraph) -> f64 {
    let targets = g.target_nodes();
    let wrong = targets
        .iter()
        .filter(|&&x| predict(x) != g.class_of(x))
        .count();
    wrong as f64 / targets.len() as f64
}

/// Convenience: target error of a fitted probe.
pub fn probe_target_error(p: &LinearProbe, e: &Encoder, g: &AugmentationGraph) -> f64 {
    target_error(|x| classify(p, e, x), g)
}

/// What the ERM objective pins down at a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "labels", rename_all = "lowercase")]
pub enum NodeStatus {
    /// Unique positive vote maximum; every minimizer predicts this label.
    Forced(u32),
    /// Several labels share the positive maximum vote.
    Tied(Vec<u32>),
    /// No augmented source input reaches the node; any label minimizes.
    Free,
}

/// The full minimizer set of tabular ERM, summarized per node, with the
/// best- and worst-case target error over completions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmMinimizerSet {
    pub statuses: Vec<NodeStatus>,
    pub min_target_error: f64,
    pub max_target_error: f64,
}

impl ErmMinimizerSet {
    /// Target-domain nodes with the given status kind.
    pub fn free_target_nodes(&self, g: &AugmentationGraph) -> Vec<usize> {
        g.target_nodes()
            .into_iter()
            .filter(|&x| matches!(self.statuses[x], NodeStatus::Free))
            .collect()
    }

    pub fn forced_correct_target_nodes(&self, g: &AugmentationGraph) -> Vec<usize> {
        g.target_nodes()
            .into_iter()
            .filter(|&x| matches!(self.statuses[x], NodeStatus::Forced(l) if l == g.class_of(x)))
            .collect()
    }
}

/// Characterizes every minimizer of the 0-1 ERM objective on augmented
/// source data. The objective separates across nodes, so each node's
/// optimal predictions are exactly the argmax set of
/// `vote(x', y) = sum_x P_S(x) A_ft(x'|x) 1[y_x = y]`.
pub fn erm_minimizers(g: &AugmentationGraph, aug: &FtAugmentation) -> Result<ErmMinimizerSet> {
    let n = g.node_count();
    if aug.dim() != n {
        return Err(Error::validation(format!(
            "augmentation kernel order {} does not match graph order {n}",
            aug.dim()
        )));
    }
    let sources = g.source_nodes();
    let r = g.num_classes() as usize;
    let p_s = 1.0 / sources.len() as f64;

    let mut statuses = Vec::with_capacity(n);
    let mut min_err = 0usize;
    let mut max_err = 0usize;
    for xp in 0..n {
        let mut votes = vec![0.0f64; r];
        for &x in &sources {
            votes[(g.class_of(x) - 1) as usize] += p_s * aug.kernel().get(x, xp);
        }
        let max_vote = votes.iter().fold(0.0f64, |m, &v| m.max(v));
        let status = if max_vote == 0.0 {
            NodeStatus::Free
        } else {
            let winners: Vec<u32> = votes
                .iter()
                .enumerate()
                .filter(|(_, &v)| v == max_vote)
                .map(|(i, _)| (i + 1) as u32)
                .collect();
            if winners.len() == 1 {
                NodeStatus::Forced(winners[0])
            } else {
                NodeStatus::Tied(winners)
            }
        };
        if g.domain_of(xp) == DomainLabel::Target {
            let truth = g.class_of(xp);
            match &status {
                NodeStatus::Forced(l) => {
                    if *l != truth {
                        min_err += 1;
                        max_err += 1;
                    }
                }
                NodeStatus::Tied(ls) => {
                    if !ls.contains(&truth) {
                        min_err += 1;
                    }
                    // A tie always admits a wrong completion.
                    max_err += 1;
                }
                NodeStatus::Free => {
                    max_err += 1;
                }
            }
        }
        statuses.push(status);
    }
    let t = g.target_nodes().len() as f64;
    Ok(ErmMinimizerSet {
        statuses,
        min_target_error: min_err as f64 / t,
        max_target_error: max_err as f64 / t,
    })
}
