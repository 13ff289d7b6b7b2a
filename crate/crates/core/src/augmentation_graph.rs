//! Finite input spaces with class/domain labels and a generic-augmentation
//! kernel, plus the derived positive-pair quantities that contrastive
//! pretraining operates on.
//!
//! The central object is an 8-node two-domain binary-classification graph
//! whose augmentation kernel takes one of two forms: an *aligned* kernel,
//! where cross-domain edges connect nodes of the same class at the strong
//! weight `alpha'`, and a *misaligned* ("swapped") kernel, where the strong
//! cross-domain edges out of the source nodes land on the *opposite* class.
//! Both kernels are degree-regular: every node carries one self-loop
//! (`rho'`), two `alpha'` edges, one `beta'` edge, and two `gamma'` edges,
//! so `rho' + 2 alpha' + beta' + 2 gamma' = 1` makes every row a
//! probability distribution.
//!
//! Nodes are indexed 0..8 here; the conventional presentation numbers them
//! 1..8. Odd-numbered inputs (indices 0, 2, 4, 6) carry class 1 and
//! even-numbered inputs carry class 2; indices 0 and 1 form the source
//! domain.

use serde::{Deserialize, Serialize};

use crate::numerics::Matrix;
use crate::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;
const PAIR_SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainLabel {
    Source,
    Target,
}

/// A finite input space: class and domain labels per node, a row-stochastic
/// generic-augmentation kernel `a_pre` (row x = A_pre(.|x)), and the
/// unlabeled sampling distribution `p_u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationGraph {
    n: usize,
    class_of: Vec<u32>,
    domain_of: Vec<DomainLabel>,
    a_pre: Matrix,
    p_u: Vec<f64>,
}

impl AugmentationGraph {
    pub fn new(
        class_of: Vec<u32>,
        domain_of: Vec<DomainLabel>,
        a_pre: Matrix,
        p_u: Vec<f64>,
    ) -> Result<Self> {
        let n = class_of.len();
        if n == 0 {
            return Err(Error::validation("graph must have at least one node"));
        }
        if domain_of.len() != n || a_pre.rows() != n || a_pre.cols() != n || p_u.len() != n {
            return Err(Error::validation(format!(
                "inconsistent sizes: {} classes, {} domains, {}x{} kernel, {} p_u entries",
                n,
                domain_of.len(),
                a_pre.rows(),
                a_pre.cols(),
                p_u.len()
            )));
        }
        a_pre.check_finite()?;
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let v = a_pre.get(i, j);
                if v < 0.0 {
                    return Err(Error::validation(format!(
                        "kernel entry ({i}, {j}) is negative: {v}"
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::validation(format!(
                    "kernel row {i} sums to {sum}, expected 1 within {ROW_SUM_TOL:e}"
                )));
            }
        }
        let pu_sum: f64 = p_u.iter().sum();
        if p_u.iter().any(|&p| p < 0.0) || (pu_sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::validation(format!(
                "p_u must be a probability vector, sums to {pu_sum}"
            )));
        }
        if !domain_of.contains(&DomainLabel::Source) || !domain_of.contains(&DomainLabel::Target) {
            return Err(Error::validation(
                "graph needs at least one source and one target node",
            ));
        }
        // Class labels must be exactly {1..r}.
        let r = *class_of.iter().max().unwrap();
        for c in 1..=r {
            if !class_of.contains(&c) {
                return Err(Error::validation(format!(
                    "class labels must cover 1..={r}, label {c} is missing"
                )));
            }
        }
        if class_of.contains(&0) {
            return Err(Error::validation("class labels are 1-based"));
        }
        Ok(AugmentationGraph {
            n,
            class_of,
            domain_of,
            a_pre,
            p_u,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn class_of(&self, x: usize) -> u32 {
        self.class_of[x]
    }

    pub fn classes(&self) -> &[u32] {
        &self.class_of
    }

    pub fn num_classes(&self) -> u32 {
        *self.class_of.iter().max().unwrap()
    }

    pub fn domain_of(&self, x: usize) -> DomainLabel {
        self.domain_of[x]
    }

    pub fn domains(&self) -> &[DomainLabel] {
        &self.domain_of
    }

    pub fn source_nodes(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.domain_of[i] == DomainLabel::Source)
            .collect()
    }

    pub fn target_nodes(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.domain_of[i] == DomainLabel::Target)
            .collect()
    }

    pub fn a_pre(&self) -> &Matrix {
        &self.a_pre
    }

    pub fn p_u(&self) -> &[f64] {
        &self.p_u
    }
}

/// Edge probabilities of the 8-node construction plus the alignment flag.
///
/// `swapped = false` builds the aligned kernel; `swapped = true` swaps the
/// strong and weak cross-domain edges incident to the two source nodes,
/// misaligning the domains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub swapped: bool,
}

impl GraphParams {
    /// The recorded default edge probabilities (0.4, 0.2, 0.1, 0.05);
    /// they satisfy every ordering constraint and the degree-regularity
    /// equation exactly.
    pub fn defaults(swapped: bool) -> Self {
        GraphParams {
            rho: 0.4,
            alpha: 0.2,
            beta: 0.1,
            gamma: 0.05,
            swapped,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let GraphParams {
            rho,
            alpha,
            beta,
            gamma,
            ..
        } = *self;
        for (name, v) in [
            ("rho", rho),
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
        ] {
            if !(v > 0.0 && v < 1.0) || !v.is_finite() {
                return Err(Error::validation(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if !(rho > alpha.max(beta)) {
            return Err(Error::validation(format!(
                "requires rho > max(alpha, beta): rho={rho}, alpha={alpha}, beta={beta}"
            )));
        }
        if !(alpha.min(beta) > gamma) {
            return Err(Error::validation(format!(
                "requires min(alpha, beta) > gamma: alpha={alpha}, beta={beta}, gamma={gamma}"
            )));
        }
        let total = rho + 2.0 * alpha + beta + 2.0 * gamma;
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::validation(format!(
                "degree regularity requires rho + 2 alpha + beta + 2 gamma = 1, got {total}"
            )));
        }
        Ok(())
    }
}

// Edge tables of the 8-node construction, 1-based as conventionally
// written. The swapped alpha list contains {2,3}: it is the image of the
// aligned {1,3} edge under the 1<->2 relabeling, and the only choice that
// keeps the kernel degree-regular (see `connect_later_kernel` for the
// uncorrected variant).
const ALPHA_SWAPPED: [(usize, usize); 8] = [
    (1, 4),
    (3, 5),
    (5, 7),
    (2, 3),
    (4, 6),
    (6, 8),
    (1, 8),
    (2, 7),
];
const GAMMA_SWAPPED: [(usize, usize); 8] = [
    (1, 3),
    (2, 4),
    (3, 6),
    (4, 5),
    (5, 8),
    (6, 7),
    (1, 7),
    (2, 8),
];
const ALPHA_ALIGNED: [(usize, usize); 8] = [
    (1, 3),
    (3, 5),
    (5, 7),
    (2, 4),
    (4, 6),
    (6, 8),
    (1, 7),
    (2, 8),
];
const GAMMA_ALIGNED: [(usize, usize); 8] = [
    (1, 4),
    (2, 3),
    (3, 6),
    (4, 5),
    (5, 8),
    (6, 7),
    (1, 8),
    (2, 7),
];
const BETA_EDGES: [(usize, usize); 4] = [(1, 2), (3, 4), (5, 6), (7, 8)];

/// Raw 8x8 kernel table for the construction.
///
/// With `literal_edge_2_5 = true` the swapped alpha list keeps its
/// as-published `{2,5}` entry in place of `{2,3}`. That variant is exposed
/// for inspection only: rows 3 and 5 then sum to 1 -/+ (alpha' - gamma'),
/// so it cannot form a valid [`AugmentationGraph`] under any parameters
/// with alpha' != gamma'.
pub fn connect_later_kernel(params: &GraphParams, literal_edge_2_5: bool) -> Matrix {
    let mut m = Matrix::zeros(8, 8);
    for i in 0..8 {
        m.set(i, i, params.rho);
    }
    let mut set_edges = |edges: &[(usize, usize)], w: f64| {
        for &(a, b) in edges {
            m.set(a - 1, b - 1, w);
            m.set(b - 1, a - 1, w);
        }
    };
    if params.swapped {
        let mut alpha_edges = ALPHA_SWAPPED.to_vec();
        if literal_edge_2_5 {
            for e in alpha_edges.iter_mut() {
                if *e == (2, 3) {
                    *e = (2, 5);
                }
            }
        }
        set_edges(&alpha_edges, params.alpha);
        set_edges(&BETA_EDGES, params.beta);
        set_edges(&GAMMA_SWAPPED, params.gamma);
    } else {
        set_edges(&ALPHA_ALIGNED, params.alpha);
        set_edges(&BETA_EDGES, params.beta);
        set_edges(&GAMMA_ALIGNED, params.gamma);
    }
    m
}

/// Builds the 8-node graph: source nodes {0, 1}, target nodes {2..7},
/// classes alternating 1, 2, 1, 2, ..., uniform `p_u`.
pub fn build_connect_later_graph(params: &GraphParams) -> Result<AugmentationGraph> {
    params.validate()?;
    let kernel = connect_later_kernel(params, false);
    AugmentationGraph::new(
        connect_later_classes().to_vec(),
        connect_later_domains().to_vec(),
        kernel,
        vec![1.0 / 8.0; 8],
    )
}

pub fn connect_later_classes() -> [u32; 8] {
    [1, 2, 1, 2, 1, 2, 1, 2]
}

pub fn connect_later_domains() -> [DomainLabel; 8] {
    let mut d = [DomainLabel::Target; 8];
    d[0] = DomainLabel::Source;
    d[1] = DomainLabel::Source;
    d
}

/// JSON-facing description of a graph in the construction family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphConfig {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domains: Option<Vec<DomainLabel>>,
    pub params: EdgeParams,
    #[serde(default)]
    pub swapped: bool,
    #[serde(default)]
    pub literal_edge_2_5: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EdgeParams {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

fn default_nodes() -> usize {
    8
}

impl GraphConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::validation(format!("graph config: {e}")))
    }

    pub fn graph_params(&self) -> GraphParams {
        GraphParams {
            rho: self.params.rho,
            alpha: self.params.alpha,
            beta: self.params.beta,
            gamma: self.params.gamma,
            swapped: self.swapped,
        }
    }

    /// Builds and validates the configured graph. Explicit `classes` /
    /// `domains` must match the construction; the literal `{2,5}` kernel
    /// fails row-stochasticity and is rejected here with the offending
    /// constraint named.
    pub fn build(&self) -> Result<AugmentationGraph> {
        if self.nodes != 8 {
            return Err(Error::validation(format!(
                "the construction has exactly 8 nodes, config says {}",
                self.nodes
            )));
        }
        if let Some(classes) = &self.classes {
            if classes.as_slice() != connect_later_classes() {
                return Err(Error::validation(
                    "config classes do not match the construction (1,2,1,2,1,2,1,2)",
                ));
            }
        }
        if let Some(domains) = &self.domains {
            if domains.as_slice() != connect_later_domains() {
                return Err(Error::validation(
                    "config domains do not match the construction (source, source, target x6)",
                ));
            }
        }
        let params = self.graph_params();
        params.validate()?;
        let kernel = connect_later_kernel(&params, self.literal_edge_2_5);
        AugmentationGraph::new(
            connect_later_classes().to_vec(),
            connect_later_domains().to_vec(),
            kernel,
            vec![1.0 / 8.0; 8],
        )
    }
}

/// Convex combination of two kernels over the same labeled node set.
pub fn interpolate_graphs(
    g0: &AugmentationGraph,
    g1: &AugmentationGraph,
    s: f64,
) -> Result<AugmentationGraph> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::validation(format!(
            "interpolation parameter must lie in [0, 1], got {s}"
        )));
    }
    if g0.class_of != g1.class_of || g0.domain_of != g1.domain_of || g0.p_u != g1.p_u {
        return Err(Error::validation(
            "interpolation requires identical node sets, labels, domains, and p_u",
        ));
    }
    // Exact at the endpoints; row-stochasticity is preserved by linearity
    // and re-checked by the constructor.
    let a = if s == 0.0 {
        g0.a_pre.clone()
    } else if s == 1.0 {
        g1.a_pre.clone()
    } else {
        g0.a_pre.lerp(&g1.a_pre, s)
    };
    AugmentationGraph::new(
        g0.class_of.clone(),
        g0.domain_of.clone(),
        a,
        g0.p_u.clone(),
    )
}

/// Symmetric distribution over positive pairs,
/// `s_plus[i][j] = sum_k p_u[k] a_pre[k][i] a_pre[k][j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivePairMatrix {
    s_plus: Matrix,
}

impl PositivePairMatrix {
    /// Validates symmetry, nonnegativity, and total mass 1.
    pub fn new(s_plus: Matrix) -> Result<Self> {
        s_plus.check_finite()?;
        if s_plus.rows() != s_plus.cols() {
            return Err(Error::validation("positive-pair matrix must be square"));
        }
        if s_plus.symmetry_residual() > ROW_SUM_TOL {
            return Err(Error::validation(format!(
                "positive-pair matrix asymmetry {:e} exceeds {ROW_SUM_TOL:e}",
                s_plus.symmetry_residual()
            )));
        }
        if s_plus.data().iter().any(|&v| v < 0.0) {
            return Err(Error::validation("positive-pair entries must be nonnegative"));
        }
        let total: f64 = s_plus.data().iter().sum();
        if (total - 1.0).abs() > PAIR_SUM_TOL {
            return Err(Error::validation(format!(
                "positive-pair mass is {total}, expected 1 within {PAIR_SUM_TOL:e}"
            )));
        }
        Ok(PositivePairMatrix { s_plus })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.s_plus
    }

    pub fn dim(&self) -> usize {
        self.s_plus.rows()
    }

    /// Node marginals `w_i = sum_j s_plus[i][j]`.
    pub fn marginals(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| self.s_plus.row(i).iter().sum())
            .collect()
    }
}

/// Probability that a positive pair lands on (i, j): average over the
/// anchor distribution of products of kernel rows.
pub fn positive_pair_matrix(g: &AugmentationGraph) -> PositivePairMatrix {
    let n = g.node_count();
    let mut s = Matrix::zeros(n, n);
    for k in 0..n {
        let pk = g.p_u[k];
        if pk == 0.0 {
            continue;
        }
        let row = g.a_pre.row(k);
        for i in 0..n {
            let ri = pk * row[i];
            if ri == 0.0 {
                continue;
            }
            for j in 0..n {
                let v = s.get(i, j) + ri * row[j];
                s.set(i, j, v);
            }
        }
    }
    PositivePairMatrix::new(s).expect("construction preserves positive-pair invariants")
}

/// Symmetrically normalized adjacency `A[i][j] = s_plus[i][j] / sqrt(w_i w_j)`.
pub fn normalized_adjacency(sp: &PositivePairMatrix) -> Result<Matrix> {
    let n = sp.dim();
    let w = sp.marginals();
    if let Some(i) = w.iter().position(|&wi| wi <= 0.0) {
        return Err(Error::validation(format!(
            "node {i} is isolated: zero positive-pair marginal"
        )));
    }
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            a.set(i, j, sp.matrix().get(i, j) / (w[i] * w[j]).sqrt());
        }
    }
    Ok(a)
}
