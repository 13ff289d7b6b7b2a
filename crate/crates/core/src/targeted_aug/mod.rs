//! Generic targeted-augmentation framework plus two concrete instances.
//!
//! A targeted augmentation is a two-stage sampler built from three
//! pieces: a feature extractor `z(x)`, a shift model `p(z'|z)` fit to the
//! target feature distribution, and a conditional transformer
//! `T(x'|x, z')` that rewrites the input to carry the new feature. The
//! induced fine-tuning kernel is the composition
//! `A_ft(x'|x) = sum_{z'} T(x'|x, z') p(z'|z(x))`.
//!
//! Instances here: a deterministic source-to-target node map on the
//! 8-node graph ([`GraphTargetedAug`]) and a histopathology stain color
//! jitter over RGB images ([`stain_color_jitter`]); the light-curve
//! redshifting augmentation in [`crate::lightcurve`] implements the same
//! trait.

mod stain;

pub use stain::{stain_color_jitter, RgbImage, HED_OD_MATRIX};

use crate::augmentation_graph::{
    connect_later_classes, connect_later_domains, AugmentationGraph, DomainLabel,
};
use crate::heads::FtAugmentation;
use crate::numerics::{Matrix, Rng};
use crate::{Error, Result};

/// Two-stage augmentation sampler: feature extraction, feature shift,
/// conditional transform.
pub trait TargetedAugmentation {
    type Input;
    type Feature;

    fn extract_feature(&self, x: &Self::Input) -> Self::Feature;

    fn sample_feature(&self, z: &Self::Feature, rng: &mut Rng) -> Result<Self::Feature>;

    /// Transforms `x` to carry feature `z_new`. `Ok(None)` means the
    /// transformer rejected this attempt (the caller may retry with a
    /// fresh feature draw).
    fn transform(
        &self,
        x: &Self::Input,
        z_new: &Self::Feature,
        rng: &mut Rng,
    ) -> Result<Option<Self::Input>>;
}

/// Draws one augmentation: sample `z' ~ p(z'|z(x))`, then `x' ~ T(.|x, z')`,
/// retrying rejected transforms with fresh feature draws up to
/// `max_retries` attempts.
pub fn sample_augmentation<A: TargetedAugmentation>(
    aug: &A,
    x: &A::Input,
    rng: &mut Rng,
    max_retries: u32,
) -> Result<A::Input> {
    if max_retries == 0 {
        return Err(Error::validation("max_retries must be at least 1"));
    }
    let z = aug.extract_feature(x);
    for _ in 0..max_retries {
        let z_new = aug.sample_feature(&z, rng)?;
        if let Some(out) = aug.transform(x, &z_new, rng)? {
            return Ok(out);
        }
    }
    Err(Error::augmentation(format!(
        "transformer rejected every attempt within {max_retries} retries"
    )))
}

/// How the two source nodes of the 8-node graph map into the target
/// domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphAugMode {
    /// The as-published pairing {1,4}, {2,3}: each source node maps to
    /// the target node of the *opposite* class.
    Literal,
    /// Each source node maps to the lowest-index target node of its own
    /// class (1 -> 3, 2 -> 4 in conventional numbering).
    ClassConsistent,
}

/// Deterministic node-level targeted augmentation on the 8-node graph:
/// source nodes map to their designated target partner, everything else
/// maps to itself.
#[derive(Debug, Clone)]
pub struct GraphTargetedAug {
    partner: Vec<usize>,
    domains: Vec<DomainLabel>,
}

impl GraphTargetedAug {
    pub fn new(g: &AugmentationGraph, mode: GraphAugMode) -> Result<Self> {
        if g.node_count() != 8
            || g.classes() != connect_later_classes()
            || g.domains() != connect_later_domains()
        {
            return Err(Error::validation(
                "graph targeted augmentation is defined for the 8-node construction \
                 (source nodes 0 and 1, alternating classes)",
            ));
        }
        let mut partner: Vec<usize> = (0..8).collect();
        match mode {
            GraphAugMode::Literal => {
                partner[0] = 3;
                partner[1] = 2;
            }
            GraphAugMode::ClassConsistent => {
                for &x in &g.source_nodes() {
                    partner[x] = g
                        .target_nodes()
                        .into_iter()
                        .find(|&t| g.class_of(t) == g.class_of(x))
                        .expect("construction has targets of every class");
                }
            }
        }
        Ok(GraphTargetedAug {
            partner,
            domains: g.domains().to_vec(),
        })
    }

    /// The induced fine-tuning kernel (deterministic rows).
    pub fn kernel(&self) -> FtAugmentation {
        let n = self.partner.len();
        let mut m = Matrix::zeros(n, n);
        for (x, &xp) in self.partner.iter().enumerate() {
            m.set(x, xp, 1.0);
        }
        FtAugmentation::from_kernel(m).expect("deterministic rows are stochastic")
    }
}

impl TargetedAugmentation for GraphTargetedAug {
    type Input = usize;
    type Feature = DomainLabel;

    fn extract_feature(&self, x: &usize) -> DomainLabel {
        self.domains[*x]
    }

    fn sample_feature(&self, _z: &DomainLabel, _rng: &mut Rng) -> Result<DomainLabel> {
        // The shift model is a point mass on the target domain.
        Ok(DomainLabel::Target)
    }

    fn transform(&self, x: &usize, _z_new: &DomainLabel, _rng: &mut Rng) -> Result<Option<usize>> {
        Ok(Some(self.partner[*x]))
    }
}

/// Builds the fine-tuning kernel of the graph instance directly.
pub fn graph_targeted_aug(g: &AugmentationGraph, mode: GraphAugMode) -> Result<FtAugmentation> {
    Ok(GraphTargetedAug::new(g, mode)?.kernel())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augmentation_graph::{build_connect_later_graph, GraphParams};
    use crate::heads::{erm_minimizers, NodeStatus};

    /// Degenerate instance: feature is a constant, transformer is the
    /// identity.
    struct IdentityAug;

    impl TargetedAugmentation for IdentityAug {
        type Input = i64;
        type Feature = ();

        fn extract_feature(&self, _x: &i64) {}

        fn sample_feature(&self, _z: &(), _rng: &mut Rng) -> Result<()> {
            Ok(())
        }

        fn transform(&self, x: &i64, _z: &(), _rng: &mut Rng) -> Result<Option<i64>> {
            Ok(Some(*x))
        }
    }

    /// Transformer that rejects everything.
    struct AlwaysReject;

    impl TargetedAugmentation for AlwaysReject {
        type Input = i64;
        type Feature = ();

        fn extract_feature(&self, _x: &i64) {}

        fn sample_feature(&self, _z: &(), _rng: &mut Rng) -> Result<()> {
            Ok(())
        }

        fn transform(&self, _x: &i64, _z: &(), _rng: &mut Rng) -> Result<Option<i64>> {
            Ok(None)
        }
    }

    #[test]
    fn degenerate_instance_is_identity() {
        let mut rng = Rng::new(0);
        assert_eq!(sample_augmentation(&IdentityAug, &42, &mut rng, 5).unwrap(), 42);
    }

    #[test]
    fn rejection_exhausts_retries() {
        let mut rng = Rng::new(0);
        match sample_augmentation(&AlwaysReject, &42, &mut rng, 3) {
            Err(Error::Augmentation(msg)) => assert!(msg.contains('3'), "{msg}"),
            other => panic!("expected augmentation failure, got {other:?}"),
        }
    }

    fn graph(swapped: bool) -> AugmentationGraph {
        build_connect_later_graph(&GraphParams::defaults(swapped)).unwrap()
    }

    #[test]
    fn class_consistent_mapping() {
        let g = graph(true);
        let aug = graph_targeted_aug(&g, GraphAugMode::ClassConsistent).unwrap();
        // Source node 0 (class 1) maps to node 2; node 1 (class 2) to 3.
        assert_eq!(aug.kernel().get(0, 2), 1.0);
        assert_eq!(aug.kernel().get(1, 3), 1.0);
        for x in 2..8 {
            assert_eq!(aug.kernel().get(x, x), 1.0);
        }
    }

    #[test]
    fn literal_mapping() {
        let g = graph(true);
        let aug = graph_targeted_aug(&g, GraphAugMode::Literal).unwrap();
        assert_eq!(aug.kernel().get(0, 3), 1.0);
        assert_eq!(aug.kernel().get(1, 2), 1.0);
    }

    #[test]
    fn rows_are_distributions() {
        let g = graph(false);
        for mode in [GraphAugMode::Literal, GraphAugMode::ClassConsistent] {
            let aug = graph_targeted_aug(&g, mode).unwrap();
            for x in 0..8 {
                let sum: f64 = aug.kernel().row(x).iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn sampling_the_graph_instance() {
        let g = graph(true);
        let inst = GraphTargetedAug::new(&g, GraphAugMode::ClassConsistent).unwrap();
        let mut rng = Rng::new(9);
        // Source node 0 lands on its class partner, node 2 of the target.
        assert_eq!(sample_augmentation(&inst, &0, &mut rng, 4).unwrap(), 2);
        // Target nodes stay put.
        assert_eq!(sample_augmentation(&inst, &4, &mut rng, 4).unwrap(), 4);
    }

    #[test]
    fn rejects_other_graph_shapes() {
        let g = graph(true);
        let shrunk = AugmentationGraph::new(
            vec![1, 2],
            vec![DomainLabel::Source, DomainLabel::Target],
            Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap(),
            vec![0.5, 0.5],
        )
        .unwrap();
        assert!(GraphTargetedAug::new(&shrunk, GraphAugMode::Literal).is_err());
        assert!(GraphTargetedAug::new(&g, GraphAugMode::Literal).is_ok());
    }

    #[test]
    fn class_consistent_composition_forces_exactly_the_reachable_targets() {
        let g = graph(true);
        let aug = graph_targeted_aug(&g, GraphAugMode::ClassConsistent).unwrap();
        let set = erm_minimizers(&g, &aug).unwrap();
        let forced: Vec<usize> = (0..8)
            .filter(|&x| matches!(set.statuses[x], NodeStatus::Forced(_)))
            .collect();
        assert_eq!(forced, vec![2, 3]);
        assert_eq!(set.forced_correct_target_nodes(&g), vec![2, 3]);
    }
}
