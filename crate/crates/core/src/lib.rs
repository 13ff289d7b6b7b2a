//! A numerical laboratory for domain adaptation with contrastive
//! pretraining and targeted augmentations.
//!
//! The library works at "desk scale": input spaces are finite graphs,
//! encoders are feature tables, and every optimization problem is small
//! enough to solve exactly or to cross-check against brute force. The
//! pieces fit together like this:
//!
//! - [`augmentation_graph`] builds finite input spaces whose edge weights
//!   are augmentation probabilities, and derives the positive-pair
//!   distribution that contrastive pretraining sees.
//! - [`spectral`] minimizes the spectral contrastive objective over such
//!   graphs, both in closed form (eigendecomposition of the normalized
//!   positive-pair adjacency) and by gradient descent.
//! - [`heads`] trains ridge linear probes on frozen encoders, evaluates
//!   0-1 target error, and characterizes the full minimizer set of
//!   tabular ERM under an arbitrary fine-tuning augmentation kernel.
//! - [`connectivity`] measures how strongly class/domain groups are
//!   connected by positive pairs, checks the transfer condition
//!   (alpha > gamma and beta > gamma), and estimates connectivity from
//!   samples with a from-scratch logistic classifier.
//! - [`targeted_aug`] is the generic two-stage targeted-augmentation
//!   framework (feature shift + conditional transform) with a graph
//!   instance and a histopathology stain color jitter.
//! - [`lightcurve`] holds the full redshifting augmentation for
//!   multiband astronomical time series: Gaussian-process modeling,
//!   grid rescaling, season dropout, cosmological dimming, and the
//!   signal-to-noise acceptance rule.
//! - [`numerics`] is the shared dense linear algebra and deterministic
//!   RNG underneath everything.

pub mod augmentation_graph;
pub mod connectivity;
mod error;
pub mod heads;
pub mod lightcurve;
pub mod numerics;
pub mod spectral;
pub mod targeted_aug;

pub use error::{Error, Result};
