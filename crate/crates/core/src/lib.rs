//! Colormap codec for entity-level segmentation masks.
//!
//! Entity masks are painted into a single RGB colormap with a location-aware
//! palette ([`palette`]); a possibly noisy colormap is turned back into entity
//! masks by recursive two-cluster splitting ([`pdm`]). [`degrade`] simulates
//! generator artifacts, [`coarse`] samples region-of-interest masks, and
//! [`metrics`] scores decoded masks against ground truth.

#[cfg(feature = "ablation")]
pub mod ablation;
pub mod coarse;
pub mod color;
pub mod degrade;
mod error;
pub mod experiment;
pub mod features;
pub mod hungarian;
pub mod kmeans;
pub mod mask;
pub mod metrics;
pub mod palette;
pub mod pdm;
pub mod synth;

pub use coarse::{
    apply_coarse_mask, extend_bbox, sample_coarse_mask, Branch, CoarseMask, CoarseMaskParams,
    CoarseSample, CoarseSource,
};
pub use color::{srgb_to_lab, Lab};
pub use degrade::{degrade, standard_suite, suite_profile, DegradationProfile, SUITE_VERSION};
pub use experiment::{decode_and_score, run_scene, suite_config, Method, Summary};
pub use error::{Error, Result};
pub use features::{build_features, FeatureMap, FeatureScaling, FeatureSpace};
pub use mask::{idmap_to_masks, masks_to_idmap, BBox, BinaryMask, Colormap, EntityMaskSet, IdMap, Rgb};
pub use metrics::{
    iou, iou_matrix, match_entities, miou_recall, MaskMetrics, MatchPair, MatchResult,
    DEFAULT_RECALL_THRESHOLD,
};
pub use palette::{
    build_palette, center_of_mass, encode, locate_cell, Cell, CollisionPolicy, EncodeReport, Palette,
};
pub use pdm::{
    binary_split, decode, leaves_to_entities, pdm_decode, snap_to_palette, ClusterTree, DecodeConfig,
    DecodeMode, Decoded, LeafReason, Snap,
};
pub use synth::{generate_scene, generate_scenes, SceneSpec, Shape, ShapeKind};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
