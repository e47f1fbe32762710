//! Encode → degrade → decode → score pipeline used by sweeps and benchmarks.

use serde::{Deserialize, Serialize};

use crate::degrade::{degrade, DegradationProfile};
use crate::error::Result;
use crate::features::FeatureScaling;
use crate::mask::{Colormap, EntityMaskSet};
use crate::metrics::{miou_recall, MaskMetrics};
use crate::palette::{encode, CollisionPolicy, Palette};
use crate::pdm::{decode, kmeans_decode, DecodeConfig};

/// Decoder settings for the degradation suite: defaults with `reduced`
/// feature scaling (native scaling splits the suite's per-pixel noise into
/// fragments at every tested `delta`) and `min_cluster_pixels` scaled to the
/// canvas.
pub fn suite_config(height: usize, width: usize) -> DecodeConfig {
    DecodeConfig {
        scaling: FeatureScaling::Reduced,
        ..DecodeConfig::default()
    }
    .with_min_cluster_for(height, width)
}

/// How a degraded colormap is turned back into entities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Progressive dichotomy decoding.
    Pdm,
    /// k-means with a fixed cluster count.
    KMeans(usize),
    /// k-means told the true cluster count: entities plus background.
    KMeansGt,
}

/// Mean scores over a batch of scenes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub miou: f64,
    pub recall: f64,
    pub scenes: usize,
}

impl Summary {
    pub fn from_metrics<'a>(metrics: impl IntoIterator<Item = &'a MaskMetrics>) -> Self {
        let mut s = Summary::default();
        for m in metrics {
            s.miou += m.miou;
            s.recall += m.recall;
            s.scenes += 1;
        }
        if s.scenes > 0 {
            s.miou /= s.scenes as f64;
            s.recall /= s.scenes as f64;
        }
        s
    }
}

/// Decodes `colormap` with `method` and scores it against `gt`.
pub fn decode_and_score(
    colormap: &Colormap,
    gt: &EntityMaskSet,
    cfg: &DecodeConfig,
    method: Method,
    recall_threshold: f64,
) -> Result<MaskMetrics> {
    let pred = match method {
        Method::Pdm => decode(colormap, None, cfg, None)?,
        Method::KMeans(k) => kmeans_decode(colormap, None, cfg, k)?,
        Method::KMeansGt => {
            let background = usize::from(gt.foreground_count() < gt.height() * gt.width());
            kmeans_decode(colormap, None, cfg, gt.len() + background)?
        }
    };
    miou_recall(gt, &pred, recall_threshold)
}

/// One scene through the full pipeline with the location-aware palette.
pub fn run_scene(
    gt: &EntityMaskSet,
    palette: &Palette,
    profile: &DegradationProfile,
    cfg: &DecodeConfig,
    method: Method,
    recall_threshold: f64,
) -> Result<MaskMetrics> {
    let (clean, _) = encode(gt, palette, CollisionPolicy::Share)?;
    let noisy = degrade(&clean, profile)?;
    decode_and_score(&noisy, gt, cfg, method, recall_threshold)
}
