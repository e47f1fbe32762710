//! Progressive dichotomy decoder: colormap → entity masks without knowing the
//! entity count.
//!
//! Starting from the whole region of interest, every node is split in two by
//! 2-means on its pixel features, depth first, until the node's average squared
//! distance to its mean drops below `delta`. Leaves become entities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{build_features, Feature, FeatureMap, FeatureScaling, FeatureSpace};
use crate::kmeans::kmeans;
use crate::mask::{BinaryMask, Colormap, EntityMaskSet};
use crate::palette::{Cell, Palette};

/// Squared RGB distance to black under which a leaf counts as background:
/// half a quantization step per channel, `3 * 32^2`.
pub const BACKGROUND_THRESHOLD: f64 = 3.0 * 32.0 * 32.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    /// Drop near-black leaves (region / referring use).
    #[default]
    Region,
    /// Keep every cluster, background included.
    Entity,
}

impl std::str::FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "region" => Ok(Self::Region),
            "entity" => Ok(Self::Entity),
            other => Err(Error::InvalidParameter(format!("unknown decode mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    /// Stop threshold on the average squared feature distance to the node mean.
    pub delta: f64,
    pub max_depth: usize,
    pub kmeans_max_iters: usize,
    /// Leaves smaller than this are discarded when building entities.
    pub min_cluster_pixels: usize,
    pub mode: DecodeMode,
    pub features: FeatureSpace,
    pub scaling: FeatureScaling,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        Self {
            delta: 10.0,
            max_depth: 8,
            kmeans_max_iters: 30,
            min_cluster_pixels: 50,
            mode: DecodeMode::Region,
            features: FeatureSpace::RgbLab,
            scaling: FeatureScaling::Native,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta must be >= 0, got {}", self.delta)));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
        }
        Ok(())
    }

    /// Default `min_cluster_pixels` is 50 at 512×512; keep the same fraction of
    /// the canvas for other sizes.
    pub fn with_min_cluster_for(mut self, height: usize, width: usize) -> Self {
        self.min_cluster_pixels = ((50 * height * width) as f64 / (512.0 * 512.0)).round() as usize;
        self
    }
}

/// Why a node was not split further.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafReason {
    /// Average squared distance below `delta`.
    BelowThreshold,
    /// Fewer than two pixels.
    TooFewPixels,
    MaxDepth,
    DegenerateSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Canvas indices, ascending.
    pub pixels: Vec<u32>,
    /// Centroid in feature space.
    pub mean: [f64; 6],
    pub avg_sq_dist: f64,
    pub children: Option<[usize; 2]>,
    pub leaf_reason: Option<LeafReason>,
}

impl ClusterNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Binary split tree; node ids follow depth-first pre-order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTree {
    pub nodes: Vec<ClusterNode>,
}

/// Flat per-node view for debugging dumps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeSummary {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub pixel_count: usize,
    pub mean: [f64; 6],
    pub avg_distance: f64,
    pub leaf_reason: Option<LeafReason>,
}

impl ClusterTree {
    pub fn root(&self) -> &ClusterNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn summary(&self) -> Vec<NodeSummary> {
        self.nodes
            .iter()
            .map(|n| NodeSummary {
                id: n.id,
                parent: n.parent,
                depth: n.depth,
                pixel_count: n.pixels.len(),
                mean: n.mean,
                avg_distance: n.avg_sq_dist,
                leaf_reason: n.leaf_reason,
            })
            .collect()
    }
}

/// A final cluster with its mean color.
#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    /// Canvas indices, ascending.
    pub pixels: Vec<u32>,
    pub mean_rgb: [f64; 3],
    pub reason: LeafReason,
}

#[derive(Debug, Clone)]
pub struct Decoded {
    pub height: usize,
    pub width: usize,
    pub tree: ClusterTree,
    pub leaves: Vec<Leaf>,
}

/// Mean vector and average squared distance to it.
fn node_stats(feats: &[Feature], positions: &[u32]) -> ([f64; 6], f64) {
    let n = positions.len() as f64;
    let mut mean = [0.0f64; 6];
    for &p in positions {
        for (m, v) in mean.iter_mut().zip(feats[p as usize]) {
            *m += v as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut ss = 0.0f64;
    for &p in positions {
        let f = &feats[p as usize];
        for i in 0..6 {
            let d = f[i] as f64 - mean[i];
            ss += d * d;
        }
    }
    (mean, ss / n)
}

/// Two-cluster k-means on `node` (positions into `features`).
///
/// Seeds: the pixel farthest from the node mean, then the pixel farthest from
/// that one. Fails with [`Error::DegenerateSplit`] when either side would be
/// empty.
pub fn binary_split(
    features: &FeatureMap,
    node: &[u32],
    max_iters: usize,
) -> Result<(Vec<u32>, Vec<u32>)> {
    if node.len() < 2 {
        return Err(Error::DegenerateSplit);
    }
    let mut clusters = kmeans(features, node, 2, max_iters);
    if clusters.len() != 2 {
        return Err(Error::DegenerateSplit);
    }
    let right = clusters.pop().unwrap();
    let left = clusters.pop().unwrap();
    Ok((left, right))
}

struct Builder<'a> {
    features: &'a FeatureMap,
    cfg: &'a DecodeConfig,
    nodes: Vec<ClusterNode>,
}

impl Builder<'_> {
    fn grow(&mut self, positions: Vec<u32>, parent: Option<usize>, depth: usize) -> usize {
        let (mean, avg) = node_stats(self.features.vectors(), &positions);
        let id = self.nodes.len();
        let roi = self.features.roi();
        self.nodes.push(ClusterNode {
            id,
            parent,
            depth,
            pixels: positions.iter().map(|&p| roi[p as usize]).collect(),
            mean,
            avg_sq_dist: avg,
            children: None,
            leaf_reason: None,
        });

        let reason = if avg < self.cfg.delta {
            Some(LeafReason::BelowThreshold)
        } else if positions.len() < 2 {
            Some(LeafReason::TooFewPixels)
        } else if depth >= self.cfg.max_depth {
            Some(LeafReason::MaxDepth)
        } else {
            match binary_split(self.features, &positions, self.cfg.kmeans_max_iters) {
                Ok((left, right)) => {
                    drop(positions);
                    let l = self.grow(left, Some(id), depth + 1);
                    let r = self.grow(right, Some(id), depth + 1);
                    self.nodes[id].children = Some([l, r]);
                    None
                }
                Err(_) => Some(LeafReason::DegenerateSplit),
            }
        };
        self.nodes[id].leaf_reason = reason;
        id
    }
}

/// Decodes `colormap` restricted to `roi` (whole canvas when `None`).
pub fn pdm_decode(colormap: &Colormap, roi: Option<&BinaryMask>, cfg: &DecodeConfig) -> Result<Decoded> {
    cfg.validate()?;
    let features = build_features(colormap, roi, cfg.features, cfg.scaling)?;
    let mut builder = Builder {
        features: &features,
        cfg,
        nodes: Vec::new(),
    };
    builder.grow((0..features.len() as u32).collect(), None, 0);
    let tree = ClusterTree {
        nodes: builder.nodes,
    };
    let leaves = tree
        .leaves()
        .map(|n| Leaf {
            mean_rgb: mean_rgb(colormap, &n.pixels),
            pixels: n.pixels.clone(),
            reason: n.leaf_reason.expect("leaf has a reason"),
        })
        .collect();
    Ok(Decoded {
        height: colormap.height(),
        width: colormap.width(),
        tree,
        leaves,
    })
}

pub(crate) fn mean_rgb(colormap: &Colormap, pixels: &[u32]) -> [f64; 3] {
    let px = colormap.pixels();
    let mut acc = [0.0f64; 3];
    for &i in pixels {
        for (a, v) in acc.iter_mut().zip(px[i as usize]) {
            *a += v as f64;
        }
    }
    let n = pixels.len().max(1) as f64;
    acc.map(|a| a / n)
}

fn is_background(mean_rgb: &[f64; 3]) -> bool {
    mean_rgb.iter().map(|v| v * v).sum::<f64>() < BACKGROUND_THRESHOLD
}

/// Turns leaves into entities.
///
/// Leaves under `min_cluster_pixels` are dropped; `region` mode also drops
/// background leaves. Remaining leaves are ordered by descending size. With a
/// palette, each entity is labelled with the cell its color snaps to.
pub fn leaves_to_entities(
    leaves: &[Leaf],
    height: usize,
    width: usize,
    cfg: &DecodeConfig,
    palette: Option<&Palette>,
) -> EntityMaskSet {
    let mut kept: Vec<&Leaf> = leaves
        .iter()
        .filter(|l| !l.pixels.is_empty() && l.pixels.len() >= cfg.min_cluster_pixels)
        .filter(|l| cfg.mode == DecodeMode::Entity || !is_background(&l.mean_rgb))
        .collect();
    kept.sort_by(|a, b| {
        b.pixels
            .len()
            .cmp(&a.pixels.len())
            .then(a.pixels[0].cmp(&b.pixels[0]))
    });
    let masks = kept
        .iter()
        .map(|l| BinaryMask::from_indices(height, width, &l.pixels))
        .collect();
    let set = EntityMaskSet::new(height, width, masks).expect("leaves partition the ROI");
    match palette {
        Some(p) => {
            let labels = kept
                .iter()
                .map(|l| match snap_to_palette(l.mean_rgb, p) {
                    Snap::Background => "background".to_string(),
                    Snap::Cell(c) => format!("cell({},{})", c.row, c.col),
                })
                .collect();
            set.with_labels(labels).expect("one label per entity")
        }
        None => set,
    }
}

/// Result of snapping a mean color onto the palette.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Snap {
    Background,
    Cell(Cell),
}

/// Nearest palette color (or black) by squared RGB distance; black wins ties,
/// then row-major cell order.
pub fn snap_to_palette(mean_rgb: [f64; 3], palette: &Palette) -> Snap {
    let d2 = |c: [u8; 3]| -> f64 {
        (0..3)
            .map(|i| {
                let d = mean_rgb[i] - c[i] as f64;
                d * d
            })
            .sum()
    };
    let mut best = Snap::Background;
    let mut best_d = d2([0, 0, 0]);
    for (i, &c) in palette.colors().iter().enumerate() {
        let d = d2(c);
        if d < best_d {
            best_d = d;
            best = Snap::Cell(palette.cell_of_index(i));
        }
    }
    best
}

/// Full decode: tree, leaves, entities.
pub fn decode(
    colormap: &Colormap,
    roi: Option<&BinaryMask>,
    cfg: &DecodeConfig,
    palette: Option<&Palette>,
) -> Result<EntityMaskSet> {
    let decoded = pdm_decode(colormap, roi, cfg)?;
    Ok(leaves_to_entities(
        &decoded.leaves,
        decoded.height,
        decoded.width,
        cfg,
        palette,
    ))
}

/// Baseline: plain k-means with a fixed cluster count, same features, seeding
/// and entity extraction as the dichotomy decoder.
pub fn kmeans_decode(
    colormap: &Colormap,
    roi: Option<&BinaryMask>,
    cfg: &DecodeConfig,
    k: usize,
) -> Result<EntityMaskSet> {
    cfg.validate()?;
    let features = build_features(colormap, roi, cfg.features, cfg.scaling)?;
    let all: Vec<u32> = (0..features.len() as u32).collect();
    let roi_idx = features.roi();
    let leaves: Vec<Leaf> = kmeans(&features, &all, k, cfg.kmeans_max_iters)
        .into_iter()
        .map(|c| {
            let pixels: Vec<u32> = c.iter().map(|&p| roi_idx[p as usize]).collect();
            Leaf {
                mean_rgb: mean_rgb(colormap, &pixels),
                pixels,
                reason: LeafReason::BelowThreshold,
            }
        })
        .collect();
    Ok(leaves_to_entities(
        &leaves,
        colormap.height(),
        colormap.width(),
        cfg,
        None,
    ))
}
