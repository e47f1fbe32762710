//! Full-factorial degradation sweep: scenes × profiles × deltas × feature spaces.

use std::fmt::Write as _;

use rayon::prelude::*;
use segcodec_core::{
    build_palette, decode, degrade, encode, miou_recall, CollisionPolicy, DecodeConfig,
    DegradationProfile, EntityMaskSet, FeatureScaling, FeatureSpace,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub suite: String,
    pub profiles: Vec<DegradationProfile>,
    pub deltas: Vec<f64>,
    pub features: Vec<FeatureSpace>,
    pub scaling: FeatureScaling,
    pub grid_size: usize,
    pub max_depth: usize,
    pub recall_threshold: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRow {
    pub scene: String,
    pub profile: String,
    pub delta: f64,
    pub feature_space: FeatureSpace,
    pub miou: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRow {
    pub profile: String,
    pub delta: f64,
    pub feature_space: FeatureSpace,
    pub miou: f64,
    pub recall: f64,
    pub scenes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFailure {
    pub scene: String,
    pub error: String,
    pub exit_code: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub suite: String,
    pub scaling: FeatureScaling,
    pub seed: u64,
    pub recall_threshold: f64,
    pub rows: Vec<SceneRow>,
    pub summary: Vec<ConfigRow>,
    pub failures: Vec<SceneFailure>,
}

/// Degradation seed for one (scene, profile) pair. Derived from names, so
/// adding scenes or profiles leaves the other pairs' noise unchanged.
pub fn degrade_seed(seed: u64, scene: &str, profile: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(b"degrade\0");
    h.update(scene.as_bytes());
    h.update(b"\0");
    h.update(profile.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

fn run_pair(
    name: &str,
    gt: &EntityMaskSet,
    profile: &DegradationProfile,
    plan: &SweepPlan,
) -> CliResult<Vec<SceneRow>> {
    let palette = build_palette(plan.grid_size)?;
    let (clean, _) = encode(gt, &palette, CollisionPolicy::Share)?;
    let profile = profile.clone().with_seed(degrade_seed(plan.seed, name, &profile.name));
    let noisy = degrade(&clean, &profile)?;
    let (h, w) = gt.dims();
    let mut rows = Vec::with_capacity(plan.deltas.len() * plan.features.len());
    for &delta in &plan.deltas {
        for &features in &plan.features {
            let cfg = DecodeConfig {
                delta,
                features,
                scaling: plan.scaling,
                max_depth: plan.max_depth,
                ..DecodeConfig::default()
            }
            .with_min_cluster_for(h, w);
            let pred = decode(&noisy, None, &cfg, None)?;
            let m = miou_recall(gt, &pred, plan.recall_threshold)?;
            rows.push(SceneRow {
                scene: name.to_string(),
                profile: profile.name.clone(),
                delta,
                feature_space: features,
                miou: m.miou,
                recall: m.recall,
            });
        }
    }
    Ok(rows)
}

/// Runs every loaded scene through the plan. Scenes that failed to load, or
/// fail in any configuration, are listed in `failures` and contribute no rows.
pub fn run_sweep(scenes: &[(String, CliResult<EntityMaskSet>)], plan: &SweepPlan) -> SweepReport {
    let per_scene: Vec<Result<Vec<SceneRow>, CliError>> = scenes
        .par_iter()
        .map(|(name, loaded)| {
            let gt = loaded.as_ref().map_err(Clone::clone)?;
            let per_profile: Vec<CliResult<Vec<SceneRow>>> = plan
                .profiles
                .par_iter()
                .map(|p| run_pair(name, gt, p, plan).map_err(|e| e.context(&p.name)))
                .collect();
            let mut rows = Vec::new();
            for r in per_profile {
                rows.extend(r?);
            }
            Ok(rows)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for ((name, _), result) in scenes.iter().zip(per_scene) {
        match result {
            Ok(r) => rows.extend(r),
            Err(e) => failures.push(SceneFailure {
                scene: name.clone(),
                error: e.message().to_string(),
                exit_code: e.exit_code(),
            }),
        }
    }
    let summary = summarize(&rows, plan);
    SweepReport {
        suite: plan.suite.clone(),
        scaling: plan.scaling,
        seed: plan.seed,
        recall_threshold: plan.recall_threshold,
        rows,
        summary,
        failures,
    }
}

/// Mean over scenes per (profile, delta, feature space), in plan order.
pub fn summarize(rows: &[SceneRow], plan: &SweepPlan) -> Vec<ConfigRow> {
    let mut out = Vec::new();
    for p in &plan.profiles {
        for &delta in &plan.deltas {
            for &fs in &plan.features {
                let hits: Vec<&SceneRow> = rows
                    .iter()
                    .filter(|r| r.profile == p.name && r.delta == delta && r.feature_space == fs)
                    .collect();
                if hits.is_empty() {
                    continue;
                }
                let n = hits.len() as f64;
                out.push(ConfigRow {
                    profile: p.name.clone(),
                    delta,
                    feature_space: fs,
                    miou: hits.iter().map(|r| r.miou).sum::<f64>() / n,
                    recall: hits.iter().map(|r| r.recall).sum::<f64>() / n,
                    scenes: hits.len(),
                });
            }
        }
    }
    out
}

/// One line per (profile, feature space); one mIoU / recall column pair per delta.
pub fn render_table(report: &SweepReport, plan: &SweepPlan) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:<10} {:<8}", "profile", "features");
    for d in &plan.deltas {
        let _ = write!(s, " | {:>15}", format!("delta={d}"));
    }
    s.push('\n');
    let _ = write!(s, "{:<10} {:<8}", "", "");
    for _ in &plan.deltas {
        let _ = write!(s, " | {:>7} {:>7}", "mIoU", "recall");
    }
    s.push('\n');
    for p in &plan.profiles {
        for &fs in &plan.features {
            let _ = write!(s, "{:<10} {:<8}", p.name, fs.name());
            for &d in &plan.deltas {
                let cell = report
                    .summary
                    .iter()
                    .find(|r| r.profile == p.name && r.delta == d && r.feature_space == fs);
                match cell {
                    Some(r) => {
                        let _ = write!(s, " | {:>7.4} {:>7.4}", r.miou, r.recall);
                    }
                    None => {
                        let _ = write!(s, " | {:>7} {:>7}", "-", "-");
                    }
                }
            }
            s.push('\n');
        }
    }
    s
}
