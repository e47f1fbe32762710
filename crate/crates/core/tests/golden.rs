//! Frozen fixtures and oracle comparisons.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use segcodec_core::coarse::curve_vertices;
use segcodec_core::{
    build_palette, decode, degrade, encode, generate_scene, iou_matrix, miou_recall, pdm_decode,
    suite_profile, BBox, BinaryMask, CollisionPolicy, Colormap, DecodeConfig, DecodeMode,
    EntityMaskSet, FeatureScaling, LeafReason, SceneSpec,
};
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Deserialize)]
struct CurveCase {
    bbox: [usize; 4],
    extended: [usize; 4],
    vertices: Vec<(f64, f64)>,
}

#[test]
fn curve_vertices_match_reference_bezier() {
    let cases: Vec<CurveCase> =
        serde_json::from_str(include_str!("fixtures/curve_vertices.json")).unwrap();
    assert!(cases.len() > 40);
    for case in cases {
        let [x0, y0, x1, y1] = case.bbox;
        let [ex0, ey0, ex1, ey1] = case.extended;
        let got = curve_vertices(BBox::new(x0, y0, x1, y1), BBox::new(ex0, ey0, ex1, ey1), 18);
        assert_eq!(got.len(), case.vertices.len(), "bbox {:?}", case.bbox);
        for (g, w) in got.iter().zip(&case.vertices) {
            assert_eq!(g.0.to_bits(), w.0.to_bits(), "bbox {:?}", case.bbox);
            assert_eq!(g.1.to_bits(), w.1.to_bits(), "bbox {:?}", case.bbox);
        }
    }
}

fn small_scene() -> EntityMaskSet {
    let spec = SceneSpec {
        height: 96,
        width: 96,
        min_entities: 5,
        max_entities: 5,
        min_entity_pixels: 20,
        ..SceneSpec::default()
    };
    generate_scene(&spec, 3).unwrap()
}

#[test]
fn medium_degradation_checksum() {
    let palette = build_palette(11).unwrap();
    let (clean, _) = encode(&small_scene(), &palette, CollisionPolicy::Share).unwrap();
    let noisy = degrade(&clean, &suite_profile("medium").unwrap().with_seed(2024)).unwrap();
    let digest = hex::encode(Sha256::digest(noisy.to_bytes()));
    assert_eq!(digest, "d61375efe40d497e8542e74b29416acf2575a6aa14fbbf7676d4968d6fbd3889");
}

/// Best total IoU by enumerating every injective assignment.
fn brute_force(matrix: &[Vec<f64>], m: usize) -> f64 {
    fn go(matrix: &[Vec<f64>], row: usize, used: &mut [bool]) -> f64 {
        if row == matrix.len() {
            return 0.0;
        }
        // Leaving a row unmatched is allowed when it has fewer columns.
        let mut best = go(matrix, row + 1, used);
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                best = best.max(matrix[row][c] + go(matrix, row + 1, used));
                used[c] = false;
            }
        }
        best
    }
    go(matrix, 0, &mut vec![false; m])
}

#[test]
fn five_entity_medium_scene_matches_brute_force() {
    let gt = small_scene();
    assert_eq!(gt.len(), 5);
    let palette = build_palette(11).unwrap();
    let (clean, _) = encode(&gt, &palette, CollisionPolicy::Share).unwrap();
    let noisy = degrade(&clean, &suite_profile("medium").unwrap().with_seed(5)).unwrap();
    let pred = decode(&noisy, None, &DecodeConfig::default(), None).unwrap();
    assert!(pred.len() <= 64);

    let metrics = miou_recall(&gt, &pred, 0.5).unwrap();
    let matrix = iou_matrix(&gt, &pred).unwrap();
    let best = if pred.len() <= 8 {
        brute_force(&matrix, pred.len())
    } else {
        // Keep the enumeration small: only the five best columns per row can
        // take part in an optimal assignment of five rows.
        let mut keep: Vec<usize> = Vec::new();
        for row in &matrix {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]));
            keep.extend(idx.into_iter().take(5));
        }
        keep.sort_unstable();
        keep.dedup();
        let reduced: Vec<Vec<f64>> = matrix
            .iter()
            .map(|row| keep.iter().map(|&c| row[c]).collect())
            .collect();
        brute_force(&reduced, keep.len())
    };
    assert!((metrics.matching.total_iou() - best).abs() < 1e-12);
    assert!((metrics.miou - best / 5.0).abs() < 1e-12);
    let hits = metrics.per_entity.iter().filter(|&&v| v >= 0.5).count();
    assert_eq!(metrics.recall, hits as f64 / 5.0);
}

#[test]
fn two_color_noise_sigma_two_gives_two_pure_leaves() {
    let (h, w) = (40, 40);
    let noise = Normal::new(0.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    // Saturated colors: their LAB coordinates move little under σ = 2, so the
    // per-pixel spread stays below 10. Mid-tones like (64, 64, 64) average ~18.
    let colors = [[255u8, 0, 0], [0, 0, 255]];
    let truth: Vec<usize> = (0..h * w).map(|i| usize::from(i % w >= w / 2)).collect();
    let pixels = truth
        .iter()
        .map(|&t| colors[t].map(|c| (c as f64 + noise.sample(&mut rng)).round().clamp(0.0, 255.0) as u8))
        .collect();
    let cm = Colormap::from_pixels(h, w, pixels).unwrap();
    let cfg = DecodeConfig {
        scaling: FeatureScaling::Native,
        min_cluster_pixels: 0,
        ..DecodeConfig::default()
    };
    let decoded = pdm_decode(&cm, None, &cfg).unwrap();
    assert_eq!(decoded.leaves.len(), 2);
    for leaf in &decoded.leaves {
        let ones = leaf.pixels.iter().filter(|&&p| truth[p as usize] == 1).count();
        let purity = ones.max(leaf.pixels.len() - ones) as f64 / leaf.pixels.len() as f64;
        assert!(purity >= 0.99, "purity {purity}");
    }
}

#[test]
fn zero_delta_on_noise_splits_to_max_depth() {
    let noise = Normal::new(0.0, 20.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pixels = (0..64 * 64)
        .map(|_| [0; 3].map(|_: u8| (128.0f64 + noise.sample(&mut rng)).round().clamp(0.0, 255.0) as u8))
        .collect();
    let cm = Colormap::from_pixels(64, 64, pixels).unwrap();
    let cfg = DecodeConfig {
        delta: 0.0,
        max_depth: 5,
        ..DecodeConfig::default()
    };
    let decoded = pdm_decode(&cm, None, &cfg).unwrap();
    assert_eq!(decoded.leaves.len(), 32);
    assert!(decoded.leaves.iter().all(|l| l.reason == LeafReason::MaxDepth));
}

#[test]
fn entity_mode_keeps_background() {
    let mut a = BinaryMask::new(20, 20);
    for r in 2..8 {
        for c in 2..8 {
            a.set(r, c, true);
        }
    }
    let gt = EntityMaskSet::new(20, 20, vec![a]).unwrap();
    let palette = build_palette(11).unwrap();
    let (cm, _) = encode(&gt, &palette, CollisionPolicy::Share).unwrap();
    let cfg = DecodeConfig {
        min_cluster_pixels: 0,
        ..DecodeConfig::default()
    };
    assert_eq!(decode(&cm, None, &cfg, None).unwrap().len(), 1);
    let entity = DecodeConfig {
        mode: DecodeMode::Entity,
        ..cfg
    };
    let all = decode(&cm, None, &entity, None).unwrap();
    assert_eq!(all.len(), 2);
    assert_eq!(all.masks()[0].count(), 400 - 36);
}
