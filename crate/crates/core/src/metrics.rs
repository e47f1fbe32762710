//! Mask quality: IoU, optimal entity matching, mIoU and recall.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hungarian::solve_max;
use crate::mask::{BinaryMask, EntityMaskSet};

pub const DEFAULT_RECALL_THRESHOLD: f64 = 0.5;

/// `|a ∩ b| / |a ∪ b|`, 1.0 when both are empty.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch {
            expected: a.dims(),
            actual: b.dims(),
        });
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// IoU of every (gt, pred) pair, computed in one pass over the canvas.
pub fn iou_matrix(gt: &EntityMaskSet, pred: &EntityMaskSet) -> Result<Vec<Vec<f64>>> {
    if gt.dims() != pred.dims() {
        return Err(Error::DimensionMismatch {
            expected: gt.dims(),
            actual: pred.dims(),
        });
    }
    let (n, m) = (gt.len(), pred.len());
    let gt_ids = gt.to_idmap();
    let pred_ids = pred.to_idmap();
    let mut inter = vec![vec![0usize; m]; n];
    for (&g, &p) in gt_ids.ids().iter().zip(pred_ids.ids()) {
        if g != 0 && p != 0 {
            inter[g as usize - 1][p as usize - 1] += 1;
        }
    }
    let gt_area: Vec<usize> = gt.masks().iter().map(BinaryMask::count).collect();
    let pred_area: Vec<usize> = pred.masks().iter().map(BinaryMask::count).collect();
    Ok((0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let union = gt_area[i] + pred_area[j] - inter[i][j];
                    if union == 0 {
                        1.0
                    } else {
                        inter[i][j] as f64 / union as f64
                    }
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub gt: usize,
    pub pred: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Sorted by gt index.
    pub pairs: Vec<MatchPair>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

impl MatchResult {
    pub fn total_iou(&self) -> f64 {
        self.pairs.iter().map(|p| p.iou).sum()
    }
}

/// One-to-one matching maximizing total IoU; zero-IoU pairs are discarded.
pub fn match_entities(gt: &EntityMaskSet, pred: &EntityMaskSet) -> Result<MatchResult> {
    let matrix = iou_matrix(gt, pred)?;
    Ok(match_from_matrix(&matrix, gt.len(), pred.len()))
}

pub fn match_from_matrix(matrix: &[Vec<f64>], n_gt: usize, n_pred: usize) -> MatchResult {
    let mut pairs: Vec<MatchPair> = if n_gt == 0 || n_pred == 0 {
        Vec::new()
    } else {
        solve_max(matrix)
            .into_iter()
            .filter(|&(g, p)| matrix[g][p] > 0.0)
            .map(|(g, p)| MatchPair {
                gt: g,
                pred: p,
                iou: matrix[g][p],
            })
            .collect()
    };
    pairs.sort_by_key(|p| p.gt);
    let unmatched_gt = (0..n_gt).filter(|g| !pairs.iter().any(|p| p.gt == *g)).collect();
    let unmatched_pred = (0..n_pred).filter(|q| !pairs.iter().any(|p| p.pred == *q)).collect();
    MatchResult {
        pairs,
        unmatched_gt,
        unmatched_pred,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskMetrics {
    pub miou: f64,
    pub recall: f64,
    /// Matched IoU per ground-truth entity, 0 when unmatched.
    pub per_entity: Vec<f64>,
    pub recall_threshold: f64,
    pub matching: MatchResult,
}

/// mIoU averages matched IoU over all ground-truth entities (missed ones count
/// as 0); recall is the fraction with matched IoU at or above the threshold.
///
/// With no ground-truth entities both scores are 1 when the prediction is also
/// empty and 0 otherwise.
pub fn miou_recall(gt: &EntityMaskSet, pred: &EntityMaskSet, recall_threshold: f64) -> Result<MaskMetrics> {
    let matching = match_entities(gt, pred)?;
    let mut per_entity = vec![0.0; gt.len()];
    for p in &matching.pairs {
        per_entity[p.gt] = p.iou;
    }
    let (miou, recall) = if gt.is_empty() {
        let v = if pred.is_empty() { 1.0 } else { 0.0 };
        (v, v)
    } else {
        let n = gt.len() as f64;
        (
            per_entity.iter().sum::<f64>() / n,
            per_entity.iter().filter(|&&v| v >= recall_threshold).count() as f64 / n,
        )
    };
    Ok(MaskMetrics {
        miou,
        recall,
        per_entity,
        recall_threshold,
        matching,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(h: usize, w: usize, r0: usize, c0: usize, r1: usize, c1: usize) -> BinaryMask {
        let mut m = BinaryMask::new(h, w);
        for r in r0..r1 {
            for c in c0..c1 {
                m.set(r, c, true);
            }
        }
        m
    }

    #[test]
    fn iou_cases() {
        let a = rect(4, 4, 0, 0, 2, 2);
        assert_eq!(iou(&a, &a).unwrap(), 1.0);
        assert_eq!(iou(&a, &rect(4, 4, 2, 2, 4, 4)).unwrap(), 0.0);
        assert_eq!(iou(&a, &rect(4, 4, 0, 0, 1, 2)).unwrap(), 0.5);
        assert_eq!(iou(&BinaryMask::new(2, 2), &BinaryMask::new(2, 2)).unwrap(), 1.0);
        assert!(matches!(
            iou(&a, &BinaryMask::new(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn permuted_prediction_matches_perfectly() {
        let a = rect(10, 10, 0, 0, 3, 3);
        let b = rect(10, 10, 5, 5, 9, 9);
        let c = rect(10, 10, 0, 6, 2, 10);
        let gt = EntityMaskSet::new(10, 10, vec![a.clone(), b.clone(), c.clone()]).unwrap();
        let pred = EntityMaskSet::new(10, 10, vec![c, a, b]).unwrap();
        let m = match_entities(&gt, &pred).unwrap();
        assert_eq!(m.pairs.iter().map(|p| (p.gt, p.pred)).collect::<Vec<_>>(), vec![(0, 1), (1, 2), (2, 0)]);
        assert!(m.pairs.iter().all(|p| p.iou == 1.0));
        let metrics = miou_recall(&gt, &pred, 0.5).unwrap();
        assert_eq!((metrics.miou, metrics.recall), (1.0, 1.0));
    }

    #[test]
    fn one_prediction_covering_two_gt() {
        // gt0: 4 px, gt1: 8 px, pred covers both (12 px).
        // IoU(gt0) = 4/12, IoU(gt1) = 8/12: the larger wins.
        let g0 = rect(4, 4, 0, 0, 1, 4);
        let g1 = rect(4, 4, 1, 0, 3, 4);
        let gt = EntityMaskSet::new(4, 4, vec![g0, g1]).unwrap();
        let pred = EntityMaskSet::new(4, 4, vec![rect(4, 4, 0, 0, 3, 4)]).unwrap();
        let m = match_entities(&gt, &pred).unwrap();
        assert_eq!(m.pairs.len(), 1);
        assert_eq!((m.pairs[0].gt, m.pairs[0].pred), (1, 0));
        assert!((m.pairs[0].iou - 8.0 / 12.0).abs() < 1e-12);
        assert_eq!(m.unmatched_gt, vec![0]);
        assert!(m.unmatched_pred.is_empty());
    }

    #[test]
    fn empty_prediction() {
        let gt = EntityMaskSet::new(4, 4, vec![rect(4, 4, 0, 0, 2, 2)]).unwrap();
        let pred = EntityMaskSet::empty(4, 4);
        let m = miou_recall(&gt, &pred, 0.5).unwrap();
        assert_eq!(m.matching.unmatched_gt, vec![0]);
        assert_eq!((m.miou, m.recall), (0.0, 0.0));
    }

    #[test]
    fn one_missed_entity() {
        let a = rect(10, 10, 0, 0, 4, 4);
        let b = rect(10, 10, 6, 6, 10, 10);
        let gt = EntityMaskSet::new(10, 10, vec![a, b]).unwrap();
        let pred = EntityMaskSet::new(10, 10, vec![rect(10, 10, 0, 0, 4, 2)]).unwrap();
        let m = miou_recall(&gt, &pred, 0.5).unwrap();
        assert!((m.miou - 0.25).abs() < 1e-12);
        assert_eq!(m.recall, 0.5);
    }

    #[test]
    fn zero_iou_pairs_discarded() {
        let gt = EntityMaskSet::new(4, 4, vec![rect(4, 4, 0, 0, 1, 1)]).unwrap();
        let pred = EntityMaskSet::new(4, 4, vec![rect(4, 4, 3, 3, 4, 4)]).unwrap();
        let m = match_entities(&gt, &pred).unwrap();
        assert!(m.pairs.is_empty());
        assert_eq!(m.unmatched_pred, vec![0]);
    }

    #[test]
    fn empty_gt_conventions() {
        let empty = EntityMaskSet::empty(3, 3);
        assert_eq!(miou_recall(&empty, &empty, 0.5).unwrap().miou, 1.0);
        let pred = EntityMaskSet::new(3, 3, vec![rect(3, 3, 0, 0, 1, 1)]).unwrap();
        assert_eq!(miou_recall(&empty, &pred, 0.5).unwrap().miou, 0.0);
    }

    #[test]
    fn matrix_matches_pairwise_iou() {
        let gt = EntityMaskSet::new(6, 6, vec![rect(6, 6, 0, 0, 3, 3), rect(6, 6, 3, 3, 6, 6)]).unwrap();
        let pred = EntityMaskSet::new(6, 6, vec![rect(6, 6, 1, 1, 4, 4), rect(6, 6, 0, 4, 2, 6)]).unwrap();
        let m = iou_matrix(&gt, &pred).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m[i][j], iou(&gt.masks()[i], &pred.masks()[j]).unwrap());
            }
        }
    }
}
