//! Deterministic Lloyd k-means over pixel feature vectors.
//!
//! Seeding is farthest-point: the first seed is the point farthest from the
//! set mean, every further seed is the point farthest from its nearest chosen
//! seed. Ties go to the lowest position, so results depend only on the data.

use crate::features::{sq_dist, Feature, FeatureMap};

/// Cluster `subset` (positions into `features`) into at most `k` groups.
///
/// Returns the nonempty clusters in seed order; each keeps the ascending order
/// of `subset`. Fewer than `k` clusters come back when the subset has fewer
/// than `k` distinct feature vectors.
pub fn kmeans(features: &FeatureMap, subset: &[u32], k: usize, max_iters: usize) -> Vec<Vec<u32>> {
    if subset.is_empty() || k == 0 {
        return Vec::new();
    }
    let feats = features.vectors();
    let mut centroids = seed_farthest(feats, subset, k);
    let k = centroids.len();

    let mut labels = vec![0usize; subset.len()];
    assign(feats, subset, &centroids, &mut labels);
    for _ in 0..max_iters {
        update(feats, subset, &labels, &mut centroids);
        let changed = assign(feats, subset, &centroids, &mut labels);
        if !changed {
            break;
        }
    }

    let mut clusters = vec![Vec::new(); k];
    for (&pos, &label) in subset.iter().zip(&labels) {
        clusters[label].push(pos);
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

fn mean_of(feats: &[Feature], subset: &[u32]) -> Feature {
    let mut acc = [0.0f64; 6];
    for &p in subset {
        for (a, v) in acc.iter_mut().zip(feats[p as usize]) {
            *a += v as f64;
        }
    }
    let n = subset.len() as f64;
    acc.map(|a| (a / n) as f32)
}

fn seed_farthest(feats: &[Feature], subset: &[u32], k: usize) -> Vec<Feature> {
    let mean = mean_of(feats, subset);
    let first = argmax(subset, |p| sq_dist(&feats[p as usize], &mean));
    let mut seeds = vec![feats[first as usize]];
    let mut nearest: Vec<f32> = subset
        .iter()
        .map(|&p| sq_dist(&feats[p as usize], &seeds[0]))
        .collect();
    while seeds.len() < k {
        let (idx, &best) = nearest
            .iter()
            .enumerate()
            .fold((0, &f32::NEG_INFINITY), |acc, (i, d)| if *d > *acc.1 { (i, d) } else { acc });
        if best <= 0.0 {
            break;
        }
        let seed = feats[subset[idx] as usize];
        for (n, &p) in nearest.iter_mut().zip(subset) {
            *n = n.min(sq_dist(&feats[p as usize], &seed));
        }
        seeds.push(seed);
    }
    seeds
}

fn argmax(subset: &[u32], mut key: impl FnMut(u32) -> f32) -> u32 {
    let mut best = subset[0];
    let mut best_val = f32::NEG_INFINITY;
    for &p in subset {
        let v = key(p);
        if v > best_val {
            best_val = v;
            best = p;
        }
    }
    best
}

fn assign(feats: &[Feature], subset: &[u32], centroids: &[Feature], labels: &mut [usize]) -> bool {
    let mut changed = false;
    for (label, &p) in labels.iter_mut().zip(subset) {
        let f = &feats[p as usize];
        let mut best = 0;
        let mut best_d = sq_dist(f, &centroids[0]);
        for (j, c) in centroids.iter().enumerate().skip(1) {
            let d = sq_dist(f, c);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        if *label != best {
            *label = best;
            changed = true;
        }
    }
    changed
}

fn update(feats: &[Feature], subset: &[u32], labels: &[usize], centroids: &mut [Feature]) {
    let k = centroids.len();
    let mut sums = vec![[0.0f64; 6]; k];
    let mut counts = vec![0usize; k];
    for (&p, &label) in subset.iter().zip(labels) {
        counts[label] += 1;
        for (s, v) in sums[label].iter_mut().zip(feats[p as usize]) {
            *s += v as f64;
        }
    }
    for j in 0..k {
        // An emptied cluster keeps its previous centroid.
        if counts[j] > 0 {
            let n = counts[j] as f64;
            centroids[j] = sums[j].map(|s| (s / n) as f32);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{build_features, FeatureScaling, FeatureSpace};
    use crate::mask::Colormap;

    fn map_of(colors: &[[u8; 3]]) -> FeatureMap {
        let cm = Colormap::from_pixels(1, colors.len(), colors.to_vec()).unwrap();
        build_features(&cm, None, FeatureSpace::RgbLab, FeatureScaling::Native).unwrap()
    }

    #[test]
    fn three_groups() {
        let colors = [
            [0, 0, 0],
            [255, 0, 0],
            [0, 0, 1],
            [250, 0, 0],
            [0, 200, 0],
            [0, 201, 0],
        ];
        let f = map_of(&colors);
        let all: Vec<u32> = (0..6).collect();
        let mut clusters = kmeans(&f, &all, 3, 20);
        clusters.sort();
        assert_eq!(clusters, vec![vec![0, 2], vec![1, 3], vec![4, 5]]);
    }

    #[test]
    fn fewer_distinct_points_than_k() {
        let f = map_of(&[[9, 9, 9], [9, 9, 9], [200, 0, 0]]);
        let clusters = kmeans(&f, &[0, 1, 2], 5, 20);
        assert_eq!(clusters.len(), 2);
    }

    #[test]
    fn deterministic() {
        let colors: Vec<[u8; 3]> = (0..200u32)
            .map(|i| [(i * 37 % 256) as u8, (i * 91 % 256) as u8, (i * 13 % 256) as u8])
            .collect();
        let f = map_of(&colors);
        let all: Vec<u32> = (0..200).collect();
        assert_eq!(kmeans(&f, &all, 4, 50), kmeans(&f, &all, 4, 50));
    }
}
