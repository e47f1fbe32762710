//! Coarse region-of-interest masks around entities: either an enlarged
//! bounding box, or an irregular polygon traced by four jittered quadratic
//! Bezier curves bulging out to the enlarged box.
//!
//! Convention: 1 marks the region of interest. The reference sampling code
//! produces the inverse (0 inside), so anything ported from it must be flipped.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BBox, BinaryMask, Colormap, EntityMaskSet, BLACK};

const STREAM_BRANCH: u64 = 1;
const STREAM_RATIO: u64 = 2;
const STREAM_JITTER: u64 = 3;

/// Curve parameter step; samples are taken at `t = i * STEP` for `i = 1..=n`.
pub const CURVE_STEP: f64 = 0.05;

/// Binary region-of-interest raster, 1 = region to fill/segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseMask(BinaryMask);

impl CoarseMask {
    pub fn new(mask: BinaryMask) -> Self {
        Self(mask)
    }

    pub fn mask(&self) -> &BinaryMask {
        &self.0
    }

    pub fn into_mask(self) -> BinaryMask {
        self.0
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoarseMaskParams {
    /// Probability of the curve branch.
    pub arbitrary_mask_percent: f64,
    /// Bounding-box scale factor range, sampled uniformly per call.
    pub extend_ratio_range: (f64, f64),
    /// Per-vertex jitter bound in pixels.
    pub jitter: i64,
    pub samples_per_curve: usize,
    pub rng_seed: u64,
}

impl Default for CoarseMaskParams {
    fn default() -> Self {
        Self {
            arbitrary_mask_percent: 0.5,
            extend_ratio_range: (1.1, 1.3),
            jitter: 5,
            samples_per_curve: 18,
            rng_seed: 0,
        }
    }
}

impl CoarseMaskParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.arbitrary_mask_percent) {
            return Err(Error::InvalidParameter(format!(
                "arbitrary_mask_percent must be in [0, 1], got {}",
                self.arbitrary_mask_percent
            )));
        }
        let (lo, hi) = self.extend_ratio_range;
        if !(lo >= 1.0) || !(hi >= lo) || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "extend_ratio_range must satisfy 1 <= lo <= hi, got ({lo}, {hi})"
            )));
        }
        if self.jitter < 0 {
            return Err(Error::InvalidParameter(format!("jitter must be >= 0, got {}", self.jitter)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Curve,
    BBox,
}

/// What the sampler works around.
#[derive(Debug, Clone, Copy)]
pub enum CoarseSource<'a> {
    Masks(&'a EntityMaskSet),
    BBox { bbox: BBox, height: usize, width: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseSample {
    pub mask: CoarseMask,
    pub branch: Branch,
    pub bbox: BBox,
    pub extended: BBox,
    /// Jittered polygon vertices `(x, y)`, curve branch only.
    pub vertices: Vec<(f64, f64)>,
}

/// Scales `bbox` about its center, rounding outward and clamping to the canvas.
pub fn extend_bbox(bbox: BBox, ratio: f64, canvas: (usize, usize)) -> BBox {
    let (h, w) = canvas;
    let scale = |lo: usize, hi: usize, limit: usize| {
        let center = (lo + hi) as f64 / 2.0;
        let half = (hi - lo) as f64 / 2.0 * ratio;
        let a = (center - half).floor().max(0.0) as usize;
        let b = ((center + half).ceil().max(0.0) as usize).min(limit);
        (a.min(limit), b)
    };
    let (x0, x1) = scale(bbox.x0, bbox.x1, w);
    let (y0, y1) = scale(bbox.y0, bbox.y1, h);
    BBox { x0, y0, x1, y1 }
}

/// Degree-2 Bezier point, evaluated in the barycentric form used by the
/// reference `bezier` package so that equality-based deduplication agrees.
#[inline]
fn quad_bezier(p: [f64; 3], t: f64) -> f64 {
    let s = 1.0 - t;
    (s * p[0] + (2.0 * t) * p[1]) * s + (t * t) * p[2]
}

/// Un-jittered polygon vertices `(x, y)` for the curve branch.
///
/// Curves run top, right, down, left. Within one curve a sample is kept only
/// if neither its x nor its y equals a previously kept sample's, replicating
/// the reference sampler's filter.
pub fn curve_vertices(bbox: BBox, extended: BBox, samples: usize) -> Vec<(f64, f64)> {
    let (x0, y0, x1, y1) = (bbox.x0 as f64, bbox.y0 as f64, bbox.x1 as f64, bbox.y1 as f64);
    let (ex0, ey0, ex1, ey1) = (
        extended.x0 as f64,
        extended.y0 as f64,
        extended.x1 as f64,
        extended.y1 as f64,
    );
    let mx = (x0 + x1) / 2.0;
    let my = (y0 + y1) / 2.0;
    // ([x nodes], [y nodes]) per curve.
    let curves = [
        ([x0, mx, x1], [y0, ey0, y0]),
        ([x1, ex1, x1], [y0, my, y1]),
        ([x1, mx, x0], [y1, ey1, y1]),
        ([x0, ex0, x0], [y1, my, y0]),
    ];
    let mut out = Vec::new();
    for (xs, ys) in curves {
        let mut seen_x: Vec<f64> = Vec::new();
        let mut seen_y: Vec<f64> = Vec::new();
        for i in 1..=samples {
            let t = i as f64 * CURVE_STEP;
            let (x, y) = (quad_bezier(xs, t), quad_bezier(ys, t));
            if !seen_x.contains(&x) && !seen_y.contains(&y) {
                out.push((x, y));
                seen_x.push(x);
                seen_y.push(y);
            }
        }
    }
    out
}

fn distinct_count(points: &[(f64, f64)]) -> usize {
    let mut v: Vec<(u64, u64)> = points.iter().map(|(x, y)| (x.to_bits(), y.to_bits())).collect();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Even-odd polygon fill sampled at pixel centers `(x = col, y = row)`.
/// Pixels whose center lies exactly on an edge are inside.
pub fn fill_polygon(vertices: &[(f64, f64)], height: usize, width: usize) -> BinaryMask {
    let mut mask = BinaryMask::new(height, width);
    let n = vertices.len();
    if n == 0 || height == 0 || width == 0 {
        return mask;
    }
    let mut xs: Vec<f64> = Vec::new();
    for r in 0..height {
        let y = r as f64;
        xs.clear();
        for i in 0..n {
            let (ax, ay) = vertices[i];
            let (bx, by) = vertices[(i + 1) % n];
            if (ay <= y) != (by <= y) {
                xs.push(ax + (y - ay) * (bx - ax) / (by - ay));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for span in xs.chunks_exact(2) {
            let lo = span[0].ceil().max(0.0);
            let hi = span[1].floor().min(width as f64 - 1.0);
            if lo > hi {
                continue;
            }
            for c in lo as usize..=hi as usize {
                mask.set(r, c, true);
            }
        }
    }
    // Centers exactly on an edge.
    for i in 0..n {
        let (ax, ay) = vertices[i];
        let (bx, by) = vertices[(i + 1) % n];
        let r_lo = ay.min(by).ceil().max(0.0);
        let r_hi = ay.max(by).floor().min(height as f64 - 1.0);
        if r_lo > r_hi {
            continue;
        }
        for r in r_lo as usize..=r_hi as usize {
            let y = r as f64;
            if ay == by {
                let c_lo = ax.min(bx).ceil().max(0.0);
                let c_hi = ax.max(bx).floor().min(width as f64 - 1.0);
                if c_lo <= c_hi {
                    for c in c_lo as usize..=c_hi as usize {
                        mask.set(r, c, true);
                    }
                }
            } else {
                let x = ax + (y - ay) * (bx - ax) / (by - ay);
                if x == x.round() && x >= 0.0 && x < width as f64 {
                    mask.set(r, x as usize, true);
                }
            }
        }
    }
    mask
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Samples a coarse mask around `source`.
///
/// Without an override the curve branch is taken with probability
/// `arbitrary_mask_percent`.
pub fn sample_coarse_mask(
    source: CoarseSource<'_>,
    params: &CoarseMaskParams,
    branch_override: Option<Branch>,
) -> Result<CoarseSample> {
    params.validate()?;
    let (bbox, h, w) = match source {
        CoarseSource::Masks(set) => {
            let bbox = set.bbox().ok_or(Error::EmptyMask)?;
            (bbox, set.height(), set.width())
        }
        CoarseSource::BBox { bbox, height, width } => {
            if bbox.is_empty() || bbox.x1 > width || bbox.y1 > height {
                return Err(Error::InvalidParameter(format!(
                    "bounding box {bbox:?} is empty or outside the {height}x{width} canvas"
                )));
            }
            (bbox, height, width)
        }
    };

    let mut branch_rng = stream(params.rng_seed, STREAM_BRANCH);
    let prob: f64 = branch_rng.random();
    let branch = branch_override.unwrap_or(if prob < params.arbitrary_mask_percent {
        Branch::Curve
    } else {
        Branch::BBox
    });

    let (lo, hi) = params.extend_ratio_range;
    let ratio = if hi > lo {
        stream(params.rng_seed, STREAM_RATIO).random_range(lo..=hi)
    } else {
        lo
    };
    let extended = extend_bbox(bbox, ratio, (h, w));

    match branch {
        Branch::BBox => {
            let mut mask = BinaryMask::new(h, w);
            for r in extended.y0..extended.y1 {
                for c in extended.x0..extended.x1 {
                    mask.set(r, c, true);
                }
            }
            Ok(CoarseSample {
                mask: CoarseMask(mask),
                branch,
                bbox,
                extended,
                vertices: Vec::new(),
            })
        }
        Branch::Curve => {
            let base = curve_vertices(bbox, extended, params.samples_per_curve);
            let mut jitter_rng = stream(params.rng_seed, STREAM_JITTER);
            let jitter = |rng: &mut ChaCha8Rng, j: i64| -> Vec<(f64, f64)> {
                base.iter()
                    .map(|&(x, y)| {
                        let dx = rng.random_range(-j..=j) as f64;
                        let dy = rng.random_range(-j..=j) as f64;
                        (x + dx, y + dy)
                    })
                    .collect()
            };
            let mut vertices = jitter(&mut jitter_rng, params.jitter);
            if distinct_count(&vertices) < 3 {
                vertices = base.clone();
            }
            if distinct_count(&vertices) < 3 {
                return Err(Error::DegeneratePolygon);
            }
            let mask = fill_polygon(&vertices, h, w);
            if mask.is_empty() {
                return Err(Error::DegeneratePolygon);
            }
            Ok(CoarseSample {
                mask: CoarseMask(mask),
                branch,
                bbox,
                extended,
                vertices,
            })
        }
    }
}

/// Blacks out the region of interest: `image ⊙ (1 - mask)`.
pub fn apply_coarse_mask(image: &Colormap, mask: &CoarseMask) -> Result<Colormap> {
    if image.dims() != mask.dims() {
        return Err(Error::DimensionMismatch {
            expected: image.dims(),
            actual: mask.dims(),
        });
    }
    let mut out = image.clone();
    for (px, &bit) in out.pixels_mut().iter_mut().zip(mask.mask().bits()) {
        if bit {
            *px = BLACK;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extend_identity_and_scale() {
        let b = BBox::new(10, 10, 30, 30);
        assert_eq!(extend_bbox(b, 1.0, (100, 100)), b);
        assert_eq!(extend_bbox(b, 1.5, (100, 100)), BBox::new(5, 5, 35, 35));
        // Rounds outward: center 12.5, half 2.5 * 1.3 = 3.25.
        assert_eq!(extend_bbox(BBox::new(10, 10, 15, 15), 1.3, (100, 100)), BBox::new(9, 9, 16, 16));
    }

    #[test]
    fn extend_clamps_to_canvas() {
        let b = BBox::new(0, 0, 20, 10);
        assert_eq!(extend_bbox(b, 2.0, (40, 30)), BBox::new(0, 0, 30, 15));
        let b = BBox::new(80, 90, 100, 100);
        assert_eq!(extend_bbox(b, 2.0, (100, 100)), BBox::new(70, 85, 100, 100));
    }

    #[test]
    fn bbox_branch_without_extension_is_exact() {
        let params = CoarseMaskParams {
            extend_ratio_range: (1.0, 1.0),
            jitter: 0,
            ..CoarseMaskParams::default()
        };
        let bbox = BBox::new(3, 4, 9, 7);
        let s = sample_coarse_mask(
            CoarseSource::BBox { bbox, height: 12, width: 12 },
            &params,
            Some(Branch::BBox),
        )
        .unwrap();
        assert_eq!(s.mask.mask().count(), bbox.area());
        assert_eq!(s.mask.mask().bbox(), Some(bbox));
    }

    #[test]
    fn fill_square() {
        let m = fill_polygon(&[(1.0, 1.0), (4.0, 1.0), (4.0, 3.0), (1.0, 3.0)], 6, 6);
        assert_eq!(m.count(), 12);
        assert!(m.get(1, 1) && m.get(3, 4) && !m.get(0, 0) && !m.get(4, 4));
    }

    #[test]
    fn fill_triangle_includes_edge_centers() {
        let m = fill_polygon(&[(0.0, 0.0), (4.0, 0.0), (0.0, 4.0)], 5, 5);
        // x + y <= 4.
        let expected = (0..5).map(|r| 5 - r).sum::<usize>();
        assert_eq!(m.count(), expected);
        assert!(m.get(2, 2) && !m.get(3, 2));
    }

    #[test]
    fn apply_mask_cases() {
        let img = Colormap::filled(4, 5, [10, 20, 30]);
        let none = CoarseMask::new(BinaryMask::new(4, 5));
        assert_eq!(apply_coarse_mask(&img, &none).unwrap(), img);
        let all = CoarseMask::new(BinaryMask::filled(4, 5));
        assert_eq!(apply_coarse_mask(&img, &all).unwrap(), Colormap::new(4, 5));
        let bad = CoarseMask::new(BinaryMask::new(5, 4));
        assert!(apply_coarse_mask(&img, &bad).is_err());
    }

    #[test]
    fn bbox_mask_blacks_exactly_inside() {
        let img = Colormap::filled(10, 10, [200, 100, 50]);
        let s = sample_coarse_mask(
            CoarseSource::BBox { bbox: BBox::new(2, 3, 6, 8), height: 10, width: 10 },
            &CoarseMaskParams {
                extend_ratio_range: (1.0, 1.0),
                ..CoarseMaskParams::default()
            },
            Some(Branch::BBox),
        )
        .unwrap();
        let out = apply_coarse_mask(&img, &s.mask).unwrap();
        for r in 0..10 {
            for c in 0..10 {
                let inside = (3..8).contains(&r) && (2..6).contains(&c);
                assert_eq!(out.get(r, c) == BLACK, inside);
            }
        }
    }

    #[test]
    fn invalid_params() {
        let bad = CoarseMaskParams {
            extend_ratio_range: (0.9, 1.2),
            ..CoarseMaskParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = CoarseMaskParams {
            arbitrary_mask_percent: 1.5,
            ..CoarseMaskParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn empty_source_rejected() {
        let set = EntityMaskSet::empty(8, 8);
        let err = sample_coarse_mask(CoarseSource::Masks(&set), &CoarseMaskParams::default(), None);
        assert_eq!(err.unwrap_err(), Error::EmptyMask);
    }
}
