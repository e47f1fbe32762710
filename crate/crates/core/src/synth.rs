//! Random synthetic scenes: entity mask sets whose gravity centers fall in
//! distinct palette cells.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, EntityMaskSet};
use crate::palette::{center_of_mass, locate_cell, Cell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Rect,
    Ellipse,
    Diamond,
}

impl ShapeKind {
    const ALL: [ShapeKind; 3] = [Self::Rect, Self::Ellipse, Self::Diamond];

    fn name(self) -> &'static str {
        match self {
            Self::Rect => "rect",
            Self::Ellipse => "ellipse",
            Self::Diamond => "diamond",
        }
    }
}

/// A centrally symmetric shape; half extents in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub kind: ShapeKind,
    pub half_h: f64,
    pub half_w: f64,
}

impl Shape {
    fn contains(&self, dr: f64, dc: f64) -> bool {
        let (u, v) = (dr / self.half_h, dc / self.half_w);
        match self.kind {
            ShapeKind::Rect => u.abs() <= 1.0 && v.abs() <= 1.0,
            ShapeKind::Ellipse => u * u + v * v <= 1.0,
            ShapeKind::Diamond => u.abs() + v.abs() <= 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub grid_size: usize,
    pub min_entities: usize,
    pub max_entities: usize,
    /// Shape half-extent range as a multiple of the cell size.
    pub size_range: (f64, f64),
    /// Generate entities in pairs sharing one shape.
    pub duplicates: bool,
    /// Scenes with a smaller entity are redrawn.
    pub min_entity_pixels: usize,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            height: 512,
            width: 512,
            grid_size: 11,
            min_entities: 1,
            max_entities: 10,
            size_range: (0.6, 2.0),
            duplicates: false,
            min_entity_pixels: 100,
        }
    }
}

/// Half-open pixel range of grid cell `i` along an axis of length `extent`.
fn cell_span(i: usize, extent: usize, b: usize) -> (usize, usize) {
    ((i * extent).div_ceil(b), ((i + 1) * extent).div_ceil(b))
}

fn draw_shape(rng: &mut ChaCha8Rng, spec: &SceneSpec) -> Shape {
    let cell_h = spec.height as f64 / spec.grid_size as f64;
    let cell_w = spec.width as f64 / spec.grid_size as f64;
    let (lo, hi) = spec.size_range;
    Shape {
        kind: ShapeKind::ALL[rng.random_range(0..ShapeKind::ALL.len())],
        half_h: (rng.random_range(lo..=hi) * cell_h).max(1.0),
        half_w: (rng.random_range(lo..=hi) * cell_w).max(1.0),
    }
}

/// Generates one scene. Entities are painted in order onto unclaimed pixels,
/// centered on distinct random cells; draws repeat until every entity has at
/// least `min_entity_pixels` pixels and its gravity center lies in its own cell.
pub fn generate_scene(spec: &SceneSpec, seed: u64) -> Result<EntityMaskSet> {
    let b = spec.grid_size;
    if spec.max_entities < spec.min_entities || spec.max_entities > b * b {
        return Err(Error::InvalidParameter(format!(
            "entity range {}..={} does not fit a {b}x{b} grid",
            spec.min_entities, spec.max_entities
        )));
    }
    let (h, w) = (spec.height, spec.width);
    if h < b || w < b {
        return Err(Error::InvalidParameter("canvas smaller than the grid".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(spec.min_entities..=spec.max_entities);

    for _attempt in 0..200 {
        let cells: Vec<Cell> = sample(&mut rng, b * b, n)
            .iter()
            .map(|i| Cell { row: i / b, col: i % b })
            .collect();
        let mut shapes = Vec::with_capacity(n);
        for k in 0..n {
            if spec.duplicates && k % 2 == 1 {
                shapes.push(shapes[k - 1]);
            } else {
                shapes.push(draw_shape(&mut rng, spec));
            }
        }

        let mut claimed = vec![false; h * w];
        let mut masks = Vec::with_capacity(n);
        for (cell, shape) in cells.iter().zip(&shapes) {
            let (r0, r1) = cell_span(cell.row, h, b);
            let (c0, c1) = cell_span(cell.col, w, b);
            let cr = (r0 + r1 - 1) as f64 / 2.0;
            let cc = (c0 + c1 - 1) as f64 / 2.0;
            let mut mask = BinaryMask::new(h, w);
            let rmin = (cr - shape.half_h).floor().max(0.0) as usize;
            let rmax = ((cr + shape.half_h).ceil() as usize).min(h - 1);
            let cmin = (cc - shape.half_w).floor().max(0.0) as usize;
            let cmax = ((cc + shape.half_w).ceil() as usize).min(w - 1);
            for r in rmin..=rmax {
                for c in cmin..=cmax {
                    if !claimed[r * w + c] && shape.contains(r as f64 - cr, c as f64 - cc) {
                        claimed[r * w + c] = true;
                        mask.set(r, c, true);
                    }
                }
            }
            masks.push(mask);
        }

        let ok = masks.iter().zip(&cells).all(|(m, cell)| {
            m.count() >= spec.min_entity_pixels.max(1)
                && center_of_mass(m).is_ok_and(|c| locate_cell(c, (h, w), b) == *cell)
        });
        if ok {
            let labels = shapes.iter().map(|s| s.kind.name().to_string()).collect();
            return EntityMaskSet::new(h, w, masks)?.with_labels(labels);
        }
    }
    Err(Error::InvalidParameter(
        "could not place entities in distinct cells; reduce size_range".into(),
    ))
}

/// `count` scenes with seeds `base_seed, base_seed + 1, ...`.
pub fn generate_scenes(spec: &SceneSpec, count: usize, base_seed: u64) -> Result<Vec<EntityMaskSet>> {
    (0..count as u64).map(|i| generate_scene(spec, base_seed + i)).collect()
}
