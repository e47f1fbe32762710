//! Baseline encoders for ablation experiments only; not a production path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mask::{Colormap, EntityMaskSet, Rgb, BLACK};
use crate::palette::paint;

/// Paints each entity with an independent uniformly random non-black color.
pub fn encode_random_colors(masks: &EntityMaskSet, seed: u64) -> Colormap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut colormap = Colormap::new(masks.height(), masks.width());
    for mask in masks.masks() {
        let color = loop {
            let c: Rgb = [rng.random(), rng.random(), rng.random()];
            if c != BLACK {
                break c;
            }
        };
        paint(&mut colormap, mask, color);
    }
    colormap
}
