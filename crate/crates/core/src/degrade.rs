//! Synthetic corruption of clean colormaps.
//!
//! Models the artifacts a generative model leaves in a decoded colormap:
//! gradient boundaries, entity colors bleeding toward the background, black
//! holes, per-pixel noise, and entity colors drifting toward a neighbour's
//! color.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{Colormap, Rgb, BLACK};

pub const SUITE_VERSION: &str = "suite_v1";

// Independent random streams per stage, so changing one stage never shifts
// another stage's draws.
const STREAM_CONFUSER: u64 = 1;
const STREAM_HOLES: u64 = 2;
const STREAM_NOISE: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegradationProfile {
    pub name: String,
    /// Gaussian blur sigma in pixels.
    pub boundary_blur_sigma: f64,
    /// Blend factor toward black for entity pixels near region boundaries.
    pub background_bleed_alpha: f64,
    pub hole_count: usize,
    pub hole_radius: f64,
    /// Per-channel noise sigma on the 0–255 scale.
    pub gaussian_sigma: f64,
    /// Number of entity colors pulled toward another entity's color.
    pub confuser_pairs: usize,
    /// Fraction of the way each confuser moves toward its target.
    pub confuser_gamma: f64,
    pub rng_seed: u64,
}

impl DegradationProfile {
    /// The all-zero profile; [`degrade`] is the identity under it.
    pub fn clean() -> Self {
        Self {
            name: "clean".into(),
            boundary_blur_sigma: 0.0,
            background_bleed_alpha: 0.0,
            hole_count: 0,
            hole_radius: 0.0,
            gaussian_sigma: 0.0,
            confuser_pairs: 0,
            confuser_gamma: 0.0,
            rng_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("boundary_blur_sigma", self.boundary_blur_sigma),
            ("hole_radius", self.hole_radius),
            ("gaussian_sigma", self.gaussian_sigma),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("background_bleed_alpha", self.background_bleed_alpha),
            ("confuser_gamma", self.confuser_gamma),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// The fixed benchmark grid: clean, light, medium, heavy, confuser.
pub fn standard_suite() -> Vec<DegradationProfile> {
    let clean = DegradationProfile::clean();
    let light = DegradationProfile {
        name: "light".into(),
        gaussian_sigma: 3.0,
        boundary_blur_sigma: 1.0,
        ..clean.clone()
    };
    let medium = DegradationProfile {
        name: "medium".into(),
        gaussian_sigma: 8.0,
        boundary_blur_sigma: 1.5,
        background_bleed_alpha: 0.2,
        hole_count: 3,
        hole_radius: 4.0,
        ..clean.clone()
    };
    let heavy = DegradationProfile {
        name: "heavy".into(),
        gaussian_sigma: 16.0,
        boundary_blur_sigma: 2.5,
        background_bleed_alpha: 0.4,
        hole_count: 6,
        hole_radius: 6.0,
        ..clean.clone()
    };
    let confuser = DegradationProfile {
        name: "confuser".into(),
        confuser_pairs: 1,
        confuser_gamma: 0.5,
        ..medium.clone()
    };
    vec![clean, light, medium, heavy, confuser]
}

/// Looks up a profile of [`standard_suite`] by name.
pub fn suite_profile(name: &str) -> Option<DegradationProfile> {
    standard_suite().into_iter().find(|p| p.name == name)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Applies, in order: confuser remap, blur, background bleed, holes, noise.
pub fn degrade(colormap: &Colormap, profile: &DegradationProfile) -> Result<Colormap> {
    profile.validate()?;
    let mut out = colormap.clone();
    if profile.confuser_pairs > 0 && profile.confuser_gamma > 0.0 {
        confuse(&mut out, profile.confuser_pairs, profile.confuser_gamma, profile.rng_seed);
    }
    // Region structure after the remap, before any smoothing.
    let regions = out.clone();
    if profile.boundary_blur_sigma > 0.0 {
        out = gaussian_blur(&out, profile.boundary_blur_sigma);
    }
    if profile.background_bleed_alpha > 0.0 {
        let band = (2.0 * profile.boundary_blur_sigma).max(1.0);
        bleed(&mut out, &regions, band, profile.background_bleed_alpha);
    }
    if profile.hole_count > 0 && profile.hole_radius > 0.0 {
        stamp_holes(&mut out, &regions, profile.hole_count, profile.hole_radius, profile.rng_seed);
    }
    if profile.gaussian_sigma > 0.0 {
        add_noise(&mut out, profile.gaussian_sigma, profile.rng_seed);
    }
    Ok(out)
}

fn distinct_foreground_colors(colormap: &Colormap) -> Vec<Rgb> {
    let mut colors: Vec<Rgb> = colormap.pixels().iter().copied().filter(|c| *c != BLACK).collect();
    colors.sort_unstable();
    colors.dedup();
    colors
}

/// Pulls `pairs` randomly chosen entity colors toward another present color.
fn confuse(colormap: &mut Colormap, pairs: usize, gamma: f64, seed: u64) {
    let colors = distinct_foreground_colors(colormap);
    if colors.len() < 2 {
        return;
    }
    let mut rng = stream(seed, STREAM_CONFUSER);
    let sources = sample(&mut rng, colors.len(), pairs.min(colors.len()));
    let mut remap: Vec<(Rgb, Rgb)> = Vec::new();
    for src in sources.iter() {
        let mut dst = rng.random_range(0..colors.len() - 1);
        if dst >= src {
            dst += 1;
        }
        let (a, b) = (colors[src], colors[dst]);
        let moved = [0, 1, 2].map(|i| {
            (a[i] as f64 + gamma * (b[i] as f64 - a[i] as f64))
                .round()
                .clamp(0.0, 255.0) as u8
        });
        remap.push((a, moved));
    }
    for px in colormap.pixels_mut() {
        if let Some(&(_, to)) = remap.iter().find(|(from, _)| from == px) {
            *px = to;
        }
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|x| (-(x * x) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k.into_iter().map(|v| v as f32).collect()
}

/// Separable Gaussian blur with clamp-to-edge borders.
pub fn gaussian_blur(colormap: &Colormap, sigma: f64) -> Colormap {
    let (h, w) = colormap.dims();
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let src: Vec<[f32; 3]> = colormap.pixels().iter().map(|p| p.map(|v| v as f32)).collect();

    let mut tmp = vec![[0.0f32; 3]; h * w];
    for r in 0..h {
        for c in 0..w {
            let mut acc = [0.0f32; 3];
            for (k, &wgt) in kernel.iter().enumerate() {
                let cc = (c as i64 + k as i64 - radius).clamp(0, w as i64 - 1) as usize;
                let p = src[r * w + cc];
                for i in 0..3 {
                    acc[i] += wgt * p[i];
                }
            }
            tmp[r * w + c] = acc;
        }
    }
    let mut out = Colormap::new(h, w);
    for r in 0..h {
        for c in 0..w {
            let mut acc = [0.0f32; 3];
            for (k, &wgt) in kernel.iter().enumerate() {
                let rr = (r as i64 + k as i64 - radius).clamp(0, h as i64 - 1) as usize;
                let p = tmp[rr * w + c];
                for i in 0..3 {
                    acc[i] += wgt * p[i];
                }
            }
            out.set(r, c, acc.map(|v| v.round().clamp(0.0, 255.0) as u8));
        }
    }
    out
}

/// Pixels whose color differs from a 4-neighbour.
fn boundary_pixels(colormap: &Colormap) -> Vec<(usize, usize)> {
    let (h, w) = colormap.dims();
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let v = colormap.get(r, c);
            let differs = (r > 0 && colormap.get(r - 1, c) != v)
                || (r + 1 < h && colormap.get(r + 1, c) != v)
                || (c > 0 && colormap.get(r, c - 1) != v)
                || (c + 1 < w && colormap.get(r, c + 1) != v);
            if differs {
                out.push((r, c));
            }
        }
    }
    out
}

/// Darkens entity pixels within `band` pixels of a region boundary.
fn bleed(out: &mut Colormap, regions: &Colormap, band: f64, alpha: f64) {
    let (h, w) = regions.dims();
    let mut near = vec![false; h * w];
    let rad = band.floor() as i64;
    let band2 = band * band;
    for (r, c) in boundary_pixels(regions) {
        for dr in -rad..=rad {
            for dc in -rad..=rad {
                if ((dr * dr + dc * dc) as f64) > band2 {
                    continue;
                }
                let (rr, cc) = (r as i64 + dr, c as i64 + dc);
                if rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w {
                    near[rr as usize * w + cc as usize] = true;
                }
            }
        }
    }
    let keep = 1.0 - alpha;
    for (i, px) in out.pixels_mut().iter_mut().enumerate() {
        if near[i] && regions.pixels()[i] != BLACK {
            *px = px.map(|v| (v as f64 * keep).round() as u8);
        }
    }
}

/// Black discs centered on random entity pixels.
fn stamp_holes(out: &mut Colormap, regions: &Colormap, count: usize, radius: f64, seed: u64) {
    let (h, w) = regions.dims();
    let fg: Vec<usize> = regions
        .pixels()
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != BLACK)
        .map(|(i, _)| i)
        .collect();
    let mut rng = stream(seed, STREAM_HOLES);
    let rad = radius.floor() as i64;
    let r2 = radius * radius;
    for _ in 0..count {
        let center = if fg.is_empty() {
            rng.random_range(0..h * w)
        } else {
            fg[rng.random_range(0..fg.len())]
        };
        let (cr, cc) = ((center / w) as i64, (center % w) as i64);
        for dr in -rad..=rad {
            for dc in -rad..=rad {
                if ((dr * dr + dc * dc) as f64) > r2 {
                    continue;
                }
                let (rr, c2) = (cr + dr, cc + dc);
                if rr >= 0 && c2 >= 0 && (rr as usize) < h && (c2 as usize) < w {
                    out.set(rr as usize, c2 as usize, BLACK);
                }
            }
        }
    }
}

fn add_noise(out: &mut Colormap, sigma: f64, seed: u64) {
    let mut rng = stream(seed, STREAM_NOISE);
    let normal = Normal::new(0.0, sigma).expect("sigma validated");
    for px in out.pixels_mut() {
        for v in px.iter_mut() {
            *v = (*v as f64 + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_entities() -> Colormap {
        let mut cm = Colormap::new(40, 40);
        for r in 0..40 {
            for c in 0..40 {
                let color = match (r / 20, c / 20) {
                    (0, 0) => [0, 0, 64],
                    (0, 1) => [255, 128, 0],
                    (1, 0) => [64, 192, 128],
                    _ => BLACK,
                };
                cm.set(r, c, color);
            }
        }
        cm
    }

    #[test]
    fn clean_profile_is_identity() {
        let cm = three_entities();
        assert_eq!(degrade(&cm, &DegradationProfile::clean()).unwrap(), cm);
    }

    #[test]
    fn noise_is_seeded() {
        let cm = three_entities();
        let p = DegradationProfile {
            gaussian_sigma: 5.0,
            ..DegradationProfile::clean().with_seed(42)
        };
        let a = degrade(&cm, &p).unwrap();
        assert_eq!(a, degrade(&cm, &p).unwrap());
        assert_ne!(a, cm);
        assert_ne!(a, degrade(&cm, &p.clone().with_seed(43)).unwrap());
    }

    #[test]
    fn blur_produces_intermediate_boundary_values() {
        let cm = three_entities();
        let p = DegradationProfile {
            boundary_blur_sigma: 1.5,
            ..DegradationProfile::clean()
        };
        let out = degrade(&cm, &p).unwrap();
        // Across the vertical boundary between (0,0,64) and (255,128,0) at row 10.
        for c in 18..22 {
            let px = out.get(10, c);
            assert!(px[0] > 0 && px[0] < 255, "col {c}: {px:?}");
            assert!(px[1] > 0 && px[1] < 128, "col {c}: {px:?}");
            assert!(px[2] > 0 && px[2] < 64, "col {c}: {px:?}");
        }
        // Interiors stay flat.
        assert_eq!(out.get(5, 5), [0, 0, 64]);
        assert_eq!(out.get(5, 30), [255, 128, 0]);
    }

    #[test]
    fn bleed_darkens_only_near_boundaries() {
        let cm = three_entities();
        let p = DegradationProfile {
            background_bleed_alpha: 0.5,
            ..DegradationProfile::clean()
        };
        let out = degrade(&cm, &p).unwrap();
        // Band is one pixel around boundary pixels when there is no blur.
        assert_eq!(out.get(10, 19), [0, 0, 32]);
        assert_eq!(out.get(10, 18), [0, 0, 32]);
        assert_eq!(out.get(10, 17), [0, 0, 64]);
        assert_eq!(out.get(10, 20), [128, 64, 0]);
        // Black pixels next to an entity stay black.
        assert_eq!(out.get(30, 20), BLACK);
        assert_eq!(out.get(5, 5), [0, 0, 64]);
        assert_eq!(out.get(30, 30), BLACK);
    }

    #[test]
    fn holes_are_black_discs() {
        let cm = three_entities();
        let p = DegradationProfile {
            hole_count: 2,
            hole_radius: 3.0,
            ..DegradationProfile::clean().with_seed(3)
        };
        let out = degrade(&cm, &p).unwrap();
        let new_black = out
            .pixels()
            .iter()
            .zip(cm.pixels())
            .filter(|(a, b)| **a == BLACK && **b != BLACK)
            .count();
        assert!(new_black > 0 && new_black <= 2 * 29);
    }

    #[test]
    fn confuser_moves_one_color_halfway() {
        let cm = three_entities();
        let p = DegradationProfile {
            confuser_pairs: 1,
            confuser_gamma: 0.5,
            ..DegradationProfile::clean().with_seed(1)
        };
        let out = degrade(&cm, &p).unwrap();
        let before = distinct_foreground_colors(&cm);
        let after = distinct_foreground_colors(&out);
        assert_eq!(after.len(), 3);
        let changed: Vec<_> = after.iter().filter(|c| !before.contains(c)).collect();
        assert_eq!(changed.len(), 1);
    }

    #[test]
    fn suite_shape() {
        let suite = standard_suite();
        assert_eq!(suite.len(), 5);
        let names: Vec<_> = suite.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["clean", "light", "medium", "heavy", "confuser"]);
        assert_eq!(suite[0], DegradationProfile::clean());
        assert_eq!(suite[2].gaussian_sigma, 8.0);
        assert_eq!(suite[4].confuser_gamma, 0.5);
        assert_eq!(suite[4].gaussian_sigma, 8.0);
        for p in &suite {
            p.validate().unwrap();
        }
    }

    #[test]
    fn invalid_profile() {
        let p = DegradationProfile {
            background_bleed_alpha: 1.5,
            ..DegradationProfile::clean()
        };
        assert!(degrade(&Colormap::new(2, 2), &p).is_err());
    }
}
