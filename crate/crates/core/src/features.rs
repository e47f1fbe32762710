//! Per-pixel RGB + LAB feature vectors used by the decoder.

use serde::{Deserialize, Serialize};

use crate::color::srgb_to_lab;
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, Colormap, Rgb};

/// `(R, G, B, L, a, b)`; components outside the selected [`FeatureSpace`] are zero.
pub type Feature = [f32; 6];

#[inline]
pub fn sq_dist(a: &Feature, b: &Feature) -> f32 {
    let mut s = 0.0;
    for i in 0..6 {
        let d = a[i] - b[i];
        s += d * d;
    }
    s
}

/// Which color components enter the feature vector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureSpace {
    #[serde(rename = "rgb")]
    Rgb,
    #[serde(rename = "lab")]
    Lab,
    #[default]
    #[serde(rename = "rgb+lab")]
    RgbLab,
}

impl FeatureSpace {
    pub const ALL: [FeatureSpace; 3] = [Self::Rgb, Self::Lab, Self::RgbLab];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rgb => "rgb",
            Self::Lab => "lab",
            Self::RgbLab => "rgb+lab",
        }
    }

    fn uses_rgb(self) -> bool {
        matches!(self, Self::Rgb | Self::RgbLab)
    }

    fn uses_lab(self) -> bool {
        matches!(self, Self::Lab | Self::RgbLab)
    }
}

impl std::fmt::Display for FeatureSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FeatureSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rgb" => Ok(Self::Rgb),
            "lab" => Ok(Self::Lab),
            "rgb+lab" | "rgblab" => Ok(Self::RgbLab),
            other => Err(Error::InvalidParameter(format!("unknown feature space {other:?}"))),
        }
    }
}

/// Numeric scale of the feature components.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureScaling {
    /// RGB in `0..=255`, L in `0..=100`, a/b in their native signed range.
    #[default]
    Native,
    /// Native values divided by [`REDUCED_DIVISOR`]. Per-channel noise of
    /// σ = 8 then averages below 10 for every palette color while distinct
    /// palette colors stay far apart.
    Reduced,
    /// Every component mapped into `[0, 1]`.
    Unit,
}

pub const REDUCED_DIVISOR: f32 = 6.0;

impl FeatureScaling {
    pub fn name(self) -> &'static str {
        match self {
            Self::Native => "native",
            Self::Reduced => "reduced",
            Self::Unit => "unit",
        }
    }
}

impl std::str::FromStr for FeatureScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "native" => Ok(Self::Native),
            "reduced" => Ok(Self::Reduced),
            "unit" => Ok(Self::Unit),
            other => Err(Error::InvalidParameter(format!("unknown feature scaling {other:?}"))),
        }
    }
}

/// Feature vector of one color.
pub fn pixel_feature(rgb: Rgb, space: FeatureSpace, scaling: FeatureScaling) -> Feature {
    let mut f = [0.0f32; 6];
    if space.uses_rgb() {
        for i in 0..3 {
            f[i] = match scaling {
                FeatureScaling::Native => rgb[i] as f32,
                FeatureScaling::Reduced => rgb[i] as f32 / REDUCED_DIVISOR,
                FeatureScaling::Unit => rgb[i] as f32 / 255.0,
            };
        }
    }
    if space.uses_lab() {
        let lab = srgb_to_lab(rgb);
        let (l, a, b) = match scaling {
            FeatureScaling::Native => (lab.l, lab.a, lab.b),
            FeatureScaling::Reduced => {
                let k = REDUCED_DIVISOR as f64;
                (lab.l / k, lab.a / k, lab.b / k)
            }
            FeatureScaling::Unit => (lab.l / 100.0, (lab.a + 128.0) / 255.0, (lab.b + 128.0) / 255.0),
        };
        f[3] = l as f32;
        f[4] = a as f32;
        f[5] = b as f32;
    }
    f
}

/// Features of the pixels in a region of interest.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    roi: Vec<u32>,
    vectors: Vec<Feature>,
    space: FeatureSpace,
    scaling: FeatureScaling,
}

impl FeatureMap {
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// Canvas indices of the ROI pixels, ascending. Position `i` here matches
    /// `vectors()[i]`.
    pub fn roi(&self) -> &[u32] {
        &self.roi
    }

    pub fn vectors(&self) -> &[Feature] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.roi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roi.is_empty()
    }

    pub fn space(&self) -> FeatureSpace {
        self.space
    }

    pub fn scaling(&self) -> FeatureScaling {
        self.scaling
    }
}

/// Builds one feature vector per ROI pixel; `roi = None` means the whole canvas.
pub fn build_features(
    colormap: &Colormap,
    roi: Option<&BinaryMask>,
    space: FeatureSpace,
    scaling: FeatureScaling,
) -> Result<FeatureMap> {
    let (h, w) = colormap.dims();
    let roi: Vec<u32> = match roi {
        Some(mask) => {
            if mask.dims() != (h, w) {
                return Err(Error::DimensionMismatch {
                    expected: (h, w),
                    actual: mask.dims(),
                });
            }
            mask.indices()
        }
        None => (0..(h * w) as u32).collect(),
    };
    if roi.is_empty() {
        return Err(Error::EmptyRoi);
    }

    // Colormaps repeat colors heavily; memoize the LAB conversion per color.
    let mut cache: std::collections::HashMap<Rgb, Feature> = std::collections::HashMap::new();
    let pixels = colormap.pixels();
    let vectors = roi
        .iter()
        .map(|&i| {
            let rgb = pixels[i as usize];
            *cache
                .entry(rgb)
                .or_insert_with(|| pixel_feature(rgb, space, scaling))
        })
        .collect();

    Ok(FeatureMap {
        height: h,
        width: w,
        roi,
        vectors,
        space,
        scaling,
    })
}
