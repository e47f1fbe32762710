//! Raster types shared by the codec: binary masks, entity mask sets, id maps
//! and colormaps.
//!
//! All rasters are row-major with `(row, col)` addressing. Pixel centers sit at
//! integer coordinates.

use crate::error::{Error, Result};

/// A binary H×W raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![false; height * width],
        }
    }

    pub fn filled(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            bits: vec![true; height * width],
        }
    }

    pub fn from_bits(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != height * width {
            return Err(Error::BufferSize {
                expected: height * width,
                actual: bits.len(),
            });
        }
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    /// Builds a mask from a list of flat pixel indices.
    pub fn from_indices(height: usize, width: usize, indices: &[u32]) -> Self {
        let mut mask = Self::new(height, width);
        for &i in indices {
            mask.bits[i as usize] = true;
        }
        mask
    }

    /// Builds a mask with the given `(row, col)` pixels set.
    pub fn from_pixels(height: usize, width: usize, pixels: &[(usize, usize)]) -> Self {
        let mut mask = Self::new(height, width);
        for &(r, c) in pixels {
            mask.set(r, c, true);
        }
        mask
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Flat indices of foreground pixels, ascending.
    pub fn indices(&self) -> Vec<u32> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// `(row, col)` of every foreground pixel in row-major order.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / w, i % w))
    }

    /// Tight bounding box of the foreground as half-open `[x0, y0, x1, y1]`.
    pub fn bbox(&self) -> Option<BBox> {
        let mut bbox: Option<BBox> = None;
        for (r, c) in self.foreground() {
            let b = bbox.get_or_insert(BBox {
                x0: c,
                y0: r,
                x1: c + 1,
                y1: r + 1,
            });
            b.x0 = b.x0.min(c);
            b.y0 = b.y0.min(r);
            b.x1 = b.x1.max(c + 1);
            b.y1 = b.y1.max(r + 1);
        }
        bbox
    }

    /// 4-connected binary erosion; pixels on the canvas border are eroded.
    pub fn eroded(&self) -> Self {
        let (h, w) = self.dims();
        let mut out = Self::new(h, w);
        for r in 0..h {
            for c in 0..w {
                if !self.get(r, c) || r == 0 || c == 0 || r + 1 == h || c + 1 == w {
                    continue;
                }
                let keep = self.get(r - 1, c)
                    && self.get(r + 1, c)
                    && self.get(r, c - 1)
                    && self.get(r, c + 1);
                out.set(r, c, keep);
            }
        }
        out
    }
}

/// Axis-aligned box in pixel coordinates, half-open: columns `x0..x1`, rows `y0..y1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl BBox {
    pub fn new(x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    pub fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    pub fn area(&self) -> usize {
        self.width() * self.height()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }
}

/// An ordered set of pairwise-disjoint, nonempty entity masks on one canvas.
///
/// Entity order matters: it drives palette assignment, and ids in the matching
/// [`IdMap`] are `index + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityMaskSet {
    height: usize,
    width: usize,
    masks: Vec<BinaryMask>,
    labels: Option<Vec<String>>,
}

impl EntityMaskSet {
    /// Validates dimensions, non-emptiness and disjointness.
    pub fn new(height: usize, width: usize, masks: Vec<BinaryMask>) -> Result<Self> {
        masks_to_idmap(height, width, &masks)?;
        Ok(Self {
            height,
            width,
            masks,
            labels: None,
        })
    }

    pub fn empty(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            masks: Vec::new(),
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.masks.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} masks",
                labels.len(),
                self.masks.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn into_masks(self) -> Vec<BinaryMask> {
        self.masks
    }

    pub fn foreground_count(&self) -> usize {
        self.masks.iter().map(BinaryMask::count).sum()
    }

    pub fn to_idmap(&self) -> IdMap {
        masks_to_idmap(self.height, self.width, &self.masks)
            .expect("EntityMaskSet invariants guarantee a valid id map")
    }

    /// Union bounding box over all entities.
    pub fn bbox(&self) -> Option<BBox> {
        self.masks
            .iter()
            .filter_map(BinaryMask::bbox)
            .reduce(|a, b| BBox {
                x0: a.x0.min(b.x0),
                y0: a.y0.min(b.y0),
                x1: a.x1.max(b.x1),
                y1: a.y1.max(b.y1),
            })
    }
}

/// H×W raster of 16-bit entity ids, 0 = background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    height: usize,
    width: usize,
    ids: Vec<u16>,
}

impl IdMap {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            ids: vec![0; height * width],
        }
    }

    pub fn from_ids(height: usize, width: usize, ids: Vec<u16>) -> Result<Self> {
        if ids.len() != height * width {
            return Err(Error::BufferSize {
                expected: height * width,
                actual: ids.len(),
            });
        }
        Ok(Self { height, width, ids })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn ids(&self) -> &[u16] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.ids[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, id: u16) {
        self.ids[row * self.width + col] = id;
    }

    /// Distinct nonzero ids, ascending.
    pub fn distinct_ids(&self) -> Vec<u16> {
        let mut seen = vec![false; u16::MAX as usize + 1];
        for &id in &self.ids {
            seen[id as usize] = true;
        }
        (1..=u16::MAX).filter(|&id| seen[id as usize]).collect()
    }
}

/// Stacks disjoint masks into an id map: pixel `p` gets id `k` iff mask `k - 1`
/// covers it.
pub fn masks_to_idmap(height: usize, width: usize, masks: &[BinaryMask]) -> Result<IdMap> {
    if masks.len() > u16::MAX as usize {
        return Err(Error::InvalidParameter(format!(
            "{} entities exceed the 16-bit id range",
            masks.len()
        )));
    }
    let mut map = IdMap::new(height, width);
    for (k, mask) in masks.iter().enumerate() {
        if mask.dims() != (height, width) {
            return Err(Error::DimensionMismatch {
                expected: (height, width),
                actual: mask.dims(),
            });
        }
        let mut any = false;
        for (i, &bit) in mask.bits.iter().enumerate() {
            if !bit {
                continue;
            }
            any = true;
            let prev = map.ids[i];
            if prev != 0 {
                return Err(Error::Overlap {
                    row: i / width,
                    col: i % width,
                    first: prev as usize - 1,
                    second: k,
                });
            }
            map.ids[i] = k as u16 + 1;
        }
        if !any {
            return Err(Error::EmptyEntity { index: k });
        }
    }
    Ok(map)
}

/// One mask per distinct nonzero id, ordered by ascending id.
pub fn idmap_to_masks(map: &IdMap) -> EntityMaskSet {
    let ids = map.distinct_ids();
    let mut slot = vec![usize::MAX; u16::MAX as usize + 1];
    for (k, &id) in ids.iter().enumerate() {
        slot[id as usize] = k;
    }
    let mut masks: Vec<BinaryMask> = ids
        .iter()
        .map(|_| BinaryMask::new(map.height, map.width))
        .collect();
    for (i, &id) in map.ids.iter().enumerate() {
        if id != 0 {
            masks[slot[id as usize]].bits[i] = true;
        }
    }
    EntityMaskSet {
        height: map.height,
        width: map.width,
        masks,
        labels: None,
    }
}

pub type Rgb = [u8; 3];

pub const BLACK: Rgb = [0, 0, 0];

/// H×W raster of 8-bit RGB triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Colormap {
    height: usize,
    width: usize,
    pixels: Vec<Rgb>,
}

impl Colormap {
    /// All-black canvas.
    pub fn new(height: usize, width: usize) -> Self {
        Self::filled(height, width, BLACK)
    }

    pub fn filled(height: usize, width: usize, color: Rgb) -> Self {
        Self {
            height,
            width,
            pixels: vec![color; height * width],
        }
    }

    pub fn from_pixels(height: usize, width: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if pixels.len() != height * width {
            return Err(Error::BufferSize {
                expected: height * width,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Rgb {
        self.pixels[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, color: Rgb) {
        self.pixels[row * self.width + col] = color;
    }

    /// Interleaved `r, g, b` bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }

    pub fn from_bytes(height: usize, width: usize, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != height * width * 3 {
            return Err(Error::BufferSize {
                expected: height * width * 3,
                actual: bytes.len(),
            });
        }
        let pixels = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Self {
            height,
            width,
            pixels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_set_gives_zero_map() {
        let map = masks_to_idmap(4, 4, &[]).unwrap();
        assert!(map.ids().iter().all(|&id| id == 0));
        assert_eq!(idmap_to_masks(&map).len(), 0);
    }

    #[test]
    fn disjoint_single_pixels() {
        let a = BinaryMask::from_pixels(4, 4, &[(0, 0)]);
        let b = BinaryMask::from_pixels(4, 4, &[(1, 1)]);
        let map = masks_to_idmap(4, 4, &[a, b]).unwrap();
        assert_eq!(map.get(0, 0), 1);
        assert_eq!(map.get(1, 1), 2);
        assert_eq!(map.ids().iter().filter(|&&id| id != 0).count(), 2);
    }

    #[test]
    fn overlap_is_reported() {
        let a = BinaryMask::from_pixels(4, 4, &[(0, 0), (2, 2)]);
        let b = BinaryMask::from_pixels(4, 4, &[(2, 2), (3, 3)]);
        let err = masks_to_idmap(4, 4, &[a.clone(), b.clone()]).unwrap_err();
        assert_eq!(
            err,
            Error::Overlap {
                row: 2,
                col: 2,
                first: 0,
                second: 1
            }
        );
        assert!(EntityMaskSet::new(4, 4, vec![a, b]).is_err());
    }

    #[test]
    fn empty_entity_rejected() {
        let err = EntityMaskSet::new(3, 3, vec![BinaryMask::new(3, 3)]).unwrap_err();
        assert_eq!(err, Error::EmptyEntity { index: 0 });
    }

    #[test]
    fn wrong_dims_rejected() {
        let err = EntityMaskSet::new(3, 3, vec![BinaryMask::filled(3, 4)]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn sparse_ids_are_ordered() {
        let mut map = IdMap::new(3, 3);
        map.set(0, 0, 7);
        map.set(2, 2, 3);
        map.set(1, 1, 7);
        let set = idmap_to_masks(&map);
        assert_eq!(set.len(), 2);
        assert_eq!(set.masks()[0].indices(), vec![8]);
        assert_eq!(set.masks()[1].indices(), vec![0, 4]);
    }

    #[test]
    fn bbox_is_half_open() {
        let m = BinaryMask::from_pixels(10, 10, &[(2, 3), (5, 4)]);
        assert_eq!(m.bbox(), Some(BBox::new(3, 2, 5, 6)));
        assert_eq!(BinaryMask::new(2, 2).bbox(), None);
    }

    fn arb_idmap() -> impl Strategy<Value = IdMap> {
        (1usize..12, 1usize..12).prop_flat_map(|(h, w)| {
            proptest::collection::vec(prop_oneof![3 => Just(0u16), 1 => 1u16..6], h * w)
                .prop_map(move |ids| IdMap::from_ids(h, w, ids).unwrap())
        })
    }

    proptest! {
        #[test]
        fn idmap_round_trip(map in arb_idmap()) {
            let set = idmap_to_masks(&map);
            let back = set.to_idmap();
            // Same support and same partition, ids renumbered densely.
            let distinct = map.distinct_ids();
            for (i, &id) in map.ids().iter().enumerate() {
                let expected = distinct.iter().position(|&d| d == id).map_or(0, |k| k as u16 + 1);
                prop_assert_eq!(back.ids()[i], expected);
            }
            let fg = map.ids().iter().filter(|&&id| id != 0).count();
            prop_assert_eq!(set.foreground_count(), fg);
            prop_assert_eq!(idmap_to_masks(&back), set);
        }
    }
}
