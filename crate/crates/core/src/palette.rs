//! Location-aware palette and the mask → colormap encoder.
//!
//! The canvas is split into a `b × b` grid; every cell owns one color built
//! from five levels per channel. An entity is painted with the color of the
//! cell that contains its gravity center, so an entity's color depends only on
//! where it sits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, Colormap, EntityMaskSet, Rgb};

/// Admissible channel values.
pub const CHANNEL_LEVELS: [u8; 5] = [0, 64, 128, 192, 255];

/// Non-black colors available from [`CHANNEL_LEVELS`].
pub const MAX_COLORS: usize = 124;

/// Largest grid with `b * b <= 124`.
pub const MAX_GRID_SIZE: usize = 11;

pub const DEFAULT_GRID_SIZE: usize = MAX_GRID_SIZE;

/// Grid cell → color table, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    grid_size: usize,
    colors: Vec<Rgb>,
}

impl Palette {
    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn colors(&self) -> &[Rgb] {
        &self.colors
    }

    pub fn channel_levels(&self) -> &'static [u8; 5] {
        &CHANNEL_LEVELS
    }

    pub fn color(&self, cell: Cell) -> Rgb {
        self.colors[cell.row * self.grid_size + cell.col]
    }

    pub fn cell_of_index(&self, index: usize) -> Cell {
        Cell {
            row: index / self.grid_size,
            col: index % self.grid_size,
        }
    }

    /// Checks the table against the palette invariants; used after deserializing.
    pub fn validate(&self) -> Result<()> {
        let b = self.grid_size;
        if b == 0 || b > MAX_GRID_SIZE {
            return Err(Error::GridTooLarge(b));
        }
        if self.colors.len() != b * b {
            return Err(Error::InvalidParameter(format!(
                "palette has {} colors for a {b}x{b} grid",
                self.colors.len()
            )));
        }
        for (i, c) in self.colors.iter().enumerate() {
            if c.iter().any(|v| !CHANNEL_LEVELS.contains(v)) || *c == [0, 0, 0] {
                return Err(Error::InvalidParameter(format!(
                    "palette color {i} {c:?} is not an admissible non-black color"
                )));
            }
            if self.colors[..i].contains(c) {
                return Err(Error::InvalidParameter(format!(
                    "palette color {i} {c:?} is duplicated"
                )));
            }
        }
        Ok(())
    }
}

/// Cell `j` (row-major, 0-based) gets the color whose base-5 digits of `j + 1`
/// select a level per channel, most significant digit first (R, G, B).
pub fn build_palette(grid_size: usize) -> Result<Palette> {
    if grid_size == 0 || grid_size > MAX_GRID_SIZE {
        return Err(Error::GridTooLarge(grid_size));
    }
    let colors = (0..grid_size * grid_size)
        .map(|j| color_for_index(j + 1))
        .collect();
    Ok(Palette { grid_size, colors })
}

/// Maps `1..=124` to a palette color via base-5 digits.
pub fn color_for_index(index: usize) -> Rgb {
    debug_assert!((1..=MAX_COLORS).contains(&index));
    let level = |digit: usize| (64 * digit).min(255) as u8;
    [
        level(index / 25 % 5),
        level(index / 5 % 5),
        level(index % 5),
    ]
}

/// A grid cell position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

/// Mean `(row, col)` of the mask's foreground pixels.
pub fn center_of_mass(mask: &BinaryMask) -> Result<(f64, f64)> {
    let mut n = 0usize;
    let (mut sr, mut sc) = (0.0f64, 0.0f64);
    for (r, c) in mask.foreground() {
        n += 1;
        sr += r as f64;
        sc += c as f64;
    }
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((sr / n as f64, sc / n as f64))
}

/// `floor(coord * b / extent)`, clamped to the grid.
pub fn locate_cell(center: (f64, f64), canvas: (usize, usize), grid_size: usize) -> Cell {
    let axis = |v: f64, extent: usize| {
        let idx = (v * grid_size as f64 / extent as f64).floor();
        if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(grid_size - 1)
        }
    };
    Cell {
        row: axis(center.0, canvas.0),
        col: axis(center.1, canvas.1),
    }
}

/// What to do when several entities land in one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollisionPolicy {
    /// Colliding entities share the cell color.
    #[default]
    Share,
    /// Later colliders move to the nearest unoccupied cell.
    NearestFree,
}

impl std::str::FromStr for CollisionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "share" => Ok(Self::Share),
            "nearest-free" => Ok(Self::NearestFree),
            other => Err(Error::InvalidParameter(format!(
                "unknown collision policy {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub entity: usize,
    /// Cell holding the gravity center.
    pub center_cell: Cell,
    /// Cell whose color was used; differs from `center_cell` only after a
    /// `nearest-free` reassignment.
    pub cell: Cell,
    pub color: Rgb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeReport {
    pub grid_size: usize,
    pub assignments: Vec<Assignment>,
    /// Entity index groups whose gravity centers fell in the same cell.
    pub collisions: Vec<Vec<usize>>,
    /// Fraction of entities painted with a color no other entity uses.
    pub coverage_ratio: f64,
}

/// Paints every entity with its palette color on a black canvas.
pub fn encode(
    masks: &EntityMaskSet,
    palette: &Palette,
    policy: CollisionPolicy,
) -> Result<(Colormap, EncodeReport)> {
    let (h, w) = masks.dims();
    if h == 0 || w == 0 {
        return Err(Error::InvalidParameter("canvas must be non-empty".into()));
    }
    let b = palette.grid_size;
    let cells = b * b;
    if policy == CollisionPolicy::NearestFree && masks.len() > cells {
        return Err(Error::PaletteExhausted {
            entities: masks.len(),
            cells,
        });
    }

    let center_cells = masks
        .masks()
        .iter()
        .map(|m| center_of_mass(m).map(|c| locate_cell(c, (h, w), b)))
        .collect::<Result<Vec<_>>>()?;

    let mut occupants: Vec<Vec<usize>> = vec![Vec::new(); cells];
    for (k, cell) in center_cells.iter().enumerate() {
        occupants[cell.row * b + cell.col].push(k);
    }
    let collisions: Vec<Vec<usize>> = occupants.iter().filter(|o| o.len() > 1).cloned().collect();

    let used_cells: Vec<Cell> = match policy {
        CollisionPolicy::Share => center_cells.clone(),
        CollisionPolicy::NearestFree => {
            let mut taken = vec![false; cells];
            let mut out = Vec::with_capacity(center_cells.len());
            for &cell in &center_cells {
                let chosen = if !taken[cell.row * b + cell.col] {
                    cell
                } else {
                    nearest_free(cell, &taken, b).ok_or(Error::PaletteExhausted {
                        entities: masks.len(),
                        cells,
                    })?
                };
                taken[chosen.row * b + chosen.col] = true;
                out.push(chosen);
            }
            out
        }
    };

    let mut use_count = vec![0usize; cells];
    for c in &used_cells {
        use_count[c.row * b + c.col] += 1;
    }
    let unique = used_cells
        .iter()
        .filter(|c| use_count[c.row * b + c.col] == 1)
        .count();
    let coverage_ratio = if masks.is_empty() {
        1.0
    } else {
        unique as f64 / masks.len() as f64
    };

    let mut colormap = Colormap::new(h, w);
    let mut assignments = Vec::with_capacity(masks.len());
    for (k, mask) in masks.masks().iter().enumerate() {
        let color = palette.color(used_cells[k]);
        paint(&mut colormap, mask, color);
        assignments.push(Assignment {
            entity: k,
            center_cell: center_cells[k],
            cell: used_cells[k],
            color,
        });
    }

    Ok((
        colormap,
        EncodeReport {
            grid_size: b,
            assignments,
            collisions,
            coverage_ratio,
        },
    ))
}

fn nearest_free(from: Cell, taken: &[bool], b: usize) -> Option<Cell> {
    let mut best: Option<(usize, Cell)> = None;
    for idx in 0..b * b {
        if taken[idx] {
            continue;
        }
        let cell = Cell {
            row: idx / b,
            col: idx % b,
        };
        let dr = cell.row.abs_diff(from.row);
        let dc = cell.col.abs_diff(from.col);
        let d2 = dr * dr + dc * dc;
        // Strict comparison keeps the first (row-major) cell on ties.
        if best.is_none_or(|(bd, _)| d2 < bd) {
            best = Some((d2, cell));
        }
    }
    best.map(|(_, c)| c)
}

pub(crate) fn paint(colormap: &mut Colormap, mask: &BinaryMask, color: Rgb) {
    for (px, &bit) in colormap.pixels_mut().iter_mut().zip(mask.bits()) {
        if bit {
            *px = color;
        }
    }
}
