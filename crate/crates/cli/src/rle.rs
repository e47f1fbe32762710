//! COCO-style run-length encoding.
//!
//! Runs alternate background/foreground in column-major order, starting with
//! a (possibly empty) background run. Counts are either a plain list or the
//! compact string form used by COCO annotation files.

use segcodec_core::{BinaryMask, EntityMaskSet};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Counts {
    List(Vec<u64>),
    Compact(String),
}

/// `size` is `[height, width]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    pub size: [usize; 2],
    pub counts: Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub segmentation: Rle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RleDocument {
    pub height: usize,
    pub width: usize,
    pub annotations: Vec<Annotation>,
}

pub fn mask_runs(mask: &BinaryMask) -> Vec<u64> {
    let (h, w) = mask.dims();
    let mut runs = Vec::new();
    let mut current = false;
    let mut len = 0u64;
    for c in 0..w {
        for r in 0..h {
            let v = mask.get(r, c);
            if v != current {
                runs.push(len);
                current = v;
                len = 0;
            }
            len += 1;
        }
    }
    runs.push(len);
    runs
}

pub fn runs_to_mask(height: usize, width: usize, runs: &[u64]) -> CliResult<BinaryMask> {
    let total: u64 = runs.iter().sum();
    if total != (height * width) as u64 {
        return Err(CliError::BadInput(format!(
            "RLE counts sum to {total}, expected {}",
            height * width
        )));
    }
    let mut mask = BinaryMask::new(height, width);
    let mut pos = 0usize;
    for (i, &run) in runs.iter().enumerate() {
        let run = run as usize;
        if i % 2 == 1 {
            for p in pos..pos + run {
                mask.set(p % height, p / height, true);
            }
        }
        pos += run;
    }
    Ok(mask)
}

/// Compact string form: deltas against the count two back (from the third
/// on), six bits per character with a continuation flag, offset by 48.
pub fn compress_counts(runs: &[u64]) -> String {
    let mut s = String::new();
    for (i, &run) in runs.iter().enumerate() {
        let mut x = run as i64;
        if i > 2 {
            x -= runs[i - 2] as i64;
        }
        loop {
            let mut c = x & 0x1f;
            x >>= 5;
            let more = if c & 0x10 != 0 { x != -1 } else { x != 0 };
            if more {
                c |= 0x20;
            }
            s.push((c as u8 + 48) as char);
            if !more {
                break;
            }
        }
    }
    s
}

pub fn decompress_counts(s: &str) -> CliResult<Vec<u64>> {
    let bytes = s.as_bytes();
    let mut runs: Vec<u64> = Vec::new();
    let mut p = 0;
    while p < bytes.len() {
        let mut x = 0i64;
        let mut k = 0;
        loop {
            let c = match bytes.get(p) {
                Some(&b) if (48..48 + 64).contains(&b) => (b - 48) as i64,
                _ => return Err(CliError::BadInput("malformed compact RLE string".into())),
            };
            if k >= 12 {
                return Err(CliError::BadInput("compact RLE value too long".into()));
            }
            x |= (c & 0x1f) << (5 * k);
            p += 1;
            k += 1;
            if c & 0x20 == 0 {
                if c & 0x10 != 0 {
                    x |= -1i64 << (5 * k);
                }
                break;
            }
        }
        let m = runs.len();
        if m > 2 {
            x += runs[m - 2] as i64;
        }
        let run = u64::try_from(x).map_err(|_| CliError::BadInput("negative RLE count".into()))?;
        runs.push(run);
    }
    Ok(runs)
}

impl Rle {
    pub fn from_mask(mask: &BinaryMask, compact: bool) -> Self {
        let runs = mask_runs(mask);
        Self {
            size: [mask.height(), mask.width()],
            counts: if compact {
                Counts::Compact(compress_counts(&runs))
            } else {
                Counts::List(runs)
            },
        }
    }

    pub fn to_mask(&self) -> CliResult<BinaryMask> {
        let [h, w] = self.size;
        match &self.counts {
            Counts::List(runs) => runs_to_mask(h, w, runs),
            Counts::Compact(s) => runs_to_mask(h, w, &decompress_counts(s)?),
        }
    }
}

impl RleDocument {
    /// Entity `k` gets annotation id `k + 1`, matching its idmap id.
    pub fn from_masks(set: &EntityMaskSet, compact: bool) -> Self {
        let labels = set.labels();
        let annotations = set
            .masks()
            .iter()
            .enumerate()
            .map(|(k, m)| Annotation {
                id: k as u64 + 1,
                label: labels.map(|l| l[k].clone()),
                segmentation: Rle::from_mask(m, compact),
            })
            .collect();
        Self {
            height: set.height(),
            width: set.width(),
            annotations,
        }
    }

    /// Annotations are ordered by id; empty ones are skipped.
    pub fn to_masks(&self) -> CliResult<EntityMaskSet> {
        let mut anns: Vec<&Annotation> = self.annotations.iter().collect();
        anns.sort_by_key(|a| a.id);
        let mut masks = Vec::with_capacity(anns.len());
        let mut labels = Vec::with_capacity(anns.len());
        for a in anns {
            if a.segmentation.size != [self.height, self.width] {
                return Err(CliError::BadInput(format!(
                    "annotation {} has size {:?}, document is [{}, {}]",
                    a.id, a.segmentation.size, self.height, self.width
                )));
            }
            let m = a.segmentation.to_mask()?;
            if m.is_empty() {
                continue;
            }
            masks.push(m);
            labels.push(a.label.clone().unwrap_or_default());
        }
        let set = EntityMaskSet::new(self.height, self.width, masks)?;
        if labels.iter().any(|l| !l.is_empty()) {
            Ok(set.with_labels(labels)?)
        } else {
            Ok(set)
        }
    }
}
