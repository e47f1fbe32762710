//! PNG codecs for the raster types and atomic file output.
//!
//! IdMaps are 16-bit grayscale (id 0 is background), colormaps are 8-bit RGB
//! without alpha, coarse masks are 8-bit grayscale with 0 and 255.

use std::fs;
use std::io::{Cursor, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb as RgbPixel};
use segcodec_core::{BinaryMask, Colormap, IdMap};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::BadInput(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| CliError::Internal(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Internal(format!("serializing JSON: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn load_png(bytes: &[u8]) -> CliResult<DynamicImage> {
    image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| CliError::BadInput(format!("malformed PNG: {e}")))
}

fn dims(width: u32, height: u32) -> (usize, usize) {
    (height as usize, width as usize)
}

fn encode_png<P, C>(buffer: ImageBuffer<P, C>) -> CliResult<Vec<u8>>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    let mut out = Cursor::new(Vec::new());
    buffer
        .write_with_encoder(PngEncoder::new(&mut out))
        .map_err(|e| CliError::Internal(format!("encoding PNG: {e}")))?;
    Ok(out.into_inner())
}

fn raster_size(height: usize, width: usize) -> CliResult<(u32, u32)> {
    match (u32::try_from(width), u32::try_from(height)) {
        (Ok(w), Ok(h)) if w > 0 && h > 0 => Ok((w, h)),
        _ => Err(CliError::BadInput(format!("cannot store a {height}x{width} raster as PNG"))),
    }
}

/// Accepts 16-bit grayscale; 8-bit grayscale is widened.
pub fn decode_idmap(bytes: &[u8]) -> CliResult<IdMap> {
    let img = load_png(bytes)?;
    let (h, w) = dims(img.width(), img.height());
    let ids = match img {
        DynamicImage::ImageLuma16(buf) => buf.into_raw(),
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(u16::from).collect(),
        other => {
            return Err(CliError::BadInput(format!(
                "idmap must be a grayscale PNG, got {:?}",
                other.color()
            )))
        }
    };
    Ok(IdMap::from_ids(h, w, ids)?)
}

pub fn encode_idmap(map: &IdMap) -> CliResult<Vec<u8>> {
    let (w, h) = raster_size(map.height(), map.width())?;
    let buf = ImageBuffer::<Luma<u16>, _>::from_raw(w, h, map.ids().to_vec())
        .ok_or_else(|| CliError::Internal("idmap buffer size".into()))?;
    encode_png(buf)
}

/// Accepts 8-bit RGB; 8-bit gray and RGBA are converted, alpha dropped.
pub fn decode_colormap(bytes: &[u8]) -> CliResult<Colormap> {
    let img = load_png(bytes)?;
    let (h, w) = dims(img.width(), img.height());
    let rgb = match img {
        DynamicImage::ImageRgb8(buf) => buf,
        img @ (DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_)) => {
            img.to_rgb8()
        }
        other => {
            return Err(CliError::BadInput(format!(
                "colormap must be an 8-bit PNG, got {:?}",
                other.color()
            )))
        }
    };
    Ok(Colormap::from_bytes(h, w, rgb.as_raw())?)
}

pub fn encode_colormap(cm: &Colormap) -> CliResult<Vec<u8>> {
    let (w, h) = raster_size(cm.height(), cm.width())?;
    let buf = ImageBuffer::<RgbPixel<u8>, _>::from_raw(w, h, cm.to_bytes())
        .ok_or_else(|| CliError::Internal("colormap buffer size".into()))?;
    encode_png(buf)
}

/// Any nonzero gray level is foreground.
pub fn decode_mask(bytes: &[u8]) -> CliResult<BinaryMask> {
    let img = load_png(bytes)?;
    let (h, w) = dims(img.width(), img.height());
    let bits = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| v != 0).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| v != 0).collect(),
        other => {
            return Err(CliError::BadInput(format!(
                "mask must be a grayscale PNG, got {:?}",
                other.color()
            )))
        }
    };
    Ok(BinaryMask::from_bits(h, w, bits)?)
}

pub fn encode_mask(mask: &BinaryMask) -> CliResult<Vec<u8>> {
    let (w, h) = raster_size(mask.height(), mask.width())?;
    let raw = mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }).collect();
    let buf = ImageBuffer::<Luma<u8>, Vec<u8>>::from_raw(w, h, raw)
        .ok_or_else(|| CliError::Internal("mask buffer size".into()))?;
    encode_png(buf)
}
