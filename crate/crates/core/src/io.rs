//! Ray-map and ST-map files.
//!
//! Maps are stored as three-channel 32-bit float images, OpenEXR (`.exr`)
//! or portable float map (`.pfm`), next to a `<name>.lens.json` sidecar
//! holding the dimensions and the lens the map was generated from.
//!
//! - ST-map channels: `s`, `t`, mask (1 valid, 0 masked).
//! - Ray-map channels: `gx`, `gy`, `gz`; masked rays are the zero vector.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageFormat, Rgb};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapgen::{RayMap, StMap};
use crate::profile::LensDoc;
use crate::projection::IncidentRay;

const SIDECAR_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MapKind {
    Stmap,
    Raymap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    version: u32,
    kind: MapKind,
    width: usize,
    height: usize,
    lens: LensDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_aov_rad: Option<f64>,
    /// Informational only; the radian value is authoritative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference_aov_deg: Option<f64>,
}

/// `dir/name.exr` → `dir/name.lens.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("lens.json")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FloatFormat {
    Exr,
    Pfm,
}

fn float_format(path: &Path) -> Result<FloatFormat> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .as_deref()
    {
        Some("exr") => Ok(FloatFormat::Exr),
        Some("pfm") => Ok(FloatFormat::Pfm),
        _ => Err(Error::format(path, "map files must end in .exr or .pfm")),
    }
}

/// Writes a three-channel float image, row 0 at the top.
pub fn write_float_image(path: &Path, width: usize, height: usize, pixels: &[[f32; 3]]) -> Result<()> {
    assert_eq!(pixels.len(), width * height);
    match float_format(path)? {
        FloatFormat::Exr => {
            let flat: Vec<f32> = pixels.iter().flatten().copied().collect();
            let img: ImageBuffer<Rgb<f32>, Vec<f32>> =
                ImageBuffer::from_raw(width as u32, height as u32, flat).expect("buffer size matches");
            DynamicImage::ImageRgb32F(img)
                .save_with_format(path, ImageFormat::OpenExr)
                .map_err(|e| match e {
                    image::ImageError::IoError(io) => Error::io(path, io),
                    other => Error::format(path, other.to_string()),
                })
        }
        FloatFormat::Pfm => fs::write(path, encode_pfm(width, height, pixels)).map_err(|e| Error::io(path, e)),
    }
}

/// Reads a float image written by [`write_float_image`] (or any RGB EXR/PFM).
pub fn read_float_image(path: &Path) -> Result<(usize, usize, Vec<[f32; 3]>)> {
    match float_format(path)? {
        FloatFormat::Exr => {
            let img = image::open(path).map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(path, io),
                other => Error::format(path, other.to_string()),
            })?;
            let rgb = img.into_rgb32f();
            let (w, h) = rgb.dimensions();
            Ok((w as usize, h as usize, rgb.pixels().map(|p| p.0).collect()))
        }
        FloatFormat::Pfm => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            decode_pfm(&bytes).map_err(|msg| Error::format(path, msg))
        }
    }
}

/// Color PFM, little-endian, rows stored bottom to top.
pub fn encode_pfm(width: usize, height: usize, pixels: &[[f32; 3]]) -> Vec<u8> {
    let mut out = format!("PF\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(width * height * 12);
    for row in pixels.chunks(width).rev() {
        for px in row {
            for v in px {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8]) -> std::result::Result<(usize, usize, Vec<[f32; 3]>), String> {
    // Header: four whitespace-separated tokens, then a single whitespace byte.
    let mut pos = 0;
    let mut tokens = Vec::with_capacity(4);
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(format!("byte {pos}: header ends early"));
        }
        tokens.push((start, String::from_utf8_lossy(&bytes[start..pos]).into_owned()));
    }
    pos += 1;
    let (at, magic) = &tokens[0];
    if magic != "PF" {
        return Err(format!("byte {at}: expected color PFM magic \"PF\", found {magic:?}"));
    }
    let number = |i: usize| -> std::result::Result<usize, String> {
        let (at, t) = &tokens[i];
        t.parse().map_err(|_| format!("byte {at}: bad dimension {t:?}"))
    };
    let (width, height) = (number(1)?, number(2)?);
    let (at, scale) = &tokens[3];
    let scale: f32 = scale
        .parse()
        .map_err(|_| format!("byte {at}: bad scale {scale:?}"))?;
    let little = scale < 0.0;
    let expected = width * height * 12;
    let data = bytes.get(pos..).unwrap_or_default();
    if data.len() != expected {
        return Err(format!(
            "byte {pos}: expected {expected} bytes of pixel data for {width}×{height}, found {}",
            data.len()
        ));
    }
    let mut rows: Vec<Vec<[f32; 3]>> = data
        .chunks_exact(width.max(1) * 12)
        .map(|row| {
            row.chunks_exact(12)
                .map(|px| {
                    let mut c = [0.0f32; 3];
                    for (i, v) in px.chunks_exact(4).enumerate() {
                        let b: [u8; 4] = v.try_into().expect("4 bytes");
                        c[i] = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
                    }
                    c
                })
                .collect()
        })
        .collect();
    rows.reverse();
    Ok((width, height, rows.into_iter().flatten().collect()))
}

fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<()> {
    let side = sidecar_path(path);
    let mut text = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    text.push('\n');
    fs::write(&side, text).map_err(|e| Error::io(side, e))
}

fn read_sidecar(path: &Path, kind: MapKind) -> Result<Sidecar> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| {
        Error::format(&side, format!("line {} column {}: {e}", e.line(), e.column()))
    })?;
    if sidecar.version != SIDECAR_VERSION {
        return Err(Error::format(&side, format!("unsupported version {}", sidecar.version)));
    }
    if sidecar.kind != kind {
        return Err(Error::format(&side, format!("describes a {:?}, not a {kind:?}", sidecar.kind)));
    }
    Ok(sidecar)
}

fn check_dimensions(path: &Path, sidecar: &Sidecar, width: usize, height: usize) -> Result<()> {
    if (width, height) != (sidecar.width, sidecar.height) {
        return Err(Error::format(
            path,
            format!(
                "image is {width}×{height} but its sidecar says {}×{}",
                sidecar.width, sidecar.height
            ),
        ));
    }
    Ok(())
}

pub fn write_stmap(map: &StMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let pixels: Vec<[f32; 3]> = map
        .coords()
        .iter()
        .zip(map.mask())
        .map(|(&[s, t], &valid)| if valid { [s, t, 1.0] } else { [0.0, 0.0, 0.0] })
        .collect();
    write_float_image(path, map.width(), map.height(), &pixels)?;
    write_sidecar(
        path,
        &Sidecar {
            version: SIDECAR_VERSION,
            kind: MapKind::Stmap,
            width: map.width(),
            height: map.height(),
            lens: LensDoc::from(map.lens()),
            reference_aov_rad: Some(map.reference_aov()),
            reference_aov_deg: Some(map.reference_aov().to_degrees()),
        },
    )
}

pub fn read_stmap(path: impl AsRef<Path>) -> Result<StMap> {
    let path = path.as_ref();
    let sidecar = read_sidecar(path, MapKind::Stmap)?;
    let (width, height, pixels) = read_float_image(path)?;
    check_dimensions(path, &sidecar, width, height)?;
    let mut coords = Vec::with_capacity(pixels.len());
    let mut mask = Vec::with_capacity(pixels.len());
    for (i, &[s, t, m]) in pixels.iter().enumerate() {
        let valid = match m {
            1.0 => true,
            0.0 => false,
            m => {
                return Err(Error::format(
                    path,
                    format!("pixel ({}, {}): mask value {m} is neither 0 nor 1", i % width, i / width),
                ))
            }
        };
        coords.push(if valid { [s, t] } else { [0.0, 0.0] });
        mask.push(valid);
    }
    let lens = sidecar.lens.to_params()?;
    let aov = sidecar
        .reference_aov_rad
        .ok_or_else(|| Error::format(sidecar_path(path), "missing reference_aov_rad"))?;
    StMap::from_parts(width, height, coords, mask, aov, lens)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_raymap(map: &RayMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let pixels: Vec<[f32; 3]> = map
        .rays()
        .iter()
        .map(|g| match g.direction() {
            Some([x, y, z]) => [x as f32, y as f32, z as f32],
            None => [0.0; 3],
        })
        .collect();
    write_float_image(path, map.width(), map.height(), &pixels)?;
    write_sidecar(
        path,
        &Sidecar {
            version: SIDECAR_VERSION,
            kind: MapKind::Raymap,
            width: map.width(),
            height: map.height(),
            lens: LensDoc::from(map.lens()),
            reference_aov_rad: None,
            reference_aov_deg: None,
        },
    )
}

/// Reads a ray map back at `f32` precision.
pub fn read_raymap(path: impl AsRef<Path>) -> Result<RayMap> {
    let path = path.as_ref();
    let sidecar = read_sidecar(path, MapKind::Raymap)?;
    let (width, height, pixels) = read_float_image(path)?;
    check_dimensions(path, &sidecar, width, height)?;
    let rays = pixels
        .iter()
        .map(|&[x, y, z]| {
            if x == 0.0 && y == 0.0 && z == 0.0 {
                IncidentRay::INVALID
            } else {
                IncidentRay {
                    gx: x as f64,
                    gy: y as f64,
                    gz: z as f64,
                    valid: true,
                }
            }
        })
        .collect();
    RayMap::from_rays(width, height, sidecar.lens.to_params()?, rays)
        .map_err(|e| Error::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfm_round_trip_and_orientation() {
        let px = vec![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0], [-1.0, 0.5, f32::MIN_POSITIVE]];
        let bytes = encode_pfm(2, 2, &px);
        // Bottom row first on disk.
        let header = b"PF\n2 2\n-1.0\n".len();
        assert_eq!(&bytes[header..header + 4], &7.0f32.to_le_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap(), (2, 2, px));
    }

    #[test]
    fn pfm_errors_carry_offsets() {
        assert!(decode_pfm(b"P6\n1 1\n255\n").unwrap_err().contains("byte 0"));
        let mut bytes = encode_pfm(1, 1, &[[0.0; 3]]);
        bytes.pop();
        let err = decode_pfm(&bytes).unwrap_err();
        assert!(err.contains("byte 12") && err.contains("found 11"), "{err}");
        assert!(decode_pfm(b"PF\n2").unwrap_err().contains("header"));
    }

    #[test]
    fn big_endian_pfm() {
        let mut bytes = b"PF\n1 1\n1.0\n".to_vec();
        for v in [0.25f32, 0.5, 0.75] {
            bytes.extend_from_slice(&v.to_be_bytes());
        }
        assert_eq!(decode_pfm(&bytes).unwrap().2, vec![[0.25, 0.5, 0.75]]);
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("out/map.exr")), PathBuf::from("out/map.lens.json"));
    }
}
