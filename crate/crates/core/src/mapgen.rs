//! Rasterizing the projection into per-pixel ray maps and ST-maps.
//!
//! Pixels are sampled at their centers. View `y` points up, so image row 0
//! is the top of the frame. The reference axis spans `[-1, 1]` at the outer
//! edges of the frame; the other axis scales with the aspect ratio.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::projection::{primary_ray, IncidentRay, LensParams, ReferenceAxis, ViewCoord};
use crate::raster::{Edge, Raster};

/// View coordinate at the center of pixel `(px, py)`.
pub fn pixel_to_view(
    px: usize,
    py: usize,
    width: usize,
    height: usize,
    axis: ReferenceAxis,
) -> ViewCoord {
    let (ex, ey) = axis.extents(width as f64, height as f64);
    let sx = 2.0 * (px as f64 + 0.5) / width as f64 - 1.0;
    let sy = 1.0 - 2.0 * (py as f64 + 0.5) / height as f64;
    ViewCoord::new(sx * ex, sy * ey)
}

/// Continuous pixel position (centers at integers) of a view coordinate;
/// inverse of [`pixel_to_view`].
pub fn view_to_pixel(
    v: ViewCoord,
    width: usize,
    height: usize,
    axis: ReferenceAxis,
) -> (f64, f64) {
    let (ex, ey) = axis.extents(width as f64, height as f64);
    let x = (v.vx / ex + 1.0) * width as f64 / 2.0 - 0.5;
    let y = (1.0 - v.vy / ey) * height as f64 / 2.0 - 0.5;
    (x, y)
}

/// Pixels per view unit along x and y (y negative: rows grow downward).
pub(crate) fn view_to_pixel_scale(width: usize, height: usize, axis: ReferenceAxis) -> (f64, f64) {
    let (ex, ey) = axis.extents(width as f64, height as f64);
    (width as f64 / (2.0 * ex), -(height as f64) / (2.0 * ey))
}

/// Per-pixel primary rays of a lens.
#[derive(Debug, Clone, PartialEq)]
pub struct RayMap {
    width: usize,
    height: usize,
    lens: LensParams,
    rays: Vec<IncidentRay>,
}

impl RayMap {
    pub(crate) fn from_fn<F>(width: usize, height: usize, lens: LensParams, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> IncidentRay + Sync,
    {
        check_size(width, height)?;
        let mut rays = vec![IncidentRay::INVALID; width * height];
        rays.par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, ray) in row.iter_mut().enumerate() {
                    *ray = f(x, y);
                }
            });
        Ok(Self {
            width,
            height,
            lens,
            rays,
        })
    }

    /// Reassembles a map from stored rays; rays flagged valid must be unit
    /// length.
    pub fn from_rays(
        width: usize,
        height: usize,
        lens: LensParams,
        rays: Vec<IncidentRay>,
    ) -> Result<Self> {
        check_size(width, height)?;
        if rays.len() != width * height {
            return Err(Error::invalid(
                "rays",
                format!("{} rays for a {width}×{height} map", rays.len()),
            ));
        }
        if let Some(i) = rays.iter().position(|g| {
            g.valid && ((g.gx * g.gx + g.gy * g.gy + g.gz * g.gz).sqrt() - 1.0).abs() > 1e-4
        }) {
            return Err(Error::invalid(
                "rays",
                format!("ray at ({}, {}) is not unit length", i % width, i / width),
            ));
        }
        Ok(Self {
            width,
            height,
            lens,
            rays,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn lens(&self) -> &LensParams {
        &self.lens
    }

    pub fn rays(&self) -> &[IncidentRay] {
        &self.rays
    }

    pub fn get(&self, x: usize, y: usize) -> IncidentRay {
        self.rays[y * self.width + x]
    }

    /// True when both maps hold the same bits, including the sign of zeros.
    pub fn bit_identical(&self, other: &RayMap) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.rays.iter().zip(&other.rays).all(|(a, b)| {
                a.valid == b.valid
                    && a.gx.to_bits() == b.gx.to_bits()
                    && a.gy.to_bits() == b.gy.to_bits()
                    && a.gz.to_bits() == b.gz.to_bits()
            })
    }
}

fn check_size(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(
            "size",
            format!("{width}×{height} has no pixels"),
        ));
    }
    Ok(())
}

pub fn generate_raymap(width: usize, height: usize, lens: &LensParams) -> Result<RayMap> {
    let axis = lens.reference_axis();
    RayMap::from_fn(width, height, *lens, |x, y| {
        primary_ray(pixel_to_view(x, y, width, height, axis), lens)
    })
}

/// Normalized source coordinates per pixel; `t` grows upward. Entries that
/// cannot be expressed (rays behind the camera, outside the unit square)
/// are masked rather than clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct StMap {
    width: usize,
    height: usize,
    coords: Vec<[f32; 2]>,
    mask: Vec<bool>,
    reference_aov: f64,
    reference_axis: ReferenceAxis,
    lens: LensParams,
}

impl StMap {
    pub fn from_parts(
        width: usize,
        height: usize,
        coords: Vec<[f32; 2]>,
        mask: Vec<bool>,
        reference_aov: f64,
        lens: LensParams,
    ) -> Result<Self> {
        check_size(width, height)?;
        if coords.len() != width * height || mask.len() != width * height {
            return Err(Error::invalid(
                "coords",
                format!(
                    "{} coordinates / {} mask entries for a {width}×{height} map",
                    coords.len(),
                    mask.len()
                ),
            ));
        }
        if let Some(i) = coords
            .iter()
            .zip(&mask)
            .position(|(c, &m)| m && !c.iter().all(|v| (0.0..=1.0).contains(v)))
        {
            return Err(Error::invalid(
                "coords",
                format!("valid entry at ({}, {}) lies outside [0, 1]²", i % width, i / width),
            ));
        }
        Ok(Self {
            width,
            height,
            coords,
            mask,
            reference_aov,
            reference_axis: lens.reference_axis(),
            lens,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coords(&self) -> &[[f32; 2]] {
        &self.coords
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// `(s, t)` of a pixel, `None` when masked.
    pub fn get(&self, x: usize, y: usize) -> Option<[f32; 2]> {
        let i = y * self.width + x;
        self.mask[i].then_some(self.coords[i])
    }

    /// Angle of view, radians, along the reference axis.
    pub fn reference_aov(&self) -> f64 {
        self.reference_aov
    }

    pub fn reference_axis(&self) -> ReferenceAxis {
        self.reference_axis
    }

    pub fn lens(&self) -> &LensParams {
        &self.lens
    }
}

/// Converts a ray map to an ST-map of a rectilinear plate whose reference
/// angle of view is `omega` (< π).
pub fn raymap_to_stmap(map: &RayMap, omega: f64, axis: ReferenceAxis) -> Result<StMap> {
    if !(omega > 0.0 && omega < PI) {
        return Err(Error::invalid(
            "omega",
            format!(
                "ST-maps need an angle of view in (0°, 180°), got {:.3}°",
                omega.to_degrees()
            ),
        ));
    }
    let (w, h) = (map.width as f64, map.height as f64);
    let (ax, ay) = match axis {
        ReferenceAxis::Horizontal => (1.0, w / h),
        ReferenceAxis::Vertical => (h / w, 1.0),
    };
    let cot = 1.0 / (omega / 2.0).tan();
    let (coords, mask): (Vec<_>, Vec<_>) = map
        .rays
        .par_iter()
        .map(|g| {
            if !g.valid || g.gz <= 0.0 {
                return ([0.0, 0.0], false);
            }
            let scale = cot / (2.0 * g.gz);
            let s = scale * g.gx * ax + 0.5;
            let t = scale * g.gy * ay + 0.5;
            if (0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t) {
                ([s as f32, t as f32], true)
            } else {
                ([0.0, 0.0], false)
            }
        })
        .unzip();
    let mut lens = map.lens;
    if lens.reference_axis() != axis {
        lens = LensParams::new(lens.k(), lens.focal_reciprocal(), axis)?;
    }
    Ok(StMap {
        width: map.width,
        height: map.height,
        coords,
        mask,
        reference_aov: omega,
        reference_axis: axis,
        lens,
    })
}

/// Resamples `source` through an ST-map: output pixel `(x, y)` shows the
/// source at `(s, t)`. Masked pixels come out zero.
pub fn apply_stmap<const N: usize>(source: &Raster<N>, map: &StMap) -> Raster<N> {
    let (sw, sh) = (source.width() as f64, source.height() as f64);
    Raster::from_fn(map.width, map.height, |x, y| match map.get(x, y) {
        Some([s, t]) => source.sample(
            s as f64 * sw - 0.5,
            (1.0 - t as f64) * sh - 0.5,
            Edge::Clamp,
        ),
        None => [0.0; N],
    })
}
