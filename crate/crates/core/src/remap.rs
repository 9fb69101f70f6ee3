//! Rendering lens views out of equirectangular panoramas.
//!
//! Longitude is measured from `+z` toward `+x` and latitude toward `+y`; the
//! panorama's horizontal center (`u = ½`) looks down `+z`.

use std::f64::consts::{PI, TAU};

use crate::chromatic::{aberration_offset, perpendicular_offset, spectrum, uniform_blur, ChromaticParams};
use crate::distortion::{distort_view, DistortionParams};
use crate::error::{Error, Result};
use crate::mapgen::{pixel_to_view, view_to_pixel_scale};
use crate::projection::{primary_ray, vignette, IncidentRay, LensParams, ViewCoord};
use crate::raster::{Edge, RgbRaster, RgbaRaster};

/// Full-sphere panorama, 360° × 180°.
#[derive(Debug, Clone, PartialEq)]
pub struct Panorama {
    image: RgbRaster,
}

impl Panorama {
    /// Accepts images whose width is twice the height, give or take 2 px.
    pub fn new(image: RgbRaster) -> Result<Self> {
        let (w, h) = (image.width(), image.height());
        if w == 0 || h == 0 {
            return Err(Error::invalid("panorama", "image is empty"));
        }
        if (w as i64 - 2 * h as i64).abs() > 2 {
            return Err(Error::invalid(
                "panorama",
                format!("{w}×{h} is not a 2:1 equirectangular image"),
            ));
        }
        Ok(Self { image })
    }

    pub fn image(&self) -> &RgbRaster {
        &self.image
    }

    /// Rotates the panorama about the vertical axis by whole columns.
    pub fn rotate_columns(&self, columns: isize) -> Self {
        let w = self.image.width() as isize;
        let img = RgbRaster::from_fn(self.image.width(), self.image.height(), |x, y| {
            let src = (x as isize - columns).rem_euclid(w) as usize;
            self.image.get(src, y)
        });
        Self { image: img }
    }
}

/// Normalized panorama position `(u, v)` of a unit direction; `v = 0` is the
/// zenith row.
pub fn equirect_uv(direction: [f64; 3]) -> (f64, f64) {
    let [gx, gy, gz] = direction;
    let lon = gx.atan2(gz);
    let lat = gy.clamp(-1.0, 1.0).asin();
    (0.5 + lon / TAU, 0.5 - lat / PI)
}

/// Panorama color seen along `ray`, `None` for invalid rays.
pub fn sample_equirect(pano: &Panorama, ray: &IncidentRay) -> Option<[f32; 3]> {
    let dir = ray.direction()?;
    let (u, v) = equirect_uv(dir);
    let img = &pano.image;
    Some(img.sample(
        u * img.width() as f64 - 0.5,
        v * img.height() as f64 - 0.5,
        Edge::WrapX,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub lens: LensParams,
    pub distortion: Option<DistortionParams>,
    pub vignette: bool,
    pub chromatic: Option<ChromaticParams>,
}

impl RenderOptions {
    pub fn new(lens: LensParams) -> Self {
        Self {
            lens,
            distortion: None,
            vignette: false,
            chromatic: None,
        }
    }
}

/// Renders a `width × height` view of `pano`.
///
/// Pipeline: (distorted) view coordinate → primary ray → panorama sample →
/// optional vignette → optional chromatic aberration. The spectral taps are
/// traced through the lens individually, so they may reach outside the
/// undistorted frame; the perpendicular pass then blurs the rendered frame.
/// Pixels outside the projection field are black with zero alpha.
pub fn render_projection(
    pano: &Panorama,
    width: usize,
    height: usize,
    options: &RenderOptions,
) -> Result<RgbaRaster> {
    if width == 0 || height == 0 {
        return Err(Error::invalid("size", format!("{width}×{height} has no pixels")));
    }
    if let Some(d) = &options.distortion {
        d.validate()?;
    }
    if let Some(c) = &options.chromatic {
        c.validate()?;
    }
    let lens = &options.lens;
    let axis = lens.reference_axis();
    let no_distortion = DistortionParams::default();
    let distortion = options.distortion.as_ref().unwrap_or(&no_distortion);
    let taps: Option<Vec<(f64, [f64; 3])>> = options
        .chromatic
        .map(|c| c.positions().map(|t| (t, spectrum(t).to_array())).collect());

    let shade = |v: ViewCoord| -> Option<[f32; 3]> {
        let ray = primary_ray(v, lens);
        let color = sample_equirect(pano, &ray)?;
        if options.vignette {
            let mask = vignette(v, lens) as f32;
            Some(color.map(|c| c * mask))
        } else {
            Some(color)
        }
    };

    let rendered = RgbaRaster::from_fn(width, height, |x, y| {
        let v = pixel_to_view(x, y, width, height, axis);
        let Some(d) = distort_view(v, distortion) else {
            return [0.0; 4];
        };
        let Some(center) = shade(d) else {
            return [0.0; 4];
        };
        let color = match (&taps, options.chromatic) {
            (Some(taps), Some(params)) => {
                let mut acc = [0.0f64; 3];
                for &(t, chi) in taps {
                    let s = aberration_offset(v, d, t, params.dispersion);
                    if let Some(c) = shade(ViewCoord::new(v.vx + s[0], v.vy + s[1])) {
                        for ch in 0..3 {
                            acc[ch] += c[ch] as f64 * chi[ch];
                        }
                    }
                }
                let norm = 2.0 / params.samples as f64;
                acc.map(|a| (a * norm) as f32)
            }
            _ => center,
        };
        [color[0], color[1], color[2], 1.0]
    });

    let Some(params) = options.chromatic else {
        return Ok(rendered);
    };
    let (scale_x, scale_y) = view_to_pixel_scale(width, height, axis);
    let blurred = uniform_blur(&rendered.rgb(), params.samples, |x, y, t| {
        let v = pixel_to_view(x, y, width, height, axis);
        match distort_view(v, distortion) {
            Some(d) => {
                let [dx, dy] = perpendicular_offset(v, d, t, params.dispersion);
                [dx * scale_x, dy * scale_y]
            }
            None => [0.0, 0.0],
        }
    });
    let pixels = rendered
        .pixels()
        .iter()
        .zip(blurred.pixels())
        .map(|(src, b)| {
            if src[3] == 0.0 {
                [0.0; 4]
            } else {
                [b[0], b[1], b[2], 1.0]
            }
        })
        .collect();
    RgbaRaster::from_pixels(width, height, pixels)
}

/// Color of the axis cube at a direction: the face hit is colored by its
/// axis (`+x` red, `+y` green, `+z` blue; negative faces cyan, magenta,
/// yellow), checkered `cells` × `cells` per face.
pub fn axis_cube_color(direction: [f64; 3], cells: usize) -> [f32; 3] {
    let [x, y, z] = direction;
    let (ax, ay, az) = (x.abs(), y.abs(), z.abs());
    let (base, a, b, m) = if ax >= ay && ax >= az {
        (if x > 0.0 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 1.0] }, y, z, ax)
    } else if ay >= az {
        (if y > 0.0 { [0.0, 1.0, 0.0] } else { [1.0, 0.0, 1.0] }, x, z, ay)
    } else {
        (if z > 0.0 { [0.0, 0.0, 1.0] } else { [1.0, 1.0, 0.0] }, x, y, az)
    };
    let cell = |c: f64| (((c / m + 1.0) / 2.0 * cells as f64).floor() as i64).clamp(0, cells as i64 - 1);
    let shade = if (cell(a) + cell(b)) % 2 == 0 { 1.0 } else { 0.6 };
    base.map(|c: f32| c * shade)
}

/// Equirectangular panorama of the axis-colored cube, `2·height × height`.
pub fn axis_cube_panorama(height: usize, cells: usize) -> Panorama {
    let width = 2 * height;
    let image = RgbRaster::from_fn(width, height, |x, y| {
        let lon = ((x as f64 + 0.5) / width as f64 - 0.5) * TAU;
        let lat = (0.5 - (y as f64 + 0.5) / height as f64) * PI;
        let dir = [lat.cos() * lon.sin(), lat.sin(), lat.cos() * lon.cos()];
        axis_cube_color(dir, cells)
    });
    Panorama { image }
}
