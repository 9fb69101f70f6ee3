//! Float rasters and bilinear sampling.
//!
//! Continuous sample positions use pixel-index units: the center of pixel
//! `(i, j)` sits at `(i, j)`.

use image::{DynamicImage, ImageBuffer, Rgb, Rgba};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major grid of `N`-channel `f32` pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster<const N: usize> {
    width: usize,
    height: usize,
    pixels: Vec<[f32; N]>,
}

pub type RgbRaster = Raster<3>;
pub type RgbaRaster = Raster<4>;

/// How sample positions outside the raster are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    /// Clamp both axes to the border pixels.
    Clamp,
    /// Wrap horizontally (full-turn panoramas), clamp vertically.
    WrapX,
}

impl<const N: usize> Raster<N> {
    pub fn new(width: usize, height: usize) -> Self {
        Self::filled(width, height, [0.0; N])
    }

    pub fn filled(width: usize, height: usize, value: [f32; N]) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[f32; N]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::invalid(
                "pixels",
                format!(
                    "{} pixels do not fill a {width}×{height} raster",
                    pixels.len()
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Fills every pixel from `f(x, y)`, rows in parallel.
    pub fn from_fn<F>(width: usize, height: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> [f32; N] + Sync,
    {
        let mut raster = Self::new(width, height);
        raster.fill_rows(f);
        raster
    }

    pub(crate) fn fill_rows<F>(&mut self, f: F)
    where
        F: Fn(usize, usize) -> [f32; N] + Sync,
    {
        let width = self.width;
        if width == 0 {
            return;
        }
        self.pixels
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, px) in row.iter_mut().enumerate() {
                    *px = f(x, y);
                }
            });
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[f32; N]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [f32; N] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: [f32; N]) {
        self.pixels[y * self.width + x] = value;
    }

    /// Bilinear sample at continuous position `(x, y)`.
    pub fn sample(&self, x: f64, y: f64, edge: Edge) -> [f32; N] {
        if self.pixels.is_empty() || !x.is_finite() || !y.is_finite() {
            return [0.0; N];
        }
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let w = self.width as i64;
        let h = self.height as i64;
        let col = |i: i64| match edge {
            Edge::Clamp => i.clamp(0, w - 1) as usize,
            Edge::WrapX => i.rem_euclid(w) as usize,
        };
        let row = |j: i64| j.clamp(0, h - 1) as usize;
        let (xi, yi) = (x0 as i64, y0 as i64);
        let (c0, c1) = (col(xi), col(xi + 1));
        let (r0, r1) = (row(yi), row(yi + 1));
        let p00 = self.get(c0, r0);
        let p10 = self.get(c1, r0);
        let p01 = self.get(c0, r1);
        let p11 = self.get(c1, r1);
        let mut out = [0.0f32; N];
        for c in 0..N {
            let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
            let bottom = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
            out[c] = (top * (1.0 - fy) + bottom * fy) as f32;
        }
        out
    }

    /// Largest absolute per-channel difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f32> {
        if self.width != other.width || self.height != other.height {
            return None;
        }
        Some(
            self.pixels
                .iter()
                .zip(&other.pixels)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f32::max),
        )
    }
}

impl RgbRaster {
    pub fn from_image(image: &DynamicImage) -> Self {
        let rgb = image.to_rgb32f();
        let (w, h) = rgb.dimensions();
        let pixels = rgb.pixels().map(|p| p.0).collect();
        Self {
            width: w as usize,
            height: h as usize,
            pixels,
        }
    }

    pub fn to_rgb8(&self) -> ImageBuffer<Rgb<u8>, Vec<u8>> {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            Rgb(self.get(x as usize, y as usize).map(to_u8))
        })
    }

    pub fn to_rgb32f(&self) -> ImageBuffer<Rgb<f32>, Vec<f32>> {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            Rgb(self.get(x as usize, y as usize))
        })
    }

    pub fn with_alpha(&self, alpha: f32) -> RgbaRaster {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self
                .pixels
                .iter()
                .map(|&[r, g, b]| [r, g, b, alpha])
                .collect(),
        }
    }
}

impl RgbaRaster {
    pub fn to_rgba8(&self) -> ImageBuffer<Rgba<u8>, Vec<u8>> {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            Rgba(self.get(x as usize, y as usize).map(to_u8))
        })
    }

    pub fn to_rgba32f(&self) -> ImageBuffer<Rgba<f32>, Vec<f32>> {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            Rgba(self.get(x as usize, y as usize))
        })
    }

    pub fn rgb(&self) -> RgbRaster {
        Raster {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&[r, g, b, _]| [r, g, b]).collect(),
        }
    }
}

fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Test chart: a two-tone checkerboard with thin white grid lines every
/// `cell` pixels. Useful for eyeballing distortion and resampling.
pub fn grid_chart(width: usize, height: usize, cell: usize) -> RgbRaster {
    let cell = cell.max(2);
    RgbRaster::from_fn(width, height, |x, y| {
        if x % cell == 0 || y % cell == 0 {
            [1.0, 1.0, 1.0]
        } else if (x / cell + y / cell).is_multiple_of(2) {
            [0.15, 0.2, 0.3]
        } else {
            [0.45, 0.35, 0.2]
        }
    })
}
