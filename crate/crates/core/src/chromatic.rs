//! Spectral chromatic aberration.
//!
//! A blur of `n` taps where tap `i` is tinted with the spectral color at
//! `t = i/n`. For even `n` the tints sum to `n/2` per channel, so scaling by
//! `2/n` keeps the white balance of the source. Driven by lens distortion,
//! the taps spread along the distortion displacement; a second, uniformly
//! weighted pass blurs perpendicular to it at a quarter of the magnitude.

use serde::{Deserialize, Serialize};

use crate::distortion::{distort_view, DistortionParams};
use crate::error::{Error, Result};
use crate::mapgen::{pixel_to_view, view_to_pixel, view_to_pixel_scale};
use crate::projection::{LensParams, ViewCoord};
use crate::raster::{Edge, RgbRaster};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl SpectralColor {
    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }
}

/// Tap count and dispersion scale of the spectral blur.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChromaticParams {
    pub samples: u32,
    pub dispersion: f64,
}

impl ChromaticParams {
    pub fn new(samples: u32, dispersion: f64) -> Result<Self> {
        let params = Self {
            samples,
            dispersion,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 || !self.samples.is_multiple_of(2) {
            return Err(Error::invalid(
                "chromatic.samples",
                format!(
                    "sample count must be an even number no less than 2 (got {})",
                    self.samples
                ),
            ));
        }
        if !self.dispersion.is_finite() {
            return Err(Error::invalid("chromatic.dispersion", "must be finite"));
        }
        Ok(())
    }

    /// Spectral positions `i/n`; never reaches 1.
    pub fn positions(&self) -> impl Iterator<Item = f64> {
        let n = self.samples;
        (0..n).map(move |i| i as f64 / n as f64)
    }
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn assert_unit(t: f64) {
    assert!((0.0..=1.0).contains(&t), "spectral position {t} outside [0, 1]");
}

/// Spectral color at `t ∈ [0, 1]`: three phase-shifted triangle waves,
/// red peaking at ¼, green at ½, blue at ¾.
pub fn spectrum(t: f64) -> SpectralColor {
    assert_unit(t);
    let wave = |phase: f64| clamp01(1.5 - (4.0 * (t + phase).rem_euclid(1.0) - 2.0).abs());
    SpectralColor {
        r: wave(0.25),
        g: wave(0.0),
        b: wave(0.75),
    }
}

/// Same values as [`spectrum`] without the modulo.
pub fn spectrum_fast(t: f64) -> SpectralColor {
    assert_unit(t);
    let red_lobe = clamp01(1.5 - (4.0 * t - 1.0).abs());
    let wrap = clamp01(4.0 * t - 3.5);
    SpectralColor {
        r: red_lobe + wrap,
        g: clamp01(1.5 - (4.0 * t - 2.0).abs()),
        b: -red_lobe + 1.0 - wrap,
    }
}

/// Tap offset along the distortion displacement `v' − v` for spectral
/// position `t`. Exactly the displacement at `t = ½`.
pub fn aberration_offset(v: ViewCoord, v_distorted: ViewCoord, t: f64, dispersion: f64) -> [f64; 2] {
    let scale = 1.0 + (t - 0.5) * dispersion;
    [
        scale * (v_distorted.vx - v.vx),
        scale * (v_distorted.vy - v.vy),
    ]
}

/// Direction of the second blur pass: `s` turned a quarter and scaled by ¼.
pub fn perpendicular_pass(s: [f64; 2]) -> [f64; 2] {
    [0.25 * -s[1], 0.25 * s[0]]
}

/// Spectral blur with per-tap displacement `offset(x, y, t)` in pixels.
///
/// Each output pixel is `(2/n)·Σ image(p + offset(t_i)) ⊙ χ(t_i)`, sampled
/// bilinearly with edge clamping.
pub fn spectral_blur<F>(image: &RgbRaster, params: &ChromaticParams, offset: F) -> Result<RgbRaster>
where
    F: Fn(usize, usize, f64) -> [f64; 2] + Sync,
{
    params.validate()?;
    let taps: Vec<(f64, [f64; 3])> = params
        .positions()
        .map(|t| (t, spectrum(t).to_array()))
        .collect();
    let norm = 2.0 / params.samples as f64;
    Ok(RgbRaster::from_fn(image.width(), image.height(), |x, y| {
        let mut acc = [0.0f64; 3];
        for &(t, chi) in &taps {
            let [dx, dy] = offset(x, y, t);
            let c = image.sample(x as f64 + dx, y as f64 + dy, Edge::Clamp);
            for ch in 0..3 {
                acc[ch] += c[ch] as f64 * chi[ch];
            }
        }
        acc.map(|a| (a * norm) as f32)
    }))
}

/// Untinted blur averaging `n` taps at `offset(x, y, i/n)` pixels.
pub(crate) fn uniform_blur<F>(image: &RgbRaster, samples: u32, offset: F) -> RgbRaster
where
    F: Fn(usize, usize, f64) -> [f64; 2] + Sync,
{
    let norm = 1.0 / samples as f64;
    RgbRaster::from_fn(image.width(), image.height(), |x, y| {
        let mut acc = [0.0f64; 3];
        for i in 0..samples {
            let [dx, dy] = offset(x, y, i as f64 / samples as f64);
            let c = image.sample(x as f64 + dx, y as f64 + dy, Edge::Clamp);
            for ch in 0..3 {
                acc[ch] += c[ch] as f64;
            }
        }
        acc.map(|a| (a * norm) as f32)
    })
}

/// Second-pass tap offset in view units: the perpendicular of the tap's
/// spread around the distortion displacement, `⊥(s(t)) − ⊥(s(½))`. Zero when
/// the dispersion is zero.
pub fn perpendicular_offset(v: ViewCoord, v_distorted: ViewCoord, t: f64, dispersion: f64) -> [f64; 2] {
    let spread = perpendicular_pass(aberration_offset(v, v_distorted, t, dispersion));
    let center = perpendicular_pass(aberration_offset(v, v_distorted, 0.5, dispersion));
    [spread[0] - center[0], spread[1] - center[1]]
}

/// Lens distortion of an image with distortion-driven chromatic aberration.
///
/// `image` is taken as the undistorted picture framed by `lens` (only its
/// reference axis matters for view normalization). Output pixel `v` gathers
/// the source around `v'` in two passes: a spectral pass along the
/// displacement `v' − v`, then a quarter-size uniform pass across it. Pixels
/// whose distortion hits a pole come out black.
pub fn chromatic_distort(
    image: &RgbRaster,
    lens: &LensParams,
    distortion: &DistortionParams,
    params: &ChromaticParams,
) -> Result<RgbRaster> {
    distortion.validate()?;
    params.validate()?;
    let (w, h) = (image.width(), image.height());
    let axis = lens.reference_axis();
    let (scale_x, scale_y) = view_to_pixel_scale(w, h, axis);
    let distorted: Vec<Option<(ViewCoord, ViewCoord)>> = (0..w * h)
        .map(|i| {
            let v = pixel_to_view(i % w, i / w, w, h, axis);
            distort_view(v, distortion).map(|d| (v, d))
        })
        .collect();
    let dispersion = params.dispersion;

    let first = spectral_blur(image, params, |x, y, t| match distorted[y * w + x] {
        Some((v, d)) => {
            let s = aberration_offset(v, d, t, dispersion);
            let (px, py) = view_to_pixel(ViewCoord::new(v.vx + s[0], v.vy + s[1]), w, h, axis);
            [px - x as f64, py - y as f64]
        }
        None => [f64::NAN, f64::NAN],
    })?;

    let second = uniform_blur(&first, params.samples, |x, y, t| match distorted[y * w + x] {
        Some((v, d)) => {
            let [dx, dy] = perpendicular_offset(v, d, t, dispersion);
            [dx * scale_x, dy * scale_y]
        }
        None => [f64::NAN, f64::NAN],
    });
    Ok(second)
}
