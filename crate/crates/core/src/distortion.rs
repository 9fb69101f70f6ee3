//! Anamorphic Brown-Conrady distortion of view coordinates, division variant.
//!
//! The radial term divides by a per-axis polynomial in `r²`, blended by the
//! same azimuth weights as the projection itself. Decentering uses the form
//! `f·(f·p)` (the offset vector scaled by its dot product with `p`), which
//! differs from the classic tangential terms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapgen::{pixel_to_view, RayMap};
use crate::projection::{phi_weights, primary_ray, IncidentRay, LensParams, ViewCoord};

/// Divisors smaller than this in magnitude make the output invalid.
pub const POLE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistortionParams {
    /// Cardinal offset: the optical center, in view units.
    #[serde(default)]
    pub c: [f64; 2],
    /// Decentering coefficients.
    #[serde(default)]
    pub p: [f64; 2],
    /// Thin-prism coefficients.
    #[serde(default)]
    pub q: [f64; 2],
    /// Radial coefficients of the horizontal axis, for `r², r⁴, …`.
    #[serde(default)]
    pub radial_x: Vec<f64>,
    #[serde(default)]
    pub radial_y: Vec<f64>,
}

impl DistortionParams {
    /// Pure anamorphic radial distortion with one coefficient per axis.
    pub fn radial(kx1: f64, ky1: f64) -> Self {
        Self {
            radial_x: vec![kx1],
            radial_y: vec![ky1],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let arrays = [("c", &self.c), ("p", &self.p), ("q", &self.q)];
        for (name, values) in arrays {
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(
                    format!("distortion.{name}[{i}]"),
                    "must be finite",
                ));
            }
        }
        for (name, values) in [("radial_x", &self.radial_x), ("radial_y", &self.radial_y)] {
            if let Some(i) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(
                    format!("distortion.{name}[{i}]"),
                    "must be finite",
                ));
            }
        }
        Ok(())
    }
}

/// `1 + k₁r² + k₂r⁴ + …` by Horner's rule in `r²`.
fn radial_polynomial(coefficients: &[f64], r2: f64) -> f64 {
    let tail = coefficients.iter().rev().fold(0.0, |acc, &k| acc * r2 + k);
    1.0 + tail * r2
}

/// Distorted view coordinate, or `None` where the radial divisor vanishes.
pub fn distort_view(v: ViewCoord, params: &DistortionParams) -> Option<ViewCoord> {
    let [c1, c2] = params.c;
    let fx = v.vx - c1;
    let fy = v.vy - c2;
    let r2 = fx * fx + fy * fy;
    let px = radial_polynomial(&params.radial_x, r2);
    let py = radial_polynomial(&params.radial_y, r2);
    // Equal polynomials need no blend; skipping it keeps wx + wy rounding out.
    let divisor = if px == py {
        px
    } else {
        let w = phi_weights(ViewCoord::new(fx, fy));
        px * w.wx + py * w.wy
    };
    if !divisor.is_finite() || divisor.abs() <= POLE_EPSILON {
        return None;
    }
    let dot = fx * params.p[0] + fy * params.p[1];
    let out = ViewCoord::new(
        fx / divisor + fx * dot + r2 * params.q[0] + c1,
        fy / divisor + fy * dot + r2 * params.q[1] + c2,
    );
    (out.vx.is_finite() && out.vy.is_finite()).then_some(out)
}

/// Ray map of a lens seen through `params`: each pixel's view coordinate is
/// distorted before it is projected.
pub fn distorted_raymap(
    width: usize,
    height: usize,
    lens: &LensParams,
    params: &DistortionParams,
) -> Result<RayMap> {
    params.validate()?;
    RayMap::from_fn(width, height, *lens, |x, y| {
        let v = pixel_to_view(x, y, width, height, lens.reference_axis());
        match distort_view(v, params) {
            Some(d) => primary_ray(d, lens),
            None => IncidentRay::INVALID,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapgen::generate_raymap;
    use crate::projection::{KVector, ReferenceAxis};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_params_are_identity() {
        let p = DistortionParams::default();
        for &(x, y) in &[(0.3, -0.7), (1.0, 0.0), (-2.5, 4.0)] {
            let v = ViewCoord::new(x, y);
            assert_eq!(distort_view(v, &p), Some(v));
        }
    }

    #[test]
    fn cardinal_offset_alone_cancels() {
        let p = DistortionParams {
            c: [0.2, -0.1],
            ..Default::default()
        };
        let v = ViewCoord::new(0.5, 0.25);
        let d = distort_view(v, &p).unwrap();
        assert_abs_diff_eq!(d.vx, v.vx, epsilon = 1e-15);
        assert_abs_diff_eq!(d.vy, v.vy, epsilon = 1e-15);
    }

    #[test]
    fn barrel_on_axis() {
        let p = DistortionParams::radial(-0.25, -0.25);
        let d = distort_view(ViewCoord::new(1.0, 0.0), &p).unwrap();
        assert_abs_diff_eq!(d.vx, 1.0 / 0.75, epsilon = 1e-15);
        assert_eq!(d.vy, 0.0);
    }

    #[test]
    fn decentering_and_prism_terms() {
        // f = (0.5, 0.5); f·p = 0.05; r² = 0.5.
        let p = DistortionParams {
            p: [0.1, 0.0],
            q: [0.0, 0.2],
            ..Default::default()
        };
        let d = distort_view(ViewCoord::new(0.5, 0.5), &p).unwrap();
        assert_abs_diff_eq!(d.vx, 0.5 + 0.5 * 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(d.vy, 0.5 + 0.5 * 0.05 + 0.5 * 0.2, epsilon = 1e-15);
    }

    #[test]
    fn pole_is_masked() {
        let p = DistortionParams::radial(-1.0, -1.0);
        assert_eq!(distort_view(ViewCoord::new(1.0, 0.0), &p), None);
    }

    #[test]
    fn fig7_set_stretches_horizontally() {
        let p = DistortionParams::radial(-0.25, 0.04);
        for i in 1..10 {
            let r = i as f64 / 10.0;
            let on_x = distort_view(ViewCoord::new(r, 0.0), &p).unwrap();
            let on_y = distort_view(ViewCoord::new(0.0, r), &p).unwrap();
            assert!(on_x.vx.abs() > r && on_x.vy == 0.0);
            assert!(on_y.vy.abs() < r && on_y.vx == 0.0);
        }
    }

    #[test]
    fn zero_params_reproduce_raymap() {
        let k = KVector::asymmetric(0.5, -0.5, 0.0).unwrap();
        let lens = LensParams::with_focal(k, 0.618, ReferenceAxis::Horizontal).unwrap();
        let plain = generate_raymap(17, 9, &lens).unwrap();
        let warped = distorted_raymap(17, 9, &lens, &DistortionParams::default()).unwrap();
        assert!(plain.bit_identical(&warped));
    }

    #[test]
    fn rejects_non_finite() {
        let mut p = DistortionParams::radial(0.1, 0.1);
        p.radial_y.push(f64::NAN);
        let err = p.validate().unwrap_err();
        assert_eq!(err.field(), "distortion.radial_y[1]");
    }

    proptest! {
        #[test]
        fn origin_is_fixed(kx in -1.0..1.0f64, ky in -1.0..1.0f64, p1 in -1.0..1.0f64, q2 in -1.0..1.0f64) {
            let params = DistortionParams {
                p: [p1, 0.3],
                q: [0.2, q2],
                radial_x: vec![kx],
                radial_y: vec![ky],
                ..Default::default()
            };
            prop_assert_eq!(distort_view(ViewCoord::ORIGIN, &params), Some(ViewCoord::ORIGIN));
        }

        #[test]
        fn x_axis_stays_on_x_axis(x in -2.0..2.0f64, kx in -0.2..0.2f64, ky in -0.2..0.2f64) {
            let params = DistortionParams::radial(kx, ky);
            let d = distort_view(ViewCoord::new(x, 0.0), &params).unwrap();
            prop_assert_eq!(d.vy, 0.0);
        }

        #[test]
        fn trailing_zero_coefficient_changes_nothing(
            x in -2.0..2.0f64, y in -2.0..2.0f64,
            a in -0.3..0.3f64, b in -0.1..0.1f64, c in -0.3..0.3f64,
        ) {
            let short = DistortionParams { radial_x: vec![a, b], radial_y: vec![c], ..Default::default() };
            let long = DistortionParams { radial_x: vec![a, b, 0.0], radial_y: vec![c, 0.0, 0.0], ..Default::default() };
            let v = ViewCoord::new(x, y);
            prop_assert_eq!(distort_view(v, &short), distort_view(v, &long));
        }

        #[test]
        fn continuous_away_from_poles(x in -1.0..1.0f64, y in -1.0..1.0f64) {
            let params = DistortionParams {
                c: [0.05, -0.02],
                p: [0.01, 0.02],
                q: [0.01, -0.01],
                radial_x: vec![-0.25, 0.02],
                radial_y: vec![0.04],
            };
            let h = 1e-7;
            let a = distort_view(ViewCoord::new(x, y), &params).unwrap();
            let b = distort_view(ViewCoord::new(x + h, y + h), &params).unwrap();
            prop_assert!((a.vx - b.vx).abs() < 1e-5 && (a.vy - b.vy).abs() < 1e-5);
        }
    }
}
