//! Scalar math of the anamorphic azimuthal model.
//!
//! Every pixel is described by a view coordinate `v` centered on the optical
//! axis. Each of the two power axes carries its own azimuthal projection factor
//! `k` (1 rectilinear, ½ stereographic, 0 equidistant, −½ equisolid,
//! −1 orthographic) and yields an incident angle for the radius `|v|`. The two
//! angles are blended by azimuth weights `cos²φ`/`sin²φ` and the resulting
//! angle is turned into a unit primary ray that keeps the azimuth of `v`.
//!
//! Pixels that a projection cannot reach (the arcsine branch leaving its
//! domain, or a blended angle past the back pole) are reported as invalid
//! instead of being clamped.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Projection factors of the two power axes, with an optional override of
/// the vertical factor for the bottom half of the picture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KVector {
    kx: f64,
    ky: f64,
    kz: Option<f64>,
}

fn check_k(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && (-1.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("{value} is outside [-1, 1]")))
    }
}

impl KVector {
    /// Symmetric lens: `ky` applies to both halves.
    pub fn new(kx: f64, ky: f64) -> Result<Self> {
        check_k("kx", kx)?;
        check_k("ky", ky)?;
        Ok(Self { kx, ky, kz: None })
    }

    /// Asymmetric lens: `ky` applies where `vy >= 0`, `kz` where `vy < 0`.
    pub fn asymmetric(kx: f64, ky: f64, kz: f64) -> Result<Self> {
        check_k("kz", kz)?;
        let mut k = Self::new(kx, ky)?;
        k.kz = Some(kz);
        Ok(k)
    }

    /// Builds from a 2- or 3-component slice.
    pub fn from_slice(components: &[f64]) -> Result<Self> {
        match *components {
            [kx, ky] => Self::new(kx, ky),
            [kx, ky, kz] => Self::asymmetric(kx, ky, kz),
            _ => Err(Error::invalid(
                "k",
                format!("expected 2 or 3 components, got {}", components.len()),
            )),
        }
    }

    pub fn kx(&self) -> f64 {
        self.kx
    }

    pub fn ky(&self) -> f64 {
        self.ky
    }

    pub fn kz(&self) -> Option<f64> {
        self.kz
    }

    /// The factor used for the bottom half; equals `ky` for symmetric lenses.
    pub fn bottom(&self) -> f64 {
        self.kz.unwrap_or(self.ky)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match self.kz {
            Some(kz) => vec![self.kx, self.ky, kz],
            None => vec![self.kx, self.ky],
        }
    }
}

/// Which angle of view the focal length was established from. The view
/// coordinates are normalized so this axis spans `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceAxis {
    #[default]
    #[serde(alias = "h")]
    Horizontal,
    #[serde(alias = "v")]
    Vertical,
}

impl ReferenceAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            ReferenceAxis::Horizontal => "horizontal",
            ReferenceAxis::Vertical => "vertical",
        }
    }

    /// Accepts `h`/`v` as well as the full names.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "h" | "horizontal" => Ok(ReferenceAxis::Horizontal),
            "v" | "vertical" => Ok(ReferenceAxis::Vertical),
            _ => Err(Error::invalid(
                "reference_axis",
                format!("expected horizontal|vertical (or h|v), got {s:?}"),
            )),
        }
    }

    /// Half-extents `(x, y)` of a `width × height` frame in view units.
    pub fn extents(self, width: f64, height: f64) -> (f64, f64) {
        match self {
            ReferenceAxis::Horizontal => (1.0, height / width),
            ReferenceAxis::Vertical => (width / height, 1.0),
        }
    }
}

/// Lens shape plus the single reciprocal focal length shared by both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensParams {
    k: KVector,
    focal_reciprocal: f64,
    reference_axis: ReferenceAxis,
}

impl LensParams {
    pub fn new(k: KVector, focal_reciprocal: f64, reference_axis: ReferenceAxis) -> Result<Self> {
        if !(focal_reciprocal.is_finite() && focal_reciprocal > 0.0) {
            return Err(Error::invalid(
                "focal_reciprocal",
                format!("{focal_reciprocal} must be finite and > 0"),
            ));
        }
        Ok(Self {
            k,
            focal_reciprocal,
            reference_axis,
        })
    }

    /// Lens from a focal length `f` (not its reciprocal).
    pub fn with_focal(k: KVector, focal: f64, reference_axis: ReferenceAxis) -> Result<Self> {
        if !(focal.is_finite() && focal > 0.0) {
            return Err(Error::invalid(
                "focal",
                format!("{focal} must be finite and > 0"),
            ));
        }
        Self::new(k, 1.0 / focal, reference_axis)
    }

    /// Lens whose reference-axis angle of view is `omega` radians. The focal
    /// length is solved with the reference axis' factor (`kx` for horizontal,
    /// `ky` for vertical).
    pub fn with_aov(k: KVector, omega: f64, reference_axis: ReferenceAxis) -> Result<Self> {
        let k_axis = match reference_axis {
            ReferenceAxis::Horizontal => k.kx,
            ReferenceAxis::Vertical => k.ky,
        };
        Self::new(k, focal_from_aov(omega, k_axis)?, reference_axis)
    }

    pub fn k(&self) -> KVector {
        self.k
    }

    pub fn focal_reciprocal(&self) -> f64 {
        self.focal_reciprocal
    }

    pub fn focal(&self) -> f64 {
        1.0 / self.focal_reciprocal
    }

    pub fn reference_axis(&self) -> ReferenceAxis {
        self.reference_axis
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ViewCoord {
    pub vx: f64,
    pub vy: f64,
}

impl ViewCoord {
    pub const ORIGIN: ViewCoord = ViewCoord { vx: 0.0, vy: 0.0 };

    pub fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn radius(&self) -> f64 {
        (self.vx * self.vx + self.vy * self.vy).sqrt()
    }
}

/// Unit primary ray in a left-handed frame with `+z` along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentRay {
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
    pub valid: bool,
}

impl IncidentRay {
    pub const INVALID: IncidentRay = IncidentRay {
        gx: 0.0,
        gy: 0.0,
        gz: 0.0,
        valid: false,
    };

    pub const FORWARD: IncidentRay = IncidentRay {
        gx: 0.0,
        gy: 0.0,
        gz: 1.0,
        valid: true,
    };

    pub fn direction(&self) -> Option<[f64; 3]> {
        self.valid.then_some([self.gx, self.gy, self.gz])
    }

    /// Angle from the optical axis.
    pub fn incident_angle(&self) -> Option<f64> {
        self.valid.then(|| self.gz.clamp(-1.0, 1.0).acos())
    }
}

/// Azimuth blend weights, `wx = cos²φ` and `wy = sin²φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiWeights {
    pub wx: f64,
    pub wy: f64,
}

/// Incident angle of a single azimuthal projection with factor `k` at view
/// radius `r`.
///
/// `None` when the arcsine branch (`k < 0`) leaves its domain, i.e. the
/// radius lies beyond the widest field this projection can show.
pub fn azimuthal_theta(r: f64, f_inv: f64, k: f64) -> Option<f64> {
    let x = r * f_inv;
    if k > 0.0 {
        Some((x * k).atan() / k)
    } else if k == 0.0 {
        Some(x)
    } else {
        let s = x * k;
        (s >= -1.0).then(|| s.asin() / k)
    }
}

/// `(1, 0)` at the origin, where either choice gives the same angle.
pub fn phi_weights(v: ViewCoord) -> PhiWeights {
    let x2 = v.vx * v.vx;
    let y2 = v.vy * v.vy;
    let r2 = x2 + y2;
    if r2 == 0.0 {
        return PhiWeights { wx: 1.0, wy: 0.0 };
    }
    PhiWeights {
        wx: x2 / r2,
        wy: y2 / r2,
    }
}

/// Vertical factor in effect at `v`: `kz` below the horizon of an asymmetric
/// lens, `ky` otherwise.
pub fn select_ky(k: KVector, v: ViewCoord) -> f64 {
    match k.kz {
        Some(kz) if v.vy < 0.0 => kz,
        _ => k.ky,
    }
}

// A zero weight drops its axis even when that axis is out of domain, so the
// axes themselves never poison the blend; any nonzero weight on an invalid
// axis invalidates the pixel.
fn blend(a: Option<f64>, wa: f64, b: Option<f64>, wb: f64) -> Option<f64> {
    let term = |value: Option<f64>, w: f64| {
        if w == 0.0 {
            Some(0.0)
        } else {
            value.map(|x| x * w)
        }
    };
    Some(term(a, wa)? + term(b, wb)?)
}

/// Blended anamorphic incident angle at `v`, or `None` outside the field.
pub fn incident_angle(v: ViewCoord, lens: &LensParams) -> Option<f64> {
    let r = v.radius();
    if r == 0.0 {
        return Some(0.0);
    }
    let w = phi_weights(v);
    let f_inv = lens.focal_reciprocal;
    let theta_x = azimuthal_theta(r, f_inv, lens.k.kx);
    let theta_y = azimuthal_theta(r, f_inv, select_ky(lens.k, v));
    let theta = blend(theta_x, w.wx, theta_y, w.wy)?;
    (theta <= PI).then_some(theta)
}

/// Primary ray through view coordinate `v`.
pub fn primary_ray(v: ViewCoord, lens: &LensParams) -> IncidentRay {
    let r = v.radius();
    if r == 0.0 {
        return IncidentRay::FORWARD;
    }
    match incident_angle(v, lens) {
        Some(theta) => {
            let (sin, cos) = theta.sin_cos();
            let scale = sin / r;
            IncidentRay {
                gx: scale * v.vx,
                gy: scale * v.vy,
                gz: cos,
                valid: true,
            }
        }
        None => IncidentRay::INVALID,
    }
}

/// Largest angle of view a projection factor can reach, and whether that
/// bound itself is attainable.
pub fn max_aov(k: f64) -> (f64, bool) {
    if k > 0.0 {
        let pole = PI / k;
        if pole <= TAU {
            (pole, false)
        } else {
            (TAU, true)
        }
    } else if k == 0.0 {
        (TAU, true)
    } else {
        ((PI / -k).min(TAU), true)
    }
}

/// Reciprocal focal length giving angle of view `omega` (radians) along an
/// axis with factor `k_axis`.
pub fn focal_from_aov(omega: f64, k_axis: f64) -> Result<f64> {
    check_k("k", k_axis)?;
    let (max, inclusive) = max_aov(k_axis);
    let in_range = omega.is_finite()
        && omega > 0.0
        && if inclusive { omega <= max } else { omega < max };
    if !in_range {
        return Err(Error::AovOutOfRange {
            k: k_axis,
            requested_deg: omega.to_degrees(),
            max_deg: max.to_degrees(),
            max_inclusive: inclusive,
        });
    }
    let half = omega / 2.0;
    Ok(if k_axis > 0.0 {
        (half * k_axis).tan() / k_axis
    } else if k_axis == 0.0 {
        half
    } else {
        (half * k_axis).sin() / k_axis
    })
}

/// Angle of view spanned by view coordinates `[-1, 1]` along an axis with
/// factor `k_axis`. Inverse of [`focal_from_aov`].
pub fn aov_from_focal(f_inv: f64, k_axis: f64) -> Result<f64> {
    check_k("k", k_axis)?;
    if !(f_inv.is_finite() && f_inv > 0.0) {
        return Err(Error::invalid(
            "focal_reciprocal",
            format!("{f_inv} must be finite and > 0"),
        ));
    }
    let omega = if k_axis > 0.0 {
        2.0 * (k_axis * f_inv).atan() / k_axis
    } else if k_axis == 0.0 {
        2.0 * f_inv
    } else {
        let s = k_axis * f_inv;
        if s < -1.0 {
            return Err(Error::FocalTooShort {
                k: k_axis,
                product: -s,
            });
        }
        2.0 * s.asin() / k_axis
    };
    if omega > TAU {
        return Err(Error::OutsideField {
            what: "an angle of view wider than the full sphere",
        });
    }
    Ok(omega)
}

/// Diagonal angle of view of a frame with the given width/height ratio:
/// the blended incident angles at the upper and lower right corners, summed.
/// For symmetric lenses this is twice the corner angle.
pub fn aov_diagonal(lens: &LensParams, aspect: f64) -> Result<f64> {
    if !(aspect.is_finite() && aspect > 0.0) {
        return Err(Error::invalid("aspect", format!("{aspect} must be > 0")));
    }
    let (ex, ey) = lens.reference_axis.extents(aspect, 1.0);
    let top = incident_angle(ViewCoord::new(ex, ey), lens);
    let bottom = incident_angle(ViewCoord::new(ex, -ey), lens);
    match (top, bottom) {
        (Some(t), Some(b)) => Ok(t + b),
        _ => Err(Error::OutsideField {
            what: "the frame corner",
        }),
    }
}

/// Horizontal, vertical and diagonal angles of view of a frame, measured
/// between opposite frame edges (or corners). `None` where that edge lies
/// outside the projection field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameAov {
    pub horizontal: Option<f64>,
    pub vertical: Option<f64>,
    pub diagonal: Option<f64>,
}

pub fn frame_aov(lens: &LensParams, aspect: f64) -> Result<FrameAov> {
    if !(aspect.is_finite() && aspect > 0.0) {
        return Err(Error::invalid("aspect", format!("{aspect} must be > 0")));
    }
    let (ex, ey) = lens.reference_axis.extents(aspect, 1.0);
    let span = |a: ViewCoord, b: ViewCoord| Some(incident_angle(a, lens)? + incident_angle(b, lens)?);
    Ok(FrameAov {
        horizontal: span(ViewCoord::new(ex, 0.0), ViewCoord::new(-ex, 0.0)),
        vertical: span(ViewCoord::new(0.0, ey), ViewCoord::new(0.0, -ey)),
        diagonal: aov_diagonal(lens, aspect).ok(),
    })
}

/// Falloff of one power axis. The exponent runs from 1 (cosine law, `k = -1`)
/// to 2 (inverse-square law, `k = 1`); the angle is scaled so the mask reaches
/// zero at the widest field of `k` and stays dark past it.
pub fn axis_vignette(theta: f64, k: f64) -> f64 {
    let scaled = (k.abs().max(0.5) * theta).min(FRAC_PI_2);
    scaled.cos().abs().powf((k + 3.0) / 2.0)
}

/// Anamorphic vignetting mask at `v`, in `[0, 1]`; zero outside the field.
pub fn vignette(v: ViewCoord, lens: &LensParams) -> f64 {
    let r = v.radius();
    if r == 0.0 {
        return 1.0;
    }
    if incident_angle(v, lens).is_none() {
        return 0.0;
    }
    let w = phi_weights(v);
    let f_inv = lens.focal_reciprocal;
    let kx = lens.k.kx;
    let ky = select_ky(lens.k, v);
    let mask_x = azimuthal_theta(r, f_inv, kx).map(|t| axis_vignette(t, kx));
    let mask_y = azimuthal_theta(r, f_inv, ky).map(|t| axis_vignette(t, ky));
    blend(mask_x, w.wx, mask_y, w.wy).unwrap_or(0.0).clamp(0.0, 1.0)
}

/// Componentwise blend of two lens shapes, e.g. for a tilt-driven transition.
/// A missing `kz` counts as equal to that vector's `ky`.
pub fn lerp_k(a: KVector, b: KVector, t: f64) -> KVector {
    let t = t.clamp(0.0, 1.0);
    let mix = |x: f64, y: f64| ((1.0 - t) * x + t * y).clamp(-1.0, 1.0);
    KVector {
        kx: mix(a.kx, b.kx),
        ky: mix(a.ky, b.ky),
        kz: match (a.kz, b.kz) {
            (None, None) => None,
            _ => Some(mix(a.bottom(), b.bottom())),
        },
    }
}

/// Common name of the azimuthal projection with factor `k`, if it has one.
pub fn projection_name(k: f64) -> Option<&'static str> {
    match k {
        1.0 => Some("Rectilinear"),
        0.5 => Some("Stereographic"),
        0.0 => Some("Equidistant"),
        -0.5 => Some("Equisolid"),
        -1.0 => Some("Orthographic"),
        _ => None,
    }
}

/// Spatial attributes a projection factor is best at conveying.
pub fn perception(k: f64) -> Option<&'static str> {
    match k {
        1.0 => Some("straightness"),
        0.5 => Some("shape, angle"),
        0.0 => Some("speed, aim"),
        -0.5 => Some("distance, size"),
        _ => None,
    }
}
