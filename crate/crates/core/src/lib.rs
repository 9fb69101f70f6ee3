//! Asymmetric anamorphic azimuthal projection for wide-angle imagery.
//!
//! A lens is two azimuthal projections, one per power axis, each picked by a
//! factor `k ∈ [-1, 1]` and sharing one focal length. This crate turns such a
//! lens into per-pixel primary rays and everything derived from them:
//!
//! - [`projection`]: incident angles, primary rays, focal length ↔ angle of
//!   view, vignetting.
//! - [`mapgen`]: ray maps and ST-maps over a pixel grid; [`io`] stores them.
//! - [`distortion`]: anamorphic Brown-Conrady distortion (division variant).
//! - [`chromatic`]: spectral colors and distortion-driven chromatic aberration.
//! - [`remap`]: rendering lens views out of equirectangular panoramas.
//! - [`profile`]: the lens-profile JSON document and built-in presets.
//!
//! ```
//! use pantomorph::projection::{aov_from_focal, KVector, LensParams, ReferenceAxis};
//! use pantomorph::mapgen::generate_raymap;
//!
//! // Equisolid horizontally, equidistant vertically, f = 1.
//! let lens = LensParams::with_focal(KVector::new(-0.5, 0.0)?, 1.0, ReferenceAxis::Horizontal)?;
//! let omega = aov_from_focal(lens.focal_reciprocal(), lens.k().kx())?;
//! assert!((omega.to_degrees() - 120.0).abs() < 1e-9);
//!
//! let map = generate_raymap(64, 36, &lens)?;
//! assert!(map.rays().iter().all(|g| g.valid));
//! # Ok::<(), pantomorph::Error>(())
//! ```

pub mod chromatic;
pub mod distortion;
mod error;
pub mod io;
pub mod mapgen;
pub mod profile;
pub mod projection;
pub mod raster;
pub mod remap;

pub use error::{Error, Result};

// The guide's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/focal-and-aov.md")]
    mod focal_and_aov {}
    #[doc = include_str!("../../../book/src/vignetting.md")]
    mod vignetting {}
    #[doc = include_str!("../../../book/src/maps.md")]
    mod maps {}
    #[doc = include_str!("../../../book/src/distortion.md")]
    mod distortion {}
    #[doc = include_str!("../../../book/src/chromatic.md")]
    mod chromatic {}
    #[doc = include_str!("../../../book/src/panoramas.md")]
    mod panoramas {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
