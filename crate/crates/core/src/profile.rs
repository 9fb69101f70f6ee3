//! Lens profiles: the versioned JSON document that carries a complete lens
//! (shape, focal length, distortion, aberration, vignetting), and the
//! built-in presets for common kinds of content.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "flying",
//!   "lens": { "kx": -0.5, "ky": 0.0, "focal_reciprocal": 1.0, "reference_axis": "horizontal" },
//!   "distortion": { "c": [0, 0], "p": [0, 0], "q": [0, 0], "radial_x": [-0.25], "radial_y": [0.04] },
//!   "chromatic": { "samples": 64, "dispersion": 0.5 },
//!   "vignette": true,
//!   "metadata": { "content": "Flying simulation" }
//! }
//! ```
//!
//! Serialization is canonical: field order is fixed and metadata keys are
//! sorted, so saving a loaded profile reproduces the same bytes.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chromatic::ChromaticParams;
use crate::distortion::DistortionParams;
use crate::error::{Error, Result};
use crate::projection::{perception, projection_name, KVector, LensParams, ReferenceAxis};

pub const PROFILE_VERSION: u32 = 1;

/// Wire form of [`LensParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensDoc {
    pub kx: f64,
    pub ky: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kz: Option<f64>,
    pub focal_reciprocal: f64,
    #[serde(default)]
    pub reference_axis: ReferenceAxis,
}

impl From<&LensParams> for LensDoc {
    fn from(lens: &LensParams) -> Self {
        let k = lens.k();
        Self {
            kx: k.kx(),
            ky: k.ky(),
            kz: k.kz(),
            focal_reciprocal: lens.focal_reciprocal(),
            reference_axis: lens.reference_axis(),
        }
    }
}

fn within(prefix: &str, err: Error) -> Error {
    match err {
        Error::Invalid { field, message } => Error::Invalid {
            field: format!("{prefix}.{field}"),
            message,
        },
        other => other,
    }
}

impl LensDoc {
    pub fn to_params(&self) -> Result<LensParams> {
        let k = match self.kz {
            Some(kz) => KVector::asymmetric(self.kx, self.ky, kz),
            None => KVector::new(self.kx, self.ky),
        }
        .map_err(|e| within("lens", e))?;
        LensParams::new(k, self.focal_reciprocal, self.reference_axis).map_err(|e| within("lens", e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    version: u32,
    name: String,
    lens: LensDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distortion: Option<DistortionParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    chromatic: Option<ChromaticParams>,
    #[serde(default)]
    vignette: bool,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

/// A named, validated lens with its optional effects.
#[derive(Debug, Clone, PartialEq)]
pub struct LensProfile {
    pub name: String,
    pub lens: LensParams,
    pub distortion: Option<DistortionParams>,
    pub chromatic: Option<ChromaticParams>,
    pub vignette: bool,
    /// Free-form labels such as the content type or perception tags.
    pub metadata: BTreeMap<String, String>,
}

impl LensProfile {
    pub fn new(name: impl Into<String>, lens: LensParams) -> Self {
        Self {
            name: name.into(),
            lens,
            distortion: None,
            chromatic: None,
            vignette: false,
            metadata: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(d) = &self.distortion {
            d.validate()?;
        }
        if let Some(c) = &self.chromatic {
            c.validate()?;
        }
        Ok(())
    }

    /// Parses and validates a profile document. Unknown fields are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProfileDoc = serde_json::from_str(text).map_err(|e| {
            Error::invalid(
                "profile",
                format!("line {} column {}: {e}", e.line(), e.column()),
            )
        })?;
        Self::from_doc(doc)
    }

    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let doc: ProfileDoc =
            serde_json::from_value(value).map_err(|e| Error::invalid("profile", e.to_string()))?;
        Self::from_doc(doc)
    }

    fn from_doc(doc: ProfileDoc) -> Result<Self> {
        if doc.version != PROFILE_VERSION {
            return Err(Error::invalid(
                "version",
                format!("unsupported profile version {} (expected {PROFILE_VERSION})", doc.version),
            ));
        }
        let profile = Self {
            name: doc.name,
            lens: doc.lens.to_params()?,
            distortion: doc.distortion,
            chromatic: doc.chromatic,
            vignette: doc.vignette,
            metadata: doc.metadata,
        };
        profile.validate()?;
        Ok(profile)
    }

    fn to_doc(&self) -> ProfileDoc {
        ProfileDoc {
            version: PROFILE_VERSION,
            name: self.name.clone(),
            lens: LensDoc::from(&self.lens),
            distortion: self.distortion.clone(),
            chromatic: self.chromatic,
            vignette: self.vignette,
            metadata: self.metadata.clone(),
        }
    }

    /// Canonical pretty-printed JSON, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.to_doc()).expect("profile serializes");
        text.push('\n');
        text
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_doc()).expect("profile serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

fn component_label(k: f64) -> Option<String> {
    Some(format!("{}: {}", projection_name(k)?, perception(k)?))
}

fn preset(name: &str, content: &str, k: &[f64], focal: f64) -> LensProfile {
    let k = KVector::from_slice(k).expect("preset k is in range");
    let lens = LensParams::with_focal(k, focal, ReferenceAxis::Horizontal).expect("preset focal is valid");
    let mut profile = LensProfile::new(name, lens);
    profile.vignette = true;
    profile.metadata.insert("content".into(), content.into());
    let components = [("kx", Some(k.kx())), ("ky", Some(k.ky())), ("kz", k.kz())];
    for (key, value) in components {
        if let Some(label) = value.and_then(component_label) {
            profile.metadata.insert(key.into(), label);
        }
    }
    profile
}

/// Built-in lenses for racing, flying, stereopsis and first-person content,
/// each at the focal length of its reference rendering.
pub fn preset_registry() -> Vec<LensProfile> {
    vec![
        preset("racing", "Racing simulation", &[0.5, -0.5, 0.0], 0.618),
        preset("flying", "Flying simulation", &[-0.5, 0.0], 1.0),
        preset("stereopsis", "Stereopsis (cyclopean)", &[0.0, -0.5], 0.63),
        preset("first-person", "First-person aiming", &[0.0, 0.75, -0.5], 0.82),
    ]
}

pub fn lookup_preset(name: &str) -> Option<LensProfile> {
    preset_registry().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_contents() {
        let names: Vec<_> = preset_registry().into_iter().map(|p| p.name).collect();
        assert_eq!(names, ["racing", "flying", "stereopsis", "first-person"]);
        let racing = lookup_preset("racing").unwrap();
        assert_eq!(racing.lens.k().to_vec(), [0.5, -0.5, 0.0]);
        assert_eq!(racing.metadata["kz"], "Equidistant: speed, aim");
        let fp = lookup_preset("first-person").unwrap();
        assert_eq!(fp.lens.k().to_vec(), [0.0, 0.75, -0.5]);
        assert!(!fp.metadata.contains_key("ky"));
        assert_eq!(lookup_preset("flying").unwrap().lens.k().kz(), None);
        assert!(lookup_preset("panini").is_none());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let mut p = lookup_preset("racing").unwrap();
        p.distortion = Some(DistortionParams::radial(-0.25, 0.04));
        p.chromatic = Some(ChromaticParams::new(64, 0.5).unwrap());
        let first = p.to_json();
        let loaded = LensProfile::from_json(&first).unwrap();
        assert_eq!(loaded, p);
        assert_eq!(loaded.to_json(), first);
    }

    #[test]
    fn rejects_unknown_fields_with_position() {
        let text = r#"{"version":1,"name":"x","lens":{"kx":0,"ky":0,"focal_reciprocal":1},"zoom":2}"#;
        let err = LensProfile::from_json(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("zoom") && msg.contains("column"), "{msg}");
        let text = r#"{"version":1,"name":"x","lens":{"kx":0,"ky":0,"f":1,"focal_reciprocal":1}}"#;
        assert!(LensProfile::from_json(text).is_err());
    }

    #[test]
    fn nested_validation_names_fields() {
        let text = r#"{"version":1,"name":"x","lens":{"kx":2,"ky":0,"focal_reciprocal":1}}"#;
        assert_eq!(LensProfile::from_json(text).unwrap_err().field(), "lens.kx");
        let text = r#"{"version":1,"name":"x","lens":{"kx":0,"ky":0,"focal_reciprocal":1},
                      "chromatic":{"samples":3,"dispersion":0.5}}"#;
        assert_eq!(LensProfile::from_json(text).unwrap_err().field(), "chromatic.samples");
        let text = r#"{"version":2,"name":"x","lens":{"kx":0,"ky":0,"focal_reciprocal":1}}"#;
        assert_eq!(LensProfile::from_json(text).unwrap_err().field(), "version");
    }

    #[test]
    fn axis_accepts_short_names() {
        let text = r#"{"version":1,"name":"x","lens":{"kx":0,"ky":0,"focal_reciprocal":1,"reference_axis":"v"}}"#;
        let p = LensProfile::from_json(text).unwrap();
        assert_eq!(p.lens.reference_axis(), ReferenceAxis::Vertical);
        assert!(p.to_json().contains("\"vertical\""));
    }
}
