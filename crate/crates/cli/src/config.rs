//! Input files, `--set` overrides and their defaults.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use ioncollect::dipole::TransitionKind;
use ioncollect::mirror::{CollectionSystem, EmitterPose, MirrorProfile, MirrorShape};

/// A malformed input file, override or flag. Maps to exit status 1.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

/// Parses `key=value`. The value is read as JSON when it parses as JSON and
/// as a plain string otherwise, so `--set shape=sphere` works unquoted.
pub fn parse_override(s: &str) -> std::result::Result<(String, Value), String> {
    let (key, value) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("empty key in `{s}`"));
    }
    let value = serde_json::from_str(value.trim()).unwrap_or_else(|_| Value::String(value.trim().to_string()));
    Ok((key.to_string(), value))
}

/// Sets `path` (dot separated, array elements by index) in `doc`. Only the
/// last segment may be new; the schema check happens on deserialization.
fn apply(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut node = doc;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match node {
            Value::Object(map) => {
                if last {
                    map.insert(seg.to_string(), value);
                    return Ok(());
                }
                map.get_mut(*seg)
                    .ok_or_else(|| input_error(format!("--set {path}: no key `{seg}`")))?
            }
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| input_error(format!("--set {path}: `{seg}` is not an array index")))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| input_error(format!("--set {path}: index {idx} out of range (0..{len})")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => bail!(InputError(format!("--set {path}: `{seg}` is not inside an object or array"))),
        };
    }
    Ok(())
}

/// Reads `input` (or starts from `default`), applies the overrides and
/// deserializes. Errors carry the file name and the line/column from the
/// parser, or the offending override key.
pub fn load<T: Serialize + DeserializeOwned>(input: Option<&Path>, default: T, overrides: &[(String, Value)]) -> Result<T> {
    let (mut doc, origin) = match input {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            let doc: Value =
                serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
            (doc, path.display().to_string())
        }
        None => (serde_json::to_value(&default).context("serializing defaults")?, "built-in defaults".to_string()),
    };
    for (key, value) in overrides {
        apply(&mut doc, key, value.clone())?;
    }
    let what = if overrides.is_empty() {
        origin
    } else {
        format!("{origin} with --set overrides")
    };
    serde_json::from_value(doc).map_err(|e| input_error(format!("{what}: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere,
    Parabola,
}

fn default_wavelength() -> f64 {
    369.5
}

fn default_plane() -> f64 {
    50.0
}

fn sigma() -> TransitionKind {
    TransitionKind::SigmaPlus
}

/// Mirror file. Spheres take `roc_um` and `theta_max_deg`; paraboloids take
/// `focal_length_um` and one of `theta_max_deg` or `rho0_over_f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MirrorConfig {
    pub shape: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roc_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focal_length_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0_over_f: Option<f64>,
    #[serde(default = "default_wavelength")]
    pub wavelength_nm: f64,
    #[serde(default = "default_plane")]
    pub plane_mm: f64,
    #[serde(default)]
    pub axial_offset_um: f64,
    #[serde(default = "sigma")]
    pub transition: TransitionKind,
    /// Azimuthal phase on the reflected light; defaults to on for π.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vortex: Option<bool>,
}

impl Default for MirrorConfig {
    /// RoC 160 µm sphere at 48°, analysis plane 50 mm.
    fn default() -> Self {
        Self {
            shape: ShapeKind::Sphere,
            roc_um: Some(160.0),
            focal_length_um: None,
            theta_max_deg: Some(48.0),
            rho0_over_f: None,
            wavelength_nm: default_wavelength(),
            plane_mm: default_plane(),
            axial_offset_um: 0.0,
            transition: sigma(),
            vortex: None,
        }
    }
}

impl MirrorConfig {
    pub fn vortex(&self) -> bool {
        self.vortex.unwrap_or(!self.transition.is_sigma())
    }

    pub fn shape(&self) -> Result<MirrorShape> {
        Ok(match self.shape {
            ShapeKind::Sphere => MirrorShape::Spherical {
                roc: self.roc_um.ok_or_else(|| input_error("a sphere needs `roc_um`"))? * 1e-6,
            },
            ShapeKind::Parabola => MirrorShape::Parabolic {
                focal_length: self
                    .focal_length_um
                    .ok_or_else(|| input_error("a parabola needs `focal_length_um`"))?
                    * 1e-6,
            },
        })
    }

    pub fn system(&self) -> Result<CollectionSystem> {
        let shape = self.shape()?;
        let mirror = match (self.theta_max_deg, self.rho0_over_f, shape) {
            (Some(_), Some(_), _) => return Err(input_error("give either `theta_max_deg` or `rho0_over_f`, not both")),
            (Some(deg), None, _) => MirrorProfile::new(shape, deg.to_radians())?,
            (None, Some(r), MirrorShape::Parabolic { focal_length }) => {
                MirrorProfile::parabola_with_aperture(focal_length, r * focal_length)?
            }
            (None, Some(_), MirrorShape::Spherical { .. }) => {
                return Err(input_error("`rho0_over_f` applies to parabolas only; use `theta_max_deg`"))
            }
            (None, None, _) => return Err(input_error("the aperture needs `theta_max_deg` or `rho0_over_f`")),
        };
        Ok(CollectionSystem::new(mirror, self.wavelength_nm * 1e-9, self.plane_mm * 1e-3)?.with_pose(EmitterPose {
            axial_offset: self.axial_offset_um * 1e-6,
        }))
    }
}

/// Scale-study file. The analysis plane scales with the mirror so that a
/// mirror of `reference_roc_um` sees it at `reference_plane_mm`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleConfig {
    pub rocs_um: Vec<f64>,
    pub theta_max_deg: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength_nm: f64,
    pub reference_roc_um: f64,
    #[serde(default = "default_plane")]
    pub reference_plane_mm: f64,
    pub transitions: Vec<TransitionKind>,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            rocs_um: vec![16.0, 160.0, 1600.0],
            theta_max_deg: 48.0,
            wavelength_nm: default_wavelength(),
            reference_roc_um: 160.0,
            reference_plane_mm: default_plane(),
            transitions: vec![TransitionKind::SigmaPlus, TransitionKind::Pi],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_values() {
        assert_eq!(parse_override("roc_um=16").unwrap(), ("roc_um".into(), Value::from(16)));
        assert_eq!(parse_override("shape=parabola").unwrap().1, Value::from("parabola"));
        assert_eq!(parse_override("vortex=true").unwrap().1, Value::from(true));
        assert!(parse_override("roc_um").is_err());
        assert!(parse_override("=3").is_err());
    }

    #[test]
    fn overrides_reach_nested_and_array_keys() {
        let mut doc = serde_json::json!({"a": {"b": 1}, "cols": [{"x": 1}, {"x": 2}]});
        apply(&mut doc, "a.b", Value::from(5)).unwrap();
        apply(&mut doc, "cols.1.x", Value::from(7)).unwrap();
        assert_eq!(doc["a"]["b"], 5);
        assert_eq!(doc["cols"][1]["x"], 7);
        assert!(apply(&mut doc, "cols.9.x", Value::from(0)).is_err());
        assert!(apply(&mut doc, "nope.x", Value::from(0)).is_err());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = load(None, MirrorConfig::default(), &[("roc_mm".into(), Value::from(1))]).unwrap_err();
        assert!(err.downcast_ref::<InputError>().is_some());
        assert!(err.to_string().contains("roc_mm"), "{err}");
    }

    #[test]
    fn mirror_defaults_build() {
        let sys = MirrorConfig::default().system().unwrap();
        assert!((sys.mirror.theta_max() - 48f64.to_radians()).abs() < 1e-15);
        let para = MirrorConfig {
            shape: ShapeKind::Parabola,
            roc_um: None,
            focal_length_um: Some(80.0),
            theta_max_deg: None,
            rho0_over_f: Some(20.0),
            ..MirrorConfig::default()
        };
        assert!(para.system().is_ok());
        assert!(MirrorConfig { rho0_over_f: Some(2.0), ..MirrorConfig::default() }.system().is_err());
    }
}
