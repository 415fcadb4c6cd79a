//! Material-annotated triangle scenes.
//!
//! A [`Scene`] is built once (usually by [`parse_scene`]) and never mutated
//! afterwards; operations that change materials return a new scene. Objects
//! reference materials by index into the scene's material table.

mod pose;
mod rules;
mod xml;

pub use pose::{transform_points, Pose};
pub use rules::{assign_materials_by_name, builtin_materials, MaterialRules};
pub use xml::{parse_scene, serialize_scene};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wavelength, Aabb, Triangle, Vec3, VACUUM_PERMITTIVITY};

/// Triangles smaller than this are rejected as degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SceneError {
    #[error("malformed scene XML at line {line}, column {column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("object `{object}` references undefined material `{material}`")]
    UnresolvedMaterial { object: String, material: String },
    #[error("object `{object}` has a degenerate triangle at index {index}")]
    DegenerateTriangle { object: String, index: usize },
    #[error("object `{object}` lies outside the scene bounds")]
    OutOfBounds { object: String },
    #[error("invalid material `{name}`: {reason}")]
    InvalidMaterial { name: String, reason: String },
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("no material rule matches object name(s): {}", .0.join(", "))]
    UnmatchedNames(Vec<String>),
    #[error("object name `{name}` matches several rules of equal length: {}", .rules.join(", "))]
    AmbiguousName { name: String, rules: Vec<String> },
    #[error("invalid pose: {0}")]
    InvalidPose(String),
}

/// Electromagnetic description of a surface.
///
/// An infinite conductivity marks a perfect electric conductor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub relative_permittivity: f64,
    pub conductivity: f64,
    #[serde(default = "one")]
    pub relative_permeability: f64,
    /// Reserved; diffuse scattering is not modelled.
    #[serde(default)]
    pub scattering_fraction: f64,
}

fn one() -> f64 {
    1.0
}

impl Material {
    pub fn new(
        name: impl Into<String>,
        relative_permittivity: f64,
        conductivity: f64,
        relative_permeability: f64,
    ) -> Result<Self, SceneError> {
        let m = Material {
            name: name.into(),
            relative_permittivity,
            conductivity,
            relative_permeability,
            scattering_fraction: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn perfect_conductor(name: impl Into<String>) -> Self {
        Material {
            name: name.into(),
            relative_permittivity: 1.0,
            conductivity: f64::INFINITY,
            relative_permeability: 1.0,
            scattering_fraction: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |reason: &str| {
            Err(SceneError::InvalidMaterial {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.name.is_empty() {
            return bad("empty name");
        }
        if !(self.relative_permittivity >= 1.0) || !self.relative_permittivity.is_finite() {
            return bad("relative permittivity must be finite and >= 1");
        }
        if !(self.conductivity >= 0.0) {
            return bad("conductivity must be >= 0");
        }
        if !(self.relative_permeability > 0.0) || !self.relative_permeability.is_finite() {
            return bad("relative permeability must be finite and > 0");
        }
        if !(0.0..=1.0).contains(&self.scattering_fraction) {
            return bad("scattering fraction must lie in [0, 1]");
        }
        Ok(())
    }

    pub fn is_perfect_conductor(&self) -> bool {
        self.conductivity.is_infinite()
    }

    /// Complex refractive index `sqrt(mu_r (eps_r - j sigma / (omega eps0)))`.
    ///
    /// Uses the `exp(+j omega t)` convention of the propagation factor
    /// `exp(-j k d)`, so lossy media have a negative imaginary part. The
    /// imaginary part is exactly zero for a lossless material.
    pub fn refractive_index(&self, frequency_hz: f64) -> Complex64 {
        let omega = 2.0 * std::f64::consts::PI * frequency_hz;
        let eps = Complex64::new(
            self.relative_permittivity,
            -self.conductivity / (omega * VACUUM_PERMITTIVITY),
        );
        if self.conductivity == 0.0 {
            return Complex64::new((self.relative_permeability * self.relative_permittivity).sqrt(), 0.0);
        }
        (eps * self.relative_permeability).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub name: String,
    pub material: usize,
    pub triangles: Vec<Triangle>,
}

/// Identifies one triangle of a scene by its position in the flattened
/// (object-major) triangle list.
pub type TriangleId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    frequency_hz: f64,
    bounds: Option<Aabb>,
    materials: Vec<Material>,
    objects: Vec<SceneObject>,
}

impl Scene {
    /// Builds a scene, enforcing every structural invariant.
    pub fn new(
        frequency_hz: f64,
        bounds: Option<Aabb>,
        materials: Vec<Material>,
        objects: Vec<SceneObject>,
    ) -> Result<Self, SceneError> {
        if !(frequency_hz > 0.0) || !frequency_hz.is_finite() {
            return Err(SceneError::Invalid(format!(
                "frequency must be positive, got {frequency_hz}"
            )));
        }
        for m in &materials {
            m.validate()?;
        }
        for (i, m) in materials.iter().enumerate() {
            if materials[..i].iter().any(|o| o.name == m.name) {
                return Err(SceneError::Invalid(format!("duplicate material `{}`", m.name)));
            }
        }
        if let Some(b) = &bounds {
            if b.is_empty() {
                return Err(SceneError::Invalid("scene bounds are empty".into()));
            }
        }
        for obj in &objects {
            if obj.name.is_empty() {
                return Err(SceneError::Invalid("object with empty name".into()));
            }
            if obj.material >= materials.len() {
                return Err(SceneError::UnresolvedMaterial {
                    object: obj.name.clone(),
                    material: format!("#{}", obj.material),
                });
            }
            for (index, t) in obj.triangles.iter().enumerate() {
                if !(t.area() > MIN_TRIANGLE_AREA) || t.v.iter().any(|v| !v.iter().all(|c| c.is_finite())) {
                    return Err(SceneError::DegenerateTriangle {
                        object: obj.name.clone(),
                        index,
                    });
                }
                if let Some(b) = &bounds {
                    if !t.v.iter().all(|v| b.contains_point(v, 1e-9)) {
                        return Err(SceneError::OutOfBounds {
                            object: obj.name.clone(),
                        });
                    }
                }
            }
        }
        Ok(Scene {
            frequency_hz,
            bounds,
            materials,
            objects,
        })
    }

    /// A scene without geometry (free space).
    pub fn empty(frequency_hz: f64) -> Result<Self, SceneError> {
        Scene::new(frequency_hz, None, Vec::new(), Vec::new())
    }

    pub fn frequency_hz(&self) -> f64 {
        self.frequency_hz
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.frequency_hz)
    }

    /// Explicit bounds, if the document declared them.
    pub fn declared_bounds(&self) -> Option<&Aabb> {
        self.bounds.as_ref()
    }

    /// Declared bounds, or the triangle bounding box. `None` for an empty
    /// scene without declared bounds (unbounded free space).
    pub fn bounds(&self) -> Option<Aabb> {
        if let Some(b) = self.bounds {
            return Some(b);
        }
        let mut b = Aabb::empty();
        for t in self.objects.iter().flat_map(|o| o.triangles.iter()) {
            for v in &t.v {
                b.grow(v);
            }
        }
        (!b.is_empty()).then_some(b)
    }

    pub fn materials(&self) -> &[Material] {
        &self.materials
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn material_of(&self, object: usize) -> &Material {
        &self.materials[self.objects[object].material]
    }

    pub fn triangle_count(&self) -> usize {
        self.objects.iter().map(|o| o.triangles.len()).sum()
    }

    /// All triangles in object-major order, tagged with their object index.
    /// The position in this list is the [`TriangleId`].
    pub fn flat_triangles(&self) -> Vec<(usize, Triangle)> {
        self.objects
            .iter()
            .enumerate()
            .flat_map(|(i, o)| o.triangles.iter().map(move |t| (i, *t)))
            .collect()
    }

    pub fn material_index(&self, name: &str) -> Option<usize> {
        self.materials.iter().position(|m| m.name == name)
    }

    /// Returns a copy with extra objects appended. Used to add device
    /// geometry such as RIS panels.
    pub fn with_objects(&self, extra_materials: Vec<Material>, extra: Vec<SceneObject>) -> Result<Scene, SceneError> {
        let mut materials = self.materials.clone();
        materials.extend(extra_materials);
        let mut objects = self.objects.clone();
        objects.extend(extra);
        Scene::new(self.frequency_hz, self.bounds, materials, objects)
    }

    /// Whether `p` is inside the declared bounds. Scenes that declare no
    /// bounds are open, so every point is inside.
    pub fn contains(&self, p: &Vec3) -> bool {
        self.bounds.as_ref().is_none_or(|b| b.contains_point(p, 1e-9))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refractive_index_is_real_iff_lossless() {
        let glass = Material::new("glass", 2.25, 0.0, 1.0).unwrap();
        let n = glass.refractive_index(3e9);
        assert_eq!(n.im, 0.0);
        assert!((n.re - 1.5).abs() < 1e-15);
        let concrete = Material::new("concrete", 5.24, 0.1, 1.0).unwrap();
        let n = concrete.refractive_index(3e9);
        assert!(n.im < 0.0);
        assert!(n.re > 1.0);
    }

    #[test]
    fn material_invariants() {
        assert!(Material::new("x", 0.5, 0.0, 1.0).is_err());
        assert!(Material::new("x", 2.0, -1.0, 1.0).is_err());
        assert!(Material::new("x", 2.0, 0.0, 0.0).is_err());
        assert!(Material::perfect_conductor("pec").validate().is_ok());
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let m = Material::new("m", 2.0, 0.0, 1.0).unwrap();
        let p = Vec3::new(1.0, 1.0, 1.0);
        let obj = SceneObject {
            name: "wall".into(),
            material: 0,
            triangles: vec![Triangle::new(p, p, Vec3::zeros())],
        };
        assert!(matches!(
            Scene::new(1e9, None, vec![m], vec![obj]),
            Err(SceneError::DegenerateTriangle { .. })
        ));
    }
}
