use std::sync::OnceLock;

use serde::Deserialize;

use super::{Material, Scene, SceneError, SceneObject};

/// Name-prefix → material table. Matching is case-insensitive and the
/// longest matching prefix wins.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MaterialRules {
    rules: Vec<(String, Material)>,
}

impl MaterialRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, prefix: impl Into<String>, material: Material) -> Self {
        self.rules.push((prefix.into(), material));
        self
    }

    pub fn push(&mut self, prefix: impl Into<String>, material: Material) {
        self.rules.push((prefix.into(), material));
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// The rule keys that win for `name`: either one, none, or several
    /// of equal length (ambiguous).
    fn best_matches(&self, name: &str) -> Vec<usize> {
        let lower = name.to_lowercase();
        let mut best_len = 0;
        let mut best = Vec::new();
        for (i, (prefix, _)) in self.rules.iter().enumerate() {
            if !lower.starts_with(&prefix.to_lowercase()) {
                continue;
            }
            let len = prefix.chars().count();
            if len > best_len || best.is_empty() {
                best_len = len;
                best.clear();
                best.push(i);
            } else if len == best_len {
                best.push(i);
            }
        }
        best
    }
}

#[derive(Deserialize)]
struct MaterialFile {
    materials: Vec<Material>,
}

/// The default material table shipped with the crate (`data/materials.json`).
pub fn builtin_materials() -> &'static [Material] {
    static TABLE: OnceLock<Vec<Material>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let file: MaterialFile = serde_json::from_str(include_str!("../../data/materials.json"))
            .expect("bundled material table is valid JSON");
        file.materials
    })
}

/// Rebinds every object to the material of its longest matching rule.
///
/// Rule materials replace same-named materials already in the scene and
/// are appended otherwise, so applying the same rules twice is a no-op.
pub fn assign_materials_by_name(scene: &Scene, rules: &MaterialRules) -> Result<Scene, SceneError> {
    let mut unmatched = Vec::new();
    let mut chosen = Vec::with_capacity(scene.objects().len());
    for obj in scene.objects() {
        let best = rules.best_matches(&obj.name);
        match best.len() {
            0 => unmatched.push(obj.name.clone()),
            1 => chosen.push(best[0]),
            _ => {
                return Err(SceneError::AmbiguousName {
                    name: obj.name.clone(),
                    rules: best.iter().map(|&i| rules.rules[i].0.clone()).collect(),
                })
            }
        }
    }
    if !unmatched.is_empty() {
        return Err(SceneError::UnmatchedNames(unmatched));
    }

    let mut materials = scene.materials().to_vec();
    let mut objects: Vec<SceneObject> = Vec::with_capacity(scene.objects().len());
    for (obj, rule) in scene.objects().iter().zip(chosen) {
        let m = &rules.rules[rule].1;
        let idx = match materials.iter().position(|x| x.name == m.name) {
            Some(i) => {
                materials[i] = m.clone();
                i
            }
            None => {
                materials.push(m.clone());
                materials.len() - 1
            }
        };
        objects.push(SceneObject {
            name: obj.name.clone(),
            material: idx,
            triangles: obj.triangles.clone(),
        });
    }
    Scene::new(scene.frequency_hz(), scene.declared_bounds().copied(), materials, objects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Triangle, Vec3};
    use crate::scene::serialize_scene;

    fn builtin(name: &str) -> Material {
        builtin_materials().iter().find(|m| m.name == name).unwrap().clone()
    }

    fn scene_with(names: &[&str]) -> Scene {
        let m = Material::new("placeholder", 1.0, 0.0, 1.0).unwrap();
        let t = Triangle::new(Vec3::zeros(), Vec3::x(), Vec3::y());
        let objects = names
            .iter()
            .map(|n| SceneObject {
                name: n.to_string(),
                material: 0,
                triangles: vec![t],
            })
            .collect();
        Scene::new(3e9, None, vec![m], objects).unwrap()
    }

    #[test]
    fn direct_rule_application() {
        let rules = MaterialRules::new()
            .with("wall", builtin("concrete"))
            .with("window", builtin("glass"));
        let s = assign_materials_by_name(&scene_with(&["wall_1", "window_2"]), &rules).unwrap();
        assert_eq!(s.material_of(0).name, "concrete");
        assert_eq!(s.material_of(1).name, "glass");
    }

    #[test]
    fn longest_prefix_wins() {
        let rules = MaterialRules::new()
            .with("wall", builtin("concrete"))
            .with("wallGlass", builtin("glass"));
        let s = assign_materials_by_name(&scene_with(&["wallGlass_3", "wall_1"]), &rules).unwrap();
        assert_eq!(s.material_of(0).name, "glass");
        assert_eq!(s.material_of(1).name, "concrete");
    }

    #[test]
    fn unmatched_name_listed() {
        let rules = MaterialRules::new().with("wall", builtin("concrete"));
        match assign_materials_by_name(&scene_with(&["roof", "wall_a", "floor"]), &rules) {
            Err(SceneError::UnmatchedNames(names)) => assert_eq!(names, vec!["roof", "floor"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn equal_length_matches_are_ambiguous() {
        let rules = MaterialRules::new()
            .with("roadSurface", builtin("concrete"))
            .with("roadsurface", builtin("ground"));
        assert!(matches!(
            assign_materials_by_name(&scene_with(&["roadSurface_7"]), &rules),
            Err(SceneError::AmbiguousName { .. })
        ));
    }

    #[test]
    fn idempotent() {
        let rules = MaterialRules::new()
            .with("wall", builtin("concrete"))
            .with("door", builtin("wood"));
        let once = assign_materials_by_name(&scene_with(&["wall", "door_1"]), &rules).unwrap();
        let twice = assign_materials_by_name(&once, &rules).unwrap();
        assert_eq!(serialize_scene(&once), serialize_scene(&twice));
    }

    #[test]
    fn builtin_table_is_valid() {
        let names: Vec<_> = builtin_materials().iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["concrete", "glass", "wood", "metal", "ground"]);
        for m in builtin_materials() {
            m.validate().unwrap();
        }
    }
}
