#![allow(dead_code)]

use raytwin::geometry::{Triangle, Vec3};
use raytwin::scene::{Material, Scene, SceneObject};

pub fn quad(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Vec<Triangle> {
    vec![Triangle::new(a, b, c), Triangle::new(a, c, d)]
}

/// Axis-aligned room [0,lx]×[0,ly]×[0,lz] with one object per wall, in the
/// order x=0, x=lx, y=0, y=ly, z=0, z=lz.
pub fn box_room(lx: f64, ly: f64, lz: f64, material: Material, frequency: f64) -> Scene {
    let v = |x: f64, y: f64, z: f64| Vec3::new(x, y, z);
    let walls = [
        ("wall_x0", quad(v(0., 0., 0.), v(0., ly, 0.), v(0., ly, lz), v(0., 0., lz))),
        ("wall_x1", quad(v(lx, 0., 0.), v(lx, 0., lz), v(lx, ly, lz), v(lx, ly, 0.))),
        ("wall_y0", quad(v(0., 0., 0.), v(0., 0., lz), v(lx, 0., lz), v(lx, 0., 0.))),
        ("wall_y1", quad(v(0., ly, 0.), v(lx, ly, 0.), v(lx, ly, lz), v(0., ly, lz))),
        ("floor", quad(v(0., 0., 0.), v(lx, 0., 0.), v(lx, ly, 0.), v(0., ly, 0.))),
        ("ceiling", quad(v(0., 0., lz), v(0., ly, lz), v(lx, ly, lz), v(lx, 0., lz))),
    ];
    let objects = walls
        .into_iter()
        .map(|(name, triangles)| SceneObject {
            name: name.into(),
            material: 0,
            triangles,
        })
        .collect();
    Scene::new(frequency, None, vec![material], objects).unwrap()
}

pub fn ground_plane(half: f64, material: Material, frequency: f64) -> Scene {
    let v = |x: f64, y: f64| Vec3::new(x, y, 0.0);
    Scene::new(
        frequency,
        None,
        vec![material],
        vec![SceneObject {
            name: "ground".into(),
            material: 0,
            triangles: quad(v(-half, -half), v(half, -half), v(half, half), v(-half, half)),
        }],
    )
    .unwrap()
}

/// Specular paths in a closed box by explicit image construction: every
/// wall sequence without immediate repeats, reflection points found
/// backwards from the receiver and kept only if each lies on its wall face.
/// Returns (wall sequence, unfolded length) for all orders up to `max_order`.
pub fn box_image_sources(dims: [f64; 3], tx: Vec3, rx: Vec3, max_order: usize) -> Vec<(Vec<usize>, f64)> {
    // wall w: axis w/2, coordinate 0 or dims[axis]
    let plane = |w: usize| (w / 2, if w % 2 == 0 { 0.0 } else { dims[w / 2] });
    let mut out = vec![(Vec::new(), (rx - tx).norm())];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for seq in &frontier {
            for w in 0..6 {
                if seq.last() == Some(&w) {
                    continue;
                }
                let mut s = seq.clone();
                s.push(w);
                next.push(s);
            }
        }
        for seq in &next {
            let mut images = vec![tx];
            for &w in seq {
                let (axis, c) = plane(w);
                let mut p = *images.last().unwrap();
                p[axis] = 2.0 * c - p[axis];
                images.push(p);
            }
            let mut target = rx;
            let mut ok = true;
            for i in (0..seq.len()).rev() {
                let (axis, c) = plane(seq[i]);
                let img = images[i + 1];
                let denom = target[axis] - img[axis];
                if denom.abs() < 1e-15 {
                    ok = false;
                    break;
                }
                let s = (c - img[axis]) / denom;
                if !(s > 0.0 && s < 1.0) {
                    ok = false;
                    break;
                }
                let p = img + (target - img) * s;
                for a in 0..3 {
                    if a != axis && !(p[a] >= 0.0 && p[a] <= dims[a]) {
                        ok = false;
                    }
                }
                target = p;
            }
            if ok {
                out.push((seq.clone(), (rx - images[seq.len()]).norm()));
            }
        }
        frontier = next;
    }
    out
}

pub fn builtin(name: &str) -> Material {
    raytwin::scene::builtin_materials().iter().find(|m| m.name == name).unwrap().clone()
}

/// Axis-aligned closed box as 12 outward-facing triangles.
pub fn cuboid(min: Vec3, max: Vec3) -> Vec<Triangle> {
    let c = |x: usize, y: usize, z: usize| {
        Vec3::new(
            if x == 0 { min.x } else { max.x },
            if y == 0 { min.y } else { max.y },
            if z == 0 { min.z } else { max.z },
        )
    };
    let mut t = Vec::new();
    t.extend(quad(c(0, 0, 0), c(0, 1, 0), c(1, 1, 0), c(1, 0, 0)));
    t.extend(quad(c(0, 0, 1), c(1, 0, 1), c(1, 1, 1), c(0, 1, 1)));
    t.extend(quad(c(0, 0, 0), c(1, 0, 0), c(1, 0, 1), c(0, 0, 1)));
    t.extend(quad(c(0, 1, 0), c(0, 1, 1), c(1, 1, 1), c(1, 1, 0)));
    t.extend(quad(c(0, 0, 0), c(0, 0, 1), c(0, 1, 1), c(0, 1, 0)));
    t.extend(quad(c(1, 0, 0), c(1, 1, 0), c(1, 1, 1), c(1, 0, 1)));
    t
}

/// 8×6×3 m concrete room with a glass partition and a metal pillar, so
/// reflection, transmission and diffraction all occur.
pub fn furnished_room(frequency: f64) -> Scene {
    let base = box_room(8.0, 6.0, 3.0, builtin("concrete"), frequency);
    let v = Vec3::new;
    base.with_objects(
        vec![builtin("glass"), builtin("metal")],
        vec![
            SceneObject {
                name: "partition".into(),
                material: 1,
                triangles: quad(v(4.0, 0.0, 0.0), v(4.0, 3.5, 0.0), v(4.0, 3.5, 3.0), v(4.0, 0.0, 3.0)),
            },
            SceneObject {
                name: "pillar".into(),
                material: 2,
                triangles: cuboid(v(5.5, 3.8, 0.0), v(6.1, 4.4, 3.0)),
            },
        ],
    )
    .unwrap()
}

/// A bare path with the given gain, delay and directions, for channel tests.
pub fn synthetic_path(gain: raytwin::Complex64, delay: f64, departure: Vec3, arrival: Vec3) -> raytwin::ray::PathRecord {
    let zero = raytwin::Complex64::new(0.0, 0.0);
    let length = delay * raytwin::geometry::SPEED_OF_LIGHT;
    raytwin::ray::PathRecord {
        receiver: 0,
        gain,
        jones: [[gain, zero], [zero, gain]],
        delay,
        length,
        tx: Vec3::zeros(),
        rx: departure * length,
        departure,
        arrival,
        doppler_hz: 0.0,
        interactions: Vec::new(),
    }
}

pub const SHOEBOX_SCENE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/shoebox/scene.xml");

/// A one-link, one-grid scenario config over the bundled shoebox scene.
pub fn small_config_json(seed: u64) -> String {
    format!(
        r#"{{
  "scene": "{SHOEBOX_SCENE}",
  "materials": {{ "wall": "concrete", "floor": "concrete", "ceiling": "concrete", "cabinet": "metal" }},
  "base_stations": [{{ "id": "ap", "position": [0.5, 2.0, 2.5], "array": {{ "rows": 2, "cols": 1 }} }}],
  "mobile_terminals": [{{ "id": "ue", "position": [3.5, 1.0, 1.2], "velocity": [0.5, 0.0, 0.0] }}],
  "termination": {{ "max_interactions": 2, "min_power_dbm": -180 }},
  "launch": {{ "count": 3000 }},
  "bandwidth_hz": 50e6,
  "cfr_points": 16,
  "grids": [{{ "id": "floor", "center": [2.5, 2.0, 1.0], "width": 4.0, "height": 3.0, "resolution": 1.0 }}],
  "seed": {seed}
}}
"#
    )
}
