//! Shared mesh edges that can diffract.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::em::Wedge;
use crate::geometry::{Triangle, Vec3};
use crate::scene::TriangleId;

/// A straight edge shared by exactly two non-coplanar triangles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: Vec3,
    pub b: Vec3,
    pub faces: [TriangleId; 2],
    pub objects: [usize; 2],
    pub wedge: Wedge,
}

impl Edge {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    /// Whether `p` lies strictly inside the open (reflex) side of the wedge.
    pub fn in_free_region(&self, p: &Vec3) -> bool {
        let d = p - self.a;
        let perp = d - self.wedge.edge * d.dot(&self.wedge.edge);
        if perp.norm() < 1e-9 {
            return false;
        }
        let phi = self.wedge.azimuth(&perp);
        let span = self.wedge.n() * PI;
        phi > 1e-9 && phi < span - 1e-9
    }
}

fn quantize(v: &Vec3) -> [i64; 3] {
    [
        (v.x * 1e9).round() as i64,
        (v.y * 1e9).round() as i64,
        (v.z * 1e9).round() as i64,
    ]
}

/// Finds diffracting edges among `triangles` (indexed by id). `owner`
/// gives each triangle's object, or `None` for triangles to skip.
pub fn find_edges(triangles: &[Triangle], owner: impl Fn(TriangleId) -> Option<usize>) -> Vec<Edge> {
    type Key = ([i64; 3], [i64; 3]);
    let mut map: BTreeMap<Key, Vec<(TriangleId, usize)>> = BTreeMap::new();
    for (id, t) in triangles.iter().enumerate() {
        let id = id as TriangleId;
        if owner(id).is_none() {
            continue;
        }
        for e in 0..3 {
            let (p, q) = (quantize(&t.v[e]), quantize(&t.v[(e + 1) % 3]));
            let key = if p <= q { (p, q) } else { (q, p) };
            map.entry(key).or_default().push((id, e));
        }
    }
    let mut out = Vec::new();
    for (_, users) in map {
        if users.len() != 2 {
            continue;
        }
        let (t0, e0) = users[0];
        let (t1, e1) = users[1];
        let tri0 = &triangles[t0 as usize];
        let tri1 = &triangles[t1 as usize];
        let a = tri0.v[e0];
        let b = tri0.v[(e0 + 1) % 3];
        let len = (b - a).norm();
        if len < 1e-9 {
            continue;
        }
        let dir = (b - a) / len;
        let in_face = |third: &Vec3| {
            let d = third - a;
            let perp = d - dir * d.dot(&dir);
            let n = perp.norm();
            (n > 1e-12).then(|| perp / n)
        };
        let (Some(f0), Some(f1)) = (in_face(&tri0.v[(e0 + 2) % 3]), in_face(&tri1.v[(e1 + 2) % 3])) else {
            continue;
        };
        let interior = f0.dot(&f1).clamp(-1.0, 1.0).acos();
        if interior < 1e-6 || interior > PI - 1e-6 {
            continue;
        }
        // Normal to face 0 pointing away from face 1, i.e. into the reflex side.
        let mut n0 = dir.cross(&f0);
        if n0.dot(&f1) > 0.0 {
            n0 = -n0;
        }
        out.push(Edge {
            a,
            b,
            faces: [t0, t1],
            objects: [owner(t0).unwrap_or(0), owner(t1).unwrap_or(0)],
            wedge: Wedge {
                edge: dir,
                face0: f0,
                face0_normal: n0,
                interior_angle: interior,
            },
        });
    }
    out
}
