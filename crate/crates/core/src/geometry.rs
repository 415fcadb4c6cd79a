//! Small geometric vocabulary shared by every module: points, boxes,
//! triangle helpers and az/el direction conversions.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Aabb::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn grow(&mut self, p: &Vec3) {
        for i in 0..3 {
            self.min[i] = self.min[i].min(p[i]);
            self.max[i] = self.max[i].max(p[i]);
        }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for i in 0..3 {
            out.min[i] = out.min[i].min(other.min[i]);
            out.max[i] = out.max[i].max(other.max[i]);
        }
        out
    }

    pub fn contains_point(&self, p: &Vec3, tol: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - tol && p[i] <= self.max[i] + tol)
    }

    /// The box grown by `r` on every side.
    pub fn expanded(&self, r: f64) -> Aabb {
        Aabb {
            min: [self.min[0] - r, self.min[1] - r, self.min[2] - r],
            max: [self.max[0] + r, self.max[1] + r, self.max[2] + r],
        }
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|i| other.min[i] >= self.min[i] && other.max[i] <= self.max[i])
    }

    pub fn centroid_axis(&self, axis: usize) -> f64 {
        0.5 * (self.min[axis] + self.max[axis])
    }

    pub fn surface_area(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let d = [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ];
        2.0 * (d[0] * d[1] + d[1] * d[2] + d[2] * d[0])
    }

    pub fn diagonal(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let d = Vec3::new(
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        );
        d.norm()
    }

    /// Slab test. Returns the entry distance if the ray overlaps the box
    /// within `[t_min, t_max]`.
    #[inline]
    pub fn hit(&self, origin: &Vec3, inv_dir: &Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let mut t0 = t_min;
        let mut t1 = t_max;
        for i in 0..3 {
            let mut ta = (self.min[i] - origin[i]) * inv_dir[i];
            let mut tb = (self.max[i] - origin[i]) * inv_dir[i];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            // NaN arises for 0 * inf when the origin sits on a slab plane; ignore that axis.
            if ta.is_nan() || tb.is_nan() {
                continue;
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

/// A single triangle in the global frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Vec3; 3],
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Triangle { v: [a, b, c] }
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.v[1] - self.v[0]).cross(&(self.v[2] - self.v[0])).norm()
    }

    /// Unit normal following the vertex winding.
    pub fn normal(&self) -> Vec3 {
        (self.v[1] - self.v[0])
            .cross(&(self.v[2] - self.v[0]))
            .normalize()
    }

    pub fn centroid(&self) -> Vec3 {
        (self.v[0] + self.v[1] + self.v[2]) / 3.0
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.v.iter())
    }

    /// Möller–Trumbore. Returns the ray parameter of the hit, if any, strictly
    /// greater than `t_min`.
    #[inline]
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, t_min: f64) -> Option<f64> {
        let e1 = self.v[1] - self.v[0];
        let e2 = self.v[2] - self.v[0];
        let p = dir.cross(&e2);
        let det = e1.dot(&p);
        let scale = e1.norm_squared().max(e2.norm_squared());
        if det.abs() <= 1e-14 * scale {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - self.v[0];
        let u = s.dot(&p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        let t = e2.dot(&q) * inv;
        (t > t_min).then_some(t)
    }

    /// Whether `p` lies on the triangle within `tol` metres.
    pub fn contains_point(&self, p: &Vec3, tol: f64) -> bool {
        let n = (self.v[1] - self.v[0]).cross(&(self.v[2] - self.v[0]));
        let nn = n.norm();
        if nn == 0.0 {
            return false;
        }
        let n = n / nn;
        if (p - self.v[0]).dot(&n).abs() > tol {
            return false;
        }
        for i in 0..3 {
            let a = self.v[i];
            let b = self.v[(i + 1) % 3];
            let edge = b - a;
            // Signed distance of p from the edge line, inward positive.
            let inward = n.cross(&edge).normalize();
            if (p - a).dot(&inward) < -tol {
                return false;
            }
        }
        true
    }
}

/// Mirror `p` across the plane through `on_plane` with unit normal `n`.
pub fn mirror_point(p: &Vec3, on_plane: &Vec3, n: &Vec3) -> Vec3 {
    p - 2.0 * (p - on_plane).dot(n) * n
}

/// Specular reflection of a direction about a unit normal.
pub fn reflect(d: &Vec3, n: &Vec3) -> Vec3 {
    d - 2.0 * d.dot(n) * n
}

/// Azimuth/elevation (radians) of a direction. Elevation is measured from the
/// xy-plane, azimuth counter-clockwise from +x.
pub fn to_az_el(d: &Vec3) -> (f64, f64) {
    let u = d.normalize();
    (u.y.atan2(u.x), u.z.clamp(-1.0, 1.0).asin())
}

pub fn from_az_el(az: f64, el: f64) -> Vec3 {
    Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
}

/// Wrap an angle to (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Spherical unit vectors (θ̂, φ̂) for a propagation direction.
pub fn spherical_basis(d: &Vec3) -> (Vec3, Vec3) {
    let u = d.normalize();
    let theta = u.z.clamp(-1.0, 1.0).acos();
    let phi = u.y.atan2(u.x);
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (
        Vec3::new(ct * cp, ct * sp, -st),
        Vec3::new(-sp, cp, 0.0),
    )
}

/// Rotation about z by `heading` followed by a downward tilt about the
/// rotated y axis.
pub fn heading_tilt_rotation(heading: f64, tilt: f64) -> Mat3 {
    let (sh, ch) = heading.sin_cos();
    let (st, ct) = tilt.sin_cos();
    let rz = Mat3::new(ch, -sh, 0.0, sh, ch, 0.0, 0.0, 0.0, 1.0);
    let ry = Mat3::new(ct, 0.0, st, 0.0, 1.0, 0.0, -st, 0.0, ct);
    rz * ry
}

/// Right-handed in-plane axes (u, v) for a plane with the given normal,
/// turned by `rotation` radians about it. Unrotated, u = ẑ × n̂ for tilted
/// planes and ±x̂ for near-horizontal ones.
pub fn plane_basis(normal: &Vec3, rotation: f64) -> (Vec3, Vec3) {
    let n = normal.normalize();
    let u0 = if n.z.abs() < 0.9 {
        Vec3::z().cross(&n)
    } else {
        Vec3::y().cross(&n) * n.z.signum()
    }
    .normalize();
    let v0 = n.cross(&u0);
    let (s, c) = rotation.sin_cos();
    (u0 * c + v0 * s, v0 * c - u0 * s)
}

/// Rotation whose columns are (u, v, n̂) from [`plane_basis`].
pub fn plane_rotation(normal: &Vec3, rotation: f64) -> Mat3 {
    let (u, v) = plane_basis(normal, rotation);
    Mat3::from_columns(&[u, v, normal.normalize()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(-PI), PI);
        assert_eq!(wrap_phase(PI), PI);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_phase(0.0), 0.0);
    }

    #[test]
    fn az_el_round_trip() {
        let d = Vec3::new(1.0, -2.0, 0.5).normalize();
        let (az, el) = to_az_el(&d);
        assert!((from_az_el(az, el) - d).norm() < 1e-12);
    }

    #[test]
    fn triangle_hit_and_containment() {
        let t = Triangle::new(
            Vec3::new(-1.0, -1.0, 5.0),
            Vec3::new(1.0, -1.0, 5.0),
            Vec3::new(0.0, 1.0, 5.0),
        );
        let hit = t.intersect(&Vec3::zeros(), &Vec3::z(), 0.0).unwrap();
        assert!((hit - 5.0).abs() < 1e-15);
        assert!(t.contains_point(&Vec3::new(0.0, 0.0, 5.0), 1e-9));
        assert!(!t.contains_point(&Vec3::new(2.0, 0.0, 5.0), 1e-9));
        assert!(t.intersect(&Vec3::zeros(), &Vec3::x(), 0.0).is_none());
    }

    #[test]
    fn spherical_basis_is_orthonormal() {
        let d = Vec3::new(0.3, 0.4, -0.2).normalize();
        let (th, ph) = spherical_basis(&d);
        assert!((th.norm() - 1.0).abs() < 1e-12);
        assert!((ph.norm() - 1.0).abs() < 1e-12);
        assert!(th.dot(&ph).abs() < 1e-12);
        assert!(th.dot(&d).abs() < 1e-12);
        assert!(ph.dot(&d).abs() < 1e-12);
    }
}
