//! Point hierarchy over receiver positions for capture-tube queries.

use crate::geometry::{Aabb, Vec3};

const LEAF: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    first: u32,
    right: u32,
    count: u32,
}

#[derive(Debug, Clone)]
pub struct ReceiverIndex {
    nodes: Vec<Node>,
    order: Vec<u32>,
    points: Vec<Vec3>,
    center: Vec3,
    radius: f64,
}

impl ReceiverIndex {
    pub fn new(points: &[Vec3]) -> Self {
        let mut idx = ReceiverIndex {
            nodes: Vec::new(),
            order: Vec::with_capacity(points.len()),
            points: points.to_vec(),
            center: Vec3::zeros(),
            radius: 0.0,
        };
        if points.is_empty() {
            return idx;
        }
        let bounds = Aabb::from_points(points.iter());
        idx.center = Vec3::new(
            0.5 * (bounds.min[0] + bounds.max[0]),
            0.5 * (bounds.min[1] + bounds.max[1]),
            0.5 * (bounds.min[2] + bounds.max[2]),
        );
        idx.radius = points.iter().map(|p| (p - idx.center).norm()).fold(0.0, f64::max);
        let mut ids: Vec<u32> = (0..points.len() as u32).collect();
        idx.build(&mut ids);
        idx
    }

    fn build(&mut self, ids: &mut [u32]) -> usize {
        let bounds = Aabb::from_points(ids.iter().map(|&i| &self.points[i as usize]));
        let me = self.nodes.len();
        self.nodes.push(Node {
            bounds,
            first: 0,
            right: 0,
            count: 0,
        });
        if ids.len() <= LEAF {
            self.nodes[me].first = self.order.len() as u32;
            self.nodes[me].count = ids.len() as u32;
            self.order.extend_from_slice(ids);
            return me;
        }
        let axis = (0..3)
            .max_by(|&a, &b| {
                let ea = bounds.max[a] - bounds.min[a];
                let eb = bounds.max[b] - bounds.min[b];
                ea.total_cmp(&eb).then(b.cmp(&a))
            })
            .unwrap_or(0);
        let pts = &self.points;
        ids.sort_by(|&a, &b| pts[a as usize][axis].total_cmp(&pts[b as usize][axis]).then(a.cmp(&b)));
        let mid = ids.len() / 2;
        let (l, r) = ids.split_at_mut(mid);
        let li = self.build(l);
        let ri = self.build(r);
        self.nodes[me].first = li as u32;
        self.nodes[me].right = ri as u32;
        me
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Distance beyond which a ray starting at `origin` cannot come near any receiver.
    pub fn reach_from(&self, origin: &Vec3) -> f64 {
        (origin - self.center).norm() + self.radius
    }

    /// Appends every receiver whose distance to the segment `origin + t·dir`,
    /// `t ∈ [0, len]`, is below `radius_at(t)` at the closest point.
    /// `max_radius` must bound `radius_at` over the segment.
    pub fn query_segment(
        &self,
        origin: &Vec3,
        dir: &Vec3,
        len: f64,
        max_radius: f64,
        radius_at: impl Fn(f64) -> f64,
        out: &mut Vec<u32>,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack: Vec<u32> = Vec::with_capacity(32);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds.expanded(max_radius).hit(origin, &inv, 0.0, len).is_none() {
                continue;
            }
            if node.count == 0 {
                stack.push(node.right);
                stack.push(node.first);
                continue;
            }
            for &id in &self.order[node.first as usize..(node.first + node.count) as usize] {
                let p = &self.points[id as usize];
                let t = (p - origin).dot(dir).clamp(0.0, len);
                let d = (origin + dir * t - p).norm();
                if d < radius_at(t) {
                    out.push(id);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_brute_force() {
        let pts: Vec<Vec3> = (0..500)
            .map(|i| {
                let f = i as f64;
                Vec3::new((f * 0.37).sin() * 10.0, (f * 0.11).cos() * 10.0, (f * 0.73).sin() * 3.0)
            })
            .collect();
        let idx = ReceiverIndex::new(&pts);
        let origin = Vec3::new(-12.0, -3.0, 0.5);
        let dir = Vec3::new(1.0, 0.3, -0.05).normalize();
        let len = 25.0;
        let radius = |t: f64| 0.5 + 0.02 * t;
        let mut got = Vec::new();
        idx.query_segment(&origin, &dir, len, radius(len), radius, &mut got);
        got.sort();
        let want: Vec<u32> = (0..pts.len() as u32)
            .filter(|&i| {
                let p = pts[i as usize];
                let t = (p - origin).dot(&dir).clamp(0.0, len);
                (origin + dir * t - p).norm() < radius(t)
            })
            .collect();
        assert!(!want.is_empty());
        assert_eq!(got, want);
    }
}
