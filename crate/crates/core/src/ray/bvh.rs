//! Bounding-volume hierarchy over scene triangles.

use super::RayError;
use crate::geometry::{Aabb, Triangle, Vec3};
use crate::scene::{Scene, TriangleId};

pub const MAX_LEAF_SIZE: usize = 4;
const BINS: usize = 16;

/// Nearest intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub triangle: TriangleId,
    pub point: Vec3,
    /// Unit normal facing back towards the ray origin.
    pub normal: Vec3,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    // Leaf: first index into `order`. Inner: index of the left child
    // (the right child follows the whole left subtree, stored in `right`).
    first: u32,
    right: u32,
    count: u32,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<TriangleId>,
    triangles: Vec<Triangle>,
}

/// Builds the hierarchy over every triangle of `scene`, numbered in
/// [`Scene::flat_triangles`] order.
pub fn build_bvh(scene: &Scene) -> Result<Bvh, RayError> {
    let tris: Vec<Triangle> = scene.flat_triangles().into_iter().map(|(_, t)| t).collect();
    Bvh::build(tris)
}

#[derive(Clone, Copy)]
struct Item {
    id: TriangleId,
    bounds: Aabb,
    centroid: Vec3,
}

impl Bvh {
    /// A hierarchy with nothing in it; every query misses.
    pub fn empty() -> Self {
        Bvh {
            nodes: Vec::new(),
            order: Vec::new(),
            triangles: Vec::new(),
        }
    }

    pub fn build(triangles: Vec<Triangle>) -> Result<Self, RayError> {
        if triangles.is_empty() {
            return Err(RayError::InvalidArgument("cannot build a BVH over an empty scene".into()));
        }
        let mut items: Vec<Item> = triangles
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let bounds = t.bounds();
                Item {
                    id: i as TriangleId,
                    centroid: t.centroid(),
                    bounds,
                }
            })
            .collect();
        let mut bvh = Bvh {
            nodes: Vec::with_capacity(2 * triangles.len() / MAX_LEAF_SIZE + 1),
            order: Vec::with_capacity(triangles.len()),
            triangles,
        };
        bvh.build_node(&mut items);
        Ok(bvh)
    }

    fn build_node(&mut self, items: &mut [Item]) -> usize {
        let bounds = items.iter().fold(Aabb::empty(), |b, it| b.union(&it.bounds));
        let idx = self.nodes.len();
        self.nodes.push(Node {
            bounds,
            first: 0,
            right: 0,
            count: 0,
        });
        if items.len() <= MAX_LEAF_SIZE {
            self.nodes[idx].first = self.order.len() as u32;
            self.nodes[idx].count = items.len() as u32;
            self.order.extend(items.iter().map(|it| it.id));
            return idx;
        }
        let mid = split_items(items);
        let (left, right) = items.split_at_mut(mid);
        let l = self.build_node(left);
        let r = self.build_node(right);
        debug_assert_eq!(l, idx + 1);
        self.nodes[idx].first = l as u32;
        self.nodes[idx].right = r as u32;
        idx
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn triangle(&self, id: TriangleId) -> &Triangle {
        &self.triangles[id as usize]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.count > 0).count()
    }

    pub fn bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| n.bounds)
    }

    /// Checks that every triangle is referenced exactly once, leaves hold at
    /// most [`MAX_LEAF_SIZE`] triangles and every box contains its children.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = vec![0u32; self.triangles.len()];
        for &id in &self.order {
            seen[id as usize] += 1;
        }
        if let Some(i) = seen.iter().position(|&c| c != 1) {
            return Err(format!("triangle {i} referenced {} times", seen[i]));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.count > 0 {
                if n.count as usize > MAX_LEAF_SIZE {
                    return Err(format!("leaf {i} holds {} triangles", n.count));
                }
                for &id in &self.order[n.first as usize..(n.first + n.count) as usize] {
                    if !n.bounds.contains_box(&self.triangles[id as usize].bounds()) {
                        return Err(format!("leaf {i} does not contain triangle {id}"));
                    }
                }
            } else {
                for c in [n.first, n.right] {
                    if !n.bounds.contains_box(&self.nodes[c as usize].bounds) {
                        return Err(format!("node {i} does not contain child {c}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Nearest hit with distance in `(t_min, ∞)`. Equal distances resolve to
    /// the lower triangle id.
    pub fn nearest_hit(&self, origin: &Vec3, dir: &Vec3, t_min: f64) -> Option<Hit> {
        self.nearest_hit_within(origin, dir, t_min, f64::INFINITY)
    }

    /// Nearest hit with distance in `(t_min, t_max]`.
    pub fn nearest_hit_within(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best_t = t_max;
        let mut best_id: Option<TriangleId> = None;
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds.hit(origin, &inv, t_min, best_t).is_none() {
                continue;
            }
            if node.count > 0 {
                for &id in &self.order[node.first as usize..(node.first + node.count) as usize] {
                    if let Some(t) = self.triangles[id as usize].intersect(origin, dir, t_min) {
                        let better = t < best_t || (t == best_t && best_id.is_none_or(|b| id < b));
                        if better {
                            best_t = t;
                            best_id = Some(id);
                        }
                    }
                }
                continue;
            }
            let l = node.first;
            let r = node.right;
            let tl = self.nodes[l as usize].bounds.hit(origin, &inv, t_min, best_t);
            let tr = self.nodes[r as usize].bounds.hit(origin, &inv, t_min, best_t);
            // Push the farther child first so the nearer one is popped next.
            match (tl, tr) {
                (Some(a), Some(b)) => {
                    let (near, far) = if a <= b { (l, r) } else { (r, l) };
                    stack.push(far);
                    stack.push(near);
                }
                (Some(_), None) => stack.push(l),
                (None, Some(_)) => stack.push(r),
                (None, None) => {}
            }
        }
        let id = best_id?;
        let tri = &self.triangles[id as usize];
        let mut normal = tri.normal();
        if normal.dot(dir) > 0.0 {
            normal = -normal;
        }
        Some(Hit {
            triangle: id,
            point: origin + dir * best_t,
            normal,
            distance: best_t,
        })
    }

    /// Whether anything lies strictly between `t_min` and `t_max` along the ray.
    pub fn occluded(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> bool {
        if self.nodes.is_empty() || !(t_max > t_min) {
            return false;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack: Vec<u32> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if node.bounds.hit(origin, &inv, t_min, t_max).is_none() {
                continue;
            }
            if node.count > 0 {
                for &id in &self.order[node.first as usize..(node.first + node.count) as usize] {
                    if let Some(t) = self.triangles[id as usize].intersect(origin, dir, t_min) {
                        if t < t_max {
                            return true;
                        }
                    }
                }
            } else {
                stack.push(node.first);
                stack.push(node.right);
            }
        }
        false
    }
}

/// Reorders `items` around a binned-SAH split and returns the split index.
fn split_items(items: &mut [Item]) -> usize {
    let cb = items.iter().fold(Aabb::empty(), |mut b, it| {
        b.grow(&it.centroid);
        b
    });
    let mut best: Option<(f64, usize, usize)> = None; // (cost, axis, bin boundary)
    for axis in 0..3 {
        let lo = cb.min[axis];
        let extent = cb.max[axis] - lo;
        if !(extent > 0.0) {
            continue;
        }
        let scale = BINS as f64 / extent;
        let mut counts = [0usize; BINS];
        let mut boxes = [Aabb::empty(); BINS];
        for it in items.iter() {
            let b = (((it.centroid[axis] - lo) * scale) as usize).min(BINS - 1);
            counts[b] += 1;
            boxes[b] = boxes[b].union(&it.bounds);
        }
        let mut right_area = [0.0; BINS];
        let mut right_count = [0usize; BINS];
        let mut acc = Aabb::empty();
        let mut n = 0;
        for b in (1..BINS).rev() {
            acc = acc.union(&boxes[b]);
            n += counts[b];
            right_area[b] = if n > 0 { acc.surface_area() } else { 0.0 };
            right_count[b] = n;
        }
        let mut acc = Aabb::empty();
        let mut n = 0;
        for b in 1..BINS {
            acc = acc.union(&boxes[b - 1]);
            n += counts[b - 1];
            if n == 0 || right_count[b] == 0 {
                continue;
            }
            let cost = n as f64 * acc.surface_area() + right_count[b] as f64 * right_area[b];
            if best.is_none_or(|(c, _, _)| cost < c) {
                best = Some((cost, axis, b));
            }
        }
    }
    match best {
        Some((_, axis, boundary)) => {
            let lo = cb.min[axis];
            let scale = BINS as f64 / (cb.max[axis] - lo);
            let bin_of = |it: &Item| (((it.centroid[axis] - lo) * scale) as usize).min(BINS - 1);
            let (left, right): (Vec<Item>, Vec<Item>) = items.iter().copied().partition(|it| bin_of(it) < boundary);
            let mid = left.len();
            for (slot, it) in items.iter_mut().zip(left.into_iter().chain(right)) {
                *slot = it;
            }
            mid
        }
        None => {
            // All centroids coincide: split by id.
            items.sort_by_key(|it| it.id);
            items.len() / 2
        }
    }
}
