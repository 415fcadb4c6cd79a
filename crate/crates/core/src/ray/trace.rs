//! Path search: launch marching for candidates, exact refinement by the
//! image method, plus first-order edge diffraction and RIS re-radiation.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

use super::{
    Bvh, Edge, InteractionEvent, InteractionKind, PathRecord, Ray, RayError, ReceiverIndex, SignatureItem,
    TerminationPolicy,
};
use crate::devices::{apply_ris_to_path, RisPanel};
use crate::em::{advance_spherical, coefficients_for, utd_diffraction_coeff};
use crate::geometry::{reflect, spherical_basis, Triangle, Vec3, SPEED_OF_LIGHT};
use crate::scene::{Scene, TriangleId};

/// Ray-parameter offset used to leave a surface without re-hitting it.
pub const T_MIN: f64 = 1e-6;
/// Launch-phase rays are dropped once their power estimate falls this far
/// below `min_power`; refinement applies the exact threshold.
const MARCH_POWER_SLACK: f64 = 1e-2;
const LAUNCH_CHUNK: usize = 2048;
/// Smallest capture-tube half-angle. Above roughly 2000 rays the tube no
/// longer narrows, so a denser launch set keeps every path a sparser one found.
const MIN_TUBE_ANGLE: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Owner {
    Object(usize),
    Ris(usize),
}

/// Scene geometry prepared for tracing: the BVH over scene triangles plus
/// RIS panels, and the diffracting edges.
#[derive(Debug, Clone)]
pub struct TraceScene {
    scene: Scene,
    bvh: Bvh,
    owners: Vec<Owner>,
    edges: Vec<Edge>,
    ris: Vec<RisPanel>,
}

impl TraceScene {
    pub fn new(scene: Scene) -> Self {
        Self::with_ris(scene, Vec::new())
    }

    pub fn with_ris(scene: Scene, panels: Vec<RisPanel>) -> Self {
        let mut tris: Vec<Triangle> = Vec::with_capacity(scene.triangle_count() + 2 * panels.len());
        let mut owners = Vec::with_capacity(tris.capacity());
        for (obj, t) in scene.flat_triangles() {
            tris.push(t);
            owners.push(Owner::Object(obj));
        }
        for (i, p) in panels.iter().enumerate() {
            for t in p.triangles() {
                tris.push(t);
                owners.push(Owner::Ris(i));
            }
        }
        let edges = super::find_edges(&tris, |id| match owners[id as usize] {
            Owner::Object(o) => Some(o),
            Owner::Ris(_) => None,
        });
        let bvh = if tris.is_empty() { Bvh::empty() } else { Bvh::build(tris).expect("non-empty triangle list") };
        TraceScene {
            scene,
            bvh,
            owners,
            edges,
            ris: panels,
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn ris_panels(&self) -> &[RisPanel] {
        &self.ris
    }

    /// Scene object owning a triangle, or `None` for RIS geometry.
    pub fn object_of(&self, id: TriangleId) -> Option<usize> {
        match self.owners[id as usize] {
            Owner::Object(o) => Some(o),
            Owner::Ris(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceParams {
    pub policy: TerminationPolicy,
    /// Base radius of the candidate-detection tube around each ray, metres.
    /// The tube also widens with travelled distance by the angular spacing
    /// of the launch set.
    pub capture_radius: f64,
    pub tx_power_w: f64,
    pub diffraction: bool,
}

impl TraceParams {
    pub fn new(policy: TerminationPolicy) -> Self {
        TraceParams {
            policy,
            capture_radius: 0.5,
            tx_power_w: 1.0,
            diffraction: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceStats {
    pub rays_launched: u64,
    pub segments: u64,
    pub candidates: u64,
    pub paths: u64,
}

type Key = Vec<(InteractionKind, TriangleId)>;

/// Traces every path from `tx` to each receiver. Returns one list per
/// receiver, sorted by interaction signature.
pub fn trace_paths(
    ts: &TraceScene,
    tx: &Vec3,
    receivers: &[Vec3],
    launch: &[Vec3],
    params: &TraceParams,
) -> Result<(Vec<Vec<PathRecord>>, TraceStats), RayError> {
    if !(params.capture_radius > 0.0) {
        return Err(RayError::InvalidArgument("capture_radius must be positive".into()));
    }
    if !(params.tx_power_w > 0.0) || !params.tx_power_w.is_finite() {
        return Err(RayError::InvalidArgument("transmit power must be positive".into()));
    }
    if !(params.policy.min_power_w > 0.0) {
        return Err(RayError::InvalidArgument("min_power must be positive".into()));
    }
    if launch.is_empty() {
        return Err(RayError::InvalidArgument("launch set is empty".into()));
    }
    if !tx.iter().chain(receivers.iter().flat_map(|r| r.iter())).all(|c| c.is_finite()) {
        return Err(RayError::InvalidArgument("non-finite terminal position".into()));
    }

    let ctx = Ctx::new(ts, tx, params);
    let index = ReceiverIndex::new(receivers);
    let spread = (4.0 * PI / launch.len() as f64).sqrt().max(MIN_TUBE_ANGLE);

    let (found, segments) = if params.policy.max_interactions == 0 || index.is_empty() {
        (HashSet::new(), 0)
    } else {
        launch
            .par_chunks(LAUNCH_CHUNK)
            .map(|chunk| {
                let mut set = HashSet::new();
                let mut segs = 0u64;
                let mut scratch = Vec::new();
                for d in chunk {
                    ctx.march(d, &index, spread, &mut set, &mut segs, &mut scratch);
                }
                (set, segs)
            })
            .reduce(
                || (HashSet::new(), 0),
                |(mut a, sa), (b, sb)| {
                    if a.len() < b.len() {
                        let mut b = b;
                        b.extend(a);
                        return (b, sa + sb);
                    }
                    a.extend(b);
                    (a, sa + sb)
                },
            )
    };

    let mut candidates: Vec<(u32, Key)> = found.into_iter().collect();
    candidates.extend((0..receivers.len() as u32).map(|r| (r, Vec::new())));
    candidates.sort_unstable();
    let n_candidates = candidates.len() as u64;

    let specular: Vec<Option<PathRecord>> = candidates
        .par_iter()
        .map(|(r, key)| ctx.refine_specular(*r as usize, &receivers[*r as usize], key))
        .collect();

    let extra: Vec<Option<PathRecord>> = if params.policy.max_interactions >= 1 {
        let n_edges = if params.diffraction { ts.edges.len() } else { 0 };
        let n_ris = ts.ris.len();
        let per_rx = n_edges + n_ris;
        (0..receivers.len() * per_rx)
            .into_par_iter()
            .map(|i| {
                let r = i / per_rx;
                let j = i % per_rx;
                if j < n_edges {
                    ctx.refine_diffraction(r, &receivers[r], j)
                } else {
                    ctx.refine_ris(r, &receivers[r], j - n_edges)
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut per_rx: Vec<BTreeMap<Vec<SignatureItem>, PathRecord>> = vec![BTreeMap::new(); receivers.len()];
    for p in specular.into_iter().chain(extra).flatten() {
        let slot = &mut per_rx[p.receiver];
        let sig = p.signature();
        match slot.get(&sig) {
            Some(q) if !keep_new(&p, q) => {}
            _ => {
                slot.insert(sig, p);
            }
        }
    }
    let out: Vec<Vec<PathRecord>> = per_rx.into_iter().map(|m| m.into_values().collect()).collect();
    let stats = TraceStats {
        rays_launched: launch.len() as u64,
        segments,
        candidates: n_candidates,
        paths: out.iter().map(|v| v.len() as u64).sum(),
    };
    Ok((out, stats))
}

fn keep_new(new: &PathRecord, old: &PathRecord) -> bool {
    let (a, b) = (new.gain.norm(), old.gain.norm());
    if a != b {
        return a > b;
    }
    let ea: Vec<u32> = new.interactions.iter().map(|e| e.element).collect();
    let eb: Vec<u32> = old.interactions.iter().map(|e| e.element).collect();
    ea < eb
}

type CVec3 = [Complex64; 3];

fn cdot(e: &CVec3, v: &Vec3) -> Complex64 {
    e[0] * v.x + e[1] * v.y + e[2] * v.z
}

fn cscaled(v: &Vec3, c: Complex64) -> CVec3 {
    [c * v.x, c * v.y, c * v.z]
}

fn cadd(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

/// Field state for the two transmit polarisations.
struct Jones {
    e: [CVec3; 2],
}

impl Jones {
    fn new(departure: &Vec3) -> Self {
        let (t, p) = spherical_basis(departure);
        let one = Complex64::new(1.0, 0.0);
        Jones {
            e: [cscaled(&t, one), cscaled(&p, one)],
        }
    }

    /// Interface interaction with ⊥ coefficient `cs` and ∥ coefficient `cp`.
    fn interface(&mut self, k_in: &Vec3, k_out: &Vec3, normal: &Vec3, cs: Complex64, cp: Complex64) {
        let mut s = k_in.cross(normal);
        if s.norm() < 1e-12 {
            s = spherical_basis(k_in).1;
        }
        let s = s.normalize();
        let p_in = s.cross(k_in);
        let p_out = s.cross(k_out);
        for e in self.e.iter_mut() {
            *e = cadd(cscaled(&s, cs * cdot(e, &s)), cscaled(&p_out, cp * cdot(e, &p_in)));
        }
    }

    /// Edge diffraction with soft/hard coefficients in edge-fixed bases.
    fn edge(&mut self, k_in: &Vec3, k_out: &Vec3, edge: &Vec3, ds: Complex64, dh: Complex64) {
        let beta = |k: &Vec3| {
            let b = edge - k * edge.dot(k);
            b.normalize()
        };
        let (b_in, b_out) = (beta(k_in), beta(k_out));
        let (f_in, f_out) = (k_in.cross(&b_in), k_out.cross(&b_out));
        for e in self.e.iter_mut() {
            *e = cadd(cscaled(&b_out, ds * cdot(e, &b_in)), cscaled(&f_out, dh * cdot(e, &f_in)));
        }
    }

    fn project(&self, arrival: &Vec3, scale: Complex64) -> [[Complex64; 2]; 2] {
        let (t, p) = spherical_basis(arrival);
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (j, e) in self.e.iter().enumerate() {
            m[0][j] = cdot(e, &t) * scale;
            m[1][j] = cdot(e, &p) * scale;
        }
        m
    }
}

struct Ctx<'a> {
    ts: &'a TraceScene,
    tx: Vec3,
    params: &'a TraceParams,
    wavelength: f64,
    k: f64,
    /// (λ/4π)
    norm: f64,
}

impl<'a> Ctx<'a> {
    fn new(ts: &'a TraceScene, tx: &Vec3, params: &'a TraceParams) -> Self {
        let wavelength = ts.scene.wavelength();
        Ctx {
            ts,
            tx: *tx,
            params,
            wavelength,
            k: 2.0 * PI / wavelength,
            norm: wavelength / (4.0 * PI),
        }
    }

    fn power(&self, alpha: Complex64) -> f64 {
        self.params.tx_power_w * (alpha * self.norm).norm_sqr()
    }

    fn spread(&self, alpha: Complex64, travelled: f64, d: f64) -> Complex64 {
        advance_spherical(alpha, Complex64::new(1.0, 0.0), travelled, d, self.wavelength)
            .expect("segment lengths are positive")
    }

    fn march(
        &self,
        dir: &Vec3,
        index: &ReceiverIndex,
        spread: f64,
        found: &mut HashSet<(u32, Key)>,
        segments: &mut u64,
        scratch: &mut Vec<u32>,
    ) {
        let Ok(first) = Ray::new(self.tx, *dir) else {
            return;
        };
        let cap = self.params.capture_radius;
        let policy = &self.params.policy;
        let mut stack = vec![first];
        while let Some(ray) = stack.pop() {
            let hit = self.ts.bvh.nearest_hit(&ray.origin, &ray.direction, T_MIN);
            let seg = hit.map_or_else(|| index.reach_from(&ray.origin) + cap, |h| h.distance);
            *segments += 1;
            let l0 = ray.accumulated_length;
            if ray.interaction_count > 0 {
                scratch.clear();
                index.query_segment(
                    &ray.origin,
                    &ray.direction,
                    seg,
                    cap + (l0 + seg) * spread,
                    |t| cap + (l0 + t) * spread,
                    scratch,
                );
                for &r in scratch.iter() {
                    let key: Key = ray.interaction_log.iter().map(|e| (e.kind, e.element)).collect();
                    found.insert((r, key));
                }
            }
            let Some(h) = hit else { continue };
            if ray.interaction_count >= policy.max_interactions as usize {
                continue;
            }
            let Owner::Object(obj) = self.ts.owners[h.triangle as usize] else {
                continue;
            };
            let arriving = self.spread(ray.amplitude, l0, h.distance);
            let power = self.power(arriving);
            if power < policy.min_power_w * MARCH_POWER_SLACK {
                continue;
            }
            let material = self.ts.scene.material_of(obj);
            let cos_i = ray.direction.dot(&h.normal).abs().min(1.0);
            let angle = cos_i.acos();
            let coeffs = coefficients_for(material, angle, self.ts.scene.frequency_hz());
            let mut event = InteractionEvent {
                kind: InteractionKind::Reflection,
                point: h.point,
                object: obj,
                element: h.triangle,
                incident_angle: angle,
                segment_length: h.distance,
                power_w: power,
            };
            let transmitted = arriving * coeffs.transmit_perp;
            if transmitted.norm_sqr() > 0.0 {
                let mut child = Ray {
                    origin: h.point,
                    direction: ray.direction,
                    accumulated_length: l0 + h.distance,
                    amplitude: transmitted,
                    interaction_count: 0,
                    interaction_log: ray.interaction_log.clone(),
                };
                event.kind = InteractionKind::Transmission;
                child.push(event);
                stack.push(child);
            }
            let reflected = arriving * coeffs.reflect_perp;
            if reflected.norm_sqr() > 0.0 {
                let mut child = Ray {
                    origin: h.point,
                    direction: reflect(&ray.direction, &h.normal).normalize(),
                    accumulated_length: l0 + h.distance,
                    amplitude: reflected,
                    interaction_count: 0,
                    interaction_log: ray.interaction_log,
                };
                event.kind = InteractionKind::Reflection;
                child.push(event);
                stack.push(child);
            }
        }
    }

    fn on_object(&self, obj: usize, hint: TriangleId, p: &Vec3) -> bool {
        const TOL: f64 = 1e-6;
        self.ts.bvh.triangle(hint).contains_point(p, TOL)
            || self.ts.scene.objects()[obj].triangles.iter().any(|t| t.contains_point(p, TOL))
    }

    fn visible(&self, a: &Vec3, b: &Vec3) -> Option<(Vec3, f64)> {
        let d = b - a;
        let len = d.norm();
        if !(len > 1e-9) {
            return None;
        }
        let dir = d / len;
        (!self.ts.bvh.occluded(a, &dir, T_MIN, len - T_MIN)).then_some((dir, len))
    }

    fn finish(
        &self,
        receiver: usize,
        rx: &Vec3,
        alpha: Complex64,
        jones: &Jones,
        geo: Complex64,
        length: f64,
        departure: Vec3,
        arrival: Vec3,
        interactions: Vec<InteractionEvent>,
    ) -> Option<PathRecord> {
        let gain = alpha * self.norm;
        if !(gain.norm() > 0.0) || !gain.re.is_finite() || !gain.im.is_finite() {
            return None;
        }
        Some(PathRecord {
            receiver,
            gain,
            jones: jones.project(&arrival, geo * self.norm),
            delay: length / SPEED_OF_LIGHT,
            length,
            tx: self.tx,
            rx: *rx,
            departure,
            arrival,
            doppler_hz: 0.0,
            interactions,
        })
    }

    fn refine_specular(&self, receiver: usize, rx: &Vec3, key: &[(InteractionKind, TriangleId)]) -> Option<PathRecord> {
        let n = key.len();
        if n > self.params.policy.max_interactions as usize {
            return None;
        }
        let planes: Vec<(Vec3, Vec3)> = key
            .iter()
            .map(|&(_, id)| {
                let t = self.ts.bvh.triangle(id);
                (t.v[0], t.normal())
            })
            .collect();
        let mut images = Vec::with_capacity(n + 1);
        images.push(self.tx);
        for (i, &(kind, _)) in key.iter().enumerate() {
            let prev = images[i];
            images.push(match kind {
                InteractionKind::Reflection => {
                    let (q, nrm) = planes[i];
                    prev - 2.0 * (prev - q).dot(&nrm) * nrm
                }
                _ => prev,
            });
        }
        let mut pts = vec![Vec3::zeros(); n];
        let mut target = *rx;
        for i in (0..n).rev() {
            let img = images[i + 1];
            let (q, nrm) = planes[i];
            let dv = target - img;
            let denom = dv.dot(&nrm);
            if denom.abs() <= 1e-15 * dv.norm() {
                return None;
            }
            let s = (q - img).dot(&nrm) / denom;
            if !(s > 1e-12 && s < 1.0 - 1e-12) {
                return None;
            }
            pts[i] = img + dv * s;
            target = pts[i];
        }

        let mut verts = Vec::with_capacity(n + 2);
        verts.push(self.tx);
        verts.extend_from_slice(&pts);
        verts.push(*rx);

        let mut objects = Vec::with_capacity(n);
        for (i, &(kind, id)) in key.iter().enumerate() {
            let obj = self.ts.object_of(id)?;
            if !self.on_object(obj, id, &pts[i]) {
                return None;
            }
            let nrm = planes[i].1;
            let before = (verts[i] - pts[i]).dot(&nrm);
            let after = (verts[i + 2] - pts[i]).dot(&nrm);
            let ok = match kind {
                InteractionKind::Reflection => before * after > 0.0,
                InteractionKind::Transmission => before * after < 0.0,
                _ => false,
            };
            if !ok {
                return None;
            }
            objects.push(obj);
        }

        let mut segs = Vec::with_capacity(n + 1);
        for w in verts.windows(2) {
            segs.push(self.visible(&w[0], &w[1])?);
        }

        let one = Complex64::new(1.0, 0.0);
        let mut alpha = one;
        let mut geo = one;
        let mut travelled = 0.0;
        let mut jones = Jones::new(&segs[0].0);
        let mut events = Vec::with_capacity(n);
        let freq = self.ts.scene.frequency_hz();
        for (j, &(dir, d)) in segs.iter().enumerate() {
            alpha = self.spread(alpha, travelled, d);
            geo = self.spread(geo, travelled, d);
            travelled += d;
            if j == n {
                break;
            }
            let power = self.power(alpha);
            if !(power > self.params.policy.min_power_w) {
                return None;
            }
            let (kind, id) = key[j];
            let nrm = planes[j].1;
            let cos_i = dir.dot(&nrm).abs().min(1.0);
            let angle = cos_i.acos();
            let c = coefficients_for(self.ts.scene.material_of(objects[j]), angle, freq);
            let k_out = segs[j + 1].0;
            let (cs, cp) = match kind {
                InteractionKind::Reflection => (c.reflect_perp, c.reflect_par),
                _ => (c.transmit_perp, c.transmit_par),
            };
            alpha *= cs;
            jones.interface(&dir, &k_out, &nrm, cs, cp);
            events.push(InteractionEvent {
                kind,
                point: pts[j],
                object: objects[j],
                element: id,
                incident_angle: angle,
                segment_length: d,
                power_w: power,
            });
        }
        let departure = segs[0].0;
        let arrival = segs[n].0;
        self.finish(receiver, rx, alpha, &jones, geo, travelled, departure, arrival, events)
    }

    fn refine_diffraction(&self, receiver: usize, rx: &Vec3, edge_id: usize) -> Option<PathRecord> {
        let e = &self.ts.edges[edge_id];
        if !e.in_free_region(&self.tx) || !e.in_free_region(rx) {
            return None;
        }
        let dir = e.wedge.edge;
        let axial = |p: &Vec3| {
            let d = p - e.a;
            let a = d.dot(&dir);
            (a, (d - dir * a).norm())
        };
        let (a1, r1) = axial(&self.tx);
        let (a2, r2) = axial(rx);
        let t = (a1 * r2 + a2 * r1) / (r1 + r2);
        if !(t > 1e-9 && t < e.length() - 1e-9) {
            return None;
        }
        let q = e.a + dir * t;
        let (k_in, s_in) = self.visible(&self.tx, &q)?;
        let (k_out, s_out) = self.visible(&q, rx)?;
        let at_edge = self.spread(Complex64::new(1.0, 0.0), 0.0, s_in);
        let power = self.power(at_edge);
        if !(power > self.params.policy.min_power_w) {
            return None;
        }
        let d = utd_diffraction_coeff(&e.wedge, &k_in, &k_out, s_in, s_out, self.wavelength).ok()?;
        let phase = Complex64::from_polar(1.0, -self.k * s_out);
        let alpha = at_edge * d.soft * phase;
        let mut jones = Jones::new(&k_in);
        jones.edge(&k_in, &k_out, &dir, d.soft, d.hard);
        let beta = k_in.dot(&dir).clamp(-1.0, 1.0).acos();
        let events = vec![InteractionEvent {
            kind: InteractionKind::Diffraction,
            point: q,
            object: e.objects[0],
            element: edge_id as u32,
            incident_angle: (PI / 2.0 - beta).abs(),
            segment_length: s_in,
            power_w: power,
        }];
        self.finish(receiver, rx, alpha, &jones, at_edge * phase, s_in + s_out, k_in, k_out, events)
    }

    fn refine_ris(&self, receiver: usize, rx: &Vec3, panel_id: usize) -> Option<PathRecord> {
        let panel = &self.ts.ris[panel_id];
        let c = panel.center;
        let nrm = panel.normal();
        if (self.tx - c).dot(&nrm) <= 0.0 || (rx - c).dot(&nrm) <= 0.0 {
            return None;
        }
        let (k_in, d1) = self.visible(&self.tx, &c)?;
        let (k_out, d2) = self.visible(&c, rx)?;
        let one = Complex64::new(1.0, 0.0);
        let at_panel = self.spread(one, 0.0, d1);
        let power = self.power(at_panel);
        if !(power > self.params.policy.min_power_w) {
            return None;
        }
        let g = apply_ris_to_path(panel, &k_in, &k_out, self.wavelength);
        let geo = self.spread(at_panel, d1, d2);
        let alpha = geo * g;
        let mut jones = Jones::new(&k_in);
        jones.interface(&k_in, &k_out, &nrm, g, g);
        let events = vec![InteractionEvent {
            kind: InteractionKind::Ris,
            point: c,
            object: panel_id,
            element: panel_id as u32,
            incident_angle: k_in.dot(&nrm).abs().min(1.0).acos(),
            segment_length: d1,
            power_w: power,
        }];
        self.finish(receiver, rx, alpha, &jones, geo, d1 + d2, k_in, k_out, events)
    }
}
