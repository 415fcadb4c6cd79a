use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::DeviceError;
use crate::geometry::{wrap_phase, Mat3, Triangle, Vec3};

/// Reconfigurable surface: a `rows × cols` grid of elements at `pitch`
/// spacing in the local xy-plane, centred on `center`. The local +z axis is
/// the reflective side.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPanel {
    pub id: String,
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    pub center: Vec3,
    /// Local-to-global rotation.
    pub rotation: Mat3,
    phases: Vec<f64>,
}

impl RisPanel {
    pub fn new(id: impl Into<String>, rows: usize, cols: usize, pitch: f64, center: Vec3, rotation: Mat3) -> Result<Self, DeviceError> {
        if rows == 0 || cols == 0 {
            return Err(DeviceError::InvalidArgument("RIS needs at least one element".into()));
        }
        if !(pitch > 0.0) {
            return Err(DeviceError::InvalidArgument("RIS element pitch must be positive".into()));
        }
        let err = (rotation.transpose() * rotation - Mat3::identity()).abs().max();
        if !(err <= 1e-9) || !((rotation.determinant() - 1.0).abs() <= 1e-9) {
            return Err(DeviceError::InvalidArgument("RIS rotation is not a proper rotation".into()));
        }
        Ok(RisPanel {
            id: id.into(),
            rows,
            cols,
            pitch,
            center,
            rotation,
            phases: vec![0.0; rows * cols],
        })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Stores `phases` wrapped to (−π, π].
    pub fn set_phases(&mut self, phases: &[f64]) -> Result<(), DeviceError> {
        if phases.len() != self.len() {
            return Err(DeviceError::InvalidArgument(format!(
                "expected {} phases, got {}",
                self.len(),
                phases.len()
            )));
        }
        if !phases.iter().all(|p| p.is_finite()) {
            return Err(DeviceError::InvalidArgument("non-finite phase".into()));
        }
        self.phases = phases.iter().map(|&p| wrap_phase(p)).collect();
        Ok(())
    }

    pub fn with_phases(mut self, phases: &[f64]) -> Result<Self, DeviceError> {
        self.set_phases(phases)?;
        Ok(self)
    }

    pub fn normal(&self) -> Vec3 {
        self.rotation * Vec3::z()
    }

    /// Element centres in the panel frame (z = 0), row-major.
    pub fn local_positions(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let x = (c as f64 - (self.cols as f64 - 1.0) / 2.0) * self.pitch;
                let y = (r as f64 - (self.rows as f64 - 1.0) / 2.0) * self.pitch;
                out.push((x, y));
            }
        }
        out
    }

    /// Element offsets from `center` in the global frame.
    pub fn global_offsets(&self) -> Vec<Vec3> {
        self.local_positions()
            .into_iter()
            .map(|(x, y)| self.rotation * Vec3::new(x, y, 0.0))
            .collect()
    }

    /// The panel outline as two triangles, one pitch wide per element.
    pub fn triangles(&self) -> [Triangle; 2] {
        let hx = self.cols as f64 * self.pitch / 2.0;
        let hy = self.rows as f64 * self.pitch / 2.0;
        let p = |x: f64, y: f64| self.center + self.rotation * Vec3::new(x, y, 0.0);
        let (a, b, c, d) = (p(-hx, -hy), p(hx, -hy), p(hx, hy), p(-hx, hy));
        [Triangle::new(a, b, c), Triangle::new(a, c, d)]
    }
}

/// Unwrapped linear-gradient phase `−(2π/λ)(x sinθ₀ cosφ₀ + y sinθ₀ sinφ₀)`.
pub fn single_beam_phase(x: f64, y: f64, theta0: f64, phi0: f64, wavelength: f64) -> f64 {
    -(2.0 * PI / wavelength) * (x * theta0.sin() * phi0.cos() + y * theta0.sin() * phi0.sin())
}

/// Phase profile steering a normally incident wave to `(θ₀, φ₀)` in the
/// panel frame, wrapped to (−π, π].
pub fn ris_single_beam_profile(panel: &RisPanel, theta0: f64, phi0: f64, wavelength: f64) -> Vec<f64> {
    panel
        .local_positions()
        .into_iter()
        .map(|(x, y)| wrap_phase(single_beam_phase(x, y, theta0, phi0, wavelength)))
        .collect()
}

fn steering_phases(panel: &RisPanel, theta: f64, phi: f64, wavelength: f64) -> Vec<f64> {
    let k = 2.0 * PI / wavelength;
    let (u, v) = (theta.sin() * phi.cos(), theta.sin() * phi.sin());
    panel.local_positions().into_iter().map(|(x, y)| k * (u * x + v * y)).collect()
}

/// Far-field array factor `Σ e^{j(Φ_m + k(x_m sinθ cosφ + y_m sinθ sinφ))}` for
/// normal incidence, with `(θ, φ)` in the panel frame.
pub fn ris_array_factor(panel: &RisPanel, phases: &[f64], theta: f64, phi: f64, wavelength: f64) -> Complex64 {
    steering_phases(panel, theta, phi, wavelength)
        .into_iter()
        .zip(phases)
        .map(|(s, p)| Complex64::from_polar(1.0, p + s))
        .sum()
}

/// One lobe requested from the multi-beam optimizer. `level` is the desired
/// |array factor| as a fraction of the element count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamTarget {
    pub theta: f64,
    pub phi: f64,
    pub weight: f64,
    pub level: f64,
}

struct Objective {
    steer: Vec<Vec<f64>>,
    targets: Vec<BeamTarget>,
    n: f64,
}

impl Objective {
    fn value_and_gradient(&self, phases: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let mut j = 0.0;
        let mut grad = grad;
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|x| *x = 0.0);
        }
        for (t, steer) in self.targets.iter().zip(&self.steer) {
            let terms: Vec<Complex64> = steer
                .iter()
                .zip(phases)
                .map(|(s, p)| Complex64::from_polar(1.0, p + s))
                .collect();
            let af: Complex64 = terms.iter().sum();
            let mag = af.norm();
            let resid = mag / self.n - t.level;
            j += t.weight * resid * resid;
            if let Some(g) = grad.as_deref_mut() {
                if mag > 0.0 {
                    let scale = 2.0 * t.weight * resid / (self.n * mag);
                    for (gm, u) in g.iter_mut().zip(&terms) {
                        // d|AF|/dΦ_m = −Im(conj(AF)·u_m)/|AF|
                        *gm -= scale * (af.conj() * u).im;
                    }
                }
            }
        }
        j
    }
}

/// Gradient-descent design of a multi-beam phase profile.
///
/// Minimises `Σ_k w_k (|AF_k|/N − level_k)²` over unconstrained phases,
/// starting from the phase of the weighted superposition of single-beam
/// profiles plus a small seeded perturbation. Steps that do not lower the
/// objective are rejected and the step is halved, so accepted iterates are
/// monotone. `step` is in radians per unit of N-scaled gradient.
pub fn ris_multibeam_optimize(
    panel: &RisPanel,
    targets: &[BeamTarget],
    wavelength: f64,
    iterations: usize,
    step: f64,
    seed: u64,
) -> Result<Vec<f64>, DeviceError> {
    ris_multibeam_optimize_traced(panel, targets, wavelength, iterations, step, seed).map(|(p, _)| p)
}

/// As [`ris_multibeam_optimize`], also returning the objective after the
/// initial point and after every accepted step.
pub fn ris_multibeam_optimize_traced(
    panel: &RisPanel,
    targets: &[BeamTarget],
    wavelength: f64,
    iterations: usize,
    step: f64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), DeviceError> {
    if targets.is_empty() {
        return Err(DeviceError::InvalidArgument("at least one beam target is required".into()));
    }
    if iterations == 0 {
        return Err(DeviceError::InvalidArgument("iterations must be at least 1".into()));
    }
    if !(step > 0.0) || !(wavelength > 0.0) {
        return Err(DeviceError::InvalidArgument("step size and wavelength must be positive".into()));
    }
    for t in targets {
        if !(t.weight >= 0.0 && t.level >= 0.0) || !t.theta.is_finite() || !t.phi.is_finite() {
            return Err(DeviceError::InvalidArgument("beam targets need finite angles and non-negative weight/level".into()));
        }
    }
    let n = panel.len();
    let obj = Objective {
        steer: targets.iter().map(|t| steering_phases(panel, t.theta, t.phi, wavelength)).collect(),
        targets: targets.to_vec(),
        n: n as f64,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases: Vec<f64> = (0..n)
        .map(|m| {
            let s: Complex64 = targets
                .iter()
                .zip(&obj.steer)
                .map(|(t, st)| Complex64::from_polar(t.weight.max(1e-12) * t.level.max(1e-12), -st[m]))
                .sum();
            s.arg() + rng.random_range(-0.05..0.05)
        })
        .collect();

    let mut grad = vec![0.0; n];
    let mut j = obj.value_and_gradient(&phases, Some(&mut grad));
    if !j.is_finite() {
        return Err(DeviceError::OptimizationFailure("objective is not finite at the starting point".into()));
    }
    let mut history = vec![j];
    let mut eta = step;
    let mut trial = vec![0.0; n];
    for _ in 0..iterations {
        let mut accepted = false;
        for _ in 0..30 {
            for m in 0..n {
                trial[m] = phases[m] - eta * n as f64 * grad[m];
            }
            let jt = obj.value_and_gradient(&trial, None);
            if !jt.is_finite() {
                return Err(DeviceError::OptimizationFailure("objective became non-finite".into()));
            }
            if jt < j {
                std::mem::swap(&mut phases, &mut trial);
                j = obj.value_and_gradient(&phases, Some(&mut grad));
                history.push(j);
                accepted = true;
                eta = (eta * 1.5).min(step * 8.0);
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok((phases.into_iter().map(wrap_phase).collect(), history))
}

/// Complex re-radiation gain of the panel for a wave propagating along
/// `k_in` and leaving along `k_out`:
/// `(1/N) Σ e^{j(Φ_m + (2π/λ)(k̂_out − k̂_in)·r_m)}`.
///
/// Zero when either direction is on the back side.
pub fn apply_ris_to_path(panel: &RisPanel, k_in: &Vec3, k_out: &Vec3, wavelength: f64) -> Complex64 {
    let n = panel.normal();
    let ki = k_in.normalize();
    let ko = k_out.normalize();
    if ki.dot(&n) >= 0.0 || ko.dot(&n) <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let k = 2.0 * PI / wavelength;
    let dk = (ko - ki) * k;
    let sum: Complex64 = panel
        .global_offsets()
        .iter()
        .zip(&panel.phases)
        .map(|(r, p)| Complex64::from_polar(1.0, p + dk.dot(r)))
        .sum();
    sum / panel.len() as f64
}
