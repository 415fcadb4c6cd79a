//! Snell's law and Fresnel coefficients at a planar interface.
//!
//! Sign conventions: Γ⊥ = (n1 cos θi − n2 cos θt)/(n1 cos θi + n2 cos θt) and
//! Γ∥ = (n2 cos θi − n1 cos θt)/(n2 cos θi + n1 cos θt), so that at normal
//! incidence Γ∥ = −Γ⊥ and a perfect conductor gives Γ⊥ = −1, Γ∥ = +1.
//! The transmitted cosine is chosen on the branch where `Im(n2 cos θt) ≤ 0`,
//! i.e. the transmitted wave decays away from the interface under the
//! `exp(-j k d)` propagation factor.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use super::EmError;

/// Angle of incidence, refractive indices on both sides and wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceGeometry {
    pub incident_angle: f64,
    pub n1: Complex64,
    pub n2: Complex64,
    pub wavelength: f64,
}

impl InterfaceGeometry {
    pub fn new(incident_angle: f64, n1: Complex64, n2: Complex64, wavelength: f64) -> Result<Self, EmError> {
        let g = InterfaceGeometry {
            incident_angle,
            n1,
            n2,
            wavelength,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), EmError> {
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&self.incident_angle) {
            return Err(EmError::InvalidArgument(format!(
                "incident angle {} outside [0, pi/2]",
                self.incident_angle
            )));
        }
        if !(self.wavelength > 0.0) {
            return Err(EmError::InvalidArgument("wavelength must be positive".into()));
        }
        if !(self.n1.re >= 1.0 - 1e-12 && self.n2.re >= 1.0 - 1e-12) {
            return Err(EmError::InvalidArgument("refractive index real part below 1".into()));
        }
        Ok(())
    }

    /// `n2 cos θt` on the decaying branch.
    fn n2_cos_t(&self) -> Complex64 {
        let s = self.incident_angle.sin();
        let w = (self.n2 * self.n2 - self.n1 * self.n1 * s * s).sqrt();
        if w.im > 0.0 || (w.im == 0.0 && w.re < 0.0) {
            -w
        } else {
            w
        }
    }

    fn cos_i(&self) -> f64 {
        self.incident_angle.cos()
    }

    pub fn cos_transmitted(&self) -> Complex64 {
        self.n2_cos_t() / self.n2
    }

    pub fn sin_transmitted(&self) -> Complex64 {
        self.n1 * self.incident_angle.sin() / self.n2
    }
}

/// Complex transmitted angle θt with `n1 sin θi = n2 sin θt`.
pub fn snell_angle(geom: &InterfaceGeometry) -> Complex64 {
    let c = geom.cos_transmitted();
    let s = geom.sin_transmitted();
    // θ = −j ln(cos θ + j sin θ) keeps cos and sin on the chosen branch.
    -Complex64::i() * (c + Complex64::i() * s).ln()
}

pub fn fresnel_perp(geom: &InterfaceGeometry) -> Complex64 {
    let a = geom.n1 * geom.cos_i();
    let b = geom.n2_cos_t();
    (a - b) / (a + b)
}

pub fn fresnel_par(geom: &InterfaceGeometry) -> Complex64 {
    let ci = geom.cos_i();
    let ct = geom.cos_transmitted();
    let a = geom.n2 * ci;
    let b = geom.n1 * ct;
    (a - b) / (a + b)
}

/// (T⊥, T∥) with T⊥ = 1 + Γ⊥ and T∥ = (1 + Γ∥) n1/n2.
pub fn transmission_coeffs(geom: &InterfaceGeometry) -> (Complex64, Complex64) {
    let t_perp = Complex64::new(1.0, 0.0) + fresnel_perp(geom);
    let t_par = (Complex64::new(1.0, 0.0) + fresnel_par(geom)) * geom.n1 / geom.n2;
    (t_perp, t_par)
}

/// Fraction of incident power carried into medium 2 for (⊥, ∥).
///
/// Meaningful for a lossless incident medium; zero under total internal
/// reflection because the transmitted wave is evanescent.
pub fn transmitted_power_fraction(geom: &InterfaceGeometry) -> (f64, f64) {
    let (tp, tl) = transmission_coeffs(geom);
    let ratio = (geom.n2_cos_t() / (geom.n1 * geom.cos_i())).re;
    (ratio * tp.norm_sqr(), ratio * tl.norm_sqr())
}

/// Reflection and transmission coefficients for both polarizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionCoefficients {
    pub reflect_perp: Complex64,
    pub reflect_par: Complex64,
    pub transmit_perp: Complex64,
    pub transmit_par: Complex64,
}

impl InteractionCoefficients {
    pub fn perfect_conductor() -> Self {
        InteractionCoefficients {
            reflect_perp: Complex64::new(-1.0, 0.0),
            reflect_par: Complex64::new(1.0, 0.0),
            transmit_perp: Complex64::new(0.0, 0.0),
            transmit_par: Complex64::new(0.0, 0.0),
        }
    }

    pub fn at(geom: &InterfaceGeometry) -> Self {
        let (tp, tl) = transmission_coeffs(geom);
        InteractionCoefficients {
            reflect_perp: fresnel_perp(geom),
            reflect_par: fresnel_par(geom),
            transmit_perp: tp,
            transmit_par: tl,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(theta: f64, n1: f64, n2: f64) -> InterfaceGeometry {
        InterfaceGeometry::new(theta, Complex64::new(n1, 0.0), Complex64::new(n2, 0.0), 0.1).unwrap()
    }

    #[test]
    fn normal_incidence_snell() {
        let g = real(0.0, 1.0, 1.5);
        assert!(snell_angle(&g).norm() < 1e-15);
    }

    #[test]
    fn snell_thirty_degrees() {
        let g = real(30f64.to_radians(), 1.0, 1.5);
        let t = snell_angle(&g);
        // arcsin(1/3)
        assert!((t.re - 0.339_836_909_454_121_9).abs() < 1e-12);
        assert!(t.im.abs() < 1e-12);
    }

    #[test]
    fn normal_incidence_values() {
        let g = real(0.0, 1.0, 1.5);
        assert!((fresnel_perp(&g) - Complex64::new(-0.2, 0.0)).norm() < 1e-15);
        assert!((fresnel_par(&g) - Complex64::new(0.2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matched_media() {
        let g = InterfaceGeometry::new(0.7, Complex64::new(2.0, -0.1), Complex64::new(2.0, -0.1), 0.1).unwrap();
        assert!(fresnel_perp(&g).norm() < 1e-15);
        assert!(fresnel_par(&g).norm() < 1e-15);
        let (a, b) = transmission_coeffs(&g);
        assert!((a - 1.0).norm() < 1e-15 && (b - 1.0).norm() < 1e-15);
    }

    #[test]
    fn total_internal_reflection() {
        let g = real(60f64.to_radians(), 1.5, 1.0);
        assert!((fresnel_perp(&g).norm() - 1.0).abs() < 1e-12);
        assert!((fresnel_par(&g).norm() - 1.0).abs() < 1e-12);
        let (p, l) = transmitted_power_fraction(&g);
        assert!(p.abs() < 1e-9 && l.abs() < 1e-9);
    }

    #[test]
    fn grazing_limit() {
        let g = real(FRAC_PI_2 - 1e-9, 1.0, 1.5);
        assert!((fresnel_perp(&g).norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn brewster_null() {
        let g = real((1.5f64).atan(), 1.0, 1.5);
        assert!(fresnel_par(&g).norm() < 1e-9);
    }

    #[test]
    fn lossy_snell_consistency() {
        let g = InterfaceGeometry::new(0.9, Complex64::new(1.0, 0.0), Complex64::new(2.3, -0.4), 0.1).unwrap();
        let t = snell_angle(&g);
        let lhs = g.n1 * g.incident_angle.sin();
        let rhs = g.n2 * t.sin();
        assert!((lhs - rhs).norm() < 1e-12);
        assert!((g.n2 * t.cos()).im <= 0.0);
        assert!(fresnel_perp(&g).norm() <= 1.0 + 1e-12);
        assert!(fresnel_par(&g).norm() <= 1.0 + 1e-12);
    }
}
