//! Per-interaction electromagnetic coefficients.

mod fresnel;
mod utd;

pub use fresnel::{
    fresnel_par, fresnel_perp, snell_angle, transmission_coeffs, transmitted_power_fraction,
    InteractionCoefficients, InterfaceGeometry,
};
pub use utd::{fresnel_cs, transition_function, utd_diffraction_coeff, DiffractionCoefficient, Wedge, KELLER_TOLERANCE};

use num_complex::Complex64;
use thiserror::Error;

use crate::scene::Material;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid diffraction geometry: {0}")]
    InvalidGeometry(String),
}

/// Advances a complex amplitude across one segment:
/// `α · coeff · e^{-jkd} / d` with `k = 2π/λ`.
pub fn update_amplitude(alpha: Complex64, coeff: Complex64, distance: f64, wavelength: f64) -> Result<Complex64, EmError> {
    if !(distance > 0.0) {
        return Err(EmError::InvalidArgument(format!("segment length must be positive, got {distance}")));
    }
    if !(wavelength > 0.0) {
        return Err(EmError::InvalidArgument("wavelength must be positive".into()));
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    Ok(alpha * coeff * Complex64::from_polar(1.0 / distance, -k * distance))
}

/// Spherical-wave form of the segment update used along multi-bounce paths.
///
/// A point source imaged through planar interactions spreads with the total
/// unfolded length, so a segment of length `d` that starts after `travelled`
/// metres scales the amplitude by `travelled / (travelled + d)` instead of
/// `1/d`. For the first segment (`travelled == 0`) this is exactly
/// [`update_amplitude`].
pub fn advance_spherical(alpha: Complex64, coeff: Complex64, travelled: f64, distance: f64, wavelength: f64) -> Result<Complex64, EmError> {
    if travelled == 0.0 {
        return update_amplitude(alpha, coeff, distance, wavelength);
    }
    if !(distance > 0.0) || !(travelled > 0.0) {
        return Err(EmError::InvalidArgument("segment lengths must be positive".into()));
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    Ok(alpha * coeff * Complex64::from_polar(travelled / (travelled + distance), -k * distance))
}

/// Reflection/transmission coefficients for a ray in air meeting `material`.
///
/// Walls are treated as a single air-to-material interface, and the same
/// coefficients apply whichever side the ray arrives from.
pub fn coefficients_for(material: &Material, incident_angle: f64, frequency_hz: f64) -> InteractionCoefficients {
    if material.is_perfect_conductor() {
        return InteractionCoefficients::perfect_conductor();
    }
    let wavelength = crate::geometry::wavelength(frequency_hz);
    let geom = InterfaceGeometry {
        incident_angle: incident_angle.clamp(0.0, std::f64::consts::FRAC_PI_2),
        n1: Complex64::new(1.0, 0.0),
        n2: material.refractive_index(frequency_hz),
        wavelength,
    };
    InteractionCoefficients::at(&geom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn full_cycle_unit_distance() {
        let a = Complex64::new(0.3, -0.7);
        let out = update_amplitude(a, Complex64::new(1.0, 0.0), 1.0, 1.0).unwrap();
        assert!((out - a).norm() < 1e-15);
    }

    #[test]
    fn half_cycle_with_negative_coefficient() {
        // k d = π with d = 2 → λ = 4.
        let out = update_amplitude(Complex64::new(1.0, 0.0), Complex64::new(-0.2, 0.0), 2.0, 4.0).unwrap();
        assert!((out - Complex64::new(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn absorber_and_errors() {
        let out = update_amplitude(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 3.0, 0.1).unwrap();
        assert_eq!(out.norm(), 0.0);
        assert!(update_amplitude(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), 0.0, 0.1).is_err());
        assert!(update_amplitude(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), -1.0, 0.1).is_err());
    }

    #[test]
    fn spherical_chain_telescopes_to_total_length() {
        let lam = 0.1;
        let legs = [3.0, 4.5, 2.25];
        let mut a = Complex64::new(1.0, 0.0);
        let mut travelled = 0.0;
        for d in legs {
            a = advance_spherical(a, Complex64::new(1.0, 0.0), travelled, d, lam).unwrap();
            travelled += d;
        }
        let total: f64 = legs.iter().sum();
        let expect = Complex64::from_polar(1.0 / total, -2.0 * PI / lam * total);
        assert!((a - expect).norm() < 1e-14);
    }
}
