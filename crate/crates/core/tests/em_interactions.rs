use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use raytwin::em::*;
use raytwin::geometry::{reflect, Vec3};
use raytwin::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn snell_consistency(theta in 0.0..FRAC_PI_2, n1 in 1.0f64..4.0, n2r in 1.0f64..6.0, n2i in -3.0f64..=0.0) {
        let g = InterfaceGeometry::new(theta, c(n1, 0.0), c(n2r, n2i), 0.1).unwrap();
        let t = snell_angle(&g);
        let lhs = g.n1 * theta.sin();
        let rhs = g.n2 * t.sin();
        prop_assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn passivity(theta in 0.0..=FRAC_PI_2, n1 in 1.0f64..4.0, n2r in 1.0f64..8.0, n2i in -5.0f64..=0.0) {
        let g = InterfaceGeometry::new(theta, c(n1, 0.0), c(n2r, n2i), 0.1).unwrap();
        prop_assert!(fresnel_perp(&g).norm() <= 1.0 + 1e-12);
        prop_assert!(fresnel_par(&g).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn lossless_power_conservation(theta in 0.0..FRAC_PI_2, n1 in 1.0f64..4.0, n2 in 1.0f64..4.0) {
        let g = InterfaceGeometry::new(theta, c(n1, 0.0), c(n2, 0.0), 0.1).unwrap();
        let (tp, tl) = transmitted_power_fraction(&g);
        prop_assert!((fresnel_perp(&g).norm_sqr() + tp - 1.0).abs() < 1e-9);
        prop_assert!((fresnel_par(&g).norm_sqr() + tl - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reflection_law(d in prop::array::uniform3(-1.0f64..1.0), n in prop::array::uniform3(-1.0f64..1.0)) {
        let d = Vec3::from(d);
        let n = Vec3::from(n);
        prop_assume!(d.norm() > 1e-3 && n.norm() > 1e-3);
        let (d, n) = (d.normalize(), n.normalize());
        let r = reflect(&d, &n);
        prop_assert!((r - (d - 2.0 * d.dot(&n) * n)).norm() < 1e-12);
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
        // Equal angles with the normal: cos(r, n) = cos(−d, n) up to the side flip.
        prop_assert!((r.dot(&n) + d.dot(&n)).abs() < 1e-12);
    }

    #[test]
    fn amplitude_magnitude_law(
        a in (-5.0f64..5.0, -5.0f64..5.0),
        k in (-1.0f64..1.0, -1.0f64..1.0),
        d in 1e-3f64..1e4,
        lambda in 1e-3f64..10.0,
    ) {
        let (a, k) = (c(a.0, a.1), c(k.0, k.1));
        let out = update_amplitude(a, k, d, lambda).unwrap();
        let want = a.norm() * k.norm();
        prop_assert!((out.norm() * d - want).abs() <= 1e-12 * want.max(1e-300));
    }
}

#[test]
fn non_positive_segment_rejected() {
    assert!(update_amplitude(c(1.0, 0.0), c(1.0, 0.0), 0.0, 0.1).is_err());
    assert!(update_amplitude(c(1.0, 0.0), c(1.0, 0.0), -1.0, 0.1).is_err());
}

#[test]
fn total_internal_reflection_transmits_nothing() {
    for deg in [45.0f64, 60.0, 75.0, 89.0] {
        let g = InterfaceGeometry::new(deg.to_radians(), c(1.5, 0.0), c(1.0, 0.0), 0.1).unwrap();
        let (tp, tl) = transmitted_power_fraction(&g);
        assert!(tp.abs() < 1e-9 && tl.abs() < 1e-9, "{deg}");
        assert!((fresnel_perp(&g).norm() - 1.0).abs() < 1e-12);
    }
}

// Right-angle wedge: solid occupies x ≥ 0, y ≤ 0; free region φ ∈ [0, 3π/2].
fn wedge() -> Wedge {
    Wedge {
        edge: Vec3::z(),
        face0: Vec3::x(),
        face0_normal: Vec3::y(),
        interior_angle: FRAC_PI_2,
    }
}

const PHI_SRC: f64 = PI / 6.0;
const S: f64 = 10.0;

fn source() -> Vec3 {
    S * Vec3::new(PHI_SRC.cos(), PHI_SRC.sin(), 0.0)
}

fn observer(phi: f64) -> Vec3 {
    S * Vec3::new(phi.cos(), phi.sin(), 0.0)
}

fn coeff(phi: f64, lambda: f64) -> DiffractionCoefficient {
    let inc = -source().normalize();
    let dif = observer(phi).normalize();
    utd_diffraction_coeff(&wedge(), &inc, &dif, S, S, lambda).unwrap()
}

/// Incident GO field plus the edge-diffracted field for a unit point source.
fn total_field(phi: f64, lambda: f64, soft: bool) -> Complex64 {
    let k = 2.0 * PI / lambda;
    let src = source();
    let obs = observer(phi);
    let d = coeff(phi, lambda);
    let dc = if soft { d.soft } else { d.hard };
    let at_edge = Complex64::from_polar(1.0 / S, -k * S);
    let diffracted = at_edge * dc * Complex64::from_polar(1.0, -k * S);
    let lit = phi < PI + PHI_SRC;
    let r = (obs - src).norm();
    let go = if lit { Complex64::from_polar(1.0 / r, -k * r) } else { c(0.0, 0.0) };
    go + diffracted
}

#[test]
fn deep_shadow_monotone_decay() {
    let lambda = 0.1;
    let mut prev = f64::INFINITY;
    let start = (PI + PHI_SRC).to_degrees().ceil() as i32 + 5;
    for deg in start..270 {
        let mag = coeff((deg as f64).to_radians(), lambda).soft.norm();
        assert!(mag < prev, "|D| rose at {deg} deg: {mag} >= {prev}");
        prev = mag;
    }
}

#[test]
fn total_field_continuous_across_incident_shadow_boundary() {
    let isb = PI + PHI_SRC;
    for lambda in [0.01, 0.1, 1.0] {
        for soft in [true, false] {
            let before = total_field(isb - 1e-7, lambda, soft);
            let after = total_field(isb + 1e-7, lambda, soft);
            let rel = (before - after).norm() / before.norm();
            assert!(rel < 0.01, "lambda {lambda} soft {soft}: jump {rel}");
        }
    }
}

#[test]
fn coefficient_scales_as_root_wavelength() {
    let phi = 250f64.to_radians();
    let lambdas: Vec<f64> = (0..9).map(|i| 1e-3 * 10f64.powf(i as f64 / 8.0)).collect();
    let xs: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = lambdas.iter().map(|&l| coeff(phi, l).soft.norm().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope - 0.5).abs() < 0.05, "slope {slope}");
}
