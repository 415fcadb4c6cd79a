//! Uniform theory of diffraction for a perfectly conducting wedge
//! (Kouyoumjian–Pathak form with the Fresnel transition function).

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::EmError;
use crate::geometry::Vec3;

/// Keller-cone tolerance on |β0 − β0'|.
pub const KELLER_TOLERANCE: f64 = 1e-6;

/// Fresnel integrals `C(x) + j S(x)` with the `cos(π t²/2)` kernel.
pub fn fresnel_cs(x: f64) -> (f64, f64) {
    let ax = x.abs();
    let (c, s) = if ax < 1.5 {
        let (c, s) = fresnel_series(ax);
        (c, s)
    } else {
        let g = fresnel_complement(ax);
        (0.5 - g.re, 0.5 - g.im)
    };
    if x < 0.0 {
        (-c, -s)
    } else {
        (c, s)
    }
}

/// Power series `Σ (jπ/2)^k x^(2k+1) / (k! (2k+1))`; accurate for small x.
fn fresnel_series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let step = Complex64::new(0.0, PI / 2.0 * x2);
    let mut power = Complex64::new(x, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..200 {
        let term = power / (2 * k + 1) as f64;
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
        power = power * step / (k + 1) as f64;
    }
    (sum.re, sum.im)
}

/// `(1/2 − C(x)) + j(1/2 − S(x))` for x ≥ 1.5 by continued fraction,
/// evaluated directly so there is no cancellation.
fn fresnel_complement(x: f64) -> Complex64 {
    let pix2 = PI * x * x;
    let mut b = Complex64::new(1.0, -pix2);
    let tiny = 1e-300;
    let mut cc = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    let mut n = -1.0;
    for _ in 0..200 {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += Complex64::new(4.0, 0.0);
        d = Complex64::new(1.0, 0.0) / (d * a + b);
        cc = b + Complex64::new(a, 0.0) / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    Complex64::new(0.5, 0.5) * Complex64::from_polar(1.0, 0.5 * pix2) * h
}

/// UTD transition function `F(X) = 2j√X e^{jX} ∫_{√X}^∞ e^{-jτ²} dτ`.
pub fn transition_function(x: f64) -> Complex64 {
    if x <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let u = (2.0 * x / PI).sqrt();
    let (half_minus_c, half_minus_s) = if u < 1.5 {
        let (c, s) = fresnel_series(u);
        (0.5 - c, 0.5 - s)
    } else {
        let g = fresnel_complement(u);
        (g.re, g.im)
    };
    let integral = (PI / 2.0).sqrt() * Complex64::new(half_minus_c, -half_minus_s);
    Complex64::new(0.0, 2.0 * x.sqrt()) * Complex64::from_polar(1.0, x) * integral
}

/// Wedge geometry in the global frame.
///
/// `face0` is the unit in-face direction of the reference face, pointing
/// away from the edge; `face0_normal` is that face's unit normal pointing
/// into the free region. Angles φ are measured from `face0` towards
/// `face0_normal`, so the free region spans φ ∈ [0, nπ] with
/// n = (2π − interior_angle)/π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wedge {
    pub edge: Vec3,
    pub face0: Vec3,
    pub face0_normal: Vec3,
    pub interior_angle: f64,
}

impl Wedge {
    pub fn n(&self) -> f64 {
        (2.0 * PI - self.interior_angle) / PI
    }

    /// Angle of the perpendicular component of `v` around the edge, in [0, 2π).
    pub fn azimuth(&self, v: &Vec3) -> f64 {
        let a = v.dot(&self.face0_normal).atan2(v.dot(&self.face0));
        a.rem_euclid(2.0 * PI)
    }
}

/// Soft (Dirichlet) and hard (Neumann) diffraction coefficients, already
/// multiplied by the spherical-wave spreading factor `√(s′/(s(s′+s)))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionCoefficient {
    pub soft: Complex64,
    pub hard: Complex64,
}

fn a_pm(n: f64, beta: f64, sign: f64) -> (f64, f64) {
    let big_n = ((beta + sign * PI) / (2.0 * PI * n)).round();
    let eps = sign * PI + beta - 2.0 * PI * n * big_n;
    let a = 2.0 * ((2.0 * n * PI * big_n - beta) / 2.0).cos().powi(2);
    // eps is the distance from the shadow boundary singularity of this term.
    (a, if sign > 0.0 { eps } else { -eps })
}

/// One cot·F term of the coefficient, with the shadow-boundary limit
/// substituted when the cotangent argument is singular.
fn term(n: f64, k: f64, l: f64, beta: f64, sign: f64) -> Complex64 {
    let (a, eps) = a_pm(n, beta, sign);
    let arg = (PI + sign * beta) / (2.0 * n);
    if eps.abs() < 1e-10 {
        let e = Complex64::from_polar(1.0, FRAC_PI_4);
        return n * (Complex64::new((2.0 * PI * k * l).sqrt() * eps.signum(), 0.0) - 2.0 * k * l * eps * e) * e;
    }
    let cot = arg.cos() / arg.sin();
    cot * transition_function(k * l * a)
}

/// Diffraction coefficient for a ray arriving along `incident` (propagation
/// direction) and leaving along `diffracted`, with source distance
/// `s_prime` and observation distance `s` from the edge point.
pub fn utd_diffraction_coeff(
    wedge: &Wedge,
    incident: &Vec3,
    diffracted: &Vec3,
    s_prime: f64,
    s: f64,
    wavelength: f64,
) -> Result<DiffractionCoefficient, EmError> {
    if !(wedge.interior_angle > 0.0 && wedge.interior_angle < 2.0 * PI) {
        return Err(EmError::InvalidArgument(format!(
            "wedge interior angle {} outside (0, 2pi)",
            wedge.interior_angle
        )));
    }
    if !(s > 0.0 && s_prime > 0.0) {
        return Err(EmError::InvalidArgument("edge distances must be positive".into()));
    }
    if !(wavelength > 0.0) {
        return Err(EmError::InvalidArgument("wavelength must be positive".into()));
    }
    let inc = incident.normalize();
    let dif = diffracted.normalize();
    let beta_in = inc.dot(&wedge.edge).clamp(-1.0, 1.0).acos();
    let beta_out = dif.dot(&wedge.edge).clamp(-1.0, 1.0).acos();
    if (beta_in - beta_out).abs() > KELLER_TOLERANCE {
        return Err(EmError::InvalidGeometry(format!(
            "directions are off the Keller cone by {:e} rad",
            (beta_in - beta_out).abs()
        )));
    }
    let sin_beta = beta_in.sin();
    if sin_beta < 1e-9 {
        return Err(EmError::InvalidGeometry("incidence is parallel to the edge".into()));
    }

    let n = wedge.n();
    let phi_src = wedge.azimuth(&-inc);
    let phi_obs = wedge.azimuth(&dif);
    let k = 2.0 * PI / wavelength;
    let l = s * s_prime * sin_beta * sin_beta / (s + s_prime);

    let beta_minus = phi_obs - phi_src;
    let beta_plus = phi_obs + phi_src;
    let incident_terms = term(n, k, l, beta_minus, 1.0) + term(n, k, l, beta_minus, -1.0);
    let reflected_terms = term(n, k, l, beta_plus, 1.0) + term(n, k, l, beta_plus, -1.0);

    let prefactor = -Complex64::from_polar(1.0, -FRAC_PI_4) / (2.0 * n * (2.0 * PI * k).sqrt() * sin_beta);
    let spreading = (s_prime / (s * (s_prime + s))).sqrt();
    Ok(DiffractionCoefficient {
        soft: prefactor * (incident_terms - reflected_terms) * spreading,
        hard: prefactor * (incident_terms + reflected_terms) * spreading,
    })
}
