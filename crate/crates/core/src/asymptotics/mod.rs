//! Limit formulas for thin resonators as their width ε → 0 with lengths
//! ℓ = π(m+½)/ω + ε(η/ω − C_Ξ − Re Γ − π⁻¹|ln ε|), and the constants they need.

pub mod green;
pub mod profile;
pub mod validation;

pub use green::{compute_asymptotic_data, compute_coupling, compute_green_constant, AsymptoticData};
pub use validation::{validate_resonators, Validation, ValidationPoint};
pub use profile::{compute_profile_constant, default_constants_path, load_or_compute_profile_constant, ProfileConstant};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::resonant_length;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Limits of (R₊, T) and the resonator amplitudes a_j (field ≈ ε⁻¹ a_j sin(ω(y−1)) inside).
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPrediction {
    pub r0: Complex64,
    pub t0: Complex64,
    pub amplitudes: Vec<Complex64>,
    pub etas: Vec<f64>,
}

impl LimitPrediction {
    pub fn energy_defect(&self) -> f64 {
        (self.r0.norm_sqr() + self.t0.norm_sqr() - 1.0).abs()
    }
}

/// One resonator at A with traces W±(A) of the unperturbed guide.
pub fn one_resonator_limit(r: Complex64, t: Complex64, wp: Complex64, wm: Complex64, eta: f64) -> Result<LimitPrediction> {
    let s = wp.norm_sqr() + wm.norm_sqr();
    if s == 0.0 {
        return Err(Error::Degenerate("W+(A) and W-(A) both vanish".into()));
    }
    let d = 4.0 * eta + I * s;
    Ok(LimitPrediction {
        r0: r - 2.0 * I * wp * wp / d,
        t0: t - 2.0 * I * wp * wm / d,
        amplitudes: vec![-4.0 * wp / d],
        etas: vec![eta],
    })
}

/// Two coupled resonators; `omega_gamma_tilde` is ω·γ₁(A₂).
pub fn two_resonator_limit(
    r: Complex64,
    t: Complex64,
    wp: [Complex64; 2],
    wm: [Complex64; 2],
    omega_gamma_tilde: Complex64,
    eta: [f64; 2],
) -> Result<LimitPrediction> {
    let m11 = eta[0] + 0.25 * I * (wp[0].norm_sqr() + wm[0].norm_sqr());
    let m22 = eta[1] + 0.25 * I * (wp[1].norm_sqr() + wm[1].norm_sqr());
    let m12 = omega_gamma_tilde;
    let det = m11 * m22 - m12 * m12;
    if det.norm() < 1e-12 {
        return Err(Error::SingularCoupling(det.norm()));
    }
    let a1 = (-wp[0] * m22 + wp[1] * m12) / det;
    let a2 = (-wp[1] * m11 + wp[0] * m12) / det;
    Ok(LimitPrediction {
        r0: r + 0.5 * I * (a1 * wp[0] + a2 * wp[1]),
        t0: t + 0.5 * I * (a1 * wm[0] + a2 * wm[1]),
        amplitudes: vec![a1, a2],
        etas: eta.to_vec(),
    })
}

pub fn eta_to_length(eta: f64, eps: f64, m: u32, omega: f64, c_xi: f64, re_gamma: f64) -> f64 {
    resonant_length(omega, m) + eps * (eta / omega - c_xi - re_gamma - eps.ln().abs() / PI)
}

pub fn length_to_eta(length: f64, eps: f64, m: u32, omega: f64, c_xi: f64, re_gamma: f64) -> f64 {
    omega * ((length - resonant_length(omega, m)) / eps + c_xi + re_gamma + eps.ln().abs() / PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coefficient {
    Reflection,
    Transmission,
}

/// Center and radius of the circle {R₀(η)} or {T₀(η)}, η ∈ ℝ ∪ {∞}.
pub fn limit_circle(r: Complex64, t: Complex64, wp: Complex64, wm: Complex64, which: Coefficient) -> Result<(Complex64, f64)> {
    let s = wp.norm_sqr() + wm.norm_sqr();
    let num = match which {
        Coefficient::Reflection => wp * wp,
        Coefficient::Transmission => wp * wm,
    };
    if num.norm() == 0.0 {
        return Err(Error::Degenerate("the limit locus collapses to a point".into()));
    }
    let base = if which == Coefficient::Reflection { r } else { t };
    Ok((base - num / s, num.norm() / s))
}
