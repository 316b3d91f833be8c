//! Resonator positions from the reflection phase of the unperturbed guide.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point, Wall};
use crate::helmholtz::SolverParams;
use crate::scattering::{solve_scattering_pair, SMatrix, Scattering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementRule {
    /// cos(2ωp − θ₊) = −ρ.
    ZeroReflectionLeft,
    /// cos(2ωp + θ₋) = −ρ.
    ZeroReflectionRight,
    /// Zero of 𝓕(p) = |W⁺|² + |W⁻|² − 2 Re((W⁺)²/R₊) on FEM traces.
    Exact,
    /// The zero-reflection equation together with sin(·) = τ√(1 − ρ²).
    UnitTransmission,
    /// Grid point maximizing |Im| of the predicted transmission circle center.
    CenterSearch,
    /// Offset (π − μ)/(2ω) modulo π/ω from the first phase-shifter resonator.
    PhaseShift,
    /// Phase-shift position moved by the measured phase error over −2ω.
    PhaseCorrection,
    Fixed,
}

impl PlacementRule {
    pub fn name(self) -> &'static str {
        match self {
            PlacementRule::ZeroReflectionLeft => "zero_reflection_left",
            PlacementRule::ZeroReflectionRight => "zero_reflection_right",
            PlacementRule::Exact => "exact",
            PlacementRule::UnitTransmission => "unit_transmission",
            PlacementRule::CenterSearch => "center_search",
            PlacementRule::PhaseShift => "phase_shift",
            PlacementRule::PhaseCorrection => "phase_correction",
            PlacementRule::Fixed => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub p: f64,
    pub rule: PlacementRule,
    /// Sign of the arccos branch (0 when the rule has a single family).
    pub branch: i8,
    /// Period index n in p = p* + nπ/ω.
    pub period: i64,
}

impl Placement {
    pub fn fixed(p: f64) -> Placement {
        Placement { p, rule: PlacementRule::Fixed, branch: 0, period: 0 }
    }
}

fn reflection_on(s: &SMatrix, side: Side) -> Result<(f64, f64)> {
    let r = match side {
        Side::Left => s.r_plus,
        Side::Right => s.r_minus,
    };
    let rho = r.norm();
    if rho >= 1.0 - 1e-9 {
        return Err(Error::FullReflection(rho));
    }
    if rho < 1e-9 {
        return Err(Error::NoReflection(rho));
    }
    Ok((rho, r.arg().rem_euclid(2.0 * PI)))
}

/// The `per_family` roots of each family p* + nπ/ω closest to the obstacle
/// with p ≤ −p_min (left) or p ≥ p_min (right), sorted by |p|.
fn roots_beyond(base: f64, omega: f64, side: Side, p_min: f64, per_family: usize) -> Vec<(f64, i64)> {
    let period = PI / omega;
    (0..per_family as i64)
        .map(|k| match side {
            Side::Left => {
                let n = ((-p_min - base) / period).floor() as i64 - k;
                (base + n as f64 * period, n)
            }
            Side::Right => {
                let n = ((p_min - base) / period).ceil() as i64 + k;
                (base + n as f64 * period, n)
            }
        })
        .collect()
}

/// Roots of cos(2ωp − θ₊) = −ρ (left) or cos(2ωp + θ₋) = −ρ (right), both
/// arccos branches.
pub fn placement_zero_reflection(s: &SMatrix, side: Side, p_min: f64, per_family: usize) -> Result<Vec<Placement>> {
    let (rho, theta) = reflection_on(s, side)?;
    let alpha = (-rho).acos();
    let (sign, rule) = match side {
        Side::Left => (1.0, PlacementRule::ZeroReflectionLeft),
        Side::Right => (-1.0, PlacementRule::ZeroReflectionRight),
    };
    let mut out = Vec::new();
    for branch in [1i8, -1] {
        let base = (sign * theta + branch as f64 * alpha) / (2.0 * s.omega);
        for (p, period) in roots_beyond(base, s.omega, side, p_min, per_family) {
            out.push(Placement { p, rule, branch, period });
        }
    }
    out.sort_by(|a, b| a.p.abs().total_cmp(&b.p.abs()).then(b.branch.cmp(&a.branch)));
    Ok(out)
}

/// Zero-reflection roots on which the far-field limit transmission equals
/// one when T lies on 𝒞(½, ½) with τ = sign(Im T): sin(2ωp − θ₊) = −τ√(1 − ρ²)
/// on the left, sin(2ωp + θ₋) = τ√(1 − ρ²) on the right. A single family.
pub fn placement_unit_transmission(s: &SMatrix, side: Side, tau: f64, p_min: f64, count: usize) -> Result<Vec<Placement>> {
    let (rho, theta) = reflection_on(s, side)?;
    let root = (1.0 - rho * rho).sqrt();
    let base = match side {
        Side::Left => (theta + (-tau * root).atan2(-rho)) / (2.0 * s.omega),
        Side::Right => ((tau * root).atan2(-rho) - theta) / (2.0 * s.omega),
    };
    Ok(roots_beyond(base, s.omega, side, p_min, count)
        .into_iter()
        .map(|(p, period)| Placement { p, rule: PlacementRule::UnitTransmission, branch: 0, period })
        .collect())
}

/// 𝓕 = |W⁺|² + |W⁻|² − 2 Re((W⁺)²/R₊); the limit reflection can vanish
/// exactly where 𝓕 = 0.
pub fn placement_function(wp: Complex64, wm: Complex64, r_plus: Complex64) -> f64 {
    wp.norm_sqr() + wm.norm_sqr() - 2.0 * (wp * wp / r_plus).re
}

/// Both incidence fields of `g` on a mesh reaching at least 2 beyond `reach`.
pub fn guide_fields(g: &Geometry, reach: f64, params: &SolverParams) -> Result<Scattering> {
    let mut prm = params.clone();
    prm.x_t = Some(params.truncation(g).max(reach + 2.0));
    solve_scattering_pair(g, &prm)
}

/// (W⁺(A), W⁻(A)) at wall points A = (p, y_wall).
pub fn wall_traces(sc: &Scattering, wall: Wall, ps: &[f64]) -> Result<Vec<(Complex64, Complex64)>> {
    ps.iter()
        .map(|&p| {
            let a = Point::new(p, wall.y());
            Ok((sc.w_plus.evaluate(a)?, sc.w_minus.evaluate(a)?))
        })
        .collect()
}

/// Moves each candidate to the nearest zero of 𝓕 computed from FEM traces,
/// searching within a quarter period. Candidates without a sign change
/// nearby are kept unchanged.
pub fn refine_placement_exact(g: &Geometry, candidates: &[Placement], wall: Wall, params: &SolverParams) -> Result<Vec<Placement>> {
    let reach = candidates.iter().map(|c| c.p.abs()).fold(0.0, f64::max) + PI / (4.0 * params.omega);
    let sc = guide_fields(g, reach, params)?;
    let r = sc.s.r_plus;
    if r.norm() < 1e-9 {
        return Err(Error::NoReflection(r.norm()));
    }
    let f = |p: f64| -> Result<f64> {
        let a = Point::new(p, wall.y());
        Ok(placement_function(sc.w_plus.evaluate(a)?, sc.w_minus.evaluate(a)?, r))
    };
    let half = PI / (4.0 * params.omega);
    let n = 20;
    let mut out = Vec::new();
    for c in candidates {
        let xs: Vec<f64> = (0..=n).map(|k| c.p - half + 2.0 * half * k as f64 / n as f64).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect::<Result<_>>()?;
        let bracket = (0..n)
            .filter(|&k| fs[k] == 0.0 || fs[k].signum() != fs[k + 1].signum())
            .min_by(|&a, &b| (0.5 * (xs[a] + xs[a + 1]) - c.p).abs().total_cmp(&(0.5 * (xs[b] + xs[b + 1]) - c.p).abs()));
        let Some(k) = bracket else {
            log::warn!("no sign change of the placement function near p = {:.6}", c.p);
            out.push(*c);
            continue;
        };
        let (mut a, mut b, mut fa) = (xs[k], xs[k + 1], fs[k]);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let fm = f(m)?;
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        out.push(Placement { p: 0.5 * (a + b), rule: PlacementRule::Exact, ..*c });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smatrix(r: Complex64, omega: f64) -> SMatrix {
        let t = Complex64::new(0.0, (1.0 - r.norm_sqr()).sqrt());
        SMatrix { r_plus: r, r_minus: -r.conj() * t / t.conj(), t, omega, reciprocity_defect: 0.0 }
    }

    #[test]
    fn half_reflection_roots() {
        let w = 0.8 * PI;
        let s = smatrix(Complex64::new(0.5, 0.0), w);
        let roots = placement_zero_reflection(&s, Side::Left, 3.0, 2).unwrap();
        assert_eq!(roots.len(), 4);
        for r in &roots {
            assert!(r.p <= -3.0);
            // 2ωp ≡ ±2π/3 modulo 2π, period 1.25 in p.
            let k = (r.p - r.branch as f64 * 5.0 / 12.0) / 1.25;
            assert!((k - k.round()).abs() < 1e-12, "{r:?}");
            assert!(((2.0 * w * r.p).cos() + 0.5).abs() < 1e-12);
        }
        let ps: Vec<f64> = roots.iter().map(|r| r.p).collect();
        let expect = [-10.0 / 3.0, -25.0 / 6.0, -55.0 / 12.0, -65.0 / 12.0];
        assert!(ps.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-12), "{ps:?}");
        assert!(roots.windows(2).all(|w| w[0].p.abs() <= w[1].p.abs()));
    }

    #[test]
    fn reflection_guards() {
        let w = 0.8 * PI;
        let s = smatrix(Complex64::new(0.0, 0.0), w);
        assert!(matches!(placement_zero_reflection(&s, Side::Left, 3.0, 1), Err(Error::NoReflection(_))));
        let mut s = smatrix(Complex64::new(0.5, 0.0), w);
        s.r_plus = Complex64::new(0.0, 1.0);
        assert!(matches!(placement_zero_reflection(&s, Side::Left, 3.0, 1), Err(Error::FullReflection(_))));
    }

    #[test]
    fn right_side_uses_minus_phase() {
        let w = 0.8 * PI;
        let s = smatrix(Complex64::from_polar(0.3, 1.1), w);
        let th = s.r_minus.arg();
        for r in placement_zero_reflection(&s, Side::Right, 2.0, 3).unwrap() {
            assert!(r.p >= 2.0);
            assert!(((2.0 * w * r.p + th).cos() + 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_transmission_roots_give_unit_limit_transmission() {
        let w = 0.8 * PI;
        let rho: f64 = 0.6;
        for tau in [1.0, -1.0] {
            let t = Complex64::new(1.0 - rho * rho, tau * rho * (1.0 - rho * rho).sqrt());
            let r = Complex64::from_polar(rho, 2.0);
            let s = SMatrix { r_plus: r, r_minus: -r.conj() * t / t.conj(), t, omega: w, reciprocity_defect: 0.0 };
            for side in [Side::Left, Side::Right] {
                let p = placement_unit_transmission(&s, side, tau, 3.0, 1).unwrap()[0].p;
                let e = Complex64::from_polar(1.0, w * p);
                // Far-field traces on either side of the obstacle.
                let (wp, wm) = match side {
                    Side::Left => (e + r / e, t / e),
                    Side::Right => (t * e, 1.0 / e + s.r_minus * e),
                };
                assert!(placement_function(wp, wm, r).abs() < 1e-12);
                // Transmission of the limit at zero reflection: T − R₊W⁻/W⁺.
                let t0 = t - r * wm / wp;
                assert!((t0 - 1.0).norm() < 1e-12, "{side:?} {tau} {t0}");
            }
        }
    }

    #[test]
    fn placement_function_vanishes_on_far_field_roots() {
        let w = 0.8 * PI;
        let s = smatrix(Complex64::from_polar(0.45, 0.7), w);
        for r in placement_zero_reflection(&s, Side::Left, 3.0, 2).unwrap() {
            let e = Complex64::from_polar(1.0, w * r.p);
            let wp = e + s.r_plus / e;
            let wm = s.t / e;
            assert!(placement_function(wp, wm, s.r_plus).abs() < 1e-12);
        }
    }
}
