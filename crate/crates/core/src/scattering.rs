//! Reflection/transmission coefficients, the scattering matrix and its
//! structural identities, and the half-guide decomposition of symmetric guides.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point};
use crate::helmholtz::{build_half_system, build_system, CutCondition, FieldSolution, HelmholtzSystem, Incidence, SolverParams};
use crate::mesh::BoundaryTag;

/// Reflection and transmission read off the zeroth modal coefficient on the
/// two truncation lines. A mesh without a right truncation yields T = 0.
pub fn extract_coefficients(sol: &FieldSolution) -> (Complex64, Complex64) {
    let m = &sol.mesh;
    let c_left = sol.modal_coefficient(BoundaryTag::LeftTruncation, 0);
    let has_right = m.boundary.iter().any(|e| e.tag == BoundaryTag::RightTruncation);
    let c_right = if has_right { sol.modal_coefficient(BoundaryTag::RightTruncation, 0) } else { Complex64::new(0.0, 0.0) };
    let w = sol.omega;
    match sol.incidence {
        Incidence::Left => {
            let ph = Complex64::from_polar(1.0, -w * m.x_left.abs());
            ((c_left - ph) * ph, c_right * Complex64::from_polar(1.0, -w * m.x_right.abs()))
        }
        Incidence::Right => {
            let ph = Complex64::from_polar(1.0, -w * m.x_right.abs());
            ((c_right - ph) * ph, c_left * Complex64::from_polar(1.0, -w * m.x_left.abs()))
        }
    }
}

/// 𝕊 = (R₊ T; T R₋) with its defect estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix {
    pub r_plus: Complex64,
    pub r_minus: Complex64,
    /// Average of the left- and right-incidence transmissions.
    pub t: Complex64,
    pub omega: f64,
    /// |T_left − T_right|.
    pub reciprocity_defect: f64,
}

impl SMatrix {
    /// max over both incidences of ||R|² + |T|² − 1|.
    pub fn energy_defect(&self) -> f64 {
        let t2 = self.t.norm_sqr();
        (self.r_plus.norm_sqr() + t2 - 1.0).abs().max((self.r_minus.norm_sqr() + t2 - 1.0).abs())
    }

    /// |conj(R₊)T + conj(T)R₋|.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.r_plus.conj() * self.t + self.t.conj() * self.r_minus).norm()
    }

    /// Frobenius norm of 𝕊·conj(𝕊)ᵀ − I.
    pub fn unitarity_defect(&self) -> f64 {
        let d1 = self.r_plus.norm_sqr() + self.t.norm_sqr() - 1.0;
        let d2 = self.r_minus.norm_sqr() + self.t.norm_sqr() - 1.0;
        let off = self.r_plus * self.t.conj() + self.t * self.r_minus.conj();
        (d1 * d1 + d2 * d2 + 2.0 * off.norm_sqr()).sqrt()
    }

    pub fn csv_header() -> &'static str {
        "omega,re_r_plus,im_r_plus,re_r_minus,im_r_minus,re_t,im_t,energy_defect,reciprocity_defect"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            self.omega,
            self.r_plus.re,
            self.r_plus.im,
            self.r_minus.re,
            self.r_minus.im,
            self.t.re,
            self.t.im,
            self.energy_defect(),
            self.reciprocity_defect
        )
    }
}

/// Both incidence fields on one mesh together with the resulting 𝕊.
pub struct Scattering {
    pub system: HelmholtzSystem,
    /// W⁺: incidence from the left.
    pub w_plus: FieldSolution,
    /// W⁻: incidence from the right.
    pub w_minus: FieldSolution,
    pub s: SMatrix,
}

impl Scattering {
    pub fn from_system(system: HelmholtzSystem) -> Result<Scattering> {
        let (w_plus, w_minus) = system.solve_both()?;
        let (r_plus, t_l) = extract_coefficients(&w_plus);
        let (r_minus, t_r) = extract_coefficients(&w_minus);
        if (t_l - t_r).norm() > 1e-6 {
            log::warn!("reciprocity defect {:.3e}", (t_l - t_r).norm());
        }
        let s = SMatrix { r_plus, r_minus, t: 0.5 * (t_l + t_r), omega: system.omega, reciprocity_defect: (t_l - t_r).norm() };
        Ok(Scattering { system, w_plus, w_minus, s })
    }
}

pub fn solve_scattering_pair(g: &Geometry, params: &SolverParams) -> Result<Scattering> {
    Scattering::from_system(build_system(g, params)?)
}

pub fn scattering_matrix(g: &Geometry, params: &SolverParams) -> Result<SMatrix> {
    Ok(solve_scattering_pair(g, params)?.s)
}

/// max over `points` of the two components of 𝕊·conj(W) − W.
pub fn structure_residual(w_plus: &FieldSolution, w_minus: &FieldSolution, s: &SMatrix, points: &[Point]) -> Result<f64> {
    if !Arc::ptr_eq(&w_plus.mesh, &w_minus.mesh) && w_plus.mesh.nodes != w_minus.mesh.nodes {
        return Err(Error::MeshMismatch);
    }
    let mut worst: f64 = 0.0;
    for &p in points {
        let a = w_plus.evaluate(p)?;
        let b = w_minus.evaluate(p)?;
        let e1 = s.r_plus * a.conj() + s.t * b.conj() - a;
        let e2 = s.t * a.conj() + s.r_minus * b.conj() - b;
        worst = worst.max(e1.norm()).max(e2.norm());
    }
    Ok(worst)
}

/// Reflection coefficients (R_N, R_D) of the left half guide with Neumann and
/// Dirichlet conditions on the cut x = 0. For a symmetric guide
/// R₊ = (R_N + R_D)/2 and T = (R_N − R_D)/2.
pub fn half_guide_reflections(g: &Geometry, params: &SolverParams) -> Result<(Complex64, Complex64)> {
    if !g.fully_symmetric() {
        return Err(Error::NotSymmetric("half-guide decomposition needs an x-symmetric guide".into()));
    }
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (k, cut) in [CutCondition::Neumann, CutCondition::Dirichlet].into_iter().enumerate() {
        let sys = build_half_system(g, params, cut)?;
        out[k] = extract_coefficients(&sys.solve(Incidence::Left)?).0;
    }
    Ok((out[0], out[1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bare_strip_is_transparent() {
        let g = Geometry::bare_strip(1.0);
        let params = SolverParams { h: 0.05, x_t: Some(3.0), ..Default::default() };
        let sc = solve_scattering_pair(&g, &params).unwrap();
        assert!(sc.s.r_plus.norm() < 1e-6 && sc.s.r_minus.norm() < 1e-6, "{:?}", sc.s);
        assert!((sc.s.t - 1.0).norm() < 1e-5);
        let pts = [Point::new(0.3, 0.4), Point::new(-1.7, 0.9)];
        assert!(structure_residual(&sc.w_plus, &sc.w_minus, &sc.s, &pts).unwrap() < 1e-5);
    }

    #[test]
    fn bare_half_strip_reflects_fully() {
        let g = Geometry::bare_strip(1.0);
        let params = SolverParams { h: 0.05, x_t: Some(3.0), ..Default::default() };
        let (rn, rd) = half_guide_reflections(&g, &params).unwrap();
        assert!((rn - 1.0).norm() < 1e-5, "{rn}");
        assert!((rd + 1.0).norm() < 1e-5, "{rd}");
    }

    #[test]
    fn smatrix_defects() {
        let s = SMatrix {
            r_plus: Complex64::new(0.6, 0.0),
            r_minus: Complex64::new(0.6, 0.0),
            t: Complex64::new(0.0, 0.8),
            omega: 0.8 * PI,
            reciprocity_defect: 0.0,
        };
        assert!(s.energy_defect() < 1e-15);
        assert!(s.orthogonality_defect() < 1e-15);
        assert!(s.unitarity_defect() < 1e-15);
        assert_eq!(s.csv_row().split(',').count(), SMatrix::csv_header().split(',').count());
    }
}
