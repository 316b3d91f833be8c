//! Outgoing wall Green function γ with ∂_ν γ = δ_A, by singularity
//! subtraction: γ = χ·G₀ + γ̃ with G₀ = π⁻¹ ln(1/|x − A|) and a radial cutoff
//! χ equal to 1 for r < r₀ and 0 for r > 2r₀. γ̃ solves the Helmholtz problem
//! with the smooth source (Δ + ω²n)(χG₀) and the DtN conditions, and the
//! Green constant is Γ = γ̃(A).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point};
use crate::helmholtz::{fem, HelmholtzSystem, SolverParams};
use crate::mesh::{generate_mesh_with, BoundaryTag, Mesh};
use crate::scattering::{extract_coefficients, SMatrix};

/// Inner cutoff radius r₀.
pub const CUTOFF_RADIUS: f64 = 0.1;

/// χ, χ', χ'' of the quintic smoothstep cutoff.
pub fn cutoff(r: f64) -> (f64, f64, f64) {
    let r0 = CUTOFF_RADIUS;
    if r <= r0 {
        return (1.0, 0.0, 0.0);
    }
    if r >= 2.0 * r0 {
        return (0.0, 0.0, 0.0);
    }
    let t = (r - r0) / r0;
    let s = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
    let s1 = 30.0 * t * t * (1.0 - t) * (1.0 - t);
    let s2 = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
    (1.0 - s, -s1 / r0, -s2 / (r0 * r0))
}

pub fn log_kernel(r: f64) -> f64 {
    -r.ln() / PI
}

/// (Δ + ω²n)(χG₀) at distance r > 0 from the source point.
pub fn subtracted_source(omega: f64, n: f64, r: f64) -> f64 {
    if r >= 2.0 * CUTOFF_RADIUS {
        return 0.0;
    }
    let (chi, d1, d2) = cutoff(r);
    let g0 = log_kernel(r);
    g0 * (d2 + d1 / r) - 2.0 * d1 / (PI * r) + omega * omega * n * chi * g0
}

/// Reference triangle split `levels` times into four, 6-point rule on each piece.
fn composite_rule(levels: u32) -> Vec<([f64; 3], f64)> {
    let mut tris = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(4 * tris.len());
        for t in &tris {
            let mid = |a: [f64; 3], b: [f64; 3]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
            let (m01, m12, m20) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0]));
            next.push([t[0], m01, m20]);
            next.push([m01, t[1], m12]);
            next.push([m20, m12, t[2]]);
            next.push([m01, m12, m20]);
        }
        tris = next;
    }
    let scale = 1.0 / tris.len() as f64;
    let mut out = Vec::with_capacity(6 * tris.len());
    for t in &tris {
        for (l, w) in fem::TRI_RULE {
            let mut p = [0.0; 3];
            for k in 0..3 {
                p[k] = l[0] * t[0][k] + l[1] * t[1][k] + l[2] * t[2][k];
            }
            out.push((p, w * scale));
        }
    }
    out
}

/// Load vector ∫ (Δ + ω²n)(χG₀) ψ_i for the source point `a`.
pub fn subtracted_load(mesh: &Mesh, omega: f64, a: Point) -> Vec<Complex64> {
    let mut b = vec![Complex64::new(0.0, 0.0); mesh.n_nodes()];
    let smooth = composite_rule(2);
    let singular = fem::duffy_rule(12);
    for (e, el) in mesh.elements.iter().enumerate() {
        let c = mesh.corners(e);
        let cen = Point::new((c[0].x + c[1].x + c[2].x) / 3.0, (c[0].y + c[1].y + c[2].y) / 3.0);
        let rad = c.iter().map(|p| p.dist(cen)).fold(0.0, f64::max);
        if a.dist(cen) - rad >= 2.0 * CUTOFF_RADIUS {
            continue;
        }
        let area = mesh.element_area(e);
        let n = mesh.region_index[e];
        let vertex = c.iter().position(|p| p.dist(a) < 1e-12);
        let rule = if vertex.is_some() { &singular } else { &smooth };
        let k = vertex.unwrap_or(0);
        let mut loc = [0.0; 6];
        for &(lr, w) in rule.iter() {
            // Duffy points put the singular vertex first; rotate back.
            let mut l = [0.0; 3];
            for j in 0..3 {
                l[(k + j) % 3] = lr[j];
            }
            let p = Point::new(
                l[0] * c[0].x + l[1] * c[1].x + l[2] * c[2].x,
                l[0] * c[0].y + l[1] * c[1].y + l[2] * c[2].y,
            );
            let f = subtracted_source(omega, n, p.dist(a));
            if f == 0.0 {
                continue;
            }
            let s = fem::shape(l);
            for i in 0..6 {
                loc[i] += w * area * f * s[i];
            }
        }
        for i in 0..6 {
            b[el[i]] += loc[i];
        }
    }
    b
}

/// Checks that `a` is a wall point whose cutoff disk sees only flat wall.
pub fn check_junction(g: &Geometry, a: Point, x_t: f64) -> Result<()> {
    if a.y != 0.0 && a.y != 1.0 {
        return Err(Error::Degenerate(format!("junction {a} is not on a wall")));
    }
    if a.x.abs() + 2.0 * CUTOFF_RADIUS >= x_t {
        return Err(Error::CornerTooClose(format!("junction {a} is within 2 r0 of the truncation")));
    }
    for (k, p) in g.obstacles.iter().enumerate() {
        let d = p.boundary_distance(a);
        if d < 2.0 * CUTOFF_RADIUS || p.contains(a) {
            return Err(Error::CornerTooClose(format!("junction {a} is {d:.3} from obstacle {k}")));
        }
    }
    Ok(())
}

/// Everything the limit formulas need about the unperturbed guide at a set
/// of junction points.
#[derive(Debug, Clone)]
pub struct AsymptoticData {
    pub omega: f64,
    pub junctions: Vec<Point>,
    pub s: SMatrix,
    /// W⁺(A_j), W⁻(A_j).
    pub w_plus: Vec<Complex64>,
    pub w_minus: Vec<Complex64>,
    /// Γ_j.
    pub gamma: Vec<Complex64>,
    /// γ_j(A_k) for j ≠ k (diagonal left at zero).
    pub coupling: Vec<Vec<Complex64>>,
    /// Far-field amplitudes (s₊, s₋) of γ_j: γ_j ≈ s_± e^{iω|x|} as x → ±∞.
    pub far_field: Vec<(Complex64, Complex64)>,
}

/// Solves W⁺, W⁻ and every γ_j on one mesh (graded at the junctions) with a
/// single factorization. Resonators of `g` are ignored.
pub fn compute_asymptotic_data(g: &Geometry, junctions: &[Point], params: &SolverParams) -> Result<AsymptoticData> {
    let base = g.without_resonators();
    let x_t = params.truncation(&base);
    for &a in junctions {
        check_junction(&base, a, x_t)?;
    }
    let mut opts = params.mesh.clone();
    let s_a = (params.h / 4.0).min(CUTOFF_RADIUS / 8.0);
    opts.grading.extend(junctions.iter().map(|&a| (a, s_a)));
    // The subtracted source varies on the scale r₀; resolve its support.
    let s_disk = (params.h / 2.0).min(CUTOFF_RADIUS / 5.0);
    opts.refine_disks.extend(junctions.iter().map(|&a| (a, 2.5 * CUTOFF_RADIUS, s_disk)));
    let mesh = Arc::new(generate_mesh_with(&base, params.h, x_t, &opts)?);
    let sys = HelmholtzSystem::new(mesh.clone(), params.omega, params.n_modes)?;
    let mut rhs = vec![
        sys.incident_rhs(crate::helmholtz::Incidence::Left),
        sys.incident_rhs(crate::helmholtz::Incidence::Right),
    ];
    for &a in junctions {
        rhs.push(subtracted_load(&mesh, params.omega, a));
    }
    let mut sols = sys.solve_many(&rhs)?.into_iter();
    let wrap = |v: Vec<Complex64>, inc| crate::helmholtz::FieldSolution {
        mesh: mesh.clone(),
        values: v,
        incidence: inc,
        omega: params.omega,
        dtn: sys.dtn.clone(),
    };
    let wp = wrap(sols.next().unwrap(), crate::helmholtz::Incidence::Left);
    let wm = wrap(sols.next().unwrap(), crate::helmholtz::Incidence::Right);
    let (r_plus, t_l) = extract_coefficients(&wp);
    let (r_minus, t_r) = extract_coefficients(&wm);
    let s = SMatrix { r_plus, r_minus, t: 0.5 * (t_l + t_r), omega: params.omega, reciprocity_defect: (t_l - t_r).norm() };
    let mut w_plus = Vec::new();
    let mut w_minus = Vec::new();
    let mut gamma = Vec::new();
    let mut far_field = Vec::new();
    let mut tilde = Vec::new();
    for (j, v) in sols.enumerate() {
        let gt = wrap(v, crate::helmholtz::Incidence::Left);
        let a = junctions[j];
        w_plus.push(wp.evaluate(a)?);
        w_minus.push(wm.evaluate(a)?);
        gamma.push(gt.evaluate(a)?);
        let ph = Complex64::from_polar(1.0, -params.omega * x_t);
        far_field.push((
            gt.modal_coefficient(BoundaryTag::RightTruncation, 0) * ph,
            gt.modal_coefficient(BoundaryTag::LeftTruncation, 0) * ph,
        ));
        tilde.push(gt);
    }
    let nj = junctions.len();
    let mut coupling = vec![vec![Complex64::new(0.0, 0.0); nj]; nj];
    for j in 0..nj {
        for k in 0..nj {
            if j != k {
                let r = junctions[j].dist(junctions[k]);
                coupling[j][k] = cutoff(r).0 * log_kernel(r) + tilde[j].evaluate(junctions[k])?;
            }
        }
    }
    Ok(AsymptoticData { omega: params.omega, junctions: junctions.to_vec(), s, w_plus, w_minus, gamma, coupling, far_field })
}

/// Γ at one junction point.
pub fn compute_green_constant(g: &Geometry, a: Point, params: &SolverParams) -> Result<Complex64> {
    Ok(compute_asymptotic_data(g, &[a], params)?.gamma[0])
}

/// Γ̃ = γ₁(A₂).
pub fn compute_coupling(g: &Geometry, a1: Point, a2: Point, params: &SolverParams) -> Result<Complex64> {
    if a1.dist(a2) < 1e-12 {
        return Err(Error::Degenerate("coupling needs two distinct junctions".into()));
    }
    Ok(compute_asymptotic_data(g, &[a1, a2], params)?.coupling[0][1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_is_smooth_at_both_ends() {
        let r0 = CUTOFF_RADIUS;
        let (a, a1, a2) = cutoff(r0 * (1.0 + 1e-9));
        assert!((a - 1.0).abs() < 1e-12 && a1.abs() < 1e-6 && a2.abs() < 1e-3);
        let (b, b1, b2) = cutoff(2.0 * r0 * (1.0 - 1e-9));
        assert!(b.abs() < 1e-12 && b1.abs() < 1e-6 && b2.abs() < 1e-3);
        // Finite-difference check of the derivatives mid-annulus.
        let r = 1.37 * r0;
        let d = 1e-6;
        let fd1 = (cutoff(r + d).0 - cutoff(r - d).0) / (2.0 * d);
        let fd2 = (cutoff(r + d).1 - cutoff(r - d).1) / (2.0 * d);
        assert!((fd1 - cutoff(r).1).abs() < 1e-5);
        assert!((fd2 - cutoff(r).2).abs() < 1e-3);
    }

    #[test]
    fn composite_rule_weights_sum_to_one() {
        let s: f64 = composite_rule(2).iter().map(|p| p.1).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn junction_checks() {
        let g = Geometry::bare_strip(1.0);
        assert!(check_junction(&g, Point::new(0.0, 1.0), 3.0).is_ok());
        assert!(matches!(check_junction(&g, Point::new(0.0, 0.5), 3.0), Err(Error::Degenerate(_))));
        let tri = crate::geometry::Polygon::from_coords(&[(-0.3, 0.0), (0.3, 0.0), (0.0, 0.4)]).unwrap();
        let g = crate::geometry::make_geometry(1.0, vec![tri], vec![]).unwrap();
        assert!(matches!(check_junction(&g, Point::new(0.4, 0.0), 3.0), Err(Error::CornerTooClose(_))));
        assert!(check_junction(&g, Point::new(0.4, 1.0), 3.0).is_ok());
    }
}
