//! Helmholtz problem Δu + ω²nu = 0 in the truncated strip with Neumann walls
//! and modal Dirichlet-to-Neumann conditions on both truncation lines.

pub mod fem;

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Point};
use crate::mesh::{generate_half_mesh, generate_mesh_with, BoundaryTag, Mesh, MeshOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Axial wavenumbers of the transverse modes used in the DtN sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DtnSpec {
    pub n_modes: usize,
    pub betas: Vec<Complex64>,
}

/// β_0 = ω and β_k = i√(k²π² − ω²) for k = 1..N-1.
pub fn dtn_coefficients(omega: f64, n_modes: usize) -> DtnSpec {
    assert!(omega > 0.0 && omega < PI, "omega must lie in (0, pi)");
    assert!(n_modes >= 1);
    let betas = (0..n_modes)
        .map(|k| {
            if k == 0 {
                Complex64::new(omega, 0.0)
            } else {
                let kp = k as f64 * PI;
                Complex64::new(0.0, (kp * kp - omega * omega).sqrt())
            }
        })
        .collect();
    DtnSpec { n_modes, betas }
}

/// Orthonormal transverse mode on (0, 1): 1, √2 cos(kπy).
pub fn transverse_mode(k: usize, y: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        SQRT_2 * (k as f64 * PI * y).cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incidence {
    Left,
    Right,
}

/// Condition imposed on the symmetry cut of a half-guide mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutCondition {
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone)]
pub struct SolverParams {
    pub h: f64,
    /// Truncation abscissa; `None` means d + 2.
    pub x_t: Option<f64>,
    pub n_modes: usize,
    pub omega: f64,
    pub mesh: MeshOptions,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { h: 0.05, x_t: None, n_modes: 15, omega: 0.8 * PI, mesh: MeshOptions::default() }
    }
}

impl SolverParams {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn truncation(&self, g: &Geometry) -> f64 {
        self.x_t.unwrap_or(g.d + 2.0)
    }
}

/// Sparse vector ∫_Γ ψ_i φ_k over the edges carrying `tag`, for each mode k.
/// Mode 0 uses 4-point Gauss per edge, higher modes 8-point.
pub fn boundary_projections(mesh: &Mesh, tag: BoundaryTag, n_modes: usize) -> Vec<Vec<(usize, f64)>> {
    let edges = mesh.edges_tagged(tag);
    let g4 = fem::gauss_legendre(4);
    let g8 = fem::gauss_legendre(8);
    (0..n_modes)
        .map(|k| {
            let rule = if k == 0 { &g4 } else { &g8 };
            let mut acc: Vec<(usize, f64)> = Vec::new();
            for e in &edges {
                let a = mesh.nodes[e.nodes[0]];
                let b = mesh.nodes[e.nodes[1]];
                let len = a.dist(b);
                let mut loc = [0.0; 3];
                for &(t, w) in rule.iter() {
                    let y = a.y + (b.y - a.y) * t;
                    let s = fem::edge_shape(t);
                    let phi = transverse_mode(k, y);
                    for j in 0..3 {
                        loc[j] += w * len * phi * s[j];
                    }
                }
                for j in 0..3 {
                    acc.push((e.nodes[j], loc[j]));
                }
            }
            acc.sort_by_key(|&(i, _)| i);
            let mut out: Vec<(usize, f64)> = Vec::with_capacity(acc.len());
            for (i, v) in acc {
                match out.last_mut() {
                    Some(last) if last.0 == i => last.1 += v,
                    _ => out.push((i, v)),
                }
            }
            out
        })
        .collect()
}

fn dot(p: &[(usize, f64)], u: &[Complex64]) -> Complex64 {
    p.iter().map(|&(i, w)| u[i] * w).sum()
}

/// Assembled and factorized discrete Helmholtz operator on one mesh.
pub struct HelmholtzSystem {
    pub mesh: Arc<Mesh>,
    pub omega: f64,
    pub dtn: DtnSpec,
    matrix: SparseColMat<usize, Complex64>,
    lu: Lu<usize, Complex64>,
    left: Vec<Vec<(usize, f64)>>,
    right: Vec<Vec<(usize, f64)>>,
    dirichlet: Vec<bool>,
}

impl HelmholtzSystem {
    pub fn new(mesh: Arc<Mesh>, omega: f64, n_modes: usize) -> Result<HelmholtzSystem> {
        Self::with_cut(mesh, omega, n_modes, CutCondition::Neumann)
    }

    /// Assembles and factorizes; `cut` only matters for meshes with a cut boundary.
    pub fn with_cut(mesh: Arc<Mesh>, omega: f64, n_modes: usize, cut: CutCondition) -> Result<HelmholtzSystem> {
        let dtn = dtn_coefficients(omega, n_modes);
        let n = mesh.n_nodes();
        let w2 = omega * omega;
        let mut trip: Vec<Triplet<usize, usize, Complex64>> = Vec::with_capacity(36 * mesh.elements.len());
        for (e, el) in mesh.elements.iter().enumerate() {
            let (k, m) = fem::element_matrices(mesh.corners(e));
            let nidx = mesh.region_index[e];
            for i in 0..6 {
                for j in 0..6 {
                    let v = k[i][j] - w2 * nidx * m[i][j];
                    trip.push(Triplet::new(el[i], el[j], Complex64::new(v, 0.0)));
                }
            }
        }
        let left = boundary_projections(&mesh, BoundaryTag::LeftTruncation, n_modes);
        let right = boundary_projections(&mesh, BoundaryTag::RightTruncation, n_modes);
        for proj in [&left, &right] {
            for (k, p) in proj.iter().enumerate() {
                let c = -I * dtn.betas[k];
                for &(i, wi) in p {
                    for &(j, wj) in p {
                        trip.push(Triplet::new(i, j, c * (wi * wj)));
                    }
                }
            }
        }
        let mut dirichlet = vec![false; n];
        if cut == CutCondition::Dirichlet {
            for i in mesh.nodes_tagged(BoundaryTag::Cut) {
                dirichlet[i] = true;
            }
            trip.retain(|t| !dirichlet[t.row] && !dirichlet[t.col]);
            for (i, &d) in dirichlet.iter().enumerate() {
                if d {
                    trip.push(Triplet::new(i, i, Complex64::new(1.0, 0.0)));
                }
            }
        }
        let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::SingularSystem(format!("matrix construction failed: {e:?}")))?;
        let lu = matrix.sp_lu().map_err(|e| Error::SingularSystem(format!("factorization failed: {e:?}")))?;
        Ok(HelmholtzSystem { mesh, omega, dtn, matrix, lu, left, right, dirichlet })
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.n_nodes()
    }

    /// Projection vectors ∫ψ_i φ_k on the left or right truncation line.
    pub fn projections(&self, tag: BoundaryTag) -> &[Vec<(usize, f64)>] {
        match tag {
            BoundaryTag::LeftTruncation => &self.left,
            BoundaryTag::RightTruncation => &self.right,
            _ => &[],
        }
    }

    /// Load vector of the incoming mode e^{±iωx} entering through one truncation line.
    pub fn incident_rhs(&self, inc: Incidence) -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); self.n_dofs()];
        let (proj, x) = match inc {
            Incidence::Left => (&self.left, self.mesh.x_left),
            Incidence::Right => (&self.right, self.mesh.x_right),
        };
        if proj.is_empty() {
            return b;
        }
        // Incident trace at the boundary is e^{-iω|x|} in both cases.
        let amp = -2.0 * I * self.omega * Complex64::from_polar(1.0, -self.omega * x.abs());
        for &(i, w) in &proj[0] {
            b[i] += amp * w;
        }
        b
    }

    /// Solves for several right-hand sides with the stored factorization.
    pub fn solve_many(&self, rhs: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
        let n = self.n_dofs();
        let mut b = Mat::<Complex64>::zeros(n, rhs.len());
        for (c, r) in rhs.iter().enumerate() {
            assert_eq!(r.len(), n);
            for i in 0..n {
                b[(i, c)] = if self.dirichlet[i] { Complex64::new(0.0, 0.0) } else { r[i] };
            }
        }
        let x = self.lu.solve(&b);
        let mut out = Vec::with_capacity(rhs.len());
        for c in 0..rhs.len() {
            let sol: Vec<Complex64> = (0..n).map(|i| x[(i, c)]).collect();
            if sol.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::SingularSystem("non-finite solution".into()));
            }
            let bc: Vec<Complex64> = (0..n).map(|i| b[(i, c)]).collect();
            let res = self.residual(&sol, &bc);
            let scale = bc.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            if res > 1e-6 * scale {
                return Err(Error::SingularSystem(format!("relative residual {:.3e}", res / scale)));
            }
            out.push(sol);
        }
        Ok(out)
    }

    pub fn solve_rhs(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.solve_many(&[rhs.to_vec()])?.pop().unwrap())
    }

    fn residual(&self, x: &[Complex64], b: &[Complex64]) -> f64 {
        let mut r = b.to_vec();
        for t in self.matrix.triplet_iter() {
            r[t.row] -= *t.val * x[t.col];
        }
        r.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn solve(&self, inc: Incidence) -> Result<FieldSolution> {
        let u = self.solve_rhs(&self.incident_rhs(inc))?;
        Ok(self.wrap(u, inc))
    }

    /// Left and right incidence from a single factorization.
    pub fn solve_both(&self) -> Result<(FieldSolution, FieldSolution)> {
        let mut s = self.solve_many(&[self.incident_rhs(Incidence::Left), self.incident_rhs(Incidence::Right)])?;
        let r = s.pop().unwrap();
        let l = s.pop().unwrap();
        Ok((self.wrap(l, Incidence::Left), self.wrap(r, Incidence::Right)))
    }

    fn wrap(&self, values: Vec<Complex64>, incidence: Incidence) -> FieldSolution {
        FieldSolution { mesh: self.mesh.clone(), values, incidence, omega: self.omega, dtn: self.dtn.clone() }
    }

    /// Largest entrywise difference between the matrix and its (unconjugated) transpose.
    pub fn asymmetry(&self) -> f64 {
        let mut entries = std::collections::HashMap::new();
        for t in self.matrix.triplet_iter() {
            *entries.entry((t.row, t.col)).or_insert(Complex64::new(0.0, 0.0)) += *t.val;
        }
        let mut worst: f64 = 0.0;
        for (&(i, j), &v) in &entries {
            let w = entries.get(&(j, i)).copied().unwrap_or_default();
            worst = worst.max((v - w).norm());
        }
        worst
    }

    /// Applies the assembled matrix to `x` (used for consistency checks).
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        for t in self.matrix.triplet_iter() {
            y[t.row] += *t.val * x[t.col];
        }
        y
    }
}

/// Meshes the geometry and factorizes the operator.
pub fn build_system(g: &Geometry, params: &SolverParams) -> Result<HelmholtzSystem> {
    let mesh = generate_mesh_with(g, params.h, params.truncation(g), &params.mesh)?;
    HelmholtzSystem::new(Arc::new(mesh), params.omega, params.n_modes)
}

/// Half-guide system on {x < 0} with the given condition on the cut x = 0.
pub fn build_half_system(g: &Geometry, params: &SolverParams, cut: CutCondition) -> Result<HelmholtzSystem> {
    let mesh = generate_half_mesh(g, params.h, params.truncation(g), &params.mesh)?;
    HelmholtzSystem::with_cut(Arc::new(mesh), params.omega, params.n_modes, cut)
}

pub fn solve_scattering(g: &Geometry, params: &SolverParams, inc: Incidence) -> Result<FieldSolution> {
    build_system(g, params)?.solve(inc)
}

/// Discrete total field for one incidence.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub mesh: Arc<Mesh>,
    pub values: Vec<Complex64>,
    pub incidence: Incidence,
    pub omega: f64,
    pub dtn: DtnSpec,
}

impl FieldSolution {
    pub fn evaluate(&self, p: Point) -> Result<Complex64> {
        evaluate_field(self, p)
    }

    /// ∫ u φ_k dy along a truncation line, same quadrature as assembly.
    pub fn modal_coefficient(&self, tag: BoundaryTag, k: usize) -> Complex64 {
        let proj = boundary_projections(&self.mesh, tag, k + 1);
        dot(&proj[k], &self.values)
    }

    /// CSV (x, y, re, im) on an nx × ny grid over the truncated bounding box;
    /// grid points outside the domain are skipped.
    pub fn sample_csv(&self, nx: usize, ny: usize) -> String {
        let mut s = String::from("x,y,re,im\n");
        for (p, v) in self.sample_grid(nx, ny) {
            if let Some(v) = v {
                let _ = writeln!(s, "{:.17e},{:.17e},{:.17e},{:.17e}", p.x, p.y, v.re, v.im);
            }
        }
        s
    }

    /// Binary grayscale PGM of Re u; points outside the domain are black.
    pub fn heatmap_pgm(&self, nx: usize, ny: usize) -> Vec<u8> {
        let grid = self.sample_grid(nx, ny);
        let vmax = grid.iter().filter_map(|(_, v)| v.map(|v| v.re.abs())).fold(0.0, f64::max).max(1e-300);
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        // Image rows run from top (largest y) to bottom.
        for r in (0..ny).rev() {
            for c in 0..nx {
                let v = grid[r * nx + c].1;
                let px = match v {
                    Some(v) => (1.0 + 127.0 * (1.0 + v.re / vmax)).round().min(255.0) as u8,
                    None => 0,
                };
                out.push(px);
            }
        }
        out
    }

    fn sample_grid(&self, nx: usize, ny: usize) -> Vec<(Point, Option<Complex64>)> {
        let (x0, x1) = (self.mesh.x_left, self.mesh.x_right);
        let (y0, y1) = self
            .mesh
            .nodes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.y), b.max(p.y)));
        let mut out = Vec::with_capacity(nx * ny);
        for r in 0..ny {
            for c in 0..nx {
                let x = x0 + (x1 - x0) * c as f64 / (nx.max(2) - 1) as f64;
                let y = y0 + (y1 - y0) * r as f64 / (ny.max(2) - 1) as f64;
                let p = Point::new(x, y);
                out.push((p, evaluate_field(self, p).ok()));
            }
        }
        out
    }
}

/// Quadratic interpolation of the nodal values at `p`.
pub fn evaluate_field(sol: &FieldSolution, p: Point) -> Result<Complex64> {
    let (e, l) = sol.mesh.locate(p).ok_or(Error::OutsideDomain(p.x, p.y))?;
    let s = fem::shape(l);
    let el = sol.mesh.elements[e];
    Ok((0..6).map(|i| sol.values[el[i]] * s[i]).sum())
}
