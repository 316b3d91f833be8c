//! The junction profile constant C_Ξ.
//!
//! Y¹ is harmonic in the half-plane {ξ_y < 0} joined to the semi-strip
//! {|ξ_x| < 1/2, ξ_y ≥ 0}, with Neumann walls, Y¹ = ξ_y + C_Ξ + o(1) up the
//! strip and Y¹ = π⁻¹ ln(1/|ξ|) + O(1/|ξ|) in the half-plane. On the truncated
//! domain (half-disk of radius ρ, strip of height H) the growth in the strip is
//! imposed as a unit flux through the top and the logarithmic behavior as the
//! Robin condition ∂_r Y = Y/(ρ ln ρ) on the arc.

use std::fmt::Write as _;
use std::path::Path;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::helmholtz::fem;
use crate::mesh::triangulate::{triangulate, Pslg};
use crate::mesh::{mesh_from_triangles, point_in_loop, Mesh};

/// Truncations used for the extrapolation: (ρ, H) = (10,10), (20,20), (40,40).
pub const PROFILE_TRUNCATIONS: [f64; 3] = [10.0, 20.0, 40.0];

/// Default mesh size at the two re-entrant corners.
pub const PROFILE_CORNER_SIZE: f64 = 0.0005;

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileConstant {
    /// Richardson-extrapolated value.
    pub value: f64,
    /// Imaginary part of the computed constant (the solve runs in complex arithmetic).
    pub imag: f64,
    /// (ρ, H, C) per truncation.
    pub table: Vec<(f64, f64, f64)>,
    /// Extrapolation from the two coarser truncations.
    pub coarse_value: f64,
}

fn profile_mesh(rho: f64, height: f64, h0: f64) -> Result<(Mesh, Vec<Point>)> {
    let corners = [Point::new(-0.5, 0.0), Point::new(0.5, 0.0)];
    let size = move |z: Point| -> f64 {
        let d = corners.iter().map(|c| z.dist(*c)).fold(f64::INFINITY, f64::min);
        let g = h0 + 0.05 * d;
        if z.y > 0.0 {
            g.min(0.1)
        } else {
            g.min(0.02 * rho)
        }
    };
    let mut pslg = Pslg::default();
    // Boundary loop, counterclockwise: right wall, arc, left wall, strip.
    let mut boundary: Vec<Point> = Vec::new();
    let push = |pslg: &mut Pslg, a: Point, b: Point, pts: Vec<Point>, boundary: &mut Vec<Point>| {
        pslg.chain(a, &pts, b);
        boundary.push(a);
        boundary.extend(pts);
    };
    let seg = |a: Point, b: Point| crate::mesh::triangulate::subdivide(a, b, &size);
    let (c0, c1) = (corners[0], corners[1]);
    let top_r = Point::new(0.5, height);
    let top_l = Point::new(-0.5, height);
    let wall_r = Point::new(rho, 0.0);
    let wall_l = Point::new(-rho, 0.0);
    push(&mut pslg, top_r, c1, seg(top_r, c1), &mut boundary);
    push(&mut pslg, c1, wall_r, seg(c1, wall_r), &mut boundary);
    let n_arc = (std::f64::consts::PI / 0.01).ceil() as usize;
    let arc: Vec<Point> = (1..n_arc)
        .map(|k| {
            let th = -std::f64::consts::PI * k as f64 / n_arc as f64;
            Point::new(rho * th.cos(), rho * th.sin())
        })
        .collect();
    push(&mut pslg, wall_r, wall_l, arc, &mut boundary);
    push(&mut pslg, wall_l, c0, seg(wall_l, c0), &mut boundary);
    push(&mut pslg, c0, top_l, seg(c0, top_l), &mut boundary);
    push(&mut pslg, top_l, top_r, seg(top_l, top_r), &mut boundary);
    // Interior points on semicircles with geometrically growing radii keep
    // the element size proportional to the distance from the junction.
    let ratio = 0.04;
    let mut r = 1.0;
    while r * (1.0 + 0.5 * ratio) < rho {
        let n = (std::f64::consts::PI / ratio).ceil() as usize;
        for k in 1..n {
            let th = -std::f64::consts::PI * k as f64 / n as f64;
            pslg.point(Point::new(r * th.cos(), r * th.sin()));
        }
        r *= 1.0 + ratio;
    }
    // Clockwise as built (right side down first); orientation is irrelevant
    // for the even-odd test below.
    let tri = triangulate(&pslg, (0.05 * rho).powi(2), 25.0)?;
    let triangles: Vec<[usize; 3]> = tri
        .triangles
        .into_iter()
        .filter(|t| {
            let [a, b, c] = t.map(|i| tri.points[i]);
            point_in_loop(&boundary, Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0))
        })
        .collect();
    Ok((mesh_from_triangles(tri.points, triangles), boundary))
}

/// C on one truncated domain: ∫_top Y − H.
pub fn profile_constant_truncated(rho: f64, height: f64, h0: f64) -> Result<Complex64> {
    let (mesh, _) = profile_mesh(rho, height, h0)?;
    let n = mesh.n_nodes();
    let mut trip: Vec<Triplet<usize, usize, Complex64>> = Vec::with_capacity(36 * mesh.elements.len());
    for (e, el) in mesh.elements.iter().enumerate() {
        let (k, _) = fem::element_matrices(mesh.corners(e));
        for i in 0..6 {
            for j in 0..6 {
                trip.push(Triplet::new(el[i], el[j], Complex64::new(k[i][j], 0.0)));
            }
        }
    }
    let alpha = 1.0 / (rho * rho.ln());
    let gauss = fem::gauss_legendre(4);
    let mut load = vec![0.0; n];
    for e in &mesh.boundary {
        let (a, b) = (mesh.nodes[e.nodes[0]], mesh.nodes[e.nodes[1]]);
        let len = a.dist(b);
        // Refinement may split arc chords, so classify by position: every
        // boundary edge below the wall line lies on the arc.
        let arc = a.y.max(b.y) <= 0.0 && a.y.min(b.y) < 0.0;
        let top = a.y == height && b.y == height;
        let mut mass = [[0.0; 3]; 3];
        let mut ones = [0.0; 3];
        for &(t, w) in &gauss {
            let s = fem::edge_shape(t);
            for i in 0..3 {
                ones[i] += w * len * s[i];
                for j in 0..3 {
                    mass[i][j] += w * len * s[i] * s[j];
                }
            }
        }
        if arc {
            for i in 0..3 {
                for j in 0..3 {
                    trip.push(Triplet::new(e.nodes[i], e.nodes[j], Complex64::new(-alpha * mass[i][j], 0.0)));
                }
            }
        }
        if top {
            for i in 0..3 {
                load[e.nodes[i]] += ones[i];
            }
        }
    }
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::SingularSystem(format!("profile matrix: {e:?}")))?;
    let lu = a.sp_lu().map_err(|e| Error::SingularSystem(format!("profile factorization: {e:?}")))?;
    let mut b = Mat::<Complex64>::zeros(n, 1);
    for i in 0..n {
        b[(i, 0)] = Complex64::new(load[i], 0.0);
    }
    let y = lu.solve(&b);
    let flux_avg: Complex64 = (0..n).map(|i| y[(i, 0)] * load[i]).sum();
    if !flux_avg.re.is_finite() {
        return Err(Error::SingularSystem("profile solution is not finite".into()));
    }
    Ok(flux_avg - height)
}

/// C_Ξ from the three truncations, Richardson-extrapolated assuming an
/// O(ρ⁻²) truncation error.
pub fn compute_profile_constant(h0: f64) -> Result<ProfileConstant> {
    let mut table = Vec::new();
    let mut imag: f64 = 0.0;
    for &r in &PROFILE_TRUNCATIONS {
        let c = profile_constant_truncated(r, r, h0)?;
        log::info!("profile constant rho = H = {r}: {:.10}", c.re);
        imag = imag.max(c.im.abs());
        table.push((r, r, c.re));
    }
    let rich = |c1: f64, c2: f64| (4.0 * c2 - c1) / 3.0;
    let value = rich(table[1].2, table[2].2);
    let coarse_value = rich(table[0].2, table[1].2);
    if (value - coarse_value).abs() > 5e-4 {
        return Err(Error::NoConvergence(format!(
            "profile constant extrapolations {coarse_value:.6} and {value:.6} disagree in the third digit"
        )));
    }
    Ok(ProfileConstant { value, imag, table, coarse_value })
}

impl ProfileConstant {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "C_Xi={:.17e}", self.value);
        let _ = writeln!(s, "C_Xi_im={:.17e}", self.imag);
        let _ = writeln!(s, "C_Xi_coarse={:.17e}", self.coarse_value);
        let _ = writeln!(s, "# rho H C");
        for (r, h, c) in &self.table {
            let _ = writeln!(s, "{r} {h} {c:.17e}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<ProfileConstant> {
        let mut value = None;
        let mut imag = 0.0;
        let mut coarse_value = f64::NAN;
        let mut table = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Config { line: ln + 1, msg: msg.to_string() };
            if let Some((k, v)) = line.split_once('=') {
                let v: f64 = v.trim().parse().map_err(|_| bad("not a number"))?;
                match k.trim() {
                    "C_Xi" => value = Some(v),
                    "C_Xi_im" => imag = v,
                    "C_Xi_coarse" => coarse_value = v,
                    _ => {}
                }
            } else {
                let f: Vec<f64> = line.split_whitespace().map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad("bad table row"))?;
                if f.len() != 3 {
                    return Err(bad("table rows need rho H C"));
                }
                table.push((f[0], f[1], f[2]));
            }
        }
        let value = value.ok_or(Error::Config { line: 0, msg: "missing C_Xi".into() })?;
        Ok(ProfileConstant { value, imag, table, coarse_value })
    }
}

/// Reads the cached constant, computing and writing it if the file is absent.
pub fn load_or_compute_profile_constant(path: &Path) -> Result<ProfileConstant> {
    if let Ok(text) = std::fs::read_to_string(path) {
        return ProfileConstant::parse(&text);
    }
    let c = compute_profile_constant(PROFILE_CORNER_SIZE)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, c.to_text())?;
    Ok(c)
}

/// Cache location inside the source tree.
pub fn default_constants_path() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../results/constants.txt")
}
