//! Quadratic (6-node) Lagrange triangle: shape functions, quadrature and
//! element matrices.

use crate::geometry::{orient, Point};

/// Symmetric 6-point rule exact for degree 4 (barycentric point, weight
/// relative to the triangle area).
pub const TRI_RULE: [([f64; 3], f64); 6] = {
    const A1: f64 = 0.445948490915965;
    const B1: f64 = 1.0 - 2.0 * A1;
    const W1: f64 = 0.223381589678011;
    const A2: f64 = 0.091576213509771;
    const B2: f64 = 1.0 - 2.0 * A2;
    const W2: f64 = 0.109951743655322;
    [
        ([A1, A1, B1], W1),
        ([A1, B1, A1], W1),
        ([B1, A1, A1], W1),
        ([A2, A2, B2], W2),
        ([A2, B2, A2], W2),
        ([B2, A2, A2], W2),
    ]
};

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // Newton iteration on Legendre polynomials, mapped from [-1, 1].
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Values of the six shape functions at barycentric coordinates `l`.
pub fn shape(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// Gradients of the barycentric coordinates and twice the signed area.
pub fn bary_gradients(c: [Point; 3]) -> ([[f64; 2]; 3], f64) {
    let two_a = orient(c[0], c[1], c[2]);
    let g = [
        [(c[1].y - c[2].y) / two_a, (c[2].x - c[1].x) / two_a],
        [(c[2].y - c[0].y) / two_a, (c[0].x - c[2].x) / two_a],
        [(c[0].y - c[1].y) / two_a, (c[1].x - c[0].x) / two_a],
    ];
    (g, two_a)
}

pub fn shape_gradients(l: [f64; 3], gl: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for d in 0..2 {
        out[0][d] = (4.0 * l[0] - 1.0) * gl[0][d];
        out[1][d] = (4.0 * l[1] - 1.0) * gl[1][d];
        out[2][d] = (4.0 * l[2] - 1.0) * gl[2][d];
        out[3][d] = 4.0 * (l[0] * gl[1][d] + l[1] * gl[0][d]);
        out[4][d] = 4.0 * (l[1] * gl[2][d] + l[2] * gl[1][d]);
        out[5][d] = 4.0 * (l[2] * gl[0][d] + l[0] * gl[2][d]);
    }
    out
}

/// Stiffness and mass matrices of a straight-sided quadratic triangle.
pub fn element_matrices(c: [Point; 3]) -> ([[f64; 6]; 6], [[f64; 6]; 6]) {
    let (gl, two_a) = bary_gradients(c);
    let area = 0.5 * two_a.abs();
    let mut k = [[0.0; 6]; 6];
    let mut m = [[0.0; 6]; 6];
    for (l, w) in TRI_RULE {
        let n = shape(l);
        let dn = shape_gradients(l, &gl);
        let wa = w * area;
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += wa * (dn[i][0] * dn[j][0] + dn[i][1] * dn[j][1]);
                m[i][j] += wa * n[i] * n[j];
            }
        }
    }
    (k, m)
}

/// Quadratic edge shape functions for nodes (start, end, midpoint) at t in [0, 1].
pub fn edge_shape(t: f64) -> [f64; 3] {
    [(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)]
}

/// Quadrature on a triangle with a weakly singular vertex: the collapsed
/// (Duffy) map from the unit square makes the Jacobian vanish at `c[0]`.
/// Returns (barycentric point, weight relative to the triangle area).
pub fn duffy_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let g = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for &(u, wu) in &g {
        for &(v, wv) in &g {
            // x = c0 + u (c1 - c0) + u v (c2 - c1)
            let l1 = u * (1.0 - v);
            let l2 = u * v;
            out.push(([1.0 - l1 - l2, l1, l2], 2.0 * u * wu * wv));
        }
    }
    out
}
