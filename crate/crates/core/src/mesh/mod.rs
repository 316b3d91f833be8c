//! Conforming quadratic triangle meshes of the truncated waveguide domain.
//!
//! The strip part is triangulated by constrained Delaunay refinement with the
//! boundary graded toward resonator junctions; resonator interiors are
//! structured strips glued to the foot vertices of the strip mesh.

pub mod triangulate;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{orient, point_segment_distance, Geometry, Point, Polygon, Resonator, Wall, GEOM_TOL};
use triangulate::{triangulate, Pslg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Wall,
    LeftTruncation,
    RightTruncation,
    /// Symmetry cut x = 0 of a half-guide mesh.
    Cut,
}

impl BoundaryTag {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Wall => "wall",
            BoundaryTag::LeftTruncation => "left_truncation",
            BoundaryTag::RightTruncation => "right_truncation",
            BoundaryTag::Cut => "cut",
        }
    }
}

/// Boundary edge of a quadratic mesh: end nodes and midpoint node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 3],
    pub tag: BoundaryTag,
}

/// Mesh of 6-node triangles: corners 0..3 counterclockwise, then the
/// midpoints of edges (0,1), (1,2), (2,0).
#[derive(Debug)]
pub struct Mesh {
    pub nodes: Vec<Point>,
    /// Nodes `0..n_vertices` are triangle corners, the rest are edge midpoints.
    pub n_vertices: usize,
    pub elements: Vec<[usize; 6]>,
    /// Refractive index per element.
    pub region_index: Vec<f64>,
    /// Resonator containing the element, if any.
    pub resonator_of: Vec<Option<usize>>,
    pub boundary: Vec<BoundaryEdge>,
    pub x_left: f64,
    pub x_right: f64,
    locator: OnceLock<Locator>,
}

#[derive(Debug, Clone)]
pub struct MeshOptions {
    /// Mesh size at resonator foot corners; defaults to min(eps/40, h/4). The
    /// resonance position is sensitive to the corner resolution.
    pub junction_size: Option<f64>,
    /// Additional grading centers (point, local size).
    pub grading: Vec<(Point, f64)>,
    /// Angle bound for Delaunay refinement of the strip part.
    pub refine_angle_deg: f64,
    /// Disks (center, radius, size) seeded with interior points of the given spacing.
    pub refine_disks: Vec<(Point, f64, f64)>,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions { junction_size: None, grading: vec![], refine_angle_deg: 25.0, refine_disks: vec![] }
    }
}

/// Smallest angle allowed outside resonators.
pub const MIN_ANGLE_DEG: f64 = 15.0;

/// Growth of the local mesh size with distance from a grading center
/// (sizes grow by a factor of about 1.5 from one element to the next).
const GRADING_SLOPE: f64 = 0.5;

pub fn generate_mesh(g: &Geometry, h: f64, x_t: f64) -> Result<Mesh> {
    generate_mesh_with(g, h, x_t, &MeshOptions::default())
}

/// Mesh of the domain truncated to |x| < x_t. Fully symmetric geometries get a
/// mirror-symmetric mesh built from the left half.
pub fn generate_mesh_with(g: &Geometry, h: f64, x_t: f64, opts: &MeshOptions) -> Result<Mesh> {
    check_preconditions(g, h, x_t)?;
    let lin = if g.fully_symmetric() && opts.grading.iter().all(|(p, _)| p.x == 0.0) {
        let half = linear_mesh(g, h, -x_t, 0.0, opts)?;
        mirror(g, &half)
    } else {
        linear_mesh(g, h, -x_t, x_t, opts)?
    };
    let mesh = quadratic(lin, -x_t, x_t, BoundaryTag::RightTruncation);
    check_area(&mesh, domain_area(g, -x_t, x_t))?;
    Ok(mesh)
}

/// Mesh of the left half {x < 0} of a symmetric geometry, with the cut tagged.
pub fn generate_half_mesh(g: &Geometry, h: f64, x_t: f64, opts: &MeshOptions) -> Result<Mesh> {
    check_preconditions(g, h, x_t)?;
    if !g.fully_symmetric() {
        return Err(Error::NotSymmetric("half-guide mesh needs a mirror-symmetric geometry".into()));
    }
    let lin = linear_mesh(g, h, -x_t, 0.0, opts)?;
    let mesh = quadratic(lin, -x_t, 0.0, BoundaryTag::Cut);
    check_area(&mesh, domain_area(g, -x_t, 0.0))?;
    Ok(mesh)
}

fn check_preconditions(g: &Geometry, h: f64, x_t: f64) -> Result<()> {
    if !(h > 0.0 && h <= 0.1 + 1e-12) {
        return Err(Error::MeshFailure(format!("mesh size h = {h} must lie in (0, 0.1]")));
    }
    if !(x_t > g.d + 1.0) {
        return Err(Error::MeshFailure(format!("truncation X_t = {x_t} must exceed d + 1 = {}", g.d + 1.0)));
    }
    Ok(())
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn corners(&self, e: usize) -> [Point; 3] {
        let el = &self.elements[e];
        [self.nodes[el[0]], self.nodes[el[1]], self.nodes[el[2]]]
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [a, b, c] = self.corners(e);
        0.5 * orient(a, b, c)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Smallest interior angle (degrees) among elements outside resonators.
    pub fn min_angle_outside_resonators(&self) -> f64 {
        (0..self.elements.len())
            .filter(|&e| self.resonator_of[e].is_none())
            .map(|e| min_angle_deg(self.corners(e)))
            .fold(180.0, f64::min)
    }

    /// Boundary edges carrying `tag`, ordered by increasing y then x.
    pub fn edges_tagged(&self, tag: BoundaryTag) -> Vec<BoundaryEdge> {
        let mut v: Vec<BoundaryEdge> = self.boundary.iter().copied().filter(|b| b.tag == tag).collect();
        v.sort_by(|a, b| {
            let pa = self.nodes[a.nodes[2]];
            let pb = self.nodes[b.nodes[2]];
            pa.y.total_cmp(&pb.y).then(pa.x.total_cmp(&pb.x))
        });
        v
    }

    /// Nodes lying on edges with the given tag (sorted, unique).
    pub fn nodes_tagged(&self, tag: BoundaryTag) -> Vec<usize> {
        let mut v: Vec<usize> =
            self.boundary.iter().filter(|b| b.tag == tag).flat_map(|b| b.nodes).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Element containing `p` and the barycentric coordinates of `p` in it.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        self.locator.get_or_init(|| Locator::new(self)).find(self, p)
    }

    /// Plain-text dump: a header, then `node`, `element` and `edge` records.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# quadratic triangle mesh");
        let _ = writeln!(s, "# node <id> <x> <y>");
        let _ = writeln!(s, "# element <id> <n0> <n1> <n2> <m01> <m12> <m20> <index> <resonator|->");
        let _ = writeln!(s, "# edge <a> <b> <mid> <tag>");
        let _ = writeln!(
            s,
            "counts nodes={} vertices={} elements={} boundary_edges={}",
            self.nodes.len(),
            self.n_vertices,
            self.elements.len(),
            self.boundary.len()
        );
        for (i, p) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "node {i} {:.17e} {:.17e}", p.x, p.y);
        }
        for (i, el) in self.elements.iter().enumerate() {
            let res = self.resonator_of[i].map_or("-".to_string(), |r| r.to_string());
            let _ = writeln!(
                s,
                "element {i} {} {} {} {} {} {} {} {res}",
                el[0], el[1], el[2], el[3], el[4], el[5], self.region_index[i]
            );
        }
        for b in &self.boundary {
            let _ = writeln!(s, "edge {} {} {} {}", b.nodes[0], b.nodes[1], b.nodes[2], b.tag.name());
        }
        s
    }
}

fn min_angle_deg(c: [Point; 3]) -> f64 {
    let mut m = f64::INFINITY;
    for k in 0..3 {
        let (a, b, o) = (c[(k + 1) % 3], c[(k + 2) % 3], c[k]);
        let (ux, uy) = (a.x - o.x, a.y - o.y);
        let (vx, vy) = (b.x - o.x, b.y - o.y);
        let ang = (ux * vy - uy * vx).abs().atan2(ux * vx + uy * vy);
        m = m.min(ang.to_degrees());
    }
    m
}

/// Linear triangulation before midpoint insertion.
struct LinearMesh {
    points: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    region: Vec<f64>,
    resonator_of: Vec<Option<usize>>,
}

fn snap(p: Point, x_lo: f64, x_hi: f64) -> Point {
    let mut q = p;
    for w in [0.0, 1.0] {
        if (q.y - w).abs() <= GEOM_TOL {
            q.y = w;
        }
    }
    for x in [x_lo, x_hi] {
        if (q.x - x).abs() <= GEOM_TOL {
            q.x = x;
        }
    }
    q
}

/// Part of the polygon with x <= x_cut (Sutherland-Hodgman), or None if empty.
fn clip_left(poly: &Polygon, x_cut: f64) -> Option<Vec<Point>> {
    let v = poly.vertices();
    if v.iter().all(|p| p.x <= x_cut + GEOM_TOL) {
        return Some(v.to_vec());
    }
    let mut out = Vec::new();
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        let ina = a.x <= x_cut;
        let inb = b.x <= x_cut;
        if ina {
            out.push(a);
        }
        if ina != inb {
            let t = (x_cut - a.x) / (b.x - a.x);
            out.push(Point::new(x_cut, a.y + t * (b.y - a.y)));
        }
    }
    out.dedup_by(|a, b| a.dist(*b) <= GEOM_TOL);
    if out.len() >= 3 && out[0].dist(*out.last().unwrap()) <= GEOM_TOL {
        out.pop();
    }
    let area = {
        let m = out.len();
        0.5 * (0..m).map(|i| out[i].x * out[(i + 1) % m].y - out[(i + 1) % m].x * out[i].y).sum::<f64>()
    };
    (out.len() >= 3 && area.abs() > 1e-14).then_some(out)
}

pub(crate) fn point_in_loop(v: &[Point], p: Point) -> bool {
    let mut inside = false;
    let n = v.len();
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn loop_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].x * v[(i + 1) % n].y - v[(i + 1) % n].x * v[i].y).sum::<f64>()
}

/// Part of the resonator foot inside [x_lo, x_hi], if any.
fn foot_in_range(r: &Resonator, x_lo: f64, x_hi: f64) -> Option<(f64, f64)> {
    let (a, b) = r.foot();
    let (a, b) = (a.max(x_lo), b.min(x_hi));
    (b > a).then_some((a, b))
}

fn junction_size(r: &Resonator, h: f64, opts: &MeshOptions) -> f64 {
    opts.junction_size.unwrap_or((r.eps / 40.0).min(0.25 * h))
}

/// Row offsets (from the wall) of a structured resonator strip: geometric
/// growth by 1.5 from `first` up to `h`, then uniform rows of height <= h.
pub fn resonator_rows(length: f64, first: f64, h: f64) -> Vec<f64> {
    let mut rows = vec![0.0];
    let mut dy = first.min(h);
    let mut y = 0.0;
    while dy < h && y + dy < length - 0.5 * dy {
        y += dy;
        rows.push(y);
        dy *= 1.5;
    }
    let rest = length - y;
    let n = (rest / h).ceil().max(1.0) as usize;
    for k in 1..=n {
        rows.push(y + rest * k as f64 / n as f64);
    }
    *rows.last_mut().unwrap() = length;
    rows
}

fn linear_mesh(g: &Geometry, h: f64, x_lo: f64, x_hi: f64, opts: &MeshOptions) -> Result<LinearMesh> {
    let half = x_hi < g.d;
    // Obstacles and index regions restricted to [x_lo, x_hi].
    let clip = |p: &Polygon| -> Option<Vec<Point>> {
        let v = if half { clip_left(p, x_hi)? } else { p.vertices().to_vec() };
        Some(v.into_iter().map(|q| snap(q, x_lo, x_hi)).collect())
    };
    let obstacles: Vec<Vec<Point>> = g.obstacles.iter().filter_map(clip).collect();
    let regions: Vec<(Vec<Point>, f64)> =
        g.index_regions.iter().filter_map(|r| clip(&r.polygon).map(|v| (v, r.n))).collect();

    let mut centers: Vec<(Point, f64)> = opts.grading.clone();
    let mut feet: Vec<(usize, f64, f64, usize)> = Vec::new();
    for (j, r) in g.resonators.iter().enumerate() {
        let Some((a, b)) = foot_in_range(r, x_lo, x_hi) else { continue };
        let (fa, fb) = r.foot();
        if half && fb > x_hi && !(r.p.abs() <= GEOM_TOL) {
            return Err(Error::NotSymmetric(format!("resonator {j} straddles the cut off-center")));
        }
        let s0 = junction_size(r, h, opts);
        for x in [fa, fb] {
            if x >= x_lo && x <= x_hi {
                centers.push((Point::new(x, r.wall.y()), s0));
            }
        }
        let min_cols = if b - a < r.eps - GEOM_TOL { 1 } else { 2 };
        let cols = (((b - a) / s0) - 1e-9).ceil().max(min_cols as f64) as usize;
        feet.push((j, a, b, cols));
    }
    let size = |z: Point| -> f64 {
        centers
            .iter()
            .map(|&(c, s0)| s0.max(GRADING_SLOPE * z.dist(c)))
            .fold(h, f64::min)
    };

    let mut pslg = Pslg::default();
    let covered = |xa: f64, xb: f64, wall: f64| -> bool {
        let xm = 0.5 * (xa + xb);
        obstacles.iter().any(|v| {
            let n = v.len();
            (0..n).any(|i| {
                let (p, q) = (v[i], v[(i + 1) % n]);
                p.y == wall && q.y == wall && xm > p.x.min(q.x) && xm < p.x.max(q.x)
            })
        })
    };
    // Walls.
    for wall in [0.0, 1.0] {
        let mut breaks = vec![x_lo, x_hi];
        for v in obstacles.iter().chain(regions.iter().map(|(v, _)| v)) {
            breaks.extend(v.iter().filter(|p| p.y == wall).map(|p| p.x));
        }
        for &(j, a, b, _) in &feet {
            if g.resonators[j].wall.y() == wall {
                breaks.push(a);
                breaks.push(b);
            }
        }
        for (c, _) in &opts.grading {
            if c.y == wall && c.x > x_lo && c.x < x_hi {
                breaks.push(c.x);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        for w in breaks.windows(2) {
            let (xa, xb) = (w[0], w[1]);
            if covered(xa, xb, wall) {
                continue;
            }
            let pa = Point::new(xa, wall);
            let pb = Point::new(xb, wall);
            let foot = feet.iter().find(|f| g.resonators[f.0].wall.y() == wall && f.1 == xa && f.2 == xb);
            if let Some(&(_, _, _, cols)) = foot {
                let interior: Vec<Point> =
                    (1..cols).map(|k| Point::new(xa + (xb - xa) * k as f64 / cols as f64, wall)).collect();
                pslg.chain(pa, &interior, pb);
            } else {
                pslg.graded_segment(pa, pb, &size);
            }
        }
    }
    // Truncation / cut lines.
    for x in [x_lo, x_hi] {
        let mut breaks = vec![0.0, 1.0];
        for v in &obstacles {
            breaks.extend(v.iter().filter(|p| p.x == x).map(|p| p.y));
        }
        for (v, _) in &regions {
            breaks.extend(v.iter().filter(|p| p.x == x).map(|p| p.y));
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        for w in breaks.windows(2) {
            let ym = 0.5 * (w[0] + w[1]);
            if obstacles.iter().any(|v| point_in_loop(v, Point::new(x - 1e-7 * (x - x_lo).signum(), ym))) {
                continue;
            }
            pslg.graded_segment(Point::new(x, w[0]), Point::new(x, w[1]), &size);
        }
    }
    // Obstacle and index region boundaries.
    let on_frame = |p: Point, q: Point| -> bool {
        (p.y == q.y && (p.y == 0.0 || p.y == 1.0)) || (p.x == q.x && (p.x == x_lo || p.x == x_hi))
    };
    for v in obstacles.iter().chain(regions.iter().map(|(v, _)| v)) {
        let n = v.len();
        for i in 0..n {
            let (p, q) = (v[i], v[(i + 1) % n]);
            if !on_frame(p, q) {
                pslg.graded_segment(p, q, &size);
            }
        }
    }

    // Seed points on a triangular lattice, kept half a spacing away from
    // every boundary.
    for &(c, radius, s) in &opts.refine_disks {
        let rows = (radius / (s * 0.866)).ceil() as i64;
        for j in -rows..=rows {
            let y = c.y + j as f64 * s * 0.866;
            let shift = if j.rem_euclid(2) == 1 { 0.5 * s } else { 0.0 };
            let cols = (radius / s).ceil() as i64 + 1;
            for i in -cols..=cols {
                let q = Point::new(c.x + i as f64 * s + shift, y);
                let clear = q.dist(c) <= radius
                    && q.y > 0.5 * s
                    && q.y < 1.0 - 0.5 * s
                    && q.x > x_lo + 0.5 * s
                    && q.x < x_hi - 0.5 * s
                    && obstacles.iter().all(|v| !point_in_loop(v, q))
                    && obstacles.iter().chain(regions.iter().map(|(v, _)| v)).all(|v| {
                        let n = v.len();
                        (0..n).all(|k| point_segment_distance(q, v[k], v[(k + 1) % n]) > 0.5 * s)
                    });
                if clear {
                    pslg.point(q);
                }
            }
        }
    }

    // Comparable to a uniform grid of right triangles with legs h.
    let max_area = 0.7 * h * h;
    let tri = triangulate(&pslg, max_area, opts.refine_angle_deg)?;

    let mut points = tri.points;
    let mut triangles = Vec::with_capacity(tri.triangles.len());
    let mut region = Vec::with_capacity(tri.triangles.len());
    let mut resonator_of = Vec::with_capacity(tri.triangles.len());
    for t in &tri.triangles {
        let [a, b, c] = t.map(|i| points[i]);
        let cen = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        if obstacles.iter().any(|v| point_in_loop(v, cen)) {
            continue;
        }
        let n = regions.iter().find(|(v, _)| point_in_loop(v, cen)).map_or(1.0, |r| r.1);
        triangles.push(*t);
        region.push(n);
        resonator_of.push(None);
    }

    // Structured resonator strips glued to the foot vertices.
    let mut used = vec![false; points.len()];
    for t in &triangles {
        for &i in t {
            used[i] = true;
        }
    }
    for &(j, a, b, _) in &feet {
        let r = &g.resonators[j];
        let wall = r.wall.y();
        let mut cols: Vec<usize> = (0..used.len())
            .filter(|&i| used[i] && points[i].y == wall && points[i].x >= a && points[i].x <= b)
            .collect();
        cols.sort_by(|&i, &k| points[i].x.total_cmp(&points[k].x));
        if cols.len() < 2 || points[cols[0]].x != a || points[*cols.last().unwrap()].x != b {
            return Err(Error::MeshFailure(format!("foot of resonator {j} is not resolved")));
        }
        let s0 = junction_size(r, h, opts);
        let rows = resonator_rows(r.length, s0, h);
        let sgn = r.wall.outward();
        let mut grid = vec![cols.clone()];
        for &dy in &rows[1..] {
            let row: Vec<usize> = cols
                .iter()
                .map(|&i| {
                    points.push(Point::new(points[i].x, wall + sgn * dy));
                    points.len() - 1
                })
                .collect();
            grid.push(row);
        }
        for k in 0..rows.len() - 1 {
            for i in 0..cols.len() - 1 {
                let (v00, v10, v01, v11) = (grid[k][i], grid[k][i + 1], grid[k + 1][i], grid[k + 1][i + 1]);
                let (t1, t2) = if r.wall == Wall::Top {
                    ([v00, v10, v11], [v00, v11, v01])
                } else {
                    ([v00, v11, v10], [v00, v01, v11])
                };
                for t in [t1, t2] {
                    triangles.push(t);
                    region.push(1.0);
                    resonator_of.push(Some(j));
                }
            }
        }
    }
    Ok(LinearMesh { points, triangles, region, resonator_of })
}

/// Quadratic mesh of an arbitrary linear triangulation (index 1 everywhere, all
/// boundary edges tagged as walls).
pub fn mesh_from_triangles(points: Vec<Point>, triangles: Vec<[usize; 3]>) -> Mesh {
    let m = triangles.len();
    let lin = LinearMesh { points, triangles, region: vec![1.0; m], resonator_of: vec![None; m] };
    quadratic(lin, f64::NEG_INFINITY, f64::INFINITY, BoundaryTag::RightTruncation)
}

/// Full symmetric mesh from its left half; nodes on x = 0 are shared.
fn mirror(g: &Geometry, half: &LinearMesh) -> LinearMesh {
    let n = half.points.len();
    let mut points = half.points.clone();
    let mut image = vec![0usize; n];
    for (i, p) in half.points.iter().enumerate() {
        if p.x == 0.0 {
            image[i] = i;
        } else {
            image[i] = points.len();
            points.push(p.mirrored());
        }
    }
    let mirror_res = |j: usize| -> usize {
        let r = &g.resonators[j];
        g.resonators
            .iter()
            .position(|q| (q.p + r.p).abs() <= GEOM_TOL && q.wall == r.wall)
            .unwrap_or(j)
    };
    let mut triangles = half.triangles.clone();
    let mut region = half.region.clone();
    let mut resonator_of = half.resonator_of.clone();
    for (k, t) in half.triangles.iter().enumerate() {
        triangles.push([image[t[0]], image[t[2]], image[t[1]]]);
        region.push(half.region[k]);
        resonator_of.push(half.resonator_of[k].map(mirror_res));
    }
    LinearMesh { points, triangles, region, resonator_of }
}

fn quadratic(lin: LinearMesh, x_left: f64, x_right: f64, right_tag: BoundaryTag) -> Mesh {
    // Drop vertices not used by any kept triangle and renumber.
    let mut new_index = vec![usize::MAX; lin.points.len()];
    let mut nodes = Vec::new();
    for t in &lin.triangles {
        for &i in t {
            if new_index[i] == usize::MAX {
                new_index[i] = nodes.len();
                nodes.push(lin.points[i]);
            }
        }
    }
    let n_vertices = nodes.len();
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut count: HashMap<(usize, usize), u32> = HashMap::new();
    let mut elements = Vec::with_capacity(lin.triangles.len());
    for t in &lin.triangles {
        let mut c = t.map(|i| new_index[i]);
        if orient(nodes[c[0]], nodes[c[1]], nodes[c[2]]) < 0.0 {
            c.swap(1, 2);
        }
        let mut el = [c[0], c[1], c[2], 0, 0, 0];
        for k in 0..3 {
            let (a, b) = (c[k], c[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            *count.entry(key).or_insert(0) += 1;
            let next = nodes.len();
            let m = *mids.entry(key).or_insert(next);
            if m == next {
                let (pa, pb) = (nodes[a], nodes[b]);
                nodes.push(Point::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)));
            }
            el[3 + k] = m;
        }
        elements.push(el);
    }
    let mut boundary = Vec::new();
    for el in &elements {
        for k in 0..3 {
            let (a, b) = (el[k], el[(k + 1) % 3]);
            if count[&(a.min(b), a.max(b))] != 1 {
                continue;
            }
            let (pa, pb) = (nodes[a], nodes[b]);
            let tag = if pa.x == x_left && pb.x == x_left {
                BoundaryTag::LeftTruncation
            } else if pa.x == x_right && pb.x == x_right {
                right_tag
            } else {
                BoundaryTag::Wall
            };
            boundary.push(BoundaryEdge { nodes: [a, b, el[3 + k]], tag });
        }
    }
    Mesh {
        nodes,
        n_vertices,
        elements,
        region_index: lin.region,
        resonator_of: lin.resonator_of,
        boundary,
        x_left,
        x_right,
        locator: OnceLock::new(),
    }
}

/// Exact area of the truncated domain restricted to [x_lo, x_hi].
fn domain_area(g: &Geometry, x_lo: f64, x_hi: f64) -> f64 {
    let half = x_hi < g.d;
    let mut area = x_hi - x_lo;
    for p in &g.obstacles {
        let v = if half { clip_left(p, x_hi) } else { Some(p.vertices().to_vec()) };
        if let Some(v) = v {
            area -= loop_area(&v).abs();
        }
    }
    for r in &g.resonators {
        if let Some((a, b)) = foot_in_range(r, x_lo, x_hi) {
            area += (b - a) * r.length;
        }
    }
    area
}

fn check_area(mesh: &Mesh, expected: f64) -> Result<()> {
    let got = mesh.total_area();
    if (got - expected).abs() > 1e-10 * expected {
        return Err(Error::MeshFailure(format!("element areas sum to {got}, domain area is {expected}")));
    }
    let min_angle = mesh.min_angle_outside_resonators();
    if min_angle < MIN_ANGLE_DEG {
        return Err(Error::MeshFailure(format!("minimum angle {min_angle:.2} deg below {MIN_ANGLE_DEG}")));
    }
    Ok(())
}

/// Uniform bucket grid over element bounding boxes.
#[derive(Debug)]
struct Locator {
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl Locator {
    fn new(mesh: &Mesh) -> Locator {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &mesh.nodes[..mesh.n_vertices] {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let area = (hi.x - lo.x) * (hi.y - lo.y);
        let cell = (area / mesh.elements.len().max(1) as f64).sqrt().max(1e-6) * 2.0;
        let nx = ((hi.x - lo.x) / cell).ceil() as usize + 1;
        let ny = ((hi.y - lo.y) / cell).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for e in 0..mesh.elements.len() {
            let c = mesh.corners(e);
            let (mut bx0, mut by0, mut bx1, mut by1) = (usize::MAX, usize::MAX, 0, 0);
            for p in c {
                let ix = ((p.x - lo.x) / cell) as usize;
                let iy = ((p.y - lo.y) / cell) as usize;
                bx0 = bx0.min(ix);
                by0 = by0.min(iy);
                bx1 = bx1.max(ix);
                by1 = by1.max(iy);
            }
            for ix in bx0..=bx1.min(nx - 1) {
                for iy in by0..=by1.min(ny - 1) {
                    buckets[iy * nx + ix].push(e);
                }
            }
        }
        Locator { lo, cell, nx, ny, buckets }
    }

    fn find(&self, mesh: &Mesh, p: Point) -> Option<(usize, [f64; 3])> {
        let fx = (p.x - self.lo.x) / self.cell;
        let fy = (p.y - self.lo.y) / self.cell;
        if fx < -1e-9 || fy < -1e-9 {
            return None;
        }
        let ix = (fx.max(0.0) as usize).min(self.nx - 1);
        let iy = (fy.max(0.0) as usize).min(self.ny - 1);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &e in &self.buckets[iy * self.nx + ix] {
            let l = barycentric(mesh.corners(e), p);
            let worst = l[0].min(l[1]).min(l[2]);
            if worst >= 0.0 {
                return Some((e, l));
            }
            if best.as_ref().is_none_or(|b| worst > b.2) {
                best = Some((e, l, worst));
            }
        }
        // Points on the boundary may fall marginally outside due to rounding.
        best.filter(|b| b.2 > -1e-9).map(|(e, l, _)| (e, l))
    }
}

pub fn barycentric(c: [Point; 3], p: Point) -> [f64; 3] {
    let det = orient(c[0], c[1], c[2]);
    let l1 = orient(c[0], p, c[2]) / det;
    let l2 = orient(c[0], c[1], p) / det;
    [1.0 - l1 - l2, l1, l2]
}
