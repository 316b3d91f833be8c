//! Waveguide geometries: the unit-height strip, sound-hard obstacles, penetrable
//! index regions and thin rectangular resonators attached to the walls.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance for on-wall, flatness and symmetry tests.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn mirrored(self) -> Point {
        Point::new(-self.x, self.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Twice the signed area of the triangle (a, b, c); positive when counterclockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Closed segments [a,b] and [c,d] share at least one point (within `tol`).
pub fn segments_touch(a: Point, b: Point, c: Point, d: Point, tol: f64) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let l1 = a.dist(b).max(1e-300);
    let l2 = c.dist(d).max(1e-300);
    let s1 = |v: f64| if v.abs() <= tol * l2 { 0 } else { v.signum() as i32 };
    let s2 = |v: f64| if v.abs() <= tol * l1 { 0 } else { v.signum() as i32 };
    let (o1, o2, o3, o4) = (s1(d1), s1(d2), s2(d3), s2(d4));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| -> bool {
        // r on segment pq, assuming collinear
        r.x >= p.x.min(q.x) - tol
            && r.x <= p.x.max(q.x) + tol
            && r.y >= p.y.min(q.y) - tol
            && r.y <= p.y.max(q.y) + tol
    };
    (o1 == 0 && on(c, d, a))
        || (o2 == 0 && on(c, d, b))
        || (o3 == 0 && on(a, b, c))
        || (o4 == 0 && on(a, b, d))
}

/// Simple polygon stored as a counterclockwise vertex loop (last vertex not repeated).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(mut vertices: Vec<Point>) -> Result<Polygon> {
        if vertices.len() > 1 && vertices[0].dist(*vertices.last().unwrap()) <= GEOM_TOL {
            vertices.pop();
        }
        vertices.dedup_by(|a, b| a.dist(*b) <= GEOM_TOL);
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon("fewer than 3 distinct vertices".into()));
        }
        let area = signed_area(&vertices);
        if area.abs() < 1e-12 {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let poly = Polygon { vertices };
        let n = poly.vertices.len();
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (a, b) = poly.edge(i);
                let (c, d) = poly.edge(j);
                if segments_touch(a, b, c, d, GEOM_TOL) {
                    return Err(Error::InvalidPolygon(format!(
                        "edges {i} and {j} intersect (polygon is not simple)"
                    )));
                }
            }
        }
        Ok(poly)
    }

    pub fn from_coords(coords: &[(f64, f64)]) -> Result<Polygon> {
        Polygon::new(coords.iter().map(|&(x, y)| Point::new(x, y)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        (0..self.vertices.len()).map(move |i| self.edge(i))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    /// Point strictly inside by the even-odd rule (boundary points are unspecified).
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Boundaries touch or cross, or one polygon lies inside the other.
    pub fn intersects(&self, other: &Polygon) -> bool {
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                if segments_touch(a, b, c, d, GEOM_TOL) {
                    return true;
                }
            }
        }
        other.contains(self.vertices[0]) || self.contains(other.vertices[0])
    }

    /// Image under x -> -x, re-oriented counterclockwise.
    pub fn mirrored(&self) -> Polygon {
        let mut v: Vec<Point> = self.vertices.iter().map(|p| p.mirrored()).collect();
        v.reverse();
        Polygon { vertices: v }
    }

    /// Same vertex loop up to a cyclic shift, within `tol`.
    pub fn same_as(&self, other: &Polygon, tol: f64) -> bool {
        let n = self.vertices.len();
        if n != other.vertices.len() {
            return false;
        }
        (0..n).any(|s| (0..n).all(|i| self.vertices[i].dist(other.vertices[(i + s) % n]) <= tol))
    }

    /// Intervals of the line y = `wall_y` covered by the polygon boundary
    /// (edges lying on the line, or isolated vertices touching it).
    pub fn wall_contacts(&self, wall_y: f64) -> Vec<(f64, f64)> {
        let on = |p: Point| (p.y - wall_y).abs() <= GEOM_TOL;
        let mut out = Vec::new();
        for (a, b) in self.edges() {
            if on(a) && on(b) {
                out.push((a.x.min(b.x), a.x.max(b.x)));
            } else if on(a) {
                out.push((a.x, a.x));
            }
        }
        out
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexRegion {
    pub polygon: Polygon,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Wall {
    Top,
    Bottom,
}

impl Wall {
    pub fn y(self) -> f64 {
        match self {
            Wall::Top => 1.0,
            Wall::Bottom => 0.0,
        }
    }

    /// +1 when the resonator extends upward from the wall, -1 downward.
    pub fn outward(self) -> f64 {
        match self {
            Wall::Top => 1.0,
            Wall::Bottom => -1.0,
        }
    }
}

/// Thin rectangle (p - eps/2, p + eps/2) x [wall, wall + length) attached to a wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonator {
    pub p: f64,
    pub eps: f64,
    pub length: f64,
    pub wall: Wall,
}

impl Resonator {
    pub fn new(p: f64, eps: f64, length: f64, wall: Wall) -> Resonator {
        Resonator { p, eps, length, wall }
    }

    pub fn top(p: f64, eps: f64, length: f64) -> Resonator {
        Resonator::new(p, eps, length, Wall::Top)
    }

    /// Junction midpoint A = (p, wall).
    pub fn junction(&self) -> Point {
        Point::new(self.p, self.wall.y())
    }

    pub fn foot(&self) -> (f64, f64) {
        (self.p - 0.5 * self.eps, self.p + 0.5 * self.eps)
    }

    pub fn contains(&self, q: Point) -> bool {
        let (a, b) = self.foot();
        let s = (q.y - self.wall.y()) * self.wall.outward();
        q.x > a && q.x < b && s > 0.0 && s < self.length
    }
}

/// Length at which the resonator's quarter-wave problem resonates: pi (m + 1/2) / omega.
pub fn resonant_length(omega: f64, m: u32) -> f64 {
    PI * (m as f64 + 0.5) / omega
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    /// Outside [-d, d] the domain coincides with the strip R x (0, 1).
    pub d: f64,
    pub obstacles: Vec<Polygon>,
    pub index_regions: Vec<IndexRegion>,
    pub resonators: Vec<Resonator>,
    /// Obstacles and index regions are invariant under x -> -x (resonators excluded).
    pub symmetric: bool,
}

impl Geometry {
    pub fn bare_strip(d: f64) -> Geometry {
        Geometry { d, obstacles: vec![], index_regions: vec![], resonators: vec![], symmetric: true }
    }

    /// Refractive index at a point of the strip (1 outside index regions).
    pub fn index_at(&self, p: Point) -> f64 {
        self.index_regions
            .iter()
            .find(|r| r.polygon.contains(p))
            .map_or(1.0, |r| r.n)
    }

    /// Mirror symmetric including the resonator set.
    pub fn fully_symmetric(&self) -> bool {
        self.symmetric
            && self.resonators.iter().all(|r| {
                self.resonators.iter().any(|q| {
                    (q.p + r.p).abs() <= GEOM_TOL
                        && (q.eps - r.eps).abs() <= GEOM_TOL
                        && (q.length - r.length).abs() <= GEOM_TOL
                        && q.wall == r.wall
                })
            })
    }

    pub fn without_resonators(&self) -> Geometry {
        Geometry { resonators: vec![], ..self.clone() }
    }

    /// Copy with the lengths of the listed resonators replaced.
    pub fn with_lengths(&self, indices: &[usize], length: f64) -> Geometry {
        let mut g = self.clone();
        for &j in indices {
            g.resonators[j].length = length;
        }
        g
    }

    /// Extent of obstacles and index regions in x (None for the bare strip).
    pub fn obstacle_extent(&self) -> Option<(f64, f64)> {
        let polys = self.obstacles.iter().chain(self.index_regions.iter().map(|r| &r.polygon));
        let mut ext: Option<(f64, f64)> = None;
        for p in polys {
            let (lo, hi) = p.bbox();
            ext = Some(match ext {
                None => (lo.x, hi.x),
                Some((a, b)) => (a.min(lo.x), b.max(hi.x)),
            });
        }
        ext
    }
}

/// Validates obstacles and index regions and builds a resonator-free geometry.
pub fn make_geometry(d: f64, obstacles: Vec<Polygon>, index_regions: Vec<IndexRegion>) -> Result<Geometry> {
    if !(d > 0.0) {
        return Err(Error::OutOfBox(format!("half length d = {d} must be positive")));
    }
    for r in &index_regions {
        if !(r.n > 0.0) || !r.n.is_finite() {
            return Err(Error::InvalidPolygon(format!("refractive index {} must be positive", r.n)));
        }
    }
    let all: Vec<&Polygon> = obstacles.iter().chain(index_regions.iter().map(|r| &r.polygon)).collect();
    for (k, poly) in all.iter().enumerate() {
        for v in poly.vertices() {
            if v.x.abs() > d + GEOM_TOL || v.y < -GEOM_TOL || v.y > 1.0 + GEOM_TOL {
                return Err(Error::OutOfBox(format!("polygon {k} vertex {v} with d = {d}")));
            }
        }
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if all[i].intersects(all[j]) {
                return Err(Error::Overlap(format!("polygons {i} and {j}")));
            }
        }
    }
    for (k, poly) in obstacles.iter().enumerate() {
        let (lo, hi) = poly.bbox();
        if lo.y <= GEOM_TOL && hi.y >= 1.0 - GEOM_TOL {
            return Err(Error::Disconnected(format!("obstacle {k} touches both walls")));
        }
    }
    let symmetric = polygons_symmetric(&obstacles) && index_symmetric(&index_regions);
    Ok(Geometry { d, obstacles, index_regions, resonators: vec![], symmetric })
}

fn polygons_symmetric(polys: &[Polygon]) -> bool {
    polys.iter().all(|p| {
        let m = p.mirrored();
        polys.iter().any(|q| q.same_as(&m, GEOM_TOL))
    })
}

fn index_symmetric(regions: &[IndexRegion]) -> bool {
    regions.iter().all(|r| {
        let m = r.polygon.mirrored();
        regions.iter().any(|q| q.n == r.n && q.polygon.same_as(&m, GEOM_TOL))
    })
}

/// Attaches a resonator, enlarging d so the foot stays inside [-d, d].
pub fn add_resonator(g: &Geometry, r: Resonator) -> Result<Geometry> {
    if !(r.eps > 0.0 && r.eps < 1.0) {
        return Err(Error::InvalidResonator(format!("width {} must lie in (0, 1)", r.eps)));
    }
    if !(r.length > 0.0) || !r.p.is_finite() {
        return Err(Error::InvalidResonator(format!("length {} must be positive", r.length)));
    }
    let (a, b) = r.foot();
    for (k, obs) in g.obstacles.iter().enumerate() {
        for (lo, hi) in obs.wall_contacts(r.wall.y()) {
            if lo <= b + GEOM_TOL && hi >= a - GEOM_TOL {
                return Err(Error::NonFlatWall(format!(
                    "foot ({a}, {b}) meets obstacle {k} on the wall"
                )));
            }
        }
    }
    for (k, q) in g.resonators.iter().enumerate() {
        if q.wall != r.wall {
            continue;
        }
        let (c, d) = q.foot();
        if c <= b + GEOM_TOL && d >= a - GEOM_TOL {
            return Err(Error::FootCollision(format!("foot ({a}, {b}) meets resonator {k} foot ({c}, {d})")));
        }
    }
    let mut out = g.clone();
    out.d = out.d.max(r.p.abs() + 0.5 * r.eps);
    out.resonators.push(r);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Polygon {
        Polygon::from_coords(&[(-0.5, 0.2), (0.1, 0.8), (0.4, 0.3)]).unwrap()
    }

    #[test]
    fn polygon_is_reoriented_counterclockwise() {
        let t = triangle();
        assert!(t.area() > 0.0);
        assert!(t.contains(Point::new(0.0, 0.45)));
        assert!(!t.contains(Point::new(0.5, 0.9)));
    }

    #[test]
    fn bow_tie_is_rejected() {
        let r = Polygon::from_coords(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(matches!(r, Err(Error::InvalidPolygon(_))));
    }

    #[test]
    fn triangle_geometry_is_valid() {
        let g = make_geometry(1.5, vec![triangle()], vec![]).unwrap();
        assert!(!g.symmetric);
        assert!(matches!(make_geometry(0.3, vec![triangle()], vec![]), Err(Error::OutOfBox(_))));
    }

    #[test]
    fn overlapping_and_blocking_obstacles() {
        let a = Polygon::from_coords(&[(0.0, 0.2), (0.4, 0.2), (0.4, 0.6), (0.0, 0.6)]).unwrap();
        let b = Polygon::from_coords(&[(0.3, 0.3), (0.7, 0.3), (0.7, 0.5)]).unwrap();
        assert!(matches!(make_geometry(1.0, vec![a, b], vec![]), Err(Error::Overlap(_))));
        let wall = Polygon::from_coords(&[(0.0, 0.0), (0.1, 0.0), (0.1, 1.0), (0.0, 1.0)]).unwrap();
        assert!(matches!(make_geometry(1.0, vec![wall], vec![]), Err(Error::Disconnected(_))));
    }

    #[test]
    fn symmetric_flag_detects_mirror_pairs() {
        let left = Polygon::from_coords(&[(-0.6, 0.2), (-0.2, 0.2), (-0.4, 0.6)]).unwrap();
        let right = left.mirrored();
        let g = make_geometry(1.0, vec![left.clone(), right], vec![]).unwrap();
        assert!(g.symmetric);
        let g = make_geometry(1.0, vec![left], vec![]).unwrap();
        assert!(!g.symmetric);
    }

    #[test]
    fn resonator_rules() {
        let s = Geometry::bare_strip(1.0);
        let g = add_resonator(&s, Resonator::top(0.0, 0.01, 0.62)).unwrap();
        assert!(matches!(
            add_resonator(&g, Resonator::top(0.005, 0.01, 0.62)),
            Err(Error::FootCollision(_))
        ));
        let g2 = add_resonator(&g, Resonator::top(2.96875, 0.01, 0.62)).unwrap();
        assert!((g2.d - 2.97375).abs() < 1e-12);
        let bump = Polygon::from_coords(&[(-0.2, 1.0), (0.2, 0.6), (0.4, 1.0)]).unwrap();
        let gb = make_geometry(1.0, vec![bump], vec![]).unwrap();
        assert!(matches!(add_resonator(&gb, Resonator::top(0.0, 0.01, 0.6)), Err(Error::NonFlatWall(_))));
        assert!(add_resonator(&gb, Resonator::new(0.0, 0.01, 0.6, Wall::Bottom)).is_ok());
    }

    #[test]
    fn resonant_lengths() {
        let w = 0.8 * PI;
        assert!((resonant_length(w, 0) - 0.625).abs() < 1e-15);
        assert!((resonant_length(w, 1) - 1.875).abs() < 1e-14);
        assert!((resonant_length(PI / 2.0, 0) - 1.0).abs() < 1e-15);
    }
}
