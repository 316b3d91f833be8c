//! Constrained Delaunay triangulation with Ruppert refinement (backed by `spade`)
//! and size-driven discretization of boundary segments.

use std::collections::HashMap;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Planar straight-line graph: points and constraint segments between them.
#[derive(Debug, Default, Clone)]
pub struct Pslg {
    pub points: Vec<Point>,
    pub segments: Vec<[usize; 2]>,
    lookup: HashMap<(u64, u64), usize>,
}

impl Pslg {
    /// Index of `p`, reusing an existing point at the exact same position.
    pub fn point(&mut self, p: Point) -> usize {
        let key = ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits());
        let next = self.points.len();
        let i = *self.lookup.entry(key).or_insert(next);
        if i == next {
            self.points.push(p);
        }
        i
    }

    /// Adds the chain a -> interior points -> b as constraint segments.
    pub fn chain(&mut self, a: Point, interior: &[Point], b: Point) {
        let mut prev = self.point(a);
        for &q in interior.iter().chain(std::iter::once(&b)) {
            let k = self.point(q);
            if k != prev {
                self.segments.push([prev, k]);
            }
            prev = k;
        }
    }

    /// Adds segment a-b subdivided according to the local size function.
    pub fn graded_segment(&mut self, a: Point, b: Point, size: &dyn Fn(Point) -> f64) {
        let interior = subdivide(a, b, size);
        self.chain(a, &interior, b);
    }
}

/// Interior points of segment a-b with spacing following `size`. The last gap
/// is kept between half and one and a half local sizes.
pub fn subdivide(a: Point, b: Point, size: &dyn Fn(Point) -> f64) -> Vec<Point> {
    let len = a.dist(b);
    if len == 0.0 {
        return vec![];
    }
    let at = |t: f64| Point::new(a.x + (b.x - a.x) * t / len, a.y + (b.y - a.y) * t / len);
    let mut ts = vec![0.0];
    let mut t: f64 = 0.0;
    loop {
        let s0 = size(at(t));
        let s = s0.min(size(at((t + 0.5 * s0).min(len))));
        let s = s.max(len * 1e-9);
        if t + s >= len {
            let last_step = len - t;
            if last_step < 0.5 * s && ts.len() > 1 {
                ts.pop();
            }
            break;
        }
        t += s;
        ts.push(t);
    }
    ts.iter().skip(1).map(|&t| at(t)).collect()
}

/// Triangulation result: vertex positions and counterclockwise triangles.
pub struct Triangles {
    pub points: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

/// Constrained Delaunay triangulation of the convex hull of the PSLG, refined to
/// the angle bound and maximum area. Constraint segments may be split.
pub fn triangulate(pslg: &Pslg, max_area: f64, min_angle_deg: f64) -> Result<Triangles> {
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(pslg.points.len());
    for p in &pslg.points {
        let h = cdt
            .insert(Point2::new(p.x, p.y))
            .map_err(|e| Error::MeshFailure(format!("vertex insertion failed: {e:?}")))?;
        handles.push(h);
    }
    for &[i, j] in &pslg.segments {
        if handles[i] == handles[j] {
            continue;
        }
        if !cdt.can_add_constraint(handles[i], handles[j]) {
            return Err(Error::MeshFailure(format!(
                "boundary segment {} - {} crosses another segment",
                pslg.points[i], pslg.points[j]
            )));
        }
        cdt.add_constraint(handles[i], handles[j]);
    }
    let budget = 200 * pslg.points.len() + (50.0 / max_area) as usize + 10_000;
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(min_angle_deg))
        .with_max_allowed_area(max_area)
        .with_max_additional_vertices(budget);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::MeshFailure("refinement exhausted its vertex budget".into()));
    }
    let points = cdt.vertices().map(|v| Point::new(v.position().x, v.position().y)).collect();
    let triangles = cdt
        .inner_faces()
        .map(|f| {
            let v = f.vertices();
            [v[0].fix().index(), v[1].fix().index(), v[2].fix().index()]
        })
        .collect();
    Ok(Triangles { points, triangles })
}
