//! Fixtures shared by the benchmarks.

use wgcloak::{add_resonator, make_geometry, Geometry, Polygon, Resonator, Wall};

/// Triangle obstacle in a strip with d = 1.5.
pub fn triangle() -> Geometry {
    let t = Polygon::from_coords(&[(-0.5, 0.2), (0.1, 0.8), (0.4, 0.3)]).expect("triangle");
    make_geometry(1.5, vec![t], vec![]).expect("triangle geometry")
}

/// Triangle plus one thin resonator at p = -3.5.
pub fn triangle_with_resonator(eps: f64) -> Geometry {
    add_resonator(&triangle(), Resonator::new(-3.5, eps, 0.6, Wall::Top)).expect("resonator fits")
}
