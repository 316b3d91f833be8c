//! Named obstacle geometries used by the examples, tests and configs.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{make_geometry, Geometry, IndexRegion, Point, Polygon};

/// Fish outline: an elliptic body around (0.1, 0.5) and a forked tail.
pub fn fish_polygon() -> Polygon {
    let mut v: Vec<Point> = (0..=30)
        .map(|k| {
            let th = (-150.0 + 10.0 * k as f64).to_radians();
            Point::new(0.1 + 0.45 * th.cos(), 0.5 + 0.22 * th.sin())
        })
        .collect();
    v.extend([Point::new(-0.62, 0.78), Point::new(-0.5, 0.5), Point::new(-0.62, 0.22)]);
    Polygon::new(v).expect("fish outline is simple")
}

/// Sound-hard fish in the strip, d = 1.
pub fn fish() -> Geometry {
    make_geometry(1.0, vec![fish_polygon()], vec![]).expect("fish fits in the strip")
}

/// Fish-shaped inclusion of refractive index n.
pub fn penetrable_fish(n: f64) -> Result<Geometry> {
    make_geometry(1.0, vec![], vec![IndexRegion { polygon: fish_polygon(), n }])
}

/// Irregular bump standing on the bottom wall.
pub fn dino() -> Geometry {
    let v = [
        (-0.7, 0.0),
        (0.5, 0.0),
        (0.45, 0.25),
        (0.55, 0.45),
        (0.7, 0.55),
        (0.72, 0.62),
        (0.5, 0.62),
        (0.35, 0.4),
        (0.1, 0.35),
        (-0.3, 0.3),
        (-0.55, 0.18),
    ];
    make_geometry(1.0, vec![Polygon::from_coords(&v).expect("dino outline is simple")], vec![]).expect("dino fits in the strip")
}

/// Six-pointed star centered at (0, 0.45) with one tip pointing up; mirror symmetric.
pub fn star() -> Geometry {
    let v: Vec<Point> = (0..12)
        .map(|k| {
            let th = PI / 2.0 + k as f64 * PI / 6.0;
            let r = if k % 2 == 0 { 0.25 } else { 0.12 };
            Point::new(r * th.cos(), 0.45 + r * th.sin())
        })
        .collect();
    make_geometry(1.0, vec![Polygon::new(v).expect("star outline is simple")], vec![]).expect("star fits in the strip")
}

pub const SHAPE_NAMES: [&str; 5] = ["bare", "fish", "penetrable_fish", "dino", "star"];

pub fn shape_by_name(name: &str) -> Result<Geometry> {
    match name {
        "bare" => Ok(Geometry::bare_strip(1.0)),
        "fish" => Ok(fish()),
        "penetrable_fish" => penetrable_fish(6.0),
        "dino" => Ok(dino()),
        "star" => Ok(star()),
        _ => Err(Error::Config { line: 0, msg: format!("unknown shape {name:?}; known: {}", SHAPE_NAMES.join(", ")) }),
    }
}
