//! Acoustic waveguide scattering with thin outer resonators: P2 finite
//! elements with modal transparent boundaries, matched-asymptotics limit
//! formulas, and automated placement/tuning procedures for zero reflection,
//! zero transmission, phase shifting and cloaking.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod config;
pub mod design;
pub mod error;
pub mod geometry;
pub mod helmholtz;
pub mod mesh;
pub mod scattering;
pub mod shapes;

pub use design::{DesignOptions, DesignReport, Objective, Side};
pub use error::{Error, ErrorClass, Result};
pub use geometry::{add_resonator, make_geometry, resonant_length, Geometry, IndexRegion, Point, Polygon, Resonator, Wall};
pub use mesh::{generate_mesh, BoundaryTag, Mesh, MeshOptions};
pub use num_complex::Complex64;
pub use scattering::{scattering_matrix, SMatrix};
pub use helmholtz::SolverParams;
