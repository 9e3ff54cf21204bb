//! Planar disk geometry and n-dimensional ball primitives.

mod disk;
mod measure;
mod montecarlo;
mod region;
mod sampling;
mod union;
mod vector;

pub use disk::{lens_area, Disk, DiskConfig};
pub use measure::{ball_volume, sphere_surface};
pub use montecarlo::{mc_volume, AreaEstimate, SetOp, CHUNK_SAMPLES};
pub use region::{intersect_disks, intersection_area_2d, reuleaux_area, segment_area, ArcRegion, BoundaryArc};
pub use sampling::{uniform_ball_sample, uniform_box_sample, uniform_sphere_sample};
pub use union::{union_area_2d, union_area_2d_with, UnionOptions, MAX_EXACT_UNION};
pub use vector::{Point2, VectorN};

/// Tolerance for point-in-disk tests, duplicate detection and tangency.
pub const EPS_GEOM: f64 = 1e-9;
