//! Persistent homology of point clouds and density estimates, with
//! confidence bands that separate topological signal from noise.

pub mod complex;
pub mod confidence;
pub mod datasets;
pub mod density;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod metrics;
pub mod persistence;
pub mod pointprocess;
pub mod quadrature;
pub mod resample;
pub mod rips;
pub mod solve;

pub use complex::{lower_star_filtration, rips_filtration, Filtration, Simplex};
pub use error::{Error, Result};
pub use geometry::{hausdorff, local_density, rho_hat, DensityParams, PointCloud};
pub use grid::{Axis, GridField, GridGeometry};
pub use persistence::{betti_at, reduce, total_persistence, PersistenceDiagram, PersistencePair};
pub use rips::rips_diagram;
pub use metrics::{bottleneck, sup_distance};
