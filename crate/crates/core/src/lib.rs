pub mod ablation;
pub mod container;
pub mod conv;
pub mod error;
pub mod features;
pub mod geom;
pub mod graph;
pub mod interp;
pub mod knn;
pub mod mesh;
pub mod network;
pub mod planar;
pub mod presets;
mod pyramid_io;
pub mod raster;
pub mod sampling;
pub mod sphere;
pub mod weights;

pub use error::{Error, Result};
