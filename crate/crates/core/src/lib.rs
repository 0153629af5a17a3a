//! Meshing of 2-tori sampled in 3 to 6 dimensional spaces.
//!
//! The pipeline runs sample, kNN graph, minimum cycle basis, discrete
//! one-forms, patch meshing, orientation, projection and export. Each stage
//! lives in its own module and can be driven independently; [`pipeline`]
//! wires them together.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cloud;
pub mod cr3bp;
pub mod cycles;
pub mod delaunay;
pub mod export;
pub mod gf2;
pub mod grid;
pub mod knn;
pub mod mesh;
pub mod mesher;
pub mod oneform;
pub mod orientation;
pub mod pipeline;
pub mod projection;
pub mod samplers;

pub use cloud::{load_point_cloud, CloudError, PointCloud, Provenance};
pub use knn::{build_knn_graph, KnnError, NeighborGraph};
