//! Sparse-to-dense depth completion with piecewise-planar CRFs.
//!
//! A colour image is over-segmented into superpixels, each superpixel carries
//! a 3D plane, and the planes are optimised jointly by particle-based belief
//! propagation with a TRW-S inner solver. A constrained "cardboard world" mode
//! restricts the scene to one road plane plus upright object planes and yields
//! a free-space mask as a by-product.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the `*64` and
//! `*32` aliases below name the common instantiations.

pub mod dataset;
pub mod depth;
pub mod energy;
pub mod geometry;
pub mod inference;
pub mod init;
pub mod metrics;
pub mod num;
pub mod pipeline;
pub mod segmentation;

pub use num::Real;

pub type Plane64 = geometry::Plane<f64>;
pub type Plane32 = geometry::Plane<f32>;
pub type Point3f64 = geometry::Point3<f64>;
pub type Point3f32 = geometry::Point3<f32>;
pub type CameraIntrinsics64 = geometry::CameraIntrinsics<f64>;
pub type CameraIntrinsics32 = geometry::CameraIntrinsics<f32>;
pub type PixelDepth64 = geometry::PixelDepth<f64>;
pub type PixelDepth32 = geometry::PixelDepth<f32>;
