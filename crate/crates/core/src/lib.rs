//! Semantic-guided object-goal exploration on planar occupancy grids.

pub mod config;
pub mod coverage;
pub mod error;
pub mod geometry;
pub mod region;
pub mod relevance;
pub mod render;
pub mod scalar;
pub mod semantic_buffer;
pub mod sim;
pub mod viewpoint;
pub mod world;

pub use error::{Error, Result};
pub use geometry::{Point2, Pose, Rect};
pub use scalar::Scalar;

pub type Point2F32 = geometry::Point2<f32>;
pub type Point2F64 = geometry::Point2<f64>;
pub type Point3F32 = geometry::Point3<f32>;
pub type Point3F64 = geometry::Point3<f64>;
pub type PoseF32 = geometry::Pose<f32>;
pub type PoseF64 = geometry::Pose<f64>;
pub type RectF32 = geometry::Rect<f32>;
pub type RectF64 = geometry::Rect<f64>;
pub type DetectionF32 = semantic_buffer::Detection<f32>;
pub type DetectionF64 = semantic_buffer::Detection<f64>;
pub type SemanticPointF32 = semantic_buffer::SemanticPoint<f32>;
pub type SemanticPointF64 = semantic_buffer::SemanticPoint<f64>;
pub type SemanticBufferF32 = semantic_buffer::SemanticBuffer<f32>;
pub type SemanticBufferF64 = semantic_buffer::SemanticBuffer<f64>;
pub type ViewpointF32 = viewpoint::Viewpoint<f32>;
pub type ViewpointF64 = viewpoint::Viewpoint<f64>;
pub type EvaluatorConfigF32 = region::EvaluatorConfig<f32>;
pub type EvaluatorConfigF64 = region::EvaluatorConfig<f64>;
pub type RegionScoreF32 = region::RegionScore<f32>;
pub type RegionScoreF64 = region::RegionScore<f64>;
pub type FovModelF32 = coverage::FovModel<f32>;
pub type FovModelF64 = coverage::FovModel<f64>;
