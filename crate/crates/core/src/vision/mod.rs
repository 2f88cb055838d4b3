//! Boat detection among specular glints.
//!
//! Per frame pair: blur both frames, estimate sparse Lucas-Kanade flow on a
//! regular grid, mask the disk around the centroid of fast-moving points
//! (the glints), run Canny on the masked frame, close the edge map, keep the
//! contour enclosing the largest area and report its center relative to the
//! image center.

mod canny;
mod contour;
mod flow;
mod pipeline;

pub use canny::canny;
pub use contour::{contour_center, largest_contour, Contour};
pub use flow::{apply_mask, grid_points, lucas_kanade, reflection_centroid, FlowVector, ReflectionMask};
pub use pipeline::{
    detect_sequence, detect_target, detect_target_detailed, Detection, PipelineConfig, TargetObservation,
};
