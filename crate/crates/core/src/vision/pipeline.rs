use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{gaussian_blur, GrayImage};

use super::{apply_mask, canny, contour_center, grid_points, largest_contour, lucas_kanade, reflection_centroid};
use super::{Contour, FlowVector, ReflectionMask};

/// Signed pixel offset of the detected target from the image center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetObservation {
    pub dx: f64,
    pub dy: f64,
    pub found: bool,
}

impl TargetObservation {
    pub fn found(dx: f64, dy: f64) -> Self {
        Self { dx, dy, found: true }
    }

    pub fn lost() -> Self {
        Self {
            dx: 0.0,
            dy: 0.0,
            found: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub blur_sigma: f64,
    pub lk_window: usize,
    /// Grid spacing of LK sample points, pixels.
    pub lk_stride: usize,
    /// Minimum smaller eigenvalue of the window-averaged structure tensor.
    pub lk_min_eigen: f64,
    /// Flow magnitude (px/frame) above which a point counts as a reflection.
    pub flow_threshold: f64,
    pub mask_radius: f64,
    /// Canny thresholds in luminance per pixel.
    pub canny_low: f64,
    pub canny_high: f64,
    pub close_radius: usize,
    /// Contours enclosing fewer pixels are ignored.
    pub min_contour_area: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            blur_sigma: 2.0,
            lk_window: 9,
            lk_stride: 8,
            lk_min_eigen: 2e-4,
            flow_threshold: 0.5,
            mask_radius: 20.0,
            canny_low: 0.02,
            canny_high: 0.04,
            close_radius: 2,
            min_contour_area: 30,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.blur_sigma > 0.0) {
            return Err(Error::invalid("blur_sigma must be positive"));
        }
        if self.lk_window < 3 || self.lk_window.is_multiple_of(2) || self.lk_stride == 0 {
            return Err(Error::invalid("lk_window must be odd ≥ 3 and lk_stride positive"));
        }
        if !(self.canny_low > 0.0 && self.canny_low < self.canny_high) {
            return Err(Error::invalid("need 0 < canny_low < canny_high"));
        }
        if !(self.mask_radius > 0.0) {
            return Err(Error::invalid("mask_radius must be positive"));
        }
        Ok(())
    }
}

/// Intermediate products of one detection, for inspection and tests.
#[derive(Clone, Debug)]
pub struct Detection {
    pub observation: TargetObservation,
    pub flows: Vec<FlowVector>,
    pub mask: Option<ReflectionMask>,
    pub contour: Option<Contour>,
}

pub fn detect_target(prev: &GrayImage, curr: &GrayImage, cfg: &PipelineConfig) -> Result<TargetObservation> {
    detect_target_detailed(prev, curr, cfg).map(|d| d.observation)
}

/// Detection on each consecutive pair of `frames`; entry `k` pairs frames
/// `k` and `k + 1`. Pairs are processed through [`crate::par`].
pub fn detect_sequence(frames: &[GrayImage], cfg: &PipelineConfig) -> Vec<Result<TargetObservation>> {
    crate::par::map_indexed(frames.len().saturating_sub(1), |k| {
        detect_target(&frames[k], &frames[k + 1], cfg)
    })
}

pub fn detect_target_detailed(prev: &GrayImage, curr: &GrayImage, cfg: &PipelineConfig) -> Result<Detection> {
    if prev.width() != curr.width() || prev.height() != curr.height() {
        return Err(Error::DimensionMismatch {
            expected: prev.data().len(),
            actual: curr.data().len(),
        });
    }
    let (w, h) = (curr.width(), curr.height());
    let prev_b = gaussian_blur(prev, cfg.blur_sigma)?;
    let curr_b = gaussian_blur(curr, cfg.blur_sigma)?;

    let points = grid_points(w, h, cfg.lk_stride);
    let flows = lucas_kanade(&prev_b, &curr_b, &points, cfg.lk_window, cfg.lk_min_eigen)?;
    let mask = reflection_centroid(&flows, cfg.flow_threshold)
        .map(|c| ReflectionMask::new(c, cfg.mask_radius))
        .transpose()?;
    let masked = match &mask {
        Some(m) => apply_mask(&curr_b, m),
        None => curr_b,
    };

    let edges = canny(&masked, cfg.canny_low, cfg.canny_high)?;
    let contour = largest_contour(&edges, cfg.close_radius).filter(|c| c.area() >= cfg.min_contour_area.max(1));
    let observation = match &contour {
        Some(c) => {
            let (cx, cy) = contour_center(c);
            TargetObservation::found(cx + 0.5 - w as f64 / 2.0, cy + 0.5 - h as f64 / 2.0)
        }
        None => TargetObservation::lost(),
    };
    Ok(Detection {
        observation,
        flows,
        mask,
        contour,
    })
}
