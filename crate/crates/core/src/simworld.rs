//! Desk-scale stand-in for the photorealistic simulator: planar UAV
//! kinematics with constant descent, a static boat, a downward pinhole camera
//! and a procedural water renderer with moving sun glints.
//!
//! Coordinates: world x/y on the water plane in meters, z is altitude above
//! the water. Image pixel `(i, j)` covers `[i, i+1) × [j, j+1)` in continuous
//! image coordinates, so the principal point `(width/2, height/2)` sits on a
//! pixel corner for even sizes.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::SimRng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldState {
    /// UAV position (x, y, altitude) in meters.
    pub uav: [f64; 3],
    /// Boat center on the water plane.
    pub boat: [f64; 2],
    pub boat_yaw: f64,
    /// Simulation clock in seconds.
    pub t: f64,
}

impl WorldState {
    pub fn altitude(&self) -> f64 {
        self.uav[2]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraModel {
    pub f_px: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            f_px: 256.0,
            width: 256,
            height: 256,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_px > 0.0) || self.width == 0 || self.height == 0 {
            return Err(Error::invalid("camera needs positive focal length and size"));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    /// Whether a continuous image point lies inside the frame.
    pub fn contains(&self, px: f64, py: f64) -> bool {
        px >= 0.0 && py >= 0.0 && px < self.width as f64 && py < self.height as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub glint_count: usize,
    /// Glint speed in image pixels per camera frame.
    pub glint_speed: f64,
    /// Glint disk radius in pixels.
    pub glint_radius: f64,
    pub glint_luminance: f64,
    /// Radius (px) of the region the glint cluster occupies.
    pub glint_spread: f64,
    /// Peak ripple deviation from the base luminance.
    pub ripple_amplitude: f64,
    /// Ripple wavelength on the water, meters.
    pub ripple_wavelength: f64,
    /// Ripple phase speed, meters per second.
    pub ripple_speed: f64,
    pub boat_length: f64,
    pub boat_width: f64,
    pub water_base_luminance: f64,
    pub boat_luminance: f64,
    pub cabin_luminance: f64,
    /// Touchdown altitude: descent stops here.
    pub deck_height: f64,
    /// Constant vertical speed, m/s.
    pub descent_rate: f64,
    /// Camera frame period, seconds. Detection compares frames this far apart.
    pub frame_interval: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            glint_count: 6,
            glint_speed: 2.0,
            glint_radius: 2.5,
            glint_luminance: 0.95,
            glint_spread: 10.0,
            ripple_amplitude: 0.02,
            ripple_wavelength: 1.0,
            ripple_speed: 0.3,
            boat_length: 0.8,
            boat_width: 0.35,
            water_base_luminance: 0.35,
            boat_luminance: 0.75,
            cabin_luminance: 0.5,
            deck_height: 1.5,
            descent_rate: 0.1,
            frame_interval: 1.0 / 30.0,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let lums = [
            self.water_base_luminance,
            self.boat_luminance,
            self.cabin_luminance,
            self.glint_luminance,
        ];
        if lums.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::invalid("luminances must lie in [0, 1]"));
        }
        if (self.boat_luminance - self.water_base_luminance).abs() < 0.3 {
            return Err(Error::invalid("boat/water contrast must be at least 0.3"));
        }
        if !(self.boat_length > 0.0 && self.boat_width > 0.0) {
            return Err(Error::invalid("boat dimensions must be positive"));
        }
        if !(self.deck_height > 0.0 && self.descent_rate >= 0.0 && self.frame_interval > 0.0) {
            return Err(Error::invalid("deck height and frame interval must be positive"));
        }
        if !(self.ripple_amplitude >= 0.0 && self.ripple_wavelength > 0.0) {
            return Err(Error::invalid("ripple parameters out of range"));
        }
        if !(self.glint_radius > 0.0 && self.glint_spread >= 0.0 && self.glint_speed >= 0.0) {
            return Err(Error::invalid("glint parameters out of range"));
        }
        Ok(())
    }
}

/// Upper bound on each planar velocity component, m/s.
pub const MAX_PLANAR_SPEED: f64 = 0.25;

/// Advances the UAV under a planar velocity command with constant descent.
pub fn step(state: &WorldState, cmd: [f64; 2], dt: f64, scene: &SceneConfig) -> Result<WorldState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if cmd.iter().any(|v| !v.is_finite() || v.abs() > MAX_PLANAR_SPEED + 1e-12) {
        return Err(Error::invalid(format!(
            "velocity command {cmd:?} exceeds ±{MAX_PLANAR_SPEED} m/s"
        )));
    }
    let mut next = *state;
    next.uav[0] += cmd[0] * dt;
    next.uav[1] += cmd[1] * dt;
    next.uav[2] = (state.uav[2] - scene.descent_rate * dt).max(scene.deck_height);
    next.t += dt;
    Ok(next)
}

/// Pinhole projection of a water-plane point into the downward camera.
/// `None` when the point falls outside the frame.
pub fn project(world_xy: [f64; 2], state: &WorldState, cam: &CameraModel) -> Result<Option<(f64, f64)>> {
    let alt = state.altitude();
    if !(alt > 0.0) {
        return Err(Error::invalid("projection needs positive altitude"));
    }
    let (cx, cy) = cam.center();
    let px = cx + cam.f_px * (world_xy[0] - state.uav[0]) / alt;
    let py = cy + cam.f_px * (world_xy[1] - state.uav[1]) / alt;
    Ok(cam.contains(px, py).then_some((px, py)))
}

/// Ground-truth pixel offset of the boat center from the image center.
pub fn boat_offset_px(state: &WorldState, cam: &CameraModel) -> Option<(f64, f64)> {
    let (cx, cy) = cam.center();
    project(state.boat, state, cam)
        .ok()
        .flatten()
        .map(|(px, py)| (px - cx, py - cy))
}

/// Hull corners in continuous image coordinates.
pub fn hull_corners_px(state: &WorldState, cam: &CameraModel, scene: &SceneConfig) -> [(f64, f64); 4] {
    let (c, s) = (state.boat_yaw.cos(), state.boat_yaw.sin());
    let (hl, hw) = (scene.boat_length / 2.0, scene.boat_width / 2.0);
    let (cx, cy) = cam.center();
    let k = cam.f_px / state.altitude();
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)].map(|(u, v)| {
        let wx = state.boat[0] + c * u - s * v;
        let wy = state.boat[1] + s * u + c * v;
        (cx + k * (wx - state.uav[0]), cy + k * (wy - state.uav[1]))
    })
}

/// Whether the whole hull projects inside the frame with `margin` pixels to spare.
pub fn hull_in_frame(state: &WorldState, cam: &CameraModel, scene: &SceneConfig, margin: f64) -> bool {
    hull_corners_px(state, cam, scene)
        .iter()
        .all(|&(x, y)| x >= margin && y >= margin && x <= cam.width as f64 - margin && y <= cam.height as f64 - margin)
}

/// Fresh episode: UAV at the origin at `start_altitude`, boat offset uniform in
/// `[−max_offset, max_offset]²` (redrawn until its center is in view) with a
/// uniform heading.
pub fn reset<R: Rng + ?Sized>(
    rng: &mut R,
    max_offset: f64,
    start_altitude: f64,
    cam: &CameraModel,
) -> Result<WorldState> {
    if !(max_offset >= 0.0) || !(start_altitude > 0.0) {
        return Err(Error::invalid("reset needs max_offset ≥ 0 and positive altitude"));
    }
    let half_fov = start_altitude * (cam.width.min(cam.height) as f64 / 2.0) / cam.f_px;
    if max_offset > 0.0 && half_fov <= 0.0 {
        return Err(Error::invalid("camera field of view is empty"));
    }
    for _ in 0..10_000 {
        let bx = if max_offset > 0.0 {
            rng.random_range(-max_offset..=max_offset)
        } else {
            0.0
        };
        let by = if max_offset > 0.0 {
            rng.random_range(-max_offset..=max_offset)
        } else {
            0.0
        };
        let yaw = rng.random_range(0.0..TAU);
        let state = WorldState {
            uav: [0.0, 0.0, start_altitude],
            boat: [bx, by],
            boat_yaw: yaw,
            t: 0.0,
        };
        if project(state.boat, &state, cam)?.is_some() {
            return Ok(state);
        }
    }
    Err(Error::invalid("could not place the boat inside the field of view"))
}

/// Touchdown reached with the boat center within `threshold_px` of the image center.
pub fn landed(state: &WorldState, cam: &CameraModel, scene: &SceneConfig, threshold_px: f64) -> bool {
    state.altitude() <= scene.deck_height + 1e-9
        && boat_offset_px(state, cam).is_some_and(|(dx, dy)| dx.hypot(dy) <= threshold_px)
}

/// Per-seed glint layout: a camera-fixed cluster of orbiting disks.
#[derive(Clone, Debug)]
struct GlintLayout {
    anchors: Vec<(f64, f64)>,
    phases: Vec<f64>,
    orbit: f64,
}

const GLINT_ORBIT_PX: f64 = 3.0;

impl GlintLayout {
    fn new(seed: u64, cam: &CameraModel, scene: &SceneConfig) -> Self {
        let mut rng = SimRng::seed_from_u64(seed ^ 0x6c69_6e74_u64.rotate_left(17));
        let (cx, cy) = cam.center();
        let half = cam.width.min(cam.height) as f64 / 2.0;
        // The specular spot sits off-nadir for a low sun: an annulus around
        // the principal point.
        let r = rng.random_range(0.45 * half..0.75 * half);
        let a = rng.random_range(0.0..TAU);
        let (gx, gy) = (cx + r * a.cos(), cy + r * a.sin());
        let mut anchors = Vec::with_capacity(scene.glint_count);
        let mut phases = Vec::with_capacity(scene.glint_count);
        for _ in 0..scene.glint_count {
            let rr = scene.glint_spread * rng.random::<f64>().sqrt();
            let aa = rng.random_range(0.0..TAU);
            anchors.push((gx + rr * aa.cos(), gy + rr * aa.sin()));
            phases.push(rng.random_range(0.0..TAU));
        }
        Self {
            anchors,
            phases,
            orbit: GLINT_ORBIT_PX,
        }
    }

    fn positions(&self, t: f64, scene: &SceneConfig) -> Vec<(f64, f64)> {
        let frame = t / scene.frame_interval;
        let omega = scene.glint_speed / self.orbit;
        self.anchors
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(i, (&(ax, ay), &ph))| {
                // Alternate orbit direction so the cluster does not rotate rigidly.
                let dir = if i % 2 == 0 { 1.0 } else { -1.0 };
                let ang = ph + dir * omega * frame;
                (ax + self.orbit * ang.cos(), ay + self.orbit * ang.sin())
            })
            .collect()
    }
}

/// Image-space glint centers at `state.t` for a given seed.
pub fn glint_positions(state: &WorldState, cam: &CameraModel, scene: &SceneConfig, seed: u64) -> Vec<(f64, f64)> {
    GlintLayout::new(seed, cam, scene).positions(state.t, scene)
}

/// Renders the downward camera view. Deterministic in `(state, cam, scene, seed)`.
pub fn render(state: &WorldState, cam: &CameraModel, scene: &SceneConfig, seed: u64) -> Result<GrayImage> {
    let alt = state.altitude();
    if !(alt > 0.0) {
        return Err(Error::invalid("render needs positive altitude"));
    }
    let (w, h) = (cam.width, cam.height);
    let (cx, cy) = cam.center();
    let m_per_px = alt / cam.f_px;
    let k = TAU / scene.ripple_wavelength;
    let phase = k * scene.ripple_speed * state.t;
    let amp = scene.ripple_amplitude;

    // Water: two crossing travelling waves, bounded by ±amp.
    let col_wave: Vec<f64> = (0..w)
        .map(|i| {
            let wx = state.uav[0] + (i as f64 + 0.5 - cx) * m_per_px;
            (k * wx - phase).sin()
        })
        .collect();
    let row_wave: Vec<f64> = (0..h)
        .map(|j| {
            let wy = state.uav[1] + (j as f64 + 0.5 - cy) * m_per_px;
            (0.8 * k * wy + 0.6 * phase + PI / 3.0).sin()
        })
        .collect();
    let mut data = Vec::with_capacity(w * h);
    for &rw in &row_wave {
        for &cw in &col_wave {
            data.push(scene.water_base_luminance + 0.5 * amp * (cw + rw));
        }
    }

    // Glints on the water.
    let glints = GlintLayout::new(seed, cam, scene).positions(state.t, scene);
    let r2 = scene.glint_radius * scene.glint_radius;
    for &(gx, gy) in &glints {
        let x0 = (gx - scene.glint_radius).floor().max(0.0) as usize;
        let y0 = (gy - scene.glint_radius).floor().max(0.0) as usize;
        let x1 = ((gx + scene.glint_radius).ceil().max(0.0) as usize).min(w);
        let y1 = ((gy + scene.glint_radius).ceil().max(0.0) as usize).min(h);
        for j in y0..y1 {
            for i in x0..x1 {
                let (dx, dy) = (i as f64 + 0.5 - gx, j as f64 + 0.5 - gy);
                if dx * dx + dy * dy <= r2 {
                    data[j * w + i] = scene.glint_luminance;
                }
            }
        }
    }

    // Hull with a cabin, occluding the water.
    let corners = hull_corners_px(state, cam, scene);
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y) in &corners {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let clampi = |v: f64, hi: usize| (v.max(0.0) as usize).min(hi);
    let (i0, i1) = (clampi(xmin.floor(), w), clampi(xmax.ceil() + 1.0, w));
    let (j0, j1) = (clampi(ymin.floor(), h), clampi(ymax.ceil() + 1.0, h));
    let (c, s) = (state.boat_yaw.cos(), state.boat_yaw.sin());
    let (hl, hw) = (scene.boat_length / 2.0, scene.boat_width / 2.0);
    for j in j0..j1 {
        let ry = state.uav[1] + (j as f64 + 0.5 - cy) * m_per_px - state.boat[1];
        for i in i0..i1 {
            let rx = state.uav[0] + (i as f64 + 0.5 - cx) * m_per_px - state.boat[0];
            let u = c * rx + s * ry;
            let v = -s * rx + c * ry;
            if u.abs() <= hl && v.abs() <= hw {
                let cabin = u >= -0.7 * hl && u <= 0.1 * hl && v.abs() <= 0.6 * hw;
                data[j * w + i] = if cabin {
                    scene.cabin_luminance
                } else {
                    scene.boat_luminance
                };
            }
        }
    }

    for v in &mut data {
        *v = v.clamp(0.0, 1.0);
    }
    GrayImage::new(w, h, data)
}

/// The two most recent camera frames at `state`: one frame period earlier
/// (same pose; the UAV moves well under a pixel in that time) and now.
pub fn render_pair(
    state: &WorldState,
    cam: &CameraModel,
    scene: &SceneConfig,
    seed: u64,
) -> Result<(GrayImage, GrayImage)> {
    let mut earlier = *state;
    earlier.t -= scene.frame_interval;
    Ok((render(&earlier, cam, scene, seed)?, render(state, cam, scene, seed)?))
}
