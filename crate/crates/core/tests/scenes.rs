use landing_core::imaging::gaussian_blur;
use landing_core::simworld::*;
use landing_core::vision::*;
use landing_core::SimRng;
use rand::{Rng, SeedableRng};

fn visible_scene(rng: &mut SimRng, cam: &CameraModel, scene: &SceneConfig) -> WorldState {
    loop {
        let alt = rng.random_range(3.0..15.0);
        let half = alt * (cam.width as f64 / 2.0) / cam.f_px;
        let s = WorldState {
            uav: [0.0, 0.0, alt],
            boat: [rng.random_range(-half..half), rng.random_range(-half..half)],
            boat_yaw: rng.random_range(0.0..std::f64::consts::TAU),
            t: rng.random_range(1.0..50.0),
        };
        if hull_in_frame(&s, cam, scene, 2.0) {
            return s;
        }
    }
}

#[test]
fn rendered_hull_centroid_matches_projection() {
    let cam = CameraModel::default();
    let scene = SceneConfig {
        glint_count: 0,
        ..SceneConfig::default()
    };
    let threshold = (scene.water_base_luminance + scene.cabin_luminance) / 2.0;
    let mut rng = SimRng::seed_from_u64(31);
    for _ in 0..40 {
        let state = visible_scene(&mut rng, &cam, &scene);
        let img = render(&state, &cam, &scene, 5).unwrap();
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for y in 0..img.height() {
            for x in 0..img.width() {
                if img.get(x, y) > threshold {
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    n += 1.0;
                }
            }
        }
        let (px, py) = project(state.boat, &state, &cam).unwrap().unwrap();
        let err = (sx / n - px).hypot(sy / n - py);
        assert!(err <= 2.0, "alt {:.1}: centroid error {err:.2}", state.uav[2]);
    }
}

#[test]
fn reflection_centroid_sits_on_glints() {
    let cam = CameraModel::default();
    let scene = SceneConfig::default();
    let cfg = PipelineConfig::default();
    let mut rng = SimRng::seed_from_u64(32);
    let mut hits = 0;
    for _ in 0..30 {
        let state = visible_scene(&mut rng, &cam, &scene);
        let seed: u64 = rng.random();
        let d = {
            let (a, b) = render_pair(&state, &cam, &scene, seed).unwrap();
            detect_target_detailed(&a, &b, &cfg).unwrap()
        };
        let glints = glint_positions(&state, &cam, &scene, seed);
        let (gx, gy) = glints.iter().fold((0.0, 0.0), |(x, y), g| (x + g.0, y + g.1));
        let (gx, gy) = (gx / glints.len() as f64, gy / glints.len() as f64);
        if let Some(m) = d.mask {
            hits += usize::from((m.center.0 - gx).hypot(m.center.1 - gy) <= 6.0);
        }
    }
    assert!(hits >= 27, "{hits}/30 masks centered on the glint cluster");
}

#[test]
fn masked_disk_has_no_edges() {
    let cam = CameraModel::default();
    let scene = SceneConfig::default();
    let cfg = PipelineConfig::default();
    let mut rng = SimRng::seed_from_u64(33);
    for _ in 0..10 {
        let state = visible_scene(&mut rng, &cam, &scene);
        let img = render(&state, &cam, &scene, rng.random()).unwrap();
        let blurred = gaussian_blur(&img, cfg.blur_sigma).unwrap();
        let center = (rng.random_range(40.0..216.0), rng.random_range(40.0..216.0));
        let mask = ReflectionMask::new(center, 20.0).unwrap();
        let edges = canny(&apply_mask(&blurred, &mask), cfg.canny_low, cfg.canny_high).unwrap();
        let inner = ReflectionMask::new(center, 18.0).unwrap();
        for y in 0..edges.height() {
            for x in 0..edges.width() {
                assert!(
                    !(inner.contains(x, y) && edges.get(x, y)),
                    "edge at ({x},{y}) inside mask"
                );
            }
        }
    }
}

#[test]
fn detection_tracks_offset_across_altitudes() {
    let cam = CameraModel::default();
    let scene = SceneConfig::default();
    let cfg = PipelineConfig::default();
    let mut rng = SimRng::seed_from_u64(34);
    let mut good = 0;
    let n = 200;
    for _ in 0..n {
        let state = visible_scene(&mut rng, &cam, &scene);
        let (a, b) = render_pair(&state, &cam, &scene, rng.random()).unwrap();
        let obs = detect_target(&a, &b, &cfg).unwrap();
        let (gx, gy) = boat_offset_px(&state, &cam).unwrap();
        good += usize::from(obs.found && (obs.dx - gx).hypot(obs.dy - gy) <= 3.0);
    }
    assert!(good * 100 >= 93 * n, "{good}/{n}");
}

#[test]
fn sequence_detection_pairs_consecutive_frames() {
    let cam = CameraModel::default();
    let scene = SceneConfig::default();
    let cfg = PipelineConfig::default();
    let mut rng = SimRng::seed_from_u64(35);
    let mut state = visible_scene(&mut rng, &cam, &scene);
    let frames: Vec<_> = (0..4)
        .map(|_| {
            state.t += scene.frame_interval;
            render(&state, &cam, &scene, 9).unwrap()
        })
        .collect();
    let seq = detect_sequence(&frames, &cfg);
    assert_eq!(seq.len(), 3);
    for (k, r) in seq.into_iter().enumerate() {
        assert_eq!(r.unwrap(), detect_target(&frames[k], &frames[k + 1], &cfg).unwrap());
    }
    assert!(detect_sequence(&frames[..1], &cfg).is_empty());
}
