//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. `ACCEPTANCE_ONLY=1,3` restricts the run.

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use landing_cli::eval::{cmd_eval, truncate2, SuccessTable};
use landing_cli::train::{cmd_train, load_checkpoint};
use landing_cli::RunConfig;
use landing_core::ddpg::OuNoise;
use landing_core::imaging::{close, BinaryImage};
use landing_core::mission::{
    reward, run_episode, GroundTruthObserver, ObservationMode, Outcome, PursuitPilot, RewardConfig, RunMode, Setting,
    Spawn, TestOutcome,
};
use landing_core::neural::{
    check_input_gradient, check_parameter_gradients, read_tensors, write_tensors, Activation, Mlp,
};
use landing_core::simworld::{boat_offset_px, hull_in_frame, render_pair, CameraModel, SceneConfig, WorldState};
use landing_core::vision::{contour_center, detect_target, largest_contour, PipelineConfig};
use landing_core::SimRng;
use rand::{Rng, SeedableRng};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed <= limit
}

// 1. Reward-function fidelity.
fn reward_fidelity() -> Verdict {
    let start = Instant::now();
    let cfg = RewardConfig::default();
    let sentinel = cfg.lost_sentinel;
    let cases: [(f64, [f64; 3], [f64; 3]); 4] = [
        (9.9, [20.0, 5.0, 9.9], [250.0, 250.0, 250.0]),
        (10.0, [20.0, 5.0, 10.0], [250.0, 250.0, 250.0]),
        (10.1, [20.0, 5.0, 10.1], [0.1, 0.0, 0.0]),
        (sentinel, [2.0 * sentinel, 5.0, sentinel], [-10.0, -10.0, -10.0]),
    ];
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for (d_t, prevs, want) in cases {
        for (d_prev, w) in prevs.into_iter().zip(want) {
            checked += 1;
            let got = reward(d_t, d_prev, &cfg);
            if got.to_bits() != w.to_bits() {
                mismatches.push(format!("r({d_t}, {d_prev}) = {got}, want {w}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches.is_empty() && within(elapsed, Duration::from_secs(1));
    verdict(
        pass,
        format!(
            "{checked} cases, {} mismatches {mismatches:?}, {elapsed:.2?}",
            mismatches.len()
        ),
    )
}

// 2. Gradient correctness.
fn gradient_correctness() -> Verdict {
    let start = Instant::now();
    let acts = [Activation::Relu, Activation::Tanh, Activation::Identity];
    let mut rng = SimRng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let uniform = |rng: &mut SimRng, n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let spread = |net: &mut Mlp, rng: &mut SimRng| {
        for l in net.layers_mut() {
            let b = 1.5 / (l.input_dim() as f64).sqrt();
            l.weights_mut().iter_mut().for_each(|w| *w = rng.random_range(-b..b));
            l.biases_mut().iter_mut().for_each(|w| *w = rng.random_range(-0.5..0.5));
        }
    };
    let shapes: [&[usize]; 3] = [&[3, 6, 5, 2], &[4, 300, 200, 2], &[6, 300, 200, 1]];
    for dims in shapes {
        for hidden in acts {
            for head in acts {
                let layer_acts = [hidden, hidden, head];
                let mut net = Mlp::init(dims, &layer_acts, &mut rng).unwrap();
                spread(&mut net, &mut rng);
                let rows = 2;
                let x = uniform(&mut rng, rows * dims[0]);
                let w = uniform(&mut rng, rows * dims[3]);
                let indices: Option<Vec<usize>> = (net.param_count() > 2000).then(|| {
                    let mut ix = Vec::new();
                    let mut base = 0;
                    for l in net.layers() {
                        let n = l.weights().len() + l.biases().len();
                        ix.extend((0..25).map(|_| base + rng.random_range(0..n)));
                        base += n;
                    }
                    ix
                });
                let p = check_parameter_gradients(&net, &x, rows, &w, 1e-6, indices.as_deref()).unwrap();
                let i = check_input_gradient(&net, &x, rows, &w, 1e-6).unwrap();
                worst = worst.max(p.max_rel_error).max(i.max_rel_error);
                checked += p.checked + i.checked;
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-4 && within(elapsed, Duration::from_secs(30));
    verdict(
        pass,
        format!("27 nets up to (6,300,200,1), {checked} gradients, max rel error {worst:.2e}, {elapsed:.2?}"),
    )
}

/// A scene with the hull fully in frame at altitude 3–15 m.
fn visible_scene(rng: &mut SimRng, cam: &CameraModel, scene: &SceneConfig) -> WorldState {
    loop {
        let alt = rng.random_range(3.0..15.0);
        let half = alt * (cam.width as f64 / 2.0) / cam.f_px;
        let s = WorldState {
            uav: [0.0, 0.0, alt],
            boat: [rng.random_range(-half..half), rng.random_range(-half..half)],
            boat_yaw: rng.random_range(0.0..std::f64::consts::TAU),
            t: rng.random_range(1.0..100.0),
        };
        if hull_in_frame(&s, cam, scene, 2.0) {
            return s;
        }
    }
}

// 3. Vision accuracy.
fn vision_accuracy() -> Verdict {
    let cam = CameraModel::default();
    let scene = SceneConfig::default();
    let cfg = PipelineConfig::default();
    let mut rng = SimRng::seed_from_u64(3);
    let n = 200;
    let mut good = 0;
    let mut detect_time = Duration::ZERO;
    for _ in 0..n {
        let state = visible_scene(&mut rng, &cam, &scene);
        let seed: u64 = rng.random();
        let (prev, curr) = render_pair(&state, &cam, &scene, seed).unwrap();
        let t = Instant::now();
        let obs = detect_target(&prev, &curr, &cfg).unwrap();
        detect_time += t.elapsed();
        let (gx, gy) = boat_offset_px(&state, &cam).expect("hull in frame implies center in frame");
        if obs.found && (obs.dx - gx).hypot(obs.dy - gy) <= 3.0 {
            good += 1;
        }
    }
    let per_frame = detect_time / n;
    let rate = good as f64 / n as f64;
    let pass = rate >= 0.95 && per_frame <= Duration::from_millis(50);
    verdict(
        pass,
        format!(
            "{good}/{n} scenes within 3 px ({:.1}%), {per_frame:.2?} per frame",
            100.0 * rate
        ),
    )
}

// 4. OU statistics.
fn ou_statistics() -> Verdict {
    let (theta, sigma) = (0.15, 0.2);
    let mut noise = OuNoise::new(theta, sigma);
    let mut rng = SimRng::seed_from_u64(4);
    for _ in 0..1000 {
        noise.sample(&mut rng);
    }
    let steps = 100_000;
    let (mut sum, mut sq, mut count) = (0.0, 0.0, 0.0);
    for _ in 0..steps {
        for v in noise.sample(&mut rng) {
            sum += v;
            sq += v * v;
            count += 1.0;
        }
    }
    let mean = sum / count;
    let std = (sq / count - mean * mean).sqrt();
    let target = sigma / (2.0 * theta).sqrt();
    let rel = (std - target) / target;

    let mut decay = OuNoise::new(theta, 0.0);
    decay.x = [1.0, -0.5];
    let mut expected = decay.x;
    let mut exact = true;
    for _ in 0..200 {
        let got = decay.sample(&mut rng);
        for (e, g) in expected.iter_mut().zip(got) {
            *e *= 1.0 - theta;
            exact &= e.to_bits() == g.to_bits();
        }
    }
    let closed_form = (1.0f64 - theta).powi(200);
    let pass = rel.abs() <= 0.05 && exact;
    verdict(
        pass,
        format!(
            "std {std:.4} vs σ/√(2θ) {target:.4} ({:+.2}%); σ=0 decay exact {exact} (x200 {:.3e}, (1−θ)^200 {closed_form:.3e})",
            100.0 * rel,
            expected[0]
        ),
    )
}

// 5. Desk-scale learning.
fn desk_learning(root: &Path) -> Verdict {
    let mut lines = Vec::new();
    let mut passed = 0;
    let seeds = [1u64, 2, 3];
    for (k, seed) in seeds.into_iter().enumerate() {
        if passed >= 2 || k - passed >= 2 {
            lines.push(format!("seed {seed}: skipped, outcome decided"));
            continue;
        }
        let cfg = RunConfig {
            seed,
            ..RunConfig::default()
        };
        let out = root.join(format!("desk_seed{seed}"));
        let start = Instant::now();
        let summary = match cmd_train(&cfg, &out, |_| {}) {
            Ok(s) => s,
            Err(e) => {
                lines.push(format!("seed {seed}: training failed: {e}"));
                continue;
            }
        };
        let train_time = start.elapsed();
        let eval = match cmd_eval(&summary.checkpoint, &cfg, ObservationMode::Vision, &out) {
            Ok(e) => e,
            Err(e) => {
                lines.push(format!("seed {seed}: eval failed: {e}"));
                continue;
            }
        };
        let (success, first) = (eval.table.success_rate(), eval.table.first_episode_rate());
        let ok = within(train_time, Duration::from_secs(30 * 60)) && success >= 0.70 && first >= 0.50;
        passed += usize::from(ok);
        lines.push(format!(
            "seed {seed}: {} train {:.0}s ({} landings/{}), eval success {:.0}% first-episode {:.0}%",
            if ok { "ok" } else { "miss" },
            train_time.as_secs_f64(),
            summary.landings(),
            summary.episodes.len(),
            100.0 * success,
            100.0 * first
        ));
        eprintln!("  {}", lines.last().unwrap());
        eprintln!("{}", indent(&eval.table.to_string()));
    }
    verdict(passed >= 2, format!("{passed}/3 seeds pass; {}", lines.join("; ")))
}

fn indent(s: &str) -> String {
    s.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}

// 6. Scripted-policy sanity.
fn scripted_pursuit() -> Verdict {
    let start = Instant::now();
    let setting = Setting::default();
    let mut observer = GroundTruthObserver { cam: setting.cam };
    let mut landed = 0;
    let mut longest = 0;
    for i in 0..100u64 {
        let mut rng = SimRng::seed_from_u64(6_000 + i);
        let r = run_episode(
            &mut PursuitPilot::default(),
            &mut observer,
            &setting,
            Spawn::Random,
            RunMode::Eval,
            setting.episode.eval_max_steps,
            1,
            &mut rng,
        )
        .unwrap();
        landed += usize::from(r.outcome == Outcome::Landed);
        longest = longest.max(r.steps_taken);
    }
    let elapsed = start.elapsed();
    let pass = landed == 100 && within(elapsed, Duration::from_secs(300));
    verdict(
        pass,
        format!("{landed}/100 landings from ±4 m, longest {longest} steps, {elapsed:.2?}"),
    )
}

fn files_equal(a: &Path, b: &Path) -> bool {
    matches!((fs::read(a), fs::read(b)), (Ok(x), Ok(y)) if x == y)
}

// 7. Determinism.
fn determinism(root: &Path) -> Verdict {
    let cfg = RunConfig {
        seed: 77,
        episodes: 12,
        checkpoint_every: 6,
        ..RunConfig::default()
    };
    let (a, b) = (root.join("det_a"), root.join("det_b"));
    let ra = cmd_train(&cfg, &a, |_| {}).unwrap();
    cmd_train(&cfg, &b, |_| {}).unwrap();
    let mut names: BTreeSet<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.extend(fs::read_dir(&b).unwrap().map(|e| e.unwrap().file_name()));
    let identical = names.iter().all(|n| files_equal(&a.join(n), &b.join(n)));

    let bytes = fs::read(&ra.checkpoint).unwrap();
    let tensors = read_tensors(&mut bytes.as_slice()).unwrap();
    let mut rewritten = Vec::new();
    write_tensors(&mut rewritten, &tensors).unwrap();
    let agent = load_checkpoint(&ra.checkpoint).unwrap();
    let mut from_agent = Vec::new();
    write_tensors(&mut from_agent, &agent.to_tensors()).unwrap();
    let round_trip = rewritten == bytes && from_agent == bytes;
    verdict(
        identical && round_trip,
        format!(
            "{} files compared, byte-identical {identical}; checkpoint round trip bit-identical {round_trip} ({} bytes)",
            names.len(),
            bytes.len()
        ),
    )
}

/// Enclosed pixel sets of every 8-connected component, via a flood of the
/// 4-connected background from outside a one-pixel frame.
fn enclosed_regions(img: &BinaryImage) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (img.width(), img.height());
    let mut comp = vec![usize::MAX; w * h];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..w * h {
        if !img.get(s % w, s / w) || comp[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut k = 0;
        while k < members.len() {
            let (x, y) = ((members[k] % w) as i64, (members[k] / w) as i64);
            k += 1;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if img.get(nx as usize, ny as usize) && comp[j] == usize::MAX {
                        comp[j] = id;
                        members.push(j);
                    }
                }
            }
        }
        comps.push(members);
    }
    let (pw, ph) = (w + 2, h + 2);
    comps
        .iter()
        .enumerate()
        .map(|(id, _)| {
            let wall =
                |px: usize, py: usize| px >= 1 && py >= 1 && px <= w && py <= h && comp[(py - 1) * w + px - 1] == id;
            let mut outside = vec![false; pw * ph];
            let mut queue = VecDeque::from([(0usize, 0usize)]);
            outside[0] = true;
            while let Some((x, y)) = queue.pop_front() {
                let nbrs = [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)];
                for (nx, ny) in nbrs {
                    if nx < pw && ny < ph && !outside[ny * pw + nx] && !wall(nx, ny) {
                        outside[ny * pw + nx] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            let mut region = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if !outside[(y + 1) * pw + x + 1] {
                        region.push((x, y));
                    }
                }
            }
            region
        })
        .collect()
}

fn random_binary(rng: &mut SimRng) -> BinaryImage {
    let (w, h) = (rng.random_range(8..40), rng.random_range(8..40));
    let mut img = BinaryImage::zeros(w, h);
    match rng.random_range(0..3) {
        0 => {
            let p = rng.random_range(0.05..0.5);
            for y in 0..h {
                for x in 0..w {
                    img.set(x, y, rng.random_bool(p));
                }
            }
        }
        _ => {
            for _ in 0..rng.random_range(1..5) {
                let (x0, y0) = (rng.random_range(0..w), rng.random_range(0..h));
                let (x1, y1) = (
                    (x0 + rng.random_range(2..12)).min(w - 1),
                    (y0 + rng.random_range(2..12)).min(h - 1),
                );
                let gap = rng.random_range(0..4);
                for x in x0..=x1 {
                    for y in [y0, y1] {
                        if x % 7 != gap {
                            img.set(x, y, true);
                        }
                    }
                }
                for y in y0..=y1 {
                    img.set(x0, y, true);
                    img.set(x1, y, true);
                }
            }
        }
    }
    img
}

// 8. Morphology and contour oracles.
fn morphology_oracles() -> Verdict {
    let start = Instant::now();
    let mut rng = SimRng::seed_from_u64(8);
    let (mut superset, mut area_ok, mut center_ok) = (0, 0, 0);
    let n = 500;
    for _ in 0..n {
        let img = random_binary(&mut rng);
        let r = rng.random_range(1..=3);
        let closed = close(&img, r);
        superset += usize::from(img.is_subset_of(&closed));

        let contour = largest_contour(&closed, 0);
        let oracle = enclosed_regions(&closed);
        let best = oracle.iter().map(Vec::len).max();
        match (contour, best) {
            (None, None) => {
                area_ok += 1;
                center_ok += 1;
            }
            (Some(c), Some(best)) => {
                area_ok += usize::from(c.area() == best);
                let m = c.region.len() as f64;
                let bx = c.region.iter().map(|p| p.0 as f64).sum::<f64>() / m;
                let by = c.region.iter().map(|p| p.1 as f64).sum::<f64>() / m;
                let same_set = oracle.contains(&c.region);
                let (cx, cy) = contour_center(&c);
                center_ok += usize::from(same_set && (cx - bx).abs() <= 1e-9 && (cy - by).abs() <= 1e-9);
            }
            _ => {}
        }
    }
    let elapsed = start.elapsed();
    let pass = superset == n && area_ok == n && center_ok == n && within(elapsed, Duration::from_secs(30));
    verdict(
        pass,
        format!("closing ⊇ input {superset}/{n}, area = flood fill {area_ok}/{n}, centroid = pixel mean {center_ok}/{n}, {elapsed:.2?}"),
    )
}

fn table_construction_ok(t: &SuccessTable) -> bool {
    let sum: f64 = t.rows.iter().map(|r| r.absolute_pct).sum();
    let relative_ok = t.rows.iter().all(|r| {
        let want = if r.episodes_used == 0 {
            0.0
        } else {
            100.0 / r.episodes_used as f64
        };
        r.relative_pct == want
    });
    (sum - 100.0).abs() <= 0.01 && relative_ok
}

// 9. Table report format.
fn table_format(root: &Path) -> Verdict {
    let mut outcomes = Vec::new();
    // Published rows; the published absolute column sums to 96, so the
    // first-episode row absorbs the remaining four tests.
    for (e, n) in [(0, 15), (1, 79), (2, 2), (3, 2), (4, 1), (6, 1)] {
        outcomes.extend(std::iter::repeat_n(
            TestOutcome {
                episodes_used: e,
                success: e > 0,
                elapsed_seconds: 0.0,
            },
            n,
        ));
    }
    let published = SuccessTable::from_outcomes(&outcomes);
    let shown: Vec<(usize, f64)> = published
        .rows
        .iter()
        .map(|r| (r.episodes_used, truncate2(r.relative_pct)))
        .collect();
    let published_ok = table_construction_ok(&published)
        && shown == [(0, 0.0), (1, 100.0), (2, 50.0), (3, 33.33), (4, 25.0), (6, 16.66)]
        && published.to_string().contains("16.66");

    let cfg = RunConfig {
        seed: 99,
        episodes: 6,
        eval_tests: 20,
        checkpoint_every: 0,
        ..RunConfig::default()
    };
    let dir = root.join("table");
    let trained = cmd_train(&cfg, &dir, |_| {}).unwrap();
    let eval = cmd_eval(&trained.checkpoint, &cfg, ObservationMode::GroundTruth, &dir).unwrap();
    let csv_rows = fs::read_to_string(&eval.tests_csv).unwrap().lines().count();
    let eval_ok = table_construction_ok(&eval.table) && csv_rows == 21;
    eprintln!("{}", indent(&published.to_string()));
    verdict(
        published_ok && eval_ok,
        format!(
            "published distribution reproduced {published_ok}; live eval table ({} rows) sums to 100% with relative = 100/e {eval_ok}",
            eval.table.rows.len()
        ),
    )
}

fn main() {
    let only: Option<BTreeSet<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path().to_path_buf();

    type Check<'a> = Box<dyn Fn() -> Verdict + 'a>;
    let criteria: Vec<(u32, &str, Check)> = vec![
        (1, "reward-function fidelity", Box::new(reward_fidelity)),
        (2, "gradient correctness", Box::new(gradient_correctness)),
        (3, "vision accuracy", Box::new(vision_accuracy)),
        (4, "OU statistics", Box::new(ou_statistics)),
        (5, "desk-scale learning", Box::new(|| desk_learning(&root))),
        (6, "scripted-policy sanity", Box::new(scripted_pursuit)),
        (7, "determinism", Box::new(|| determinism(&root))),
        (8, "morphology/contour oracles", Box::new(morphology_oracles)),
        (9, "table report format", Box::new(|| table_format(&root))),
    ];

    let mut failures = 0;
    for (id, name, check) in &criteria {
        if only.as_ref().is_some_and(|o| !o.contains(id)) {
            continue;
        }
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failures += usize::from(!v.pass);
        println!(
            "criterion {id} {}: {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("acceptance: {failures} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all selected criteria passed");
}
