//! Sequential versus rayon execution of the batch workloads routed through
//! `landing_core::par`: detection over a frame sequence and independent
//! evaluation tests.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use landing_core::imaging::GrayImage;
use landing_core::mission::{run_test, GroundTruthObserver, PursuitPilot, Setting};
use landing_core::par;
use landing_core::simworld::{render, reset, CameraModel, SceneConfig};
use landing_core::vision::{detect_target, PipelineConfig};
use landing_core::SimRng;
use rand::SeedableRng;

fn frames(n: usize) -> Vec<GrayImage> {
    let (cam, scene) = (CameraModel::default(), SceneConfig::default());
    let mut rng = SimRng::seed_from_u64(1);
    let mut state = reset(&mut rng, 3.0, 8.0, &cam).unwrap();
    (0..n)
        .map(|_| {
            state.t += scene.frame_interval;
            render(&state, &cam, &scene, 7).unwrap()
        })
        .collect()
}

fn detection(c: &mut Criterion) {
    let cfg = PipelineConfig::default();
    let seq = frames(9);
    let pair = |k: usize| detect_target(&seq[k], &seq[k + 1], &cfg).unwrap();
    let mut group = c.benchmark_group("detect_sequence");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", 8), |b| {
        b.iter(|| black_box(par::map_indexed_sequential(8, pair)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function(BenchmarkId::new("parallel", 8), |b| {
        b.iter(|| black_box(par::map_indexed_parallel(8, pair)))
    });
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let setting = Setting::default();
    let test = |i: usize| {
        let mut observer = GroundTruthObserver { cam: setting.cam };
        run_test(&mut PursuitPilot::default(), &mut observer, &setting, i as u64).unwrap()
    };
    let mut group = c.benchmark_group("evaluation_tests");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new("sequential", 16), |b| {
        b.iter(|| black_box(par::map_indexed_sequential(16, test)))
    });
    #[cfg(feature = "parallel")]
    group.bench_function(BenchmarkId::new("parallel", 16), |b| {
        b.iter(|| black_box(par::map_indexed_parallel(16, test)))
    });
    group.finish();
}

criterion_group!(benches, detection, evaluation);
criterion_main!(benches);
