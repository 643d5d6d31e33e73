//! Sliding-window inference semantics: single-window equivalence, regional
//! independence, accumulation against a sequential oracle, and
//! window-order independence.

use pointseg::infer::{argmax_labels, infer_scene, window_schedule, ClassProbabilityField};
use pointseg::math::Vec3;
use pointseg::network::{forward, softmax_rows, FpsStart, Model, ModelConfig};
use pointseg::sampling::{extract_subvolume, sample_random, PointSet, SubVolumeSpec};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn cluster(rng: &mut ChaCha8Rng, m: usize, center: Vec3, spread: f64, dim: usize) -> PointSet {
    PointSet {
        positions: (0..m)
            .map(|_| {
                center
                    + Vec3::new(
                        rng.random_range(-spread..spread),
                        rng.random_range(-spread..spread),
                        rng.random_range(0.0..1.0),
                    )
            })
            .collect(),
        features: (0..m * dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
        feature_dim: dim,
        has_normal_channels: false,
        labels: Some((0..m).map(|_| rng.random_range(1..=3u16)).collect()),
        source_indices: (0..m as u32).collect(),
    }
}

fn merge_sets(a: &PointSet, b: &PointSet) -> PointSet {
    let mut positions = a.positions.clone();
    positions.extend_from_slice(&b.positions);
    let mut features = a.features.clone();
    features.extend_from_slice(&b.features);
    let mut labels = a.labels.clone().unwrap();
    labels.extend_from_slice(b.labels.as_ref().unwrap());
    PointSet {
        positions,
        features,
        feature_dim: a.feature_dim,
        has_normal_channels: false,
        labels: Some(labels),
        source_indices: (0..(a.len() + b.len()) as u32).collect(),
    }
}

fn test_model(subvolume_points: usize, dim: usize) -> Model {
    let mut config = ModelConfig::toy_sized(subvolume_points, 16, 3, dim);
    config.use_global = false;
    Model::new(config, 17).unwrap()
}

#[test]
fn single_window_equals_one_forward_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Exactly subvolume_points points: the window sample is a permutation,
    // so each vertex receives exactly one softmax row.
    let scene = cluster(&mut rng, 32, Vec3::new(0.5, 0.5, 0.0), 0.4, 2);
    let model = test_model(32, 2);
    let spec = SubVolumeSpec::new(0.5, 0.5, 5.0, 5.0);
    let field = infer_scene(&scene, &scene, &model, &[spec], 9).unwrap();

    // Every vertex sampled exactly once; rows are softmax rows.
    assert!(field.window_counts.iter().all(|&c| c == 1));
    for v in 0..field.n {
        let row_sum: f64 = field.row(v).iter().sum();
        assert!((row_sum - 1.0).abs() < 1e-9, "row {v} sums to {row_sum}");
    }

    // Oracle: replay the window by hand through the public pieces.
    let inside = extract_subvolume(&scene, &spec);
    assert_eq!(inside.len(), 32);
    let wseed = pointseg::infer::window_seed(9, &spec);
    let sampled = sample_random(&inside, 32, wseed);
    let sub = scene.gather(&sampled);
    let logits = forward(&model, &sub, None, FpsStart::Seeded(wseed)).unwrap();
    let probs = softmax_rows(&logits);
    for (row, &point) in sampled.iter().enumerate() {
        for c in 0..3 {
            let got = field.row(point)[c];
            let expect = probs.row(row)[c];
            assert!((got - expect).abs() < 1e-12, "vertex {point} class {c}");
        }
    }
}

#[test]
fn disjoint_windows_are_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let left = cluster(&mut rng, 24, Vec3::new(0.0, 0.0, 0.0), 0.5, 2);
    let right = cluster(&mut rng, 24, Vec3::new(10.0, 0.0, 0.0), 0.5, 2);
    let both = merge_sets(&left, &right);
    let model = test_model(24, 2);

    let w_left = SubVolumeSpec::new(0.0, 0.0, 2.0, 2.0);
    let w_right = SubVolumeSpec::new(10.0, 0.0, 2.0, 2.0);

    let combined = infer_scene(&both, &both, &model, &[w_left, w_right], 4).unwrap();
    let only_left = infer_scene(&left, &left, &model, &[w_left], 4).unwrap();

    // use_global = false, so the scene sample does not influence windows;
    // the left region's sums must match the standalone run exactly.
    for v in 0..left.len() {
        assert_eq!(combined.window_counts[v], only_left.window_counts[v]);
        for c in 0..3 {
            let a = combined.row(v)[c];
            let b = only_left.row(v)[c];
            assert!((a - b).abs() < 1e-12, "vertex {v} class {c}: {a} vs {b}");
        }
    }
}

#[test]
fn overlapping_windows_match_sequential_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scene = cluster(&mut rng, 60, Vec3::new(1.0, 1.0, 0.0), 1.5, 2);
    let model = test_model(24, 2);
    let schedule = window_schedule(
        &pointseg::math::Aabb::from_points(scene.positions.iter().copied()),
        1.5,
        0.75,
        0.25,
    );
    assert!(schedule.len() > 4, "need overlapping windows");
    let field = infer_scene(&scene, &scene, &model, &schedule, 31).unwrap();

    // Sequential oracle: same window loop written out longhand.
    let mut oracle = ClassProbabilityField::new(scene.len(), 3);
    for spec in &schedule {
        let inside = extract_subvolume(&scene, spec);
        if inside.is_empty() {
            continue;
        }
        // Reproduce the per-window seed by asking the library for a
        // single-window inference and folding it in.
        let one = infer_scene(&scene, &scene, &model, &[*spec], 31).unwrap();
        for v in 0..scene.len() {
            oracle.window_counts[v] += one.window_counts[v];
            for c in 0..3 {
                oracle.sums[v * 3 + c] += one.row(v)[c];
            }
        }
    }
    assert_eq!(field.window_counts, oracle.window_counts);
    for i in 0..field.sums.len() {
        assert!(
            (field.sums[i] - oracle.sums[i]).abs() <= 1e-6 * oracle.sums[i].abs().max(1.0),
            "sum {i}: {} vs {}",
            field.sums[i],
            oracle.sums[i]
        );
    }
}

#[test]
fn window_order_does_not_change_sums() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scene = cluster(&mut rng, 50, Vec3::new(1.0, 1.0, 0.0), 1.2, 2);
    let model = test_model(20, 2);
    let schedule = window_schedule(
        &pointseg::math::Aabb::from_points(scene.positions.iter().copied()),
        1.5,
        0.6,
        0.3,
    );
    let forward_order = infer_scene(&scene, &scene, &model, &schedule, 77).unwrap();
    let mut reversed = schedule.clone();
    reversed.reverse();
    let backward_order = infer_scene(&scene, &scene, &model, &reversed, 77).unwrap();
    assert_eq!(forward_order.window_counts, backward_order.window_counts);
    for i in 0..forward_order.sums.len() {
        assert!(
            (forward_order.sums[i] - backward_order.sums[i]).abs()
                <= 1e-6 * forward_order.sums[i].abs().max(1.0)
        );
    }
}

#[test]
fn forward_rows_are_softmax_normalized_through_inference() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let scene = cluster(&mut rng, 30, Vec3::ZERO, 0.5, 2);
    let model = test_model(30, 2);
    let sub = scene.clone();
    let logits = forward(&model, &sub, None, FpsStart::Zero).unwrap();
    let probs = softmax_rows(&logits);
    for r in 0..probs.rows {
        let s: f64 = probs.row(r).iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
    // Argmax labeling picks the densest class and leaves unseen vertices 0.
    let mut field = ClassProbabilityField::new(2, 3);
    field.sums[0..3].copy_from_slice(&[0.2, 0.3, 0.5]);
    field.window_counts[0] = 1;
    assert_eq!(argmax_labels(&field), vec![3, 0]);
}
