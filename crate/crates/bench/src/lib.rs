//! Deterministic inputs shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use uranus_core::synth::{generate_truth, simulate_sensors, NoiseModel, PatternId};
use uranus_core::{SensorName, SensorReading, SensorSpec};

/// `n` rows of `p` features; the target is a noisy linear mix of the first
/// three features and the class is the sign pattern of the first two.
pub fn table(n: usize, p: usize, seed: u64) -> (Vec<Vec<Option<f64>>>, Vec<f64>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, 1.0).expect("valid sigma");
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let r: Vec<f64> = (0..p).map(|_| d.sample(&mut rng)).collect();
        y.push(r[0] * 2.0 - r[1] + 0.5 * r[2.min(p - 1)] + 0.1 * d.sample(&mut rng));
        labels.push(usize::from(r[0] > 0.0) * 2 + usize::from(r[1.min(p - 1)] > 0.0));
        rows.push(r.into_iter().map(Some).collect());
    }
    (rows, y, labels)
}

/// Gaussian blobs with unit spread, centres `sep` apart on a line.
pub fn blobs(k: usize, per: usize, sep: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Normal::new(0.0, 1.0).expect("valid sigma");
    (0..k * per)
        .map(|i| vec![(i / per) as f64 * sep + d.sample(&mut rng), d.sample(&mut rng)])
        .collect()
}

/// Simulated readings of every sensor for one pattern.
pub fn readings(pattern: PatternId, seed: u64) -> Vec<(SensorName, Vec<SensorReading>)> {
    let truth = generate_truth(&pattern.pattern(), 1000, seed).expect("built-in pattern");
    let noise = NoiseModel {
        seed,
        ..NoiseModel::default()
    };
    simulate_sensors(&truth, &SensorSpec::all(), &noise).expect("default noise model")
}
