//! Seeded, order-independent sampling.
//!
//! Sample `i` draws from its own ChaCha8 stream (`seed`, stream `i`), so the
//! sample set does not depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::manifold::ChartedManifold;
use crate::sphere::SphereBundleChart;
use crate::tangent::BundlePoint;

pub fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `f(i, rng_i)` for `i < count`, evaluated in parallel and returned in order.
pub fn par_samples<T, F>(seed: u64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(i, &mut rng_for(seed, i as u64)))
        .collect()
}

/// Fiber vectors are drawn from `[−1, 1]^m` and pushed off the zero section.
pub fn tangent_point<R: Rng>(manifold: &ChartedManifold, rng: &mut R) -> BundlePoint {
    let x = manifold.sample_point(rng);
    let mut u: Vec<f64> = (0..manifold.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = crate::linalg::norm(&u);
    if n < 0.1 {
        u[0] += if u[0] >= 0.0 { 0.5 } else { -0.5 };
    }
    BundlePoint::new(x, u)
}

pub fn tangent_points(manifold: &ChartedManifold, seed: u64, count: usize) -> Vec<BundlePoint> {
    par_samples(seed, count, |_, rng| tangent_point(manifold, rng))
}

pub fn chart_points(chart: &SphereBundleChart, seed: u64, count: usize) -> Vec<Vec<f64>> {
    par_samples(seed, count, |_, rng| chart.sample(rng))
}

pub fn base_points(manifold: &ChartedManifold, seed: u64, count: usize) -> Vec<Vec<f64>> {
    par_samples(seed, count, |_, rng| manifold.sample_point(rng))
}

/// Random vector with entries in `[−1, 1]`.
pub fn vector<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
