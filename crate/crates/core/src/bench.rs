//! Wall-clock comparison of the two multiplication paths.

use std::hint::black_box;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::multicomplex::Multicomplex;
use crate::units::check_order;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MulTiming {
    pub order: u32,
    pub pairs: usize,
    /// Best-of-rounds nanoseconds per product.
    pub direct_ns: f64,
    pub idempotent_ns: f64,
    pub speedup: f64,
}

/// Random operands with coefficients uniform in `[-1, 1]`.
pub fn random_multicomplex(rng: &mut impl Rng, order: u32) -> Multicomplex {
    let coeffs = (0..1usize << order).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    Multicomplex::from_coeffs(order, coeffs).expect("finite coefficients")
}

fn seconds<F: FnMut()>(mut f: F) -> f64 {
    let t = Instant::now();
    f();
    t.elapsed().as_secs_f64()
}

/// Times `pairs` products on each path, `rounds` times, keeping the fastest
/// round of each.
pub fn time_mul(order: u32, pairs: usize, rounds: usize, seed: u64) -> Result<MulTiming> {
    check_order(order, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops: Vec<(Multicomplex, Multicomplex)> = (0..pairs.max(1))
        .map(|_| (random_multicomplex(&mut rng, order), random_multicomplex(&mut rng, order)))
        .collect();
    // alternate the two paths so drift in machine load hits both equally
    let (mut direct, mut idempotent) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..rounds.max(1) {
        direct = direct.min(seconds(|| {
            for (a, b) in &ops {
                black_box(black_box(a).mul_direct(black_box(b)).unwrap());
            }
        }));
        idempotent = idempotent.min(seconds(|| {
            for (a, b) in &ops {
                black_box(black_box(a).mul_idempotent(black_box(b)).unwrap());
            }
        }));
    }
    let per = 1e9 / ops.len() as f64;
    Ok(MulTiming {
        order,
        pairs: ops.len(),
        direct_ns: direct * per,
        idempotent_ns: idempotent * per,
        speedup: direct / idempotent,
    })
}
