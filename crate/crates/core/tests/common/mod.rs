//! Shared samplers for the property suites. Everything is driven by a seeded
//! ChaCha stream so every suite is reproducible.
#![allow(dead_code)] // each suite uses its own subset

use horolab::{GroupElement, LieVector, PointH2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lie vector with Frobenius norm uniform in `(0, max_norm]`.
pub fn random_lie(rng: &mut ChaCha8Rng, max_norm: f64) -> LieVector {
    loop {
        let raw = LieVector {
            x11: rng.gen_range(-1.0..1.0),
            x12: rng.gen_range(-1.0..1.0),
            x21: rng.gen_range(-1.0..1.0),
        };
        let norm = raw.norm();
        if norm < 1e-6 {
            continue;
        }
        return raw.scale(rng.gen_range(0.0..=1.0) * max_norm / norm);
    }
}

/// Group element `exp(X)` for a random Lie vector of norm at most `max_norm`.
pub fn random_element(rng: &mut ChaCha8Rng, max_norm: f64) -> GroupElement {
    random_lie(rng, max_norm).exp()
}

/// Canonical element with all four entries in `[-5, 5]`.
pub fn random_entries_element(rng: &mut ChaCha8Rng) -> GroupElement {
    loop {
        let a: f64 = rng.gen_range(-5.0..5.0);
        if a.abs() < 0.25 {
            continue;
        }
        let b: f64 = rng.gen_range(-5.0..5.0);
        let c: f64 = rng.gen_range(-5.0..5.0);
        let d = (1.0 + b * c) / a;
        if d.abs() > 5.0 {
            continue;
        }
        return GroupElement::from_entries(a, b, c, d).expect("det is 1 by construction");
    }
}

pub fn random_point(rng: &mut ChaCha8Rng) -> PointH2 {
    PointH2::new(rng.gen_range(-5.0..5.0), rng.gen_range(0.2..5.0)).unwrap()
}
