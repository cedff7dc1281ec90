//! Fixtures shared by the criterion benchmarks.

use dccause::seed::rng_from_seed;
use dccause::synth::{gen_anm, gen_reference_set_model, standard_noise_domain};
use dccause::{DiscreteModel, PairedSample};

/// A `(size x size)` reference-set model and a sample of `n` draws from it.
pub fn reference_fixture(size: usize, n: usize, seed: u64) -> (DiscreteModel, PairedSample) {
    let mut rng = rng_from_seed(seed);
    let model = gen_reference_set_model(&mut rng, size, size, None).expect("valid sizes");
    let sample = model.sample(n, &mut rng).expect("n >= 1");
    (model, sample)
}

/// A 30-value additive noise model with `noise` noise values and a sample.
pub fn anm_fixture(noise: usize, n: usize, seed: u64) -> (DiscreteModel, PairedSample) {
    let mut rng = rng_from_seed(seed);
    let domain = standard_noise_domain(noise).expect("one of 2, 3, 5, 7");
    let model = gen_anm(&mut rng, 30, 30, &domain).expect("valid model");
    let sample = model.sample(n, &mut rng).expect("n >= 1");
    (model, sample)
}
