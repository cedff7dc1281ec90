use dccause::seed::{derive_seed, rng_from_seed};
use dccause::synth::{gen_anm, gen_random_pmf, gen_reference_set_model, standard_noise_domain};
use dccause::{JointPmf, Mechanism};
use proptest::prelude::*;

fn l1(a: &JointPmf, b: &JointPmf) -> f64 {
    let mut total = 0.0;
    for (i, x) in b.x_support().iter().enumerate() {
        for (j, y) in b.y_support().iter().enumerate() {
            let p = match (
                a.x_support().binary_search(x),
                a.y_support().binary_search(y),
            ) {
                (Ok(r), Ok(c)) => a.get(r, c),
                _ => 0.0,
            };
            total += (p - b.get(i, j)).abs();
        }
    }
    total
}

#[test]
fn samples_converge_to_exact_joint() {
    let mut close = 0;
    for trial in 0..100 {
        let mut rng = rng_from_seed(derive_seed(8, &[trial]));
        let model = if trial % 2 == 0 {
            gen_anm(&mut rng, 10, 10, &standard_noise_domain(3).unwrap()).unwrap()
        } else {
            gen_reference_set_model(&mut rng, 6, 6, None).unwrap()
        };
        let exact = model.exact_joint().unwrap();
        let empirical = JointPmf::estimate(&model.sample(4000, &mut rng).unwrap()).unwrap();
        if l1(&empirical, &exact) < 0.1 {
            close += 1;
        }
    }
    assert!(close >= 95, "{close}/100 within 0.1");
}

#[test]
fn model_round_trips_through_json() {
    let mut rng = rng_from_seed(3);
    let model = gen_reference_set_model(&mut rng, 15, 15, None).unwrap();
    let text = serde_json::to_string(&model).unwrap();
    assert_eq!(
        serde_json::from_str::<dccause::DiscreteModel>(&text).unwrap(),
        model
    );
}

proptest! {
    #[test]
    fn random_pmf_is_a_distribution(size in 1usize..60, seed in any::<u64>()) {
        let p = gen_random_pmf(size, &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(p.len(), size);
        prop_assert!(p.iter().all(|&v| v > 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn anm_rows_are_shifted_noise(seed in any::<u64>(), k in prop::sample::select(vec![2usize, 3, 5, 7])) {
        let mut rng = rng_from_seed(seed);
        let model = gen_anm(&mut rng, 30, 30, &standard_noise_domain(k).unwrap()).unwrap();
        let Mechanism::Anm { f, noise_support, noise_pmf } = &model.mechanism else { unreachable!() };
        prop_assert_eq!(f.len(), model.x_support.len());
        for (i, row) in model.conditional_rows().iter().enumerate() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (v, p) in noise_support.iter().zip(noise_pmf) {
                let j = model.y_support.binary_search(&(f[i] + v)).unwrap();
                prop_assert!((row[j] - p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reference_rows_come_from_pool(seed in any::<u64>(), m in 4usize..20, l in 4usize..20) {
        let mut rng = rng_from_seed(seed);
        let model = gen_reference_set_model(&mut rng, m, l, None).unwrap();
        let Mechanism::ReferenceSet { references, assignment } = &model.mechanism else { unreachable!() };
        prop_assert_eq!(references.len(), (l / 4).max(1));
        prop_assert_eq!(assignment.len(), m);
        for (row, &a) in model.conditional_rows().iter().zip(assignment) {
            prop_assert_eq!(row, &references[a]);
        }
    }
}
