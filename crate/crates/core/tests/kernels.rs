use std::f64::consts::TAU;

use periodlab::domain::{random_disk_domain, seeded_corpus, transform_domain};
use periodlab::geometry::{euclid_gap, signed_gap, Component};
use periodlab::kernels::{gram, solve_kernels, GramMatrix};
use periodlab::linalg::symmetric_eigen;
use periodlab::riesz::constants;
use periodlab::{DomainSpec, Hole, MobiusMap, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gram_at(d: &DomainSpec, n: usize) -> GramMatrix {
    gram(&solve_kernels(d, n).unwrap())
}

fn eigenvalues(g: &GramMatrix) -> Vec<f64> {
    symmetric_eigen(g.matrix()).values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn sign_structure_and_weak_strong_bound(seed in any::<u64>(), holes in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_disk_domain(&mut rng, holes, (0.06, 0.15), 0.04);
        let g = gram_at(&d, 256);
        prop_assert!(g.sign_violations().is_empty(), "{:?}", g.sign_violations());
        prop_assert!(constants(&g).unwrap().weak_strong_bound().holds);
    }

    #[test]
    fn enlarging_a_hole_raises_lambda_max_and_lowers_c_i(seed in any::<u64>(), holes in 2usize..6, pick in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_disk_domain(&mut rng, holes, (0.06, 0.12), 0.08);
        let j = pick % holes;
        let Hole::Disk { center, radius } = d.holes[j] else { unreachable!() };
        let room = d
            .holes
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, h)| signed_gap(&d.holes[j], h))
            .fold(euclid_gap(Component::Hole(&d.holes[j]), Component::Outer), f64::min);
        let grow = rng.gen_range(0.3..0.7) * room;
        let mut bigger = d.clone();
        bigger.holes[j] = Hole::disk(center, radius + grow).unwrap();
        let (before, after) = (constants(&gram_at(&d, 512)).unwrap(), constants(&gram_at(&bigger, 512)).unwrap());
        prop_assert!(after.lambda_max >= before.lambda_max * (1.0 - 5e-3), "{} -> {}", before.lambda_max, after.lambda_max);
        prop_assert!(after.c_i <= before.c_i * (1.0 + 5e-3), "{} -> {}", before.c_i, after.c_i);
    }
}

#[test]
fn gram_spectrum_is_mobius_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in seeded_corpus(5, 3) {
        let base = eigenvalues(&gram_at(&d, 512));
        for _ in 0..2 {
            let z0 = Point::polar(0.3 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            let m = MobiusMap::new(z0, rng.gen_range(0.0..TAU)).unwrap();
            let image = eigenvalues(&gram_at(&transform_domain(&d, &m).unwrap(), 512));
            for (a, b) in base.iter().zip(&image) {
                assert!((a - b).abs() / a < 0.03, "{base:?} vs {image:?}");
            }
        }
    }
}

#[test]
fn rotation_leaves_the_gram_matrix_nearly_unchanged() {
    let d = seeded_corpus(9, 1).remove(0);
    let g = gram_at(&d, 512);
    let r = gram_at(
        &transform_domain(&d, &MobiusMap::rotation(0.9)).unwrap(),
        512,
    );
    for j in 0..g.dim() {
        for k in 0..g.dim() {
            assert!((g.get(j, k) - r.get(j, k)).abs() <= 0.03 * g.get(j, j).min(g.get(k, k)));
        }
    }
}
