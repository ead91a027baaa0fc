mod common;

use common::*;
use osl_core::estimator::{
    col_pu, effective_sample_size, env_pu, maybe_resample, resample_low_variance, select_move_count,
    update_particle_count, ConfidenceFactor, EnvPuMode, GaussianSummary, NeighborMessage, ParticleCloud,
};
use osl_core::plume::{Detection, PlumeParams, SearchVolume};
use osl_core::Vec3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn point() -> impl Strategy<Value = Vec3> {
    (0.0..100.0f64, 0.0..60.0f64, 0.0..30.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn weighted_cloud(max: usize) -> impl Strategy<Value = ParticleCloud> {
    prop::collection::vec((point(), 0.001..1.0f64), 1..max).prop_map(|pts| cloud(&pts))
}

/// Agent and neighbour positions near the cloud so likelihoods stay finite.
fn near_point(center: Vec3) -> impl Strategy<Value = Vec3> {
    (-6.0..6.0f64, -12.0..2.0f64, -6.0..6.0f64).prop_map(move |(dx, dy, dz)| center + Vec3::new(dx, dy, dz))
}

fn message(sender: usize, pos: Vec3, detection: u32) -> NeighborMessage {
    NeighborMessage {
        sender,
        summary: GaussianSummary::uniform_box(Vec3::new(100.0, 60.0, 30.0)),
        sender_pos: pos,
        detection,
        cue_captured: detection > 0,
    }
}

fn detection(at: Vec3, count: u32) -> Detection {
    Detection { count, sensed_at: at, iteration: 1 }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn weights_normalized_after_update(
        c in weighted_cloud(60),
        own in point(),
        count in 0u32..6,
        nbrs in prop::collection::vec((point(), 0u32..4, 0.0001..1.0f64), 0..4),
    ) {
        let messages: Vec<_> = nbrs
            .iter()
            .enumerate()
            .map(|(i, &(p, d, b))| (message(i + 1, p, d), ConfidenceFactor::from_divergence(-b.ln())))
            .collect();
        check_normalization(c, &detection(own, count), &messages, &PlumeParams::default()).unwrap();
    }

    #[test]
    fn ess_within_bounds(c in weighted_cloud(200)) {
        check_ess_bounds(&c).unwrap();
    }

    #[test]
    fn systematic_duplication_counts(
        weights in prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], 1..80),
        u0 in 0.0..1.0f64,
    ) {
        prop_assume!(weights.iter().sum::<f64>() > 0.0);
        check_systematic_counts(&weights, u0).unwrap();
    }

    #[test]
    fn kl_zero_on_self_and_beta_bounded(
        m1 in point(), m2 in point(),
        d1 in prop::array::uniform3(0.01..400.0f64),
        d2 in prop::array::uniform3(0.01..400.0f64),
    ) {
        check_kl_self_and_beta(&summary(m1, d1), &summary(m2, d2)).unwrap();
    }

    #[test]
    fn gaussian_fit_matches_weighted_moments(c in weighted_cloud(120)) {
        check_gaussian_fit(&c).unwrap();
    }

    #[test]
    fn update_matches_product_oracle(
        offsets in prop::collection::vec((prop::array::uniform3(-4.0..4.0f64), 0.05..1.0f64), 5),
        own_pos in near_point(Vec3::new(50.0, 30.0, 15.0)),
        count in 0u32..4,
        nbrs in prop::collection::vec((0u32..3, 0.05..1.0f64), 0..3),
    ) {
        let base = Vec3::new(50.0, 36.0, 15.0);
        let c = cloud(&offsets.iter().map(|&(o, w)| (base + Vec3::from(o), w)).collect::<Vec<_>>());
        let messages: Vec<_> = nbrs
            .iter()
            .enumerate()
            .map(|(i, &(d, b))| {
                let pos = base + Vec3::new(3.0 * i as f64 - 3.0, -5.0, 1.0);
                (message(i + 1, pos, d), ConfidenceFactor::from_divergence(-b.ln()))
            })
            .collect();
        check_update_against_product(&c, &detection(own_pos, count), &messages, &PlumeParams::default()).unwrap();
    }

    #[test]
    fn resampling_keeps_count_and_support(c in weighted_cloud(100), seed in any::<u64>()) {
        let mut r = c.clone();
        resample_low_variance(&mut r, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(r.len(), c.len());
        prop_assert!((effective_sample_size(&r) - r.len() as f64).abs() < 1e-6);
        for p in &r.particles {
            prop_assert!(c.particles.iter().any(|q| q.position == p.position && q.weight > 0.0));
        }
    }

    #[test]
    fn resample_only_below_half(c in weighted_cloud(100), seed in any::<u64>()) {
        let mut r = c.clone();
        let did = maybe_resample(&mut r, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(did, effective_sample_size(&c) < c.len() as f64 / 2.0);
        if !did {
            prop_assert_eq!(r, c);
        }
    }

    #[test]
    fn move_count_never_exceeds_population(n in 1usize..200, k in 0usize..900, k_max in 1usize..900) {
        let s = select_move_count(n, k, k_max, 1.8, 4.0);
        prop_assert!(s <= n);
        if k >= k_max {
            prop_assert_eq!(s, 0);
        }
    }

    #[test]
    fn position_updates_stay_inside(
        c in weighted_cloud(80),
        seed in any::<u64>(),
        target in point(),
        proportional in any::<bool>(),
    ) {
        let vol = SearchVolume::default();
        let mut moved = c.clone();
        let all: Vec<usize> = (0..c.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mode = if proportional { EnvPuMode::Proportional } else { EnvPuMode::Bounded };
        env_pu(&mut moved, &all, FRAC_PI_2, mode, 0.5, &mut rng, &vol);
        col_pu(&mut moved, &all, &target, &mut rng, &vol);
        for (before, after) in c.particles.iter().zip(&moved.particles) {
            prop_assert!(vol.contains(&after.position));
            prop_assert_eq!(before.weight, after.weight);
        }
    }

    #[test]
    fn particle_count_stays_in_range(c in weighted_cloud(160), seed in any::<u64>(), agent in point(), k in 1usize..50) {
        let mut c = ParticleCloud { n_min: 20, n_max: 160, ..c };
        let n0 = c.len();
        let n = update_particle_count(&mut c, &agent, &Vec3::new(50.0, 30.0, 15.0), k, 3, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(n <= n0);
        prop_assert!(n >= 20.min(n0));
        prop_assert!((c.weight_sum() - 1.0).abs() < 1e-9);
    }
}
