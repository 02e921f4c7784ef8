use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wallach_core::DomainModel;

#[test]
fn lie_ball_points_have_positive_norm() {
    let dom: DomainModel = "IV:5".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10_000 {
        let x = dom.sample_with(&mut rng, 0.99).unwrap();
        assert!(dom.contains(&x));
        assert!(dom.generic_norm_eval(&x, &x).re > 0.0);
    }
}

#[test]
fn type_i_samples_respect_cap() {
    let dom: DomainModel = "I:2,2".parse().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1_000 {
        let x = dom.sample_with(&mut rng, 0.8).unwrap();
        assert!(dom.spectral_norm(&x) <= 0.8);
        assert!(dom.generic_norm_eval(&x, &x).re > 0.0);
    }
}

#[test]
fn pairwise_norm_in_right_half_plane_at_default_cap() {
    for spec in ["I:2,2", "I:2,3", "III:3", "IV:5", "CH:3"] {
        let dom: DomainModel = spec.parse().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2_000 {
            let x = dom.sample_with(&mut rng, 0.7).unwrap();
            let y = dom.sample_with(&mut rng, 0.7).unwrap();
            assert!(dom.generic_norm_eval(&x, &y).re > 0.0, "{spec}");
        }
    }
}

#[test]
fn bad_caps_rejected() {
    let dom: DomainModel = "CH:2".parse().unwrap();
    for cap in [0.0, 1.0, 1.5, -0.1, f64::NAN] {
        assert!(dom.sample(0, cap).is_err());
    }
}
