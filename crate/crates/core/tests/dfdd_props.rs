use nearfar::dfdd::{
    depth_from_defocus, differential_pair, AlignedPair, DepthMap, DfddConfig, DfddParams,
    Thresholds,
};
use nearfar::raster::Raster;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Two blurred blobs with different widths plus texture, so lap and drho
/// both vary in sign.
fn scene(seed: u64, w: usize, h: usize) -> (Raster, Raster) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (cx, cy) = (rng.random_range(8.0..w as f64 - 8.0), rng.random_range(8.0..h as f64 - 8.0));
    let (s1, s3) = (rng.random_range(1.5..4.0), rng.random_range(1.5..4.0));
    let tex: Vec<f64> = (0..w * h).map(|_| rng.random_range(0.0..0.05)).collect();
    let blob = |s: f64| {
        Raster::from_fn(w, h, |x, y| {
            let r2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            (-r2 / (2.0 * s * s)).exp() / (s * s) + tex[y * w + x]
        })
    };
    (blob(s1), blob(s3))
}

fn ranged(i1: Raster, i3: Raster, p: &DfddParams, cfg: &DfddConfig) -> DepthMap {
    let pair = AlignedPair::identity(i1, i3).unwrap();
    let d = differential_pair(&pair, cfg).unwrap();
    let th = Thresholds::relative(&d, cfg);
    depth_from_defocus(&d, p, &th)
}

fn cfg() -> DfddConfig {
    DfddConfig {
        sigma_pre_x: 1.0,
        sigma_pre_y: 2.0,
        aspect_weight: 4.0,
        gate_fraction: 0.01,
        z_max: 1e3,
        ..DfddConfig::default()
    }
}

#[test]
fn equal_images_give_inverse_a() {
    let (i1, _) = scene(1, 48, 40);
    let p = DfddParams::new(61.0, 3.0).unwrap();
    let dm = ranged(i1.clone(), i1, &p, &cfg());
    assert!(dm.n_valid() > 100);
    for (z, _) in dm.samples() {
        assert!((z * p.a_param - 1.0).abs() < 1e-12, "{z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_of_two_scaling_is_exact(seed in 0u64..10_000, k in -8i32..8) {
        let (i1, i3) = scene(seed, 40, 40);
        let c = 2f64.powi(k);
        let p = DfddParams::new(60.0, 2.5).unwrap();
        let a = ranged(i1.clone(), i3.clone(), &p, &cfg());
        let b = ranged(i1.scale(c), i3.scale(c), &p, &cfg());
        prop_assert_eq!(&a.depth, &b.depth);
        prop_assert_eq!(&a.valid, &b.valid);
        prop_assert_eq!(a.confidence.scale(c), b.confidence);
    }

    /// Outside powers of two the scaling itself rounds, and cancellation in
    /// the stencil and the denominator amplifies that to a few 1e-12.
    #[test]
    fn arbitrary_scaling_preserves_depth(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let (i1, i3) = scene(seed, 40, 40);
        let p = DfddParams::new(60.0, 2.5).unwrap();
        let a = ranged(i1.clone(), i3.clone(), &p, &cfg());
        let b = ranged(i1.scale(c), i3.scale(c), &p, &cfg());
        prop_assert_eq!(&a.valid, &b.valid);
        for (x, y) in a.depth.data().iter().zip(b.depth.data()) {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs(), "{} vs {}", x, y);
        }
    }

    #[test]
    fn swap_with_negated_b_is_identical(seed in 0u64..10_000, b in -50.0f64..50.0) {
        let (i1, i3) = scene(seed, 40, 40);
        let p = DfddParams::new(60.0, b).unwrap();
        let q = DfddParams::new(60.0, -b).unwrap();
        let a = ranged(i1.clone(), i3.clone(), &p, &cfg());
        let s = ranged(i3, i1, &q, &cfg());
        prop_assert_eq!(a, s);
    }
}
