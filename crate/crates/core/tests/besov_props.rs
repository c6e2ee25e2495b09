mod common;

use common::catalog;
use opint_core::besov::{
    besov_norm_with, besov_upper, lp_blocks_with, BesovOptions, BlockRepr, LpWindowFamily,
};
use opint_core::{besov_norm, BesovFlavor, FourierMode, FunctionR2, Interval, C64};
use proptest::prelude::*;

fn opts() -> BesovOptions {
    BesovOptions {
        sup_grid: 256,
        ..BesovOptions::default()
    }
}

#[test]
fn windows_partition_unity_on_dense_grid() {
    for k in 0..100_000 {
        let r = 64.0 * k as f64 / 100_000.0;
        let inhom: f64 = (0..12).map(|n| LpWindowFamily::weight(n, r)).sum();
        assert!((inhom - 1.0).abs() <= 1e-12, "r = {r}: {inhom}");
        if r > 0.0 {
            let hom: f64 = (-30..12)
                .map(|n| LpWindowFamily::weight_homogeneous(n, r))
                .sum();
            assert!((hom - 1.0).abs() <= 1e-12, "r = {r}: {hom}");
        }
    }
}

#[test]
fn plane_wave_norms_follow_tent_arithmetic() {
    // |ξ| ≤ 1 sits in w_0 alone; otherwise two adjacent windows share the
    // coefficient linearly and the 2ⁿ weights sum to |ξ|.
    for (xi, expected) in [(1.0, 1.0), (1.5, 1.5), (2.0, 2.0), (3.0, 3.0), (4.0, 4.0)] {
        for angle in [0.0, 0.4, 1.3] {
            let f = FunctionR2::plane_wave(xi * f64::cos(angle), xi * f64::sin(angle));
            let norm = besov_norm(&f, BesovFlavor::Inhomogeneous).unwrap();
            assert!(norm.contains_approx(expected, 1e-12), "|ξ| = {xi}: {norm}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocks_reconstruct_modes(seed in 0u64..10_000, sigma in 0.5f64..20.0) {
        let f = catalog(sigma, seed);
        let blocks = lp_blocks_with(&f, BesovFlavor::Inhomogeneous, &opts()).unwrap();
        let mut total = vec![C64::new(0.0, 0.0); f.fourier_modes().unwrap().len()];
        for b in &blocks {
            let BlockRepr::Catalog(g) = &b.block else { panic!("catalog blocks expected") };
            for m in g.fourier_modes().unwrap() {
                let i = f.fourier_modes().unwrap().iter().position(|o| o.a == m.a && o.b == m.b).unwrap();
                total[i] += m.coeff;
            }
        }
        for (m, t) in f.fourier_modes().unwrap().iter().zip(total) {
            prop_assert!((m.coeff - t).norm() <= 1e-14);
        }
    }

    #[test]
    fn dyadic_dilation_law(seed in 0u64..10_000, k in 1i32..4) {
        let f = catalog(3.0, seed);
        let lambda = 2f64.powi(k);
        let base = besov_norm_with(&f, BesovFlavor::Homogeneous, &opts()).unwrap();
        let dilated = besov_norm_with(&f.dilate(lambda).unwrap(), BesovFlavor::Homogeneous, &opts()).unwrap();
        let scaled = Interval::new(lambda * base.lower, lambda * base.upper);
        prop_assert!((dilated.upper - scaled.upper).abs() <= 1e-12 * scaled.upper);
        prop_assert!(dilated.overlaps(&scaled), "{dilated} vs {scaled}");
    }

    #[test]
    fn bandlimited_embedding(seed in 0u64..10_000, sigma in 0.1f64..40.0) {
        let f = catalog(sigma, seed);
        let l1: f64 = f.fourier_modes().unwrap().iter().map(|m| m.coeff.norm()).sum();
        let upper = besov_upper(&f, BesovFlavor::Inhomogeneous).unwrap();
        prop_assert!(upper <= 2.0 * (1.0 + sigma) * l1 * (1.0 + 1e-12));
        let interval = besov_norm_with(&f, BesovFlavor::Inhomogeneous, &opts()).unwrap();
        prop_assert!(interval.lower <= interval.upper);
        prop_assert!((interval.upper - upper).abs() <= 1e-12 * upper);
    }
}

#[test]
fn dilation_by_two_and_four_for_plane_waves() {
    let f = FunctionR2::trig_poly(vec![
        FourierMode::new(1.5, 0.0, C64::new(1.0, 0.0)),
        FourierMode::new(0.0, 3.0, C64::new(0.0, 0.5)),
    ]);
    let base = besov_norm(&f, BesovFlavor::Homogeneous).unwrap();
    for lambda in [2.0, 4.0] {
        let d = besov_norm(&f.dilate(lambda).unwrap(), BesovFlavor::Homogeneous).unwrap();
        assert!(
            (d.upper - lambda * base.upper).abs() <= 1e-12 * d.upper,
            "{d} vs {lambda}·{base}"
        );
        assert!(d.overlaps(&Interval::new(lambda * base.lower, lambda * base.upper)));
    }
}
