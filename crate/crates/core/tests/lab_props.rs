mod common;

use common::catalog;
use opint_core::lab::{
    first_check, full_check, identity_experiment, identity_instance, second_check,
};
use opint_core::spectral::prescribed_perturbation;
use opint_core::{
    f_of_pair, lipschitz_experiment, schatten_norm, Ensemble, ExperimentConfig, ExperimentReport,
    FunctionR2, SchattenIndex,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn identities_hold_on_conditioned_inputs(dim in 1usize..12, seed: u64, sigma in prop::sample::select(vec![1.0, 2.0, 4.0, 8.0])) {
        let f = catalog(sigma, seed);
        let inst = identity_instance(dim, &Ensemble::Gue, 4e-4, seed, false).unwrap();
        for r in [
            first_check(&f, &inst.a1, &inst.a2, &inst.b1).unwrap(),
            second_check(&f, &inst.a1, &inst.b1, &inst.b2).unwrap(),
            full_check(&f, &inst.a1, &inst.a2, &inst.b1, &inst.b2).unwrap(),
        ] {
            prop_assert!(r.relative_residual <= 1e-9, "{r:?}");
            prop_assert!(r.relative_residual >= 0.0);
        }
    }

    #[test]
    fn coordinate_ratio_is_scale_invariant(dim in 1usize..8, seed: u64, c in 1e-3f64..1e2, p in prop::sample::select(vec![1.0, 1.5, 2.0, 4.0])) {
        let x = FunctionR2::coordinate_x();
        let p = SchattenIndex::new(p).unwrap();
        let a = common::gue(dim, seed);
        let b = common::gue(dim, seed ^ 1);
        let d = prescribed_perturbation(&a, p, 1.0, seed ^ 2).unwrap().difference;
        let ratio = |scale: f64| {
            let a2 = opint_core::HermitianMatrix::new(a.as_matrix() + d.as_matrix().map(|z| z * scale)).unwrap();
            let diff = f_of_pair(&x, &a, &b).unwrap() - f_of_pair(&x, &a2, &b).unwrap();
            schatten_norm(&diff, p).unwrap() / schatten_norm(&a.sub(&a2), p).unwrap()
        };
        let (r1, rc) = (ratio(1.0), ratio(c));
        prop_assert!((r1 - 1.0).abs() <= 1e-10 && (rc - 1.0).abs() <= 1e-10 * c.max(1.0 / c), "{r1} {rc}");
    }
}

#[test]
fn identity_experiment_covers_collisions() {
    let json = r#"{"dims":[4,6],"trials":3,"seed":5,"functions":["plane_wave:2,1","sum(plane_wave:1,0, mode:0,4,0.5,0)"],
        "mode":"identity","collide":true}"#;
    let c = ExperimentConfig::from_json(json).unwrap();
    let r = identity_experiment(&c).unwrap();
    assert_eq!(r.checks.len(), 2 * 3 * 3);
    assert!(
        r.max_relative_residual <= 1e-9,
        "{}",
        r.max_relative_residual
    );
}

#[test]
fn reports_round_trip_exactly() {
    let json = r#"{"p":[1,2],"dims":[4,8],"trials":5,"seed":17,"functions":["plane_wave:1,1","dilate(plane_wave:1,0,3)"],
        "mode":"lipschitz","normalizer":"sigma-sup"}"#;
    let c = ExperimentConfig::from_json(json).unwrap();
    let r = lipschitz_experiment(&c).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(
        back.recompute_empirical_constant().to_bits(),
        r.empirical_constant.to_bits()
    );
    assert!(r
        .trials
        .iter()
        .all(|t| t.sigma.is_some() && t.normalizer > 0.0));
}
