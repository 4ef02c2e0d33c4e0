use bottleneck_mimo::bounds::{
    mmse_bound, ndt_bound, ndt_min_distortion, ndt_rate, qci_bound_quantile, upper_bound,
    waterfill_constraint, waterfill_continuous,
};
use bottleneck_mimo::montecarlo::mc_eig_expect;
use bottleneck_mimo::wishart::{noise_cdf, trunc_prob, EigDensity};
use bottleneck_mimo::{capacity, scalar_ib_rate, McConfig, QuadratureSpec, SystemParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = SystemParams> {
    (1usize..=4, 1usize..=5, -5.0f64..40.0, 0.5f64..48.0)
        .prop_map(|(k, m, db, c)| SystemParams::from_snr_db(k, m, db, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scalar_rate_below_both_limits(snr in 1e-3f64..1e4, c in 0.0f64..60.0) {
        let r = scalar_ib_rate(snr, c);
        prop_assert!(r >= 0.0);
        prop_assert!(r <= c + 1e-12);
        prop_assert!(r <= (1.0 + snr).log2() + 1e-12);
    }

    #[test]
    fn capacity_symmetric_in_dims(k in 1usize..=5, m in 1usize..=5, db in -5.0f64..30.0) {
        let q = QuadratureSpec::default();
        let a = capacity(&SystemParams::from_snr_db(k, m, db, 1.0).unwrap(), &q).unwrap();
        let b = capacity(&SystemParams::from_snr_db(m, k, db, 1.0).unwrap(), &q).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn upper_bound_sandwiched(p in params()) {
        let q = QuadratureSpec::default();
        let ub = upper_bound(&p, &q).unwrap();
        let cap = capacity(&p, &q).unwrap();
        prop_assert!(ub.value <= p.c() + 1e-9);
        prop_assert!(ub.value <= cap + 1e-9);
        prop_assert!(ub.residual <= 1e-8 * p.c());
    }

    #[test]
    fn lower_bounds_below_upper(p in params()) {
        let q = QuadratureSpec::default();
        let ub = upper_bound(&p, &q).unwrap().value;
        let ndt = ndt_bound(&p, &q).unwrap();
        prop_assert!(ndt.value <= ub + 1e-6);
        prop_assert!(mmse_bound(&p, &q).unwrap().value <= ub + 1e-6);
        if p.k() <= p.m() {
            if let Ok(qci) = qci_bound_quantile(&p, 2) {
                prop_assert!(qci.value <= ub + 1e-6);
                prop_assert!(qci.residual <= 1e-8 * p.c());
            }
        }
    }

    #[test]
    fn ndt_optimum_dominates_fixed(p in params(), u in 0.01f64..1.0) {
        let q = QuadratureSpec::default();
        let d_min = ndt_min_distortion(&p);
        let d = d_min * (1.0 / d_min).powf(u);
        if let Ok(fixed) = ndt_rate(&p, d, &q) {
            prop_assert!(ndt_bound(&p, &q).unwrap().value >= fixed.value - 1e-9);
        }
    }

    #[test]
    fn waterfill_constraint_met(t in 1usize..=4, extra in 0usize..4, g in 0.01f64..1e4, b in 0.01f64..20.0) {
        let d = EigDensity::new(t, t + extra, QuadratureSpec::default());
        let w = waterfill_continuous(&d, g, b).unwrap();
        let spend = waterfill_constraint(&d, g, w.nu).unwrap();
        prop_assert!((spend - b).abs() <= 1e-8 * b);
        prop_assert!(w.rate <= b + 1e-12);
    }

    #[test]
    fn upper_bound_monotone_in_c(p in params(), extra in 0.1f64..10.0) {
        let q = QuadratureSpec::default();
        let a = upper_bound(&p, &q).unwrap().value;
        let b = upper_bound(&p.with_c(p.c() + extra).unwrap(), &q).unwrap().value;
        prop_assert!(b >= a - 1e-9);
    }

    #[test]
    fn truncation_probability_monotone(k in 1usize..=4, extra in 0usize..4, a in 0.0f64..3.0, b in 0.0f64..3.0) {
        let p = SystemParams::new(k, k + extra, 1.0, 8.0).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let pl = trunc_prob(&p, lo).unwrap();
        let ph = trunc_prob(&p, hi).unwrap();
        prop_assert!((0.0..=1.0).contains(&ph));
        prop_assert!(ph <= pl + 1e-12);
    }

    #[test]
    fn noise_cdf_monotone(k in 1usize..=3, extra in 0usize..3, x in 1e-3f64..10.0) {
        let p = SystemParams::new(k, k + extra, 0.1, 8.0).unwrap();
        let a = noise_cdf(&p, x).unwrap();
        let b = noise_cdf(&p, x * 1.5).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }
}

#[test]
fn seeded_estimates_repeat() {
    let p = SystemParams::from_snr_db(3, 3, 10.0, 8.0).unwrap();
    let cfg = McConfig::new(10_000, 42).unwrap();
    let a = mc_eig_expect(&p, |l| l.ln_1p(), &cfg);
    let b = mc_eig_expect(&p, |l| l.ln_1p(), &cfg);
    assert_eq!(a, b);
    let other = mc_eig_expect(&p, |l| l.ln_1p(), &McConfig::new(10_000, 43).unwrap());
    assert_ne!(a.mean, other.mean);
}

#[test]
fn batch_size_changes_nothing_but_order() {
    let p = SystemParams::from_snr_db(2, 3, 10.0, 8.0).unwrap();
    let a = mc_eig_expect(&p, |l| l, &McConfig::new(8_192, 5).unwrap());
    let b = mc_eig_expect(&p, |l| l, &McConfig::new(8_192, 5).unwrap().with_batch_size(4_096).unwrap());
    assert_eq!(a, b);
}
