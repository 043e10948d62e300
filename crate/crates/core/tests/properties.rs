use proptest::prelude::*;

use maxent_evalues::diagnostics::{
    gap_r, point_statistic, redundancy, regret_against, sweep, worst_case_r_prime, Regime, SweepConfig,
};
use maxent_evalues::evariables::{
    decide, e_power, e_power_factorized, expected_value, Decision, Reference, SolverSettings, Statistic,
};
use maxent_evalues::models::{MeanParams, Table};
use maxent_evalues::numerics::{convolve_direct, convolve_fft, log_sum_exp, LogValue};
use maxent_evalues::priors::{pseudo_null_density, PriorSpec};
use maxent_evalues::Pmf;

fn spec() -> impl Strategy<Value = PriorSpec<f64>> {
    prop_oneof![
        Just(PriorSpec::Uniform),
        Just(PriorSpec::Nml),
        (0.3f64..4.0, 0.3f64..4.0).prop_map(|(a, b)| PriorSpec::beta(a, b).unwrap()),
    ]
}

fn smooth_spec() -> impl Strategy<Value = PriorSpec<f64>> {
    prop_oneof![
        Just(PriorSpec::Uniform),
        (1.0f64..4.0, 1.0f64..4.0).prop_map(|(a, b)| PriorSpec::beta(a, b).unwrap()),
    ]
}

fn pmf(max_len: usize) -> impl Strategy<Value = Pmf<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..max_len)
        .prop_filter("positive mass", |v| v.iter().sum::<f64>() > 1e-3)
        .prop_map(|v| Pmf::from_probs(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_sum_exp_matches_linear_sum(v in prop::collection::vec(-30.0f64..5.0, 1..40)) {
        let vals: Vec<LogValue<f64>> = v.iter().map(|&x| LogValue::new(x).unwrap()).collect();
        let got = log_sum_exp(&vals).unwrap().get();
        let want = v.iter().map(|x| x.exp()).sum::<f64>().ln();
        prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn fft_and_direct_convolution_agree(a in pmf(300), b in pmf(300)) {
        let d = convolve_direct(&a, &b);
        let f = convolve_fft(&a, &b);
        prop_assert_eq!(d.support_size(), a.support_size() + b.support_size() - 1);
        let total: f64 = d.probs().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (x, y) in d.probs().iter().zip(f.probs()) {
            prop_assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn microcanonical_statistic_has_unit_expectation(
        sizes in prop::collection::vec(1usize..9, 2..4),
        s in spec(),
        p0 in 0.0f64..1.0,
    ) {
        let specs = vec![s; sizes.len()];
        let stat = Statistic::gro_mic(&specs, &sizes).unwrap();
        let e = expected_value(&stat, &Reference::canonical_null(p0, &sizes).unwrap()).unwrap();
        prop_assert!((e - 1.0).abs() < 1e-10);
        let n: usize = sizes.iter().sum();
        for total in 0..=n {
            let r = Reference::Conditional { sizes: sizes.clone(), total };
            prop_assert!((expected_value(&stat, &r).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn factorized_e_power_matches_enumeration(
        sizes in prop::collection::vec(1usize..9, 2..4),
        s in spec(),
    ) {
        let specs = vec![s; sizes.len()];
        let stat = Statistic::gro_mic(&specs, &sizes).unwrap();
        let r = Reference::alternative(&specs, &sizes).unwrap();
        let a = e_power(&stat, &r).unwrap();
        let b = e_power_factorized(&stat, &r).unwrap();
        prop_assert!(a >= -1e-12);
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn gap_is_nonnegative_and_equals_e_power_difference(
        sizes in prop::collection::vec(1usize..12, 2..4),
        s in smooth_spec(),
    ) {
        let specs = vec![s; sizes.len()];
        let d = pseudo_null_density(&specs, &sizes, 200).unwrap();
        let r = gap_r(&specs, &sizes, &d).unwrap().r;
        prop_assert!(r >= -1e-10);
        let reference = Reference::alternative(&specs, &sizes).unwrap();
        let pseudo = e_power_factorized(&Statistic::pseudo(&specs, &sizes, &d).unwrap(), &reference).unwrap();
        let mic = e_power_factorized(&Statistic::gro_mic(&specs, &sizes).unwrap(), &reference).unwrap();
        prop_assert!((r - (pseudo - mic)).abs() < 1e-10, "{} vs {}", r, pseudo - mic);
    }

    #[test]
    fn table_json_round_trip(groups in prop::collection::vec((1usize..50, 0usize..50), 1..6)) {
        let groups: Vec<(usize, usize)> = groups.into_iter().map(|(n, o)| (n, o % (n + 1))).collect();
        let t = Table::new(&groups).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: Table = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn decisions_are_monotone_in_alpha(log_e in -5.0f64..8.0, a in 0.001f64..1.0, b in 0.001f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let v = LogValue::new(log_e).unwrap();
        if decide(v, lo).unwrap() == Decision::Reject {
            prop_assert_eq!(decide(v, hi).unwrap(), Decision::Reject);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn point_gro_is_optimal_and_redundancy_bounds_regret(
        m in 4usize..14,
        pa in 0.05f64..0.95,
        pb in 0.05f64..0.95,
        s in spec(),
    ) {
        let sizes = [m, m + 3];
        let p = MeanParams::new(vec![pa, pb]).unwrap();
        let settings = SolverSettings::default();
        let point = point_statistic(&p, &sizes, &settings).unwrap();
        let specs = vec![s; 2];
        let mic = Statistic::gro_mic(&specs, &sizes).unwrap();
        let reg = regret_against(&p, &point, &mic).unwrap();
        prop_assert!(reg >= -2.0 * settings.tol);
        prop_assert!(regret_against(&p, &point, &point).unwrap().abs() <= 2.0 * settings.tol);
        prop_assert!(redundancy(&p, &specs, &sizes).unwrap() - reg >= -1e-8);
    }
}

#[test]
fn worst_case_r_prime_is_nonnegative() {
    let specs = vec![PriorSpec::<f64>::Uniform; 2];
    let sizes = [10, 10];
    let d = pseudo_null_density(&specs, &sizes, 1000).unwrap();
    let (max, argmax) = worst_case_r_prime(&specs, &sizes, &d, 0.1, (0.1, 0.9)).unwrap();
    assert!(max >= 0.0);
    assert_eq!(argmax.len(), 2);
}

#[test]
fn sweep_output_independent_of_worker_count() {
    let run = |w: usize| {
        let mut cfg = SweepConfig::<f64>::new(
            "gap_r",
            vec![PriorSpec::Uniform, PriorSpec::symmetric(2.0).unwrap()],
            vec![2, 3],
            Regime::MValues { ms: vec![5, 9] },
        );
        cfg.scale = 100;
        cfg.workers = Some(w);
        sweep(&cfg).unwrap().to_tsv()
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one.lines().count(), 9);
}

#[test]
fn single_precision_tracks_double() {
    let specs64 = vec![PriorSpec::<f64>::Uniform, PriorSpec::Nml];
    let specs32 = vec![PriorSpec::<f32>::Uniform, PriorSpec::Nml];
    let t = Table::new(&[(7, 5), (9, 2)]).unwrap();
    let a = maxent_evalues::evariables::log_e_gro_mic(&t, &specs64).unwrap().log_e.get();
    let b = maxent_evalues::evariables::log_e_gro_mic(&t, &specs32).unwrap().log_e.get();
    assert!((a - b as f64).abs() < 1e-4, "{a} {b}");
}
