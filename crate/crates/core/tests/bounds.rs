use std::f64::consts::PI;

use proptest::prelude::*;
use rkhs_sampling::analysis::{bound, choose_m, max_m_under_spectral, BoundInputs, ETA, KAPPA};
use rkhs_sampling::experiment::log_log_slope;
use rkhs_sampling::kernel::{Basis, EigenRule, SpectralKernelModel};
use rkhs_sampling::Error;

const NAMES: [&str; 11] = [
    "recovery-tail-function",
    "recovery-tail-sum",
    "recovery-half-tail",
    "nonsep-intermediate",
    "nonsep-recovery",
    "discretization-bounded",
    "discretization-weighted",
    "discretization-bounded-simple",
    "discretization-trace-simple",
    "trace-baseline",
    "choice-m",
];

fn fourier() -> SpectralKernelModel {
    SpectralKernelModel::new(Basis::Fourier, EigenRule::Polynomial { s: 1.0 }, 0.0).unwrap()
}

#[test]
fn constants_match_their_definitions() {
    assert!((KAPPA * KAPPA - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
    assert!((ETA - 2f64.powf(0.75) - 1.0).abs() < 1e-15);
}

#[test]
fn choice_of_m_examples() {
    let oracle = (1000.0 / (28.0 * 1000f64.ln())).floor() as usize;
    assert_eq!(oracle, 5);
    assert_eq!(choose_m(1000, 2.0).unwrap(), oracle);
    for n in [3usize, 10, 100, 5000, 1 << 20] {
        let nf = n as f64;
        assert_eq!(choose_m(n, 1.5).unwrap(), (nf / (21.0 * nf.ln())).floor() as usize);
    }
    assert!(choose_m(1, 2.0).is_err());
}

#[test]
fn tail_function_bound_example() {
    let inputs = BoundInputs {
        n: 1000,
        m: 5,
        r: 2.0,
        sigma_m_sq: Some(0.01),
        tail_function: Some(0.5),
        ..Default::default()
    };
    let report = bound("recovery-tail-function", &inputs).unwrap();
    let k2 = (3.0 + 5f64.sqrt()) / 2.0;
    let oracle = 5.0 * 0.01f64.max(8.0 * 2.0 * 1000f64.ln() * 0.5 * k2 / 1000.0);
    assert!((report.value - oracle).abs() < 1e-15);
    assert_eq!(report.value, 0.7233895242536699);
    assert!((report.value - 0.7235).abs() < 2e-4);
    assert_eq!(report.constants["5"], 5.0);
    assert_eq!(report.constants["8"], 8.0);
}

#[test]
fn missing_inputs_are_named() {
    let inputs = BoundInputs {
        n: 1000,
        m: 5,
        r: 2.0,
        ..Default::default()
    };
    assert!(matches!(bound("recovery-tail-sum", &inputs), Err(Error::MissingInput("sigma_m_sq"))));
    assert!(matches!(bound("no-such-bound", &inputs), Err(Error::UnknownBound(_))));
}

#[test]
fn every_bound_evaluates_from_a_model() {
    let model = SpectralKernelModel::new(Basis::Cosine, EigenRule::Sobolev { s: 1.0 }, 0.2).unwrap();
    let inputs = BoundInputs::from_model(&model, 2000, 8, 2.0);
    for name in NAMES {
        let report = bound(name, &inputs).unwrap();
        assert!(report.value.is_finite() && report.value > 0.0, "{name}");
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["inputs"]["n"], 2000);
    }
}

#[test]
fn baseline_scan_matches_brute_force() {
    let model = fourier();
    let n = 10_000;
    let tr = PI * PI / 6.0;
    let (l, v) = (1..5000usize)
        .map(|l| (l, 1.0 / (l * l) as f64 + tr * l as f64 / n as f64))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let report = bound("trace-baseline", &BoundInputs::from_model(&model, n, 2, 2.0)).unwrap();
    assert_eq!(report.argmin, Some(l));
    assert!((report.value - v).abs() < 1e-12);
}

#[test]
fn nonseparable_bound_beats_baseline_for_large_n() {
    let model = fourier();
    let n = 10_000;
    let m = choose_m(n, 2.0).unwrap();
    let inputs = BoundInputs::from_model(&model, n, m, 2.0);
    let nonsep = bound("nonsep-recovery", &inputs).unwrap().value;
    let baseline = bound("trace-baseline", &inputs).unwrap().value;
    // The constants hide the crossover at desk scale; compare the rates instead.
    let big = 1usize << 40;
    let m_big = choose_m(big, 2.0).unwrap();
    let big_inputs = BoundInputs::from_model(&model, big, m_big, 2.0);
    let nonsep_big = bound("nonsep-recovery", &big_inputs).unwrap().value;
    let baseline_big = bound("trace-baseline", &big_inputs).unwrap().value;
    assert!(nonsep_big / baseline_big < nonsep / baseline);
    assert!(nonsep_big < baseline_big);
}

#[test]
fn max_m_under_spectral_examples() {
    let model = SpectralKernelModel::new(Basis::Cosine, EigenRule::Sobolev { s: 1.0 }, 0.0).unwrap();
    let nf = 2000f64;
    for (c, expect) in [(7.0, 10usize), (10.0, 8)] {
        let budget = nf / (c * 2.0 * nf.ln());
        let oracle = (2..100usize).filter(|&m| (2 * m - 3) as f64 <= budget).max().unwrap();
        assert_eq!(oracle, expect);
        assert_eq!(max_m_under_spectral(&model, 2000, 2.0, c).unwrap(), Some(expect));
    }
    assert_eq!(max_m_under_spectral(&model, 10, 2.0, 10.0).unwrap(), None);
}

#[test]
fn sampling_bound_slope_is_in_window() {
    let model = fourier();
    let ns: Vec<f64> = (8..=14).map(|k| (1u64 << k) as f64).collect();
    let values: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let m = choose_m(n as usize, 2.0).unwrap();
            bound("recovery-tail-sum", &BoundInputs::from_model(&model, n as usize, m, 2.0)).unwrap().value
        })
        .collect();
    let slope = 0.5 * log_log_slope(&ns, &values);
    assert!((-1.2..=-0.45).contains(&slope), "{slope}");
}

fn inputs() -> impl Strategy<Value = BoundInputs> {
    (3usize..1_000_000, 2usize..500, 1.01f64..4.0).prop_map(|(n, m, r)| {
        let model = SpectralKernelModel::new(Basis::Cosine, EigenRule::Sobolev { s: 1.0 }, 0.1).unwrap();
        BoundInputs::from_model(&model, n, m, r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_are_positive_and_finite(inputs in inputs()) {
        for name in NAMES {
            let v = bound(name, &inputs).unwrap().value;
            prop_assert!(v.is_finite() && v >= 0.0, "{name}: {v}");
        }
    }

    #[test]
    fn bounds_increase_with_r(inputs in inputs()) {
        let mut larger = inputs.clone();
        larger.r *= 1.5;
        for name in ["recovery-tail-function", "recovery-tail-sum", "nonsep-recovery", "discretization-bounded", "discretization-weighted"] {
            prop_assert!(bound(name, &larger).unwrap().value >= bound(name, &inputs).unwrap().value);
        }
    }

    #[test]
    fn tail_sum_bound_dominates_tail_function_bound_on_the_torus(n in 3usize..1_000_000, m in 2usize..500) {
        let inputs = BoundInputs::from_model(&fourier(), n, m, 2.0);
        let a = bound("recovery-tail-function", &inputs).unwrap().value;
        let b = bound("recovery-tail-sum", &inputs).unwrap().value;
        prop_assert!(a <= b);
    }
}
