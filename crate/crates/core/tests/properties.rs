use finsler_core::derivjet::{cross_check, taylor_eval, Dd, MultiOrder, Scalar, ScalarField};
use finsler_core::manifold::ManifoldModel;
use finsler_core::metrics::MetricSpec;
use proptest::prelude::*;

fn polar() -> MetricSpec {
    MetricSpec::from_registry("cross02", ManifoldModel::PolarPlane).unwrap()
}

fn coord() -> impl Strategy<Value = f64> {
    prop_oneof![-2.0..-0.3f64, 0.3..2.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_positively_homogeneous(
        x in [coord(), coord()],
        y in [coord(), coord()],
        lambda in 0.01..50.0f64,
    ) {
        let spec = polar();
        let scaled = [lambda * y[0], lambda * y[1]];
        let (a, b) = (spec.norm(&x, &scaled), lambda * spec.norm(&x, &y));
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn double_double_round_trips(a in 1e-3..1e3f64, b in 1e-3..1e3f64) {
        let (a, b) = (Dd::new(a) + a * 1e-18, Dd::new(b));
        prop_assert!(((a / b) * b - a).value().abs() <= 1e-30 * a.value());
        prop_assert!((a.ln().exp() - a).value().abs() <= 1e-29 * a.value());
        let r = a.sqrt();
        prop_assert!((r * r - a).value().abs() <= 1e-30 * a.value());
    }

    #[test]
    fn double_double_evaluation_agrees_with_f64(x in [coord(), coord()], y in [coord(), coord()]) {
        let spec = polar();
        let dd = spec.eval(&x.map(Dd::new), &y.map(Dd::new)).value();
        let plain = spec.eval(&x, &y);
        prop_assert!((dd - plain).abs() <= 1e-13 * plain.abs());
    }

    #[test]
    fn low_order_jets_match_differences(x in [coord(), coord()], y in [coord(), coord()]) {
        let spec = polar();
        let orders = MultiOrder::enumerate(2, 1, 2);
        let r = cross_check(&spec, &[(x.to_vec(), y.to_vec())], &orders, 1e-8).unwrap();
        prop_assert!(r.passed, "{:?}", r);
        let zero = MultiOrder::y(vec![0, 0]);
        let t = taylor_eval(&spec, &x, &y, &[zero.clone()]).unwrap();
        let f = spec.eval(&x, &y);
        prop_assert!((t.entries[&zero] - f).abs() <= 1e-14 * f);
    }
}
