use finsler_core::error::Error;
use finsler_core::manifold::ManifoldModel;
use finsler_core::metrics::{Generator, MetricSpec};
use finsler_core::verify::*;

fn spec(name: &str, model: ManifoldModel) -> MetricSpec {
    MetricSpec::from_registry(name, model).unwrap()
}

fn classify_default(s: &MetricSpec) -> ClassificationReport {
    let plan = ClassifyPlan::for_spec(s, MIN_POINTS, MIN_DIRECTIONS, None);
    classify(s, &plan, Thresholds::default()).unwrap()
}

#[test]
fn classify_flat_product() {
    let r = classify_default(&spec(
        "cross02",
        ManifoldModel::FlatProduct { n1: 2, n2: 1 },
    ));
    let want = Flags {
        riemannian: false,
        berwald: true,
        landsberg: true,
        s_vanishing: true,
    };
    assert_eq!(r.flags, want, "{r:#?}");
    assert!(r.notes.is_empty());
}

#[test]
fn classify_polar_plane() {
    let r = classify_default(&spec("cross02", ManifoldModel::PolarPlane));
    let want = Flags {
        riemannian: false,
        berwald: false,
        landsberg: false,
        s_vanishing: false,
    };
    assert_eq!(r.flags, want, "{r:#?}");
}

#[test]
fn classify_hopf_sphere() {
    let r = classify_default(&spec("cross02", ManifoldModel::HopfSphere));
    let want = Flags {
        riemannian: false,
        berwald: false,
        landsberg: false,
        s_vanishing: true,
    };
    assert_eq!(r.flags, want, "{r:#?}");
}

#[test]
fn classify_riemannian_is_everything() {
    let r = classify_default(&spec("riemannian", ManifoldModel::PolarPlane));
    assert!(r.flags.riemannian && r.flags.berwald && r.flags.landsberg && r.flags.s_vanishing);
}

#[test]
fn classify_needs_enough_samples() {
    let s = spec("cross02", ManifoldModel::PolarPlane);
    let plan = ClassifyPlan::for_spec(&s, 2, 16, None);
    assert!(matches!(
        classify(&s, &plan, Thresholds::default()),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn theorem41_polar_oracle_direction() {
    let s = spec("cross02", ManifoldModel::PolarPlane);
    let r = verify_theorem41(&s, &[1.0, 0.0], &[(0.6, 0.8)], 1e-4, 1024).unwrap();
    let row = &r.rows[0];
    assert!(r.passed, "{r:#?}");
    assert!((row.s_formula.abs() - 0.13619967309482374).abs() < 1e-12);
}

#[test]
fn theorem41_polar_many_directions() {
    let s = spec("cross005", ManifoldModel::PolarPlane);
    let r = verify_theorem41(&s, &[0.3, -1.2], &off_axis_directions(8), 1e-4, 1024).unwrap();
    assert!(r.passed, "{r:#?}");
}

#[test]
fn theorem41_hopf_vanishes() {
    let s = spec("cross02", ManifoldModel::HopfSphere);
    let r = verify_theorem41(&s, &[0.0; 3], &off_axis_directions(8), 1e-4, 8192).unwrap();
    assert!(r.passed, "{r:#?}");
    for row in &r.rows {
        assert!(row.s_direct.abs() <= 2e-5 && row.s_formula.abs() <= 2e-5);
    }
}

#[test]
fn theorem41_linear_generator_vanishes() {
    let s = spec("linear", ManifoldModel::PolarPlane);
    let r = verify_theorem41(&s, &[1.0, 0.0], &off_axis_directions(4), 1e-4, 1024).unwrap();
    assert!(r.passed);
}

#[test]
fn theorem42_verdicts_agree() {
    let cases = [
        (ManifoldModel::FlatProduct { n1: 2, n2: 1 }, 5, true),
        (ManifoldModel::HopfSphere, 3, true),
        (ManifoldModel::PolarPlane, 3, false),
    ];
    for (model, k, holds) in cases {
        let s = spec("cross02", model.clone());
        let r = verify_theorem42(
            &s,
            &model.sample_points(k),
            16,
            1e-8,
            default_nodes(s.dim()),
        )
        .unwrap();
        assert!(r.passed, "{r:#?}");
        for row in &r.rows {
            assert_eq!(row.identities.holds, holds);
            if !holds {
                assert!(row.max_s > 1e-3);
            }
        }
    }
}

fn default_nodes(n: usize) -> usize {
    finsler_core::curvature::default_nodes(n)
}

#[test]
fn polar_and_hopf_examples() {
    let r = polar_example(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![-0.5, 0.5]], 1e-8).unwrap();
    assert!(r.passed, "{r:#?}");
    assert!((r.rows[0].a1.abs() - 1.0).abs() < 1e-12);
    let h = hopf_example(&[0.0; 3], 1e-8).unwrap();
    assert!(h.passed, "{h:#?}");
    assert!(h.max_zero < 1e-8);
    assert!((h.twist[0].abs() - 1.0).abs() < 1e-8 && (h.twist[1].abs() - 1.0).abs() < 1e-8);
}

#[test]
fn indicatrix_of_riemannian_norms_has_no_trace() {
    let e = spec("riemannian", ManifoldModel::FlatProduct { n1: 1, n2: 1 });
    let t = indicatrix_cartan_trace(&e.at(&[0.0, 0.0]).unwrap(), 64).unwrap();
    assert!(t.trace.iter().all(|c| c.abs() < 1e-13));
    assert!(t.max_norm_defect < 1e-12 && t.max_unit_defect < 1e-12);
    let polar = spec("riemannian", ManifoldModel::PolarPlane);
    let t = indicatrix_cartan_trace(&polar.at(&[0.4, 1.3]).unwrap(), 128).unwrap();
    assert!(t.trace.iter().all(|c| c.abs() < 1e-12));
    assert!(indicatrix_cartan_trace(&polar.at(&[0.4, 1.3]).unwrap(), 16).is_err());
}

#[test]
fn indicatrix_trace_of_flat_split_norm() {
    let s = spec("cross02", ManifoldModel::FlatProduct { n1: 1, n2: 1 });
    let t = indicatrix_cartan_trace(&s.at(&[0.0, 0.0]).unwrap(), 256).unwrap();
    assert!(t.max_norm_defect < 1e-10 && t.max_unit_defect < 1e-10);
    assert!(
        t.axis_values().iter().all(|c| c.abs() < 1e-10),
        "{:?}",
        t.axis_values()
    );
    assert!(t.spread() > 1e-3);
}

#[test]
fn lemma81_certificates() {
    let c = lemma81_certificate(&Generator::resolve("cross02").unwrap(), 1.0, 8, 16).unwrap();
    assert!(c.passed, "{c:#?}");
    assert!(c.max_landsberg > 1e-6 && c.trace_nonconstant);
    let small = lemma81_certificate(&Generator::resolve("cross005").unwrap(), 2.0, 8, 16).unwrap();
    assert!(small.passed, "{small:#?}");
    assert!(small.max_landsberg < c.max_landsberg);
    let linear = lemma81_certificate(&Generator::resolve("linear").unwrap(), 1.0, 8, 16);
    assert!(matches!(linear, Err(Error::Precondition(_))));
}

#[test]
fn berwald_criterion_is_consistent() {
    for model in [
        ManifoldModel::FlatProduct { n1: 2, n2: 1 },
        ManifoldModel::PolarPlane,
        ManifoldModel::HopfSphere,
    ] {
        let s = spec("cross02", model);
        let r = berwald_criterion_suite(&s, &s.model.sample_points(3), 8, 1e-8).unwrap();
        assert!(r.passed, "{r:#?}");
    }
}

#[test]
fn every_target_passes_on_its_model() {
    let cases = [
        (VerifyTarget::Theorem41, ManifoldModel::PolarPlane),
        (VerifyTarget::Theorem42, ManifoldModel::HopfSphere),
        (VerifyTarget::Example33, ManifoldModel::PolarPlane),
        (VerifyTarget::Example34, ManifoldModel::HopfSphere),
        (VerifyTarget::Lemma31, ManifoldModel::HopfSphere),
        (VerifyTarget::Lemma51, ManifoldModel::HopfSphere),
        (VerifyTarget::Lemma81, ManifoldModel::PolarPlane),
        (VerifyTarget::Prop32, ManifoldModel::PolarPlane),
    ];
    for (target, model) in cases {
        let r = run_target(target, &VerifyOptions::new(spec("cross02", model))).unwrap();
        assert!(r.passed, "{target}: {}", r.summary);
        assert_eq!(target.name().parse::<VerifyTarget>().unwrap(), target);
    }
    assert!("theorem99".parse::<VerifyTarget>().is_err());
}
