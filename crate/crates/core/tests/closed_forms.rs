use finsler_core::curvature::{closed_forms, curvature_bundle, ClosedForms, CurvatureBundle};
use finsler_core::manifold::{normal_chart, ManifoldModel};
use finsler_core::metrics::MetricSpec;

fn setup(
    model: ManifoldModel,
    generator: &str,
    p: &[f64],
    a: f64,
) -> (ClosedForms, CurvatureBundle) {
    let spec = MetricSpec::from_registry(generator, model.clone()).unwrap();
    let r = normal_chart(&model, p, None).unwrap();
    let n = r.n();
    let ap = (1.0 - a * a).sqrt();
    let mut y = vec![0.0; n];
    y[0] = a;
    y[n - 1] = ap;
    let local = spec.in_chart(r.chart.clone());
    let bundle = curvature_bundle(&local, &vec![0.0; n], &y).unwrap();
    let a1 = r.db[0][0][n - 1];
    let a2 = r.db[n - 1][0][n - 1];
    let p = spec.generator().unwrap().partials(a * a, ap * ap);
    (closed_forms(&p, a, ap, r.split, a1, a2), bundle)
}

fn close(a: f64, b: f64, what: &str) {
    assert!(
        (a - b).abs() < 1e-8 * b.abs().max(1.0),
        "{what}: {a} vs {b}"
    );
}

fn compare(cf: &ClosedForms, b: &CurvatureBundle) {
    let n = cf.n1 + cf.n2;
    let l = n - 1;
    let g = &b.fundamental.g;
    close(g[(0, 0)], cf.g11, "g11");
    close(g[(0, l)], cf.g1n, "g1n");
    close(g[(l, l)], cf.gnn, "gnn");
    for i in 1..l {
        let want = if i < cf.n1 { cf.g_v1 } else { cf.g_v2 };
        close(g[(i, i)], want, "g_ii");
    }
    let gi = &b.fundamental.g_inv;
    close(gi[(0, 0)], cf.g_inv11, "g^11");
    close(gi[(0, l)], cf.g_inv1n, "g^1n");
    close(gi[(l, l)], cf.g_invnn, "g^nn");
    close(b.fundamental.det_g, cf.det_full, "det");
    let c = &b.cartan.c;
    close(c[0][0][0], cf.c111, "C111");
    close(c[l][l][0], cf.cnn1, "Cnn1");
    close(c[l][0][0], cf.cn11, "Cn11");
    close(c[l][l][l], cf.cnnn, "Cnnn");
    for i in 1..l {
        let (w1, wn) = if i < cf.n1 { cf.c_v1 } else { cf.c_v2 };
        close(c[i][i][0], w1, "Cii1");
        close(c[i][i][l], wn, "Ciin");
    }
    close(b.cartan.i_cov[0], cf.i1, "I1");
    close(b.cartan.i_cov[l], cf.i_n, "In");
    close(b.cartan.i_contra[0], cf.i_up1, "I^1");
    close(b.cartan.i_contra[l], cf.i_up_n, "I^n");
    assert!((b.cartan.i_contra[l] - cf.i_up_n_alt).abs() > 1e-6);
    close(b.spray.g_cov[0], cf.g_cov1, "G1");
    close(b.spray.g_cov[l], cf.g_covn, "Gn");
}

#[test]
fn polar_chart_matches_closed_forms() {
    for a in [0.6, 0.3, -0.8] {
        let (cf, b) = setup(ManifoldModel::PolarPlane, "cross02", &[1.0, 0.0], a);
        compare(&cf, &b);
        let (cf, b) = setup(ManifoldModel::PolarPlane, "cross005", &[0.4, -1.1], a);
        compare(&cf, &b);
    }
}

#[test]
fn hopf_chart_matches_closed_forms() {
    for p in [[0.0, 0.0, 0.0], [0.2, -0.1, 0.3]] {
        let (cf, b) = setup(ManifoldModel::HopfSphere, "cross02", &p, 0.6);
        compare(&cf, &b);
    }
}

#[test]
fn flat_product_chart_matches_closed_forms() {
    let (cf, b) = setup(
        ManifoldModel::FlatProduct { n1: 2, n2: 2 },
        "cross02",
        &[0.1, 0.2, 0.3, 0.4],
        0.7,
    );
    compare(&cf, &b);
}
