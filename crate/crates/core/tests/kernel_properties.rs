mod common;

use common::{diagram, jacobi_eigenvalues, Diagram};
use proptest::prelude::*;
use topokernels::kernels::{
    k_geodesic_gaussian, k_geodesic_laplacian, k_pss, kernel_matrix, landscape, landscape_inner_product,
    silhouette, spectral_transform, KernelMatrix, KernelSpec, SpectralMode,
};
use topokernels::metrics::{wasserstein, GroundMetric, WassersteinParams};

fn ggt(h: f64) -> KernelSpec<f64> {
    KernelSpec::GeodesicGaussian { bandwidth: h, ground: GroundMetric::L2, order: 2.0 }
}

fn symmetric(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                m[i * n + j] = v[i * n + j];
                m[j * n + i] = v[i * n + j];
            }
        }
        m
    })
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn geodesic_values_in_unit_interval(a in diagram(6), b in diagram(6), h in 0.01f64..10.0) {
        for g in [GroundMetric::L2, GroundMetric::Linf] {
            let w = wasserstein(&a, &b, &WassersteinParams::finite(g, 2.0).unwrap()).unwrap().0;
            let kg = k_geodesic_gaussian(&a, &b, h, g, 2.0).unwrap();
            let kl = k_geodesic_laplacian(&a, &b, h, g, 2.0).unwrap();
            prop_assert!(kg > 0.0 || w * w / h > 700.0);
            prop_assert!(kg <= 1.0 && kl <= 1.0 && kl >= 0.0);
            prop_assert!((kg - (-w * w / h).exp()).abs() < 1e-15);
            prop_assert!((kl - (-w / h).exp()).abs() < 1e-15);
        }
        prop_assert_eq!(k_geodesic_gaussian(&a, &a, h, GroundMetric::L2, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn geodesic_decreases_with_distance(a in diagram(5), b in diagram(5), c in diagram(5)) {
        let pr = WassersteinParams::finite(GroundMetric::L2, 2.0).unwrap();
        let (wb, wc) = (wasserstein(&a, &b, &pr).unwrap().0, wasserstein(&a, &c, &pr).unwrap().0);
        let kb = k_geodesic_gaussian(&a, &b, 0.5, GroundMetric::L2, 2.0).unwrap();
        let kc = k_geodesic_gaussian(&a, &c, 0.5, GroundMetric::L2, 2.0).unwrap();
        if wb < wc {
            prop_assert!(kb >= kc);
        } else if wc < wb {
            prop_assert!(kc >= kb);
        }
    }

    #[test]
    fn landscapes_ordered_and_nonnegative(d in diagram(6), t in -0.5f64..2.5) {
        let mut prev = f64::INFINITY;
        for k in 1..=7 {
            let v = landscape(&d, k, t);
            prop_assert!(v >= 0.0 && v <= prev);
            prev = v;
        }
        if d.len() < 7 {
            prop_assert_eq!(landscape(&d, 7, t), 0.0);
        }
    }

    #[test]
    fn silhouette_below_first_landscape(d in diagram(6), t in -0.5f64..2.5, q in 0.1f64..3.0) {
        let s = silhouette(&d, q, t);
        prop_assert!(s >= 0.0);
        prop_assert!(s <= landscape(&d, 1, t) + 1e-12);
    }

    #[test]
    fn landscape_inner_product_is_symmetric_nonneg(a in diagram(5), b in diagram(5)) {
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let ab = landscape_inner_product(&a, &b, 3, &grid).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, landscape_inner_product(&b, &a, 3, &grid).unwrap());
        let aa = landscape_inner_product(&a, &a, 3, &grid).unwrap();
        let bb = landscape_inner_product(&b, &b, 3, &grid).unwrap();
        prop_assert!(ab * ab <= aa * bb * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn pss_symmetric_and_matrix_psd(ds in prop::collection::vec(diagram(5), 2..=10), sigma in 0.01f64..1.0) {
        let a = &ds[0];
        let b = &ds[1];
        let (ab, ba) = (k_pss(a, b, sigma).unwrap(), k_pss(b, a, sigma).unwrap());
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1e-300));
        let k = kernel_matrix(&ds, &KernelSpec::Pss { sigma }).unwrap();
        let ev = jacobi_eigenvalues(k.n(), k.data());
        let scale = ev.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(ev[0] >= -1e-8 * scale, "min eigenvalue {}", ev[0]);
    }

    #[test]
    fn transforms_give_psd_and_reconstruct((n, m) in (1usize..=8).prop_flat_map(|n| (Just(n), symmetric(n)))) {
        let k = KernelMatrix::from_row_major(n, m.clone()).unwrap();
        let oracle = jacobi_eigenvalues(n, &m);
        let lib = &k.eigen().unwrap().values;
        for (x, y) in oracle.iter().zip(lib) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let rebuilt = k.eigen().unwrap().reconstruct_with(|l| l);
        let diff: Vec<f64> = rebuilt.iter().zip(&m).map(|(a, b)| a - b).collect();
        prop_assert!(frobenius(&diff) <= 1e-8 * frobenius(&m).max(1e-300));
        for mode in [SpectralMode::Clip, SpectralMode::Flip, SpectralMode::Square] {
            let t = spectral_transform(&k, mode).unwrap();
            let ev = jacobi_eigenvalues(n, t.data());
            prop_assert!(ev[0] >= -1e-10, "{mode}: {}", ev[0]);
            let mut expected: Vec<f64> = oracle.iter().map(|&l| mode.apply(l)).collect();
            expected.sort_by(f64::total_cmp);
            for (x, y) in ev.iter().zip(&expected) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn empty_diagram_behaviour() {
    let e = Diagram::empty(1);
    let d = Diagram::from_pairs(1, &[(0.0, 1.0)]).unwrap();
    assert_eq!(k_pss(&e, &d, 0.1).unwrap(), 0.0);
    assert_eq!(k_pss(&e, &e, 0.1).unwrap(), 0.0);
    assert_eq!(k_geodesic_gaussian(&e, &e, 0.1, GroundMetric::L2, 2.0).unwrap(), 1.0);
    // W(empty, {(0,1)}) is the diagonal distance 1/sqrt(2)
    let k = k_geodesic_gaussian(&e, &d, 1.0, GroundMetric::L2, 2.0).unwrap();
    assert!((k - (-0.5f64).exp()).abs() < 1e-15);
}

#[test]
fn matrix_agrees_with_pairwise() {
    let ds: Vec<Diagram> = (0..5).map(|i| Diagram::from_pairs(1, &[(0.1 * i as f64, 0.5 + 0.2 * i as f64)]).unwrap()).collect();
    let k = kernel_matrix(&ds, &ggt(0.3)).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(k.get(i, j), k_geodesic_gaussian(&ds[i], &ds[j], 0.3, GroundMetric::L2, 2.0).unwrap());
        }
    }
}
