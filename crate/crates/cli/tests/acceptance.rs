//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/common/oracles.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use topokernels::filtration::{build_distance_matrix, build_rips_filtration, Metric, PointCloud};
use topokernels::kernels::{
    indefiniteness_witness, k_geodesic_gaussian, k_pss, kernel_matrix, random_diagram, spectral_transform,
    KernelMatrix, KernelSpec, SpectralMode, WitnessSearch,
};
use topokernels::learning::{
    group_means_fit, kfold_cv, ksvm_train, loo_bandwidth, nw_fitted, robinson_plm_fit, rss, svm_train,
    KernelClassifier, Label, RegressionSample, SvmMethod, SvmParams,
};
use topokernels::metrics::{bottleneck, brute_force_wasserstein, wasserstein, GroundMetric, Order, WassersteinParams};
use topokernels::persistence::{
    cap_or_drop_essential, compute_persistence, total_persistence, DiagramSet, EssentialPolicy, PersistenceDiagram,
};
use topokernels::synthetic::{generate, Generator, SyntheticSpec};

type Diagram = PersistenceDiagram<f64>;
type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn diagram_with(rng: &mut ChaCha8Rng, max: usize) -> Diagram {
    let m = rng.random_range(0..=max);
    let pairs: Vec<(f64, f64)> = (0..m)
        .map(|_| {
            let b: f64 = rng.random();
            (b, b + 1.0 - rng.random::<f64>())
        })
        .collect();
    PersistenceDiagram::from_pairs(1, &pairs).unwrap()
}

fn params(g: GroundMetric, p: f64) -> WassersteinParams<f64> {
    WassersteinParams::finite(g, p).unwrap()
}

fn persistence_of(points: &[Vec<f64>], max_hom: usize) -> DiagramSet<f64> {
    let c = PointCloud::new(points.to_vec()).unwrap();
    let dm = build_distance_matrix(&c, Metric::Euclidean).unwrap();
    let f = build_rips_filtration(&dm, max_hom + 1, None).unwrap();
    compute_persistence(&f, max_hom).unwrap()
}

fn finite(d: &Diagram) -> Diagram {
    cap_or_drop_essential(d, EssentialPolicy::Drop).unwrap()
}

fn h1(points: &[Vec<f64>]) -> Diagram {
    finite(persistence_of(points, 1).get(1).unwrap())
}

fn ggt(h: f64) -> KernelSpec<f64> {
    KernelSpec::GeodesicGaussian { bandwidth: h, ground: GroundMetric::L2, order: 2.0 }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid: Vec<WassersteinParams<f64>> = [GroundMetric::L2, GroundMetric::Linf]
        .into_iter()
        .flat_map(|g| [1.0, 2.0].map(|p| params(g, p)))
        .collect();
    let minimax = WassersteinParams::new(GroundMetric::Linf, Order::Infinity).unwrap();
    let mut worst = 0.0f64;
    for pair in 0..1000 {
        let a = diagram_with(&mut rng, 4);
        let b = diagram_with(&mut rng, 4);
        for pr in &grid {
            let w = wasserstein(&a, &b, pr).unwrap().0;
            let o = brute_force_wasserstein(&a, &b, pr).unwrap();
            worst = worst.max((w - o).abs());
            ensure((w - o).abs() <= 1e-9, || format!("pair {pair}, {pr:?}: {w} vs oracle {o}"))?;
        }
        let bn = bottleneck(&a, &b).unwrap().0;
        let o = brute_force_wasserstein(&a, &b, &minimax).unwrap();
        worst = worst.max((bn - o).abs());
        ensure((bn - o).abs() <= 1e-9, || format!("pair {pair}, bottleneck: {bn} vs oracle {o}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("1000 pairs, max deviation {worst:.1e}, {secs:.2}s"))
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut grid: Vec<WassersteinParams<f64>> = [GroundMetric::L2, GroundMetric::Linf]
        .into_iter()
        .flat_map(|g| [1.0, 2.0].map(|p| params(g, p)))
        .collect();
    grid.push(WassersteinParams::new(GroundMetric::Linf, Order::Infinity).unwrap());
    let mut slack = f64::INFINITY;
    for t in 0..500 {
        let (a, b, c) = (diagram_with(&mut rng, 6), diagram_with(&mut rng, 6), diagram_with(&mut rng, 6));
        for pr in &grid {
            let w = |x: &Diagram, y: &Diagram| wasserstein(x, y, pr).unwrap().0;
            let (ab, ba, bc, ac) = (w(&a, &b), w(&b, &a), w(&b, &c), w(&a, &c));
            ensure(ab == ba, || format!("triple {t}, {pr:?}: W(a,b) = {ab} but W(b,a) = {ba}"))?;
            ensure(ac <= ab + bc + 1e-9, || format!("triple {t}, {pr:?}: {ac} > {ab} + {bc}"))?;
            slack = slack.min(ab + bc - ac);
        }
    }
    Ok(format!("500 triples, smallest triangle slack {slack:.1e}"))
}

fn stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_ratio = 0.0f64;
    for c in 0..100 {
        let n = rng.random_range(3..=15);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let base = persistence_of(&pts, 1);
        for eps in [0.001, 0.01] {
            let moved: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| {
                    let t = rng.random::<f64>() * std::f64::consts::TAU;
                    let r = eps * rng.random::<f64>();
                    vec![p[0] + r * t.cos(), p[1] + r * t.sin()]
                })
                .collect();
            let other = persistence_of(&moved, 1);
            for dim in 0..=1 {
                let d = bottleneck(&finite(base.get(dim).unwrap()), &finite(other.get(dim).unwrap())).unwrap().0;
                ensure(d <= 2.0 * eps + 1e-9, || format!("cloud {c}, eps {eps}, H{dim}: {d}"))?;
                worst_ratio = worst_ratio.max(d / eps);
            }
        }
    }
    Ok(format!("100 clouds, max d_B/eps = {worst_ratio:.3}"))
}

fn known_shapes() -> Outcome {
    let square = persistence_of(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]], 1);
    let sq = square.get(1).unwrap();
    ensure(sq.len() == 1, || format!("square H1 has {} points", sq.len()))?;
    let p = sq.points()[0];
    ensure((p.birth - 1.0).abs() <= 1e-12 && (p.death - 2f64.sqrt()).abs() <= 1e-12, || {
        format!("square H1 point ({}, {})", p.birth, p.death)
    })?;
    let circle: Vec<Vec<f64>> = (0..40)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / 40.0;
            vec![t.cos(), t.sin()]
        })
        .collect();
    let mut pers: Vec<f64> = h1(&circle).points().iter().map(|x| x.persistence()).collect();
    pers.sort_by(|a, b| b.total_cmp(a));
    ensure(!pers.is_empty(), || "circle has no H1 point".into())?;
    let runner = pers.get(1).copied().unwrap_or(0.0);
    ensure(pers[0] >= 10.0 * runner, || format!("circle persistences {pers:?}"))?;
    Ok(format!("square (1, sqrt 2); circle top {:.4}, runner-up {runner:.2e}", pers[0]))
}

fn empty_diagrams() -> Outcome {
    let e = Diagram::empty(1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    ensure(k_geodesic_gaussian(&e, &e, 0.1, GroundMetric::L2, 2.0).unwrap() == 1.0, || "GGT(empty, empty) != 1".into())?;
    ensure(k_pss(&e, &e, 0.1).unwrap() == 0.0, || "PSS(empty, empty) != 0".into())?;
    for _ in 0..100 {
        let d = random_diagram::<f64>(&mut rng, 1, 4);
        for h in [0.1, 1.0] {
            let k = k_geodesic_gaussian(&d, &e, h, GroundMetric::L2, 2.0).unwrap();
            ensure(k > 0.0 && k < 1.0, || format!("GGT(D, empty) = {k}"))?;
            ensure(k_pss(&e, &d, h).unwrap() == 0.0 && k_pss(&d, &e, h).unwrap() == 0.0, || "PSS(empty, D) != 0".into())?;
        }
    }
    Ok("GGT(empty,empty)=1, GGT(D,empty) in (0,1), PSS(empty,.)=0".into())
}

fn fixture_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/ggt_witness.json")
}

fn witness() -> Outcome {
    let search = WitnessSearch { trials: 500, seed: 2024, ..WitnessSearch::default() };
    let mut collections: Vec<Vec<Diagram>> = Vec::new();
    let generator = |rng: &mut ChaCha8Rng| {
        let m = rng.random_range(3..=8);
        let c: Vec<Diagram> = (0..m).map(|_| random_diagram(rng, 1, 4)).collect();
        collections.push(c.clone());
        c
    };
    let w = indefiniteness_witness(generator, &ggt(0.1), &search).map_err(|e| e.to_string())?;
    ensure(w.certified && w.min_eigenvalue < -1e-8, || format!("best eigenvalue {}", w.min_eigenvalue))?;
    let k = kernel_matrix(&w.diagrams, &w.spec).unwrap();
    let ev = oracles::jacobi_eigenvalues(k.n(), k.data());
    ensure(ev[0] < -1e-8, || format!("independent eigenvalue {}", ev[0]))?;
    let text = serde_json::to_string_pretty(&w).unwrap() + "\n";
    let path = fixture_path();
    let note = match std::fs::read_to_string(&path) {
        Ok(stored) => {
            ensure(stored == text, || format!("witness differs from fixture {}", path.display()))?;
            "matches fixture"
        }
        Err(_) => {
            std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
            std::fs::write(&path, &text).map_err(|e| e.to_string())?;
            "fixture written"
        }
    };
    let mut pss_min = f64::INFINITY;
    for c in &collections {
        for sigma in [0.01, 0.1, 1.0] {
            let k = kernel_matrix(c, &KernelSpec::Pss { sigma }).unwrap();
            pss_min = pss_min.min(oracles::jacobi_eigenvalues(k.n(), k.data())[0]);
        }
    }
    ensure(pss_min >= -1e-8, || format!("PSS eigenvalue {pss_min}"))?;
    Ok(format!(
        "GGT eigenvalue {:.3e} at trial {} ({note}); PSS min {pss_min:.1e} over {} collections",
        w.min_eigenvalue,
        w.trial,
        collections.len()
    ))
}

fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn spectral() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_rec = 0.0f64;
    let mut worst_min = f64::INFINITY;
    for t in 0..50 {
        let n = rng.random_range(2..=20);
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = rng.random_range(-1.0..1.0);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let k = KernelMatrix::from_row_major(n, m.clone()).unwrap();
        let oracle = oracles::jacobi_eigenvalues(n, &m);
        let eig = k.eigen().unwrap();
        let rebuilt = eig.reconstruct_with(|l| l);
        let rel = frobenius(&rebuilt.iter().zip(&m).map(|(a, b)| a - b).collect::<Vec<_>>()) / frobenius(&m);
        ensure(rel <= 1e-8, || format!("matrix {t}: reconstruction error {rel:.2e}"))?;
        worst_rec = worst_rec.max(rel);
        for mode in [SpectralMode::Clip, SpectralMode::Flip, SpectralMode::Square] {
            let out = spectral_transform(&k, mode).unwrap();
            let ev = oracles::jacobi_eigenvalues(n, out.data());
            ensure(ev[0] >= -1e-8, || format!("matrix {t}, {mode}: eigenvalue {}", ev[0]))?;
            worst_min = worst_min.min(ev[0]);
            let mut expected: Vec<f64> = oracle.iter().map(|&l| mode.apply(l)).collect();
            expected.sort_by(f64::total_cmp);
            let scale = expected.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            let dev = ev.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            ensure(dev <= 1e-8 * scale, || format!("matrix {t}, {mode}: spectrum off by {dev:.2e}"))?;
        }
    }
    Ok(format!("50 matrices, max reconstruction error {worst_rec:.1e}, min eigenvalue {worst_min:.1e}"))
}

fn labels_of(y: &[f64]) -> Vec<Label> {
    y.iter().map(|&v| Label::from_decision(v)).collect()
}

fn hadamard(y: &[f64], k: &[f64]) -> Vec<f64> {
    let n = y.len();
    (0..n * n).map(|t| y[t / n] * y[t % n] * k[t]).collect()
}

fn ksvm_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = SvmParams { eta: 1.0, ..SvmParams::default() };
    let mut worst = 0.0f64;
    for t in 0..50 {
        let n = rng.random_range(2..=20);
        let rank = rng.random_range(1..=n);
        let k = KernelMatrix::from_row_major(n, oracles::random_psd(&mut rng, n, rank)).unwrap();
        let labels = labels_of(&oracles::random_signs(&mut rng, n));
        let a = svm_train(&k, &labels, &p).map_err(|e| format!("problem {t}: {e}"))?;
        let b = ksvm_train(&k, &labels, &p).map_err(|e| format!("problem {t}: {e}"))?;
        let gap = a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        ensure(gap <= 1e-5, || format!("PSD problem {t}: coefficient gap {gap:.2e}"))?;
        worst = worst.max(gap);
    }
    let mut worst_obj = 0.0f64;
    for t in 0..20 {
        let u = oracles::random_orthogonal(&mut rng, 3);
        let values = [-rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), rng.random_range(-2.0..2.0)];
        let y = oracles::random_signs(&mut rng, 3);
        let g = oracles::compose(&u, &values);
        let k = KernelMatrix::from_row_major(3, hadamard(&y, &g)).unwrap();
        let model = ksvm_train(&k, &labels_of(&y), &p).map_err(|e| format!("problem {t}: {e}"))?;
        ensure(model.flipped_eigenvalues >= 1, || format!("indefinite problem {t} was not flipped"))?;
        let oracle = oracles::grid_search_dual3(&oracles::compose(&u, &values.map(f64::abs)), &y, 1.0);
        let dev = (model.objective - oracle).abs();
        ensure(dev <= 1e-3, || format!("indefinite problem {t}: objective {} vs grid {oracle}", model.objective))?;
        worst_obj = worst_obj.max(dev);
    }
    Ok(format!("PSD max gap {worst:.1e}; indefinite max objective deviation {worst_obj:.1e}"))
}

fn circle_vs_blob() -> Outcome {
    let start = Instant::now();
    let mut circles = SyntheticSpec::new(Generator::CirclePlusNoise, 25, 0.1, 80, 11);
    circles.radius_min = 0.6;
    let blobs = SyntheticSpec::new(Generator::Blobs, 25, 0.15, 80, 12);
    let mut diagrams = Vec::new();
    let mut labels = Vec::new();
    for (spec, label) in [(circles, Label::Positive), (blobs, Label::Negative)] {
        for s in generate::<f64>(&spec).unwrap() {
            diagrams.push(h1(s.cloud.points()));
            labels.push(label);
        }
    }
    let k = kernel_matrix(&diagrams, &ggt(0.1)).unwrap();
    let min_ev = k.min_eigenvalue().unwrap();
    let params = SvmParams { eta: 1.0, ..SvmParams::default() };
    let ksvm = kfold_cv(&labels, &KernelClassifier { kernel: &k, method: SvmMethod::Ksvm, params }, 10, 7)
        .map_err(|e| e.to_string())?;
    ensure(ksvm.mean <= 0.05, || format!("KSVM error {:.4}", ksvm.mean))?;
    let mut parts = vec![format!("ksvm {:.4}", ksvm.mean)];
    for mode in [SpectralMode::Clip, SpectralMode::Flip, SpectralMode::Square] {
        let t = spectral_transform(&k, mode).unwrap();
        let r = kfold_cv(&labels, &KernelClassifier { kernel: &t, method: SvmMethod::Svm, params }, 10, 7)
            .map_err(|e| e.to_string())?;
        ensure((r.mean - ksvm.mean).abs() <= 0.05, || format!("{mode} error {:.4} vs KSVM {:.4}", r.mean, ksvm.mean))?;
        parts.push(format!("{mode} {:.4}", r.mean));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{} (min eigenvalue {min_ev:.3}), {secs:.1}s", parts.join(", ")))
}

fn regression_samples(groups: bool) -> Vec<RegressionSample<f64>> {
    let mut spec = SyntheticSpec::new(Generator::Circle, 20, 0.05, 60, 21);
    spec.radius_min = 0.5;
    spec.radius_max = 1.5;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 0.1).unwrap();
    generate::<f64>(&spec)
        .unwrap()
        .into_iter()
        .map(|s| {
            let d = h1(s.cloud.points());
            let mut y = total_persistence(&d, 1.0).unwrap() + noise.sample(&mut rng);
            let group = if groups {
                let g = i64::from(rng.random::<bool>());
                y += g as f64;
                Some(g)
            } else {
                None
            };
            RegressionSample::new(d, y, group).unwrap()
        })
        .collect()
}

fn regression() -> Outcome {
    let grid: Vec<f64> = (-12..=4).map(|e| 2f64.powi(e)).collect();
    let train = regression_samples(false);
    let ys: Vec<f64> = train.iter().map(|s| s.response).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let tss: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let sel = loo_bandwidth(&train, &ggt(1.0), &grid).map_err(|e| e.to_string())?;
    let diagrams: Vec<Diagram> = train.iter().map(|s| s.diagram.clone()).collect();
    let k = kernel_matrix(&diagrams, &ggt(sel.bandwidth)).unwrap();
    let fit_rss = rss(&nw_fitted(&k, &ys).unwrap(), &ys).unwrap();
    ensure(fit_rss <= 0.25 * tss, || format!("RSS {fit_rss:.4} vs TSS {tss:.4}"))?;
    ensure(sel.loo_error <= 0.25 * tss, || format!("LOO error {:.4} vs TSS {tss:.4}", sel.loo_error))?;

    let grouped = regression_samples(true);
    let gy: Vec<f64> = grouped.iter().map(|s| s.response).collect();
    let gsel = loo_bandwidth(&grouped, &ggt(1.0), &grid).map_err(|e| e.to_string())?;
    let plm = robinson_plm_fit(&grouped, &ggt(1.0), gsel.bandwidth).map_err(|e| e.to_string())?;
    let plm_rss = rss(&plm.fitted, &gy).unwrap();
    let base_rss = rss(&group_means_fit(&grouped), &gy).unwrap();
    ensure(plm_rss < base_rss, || format!("PLM RSS {plm_rss:.4} vs group means {base_rss:.4}"))?;
    Ok(format!(
        "h {:.3e}: RSS {fit_rss:.3}, LOO {:.3}, TSS {tss:.3}; PLM {plm_rss:.3} < group means {base_rss:.3} (offset {:.3})",
        sel.bandwidth,
        sel.loo_error,
        plm.intercepts[1]
    ))
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_topokernels")).args(args).output().map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = tmp.path();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let cls = root.join("cls");
    let reg = root.join("reg");
    cli(&["generate", "--generator", "circle", "--generator", "blobs", "--count", "12", "--n-points", "15", "--seed", "4", "--output-dir", &s(&cls)])?;
    cli(&["generate", "--generator", "circle", "--radius-min", "0.5", "--radius-max", "1.5", "--count", "15", "--n-points", "15", "--seed", "6", "--output-dir", &s(&reg)])?;
    let runs: [(&str, PathBuf); 2] = [("cls", cls.join("manifest.json")), ("reg", reg.join("manifest.json"))];
    let mut files = 0;
    for (name, manifest) in &runs {
        let out = root.join(format!("{name}_out"));
        let mut snaps = Vec::new();
        for _ in 0..2 {
            cli(&["experiment", &s(manifest), "--seed", "9", "--output-dir", &s(&out)])?;
            cli(&["kernel-matrix", &s(manifest), "--output-dir", &s(&out)])?;
            if *name == "cls" {
                cli(&["cv", &s(manifest), "--seed", "9", "--output-dir", &s(&out)])?;
            } else {
                cli(&["fit-nw", &s(manifest), "--output-dir", &s(&out)])?;
            }
            snaps.push(snapshot(&out));
            std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
        }
        ensure(snaps[0].contains_key(Path::new("report.json")), || format!("{name}: no report.json"))?;
        for (path, bytes) in &snaps[0] {
            ensure(snaps[1].get(path) == Some(bytes), || format!("{name}: {} differs between runs", path.display()))?;
        }
        ensure(snaps[0].len() == snaps[1].len(), || format!("{name}: file sets differ"))?;
        files += snaps[0].len();
    }
    Ok(format!("{files} output files byte-identical across reruns"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("metric-oracle equivalence", oracle_equivalence),
        ("metric axioms", metric_axioms),
        ("stability", stability),
        ("known-shape persistence", known_shapes),
        ("empty-diagram behavior", empty_diagrams),
        ("indefiniteness witness", witness),
        ("spectral transforms", spectral),
        ("KSVM correctness", ksvm_correctness),
        ("synthetic classification", circle_vs_blob),
        ("synthetic regression", regression),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
            Err(_) => {
                failed += 1;
                println!("FAIL {:>2} {name}: panicked", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
