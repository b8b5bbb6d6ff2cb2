//! Command implementations. Every command writes its artifacts under the
//! output directory and returns the paths it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use topokernels::filtration::{build_distance_matrix, build_rips_filtration, Metric};
use topokernels::io::{
    format_float, read_cloud, read_diagram, read_distance_matrix, write_cloud, write_diagram, write_kernel_matrix,
    write_matching,
};
use topokernels::kernels::{
    kernel_matrix_cached, spectral_transform, DistanceCache, KernelMatrix, KernelSpec, SpectralMode,
};
use topokernels::learning::{
    group_means_fit, kfold_cv, ksvm_train, loo_bandwidth_cached, nw_fitted, nw_loo, robinson_plm_fit, rss, svm_train,
    CvReport, KernelClassifier, Label, RegressionSample, SvmMethod, SvmModel, SvmParams,
};
use topokernels::metrics::{wasserstein, GroundMetric, Order, WassersteinParams};
use topokernels::persistence::{cap_or_drop_essential, compute_persistence, EssentialPolicy};
use topokernels::synthetic::{generate, Generator, SyntheticSpec};
use topokernels::Diagram;

use crate::config::{
    CvConfig, EssentialMode, FiltrationSettings, Manifest, ResolvedManifest, Task, TrainConfig,
};
use crate::error::CliError;

/// Global options shared by every command.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
}

impl Context {
    pub fn new(output_dir: impl Into<PathBuf>, seed: Option<u64>) -> Self {
        Self { seed, output_dir: output_dir.into() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    fn ensure_dir(&self, sub: Option<&str>) -> Result<PathBuf, CliError> {
        let dir = match sub {
            Some(s) => self.output_dir.join(s),
            None => self.output_dir.clone(),
        };
        fs::create_dir_all(&dir).map_err(|e| CliError::pipeline("write", format!("{}: {e}", dir.display())))?;
        Ok(dir)
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::pipeline("write", format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, content).map_err(|e| CliError::pipeline("write", format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::pipeline("write", format!("serializing report: {e}")))?;
    text.push('\n');
    write_file(path, &text)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn input_err(path: &Path, e: topokernels::Error) -> CliError {
    CliError::input(format!("{}: {e}", path.display()))
}

/// Diagram of one cloud (or precomputed distance file) under `settings`.
pub fn cloud_to_diagram(path: &Path, settings: &FiltrationSettings) -> Result<Diagram, CliError> {
    settings.validate()?;
    let text = read_text(path)?;
    let dm = if settings.metric == Metric::Precomputed {
        read_distance_matrix::<f64>(&text).map_err(|e| input_err(path, e))?
    } else {
        let cloud = read_cloud::<f64>(&text).map_err(|e| input_err(path, e))?;
        build_distance_matrix(&cloud, settings.metric).map_err(|e| input_err(path, e))?
    };
    let f = build_rips_filtration(&dm, settings.max_dim, settings.max_scale)
        .map_err(|e| CliError::pipeline("filtration", format!("{}: {e}", path.display())))?;
    let set = compute_persistence(&f, settings.hom_dim)
        .map_err(|e| CliError::pipeline("persistence", format!("{}: {e}", path.display())))?;
    let d = set.get(settings.hom_dim).cloned().unwrap_or_else(|| Diagram::empty(settings.hom_dim));
    let policy = match settings.essential {
        EssentialMode::Keep => return Ok(d),
        EssentialMode::Auto if settings.hom_dim == 0 => EssentialPolicy::CapAt(f.max_scale()),
        EssentialMode::Auto | EssentialMode::Drop => EssentialPolicy::Drop,
        EssentialMode::Cap => EssentialPolicy::CapAt(f.max_scale()),
    };
    cap_or_drop_essential(&d, policy).map_err(|e| CliError::pipeline("persistence", e))
}

pub fn cmd_diagram(
    ctx: &Context,
    input: &Path,
    settings: &FiltrationSettings,
    output: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let d = cloud_to_diagram(input, settings)?;
    let out = match output {
        Some(p) => p.to_path_buf(),
        None => {
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("cloud");
            ctx.path(&format!("{stem}.diagram.csv"))
        }
    };
    write_file(&out, &write_diagram(&d))?;
    Ok(out)
}

pub fn load_diagram_file(path: &Path, dim: Option<usize>) -> Result<Diagram, CliError> {
    read_diagram(&read_text(path)?, dim).map_err(|e| input_err(path, e))
}

/// Distance value (and the written matching file, if requested).
pub fn cmd_distance(
    a: &Path,
    b: &Path,
    dim: Option<usize>,
    ground: GroundMetric,
    order: Order<f64>,
    matching: Option<&Path>,
) -> Result<f64, CliError> {
    let da = load_diagram_file(a, dim)?;
    let db = load_diagram_file(b, dim)?;
    let params = WassersteinParams::new(ground, order).map_err(|e| CliError::input(e.to_string()))?;
    let (value, m) = wasserstein(&da, &db, &params).map_err(|e| CliError::pipeline("distance", e))?;
    if let Some(path) = matching {
        write_file(path, &write_matching(&m))?;
    }
    Ok(value)
}

/// Loads every diagram of a manifest, converting clouds when listed.
pub fn load_manifest_diagrams(rm: &ResolvedManifest) -> Result<Vec<Diagram>, CliError> {
    let m = &rm.manifest;
    if !m.clouds.is_empty() {
        let settings = m.filtration.clone().unwrap_or_default();
        m.clouds.iter().map(|p| cloud_to_diagram(p, &settings)).collect()
    } else {
        let dim = m.filtration.as_ref().map(|f| f.hom_dim);
        m.diagrams.iter().map(|p| load_diagram_file(p, dim)).collect()
    }
}

struct Prepared {
    rm: ResolvedManifest,
    diagrams: Vec<Diagram>,
}

// Runs validation and loading; with `staged` every failure is a pipeline error.
fn prepare(manifest: &Path, staged: bool) -> Result<Prepared, CliError> {
    let rm = ResolvedManifest::load(manifest)?;
    let stage = |e: CliError, name: &str| if staged { e.in_stage(name) } else { e };
    rm.validate().map_err(|e| stage(e, "validate"))?;
    rm.check_files()?;
    let diagrams = load_manifest_diagrams(&rm).map_err(|e| stage(e, "diagrams"))?;
    Ok(Prepared { rm, diagrams })
}

fn kernel_matrix_for(diagrams: &[Diagram], spec: &KernelSpec<f64>, cache: &DistanceCache<f64>) -> Result<KernelMatrix<f64>, CliError> {
    kernel_matrix_cached(diagrams, spec, cache).map_err(|e| CliError::pipeline("kernel", e))
}

pub fn cmd_kernel_matrix(
    ctx: &Context,
    manifest: &Path,
    transform: Option<SpectralMode>,
    output: Option<&Path>,
) -> Result<PathBuf, CliError> {
    let p = prepare(manifest, false)?;
    let spec = p.rm.kernel()?.clone();
    let mut k = kernel_matrix_for(&p.diagrams, &spec, &DistanceCache::new())?;
    if let Some(t) = transform {
        k = spectral_transform(&k, t).map_err(|e| CliError::pipeline("transform", e))?;
    }
    let out = output.map(Path::to_path_buf).unwrap_or_else(|| ctx.path("kernel_matrix.csv"));
    write_file(&out, &write_kernel_matrix(&k))?;
    Ok(out)
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 { xs[n / 2] } else { (xs[n / 2 - 1] + xs[n / 2]) / 2.0 })
}

/// Bandwidth grid: explicit, or `median scale x 2^(-4..=4)` where the scale is
/// the median squared distance (Gaussian), median distance (Laplacian) or the
/// spec's own parameter otherwise.
pub fn resolve_h_grid(
    explicit: Option<&[f64]>,
    diagrams: &[Diagram],
    spec: &KernelSpec<f64>,
    cache: &DistanceCache<f64>,
) -> Result<(Vec<f64>, bool), CliError> {
    if let Some(g) = explicit {
        return Ok((g.to_vec(), false));
    }
    let base = match (spec, spec.wasserstein_params()) {
        (KernelSpec::GeodesicGaussian { .. } | KernelSpec::GeodesicLaplacian { .. }, Some(params)) => {
            let squared = matches!(spec, KernelSpec::GeodesicGaussian { .. });
            let mut ws = Vec::new();
            for i in 0..diagrams.len() {
                for j in 0..i {
                    let w = cache.distance(&diagrams[i], &diagrams[j], &params).map_err(|e| CliError::pipeline("kernel", e))?;
                    ws.push(if squared { w * w } else { w });
                }
            }
            median(ws).filter(|m| *m > 0.0)
        }
        _ => spec.bandwidth(),
    };
    let base = base.ok_or_else(|| {
        CliError::pipeline("bandwidth", "cannot derive a bandwidth grid: pairwise distances have zero median; set h_grid")
    })?;
    Ok(((-4..=4).map(|e| base * 2f64.powi(e)).collect(), true))
}

#[derive(Debug, Serialize)]
struct PlmReport {
    groups: Vec<i64>,
    intercepts: Vec<f64>,
    bandwidth: f64,
    rss: f64,
    group_means_rss: f64,
}

fn regression(ctx: &Context, p: &Prepared, prefix: &str) -> Result<(Value, Vec<PathBuf>), CliError> {
    let m = &p.rm.manifest;
    let ys = m.responses.clone().ok_or_else(|| CliError::input("regression needs `responses`"))?;
    let family = p.rm.kernel()?.clone();
    let samples: Vec<RegressionSample<f64>> = p
        .diagrams
        .iter()
        .zip(&ys)
        .enumerate()
        .map(|(i, (d, &y))| RegressionSample::new(d.clone(), y, m.groups.as_ref().map(|g| g[i])))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::input(e.to_string()))?;
    let cache = DistanceCache::new();
    let (grid, auto) = resolve_h_grid(m.h_grid.as_deref(), &p.diagrams, &family, &cache)?;
    let selection =
        loo_bandwidth_cached(&samples, &family, &grid, &cache).map_err(|e| CliError::pipeline("bandwidth", e))?;
    let spec = family.with_bandwidth(selection.bandwidth);
    let k = kernel_matrix_for(&p.diagrams, &spec, &cache)?;
    let stage = |e| CliError::pipeline("regression", e);
    let fitted = nw_fitted(&k, &ys).map_err(stage)?;
    let loo = nw_loo(&k, &ys).map_err(stage)?;
    let fit_rss = rss(&fitted, &ys).map_err(stage)?;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let tss: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();

    let plm = match &m.groups {
        Some(_) => {
            let fit = robinson_plm_fit(&samples, &family, selection.bandwidth).map_err(stage)?;
            let baseline = group_means_fit(&samples);
            Some((fit.clone(), PlmReport {
                groups: fit.groups.clone(),
                intercepts: fit.intercepts.clone(),
                bandwidth: selection.bandwidth,
                rss: rss(&fit.fitted, &ys).map_err(stage)?,
                group_means_rss: rss(&baseline, &ys).map_err(stage)?,
            }))
        }
        None => None,
    };

    let mut csv = String::from(if plm.is_some() { "index,observed,fitted,loo,group,plm_fitted\n" } else { "index,observed,fitted,loo\n" });
    for i in 0..ys.len() {
        csv.push_str(&format!("{i},{},{},{}", format_float(ys[i]), format_float(fitted[i]), format_float(loo[i])));
        if let (Some((fit, _)), Some(groups)) = (&plm, &m.groups) {
            csv.push_str(&format!(",{},{}", groups[i], format_float(fit.fitted[i])));
        }
        csv.push('\n');
    }
    let pred_name = format!("{prefix}predictions.csv");
    let pred_path = ctx.path(&pred_name);
    write_file(&pred_path, &csv)?;

    let report = json!({
        "task": "regression",
        "n": ys.len(),
        "kernel": spec,
        "h_grid": grid,
        "h_grid_auto": auto,
        "selection": selection,
        "rss": fit_rss,
        "loo_rss": selection.loo_error,
        "total_sum_of_squares": tss,
        "rss_fraction": if tss > 0.0 { Value::from(fit_rss / tss) } else { Value::Null },
        "plm": plm.map(|p| p.1),
        "predictions": pred_name,
    });
    Ok((report, vec![pred_path]))
}

fn echo(rm: &ResolvedManifest, ctx: &Context, seed: Option<u64>) -> Value {
    json!({
        "manifest": rm.manifest,
        "seed": seed,
        "output_dir": ctx.output_dir,
    })
}

pub fn cmd_fit_nw(ctx: &Context, manifest: &Path) -> Result<Vec<PathBuf>, CliError> {
    let p = prepare(manifest, false)?;
    ctx.ensure_dir(None)?;
    let (mut report, mut written) = regression(ctx, &p, "nw_")?;
    report["config"] = echo(&p.rm, ctx, None);
    let path = ctx.path("nw_report.json");
    write_json(&path, &report)?;
    written.insert(0, path);
    Ok(written)
}

fn labels_of(m: &Manifest) -> Result<Vec<Label>, CliError> {
    m.labels.clone().ok_or_else(|| CliError::input("classification needs `labels`"))
}

fn train_model(k: &KernelMatrix<f64>, labels: &[Label], train: &TrainConfig, params: &SvmParams<f64>) -> Result<(SvmModel<f64>, KernelMatrix<f64>), CliError> {
    let stage = |e| CliError::pipeline("training", e);
    match (train.method, train.transform) {
        (SvmMethod::Ksvm, None) => Ok((ksvm_train(k, labels, params).map_err(stage)?, k.clone())),
        (SvmMethod::Ksvm, Some(_)) => Err(CliError::input("the Krein SVM takes the untransformed kernel; drop `transform`")),
        (SvmMethod::Svm, t) => {
            let kt = match t {
                Some(mode) => spectral_transform(k, mode).map_err(|e| CliError::pipeline("transform", e))?,
                None => k.clone(),
            };
            Ok((svm_train(&kt, labels, params).map_err(stage)?, kt))
        }
    }
}

pub fn cmd_train_ksvm(ctx: &Context, manifest: &Path) -> Result<Vec<PathBuf>, CliError> {
    let p = prepare(manifest, false)?;
    let labels = labels_of(&p.rm.manifest)?;
    let spec = p.rm.kernel()?.clone();
    let params = p.rm.manifest.solver.unwrap_or_default();
    let train = p.rm.manifest.train.clone().unwrap_or_default();
    let k = kernel_matrix_for(&p.diagrams, &spec, &DistanceCache::new())?;
    let (model, used) = train_model(&k, &labels, &train, &params)?;
    let mut csv = String::from("index,label,predicted,decision\n");
    let mut errors = 0;
    for i in 0..labels.len() {
        let v = model.decision_from_row(used.row(i)).map_err(|e| CliError::pipeline("prediction", e))?;
        let pred = Label::from_decision(v);
        errors += usize::from(pred != labels[i]);
        csv.push_str(&format!("{i},{},{},{}\n", labels[i].sign(), pred.sign(), format_float(v)));
    }
    ctx.ensure_dir(None)?;
    let pred_path = ctx.path("svm_predictions.csv");
    write_file(&pred_path, &csv)?;
    let report = json!({
        "config": echo(&p.rm, ctx, None),
        "method": train.method,
        "transform": train.transform,
        "kernel": spec,
        "solver": params,
        "n": labels.len(),
        "min_eigenvalue": k.min_eigenvalue().map_err(|e| CliError::pipeline("kernel", e))?,
        "training_error": errors as f64 / labels.len() as f64,
        "model": {
            "kind": model.kind,
            "bias": model.bias,
            "flipped_eigenvalues": model.flipped_eigenvalues,
            "support": model.support,
            "objective": model.objective,
            "kkt_residual": model.kkt_residual,
            "iterations": model.iterations,
            "dual": model.dual,
            "coefficients": model.coefficients,
        },
        "predictions": "svm_predictions.csv",
    });
    let path = ctx.path("svm_report.json");
    write_json(&path, &report)?;
    Ok(vec![path, pred_path])
}

fn cross_validation(p: &Prepared, seed: u64) -> Result<Value, CliError> {
    let labels = labels_of(&p.rm.manifest)?;
    let spec = p.rm.kernel()?.clone();
    let params = p.rm.manifest.solver.unwrap_or_default();
    let cv = p.rm.manifest.cv.clone().unwrap_or_default();
    let k = kernel_matrix_for(&p.diagrams, &spec, &DistanceCache::new())?;
    let stage = |e| CliError::pipeline("cross-validation", e);
    let mut results: Vec<CvReport<f64>> = Vec::new();
    results.push(
        kfold_cv(&labels, &KernelClassifier { kernel: &k, method: SvmMethod::Ksvm, params }, cv.k, seed).map_err(stage)?,
    );
    for &mode in &cv.transforms {
        let kt = spectral_transform(&k, mode).map_err(|e| CliError::pipeline("transform", e))?;
        results.push(
            kfold_cv(&labels, &KernelClassifier { kernel: &kt, method: SvmMethod::Svm, params }, cv.k, seed)
                .map_err(stage)?,
        );
    }
    Ok(json!({
        "task": "classification",
        "n": labels.len(),
        "kernel": spec,
        "solver": params,
        "cv": CvConfig { seed: Some(seed), ..cv },
        "min_eigenvalue": k.min_eigenvalue().map_err(|e| CliError::pipeline("kernel", e))?,
        "results": results,
    }))
}

fn cv_seed(ctx: &Context, m: &Manifest) -> u64 {
    m.cv.as_ref().and_then(|c| c.seed).or(ctx.seed).unwrap_or(0)
}

pub fn cmd_cv(ctx: &Context, manifest: &Path) -> Result<Vec<PathBuf>, CliError> {
    let p = prepare(manifest, false)?;
    let seed = cv_seed(ctx, &p.rm.manifest);
    let mut report = cross_validation(&p, seed)?;
    report["config"] = echo(&p.rm, ctx, Some(seed));
    ctx.ensure_dir(None)?;
    let path = ctx.path("cv_report.json");
    write_json(&path, &report)?;
    Ok(vec![path])
}

/// Options of `generate`; each generator becomes one class.
#[derive(Debug, Clone, Serialize)]
pub struct GenerateOptions {
    pub generators: Vec<Generator>,
    pub n_points: usize,
    pub noise_sd: f64,
    pub count: usize,
    pub radius_min: f64,
    pub radius_max: f64,
    pub centers: usize,
    pub outlier_fraction: f64,
}

pub fn cmd_generate(ctx: &Context, opts: &GenerateOptions) -> Result<Vec<PathBuf>, CliError> {
    if opts.generators.is_empty() || opts.generators.len() > 2 {
        return Err(CliError::input("generate takes one generator (regression) or two (binary classification)"));
    }
    let seed = ctx.seed.unwrap_or(0);
    let dir = ctx.ensure_dir(Some("clouds"))?;
    let mut clouds = Vec::new();
    let mut labels = Vec::new();
    let mut radii = Vec::new();
    let mut specs = Vec::new();
    for (class, &generator) in opts.generators.iter().enumerate() {
        let spec = SyntheticSpec {
            generator,
            n_points: opts.n_points,
            noise_sd: opts.noise_sd,
            count: opts.count,
            seed: seed.wrapping_add(class as u64),
            radius_min: opts.radius_min,
            radius_max: opts.radius_max,
            centers: opts.centers,
            outlier_fraction: opts.outlier_fraction,
        };
        let samples = generate::<f64>(&spec).map_err(|e| CliError::input(e.to_string()))?;
        for s in samples {
            let name = format!("clouds/cloud_{:04}.csv", clouds.len());
            write_file(&dir.join(format!("cloud_{:04}.csv", clouds.len())), &write_cloud(&s.cloud))?;
            clouds.push(PathBuf::from(name));
            labels.push(if class == 0 { Label::Positive } else { Label::Negative });
            radii.push(s.radius);
        }
        specs.push(spec);
    }
    let classification = opts.generators.len() == 2;
    let manifest = Manifest {
        task: Some(if classification { Task::Classification } else { Task::Regression }),
        diagrams: Vec::new(),
        clouds,
        filtration: Some(FiltrationSettings::default()),
        responses: (!classification).then_some(radii),
        labels: classification.then_some(labels),
        groups: None,
        kernel: Some(KernelSpec::GeodesicGaussian { bandwidth: 0.1, ground: GroundMetric::L2, order: 2.0 }),
        solver: Some(SvmParams::default()),
        cv: classification.then(CvConfig::default),
        train: None,
        h_grid: None,
    };
    let manifest_path = ctx.path("manifest.json");
    write_json(&manifest_path, &manifest)?;
    let spec_path = ctx.path("synthetic.json");
    write_json(&spec_path, &json!({ "options": opts, "seed": seed, "specs": specs }))?;
    Ok(vec![manifest_path, spec_path])
}

/// Full pipeline; every failure is reported with the stage it occurred in.
pub fn cmd_experiment(ctx: &Context, manifest: &Path) -> Result<Vec<PathBuf>, CliError> {
    let p = prepare(manifest, true)?;
    let task = p.rm.task().map_err(|e| e.in_stage("validate"))?;
    p.rm.kernel().map_err(|e| e.in_stage("validate"))?;
    ctx.ensure_dir(Some("diagrams"))?;
    let mut written = Vec::new();
    let mut names = Vec::new();
    for (i, d) in p.diagrams.iter().enumerate() {
        let name = format!("diagrams/diagram_{i:04}.csv");
        let path = ctx.path(&name);
        write_file(&path, &write_diagram(d))?;
        names.push(name);
    }
    let staged = |e: CliError| e.in_stage("learning");
    let (mut report, seed) = match task {
        Task::Regression => {
            let (r, w) = regression(ctx, &p, "").map_err(|e| match e {
                CliError::Input(_) => staged(e),
                other => other,
            })?;
            written.extend(w);
            (r, None)
        }
        Task::Classification => {
            let seed = cv_seed(ctx, &p.rm.manifest);
            (cross_validation(&p, seed).map_err(|e| match e {
                CliError::Input(_) => staged(e),
                other => other,
            })?, Some(seed))
        }
    };
    report["config"] = echo(&p.rm, ctx, seed);
    report["diagram_files"] = json!(names);
    let path = ctx.path("report.json");
    write_json(&path, &report)?;
    written.insert(0, path);
    Ok(written)
}
