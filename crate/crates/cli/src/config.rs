//! Experiment manifests and filtration settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use topokernels::filtration::Metric;
use topokernels::kernels::{KernelSpec, SpectralMode};
use topokernels::learning::{Label, SvmMethod, SvmParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EssentialMode {
    /// Cap the essential class in dimension 0, drop essential classes above.
    #[default]
    Auto,
    /// Remove points with infinite death.
    Drop,
    /// Replace infinite deaths by the filtration's maximal scale.
    Cap,
    /// Write `inf` deaths; only valid when no kernel or distance is computed.
    Keep,
}

impl std::str::FromStr for EssentialMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(EssentialMode::Auto),
            "drop" => Ok(EssentialMode::Drop),
            "cap" => Ok(EssentialMode::Cap),
            "keep" => Ok(EssentialMode::Keep),
            other => Err(format!("unknown essential policy `{other}` (auto, drop, cap, keep)")),
        }
    }
}

fn default_max_dim() -> usize {
    2
}

fn default_hom_dim() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationSettings {
    #[serde(default = "default_metric")]
    pub metric: Metric,
    /// Largest simplex dimension in the Rips complex.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    /// Scale cutoff; the diameter when absent.
    #[serde(default)]
    pub max_scale: Option<f64>,
    #[serde(default = "default_hom_dim")]
    pub hom_dim: usize,
    #[serde(default)]
    pub essential: EssentialMode,
}

fn default_metric() -> Metric {
    Metric::Euclidean
}

impl Default for FiltrationSettings {
    fn default() -> Self {
        Self { metric: Metric::Euclidean, max_dim: 2, max_scale: None, hom_dim: 1, essential: EssentialMode::Auto }
    }
}

impl FiltrationSettings {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.hom_dim + 1 > self.max_dim {
            return Err(CliError::input(format!(
                "hom_dim {} needs max_dim >= {}, got {}",
                self.hom_dim,
                self.hom_dim + 1,
                self.max_dim
            )));
        }
        if let Some(s) = self.max_scale {
            if !(s > 0.0) || !s.is_finite() {
                return Err(CliError::input(format!("max_scale must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    pub k: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Spectral transforms compared against the Krein SVM.
    #[serde(default = "all_transforms")]
    pub transforms: Vec<SpectralMode>,
}

fn all_transforms() -> Vec<SpectralMode> {
    vec![SpectralMode::Clip, SpectralMode::Flip, SpectralMode::Square]
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 10, seed: None, transforms: all_transforms() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    #[serde(default = "default_method")]
    pub method: SvmMethod,
    /// Spectral transform applied before a standard SVM.
    #[serde(default)]
    pub transform: Option<SpectralMode>,
}

fn default_method() -> SvmMethod {
    SvmMethod::Ksvm
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { method: SvmMethod::Ksvm, transform: None }
    }
}

/// JSON manifest shared by `kernel-matrix`, `fit-nw`, `train-ksvm`, `cv`
/// and `experiment`. Paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub task: Option<Task>,
    /// Diagram files.
    #[serde(default)]
    pub diagrams: Vec<PathBuf>,
    /// Point-cloud files, converted to diagrams with `filtration`.
    #[serde(default)]
    pub clouds: Vec<PathBuf>,
    #[serde(default)]
    pub filtration: Option<FiltrationSettings>,
    #[serde(default)]
    pub responses: Option<Vec<f64>>,
    #[serde(default)]
    pub labels: Option<Vec<Label>>,
    #[serde(default)]
    pub groups: Option<Vec<i64>>,
    #[serde(default)]
    pub kernel: Option<KernelSpec<f64>>,
    #[serde(default)]
    pub solver: Option<SvmParams<f64>>,
    #[serde(default)]
    pub cv: Option<CvConfig>,
    #[serde(default)]
    pub train: Option<TrainConfig>,
    #[serde(default)]
    pub h_grid: Option<Vec<f64>>,
}

/// A manifest with paths resolved and defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedManifest {
    pub manifest: Manifest,
    #[serde(skip)]
    pub base: PathBuf,
}

impl ResolvedManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read manifest {}: {e}", path.display())))?;
        let mut manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("invalid manifest {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        for p in manifest.diagrams.iter_mut().chain(manifest.clouds.iter_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        let mut rm = Self { manifest, base };
        rm.fill_defaults();
        Ok(rm)
    }

    /// Writes every implicit default into the manifest so reports echo it.
    pub fn fill_defaults(&mut self) {
        let m = &mut self.manifest;
        if !m.clouds.is_empty() && m.filtration.is_none() {
            m.filtration = Some(FiltrationSettings::default());
        }
        if m.task.is_none() {
            m.task = match (&m.responses, &m.labels) {
                (Some(_), None) => Some(Task::Regression),
                (None, Some(_)) => Some(Task::Classification),
                _ => None,
            };
        }
        if m.task == Some(Task::Classification) {
            m.solver.get_or_insert_with(SvmParams::default);
            m.cv.get_or_insert_with(CvConfig::default);
            m.train.get_or_insert_with(TrainConfig::default);
        }
    }

    pub fn sample_count(&self) -> usize {
        self.manifest.diagrams.len().max(self.manifest.clouds.len())
    }

    /// Structural checks that need no file access.
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.manifest;
        match (m.diagrams.is_empty(), m.clouds.is_empty()) {
            (true, true) => return Err(CliError::input("manifest lists neither diagrams nor clouds")),
            (false, false) => return Err(CliError::input("manifest lists both diagrams and clouds; choose one")),
            _ => {}
        }
        let n = self.sample_count();
        let check = |name: &str, len: Option<usize>| match len {
            Some(l) if l != n => Err(CliError::input(format!("{name} has {l} entries for {n} samples"))),
            _ => Ok(()),
        };
        check("responses", m.responses.as_ref().map(Vec::len))?;
        check("labels", m.labels.as_ref().map(Vec::len))?;
        check("groups", m.groups.as_ref().map(Vec::len))?;
        if let Some(f) = &m.filtration {
            f.validate()?;
        }
        if let Some(k) = &m.kernel {
            k.validate().map_err(|e| CliError::input(format!("kernel: {e}")))?;
        }
        if let Some(s) = &m.solver {
            s.validate().map_err(|e| CliError::input(format!("solver: {e}")))?;
        }
        if let Some(g) = &m.h_grid {
            if g.is_empty() || g.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
                return Err(CliError::input("h_grid must be a nonempty list of positive values"));
            }
        }
        if let Some(responses) = &m.responses {
            if responses.iter().any(|y| !y.is_finite()) {
                return Err(CliError::input("responses must be finite"));
            }
        }
        Ok(())
    }

    /// Every referenced file must exist.
    pub fn check_files(&self) -> Result<(), CliError> {
        for p in self.manifest.diagrams.iter().chain(&self.manifest.clouds) {
            if !p.is_file() {
                return Err(CliError::pipeline("validate", format!("missing input file {}", p.display())));
            }
        }
        Ok(())
    }

    pub fn kernel(&self) -> Result<&KernelSpec<f64>, CliError> {
        self.manifest.kernel.as_ref().ok_or_else(|| CliError::input("manifest has no kernel"))
    }

    pub fn task(&self) -> Result<Task, CliError> {
        if let Some(t) = self.manifest.task {
            return Ok(t);
        }
        match (&self.manifest.responses, &self.manifest.labels) {
            (Some(_), None) => Ok(Task::Regression),
            (None, Some(_)) => Ok(Task::Classification),
            _ => Err(CliError::input("manifest must set `task` or exactly one of responses/labels")),
        }
    }
}
