//! Experiment configuration: a single JSON document, with command-line
//! flags overriding individual fields. The fully resolved configuration is
//! echoed to `config_resolved.json` next to the results for
//! reproducibility.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Dichotomy,
    RecoverBox,
    RecoverSphere,
    FunkHeckeCheck,
    AxiomsCheck,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "dichotomy" => Ok(Self::Dichotomy),
            "recover-box" => Ok(Self::RecoverBox),
            "recover-sphere" => Ok(Self::RecoverSphere),
            "funk-hecke-check" => Ok(Self::FunkHeckeCheck),
            "axioms-check" => Ok(Self::AxiomsCheck),
            other => Err(CliError::Config(format!(
                "unknown experiment '{other}' (expected dichotomy, recover-box, \
                 recover-sphere, funk-hecke-check, or axioms-check)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Dichotomy => "dichotomy",
            Self::RecoverBox => "recover-box",
            Self::RecoverSphere => "recover-sphere",
            Self::FunkHeckeCheck => "funk-hecke-check",
            Self::AxiomsCheck => "axioms-check",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainConfig {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Sphere2,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityConfig {
    Uniform,
    /// Equally weighted von Mises-Fisher mixture; means default to the
    /// three canonical basis vectors.
    VmfMixture {
        kappa: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        means: Option<Vec<[f64; 3]>>,
    },
    /// Univariate polynomial in the first coordinate.
    CustomPolynomial { coeffs: Vec<f64> },
    /// `(2 + sin(2 pi x)) / 2` on [0, 1].
    #[serde(rename = "smooth-1d")]
    Smooth1d,
    /// Empirical measure read from a plain text file, one point per row,
    /// whitespace or comma separated.
    Empirical { path: PathBuf },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingConfig {
    /// Euclidean coupling `eps_d = d^{-k/(k+1)}`.
    PaperBox { k: usize },
    /// Sphere coupling `k_d = floor(d^{4/3})`.
    PaperSphere,
    /// One resolution per degree: epsilons for Euclidean mollifiers,
    /// zonal degrees (as floats) on the sphere.
    Explicit { values: Vec<f64> },
    /// A single fixed resolution for every degree.
    Fixed { value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MollifierFamilyConfig {
    LasserreBox,
    SmoothBump,
    Zonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisConfig {
    /// Tensor Legendre adapted to the box (the numerically sane default).
    Legendre,
    /// Monomials scaled by their L^2 norms; breaks down past moderate
    /// degree, kept for comparison runs.
    ScaledMonomial,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Box rules: points per axis (default `max(2d + 16, 48)`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_per_axis: Option<usize>,
    /// Sphere rules: Gauss-Legendre nodes in cos(theta)
    /// (default `max(2d + k + 8, 48)`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    /// Sphere rules: azimuthal nodes (default `2 n_theta + 1`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridConfig {
    /// Dichotomy: evaluation points (one coordinate tuple per entry).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    /// Recovery on boxes: the compact interior sub-box K.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_lo: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_hi: Option<Vec<f64>>,
    /// Recovery: number of per-point CSV rows sampled from the error grid.
    pub report_points: usize,
    /// Recovery on boxes: grid points per axis over K.
    pub k_points_per_axis: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: None,
            k_lo: None,
            k_hi: None,
            report_points: 20,
            k_points_per_axis: 41,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub domain: DomainConfig,
    pub density: DensityConfig,
    pub degrees: Vec<usize>,
    pub coupling: CouplingConfig,
    pub mollifier: MollifierFamilyConfig,
    pub basis: BasisConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    #[serde(default)]
    pub dump_moments: bool,
}

impl ExperimentConfig {
    /// The built-in defaults for an experiment; a user config starts from
    /// these and overrides fields.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let base = Self {
            experiment: kind,
            domain: DomainConfig::Box {
                lo: vec![-1.0],
                hi: vec![1.0],
            },
            density: DensityConfig::Uniform,
            degrees: vec![],
            coupling: CouplingConfig::Fixed { value: 0.2 },
            mollifier: MollifierFamilyConfig::LasserreBox,
            basis: BasisConfig::Legendre,
            quadrature: QuadratureConfig::default(),
            grid: GridConfig::default(),
            out_dir: PathBuf::from("out"),
            seed: 42,
            dump_moments: false,
        };
        match kind {
            ExperimentKind::Dichotomy => Self {
                degrees: (1..=10).map(|i| 2 * i).collect(),
                grid: GridConfig {
                    points: Some(vec![
                        vec![0.0],
                        vec![0.5],
                        vec![-0.5],
                        vec![1.5],
                        vec![2.0],
                    ]),
                    ..GridConfig::default()
                },
                ..base
            },
            ExperimentKind::RecoverBox => Self {
                domain: DomainConfig::Box {
                    lo: vec![0.0],
                    hi: vec![1.0],
                },
                density: DensityConfig::Smooth1d,
                degrees: vec![4, 8, 16, 24, 32],
                coupling: CouplingConfig::PaperBox { k: 2 },
                mollifier: MollifierFamilyConfig::SmoothBump,
                grid: GridConfig {
                    k_lo: Some(vec![0.4]),
                    k_hi: Some(vec![0.6]),
                    ..GridConfig::default()
                },
                ..base
            },
            ExperimentKind::RecoverSphere => Self {
                domain: DomainConfig::Sphere2,
                density: DensityConfig::VmfMixture {
                    kappa: 3.0,
                    means: None,
                },
                degrees: vec![5, 10, 15, 20, 25, 30],
                coupling: CouplingConfig::PaperSphere,
                mollifier: MollifierFamilyConfig::Zonal,
                ..base
            },
            ExperimentKind::FunkHeckeCheck => Self {
                domain: DomainConfig::Sphere2,
                degrees: (1..=8).collect(),
                mollifier: MollifierFamilyConfig::Zonal,
                ..base
            },
            ExperimentKind::AxiomsCheck => base,
        }
    }

    /// Loads a config file as a JSON patch over the experiment defaults:
    /// fields present in the file replace the defaults.
    pub fn load(path: &std::path::Path, kind_override: Option<ExperimentKind>) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let patch: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid JSON in {}: {e}", path.display())))?;
        let kind = match kind_override {
            Some(k) => k,
            None => match patch.get("experiment") {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| CliError::Config(format!("bad experiment field: {e}")))?,
                None => {
                    return Err(CliError::Config(
                        "config has no 'experiment' field and none was given on the command line"
                            .into(),
                    ))
                }
            },
        };
        let mut merged = serde_json::to_value(Self::defaults(kind))
            .map_err(|e| CliError::Config(e.to_string()))?;
        merge_json(&mut merged, patch);
        merged["experiment"] = serde_json::to_value(kind).unwrap();
        serde_json::from_value(merged)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.experiment == ExperimentKind::AxiomsCheck {
            // runs at fixed diagnostic resolutions, no degree schedule
            return Ok(());
        }
        if self.degrees.is_empty() {
            return Err(CliError::Config("degree list is empty".into()));
        }
        if self.degrees.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config(
                "degree list must be strictly increasing".into(),
            ));
        }
        if let DensityConfig::VmfMixture { kappa, .. } = &self.density {
            if *kappa < 0.0 {
                return Err(CliError::Config("kappa must be nonnegative".into()));
            }
        }
        if let CouplingConfig::Explicit { values } = &self.coupling {
            if values.len() != self.degrees.len() {
                return Err(CliError::Config(format!(
                    "explicit coupling needs one value per degree ({} != {})",
                    values.len(),
                    self.degrees.len()
                )));
            }
        }
        Ok(())
    }

    /// Resolution (epsilon or zonal degree) for the i-th degree.
    pub fn resolution_for(&self, index: usize) -> f64 {
        let d = self.degrees[index] as f64;
        match &self.coupling {
            CouplingConfig::PaperBox { k } => {
                let k = *k as f64;
                d.powf(-k / (k + 1.0))
            }
            CouplingConfig::PaperSphere => d.powf(4.0 / 3.0).floor(),
            CouplingConfig::Explicit { values } => values[index],
            CouplingConfig::Fixed { value } => *value,
        }
    }
}

/// Shallow-merge `patch` into `base` (objects merge recursively, scalars
/// and arrays replace).
fn merge_json(base: &mut serde_json::Value, patch: serde_json::Value) {
    match (base, patch) {
        (serde_json::Value::Object(base_map), serde_json::Value::Object(patch_map)) => {
            for (k, v) in patch_map {
                match base_map.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge_json(slot, v),
                    Some(slot) => *slot = v,
                    None => {
                        base_map.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}
