//! Run configuration: a JSON file plus command-line overrides.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use selconv::interp::Interpolation;
use selconv::sampling::{resolution_for, ResolutionSpec, SamplingMethod, SamplingParams};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    #[default]
    Sphere,
    Mesh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    pub method: SamplingMethod,
    pub n_phi: Option<usize>,
    pub count: Option<usize>,
    pub subdivisions: Option<usize>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub clustering: Option<SamplingMethod>,
    pub interp: Interpolation,
    pub k: usize,
    pub levels: usize,
    pub delta_theta: Option<f64>,
    pub fov: Option<f64>,
    pub n: Option<usize>,
    pub seed: u64,
    /// Surface sample count for meshes.
    pub samples: Option<usize>,
    pub up: Option<[f64; 3]>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub preview: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub network: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub texture: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task: Task::Sphere,
            method: SamplingMethod::Layering,
            n_phi: None,
            count: None,
            subdivisions: None,
            width: None,
            height: None,
            clustering: None,
            interp: Interpolation::Angular,
            k: 8,
            levels: 1,
            delta_theta: None,
            fov: None,
            n: None,
            seed: 0,
            samples: None,
            up: None,
            input: None,
            output: None,
            preview: None,
            weights: None,
            network: None,
            mesh: None,
            texture: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    /// Rejects meaningless values before any work is done.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.k < 1 {
            return Err(invalid("k must be at least 1"));
        }
        if self.levels < 1 {
            return Err(invalid("levels must be at least 1"));
        }
        if let Some(d) = self.delta_theta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(invalid(format!("delta_theta must be positive, got {d}")));
            }
        }
        if self.fov.is_some() != self.n.is_some() {
            return Err(invalid("fov and n must be given together"));
        }
        if let (Some(fov), Some(n)) = (self.fov, self.n) {
            ResolutionSpec::new(fov, n).map_err(|e| invalid(e.to_string()))?;
        }
        for (name, v) in [
            ("n_phi", self.n_phi),
            ("count", self.count),
            ("width", self.width),
            ("height", self.height),
            ("samples", self.samples),
        ] {
            if v == Some(0) {
                return Err(invalid(format!("{name} must be at least 1")));
            }
        }
        if let Some(up) = self.up {
            if up.iter().map(|v| v * v).sum::<f64>() < 1e-12 || up.iter().any(|v| !v.is_finite()) {
                return Err(invalid("up vector must be finite and non-zero"));
            }
        }
        Ok(())
    }

    /// Angular resolution from `delta_theta`, or `fov / n`.
    pub fn resolution(&self) -> Option<f64> {
        self.delta_theta
            .or_else(|| Some(self.fov? / self.n? as f64))
    }

    /// Sampling parameters from explicit settings, else from the resolution.
    pub fn sampling_params(&self) -> Result<SamplingParams, CliError> {
        let explicit = match self.method {
            SamplingMethod::Layering => self.n_phi.map(|n_phi| SamplingParams::Layering { n_phi }),
            SamplingMethod::Fibonacci => self.count.map(|count| SamplingParams::Fibonacci { count }),
            SamplingMethod::Random => self.count.map(|count| SamplingParams::Random {
                count,
                seed: self.seed,
            }),
            SamplingMethod::Icosphere => self
                .subdivisions
                .map(|subdivisions| SamplingParams::Icosphere { subdivisions }),
            SamplingMethod::Equirect => match (self.width, self.height) {
                (Some(width), Some(height)) => Some(SamplingParams::Equirect { width, height }),
                (None, None) => None,
                _ => return Err(invalid("equirect sampling needs both width and height")),
            },
        };
        if let Some(p) = explicit {
            return Ok(p);
        }
        let d = self.resolution().ok_or_else(|| {
            invalid(format!(
                "{} sampling needs its size parameter or a resolution (delta_theta, or fov and n)",
                self.method
            ))
        })?;
        resolution_for(d, self.method, self.seed)
            .map(|m| m.params)
            .map_err(|e| invalid(e.to_string()))
    }

    /// Mesh sample count: explicit, else about one sample per `delta_theta^2`
    /// of the unit-sphere-equivalent area, else 4096.
    pub fn mesh_samples(&self) -> usize {
        self.samples.unwrap_or_else(|| match self.resolution() {
            Some(d) => ((4.0 * PI) / (d * d)).round().max(1.0) as usize,
            None => 4096,
        })
    }

    pub fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
        path.as_deref()
            .ok_or_else(|| invalid(format!("--{flag} is required")))
    }
}
