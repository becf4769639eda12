//! Experiment configuration, validation and the preset registry.

use std::path::{Path, PathBuf};

use dmv_core::ansatz::{AnsatzSpec, SchmidtAnsatzSpec, UCCSDSpec};
use dmv_core::estimator::EstimatorConfig;
use dmv_core::linalg;
use dmv_core::pauli::PauliSum;
use dmv_core::stabilizer::build_stabilizer_hamiltonian;
use dmv_core::vqe::{CostMode, OptimizerConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::formats::{self, HamiltonianFile, StabilizerFile};

pub const SURFACE10: &str = include_str!("../data/surface10.json");
pub const BELL: &str = include_str!("../data/bell.json");
pub const H2_0735: &str = include_str!("../data/h2/h2_r0.735.json");

/// Names accepted wherever a preset is expected.
pub const PRESETS: [&str; 4] = ["bell-stabilizer", "surface10-good", "surface10-bad", "h2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSource {
    Hamiltonian { path: String },
    Stabilizer { path: String, partition: String },
    Preset { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Noise strengths; empty means the experiment's own value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub noise: Vec<f64>,
    /// Hamiltonian files (for example one per bond length); empty means
    /// the experiment's own problem.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hamiltonians: Vec<String>,
    /// Also run the unmitigated baseline at every point.
    #[serde(default)]
    pub compare_baseline: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    pub ansatz: AnsatzSpec,
    #[serde(default = "one")]
    pub k: usize,
    /// Depolarizing probability per gate.
    #[serde(default)]
    pub noise: f64,
    #[serde(default = "exact")]
    pub mode: CostMode,
    /// Master seed; drives initialization, restarts and shot sampling.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub baseline: bool,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Fixed parameter vector for `estimate` (random start when absent).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn one() -> usize {
    1
}

fn exact() -> CostMode {
    CostMode::Exact
}

/// A problem ready for optimization.
#[derive(Debug, Clone)]
pub struct ResolvedProblem {
    pub label: String,
    pub hamiltonian: PauliSum,
    /// Exact ground state when it is unique.
    pub target: Option<Vec<Complex64>>,
    pub ground_energy: Option<f64>,
}

impl ExperimentConfig {
    /// Parses a config, or the config embedded in a run manifest.
    pub fn from_json(text: &str, path: &Path) -> CliResult<Self> {
        let value: serde_json::Value = formats::parse_json(text, path)?;
        let value = match value.get("manifest_version") {
            Some(_) => value.get("config").cloned().ok_or_else(|| {
                CliError::Invalid(vec!["manifest has no config".into()])
            })?,
            None => value,
        };
        serde_json::from_value(value).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_json(&text, path)?;
        // Absolute, so a manifest written elsewhere still points at the same files.
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let dir = std::path::absolute(dir).map_err(|e| CliError::io(dir, e))?;
        cfg.rebase_paths(&dir);
        Ok(cfg)
    }

    /// Makes relative file references relative to `dir`.
    pub fn rebase_paths(&mut self, dir: &Path) {
        let fix = |p: &mut String| {
            let pb = PathBuf::from(p.as_str());
            if pb.is_relative() {
                *p = dir.join(pb).to_string_lossy().into_owned();
            }
        };
        match &mut self.problem {
            ProblemSource::Hamiltonian { path } | ProblemSource::Stabilizer { path, .. } => fix(path),
            ProblemSource::Preset { .. } => {}
        }
        if let Some(s) = &mut self.sweep {
            s.hamiltonians.iter_mut().for_each(fix);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Every violation found, or `Ok` when the config is runnable.
    pub fn validate(&self) -> CliResult<()> {
        let mut v = Vec::new();
        if self.k == 0 {
            v.push("k must be at least 1".to_string());
        }
        if !(0.0..=1.0).contains(&self.noise) {
            v.push(format!("noise must lie in [0, 1], got {}", self.noise));
        }
        match &self.ansatz {
            AnsatzSpec::Schmidt(s) => {
                if let Err(e) = s.validate() {
                    v.push(format!("ansatz: {e}"));
                }
            }
            AnsatzSpec::Ucc(u) => {
                if let Err(e) = u.validate() {
                    v.push(format!("ansatz: {e}"));
                }
            }
        }
        if let CostMode::Shots(cfg) = &self.mode {
            if let Err(e) = cfg.validate() {
                v.push(format!("mode: {e}"));
            }
            if self.baseline {
                v.push("shot mode is not available for baseline runs".into());
            }
        }
        if self.optimizer.max_iterations == 0 || self.optimizer.max_evaluations == 0 {
            v.push("optimizer budget must be positive".into());
        }
        if !(self.optimizer.fd_step > 0.0) {
            v.push("optimizer.fd_step must be positive".into());
        }
        if !(self.optimizer.init_spread >= 0.0) {
            v.push("optimizer.init_spread must be non-negative".into());
        }
        let problem_ok = match &self.problem {
            ProblemSource::Preset { name } if !PRESETS.contains(&name.as_str()) => {
                v.push(format!("unknown preset {name:?} (known: {})", PRESETS.join(", ")));
                false
            }
            ProblemSource::Hamiltonian { path } | ProblemSource::Stabilizer { path, .. } if !Path::new(path).is_file() => {
                v.push(format!("problem file {path} does not exist"));
                false
            }
            _ => true,
        };
        if let Some(s) = &self.sweep {
            if s.noise.iter().any(|p| !(0.0..=1.0).contains(p)) {
                v.push("sweep noise values must lie in [0, 1]".into());
            }
            for h in &s.hamiltonians {
                if !Path::new(h).is_file() {
                    v.push(format!("sweep Hamiltonian {h} does not exist"));
                }
            }
        }
        if problem_ok && v.is_empty() {
            match self.resolve_problem() {
                Ok(p) => self.check_sizes(&p.hamiltonian, &mut v),
                Err(CliError::Invalid(mut more)) => v.append(&mut more),
                Err(e) => v.push(format!("problem: {e}")),
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invalid(v))
        }
    }

    fn check_sizes(&self, h: &PauliSum, v: &mut Vec<String>) {
        let sys = self.ansatz.system_size();
        if self.baseline {
            let width = match &self.ansatz {
                AnsatzSpec::Schmidt(s) => s.n_qubits(),
                AnsatzSpec::Ucc(u) => 2 * u.n,
            };
            if width != h.n_qubits() {
                v.push(format!(
                    "baseline circuit acts on {width} qubits but the Hamiltonian on {}",
                    h.n_qubits()
                ));
            }
        } else if 2 * sys != h.n_qubits() {
            v.push(format!(
                "ansatz system of {sys} qubits needs a {}-qubit Hamiltonian, got {}",
                2 * sys,
                h.n_qubits()
            ));
        }
        if let Some(p) = &self.parameters {
            let per = match self.ansatz.build() {
                Ok(a) => a.circuit.n_parameters(),
                Err(_) => return,
            };
            let want = if self.baseline { per } else { self.k * per + 2 * self.k };
            if p.len() != want {
                v.push(format!("parameters: expected {want} values, got {}", p.len()));
            }
        }
    }

    pub fn resolve_problem(&self) -> CliResult<ResolvedProblem> {
        resolve(&self.problem)
    }

    pub fn noise_model(&self) -> CliResult<dmv_core::NoiseModel> {
        Ok(dmv_core::NoiseModel::depolarizing(self.noise)?)
    }

    /// Optimizer settings with the master seed applied.
    pub fn optimizer_config(&self) -> OptimizerConfig {
        OptimizerConfig {
            seed: self.seed,
            ..self.optimizer
        }
    }

    /// Cost mode with the master seed applied.
    pub fn cost_mode(&self) -> CostMode {
        match self.mode {
            CostMode::Shots(cfg) => CostMode::Shots(EstimatorConfig { seed: self.seed, ..cfg }),
            m => m,
        }
    }
}

fn stabilizer_problem(file: &StabilizerFile, partition: &str, label: String) -> CliResult<ResolvedProblem> {
    let code = file.partitioned_code(partition)?;
    let sh = build_stabilizer_hamiltonian(&code)?;
    let (target, ground_energy) = if sh.unique_ground_state {
        (Some(code.ground_state()?), Some(-(code.n_qubits as f64)))
    } else {
        (None, None)
    };
    Ok(ResolvedProblem {
        label,
        hamiltonian: sh.hamiltonian,
        target,
        ground_energy,
    })
}

fn hamiltonian_problem(file: &HamiltonianFile, label: String) -> CliResult<ResolvedProblem> {
    let h = file.to_pauli_sum()?;
    let (target, ground_energy) = ground_state(&h);
    Ok(ResolvedProblem {
        label,
        hamiltonian: h,
        target,
        ground_energy: ground_energy.or(file.reference_energy),
    })
}

/// Dense ground state, when small enough and non-degenerate.
pub fn ground_state(h: &PauliSum) -> (Option<Vec<Complex64>>, Option<f64>) {
    if h.n_qubits() > 12 {
        return (None, None);
    }
    let Ok(dense) = h.to_dense() else {
        return (None, None);
    };
    let (vals, vecs) = linalg::hermitian_eigen(&dense);
    let e0 = vals[0];
    if vals.len() > 1 && vals[1] - e0 < 1e-8 {
        return (None, Some(e0));
    }
    (Some(vecs.column(0).iter().copied().collect()), Some(e0))
}

pub fn resolve(source: &ProblemSource) -> CliResult<ResolvedProblem> {
    match source {
        ProblemSource::Preset { name } => {
            let pseudo = Path::new("<preset>");
            match name.as_str() {
                "bell-stabilizer" => stabilizer_problem(&formats::parse_json(BELL, pseudo)?, "default", name.clone()),
                "surface10-good" => stabilizer_problem(&formats::parse_json(SURFACE10, pseudo)?, "good", name.clone()),
                "surface10-bad" => stabilizer_problem(&formats::parse_json(SURFACE10, pseudo)?, "bad", name.clone()),
                "h2" => hamiltonian_problem(&formats::parse_json(H2_0735, pseudo)?, name.clone()),
                _ => Err(CliError::Invalid(vec![format!("unknown preset {name:?}")])),
            }
        }
        ProblemSource::Hamiltonian { path } => {
            let file: HamiltonianFile = formats::read_json(Path::new(path))?;
            hamiltonian_problem(&file, path.clone())
        }
        ProblemSource::Stabilizer { path, partition } => {
            let file: StabilizerFile = formats::read_json(Path::new(path))?;
            stabilizer_problem(&file, partition, format!("{path}#{partition}"))
        }
    }
}

/// Default experiment for a preset.
pub fn preset(name: &str) -> CliResult<ExperimentConfig> {
    let problem = ProblemSource::Preset { name: name.to_string() };
    let schmidt = |n, l, mix| AnsatzSpec::Schmidt(SchmidtAnsatzSpec::new(n, l, 1, mix));
    let (ansatz, k, optimizer) = match name {
        "bell-stabilizer" => (schmidt(1, 1, 1), 1, OptimizerConfig::default()),
        "surface10-good" | "surface10-bad" => (
            schmidt(5, 1, 3),
            1,
            OptimizerConfig {
                init_spread: 1.0,
                restarts: 4,
                max_iterations: 400,
                ..OptimizerConfig::default()
            },
        ),
        "h2" => (
            AnsatzSpec::Ucc(UCCSDSpec::full(2, 1)),
            2,
            OptimizerConfig {
                restarts: 2,
                ..OptimizerConfig::default()
            },
        ),
        _ => {
            return Err(CliError::Invalid(vec![format!(
                "unknown preset {name:?} (known: {})",
                PRESETS.join(", ")
            )]))
        }
    };
    Ok(ExperimentConfig {
        problem,
        ansatz,
        k,
        noise: 0.0,
        mode: CostMode::Exact,
        seed: 0,
        baseline: false,
        optimizer,
        parameters: None,
        sweep: None,
        output: None,
    })
}
