//! Experiment drivers and their on-disk outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use dmv_core::ansatz::AnsatzSpec;
use dmv_core::dmv::{self as core_dmv, ExactEvaluator};
use dmv_core::estimator::{self, EstimatorConfig};
use dmv_core::vqe::{self, CostMode, OptimizationTrace, VQEProblem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{self, ExperimentConfig, ProblemSource, ResolvedProblem};
use crate::error::{CliError, CliResult};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub command: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    /// Output file name to SHA-256 of its contents.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects output files, writes them, and finishes with a manifest.
pub struct OutputDir {
    dir: PathBuf,
    hashes: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            hashes: BTreeMap::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.hashes.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
            path: self.dir.join(name),
            source,
        })?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn finish(self, command: &str, cfg: &ExperimentConfig) -> CliResult<Manifest> {
        let config_json = cfg.to_json();
        let mut versions = BTreeMap::new();
        versions.insert("dmv".to_string(), env!("CARGO_PKG_VERSION").to_string());
        versions.insert("dmv-core".to_string(), dmv_core::VERSION.to_string());
        let manifest = Manifest {
            manifest_version: MANIFEST_VERSION,
            command: command.to_string(),
            config: cfg.clone(),
            config_sha256: sha256_hex(config_json.as_bytes()),
            seed: cfg.seed,
            versions,
            outputs: self.hashes.clone(),
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}

fn build_problem(cfg: &ExperimentConfig, resolved: &ResolvedProblem, noise: f64, baseline: bool) -> CliResult<VQEProblem> {
    let noise = dmv_core::NoiseModel::depolarizing(noise)?;
    let mut problem = if baseline {
        VQEProblem::baseline(resolved.hamiltonian.clone(), cfg.ansatz.clone(), noise)?
    } else {
        VQEProblem::new(resolved.hamiltonian.clone(), cfg.ansatz.clone(), cfg.k, noise)?.with_mode(cfg.cost_mode())?
    };
    if let Some(t) = &resolved.target {
        problem = problem.with_target(t.clone())?;
    }
    Ok(problem)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurityStats {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl PurityStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let m = v.len();
        let median = if m % 2 == 1 {
            v[m / 2]
        } else {
            0.5 * (v[m / 2 - 1] + v[m / 2])
        };
        Some(PurityStats {
            min: v[0],
            median,
            max: v[m - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeSummary {
    pub problem: String,
    pub kind: String,
    pub k: usize,
    pub noise: f64,
    /// Circuit fault rate of one preparation.
    pub zeta: f64,
    pub gate_count: usize,
    pub n_parameters: usize,
    pub final_cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_energy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    /// Purities of the final ensemble members.
    pub final_purities: Vec<f64>,
    /// Over every member of every trace record.
    pub purity: Option<PurityStats>,
    pub iterations: usize,
    pub evaluations: usize,
    pub shots: u64,
    pub restart_costs: Vec<f64>,
    pub best_restart: usize,
}

#[derive(Debug, Clone)]
pub struct VqeRun {
    pub summary: VqeSummary,
    pub trace: OptimizationTrace,
}

/// Optimizes one problem instance without touching the filesystem.
pub fn solve(cfg: &ExperimentConfig, resolved: &ResolvedProblem, noise: f64, baseline: bool) -> CliResult<VqeRun> {
    let problem = build_problem(cfg, resolved, noise, baseline)?;
    let ocfg = cfg.optimizer_config();
    let trace = match &cfg.parameters {
        Some(p) => vqe::optimize_from(&problem, &ocfg, vec![p.clone()])?,
        None => vqe::optimize(&problem, &ocfg)?,
    };
    let best = trace.best();
    let all: Vec<f64> = trace.records.iter().flat_map(|r| r.purities.iter().copied()).collect();
    let summary = VqeSummary {
        problem: resolved.label.clone(),
        kind: if baseline { "baseline" } else { "dmv" }.to_string(),
        k: if baseline { 1 } else { cfg.k },
        noise,
        zeta: problem.fault_rate(),
        gate_count: problem.prepared().circuit.gate_count(),
        n_parameters: problem.n_parameters(),
        final_cost: best.cost,
        ground_energy: resolved.ground_energy,
        energy_error: resolved.ground_energy.map(|e| best.cost - e),
        fidelity: best.fidelity,
        final_purities: best.purities.clone(),
        purity: PurityStats::of(&all),
        iterations: trace.iterations(),
        evaluations: trace.evaluations,
        shots: trace.records.iter().map(|r| r.shots).sum(),
        restart_costs: trace.restart_costs.clone(),
        best_restart: trace.best_restart,
    };
    Ok(VqeRun { summary, trace })
}

pub fn trace_csv(trace: &OptimizationTrace, k: usize) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["iteration".to_string(), "cost".into(), "fidelity".into()];
    header.extend((1..=k).map(|i| format!("purity_{i}")));
    header.push("shots".into());
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![r.iteration.to_string(), r.cost.to_string()];
        row.push(r.fidelity.map(|f| f.to_string()).unwrap_or_default());
        row.extend(r.purities.iter().map(|p| p.to_string()));
        row.push(r.shots.to_string());
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub kind: String,
    pub k: usize,
    pub ansatz: AnsatzSpec,
    pub parameters: Vec<f64>,
}

/// `vqe`: trace.csv, summary.json, params.json and manifest.json.
pub fn run_vqe(cfg: &ExperimentConfig, out: &Path) -> CliResult<VqeSummary> {
    cfg.validate()?;
    let resolved = cfg.resolve_problem()?;
    let run = solve(cfg, &resolved, cfg.noise, cfg.baseline)?;
    let mut dir = OutputDir::create(out)?;
    dir.write("trace.csv", &trace_csv(&run.trace, run.summary.final_purities.len())?)?;
    dir.write_json("summary.json", &run.summary)?;
    dir.write_json(
        "params.json",
        &ParamsFile {
            kind: run.summary.kind.clone(),
            k: run.summary.k,
            ansatz: cfg.ansatz.clone(),
            parameters: run.trace.best().params.clone(),
        },
    )?;
    dir.finish("vqe", cfg)?;
    Ok(run.summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotReport {
    pub total_shots: u64,
    pub numerator_fraction: f64,
    pub seed: u64,
    pub value: f64,
    pub imag: f64,
    pub numerator: [f64; 2],
    pub denominator: [f64; 2],
    pub shots_used: u64,
    pub predicted_mse: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub problem: String,
    pub k: usize,
    pub noise: f64,
    pub exact: f64,
    pub ratio_imag: f64,
    pub shots: ShotReport,
    pub parameters: Vec<f64>,
}

/// `estimate`: the ratio at one parameter point, exactly and from shots.
pub fn run_estimate(cfg: &ExperimentConfig, out: &Path) -> CliResult<EstimateReport> {
    cfg.validate()?;
    if cfg.baseline {
        return Err(CliError::Usage("estimate needs a DMV configuration (baseline = false)".into()));
    }
    let resolved = cfg.resolve_problem()?;
    let problem = build_problem(cfg, &resolved, cfg.noise, false)?;
    let params = match &cfg.parameters {
        Some(p) => p.clone(),
        None => problem.initial_parameters(cfg.seed, cfg.optimizer.init_spread),
    };
    let ensemble = problem.ensemble(&params)?;
    let paths = ExactEvaluator::new(&resolved.hamiltonian)?.paths(&ensemble)?;
    let exact = core_dmv::exact_expectation(&ensemble, &resolved.hamiltonian)?;
    let est_cfg = match cfg.cost_mode() {
        CostMode::Shots(c) => c,
        CostMode::Exact => EstimatorConfig::new(100_000, cfg.seed),
    };
    let est = estimator::estimate_expectation(&ensemble, &resolved.hamiltonian, &est_cfg)?;
    let mse = estimator::predicted_mse(&ensemble, &resolved.hamiltonian, &est_cfg)?;
    let report = EstimateReport {
        problem: resolved.label.clone(),
        k: cfg.k,
        noise: cfg.noise,
        exact,
        ratio_imag: paths.ratio_imag,
        shots: ShotReport {
            total_shots: est_cfg.total_shots,
            numerator_fraction: est_cfg.numerator_fraction,
            seed: est_cfg.seed,
            value: est.value,
            imag: est.imag,
            numerator: crate::formats::pair(est.numerator),
            denominator: crate::formats::pair(est.denominator),
            shots_used: est.shots_used(),
            predicted_mse: mse,
            abs_error: (est.value - exact).abs(),
        },
        parameters: params,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["task_kind", "i", "j", "alpha", "shots", "re", "im", "var"])?;
    for r in &est.breakdown {
        let kind = match r.task_kind {
            estimator::TaskKind::Numerator => "numerator",
            estimator::TaskKind::Denominator => "denominator",
        };
        w.write_record([
            kind.to_string(),
            r.i.to_string(),
            r.j.to_string(),
            r.alpha.map(|a| a.to_string()).unwrap_or_default(),
            r.shots.to_string(),
            r.re.to_string(),
            r.im.to_string(),
            r.var.to_string(),
        ])?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))?;
    let mut dir = OutputDir::create(out)?;
    dir.write_json("estimate.json", &report)?;
    dir.write("breakdown.csv", &csv_bytes)?;
    dir.finish("estimate", cfg)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub problem: String,
    pub noise: f64,
    pub kind: String,
    pub zeta: f64,
    pub final_cost: f64,
    pub ground_energy: Option<f64>,
    pub energy_error: Option<f64>,
    pub fidelity: Option<f64>,
    pub purity_median: Option<f64>,
    pub final_purity_median: Option<f64>,
    pub iterations: usize,
}

struct Point {
    problem: ProblemSource,
    noise: f64,
    baseline: bool,
}

/// `sweep`: one VQE per (Hamiltonian, noise, kind) point, rows ordered by
/// point index regardless of completion order.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> CliResult<Vec<SweepRow>> {
    cfg.validate()?;
    let sweep = cfg.sweep.clone().unwrap_or(config::SweepConfig {
        noise: Vec::new(),
        hamiltonians: Vec::new(),
        compare_baseline: false,
    });
    let problems: Vec<ProblemSource> = if sweep.hamiltonians.is_empty() {
        vec![cfg.problem.clone()]
    } else {
        sweep
            .hamiltonians
            .iter()
            .map(|p| ProblemSource::Hamiltonian { path: p.clone() })
            .collect()
    };
    let noises = if sweep.noise.is_empty() { vec![cfg.noise] } else { sweep.noise.clone() };
    let mut kinds = vec![cfg.baseline];
    if sweep.compare_baseline && !cfg.baseline {
        kinds.push(true);
    }
    let mut points = Vec::new();
    for p in &problems {
        for &noise in &noises {
            for &baseline in &kinds {
                points.push(Point {
                    problem: p.clone(),
                    noise,
                    baseline,
                });
            }
        }
    }
    let resolved = problems.iter().map(config::resolve).collect::<CliResult<Vec<_>>>()?;
    let rows = points
        .par_iter()
        .enumerate()
        .map(|(index, pt)| {
            let r = &resolved[problems.iter().position(|p| *p == pt.problem).expect("point problem listed")];
            let run = solve(cfg, r, pt.noise, pt.baseline)?;
            let s = run.summary;
            Ok(SweepRow {
                index,
                problem: s.problem,
                noise: pt.noise,
                kind: s.kind,
                zeta: s.zeta,
                final_cost: s.final_cost,
                ground_energy: s.ground_energy,
                energy_error: s.energy_error,
                fidelity: s.fidelity,
                purity_median: s.purity.map(|p| p.median),
                final_purity_median: PurityStats::of(&s.final_purities).map(|p| p.median),
                iterations: s.iterations,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))?;
    let mut dir = OutputDir::create(out)?;
    dir.write("sweep.csv", &bytes)?;
    dir.finish("sweep", cfg)?;
    Ok(rows)
}
