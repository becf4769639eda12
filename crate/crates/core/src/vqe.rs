//! Variational optimization of DMV ensembles and of the conventional
//! (unmitigated) VQE baseline.
//!
//! The parameter vector of a DMV problem is the concatenation of K circuit
//! parameter blocks followed by `(re, im)` pairs for the K coefficients.
//! Baseline problems only carry one circuit block.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzSpec, PreparedAnsatz};
use crate::circuit::{self, DensityMatrix, NoiseModel};
use crate::dmv::{self, DMVEnsemble, ExactEvaluator};
use crate::error::{domain, Error, Result};
use crate::estimator::{self, EstimatorConfig};
use crate::pauli::PauliSum;

/// How the cost is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostMode {
    Exact,
    Shots(EstimatorConfig),
}

/// Everything computed at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub cost: f64,
    /// `Tr(rho_i^2)` per ensemble member (the full noisy state for baselines).
    pub purities: Vec<f64>,
    pub fidelity: Option<f64>,
    pub shots: u64,
}

#[derive(Debug, Clone)]
pub struct VQEProblem {
    hamiltonian: PauliSum,
    ansatz: AnsatzSpec,
    prepared: PreparedAnsatz,
    k: usize,
    noise: NoiseModel,
    mode: CostMode,
    baseline: bool,
    target: Option<Vec<Complex64>>,
    evaluator: Option<ExactEvaluator>,
}

impl VQEProblem {
    /// DMV problem with exact cost and no target.
    pub fn new(hamiltonian: PauliSum, ansatz: AnsatzSpec, k: usize, noise: NoiseModel) -> Result<Self> {
        if k == 0 {
            return Err(domain("K must be at least 1"));
        }
        let prepared = ansatz.build()?;
        let sys = ansatz.system_size();
        if hamiltonian.n_qubits() != 2 * sys {
            return Err(domain(format!(
                "Hamiltonian on {} qubits does not match an ansatz system of {sys} qubits",
                hamiltonian.n_qubits()
            )));
        }
        let evaluator = Some(ExactEvaluator::new(&hamiltonian)?);
        Ok(VQEProblem {
            hamiltonian,
            ansatz,
            prepared,
            k,
            noise,
            mode: CostMode::Exact,
            baseline: false,
            target: None,
            evaluator,
        })
    }

    /// Conventional VQE: the cost is `Tr(H rho)` on the full noisy circuit
    /// output, which must act on the Hamiltonian's register.
    pub fn baseline(hamiltonian: PauliSum, ansatz: AnsatzSpec, noise: NoiseModel) -> Result<Self> {
        let prepared = ansatz.build()?;
        if prepared.circuit.n_qubits() != hamiltonian.n_qubits() {
            return Err(domain(format!(
                "baseline circuit has {} qubits but the Hamiltonian has {}",
                prepared.circuit.n_qubits(),
                hamiltonian.n_qubits()
            )));
        }
        Ok(VQEProblem {
            hamiltonian,
            ansatz,
            prepared,
            k: 1,
            noise,
            mode: CostMode::Exact,
            baseline: true,
            target: None,
            evaluator: None,
        })
    }

    pub fn with_mode(mut self, mode: CostMode) -> Result<Self> {
        if let CostMode::Shots(cfg) = &mode {
            cfg.validate()?;
            if self.baseline {
                return Err(Error::Unsupported("shot mode for baseline problems".into()));
            }
        }
        self.mode = mode;
        Ok(self)
    }

    /// Target state for fidelity reporting (on the Hamiltonian's register).
    pub fn with_target(mut self, target: Vec<Complex64>) -> Result<Self> {
        if target.len() != 1usize << self.hamiltonian.n_qubits() {
            return Err(domain("target state dimension does not match the Hamiltonian"));
        }
        let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(domain("target state is zero"));
        }
        self.target = Some(target.into_iter().map(|z| z / norm).collect());
        Ok(self)
    }

    pub fn hamiltonian(&self) -> &PauliSum {
        &self.hamiltonian
    }

    pub fn ansatz(&self) -> &AnsatzSpec {
        &self.ansatz
    }

    pub fn prepared(&self) -> &PreparedAnsatz {
        &self.prepared
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn mode(&self) -> &CostMode {
        &self.mode
    }

    pub fn is_baseline(&self) -> bool {
        self.baseline
    }

    /// Parameters per circuit.
    pub fn circuit_parameters(&self) -> usize {
        self.prepared.circuit.n_parameters()
    }

    pub fn n_parameters(&self) -> usize {
        if self.baseline {
            self.circuit_parameters()
        } else {
            self.k * self.circuit_parameters() + 2 * self.k
        }
    }

    /// Circuit fault rate of one preparation.
    pub fn fault_rate(&self) -> f64 {
        circuit::fault_rate(&self.prepared.circuit, &self.noise)
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_parameters() {
            return Err(domain(format!(
                "expected {} parameters, got {}",
                self.n_parameters(),
                params.len()
            )));
        }
        if params.iter().any(|x| !x.is_finite()) {
            return Err(domain("parameters must be finite"));
        }
        Ok(())
    }

    /// Noisy reduced state of ensemble member `i`.
    fn member(&self, params: &[f64], i: usize) -> Result<DensityMatrix> {
        let p = self.circuit_parameters();
        let block = &params[i * p..(i + 1) * p];
        let full = circuit::run_circuit(&self.prepared.circuit, block, &self.noise, self.prepared.initial)?;
        if self.prepared.system.len() == full.n_qubits() {
            Ok(full)
        } else {
            full.partial_trace(&self.prepared.system)
        }
    }

    /// The DMV ensemble at `params`.
    pub fn ensemble(&self, params: &[f64]) -> Result<DMVEnsemble> {
        if self.baseline {
            return Err(Error::Unsupported("baseline problems have no ensemble".into()));
        }
        self.check(params)?;
        let p = self.circuit_parameters();
        let rhos = (0..self.k).map(|i| self.member(params, i)).collect::<Result<Vec<_>>>()?;
        let off = self.k * p;
        let coeffs = (0..self.k)
            .map(|i| Complex64::new(params[off + 2 * i], params[off + 2 * i + 1]))
            .collect();
        DMVEnsemble::new(rhos, coeffs)
    }

    pub fn cost(&self, params: &[f64]) -> Result<f64> {
        Ok(self.evaluate(params, 0)?.cost)
    }

    /// Full evaluation; `stream` selects the shot-noise realization in shot
    /// mode and is ignored otherwise.
    pub fn evaluate(&self, params: &[f64], stream: u64) -> Result<Evaluation> {
        self.check(params)?;
        if self.baseline {
            let rho = circuit::run_circuit(&self.prepared.circuit, params, &self.noise, self.prepared.initial)?;
            let cost = self.hamiltonian.trace_with(rho.matrix());
            let fidelity = self.target.as_ref().map(|t| {
                let m = rho.matrix();
                let d = t.len();
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..d {
                    for c in 0..d {
                        acc += t[r].conj() * m[(r, c)] * t[c];
                    }
                }
                acc.re
            });
            return Ok(Evaluation {
                cost,
                purities: vec![rho.purity()],
                fidelity,
                shots: 0,
            });
        }
        let e = self.ensemble(params)?;
        let purities = e.rhos().iter().map(|r| r.purity()).collect();
        let (cost, shots) = match &self.mode {
            CostMode::Exact => {
                let ev = self.evaluator.as_ref().ok_or_else(|| Error::Internal("missing evaluator".into()))?;
                (ev.expectation(&e)?, 0)
            }
            CostMode::Shots(cfg) => {
                let mut cfg = *cfg;
                cfg.seed = mix_seed(cfg.seed, stream);
                let est = estimator::estimate_expectation(&e, &self.hamiltonian, &cfg)?;
                (est.value, est.shots_used())
            }
        };
        let fidelity = match &self.target {
            Some(t) => Some(dmv::fidelity_with(dmv::assemble(&e)?.amplitudes(), t)?),
            None => None,
        };
        Ok(Evaluation {
            cost,
            purities,
            fidelity,
            shots,
        })
    }

    /// Default starting point before random perturbation: zero circuit
    /// angles except the Schmidt coefficient block, which starts at
    /// `pi / 2` (balanced coefficients), and `c = (1, 0, ..., 0)`.
    pub fn center(&self) -> Vec<f64> {
        let p = self.circuit_parameters();
        let mut block = vec![0.0; p];
        if let AnsatzSpec::Schmidt(s) = &self.ansatz {
            for x in block.iter_mut().take(s.n_dist_parameters()) {
                *x = core::f64::consts::FRAC_PI_2;
            }
        }
        if self.baseline {
            return block;
        }
        let mut out = Vec::with_capacity(self.n_parameters());
        for _ in 0..self.k {
            out.extend_from_slice(&block);
        }
        for i in 0..self.k {
            out.push(if i == 0 { 1.0 } else { 0.0 });
            out.push(0.0);
        }
        out
    }

    /// Random start: circuit angles uniform in `center +- spread`, each
    /// coefficient component perturbed by up to `0.1`.
    pub fn initial_parameters(&self, seed: u64, spread: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = self.center();
        let circuit_len = if self.baseline {
            x.len()
        } else {
            self.k * self.circuit_parameters()
        };
        for (idx, v) in x.iter_mut().enumerate() {
            let u: f64 = rng.random::<f64>() * 2.0 - 1.0;
            if idx < circuit_len {
                *v += spread * u;
            } else {
                *v += 0.1 * u;
            }
        }
        x
    }
}

fn mix_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Central finite-difference gradient of the exact cost.
pub fn gradient_fd(problem: &VQEProblem, params: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(domain(format!("finite-difference step must be positive, got {step}")));
    }
    if let CostMode::Shots(_) = problem.mode() {
        return Err(Error::Unsupported(
            "finite-difference gradients of shot-based costs".into(),
        ));
    }
    let mut x = params.to_vec();
    let mut g = vec![0.0; params.len()];
    for k in 0..params.len() {
        let orig = x[k];
        x[k] = orig + step;
        let fp = problem.cost(&x)?;
        x[k] = orig - step;
        let fm = problem.cost(&x)?;
        x[k] = orig;
        g[k] = (fp - fm) / (2.0 * step);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Quasi-Newton with finite-difference gradients (exact mode).
    Lbfgs,
    /// Simplex search (any mode).
    NelderMead,
    /// L-BFGS in exact mode, Nelder-Mead in shot mode.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    /// Cost evaluations per restart, gradient evaluations included.
    #[serde(default = "default_evaluations")]
    pub max_evaluations: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Stop when the largest gradient component falls below this.
    #[serde(default = "default_gtol")]
    pub gtol: f64,
    /// Stop when an iteration improves the cost by less than this.
    #[serde(default = "default_ftol")]
    pub ftol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_spread")]
    pub init_spread: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_method() -> Method {
    Method::Auto
}
fn default_iterations() -> usize {
    300
}
fn default_evaluations() -> usize {
    100_000
}
fn default_fd_step() -> f64 {
    1e-5
}
fn default_gtol() -> f64 {
    1e-7
}
fn default_ftol() -> f64 {
    1e-12
}
fn default_spread() -> f64 {
    0.1
}
fn default_restarts() -> usize {
    1
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            method: default_method(),
            max_iterations: default_iterations(),
            max_evaluations: default_evaluations(),
            fd_step: default_fd_step(),
            gtol: default_gtol(),
            ftol: default_ftol(),
            seed: 0,
            init_spread: default_spread(),
            restarts: default_restarts(),
        }
    }
}

/// One trace row: the best point after `iteration` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub cost: f64,
    pub params: Vec<f64>,
    pub purities: Vec<f64>,
    pub fidelity: Option<f64>,
    /// Shots spent so far.
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
    /// Final cost of every restart; the records belong to the best one.
    pub restart_costs: Vec<f64>,
    pub best_restart: usize,
    pub evaluations: usize,
}

impl OptimizationTrace {
    pub fn best(&self) -> &TraceRecord {
        self.records.last().expect("traces hold at least the initial point")
    }

    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }
}

struct Run<'a> {
    problem: &'a VQEProblem,
    cfg: &'a OptimizerConfig,
    evaluations: usize,
    shots: u64,
    records: Vec<TraceRecord>,
}

impl<'a> Run<'a> {
    fn budget_left(&self) -> bool {
        self.evaluations < self.cfg.max_evaluations
    }

    fn eval(&mut self, x: &[f64]) -> Result<Evaluation> {
        let ev = self.problem.evaluate(x, self.evaluations as u64)?;
        self.evaluations += 1;
        self.shots += ev.shots;
        Ok(ev)
    }

    fn cost(&mut self, x: &[f64]) -> Result<f64> {
        Ok(self.eval(x)?.cost)
    }

    fn record(&mut self, x: &[f64], ev: &Evaluation) {
        self.records.push(TraceRecord {
            iteration: self.records.len(),
            cost: ev.cost,
            params: x.to_vec(),
            purities: ev.purities.clone(),
            fidelity: ev.fidelity,
            shots: self.shots,
        });
    }

    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.cfg.fd_step;
        let mut y = x.to_vec();
        let mut g = vec![0.0; x.len()];
        for k in 0..x.len() {
            let orig = y[k];
            y[k] = orig + h;
            let fp = self.cost(&y)?;
            y[k] = orig - h;
            let fm = self.cost(&y)?;
            y[k] = orig;
            g[k] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    fn lbfgs(&mut self, x0: Vec<f64>) -> Result<()> {
        const MEMORY: usize = 10;
        let mut x = x0;
        let mut ev = self.eval(&x)?;
        self.record(&x, &ev);
        let mut g = self.gradient(&x)?;
        let mut s_hist: Vec<Vec<f64>> = Vec::new();
        let mut y_hist: Vec<Vec<f64>> = Vec::new();
        for _ in 0..self.cfg.max_iterations {
            if inf_norm(&g) < self.cfg.gtol || !self.budget_left() {
                break;
            }
            let mut d = two_loop(&g, &s_hist, &y_hist);
            let mut slope = dot(&g, &d);
            if !(slope < 0.0) {
                s_hist.clear();
                y_hist.clear();
                d = g.iter().map(|v| -v).collect();
                slope = -dot(&g, &g);
            }
            // First steps have no curvature information; cap the move.
            let mut step = if s_hist.is_empty() {
                (0.5 / inf_norm(&d)).min(1.0)
            } else {
                1.0
            };
            let mut accepted = None;
            for _ in 0..40 {
                if !self.budget_left() {
                    break;
                }
                let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                let tev = self.eval(&trial)?;
                if tev.cost <= ev.cost + 1e-4 * step * slope {
                    accepted = Some((trial, tev));
                    break;
                }
                step *= 0.5;
            }
            let Some((xn, evn)) = accepted else { break };
            let improvement = ev.cost - evn.cost;
            let gn = self.gradient(&xn)?;
            let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            if dot(&s, &y) > 1e-12 {
                s_hist.push(s);
                y_hist.push(y);
                if s_hist.len() > MEMORY {
                    s_hist.remove(0);
                    y_hist.remove(0);
                }
            }
            x = xn;
            ev = evn;
            g = gn;
            self.record(&x, &ev);
            if improvement < self.cfg.ftol {
                break;
            }
        }
        Ok(())
    }

    fn nelder_mead(&mut self, x0: Vec<f64>) -> Result<()> {
        let dim = x0.len();
        let nd = dim.max(1) as f64;
        // Dimension-adapted coefficients (Gao and Han).
        let (alpha, gamma, rho, sigma) = (1.0, 1.0 + 2.0 / nd, 0.75 - 1.0 / (2.0 * nd), 1.0 - 1.0 / nd);
        let delta = self.cfg.init_spread.max(0.05);
        let mut simplex: Vec<(Vec<f64>, Evaluation)> = Vec::with_capacity(dim + 1);
        let ev0 = self.eval(&x0)?;
        simplex.push((x0.clone(), ev0));
        for k in 0..dim {
            let mut v = x0.clone();
            v[k] += delta;
            let ev = self.eval(&v)?;
            simplex.push((v, ev));
        }
        let by_cost = |a: &(Vec<f64>, Evaluation), b: &(Vec<f64>, Evaluation)| {
            a.1.cost.partial_cmp(&b.1.cost).unwrap_or(core::cmp::Ordering::Equal)
        };
        simplex.sort_by(by_cost);
        let (bx, bev) = simplex[0].clone();
        self.record(&bx, &bev);
        for _ in 0..self.cfg.max_iterations {
            if !self.budget_left() {
                break;
            }
            let best_before = simplex[0].1.cost;
            let worst = simplex[dim].1.cost;
            let mut centroid = vec![0.0; dim];
            for (v, _) in &simplex[..dim] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / nd;
                }
            }
            let along = |t: f64, w: &[f64]| -> Vec<f64> {
                centroid.iter().zip(w).map(|(c, x)| c + t * (x - c)).collect()
            };
            let xr = along(-alpha, &simplex[dim].0);
            let er = self.eval(&xr)?;
            if er.cost < simplex[0].1.cost {
                let xe = along(-alpha * gamma, &simplex[dim].0);
                let ee = self.eval(&xe)?;
                simplex[dim] = if ee.cost < er.cost { (xe, ee) } else { (xr, er) };
            } else if er.cost < simplex[dim - usize::from(dim > 0)].1.cost {
                simplex[dim] = (xr, er);
            } else {
                let (xc, ec) = if er.cost < worst {
                    let xc = along(-alpha * rho, &simplex[dim].0);
                    let ec = self.eval(&xc)?;
                    (xc, ec)
                } else {
                    let xc = along(rho, &simplex[dim].0);
                    let ec = self.eval(&xc)?;
                    (xc, ec)
                };
                if ec.cost < er.cost.min(worst) {
                    simplex[dim] = (xc, ec);
                } else {
                    let best = simplex[0].0.clone();
                    for k in 1..=dim {
                        let v: Vec<f64> = best
                            .iter()
                            .zip(&simplex[k].0)
                            .map(|(b, x)| b + sigma * (x - b))
                            .collect();
                        let ev = self.eval(&v)?;
                        simplex[k] = (v, ev);
                    }
                }
            }
            simplex.sort_by(by_cost);
            let (bx, bev) = simplex[0].clone();
            self.record(&bx, &bev);
            let spread = simplex[dim].1.cost - simplex[0].1.cost;
            if spread.abs() < self.cfg.ftol && best_before - simplex[0].1.cost < self.cfg.ftol {
                break;
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn two_loop(g: &[f64], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let mut q = g.to_vec();
    let m = s_hist.len();
    let mut alphas = vec![0.0; m];
    for i in (0..m).rev() {
        let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
        alphas[i] = rho * dot(&s_hist[i], &q);
        for (qv, yv) in q.iter_mut().zip(&y_hist[i]) {
            *qv -= alphas[i] * yv;
        }
    }
    if m > 0 {
        let gamma = dot(&s_hist[m - 1], &y_hist[m - 1]) / dot(&y_hist[m - 1], &y_hist[m - 1]);
        for v in q.iter_mut() {
            *v *= gamma;
        }
    }
    for i in 0..m {
        let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
        let beta = rho * dot(&y_hist[i], &q);
        for (qv, sv) in q.iter_mut().zip(&s_hist[i]) {
            *qv += (alphas[i] - beta) * sv;
        }
    }
    q.iter().map(|v| -v).collect()
}

/// Minimizes the problem's cost from `restarts` random starts (restart `r`
/// is seeded with `seed + r`) and keeps the best run.
pub fn optimize(problem: &VQEProblem, cfg: &OptimizerConfig) -> Result<OptimizationTrace> {
    let starts = (0..cfg.restarts.max(1))
        .map(|r| problem.initial_parameters(cfg.seed.wrapping_add(r as u64), cfg.init_spread))
        .collect();
    optimize_from(problem, cfg, starts)
}

/// Like [`optimize`] with explicit starting points.
pub fn optimize_from(problem: &VQEProblem, cfg: &OptimizerConfig, starts: Vec<Vec<f64>>) -> Result<OptimizationTrace> {
    if cfg.max_iterations == 0 || cfg.max_evaluations == 0 {
        return Err(domain("optimizer budget must be positive"));
    }
    if starts.is_empty() {
        return Err(domain("at least one starting point is required"));
    }
    let method = match (cfg.method, problem.mode()) {
        (Method::Auto, CostMode::Exact) => Method::Lbfgs,
        (Method::Auto, CostMode::Shots(_)) => Method::NelderMead,
        (Method::Lbfgs, CostMode::Shots(_)) => {
            return Err(Error::Unsupported(
                "gradient-based optimization of shot-based costs".into(),
            ))
        }
        (m, _) => m,
    };
    let mut best: Option<(usize, Vec<TraceRecord>)> = None;
    let mut restart_costs = Vec::with_capacity(starts.len());
    let mut evaluations = 0;
    for (r, x0) in starts.into_iter().enumerate() {
        problem.check(&x0)?;
        let mut run = Run {
            problem,
            cfg,
            evaluations: 0,
            shots: 0,
            records: Vec::new(),
        };
        match method {
            Method::NelderMead => run.nelder_mead(x0)?,
            _ => run.lbfgs(x0)?,
        }
        evaluations += run.evaluations;
        let fin = run.records.last().map(|rec| rec.cost).unwrap_or(f64::INFINITY);
        restart_costs.push(fin);
        let better = match &best {
            Some((_, recs)) => fin < recs.last().map(|rec| rec.cost).unwrap_or(f64::INFINITY),
            None => true,
        };
        if better {
            best = Some((r, run.records));
        }
    }
    let (best_restart, records) = best.ok_or_else(|| Error::Internal("no optimizer run".into()))?;
    Ok(OptimizationTrace {
        records,
        restart_costs,
        best_restart,
        evaluations,
    })
}
