//! Shot-level simulation of the two-copy measurement protocol and the ratio
//! estimator built on it.
//!
//! Every term `Tr(Q rho_i (x) rho_j)` is measured by rotating the two-copy
//! state into the eigenbasis of `Q` block by block and averaging the
//! eigenvalue attached to each sampled outcome.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::DensityMatrix;
use crate::dmv::DMVEnsemble;
use crate::error::{domain, Error, Result};
use crate::linalg::{self, ZERO};
use crate::pauli::{PauliSum, DENSE_LIMIT};
use crate::substitute::{self, SubstituteOperator};

/// Denominator estimates below this magnitude abort the ratio.
pub const UNSTABLE_RATIO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub total_shots: u64,
    #[serde(default = "default_fraction")]
    pub numerator_fraction: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub skip_cross_overlaps: bool,
}

fn default_fraction() -> f64 {
    2.0 / 3.0
}

impl EstimatorConfig {
    pub fn new(total_shots: u64, seed: u64) -> Self {
        EstimatorConfig {
            total_shots,
            numerator_fraction: default_fraction(),
            seed,
            skip_cross_overlaps: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_shots == 0 {
            return Err(domain("total_shots must be positive"));
        }
        if !(self.numerator_fraction > 0.0 && self.numerator_fraction < 1.0) {
            return Err(domain(format!(
                "numerator_fraction must lie in (0, 1), got {}",
                self.numerator_fraction
            )));
        }
        Ok(())
    }

    /// `(N_n, N_d)`.
    pub fn split(&self) -> (u64, u64) {
        let nn = (self.total_shots as f64 * self.numerator_fraction).round() as u64;
        let nn = nn.min(self.total_shots);
        (nn, self.total_shots - nn)
    }
}

/// Sample mean of one measured term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermEstimate {
    pub value: Complex64,
    pub shots_used: u64,
    /// Unbiased sample variance of the complex outcomes, `E|x - mean|^2`.
    pub empirical_variance: f64,
}

impl TermEstimate {
    /// Standard error of the mean.
    pub fn standard_error(&self) -> f64 {
        if self.shots_used == 0 {
            return 0.0;
        }
        (self.empirical_variance / self.shots_used as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Numerator,
    Denominator,
}

/// One row of an estimation breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub task_kind: TaskKind,
    pub i: usize,
    pub j: usize,
    /// Hamiltonian term index; absent for overlap tasks.
    pub alpha: Option<usize>,
    pub shots: u64,
    pub re: f64,
    pub im: f64,
    pub var: f64,
}

/// Outcome distribution of measuring `q` on `rho (x) sigma`, collapsed onto
/// distinct eigenvalue products.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    pub values: Vec<Complex64>,
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn mean(&self) -> Complex64 {
        self.values
            .iter()
            .zip(&self.probabilities)
            .fold(ZERO, |acc, (v, p)| acc + v * *p)
    }

    /// `Var(Re x)`, `Var(Im x)` and `Cov(Re x, Im x)` of one shot.
    pub fn moments(&self) -> (f64, f64, f64) {
        let m = self.mean();
        let mut vr = 0.0;
        let mut vi = 0.0;
        let mut cov = 0.0;
        for (v, p) in self.values.iter().zip(&self.probabilities) {
            let dr = v.re - m.re;
            let di = v.im - m.im;
            vr += p * dr * dr;
            vi += p * di * di;
            cov += p * dr * di;
        }
        (vr, vi, cov)
    }
}

/// Exact outcome distribution of the diagonal-basis measurement.
pub fn outcome_distribution(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    q: &SubstituteOperator,
) -> Result<OutcomeDistribution> {
    let n = q.n();
    if rho.n_qubits() != n || sigma.n_qubits() != n {
        return Err(domain(format!(
            "operator on n = {n} per copy but states on {} and {} qubits",
            rho.n_qubits(),
            sigma.n_qubits()
        )));
    }
    if 2 * n > DENSE_LIMIT {
        return Err(Error::Capacity {
            qubits: 2 * n,
            limit: DENSE_LIMIT,
        });
    }
    // Copy-major layout: block j acts on qubits (j, n + j), copy 1 first.
    let mut two = DensityMatrix::from_matrix_unchecked(linalg::kron(rho.matrix(), sigma.matrix()));
    for (j, b) in q.blocks.iter().enumerate() {
        let m: Vec<Complex64> = (0..16).map(|k| b.diagonalizer[(k / 4, k % 4)]).collect();
        two.conjugate(&[j, n + j], &m);
    }
    let mut values: Vec<Complex64> = Vec::new();
    let mut probabilities: Vec<f64> = Vec::new();
    let diag = two.matrix();
    for x in 0..diag.nrows() {
        let p = diag[(x, x)].re.max(0.0);
        if p == 0.0 {
            continue;
        }
        let v = q.outcome_value(substitute::copy_major_to_paired(x, n));
        match values.iter().position(|w| (w - v).norm() < 1e-9) {
            Some(k) => probabilities[k] += p,
            None => {
                values.push(v);
                probabilities.push(p);
            }
        }
    }
    let total: f64 = probabilities.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Internal("measurement distribution has zero mass".into()));
    }
    for p in probabilities.iter_mut() {
        *p /= total;
    }
    Ok(OutcomeDistribution {
        values,
        probabilities,
    })
}

/// Draws `shots` outcomes from a collapsed distribution.
pub fn sample_distribution<R: Rng>(dist: &OutcomeDistribution, shots: u64, rng: &mut R) -> Result<TermEstimate> {
    if shots == 0 {
        return Err(domain("shots must be at least 1"));
    }
    let mut cumulative = Vec::with_capacity(dist.probabilities.len());
    let mut acc = 0.0;
    for p in &dist.probabilities {
        acc += p;
        cumulative.push(acc);
    }
    let last = dist.values.len() - 1;
    let mut counts = vec![0u64; dist.values.len()];
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cumulative.iter().position(|&c| u < c).unwrap_or(last);
        counts[k] += 1;
    }
    let mut sum = ZERO;
    for (v, &c) in dist.values.iter().zip(&counts) {
        sum += v * c as f64;
    }
    let mean = sum / shots as f64;
    let mut ss = 0.0;
    for (v, &c) in dist.values.iter().zip(&counts) {
        ss += (v - mean).norm_sqr() * c as f64;
    }
    let empirical_variance = if shots > 1 { ss / (shots - 1) as f64 } else { 0.0 };
    Ok(TermEstimate {
        value: mean,
        shots_used: shots,
        empirical_variance,
    })
}

/// Deterministic generator for task `task` of a run seeded with `seed`.
pub fn task_rng(seed: u64, task: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

/// Simulates `shots` diagonal-basis measurements of `q` on `rho_i (x) rho_j`.
pub fn sample_term<R: Rng>(
    rho_i: &DensityMatrix,
    rho_j: &DensityMatrix,
    q: &SubstituteOperator,
    shots: u64,
    rng: &mut R,
) -> Result<TermEstimate> {
    if shots == 0 {
        return Err(domain("shots must be at least 1"));
    }
    let dist = outcome_distribution(rho_i, rho_j, q)?;
    sample_distribution(&dist, shots, rng)
}

/// Result of one ratio estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Real part of the ratio.
    pub value: f64,
    /// Imaginary residue of the ratio before truncation.
    pub imag: f64,
    pub numerator: Complex64,
    pub denominator: Complex64,
    pub breakdown: Vec<TermRecord>,
}

impl Estimate {
    pub fn shots_used(&self) -> u64 {
        self.breakdown.iter().map(|r| r.shots).sum()
    }
}

struct Task {
    kind: TaskKind,
    i: usize,
    j: usize,
    alpha: Option<usize>,
    shots: u64,
}

/// Splits `total` into `count` near-equal parts, earlier parts taking the
/// remainder.
fn split_even(total: u64, count: usize) -> Vec<u64> {
    let base = total / count as u64;
    let extra = (total % count as u64) as usize;
    (0..count).map(|k| base + u64::from(k < extra)).collect()
}

fn plan(e: &DMVEnsemble, h: &PauliSum, cfg: &EstimatorConfig) -> Result<Vec<Task>> {
    cfg.validate()?;
    if h.n_qubits() != 2 * e.n() {
        return Err(domain(format!(
            "Hamiltonian on {} qubits does not match an ensemble on n = {}",
            h.n_qubits(),
            e.n()
        )));
    }
    if h.is_empty() {
        return Err(domain("Hamiltonian has no terms"));
    }
    let k = e.k();
    let m = h.len();
    let (nn, nd) = cfg.split();
    let num_tasks = k * k * m;
    let den_pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .filter(|(i, j)| !cfg.skip_cross_overlaps || i == j)
        .collect();
    if nn < num_tasks as u64 || nd < den_pairs.len() as u64 {
        return Err(domain(format!(
            "budget of {} shots gives fewer than one shot per task ({} numerator, {} overlap tasks)",
            cfg.total_shots,
            num_tasks,
            den_pairs.len()
        )));
    }
    let mut tasks = Vec::with_capacity(num_tasks + den_pairs.len());
    let num_shots = split_even(nn, num_tasks);
    let mut t = 0;
    for i in 0..k {
        for j in 0..k {
            for alpha in 0..m {
                tasks.push(Task {
                    kind: TaskKind::Numerator,
                    i,
                    j,
                    alpha: Some(alpha),
                    shots: num_shots[t],
                });
                t += 1;
            }
        }
    }
    let den_shots = split_even(nd, den_pairs.len());
    for (&(i, j), &shots) in den_pairs.iter().zip(&den_shots) {
        tasks.push(Task {
            kind: TaskKind::Denominator,
            i,
            j,
            alpha: None,
            shots,
        });
    }
    Ok(tasks)
}

/// Shot-based estimate of `<psi|H_A|psi>` for the state encoded by `e`.
///
/// Task `t` of the plan (numerator tasks in `(i, j, alpha)` order, then
/// overlap tasks) draws from its own ChaCha stream, so the result does not
/// depend on evaluation order.
pub fn estimate_expectation(e: &DMVEnsemble, h: &PauliSum, cfg: &EstimatorConfig) -> Result<Estimate> {
    let tasks = plan(e, h, cfg)?;
    let hb = substitute::transform_hamiltonian(h)?;
    let swap = substitute::swap_observable(e.n())?;
    let cs = e.coeffs();
    let rhos = e.rhos();
    let mut num = ZERO;
    let mut den = ZERO;
    let mut breakdown = Vec::with_capacity(tasks.len());
    for (t, task) in tasks.iter().enumerate() {
        let (g, q) = match task.alpha {
            Some(a) => {
                let (g, q) = &hb.terms()[a];
                (*g, q)
            }
            None => (1.0, swap.operator()),
        };
        let mut rng = task_rng(cfg.seed, t as u64);
        let est = sample_term(&rhos[task.i], &rhos[task.j], q, task.shots, &mut rng)?;
        let w = cs[task.i].conj() * cs[task.j] * g;
        match task.kind {
            TaskKind::Numerator => num += w * est.value,
            TaskKind::Denominator => den += w * est.value,
        }
        breakdown.push(TermRecord {
            task_kind: task.kind,
            i: task.i,
            j: task.j,
            alpha: task.alpha,
            shots: est.shots_used,
            re: est.value.re,
            im: est.value.im,
            var: est.empirical_variance,
        });
    }
    if den.norm() < UNSTABLE_RATIO_TOL {
        return Err(Error::UnstableRatio {
            denominator: den.norm(),
            breakdown,
        });
    }
    let ratio = num / den;
    Ok(Estimate {
        value: ratio.re,
        imag: ratio.im,
        numerator: num,
        denominator: den,
        breakdown,
    })
}

/// Linearized mean squared error of [`estimate_expectation`] under the
/// budget `cfg`, from exact per-task outcome distributions:
/// `Var[Re X] / mu_y^2 + mu_x^2 Var[Y] / mu_y^4`.
pub fn predicted_mse(e: &DMVEnsemble, h: &PauliSum, cfg: &EstimatorConfig) -> Result<f64> {
    let tasks = plan(e, h, cfg)?;
    let hb = substitute::transform_hamiltonian(h)?;
    let swap = substitute::swap_observable(e.n())?;
    let cs = e.coeffs();
    let rhos = e.rhos();
    let mut mu_x = ZERO;
    let mut mu_y = ZERO;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for task in &tasks {
        let (g, q) = match task.alpha {
            Some(a) => {
                let (g, q) = &hb.terms()[a];
                (*g, q)
            }
            None => (1.0, swap.operator()),
        };
        let dist = outcome_distribution(&rhos[task.i], &rhos[task.j], q)?;
        let w = cs[task.i].conj() * cs[task.j] * g;
        let (vr, vi, cov) = dist.moments();
        // Re(w x) = Re w Re x - Im w Im x.
        let v = (w.re * w.re * vr + w.im * w.im * vi - 2.0 * w.re * w.im * cov) / task.shots as f64;
        match task.kind {
            TaskKind::Numerator => {
                mu_x += w * dist.mean();
                var_x += v;
            }
            TaskKind::Denominator => {
                mu_y += w * dist.mean();
                var_y += v;
            }
        }
    }
    let my = mu_y.re;
    if my.abs() < UNSTABLE_RATIO_TOL {
        return Err(Error::UnstableRatio {
            denominator: my.abs(),
            breakdown: Vec::new(),
        });
    }
    let mx = mu_x.re;
    Ok(var_x / (my * my) + mx * mx * var_y / (my * my * my * my))
}

/// Shot count sufficient for accuracy `eps`:
/// `max(e^{4 zeta}, 4^L) (3 K^2 / eps^2) (m ||H||_F^2 / 4^n + ||H||_2^2)`.
pub fn sampling_bound(zeta: f64, l: usize, k: usize, eps: f64, h: &PauliSum) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(domain(format!("accuracy must be positive, got {eps}")));
    }
    let norms = h.norms()?;
    let prefactor = (4.0 * zeta).exp().max(4f64.powi(l as i32));
    let k2 = (k * k) as f64;
    let m = h.len() as f64;
    Ok(prefactor * 3.0 * k2 / (eps * eps) * (m * norms.frobenius_sq_over_dim + norms.spectral * norms.spectral))
}

/// Gradient magnitude bound `2^{L+2} K^2 sum|g| eta`.
pub fn gradient_bound(l: usize, k: usize, h: &PauliSum, eta: f64) -> Result<f64> {
    if !(eta >= 0.0) {
        return Err(domain(format!("eta must be non-negative, got {eta}")));
    }
    let l1: f64 = h.terms().iter().map(|(g, _)| g.abs()).sum();
    Ok(2f64.powi(l as i32 + 2) * (k * k) as f64 * l1 * eta)
}
