//! The lower-bound inequality for the Farey-point sum, the energy
//! concentration functional `M(x)`, and the Monte Carlo experiments.
//!
//! `M(x)` is the largest share of `∫₀¹ |S|²` carried by a measurable subset
//! of measure `x`. It is bracketed from a [`SpectrumGrid`]:
//!
//! - **Exact cell integrals.** `f = |S|²` is a real trigonometric polynomial
//!   of degree `d = N − 1`, and the grid has `L > 2d` samples, so `f` is
//!   recovered exactly from them. The integral of `f` over every cell
//!   `[j/L, (j+1)/L]` follows from the Fourier coefficients in one extra
//!   transform.
//! - **Lower bound.** The `⌊xL⌋` cells of largest integral form a set of
//!   measure at most `x`; their share is a lower bound. Also `M(x) ≥ x`, since
//!   the best set beats the average.
//! - **Upper bound.** Bernstein's inequality gives `sup|f′| ≤ 2πd·F` and
//!   `sup|f″| ≤ (2πd)²·F` with `F = sup f`. Within a cell, `f` exceeds the
//!   larger endpoint sample by at most `(h/2)·sup|f′|` and at most the linear
//!   interpolation error `(h²/8)·sup|f″|` (`h = 1/L`). The maximum `F` itself
//!   exceeds the grid maximum `G` by at most the same amounts (for the second
//!   order bound: `f′ = 0` at the maximiser, which is `h/2` from a sample),
//!   so `F ≤ G / (1 − t)` for either `t = πd/L` or `t = π²d²/(2L²)`. This
//!   yields a cell ceiling `U_j`. A set meeting cell `j` in measure `w`
//!   carries at most `min(I_j, w·U_j)` there, so the best possible total over
//!   sets of measure `x` is a fractional knapsack, solved greedily by `U_j`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::coeffs::{CoefficientVector, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::expsum::{e, eval_farey_all, fourth_moment_exact, integral_ssprime, spectrum, SpectrumGrid};

/// Relative slack absorbing floating rounding in the `M(x)` bracket.
const ROUNDING_SLACK: f64 = 1e-12;

/// Default grid: `max(4096, next power of two ≥ 8N)`.
pub fn default_grid(n: usize) -> usize {
    (8 * n).next_power_of_two().max(4096)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MBracket {
    pub lower: f64,
    pub upper: f64,
}

/// Integrals of the trigonometric polynomial sampled by `values` over each
/// grid cell `[j/L, (j+1)/L]`.
fn cell_integrals(values: &[f64]) -> Vec<f64> {
    let len = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut coef: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(len).process(&mut coef);
    let scale = 1.0 / len as f64;
    for (idx, c) in coef.iter_mut().enumerate() {
        let k = if idx <= len / 2 { idx as f64 } else { idx as f64 - len as f64 };
        *c *= scale;
        // ∫_{j/L}^{(j+1)/L} e(ku) du = e(kj/L)·(e(k/L) − 1)/(2πik)
        *c *= if idx == 0 {
            Complex64::new(scale, 0.0)
        } else {
            (e(k * scale) - 1.0) / Complex64::new(0.0, TAU * k)
        };
    }
    planner.plan_fft_inverse(len).process(&mut coef);
    coef.iter().map(|c| c.re).collect()
}

/// Rigorous bracket `lower ≤ M(x) ≤ upper` from the grid samples.
pub fn m_functional_bounds(sg: &SpectrumGrid, x: f64) -> Result<MBracket> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::param(format!("M(x) needs 0 < x <= 1, got {x}")));
    }
    let values = sg.values();
    let len = values.len();
    let total = sg.mean();
    if !(total > 0.0) {
        return Err(Error::param("spectrum vanishes identically"));
    }
    let h = 1.0 / len as f64;
    let degree = sg.n().saturating_sub(1) as f64;
    let integrals = cell_integrals(values);

    let mut sorted = integrals.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let cells = ((x * len as f64).floor() as usize).min(len);
    let best_cells: f64 = sorted[..cells].iter().sum();
    let lower = (best_cells / total * (1.0 - ROUNDING_SLACK)).max(x).min(1.0);

    let grid_max = values.iter().copied().fold(0.0, f64::max);
    let first = PI * degree * h;
    let second = PI * PI * degree * degree * h * h / 2.0;
    let sup_bound = [first, second]
        .iter()
        .filter(|&&t| t < 1.0)
        .map(|&t| grid_max / (1.0 - t))
        .fold(f64::INFINITY, f64::min);
    let excess = first.min(second) * sup_bound;

    // (ceiling U_j, integral I_j) per cell
    let mut ceilings: Vec<(f64, f64)> = (0..len)
        .map(|j| {
            let ceiling = values[j].max(values[(j + 1) % len]) + excess;
            let integral = integrals[j].max(0.0);
            (ceiling.max(integral * len as f64), integral)
        })
        .collect();
    ceilings.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut remaining = x;
    let mut mass = 0.0;
    for (ceiling, integral) in ceilings {
        if remaining <= 0.0 {
            break;
        }
        if ceiling <= 0.0 {
            continue;
        }
        let width = (integral / ceiling).min(remaining);
        mass += width * ceiling;
        remaining -= width;
    }
    let upper = (mass / total * (1.0 + ROUNDING_SLACK) + ROUNDING_SLACK).min(1.0);
    Ok(MBracket { lower, upper: upper.max(lower) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaParams {
    pub n: usize,
    pub q_max: u64,
    pub a_param: f64,
    pub grid_size: usize,
}

impl LemmaParams {
    /// Parameters with the default grid for `n`.
    pub fn new(n: usize, q_max: u64, a_param: f64) -> Self {
        Self { n, q_max, a_param, grid_size: default_grid(n) }
    }

    /// `δ = A/Q²`.
    pub fn delta(&self) -> f64 {
        self.a_param / (self.q_max as f64 * self.q_max as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lhs: f64,
    pub m_lower: f64,
    pub m_upper: f64,
    pub rhs_conservative: f64,
    pub slack: f64,
    pub holds: bool,
    pub delta: f64,
    /// `δ < 1/2`; outside this range the inequality is trivially satisfied.
    pub delta_small: bool,
}

/// Evaluates both sides of
/// `Σ_{q≤Q} Σ_{(a,q)=1} |S(a/q)|² ≥ (Q²/A·(1 − M(1/A)) − 6πNA)·Σ|aₙ|²`,
/// with `M(1/A)` replaced by its upper bound so that the right side can only
/// be underestimated.
pub fn lemma_check(v: &CoefficientVector, p: &LemmaParams) -> Result<LemmaReport> {
    if !(p.a_param > 1.0) || !p.a_param.is_finite() {
        return Err(Error::param(format!("A must exceed 1, got {}", p.a_param)));
    }
    if p.n != v.len() {
        return Err(Error::InvalidDimension(format!(
            "parameters declare N = {} but the vector has {} entries",
            p.n,
            v.len()
        )));
    }
    let lhs = eval_farey_all(v, p.q_max)?.sieve_lhs();
    let norm = v.norm_sq();
    let sg = spectrum(v, p.grid_size)?;
    let bracket = if norm > 0.0 {
        m_functional_bounds(&sg, 1.0 / p.a_param)?
    } else {
        MBracket { lower: 0.0, upper: 1.0 }
    };
    let q2 = (p.q_max * p.q_max) as f64;
    let n = v.len() as f64;
    let rhs = (q2 / p.a_param * (1.0 - bracket.upper) - 6.0 * PI * n * p.a_param) * norm;
    let delta = p.delta();
    Ok(LemmaReport {
        lhs,
        m_lower: bracket.lower,
        m_upper: bracket.upper,
        rhs_conservative: rhs,
        slack: lhs - rhs,
        holds: lhs >= rhs,
        delta,
        delta_small: delta < 0.5,
    })
}

/// Classical bound `Σ|S(a/q)|² ≤ (N + Q²)·Σ|aₙ|²`, with relative tolerance `10⁻⁹`.
pub fn upper_sieve_check(v: &CoefficientVector, q_max: u64) -> Result<bool> {
    let (lhs, bound) = upper_sieve_sides(v, q_max)?;
    Ok(lhs <= bound * (1.0 + 1e-9))
}

fn upper_sieve_sides(v: &CoefficientVector, q_max: u64) -> Result<(f64, f64)> {
    let lhs = eval_farey_all(v, q_max)?.sieve_lhs();
    let bound = (v.len() as f64 + (q_max * q_max) as f64) * v.norm_sq();
    Ok((lhs, bound))
}

/// `∫|SS′| ≤ 2πN·Σ|aₙ|²` on the quadrature grid, with relative tolerance `10⁻⁶`.
pub fn cauchy_schwarz_check(v: &CoefficientVector, grid_size: usize) -> Result<bool> {
    let integral = integral_ssprime(v, grid_size)?;
    Ok(integral <= TAU * v.len() as f64 * v.norm_sq() * (1.0 + 1e-6))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub n: usize,
    pub q_max: u64,
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    pub ensemble: EnsembleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub lhs: f64,
    pub threshold: f64,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub records: Vec<TrialRecord>,
    pub successes: usize,
    pub success_fraction: f64,
}

fn run_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(f).collect()
}

/// Monte Carlo frequency of `Σ|S(a/q)|² ≥ εQ²·Σ|aₙ|²` over random vectors.
pub fn theorem_monte_carlo(cfg: &TrialConfig) -> Result<ExperimentReport> {
    if !(cfg.epsilon > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    if cfg.trials == 0 {
        return Err(Error::param("at least one trial is required"));
    }
    let spec = EnsembleSpec::new(cfg.ensemble.clone(), cfg.n, cfg.seed);
    let q2 = (cfg.q_max * cfg.q_max) as f64;
    let records = run_trials(cfg.trials, |trial| {
        let v = spec.draw(trial as u64)?;
        let lhs = eval_farey_all(&v, cfg.q_max)?.sieve_lhs();
        let threshold = cfg.epsilon * q2 * v.norm_sq();
        Ok(TrialRecord { trial, lhs, threshold, success: lhs >= threshold })
    })?;
    let successes = records.iter().filter(|r| r.success).count();
    Ok(ExperimentReport { successes, success_fraction: successes as f64 / cfg.trials as f64, records })
}

/// How `Q` is chosen from `N` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QRule {
    Fixed(u64),
    /// `⌈c·√N⌉`
    Sqrt(f64),
    /// `⌈c·√N·ln N⌉`
    SqrtLog(f64),
}

impl QRule {
    pub fn resolve(&self, n: usize) -> u64 {
        let q = match *self {
            QRule::Fixed(q) => return q,
            QRule::Sqrt(1.0) => return ceil_sqrt(n as u64),
            QRule::Sqrt(c) => c * (n as f64).sqrt(),
            QRule::SqrtLog(c) => c * (n as f64).sqrt() * (n as f64).ln(),
        };
        (q.ceil() as u64).max(1)
    }
}

fn ceil_sqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while r * r < n {
        r += 1;
    }
    r.max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub q_max: u64,
    pub trials: usize,
    /// Trial mean of `Σ|S(a/q)|² / (N·Σ|aₙ|²)`.
    pub mean_ratio: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

/// For each `N`, the trial-averaged ratio `Σ|S(a/q)|² / (N·Σ|aₙ|²)` at
/// `Q = rule(N)`. Row `i` draws its vectors from streams `(i << 32) + trial`.
pub fn er_sweep(
    n_list: &[usize],
    q_rule: QRule,
    trials: usize,
    seed: u64,
    ensemble: &EnsembleKind,
) -> Result<SweepReport> {
    if trials == 0 {
        return Err(Error::param("at least one trial is required"));
    }
    let rows = n_list
        .iter()
        .enumerate()
        .map(|(row, &n)| {
            let q_max = q_rule.resolve(n);
            let spec = EnsembleSpec::new(ensemble.clone(), n, seed);
            let ratios = run_trials(trials, |trial| {
                let v = spec.draw(((row as u64) << 32) + trial as u64)?;
                let lhs = eval_farey_all(&v, q_max)?.sieve_lhs();
                Ok(lhs / (n as f64 * v.norm_sq()))
            })?;
            Ok(SweepRow {
                n,
                q_max,
                trials,
                mean_ratio: ratios.iter().sum::<f64>() / trials as f64,
                min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationReport {
    pub n: usize,
    pub x: f64,
    pub grid_size: usize,
    pub estimates: Vec<MBracket>,
    pub mean_lower: f64,
    /// `√(2x)`, the ceiling on `E M(x)`.
    pub expectation_bound: f64,
    /// Fraction of trials with lower estimate above `1/2`.
    pub tail_fraction: f64,
    /// `√(8x)`, the ceiling on `P(M(x) > 1/2)`.
    pub tail_bound: f64,
}

/// Monte Carlo mean of the lower `M(x)` estimate over Rademacher vectors.
pub fn expected_m_check(n: usize, x: f64, trials: usize, seed: u64, grid_size: usize) -> Result<ExpectationReport> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::param(format!("x must lie in (0, 1], got {x}")));
    }
    if trials == 0 {
        return Err(Error::param("at least one trial is required"));
    }
    let spec = EnsembleSpec::new(EnsembleKind::Rademacher, n, seed);
    let estimates = run_trials(trials, |trial| {
        let v = spec.draw(trial as u64)?;
        m_functional_bounds(&spectrum(&v, grid_size)?, x)
    })?;
    let mean_lower = estimates.iter().map(|b| b.lower).sum::<f64>() / trials as f64;
    let tail = estimates.iter().filter(|b| b.lower > 0.5).count();
    Ok(ExpectationReport {
        n,
        x,
        grid_size,
        estimates,
        mean_lower,
        expectation_bound: (2.0 * x).sqrt(),
        tail_fraction: tail as f64 / trials as f64,
        tail_bound: (8.0 * x).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub n: usize,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Empirical `σ/√trials`.
    pub std_error: f64,
    /// `2N² − N`.
    pub expected: f64,
}

/// Monte Carlo mean of `∫|S|⁴` over a random ensemble, against `2N² − N`.
pub fn fourth_moment_ensemble(n: usize, trials: usize, seed: u64, ensemble: &EnsembleKind) -> Result<MomentReport> {
    if trials < 2 {
        return Err(Error::param("at least two trials are required"));
    }
    let spec = EnsembleSpec::new(ensemble.clone(), n, seed);
    let values = run_trials(trials, |trial| Ok(fourth_moment_exact(&spec.draw(trial as u64)?)))?;
    let count = trials as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let nf = n as f64;
    Ok(MomentReport { n, mean, std_error: (var / count).sqrt(), expected: 2.0 * nf * nf - nf, values })
}
