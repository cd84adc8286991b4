//! Evaluation of `S(α) = Σ_{n≤N} aₙ e(nα)` with `e(x) = exp(2πix)`.
//!
//! Farey points are evaluated denominator by denominator: for a fixed `q` the
//! coefficients are folded into residue classes `b_r = Σ_{n ≡ r (q)} aₙ`, and
//! a single length-`q` inverse DFT yields `S(a/q)` for every `a` at once. The
//! whole Farey set of order `Q` then costs `O(NQ + Σ q log q)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::coeffs::CoefficientVector;
use crate::error::{Error, Result};
use crate::farey::FareyFraction;

/// `e(x) = exp(2πix)`, reducing `x` mod 1 first.
pub fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * x.rem_euclid(1.0))
}

/// `S(α)` by direct summation.
pub fn eval_direct(v: &CoefficientVector, alpha: f64) -> Complex64 {
    v.entries()
        .iter()
        .enumerate()
        .map(|(k, a)| a * e((k + 1) as f64 * alpha))
        .sum()
}

/// `S′(α) = Σ 2πi·n·aₙ e(nα)`.
pub fn eval_derivative(v: &CoefficientVector, alpha: f64) -> Complex64 {
    let sum: Complex64 = v
        .entries()
        .iter()
        .enumerate()
        .map(|(k, a)| a * ((k + 1) as f64) * e((k + 1) as f64 * alpha))
        .sum();
    sum * Complex64::new(0.0, TAU)
}

/// `S(a/q)` at every Farey fraction of order `Q`, stored by `(q, a)`.
#[derive(Debug, Clone)]
pub struct FareyEvaluation {
    q_max: u64,
    values: Vec<(FareyFraction, Complex64)>,
}

impl FareyEvaluation {
    pub fn q_max(&self) -> u64 {
        self.q_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries ordered by denominator, then numerator.
    pub fn iter(&self) -> impl Iterator<Item = &(FareyFraction, Complex64)> {
        self.values.iter()
    }

    pub fn get(&self, f: &FareyFraction) -> Option<Complex64> {
        let key = (f.denominator(), f.numerator());
        self.values
            .binary_search_by_key(&key, |(g, _)| (g.denominator(), g.numerator()))
            .ok()
            .map(|i| self.values[i].1)
    }

    /// `Σ_{q≤Q} Σ_{(a,q)=1} |S(a/q)|²`, summed in storage order.
    pub fn sieve_lhs(&self) -> f64 {
        self.values.iter().map(|(_, s)| s.norm_sqr()).sum()
    }
}

pub fn eval_farey_all(v: &CoefficientVector, q_max: u64) -> Result<FareyEvaluation> {
    if q_max == 0 {
        return Err(Error::param("Farey order Q must be >= 1"));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut values = Vec::new();
    let mut buf = Vec::new();
    for q in 1..=q_max {
        let len = q as usize;
        buf.clear();
        buf.resize(len, Complex64::new(0.0, 0.0));
        for (k, a) in v.entries().iter().enumerate() {
            buf[(k + 1) % len] += a;
        }
        // inverse transform: X[j] = Σ_r b_r e(rj/q), so X[a mod q] = S(a/q)
        planner.plan_fft_inverse(len).process(&mut buf);
        for a in 1..=q {
            if gcd(a, q) == 1 {
                let f = FareyFraction::new(a, q).expect("reduced by construction");
                values.push((f, buf[(a % q) as usize]));
            }
        }
    }
    Ok(FareyEvaluation { q_max, values })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn sieve_lhs(fe: &FareyEvaluation) -> f64 {
    fe.sieve_lhs()
}

/// Samples `|S(j/L)|²` for `j = 0..L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    n: usize,
    values: Vec<f64>,
}

impl SpectrumGrid {
    /// Wraps raw samples; `values.len()` must be a power of two of at least `4n`.
    pub fn from_values(n: usize, values: Vec<f64>) -> Result<Self> {
        check_grid(values.len(), n, 4, true)?;
        if values.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::param("spectrum samples must be finite and nonnegative"));
        }
        Ok(Self { n, values })
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid mean; equals `∫₀¹ |S|²` exactly (up to rounding) for `L > 2N`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn check_grid(grid: usize, n: usize, factor: usize, pow2: bool) -> Result<()> {
    if pow2 && !grid.is_power_of_two() {
        return Err(Error::InvalidResolution { grid, reason: "must be a power of two".into() });
    }
    if grid < factor * n {
        return Err(Error::InvalidResolution {
            grid,
            reason: format!("must be at least {factor}N = {}", factor * n),
        });
    }
    Ok(())
}

/// `S(j/L)` for `j = 0..L` from the coefficients `weights[k]` of `e((k+1)u)`.
fn sample_on_grid(weights: impl Iterator<Item = Complex64>, grid: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); grid];
    for (k, w) in weights.enumerate() {
        buf[k + 1] = w;
    }
    FftPlanner::<f64>::new().plan_fft_inverse(grid).process(&mut buf);
    buf
}

/// `|S(j/L)|²` on a uniform grid of `L` points via one zero-padded transform.
pub fn spectrum(v: &CoefficientVector, grid_size: usize) -> Result<SpectrumGrid> {
    check_grid(grid_size, v.len(), 4, true)?;
    let values = sample_on_grid(v.entries().iter().copied(), grid_size)
        .into_iter()
        .map(|s| s.norm_sqr())
        .collect();
    Ok(SpectrumGrid { n: v.len(), values })
}

/// `ρ(k) = Σₙ a_{n+k} conj(aₙ)` for `k = 0..N`; `ρ(−k) = conj ρ(k)`.
pub fn autocorrelation(v: &CoefficientVector) -> Vec<Complex64> {
    let a = v.entries();
    (0..a.len())
        .map(|k| a[k..].iter().zip(a).map(|(x, y)| x * y.conj()).sum())
        .collect()
}

// Above this length the autocorrelation goes through an FFT.
const DIRECT_AUTOCORRELATION_MAX: usize = 256;

/// `∫₀¹ |S(u)|⁴ du = Σ_{|k|<N} |ρ(k)|²`, with no quadrature error.
pub fn fourth_moment_exact(v: &CoefficientVector) -> f64 {
    let rho = if v.len() <= DIRECT_AUTOCORRELATION_MAX {
        autocorrelation(v)
    } else {
        autocorrelation_fft(v)
    };
    rho[0].norm_sqr() + 2.0 * rho[1..].iter().map(|r| r.norm_sqr()).sum::<f64>()
}

/// Autocorrelation via `|S|²` sampled on a grid of length `≥ 2N`, where the
/// lags do not alias.
fn autocorrelation_fft(v: &CoefficientVector) -> Vec<Complex64> {
    let n = v.len();
    let grid = (2 * n).next_power_of_two();
    let mut power: Vec<Complex64> = sample_on_grid(v.entries().iter().copied(), grid)
        .into_iter()
        .map(|s| Complex64::new(s.norm_sqr(), 0.0))
        .collect();
    // forward transform: Σ_j |S(j/L)|² e(−kj/L) = L·ρ(k)
    FftPlanner::<f64>::new().plan_fft_forward(grid).process(&mut power);
    power.truncate(n);
    power.iter().map(|p| p / grid as f64).collect()
}

/// Grid quadrature of `∫₀¹ |S(u) S′(u)| du`; requires `L ≥ 8N`.
///
/// The grid means of `|S|²` and `|S′|²` are exact for `L > 2N`, so the
/// discrete Cauchy–Schwarz inequality makes this estimate obey the same
/// `2πN·Σ|aₙ|²` ceiling as the integral itself.
pub fn integral_ssprime(v: &CoefficientVector, grid_size: usize) -> Result<f64> {
    check_grid(grid_size, v.len(), 8, false)?;
    let s = sample_on_grid(v.entries().iter().copied(), grid_size);
    let ds = sample_on_grid(
        v.entries()
            .iter()
            .enumerate()
            .map(|(k, a)| a * Complex64::new(0.0, 2.0 * PI * (k + 1) as f64)),
        grid_size,
    );
    let total: f64 = s.iter().zip(&ds).map(|(x, y)| x.norm() * y.norm()).sum();
    Ok(total / grid_size as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{make_ensemble, EnsembleKind, EnsembleSpec};
    use crate::farey::farey_fractions;

    fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
        (x - y).norm() <= tol * y.norm().max(1.0)
    }

    fn rademacher(n: usize, seed: u64) -> CoefficientVector {
        make_ensemble(&EnsembleSpec::new(EnsembleKind::Rademacher, n, seed)).unwrap()
    }

    /// Quadruple sum Σ_{μ₁+μ₂=ν₁+ν₂} a_{ν₁} a_{ν₂} conj(a_{μ₁} a_{μ₂}).
    fn brute_fourth_moment(v: &CoefficientVector) -> f64 {
        let a = v.entries();
        let n = a.len();
        let mut total = Complex64::new(0.0, 0.0);
        for n1 in 0..n {
            for n2 in 0..n {
                for m1 in 0..n {
                    for m2 in 0..n {
                        if n1 + n2 == m1 + m2 {
                            total += a[n1] * a[n2] * (a[m1] * a[m2]).conj();
                        }
                    }
                }
            }
        }
        total.re
    }

    #[test]
    fn direct_examples() {
        let ones5 = CoefficientVector::ones(5).unwrap();
        assert!(close(eval_direct(&ones5, 0.0), Complex64::new(5.0, 0.0), 1e-15));
        let pair = CoefficientVector::ones(2).unwrap();
        assert!(eval_direct(&pair, 0.5).norm() < 1e-15);
        let single = CoefficientVector::new(vec![Complex64::new(0.6, -0.8)]).unwrap();
        for alpha in [0.0, 0.1, 0.37, 2.9] {
            assert!((eval_direct(&single, alpha).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_examples() {
        let one = CoefficientVector::ones(1).unwrap();
        assert!(close(eval_derivative(&one, 0.0), Complex64::new(0.0, TAU), 1e-15));
        let pair = CoefficientVector::ones(2).unwrap();
        assert!(close(eval_derivative(&pair, 0.0), Complex64::new(0.0, 3.0 * TAU), 1e-15));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-6;
        for n in [1, 7, 32, 64] {
            let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Steinhaus, n, n as u64)).unwrap();
            for alpha in [0.013, 0.25, 0.61803] {
                let fd = (eval_direct(&v, alpha + h) - eval_direct(&v, alpha - h)) / (2.0 * h);
                let d = eval_derivative(&v, alpha);
                assert!((fd - d).norm() <= 1e-4 * d.norm().max(1.0), "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn farey_examples() {
        let pair = CoefficientVector::ones(2).unwrap();
        let fe = eval_farey_all(&pair, 2).unwrap();
        assert_eq!(fe.len(), 2);
        let one = FareyFraction::new(1, 1).unwrap();
        let half = FareyFraction::new(1, 2).unwrap();
        assert!(close(fe.get(&one).unwrap(), Complex64::new(2.0, 0.0), 1e-15));
        assert!(fe.get(&half).unwrap().norm() < 1e-15);
        assert!((sieve_lhs(&fe) - 4.0).abs() < 1e-14);
        let fe1 = eval_farey_all(&pair, 1).unwrap();
        assert!((fe1.sieve_lhs() - 4.0).abs() < 1e-14);

        let v = rademacher(37, 1);
        let total: Complex64 = v.entries().iter().sum();
        let fe = eval_farey_all(&v, 1).unwrap();
        assert!(close(fe.get(&one).unwrap(), total, 1e-14));
        assert!((fe.sieve_lhs() - total.norm_sqr()).abs() < 1e-9);
        assert!(eval_farey_all(&v, 0).is_err());
    }

    #[test]
    fn farey_keys_are_the_farey_set() {
        let v = rademacher(10, 2);
        let fe = eval_farey_all(&v, 17).unwrap();
        let mut keys: Vec<_> = fe.iter().map(|(f, _)| *f).collect();
        keys.sort();
        assert_eq!(keys, farey_fractions(17).unwrap());
    }

    #[test]
    fn farey_matches_direct() {
        for seed in 0..5 {
            let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Steinhaus, 100, seed)).unwrap();
            let scale = v.norm_sq().sqrt();
            for (f, s) in eval_farey_all(&v, 20).unwrap().iter() {
                let d = eval_direct(&v, f.value());
                assert!((s - d).norm() <= 1e-9 * d.norm().max(scale), "{f}");
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        let one = CoefficientVector::ones(1).unwrap();
        let sg = spectrum(&one, 16).unwrap();
        assert!(sg.values().iter().all(|x| (x - 1.0).abs() < 1e-14));

        let pair = CoefficientVector::ones(2).unwrap();
        let sg = spectrum(&pair, 8).unwrap();
        for (j, x) in sg.values().iter().enumerate() {
            let expected = 2.0 + 2.0 * (TAU * j as f64 / 8.0).cos();
            assert!((x - expected).abs() < 1e-14, "j={j}");
        }
        assert!((sg.mean() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spectrum_rejects_bad_grids() {
        let v = rademacher(10, 3);
        assert!(matches!(spectrum(&v, 32), Err(Error::InvalidResolution { .. })));
        assert!(matches!(spectrum(&v, 48), Err(Error::InvalidResolution { .. })));
        assert!(spectrum(&v, 64).is_ok());
        assert!(matches!(integral_ssprime(&v, 64), Err(Error::InvalidResolution { .. })));
    }

    #[test]
    fn fourth_moment_examples() {
        for signs in [[1.0, 1.0], [1.0, -1.0]] {
            let v = CoefficientVector::from_real(&signs).unwrap();
            assert!((fourth_moment_exact(&v) - 6.0).abs() < 1e-12);
        }
        let ones3 = CoefficientVector::ones(3).unwrap();
        assert!((fourth_moment_exact(&ones3) - 19.0).abs() < 1e-12);
    }

    #[test]
    fn fourth_moment_matches_quadruple_sum() {
        for n in 1..=8 {
            for seed in 0..3 {
                let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Steinhaus, n, seed)).unwrap();
                assert!((fourth_moment_exact(&v) - brute_fourth_moment(&v)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fourth_moment_fft_route_agrees() {
        for n in [3, 50, 300] {
            let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Steinhaus, n, 9)).unwrap();
            let direct = autocorrelation(&v);
            let fast = autocorrelation_fft(&v);
            for (x, y) in direct.iter().zip(&fast) {
                assert!((x - y).norm() < 1e-9 * n as f64);
            }
        }
    }

    #[test]
    fn ssprime_examples() {
        let one = CoefficientVector::ones(1).unwrap();
        assert!((integral_ssprime(&one, 8).unwrap() - TAU).abs() < 1e-12);

        let pair = CoefficientVector::ones(2).unwrap();
        let coarse = integral_ssprime(&pair, 1024).unwrap();
        let fine = integral_ssprime(&pair, 2048).unwrap();
        assert!((fine - coarse).abs() <= 1e-6 * fine);
        assert!(fine < 2.0 * TAU * pair.norm_sq());
    }
}
