//! Coefficient vectors `a₁..a_N` and the random ensembles drawn from them.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), whose output
//! stream is fixed by its specification and identical on every platform. A
//! vector is derived from a `(seed, trial)` pair: the generator is seeded with
//! `seed` (expanded by `SeedableRng::seed_from_u64`) and then switched to
//! stream number `trial`. Trials therefore never share generator state and can
//! run in any order.
//!
//! Samples are mapped from raw generator words without going through any
//! distribution helpers, so the laws below are pinned independently of the
//! `rand` version:
//!
//! - Rademacher: one `u32` per entry, the top bit selects `-1` (set) or `+1`.
//! - Steinhaus: one `u64` per entry, `θ = (w >> 11) · 2⁻⁵³ ∈ [0, 1)`, entry
//!   `e(θ) = exp(2πiθ)`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How a [`CoefficientVector`] came about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    /// Every entry is exactly `+1` or `-1`.
    Rademacher,
    /// Every entry has modulus one.
    Steinhaus,
    /// Supplied by the caller.
    Explicit,
}

/// The sequence `a₁..a_N` defining `S(α) = Σ aₙ e(nα)`.
///
/// Entry `k` of [`entries`](Self::entries) is the coefficient of `e((k+1)α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    entries: Vec<Complex64>,
    law: Law,
}

impl CoefficientVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDimension("coefficient vector must have N >= 1".into()));
        }
        Ok(Self { entries, law: Law::Explicit })
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `aₙ = 1` for all `n ≤ N`.
    pub fn ones(n: usize) -> Result<Self> {
        Self::from_real(&vec![1.0; n])
    }

    /// Wraps a sign pattern, tagging it as Rademacher.
    pub fn from_signs(signs: &[bool]) -> Result<Self> {
        let mut v = Self::from_real(
            &signs.iter().map(|&neg| if neg { -1.0 } else { 1.0 }).collect::<Vec<_>>(),
        )?;
        v.law = Law::Rademacher;
        Ok(v)
    }

    /// `N`, the number of coefficients.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Always false; a vector has at least one entry.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn law(&self) -> Law {
        self.law
    }

    /// `Σ |aₙ|²`.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Free-function form of [`CoefficientVector::norm_sq`].
pub fn norm_sq(v: &CoefficientVector) -> f64 {
    v.norm_sq()
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleKind {
    /// Independent uniform `±1`.
    Rademacher,
    /// Independent uniform points on the unit circle.
    Steinhaus,
    /// A fixed vector, returned unchanged for every seed and trial.
    Fixed(Vec<Complex64>),
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleKind::Rademacher => "rademacher",
            EnsembleKind::Steinhaus => "steinhaus",
            EnsembleKind::Fixed(_) => "fixed",
        }
    }
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rademacher" => Ok(EnsembleKind::Rademacher),
            "steinhaus" => Ok(EnsembleKind::Steinhaus),
            other => Err(Error::param(format!("unknown ensemble '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, n: usize, seed: u64) -> Self {
        Self { kind, n, seed }
    }

    /// The vector for trial `trial`. Trial 0 is what [`make_ensemble`] returns.
    pub fn draw(&self, trial: u64) -> Result<CoefficientVector> {
        if self.n == 0 {
            return Err(Error::InvalidDimension("ensemble dimension must be >= 1".into()));
        }
        match &self.kind {
            EnsembleKind::Fixed(entries) => {
                if entries.len() != self.n {
                    return Err(Error::InvalidDimension(format!(
                        "fixed vector has {} entries but n = {}",
                        entries.len(),
                        self.n
                    )));
                }
                CoefficientVector::new(entries.clone())
            }
            EnsembleKind::Rademacher => {
                let mut rng = trial_rng(self.seed, trial);
                let signs: Vec<bool> = (0..self.n).map(|_| rng.next_u32() >> 31 == 1).collect();
                CoefficientVector::from_signs(&signs)
            }
            EnsembleKind::Steinhaus => {
                let mut rng = trial_rng(self.seed, trial);
                let entries = (0..self.n)
                    .map(|_| {
                        let theta = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                        Complex64::from_polar(1.0, TAU * theta)
                    })
                    .collect();
                Ok(CoefficientVector { entries, law: Law::Steinhaus })
            }
        }
    }
}

/// Draws the vector described by `spec`; a pure function of `(kind, n, seed)`.
pub fn make_ensemble(spec: &EnsembleSpec) -> Result<CoefficientVector> {
    spec.draw(0)
}

/// Generator for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_entries_are_signs() {
        let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Rademacher, 4, 17)).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v.law(), Law::Rademacher);
        for a in v.entries() {
            assert!(*a == Complex64::new(1.0, 0.0) || *a == Complex64::new(-1.0, 0.0));
        }
        assert_eq!(v.norm_sq(), 4.0);
    }

    #[test]
    fn fixed_is_identity() {
        let entries = vec![Complex64::new(1.0, 0.0); 2];
        let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Fixed(entries.clone()), 2, 0)).unwrap();
        assert_eq!(v.entries(), &entries[..]);
        let err = make_ensemble(&EnsembleSpec::new(EnsembleKind::Fixed(entries), 3, 0));
        assert!(matches!(err, Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn same_spec_same_vector() {
        for kind in [EnsembleKind::Rademacher, EnsembleKind::Steinhaus] {
            let spec = EnsembleSpec::new(kind, 1, 99);
            assert_eq!(make_ensemble(&spec).unwrap(), make_ensemble(&spec).unwrap());
        }
        let spec = EnsembleSpec::new(EnsembleKind::Rademacher, 64, 5);
        assert_ne!(spec.draw(0).unwrap(), spec.draw(1).unwrap());
    }

    #[test]
    fn zero_dimension_rejected() {
        let err = make_ensemble(&EnsembleSpec::new(EnsembleKind::Rademacher, 0, 1));
        assert!(matches!(err, Err(Error::InvalidDimension(_))));
        assert!(CoefficientVector::new(vec![]).is_err());
    }

    #[test]
    fn norm_sq_examples() {
        assert_eq!(norm_sq(&CoefficientVector::from_real(&[1.0, -1.0]).unwrap()), 2.0);
        let v = CoefficientVector::new(vec![Complex64::new(3.0, 4.0)]).unwrap();
        assert_eq!(v.norm_sq(), 25.0);
    }

    #[test]
    fn steinhaus_unit_modulus() {
        let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Steinhaus, 500, 3)).unwrap();
        for a in v.entries() {
            assert!((a.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rademacher_coordinates_centered() {
        // Mean of each coordinate over 10⁴ seeds within 5/√10⁴ of zero.
        let n = 8;
        let seeds = 10_000u64;
        let mut sums = vec![0.0; n];
        for seed in 0..seeds {
            let v = make_ensemble(&EnsembleSpec::new(EnsembleKind::Rademacher, n, seed)).unwrap();
            for (s, a) in sums.iter_mut().zip(v.entries()) {
                *s += a.re;
            }
        }
        for s in sums {
            assert!((s / seeds as f64).abs() <= 5.0 / (seeds as f64).sqrt());
        }
    }
}
