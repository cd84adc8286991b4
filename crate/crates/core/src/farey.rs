//! Farey fractions of order `Q` and the geometry of their neighbourhoods.
//!
//! All distances are taken on the circle `ℝ/ℤ`: the fraction `1/1` is the
//! point `0`, and an arc around it wraps past `1`. Covering counts and the
//! uncovered set are computed in exact rational arithmetic.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact big-integer rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// A reduced fraction `a/q` with `1 ≤ a ≤ q`; `1/1` stands for the point `0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FareyFraction {
    a: u64,
    q: u64,
}

impl FareyFraction {
    pub fn new(a: u64, q: u64) -> Result<Self> {
        if q == 0 || a == 0 || a > q || a.gcd(&q) != 1 {
            return Err(Error::param(format!("{a}/{q} is not a reduced fraction in (0, 1]")));
        }
        Ok(Self { a, q })
    }

    pub fn numerator(&self) -> u64 {
        self.a
    }

    pub fn denominator(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.a as f64 / self.q as f64
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(BigInt::from(self.a), BigInt::from(self.q))
    }

    /// Position on the circle, in `[0, 1)`.
    pub fn circle_point(&self) -> Rational {
        if self.a == self.q {
            Rational::zero()
        } else {
            self.to_rational()
        }
    }
}

impl Ord for FareyFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.a as u128 * other.q as u128).cmp(&(other.a as u128 * self.q as u128))
    }
}

impl PartialOrd for FareyFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FareyFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.a, self.q)
    }
}

/// Ascending iterator over the Farey fractions `1/Q, …, 1/1`, driven by the
/// next-neighbour recurrence.
#[derive(Debug, Clone)]
pub struct FareyIter {
    q_max: u64,
    prev: (u64, u64),
    next: Option<(u64, u64)>,
}

impl FareyIter {
    pub fn new(q_max: u64) -> Result<Self> {
        if q_max == 0 {
            return Err(Error::param("Farey order Q must be >= 1"));
        }
        Ok(Self { q_max, prev: (0, 1), next: Some((1, q_max)) })
    }
}

impl Iterator for FareyIter {
    type Item = FareyFraction;

    fn next(&mut self) -> Option<FareyFraction> {
        let (c, d) = self.next?;
        let (a, b) = self.prev;
        self.next = if c == d {
            None
        } else {
            let k = (self.q_max + b) / d;
            Some((k * c - a, k * d - b))
        };
        self.prev = (c, d);
        Some(FareyFraction { a: c, q: d })
    }
}

/// All reduced `a/q` with `q ≤ Q` and `1 ≤ a ≤ q`, in ascending order.
pub fn farey_fractions(q_max: u64) -> Result<Vec<FareyFraction>> {
    Ok(FareyIter::new(q_max)?.collect())
}

/// `Σ_{q ≤ Q} φ(q)`, the number of Farey fractions of order `Q`.
pub fn farey_count(q_max: u64) -> u64 {
    let n = q_max as usize;
    let mut phi: Vec<u64> = (0..=n as u64).collect();
    for p in 2..=n {
        if phi[p] == p as u64 {
            for m in (p..=n).step_by(p) {
                phi[m] -= phi[m] / p as u64;
            }
        }
    }
    phi.iter().skip(1).sum()
}

/// Distance from `x` to the nearest integer.
pub fn circle_distance(x: &Rational, y: &Rational) -> Rational {
    let d = x - y;
    let frac = &d - d.floor();
    let other = Rational::one() - &frac;
    if frac <= other {
        frac
    } else {
        other
    }
}

/// Exact binary expansion of a finite float.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::param(format!("{x} is not finite")))
}

/// `R(u)`: the number of Farey fractions of order `Q` within circle distance
/// `A/Q²` of `u` (closed neighbourhoods).
pub fn count_r(u: &Rational, q_max: u64, a_param: &Rational) -> Result<u64> {
    if q_max == 0 {
        return Err(Error::param("Farey order Q must be >= 1"));
    }
    if !a_param.is_positive() {
        return Err(Error::param("A must be positive"));
    }
    let q2 = BigInt::from(q_max) * BigInt::from(q_max);
    // 2A/Q² ≥ 1: every point of the circle is within A/Q² of every fraction.
    if a_param.numer() * 2 >= a_param.denom() * &q2 {
        return Ok(farey_count(q_max));
    }
    // u ± A/Q² over a common denominator: (u·Ad·Q² ∓ An·us) / (us·Ad·Q²).
    let u = u - u.floor();
    let base = u.numer() * a_param.denom() * &q2;
    let shift = a_param.numer() * u.denom();
    let den = u.denom() * a_param.denom() * &q2;
    let lo_num = &base - &shift;
    let hi_num = &base + &shift;

    let mut count = 0;
    for q in 1..=q_max {
        let bq = BigInt::from(q);
        // ceil(q·lo) = -floor(-q·lo)
        let lo = -(-(&lo_num * &bq)).div_floor(&den);
        let hi = (&hi_num * &bq).div_floor(&den);
        let (Some(lo), Some(hi)) = (lo.to_i64(), hi.to_i64()) else {
            return Err(Error::param("covering window out of range"));
        };
        // The window is shorter than one period, so residues are distinct.
        for a in lo..=hi {
            if (a.rem_euclid(q as i64) as u64).gcd(&q) == 1 {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Convenience wrapper of [`count_r`] for float inputs, taken at their exact
/// binary values.
pub fn count_r_f64(u: f64, q_max: u64, a_param: f64) -> Result<u64> {
    count_r(&rational_from_f64(u)?, q_max, &rational_from_f64(a_param)?)
}

/// Half-open interval `[lo, hi)` with `0 ≤ lo < hi ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Sorted, pairwise disjoint, nonempty half-open subintervals of `[0, 1)`,
/// read as a subset of the circle.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IntervalUnion {
    intervals: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self { intervals: vec![Interval { lo: Rational::zero(), hi: Rational::one() }] }
    }

    /// Union of arbitrary arcs `[lo, hi)` on the circle. Arcs may start
    /// anywhere on the real line and wrap; an arc of length ≥ 1 is the full
    /// circle, and empty arcs are dropped.
    pub fn from_arcs<I>(arcs: I) -> Self
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let one = Rational::one();
        let mut pieces = Vec::new();
        for (lo, hi) in arcs {
            if hi <= lo {
                continue;
            }
            if &hi - &lo >= one {
                return Self::full();
            }
            let shift = lo.floor();
            let lo = lo - &shift;
            let hi = hi - &shift;
            if hi > one {
                pieces.push(Interval { lo, hi: one.clone() });
                pieces.push(Interval { lo: Rational::zero(), hi: hi - &one });
            } else {
                pieces.push(Interval { lo, hi });
            }
        }
        pieces.sort_by(|x, y| x.lo.cmp(&y.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        Self { intervals: merged }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Rational {
        self.intervals.iter().fold(Rational::zero(), |acc, iv| acc + iv.length())
    }

    /// Complement within `[0, 1)`.
    pub fn complement(&self) -> Self {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = Rational::zero();
        for iv in &self.intervals {
            if iv.lo > cursor {
                out.push(Interval { lo: cursor, hi: iv.lo.clone() });
            }
            cursor = iv.hi.clone();
        }
        if cursor < Rational::one() {
            out.push(Interval { lo: cursor, hi: Rational::one() });
        }
        Self { intervals: out }
    }

    fn locate(&self, u: &Rational) -> Option<&Interval> {
        let u = u - u.floor();
        let idx = self.intervals.partition_point(|iv| iv.lo <= u);
        idx.checked_sub(1).map(|i| &self.intervals[i]).filter(|iv| u < iv.hi)
    }

    /// Membership in the half-open sense, `u` taken mod 1.
    pub fn contains(&self, u: &Rational) -> bool {
        self.locate(u).is_some()
    }

    /// Membership in the interior: left endpoints excluded.
    pub fn interior_contains(&self, u: &Rational) -> bool {
        let r = u - u.floor();
        self.locate(u).is_some_and(|iv| r > iv.lo)
    }
}

/// Exact sum of interval lengths.
pub fn measure(s: &IntervalUnion) -> Rational {
    s.measure()
}

/// `m(Q, A)`: the points of the circle lying in none of the closed arcs
/// `[a/q − A/Q², a/q + A/Q²]`.
///
/// The true set is open; it is returned as half-open intervals whose left
/// endpoints lie on arc boundaries. Use [`IntervalUnion::interior_contains`]
/// for exact membership. Measures are unaffected.
pub fn uncovered_set(q_max: u64, a_param: &Rational) -> Result<IntervalUnion> {
    if q_max == 0 {
        return Err(Error::param("Farey order Q must be >= 1"));
    }
    if !a_param.is_positive() {
        return Err(Error::param("A must be positive"));
    }
    let q2 = BigInt::from(q_max) * BigInt::from(q_max);
    let radius = a_param / Rational::from_integer(q2.clone());
    // Consecutive centres a/q < c/d (starting from 0/1) are 1/(qd) apart; the
    // gap between their arcs is nonempty iff 1/(qd) > 2A/Q².
    let lhs = a_param.denom() * &q2;
    let two_an = a_param.numer() * 2;
    let mut intervals = Vec::new();
    let mut prev = (0u64, 1u64);
    for f in FareyIter::new(q_max)? {
        let (a, q) = prev;
        let (c, d) = (f.a, f.q);
        if lhs > &two_an * BigInt::from(q) * BigInt::from(d) {
            let lo = Rational::new(BigInt::from(a), BigInt::from(q)) + &radius;
            let hi = Rational::new(BigInt::from(c), BigInt::from(d)) - &radius;
            intervals.push(Interval { lo, hi });
        }
        prev = (c, d);
    }
    Ok(IntervalUnion { intervals })
}

/// A Farey fraction `a/q` of order `Q` with circle distance at most `1/(qQ)`
/// from `u`: the last continued-fraction convergent of `u mod 1` whose
/// denominator does not exceed `Q`.
pub fn best_approximation_rational(u: &Rational, q_max: u64) -> Result<FareyFraction> {
    if q_max == 0 {
        return Err(Error::param("Farey order Q must be >= 1"));
    }
    let limit = BigInt::from(q_max);
    let mut x = u - u.floor();
    // (h₋₂, h₋₁) = (0, 1), (k₋₂, k₋₁) = (1, 0)
    let (mut h2, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k2, mut k1) = (BigInt::one(), BigInt::zero());
    let mut best = (BigInt::zero(), BigInt::one());
    loop {
        let digit = x.floor().to_integer();
        let h = &digit * &h1 + &h2;
        let k = &digit * &k1 + &k2;
        if k > limit {
            break;
        }
        best = (h.clone(), k.clone());
        let frac = &x - x.floor();
        if frac.is_zero() {
            break;
        }
        x = frac.recip();
        (h2, h1) = (h1, h);
        (k2, k1) = (k1, k);
    }
    let q = best.1.to_u64().expect("denominator bounded by Q");
    let a = best.0.mod_floor(&best.1).to_u64().expect("numerator bounded by Q");
    FareyFraction::new(if a == 0 { q } else { a }, q)
}

pub fn best_approximation(u: f64, q_max: u64) -> Result<FareyFraction> {
    best_approximation_rational(&rational_from_f64(u)?, q_max)
}
