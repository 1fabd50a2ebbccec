//! Numerically safe combinatorial building blocks.
//!
//! Finite-length probability work in this crate never manipulates linear
//! probabilities directly: everything is carried as a [`LogReal`], a
//! nonnegative magnitude stored as its natural log with a distinguished exact
//! zero. Cumulative enumerator sums mix terms spanning hundreds of orders of
//! magnitude at block lengths in the thousands, which rules out linear-domain
//! accumulation.
//!
//! Binomial coefficients come in two flavours: exact big-integer values for
//! the brute-force oracles, and log-domain values (exact integer arithmetic up
//! to `n = 64`, log-gamma beyond) for everything else.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::real::Real;

/// Inputs within this distance outside `[0, 1]` are clamped by the entropy
/// function; boundary expressions like `(rho - beta/2) / (1 - beta)` can round
/// epsilon-negative.
pub const ENTROPY_CLAMP: f64 = 1e-12;

// ---------------------------------------------------------------------------
// LogReal
// ---------------------------------------------------------------------------

/// A nonnegative real carried as the natural log of its magnitude.
///
/// `F::neg_infinity()` represents exact zero. Multiplication and division map
/// to addition and subtraction of logs; addition is a stable two-term
/// log-sum-exp. Long sums should go through [`LogSum`], which shifts by the
/// running maximum and compensates the linear accumulator.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogReal<F>(F);

impl<F: Real> LogReal<F> {
    pub fn zero() -> Self {
        LogReal(F::neg_infinity())
    }

    pub fn one() -> Self {
        LogReal(F::zero())
    }

    /// Wraps a natural-log magnitude.
    pub fn from_ln(ln: F) -> Self {
        debug_assert!(!ln.is_nan());
        LogReal(ln)
    }

    /// Converts a nonnegative linear value.
    pub fn from_value(value: F) -> Self {
        assert!(
            value >= F::zero(),
            "LogReal represents nonnegative magnitudes"
        );
        if value.is_zero() {
            Self::zero()
        } else {
            LogReal(value.ln())
        }
    }

    /// Natural log of the magnitude (`-inf` for exact zero).
    pub fn ln(self) -> F {
        self.0
    }

    /// Linear value; may overflow to `+inf` for very large magnitudes.
    pub fn value(self) -> F {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == F::neg_infinity()
    }

    /// Relative distance `|a/b - 1|`, with zeros compared exactly.
    pub fn rel_diff(self, other: Self) -> F {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => F::zero(),
            (true, false) | (false, true) => F::infinity(),
            _ => ((self.0 - other.0).exp() - F::one()).abs(),
        }
    }
}

impl<F: Real> Mul for LogReal<F> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            Self::zero()
        } else {
            LogReal(self.0 + rhs.0)
        }
    }
}

impl<F: Real> MulAssign for LogReal<F> {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl<F: Real> Div for LogReal<F> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        debug_assert!(!rhs.is_zero(), "division of LogReal by exact zero");
        if self.is_zero() {
            Self::zero()
        } else {
            LogReal(self.0 - rhs.0)
        }
    }
}

impl<F: Real> Add for LogReal<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (lo, hi) = if self.0 <= rhs.0 {
            (self.0, rhs.0)
        } else {
            (rhs.0, self.0)
        };
        LogReal(hi + (lo - hi).exp().ln_1p())
    }
}

impl<F: Real> AddAssign for LogReal<F> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<F: Real> Sum for LogReal<F> {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        let mut acc = LogSum::new();
        for term in iter {
            acc.push(term);
        }
        acc.total()
    }
}

/// Max-shifted, compensated accumulator for sums of [`LogReal`] terms.
///
/// Keeps `total = exp(shift) * (acc + comp)` where `shift` is the running
/// maximum log term and `acc` is Kahan-compensated.
#[derive(Clone, Copy, Debug)]
pub struct LogSum<F> {
    shift: F,
    acc: F,
    comp: F,
}

impl<F: Real> LogSum<F> {
    pub fn new() -> Self {
        LogSum {
            shift: F::neg_infinity(),
            acc: F::zero(),
            comp: F::zero(),
        }
    }

    pub fn push(&mut self, term: LogReal<F>) {
        if term.is_zero() {
            return;
        }
        if term.0 > self.shift {
            let rescale = (self.shift - term.0).exp(); // 0 when acc is empty
            self.acc = self.acc * rescale;
            self.comp = self.comp * rescale;
            self.shift = term.0;
            self.add_scaled(F::one());
        } else {
            self.add_scaled((term.0 - self.shift).exp());
        }
    }

    fn add_scaled(&mut self, x: F) {
        let y = x - self.comp;
        let t = self.acc + y;
        self.comp = (t - self.acc) - y;
        self.acc = t;
    }

    pub fn total(&self) -> LogReal<F> {
        let linear = self.acc - self.comp;
        if self.shift == F::neg_infinity() || linear <= F::zero() {
            LogReal::zero()
        } else {
            LogReal(self.shift + linear.ln())
        }
    }
}

impl<F: Real> Default for LogSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Binomial coefficients
// ---------------------------------------------------------------------------

/// Log-domain binomial coefficient `C(n, k)`.
///
/// Out-of-range `k` is an exact zero count, not an error. Exact integer
/// arithmetic up to `n = 64`, log-gamma beyond.
pub fn log_binomial<F: Real>(n: u64, k: i64) -> LogReal<F> {
    if k < 0 || k as u64 > n {
        return LogReal::zero();
    }
    let k = k as u64;
    if n <= 64 {
        let mut c: u128 = 1;
        let kk = k.min(n - k);
        for i in 0..kk {
            c = c * u128::from(n - i) / u128::from(i + 1);
        }
        LogReal::from_ln(F::of(c as f64).ln())
    } else {
        let ln = F::of((n + 1) as f64).ln_gamma()
            - F::of((k + 1) as f64).ln_gamma()
            - F::of((n - k + 1) as f64).ln_gamma();
        LogReal::from_ln(ln)
    }
}

/// Exact big-integer binomial coefficient; zero when `k` is out of range.
pub fn exact_binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

/// Shared table of `ln n!` values so hot loops avoid repeated log-gamma calls.
pub struct LnBinomialTable<F> {
    ln_fact: Vec<F>,
}

impl<F: Real> LnBinomialTable<F> {
    pub fn new(max_n: usize) -> Self {
        let ln_fact = (0..=max_n)
            .map(|i| F::of((i + 1) as f64).ln_gamma())
            .collect();
        LnBinomialTable { ln_fact }
    }

    pub fn max_n(&self) -> usize {
        self.ln_fact.len() - 1
    }

    #[inline]
    pub fn ln_binomial(&self, n: usize, k: i64) -> LogReal<F> {
        if k < 0 || k as usize > n {
            return LogReal::zero();
        }
        let k = k as usize;
        debug_assert!(n <= self.max_n());
        LogReal::from_ln(self.ln_fact[n] - self.ln_fact[k] - self.ln_fact[n - k])
    }
}

// ---------------------------------------------------------------------------
// Entropy and correction factors
// ---------------------------------------------------------------------------

/// Natural-log binary entropy `H(x) = -x ln x - (1-x) ln(1-x)`, with the
/// continuous extension `H(0) = H(1) = 0`.
pub fn binary_entropy_nats<F: Real>(x: F) -> Result<F> {
    let eps = F::of(ENTROPY_CLAMP);
    if x < -eps || x > F::one() + eps {
        return Err(Error::Domain(format!(
            "binary entropy input {x} outside [0, 1]"
        )));
    }
    Ok(entropy_clamped(x))
}

/// Entropy with silent clamping into `[0, 1]`; callers validate ranges first.
#[inline]
pub(crate) fn entropy_clamped<F: Real>(x: F) -> F {
    let x = x.max(F::zero()).min(F::one());
    if x.is_zero() || x == F::one() {
        return F::zero();
    }
    let y = F::one() - x;
    -x * x.ln() - y * y.ln()
}

/// Stirling-type correction factor `phi_lambda(l) = exp(l(l-1) / (2 lambda))`
/// from the product bound `N^l > N (N-1) ... (N-l+1) >= N^l / phi_N(l)`.
pub fn stirling_phi<F: Real>(lambda: F, ell: u64) -> F {
    debug_assert!(lambda > F::zero());
    let l = F::of(ell as f64);
    (l * (l - F::one()) / (F::of(2.0) * lambda)).exp()
}

/// Log-domain hypergeometric probability
/// `C(d, d_keep) C(n - d, n_keep - d_keep) / C(n, n_keep)`:
/// the chance that a uniformly random size-`n_keep` subset of `n` positions
/// picks up exactly `d_keep` of the `d` marked ones. Combinatorially
/// impossible configurations yield exact zero.
pub fn log_hypergeometric<F: Real>(n: u64, n_keep: u64, d: u64, d_keep: i64) -> LogReal<F> {
    assert!(d <= n, "marked count d={d} exceeds population n={n}");
    assert!(n_keep <= n, "subset size n_keep={n_keep} exceeds population n={n}");
    let kept_marked = log_binomial::<F>(d, d_keep);
    if kept_marked.is_zero() {
        return LogReal::zero();
    }
    let kept_rest = log_binomial::<F>(n - d, n_keep as i64 - d_keep);
    if kept_rest.is_zero() {
        return LogReal::zero();
    }
    kept_marked * kept_rest / log_binomial::<F>(n, n_keep as i64)
}
