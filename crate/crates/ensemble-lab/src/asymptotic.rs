//! Asymptotic spectral-shape exponents and minimum-distance growth rates.
//!
//! As the block length grows, the ensemble-average enumerator at weights
//! proportional to the block length behaves like `exp(f * N)`, where `f` is a
//! function of the normalized weights. The minimum-distance growth rate
//! coefficient is the zero crossing, in the normalized output weight, of the
//! maximum of `f` over all interior weight configurations.
//!
//! The maximization collapses to one dimension: stationarity in the input
//! fraction and in each intermediate fraction yields a closed-form recursion
//! ([`beta_chain`]) that maps the input fraction `alpha` to the whole weight
//! vector, including the stationary output fraction `rho(alpha)`. Solving
//! `rho(alpha) = rho` along that curve and taking the best branch gives the
//! interior maximum at a prescribed `rho`. Below the smallest `rho` the curve
//! attains (`rho0`) no stationary point exists and negativity is certified by
//! dense grid and boundary sampling instead.
//!
//! Random puncturing adds the hypergeometric exponent `phi`; stationarity in
//! the pre-puncturing fraction then pins the punctured fraction in closed
//! form, so the same one-dimensional sweep applies with the punctured
//! fraction as the curve target.

use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::entropy_clamped as h;
use crate::error::{Error, Result};
use crate::real::Real;

/// Slack allowed when checking region membership; boundary arithmetic can
/// round a hair outside.
const REGION_TOL: f64 = 1e-9;

/// Width of the final bisection bracket on the growth-rate coefficient.
pub const RHO_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Weights as fractions of the mother block length: the input fraction
/// `alpha`, the intermediate stage fractions, and the final output fraction
/// `rho` (plus the punctured fraction and kept ratio when puncturing).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedWeights<F> {
    pub alpha: F,
    /// Intermediate stage output fractions (empty for a single accumulator).
    pub betas: Vec<F>,
    pub rho: F,
    pub puncture: Option<PunctureVars<F>>,
}

/// Punctured-ensemble variables: `rho_prime` is the output weight per kept
/// symbol, `eta` the kept fraction of the mother block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PunctureVars<F> {
    pub rho_prime: F,
    pub eta: F,
}

/// Random puncturing request for the solver: keep an `eta` fraction of the
/// mother block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomPuncture<F> {
    pub eta: F,
}

impl<F: Real> RandomPuncture<F> {
    pub fn new(eta: F) -> Result<Self> {
        if eta <= F::zero() || eta > F::one() {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("kept fraction must lie in (0, 1], got {eta}"),
            });
        }
        Ok(RandomPuncture { eta })
    }

    /// Kept fraction from mother rate and punctured rate.
    pub fn from_rates(rate: F, rate_punctured: F) -> Result<Self> {
        if rate_punctured < rate {
            return Err(Error::InvalidParameter {
                name: "rate_punctured",
                reason: format!("punctured rate {rate_punctured} below mother rate {rate}"),
            });
        }
        Self::new(rate / rate_punctured)
    }
}

/// Output of [`growth_rate`]: the zero crossing plus solver diagnostics.
#[derive(Clone, Debug)]
pub struct GrowthRateResult<F> {
    /// Lower bound on the asymptotic minimum-distance growth rate
    /// coefficient (normalized to the kept length when punctured).
    pub rho_min_hat: F,
    /// Smallest output fraction for which the stationary system has a
    /// solution.
    pub rho0: F,
    /// Maximizing weight configuration at the crossing.
    pub arg_max: NormalizedWeights<F>,
    /// Final bisection interval around `rho_min_hat`.
    pub bracket: (F, F),
    /// Number of exponent evaluations spent.
    pub evaluations: u64,
    /// Whether the ensemble family carries a proven linear-growth bound
    /// (two stages need repetition >= 3; one stage never qualifies).
    pub proven: bool,
}

/// Result of maximizing the exponent at a fixed output fraction.
#[derive(Clone, Debug)]
pub enum MaxExponent<F> {
    /// An interior stationary maximum was found along the chain sweep and
    /// verified to dominate a coarse sample of the region.
    Stationary {
        value: F,
        arg_max: NormalizedWeights<F>,
    },
    /// The region was sampled densely instead: either no stationary point
    /// exists at this target (below `rho0`), or the chain parametrization
    /// could not resolve the dominant one (which happens for three or more
    /// stages as the target approaches 1/2, where the stationary curve
    /// flattens beyond floating-point resolution).
    Sampled {
        grid_max: F,
        grid_arg: NormalizedWeights<F>,
        certified_negative: bool,
    },
}

impl<F: Real> MaxExponent<F> {
    pub fn value(&self) -> F {
        match self {
            MaxExponent::Stationary { value, .. } => *value,
            MaxExponent::Sampled { grid_max, .. } => *grid_max,
        }
    }

    pub fn arg(&self) -> &NormalizedWeights<F> {
        match self {
            MaxExponent::Stationary { arg_max, .. } => arg_max,
            MaxExponent::Sampled { grid_arg, .. } => grid_arg,
        }
    }

    pub fn is_stationary(&self) -> bool {
        matches!(self, MaxExponent::Stationary { .. })
    }
}

// ---------------------------------------------------------------------------
// Exponents
// ---------------------------------------------------------------------------

/// Exponent contributed by one accumulator stage that turns an input
/// fraction `input` into an output fraction `output`:
///
/// `(1 - b) H((r - b/2)/(1 - b)) + b ln 2 - H(r)`
///
/// Strictly negative for `output < 1/2` and `0 < input <= 2 output`;
/// identically zero at `output = 1/2`. This is also the exponent profile on
/// the `alpha = 0` edge of the two-stage region.
pub fn acc_transition_exponent<F: Real>(input: F, output: F) -> Result<F> {
    let tol = F::of(REGION_TOL);
    if input < -tol
        || output < -tol
        || input > F::of(2.0) * output + tol
        || output > F::one() - input / F::of(2.0) + tol
    {
        return Err(Error::Domain(format!(
            "transition fractions ({input}, {output}) outside the reachable cone"
        )));
    }
    Ok(stage_exponent(input, output))
}

#[inline]
fn stage_exponent<F: Real>(b_prev: F, b: F) -> F {
    let rem = F::one() - b_prev;
    let spread = if rem > F::zero() {
        rem * h((b - b_prev / F::of(2.0)) / rem)
    } else {
        F::zero()
    };
    spread + b_prev * F::LN_2() - h(b)
}

fn check_weight_chain<F: Real>(weights: &[F]) -> Result<()> {
    let tol = F::of(REGION_TOL);
    for w in weights {
        if *w < -tol || *w > F::one() + tol {
            return Err(Error::Domain(format!("weight fraction {w} outside [0, 1]")));
        }
    }
    for pair in weights.windows(2) {
        let (prev, next) = (pair[0], pair[1]);
        if next < prev / F::of(2.0) - tol || next > F::one() - prev / F::of(2.0) + tol {
            return Err(Error::Domain(format!(
                "stage fractions ({prev}, {next}) violate the reachability cone"
            )));
        }
    }
    Ok(())
}

/// Two-stage spectral-shape exponent, written out directly:
///
/// `H(a)/q - H(b) - H(r) + (1-a) H((b-a/2)/(1-a)) + a ln2
///  + (1-b) H((r-b/2)/(1-b)) + b ln2`
pub fn exponent_raa<F: Real>(alpha: F, beta: F, rho: F, q: u32) -> Result<F> {
    check_weight_chain(&[alpha, beta, rho])?;
    let one = F::one();
    let two = F::of(2.0);
    let first = if alpha < one {
        (one - alpha) * h((beta - alpha / two) / (one - alpha))
    } else {
        F::zero()
    };
    let second = if beta < one {
        (one - beta) * h((rho - beta / two) / (one - beta))
    } else {
        F::zero()
    };
    Ok(h(alpha) / F::of(f64::from(q)) - h(beta) - h(rho)
        + first
        + alpha * F::LN_2()
        + second
        + beta * F::LN_2())
}

/// General spectral-shape exponent for `m` accumulator stages:
/// `H(alpha)/q` plus one [`stage_exponent`] per stage, with the stage chain
/// `alpha -> betas[0] -> ... -> rho`.
pub fn exponent_rma<F: Real>(gamma: &NormalizedWeights<F>, q: u32, m: u32) -> Result<F> {
    if gamma.betas.len() != (m as usize) - 1 {
        return Err(Error::DimensionMismatch {
            expected: m as usize - 1,
            got: gamma.betas.len(),
        });
    }
    let mut weights = Vec::with_capacity(m as usize + 1);
    weights.push(gamma.alpha);
    weights.extend_from_slice(&gamma.betas);
    weights.push(gamma.rho);
    check_weight_chain(&weights)?;
    let mut value = h(gamma.alpha) / F::of(f64::from(q));
    for pair in weights.windows(2) {
        value += stage_exponent(pair[0], pair[1]);
    }
    Ok(value)
}

/// Exponent of the hypergeometric puncturing kernel at kept fraction `eta`,
/// pre-puncturing fraction `rho`, and post-puncturing fraction `rho_prime`:
///
/// `H(eta rho'/rho) rho + H(eta (1-rho')/(1-rho)) (1-rho) - H(eta)`
///
/// Never positive; zero exactly when the punctured weight is the typical one.
pub fn puncture_exponent<F: Real>(rho: F, rho_prime: F, eta: F) -> Result<F> {
    let tol = F::of(REGION_TOL);
    if eta <= F::zero() || eta > F::one() + tol {
        return Err(Error::Domain(format!("kept fraction {eta} outside (0, 1]")));
    }
    if rho <= F::zero() || rho >= F::one() {
        return Err(Error::Domain(format!(
            "pre-puncturing fraction {rho} outside (0, 1)"
        )));
    }
    let kept_ones = eta * rho_prime;
    let kept_zeros = eta * (F::one() - rho_prime);
    if kept_ones < -tol
        || kept_ones > rho + tol
        || kept_zeros < -tol
        || kept_zeros > F::one() - rho + tol
    {
        return Err(Error::Domain(format!(
            "punctured fraction {rho_prime} infeasible for rho={rho}, eta={eta}"
        )));
    }
    Ok(h(kept_ones / rho) * rho + h(kept_zeros / (F::one() - rho)) * (F::one() - rho) - h(eta))
}

// ---------------------------------------------------------------------------
// Stationary-point chain
// ---------------------------------------------------------------------------

/// Stationary weight fractions generated from the free input fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainPoint<F> {
    /// Intermediate fractions (empty when there is a single stage).
    pub betas: Vec<F>,
    /// Stationary output fraction.
    pub rho: F,
}

/// Closed-form stationary chain: from `alpha`, the stationarity conditions
/// determine every later fraction recursively,
///
/// `b1 = 1/2 - (1-a)/2 sqrt(1 - (a/(1-a))^(2/q))`
/// `b_{l+1} = 1/2 - (1-b_l)/2 sqrt(1 - ((1-b_l)/b_l * (b_l-b_{l-1}/2)/(1-b_l-b_{l-1}/2))^2)`
///
/// and the last entry is the stationary output fraction. Returns `None` when
/// a square-root argument goes negative, i.e. no stationary point exists for
/// this `alpha`.
pub fn beta_chain<F: Real>(alpha: F, q: u32, m: u32) -> Option<ChainPoint<F>> {
    let one = F::one();
    let half = F::of(0.5);
    if !(alpha > F::zero() && alpha <= half) {
        return None;
    }
    let ratio = (alpha / (one - alpha)).powf(F::of(2.0) / F::of(f64::from(q)));
    let arg = one - ratio;
    if arg < F::zero() {
        return None;
    }
    let mut fractions = Vec::with_capacity(m as usize);
    let mut b_prev = alpha;
    let mut b = half - (one - alpha) * half * arg.sqrt();
    fractions.push(b);
    for _ in 1..m {
        if b <= F::zero() {
            return None;
        }
        let denom = one - b - b_prev * half;
        if denom <= F::zero() {
            return None;
        }
        let r = (one - b) / b * (b - b_prev * half) / denom;
        let arg = one - r * r;
        if arg < F::of(-1e-14) {
            return None;
        }
        let next = half - (one - b) * half * arg.max(F::zero()).sqrt();
        fractions.push(next);
        b_prev = b;
        b = next;
    }
    let rho = fractions.pop().expect("m >= 1");
    Some(ChainPoint {
        betas: fractions,
        rho,
    })
}

/// All partial derivatives of the exponent with respect to `alpha` and the
/// intermediate fractions, at an interior point. Chain outputs drive every
/// entry to zero.
pub fn stationarity_residual<F: Real>(
    gamma: &NormalizedWeights<F>,
    q: u32,
    m: u32,
) -> Result<Vec<F>> {
    if gamma.betas.len() != (m as usize) - 1 {
        return Err(Error::DimensionMismatch {
            expected: m as usize - 1,
            got: gamma.betas.len(),
        });
    }
    let one = F::one();
    let two = F::of(2.0);
    let mut weights = Vec::with_capacity(m as usize + 1);
    weights.push(gamma.alpha);
    weights.extend_from_slice(&gamma.betas);
    weights.push(gamma.rho);
    check_weight_chain(&weights)?;

    let x = |i: usize| -> F {
        // Stage argument (b_i - b_{i-1}/2) / (1 - b_{i-1}).
        (weights[i] - weights[i - 1] / two) / (one - weights[i - 1])
    };

    let mut residuals = Vec::with_capacity(m as usize);
    let alpha = gamma.alpha;
    let x1 = x(1);
    residuals.push(
        -(alpha / (one - alpha)).ln() / F::of(f64::from(q))
            + (x1 * (one - x1)).ln() / two
            + F::LN_2(),
    );
    for l in 1..m as usize {
        let b = weights[l];
        let xl = x(l);
        let xn = x(l + 1);
        residuals.push(
            (b / (one - b)).ln() - (xl / (one - xl)).ln()
                + (xn * (one - xn)).ln() / two
                + F::LN_2(),
        );
    }
    Ok(residuals)
}

/// Second derivative of the exponent along a constant-`beta` line in the
/// two-stage problem, at `(alpha, beta)`:
///
/// `-1/(q a (1-a)) + (1-2x)(2b-1) / (4 x (1-x) (1-a)^2)`,  `x = (b-a/2)/(1-a)`.
///
/// Negative at every stationary pair, which is what certifies those points as
/// maxima. At `beta = 1/2` the curvature is exactly `-1/(q a (1-a))`.
pub fn concavity_check<F: Real>(alpha0: F, beta: F, q: u32) -> F {
    let one = F::one();
    let two = F::of(2.0);
    let x = (beta - alpha0 / two) / (one - alpha0);
    let first = -(F::of(f64::from(q)) * alpha0 * (one - alpha0)).recip();
    if (two * beta - one).abs() < F::of(1e-300) {
        return first;
    }
    first
        + (one - two * x) * (two * beta - one)
            / (F::of(4.0) * x * (one - x) * (one - alpha0) * (one - alpha0))
}

// ---------------------------------------------------------------------------
// One-dimensional sweep machinery
// ---------------------------------------------------------------------------

/// One point of the stationary curve swept by `alpha`.
struct CurvePoint<F> {
    /// The coordinate the growth-rate search runs over: the stationary
    /// output fraction, or the punctured fraction when puncturing.
    target: F,
    chain: ChainPoint<F>,
    rho_prime: Option<F>,
}

fn curve_point<F: Real>(
    alpha: F,
    q: u32,
    m: u32,
    puncture: Option<&RandomPuncture<F>>,
) -> Option<CurvePoint<F>> {
    let chain = beta_chain(alpha, q, m)?;
    match puncture {
        None => Some(CurvePoint {
            target: chain.rho,
            chain,
            rho_prime: None,
        }),
        Some(p) => {
            let one = F::one();
            let two = F::of(2.0);
            let eta = p.eta;
            let rho = chain.rho;
            let b = *chain.betas.last().unwrap_or(&alpha);
            let num = (one - rho) * (one - rho) * (rho - b / two);
            let den = rho * rho * (one - rho - b / two);
            if den <= F::zero() || rho <= F::zero() {
                return None;
            }
            let c = num / den;
            // Stationarity in rho pins the punctured weight per mother
            // symbol; dividing by eta normalizes to the kept length.
            let s = (rho * (c + one) + eta - one) / (one + c);
            if s < F::zero() || s > eta {
                return None;
            }
            let rho_prime = s / eta;
            Some(CurvePoint {
                target: rho_prime,
                chain,
                rho_prime: Some(rho_prime),
            })
        }
    }
}

fn weights_at<F: Real>(
    alpha: F,
    point: &CurvePoint<F>,
    puncture: Option<&RandomPuncture<F>>,
) -> NormalizedWeights<F> {
    NormalizedWeights {
        alpha,
        betas: point.chain.betas.clone(),
        rho: point.chain.rho,
        puncture: puncture.map(|p| PunctureVars {
            rho_prime: point.rho_prime.expect("punctured curve point"),
            eta: p.eta,
        }),
    }
}

fn exponent_at<F: Real>(
    gamma: &NormalizedWeights<F>,
    q: u32,
    m: u32,
) -> Result<F> {
    let mut value = exponent_rma(gamma, q, m)?;
    if let Some(p) = &gamma.puncture {
        value += puncture_exponent(gamma.rho, p.rho_prime, p.eta)?;
    }
    Ok(value)
}

/// Log-spaced low end plus linear high end; the stationary curve moves fast
/// near zero and slowly above 0.05.
fn alpha_grid<F: Real>() -> Vec<F> {
    const LOG_POINTS: usize = 3072;
    const LIN_POINTS: usize = 3072;
    let mut grid = Vec::with_capacity(LOG_POINTS + LIN_POINTS);
    let (lo, split) = (1e-9f64, 0.05f64);
    for i in 0..LOG_POINTS {
        let t = i as f64 / (LOG_POINTS - 1) as f64;
        grid.push(F::of(lo * (split / lo).powf(t)));
    }
    for i in 1..=LIN_POINTS {
        let t = i as f64 / LIN_POINTS as f64;
        grid.push(F::of(split + (0.5 - split) * t));
    }
    grid
}

/// Refines a sign change of `target(alpha) - rho` inside `[lo, hi]`.
fn refine_root<F: Real>(
    mut lo: F,
    mut hi: F,
    mut g_lo: F,
    rho: F,
    q: u32,
    m: u32,
    puncture: Option<&RandomPuncture<F>>,
) -> Option<F> {
    for _ in 0..90 {
        if hi - lo <= F::of(1e-13) * hi.max(F::one()) {
            break;
        }
        let mid = (lo + hi) / F::of(2.0);
        match curve_point(mid, q, m, puncture) {
            Some(p) => {
                let g_mid = p.target - rho;
                if (g_mid <= F::zero()) == (g_lo <= F::zero()) {
                    lo = mid;
                    g_lo = g_mid;
                } else {
                    hi = mid;
                }
            }
            // Masked midpoint: shrink toward the defined low end.
            None => lo = mid,
        }
    }
    let root = (lo + hi) / F::of(2.0);
    let p = curve_point(root, q, m, puncture)?;
    ((p.target - rho).abs() < F::of(1e-5)).then_some(root)
}

/// Maximum of the spectral exponent over the interior of the feasible region
/// at a fixed target fraction: the best stationary branch when one exists,
/// otherwise a dense-sampling certificate that the exponent is negative.
pub fn max_exponent_at_rho<F: Real>(
    rho: F,
    q: u32,
    m: u32,
    puncture: Option<&RandomPuncture<F>>,
) -> MaxExponent<F> {
    max_exponent_counted(rho, q, m, puncture, &mut 0)
}

fn max_exponent_counted<F: Real>(
    rho: F,
    q: u32,
    m: u32,
    puncture: Option<&RandomPuncture<F>>,
    evaluations: &mut u64,
) -> MaxExponent<F> {
    let grid = alpha_grid::<F>();
    let curve: Vec<Option<F>> = grid
        .iter()
        .map(|&a| curve_point(a, q, m, puncture).map(|p| p.target))
        .collect();

    let mut best: Option<(F, NormalizedWeights<F>)> = None;
    for i in 0..grid.len() - 1 {
        let (Some(t0), Some(t1)) = (curve[i], curve[i + 1]) else {
            continue;
        };
        let g0 = t0 - rho;
        let g1 = t1 - rho;
        if g0 == F::zero() || (g0 < F::zero()) != (g1 <= F::zero()) {
            let Some(root) = refine_root(grid[i], grid[i + 1], g0, rho, q, m, puncture) else {
                continue;
            };
            let Some(point) = curve_point(root, q, m, puncture) else {
                continue;
            };
            let gamma = weights_at(root, &point, puncture);
            *evaluations += 1;
            let Ok(value) = exponent_at(&gamma, q, m) else {
                continue;
            };
            if best.as_ref().is_none_or(|(v, _)| value > *v) {
                best = Some((value, gamma));
            }
        }
    }

    if let Some((value, arg_max)) = best {
        // The stationary branch should dominate the region; a coarse sample
        // catches the cases where the sweep only resolved a saddle.
        let coarse = coarse_resolution(m, puncture);
        let (sample_max, _) = sample_max(rho, q, m, puncture, coarse, evaluations);
        if sample_max <= value + F::of(1e-9) {
            return MaxExponent::Stationary { value, arg_max };
        }
    }
    let (grid_max, grid_arg) = certify_by_sampling(rho, q, m, puncture, evaluations);
    MaxExponent::Sampled {
        grid_max,
        certified_negative: grid_max < F::zero(),
        grid_arg,
    }
}

fn coarse_resolution<F>(m: u32, puncture: Option<&RandomPuncture<F>>) -> usize {
    match m as usize + usize::from(puncture.is_some()) {
        1 => 256,
        2 => 48,
        3 => 32,
        4 => 16,
        5 => 10,
        _ => 8,
    }
}

/// Dense interior sampling (plus, for the two-stage unpunctured region, a
/// boundary scan) used when the chain sweep yields no usable stationary
/// point.
fn certify_by_sampling<F: Real>(
    rho: F,
    q: u32,
    m: u32,
    puncture: Option<&RandomPuncture<F>>,
    evaluations: &mut u64,
) -> (F, NormalizedWeights<F>) {
    // Free dimensions: alpha plus m-1 intermediate fractions, plus the
    // pre-puncturing fraction when puncturing.
    let dims = m as usize + usize::from(puncture.is_some());
    let res: usize = match dims {
        1 => 4096,
        2 => 256,
        3 => 64,
        4 => 28,
        5 => 16,
        _ => 10,
    };
    let (mut best, fallback_arg) = sample_max(rho, q, m, puncture, res, evaluations);
    let mut best_arg = fallback_arg;

    // The two-stage region has four explicit edges; fold their maxima in.
    if m == 2 && puncture.is_none() && rho <= F::of(0.5) {
        let scan = boundary_scan(rho, q, 10_000);
        for bm in &scan.maxima {
            if bm.value > best {
                best = bm.value;
                best_arg = NormalizedWeights {
                    alpha: bm.alpha,
                    betas: vec![bm.beta],
                    rho,
                    puncture: None,
                };
            }
        }
    }
    (best, best_arg)
}

/// Maximum of the exponent over an interior grid with `res` points per free
/// dimension.
fn sample_max<F: Real>(
    rho: F,
    q: u32,
    m: u32,
    puncture: Option<&RandomPuncture<F>>,
    res: usize,
    evaluations: &mut u64,
) -> (F, NormalizedWeights<F>) {

    let fallback = NormalizedWeights {
        alpha: F::of(0.0),
        betas: vec![F::zero(); m as usize - 1],
        rho,
        puncture: puncture.map(|p| PunctureVars {
            rho_prime: rho,
            eta: p.eta,
        }),
    };

    let samples: Vec<(Option<(F, NormalizedWeights<F>)>, u64)> = (1..=res)
        .into_par_iter()
        .map(|ia| {
            let alpha = F::of(ia as f64 / (res + 1) as f64); // interior fractions of (0, 1)
            let mut best: Option<(F, NormalizedWeights<F>)> = None;
            let mut stack = vec![alpha];
            let mut count = 0u64;
            sample_region(rho, q, m, puncture, res, &mut stack, &mut best, &mut count);
            (best, count)
        })
        .collect();

    let mut best = (F::neg_infinity(), fallback);
    for (sample, count) in samples {
        *evaluations += count;
        if let Some((v, g)) = sample {
            if v > best.0 {
                best = (v, g);
            }
        }
    }
    best
}

/// Depth-first interior grid over the remaining stage fractions.
#[allow(clippy::too_many_arguments)]
fn sample_region<F: Real>(
    rho: F,
    q: u32,
    m: u32,
    puncture: Option<&RandomPuncture<F>>,
    res: usize,
    prefix: &mut Vec<F>,
    best: &mut Option<(F, NormalizedWeights<F>)>,
    count: &mut u64,
) {
    let one = F::one();
    let two = F::of(2.0);
    let level = prefix.len(); // 1 = alpha chosen, m = all stage fractions chosen
    if level == m as usize {
        // For unpunctured ensembles the output fraction is the fixed target;
        // with puncturing it is a free interior variable.
        let prev = *prefix.last().unwrap();
        let rho_values: Vec<F> = match puncture {
            None => {
                if rho < prev / two || rho > one - prev / two {
                    return;
                }
                vec![rho]
            }
            Some(p) => {
                let lo = (prev / two).max(p.eta * rho);
                let hi = (one - prev / two).min(one - p.eta * (one - rho));
                if hi <= lo {
                    return;
                }
                (1..=res)
                    .map(|i| lo + (hi - lo) * F::of(i as f64 / (res + 1) as f64))
                    .collect()
            }
        };
        for r in rho_values {
            let gamma = NormalizedWeights {
                alpha: prefix[0],
                betas: prefix[1..].to_vec(),
                rho: r,
                puncture: puncture.map(|p| PunctureVars {
                    rho_prime: rho,
                    eta: p.eta,
                }),
            };
            *count += 1;
            if let Ok(v) = exponent_at(&gamma, q, m) {
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    *best = Some((v, gamma));
                }
            }
        }
        return;
    }
    let prev = *prefix.last().unwrap();
    let lo = prev / two;
    // Intermediate fractions stay inside the cone; the pre-output one must
    // also leave the target reachable in the unpunctured case.
    let mut hi = one - prev / two;
    if puncture.is_none() && level == m as usize - 1 {
        hi = hi.min(two * rho);
    }
    if hi <= lo {
        return;
    }
    for i in 1..=res {
        let b = lo + (hi - lo) * F::of(i as f64 / (res + 1) as f64);
        prefix.push(b);
        sample_region(rho, q, m, puncture, res, prefix, best, count);
        prefix.pop();
    }
}

// ---------------------------------------------------------------------------
// Growth rate
// ---------------------------------------------------------------------------

/// Growth-rate coefficient: bisection on the sign of the maximized exponent,
/// to a bracket of width [`RHO_TOL`], plus the smallest stationary target
/// `rho0` found along the chain sweep.
pub fn growth_rate<F: Real>(
    q: u32,
    m: u32,
    puncture: Option<RandomPuncture<F>>,
) -> Result<GrowthRateResult<F>> {
    if q < 2 {
        return Err(Error::InvalidParameter {
            name: "q",
            reason: format!("repetition factor must be at least 2, got {q}"),
        });
    }
    if m < 1 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "at least one accumulator stage is required".into(),
        });
    }
    let puncture = puncture.as_ref();
    let mut evaluations = 0u64;

    let proven = match puncture {
        Some(_) => m >= 2,
        None => (m == 2 && q >= 3) || m >= 3,
    };

    // rho0: minimum of the target curve over the alpha sweep.
    let grid = alpha_grid::<F>();
    let mut min_idx = None;
    let mut min_val = F::infinity();
    for (i, &a) in grid.iter().enumerate() {
        if let Some(p) = curve_point(a, q, m, puncture) {
            if p.target < min_val {
                min_val = p.target;
                min_idx = Some(i);
            }
        }
    }
    let rho0 = match min_idx {
        None => F::infinity(),
        Some(i) => {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(grid.len() - 1)];
            golden_min(lo, hi, |a| {
                curve_point(a, q, m, puncture).map_or(F::infinity(), |p| p.target)
            })
        }
    };

    // Bracket the sign change of the maximized exponent.
    let tol = F::of(RHO_TOL);
    let mut lo = F::of(1e-3);
    loop {
        let at_lo = max_exponent_counted(lo, q, m, puncture, &mut evaluations);
        if at_lo.value() < F::zero() {
            break;
        }
        lo = lo / F::of(2.0);
        if lo < F::of(1e-9) {
            // Positive all the way down: no meaningful crossing.
            return Ok(GrowthRateResult {
                rho_min_hat: F::zero(),
                rho0,
                arg_max: at_lo.arg().clone(),
                bracket: (F::zero(), lo),
                evaluations,
                proven: false,
            });
        }
    }
    let mut hi = F::of(0.4999);
    let at_hi = max_exponent_counted(hi, q, m, puncture, &mut evaluations);
    if at_hi.value() <= F::zero() {
        return Err(Error::Domain(format!(
            "could not anchor the positive side of the crossing at rho={hi} for q={q}, m={m}"
        )));
    }
    let mut last_positive = at_hi;

    while hi - lo > tol {
        let mid = (lo + hi) / F::of(2.0);
        let at_mid = max_exponent_counted(mid, q, m, puncture, &mut evaluations);
        if at_mid.value() < F::zero() {
            lo = mid;
        } else {
            last_positive = at_mid;
            hi = mid;
        }
    }

    Ok(GrowthRateResult {
        rho_min_hat: (lo + hi) / F::of(2.0),
        rho0,
        arg_max: last_positive.arg().clone(),
        bracket: (lo, hi),
        evaluations,
        proven,
    })
}

fn golden_min<F: Real>(mut lo: F, mut hi: F, f: impl Fn(F) -> F) -> F {
    let inv_phi = F::of(0.618_033_988_749_894_9);
    for _ in 0..200 {
        if hi - lo < F::of(1e-12) {
            break;
        }
        let m1 = hi - (hi - lo) * inv_phi;
        let m2 = lo + (hi - lo) * inv_phi;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f((lo + hi) / F::of(2.0))
}

/// Gilbert-Varshamov growth rate: the unique `rho` in `(0, 1/2)` with
/// `rate = 1 - H(rho)/ln 2`, bisected to 1e-9.
pub fn gvb_growth_rate<F: Real>(rate: F) -> Result<F> {
    if rate <= F::zero() || rate >= F::one() {
        return Err(Error::InvalidParameter {
            name: "rate",
            reason: format!("must lie strictly between 0 and 1, got {rate}"),
        });
    }
    let target = (F::one() - rate) * F::LN_2();
    let mut lo = F::zero();
    let mut hi = F::of(0.5);
    while hi - lo > F::of(1e-9) {
        let mid = (lo + hi) / F::of(2.0);
        if h(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / F::of(2.0))
}

// ---------------------------------------------------------------------------
// Boundary scan (two-stage region)
// ---------------------------------------------------------------------------

/// Edges of the two-stage feasible region at a fixed output fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// `alpha = 0`, `0 <= beta <= 2 rho`.
    AlphaZero,
    /// `beta = alpha / 2` (lightest reachable intermediate weight).
    BetaHalfAlpha,
    /// `beta = 2 rho` (heaviest intermediate weight that can reach `rho`).
    BetaTwoRho,
    /// `beta = 1 - alpha / 2`; present only when `rho > 1/4`.
    BetaComplementHalfAlpha,
}

#[derive(Clone, Debug)]
pub struct BoundaryMax<F> {
    pub boundary: Boundary,
    pub value: F,
    pub alpha: F,
    pub beta: F,
}

#[derive(Clone, Debug)]
pub struct BoundaryScan<F> {
    pub maxima: Vec<BoundaryMax<F>>,
}

impl<F: Real> BoundaryScan<F> {
    pub fn max_of(&self, boundary: Boundary) -> Option<&BoundaryMax<F>> {
        self.maxima.iter().find(|m| m.boundary == boundary)
    }

    pub fn overall_max(&self) -> F {
        self.maxima
            .iter()
            .map(|m| m.value)
            .fold(F::neg_infinity(), F::max)
    }
}

/// Samples the spectral exponent along each edge of the two-stage region on
/// a dense grid (the origin corner, where the exponent is exactly zero, is
/// excluded). Used to certify that interior maxima dominate.
pub fn boundary_scan<F: Real>(rho: F, q: u32, points_per_boundary: usize) -> BoundaryScan<F> {
    assert!(rho > F::zero() && rho <= F::of(0.5));
    let one = F::one();
    let two = F::of(2.0);
    let four = F::of(4.0);
    let n = points_per_boundary.max(2);
    let frac = |i: usize| F::of(i as f64 / n as f64);

    let mut maxima = Vec::new();
    let mut scan = |boundary: Boundary, point: &dyn Fn(F) -> (F, F)| {
        let mut best: Option<BoundaryMax<F>> = None;
        for i in 1..=n {
            let (alpha, beta) = point(frac(i));
            if let Ok(v) = exponent_raa(alpha, beta, rho, q) {
                if best.as_ref().is_none_or(|b| v > b.value) {
                    best = Some(BoundaryMax {
                        boundary,
                        value: v,
                        alpha,
                        beta,
                    });
                }
            }
        }
        maxima.extend(best);
    };

    scan(Boundary::AlphaZero, &|t| (F::zero(), two * rho * t));
    let b_max = one.min(four * rho);
    scan(Boundary::BetaHalfAlpha, &|t| (b_max * t, b_max * t / two));
    let c_max = (two - four * rho).min(four * rho);
    scan(Boundary::BetaTwoRho, &|t| (c_max * t, two * rho));
    if rho > F::of(0.25) {
        let lo = two * (one - two * rho);
        scan(Boundary::BetaComplementHalfAlpha, &|t| {
            let alpha = lo + (one - lo) * t;
            (alpha, one - alpha / two)
        });
    }
    BoundaryScan { maxima }
}

// ---------------------------------------------------------------------------
// Serializable report
// ---------------------------------------------------------------------------

/// JSON-friendly view of a growth-rate analysis.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthRateReport {
    pub q: u32,
    pub m: u32,
    pub rate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_punctured: Option<f64>,
    pub rho_min_hat: f64,
    pub rho0: f64,
    pub gvb: f64,
    pub arg_max: ArgMaxReport,
    pub tolerance: f64,
    pub evaluations: u64,
    pub proven: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArgMaxReport {
    pub alpha: f64,
    pub betas: Vec<f64>,
    pub rho: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_prime: Option<f64>,
}

impl GrowthRateReport {
    pub fn from_result<F: Real>(q: u32, m: u32, result: &GrowthRateResult<F>) -> Result<Self> {
        let rate = 1.0 / f64::from(q);
        let rate_punctured = result.arg_max.puncture.map(|p| rate / p.eta.as_f64());
        let gvb = gvb_growth_rate(rate_punctured.unwrap_or(rate))?;
        Ok(GrowthRateReport {
            q,
            m,
            rate,
            rate_punctured,
            rho_min_hat: result.rho_min_hat.as_f64(),
            rho0: result.rho0.as_f64(),
            gvb,
            arg_max: ArgMaxReport {
                alpha: result.arg_max.alpha.as_f64(),
                betas: result.arg_max.betas.iter().map(|b| b.as_f64()).collect(),
                rho: result.arg_max.rho.as_f64(),
                rho_prime: result.arg_max.puncture.map(|p| p.rho_prime.as_f64()),
            },
            tolerance: RHO_TOL,
            evaluations: result.evaluations,
            proven: result.proven,
        })
    }
}
