//! Finite-length ensemble-average weight enumerators.
//!
//! An ensemble is an outer rate-`1/q` repetition code followed by `M`
//! accumulators (rate-1 recursive encoders `1/(1+D)`), each preceded by a
//! uniform interleaver, optionally with random puncturing of the final
//! output. Averaged over all interleavers, the weight seen by each stage is a
//! Markov chain, so the full input-output weight enumerator marginalizes
//! stage by stage: one length-`N` vector of log-domain expected counts per
//! stage instead of an `M`-dimensional tensor. That keeps memory at `O(N)`
//! and lets block lengths in the thousands through.
//!
//! The accumulator here is unterminated: it is the length-preserving running
//! parity map, which is exactly what the weight-transition formula below
//! describes.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::combinatorics::{log_hypergeometric, LnBinomialTable, LogReal, LogSum};
use crate::error::{Error, Result};
use crate::real::Real;

// ---------------------------------------------------------------------------
// Ensemble description
// ---------------------------------------------------------------------------

/// Declarative description of one code ensemble.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleSpec {
    repetition: u32,
    accumulators: u32,
    info_length: u32,
    kept_length: Option<u32>,
}

impl EnsembleSpec {
    /// A rate-`1/repetition` repetition code followed by `accumulators`
    /// interleaver+accumulator stages, with `info_length` information bits.
    pub fn new(repetition: u32, accumulators: u32, info_length: u32) -> Result<Self> {
        if repetition < 2 {
            return Err(Error::InvalidParameter {
                name: "repetition",
                reason: format!("must be at least 2, got {repetition}"),
            });
        }
        if accumulators < 1 {
            return Err(Error::InvalidParameter {
                name: "accumulators",
                reason: "must be at least 1".into(),
            });
        }
        if info_length < 1 {
            return Err(Error::InvalidParameter {
                name: "info_length",
                reason: "must be at least 1".into(),
            });
        }
        Ok(EnsembleSpec {
            repetition,
            accumulators,
            info_length,
            kept_length: None,
        })
    }

    /// Adds random puncturing down to `kept_length` output symbols.
    pub fn punctured(mut self, kept_length: u32) -> Result<Self> {
        if kept_length < 1 || kept_length > self.block_length() {
            return Err(Error::InvalidParameter {
                name: "kept_length",
                reason: format!(
                    "must lie in 1..={}, got {kept_length}",
                    self.block_length()
                ),
            });
        }
        self.kept_length = Some(kept_length);
        Ok(self)
    }

    pub fn repetition(&self) -> u32 {
        self.repetition
    }

    pub fn accumulators(&self) -> u32 {
        self.accumulators
    }

    pub fn info_length(&self) -> u32 {
        self.info_length
    }

    /// Mother-code block length `N = q K`.
    pub fn block_length(&self) -> u32 {
        self.repetition * self.info_length
    }

    pub fn kept_length(&self) -> Option<u32> {
        self.kept_length
    }

    /// Mother-code rate `1/q`.
    pub fn rate(&self) -> f64 {
        1.0 / f64::from(self.repetition)
    }

    /// Rate after puncturing, `R * N / N'`; `None` when unpunctured.
    pub fn punctured_rate(&self) -> Option<f64> {
        self.kept_length
            .map(|np| self.rate() * f64::from(self.block_length()) / f64::from(np))
    }
}

/// One cell of the input-output weight enumerator: an input weight together
/// with the output weight of every stage, and optionally the weight left
/// after puncturing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IoweQuery {
    pub input_weight: u32,
    pub stage_weights: Vec<u32>,
    pub punctured_weight: Option<u32>,
}

impl IoweQuery {
    pub fn new(input_weight: u32, stage_weights: Vec<u32>) -> Self {
        IoweQuery {
            input_weight,
            stage_weights,
            punctured_weight: None,
        }
    }

    pub fn with_punctured_weight(mut self, weight: u32) -> Self {
        self.punctured_weight = Some(weight);
        self
    }

    /// Whether the per-stage ordering constraints
    /// `ceil(prev/2) <= next <= N - floor(prev/2)` all hold.
    pub fn constraints_satisfied(&self, spec: &EnsembleSpec) -> bool {
        let n = spec.block_length();
        let mut prev = self.input_weight * spec.repetition();
        for &next in &self.stage_weights {
            if prev > 0 {
                if next < prev.div_ceil(2) || next > n - prev / 2 {
                    return false;
                }
            } else if next != 0 {
                return false;
            }
            prev = next;
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Weight-transition kernel
// ---------------------------------------------------------------------------

/// Probability, under a uniform interleaver, that the accumulator turns a
/// weight-`input_weight` word of length `block_length` into a word of weight
/// `output_weight`:
///
/// `Pr(d | w) = C(d-1, ceil(w/2)-1) C(N-d, floor(w/2)) / C(N, w)`
///
/// with `Pr(0 | 0) = 1` and zero whenever the transition is impossible.
pub fn acc_conditional_log_prob<F: Real>(
    block_length: u32,
    input_weight: u32,
    output_weight: u32,
) -> LogReal<F> {
    debug_assert!(input_weight <= block_length && output_weight <= block_length);
    if input_weight == 0 {
        return if output_weight == 0 {
            LogReal::one()
        } else {
            LogReal::zero()
        };
    }
    if output_weight == 0 {
        return LogReal::zero();
    }
    let n = u64::from(block_length);
    let w = u64::from(input_weight);
    let d = u64::from(output_weight);
    let runs = crate::combinatorics::log_binomial::<F>(d - 1, (w.div_ceil(2) - 1) as i64);
    if runs.is_zero() {
        return LogReal::zero();
    }
    let gaps = crate::combinatorics::log_binomial::<F>(n - d, (w / 2) as i64);
    if gaps.is_zero() {
        return LogReal::zero();
    }
    runs * gaps / crate::combinatorics::log_binomial::<F>(n, w as i64)
}

/// Table-backed variant used by the spectrum loops.
#[inline]
fn acc_log_prob_tab<F: Real>(
    tab: &LnBinomialTable<F>,
    n: usize,
    w: usize,
    d: usize,
) -> LogReal<F> {
    if w == 0 {
        return if d == 0 { LogReal::one() } else { LogReal::zero() };
    }
    if d == 0 {
        return LogReal::zero();
    }
    let half_up = w.div_ceil(2);
    if d < half_up || n - d < w / 2 {
        return LogReal::zero();
    }
    tab.ln_binomial(d - 1, (half_up - 1) as i64) * tab.ln_binomial(n - d, (w / 2) as i64)
        / tab.ln_binomial(n, w as i64)
}

/// Conditional probability of a full stage-weight vector given the input
/// weight: the first accumulator sees weight `q w`, each later stage sees the
/// previous stage's output weight.
pub fn rma_conditional_log_prob<F: Real>(
    spec: &EnsembleSpec,
    query: &IoweQuery,
) -> Result<LogReal<F>> {
    if query.stage_weights.len() != spec.accumulators() as usize {
        return Err(Error::DimensionMismatch {
            expected: spec.accumulators() as usize,
            got: query.stage_weights.len(),
        });
    }
    let n = spec.block_length();
    let mut prev = query.input_weight * spec.repetition();
    let mut prob = LogReal::one();
    for &next in &query.stage_weights {
        prob = prob * acc_conditional_log_prob::<F>(n, prev, next);
        if prob.is_zero() {
            return Ok(LogReal::zero());
        }
        prev = next;
    }
    Ok(prob)
}

/// Ensemble-average input-output weight enumerator cell
/// `E(A) = C(K, w) * Pr(stage weights | w)`, times the hypergeometric
/// puncturing kernel when the query carries a punctured weight.
pub fn expected_iowe<F: Real>(spec: &EnsembleSpec, query: &IoweQuery) -> Result<LogReal<F>> {
    let mut value = crate::combinatorics::log_binomial::<F>(
        u64::from(spec.info_length()),
        i64::from(query.input_weight),
    ) * rma_conditional_log_prob(spec, query)?;
    if let Some(d_prime) = query.punctured_weight {
        let kept = spec.kept_length().ok_or_else(|| Error::InvalidParameter {
            name: "punctured_weight",
            reason: "query has a punctured weight but the ensemble is unpunctured".into(),
        })?;
        let d = *query.stage_weights.last().expect("at least one stage");
        value = value
            * log_hypergeometric::<F>(
                u64::from(spec.block_length()),
                u64::from(kept),
                u64::from(d),
                i64::from(d_prime),
            );
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// Spectra
// ---------------------------------------------------------------------------

/// Size limits for spectrum computations.
#[derive(Clone, Debug)]
pub struct SpectrumOptions {
    /// Hard cap on the block length; computations above it are refused.
    pub max_block_length: u32,
    /// When set, only output weights `d <= max_weight` are produced (the
    /// intermediate stages still run at full width).
    pub max_weight: Option<u32>,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            max_block_length: 4096,
            max_weight: None,
        }
    }
}

/// Expected number of codewords per output weight, `d -> E(A_d)`.
///
/// The entry at `d = 0` is exactly one for an unpunctured ensemble (the
/// all-zero codeword from the all-zero input); cumulative queries start at
/// `d = 1`.
#[derive(Clone, Debug)]
pub struct WeightSpectrum<F> {
    block_length: u32,
    counts: Vec<LogReal<F>>,
}

impl<F: Real> WeightSpectrum<F> {
    /// Length of the codewords the spectrum ranges over (the kept length for
    /// a punctured spectrum).
    pub fn block_length(&self) -> u32 {
        self.block_length
    }

    /// Largest weight the spectrum holds; equals `block_length` unless the
    /// computation was truncated.
    pub fn max_weight(&self) -> u32 {
        (self.counts.len() - 1) as u32
    }

    pub fn expected_count(&self, weight: u32) -> LogReal<F> {
        self.counts[weight as usize]
    }

    /// Cumulative expected count `sum_{d=1}^{delta} E(A_d)`; the weight-zero
    /// entry is excluded.
    pub fn cumulative(&self, delta: u32) -> LogReal<F> {
        assert!(
            delta <= self.max_weight(),
            "delta {delta} beyond stored weights {}",
            self.max_weight()
        );
        let mut sum = LogSum::new();
        for &c in &self.counts[1..=delta as usize] {
            sum.push(c);
        }
        sum.total()
    }

    /// Total expected count over all nonzero weights.
    pub fn total_mass(&self) -> LogReal<F> {
        self.cumulative(self.max_weight())
    }

    /// Writes `d, log_expected_count, expected_count_if_representable` rows.
    /// The third column is left empty when the count overflows `F`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "d,log_expected_count,expected_count_if_representable")?;
        for (d, c) in self.counts.iter().enumerate() {
            let value = c.value();
            if value.is_infinite() {
                writeln!(out, "{d},{:.11e},", c.ln().as_f64())?;
            } else if c.is_zero() {
                writeln!(out, "{d},-inf,0")?;
            } else {
                writeln!(out, "{d},{:.11e},{:.11e}", c.ln().as_f64(), value.as_f64())?;
            }
        }
        Ok(())
    }
}

/// Ensemble-average weight spectrum of the (unpunctured) mother code, built
/// by stage-wise marginalization.
pub fn weight_spectrum<F: Real>(spec: &EnsembleSpec) -> Result<WeightSpectrum<F>> {
    weight_spectrum_with(spec, &SpectrumOptions::default())
}

pub fn weight_spectrum_with<F: Real>(
    spec: &EnsembleSpec,
    opts: &SpectrumOptions,
) -> Result<WeightSpectrum<F>> {
    let n = spec.block_length();
    if n > opts.max_block_length {
        return Err(Error::BudgetExceeded(format!(
            "block length {n} exceeds the configured limit {}",
            opts.max_block_length
        )));
    }
    let n = n as usize;
    let k = spec.info_length() as usize;
    let q = spec.repetition() as usize;
    let stages = spec.accumulators();
    let tab = LnBinomialTable::<F>::new(n);

    let final_width = opts
        .max_weight
        .map_or(n, |mw| (mw as usize).min(n));

    // First stage: fold the repetition code and the input-weight multiplicity
    // into the first accumulator's output distribution.
    let first_width = if stages == 1 { final_width } else { n };
    let mut stage: Vec<LogReal<F>> = (1..=first_width)
        .into_par_iter()
        .map(|d1| {
            let mut sum = LogSum::new();
            for w in 1..=k {
                let qw = q * w;
                if qw.div_ceil(2) > d1 {
                    break; // larger w only moves further out of range
                }
                if qw / 2 > n - d1 {
                    continue;
                }
                sum.push(
                    tab.ln_binomial(k, w as i64) * acc_log_prob_tab(&tab, n, qw, d1),
                );
            }
            sum.total()
        })
        .collect();
    stage.insert(0, LogReal::zero());

    for stage_index in 2..=stages {
        let width = if stage_index == stages { final_width } else { n };
        let prev = stage;
        let mut next: Vec<LogReal<F>> = (1..=width)
            .into_par_iter()
            .map(|d| {
                // Reachable predecessors: ceil(p/2) <= d and floor(p/2) <= N-d.
                let p_max = (2 * d).min(2 * (n - d) + 1).min(prev.len() - 1);
                let mut sum = LogSum::new();
                for p in 1..=p_max {
                    if prev[p].is_zero() {
                        continue;
                    }
                    sum.push(prev[p] * acc_log_prob_tab(&tab, n, p, d));
                }
                sum.total()
            })
            .collect();
        next.insert(0, LogReal::zero());
        stage = next;
    }

    stage[0] = LogReal::one(); // the all-zero input
    Ok(WeightSpectrum {
        block_length: spec.block_length(),
        counts: stage,
    })
}

/// Spectrum after random puncturing: the mother spectrum pushed through the
/// hypergeometric weight-transition kernel.
pub fn punctured_spectrum<F: Real>(spec: &EnsembleSpec) -> Result<WeightSpectrum<F>> {
    punctured_spectrum_with(spec, &SpectrumOptions::default())
}

pub fn punctured_spectrum_with<F: Real>(
    spec: &EnsembleSpec,
    opts: &SpectrumOptions,
) -> Result<WeightSpectrum<F>> {
    let kept = spec.kept_length().ok_or_else(|| Error::InvalidParameter {
        name: "kept_length",
        reason: "punctured_spectrum requires a punctured ensemble".into(),
    })? as usize;
    let mother = weight_spectrum_with(
        spec,
        &SpectrumOptions {
            max_block_length: opts.max_block_length,
            max_weight: None,
        },
    )?;
    let n = mother.block_length() as usize;
    if kept == n {
        // Degenerate kernel: bitwise-identical to the mother spectrum.
        return Ok(mother);
    }
    let final_width = opts.max_weight.map_or(kept, |mw| (mw as usize).min(kept));
    let counts: Vec<LogReal<F>> = (0..=final_width)
        .into_par_iter()
        .map(|dp| {
            // Nonzero kernel needs dp <= d and kept - dp <= n - d.
            let d_lo = dp;
            let d_hi = n - kept + dp;
            let mut sum = LogSum::new();
            for d in d_lo..=d_hi {
                let mass = mother.expected_count(d as u32);
                if mass.is_zero() {
                    continue;
                }
                sum.push(
                    mass * log_hypergeometric::<F>(n as u64, kept as u64, d as u64, dp as i64),
                );
            }
            sum.total()
        })
        .collect();
    Ok(WeightSpectrum {
        block_length: kept as u32,
        counts,
    })
}

/// Free-function form of [`WeightSpectrum::cumulative`].
pub fn cumulative_wef<F: Real>(spectrum: &WeightSpectrum<F>, delta: u32) -> LogReal<F> {
    spectrum.cumulative(delta)
}

/// Largest `delta*` with `E(A_{d <= delta*}) < fraction`.
///
/// By the first-moment argument, at least a `1 - fraction` share of the
/// ensemble then has minimum distance above `delta*`. Returns 0 when even the
/// weight-one count reaches the threshold. Punctured ensembles are evaluated
/// on their punctured spectrum.
pub fn finite_length_dmin_bound<F: Real>(spec: &EnsembleSpec, fraction: F) -> Result<u32> {
    finite_length_dmin_bound_with(spec, fraction, &SpectrumOptions::default())
}

pub fn finite_length_dmin_bound_with<F: Real>(
    spec: &EnsembleSpec,
    fraction: F,
    opts: &SpectrumOptions,
) -> Result<u32> {
    if fraction <= F::zero() || fraction >= F::one() {
        return Err(Error::InvalidParameter {
            name: "fraction",
            reason: format!("must lie strictly between 0 and 1, got {fraction}"),
        });
    }
    let spectrum = if spec.kept_length().is_some() {
        punctured_spectrum_with(spec, opts)?
    } else {
        weight_spectrum_with(spec, opts)?
    };
    let threshold = LogReal::from_value(fraction);
    let mut cum = LogSum::new();
    for d in 1..=spectrum.max_weight() {
        cum.push(spectrum.expected_count(d));
        if cum.total() >= threshold {
            return Ok(d - 1);
        }
    }
    Ok(spectrum.max_weight())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(q: u32, m: u32, k: u32) -> EnsembleSpec {
        EnsembleSpec::new(q, m, k).unwrap()
    }

    #[test]
    fn acc_kernel_reference_points() {
        // Weight-2 inputs on 4 positions: outputs of weight 2 are exactly the
        // inputs whose two ones sit at distance 2.
        assert_relative_eq!(
            acc_conditional_log_prob::<f64>(4, 2, 2).value(),
            2.0 / 6.0,
            epsilon = 1e-14
        );
        assert_eq!(acc_conditional_log_prob::<f64>(4, 0, 0).value(), 1.0);
        assert!(acc_conditional_log_prob::<f64>(4, 2, 4).is_zero());
        assert!(acc_conditional_log_prob::<f64>(4, 0, 1).is_zero());
        assert!(acc_conditional_log_prob::<f64>(4, 1, 0).is_zero());
    }

    #[test]
    fn acc_kernel_rows_sum_to_one() {
        for n in [1u32, 2, 3, 7, 16, 33] {
            for w in 0..=n {
                let mut sum = LogSum::<f64>::new();
                for d in 0..=n {
                    sum.push(acc_conditional_log_prob(n, w, d));
                }
                assert_relative_eq!(sum.total().value(), 1.0, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn single_stage_reduces_to_acc_kernel() {
        let s = spec(3, 1, 4);
        for w in 0..=4u32 {
            for d in 0..=12u32 {
                let q = IoweQuery::new(w, vec![d]);
                let lhs = rma_conditional_log_prob::<f64>(&s, &q).unwrap();
                let rhs = acc_conditional_log_prob::<f64>(12, 3 * w, d);
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = spec(2, 2, 4);
        let q = IoweQuery::new(1, vec![1]);
        assert!(matches!(
            rma_conditional_log_prob::<f64>(&s, &q),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn weight_one_codeword_identities() {
        // Repetition 2, single accumulator: one weight-one codeword on
        // average, for every info length.
        for k in [1u32, 2, 3, 8, 64] {
            let s = spec(2, 1, k);
            let e = expected_iowe::<f64>(&s, &IoweQuery::new(1, vec![1])).unwrap();
            assert_relative_eq!(e.value(), 1.0, epsilon = 1e-12);
        }
        // Two accumulators: mass 1/N at every final weight when the first
        // stage output has weight one.
        for k in [2u32, 5, 16] {
            let s = spec(2, 2, k);
            let n = s.block_length();
            for d in 1..=n {
                let e = expected_iowe::<f64>(&s, &IoweQuery::new(1, vec![1, d])).unwrap();
                assert_relative_eq!(e.value(), 1.0 / f64::from(n), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn expected_iowe_reference_point() {
        // q=3, K=2, w=1, single stage, d=2: 2 * (d-1)(6-d) / C(6,3).
        let s = spec(3, 1, 2);
        let e = expected_iowe::<f64>(&s, &IoweQuery::new(1, vec![2])).unwrap();
        assert_relative_eq!(e.value(), 0.4, epsilon = 1e-14);
    }

    #[test]
    fn tiny_spectrum_matches_hand_expansion() {
        // q=3, K=2 single accumulator: E(A) = {0:1, 2:0.4, 3:1.6, 4:0.6, 5:0.4}.
        let s = spec(3, 1, 2);
        let sp = weight_spectrum::<f64>(&s).unwrap();
        let expect = [1.0, 0.0, 0.4, 1.6, 0.6, 0.4, 0.0];
        for (d, &e) in expect.iter().enumerate() {
            assert_relative_eq!(sp.expected_count(d as u32).value(), e, epsilon = 1e-12);
        }
        assert_relative_eq!(sp.cumulative(2).value(), 0.4, epsilon = 1e-12);
        assert!(sp.cumulative(0).is_zero());
        assert_relative_eq!(sp.total_mass().value(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn total_mass_is_count_of_nonzero_inputs() {
        for (q, m, k) in [(2u32, 1u32, 6u32), (3, 2, 4), (2, 3, 5), (4, 2, 3)] {
            let s = spec(q, m, k);
            let sp = weight_spectrum::<f64>(&s).unwrap();
            let expect = 2f64.powi(k as i32) - 1.0;
            assert_relative_eq!(sp.total_mass().value(), expect, max_relative = 1e-9);
        }
    }

    #[test]
    fn spectrum_respects_reachability_constraints() {
        let s = spec(3, 1, 2);
        let sp = weight_spectrum::<f64>(&s).unwrap();
        // Weight 1 is unreachable: the lightest input maps to weight >= 2.
        assert!(sp.expected_count(1).is_zero());
        assert!(sp.expected_count(6).is_zero());
    }

    #[test]
    fn budget_is_enforced() {
        let s = spec(2, 1, 3000);
        assert!(matches!(
            weight_spectrum::<f64>(&s),
            Err(Error::BudgetExceeded(_))
        ));
        let opts = SpectrumOptions {
            max_block_length: 6000,
            ..Default::default()
        };
        assert!(weight_spectrum_with::<f64>(&s, &opts).is_ok());
    }

    #[test]
    fn truncated_spectrum_agrees_with_full() {
        let s = spec(3, 2, 8);
        let full = weight_spectrum::<f64>(&s).unwrap();
        let part = weight_spectrum_with::<f64>(
            &s,
            &SpectrumOptions {
                max_weight: Some(7),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(part.max_weight(), 7);
        for d in 0..=7 {
            assert_eq!(part.expected_count(d), full.expected_count(d));
        }
    }

    #[test]
    fn unpunctured_kernel_is_identity() {
        let s = spec(3, 2, 4).punctured(12).unwrap();
        let a = weight_spectrum::<f64>(&s).unwrap();
        let b = punctured_spectrum::<f64>(&s).unwrap();
        for d in 0..=12 {
            assert_eq!(a.expected_count(d).ln(), b.expected_count(d).ln());
        }
    }

    #[test]
    fn puncturing_preserves_total_mass() {
        let s = spec(3, 2, 4).punctured(7).unwrap();
        let mother = weight_spectrum::<f64>(&s).unwrap();
        let punct = punctured_spectrum::<f64>(&s).unwrap();
        // Kernel rows sum to one, so the whole mass (including the weight-0
        // row) is conserved.
        let mut lhs = LogSum::<f64>::new();
        for d in 0..=mother.max_weight() {
            lhs.push(mother.expected_count(d));
        }
        let mut rhs = LogSum::<f64>::new();
        for d in 0..=punct.max_weight() {
            rhs.push(punct.expected_count(d));
        }
        assert_relative_eq!(lhs.total().ln(), rhs.total().ln(), epsilon = 1e-9);
    }

    #[test]
    fn dmin_bound_definition_holds() {
        for (q, m, k) in [(3u32, 2u32, 16u32), (2, 2, 24), (3, 1, 21)] {
            let s = spec(q, m, k);
            let b = finite_length_dmin_bound::<f64>(&s, 0.5).unwrap();
            let sp = weight_spectrum::<f64>(&s).unwrap();
            assert!(sp.cumulative(b).value() < 0.5);
            if b < sp.max_weight() {
                assert!(sp.cumulative(b + 1).value() >= 0.5);
            }
        }
    }

    #[test]
    fn fraction_must_be_a_probability() {
        let s = spec(3, 2, 4);
        assert!(finite_length_dmin_bound::<f64>(&s, 0.0).is_err());
        assert!(finite_length_dmin_bound::<f64>(&s, 1.0).is_err());
    }

    #[test]
    fn constraint_checker_matches_kernel_support() {
        let s = spec(3, 2, 2);
        for w in 0..=2u32 {
            for d1 in 0..=6u32 {
                for d in 0..=6u32 {
                    let q = IoweQuery::new(w, vec![d1, d]);
                    let p = rma_conditional_log_prob::<f64>(&s, &q).unwrap();
                    if !q.constraints_satisfied(&s) {
                        assert!(p.is_zero(), "w={w} d1={d1} d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn csv_emits_one_row_per_weight() {
        let s = spec(3, 1, 2);
        let sp = weight_spectrum::<f64>(&s).unwrap();
        let mut buf = Vec::new();
        sp.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8); // header + weights 0..=6
        assert!(text.lines().nth(1).unwrap().starts_with("0,"));
    }
}
