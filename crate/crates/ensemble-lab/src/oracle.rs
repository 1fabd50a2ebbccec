//! Exact brute-force ground truth at tiny block lengths.
//!
//! Everything here is exact rational arithmetic: inputs are enumerated as
//! bitmasks, the accumulator is simulated as the running-parity map, and
//! interleaver averages are taken either over every permutation tuple (the
//! most literal reading of the uniform interleaver) or over every image of a
//! fixed word within its weight class. The latter is orders of magnitude
//! cheaper and exact for the same reason the uniform-interleaver average only
//! depends on weights; the permutation path stays available as the
//! independent cross-check.
//!
//! These oracles validate the closed-form enumerators before anything else is
//! trusted; every comparison against them is exact equality of rationals.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinatorics::exact_binomial;
use crate::enumerators::{EnsembleSpec, IoweQuery};
use crate::error::{Error, Result};

/// Expected input-output weight enumerator cells as exact rationals.
///
/// Keys are `(input weight, stage weight vector)`; for punctured spectra the
/// punctured weight is appended as the final vector entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSpectrum {
    counts: BTreeMap<(u32, Vec<u32>), BigRational>,
}

impl ExactSpectrum {
    pub fn counts(&self) -> &BTreeMap<(u32, Vec<u32>), BigRational> {
        &self.counts
    }

    pub fn cell(&self, w: u32, stages: &[u32]) -> BigRational {
        self.counts
            .get(&(w, stages.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Total expected count over all cells with one input weight; equals
    /// `C(K, w)` exactly, since the stage kernels are probability
    /// distributions.
    pub fn input_class_total(&self, w: u32) -> BigRational {
        self.counts
            .iter()
            .filter(|((cw, _), _)| *cw == w)
            .map(|(_, v)| v.clone())
            .sum()
    }

    /// Marginal expected count per final weight, over nonzero input weights.
    pub fn final_weight_marginal(&self) -> BTreeMap<u32, BigRational> {
        let mut out = BTreeMap::new();
        for ((w, stages), v) in &self.counts {
            if *w == 0 {
                continue;
            }
            let d = *stages.last().expect("nonempty stage vector");
            *out.entry(d).or_insert_with(BigRational::zero) += v.clone();
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Bit-level machinery
// ---------------------------------------------------------------------------

/// Running parity of the first `i+1` bits, for every `i`: the unterminated
/// rate-1 accumulator.
#[inline]
fn accumulate(word: u32, n: u32) -> u32 {
    debug_assert!(n <= 16);
    let mut v = word;
    v ^= v << 1;
    v ^= v << 2;
    v ^= v << 4;
    v ^= v << 8;
    v & ((1u32 << n) - 1)
}

#[inline]
fn permute(word: u32, perm: &[u8]) -> u32 {
    let mut out = 0u32;
    for (i, &src) in perm.iter().enumerate() {
        out |= ((word >> src) & 1) << i;
    }
    out
}

/// Bit `j` of the input becomes `q` consecutive output bits.
#[inline]
fn repeat_word(word: u32, k: u32, q: u32) -> u32 {
    let mut out = 0u32;
    for j in 0..k {
        if (word >> j) & 1 == 1 {
            out |= ((1u32 << q) - 1) << (j * q);
        }
    }
    out
}

fn all_permutations(n: u32) -> Vec<Vec<u8>> {
    let mut perms = vec![vec![]];
    for i in 0..n as u8 {
        let mut next = Vec::with_capacity(perms.len() * (i as usize + 1));
        for p in &perms {
            for slot in 0..=p.len() {
                let mut q = p.clone();
                q.insert(slot, i);
                next.push(q);
            }
        }
        perms = next;
    }
    perms
}

/// All length-`n` words of the given weight, as bitmasks.
fn weight_class(n: u32, weight: u32) -> Vec<u32> {
    let mut words = Vec::new();
    let mut emit = |mask: u32| words.push(mask);
    fn rec(n: u32, weight: u32, start: u32, mask: u32, emit: &mut impl FnMut(u32)) {
        if weight == 0 {
            emit(mask);
            return;
        }
        for pos in start..=(n - weight) {
            rec(n, weight - 1, pos + 1, mask | (1 << pos), emit);
        }
    }
    rec(n, weight, 0, 0, &mut emit);
    words
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn factorial(n: u32) -> BigUint {
    (1..=u64::from(n)).map(BigUint::from).product()
}

// ---------------------------------------------------------------------------
// Accumulator enumeration
// ---------------------------------------------------------------------------

/// Tallies `(input weight, output weight)` over all `2^n` accumulator
/// inputs. Cell `(w, d)` must equal
/// `C(d-1, ceil(w/2)-1) C(n-d, floor(w/2))` for `w >= 1`.
pub fn brute_accumulator_iowe(n: u32) -> Result<BTreeMap<(u32, u32), u64>> {
    if n > 14 {
        return Err(Error::BudgetExceeded(format!(
            "accumulator enumeration is 2^n; n={n} exceeds 14"
        )));
    }
    let mut tally = BTreeMap::new();
    for word in 0u32..(1 << n) {
        let w = word.count_ones();
        let d = accumulate(word, n).count_ones();
        *tally.entry((w, d)).or_insert(0u64) += 1;
    }
    Ok(tally)
}

// ---------------------------------------------------------------------------
// Uniform-interleaver averages
// ---------------------------------------------------------------------------

fn check_stage_budget(spec: &EnsembleSpec, literal: bool) -> Result<()> {
    let n = spec.block_length();
    let m = spec.accumulators();
    if literal {
        let ok = (m == 1 && n <= 7) || (m == 2 && n <= 6);
        if !ok {
            return Err(Error::BudgetExceeded(format!(
                "literal permutation enumeration supports one stage up to N=7 \
                 or two stages up to N=6; got M={m}, N={n}"
            )));
        }
    } else if n > 8 {
        return Err(Error::BudgetExceeded(format!(
            "weight-class enumeration supports N <= 8; got N={n}"
        )));
    }
    Ok(())
}

/// Exact ensemble-average IOWE over uniform interleavers, computed by
/// enumerating every image of each stage input within its weight class.
pub fn brute_uniform_interleaver(spec: &EnsembleSpec) -> Result<ExactSpectrum> {
    check_stage_budget(spec, false)?;
    let n = spec.block_length();
    let k = spec.info_length();
    let q = spec.repetition();
    let m = spec.accumulators();

    // Exact accumulator transition counts per input weight class.
    let mut class_tally: Vec<BTreeMap<u32, u64>> = Vec::with_capacity(n as usize + 1);
    for w in 0..=n {
        let mut tally = BTreeMap::new();
        for word in weight_class(n, w) {
            *tally.entry(accumulate(word, n).count_ones()).or_insert(0) += 1u64;
        }
        class_tally.push(tally);
    }
    let class_prob = |w: u32, d: u32| -> BigRational {
        let total = BigInt::from(exact_binomial(u64::from(n), i64::from(w)));
        let hits = class_tally[w as usize].get(&d).copied().unwrap_or(0);
        BigRational::new(big(hits), total)
    };

    let mut counts = BTreeMap::new();
    for w in 0..=k {
        let multiplicity =
            BigRational::from(BigInt::from(exact_binomial(u64::from(k), i64::from(w))));
        // Depth-first over the stage weight vector.
        let mut stack: Vec<(Vec<u32>, BigRational)> = vec![(Vec::new(), multiplicity)];
        while let Some((stages, mass)) = stack.pop() {
            if stages.len() == m as usize {
                counts.insert((w, stages), mass);
                continue;
            }
            let prev = stages.last().copied().unwrap_or(q * w);
            for d in 0..=n {
                let p = class_prob(prev, d);
                if p.is_zero() {
                    continue;
                }
                let mut next = stages.clone();
                next.push(d);
                stack.push((next, mass.clone() * p));
            }
        }
    }
    Ok(ExactSpectrum { counts })
}

/// The most literal oracle: averages over every interleaver tuple
/// (`N!` for one stage, `(N!)^2` for two).
pub fn brute_uniform_interleaver_literal(spec: &EnsembleSpec) -> Result<ExactSpectrum> {
    check_stage_budget(spec, true)?;
    let n = spec.block_length();
    let k = spec.info_length();
    let q = spec.repetition();
    let m = spec.accumulators();
    let perms = all_permutations(n);

    let mut tally: BTreeMap<(u32, Vec<u32>), u64> = BTreeMap::new();
    for input in 0u32..(1 << k) {
        let w = input.count_ones();
        let repeated = repeat_word(input, k, q);
        for p1 in &perms {
            let first = accumulate(permute(repeated, p1), n);
            let d1 = first.count_ones();
            if m == 1 {
                *tally.entry((w, vec![d1])).or_insert(0) += 1;
            } else {
                for p2 in &perms {
                    let second = accumulate(permute(first, p2), n);
                    *tally.entry((w, vec![d1, second.count_ones()])).or_insert(0) += 1;
                }
            }
        }
    }
    let denom = BigInt::from(factorial(n).pow(m));
    let counts = tally
        .into_iter()
        .map(|(key, hits)| (key, BigRational::new(big(hits), denom.clone())))
        .collect();
    Ok(ExactSpectrum { counts })
}

/// Punctured ensemble oracle: on top of the interleaver average, averages
/// over every size-`N'` keep-set. The punctured weight is appended to each
/// cell's stage vector.
pub fn brute_punctured(spec: &EnsembleSpec, literal: bool) -> Result<ExactSpectrum> {
    let kept = spec.kept_length().ok_or_else(|| Error::InvalidParameter {
        name: "kept_length",
        reason: "brute_punctured requires a punctured ensemble".into(),
    })?;
    check_stage_budget(spec, literal)?;
    let n = spec.block_length();
    let keep_sets = weight_class(n, kept);

    let base = if literal {
        brute_uniform_interleaver_literal(spec)?
    } else {
        brute_uniform_interleaver(spec)?
    };

    // Exact keep-set average per pre-puncturing weight, enumerated over every
    // word of that weight and every keep-set.
    let mut kernel: Vec<BTreeMap<u32, BigRational>> = Vec::with_capacity(n as usize + 1);
    for d in 0..=n {
        let words = weight_class(n, d);
        let mut tally: BTreeMap<u32, u64> = BTreeMap::new();
        for word in &words {
            for keep in &keep_sets {
                *tally.entry((word & keep).count_ones()).or_insert(0) += 1;
            }
        }
        let total = big(words.len() as u64 * keep_sets.len() as u64);
        kernel.push(
            tally
                .into_iter()
                .map(|(dp, hits)| (dp, BigRational::new(big(hits), total.clone())))
                .collect(),
        );
    }

    let mut counts = BTreeMap::new();
    for ((w, stages), mass) in base.counts() {
        let d = *stages.last().expect("nonempty stage vector");
        for (dp, p) in &kernel[d as usize] {
            let mut key = stages.clone();
            key.push(*dp);
            let entry = counts
                .entry((*w, key))
                .or_insert_with(BigRational::zero);
            *entry += mass.clone() * p.clone();
        }
    }
    Ok(ExactSpectrum { counts })
}

// ---------------------------------------------------------------------------
// Exact closed-form twins
// ---------------------------------------------------------------------------

/// Exact rational version of the accumulator weight-transition probability.
pub fn exact_acc_prob(n: u32, w: u32, d: u32) -> BigRational {
    if w == 0 {
        return if d == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    if d == 0 {
        return BigRational::zero();
    }
    let half_up = i64::from(w.div_ceil(2));
    let numerator = exact_binomial(u64::from(d) - 1, half_up - 1)
        * exact_binomial(u64::from(n - d), i64::from(w / 2));
    BigRational::new(
        BigInt::from(numerator),
        BigInt::from(exact_binomial(u64::from(n), i64::from(w))),
    )
}

/// Exact rational version of the closed-form expected IOWE cell, including
/// the hypergeometric factor for punctured queries.
pub fn exact_expected_iowe(spec: &EnsembleSpec, query: &IoweQuery) -> Result<BigRational> {
    if query.stage_weights.len() != spec.accumulators() as usize {
        return Err(Error::DimensionMismatch {
            expected: spec.accumulators() as usize,
            got: query.stage_weights.len(),
        });
    }
    let n = spec.block_length();
    let mut value = BigRational::from(BigInt::from(exact_binomial(
        u64::from(spec.info_length()),
        i64::from(query.input_weight),
    )));
    let mut prev = query.input_weight * spec.repetition();
    for &next in &query.stage_weights {
        value *= exact_acc_prob(n, prev, next);
        if value.is_zero() {
            return Ok(value);
        }
        prev = next;
    }
    if let Some(dp) = query.punctured_weight {
        let kept = spec.kept_length().ok_or_else(|| Error::InvalidParameter {
            name: "punctured_weight",
            reason: "query has a punctured weight but the ensemble is unpunctured".into(),
        })?;
        let d = u64::from(prev);
        let numerator = exact_binomial(d, i64::from(dp))
            * exact_binomial(u64::from(n) - d, i64::from(kept) - i64::from(dp));
        value *= BigRational::new(
            BigInt::from(numerator),
            BigInt::from(exact_binomial(u64::from(n), i64::from(kept))),
        );
    }
    Ok(value)
}

/// Closed-form expected IOWE over every reachable cell, as exact rationals,
/// in the same keyed form the brute oracles produce.
pub fn exact_closed_form_spectrum(spec: &EnsembleSpec, punctured: bool) -> Result<ExactSpectrum> {
    let n = spec.block_length();
    let k = spec.info_length();
    let m = spec.accumulators() as usize;
    let mut counts = BTreeMap::new();
    let mut vectors: Vec<Vec<u32>> = vec![vec![]];
    for _ in 0..m {
        vectors = vectors
            .into_iter()
            .flat_map(|v| {
                (0..=n).map(move |d| {
                    let mut next = v.clone();
                    next.push(d);
                    next
                })
            })
            .collect();
    }
    for w in 0..=k {
        for stages in &vectors {
            if punctured {
                for dp in 0..=spec.kept_length().unwrap_or(0) {
                    let query =
                        IoweQuery::new(w, stages.clone()).with_punctured_weight(dp);
                    let value = exact_expected_iowe(spec, &query)?;
                    if !value.is_zero() {
                        let mut key = stages.clone();
                        key.push(dp);
                        counts.insert((w, key), value);
                    }
                }
            } else {
                let query = IoweQuery::new(w, stages.clone());
                let value = exact_expected_iowe(spec, &query)?;
                if !value.is_zero() {
                    counts.insert((w, stages.clone()), value);
                }
            }
        }
    }
    Ok(ExactSpectrum { counts })
}
