//! Property and cross-route consistency tests: independent finite-difference
//! oracles for the analytic derivatives, agreement between the two exponent
//! implementations, finite-length-to-asymptotic convergence, and the
//! log-domain arithmetic contracts.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ensemble_lab::asymptotic::{
    beta_chain, concavity_check, exponent_raa, exponent_rma, growth_rate, gvb_growth_rate,
    max_exponent_at_rho, puncture_exponent, stationarity_residual, NormalizedWeights,
    RandomPuncture, RHO_TOL,
};
use ensemble_lab::combinatorics::{log_hypergeometric, LogReal};
use ensemble_lab::enumerators::{
    expected_iowe, rma_conditional_log_prob, weight_spectrum, weight_spectrum_with, EnsembleSpec,
    IoweQuery, SpectrumOptions,
};
use ensemble_lab::LogSum64;

// ---------------------------------------------------------------------------
// Log-domain arithmetic
// ---------------------------------------------------------------------------

fn logreal_strategy() -> impl Strategy<Value = LogReal<f64>> {
    prop_oneof![
        9 => (-600.0f64..600.0).prop_map(LogReal::from_ln),
        1 => Just(LogReal::zero()),
    ]
}

proptest! {
    #[test]
    fn logreal_addition_commutes(a in logreal_strategy(), b in logreal_strategy()) {
        let ab = a + b;
        let ba = b + a;
        prop_assert!(ab.rel_diff(ba) <= 1e-12);
    }

    #[test]
    fn logreal_multiplication_commutes(a in logreal_strategy(), b in logreal_strategy()) {
        prop_assert_eq!(a * b, b * a);
    }

    #[test]
    fn logreal_addition_associates(
        a in logreal_strategy(),
        b in logreal_strategy(),
        c in logreal_strategy(),
    ) {
        let left = (a + b) + c;
        let right = a + (b + c);
        prop_assert!(left.rel_diff(right) <= 4e-12);
    }

    #[test]
    fn logreal_multiplication_associates(
        a in logreal_strategy(),
        b in logreal_strategy(),
        c in logreal_strategy(),
    ) {
        let left = (a * b) * c;
        let right = a * (b * c);
        prop_assert!(left.rel_diff(right) <= 1e-12);
    }

    #[test]
    fn logreal_one_and_zero_are_neutral(a in logreal_strategy()) {
        prop_assert_eq!(a * LogReal::one(), a);
        prop_assert_eq!(a + LogReal::zero(), a);
    }
}

// ---------------------------------------------------------------------------
// Region sampling helpers
// ---------------------------------------------------------------------------

/// Random interior point of the two-stage region with a safety margin.
fn sample_two_stage(rng: &mut impl Rng, margin: f64) -> (f64, f64, f64) {
    loop {
        let rho = rng.gen_range(0.08..0.45);
        let alpha = rng.gen_range(margin..(4.0 * rho - margin).min(1.0 - margin));
        let lo = alpha / 2.0 + margin;
        let hi = (2.0 * rho).min(1.0 - alpha / 2.0) - margin;
        if hi > lo {
            return (alpha, rng.gen_range(lo..hi), rho);
        }
    }
}

/// Random interior stage-weight vector for `m` stages.
fn sample_stages(rng: &mut impl Rng, m: usize, margin: f64) -> Option<(f64, Vec<f64>, f64)> {
    let alpha = rng.gen_range(margin..0.6);
    let mut prev = alpha;
    let mut betas = Vec::new();
    for _ in 0..m - 1 {
        let lo = prev / 2.0 + margin;
        let hi = 1.0 - prev / 2.0 - margin;
        if hi <= lo {
            return None;
        }
        let b = rng.gen_range(lo..hi.min(0.75));
        betas.push(b);
        prev = b;
    }
    let lo = prev / 2.0 + margin;
    let hi = (1.0 - prev / 2.0 - margin).min(0.5);
    if hi <= lo {
        return None;
    }
    let rho = rng.gen_range(lo..hi);
    Some((alpha, betas, rho))
}

// ---------------------------------------------------------------------------
// Exponent cross-routes and derivatives
// ---------------------------------------------------------------------------

#[test]
fn two_stage_exponent_routes_agree_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (alpha, beta, rho) = sample_two_stage(&mut rng, 1e-3);
        let direct = exponent_raa(alpha, beta, rho, 3).unwrap();
        let gamma = NormalizedWeights {
            alpha,
            betas: vec![beta],
            rho,
            puncture: None,
        };
        let general = exponent_rma(&gamma, 3, 2).unwrap();
        assert!(
            (direct - general).abs() <= 1e-12,
            "({alpha}, {beta}, {rho}): {direct} vs {general}"
        );
    }
}

#[test]
fn analytic_partials_match_central_differences() {
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for m in [2usize, 3] {
        let mut checked = 0;
        while checked < 100 {
            let Some((alpha, betas, rho)) = sample_stages(&mut rng, m, 0.04) else {
                continue;
            };
            let q = rng.gen_range(2u32..=6);
            let gamma = NormalizedWeights {
                alpha,
                betas: betas.clone(),
                rho,
                puncture: None,
            };
            let analytic = stationarity_residual(&gamma, q, m as u32).unwrap();
            let eval = |alpha: f64, betas: &[f64]| {
                exponent_rma(
                    &NormalizedWeights {
                        alpha,
                        betas: betas.to_vec(),
                        rho,
                        puncture: None,
                    },
                    q,
                    m as u32,
                )
                .unwrap()
            };
            let mut numeric = Vec::with_capacity(m);
            numeric.push((eval(alpha + h, &betas) - eval(alpha - h, &betas)) / (2.0 * h));
            for i in 0..m - 1 {
                let mut up = betas.clone();
                up[i] += h;
                let mut down = betas.clone();
                down[i] -= h;
                numeric.push((eval(alpha, &up) - eval(alpha, &down)) / (2.0 * h));
            }
            for (a, n) in analytic.iter().zip(&numeric) {
                assert!(
                    (a - n).abs() <= 1e-5 * a.abs().max(1.0),
                    "m={m} q={q} at ({alpha}, {betas:?}, {rho}): {a} vs {n}"
                );
            }
            checked += 1;
        }
    }
}

#[test]
fn curvature_matches_second_central_difference() {
    let h = 1e-4;
    for q in [3u32, 4, 5, 6] {
        for i in 1..=40 {
            let alpha = 0.45 * i as f64 / 40.0;
            let Some(chain) = beta_chain(alpha, q, 2) else {
                continue;
            };
            let beta = chain.betas[0];
            // The second derivative along a constant-beta line ignores the
            // output fraction; any feasible one works.
            let rho = chain.rho;
            let f = |a: f64| exponent_raa(a, beta, rho, q).unwrap();
            let numeric = (f(alpha + h) - 2.0 * f(alpha) + f(alpha - h)) / (h * h);
            let analytic = concavity_check(alpha, beta, q);
            assert!(
                (numeric - analytic).abs() <= 1e-4 * analytic.abs(),
                "q={q} alpha={alpha}: {analytic} vs {numeric}"
            );
            assert!(analytic < 0.0);
        }
    }
}

// ---------------------------------------------------------------------------
// Puncturing exponent
// ---------------------------------------------------------------------------

#[test]
fn puncture_exponent_is_never_positive() {
    for ie in 1..=20 {
        let eta = ie as f64 / 20.0;
        for ir in 1..20 {
            let rho = ir as f64 / 40.0;
            for ip in 0..=40 {
                let lo = (0f64).max((rho + eta - 1.0) / eta);
                let hi = (1f64).min(rho / eta);
                let rho_prime = lo + (hi - lo) * ip as f64 / 40.0;
                let Ok(phi) = puncture_exponent(rho, rho_prime, eta) else {
                    continue;
                };
                assert!(phi <= 1e-13, "eta={eta} rho={rho} rho'={rho_prime}: {phi}");
                // Zero only where the punctured fraction is the typical one.
                if (rho_prime - rho).abs() > 1e-3 && eta < 1.0 - 1e-9 {
                    assert!(phi < 0.0, "eta={eta} rho={rho} rho'={rho_prime}");
                }
            }
        }
    }
}

#[test]
fn puncture_exponent_matches_finite_hypergeometric_scaling() {
    // phi is the large-N exponent of the hypergeometric kernel; compare at
    // matching integer scalings and check the gap shrinks like log(N)/N.
    let (rho, rho_prime, eta) = (0.3f64, 0.2, 2.0 / 3.0);
    let phi = puncture_exponent(rho, rho_prime, eta).unwrap();
    let mut errors = Vec::new();
    for n in [990u64, 1980] {
        let kept = (eta * n as f64).round() as u64;
        let d = (rho * n as f64).round() as u64;
        let dp = (rho_prime * kept as f64).round() as i64;
        let ln_p = log_hypergeometric::<f64>(n, kept, d, dp).ln();
        errors.push((ln_p / n as f64 - phi).abs());
    }
    assert!(
        errors[1] < errors[0],
        "finite-size gap not shrinking: {errors:?}"
    );
    let n = 1980f64;
    assert!(
        errors[1] <= 4.0 * n.ln() / n,
        "gap {:.3e} larger than O(log N / N) allows",
        errors[1]
    );
}

#[test]
fn keeping_everything_reproduces_the_unpunctured_growth_rate() {
    let punctured = growth_rate::<f64>(3, 2, Some(RandomPuncture::new(1.0).unwrap())).unwrap();
    let plain = growth_rate::<f64>(3, 2, None).unwrap();
    assert!(
        (punctured.rho_min_hat - plain.rho_min_hat).abs() <= 1e-6,
        "{} vs {}",
        punctured.rho_min_hat,
        plain.rho_min_hat
    );
}

// ---------------------------------------------------------------------------
// Growth-rate solver contracts
// ---------------------------------------------------------------------------

#[test]
fn crossing_is_bracketed_by_sign_changes() {
    let r = growth_rate::<f64>(3, 2, None).unwrap();
    let below = max_exponent_at_rho(r.rho_min_hat - 10.0 * RHO_TOL, 3, 2, None);
    let above = max_exponent_at_rho(r.rho_min_hat + 10.0 * RHO_TOL, 3, 2, None);
    assert!(below.value() < 0.0, "below: {}", below.value());
    assert!(above.value() > 0.0, "above: {}", above.value());
    // The maximized exponent is within solver tolerance of zero at the
    // crossing itself.
    let at = max_exponent_at_rho(r.rho_min_hat, 3, 2, None);
    assert!(at.value().abs() <= 1e-4);
}

#[test]
fn three_stage_rate_half_crossing_sits_at_reference_point() {
    let at = max_exponent_at_rho(0.1034f64, 2, 3, None);
    assert!(at.is_stationary());
    assert!(at.value().abs() <= 1e-4, "value {}", at.value());
}

#[test]
fn families_without_proofs_are_flagged() {
    assert!(!growth_rate::<f64>(3, 1, None).unwrap().proven);
    assert!(!growth_rate::<f64>(2, 2, None).unwrap().proven);
    assert!(growth_rate::<f64>(2, 3, None).unwrap().proven);
    assert!(growth_rate::<f64>(2, 2, Some(RandomPuncture::new(0.5).unwrap()))
        .unwrap()
        .proven);
}

#[test]
fn generic_scalar_paths_work_in_f32() {
    let gvb: f32 = gvb_growth_rate(0.5f32).unwrap();
    assert!((gvb - 0.11).abs() < 1e-3);
    let chain = beta_chain(0.2f32, 3, 2).unwrap();
    assert!(chain.rho > 0.0 && chain.rho < 0.5);
    let spec = EnsembleSpec::new(3, 1, 2).unwrap();
    let sp = weight_spectrum::<f32>(&spec).unwrap();
    assert!((sp.total_mass().value() - 3.0).abs() < 1e-4);
}

// ---------------------------------------------------------------------------
// Finite-length enumerator invariants
// ---------------------------------------------------------------------------

#[test]
fn stage_vector_distribution_normalizes() {
    // Summing the conditional probability over every reachable stage-weight
    // vector returns one, for each nonzero input weight.
    for (q, m, k) in [(3u32, 2u32, 4u32), (2, 3, 3)] {
        let spec = EnsembleSpec::new(q, m, k).unwrap();
        let n = spec.block_length();
        for w in 1..=k {
            let mut sum = LogSum64::new();
            let mut stages = vec![0u32; m as usize];
            loop {
                let query = IoweQuery::new(w, stages.clone());
                sum.push(rma_conditional_log_prob::<f64>(&spec, &query).unwrap());
                // Odometer over the stage-weight vectors.
                let mut level = 0;
                loop {
                    if level == stages.len() {
                        break;
                    }
                    stages[level] += 1;
                    if stages[level] <= n {
                        break;
                    }
                    stages[level] = 0;
                    level += 1;
                }
                if level == stages.len() {
                    break;
                }
            }
            let total = sum.total().value();
            assert!(
                (total - 1.0).abs() <= 1e-9,
                "q={q} m={m} w={w}: total {total}"
            );
        }
    }
}

#[test]
fn cumulative_is_monotone_in_delta() {
    let spec = EnsembleSpec::new(3, 2, 16).unwrap();
    let sp = weight_spectrum::<f64>(&spec).unwrap();
    let mut prev = LogReal::zero();
    for delta in 0..=sp.block_length() {
        let cum = sp.cumulative(delta);
        assert!(cum >= prev, "delta={delta}");
        prev = cum;
    }
}

#[test]
fn repetition_four_cumulative_trend() {
    // Same shrinking-cumulative check as the acceptance criterion but for
    // repetition 4, where the small-block values exceed one; only the
    // largest block drops below it. Frozen regression values.
    let frozen = [(300u32, 1.235750297), (3000, 1.107350826), (30000, 0.8988448271)];
    let mut prev = f64::INFINITY;
    for &(n, reference) in &frozen {
        let delta = f64::from(n).powf(0.5 - 0.05).floor() as u32;
        let spec = EnsembleSpec::new(4, 1, n / 4).unwrap();
        let sp = weight_spectrum_with::<f64>(
            &spec,
            &SpectrumOptions {
                max_block_length: 30_720,
                max_weight: Some(delta),
            },
        )
        .unwrap();
        let cum = sp.cumulative(delta).value();
        assert!(cum < prev, "N={n}: {cum} not decreasing");
        assert!(
            (cum - reference).abs() <= 1e-6 * reference,
            "N={n}: {cum} vs frozen {reference}"
        );
        prev = cum;
    }
    assert!(frozen[2].1 < 1.0);
}

#[test]
fn rate_half_two_stage_bound_stays_low() {
    // The rate-1/2 two-stage ensemble has expected count at least delta/N
    // below weight delta (weight-one intermediate chains), which pins its
    // median-distance bound far below the GVB. Frozen bounds: 6, 12, 23 for
    // N = 192, 384, 768 (ratio ~ 0.03 vs GVB 0.11).
    let spec = EnsembleSpec::new(2, 2, 48).unwrap();
    let sp = weight_spectrum::<f64>(&spec).unwrap();
    let n = f64::from(sp.block_length());
    for delta in 1..=sp.block_length() / 2 {
        assert!(
            sp.cumulative(delta).value() >= f64::from(delta) / n * (1.0 - 1e-9),
            "delta={delta}"
        );
    }
    let frozen = [(192u32, 6u32), (384, 12), (768, 23)];
    for &(n, expect) in &frozen {
        let spec = EnsembleSpec::new(2, 2, n / 2).unwrap();
        let b =
            ensemble_lab::enumerators::finite_length_dmin_bound::<f64>(&spec, 0.5).unwrap();
        assert_eq!(b, expect, "N={n}");
        assert!(f64::from(b) / f64::from(n) < 0.04);
    }
}

#[test]
fn finite_enumerator_converges_to_the_exponent() {
    // At weights proportional to the block length, (1/N) log E approaches
    // the spectral exponent with an O(log N / N) gap.
    let q = 3u32;
    let chain = beta_chain(0.115f64, q, 2).unwrap();
    let (alpha, beta, rho) = (0.115, chain.betas[0], chain.rho);
    let mut errors = Vec::new();
    for n in [600u32, 1200, 2400] {
        let k = n / q;
        let w = (alpha * f64::from(k)).round() as u32;
        let d1 = (beta * f64::from(n)).round() as u32;
        let d = (rho * f64::from(n)).round() as u32;
        let spec = EnsembleSpec::new(q, 2, k).unwrap();
        let cell = expected_iowe::<f64>(&spec, &IoweQuery::new(w, vec![d1, d])).unwrap();
        // Evaluate the exponent at the rounded fractions to isolate the
        // finite-size gap from the rounding of the weights themselves.
        let exact = exponent_raa(
            f64::from(w) / f64::from(k),
            f64::from(d1) / f64::from(n),
            f64::from(d) / f64::from(n),
            q,
        )
        .unwrap();
        let err = (cell.ln() / f64::from(n) - exact).abs();
        assert!(
            err <= 6.0 * f64::from(n).ln() / f64::from(n),
            "N={n}: gap {err:.3e}"
        );
        errors.push(err);
    }
    assert!(
        errors[0] > errors[1] && errors[1] > errors[2],
        "gap not shrinking: {errors:?}"
    );
}
