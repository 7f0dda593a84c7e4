//! Asymptotic equivalents and statistical diagnostics for the counting
//! sequences of [`crate::enumeration`].
//!
//! The exact tables grow like `n^{n/6}`, far beyond floating-point range, so
//! every estimate here is evaluated and returned in natural-log scale.  The
//! module provides
//!
//! * first-order closed-form equivalents for each counting sequence
//!   ([`asymp_coefficient`]), together with the two-sided bounds available
//!   for the total subgroup count ([`h_count_bounds_ln`]),
//! * predicted expected isomorphism-type statistics ([`expected_type`]),
//! * large-deviation decay exponents for those statistics
//!   ([`deviation_exponent`]),
//! * a truncation diagnostic comparing connected counts against the
//!   reciprocal-series correction of the pair totals ([`bender_diagnostic`]),
//! * exact probability tables with their predicted decay-scale curves
//!   ([`probability_reports`]).
//!
//! Estimates of the last two kinds are diagnostics: the decay scales carry
//! unknown multiplicative constants, so callers should plot or report them
//! next to exact values rather than assert tolerances against them.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::enumeration::{
    spec_tau2, spec_tau3, spec_tau3_loopfree, spec_tau3_permutational, FreeTables, SubgroupCounts,
};
use crate::species::{
    bender_coefficients, factorial, ln_biguint, ln_factorial, rate_function, SpeciesSpec,
};

/// Errors from asymptotic evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsympError {
    /// The requested size is outside the parity/divisibility support of the
    /// family (for example an odd size for a loop-free sequence).
    #[error("size {n} is not valid for family {family}: requires {requirement}")]
    InvalidSize {
        family: &'static str,
        n: usize,
        requirement: &'static str,
    },
    /// A deviation factor outside its admissible range.
    #[error("deviation factor {value} is invalid: requires {requirement}")]
    InvalidFactor {
        value: f64,
        requirement: &'static str,
    },
    /// The requested statistic is identically zero on the family, so no
    /// deviation bound applies.
    #[error("statistic {statistic} is identically zero for family {family}")]
    DegenerateStatistic {
        statistic: &'static str,
        family: &'static str,
    },
}

/// The counting sequences with a displayed first-order equivalent.
///
/// "Pair totals" families estimate the exponential-series coefficient of all
/// structure pairs (connected or not); "connected" families estimate the
/// coefficient of connected pairs, which shares the same first-order form.
/// The two "subgroups" families estimate subgroup counts directly (not
/// series coefficients).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AsympFamily {
    /// Coefficient of the involution-structure series (`a`-edge sides).
    Tau2,
    /// Coefficient of the order-3 structure series (`b`-edge sides).
    Tau3,
    /// Coefficient of the permutational order-3 series (no isolated edges).
    Tau3Permutational,
    /// Coefficient of the series of structure pairs.
    PairTotals,
    /// Coefficient of the series of connected structure pairs.
    Connected,
    /// Number of finite-index subgroups of a given index.
    SubgroupsFiniteIndex,
    /// Coefficient of the loop-free involution series (even sizes only).
    Tau2Loopfree,
    /// Coefficient of the loop-free order-3 series (even sizes only).
    Tau3Loopfree,
    /// Coefficient of the loop-free pair series (even sizes only).
    PairTotalsLoopfree,
    /// Coefficient of the connected loop-free pair series (even sizes only).
    ConnectedLoopfree,
    /// Coefficient of the triangles-only order-3 series (multiples of 3).
    Tau3TrianglesOnly,
    /// Coefficient of the loop-free permutational pair series (multiples
    /// of 6).
    PairTotalsFreeFiniteIndex,
    /// Number of free finite-index subgroups of a given index (multiples
    /// of 6).
    SubgroupsFreeFiniteIndex,
}

impl AsympFamily {
    pub fn name(self) -> &'static str {
        match self {
            AsympFamily::Tau2 => "tau2",
            AsympFamily::Tau3 => "tau3",
            AsympFamily::Tau3Permutational => "tau3-permutational",
            AsympFamily::PairTotals => "pair-totals",
            AsympFamily::Connected => "connected",
            AsympFamily::SubgroupsFiniteIndex => "subgroups-finite-index",
            AsympFamily::Tau2Loopfree => "tau2-loop-free",
            AsympFamily::Tau3Loopfree => "tau3-loop-free",
            AsympFamily::PairTotalsLoopfree => "pair-totals-loop-free",
            AsympFamily::ConnectedLoopfree => "connected-loop-free",
            AsympFamily::Tau3TrianglesOnly => "tau3-triangles-only",
            AsympFamily::PairTotalsFreeFiniteIndex => "pair-totals-free-finite-index",
            AsympFamily::SubgroupsFreeFiniteIndex => "subgroups-free-finite-index",
        }
    }

    /// Sizes in the support of the family are the positive multiples of
    /// this modulus.
    fn modulus(self) -> usize {
        match self {
            AsympFamily::Tau2
            | AsympFamily::Tau3
            | AsympFamily::Tau3Permutational
            | AsympFamily::PairTotals
            | AsympFamily::Connected
            | AsympFamily::SubgroupsFiniteIndex => 1,
            AsympFamily::Tau2Loopfree
            | AsympFamily::Tau3Loopfree
            | AsympFamily::PairTotalsLoopfree
            | AsympFamily::ConnectedLoopfree => 2,
            AsympFamily::Tau3TrianglesOnly => 3,
            AsympFamily::PairTotalsFreeFiniteIndex | AsympFamily::SubgroupsFreeFiniteIndex => 6,
        }
    }

    /// Whether the estimate targets a series coefficient (count divided by
    /// `n!`) rather than a subgroup count.
    pub fn is_series_coefficient(self) -> bool {
        !matches!(
            self,
            AsympFamily::SubgroupsFiniteIndex | AsympFamily::SubgroupsFreeFiniteIndex
        )
    }

    fn check_size(self, n: usize) -> Result<(), AsympError> {
        let modulus = self.modulus();
        if n == 0 || !n.is_multiple_of(modulus) {
            let requirement = match modulus {
                1 => "a positive size",
                2 => "a positive even size",
                3 => "a positive multiple of 3",
                _ => "a positive multiple of 6",
            };
            return Err(AsympError::InvalidSize {
                family: self.name(),
                n,
                requirement,
            });
        }
        Ok(())
    }
}

/// Natural log of the first-order asymptotic equivalent for the family at
/// size `n`.
///
/// Each formula is the closed displayed form for its sequence; families
/// supported only on even sizes or multiples of 3 or 6 are evaluated through
/// the substitution `m = n / modulus` and reject other sizes.  The estimates
/// are first-order equivalents: the relative error vanishes as `n` grows but
/// is not controlled at small sizes.
pub fn asymp_coefficient(family: AsympFamily, n: usize) -> Result<f64, AsympError> {
    family.check_size(n)?;
    let ln2 = std::f64::consts::LN_2;
    Ok(match family {
        AsympFamily::Tau2 => {
            let m = n as f64;
            -0.25 - ln2 - 0.5 * (PI * m).ln() - 0.5 * m * m.ln() + 0.5 * m + m.sqrt()
        }
        AsympFamily::Tau3 => {
            let m = n as f64;
            -2.0 / 9.0 - 0.5 * (6.0 * PI * m).ln() - m / 3.0 * m.ln()
                + m / 3.0
                + m.powf(2.0 / 3.0)
                + m.cbrt() / 3.0
        }
        AsympFamily::Tau3Permutational => {
            let m = n as f64;
            -0.5 * (6.0 * PI * m).ln() - m / 3.0 * m.ln() + m / 3.0 + m.cbrt()
        }
        AsympFamily::PairTotals | AsympFamily::Connected => {
            let m = n as f64;
            -17.0 / 36.0 - 0.5 * (12.0 * PI * m).ln() + m / 6.0 * m.ln() - m / 6.0
                + m.powf(2.0 / 3.0)
                + m.sqrt()
                + m.cbrt() / 3.0
        }
        AsympFamily::SubgroupsFiniteIndex => {
            let m = n as f64;
            -0.25 + 0.5 * m.ln() - 0.5 * (12.0 * PI).ln() + m / 6.0 * m.ln() - m / 6.0
                + m.sqrt()
                + m.cbrt()
        }
        AsympFamily::Tau2Loopfree => {
            let m = (n / 2) as f64;
            -0.5 * (2.0 * PI * m).ln() - m * m.ln() + (1.0 - ln2) * m
        }
        AsympFamily::Tau3Loopfree => {
            let m = (n / 2) as f64;
            4.0 / 9.0 - 0.5 * (12.0 * PI * m).ln() - 2.0 / 3.0 * m * m.ln()
                + 2.0 / 3.0 * (1.0 - ln2) * m
                + 2f64.powf(2.0 / 3.0) * m.powf(2.0 / 3.0)
                - 2f64.powf(4.0 / 3.0) / 3.0 * m.cbrt()
        }
        AsympFamily::PairTotalsLoopfree | AsympFamily::ConnectedLoopfree => {
            let m = (n / 2) as f64;
            4.0 / 9.0 - 0.5 * (6.0 * PI).ln() + m / 3.0 * m.ln() - (1.0 - ln2) / 3.0 * m
                + 2f64.powf(2.0 / 3.0) * m.powf(2.0 / 3.0)
                - 2f64.powf(4.0 / 3.0) / 3.0 * m.cbrt()
                - 0.5 * m.ln()
        }
        AsympFamily::Tau3TrianglesOnly => {
            let m = (n / 3) as f64;
            -0.5 * (2.0 * PI * m).ln() - m * m.ln() + (1.0 - 3f64.ln()) * m
        }
        AsympFamily::PairTotalsFreeFiniteIndex => {
            let m = (n / 6) as f64;
            -0.5 * (2.0 * PI * m).ln() + m * m.ln() - (1.0 - 6f64.ln()) * m
        }
        AsympFamily::SubgroupsFreeFiniteIndex => {
            let m = (n / 6) as f64;
            0.5 * m.ln() - 0.5 * (2.0 * PI).ln() + m * m.ln() - (1.0 - 6f64.ln()) * m
        }
    })
}

/// Natural-log two-sided bounds `(ln V_n, ln 2 V_n)` for the total number of
/// size-`n` subgroups, where `V_n` is `n` times the connected-pair
/// coefficient estimate.  Only the bracket is known; the ratio inside it is
/// reported, never asserted.
pub fn h_count_bounds_ln(n: usize) -> Result<(f64, f64), AsympError> {
    let v = (n as f64).ln() + asymp_coefficient(AsympFamily::Connected, n)?;
    Ok((v, v + std::f64::consts::LN_2))
}

/// Ratio `exact / estimate` for a family at size `n`, where `count` is the
/// exact raw count for that family: the labeled-structure count for series
/// families (divided internally by `n!`), or the subgroup count for the
/// subgroup families.
pub fn exact_asymp_ratio(
    family: AsympFamily,
    n: usize,
    count: &BigUint,
) -> Result<f64, AsympError> {
    let estimate = asymp_coefficient(family, n)?;
    let mut exact_ln = ln_biguint(count);
    if family.is_series_coefficient() {
        exact_ln -= ln_factorial(n);
    }
    Ok((exact_ln - estimate).exp())
}

/// Subgroup ensembles whose isomorphism-type statistics have displayed
/// predictions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StatFamily {
    All,
    FiniteIndex,
    Free,
}

impl StatFamily {
    pub fn name(self) -> &'static str {
        match self {
            StatFamily::All => "all",
            StatFamily::FiniteIndex => "finite-index",
            StatFamily::Free => "free",
        }
    }
}

/// Leading-order predictions for the expected isomorphism-type data of a
/// uniform size-`n` subgroup: the number of degree-2 generators (`a`-loops),
/// degree-3 generators (`b`-loops), isolated `b`-edges, and the free rank.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct ExpectedType {
    pub a_loops: f64,
    pub b_loops: f64,
    pub isolated_edges: f64,
    pub rank: f64,
}

/// Expected isomorphism-type statistics at size `n`, to leading order.
///
/// The free family forces both loop statistics to zero; its edge and rank
/// predictions hold for the even sizes that dominate the family and extend
/// to odd sizes at the same leading order.
pub fn expected_type(family: StatFamily, n: usize) -> ExpectedType {
    let m = n as f64;
    match family {
        StatFamily::All => ExpectedType {
            a_loops: m.sqrt(),
            b_loops: m.cbrt(),
            isolated_edges: m.powf(2.0 / 3.0),
            rank: m / 6.0 - m.powf(2.0 / 3.0) / 3.0,
        },
        StatFamily::FiniteIndex => ExpectedType {
            a_loops: m.sqrt(),
            b_loops: m.cbrt(),
            isolated_edges: 0.0,
            rank: m / 6.0 - m.sqrt() / 2.0,
        },
        StatFamily::Free => ExpectedType {
            a_loops: 0.0,
            b_loops: 0.0,
            isolated_edges: m.powf(2.0 / 3.0),
            rank: (m - m.powf(2.0 / 3.0)) / 6.0,
        },
    }
}

/// Graph statistics with large-deviation bounds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Statistic {
    /// Number of `a`-loops.
    ALoops,
    /// Number of `b`-loops.
    BLoops,
    /// Number of isolated `b`-edges.
    IsolatedEdges,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::ALoops => "a-loops",
            Statistic::BLoops => "b-loops",
            Statistic::IsolatedEdges => "isolated-edges",
        }
    }
}

/// Which tail of the distribution is bounded: `Below(lambda)` bounds the
/// probability that the statistic falls below `lambda` times its mean scale
/// (`0 < lambda < 1`), `Above(mu)` the probability that it exceeds `mu`
/// times that scale (`mu > 1`).
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Side {
    Below(f64),
    Above(f64),
}

/// Parameters of a tail bound of the form `O(gamma^(n^scale))`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct DeviationBound {
    /// Decay base in `(0, 1)` (approaching 1 as the factor approaches 1).
    pub gamma: f64,
    /// The tail probability decays like `gamma` to the power `n^scale`.
    pub scale: f64,
    /// `ln(gamma) * n^scale`, the log of the decay factor at the given `n`.
    pub ln_probability_bound: f64,
}

/// Large-deviation tail bound for a statistic of a uniform size-`n` draw
/// from the family.
///
/// The bound comes from the component-count rate function of the underlying
/// structure ensemble: a deviation by factor `r` from the mean scale
/// `n^scale` has probability `O(exp(f(r) n^scale))` with
/// `f(r) = (r-1)c - r ln r`.  Statistics that are identically zero on a
/// family (isolated edges at finite index, loops on the free family) are
/// rejected.
pub fn deviation_exponent(
    family: StatFamily,
    statistic: Statistic,
    side: Side,
    n: usize,
) -> Result<DeviationBound, AsympError> {
    let degenerate = |statistic: Statistic| AsympError::DegenerateStatistic {
        statistic: statistic.name(),
        family: family.name(),
    };
    let (spec, t): (SpeciesSpec, usize) = match (family, statistic) {
        (StatFamily::All, Statistic::ALoops) => (spec_tau2(), 1),
        (StatFamily::All, Statistic::BLoops) => (spec_tau3(), 1),
        (StatFamily::All, Statistic::IsolatedEdges) => (spec_tau3(), 2),
        (StatFamily::FiniteIndex, Statistic::ALoops) => (spec_tau2(), 1),
        (StatFamily::FiniteIndex, Statistic::BLoops) => (spec_tau3_permutational(), 1),
        (StatFamily::FiniteIndex, Statistic::IsolatedEdges) => {
            return Err(degenerate(statistic));
        }
        (StatFamily::Free, Statistic::ALoops | Statistic::BLoops) => {
            return Err(degenerate(statistic));
        }
        (StatFamily::Free, Statistic::IsolatedEdges) => (spec_tau3_loopfree(), 2),
    };
    let r = match side {
        Side::Below(lambda) => {
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(AsympError::InvalidFactor {
                    value: lambda,
                    requirement: "0 < lambda < 1",
                });
            }
            lambda
        }
        Side::Above(mu) => {
            if mu.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
                return Err(AsympError::InvalidFactor {
                    value: mu,
                    requirement: "mu > 1",
                });
            }
            mu
        }
    };
    let f = rate_function(&spec, t, r);
    let scale = t as f64 / spec.degree() as f64;
    Ok(DeviationBound {
        gamma: f.exp(),
        scale,
        ln_probability_bound: f * (n as f64).powf(scale),
    })
}

/// Convert a ratio of (possibly huge) non-negative integers to `f64` through
/// log space, avoiding overflow of either side.
pub fn big_ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "ratio denominator is zero");
    if num.is_zero() {
        return 0.0;
    }
    (ln_biguint(num) - ln_biguint(den)).exp()
}

/// Convert an exact rational with possibly huge numerator and denominator to
/// `f64` through log space.
pub fn big_rational_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let sign = if r.is_negative() { -1.0 } else { 1.0 };
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    sign * (ln_biguint(num) - ln_biguint(den)).exp()
}

/// Truncation diagnostic for the connected-count correction series.
#[derive(Clone, Debug)]
pub struct BenderReport {
    pub n: usize,
    /// Number of correction terms used.
    pub s: usize,
    /// The correction coefficients `b_0 .. b_{s-1}` (reciprocal series of
    /// `1 +` the pair-total series).
    pub coefficients: Vec<f64>,
    /// Ratio of the `s`-term truncation to the exact connected coefficient;
    /// approaches 1 as `n` grows.
    pub truncation_over_exact: f64,
    /// Exact connected coefficient minus the truncation, divided by the
    /// pair-total coefficient at `n - s`.  Bounded, and for `s = 1` it
    /// approaches the next coefficient `b_1`.
    pub normalized_residual: f64,
}

/// Compare the exact connected series against the `s`-term correction built
/// from the pair totals.
///
/// `pair_totals[k]` and `connected[k]` are labeled counts at size `k` (the
/// series coefficients are these divided by `k!`).  The truncation is
/// `sum_{k < s} b_k * pt(n-k)` in coefficient scale, with `b_k` the
/// reciprocal-series coefficients of `1 + PT(z)`; the residual against the
/// exact connected coefficient is normalized by the coefficient at `n - s`.
/// All arithmetic is exact until the final conversion to `f64`.
pub fn bender_diagnostic(
    pair_totals: &[BigUint],
    connected: &[BigUint],
    n: usize,
    s: usize,
) -> BenderReport {
    assert!(
        (1..=4).contains(&s),
        "supported truncation orders are 1..=4"
    );
    assert!(n > s, "need n > s");
    assert!(
        n < pair_totals.len() && n < connected.len(),
        "tables too short for n = {n}"
    );
    let coeff = |table: &[BigUint], k: usize| {
        BigRational::new(table[k].clone().into(), factorial(k).into())
    };
    let mut series = Vec::with_capacity(s + 1);
    series.push(BigRational::one());
    for k in 1..=s {
        series.push(coeff(pair_totals, k));
    }
    let b = bender_coefficients(&series);
    let mut truncation = BigRational::zero();
    for (k, bk) in b.iter().enumerate().take(s) {
        truncation += bk * coeff(pair_totals, n - k);
    }
    let exact = coeff(connected, n);
    let residual = &exact - &truncation;
    let tail = coeff(pair_totals, n - s);
    BenderReport {
        n,
        s,
        coefficients: b.iter().take(s).map(big_rational_f64).collect(),
        truncation_over_exact: big_rational_f64(&(&truncation / &exact)),
        normalized_residual: big_rational_f64(&(&residual / &tail)),
    }
}

/// One row of the probability report: exact fractions next to the predicted
/// decay-scale curves.  The curves carry unknown constants — they indicate
/// shape only.
#[derive(Clone, Copy, Debug)]
pub struct ProbabilityRow {
    pub n: usize,
    /// Exact fraction of size-`n` subgroups of finite index.
    pub finite_index_fraction: f64,
    /// Predicted decay scale `exp(-n^(2/3) - n^(1/3)/3)` for that fraction.
    pub finite_index_scale: f64,
    /// Exact fraction of size-`n` subgroups that are free.
    pub free_fraction: f64,
    /// Predicted decay scale `exp(-n^(1/2) - n^(1/3))` (even-size form).
    pub free_scale: f64,
    /// Exact fraction of size-`n` free subgroups whose graph is not
    /// cyclically reduced.
    pub non_reduced_free_fraction: f64,
    /// Predicted decay scale `(n/2)^(-1/3)` for that fraction.
    pub non_reduced_scale: f64,
}

/// Exact probability table over `lo..=hi` with scale curves for visual
/// comparison.
pub fn probability_reports(
    counts: &SubgroupCounts,
    free: &FreeTables,
    lo: usize,
    hi: usize,
) -> Vec<ProbabilityRow> {
    assert!(lo >= 1 && lo <= hi);
    assert!(hi <= counts.max_n(), "subgroup counts table too short");
    assert!(hi < free.g.len(), "free tables too short");
    (lo..=hi)
        .map(|n| {
            let m = n as f64;
            let one_loop = free.g1(n);
            let loop_free_rooted = BigUint::from(n) * &free.g[n];
            let non_reduced_denominator = &one_loop + &loop_free_rooted;
            let non_reduced_free_fraction = if non_reduced_denominator.is_zero() {
                0.0
            } else {
                big_ratio_f64(&one_loop, &non_reduced_denominator)
            };
            ProbabilityRow {
                n,
                finite_index_fraction: big_ratio_f64(&counts.finite_index[n], &counts.all[n]),
                finite_index_scale: (-m.powf(2.0 / 3.0) - m.cbrt() / 3.0).exp(),
                free_fraction: big_ratio_f64(&counts.free[n], &counts.all[n]),
                free_scale: (-m.sqrt() - m.cbrt()).exp(),
                non_reduced_free_fraction,
                non_reduced_scale: (m / 2.0).powf(-1.0 / 3.0),
            }
        })
        .collect()
}
