//! Exact and asymptotic machinery for labeled classes of the form
//! `SET(S)`, where `S` is a polynomial class of connected components:
//! `A(z) = exp(S(z))` with `S(z) = s_1 z + ... + s_d z^d`.
//!
//! The engine provides the counting recurrence for `a_n = n! [z^n] A(z)`,
//! an exactly uniform random sampler, saddle-point estimates of the
//! coefficients, expected component counts, large-deviation rate functions
//! for component tails, reciprocal-series coefficients, and the transfer
//! between a class and its connected structures.
//!
//! Count tables are built in one pass and immutable afterwards, so they can
//! be shared freely across threads; samplers use a caller-owned random
//! number generator.

use num_bigint::BigUint;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedSub, One, Signed, ToPrimitive, Zero};
use rand_core::RngCore;

/// Small exact rational used for species coefficients.
pub type Rat = Ratio<i64>;

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigUint {
    let mut f = BigUint::one();
    for k in 2..=n {
        f *= BigUint::from(k);
    }
    f
}

/// Binomial coefficient as a big integer.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut res = BigUint::one();
    for j in 0..k {
        res = res * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    res
}

/// Natural logarithm of a positive big integer, accurate to double
/// precision: the top bits give the mantissa and the bit length the scale.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "ln of zero");
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().ln();
    }
    let top = (x >> (bits - 53)).to_f64().unwrap();
    top.ln() + (bits - 53) as f64 * std::f64::consts::LN_2
}

/// `ln n!` via direct summation.
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// A polynomial class of components `S(z) = s_1 z + ... + s_d z^d` with
/// exact non-negative rational coefficients such that every `i! * s_i` is a
/// non-negative integer (the number of labeled components on `i` elements).
///
/// Components are identified by their size and a shape index below
/// [`SpeciesSpec::component_count`]; callers interpret shape indices when
/// realizing concrete structures.
#[derive(Clone, Debug)]
pub struct SpeciesSpec {
    /// `coeffs[k]` is `s_{k+1}`.
    coeffs: Vec<Rat>,
    /// `i! * s_i` for each size, indexed like `coeffs`.
    comp_counts: Vec<BigUint>,
    /// Whether the sizes with nonzero coefficient have gcd 1.
    pub aperiodic: bool,
}

impl SpeciesSpec {
    /// Build a spec from `s_1..s_d`.  Trailing zero coefficients are
    /// trimmed; panics if no coefficient is positive, any is negative, or
    /// some `i! * s_i` is not an integer.
    pub fn new(mut coeffs: Vec<Rat>) -> SpeciesSpec {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        assert!(
            !coeffs.is_empty(),
            "species must have a positive coefficient"
        );
        let mut comp_counts = Vec::with_capacity(coeffs.len());
        let mut gcd = 0usize;
        for (k, c) in coeffs.iter().enumerate() {
            assert!(
                !c.is_negative(),
                "species coefficients must be non-negative"
            );
            let i = k + 1;
            let scaled = c * Rat::new(factorial_i64(i), 1);
            assert!(
                scaled.is_integer(),
                "{i}! * s_{i} must be an integer, got {scaled}"
            );
            let count = scaled.to_integer();
            comp_counts.push(BigUint::from(count as u64));
            if !c.is_zero() {
                gcd = gcd_usize(gcd, i);
            }
        }
        let aperiodic = gcd == 1;
        SpeciesSpec {
            coeffs,
            comp_counts,
            aperiodic,
        }
    }

    /// Degree `d` of the component polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient `s_i` (zero outside `1..=d`).
    pub fn s(&self, i: usize) -> Rat {
        if i >= 1 && i <= self.coeffs.len() {
            self.coeffs[i - 1]
        } else {
            Rat::zero()
        }
    }

    /// The number `i! * s_i` of labeled components on `i` elements.
    pub fn component_count(&self, i: usize) -> BigUint {
        if i >= 1 && i <= self.comp_counts.len() {
            self.comp_counts[i - 1].clone()
        } else {
            BigUint::zero()
        }
    }

    /// Sizes with a nonzero coefficient, ascending.
    pub fn support(&self) -> Vec<usize> {
        (1..=self.degree())
            .filter(|&i| !self.s(i).is_zero())
            .collect()
    }

    /// `S(z)` numerically.
    pub fn s_at(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for i in (1..=self.degree()).rev() {
            acc = acc * z + rat_f64(self.s(i));
        }
        acc * z
    }

    /// `z S'(z) = sum_i i s_i z^i` numerically.
    pub fn zs_prime(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for i in (1..=self.degree()).rev() {
            acc = acc * z + i as f64 * rat_f64(self.s(i));
        }
        acc * z
    }

    /// `lambda(z) = z^2 S''(z) + z S'(z) = sum_i i^2 s_i z^i` numerically.
    pub fn lambda(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        for i in (1..=self.degree()).rev() {
            acc = acc * z + (i * i) as f64 * rat_f64(self.s(i));
        }
        acc * z
    }
}

fn factorial_i64(n: usize) -> i64 {
    (2..=n as i64).product::<i64>().max(1)
}

fn gcd_usize(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd_usize(b % a, a)
    }
}

fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Frozen table of counts `a_n = n! [z^n] exp(S(z))` for `n <= max_n`.
#[derive(Clone, Debug)]
pub struct CountTable {
    spec: SpeciesSpec,
    a: Vec<BigUint>,
}

impl CountTable {
    /// Compute `a_0..a_max_n` by the component-of-a-distinguished-element
    /// recurrence `a_n = sum_i binom(n-1, i-1) * (i! s_i) * a_{n-i}`.
    pub fn new(spec: SpeciesSpec, max_n: usize) -> CountTable {
        let mut a = Vec::with_capacity(max_n + 1);
        a.push(BigUint::one());
        let support = spec.support();
        for n in 1..=max_n {
            let mut total = BigUint::zero();
            for &i in &support {
                if i > n {
                    break;
                }
                total += binomial(n - 1, i - 1) * spec.component_count(i) * &a[n - i];
            }
            a.push(total);
        }
        CountTable { spec, a }
    }

    pub fn spec(&self) -> &SpeciesSpec {
        &self.spec
    }

    pub fn max_n(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self, n: usize) -> &BigUint {
        &self.a[n]
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.a
    }
}

/// Convenience wrapper returning the plain count sequence `a_0..a_n`.
pub fn count_sequence(spec: &SpeciesSpec, max_n: usize) -> Vec<BigUint> {
    CountTable::new(spec.clone(), max_n).a
}

/// The saddle point `c_n`: the unique positive solution of `z S'(z) = n`,
/// computed by bisection on `(0, (n/(d s_d))^{1/d}]` (where the increasing
/// function `z S'(z)` has already reached `n`), to relative tolerance 1e-12.
pub fn saddle_point(spec: &SpeciesSpec, n: usize) -> f64 {
    assert!(n >= 1);
    let d = spec.degree();
    let sd = rat_f64(spec.s(d));
    let mut hi = (n as f64 / (d as f64 * sd)).powf(1.0 / d as f64);
    let mut lo = 0.0f64;
    // Guard against rounding pushing the bound below the root.
    while spec.zs_prime(hi) < n as f64 {
        hi *= 1.0 + 1e-9;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if spec.zs_prime(mid) < n as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Saddle-point estimate of `[z^n] exp(S(z))`:
/// `exp(S(c_n)) / (sqrt(2 pi lambda(c_n)) c_n^n)`, evaluated in log space.
///
/// Meaningful for aperiodic specs; for periodic ones (all component sizes
/// sharing a factor) the exact coefficient vanishes off the lattice and the
/// caller must re-index before comparing.
pub fn asymptotic_estimate(spec: &SpeciesSpec, n: usize) -> f64 {
    let c = saddle_point(spec, n);
    let log =
        spec.s_at(c) - 0.5 * (2.0 * std::f64::consts::PI * spec.lambda(c)).ln() - n as f64 * c.ln();
    log.exp()
}

/// Logarithm of [`asymptotic_estimate`], for sizes where the estimate
/// itself would overflow.
pub fn asymptotic_estimate_ln(spec: &SpeciesSpec, n: usize) -> f64 {
    let c = saddle_point(spec, n);
    spec.s_at(c) - 0.5 * (2.0 * std::f64::consts::PI * spec.lambda(c)).ln() - n as f64 * c.ln()
}

/// Asymptotic expectation `s_t (d s_d)^{-t/d} n^{t/d}` of the number of
/// size-`t` components in a uniform size-`n` structure.
pub fn expected_components(spec: &SpeciesSpec, t: usize, n: usize) -> f64 {
    let d = spec.degree();
    let dsd = d as f64 * rat_f64(spec.s(d));
    rat_f64(spec.s(t)) * dsd.powf(-(t as f64) / d as f64) * (n as f64).powf(t as f64 / d as f64)
}

/// Exact expectation of the number of size-`t` components:
/// `binom(n, t) * t! s_t * a_{n-t} / a_n`.
pub fn exact_expected_components(table: &CountTable, t: usize, n: usize) -> BigRational {
    if t > n || table.spec().component_count(t).is_zero() {
        return BigRational::zero();
    }
    let num = binomial(n, t) * table.spec().component_count(t) * table.a(n - t);
    BigRational::new(num.into(), table.a(n).clone().into())
}

/// The tail constant `c = s_t (d s_d)^{-t/d}` of the size-`t` component
/// count.
fn tail_constant(spec: &SpeciesSpec, t: usize) -> f64 {
    let d = spec.degree();
    let dsd = d as f64 * rat_f64(spec.s(d));
    rat_f64(spec.s(t)) * dsd.powf(-(t as f64) / d as f64)
}

/// Large-deviation rate function `f(r) = (r - 1) c - r ln r` with
/// `c = s_t (d s_d)^{-t/d}`: for `r` below `lambda_0` or above `mu_0` (see
/// [`tail_thresholds`]) the probability that the size-`t` component count
/// deviates from its mean by the factor `r` decays like `exp(f(r) n^{t/d})`.
pub fn rate_function(spec: &SpeciesSpec, t: usize, r: f64) -> f64 {
    assert!(r > 0.0);
    let c = tail_constant(spec, t);
    (r - 1.0) * c - r * r.ln()
}

/// The thresholds `(lambda_0, mu_0)`: the largest value in `(0, 1]` such
/// that the rate function is negative on `(0, lambda_0)`, and the smallest
/// in `[1, inf)` such that it is negative beyond `mu_0`.
///
/// `f` vanishes at `r = 1` and is strictly concave with its maximum at
/// `r* = exp(c - 1)`, which dictates three cases by the sign of `c - 1`.
pub fn tail_thresholds(spec: &SpeciesSpec, t: usize) -> (f64, f64) {
    let c = tail_constant(spec, t);
    let f = |r: f64| (r - 1.0) * c - r * r.ln();
    let r_star = (c - 1.0).exp();
    if (c - 1.0).abs() < 1e-12 {
        return (1.0, 1.0);
    }
    let bisect_root = |mut lo: f64, mut hi: f64| -> f64 {
        // f(lo) < 0 <= f(hi) or f(hi) < 0 <= f(lo); keep the sign change.
        let rising = f(lo) < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    if c < 1.0 {
        // f rises from negative values through zero before r*, then falls
        // back to zero exactly at 1.
        let mut lo = r_star;
        while f(lo) > 0.0 {
            lo *= 0.5;
        }
        (bisect_root(lo, r_star), 1.0)
    } else {
        // Mirror image: f is positive between 1 and a root beyond r*.
        let mut hi = r_star;
        while f(hi) > 0.0 {
            hi *= 2.0;
        }
        (1.0, bisect_root(hi, r_star))
    }
}

/// One component of a sampled structure: its size, a shape index below
/// `component_count(size)`, and the labels it carries in shape order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Component {
    pub size: usize,
    pub shape: u64,
    pub labels: Vec<usize>,
}

/// Draw a uniform labeled `SET(S)` structure on labels `0..n`.
///
/// Component sizes follow the distribution of the component containing a
/// distinguished element, found by drawing a uniform integer below `a_n` and
/// subtracting the recurrence terms; each component's shape is uniform among
/// the `i! s_i` possibilities; finally one uniform permutation of the labels
/// (Fisher-Yates) is dealt out across the components.  The result is
/// exactly uniform over all `a_n` structures.
pub fn sample_multiset<R: RngCore>(table: &CountTable, n: usize, rng: &mut R) -> Vec<Component> {
    sample_multiset_from(table.spec(), table.counts(), n, rng)
}

/// Same as [`sample_multiset`], drawing against a borrowed count sequence
/// (`counts[m]` must equal `a_m` for the spec, for all `m <= n`).
pub(crate) fn sample_multiset_from<R: RngCore>(
    spec: &SpeciesSpec,
    counts: &[BigUint],
    n: usize,
    rng: &mut R,
) -> Vec<Component> {
    assert!(n < counts.len(), "count table too small");
    let support = spec.support();
    let mut sizes: Vec<(usize, u64)> = Vec::new();
    let mut r = n;
    while r > 0 {
        let mut m = uniform_biguint_below(rng, &counts[r]);
        let mut chosen = None;
        for &i in &support {
            if i > r {
                break;
            }
            let term = binomial(r - 1, i - 1) * spec.component_count(i) * &counts[r - i];
            if m < term {
                chosen = Some(i);
                break;
            }
            m -= term;
        }
        let i = chosen.expect("recurrence terms must exhaust the count");
        let shape = uniform_biguint_below(rng, &spec.component_count(i))
            .to_u64()
            .expect("shape index exceeds u64");
        sizes.push((i, shape));
        r -= i;
    }
    let sigma = random_permutation(rng, n);
    let mut components = Vec::with_capacity(sizes.len());
    let mut pos = 0;
    for (size, shape) in sizes {
        components.push(Component {
            size,
            shape,
            labels: sigma[pos..pos + size].to_vec(),
        });
        pos += size;
    }
    components
}

/// Coefficients of the reciprocal series: given `A_0 = 1, A_1, ..., A_s`,
/// returns `b_0..b_s` with `b_0 = 1` and
/// `b_k = -sum_{j=1..k} A_j b_{k-j}`, so that `B(z) A(z) = 1 + O(z^{s+1})`.
pub fn bender_coefficients(a: &[BigRational]) -> Vec<BigRational> {
    assert!(!a.is_empty() && a[0].is_one(), "series must start with 1");
    let mut b: Vec<BigRational> = Vec::with_capacity(a.len());
    b.push(BigRational::one());
    for k in 1..a.len() {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            acc += &a[j] * &b[k - j];
        }
        b.push(-acc);
    }
    b
}

/// Binomial coefficient `C(base, m)` maintained incrementally while `m`
/// advances, batching the small factors `(base-m)/(m+1)` in machine words
/// between exact big-integer updates.
pub(crate) struct SlidingBinomial {
    base: usize,
    m: usize,
    value: BigUint,
}

impl SlidingBinomial {
    pub fn new(base: usize) -> SlidingBinomial {
        SlidingBinomial {
            base,
            m: 0,
            value: BigUint::one(),
        }
    }

    /// Advance to `C(base, target)`; `target` must not decrease.
    pub fn advance_to(&mut self, target: usize) -> &BigUint {
        debug_assert!(target >= self.m && target <= self.base);
        let mut num: u64 = 1;
        let mut den: u64 = 1;
        while self.m < target {
            let f_num = (self.base - self.m) as u64;
            let f_den = (self.m + 1) as u64;
            match (num.checked_mul(f_num), den.checked_mul(f_den)) {
                (Some(nn), Some(dd)) => {
                    num = nn;
                    den = dd;
                }
                _ => {
                    self.value = &self.value * num / den;
                    num = f_num;
                    den = f_den;
                }
            }
            self.m += 1;
        }
        if num != 1 || den != 1 {
            self.value = &self.value * num / den;
        }
        &self.value
    }
}

/// From the factorial-scaled counts of a labeled class (index `n`, with no
/// empty structure, so entry 0 must be 0), compute the counts of its
/// connected structures:
/// `g(n) = g~(n) - sum_{m=1}^{n-1} binom(n-1, m-1) g(m) g~(n-m)`.
pub fn connected_transfer(totals: &[BigUint]) -> Vec<BigUint> {
    assert!(
        totals.is_empty() || totals[0].is_zero(),
        "no empty structure allowed"
    );
    let mut g: Vec<BigUint> = Vec::with_capacity(totals.len());
    for (n, total) in totals.iter().enumerate() {
        if n == 0 {
            g.push(BigUint::zero());
            continue;
        }
        let mut reducible = BigUint::zero();
        let mut binom = SlidingBinomial::new(n - 1);
        for m in 1..n {
            if g[m].is_zero() || totals[n - m].is_zero() {
                continue;
            }
            reducible += binom.advance_to(m - 1) * &g[m] * &totals[n - m];
        }
        g.push(
            total
                .checked_sub(&reducible)
                .expect("connected count must be non-negative"),
        );
    }
    g
}

/// Inverse of [`connected_transfer`]: recover the full class from its
/// connected counts, `g~(n) = g(n) + sum_{m<n} binom(n-1, m-1) g(m) g~(n-m)`.
pub fn exponential_transfer(connected: &[BigUint]) -> Vec<BigUint> {
    let mut totals: Vec<BigUint> = Vec::with_capacity(connected.len());
    for (n, g_n) in connected.iter().enumerate() {
        if n == 0 {
            totals.push(BigUint::zero());
            continue;
        }
        let mut total = g_n.clone();
        for m in 1..n {
            total += binomial(n - 1, m - 1) * &connected[m] * &totals[n - m];
        }
        totals.push(total);
    }
    totals
}

/// Bivariate version of [`connected_transfer`]: rows indexed by size `n`,
/// columns by a marker count, convolved in both coordinates.
pub fn connected_transfer_bivariate(totals: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    assert!(
        totals.is_empty() || totals[0].iter().all(|c| c.is_zero()),
        "no empty structure allowed"
    );
    let mut g: Vec<Vec<BigUint>> = Vec::with_capacity(totals.len());
    for (n, row) in totals.iter().enumerate() {
        if n == 0 {
            g.push(row.clone());
            continue;
        }
        let mut out = row.clone();
        for m in 1..n {
            let b = binomial(n - 1, m - 1);
            for (k, gmk) in g[m].iter().enumerate() {
                if gmk.is_zero() {
                    continue;
                }
                let other = &totals[n - m];
                for (l, t) in other.iter().enumerate() {
                    if k + l < out.len() && !t.is_zero() {
                        let prod = &b * gmk * t;
                        out[k + l] = out[k + l]
                            .checked_sub(&prod)
                            .expect("connected count must be non-negative");
                    }
                }
            }
        }
        g.push(out);
    }
    g
}

/// Exact polynomial data for second-order coefficient expansions of a
/// specific species: the polynomials `R`, `Q`, `T` tabulated per family.
#[derive(Clone, Debug)]
pub struct ExpansionData {
    /// Coefficients of `R`, constant term first; `R(0) = 0`.
    pub r: Vec<Rat>,
    /// Coefficients of `Q`, degree at most `d - 1`.
    pub q: Vec<Rat>,
    /// Coefficients of `T`, degree at most `d - 1`.
    pub t: Vec<Rat>,
}

impl ExpansionData {
    pub fn new(spec: &SpeciesSpec, r: Vec<Rat>, q: Vec<Rat>, t: Vec<Rat>) -> ExpansionData {
        let d = spec.degree();
        assert!(r.first().is_none_or(|c| c.is_zero()), "R(0) must vanish");
        assert!(r.len() <= d + 1, "deg R <= d");
        assert!(q.len() <= d, "deg Q <= d - 1");
        assert!(t.len() <= d, "deg T <= d - 1");
        ExpansionData { r, q, t }
    }
}

/// Evaluate a polynomial given by exact rational coefficients (constant
/// term first) at a floating-point argument.
pub fn eval_poly(coeffs: &[Rat], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + rat_f64(c);
    }
    acc
}

/// Uniform big integer in `[0, bound)` by rejection on `bound.bits()`
/// random bits.
pub(crate) fn uniform_biguint_below<R: RngCore>(rng: &mut R, bound: &BigUint) -> BigUint {
    assert!(!bound.is_zero());
    if bound.is_one() {
        return BigUint::zero();
    }
    let bits = bound.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let mask = 0xffu8 >> (nbytes as u64 * 8 - bits);
    let mut buf = vec![0u8; nbytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[nbytes - 1] &= mask;
        let candidate = BigUint::from_bytes_le(&buf);
        if candidate < *bound {
            return candidate;
        }
    }
}

/// Uniform integer in `[0, k)` without modulo bias.
pub(crate) fn uniform_below<R: RngCore>(rng: &mut R, k: usize) -> usize {
    assert!(k > 0);
    if k == 1 {
        return 0;
    }
    let k64 = k as u64;
    let zone = (u64::MAX / k64) * k64;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return (x % k64) as usize;
        }
    }
}

/// Uniform permutation of `0..n` by Fisher-Yates.
pub(crate) fn random_permutation<R: RngCore>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = uniform_below(rng, i + 1);
        v.swap(i, j);
    }
    v
}
