//! Exact counting tables for subgroups of the modular group.
//!
//! Everything is kept in the factorial scaling `a(n) = n! [z^n] A(z)`, in
//! which all the recurrences used here have integer coefficients.  The five
//! subgroup families are:
//!
//! * `all` — every finitely generated subgroup, counted by size,
//! * `finite_index` — subgroups of index `n`,
//! * `cr_free` — cyclically reduced free subgroups (loop-free proper graphs),
//! * `free` — all free subgroups,
//! * `free_finite_index` — free subgroups of finite index (multiples of 6).
//!
//! Connected counts come from the exponential-to-connected transfer in
//! [`crate::species`]; first moments of loop/edge statistics ride along in a
//! fused transfer so that large sizes never need bivariate tables.

use std::fs;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{CheckedSub, One, Zero};

use crate::species::{
    connected_transfer_bivariate, count_sequence, factorial, Rat, SlidingBinomial, SpeciesSpec,
};

/// Component class of `tau_2`-structures: singletons and unordered pairs.
pub fn spec_tau2() -> SpeciesSpec {
    SpeciesSpec::new(vec![Rat::one(), Rat::new(1, 2)])
}

/// Component class of `tau_3`-structures: singletons, ordered pairs, and
/// cyclically oriented triples.
pub fn spec_tau3() -> SpeciesSpec {
    SpeciesSpec::new(vec![Rat::one(), Rat::one(), Rat::new(1, 3)])
}

/// `tau_3`-structures that are permutations of order dividing 3 (no
/// isolated pairs): singletons and oriented triples.
pub fn spec_tau3_permutational() -> SpeciesSpec {
    SpeciesSpec::new(vec![Rat::one(), Rat::zero(), Rat::new(1, 3)])
}

/// Loop-free `tau_2`-structures: perfect matchings.
pub fn spec_tau2_loopfree() -> SpeciesSpec {
    SpeciesSpec::new(vec![Rat::zero(), Rat::new(1, 2)])
}

/// Loop-free `tau_3`-structures: ordered pairs and oriented triples.
pub fn spec_tau3_loopfree() -> SpeciesSpec {
    SpeciesSpec::new(vec![Rat::zero(), Rat::one(), Rat::new(1, 3)])
}

/// Loop-free permutational `tau_3`-structures: oriented triples only.
pub fn spec_tau3_perm_loopfree() -> SpeciesSpec {
    SpeciesSpec::new(vec![Rat::zero(), Rat::zero(), Rat::new(1, 3)])
}

/// `t2(n, l)`: involutions on `n` points with `l` fixed points, for
/// `n <= max_n` (row `n` has entries `l = 0..=n`).
pub fn tau2_loops_table(max_n: usize) -> Vec<Vec<BigUint>> {
    let mut t: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut row = vec![BigUint::zero(); n + 1];
        if n == 0 {
            row[0] = BigUint::one();
        } else {
            for l in 0..=n {
                let mut v = BigUint::zero();
                if l >= 1 {
                    v += &t[n - 1][l - 1];
                }
                if n >= 2 && l <= n - 2 {
                    v += BigUint::from(n - 1) * &t[n - 2][l];
                }
                row[l] = v;
            }
        }
        t.push(row);
    }
    t
}

/// `t3(n, l)`: `tau_3`-structures on `n` points with `l` singletons.
pub fn tau3_loops_table(max_n: usize) -> Vec<Vec<BigUint>> {
    let mut t: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut row = vec![BigUint::zero(); n + 1];
        if n == 0 {
            row[0] = BigUint::one();
        } else {
            for l in 0..=n {
                let mut v = BigUint::zero();
                if l >= 1 {
                    v += &t[n - 1][l - 1];
                }
                if n >= 2 && l <= n - 2 {
                    v += BigUint::from(2 * (n - 1)) * &t[n - 2][l];
                }
                if n >= 3 && l <= n - 3 {
                    v += BigUint::from((n - 1) * (n - 2)) * &t[n - 3][l];
                }
                row[l] = v;
            }
        }
        t.push(row);
    }
    t
}

/// `t3(n, l, k)`: `tau_3`-structures with `l` singletons and `k` isolated
/// ordered pairs (entry `[n][l][k]`, `k <= n/2`).
pub fn tau3_loops_edges_table(max_n: usize) -> Vec<Vec<Vec<BigUint>>> {
    let mut t: Vec<Vec<Vec<BigUint>>> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut rows = vec![vec![BigUint::zero(); n / 2 + 1]; n + 1];
        if n == 0 {
            rows[0][0] = BigUint::one();
        } else {
            for l in 0..=n {
                for k in 0..=n / 2 {
                    let mut v = BigUint::zero();
                    if l >= 1 && k < t[n - 1][l - 1].len() {
                        v += &t[n - 1][l - 1][k];
                    }
                    if n >= 2 && l <= n - 2 && k >= 1 && k - 1 < t[n - 2][l].len() {
                        v += BigUint::from(2 * (n - 1)) * &t[n - 2][l][k - 1];
                    }
                    if n >= 3 && l <= n - 3 && k < t[n - 3][l].len() {
                        v += BigUint::from((n - 1) * (n - 2)) * &t[n - 3][l][k];
                    }
                    rows[l][k] = v;
                }
            }
        }
        t.push(rows);
    }
    t
}

/// `t3_loopfree(n, k)`: loop-free `tau_3`-structures with `k` isolated
/// ordered pairs.
pub fn tau3_loopfree_edges_table(max_n: usize) -> Vec<Vec<BigUint>> {
    let mut t: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut row = vec![BigUint::zero(); n / 2 + 1];
        if n == 0 {
            row[0] = BigUint::one();
        } else {
            for k in 0..=n / 2 {
                let mut v = BigUint::zero();
                if n >= 2 && k >= 1 && k - 1 < t[n - 2].len() {
                    v += BigUint::from(2 * (n - 1)) * &t[n - 2][k - 1];
                }
                if n >= 3 && k < t[n - 3].len() {
                    v += BigUint::from((n - 1) * (n - 2)) * &t[n - 3][k];
                }
                row[k] = v;
            }
        }
        t.push(row);
    }
    t
}

/// Pairs of structure tables convolved over the loop statistic:
/// `g~pr(n, l) = sum_i t2(n, i) t3(n, l - i)` (row `n` has `l = 0..=2n`;
/// row 0 is zeroed since a graph has at least one vertex).
pub fn product_loops_table(max_n: usize) -> Vec<Vec<BigUint>> {
    let t2 = tau2_loops_table(max_n);
    let t3 = tau3_loops_table(max_n);
    let mut g: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut row = vec![BigUint::zero(); 2 * n + 1];
        if n > 0 {
            for i in 0..=n {
                if t2[n][i].is_zero() {
                    continue;
                }
                for j in 0..=n {
                    if !t3[n][j].is_zero() {
                        row[i + j] += &t2[n][i] * &t3[n][j];
                    }
                }
            }
        }
        g.push(row);
    }
    g
}

/// The bivariate tables `(g~pr(n, l), gpr(n, l))`: all proper cyclically
/// reduced graph structures and the connected ones, by loop count.
pub fn gpr_loops_tables(max_n: usize) -> (Vec<Vec<BigUint>>, Vec<Vec<BigUint>>) {
    let totals = product_loops_table(max_n);
    let connected = connected_transfer_bivariate(&totals);
    (totals, connected)
}

/// The bivariate tables `(g~(0)(n, k), g(0)(n, k))` of loop-free structures
/// by isolated-pair count.
pub fn free_edges_tables(max_n: usize) -> (Vec<Vec<BigUint>>, Vec<Vec<BigUint>>) {
    let t2 = count_sequence(&spec_tau2_loopfree(), max_n);
    let t3 = tau3_loopfree_edges_table(max_n);
    let mut totals: Vec<Vec<BigUint>> = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let mut row = vec![BigUint::zero(); n / 2 + 1];
        if n > 0 && !t2[n].is_zero() {
            for k in 0..=n / 2 {
                if !t3[n][k].is_zero() {
                    row[k] = &t2[n] * &t3[n][k];
                }
            }
        }
        totals.push(row);
    }
    let connected = connected_transfer_bivariate(&totals);
    (totals, connected)
}

/// Connected transfer fused with its first-moment companion.  `totals[n]`
/// counts all structures and `moments[n]` sums a per-structure statistic
/// that adds over components; the result `(g, mg)` restricts both to
/// connected structures:
///
/// ```text
/// g(n)  = totals(n)  - sum_{m=1}^{n-1} C(n-1, m-1) g(m)  totals(n-m)
/// mg(n) = moments(n) - sum_{m=1}^{n-1} C(n,   m)   mg(m) totals(n-m)
/// ```
pub fn connected_transfer_with_moment(
    totals: &[BigUint],
    moments: &[BigUint],
) -> (Vec<BigUint>, Vec<BigUint>) {
    assert_eq!(totals.len(), moments.len());
    assert!(
        totals.is_empty() || totals[0].is_zero(),
        "no empty structure allowed"
    );
    let mut g: Vec<BigUint> = Vec::with_capacity(totals.len());
    let mut mg: Vec<BigUint> = Vec::with_capacity(totals.len());
    for n in 0..totals.len() {
        if n == 0 {
            g.push(BigUint::zero());
            mg.push(BigUint::zero());
            continue;
        }
        let mut red_g = BigUint::zero();
        let mut red_m = BigUint::zero();
        let mut binom_g = SlidingBinomial::new(n - 1);
        let mut binom_m = SlidingBinomial::new(n);
        for m in 1..n {
            let t = &totals[n - m];
            if t.is_zero() {
                continue;
            }
            if !g[m].is_zero() {
                red_g += binom_g.advance_to(m - 1) * &g[m] * t;
            }
            if !mg[m].is_zero() {
                red_m += binom_m.advance_to(m) * &mg[m] * t;
            }
        }
        g.push(
            totals[n]
                .checked_sub(&red_g)
                .expect("connected count must be non-negative"),
        );
        mg.push(
            moments[n]
                .checked_sub(&red_m)
                .expect("connected moment must be non-negative"),
        );
    }
    (g, mg)
}

/// Above this size the transfers switch from the direct recurrences to the
/// multi-modular engine, which is quasi-linear in the table's bit size.
const FAST_TRANSFER_THRESHOLD: usize = 512;

/// Connected transfer choosing the evaluation strategy by size.
fn connected_transfer_auto(totals: &[BigUint]) -> Vec<BigUint> {
    if totals.len() > FAST_TRANSFER_THRESHOLD {
        crate::fastconv::fast_fused_connected_transfer(totals, None).0
    } else {
        crate::species::connected_transfer(totals)
    }
}

/// Fused connected transfer choosing the evaluation strategy by size.
fn fused_transfer_auto(totals: &[BigUint], moments: &[BigUint]) -> (Vec<BigUint>, Vec<BigUint>) {
    if totals.len() > FAST_TRANSFER_THRESHOLD {
        let (g, mg) = crate::fastconv::fast_fused_connected_transfer(totals, Some(moments));
        (g, mg.unwrap())
    } else {
        connected_transfer_with_moment(totals, moments)
    }
}

fn exact_div(num: BigUint, den: &BigUint, what: &str) -> BigUint {
    let (q, r) = num.div_rem(den);
    assert!(
        r.is_zero(),
        "table corruption: {what} is not exactly divisible"
    );
    q
}

/// Elementwise product with entry 0 zeroed (a graph has at least one
/// vertex, so the combined class has no empty structure).
fn product_totals(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    (0..a.len())
        .map(|n| {
            if n == 0 {
                BigUint::zero()
            } else {
                &a[n] * &b[n]
            }
        })
        .collect()
}

/// Univariate tables for the family of all subgroups: structure counts,
/// connected counts, and the first moment of the total loop number.
pub struct GeneralTables {
    pub t2: Vec<BigUint>,
    pub t3: Vec<BigUint>,
    pub g_tilde: Vec<BigUint>,
    pub g: Vec<BigUint>,
    /// `mg[n] = sum_l l * gpr(n, l)`.
    pub mg: Vec<BigUint>,
}

impl GeneralTables {
    pub fn new(max_n: usize) -> GeneralTables {
        Self::new_cached(max_n, None)
    }

    pub fn new_cached(max_n: usize, cache_dir: Option<&Path>) -> GeneralTables {
        let t2 = count_sequence(&spec_tau2(), max_n);
        let t3 = count_sequence(&spec_tau3(), max_n);
        let g_tilde = product_totals(&t2, &t3);
        let (g, mg) = load_or_build_pair(cache_dir, "all", max_n, || {
            // Marking one loop of a structure is the same as pointing one
            // label and building a structure on the rest, so the loop moment
            // of t2 is n*t2(n-1), likewise for t3; the product rule combines
            // them.
            let moments: Vec<BigUint> = (0..=max_n)
                .map(|n| {
                    if n == 0 {
                        BigUint::zero()
                    } else {
                        BigUint::from(n) * (&t2[n - 1] * &t3[n] + &t2[n] * &t3[n - 1])
                    }
                })
                .collect();
            fused_transfer_auto(&g_tilde, &moments)
        });
        GeneralTables {
            t2,
            t3,
            g_tilde,
            g,
            mg,
        }
    }

    pub fn max_n(&self) -> usize {
        self.g.len() - 1
    }

    /// Number of rooted presentations of size-`n` subgroups:
    /// `sum_l (n + l) gpr(n, l)`, with the single-vertex row counted
    /// directly (its graph with both loops deleted — the trivial subgroup —
    /// escapes the loop-deletion formula).
    pub fn l_number(&self, n: usize) -> BigUint {
        if n == 1 {
            return BigUint::from(4u32);
        }
        BigUint::from(n) * &self.g[n] + &self.mg[n]
    }

    /// `H_n`: the number of size-`n` subgroups.
    pub fn count_all(&self, n: usize) -> BigUint {
        exact_div(self.l_number(n), &factorial(n), "L_n / n!")
    }

    /// Probability that a uniform size-`n` structure pair is connected.
    pub fn connectivity_probability(&self, n: usize) -> BigRational {
        assert!(n >= 1);
        BigRational::new(self.g[n].clone().into(), self.g_tilde[n].clone().into())
    }
}

/// Univariate tables for index-`n` subgroups (permutational `tau_3` part).
pub struct FiTables {
    pub t3: Vec<BigUint>,
    pub g_tilde: Vec<BigUint>,
    pub g: Vec<BigUint>,
}

impl FiTables {
    pub fn new(max_n: usize) -> FiTables {
        let t2 = count_sequence(&spec_tau2(), max_n);
        let t3 = count_sequence(&spec_tau3_permutational(), max_n);
        let g_tilde = product_totals(&t2, &t3);
        let g = connected_transfer_auto(&g_tilde);
        FiTables { t3, g_tilde, g }
    }

    /// `H_n^fi`: the number of index-`n` subgroups.
    pub fn count(&self, n: usize) -> BigUint {
        exact_div(self.g[n].clone(), &factorial(n - 1), "g_fi / (n-1)!")
    }
}

/// Univariate tables for free subgroups: loop-free structure counts, their
/// connected counts, the isolated-pair moment `gv`, and the one-loop graph
/// counts `ga` (a-loop) and `gb` (b-loop).
pub struct FreeTables {
    pub t2: Vec<BigUint>,
    pub t3: Vec<BigUint>,
    pub g_tilde: Vec<BigUint>,
    pub g: Vec<BigUint>,
    /// `gv[n] = sum_k k * g0(n, k)`: connected loop-free structures with a
    /// marked isolated pair.
    pub gv: Vec<BigUint>,
    pub ga: Vec<BigUint>,
}

impl FreeTables {
    pub fn new(max_n: usize) -> FreeTables {
        Self::new_cached(max_n, None)
    }

    pub fn new_cached(max_n: usize, cache_dir: Option<&Path>) -> FreeTables {
        let t2 = count_sequence(&spec_tau2_loopfree(), max_n);
        let t3 = count_sequence(&spec_tau3_loopfree(), max_n);
        let g_tilde = product_totals(&t2, &t3);
        let (g, gv) = load_or_build_pair(cache_dir, "free", max_n, || {
            // Marking an isolated pair points two labels: the pair moment of
            // the loop-free t3 table is n(n-1) t3(n-2).
            let moments: Vec<BigUint> = (0..=max_n)
                .map(|n| {
                    if n < 2 {
                        BigUint::zero()
                    } else {
                        &t2[n] * BigUint::from(n * (n - 1)) * &t3[n - 2]
                    }
                })
                .collect();
            fused_transfer_auto(&g_tilde, &moments)
        });
        let mut ga: Vec<BigUint> = Vec::with_capacity(max_n + 1);
        for n in 0..=max_n {
            if n < 2 {
                ga.push(BigUint::zero());
            } else {
                let direct = BigUint::from(n) * &gv[n - 1];
                let chained = BigUint::from(2 * n * (n - 1)) * &ga[n - 2];
                ga.push(direct + chained);
            }
        }
        FreeTables {
            t2,
            t3,
            g_tilde,
            g,
            gv,
            ga,
        }
    }

    /// One-loop graphs whose loop is a b-loop.
    pub fn gb(&self, n: usize) -> BigUint {
        if n == 0 {
            BigUint::zero()
        } else {
            BigUint::from(n) * &self.ga[n - 1]
        }
    }

    /// All one-loop graphs.
    pub fn g1(&self, n: usize) -> BigUint {
        &self.ga[n] + self.gb(n)
    }

    /// `H_n^cr-fr`: cyclically reduced free subgroups of size `n`.
    pub fn count_cyclically_reduced(&self, n: usize) -> BigUint {
        exact_div(self.g[n].clone(), &factorial(n - 1), "g0 / (n-1)!")
    }

    /// `H_n^fr`: all free subgroups of size `n`,
    /// `(n g0(n) + g1(n)) / n!`.
    pub fn count(&self, n: usize) -> BigUint {
        let rooted = BigUint::from(n) * &self.g[n] + self.g1(n);
        exact_div(rooted, &factorial(n), "(n g0 + g1) / n!")
    }
}

/// Univariate tables for free finite-index subgroups (loop-free `tau_2`
/// with triples-only `tau_3`; sizes are multiples of 6).
pub struct FrFiTables {
    pub t3: Vec<BigUint>,
    pub g_tilde: Vec<BigUint>,
    pub g: Vec<BigUint>,
}

impl FrFiTables {
    pub fn new(max_n: usize) -> FrFiTables {
        let t2 = count_sequence(&spec_tau2_loopfree(), max_n);
        let t3 = count_sequence(&spec_tau3_perm_loopfree(), max_n);
        let g_tilde = product_totals(&t2, &t3);
        let g = connected_transfer_auto(&g_tilde);
        FrFiTables { t3, g_tilde, g }
    }

    /// `H_n^fr-fi`: free subgroups of index `n` (zero unless `6 | n`).
    pub fn count(&self, n: usize) -> BigUint {
        if !n.is_multiple_of(6) {
            assert!(self.g[n].is_zero());
            return BigUint::zero();
        }
        exact_div(self.g[n].clone(), &factorial(n - 1), "g_frfi / (n-1)!")
    }
}

/// The five counting columns for sizes `1..=max_n` (index 0 unused).
pub struct SubgroupCounts {
    pub all: Vec<BigUint>,
    pub finite_index: Vec<BigUint>,
    pub cr_free: Vec<BigUint>,
    pub free: Vec<BigUint>,
    pub free_finite_index: Vec<BigUint>,
}

impl SubgroupCounts {
    pub fn compute(max_n: usize, cache_dir: Option<&Path>) -> SubgroupCounts {
        let general = GeneralTables::new_cached(max_n, cache_dir);
        let fi = FiTables::new(max_n);
        let free = FreeTables::new_cached(max_n, cache_dir);
        let frfi = FrFiTables::new(max_n);
        let mut counts = SubgroupCounts {
            all: vec![BigUint::zero(); max_n + 1],
            finite_index: vec![BigUint::zero(); max_n + 1],
            cr_free: vec![BigUint::zero(); max_n + 1],
            free: vec![BigUint::zero(); max_n + 1],
            free_finite_index: vec![BigUint::zero(); max_n + 1],
        };
        for n in 1..=max_n {
            counts.all[n] = general.count_all(n);
            counts.finite_index[n] = fi.count(n);
            counts.cr_free[n] = free.count_cyclically_reduced(n);
            counts.free[n] = free.count(n);
            counts.free_finite_index[n] = frfi.count(n);
        }
        counts
    }

    pub fn max_n(&self) -> usize {
        self.all.len() - 1
    }
}

const CACHE_MAGIC: &[u8; 8] = b"P2ZTAB1\n";

/// File name for a cached table: `{family}-{max_n}.tbl`.
pub fn cache_path(dir: &Path, family: &str, max_n: usize) -> PathBuf {
    dir.join(format!("{family}-{max_n}.tbl"))
}

/// Write a table as magic, entry count, then little-endian
/// length-prefixed magnitude bytes per entry.
pub fn save_table(path: &Path, table: &[BigUint]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&(table.len() as u64).to_le_bytes())?;
    for entry in table {
        let bytes = entry.to_bytes_le();
        w.write_all(&(bytes.len() as u64).to_le_bytes())?;
        w.write_all(&bytes)?;
    }
    w.flush()
}

/// Read a table written by [`save_table`]; `None` on any mismatch.
pub fn load_table(path: &Path) -> Option<Vec<BigUint>> {
    let mut r = BufReader::new(fs::File::open(path).ok()?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).ok()?;
    if &magic != CACHE_MAGIC {
        return None;
    }
    let mut len8 = [0u8; 8];
    r.read_exact(&mut len8).ok()?;
    let count = u64::from_le_bytes(len8) as usize;
    let mut table = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut len8).ok()?;
        let n = u64::from_le_bytes(len8) as usize;
        let mut bytes = vec![0u8; n];
        r.read_exact(&mut bytes).ok()?;
        table.push(BigUint::from_bytes_le(&bytes));
    }
    Some(table)
}

/// Load the pair of tables `{family}-g-…` / `{family}-m-…` from the cache
/// directory, or build and persist them (best effort) if absent.
fn load_or_build_pair(
    cache_dir: Option<&Path>,
    family: &str,
    max_n: usize,
    build: impl FnOnce() -> (Vec<BigUint>, Vec<BigUint>),
) -> (Vec<BigUint>, Vec<BigUint>) {
    if let Some(dir) = cache_dir {
        let g_path = cache_path(dir, &format!("{family}-g"), max_n);
        let m_path = cache_path(dir, &format!("{family}-m"), max_n);
        if let (Some(g), Some(m)) = (load_table(&g_path), load_table(&m_path)) {
            if g.len() == max_n + 1 && m.len() == max_n + 1 {
                return (g, m);
            }
        }
        let (g, m) = build();
        let _ = save_table(&g_path, &g);
        let _ = save_table(&m_path, &m);
        return (g, m);
    }
    build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn row_u64(row: &[BigUint]) -> Vec<u64> {
        row.iter().map(|x| x.to_u64().unwrap()).collect()
    }

    fn u(x: &BigUint) -> u64 {
        x.to_u64().unwrap()
    }

    #[test]
    fn tau2_loop_rows() {
        let t = tau2_loops_table(6);
        let expected: [&[u64]; 7] = [
            &[1],
            &[0, 1],
            &[1, 0, 1],
            &[0, 3, 0, 1],
            &[3, 0, 6, 0, 1],
            &[0, 15, 0, 10, 0, 1],
            &[15, 0, 45, 0, 15, 0, 1],
        ];
        for (n, row) in expected.iter().enumerate() {
            assert_eq!(row_u64(&t[n]), *row, "row {n}");
        }
        for (n, row) in t.iter().enumerate() {
            assert_eq!(u(&row[n]), 1);
        }
    }

    #[test]
    fn tau3_loop_rows() {
        let t = tau3_loops_table(6);
        let expected: [&[u64]; 7] = [
            &[1],
            &[0, 1],
            &[2, 0, 1],
            &[2, 6, 0, 1],
            &[12, 8, 12, 0, 1],
            &[40, 60, 20, 20, 0, 1],
            &[160, 240, 180, 40, 30, 0, 1],
        ];
        for (n, row) in expected.iter().enumerate() {
            assert_eq!(row_u64(&t[n]), *row, "row {n}");
        }
        assert_eq!(u(&t[3][1]), 6);
        assert_eq!(u(&t[6][0]), 160);
    }

    #[test]
    fn tau3_trivariate_consistency() {
        let tri = tau3_loops_edges_table(20);
        let bi = tau3_loops_table(20);
        for n in 0..=20 {
            for l in 0..=n {
                let sum: BigUint = tri[n][l].iter().sum();
                assert_eq!(sum, bi[n][l], "n={n} l={l}");
            }
        }
        assert_eq!(u(&tri[2][0][1]), 2);
    }

    #[test]
    fn bivariate_row_sums_match_univariate() {
        let t2 = tau2_loops_table(64);
        let t3 = tau3_loops_table(64);
        let u2 = count_sequence(&spec_tau2(), 64);
        let u3 = count_sequence(&spec_tau3(), 64);
        for n in 0..=64 {
            let s2: BigUint = t2[n].iter().sum();
            let s3: BigUint = t3[n].iter().sum();
            assert_eq!(s2, u2[n]);
            assert_eq!(s3, u3[n]);
        }
        assert_eq!(u(&u2[7]), 232);
        assert_eq!(u(&u3[7]), 3333);
    }

    #[test]
    fn loop_moment_identity() {
        // Marking a loop points one label: sum_l l*t2(n,l) = n*t2(n-1).
        let t2 = tau2_loops_table(64);
        let u2 = count_sequence(&spec_tau2(), 64);
        for n in 1..=64usize {
            let moment: BigUint = t2[n]
                .iter()
                .enumerate()
                .map(|(l, v)| BigUint::from(l) * v)
                .sum();
            assert_eq!(moment, BigUint::from(n) * &u2[n - 1], "n={n}");
        }
    }

    #[test]
    fn product_and_connected_loop_rows() {
        let (totals, connected) = gpr_loops_tables(6);
        let expected_totals: [&[u64]; 7] = [
            &[0],
            &[0, 0, 1],
            &[2, 0, 3, 0, 1],
            &[0, 6, 18, 2, 9, 0, 1],
            &[36, 24, 108, 48, 87, 8, 18, 0, 1],
            &[0, 600, 900, 700, 900, 240, 275, 20, 30, 0, 1],
            &[
                2400, 3600, 9900, 11400, 10950, 5400, 4225, 840, 675, 40, 45, 0, 1,
            ],
        ];
        for (n, row) in expected_totals.iter().enumerate() {
            assert_eq!(row_u64(&totals[n]), *row, "totals row {n}");
        }
        let expected_connected: [&[u64]; 5] = [
            &[2, 0, 3],
            &[0, 6, 12, 2],
            &[24, 24, 72, 24],
            &[0, 480, 480, 360],
            &[1560, 2880, 5760, 4560, 360],
        ];
        for (i, prefix) in expected_connected.iter().enumerate() {
            let n = i + 2;
            assert_eq!(&row_u64(&connected[n])[..prefix.len()], *prefix, "row {n}");
            assert!(connected[n][prefix.len()..].iter().all(|x| x.is_zero()));
        }
        assert_eq!(u(&connected[1][2]), 1);
    }

    #[test]
    fn general_tables_and_subgroup_counts() {
        let g = GeneralTables::new(13);
        assert_eq!(u(&g.l_number(1)), 4);
        assert_eq!(u(&g.l_number(6)), 120240);
        assert_eq!(u(&g.mg[6]), 29520);
        assert_eq!(u(&g.mg[1]), 2);
        let expected_h: [u64; 13] = [
            4, 8, 16, 34, 76, 167, 366, 846, 1870, 4353, 9900, 23054, 53402,
        ];
        for (i, h) in expected_h.iter().enumerate() {
            assert_eq!(u(&g.count_all(i + 1)), *h, "H_{}", i + 1);
        }
    }

    #[test]
    fn loop_moments_match_bivariate() {
        let g = GeneralTables::new(40);
        let (_, connected) = gpr_loops_tables(40);
        for (n, row) in connected.iter().enumerate().skip(1) {
            let moment: BigUint = row
                .iter()
                .enumerate()
                .map(|(l, v)| BigUint::from(l) * v)
                .sum();
            assert_eq!(moment, g.mg[n], "n={n}");
        }
    }

    #[test]
    fn finite_index_tables() {
        let fi = FiTables::new(13);
        assert_eq!(
            row_u64(&fi.t3[..7.min(fi.t3.len())]),
            vec![1, 1, 1, 3, 9, 21, 81]
        );
        assert_eq!(u(&fi.g[6]), 2640);
        let expected: [u64; 13] = [1, 1, 4, 8, 5, 22, 42, 40, 120, 265, 286, 764, 1729];
        for (i, h) in expected.iter().enumerate() {
            assert_eq!(u(&fi.count(i + 1)), *h, "H_{}^fi", i + 1);
        }
    }

    #[test]
    fn free_tables_and_counts() {
        let f = FreeTables::new(13);
        let even = |v: &[BigUint]| -> Vec<u64> { (0..=6).map(|k| u(&v[2 * k])).collect() };
        assert_eq!(even(&f.t2), vec![1, 1, 3, 15, 105, 945, 10395]);
        assert_eq!(even(&f.t3), vec![1, 2, 12, 160, 3920, 131040, 5346880]);
        assert_eq!(
            even(&f.g_tilde),
            vec![0, 2, 36, 2400, 411600, 123832800, 55580817600]
        );
        assert_eq!(
            even(&f.g),
            vec![0, 2, 24, 1560, 282240, 84188160, 36883123200]
        );
        for n in (1..=13).step_by(2) {
            assert!(f.g[n].is_zero(), "odd connected count n={n}");
        }
        assert_eq!(u(&f.gv[2]), 2);
        assert_eq!(u(&f.gv[4]), 48);
        assert_eq!(u(&f.ga[3]), 6);
        assert_eq!(u(&f.ga[5]), 480);
        let expected_cr: [u64; 13] = [0, 2, 0, 4, 0, 13, 0, 56, 0, 232, 0, 924, 0];
        let expected_fr: [u64; 13] = [0, 2, 1, 5, 4, 17, 12, 68, 37, 269, 130, 1054, 492];
        for n in 1..=13usize {
            assert_eq!(
                u(&f.count_cyclically_reduced(n)),
                expected_cr[n - 1],
                "cr n={n}"
            );
            assert_eq!(u(&f.count(n)), expected_fr[n - 1], "fr n={n}");
        }
    }

    #[test]
    fn one_loop_parity_and_growth() {
        let f = FreeTables::new(40);
        for n in 1..=20usize {
            assert_eq!(f.g1(2 * n), BigUint::from(2 * n) * f.g1(2 * n - 1), "n={n}");
        }
        for n in 2..=19usize {
            let lhs = &f.g[2 * n + 2];
            let rhs = BigUint::from(2 * (2 * n + 1) * (2 * n + 2)) * &f.g[2 * n];
            assert!(lhs >= &rhs, "growth fails at 2n={}", 2 * n);
        }
    }

    #[test]
    fn edge_moment_matches_bivariate() {
        let f = FreeTables::new(64);
        let (totals, connected) = free_edges_tables(64);
        assert_eq!(u(&totals[4][2]), 36);
        assert_eq!(u(&connected[4][2]), 24);
        let row6: BigUint = connected[6].iter().sum();
        assert_eq!(u(&row6), 1560);
        for (n, row) in connected.iter().enumerate().skip(1) {
            let moment: BigUint = row
                .iter()
                .enumerate()
                .map(|(k, v)| BigUint::from(k) * v)
                .sum();
            assert_eq!(moment, f.gv[n], "n={n}");
        }
    }

    #[test]
    fn free_finite_index_tables() {
        let t = FrFiTables::new(13);
        assert_eq!(u(&t.t3[3]), 2);
        assert_eq!(u(&t.t3[6]), 40);
        assert_eq!(u(&t.t3[9]), 2240);
        assert_eq!(u(&t.t3[12]), 246400);
        assert_eq!(u(&t.g_tilde[6]), 600);
        assert_eq!(u(&t.g[12]), 2395008000);
        for n in 1..=13usize {
            let expected = match n {
                6 => 5,
                12 => 60,
                _ => 0,
            };
            assert_eq!(u(&t.count(n)), expected, "n={n}");
        }
    }

    #[test]
    fn column_inequalities() {
        let c = SubgroupCounts::compute(16, None);
        for n in 1..=16 {
            assert!(c.free_finite_index[n] <= c.finite_index[n]);
            assert!(c.finite_index[n] <= c.all[n]);
            assert!(c.cr_free[n] <= c.free[n]);
            assert!(c.free[n] <= c.all[n]);
        }
    }

    #[test]
    fn connectivity_probabilities() {
        let g = GeneralTables::new(100);
        let r = |num: u64, den: u64| {
            BigRational::new(BigUint::from(num).into(), BigUint::from(den).into())
        };
        assert_eq!(g.connectivity_probability(1), r(1, 1));
        assert_eq!(g.connectivity_probability(2), r(5, 6));
        assert_eq!(g.connectivity_probability(6), r(15120, 49476));
        for n in 1..=100 {
            let p = g.connectivity_probability(n);
            assert!(p > BigRational::zero() && p <= BigRational::one(), "n={n}");
        }
    }

    #[test]
    fn fused_transfer_matches_plain() {
        let g = GeneralTables::new(48);
        let plain = crate::species::connected_transfer(&g.g_tilde);
        assert_eq!(g.g, plain);
    }

    #[test]
    fn fast_and_direct_transfers_agree_across_threshold() {
        // 520 > FAST_TRANSFER_THRESHOLD, so this instance runs through the
        // multi-modular engine; the direct recurrence is the reference.
        let f = FreeTables::new(520);
        let moments: Vec<BigUint> = (0..=520usize)
            .map(|n| {
                if n < 2 {
                    BigUint::zero()
                } else {
                    &f.t2[n] * BigUint::from(n * (n - 1)) * &f.t3[n - 2]
                }
            })
            .collect();
        let (g_direct, gv_direct) = connected_transfer_with_moment(&f.g_tilde, &moments);
        assert_eq!(f.g, g_direct);
        assert_eq!(f.gv, gv_direct);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let built = SubgroupCounts::compute(10, Some(dir.path()));
        // Second computation must load the persisted tables and agree.
        let loaded = SubgroupCounts::compute(10, Some(dir.path()));
        assert_eq!(built.all, loaded.all);
        assert_eq!(built.free, loaded.free);
        let table = vec![
            BigUint::zero(),
            BigUint::from(12345u32),
            BigUint::from(u64::MAX) * BigUint::from(u64::MAX),
        ];
        let path = dir.path().join("probe.tbl");
        save_table(&path, &table).unwrap();
        assert_eq!(load_table(&path).unwrap(), table);
    }
}
