//! Multi-modular evaluation of the connected-structure transfer.
//!
//! The direct transfer recurrence multiplies huge integers pairwise and its
//! cost grows roughly with the fourth power of the table size, which is far
//! too slow beyond a few thousand entries on one core.  This module computes
//! the same tables exactly by working modulo a pool of 61-bit primes: for
//! each prime the transfer collapses to power-series operations over a word
//! field (`log` and division, evaluated with number-theoretic transforms in
//! quasi-linear time), and the results are recombined with the Chinese
//! remainder theorem over a balanced product tree.
//!
//! The identities used, in exponential-generating-function form with
//! `A = 1 + G~` (all structures) and `G` (connected structures):
//!
//! ```text
//! G  = log A          (so G' = A' / A)
//! Mg = M~ / A         (first moments of a statistic that adds over components)
//! ```
//!
//! When the support of the input lives on multiples of a stride `s`, the
//! series are compressed to `w = z^s` first, which shortens every transform.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

/// Every generated prime `p` has `2^TWO_ADICITY | p - 1`, so NTT sizes up to
/// `2^TWO_ADICITY` are available.
const TWO_ADICITY: u32 = 15;

// ---------------------------------------------------------------------------
// Word-size modular arithmetic (Montgomery form, odd moduli below 2^61).
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Mont {
    p: u64,
    /// `-p^{-1} mod 2^64`.
    ninv: u64,
    /// `2^128 mod p`, for conversion into Montgomery form.
    r2: u64,
}

impl Mont {
    fn new(p: u64) -> Mont {
        assert!(p % 2 == 1 && p > 2 && p < 1 << 62);
        // Newton iteration doubles the number of correct low bits each step.
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        debug_assert_eq!(p.wrapping_mul(inv), 1);
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Mont {
            p,
            ninv: inv.wrapping_neg(),
            r2,
        }
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.ninv);
        let folded = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if folded >= self.p {
            folded - self.p
        } else {
            folded
        }
    }

    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    /// `a` in Montgomery form.
    #[inline]
    fn encode(&self, a: u64) -> u64 {
        debug_assert!(a < self.p);
        self.mul(a, self.r2)
    }

    /// `a` back out of Montgomery form.
    #[inline]
    fn decode(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    /// `base^e` with `base` in Montgomery form; result in Montgomery form.
    fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut acc = self.encode(1);
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Primality testing and prime-pool generation.
// ---------------------------------------------------------------------------

fn pow_mod_u64(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc: u64 = 1;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin over the full 64-bit range.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A deterministic pool of distinct primes `c * 2^TWO_ADICITY + 1` whose
/// product exceeds `2^min_product_bits`.
fn generate_primes(min_product_bits: u64) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut bits: u64 = 0;
    let mut c: u64 = (1 << 46) - 1;
    while bits < min_product_bits {
        let p = (c << TWO_ADICITY) | 1;
        if is_prime_u64(p) {
            primes.push(p);
            // p > 2^60 here, so crediting 60 bits per prime is conservative.
            bits += 60;
        }
        assert!(c > 2, "prime pool exhausted");
        c -= 2;
    }
    primes
}

// ---------------------------------------------------------------------------
// Number-theoretic transform and power-series operations modulo one prime.
// ---------------------------------------------------------------------------

struct NttPlan {
    mont: Mont,
    /// `roots[s]` has multiplicative order `2^s` (Montgomery form).
    roots: [u64; TWO_ADICITY as usize + 1],
    inv_roots: [u64; TWO_ADICITY as usize + 1],
    one: u64,
}

impl NttPlan {
    fn new(p: u64) -> NttPlan {
        assert_eq!((p - 1) % (1 << TWO_ADICITY), 0);
        let mont = Mont::new(p);
        let one = mont.encode(1);
        let exp = (p - 1) >> TWO_ADICITY;
        let mut y = 0u64;
        for x in 2u64.. {
            let cand = mont.pow(mont.encode(x % p), exp);
            if mont.pow(cand, 1 << (TWO_ADICITY - 1)) != one {
                y = cand;
                break;
            }
        }
        let mut roots = [0u64; TWO_ADICITY as usize + 1];
        let mut inv_roots = [0u64; TWO_ADICITY as usize + 1];
        roots[TWO_ADICITY as usize] = y;
        inv_roots[TWO_ADICITY as usize] = mont.pow(y, (1u64 << TWO_ADICITY) - 1);
        for s in (0..TWO_ADICITY as usize).rev() {
            roots[s] = mont.mul(roots[s + 1], roots[s + 1]);
            inv_roots[s] = mont.mul(inv_roots[s + 1], inv_roots[s + 1]);
        }
        debug_assert_eq!(roots[0], one);
        NttPlan {
            mont,
            roots,
            inv_roots,
            one,
        }
    }

    /// In-place transform of a power-of-two-length slice in Montgomery form.
    fn ntt(&self, a: &mut [u64], invert: bool) {
        let n = a.len();
        assert!(n.is_power_of_two() && n <= 1 << TWO_ADICITY);
        let lg = n.trailing_zeros() as usize;
        let m = &self.mont;
        // Bit-reversal permutation.
        let mut j = 0usize;
        for i in 1..n {
            let mut bit = n >> 1;
            while j & bit != 0 {
                j ^= bit;
                bit >>= 1;
            }
            j |= bit;
            if i < j {
                a.swap(i, j);
            }
        }
        for s in 1..=lg {
            let len = 1usize << s;
            let wlen = if invert {
                self.inv_roots[s]
            } else {
                self.roots[s]
            };
            let mut start = 0;
            while start < n {
                let mut w = self.one;
                for i in start..start + len / 2 {
                    let u = a[i];
                    let v = m.mul(a[i + len / 2], w);
                    a[i] = m.add(u, v);
                    a[i + len / 2] = m.sub(u, v);
                    w = m.mul(w, wlen);
                }
                start += len;
            }
        }
        if invert {
            // Divide by n = 2^lg.
            let inv2 = m.encode(self.mont.p.div_ceil(2));
            let inv_n = m.pow(inv2, lg as u64);
            for x in a.iter_mut() {
                *x = m.mul(*x, inv_n);
            }
        }
    }

    /// Full product of two series in Montgomery form.
    fn mul_series(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let out_len = a.len() + b.len() - 1;
        let size = out_len.next_power_of_two();
        let mut fa = vec![0u64; size];
        let mut fb = vec![0u64; size];
        fa[..a.len()].copy_from_slice(a);
        fb[..b.len()].copy_from_slice(b);
        self.ntt(&mut fa, false);
        self.ntt(&mut fb, false);
        for i in 0..size {
            fa[i] = self.mont.mul(fa[i], fb[i]);
        }
        self.ntt(&mut fa, true);
        fa.truncate(out_len);
        fa
    }

    /// Inverse of a series with unit constant term, to `len` coefficients,
    /// by Newton iteration.
    fn series_inverse(&self, a: &[u64], len: usize) -> Vec<u64> {
        assert!(!a.is_empty() && a[0] == self.one);
        let m = &self.mont;
        let two = m.add(self.one, self.one);
        let mut inv = vec![self.one];
        let mut cur = 1usize;
        while cur < len {
            let cur2 = (cur * 2).min(len.next_power_of_two());
            let t = self.mul_series(&a[..cur2.min(a.len())], &inv);
            let mut s = vec![0u64; cur2];
            for (j, entry) in s.iter_mut().enumerate() {
                let tj = t.get(j).copied().unwrap_or(0);
                *entry = if j == 0 { m.sub(two, tj) } else { m.sub(0, tj) };
            }
            let mut next = self.mul_series(&inv, &s);
            next.truncate(cur2);
            inv = next;
            cur = cur2;
        }
        inv.truncate(len);
        inv
    }
}

/// Inverses of `1..len` modulo `p` (plain form), by the standard recurrence.
fn small_inverses(len: usize, p: u64) -> Vec<u64> {
    let mut inv = vec![0u64; len.max(2)];
    inv[1] = 1;
    for i in 2..len {
        let q = p / i as u64;
        let r = (p % i as u64) as usize;
        inv[i] = p - ((q as u128 * inv[r] as u128) % p as u128) as u64;
    }
    inv
}

/// One prime's worth of the fused transfer: given residues of the totals
/// (and optionally moments) at indices `stride * h`, return residues of the
/// connected counts (and moments).
fn prime_transfer(
    p: u64,
    stride: usize,
    l: usize,
    totals_row: &[u64],
    moments_row: Option<&[u64]>,
) -> (Vec<u64>, Option<Vec<u64>>) {
    let plan = NttPlan::new(p);
    let m = &plan.mont;
    let n_max = stride * (l - 1);
    assert!((n_max as u64) < p);

    // Factorials and inverse factorials in Montgomery form.
    let mut fact = vec![plan.one; n_max + 1];
    for i in 1..=n_max {
        fact[i] = m.mul(fact[i - 1], m.encode(i as u64));
    }
    let mut inv_fact = vec![plan.one; n_max + 1];
    inv_fact[n_max] = m.pow(fact[n_max], p - 2);
    for i in (1..=n_max).rev() {
        inv_fact[i - 1] = m.mul(inv_fact[i], m.encode(i as u64));
    }

    // A = 1 + sum_h totals(s h)/(s h)! w^h.
    let mut a = vec![0u64; l];
    a[0] = plan.one;
    for h in 1..l {
        a[h] = m.mul(m.encode(totals_row[h]), inv_fact[stride * h]);
    }
    let inv_a = plan.series_inverse(&a, l);

    // G' = A'/A, then integrate: g_h = [w^{h-1}](A' inv_a) / h.
    let mut da = vec![0u64; l - 1];
    for j in 0..l - 1 {
        da[j] = m.mul(a[j + 1], m.encode(j as u64 + 1));
    }
    let e = plan.mul_series(&da, &inv_a);
    let inv_small = small_inverses(l, p);
    let mut g_row = vec![0u64; l];
    for h in 1..l {
        let c = m.mul(e[h - 1], m.encode(inv_small[h]));
        g_row[h] = m.decode(m.mul(c, fact[stride * h]));
    }

    // Mg = M~/A.
    let m_row = moments_row.map(|mr| {
        let mut mw = vec![0u64; l];
        for h in 1..l {
            mw[h] = m.mul(m.encode(mr[h]), inv_fact[stride * h]);
        }
        let f = plan.mul_series(&mw, &inv_a);
        let mut out = vec![0u64; l];
        for h in 1..l {
            out[h] = m.decode(m.mul(f[h], fact[stride * h]));
        }
        out
    });

    (g_row, m_row)
}

// ---------------------------------------------------------------------------
// Balanced product tree: simultaneous reduction and CRT reconstruction.
// ---------------------------------------------------------------------------

struct CrtTree {
    /// `moduli[0]` are the primes; each next level pairs adjacent nodes.
    moduli: Vec<Vec<BigUint>>,
    /// `invs[j][i] = moduli[j][2i]^{-1} mod moduli[j][2i+1]`.
    invs: Vec<Vec<BigUint>>,
}

fn mod_inverse(a: &BigUint, modulus: &BigUint) -> BigUint {
    let a = BigInt::from(a.clone());
    let m = BigInt::from(modulus.clone());
    let ext = a.extended_gcd(&m);
    assert!(ext.gcd.is_one(), "moduli must be coprime");
    let red = ((ext.x % &m) + &m) % &m;
    red.to_biguint().unwrap()
}

use num_traits::One;

impl CrtTree {
    fn new(primes: &[u64]) -> CrtTree {
        assert!(!primes.is_empty());
        let mut moduli = vec![primes.iter().map(|&p| BigUint::from(p)).collect::<Vec<_>>()];
        let mut invs = Vec::new();
        while moduli.last().unwrap().len() > 1 {
            let prev = moduli.last().unwrap();
            let mut next = Vec::with_capacity(prev.len().div_ceil(2));
            let mut level_invs = Vec::with_capacity(prev.len() / 2);
            let mut i = 0;
            while i + 1 < prev.len() {
                level_invs.push(mod_inverse(&prev[i], &prev[i + 1]));
                next.push(&prev[i] * &prev[i + 1]);
                i += 2;
            }
            if i < prev.len() {
                next.push(prev[i].clone());
            }
            invs.push(level_invs);
            moduli.push(next);
        }
        CrtTree { moduli, invs }
    }

    /// The product of all primes.
    fn product(&self) -> &BigUint {
        &self.moduli.last().unwrap()[0]
    }

    /// Residues of `x` modulo every prime; requires `x <` the tree product.
    fn reduce_all(&self, x: &BigUint) -> Vec<u64> {
        let mut vals = vec![x.clone()];
        for level in (0..self.moduli.len() - 1).rev() {
            let nodes = &self.moduli[level];
            let mut next = Vec::with_capacity(nodes.len());
            for (i, node) in nodes.iter().enumerate() {
                let parent = &vals[i / 2];
                // An unpaired trailing node carries its value unchanged.
                if i % 2 == 0 && i + 1 >= nodes.len() {
                    next.push(parent.clone());
                } else {
                    next.push(parent % node);
                }
            }
            vals = next;
        }
        vals.iter()
            .map(|v| v.to_u64().expect("leaf residue fits a word"))
            .collect()
    }

    /// The unique value below the tree product with the given residues.
    fn combine(&self, residues: &[u64]) -> BigUint {
        assert_eq!(residues.len(), self.moduli[0].len());
        let mut vals: Vec<BigUint> = residues.iter().map(|&r| BigUint::from(r)).collect();
        for (level, level_invs) in self.invs.iter().enumerate() {
            let nodes = &self.moduli[level];
            let mut next = Vec::with_capacity(nodes.len().div_ceil(2));
            for (pair, inv) in level_invs.iter().enumerate() {
                let i = 2 * pair;
                let m1 = &nodes[i];
                let m2 = &nodes[i + 1];
                let x1 = &vals[i];
                let x2 = &vals[i + 1];
                let diff = ((x2 + m2) - (x1 % m2)) % m2;
                let t = (diff * inv) % m2;
                next.push(x1 + m1 * t);
            }
            if nodes.len() % 2 == 1 {
                next.push(vals.last().unwrap().clone());
            }
            vals = next;
        }
        vals.pop().unwrap()
    }
}

// ---------------------------------------------------------------------------
// Public entry point.
// ---------------------------------------------------------------------------

fn gcd_usize(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd_usize(b % a, a)
    }
}

/// Exact connected transfer (and optional fused first moment), equal to the
/// direct recurrences but evaluated multi-modularly.  `totals[0]` (and
/// `moments[0]`) must be zero; the outputs are full-length tables.
pub(crate) fn fast_fused_connected_transfer(
    totals: &[BigUint],
    moments: Option<&[BigUint]>,
) -> (Vec<BigUint>, Option<Vec<BigUint>>) {
    let n_max = totals.len() - 1;
    assert!(totals[0].is_zero(), "no empty structure allowed");
    if let Some(m) = moments {
        assert_eq!(m.len(), totals.len());
        assert!(m[0].is_zero());
    }

    // Common stride of the support, for series compression.
    let mut stride = 0usize;
    let mut max_bits = 0u64;
    for n in 1..=n_max {
        let used = !totals[n].is_zero() || moments.is_some_and(|m| !m[n].is_zero());
        if used {
            stride = gcd_usize(stride, n);
            max_bits = max_bits
                .max(totals[n].bits())
                .max(moments.map_or(0, |m| m[n].bits()));
        }
    }
    if stride == 0 {
        let zeros = vec![BigUint::zero(); n_max + 1];
        return (zeros.clone(), moments.map(|_| zeros));
    }
    let l = n_max / stride + 1;
    assert!(
        2 * l <= 1 << TWO_ADICITY,
        "table too long for the transform domain"
    );

    // The outputs are bounded by the inputs entrywise, so a pool whose
    // product clears the largest input with a safety margin determines every
    // output uniquely.
    let primes = generate_primes(max_bits + 64);
    let tree = CrtTree::new(&primes);
    let k = primes.len();

    let totals_res: Vec<Vec<u64>> = (0..l)
        .map(|h| tree.reduce_all(&totals[stride * h]))
        .collect();
    let moments_res: Option<Vec<Vec<u64>>> =
        moments.map(|m| (0..l).map(|h| tree.reduce_all(&m[stride * h])).collect());

    let mut g_rows: Vec<Vec<u64>> = Vec::with_capacity(k);
    let mut m_rows: Vec<Vec<u64>> = Vec::with_capacity(if moments.is_some() { k } else { 0 });
    for (ki, &p) in primes.iter().enumerate() {
        let trow: Vec<u64> = (0..l).map(|h| totals_res[h][ki] % p).collect();
        let mrow: Option<Vec<u64>> = moments_res
            .as_ref()
            .map(|mr| (0..l).map(|h| mr[h][ki] % p).collect());
        let (gr, mr) = prime_transfer(p, stride, l, &trow, mrow.as_deref());
        g_rows.push(gr);
        if let Some(mr) = mr {
            m_rows.push(mr);
        }
    }

    let combine_column = |rows: &[Vec<u64>]| -> Vec<BigUint> {
        let mut out = vec![BigUint::zero(); n_max + 1];
        let mut residues = vec![0u64; k];
        for h in 1..l {
            for ki in 0..k {
                residues[ki] = rows[ki][h];
            }
            out[stride * h] = tree.combine(&residues);
        }
        out
    };

    let g = combine_column(&g_rows);
    let mg = moments.map(|_| combine_column(&m_rows));
    debug_assert!(tree.product() > g.iter().max().unwrap());
    (g, mg)
}
