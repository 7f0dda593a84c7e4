//! Exact-uniform random generation of subgroups.
//!
//! Sampling happens in layers.  Labeled `a`-part and `b`-part structures are
//! drawn exactly uniformly from their count tables; a pair of independent
//! draws conditioned on connectivity (by rejection) gives a uniform labeled
//! cyclically reduced graph; the root-or-delete-a-loop marking turns that
//! into a uniform subgroup of the requested size.  For free subgroups the
//! non-cyclically-reduced case is reached instead through the one-loop
//! decomposition: an access path of `a`-loop unfoldings ending in a loop-free
//! core weighted by its isolated `b`-edges, re-assembled in reverse.
//!
//! All distributions are exact (integer arithmetic against the tables, no
//! floating point), and all randomness flows through a seeded [`RngState`],
//! so equal seeds reproduce equal outputs.

use std::path::Path;

use num_bigint::BigUint;
use num_traits::Zero;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::enumeration::{
    spec_tau2, spec_tau2_loopfree, spec_tau3, spec_tau3_loopfree, spec_tau3_perm_loopfree,
    spec_tau3_permutational, FreeTables,
};
use crate::species::{
    count_sequence, sample_multiset_from, uniform_below, uniform_biguint_below, SpeciesSpec,
};
use crate::stallings::StallingsGraph;

/// Deterministic sampler state: a 64-bit seed and the stream it drives.
#[derive(Clone, Debug)]
pub struct RngState {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngState {
    pub fn new(seed: u64) -> RngState {
        RngState {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Exactly uniform integer in `[1, n]`.
    pub fn uniform_bigint(&mut self, n: &BigUint) -> BigUint {
        assert!(!n.is_zero(), "uniform_bigint needs a positive bound");
        uniform_biguint_below(&mut self.rng, n) + 1u32
    }
}

impl RngCore for RngState {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand_core::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("no {what} of size {n} exist")]
    NoOutcomes { what: &'static str, n: usize },
    #[error("size {n} exceeds the sampler's table capacity {max}")]
    TooLarge { n: usize, max: usize },
}

/// The six structure classes the low-level sampler can draw.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StructureKind {
    Tau2,
    Tau3,
    Tau2Loopfree,
    Tau3Loopfree,
    Tau3Permutational,
    Tau3PermLoopfree,
}

impl StructureKind {
    pub fn spec(self) -> SpeciesSpec {
        match self {
            StructureKind::Tau2 => spec_tau2(),
            StructureKind::Tau3 => spec_tau3(),
            StructureKind::Tau2Loopfree => spec_tau2_loopfree(),
            StructureKind::Tau3Loopfree => spec_tau3_loopfree(),
            StructureKind::Tau3Permutational => spec_tau3_permutational(),
            StructureKind::Tau3PermLoopfree => spec_tau3_perm_loopfree(),
        }
    }

    pub fn is_tau2(self) -> bool {
        matches!(self, StructureKind::Tau2 | StructureKind::Tau2Loopfree)
    }

    fn name(self) -> &'static str {
        match self {
            StructureKind::Tau2 => "tau2 structures",
            StructureKind::Tau3 => "tau3 structures",
            StructureKind::Tau2Loopfree => "loop-free tau2 structures",
            StructureKind::Tau3Loopfree => "loop-free tau3 structures",
            StructureKind::Tau3Permutational => "permutational tau3 structures",
            StructureKind::Tau3PermLoopfree => "loop-free permutational tau3 structures",
        }
    }
}

/// A labeled structure, presented as the graph items it contributes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SampledStructure {
    Tau2 {
        loops: Vec<usize>,
        pairs: Vec<(usize, usize)>,
    },
    Tau3 {
        loops: Vec<usize>,
        edges: Vec<(usize, usize)>,
        triangles: Vec<[usize; 3]>,
    },
}

/// Frozen count table for one structure kind, ready to draw from.
pub struct StructureSampler {
    kind: StructureKind,
    spec: SpeciesSpec,
    counts: Vec<BigUint>,
}

impl StructureSampler {
    pub fn new(kind: StructureKind, max_n: usize) -> StructureSampler {
        let spec = kind.spec();
        let counts = count_sequence(&spec, max_n);
        StructureSampler { kind, spec, counts }
    }

    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn max_size(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, n: usize) -> &BigUint {
        &self.counts[n]
    }

    /// Exactly uniform labeled structure on `0..n`.
    pub fn sample(&self, n: usize, rng: &mut RngState) -> Result<SampledStructure, SamplerError> {
        if n > self.max_size() {
            return Err(SamplerError::TooLarge {
                n,
                max: self.max_size(),
            });
        }
        if self.counts[n].is_zero() {
            return Err(SamplerError::NoOutcomes {
                what: self.kind.name(),
                n,
            });
        }
        let components = sample_multiset_from(&self.spec, &self.counts, n, &mut rng.rng);
        // Items are sorted into a canonical presentation: the draw order of
        // components carries no information, and a deterministic layout makes
        // equal structures compare equal.
        if self.kind.is_tau2() {
            let mut loops = Vec::new();
            let mut pairs = Vec::new();
            for c in components {
                match c.size {
                    1 => loops.push(c.labels[0]),
                    2 => pairs.push((c.labels[0].min(c.labels[1]), c.labels[0].max(c.labels[1]))),
                    other => unreachable!("tau2 component of size {other}"),
                }
            }
            loops.sort_unstable();
            pairs.sort_unstable();
            Ok(SampledStructure::Tau2 { loops, pairs })
        } else {
            let mut loops = Vec::new();
            let mut edges = Vec::new();
            let mut triangles = Vec::new();
            for c in components {
                match (c.size, c.shape) {
                    (1, _) => loops.push(c.labels[0]),
                    (2, 0) => edges.push((c.labels[0], c.labels[1])),
                    (2, _) => edges.push((c.labels[1], c.labels[0])),
                    (3, s) => {
                        let t = if s == 0 {
                            [c.labels[0], c.labels[1], c.labels[2]]
                        } else {
                            [c.labels[0], c.labels[2], c.labels[1]]
                        };
                        // Rotate the smallest label first; the cyclic order
                        // (the structure itself) is unchanged.
                        let p = (0..3).min_by_key(|&i| t[i]).unwrap();
                        triangles.push([t[p], t[(p + 1) % 3], t[(p + 2) % 3]]);
                    }
                    (other, _) => unreachable!("tau3 component of size {other}"),
                }
            }
            loops.sort_unstable();
            edges.sort_unstable();
            triangles.sort_unstable();
            Ok(SampledStructure::Tau3 {
                loops,
                edges,
                triangles,
            })
        }
    }
}

/// One-off draw of a uniform labeled structure (builds the table first; use
/// [`StructureSampler`] for repeated draws).
pub fn sample_structure(
    kind: StructureKind,
    n: usize,
    rng: &mut RngState,
) -> Result<SampledStructure, SamplerError> {
    StructureSampler::new(kind, n).sample(n, rng)
}

/// The families with a rejection-based cyclically reduced sampler.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CrFamily {
    All,
    FiniteIndex,
    Free,
    FreeFiniteIndex,
}

impl CrFamily {
    fn kinds(self) -> (StructureKind, StructureKind) {
        match self {
            CrFamily::All => (StructureKind::Tau2, StructureKind::Tau3),
            CrFamily::FiniteIndex => (StructureKind::Tau2, StructureKind::Tau3Permutational),
            CrFamily::Free => (StructureKind::Tau2Loopfree, StructureKind::Tau3Loopfree),
            CrFamily::FreeFiniteIndex => {
                (StructureKind::Tau2Loopfree, StructureKind::Tau3PermLoopfree)
            }
        }
    }

    fn name(self) -> &'static str {
        match self {
            CrFamily::All => "cyclically reduced graphs",
            CrFamily::FiniteIndex => "cyclically reduced finite-index graphs",
            CrFamily::Free => "loop-free cyclically reduced graphs",
            CrFamily::FreeFiniteIndex => "loop-free finite-index graphs",
        }
    }
}

/// A cyclically reduced draw together with how many disconnected candidate
/// pairs were rejected before it.
#[derive(Clone, Debug)]
pub struct CrSample {
    pub graph: StallingsGraph,
    pub rejections: u64,
}

/// Uniform sampler for labeled proper cyclically reduced graphs of a family:
/// independent structure draws accepted when their union is connected.
pub struct CrSampler {
    family: CrFamily,
    s2: StructureSampler,
    s3: StructureSampler,
}

impl CrSampler {
    pub fn new(family: CrFamily, max_n: usize) -> CrSampler {
        let (k2, k3) = family.kinds();
        CrSampler {
            family,
            s2: StructureSampler::new(k2, max_n),
            s3: StructureSampler::new(k3, max_n),
        }
    }

    pub fn family(&self) -> CrFamily {
        self.family
    }

    pub fn max_size(&self) -> usize {
        self.s2.max_size()
    }

    /// Uniform labeled connected pair on `0..n` (unrooted, proper graph).
    pub fn sample(&self, n: usize, rng: &mut RngState) -> Result<CrSample, SamplerError> {
        if n > self.max_size() {
            return Err(SamplerError::TooLarge {
                n,
                max: self.max_size(),
            });
        }
        if n == 0 || self.s2.count(n).is_zero() || self.s3.count(n).is_zero() {
            return Err(SamplerError::NoOutcomes {
                what: self.family.name(),
                n,
            });
        }
        let mut rejections = 0u64;
        loop {
            let t2 = self.s2.sample(n, rng)?;
            let t3 = self.s3.sample(n, rng)?;
            let (
                SampledStructure::Tau2 { loops: al, pairs },
                SampledStructure::Tau3 {
                    loops: bl,
                    edges,
                    triangles,
                },
            ) = (t2, t3)
            else {
                unreachable!("family kinds are one tau2 and one tau3");
            };
            let graph = StallingsGraph::new(n, None, al, pairs, bl, edges, triangles);
            if is_connected(&graph) {
                return Ok(CrSample { graph, rejections });
            }
            rejections += 1;
        }
    }
}

/// One-off cyclically reduced draw (builds tables first; use [`CrSampler`]
/// for repeated draws).
pub fn sample_cyclically_reduced(
    n: usize,
    family: CrFamily,
    rng: &mut RngState,
) -> Result<CrSample, SamplerError> {
    CrSampler::new(family, n).sample(n, rng)
}

fn is_connected(g: &StallingsGraph) -> bool {
    if g.n == 0 {
        return false;
    }
    let nav = g.navigation();
    let mut seen = vec![false; g.n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for next in [nav.a[v], nav.b_next[v], nav.b_prev[v]]
            .into_iter()
            .flatten()
        {
            if !seen[next] {
                seen[next] = true;
                count += 1;
                stack.push(next);
            }
        }
    }
    count == g.n
}

/// Loops of a graph in label order, `a`-loop before `b`-loop on a shared
/// vertex; this fixes the meaning of "delete the i-th loop".
fn loops_in_label_order(g: &StallingsGraph) -> Vec<(usize, bool)> {
    let mut loops: Vec<(usize, bool)> = g.a_loops.iter().map(|&v| (v, true)).collect();
    loops.extend(g.b_loops.iter().map(|&v| (v, false)));
    loops.sort_by_key(|&(v, is_a)| (v, !is_a));
    loops
}

fn size_one_subgroup(which: usize) -> StallingsGraph {
    let (a, b) = match which {
        0 => (vec![], vec![]),
        1 => (vec![0], vec![]),
        2 => (vec![], vec![0]),
        _ => (vec![0], vec![0]),
    };
    StallingsGraph::new(1, Some(0), a, vec![], b, vec![], vec![])
}

/// Uniform sampler over all subgroups of a given size.
pub struct SubgroupSampler {
    cr: CrSampler,
}

impl SubgroupSampler {
    pub fn new(max_n: usize) -> SubgroupSampler {
        SubgroupSampler {
            cr: CrSampler::new(CrFamily::All, max_n),
        }
    }

    pub fn max_size(&self) -> usize {
        self.cr.max_size()
    }

    pub fn cyclically_reduced(
        &self,
        n: usize,
        rng: &mut RngState,
    ) -> Result<CrSample, SamplerError> {
        self.cr.sample(n, rng)
    }

    /// Exactly uniform size-`n` subgroup, returned in canonical labeling.
    pub fn sample(&self, n: usize, rng: &mut RngState) -> Result<StallingsGraph, SamplerError> {
        if n == 0 {
            return Err(SamplerError::NoOutcomes {
                what: "subgroups",
                n,
            });
        }
        if n == 1 {
            // The four size-1 subgroups are equinumerous classes; the
            // root/loop marking degenerates here, so draw directly.
            return Ok(size_one_subgroup(uniform_below(rng, 4)));
        }
        // Subgroups are in n!-to-n! correspondence with PAIRS of a labeled
        // cyclically reduced graph and a mark (one of its n vertices or one
        // of its l loops), so the pair must be drawn jointly uniformly.
        // Drawing the graph first and then a mark would underweight loopy
        // graphs by (n + l); instead a graph together with a tentative mark
        // index below the universal bound n + 2n is accepted only when the
        // index is a real mark, which keeps every accepted pair equally
        // likely at acceptance rate (n + l) / 3n >= 1/3.
        let graph = loop {
            let mut graph = self.cr.sample(n, rng)?.graph;
            let loops = loops_in_label_order(&graph);
            let i = uniform_below(rng, 3 * n);
            if i >= n + loops.len() {
                continue;
            }
            if i < n {
                graph.root = Some(i);
            } else {
                let (v, is_a) = loops[i - n];
                if is_a {
                    graph.a_loops.retain(|&x| x != v);
                } else {
                    graph.b_loops.retain(|&x| x != v);
                }
                graph.root = Some(v);
            }
            break graph;
        };
        Ok(graph.canonical_relabel())
    }
}

/// One-off uniform subgroup draw (builds tables first; use
/// [`SubgroupSampler`] for repeated draws).
pub fn sample_subgroup(n: usize, rng: &mut RngState) -> Result<StallingsGraph, SamplerError> {
    SubgroupSampler::new(n).sample(n, rng)
}

/// Uniform sampler over the index-`n` (finite-index) subgroups.
pub struct FiniteIndexSampler {
    cr: CrSampler,
}

impl FiniteIndexSampler {
    pub fn new(max_n: usize) -> FiniteIndexSampler {
        FiniteIndexSampler {
            cr: CrSampler::new(CrFamily::FiniteIndex, max_n),
        }
    }

    pub fn max_size(&self) -> usize {
        self.cr.max_size()
    }

    pub fn cyclically_reduced(
        &self,
        n: usize,
        rng: &mut RngState,
    ) -> Result<CrSample, SamplerError> {
        self.cr.sample(n, rng)
    }

    /// Exactly uniform subgroup of index `n` (finite-index graphs are always
    /// cyclically reduced, so a uniform root is all that is needed).
    pub fn sample(&self, n: usize, rng: &mut RngState) -> Result<StallingsGraph, SamplerError> {
        let mut graph = self.cr.sample(n, rng)?.graph;
        graph.root = Some(uniform_below(rng, n));
        Ok(graph.canonical_relabel())
    }
}

/// One-off uniform finite-index draw (builds tables first; use
/// [`FiniteIndexSampler`] for repeated draws).
pub fn sample_finite_index(n: usize, rng: &mut RngState) -> Result<StallingsGraph, SamplerError> {
    FiniteIndexSampler::new(n).sample(n, rng)
}

/// Uniform sampler over the free subgroups of a given size.
pub struct FreeSampler {
    cr: CrSampler,
    tables: FreeTables,
}

impl FreeSampler {
    pub fn new(max_n: usize) -> FreeSampler {
        Self::new_cached(max_n, None)
    }

    pub fn new_cached(max_n: usize, cache_dir: Option<&Path>) -> FreeSampler {
        FreeSampler {
            cr: CrSampler::new(CrFamily::Free, max_n),
            tables: FreeTables::new_cached(max_n, cache_dir),
        }
    }

    pub fn max_size(&self) -> usize {
        self.cr.max_size()
    }

    pub fn tables(&self) -> &FreeTables {
        &self.tables
    }

    pub fn cyclically_reduced(
        &self,
        n: usize,
        rng: &mut RngState,
    ) -> Result<CrSample, SamplerError> {
        self.cr.sample(n, rng)
    }

    /// Exactly uniform free subgroup of size `n`.
    ///
    /// Chooses between the cyclically reduced case (weight `n * g0(n)`,
    /// rooted uniformly) and the one-loop case (weight `g1(n)`), and in the
    /// latter replays the loop decomposition: the loop letter, then a chain
    /// of two-vertex unfoldings with recorded edge orientations, ending in a
    /// loop-free core drawn weighted by its isolated-`b`-edge count; the
    /// graph is rebuilt in reverse and the loop is deleted to give the root.
    pub fn sample(&self, n: usize, rng: &mut RngState) -> Result<StallingsGraph, SamplerError> {
        if n > self.max_size() {
            return Err(SamplerError::TooLarge {
                n,
                max: self.max_size(),
            });
        }
        let err = SamplerError::NoOutcomes {
            what: "free subgroups",
            n,
        };
        if n == 0 {
            return Err(err);
        }
        let ga = &self.tables.ga;
        let gv = &self.tables.gv;
        let w_cr = BigUint::from(n) * &self.tables.g[n];
        let g_b = BigUint::from(n) * &ga[n - 1];
        let g_one = &ga[n] + &g_b;
        let total = &w_cr + &g_one;
        if total.is_zero() {
            return Err(err);
        }

        if uniform_biguint_below(rng, &total) < w_cr {
            // Cyclically reduced case: loop-free graph, uniform root.
            let mut graph = self.cr.sample(n, rng)?.graph;
            graph.root = Some(uniform_below(rng, n));
            return Ok(graph.canonical_relabel());
        }

        // One-loop case.  Decide the loop letter, then unfold the chain.
        let b_loop_step = uniform_biguint_below(rng, &g_one) >= ga[n];
        let mut m = if b_loop_step { n - 1 } else { n };
        let mut orientations: Vec<bool> = Vec::new();
        loop {
            let terminal_w = BigUint::from(m) * &gv[m - 1];
            let x = uniform_biguint_below(rng, &ga[m]);
            if x < terminal_w {
                break;
            }
            orientations.push(uniform_below(rng, 2) == 1);
            m -= 2;
        }

        // Terminal core: loop-free cyclically reduced graph of size m-1,
        // weighted by its number of isolated b-edges (rejection against the
        // maximum possible count), with one marked edge chosen uniformly.
        let core_size = m - 1;
        let k_max = core_size / 2;
        let core = loop {
            let candidate = self.cr.sample(core_size, rng)?.graph;
            let k = candidate.b_edges.len();
            if k > 0 && uniform_below(rng, k_max) < k {
                break candidate;
            }
        };
        let marked = uniform_below(rng, core.b_edges.len());

        // Rebuild upward.  Close the marked edge into a triangle through a
        // fresh vertex carrying the a-loop.
        let mut a_loops = core.a_loops;
        let mut a_pairs = core.a_pairs;
        let mut b_loops = core.b_loops;
        let mut b_edges = core.b_edges;
        let mut b_triangles = core.b_triangles;
        let (x0, y0) = b_edges.swap_remove(marked);
        let mut loop_vertex = core_size;
        let mut next = core_size + 1;
        b_triangles.push([x0, y0, loop_vertex]);
        a_loops.push(loop_vertex);

        // Undo each chain step: the previous loop vertex trades its a-loop
        // for an a-pair to a fresh vertex, which hangs off a fresh a-loop
        // vertex by a b-edge in the recorded orientation.
        while let Some(bit) = orientations.pop() {
            let y = loop_vertex;
            a_loops.retain(|&v| v != y);
            let v = next;
            let x = next + 1;
            next += 2;
            a_pairs.push((y, x));
            b_edges.push(if bit { (v, x) } else { (x, v) });
            a_loops.push(v);
            loop_vertex = v;
        }

        // Undo the b-loop step, if the loop letter was b.
        if b_loop_step {
            let x = loop_vertex;
            a_loops.retain(|&v| v != x);
            let v = next;
            next += 1;
            a_pairs.push((x, v));
            b_loops.push(v);
            loop_vertex = v;
        }
        assert_eq!(next, n, "reconstruction must use all vertices");

        // Delete the single loop and root at its vertex.
        if b_loop_step {
            b_loops.retain(|&v| v != loop_vertex);
        } else {
            a_loops.retain(|&v| v != loop_vertex);
        }
        let graph = StallingsGraph::new(
            n,
            Some(loop_vertex),
            a_loops,
            a_pairs,
            b_loops,
            b_edges,
            b_triangles,
        );
        Ok(graph.canonical_relabel())
    }
}

/// One-off uniform free subgroup draw (builds tables first; use
/// [`FreeSampler`] for repeated draws).
pub fn sample_free(n: usize, rng: &mut RngState) -> Result<StallingsGraph, SamplerError> {
    FreeSampler::new(n).sample(n, rng)
}
