//! Exhaustive ground truth for small sizes.
//!
//! Everything here recomputes, by brute force, quantities that the counting
//! and query modules obtain by formula: all pairs of an involution-with-fixed
//! points structure (the `a`-part) and a partial order-3 structure (the
//! `b`-part) are enumerated on a small labeled vertex set, filtered for
//! connectivity, and — for subgroup counts — pushed through the root/loop
//! marking scheme followed by canonical deduplication.  It is meant as a
//! test backend and for the CLI's `verify` command, not for performance.

use std::collections::{BTreeSet, HashSet};

use thiserror::Error;

use crate::stallings::{CombinatorialType, StallingsGraph};
use crate::subgroup_props::{index, is_free, Index};
use crate::words::{Letter, Word};

/// Hard ceiling on the exhaustive enumeration; beyond this the pair count
/// (hundreds of millions at size 9) stops being practical.
pub const MAX_ORACLE_SIZE: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("exhaustive enumeration supports sizes 1..={MAX_ORACLE_SIZE}, got {0}")]
    TooLarge(usize),
    #[error("size must be at least 1")]
    ZeroSize,
}

/// Families the oracle can restrict to, mirroring the counting columns.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OracleFamily {
    All,
    FiniteIndex,
    CrFree,
    Free,
    FreeFiniteIndex,
}

/// Brute-force tallies at one size, for one family.
#[derive(Clone, Debug)]
pub struct BruteCounts {
    pub size: usize,
    /// Connected structure pairs of the family by total loop count
    /// (`a`-loops plus `b`-loops); length `2 size + 1`.
    pub by_loops: Vec<u64>,
    /// Connected structure pairs of the family by isolated `b`-edge count;
    /// length `size/2 + 1`.
    pub by_isolated_edges: Vec<u64>,
    /// Connected structure pairs of the family.
    pub connected: u64,
    /// All structure pairs of the family, connected or not.
    pub pairs: u64,
    /// Distinct subgroups of this size in the family: canonical classes of
    /// the root/loop marking scheme applied to all connected pairs.
    pub rooted: u64,
}

struct PairItems {
    a_loops: Vec<usize>,
    a_pairs: Vec<(usize, usize)>,
    b_loops: Vec<usize>,
    b_edges: Vec<(usize, usize)>,
    b_triangles: Vec<[usize; 3]>,
}

#[derive(Clone, Copy)]
struct Variant {
    a_loops: bool,
    b_loops: bool,
    b_edges: bool,
}

fn variant_for(family: OracleFamily) -> Variant {
    match family {
        OracleFamily::All => Variant {
            a_loops: true,
            b_loops: true,
            b_edges: true,
        },
        OracleFamily::FiniteIndex => Variant {
            a_loops: true,
            b_loops: true,
            b_edges: false,
        },
        OracleFamily::CrFree | OracleFamily::Free => Variant {
            a_loops: false,
            b_loops: false,
            b_edges: true,
        },
        OracleFamily::FreeFiniteIndex => Variant {
            a_loops: false,
            b_loops: false,
            b_edges: false,
        },
    }
}

/// Enumerate all `a`-part structures over the unused labels, smallest label
/// first, calling `then` for each completed assignment.
fn walk_a<F: FnMut(&mut PairItems)>(
    items: &mut PairItems,
    used: &mut [bool],
    variant: Variant,
    then: &mut F,
) {
    let Some(u) = used.iter().position(|&x| !x) else {
        then(items);
        return;
    };
    used[u] = true;
    if variant.a_loops {
        items.a_loops.push(u);
        walk_a(items, used, variant, then);
        items.a_loops.pop();
    }
    for v in u + 1..used.len() {
        if used[v] {
            continue;
        }
        used[v] = true;
        items.a_pairs.push((u, v));
        walk_a(items, used, variant, then);
        items.a_pairs.pop();
        used[v] = false;
    }
    used[u] = false;
}

/// Enumerate all `b`-part structures over the unused labels: loops,
/// directed isolated edges (two per unordered pair), and triangles with two
/// cyclic orientations per 3-set.
fn walk_b<F: FnMut(&mut PairItems)>(
    items: &mut PairItems,
    used: &mut [bool],
    variant: Variant,
    then: &mut F,
) {
    let Some(u) = used.iter().position(|&x| !x) else {
        then(items);
        return;
    };
    used[u] = true;
    if variant.b_loops {
        items.b_loops.push(u);
        walk_b(items, used, variant, then);
        items.b_loops.pop();
    }
    if variant.b_edges {
        for v in 0..used.len() {
            if used[v] {
                continue;
            }
            used[v] = true;
            for edge in [(u, v), (v, u)] {
                items.b_edges.push(edge);
                walk_b(items, used, variant, then);
                items.b_edges.pop();
            }
            used[v] = false;
        }
    }
    let free: Vec<usize> = (0..used.len()).filter(|&v| !used[v]).collect();
    for (i, &v) in free.iter().enumerate() {
        for &w in &free[i + 1..] {
            used[v] = true;
            used[w] = true;
            for tri in [[u, v, w], [u, w, v]] {
                items.b_triangles.push(tri);
                walk_b(items, used, variant, then);
                items.b_triangles.pop();
            }
            used[v] = false;
            used[w] = false;
        }
    }
    used[u] = false;
}

/// Visit every structure pair of the variant on `n` labels.
fn walk_pairs<F: FnMut(&PairItems)>(n: usize, variant: Variant, mut leaf: F) {
    let mut items = PairItems {
        a_loops: Vec::new(),
        a_pairs: Vec::new(),
        b_loops: Vec::new(),
        b_edges: Vec::new(),
        b_triangles: Vec::new(),
    };
    let mut used_a = vec![false; n];
    walk_a(&mut items, &mut used_a, variant, &mut |items| {
        let mut used_b = vec![false; n];
        walk_b(items, &mut used_b, variant, &mut |items| leaf(items));
    });
}

fn is_connected(n: usize, items: &PairItems) -> bool {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(p, q) in &items.a_pairs {
        adj[p].push(q);
        adj[q].push(p);
    }
    for &(p, q) in &items.b_edges {
        adj[p].push(q);
        adj[q].push(p);
    }
    for &[u, v, w] in &items.b_triangles {
        adj[u].push(v);
        adj[v].push(w);
        adj[w].push(u);
        adj[u].push(w);
        adj[v].push(u);
        adj[w].push(v);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

fn graph_from(n: usize, root: usize, items: &PairItems) -> StallingsGraph {
    StallingsGraph::new(
        n,
        Some(root),
        items.a_loops.clone(),
        items.a_pairs.clone(),
        items.b_loops.clone(),
        items.b_edges.clone(),
        items.b_triangles.clone(),
    )
}

fn graph_without_loop(
    n: usize,
    items: &PairItems,
    loop_vertex: usize,
    is_a_loop: bool,
) -> StallingsGraph {
    let mut a_loops = items.a_loops.clone();
    let mut b_loops = items.b_loops.clone();
    if is_a_loop {
        a_loops.retain(|&v| v != loop_vertex);
    } else {
        b_loops.retain(|&v| v != loop_vertex);
    }
    StallingsGraph::new(
        n,
        Some(loop_vertex),
        a_loops,
        items.a_pairs.clone(),
        b_loops,
        items.b_edges.clone(),
        items.b_triangles.clone(),
    )
}

fn is_trivial_graph(g: &StallingsGraph) -> bool {
    g.n == 1
        && g.a_loops.is_empty()
        && g.a_pairs.is_empty()
        && g.b_loops.is_empty()
        && g.b_edges.is_empty()
        && g.b_triangles.is_empty()
}

fn root_is_proper(g: &StallingsGraph) -> bool {
    let root = g.root.expect("rooted graph");
    let nav = g.navigation();
    nav.a[root].is_some() && (nav.b_next[root].is_some() || nav.b_prev[root].is_some())
}

fn in_family(family: OracleFamily, g: &StallingsGraph) -> bool {
    match family {
        OracleFamily::All => true,
        OracleFamily::FiniteIndex => matches!(index(g), Index::Finite(_)),
        OracleFamily::Free => is_free(g).is_some() && !is_trivial_graph(g),
        OracleFamily::CrFree => is_free(g).is_some() && root_is_proper(g),
        OracleFamily::FreeFiniteIndex => {
            is_free(g).is_some() && matches!(index(g), Index::Finite(_))
        }
    }
}

/// Count distinct subgroups of the family at size `n` by applying the
/// root-or-loop marking to every connected structure pair and deduplicating
/// canonical forms.
fn rooted_count(n: usize, family: OracleFamily) -> u64 {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut rooted = 0u64;
    let consider = |g: StallingsGraph, seen: &mut HashSet<Vec<u8>>, rooted: &mut u64| {
        if seen.insert(g.canonical_form()) && in_family(family, &g) {
            *rooted += 1;
        }
    };
    walk_pairs(n, variant_for(OracleFamily::All), |items| {
        if !is_connected(n, items) {
            return;
        }
        for root in 0..n {
            consider(graph_from(n, root, items), &mut seen, &mut rooted);
        }
        let mut loops: Vec<(usize, bool)> = items.a_loops.iter().map(|&v| (v, true)).collect();
        loops.extend(items.b_loops.iter().map(|&v| (v, false)));
        for (v, is_a) in loops {
            consider(
                graph_without_loop(n, items, v, is_a),
                &mut seen,
                &mut rooted,
            );
        }
    });
    if n == 1 {
        // The one-vertex graph with no items (the trivial subgroup) arises
        // from deleting both loops, which the single-mark scheme never does.
        consider(StallingsGraph::trivial(), &mut seen, &mut rooted);
    }
    rooted
}

/// Exhaustive tallies for one family at size `n` (see [`BruteCounts`]).
pub fn brute_counts(n: usize, family: OracleFamily) -> Result<BruteCounts, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroSize);
    }
    if n > MAX_ORACLE_SIZE {
        return Err(OracleError::TooLarge(n));
    }
    let mut counts = BruteCounts {
        size: n,
        by_loops: vec![0; 2 * n + 1],
        by_isolated_edges: vec![0; n / 2 + 1],
        connected: 0,
        pairs: 0,
        rooted: 0,
    };
    walk_pairs(n, variant_for(family), |items| {
        counts.pairs += 1;
        if is_connected(n, items) {
            counts.connected += 1;
            counts.by_loops[items.a_loops.len() + items.b_loops.len()] += 1;
            counts.by_isolated_edges[items.b_edges.len()] += 1;
        }
    });
    counts.rooted = rooted_count(n, family);
    Ok(counts)
}

/// The set of combinatorial types realized by connected proper structure
/// pairs of size `n`, observed by exhaustive enumeration.
pub fn brute_type_set(n: usize) -> Result<BTreeSet<CombinatorialType>, OracleError> {
    if n == 0 {
        return Err(OracleError::ZeroSize);
    }
    if n > MAX_ORACLE_SIZE {
        return Err(OracleError::TooLarge(n));
    }
    let mut types = BTreeSet::new();
    walk_pairs(n, variant_for(OracleFamily::All), |items| {
        if is_connected(n, items) {
            types.insert(graph_from(n, 0, items).combinatorial_type());
        }
    });
    Ok(types)
}

/// All shortlex normal forms of length at most `max_len` that label loops
/// at the root, in shortlex order.  Equals the set of members of the
/// subgroup up to that length.
pub fn enumerate_loop_words(g: &StallingsGraph, max_len: usize) -> Vec<Word> {
    let root = g.root.expect("loop enumeration requires a rooted graph");
    let nav = g.navigation();
    let mut out: Vec<Word> = Vec::new();
    let mut letters: Vec<Letter> = Vec::new();

    fn dfs(
        nav: &crate::stallings::Navigation,
        root: usize,
        at: usize,
        letters: &mut Vec<Letter>,
        max_len: usize,
        out: &mut Vec<Word>,
    ) {
        if at == root {
            out.push(Word(letters.clone()));
        }
        if letters.len() == max_len {
            return;
        }
        let last_is_a = matches!(letters.last(), Some(Letter::A));
        let last_is_b = matches!(letters.last(), Some(Letter::B | Letter::BInv));
        if !last_is_a {
            if let Some(next) = nav.a[at] {
                letters.push(Letter::A);
                dfs(nav, root, next, letters, max_len, out);
                letters.pop();
            }
        }
        if !last_is_b {
            if let Some(next) = nav.b_next[at] {
                letters.push(Letter::B);
                dfs(nav, root, next, letters, max_len, out);
                letters.pop();
            }
            if let Some(next) = nav.b_prev[at] {
                letters.push(Letter::BInv);
                dfs(nav, root, next, letters, max_len, out);
                letters.pop();
            }
        }
    }

    dfs(&nav, root, root, &mut letters, max_len, &mut out);
    out.sort_by(|x, y| x.cmp_shortlex(y));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{
        free_edges_tables, gpr_loops_tables, FiTables, FrFiTables, SubgroupCounts,
    };
    use crate::stallings::stallings_graph;
    use crate::words::parse_generators;
    use num_traits::ToPrimitive;

    #[test]
    fn rejects_out_of_range_sizes() {
        assert_eq!(
            brute_counts(0, OracleFamily::All).unwrap_err(),
            OracleError::ZeroSize
        );
        assert_eq!(
            brute_counts(9, OracleFamily::All).unwrap_err(),
            OracleError::TooLarge(9)
        );
    }

    #[test]
    fn loop_tables_match_connected_recurrences() {
        let (totals, connected) = gpr_loops_tables(5);
        for n in 1..=5usize {
            let brute = brute_counts(n, OracleFamily::All).unwrap();
            let expected: Vec<u64> = connected[n].iter().map(|x| x.to_u64().unwrap()).collect();
            assert_eq!(brute.by_loops, expected, "loops row n={n}");
            let total: u64 = totals[n].iter().map(|x| x.to_u64().unwrap()).sum();
            assert_eq!(brute.pairs, total, "pair total n={n}");
            assert_eq!(
                brute.connected,
                expected.iter().sum::<u64>(),
                "connected n={n}"
            );
        }
    }

    #[test]
    fn isolated_edge_tables_match_connected_recurrences() {
        let (_, connected) = free_edges_tables(6);
        for (n, row) in connected.iter().enumerate().skip(1) {
            let brute = brute_counts(n, OracleFamily::CrFree).unwrap();
            let expected: Vec<u64> = row.iter().map(|x| x.to_u64().unwrap()).collect();
            assert_eq!(brute.by_isolated_edges, expected, "edges row n={n}");
        }
    }

    #[test]
    fn restricted_families_match_their_tables() {
        let fi = FiTables::new(5);
        let frfi = FrFiTables::new(6);
        for n in 1..=5usize {
            let brute = brute_counts(n, OracleFamily::FiniteIndex).unwrap();
            assert_eq!(brute.connected, fi.g[n].to_u64().unwrap(), "fi n={n}");
        }
        let brute = brute_counts(6, OracleFamily::FreeFiniteIndex).unwrap();
        assert_eq!(brute.connected, frfi.g[6].to_u64().unwrap());
    }

    #[test]
    fn rooted_counts_match_counting_columns() {
        let counts = SubgroupCounts::compute(5, None);
        for n in 1..=5usize {
            let columns = [
                (OracleFamily::All, &counts.all),
                (OracleFamily::FiniteIndex, &counts.finite_index),
                (OracleFamily::CrFree, &counts.cr_free),
                (OracleFamily::Free, &counts.free),
                (OracleFamily::FreeFiniteIndex, &counts.free_finite_index),
            ];
            for (family, column) in columns {
                let brute = brute_counts(n, family).unwrap();
                assert_eq!(
                    brute.rooted,
                    column[n].to_u64().unwrap(),
                    "family {family:?} n={n}"
                );
            }
        }
    }

    #[test]
    fn four_size_one_classes() {
        let brute = brute_counts(1, OracleFamily::All).unwrap();
        assert_eq!(brute.rooted, 4);
        assert_eq!(brute.connected, 1);
        assert_eq!(brute.by_loops[2], 1);
    }

    #[test]
    fn loop_words_on_small_graphs() {
        let trivial = StallingsGraph::trivial();
        let words = enumerate_loop_words(&trivial, 5);
        assert_eq!(words, vec![Word::empty()]);

        let a_only = stallings_graph(&parse_generators("a").unwrap());
        let words = enumerate_loop_words(&a_only, 1);
        assert_eq!(words.len(), 2);
        assert_eq!(words[0], Word::empty());
        assert_eq!(words[1], Word(vec![Letter::A]));
    }

    fn all_normal_words(max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Vec::<Letter>::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                let last_is_a = matches!(w.last(), Some(Letter::A));
                let last_is_b = matches!(w.last(), Some(Letter::B | Letter::BInv));
                if !last_is_a {
                    let mut e = w.clone();
                    e.push(Letter::A);
                    next.push(e);
                }
                if !last_is_b {
                    for l in [Letter::B, Letter::BInv] {
                        let mut e = w.clone();
                        e.push(l);
                        next.push(e);
                    }
                }
            }
            out.extend(next.iter().cloned().map(Word));
            frontier = next;
        }
        out
    }

    #[test]
    fn loop_words_agree_with_membership() {
        let graphs = [
            stallings_graph(&parse_generators("ab").unwrap()),
            stallings_graph(&parse_generators("abab^-1,ba").unwrap()),
            stallings_graph(&parse_generators("a,b").unwrap()),
        ];
        for g in &graphs {
            let max_len = 6;
            let listed: HashSet<Word> = enumerate_loop_words(g, max_len).into_iter().collect();
            for w in all_normal_words(max_len) {
                assert_eq!(
                    listed.contains(&w),
                    g.contains(&w),
                    "word {w:?} on graph {g:?}"
                );
            }
        }
    }
}
