//! Structural queries on subgroup graphs: index, isomorphism type,
//! freeness, independent generating sets, and which combinatorial types are
//! realizable by proper cyclically reduced graphs.

use std::collections::VecDeque;
use std::fmt;

use crate::stallings::{CombinatorialType, StallingsGraph, ValidationMode};
use crate::words::{Letter, Word};

/// The index of a subgroup in the whole group.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Index {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => write!(f, "infinite"),
        }
    }
}

/// The isomorphism type of a subgroup: a free product of `l2` copies of the
/// two-element group, `l3` copies of the three-element group, and a free
/// group of rank `r`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct IsomorphismType {
    pub l2: usize,
    pub l3: usize,
    pub r: usize,
}

impl fmt::Display for IsomorphismType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.l2, self.l3, self.r)
    }
}

/// An independent generating set, split by the kind of factor each word
/// generates: `b2` holds order-2 words, `b3` order-3 words, and
/// `b12` and `b13` together form a basis of the free factor.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Basis {
    pub b2: Vec<Word>,
    pub b3: Vec<Word>,
    pub b12: Vec<Word>,
    pub b13: Vec<Word>,
}

impl Basis {
    /// All basis words in one list.
    pub fn all_words(&self) -> Vec<Word> {
        self.b2
            .iter()
            .chain(&self.b3)
            .chain(&self.b12)
            .chain(&self.b13)
            .cloned()
            .collect()
    }

    /// Free rank contribution.
    pub fn free_rank(&self) -> usize {
        self.b12.len() + self.b13.len()
    }
}

/// The index of the subgroup represented by `g`: finite (and equal to the
/// vertex count) exactly when the graph is proper with no isolated
/// `b`-edges.
pub fn index(g: &StallingsGraph) -> Index {
    if g.b_edges.is_empty() && g.is_valid(ValidationMode::Proper) {
        Index::Finite(g.n)
    } else {
        Index::Infinite
    }
}

/// The isomorphism type of the subgroup represented by a rooted valid graph.
///
/// For a single vertex the four possible graphs are handled directly.  For
/// `n >= 2` the free rank is `(n - 2*k3 - 3*l2 - 4*l3)/6 + c`, where the
/// constant `c` is 1 when the root carries both an `a`- and a `b`-item
/// (cyclically reduced graph), 1/3 when it carries only an `a`-item, and 1/2
/// when it carries only a `b`-item.  The result is always an integer;
/// a non-integer value indicates an invalid input graph and panics.
pub fn isomorphism_type(g: &StallingsGraph) -> IsomorphismType {
    let root = g.root.expect("isomorphism type requires a rooted graph");
    let t = g.combinatorial_type();
    if g.n == 1 {
        return IsomorphismType {
            l2: t.l2,
            l3: t.l3,
            r: 0,
        };
    }
    let nav = g.navigation();
    let root_a = nav.a[root].is_some();
    let root_b = nav.b_next[root].is_some() || nav.b_prev[root].is_some();
    // The constant c above, scaled by 6.
    let six_c = match (root_a, root_b) {
        (true, true) => 6,
        (true, false) => 2,
        (false, true) => 3,
        (false, false) => panic!("root is isolated in a graph with n >= 2"),
    };
    let six_r = t.n as i64 - 2 * t.k3 as i64 - 3 * t.l2 as i64 - 4 * t.l3 as i64 + six_c;
    assert!(
        six_r >= 0 && six_r % 6 == 0,
        "free rank formula yielded {six_r}/6 on an invalid graph"
    );
    IsomorphismType {
        l2: t.l2,
        l3: t.l3,
        r: (six_r / 6) as usize,
    }
}

/// `Some(rank)` when the subgroup is free (no order-2 and no order-3 basis
/// elements), `None` otherwise.
pub fn is_free(g: &StallingsGraph) -> Option<usize> {
    let iso = isomorphism_type(g);
    (iso.l2 == 0 && iso.l3 == 0).then_some(iso.r)
}

/// An independent generating set for the subgroup of a rooted valid graph.
///
/// A spanning tree containing two edges of every `b`-triangle is grown
/// breadth-first from the root; whenever a triangle vertex is discovered its
/// two cycle successors are discovered immediately through the triangle.
/// Every non-tree item contributes the word `u_p · c · u_q^-1` (tree path to
/// its start, the item's letter, reversed tree path from its end):
/// `a`-loops give order-2 words, `b`-loops order-3 words, isolated non-tree
/// `b`-edges and non-tree `a`-pairs free-factor words (one per pair, the
/// shortlex-smaller of the two mutually inverse readings).  The second
/// directions of tree `a`-pairs and the third triangle edges spell trivial
/// words and are dropped.
pub fn basis(g: &StallingsGraph) -> Basis {
    let root = g.root.expect("basis requires a rooted graph");
    let nav = g.navigation();

    // Item lookup tables.
    let mut pair_of = vec![usize::MAX; g.n];
    for (i, &(p, q)) in g.a_pairs.iter().enumerate() {
        pair_of[p] = i;
        pair_of[q] = i;
    }
    let mut edge_from = vec![usize::MAX; g.n];
    for (i, &(p, _)) in g.b_edges.iter().enumerate() {
        edge_from[p] = i;
    }
    let mut triangle_of = vec![usize::MAX; g.n];
    for (i, t) in g.b_triangles.iter().enumerate() {
        for &v in t {
            triangle_of[v] = i;
        }
    }

    let mut path: Vec<Option<Vec<Letter>>> = vec![None; g.n];
    let mut pair_in_tree = vec![false; g.a_pairs.len()];
    let mut edge_in_tree = vec![false; g.b_edges.len()];
    let mut queue = VecDeque::new();

    // Discover `v` with tree path `u`, chaining through its triangle so that
    // two of the triangle's edges always join the tree.
    let discover = |v: usize,
                    u: Vec<Letter>,
                    path: &mut Vec<Option<Vec<Letter>>>,
                    queue: &mut VecDeque<usize>| {
        debug_assert!(path[v].is_none());
        path[v] = Some(u);
        queue.push_back(v);
        if triangle_of[v] != usize::MAX {
            let mut x = v;
            for _ in 0..2 {
                let y = nav.b_next[x].expect("triangle vertex without successor");
                assert!(
                    path[y].is_none(),
                    "triangle visited twice while building the spanning tree"
                );
                let mut u = path[x].clone().unwrap();
                u.push(Letter::B);
                path[y] = Some(u);
                queue.push_back(y);
                x = y;
            }
        }
    };

    discover(root, Vec::new(), &mut path, &mut queue);
    while let Some(v) = queue.pop_front() {
        let u_v = path[v].clone().unwrap();
        if let Some(w) = nav.a[v] {
            if w != v && path[w].is_none() {
                pair_in_tree[pair_of[v]] = true;
                let mut u = u_v.clone();
                u.push(Letter::A);
                discover(w, u, &mut path, &mut queue);
            }
        }
        if let Some(w) = nav.b_next[v] {
            if w != v && path[w].is_none() {
                // Triangle successors were chained at discovery, so this is
                // an isolated b-edge.
                edge_in_tree[edge_from[v]] = true;
                let mut u = u_v.clone();
                u.push(Letter::B);
                discover(w, u, &mut path, &mut queue);
            }
        }
        if let Some(w) = nav.b_prev[v] {
            if w != v && path[w].is_none() {
                edge_in_tree[edge_from[w]] = true;
                let mut u = u_v.clone();
                u.push(Letter::BInv);
                discover(w, u, &mut path, &mut queue);
            }
        }
    }

    let word_to = |v: usize| -> Word { Word(path[v].clone().expect("graph is not connected")) };
    let item_word = |p: usize, c: Letter, q: usize| -> Word {
        word_to(p)
            .concat(&Word(vec![c]))
            .concat(&word_to(q).inverse())
            .normalize()
    };

    let mut b = Basis::default();
    for &p in &g.a_loops {
        b.b2.push(item_word(p, Letter::A, p));
    }
    for &p in &g.b_loops {
        b.b3.push(item_word(p, Letter::B, p));
    }
    for (i, &(p, q)) in g.b_edges.iter().enumerate() {
        if !edge_in_tree[i] {
            b.b13.push(item_word(p, Letter::B, q));
        }
    }
    for (i, &(p, q)) in g.a_pairs.iter().enumerate() {
        if !pair_in_tree[i] {
            let w1 = item_word(p, Letter::A, q);
            let w2 = item_word(q, Letter::A, p);
            b.b12.push(match w1.cmp_shortlex(&w2) {
                std::cmp::Ordering::Greater => w2,
                _ => w1,
            });
        }
    }
    let by_shortlex = |x: &Word, y: &Word| x.cmp_shortlex(y);
    b.b2.sort_by(by_shortlex);
    b.b3.sort_by(by_shortlex);
    b.b12.sort_by(by_shortlex);
    b.b13.sort_by(by_shortlex);
    b
}

/// Whether a proper cyclically reduced graph with combinatorial type `t`
/// exists: the incidence identities `n = 2*k2 + l2 = 2*k3 + l3 + 3*m` must
/// hold on at least one vertex, and `m - l2 - l3` must be even and at least
/// -2.
pub fn is_realizable(t: &CombinatorialType) -> bool {
    if t.n == 0 || !t.identities_hold() {
        return false;
    }
    let excess = t.m as i64 - t.l2 as i64 - t.l3 as i64;
    excess >= -2 && excess % 2 == 0
}

/// Construct an unrooted proper cyclically reduced graph of type `t`, or
/// `None` when `t` is not realizable.
///
/// The triangles and isolated `b`-edges are laid out in a row and chained
/// with `a`-pairs; each `b`-loop hangs off a free `a`-slot through its own
/// pair, `a`-loops fill further free slots, and the remaining slots (an even
/// number, possibly joining the two ends of the row) are matched up
/// pairwise.
pub fn realize_type(t: &CombinatorialType) -> Option<StallingsGraph> {
    if !is_realizable(t) {
        return None;
    }
    let mut a_loops = Vec::new();
    let mut a_pairs = Vec::new();
    let mut b_loops = Vec::new();
    let mut b_edges = Vec::new();
    let mut b_triangles = Vec::new();
    let mut next = 0usize;
    let fresh = |k: usize, next: &mut usize| -> Vec<usize> {
        let vs: Vec<usize> = (*next..*next + k).collect();
        *next += k;
        vs
    };

    // Free a-slots left open by the row of triangles and edges.
    let mut free: Vec<usize> = Vec::new();
    let units = t.m + t.k3;
    if units == 0 {
        // Only b-loops: either the one-vertex graph with both loops, or two
        // b-loop vertices joined by an a-pair.
        if t.l3 == 1 {
            let v = fresh(1, &mut next)[0];
            b_loops.push(v);
            a_loops.push(v);
        } else {
            debug_assert_eq!((t.l3, t.k2), (2, 1));
            let vs = fresh(2, &mut next);
            b_loops.extend([vs[0], vs[1]]);
            a_pairs.push((vs[0], vs[1]));
        }
        return Some(StallingsGraph::new(
            t.n,
            None,
            a_loops,
            a_pairs,
            b_loops,
            b_edges,
            b_triangles,
        ));
    }

    // The row: triangles first, then isolated edges; `tail` is the previous
    // unit's outgoing slot awaiting the link to the next unit.
    let mut tail: Option<usize> = None;
    for i in 0..units {
        let (slot_in, slot_out) = if i < t.m {
            let vs = fresh(3, &mut next);
            b_triangles.push([vs[0], vs[1], vs[2]]);
            free.push(vs[2]);
            (vs[0], vs[1])
        } else {
            let vs = fresh(2, &mut next);
            b_edges.push((vs[0], vs[1]));
            (vs[0], vs[1])
        };
        match tail {
            Some(prev_out) => a_pairs.push((prev_out, slot_in)),
            None => free.push(slot_in),
        }
        tail = Some(slot_out);
    }
    free.push(tail.unwrap());

    // b-loops attach through a-pairs; a-loops sit directly on free slots.
    for _ in 0..t.l3 {
        let v = fresh(1, &mut next)[0];
        b_loops.push(v);
        a_pairs.push((free.pop().unwrap(), v));
    }
    for _ in 0..t.l2 {
        a_loops.push(free.pop().unwrap());
    }
    debug_assert_eq!(free.len() % 2, 0);
    while let (Some(x), Some(y)) = (free.pop(), free.pop()) {
        a_pairs.push((x, y));
    }

    debug_assert_eq!(next, t.n);
    let g = StallingsGraph::new(t.n, None, a_loops, a_pairs, b_loops, b_edges, b_triangles);
    debug_assert!(g.is_valid(ValidationMode::Proper));
    Some(g)
}

/// All realizable combinatorial types with `n` vertices.
pub fn realizable_types(n: usize) -> Vec<CombinatorialType> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for k2 in 0..=n / 2 {
        let l2 = n - 2 * k2;
        for k3 in 0..=n / 2 {
            for m in 0..=(n - 2 * k3) / 3 {
                let l3 = n - 2 * k3 - 3 * m;
                let t = CombinatorialType {
                    n,
                    k2,
                    k3,
                    l2,
                    l3,
                    m,
                };
                if is_realizable(&t) {
                    out.push(t);
                }
            }
        }
    }
    out
}
