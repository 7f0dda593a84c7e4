//! Stallings graphs for finitely generated subgroups of the modular group.
//!
//! A subgroup graph is a finite connected graph with a distinguished root
//! whose edges carry the labels `a` and `b`.  `a`-edges come in mutually
//! inverse pairs (or fixed points, drawn as `a`-loops), so the `a`-structure
//! is a partial involution; the `b`-structure is a partial injection whose
//! orbits are loops, single edges, or directed triangles.  A normalized word
//! is an element of the subgroup exactly when it can be read along a loop at
//! the root, where `a`-edges may be crossed in both directions, `b`-edges
//! forward for `b` and backward for `b^-1`.
//!
//! [`stallings_graph`] builds the graph of a subgroup from generators: it
//! assembles a bouquet of word loops ([`build_work_graph`]), folds it, and
//! then completes it ([`psl2_complete`]) by symmetrizing `a`-edges,
//! closing every `b`-edge into a triangle, folding again, and deleting the
//! auxiliary triangle vertices that carry no `a`-edge.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::words::{Letter, Word};

/// The combinatorial type of a graph: vertex count and the sizes of the six
/// kinds of edge orbits.
///
/// In a graph where every vertex carries an `a`-item and a `b`-item the
/// counts satisfy `n = 2*k2 + l2 = 2*k3 + l3 + 3*m`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct CombinatorialType {
    /// Number of vertices.
    pub n: usize,
    /// Isolated `a`-edges (mutually inverse pairs between distinct vertices).
    pub k2: usize,
    /// Isolated `b`-edges.
    pub k3: usize,
    /// `a`-loops.
    pub l2: usize,
    /// `b`-loops.
    pub l3: usize,
    /// `b`-triangles.
    pub m: usize,
}

impl CombinatorialType {
    /// Whether the two incidence identities hold.
    pub fn identities_hold(&self) -> bool {
        self.n == 2 * self.k2 + self.l2 && self.n == 2 * self.k3 + self.l3 + 3 * self.m
    }
}

impl fmt::Display for CombinatorialType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{},{},{})",
            self.n, self.k2, self.k3, self.l2, self.l3, self.m
        )
    }
}

/// Per-vertex navigation maps of a [`StallingsGraph`].
#[derive(Clone, Debug)]
pub struct Navigation {
    /// `a`-neighbor (the vertex itself for an `a`-loop).
    pub a: Vec<Option<usize>>,
    /// Successor along a `b`-edge.
    pub b_next: Vec<Option<usize>>,
    /// Predecessor along a `b`-edge.
    pub b_prev: Vec<Option<usize>>,
}

/// Which set of structural requirements to validate.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ValidationMode {
    /// A subgroup graph: rooted, connected, folded, and every vertex except
    /// possibly the root carries both an `a`-item and a `b`-item.
    Rooted,
    /// A conjugacy-class representative: either a single vertex, or every
    /// vertex carries both kinds of items. The root is ignored.
    CyclicallyReduced,
    /// Every vertex (including a single one) carries both kinds of items.
    Proper,
}

/// One violated property, with the offending vertices.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    /// The graph has no vertices.
    Empty,
    /// References to vertices `>= n` (in items or the root).
    IndexOutOfRange { vertices: Vec<usize> },
    /// Vertices that appear in more than one `a`-item.
    OverlappingAItems { vertices: Vec<usize> },
    /// Vertices that appear in more than one `b`-item.
    OverlappingBItems { vertices: Vec<usize> },
    /// Pairs, edges, or triangles with repeated endpoints.
    DegenerateItems { vertices: Vec<usize> },
    /// Mode requires a root but the graph has none.
    MissingRoot,
    /// Vertices not reachable from the root (or from vertex 0 if unrooted).
    Disconnected { vertices: Vec<usize> },
    /// Vertices that must carry an `a`-item but do not.
    MissingAItem { vertices: Vec<usize> },
    /// Vertices that must carry a `b`-item but do not.
    MissingBItem { vertices: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no vertices"),
            Violation::IndexOutOfRange { vertices } => {
                write!(f, "vertex references out of range: {vertices:?}")
            }
            Violation::OverlappingAItems { vertices } => {
                write!(f, "vertices in more than one a-item: {vertices:?}")
            }
            Violation::OverlappingBItems { vertices } => {
                write!(f, "vertices in more than one b-item: {vertices:?}")
            }
            Violation::DegenerateItems { vertices } => {
                write!(f, "items with repeated endpoints at: {vertices:?}")
            }
            Violation::MissingRoot => write!(f, "graph is not rooted"),
            Violation::Disconnected { vertices } => {
                write!(f, "vertices unreachable from the root: {vertices:?}")
            }
            Violation::MissingAItem { vertices } => {
                write!(f, "vertices without an a-item: {vertices:?}")
            }
            Violation::MissingBItem { vertices } => {
                write!(f, "vertices without a b-item: {vertices:?}")
            }
        }
    }
}

/// A folded, completed subgroup graph in normalized presentation.
///
/// Vertices are `0..n`. Items are kept sorted; `a`-pairs as `(min, max)`,
/// triangles in cycle order `u -> v -> w -> u` rotated so that the smallest
/// vertex comes first.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct StallingsGraph {
    pub n: usize,
    pub root: Option<usize>,
    pub a_loops: Vec<usize>,
    pub a_pairs: Vec<(usize, usize)>,
    pub b_loops: Vec<usize>,
    pub b_edges: Vec<(usize, usize)>,
    pub b_triangles: Vec<[usize; 3]>,
}

#[derive(Serialize, Deserialize)]
struct AJson {
    loops: Vec<usize>,
    pairs: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
struct BJson {
    loops: Vec<usize>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    root: Option<usize>,
    a: AJson,
    b: BJson,
}

impl StallingsGraph {
    /// Build a graph from raw item lists, normalizing their presentation.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        root: Option<usize>,
        a_loops: Vec<usize>,
        a_pairs: Vec<(usize, usize)>,
        b_loops: Vec<usize>,
        b_edges: Vec<(usize, usize)>,
        b_triangles: Vec<[usize; 3]>,
    ) -> StallingsGraph {
        let mut g = StallingsGraph {
            n,
            root,
            a_loops,
            a_pairs,
            b_loops,
            b_edges,
            b_triangles,
        };
        g.normalize_presentation();
        g
    }

    /// The one-vertex graph of the trivial subgroup.
    pub fn trivial() -> StallingsGraph {
        StallingsGraph::new(1, Some(0), vec![], vec![], vec![], vec![], vec![])
    }

    fn normalize_presentation(&mut self) {
        self.a_loops.sort_unstable();
        for p in self.a_pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        self.a_pairs.sort_unstable();
        self.b_loops.sort_unstable();
        self.b_edges.sort_unstable();
        for t in self.b_triangles.iter_mut() {
            *t = rotate_min_first(*t);
        }
        self.b_triangles.sort_unstable();
    }

    /// Navigation maps. Panics on malformed graphs (overlapping items or
    /// out-of-range indices); run [`StallingsGraph::validate`] first on
    /// untrusted input.
    pub fn navigation(&self) -> Navigation {
        let mut a = vec![None; self.n];
        let mut b_next = vec![None; self.n];
        let mut b_prev = vec![None; self.n];
        let set = |slot: &mut Option<usize>, v: usize| {
            assert!(slot.is_none(), "overlapping items in graph");
            *slot = Some(v);
        };
        for &v in &self.a_loops {
            set(&mut a[v], v);
        }
        for &(p, q) in &self.a_pairs {
            set(&mut a[p], q);
            set(&mut a[q], p);
        }
        for &v in &self.b_loops {
            set(&mut b_next[v], v);
            set(&mut b_prev[v], v);
        }
        for &(p, q) in &self.b_edges {
            set(&mut b_next[p], q);
            set(&mut b_prev[q], p);
        }
        for &[u, v, w] in &self.b_triangles {
            set(&mut b_next[u], v);
            set(&mut b_next[v], w);
            set(&mut b_next[w], u);
            set(&mut b_prev[v], u);
            set(&mut b_prev[w], v);
            set(&mut b_prev[u], w);
        }
        Navigation { a, b_next, b_prev }
    }

    /// The combinatorial type `(n, k2, k3, l2, l3, m)`.
    pub fn combinatorial_type(&self) -> CombinatorialType {
        CombinatorialType {
            n: self.n,
            k2: self.a_pairs.len(),
            k3: self.b_edges.len(),
            l2: self.a_loops.len(),
            l3: self.b_loops.len(),
            m: self.b_triangles.len(),
        }
    }

    /// Whether the normalized form of `w` labels a loop at the root, i.e.
    /// whether the word belongs to the subgroup this graph represents.
    ///
    /// Panics if the graph is unrooted.
    pub fn contains(&self, w: &Word) -> bool {
        let root = self.root.expect("membership requires a rooted graph");
        let nav = self.navigation();
        let mut at = root;
        for &l in &w.normalize().0 {
            let step = match l {
                Letter::A => nav.a[at],
                Letter::B => nav.b_next[at],
                Letter::BInv => nav.b_prev[at],
                Letter::AInv => unreachable!("normalized words have no a-inverse"),
            };
            match step {
                Some(next) => at = next,
                None => return false,
            }
        }
        at == root
    }

    /// Check the structural requirements of `mode` and report every violated
    /// property together with the offending vertices.
    pub fn validate(&self, mode: ValidationMode) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n == 0 {
            out.push(Violation::Empty);
            return out;
        }
        let mut bad_idx: Vec<usize> = Vec::new();
        let check = |v: usize, bad: &mut Vec<usize>| {
            if v >= self.n {
                bad.push(v);
            }
        };
        for &v in self.a_loops.iter().chain(&self.b_loops) {
            check(v, &mut bad_idx);
        }
        for &(p, q) in self.a_pairs.iter().chain(&self.b_edges) {
            check(p, &mut bad_idx);
            check(q, &mut bad_idx);
        }
        for &[u, v, w] in &self.b_triangles {
            check(u, &mut bad_idx);
            check(v, &mut bad_idx);
            check(w, &mut bad_idx);
        }
        if let Some(r) = self.root {
            check(r, &mut bad_idx);
        }
        if !bad_idx.is_empty() {
            bad_idx.sort_unstable();
            bad_idx.dedup();
            out.push(Violation::IndexOutOfRange { vertices: bad_idx });
            return out;
        }

        let mut degenerate: Vec<usize> = Vec::new();
        for &(p, q) in self.a_pairs.iter().chain(&self.b_edges) {
            if p == q {
                degenerate.push(p);
            }
        }
        for &[u, v, w] in &self.b_triangles {
            if u == v || v == w || u == w {
                degenerate.push(u);
            }
        }
        if !degenerate.is_empty() {
            degenerate.sort_unstable();
            degenerate.dedup();
            out.push(Violation::DegenerateItems {
                vertices: degenerate,
            });
        }

        let mut a_count = vec![0usize; self.n];
        let mut b_count = vec![0usize; self.n];
        for &v in &self.a_loops {
            a_count[v] += 1;
        }
        for &(p, q) in &self.a_pairs {
            a_count[p] += 1;
            if q != p {
                a_count[q] += 1;
            }
        }
        for &v in &self.b_loops {
            b_count[v] += 1;
        }
        for &(p, q) in &self.b_edges {
            b_count[p] += 1;
            if q != p {
                b_count[q] += 1;
            }
        }
        for t in &self.b_triangles {
            let mut seen = *t;
            seen.sort_unstable();
            for (i, &v) in seen.iter().enumerate() {
                if i == 0 || seen[i - 1] != v {
                    b_count[v] += 1;
                }
            }
        }
        let overlap_a: Vec<usize> = (0..self.n).filter(|&v| a_count[v] > 1).collect();
        let overlap_b: Vec<usize> = (0..self.n).filter(|&v| b_count[v] > 1).collect();
        if !overlap_a.is_empty() {
            out.push(Violation::OverlappingAItems {
                vertices: overlap_a,
            });
        }
        if !overlap_b.is_empty() {
            out.push(Violation::OverlappingBItems {
                vertices: overlap_b,
            });
        }
        if mode == ValidationMode::Rooted && self.root.is_none() {
            out.push(Violation::MissingRoot);
        }
        if !out.is_empty() {
            // Adjacency and connectivity are only meaningful on structurally
            // sound graphs.
            return out;
        }

        let start = match mode {
            ValidationMode::Rooted => self.root.unwrap(),
            _ => self.root.unwrap_or(0),
        };
        let nav = self.navigation();
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for next in [nav.a[v], nav.b_next[v], nav.b_prev[v]]
                .into_iter()
                .flatten()
            {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        let unreached: Vec<usize> = (0..self.n).filter(|&v| !seen[v]).collect();
        if !unreached.is_empty() {
            out.push(Violation::Disconnected {
                vertices: unreached,
            });
        }

        let adjacency_required: Box<dyn Fn(usize) -> bool> = match mode {
            ValidationMode::Rooted => {
                let root = self.root.unwrap();
                Box::new(move |v| v != root)
            }
            ValidationMode::CyclicallyReduced => {
                if self.n == 1 {
                    Box::new(|_| false)
                } else {
                    Box::new(|_| true)
                }
            }
            ValidationMode::Proper => Box::new(|_| true),
        };
        let missing_a: Vec<usize> = (0..self.n)
            .filter(|&v| adjacency_required(v) && a_count[v] == 0)
            .collect();
        let missing_b: Vec<usize> = (0..self.n)
            .filter(|&v| adjacency_required(v) && b_count[v] == 0)
            .collect();
        if !missing_a.is_empty() {
            out.push(Violation::MissingAItem {
                vertices: missing_a,
            });
        }
        if !missing_b.is_empty() {
            out.push(Violation::MissingBItem {
                vertices: missing_b,
            });
        }
        out
    }

    /// Convenience wrapper: true when [`StallingsGraph::validate`] reports
    /// nothing.
    pub fn is_valid(&self, mode: ValidationMode) -> bool {
        self.validate(mode).is_empty()
    }

    /// Breadth-first vertex order from `start`, exploring `a`-neighbor,
    /// `b`-successor, `b`-predecessor, in this order.  Returns `new_of_old`.
    /// Panics if the graph is not connected.
    fn bfs_numbering(&self, start: usize, nav: &Navigation) -> Vec<usize> {
        let mut new_of_old = vec![usize::MAX; self.n];
        let mut queue = VecDeque::from([start]);
        let mut next_id = 0;
        new_of_old[start] = 0;
        next_id += 1;
        while let Some(v) = queue.pop_front() {
            for next in [nav.a[v], nav.b_next[v], nav.b_prev[v]]
                .into_iter()
                .flatten()
            {
                if new_of_old[next] == usize::MAX {
                    new_of_old[next] = next_id;
                    next_id += 1;
                    queue.push_back(next);
                }
            }
        }
        assert_eq!(next_id, self.n, "graph is not connected");
        new_of_old
    }

    /// The graph with vertices renamed by `new_of_old` (a permutation of
    /// `0..n`).
    pub fn relabeled(&self, new_of_old: &[usize]) -> StallingsGraph {
        StallingsGraph::new(
            self.n,
            self.root.map(|r| new_of_old[r]),
            self.a_loops.iter().map(|&v| new_of_old[v]).collect(),
            self.a_pairs
                .iter()
                .map(|&(p, q)| (new_of_old[p], new_of_old[q]))
                .collect(),
            self.b_loops.iter().map(|&v| new_of_old[v]).collect(),
            self.b_edges
                .iter()
                .map(|&(p, q)| (new_of_old[p], new_of_old[q]))
                .collect(),
            self.b_triangles
                .iter()
                .map(|&[u, v, w]| [new_of_old[u], new_of_old[v], new_of_old[w]])
                .collect(),
        )
    }

    /// Rooted graphs only: the same graph relabeled into canonical order
    /// (breadth-first from the root, which becomes vertex 0).
    pub fn canonical_relabel(&self) -> StallingsGraph {
        let root = self.root.expect("canonical relabeling requires a root");
        let nav = self.navigation();
        self.relabeled(&self.bfs_numbering(root, &nav))
    }

    fn serialize_from(&self, start: usize, rooted: bool, nav: &Navigation) -> Vec<u8> {
        let new_of_old = self.bfs_numbering(start, nav);
        let mut old_of_new = vec![0usize; self.n];
        for (old, &new) in new_of_old.iter().enumerate() {
            old_of_new[new] = old;
        }
        let mut bytes = Vec::with_capacity(9 + 8 * self.n);
        bytes.extend_from_slice(&(self.n as u32).to_le_bytes());
        bytes.push(u8::from(rooted));
        let code = |slot: Option<usize>| -> u32 {
            match slot {
                Some(old) => new_of_old[old] as u32 + 1,
                None => 0,
            }
        };
        for &old in old_of_new.iter().take(self.n) {
            bytes.extend_from_slice(&code(nav.a[old]).to_le_bytes());
            bytes.extend_from_slice(&code(nav.b_next[old]).to_le_bytes());
        }
        bytes
    }

    /// A byte string that is equal for two graphs exactly when they are
    /// isomorphic (as rooted graphs when rooted, up to any relabeling when
    /// unrooted).
    pub fn canonical_form(&self) -> Vec<u8> {
        let nav = self.navigation();
        match self.root {
            Some(r) => self.serialize_from(r, true, &nav),
            None => (0..self.n)
                .map(|s| self.serialize_from(s, false, &nav))
                .min()
                .expect("canonical form of an empty graph"),
        }
    }

    /// The cyclically reduced core: forget the root and repeatedly delete
    /// vertices that lack an `a`-item or a `b`-item, stopping at one vertex.
    /// The result represents the conjugacy class of the subgroup.
    pub fn cyclically_reduced_core(&self) -> StallingsGraph {
        let mut alive = vec![true; self.n];
        let mut alive_count = self.n;
        let mut a_loops = self.a_loops.clone();
        let mut a_pairs = self.a_pairs.clone();
        let mut b_loops = self.b_loops.clone();
        let mut b_edges = self.b_edges.clone();
        let mut b_triangles = self.b_triangles.clone();
        loop {
            if alive_count <= 1 {
                break;
            }
            let mut a_deg = vec![0usize; self.n];
            let mut b_deg = vec![0usize; self.n];
            for &v in &a_loops {
                a_deg[v] += 1;
            }
            for &(p, q) in &a_pairs {
                a_deg[p] += 1;
                a_deg[q] += 1;
            }
            for &v in &b_loops {
                b_deg[v] += 1;
            }
            for &(p, q) in &b_edges {
                b_deg[p] += 1;
                b_deg[q] += 1;
            }
            for &[u, v, w] in &b_triangles {
                b_deg[u] += 1;
                b_deg[v] += 1;
                b_deg[w] += 1;
            }
            let victim = (0..self.n).find(|&v| alive[v] && (a_deg[v] == 0 || b_deg[v] == 0));
            let Some(v) = victim else { break };
            alive[v] = false;
            alive_count -= 1;
            a_loops.retain(|&x| x != v);
            a_pairs.retain(|&(p, q)| p != v && q != v);
            b_loops.retain(|&x| x != v);
            b_edges.retain(|&(p, q)| p != v && q != v);
            // A triangle losing a vertex degrades to a single b-edge.
            let mut kept = Vec::with_capacity(b_triangles.len());
            for &[u, x, w] in &b_triangles {
                if u == v {
                    b_edges.push((x, w));
                } else if x == v {
                    b_edges.push((w, u));
                } else if w == v {
                    b_edges.push((u, x));
                } else {
                    kept.push([u, x, w]);
                }
            }
            b_triangles = kept;
        }
        let mut new_of_old = vec![usize::MAX; self.n];
        let mut next = 0;
        for v in 0..self.n {
            if alive[v] {
                new_of_old[v] = next;
                next += 1;
            }
        }
        let remap = |v: usize| new_of_old[v];
        let core = StallingsGraph::new(
            alive_count,
            None,
            a_loops.iter().map(|&v| remap(v)).collect(),
            a_pairs.iter().map(|&(p, q)| (remap(p), remap(q))).collect(),
            b_loops.iter().map(|&v| remap(v)).collect(),
            b_edges.iter().map(|&(p, q)| (remap(p), remap(q))).collect(),
            b_triangles
                .iter()
                .map(|&[u, v, w]| [remap(u), remap(v), remap(w)])
                .collect(),
        );
        debug_assert!(
            core.is_valid(ValidationMode::CyclicallyReduced),
            "core extraction produced an invalid graph"
        );
        core
    }

    /// The graph of the conjugate subgroup `w^-1 H w`.
    ///
    /// Appends a path labeled by the normal form of `w` to the root, moves
    /// the root to the end of the path, and re-runs completion.
    pub fn conjugate(&self, w: &Word) -> StallingsGraph {
        let root = self.root.expect("conjugation requires a rooted graph");
        let u = w.normalize();
        let mut work = WorkGraph::from_stallings(self);
        let mut cur = root;
        for &l in &u.0 {
            let next = work.add_vertex();
            match l {
                Letter::A => work.add_a_edge(cur, next),
                Letter::B => work.add_b_edge(cur, next),
                Letter::BInv => work.add_b_edge(next, cur),
                Letter::AInv => unreachable!("normalized words have no a-inverse"),
            }
            cur = next;
        }
        work.root = cur;
        psl2_complete(work)
    }

    /// Serialize to the JSON graph schema.
    pub fn to_json_value(&self) -> serde_json::Value {
        let json = GraphJson {
            n: self.n,
            root: self.root,
            a: AJson {
                loops: self.a_loops.clone(),
                pairs: self.a_pairs.iter().map(|&(p, q)| [p, q]).collect(),
            },
            b: BJson {
                loops: self.b_loops.clone(),
                edges: self.b_edges.iter().map(|&(p, q)| [p, q]).collect(),
                triangles: self.b_triangles.clone(),
            },
        };
        serde_json::to_value(json).expect("graph serialization cannot fail")
    }

    pub fn to_json_string(&self) -> String {
        self.to_json_value().to_string()
    }

    /// Parse a graph from the JSON schema. The result is not semantically
    /// validated; run [`StallingsGraph::validate`] on untrusted input.
    pub fn from_json_str(s: &str) -> Result<StallingsGraph, serde_json::Error> {
        let json: GraphJson = serde_json::from_str(s)?;
        Ok(StallingsGraph::new(
            json.n,
            json.root,
            json.a.loops,
            json.a.pairs.iter().map(|&[p, q]| (p, q)).collect(),
            json.b.loops,
            json.b.edges.iter().map(|&[p, q]| (p, q)).collect(),
            json.b.triangles,
        ))
    }

    /// GraphViz rendering: `a`-items as undirected edges, `b`-items as
    /// directed edges, the root drawn with a double circle.
    pub fn to_dot(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("digraph stallings {\n");
        for v in 0..self.n {
            let shape = if self.root == Some(v) {
                "doublecircle"
            } else {
                "circle"
            };
            writeln!(s, "  {v} [shape={shape}];").unwrap();
        }
        for &v in &self.a_loops {
            writeln!(s, "  {v} -> {v} [label=\"a\", dir=none];").unwrap();
        }
        for &(p, q) in &self.a_pairs {
            writeln!(s, "  {p} -> {q} [label=\"a\", dir=none];").unwrap();
        }
        for &v in &self.b_loops {
            writeln!(s, "  {v} -> {v} [label=\"b\"];").unwrap();
        }
        for &(p, q) in &self.b_edges {
            writeln!(s, "  {p} -> {q} [label=\"b\"];").unwrap();
        }
        for &[u, v, w] in &self.b_triangles {
            writeln!(s, "  {u} -> {v} [label=\"b\"];").unwrap();
            writeln!(s, "  {v} -> {w} [label=\"b\"];").unwrap();
            writeln!(s, "  {w} -> {u} [label=\"b\"];").unwrap();
        }
        s.push_str("}\n");
        s
    }
}

fn rotate_min_first(t: [usize; 3]) -> [usize; 3] {
    let min_pos = (0..3).min_by_key(|&i| t[i]).unwrap();
    [t[min_pos], t[(min_pos + 1) % 3], t[(min_pos + 2) % 3]]
}

/// A mutable multigraph under construction, with union-find vertex merging.
///
/// Labels are `a` and `b`; adjacency lists may temporarily hold parallel or
/// stale edges, which [`WorkGraph::fold`] resolves.
#[derive(Clone, Debug)]
pub struct WorkGraph {
    parent: Vec<usize>,
    dead: Vec<bool>,
    out_a: Vec<Vec<usize>>,
    in_a: Vec<Vec<usize>>,
    out_b: Vec<Vec<usize>>,
    in_b: Vec<Vec<usize>>,
    pub root: usize,
}

/// A plain description of a [`WorkGraph`], with vertices renumbered
/// consecutively in order of first appearance.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WorkSnapshot {
    pub n: usize,
    pub root: usize,
    pub a_edges: Vec<(usize, usize)>,
    pub b_edges: Vec<(usize, usize)>,
}

#[derive(Clone, Copy)]
enum Slot {
    OutA,
    InA,
    OutB,
    InB,
}

const SLOTS: [Slot; 4] = [Slot::OutA, Slot::InA, Slot::OutB, Slot::InB];

impl WorkGraph {
    /// A graph with a single root vertex and no edges.
    pub fn new() -> WorkGraph {
        WorkGraph {
            parent: vec![0],
            dead: vec![false],
            out_a: vec![Vec::new()],
            in_a: vec![Vec::new()],
            out_b: vec![Vec::new()],
            in_b: vec![Vec::new()],
            root: 0,
        }
    }

    pub fn from_stallings(g: &StallingsGraph) -> WorkGraph {
        let mut work = WorkGraph::new();
        for _ in 1..g.n {
            work.add_vertex();
        }
        for &v in &g.a_loops {
            work.add_a_edge(v, v);
        }
        for &(p, q) in &g.a_pairs {
            work.add_a_edge(p, q);
            work.add_a_edge(q, p);
        }
        for &v in &g.b_loops {
            work.add_b_edge(v, v);
        }
        for &(p, q) in &g.b_edges {
            work.add_b_edge(p, q);
        }
        for &[u, v, w] in &g.b_triangles {
            work.add_b_edge(u, v);
            work.add_b_edge(v, w);
            work.add_b_edge(w, u);
        }
        work.root = g.root.unwrap_or(0);
        work
    }

    pub fn add_vertex(&mut self) -> usize {
        let v = self.parent.len();
        self.parent.push(v);
        self.dead.push(false);
        self.out_a.push(Vec::new());
        self.in_a.push(Vec::new());
        self.out_b.push(Vec::new());
        self.in_b.push(Vec::new());
        v
    }

    pub fn add_a_edge(&mut self, from: usize, to: usize) {
        self.out_a[from].push(to);
        self.in_a[to].push(from);
    }

    pub fn add_b_edge(&mut self, from: usize, to: usize) {
        self.out_b[from].push(to);
        self.in_b[to].push(from);
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn find_ref(&self, mut v: usize) -> usize {
        while self.parent[v] != v {
            v = self.parent[v];
        }
        v
    }

    fn slot(&self, v: usize, slot: Slot) -> &Vec<usize> {
        match slot {
            Slot::OutA => &self.out_a[v],
            Slot::InA => &self.in_a[v],
            Slot::OutB => &self.out_b[v],
            Slot::InB => &self.in_b[v],
        }
    }

    fn slot_mut(&mut self, v: usize, slot: Slot) -> &mut Vec<usize> {
        match slot {
            Slot::OutA => &mut self.out_a[v],
            Slot::InA => &mut self.in_a[v],
            Slot::OutB => &mut self.out_b[v],
            Slot::InB => &mut self.in_b[v],
        }
    }

    /// Canonicalized adjacency of the class of `v`: classes only, duplicates
    /// and dead entries removed.
    fn canon_list(&mut self, v: usize, slot: Slot) -> Vec<usize> {
        let raw = self.slot(v, slot).clone();
        let mut list: Vec<usize> = raw.into_iter().map(|t| self.find(t)).collect();
        list.retain(|&t| !self.dead[t]);
        list.sort_unstable();
        list.dedup();
        list
    }

    /// Merge `x` and `y` into one class; adjacency lists are concatenated.
    fn union(&mut self, x: usize, y: usize, queue: &mut VecDeque<usize>) -> usize {
        let x = self.find(x);
        let y = self.find(y);
        if x == y {
            return x;
        }
        let deg = |g: &WorkGraph, v: usize| {
            g.out_a[v].len() + g.in_a[v].len() + g.out_b[v].len() + g.in_b[v].len()
        };
        let (winner, loser) = if deg(self, x) >= deg(self, y) {
            (x, y)
        } else {
            (y, x)
        };
        self.parent[loser] = winner;
        for slot in SLOTS {
            let moved = std::mem::take(self.slot_mut(loser, slot));
            self.slot_mut(winner, slot).extend(moved);
        }
        queue.push_back(winner);
        winner
    }

    /// Fold to a fixpoint: whenever two edges with the same label share their
    /// source (or their target), identify the two other endpoints; parallel
    /// duplicate edges collapse to one.
    pub fn fold(&mut self) {
        let mut queue: VecDeque<usize> = (0..self.parent.len()).collect();
        while let Some(raw) = queue.pop_front() {
            let mut v = self.find(raw);
            loop {
                let mut changed = false;
                for slot in SLOTS {
                    let list = self.canon_list(v, slot);
                    if list.len() > 1 {
                        let mut acc = list[0];
                        for &t in &list[1..] {
                            acc = self.union(acc, t, &mut queue);
                        }
                        v = self.find(v);
                        let target = self.find(acc);
                        *self.slot_mut(v, slot) = vec![target];
                        changed = true;
                    } else {
                        *self.slot_mut(v, slot) = list;
                    }
                }
                if !changed {
                    break;
                }
            }
        }
    }

    fn live_classes(&mut self) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&v| self.parent[v] == v && !self.dead[v])
            .collect()
    }

    /// Add the reverse of every `a`-edge and close every `b`-edge into a
    /// triangle through a fresh vertex.  Run on a folded graph; the result
    /// needs folding again.
    fn complete_in_place(&mut self) {
        let classes = self.live_classes();
        let mut a_edges: HashSet<(usize, usize)> = HashSet::new();
        let mut b_edges: Vec<(usize, usize)> = Vec::new();
        for &v in &classes {
            for t in self.canon_list(v, Slot::OutA) {
                a_edges.insert((v, t));
            }
            for t in self.canon_list(v, Slot::OutB) {
                b_edges.push((v, t));
            }
        }
        let missing: Vec<(usize, usize)> = a_edges
            .iter()
            .filter(|&&(p, q)| !a_edges.contains(&(q, p)))
            .map(|&(p, q)| (q, p))
            .collect();
        for (p, q) in missing {
            self.add_a_edge(p, q);
        }
        for (p, q) in b_edges {
            let r = self.add_vertex();
            self.add_b_edge(q, r);
            self.add_b_edge(r, p);
        }
    }

    /// Delete every non-root vertex that lacks an `a`-edge or lacks a
    /// `b`-edge, repeating until stable.
    ///
    /// Such vertices cannot lie on any loop spelling a normal form: normal
    /// forms alternate `a` with a `b`-letter, so a loop entering a vertex
    /// needs an edge of the other label to leave through, and leaving back
    /// over the entering item would spell a forbidden factor.  Folding a
    /// generator bouquet only ever produces the triangle-completion vertices
    /// (`b`-edges in and out, no `a`) as victims, but conjugation can also
    /// strand parts of the old root path as hanging limbs, which this
    /// removes.
    fn prune_in_place(&mut self) {
        loop {
            let root = self.find(self.root);
            let classes = self.live_classes();
            let mut victims = Vec::new();
            for &v in &classes {
                if v == root {
                    continue;
                }
                let has_a = !self.canon_list(v, Slot::OutA).is_empty()
                    || !self.canon_list(v, Slot::InA).is_empty();
                let has_b = !self.canon_list(v, Slot::OutB).is_empty()
                    || !self.canon_list(v, Slot::InB).is_empty();
                if !has_a || !has_b {
                    victims.push(v);
                }
            }
            if victims.is_empty() {
                break;
            }
            for v in victims {
                self.dead[v] = true;
            }
        }
    }

    /// Unique neighbor along a slot, for folded graphs.
    fn unique_neighbor(&mut self, v: usize, slot: Slot) -> Option<usize> {
        let list = self.canon_list(v, slot);
        assert!(list.len() <= 1, "graph is not folded");
        list.first().copied()
    }

    /// Extract the folded, completed, pruned graph as a [`StallingsGraph`],
    /// relabeled in breadth-first order from the root.
    fn compact(&mut self) -> StallingsGraph {
        let root = self.find(self.root);
        assert!(!self.dead[root], "root was pruned");
        let mut new_of_old: Vec<Option<usize>> = vec![None; self.parent.len()];
        let mut order: Vec<usize> = Vec::new();
        new_of_old[root] = Some(0);
        order.push(root);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for slot in [Slot::OutA, Slot::OutB, Slot::InB] {
                if let Some(t) = self.unique_neighbor(v, slot) {
                    if new_of_old[t].is_none() {
                        new_of_old[t] = Some(order.len());
                        order.push(t);
                        queue.push_back(t);
                    }
                }
            }
        }
        let live = self.live_classes();
        assert_eq!(order.len(), live.len(), "completed graph is disconnected");
        let n = order.len();
        let mut a_map: Vec<Option<usize>> = vec![None; n];
        let mut b_next: Vec<Option<usize>> = vec![None; n];
        for (new_v, &old_v) in order.iter().enumerate() {
            if let Some(t) = self.unique_neighbor(old_v, Slot::OutA) {
                a_map[new_v] = Some(new_of_old[t].unwrap());
            }
            if let Some(t) = self.unique_neighbor(old_v, Slot::OutB) {
                b_next[new_v] = Some(new_of_old[t].unwrap());
            }
        }
        let mut a_loops = Vec::new();
        let mut a_pairs = Vec::new();
        for v in 0..n {
            match a_map[v] {
                Some(w) if w == v => a_loops.push(v),
                Some(w) if v < w => {
                    assert_eq!(a_map[w], Some(v), "a-structure is not symmetric");
                    a_pairs.push((v, w));
                }
                _ => {}
            }
        }
        let mut b_loops = Vec::new();
        let mut b_edges = Vec::new();
        let mut b_triangles = Vec::new();
        let mut seen = vec![false; n];
        let has_in = {
            let mut f = vec![false; n];
            for &w in b_next.iter().flatten() {
                f[w] = true;
            }
            f
        };
        for v in 0..n {
            if seen[v] {
                continue;
            }
            let Some(w) = b_next[v] else { continue };
            if w == v {
                b_loops.push(v);
                seen[v] = true;
            } else if !has_in[v] {
                // chain start: must be a single isolated edge
                assert!(b_next[w].is_none(), "b-chain longer than one edge");
                b_edges.push((v, w));
                seen[v] = true;
                seen[w] = true;
            } else {
                // on a cycle: must be a triangle
                let x = b_next[w].expect("broken b-cycle");
                assert_ne!(x, v, "b-structure contains a 2-cycle");
                assert_eq!(b_next[x], Some(v), "b-cycle longer than three");
                b_triangles.push([v, w, x]);
                seen[v] = true;
                seen[w] = true;
                seen[x] = true;
            }
        }
        StallingsGraph::new(n, Some(0), a_loops, a_pairs, b_loops, b_edges, b_triangles)
    }

    /// Plain edge lists with compact vertex numbers, for inspection in tests.
    pub fn snapshot(&self) -> WorkSnapshot {
        let mut ids: Vec<Option<usize>> = vec![None; self.parent.len()];
        let mut next = 0usize;
        let mut id_of = |v: usize, ids: &mut Vec<Option<usize>>| -> usize {
            if ids[v].is_none() {
                ids[v] = Some(next);
                next += 1;
            }
            ids[v].unwrap()
        };
        let mut a_edges = Vec::new();
        let mut b_edges = Vec::new();
        let root_class = self.find_ref(self.root);
        let root = id_of(root_class, &mut ids);
        for v in 0..self.parent.len() {
            if self.parent[v] != v || self.dead[v] {
                continue;
            }
            let mut outs_a: Vec<usize> = self.out_a[v]
                .iter()
                .map(|&t| self.find_ref(t))
                .filter(|&t| !self.dead[t])
                .collect();
            outs_a.sort_unstable();
            outs_a.dedup();
            let mut outs_b: Vec<usize> = self.out_b[v]
                .iter()
                .map(|&t| self.find_ref(t))
                .filter(|&t| !self.dead[t])
                .collect();
            outs_b.sort_unstable();
            outs_b.dedup();
            let from = id_of(v, &mut ids);
            for t in outs_a {
                let to = id_of(t, &mut ids);
                a_edges.push((from, to));
            }
            for t in outs_b {
                let to = id_of(t, &mut ids);
                b_edges.push((from, to));
            }
        }
        a_edges.sort_unstable();
        b_edges.sort_unstable();
        WorkSnapshot {
            n: next,
            root,
            a_edges,
            b_edges,
        }
    }
}

impl Default for WorkGraph {
    fn default() -> Self {
        WorkGraph::new()
    }
}

/// The bouquet of generator loops: one loop at the root per generator, each
/// spelling the generator's normal form.  Generators that normalize to the
/// empty word are dropped.  The result is not yet folded.
pub fn build_work_graph(generators: &[Word]) -> WorkGraph {
    let mut work = WorkGraph::new();
    for g in generators {
        let u = g.normalize();
        if u.is_empty() {
            continue;
        }
        let mut cur = work.root;
        let last = u.len() - 1;
        for (i, &l) in u.0.iter().enumerate() {
            let next = if i == last {
                work.root
            } else {
                work.add_vertex()
            };
            match l {
                Letter::A => work.add_a_edge(cur, next),
                Letter::B => work.add_b_edge(cur, next),
                Letter::BInv => work.add_b_edge(next, cur),
                Letter::AInv => unreachable!("normalized words have no a-inverse"),
            }
            cur = next;
        }
    }
    work
}

/// Completion of a folded graph: symmetrize `a`-edges, close each `b`-edge
/// into a triangle through a fresh vertex, fold, and delete every non-root
/// vertex that cannot lie on a normal-form loop because it lacks an `a`- or
/// a `b`-edge.  Returns the compacted graph, relabeled breadth-first from
/// the root.
pub fn psl2_complete(mut work: WorkGraph) -> StallingsGraph {
    work.fold();
    work.complete_in_place();
    work.fold();
    work.prune_in_place();
    let g = work.compact();
    debug_assert!(
        g.is_valid(ValidationMode::Rooted),
        "pipeline produced an invalid graph"
    );
    g
}

/// The Stallings graph of the subgroup generated by `generators`.
pub fn stallings_graph(generators: &[Word]) -> StallingsGraph {
    psl2_complete(build_work_graph(generators))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn gens(list: &[&str]) -> Vec<Word> {
        list.iter().map(|s| w(s)).collect()
    }

    /// Γ(H₁) for H₁ = <abaB, babab>: two b-triangles joined by three a-pairs.
    fn example_graph_1() -> StallingsGraph {
        StallingsGraph::new(
            6,
            Some(0),
            vec![],
            vec![(0, 3), (1, 4), (2, 5)],
            vec![],
            vec![],
            vec![[0, 1, 2], [3, 4, 5]],
        )
    }

    /// Γ(H₂) for H₂ = <babaB, BabaBab>.
    fn example_graph_2() -> StallingsGraph {
        StallingsGraph::new(
            6,
            Some(0),
            vec![5],
            vec![(1, 3), (2, 4)],
            vec![3],
            vec![(4, 5)],
            vec![[0, 1, 2]],
        )
    }

    /// Brute-force isomorphism of work snapshots with matched roots.
    fn snapshots_isomorphic(x: &WorkSnapshot, y: &WorkSnapshot) -> bool {
        if x.n != y.n || x.a_edges.len() != y.a_edges.len() || x.b_edges.len() != y.b_edges.len() {
            return false;
        }
        let n = x.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let y_a: HashSet<(usize, usize)> = y.a_edges.iter().copied().collect();
        let y_b: HashSet<(usize, usize)> = y.b_edges.iter().copied().collect();
        fn permutations(
            perm: &mut Vec<usize>,
            k: usize,
            check: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            if k == perm.len() {
                return check(perm);
            }
            for i in k..perm.len() {
                perm.swap(k, i);
                if permutations(perm, k + 1, check) {
                    return true;
                }
                perm.swap(k, i);
            }
            false
        }
        permutations(&mut perm, 0, &mut |p: &[usize]| {
            if p[x.root] != y.root {
                return false;
            }
            x.a_edges.iter().all(|&(u, v)| y_a.contains(&(p[u], p[v])))
                && x.b_edges.iter().all(|&(u, v)| y_b.contains(&(p[u], p[v])))
        })
    }

    #[test]
    fn bouquet_folds_to_figure_graph() {
        // Γ_F for (abaB, babab): seven vertices and eight edges.
        let mut work = build_work_graph(&gens(&["abaB", "babab"]));
        work.fold();
        let got = work.snapshot();
        assert_eq!(got.n, 7);
        assert_eq!(got.a_edges.len() + got.b_edges.len(), 8);
        let expected = WorkSnapshot {
            n: 7,
            root: 0,
            a_edges: vec![(0, 1), (2, 3), (3, 4), (5, 6)],
            b_edges: vec![(0, 3), (1, 2), (4, 5), (6, 0)],
        };
        assert!(snapshots_isomorphic(&got, &expected));
    }

    #[test]
    fn pipeline_reproduces_first_example() {
        let g = stallings_graph(&gens(&["abaB", "babab"]));
        assert!(g.is_valid(ValidationMode::Rooted));
        assert_eq!(g.canonical_form(), example_graph_1().canonical_form());
        let t = g.combinatorial_type();
        assert_eq!((t.n, t.k2, t.k3, t.l2, t.l3, t.m), (6, 3, 0, 0, 0, 2));
    }

    #[test]
    fn pipeline_reproduces_second_example() {
        let g = stallings_graph(&gens(&["babaB", "BabaBab"]));
        assert!(g.is_valid(ValidationMode::Rooted));
        assert_eq!(g.canonical_form(), example_graph_2().canonical_form());
        let t = g.combinatorial_type();
        assert_eq!((t.n, t.k2, t.k3, t.l2, t.l3, t.m), (6, 2, 1, 1, 1, 1));
    }

    #[test]
    fn one_vertex_subgroups() {
        let trivial = stallings_graph(&[]);
        assert_eq!(trivial.n, 1);
        assert!(trivial.a_loops.is_empty() && trivial.b_loops.is_empty());

        let a = stallings_graph(&gens(&["a"]));
        assert_eq!((a.n, a.a_loops.len(), a.b_loops.len()), (1, 1, 0));

        let b = stallings_graph(&gens(&["b"]));
        assert_eq!((b.n, b.a_loops.len(), b.b_loops.len()), (1, 0, 1));
        let b2 = stallings_graph(&gens(&["B"]));
        assert_eq!(b.canonical_form(), b2.canonical_form());

        let whole = stallings_graph(&gens(&["a", "b"]));
        assert_eq!(
            (whole.n, whole.a_loops.len(), whole.b_loops.len()),
            (1, 1, 1)
        );

        let empty_gens = stallings_graph(&gens(&["aa", "bbb"]));
        assert_eq!(empty_gens.canonical_form(), trivial.canonical_form());
    }

    #[test]
    fn membership_on_first_example() {
        let g = stallings_graph(&gens(&["abaB", "babab"]));
        assert!(g.contains(&w("abaB")));
        assert!(g.contains(&w("babab")));
        assert!(g.contains(&Word::empty()));
        assert!(g.contains(&w("abaB").inverse()));
        assert!(g.contains(&w("abaB").concat(&w("babab"))));
        assert!(g.contains(&w("babab").concat(&w("abaB")).concat(&w("babab"))));
        assert!(!g.contains(&w("a")));
        assert!(!g.contains(&w("b")));
        assert!(!g.contains(&w("ab")));
        assert!(!g.contains(&w("abab")));
    }

    #[test]
    fn membership_uses_normal_forms() {
        let g = stallings_graph(&gens(&["abaB"]));
        // abaB = a b a b^-1 = a b a b b (b^-1 = b^2) = a^3 b a b^-1 (a = a^3)
        assert!(g.contains(&w("ababb")));
        assert!(g.contains(&w("aaabaB")));
        assert!(g.contains(&w("a^-1bab^-1")));
    }

    #[test]
    fn folding_is_order_independent() {
        let g1 = stallings_graph(&gens(&["abaB", "babab", "ab"]));
        let g2 = stallings_graph(&gens(&["ab", "babab", "abaB"]));
        assert_eq!(g1.canonical_form(), g2.canonical_form());
    }

    #[test]
    fn conjugation_matches_direct_construction() {
        // b^-1 <a> b  =  <b^-1 a b>
        let a = stallings_graph(&gens(&["a"]));
        let conj = a.conjugate(&w("b"));
        let direct = stallings_graph(&gens(&["Bab"]));
        assert_eq!(conj.canonical_form(), direct.canonical_form());
        assert_eq!(conj.n, 2);

        // a^-1 <b> a = <a b a> (a is an involution)
        let b = stallings_graph(&gens(&["b"]));
        let conj = b.conjugate(&w("a"));
        let direct = stallings_graph(&gens(&["aba"]));
        assert_eq!(conj.canonical_form(), direct.canonical_form());
    }

    #[test]
    fn conjugation_round_trip() {
        let g = stallings_graph(&gens(&["babaB", "BabaBab"]));
        for conjugator in ["b", "ab", "aB", "bab"] {
            let u = w(conjugator);
            let back = g.conjugate(&u).conjugate(&u.inverse());
            assert_eq!(
                back.canonical_form(),
                g.canonical_form(),
                "conjugator {conjugator}"
            );
        }
    }

    #[test]
    fn conjugation_can_shrink_the_graph() {
        // Conjugating H₂ by b removes the old root from its triangle.
        let g = stallings_graph(&gens(&["babaB", "BabaBab"]));
        let conj = g.conjugate(&w("b"));
        assert_eq!(conj.n, 5);
        let direct = stallings_graph(&gens(&["aba", "babaBaB"]));
        assert_eq!(conj.canonical_form(), direct.canonical_form());
        let t = conj.combinatorial_type();
        assert_eq!((t.n, t.k2, t.k3, t.l2, t.l3, t.m), (5, 2, 2, 1, 1, 0));
    }

    #[test]
    fn core_is_conjugation_invariant() {
        let g = stallings_graph(&gens(&["babaB", "BabaBab"]));
        let core = g.cyclically_reduced_core();
        assert!(core.is_valid(ValidationMode::CyclicallyReduced));
        for conjugator in ["b", "ab", "babab", "Ba"] {
            let conj_core = g.conjugate(&w(conjugator)).cyclically_reduced_core();
            assert_eq!(conj_core.canonical_form(), core.canonical_form());
        }
    }

    #[test]
    fn core_of_conjugated_cyclic_subgroups() {
        let core1 = stallings_graph(&gens(&["bab"])).cyclically_reduced_core();
        let core2 = stallings_graph(&gens(&["aB"])).cyclically_reduced_core();
        assert_eq!(core1.canonical_form(), core2.canonical_form());
        assert_eq!(core1.n, 2);

        let core_a = stallings_graph(&gens(&["a"])).cyclically_reduced_core();
        assert_eq!((core_a.n, core_a.a_loops.len()), (1, 1));
        let core_trivial = stallings_graph(&[]).cyclically_reduced_core();
        assert_eq!(core_trivial.n, 1);
    }

    #[test]
    fn canonical_form_ignores_labeling() {
        let g = example_graph_2();
        let perms: [[usize; 6]; 3] = [[5, 4, 3, 2, 1, 0], [2, 0, 1, 5, 3, 4], [0, 2, 1, 4, 3, 5]];
        for perm in perms {
            let h = g.relabeled(&perm);
            assert_eq!(h.canonical_form(), g.canonical_form());
        }
        // Rooted and unrooted forms differ.
        let mut unrooted = g.clone();
        unrooted.root = None;
        assert_ne!(unrooted.canonical_form(), g.canonical_form());
    }

    #[test]
    fn canonical_form_separates_roots() {
        // Rooting the same underlying graph at structurally different
        // vertices yields different subgroups.
        let g = example_graph_2();
        let mut at_loop_vertex = g.clone();
        at_loop_vertex.root = Some(5);
        assert_ne!(g.canonical_form(), at_loop_vertex.canonical_form());
    }

    #[test]
    fn validation_reports_problems() {
        let g = example_graph_1();
        assert!(g.is_valid(ValidationMode::Rooted));
        assert!(g.is_valid(ValidationMode::Proper));

        let mut unrooted = g.clone();
        unrooted.root = None;
        assert_eq!(
            unrooted.validate(ValidationMode::Rooted),
            vec![Violation::MissingRoot]
        );
        assert!(unrooted.is_valid(ValidationMode::CyclicallyReduced));

        // The second example's root has no a-item, so the graph is a valid
        // subgroup graph without being proper; conjugating by b deletes that
        // root and the result happens to be proper.
        let g2 = stallings_graph(&gens(&["babaB", "BabaBab"]));
        assert!(g2.is_valid(ValidationMode::Rooted));
        assert!(!g2.is_valid(ValidationMode::Proper));
        let conj = g2.conjugate(&w("b"));
        assert!(conj.is_valid(ValidationMode::Rooted));
        assert!(conj.is_valid(ValidationMode::Proper));

        let overlapping =
            StallingsGraph::new(2, Some(0), vec![0], vec![(0, 1)], vec![], vec![], vec![]);
        let violations = overlapping.validate(ValidationMode::Rooted);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::OverlappingAItems { vertices } if vertices == &[0])));

        let disconnected =
            StallingsGraph::new(2, Some(0), vec![0, 1], vec![], vec![0, 1], vec![], vec![]);
        let violations = disconnected.validate(ValidationMode::Rooted);
        assert!(violations
            .iter()
            .any(|v| matches!(v, Violation::Disconnected { vertices } if vertices == &[1])));

        let out_of_range = StallingsGraph::new(1, Some(0), vec![3], vec![], vec![], vec![], vec![]);
        assert!(matches!(
            out_of_range.validate(ValidationMode::Rooted)[0],
            Violation::IndexOutOfRange { .. }
        ));
    }

    #[test]
    fn json_round_trip() {
        for g in [
            example_graph_1(),
            example_graph_2(),
            StallingsGraph::trivial(),
        ] {
            let s = g.to_json_string();
            let back = StallingsGraph::from_json_str(&s).unwrap();
            assert_eq!(back, g);
        }
        let v = example_graph_2().to_json_value();
        assert_eq!(v["n"], 6);
        assert_eq!(v["b"]["triangles"][0][0], 0);
        assert!(v["root"].is_number());
    }

    #[test]
    fn dot_export_mentions_all_items() {
        let dot = example_graph_2().to_dot();
        assert!(dot.contains("doublecircle"));
        assert_eq!(dot.matches("label=\"a\"").count(), 3); // one loop + two pairs
        assert_eq!(dot.matches("label=\"b\"").count(), 5); // loop + edge + triangle
    }

    #[test]
    fn type_identities_on_examples() {
        for g in [
            stallings_graph(&gens(&["abaB", "babab"])),
            stallings_graph(&gens(&["a", "b"])),
        ] {
            assert!(g.combinatorial_type().identities_hold());
        }
        // Graphs whose root lacks an item do not satisfy the identities.
        assert!(!example_graph_2().combinatorial_type().identities_hold());
        assert!(!stallings_graph(&gens(&["bab"]))
            .combinatorial_type()
            .identities_hold());
    }
}
