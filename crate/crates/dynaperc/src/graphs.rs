//! Graph substrate: lazily addressable regular trees, explicit finite
//! graphs, and sampled Galton–Watson trees.
//!
//! Tree vertices are addressed by path words from the root: the first
//! letter picks one of `d` subtrees, every later letter one of `d-1`
//! children. A word is all the identity a vertex needs, so unvisited
//! regions of the (infinite) tree cost nothing. Edges are identified with
//! their child vertex, which gives every edge a unique key for the
//! environment store.

use crate::error::{Error, Result};
use crate::rng::{mix64, StreamRng};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

const LANE_A: u64 = 0x243f_6a88_85a3_08d3; // pi digits
const LANE_B: u64 = 0x1319_8a2e_0370_7344;
const LETTER_A: u64 = 0xa409_3822_299f_31d0;
const LETTER_B: u64 = 0x082e_fa98_ec4e_6c89;

/// Two independent 64-bit hash lanes; collisions across both lanes are
/// negligible at any reachable scale.
pub type Lanes = (u64, u64);

pub fn root_lanes() -> Lanes {
    (mix64(LANE_A), mix64(LANE_B))
}

#[inline]
pub fn child_lanes(parent: Lanes, letter: u8) -> Lanes {
    let l = letter as u64 + 1;
    (
        mix64(parent.0 ^ l.wrapping_mul(LETTER_A)),
        mix64(parent.1 ^ l.wrapping_mul(LETTER_B)),
    )
}

/// Canonical 128-bit edge identity used by the environment store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey(pub u128);

impl EdgeKey {
    pub fn from_lanes(l: Lanes) -> Self {
        EdgeKey(((l.0 as u128) << 64) | l.1 as u128)
    }

    pub fn lanes(self) -> Lanes {
        ((self.0 >> 64) as u64, self.0 as u64)
    }
}

/// Path word of a tree vertex; empty word = root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn root() -> Self {
        Word(Vec::new())
    }

    pub fn depth(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn parent(&self) -> Option<Word> {
        if self.is_root() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn child(&self, letter: u8) -> Word {
        let mut w = self.0.clone();
        w.push(letter);
        Word(w)
    }

    pub fn lcp_len(&self, other: &Word) -> u32 {
        self.0
            .iter()
            .zip(&other.0)
            .take_while(|(a, b)| a == b)
            .count() as u32
    }

    pub fn lanes(&self) -> Lanes {
        self.0.iter().fold(root_lanes(), |l, &c| child_lanes(l, c))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            write!(f, "o")
        } else {
            for c in &self.0 {
                write!(f, "{c}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexRef {
    /// Tree addressing by path word.
    Tree(Word),
    /// Index into a finite adjacency table.
    Finite(u32),
}

impl VertexRef {
    pub fn root() -> Self {
        VertexRef::Tree(Word::root())
    }

    pub fn word(&self) -> Result<&Word> {
        match self {
            VertexRef::Tree(w) => Ok(w),
            VertexRef::Finite(_) => Err(Error::KindMismatch("expected tree vertex")),
        }
    }

    pub fn index(&self) -> Result<u32> {
        match self {
            VertexRef::Finite(i) => Ok(*i),
            VertexRef::Tree(_) => Err(Error::KindMismatch("expected finite vertex")),
        }
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexRef::Tree(w) => write!(f, "{w}"),
            VertexRef::Finite(i) => write!(f, "#{i}"),
        }
    }
}

/// An edge: on trees the child endpoint identifies it; on finite graphs a
/// canonically ordered endpoint pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeRef {
    Tree(Word),
    Finite(u32, u32),
}

impl EdgeRef {
    pub fn finite(u: u32, v: u32) -> Self {
        EdgeRef::Finite(u.min(v), u.max(v))
    }

    pub fn key(&self) -> EdgeKey {
        match self {
            EdgeRef::Tree(w) => EdgeKey::from_lanes(w.lanes()),
            EdgeRef::Finite(u, v) => {
                let a = mix64(LANE_A ^ (*u as u64 + 1).wrapping_mul(LETTER_A))
                    ^ mix64((*v as u64 + 1).wrapping_mul(LETTER_B));
                let b = mix64(LANE_B ^ (*v as u64 + 1).wrapping_mul(LETTER_A))
                    ^ mix64((*u as u64 + 1).wrapping_mul(LETTER_B));
                EdgeKey::from_lanes((mix64(a), mix64(b)))
            }
        }
    }
}

/// Explicit finite graph in compressed sparse row form.
///
/// `host_degree` marks graphs that live inside a regular host (balls of a
/// tree): degrees, boundaries, and walk rates are then taken in the host,
/// with absent directions acting as permanently closed edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteGraph {
    offsets: Vec<u32>,
    nbrs: Vec<u32>,
    pub host_degree: Option<u32>,
}

impl FiniteGraph {
    pub fn new(lists: Vec<Vec<u32>>) -> Result<Self> {
        let n = lists.len() as u32;
        for (u, nbrs) in lists.iter().enumerate() {
            for &v in nbrs {
                if v >= n {
                    return Err(Error::InvalidParameter(format!(
                        "neighbor {v} out of range for {n} vertices"
                    )));
                }
                if v as usize == u {
                    return Err(Error::InvalidParameter(format!("self-loop at {u}")));
                }
                if !lists[v as usize].contains(&(u as u32)) {
                    return Err(Error::InvalidParameter(format!(
                        "adjacency not symmetric: {u} -> {v}"
                    )));
                }
            }
        }
        Ok(Self::from_lists_unchecked(lists))
    }

    fn from_lists_unchecked(lists: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0u32);
        let mut nbrs = Vec::new();
        for l in &lists {
            nbrs.extend_from_slice(l);
            offsets.push(nbrs.len() as u32);
        }
        FiniteGraph { offsets, nbrs, host_degree: None }
    }

    /// One line per vertex, space-separated 0-based neighbor indices.
    /// An empty line is an isolated vertex.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let lists = text
            .lines()
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<u32>().map_err(|_| {
                            Error::InvalidParameter(format!("bad vertex index {tok:?}"))
                        })
                    })
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteGraph::new(lists)
    }

    pub fn cycle(n: u32) -> Self {
        Self::from_lists_unchecked(
            (0..n)
                .map(|i| vec![(i + n - 1) % n, (i + 1) % n])
                .collect(),
        )
    }

    pub fn complete(n: u32) -> Self {
        Self::from_lists_unchecked(
            (0..n)
                .map(|i| (0..n).filter(|&j| j != i).collect())
                .collect(),
        )
    }

    /// Ball of radius `r` in the regular tree `T_d`, breadth-first indexed
    /// with the root at 0; `host_degree` is set to `d`.
    pub fn tree_ball(d: u32, r: u32) -> Self {
        assert!(d >= 3);
        let mut lists: Vec<Vec<u32>> = vec![Vec::new()];
        let mut frontier: Vec<u32> = vec![0];
        for depth in 0..r {
            let mut next = Vec::new();
            for &u in &frontier {
                let branching = if depth == 0 { d } else { d - 1 };
                for _ in 0..branching {
                    let v = lists.len() as u32;
                    lists.push(vec![u]);
                    lists[u as usize].push(v);
                    next.push(v);
                }
            }
            frontier = next;
        }
        let mut g = Self::from_lists_unchecked(lists);
        g.host_degree = Some(d);
        g
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors_of(&self, v: u32) -> &[u32] {
        &self.nbrs[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// Degree used for rates and boundary counts (host degree if present).
    pub fn weight_degree(&self, v: u32) -> u32 {
        self.host_degree.unwrap_or_else(|| self.degree(v))
    }

    /// Canonically ordered edge list; the position of an edge is its index
    /// in piecewise environments.
    pub fn edge_list(&self) -> Vec<(u32, u32)> {
        let mut edges = Vec::new();
        for u in 0..self.len() as u32 {
            for &v in self.neighbors_of(u) {
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    pub fn bfs_dist(&self, from: u32, to: u32) -> Option<u32> {
        if from == to {
            return Some(0);
        }
        let mut dist = vec![u32::MAX; self.len()];
        dist[from as usize] = 0;
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            for &v in self.neighbors_of(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    if v == to {
                        return Some(dist[v as usize]);
                    }
                    q.push_back(v);
                }
            }
        }
        None
    }
}

/// The graph substrate the simulator runs on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GraphSpec {
    RegularTree { degree: u32 },
    Finite(FiniteGraph),
    SampledGw {
        trials: u32,
        p: f64,
        depth_cap: u32,
        graph: FiniteGraph,
        survived: bool,
    },
}

impl GraphSpec {
    pub fn regular_tree(degree: u32) -> Result<Self> {
        if degree < 3 {
            return Err(Error::InvalidParameter("regular tree needs degree >= 3".into()));
        }
        Ok(GraphSpec::RegularTree { degree })
    }

    pub fn finite(&self) -> Option<&FiniteGraph> {
        match self {
            GraphSpec::Finite(g) => Some(g),
            GraphSpec::SampledGw { graph, .. } => Some(graph),
            GraphSpec::RegularTree { .. } => None,
        }
    }

    pub fn origin(&self) -> VertexRef {
        match self {
            GraphSpec::RegularTree { .. } => VertexRef::root(),
            _ => VertexRef::Finite(0),
        }
    }
}

/// Deterministically ordered neighbors of `v`: parent first (if any), then
/// children in letter order; finite graphs use adjacency order.
pub fn neighbors(g: &GraphSpec, v: &VertexRef) -> Result<Vec<(VertexRef, EdgeRef)>> {
    match g {
        GraphSpec::RegularTree { degree } => {
            let w = v.word()?;
            let mut out = Vec::with_capacity(*degree as usize);
            if let Some(parent) = w.parent() {
                out.push((VertexRef::Tree(parent), EdgeRef::Tree(w.clone())));
            }
            let branching = if w.is_root() { *degree } else { *degree - 1 };
            for letter in 0..branching {
                let c = w.child(letter as u8);
                out.push((VertexRef::Tree(c.clone()), EdgeRef::Tree(c)));
            }
            Ok(out)
        }
        GraphSpec::Finite(fg) | GraphSpec::SampledGw { graph: fg, .. } => {
            let u = v.index()?;
            if u as usize >= fg.len() {
                return Err(Error::UnknownVertex(v.to_string()));
            }
            Ok(fg
                .neighbors_of(u)
                .iter()
                .map(|&n| (VertexRef::Finite(n), EdgeRef::finite(u, n)))
                .collect())
        }
    }
}

/// Graph distance. Trees use common-prefix arithmetic; finite graphs use
/// breadth-first search. `None` means unreachable (finite graphs only).
pub fn dist(g: &GraphSpec, u: &VertexRef, v: &VertexRef) -> Result<Option<u32>> {
    match g {
        GraphSpec::RegularTree { .. } => {
            let (a, b) = (u.word()?, v.word()?);
            Ok(Some(a.depth() + b.depth() - 2 * a.lcp_len(b)))
        }
        GraphSpec::Finite(fg) | GraphSpec::SampledGw { graph: fg, .. } => {
            let (a, b) = (u.index()?, v.index()?);
            if a as usize >= fg.len() || b as usize >= fg.len() {
                return Err(Error::UnknownVertex(format!("{u} or {v}")));
            }
            Ok(fg.bfs_dist(a, b))
        }
    }
}

/// Exhaustive Cheeger search over connected subsets of a finite vertex
/// universe: min over `1 <= |W| <= max_size` of `|boundary| / sum deg`.
/// Degrees and boundary edges count in the host graph when `host_degree`
/// is set, so balls of a tree report the infinite tree's expansion.
pub fn cheeger_brute(g: &GraphSpec, max_size: usize) -> Result<Ratio<u64>> {
    if max_size < 1 {
        return Err(Error::InvalidParameter("max_size must be >= 1".into()));
    }
    let fg = g
        .finite()
        .ok_or(Error::KindMismatch("cheeger_brute needs a finite universe"))?;
    let n = fg.len();

    struct Ctx<'a> {
        fg: &'a FiniteGraph,
        max_size: usize,
        in_set: Vec<bool>,
        banned: Vec<bool>,
        set: Vec<u32>,
        best: Option<Ratio<u64>>,
    }

    impl Ctx<'_> {
        fn score(&mut self) {
            let mut deg_sum = 0u64;
            let mut internal = 0u64;
            for &u in &self.set {
                deg_sum += self.fg.weight_degree(u) as u64;
                internal += self
                    .fg
                    .neighbors_of(u)
                    .iter()
                    .filter(|&&v| self.in_set[v as usize])
                    .count() as u64;
            }
            // Every internal edge was counted from both endpoints.
            let boundary = deg_sum - internal;
            let ratio = Ratio::new(boundary, deg_sum);
            if self.best.is_none_or(|b| ratio < b) {
                self.best = Some(ratio);
            }
        }

        // Connected-subset enumeration: extend by frontier vertices in
        // order, banning a vertex for the remaining siblings once its
        // branch is exhausted, so each subset appears exactly once.
        fn grow(&mut self, frontier: Vec<u32>) {
            self.score();
            if self.set.len() == self.max_size {
                return;
            }
            let mut local_banned = Vec::new();
            for (i, &u) in frontier.iter().enumerate() {
                if self.banned[u as usize] {
                    continue;
                }
                self.in_set[u as usize] = true;
                self.set.push(u);
                let mut next: Vec<u32> = frontier[i + 1..]
                    .iter()
                    .copied()
                    .filter(|&v| !self.banned[v as usize] && !self.in_set[v as usize])
                    .collect();
                for &v in self.fg.neighbors_of(u) {
                    if !self.in_set[v as usize]
                        && !self.banned[v as usize]
                        && !frontier.contains(&v)
                    {
                        next.push(v);
                    }
                }
                self.grow(next);
                self.set.pop();
                self.in_set[u as usize] = false;
                self.banned[u as usize] = true;
                local_banned.push(u);
            }
            for u in local_banned {
                self.banned[u as usize] = false;
            }
        }
    }

    let mut ctx = Ctx {
        fg,
        max_size,
        in_set: vec![false; n],
        banned: vec![false; n],
        set: Vec::new(),
        best: None,
    };
    for start in 0..n as u32 {
        ctx.in_set[start as usize] = true;
        ctx.set.push(start);
        let frontier: Vec<u32> = fg
            .neighbors_of(start)
            .iter()
            .copied()
            .filter(|&v| !ctx.banned[v as usize])
            .collect();
        ctx.grow(frontier);
        ctx.set.pop();
        ctx.in_set[start as usize] = false;
        ctx.banned[start as usize] = true; // later roots never reuse this vertex
    }
    Ok(ctx.best.expect("nonempty universe"))
}

/// Samples a Galton–Watson tree with Binomial(`trials`, `p`) offspring,
/// materialized breadth-first down to `depth_cap`. The survival flag says
/// whether any vertex reached the cap.
pub fn sample_gw_tree(trials: u32, p: f64, depth_cap: u32, rng: &mut StreamRng) -> Result<GraphSpec> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter("p must be in [0,1]".into()));
    }
    // Flat layout: sample child counts breadth-first, then assemble CSR.
    let mut parent: Vec<u32> = vec![u32::MAX];
    let mut child_count: Vec<u32> = Vec::new();
    let mut layer_start = 0usize;
    let mut survived = true;
    for _depth in 0..depth_cap {
        let layer_end = parent.len();
        for u in layer_start..layer_end {
            let k = rng.binomial(trials, p);
            child_count.push(k);
            for _ in 0..k {
                parent.push(u as u32);
            }
        }
        layer_start = layer_end;
        if parent.len() == layer_end {
            survived = false;
            break;
        }
    }
    // Vertices in the deepest layer spawn nothing inside the cap.
    child_count.resize(parent.len(), 0);

    let n = parent.len();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0u32);
    for v in 0..n {
        let deg = child_count[v] + u32::from(v > 0);
        offsets.push(offsets[v] + deg);
    }
    let mut nbrs = vec![0u32; offsets[n] as usize];
    let mut cursor: Vec<u32> = offsets[..n].to_vec();
    for v in 1..n {
        let pu = parent[v] as usize;
        // Parent slot first for v, then v appears as a child of its parent.
        nbrs[cursor[v] as usize] = parent[v];
        cursor[v] += 1;
        nbrs[cursor[pu] as usize] = v as u32;
        cursor[pu] += 1;
    }
    Ok(GraphSpec::SampledGw {
        trials,
        p,
        depth_cap,
        graph: FiniteGraph { offsets, nbrs, host_degree: None },
        survived,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> GraphSpec {
        GraphSpec::regular_tree(3).unwrap()
    }

    fn w(s: &str) -> VertexRef {
        VertexRef::Tree(Word(s.bytes().map(|b| b - b'0').collect()))
    }

    #[test]
    fn root_neighbors_are_three_children() {
        let ns = neighbors(&t3(), &VertexRef::root()).unwrap();
        let words: Vec<String> = ns.iter().map(|(v, _)| v.to_string()).collect();
        assert_eq!(words, ["0", "1", "2"]);
    }

    #[test]
    fn inner_vertex_has_parent_plus_children() {
        let ns = neighbors(&t3(), &w("0")).unwrap();
        let words: Vec<String> = ns.iter().map(|(v, _)| v.to_string()).collect();
        assert_eq!(words, ["o", "00", "01"]);
    }

    #[test]
    fn cycle_neighbors() {
        let g = GraphSpec::Finite(FiniteGraph::cycle(4));
        let ns = neighbors(&g, &VertexRef::Finite(0)).unwrap();
        let idx: Vec<u32> = ns.iter().map(|(v, _)| v.index().unwrap()).collect();
        assert_eq!(idx, [3, 1]);
    }

    #[test]
    fn tree_distances() {
        let g = t3();
        assert_eq!(dist(&g, &VertexRef::root(), &w("01")).unwrap(), Some(2));
        assert_eq!(dist(&g, &w("0"), &w("1")).unwrap(), Some(2));
        assert_eq!(dist(&g, &w("010"), &w("011")).unwrap(), Some(2));
    }

    #[test]
    fn unreachable_is_none() {
        let g = GraphSpec::Finite(FiniteGraph::new(vec![vec![1], vec![0], vec![]]).unwrap());
        assert_eq!(dist(&g, &VertexRef::Finite(0), &VertexRef::Finite(2)).unwrap(), None);
    }

    #[test]
    fn asymmetric_adjacency_rejected() {
        assert!(FiniteGraph::new(vec![vec![1], vec![]]).is_err());
        assert!(FiniteGraph::new(vec![vec![0]]).is_err());
    }

    #[test]
    fn ball_sizes_match_closed_form() {
        for r in 0..=6u32 {
            let ball = FiniteGraph::tree_ball(3, r);
            let d = 3u64;
            let expect = 1 + d * ((d - 1).pow(r) - 1) / (d - 2);
            assert_eq!(ball.len() as u64, expect, "radius {r}");
        }
        for r in 0..=4u32 {
            let ball = FiniteGraph::tree_ball(4, r);
            let d = 4u64;
            let expect = 1 + d * ((d - 1).pow(r) - 1) / (d - 2);
            assert_eq!(ball.len() as u64, expect, "radius {r}");
        }
    }

    #[test]
    fn cheeger_single_vertex_tree() {
        let g = GraphSpec::Finite(FiniteGraph::tree_ball(3, 2));
        assert_eq!(cheeger_brute(&g, 1).unwrap(), Ratio::new(1, 1));
    }

    #[test]
    fn cheeger_tree_ball_radius4() {
        // Any n-vertex subtree of T_3 has boundary n+2 and degree sum 3n;
        // the minimum over n <= 8 sits at n = 8.
        let g = GraphSpec::Finite(FiniteGraph::tree_ball(3, 4));
        assert_eq!(cheeger_brute(&g, 8).unwrap(), Ratio::new(10, 24));
    }

    #[test]
    fn cheeger_four_cycle() {
        let g = GraphSpec::Finite(FiniteGraph::cycle(4));
        assert_eq!(cheeger_brute(&g, 2).unwrap(), Ratio::new(2, 4));
    }

    #[test]
    fn cheeger_rejects_zero_max_size() {
        let g = GraphSpec::Finite(FiniteGraph::cycle(4));
        assert!(cheeger_brute(&g, 0).is_err());
    }

    #[test]
    fn gw_extremes() {
        let mut rng = StreamRng::from_parts(1, &[1]);
        let t = sample_gw_tree(2, 1.0, 5, &mut rng).unwrap();
        if let GraphSpec::SampledGw { graph, survived, .. } = &t {
            assert!(*survived);
            assert_eq!(graph.len(), 63); // full binary tree to depth 5
            assert_eq!(graph.degree(0), 2);
            assert_eq!(graph.degree(1), 3);
            // Distances are consistent with the tree structure.
            assert_eq!(graph.bfs_dist(0, 62), Some(5));
        } else {
            panic!("wrong kind");
        }
        let t = sample_gw_tree(2, 0.0, 5, &mut rng).unwrap();
        if let GraphSpec::SampledGw { graph, survived, .. } = &t {
            assert!(!*survived);
            assert_eq!(graph.len(), 1);
        } else {
            panic!("wrong kind");
        }
    }

    #[test]
    fn gw_adjacency_is_symmetric() {
        let mut rng = StreamRng::from_parts(3, &[9]);
        let t = sample_gw_tree(3, 0.6, 8, &mut rng).unwrap();
        let g = t.finite().unwrap();
        for u in 0..g.len() as u32 {
            for &v in g.neighbors_of(u) {
                assert!(g.neighbors_of(v).contains(&u), "{u} <-> {v}");
            }
        }
    }

    #[test]
    fn edge_keys_unique_on_small_ball() {
        use std::collections::HashSet;
        let mut seen = HashSet::new();
        let g = t3();
        let mut stack = vec![Word::root()];
        while let Some(word) = stack.pop() {
            for (v, e) in neighbors(&g, &VertexRef::Tree(word.clone())).unwrap() {
                let vw = v.word().unwrap();
                if vw.depth() > word.depth() {
                    seen.insert(e.key());
                    if vw.depth() < 7 {
                        stack.push(vw.clone());
                    }
                }
            }
        }
        // 3 * (2^7 - 1) edges in ball(7) of T_3, all distinct keys.
        assert_eq!(seen.len(), 381);
    }
}
