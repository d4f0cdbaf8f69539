//! Minimum spanning tree of the complete distance graph.
//!
//! [`kruskal_mst`] is the production path. [`brute_force_mst`] enumerates
//! every labeled spanning tree through Prüfer sequences and serves as an
//! exact optimality oracle for small `N`.

use std::cmp::Ordering;

use thiserror::Error;

use crate::rvcorr::SimilarityMatrix;

/// Largest `N` accepted by the exhaustive search (8^6 = 262 144 trees).
pub const BRUTE_FORCE_MAX_NODES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MstError {
    #[error("need at least 2 nodes, found {0}")]
    TooFewNodes(usize),
    #[error("exhaustive search supports at most {BRUTE_FORCE_MAX_NODES} nodes, found {0}")]
    TooLarge(usize),
    #[error("node index {index} out of range for {node_count} nodes")]
    IndexOutOfRange { index: usize, node_count: usize },
    #[error("edge list is not a spanning tree: {0}")]
    NotATree(String),
}

/// Undirected tree edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub rv: f64,
}

impl Edge {
    /// Canonicalizes the orientation and derives the distance from `rv`.
    pub fn new(a: usize, b: usize, rv: f64) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Edge {
            a,
            b,
            distance: (2.0 * (1.0 - rv)).sqrt(),
            rv,
        }
    }
}

/// Disjoint-set forest with path compression and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl UnionFind {
    pub fn new(size: usize) -> Self {
        UnionFind {
            parent: (0..size).collect(),
            rank: vec![0; size],
            components: size,
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut node = x;
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    /// Merges the sets holding `x` and `y`; false if they were already joined.
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        match self.rank[rx].cmp(&self.rank[ry]) {
            Ordering::Less => self.parent[rx] = ry,
            Ordering::Greater => self.parent[ry] = rx,
            Ordering::Equal => {
                self.parent[ry] = rx;
                self.rank[rx] += 1;
            }
        }
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }
}

/// Spanning tree over labeled nodes. Edges are stored sorted by `(a, b)`
/// and neighbor lists are sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    assets: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl SpanningTree {
    /// Builds a tree, rejecting edge lists that are not exactly a spanning
    /// tree on `assets.len()` nodes.
    pub fn from_edges(assets: Vec<String>, edges: Vec<Edge>) -> Result<Self, MstError> {
        let n = assets.len();
        if n < 2 {
            return Err(MstError::TooFewNodes(n));
        }
        if edges.len() != n - 1 {
            return Err(MstError::NotATree(format!("{} edges for {n} nodes", edges.len())));
        }
        let mut uf = UnionFind::new(n);
        let mut adjacency = vec![Vec::new(); n];
        let mut edges = edges;
        for e in edges.iter_mut() {
            *e = Edge { a: e.a.min(e.b), b: e.a.max(e.b), ..*e };
            if e.b >= n {
                return Err(MstError::IndexOutOfRange {
                    index: e.b,
                    node_count: n,
                });
            }
            if !uf.union(e.a, e.b) {
                return Err(MstError::NotATree(format!("edge ({}, {}) closes a cycle", e.a, e.b)));
            }
            adjacency[e.a].push(e.b);
            adjacency[e.b].push(e.a);
        }
        edges.sort_by_key(|e| (e.a, e.b));
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Ok(SpanningTree {
            assets,
            edges,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.assets.len()
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Sum of edge distances, accumulated in `(a, b)` edge order.
    pub fn total_distance(&self) -> f64 {
        self.edges.iter().map(|e| e.distance).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn edge_from(sim: &SimilarityMatrix, a: usize, b: usize) -> Edge {
    Edge {
        a,
        b,
        distance: sim.dist()[[a, b]],
        rv: sim.rv()[[a, b]],
    }
}

/// Kruskal's algorithm. Candidate edges are scanned in ascending
/// `(distance, a, b)` order, so ties resolve deterministically.
pub fn kruskal_mst(sim: &SimilarityMatrix) -> Result<SpanningTree, MstError> {
    let n = sim.len();
    if n < 2 {
        return Err(MstError::TooFewNodes(n));
    }
    let mut candidates: Vec<Edge> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .map(|(a, b)| edge_from(sim, a, b))
        .collect();
    candidates.sort_by(|x, y| {
        x.distance
            .total_cmp(&y.distance)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });

    let mut uf = UnionFind::new(n);
    let mut chosen = Vec::with_capacity(n - 1);
    for e in candidates {
        if uf.union(e.a, e.b) {
            chosen.push(e);
            if chosen.len() == n - 1 {
                break;
            }
        }
    }
    SpanningTree::from_edges(sim.assets().to_vec(), chosen)
}

/// Decodes a Prüfer sequence (entries in `0..n`, length `n - 2`) into the
/// edge list of the labeled tree it encodes.
pub fn prufer_decode(sequence: &[usize], n: usize) -> Vec<(usize, usize)> {
    debug_assert_eq!(sequence.len() + 2, n);
    let mut degree = vec![1usize; n];
    for &v in sequence {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in sequence {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf always exists");
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Exhaustive minimum over all `N^(N-2)` labeled spanning trees. The first
/// tree (in Prüfer lexicographic order) achieving the minimum is returned.
pub fn brute_force_mst(sim: &SimilarityMatrix) -> Result<SpanningTree, MstError> {
    let n = sim.len();
    if n < 2 {
        return Err(MstError::TooFewNodes(n));
    }
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(MstError::TooLarge(n));
    }
    if n == 2 {
        return SpanningTree::from_edges(sim.assets().to_vec(), vec![edge_from(sim, 0, 1)]);
    }

    let mut sequence = vec![0usize; n - 2];
    let mut best: Option<(f64, Vec<Edge>)> = None;
    loop {
        let mut edges: Vec<Edge> = prufer_decode(&sequence, n)
            .into_iter()
            .map(|(u, v)| edge_from(sim, u.min(v), u.max(v)))
            .collect();
        edges.sort_by_key(|e| (e.a, e.b));
        let total: f64 = edges.iter().map(|e| e.distance).sum();
        if best.as_ref().is_none_or(|(w, _)| total < *w) {
            best = Some((total, edges));
        }

        // Odometer increment over base-n digits.
        let mut pos = sequence.len();
        loop {
            if pos == 0 {
                let (_, edges) = best.expect("at least one tree enumerated");
                return SpanningTree::from_edges(sim.assets().to_vec(), edges);
            }
            pos -= 1;
            sequence[pos] += 1;
            if sequence[pos] < n {
                break;
            }
            sequence[pos] = 0;
        }
    }
}

/// Number of tree edges incident to node `i`.
pub fn tree_degree(tree: &SpanningTree, i: usize) -> Result<usize, MstError> {
    tree.adjacency
        .get(i)
        .map(Vec::len)
        .ok_or(MstError::IndexOutOfRange {
            index: i,
            node_count: tree.node_count(),
        })
}
