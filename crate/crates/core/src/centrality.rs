//! Degree, betweenness, closeness and eigenvector centrality on a
//! spanning tree. Path lengths are hop counts over tree edges.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::mst::SpanningTree;

pub const DEFAULT_EIG_TOL: f64 = 1e-10;
pub const DEFAULT_EIG_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CentralityError {
    #[error("node index {index} out of range for {node_count} nodes")]
    IndexOutOfRange { index: usize, node_count: usize },
    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    Degree,
    Closeness,
    Betweenness,
    Eigenvector,
}

impl Measure {
    /// Reporting order used by every table and export.
    pub const ALL: [Measure; 4] = [
        Measure::Degree,
        Measure::Closeness,
        Measure::Betweenness,
        Measure::Eigenvector,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::Closeness => "closeness",
            Measure::Betweenness => "betweenness",
            Measure::Eigenvector => "eigenvector",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-node scores for one measure, indexed like the tree's assets.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityScores {
    pub measure: Measure,
    pub assets: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSolveReport {
    pub lambda_max: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// All four measures in [`Measure::ALL`] order plus the eigen-solve report.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityReport {
    pub scores: [CentralityScores; 4],
    pub eigen: EigenSolveReport,
}

impl CentralityReport {
    pub fn get(&self, measure: Measure) -> &CentralityScores {
        &self.scores[Measure::ALL.iter().position(|m| *m == measure).unwrap()]
    }
}

fn scores(tree: &SpanningTree, measure: Measure, values: Vec<f64>) -> CentralityScores {
    CentralityScores {
        measure,
        assets: tree.assets().to_vec(),
        values,
    }
}

fn check_node(tree: &SpanningTree, i: usize) -> Result<(), CentralityError> {
    if i < tree.node_count() {
        Ok(())
    } else {
        Err(CentralityError::IndexOutOfRange {
            index: i,
            node_count: tree.node_count(),
        })
    }
}

/// Hop distances from `source` to every node.
fn bfs_distances(tree: &SpanningTree, source: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; tree.node_count()];
    let mut queue = VecDeque::from([source]);
    dist[source] = 0;
    while let Some(u) = queue.pop_front() {
        for &v in tree.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Number of edges on the tree path between `i` and `j`.
pub fn hop_distance(tree: &SpanningTree, i: usize, j: usize) -> Result<usize, CentralityError> {
    check_node(tree, i)?;
    check_node(tree, j)?;
    Ok(bfs_distances(tree, i)[j])
}

/// `deg(i) / (N - 1)`.
pub fn degree_centrality(tree: &SpanningTree) -> CentralityScores {
    let denom = (tree.node_count() - 1) as f64;
    let values = tree.adjacency().iter().map(|n| n.len() as f64 / denom).collect();
    scores(tree, Measure::Degree, values)
}

/// Fraction of unordered pairs `{j, k}` (both distinct from `i`) whose
/// path runs through `i`. Paths in a tree are unique, so removing `i`
/// splits the other nodes into branches, and a pair passes through `i`
/// exactly when its endpoints lie in different branches.
pub fn betweenness_centrality(tree: &SpanningTree) -> CentralityScores {
    let n = tree.node_count();
    if n < 3 {
        return scores(tree, Measure::Betweenness, vec![0.0; n]);
    }
    let sizes = subtree_sizes(tree);
    let norm = ((n - 1) * (n - 2) / 2) as f64;
    let values = (0..n)
        .map(|i| {
            let branches = branch_sizes(tree, &sizes, i);
            let others = n - 1;
            let same_branch: usize = branches.iter().map(|s| s * s).sum();
            let through = (others * others - same_branch) / 2;
            through as f64 / norm
        })
        .collect();
    scores(tree, Measure::Betweenness, values)
}

/// Subtree sizes and parents for the tree rooted at node 0.
struct RootedSizes {
    parent: Vec<usize>,
    size: Vec<usize>,
}

fn subtree_sizes(tree: &SpanningTree) -> RootedSizes {
    let n = tree.node_count();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![0usize];
    parent[0] = 0;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &v in tree.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                stack.push(v);
            }
        }
    }
    let mut size = vec![1usize; n];
    for &u in order.iter().rev().filter(|&&u| u != 0) {
        size[parent[u]] += size[u];
    }
    RootedSizes { parent, size }
}

fn branch_sizes(tree: &SpanningTree, rooted: &RootedSizes, i: usize) -> Vec<usize> {
    let n = tree.node_count();
    tree.neighbors(i)
        .iter()
        .map(|&v| {
            if i != 0 && rooted.parent[i] == v {
                n - rooted.size[i]
            } else {
                rooted.size[v]
            }
        })
        .collect()
}

/// `(N - 1) / sum_j hop(i, j)`.
pub fn closeness_centrality(tree: &SpanningTree) -> CentralityScores {
    let n = tree.node_count();
    let values = (0..n)
        .map(|i| {
            let total: usize = bfs_distances(tree, i).iter().sum();
            (n - 1) as f64 / total as f64
        })
        .collect();
    scores(tree, Measure::Closeness, values)
}

fn adjacency_product(tree: &SpanningTree, x: &[f64]) -> Vec<f64> {
    tree.adjacency()
        .iter()
        .map(|nbrs| nbrs.iter().map(|&j| x[j]).sum())
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Perron vector of the adjacency matrix by power iteration on `A + I`.
///
/// Trees are bipartite, so the spectrum of `A` is symmetric about zero and
/// plain power iteration oscillates between `±λ_max`. Shifting by the
/// identity keeps the eigenvectors and makes `λ_max + 1` strictly dominant.
/// Iteration stops once successive unit iterates differ by less than `tol`
/// and the residual `‖Ax − λx‖₂` is below `tol · N`.
pub fn eigenvector_centrality(
    tree: &SpanningTree,
    tol: f64,
    max_iter: usize,
) -> Result<(CentralityScores, EigenSolveReport), CentralityError> {
    let n = tree.node_count();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let ax = adjacency_product(tree, &x);
        let mut next: Vec<f64> = ax.iter().zip(&x).map(|(a, v)| a + v).collect();
        let len = norm(&next);
        next.iter_mut().for_each(|v| *v /= len);
        let step = norm(&next.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        x = next;

        if step < tol {
            let ax = adjacency_product(tree, &x);
            let lambda: f64 = ax.iter().zip(&x).map(|(a, v)| a * v).sum();
            residual = norm(&ax.iter().zip(&x).map(|(a, v)| a - lambda * v).collect::<Vec<_>>());
            if residual < tol * n as f64 {
                // Perron sign convention; also clears any negative zeros.
                let values = x.iter().map(|v| v.abs()).collect();
                let report = EigenSolveReport {
                    lambda_max: lambda,
                    iterations: iteration,
                    residual,
                };
                return Ok((scores(tree, Measure::Eigenvector, values), report));
            }
        }
    }
    Err(CentralityError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Computes all four measures.
pub fn compute_all(tree: &SpanningTree, tol: f64, max_iter: usize) -> Result<CentralityReport, CentralityError> {
    let (eigen_scores, eigen) = eigenvector_centrality(tree, tol, max_iter)?;
    Ok(CentralityReport {
        scores: [
            degree_centrality(tree),
            closeness_centrality(tree),
            betweenness_centrality(tree),
            eigen_scores,
        ],
        eigen,
    })
}
