//! Test-only generators and definitional oracles. Nothing here calls into
//! the library code paths it is used to check.
#![allow(dead_code)]

use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use rvnet::mst::{kruskal_mst, Edge, SpanningTree};
use rvnet::rvcorr::SimilarityMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn codes(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("N{i:03}")).collect()
}

pub fn normal_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

/// Random 2x2 orthogonal matrix: a rotation, optionally composed with a
/// reflection.
pub fn orthogonal_2x2(rng: &mut impl Rng) -> Array2<f64> {
    let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (s, c) = th.sin_cos();
    if rng.random_bool(0.5) {
        ndarray::array![[c, -s], [s, c]]
    } else {
        ndarray::array![[c, s], [s, -c]]
    }
}

pub fn nonzero_scalar(rng: &mut impl Rng) -> f64 {
    let mag = rng.random_range(0.1..5.0);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// `Y = w X + noise`, covering RV values across (0, 1).
pub fn related_pair(rng: &mut impl Rng, rows: usize) -> (Array2<f64>, Array2<f64>) {
    let x = normal_matrix(rng, rows, 2);
    let w: f64 = rng.random_range(0.0..3.0);
    let y = &x.dot(&orthogonal_2x2(rng)) * w + &normal_matrix(rng, rows, 2);
    (x, y)
}

/// RV by explicit summation over rows and explicit matrix-product
/// traces, with divisor `m - 1`.
pub fn naive_rv(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let m = x.nrows();
    let cov = |a: &Array2<f64>, b: &Array2<f64>| -> Vec<Vec<f64>> {
        let mean = |z: &Array2<f64>, c: usize| (0..m).map(|t| z[[t, c]]).sum::<f64>() / m as f64;
        (0..a.ncols())
            .map(|p| {
                let ma = mean(a, p);
                (0..b.ncols())
                    .map(|q| {
                        let mb = mean(b, q);
                        (0..m).map(|t| (a[[t, p]] - ma) * (b[[t, q]] - mb)).sum::<f64>() / (m - 1) as f64
                    })
                    .collect()
            })
            .collect()
    };
    let tr_prod = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> f64 {
        let mut tr = 0.0;
        for i in 0..a.len() {
            for k in 0..b.len() {
                tr += a[i][k] * b[k][i];
            }
        }
        tr
    };
    let (sxx, syy, sxy, syx) = (cov(x, x), cov(y, y), cov(x, y), cov(y, x));
    tr_prod(&sxy, &syx) / (tr_prod(&sxx, &sxx) * tr_prod(&syy, &syy)).sqrt()
}

/// Textbook Pearson correlation squared.
pub fn pearson_r2(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r = sxy / (sxx * syy).sqrt();
    r * r
}

/// Random labeled tree: each node attaches to a uniformly chosen earlier
/// node, then labels are shuffled.
pub fn random_tree_pairs(rng: &mut impl Rng, n: usize) -> Vec<(usize, usize)> {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    (1..n)
        .map(|i| {
            let parent = rng.random_range(0..i);
            (labels[i], labels[parent])
        })
        .collect()
}

pub fn tree_from_pairs(n: usize, pairs: &[(usize, usize)]) -> SpanningTree {
    let edges = pairs.iter().map(|&(a, b)| Edge::new(a, b, 0.5)).collect();
    SpanningTree::from_edges(codes(n), edges).unwrap()
}

pub fn adjacency_matrix(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in pairs {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    adj
}

pub fn oracle_degree(n: usize, pairs: &[(usize, usize)]) -> Vec<f64> {
    let adj = adjacency_matrix(n, pairs);
    adj.iter()
        .map(|row| row.iter().filter(|x| **x).count() as f64 / (n - 1) as f64)
        .collect()
}

/// All-pairs hop distances by Floyd-Warshall.
pub fn floyd_warshall(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let inf = usize::MAX / 4;
    let adj = adjacency_matrix(n, pairs);
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                d[i][j] = 0;
            } else if adj[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

pub fn oracle_closeness(n: usize, pairs: &[(usize, usize)]) -> Vec<f64> {
    floyd_warshall(n, pairs)
        .iter()
        .map(|row| (n - 1) as f64 / row.iter().sum::<usize>() as f64)
        .collect()
}

/// BFS from `s` returning hop distances and shortest-path counts.
fn bfs_counts(adj: &[Vec<bool>], s: usize) -> (Vec<usize>, Vec<f64>) {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    let mut sigma = vec![0.0; n];
    dist[s] = 0;
    sigma[s] = 1.0;
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if !adj[u][v] {
                continue;
            }
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
            if dist[v] == dist[u] + 1 {
                sigma[v] += sigma[u];
            }
        }
    }
    (dist, sigma)
}

/// Betweenness by enumerating every unordered pair and counting the
/// fraction of shortest paths through each intermediate node.
pub fn oracle_betweenness(n: usize, pairs: &[(usize, usize)]) -> Vec<f64> {
    if n < 3 {
        return vec![0.0; n];
    }
    let adj = adjacency_matrix(n, pairs);
    let counts: Vec<(Vec<usize>, Vec<f64>)> = (0..n).map(|s| bfs_counts(&adj, s)).collect();
    let norm = ((n - 1) * (n - 2)) as f64 / 2.0;
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            for j in 0..n {
                for k in j + 1..n {
                    if i == j || i == k {
                        continue;
                    }
                    let (dj, sj) = &counts[j];
                    let (di, si) = &counts[i];
                    if dj[i] + di[k] == dj[k] {
                        total += sj[i] * si[k] / sj[k];
                    }
                }
            }
            total / norm
        })
        .collect()
}

/// Dominant eigenpair of the adjacency matrix by dense symmetric
/// eigendecomposition, sign-fixed to be non-negative.
pub fn oracle_eigenvector(n: usize, pairs: &[(usize, usize)]) -> (f64, Vec<f64>) {
    let adj = adjacency_matrix(n, pairs);
    let a = DMatrix::<f64>::from_fn(n, n, |i, j| if adj[i][j] { 1.0 } else { 0.0 });
    let eig = SymmetricEigen::new(a);
    let (idx, lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a: &(usize, &f64), b| a.1.total_cmp(b.1))
        .map(|(i, l)| (i, *l))
        .unwrap();
    let v = eig.eigenvectors.column(idx);
    let sign = if v.sum() < 0.0 { -1.0 } else { 1.0 };
    let norm = v.norm();
    (lambda, v.iter().map(|x| sign * x / norm).collect())
}

/// Degree sequence of a 45-node currency tree with one 9-link hub.
pub const HUB45_DEGREES: [(&str, usize); 45] = [
    ("AED", 1), ("ARS", 1), ("AUD", 5), ("BHD", 2), ("BIF", 1), ("BND", 2), ("BRL", 1),
    ("CAD", 1), ("CHF", 1), ("CLP", 1), ("CNY", 1), ("COP", 2), ("CZK", 2), ("DEM", 1),
    ("DZD", 1), ("EGP", 2), ("ESP", 1), ("EUR", 1), ("FJD", 1), ("FRF", 9), ("GBP", 1),
    ("GRD", 4), ("HKD", 1), ("IDR", 1), ("ILS", 1), ("INR", 2), ("ITL", 1), ("JPY", 1),
    ("KRW", 1), ("KWD", 2), ("MXN", 2), ("MYR", 3), ("NGN", 1), ("NOK", 4), ("NZD", 2),
    ("PHP", 1), ("PKR", 1), ("PLN", 3), ("RUB", 2), ("SAR", 1), ("SEK", 1), ("SGD", 6),
    ("THB", 2), ("XPF", 4), ("ZAR", 3),
];

/// Deterministic tree realizing [`HUB45_DEGREES`]. Internal nodes (degree
/// >= 2) form a chain with the highest degrees in the middle, placed
/// alternately right and left of the hub; leaves fill the remaining slots in
/// code order. Returned pairs index the sorted codes.
pub fn hub45_pairs() -> Vec<(usize, usize)> {
    let n = HUB45_DEGREES.len();
    let mut internal: Vec<usize> = (0..n).filter(|&i| HUB45_DEGREES[i].1 >= 2).collect();
    internal.sort_by(|&a, &b| HUB45_DEGREES[b].1.cmp(&HUB45_DEGREES[a].1).then(a.cmp(&b)));
    let mut chain = VecDeque::new();
    for (pos, node) in internal.into_iter().enumerate() {
        if pos % 2 == 1 {
            chain.push_front(node);
        } else {
            chain.push_back(node);
        }
    }
    let chain: Vec<usize> = chain.into_iter().collect();
    let mut leaves = (0..n).filter(|&i| HUB45_DEGREES[i].1 == 1);
    let mut pairs = Vec::new();
    let mut free: Vec<usize> = HUB45_DEGREES.iter().map(|(_, d)| *d).collect();
    for w in chain.windows(2) {
        pairs.push((w[0], w[1]));
        free[w[0]] -= 1;
        free[w[1]] -= 1;
    }
    for &i in &chain {
        for _ in 0..free[i] {
            pairs.push((i, leaves.next().expect("slot count equals leaf count")));
        }
    }
    assert!(leaves.next().is_none());
    pairs
}

pub fn hub45_codes() -> Vec<String> {
    HUB45_DEGREES.iter().map(|(c, _)| c.to_string()).collect()
}

/// Similarity matrix whose MST is exactly the hub45 tree: tree edges get
/// RV in [0.85, 0.95], every other pair 0.2.
pub fn hub45_similarity() -> SimilarityMatrix {
    let n = HUB45_DEGREES.len();
    let mut rv = Array2::from_elem((n, n), 0.2);
    rv.diag_mut().fill(1.0);
    for (k, (a, b)) in hub45_pairs().into_iter().enumerate() {
        let v = 0.95 - 0.1 * k as f64 / 44.0;
        rv[[a, b]] = v;
        rv[[b, a]] = v;
    }
    SimilarityMatrix::from_rv(hub45_codes(), rv).unwrap()
}

pub fn hub45_tree() -> SpanningTree {
    kruskal_mst(&hub45_similarity()).unwrap()
}

/// Complete graph with i.i.d. RV values in [0, 1).
pub fn random_similarity(rng: &mut impl Rng, n: usize) -> SimilarityMatrix {
    let mut rv = Array2::<f64>::eye(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.random_range(0.0..1.0);
            rv[[i, j]] = v;
            rv[[j, i]] = v;
        }
    }
    SimilarityMatrix::from_rv(codes(n), rv).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
