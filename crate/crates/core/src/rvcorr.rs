//! Escoufier's RV coefficient between multivariate series and the metric
//! distance derived from it.
//!
//! For column-centered data matrices `X` (m x p) and `Y` (m x q):
//!
//! ```text
//! RV(X, Y) = tr(Sxy Syx) / sqrt(tr(Sxx^2) tr(Syy^2))
//! d(X, Y)  = sqrt(2) * sqrt(1 - RV(X, Y))
//! ```
//!
//! The pipeline uses p = q = 2 (bid and ask returns), but the coefficient
//! itself is computed for any column counts so the univariate reduction
//! can be exercised directly.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use thiserror::Error;

use crate::numfmt;
use crate::returns::ReturnMatrix;

/// Slack above 1 that is attributed to rounding and clamped.
pub const RV_CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RvError {
    #[error("row count mismatch: {left} vs {right}")]
    RowCountMismatch { left: usize, right: usize },
    #[error("{0} rows, need at least 2 for a sample covariance")]
    TooFewRows(usize),
    #[error("expected {expected} columns, found {found}")]
    ColumnCount { expected: usize, found: usize },
    #[error("degenerate variance (zero covariance trace) for {0}")]
    DegenerateVariance(String),
    #[error("RV value {0} is outside [0, 1] beyond rounding tolerance")]
    Numerical(f64),
    #[error("RV value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("need at least 2 assets, found {0}")]
    TooFewAssets(usize),
    #[error("invalid similarity matrix: {0}")]
    InvalidMatrix(String),
}

/// Scalar applied to centered cross products. RV does not depend on it;
/// it only changes the intermediate covariance blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Divisor {
    /// `m - 1`
    #[default]
    Sample,
    /// `m`
    Population,
}

impl Divisor {
    fn value(self, m: usize) -> f64 {
        match self {
            Divisor::Sample => (m - 1) as f64,
            Divisor::Population => m as f64,
        }
    }
}

/// Covariance blocks of two bivariate series observed on the same rows.
/// `Syx` is the transpose of `s_xy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCovariance {
    pub s_xx: [[f64; 2]; 2],
    pub s_yy: [[f64; 2]; 2],
    pub s_xy: [[f64; 2]; 2],
}

fn check_rows(x: &ArrayView2<f64>, y: &ArrayView2<f64>) -> Result<usize, RvError> {
    if x.nrows() != y.nrows() {
        return Err(RvError::RowCountMismatch {
            left: x.nrows(),
            right: y.nrows(),
        });
    }
    if x.nrows() < 2 {
        return Err(RvError::TooFewRows(x.nrows()));
    }
    Ok(x.nrows())
}

fn centered(x: &ArrayView2<f64>) -> Array2<f64> {
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    x - &mean
}

fn to_2x2(a: &Array2<f64>) -> [[f64; 2]; 2] {
    [[a[[0, 0]], a[[0, 1]]], [a[[1, 0]], a[[1, 1]]]]
}

/// Covariance blocks with divisor `m - 1`.
pub fn cross_covariance(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<CrossCovariance, RvError> {
    check_rows(&x, &y)?;
    for side in [&x, &y] {
        if side.ncols() != 2 {
            return Err(RvError::ColumnCount {
                expected: 2,
                found: side.ncols(),
            });
        }
    }
    let m = x.nrows();
    let (xc, yc) = (centered(&x), centered(&y));
    let div = Divisor::Sample.value(m);
    Ok(CrossCovariance {
        s_xx: to_2x2(&(xc.t().dot(&xc) / div)),
        s_yy: to_2x2(&(yc.t().dot(&yc) / div)),
        s_xy: to_2x2(&(xc.t().dot(&yc) / div)),
    })
}

fn frobenius_sq(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum()
}

fn all_columns_constant(x: &ArrayView2<f64>) -> bool {
    x.columns().into_iter().all(|c| c.iter().all(|v| *v == c[0]))
}

/// RV coefficient using the default `m - 1` divisor.
pub fn rv_coefficient(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Result<f64, RvError> {
    rv_coefficient_with(x, y, Divisor::Sample)
}

/// RV coefficient with an explicit covariance divisor. Accepts any column
/// counts `p` and `q`.
pub fn rv_coefficient_with(x: ArrayView2<f64>, y: ArrayView2<f64>, divisor: Divisor) -> Result<f64, RvError> {
    let m = check_rows(&x, &y)?;
    let div = divisor.value(m);
    let (xc, yc) = (centered(&x), centered(&y));
    let s_xx = xc.t().dot(&xc) / div;
    let s_yy = yc.t().dot(&yc) / div;
    let s_xy = xc.t().dot(&yc) / div;

    // Sxx and Syy are symmetric, so tr(S^2) is the squared Frobenius norm;
    // likewise tr(Sxy Syx) = ||Sxy||_F^2 >= 0.
    let tr_xx = frobenius_sq(&s_xx);
    let tr_yy = frobenius_sq(&s_yy);
    for (label, tr, raw) in [("X", tr_xx, &x), ("Y", tr_yy, &y)] {
        if !(tr > 0.0) || all_columns_constant(raw) {
            return Err(RvError::DegenerateVariance(label.to_string()));
        }
    }
    let rv = frobenius_sq(&s_xy) / (tr_xx * tr_yy).sqrt();
    clamp_rv(rv)
}

fn clamp_rv(rv: f64) -> Result<f64, RvError> {
    if !(0.0..=1.0 + RV_CLAMP_TOLERANCE).contains(&rv) {
        return Err(RvError::Numerical(rv));
    }
    Ok(rv.min(1.0))
}

/// RV of two scalar series viewed as `m x 1` matrices; equals Pearson r².
pub fn rv_univariate_check(x: &[f64], y: &[f64]) -> Result<f64, RvError> {
    let xm = ArrayView2::from_shape((x.len(), 1), x).expect("contiguous slice");
    let ym = ArrayView2::from_shape((y.len(), 1), y).expect("contiguous slice");
    rv_coefficient(xm, ym)
}

/// `sqrt(2 (1 - rv))`, monotone decreasing on `[0, 1]`.
pub fn rv_distance(rv: f64) -> Result<f64, RvError> {
    if !(0.0..=1.0).contains(&rv) {
        return Err(RvError::OutOfRange(rv));
    }
    Ok((2.0 * (1.0 - rv)).sqrt())
}

/// Pairwise RV coefficients and distances between `N` assets.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    assets: Vec<String>,
    rv: Array2<f64>,
    dist: Array2<f64>,
}

impl SimilarityMatrix {
    /// Builds the matrix from RV values, checking symmetry, a unit diagonal
    /// and bounds, and deriving the distances.
    pub fn from_rv(assets: Vec<String>, rv: Array2<f64>) -> Result<Self, RvError> {
        let n = assets.len();
        if n < 2 {
            return Err(RvError::TooFewAssets(n));
        }
        if rv.dim() != (n, n) {
            return Err(RvError::InvalidMatrix(format!(
                "shape {:?} for {n} assets",
                rv.dim()
            )));
        }
        let mut rv = rv;
        for i in 0..n {
            if rv[[i, i]] != 1.0 {
                return Err(RvError::InvalidMatrix(format!("diagonal entry {i} is {}", rv[[i, i]])));
            }
            for j in 0..i {
                if rv[[i, j]] != rv[[j, i]] {
                    return Err(RvError::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
                let v = clamp_rv(rv[[i, j]])?;
                rv[[i, j]] = v;
                rv[[j, i]] = v;
            }
        }
        let dist = rv.mapv(|v| (2.0 * (1.0 - v)).sqrt());
        Ok(SimilarityMatrix { assets, rv, dist })
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn rv(&self) -> &Array2<f64> {
        &self.rv
    }

    pub fn dist(&self) -> &Array2<f64> {
        &self.dist
    }

    /// RV matrix as CSV with asset codes heading rows and columns.
    pub fn rv_csv(&self) -> String {
        matrix_csv(&self.assets, &self.rv)
    }

    pub fn dist_csv(&self) -> String {
        matrix_csv(&self.assets, &self.dist)
    }
}

fn matrix_csv(assets: &[String], m: &Array2<f64>) -> String {
    let mut out = String::from("code");
    for a in assets {
        out.push(',');
        out.push_str(a);
    }
    out.push('\n');
    for (a, row) in assets.iter().zip(m.rows()) {
        out.push_str(a);
        for v in row {
            out.push(',');
            out.push_str(&numfmt::significant(*v, 12));
        }
        out.push('\n');
    }
    out
}

/// Evaluates every pair `i < j` independently (in parallel) and mirrors the
/// result. The output does not depend on scheduling.
pub fn build_similarity_matrix(returns: &[ReturnMatrix]) -> Result<SimilarityMatrix, RvError> {
    let n = returns.len();
    if n < 2 {
        return Err(RvError::TooFewAssets(n));
    }
    let m = returns[0].n_rows();
    for r in returns {
        if r.n_rows() != m {
            return Err(RvError::RowCountMismatch {
                left: m,
                right: r.n_rows(),
            });
        }
        if r.rows.ncols() != 2 {
            return Err(RvError::ColumnCount {
                expected: 2,
                found: r.rows.ncols(),
            });
        }
    }
    if m < 2 {
        return Err(RvError::TooFewRows(m));
    }
    // Name the offending asset rather than a pair.
    for r in returns {
        if let Err(RvError::DegenerateVariance(_)) = rv_coefficient(r.rows.view(), r.rows.view()) {
            return Err(RvError::DegenerateVariance(r.asset_code.clone()));
        }
    }

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<Result<f64, RvError>> = pairs
        .par_iter()
        .map(|&(i, j)| rv_coefficient(returns[i].rows.view(), returns[j].rows.view()))
        .collect();

    let mut rv = Array2::<f64>::eye(n);
    for (&(i, j), value) in pairs.iter().zip(values) {
        let v = value?;
        rv[[i, j]] = v;
        rv[[j, i]] = v;
    }
    let assets = returns.iter().map(|r| r.asset_code.clone()).collect();
    SimilarityMatrix::from_rv(assets, rv)
}
