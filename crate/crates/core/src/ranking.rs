//! Importance ranking across the four centrality measures: top-k levels,
//! frequency of top-k membership, and the least central assets.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::centrality::{CentralityScores, Measure};

pub const DEFAULT_TOP_K: usize = 8;
pub const DEFAULT_LEAST_M: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankingError {
    #[error("top-k of {k} is outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("least-central count {m} is outside 1..={n}")]
    BadM { m: usize, n: usize },
    #[error("score tables do not describe the same four measures over one node set: {0}")]
    MeasureMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedEntry {
    pub asset_code: String,
    pub measure: Measure,
    /// 1 is the highest score.
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportanceRow {
    pub asset_code: String,
    pub frequency: usize,
    /// Levels in the fixed measure order, one per measure whose top-k
    /// contains the asset.
    pub levels: Vec<usize>,
}

impl ImportanceRow {
    /// Levels joined with commas, e.g. `2,2,3,6`.
    pub fn levels_string(&self) -> String {
        self.levels
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportanceTable {
    pub k: usize,
    pub rows: Vec<ImportanceRow>,
}

/// Node indices ordered best first: score descending, then asset code.
fn order_desc(scores: &CentralityScores) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.values.len()).collect();
    idx.sort_by(|&a, &b| {
        scores.values[b]
            .total_cmp(&scores.values[a])
            .then_with(|| scores.assets[a].cmp(&scores.assets[b]))
    });
    idx
}

/// The `k` highest-scoring nodes with levels `1..=k`.
pub fn rank_by_measure(scores: &CentralityScores, k: usize) -> Result<Vec<RankedEntry>, RankingError> {
    let n = scores.values.len();
    if k == 0 || k > n {
        return Err(RankingError::BadK { k, n });
    }
    Ok(order_desc(scores)
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(pos, i)| RankedEntry {
            asset_code: scores.assets[i].clone(),
            measure: scores.measure,
            level: pos + 1,
        })
        .collect())
}

/// Puts four score tables into [`Measure::ALL`] order after checking that
/// they cover each measure once over a common node set.
fn ordered_measures(all: &[CentralityScores]) -> Result<[&CentralityScores; 4], RankingError> {
    if all.len() != 4 {
        return Err(RankingError::MeasureMismatch(format!("{} score tables", all.len())));
    }
    let mut ordered = Vec::with_capacity(4);
    for m in Measure::ALL {
        let mut matching = all.iter().filter(|s| s.measure == m);
        match (matching.next(), matching.next()) {
            (Some(s), None) => ordered.push(s),
            _ => return Err(RankingError::MeasureMismatch(format!("{m} must appear exactly once"))),
        }
    }
    let assets = &ordered[0].assets;
    for s in &ordered {
        if &s.assets != assets || s.values.len() != assets.len() {
            return Err(RankingError::MeasureMismatch(format!("{} covers a different node set", s.measure)));
        }
    }
    Ok([ordered[0], ordered[1], ordered[2], ordered[3]])
}

/// Union of the four top-k lists with per-asset frequency and levels,
/// sorted by frequency descending, best level, then code.
pub fn importance_table(all: &[CentralityScores], k: usize) -> Result<ImportanceTable, RankingError> {
    let ordered = ordered_measures(all)?;
    let mut rows: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for scores in ordered {
        for entry in rank_by_measure(scores, k)? {
            rows.entry(entry.asset_code).or_default().push(entry.level);
        }
    }
    let mut rows: Vec<ImportanceRow> = rows
        .into_iter()
        .map(|(asset_code, levels)| ImportanceRow {
            frequency: levels.len(),
            asset_code,
            levels,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.frequency
            .cmp(&a.frequency)
            .then_with(|| a.levels.iter().min().cmp(&b.levels.iter().min()))
            .then_with(|| a.asset_code.cmp(&b.asset_code))
    });
    Ok(ImportanceTable { k, rows })
}

/// The `m` least central assets, worst first, by the sum of their rank
/// positions across the four measures. Ties go to the smaller code.
pub fn least_central(all: &[CentralityScores], m: usize) -> Result<Vec<String>, RankingError> {
    let ordered = ordered_measures(all)?;
    let assets = &ordered[0].assets;
    let n = assets.len();
    if m == 0 || m > n {
        return Err(RankingError::BadM { m, n });
    }
    let mut rank_sum = vec![0usize; n];
    for scores in ordered {
        for (pos, i) in order_desc(scores).into_iter().enumerate() {
            rank_sum[i] += pos + 1;
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| rank_sum[b].cmp(&rank_sum[a]).then_with(|| assets[a].cmp(&assets[b])));
    Ok(idx.into_iter().take(m).map(|i| assets[i].clone()).collect())
}
