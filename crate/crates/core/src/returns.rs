//! Bivariate log returns: column 0 holds bid returns, column 1 ask returns.

use ndarray::Array2;
use thiserror::Error;

use crate::ingest::PricePanel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReturnsError {
    #[error("non-positive price {value} at position {index}")]
    NonPositivePrice { index: usize, value: f64 },
    #[error("series of length {0} is too short for returns (need at least 2)")]
    SeriesTooShort(usize),
    #[error("asset {asset}: {source}")]
    Asset {
        asset: String,
        #[source]
        source: Box<ReturnsError>,
    },
}

/// `(T-1) x 2` matrix of bid/ask log returns for one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnMatrix {
    pub asset_code: String,
    pub rows: Array2<f64>,
}

impl ReturnMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.nrows()
    }
}

/// `out[t] = ln(prices[t+1]) - ln(prices[t])`.
pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>, ReturnsError> {
    if prices.len() < 2 {
        return Err(ReturnsError::SeriesTooShort(prices.len()));
    }
    if let Some((index, &value)) = prices.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
        return Err(ReturnsError::NonPositivePrice { index, value });
    }
    Ok(prices.windows(2).map(|w| w[1].ln() - w[0].ln()).collect())
}

/// One return matrix per asset, in panel order.
pub fn panel_returns(panel: &PricePanel) -> Result<Vec<ReturnMatrix>, ReturnsError> {
    let t = panel.n_dates();
    let m = t.saturating_sub(1);
    panel
        .assets()
        .iter()
        .enumerate()
        .map(|(i, code)| {
            let wrap = |source| ReturnsError::Asset {
                asset: code.clone(),
                source: Box::new(source),
            };
            let bid = log_returns(&panel.bid_series(i)).map_err(wrap)?;
            let ask = log_returns(&panel.ask_series(i)).map_err(wrap)?;
            let rows = Array2::from_shape_fn((m, 2), |(r, c)| if c == 0 { bid[r] } else { ask[r] });
            Ok(ReturnMatrix {
                asset_code: code.clone(),
                rows,
            })
        })
        .collect()
}
