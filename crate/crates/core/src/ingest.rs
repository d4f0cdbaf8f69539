//! Long-format CSV ingestion of daily bid/ask quotes and alignment onto a
//! common date grid.
//!
//! Input rows look like `2008-05-05,DZD,63.10,63.30` under the header
//! `date,code,bid,ask`. Records are grouped by asset code, aligned with a
//! [`MissingPolicy`] and validated into an immutable [`PricePanel`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::Read;

use chrono::NaiveDate;
use ndarray::Array3;
use thiserror::Error;

pub const CSV_HEADER: [&str; 4] = ["date", "code", "bid", "ask"];
const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("missing or unexpected header: expected `date,code,bid,ask`, found `{found}`")]
    BadHeader { found: String },
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: non-positive price for {code} on {date}")]
    NonPositivePrice { line: u64, code: String, date: NaiveDate },
    #[error("line {line}: duplicate record for {code} on {date}")]
    DuplicateKey { line: u64, code: String, date: NaiveDate },
    #[error("insufficient overlap: {reason}")]
    InsufficientOverlap { reason: String },
    #[error("asset {0} has no quote on the first grid date; forward fill cannot seed it")]
    LeadingGap(String),
    #[error("asset {0} has a constant bid or ask series")]
    ConstantSeries(String),
    #[error("panel invariant violated: {0}")]
    PanelInvariantViolation(String),
}

impl IngestError {
    /// True for errors raised while reading the CSV text itself.
    pub fn is_parse_error(&self) -> bool {
        matches!(
            self,
            IngestError::BadHeader { .. }
                | IngestError::MalformedRow { .. }
                | IngestError::NonPositivePrice { .. }
                | IngestError::DuplicateKey { .. }
        )
    }
}

/// One quote: the (bid, ask) pair of an asset on a calendar day.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceRecord {
    pub date: NaiveDate,
    pub asset_code: String,
    pub bid: f64,
    pub ask: f64,
}

/// How gaps in individual asset histories are treated during alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MissingPolicy {
    /// Keep only dates on which every asset quotes.
    #[default]
    DropDate,
    /// Carry the last quote forward over the union date grid.
    ForwardFill,
}

impl MissingPolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            MissingPolicy::DropDate => "drop",
            MissingPolicy::ForwardFill => "ffill",
        }
    }
}

impl std::str::FromStr for MissingPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drop" => Ok(MissingPolicy::DropDate),
            "ffill" => Ok(MissingPolicy::ForwardFill),
            other => Err(format!("unknown missing policy `{other}` (expected drop|ffill)")),
        }
    }
}

/// Aligned bid/ask prices for `N` assets over `T` dates.
///
/// `values[[i, t, 0]]` is the bid and `values[[i, t, 1]]` the ask of asset
/// `i` on `dates[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    assets: Vec<String>,
    values: Array3<f64>,
}

impl PricePanel {
    /// Assembles a panel, checking only that the dimensions agree. Use
    /// [`validate_panel`] for the full invariant check.
    pub fn from_parts(
        dates: Vec<NaiveDate>,
        assets: Vec<String>,
        values: Array3<f64>,
    ) -> Result<Self, IngestError> {
        let expected = (assets.len(), dates.len(), 2);
        if values.dim() != expected {
            return Err(IngestError::PanelInvariantViolation(format!(
                "values shape {:?} does not match (assets, dates, 2) = {:?}",
                values.dim(),
                expected
            )));
        }
        Ok(PricePanel { dates, assets, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn n_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn bid_series(&self, asset: usize) -> Vec<f64> {
        self.values.slice(ndarray::s![asset, .., 0]).to_vec()
    }

    pub fn ask_series(&self, asset: usize) -> Vec<f64> {
        self.values.slice(ndarray::s![asset, .., 1]).to_vec()
    }

    /// Flattens the panel back into records, date-major then asset order.
    pub fn to_records(&self) -> Vec<PriceRecord> {
        let mut out = Vec::with_capacity(self.n_dates() * self.n_assets());
        for (t, date) in self.dates.iter().enumerate() {
            for (i, code) in self.assets.iter().enumerate() {
                out.push(PriceRecord {
                    date: *date,
                    asset_code: code.clone(),
                    bid: self.values[[i, t, 0]],
                    ask: self.values[[i, t, 1]],
                });
            }
        }
        out
    }

    /// Serializes to the input CSV format. Prices use the shortest decimal
    /// representation that parses back to the same double.
    pub fn to_csv(&self) -> String {
        records_to_csv(&self.to_records())
    }
}

pub fn records_to_csv(records: &[PriceRecord]) -> String {
    let mut out = String::from("date,code,bid,ask\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.date.format(DATE_FORMAT),
            r.asset_code,
            r.bid,
            r.ask
        );
    }
    out
}

fn valid_code(code: &str) -> bool {
    (3..=8).contains(&code.len())
        && code.starts_with(|c: char| c.is_ascii_uppercase())
        && code.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit())
}

fn parse_price(field: &str, line: u64, name: &str) -> Result<f64, IngestError> {
    let value: f64 = field.trim().parse().map_err(|_| IngestError::MalformedRow {
        line,
        reason: format!("{name} `{field}` is not a decimal number"),
    })?;
    if !value.is_finite() {
        return Err(IngestError::MalformedRow {
            line,
            reason: format!("{name} `{field}` is not finite"),
        });
    }
    Ok(value)
}

/// Parses long-format `date,code,bid,ask` CSV into records in file order.
pub fn parse_price_records<R: Read>(input: R) -> Result<Vec<PriceRecord>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let header = reader.headers().map_err(|e| IngestError::BadHeader {
        found: e.to_string(),
    })?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(IngestError::BadHeader {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut seen = HashSet::new();
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| IngestError::MalformedRow {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != 4 {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("expected 4 fields, found {}", row.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&row[0], DATE_FORMAT).map_err(|_| {
            IngestError::MalformedRow {
                line,
                reason: format!("date `{}` is not YYYY-MM-DD", &row[0]),
            }
        })?;
        let code = row[1].to_string();
        if !valid_code(&code) {
            return Err(IngestError::MalformedRow {
                line,
                reason: format!("asset code `{code}` must be 3-8 uppercase alphanumerics"),
            });
        }
        let bid = parse_price(&row[2], line, "bid")?;
        let ask = parse_price(&row[3], line, "ask")?;
        if bid <= 0.0 || ask <= 0.0 {
            return Err(IngestError::NonPositivePrice { line, code, date });
        }
        if !seen.insert((date, code.clone())) {
            return Err(IngestError::DuplicateKey { line, code, date });
        }
        records.push(PriceRecord {
            date,
            asset_code: code,
            bid,
            ask,
        });
    }
    Ok(records)
}

/// Aligns records onto a common date grid. Assets come out sorted by code.
pub fn align_panel(records: &[PriceRecord], policy: MissingPolicy) -> Result<PricePanel, IngestError> {
    let mut by_asset: BTreeMap<&str, BTreeMap<NaiveDate, (f64, f64)>> = BTreeMap::new();
    for r in records {
        let series = by_asset.entry(r.asset_code.as_str()).or_default();
        if series.insert(r.date, (r.bid, r.ask)).is_some() {
            return Err(IngestError::DuplicateKey {
                line: 0,
                code: r.asset_code.clone(),
                date: r.date,
            });
        }
    }
    if by_asset.len() < 2 {
        return Err(IngestError::InsufficientOverlap {
            reason: format!("need at least 2 assets, found {}", by_asset.len()),
        });
    }

    let grid: Vec<NaiveDate> = match policy {
        MissingPolicy::DropDate => {
            let mut series = by_asset.values();
            let first: BTreeSet<NaiveDate> = series.next().unwrap().keys().copied().collect();
            series
                .fold(first, |acc, s| acc.into_iter().filter(|d| s.contains_key(d)).collect())
                .into_iter()
                .collect()
        }
        MissingPolicy::ForwardFill => {
            let union: BTreeSet<NaiveDate> =
                by_asset.values().flat_map(|s| s.keys().copied()).collect();
            let start = *union.iter().next().unwrap();
            if let Some((code, _)) = by_asset
                .iter()
                .find(|(_, s)| s.keys().next().is_some_and(|d| *d > start))
            {
                return Err(IngestError::LeadingGap(code.to_string()));
            }
            union.into_iter().collect()
        }
    };
    if grid.len() < 3 {
        return Err(IngestError::InsufficientOverlap {
            reason: format!("{} aligned dates, need at least 3", grid.len()),
        });
    }

    let mut values = Array3::<f64>::zeros((by_asset.len(), grid.len(), 2));
    for (i, series) in by_asset.values().enumerate() {
        let mut last: Option<(f64, f64)> = None;
        for (t, date) in grid.iter().enumerate() {
            let quote = match series.get(date) {
                Some(q) => *q,
                // DropDate grids only hold dates every asset quotes, and the
                // leading-gap check guarantees a seed under ForwardFill.
                None => last.expect("forward fill without seed"),
            };
            values[[i, t, 0]] = quote.0;
            values[[i, t, 1]] = quote.1;
            last = Some(quote);
        }
    }
    let assets = by_asset.keys().map(|c| c.to_string()).collect();
    PricePanel::from_parts(grid, assets, values)
}

/// Checks every panel invariant, and rejects constant bid or ask series.
pub fn validate_panel(panel: PricePanel) -> Result<PricePanel, IngestError> {
    let invariant = |msg: String| Err(IngestError::PanelInvariantViolation(msg));
    if panel.n_dates() < 3 {
        return invariant(format!("{} dates, need at least 3", panel.n_dates()));
    }
    if panel.n_assets() < 2 {
        return invariant(format!("{} assets, need at least 2", panel.n_assets()));
    }
    if let Some(w) = panel.dates.windows(2).find(|w| w[0] >= w[1]) {
        return invariant(format!("dates not strictly increasing at {}", w[1]));
    }
    let mut codes = HashSet::new();
    for code in &panel.assets {
        if code.is_empty() {
            return invariant("empty asset code".into());
        }
        if !codes.insert(code) {
            return invariant(format!("duplicate asset code {code}"));
        }
    }
    for (i, code) in panel.assets.iter().enumerate() {
        let cells = panel.values.slice(ndarray::s![i, .., ..]);
        if let Some(v) = cells.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return invariant(format!("asset {code} has non-positive or non-finite price {v}"));
        }
        for side in 0..2 {
            let column = panel.values.slice(ndarray::s![i, .., side]);
            let first = column[0usize];
            if column.iter().all(|v| *v == first) {
                return Err(IngestError::ConstantSeries(code.clone()));
            }
        }
    }
    Ok(panel)
}
