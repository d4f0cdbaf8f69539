//! RV-coefficient networks of bivariate (bid, ask) price series.
//!
//! The pipeline turns aligned daily quotes into bivariate log returns,
//! measures pairwise similarity with Escoufier's RV coefficient, filters the
//! resulting distance network down to its minimum spanning tree and ranks
//! nodes by degree, closeness, betweenness and eigenvector centrality.
//!
//! ```
//! use rvnet::pipeline::{analyze, generate_fixture, PipelineConfig};
//!
//! let csv = generate_fixture(7, 12, 120).unwrap();
//! let bundle = analyze(csv.as_bytes(), &PipelineConfig::new("fixture.csv", "out")).unwrap();
//! assert_eq!(bundle.tree().edges().len(), 11);
//! ```

pub mod centrality;
pub mod export;
pub mod ingest;
pub mod mst;
pub mod pipeline;
pub mod ranking;
pub mod returns;
pub mod rvcorr;

mod numfmt;
