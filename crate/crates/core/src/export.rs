//! Serialization of a finished run: DOT and GraphML trees, CSV tables and a
//! JSON report. Every exporter is a pure function of the [`ReportBundle`].

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::centrality::{CentralityReport, Measure};
use crate::mst::SpanningTree;
use crate::numfmt;
use crate::ranking::ImportanceTable;
use crate::rvcorr::SimilarityMatrix;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExportError {
    #[error("inconsistent report bundle: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelSummary {
    pub n_assets: usize,
    pub n_dates: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
}

/// Run parameters echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub input: String,
    pub missing_policy: String,
    pub top_k: usize,
    pub least_m: usize,
    pub formats: Vec<String>,
    pub eig_tol: f64,
    pub eig_max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    summary: PanelSummary,
    similarity: SimilarityMatrix,
    tree: SpanningTree,
    centrality: CentralityReport,
    importance: ImportanceTable,
    least_central: Vec<String>,
    config: ConfigEcho,
}

impl ReportBundle {
    pub fn new(
        summary: PanelSummary,
        similarity: SimilarityMatrix,
        tree: SpanningTree,
        centrality: CentralityReport,
        importance: ImportanceTable,
        least_central: Vec<String>,
        config: ConfigEcho,
    ) -> Result<Self, ExportError> {
        let assets = similarity.assets();
        if tree.assets() != assets {
            return Err(ExportError::Inconsistent("tree and similarity node sets differ".into()));
        }
        if summary.n_assets != assets.len() {
            return Err(ExportError::Inconsistent("summary asset count differs".into()));
        }
        for s in &centrality.scores {
            if s.assets != assets {
                return Err(ExportError::Inconsistent(format!("{} scores cover other nodes", s.measure)));
            }
        }
        let known = |c: &String| assets.contains(c);
        if !importance.rows.iter().all(|r| known(&r.asset_code)) || !least_central.iter().all(known) {
            return Err(ExportError::Inconsistent("ranking names an unknown asset".into()));
        }
        Ok(ReportBundle {
            summary,
            similarity,
            tree,
            centrality,
            importance,
            least_central,
            config,
        })
    }

    pub fn summary(&self) -> &PanelSummary {
        &self.summary
    }

    pub fn similarity(&self) -> &SimilarityMatrix {
        &self.similarity
    }

    pub fn tree(&self) -> &SpanningTree {
        &self.tree
    }

    pub fn centrality(&self) -> &CentralityReport {
        &self.centrality
    }

    pub fn importance(&self) -> &ImportanceTable {
        &self.importance
    }

    pub fn least_central(&self) -> &[String] {
        &self.least_central
    }

    pub fn config(&self) -> &ConfigEcho {
        &self.config
    }

    fn score(&self, measure: Measure, node: usize) -> f64 {
        self.centrality.get(measure).values[node]
    }
}

fn attr_name(measure: Measure) -> String {
    format!("{}_c", measure.name())
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Undirected DOT graph. Node attributes carry the four scores, edge
/// attributes the RV coefficient and distance, all to 6 decimals.
pub fn export_dot(bundle: &ReportBundle) -> String {
    let tree = bundle.tree();
    let mut out = String::from("graph mst {\n");
    for (i, code) in tree.assets().iter().enumerate() {
        let attrs: Vec<String> = Measure::ALL
            .iter()
            .map(|m| format!("{}={}", attr_name(*m), numfmt::fixed(bundle.score(*m, i), 6)))
            .collect();
        let _ = writeln!(out, "  {} [{}];", dot_quote(code), attrs.join(", "));
    }
    for e in tree.edges() {
        let _ = writeln!(
            out,
            "  {} -- {} [rv={}, dist={}];",
            dot_quote(&tree.assets()[e.a]),
            dot_quote(&tree.assets()[e.b]),
            numfmt::fixed(e.rv, 6),
            numfmt::fixed(e.distance, 6)
        );
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// GraphML 1.0 document with double-typed keys for the four scores and for
/// edge `rv` and `dist`. Values carry 15 significant digits.
pub fn export_graphml(bundle: &ReportBundle) -> String {
    let tree = bundle.tree();
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns \
         http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n",
    );
    for m in Measure::ALL {
        let id = attr_name(m);
        let _ = writeln!(out, "  <key id=\"{id}\" for=\"node\" attr.name=\"{id}\" attr.type=\"double\"/>");
    }
    for id in ["rv", "dist"] {
        let _ = writeln!(out, "  <key id=\"{id}\" for=\"edge\" attr.name=\"{id}\" attr.type=\"double\"/>");
    }
    out.push_str("  <graph id=\"mst\" edgedefault=\"undirected\">\n");
    for (i, code) in tree.assets().iter().enumerate() {
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(code));
        for m in Measure::ALL {
            let _ = writeln!(
                out,
                "      <data key=\"{}\">{}</data>",
                attr_name(m),
                numfmt::significant(bundle.score(m, i), 15)
            );
        }
        out.push_str("    </node>\n");
    }
    for (k, e) in tree.edges().iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\">",
            xml_escape(&tree.assets()[e.a]),
            xml_escape(&tree.assets()[e.b])
        );
        let _ = writeln!(out, "      <data key=\"rv\">{}</data>", numfmt::significant(e.rv, 15));
        let _ = writeln!(out, "      <data key=\"dist\">{}</data>", numfmt::significant(e.distance, 15));
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// The three tabular outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tables {
    pub centrality: String,
    pub importance: String,
    pub least_central: String,
}

impl Tables {
    pub const CENTRALITY_FILE: &'static str = "centrality.csv";
    pub const IMPORTANCE_FILE: &'static str = "importance.csv";
    pub const LEAST_CENTRAL_FILE: &'static str = "least_central.csv";

    pub fn files(&self) -> [(&'static str, &str); 3] {
        [
            (Self::CENTRALITY_FILE, &self.centrality),
            (Self::IMPORTANCE_FILE, &self.importance),
            (Self::LEAST_CENTRAL_FILE, &self.least_central),
        ]
    }
}

fn write_csv<I, R>(rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("UTF-8 input")
}

/// `centrality.csv` (3-decimal and 15-digit columns), `importance.csv` and
/// `least_central.csv`.
pub fn export_tables(bundle: &ReportBundle) -> Tables {
    let assets = bundle.tree().assets();

    let mut header = vec!["code".to_string()];
    header.extend(Measure::ALL.iter().map(|m| m.name().to_string()));
    header.extend(Measure::ALL.iter().map(|m| format!("{}_full", m.name())));
    let body = assets.iter().enumerate().map(|(i, code)| {
        let mut row = vec![code.clone()];
        row.extend(Measure::ALL.iter().map(|m| numfmt::fixed(bundle.score(*m, i), 3)));
        row.extend(Measure::ALL.iter().map(|m| numfmt::significant(bundle.score(*m, i), 15)));
        row
    });
    let centrality = write_csv(std::iter::once(header).chain(body));

    let importance = write_csv(
        std::iter::once(vec!["code".to_string(), "frequency".into(), "levels".into()]).chain(
            bundle
                .importance()
                .rows
                .iter()
                .map(|r| vec![r.asset_code.clone(), r.frequency.to_string(), r.levels_string()]),
        ),
    );

    let least_central = write_csv(
        std::iter::once(vec!["code".to_string()])
            .chain(bundle.least_central().iter().map(|c| vec![c.clone()])),
    );

    Tables {
        centrality,
        importance,
        least_central,
    }
}

/// Single JSON document with sorted keys and full-precision numbers.
pub fn emit_json_report(bundle: &ReportBundle) -> String {
    let tree = bundle.tree();
    let assets = tree.assets();
    let nodes: Vec<Value> = assets
        .iter()
        .enumerate()
        .map(|(i, code)| {
            let mut node = serde_json::Map::new();
            node.insert("code".into(), json!(code));
            for m in Measure::ALL {
                node.insert(m.name().into(), json!(bundle.score(m, i)));
            }
            Value::Object(node)
        })
        .collect();
    let edges: Vec<Value> = tree
        .edges()
        .iter()
        .map(|e| {
            json!({
                "a": e.a,
                "b": e.b,
                "a_code": assets[e.a],
                "b_code": assets[e.b],
                "rv": e.rv,
                "dist": e.distance,
            })
        })
        .collect();
    let importance: Vec<Value> = bundle
        .importance()
        .rows
        .iter()
        .map(|r| json!({"code": r.asset_code, "frequency": r.frequency, "levels": r.levels}))
        .collect();
    let eig = bundle.centrality().eigen;
    let summary = bundle.summary();
    let doc = json!({
        "meta": {
            "n_assets": summary.n_assets,
            "n_dates": summary.n_dates,
            "first_date": summary.first_date,
            "last_date": summary.last_date,
            "config": bundle.config(),
            "tool_version": TOOL_VERSION,
        },
        "nodes": nodes,
        "edges": edges,
        "importance": importance,
        "least_central": bundle.least_central(),
        "eigen_report": {
            "lambda_max": eig.lambda_max,
            "iterations": eig.iterations,
            "residual": eig.residual,
        },
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}
