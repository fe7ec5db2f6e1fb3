use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::corpus::{NodeId, TermId, Vocabulary};
use crate::labeling::{Label, LabelAssignment, MethodId};
use crate::queryeval::{MetricsRow, QueryKind, RetrievalMetrics};

/// `%g` with 6 significant digits.
pub fn fmt_g6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let fixed = format!("{:.*}", (5 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_err(file: &str) -> impl Fn(csv::Error) -> PipelineError + '_ {
    move |e| PipelineError::Input(format!("{file}: {e}"))
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRecord {
    method: String,
    node_id: NodeId,
    rank: usize,
    term_id: TermId,
    term_surface: String,
    score: String,
}

pub fn write_labels<W: Write>(w: W, assignments: &[LabelAssignment], vocab: &Vocabulary) -> Result<(), PipelineError> {
    let mut out = csv::Writer::from_writer(w);
    let err = csv_err("labels.csv");
    for a in assignments {
        for (node, labels) in a.iter() {
            for (rank, l) in labels.iter().enumerate() {
                out.serialize(LabelRecord {
                    method: a.method.name().to_string(),
                    node_id: node,
                    rank: rank + 1,
                    term_id: l.term,
                    term_surface: vocab.surface(l.term).to_string(),
                    score: fmt_g6(l.score),
                })
                .map_err(&err)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads label assignments for `methods` over `n_nodes` nodes; rows of other
/// methods are skipped. A method without rows has only empty labels.
pub fn read_labels<R: Read>(
    r: R,
    methods: &[MethodId],
    n_nodes: usize,
    n_terms: usize,
    p_cap: usize,
) -> Result<Vec<LabelAssignment>, PipelineError> {
    let mut rdr = csv::Reader::from_reader(r);
    let err = csv_err("labels.csv");
    let mut per: Vec<Vec<Vec<(usize, Label)>>> = vec![vec![Vec::new(); n_nodes]; methods.len()];
    for rec in rdr.deserialize::<LabelRecord>() {
        let rec = rec.map_err(&err)?;
        let method: MethodId = rec
            .method
            .parse()
            .map_err(|_| PipelineError::Input(format!("labels.csv: unknown method {:?}", rec.method)))?;
        let Some(mi) = methods.iter().position(|&m| m == method) else { continue };
        if rec.node_id >= n_nodes {
            return Err(PipelineError::Input(format!("labels.csv: node {} not in hierarchy", rec.node_id)));
        }
        if rec.term_id as usize >= n_terms {
            return Err(PipelineError::Input(format!("labels.csv: term {} out of range", rec.term_id)));
        }
        let score: f64 = rec
            .score
            .parse()
            .map_err(|_| PipelineError::Input(format!("labels.csv: bad score {:?}", rec.score)))?;
        per[mi][rec.node_id].push((rec.rank, Label { term: rec.term_id, score }));
    }
    Ok(methods
        .iter()
        .zip(per)
        .map(|(&m, nodes)| {
            let labels = nodes
                .into_iter()
                .map(|mut v| {
                    v.sort_by_key(|x| x.0);
                    v.into_iter().map(|x| x.1).collect()
                })
                .collect();
            LabelAssignment::new(m, p_cap, labels)
        })
        .collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct MetricsRecord {
    method: String,
    node_id: NodeId,
    level: u32,
    kind: String,
    precision: String,
    recall: String,
    f: String,
}

pub fn write_metrics<W: Write>(w: W, rows: &[MetricsRow]) -> Result<(), PipelineError> {
    let mut out = csv::Writer::from_writer(w);
    let err = csv_err("metrics.csv");
    for r in rows {
        out.serialize(MetricsRecord {
            method: r.method.name().to_string(),
            node_id: r.node,
            level: r.level,
            kind: r.kind.name().to_string(),
            precision: fmt_g6(r.metrics.precision),
            recall: fmt_g6(r.metrics.recall),
            f: fmt_g6(r.metrics.f),
        })
        .map_err(&err)?;
    }
    out.flush()?;
    Ok(())
}

/// Metrics as written: only the three measures survive, counts are zero.
pub fn read_metrics<R: Read>(r: R, methods: &[MethodId]) -> Result<Vec<MetricsRow>, PipelineError> {
    let mut rdr = csv::Reader::from_reader(r);
    let err = csv_err("metrics.csv");
    let bad = |what: &str, v: &str| PipelineError::Input(format!("metrics.csv: bad {what} {v:?}"));
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<MetricsRecord>() {
        let rec = rec.map_err(&err)?;
        let method: MethodId = rec.method.parse().map_err(|_| bad("method", &rec.method))?;
        if !methods.contains(&method) {
            continue;
        }
        let kind: QueryKind = rec.kind.parse().map_err(|_| bad("kind", &rec.kind))?;
        let num = |v: &str, what: &str| v.parse::<f64>().map_err(|_| bad(what, v));
        rows.push(MetricsRow {
            method,
            node: rec.node_id,
            level: rec.level,
            kind,
            metrics: RetrievalMetrics {
                tp: 0,
                fp: 0,
                fn_: 0,
                tn: 0,
                precision: num(&rec.precision, "precision")?,
                recall: num(&rec.recall, "recall")?,
                f: num(&rec.f, "f")?,
            },
        });
    }
    Ok(rows)
}
