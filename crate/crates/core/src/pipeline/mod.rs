//! Benchmark driver: label, evaluate, fit statistics and score coherence,
//! writing CSV reports.
//!
//! Each stage reads the previous stage's CSVs, writes into a staging
//! directory inside the output directory and moves its files into place only
//! when it succeeds.

mod config;
mod report;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::TempDir;
use thiserror::Error;

use crate::coherence::{count_cooccurrence_among, score_assignments, CoherenceOptions, ReferenceDocs};
use crate::corpus::{salton_df_filter, CorpusError, DocTermMatrix, Hierarchy, NodeTermStats, TermId, Vocabulary};
use crate::labeling::{label, LabelAssignment, LabelError, MethodId};
use crate::queryeval::{evaluate_all, observations, InvertedIndex, Measure, MetricsRow, NodeQueries, ObservationRow, QueryKind};
use crate::stats::{fit_additive_model, fit_level_model, snk_compare, FactorKind, GlmFit, QuantileCache, SnkGrouping, StatsError};

pub use config::{DfFilter, RunConfig};
pub use report::{fmt_g6, read_labels, read_metrics, write_labels, write_metrics};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl PipelineError {
    /// 2 config, 3 input validation or I/O, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Input(_) => 3,
            PipelineError::Numerical(_) => 4,
        }
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Input(format!("i/o: {e}"))
    }
}

impl From<CorpusError> for PipelineError {
    fn from(e: CorpusError) -> Self {
        PipelineError::Input(format!("corpus: {e}"))
    }
}

impl From<LabelError> for PipelineError {
    fn from(e: LabelError) -> Self {
        match e {
            LabelError::UnknownMethod(_) => PipelineError::Config(format!("labeling: {e}")),
            _ => PipelineError::Numerical(format!("labeling: {e}")),
        }
    }
}

impl From<StatsError> for PipelineError {
    fn from(e: StatsError) -> Self {
        PipelineError::Numerical(format!("stats: {e}"))
    }
}

impl From<crate::coherence::CoherenceError> for PipelineError {
    fn from(e: crate::coherence::CoherenceError) -> Self {
        PipelineError::Input(format!("coherence: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Label,
    Evaluate,
    Stats,
    Coherence,
    All,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            Stage::Label => "label",
            Stage::Evaluate => "evaluate",
            Stage::Stats => "stats",
            Stage::Coherence => "coherence",
            Stage::All => "all",
        }
    }
}

pub const LABELS_CSV: &str = "labels.csv";
pub const METRICS_CSV: &str = "metrics.csv";
pub const QUERIES_TXT: &str = "queries.txt";
pub const COHERENCE_CSV: &str = "coherence.csv";
pub const COHERENCE_SUMMARY_CSV: &str = "coherence_summary.csv";
pub const MANIFEST_JSON: &str = "manifest.json";

/// Loaded and validated inputs, after the optional document-frequency filter.
pub struct Inputs {
    pub matrix: DocTermMatrix,
    pub vocabulary: Vocabulary,
    pub hierarchy: Hierarchy,
    pub stats: NodeTermStats,
    checksums: BTreeMap<String, InputRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InputRecord {
    path: PathBuf,
    sha256: String,
}

fn sha256_file(path: &Path) -> Result<String, PipelineError> {
    let mut f = File::open(path).map_err(|e| PipelineError::Input(format!("cannot open {}: {e}", path.display())))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs, PipelineError> {
    let mut checksums = BTreeMap::new();
    let mut record = |name: &str, path: &Path| -> Result<(), PipelineError> {
        checksums.insert(
            name.to_string(),
            InputRecord {
                path: path.to_path_buf(),
                sha256: sha256_file(path)?,
            },
        );
        Ok(())
    };
    record("matrix", &cfg.matrix)?;
    record("hierarchy", &cfg.hierarchy)?;
    if let Some(v) = &cfg.vocabulary {
        record("vocabulary", v)?;
    }
    if let Some(r) = &cfg.reference_corpus {
        record("reference_corpus", r)?;
    }

    let mut matrix = DocTermMatrix::load(&cfg.matrix)?;
    let mut vocabulary = match &cfg.vocabulary {
        Some(p) => Vocabulary::load(p)?,
        None => Vocabulary::synthetic(matrix.n_terms()),
    };
    if vocabulary.len() != matrix.n_terms() {
        return Err(CorpusError::VocabularySizeMismatch {
            vocab: vocabulary.len(),
            matrix: matrix.n_terms(),
        }
        .into());
    }
    let hierarchy = Hierarchy::load(&cfg.hierarchy, matrix.n_docs())?;
    if let Some(f) = cfg.df_filter {
        let (filtered, remap) = salton_df_filter(&matrix, f.low, f.high)?;
        vocabulary = vocabulary.select(&remap.kept);
        matrix = filtered;
    }
    let stats = NodeTermStats::build(&matrix, &hierarchy);
    Ok(Inputs {
        matrix,
        vocabulary,
        hierarchy,
        stats,
        checksums,
    })
}

/// Output directory plus a private staging directory inside it.
struct Staging {
    out: PathBuf,
    dir: TempDir,
    written: Vec<String>,
}

impl Staging {
    fn new(out: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(out).map_err(|e| PipelineError::Input(format!("cannot create {}: {e}", out.display())))?;
        let dir = tempfile::Builder::new().prefix(".staging-").tempdir_in(out)?;
        Ok(Self {
            out: out.to_path_buf(),
            dir,
            written: Vec::new(),
        })
    }

    /// A file written earlier in this run, else the committed one.
    fn open(&self, name: &str) -> Result<BufReader<File>, PipelineError> {
        let staged = self.dir.path().join(name);
        let path = if staged.exists() { staged } else { self.out.join(name) };
        File::open(&path)
            .map(BufReader::new)
            .map_err(|e| PipelineError::Input(format!("cannot read {}: {e}", path.display())))
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, PipelineError> {
        let path = self.dir.path().join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(BufWriter::new(File::create(path)?))
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<(), PipelineError>) -> Result<(), PipelineError> {
        let mut w = self.create(name)?;
        f(&mut w)?;
        w.flush()?;
        Ok(())
    }

    fn commit(self) -> Result<Vec<String>, PipelineError> {
        for name in &self.written {
            let target = self.out.join(name);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            fs::rename(self.dir.path().join(name), target)?;
        }
        Ok(self.written)
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Manifest {
    config: serde_json::Value,
    inputs: BTreeMap<String, InputRecord>,
    outputs: BTreeMap<String, String>,
}

fn config_echo(cfg: &RunConfig) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config serializes");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("output_dir");
    }
    v
}

fn write_manifest(staging: &mut Staging, cfg: &RunConfig, inputs: &Inputs) -> Result<(), PipelineError> {
    let config = config_echo(cfg);
    let mut outputs = BTreeMap::new();
    // keep entries of earlier stages run with the same config and inputs
    if let Ok(text) = fs::read_to_string(staging.out.join(MANIFEST_JSON)) {
        if let Ok(prev) = serde_json::from_str::<Manifest>(&text) {
            if prev.config == config && prev.inputs == inputs.checksums {
                outputs = prev.outputs;
            }
        }
    }
    for name in staging.written.clone() {
        outputs.insert(name.clone(), sha256_file(&staging.dir.path().join(&name))?);
    }
    let manifest = Manifest {
        config,
        inputs: inputs.checksums.clone(),
        outputs,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let mut w = staging.create(MANIFEST_JSON)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary {
    pub stage: Stage,
    pub n_docs: usize,
    pub n_terms: usize,
    pub n_nodes: usize,
    /// Files moved into the output directory, relative to it.
    pub written: Vec<String>,
}

/// Runs a stage. With `dry_run` the config and inputs are validated and
/// nothing is written.
pub fn run(stage: Stage, cfg: &RunConfig, dry_run: bool) -> Result<StageSummary, PipelineError> {
    cfg.validate()?;
    let inputs = load_inputs(cfg)?;
    let mut summary = StageSummary {
        stage,
        n_docs: inputs.matrix.n_docs(),
        n_terms: inputs.matrix.n_terms(),
        n_nodes: inputs.hierarchy.len(),
        written: Vec::new(),
    };
    if dry_run || stage == Stage::Validate {
        return Ok(summary);
    }
    let mut staging = Staging::new(&cfg.output_dir)?;
    match stage {
        Stage::Label => stage_label(&mut staging, cfg, &inputs)?,
        Stage::Evaluate => stage_evaluate(&mut staging, cfg, &inputs)?,
        Stage::Stats => stage_stats(&mut staging, cfg, &inputs)?,
        Stage::Coherence => stage_coherence(&mut staging, cfg, &inputs)?,
        Stage::All => {
            stage_label(&mut staging, cfg, &inputs)?;
            stage_evaluate(&mut staging, cfg, &inputs)?;
            stage_stats(&mut staging, cfg, &inputs)?;
            stage_coherence(&mut staging, cfg, &inputs)?;
        }
        Stage::Validate => unreachable!(),
    }
    write_manifest(&mut staging, cfg, &inputs)?;
    summary.written = staging.commit()?;
    Ok(summary)
}

pub fn compute_labels(cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<LabelAssignment>, PipelineError> {
    let lc = cfg.label_config();
    cfg.sorted_methods()
        .into_iter()
        .map(|m| label(m, &inputs.stats, &inputs.hierarchy, &lc).map_err(PipelineError::from))
        .collect()
}

fn stage_label(staging: &mut Staging, cfg: &RunConfig, inputs: &Inputs) -> Result<(), PipelineError> {
    let assignments = compute_labels(cfg, inputs)?;
    staging.write(LABELS_CSV, |w| write_labels(w, &assignments, &inputs.vocabulary))
}

fn load_labels(staging: &Staging, cfg: &RunConfig, inputs: &Inputs) -> Result<Vec<LabelAssignment>, PipelineError> {
    read_labels(
        staging.open(LABELS_CSV)?,
        &cfg.sorted_methods(),
        inputs.hierarchy.len(),
        inputs.matrix.n_terms(),
        cfg.p_cap,
    )
}

fn stage_evaluate(staging: &mut Staging, cfg: &RunConfig, inputs: &Inputs) -> Result<(), PipelineError> {
    let assignments = load_labels(staging, cfg, inputs)?;
    let rows = evaluate_all(&InvertedIndex::new(&inputs.matrix), &inputs.hierarchy, &assignments);
    staging.write(METRICS_CSV, |w| write_metrics(w, &rows))?;
    staging.write(QUERIES_TXT, |w| {
        for a in &assignments {
            let q = NodeQueries::derive(&inputs.hierarchy, a);
            for node in 0..inputs.hierarchy.len() {
                for kind in QueryKind::ALL {
                    let text = q.get(kind, node).map_or_else(|| "-".to_string(), |q| q.to_string());
                    writeln!(w, "{} {node} {kind} {text}", a.method)?;
                }
            }
        }
        Ok(())
    })
}

fn snk_or_single(fit: &GlmFit, factor: FactorKind, alpha: f64, cache: &mut QuantileCache) -> Result<SnkGrouping, PipelineError> {
    let f = fit.factor(factor).expect("fitted factor");
    if f.names.len() == 1 {
        return Ok(SnkGrouping {
            factor,
            alpha,
            entries: vec![crate::stats::SnkEntry {
                name: f.names[0].clone(),
                mean: f.adjusted_means[0],
                letters: "a".into(),
            }],
        });
    }
    Ok(snk_compare(fit, factor, alpha, cache)?)
}

fn write_grouping(w: &mut impl Write, fit: &GlmFit, g: &SnkGrouping, column: &str) -> Result<(), PipelineError> {
    writeln!(
        w,
        "# df_r={}, V(E)={}, alpha={}",
        fit.df_resid,
        fmt_g6(fit.residual_variance),
        fmt_g6(g.alpha)
    )?;
    writeln!(w, "{column},adjusted_mean,letters")?;
    for e in &g.entries {
        writeln!(w, "{},{},{}", e.name, fmt_g6(e.mean), e.letters)?;
    }
    Ok(())
}

/// Per-level means of one method from the level-only model.
pub fn level_means(rows: &[ObservationRow]) -> Result<Option<Vec<(u32, f64)>>, PipelineError> {
    match fit_level_model(rows) {
        Ok(fit) => {
            let f = fit.factor(FactorKind::Level).expect("level factor");
            Ok(Some(
                f.names
                    .iter()
                    .zip(&f.adjusted_means)
                    .map(|(n, &m)| (n.parse().expect("numeric level"), m))
                    .collect(),
            ))
        }
        Err(StatsError::SingleLevel { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn stage_stats(staging: &mut Staging, cfg: &RunConfig, inputs: &Inputs) -> Result<(), PipelineError> {
    let methods = cfg.sorted_methods();
    let metrics: Vec<MetricsRow> = read_metrics(staging.open(METRICS_CSV)?, &methods)?;
    let n_expected = methods.len() * inputs.hierarchy.len() * QueryKind::ALL.len();
    if metrics.len() != n_expected {
        return Err(PipelineError::Input(format!(
            "{METRICS_CSV}: expected {n_expected} rows for the configured methods, found {}",
            metrics.len()
        )));
    }
    let obs = observations(&metrics);
    let mut cache = QuantileCache::new();

    for kind in QueryKind::ALL {
        for measure in Measure::ALL {
            let rows: Vec<ObservationRow> = obs
                .iter()
                .filter(|o| o.kind == kind && o.measure == measure)
                .copied()
                .collect();
            let fit = fit_additive_model(&rows)?;
            let by_method = snk_or_single(&fit, FactorKind::Method, cfg.alpha, &mut cache)?;
            let by_level = snk_or_single(&fit, FactorKind::Level, cfg.alpha, &mut cache)?;
            staging.write(&format!("stats_{measure}_{kind}.csv"), |w| write_grouping(w, &fit, &by_method, "method"))?;
            staging.write(&format!("stats_levels_{measure}_{kind}.csv"), |w| write_grouping(w, &fit, &by_level, "level"))?;

            let mut curves: Vec<(MethodId, Vec<(u32, f64)>)> = Vec::new();
            for &m in &methods {
                let mine: Vec<ObservationRow> = rows.iter().filter(|o| o.method == m).copied().collect();
                if let Some(curve) = level_means(&mine)? {
                    curves.push((m, curve));
                }
            }
            if curves.is_empty() {
                continue;
            }
            staging.write(&format!("level_means_{measure}_{kind}.csv"), |w| {
                writeln!(w, "method,level,mean")?;
                for (m, curve) in &curves {
                    for (level, mean) in curve {
                        writeln!(w, "{m},{level},{}", fmt_g6(*mean))?;
                    }
                }
                Ok(())
            })?;
            for (m, curve) in &curves {
                staging.write(&format!("plots/{m}_{measure}_{kind}.dat"), |w| {
                    writeln!(w, "# level mean")?;
                    for (level, mean) in curve {
                        writeln!(w, "{level} {}", fmt_g6(*mean))?;
                    }
                    Ok(())
                })?;
            }
        }
    }
    Ok(())
}

fn stage_coherence(staging: &mut Staging, cfg: &RunConfig, inputs: &Inputs) -> Result<(), PipelineError> {
    let assignments = load_labels(staging, cfg, inputs)?;
    let reference = match &cfg.reference_corpus {
        Some(path) => {
            let f = File::open(path).map_err(|e| PipelineError::Input(format!("cannot read {}: {e}", path.display())))?;
            ReferenceDocs::read_from(BufReader::new(f), &inputs.vocabulary)?
        }
        None => ReferenceDocs::from_matrix(&inputs.matrix),
    };
    let mut terms: Vec<TermId> = assignments
        .iter()
        .flat_map(|a| (0..a.n_nodes()).flat_map(move |n| a.terms(n)))
        .collect();
    terms.sort_unstable();
    terms.dedup();
    let counts = count_cooccurrence_among(&reference, &terms)?;
    let options = CoherenceOptions {
        p_cap: cfg.p_cap,
        aggregate: cfg.oc_aggregate,
        epsilon: cfg.npmi_epsilon,
    };
    let scored = score_assignments(&counts, &assignments, &options);
    staging.write(COHERENCE_CSV, |w| {
        writeln!(w, "method,node_id,oc,absent_terms")?;
        for m in &scored {
            for n in &m.nodes {
                writeln!(w, "{},{},{},{}", m.method, n.node, fmt_g6(n.oc), n.absent_terms)?;
            }
        }
        Ok(())
    })?;
    staging.write(COHERENCE_SUMMARY_CSV, |w| {
        writeln!(w, "method,upper_quartile,maximum")?;
        for m in &scored {
            writeln!(w, "{},{},{}", m.method, fmt_g6(m.upper_quartile), fmt_g6(m.maximum))?;
        }
        Ok(())
    })
}
