use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::coherence::OcAggregate;
use crate::labeling::{Chi2Shape, LabelConfig, MethodId, RclFp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DfFilter {
    pub low: f64,
    pub high: f64,
}

/// Run configuration. Relative paths are resolved against the directory of
/// the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub matrix: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocabulary: Option<PathBuf>,
    pub hierarchy: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_corpus: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_p_cap")]
    pub p_cap: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodId>,
    #[serde(default)]
    pub chi2_shape: Chi2Shape,
    #[serde(default)]
    pub rcl_fp: RclFp,
    #[serde(default)]
    pub oc_aggregate: OcAggregate,
    #[serde(default = "default_big_threshold")]
    pub big_threshold: u64,
    #[serde(default)]
    pub npmi_epsilon: f64,
    #[serde(default = "default_true")]
    pub popescul_leaves: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df_filter: Option<DfFilter>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_p_cap() -> usize {
    10
}
fn default_alpha() -> f64 {
    0.05
}
fn default_methods() -> Vec<MethodId> {
    MethodId::ALL.to_vec()
}
fn default_big_threshold() -> u64 {
    5
}
fn default_true() -> bool {
    true
}

impl RunConfig {
    /// A config with defaults for everything but the required inputs.
    pub fn new(matrix: impl Into<PathBuf>, hierarchy: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            matrix: matrix.into(),
            vocabulary: None,
            hierarchy: hierarchy.into(),
            reference_corpus: None,
            output_dir: output_dir.into(),
            p_cap: default_p_cap(),
            alpha: default_alpha(),
            methods: default_methods(),
            chi2_shape: Chi2Shape::default(),
            rcl_fp: RclFp::default(),
            oc_aggregate: OcAggregate::default(),
            big_threshold: default_big_threshold(),
            npmi_epsilon: 0.0,
            popescul_leaves: true,
            df_filter: None,
        }
    }

    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.matrix);
        fix(&mut self.hierarchy);
        fix(&mut self.output_dir);
        if let Some(p) = &mut self.vocabulary {
            fix(p);
        }
        if let Some(p) = &mut self.reference_corpus {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::Config(msg));
        if self.p_cap < 1 {
            return bad("p_cap must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.methods.is_empty() {
            return bad("method list is empty".into());
        }
        let mut seen = self.methods.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return bad("method list has duplicates".into());
        }
        if !(self.npmi_epsilon >= 0.0 && self.npmi_epsilon.is_finite()) {
            return bad(format!("npmi_epsilon must be a finite non-negative number, got {}", self.npmi_epsilon));
        }
        if let Some(f) = self.df_filter {
            if !(f.low >= 0.0 && f.low < f.high && f.high <= 1.0) {
                return bad(format!("df_filter bounds must satisfy 0 <= low < high <= 1, got {} {}", f.low, f.high));
            }
        }
        Ok(())
    }

    pub fn label_config(&self) -> LabelConfig {
        LabelConfig {
            p_cap: self.p_cap,
            alpha: self.alpha,
            chi2_shape: self.chi2_shape,
            rcl_fp: self.rcl_fp,
            big_threshold: self.big_threshold,
            popescul_leaves: self.popescul_leaves,
        }
    }

    /// Methods in canonical order.
    pub fn sorted_methods(&self) -> Vec<MethodId> {
        let mut m = self.methods.clone();
        m.sort_unstable();
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = RunConfig::from_json(r#"{"matrix": "m.txt", "hierarchy": "/abs/h.json"}"#, Path::new("/base")).unwrap();
        assert_eq!(cfg.matrix, PathBuf::from("/base/m.txt"));
        assert_eq!(cfg.hierarchy, PathBuf::from("/abs/h.json"));
        assert_eq!(cfg.output_dir, PathBuf::from("/base/out"));
        assert_eq!(cfg.p_cap, 10);
        assert_eq!(cfg.alpha, 0.05);
        assert_eq!(cfg.methods.len(), 16);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let parse = |s: &str| RunConfig::from_json(s, Path::new("."));
        assert!(parse(r#"{"matrix": "m", "hierarchy": "h", "methods": ["nope"]}"#).is_err());
        assert!(parse(r#"{"matrix": "m", "hierarchy": "h", "bogus": 1}"#).is_err());
        let mut cfg = parse(r#"{"matrix": "m", "hierarchy": "h", "p_cap": 0}"#).unwrap();
        assert!(cfg.validate().is_err());
        cfg.p_cap = 3;
        cfg.alpha = 1.0;
        assert!(cfg.validate().is_err());
        cfg.alpha = 0.01;
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
    }
}
