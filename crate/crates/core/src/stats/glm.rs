use nalgebra::{DMatrix, DVector};

use super::StatsError;
use crate::labeling::MethodId;
use crate::queryeval::ObservationRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    Level,
    Method,
}

impl FactorKind {
    pub fn name(self) -> &'static str {
        match self {
            FactorKind::Level => "level",
            FactorKind::Method => "method",
        }
    }
}

/// One categorical factor: a level index per observation.
#[derive(Debug, Clone)]
pub struct FactorSpec {
    pub kind: FactorKind,
    pub names: Vec<String>,
    pub codes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorFit {
    pub kind: FactorKind,
    pub names: Vec<String>,
    /// Sum-to-zero effects, one per level.
    pub effects: Vec<f64>,
    /// Least-squares means `μ̂ + effect`.
    pub adjusted_means: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmFit {
    pub grand_mean: f64,
    pub factors: Vec<FactorFit>,
    pub rss: f64,
    /// `RSS / df_r`; 0 for a saturated fit.
    pub residual_variance: f64,
    pub df_resid: usize,
    pub n_obs: usize,
}

impl GlmFit {
    pub fn factor(&self, kind: FactorKind) -> Option<&FactorFit> {
        self.factors.iter().find(|f| f.kind == kind)
    }
}

/// Least-squares fit of `y ~ μ + Σ factors` with sum-to-zero coding. A factor
/// with a single level contributes no column and a zero effect.
pub fn fit_additive(y: &[f64], factors: &[FactorSpec]) -> Result<GlmFit, StatsError> {
    let n = y.len();
    if n == 0 {
        return Err(StatsError::NoObservations);
    }
    let mut counts = Vec::with_capacity(factors.len());
    let mut offsets = Vec::with_capacity(factors.len());
    let mut p = 1;
    for f in factors {
        assert_eq!(f.codes.len(), n, "factor {} has a code per observation", f.kind.name());
        let mut c = vec![0usize; f.names.len()];
        for &code in &f.codes {
            c[code] += 1;
        }
        if let Some(empty) = c.iter().position(|&k| k == 0) {
            return Err(StatsError::EmptyLevel {
                factor: f.kind.name(),
                level: f.names[empty].clone(),
            });
        }
        offsets.push(p);
        p += f.names.len() - 1;
        counts.push(c);
    }
    if n < p {
        return Err(StatsError::RankDeficient { n_obs: n, n_params: p });
    }

    let row = |i: usize, x: &mut Vec<f64>| {
        x.clear();
        x.resize(p, 0.0);
        x[0] = 1.0;
        for (f, &off) in factors.iter().zip(&offsets) {
            let last = f.names.len() - 1;
            let code = f.codes[i];
            if code < last {
                x[off + code] = 1.0;
            } else {
                x[off..off + last].iter_mut().for_each(|v| *v = -1.0);
            }
        }
    };

    let mut xtx = DMatrix::<f64>::zeros(p, p);
    let mut xty = DVector::<f64>::zeros(p);
    let mut x = Vec::with_capacity(p);
    for (i, &yi) in y.iter().enumerate() {
        row(i, &mut x);
        for a in 0..p {
            if x[a] == 0.0 {
                continue;
            }
            xty[a] += x[a] * yi;
            for b in a..p {
                xtx[(a, b)] += x[a] * x[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[(a, b)] = xtx[(b, a)];
        }
    }
    let beta = xtx
        .cholesky()
        .ok_or(StatsError::RankDeficient { n_obs: n, n_params: p })?
        .solve(&xty);

    let mut rss = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        row(i, &mut x);
        let fitted: f64 = x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
        rss += (yi - fitted).powi(2);
    }
    // rounding residue of an exact fit
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if rss <= n as f64 * (64.0 * f64::EPSILON * scale).powi(2) {
        rss = 0.0;
    }
    let df_resid = n - p;
    let grand_mean = beta[0];

    let factors = factors
        .iter()
        .zip(&offsets)
        .zip(counts)
        .map(|((f, &off), counts)| {
            let last = f.names.len() - 1;
            let mut effects: Vec<f64> = (0..last).map(|j| beta[off + j]).collect();
            effects.push(-effects.iter().sum::<f64>());
            FactorFit {
                kind: f.kind,
                names: f.names.clone(),
                adjusted_means: effects.iter().map(|e| grand_mean + e).collect(),
                effects,
                counts,
            }
        })
        .collect();

    Ok(GlmFit {
        grand_mean,
        factors,
        rss,
        residual_variance: if df_resid > 0 { rss / df_resid as f64 } else { 0.0 },
        df_resid,
        n_obs: n,
    })
}

fn level_factor(rows: &[ObservationRow]) -> FactorSpec {
    let mut levels: Vec<u32> = rows.iter().map(|r| r.level).collect();
    levels.sort_unstable();
    levels.dedup();
    FactorSpec {
        kind: FactorKind::Level,
        names: levels.iter().map(u32::to_string).collect(),
        codes: rows.iter().map(|r| levels.binary_search(&r.level).unwrap()).collect(),
    }
}

fn method_factor(rows: &[ObservationRow]) -> FactorSpec {
    let mut methods: Vec<MethodId> = rows.iter().map(|r| r.method).collect();
    methods.sort_unstable();
    methods.dedup();
    FactorSpec {
        kind: FactorKind::Method,
        names: methods.iter().map(|m| m.name().to_string()).collect(),
        codes: rows.iter().map(|r| methods.binary_search(&r.method).unwrap()).collect(),
    }
}

/// `m ~ μ + h + l` over observations of a single measure and query kind.
/// Levels of both factors are those present in `rows`.
pub fn fit_additive_model(rows: &[ObservationRow]) -> Result<GlmFit, StatsError> {
    let y: Vec<f64> = rows.iter().map(|r| r.value).collect();
    fit_additive(&y, &[level_factor(rows), method_factor(rows)])
}

/// `m ~ μ + h` over one method's observations.
pub fn fit_level_model(rows: &[ObservationRow]) -> Result<GlmFit, StatsError> {
    let level = level_factor(rows);
    if level.names.len() < 2 {
        return Err(StatsError::SingleLevel { factor: "level" });
    }
    let y: Vec<f64> = rows.iter().map(|r| r.value).collect();
    fit_additive(&y, &[level])
}
