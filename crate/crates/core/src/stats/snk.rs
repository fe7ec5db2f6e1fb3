use std::collections::HashMap;

use super::glm::{FactorKind, GlmFit};
use super::ptukey::{studentized_range_quantile, Df};
use super::StatsError;

#[derive(Debug, Clone, PartialEq)]
pub struct SnkEntry {
    pub name: String,
    pub mean: f64,
    pub letters: String,
}

/// Factor levels sorted by adjusted mean, descending, with their letter groups.
#[derive(Debug, Clone, PartialEq)]
pub struct SnkGrouping {
    pub factor: FactorKind,
    pub alpha: f64,
    pub entries: Vec<SnkEntry>,
}

/// Memoized studentized range quantiles keyed by (range size, df).
#[derive(Debug, Default)]
pub struct QuantileCache {
    values: HashMap<(usize, usize, u64), f64>,
}

impl QuantileCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, alpha: f64, k: usize, df: usize) -> Result<f64, StatsError> {
        let key = (k, df, alpha.to_bits());
        if let Some(&q) = self.values.get(&key) {
            return Ok(q);
        }
        let q = studentized_range_quantile(alpha, k, Df::from(df))?;
        self.values.insert(key, q);
        Ok(q)
    }
}

/// `a, b, …, z, aa, ab, …`
fn letter(mut i: usize) -> String {
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap()
}

/// Student–Newman–Keuls grouping of one factor's adjusted means.
///
/// Ranges of `p` consecutive sorted means are tested from the widest down
/// against `q(alpha, p, df_r) · sqrt(V̂/ñ)` with `ñ` the harmonic mean of the
/// level counts; a range inside a non-significant one is not tested. Each
/// maximal non-significant range receives one letter.
pub fn snk_compare(fit: &GlmFit, factor: FactorKind, alpha: f64, cache: &mut QuantileCache) -> Result<SnkGrouping, StatsError> {
    let f = fit.factor(factor).ok_or(StatsError::MissingFactor { factor: factor.name() })?;
    let k = f.adjusted_means.len();
    if k < 2 {
        return Err(StatsError::SingleLevel { factor: factor.name() });
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        f.adjusted_means[b]
            .partial_cmp(&f.adjusted_means[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let means: Vec<f64> = order.iter().map(|&i| f.adjusted_means[i]).collect();

    let n_tilde = k as f64 / f.counts.iter().map(|&c| 1.0 / c as f64).sum::<f64>();
    let se = (fit.residual_variance / n_tilde).sqrt();
    let mut critical = |p: usize| -> Result<f64, StatsError> {
        if fit.residual_variance == 0.0 {
            Ok(0.0)
        } else {
            Ok(cache.get(alpha, p, fit.df_resid)? * se)
        }
    };

    // homogeneous[i] = largest j such that i..=j is declared non-significant
    let mut homogeneous: Vec<usize> = (0..k).collect();
    for p in (2..=k).rev() {
        for i in 0..=k - p {
            let j = i + p - 1;
            // inside a range already declared non-significant
            if (0..=i).any(|a| homogeneous[a] >= j) {
                continue;
            }
            let tie = 1e-12 * means[i].abs().max(means[j].abs()).max(1.0);
            if means[i] - means[j] <= critical(p)?.max(tie) {
                homogeneous[i] = j;
            }
        }
    }

    let mut letters = vec![String::new(); k];
    let mut next = 0;
    let mut reach = None;
    for i in 0..k {
        let j = homogeneous[i];
        if reach.is_some_and(|r| j <= r) {
            continue;
        }
        let l = letter(next);
        next += 1;
        for s in &mut letters[i..=j] {
            s.push_str(&l);
        }
        reach = Some(j);
    }

    Ok(SnkGrouping {
        factor,
        alpha,
        entries: order
            .iter()
            .zip(&means)
            .zip(letters)
            .map(|((&i, &mean), letters)| SnkEntry {
                name: f.names[i].clone(),
                mean,
                letters,
            })
            .collect(),
    })
}
