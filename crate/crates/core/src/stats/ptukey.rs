//! Studentized range distribution by Gauss–Legendre quadrature.
//!
//! For `k` means and `ν` error degrees of freedom,
//!
//! ```text
//! P(Q ≤ q) = ∫₀^∞ f_s(s) · W(q·s) ds,   W(w) = k ∫ φ(z) [Φ(z) − Φ(z − w)]^(k−1) dz
//! ```
//!
//! where `s = χ_ν / √ν`. With `ν = ∞` the outer integral collapses to `W(q)`.

use std::sync::OnceLock;

use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use super::StatsError;

const GL_POINTS: usize = 16;
const INNER_LO: f64 = -8.5;
const INNER_HI: f64 = 8.5;
const INNER_PANELS: usize = 34;
const OUTER_PANELS: usize = 24;
/// Outer integration stops where the scale density falls this far (in log
/// units) below its mode.
const OUTER_LOG_DROP: f64 = 40.0;

fn gauss_legendre() -> &'static ([f64; GL_POINTS], [f64; GL_POINTS]) {
    static RULE: OnceLock<([f64; GL_POINTS], [f64; GL_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_POINTS;
        let mut nodes = [0.0; GL_POINTS];
        let mut weights = [0.0; GL_POINTS];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Nodes and weights of the composite rule over `[lo, hi]`.
fn composite(lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre();
    let h = (hi - lo) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let mid = lo + (p as f64 + 0.5) * h;
            nodes.iter().zip(weights).map(move |(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
        })
        .collect()
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Range distribution of `k` standard normals.
struct RangeCdf {
    k: usize,
    /// (z, weight · k · φ(z), Φ(z))
    grid: Vec<(f64, f64, f64)>,
}

impl RangeCdf {
    fn new(k: usize) -> Self {
        let grid = composite(INNER_LO, INNER_HI, INNER_PANELS)
            .into_iter()
            .map(|(z, w)| {
                let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                (z, w * k as f64 * phi, norm_cdf(z))
            })
            .collect();
        Self { k, grid }
    }

    fn eval(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let s: f64 = self
            .grid
            .iter()
            .map(|&(z, wt, cz)| wt * (cz - norm_cdf(z - w)).max(0.0).powi(self.k as i32 - 1))
            .sum();
        s.min(1.0)
    }
}

/// Integration grid for `s = χ_ν/√ν`, weights already multiplied by its density.
fn scale_grid(df: f64) -> Vec<(f64, f64)> {
    let log_norm = std::f64::consts::LN_2 + 0.5 * df * (0.5 * df).ln() - ln_gamma(0.5 * df);
    let log_density = |s: f64| log_norm + (df - 1.0) * s.ln() - 0.5 * df * s * s;
    let mode = if df > 1.0 { ((df - 1.0) / df).sqrt() } else { 0.0 };
    let peak = if df > 1.0 { log_density(mode) } else { log_norm };
    let below = |s: f64| log_density(s) < peak - OUTER_LOG_DROP;

    let bisect = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if below(mid) {
                outside = mid;
            } else {
                inside = mid;
            }
        }
        inside
    };
    let lo = if mode > 0.0 && below(f64::MIN_POSITIVE) { bisect(mode, 0.0) } else { 0.0 };
    let mut far = mode.max(1.0) * 2.0;
    while !below(far) {
        far *= 2.0;
    }
    let hi = bisect(mode, far);
    composite(lo, hi, OUTER_PANELS)
        .into_iter()
        .map(|(s, w)| (s, w * log_density(s).exp()))
        .collect()
}

/// Degrees of freedom, with `Infinite` for the known-variance limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Df {
    Finite(f64),
    Infinite,
}

impl From<usize> for Df {
    fn from(v: usize) -> Self {
        Df::Finite(v as f64)
    }
}

/// `P(Q ≤ q)` for the studentized range of `k` means with `df` degrees of freedom.
pub fn studentized_range_cdf(q: f64, k: usize, df: Df) -> f64 {
    Ptukey::new(k, df).cdf(q)
}

struct Ptukey {
    range: RangeCdf,
    scale: Option<Vec<(f64, f64)>>,
}

impl Ptukey {
    fn new(k: usize, df: Df) -> Self {
        Self {
            range: RangeCdf::new(k),
            scale: match df {
                Df::Finite(v) => Some(scale_grid(v)),
                Df::Infinite => None,
            },
        }
    }

    fn cdf(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        match &self.scale {
            None => self.range.eval(q),
            Some(grid) => grid.iter().map(|&(s, w)| w * self.range.eval(q * s)).sum::<f64>().min(1.0),
        }
    }
}

const QUANTILE_TOL: f64 = 1e-9;
const QUANTILE_MAX_ITER: usize = 200;

/// Upper-`alpha` quantile: the `q` with `P(Q ≤ q) = 1 − alpha`.
pub fn studentized_range_quantile(alpha: f64, k: usize, df: Df) -> Result<f64, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if k < 2 {
        return Err(StatsError::InvalidArgument(format!("range size must be at least 2, got {k}")));
    }
    if let Df::Finite(v) = df {
        if v.is_nan() || v < 1.0 {
            return Err(StatsError::InvalidArgument(format!("df must be at least 1, got {v}")));
        }
    }
    let dist = Ptukey::new(k, df);
    let target = 1.0 - alpha;
    let g = |q: f64| dist.cdf(q) - target;

    let (mut lo, mut glo) = (0.0, -target);
    let mut hi = 4.0;
    let mut ghi = g(hi);
    while ghi < 0.0 {
        lo = hi;
        glo = ghi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(StatsError::NoConvergence {
                what: "studentized range quantile bracket",
                detail: format!("alpha={alpha}, k={k}, df={df:?}, P(Q<=1e6)-target={ghi:e}"),
            });
        }
        ghi = g(hi);
    }
    // Illinois-modified regula falsi
    let mut side = 0i8;
    for _ in 0..QUANTILE_MAX_ITER {
        let q = (lo * ghi - hi * glo) / (ghi - glo);
        let gq = g(q);
        if gq.abs() < 1e-14 || (hi - lo) < QUANTILE_TOL {
            return Ok(q);
        }
        if gq < 0.0 {
            lo = q;
            glo = gq;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = q;
            ghi = gq;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
    }
    Err(StatsError::NoConvergence {
        what: "studentized range quantile",
        detail: format!("alpha={alpha}, k={k}, df={df:?}, bracket=[{lo}, {hi}]"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let s: f64 = composite(0.0, 2.0, 1).iter().map(|(x, w)| w * x.powi(7)).sum();
        assert_abs_diff_eq!(s, 2f64.powi(8) / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn quantiles_against_tables() {
        // upper 5% points, independently evaluated
        let cases = [
            (2, Df::Finite(10.0), 3.1511),
            (3, Df::Finite(10.0), 3.8768),
            (5, Df::Finite(10.0), 4.6543),
            (10, Df::Finite(10.0), 5.5984),
            (2, Df::Finite(30.0), 2.8882),
            (3, Df::Finite(30.0), 3.4864),
            (5, Df::Finite(30.0), 4.1021),
            (10, Df::Finite(30.0), 4.8241),
            (2, Df::Infinite, 2.7718),
            (3, Df::Infinite, 3.3145),
            (5, Df::Infinite, 3.8577),
            (10, Df::Infinite, 4.4741),
        ];
        for (k, df, want) in cases {
            let q = studentized_range_quantile(0.05, k, df).unwrap();
            assert_abs_diff_eq!(q, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn two_means_match_scaled_t() {
        // sqrt(2) * t(0.975, 10)
        let q = studentized_range_quantile(0.05, 2, Df::Finite(10.0)).unwrap();
        assert_abs_diff_eq!(q, std::f64::consts::SQRT_2 * 2.2281388519649385, epsilon = 1e-3);
    }

    #[test]
    fn increasing_in_k() {
        let mut prev = 0.0;
        for k in 2..12 {
            let q = studentized_range_quantile(0.05, k, Df::Finite(20.0)).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn df_one_and_large_df() {
        // q(0.05, 2, 1) = sqrt(2) * t(0.975, 1) = sqrt(2) * 12.7062
        let q = studentized_range_quantile(0.05, 2, Df::Finite(1.0)).unwrap();
        assert_abs_diff_eq!(q, 17.969, epsilon = 1e-2);
        let big = studentized_range_quantile(0.05, 3, Df::Finite(100_000.0)).unwrap();
        assert_abs_diff_eq!(big, 3.3145, epsilon = 1e-3);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(studentized_range_quantile(0.0, 3, Df::Infinite).is_err());
        assert!(studentized_range_quantile(0.05, 1, Df::Infinite).is_err());
        assert!(studentized_range_quantile(0.05, 3, Df::Finite(0.5)).is_err());
    }
}
