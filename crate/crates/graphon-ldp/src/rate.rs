//! Bernoulli relative entropy and the rate functionals it induces.
//!
//! The cell-level quantity is `R(a|b) = a log(a/b) + (1-a) log((1-a)/(1-b))`
//! with the convention `0 log 0 = 0`, defined for `a in [0,1]`, `b in (0,1)`.
//! Averaged over the grid it gives the relative-entropy rate of a graphon
//! `h` against a reference `r`; minimizing over grid relabellings gives the
//! relabelled rate. References must be strictly interior cellwise, the grid
//! version of log-integrability.

use serde::Serialize;

use crate::error::{GraphonLdpError, Result};
use crate::graphon::{apply_permutation, Graph, Graphon};
use crate::permsearch::{minimize_over_grid_permutations, PermSearchOptions};
use crate::sum::pairwise_sum_by;

/// Floor for log arguments; keeps intermediate ratios representable without
/// touching the exact `0 log 0 = 0` convention at the endpoints.
const LOG_FLOOR: f64 = 1e-300;

/// Bernoulli relative entropy `R(a|b)`, in nats.
///
/// Zero exactly when `a == b`; errors when `a` is outside `[0,1]` or `b`
/// is not strictly inside `(0,1)`.
pub fn bernoulli_relative_entropy(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !a.is_finite() {
        return Err(GraphonLdpError::Domain {
            what: format!("first argument {a} outside [0,1]"),
        });
    }
    if !(b > 0.0 && b < 1.0) {
        return Err(GraphonLdpError::Domain {
            what: format!("second argument {b} outside (0,1)"),
        });
    }
    Ok(rel_entropy_unchecked(a, b))
}

#[inline]
pub(crate) fn rel_entropy_unchecked(a: f64, b: f64) -> f64 {
    let mut out = 0.0;
    if a > 0.0 {
        out += a * (a / b).max(LOG_FLOOR).ln();
    }
    if a < 1.0 {
        out += (1.0 - a) * ((1.0 - a) / (1.0 - b)).max(LOG_FLOOR).ln();
    }
    out
}

/// Derivative of `a -> R(a|b)`: the logit difference.
#[inline]
pub(crate) fn rel_entropy_prime(a: f64, b: f64) -> f64 {
    (a.max(LOG_FLOOR).ln() - (1.0 - a).max(LOG_FLOOR).ln())
        - (b.ln() - (1.0 - b).ln())
}

/// Rate value with its per-cell decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct RateResult {
    /// `(1/m^2) sum of per_cell`, in nats.
    pub value: f64,
    pub m: usize,
    /// Row-major `m x m` nonnegative cell contributions.
    pub per_cell: Vec<f64>,
}

/// Grid log-integrability report for a reference graphon.
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceCheck {
    /// True when every cell lies strictly inside `(0,1)`.
    pub ok: bool,
    /// `(1/m^2) sum |log r|`; infinite when a cell is 0.
    pub l1_log_r: f64,
    /// `(1/m^2) sum |log(1-r)|`; infinite when a cell is 1.
    pub l1_log_1mr: f64,
}

pub fn reference_check(r: &Graphon) -> ReferenceCheck {
    let m = r.resolution();
    let mm = m * m;
    let vals = r.as_slice();
    let ok = vals.iter().all(|&v| v > 0.0 && v < 1.0);
    let l1_log_r = if vals.iter().any(|&v| v == 0.0) {
        f64::INFINITY
    } else {
        pairwise_sum_by(0, mm, &mut |i| vals[i].ln().abs()) / mm as f64
    };
    let l1_log_1mr = if vals.iter().any(|&v| v == 1.0) {
        f64::INFINITY
    } else {
        pairwise_sum_by(0, mm, &mut |i| (1.0 - vals[i]).ln().abs()) / mm as f64
    };
    ReferenceCheck {
        ok,
        l1_log_r,
        l1_log_1mr,
    }
}

fn require_reference(r: &Graphon) -> Result<()> {
    if reference_check(r).ok {
        Ok(())
    } else {
        Err(GraphonLdpError::InvalidReference)
    }
}

/// Relative-entropy rate of `h` against the reference `r`:
/// `(1/m^2) sum R(h_ij | r_ij)`.
pub fn relative_entropy_rate(h: &Graphon, r: &Graphon) -> Result<RateResult> {
    h.check_same_resolution(r)?;
    require_reference(r)?;
    Ok(rate_unchecked(h, r))
}

pub(crate) fn rate_unchecked(h: &Graphon, r: &Graphon) -> RateResult {
    let m = h.resolution();
    let mm = m * m;
    let per_cell: Vec<f64> = h
        .as_slice()
        .iter()
        .zip(r.as_slice())
        .map(|(&a, &b)| rel_entropy_unchecked(a, b))
        .collect();
    let value = pairwise_sum_by(0, mm, &mut |i| per_cell[i]) / mm as f64;
    RateResult { value, m, per_cell }
}

pub(crate) fn rate_value_unchecked(h: &Graphon, r: &Graphon) -> f64 {
    let m = h.resolution();
    let mm = m * m;
    let hv = h.as_slice();
    let rv = r.as_slice();
    pairwise_sum_by(0, mm, &mut |i| rel_entropy_unchecked(hv[i], rv[i])) / mm as f64
}

/// Relabelled rate: the minimum of `relative_entropy_rate(h^phi, r)` over
/// grid permutations. Exhaustive for `m <= 8`, seeded local search
/// otherwise, so the result is an upper bound on the true minimum and never
/// exceeds the unrelabelled rate.
pub fn relabeled_entropy_rate(
    h: &Graphon,
    r: &Graphon,
    opts: &PermSearchOptions,
) -> Result<f64> {
    h.check_same_resolution(r)?;
    require_reference(r)?;
    let m = h.resolution();
    let (val, _) = minimize_over_grid_permutations(
        m,
        |phi| {
            let hp = apply_permutation(h, phi).expect("sizes match");
            rate_value_unchecked(&hp, r)
        },
        opts,
    );
    Ok(val)
}

/// Uniform-in-`h` bound on the rate change under a reference swap:
/// `|I_{r1}(f) - I_{r2}(f)| <= |log r1 - log r2|_L1 + |log(1-r1) - log(1-r2)|_L1`.
pub fn uniform_rate_bound(r1: &Graphon, r2: &Graphon) -> Result<f64> {
    r1.check_same_resolution(r2)?;
    require_reference(r1)?;
    require_reference(r2)?;
    let m = r1.resolution();
    let mm = m * m;
    let a = r1.as_slice();
    let b = r2.as_slice();
    let term1 = pairwise_sum_by(0, mm, &mut |i| (a[i].ln() - b[i].ln()).abs()) / mm as f64;
    let term2 = pairwise_sum_by(0, mm, &mut |i| {
        ((1.0 - a[i]).ln() - (1.0 - b[i]).ln()).abs()
    }) / mm as f64;
    Ok(term1 + term2)
}

/// Normalized log-likelihood ratio of a graph under two edge-probability
/// references at the graph's resolution:
/// `(1/n^2) sum_{u<v} [g_uv log(rA/rB) + (1-g_uv) log((1-rA)/(1-rB))]`.
/// Signed; both references must be strictly interior.
pub fn log_likelihood_ratio(g: &Graph, ra: &Graphon, rb: &Graphon) -> Result<f64> {
    let n = g.n();
    if ra.resolution() != n || rb.resolution() != n {
        return Err(GraphonLdpError::SizeMismatch {
            what: format!(
                "references at resolutions {} and {} for a graph on {n} vertices",
                ra.resolution(),
                rb.resolution()
            ),
        });
    }
    require_reference(ra)?;
    require_reference(rb)?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    let sum = pairwise_sum_by(0, pairs.len(), &mut |t| {
        let (u, v) = pairs[t];
        if g.has_edge(u, v) {
            (ra.value(u, v) / rb.value(u, v)).ln()
        } else {
            ((1.0 - ra.value(u, v)) / (1.0 - rb.value(u, v))).ln()
        }
    });
    Ok(sum / (n * n) as f64)
}

/// Deterministic budget dominating `|log_likelihood_ratio|` for any graph,
/// when `rb` is a level-`k` block reference evaluated on the `n`-grid.
///
/// Every `n`-cell nested inside its `k`-cell contributes its L1 log
/// distance; cells straddling a `k`-boundary are over-counted and enter
/// with weight `k^2` times the overlap measure. When `k` divides `n`
/// nothing straddles and the budget reduces to the plain L1 terms.
pub fn log_likelihood_budget(ra: &Graphon, rb: &Graphon, k: usize) -> Result<f64> {
    let n = ra.resolution();
    ra.check_same_resolution(rb)?;
    require_reference(ra)?;
    require_reference(rb)?;
    if k == 0 || k > n {
        return Err(GraphonLdpError::InvalidParameter {
            what: format!("level {k} incompatible with resolution {n}"),
        });
    }
    // rb must be constant on each k-cell of grid points.
    for u in 1..n {
        if u * k / n == (u - 1) * k / n {
            for v in 0..n {
                if rb.value(u, v) != rb.value(u - 1, v) {
                    return Err(GraphonLdpError::InvalidParameter {
                        what: format!("rb is not constant on the level-{k} grid"),
                    });
                }
            }
        }
    }
    let nf = n as f64;
    let kf = k as f64;
    let mut contribs = Vec::with_capacity(n * n);
    for u in 0..n {
        let i = u * k / n;
        let nested_x = (u + 1) * k <= (i + 1) * n;
        let wx = ((u + 1) as f64 / nf).min((i + 1) as f64 / kf) - u as f64 / nf;
        for v in 0..n {
            let j = v * k / n;
            let nested_y = (v + 1) * k <= (j + 1) * n;
            let wy = ((v + 1) as f64 / nf).min((j + 1) as f64 / kf) - v as f64 / nf;
            let dlog = (ra.value(u, v).ln() - rb.value(u, v).ln()).abs()
                + ((1.0 - ra.value(u, v)).ln() - (1.0 - rb.value(u, v)).ln()).abs();
            let weight = if nested_x && nested_y {
                1.0 / (nf * nf)
            } else {
                kf * kf * wx * wy
            };
            contribs.push(weight * dlog);
        }
    }
    Ok(pairwise_sum_by(0, contribs.len(), &mut |i| contribs[i]))
}
