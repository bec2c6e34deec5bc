//! Constants and expansions for the largest-eigenvalue rate function.
//!
//! For a reference `r` the quantities are: `c`, the operator norm of the
//! reference kernel (where the rate function vanishes); `b`, the grid mean
//! of `r^3 (1-r)`; `k = c^2 / (2b)`, the quadratic coefficient of the rate
//! near its zero; and the optimal perturbation direction
//! `delta = (c/b) r^2 (1-r)`, which satisfies the constraint
//! `(1/m^2) sum r * delta = c`.

use serde::Serialize;

use crate::error::{GraphonLdpError, Result};
use crate::graphon::{Field, Graphon};
use crate::rate::{rate_unchecked, reference_check};
use crate::spectral::operator_norm;
use crate::sum::pairwise_sum_by;

/// Scaling constants attached to a reference graphon.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingConstants {
    /// Operator norm of the reference kernel.
    pub c: f64,
    /// Grid mean of `r^3 (1-r)`.
    pub b: f64,
    /// Quadratic coefficient `c^2 / (2 b)`.
    pub k: f64,
}

pub fn scaling_constants(r: &Graphon) -> Result<ScalingConstants> {
    if !reference_check(r).ok {
        return Err(GraphonLdpError::InvalidReference);
    }
    let c = operator_norm(r)?.value;
    let m = r.resolution();
    let mm = m * m;
    let vals = r.as_slice();
    let b = pairwise_sum_by(0, mm, &mut |i| {
        let v = vals[i];
        v * v * v * (1.0 - v)
    }) / mm as f64;
    if b == 0.0 {
        return Err(GraphonLdpError::DegenerateReference {
            what: "mean of r^3 (1-r) vanishes".into(),
        });
    }
    Ok(ScalingConstants {
        c,
        b,
        k: c * c / (2.0 * b),
    })
}

/// Optimal perturbation direction `delta = (c/b) r^2 (1-r)`, cellwise.
pub fn optimal_perturbation(r: &Graphon) -> Result<Field> {
    let consts = scaling_constants(r)?;
    let ratio = consts.c / consts.b;
    let m = r.resolution();
    Ok(Field::from_upper(m, |i, j| {
        let v = r.value(i, j);
        ratio * v * v * (1.0 - v)
    }))
}

/// Exact rate of the perturbed reference against its quadratic expansion.
///
/// Returns `(exact, quadratic)` with
/// `exact = rate(r + eps^alpha * delta | r)` and
/// `quadratic = (1/2) eps^(2 alpha) * mean of delta^2 / (r (1-r))`.
/// The ratio tends to 1 as `eps` tends to 0.
pub fn second_order_cost(
    r: &Graphon,
    delta: &Field,
    eps: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    if eps < 0.0 || alpha <= 0.0 {
        return Err(GraphonLdpError::InvalidParameter {
            what: format!("eps {eps} and alpha {alpha} must be positive"),
        });
    }
    if !reference_check(r).ok {
        return Err(GraphonLdpError::InvalidReference);
    }
    if r.resolution() != delta.resolution() {
        return Err(GraphonLdpError::ResolutionMismatch {
            m1: r.resolution(),
            m2: delta.resolution(),
        });
    }
    let scale = eps.powf(alpha);
    let perturbed = r.add_field(delta, scale)?;
    let exact = rate_unchecked(&perturbed, r).value;
    let m = r.resolution();
    let mm = m * m;
    let rv = r.as_slice();
    let dv = delta.as_slice();
    let mean = pairwise_sum_by(0, mm, &mut |i| dv[i] * dv[i] / (rv[i] * (1.0 - rv[i])))
        / mm as f64;
    let quadratic = 0.5 * scale * scale * mean;
    Ok((exact, quadratic))
}

/// `|I_{r_k}(f_k) - I_r(f)|` for each level `k`, where the subscript `k`
/// denotes the level-k block approximant. Levels must divide the common
/// resolution. The sequence is expected to decrease toward 0 and is exactly
/// 0 at `k = m`.
pub fn block_approximation_errors(
    r: &Graphon,
    f: &Graphon,
    k_list: &[usize],
) -> Result<Vec<f64>> {
    f.check_same_resolution(r)?;
    if !reference_check(r).ok {
        return Err(GraphonLdpError::InvalidReference);
    }
    let m = r.resolution();
    let base = rate_unchecked(f, r).value;
    let mut out = Vec::with_capacity(k_list.len());
    for &k in k_list {
        if k == 0 || m % k != 0 {
            return Err(GraphonLdpError::InvalidParameter {
                what: format!("level {k} does not divide resolution {m}"),
            });
        }
        let rk = crate::graphon::level_approximant(r, k)?;
        if !reference_check(&rk).ok {
            return Err(GraphonLdpError::InvalidReference);
        }
        let fk = crate::graphon::level_approximant(f, k)?;
        out.push((rate_unchecked(&fk, &rk).value - base).abs());
    }
    Ok(out)
}
