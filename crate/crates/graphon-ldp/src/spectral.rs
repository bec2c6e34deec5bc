//! Power iteration for symmetric kernels.
//!
//! Graphon kernels and adjacency matrices are symmetric and entrywise
//! nonnegative, so the operator norm equals the largest eigenvalue and the
//! corresponding eigenvector can be taken nonnegative. Bipartite-like
//! spectra (eigenvalue pairs of equal magnitude and opposite sign) break
//! plain power iteration, so the loop iterates the squared kernel and then
//! projects onto the dominant-sign eigenspace; that recovers an actual
//! eigenvector even when the magnitudes tie.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{GraphonLdpError, Result};
use crate::graphon::Graphon;
use crate::sum::{dot, norm2, pairwise_sum_by};

/// Relative tolerance on the Rayleigh residual for graphon kernels.
pub const OPERATOR_NORM_TOL: f64 = 1e-12;
const OPERATOR_NORM_MAX_ITER: usize = 50_000;

/// Operator norm of a graphon kernel with its top eigenfunction.
#[derive(Debug, Clone, Serialize)]
pub struct KernelNorm {
    /// Largest singular value of the kernel (= largest eigenvalue here).
    pub value: f64,
    /// Step eigenfunction with unit L2 norm on [0,1]: `(1/m) sum v^2 = 1`.
    pub eigvec: Vec<f64>,
    pub iterations: usize,
}

pub(crate) struct SpectralOptions<'a> {
    pub tol: f64,
    pub max_iter: usize,
    pub warm_start: Option<&'a [f64]>,
}

pub(crate) struct SpectralRadius {
    pub value: f64,
    /// Euclidean-unit eigenvector.
    pub vec: Vec<f64>,
    pub iterations: usize,
}

/// Largest |eigenvalue| of a symmetric operator given through its matvec.
pub(crate) fn symmetric_spectral_radius(
    dim: usize,
    matvec: impl Fn(&[f64], &mut [f64]),
    opts: &SpectralOptions,
) -> Result<SpectralRadius> {
    let mut x = match opts.warm_start {
        Some(w) if w.len() == dim && norm2(w) > 0.0 => w.to_vec(),
        _ => vec![1.0; dim],
    };
    normalize(&mut x);
    let mut y = vec![0.0; dim];
    let mut w = vec![0.0; dim];
    let mut restarts = 0;
    for it in 0..opts.max_iter {
        matvec(&x, &mut y);
        let ny = norm2(&y);
        if ny < 1e-300 {
            // x sits in the kernel. For a nonzero operator a seeded random
            // restart escapes this (measure-zero) start; two failures mean
            // the operator annihilates everything we can see.
            if restarts < 2 {
                restarts += 1;
                let mut rng = ChaCha8Rng::seed_from_u64(0x5bd1_e995 + restarts as u64);
                for xi in x.iter_mut() {
                    *xi = rng.random::<f64>() - 0.5;
                }
                normalize(&mut x);
                continue;
            }
            return Ok(SpectralRadius {
                value: 0.0,
                vec: x,
                iterations: it,
            });
        }
        // Candidate eigenvector: project the iterate onto the +rho
        // eigenspace. rho = |Mx| since x is unit.
        let mut v: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi + ny * xi).collect();
        let nv = norm2(&v);
        if nv > 1e-300 {
            for vi in v.iter_mut() {
                *vi /= nv;
            }
        } else {
            v.copy_from_slice(&x);
        }
        matvec(&v, &mut w);
        let lam = dot(&v, &w) / dot(&v, &v);
        let res = pairwise_sum_by(0, dim, &mut |i| {
            let d = w[i] - lam * v[i];
            d * d
        })
        .sqrt();
        if res <= opts.tol * lam.abs().max(1e-300) {
            return Ok(SpectralRadius {
                value: lam.abs(),
                vec: v,
                iterations: it,
            });
        }
        // One squared-kernel step: x <- M y / |M y| = M^2 x normalized.
        matvec(&y, &mut w);
        let nw = norm2(&w);
        if nw < 1e-300 {
            x.copy_from_slice(&y);
            normalize(&mut x);
            continue;
        }
        x.iter_mut().zip(&w).for_each(|(xi, wi)| *xi = wi / nw);
    }
    Err(GraphonLdpError::NonConvergence {
        what: "power iteration".into(),
        iterations: opts.max_iter,
        residual: f64::NAN,
    })
}

fn normalize(x: &mut [f64]) {
    let n = norm2(x);
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

pub(crate) fn kernel_matvec(h: &Graphon) -> impl Fn(&[f64], &mut [f64]) + '_ {
    let m = h.resolution();
    let inv_m = 1.0 / m as f64;
    move |x: &[f64], out: &mut [f64]| {
        for i in 0..m {
            out[i] = inv_m * pairwise_sum_by(0, m, &mut |j| h.value(i, j) * x[j]);
        }
    }
}

/// Operator norm of the kernel `T_h u(x) = integral of h(x,y) u(y) dy`:
/// for a step graphon this is the largest |eigenvalue| of the matrix
/// `values / m`, computed by power iteration to relative tolerance 1e-12.
pub fn operator_norm(h: &Graphon) -> Result<KernelNorm> {
    operator_norm_with(h, OPERATOR_NORM_TOL, None)
}

pub(crate) fn operator_norm_with(
    h: &Graphon,
    tol: f64,
    warm_start: Option<&[f64]>,
) -> Result<KernelNorm> {
    let m = h.resolution();
    if h.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(KernelNorm {
            value: 0.0,
            eigvec: vec![1.0; m],
            iterations: 0,
        });
    }
    let out = symmetric_spectral_radius(
        m,
        kernel_matvec(h),
        &SpectralOptions {
            tol,
            max_iter: OPERATOR_NORM_MAX_ITER,
            warm_start,
        },
    )?;
    // Rescale from Euclidean-unit to unit L2 norm on [0,1].
    let scale = (m as f64).sqrt();
    Ok(KernelNorm {
        value: out.value,
        eigvec: out.vec.iter().map(|v| v * scale).collect(),
        iterations: out.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::rank_one;
    use crate::graphon::{empirical_graphon, Graph};
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_kernel_is_exact() {
        for p in [0.5, 0.25, 0.3] {
            let h = Graphon::constant(32, p).unwrap();
            let out = operator_norm(&h).unwrap();
            if p == 0.5 || p == 0.25 {
                assert_eq!(out.value, p); // dyadic: bit-exact
            } else {
                assert_abs_diff_eq!(out.value, p, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn midpoint_xy_closed_form() {
        // Rank-one kernel: norm = (1/m^3) sum (i+1/2)^2 = 1/3 - 1/(12 m^2).
        let h = rank_one(32, &[0.0, 1.0]).unwrap();
        let out = operator_norm(&h).unwrap();
        assert_abs_diff_eq!(out.value, 4095.0 / 12288.0, epsilon = 1e-13);
    }

    #[test]
    fn single_edge_bipartite_kernel() {
        // Empirical graphon of K2: eigenvalues +-1 scaled by 1/m = 1/2.
        let h = empirical_graphon(&Graph::complete(2).unwrap());
        let out = operator_norm(&h).unwrap();
        assert_eq!(out.value, 0.5);
    }

    #[test]
    fn zero_kernel() {
        let h = Graphon::constant(4, 0.0).unwrap();
        assert_eq!(operator_norm(&h).unwrap().value, 0.0);
    }

    #[test]
    fn eigvec_satisfies_rayleigh_residual() {
        let h = Graphon::from_upper(9, |i, j| 0.15 + (((i + 3) * (j + 5)) % 11) as f64 / 16.0)
            .unwrap();
        let out = operator_norm(&h).unwrap();
        let m = h.resolution();
        // Function-space L2 norm of the eigenfunction is 1.
        let fn_norm = (pairwise_sum_by(0, m, &mut |i| out.eigvec[i] * out.eigvec[i])
            / m as f64)
            .sqrt();
        assert_abs_diff_eq!(fn_norm, 1.0, epsilon = 1e-12);
        // Applying the kernel rescales the eigenfunction by the norm.
        let mv = kernel_matvec(&h);
        let mut img = vec![0.0; m];
        mv(&out.eigvec, &mut img);
        let res = (pairwise_sum_by(0, m, &mut |i| {
            let d = img[i] - out.value * out.eigvec[i];
            d * d
        }) / m as f64)
            .sqrt();
        assert!(res <= 1e-9, "residual {res}");
    }
}
