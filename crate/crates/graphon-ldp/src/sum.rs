//! Pairwise (tree) summation.
//!
//! All reductions in this crate go through these helpers. Besides the usual
//! accuracy gain, the balanced tree keeps sums of 2^k identical values exact
//! in f64 (every partial sum is a doubling), which the closed-form constant
//! checks rely on.

/// Sum `f(lo..hi)` with a balanced recursion tree.
pub fn pairwise_sum_by(lo: usize, hi: usize, f: &mut impl FnMut(usize) -> f64) -> f64 {
    match hi - lo {
        0 => 0.0,
        1 => f(lo),
        2 => f(lo) + f(lo + 1),
        n => {
            let mid = lo + n / 2;
            pairwise_sum_by(lo, mid, f) + pairwise_sum_by(mid, hi, f)
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    pairwise_sum_by(0, a.len(), &mut |i| a[i] * b[i])
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
