//! Property tests for the structural invariants of the library.
//!
//! Exact-equality assertions work on dyadic-valued graphons (multiples of
//! 1/64): every partial sum is exact in f64, so quantities that are equal
//! as real numbers come out bitwise equal regardless of summation order.

use proptest::prelude::*;

use graphon_ldp::*;

/// Symmetric graphon with values on the 1/64 grid.
fn dyadic_graphon(m: usize) -> impl Strategy<Value = Graphon> {
    prop::collection::vec(0..=64u32, m * (m + 1) / 2).prop_map(move |upper| {
        let mut vals = vec![0.0; m * m];
        let mut t = 0;
        for i in 0..m {
            for j in i..m {
                let v = upper[t] as f64 / 64.0;
                vals[i * m + j] = v;
                vals[j * m + i] = v;
                t += 1;
            }
        }
        Graphon::new(m, vals).unwrap()
    })
}

fn permutation(m: usize) -> impl Strategy<Value = GridPermutation> {
    Just(()).prop_perturb(move |_, mut rng| {
        let mut perm: Vec<usize> = (0..m).collect();
        for i in (1..m).rev() {
            let j = (rng.next_u64() % (i as u64 + 1)) as usize;
            perm.swap(i, j);
        }
        GridPermutation::new(perm).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rel_entropy_nonnegative_zero_only_on_diagonal(
        a in 0.0f64..=1.0,
        b in 0.001f64..0.999,
    ) {
        let v = bernoulli_relative_entropy(a, b).unwrap();
        prop_assert!(v >= 0.0);
        if a == b {
            prop_assert_eq!(v, 0.0);
        }
        if (a - b).abs() > 1e-6 {
            prop_assert!(v > 0.0);
        }
    }

    #[test]
    fn heuristic_cut_norm_never_exceeds_exact(
        (h1, h2) in (1usize..=10).prop_flat_map(|m| (dyadic_graphon(m), dyadic_graphon(m))),
        restarts in 1usize..=8,
        seed in 0u64..1000,
    ) {
        let d = h1.sub(&h2).unwrap();
        let exact = cut_norm_exact(&d).unwrap();
        let heur = cut_norm_heuristic(&d, restarts, seed).unwrap();
        prop_assert!(heur.value <= exact.value,
            "heuristic {} above exact {}", heur.value, exact.value);
        prop_assert!(heur.value >= 0.0);
        prop_assert!(exact.exact && !heur.exact);
    }

    #[test]
    fn cut_distance_triangle_inequality(
        (h1, h2, h3) in (2usize..=6).prop_flat_map(|m| {
            (dyadic_graphon(m), dyadic_graphon(m), dyadic_graphon(m))
        }),
    ) {
        let d12 = cut_distance(&h1, &h2).unwrap().value;
        let d23 = cut_distance(&h2, &h3).unwrap().value;
        let d13 = cut_distance(&h1, &h3).unwrap().value;
        prop_assert!(d13 <= d12 + d23 + 1e-12);
    }

    #[test]
    fn permutations_preserve_cut_distance_exactly(
        (h1, h2, phi) in (2usize..=7).prop_flat_map(|m| {
            (dyadic_graphon(m), dyadic_graphon(m), permutation(m))
        }),
    ) {
        let base = cut_distance(&h1, &h2).unwrap().value;
        let h1p = apply_permutation(&h1, &phi).unwrap();
        let h2p = apply_permutation(&h2, &phi).unwrap();
        let moved = cut_distance(&h1p, &h2p).unwrap().value;
        prop_assert_eq!(base, moved);
    }

    #[test]
    fn permutations_preserve_norms_exactly(
        (h, phi) in (2usize..=8).prop_flat_map(|m| (dyadic_graphon(m), permutation(m))),
    ) {
        let hp = apply_permutation(&h, &phi).unwrap();
        prop_assert_eq!(h.l1_norm(), hp.l1_norm());
        prop_assert_eq!(h.l2_norm(), hp.l2_norm());
    }

    #[test]
    fn relabeled_rate_never_above_plain_rate(
        (h, mut r) in (2usize..=6).prop_flat_map(|m| (dyadic_graphon(m), dyadic_graphon(m))),
    ) {
        // Push the reference strictly inside (0,1).
        let m = r.resolution();
        let vals: Vec<f64> = r.as_slice().iter().map(|v| 0.02 + 0.96 * v).collect();
        r = Graphon::new(m, vals).unwrap();
        let i = relative_entropy_rate(&h, &r).unwrap().value;
        let j = relabeled_entropy_rate(&h, &r, &PermSearchOptions::default()).unwrap();
        prop_assert!(j <= i + 1e-15, "J {} above I {}", j, i);
        prop_assert!(i >= 0.0 && j >= 0.0);
    }

    #[test]
    fn uniform_bound_dominates_rate_difference(
        (f, r1, r2) in (2usize..=6).prop_flat_map(|m| {
            (dyadic_graphon(m), dyadic_graphon(m), dyadic_graphon(m))
        }),
    ) {
        let squeeze = |g: &Graphon| {
            let m = g.resolution();
            let vals: Vec<f64> = g.as_slice().iter().map(|v| 0.05 + 0.9 * v).collect();
            Graphon::new(m, vals).unwrap()
        };
        let (r1, r2) = (squeeze(&r1), squeeze(&r2));
        let i1 = relative_entropy_rate(&f, &r1).unwrap().value;
        let i2 = relative_entropy_rate(&f, &r2).unwrap().value;
        let bound = uniform_rate_bound(&r1, &r2).unwrap();
        prop_assert!((i1 - i2).abs() <= bound + 1e-12);
    }

    #[test]
    fn graphon_file_roundtrip(h in (1usize..=9).prop_flat_map(dyadic_graphon)) {
        let mut buf = Vec::new();
        io::write_graphon_to(&h, &mut buf).unwrap();
        let back = io::parse_graphon(&buf[..]).unwrap();
        prop_assert_eq!(h, back);
    }
}

#[test]
fn rate_zero_iff_equal_to_reference() {
    let r = rank_one(10, &[0.2, 0.6]).unwrap();
    assert_eq!(relative_entropy_rate(&r, &r).unwrap().value, 0.0);
    // Any cellwise difference beyond 1e-12 forces a positive rate.
    let d = Field::new(10, vec![1e-6; 100]).unwrap();
    let h = r.add_field(&d, 1.0).unwrap();
    let v = relative_entropy_rate(&h, &r).unwrap().value;
    assert!(v > 0.0);
}

#[test]
fn level_approximant_l1_contraction_chain() {
    // Smooth rank-one instance at m = 64: coarse-to-fine averaging errors
    // decrease along the dividing chain and vanish at k = m.
    let r = rank_one(64, &[0.0, 1.0]).unwrap();
    let mut prev = f64::INFINITY;
    for k in [4usize, 8, 16, 32] {
        let rk = level_approximant(&level_approximant(&r, k).unwrap(), 64).unwrap();
        let err = rk.sub(&r).unwrap().l1_norm();
        assert!(err < prev, "L1 error not decreasing at k={k}");
        prev = err;
    }
    let rm = level_approximant(&r, 64).unwrap();
    assert_eq!(rm.sub(&r).unwrap().l1_norm(), 0.0);
}

#[test]
fn log_approximant_convergence_chain() {
    // |log r_k - log r|_L1 and |log(1-r_k) - log(1-r)|_L1 both decrease in k
    // for the midpoint grid of x*y at m = 64.
    let r = rank_one(64, &[0.0, 1.0]).unwrap();
    let norms = |a: &Graphon, b: &Graphon| {
        let m = a.resolution();
        let mut l1_log = 0.0;
        let mut l1_log1m = 0.0;
        for i in 0..m {
            for j in 0..m {
                l1_log += (a.value(i, j).ln() - b.value(i, j).ln()).abs();
                l1_log1m += ((1.0 - a.value(i, j)).ln() - (1.0 - b.value(i, j)).ln()).abs();
            }
        }
        (l1_log / (m * m) as f64, l1_log1m / (m * m) as f64)
    };
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for k in [4usize, 8, 16, 32] {
        let rk = level_approximant(&level_approximant(&r, k).unwrap(), 64).unwrap();
        let (a, b) = norms(&rk, &r);
        assert!(a < prev.0, "log-r term not decreasing at k={k}");
        assert!(b < prev.1, "log-(1-r) term not decreasing at k={k}");
        prev = (a, b);
    }
}

#[test]
fn cut_metric_vanishes_on_any_relabelling() {
    let h = rank_one(6, &[0.05, 0.85]).unwrap();
    for perm in [
        vec![5, 4, 3, 2, 1, 0],
        vec![1, 2, 3, 4, 5, 0],
        vec![2, 0, 5, 1, 4, 3],
    ] {
        let phi = GridPermutation::new(perm).unwrap();
        let hp = apply_permutation(&h, &phi).unwrap();
        let d = cut_metric_estimate(&h, &hp, &PermSearchOptions::default()).unwrap();
        assert_eq!(d, 0.0);
    }
}

#[test]
fn rate_is_l2_continuous_under_small_perturbations() {
    // Fixed interior reference at m = 16; perturbations of L2 size 1e-4
    // move the rate by far less than 1e-2.
    let m = 16;
    let r = Graphon::from_upper(m, |i, j| 0.1 + 0.8 * (((i + 1) * (j + 3)) % 13) as f64 / 13.0)
        .unwrap();
    let h = Graphon::from_upper(m, |i, j| (((i * 3 + j * 5) % 17) as f64 + 0.5) / 18.0).unwrap();
    let base = relative_entropy_rate(&h, &r).unwrap().value;
    for s in 0..20 {
        let dir = Field::from_upper(m, |i, j| {
            if (i * m + j + s) % 3 == 0 {
                1.0
            } else {
                -1.0
            }
        });
        let scale = 1e-4 / dir.l2_norm();
        // Clamp the perturbed graphon back into range; clamping only
        // shrinks the perturbation.
        let vals: Vec<f64> = h
            .as_slice()
            .iter()
            .zip(dir.as_slice())
            .map(|(a, d)| (a + scale * d).clamp(0.0, 1.0))
            .collect();
        let hp = Graphon::new(m, vals).unwrap();
        let moved = relative_entropy_rate(&hp, &r).unwrap().value;
        assert!(
            (moved - base).abs() <= 1e-2,
            "rate moved {} under an L2 1e-4 perturbation",
            (moved - base).abs()
        );
    }
}

#[test]
fn rate_converges_along_shrinking_schedule() {
    let m = 16;
    let r = Graphon::constant(m, 0.35).unwrap();
    let h = Graphon::from_upper(m, |i, j| 0.08 + 0.84 * (((i + 2) * (j + 7)) % 11) as f64 / 11.0)
        .unwrap();
    let base = relative_entropy_rate(&h, &r).unwrap().value;
    let dir = Field::from_upper(m, |i, j| if (i + j) % 2 == 0 { 1.0 } else { -0.5 });
    let mut prev = f64::INFINITY;
    let mut last = f64::INFINITY;
    for t in 1..=12 {
        let scale = 0.05 * 0.5f64.powi(t);
        let vals: Vec<f64> = h
            .as_slice()
            .iter()
            .zip(dir.as_slice())
            .map(|(a, d)| (a + scale * d).clamp(0.0, 1.0))
            .collect();
        let ht = Graphon::new(m, vals).unwrap();
        let diff = (relative_entropy_rate(&ht, &r).unwrap().value - base).abs();
        assert!(diff <= prev + 1e-15, "not shrinking at step {t}");
        prev = diff;
        last = diff;
    }
    assert!(last <= 1e-6, "limit gap {last}");
}

#[test]
fn relabeled_rate_lower_semicontinuous_along_l1_sequences() {
    // Exhaustive-permutation rate along an explicitly L1-converging
    // sequence: the liminf stays above the limit value minus 1e-9.
    let m = 5;
    let r = rank_one(m, &[0.25, 0.5]).unwrap();
    let h = Graphon::from_upper(m, |i, j| 0.2 + (((i + 1) * (j + 1)) % 4) as f64 / 8.0).unwrap();
    let j_limit = relabeled_entropy_rate(&h, &r, &PermSearchOptions::default()).unwrap();
    let dir = Field::from_upper(m, |i, j| if (i * j) % 2 == 0 { 0.7 } else { -0.9 });
    let mut tail = Vec::new();
    for t in 4..=12 {
        let scale = 0.5f64.powi(t);
        let ht = {
            let vals: Vec<f64> = h
                .as_slice()
                .iter()
                .zip(dir.as_slice())
                .map(|(a, d)| (a + scale * d).clamp(0.0, 1.0))
                .collect();
            Graphon::new(m, vals).unwrap()
        };
        tail.push(relabeled_entropy_rate(&ht, &r, &PermSearchOptions::default()).unwrap());
    }
    let liminf = tail[tail.len() - 3..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    assert!(
        liminf >= j_limit - 1e-9,
        "liminf {liminf} fell below the limit value {j_limit}"
    );
}

#[test]
fn sampler_consistent_with_empirical_operator_norm() {
    // 50 random graphs at n <= 64: normalized top eigenvalue equals the
    // empirical graphon's operator norm within 1e-9.
    let mut checked = 0;
    for seed in 0..50u64 {
        let n = 16 + (seed as usize * 7) % 49;
        let r = rank_one(n, &[0.1, 0.8]).unwrap();
        let g = sample(&SampleSpec {
            n,
            r,
            seed,
            count: 1,
        })
        .unwrap();
        let a = lambda_over_n(&g).unwrap();
        let b = operator_norm(&empirical_graphon(&g)).unwrap().value;
        assert!((a - b).abs() <= 1e-9, "seed {seed}: {a} vs {b}");
        checked += 1;
    }
    assert_eq!(checked, 50);
}

#[test]
fn solver_gradient_checks_small() {
    // Smoke-scale version of the gradient validation (the acceptance suite
    // runs the full 100-point version).
    let m = 8;
    let r = Graphon::from_upper(m, |i, j| 0.2 + 0.6 * (((i + 1) * (j + 2)) % 7) as f64 / 7.0)
        .unwrap();
    let h = Graphon::from_upper(m, |i, j| 0.15 + 0.7 * (((i + 3) * (j + 1)) % 5) as f64 / 5.0)
        .unwrap();
    let pairs = upper_pairs(m);
    let grad_i = rate_gradient_upper(&h, &r).unwrap();
    let grad_n = norm_gradient_upper(&h).unwrap();
    let step = 1e-6;
    for &t in &[0usize, 3, 11, 20, 35] {
        let (u, v) = pairs[t];
        let bump = |s: f64| {
            let mut vals = h.as_slice().to_vec();
            vals[u * m + v] += s;
            vals[v * m + u] = vals[u * m + v];
            Graphon::new(m, vals).unwrap()
        };
        let (hp, hm) = (bump(step), bump(-step));
        let fd_i = (relative_entropy_rate(&hp, &r).unwrap().value
            - relative_entropy_rate(&hm, &r).unwrap().value)
            / (2.0 * step);
        assert!(
            (fd_i - grad_i[t]).abs() <= 1e-4 * grad_i[t].abs().max(1e-8),
            "rate gradient mismatch at {t}: fd {fd_i} analytic {}",
            grad_i[t]
        );
        let fd_n = (operator_norm(&hp).unwrap().value - operator_norm(&hm).unwrap().value)
            / (2.0 * step);
        assert!(
            (fd_n - grad_n[t]).abs() <= 1e-4 * grad_n[t].abs().max(1e-8),
            "norm gradient mismatch at {t}: fd {fd_n} analytic {}",
            grad_n[t]
        );
    }
}
