//! Minimization over grid permutations.
//!
//! Exhaustive for `m <= 8` (8! evaluations), otherwise first-improvement
//! local search over transpositions with seeded random restarts. Both the
//! cut-metric estimate and the relabelled rate estimate go through here.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graphon::GridPermutation;

/// Largest resolution for which all `m!` permutations are enumerated.
pub const PERM_EXHAUSTIVE_MAX_RESOLUTION: usize = 8;

#[derive(Debug, Clone)]
pub struct PermSearchOptions {
    /// Local-search restarts (restart 0 is the identity).
    pub restarts: usize,
    pub seed: u64,
    /// Cap on improvement sweeps per restart.
    pub max_sweeps: usize,
}

impl Default for PermSearchOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            seed: 0,
            max_sweeps: 200,
        }
    }
}

/// Minimize `objective` over permutations of `{0,..,m-1}`.
///
/// Objectives here are nonnegative, so the search stops early at zero.
pub fn minimize_over_grid_permutations(
    m: usize,
    mut objective: impl FnMut(&GridPermutation) -> f64,
    opts: &PermSearchOptions,
) -> (f64, GridPermutation) {
    if m <= PERM_EXHAUSTIVE_MAX_RESOLUTION {
        exhaustive(m, &mut objective)
    } else {
        local_search(m, &mut objective, opts)
    }
}

/// Heap's algorithm over all m! permutations; first minimum found wins
/// ties, so the result is deterministic.
fn exhaustive(m: usize, objective: &mut impl FnMut(&GridPermutation) -> f64) -> (f64, GridPermutation) {
    let mut perm: Vec<usize> = (0..m).collect();
    let mut counters = vec![0usize; m];
    let eval = |p: &[usize], obj: &mut dyn FnMut(&GridPermutation) -> f64| {
        let phi = GridPermutation::new(p.to_vec()).expect("permutation by construction");
        (obj(&phi), phi)
    };
    let (mut best_val, mut best_phi) = eval(&perm, objective);
    let mut i = 1;
    while i < m && best_val > 0.0 {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            let (v, phi) = eval(&perm, objective);
            if v < best_val {
                best_val = v;
                best_phi = phi;
            }
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    (best_val, best_phi)
}

fn local_search(
    m: usize,
    objective: &mut impl FnMut(&GridPermutation) -> f64,
    opts: &PermSearchOptions,
) -> (f64, GridPermutation) {
    let base = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best_val = f64::INFINITY;
    let mut best_perm: Vec<usize> = (0..m).collect();
    for restart in 0..opts.restarts.max(1) {
        let mut perm: Vec<usize> = (0..m).collect();
        if restart > 0 {
            let mut rng = base.clone();
            rng.set_stream(restart as u64);
            rng.set_word_pos(0);
            shuffle(&mut perm, &mut rng);
        }
        let mut val = objective(&GridPermutation::new(perm.clone()).unwrap());
        for _ in 0..opts.max_sweeps {
            let mut improved = false;
            'sweep: for a in 0..m - 1 {
                for b in a + 1..m {
                    perm.swap(a, b);
                    let v = objective(&GridPermutation::new(perm.clone()).unwrap());
                    if v < val {
                        val = v;
                        improved = true;
                        if val == 0.0 {
                            break 'sweep;
                        }
                    } else {
                        perm.swap(a, b);
                    }
                }
            }
            if !improved || val == 0.0 {
                break;
            }
        }
        if val < best_val {
            best_val = val;
            best_perm = perm;
        }
        if best_val == 0.0 {
            break;
        }
    }
    (best_val, GridPermutation::new(best_perm).unwrap())
}

fn shuffle(perm: &mut [usize], rng: &mut ChaCha8Rng) {
    use rand::Rng;
    for i in (1..perm.len()).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
}
