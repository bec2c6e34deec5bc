//! Step-function graphons on a uniform grid, simple graphs, and the
//! grid-permutation action.
//!
//! A [`Graphon`] of resolution `m` is the symmetric step function that takes
//! the value `values[i][j]` on the half-open cell
//! `[i/m, (i+1)/m) x [j/m, (j+1)/m)` (0-based indices). All values lie in
//! `[0,1]`; symmetry is enforced by construction, so every instance is a
//! valid graphon. A [`Field`] is the signed, unconstrained analogue used for
//! perturbation directions.
//!
//! Values are immutable after construction and safe to share across threads.

use crate::error::{GraphonLdpError, Result};
use crate::sum::pairwise_sum_by;

/// Slack for clamping floating-point range violations introduced by exact
/// averaging of in-range values.
const RANGE_SLACK: f64 = 1e-12;

/// Symmetric step function `[0,1]^2 -> [0,1]` on a uniform `m x m` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Graphon {
    m: usize,
    /// Row-major `m * m` values; kept exactly symmetric.
    values: Vec<f64>,
}

impl Graphon {
    /// Build from row-major values, validating shape, range and symmetry.
    ///
    /// Range violations up to `1e-12` are clamped (they arise from exact
    /// cell averaging in floating point); larger ones are rejected.
    /// Symmetry must hold exactly.
    pub fn new(m: usize, mut values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(GraphonLdpError::InvalidParameter {
                what: "resolution must be >= 1".into(),
            });
        }
        if values.len() != m * m {
            return Err(GraphonLdpError::SizeMismatch {
                what: format!("expected {} values, got {}", m * m, values.len()),
            });
        }
        for v in values.iter_mut() {
            if !v.is_finite() || *v < -RANGE_SLACK || *v > 1.0 + RANGE_SLACK {
                return Err(GraphonLdpError::Domain {
                    what: format!("cell value {v} outside [0,1]"),
                });
            }
            *v = v.clamp(0.0, 1.0);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if values[i * m + j] != values[j * m + i] {
                    return Err(GraphonLdpError::Domain {
                        what: format!("asymmetric values at ({i},{j})"),
                    });
                }
            }
        }
        Ok(Self { m, values })
    }

    /// Build from nested rows.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(GraphonLdpError::SizeMismatch {
                    what: format!("row {i} has length {}, expected {m}", r.len()),
                });
            }
        }
        Self::new(m, rows.into_iter().flatten().collect())
    }

    /// Fill the upper triangle from `f` (called with `i <= j`) and mirror,
    /// guaranteeing exact symmetry regardless of evaluation order.
    pub fn from_upper(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = f(i, j);
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        Self::new(m, values)
    }

    pub fn constant(m: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GraphonLdpError::Domain {
                what: format!("constant level {p} outside [0,1]"),
            });
        }
        Self::new(m, vec![p; m * m])
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// L1 norm of the step function: `(1/m^2) sum |v|`.
    pub fn l1_norm(&self) -> f64 {
        let mm = self.m * self.m;
        pairwise_sum_by(0, mm, &mut |i| self.values[i].abs()) / mm as f64
    }

    /// L2 norm of the step function: `sqrt((1/m^2) sum v^2)`.
    pub fn l2_norm(&self) -> f64 {
        let mm = self.m * self.m;
        (pairwise_sum_by(0, mm, &mut |i| self.values[i] * self.values[i]) / mm as f64).sqrt()
    }

    /// Cellwise difference as a signed field.
    pub fn sub(&self, other: &Graphon) -> Result<Field> {
        self.check_same_resolution(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field {
            m: self.m,
            values,
        })
    }

    /// Cellwise `self + scale * field`, validated back into `[0,1]`.
    pub fn add_field(&self, field: &Field, scale: f64) -> Result<Graphon> {
        if self.m != field.m {
            return Err(GraphonLdpError::ResolutionMismatch {
                m1: self.m,
                m2: field.m,
            });
        }
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&field.values)
            .map(|(a, d)| a + scale * d)
            .collect();
        Graphon::new(self.m, values).map_err(|e| GraphonLdpError::PerturbationOutOfRange {
            what: e.to_string(),
        })
    }

    pub(crate) fn check_same_resolution(&self, other: &Graphon) -> Result<()> {
        if self.m != other.m {
            return Err(GraphonLdpError::ResolutionMismatch {
                m1: self.m,
                m2: other.m,
            });
        }
        Ok(())
    }
}

/// Signed symmetric step function (no range constraint); perturbation
/// directions and graphon differences live here.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    m: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(m: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != m * m {
            return Err(GraphonLdpError::SizeMismatch {
                what: format!("expected {} values, got {}", m * m, values.len()),
            });
        }
        for i in 0..m {
            for j in (i + 1)..m {
                if values[i * m + j] != values[j * m + i] {
                    return Err(GraphonLdpError::Domain {
                        what: format!("asymmetric values at ({i},{j})"),
                    });
                }
            }
        }
        Ok(Self { m, values })
    }

    pub fn from_upper(m: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let v = f(i, j);
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        Self { m, values }
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn l1_norm(&self) -> f64 {
        let mm = self.m * self.m;
        pairwise_sum_by(0, mm, &mut |i| self.values[i].abs()) / mm as f64
    }

    pub fn l2_norm(&self) -> f64 {
        let mm = self.m * self.m;
        (pairwise_sum_by(0, mm, &mut |i| self.values[i] * self.values[i]) / mm as f64).sqrt()
    }
}

/// Simple undirected graph on `n` labelled vertices, stored as a dense
/// symmetric adjacency with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    /// Build from 0-based edge pairs; self-loops and out-of-range vertices
    /// are rejected, duplicates are idempotent.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(GraphonLdpError::InvalidParameter {
                what: "graph must have at least one vertex".into(),
            });
        }
        let mut adj = vec![false; n * n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphonLdpError::SizeMismatch {
                    what: format!("edge ({u},{v}) out of range for n={n}"),
                });
            }
            if u == v {
                return Err(GraphonLdpError::Domain {
                    what: format!("self-loop at vertex {u}"),
                });
            }
            adj[u * n + v] = true;
            adj[v * n + u] = true;
        }
        Ok(Self { n, adj })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_edges(n, &[])
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    g.adj[u * n + v] = true;
                }
            }
        }
        Ok(g)
    }

    pub(crate) fn set_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v);
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u * self.n + v]
    }

    pub fn edge_count(&self) -> usize {
        let mut c = 0;
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.adj[u * self.n + v] {
                    c += 1;
                }
            }
        }
        c
    }

    /// Edges as 0-based pairs `(u, v)` with `u < v`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.adj[u * self.n + v] {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Bijection of grid indices `{0,..,m-1}`; the block analogue of a
/// measure-preserving relabelling. Restricting to these maps makes every
/// derived quantity an upper bound on its measure-theoretic counterpart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPermutation {
    perm: Vec<usize>,
}

impl GridPermutation {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let m = perm.len();
        let mut seen = vec![false; m];
        for &p in &perm {
            if p >= m || seen[p] {
                return Err(GraphonLdpError::InvalidParameter {
                    what: "permutation is not a bijection".into(),
                });
            }
            seen[p] = true;
        }
        Ok(Self { perm })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            perm: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.perm[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        Self { perm: inv }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }
}

/// The empirical graphon of a graph: resolution `n`, cell `(i,j)` equal to 1
/// exactly when `(i,j)` is an edge.
pub fn empirical_graphon(g: &Graph) -> Graphon {
    let n = g.n();
    Graphon::from_upper(n, |i, j| if g.has_edge(i, j) { 1.0 } else { 0.0 })
        .expect("adjacency is a valid graphon")
}

/// Resolution-`k` step function whose cell `(i,j)` is the exact average of
/// `h` over that cell.
///
/// For `k` dividing (or divided by) `m` the computation uses exact block
/// averages (respectively replication); the general case reduces to
/// overlap-area-weighted finite sums, exact for step functions up to
/// floating-point rounding.
pub fn level_approximant(h: &Graphon, k: usize) -> Result<Graphon> {
    if k == 0 {
        return Err(GraphonLdpError::InvalidParameter {
            what: "approximant level must be >= 1".into(),
        });
    }
    let m = h.resolution();
    if k == m {
        return Ok(h.clone());
    }
    if m % k == 0 {
        // Coarsen: plain average over b x b blocks.
        let b = m / k;
        return Graphon::from_upper(k, |i, j| {
            let s = pairwise_sum_by(0, b * b, &mut |t| {
                let (di, dj) = (t / b, t % b);
                h.value(i * b + di, j * b + dj)
            });
            s / (b * b) as f64
        });
    }
    if k % m == 0 {
        // Refine: replicate cells. Exact: the step function is unchanged.
        let b = k / m;
        return Graphon::from_upper(k, |i, j| h.value(i / b, j / b));
    }
    // General case: 1-D overlap lengths between target and source cells.
    let kf = k as f64;
    let mf = m as f64;
    let mut w = vec![0.0; k * m];
    for i in 0..k {
        let (lo, hi) = (i as f64 / kf, (i + 1) as f64 / kf);
        for u in 0..m {
            let (a, b) = (u as f64 / mf, (u + 1) as f64 / mf);
            let ov = hi.min(b) - lo.max(a);
            if ov > 0.0 {
                w[i * m + u] = ov;
            }
        }
    }
    // t = W * H, result = k^2 * t * W^T, filled on the upper triangle.
    let mut t = vec![0.0; k * m];
    for i in 0..k {
        for v in 0..m {
            t[i * m + v] = pairwise_sum_by(0, m, &mut |u| w[i * m + u] * h.value(u, v));
        }
    }
    Graphon::from_upper(k, |i, j| {
        kf * kf * pairwise_sum_by(0, m, &mut |v| t[i * m + v] * w[j * m + v])
    })
}

/// Relabel grid blocks: `out[i][j] = h[phi(i)][phi(j)]`.
pub fn apply_permutation(h: &Graphon, phi: &GridPermutation) -> Result<Graphon> {
    if phi.len() != h.resolution() {
        return Err(GraphonLdpError::SizeMismatch {
            what: format!(
                "permutation on {} indices applied to resolution {}",
                phi.len(),
                h.resolution()
            ),
        });
    }
    Graphon::from_upper(h.resolution(), |i, j| h.value(phi.apply(i), phi.apply(j)))
}

/// Refine both graphons to the least common multiple of their resolutions.
/// Exact for step functions, so cut distances and rate values computed at
/// the common resolution agree with the originals.
pub fn common_refinement(h1: &Graphon, h2: &Graphon) -> Result<(Graphon, Graphon)> {
    let (m1, m2) = (h1.resolution(), h2.resolution());
    let l = lcm(m1, m2);
    Ok((level_approximant(h1, l)?, level_approximant(h2, l)?))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
