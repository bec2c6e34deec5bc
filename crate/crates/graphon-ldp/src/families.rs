//! Built-in reference graphon families.
//!
//! Two families cover the test surface: the constant graphon `p` and the
//! rank-one family `r(x,y) = nu(x) nu(y)` with `nu` a polynomial given by a
//! coefficient list. Rank-one references are discretized by per-cell
//! Gauss-Legendre quadrature of order 5, which is exact for polynomial
//! degree up to 9, so cell values are exact cell averages.

use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{GraphonLdpError, Result};
use crate::graphon::Graphon;
use crate::io::read_graphon;

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Constant graphon `r == p`.
pub fn constant(m: usize, p: f64) -> Result<Graphon> {
    Graphon::constant(m, p)
}

/// Rank-one graphon with `nu(x) = coeffs[0] + coeffs[1] x + ...`, cell
/// values `nu_bar[i] * nu_bar[j]` with `nu_bar` the exact per-cell mean.
pub fn rank_one(m: usize, coeffs: &[f64]) -> Result<Graphon> {
    if coeffs.is_empty() {
        return Err(GraphonLdpError::InvalidParameter {
            what: "rank-one family needs at least one coefficient".into(),
        });
    }
    let nu_bar: Vec<f64> = (0..m).map(|i| cell_mean(coeffs, i, m)).collect();
    Graphon::from_upper(m, |i, j| nu_bar[i] * nu_bar[j]).map_err(|e| {
        GraphonLdpError::InvalidParameter {
            what: format!("rank-one family leaves [0,1]: {e}"),
        }
    })
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Mean of the polynomial over cell `[i/m, (i+1)/m)`.
fn cell_mean(coeffs: &[f64], i: usize, m: usize) -> f64 {
    let lo = i as f64 / m as f64;
    let hi = (i + 1) as f64 / m as f64;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for q in 0..5 {
        acc += GL5_WEIGHTS[q] * horner(coeffs, mid + half * GL5_NODES[q]);
    }
    0.5 * acc
}

/// A reference graphon source: builtin family or a matrix file.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    Constant(f64),
    RankOne(Vec<f64>),
    File(PathBuf),
}

impl ReferenceSpec {
    /// Materialize at resolution `m`. File references carry their own
    /// resolution; `m` is ignored for them.
    pub fn build(&self, m: usize) -> Result<Graphon> {
        match self {
            ReferenceSpec::Constant(p) => constant(m, *p),
            ReferenceSpec::RankOne(coeffs) => rank_one(m, coeffs),
            ReferenceSpec::File(path) => read_graphon(path),
        }
    }
}

impl FromStr for ReferenceSpec {
    type Err = GraphonLdpError;

    /// `builtin:const:<p>`, `builtin:rank1:<c0,c1,...>`, or a file path.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("builtin:") {
            if let Some(p) = rest.strip_prefix("const:") {
                let p: f64 = p.parse().map_err(|_| GraphonLdpError::InvalidParameter {
                    what: format!("bad constant level in {s}"),
                })?;
                return Ok(ReferenceSpec::Constant(p));
            }
            if let Some(cs) = rest.strip_prefix("rank1:") {
                let coeffs: std::result::Result<Vec<f64>, _> =
                    cs.split(',').map(|t| t.trim().parse::<f64>()).collect();
                let coeffs = coeffs.map_err(|_| GraphonLdpError::InvalidParameter {
                    what: format!("bad coefficient list in {s}"),
                })?;
                return Ok(ReferenceSpec::RankOne(coeffs));
            }
            return Err(GraphonLdpError::InvalidParameter {
                what: format!("unknown builtin family {s}"),
            });
        }
        Ok(ReferenceSpec::File(PathBuf::from(s)))
    }
}
