//! Plain-text file formats.
//!
//! Graphon matrix file: line 1 holds the resolution `m`; the next `m` lines
//! hold `m` space-separated decimal values each. The parser enforces
//! symmetry within `1e-12` and symmetrizes by averaging.
//!
//! Graph file: line 1 holds the vertex count `n`; every following non-empty
//! line holds one edge `u v` with 1-based endpoints.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{GraphonLdpError, Result};
use crate::graphon::{Graph, Graphon};

const SYMMETRY_TOL: f64 = 1e-12;

pub fn read_graphon(path: impl AsRef<Path>) -> Result<Graphon> {
    parse_graphon(BufReader::new(File::open(path)?))
}

pub fn parse_graphon(reader: impl Read) -> Result<Graphon> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))??;
    let m: usize = first
        .trim()
        .parse()
        .map_err(|_| parse_err(1, "expected resolution m"))?;
    if m == 0 {
        return Err(parse_err(1, "resolution must be >= 1"));
    }
    let mut values = Vec::with_capacity(m * m);
    for row in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| parse_err(row + 2, "missing matrix row"))??;
        let mut count = 0;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(row + 2, &format!("bad value {tok:?}")))?;
            values.push(v);
            count += 1;
        }
        if count != m {
            return Err(parse_err(
                row + 2,
                &format!("expected {m} values, found {count}"),
            ));
        }
    }
    // Enforce symmetry within tolerance, then symmetrize by averaging.
    for i in 0..m {
        for j in (i + 1)..m {
            let a = values[i * m + j];
            let b = values[j * m + i];
            if (a - b).abs() > SYMMETRY_TOL {
                return Err(parse_err(
                    i + 2,
                    &format!("asymmetry {:.3e} at ({},{}) exceeds 1e-12", (a - b).abs(), i, j),
                ));
            }
            let avg = 0.5 * (a + b);
            values[i * m + j] = avg;
            values[j * m + i] = avg;
        }
    }
    Graphon::new(m, values)
}

pub fn write_graphon(h: &Graphon, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_graphon_to(h, &mut w)
}

pub fn write_graphon_to(h: &Graphon, w: &mut impl Write) -> Result<()> {
    let m = h.resolution();
    writeln!(w, "{m}")?;
    for i in 0..m {
        for j in 0..m {
            if j > 0 {
                write!(w, " ")?;
            }
            // Shortest round-trip representation keeps read(write(h)) exact.
            write!(w, "{}", h.value(i, j))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(BufReader::new(File::open(path)?))
}

pub fn parse_graph(reader: impl Read) -> Result<Graph> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))??;
    let n: usize = first
        .trim()
        .parse()
        .map_err(|_| parse_err(1, "expected vertex count n"))?;
    let mut edges = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (u, v) = match (it.next(), it.next(), it.next()) {
            (Some(u), Some(v), None) => (u, v),
            _ => return Err(parse_err(idx + 2, "expected `u v`")),
        };
        let u: usize = u
            .parse()
            .map_err(|_| parse_err(idx + 2, "bad vertex id"))?;
        let v: usize = v
            .parse()
            .map_err(|_| parse_err(idx + 2, "bad vertex id"))?;
        if u == 0 || v == 0 {
            return Err(parse_err(idx + 2, "vertex ids are 1-based"));
        }
        edges.push((u - 1, v - 1));
    }
    Graph::from_edges(n, &edges)
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_graph_to(g, &mut w)
}

pub fn write_graph_to(g: &Graph, w: &mut impl Write) -> Result<()> {
    writeln!(w, "{}", g.n())?;
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", u + 1, v + 1)?;
    }
    Ok(())
}

fn parse_err(line: usize, what: &str) -> GraphonLdpError {
    GraphonLdpError::Parse {
        line,
        what: what.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graphon_roundtrip_is_exact() {
        let h = Graphon::from_upper(5, |i, j| ((i * 7 + j * 3) as f64 % 11.0) / 11.0).unwrap();
        let mut buf = Vec::new();
        write_graphon_to(&h, &mut buf).unwrap();
        let back = parse_graphon(&buf[..]).unwrap();
        assert_eq!(h, back);
    }

    #[test]
    fn parser_symmetrizes_small_asymmetry() {
        let text = "2\n0.5 0.3000000000001\n0.3 0.5\n";
        let h = parse_graphon(text.as_bytes()).unwrap();
        assert_eq!(h.value(0, 1), h.value(1, 0));
        assert!((h.value(0, 1) - 0.30000000000005).abs() < 1e-15);
    }

    #[test]
    fn parser_rejects_large_asymmetry() {
        let text = "2\n0.5 0.4\n0.3 0.5\n";
        assert!(parse_graphon(text.as_bytes()).is_err());
    }

    #[test]
    fn parser_rejects_bad_shapes() {
        assert!(parse_graphon("0\n".as_bytes()).is_err());
        assert!(parse_graphon("2\n0.5 0.5\n".as_bytes()).is_err());
        assert!(parse_graphon("2\n0.5\n0.5 0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn graph_roundtrip_one_based() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3), (0, 3)]).unwrap();
        let mut buf = Vec::new();
        write_graph_to(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("4\n1 2\n"));
        let back = parse_graph(&buf[..]).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn graph_parser_rejects_zero_based_and_loops() {
        assert!(parse_graph("3\n0 1\n".as_bytes()).is_err());
        assert!(parse_graph("3\n2 2\n".as_bytes()).is_err());
    }
}
