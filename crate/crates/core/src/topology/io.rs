//! Edge-list text format: the first line holds `n`, each following line one
//! `j i` pair (1-based) for an edge `j → i`. Self-loops are implicit and are
//! not written.

use std::fmt::Write;

use super::DirectedGraph;
use crate::error::{Error, Result};

pub fn write_edge_list(g: &DirectedGraph) -> String {
    let mut s = format!("{}\n", g.n());
    for (from, to) in g.edges() {
        writeln!(s, "{} {}", from + 1, to + 1).unwrap();
    }
    s
}

pub fn parse_edge_list(text: &str) -> Result<DirectedGraph> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty edge list".into()))?
        .parse()
        .map_err(|e| Error::Parse(format!("node count: {e}")))?;
    let mut g = DirectedGraph::new(n)?;
    for (lineno, line) in lines.enumerate() {
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("edge line {}: expected two nodes", lineno + 2)))?;
            let v: usize = tok
                .parse()
                .map_err(|e| Error::Parse(format!("edge line {}: {e}", lineno + 2)))?;
            if v == 0 || v > n {
                return Err(Error::Parse(format!("edge line {}: node {v} not in [1, {n}]", lineno + 2)));
            }
            Ok(v - 1)
        };
        let from = next()?;
        let to = next()?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!("edge line {}: trailing tokens", lineno + 2)));
        }
        g.add_edge(from, to)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::generate_ring_plus_random;
    use proptest::prelude::*;

    #[test]
    fn three_ring_text() {
        let g = DirectedGraph::ring(3).unwrap();
        assert_eq!(write_edge_list(&g), "3\n1 2\n2 3\n3 1\n");
    }

    #[test]
    fn bad_inputs() {
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("2\n1 3\n").is_err());
        assert!(parse_edge_list("2\n0 1\n").is_err());
        assert!(parse_edge_list("2\n1\n").is_err());
        assert!(parse_edge_list("2\n1 2 3\n").is_err());
        // listed self-loop is harmless
        assert_eq!(parse_edge_list("2\n1 1\n").unwrap().edge_count(), 0);
    }

    proptest! {
        #[test]
        fn round_trip(n in 1usize..12, frac in 0.0f64..1.0, seed in any::<u64>()) {
            let slots = n * (n - 1) - if n >= 3 { n } else if n == 2 { 2 } else { 0 };
            let extra = (frac * slots as f64) as usize;
            let g = generate_ring_plus_random(n, extra, seed).unwrap();
            prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
        }
    }
}
