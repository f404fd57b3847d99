//! Simple undirected graphs and the generators used throughout the crate.
//!
//! Nodes are `0..n`. A [`Network`] keeps the dense adjacency matrix, a sorted
//! edge list with `i < j`, and per-node neighbour lists; all three are built
//! together and never mutated afterwards.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    n: usize,
    adjacency: Vec<bool>,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl Network {
    /// Builds a network on `n` nodes from an edge iterator. Duplicate edges and
    /// either orientation collapse to a single undirected edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(Error::InvalidSize("network needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidSize(format!(
                    "edge ({a}, {b}) references a node outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::Precondition(format!("self-loop at node {a}")));
            }
            set.insert((a.min(b), a.max(b)));
        }

        let mut adjacency = vec![false; n * n];
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in &set {
            adjacency[i * n + j] = true;
            adjacency[j * n + i] = true;
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            adjacency,
            edges: set.into_iter().collect(),
            neighbors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    /// `A_ij` as a float, for use in sums.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if self.adjacent(i, j) {
            1.0
        } else {
            0.0
        }
    }

    /// Edges as `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn min_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &self.neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n
    }

    /// Serializes in the edge-list format read by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# nodes: {}\n", self.n);
        for &(i, j) in &self.edges {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }
}

/// The complete graph `K_n`.
pub fn complete_network(n: usize) -> Result<Network> {
    if n == 0 {
        return Err(Error::InvalidSize("complete network needs n >= 1".into()));
    }
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
    Network::from_edges(n, edges)
}

/// The ring `C_n`: node `i` adjacent to `i ± 1 mod n`.
pub fn cycle_network(n: usize) -> Result<Network> {
    if n < 3 {
        return Err(Error::InvalidSize(format!("cycle needs n >= 3, got {n}")));
    }
    circulant_network(n, &[1])
}

/// Circulant graph: `i` adjacent to `i ± s mod n` for every offset `s`.
///
/// An offset of exactly `n/2` (for even `n`) contributes one edge per node
/// rather than two, so `{1, 4}` on eight nodes is 3-regular.
pub fn circulant_network(n: usize, offsets: &[usize]) -> Result<Network> {
    if n < 3 {
        return Err(Error::InvalidSize(format!(
            "circulant needs n >= 3, got {n}"
        )));
    }
    if offsets.is_empty() {
        return Err(Error::Precondition(
            "circulant needs at least one offset".into(),
        ));
    }
    for &s in offsets {
        if s == 0 || s > n / 2 {
            return Err(Error::InvalidOffset { n, offset: s });
        }
    }
    let edges = offsets
        .iter()
        .flat_map(|&s| (0..n).map(move |i| (i, (i + s) % n)));
    Network::from_edges(n, edges)
}

/// `K_n` with the listed non-edges removed.
pub fn complete_minus(n: usize, non_edges: &[(usize, usize)]) -> Result<Network> {
    let removed: BTreeSet<(usize, usize)> = non_edges
        .iter()
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    for &(a, b) in &removed {
        if a == b || b >= n {
            return Err(Error::Precondition(format!("invalid non-edge ({a}, {b})")));
        }
    }
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|e| !removed.contains(e));
    Network::from_edges(n, edges)
}

/// The matching `{(0,1), (2,3), ...}`: removing it from `K_n` leaves minimum
/// degree `n − 2` (one node stays at `n − 1` when `n` is odd).
pub fn pairing_non_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect()
}

/// Reads a whitespace-separated `i j` edge list. Blank lines and lines starting
/// with `#` are skipped; `n` is one more than the largest id seen.
pub fn load_edge_list(text: &str) -> Result<Network> {
    let mut edges = Vec::new();
    let mut max_id = None::<usize>;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut ids = [0usize; 2];
        let mut tokens = line.split_whitespace();
        for slot in &mut ids {
            let tok = tokens.next().ok_or_else(|| Error::Format {
                line: line_no,
                msg: "expected two node ids".into(),
            })?;
            *slot = tok.parse().map_err(|_| Error::Format {
                line: line_no,
                msg: format!("not a node id: {tok:?}"),
            })?;
        }
        if tokens.next().is_some() {
            return Err(Error::Format {
                line: line_no,
                msg: "expected exactly two node ids".into(),
            });
        }
        let [a, b] = ids;
        if a == b {
            return Err(Error::Format {
                line: line_no,
                msg: format!("self-loop at node {a}"),
            });
        }
        max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
        edges.push((a, b));
    }
    let n = max_id.map(|m| m + 1).ok_or(Error::Format {
        line: 0,
        msg: "edge list contains no edges".into(),
    })?;
    Network::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_well_formed(net: &Network) {
        let n = net.n();
        for i in 0..n {
            assert!(!net.adjacent(i, i));
            for j in 0..n {
                assert_eq!(net.adjacent(i, j), net.adjacent(j, i));
            }
            let row: usize = (0..n).filter(|&j| net.adjacent(i, j)).count();
            assert_eq!(row, net.degree(i));
        }
        let from_matrix: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| net.adjacent(i, j))
            .collect();
        assert_eq!(from_matrix, net.edges());
    }

    #[test]
    fn complete_sizes() {
        let k3 = complete_network(3).unwrap();
        assert_eq!(k3.edges().len(), 3);
        assert_eq!(k3.degrees(), vec![2, 2, 2]);
        assert_eq!(complete_network(1).unwrap().edges().len(), 0);
        let k8 = complete_network(8).unwrap();
        assert_eq!(k8.edges().len(), 28);
        assert_eq!(k8.min_degree(), 7);
        assert_well_formed(&k8);
        assert!(matches!(complete_network(0), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn cycles() {
        let c6 = cycle_network(6).unwrap();
        assert_eq!(c6.edges().len(), 6);
        assert!(c6.degrees().iter().all(|&d| d == 2));
        assert_eq!(
            cycle_network(3).unwrap().edges(),
            complete_network(3).unwrap().edges()
        );
        assert_eq!(
            cycle_network(4).unwrap().edges(),
            &[(0, 1), (0, 3), (1, 2), (2, 3)]
        );
        assert!(matches!(cycle_network(2), Err(Error::InvalidSize(_))));
    }

    #[test]
    fn circulants() {
        assert_eq!(
            circulant_network(6, &[1]).unwrap(),
            cycle_network(6).unwrap()
        );

        let net = circulant_network(8, &[1, 4]).unwrap();
        // brute-force count of pairs whose ring distance is 1 or 4
        let expected = (0..8)
            .flat_map(|i| (i + 1..8).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let d = (j - i).min(8 - (j - i));
                d == 1 || d == 4
            })
            .count();
        assert_eq!(net.edges().len(), expected);
        assert_eq!(expected, 12);
        assert!(net.degrees().iter().all(|&d| d == 3));
        assert_well_formed(&net);

        let net = circulant_network(10, &[1, 2]).unwrap();
        assert_eq!(net.edges().len(), 20);
        assert!(net.degrees().iter().all(|&d| d == 4));

        assert_eq!(
            circulant_network(8, &[5]),
            Err(Error::InvalidOffset { n: 8, offset: 5 })
        );
        assert!(circulant_network(8, &[0]).is_err());
    }

    #[test]
    fn near_complete() {
        let net = complete_minus(7, &pairing_non_edges(7)).unwrap();
        assert_eq!(net.min_degree(), 5);
        assert_eq!(net.max_degree(), 6);
        assert!(!net.adjacent(2, 3));
    }

    #[test]
    fn edge_list_parsing() {
        let path = load_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(path.n(), 3);
        assert_eq!(path.edges(), &[(0, 1), (1, 2)]);

        let single = load_edge_list("# c\n0 1\n0 1\n").unwrap();
        assert_eq!(single.edges(), &[(0, 1)]);

        let crlf = load_edge_list("0 1\r\n\r\n2\t1\r\n").unwrap();
        assert_eq!(crlf.edges(), &[(0, 1), (1, 2)]);

        assert!(matches!(
            load_edge_list("0 0\n"),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(matches!(load_edge_list("0 x\n"), Err(Error::Format { .. })));
        assert!(matches!(
            load_edge_list("0 1 2\n"),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            load_edge_list("1.5 2\n"),
            Err(Error::Format { .. })
        ));
        assert!(load_edge_list("# nothing\n").is_err());
    }

    #[test]
    fn isolated_nodes_allowed() {
        let net = load_edge_list("0 3\n").unwrap();
        assert_eq!(net.n(), 4);
        assert!(!net.is_connected());
        assert_eq!(net.degree(1), 0);
    }
}
