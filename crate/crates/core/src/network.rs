//! Binary network with out-neighbor lists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A simple binary network on `n` units. Row `i` of the adjacency relation
/// lists the out-neighbors of `i`; undirected networks store both directions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Network {
    n: usize,
    directed: bool,
    neighbors: Vec<Vec<usize>>,
}

impl Network {
    /// Network with no links.
    pub fn empty(n: usize, directed: bool) -> Self {
        Network {
            n,
            directed,
            neighbors: vec![Vec::new(); n],
        }
    }

    /// Builds from a 0-indexed edge list. Undirected edges are mirrored and
    /// duplicates collapse; self-links are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], directed: bool) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(src, dst) in edges {
            if src >= n || dst >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({src}, {dst}) references a unit outside 0..{n}"
                )));
            }
            if src == dst {
                return Err(Error::InvalidInput(format!("self-link at unit {src}")));
            }
            neighbors[src].push(dst);
            if !directed {
                neighbors[dst].push(src);
            }
        }
        for row in &mut neighbors {
            row.sort_unstable();
            row.dedup();
        }
        Ok(Network {
            n,
            directed,
            neighbors,
        })
    }

    /// Builds from a dense 0/1 matrix.
    pub fn from_dense(rows: &[Vec<u8>], directed: bool) -> Result<Self> {
        let n = rows.len();
        let mut neighbors = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "adjacency row length",
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &g) in row.iter().enumerate() {
                match g {
                    0 => {}
                    1 if i == j => {
                        return Err(Error::InvalidInput(format!("self-link at unit {i}")))
                    }
                    1 => neighbors[i].push(j),
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "adjacency entry ({i}, {j}) is {other}, expected 0 or 1"
                        )))
                    }
                }
            }
        }
        if !directed {
            for i in 0..n {
                for &j in &neighbors[i] {
                    if rows[j][i] != 1 {
                        return Err(Error::InvalidInput(format!(
                            "undirected adjacency is not symmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(Network {
            n,
            directed,
            neighbors,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Out-neighbors of `i`, sorted ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn isolated_units(&self) -> Vec<usize> {
        (0..self.n).filter(|&i| self.neighbors[i].is_empty()).collect()
    }

    /// Directed edge list; undirected networks list each link once with `src < dst`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.neighbors.iter().enumerate() {
            for &j in row {
                if self.directed || i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut rows = vec![vec![0u8; self.n]; self.n];
        for (i, row) in self.neighbors.iter().enumerate() {
            for &j in row {
                rows[i][j] = 1;
            }
        }
        rows
    }

    /// Same network with units relabelled so that old unit `perm[k]` becomes unit `k`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let neighbors = perm
            .iter()
            .map(|&old| {
                let mut row: Vec<usize> = self.neighbors[old].iter().map(|&j| inverse[j]).collect();
                row.sort_unstable();
                row
            })
            .collect();
        Network {
            n: self.n,
            directed: self.directed,
            neighbors,
        }
    }
}
