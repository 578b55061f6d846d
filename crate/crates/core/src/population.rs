//! Population structure: undirected connected graphs, the periodic-lattice
//! constructor, and enumeration of the viable groups that host games.
//!
//! Every player takes part in three kinds of games. It plays one pairwise
//! game per incident edge, one local game per closed neighborhood it belongs
//! to (its own and one per neighbor), and the single global game over the
//! whole population.

use std::collections::VecDeque;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a graph was constructed. Lattice exports rely on the stored
/// dimensions; general graphs only support the generic API.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    PeriodicLattice { width: usize, height: usize },
    General,
}

/// Connected undirected graph with per-node adjacency lists. Immutable after
/// construction, so it can be shared freely across simulation workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationGraph {
    adjacency: Vec<Vec<usize>>,
    topology: Topology,
}

impl PopulationGraph {
    /// Builds a periodic 2-dimensional lattice (a torus) where every node has
    /// the 4 von Neumann neighbors. Nodes are indexed row-major: node
    /// `(row, col)` has index `row * width + col`. Neighbor lists are ordered
    /// left, right, up, down (with wrap-around).
    ///
    /// Both dimensions must be at least 3 so the four neighbors are distinct.
    pub fn periodic_lattice(width: usize, height: usize) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::LatticeTooSmall { width, height });
        }
        let index = |row: usize, col: usize| row * width + col;
        let mut adjacency = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                adjacency.push(vec![
                    index(row, (col + width - 1) % width),
                    index(row, (col + 1) % width),
                    index((row + height - 1) % height, col),
                    index((row + 1) % height, col),
                ]);
            }
        }
        Ok(PopulationGraph {
            adjacency,
            topology: Topology::PeriodicLattice { width, height },
        })
    }

    /// Builds a general graph from an explicit edge list. Neighbor lists are
    /// sorted ascending. Rejects self-loops, duplicate edges, and
    /// disconnected graphs.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::PopulationTooSmall(node_count));
        }
        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in edges {
            for node in [u, v] {
                if node >= node_count {
                    return Err(Error::InvalidNode {
                        index: node,
                        node_count,
                    });
                }
            }
            if u == v {
                return Err(Error::MalformedEdgeList {
                    line: 0,
                    reason: format!("self-loop on node {u}"),
                });
            }
            if adjacency[u].contains(&v) {
                return Err(Error::MalformedEdgeList {
                    line: 0,
                    reason: format!("duplicate edge {u} {v}"),
                });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let graph = PopulationGraph {
            adjacency,
            topology: Topology::General,
        };
        if !graph.is_connected() {
            return Err(Error::DisconnectedGraph);
        }
        Ok(graph)
    }

    /// Parses an edge-list text file: one `u v` pair per line, 0-based
    /// indices. Blank lines and lines starting with `#` are skipped. The node
    /// count is one past the largest index mentioned.
    pub fn from_edge_list_str(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_node = 0usize;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let parse = |token: Option<&str>| -> Result<usize> {
                token
                    .ok_or(())
                    .and_then(|t| t.parse::<usize>().map_err(|_| ()))
                    .map_err(|_| Error::MalformedEdgeList {
                        line: lineno + 1,
                        reason: format!("expected two node indices, got {line:?}"),
                    })
            };
            let u = parse(parts.next())?;
            let v = parse(parts.next())?;
            if parts.next().is_some() {
                return Err(Error::MalformedEdgeList {
                    line: lineno + 1,
                    reason: format!("trailing tokens in {line:?}"),
                });
            }
            max_node = max_node.max(u).max(v);
            edges.push((u, v));
        }
        if edges.is_empty() {
            return Err(Error::MalformedEdgeList {
                line: 0,
                reason: "edge list is empty".to_string(),
            });
        }
        PopulationGraph::from_edges(max_node + 1, &edges).map_err(|e| match e {
            // Re-tag structural errors found after parsing with no line info.
            Error::MalformedEdgeList { reason, .. } => Error::MalformedEdgeList { line: 0, reason },
            other => other,
        })
    }

    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_edge_list_str(&text)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn lattice_dims(&self) -> Option<(usize, usize)> {
        match self.topology {
            Topology::PeriodicLattice { width, height } => Some((width, height)),
            Topology::General => None,
        }
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.node_count() {
            return Err(Error::InvalidNode {
                index: node,
                node_count: self.node_count(),
            });
        }
        Ok(())
    }

    /// The closed neighborhood of `node`: the node itself followed by its
    /// neighbors in adjacency order.
    pub fn closed_neighborhood(&self, node: usize) -> Result<Vec<usize>> {
        self.check_node(node)?;
        let mut members = Vec::with_capacity(self.degree(node) + 1);
        members.push(node);
        members.extend_from_slice(&self.adjacency[node]);
        Ok(members)
    }

    /// All viable groups `node` belongs to: one pairwise group per neighbor,
    /// one closed neighborhood per member of its own closed neighborhood, and
    /// the full population.
    pub fn viable_groups(&self, node: usize) -> Result<ViableGroups> {
        self.check_node(node)?;
        let pairwise = self
            .adjacency[node]
            .iter()
            .map(|&j| [node, j])
            .collect();
        let local = self
            .closed_neighborhood(node)?
            .into_iter()
            .map(|j| self.closed_neighborhood(j))
            .collect::<Result<Vec<_>>>()?;
        Ok(ViableGroups {
            pairwise,
            local,
            global: (0..self.node_count()).collect(),
        })
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    queue.push_back(v);
                }
            }
        }
        visited == n
    }
}

impl fmt::Display for PopulationGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.topology {
            Topology::PeriodicLattice { width, height } => {
                write!(f, "periodic lattice {width}x{height}")
            }
            Topology::General => write!(f, "general graph with {} nodes", self.node_count()),
        }
    }
}

/// The viable groups of one player, split by level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViableGroups {
    /// One 2-node group `{i, j}` per neighbor `j`.
    pub pairwise: Vec<[usize; 2]>,
    /// One closed neighborhood `N(j)` per member `j` of `N(i)`, the focal
    /// node's own neighborhood first.
    pub local: Vec<Vec<usize>>,
    /// The whole population.
    pub global: Vec<usize>,
}

impl ViableGroups {
    /// True when levels collapse into each other, e.g. on complete graphs
    /// where every local game has the same members as the global game. Such
    /// groups are still kept as distinct game instances with their own
    /// profit rates.
    pub fn has_cross_level_overlap(&self) -> bool {
        let global_size = self.global.len();
        self.local.iter().any(|group| {
            group.len() == global_size || self.pairwise.iter().any(|p| group.len() == p.len())
        })
    }
}
