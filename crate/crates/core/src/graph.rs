//! Interaction graphs and neighborhood structures.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Undirected simple graph on modes `0..m`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InteractionGraph {
    pub m: usize,
    /// Sorted adjacency lists.
    pub adjacency: Vec<Vec<usize>>,
}

impl InteractionGraph {
    pub fn edgeless(m: usize) -> Self {
        Self { m, adjacency: vec![Vec::new(); m] }
    }

    pub fn from_edges(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        const OP: &str = "locality::InteractionGraph";
        let mut g = Self::edgeless(m);
        for &(i, j) in edges {
            if i >= m || j >= m {
                return Err(Error::DimensionMismatch { op: OP, expected: m, got: i.max(j) + 1 });
            }
            if i == j {
                return Err(Error::InvalidRange { op: OP, detail: "self-loop" });
            }
            g.add_edge(i, j);
        }
        Ok(g)
    }

    /// Validates adjacency lists (symmetric, no self-loops) and sorts them.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let m = adjacency.len();
        let mut edges = Vec::new();
        for (i, nb) in adjacency.iter().enumerate() {
            for &j in nb {
                edges.push((i, j));
            }
        }
        let g = Self::from_edges(m, &edges)?;
        for (i, nb) in adjacency.iter().enumerate() {
            for &j in nb {
                if !adjacency[j].contains(&i) {
                    return Err(Error::InvalidRange { op: "locality::InteractionGraph", detail: "adjacency not symmetric" });
                }
            }
        }
        Ok(g)
    }

    pub fn path(m: usize) -> Self {
        let e: Vec<_> = (1..m).map(|i| (i - 1, i)).collect();
        Self::from_edges(m, &e).expect("valid path")
    }

    pub fn cycle(m: usize) -> Self {
        let mut g = Self::path(m);
        if m > 2 {
            g.add_edge(0, m - 1);
        }
        g
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        if let Err(p) = self.adjacency[i].binary_search(&j) {
            self.adjacency[i].insert(p, j);
        }
        if let Err(p) = self.adjacency[j].binary_search(&i) {
            self.adjacency[j].insert(p, i);
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges (i, j) with i < j in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (i, nb) in self.adjacency.iter().enumerate() {
            e.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        e
    }

    /// Maximal vertex degree Δ.
    pub fn degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// BFS distances from `i` (`None` when unreachable).
    pub fn distances(&self, i: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.m];
        let mut queue = VecDeque::new();
        dist[i] = Some(0);
        queue.push_back(i);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Random tree with every degree at most `max_deg` (≥ 2 for m > 2).
    pub fn random_tree<R: Rng + ?Sized>(m: usize, max_deg: usize, rng: &mut R) -> Self {
        let mut g = Self::edgeless(m);
        for v in 1..m {
            let open: Vec<usize> = (0..v).filter(|&u| g.adjacency[u].len() < max_deg.max(1)).collect();
            let u = if open.is_empty() { v - 1 } else { open[rng.random_range(0..open.len())] };
            g.add_edge(u, v);
        }
        g
    }

    /// Random graph with maximal degree at most `max_deg`: candidate pairs are
    /// visited in random order and kept with probability `p` while degrees allow.
    pub fn random_bounded_degree<R: Rng + ?Sized>(m: usize, max_deg: usize, p: f64, rng: &mut R) -> Self {
        let mut pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        pairs.shuffle(rng);
        let mut g = Self::edgeless(m);
        for (i, j) in pairs {
            if g.adjacency[i].len() < max_deg && g.adjacency[j].len() < max_deg && rng.random::<f64>() < p {
                g.add_edge(i, j);
            }
        }
        g
    }
}

/// Reflexive, symmetric family of vertex sets 𝒩ᵢ.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NeighborhoodStructure {
    /// Sorted sets, one per vertex.
    pub sets: Vec<Vec<usize>>,
}

impl NeighborhoodStructure {
    /// Validates i ∈ 𝒩ᵢ and j ∈ 𝒩ᵢ ⇒ i ∈ 𝒩ⱼ.
    pub fn new(mut sets: Vec<Vec<usize>>) -> Result<Self> {
        const OP: &str = "locality::NeighborhoodStructure";
        let m = sets.len();
        for s in sets.iter_mut() {
            s.sort_unstable();
            s.dedup();
        }
        for (i, s) in sets.iter().enumerate() {
            if s.binary_search(&i).is_err() {
                return Err(Error::InvalidRange { op: OP, detail: "vertex missing from its own neighborhood" });
            }
            for &j in s {
                if j >= m {
                    return Err(Error::DimensionMismatch { op: OP, expected: m, got: j + 1 });
                }
                if sets[j].binary_search(&i).is_err() {
                    return Err(Error::InvalidRange { op: OP, detail: "neighborhood structure not symmetric" });
                }
            }
        }
        Ok(Self { sets })
    }

    pub fn m(&self) -> usize {
        self.sets.len()
    }

    pub fn full(m: usize) -> Self {
        Self { sets: vec![(0..m).collect(); m] }
    }

    pub fn singletons(m: usize) -> Self {
        Self { sets: (0..m).map(|i| vec![i]).collect() }
    }

    /// ξ = maxᵢ |𝒩ᵢ|.
    pub fn xi(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.sets[i].binary_search(&j).is_ok()
    }
}

/// 𝒩(l)ᵢ = vertices at graph distance at most `l` from i.
pub fn l_neighborhoods(graph: &InteractionGraph, l: usize) -> NeighborhoodStructure {
    let sets = (0..graph.m)
        .map(|i| {
            graph
                .distances(i)
                .iter()
                .enumerate()
                .filter(|(_, d)| matches!(d, Some(d) if *d <= l))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    NeighborhoodStructure { sets }
}
