//! Shortest-path routing from labels, plus the BFS oracle it is checked
//! against.
//!
//! Both endpoints climb to their hubs through repeated `father` calls. Across
//! subnets the two chains are joined by the hub–hub edge. Within a subnet the
//! chains share a suffix ending in the hub; the path turns at the deepest
//! shared vertex, or skips it when the two vertices just below it are
//! companions.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::Result;
use crate::graph::{KochGraph, VertexId};
use crate::label::Label;
use crate::labels::{companion, father, validate};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoutePath {
    /// Endpoints inclusive.
    pub hops: Vec<Label>,
    /// Number of `father` and `companion` evaluations spent.
    pub ops_used: u32,
}

impl RoutePath {
    pub fn length(&self) -> usize {
        self.hops.len() - 1
    }
}

fn chain_counted(m: u32, label: &Label, ops: &mut u32) -> Result<Vec<Label>> {
    let mut chain = vec![*label];
    let mut cur = *label;
    while !cur.is_hub() {
        cur = father(m, &cur)?;
        *ops += 1;
        chain.push(cur);
    }
    Ok(chain)
}

/// `[label, father(label), …, hub]`.
pub fn ancestor_chain(m: u32, label: &Label) -> Result<Vec<Label>> {
    chain_counted(m, label, &mut 0)
}

pub fn route(m: u32, t: u32, a: &Label, b: &Label) -> Result<RoutePath> {
    validate(m, t, a)?;
    validate(m, t, b)?;
    let mut ops = 0;
    if a == b {
        return Ok(RoutePath {
            hops: vec![*a],
            ops_used: 0,
        });
    }
    let up = chain_counted(m, a, &mut ops)?;
    let down = chain_counted(m, b, &mut ops)?;

    let hops = if a.subnet() != b.subnet() {
        up.iter().chain(down.iter().rev()).copied().collect()
    } else {
        let shared = up
            .iter()
            .rev()
            .zip(down.iter().rev())
            .take_while(|(x, y)| x == y)
            .count();
        // Position of the meeting vertex in each chain.
        let (ia, ib) = (up.len() - shared, down.len() - shared);
        let through_meeting = if ia == 0 || ib == 0 {
            // One endpoint is an ancestor of the other.
            true
        } else {
            ops += 1;
            companion(&up[ia - 1])? != down[ib - 1]
        };
        let head = if through_meeting {
            &up[..=ia]
        } else {
            &up[..ia]
        };
        head.iter()
            .chain(down[..ib].iter().rev())
            .copied()
            .collect()
    };
    Ok(RoutePath {
        hops,
        ops_used: ops,
    })
}

pub fn distance(m: u32, t: u32, a: &Label, b: &Label) -> Result<usize> {
    route(m, t, a, b).map(|r| r.length())
}

/// Route between two vertex ids of a built graph, as ids.
pub fn route_ids(graph: &KochGraph, s: VertexId, t: VertexId) -> Result<Vec<VertexId>> {
    let r = route(graph.m(), graph.t(), &graph.label(s), &graph.label(t))?;
    r.hops.iter().map(|l| graph.vertex_by_label(l)).collect()
}

/// Single-source BFS distances and shortest-path counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsResult {
    /// `u32::MAX` for unreachable vertices.
    pub dist: Vec<u32>,
    /// Number of distinct shortest paths from the source, saturating.
    pub sigma: Vec<u64>,
}

impl BfsResult {
    pub fn eccentricity(&self) -> u32 {
        self.dist
            .iter()
            .copied()
            .filter(|&d| d != u32::MAX)
            .max()
            .unwrap_or(0)
    }
}

pub fn bfs_distances(graph: &KochGraph, source: VertexId) -> BfsResult {
    bfs_on(graph.adjacency(), source)
}

pub fn bfs_on(adjacency: &[Vec<VertexId>], source: VertexId) -> BfsResult {
    let n = adjacency.len();
    let mut dist = vec![u32::MAX; n];
    let mut sigma = vec![0u64; n];
    let mut queue = VecDeque::with_capacity(n);
    dist[source] = 0;
    sigma[source] = 1;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        for &w in &adjacency[u] {
            if dist[w] == u32::MAX {
                dist[w] = du + 1;
                queue.push_back(w);
            }
            if dist[w] == du + 1 {
                sigma[w] = sigma[w].saturating_add(sigma[u]);
            }
        }
    }
    BfsResult { dist, sigma }
}
