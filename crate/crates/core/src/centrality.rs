//! Shortest-path betweenness of vertices and edges.
//!
//! The exact values come from dependency accumulation over every source
//! (fractional counting, so ties would be split correctly). Alongside them
//! this module evaluates the printed closed forms for vertex and edge
//! betweenness verbatim and the descendant-times-rest composition, so a
//! report can show where each one departs from the exact numbers.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{KochGraph, VertexId};
use crate::label::Label;

/// Sources per accumulation chunk. Fixed so the floating-point reduction order
/// does not depend on the thread count.
const CHUNK_TARGET: usize = 64;

/// Unordered-pair normalizer `(N-1)(N-2)/2`.
pub fn pair_normalizer(n: usize) -> f64 {
    let n = n as f64;
    (n - 1.0) * (n - 2.0) / 2.0
}

/// Exact betweenness of every vertex and edge, normalized by `(N-1)(N-2)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Betweenness {
    pub vertex: Vec<f64>,
    /// Edges `(u, v)`, `u < v`, ascending; parallel to `edge`.
    pub edges: Vec<(VertexId, VertexId)>,
    pub edge: Vec<f64>,
}

/// Accumulates shortest-path dependencies from every source of an arbitrary
/// undirected graph given by sorted adjacency lists.
pub fn exact_betweenness_on(adjacency: &[Vec<VertexId>]) -> Betweenness {
    let n = adjacency.len();
    let edges: Vec<(VertexId, VertexId)> = adjacency
        .iter()
        .enumerate()
        .flat_map(|(u, ns)| {
            ns.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
        .collect();
    let slot_edge = slot_edge_ids(adjacency, &edges);

    let chunk = CHUNK_TARGET.max(n.div_ceil(64));
    let sources: Vec<usize> = (0..n).collect();
    let partials: Vec<(Vec<f64>, Vec<f64>)> = sources
        .par_chunks(chunk)
        .map(|block| {
            let mut acc = Accumulator::new(n, edges.len());
            for &s in block {
                acc.run(adjacency, &slot_edge, s);
            }
            (acc.vertex, acc.edge)
        })
        .collect();

    let mut vertex = vec![0.0; n];
    let mut edge = vec![0.0; edges.len()];
    for (pv, pe) in partials {
        vertex.iter_mut().zip(pv).for_each(|(a, b)| *a += b);
        edge.iter_mut().zip(pe).for_each(|(a, b)| *a += b);
    }
    // Each unordered pair was seen from both ends.
    let scale = if n >= 3 {
        0.5 / pair_normalizer(n)
    } else {
        0.0
    };
    vertex.iter_mut().for_each(|x| *x *= scale);
    edge.iter_mut().for_each(|x| *x *= scale);
    Betweenness {
        vertex,
        edges,
        edge,
    }
}

fn slot_edge_ids(adjacency: &[Vec<VertexId>], edges: &[(VertexId, VertexId)]) -> Vec<Vec<usize>> {
    adjacency
        .iter()
        .enumerate()
        .map(|(u, ns)| {
            ns.iter()
                .map(|&v| {
                    let key = (u.min(v), u.max(v));
                    edges
                        .binary_search(&key)
                        .expect("edge list covers adjacency")
                })
                .collect()
        })
        .collect()
}

struct Accumulator {
    vertex: Vec<f64>,
    edge: Vec<f64>,
    dist: Vec<u32>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    order: Vec<VertexId>,
}

impl Accumulator {
    fn new(n: usize, e: usize) -> Self {
        Accumulator {
            vertex: vec![0.0; n],
            edge: vec![0.0; e],
            dist: vec![u32::MAX; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            order: Vec::with_capacity(n),
        }
    }

    fn run(&mut self, adjacency: &[Vec<VertexId>], slot_edge: &[Vec<usize>], s: VertexId) {
        self.dist.fill(u32::MAX);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.order.clear();

        self.dist[s] = 0;
        self.sigma[s] = 1.0;
        self.order.push(s);
        let mut head = 0;
        while head < self.order.len() {
            let u = self.order[head];
            head += 1;
            let du = self.dist[u];
            for &w in &adjacency[u] {
                if self.dist[w] == u32::MAX {
                    self.dist[w] = du + 1;
                    self.order.push(w);
                }
                if self.dist[w] == du + 1 {
                    self.sigma[w] += self.sigma[u];
                }
            }
        }

        for &w in self.order.iter().rev() {
            let dw = self.dist[w];
            if dw == 0 {
                continue;
            }
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for (k, &v) in adjacency[w].iter().enumerate() {
                if self.dist[v] + 1 == dw {
                    let c = self.sigma[v] * coeff;
                    self.edge[slot_edge[w][k]] += c;
                    self.delta[v] += c;
                }
            }
            self.vertex[w] += self.delta[w];
        }
    }
}

pub fn exact_vertex_betweenness(graph: &KochGraph) -> Vec<f64> {
    exact_betweenness_on(graph.adjacency()).vertex
}

pub fn exact_edge_betweenness(graph: &KochGraph) -> Vec<((VertexId, VertexId), f64)> {
    let b = exact_betweenness_on(graph.adjacency());
    b.edges.into_iter().zip(b.edge).collect()
}

fn check_birth(t: u32, birth: u32) -> Result<()> {
    if birth > t {
        return Err(Error::Argument(format!(
            "birth step {birth} exceeds t = {t}"
        )));
    }
    Ok(())
}

/// Number of vertices hanging below a vertex born at `birth`:
/// `(2(3m+1)^(t-birth) - 2) / 3`.
pub fn descendant_count(m: u32, t: u32, birth: u32) -> Result<u128> {
    check_birth(t, birth)?;
    let q = 3 * u128::from(m) + 1;
    let p = q
        .checked_pow(t - birth)
        .ok_or_else(|| Error::Argument("descendant count overflows".into()))?;
    Ok((2 * p - 2) / 3)
}

/// Closed-form vertex betweenness exactly as printed (a report input, not
/// ground truth).
pub fn paper_vertex_betweenness(m: u32, t: u32, birth: u32) -> Result<f64> {
    check_birth(t, birth)?;
    let q = 3.0 * f64::from(m) + 1.0;
    let qt = q.powi(t as i32);
    let qti = q.powi((t - birth) as i32);
    let num = 2.0 * (q.powi(t as i32 - 1) - 1.0) * (3.0 * qt - qti - 1.0);
    let den = 3.0 * qt * (2.0 * qt - 1.0);
    Ok(num / den)
}

/// Closed-form edge betweenness exactly as printed; `birth` is the birth
/// step of the lower-degree endpoint.
pub fn paper_edge_betweenness(m: u32, t: u32, birth: u32) -> Result<f64> {
    check_birth(t, birth)?;
    let q = 3.0 * f64::from(m) + 1.0;
    let qt = q.powi(t as i32);
    let qti = q.powi((t - birth) as i32);
    let num = (2.0 * qti + 1.0) * (6.0 * qt - 4.0 * qti + 1.0);
    let den = 18.0 * qt * (2.0 * qt - 1.0);
    Ok(num / den)
}

/// Edge betweenness from the printed pair-count definition
/// `(N_el · N_other / 2) / ((N-1)(N-2)/2)` with `N_el = (2(3m+1)^(t-1) + 1) / 3`
/// and `N_other = N - 2 N_el`, as printed (independent of the edge).
pub fn paper_edge_betweenness_pair_count(m: u32, t: u32) -> Result<f64> {
    let n = crate::graph::vertex_count(m, t)? as f64;
    let q = 3.0 * f64::from(m) + 1.0;
    let n_el = (2.0 * q.powi(t as i32 - 1) + 1.0) / 3.0;
    let n_other = n - 2.0 * n_el;
    Ok(n_el * n_other / 2.0 / pair_normalizer(n as usize))
}

/// Descendants times everyone else, over the unordered-pair normalizer.
/// Ignores paths joining two descendants through the vertex.
pub fn firstorder_vertex_betweenness(m: u32, t: u32, birth: u32) -> Result<f64> {
    let nl = descendant_count(m, t, birth)?;
    let n = crate::graph::vertex_count(m, t)?;
    let through = nl * (n - nl - 1);
    Ok(through as f64 / pair_normalizer(n as usize))
}

/// Son pairs from different groups of one step's `m` groups: `2m(m-1)`.
/// For a vertex born at `t-1` these are exactly the pairs the first-order
/// composition leaves out.
pub fn cross_group_pairs(m: u32) -> u64 {
    2 * u64::from(m) * (u64::from(m) - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeClass {
    FatherChild,
    Companion,
    HubHub,
}

impl EdgeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeClass::FatherChild => "father-child",
            EdgeClass::Companion => "companion",
            EdgeClass::HubHub => "hub-hub",
        }
    }
}

pub fn classify_edge(graph: &KochGraph, u: VertexId, v: VertexId) -> EdgeClass {
    let (a, b) = (graph.vertex(u), graph.vertex(v));
    if a.father.is_none() && b.father.is_none() {
        EdgeClass::HubHub
    } else if a.companion == Some(v) {
        EdgeClass::Companion
    } else {
        debug_assert!(a.father == Some(v) || b.father == Some(u));
        EdgeClass::FatherChild
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRow {
    pub id: VertexId,
    pub label: Label,
    pub birth: u32,
    pub degree: usize,
    pub exact: f64,
    pub paper: f64,
    pub firstorder: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRow {
    pub u: VertexId,
    pub v: VertexId,
    pub u_label: Label,
    pub v_label: Label,
    pub class: EdgeClass,
    /// Birth step of the later-born endpoint.
    pub birth: u32,
    pub exact: f64,
    pub paper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityReport {
    pub m: u32,
    pub t: u32,
    pub normalizer: f64,
    pub vertices: Vec<VertexRow>,
    pub edges: Vec<EdgeRow>,
}

/// Absolute tolerance when deciding whether a closed form agrees with the
/// exact value.
pub const MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityAudit {
    pub eq9_matches: bool,
    pub eq12_matches: bool,
    pub max_rel_gap: f64,
    pub gamma_hat: Option<f64>,
}

impl CentralityReport {
    pub fn compute(graph: &KochGraph) -> Result<Self> {
        let (m, t) = (graph.m(), graph.t());
        let b = exact_betweenness_on(graph.adjacency());
        let mut vertices = Vec::with_capacity(graph.num_vertices());
        for rec in graph.vertices() {
            vertices.push(VertexRow {
                id: rec.id,
                label: rec.label,
                birth: rec.birth_step,
                degree: graph.degree(rec.id),
                exact: b.vertex[rec.id],
                paper: paper_vertex_betweenness(m, t, rec.birth_step)?,
                firstorder: firstorder_vertex_betweenness(m, t, rec.birth_step)?,
            });
        }
        let mut edges = Vec::with_capacity(b.edges.len());
        for (&(u, v), &exact) in b.edges.iter().zip(&b.edge) {
            let birth = graph.vertex(u).birth_step.max(graph.vertex(v).birth_step);
            edges.push(EdgeRow {
                u,
                v,
                u_label: graph.label(u),
                v_label: graph.label(v),
                class: classify_edge(graph, u, v),
                birth,
                exact,
                paper: paper_edge_betweenness(m, t, birth)?,
            });
        }
        Ok(CentralityReport {
            m,
            t,
            normalizer: pair_normalizer(graph.num_vertices()),
            vertices,
            edges,
        })
    }

    /// `(birth, min, max)` of exact vertex betweenness per birth step.
    pub fn birth_step_spread(&self) -> Vec<(u32, f64, f64)> {
        (0..=self.t)
            .map(|i| {
                let vals = self
                    .vertices
                    .iter()
                    .filter(|r| r.birth == i)
                    .map(|r| r.exact);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
                (i, lo, hi)
            })
            .collect()
    }

    /// Exact betweenness of one representative per birth step.
    pub fn per_birth_exact(&self) -> Vec<f64> {
        (0..=self.t)
            .map(|i| {
                self.vertices
                    .iter()
                    .find(|r| r.birth == i)
                    .map(|r| r.exact)
                    .expect("every birth step has vertices")
            })
            .collect()
    }

    pub fn audit(&self) -> CentralityAudit {
        let close = |a: f64, b: f64| (a - b).abs() <= MATCH_TOL * b.abs().max(1.0);
        let eq9_matches = self.vertices.iter().all(|r| close(r.paper, r.exact));
        let eq12_matches = self.edges.iter().all(|r| close(r.paper, r.exact));
        let max_rel_gap = self
            .vertices
            .iter()
            .map(|r| (r.paper, r.exact))
            .chain(self.edges.iter().map(|r| (r.paper, r.exact)))
            .filter(|&(_, e)| e > 0.0)
            .map(|(p, e)| (p - e).abs() / e)
            .fold(0.0, f64::max);
        CentralityAudit {
            eq9_matches,
            eq12_matches,
            max_rel_gap,
            gamma_hat: scaling_fit(self).ok().map(|f| f.gamma_hat),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub gamma_hat: f64,
    pub intercept: f64,
    /// `(ln degree, ln g)` per birth step used.
    pub points: Vec<(f64, f64)>,
    pub residuals: Vec<f64>,
}

/// Least-squares line through `points`; returns `(slope, intercept)`.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::Analysis(format!(
            "need at least two points for a fit, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Slope of `ln g` against `ln degree` over birth steps `1..t-1`.
pub fn scaling_fit(report: &CentralityReport) -> Result<ScalingFit> {
    if report.t < 3 {
        return Err(Error::Analysis(format!(
            "scaling fit needs t >= 3 for two interior degree classes, got t = {}",
            report.t
        )));
    }
    let g = report.per_birth_exact();
    let m1 = f64::from(report.m) + 1.0;
    let points: Vec<(f64, f64)> = (1..report.t)
        .map(|i| {
            let degree = 2.0 * m1.powi((report.t - i) as i32);
            (degree.ln(), g[i as usize].ln())
        })
        .collect();
    let (gamma_hat, intercept) = least_squares(&points)?;
    let residuals = points
        .iter()
        .map(|&(x, y)| y - (intercept + gamma_hat * x))
        .collect();
    Ok(ScalingFit {
        gamma_hat,
        intercept,
        points,
        residuals,
    })
}

/// `ln(3m+1) / ln(m+1)`.
pub fn degree_exponent(m: u32) -> f64 {
    (3.0 * f64::from(m) + 1.0).ln() / (f64::from(m) + 1.0).ln()
}
