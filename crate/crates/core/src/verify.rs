//! One-shot verification suites.
//!
//! Each suite builds `K_{m,t}` and checks the label arithmetic, routing,
//! betweenness, resistor-network and statistics claims against independent
//! computations on the built graph. Rows where the exact computation is
//! self-consistent but disagrees with a printed closed form are marked
//! `PAPER-DISCREPANCY`; they do not fail the suite.
//!
//! Reports contain no timings, so identical invocations render identical
//! bytes.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{self, AplMeasure};
use crate::centrality::{self, CentralityReport, EdgeClass};
use crate::electrical::{self, EndpointRule, Laplacian, Mode, PairPolicy};
use crate::error::{Error, Result};
use crate::graph::{build_with, BuildOptions, KochGraph, VertexId};
use crate::label::{enumerate_labels_capped, l_max, Bits, Label};
use crate::labels;
use crate::routing::{self, bfs_distances};

pub const DEFAULT_SEED: u64 = 0x6B6F_6368;
/// Up to this many vertices routing is checked on every ordered pair.
pub const EXHAUSTIVE_ROUTING_LIMIT: usize = 700;
/// Up to this many vertices the electrical checks use every pair.
pub const EXHAUSTIVE_ELECTRICAL_LIMIT: usize = 30;
/// Relative tolerance on the fitted betweenness-degree exponent.
pub const SCALING_TOL: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    PaperDiscrepancy,
}

impl Status {
    pub fn tag(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::PaperDiscrepancy => "PAPER-DISCREPANCY",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    All,
    Labels,
    Routing,
    Centrality,
    Electrical,
    Stats,
}

impl Suite {
    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Labels => "labels",
            Suite::Routing => "routing",
            Suite::Centrality => "centrality",
            Suite::Electrical => "electrical",
            Suite::Stats => "stats",
        }
    }

    fn includes(&self, other: Suite) -> bool {
        *self == Suite::All || *self == other
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "labels" => Suite::Labels,
            "routing" => Suite::Routing,
            "centrality" => Suite::Centrality,
            "electrical" => Suite::Electrical,
            "stats" => Suite::Stats,
            _ => return Err(Error::Argument(format!("unknown suite {s:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random pairs for routing when the network is too large for all pairs.
    pub random_pairs: usize,
    /// Random pairs for the electrical checks.
    pub electrical_pairs: usize,
    pub max_vertices: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            random_pairs: 100_000,
            electrical_pairs: 50,
            max_vertices: crate::graph::DEFAULT_MAX_VERTICES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySuiteResult {
    pub suite: Suite,
    pub m: u32,
    pub t: u32,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerifySuiteResult {
    pub fn count(&self, status: Status) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    pub fn passed(&self) -> bool {
        self.count(Status::Fail) == 0
    }

    /// 0 when nothing failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "koch verify: m={} t={} suite={} seed={:#x}",
            self.m, self.t, self.suite, self.seed
        );
        for c in &self.checks {
            let _ = writeln!(out, "[{}] {}: {}", c.status.tag(), c.id, c.description);
            if !c.detail.is_empty() {
                let _ = writeln!(out, "    {}", c.detail);
            }
        }
        let _ = writeln!(
            out,
            "summary: {} pass, {} fail, {} paper-discrepancy",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::PaperDiscrepancy)
        );
        out
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, id: &str, description: &str, ok: bool, detail: impl Into<String>) {
        self.push_status(
            id,
            description,
            if ok { Status::Pass } else { Status::Fail },
            detail,
        );
    }

    fn push_status(
        &mut self,
        id: &str,
        description: &str,
        status: Status,
        detail: impl Into<String>,
    ) {
        self.0.push(Check {
            id: id.to_owned(),
            description: description.to_owned(),
            status,
            detail: detail.into(),
        });
    }
}

pub fn run(m: u32, t: u32, suite: Suite, opts: &VerifyOptions) -> Result<VerifySuiteResult> {
    let graph = build_with(
        m,
        t,
        &BuildOptions {
            max_vertices: opts.max_vertices,
        },
    )?;
    let mut checks = Checks(Vec::new());
    if suite.includes(Suite::Labels) {
        label_checks(&graph, opts, &mut checks)?;
    }
    if suite.includes(Suite::Routing) {
        routing_checks(&graph, opts, &mut checks)?;
    }
    if suite.includes(Suite::Centrality) {
        centrality_checks(&graph, &mut checks)?;
    }
    if suite.includes(Suite::Electrical) {
        electrical_checks(&graph, opts, &mut checks)?;
    }
    if suite.includes(Suite::Stats) {
        stats_checks(&graph, opts, &mut checks)?;
    }
    Ok(VerifySuiteResult {
        suite,
        m,
        t,
        seed: opts.seed,
        checks: checks.0,
    })
}

fn label_checks(g: &KochGraph, opts: &VerifyOptions, out: &mut Checks) -> Result<()> {
    let (m, t) = (g.m(), g.t());
    let q = crate::graph::triangle_count(m, t).expect("graph was built");
    let (n, e, tri) = (g.num_vertices(), g.num_edges(), g.triangles().len());
    out.push(
        "labels.order-size",
        "vertex, edge and triangle counts equal 2q^t+1, 3q^t, q^t with q = 3m+1",
        n as u128 == 2 * q + 1 && e as u128 == 3 * q && tri as u128 == q,
        format!("N={n} E={e} triangles={tri}"),
    );

    let mut per_edge: HashMap<(VertexId, VertexId), u32> = HashMap::with_capacity(e);
    for &[a, b, c] in g.triangles() {
        for (x, y) in [(a, b), (a, c), (b, c)] {
            *per_edge.entry((x.min(y), x.max(y))).or_insert(0) += 1;
        }
    }
    let one_each = per_edge.len() == e && g.edges().all(|k| per_edge.get(&k) == Some(&1));
    out.push(
        "labels.edge-in-one-triangle",
        "every edge lies in exactly one triangle",
        one_each,
        format!("{} distinct triangle edges", per_edge.len()),
    );

    let simple = g.adjacency().iter().enumerate().all(|(u, ns)| {
        ns.windows(2).all(|w| w[0] < w[1])
            && !ns.contains(&u)
            && ns.iter().all(|&v| g.has_edge(v, u))
    });
    let reach = bfs_distances(g, 0)
        .dist
        .iter()
        .filter(|&&d| d != u32::MAX)
        .count();
    out.push(
        "labels.simple-connected",
        "graph is simple, symmetric and connected",
        simple && reach == n,
        format!("reachable from hub 1: {reach}/{n}"),
    );

    let mut enumerated = enumerate_labels_capped(m, t, opts.max_vertices)?;
    enumerated.sort();
    let mut built: Vec<Label> = g.vertices().iter().map(|v| v.label).collect();
    built.sort();
    let distinct = built.windows(2).all(|w| w[0] != w[1]);
    let lookup = g
        .vertices()
        .iter()
        .all(|v| g.vertex_by_label(&v.label).ok() == Some(v.id));
    out.push(
        "labels.bijection",
        "enumerated label set equals the labels of the built graph, each resolving to one vertex",
        distinct && lookup && enumerated == built,
        format!("{} enumerated, {} built", enumerated.len(), built.len()),
    );

    let mut sizes_ok = true;
    let mut detail = String::new();
    for j in 1..=t {
        let mut sum = BigInt::from(0);
        for tail in 0u64..(1u64 << (j - 1)) {
            let mut bits = Bits::empty().pushed(false);
            for k in 0..j - 1 {
                bits = bits.pushed(tail >> k & 1 == 1);
            }
            sum += l_max(m, &bits)?;
        }
        let total = sum * 3;
        let born = g.vertices().iter().filter(|v| v.birth_step == j).count();
        let ok = total == analytics::new_vertices(m, j) && total == BigInt::from(born);
        sizes_ok &= ok;
        let _ = write!(detail, "step {j}: {total} ");
    }
    out.push(
        "labels.group-sizes",
        "3 x sum of group sizes per step equals the number of vertices born then",
        sizes_ok,
        detail.trim_end().to_owned(),
    );

    // Label-only neighbor sets against adjacency, split by degree.
    let results: Vec<(usize, Option<String>)> = (0..n)
        .into_par_iter()
        .map(|v| {
            let label = g.label(v);
            let part = match labels::neighbor_partition(m, t, &label) {
                Ok(p) => p,
                Err(err) => return (1, Some(format!("{label}: {err}"))),
            };
            let dv = g.degree(v);
            let mut want_equal = Vec::new();
            let mut want_lower = Vec::new();
            let mut want_higher = Vec::new();
            for &w in g.neighbors(v) {
                let l = g.label(w);
                match g.degree(w).cmp(&dv) {
                    std::cmp::Ordering::Equal => want_equal.push(l),
                    std::cmp::Ordering::Less => want_lower.push(l),
                    std::cmp::Ordering::Greater => want_higher.push(l),
                }
            }
            let sorted = |mut x: Vec<Label>| {
                x.sort();
                x
            };
            let ok = sorted(part.equal.clone()) == sorted(want_equal)
                && sorted(part.lower.clone()) == sorted(want_lower)
                && sorted(part.higher.clone()) == sorted(want_higher);
            if ok {
                (0, None)
            } else {
                (1, Some(format!("first mismatch at {label}")))
            }
        })
        .collect();
    let bad: usize = results.iter().map(|r| r.0).sum();
    let first = results.iter().find_map(|r| r.1.clone()).unwrap_or_default();
    out.push(
        "labels.neighbor-partition",
        "companion, sons and father computed from the label equal the adjacency split by degree",
        bad == 0,
        if bad == 0 {
            format!("{n} vertices checked")
        } else {
            format!("{bad} mismatches; {first}")
        },
    );

    let mut bad_father = 0usize;
    let mut bad_degree = 0usize;
    let mut bad_companion = 0usize;
    for v in g.vertices() {
        for c in labels::children(m, t, &v.label)? {
            if labels::father(m, &c)? != v.label {
                bad_father += 1;
            }
        }
        if labels::degree_of(m, t, &v.label)? != g.degree(v.id) as u64 {
            bad_degree += 1;
        }
        if !v.label.is_hub() {
            let c = labels::companion(&v.label)?;
            if labels::companion(&c)? != v.label || Some(g.vertex_by_label(&c)?) != v.companion {
                bad_companion += 1;
            }
        }
    }
    out.push(
        "labels.father-of-children",
        "father(child) returns the vertex for every computed son",
        bad_father == 0,
        format!("{bad_father} mismatches"),
    );
    out.push(
        "labels.degree-arithmetic",
        "2(m+1)^(t-birth) equals the adjacency degree",
        bad_degree == 0,
        format!("{bad_degree} mismatches"),
    );
    out.push(
        "labels.companion-involution",
        "companion is an involution and names the group partner",
        bad_companion == 0,
        format!("{bad_companion} mismatches"),
    );

    let bad_local = (0..n)
        .filter(|&v| analytics::triangles_at(g, v) * 2 != g.degree(v))
        .count();
    out.push(
        "labels.induced-neighbor-edges",
        "each vertex's neighborhood spans exactly deg/2 edges",
        bad_local == 0,
        format!("{bad_local} mismatches"),
    );
    Ok(())
}

#[derive(Default)]
struct RouteTally {
    pairs: usize,
    wrong_length: usize,
    broken_hop: usize,
    asymmetric: usize,
    max_ops: u32,
    non_unique: Vec<(VertexId, VertexId, u64)>,
    first_error: Option<String>,
}

impl RouteTally {
    fn merge(&mut self, other: RouteTally) {
        self.pairs += other.pairs;
        self.wrong_length += other.wrong_length;
        self.broken_hop += other.broken_hop;
        self.asymmetric += other.asymmetric;
        self.max_ops = self.max_ops.max(other.max_ops);
        self.non_unique.extend(other.non_unique);
        if self.first_error.is_none() {
            self.first_error = other.first_error;
        }
    }
}

fn route_from(g: &KochGraph, s: VertexId, targets: &[VertexId]) -> Result<RouteTally> {
    let (m, t) = (g.m(), g.t());
    let bfs = bfs_distances(g, s);
    let ls = g.label(s);
    let mut tally = RouteTally::default();
    for &x in targets {
        let lx = g.label(x);
        let r = routing::route(m, t, &ls, &lx)?;
        tally.pairs += 1;
        tally.max_ops = tally.max_ops.max(r.ops_used);
        if r.length() as u32 != bfs.dist[x] {
            tally.wrong_length += 1;
            tally.first_error.get_or_insert_with(|| {
                format!("{ls} -> {lx}: route {} vs BFS {}", r.length(), bfs.dist[x])
            });
        }
        let ids: Vec<VertexId> = r
            .hops
            .iter()
            .map(|l| g.vertex_by_label(l))
            .collect::<Result<_>>()?;
        if ids.first() != Some(&s)
            || ids.last() != Some(&x)
            || ids.windows(2).any(|w| !g.has_edge(w[0], w[1]))
        {
            tally.broken_hop += 1;
        }
        let mut back = routing::route(m, t, &lx, &ls)?.hops;
        back.reverse();
        if back != r.hops {
            tally.asymmetric += 1;
        }
        if x != s && bfs.sigma[x] != 1 {
            tally.non_unique.push((s, x, bfs.sigma[x]));
        }
    }
    Ok(tally)
}

fn routing_checks(g: &KochGraph, opts: &VerifyOptions, out: &mut Checks) -> Result<()> {
    let n = g.num_vertices();
    let t = g.t();
    let exhaustive = n <= EXHAUSTIVE_ROUTING_LIMIT;
    let by_source: BTreeMap<VertexId, Vec<VertexId>> = if exhaustive {
        (0..n).map(|s| (s, (0..n).collect())).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut map: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for _ in 0..opts.random_pairs {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            map.entry(a).or_default().push(b);
        }
        map
    };
    let sources: Vec<(&VertexId, &Vec<VertexId>)> = by_source.iter().collect();
    let parts: Vec<RouteTally> = sources
        .par_iter()
        .map(|(&s, targets)| route_from(g, s, targets))
        .collect::<Result<_>>()?;
    let mut tally = RouteTally::default();
    for p in parts {
        tally.merge(p);
    }
    let scope = if exhaustive {
        format!("all {} ordered pairs", tally.pairs)
    } else {
        format!("{} random pairs (seed {:#x})", tally.pairs, opts.seed)
    };

    out.push(
        "routing.optimal-length",
        "label route length equals BFS distance",
        tally.wrong_length == 0,
        match &tally.first_error {
            Some(e) => format!("{} mismatches over {scope}; {e}", tally.wrong_length),
            None => scope.clone(),
        },
    );
    out.push(
        "routing.valid-path",
        "route hops are consecutive graph edges joining the endpoints",
        tally.broken_hop == 0,
        format!("{} broken routes", tally.broken_hop),
    );
    out.push(
        "routing.symmetric",
        "route(b, a) is route(a, b) reversed",
        tally.asymmetric == 0,
        format!("{} asymmetric pairs", tally.asymmetric),
    );
    let bound = 2 * t + 3;
    out.push(
        "routing.ops-bound",
        "father/companion evaluations per query stay within 2t + 3",
        tally.max_ops <= bound,
        format!("max ops {} (2t = {}, bound {bound})", tally.max_ops, 2 * t),
    );
    let shown: Vec<String> = tally
        .non_unique
        .iter()
        .take(10)
        .map(|&(s, x, c)| format!("{}->{} sigma={c}", g.label(s), g.label(x)))
        .collect();
    out.push(
        "routing.unique-shortest-paths",
        "every pair is joined by exactly one shortest path",
        tally.non_unique.is_empty(),
        if tally.non_unique.is_empty() {
            format!("sigma = 1 over {scope}")
        } else {
            format!(
                "{} violations: {}",
                tally.non_unique.len(),
                shown.join(", ")
            )
        },
    );
    Ok(())
}

fn centrality_checks(g: &KochGraph, out: &mut Checks) -> Result<()> {
    let (m, t) = (g.m(), g.t());
    let report = CentralityReport::compute(g)?;
    let norm = report.normalizer;

    let spread = report
        .birth_step_spread()
        .iter()
        .map(|&(_, lo, hi)| hi - lo)
        .fold(0.0, f64::max);
    out.push(
        "centrality.birth-symmetry",
        "exact betweenness is constant within each birth step",
        spread <= 1e-12,
        format!("max spread {spread:e}"),
    );

    let leaves_max = report
        .vertices
        .iter()
        .filter(|r| r.birth == t)
        .map(|r| r.exact.abs())
        .fold(0.0, f64::max);
    out.push(
        "centrality.leaves-zero",
        "vertices born at the last step carry no betweenness",
        leaves_max == 0.0,
        format!("max {leaves_max:e}"),
    );

    let per_birth = report.per_birth_exact();
    out.push(
        "centrality.monotone",
        "exact betweenness strictly decreases with birth step",
        per_birth.windows(2).all(|w| w[1] < w[0]),
        format!("{per_birth:?}"),
    );

    // Shallow vertices: descendants x rest, plus cross-group son pairs when m > 1.
    let cross = centrality::cross_group_pairs(m) as f64;
    let mut worst: f64 = 0.0;
    for r in report.vertices.iter().filter(|r| t - r.birth <= 1) {
        let extra = if t - r.birth == 1 { cross } else { 0.0 };
        worst = worst.max(((r.exact - r.firstorder) * norm - extra).abs());
    }
    out.push(
        "centrality.firstorder-shallow",
        "for t - birth <= 1, exact pair count = descendants x rest + 2m(m-1) cross-group pairs",
        worst <= 1e-6,
        format!("max pair-count gap {worst:e}; cross-group term {cross}"),
    );
    let undercount = report
        .vertices
        .iter()
        .filter(|r| t - r.birth >= 2)
        .all(|r| r.firstorder < r.exact);
    out.push(
        "centrality.firstorder-deep",
        "for t - birth >= 2, descendants x rest strictly undercounts",
        undercount,
        String::new(),
    );

    let through: f64 = report.vertices.iter().map(|r| r.exact * norm).sum();
    let n = g.num_vertices() as u128;
    let dist_sum = analytics::all_pairs_distance_sum(g);
    let expected = dist_sum - n * (n - 1) / 2;
    out.push(
        "centrality.sum-rule",
        "sum of pass-through counts equals sum over pairs of (distance - 1)",
        (through - expected as f64).abs() <= 1e-9 * (expected as f64).max(1.0),
        format!("{through} vs {expected}"),
    );

    let q = crate::graph::triangle_count(m, t).expect("graph was built") as usize;
    let count = |c: EdgeClass| report.edges.iter().filter(|r| r.class == c).count();
    let (hh, comp, fc) = (
        count(EdgeClass::HubHub),
        count(EdgeClass::Companion),
        count(EdgeClass::FatherChild),
    );
    out.push(
        "centrality.edge-classes",
        "edges split into 3 hub-hub, q^t - 1 companion, 2(q^t - 1) father-child",
        hh == 3 && comp == q - 1 && fc == 2 * (q - 1),
        format!("hub-hub {hh}, companion {comp}, father-child {fc}"),
    );

    let audit = report.audit();
    let vertex_gap = report
        .vertices
        .iter()
        .map(|r| (r.paper - r.exact).abs())
        .fold(0.0, f64::max);
    out.push_status(
        "centrality.printed-vertex-formula",
        "printed closed-form vertex betweenness vs exact",
        if audit.eq9_matches {
            Status::Pass
        } else {
            Status::PaperDiscrepancy
        },
        format!(
            "max abs gap {vertex_gap:.6e}; max rel gap (all rows) {:.6e}",
            audit.max_rel_gap
        ),
    );
    let pair_count = centrality::paper_edge_betweenness_pair_count(m, t)?;
    let pc_gap = report
        .edges
        .iter()
        .map(|r| (pair_count - r.exact).abs())
        .fold(0.0, f64::max);
    out.push_status(
        "centrality.printed-edge-definition",
        "printed pair-count edge betweenness vs exact",
        if pc_gap <= centrality::MATCH_TOL {
            Status::Pass
        } else {
            Status::PaperDiscrepancy
        },
        format!("value {pair_count:.6e}; max abs gap {pc_gap:.6e}"),
    );
    let edge_gap = report
        .edges
        .iter()
        .map(|r| (r.paper - r.exact).abs())
        .fold(0.0, f64::max);
    out.push_status(
        "centrality.printed-edge-formula",
        "printed closed-form edge betweenness vs exact",
        if audit.eq12_matches {
            Status::Pass
        } else {
            Status::PaperDiscrepancy
        },
        format!("max abs gap {edge_gap:.6e}"),
    );

    if t >= 3 {
        let fit = centrality::scaling_fit(&report)?;
        let gamma = centrality::degree_exponent(m);
        let rel = (fit.gamma_hat - gamma).abs() / gamma;
        out.push(
            "centrality.scaling-exponent",
            "betweenness grows as degree^(ln(3m+1)/ln(m+1)) within 15%",
            rel <= SCALING_TOL,
            format!(
                "gamma_hat {:.6}, gamma {gamma:.6}, rel gap {rel:.4}",
                fit.gamma_hat
            ),
        );
    }
    Ok(())
}

fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<(VertexId, VertexId)> {
    if n <= EXHAUSTIVE_ELECTRICAL_LIMIT {
        return (0..n)
            .flat_map(|s| (s + 1..n).map(move |x| (s, x)))
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                break (a, b);
            }
        })
        .collect()
}

/// Two triangles joined by a bridge `2 - 3`; probes run `0 -> 4`.
pub fn bridged_triangles() -> Vec<Vec<VertexId>> {
    vec![
        vec![1, 2],
        vec![0, 2],
        vec![0, 1, 3],
        vec![2, 4, 5],
        vec![3, 5],
        vec![3, 4],
    ]
}

fn electrical_checks(g: &KochGraph, opts: &VerifyOptions, out: &mut Checks) -> Result<()> {
    let (m, t) = (g.m(), g.t());
    let tri = crate::graph::build(m, 0)?;
    let base = electrical::solve(&tri, 0, 1, Mode::UnitCurrent)?;
    out.push(
        "electrical.triangle-base",
        "hub-to-hub resistance in the initial triangle is 2/3",
        (base.effective_resistance - 2.0 / 3.0).abs() < 1e-12,
        format!("R = {}", base.effective_resistance),
    );

    let lap = Laplacian::new(g.adjacency())?;
    let pairs = sample_pairs(g.num_vertices(), opts.electrical_pairs, opts.seed);
    struct PairResult {
        thm6: bool,
        thm7: bool,
        thm8: bool,
        series: f64,
        reciprocity: f64,
        rayleigh: bool,
        kirchhoff: f64,
        offpath: f64,
        voltage: f64,
        split: f64,
    }
    let results: Vec<PairResult> = pairs
        .par_iter()
        .map(|&(s, x)| {
            let pp = electrical::path_profile_with(&lap, g, s, x)?;
            let fwd = electrical::solve_with(&lap, g, s, x, Mode::UnitCurrent)?;
            let back = electrical::solve_with(&lap, g, x, s, Mode::UnitCurrent)?;
            let r = fwd.effective_resistance;
            Ok(PairResult {
                thm6: pp.thm6,
                thm7: pp.thm7,
                thm8: pp.thm8,
                series: (r - 2.0 * pp.d as f64 / 3.0).abs(),
                reciprocity: (r - back.effective_resistance).abs(),
                rayleigh: r <= pp.d as f64 + 1e-12,
                kirchhoff: fwd
                    .kirchhoff_defect()
                    .max((fwd.source_outflow() - 1.0).abs()),
                offpath: pp.max_offpath_current,
                voltage: pp.max_voltage_error,
                split: pp.max_split_error,
            })
        })
        .collect::<Result<_>>()?;
    let k = results.len();
    let max = |f: &dyn Fn(&PairResult) -> f64| results.iter().map(f).fold(0.0, f64::max);
    let scope = if g.num_vertices() <= EXHAUSTIVE_ELECTRICAL_LIMIT {
        format!("all {k} pairs")
    } else {
        format!("{k} random pairs (seed {:#x})", opts.seed)
    };
    out.push(
        "electrical.current-confined",
        "current flows only on the triangles holding the shortest path",
        results.iter().all(|r| r.thm6),
        format!("{scope}; max off-path current {:e}", max(&|r| r.offpath)),
    );
    out.push(
        "electrical.voltage-progression",
        "path voltages step 1 -> 0 by 1/d; third corners sit at 1 - 1/(2d) ... 1/(2d)",
        results.iter().all(|r| r.thm7),
        format!("max error {:e}", max(&|r| r.voltage)),
    );
    out.push(
        "electrical.current-split",
        "each path triangle carries 2/3 on the path edge and 1/3 around",
        results.iter().all(|r| r.thm8),
        format!("max error {:e}", max(&|r| r.split)),
    );
    let series = max(&|r| r.series);
    out.push(
        "electrical.series-law",
        "effective resistance equals (2/3) d",
        series < electrical::THEOREM_TOL,
        format!("max error {series:e}"),
    );
    let recip = max(&|r| r.reciprocity);
    out.push(
        "electrical.reciprocity",
        "R(s, t) = R(t, s); R <= d",
        recip < electrical::THEOREM_TOL && results.iter().all(|r| r.rayleigh),
        format!("max asymmetry {recip:e}"),
    );
    let kcl = max(&|r| r.kirchhoff);
    out.push(
        "electrical.kirchhoff",
        "net current vanishes away from the endpoints and the source emits one unit",
        kcl < electrical::CURRENT_EPS,
        format!("max defect {kcl:e}"),
    );

    // Current-flow betweenness on the largest K_{m,t'} small enough for all pairs.
    let mut t_cfb = t;
    while crate::graph::vertex_count(m, t_cfb)? > electrical::CFB_EXHAUSTIVE_LIMIT as u128 {
        t_cfb -= 1;
    }
    let small = crate::graph::build(m, t_cfb)?;
    let cfb = electrical::current_flow_betweenness(
        &small,
        PairPolicy::Exhaustive,
        EndpointRule::Interior,
    )?;
    let mut spread: f64 = 0.0;
    let mut per_birth = Vec::new();
    for i in 0..=t_cfb {
        let vals: Vec<f64> = small
            .vertices()
            .iter()
            .filter(|v| v.birth_step == i)
            .map(|v| cfb.values[v.id])
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        per_birth.push(lo);
    }
    let decreasing = per_birth.windows(2).all(|w| w[1] < w[0]);
    out.push(
        "electrical.current-flow-symmetry",
        "current-flow betweenness is constant per birth step and falls with it",
        spread < 1e-9 && decreasing,
        format!("on K_{{{m},{t_cfb}}}: per-birth {per_birth:?}, spread {spread:e}"),
    );

    let gap = electrical::voltage_gap(g, g.hub(1), g.hub(2))?;
    let mut levels = gap.spectrum.clone();
    levels.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let subnet = (g.num_vertices() - 3) / 3;
    let plateau = |x: f64| {
        gap.spectrum
            .iter()
            .filter(|&&v| (v - x).abs() < 1e-9)
            .count()
    };
    let plateaus_ok = levels.len() <= 3
        && plateau(1.0) == subnet
        && plateau(0.0) == subnet
        && plateau(0.5) == subnet + 1;
    out.push(
        "electrical.hub-pair-plateaus",
        "hub-to-hub probe leaves every subnet at its hub's potential (levels 1, 1/2, 0)",
        plateaus_ok && (gap.statistic - 0.5).abs() < 1e-9,
        format!(
            "gap statistic {}, {} distinct interior levels",
            gap.statistic,
            levels.len()
        ),
    );

    if t >= 1 {
        let control = electrical::voltage_gap_on(&bridged_triangles(), 0, 4)?;
        // Koch pair at the same probe distance 3: sons of two different hubs.
        let a = g.vertex_by_label(&crate::label::parse_label("10.1", m)?)?;
        let b = g.vertex_by_label(&crate::label::parse_label("20.1", m)?)?;
        let koch = electrical::voltage_gap(g, a, b)?;
        out.push(
            "electrical.community-control",
            "a bridged two-triangle network shows a larger voltage gap than Koch at equal probe distance",
            control.statistic > koch.statistic,
            format!("control {:.6} vs Koch {:.6}", control.statistic, koch.statistic),
        );
    }
    Ok(())
}

fn stats_checks(g: &KochGraph, opts: &VerifyOptions, out: &mut Checks) -> Result<()> {
    let (m, t) = (g.m(), g.t());
    let cf = analytics::closed_forms(m, t)?;
    let emp = analytics::empirical_stats_seeded(g, opts.seed)?;
    out.push(
        "stats.order-size",
        "closed-form N and E equal the built graph",
        BigInt::from(emp.vertices) == cf.vertices && BigInt::from(emp.edges) == cf.edges,
        format!("N={} E={}", emp.vertices, emp.edges),
    );
    out.push(
        "stats.degree-histogram",
        "degrees are 2(m+1)^(t-i) with multiplicity 6m(3m+1)^(i-1), hubs 2(m+1)^t x 3",
        analytics::histogram_matches(m, t, &emp.degree_histogram),
        format!("{:?}", emp.degree_histogram),
    );
    out.push(
        "stats.cumulative-degree",
        "fraction with degree >= 2(m+1)^(t-i) is (2(3m+1)^i + 1)/N",
        analytics::cumulative_degree_matches(m, t, &emp.degree_histogram),
        String::new(),
    );
    let degree_sum: usize = emp.degree_histogram.iter().map(|(d, c)| d * c).sum();
    let born: BigInt = cf.new_vertices.iter().sum::<BigInt>() + 3;
    out.push(
        "stats.handshake",
        "sum of degrees is 2E and vertices born per step sum to N",
        degree_sum == 2 * emp.edges && born == cf.vertices,
        String::new(),
    );
    out.push(
        "stats.local-clustering",
        "every vertex has local clustering exactly 1/(deg-1)",
        emp.clustering_reciprocal,
        String::new(),
    );
    out.push(
        "stats.average-clustering",
        "average clustering equals the per-degree-class closed form",
        emp.clustering == cf.clustering,
        format!("{}", analytics::rational_to_f64(&emp.clustering)),
    );
    let (ok, detail) = match &emp.apl {
        AplMeasure::Exact { .. } => {
            let e = emp.apl.exact().expect("exact");
            (e == cf.apl, format!("{e} vs closed form {}", cf.apl))
        }
        AplMeasure::Sampled { mean, std_err, .. } => {
            let c = analytics::rational_to_f64(&cf.apl);
            (
                (mean - c).abs() <= 4.0 * std_err,
                format!("sampled {mean} ± {std_err} vs closed form {c}"),
            )
        }
    };
    out.push(
        "stats.apl-closed-form",
        "average path length equals the closed form (exact when all pairs are measured)",
        ok,
        detail,
    );
    if t >= 2 {
        for e in analytics::claim_audit(g, &emp)?.entries {
            out.push(
                &format!("stats.audit.{}", e.id),
                &e.claim,
                e.pass,
                format!("expected {}; observed {}", e.expected, e.observed),
            );
        }
    }
    Ok(())
}
