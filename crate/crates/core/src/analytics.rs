//! Structural statistics: closed forms and their measured counterparts.
//!
//! The printed average-path-length formula carries a misplaced parenthesis;
//! it is read here as `(3m+1)^t`, which matches all-pairs BFS exactly.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{vertex_count, KochGraph};
use crate::routing::{bfs_distances, distance};

/// Largest network whose average path length is computed over all pairs.
pub const EXACT_APL_LIMIT: usize = 5000;
pub const APL_SAMPLES: usize = 100_000;
pub const APL_SEED: u64 = 0x6B6F_6368;
/// Claimed small-m limit of the average clustering coefficient.
pub const CLUSTERING_CLAIM: f64 = 0.82008;

fn q(m: u32) -> BigInt {
    BigInt::from(3 * u64::from(m) + 1)
}

fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn rational_json(r: &BigRational) -> Value {
    json!({ "exact": r.to_string(), "value": rational_to_f64(r) })
}

/// Average path length `[3m+5 + (24mt+24m+4)(3m+1)^t] / [3(3m+1)(2(3m+1)^t+1)]`.
pub fn apl_closed_form(m: u32, t: u32) -> BigRational {
    let mm = BigInt::from(m);
    let tt = BigInt::from(t);
    let qt = num_traits::pow(q(m), t as usize);
    let num =
        BigInt::from(3 * u64::from(m) + 5) + (BigInt::from(24) * &mm * &tt + 24 * &mm + 4) * &qt;
    let den = BigInt::from(3) * q(m) * (BigInt::from(2) * &qt + 1);
    ratio(num, den)
}

/// Average clustering from `C_v = 1/(deg-1)` summed per degree class.
pub fn clustering_closed_form(m: u32, t: u32) -> BigRational {
    let n = BigInt::from(2) * num_traits::pow(q(m), t as usize) + 1;
    let mut sum = BigRational::zero();
    for (degree, count) in degree_classes(m, t) {
        sum += ratio(count, degree - 1);
    }
    sum / ratio(n, 1)
}

/// `(degree, multiplicity)` from hubs down to the newest vertices.
pub fn degree_classes(m: u32, t: u32) -> Vec<(BigInt, BigInt)> {
    let m1: BigInt = BigInt::from(m) + 1;
    let mut out = vec![(
        BigInt::from(2) * num_traits::pow(m1.clone(), t as usize),
        BigInt::from(3),
    )];
    for i in 1..=t {
        out.push((
            BigInt::from(2) * num_traits::pow(m1.clone(), (t - i) as usize),
            new_vertices(m, i),
        ));
    }
    out
}

/// Vertices created at step `i >= 1`: `6m(3m+1)^(i-1)`.
pub fn new_vertices(m: u32, i: u32) -> BigInt {
    BigInt::from(6 * u64::from(m)) * num_traits::pow(q(m), (i - 1) as usize)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForms {
    pub m: u32,
    pub t: u32,
    pub vertices: BigInt,
    pub edges: BigInt,
    pub triangles: BigInt,
    /// Entry `i-1` holds the count for step `i`.
    pub new_vertices: Vec<BigInt>,
    pub gamma: f64,
    pub apl: BigRational,
    pub clustering: BigRational,
}

pub fn closed_forms(m: u32, t: u32) -> Result<ClosedForms> {
    vertex_count(m, t)?;
    let qt = num_traits::pow(q(m), t as usize);
    Ok(ClosedForms {
        m,
        t,
        vertices: BigInt::from(2) * &qt + 1,
        edges: BigInt::from(3) * &qt,
        triangles: qt,
        new_vertices: (1..=t).map(|i| new_vertices(m, i)).collect(),
        gamma: crate::centrality::degree_exponent(m),
        apl: apl_closed_form(m, t),
        clustering: clustering_closed_form(m, t),
    })
}

impl ClosedForms {
    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "t": self.t,
            "vertices": self.vertices.to_string(),
            "edges": self.edges.to_string(),
            "triangles": self.triangles.to_string(),
            "new_vertices": self.new_vertices.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "gamma": self.gamma,
            "apl": rational_json(&self.apl),
            "clustering": rational_json(&self.clustering),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AplMeasure {
    Exact {
        distance_sum: u128,
        pairs: u128,
    },
    Sampled {
        mean: f64,
        std_err: f64,
        samples: usize,
        seed: u64,
    },
}

impl AplMeasure {
    pub fn value(&self) -> f64 {
        match *self {
            AplMeasure::Exact {
                distance_sum,
                pairs,
            } => distance_sum as f64 / pairs as f64,
            AplMeasure::Sampled { mean, .. } => mean,
        }
    }

    pub fn exact(&self) -> Option<BigRational> {
        match *self {
            AplMeasure::Exact {
                distance_sum,
                pairs,
            } => Some(ratio(distance_sum, pairs)),
            AplMeasure::Sampled { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalStats {
    pub vertices: usize,
    pub edges: usize,
    pub degree_histogram: BTreeMap<usize, usize>,
    pub apl: AplMeasure,
    pub clustering: BigRational,
    /// Every vertex has local clustering exactly `1/(deg-1)`.
    pub clustering_reciprocal: bool,
}

/// Sum of all-pairs shortest distances over unordered pairs.
pub fn all_pairs_distance_sum(graph: &KochGraph) -> u128 {
    let n = graph.num_vertices();
    let total: u128 = (0..n)
        .into_par_iter()
        .map(|s| {
            bfs_distances(graph, s)
                .dist
                .iter()
                .map(|&d| u128::from(d))
                .sum::<u128>()
        })
        .sum();
    total / 2
}

fn measure_apl(graph: &KochGraph, seed: u64) -> Result<AplMeasure> {
    let n = graph.num_vertices();
    if n <= EXACT_APL_LIMIT {
        let pairs = (n as u128) * (n as u128 - 1) / 2;
        return Ok(AplMeasure::Exact {
            distance_sum: all_pairs_distance_sum(graph),
            pairs,
        });
    }
    // Label routing gives exact distances at O(t) per pair.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, t) = (graph.m(), graph.t());
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..APL_SAMPLES {
        let (a, b) = loop {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                break (a, b);
            }
        };
        let d = distance(m, t, &graph.label(a), &graph.label(b))? as f64;
        sum += d;
        sum_sq += d * d;
    }
    let k = APL_SAMPLES as f64;
    let mean = sum / k;
    let var = (sum_sq / k - mean * mean) * k / (k - 1.0);
    Ok(AplMeasure::Sampled {
        mean,
        std_err: (var / k).sqrt(),
        samples: APL_SAMPLES,
        seed,
    })
}

/// Triangles through `v`, counted as edges among its neighbors.
pub fn triangles_at(graph: &KochGraph, v: usize) -> usize {
    let ns = graph.neighbors(v);
    let mut links = 0;
    for &u in ns {
        let nu = graph.neighbors(u);
        let (mut i, mut j) = (0, 0);
        while i < ns.len() && j < nu.len() {
            match ns[i].cmp(&nu[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    links += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    links / 2
}

pub fn empirical_stats(graph: &KochGraph) -> Result<EmpiricalStats> {
    empirical_stats_seeded(graph, APL_SEED)
}

pub fn empirical_stats_seeded(graph: &KochGraph, seed: u64) -> Result<EmpiricalStats> {
    let n = graph.num_vertices();
    let mut degree_histogram = BTreeMap::new();
    for v in 0..n {
        *degree_histogram.entry(graph.degree(v)).or_insert(0) += 1;
    }

    let tri: Vec<usize> = (0..n)
        .into_par_iter()
        .map(|v| triangles_at(graph, v))
        .collect();
    let mut classes: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (v, &tr) in tri.iter().enumerate() {
        *classes.entry((tr, graph.degree(v))).or_insert(0) += 1;
    }
    let clustering_reciprocal = classes.keys().all(|&(tr, deg)| 2 * tr == deg);
    let mut sum = BigRational::zero();
    for (&(tr, deg), &count) in &classes {
        if deg >= 2 {
            // C_v = triangles / (deg choose 2)
            sum += ratio(BigInt::from(2 * tr) * count, deg * (deg - 1));
        }
    }
    Ok(EmpiricalStats {
        vertices: n,
        edges: graph.num_edges(),
        degree_histogram,
        apl: measure_apl(graph, seed)?,
        clustering: sum / ratio(n, 1),
        clustering_reciprocal,
    })
}

impl EmpiricalStats {
    pub fn to_json(&self) -> Value {
        let hist: serde_json::Map<String, Value> = self
            .degree_histogram
            .iter()
            .map(|(d, c)| (d.to_string(), json!(c)))
            .collect();
        let apl = match &self.apl {
            AplMeasure::Exact {
                distance_sum,
                pairs,
            } => json!({
                "mode": "exact",
                "distance_sum": distance_sum.to_string(),
                "pairs": pairs.to_string(),
                "exact": ratio(*distance_sum, *pairs).to_string(),
                "value": self.apl.value(),
            }),
            AplMeasure::Sampled {
                mean,
                std_err,
                samples,
                seed,
            } => json!({
                "mode": "sampled",
                "value": mean,
                "std_err": std_err,
                "samples": samples,
                "seed": seed,
            }),
        };
        json!({
            "vertices": self.vertices,
            "edges": self.edges,
            "degree_histogram": hist,
            "apl": apl,
            "clustering": rational_json(&self.clustering),
            "clustering_reciprocal": self.clustering_reciprocal,
        })
    }
}

/// Histogram equals the closed-form degree classes exactly.
pub fn histogram_matches(m: u32, t: u32, hist: &BTreeMap<usize, usize>) -> bool {
    let expected: BTreeMap<BigInt, BigInt> = degree_classes(m, t).into_iter().collect();
    let observed: BTreeMap<BigInt, BigInt> = hist
        .iter()
        .map(|(&d, &c)| (BigInt::from(d), BigInt::from(c)))
        .collect();
    expected == observed
}

/// Fraction of vertices with degree at least `2(m+1)^(t-i)` equals
/// `(2(3m+1)^i + 1) / N` for every `i`.
pub fn cumulative_degree_matches(m: u32, t: u32, hist: &BTreeMap<usize, usize>) -> bool {
    let n: usize = hist.values().sum();
    (0..=t).all(|i| {
        let threshold = 2 * (m as usize + 1).pow(t - i);
        let at_least: usize = hist.range(threshold..).map(|(_, c)| c).sum();
        BigInt::from(at_least) == BigInt::from(2) * num_traits::pow(q(m), i as usize) + 1 && n > 0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub id: &'static str,
    pub claim: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

/// Measured claims compared with the closed forms and the quoted limits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimAudit {
    pub m: u32,
    pub t: u32,
    pub entries: Vec<AuditEntry>,
}

impl ClaimAudit {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

/// Relative gap between the APL increment `d_t - d_(t-1)` and `4m/(3m+1)`.
pub fn apl_increment_gap(m: u32, t: u32) -> f64 {
    let inc = apl_closed_form(m, t) - apl_closed_form(m, t - 1);
    let slope = ratio(4 * u64::from(m), 3 * u64::from(m) + 1);
    rational_to_f64(&((inc - &slope) / slope)).abs()
}

/// Horizon at which the finite-t limit claims are evaluated.
pub const APL_INCREMENT_HORIZON: u32 = 5;
pub const CLUSTERING_HORIZON: u32 = 6;

pub fn claim_audit(graph: &KochGraph, stats: &EmpiricalStats) -> Result<ClaimAudit> {
    let (m, t) = (graph.m(), graph.t());
    if t < 2 {
        return Err(Error::Analysis(format!(
            "claim audit needs t >= 2, got t = {t}"
        )));
    }
    let cf = closed_forms(m, t)?;
    let mut entries = Vec::new();

    entries.push(AuditEntry {
        id: "order-size",
        claim: "N = 2(3m+1)^t + 1 and E = 3(3m+1)^t".into(),
        expected: format!("N={} E={}", cf.vertices, cf.edges),
        observed: format!("N={} E={}", stats.vertices, stats.edges),
        pass: BigInt::from(stats.vertices) == cf.vertices && BigInt::from(stats.edges) == cf.edges,
    });

    let (apl_obs, apl_pass) = match &stats.apl {
        AplMeasure::Exact { .. } => {
            let e = stats.apl.exact().expect("exact measure");
            (e.to_string(), e == cf.apl)
        }
        AplMeasure::Sampled { mean, std_err, .. } => (
            format!("{mean} ± {std_err}"),
            (mean - rational_to_f64(&cf.apl)).abs() <= 4.0 * std_err,
        ),
    };
    entries.push(AuditEntry {
        id: "apl-closed-form",
        claim: "average path length equals the closed form (exact rational)".into(),
        expected: cf.apl.to_string(),
        observed: apl_obs,
        pass: apl_pass,
    });

    // Increments shrink toward the slope; checked on the closed form, which the
    // entry above ties to the measurement.
    let horizon = t.max(APL_INCREMENT_HORIZON);
    let gaps: Vec<f64> = (2..=horizon).map(|s| apl_increment_gap(m, s)).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    let last = *gaps.last().expect("horizon >= 2");
    entries.push(AuditEntry {
        id: "apl-increment",
        claim: "APL grows by about 4m/(3m+1) per step".into(),
        expected: format!("relative gap decreasing, <= 0.05 at t = {horizon}"),
        observed: format!(
            "gap(t={t}) = {:.6}, gap(t={horizon}) = {last:.6}",
            apl_increment_gap(m, t)
        ),
        pass: decreasing && last <= 0.05,
    });

    entries.push(AuditEntry {
        id: "clustering-reciprocal",
        claim: "every vertex has local clustering 1/(deg-1)".into(),
        expected: "true".into(),
        observed: stats.clustering_reciprocal.to_string(),
        pass: stats.clustering_reciprocal,
    });

    entries.push(AuditEntry {
        id: "clustering-closed-form",
        claim: "average clustering equals the per-degree-class sum".into(),
        expected: cf.clustering.to_string(),
        observed: stats.clustering.to_string(),
        pass: stats.clustering == cf.clustering,
    });

    let horizon = t.max(CLUSTERING_HORIZON);
    let c_h = rational_to_f64(&clustering_closed_form(m, horizon));
    let (expected, pass) = if m == 1 {
        (
            format!("within 0.01 of {CLUSTERING_CLAIM} at t = {horizon}"),
            (c_h - CLUSTERING_CLAIM).abs() <= 0.01,
        )
    } else {
        let below = rational_to_f64(&clustering_closed_form(m - 1, horizon));
        (
            format!(
                "above the m = {} value {below:.6} and below 1 at t = {horizon}",
                m - 1
            ),
            c_h > below && c_h < 1.0,
        )
    };
    entries.push(AuditEntry {
        id: "clustering-limit",
        claim: format!("average clustering rises from {CLUSTERING_CLAIM} (m = 1) toward 1"),
        expected,
        observed: format!("{c_h:.6}"),
        pass,
    });

    Ok(ClaimAudit { m, t, entries })
}
