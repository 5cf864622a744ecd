//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::HashSet;
use std::process::{Command, ExitCode};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use koch_core::analytics::{self, empirical_stats, histogram_matches, AplMeasure};
use koch_core::centrality::{self, CentralityReport};
use koch_core::electrical::{self, Laplacian, Mode};
use koch_core::graph::{build, triangle_count, KochGraph};
use koch_core::label::enumerate_labels;
use koch_core::labels::neighbor_partition;
use koch_core::routing::{bfs_distances, route};
use koch_core::verify::{self, Status, Suite, VerifyOptions};
use koch_core::{parse_label, Label};

const SEED: u64 = 0x6B6F_6368;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }
}

fn id(g: &KochGraph, text: &str) -> usize {
    g.vertex_by_label(&parse_label(text, g.m()).unwrap())
        .unwrap()
}

fn order_size() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=3u32 {
        for t in 0..=5u32 {
            let g = build(m, t).unwrap();
            let q = triangle_count(m, t).unwrap() as usize;
            if g.num_vertices() != 2 * q + 1 || g.num_edges() != 3 * q {
                bad.push(format!(
                    "K_{m},{t}: N={} E={}",
                    g.num_vertices(),
                    g.num_edges()
                ));
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("18 graphs, m 1..3 x t 0..5; mismatches {bad:?}"),
    )
}

fn label_bijection() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=3u32 {
        for t in 0..=4u32 {
            let g = build(m, t).unwrap();
            let labels = enumerate_labels(m, t).unwrap();
            let ids: HashSet<usize> = labels
                .iter()
                .filter_map(|l| g.vertex_by_label(l).ok())
                .collect();
            let back = labels.iter().all(|l| {
                g.vertex_by_label(l)
                    .map(|v| g.label(v) == *l)
                    .unwrap_or(false)
            });
            if labels.len() != g.num_vertices() || ids.len() != g.num_vertices() || !back {
                bad.push(format!("K_{m},{t}"));
            }
        }
    }
    Outcome::new(bad.is_empty(), format!("m <= 3, t <= 4; failures {bad:?}"))
}

fn neighbor_equivalence() -> Outcome {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for m in 1..=3u32 {
        for t in 0..=4u32 {
            let g = build(m, t).unwrap();
            for v in 0..g.num_vertices() {
                let l = g.label(v);
                let mut want: Vec<Label> = g.neighbors(v).iter().map(|&w| g.label(w)).collect();
                want.sort();
                if neighbor_partition(m, t, &l).unwrap().all() != want {
                    bad.push(format!("K_{m},{t} {l}"));
                }
                checked += 1;
            }
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!("{checked} vertices; mismatches {}", bad.len()),
    )
}

struct RouteStats {
    pairs: usize,
    wrong: Vec<String>,
    max_ops_over_bound: i64,
    max_ops_over_2t: i64,
}

fn check_routes(g: &KochGraph, pairs: &[(usize, Vec<usize>)], st: &mut RouteStats) {
    let (m, t) = (g.m(), g.t());
    for (s, targets) in pairs {
        let bfs = bfs_distances(g, *s);
        for &x in targets {
            let r = route(m, t, &g.label(*s), &g.label(x)).unwrap();
            st.pairs += 1;
            if r.length() as u32 != bfs.dist[x] {
                st.wrong
                    .push(format!("K_{m},{t} {} -> {}", g.label(*s), g.label(x)));
            }
            st.max_ops_over_bound = st
                .max_ops_over_bound
                .max(i64::from(r.ops_used) - i64::from(2 * t + 3));
            st.max_ops_over_2t = st
                .max_ops_over_2t
                .max(i64::from(r.ops_used) - i64::from(2 * t));
        }
    }
}

fn routing_optimality() -> Outcome {
    let mut st = RouteStats {
        pairs: 0,
        wrong: Vec::new(),
        max_ops_over_bound: i64::MIN,
        max_ops_over_2t: i64::MIN,
    };
    for m in 1..=2u32 {
        for t in 0..=3u32 {
            let g = build(m, t).unwrap();
            let n = g.num_vertices();
            let all: Vec<(usize, Vec<usize>)> = (0..n).map(|s| (s, (0..n).collect())).collect();
            check_routes(&g, &all, &mut st);
        }
    }
    let exhaustive = st.pairs;
    for m in 1..=3u32 {
        let g = build(m, 4).unwrap();
        let n = g.num_vertices();
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let mut by_source = std::collections::BTreeMap::<usize, Vec<usize>>::new();
        for _ in 0..100_000 {
            by_source
                .entry(rng.random_range(0..n))
                .or_default()
                .push(rng.random_range(0..n));
        }
        let pairs: Vec<(usize, Vec<usize>)> = by_source.into_iter().collect();
        check_routes(&g, &pairs, &mut st);
    }
    let mut o = Outcome::new(
        st.wrong.is_empty() && st.max_ops_over_bound <= 0,
        format!(
            "{exhaustive} exhaustive + {} sampled pairs; length mismatches {}; max ops - (2t+3) = {}",
            st.pairs - exhaustive,
            st.wrong.len(),
            st.max_ops_over_bound
        ),
    );
    o.notes.push(format!(
        "max ops - 2t = {} (the 2t figure needs the documented slack)",
        st.max_ops_over_2t
    ));
    o
}

fn uniqueness_audit() -> Outcome {
    let mut violations = Vec::new();
    let mut pairs = 0usize;
    for m in 1..=2u32 {
        for t in 0..=3u32 {
            let g = build(m, t).unwrap();
            for s in 0..g.num_vertices() {
                let bfs = bfs_distances(&g, s);
                for x in s + 1..g.num_vertices() {
                    pairs += 1;
                    if bfs.sigma[x] != 1 {
                        violations.push(format!(
                            "K_{m},{t} {}->{} sigma={}",
                            g.label(s),
                            g.label(x),
                            bfs.sigma[x]
                        ));
                    }
                }
            }
        }
    }
    let mut o = Outcome::new(
        violations.is_empty(),
        format!("{pairs} pairs; {} violations", violations.len()),
    );
    o.notes.extend(violations.into_iter().take(20));
    o
}

fn degree_structure() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=3u32 {
        for t in 0..=4u32 {
            let g = build(m, t).unwrap();
            let hist_ok = {
                let mut h = std::collections::BTreeMap::new();
                for v in 0..g.num_vertices() {
                    *h.entry(g.degree(v)).or_insert(0usize) += 1;
                }
                histogram_matches(m, t, &h)
            };
            // C_v = tri / (k(k-1)/2) equals 1/(k-1) exactly iff 2 tri = k.
            let clustering_ok =
                (0..g.num_vertices()).all(|v| 2 * analytics::triangles_at(&g, v) == g.degree(v));
            if !hist_ok || !clustering_ok {
                bad.push(format!(
                    "K_{m},{t} hist={hist_ok} clustering={clustering_ok}"
                ));
            }
        }
    }
    Outcome::new(bad.is_empty(), format!("m <= 3, t <= 4; failures {bad:?}"))
}

fn exact_apl(g: &KochGraph) -> BigRational {
    match empirical_stats(g).unwrap().apl {
        AplMeasure::Exact {
            distance_sum,
            pairs,
        } => BigRational::new(distance_sum.into(), pairs.into()),
        AplMeasure::Sampled { .. } => panic!("K_{},{} too large for exact APL", g.m(), g.t()),
    }
}

fn apl_closed_form() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=3u32 {
        for t in 0..=3u32 {
            let g = build(m, t).unwrap();
            let measured = exact_apl(&g);
            if measured != analytics::apl_closed_form(m, t) {
                bad.push(format!(
                    "K_{m},{t}: {measured} vs {}",
                    analytics::apl_closed_form(m, t)
                ));
            }
        }
    }
    let k16 = build(1, 6).unwrap();
    let c = analytics::rational_to_f64(&empirical_stats(&k16).unwrap().clustering);
    let clustering_ok = (c - analytics::CLUSTERING_CLAIM).abs() <= 0.01;
    let d5 = analytics::rational_to_f64(&exact_apl(&build(1, 5).unwrap()));
    let d4 = analytics::rational_to_f64(&exact_apl(&build(1, 4).unwrap()));
    let m = 1.0;
    let slope = 4.0 * m / (3.0 * m + 1.0);
    let rel = ((d5 - d4) - slope).abs() / slope;
    Outcome::new(
        bad.is_empty() && clustering_ok && rel <= 0.05,
        format!(
            "12 exact rational matches (failures {bad:?}); C(K_1,6) = {c:.6} vs 0.82008 +- 0.01; \
             d5 - d4 = {:.6} vs 4m/(3m+1) = 1, rel gap {rel:.4} <= 0.05",
            d5 - d4
        ),
    )
}

fn betweenness_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let mut symmetry: f64 = 0.0;
    let mut reports = Vec::new();
    for (m, t) in [
        (1, 1),
        (1, 2),
        (1, 3),
        (1, 4),
        (1, 6),
        (2, 1),
        (2, 2),
        (2, 3),
        (2, 4),
        (3, 1),
        (3, 2),
        (3, 3),
    ] {
        let g = build(m, t).unwrap();
        let r = CentralityReport::compute(&g).unwrap();
        for (_, lo, hi) in r.birth_step_spread() {
            symmetry = symmetry.max(hi - lo);
        }
        if r.vertices.iter().any(|v| v.birth == t && v.exact != 0.0) {
            failures.push(format!("K_{m},{t}: nonzero leaf betweenness"));
        }
        reports.push((g, r));
    }
    if symmetry > 1e-12 {
        failures.push(format!("within-birth spread {symmetry:e}"));
    }

    // First-order composition at t - birth <= 1.
    let mut m1_gap: f64 = 0.0;
    let mut cross_gap: f64 = 0.0;
    for (g, r) in &reports {
        let (m, t) = (g.m(), g.t());
        for v in r.vertices.iter().filter(|v| t - v.birth <= 1) {
            let gap = v.exact - v.firstorder;
            if m == 1 {
                m1_gap = m1_gap.max(gap.abs());
            } else {
                let extra = if t - v.birth == 1 {
                    centrality::cross_group_pairs(m) as f64 / r.normalizer
                } else {
                    0.0
                };
                cross_gap = cross_gap.max((gap - extra).abs());
            }
        }
    }
    if m1_gap > 1e-12 {
        failures.push(format!("m = 1 first-order gap {m1_gap:e}"));
    }
    if cross_gap > 1e-12 {
        failures.push(format!(
            "m >= 2 cross-group correction off by {cross_gap:e}"
        ));
    }
    notes.push(format!(
        "first-order = exact for m = 1 (max gap {m1_gap:e}); for m >= 2 at t - birth = 1 exact exceeds it by \
         exactly 2m(m-1) cross-group son pairs (residual {cross_gap:e})"
    ));

    let (k11, r11) = &reports[0];
    let hub = r11.vertices[k11.hub(1)].exact;
    let edge = r11
        .edges
        .iter()
        .find(|e| {
            (e.u, e.v) == (k11.hub(1), id(k11, "10.1"))
                || (e.v, e.u) == (k11.hub(1), id(k11, "10.1"))
        })
        .unwrap()
        .exact;
    if (hub - 3.0 / 7.0).abs() > 1e-12 || (edge - 0.25).abs() > 1e-12 {
        failures.push(format!("K_1,1 hub {hub}, edge (10.1, 1) {edge}"));
    }

    // Discrepancy report: rows exist, are flagged, and carry the printed values.
    let report = verify::run(1, 3, Suite::Centrality, &VerifyOptions::default()).unwrap();
    let flagged = [
        "centrality.printed-vertex-formula",
        "centrality.printed-edge-formula",
    ]
    .iter()
    .all(|id| report.check(id).map(|c| c.status) == Some(Status::PaperDiscrepancy));
    let eq9 = centrality::paper_vertex_betweenness(1, 1, 0).unwrap();
    let eq12 = centrality::paper_edge_betweenness(1, 1, 1).unwrap();
    let audit = r11.audit();
    let printed_ok = eq9 == 0.0
        && (eq12 - 0.125).abs() < 1e-15
        && r11.vertices[k11.hub(1)].paper == eq9
        && !audit.eq9_matches
        && !audit.eq12_matches;
    if !(flagged && printed_ok && report.passed()) {
        failures.push(format!(
            "discrepancy report flagged={flagged} printed={printed_ok} passed={}",
            report.passed()
        ));
    }

    let k16 = &reports[4].1;
    let fit = centrality::scaling_fit(k16).unwrap();
    let rel =
        (fit.gamma_hat - centrality::degree_exponent(1)).abs() / centrality::degree_exponent(1);
    if rel > 0.15 {
        failures.push(format!("gamma_hat {}", fit.gamma_hat));
    }
    let mut o = Outcome::new(
        failures.is_empty(),
        format!(
            "spread {symmetry:e}; K_1,1 hub {hub:.12} edge {edge:.12}; printed vertex/edge rows flagged ({eq9} vs 3/7, {eq12} vs 1/4); \
             gamma_hat(1,6) = {:.4}, rel gap {rel:.4}; failures {failures:?}",
            fit.gamma_hat
        ),
    );
    o.notes = notes;
    o
}

fn electrical_theorems() -> Outcome {
    let mut worst = [0.0f64; 4];
    let mut flags = true;
    let mut pairs = 0;
    let mut run = |g: &KochGraph, list: Vec<(usize, usize)>| {
        let lap = Laplacian::new(g.adjacency()).unwrap();
        for (s, x) in list {
            let pp = electrical::path_profile_with(&lap, g, s, x).unwrap();
            let r = electrical::solve_with(&lap, g, s, x, Mode::UnitCurrent)
                .unwrap()
                .effective_resistance;
            flags &= pp.profile.support_edges == pp.expected_support;
            worst[0] = worst[0].max(pp.max_offpath_current);
            worst[1] = worst[1].max(pp.max_voltage_error);
            worst[2] = worst[2].max(pp.max_split_error);
            worst[3] = worst[3].max((r - 2.0 * pp.d as f64 / 3.0).abs());
            pairs += 1;
        }
    };
    let k11 = build(1, 1).unwrap();
    let all: Vec<(usize, usize)> = (0..k11.num_vertices())
        .flat_map(|s| (s + 1..k11.num_vertices()).map(move |x| (s, x)))
        .collect();
    run(&k11, all);
    let k22 = build(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = k22.num_vertices();
    let random: Vec<(usize, usize)> = (0..50)
        .map(|_| loop {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b {
                break (a, b);
            }
        })
        .collect();
    run(&k22, random);
    let tri = build(1, 0).unwrap();
    let base = electrical::solve(&tri, 0, 1, Mode::UnitCurrent)
        .unwrap()
        .effective_resistance;
    let base_err = (base - 2.0 / 3.0).abs();
    Outcome::new(
        flags && worst.iter().all(|&w| w < 1e-9) && base_err < electrical::RESIDUAL_TOL,
        format!(
            "{pairs} pairs; support = path triangles: {flags}; off-path {:e}, voltages {:e}, split {:e}, \
             R - 2d/3 {:e} (all < 1e-9); triangle R error {base_err:e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn determinism() -> Outcome {
    let run = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_koch"))
            .args([
                "verify", "--m", "1", "--t", "3", "--suite", "all", "--jobs", jobs,
            ])
            .output()
            .unwrap()
    };
    let a = run("4");
    let b = run("4");
    let c = run("1");
    let same = a.stdout == b.stdout && a.stdout == c.stdout && !a.stdout.is_empty();
    let ok = a.status.code() == Some(0) && b.status.code() == Some(0);
    Outcome::new(
        same && ok,
        format!(
            "{} bytes, identical across runs and --jobs 1/4: {same}; exit codes {:?}",
            a.stdout.len(),
            a.status.code()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("order/size exactness", order_size),
        ("label bijection", label_bijection),
        ("neighbor-theorem equivalence", neighbor_equivalence),
        ("routing optimality", routing_optimality),
        ("shortest-path uniqueness", uniqueness_audit),
        ("degree structure", degree_structure),
        ("APL closed form", apl_closed_form),
        ("betweenness oracle properties", betweenness_properties),
        ("electrical theorems", electrical_theorems),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!(
            "criterion {:>2} [{}] {name}: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        for n in &o.notes {
            println!("              note: {n}");
        }
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
