//! Library results checked against oracles that share no code with it:
//! petgraph shortest paths, brute-force pair enumeration for betweenness and
//! a plain Gaussian elimination for the resistor network.

#![allow(clippy::needless_range_loop)]

use num_rational::BigRational;
use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use koch_core::analytics::{apl_closed_form, clustering_closed_form, empirical_stats};
use koch_core::centrality::{
    descendant_count, exact_betweenness_on, pair_normalizer, CentralityReport,
};
use koch_core::electrical::{
    self, current_flow_betweenness, path_profile, solve, solve_with, EndpointRule, Laplacian, Mode,
    PairPolicy,
};
use koch_core::graph::{build, KochGraph};
use koch_core::label::enumerate_labels;
use koch_core::labels::neighbor_partition;
use koch_core::routing::{distance, route_ids};

fn petgraph_of(g: &KochGraph) -> UnGraph<(), ()> {
    let mut pg = UnGraph::with_capacity(g.num_vertices(), g.num_edges());
    for _ in 0..g.num_vertices() {
        pg.add_node(());
    }
    for (u, v) in g.edges() {
        pg.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
    }
    pg
}

fn distance_matrix(g: &KochGraph) -> Vec<Vec<u32>> {
    let pg = petgraph_of(g);
    (0..g.num_vertices())
        .map(|s| {
            let d = dijkstra(&pg, NodeIndex::new(s), None, |_| 1u32);
            let mut row = vec![u32::MAX; g.num_vertices()];
            for (k, v) in d {
                row[k.index()] = v;
            }
            row
        })
        .collect()
}

/// Shortest-path counts from the distance matrix: sigma[s][v] sums sigma[s][w]
/// over neighbors w one step closer to s.
fn path_counts(g: &KochGraph, dist: &[Vec<u32>]) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    (0..n)
        .map(|s| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| dist[s][v]);
            let mut sigma = vec![0.0; n];
            sigma[s] = 1.0;
            for &v in &order[1..] {
                sigma[v] = g
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| dist[s][w] + 1 == dist[s][v])
                    .map(|&w| sigma[w])
                    .sum();
            }
            sigma
        })
        .collect()
}

#[test]
fn routes_match_petgraph_on_every_pair() {
    for (m, t) in [(1, 2), (2, 2), (3, 1), (1, 3)] {
        let g = build(m, t).unwrap();
        let dist = distance_matrix(&g);
        for s in 0..g.num_vertices() {
            for x in 0..g.num_vertices() {
                let d = distance(m, t, &g.label(s), &g.label(x)).unwrap();
                assert_eq!(
                    d as u32,
                    dist[s][x],
                    "K_{m},{t}: {} -> {}",
                    g.label(s),
                    g.label(x)
                );
            }
        }
    }
}

#[test]
fn shortest_paths_are_unique_by_pair_counting() {
    for (m, t) in [(1, 3), (2, 2)] {
        let g = build(m, t).unwrap();
        let dist = distance_matrix(&g);
        let sigma = path_counts(&g, &dist);
        assert!(sigma.iter().flatten().all(|&c| c == 1.0));
    }
}

#[test]
fn betweenness_matches_pair_enumeration() {
    for (m, t) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)] {
        let g = build(m, t).unwrap();
        let n = g.num_vertices();
        let dist = distance_matrix(&g);
        let sigma = path_counts(&g, &dist);
        let norm = pair_normalizer(n);
        let mut vertex = vec![0.0; n];
        for s in 0..n {
            for x in s + 1..n {
                for v in (0..n).filter(|&v| v != s && v != x) {
                    if dist[s][v] + dist[v][x] == dist[s][x] {
                        vertex[v] += sigma[s][v] * sigma[v][x] / sigma[s][x];
                    }
                }
            }
        }
        let b = exact_betweenness_on(g.adjacency());
        for v in 0..n {
            assert!(
                (b.vertex[v] - vertex[v] / norm).abs() < 1e-12,
                "K_{m},{t} vertex {}",
                g.label(v)
            );
        }
        for (k, &(u, w)) in b.edges.iter().enumerate() {
            let mut through = 0.0;
            for s in 0..n {
                for x in s + 1..n {
                    for (a, c) in [(u, w), (w, u)] {
                        if dist[s][a] + 1 + dist[c][x] == dist[s][x] {
                            through += sigma[s][a] * sigma[c][x] / sigma[s][x];
                        }
                    }
                }
            }
            assert!(
                (b.edge[k] - through / norm).abs() < 1e-12,
                "K_{m},{t} edge {u}-{w}"
            );
        }
    }
}

#[test]
fn descendant_counts_match_ancestor_chains() {
    for (m, t) in [(1, 3), (2, 2), (3, 2)] {
        let g = build(m, t).unwrap();
        let mut below = vec![0u128; g.num_vertices()];
        for v in g.vertices() {
            let mut cur = v.father;
            while let Some(f) = cur {
                below[f] += 1;
                cur = g.vertex(f).father;
            }
        }
        for v in g.vertices() {
            assert_eq!(
                below[v.id],
                descendant_count(m, t, v.birth_step).unwrap(),
                "{}",
                v.label
            );
        }
    }
}

#[test]
fn apl_and_clustering_closed_forms_match_measurement() {
    for m in 1..=3 {
        for t in 0..=2 {
            let g = build(m, t).unwrap();
            let dist = distance_matrix(&g);
            let n = g.num_vertices();
            let sum: u64 = (0..n)
                .flat_map(|s| (s + 1..n).map(move |x| (s, x)))
                .map(|(s, x)| u64::from(dist[s][x]))
                .sum();
            let pairs = (n * (n - 1) / 2) as u64;
            let measured = BigRational::new(sum.into(), pairs.into());
            assert_eq!(measured, apl_closed_form(m, t), "K_{m},{t}");
            let stats = empirical_stats(&g).unwrap();
            assert_eq!(stats.clustering, clustering_closed_form(m, t));
        }
    }
}

#[test]
fn k22_neighbor_partition_matches_adjacency() {
    let g = build(2, 2).unwrap();
    let labels = enumerate_labels(2, 2).unwrap();
    assert_eq!(labels.len(), g.num_vertices());
    for l in labels {
        let v = g.vertex_by_label(&l).unwrap();
        let mut want: Vec<_> = g.neighbors(v).iter().map(|&w| g.label(w)).collect();
        want.sort();
        assert_eq!(neighbor_partition(2, 2, &l).unwrap().all(), want);
    }
}

/// Grounded Laplacian solve by Gaussian elimination with partial pivoting.
fn resistance_by_elimination(g: &KochGraph, s: usize, x: usize) -> f64 {
    let n = g.num_vertices();
    // Ground x; unknowns are all other vertices.
    let idx: Vec<usize> = (0..n).filter(|&v| v != x).collect();
    let pos = |v: usize| if v < x { v } else { v - 1 };
    let k = n - 1;
    let mut a = vec![vec![0.0; k + 1]; k];
    for &v in &idx {
        let r = pos(v);
        a[r][r] = g.degree(v) as f64;
        for &w in g.neighbors(v) {
            if w != x {
                a[r][pos(w)] -= 1.0;
            }
        }
    }
    a[pos(s)][k] = 1.0;
    for col in 0..k {
        let p = (col..k)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, p);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for c in col..=k {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut phi = vec![0.0; k];
    for row in (0..k).rev() {
        let tail: f64 = (row + 1..k).map(|c| a[row][c] * phi[c]).sum();
        phi[row] = (a[row][k] - tail) / a[row][row];
    }
    phi[pos(s)]
}

#[test]
fn effective_resistance_matches_elimination_and_series_law() {
    let g = build(1, 2).unwrap();
    let lap = Laplacian::new(g.adjacency()).unwrap();
    for s in 0..g.num_vertices() {
        for x in s + 1..g.num_vertices() {
            let d = distance(1, 2, &g.label(s), &g.label(x)).unwrap() as f64;
            let r = solve_with(&lap, &g, s, x, Mode::UnitCurrent)
                .unwrap()
                .effective_resistance;
            let oracle = resistance_by_elimination(&g, s, x);
            assert!((r - oracle).abs() < 1e-10);
            assert!((r - 2.0 * d / 3.0).abs() < 1e-9);
        }
    }
}

#[test]
fn series_law_on_random_k23_pairs() {
    let g = build(2, 3).unwrap();
    let lap = Laplacian::new(g.adjacency()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6B6F_6368);
    let n = g.num_vertices();
    for _ in 0..1000 {
        let (s, x) = (rng.random_range(0..n), rng.random_range(0..n));
        if s == x {
            continue;
        }
        let d = route_ids(&g, s, x).unwrap().len() - 1;
        let fwd = solve_with(&lap, &g, s, x, Mode::UnitCurrent).unwrap();
        let back = solve_with(&lap, &g, x, s, Mode::UnitCurrent).unwrap();
        assert!((fwd.effective_resistance - 2.0 * d as f64 / 3.0).abs() < 1e-9);
        assert!((fwd.effective_resistance - back.effective_resistance).abs() < 1e-9);
        assert!(fwd.effective_resistance <= d as f64 + 1e-12);
    }
}

#[test]
fn iterative_solver_above_dense_limit() {
    let g = build(1, 5).unwrap();
    assert!(g.num_vertices() > electrical::DENSE_LIMIT);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let (s, x) = loop {
            let p = (
                rng.random_range(0..g.num_vertices()),
                rng.random_range(0..g.num_vertices()),
            );
            if p.0 != p.1 {
                break p;
            }
        };
        let pp = path_profile(&g, s, x).unwrap();
        assert!(
            pp.thm6 && pp.thm7 && pp.thm8,
            "{} -> {}",
            g.label(s),
            g.label(x)
        );
        let r = solve(&g, s, x, Mode::UnitCurrent)
            .unwrap()
            .effective_resistance;
        assert!((r - 2.0 * pp.d as f64 / 3.0).abs() < 1e-9);
    }
}

#[test]
fn sampled_current_flow_within_three_sigma() {
    let g = build(1, 2).unwrap();
    let exact =
        current_flow_betweenness(&g, PairPolicy::Exhaustive, EndpointRule::Interior).unwrap();
    let sampled = current_flow_betweenness(
        &g,
        PairPolicy::Sampled {
            pairs: 4000,
            seed: 0x6B6F_6368,
        },
        EndpointRule::Interior,
    )
    .unwrap();
    let se = sampled.std_err.as_ref().unwrap();
    for v in 0..g.num_vertices() {
        let gap = (sampled.values[v] - exact.values[v]).abs();
        assert!(
            gap <= 3.0 * se[v] + 1e-12,
            "{}: {gap} vs 3 x {}",
            g.label(v),
            se[v]
        );
    }
}

#[test]
fn dangling_subtrees_sit_at_their_attachment_potential() {
    let g = build(1, 2).unwrap();
    let n = g.num_vertices();
    for (s, x) in [(0, 1), (3, 20), (10, 2)] {
        let p = solve(&g, s, x, Mode::UnitVoltage).unwrap();
        let support: std::collections::HashSet<_> = p.support_edges.iter().copied().collect();
        // Components of the graph with the current-carrying edges removed.
        let mut comp = vec![usize::MAX; n];
        for root in 0..n {
            if comp[root] != usize::MAX {
                continue;
            }
            let mut stack = vec![root];
            comp[root] = root;
            while let Some(u) = stack.pop() {
                for &w in g.neighbors(u) {
                    if comp[w] == usize::MAX && !support.contains(&(u.min(w), u.max(w))) {
                        comp[w] = root;
                        stack.push(w);
                    }
                }
            }
        }
        for v in 0..n {
            assert!((p.potentials[v] - p.potentials[comp[v]]).abs() < 1e-9);
        }
    }
}

#[test]
fn report_rows_cover_the_graph() {
    let g = build(2, 2).unwrap();
    let r = CentralityReport::compute(&g).unwrap();
    assert_eq!(r.vertices.len(), g.num_vertices());
    assert_eq!(r.edges.len(), g.num_edges());
    assert!(r.vertices.iter().all(|v| (0.0..=1.0).contains(&v.exact)));
    assert!(r.edges.iter().all(|e| (0.0..=1.0).contains(&e.exact)));
}
