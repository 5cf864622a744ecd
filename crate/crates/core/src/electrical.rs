//! Unit-resistor network analysis.
//!
//! Every edge is a 1Ω resistor. Potentials come from the Laplacian grounded
//! at the last vertex: a dense Cholesky factorization up to
//! [`DENSE_LIMIT`] vertices, Jacobi-preconditioned conjugate gradients above.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{KochGraph, VertexId};
use crate::routing::route_ids;

pub const DENSE_LIMIT: usize = 2000;
/// Currents at or below this magnitude (unit injection) count as zero.
pub const CURRENT_EPS: f64 = 1e-9;
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Largest network for exhaustive current-flow betweenness.
pub const CFB_EXHAUSTIVE_LIMIT: usize = 600;
/// Tolerance for the path-voltage and current-split checks.
pub const THEOREM_TOL: f64 = 1e-9;

enum Factor {
    Dense(Cholesky<f64, Dyn>),
    Iterative,
}

/// Grounded Laplacian of a connected undirected graph, factored once.
pub struct Laplacian<'a> {
    adjacency: &'a [Vec<VertexId>],
    factor: Factor,
}

impl<'a> Laplacian<'a> {
    pub fn new(adjacency: &'a [Vec<VertexId>]) -> Result<Self> {
        let n = adjacency.len();
        if n < 2 {
            return Err(Error::Argument("need at least two vertices".into()));
        }
        let factor = if n <= DENSE_LIMIT {
            let ground = n - 1;
            let mut a = DMatrix::<f64>::zeros(n - 1, n - 1);
            for (u, ns) in adjacency.iter().enumerate().take(ground) {
                a[(u, u)] = ns.len() as f64;
                for &w in ns.iter().filter(|&&w| w != ground) {
                    a[(u, w)] -= 1.0;
                }
            }
            let chol = Cholesky::new(a).ok_or_else(|| {
                Error::Internal("grounded Laplacian is singular; graph is disconnected".into())
            })?;
            Factor::Dense(chol)
        } else {
            Factor::Iterative
        };
        Ok(Laplacian { adjacency, factor })
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Potentials for one unit of current from `s` to `t`, with `φ_t = 0`.
    pub fn unit_current(&self, s: VertexId, t: VertexId) -> Result<Vec<f64>> {
        let n = self.len();
        if s == t {
            return Err(Error::Argument("source and target coincide".into()));
        }
        if s >= n || t >= n {
            return Err(Error::Argument("vertex out of range".into()));
        }
        let mut rhs = vec![0.0; n - 1];
        if s < n - 1 {
            rhs[s] += 1.0;
        }
        if t < n - 1 {
            rhs[t] -= 1.0;
        }
        let reduced = match &self.factor {
            Factor::Dense(chol) => chol.solve(&DVector::from_vec(rhs)).data.into(),
            Factor::Iterative => self.conjugate_gradient(&rhs)?,
        };
        let mut phi = reduced;
        phi.push(0.0);
        let shift = phi[t];
        phi.iter_mut().for_each(|x| *x -= shift);

        let residual = self.residual(&phi, s, t);
        // Also rejects NaN.
        if residual.is_nan() || residual >= RESIDUAL_TOL {
            return Err(Error::Internal(format!(
                "Laplacian solve residual {residual:e} above {RESIDUAL_TOL:e}"
            )));
        }
        Ok(phi)
    }

    /// `‖Lφ - (e_s - e_t)‖_∞`.
    pub fn residual(&self, phi: &[f64], s: VertexId, t: VertexId) -> f64 {
        self.adjacency
            .iter()
            .enumerate()
            .map(|(u, ns)| {
                let lu: f64 = ns.iter().map(|&w| phi[u] - phi[w]).sum();
                let b = if u == s {
                    1.0
                } else if u == t {
                    -1.0
                } else {
                    0.0
                };
                (lu - b).abs()
            })
            .fold(0.0, f64::max)
    }

    fn apply_reduced(&self, x: &[f64], out: &mut [f64]) {
        let ground = self.len() - 1;
        for (u, o) in out.iter_mut().enumerate() {
            let ns = &self.adjacency[u];
            let mut acc = ns.len() as f64 * x[u];
            for &w in ns {
                if w != ground {
                    acc -= x[w];
                }
            }
            *o = acc;
        }
    }

    fn conjugate_gradient(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = b.len();
        let inv_diag: Vec<f64> = (0..n)
            .map(|u| 1.0 / self.adjacency[u].len() as f64)
            .collect();
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let max_iter = 20 * n + 100;
        for _ in 0..max_iter {
            if r.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-13 {
                return Ok(x);
            }
            self.apply_reduced(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::Internal(format!(
            "conjugate gradients did not converge in {max_iter} iterations"
        )))
    }

    /// Dense inverse of the grounded Laplacian, padded with a zero ground
    /// row and column.
    fn grounded_inverse(&self) -> Result<DMatrix<f64>> {
        let n = self.len();
        let inv = match &self.factor {
            Factor::Dense(chol) => chol.inverse(),
            Factor::Iterative => {
                return Err(Error::SizeCap {
                    requested: n as u128,
                    cap: DENSE_LIMIT as u64,
                })
            }
        };
        let mut full = DMatrix::<f64>::zeros(n, n);
        full.view_mut((0, 0), (n - 1, n - 1)).copy_from(&inv);
        Ok(full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// `φ_s = 1`, `φ_t = 0`.
    UnitVoltage,
    /// One unit injected at `s`, extracted at `t`, `φ_t = 0`.
    UnitCurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeCurrent {
    pub u: VertexId,
    pub v: VertexId,
    /// Flow from `u` to `v` (`u < v`).
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElectricalProfile {
    pub source: VertexId,
    pub target: VertexId,
    pub mode: Mode,
    pub potentials: Vec<f64>,
    pub edge_currents: Vec<EdgeCurrent>,
    /// Shortest path from source to target.
    pub path: Vec<VertexId>,
    pub on_path_voltages: Vec<f64>,
    /// Potential of the third corner of each path edge's triangle.
    pub companion_voltages: Vec<f64>,
    pub support_edges: Vec<(VertexId, VertexId)>,
    pub effective_resistance: f64,
}

impl ElectricalProfile {
    pub fn current(&self, u: VertexId, v: VertexId) -> f64 {
        let key = (u.min(v), u.max(v));
        let i = self
            .edge_currents
            .binary_search_by(|e| (e.u, e.v).cmp(&key))
            .expect("edge exists");
        let c = self.edge_currents[i].current;
        if u < v {
            c
        } else {
            -c
        }
    }

    /// Net current leaving the source.
    pub fn source_outflow(&self) -> f64 {
        let s = self.source;
        self.edge_currents
            .iter()
            .filter_map(|e| {
                if e.u == s {
                    Some(e.current)
                } else if e.v == s {
                    Some(-e.current)
                } else {
                    None
                }
            })
            .sum()
    }

    /// Largest net current at any vertex other than source and target.
    pub fn kirchhoff_defect(&self) -> f64 {
        let mut net = vec![0.0; self.potentials.len()];
        for e in &self.edge_currents {
            net[e.u] += e.current;
            net[e.v] -= e.current;
        }
        net.iter()
            .enumerate()
            .filter(|&(i, _)| i != self.source && i != self.target)
            .map(|(_, x)| x.abs())
            .fold(0.0, f64::max)
    }
}

fn edge_currents(adjacency: &[Vec<VertexId>], phi: &[f64]) -> Vec<EdgeCurrent> {
    adjacency
        .iter()
        .enumerate()
        .flat_map(|(u, ns)| {
            ns.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| EdgeCurrent {
                    u,
                    v,
                    current: phi[u] - phi[v],
                })
        })
        .collect()
}

/// Potentials for a pair in the requested mode, plus the effective resistance.
pub fn potentials_on(
    adjacency: &[Vec<VertexId>],
    s: VertexId,
    t: VertexId,
    mode: Mode,
) -> Result<(Vec<f64>, f64)> {
    let lap = Laplacian::new(adjacency)?;
    potentials_with(&lap, s, t, mode)
}

fn potentials_with(
    lap: &Laplacian<'_>,
    s: VertexId,
    t: VertexId,
    mode: Mode,
) -> Result<(Vec<f64>, f64)> {
    let mut phi = lap.unit_current(s, t)?;
    let r = phi[s] - phi[t];
    if mode == Mode::UnitVoltage {
        phi.iter_mut().for_each(|x| *x /= r);
    }
    Ok((phi, r))
}

pub fn solve(
    graph: &KochGraph,
    source: VertexId,
    target: VertexId,
    mode: Mode,
) -> Result<ElectricalProfile> {
    if source == target {
        return Err(Error::Argument("source and target coincide".into()));
    }
    solve_with(
        &Laplacian::new(graph.adjacency())?,
        graph,
        source,
        target,
        mode,
    )
}

/// [`solve`] reusing a factored Laplacian of `graph`.
pub fn solve_with(
    lap: &Laplacian<'_>,
    graph: &KochGraph,
    source: VertexId,
    target: VertexId,
    mode: Mode,
) -> Result<ElectricalProfile> {
    let adjacency = graph.adjacency();
    let (potentials, effective_resistance) = potentials_with(lap, source, target, mode)?;
    let edge_currents = edge_currents(adjacency, &potentials);
    let path = route_ids(graph, source, target)?;
    let on_path_voltages = path.iter().map(|&v| potentials[v]).collect();
    let companion_voltages = path
        .windows(2)
        .map(|w| {
            let z = graph
                .third_vertex(w[0], w[1])
                .ok_or_else(|| Error::Internal("path edge outside any triangle".into()))?;
            Ok(potentials[z])
        })
        .collect::<Result<Vec<_>>>()?;
    let support_edges = edge_currents
        .iter()
        .filter(|e| e.current.abs() > CURRENT_EPS * scale_for(mode, effective_resistance))
        .map(|e| (e.u, e.v))
        .collect();
    Ok(ElectricalProfile {
        source,
        target,
        mode,
        potentials,
        edge_currents,
        path,
        on_path_voltages,
        companion_voltages,
        support_edges,
        effective_resistance,
    })
}

/// Converts the unit-injection threshold into the profile's current scale.
fn scale_for(mode: Mode, r: f64) -> f64 {
    match mode {
        Mode::UnitCurrent => 1.0,
        Mode::UnitVoltage => 1.0 / r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleSplit {
    pub direct: f64,
    pub detour_first: f64,
    pub detour_second: f64,
}

/// Unit-voltage profile plus the checks on where current flows and how
/// voltage falls along the shortest path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathProfile {
    pub profile: ElectricalProfile,
    pub d: usize,
    /// The `3d` edges of the triangles holding the path's edges.
    pub expected_support: Vec<(VertexId, VertexId)>,
    pub max_offpath_current: f64,
    pub max_voltage_error: f64,
    /// Fractions of the total pair current per path triangle.
    pub splits: Vec<TriangleSplit>,
    pub max_split_error: f64,
    /// Current is confined to the path's triangle chain.
    pub thm6: bool,
    /// Path voltages step by `1/d`; third corners sit halfway.
    pub thm7: bool,
    /// Each triangle passes 2/3 directly and 1/3 around.
    pub thm8: bool,
}

pub fn path_profile(graph: &KochGraph, source: VertexId, target: VertexId) -> Result<PathProfile> {
    if source == target {
        return Err(Error::Argument("source and target coincide".into()));
    }
    path_profile_with(&Laplacian::new(graph.adjacency())?, graph, source, target)
}

pub fn path_profile_with(
    lap: &Laplacian<'_>,
    graph: &KochGraph,
    source: VertexId,
    target: VertexId,
) -> Result<PathProfile> {
    let profile = solve_with(lap, graph, source, target, Mode::UnitVoltage)?;
    let d = profile.path.len() - 1;
    let df = d as f64;

    let mut expected_support = Vec::with_capacity(3 * d);
    for w in profile.path.windows(2) {
        let (x, y) = (w[0], w[1]);
        let z = graph
            .third_vertex(x, y)
            .expect("every edge lies in a triangle");
        for (a, b) in [(x, y), (x, z), (y, z)] {
            expected_support.push((a.min(b), a.max(b)));
        }
    }
    expected_support.sort_unstable();
    expected_support.dedup();

    // Unit-voltage currents scaled back to a unit injection.
    let r = profile.effective_resistance;
    let max_offpath_current = profile
        .edge_currents
        .iter()
        .filter(|e| expected_support.binary_search(&(e.u, e.v)).is_err())
        .map(|e| (e.current * r).abs())
        .fold(0.0, f64::max);
    let thm6 = profile.support_edges == expected_support && max_offpath_current < CURRENT_EPS;

    let mut max_voltage_error: f64 = 0.0;
    for (k, &v) in profile.on_path_voltages.iter().enumerate() {
        max_voltage_error = max_voltage_error.max((v - (1.0 - k as f64 / df)).abs());
    }
    for (k, &v) in profile.companion_voltages.iter().enumerate() {
        let expect = 1.0 - (2.0 * k as f64 + 1.0) / (2.0 * df);
        max_voltage_error = max_voltage_error.max((v - expect).abs());
    }
    let thm7 = max_voltage_error < THEOREM_TOL;

    let total = profile.source_outflow();
    let mut splits = Vec::with_capacity(d);
    let mut max_split_error: f64 = 0.0;
    for w in profile.path.windows(2) {
        let (x, y) = (w[0], w[1]);
        let z = graph
            .third_vertex(x, y)
            .expect("every edge lies in a triangle");
        let split = TriangleSplit {
            direct: profile.current(x, y) / total,
            detour_first: profile.current(x, z) / total,
            detour_second: profile.current(z, y) / total,
        };
        max_split_error = max_split_error
            .max((split.direct - 2.0 / 3.0).abs())
            .max((split.detour_first - 1.0 / 3.0).abs())
            .max((split.detour_second - 1.0 / 3.0).abs());
        splits.push(split);
    }
    let thm8 = max_split_error < THEOREM_TOL;

    Ok(PathProfile {
        profile,
        d,
        expected_support,
        max_offpath_current,
        max_voltage_error,
        splits,
        max_split_error,
        thm6,
        thm7,
        thm8,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairPolicy {
    Exhaustive,
    Sampled { pairs: usize, seed: u64 },
}

/// How a pair's own endpoints count toward their current-flow betweenness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EndpointRule {
    /// Endpoints contribute 0.
    #[default]
    Interior,
    /// Endpoints contribute the full unit current.
    CountAsOne,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurrentFlow {
    pub values: Vec<f64>,
    /// Standard error per vertex when pairs were sampled.
    pub std_err: Option<Vec<f64>>,
    pub pairs: usize,
}

fn throughput(
    adjacency: &[Vec<VertexId>],
    phi: &[f64],
    s: VertexId,
    t: VertexId,
    rule: EndpointRule,
    out: &mut [f64],
) {
    for (v, ns) in adjacency.iter().enumerate() {
        out[v] = if v == s || v == t {
            match rule {
                EndpointRule::Interior => 0.0,
                EndpointRule::CountAsOne => 1.0,
            }
        } else {
            0.5 * ns.iter().map(|&w| (phi[v] - phi[w]).abs()).sum::<f64>()
        };
    }
}

/// Average current through each vertex over source–target pairs.
pub fn current_flow_betweenness(
    graph: &KochGraph,
    policy: PairPolicy,
    rule: EndpointRule,
) -> Result<CurrentFlow> {
    current_flow_on(graph.adjacency(), policy, rule)
}

pub fn current_flow_on(
    adjacency: &[Vec<VertexId>],
    policy: PairPolicy,
    rule: EndpointRule,
) -> Result<CurrentFlow> {
    let n = adjacency.len();
    let lap = Laplacian::new(adjacency)?;
    match policy {
        PairPolicy::Exhaustive => {
            if n > CFB_EXHAUSTIVE_LIMIT {
                return Err(Error::SizeCap {
                    requested: n as u128,
                    cap: CFB_EXHAUSTIVE_LIMIT as u64,
                });
            }
            let inv = lap.grounded_inverse()?;
            let partials: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|s| {
                    let mut acc = vec![0.0; n];
                    let mut phi = vec![0.0; n];
                    let mut through = vec![0.0; n];
                    for t in s + 1..n {
                        for (x, p) in phi.iter_mut().enumerate() {
                            *p = inv[(x, s)] - inv[(x, t)];
                        }
                        throughput(adjacency, &phi, s, t, rule, &mut through);
                        acc.iter_mut().zip(&through).for_each(|(a, b)| *a += b);
                    }
                    acc
                })
                .collect();
            let mut values = vec![0.0; n];
            for p in partials {
                values.iter_mut().zip(p).for_each(|(a, b)| *a += b);
            }
            let pairs = n * (n - 1) / 2;
            values.iter_mut().for_each(|x| *x /= pairs as f64);
            Ok(CurrentFlow {
                values,
                std_err: None,
                pairs,
            })
        }
        PairPolicy::Sampled { pairs, seed } => {
            if pairs < 2 {
                return Err(Error::Argument("sampling needs at least two pairs".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let drawn: Vec<(usize, usize)> = (0..pairs)
                .map(|_| loop {
                    let a = rng.random_range(0..n);
                    let b = rng.random_range(0..n);
                    if a != b {
                        break (a.min(b), a.max(b));
                    }
                })
                .collect();
            let per_pair: Vec<Vec<f64>> = drawn
                .par_iter()
                .map(|&(s, t)| {
                    let phi = lap.unit_current(s, t)?;
                    let mut through = vec![0.0; n];
                    throughput(adjacency, &phi, s, t, rule, &mut through);
                    Ok(through)
                })
                .collect::<Result<_>>()?;
            let k = pairs as f64;
            let mut sum = vec![0.0; n];
            let mut sum_sq = vec![0.0; n];
            for row in &per_pair {
                for (i, &x) in row.iter().enumerate() {
                    sum[i] += x;
                    sum_sq[i] += x * x;
                }
            }
            let values: Vec<f64> = sum.iter().map(|s| s / k).collect();
            let std_err = sum_sq
                .iter()
                .zip(&values)
                .map(|(sq, mean)| {
                    let var = ((sq / k - mean * mean) * k / (k - 1.0)).max(0.0);
                    (var / k).sqrt()
                })
                .collect();
            Ok(CurrentFlow {
                values,
                std_err: Some(std_err),
                pairs,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoltageGap {
    /// Largest gap between consecutive potentials (endpoints included),
    /// over the applied potential difference.
    pub statistic: f64,
    /// Interior potentials in unit-voltage mode, ascending.
    pub spectrum: Vec<f64>,
}

pub fn voltage_gap(graph: &KochGraph, source: VertexId, target: VertexId) -> Result<VoltageGap> {
    voltage_gap_on(graph.adjacency(), source, target)
}

pub fn voltage_gap_on(
    adjacency: &[Vec<VertexId>],
    source: VertexId,
    target: VertexId,
) -> Result<VoltageGap> {
    let (phi, _) = potentials_on(adjacency, source, target, Mode::UnitVoltage)?;
    let mut spectrum: Vec<f64> = phi
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != source && v != target)
        .map(|(_, &x)| x)
        .collect();
    spectrum.sort_by(f64::total_cmp);
    let span = phi[source] - phi[target];
    let mut levels = Vec::with_capacity(spectrum.len() + 2);
    levels.push(phi[target]);
    levels.extend(&spectrum);
    levels.push(phi[source]);
    let gap = levels.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    Ok(VoltageGap {
        statistic: gap / span,
        spectrum,
    })
}
