//! Iterative construction of `K_{m,t}`.
//!
//! Step `j` visits every triangle that existed after step `j-1`, in creation
//! order, and hangs `m` groups of two sons on each of its three corners. Each
//! group closes a new triangle with its father. Vertex ids follow creation
//! order, with hubs `1`, `2`, `3` at ids 0, 1, 2.
//!
//! Labels are assigned while building. The sons a father `v` (born at step
//! `i`) receives at step `j` share the bit string `bits(v)·0·1^(j-i-1)` and
//! fill the index block `((l_v-1)·D, l_v·D]` with `D = 2m(m+1)^(j-i-1)`, in
//! the order the father's triangles are visited, two consecutive indices per
//! group (odd, even).

use std::collections::HashMap;

use crate::error::{Error, ParseRule, Result};
use crate::label::{parse_label, Label, MAX_BITS};

pub type VertexId = usize;

pub const DEFAULT_MAX_VERTICES: u64 = 10_000_000;

/// `2(3m+1)^t + 1`.
pub fn vertex_count(m: u32, t: u32) -> Result<u128> {
    check_params(m, t)?;
    triangle_count(m, t)
        .and_then(|q| q.checked_mul(2))
        .and_then(|n| n.checked_add(1))
        .ok_or(Error::SizeCap {
            requested: u128::MAX,
            cap: DEFAULT_MAX_VERTICES,
        })
}

/// `(3m+1)^t`, or `None` on overflow.
pub fn triangle_count(m: u32, t: u32) -> Option<u128> {
    (3 * u128::from(m) + 1).checked_pow(t)
}

fn check_params(m: u32, t: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::Argument("m must be at least 1".into()));
    }
    if t as usize > MAX_BITS {
        return Err(Error::Argument(format!("t must be at most {MAX_BITS}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub max_vertices: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_vertices: DEFAULT_MAX_VERTICES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexRecord {
    pub id: VertexId,
    pub label: Label,
    pub birth_step: u32,
    pub father: Option<VertexId>,
    pub companion: Option<VertexId>,
    /// 1-based offset of this son inside its father's child block.
    pub group_slot: Option<u64>,
}

/// An immutable Koch network.
#[derive(Debug, Clone)]
pub struct KochGraph {
    m: u32,
    t: u32,
    vertices: Vec<VertexRecord>,
    adjacency: Vec<Vec<VertexId>>,
    triangles: Vec<[VertexId; 3]>,
    label_index: HashMap<Label, VertexId>,
}

pub fn build(m: u32, t: u32) -> Result<KochGraph> {
    build_with(m, t, &BuildOptions::default())
}

pub fn build_with(m: u32, t: u32, opts: &BuildOptions) -> Result<KochGraph> {
    check_params(m, t)?;
    let requested = vertex_count(m, t).map_err(|_| Error::SizeCap {
        requested: u128::MAX,
        cap: opts.max_vertices,
    })?;
    if requested > u128::from(opts.max_vertices) {
        return Err(Error::SizeCap {
            requested,
            cap: opts.max_vertices,
        });
    }
    let n_total = requested as usize;
    let tri_total = n_total / 2;

    let mut vertices = Vec::with_capacity(n_total);
    let mut adjacency: Vec<Vec<VertexId>> = Vec::with_capacity(n_total);
    let mut triangles: Vec<[VertexId; 3]> = Vec::with_capacity(tri_total);

    for n in 1..=3u8 {
        let id = vertices.len();
        vertices.push(VertexRecord {
            id,
            label: Label::hub(n)?,
            birth_step: 0,
            father: None,
            companion: None,
            group_slot: None,
        });
    }
    adjacency.extend([vec![1, 2], vec![0, 2], vec![0, 1]]);
    triangles.push([0, 1, 2]);

    let mm = u64::from(m);
    for step in 1..=t {
        let existing = triangles.len();
        let mut next_slot = vec![0u64; vertices.len()];
        for k in 0..existing {
            for father in triangles[k] {
                let fl = vertices[father].label;
                let ones = (step - vertices[father].birth_step - 1) as usize;
                let bits = fl.bits().child_pattern(ones);
                let block = 2 * mm * (mm + 1).pow(ones as u32);
                let base = (fl.block_index() - 1) * block;
                for _ in 0..m {
                    let a = vertices.len();
                    let b = a + 1;
                    for (id, mate) in [(a, b), (b, a)] {
                        next_slot[father] += 1;
                        let slot = next_slot[father];
                        vertices.push(VertexRecord {
                            id,
                            label: Label::raw(fl.subnet(), bits, base + slot),
                            birth_step: step,
                            father: Some(father),
                            companion: Some(mate),
                            group_slot: Some(slot),
                        });
                    }
                    adjacency[father].extend([a, b]);
                    adjacency.push(vec![father, b]);
                    adjacency.push(vec![father, a]);
                    triangles.push([father, a, b]);
                }
            }
        }
    }

    // New neighbors always carry the largest ids so far, so lists stay sorted.
    debug_assert!(adjacency.iter().all(|l| l.windows(2).all(|w| w[0] < w[1])));

    let label_index = vertices.iter().map(|v| (v.label, v.id)).collect();
    Ok(KochGraph {
        m,
        t,
        vertices,
        adjacency,
        triangles,
        label_index,
    })
}

impl KochGraph {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> &[VertexRecord] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> &VertexRecord {
        &self.vertices[id]
    }

    pub fn label(&self, id: VertexId) -> Label {
        self.vertices[id].label
    }

    pub fn neighbors(&self, id: VertexId) -> &[VertexId] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.adjacency[id].len()
    }

    pub fn adjacency(&self) -> &[Vec<VertexId>] {
        &self.adjacency
    }

    pub fn triangles(&self) -> &[[VertexId; 3]] {
        &self.triangles
    }

    pub fn hub(&self, subnet: u8) -> VertexId {
        assert!((1..=3).contains(&subnet));
        usize::from(subnet) - 1
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, ns)| {
            ns.iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// The vertex completing the unique triangle through edge `(u, v)`.
    pub fn third_vertex(&self, u: VertexId, v: VertexId) -> Option<VertexId> {
        let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(a[i]),
            }
        }
        None
    }

    pub fn vertex_by_label(&self, label: &Label) -> Result<VertexId> {
        self.label_index.get(label).copied().ok_or_else(|| {
            Error::Lookup(format!(
                "no vertex labeled {label} in K_{{{},{}}}",
                self.m, self.t
            ))
        })
    }
}

/// A vertex named on a command line: a textual label or `#<id>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexRef {
    Label(Label),
    Id(VertexId),
}

impl VertexRef {
    pub fn parse(text: &str, m: u32) -> Result<Self> {
        match text.strip_prefix('#') {
            Some(digits) => {
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::parse(text, ParseRule::VertexId));
                }
                digits
                    .parse()
                    .map(VertexRef::Id)
                    .map_err(|_| Error::parse(text, ParseRule::VertexId))
            }
            None => parse_label(text, m).map(VertexRef::Label),
        }
    }

    pub fn resolve(&self, graph: &KochGraph) -> Result<VertexId> {
        match *self {
            VertexRef::Label(ref l) => graph.vertex_by_label(l),
            VertexRef::Id(id) if id < graph.num_vertices() => Ok(id),
            VertexRef::Id(id) => Err(Error::Lookup(format!(
                "vertex id {id} out of range (graph has {} vertices)",
                graph.num_vertices()
            ))),
        }
    }
}
