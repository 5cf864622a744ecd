//! Edge-list, JSON and DOT writers.

use std::io::{self, Write};

use serde::Serialize;

use crate::graph::KochGraph;

/// One `u v` line per edge, ascending, LF-terminated.
pub fn write_edge_list<W: Write>(graph: &KochGraph, mut out: W) -> io::Result<()> {
    for (u, v) in graph.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonVertex {
    id: usize,
    label: String,
    birth: u32,
    degree: usize,
}

// Field order is the output key order.
#[derive(Serialize)]
struct JsonGraph {
    m: u32,
    t: u32,
    vertices: Vec<JsonVertex>,
    edges: Vec<[usize; 2]>,
}

pub fn write_json<W: Write>(graph: &KochGraph, mut out: W) -> io::Result<()> {
    let doc = JsonGraph {
        m: graph.m(),
        t: graph.t(),
        vertices: graph
            .vertices()
            .iter()
            .map(|v| JsonVertex {
                id: v.id,
                label: v.label.to_string(),
                birth: v.birth_step,
                degree: graph.degree(v.id),
            })
            .collect(),
        edges: graph.edges().map(|(u, v)| [u, v]).collect(),
    };
    serde_json::to_writer(&mut out, &doc)?;
    writeln!(out)
}

pub fn write_dot<W: Write>(graph: &KochGraph, mut out: W) -> io::Result<()> {
    writeln!(out, "graph koch_{}_{} {{", graph.m(), graph.t())?;
    for v in graph.vertices() {
        writeln!(out, "  {} [label=\"{}\"];", v.id, v.label)?;
    }
    for (u, v) in graph.edges() {
        writeln!(out, "  {u} -- {v};")?;
    }
    writeln!(out, "}}")
}
