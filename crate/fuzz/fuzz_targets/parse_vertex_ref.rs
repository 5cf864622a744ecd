#![no_main]

use std::sync::OnceLock;

use koch_core::{build, KochGraph, VertexRef};
use libfuzzer_sys::fuzz_target;

static GRAPH: OnceLock<KochGraph> = OnceLock::new();

fuzz_target!(|text: &str| {
    let graph = GRAPH.get_or_init(|| build(2, 2).unwrap());
    if let Ok(r) = VertexRef::parse(text, 2) {
        if let Ok(id) = r.resolve(graph) {
            assert!(id < graph.num_vertices());
            if let VertexRef::Label(l) = r {
                assert_eq!(graph.label(id), l);
            }
        }
    }
});
