//! Koch network toolkit: generation with positional vertex labels, routing
//! and neighbor arithmetic from labels alone, exact and closed-form
//! betweenness, unit-resistor analysis, and structural statistics.

pub mod analytics;
pub mod centrality;
pub mod electrical;
pub mod error;
pub mod export;
pub mod graph;
pub mod label;
pub mod labels;
pub mod routing;
pub mod verify;

pub use error::{Error, ParseRule, Result};
pub use graph::{build, build_with, BuildOptions, KochGraph, VertexId, VertexRecord, VertexRef};
pub use label::{enumerate_labels, format_label, l_max, parse_label, Bits, Label};
