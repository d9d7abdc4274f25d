//! Small graphs used throughout the tests, the CLI examples and the
//! verification harnesses. All vertex conditions are Neumann–Kirchhoff
//! (`Delta(0)`) unless stated otherwise.

use crate::graph::{MetricGraph, VertexCondition};

pub fn interval(length: f64, left: VertexCondition, right: VertexCondition) -> MetricGraph {
    let mut g = MetricGraph::new();
    let a = g.add_vertex("a", left);
    let b = g.add_vertex("b", right);
    g.add_edge(a, b, length);
    g
}

/// One vertex with a single loop.
pub fn circle(length: f64) -> MetricGraph {
    let mut g = MetricGraph::new();
    let v = g.add_vertex("v", VertexCondition::NEUMANN);
    g.add_edge(v, v, length);
    g
}

/// A loop attached at `v` to a pendant edge ending in a Neumann tip.
pub fn lasso(loop_length: f64, tail_length: f64) -> MetricGraph {
    let mut g = MetricGraph::new();
    let v = g.add_vertex("v", VertexCondition::NEUMANN);
    let tip = g.add_vertex("tip", VertexCondition::NEUMANN);
    g.add_edge(v, v, loop_length);
    g.add_edge(v, tip, tail_length);
    g
}

/// Two loops sharing one vertex.
pub fn figure_eight(first: f64, second: f64) -> MetricGraph {
    let mut g = MetricGraph::new();
    let v = g.add_vertex("v", VertexCondition::NEUMANN);
    g.add_edge(v, v, first);
    g.add_edge(v, v, second);
    g
}

/// Star with centre `c` (δ strength `chi`) and Neumann leaves.
pub fn star(lengths: &[f64], chi: f64) -> MetricGraph {
    let mut g = MetricGraph::new();
    let c = g.add_vertex("c", VertexCondition::Delta(chi));
    for (i, &len) in lengths.iter().enumerate() {
        let leaf = g.add_vertex(format!("l{i}"), VertexCondition::NEUMANN);
        g.add_edge(c, leaf, len);
    }
    g
}

/// Two loops joined by a bridge.
pub fn dumbbell(first_loop: f64, bridge: f64, second_loop: f64) -> MetricGraph {
    let mut g = MetricGraph::new();
    let a = g.add_vertex("a", VertexCondition::NEUMANN);
    let b = g.add_vertex("b", VertexCondition::NEUMANN);
    g.add_edge(a, a, first_loop);
    g.add_edge(a, b, bridge);
    g.add_edge(b, b, second_loop);
    g
}

/// Interval `[0, length]` split into two edges at `split` by a transparent vertex.
pub fn split_interval(length: f64, split: f64) -> MetricGraph {
    let mut g = MetricGraph::new();
    let a = g.add_vertex("a", VertexCondition::NEUMANN);
    let m = g.add_vertex("m", VertexCondition::NEUMANN);
    let b = g.add_vertex("b", VertexCondition::NEUMANN);
    g.add_edge(a, m, split);
    g.add_edge(m, b, length - split);
    g
}
