use crate::cutting::{wrap_angle, CutSet};
use crate::error::{Error, Result};
use crate::graph::{DisjointSets, MetricGraph};

/// Fluxes `α_j` of a vector potential that is constant on every edge.
///
/// `α_j` integrates `a` from `c⁻` to `c⁺`: along the cut edge through its
/// endpoint `to`, back to `from` on the tree left by removing the cut edges,
/// and on to the cut. Tree edges count with sign `+1` when walked from
/// `from` to `to`.
pub fn flux_from_potential(graph: &MetricGraph, cutset: &CutSet, a: &[f64]) -> Result<Vec<f64>> {
    graph.ensure_valid()?;
    if a.len() != graph.edges().len() {
        return Err(Error::InvalidCutSet(format!(
            "{} potential values for {} edges",
            a.len(),
            graph.edges().len()
        )));
    }
    let cut_edges: Vec<usize> = cutset.cuts.iter().map(|c| c.edge).collect();
    let nv = graph.vertices().len();

    // the remaining edges must form a spanning tree
    let mut dsu = DisjointSets::new(nv);
    let mut adjacency: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); nv];
    for (i, e) in graph.edges().iter().enumerate() {
        if cut_edges.contains(&i) {
            continue;
        }
        if !dsu.union(e.from, e.to) {
            return Err(Error::PathNotFound { cut: 0 });
        }
        let w = a[i] * e.length;
        adjacency[e.from].push((e.to, i, w));
        adjacency[e.to].push((e.from, i, -w));
    }
    if dsu.count() != 1 {
        return Err(Error::PathNotFound { cut: 0 });
    }

    // potential φ(v) = ∫ from vertex 0 to v along the tree
    let mut phi = vec![f64::NAN; nv];
    phi[0] = 0.0;
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        for &(u, _, w) in &adjacency[v] {
            if phi[u].is_nan() {
                phi[u] = phi[v] + w;
                stack.push(u);
            }
        }
    }

    let mut out = Vec::with_capacity(cutset.len());
    for (j, c) in cutset.cuts.iter().enumerate() {
        if cut_edges.iter().filter(|&&e| e == c.edge).count() > 1 {
            return Err(Error::PathNotFound { cut: j });
        }
        let e = graph.edge(c.edge);
        let along_tree = phi[e.from] - phi[e.to];
        out.push(wrap_angle(a[c.edge] * e.length + along_tree));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::cutting::{spanning_tree_cuts, PositionRule, TreeSelection};

    fn cuts(g: &MetricGraph) -> CutSet {
        spanning_tree_cuts(g, &TreeSelection::Bfs, &PositionRule::Midpoint).unwrap()
    }

    #[test]
    fn zero_potential_zero_flux() {
        let g = catalog::dumbbell(1.0, 2.0, 3.0);
        assert_eq!(
            flux_from_potential(&g, &cuts(&g), &[0.0; 3]).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn circle_flux_is_loop_integral() {
        let g = catalog::circle(2.5);
        let alpha = flux_from_potential(&g, &cuts(&g), &[0.7]).unwrap();
        assert!((alpha[0] - wrap_angle(0.7 * 2.5)).abs() < 1e-15);
    }

    #[test]
    fn gauge_terms_on_the_tree_cancel() {
        // a potential on the bridge of a dumbbell encloses no flux
        let g = catalog::dumbbell(1.0, 2.0, 3.0);
        let alpha = flux_from_potential(&g, &cuts(&g), &[0.0, 5.0, 0.0]).unwrap();
        assert!(alpha.iter().all(|a| a.abs() < 1e-15));
    }

    #[test]
    fn inconsistent_cutset() {
        let g = catalog::figure_eight(1.0, 2.0);
        let one = CutSet::glued(&[crate::graph::EdgePoint::new(0, 0.5)]);
        assert!(matches!(
            flux_from_potential(&g, &one, &[0.0, 0.0]),
            Err(Error::PathNotFound { .. })
        ));
    }
}
