//! The energy `Λ(P) = max_j λ₁(Γ_j)` of a partition of a graph by points.

use rayon::prelude::*;

use crate::cutting::{components, split_at_points, CutSet, POINT_TOL};
use crate::error::{Error, Result};
use crate::graph::{betti, EdgePoint, MetricGraph, VertexCondition};
use crate::spectral::{eigenfunction, find_eigenvalues, zeros, SpectralProblem};

/// Distinct points strictly inside edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    points: Vec<EdgePoint>,
}

impl Partition {
    /// Sorts the points by edge and position; fails with
    /// [`Error::ImproperPartition`] on a point at a vertex, off the graph or
    /// repeated.
    pub fn new(graph: &MetricGraph, points: &[EdgePoint]) -> Result<Self> {
        let mut sorted = points.to_vec();
        sorted.sort_by(|a, b| a.edge.cmp(&b.edge).then(a.t.total_cmp(&b.t)));
        for (i, p) in sorted.iter().enumerate() {
            let improper = Error::ImproperPartition {
                edge: p.edge,
                t: p.t,
            };
            let Some(edge) = graph.edges().get(p.edge) else {
                return Err(improper);
            };
            let tol = POINT_TOL * edge.length;
            if !(p.t > tol && p.t < edge.length - tol) {
                return Err(improper);
            }
            if i > 0 && sorted[i - 1].edge == p.edge && p.t - sorted[i - 1].t <= tol {
                return Err(improper);
            }
        }
        Ok(Self { points: sorted })
    }

    pub fn points(&self) -> &[EdgePoint] {
        &self.points
    }

    pub fn m(&self) -> usize {
        self.points.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionEnergy {
    /// `Λ`, the largest groundstate.
    pub lambda: f64,
    /// Dirichlet groundstate of every component, ordered by smallest vertex.
    pub groundstates: Vec<f64>,
    /// `max λ₁ − min λ₁`; zero for an equipartition.
    pub residual: f64,
    pub components: usize,
    /// Whether the number of components is `m − β + 1`, i.e. every cycle is broken.
    pub cycles_broken: bool,
}

/// Imposes Dirichlet conditions at the partition points and solves every
/// component for its groundstate.
pub fn partition_energy(graph: &MetricGraph, partition: &Partition) -> Result<PartitionEnergy> {
    let split = split_at_points(graph, partition.points(), VertexCondition::Dirichlet)?;
    let pieces = components(&split);
    let groundstates: Vec<f64> = pieces
        .par_iter()
        .map(|piece| {
            let p = SpectralProblem::uncut(piece)?;
            Ok(find_eigenvalues(&p, 1, None)?.lambda(1))
        })
        .collect::<Result<_>>()?;
    let lambda = groundstates
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let low = groundstates.iter().copied().fold(f64::INFINITY, f64::min);
    let beta = betti(graph)? as i64;
    Ok(PartitionEnergy {
        lambda,
        residual: lambda - low,
        components: pieces.len(),
        cycles_broken: pieces.len() as i64 == partition.m() as i64 - beta + 1,
        groundstates,
    })
}

/// The partition given by the zeros of the `m`-th eigenfunction of the Robin
/// problem at `gamma`, transplanted to the uncut graph, with its energy.
pub fn robin_partition_energy(
    graph: &MetricGraph,
    cuts: &CutSet,
    m: usize,
    gamma: &[f64],
) -> Result<(Vec<EdgePoint>, PartitionEnergy)> {
    let problem = SpectralProblem::new(graph, &cuts.robin(gamma)?)?;
    let spectrum = find_eigenvalues(&problem, m + 1, None)?;
    let lambda = spectrum.lambda(m);
    if !spectrum.is_simple(m) {
        return Err(Error::DegenerateEigenvalue {
            lambda,
            multiplicity: spectrum.entries[m - 1].multiplicity,
        });
    }
    let f = eigenfunction(&problem, lambda)?;
    let points = zeros(&f)?;
    let energy = partition_energy(graph, &Partition::new(graph, &points)?)?;
    Ok((points, energy))
}
