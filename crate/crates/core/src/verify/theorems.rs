use rayon::prelude::*;

use crate::cutting::{
    cut_for_nodal_set, open_components, spanning_tree, spanning_tree_cuts, CutSet, PositionRule,
};
use crate::error::Error;
use crate::graph::{betti, EdgePoint, MetricGraph};
use crate::perturbation::{
    gamma_tilde, hessian_fd_with, lambda_m_gamma, lambda_n_alpha, HessianOptions,
};
use crate::spectral::{eigenfunction, find_eigenvalues, zeros, Eigenpair, Side, SpectralProblem};
use crate::verify::partitions::robin_partition_energy;
use crate::verify::report::{Check, VerificationReport, VerifyConfig};

/// Cut points on a chord edge are moved off the midpoint when `|ψ|` there is
/// below this fraction of its sup norm.
const SMALL_AT_MIDPOINT: f64 = 0.05;
const CANDIDATES: usize = 64;

/// `ψ_n` with its nodal data.
pub(crate) struct Nodal {
    pub lambda: f64,
    pub pair: Eigenpair,
    pub zeros: Vec<EdgePoint>,
    pub phi: usize,
    pub nu: usize,
}

pub(crate) enum Halt {
    Skip(String),
    Fail(String),
}

impl Halt {
    pub(crate) fn apply(self, mut report: VerificationReport) -> VerificationReport {
        match self {
            Halt::Skip(reason) => report.skip(reason),
            Halt::Fail(message) => {
                report.fail(message);
                report.finish()
            }
        }
    }
}

/// Computes `λ_n`, `ψ_n`, `φ` and `ν`, skipping when a genericity
/// assumption fails.
pub(crate) fn nodal_data(graph: &MetricGraph, n: usize) -> Result<Nodal, Halt> {
    let problem = SpectralProblem::uncut(graph).map_err(|e| Halt::Fail(e.to_string()))?;
    let spectrum =
        find_eigenvalues(&problem, n + 1, None).map_err(|e| Halt::Fail(e.to_string()))?;
    let lambda = spectrum.lambda(n);
    if !spectrum.is_simple(n) {
        let m = spectrum.entries[n - 1].multiplicity;
        return Err(Halt::Skip(format!("eigenvalue has multiplicity {m}")));
    }
    let pair = match eigenfunction(&problem, lambda) {
        Ok(p) => p,
        Err(Error::DegenerateEigenvalue { multiplicity, .. }) => {
            return Err(Halt::Skip(format!(
                "eigenvalue has multiplicity {multiplicity}"
            )))
        }
        Err(e) => return Err(Halt::Fail(e.to_string())),
    };
    let zeros = match zeros(&pair) {
        Ok(z) => z,
        Err(Error::VertexZero { site, .. }) => {
            return Err(Halt::Skip(format!("eigenfunction vanishes at {site}")))
        }
        Err(e) => return Err(Halt::Fail(e.to_string())),
    };
    let nu = open_components(graph, &zeros).count;
    Ok(Nodal {
        lambda,
        phi: zeros.len(),
        nu,
        pair,
        zeros,
    })
}

fn options(lambda: f64, config: &VerifyConfig) -> HessianOptions {
    HessianOptions {
        degen_tol: Some(config.degen_rel * (1.0 + lambda.abs())),
        richardson: true,
    }
}

fn fill_nodal(report: &mut VerificationReport, nodal: &Nodal) {
    report.lambda = nodal.lambda;
    report.phi = Some(nodal.phi);
    report.nu = Some(nodal.nu);
}

/// Magnetic check at `α = 0` for a single `n`.
pub fn theorem1_report(
    graph: &MetricGraph,
    name: &str,
    n: usize,
    config: &VerifyConfig,
) -> VerificationReport {
    let beta = betti(graph).unwrap_or(0);
    let report = VerificationReport::new(name, Check::Theorem1, n, beta);
    match theorem1_inner(graph, n, config, report.clone()) {
        Ok(r) => r,
        Err(halt) => halt.apply(report),
    }
}

fn theorem1_inner(
    graph: &MetricGraph,
    n: usize,
    config: &VerifyConfig,
    mut report: VerificationReport,
) -> Result<VerificationReport, Halt> {
    let nodal = nodal_data(graph, n)?;
    fill_nodal(&mut report, &nodal);
    let cuts = spanning_tree_cuts(graph, &config.tree, &PositionRule::Midpoint)
        .map_err(|e| Halt::Fail(e.to_string()))?;
    report.eta = Some(cuts.len());

    let predicted = nodal.phi as i64 - (n as i64 - 1);
    if predicted < 0 || predicted > report.beta as i64 {
        report.fail(format!(
            "nodal surplus {predicted} outside [0, {}]",
            report.beta
        ));
    }
    let origin = vec![0.0; cuts.len()];
    let hessian = hessian_fd_with(
        |a: &[f64]| lambda_n_alpha(graph, &cuts, n, a),
        &origin,
        config.h,
        options(nodal.lambda, config),
    )
    .map_err(|e| Halt::Fail(format!("Hessian: {e}")))?;
    let error = (hessian.value - nodal.lambda).abs();
    if error > config.lambda_tol {
        report.fail(format!("λ_n(0) differs from λ_n by {error:.3e}"));
    }
    report.lambda_error = Some(error);
    report.set_hessian(hessian, predicted, config.gradient_tol);
    report.cuts = Some(cuts);
    Ok(report.finish())
}

/// One cut per chord edge, at the midpoint unless `ψ` is small there, in
/// which case at the sample point where `|ψ|` is largest.
pub(crate) fn cuts_avoiding_zeros(
    graph: &MetricGraph,
    pair: &Eigenpair,
    config: &VerifyConfig,
) -> crate::Result<CutSet> {
    let in_tree = spanning_tree(graph, &config.tree)?;
    let sup = pair.sup_norm();
    let positions: Vec<f64> = (0..graph.edges().len())
        .filter(|&e| !in_tree[e])
        .map(|e| {
            let edge = graph.edge(e);
            let len = edge.length;
            let breaks = edge.potential_breaks();
            let allowed = |t: f64| breaks.iter().all(|b| (b - t).abs() > 1e-6 * len);
            let size = |t: f64| pair.value(EdgePoint::new(e, t), Side::Right).abs();
            let mid = 0.5 * len;
            if allowed(mid) && size(mid) >= SMALL_AT_MIDPOINT * sup {
                return mid;
            }
            (0..CANDIDATES)
                .map(|i| len * (i as f64 + 0.5) / CANDIDATES as f64)
                .filter(|&t| allowed(t))
                .fold((mid, -1.0), |best, t| {
                    let v = size(t);
                    if v > best.1 {
                        (t, v)
                    } else {
                        best
                    }
                })
                .0
        })
        .collect();
    spanning_tree_cuts(graph, &config.tree, &PositionRule::Explicit(positions))
}

/// The common Robin part of both cut theorems: `γ̃`, the eigenvalue identity
/// and the Hessian of `λ_{φ+1}(H_γ)` at `γ̃`.
fn robin_check(
    graph: &MetricGraph,
    nodal: &Nodal,
    cuts: CutSet,
    predicted: i64,
    config: &VerifyConfig,
    mut report: VerificationReport,
) -> Result<VerificationReport, Halt> {
    report.eta = Some(cuts.len());
    let gamma = match gamma_tilde(&nodal.pair, &cuts) {
        Ok(g) => g,
        Err(Error::ZeroAtCut { cut }) => {
            return Err(Halt::Skip(format!("eigenfunction vanishes at cut {cut}")))
        }
        Err(e) => return Err(Halt::Fail(e.to_string())),
    };
    let m = nodal.phi + 1;
    let hessian = hessian_fd_with(
        |g: &[f64]| lambda_m_gamma(graph, &cuts, m, g),
        &gamma,
        config.h,
        options(nodal.lambda, config),
    )
    .map_err(|e| Halt::Fail(format!("Hessian: {e}")))?;
    let error = (hessian.value - nodal.lambda).abs();
    if error > config.lambda_tol {
        report.fail(format!("λ_{m}(H_γ̃) differs from λ_n by {error:.3e}"));
    }
    report.lambda_error = Some(error);
    report.gamma_tilde = gamma;
    report.set_hessian(hessian, predicted, config.gradient_tol);
    report.cuts = Some(cuts);
    Ok(report.finish())
}

/// Robin check on `β` cuts for a single `n`.
pub fn theorem2_report(
    graph: &MetricGraph,
    name: &str,
    n: usize,
    config: &VerifyConfig,
) -> VerificationReport {
    let beta = betti(graph).unwrap_or(0);
    let report = VerificationReport::new(name, Check::Theorem2, n, beta);
    let run = |mut report: VerificationReport| -> Result<VerificationReport, Halt> {
        let nodal = nodal_data(graph, n)?;
        fill_nodal(&mut report, &nodal);
        let cuts = cuts_avoiding_zeros(graph, &nodal.pair, config)
            .map_err(|e| Halt::Fail(e.to_string()))?;
        let predicted = n as i64 - 1 + beta as i64 - nodal.phi as i64;
        robin_check(graph, &nodal, cuts, predicted, config, report)
    };
    run(report.clone()).unwrap_or_else(|halt| halt.apply(report))
}

/// Cuts next to the zeros of `ψ` whose removal keeps the graph connected.
pub(crate) fn few_zeros_cuts(
    graph: &MetricGraph,
    nodal: &Nodal,
    config: &VerifyConfig,
) -> Result<CutSet, Halt> {
    cut_for_nodal_set(graph, &nodal.zeros, config.offset).map_err(|e| Halt::Fail(e.to_string()))
}

pub(crate) fn few_zeros_prediction(
    n: usize,
    nodal: &Nodal,
    eta: usize,
    report: &mut VerificationReport,
) -> i64 {
    if eta + nodal.nu != 1 + nodal.phi {
        report.fail(format!(
            "η = {eta} but 1 + φ − ν = {}",
            1 + nodal.phi as i64 - nodal.nu as i64
        ));
    }
    let predicted = n as i64 - nodal.nu as i64;
    if predicted < 0 || predicted > eta as i64 {
        report.fail(format!("n − ν = {predicted} outside [0, {eta}]"));
    }
    predicted
}

/// Robin check on `η = 1 + φ − ν` cuts placed next to zeros.
pub fn few_zeros_report(
    graph: &MetricGraph,
    name: &str,
    n: usize,
    config: &VerifyConfig,
) -> VerificationReport {
    let beta = betti(graph).unwrap_or(0);
    let report = VerificationReport::new(name, Check::FewZeros, n, beta);
    let run = |mut report: VerificationReport| -> Result<VerificationReport, Halt> {
        let nodal = nodal_data(graph, n)?;
        fill_nodal(&mut report, &nodal);
        let cuts = few_zeros_cuts(graph, &nodal, config)?;
        let predicted = few_zeros_prediction(n, &nodal, cuts.len(), &mut report);
        robin_check(graph, &nodal, cuts, predicted, config, report)
    };
    run(report.clone()).unwrap_or_else(|halt| halt.apply(report))
}

/// Partition energy along the Robin family on the few-zeros cuts.
pub fn partition_report(
    graph: &MetricGraph,
    name: &str,
    n: usize,
    config: &VerifyConfig,
) -> VerificationReport {
    let beta = betti(graph).unwrap_or(0);
    let report = VerificationReport::new(name, Check::Partitions, n, beta);
    let run = |mut report: VerificationReport| -> Result<VerificationReport, Halt> {
        let nodal = nodal_data(graph, n)?;
        fill_nodal(&mut report, &nodal);
        let cuts = few_zeros_cuts(graph, &nodal, config)?;
        report.eta = Some(cuts.len());
        let predicted = few_zeros_prediction(n, &nodal, cuts.len(), &mut report);
        let gamma = match gamma_tilde(&nodal.pair, &cuts) {
            Ok(g) => g,
            Err(Error::ZeroAtCut { cut }) => {
                return Err(Halt::Skip(format!("eigenfunction vanishes at cut {cut}")))
            }
            Err(e) => return Err(Halt::Fail(e.to_string())),
        };
        let m = nodal.phi + 1;

        // the transplanted partition at γ̃ is the nodal set of ψ
        let (points, energy) = robin_partition_energy(graph, &cuts, m, &gamma)
            .map_err(|e| Halt::Fail(format!("Λ(γ̃): {e}")))?;
        if points.len() != nodal.zeros.len() {
            report.fail(format!(
                "{} transplanted zeros but φ = {}",
                points.len(),
                nodal.phi
            ));
        } else {
            let shift = points
                .iter()
                .zip(&nodal.zeros)
                .map(|(a, b)| {
                    if a.edge == b.edge {
                        (a.t - b.t).abs()
                    } else {
                        f64::INFINITY
                    }
                })
                .fold(0.0, f64::max);
            if shift > config.zero_tol {
                report.fail(format!("transplanted zeros moved by {shift:.3e}"));
            }
        }
        if energy.residual > config.lambda_tol {
            report.fail(format!(
                "equipartition residual {:.3e} at γ̃",
                energy.residual
            ));
        }

        let hessian = hessian_fd_with(
            |g: &[f64]| robin_partition_energy(graph, &cuts, m, g).map(|(_, e)| e.lambda),
            &gamma,
            config.h,
            options(nodal.lambda, config),
        )
        .map_err(|e| Halt::Fail(format!("Hessian: {e}")))?;
        let error = (hessian.value - nodal.lambda).abs();
        if error > config.lambda_tol {
            report.fail(format!("Λ(γ̃) differs from λ_n by {error:.3e}"));
        }
        report.lambda_error = Some(error);
        report.gamma_tilde = gamma;
        report.set_hessian(hessian, predicted, config.gradient_tol);
        report.cuts = Some(cuts);
        Ok(report.finish())
    };
    run(report.clone()).unwrap_or_else(|halt| halt.apply(report))
}

/// Runs `check` for every `n`, in parallel, returning reports in order of `n`.
pub fn verify_range(
    graph: &MetricGraph,
    name: &str,
    check: Check,
    ns: impl IntoIterator<Item = usize>,
    config: &VerifyConfig,
) -> Vec<VerificationReport> {
    let ns: Vec<usize> = ns.into_iter().collect();
    ns.par_iter()
        .map(|&n| match check {
            Check::Theorem1 => theorem1_report(graph, name, n, config),
            Check::Theorem2 => theorem2_report(graph, name, n, config),
            Check::FewZeros => few_zeros_report(graph, name, n, config),
            Check::Partitions => partition_report(graph, name, n, config),
        })
        .collect()
}

/// Morse index of `λ_n(α)` at `α = 0` against the nodal surplus, for each `n`.
pub fn verify_theorem1(
    graph: &MetricGraph,
    ns: impl IntoIterator<Item = usize>,
) -> Vec<VerificationReport> {
    verify_range(
        graph,
        "graph",
        Check::Theorem1,
        ns,
        &VerifyConfig::default(),
    )
}

pub fn verify_theorem2(graph: &MetricGraph, n: usize) -> VerificationReport {
    theorem2_report(graph, "graph", n, &VerifyConfig::default())
}

pub fn verify_theorem2_few_zeros(graph: &MetricGraph, n: usize) -> VerificationReport {
    few_zeros_report(graph, "graph", n, &VerifyConfig::default())
}

pub fn verify_partition_criticality(graph: &MetricGraph, n: usize) -> VerificationReport {
    partition_report(graph, "graph", n, &VerifyConfig::default())
}

/// Whether the magnetic and Robin indices of the same eigenpair add up to `β`.
/// `None` unless both reports passed.
pub fn complementary(theorem1: &VerificationReport, theorem2: &VerificationReport) -> Option<bool> {
    if !(theorem1.pass && theorem2.pass) || theorem1.n != theorem2.n {
        return None;
    }
    Some(theorem1.observed_index? + theorem2.observed_index? == theorem1.beta)
}
