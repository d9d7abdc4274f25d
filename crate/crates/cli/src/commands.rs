use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use qgraph_core::cutting::{spanning_tree_cuts, PositionRule, TreeSelection};
use qgraph_core::io::{
    eigenfunction_csv, flux_scan_csv, format_float, read_graph, spectrum_csv, verification_csv,
    GraphFile,
};
use qgraph_core::perturbation::{lambda_n_alpha, symmetry_points, symmetry_spectrum_check};
use qgraph_core::spectral::{eigenfunction, find_eigenvalues};
use qgraph_core::verify::{verify_range, Check, VerifyConfig};
use qgraph_core::{CutSet, Error, SpectralProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Command, RunConfig, Which};

/// Fixed so that symmetry samples are identical across runs.
const SYMMETRY_SEED: u64 = 0x5eed;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_)
            | Error::Parse { .. }
            | Error::InvalidGraph(_)
            | Error::InvalidCutSet(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn check_config(config: &RunConfig) -> Result<(), Failure> {
    if !(config.h > 0.0 && config.tol > 0.0) {
        return Err(Failure::usage("--h and --tol must be positive"));
    }
    if config.count == 0 || config.grid == Some(0) || config.samples == 0 {
        return Err(Failure::usage(
            "--count, --grid and --samples must be positive",
        ));
    }
    fs::create_dir_all(&config.out)
        .map_err(|e| Failure::usage(format!("{}: {e}", config.out.display())))
}

pub fn run(config: &RunConfig) -> Result<u8, Failure> {
    check_config(config)?;
    let file = read_graph(&config.graph)?;
    match config.command {
        Command::Spectrum => spectrum(config, &file),
        Command::FluxScan => flux_scan(config, &file),
        Command::Verify => verify(config, &file),
    }
}

fn spectrum(config: &RunConfig, file: &GraphFile) -> Result<u8, Failure> {
    let problem = SpectralProblem::new(&file.graph, &file.cuts)?;
    let spectrum = find_eigenvalues(&problem, config.count, config.lambda_min)?;
    write(&config.out.join("spectrum.csv"), &spectrum_csv(&spectrum))?;
    let per_unit = config.grid.unwrap_or(64) as f64;
    for (i, entry) in spectrum.entries.iter().enumerate() {
        let n = i + 1;
        if entry.multiplicity > 1 {
            eprintln!(
                "eigenvalue {n} has multiplicity {}; no eigenfunction written",
                entry.multiplicity
            );
            continue;
        }
        match eigenfunction(&problem, entry.lambda) {
            Ok(pair) => write(
                &config.out.join(format!("eigenfunction_{n}.csv")),
                &eigenfunction_csv(&pair, &file.graph, per_unit),
            )?,
            Err(e @ (Error::ComplexEigenfunction | Error::DegenerateEigenvalue { .. })) => {
                eprintln!("eigenvalue {n}: {e}; no eigenfunction written");
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(0)
}

/// Cuts from the file, or one per edge outside a BFS spanning tree.
fn flux_cuts(file: &GraphFile) -> Result<CutSet, Failure> {
    if file.cuts.is_empty() {
        Ok(spanning_tree_cuts(
            &file.graph,
            &TreeSelection::Bfs,
            &PositionRule::Midpoint,
        )?)
    } else {
        Ok(file.cuts.as_glued())
    }
}

fn single_n(config: &RunConfig) -> Result<usize, Failure> {
    let text = config
        .n
        .as_deref()
        .ok_or_else(|| Failure::usage("--n is required"))?;
    match text.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Failure::usage(format!(
            "--n expects a positive index, found `{text}`"
        ))),
    }
}

/// Parses `a..b` (inclusive), `a,b,c` or `a`.
pub fn parse_n_range(text: &str) -> Option<Vec<usize>> {
    let text = text.trim();
    let out: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let (a, b) = (
            a.trim().parse().ok()?,
            b.trim_start_matches('=').trim().parse().ok()?,
        );
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().ok())
            .collect::<Option<_>>()?
    };
    (!out.is_empty() && out.iter().all(|&n| n >= 1)).then_some(out)
}

/// `grid` points centred on zero with spacing `2π/grid`.
pub fn axis(grid: usize) -> Vec<f64> {
    let centre = (grid as f64 - 1.0) / 2.0;
    (0..grid)
        .map(|i| 2.0 * PI * (i as f64 - centre) / grid as f64)
        .collect()
}

fn flux_scan(config: &RunConfig, file: &GraphFile) -> Result<u8, Failure> {
    let n = single_n(config)?;
    let cuts = flux_cuts(file)?;
    let d = cuts.len();
    if d == 0 {
        return Err(Failure::usage(
            "the graph has no cycles, there is no flux to scan",
        ));
    }
    let values = axis(config.grid.unwrap_or(17));
    let mut points: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    let lambdas: Vec<f64> = points
        .par_iter()
        .map(|a| lambda_n_alpha(&file.graph, &cuts, n, a))
        .collect::<Result<_, Error>>()?;
    let mut rows: Vec<(Vec<f64>, usize, f64)> = points
        .into_iter()
        .zip(lambdas)
        .map(|(a, l)| (a, n, l))
        .collect();
    // the first point shifted by a full period, for plotters that close the torus
    let (first, _, value) = rows[0].clone();
    rows.push((first.iter().map(|a| a + 2.0 * PI).collect(), n, value));
    write(&config.out.join("flux_scan.csv"), &flux_scan_csv(d, &rows))?;
    Ok(0)
}

fn graph_name(config: &RunConfig) -> String {
    config
        .graph
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into())
}

fn verify(config: &RunConfig, file: &GraphFile) -> Result<u8, Failure> {
    let check = match config.which {
        Which::Theorem1 => Check::Theorem1,
        Which::Theorem2 => Check::Theorem2,
        Which::FewZeros => Check::FewZeros,
        Which::Partitions => Check::Partitions,
        Which::Symmetry => return symmetry(config, file),
    };
    let ns = match &config.n {
        Some(text) => parse_n_range(text)
            .ok_or_else(|| Failure::usage(format!("cannot read --n `{text}`")))?,
        None => (1..=config.count).collect(),
    };
    let verify_config = VerifyConfig {
        h: config.h,
        lambda_tol: config.tol,
        ..VerifyConfig::default()
    };
    let reports = verify_range(&file.graph, &graph_name(config), check, ns, &verify_config);
    write(
        &config.out.join(format!("verify_{}.csv", check.name())),
        &verification_csv(&reports),
    )?;
    for r in &reports {
        if let Some(h) = &r.hessian {
            write(
                &config
                    .out
                    .join(format!("hessian_{}_n{}.txt", check.name(), r.n)),
                &h.to_string(),
            )?;
        }
    }
    let failing = reports
        .iter()
        .filter(|r| !r.is_skipped() && !r.pass)
        .count();
    for r in reports.iter().filter(|r| !r.is_skipped() && !r.pass) {
        eprintln!("{r}");
    }
    Ok(if failing > 0 { 3 } else { 0 })
}

pub fn symmetry_header(d: usize) -> String {
    let mut cols: Vec<String> = (1..=d).map(|i| format!("sigma_{i}")).collect();
    cols.extend((1..=d).map(|i| format!("alpha_{i}")));
    cols.push("count".into());
    cols.push("deviation".into());
    cols.join(",")
}

fn symmetry(config: &RunConfig, file: &GraphFile) -> Result<u8, Failure> {
    let cuts = flux_cuts(file)?;
    let d = cuts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(SYMMETRY_SEED);
    let mut cases: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for sigma in symmetry_points(d) {
        for _ in 0..config.samples {
            let alpha: Vec<f64> = (0..d).map(|_| rng.gen_range(-PI..PI)).collect();
            cases.push((sigma.clone(), alpha));
        }
    }
    let deviations: Vec<f64> = cases
        .par_iter()
        .map(|(s, a)| symmetry_spectrum_check(&file.graph, &cuts, s, a, config.count))
        .collect::<Result<_, Error>>()?;
    let mut out = symmetry_header(d);
    out.push('\n');
    for ((sigma, alpha), dev) in cases.iter().zip(&deviations) {
        let mut cols: Vec<String> = sigma
            .iter()
            .chain(alpha)
            .map(|x| format_float(*x))
            .collect();
        cols.push(config.count.to_string());
        cols.push(format_float(*dev));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    write(&config.out.join("verify_symmetry.csv"), &out)?;
    let worst = deviations.iter().copied().fold(0.0, f64::max);
    if worst >= config.tol {
        eprintln!(
            "largest symmetry deviation {worst:e} exceeds {:e}",
            config.tol
        );
        return Ok(3);
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_ranges() {
        assert_eq!(parse_n_range("2..5"), Some(vec![2, 3, 4, 5]));
        assert_eq!(parse_n_range("2..=3"), Some(vec![2, 3]));
        assert_eq!(parse_n_range("1, 4,7"), Some(vec![1, 4, 7]));
        assert_eq!(parse_n_range("3"), Some(vec![3]));
        assert_eq!(parse_n_range("0..2"), None);
        assert_eq!(parse_n_range("x"), None);
    }

    #[test]
    fn axis_is_centred() {
        let a = axis(9);
        assert_eq!(a.len(), 9);
        assert_eq!(a[4], 0.0);
        assert!((a[0] + a[8]).abs() < 1e-15);
        assert!(a.iter().all(|x| x.abs() < PI));
    }
}
