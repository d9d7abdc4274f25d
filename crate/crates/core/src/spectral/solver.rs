//! Ordered spectrum by scanning the smallest singular value of the secular
//! matrix along the real axis.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::count::eigenvalue_count;
use crate::spectral::problem::SpectralProblem;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Scan step is `step_factor / (L · max(1, √|λ|))`.
    pub step_factor: f64,
    /// Relative `σ_min` below which a refined minimum is an eigenvalue.
    pub eig_tol: f64,
    /// Relative singular values below this count toward the multiplicity.
    pub mult_tol: f64,
    /// Relative width to which minima are refined, `|Δλ| ≤ refine_tol·(1+|λ|)`.
    pub refine_tol: f64,
    /// Relative `σ₂` below which a simple minimum gets a fine rescan.
    pub close_tol: f64,
    pub max_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            step_factor: FRAC_PI_4,
            eig_tol: 1e-6,
            mult_tol: 1e-7,
            refine_tol: 1e-10,
            close_tol: 1e-3,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEntry {
    pub lambda: f64,
    /// Dimension of the numerical nullspace at `lambda`.
    pub multiplicity: usize,
    /// Relative `σ_min` at `lambda`.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanDiagnostics {
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub steps: usize,
    /// Local minima examined.
    pub brackets: usize,
    /// Local minima rejected as not being eigenvalues.
    pub rejected: usize,
    /// Minima that needed a fine rescan.
    pub rescans: usize,
    /// Intervals where the eigenvalue count disagreed with the scan and the
    /// eigenvalues were located by bisection on the count instead.
    pub recounts: usize,
}

/// Eigenvalues in ascending order, repeated according to multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub entries: Vec<SpectrumEntry>,
    pub diagnostics: ScanDiagnostics,
}

impl Spectrum {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `λ_n`, one-based.
    pub fn lambda(&self, n: usize) -> f64 {
        self.entries[n - 1].lambda
    }

    /// Whether `λ_n` is simple; needs `λ_{n+1}` in the list when it exists.
    pub fn is_simple(&self, n: usize) -> bool {
        self.entries[n - 1].multiplicity == 1
    }
}

struct Refined {
    lambda: f64,
    sigma: f64,
    sigma2: f64,
    multiplicity: usize,
}

pub(crate) struct Scanner<'a> {
    problem: &'a SpectralProblem,
    config: &'a SolverConfig,
    /// Whether eigenvalue counts are available to check the scan.
    counted: bool,
}

impl<'a> Scanner<'a> {
    pub fn new(problem: &'a SpectralProblem, config: &'a SolverConfig) -> Self {
        let counted = problem.family().is_self_adjoint();
        Self {
            problem,
            config,
            counted,
        }
    }

    fn count(&self, lambda: f64) -> usize {
        eigenvalue_count(self.problem, lambda).expect("self-adjoint family")
    }

    /// Eigenvalues in `[lo, hi)` by bisection on the count, given the counts
    /// at both ends.
    fn isolate(&self, lo: f64, hi: f64, n_lo: usize, n_hi: usize, out: &mut Vec<SpectrumEntry>) {
        if n_hi <= n_lo {
            return;
        }
        if hi - lo <= 1e-2 * self.config.refine_tol * (1.0 + lo.abs().max(hi.abs())) {
            let lambda = 0.5 * (lo + hi);
            out.push(SpectrumEntry {
                lambda,
                multiplicity: n_hi - n_lo,
                residual: self.sigma(lambda),
            });
            return;
        }
        let mid = 0.5 * (lo + hi);
        let n_mid = self.count(mid);
        self.isolate(lo, mid, n_lo, n_mid.clamp(n_lo, n_hi), out);
        self.isolate(mid, hi, n_mid.clamp(n_lo, n_hi), n_hi, out);
    }

    /// Checks the entries in `[from, to)` against eigenvalue counts and
    /// replaces them by count-located eigenvalues wherever they disagree.
    fn complete(
        &self,
        entries: Vec<SpectrumEntry>,
        from: f64,
        to: f64,
        diagnostics: &mut ScanDiagnostics,
    ) -> Vec<SpectrumEntry> {
        if !self.counted {
            return entries;
        }
        let (inside, mut out): (Vec<SpectrumEntry>, Vec<SpectrumEntry>) = entries
            .into_iter()
            .partition(|e| e.lambda >= from && e.lambda < to);
        let mut checkpoints = vec![from];
        checkpoints.extend(inside.windows(2).map(|w| 0.5 * (w[0].lambda + w[1].lambda)));
        checkpoints.push(to);
        let counts: Vec<usize> = checkpoints.par_iter().map(|&l| self.count(l)).collect();
        for i in 0..checkpoints.len() - 1 {
            let expected = counts[i + 1].saturating_sub(counts[i]);
            let found = inside
                .get(i)
                .filter(|e| e.lambda >= checkpoints[i] && e.lambda < checkpoints[i + 1]);
            if found.map_or(0, |e| e.multiplicity) == expected {
                out.extend(found.copied());
                continue;
            }
            diagnostics.recounts += 1;
            let mut located = Vec::new();
            self.isolate(
                checkpoints[i],
                checkpoints[i + 1],
                counts[i],
                counts[i + 1],
                &mut located,
            );
            for mut e in located {
                // keep the refined value when the scan had the eigenvalue
                if let Some(f) =
                    found.filter(|f| (f.lambda - e.lambda).abs() < 1e-8 * (1.0 + e.lambda.abs()))
                {
                    e.lambda = f.lambda;
                    e.residual = f.residual;
                }
                out.push(e);
            }
        }
        out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        out
    }

    fn sigma(&self, lambda: f64) -> f64 {
        self.problem.sigma_min(Complex64::from(lambda))
    }

    fn step(&self, lambda: f64) -> f64 {
        self.config.step_factor
            / (self.problem.layout().total_length * lambda.abs().sqrt().max(1.0))
    }

    fn assess(&self, lambda: f64) -> Refined {
        let sv = self.problem.singular_values(Complex64::from(lambda));
        let top = sv[sv.len() - 1].max(1.0);
        Refined {
            lambda,
            sigma: sv[0] / top,
            sigma2: sv.get(1).map_or(f64::INFINITY, |s| s / top),
            multiplicity: sv
                .iter()
                .filter(|&&s| s < self.config.mult_tol * top)
                .count(),
        }
    }

    /// Golden-section search for the minimum of `σ_min` in `[a, b]`, then a
    /// parabola through `σ_min²` around it.
    fn refine(&self, mut a: f64, mut b: f64) -> Refined {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut x1 = b - INV_PHI * (b - a);
        let mut x2 = a + INV_PHI * (b - a);
        let mut f1 = self.sigma(x1);
        let mut f2 = self.sigma(x2);
        let scale = 1.0 + a.abs().max(b.abs());
        while b - a > self.config.refine_tol * 1e-2 * scale {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - INV_PHI * (b - a);
                f1 = self.sigma(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + INV_PHI * (b - a);
                f2 = self.sigma(x2);
            }
        }
        let (mut x, mut fx) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };

        let d = (b - a).max(1e-12 * scale) * 4.0;
        let (y0, y2) = (self.sigma(x - d).powi(2), self.sigma(x + d).powi(2));
        let y1 = fx * fx;
        let curvature = y0 - 2.0 * y1 + y2;
        if curvature > 0.0 {
            let shift = 0.5 * d * (y0 - y2) / curvature;
            if shift.abs() < 2.0 * d {
                let fv = self.sigma(x + shift);
                if fv < fx {
                    x += shift;
                    fx = fv;
                }
            }
        }
        let _ = fx;
        self.assess(x)
    }

    /// Eigenvalues hidden in the bracket `[a, b]` around a grid minimum.
    fn resolve(&self, a: f64, b: f64, diagnostics: &mut ScanDiagnostics) -> Result<Vec<Refined>> {
        let first = self.refine(a, b);
        if first.sigma >= self.config.eig_tol {
            diagnostics.rejected += 1;
            return Ok(Vec::new());
        }
        if first.multiplicity > 1 || first.sigma2 >= self.config.close_tol {
            return Ok(vec![first]);
        }
        // a small second singular value means another eigenvalue nearby
        diagnostics.rescans += 1;
        const SUB: usize = 64;
        let grid: Vec<f64> = (0..=SUB)
            .map(|i| a + (b - a) * i as f64 / SUB as f64)
            .collect();
        let values: Vec<f64> = grid.par_iter().map(|&l| self.sigma(l)).collect();
        let mut found: Vec<Refined> = Vec::new();
        for i in 1..SUB {
            if values[i] < values[i - 1] && values[i] <= values[i + 1] {
                let r = self.refine(grid[i - 1], grid[i + 1]);
                let fresh = found
                    .iter()
                    .all(|f| (f.lambda - r.lambda).abs() > 1e-9 * (1.0 + r.lambda.abs()));
                if r.sigma < self.config.eig_tol && fresh {
                    found.push(r);
                }
            }
        }
        if found.len() <= 1 && first.sigma2 < 1e2 * self.config.mult_tol && !self.counted {
            return Err(Error::ScanStepTooCoarse {
                lambda: first.lambda,
            });
        }
        if found.is_empty() {
            found.push(first);
        }
        Ok(found)
    }

    /// All eigenvalues in `[from, to]`.
    pub fn window(
        &self,
        from: f64,
        to: f64,
        diagnostics: &mut ScanDiagnostics,
    ) -> Result<Vec<SpectrumEntry>> {
        let mut grid = vec![from];
        while *grid.last().unwrap() < to {
            let l = *grid.last().unwrap();
            grid.push(l + self.step(l));
        }
        let values: Vec<f64> = grid.par_iter().map(|&l| self.sigma(l)).collect();
        diagnostics.steps += grid.len();
        let mut out: Vec<SpectrumEntry> = Vec::new();
        for i in 1..grid.len().saturating_sub(1) {
            if values[i] < values[i - 1] && values[i] <= values[i + 1] {
                diagnostics.brackets += 1;
                for r in self.resolve(grid[i - 1], grid[i + 1], diagnostics)? {
                    push_entry(&mut out, r);
                }
            }
        }
        out.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        Ok(self.complete(out, from, to, diagnostics))
    }

    pub fn scan(&self, count: usize, start: f64) -> Result<Spectrum> {
        const CHUNK: usize = 512;
        let mut diagnostics = ScanDiagnostics {
            lambda_start: start,
            ..Default::default()
        };
        let mut entries: Vec<SpectrumEntry> = Vec::new();
        let mut grid: Vec<f64> = vec![start];
        let mut values: Vec<f64> = vec![self.sigma(start)];
        let mut checked = 0usize; // grid index up to which minima were inspected

        let total =
            |entries: &[SpectrumEntry]| entries.iter().map(|e| e.multiplicity).sum::<usize>();
        loop {
            while total(&entries) < count {
                if grid.len() > self.config.max_steps {
                    return Err(Error::ScanBudgetExceeded {
                        steps: grid.len(),
                        wanted: count,
                    });
                }
                let mut fresh = Vec::with_capacity(CHUNK);
                let mut l = *grid.last().unwrap();
                for _ in 0..CHUNK {
                    l += self.step(l);
                    fresh.push(l);
                }
                let fresh_values: Vec<f64> = fresh.par_iter().map(|&l| self.sigma(l)).collect();
                grid.extend(fresh);
                values.extend(fresh_values);

                let mut next = grid.len() - 1;
                for i in checked.max(1)..grid.len() - 1 {
                    if values[i] < values[i - 1] && values[i] <= values[i + 1] {
                        diagnostics.brackets += 1;
                        for r in self.resolve(grid[i - 1], grid[i + 1], &mut diagnostics)? {
                            push_entry(&mut entries, r);
                        }
                        if total(&entries) >= count {
                            next = i + 1;
                            break;
                        }
                    }
                }
                checked = next;
            }
            entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
            if !self.counted {
                break;
            }
            let last = entries.last().map_or(start, |e| e.lambda);
            let top = last + 1e-7 * (1.0 + last.abs());
            entries = self.complete(entries, start, top, &mut diagnostics);
            if total(&entries) >= count {
                break;
            }
        }
        diagnostics.steps = grid.len();
        diagnostics.lambda_end = *grid.last().unwrap();
        entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

        let mut expanded = Vec::with_capacity(count);
        for e in &entries {
            for _ in 0..e.multiplicity {
                expanded.push(*e);
            }
        }
        expanded.truncate(count);
        self.weyl_check(&expanded, &diagnostics)?;
        Ok(Spectrum {
            entries: expanded,
            diagnostics,
        })
    }

    /// Flags scans that found far fewer eigenvalues than Weyl's law allows.
    fn weyl_check(&self, entries: &[SpectrumEntry], diagnostics: &ScanDiagnostics) -> Result<()> {
        let Some(last) = entries.last() else {
            return Ok(());
        };
        if last.lambda <= 0.0 {
            return Ok(());
        }
        let g = self.problem.graph();
        let slack =
            (g.edges().len() + g.vertices().len() + 2 * self.problem.cutset().len() + 2) as f64;
        let weyl = self.problem.layout().total_length
            * (last.lambda - g.max_abs_q()).max(0.0).sqrt()
            / std::f64::consts::PI;
        if (entries.len() as f64) < weyl - slack {
            return Err(Error::ScanStepTooCoarse {
                lambda: diagnostics.lambda_end,
            });
        }
        Ok(())
    }
}

fn push_entry(entries: &mut Vec<SpectrumEntry>, r: Refined) {
    let tol = 1e-9 * (1.0 + r.lambda.abs());
    if let Some(existing) = entries
        .iter_mut()
        .find(|e| (e.lambda - r.lambda).abs() < tol)
    {
        if r.sigma < existing.residual {
            existing.lambda = r.lambda;
            existing.residual = r.sigma;
        }
        existing.multiplicity = existing.multiplicity.max(r.multiplicity);
        return;
    }
    entries.push(SpectrumEntry {
        lambda: r.lambda,
        multiplicity: r.multiplicity.max(1),
        residual: r.sigma,
    });
}

/// The first `count` eigenvalues (with multiplicity), scanning upward from
/// `lambda_min` or, when `None`, from a lower bound of the operator.
pub fn find_eigenvalues(
    problem: &SpectralProblem,
    count: usize,
    lambda_min: Option<f64>,
) -> Result<Spectrum> {
    find_eigenvalues_with(problem, count, lambda_min, &SolverConfig::default())
}

pub fn find_eigenvalues_with(
    problem: &SpectralProblem,
    count: usize,
    lambda_min: Option<f64>,
    config: &SolverConfig,
) -> Result<Spectrum> {
    if !problem.family().is_self_adjoint() {
        return Err(Error::NotSelfAdjointFamily);
    }
    let start = lambda_min.unwrap_or_else(|| problem.spectrum_lower_bound() - 1.0);
    Scanner::new(problem, config).scan(count, start)
}

/// Eigenvalues in a window, for real-spectrum problems or continuation.
pub fn eigenvalues_in(
    problem: &SpectralProblem,
    from: f64,
    to: f64,
    config: &SolverConfig,
) -> Result<Vec<SpectrumEntry>> {
    let mut diagnostics = ScanDiagnostics::default();
    Scanner::new(problem, config).window(from, to, &mut diagnostics)
}

/// Eigenvalues among the local minima of `σ_min` on a uniform grid of
/// `points` nodes over `[from, to]`.
pub(crate) fn local_minima(
    problem: &SpectralProblem,
    from: f64,
    to: f64,
    points: usize,
    config: &SolverConfig,
) -> Vec<SpectrumEntry> {
    let scanner = Scanner::new(problem, config);
    let grid: Vec<f64> = (0..points)
        .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&l| scanner.sigma(l)).collect();
    let mut out = Vec::new();
    for i in 1..points - 1 {
        if values[i] < values[i - 1] && values[i] <= values[i + 1] {
            let r = scanner.refine(grid[i - 1], grid[i + 1]);
            if r.sigma < config.eig_tol {
                push_entry(&mut out, r);
            }
        }
    }
    out
}
