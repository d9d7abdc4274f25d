use std::fmt;

use crate::cutting::{CutOffset, CutSet, TreeSelection};
use crate::perturbation::HessianReport;

/// Which statement a report checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    /// Magnetic fluxes: Morse index of `λ_n(α)` at `α = 0` is `φ − (n−1)`.
    Theorem1,
    /// Robin parameters on `β` cuts: index `n − 1 + β − φ`.
    Theorem2,
    /// Robin parameters on `η = 1 + φ − ν` cuts: index `n − ν`.
    FewZeros,
    /// Partition energy along the Robin family: index `n − ν`.
    Partitions,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Theorem1 => "theorem1",
            Check::Theorem2 => "theorem2",
            Check::FewZeros => "theorem2-few-zeros",
            Check::Partitions => "partitions",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Finite-difference step of the Hessians.
    pub h: f64,
    /// Hessian eigenvalues below `degen_rel·(1 + |λ|)` in magnitude count as zero.
    pub degen_rel: f64,
    pub gradient_tol: f64,
    /// Absolute tolerance for eigenvalue identities.
    pub lambda_tol: f64,
    /// Absolute tolerance when matching zeros of two eigenfunctions.
    pub zero_tol: f64,
    pub tree: TreeSelection,
    /// Placement of the few-zeros cuts next to their zeros.
    pub offset: CutOffset,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            h: 1e-3,
            degen_rel: 1e-4,
            gradient_tol: 1e-5,
            lambda_tol: 1e-8,
            zero_tol: 1e-6,
            tree: TreeSelection::Bfs,
            offset: CutOffset::Midway,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub graph: String,
    pub check: Check,
    pub n: usize,
    pub lambda: f64,
    /// Interior zeros of `ψ_n`.
    pub phi: Option<usize>,
    /// Nodal domains of `ψ_n`.
    pub nu: Option<usize>,
    pub beta: usize,
    /// Number of cuts actually made.
    pub eta: Option<usize>,
    pub cuts: Option<CutSet>,
    /// Robin parameters at which `ψ_n` solves the cut problem.
    pub gamma_tilde: Vec<f64>,
    /// Deviation of the cut-problem eigenvalue from `λ_n`.
    pub lambda_error: Option<f64>,
    pub hessian: Option<HessianReport>,
    pub predicted_index: Option<i64>,
    pub observed_index: Option<usize>,
    pub nondegenerate: bool,
    pub pass: bool,
    pub skip_reason: Option<String>,
    pub failures: Vec<String>,
}

/// Column order of the verification CSV.
pub const VERIFICATION_HEADER: &str =
    "graph,n,lambda,phi,nu,beta,eta,predicted,observed,nondegenerate,pass,skip_reason";

impl VerificationReport {
    pub(crate) fn new(graph: &str, check: Check, n: usize, beta: usize) -> Self {
        Self {
            graph: graph.to_string(),
            check,
            n,
            lambda: f64::NAN,
            phi: None,
            nu: None,
            beta,
            eta: None,
            cuts: None,
            gamma_tilde: Vec::new(),
            lambda_error: None,
            hessian: None,
            predicted_index: None,
            observed_index: None,
            nondegenerate: false,
            pass: false,
            skip_reason: None,
            failures: Vec::new(),
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.skip_reason.is_some()
    }

    pub(crate) fn fail(&mut self, message: impl Into<String>) {
        self.failures.push(message.into());
    }

    pub(crate) fn skip(mut self, reason: impl Into<String>) -> Self {
        self.skip_reason = Some(reason.into());
        self.pass = false;
        self
    }

    /// Records the Hessian and compares its index with the prediction.
    pub(crate) fn set_hessian(
        &mut self,
        hessian: HessianReport,
        predicted: i64,
        gradient_tol: f64,
    ) {
        self.predicted_index = Some(predicted);
        self.observed_index = Some(hessian.morse_index);
        self.nondegenerate = hessian.nondegenerate;
        if hessian.gradient_norm >= gradient_tol {
            self.fail(format!(
                "gradient norm {:.3e} at the critical point",
                hessian.gradient_norm
            ));
        }
        if !hessian.nondegenerate {
            self.fail(format!(
                "degenerate Hessian, eigenvalues {:?}",
                hessian.eigenvalues
            ));
        }
        if hessian.morse_index as i64 != predicted {
            self.fail(format!(
                "Morse index {} but predicted {predicted}",
                hessian.morse_index
            ));
        }
        self.hessian = Some(hessian);
    }

    pub(crate) fn finish(mut self) -> Self {
        self.pass = self.skip_reason.is_none()
            && self.failures.is_empty()
            && self.nondegenerate
            && matches!((self.observed_index, self.predicted_index), (Some(o), Some(p)) if o as i64 == p);
        self
    }

    /// One CSV row in the order of [`VERIFICATION_HEADER`]. Unavailable
    /// fields are left empty; `pass` is empty for skipped rows.
    pub fn csv_row(&self) -> String {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let lambda = if self.lambda.is_finite() {
            format!("{:.12e}", self.lambda)
        } else {
            String::new()
        };
        let (nondegenerate, pass) = if self.is_skipped() {
            (String::new(), String::new())
        } else {
            (self.nondegenerate.to_string(), self.pass.to_string())
        };
        [
            csv_field(&self.graph),
            self.n.to_string(),
            lambda,
            opt(self.phi),
            opt(self.nu),
            self.beta.to_string(),
            opt(self.eta),
            opt(self.predicted_index),
            opt(self.observed_index),
            nondegenerate,
            pass,
            csv_field(self.skip_reason.as_deref().unwrap_or("")),
        ]
        .join(",")
    }
}

/// Quotes a field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match (&self.skip_reason, self.pass) {
            (Some(r), _) => format!("SKIP ({r})"),
            (None, true) => "PASS".into(),
            (None, false) => "FAIL".into(),
        };
        write!(
            f,
            "{} {} n={} λ={:.10} φ={} ν={} β={} η={} index {}/{}: {status}",
            self.graph,
            self.check,
            self.n,
            self.lambda,
            self.phi.map_or("-".into(), |v| v.to_string()),
            self.nu.map_or("-".into(), |v| v.to_string()),
            self.beta,
            self.eta.map_or("-".into(), |v| v.to_string()),
            self.observed_index.map_or("-".into(), |v| v.to_string()),
            self.predicted_index.map_or("-".into(), |v| v.to_string()),
        )?;
        for failure in &self.failures {
            write!(f, "\n  {failure}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn skipped_rows_leave_verdict_empty() {
        let r = VerificationReport::new("g", Check::Theorem1, 3, 1).skip("degenerate eigenvalue");
        assert_eq!(r.csv_row(), "g,3,,,,1,,,,,,degenerate eigenvalue");
        assert_eq!(
            VERIFICATION_HEADER.split(',').count(),
            r.csv_row().split(',').count()
        );
    }

    #[test]
    fn pass_requires_matching_index() {
        let mut r = VerificationReport::new("g", Check::Theorem2, 2, 0);
        r.nondegenerate = true;
        r.observed_index = Some(1);
        r.predicted_index = Some(0);
        assert!(!r.finish().pass);
    }

    #[test]
    fn fields_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"x\""), "\"say \"\"x\"\"\"");
    }
}
