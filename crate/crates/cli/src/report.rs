//! Machine-readable command reports and their text rendering.

use std::collections::BTreeMap;
use std::fmt;

use gcs_core::expr::Expr;
use gcs_core::oracle::Witness;
use gcs_core::symmetry::{Check, Verdict};
use serde::Serialize;

/// Process exit status of a command.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Success,
    Negative,
    Failure,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Negative => 1,
            Status::Failure => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub point: BTreeMap<String, f64>,
    pub value: f64,
}

impl WitnessReport {
    pub fn new(w: &Witness, depvar: &str) -> Self {
        Self {
            point: w.labelled(depvar),
            value: w.value,
        }
    }
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self
            .point
            .iter()
            .map(|(k, v)| format!("{k}={v:.6}"))
            .collect();
        write!(f, "value {:.3e} at {{{}}}", self.value, coords.join(", "))
    }
}

/// One verdict with its residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictReport {
    pub name: String,
    pub verdict: String,
    pub residual: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

impl VerdictReport {
    pub fn new(name: &str, check: &Check, depvar: &str) -> Self {
        let worst_ratio = match &check.verdict {
            Verdict::Probable(r) => Some(r.worst_ratio),
            _ => None,
        };
        Self {
            name: name.to_string(),
            verdict: check.verdict.name().to_string(),
            residual: check.residual.printed(depvar).to_string(),
            worst_ratio,
            witness: check
                .verdict
                .witness()
                .map(|w| WitnessReport::new(w, depvar)),
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict != "NotSymmetry"
    }
}

impl fmt::Display for VerdictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<14} {}", self.name, self.verdict)?;
        if let Some(r) = self.worst_ratio {
            write!(f, " (worst ratio {r:.2e})")?;
        }
        writeln!(f)?;
        writeln!(f, "{:<14} residual: {}", "", self.residual)?;
        if let Some(w) = &self.witness {
            writeln!(f, "{:<14} witness: {w}", "")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalReport {
    pub rho: u32,
    /// The highest derivative `u_rho`, printed.
    pub lhs: String,
    pub eta_check: String,
}

impl CanonicalReport {
    pub fn new(rho: u32, eta_check: &Expr, depvar: &str) -> Self {
        Self {
            rho,
            lhs: Expr::u(rho).printed(depvar).to_string(),
            eta_check: eta_check.printed(depvar).to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub equation: String,
    pub operator: CanonicalReport,
    pub verdicts: Vec<VerdictReport>,
    pub agreement: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NotReducibleReport {
    pub index: usize,
    pub residual: String,
    pub witness: WitnessReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReduceReport {
    pub equation: String,
    pub ansatz: String,
    pub params: Vec<String>,
    #[serde(rename = "G")]
    pub g: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub not_reducible: Option<NotReducibleReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvertReport {
    pub equation: String,
    pub input_form: String,
    pub reduced: String,
    pub canonical: CanonicalReport,
    pub gcs: VerdictReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeriveReport {
    pub ansatz: String,
    pub params: Vec<String>,
    pub operator: CanonicalReport,
    /// Reduced characteristic `u_rho - eta_check`.
    pub characteristic: String,
    pub round_trip: Vec<VerdictReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gcs: Option<VerdictReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EssentialityReport {
    pub params: Vec<String>,
    pub determinant: String,
    pub essential: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionReport {
    pub name: String,
    pub solution: String,
    pub verdict: VerdictReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub equation: String,
    pub solutions: Vec<SolutionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub essentiality: Option<EssentialityReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoStep {
    pub problem: String,
    pub step: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoReport {
    pub demo: String,
    pub steps: Vec<DemoStep>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ReportBody {
    Check(CheckReport),
    Reduce(ReduceReport),
    Convert(ConvertReport),
    DeriveOperator(DeriveReport),
    VerifySolution(VerifyReport),
    Demo(DemoReport),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub points: usize,
    pub threshold: f64,
    pub status: Status,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.body {
            ReportBody::Check(r) => {
                writeln!(f, "equation: {}", r.equation)?;
                writeln!(f, "operator: {} = {}", r.operator.lhs, r.operator.eta_check)?;
                for v in &r.verdicts {
                    write!(f, "{v}")?;
                }
                writeln!(f, "agreement: {}", r.agreement)?;
            }
            ReportBody::Reduce(r) => {
                writeln!(f, "equation: {}", r.equation)?;
                writeln!(f, "ansatz: {}", r.ansatz)?;
                match &r.not_reducible {
                    None => {
                        for (p, g) in r.params.iter().zip(&r.g) {
                            writeln!(f, "{p}_t = {g}")?;
                        }
                    }
                    Some(n) => {
                        writeln!(f, "not reducible: component {} depends on x", n.index + 1)?;
                        writeln!(f, "d/dx of component: {}", n.residual)?;
                        writeln!(f, "witness: {}", n.witness)?;
                    }
                }
            }
            ReportBody::Convert(r) => {
                writeln!(f, "equation: {}", r.equation)?;
                writeln!(f, "input form: {}", r.input_form)?;
                writeln!(f, "reduced: {}", r.reduced)?;
                writeln!(
                    f,
                    "canonical: {} = {}",
                    r.canonical.lhs, r.canonical.eta_check
                )?;
                write!(f, "{}", r.gcs)?;
            }
            ReportBody::DeriveOperator(r) => {
                writeln!(f, "ansatz: {}", r.ansatz)?;
                writeln!(f, "operator: {} = {}", r.operator.lhs, r.operator.eta_check)?;
                writeln!(f, "characteristic: {}", r.characteristic)?;
                for v in &r.round_trip {
                    write!(f, "{v}")?;
                }
                if let Some(g) = &r.gcs {
                    write!(f, "{g}")?;
                }
            }
            ReportBody::VerifySolution(r) => {
                writeln!(f, "equation: {}", r.equation)?;
                for s in &r.solutions {
                    writeln!(f, "{}: {}", s.name, s.solution)?;
                    write!(f, "{}", s.verdict)?;
                }
                if let Some(e) = &r.essentiality {
                    writeln!(
                        f,
                        "essentiality determinant over ({}): {}",
                        e.params.join(", "),
                        e.determinant
                    )?;
                    writeln!(f, "essential: {}", e.essential)?;
                }
            }
            ReportBody::Demo(r) => {
                writeln!(f, "demo: {}", r.demo)?;
                let width = r.steps.iter().map(|s| s.problem.len()).max().unwrap_or(0);
                for s in &r.steps {
                    writeln!(
                        f,
                        "  {:<width$}  {:<18} {}  {}",
                        s.problem,
                        s.step,
                        if s.passed { "ok  " } else { "FAIL" },
                        s.detail
                    )?;
                }
                writeln!(f, "passed: {}", r.passed)?;
            }
        }
        writeln!(
            f,
            "seed: {:#x}, points: {}, threshold: {:e}",
            self.seed, self.points, self.threshold
        )
    }
}
