//! Line-oriented problem files.
//!
//! ```text
//! # comment
//! depvar: v
//! equation.r: 2
//! equation.H: (v*v_2 - (5/6)*v_1^2 + x^2*v_1)/x^2
//! operator.form: reduced            # or canonical, usual
//! operator.eta: x^3*v_3 - 12*x^2*v_2 + 60*x*v_1 - 120*v + 12*x^3
//! ansatz.rho: 3
//! ansatz.params: phi4, phi5, phi6
//! ansatz.F: 2*x^3 + phi4*x^4 + phi5*x^5 + phi6*x^6
//! oracle.seed: 12648430
//! ```
//!
//! Canonical operators use `operator.rho` and `operator.eta_check`; usual operators use
//! `operator.tau`, `operator.xi` and `operator.eta`. `family.rho`, `family.params` and
//! `family.f` describe a solution family, and any number of `solution.<name>` keys give
//! further explicit solutions whose free identifiers are parameters.

use std::collections::BTreeMap;
use std::path::Path;

use gcs_core::expr::{parse, Expr, ParseError, Parser, Symbol};
use gcs_core::oracle::SamplePlan;
use gcs_core::reduction::{Ansatz, ReductionError, SolutionFamily};
use gcs_core::symmetry::{
    CanonicalOperator, EvolutionEquation, GcsOperator, SymmetryError, UsualOperator,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {source}")]
    Expression { key: String, source: ParseError },
    #[error("key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

const KNOWN_KEYS: &[&str] = &[
    "name",
    "depvar",
    "equation.r",
    "equation.H",
    "operator.form",
    "operator.eta",
    "operator.rho",
    "operator.eta_check",
    "operator.tau",
    "operator.xi",
    "ansatz.rho",
    "ansatz.params",
    "ansatz.F",
    "family.rho",
    "family.params",
    "family.f",
    "oracle.seed",
    "oracle.points",
    "oracle.threshold",
];

/// Raw key-value content of a problem file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProblemFile {
    entries: BTreeMap<String, String>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self, ProblemError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| ProblemError::Syntax {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once(':')
                .ok_or_else(|| syntax("expected `key: value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) && !key.starts_with("solution.") {
                return Err(syntax(format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(syntax(format!("empty value for `{key}`")));
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(syntax(format!("duplicate key `{key}`")));
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn require(&self, key: &str) -> Result<&str, ProblemError> {
        self.get(key)
            .ok_or_else(|| ProblemError::Missing(key.into()))
    }

    pub fn name(&self) -> Option<&str> {
        self.get("name")
    }

    pub fn depvar(&self) -> &str {
        self.get("depvar").unwrap_or("u")
    }

    pub fn has_operator(&self) -> bool {
        self.entries.keys().any(|k| k.starts_with("operator."))
    }

    pub fn has_ansatz(&self) -> bool {
        self.entries.keys().any(|k| k.starts_with("ansatz."))
    }

    pub fn has_family(&self) -> bool {
        self.entries.keys().any(|k| k.starts_with("family."))
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ProblemError> {
        self.get(key)
            .map(|v| {
                v.parse().map_err(|_| ProblemError::Invalid {
                    key: key.into(),
                    message: format!("`{v}` is not a valid number"),
                })
            })
            .transpose()
    }

    fn expr_with(&self, key: &str, parser: &Parser) -> Result<Expr, ProblemError> {
        parser
            .parse(self.require(key)?)
            .map_err(|source| ProblemError::Expression {
                key: key.into(),
                source,
            })
    }

    /// Parser for expressions that may only mention `t`, `x` and jet variables.
    fn strict(&self) -> Parser {
        Parser::new(self.depvar()).with_params(std::iter::empty::<String>())
    }

    /// The file's sampling settings applied on top of `base`.
    pub fn sample_plan(&self, base: &SamplePlan) -> Result<SamplePlan, ProblemError> {
        let mut plan = base.clone();
        if let Some(seed) = self.number::<u64>("oracle.seed")? {
            plan.seed = seed;
        }
        if let Some(n) = self.number::<usize>("oracle.points")? {
            plan.n_points = n;
        }
        if let Some(th) = self.number::<f64>("oracle.threshold")? {
            plan.threshold = th;
        }
        Ok(plan)
    }

    pub fn equation(&self, plan: &SamplePlan) -> Result<EvolutionEquation, ProblemError> {
        let r = self
            .number::<u32>("equation.r")?
            .ok_or_else(|| ProblemError::Missing("equation.r".into()))?;
        let h = self.expr_with("equation.H", &self.strict())?;
        Ok(EvolutionEquation::new(r, h, self.depvar(), plan)?)
    }

    pub fn operator(&self) -> Result<OperatorInput, ProblemError> {
        let strict = self.strict();
        match self.require("operator.form")? {
            "reduced" => Ok(OperatorInput::Reduced(
                self.expr_with("operator.eta", &strict)?,
            )),
            "canonical" => {
                let rho = self
                    .number::<u32>("operator.rho")?
                    .ok_or_else(|| ProblemError::Missing("operator.rho".into()))?;
                let eta = self.expr_with("operator.eta_check", &strict)?;
                Ok(OperatorInput::Canonical(CanonicalOperator::new(rho, eta)?))
            }
            "usual" => {
                let coeff = |key: &str| -> Result<Expr, ProblemError> {
                    match self.get(key) {
                        Some(_) => self.expr_with(key, &strict),
                        None => Ok(Expr::zero()),
                    }
                };
                Ok(OperatorInput::Usual(UsualOperator::new(
                    coeff("operator.tau")?,
                    coeff("operator.xi")?,
                    coeff("operator.eta")?,
                )?))
            }
            other => Err(ProblemError::Invalid {
                key: "operator.form".into(),
                message: format!("`{other}` is not one of reduced, canonical, usual"),
            }),
        }
    }

    fn params(&self, key: &str) -> Result<Vec<String>, ProblemError> {
        let names: Vec<String> = self
            .require(key)?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        for n in &names {
            let valid = n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid
                || n == "t"
                || n == "x"
                || n == self.depvar()
                || n.starts_with(&format!("{}_", self.depvar()))
            {
                return Err(ProblemError::Invalid {
                    key: key.into(),
                    message: format!("`{n}` is not a valid parameter name"),
                });
            }
        }
        Ok(names)
    }

    fn parametrized(
        &self,
        prefix: &str,
        expr_key: &str,
    ) -> Result<(Expr, Vec<Symbol>), ProblemError> {
        let names = self.params(&format!("{prefix}.params"))?;
        if let Some(rho) = self.number::<usize>(&format!("{prefix}.rho"))? {
            if rho != names.len() {
                return Err(ProblemError::Invalid {
                    key: format!("{prefix}.rho"),
                    message: format!("rho = {rho} but {} parameters are listed", names.len()),
                });
            }
        }
        let parser = Parser::new(self.depvar()).with_params(names.iter().cloned());
        let f = self.expr_with(expr_key, &parser)?;
        Ok((f, names.iter().map(|n| Symbol::param(n)).collect()))
    }

    pub fn ansatz(&self, plan: &SamplePlan) -> Result<Ansatz, ProblemError> {
        let (f, params) = self.parametrized("ansatz", "ansatz.F")?;
        Ok(Ansatz::new(f, params, plan)?)
    }

    pub fn family(&self) -> Result<SolutionFamily, ProblemError> {
        let (f, params) = self.parametrized("family", "family.f")?;
        Ok(SolutionFamily::new(f, params))
    }

    /// The `solution.<name>` entries, parsed.
    pub fn solutions(&self) -> Result<Vec<(String, Expr)>, ProblemError> {
        self.entries
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("solution.").map(|name| (k, name, v)))
            .map(|(k, name, v)| {
                parse(v, self.depvar())
                    .map(|e| (name.to_string(), e))
                    .map_err(|source| ProblemError::Expression {
                        key: k.clone(),
                        source,
                    })
            })
            .collect()
    }
}

/// An operator as written in a problem file.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorInput {
    /// May contain `t`-derivatives; they are eliminated using the equation.
    Reduced(Expr),
    Canonical(CanonicalOperator),
    Usual(UsualOperator),
}

impl OperatorInput {
    pub fn form(&self) -> &'static str {
        match self {
            OperatorInput::Reduced(_) => "reduced",
            OperatorInput::Canonical(_) => "canonical",
            OperatorInput::Usual(_) => "usual",
        }
    }

    /// Brings the operator to reduced or canonical form with respect to `eq`.
    pub fn resolve(
        &self,
        eq: &EvolutionEquation,
        plan: &SamplePlan,
    ) -> Result<GcsOperator, SymmetryError> {
        match self {
            OperatorInput::Reduced(eta) => gcs_core::symmetry::to_reduced_form(eq, eta, plan),
            OperatorInput::Canonical(c) => Ok(GcsOperator::Canonical(c.clone())),
            OperatorInput::Usual(u) => gcs_core::symmetry::usual_to_generalized(eq, u, plan),
        }
    }
}
