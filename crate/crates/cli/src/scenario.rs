//! JSON scenario files and their validated in-memory form.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use testopt_core::aa::AAScenario;
use testopt_core::welfare::ObservablePath;
use testopt_core::{Atom, ExtReal, Knot, Law, ObservableCell, PartyUtility, ScoreDistribution};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DistSpec {
    Uniform { lo: f64, hi: f64 },
    /// `[score, probability]` pairs.
    Discrete(Vec<(f64, f64)>),
    /// `[score, density]` knots, linearly interpolated.
    Piecewise(Vec<(f64, f64)>),
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub label: String,
    pub dist: DistSpec,
    pub v_c: f64,
    #[serde(default = "unit")]
    pub w_c: f64,
    pub v_s: f64,
    #[serde(default = "unit")]
    pub w_s: f64,
}

/// A number, `"+inf"`, `"-inf"`, or `"no_adverse_inference"` (the cell mean).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImputationSpec {
    Level(ExtReal),
    NoAdverseInference,
}

const NO_ADVERSE_INFERENCE: &str = "no_adverse_inference";

impl Serialize for ImputationSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ImputationSpec::Level(x) => x.serialize(s),
            ImputationSpec::NoAdverseInference => s.serialize_str(NO_ADVERSE_INFERENCE),
        }
    }
}

impl<'de> Deserialize<'de> for ImputationSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => ExtReal::new(x)
                .map(ImputationSpec::Level)
                .map_err(serde::de::Error::custom),
            Raw::Text(t) if t == NO_ADVERSE_INFERENCE => Ok(ImputationSpec::NoAdverseInference),
            Raw::Text(t) => t
                .parse::<ExtReal>()
                .map(ImputationSpec::Level)
                .map_err(|_| {
                    serde::de::Error::custom(format!(
                        "expected a number, \"+inf\", \"-inf\" or \"{NO_ADVERSE_INFERENCE}\", got `{t}`"
                    ))
                }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImputationSection {
    /// Applies to every cell.
    All(ImputationSpec),
    /// Per cell label; unlisted cells have no imputation.
    PerCell(BTreeMap<String, ImputationSpec>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub cells: Vec<CellSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imputation: Option<ImputationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aa: Option<AAScenario>,
    /// Cell labels in path order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
}

/// A fully validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cells: Vec<ObservableCell>,
    /// Resolved imputation per cell, aligned with `cells`.
    pub imputations: Vec<Option<ExtReal>>,
    pub aa: Option<AAScenario>,
    pub path: Option<(Vec<String>, ObservablePath)>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        let paths = match (&self.path, &other.path) {
            (None, None) => true,
            (Some((a, pa)), Some((b, pb))) => a == b && pa.cells() == pb.cells() && pa.taus() == pb.taus(),
            _ => false,
        };
        self.cells == other.cells && self.imputations == other.imputations && self.aa == other.aa && paths
    }
}

fn input(field: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{field}: {e}"))
}

fn build_dist(spec: &DistSpec) -> Result<ScoreDistribution, testopt_core::ModelError> {
    match spec {
        DistSpec::Uniform { lo, hi } => ScoreDistribution::uniform(*lo, *hi),
        DistSpec::Discrete(pairs) => ScoreDistribution::discrete(
            pairs.iter().map(|&(score, prob)| Atom { score, prob }).collect(),
        ),
        DistSpec::Piecewise(pairs) => ScoreDistribution::piecewise(
            pairs
                .iter()
                .map(|&(score, density)| Knot { score, density })
                .collect(),
        ),
    }
}

fn dist_spec(d: &ScoreDistribution) -> DistSpec {
    match d.law() {
        Law::Uniform { lo, hi } => DistSpec::Uniform { lo: *lo, hi: *hi },
        Law::Discrete(atoms) => DistSpec::Discrete(atoms.iter().map(|a| (a.score, a.prob)).collect()),
        Law::Piecewise(knots) => {
            DistSpec::Piecewise(knots.iter().map(|k| (k.score, k.density)).collect())
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<Scenario, CliError> {
        if self.cells.is_empty() && self.aa.is_none() {
            return Err(CliError::Input(
                "cells: scenario has no cells (and no aa section)".into(),
            ));
        }
        let delta = match (self.delta, self.cells.is_empty()) {
            (Some(d), _) => d,
            (None, true) => 0.0,
            (None, false) => return Err(CliError::Input("delta: required when cells are present".into())),
        };
        let mut cells = Vec::with_capacity(self.cells.len());
        for (i, c) in self.cells.iter().enumerate() {
            let field = format!("cells[{i}] (`{}`)", c.label);
            if cells.iter().any(|x: &ObservableCell| x.label() == c.label) {
                return Err(input(field, "duplicate label"));
            }
            let dist = build_dist(&c.dist).map_err(|e| input(format!("{field}.dist"), e))?;
            let college = PartyUtility::new(c.v_c, c.w_c).map_err(|e| input(format!("{field}.college"), e))?;
            let society = PartyUtility::new(c.v_s, c.w_s).map_err(|e| input(format!("{field}.society"), e))?;
            let cell = ObservableCell::new(c.label.clone(), college, society, delta, dist)
                .map_err(|e| input(&field, e))?;
            cells.push(cell);
        }

        let resolve = |cell: &ObservableCell, spec: ImputationSpec| match spec {
            ImputationSpec::Level(x) => x,
            ImputationSpec::NoAdverseInference => ExtReal::Finite(cell.dist().mean()),
        };
        let imputations = match &self.imputation {
            None => vec![None; cells.len()],
            Some(ImputationSection::All(spec)) => cells.iter().map(|c| Some(resolve(c, *spec))).collect(),
            Some(ImputationSection::PerCell(map)) => {
                if let Some(unknown) = map.keys().find(|k| !cells.iter().any(|c| c.label() == k.as_str())) {
                    return Err(input("imputation", format!("unknown cell label `{unknown}`")));
                }
                cells
                    .iter()
                    .map(|c| map.get(c.label()).map(|s| resolve(c, *s)))
                    .collect()
            }
        };

        if let Some(aa) = &self.aa {
            aa.validate().map_err(|e| input("aa", e))?;
        }

        let path = match &self.path {
            None => None,
            Some(labels) => {
                let mut pcells = Vec::new();
                let mut taus = Vec::new();
                for l in labels {
                    let i = cells
                        .iter()
                        .position(|c| c.label() == l.as_str())
                        .ok_or_else(|| input("path", format!("unknown cell label `{l}`")))?;
                    let tau = imputations[i]
                        .ok_or_else(|| input("path", format!("cell `{l}` has no imputation")))?;
                    pcells.push(cells[i].clone());
                    taus.push(tau);
                }
                let p = ObservablePath::new(pcells, taus).map_err(|e| input("path", e))?;
                Some((labels.clone(), p))
            }
        };

        Ok(Scenario {
            cells,
            imputations,
            aa: self.aa,
            path,
        })
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        ScenarioFile::load(path)?.validate()
    }

    pub fn cell(&self, label: &str) -> Result<(usize, &ObservableCell), CliError> {
        self.cells
            .iter()
            .enumerate()
            .find(|(_, c)| c.label() == label)
            .ok_or_else(|| CliError::Input(format!("--cell: no cell labelled `{label}`")))
    }

    /// A file that validates back to this exact scenario.
    pub fn to_file(&self) -> ScenarioFile {
        let cells = self
            .cells
            .iter()
            .map(|c| CellSpec {
                label: c.label().to_string(),
                dist: dist_spec(c.dist()),
                v_c: c.college().v(),
                w_c: c.college().w(),
                v_s: c.society().v(),
                w_s: c.society().w(),
            })
            .collect();
        let map: BTreeMap<String, ImputationSpec> = self
            .cells
            .iter()
            .zip(&self.imputations)
            .filter_map(|(c, t)| t.map(|t| (c.label().to_string(), ImputationSpec::Level(t))))
            .collect();
        ScenarioFile {
            cells,
            delta: self.cells.first().map(|c| c.delta()),
            imputation: (!map.is_empty()).then_some(ImputationSection::PerCell(map)),
            aa: self.aa,
            path: self.path.as_ref().map(|(l, _)| l.clone()),
        }
    }
}
