//! Job files: a TOML config, the JSON report of an earlier run, or bare
//! polynomial text (for `milnor`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use qhsing::complete::CompletionOptions;
use qhsing::{ChoiceGraph, EpsilonPolicy, Error, Exponent, IndexSet, Polynomial, PowerAssignment};

fn default_attempts() -> usize {
    EpsilonPolicy::default().max_attempts
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// An explicit multipower, overriding the selection rule for `set`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pin {
    /// 1-based indices.
    pub set: Vec<usize>,
    pub exponent: Vec<u32>,
}

/// Indices in `kappa` and `flips` are 1-based, as in the polynomial grammar.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<u32>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flips: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub all_vertices: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub multipowers: Vec<Pin>,
}

pub enum Input {
    Polynomial(Polynomial),
    Graph(ChoiceGraph, PowerAssignment),
}

impl JobConfig {
    pub fn from_polynomial(text: &str) -> Self {
        JobConfig {
            polynomial: Some(text.trim().to_string()),
            kappa: None,
            powers: None,
            seed: 0,
            max_attempts: default_attempts(),
            flips: Vec::new(),
            all_vertices: false,
            multipowers: Vec::new(),
        }
    }

    /// Reads a TOML config or a JSON report carrying one under `"config"`.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let cfg: JobConfig = if text.trim_start().starts_with('{') {
            let mut v: serde_json::Value =
                serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
            let inner = match v.get_mut("config") {
                Some(c) => c.take(),
                None => v,
            };
            serde_json::from_value(inner).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?
        };
        cfg.input()?;
        Ok(cfg)
    }

    pub fn input(&self) -> Result<Input, Error> {
        match (&self.polynomial, &self.kappa, &self.powers) {
            (Some(p), None, None) => Ok(Input::Polynomial(p.parse()?)),
            (None, Some(k), Some(a)) => {
                let g = ChoiceGraph::from_one_based(k)?;
                let a = PowerAssignment::new(a.clone())?;
                if a.len() != g.n_vertices() {
                    return Err(Error::ArityMismatch {
                        left: g.n_vertices(),
                        right: a.len(),
                    });
                }
                Ok(Input::Graph(g, a))
            }
            (None, Some(_), None) | (None, None, Some(_)) => Err(Error::Config(
                "kappa and powers must be given together".into(),
            )),
            (None, None, None) => Err(Error::Config(
                "need either polynomial or kappa and powers".into(),
            )),
            _ => Err(Error::Config(
                "polynomial and kappa/powers are mutually exclusive".into(),
            )),
        }
    }

    pub fn graph(&self) -> Result<(ChoiceGraph, PowerAssignment), Error> {
        match self.input()? {
            Input::Graph(g, a) => Ok((g, a)),
            Input::Polynomial(_) => Err(Error::Config(
                "this command needs kappa and powers, not a polynomial".into(),
            )),
        }
    }

    pub fn policy(&self) -> EpsilonPolicy {
        EpsilonPolicy {
            seed: self.seed,
            max_attempts: self.max_attempts,
        }
    }

    pub fn options(&self, n: usize) -> Result<CompletionOptions, Error> {
        let mut pinned = BTreeMap::new();
        for p in &self.multipowers {
            if p.exponent.len() != n {
                return Err(Error::ArityMismatch {
                    left: n,
                    right: p.exponent.len(),
                });
            }
            pinned.insert(
                IndexSet::from_one_based(&p.set)?,
                Exponent::from(p.exponent.clone()),
            );
        }
        Ok(CompletionOptions {
            pinned,
            all_vertices: self.all_vertices,
            ..Default::default()
        })
    }

    /// 0-based flips; each must name a vertex of the graph at its stage.
    pub fn flips0(&self) -> Result<Vec<usize>, Error> {
        self.flips
            .iter()
            .map(|&t| {
                t.checked_sub(1)
                    .ok_or_else(|| Error::Config("flip indices are 1-based".into()))
            })
            .collect()
    }
}
