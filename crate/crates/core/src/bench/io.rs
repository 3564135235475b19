//! Problem and experiment files.
//!
//! A problem file is an MDP object, optionally carrying the option-set keys
//! (`options`, `mu`) alongside the MDP keys:
//!
//! ```json
//! {"n_states": 1, "n_actions": 1, "gamma": 0.9,
//!  "transition": [[[1.0]]], "reward": [[1.0]],
//!  "options": [{"policy": [[1.0]], "termination": [0.5]}], "mu": [[1.0]]}
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bench::generators::{gen_four_rooms, random_mdp_with, random_option_set, rng_from_seed};
use crate::error::{Error, Result};
use crate::gating::{OptionJson, OptionSet, OptionSetJson};
use crate::mdp::{Mdp, MdpJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemJson {
    #[serde(flatten)]
    pub mdp: MdpJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<OptionJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<Vec<f64>>>,
}

/// An MDP and, when present, the options used to evaluate it.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mdp: Mdp,
    pub options: Option<OptionSet>,
}

impl Problem {
    pub fn option_set(&self) -> Result<&OptionSet> {
        self.options
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("problem has no option set".into()))
    }

    pub fn to_json(&self) -> ProblemJson {
        let (options, mu) = match self.options.as_ref().map(OptionSet::to_json) {
            Some(j) => (Some(j.options), Some(j.mu)),
            None => (None, None),
        };
        ProblemJson {
            mdp: self.mdp.to_json(),
            options,
            mu,
        }
    }
}

impl TryFrom<&ProblemJson> for Problem {
    type Error = Error;

    fn try_from(j: &ProblemJson) -> Result<Self> {
        let mdp = Mdp::try_from(&j.mdp)?;
        let options = match (&j.options, &j.mu) {
            (Some(options), Some(mu)) => Some(OptionSet::try_from(&OptionSetJson {
                options: options.clone(),
                mu: mu.clone(),
            })?),
            (None, None) => None,
            _ => {
                return Err(Error::InvalidParameter(
                    "`options` and `mu` must be given together".into(),
                ))
            }
        };
        Ok(Self { mdp, options })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    Problem::try_from(&read_json::<ProblemJson>(path)?)
}

/// Reads an option-set file and attaches it to `problem`.
pub fn attach_options(problem: &mut Problem, path: &Path) -> Result<()> {
    problem.options = Some(OptionSet::try_from(&read_json::<OptionSetJson>(path)?)?);
    Ok(())
}

fn default_sparsity() -> f64 {
    1.0
}

fn default_n_options() -> usize {
    3
}

/// Where an experiment's problem comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSource {
    File {
        path: PathBuf,
    },
    Random {
        n: usize,
        k: usize,
        gamma: f64,
        seed: u64,
        #[serde(default = "default_sparsity")]
        sparsity: f64,
        #[serde(default = "default_n_options")]
        n_options: usize,
    },
    FourRooms {
        gamma: f64,
    },
}

impl ProblemSource {
    /// The MDP comes from the first draws of the seeded stream and the
    /// options from the ones after it.
    pub fn load(&self) -> Result<Problem> {
        match self {
            ProblemSource::File { path } => load_problem(path),
            &ProblemSource::Random {
                n,
                k,
                gamma,
                seed,
                sparsity,
                n_options,
            } => {
                let mut rng = rng_from_seed(seed);
                let mdp = random_mdp_with(&mut rng, n, k, gamma, sparsity)?;
                let options = random_option_set(&mut rng, n, k, n_options)?;
                Ok(Problem {
                    mdp,
                    options: Some(options),
                })
            }
            &ProblemSource::FourRooms { gamma } => {
                if !(0.0..1.0).contains(&gamma) {
                    return Err(Error::InvalidParameter(format!(
                        "gamma {gamma} outside [0, 1)"
                    )));
                }
                let (mdp, options) = gen_four_rooms(gamma)?;
                Ok(Problem {
                    mdp,
                    options: Some(options),
                })
            }
        }
    }

    /// Replaces the generator seed; no effect on other sources.
    pub fn with_seed(mut self, new_seed: u64) -> Self {
        if let ProblemSource::Random { seed, .. } = &mut self {
            *seed = new_seed;
        }
        self
    }
}

fn default_tol() -> f64 {
    1e-10
}

fn default_max_iters() -> usize {
    100_000
}

/// Input of a termination sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub problem: ProblemSource,
    /// Scale factors `c` applied as `beta <- c * beta`.
    pub beta_grid: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.beta_grid.is_empty() {
            return Err(Error::InvalidParameter("beta_grid is empty".into()));
        }
        if let Some(c) = self.beta_grid.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::InvalidParameter(format!(
                "beta_grid value {c} outside [0, 1]"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_file_round_trip() {
        let problem = ProblemSource::Random {
            n: 5,
            k: 2,
            gamma: 0.8,
            seed: 3,
            sparsity: 0.6,
            n_options: 2,
        }
        .load()
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        write_json(&path, &problem.to_json()).unwrap();
        let back = load_problem(&path).unwrap();
        assert_eq!(back.options, problem.options);
        assert_eq!(back.mdp.reward(), problem.mdp.reward());
    }

    #[test]
    fn mdp_only_problem() {
        let text = r#"{"n_states": 1, "n_actions": 1, "gamma": 0.9,
                       "transition": [[[1.0]]], "reward": [[1.0]]}"#;
        let j: ProblemJson = serde_json::from_str(text).unwrap();
        let p = Problem::try_from(&j).unwrap();
        assert!(p.options.is_none());
        assert!(p.option_set().is_err());
    }

    #[test]
    fn spec_parsing_and_validation() {
        let text = r#"{"problem": {"kind": "four_rooms", "gamma": 0.9},
                       "beta_grid": [0, 0.5, 1]}"#;
        let spec: ExperimentSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.tol, 1e-10);
        assert!(spec.validate().is_ok());
        let bad = ExperimentSpec {
            beta_grid: vec![1.5],
            ..spec.clone()
        };
        assert!(bad.validate().is_err());
        let empty = ExperimentSpec {
            beta_grid: vec![],
            ..spec
        };
        assert!(empty.validate().is_err());
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_problem(Path::new("/nonexistent/problem.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/problem.json"));
    }
}
