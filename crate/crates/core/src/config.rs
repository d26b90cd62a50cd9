//! Run configuration shared by the command-line flags and JSON config files.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OpaError, Result};
use crate::opa::{SolverKind, SolverOpts};
use crate::poly::{CircleRoot, CircleZeroSpec, Poly};
use crate::rates::geometric_grid;
use crate::space::{Exponent, SpaceParams};
use crate::weights::WeightSpec;

/// The polynomial `f`, given either by coefficients or by its zeros on the
/// unit circle.
///
/// A zero set is scaled so that `f(0) = 1`; `{"circle_roots":[{"angle":"0",
/// "mult":1}]}` therefore denotes `1 - z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ProblemSpec {
    Coeffs { coeffs: Vec<[f64; 2]> },
    CircleRoots { circle_roots: Vec<CircleRoot> },
}

/// A resolved problem: the polynomial and, when known, its circle zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub f: Poly,
    pub spec: Option<CircleZeroSpec>,
}

impl ProblemSpec {
    pub fn resolve(&self) -> Result<Problem> {
        match self {
            ProblemSpec::Coeffs { coeffs } => {
                let f = Poly::new(
                    coeffs
                        .iter()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect(),
                );
                if f.is_zero() {
                    return Err(OpaError::Argument(
                        "f must not be the zero polynomial".into(),
                    ));
                }
                Ok(Problem { f, spec: None })
            }
            ProblemSpec::CircleRoots { circle_roots } => {
                let spec = CircleZeroSpec::new(circle_roots.clone())?.normalized_at_origin();
                Ok(Problem {
                    f: spec.expand(),
                    spec: Some(spec),
                })
            }
        }
    }

    /// Parses `--roots "0:1,pi/2:2"`.
    pub fn from_roots(text: &str) -> Result<ProblemSpec> {
        let spec = CircleZeroSpec::parse_roots(text)?;
        Ok(ProblemSpec::CircleRoots {
            circle_roots: spec.roots().to_vec(),
        })
    }

    /// Parses `--coeffs "1,-1"`; entries may be complex, as in `0.5+2i`.
    pub fn from_coeffs(text: &str) -> Result<ProblemSpec> {
        let coeffs = text
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse::<Complex64>()
                    .map(|c| [c.re, c.im])
                    .map_err(|_| OpaError::Parse(format!("cannot parse coefficient {item:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProblemSpec::Coeffs { coeffs })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub p: Exponent,
    pub weight: WeightSpec,
}

impl SpaceSpec {
    pub fn build(&self) -> Result<SpaceParams> {
        SpaceParams::new(self.p, self.weight.build()?)
    }
}

/// A single degree or a geometric range `a..b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Single(usize),
    Range(String),
}

impl DegreeSpec {
    pub fn parse(text: &str) -> Result<DegreeSpec> {
        let text = text.trim();
        if text.contains("..") {
            let spec = DegreeSpec::Range(text.to_string());
            spec.grid()?;
            Ok(spec)
        } else {
            text.parse()
                .map(DegreeSpec::Single)
                .map_err(|_| OpaError::Parse(format!("cannot parse degree {text:?}")))
        }
    }

    pub fn grid(&self) -> Result<Vec<usize>> {
        match self {
            DegreeSpec::Single(n) => Ok(vec![*n]),
            DegreeSpec::Range(text) => {
                let (a, b) = text.split_once("..").ok_or_else(|| {
                    OpaError::Parse(format!("cannot parse degree range {text:?}"))
                })?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| OpaError::Parse(format!("cannot parse degree range {text:?}")))
                };
                geometric_grid(parse(a)?, parse(b)?)
            }
        }
    }

    pub fn single(&self) -> Result<usize> {
        match self {
            DegreeSpec::Single(n) => Ok(*n),
            DegreeSpec::Range(r) => Err(OpaError::Argument(format!(
                "expected a single degree, got {r:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Compute,
    Sweep,
    Verify,
    ClosedForm,
    Classify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub problem: Option<ProblemSpec>,
    #[serde(default)]
    pub space: Option<SpaceSpec>,
    #[serde(default)]
    pub n: Option<DegreeSpec>,
    /// The `d` of `1 - z^d` for `closed-form`.
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub solver: Option<SolverKind>,
    #[serde(default)]
    pub opts: SolverOpts,
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Report wall-clock times in sweep output.
    #[serde(default)]
    pub timing: bool,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| OpaError::Parse(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| OpaError::Parse(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Checks that the fields required by the command are present and that
    /// the output format suits it.
    pub fn validate(&self) -> Result<()> {
        let need = |present: bool, what: &str| {
            if present {
                Ok(())
            } else {
                Err(OpaError::Parse(format!("{:?} needs {what}", self.command)))
            }
        };
        let formats: &[Format] = match self.command {
            Command::Compute => {
                need(self.problem.is_some(), "a problem")?;
                need(self.space.is_some(), "a space")?;
                need(self.n.is_some(), "a degree n")?;
                self.n.as_ref().unwrap().single()?;
                &[Format::Json]
            }
            Command::Sweep => {
                need(self.problem.is_some(), "a problem")?;
                need(self.space.is_some(), "a space")?;
                need(self.n.is_some(), "a degree range n")?;
                self.n.as_ref().unwrap().grid()?;
                &[Format::Csv]
            }
            Command::Verify => &[Format::Json],
            Command::ClosedForm => {
                need(self.space.is_some(), "a space")?;
                need(self.n.is_some(), "a degree n")?;
                self.n.as_ref().unwrap().single()?;
                &[Format::Json]
            }
            Command::Classify => {
                need(self.space.is_some(), "a space")?;
                &[Format::Text, Format::Json]
            }
        };
        if !formats.contains(&self.output.format) {
            return Err(OpaError::Parse(format!(
                "output format {:?} does not suit {:?}",
                self.output.format, self.command
            )));
        }
        if let Some(space) = &self.space {
            space.build()?;
        }
        if let Some(problem) = &self.problem {
            problem.resolve()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_specs_parse() {
        let a: ProblemSpec = serde_json::from_str(r#"{"coeffs":[[1,0],[-1,0]]}"#).unwrap();
        let b: ProblemSpec =
            serde_json::from_str(r#"{"circle_roots":[{"angle":"0","mult":1}]}"#).unwrap();
        assert_eq!(a.resolve().unwrap().f, b.resolve().unwrap().f);
        assert!(
            serde_json::from_str::<ProblemSpec>(r#"{"coeffs":[[1,0]],"circle_roots":[]}"#).is_err()
        );
        assert_eq!(ProblemSpec::from_coeffs("1, -1").unwrap(), a);
        let c = ProblemSpec::from_coeffs("1,0.5+2i").unwrap();
        assert_eq!(
            c,
            ProblemSpec::Coeffs {
                coeffs: vec![[1.0, 0.0], [0.5, 2.0]]
            }
        );
    }

    #[test]
    fn degree_specs() {
        assert_eq!(DegreeSpec::parse("12").unwrap(), DegreeSpec::Single(12));
        assert_eq!(
            DegreeSpec::parse("64..256").unwrap().grid().unwrap(),
            vec![64, 128, 256]
        );
        assert!(DegreeSpec::parse("8..2").is_err());
        assert!(DegreeSpec::parse("x").is_err());
    }

    #[test]
    fn run_config_round_trip() {
        let text = r#"{
            "command": "sweep",
            "problem": {"circle_roots": [{"angle": "pi", "mult": 2}]},
            "space": {"p": 3, "weight": {"kind": "power", "alpha": 0.5}},
            "n": "32..128",
            "opts": {"grad_tol": 1e-9},
            "output": {"format": "csv"}
        }"#;
        let config = RunConfig::from_json(text).unwrap();
        assert_eq!(config.opts.grad_tol, 1e-9);
        assert_eq!(config.opts.max_iters, SolverOpts::default().max_iters);
        let again = RunConfig::from_json(&serde_json::to_string(&config).unwrap()).unwrap();
        assert_eq!(config, again);
    }

    #[test]
    fn schema_violations() {
        let unknown = r#"{"command":"classify","space":{"p":2,"weight":{"kind":"power","alpha":0}},
            "output":{"format":"text"},"bogus":1}"#;
        assert!(RunConfig::from_json(unknown).is_err());
        let wrong_format = r#"{"command":"classify","space":{"p":2,"weight":{"kind":"power","alpha":0}},
            "output":{"format":"csv"}}"#;
        assert!(RunConfig::from_json(wrong_format).is_err());
        let missing = r#"{"command":"compute","output":{"format":"json"}}"#;
        assert!(RunConfig::from_json(missing).is_err());
    }
}
