//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comment
//! modulus = [[870,0],[0,870]]
//! modulus = [[2030,0],[290,2030]]
//! stage = 0,1 | 2          # groups of one stage, first index is the anchor
//! reconstructor = single, multistage
//! tau = 5:85:5             # start:stop:step, or a list such as 1, 2, 7/2
//! trials = 2000
//! seed = 1
//! f = centroid             # or random, or an explicit vector [3,4]
//! remainder = [1,2]        # optional, one per modulus, for single-shot runs
//! jobs = 4
//! output = out.csv
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, IntVector};
use crate::numeric::{fmt_rational, parse_rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reconstructor {
    Single,
    Multistage,
}

impl fmt::Display for Reconstructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reconstructor::Single => "single",
            Reconstructor::Multistage => "multistage",
        })
    }
}

impl FromStr for Reconstructor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "single" => Ok(Reconstructor::Single),
            "multistage" => Ok(Reconstructor::Multistage),
            other => Err(Error::ConfigInvalid(format!(
                "unknown reconstructor `{other}`"
            ))),
        }
    }
}

/// How the true vector is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FSpec {
    Explicit(IntVector),
    /// Region point nearest the region centroid, fixed for all trials.
    Centroid,
    /// Uniform over the region, redrawn every trial.
    Random,
}

impl fmt::Display for FSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FSpec::Explicit(v) => write!(f, "{v}"),
            FSpec::Centroid => f.write_str("centroid"),
            FSpec::Random => f.write_str("random"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub moduli: Vec<IntMatrix>,
    /// `grouping[s][g]` lists the members of group `g` at stage `s + 1`.
    pub grouping: Vec<Vec<Vec<usize>>>,
    pub reconstructors: Vec<Reconstructor>,
    pub tau_grid: Vec<BigRational>,
    pub trials: usize,
    pub seed: u64,
    pub f_spec: FSpec,
    pub remainders: Vec<IntVector>,
    pub jobs: Option<usize>,
    pub output: Option<String>,
}

pub const DEFAULT_TRIALS: usize = 2000;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            moduli: Vec::new(),
            grouping: Vec::new(),
            reconstructors: Vec::new(),
            tau_grid: Vec::new(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            f_spec: FSpec::Centroid,
            remainders: Vec::new(),
            jobs: None,
            output: None,
        }
    }
}

fn invalid(line: usize, msg: impl fmt::Display) -> Error {
    Error::ConfigInvalid(format!("line {line}: {msg}"))
}

fn parse_tau_grid(s: &str, line: usize) -> Result<Vec<BigRational>> {
    let rat = |t: &str| parse_rational(t).ok_or_else(|| invalid(line, format!("bad number `{t}`")));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(invalid(line, "tau range must be start:stop:step"));
        }
        let (start, stop, step) = (rat(parts[0])?, rat(parts[1])?, rat(parts[2])?);
        if !step.is_positive() {
            return Err(invalid(line, "tau step must be positive"));
        }
        let mut out = Vec::new();
        let mut t = start;
        while t <= stop {
            out.push(t.clone());
            t += &step;
        }
        return Ok(out);
    }
    s.split(',').map(|t| rat(t.trim())).collect()
}

fn parse_stage(s: &str, line: usize) -> Result<Vec<Vec<usize>>> {
    s.split('|')
        .map(|g| {
            g.split(',')
                .map(|i| {
                    i.trim()
                        .parse::<usize>()
                        .map_err(|_| invalid(line, format!("bad index `{}`", i.trim())))
                })
                .collect()
        })
        .collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| invalid(line, "expected `key = value`"))?;
            let value = value.trim();
            match key.trim() {
                "modulus" => cfg
                    .moduli
                    .push(IntMatrix::parse(value).map_err(|e| invalid(line, e))?),
                "stage" => cfg.grouping.push(parse_stage(value, line)?),
                "reconstructor" => {
                    for r in value.split(',') {
                        cfg.reconstructors.push(r.parse()?);
                    }
                }
                "tau" => cfg.tau_grid = parse_tau_grid(value, line)?,
                "trials" => {
                    cfg.trials = value
                        .parse()
                        .map_err(|_| invalid(line, "bad trial count"))?
                }
                "seed" => cfg.seed = value.parse().map_err(|_| invalid(line, "bad seed"))?,
                "f" => {
                    cfg.f_spec = match value {
                        "centroid" => FSpec::Centroid,
                        "random" => FSpec::Random,
                        v => FSpec::Explicit(IntVector::parse(v).map_err(|e| invalid(line, e))?),
                    }
                }
                "remainder" => cfg
                    .remainders
                    .push(IntVector::parse(value).map_err(|e| invalid(line, e))?),
                "jobs" => {
                    cfg.jobs = Some(value.parse().map_err(|_| invalid(line, "bad job count"))?)
                }
                "output" => cfg.output = Some(value.to_string()),
                other => return Err(invalid(line, format!("unknown key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.moduli.is_empty() {
            return Err(Error::ConfigInvalid("no `modulus` lines".into()));
        }
        let d = self.moduli[0].rows();
        if self.moduli.iter().any(|m| !m.is_square() || m.rows() != d) {
            return Err(Error::ConfigInvalid(
                "moduli must share one square shape".into(),
            ));
        }
        if self.remainders.iter().any(|r| r.dim() != d) {
            return Err(Error::ConfigInvalid(format!(
                "remainders must have {d} entries"
            )));
        }
        if let FSpec::Explicit(f) = &self.f_spec {
            if f.dim() != d {
                return Err(Error::ConfigInvalid(format!("f must have {d} entries")));
            }
        }
        if self.tau_grid.iter().any(|t| t.is_negative()) {
            return Err(Error::ConfigInvalid(
                "tau values must be nonnegative".into(),
            ));
        }
        if self.jobs == Some(0) {
            return Err(Error::ConfigInvalid("jobs must be positive".into()));
        }
        Ok(())
    }

    /// Reconstructors to run: the declared ones, else multistage when stages
    /// are given and single otherwise.
    pub fn effective_reconstructors(&self) -> Vec<Reconstructor> {
        if !self.reconstructors.is_empty() {
            self.reconstructors.clone()
        } else if self.grouping.is_empty() {
            vec![Reconstructor::Single]
        } else {
            vec![Reconstructor::Multistage]
        }
    }

    /// `tau^2` values of the grid.
    pub fn tau_sq_grid(&self) -> Vec<BigRational> {
        self.tau_grid.iter().map(|t| t * t).collect()
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for m in &self.moduli {
            out += &format!("modulus = {m}\n");
        }
        for stage in &self.grouping {
            let groups: Vec<String> = stage
                .iter()
                .map(|g| g.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
                .collect();
            out += &format!("stage = {}\n", groups.join(" | "));
        }
        if !self.reconstructors.is_empty() {
            let rs: Vec<String> = self.reconstructors.iter().map(|r| r.to_string()).collect();
            out += &format!("reconstructor = {}\n", rs.join(", "));
        }
        if !self.tau_grid.is_empty() {
            let ts: Vec<String> = self.tau_grid.iter().map(fmt_rational).collect();
            out += &format!("tau = {}\n", ts.join(", "));
        }
        out += &format!("trials = {}\n", self.trials);
        out += &format!("seed = {}\n", self.seed);
        out += &format!("f = {}\n", self.f_spec);
        for r in &self.remainders {
            out += &format!("remainder = {r}\n");
        }
        if let Some(j) = self.jobs {
            out += &format!("jobs = {j}\n");
        }
        if let Some(o) = &self.output {
            out += &format!("output = {o}\n");
        }
        out
    }
}

/// Integer tau grid helper.
pub fn int_grid(values: impl IntoIterator<Item = i64>) -> Vec<BigRational> {
    values
        .into_iter()
        .map(|v| BigRational::from_integer(BigInt::from(v)))
        .collect()
}
