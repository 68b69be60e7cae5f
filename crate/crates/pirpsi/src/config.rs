//! Experiment configuration: a flat `key = value` file, overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pirpsi_core::auditor::DEFAULT_BUDGET;
use pirpsi_core::query::QueryError;
use pirpsi_core::{DemandSideInfo, ParamError, SchemeParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid parameters {raw}: {source}")]
    Params {
        raw: String,
        #[source]
        source: ParamError,
    },
    #[error("cannot parse {key} from {value:?}: expected {expected}")]
    Syntax { key: String, value: String, expected: &'static str },
    #[error("{path}:{line}: {message}")]
    File { path: PathBuf, line: usize, message: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} is required")]
    Missing(&'static str),
    #[error("invalid demand/side information: {0}")]
    SideInfo(#[from] QueryError),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("store file holds {file} but --params gives {flag}")]
    StoreParams { file: SchemeParams, flag: SchemeParams },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Tabular,
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Format::Text),
            "tabular" | "csv" => Ok(Format::Tabular),
            _ => Err(syntax("format", s, "text or tabular")),
        }
    }
}

fn syntax(key: &str, value: &str, expected: &'static str) -> ConfigError {
    ConfigError::Syntax { key: key.to_string(), value: value.to_string(), expected }
}

/// Parses `N,K,M,L,q` and validates it.
pub fn parse_params(raw: &str) -> Result<SchemeParams, ConfigError> {
    let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
    let bad = || syntax("params", raw, "N,K,M,L,q");
    if fields.len() != 5 {
        return Err(bad());
    }
    let mut v = [0usize; 5];
    for (slot, f) in v.iter_mut().zip(&fields) {
        *slot = f.parse().map_err(|_| bad())?;
    }
    let q = u32::try_from(v[4]).map_err(|_| bad())?;
    SchemeParams::new(v[0], v[1], v[2], v[3], q)
        .map_err(|source| ConfigError::Params { raw: raw.trim().to_string(), source })
}

/// One tuple per non-blank line; `#` starts a comment.
pub fn parse_grid(text: &str, path: &Path) -> Result<Vec<SchemeParams>, ConfigError> {
    let mut grid = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = strip_comment(line);
        if line.is_empty() {
            continue;
        }
        grid.push(parse_params(line).map_err(|e| ConfigError::File {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(grid)
}

pub fn read_grid(path: &Path) -> Result<Vec<SchemeParams>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_grid(&text, path)
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| syntax(key, value, "an unsigned integer"))
}

fn parse_pair(key: &str, value: &str) -> Result<(usize, usize), ConfigError> {
    let (a, b) = value.split_once(',').ok_or_else(|| syntax(key, value, "I,J"))?;
    Ok((parse_num(key, a)?, parse_num(key, b)?))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

/// Settings before defaults are applied. Every field is optional so a file
/// and the command line can be layered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    pub params: Option<SchemeParams>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub grid: Option<PathBuf>,
    pub budget: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub demand: Option<usize>,
    pub side: Option<Vec<usize>>,
    pub fills: Option<usize>,
    pub m_fault: Option<(usize, usize)>,
    pub load_db: Option<PathBuf>,
    pub save_db: Option<PathBuf>,
}

impl RawConfig {
    /// Parses a `key = value` file. Relative paths inside it resolve against
    /// the file's directory.
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let base = path.parent().unwrap_or(Path::new(""));
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            let at =
                |e: ConfigError| ConfigError::File { path: path.to_path_buf(), line: i + 1, message: e.to_string() };
            let (key, value) = line.split_once('=').ok_or_else(|| at(syntax("line", line, "key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            raw.set(key, value, base).map_err(at)?;
        }
        Ok(raw)
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<(), ConfigError> {
        match key {
            "params" => self.params = Some(parse_params(value)?),
            "seed" => self.seed = Some(parse_num(key, value)?),
            "trials" => self.trials = Some(parse_num(key, value)?),
            "grid" => self.grid = Some(base.join(value)),
            "budget" => self.budget = Some(parse_num(key, value)?),
            "out" => self.out = Some(base.join(value)),
            "format" => self.format = Some(value.parse()?),
            "demand" => self.demand = Some(parse_num(key, value)?),
            "side" => self.side = Some(parse_list(key, value)?),
            "fills" => self.fills = Some(parse_num(key, value)?),
            "inject_m_fault" => self.m_fault = Some(parse_pair(key, value)?),
            "load_db" => self.load_db = Some(base.join(value)),
            "save_db" => self.save_db = Some(base.join(value)),
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: RawConfig) -> RawConfig {
        RawConfig {
            params: over.params.or(self.params),
            seed: over.seed.or(self.seed),
            trials: over.trials.or(self.trials),
            grid: over.grid.or(self.grid),
            budget: over.budget.or(self.budget),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            demand: over.demand.or(self.demand),
            side: over.side.or(self.side),
            fills: over.fills.or(self.fills),
            m_fault: over.m_fault.or(self.m_fault),
            load_db: over.load_db.or(self.load_db),
            save_db: over.save_db.or(self.save_db),
        }
    }

    pub fn resolve(self) -> Result<ExperimentConfig, ConfigError> {
        let grid = self.grid.as_deref().map(read_grid).transpose()?;
        Ok(ExperimentConfig {
            params: self.params,
            seed: self.seed.unwrap_or(0),
            trials: self.trials.unwrap_or(ExperimentConfig::DEFAULT_TRIALS),
            grid,
            budget: self.budget.unwrap_or(DEFAULT_BUDGET),
            out: self.out,
            format: self.format.unwrap_or_default(),
            demand: self.demand,
            side: self.side,
            fills: self.fills.unwrap_or(1),
            m_fault: self.m_fault,
            load_db: self.load_db,
            save_db: self.save_db,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub params: Option<SchemeParams>,
    pub seed: u64,
    pub trials: u64,
    pub grid: Option<Vec<SchemeParams>>,
    /// Ceiling on estimated enumeration branches.
    pub budget: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub demand: Option<usize>,
    pub side: Option<Vec<usize>>,
    /// Random stores per tape in the recoverability audit.
    pub fills: usize,
    /// Test hook: perturb `m_{I,J}` before checking the identities.
    pub m_fault: Option<(usize, usize)>,
    /// `PIRDB v1` file to serve instead of a random store.
    pub load_db: Option<PathBuf>,
    /// Where to write the store a demo ran against.
    pub save_db: Option<PathBuf>,
}

impl ExperimentConfig {
    pub const DEFAULT_TRIALS: u64 = 10_000;

    pub fn new(params: SchemeParams) -> Self {
        RawConfig { params: Some(params), ..RawConfig::default() }.resolve().expect("no files to read")
    }

    pub fn require_params(&self) -> Result<SchemeParams, ConfigError> {
        self.params.ok_or(ConfigError::Missing("--params"))
    }

    /// The explicit grid, else the single tuple, else `default`.
    pub fn tuples(&self, default: impl FnOnce() -> Vec<SchemeParams>) -> Vec<SchemeParams> {
        match (&self.grid, self.params) {
            (Some(g), _) => g.clone(),
            (None, Some(p)) => vec![p],
            (None, None) => default(),
        }
    }

    /// `(W, S)` from `demand`/`side`, defaulting to `W = 1`, `S = {2..M+1}`.
    pub fn demand_side(&self, params: &SchemeParams) -> Result<DemandSideInfo, ConfigError> {
        match (self.demand, &self.side) {
            (None, None) => Ok(DemandSideInfo::canonical(params)),
            (w, s) => {
                let w = w.unwrap_or(1);
                let s = match s {
                    Some(s) => s.clone(),
                    None => (1..=params.k()).filter(|&i| i != w).take(params.m()).collect(),
                };
                Ok(DemandSideInfo::new(w, s, params)?)
            }
        }
    }
}
