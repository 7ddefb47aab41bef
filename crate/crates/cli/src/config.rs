use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use fredholm2d::solver::{Variant, DEFAULT_COND_EXACT_LIMIT, DEFAULT_NEWTON_MAXIT, DEFAULT_NEWTON_TOLERANCE};
use fredholm2d::study::StudyConfig;
use fredholm2d::FitMode;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Nodes,
    Quadtest,
    Solve,
    SolveNonlinear,
    Study,
    Compare,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::Nodes,
        Command::Quadtest,
        Command::Solve,
        Command::SolveNonlinear,
        Command::Study,
        Command::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Nodes => "nodes",
            Command::Quadtest => "quadtest",
            Command::Solve => "solve",
            Command::SolveNonlinear => "solve-nonlinear",
            Command::Study => "study",
            Command::Compare => "compare",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainName {
    UnitSquare,
    UnitDisk,
    /// `0.4 ≤ |x| ≤ 1`.
    Annulus,
    /// `[0,1]² minus (0.5,1]²`.
    LShape,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelName {
    Gaussian,
    PolyDecay,
    Oscillatory,
    /// `k ≡ 1`.
    Constant,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    ManufacturedSmooth,
    DirichletSquare,
    NeumannDisk,
    LogisticDisk,
}

/// Every tunable of a run. Keys absent from the config take these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub output_dir: PathBuf,
    pub domain: DomainName,
    pub kernel: KernelName,
    pub sigma: f64,
    pub lambda: f64,
    pub problem: Preset,
    /// Spacing of the quadrature nodes `Y` in single runs.
    pub h: f64,
    /// Spacing of the solution nodes `X` in single decoupled runs.
    pub h_x: f64,
    pub include_boundary: bool,
    pub variant: Variant,
    pub fit_degree: usize,
    pub fit_mode: FitMode,
    pub nodes_per_monomial: f64,
    pub mls_degree: usize,
    pub radius_factor: f64,
    pub seed_x: u64,
    pub seed_y: u64,
    pub realizations: usize,
    pub h_ladder: Vec<f64>,
    pub c_x: f64,
    pub c_y: f64,
    pub eval_resolution: usize,
    pub reference_resolution: usize,
    pub cond_exact_limit: usize,
    pub tol: f64,
    pub maxit: usize,
    pub growth_rate: f64,
    pub capacity: f64,
    pub absorption: f64,
    pub exterior_resolution: usize,
}

impl Default for Params {
    fn default() -> Self {
        let study = StudyConfig::default();
        Self {
            output_dir: PathBuf::from("out"),
            domain: DomainName::UnitSquare,
            kernel: KernelName::Gaussian,
            sigma: 0.5,
            lambda: 1.0,
            problem: Preset::ManufacturedSmooth,
            h: 0.05,
            h_x: 0.1,
            include_boundary: true,
            variant: Variant::Decoupled,
            fit_degree: study.fit_degree,
            fit_mode: study.fit_mode,
            nodes_per_monomial: study.nodes_per_monomial,
            mls_degree: study.mls_degree,
            radius_factor: study.radius_factor,
            seed_x: study.seed_x,
            seed_y: study.seed_y,
            realizations: study.realizations,
            h_ladder: study.h_ladder,
            c_x: study.c_x,
            c_y: study.c_y,
            eval_resolution: study.eval_resolution,
            reference_resolution: 20,
            cond_exact_limit: DEFAULT_COND_EXACT_LIMIT,
            tol: DEFAULT_NEWTON_TOLERANCE,
            maxit: DEFAULT_NEWTON_MAXIT,
            growth_rate: 1.0,
            capacity: 2.0,
            absorption: 0.1,
            exterior_resolution: 40,
        }
    }
}

impl Params {
    pub fn study_config(&self) -> StudyConfig {
        StudyConfig {
            h_ladder: self.h_ladder.clone(),
            c_x: self.c_x,
            c_y: self.c_y,
            mls_degree: self.mls_degree,
            fit_degree: self.fit_degree,
            radius_factor: self.radius_factor,
            eval_resolution: self.eval_resolution,
            seed_x: self.seed_x,
            seed_y: self.seed_y,
            realizations: self.realizations,
            variant: self.variant,
            fit_mode: self.fit_mode,
            nodes_per_monomial: self.nodes_per_monomial,
            cond_exact_limit: self.cond_exact_limit,
            ..StudyConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
}

/// Parses a config holding exactly one command section.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse(text, None)
}

/// Parses the section for `command`, ignoring sections of other commands.
pub fn parse_config_for(text: &str, command: Command) -> Result<RunConfig, CliError> {
    parse(text, Some(command))
}

fn parse(text: &str, wanted: Option<Command>) -> Result<RunConfig, CliError> {
    let (command, keys) = if text.trim_start().starts_with('{') {
        from_summary(text, wanted)?
    } else {
        from_toml(text, wanted)?
    };
    let params = params_from(keys)?;
    let config = RunConfig { command, params };
    validate(&config)?;
    Ok(config)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Top-level keys are shared; a table named after a command holds its keys.
fn from_toml(text: &str, wanted: Option<Command>) -> Result<(Command, Map<String, Value>), CliError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let mut shared = Map::new();
    let mut sections = Vec::new();
    for (key, value) in table {
        match (Command::from_name(&key), value) {
            (Some(c), toml::Value::Table(t)) => sections.push((c, t)),
            (Some(_), _) => return Err(validation(&key, "a command name must head a section")),
            (None, toml::Value::Table(_)) => return Err(validation(&key, "unknown section")),
            (None, v) => {
                shared.insert(key, to_json(v));
            }
        }
    }
    let (command, section) = match wanted {
        Some(w) => sections
            .into_iter()
            .find(|(c, _)| *c == w)
            .ok_or_else(|| validation("command", &format!("no [{w}] section")))?,
        None => {
            if sections.len() != 1 {
                return Err(validation(
                    "command",
                    &format!("expected exactly one command section, found {}", sections.len()),
                ));
            }
            sections.pop().expect("one section")
        }
    };
    for (key, value) in section {
        shared.insert(key, to_json(value));
    }
    Ok((command, shared))
}

fn to_json(v: toml::Value) -> Value {
    serde_json::to_value(v).expect("TOML values map onto JSON")
}

/// A `summary.json` written by a previous run: `command` plus the `config` echo.
fn from_summary(text: &str, wanted: Option<Command>) -> Result<(Command, Map<String, Value>), CliError> {
    let root: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let command = root
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| validation("command", "missing from summary"))?;
    let command = Command::from_name(command).ok_or_else(|| validation("command", "unknown command"))?;
    if wanted.is_some_and(|w| w != command) {
        return Err(validation("command", "summary was written by another command"));
    }
    match root.get("config") {
        Some(Value::Object(m)) => Ok((command, m.clone())),
        _ => Err(validation("config", "missing from summary")),
    }
}

fn params_from(keys: Map<String, Value>) -> Result<Params, CliError> {
    let known = match serde_json::to_value(Params::default()) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("Params serializes to an object"),
    };
    // Key by key first, so a bad value is reported against its own key.
    for (key, value) in &keys {
        if !known.contains_key(key) {
            return Err(validation(key, "unknown key"));
        }
        let mut one = Map::new();
        one.insert(key.clone(), value.clone());
        if let Err(e) = serde_json::from_value::<Params>(Value::Object(one)) {
            return Err(validation(key, &e.to_string()));
        }
    }
    serde_json::from_value(Value::Object(keys)).map_err(|e| validation("config", &e.to_string()))
}

fn validation(key: &str, reason: &str) -> CliError {
    CliError::Validation {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(validation(key, "must be positive"))
    }
}

fn validate(config: &RunConfig) -> Result<(), CliError> {
    let p = &config.params;
    positive("sigma", p.sigma)?;
    if p.lambda == 0.0 || !p.lambda.is_finite() {
        return Err(validation("lambda", "must be finite and nonzero"));
    }
    positive("h", p.h)?;
    positive("h_x", p.h_x)?;
    positive("tol", p.tol)?;
    positive("growth_rate", p.growth_rate)?;
    positive("capacity", p.capacity)?;
    if !(p.absorption >= 0.0 && p.absorption.is_finite()) {
        return Err(validation("absorption", "must be nonnegative"));
    }
    if p.fit_degree > fredholm2d::quadrature::MAX_MOMENT_DEGREE {
        return Err(validation("fit_degree", "exceeds the supported maximum"));
    }
    if p.mls_degree > 6 {
        return Err(validation("mls_degree", "must be at most 6"));
    }
    for (key, v) in [
        ("maxit", p.maxit),
        ("reference_resolution", p.reference_resolution),
        ("exterior_resolution", p.exterior_resolution),
        ("cond_exact_limit", p.cond_exact_limit),
    ] {
        if v == 0 {
            return Err(validation(key, "must be at least 1"));
        }
    }
    if p.output_dir.as_os_str().is_empty() {
        return Err(validation("output_dir", "must not be empty"));
    }
    // The ladder-related checks are shared with the study harness.
    p.study_config().validate().map_err(|e| match e {
        fredholm2d::Error::InvalidParameter { name, reason } => validation(name, &reason),
        fredholm2d::Error::TooFewLevels { .. } => validation("h_ladder", &e.to_string()),
        other => validation("config", &other.to_string()),
    })?;

    let needs = |key: &str, ok: bool, what: &str| if ok { Ok(()) } else { Err(validation(key, what)) };
    match p.problem {
        Preset::ManufacturedSmooth => {}
        Preset::DirichletSquare => {
            needs("domain", p.domain == DomainName::UnitSquare, "dirichlet_square needs unit_square")?;
            needs("kernel", p.kernel == KernelName::Gaussian, "dirichlet_square needs gaussian")?;
        }
        Preset::NeumannDisk => {
            needs("domain", p.domain == DomainName::UnitDisk, "neumann_disk needs unit_disk")?;
            needs("kernel", p.kernel == KernelName::Gaussian, "neumann_disk needs gaussian")?;
        }
        Preset::LogisticDisk => {
            needs("domain", p.domain == DomainName::UnitDisk, "logistic_disk needs unit_disk")?;
            needs(
                "kernel",
                matches!(p.kernel, KernelName::Gaussian | KernelName::Zero),
                "logistic_disk needs gaussian or zero",
            )?;
        }
    }
    match config.command {
        Command::SolveNonlinear => needs("problem", p.problem == Preset::LogisticDisk, "solve-nonlinear needs logistic_disk"),
        Command::Solve => needs("problem", p.problem != Preset::LogisticDisk, "logistic_disk is nonlinear; use solve-nonlinear"),
        Command::Study | Command::Compare => needs(
            "problem",
            p.problem == Preset::ManufacturedSmooth,
            "studies need a known solution: manufactured_smooth",
        ),
        Command::Nodes | Command::Quadtest => Ok(()),
    }
}
