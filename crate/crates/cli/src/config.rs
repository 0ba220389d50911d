//! Scenario files: one TOML document per scenario. See `docs/config.md`.

use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use sdrd_core::attractor::{CoverStrategy, Metric};
use sdrd_core::grid::{build_grid, CoupledState, Grid, RangeTag, StateField};
use sdrd_core::initial::InitialSpec;
use sdrd_core::io::parse_snapshot;
use sdrd_core::nonlinearity::{PhiSpec, PhiTable, ReactionSpec};
use sdrd_core::solver::{Problem, SolverConfig, State};

use crate::checks::CHECKS;
use crate::error::{from_core_config, CliError, CliResult};

/// Keys that must be present; reported by dotted name when missing.
pub const REQUIRED_KEYS: &[&str] = &[
    "grid.lengths",
    "grid.nodes",
    "phi.kind",
    "reaction.kind",
    "initial.u",
    "solver.dt",
    "solver.t_end",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    pub phi: PhiConfig,
    pub reaction: ReactionConfig,
    pub initial: InitialConfig,
    pub solver: SolverSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attractor: Option<AttractorConfig>,
}

fn default_name() -> String {
    "scenario".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lengths: Vec<f64>,
    pub nodes: Vec<usize>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiConfig {
    Biofilm {
        a: f64,
        b: f64,
        #[serde(default = "yes")]
        symmetric: bool,
    },
    Power {
        m: f64,
        #[serde(default = "yes")]
        symmetric: bool,
    },
    Tabulated {
        z: Vec<f64>,
        values: Vec<f64>,
        #[serde(default = "yes")]
        symmetric: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReactionConfig {
    Zero,
    ScalarDecay {
        lambda: f64,
    },
    Monod {
        k1: f64,
        k2: f64,
        k3: f64,
        k4: f64,
        d1: f64,
        d2: f64,
    },
}

/// A preset (see [`InitialSpec`]) or `preset = "csv"` with a `path` to a snapshot CSV.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialSource {
    Csv { path: PathBuf },
    Preset(InitialSpec),
}

impl<'de> Deserialize<'de> for InitialSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let table = toml::Table::deserialize(d)?;
        if table.get("preset").and_then(|v| v.as_str()) == Some("csv") {
            if let Some(extra) = table.keys().find(|k| *k != "preset" && *k != "path") {
                return Err(D::Error::custom(format!("unknown field `{extra}` for csv initial data")));
            }
            let path = table
                .get("path")
                .and_then(|v| v.as_str())
                .ok_or_else(|| D::Error::custom("csv initial data needs a `path` string"))?;
            return Ok(Self::Csv { path: path.into() });
        }
        InitialSpec::deserialize(toml::Value::Table(table))
            .map(Self::Preset)
            .map_err(|e| D::Error::custom(e.message()))
    }
}

impl Serialize for InitialSource {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Csv { path } => {
                let mut map = s.serialize_map(Some(2))?;
                map.serialize_entry("preset", "csv")?;
                map.serialize_entry("path", path)?;
                map.end()
            }
            Self::Preset(spec) => spec.serialize(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub u: InitialSource,
    /// Nutrient for coupled reactions; defaults to `v = 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<InitialSource>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_r", alias = "R_schedule")]
    pub r_schedule: Vec<f64>,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_newton_iter")]
    pub newton_max_iter: usize,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

fn default_r() -> Vec<f64> {
    SolverConfig::default().r_schedule
}
fn default_newton_tol() -> f64 {
    SolverConfig::default().newton_tol
}
fn default_newton_iter() -> usize {
    SolverConfig::default().newton_max_iter
}
fn default_damping() -> f64 {
    SolverConfig::default().damping
}
fn default_snapshot_every() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSetConfig {
    pub theta: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    #[serde(default = "default_eps_d")]
    pub eps_d: f64,
    #[serde(default = "default_energy_tol")]
    pub energy_tol: f64,
    #[serde(default = "default_comparison_tol")]
    pub comparison_tol: f64,
    #[serde(default = "default_interface_threshold")]
    pub interface_threshold: f64,
    #[serde(default = "default_sweep_tol")]
    pub sweep_tol: f64,
    #[serde(default = "default_alpha")]
    pub interpolation_alpha: f64,
    #[serde(default = "default_profile_tol")]
    pub barenblatt_tol: f64,
    #[serde(default = "default_exponent_tol")]
    pub exponent_tol: f64,
    /// Defaults to `1 - max u0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_set: Option<LevelSetConfig>,
}

fn default_checks() -> Vec<String> {
    vec!["energy".into()]
}
fn default_eps_d() -> f64 {
    sdrd_core::diagnostics::EPS_D
}
fn default_energy_tol() -> f64 {
    sdrd_core::diagnostics::ENERGY_TOL
}
fn default_comparison_tol() -> f64 {
    1e-8
}
fn default_interface_threshold() -> f64 {
    1e-6
}
fn default_sweep_tol() -> f64 {
    1e-3
}
fn default_alpha() -> f64 {
    1.0
}
fn default_profile_tol() -> f64 {
    1e-2
}
fn default_exponent_tol() -> f64 {
    0.05
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            checks: default_checks(),
            eps_d: default_eps_d(),
            energy_tol: default_energy_tol(),
            comparison_tol: default_comparison_tol(),
            interface_threshold: default_interface_threshold(),
            sweep_tol: default_sweep_tol(),
            interpolation_alpha: default_alpha(),
            barenblatt_tol: default_profile_tol(),
            exponent_tol: default_exponent_tol(),
            barrier_eta: None,
            level_set: None,
        }
    }
}

/// Second run of the same scenario for paired checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub initial: InitialConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction: Option<ReactionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttractorConfig {
    /// One member run per seed; random presets take the member seed.
    pub seeds: Vec<u64>,
    pub burn_in: f64,
    pub n_samples: usize,
    pub gap: f64,
    #[serde(default)]
    pub metric: Metric,
    pub eps: Vec<f64>,
    #[serde(default)]
    pub strategy: CoverStrategy,
    #[serde(default = "default_collapse_eps")]
    pub collapse_eps: f64,
    /// Time window of the rate fit; defaults to `[0, burn_in / 2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_dimension: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_rate: Option<f64>,
    #[serde(default)]
    pub expect_single_ball: bool,
}

fn default_collapse_eps() -> f64 {
    1e-6
}

/// A parsed scenario together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub scenario: Scenario,
    pub base_dir: PathBuf,
    pub source: String,
}

pub fn load_scenario(path: &Path, seed_override: Option<u64>) -> CliResult<LoadedScenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let scenario = parse_scenario(&text, seed_override)
        .map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(LoadedScenario {
        scenario,
        base_dir,
        source: text,
    })
}

fn lookup<'a>(table: &'a toml::Table, dotted: &str) -> Option<&'a toml::Value> {
    let mut parts = dotted.split('.');
    let mut cur = table.get(parts.next()?)?;
    for p in parts {
        cur = cur.as_table()?.get(p)?;
    }
    Some(cur)
}

fn lookup_mut<'a>(table: &'a mut toml::Table, dotted: &str) -> Option<&'a mut toml::Table> {
    let mut cur = table;
    for p in dotted.split('.') {
        cur = cur.get_mut(p)?.as_table_mut()?;
    }
    Some(cur)
}

/// Random presets without an explicit seed take `seed + offset`; an override
/// replaces every random seed.
fn assign_seeds(table: &mut toml::Table, seed: u64, overridden: bool) {
    let slots = [("initial.u", 0), ("initial.v", 1), ("pair.initial.u", 2), ("pair.initial.v", 3)];
    for (path, offset) in slots {
        if let Some(t) = lookup_mut(table, path) {
            let random = t.get("preset").and_then(|v| v.as_str()) == Some("random");
            if random && (overridden || !t.contains_key("seed")) {
                let s = seed.wrapping_add(offset);
                t.insert("seed".into(), toml::Value::Integer(s as i64));
            }
        }
    }
}

pub fn parse_scenario(text: &str, seed_override: Option<u64>) -> CliResult<Scenario> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    for key in REQUIRED_KEYS {
        if lookup(&table, key).is_none() {
            return Err(CliError::Config(format!("missing required key `{key}`")));
        }
    }
    if let Some(seed) = seed_override {
        table.insert("seed".into(), toml::Value::Integer(seed as i64));
    }
    let seed = match table.get("seed") {
        None => 0,
        Some(toml::Value::Integer(s)) if *s >= 0 => *s as u64,
        Some(other) => return Err(CliError::Config(format!("`seed` must be a nonnegative integer (got {other})"))),
    };
    assign_seeds(&mut table, seed, seed_override.is_some());
    let scenario: Scenario = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Config(inner.message().to_string())
        } else {
            CliError::Config(format!("`{path}`: {}", inner.message()))
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn validate(&self) -> CliResult<()> {
        self.grid()?;
        self.phi_spec()?;
        let reaction = self.reaction_spec(&self.reaction)?;
        if let Some(pair) = &self.pair {
            if let Some(r) = &pair.reaction {
                let other = self.reaction_spec(r)?;
                if other.is_coupled() != reaction.is_coupled() {
                    return Err(CliError::Config("`pair.reaction` must match the coupling of `reaction`".into()));
                }
            }
        }
        self.solver_config().validate().map_err(from_core_config)?;
        if self.solver.snapshot_every == 0 {
            return Err(CliError::Config("`solver.snapshot_every` must be at least 1".into()));
        }
        for c in &self.diagnostics.checks {
            if !CHECKS.contains(&c.as_str()) {
                return Err(CliError::Config(format!("unknown check `{c}` (known: {})", CHECKS.join(", "))));
            }
        }
        if !reaction.is_coupled() && self.initial.v.is_some() {
            return Err(CliError::Config("`initial.v` is only used with coupled reactions".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Grid> {
        build_grid(self.grid.lengths.len(), &self.grid.lengths, &self.grid.nodes).map_err(from_core_config)
    }

    pub fn phi_spec(&self) -> CliResult<PhiSpec> {
        let spec = match &self.phi {
            PhiConfig::Biofilm { a, b, symmetric } => PhiSpec::biofilm(*a, *b)?.with_symmetric_extension(*symmetric),
            PhiConfig::Power { m, symmetric } => PhiSpec::power(*m)?.with_symmetric_extension(*symmetric),
            PhiConfig::Tabulated { z, values, symmetric } => {
                PhiSpec::tabulated(PhiTable::new(z.clone(), values.clone())?).with_symmetric_extension(*symmetric)
            }
        };
        Ok(spec)
    }

    pub fn reaction_spec(&self, r: &ReactionConfig) -> CliResult<ReactionSpec> {
        let spec = match r {
            ReactionConfig::Zero => ReactionSpec::zero(),
            ReactionConfig::ScalarDecay { lambda } => ReactionSpec::scalar_decay(*lambda)?,
            ReactionConfig::Monod { k1, k2, k3, k4, d1, d2 } => ReactionSpec::monod(*k1, *k2, *k3, *k4, *d1, *d2)?,
        };
        Ok(spec)
    }

    pub fn pair_reaction(&self) -> CliResult<Option<ReactionSpec>> {
        match self.pair.as_ref().and_then(|p| p.reaction.as_ref()) {
            Some(r) => Ok(Some(self.reaction_spec(r)?)),
            None => Ok(None),
        }
    }

    /// Value range of `u`: signed only for scalar runs with the odd extension of `phi`.
    pub fn range(&self) -> CliResult<RangeTag> {
        let signed = self.phi_spec()?.symmetric_extension && !self.reaction_spec(&self.reaction)?.nonnegative();
        Ok(if signed { RangeTag::Signed } else { RangeTag::NonNegative })
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            dt: self.solver.dt,
            t_end: self.solver.t_end,
            r_schedule: self.solver.r_schedule.clone(),
            newton_tol: self.solver.newton_tol,
            newton_max_iter: self.solver.newton_max_iter,
            damping: self.solver.damping,
            snapshot_times: Vec::new(),
        }
        .with_snapshot_every(self.solver.snapshot_every)
    }

    fn build_source(&self, src: &InitialSource, range: RangeTag, base: &Path, want_v: bool) -> CliResult<StateField> {
        let grid = self.grid()?;
        match src {
            InitialSource::Preset(spec) => spec.build(&grid, range).map_err(from_core_config),
            InitialSource::Csv { path } => {
                let full = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", full.display())))?;
                let snap = parse_snapshot(&text, &grid, if want_v { RangeTag::NonNegative } else { range })
                    .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
                if want_v {
                    let v = snap
                        .state
                        .v()
                        .ok_or_else(|| CliError::Config(format!("{} has no v column", full.display())))?;
                    Ok(v.clone())
                } else {
                    Ok(snap.state.u().clone())
                }
            }
        }
    }

    pub fn initial_state(&self, initial: &InitialConfig, base: &Path) -> CliResult<State> {
        let reaction = self.reaction_spec(&self.reaction)?;
        let range = self.range()?;
        let u = self.build_source(&initial.u, range, base, false)?;
        if !reaction.is_coupled() {
            return Ok(State::Scalar(u));
        }
        let grid = self.grid()?;
        let v = match &initial.v {
            Some(src) => {
                let v = self.build_source(src, RangeTag::Unit, base, true)?;
                StateField::new(grid, v.values().to_vec(), RangeTag::Unit).map_err(from_core_config)?
            }
            None => match &initial.u {
                // a coupled CSV carries its own nutrient column
                InitialSource::Csv { .. } => {
                    let v = self.build_source(&initial.u, RangeTag::Unit, base, true)?;
                    StateField::new(grid, v.values().to_vec(), RangeTag::Unit).map_err(from_core_config)?
                }
                InitialSource::Preset(_) => StateField::from_fn(grid, RangeTag::Unit, |_| 1.0).map_err(from_core_config)?,
            },
        };
        Ok(State::Coupled(CoupledState::new(u, v).map_err(from_core_config)?))
    }

    pub fn problem(&self, base: &Path) -> CliResult<Problem> {
        Ok(Problem {
            phi: self.phi_spec()?,
            reaction: self.reaction_spec(&self.reaction)?,
            initial: self.initial_state(&self.initial, base)?,
            config: self.solver_config(),
        })
    }

    pub fn pair_problem(&self, base: &Path) -> CliResult<Option<Problem>> {
        let Some(pair) = &self.pair else { return Ok(None) };
        let reaction = match &pair.reaction {
            Some(r) => self.reaction_spec(r)?,
            None => self.reaction_spec(&self.reaction)?,
        };
        Ok(Some(Problem {
            phi: self.phi_spec()?,
            reaction,
            initial: self.initial_state(&pair.initial, base)?,
            config: self.solver_config(),
        }))
    }

    /// TOML text of the scenario as run, after seed assignment.
    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("cannot serialize scenario: {e}")))
    }

    /// Canonical JSON used for the config hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }
}

impl From<sdrd_core::Error> for CliError {
    fn from(e: sdrd_core::Error) -> Self {
        from_core_config(e)
    }
}
