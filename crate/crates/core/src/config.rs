//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "model": {
//!     "topology": { "kind": "chain", "length": 3 },
//!     "dim": 1,
//!     "pinning": { "family": "quadratic", "stiffness": [1.0], "dim": 1 },
//!     "interaction": { "family": "quadratic", "stiffness": [1.0], "dim": 1 },
//!     "baths": [ { "gamma": 1.0, "temperature": 1.0 }, { "gamma": 1.0, "temperature": 2.0 } ]
//!   },
//!   "integrator": { "h": 0.01 },
//!   "experiment": { "kind": "simulate", "t_end": 10.0 },
//!   "output": { "record_every": 10 }
//! }
//! ```
//!
//! Each section is decoded on its own so that one run reports every problem
//! at once; syntax errors carry their line and column.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagnostics::{
    DecayOptions, DissipationConfig, DriftConfig, GibbsOptions, Observable, StationaryOptions,
};
use crate::dynamics::{prepare_state, BathParams, CounterexampleOptions, Model, Placement, State};
use crate::graph::{builtin_fixture, NetworkTopology};
use crate::potentials::{ConditionOptions, PotentialSpec};

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.errors.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TopologySection {
    /// One of the built-in networks.
    Fixture { name: String },
    /// A path with baths at both ends.
    Chain { length: usize },
    Graph {
        /// A vertex count or a list of names.
        vertices: VertexList,
        edges: Vec<(VertexRef, VertexRef)>,
        baths: Vec<VertexRef>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexList {
    Count(usize),
    Names(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub topology: TopologySection,
    pub dim: usize,
    /// `null` (unpinned), one potential for every mass, or a per-mass list
    /// whose entries may be `null`.
    #[serde(default)]
    pub pinning: Value,
    /// One potential for every edge, or a per-edge list.
    pub interaction: Value,
    /// Bath parameters in increasing bath-vertex order.
    pub baths: Vec<BathParams>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Baoab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub h: f64,
    pub scheme: Scheme,
    pub energy_adaptive: bool,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            h: 0.01,
            scheme: Scheme::Baoab,
            energy_adaptive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub record_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec![Format::Json, Format::Csv],
            record_every: 1,
        }
    }
}

impl OutputSection {
    pub fn csv(&self) -> bool {
        self.formats.contains(&Format::Csv)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    #[default]
    Zero,
    Energy {
        h0: f64,
        #[serde(default)]
        placement: Placement,
    },
    /// Per-vertex rows.
    Explicit { p: Vec<Vec<f64>>, q: Vec<Vec<f64>> },
}

impl InitialState {
    pub fn build(&self, model: &Model) -> crate::Result<State> {
        match self {
            InitialState::Zero => Ok(model.zero_state()),
            InitialState::Energy { h0, placement } => prepare_state(model, *h0, *placement),
            InitialState::Explicit { p, q } => {
                let s = State::from_rows(p, q)?;
                if s.vertex_count() != model.vertex_count() || s.dim != model.dim() {
                    return crate::error::invalid(format!(
                        "initial state has {} vertices of dimension {}, the model {} of dimension {}",
                        s.vertex_count(),
                        s.dim,
                        model.vertex_count(),
                        model.dim()
                    ));
                }
                Ok(s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub t_end: f64,
    #[serde(default)]
    pub initial: InitialState,
    #[serde(default = "yes")]
    pub noise: bool,
    #[serde(default = "one")]
    pub trajectories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsParams {
    pub observables: Vec<Observable>,
    pub samples: usize,
    pub t_check: f64,
    #[serde(default)]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryParams {
    pub burn_in: f64,
    pub samples_per_chain: usize,
    pub sample_every: usize,
    pub chains: usize,
    pub batches_per_chain: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumParams {
    #[serde(default)]
    pub gibbs: Option<GibbsParams>,
    #[serde(default)]
    pub stationary: Option<StationaryParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovParams {
    pub theta: f64,
    pub t_star: f64,
    pub ensemble: usize,
    pub energy_grid: Vec<f64>,
    pub lambda: f64,
    #[serde(default)]
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationParams {
    pub epsilon: f64,
    pub ensemble: usize,
    pub energy_grid: Vec<f64>,
    pub lambda: f64,
    #[serde(default)]
    pub placement: Placement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    pub observable: Observable,
    pub horizon: f64,
    pub ensemble: usize,
    #[serde(default)]
    pub fit_start: f64,
    #[serde(default)]
    pub burn_in: Option<f64>,
    pub reference_time: f64,
    #[serde(default)]
    pub initial: InitialState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Check(#[serde(default)] ConditionOptions),
    Simulate(SimulateParams),
    EquilibriumTest(EquilibriumParams),
    LyapunovScan(LyapunovParams),
    DissipationScan(DissipationParams),
    DecayFit(DecayParams),
    #[serde(rename = "counterexample-c4")]
    CounterexampleC4(CounterexampleOptions),
}

impl Experiment {
    pub fn command(&self) -> &'static str {
        match self {
            Experiment::Check(_) => "check",
            Experiment::Simulate(_) => "simulate",
            Experiment::EquilibriumTest(_) => "equilibrium-test",
            Experiment::LyapunovScan(_) => "lyapunov-scan",
            Experiment::DissipationScan(_) => "dissipation-scan",
            Experiment::DecayFit(_) => "decay-fit",
            Experiment::CounterexampleC4(_) => "counterexample-c4",
        }
    }
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub model: Option<ModelSection>,
    pub integrator: IntegratorSection,
    pub experiment: Experiment,
    pub output: OutputSection,
}

const SECTIONS: [&str; 5] = ["seed", "model", "integrator", "experiment", "output"];

fn section<T: DeserializeOwned>(root: &serde_json::Map<String, Value>, key: &str, errors: &mut Vec<String>) -> Option<T> {
    let value = root.get(key)?;
    match serde_json::from_value(value.clone()) {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("{key}: {e}"));
            None
        }
    }
}

fn potential(value: &Value, path: &str, errors: &mut Vec<String>) -> Option<PotentialSpec> {
    match serde_json::from_value::<PotentialSpec>(value.clone()) {
        Ok(p) => Some(p),
        Err(e) => {
            errors.push(format!("{path}: {e}"));
            None
        }
    }
}

fn resolve(r: &VertexRef, names: &[String], path: &str, errors: &mut Vec<String>) -> Option<usize> {
    match r {
        VertexRef::Index(i) if *i < names.len() => Some(*i),
        VertexRef::Index(i) => {
            errors.push(format!("{path}: vertex index {i} outside 0..{}", names.len()));
            None
        }
        VertexRef::Name(n) => match names.iter().position(|x| x == n) {
            Some(i) => Some(i),
            None => {
                errors.push(format!("{path}: unknown vertex name {n:?}"));
                None
            }
        },
    }
}

impl ModelSection {
    fn topology(&self, errors: &mut Vec<String>) -> Option<NetworkTopology> {
        let built = match &self.topology {
            TopologySection::Fixture { name } => builtin_fixture(name),
            TopologySection::Chain { length } => {
                if *length < 2 {
                    errors.push(format!("model.topology: a chain needs at least two masses, got {length}"));
                    return None;
                }
                let edges: Vec<(usize, usize)> = (0..length - 1).map(|i| (i, i + 1)).collect();
                NetworkTopology::new(*length, &edges, &[0, length - 1])
            }
            TopologySection::Graph { vertices, edges, baths } => {
                let names: Vec<String> = match vertices {
                    VertexList::Count(n) => (0..*n).map(|i| i.to_string()).collect(),
                    VertexList::Names(v) => v.clone(),
                };
                let before = errors.len();
                let e: Vec<(usize, usize)> = edges
                    .iter()
                    .enumerate()
                    .filter_map(|(k, (a, b))| {
                        let path = format!("model.topology.edges[{k}]");
                        Some((resolve(a, &names, &path, errors)?, resolve(b, &names, &path, errors)?))
                    })
                    .collect();
                let b: Vec<usize> = baths
                    .iter()
                    .enumerate()
                    .filter_map(|(k, v)| resolve(v, &names, &format!("model.topology.baths[{k}]"), errors))
                    .collect();
                if errors.len() > before {
                    return None;
                }
                NetworkTopology::with_names(names, &e, &b)
            }
        };
        match built {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(format!("model.topology: {e}"));
                None
            }
        }
    }

    /// Builds the model, appending every problem to `errors`.
    pub fn build(&self, errors: &mut Vec<String>) -> Option<Model> {
        let before = errors.len();
        let topology = self.topology(errors);
        let count = topology.as_ref().map(NetworkTopology::vertex_count);
        let edge_count = topology.as_ref().map(|t| t.edges().len());
        let pinning: Option<Vec<Option<PotentialSpec>>> = match &self.pinning {
            Value::Null => count.map(|c| vec![None; c]),
            Value::Array(items) => {
                if let Some(c) = count {
                    if items.len() != c {
                        errors.push(format!("model.pinning: {} entries for {c} masses", items.len()));
                    }
                }
                let list: Vec<Option<PotentialSpec>> = items
                    .iter()
                    .enumerate()
                    .map(|(k, v)| match v {
                        Value::Null => None,
                        v => potential(v, &format!("model.pinning[{k}]"), errors),
                    })
                    .collect();
                Some(list)
            }
            v => {
                let p = potential(v, "model.pinning", errors);
                count.map(|c| vec![p; c])
            }
        };
        let interaction: Option<Vec<PotentialSpec>> = match &self.interaction {
            Value::Array(items) => {
                if let Some(c) = edge_count {
                    if items.len() != c {
                        errors.push(format!("model.interaction: {} entries for {c} edges", items.len()));
                    }
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(k, v)| potential(v, &format!("model.interaction[{k}]"), errors))
                    .collect()
            }
            v => {
                let p = potential(v, "model.interaction", errors);
                edge_count.and_then(|c| p.map(|p| vec![p; c]))
            }
        };
        if let Some(t) = &topology {
            if self.baths.len() != t.baths().len() {
                errors.push(format!(
                    "model.baths: {} parameter sets for {} bath vertices",
                    self.baths.len(),
                    t.baths().len()
                ));
            }
        }
        if errors.len() > before {
            return None;
        }
        match Model::new(topology?, self.dim, pinning?, interaction?, self.baths.clone()) {
            Ok(m) => Some(m),
            Err(e) => {
                errors.push(format!("model: {e}"));
                None
            }
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            errors: vec![format!("cannot read {}: {e}", path.display())],
        })?;
        Self::from_json(&text)
    }

    /// Parses and validates; the model-independent and model-dependent checks
    /// all run before any error is returned.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let root: Value = serde_json::from_str(text).map_err(|e| ConfigError {
            errors: vec![format!("syntax error at line {}, column {}: {e}", e.line(), e.column())],
        })?;
        let Value::Object(root) = root else {
            return Err(ConfigError {
                errors: vec!["the configuration must be a JSON object".into()],
            });
        };
        let mut errors = Vec::new();
        for key in root.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                errors.push(format!("unknown section {key:?}; expected one of {SECTIONS:?}"));
            }
        }
        let seed = section::<u64>(&root, "seed", &mut errors);
        if !root.contains_key("seed") {
            errors.push("seed: missing (a 64-bit unsigned integer)".into());
        }
        let model = section::<ModelSection>(&root, "model", &mut errors);
        let integrator = section::<IntegratorSection>(&root, "integrator", &mut errors).unwrap_or_default();
        let experiment = section::<Experiment>(&root, "experiment", &mut errors);
        if !root.contains_key("experiment") {
            errors.push("experiment: missing".into());
        }
        let output = section::<OutputSection>(&root, "output", &mut errors).unwrap_or_default();
        let model_missing = root.contains_key("model") && model.is_none();
        let (Some(seed), Some(experiment)) = (seed, experiment) else {
            return Err(ConfigError { errors });
        };
        let config = ExperimentConfig {
            seed,
            model,
            integrator,
            experiment,
            output,
        };
        if !model_missing {
            config.validate_into(&mut errors);
        }
        if errors.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError { errors })
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    /// The model, or `None` for experiments that carry their own.
    pub fn model(&self) -> crate::Result<Option<Model>> {
        let Some(section) = &self.model else {
            return Ok(None);
        };
        let mut errors = Vec::new();
        match section.build(&mut errors) {
            Some(m) => Ok(Some(m)),
            None => crate::error::invalid(errors.join("; ")),
        }
    }

    pub fn gibbs_options(&self, p: &GibbsParams) -> GibbsOptions {
        GibbsOptions {
            observables: p.observables.clone(),
            samples: p.samples,
            t_check: p.t_check,
            h: self.integrator.h,
            temperature: p.temperature,
        }
    }

    pub fn stationary_options(&self, p: &StationaryParams) -> StationaryOptions {
        StationaryOptions {
            h: self.integrator.h,
            burn_in: p.burn_in,
            samples_per_chain: p.samples_per_chain,
            sample_every: p.sample_every,
            chains: p.chains,
            batches_per_chain: p.batches_per_chain,
        }
    }

    pub fn drift_config(&self, p: &LyapunovParams) -> DriftConfig {
        DriftConfig {
            theta: p.theta,
            t_star: p.t_star,
            ensemble: p.ensemble,
            energy_grid: p.energy_grid.clone(),
            lambda: p.lambda,
            h0: self.integrator.h,
            placement: p.placement,
            energy_adaptive: self.integrator.energy_adaptive,
        }
    }

    pub fn dissipation_config(&self, p: &DissipationParams) -> DissipationConfig {
        DissipationConfig {
            epsilon: p.epsilon,
            ensemble: p.ensemble,
            energy_grid: p.energy_grid.clone(),
            lambda: p.lambda,
            h0: self.integrator.h,
            placement: p.placement,
        }
    }

    pub fn decay_options(&self, p: &DecayParams) -> DecayOptions {
        DecayOptions {
            observable: p.observable,
            horizon: p.horizon,
            h: self.integrator.h,
            record_every: self.output.record_every,
            ensemble: p.ensemble,
            fit_start: p.fit_start,
            burn_in: p.burn_in,
            reference_time: p.reference_time,
        }
    }

    fn validate_into(&self, errors: &mut Vec<String>) {
        let h = self.integrator.h;
        if !(h > 0.0 && h.is_finite()) {
            errors.push(format!("integrator.h: step size must be positive, got {h}"));
        }
        if self.output.record_every == 0 {
            errors.push("output.record_every: must be at least 1".into());
        }
        if self.output.formats.is_empty() {
            errors.push("output.formats: at least one format is needed".into());
        }
        let needs_model = !matches!(self.experiment, Experiment::CounterexampleC4(_));
        let model = match (&self.model, needs_model) {
            (None, true) => {
                errors.push(format!("model: missing; {} needs a model", self.experiment.command()));
                return;
            }
            (Some(_), false) => {
                errors.push("model: counterexample-c4 uses its built-in model; remove the model section".into());
                return;
            }
            (None, false) => None,
            (Some(section), true) => match section.build(errors) {
                Some(m) => Some(m),
                None => return,
            },
        };
        let mut check = |label: &str, r: crate::Result<()>| {
            if let Err(e) = r {
                errors.push(format!("experiment.{label}: {e}"));
            }
        };
        match (&self.experiment, model) {
            (Experiment::Check(o), _) => {
                if !(o.rank_tol > 0.0 && o.rank_tol < 1.0) {
                    check("rank_tol", crate::error::invalid("must lie in (0, 1)"));
                }
                if o.max_ell == 0 {
                    check("max_ell", crate::error::invalid("must be at least 1"));
                }
                if o.sphere_samples < 100 {
                    check("sphere_samples", crate::error::invalid("must be at least 100"));
                }
            }
            (Experiment::Simulate(p), Some(m)) => {
                if !(p.t_end > 0.0 && p.t_end.is_finite()) {
                    check("t_end", crate::error::invalid("must be positive"));
                }
                if p.trajectories == 0 {
                    check("trajectories", crate::error::invalid("must be at least 1"));
                }
                check("initial", p.initial.build(&m).map(|_| ()));
            }
            (Experiment::EquilibriumTest(p), Some(m)) => {
                if p.gibbs.is_none() && p.stationary.is_none() {
                    check("", crate::error::invalid("give a gibbs section, a stationary section, or both"));
                }
                if let Some(g) = &p.gibbs {
                    let o = self.gibbs_options(g);
                    for (k, obs) in o.observables.iter().enumerate() {
                        check(&format!("gibbs.observables[{k}]"), obs.validate(&m));
                    }
                    if o.samples < 2 {
                        check("gibbs.samples", crate::error::invalid("need at least two samples"));
                    }
                    if !(o.t_check > 0.0) {
                        check("gibbs.t_check", crate::error::invalid("must be positive"));
                    }
                    let temps: Vec<f64> = m.bath_params().iter().map(|b| b.temperature).collect();
                    let equal = temps.windows(2).all(|w| w[0] == w[1]);
                    let t = o.temperature.or(if equal { temps.first().copied() } else { None });
                    match t {
                        None => check(
                            "gibbs.temperature",
                            crate::error::invalid("bath temperatures differ or are absent; give the sampling temperature"),
                        ),
                        Some(t) => check("gibbs", crate::diagnostics::GibbsSampler::new(&m, t).map(|_| ())),
                    }
                }
                if let Some(s) = &p.stationary {
                    let o = self.stationary_options(s);
                    if !(o.burn_in >= 0.0) {
                        check("stationary.burn_in", crate::error::invalid("must be non-negative"));
                    }
                    if o.chains == 0 || o.sample_every == 0 || o.batches_per_chain == 0 {
                        check(
                            "stationary",
                            crate::error::invalid("chains, sample_every and batches_per_chain must be positive"),
                        );
                    } else if o.samples_per_chain < 2 * o.batches_per_chain || o.chains * o.batches_per_chain < 2 {
                        check("stationary", crate::error::invalid("need two samples per batch and two batches"));
                    }
                    if m.input_rate() <= 0.0 {
                        check("stationary", crate::error::invalid("the model has no heat input (no bath with T > 0)"));
                    }
                }
            }
            (Experiment::LyapunovScan(p), Some(m)) => {
                let c = self.drift_config(p);
                check("lyapunov-scan", c.validate(&m));
                check(
                    "lambda",
                    crate::dynamics::TimescaleRule::new(
                        c.lambda,
                        m.interaction_degree().unwrap_or(2.0),
                        m.pinning_degree().unwrap_or(2.0),
                    )
                    .map(|_| ()),
                );
                if let Some(&e) = c.energy_grid.first() {
                    check("energy_grid", prepare_state(&m, e, c.placement).map(|_| ()));
                }
            }
            (Experiment::DissipationScan(p), Some(m)) => {
                let c = self.dissipation_config(p);
                check("dissipation-scan", c.validate());
                check(
                    "lambda",
                    crate::dynamics::TimescaleRule::new(
                        c.lambda,
                        m.interaction_degree().unwrap_or(2.0),
                        m.pinning_degree().unwrap_or(2.0),
                    )
                    .map(|_| ()),
                );
                if let Some(&e) = c.energy_grid.first() {
                    check("energy_grid", prepare_state(&m, e, c.placement).map(|_| ()));
                }
            }
            (Experiment::DecayFit(p), Some(m)) => {
                let o = self.decay_options(p);
                check("observable", o.observable.validate(&m));
                if !(o.horizon > o.h && o.horizon.is_finite()) {
                    check("horizon", crate::error::invalid("must exceed the step size"));
                }
                if o.ensemble < 2 {
                    check("ensemble", crate::error::invalid("must be at least 2"));
                }
                if !(o.fit_start >= 0.0 && o.fit_start < o.horizon) {
                    check("fit_start", crate::error::invalid("must lie in [0, horizon)"));
                }
                if !(o.reference_time > 0.0) {
                    check("reference_time", crate::error::invalid("must be positive"));
                }
                check("initial", p.initial.build(&m).map(|_| ()));
            }
            (Experiment::CounterexampleC4(o), _) => {
                if !(o.h > 0.0 && o.h.is_finite()) {
                    check("h", crate::error::invalid("must be positive"));
                }
                if !(o.x_stop < 4.0 && o.x_stop >= 4.0 - o.region.x2_radius) {
                    check("x_stop", crate::error::invalid("must lie in [4 − x2_radius, 4)"));
                }
                if o.record_every == 0 {
                    check("record_every", crate::error::invalid("must be at least 1"));
                }
            }
            (_, None) => {}
        }
    }
}
