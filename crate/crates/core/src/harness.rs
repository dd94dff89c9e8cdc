//! Scenario documents, run manifests and the files an experiment leaves on
//! disk.
//!
//! A scenario is one JSON object with snake_case keys. Powers may be given
//! as numbers (W) or strings with a unit (`"-114 dBm"`, `"10 W"`), the
//! carrier as a number (Hz) or a string (`"28 GHz"`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::ao::{self, AoConfig, AoResult};
use crate::baselines;
use crate::channel::BoundMode;
use crate::energy::{MAPowerParams, RotorcraftPowerParams};
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::scenario::{dbm_to_watts, Finding, Scenario};

/// The bundled reference scenario.
pub const TABLE1_JSON: &str = include_str!("../../../scenarios/table1.json");

/// A parsed scenario file: the instance plus the solver settings it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDoc {
    pub scenario: Scenario,
    pub config: AoConfig,
}

#[derive(Clone, Copy)]
enum Unit {
    Plain,
    Power,
    Frequency,
}

fn parse_with_unit(key: &str, text: &str, unit: Unit) -> Result<f64> {
    let text = text.trim().replace('\u{2212}', "-");
    let split = text
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .or_else(|| text.find(' '))
        .unwrap_or(text.len());
    let (num, suffix) = text.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::schema(key, format!("cannot read a number from `{text}`")))?;
    let suffix = suffix.trim();
    let converted = match (unit, suffix) {
        (_, "") => value,
        (Unit::Power, "W") => value,
        (Unit::Power, "mW") => value * 1e-3,
        (Unit::Power, "kW") => value * 1e3,
        (Unit::Power, "dBm") => dbm_to_watts(value),
        (Unit::Power, "dBW") => 10f64.powf(value / 10.0),
        (Unit::Frequency, "Hz") => value,
        (Unit::Frequency, "kHz") => value * 1e3,
        (Unit::Frequency, "MHz") => value * 1e6,
        (Unit::Frequency, "GHz") => value * 1e9,
        (_, other) => return Err(Error::schema(key, format!("unsupported unit `{other}`"))),
    };
    Ok(converted)
}

/// One JSON object being consumed key by key; leftovers are reported.
struct Section<'a> {
    path: String,
    map: &'a Map<String, Value>,
    seen: BTreeSet<String>,
}

impl<'a> Section<'a> {
    fn new(path: &str, value: &'a Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::schema(if path.is_empty() { "<root>" } else { path }, "expected an object"))?;
        Ok(Section { path: path.to_string(), map, seen: BTreeSet::new() })
    }

    fn key(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn get(&mut self, key: &str) -> Option<&'a Value> {
        self.seen.insert(key.to_string());
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn require(&mut self, key: &str) -> Result<&'a Value> {
        let full = self.key(key);
        self.get(key).ok_or_else(|| Error::schema(full, "missing required key"))
    }

    fn quantity(&mut self, key: &str, unit: Unit) -> Result<Option<f64>> {
        let full = self.key(key);
        let v = match self.get(key) {
            None => return Ok(None),
            Some(Value::Number(n)) => n.as_f64().ok_or_else(|| Error::schema(&full, "not a number"))?,
            Some(Value::String(s)) => parse_with_unit(&full, s, unit)?,
            Some(_) => return Err(Error::schema(full, "expected a number or a string with a unit")),
        };
        if !v.is_finite() {
            return Err(Error::schema(full, format!("must be finite, got {v}")));
        }
        Ok(Some(v))
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        self.require(key)?;
        Ok(self.quantity(key, Unit::Plain)?.expect("present"))
    }

    fn with_unit(&mut self, key: &str, unit: Unit) -> Result<f64> {
        self.require(key)?;
        Ok(self.quantity(key, unit)?.expect("present"))
    }

    fn count_opt(&mut self, key: &str) -> Result<Option<u64>> {
        let full = self.key(key);
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| Error::schema(full, format!("expected a non-negative integer, got {v}"))),
        }
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        self.require(key)?;
        Ok(self.count_opt(key)?.expect("present") as usize)
    }

    fn horizontal(&mut self, key: &str, z: f64) -> Result<Vec3> {
        let full = self.key(key);
        let v = self.require(key)?;
        let xs: Option<Vec<f64>> = v.as_array().map(|a| a.iter().filter_map(Value::as_f64).collect());
        match xs {
            Some(xs) if xs.len() == 2 && v.as_array().map_or(0, Vec::len) == 2 => {
                if xs.iter().all(|x| x.is_finite()) {
                    Ok(Vec3::new(xs[0], xs[1], z))
                } else {
                    Err(Error::schema(full, "coordinates must be finite"))
                }
            }
            _ => Err(Error::schema(full, "expected [x, y] in metres")),
        }
    }

    fn text(&mut self, key: &str) -> Result<Option<&'a str>> {
        let full = self.key(key);
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(Error::schema(full, "expected a string")),
        }
    }

    fn sub(&mut self, key: &str) -> Result<Option<Section<'a>>> {
        let full = self.key(key);
        self.get(key).map(|v| Section::new(&full, v)).transpose()
    }

    fn finish(self) -> Result<()> {
        match self.map.keys().find(|k| !self.seen.contains(*k)) {
            Some(k) => Err(Error::schema(self.key(k), "unknown key")),
            None => Ok(()),
        }
    }
}

fn parse_solver(sec: Option<Section<'_>>) -> Result<AoConfig> {
    let mut cfg = AoConfig::default();
    let Some(mut sec) = sec else { return Ok(cfg) };
    if let Some(v) = sec.quantity("eps_th", Unit::Plain)? {
        cfg.eps_th = v;
    }
    if let Some(v) = sec.count_opt("max_outer")? {
        cfg.max_outer = v as usize;
    }
    if let Some(v) = sec.text("bound_mode")? {
        cfg.bound = v.parse().map_err(|_| {
            Error::schema(sec.key("bound_mode"), format!("expected nominal, path-only or rigorous, got `{v}`"))
        })?;
    }
    if let Some(v) = sec.count_opt("seed")? {
        cfg.seed = v;
    }
    if let Some(v) = sec.count_opt("sca_iters")? {
        cfg.traj.sca_iters = v as usize;
    }
    if let Some(v) = sec.quantity("trust_radius", Unit::Plain)? {
        cfg.traj.trust_radius = Some(v);
    }
    if let Some(v) = sec.quantity("dinkelbach_tol", Unit::Plain)? {
        cfg.traj.dinkelbach.tol = v;
        cfg.beams.dinkelbach.tol = v;
    }
    if let Some(v) = sec.count_opt("dinkelbach_max_iter")? {
        cfg.traj.dinkelbach.max_iter = v as usize;
        cfg.beams.dinkelbach.max_iter = v as usize;
    }
    if let Some(v) = sec.quantity("eps_phi", Unit::Plain)? {
        cfg.angles.eps_phi = v;
    }
    if let Some(v) = sec.count_opt("samples")? {
        cfg.beams.samples = v as usize;
    }
    let positive = [
        ("trust_radius", cfg.traj.trust_radius.unwrap_or(1.0)),
        ("dinkelbach_tol", cfg.traj.dinkelbach.tol),
        ("eps_phi", cfg.angles.eps_phi),
    ];
    for (key, v) in positive {
        if v <= 0.0 {
            return Err(Error::schema(sec.key(key), format!("must be > 0, got {v}")));
        }
    }
    cfg.validate().map_err(|e| match e {
        Error::Schema { key, message } => Error::schema(sec.key(&key), message),
        other => other,
    })?;
    sec.finish()?;
    Ok(cfg)
}

/// Parses a scenario document and applies defaults for optional keys.
/// Feasibility is not checked here; see [`validate_str`].
pub fn parse_scenario(value: &Value) -> Result<ScenarioDoc> {
    let mut root = Section::new("", value)?;
    let h_b = root.number("h_b")?;
    let h_j = root.number("h_j")?;
    let q_b = root.horizontal("q_b", h_b)?;
    let q_u = root.horizontal("q_u", 0.0)?;
    let q_e = root.horizontal("q_e", 0.0)?;
    let q_i = root.horizontal("q_i", h_j)?;
    let q_f = root.horizontal("q_f", h_j)?;

    let mut prop = root.sub("propulsion")?.ok_or_else(|| Error::schema("propulsion", "missing required key"))?;
    let propulsion = RotorcraftPowerParams {
        p0: prop.with_unit("p0", Unit::Power)?,
        p1: prop.with_unit("p1", Unit::Power)?,
        u_tip_sq: prop.number("u_tip_sq")?,
        v0: prop.number("v0")?,
        r_drag: prop.number("r_drag")?,
        rho: prop.number("rho")?,
        s: prop.number("s")?,
        a: prop.number("a")?,
    };
    prop.finish()?;

    let mut ma_sec = root.sub("ma")?.ok_or_else(|| Error::schema("ma", "missing required key"))?;
    let ma = MAPowerParams {
        p_base: ma_sec.with_unit("p_base", Unit::Power)?,
        zeta: ma_sec.number("zeta")?,
        xi: ma_sec.number("xi")?,
        omega_el_max: ma_sec.quantity("omega_el_max", Unit::Plain)?.unwrap_or(MAPowerParams::DEFAULT_OMEGA),
        omega_az_max: ma_sec.quantity("omega_az_max", Unit::Plain)?.unwrap_or(MAPowerParams::DEFAULT_OMEGA),
    };
    ma_sec.finish()?;

    let scenario = Scenario {
        q_b,
        q_u,
        q_e,
        q_i,
        q_f,
        h_b,
        h_j,
        p_b: root.with_unit("p_b", Unit::Power)?,
        p_j: root.with_unit("p_j", Unit::Power)?,
        sigma2_u: root.with_unit("sigma2_u", Unit::Power)?,
        sigma2_e: root.with_unit("sigma2_e", Unit::Power)?,
        alpha_bu: root.number("alpha_bu")?,
        alpha_be: root.number("alpha_be")?,
        alpha_ju: root.number("alpha_ju")?,
        alpha_je: root.number("alpha_je")?,
        frequency: root.with_unit("f", Unit::Frequency)?,
        epsilon: root.number("epsilon")?,
        t_flight: root.number("t_flight")?,
        n_step: root.count("n_step")?,
        v_max: root.number("v_max")?,
        n_b: root.count("n_b")?,
        n_x: root.count("n_x")?,
        n_y: root.count("n_y")?,
        propulsion,
        ma,
    };
    let config = parse_solver(root.sub("solver")?)?;
    root.finish()?;
    Ok(ScenarioDoc { scenario, config })
}

fn read_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::schema("<document>", e.to_string()))
}

/// Sets `path` (dot-separated) in a JSON document. The value is read as
/// JSON when possible, otherwise kept as a string.
pub fn apply_override(doc: &mut Value, path: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return Err(Error::schema(path, "empty key in override"));
        }
        let map = node
            .as_object_mut()
            .ok_or_else(|| Error::schema(parts[..i].join("."), "cannot descend into a non-object"))?;
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split yields at least one part")
}

/// Loads a scenario file (or the bundled one for `None`), applies
/// overrides, and rejects infeasible instances with the offending key.
pub fn load_scenario_with(path: Option<&Path>, overrides: &BTreeMap<String, String>) -> Result<ScenarioDoc> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => TABLE1_JSON.to_string(),
    };
    let mut doc = read_json(&text)?;
    for (k, v) in overrides {
        apply_override(&mut doc, k, v)?;
    }
    let parsed = parse_scenario(&doc)?;
    if let Some(f) = parsed.scenario.check().into_iter().next() {
        return Err(Error::schema(f.key, f.message));
    }
    Ok(parsed)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioDoc> {
    load_scenario_with(Some(path), &BTreeMap::new())
}

/// Schema and feasibility findings for a scenario document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        f.write_str("invalid")?;
        for finding in &self.findings {
            write!(f, "\n  {}: {}", finding.key, finding.message)?;
        }
        Ok(())
    }
}

fn finding(e: Error) -> Finding {
    match e {
        Error::Schema { key, message } => Finding { key, message },
        other => Finding { key: "<document>".into(), message: other.to_string() },
    }
}

pub fn validate_str(text: &str) -> ValidationReport {
    let findings = match read_json(text).and_then(|v| parse_scenario(&v)) {
        Ok(doc) => doc.scenario.check(),
        Err(e) => vec![finding(e)],
    };
    ValidationReport { findings }
}

/// Never fails: unreadable files become a finding.
pub fn validate(path: &Path) -> ValidationReport {
    match fs::read_to_string(path) {
        Ok(text) => validate_str(&text),
        Err(e) => ValidationReport {
            findings: vec![Finding { key: "<file>".into(), message: format!("{}: {e}", path.display()) }],
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Proposed,
    Fixed,
    Direct,
    EveOriented,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Proposed, Method::Fixed, Method::Direct, Method::EveOriented];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::Fixed => "fixed",
            Method::Direct => "direct",
            Method::EveOriented => "eve_oriented",
        }
    }

    pub fn run(&self, scenario: &Scenario, config: &AoConfig) -> Result<AoResult> {
        match self {
            Method::Proposed => ao::run(scenario, config),
            Method::Fixed => baselines::baseline_fixed_antenna(scenario, config),
            Method::Direct => baselines::baseline_direct_path(scenario, config),
            Method::EveOriented => baselines::baseline_eve_oriented(scenario, config),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s || (s == "eve-oriented" && *m == Method::EveOriented))
            .ok_or_else(|| Error::schema("methods", format!("unknown method `{s}`")))
    }
}

/// Everything that defines one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// `None` runs the bundled table1 scenario.
    pub scenario: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub bound_mode: Option<BoundMode>,
    /// Dotted keys into the scenario document, e.g. `solver.max_outer`.
    pub overrides: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        RunManifest {
            scenario: None,
            methods: Method::ALL.to_vec(),
            seed: None,
            out: out.into(),
            bound_mode: None,
            overrides: BTreeMap::new(),
        }
    }

    /// The scenario and solver settings this manifest resolves to.
    pub fn resolve(&self) -> Result<ScenarioDoc> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.insert("solver.seed".into(), seed.to_string());
        }
        if let Some(mode) = self.bound_mode {
            overrides.insert("solver.bound_mode".into(), mode.as_str().to_string());
        }
        if self.methods.is_empty() {
            return Err(Error::schema("methods", "at least one method is required"));
        }
        load_scenario_with(self.scenario.as_deref(), &overrides)
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Schema { .. } | Error::InfeasibleScenario(_) => 1,
        Error::Io(_) => 3,
        _ => 2,
    }
}

/// Formats a float with 12 significant digits.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn round12(x: f64) -> f64 {
    sig12(x).parse().unwrap_or(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Totals {
    pub see: f64,
    pub sum_secrecy: f64,
    pub total_energy: f64,
    pub e_prop: f64,
    pub e_ma: f64,
    pub e_com: f64,
    pub path_length: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    /// `ok` or `failed`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub totals: Option<Totals>,
    /// `(SEE − SEE_fixed) / SEE_fixed`, when the fixed baseline ran.
    pub improvement_vs_fixed: Option<f64>,
    pub improvement_vs_eve_oriented: Option<f64>,
    pub runtime_s: f64,
    pub seed: u64,
    pub bound_mode: String,
}

#[derive(Debug)]
pub struct MethodRun {
    pub method: Method,
    pub result: Result<AoResult>,
    pub summary: MethodSummary,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub runs: Vec<MethodRun>,
}

impl ExperimentOutcome {
    pub fn failed(&self) -> bool {
        self.runs.iter().any(|r| r.result.is_err())
    }

    pub fn get(&self, method: Method) -> Option<&MethodRun> {
        self.runs.iter().find(|r| r.method == method)
    }
}

pub fn trajectory_csv(result: &AoResult, scenario: &Scenario) -> String {
    let st = &result.state;
    let mut out = String::from("n,x,y,z,v,phi_x,phi_z\n");
    for (n, q) in st.trajectory.iter().enumerate() {
        let (v, o) = if n == 0 {
            (0.0, st.previous_orientation(0))
        } else {
            (q.distance(st.trajectory[n - 1]) / scenario.dt(), st.orientations[n - 1])
        };
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{},{}",
            sig12(q.x),
            sig12(q.y),
            sig12(q.z),
            sig12(v),
            sig12(o.phi_x),
            sig12(o.phi_z)
        );
    }
    out
}

pub fn convergence_csv(result: &AoResult) -> String {
    let mut out = String::from("k,see,sum_secrecy,total_energy\n");
    for it in &result.trace.iterations {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            it.k,
            sig12(it.see),
            sig12(it.sum_secrecy),
            sig12(it.total_energy)
        );
    }
    out
}

pub fn energy_csv(result: &AoResult) -> String {
    let mut out = String::from("n,E_prop,E_MA,E_com\n");
    for (k, s) in result.report.per_slot.iter().enumerate() {
        let _ = writeln!(out, "{},{},{},{}", k + 1, sig12(s.e_prop), sig12(s.e_ma), sig12(s.e_com));
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn relative(see: f64, base: Option<f64>) -> Option<f64> {
    base.filter(|b| *b > 0.0).map(|b| round12((see - b) / b))
}

/// Runs every method of the manifest concurrently and writes one subtree
/// per method under `manifest.out`. A method that fails still gets a
/// `summary.json` with `status: failed`; check [`ExperimentOutcome::failed`].
pub fn run_experiment(manifest: &RunManifest) -> Result<ExperimentOutcome> {
    let doc = manifest.resolve()?;
    let mut methods = manifest.methods.clone();
    methods.sort();
    methods.dedup();

    let results: Vec<(Method, Result<AoResult>, f64)> = methods
        .par_iter()
        .map(|m| {
            let started = Instant::now();
            let r = m.run(&doc.scenario, &doc.config);
            (*m, r, started.elapsed().as_secs_f64())
        })
        .collect();

    let see_of = |method: Method| {
        results
            .iter()
            .find(|(m, _, _)| *m == method)
            .and_then(|(_, r, _)| r.as_ref().ok())
            .map(|r| r.report.see)
    };
    let fixed = see_of(Method::Fixed);
    let eve = see_of(Method::EveOriented);

    fs::create_dir_all(&manifest.out).map_err(|e| Error::Io(format!("{}: {e}", manifest.out.display())))?;
    let mut runs = Vec::with_capacity(results.len());
    for (method, result, runtime) in results {
        let dir = manifest.out.join(method.as_str());
        fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let mut summary = MethodSummary {
            method: method.as_str().to_string(),
            status: "ok".into(),
            error: None,
            totals: None,
            improvement_vs_fixed: None,
            improvement_vs_eve_oriented: None,
            runtime_s: round12(runtime),
            seed: doc.config.seed,
            bound_mode: doc.config.bound.as_str().to_string(),
        };
        match &result {
            Ok(r) => {
                write(&dir.join("trajectory.csv"), &trajectory_csv(r, &doc.scenario))?;
                write(&dir.join("convergence.csv"), &convergence_csv(r))?;
                write(&dir.join("energy.csv"), &energy_csv(r))?;
                summary.totals = Some(Totals {
                    see: round12(r.report.see),
                    sum_secrecy: round12(r.report.sum_secrecy),
                    total_energy: round12(r.report.total_energy),
                    e_prop: round12(r.report.total_prop()),
                    e_ma: round12(r.report.total_ma()),
                    e_com: round12(r.report.total_com()),
                    path_length: round12(r.state.path_length()),
                    iterations: r.trace.iterations.len() - 1,
                    converged: r.trace.converged,
                });
                summary.improvement_vs_fixed = relative(r.report.see, fixed);
                summary.improvement_vs_eve_oriented = relative(r.report.see, eve);
            }
            Err(e) => {
                summary.status = "failed".into();
                summary.error = Some(e.to_string());
            }
        }
        let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
        write(&dir.join("summary.json"), &(json + "\n"))?;
        runs.push(MethodRun { method, result, summary });
    }
    Ok(ExperimentOutcome { runs })
}

/// Output directory name for one sweep value.
pub fn sweep_dir(key: &str, value: &str) -> String {
    let clean: String = format!("{key}={value}")
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "=._-+".contains(c) { c } else { '_' })
        .collect();
    clean
}

/// Runs the manifest once per value of `key`, each into its own subtree.
pub fn sweep(manifest: &RunManifest, key: &str, values: &[String]) -> Vec<(String, Result<ExperimentOutcome>)> {
    values
        .par_iter()
        .map(|v| {
            let mut m = manifest.clone();
            m.overrides.insert(key.to_string(), v.clone());
            m.out = manifest.out.join(sweep_dir(key, v));
            (v.clone(), run_experiment(&m))
        })
        .collect()
}
