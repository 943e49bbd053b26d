//! Scenario file format.
//!
//! ```text
//! # comment
//! [circuit]
//! l1 = 24uH
//! [sweep]
//! distances = 0.5cm, 1cm, 2cm
//! ```
//!
//! Sections hold `key = value` lines. Physical values need a unit suffix,
//! lists are comma separated, and `distance:value` pairs use a colon.

use std::collections::BTreeSet;

use thiserror::Error;
use wpt_core::circuit::{LclFilter, LoadModel, Rectifier};
use wpt_core::magnetics::resonance_capacitance;
use wpt_core::{CoilSpec64, ControllerConfig64, CouplingModel64, LinkCircuit64};

use crate::scenario::{CouplingSpec, DosimetrySettings, LoadSchedule, Requirement, Scenario, SimSettings};
use crate::units::{parse_quantity, Dim};

pub const REQUIRED_SECTIONS: [&str; 6] = ["circuit", "controller", "coupling", "sweep", "sim", "requirement"];
const OPTIONAL_SECTIONS: [&str; 1] = ["dosimetry"];

pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.cfg");
pub const TABLE_I_SCENARIO: &str = include_str!("../scenarios/table1.cfg");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required sections: {}", .0.join(", "))]
    MissingSections(Vec<String>),
    #[error("invalid scenario: {}", .0.iter().map(|(k, r)| format!("{k}: {r}")).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<(String, String)>),
}

impl ConfigError {
    /// Keys named by a validation error.
    pub fn keys(&self) -> Vec<&str> {
        match self {
            ConfigError::Invalid(v) => v.iter().map(|(k, _)| k.as_str()).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone)]
struct Section {
    name: String,
    entries: Vec<Entry>,
}

fn tokenize(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Parse { line, message: "unterminated section header".into() })?
                .trim();
            if !REQUIRED_SECTIONS.contains(&name) && !OPTIONAL_SECTIONS.contains(&name) {
                return Err(ConfigError::Parse { line, message: format!("unknown section [{name}]") });
            }
            if sections.iter().any(|s| s.name == name) {
                return Err(ConfigError::Parse { line, message: format!("section [{name}] appears twice") });
            }
            sections.push(Section { name: name.to_string(), entries: Vec::new() });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Parse { line, message: "empty key or value".into() });
        }
        let section = sections
            .last_mut()
            .ok_or_else(|| ConfigError::Parse { line, message: format!("`{key}` appears before any section") })?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
        }
        section.entries.push(Entry { key: key.to_string(), value: value.to_string(), line });
    }
    Ok(sections)
}

/// Typed access to one section; every key must be consumed.
struct Reader<'a> {
    section: Option<&'a Section>,
    known: BTreeSet<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(sections: &'a [Section], name: &str) -> Self {
        Self { section: sections.iter().find(|s| s.name == name), known: BTreeSet::new() }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Entry> {
        self.known.insert(key);
        self.section.and_then(|s| s.entries.iter().find(|e| e.key == key))
    }

    fn quantity(&mut self, key: &'static str, dim: Dim) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => parse_quantity(&e.value, dim)
                .map(Some)
                .map_err(|m| ConfigError::Parse { line: e.line, message: format!("{key}: {m}") }),
        }
    }

    fn set(&mut self, key: &'static str, dim: Dim, target: &mut f64) -> Result<(), ConfigError> {
        if let Some(v) = self.quantity(key, dim)? {
            *target = v;
        }
        Ok(())
    }

    fn count(&mut self, key: &'static str) -> Result<Option<usize>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| ConfigError::Parse { line: e.line, message: format!("{key}: expected a whole number") }),
        }
    }

    fn word(&mut self, key: &'static str, choices: &[&str]) -> Result<Option<String>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) if choices.contains(&e.value.as_str()) => Ok(Some(e.value.clone())),
            Some(e) => Err(ConfigError::Parse {
                line: e.line,
                message: format!("{key}: expected one of {}, got `{}`", choices.join(", "), e.value),
            }),
        }
    }

    fn list(&mut self, key: &'static str, dim: Dim) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|item| {
                    parse_quantity(item, dim).map_err(|m| ConfigError::Parse { line: e.line, message: format!("{key}: {m}") })
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
        }
    }

    fn pairs(&mut self, key: &'static str, a: Dim, b: Dim) -> Result<Option<Vec<(f64, f64)>>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => {
                let err = |m: String| ConfigError::Parse { line: e.line, message: format!("{key}: {m}") };
                e.value
                    .split(',')
                    .map(|item| {
                        let (x, y) = item.split_once(':').ok_or_else(|| err(format!("expected `x:y`, got `{}`", item.trim())))?;
                        Ok((parse_quantity(x, a).map_err(err)?, parse_quantity(y, b).map_err(err)?))
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some)
            }
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        if let Some(s) = self.section {
            if let Some(e) = s.entries.iter().find(|e| !self.known.contains(e.key.as_str())) {
                return Err(ConfigError::Parse { line: e.line, message: format!("unknown key `{}` in [{}]", e.key, s.name) });
            }
        }
        Ok(())
    }
}

/// Parses a scenario document. Keys left out take the values of the
/// reference link.
pub fn load_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let sections = tokenize(text)?;
    let missing: Vec<String> = REQUIRED_SECTIONS
        .iter()
        .filter(|n| !sections.iter().any(|s| s.name == **n))
        .map(|n| n.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::MissingSections(missing));
    }

    let mut invalid: Vec<(String, String)> = Vec::new();

    // circuit
    let reference = LinkCircuit64::reference();
    let mut r = Reader::new(&sections, "circuit");
    let mut v_supply = reference.v_supply;
    let mut bridge_ron = reference.bridge_ron;
    let (mut l1, mut esr1, mut radius1) = (reference.tx.inductance, reference.tx.esr, reference.tx.outer_radius);
    let (mut l2, mut esr2, mut radius2) = (reference.rx.inductance, reference.rx.esr, reference.rx.outer_radius);
    let mut f0 = 127e3;
    let (mut diode_vf, mut diode_ron, mut c_rect) = (reference.diode_vf, reference.diode_ron, reference.c_rect);
    let LclFilter { mut l_in, mut c_mid, mut l_out } = reference.lcl;
    r.set("v_supply", Dim::Voltage, &mut v_supply)?;
    r.set("bridge_ron", Dim::Resistance, &mut bridge_ron)?;
    r.set("l1", Dim::Inductance, &mut l1)?;
    r.set("esr1", Dim::Resistance, &mut esr1)?;
    r.set("radius1", Dim::Length, &mut radius1)?;
    let filaments1 = r.count("filaments1")?.unwrap_or(reference.tx.filaments.len());
    r.set("l2", Dim::Inductance, &mut l2)?;
    r.set("esr2", Dim::Resistance, &mut esr2)?;
    r.set("radius2", Dim::Length, &mut radius2)?;
    let filaments2 = r.count("filaments2")?.unwrap_or(reference.rx.filaments.len());
    r.set("f0", Dim::Frequency, &mut f0)?;
    let c1 = r.quantity("c1", Dim::Capacitance)?;
    let c2 = r.quantity("c2", Dim::Capacitance)?;
    r.set("diode_vf", Dim::Voltage, &mut diode_vf)?;
    r.set("diode_ron", Dim::Resistance, &mut diode_ron)?;
    r.set("c_rect", Dim::Capacitance, &mut c_rect)?;
    r.set("l_in", Dim::Inductance, &mut l_in)?;
    r.set("c_mid", Dim::Capacitance, &mut c_mid)?;
    r.set("l_out", Dim::Inductance, &mut l_out)?;
    let rectifier = match r.word("rectifier", &["bridge", "bypassed"])?.as_deref() {
        Some("bypassed") => Rectifier::Bypassed,
        _ => Rectifier::Bridge,
    };
    let load_kind = r.word("load", &["resistor", "motor", "constant_current"])?.unwrap_or_else(|| "resistor".into());
    let r_load = r.quantity("r_load", Dim::Resistance)?;
    let motor_k = r.quantity("motor_k", Dim::Dimensionless)?;
    let motor_r = r.quantity("motor_r", Dim::Resistance)?;
    let motor_j = r.quantity("motor_j", Dim::Dimensionless)?;
    let motor_b = r.quantity("motor_b", Dim::Dimensionless)?;
    let i_load = r.quantity("i_load", Dim::Current)?;
    r.finish()?;

    for (key, v) in [
        ("v_supply", v_supply),
        ("l1", l1),
        ("radius1", radius1),
        ("l2", l2),
        ("radius2", radius2),
        ("f0", f0),
        ("c_rect", c_rect),
        ("l_in", l_in),
        ("c_mid", c_mid),
        ("l_out", l_out),
    ] {
        positive(&mut invalid, key, v);
    }
    for (key, v) in [("c1", c1), ("c2", c2)] {
        if let Some(v) = v {
            positive(&mut invalid, key, v);
        }
    }
    for (key, v) in [("bridge_ron", bridge_ron), ("esr1", esr1), ("esr2", esr2), ("diode_vf", diode_vf), ("diode_ron", diode_ron)] {
        if !(v >= 0.0) {
            invalid.push((key.to_string(), format!("must be >= 0, got {v}")));
        }
    }
    if filaments1 == 0 {
        invalid.push(("filaments1".into(), "must be >= 1".into()));
    }
    if filaments2 == 0 {
        invalid.push(("filaments2".into(), "must be >= 1".into()));
    }
    let load = match load_kind.as_str() {
        "motor" => LoadModel::DcMotor {
            back_emf_const: motor_k.unwrap_or(0.01),
            armature_r: motor_r.unwrap_or(100.0),
            inertia: motor_j.unwrap_or(1e-7),
            friction: motor_b.unwrap_or(1e-6),
        },
        "constant_current" => LoadModel::ConstantCurrent { i: i_load.unwrap_or(0.02) },
        _ => LoadModel::Resistor { r: r_load.unwrap_or(133.0) },
    };

    // controller
    let mut controller = ControllerConfig64::default();
    let mut r = Reader::new(&sections, "controller");
    r.set("f_search", Dim::Frequency, &mut controller.f_search)?;
    r.set("search_duty", Dim::Dimensionless, &mut controller.search_duty)?;
    r.set("detect_threshold", Dim::Current, &mut controller.detect_threshold)?;
    r.set("f_lo", Dim::Frequency, &mut controller.f_lo)?;
    r.set("f_hi", Dim::Frequency, &mut controller.f_hi)?;
    r.set("p_max", Dim::Power, &mut controller.p_max)?;
    r.set("temp_max", Dim::Temperature, &mut controller.temp_max)?;
    r.set("r_th", Dim::ThermalResistance, &mut controller.thermal.r_th)?;
    r.set("c_th", Dim::HeatCapacity, &mut controller.thermal.c_th)?;
    r.set("t_ambient", Dim::Temperature, &mut controller.thermal.t_ambient)?;
    if let Some(n) = r.count("search_window_cycles")? {
        controller.search_window_cycles = n.min(u32::MAX as usize) as u32;
    }
    let reference_detection = r.word("detection", &["reference", "absolute"])?.as_deref() != Some("absolute");
    r.finish()?;
    if let Err(e) = controller.validate() {
        invalid.extend(violations(&e));
    }

    // coupling
    let mut r = Reader::new(&sections, "coupling");
    let model_kind = r.word("model", &["analytic", "tabulated"])?.unwrap_or_else(|| "analytic".into());
    let points = r.pairs("points", Dim::Length, Dim::Dimensionless)?;
    let mut k_scale = 1.0;
    r.set("k_scale", Dim::Dimensionless, &mut k_scale)?;
    let d_min = r.quantity("d_min", Dim::Length)?;
    let d_max = r.quantity("d_max", Dim::Length)?;
    r.finish()?;
    positive(&mut invalid, "k_scale", k_scale);
    let model = if model_kind == "tabulated" {
        match points.map(CouplingModel64::tabulated) {
            Some(Ok(m)) => m,
            Some(Err(e)) => {
                invalid.push(("points".into(), e.to_string()));
                CouplingModel64::AnalyticFilament
            }
            None => {
                invalid.push(("points".into(), "required when model = tabulated".into()));
                CouplingModel64::AnalyticFilament
            }
        }
    } else {
        CouplingModel64::AnalyticFilament
    };
    let range = match (d_min, d_max) {
        (None, None) => None,
        (lo, hi) => Some((lo.unwrap_or(0.0), hi.unwrap_or(f64::INFINITY))),
    };
    let coupling = CouplingSpec { model, k_scale, range };

    // sweep
    let mut r = Reader::new(&sections, "sweep");
    let distances = r.list("distances", Dim::Length)?.unwrap_or_default();
    let load_list = r.list("loads", Dim::Resistance)?;
    let measured_loads = r.word("load_source", &["fixed", "listed", "measured"])?;
    r.finish()?;
    if distances.is_empty() {
        invalid.push(("distances".into(), "at least one distance is required".into()));
    }
    if distances.windows(2).any(|w| !(w[1] > w[0])) {
        invalid.push(("distances".into(), "must be strictly increasing".into()));
    }
    if distances.iter().any(|&d| !(d > 0.0)) {
        invalid.push(("distances".into(), "must all be > 0".into()));
    }
    let loads = match (measured_loads.as_deref(), load_list) {
        (Some("measured"), _) => LoadSchedule::Measured,
        (Some("fixed"), _) | (None, None) => LoadSchedule::Fixed,
        (_, Some(list)) => {
            if list.len() != distances.len() {
                invalid.push(("loads".into(), format!("{} values for {} distances", list.len(), distances.len())));
            }
            LoadSchedule::PerDistance(list)
        }
        (Some(_), None) => {
            invalid.push(("loads".into(), "required when load_source = listed".into()));
            LoadSchedule::Fixed
        }
    };

    // sim
    let mut sim = SimSettings::default();
    let mut r = Reader::new(&sections, "sim");
    r.set("duration", Dim::Time, &mut sim.duration)?;
    r.set("dt", Dim::Time, &mut sim.dt)?;
    r.set("dt_out", Dim::Time, &mut sim.dt_out)?;
    r.set("steady_tol", Dim::Dimensionless, &mut sim.steady_tol)?;
    r.set("window", Dim::Time, &mut sim.window)?;
    r.set("search_timeout", Dim::Time, &mut sim.search_timeout)?;
    r.finish()?;
    for (key, v) in [
        ("duration", sim.duration),
        ("dt", sim.dt),
        ("dt_out", sim.dt_out),
        ("steady_tol", sim.steady_tol),
        ("window", sim.window),
        ("search_timeout", sim.search_timeout),
    ] {
        positive(&mut invalid, key, v);
    }

    // requirement
    let mut requirement = Requirement::default();
    let mut r = Reader::new(&sections, "requirement");
    r.set("i_min", Dim::Current, &mut requirement.i_min)?;
    r.set("v_min", Dim::Voltage, &mut requirement.v_min)?;
    r.finish()?;

    // dosimetry
    let mut dosimetry = DosimetrySettings::default();
    let mut r = Reader::new(&sections, "dosimetry");
    r.set("gap", Dim::Length, &mut dosimetry.gap)?;
    r.set("current", Dim::Current, &mut dosimetry.i_ref)?;
    r.set("operating_current", Dim::Current, &mut dosimetry.i_operating)?;
    r.set("frequency", Dim::Frequency, &mut dosimetry.frequency)?;
    r.set("spacing", Dim::Length, &mut dosimetry.spacing)?;
    r.set("radius", Dim::Length, &mut dosimetry.phantom.radius)?;
    r.set("length", Dim::Length, &mut dosimetry.phantom.length)?;
    r.set("sigma", Dim::Conductivity, &mut dosimetry.phantom.sigma)?;
    r.set("eps_r", Dim::Dimensionless, &mut dosimetry.phantom.eps_r)?;
    r.set("rho", Dim::Density, &mut dosimetry.phantom.rho)?;
    r.set("sar_limit", Dim::SpecificPower, &mut dosimetry.limits.sar_10g_limit)?;
    r.set("e_limit", Dim::ElectricField, &mut dosimetry.limits.e_limit_rms)?;
    r.set("j_limit", Dim::CurrentDensity, &mut dosimetry.limits.j_limit_rms)?;
    dosimetry.complex_admittivity = r.word("admittivity", &["conduction", "complex"])?.as_deref() == Some("complex");
    r.finish()?;
    if let Err(e) = dosimetry.phantom.validate() {
        invalid.extend(violations(&e));
    }

    if !invalid.is_empty() {
        return Err(ConfigError::Invalid(invalid));
    }

    let coil = |l, esr, radius, n| CoilSpec64::uniform(l, esr, radius, n);
    let (tx, rx) = match (coil(l1, esr1, radius1, filaments1), coil(l2, esr2, radius2, filaments2)) {
        (Ok(tx), Ok(rx)) => (tx, rx),
        (Err(e), _) => return Err(ConfigError::Invalid(vec![("l1".into(), e.to_string())])),
        (_, Err(e)) => return Err(ConfigError::Invalid(vec![("l2".into(), e.to_string())])),
    };
    let tune = |key: &str, given: Option<f64>, l: f64| match given {
        Some(c) => Ok(c),
        None => resonance_capacitance(l, f0).map_err(|e| ConfigError::Invalid(vec![(key.to_string(), e.to_string())])),
    };
    let circuit = LinkCircuit64 {
        v_supply,
        bridge_ron,
        c1: tune("c1", c1, l1)?,
        tx,
        rx,
        m: 0.0,
        c2: tune("c2", c2, l2)?,
        diode_vf,
        diode_ron,
        c_rect,
        lcl: LclFilter { l_in, c_mid, l_out },
        load,
        rectifier,
    };
    let circuit = wpt_core::circuit::validate_circuit(circuit).map_err(|e| ConfigError::Invalid(violations(&e)))?;

    Ok(Scenario { circuit, controller, coupling, distances, loads, requirement, sim, dosimetry, reference_detection })
}

fn positive(invalid: &mut Vec<(String, String)>, key: &str, v: f64) {
    if !(v > 0.0 && v.is_finite()) {
        invalid.push((key.to_string(), format!("must be > 0, got {v}")));
    }
}

/// Maps field names of core validation errors onto scenario keys.
fn violations(e: &wpt_core::Error) -> Vec<(String, String)> {
    let key = |field: &str| -> String {
        match field {
            "tx.inductance" => "l1",
            "rx.inductance" => "l2",
            "tx.esr" => "esr1",
            "rx.esr" => "esr2",
            "tx.filaments" | "tx.turns_scale" => "filaments1",
            "rx.filaments" | "rx.turns_scale" => "filaments2",
            "lcl.l_in" => "l_in",
            "lcl.c_mid" => "c_mid",
            "lcl.l_out" => "l_out",
            "load.r" => "r_load",
            "load.i" => "i_load",
            "load.back_emf_const" => "motor_k",
            "load.armature_r" => "motor_r",
            "load.inertia" => "motor_j",
            "load.friction" => "motor_b",
            "m" => "k_scale",
            other => other,
        }
        .to_string()
    };
    match e {
        wpt_core::Error::Validation(v) => v.iter().map(|f| (key(f.field), f.reason.clone())).collect(),
        other => vec![("scenario".into(), other.to_string())],
    }
}

/// Resolves `name` to a bundled scenario, if it is one.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "default" => Some(DEFAULT_SCENARIO),
        "table1" => Some(TABLE_I_SCENARIO),
        _ => None,
    }
}
