//! JSON scenario configs.
//!
//! A config names a scenario (`paper-example`, `random` or `custom`), zero or
//! more variants and the run options. Schema problems are collected with the
//! JSON path they occur at.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::gauge::{Gauge, GaugePair, Range, ShapeProp};
use crate::hausdorff::{MapRule, PointSet, SetValuedMap};
use crate::oracle::{random_setmap, random_space, RandomSpaceParams};
use crate::solver::{
    Contraction, Mode, Selection, VariantId, VariantSpec, DEFAULT_EPS_CONV, DEFAULT_MAX_ITER, DEFAULT_TOL_FEAS,
};
use crate::space::{IntervalRule, Point, Space};

/// Enumeration step used for interval spaces when none is configured.
pub const DEFAULT_GRID_STEP: f64 = 0.5;
pub const DEFAULT_MAX_CARD: usize = 3;
/// Largest random space accepted from a config.
pub const MAX_RANDOM_POINTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaIssue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(String),
    #[error("schema errors: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Schema(Vec<SchemaIssue>),
    #[error("unknown variant {name:?} at {path}")]
    UnknownVariant { path: String, name: String },
    #[error("unknown rule {name:?} at {path}")]
    UnknownRule { path: String, name: String },
}

impl ConfigError {
    /// First schema issue, if this is a schema error.
    pub fn first_issue(&self) -> Option<&SchemaIssue> {
        match self {
            ConfigError::Schema(v) => v.first(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub n: usize,
    pub seed: u64,
    pub max_card: usize,
    pub params: RandomSpaceParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    PaperExample,
    Random(RandomSpec),
    Custom { space: Space, map: SetValuedMap },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub eps: f64,
    pub max_iter: usize,
    pub tol_feas: f64,
    pub grid: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { eps: DEFAULT_EPS_CONV, max_iter: DEFAULT_MAX_ITER, tol_feas: DEFAULT_TOL_FEAS, grid: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub source: Source,
    pub variants: Vec<VariantSpec>,
    pub x0: Option<Point>,
    pub options: RunOptions,
}

/// A scenario's space and map, with the enumeration step for interval spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub space: Space,
    pub map: SetValuedMap,
    pub grid: Option<f64>,
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    /// Builds the space and map, with `seed` overriding a random scenario's seed.
    pub fn instance(&self, seed: Option<u64>) -> crate::Result<Instance> {
        let (space, map, seed) = match &self.source {
            Source::PaperExample => (Space::max_diff(0.0, 10.0)?, SetValuedMap::half_except_six(), None),
            Source::Random(r) => {
                let seed = seed.unwrap_or(r.seed);
                let space = random_space(r.n, seed, &r.params)?;
                let map = random_setmap(&space, seed.wrapping_add(1), r.max_card)?;
                (space, map, Some(seed))
            }
            Source::Custom { space, map } => (space.clone(), map.clone(), None),
        };
        let grid = if space.is_finite() { None } else { Some(self.options.grid.unwrap_or(DEFAULT_GRID_STEP)) };
        Ok(Instance { space, map, grid, seed })
    }

    pub fn scenario_name(&self) -> &'static str {
        match self.source {
            Source::PaperExample => "paper-example",
            Source::Random(_) => "random",
            Source::Custom { .. } => "custom",
        }
    }
}

const TOP_KEYS: &[&str] = &[
    "scenario",
    "space",
    "map",
    "random",
    "variant",
    "mode",
    "phi",
    "eta",
    "b",
    "c",
    "props",
    "selection",
    "variants",
    "x0",
    "eps",
    "max_iter",
    "tol_feas",
    "grid",
];
const VARIANT_KEYS: &[&str] = &["variant", "mode", "phi", "eta", "b", "c", "props", "selection"];

#[derive(Default)]
struct Walker {
    issues: Vec<SchemaIssue>,
}

impl Walker {
    fn issue(&mut self, path: &str, message: impl Into<String>) {
        self.issues.push(SchemaIssue { path: path.to_string(), message: message.into() });
    }

    fn unknown_keys(&mut self, obj: &Map<String, Value>, allowed: &[&str], path: &str) {
        for k in obj.keys().filter(|k| !allowed.contains(&k.as_str())) {
            self.issue(&format!("{path}.{k}"), "unknown field");
        }
    }

    fn number(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Option<f64> {
        match obj.get(key)? {
            Value::Number(n) => n.as_f64(),
            _ => {
                self.issue(&format!("{path}.{key}"), "expected a number");
                None
            }
        }
    }

    fn positive(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Option<f64> {
        let v = self.number(obj, key, path)?;
        if v > 0.0 && v.is_finite() {
            Some(v)
        } else {
            self.issue(&format!("{path}.{key}"), format!("expected a positive number, got {v}"));
            None
        }
    }

    fn count(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Option<u64> {
        match obj.get(key)? {
            Value::Number(n) if n.as_u64().is_some() => n.as_u64(),
            _ => {
                self.issue(&format!("{path}.{key}"), "expected a non-negative integer");
                None
            }
        }
    }

    fn probability(&mut self, obj: &Map<String, Value>, key: &str, path: &str) -> Option<f64> {
        let v = self.number(obj, key, path)?;
        if (0.0..=1.0).contains(&v) {
            Some(v)
        } else {
            self.issue(&format!("{path}.{key}"), format!("expected a probability in [0, 1], got {v}"));
            None
        }
    }
}

fn point_of(v: &Value) -> Option<Point> {
    serde_json::from_value(v.clone()).ok()
}

/// Parses and validates a config.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let Value::Object(obj) = &root else {
        return Err(ConfigError::Schema(vec![SchemaIssue { path: "$".into(), message: "expected an object".into() }]));
    };
    let mut w = Walker::default();
    w.unknown_keys(obj, TOP_KEYS, "$");

    let source = match obj.get("scenario") {
        None => {
            w.issue("$.scenario", "missing required field (paper-example, random or custom)");
            None
        }
        Some(Value::String(s)) => match s.as_str() {
            "paper-example" => {
                for k in ["space", "map", "random"].iter().filter(|k| obj.contains_key(**k)) {
                    w.issue(&format!("$.{k}"), "not allowed with the paper-example scenario");
                }
                Some(Source::PaperExample)
            }
            "random" => parse_random(&mut w, obj).map(Source::Random),
            "custom" => parse_custom(&mut w, obj)?,
            other => {
                w.issue("$.scenario", format!("unknown scenario {other:?}, expected paper-example, random or custom"));
                None
            }
        },
        Some(_) => {
            w.issue("$.scenario", "expected a string");
            None
        }
    };

    let mut variants = Vec::new();
    match (obj.get("variant"), obj.get("variants")) {
        (Some(_), Some(_)) => w.issue("$.variants", "give either variant or variants, not both"),
        (Some(_), None) => variants.extend(parse_variant(&mut w, obj, "$")?),
        (None, Some(Value::Array(list))) => {
            for key in VARIANT_KEYS.iter().filter(|k| obj.contains_key(**k)) {
                w.issue(&format!("$.{key}"), "belongs inside each entry of variants");
            }
            for (i, v) in list.iter().enumerate() {
                let path = format!("$.variants[{i}]");
                match v {
                    Value::Object(o) => {
                        w.unknown_keys(o, VARIANT_KEYS, &path);
                        variants.extend(parse_variant(&mut w, o, &path)?);
                    }
                    _ => w.issue(&path, "expected an object"),
                }
            }
        }
        (None, Some(_)) => w.issue("$.variants", "expected an array"),
        (None, None) => {
            for key in VARIANT_KEYS.iter().filter(|k| obj.contains_key(**k)) {
                w.issue(&format!("$.{key}"), "given without a variant");
            }
        }
    }

    let x0 = obj.get("x0").and_then(|v| {
        let p = point_of(v);
        if p.is_none() {
            w.issue("$.x0", "expected a number");
        }
        p
    });
    let d = RunOptions::default();
    let options = RunOptions {
        eps: w.positive(obj, "eps", "$").unwrap_or(d.eps),
        max_iter: match w.count(obj, "max_iter", "$") {
            Some(0) => {
                w.issue("$.max_iter", "must be at least 1");
                d.max_iter
            }
            Some(n) => n as usize,
            None => d.max_iter,
        },
        tol_feas: match w.number(obj, "tol_feas", "$") {
            Some(t) if t >= 0.0 => t,
            Some(t) => {
                w.issue("$.tol_feas", format!("must be non-negative, got {t}"));
                d.tol_feas
            }
            None => d.tol_feas,
        },
        grid: w.positive(obj, "grid", "$"),
    };

    if let (Some(Source::Custom { space, .. }), Some(x0)) = (&source, x0) {
        if space.coerce(x0).is_err() {
            w.issue("$.x0", format!("{x0} is not a point of the space"));
        }
    }
    if let (Some(Source::PaperExample), Some(x0)) = (&source, x0) {
        if !(0.0..=10.0).contains(&x0.as_f64()) {
            w.issue("$.x0", format!("{x0} is outside [0, 10]"));
        }
    }

    match source {
        Some(source) if w.issues.is_empty() => Ok(ScenarioConfig { source, variants, x0, options }),
        _ => Err(ConfigError::Schema(w.issues)),
    }
}

fn parse_random(w: &mut Walker, obj: &Map<String, Value>) -> Option<RandomSpec> {
    for k in ["space", "map"].iter().filter(|k| obj.contains_key(**k)) {
        w.issue(&format!("$.{k}"), "not allowed with the random scenario");
    }
    let Some(Value::Object(r)) = obj.get("random") else {
        w.issue("$.random", "expected an object with at least n");
        return None;
    };
    w.unknown_keys(r, &["n", "seed", "max_card", "scale", "density", "zero_prob"], "$.random");
    let d = RandomSpaceParams::default();
    let n = match w.count(r, "n", "$.random") {
        Some(n) if (1..=MAX_RANDOM_POINTS as u64).contains(&n) => Some(n as usize),
        Some(n) => {
            w.issue("$.random.n", format!("expected 1..={MAX_RANDOM_POINTS}, got {n}"));
            None
        }
        None => {
            if !r.contains_key("n") {
                w.issue("$.random.n", "missing required field");
            }
            None
        }
    };
    let max_card = match w.count(r, "max_card", "$.random") {
        Some(0) => {
            w.issue("$.random.max_card", "must be at least 1");
            None
        }
        other => other.map(|k| k as usize),
    };
    let spec = RandomSpec {
        n: n?,
        seed: w.count(r, "seed", "$.random").unwrap_or(0),
        max_card: max_card.unwrap_or(DEFAULT_MAX_CARD),
        params: RandomSpaceParams {
            scale: match w.positive(r, "scale", "$.random") {
                Some(s) if s >= 0.25 => s,
                Some(s) => {
                    w.issue("$.random.scale", format!("must be at least 0.25, got {s}"));
                    d.scale
                }
                None => d.scale,
            },
            density: w.probability(r, "density", "$.random").unwrap_or(d.density),
            zero_prob: w.probability(r, "zero_prob", "$.random").unwrap_or(d.zero_prob),
        },
    };
    Some(spec)
}

fn parse_custom(w: &mut Walker, obj: &Map<String, Value>) -> Result<Option<Source>, ConfigError> {
    if obj.contains_key("random") {
        w.issue("$.random", "not allowed with the custom scenario");
    }
    let space = match obj.get("space") {
        Some(Value::Object(s)) => parse_space(w, s)?,
        Some(_) => {
            w.issue("$.space", "expected an object");
            None
        }
        None => {
            w.issue("$.space", "missing required field");
            None
        }
    };
    let map = match obj.get("map") {
        Some(Value::Object(m)) => parse_map(w, m)?,
        Some(_) => {
            w.issue("$.map", "expected an object");
            None
        }
        None => {
            w.issue("$.map", "missing required field");
            None
        }
    };
    let (Some(space), Some(map)) = (space, map) else { return Ok(None) };
    if let Err(e) = map.validate(&space) {
        w.issue("$.map", e.to_string());
        return Ok(None);
    }
    Ok(Some(Source::Custom { space, map }))
}

fn parse_space(w: &mut Walker, s: &Map<String, Value>) -> Result<Option<Space>, ConfigError> {
    match s.get("kind").and_then(Value::as_str) {
        Some("matrix") => {
            w.unknown_keys(s, &["kind", "dist"], "$.space");
            let rows: Option<Vec<Vec<f64>>> = s.get("dist").and_then(|v| serde_json::from_value(v.clone()).ok());
            let Some(rows) = rows else {
                w.issue("$.space.dist", "expected an array of arrays of numbers");
                return Ok(None);
            };
            match Space::matrix(&rows) {
                Ok(space) => Ok(Some(space)),
                Err(e) => {
                    w.issue("$.space.dist", e.to_string());
                    Ok(None)
                }
            }
        }
        Some("interval") => {
            w.unknown_keys(s, &["kind", "lo", "hi", "rule"], "$.space");
            let rule = match s.get("rule") {
                Some(Value::String(name)) => Some(
                    IntervalRule::parse(name)
                        .ok_or_else(|| ConfigError::UnknownRule { path: "$.space.rule".into(), name: name.clone() })?,
                ),
                Some(_) => {
                    w.issue("$.space.rule", "expected a string");
                    None
                }
                None => Some(IntervalRule::MaxDiff),
            };
            let lo = w.number(s, "lo", "$.space");
            let hi = w.number(s, "hi", "$.space");
            if lo.is_none() || hi.is_none() {
                w.issue("$.space", "interval needs numeric lo and hi");
                return Ok(None);
            }
            match Space::interval(lo.unwrap_or_default(), hi.unwrap_or_default(), rule.unwrap_or(IntervalRule::MaxDiff))
            {
                Ok(space) if rule.is_some() => Ok(Some(space)),
                Ok(_) => Ok(None),
                Err(e) => {
                    w.issue("$.space", e.to_string());
                    Ok(None)
                }
            }
        }
        _ => {
            w.issue("$.space.kind", "expected \"matrix\" or \"interval\"");
            Ok(None)
        }
    }
}

fn parse_map(w: &mut Walker, m: &Map<String, Value>) -> Result<Option<SetValuedMap>, ConfigError> {
    match m.get("kind").and_then(Value::as_str) {
        Some("closedform") => {
            w.unknown_keys(m, &["kind", "rule"], "$.map");
            match m.get("rule") {
                Some(Value::String(name)) => MapRule::parse(name)
                    .map(|r| Some(SetValuedMap::closed_form(r)))
                    .ok_or_else(|| ConfigError::UnknownRule { path: "$.map.rule".into(), name: name.clone() }),
                _ => {
                    w.issue("$.map.rule", "expected a rule name");
                    Ok(None)
                }
            }
        }
        Some("table") => {
            w.unknown_keys(m, &["kind", "map"], "$.map");
            let Some(Value::Object(entries)) = m.get("map") else {
                w.issue("$.map.map", "expected an object from point index to image list");
                return Ok(None);
            };
            let mut table = BTreeMap::new();
            for (k, v) in entries {
                let path = format!("$.map.map.{k}");
                let Ok(i) = k.parse::<usize>() else {
                    w.issue(&path, "keys must be point indices");
                    continue;
                };
                match serde_json::from_value::<PointSet>(v.clone()) {
                    Ok(set) => {
                        table.insert(i, set);
                    }
                    Err(e) => w.issue(&path, format!("expected a nonempty list of points: {e}")),
                }
            }
            Ok(Some(SetValuedMap::table(table)))
        }
        _ => {
            w.issue("$.map.kind", "expected \"table\" or \"closedform\"");
            Ok(None)
        }
    }
}

fn default_range(id: VariantId, is_eta: bool, floor: f64) -> Range {
    match (id, is_eta) {
        (VariantId::GabaPhi | VariantId::GabaB | VariantId::V1 | VariantId::V2, false) => Range::Unit,
        (VariantId::GabaB | VariantId::V1, true) => Range::FloorOpen(floor),
        (VariantId::V2, true) => Range::FloorClosed(floor),
        _ => Range::NonNegative,
    }
}

/// A gauge given as a bare number (a constant) or as a gauge object. A missing
/// range defaults to the variant's required codomain, with `b = η(0)`.
fn parse_gauge(w: &mut Walker, v: &Value, path: &str, id: VariantId, is_eta: bool) -> Option<Gauge> {
    if let Some(c) = v.as_f64() {
        return Some(Gauge::constant(c, default_range(id, is_eta, c)));
    }
    let Value::Object(o) = v else {
        w.issue(path, "expected a number or a gauge object");
        return None;
    };
    let mut o = o.clone();
    if !o.contains_key("range") {
        let mut probe = o.clone();
        probe.insert("range".into(), Value::String("[0,inf)".into()));
        let at_zero = serde_json::from_value::<Gauge>(Value::Object(probe)).ok().and_then(|g| g.eval(0.0).ok());
        let range = default_range(id, is_eta, at_zero.unwrap_or(0.0));
        o.insert("range".into(), Value::String(range.label().into()));
        if let Some(b) = range.floor() {
            o.insert("b".into(), b.into());
        }
    }
    match serde_json::from_value::<Gauge>(Value::Object(o)) {
        Ok(g) => Some(g),
        Err(e) => {
            w.issue(path, e.to_string());
            None
        }
    }
}

fn parse_variant(w: &mut Walker, o: &Map<String, Value>, path: &str) -> Result<Option<VariantSpec>, ConfigError> {
    let id = match o.get("variant") {
        Some(Value::String(name)) => name
            .parse::<VariantId>()
            .map_err(|name| ConfigError::UnknownVariant { path: format!("{path}.variant"), name })?,
        _ => {
            w.issue(&format!("{path}.variant"), "expected a variant name");
            return Ok(None);
        }
    };
    let mode = match o.get("mode") {
        None => Mode::Start,
        Some(Value::String(m)) => match m.parse() {
            Ok(m) => m,
            Err(m) => {
                w.issue(&format!("{path}.mode"), format!("unknown mode {m:?}, expected start, end or fixed"));
                return Ok(None);
            }
        },
        Some(_) => {
            w.issue(&format!("{path}.mode"), "expected a string");
            return Ok(None);
        }
    };
    let selection = match o.get("selection").map(|v| serde_json::from_value::<Selection>(v.clone())) {
        None => Selection::default(),
        Some(Ok(s)) => s,
        Some(Err(_)) => {
            w.issue(&format!("{path}.selection"), "expected \"min-value\" or \"first-feasible\"");
            Selection::default()
        }
    };
    let gauge = |w: &mut Walker, key: &str, is_eta: bool| -> Option<Gauge> {
        match o.get(key) {
            Some(v) => parse_gauge(w, v, &format!("{path}.{key}"), id, is_eta),
            None => {
                w.issue(&format!("{path}.{key}"), format!("required by {id}"));
                None
            }
        }
    };
    let contraction = match id {
        VariantId::GabaC => match o.get("c").and_then(Value::as_f64) {
            Some(c) => Some(Contraction::Constant(c)),
            None => {
                w.issue(&format!("{path}.c"), "GABA_C requires a numeric c");
                None
            }
        },
        VariantId::GabaPhi => gauge(w, "phi", false).map(Contraction::Single),
        _ => {
            let eta_key = if id == VariantId::GabaB && o.contains_key("b") { "b" } else { "eta" };
            let phi = gauge(w, "phi", false);
            let eta = gauge(w, eta_key, true);
            let props = match o.get("props") {
                None => Some(id.required_props().iter().copied().collect::<BTreeSet<_>>()),
                Some(v) => match serde_json::from_value::<BTreeSet<ShapeProp>>(v.clone()) {
                    Ok(p) => Some(p),
                    Err(e) => {
                        w.issue(&format!("{path}.props"), e.to_string());
                        None
                    }
                },
            };
            match (phi, eta, props) {
                (Some(phi), Some(eta), Some(props)) => {
                    Some(Contraction::Pair(GaugePair::new(phi, eta).with_props(props)))
                }
                _ => None,
            }
        }
    };
    let Some(contraction) = contraction else { return Ok(None) };
    match VariantSpec::new(id, mode, contraction) {
        Ok(v) => Ok(Some(v.with_selection(selection))),
        Err(e) => {
            w.issue(path, e.to_string());
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_example() {
        let cfg =
            parse_config(r#"{"scenario":"paper-example","variant":"V1","phi":0.5,"eta":0.6666666666666666,"x0":10}"#)
                .unwrap();
        let inst = cfg.instance(None).unwrap();
        assert_eq!(inst.space, Space::max_diff(0.0, 10.0).unwrap());
        assert_eq!(inst.map, SetValuedMap::half_except_six());
        assert_eq!(inst.grid, Some(DEFAULT_GRID_STEP));
        assert_eq!(inst.space.coerce(cfg.x0.unwrap()).unwrap(), Point::Real(10.0));
        let v = &cfg.variants[0];
        assert_eq!((v.id, v.mode), (VariantId::V1, Mode::Start));
        let Contraction::Pair(p) = &v.contraction else { panic!() };
        assert_eq!(p.eta, Gauge::constant(2.0 / 3.0, Range::FloorOpen(2.0 / 3.0)));
        assert_eq!(p.phi.range(), Range::Unit);
    }

    #[test]
    fn empty_object_points_at_scenario() {
        let err = parse_config("{}").unwrap_err();
        assert_eq!(err.first_issue().unwrap().path, "$.scenario");
    }

    #[test]
    fn unknown_names() {
        let err = parse_config(r#"{"scenario":"custom","space":{"kind":"interval","lo":0,"hi":1,"rule":"sqrt"},"map":{"kind":"closedform","rule":"half"}}"#)
            .unwrap_err();
        assert_eq!(err, ConfigError::UnknownRule { path: "$.space.rule".into(), name: "sqrt".into() });
        let err = parse_config(r#"{"scenario":"custom","space":{"kind":"interval","lo":0,"hi":1},"map":{"kind":"closedform","rule":"third"}}"#)
            .unwrap_err();
        assert_eq!(err, ConfigError::UnknownRule { path: "$.map.rule".into(), name: "third".into() });
        let err = parse_config(r#"{"scenario":"paper-example","variant":"V9"}"#).unwrap_err();
        assert_eq!(err, ConfigError::UnknownVariant { path: "$.variant".into(), name: "V9".into() });
        assert!(matches!(parse_config("{"), Err(ConfigError::Json(_))));
    }

    #[test]
    fn issues_carry_paths() {
        let err = parse_config(
            r#"{"scenario":"random","random":{"n":0},"variants":[{"variant":"GABA_C"},{"variant":"V3","phi":"x","eta":1}],"eps":-1,"extra":1}"#,
        )
        .unwrap_err();
        let ConfigError::Schema(issues) = err else { panic!() };
        let paths: Vec<_> = issues.iter().map(|i| i.path.as_str()).collect();
        for p in ["$.extra", "$.random.n", "$.variants[0].c", "$.variants[1].phi", "$.eps"] {
            assert!(paths.contains(&p), "{p} missing from {paths:?}");
        }
    }

    #[test]
    fn custom_table_and_variants() {
        let cfg = parse_config(
            r#"{
                "scenario": "custom",
                "space": {"kind": "matrix", "dist": [[0, 1], [2, 0]]},
                "map": {"kind": "table", "map": {"0": [1], "1": [1]}},
                "variants": [
                    {"variant": "GABA_C", "c": 0.5},
                    {"variant": "V7", "mode": "end", "phi": {"kind": "affine", "slope": 0.5, "intercept": 0}, "eta": {"kind": "affine", "slope": 0.75, "intercept": 0}},
                    {"variant": "GABA_B", "phi": 0.5, "b": 0.75, "selection": "first-feasible"}
                ],
                "x0": 0, "max_iter": 50, "grid": 0.25
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.variants.len(), 3);
        assert_eq!(cfg.variants[1].mode, Mode::End);
        let Contraction::Pair(p) = &cfg.variants[1].contraction else { panic!() };
        assert!(p.props.contains(&ShapeProp::PhiSubadditive));
        assert_eq!(cfg.variants[2].selection, Selection::FirstFeasible);
        assert_eq!(cfg.options.max_iter, 50);
        assert_eq!(cfg.instance(None).unwrap().grid, None);
        let bad = parse_config(
            r#"{"scenario":"custom","space":{"kind":"matrix","dist":[[0,1],[2,0]]},"map":{"kind":"table","map":{"0":[5]}}}"#,
        )
        .unwrap_err();
        assert_eq!(bad.first_issue().unwrap().path, "$.map");
    }

    #[test]
    fn random_seed_override() {
        let cfg = parse_config(r#"{"scenario":"random","random":{"n":5,"seed":3}}"#).unwrap();
        let a = cfg.instance(None).unwrap();
        assert_eq!(a.seed, Some(3));
        assert_eq!(a, cfg.instance(Some(3)).unwrap());
        assert_ne!(a.space, cfg.instance(Some(4)).unwrap().space);
    }

    #[test]
    fn missing_declared_props_rejected() {
        let err = parse_config(r#"{"scenario":"paper-example","variant":"V3","phi":{"kind":"affine","slope":0.5,"intercept":0},"eta":1,"props":[]}"#)
            .unwrap_err();
        assert_eq!(err.first_issue().unwrap().path, "$");
    }
}
