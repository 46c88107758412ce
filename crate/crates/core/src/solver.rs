//! Successor-selection iteration for set-valued maps.
//!
//! Each theorem variant fixes a one-step inequality that a successor
//! `y ∈ Tx` must satisfy. The solver repeatedly picks such a successor until
//! the functional `f` vanishes (up to `eps_conv`), no successor qualifies, or
//! the iteration budget runs out.
//!
//! Endpoint mode runs startpoint mode on the conjugate space. Fixed-point mode
//! uses `f(x) = Hˢ({x}, Tx)` and requires the inequality on both the `d` side
//! and the `d⁻¹` side.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{
    self, check_range, check_shape_properties, estimate_limsup, estimate_limsup_ratio, Gauge, GaugePair, Grid,
    LimsupSchedule, ShapeOptions, ShapeProp, Slot, Verdict,
};
use crate::hausdorff::{hausdorff_h, PointSet, SetValuedMap};
use crate::space::{classify_cauchy, CauchyVerdict, Point, PrefixOptions, Space};

pub const DEFAULT_EPS_CONV: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Absolute slack accepted on every successor inequality.
pub const DEFAULT_TOL_FEAS: f64 = 1e-9;
/// Agreement required between a recorded and a recomputed `f` value.
pub const RECOMPUTE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariantId {
    #[serde(rename = "GABA_C")]
    GabaC,
    #[serde(rename = "GABA_PHI")]
    GabaPhi,
    #[serde(rename = "GABA_B")]
    GabaB,
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    V7,
    V8,
}

impl VariantId {
    pub const ALL: [VariantId; 11] = [
        VariantId::GabaC,
        VariantId::GabaPhi,
        VariantId::GabaB,
        VariantId::V1,
        VariantId::V2,
        VariantId::V3,
        VariantId::V4,
        VariantId::V5,
        VariantId::V6,
        VariantId::V7,
        VariantId::V8,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            VariantId::GabaC => "GABA_C",
            VariantId::GabaPhi => "GABA_PHI",
            VariantId::GabaB => "GABA_B",
            VariantId::V1 => "V1",
            VariantId::V2 => "V2",
            VariantId::V3 => "V3",
            VariantId::V4 => "V4",
            VariantId::V5 => "V5",
            VariantId::V6 => "V6",
            VariantId::V7 => "V7",
            VariantId::V8 => "V8",
        }
    }

    /// Shape properties the variant's gauges must be declared (and checked) to have.
    pub fn required_props(&self) -> &'static [ShapeProp] {
        use ShapeProp::*;
        match self {
            VariantId::GabaB => &[EtaNondecreasing],
            VariantId::V3 => &[PhiNondecreasing],
            VariantId::V4 => &[EtaNondecreasing],
            VariantId::V5 => &[PhiContinuous, PhiNondecreasing, EtaLeIdentity],
            VariantId::V6 => &[EtaContinuous, EtaNondecreasing, EtaLtIdentity],
            VariantId::V7 => &[PhiNondecreasing, PhiSubadditive],
            VariantId::V8 => &[EtaNondecreasing, EtaSubadditive],
            _ => &[],
        }
    }

    /// Declared codomains required of `(φ, η)`; `None` where the slot is unused.
    fn required_ranges(&self) -> (Option<&'static str>, Option<&'static str>) {
        match self {
            VariantId::GabaC => (None, None),
            VariantId::GabaPhi => (Some("[0,1)"), None),
            VariantId::GabaB | VariantId::V1 => (Some("[0,1)"), Some("[b,1)")),
            VariantId::V2 => (Some("[0,1)"), Some("[b,1]")),
            _ => (Some("[0,inf)"), Some("[0,inf)")),
        }
    }
}

impl fmt::Display for VariantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        VariantId::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s)).ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Start,
    End,
    Fixed,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Start => "start",
            Mode::End => "end",
            Mode::Fixed => "fixed",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "start" => Ok(Mode::Start),
            "end" => Ok(Mode::End),
            "fixed" => Ok(Mode::Fixed),
            _ => Err(s.to_string()),
        }
    }
}

/// The contraction data a variant is parametrized by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Contraction {
    /// Scalar `c ∈ (0, 1)`.
    Constant(f64),
    /// A single gauge `Φ`.
    Single(Gauge),
    /// `(φ, η)`, or `(Φ, b)` for `GABA_B`.
    Pair(GaugePair),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Smallest `f(y)`, then smallest step `H({x},{y})`, then point order.
    #[default]
    MinValue,
    FirstFeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    pub id: VariantId,
    pub mode: Mode,
    pub contraction: Contraction,
    #[serde(default)]
    pub selection: Selection,
}

impl VariantSpec {
    /// Checks that the contraction kind fits the variant and that the declared
    /// gauge properties cover the variant's requirements.
    pub fn new(id: VariantId, mode: Mode, contraction: Contraction) -> Result<Self> {
        let invalid = |what: &str| Error::InvalidVariant { variant: id.name().into(), what: what.into() };
        match (&contraction, id) {
            (Contraction::Constant(_), VariantId::GabaC) => {}
            (_, VariantId::GabaC) => return Err(invalid("a constant c")),
            (Contraction::Single(_), VariantId::GabaPhi) => {}
            (_, VariantId::GabaPhi) => return Err(invalid("a single gauge")),
            (Contraction::Pair(pair), _) => {
                if let Some(p) = id.required_props().iter().find(|p| !pair.props.contains(p)) {
                    return Err(invalid(&format!("declared property {}", prop_name(*p))));
                }
            }
            _ => return Err(invalid("a gauge pair")),
        }
        Ok(VariantSpec { id, mode, contraction, selection: Selection::default() })
    }

    pub fn with_selection(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }

    fn phi(&self) -> Option<&Gauge> {
        match &self.contraction {
            Contraction::Constant(_) => None,
            Contraction::Single(g) => Some(g),
            Contraction::Pair(p) => Some(&p.phi),
        }
    }

    fn eta(&self) -> Option<&Gauge> {
        match &self.contraction {
            Contraction::Pair(p) => Some(&p.eta),
            _ => None,
        }
    }

    fn gauges(&self) -> Vec<&Gauge> {
        self.phi().into_iter().chain(self.eta()).collect()
    }
}

fn prop_name(p: ShapeProp) -> String {
    serde_json::to_value(p).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

/// One inequality `lhs ≤ rhs` evaluated for a candidate successor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality { name: name.to_string(), lhs, rhs }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// A candidate `y ∈ Tx` with its inequality values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub y: Point,
    /// `f(y)` in the mode's functional.
    pub value: f64,
    /// `H({x},{y})` in the mode's working distance.
    pub step: f64,
    pub inequalities: Vec<Inequality>,
    pub slack: f64,
    pub feasible: bool,
}

/// The distances and functionals one mode iterates with.
struct Frame<'a> {
    mode: Mode,
    /// `d` for start/fixed, `d⁻¹` for end.
    work: Cow<'a, Space>,
    /// `dˢ`, fixed mode only.
    sym: Option<Space>,
    map: &'a SetValuedMap,
}

impl<'a> Frame<'a> {
    fn new(space: &'a Space, map: &'a SetValuedMap, mode: Mode) -> Self {
        let work = match mode {
            Mode::End => Cow::Owned(space.conjugate()),
            _ => Cow::Borrowed(space),
        };
        let sym = (mode == Mode::Fixed).then(|| space.symmetrize());
        Frame { mode, work, sym, map }
    }

    fn image(&self, x: &Point) -> Result<PointSet> {
        self.map.image(&self.work, x)
    }

    /// `H({x}, Tx)` over `d`.
    fn forward(&self, x: &Point, img: &PointSet) -> Result<f64> {
        hausdorff_h(&self.work, &PointSet::singleton(*x), img)
    }

    /// `H(Tx, {x})` over `d`.
    fn backward(&self, x: &Point, img: &PointSet) -> Result<f64> {
        hausdorff_h(&self.work, img, &PointSet::singleton(*x))
    }

    /// The functional whose zeros the mode is looking for.
    fn value(&self, x: &Point) -> Result<f64> {
        let img = self.image(x)?;
        match &self.sym {
            Some(sym) => hausdorff_h(sym, &PointSet::singleton(*x), &img),
            None => self.forward(x, &img),
        }
    }

    fn step(&self, x: &Point, y: &Point) -> Result<f64> {
        match &self.sym {
            Some(sym) => sym.distance(x, y),
            None => self.work.distance(x, y),
        }
    }

    fn candidates(&self, x: &Point, variant: &VariantSpec, tol_feas: f64) -> Result<Vec<Candidate>> {
        let img = self.image(x)?;
        if img.is_empty() {
            return Err(Error::EmptyImage(*x));
        }
        let fx = self.forward(x, &img)?;
        let fx_back = if self.mode == Mode::Fixed { self.backward(x, &img)? } else { 0.0 };
        let mut out = Vec::with_capacity(img.len());
        for y in img.iter() {
            let value = self.value(y)?;
            let h = self.work.distance(x, y)?;
            let inequalities = match self.mode {
                Mode::Start | Mode::End => one_sided(variant, fx, value, h)?,
                Mode::Fixed => {
                    let hr = self.work.distance(y, x)?;
                    both_sided(variant, fx, fx_back, value, h, hr)?
                }
            };
            let slack = inequalities.iter().map(Inequality::slack).fold(f64::INFINITY, f64::min);
            out.push(Candidate {
                y: *y,
                value,
                step: self.step(x, y)?,
                inequalities,
                slack,
                feasible: slack >= -tol_feas,
            });
        }
        Ok(out)
    }
}

fn ev(g: Option<&Gauge>, t: f64) -> Result<f64> {
    g.expect("variant validated to carry this gauge").eval(t)
}

/// Successor inequalities on the `d` side, with `fx = f(x)`, `fy = f(y)`, `h = H({x},{y})`.
fn one_sided(v: &VariantSpec, fx: f64, fy: f64, h: f64) -> Result<Vec<Inequality>> {
    let (phi, eta) = (v.phi(), v.eta());
    Ok(match v.id {
        VariantId::GabaC => {
            let Contraction::Constant(c) = v.contraction else { unreachable!() };
            vec![Inequality::new("f(y) <= c*H(x,y)", fy, c * h)]
        }
        VariantId::GabaPhi | VariantId::GabaB | VariantId::V2 => {
            vec![Inequality::new("f(y) <= phi(H(x,y))*H(x,y)", fy, ev(phi, h)? * h)]
        }
        VariantId::V1 => vec![Inequality::new("f(y) <= phi(f(x))*H(x,y)", fy, ev(phi, fx)? * h)],
        VariantId::V3 | VariantId::V4 | VariantId::V5 | VariantId::V6 => vec![
            Inequality::new("eta(H(x,y)) <= f(x)", ev(eta, h)?, fx),
            Inequality::new("f(y) <= phi(f(x))", fy, ev(phi, fx)?),
        ],
        VariantId::V7 | VariantId::V8 => vec![
            Inequality::new("eta(H(x,y)) <= f(x)", ev(eta, h)?, fx),
            Inequality::new("f(y) <= phi(H(x,y))", fy, ev(phi, h)?),
        ],
    })
}

/// Both-sided successor inequalities for fixed-point mode. `fs = H({x},Tx)`,
/// `fe = H(Tx,{x})`, `fy = Hˢ({y},Ty)`, `h = d(x,y)`, `hr = d(y,x)`.
fn both_sided(v: &VariantSpec, fs: f64, fe: f64, fy: f64, h: f64, hr: f64) -> Result<Vec<Inequality>> {
    let (phi, eta) = (v.phi(), v.eta());
    let hs = h.max(hr);
    Ok(match v.id {
        VariantId::GabaC => {
            let Contraction::Constant(c) = v.contraction else { unreachable!() };
            vec![Inequality::new("f(y) <= c*H(x,y)", fy, c * h), Inequality::new("f(y) <= c*H(y,x)", fy, c * hr)]
        }
        VariantId::GabaPhi | VariantId::GabaB | VariantId::V2 => vec![
            Inequality::new("f(y) <= phi(H(x,y))*H(x,y)", fy, ev(phi, h)? * h),
            Inequality::new("f(y) <= phi(H(y,x))*H(y,x)", fy, ev(phi, hr)? * hr),
        ],
        VariantId::V1 => vec![
            Inequality::new("f(y) <= phi(H(x,Tx))*H(x,y)", fy, ev(phi, fs)? * h),
            Inequality::new("f(y) <= phi(H(Tx,x))*H(y,x)", fy, ev(phi, fe)? * hr),
        ],
        VariantId::V3 | VariantId::V4 | VariantId::V6 => vec![
            Inequality::new("eta(Hs(x,y)) <= H(x,Tx)", ev(eta, hs)?, fs),
            Inequality::new("eta(Hs(x,y)) <= H(Tx,x)", ev(eta, hs)?, fe),
            Inequality::new("f(y) <= phi(H(x,Tx))", fy, ev(phi, fs)?),
            Inequality::new("f(y) <= phi(H(Tx,x))", fy, ev(phi, fe)?),
        ],
        VariantId::V5 => {
            let low = ev(eta, h)?.min(ev(eta, hr)?);
            vec![
                Inequality::new("min eta(H) <= H(x,Tx)", low, fs),
                Inequality::new("min eta(H) <= H(Tx,x)", low, fe),
                Inequality::new("f(y) <= phi(H(x,Tx))", fy, ev(phi, fs)?),
                Inequality::new("f(y) <= phi(H(Tx,x))", fy, ev(phi, fe)?),
            ]
        }
        VariantId::V7 | VariantId::V8 => vec![
            Inequality::new("eta(Hs(x,y)) <= H(x,Tx)", ev(eta, hs)?, fs),
            Inequality::new("eta(Hs(x,y)) <= H(Tx,x)", ev(eta, hs)?, fe),
            Inequality::new("f(y) <= phi(H(x,y))", fy, ev(phi, h)?),
            Inequality::new("f(y) <= phi(H(y,x))", fy, ev(phi, hr)?),
        ],
    })
}

/// Every `y ∈ Tx` with its inequality values, feasible or not.
pub fn evaluate_candidates(
    space: &Space,
    map: &SetValuedMap,
    x: &Point,
    variant: &VariantSpec,
    tol_feas: f64,
) -> Result<Vec<Candidate>> {
    Frame::new(space, map, variant.mode).candidates(x, variant, tol_feas)
}

/// The `y ∈ Tx` satisfying the variant's inequalities within `tol_feas`.
pub fn feasible_successors(
    space: &Space,
    map: &SetValuedMap,
    x: &Point,
    variant: &VariantSpec,
    tol_feas: f64,
) -> Result<Vec<Candidate>> {
    let mut c = evaluate_candidates(space, map, x, variant, tol_feas)?;
    c.retain(|c| c.feasible);
    Ok(c)
}

/// Deterministic choice among feasible candidates.
pub fn select_successor(candidates: &[Candidate], selection: Selection) -> Result<&Candidate> {
    let feasible = candidates.iter().filter(|c| c.feasible);
    let chosen = match selection {
        Selection::FirstFeasible => feasible.min_by(|a, b| a.y.cmp(&b.y)),
        Selection::MinValue => {
            feasible.min_by(|a, b| a.value.total_cmp(&b.value).then(a.step.total_cmp(&b.step)).then(a.y.cmp(&b.y)))
        }
    };
    chosen.ok_or(Error::NoFeasibleSuccessor)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub eps_conv: f64,
    pub max_iter: usize,
    pub tol_feas: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { eps_conv: DEFAULT_EPS_CONV, max_iter: DEFAULT_MAX_ITER, tol_feas: DEFAULT_TOL_FEAS }
    }
}

/// One visited point. The last step of a trace has no successor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub n: usize,
    pub x: Point,
    pub f: f64,
    pub d_n: Option<f64>,
    pub y: Option<Point>,
    pub slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Converged { x: Point, f: f64 },
    HypothesisViolation { x: Point, candidates: Vec<Candidate> },
    MaxIterations { x: Point, f: f64 },
}

impl Outcome {
    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Converged { .. } => "converged",
            Outcome::HypothesisViolation { .. } => "hypothesis-violation",
            Outcome::MaxIterations { .. } => "max-iterations",
        }
    }

    pub fn point(&self) -> Point {
        match self {
            Outcome::Converged { x, .. }
            | Outcome::HypothesisViolation { x, .. }
            | Outcome::MaxIterations { x, .. } => *x,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub variant: VariantId,
    pub mode: Mode,
    pub steps: Vec<Step>,
    pub outcome: Outcome,
}

impl IterationTrace {
    /// Number of successor steps taken.
    pub fn iterations(&self) -> usize {
        self.steps.iter().filter(|s| s.y.is_some()).count()
    }

    pub fn points(&self) -> Vec<Point> {
        self.steps.iter().map(|s| s.x).collect()
    }

    /// CSV with header `n,x,f,d_n,y,slack` and an `outcome:<kind>` footer row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record(["n", "x", "f", "d_n", "y", "slack"]).expect("in-memory write");
        for s in &self.steps {
            w.write_record([
                s.n.to_string(),
                s.x.to_string(),
                s.f.to_string(),
                opt(s.d_n.map(|v| v.to_string())),
                opt(s.y.map(|v| v.to_string())),
                opt(s.slack.map(|v| v.to_string())),
            ])
            .expect("in-memory write");
        }
        let (fx, f) = match &self.outcome {
            Outcome::Converged { x, f } | Outcome::MaxIterations { x, f } => (x.to_string(), f.to_string()),
            Outcome::HypothesisViolation { x, .. } => {
                (x.to_string(), self.steps.last().map(|s| s.f.to_string()).unwrap_or_default())
            }
        };
        w.write_record([
            format!("outcome:{}", self.outcome.kind()),
            fx,
            f,
            String::new(),
            String::new(),
            String::new(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

/// A trace read back from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrace {
    pub steps: Vec<Step>,
    pub outcome: String,
    pub x: Point,
    pub f: Option<f64>,
}

/// Parses the CSV written by [`IterationTrace::to_csv`], coercing points into `space`.
pub fn parse_trace_csv(text: &str, space: &Space) -> Result<ParsedTrace> {
    let bad = |m: String| Error::MalformedTrace(m);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["n", "x", "f", "d_n", "y", "slack"] {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}"))) };
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s).map(Some)
        }
    };
    let point = |s: &str| -> Result<Point> { space.coerce(Point::Real(num(s)?)) };
    let mut steps = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if let Some(kind) = rec[0].strip_prefix("outcome:") {
            return Ok(ParsedTrace { steps, outcome: kind.to_string(), x: point(&rec[1])?, f: opt(&rec[2])? });
        }
        steps.push(Step {
            n: rec[0].parse().map_err(|_| bad(format!("bad step index {:?}", &rec[0])))?,
            x: point(&rec[1])?,
            f: num(&rec[2])?,
            d_n: opt(&rec[3])?,
            y: if rec[4].is_empty() { None } else { Some(point(&rec[4])?) },
            slack: opt(&rec[5])?,
        });
    }
    Err(bad("missing outcome footer".into()))
}

/// Runs successor selection from `x0`.
pub fn solve(
    space: &Space,
    map: &SetValuedMap,
    variant: &VariantSpec,
    x0: &Point,
    opts: &SolveOptions,
) -> Result<IterationTrace> {
    let frame = Frame::new(space, map, variant.mode);
    let mut steps = Vec::new();
    let mut x = *x0;
    let outcome = loop {
        let f = frame.value(&x)?;
        let n = steps.len();
        let last = |steps: &mut Vec<Step>| steps.push(Step { n, x, f, d_n: None, y: None, slack: None });
        if f <= opts.eps_conv {
            last(&mut steps);
            break Outcome::Converged { x, f };
        }
        if n >= opts.max_iter {
            last(&mut steps);
            break Outcome::MaxIterations { x, f };
        }
        let candidates = frame.candidates(&x, variant, opts.tol_feas)?;
        let Ok(next) = select_successor(&candidates, variant.selection) else {
            last(&mut steps);
            break Outcome::HypothesisViolation { x, candidates };
        };
        steps.push(Step { n, x, f, d_n: Some(next.step), y: Some(next.y), slack: Some(next.slack) });
        x = next.y;
    };
    Ok(IterationTrace { variant: variant.id, mode: variant.mode, steps, outcome })
}

/// Problems found when replaying a trace against its scenario.
pub fn replay_trace(
    space: &Space,
    map: &SetValuedMap,
    variant: &VariantSpec,
    steps: &[Step],
    tol_feas: f64,
) -> Result<Vec<String>> {
    let frame = Frame::new(space, map, variant.mode);
    let mut problems = Vec::new();
    for (i, s) in steps.iter().enumerate() {
        let f = frame.value(&s.x)?;
        if (f - s.f).abs() > RECOMPUTE_TOL {
            problems.push(format!("step {}: recorded f {} but recomputed {}", s.n, s.f, f));
        }
        let Some(y) = s.y else { continue };
        if !frame.image(&s.x)?.contains(&y) {
            problems.push(format!("step {}: {} is not in T({})", s.n, y, s.x));
            continue;
        }
        if steps.get(i + 1).is_some_and(|next| next.x != y) {
            problems.push(format!("step {}: successor {} is not the next point", s.n, y));
        }
        let c = frame.candidates(&s.x, variant, tol_feas)?;
        if let Some(c) = c.iter().find(|c| c.y == y) {
            if c.slack < -tol_feas {
                problems.push(format!("step {}: slack {} below tolerance", s.n, c.slack));
            }
        }
    }
    Ok(problems)
}

/// Per-step checks available on traces of any length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepChecks {
    /// Smallest `n0` such that `f(x_n)` is non-increasing from `n0` on.
    pub monotone_from: usize,
    /// `d_n ≤ D_n` on every step with a successor.
    pub step_bound: bool,
    /// `d_n < 2·D_n` on every step with a successor.
    pub double_bound: bool,
    pub double_bound_first_violation: Option<usize>,
}

pub fn step_checks(trace: &IterationTrace) -> StepChecks {
    let f: Vec<f64> = trace.steps.iter().map(|s| s.f).collect();
    let mut monotone_from = f.len().saturating_sub(1);
    while monotone_from > 0 && f[monotone_from] <= f[monotone_from - 1] + RECOMPUTE_TOL {
        monotone_from -= 1;
    }
    let mut step_bound = true;
    let mut first = None;
    for s in &trace.steps {
        let Some(d) = s.d_n else { continue };
        step_bound &= d <= s.f + RECOMPUTE_TOL;
        if d >= 2.0 * s.f && first.is_none() {
            first = Some(s.n);
        }
    }
    StepChecks { monotone_from, step_bound, double_bound: first.is_none(), double_bound_first_violation: first }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    pub cauchy: PrefixOptions,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions { cauchy: PrefixOptions::with_tol(1e-4) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub checks: StepChecks,
    /// `f` is non-increasing from the first step.
    pub monotone: bool,
    /// Largest `f(x_{n+1}) / f(x_n)` over the monotone tail, `0/0` skipped.
    pub rate: Option<f64>,
    /// `D_{n+1} ≤ Ψ(d_n)·D_n` with `Ψ = Φ(2−Φ)`, `Φ = φ/η`; reported for `V2` only.
    pub psi_bound: Option<bool>,
    /// Cauchy classification of the visited points in the working distance.
    pub cauchy: CauchyVerdict,
}

/// Decay diagnostics of a trace with at least three steps.
pub fn decay_diagnostics(
    space: &Space,
    variant: &VariantSpec,
    trace: &IterationTrace,
    opts: &DecayOptions,
) -> Result<DecayReport> {
    if trace.steps.len() < 3 {
        return Err(Error::TraceTooShort(trace.steps.len()));
    }
    let checks = step_checks(trace);
    let f: Vec<f64> = trace.steps.iter().map(|s| s.f).collect();
    let rate = (checks.monotone_from..f.len() - 1)
        .filter(|&i| f[i] > 0.0)
        .map(|i| f[i + 1] / f[i])
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));

    let psi_bound = match (&variant.contraction, variant.id) {
        (Contraction::Pair(pair), VariantId::V2) => {
            let mut ok = true;
            for w in trace.steps.windows(2) {
                let Some(d) = w[0].d_n else { continue };
                let psi = gauge::derived_psi(pair.ratio(d)?)?;
                ok &= w[1].f <= psi * w[0].f + RECOMPUTE_TOL;
            }
            Some(ok)
        }
        _ => None,
    };

    let work = match trace.mode {
        Mode::End => space.conjugate(),
        _ => space.clone(),
    };
    let cauchy = classify_cauchy(&work, &trace.points(), opts.cauchy)?;
    Ok(DecayReport { monotone: checks.monotone_from == 0, checks, rate, psi_bound, cauchy })
}

/// A checked side condition on the contraction data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    pub sampled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

impl Condition {
    fn exact(name: &str, pass: bool) -> Self {
        Condition { name: name.to_string(), pass, sampled: false, witness: None }
    }

    fn sampled(name: &str, verdict: Verdict) -> Self {
        let witness = match verdict {
            Verdict::Pass => None,
            Verdict::Fail(w) => Some(w),
        };
        Condition { name: name.to_string(), pass: witness.is_none(), sampled: true, witness }
    }
}

/// Verification settings for the side conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideOptions {
    pub schedule: LimsupSchedule,
    pub shape: ShapeOptions,
    /// Every `probe_stride`-th grid point (plus `t = 0`) is a limsup probe.
    pub probe_stride: usize,
}

impl Default for SideOptions {
    fn default() -> Self {
        SideOptions { schedule: LimsupSchedule::default(), shape: ShapeOptions::default(), probe_stride: 8 }
    }
}

/// Checks the gauge side conditions of a variant on the default grid for `t_max`.
pub fn check_side_conditions(variant: &VariantSpec, t_max: f64, opts: &SideOptions) -> Result<Vec<Condition>> {
    let mut out = Vec::new();
    if let Contraction::Constant(c) = variant.contraction {
        out.push(Condition::exact("c in (0,1)", c > 0.0 && c < 1.0));
        return Ok(out);
    }
    let grid = Grid::log_spaced(t_max.max(f64::MIN_POSITIVE), &variant.gauges())?;
    let probes: Vec<f64> =
        std::iter::once(0.0).chain(grid.points().iter().step_by(opts.probe_stride.max(1)).copied()).collect();

    let (phi_range, eta_range) = variant.id.required_ranges();
    for (slot, required) in [(Slot::Phi, phi_range), (Slot::Eta, eta_range)] {
        let (Some(required), Some(g)) = (required, if slot == Slot::Phi { variant.phi() } else { variant.eta() })
        else {
            continue;
        };
        let label = if slot == Slot::Phi { "phi" } else { "eta" };
        let declared = g.range();
        let floor_ok = declared.floor().is_none_or(|b| b > 0.0 && b < 1.0);
        out.push(Condition::exact(
            &format!("{label} declared range {required}"),
            declared.label() == required && floor_ok,
        ));
        out.push(Condition::sampled(&format!("{label} values in {}", declared.label()), check_range(g, &grid)?));
    }

    match &variant.contraction {
        Contraction::Single(phi) => {
            let worst = probes
                .iter()
                .map(|&t| estimate_limsup(phi, t, &opts.schedule).map(|e| (t, e)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .find(|(_, e)| !e.below(1.0, opts.schedule.margin));
            out.push(Condition::sampled(
                "limsup phi < 1",
                worst.map_or(Verdict::Pass, |(t, _)| Verdict::Fail(vec![t])),
            ));
        }
        Contraction::Pair(pair) => {
            out.push(Condition::sampled("phi < eta", gauge::check_pointwise_dominance(pair, &grid)?));
            let mut fail = None;
            for &t in &probes {
                let ok = if variant.id == VariantId::GabaB {
                    let a = estimate_limsup(&pair.phi, t, &opts.schedule)?;
                    let b = estimate_limsup(&pair.eta, t, &opts.schedule)?;
                    a.below(b.estimate, opts.schedule.margin)
                } else {
                    estimate_limsup_ratio(pair, t, &opts.schedule)?.below(1.0, opts.schedule.margin)
                };
                if !ok {
                    fail = Some(t);
                    break;
                }
            }
            let name = if variant.id == VariantId::GabaB { "limsup phi < limsup b" } else { "limsup phi/eta < 1" };
            out.push(Condition::sampled(name, fail.map_or(Verdict::Pass, |t| Verdict::Fail(vec![t]))));
            for prop in variant.id.required_props() {
                let (slot, shape) = prop.split();
                let (_, verdict) = check_shape_properties(pair.gauge(slot), &[shape], &grid, opts.shape)?
                    .pop()
                    .expect("one shape requested");
                out.push(Condition::sampled(&prop_name(*prop), verdict));
            }
        }
        Contraction::Constant(_) => unreachable!(),
    }
    Ok(out)
}
