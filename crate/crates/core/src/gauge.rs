//! Gauge functions and sampled checks of their side conditions.
//!
//! Every check here runs on a finite grid of arguments, so a pass means
//! "no violation among the samples" and is labelled as sampled in reports.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on non-strict comparisons between gauge values.
pub const SHAPE_TOL: f64 = 1e-12;

/// Margin by which a strict comparison `a < b` is checked as `a + margin ≤ b`.
pub const STRICT_MARGIN: f64 = 1e-12;

/// Number of log-spaced points in the default verification grid.
pub const GRID_POINTS: usize = 512;

/// Smallest grid point relative to `t_max`.
pub const GRID_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GaugeKind {
    Constant {
        c: f64,
    },
    /// `slope · t + intercept`.
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// `t / (1 + t)`.
    Ratio,
    /// Piecewise linear through `(t, value)` knots, clamped outside them.
    Table {
        knots: Vec<[f64; 2]>,
    },
}

/// Declared codomain of a gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Range {
    /// `[0, 1)`
    Unit,
    /// `[b, 1)`
    FloorOpen(f64),
    /// `[b, 1]`
    FloorClosed(f64),
    /// `[0, ∞)`
    NonNegative,
}

impl Range {
    pub fn contains(&self, v: f64) -> bool {
        match *self {
            Range::Unit => (0.0..1.0).contains(&v),
            Range::FloorOpen(b) => v >= b && v < 1.0,
            Range::FloorClosed(b) => v >= b && v <= 1.0,
            Range::NonNegative => v >= 0.0 && v.is_finite(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Range::Unit => "[0,1)",
            Range::FloorOpen(_) => "[b,1)",
            Range::FloorClosed(_) => "[b,1]",
            Range::NonNegative => "[0,inf)",
        }
    }

    pub fn floor(&self) -> Option<f64> {
        match *self {
            Range::FloorOpen(b) | Range::FloorClosed(b) => Some(b),
            _ => None,
        }
    }

    pub fn parse(label: &str, b: Option<f64>) -> Option<Range> {
        match (label, b) {
            ("[0,1)", _) => Some(Range::Unit),
            ("[0,inf)", _) => Some(Range::NonNegative),
            ("[b,1)", Some(b)) => Some(Range::FloorOpen(b)),
            ("[b,1]", Some(b)) => Some(Range::FloorClosed(b)),
            _ => None,
        }
    }

    /// Same codomain shape, ignoring the value of `b`.
    pub fn same_shape(&self, other: &Range) -> bool {
        self.label() == other.label()
    }
}

/// A gauge function `[0, ∞) → ℝ` with its declared range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaugeSpec", into = "GaugeSpec")]
pub struct Gauge {
    kind: GaugeKind,
    range: Range,
}

#[derive(Serialize, Deserialize)]
struct GaugeSpec {
    #[serde(flatten)]
    kind: GaugeKind,
    range: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
}

impl TryFrom<GaugeSpec> for Gauge {
    type Error = String;

    fn try_from(spec: GaugeSpec) -> std::result::Result<Self, String> {
        let range = Range::parse(&spec.range, spec.b)
            .ok_or_else(|| format!("unknown range {:?} (b = {:?})", spec.range, spec.b))?;
        Gauge::new(spec.kind, range).map_err(|e| e.to_string())
    }
}

impl From<Gauge> for GaugeSpec {
    fn from(g: Gauge) -> Self {
        GaugeSpec { kind: g.kind, range: g.range.label().to_string(), b: g.range.floor() }
    }
}

impl Gauge {
    pub fn new(kind: GaugeKind, range: Range) -> Result<Self> {
        if let GaugeKind::Table { knots } = &kind {
            let finite = knots.iter().all(|k| k[0].is_finite() && k[1].is_finite() && k[0] >= 0.0);
            let increasing = knots.windows(2).all(|w| w[0][0] < w[1][0]);
            if knots.is_empty() || !finite || !increasing {
                return Err(Error::InvalidKnots);
            }
        }
        Ok(Gauge { kind, range })
    }

    pub fn constant(c: f64, range: Range) -> Self {
        Gauge { kind: GaugeKind::Constant { c }, range }
    }

    pub fn affine(slope: f64, intercept: f64, range: Range) -> Self {
        Gauge { kind: GaugeKind::Affine { slope, intercept }, range }
    }

    /// `slope · t` on `[0, ∞)`.
    pub fn linear(slope: f64) -> Self {
        Gauge::affine(slope, 0.0, Range::NonNegative)
    }

    pub fn ratio(range: Range) -> Self {
        Gauge { kind: GaugeKind::Ratio, range }
    }

    pub fn table(knots: Vec<[f64; 2]>, range: Range) -> Result<Self> {
        Gauge::new(GaugeKind::Table { knots }, range)
    }

    pub fn kind(&self) -> &GaugeKind {
        &self.kind
    }

    pub fn range(&self) -> Range {
        self.range
    }

    /// Table knots strictly inside `(0, ∞)`; empty for other kinds.
    pub fn knots(&self) -> Vec<f64> {
        match &self.kind {
            GaugeKind::Table { knots } => knots.iter().map(|k| k[0]).filter(|&t| t > 0.0).collect(),
            _ => Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::NegativeArgument(t));
        }
        Ok(match &self.kind {
            GaugeKind::Constant { c } => *c,
            GaugeKind::Affine { slope, intercept } => slope * t + intercept,
            GaugeKind::Ratio => t / (1.0 + t),
            GaugeKind::Table { knots } => interpolate(knots, t),
        })
    }
}

fn interpolate(knots: &[[f64; 2]], t: f64) -> f64 {
    let first = knots[0];
    let last = knots[knots.len() - 1];
    if t <= first[0] {
        return first[1];
    }
    if t >= last[0] {
        return last[1];
    }
    let i = knots.partition_point(|k| k[0] <= t);
    let [t0, v0] = knots[i - 1];
    let [t1, v1] = knots[i];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Shape properties a theorem may require of `φ` or `η`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeProp {
    PhiNondecreasing,
    EtaNondecreasing,
    PhiSubadditive,
    EtaSubadditive,
    PhiContinuous,
    EtaContinuous,
    EtaLeIdentity,
    EtaLtIdentity,
}

/// Which gauge of a pair a property refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Phi,
    Eta,
}

/// Single-gauge shape checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Nondecreasing,
    Subadditive,
    Continuous,
    LeIdentity,
    LtIdentity,
}

impl ShapeProp {
    pub fn split(self) -> (Slot, Shape) {
        match self {
            ShapeProp::PhiNondecreasing => (Slot::Phi, Shape::Nondecreasing),
            ShapeProp::EtaNondecreasing => (Slot::Eta, Shape::Nondecreasing),
            ShapeProp::PhiSubadditive => (Slot::Phi, Shape::Subadditive),
            ShapeProp::EtaSubadditive => (Slot::Eta, Shape::Subadditive),
            ShapeProp::PhiContinuous => (Slot::Phi, Shape::Continuous),
            ShapeProp::EtaContinuous => (Slot::Eta, Shape::Continuous),
            ShapeProp::EtaLeIdentity => (Slot::Eta, Shape::LeIdentity),
            ShapeProp::EtaLtIdentity => (Slot::Eta, Shape::LtIdentity),
        }
    }
}

/// The `(φ, η)` pair with the properties it is declared to have.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaugePair {
    pub phi: Gauge,
    pub eta: Gauge,
    #[serde(default)]
    pub props: BTreeSet<ShapeProp>,
}

impl GaugePair {
    pub fn new(phi: Gauge, eta: Gauge) -> Self {
        GaugePair { phi, eta, props: BTreeSet::new() }
    }

    pub fn with_props(mut self, props: impl IntoIterator<Item = ShapeProp>) -> Self {
        self.props.extend(props);
        self
    }

    pub fn gauge(&self, slot: Slot) -> &Gauge {
        match slot {
            Slot::Phi => &self.phi,
            Slot::Eta => &self.eta,
        }
    }

    /// `φ(t) / η(t)`, with `0/0 = 0` and `x/0 = ∞` for `x > 0`.
    pub fn ratio(&self, t: f64) -> Result<f64> {
        Ok(safe_ratio(self.phi.eval(t)?, self.eta.eval(t)?))
    }
}

pub(crate) fn safe_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// Result of a sampled check: pass, or the first violating arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail(Vec<f64>),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Sorted, deduplicated sample of arguments in `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(mut points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidGrid("grid must be nonempty, finite and non-negative".into()));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Grid { points })
    }

    /// `GRID_POINTS` log-spaced points on `[t_max·1e-6, t_max]` plus the
    /// positive table knots of the given gauges.
    pub fn log_spaced(t_max: f64, gauges: &[&Gauge]) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidGrid(format!("t_max must be positive, got {t_max}")));
        }
        let lo = (t_max * GRID_FLOOR).ln();
        let hi = t_max.ln();
        let step = (hi - lo) / (GRID_POINTS - 1) as f64;
        let mut points: Vec<f64> = (0..GRID_POINTS).map(|i| (lo + step * i as f64).exp()).collect();
        points[GRID_POINTS - 1] = t_max;
        points.extend(gauges.iter().flat_map(|g| g.knots()));
        Grid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }
}

/// `φ(t) < η(t)` at every grid point (strict, with [`STRICT_MARGIN`]).
pub fn check_pointwise_dominance(pair: &GaugePair, grid: &Grid) -> Result<Verdict> {
    check_dominance(&pair.phi, &pair.eta, grid)
}

/// `lower(t) < upper(t)` at every grid point.
pub fn check_dominance(lower: &Gauge, upper: &Gauge, grid: &Grid) -> Result<Verdict> {
    for &t in grid.points() {
        if lower.eval(t)? + STRICT_MARGIN > upper.eval(t)? {
            return Ok(Verdict::Fail(vec![t]));
        }
    }
    Ok(Verdict::Pass)
}

/// Every grid value, and the value at 0, lies in the gauge's declared range.
pub fn check_range(g: &Gauge, grid: &Grid) -> Result<Verdict> {
    for t in std::iter::once(0.0).chain(grid.points().iter().copied()) {
        if !g.range().contains(g.eval(t)?) {
            return Ok(Verdict::Fail(vec![t]));
        }
    }
    Ok(Verdict::Pass)
}

/// Shrinking right-window schedule for sampled limsup estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimsupSchedule {
    pub deltas: Vec<f64>,
    pub samples: usize,
    pub margin: f64,
}

impl Default for LimsupSchedule {
    fn default() -> Self {
        LimsupSchedule { deltas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6], samples: 64, margin: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimsupEstimate {
    pub t: f64,
    /// Maximum over the finest window.
    pub estimate: f64,
    /// `(δ, max over (t, t+δ])` per window, coarse to fine.
    pub windows: Vec<(f64, f64)>,
    pub sampled: bool,
}

fn sampled_limsup(t: f64, schedule: &LimsupSchedule, mut f: impl FnMut(f64) -> Result<f64>) -> Result<LimsupEstimate> {
    let mut windows = Vec::with_capacity(schedule.deltas.len());
    for &delta in &schedule.deltas {
        let mut worst = f64::NEG_INFINITY;
        for i in 1..=schedule.samples {
            let r = t + delta * i as f64 / schedule.samples as f64;
            worst = worst.max(f(r)?);
        }
        windows.push((delta, worst));
    }
    let estimate = windows.last().map_or(f64::NAN, |w| w.1);
    Ok(LimsupEstimate { t, estimate, windows, sampled: true })
}

/// Estimate of `limsup_{r→t⁺} φ(r)/η(r)`.
pub fn estimate_limsup_ratio(pair: &GaugePair, t: f64, schedule: &LimsupSchedule) -> Result<LimsupEstimate> {
    sampled_limsup(t, schedule, |r| pair.ratio(r))
}

/// Estimate of `limsup_{r→t⁺} g(r)`.
pub fn estimate_limsup(g: &Gauge, t: f64, schedule: &LimsupSchedule) -> Result<LimsupEstimate> {
    sampled_limsup(t, schedule, |r| g.eval(r))
}

impl LimsupEstimate {
    /// `estimate ≤ bound − margin`.
    pub fn below(&self, bound: f64, margin: f64) -> bool {
        self.estimate <= bound - margin
    }
}

/// Options for [`check_shape_properties`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeOptions {
    /// Largest slope between adjacent samples accepted as continuous.
    pub modulus: f64,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        ShapeOptions { modulus: 1e4 }
    }
}

/// Checks each requested shape on the grid, returning one verdict per shape.
pub fn check_shape_properties(
    g: &Gauge,
    shapes: &[Shape],
    grid: &Grid,
    opts: ShapeOptions,
) -> Result<Vec<(Shape, Verdict)>> {
    let ts = grid.points();
    let vals = ts.iter().map(|&t| g.eval(t)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(shapes.len());
    for &shape in shapes {
        let verdict = match shape {
            Shape::Nondecreasing => {
                first_fail((1..ts.len()).filter(|&i| vals[i] + SHAPE_TOL < vals[i - 1]).map(|i| vec![ts[i - 1], ts[i]]))
            }
            Shape::Continuous => first_fail(
                (1..ts.len())
                    .filter(|&i| (vals[i] - vals[i - 1]).abs() > opts.modulus * (ts[i] - ts[i - 1]) + SHAPE_TOL)
                    .map(|i| vec![ts[i - 1], ts[i]]),
            ),
            Shape::LeIdentity => {
                first_fail((0..ts.len()).filter(|&i| vals[i] > ts[i] + SHAPE_TOL).map(|i| vec![ts[i]]))
            }
            Shape::LtIdentity => {
                first_fail((0..ts.len()).filter(|&i| vals[i] + STRICT_MARGIN > ts[i]).map(|i| vec![ts[i]]))
            }
            Shape::Subadditive => subadditivity(g, ts, &vals)?,
        };
        out.push((shape, verdict));
    }
    Ok(out)
}

fn first_fail(mut witnesses: impl Iterator<Item = Vec<f64>>) -> Verdict {
    witnesses.next().map_or(Verdict::Pass, Verdict::Fail)
}

fn subadditivity(g: &Gauge, ts: &[f64], vals: &[f64]) -> Result<Verdict> {
    let top = ts[ts.len() - 1];
    for i in 0..ts.len() {
        for j in i..ts.len() {
            let sum = ts[i] + ts[j];
            if sum > top {
                break;
            }
            if g.eval(sum)? > vals[i] + vals[j] + SHAPE_TOL {
                return Ok(Verdict::Fail(vec![ts[i], ts[j]]));
            }
        }
    }
    Ok(Verdict::Pass)
}

/// `g` composed with itself `n` times, applied to `t`.
pub fn iterate(g: &Gauge, t: f64, n: usize) -> Result<f64> {
    (0..n).try_fold(t, |acc, _| g.eval(acc))
}

/// `Ψ = Φ(2 − Φ)` for a ratio value `Φ ∈ [0, 1)`.
pub fn derived_psi(phi_ratio: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&phi_ratio) {
        return Err(Error::RatioOutOfRange(phi_ratio));
    }
    Ok(phi_ratio * (2.0 - phi_ratio))
}
