//! Quasi-pseudometric spaces.
//!
//! A quasi-pseudometric `d` satisfies `d(x,x) = 0` and the triangle inequality
//! but need not be symmetric. Two concrete representations are provided:
//! finite spaces backed by a distance matrix and real intervals carrying a
//! closed-form rule such as `d(a,b) = max{a - b, 0}`.
//!
//! Every space can be viewed through its conjugate `d⁻¹(x,y) = d(y,x)` and its
//! symmetrization `dˢ(x,y) = max{d(x,y), d(y,x)}`; both views are spaces in
//! their own right. Sequence classifiers work on finite prefixes: a verdict
//! only speaks about the last `tail_fraction` of the prefix at a fixed
//! tolerance, which stands in for the limit definitions.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute slack used when checking the triangle inequality.
pub const AXIOM_TOL: f64 = 1e-9;

/// Default fraction of a sequence prefix treated as its tail.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;

/// Cap on the number of witnesses stored per failed axiom.
const MAX_WITNESSES: usize = 32;

/// An element of a space: an index into a finite space or a real coordinate.
#[derive(Debug, Clone, Copy)]
pub enum Point {
    Index(usize),
    Real(f64),
}

impl Point {
    pub fn as_index(&self) -> Option<usize> {
        match *self {
            Point::Index(i) => Some(i),
            Point::Real(_) => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Point::Index(i) => i as f64,
            Point::Real(r) => r,
        }
    }
}

impl PartialEq for Point {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Point {}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Point::Index(a), Point::Index(b)) => a.cmp(b),
            (Point::Real(a), Point::Real(b)) => a.total_cmp(b),
            (Point::Index(_), Point::Real(_)) => Ordering::Less,
            (Point::Real(_), Point::Index(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "{i}"),
            Point::Real(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            Point::Index(i) => serializer.serialize_u64(i as u64),
            Point::Real(r) => serializer.serialize_f64(r),
        }
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let n = serde_json::Number::deserialize(deserializer)?;
        match n.as_u64() {
            Some(i) => Ok(Point::Index(i as usize)),
            None => n.as_f64().map(Point::Real).ok_or_else(|| serde::de::Error::custom("point must be a number")),
        }
    }
}

/// Closed-form distance rules for interval spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalRule {
    /// `d(a,b) = max{a - b, 0}`.
    MaxDiff,
}

impl IntervalRule {
    pub fn name(&self) -> &'static str {
        match self {
            IntervalRule::MaxDiff => "maxdiff",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "maxdiff" => Some(IntervalRule::MaxDiff),
            _ => None,
        }
    }

    fn eval(&self, a: f64, b: f64) -> f64 {
        match self {
            IntervalRule::MaxDiff => (a - b).max(0.0),
        }
    }
}

/// Which of `d`, `d⁻¹` or `dˢ` a closed-form interval space evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    #[default]
    Forward,
    Conjugate,
    Symmetric,
}

impl View {
    fn is_forward(&self) -> bool {
        *self == View::Forward
    }

    /// Composition with conjugation.
    fn conjugated(self) -> View {
        match self {
            View::Forward => View::Conjugate,
            View::Conjugate => View::Forward,
            View::Symmetric => View::Symmetric,
        }
    }
}

/// Finite space with an explicit `n × n` distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSpace {
    n: usize,
    dist: Vec<f64>,
}

impl MatrixSpace {
    /// Validates shape, finiteness, non-negativity and the zero diagonal.
    /// The triangle inequality is checked by [`verify_axioms`], not here.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare { row: i, len: row.len(), expected: n });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteEntry { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j, value: v });
                }
                if i == j && v != 0.0 {
                    return Err(Error::NonzeroDiagonal { index: i, value: v });
                }
                dist.push(v);
            }
        }
        Ok(MatrixSpace { n, dist })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n.max(1)).take(self.n).map(<[f64]>::to_vec).collect()
    }

    /// True when no two distinct points are at zero distance in both directions.
    pub fn is_t0(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) > 0.0 || self.get(j, i) > 0.0))
    }

    fn transposed(&self) -> Self {
        let n = self.n;
        let dist = (0..n * n).map(|k| self.get(k % n, k / n)).collect();
        MatrixSpace { n, dist }
    }

    fn symmetrized(&self) -> Self {
        let n = self.n;
        let dist = (0..n * n).map(|k| self.get(k / n, k % n).max(self.get(k % n, k / n))).collect();
        MatrixSpace { n, dist }
    }
}

/// Real interval `[lo, hi]` with a closed-form rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpace {
    pub lo: f64,
    pub hi: f64,
    pub rule: IntervalRule,
    pub view: View,
}

impl IntervalSpace {
    #[inline]
    fn eval(&self, a: f64, b: f64) -> f64 {
        match self.view {
            View::Forward => self.rule.eval(a, b),
            View::Conjugate => self.rule.eval(b, a),
            View::Symmetric => self.rule.eval(a, b).max(self.rule.eval(b, a)),
        }
    }

    /// Grid `lo, lo + step, …` up to and including `hi` when it lands on the grid.
    pub fn grid(&self, step: f64) -> Result<Vec<Point>> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive and finite, got {step}")));
        }
        let count = ((self.hi - self.lo) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| Point::Real((self.lo + i as f64 * step).min(self.hi))).collect())
    }
}

/// A quasi-pseudometric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceSpec", into = "SpaceSpec")]
pub enum Space {
    Matrix(MatrixSpace),
    Interval(IntervalSpace),
}

impl Space {
    pub fn matrix(rows: &[Vec<f64>]) -> Result<Space> {
        MatrixSpace::new(rows).map(Space::Matrix)
    }

    pub fn interval(lo: f64, hi: f64, rule: IntervalRule) -> Result<Space> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidBounds { lo, hi });
        }
        Ok(Space::Interval(IntervalSpace { lo, hi, rule, view: View::Forward }))
    }

    /// `[lo, hi]` with `d(a,b) = max{a - b, 0}`.
    pub fn max_diff(lo: f64, hi: f64) -> Result<Space> {
        Space::interval(lo, hi, IntervalRule::MaxDiff)
    }

    pub fn as_matrix(&self) -> Option<&MatrixSpace> {
        match self {
            Space::Matrix(m) => Some(m),
            Space::Interval(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Space::Matrix(_))
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, *p) {
            (Space::Matrix(m), Point::Index(i)) => i < m.n,
            (Space::Interval(s), Point::Real(r)) => r >= s.lo && r <= s.hi,
            _ => false,
        }
    }

    fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::PointOutOfDomain(*p))
        }
    }

    /// Converts a parsed JSON point to this space's point kind.
    pub fn coerce(&self, p: Point) -> Result<Point> {
        let q = match (self, p) {
            (Space::Interval(_), Point::Index(i)) => Point::Real(i as f64),
            (Space::Matrix(_), Point::Real(r)) if r.fract() == 0.0 && r >= 0.0 => Point::Index(r as usize),
            _ => p,
        };
        self.check(&q)?;
        Ok(q)
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        match (self, *x, *y) {
            (Space::Matrix(m), Point::Index(i), Point::Index(j)) if i < m.n && j < m.n => Ok(m.get(i, j)),
            (Space::Interval(s), Point::Real(a), Point::Real(b)) if self.contains(x) && self.contains(y) => {
                Ok(s.eval(a, b))
            }
            _ => {
                self.check(x)?;
                Err(Error::PointOutOfDomain(*y))
            }
        }
    }

    /// Space with `d⁻¹(x,y) = d(y,x)`.
    pub fn conjugate(&self) -> Space {
        match self {
            Space::Matrix(m) => Space::Matrix(m.transposed()),
            Space::Interval(s) => Space::Interval(IntervalSpace { view: s.view.conjugated(), ..*s }),
        }
    }

    /// Space with `dˢ(x,y) = max{d(x,y), d(y,x)}`.
    pub fn symmetrize(&self) -> Space {
        match self {
            Space::Matrix(m) => Space::Matrix(m.symmetrized()),
            Space::Interval(s) => Space::Interval(IntervalSpace { view: View::Symmetric, ..*s }),
        }
    }

    /// Largest distance between two points of the space.
    pub fn diameter(&self) -> f64 {
        match self {
            Space::Matrix(m) => m.dist.iter().copied().fold(0.0, f64::max),
            Space::Interval(s) => s.eval(s.hi, s.lo).max(s.eval(s.lo, s.hi)),
        }
    }

    /// All points of a finite space, `None` for intervals.
    pub fn points(&self) -> Option<Vec<Point>> {
        match self {
            Space::Matrix(m) => Some((0..m.n).map(Point::Index).collect()),
            Space::Interval(_) => None,
        }
    }

    /// Points to scan: every point of a finite space, or the grid of an interval.
    pub fn enumerate(&self, grid_step: Option<f64>) -> Result<Vec<Point>> {
        match self {
            Space::Matrix(_) => Ok(self.points().unwrap_or_default()),
            Space::Interval(s) => s.grid(grid_step.ok_or(Error::GridRequired)?),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SpaceSpec {
    Matrix {
        dist: Vec<Vec<f64>>,
    },
    Interval {
        lo: f64,
        hi: f64,
        rule: IntervalRule,
        #[serde(default, skip_serializing_if = "View::is_forward")]
        view: View,
    },
}

impl TryFrom<SpaceSpec> for Space {
    type Error = Error;

    fn try_from(spec: SpaceSpec) -> Result<Space> {
        match spec {
            SpaceSpec::Matrix { dist } => Space::matrix(&dist),
            SpaceSpec::Interval { lo, hi, rule, view } => {
                let s = Space::interval(lo, hi, rule)?;
                Ok(match view {
                    View::Forward => s,
                    View::Conjugate => s.conjugate(),
                    View::Symmetric => s.symmetrize(),
                })
            }
        }
    }
}

impl From<Space> for SpaceSpec {
    fn from(space: Space) -> SpaceSpec {
        match space {
            Space::Matrix(m) => SpaceSpec::Matrix { dist: m.rows() },
            Space::Interval(s) => SpaceSpec::Interval { lo: s.lo, hi: s.hi, rule: s.rule, view: s.view },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub x: Point,
    pub y: Point,
    pub value: f64,
}

/// `d(x,z) > d(x,y) + d(y,z) + tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleWitness {
    pub x: Point,
    pub y: Point,
    pub z: Point,
    pub direct: f64,
    pub via: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub coverage: Coverage,
    pub points: usize,
    pub tolerance: f64,
    pub negative: Vec<PairWitness>,
    pub nonzero_self: Vec<PairWitness>,
    pub triangle: Vec<TriangleWitness>,
    pub triangle_violations: usize,
    pub t0_checked: bool,
    pub t0: Vec<PairWitness>,
}

impl AxiomReport {
    pub fn passes(&self) -> bool {
        self.negative.is_empty()
            && self.nonzero_self.is_empty()
            && self.triangle_violations == 0
            && (!self.t0_checked || self.t0.is_empty())
    }
}

/// Checks the quasi-pseudometric axioms (and optionally T0) on every point of a
/// finite space, or on the grid points of an interval space.
pub fn verify_axioms(space: &Space, check_t0: bool, grid_step: Option<f64>) -> Result<AxiomReport> {
    let pts = space.enumerate(grid_step)?;
    let n = pts.len();
    let mut d = vec![0.0; n * n];
    for (i, x) in pts.iter().enumerate() {
        for (j, y) in pts.iter().enumerate() {
            d[i * n + j] = space.distance(x, y)?;
        }
    }
    let mut report = AxiomReport {
        coverage: if space.is_finite() { Coverage::Exhaustive } else { Coverage::Sampled },
        points: n,
        tolerance: AXIOM_TOL,
        negative: Vec::new(),
        nonzero_self: Vec::new(),
        triangle: Vec::new(),
        triangle_violations: 0,
        t0_checked: check_t0,
        t0: Vec::new(),
    };
    for i in 0..n {
        for j in 0..n {
            let v = d[i * n + j];
            if !(v.is_finite() && v >= 0.0) && report.negative.len() < MAX_WITNESSES {
                report.negative.push(PairWitness { x: pts[i], y: pts[j], value: v });
            }
        }
        let v = d[i * n + i];
        if v != 0.0 {
            report.nonzero_self.push(PairWitness { x: pts[i], y: pts[i], value: v });
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let direct = d[x * n + z];
                let via = d[x * n + y] + d[y * n + z];
                if direct > via + AXIOM_TOL {
                    report.triangle_violations += 1;
                    if report.triangle.len() < MAX_WITNESSES {
                        report.triangle.push(TriangleWitness { x: pts[x], y: pts[y], z: pts[z], direct, via });
                    }
                }
            }
        }
    }
    if check_t0 {
        for i in 0..n {
            for j in i + 1..n {
                if d[i * n + j] == 0.0 && d[j * n + i] == 0.0 && report.t0.len() < MAX_WITNESSES {
                    report.t0.push(PairWitness { x: pts[i], y: pts[j], value: 0.0 });
                }
            }
        }
    }
    Ok(report)
}

/// Which distance a ball is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallView {
    D,
    Conjugate,
    Symmetric,
}

/// Open ball `d(center, y) < radius` or closed ball `d(center, y) ≤ radius`.
pub fn ball_membership(
    space: &Space,
    center: &Point,
    radius: f64,
    y: &Point,
    closed: bool,
    view: BallView,
) -> Result<bool> {
    if radius.is_nan() || radius < 0.0 || (!closed && radius == 0.0) {
        return Err(Error::NegativeRadius(radius));
    }
    let forward = space.distance(center, y)?;
    let backward = space.distance(y, center)?;
    let d = match view {
        BallView::D => forward,
        BallView::Conjugate => backward,
        BallView::Symmetric => forward.max(backward),
    };
    Ok(if closed { d <= radius } else { d < radius })
}

/// Tolerance and tail window for the finite-prefix classifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrefixOptions {
    pub tol: f64,
    pub tail_fraction: f64,
}

impl PrefixOptions {
    pub fn with_tol(tol: f64) -> Self {
        PrefixOptions { tol, tail_fraction: DEFAULT_TAIL_FRACTION }
    }

    fn tail<'a>(&self, seq: &'a [Point]) -> Result<&'a [Point]> {
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::EmptyTail);
        }
        let len = ((seq.len() as f64) * self.tail_fraction).ceil() as usize;
        if len == 0 {
            return Err(Error::EmptyTail);
        }
        Ok(&seq[seq.len() - len..])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvergenceFlags {
    /// `d(x, x_n) → 0`.
    pub left: bool,
    /// `d(x_n, x) → 0`.
    pub right: bool,
    pub ds: bool,
    pub tail_len: usize,
}

/// Classifies `d`-, `d⁻¹`- and `dˢ`-convergence of a prefix to `x` by the worst
/// one-sided distance over the tail.
pub fn classify_convergence(space: &Space, seq: &[Point], x: &Point, opts: PrefixOptions) -> Result<ConvergenceFlags> {
    let tail = opts.tail(seq)?;
    let mut left = 0.0f64;
    let mut right = 0.0f64;
    for p in tail {
        left = left.max(space.distance(x, p)?);
        right = right.max(space.distance(p, x)?);
    }
    let left = left <= opts.tol;
    let right = right <= opts.tol;
    Ok(ConvergenceFlags { left, right, ds: left && right, tail_len: tail.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CauchyVerdict {
    pub left_d: bool,
    pub left_k: bool,
    pub right_d: bool,
    pub right_k: bool,
    pub ds: bool,
    pub tol: f64,
    pub tail_len: usize,
}

/// Finite-prefix Cauchy classification over the tail window.
///
/// The d-Cauchy flags search for an anchor among the tail points, plus every
/// point of a finite space or the endpoints of an interval.
pub fn classify_cauchy(space: &Space, seq: &[Point], opts: PrefixOptions) -> Result<CauchyVerdict> {
    let tail = opts.tail(seq)?;
    let m = tail.len();
    let mut d = vec![0.0; m * m];
    for (i, a) in tail.iter().enumerate() {
        for (j, b) in tail.iter().enumerate() {
            d[i * m + j] = space.distance(a, b)?;
        }
    }
    let tol = opts.tol;
    let mut left_k = 0.0f64;
    let mut right_k = 0.0f64;
    let mut sym = 0.0f64;
    for k in 0..m {
        for n in k..m {
            left_k = left_k.max(d[k * m + n]);
            right_k = right_k.max(d[n * m + k]);
        }
        for n in 0..m {
            sym = sym.max(d[n * m + k]);
        }
    }

    let mut anchors: Vec<Point> = tail.to_vec();
    match space {
        Space::Matrix(_) => anchors.extend(space.points().unwrap_or_default()),
        Space::Interval(s) => anchors.extend([Point::Real(s.lo), Point::Real(s.hi)]),
    }
    let mut left_d = false;
    let mut right_d = false;
    for a in &anchors {
        let mut from = 0.0f64;
        let mut to = 0.0f64;
        for p in tail {
            from = from.max(space.distance(a, p)?);
            to = to.max(space.distance(p, a)?);
        }
        left_d |= from <= tol;
        right_d |= to <= tol;
    }

    let ds = sym <= tol;
    let left_k = left_k <= tol || ds;
    let right_k = right_k <= tol || ds;
    Ok(CauchyVerdict { left_d: left_d || left_k, left_k, right_d: right_d || right_k, right_k, ds, tol, tail_len: m })
}

/// All-pairs shortest-path (min-plus) closure of a non-negative cost matrix
/// with zero diagonal. The result satisfies the triangle inequality.
pub fn metric_closure(raw: &[Vec<f64>]) -> Result<Space> {
    let mut m = MatrixSpace::new(raw)?;
    close_in_place(&mut m);
    Ok(Space::Matrix(m))
}

pub(crate) fn close_in_place(m: &mut MatrixSpace) {
    let n = m.n;
    for k in 0..n {
        for i in 0..n {
            let dik = m.dist[i * n + k];
            for j in 0..n {
                let via = dik + m.dist[k * n + j];
                if via < m.dist[i * n + j] {
                    m.dist[i * n + j] = via;
                }
            }
        }
    }
}
