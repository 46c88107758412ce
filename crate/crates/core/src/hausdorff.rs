//! Point-to-set distances, the Hausdorff quasi-distance and the
//! startpoint / endpoint functionals of a set-valued map.
//!
//! All sets are finite, so every infimum and supremum is an exact min or max.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Point, Space};

/// Nonempty, sorted, deduplicated finite set of points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PointSet {
    elems: Vec<Point>,
}

impl PointSet {
    pub fn new(mut elems: Vec<Point>) -> Result<Self> {
        if elems.is_empty() {
            return Err(Error::EmptySet);
        }
        elems.sort();
        elems.dedup();
        Ok(PointSet { elems })
    }

    pub fn singleton(p: Point) -> Self {
        PointSet { elems: vec![p] }
    }

    /// Builds a set and checks that every element lies in `space`.
    pub fn in_space(space: &Space, elems: Vec<Point>) -> Result<Self> {
        let set = PointSet::new(elems)?;
        if let Some(p) = set.elems.iter().find(|p| !space.contains(p)) {
            return Err(Error::PointOutOfDomain(*p));
        }
        Ok(set)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> {
        self.elems.iter()
    }

    pub fn as_slice(&self) -> &[Point] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.elems.binary_search(p).is_ok()
    }
}

impl TryFrom<Vec<Point>> for PointSet {
    type Error = Error;

    fn try_from(v: Vec<Point>) -> Result<Self> {
        PointSet::new(v)
    }
}

impl From<PointSet> for Vec<Point> {
    fn from(s: PointSet) -> Vec<Point> {
        s.elems
    }
}

/// Closed-form set-valued maps on interval spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapRule {
    /// `T(6) = {4, 5}` and `T(x) = {x/2}` otherwise.
    #[serde(rename = "half-except-6")]
    HalfExceptSix,
    /// `T(x) = {x/2}`.
    #[serde(rename = "half")]
    Half,
    /// `T(x) = {x}`.
    #[serde(rename = "identity")]
    Identity,
}

impl MapRule {
    pub fn name(&self) -> &'static str {
        match self {
            MapRule::HalfExceptSix => "half-except-6",
            MapRule::Half => "half",
            MapRule::Identity => "identity",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "half-except-6" => Some(MapRule::HalfExceptSix),
            "half" => Some(MapRule::Half),
            "identity" => Some(MapRule::Identity),
            _ => None,
        }
    }
}

/// A map assigning each point a nonempty finite set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SetValuedMap {
    Table {
        #[serde(deserialize_with = "index_keys")]
        map: BTreeMap<usize, PointSet>,
    },
    #[serde(rename = "closedform")]
    ClosedForm { rule: MapRule },
}

// Internally tagged enums buffer their content, which turns integer map keys
// into strings before the key type sees them.
fn index_keys<'de, D: serde::Deserializer<'de>>(de: D) -> Result<BTreeMap<usize, PointSet>, D::Error> {
    let raw = BTreeMap::<String, PointSet>::deserialize(de)?;
    raw.into_iter()
        .map(|(k, v)| k.parse().map(|k| (k, v)).map_err(|_| serde::de::Error::custom(format!("bad point index {k:?}"))))
        .collect()
}

impl SetValuedMap {
    pub fn table(map: BTreeMap<usize, PointSet>) -> Self {
        SetValuedMap::Table { map }
    }

    pub fn closed_form(rule: MapRule) -> Self {
        SetValuedMap::ClosedForm { rule }
    }

    /// The map of the worked example on `[0, 10]`.
    pub fn half_except_six() -> Self {
        SetValuedMap::ClosedForm { rule: MapRule::HalfExceptSix }
    }

    /// `Tx` for `x` in the domain of the map and of `space`.
    pub fn image(&self, space: &Space, x: &Point) -> Result<PointSet> {
        if !space.contains(x) {
            return Err(Error::PointOutOfDomain(*x));
        }
        match self {
            SetValuedMap::Table { map } => {
                let i = x.as_index().ok_or(Error::PointOutOfDomain(*x))?;
                map.get(&i).cloned().ok_or(Error::PointOutOfDomain(*x))
            }
            SetValuedMap::ClosedForm { rule } => {
                let elems = match (rule, *x) {
                    (MapRule::Identity, p) => vec![p],
                    (MapRule::HalfExceptSix, Point::Real(6.0)) => {
                        vec![Point::Real(4.0), Point::Real(5.0)]
                    }
                    (MapRule::HalfExceptSix | MapRule::Half, Point::Real(v)) => vec![Point::Real(v / 2.0)],
                    _ => return Err(Error::PointOutOfDomain(*x)),
                };
                PointSet::in_space(space, elems)
            }
        }
    }

    /// Checks that every image of a table map is nonempty and inside `space`.
    pub fn validate(&self, space: &Space) -> Result<()> {
        if let SetValuedMap::Table { map } = self {
            for (&k, img) in map {
                if !space.contains(&Point::Index(k)) {
                    return Err(Error::PointOutOfDomain(Point::Index(k)));
                }
                if let Some(p) = img.iter().find(|p| !space.contains(p)) {
                    return Err(Error::PointOutOfDomain(*p));
                }
            }
        }
        Ok(())
    }
}

/// `d(x, A) = min_{a ∈ A} d(x, a)`.
pub fn point_to_set(space: &Space, x: &Point, set: &PointSet) -> Result<f64> {
    let mut best = f64::INFINITY;
    for a in set.iter() {
        best = best.min(space.distance(x, a)?);
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(best)
}

/// `d(A, x) = min_{a ∈ A} d(a, x)`.
pub fn set_to_point(space: &Space, set: &PointSet, x: &Point) -> Result<f64> {
    let mut best = f64::INFINITY;
    for a in set.iter() {
        best = best.min(space.distance(a, x)?);
    }
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(best)
}

/// `H(A,B) = max{ sup_{a∈A} d(a,B), sup_{b∈B} d(A,b) }`.
pub fn hausdorff_h(space: &Space, a: &PointSet, b: &PointSet) -> Result<f64> {
    let mut excess_a = 0.0f64;
    for p in a.iter() {
        excess_a = excess_a.max(point_to_set(space, p, b)?);
    }
    let mut excess_b = 0.0f64;
    for q in b.iter() {
        excess_b = excess_b.max(set_to_point(space, a, q)?);
    }
    Ok(excess_a.max(excess_b))
}

/// The `H` functional evaluated over the symmetrized distance `dˢ`.
pub fn hausdorff_hs(space: &Space, a: &PointSet, b: &PointSet) -> Result<f64> {
    hausdorff_h(&space.symmetrize(), a, b)
}

/// `f(x) = H({x}, Tx)`; zero exactly at startpoints.
pub fn f_start(space: &Space, map: &SetValuedMap, x: &Point) -> Result<f64> {
    let img = map.image(space, x)?;
    hausdorff_h(space, &PointSet::singleton(*x), &img)
}

/// `f(x) = H(Tx, {x})`; zero exactly at endpoints.
pub fn f_end(space: &Space, map: &SetValuedMap, x: &Point) -> Result<f64> {
    let img = map.image(space, x)?;
    hausdorff_h(space, &img, &PointSet::singleton(*x))
}

/// `f(x) = Hˢ({x}, Tx)`, the functional of the fixed-point corollaries.
pub fn f_fixed(space: &Space, map: &SetValuedMap, x: &Point) -> Result<f64> {
    let img = map.image(space, x)?;
    hausdorff_hs(space, &PointSet::singleton(*x), &img)
}
