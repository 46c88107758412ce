//! Brute-force ground truth on finite instances and seeded instance generators.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hausdorff::{f_end, f_start, point_to_set, PointSet, SetValuedMap};
use crate::solver::{
    check_side_conditions, evaluate_candidates, Candidate, Condition, Mode, SideOptions, VariantId, VariantSpec,
};
use crate::space::{metric_closure, Coverage, MatrixSpace, Point, Space};

/// Lift applied to zero-cost edges that would break the T0 condition.
pub const EPS_T0: f64 = 1e-6;

/// Most witnesses kept in a hypothesis report.
pub const MAX_HYPOTHESIS_WITNESSES: usize = 32;

/// Which zeros of which functional to enumerate.
pub type PointKind = Mode;

/// Every enumerated point whose functional is at most `eps`.
///
/// `Fixed` uses `dˢ(x, Tx) ≤ eps`, i.e. `x ∈ Tx` up to `eps`.
pub fn brute_force_points(
    space: &Space,
    map: &SetValuedMap,
    kind: PointKind,
    eps: f64,
    grid_step: Option<f64>,
) -> Result<Vec<Point>> {
    let sym = space.symmetrize();
    let mut out = Vec::new();
    for x in space.enumerate(grid_step)? {
        let v = match kind {
            Mode::Start => f_start(space, map, &x)?,
            Mode::End => f_end(space, map, &x)?,
            Mode::Fixed => point_to_set(&sym, &x, &map.image(space, &x)?)?,
        };
        if v <= eps {
            out.push(x);
        }
    }
    Ok(out)
}

/// A point with no feasible successor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisWitness {
    pub x: Point,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub variant: VariantId,
    pub mode: Mode,
    pub verdict: HypothesisVerdict,
    pub coverage: Coverage,
    pub points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    pub tol_feas: f64,
    pub infeasible_points: usize,
    pub witnesses: Vec<HypothesisWitness>,
    pub conditions: Vec<Condition>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.verdict == HypothesisVerdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisOptions {
    pub tol_feas: f64,
    pub grid_step: Option<f64>,
    pub side: SideOptions,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        HypothesisOptions { tol_feas: crate::solver::DEFAULT_TOL_FEAS, grid_step: None, side: SideOptions::default() }
    }
}

/// Grid bound used for the gauge side conditions of a space.
pub fn side_condition_t_max(space: &Space) -> f64 {
    2.0 * space.diameter()
}

/// Checks, for every enumerated `x`, that some `y ∈ Tx` satisfies the
/// variant's inequalities, together with the gauge side conditions.
pub fn exhaustive_hypothesis_check(
    space: &Space,
    map: &SetValuedMap,
    variant: &VariantSpec,
    opts: &HypothesisOptions,
) -> Result<HypothesisReport> {
    let conditions = check_side_conditions(variant, side_condition_t_max(space), &opts.side)?;
    successor_hypothesis_check(space, map, variant, opts, conditions)
}

/// [`exhaustive_hypothesis_check`] with side conditions computed by the caller.
pub fn successor_hypothesis_check(
    space: &Space,
    map: &SetValuedMap,
    variant: &VariantSpec,
    opts: &HypothesisOptions,
    conditions: Vec<Condition>,
) -> Result<HypothesisReport> {
    let pts = space.enumerate(opts.grid_step)?;
    let mut witnesses = Vec::new();
    let mut infeasible = 0;
    for x in &pts {
        let candidates = evaluate_candidates(space, map, x, variant, opts.tol_feas)?;
        if !candidates.iter().any(|c| c.feasible) {
            infeasible += 1;
            if witnesses.len() < MAX_HYPOTHESIS_WITNESSES {
                witnesses.push(HypothesisWitness { x: *x, candidates });
            }
        }
    }
    let pass = infeasible == 0 && conditions.iter().all(|c| c.pass);
    Ok(HypothesisReport {
        variant: variant.id,
        mode: variant.mode,
        verdict: if pass { HypothesisVerdict::Pass } else { HypothesisVerdict::Fail },
        coverage: if space.is_finite() { Coverage::Exhaustive } else { Coverage::Sampled },
        points: pts.len(),
        grid_step: if space.is_finite() { None } else { opts.grid_step },
        tol_feas: opts.tol_feas,
        infeasible_points: infeasible,
        witnesses,
        conditions,
    })
}

/// Parameters of [`random_space`]. Costs are multiples of `1/4`, so sums are exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomSpaceParams {
    /// Largest edge cost.
    pub scale: f64,
    /// Probability that an off-diagonal edge is present before closure.
    pub density: f64,
    /// Probability that a present edge costs zero.
    pub zero_prob: f64,
}

impl Default for RandomSpaceParams {
    fn default() -> Self {
        RandomSpaceParams { scale: 10.0, density: 0.6, zero_prob: 0.15 }
    }
}

const COST_QUANTUM: f64 = 0.25;

/// Raw cost matrix for `n` points. Zero-cost edges only run forward along a
/// random order of the points, so they cannot close a zero cycle.
pub fn random_costs(n: usize, seed: u64, params: &RandomSpaceParams) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut rank = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let steps = ((params.scale / COST_QUANTUM).floor() as u64).max(1);
    let absent = COST_QUANTUM * (steps * n.max(1) as u64 + 1) as f64;
    let mut raw = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            raw[i][j] = if !rng.gen_bool(params.density) {
                absent
            } else if rank[i] < rank[j] && rng.gen_bool(params.zero_prob) {
                0.0
            } else {
                COST_QUANTUM * rng.gen_range(1..=steps) as f64
            };
        }
    }
    raw
}

/// Closes `raw` and, if the closure has a pair at zero distance both ways,
/// lifts backward zero edges (`i > j`) to [`EPS_T0`] and closes again.
/// Returns the space and the number of lifted edges.
pub fn closure_with_t0(mut raw: Vec<Vec<f64>>) -> Result<(Space, usize)> {
    let space = metric_closure(&raw)?;
    if space.as_matrix().is_none_or(MatrixSpace::is_t0) {
        return Ok((space, 0));
    }
    let mut lifted = 0;
    for (i, row) in raw.iter_mut().enumerate() {
        for v in row.iter_mut().take(i) {
            if *v == 0.0 {
                *v = EPS_T0;
                lifted += 1;
            }
        }
    }
    Ok((metric_closure(&raw)?, lifted))
}

/// Seeded random finite quasi-pseudometric space satisfying T0.
pub fn random_space(n: usize, seed: u64, params: &RandomSpaceParams) -> Result<Space> {
    closure_with_t0(random_costs(n, seed, params)).map(|(s, _)| s)
}

/// Seeded random table map on a finite space; each image has a uniformly drawn
/// size in `1..=max_card` (capped at the space size) and uniformly drawn elements.
pub fn random_setmap(space: &Space, seed: u64, max_card: usize) -> Result<SetValuedMap> {
    let pts = space.enumerate(None)?;
    let n = pts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = BTreeMap::new();
    for i in 0..n {
        let k = rng.gen_range(1..=max_card.clamp(1, n));
        let elems = sample(&mut rng, n, k).into_iter().map(Point::Index).collect();
        map.insert(i, PointSet::new(elems)?);
    }
    Ok(SetValuedMap::table(map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{Gauge, GaugePair, Range};
    use crate::hausdorff::MapRule;
    use crate::solver::Contraction;
    use crate::space::verify_axioms;

    fn r(x: f64) -> Point {
        Point::Real(x)
    }

    fn example() -> (Space, SetValuedMap) {
        (Space::max_diff(0.0, 10.0).unwrap(), SetValuedMap::half_except_six())
    }

    fn gaba_phi() -> VariantSpec {
        VariantSpec::new(VariantId::GabaPhi, Mode::Start, Contraction::Single(Gauge::constant(0.5, Range::Unit)))
            .unwrap()
    }

    fn v1() -> VariantSpec {
        let pair = GaugePair::new(Gauge::constant(0.5, Range::Unit), Gauge::constant(2.0 / 3.0, Range::FloorOpen(0.5)));
        VariantSpec::new(VariantId::V1, Mode::Start, Contraction::Pair(pair)).unwrap()
    }

    fn grid_opts() -> HypothesisOptions {
        HypothesisOptions { grid_step: Some(0.5), ..HypothesisOptions::default() }
    }

    #[test]
    fn example_points() {
        let (s, t) = example();
        assert_eq!(brute_force_points(&s, &t, Mode::Start, 1e-9, Some(0.5)).unwrap(), vec![r(0.0)]);
        let all = s.enumerate(Some(0.5)).unwrap();
        assert_eq!(all.len(), 21);
        assert_eq!(brute_force_points(&s, &t, Mode::End, 1e-9, Some(0.5)).unwrap(), all);
        assert_eq!(brute_force_points(&s, &t, Mode::Fixed, 1e-9, Some(0.5)).unwrap(), vec![r(0.0)]);
        assert!(brute_force_points(&s, &t, Mode::Start, 1e-9, None).is_err());
    }

    #[test]
    fn identity_points_are_everything() {
        let s = random_space(5, 3, &RandomSpaceParams::default()).unwrap();
        let id = SetValuedMap::closed_form(MapRule::Identity);
        let all = s.enumerate(None).unwrap();
        for kind in [Mode::Start, Mode::End, Mode::Fixed] {
            assert_eq!(brute_force_points(&s, &id, kind, 0.0, None).unwrap(), all);
        }
    }

    #[test]
    fn example_hypotheses_fail_at_six() {
        let (s, t) = example();
        for v in [gaba_phi(), v1()] {
            let rep = exhaustive_hypothesis_check(&s, &t, &v, &grid_opts()).unwrap();
            assert!(!rep.passed());
            assert!(rep.conditions.iter().all(|c| c.pass), "{:?}", rep.conditions);
            assert_eq!(rep.infeasible_points, 1);
            assert_eq!(rep.witnesses[0].x, r(6.0));
            let vals: Vec<_> = rep.witnesses[0]
                .candidates
                .iter()
                .map(|c| (c.y, c.inequalities[0].lhs, c.inequalities[0].rhs))
                .collect();
            assert_eq!(vals, vec![(r(4.0), 2.0, 1.0), (r(5.0), 2.5, 0.5)]);
            assert_eq!(rep.coverage, Coverage::Sampled);
        }
    }

    #[test]
    fn identity_passes_everything() {
        let s = random_space(4, 9, &RandomSpaceParams::default()).unwrap();
        let id = SetValuedMap::closed_form(MapRule::Identity);
        let rep = exhaustive_hypothesis_check(&s, &id, &v1(), &HypothesisOptions::default()).unwrap();
        assert!(rep.passed());
        assert!(rep.witnesses.is_empty());
        assert_eq!(rep.coverage, Coverage::Exhaustive);
    }

    #[test]
    fn report_round_trips() {
        let (s, t) = example();
        let rep = exhaustive_hypothesis_check(&s, &t, &gaba_phi(), &grid_opts()).unwrap();
        let js = serde_json::to_string(&rep).unwrap();
        assert_eq!(serde_json::from_str::<HypothesisReport>(&js).unwrap(), rep);
    }

    #[test]
    fn random_space_basics() {
        let p = RandomSpaceParams::default();
        assert_eq!(random_space(1, 0, &p).unwrap().as_matrix().unwrap().rows(), vec![vec![0.0]]);
        let a = random_space(4, 42, &p).unwrap();
        assert_eq!(a, random_space(4, 42, &p).unwrap());
        assert_ne!(a, random_space(4, 43, &p).unwrap());
        for seed in 0..50 {
            let s = random_space(1 + seed as usize % 12, seed, &p).unwrap();
            assert!(verify_axioms(&s, true, None).unwrap().passes());
            let rows = s.as_matrix().unwrap().rows();
            assert!(rows.iter().flatten().all(|v| (v / COST_QUANTUM).fract() == 0.0));
        }
    }

    #[test]
    fn t0_guard_lifts_zero_cycles() {
        let raw = vec![vec![0.0, 0.0, 3.0], vec![0.0, 0.0, 1.0], vec![2.0, 2.0, 0.0]];
        let (s, lifted) = closure_with_t0(raw.clone()).unwrap();
        assert_eq!(lifted, 1);
        assert!(verify_axioms(&s, true, None).unwrap().passes());
        assert_eq!(s.as_matrix().unwrap().rows()[1][0], EPS_T0);
        assert_eq!(s.as_matrix().unwrap().rows()[0][1], 0.0);
        let (_, none) = closure_with_t0(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(none, 0);
    }

    #[test]
    fn random_setmap_contract() {
        let s = random_space(6, 1, &RandomSpaceParams::default()).unwrap();
        let single = random_setmap(&s, 5, 1).unwrap();
        for x in s.enumerate(None).unwrap() {
            assert_eq!(single.image(&s, &x).unwrap().len(), 1);
        }
        let m = random_setmap(&s, 5, 3).unwrap();
        assert_eq!(m, random_setmap(&s, 5, 3).unwrap());
        assert!(m.validate(&s).is_ok());
        for x in s.enumerate(None).unwrap() {
            let k = m.image(&s, &x).unwrap().len();
            assert!((1..=3).contains(&k));
        }
    }
}
