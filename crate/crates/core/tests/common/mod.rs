#![allow(dead_code)]

use qpm_core::gauge::{Gauge, GaugePair, Range};
use qpm_core::hausdorff::SetValuedMap;
use qpm_core::oracle::{random_setmap, random_space, RandomSpaceParams};
use qpm_core::solver::{Contraction, Mode, VariantId, VariantSpec};
use qpm_core::space::{Point, Space};

pub fn r(x: f64) -> Point {
    Point::Real(x)
}

pub fn paper_example() -> (Space, SetValuedMap) {
    (Space::max_diff(0.0, 10.0).unwrap(), SetValuedMap::half_except_six())
}

pub fn v1_example() -> VariantSpec {
    let pair = GaugePair::new(Gauge::constant(0.5, Range::Unit), Gauge::constant(2.0 / 3.0, Range::FloorOpen(0.5)));
    VariantSpec::new(VariantId::V1, Mode::Start, Contraction::Pair(pair)).unwrap()
}

fn pair(id: VariantId, phi: Gauge, eta: Gauge) -> Contraction {
    Contraction::Pair(GaugePair::new(phi, eta).with_props(id.required_props().iter().copied()))
}

/// Gauges with `φ(t) < t`, so every accepted step strictly lowers `f`.
pub fn property_variant(id: VariantId, mode: Mode) -> VariantSpec {
    let c = match id {
        VariantId::GabaC => Contraction::Constant(0.5),
        VariantId::GabaPhi => Contraction::Single(Gauge::constant(0.6, Range::Unit)),
        VariantId::GabaB => pair(id, Gauge::constant(0.5, Range::Unit), Gauge::constant(0.75, Range::FloorOpen(0.5))),
        VariantId::V1 => pair(id, Gauge::constant(0.5, Range::Unit), Gauge::constant(2.0 / 3.0, Range::FloorOpen(0.5))),
        VariantId::V2 => pair(id, Gauge::constant(0.5, Range::Unit), Gauge::constant(1.0, Range::FloorClosed(0.5))),
        VariantId::V3 => pair(id, Gauge::linear(0.5), Gauge::linear(0.75)),
        VariantId::V4 => pair(id, Gauge::linear(0.4), Gauge::linear(0.8)),
        VariantId::V5 => pair(id, Gauge::linear(0.5), Gauge::linear(0.9)),
        VariantId::V6 => pair(id, Gauge::linear(0.3), Gauge::linear(0.6)),
        VariantId::V7 => pair(id, Gauge::linear(0.5), Gauge::linear(0.75)),
        VariantId::V8 => pair(id, Gauge::linear(0.25), Gauge::linear(0.5)),
    };
    VariantSpec::new(id, mode, c).unwrap()
}

/// Seeded finite scenario with 2 to 7 points and images of size at most 3.
pub fn scenario(seed: u64) -> (Space, SetValuedMap) {
    let n = 2 + (seed % 6) as usize;
    let space = random_space(n, seed, &RandomSpaceParams::default()).unwrap();
    let map = random_setmap(&space, seed ^ 0x005e_ed0f_7a5c, 3).unwrap();
    (space, map)
}
