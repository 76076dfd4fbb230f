//! Named systems used throughout the tests, benches and bundled scenarios.

use crate::relations::{BoxRelation, FiniteRelation};
use crate::sets::{FiniteMetricSpace, Interval};
use crate::Scalar;

fn iv(lo: Scalar, hi: Scalar) -> Interval {
    Interval::new(lo, hi).expect("catalog intervals are ordered")
}

fn pt(x: Scalar) -> Interval {
    Interval::point(x)
}

fn unit() -> Interval {
    iv(Scalar::zero(), Scalar::one())
}

fn half() -> Scalar {
    Scalar::ratio(1, 2)
}

/// `([0,1/2] × {0}) ∪ ([1/2,1] × {1}) ∪ ({1} × [0,1])` on `[0,1]`:
/// has the specification property but not its Hausdorff version.
pub fn monica() -> BoxRelation {
    BoxRelation::new(
        unit(),
        vec![
            (iv(Scalar::zero(), half()), pt(Scalar::zero())),
            (iv(half(), Scalar::one()), pt(Scalar::one())),
            (pt(Scalar::one()), unit()),
        ],
    )
    .expect("valid")
}

/// `([0,1/2] × {0}) ∪ ({0} × [0,1/2]) ∪ ([1/2,1] × {1}) ∪ ({1} × [1/2,1])`:
/// every point reaches the whole interval after four steps.
pub fn exi() -> BoxRelation {
    BoxRelation::new(
        unit(),
        vec![
            (iv(Scalar::zero(), half()), pt(Scalar::zero())),
            (pt(Scalar::zero()), iv(Scalar::zero(), half())),
            (iv(half(), Scalar::one()), pt(Scalar::one())),
            (pt(Scalar::one()), iv(half(), Scalar::one())),
        ],
    )
    .expect("valid")
}

/// `[0,1] × {1}`, the constant map to 1.
pub fn constant_one() -> BoxRelation {
    BoxRelation::new(unit(), vec![(unit(), pt(Scalar::one()))]).expect("valid")
}

/// `[0,1] × [0,1]`.
pub fn full_box() -> BoxRelation {
    BoxRelation::new(unit(), vec![(unit(), unit())]).expect("valid")
}

/// `{(0,0), (0,1), (1,0)}` on the two-point discrete space.
pub fn golden_mean() -> FiniteRelation {
    FiniteRelation::from_pairs(FiniteMetricSpace::discrete(2), &[(0, 0), (0, 1), (1, 0)]).expect("valid")
}

/// Every pair on the `n`-point discrete space.
pub fn full_shift(n: usize) -> FiniteRelation {
    FiniteRelation::new(FiniteMetricSpace::discrete(n), vec![vec![true; n]; n]).expect("valid")
}
