//! Closed subsets of the two kinds of ambient space the crate works with:
//! finite unions of closed rational intervals, and subsets of a finite
//! metric space. Both support the infimum set distance, the Hausdorff
//! distance and closed ε-neighborhoods, all computed exactly.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("distance requested on an empty set")]
    EmptySet,
    #[error("invalid interval [{lo}, {hi}]: lower end exceeds upper end")]
    InvalidInterval { lo: String, hi: String },
    #[error("negative neighborhood radius {0}")]
    NegativeRadius(String),
    #[error("point index {index} out of range for a space of {size} points")]
    PointOutOfRange { index: usize, size: usize },
    #[error("distance matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("a finite metric space needs at least one point")]
    EmptySpace,
}

/// A closed interval `[lo, hi]`; `lo == hi` is a point.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Scalar,
    hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self, SetError> {
        if lo > hi {
            return Err(SetError::InvalidInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(x: Scalar) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn lo(&self) -> &Scalar {
        &self.lo
    }

    pub fn hi(&self) -> &Scalar {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Distance from `x` to the nearest point of the interval.
    pub fn distance_to(&self, x: &Scalar) -> Scalar {
        if x < &self.lo {
            &self.lo - x
        } else if x > &self.hi {
            x - &self.hi
        } else {
            Scalar::zero()
        }
    }

    /// Gap between two intervals, zero when they meet.
    pub fn gap(&self, other: &Interval) -> Scalar {
        if self.hi < other.lo {
            &other.lo - &self.hi
        } else if other.hi < self.lo {
            &self.lo - &other.hi
        } else {
            Scalar::zero()
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{{{}}}", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [&self.lo, &self.hi].serialize(serializer)
    }
}

/// A canonical finite union of closed intervals: parts sorted, pairwise
/// disjoint and non-touching.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion { parts: Vec::new() }
    }

    pub fn point(x: Scalar) -> Self {
        IntervalUnion {
            parts: vec![Interval::point(x)],
        }
    }

    pub fn interval(iv: Interval) -> Self {
        IntervalUnion { parts: vec![iv] }
    }

    /// Canonical form of the union of `parts`.
    pub fn normalize(mut parts: Vec<Interval>) -> Self {
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalUnion { parts: out }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn min(&self) -> Option<&Scalar> {
        self.parts.first().map(|p| &p.lo)
    }

    pub fn max(&self) -> Option<&Scalar> {
        self.parts.last().map(|p| &p.hi)
    }

    /// `Some(x)` when the set is the single point `{x}`.
    pub fn as_point(&self) -> Option<&Scalar> {
        match self.parts.as_slice() {
            [p] if p.is_point() => Some(&p.lo),
            _ => None,
        }
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let idx = self.parts.partition_point(|p| &p.hi < x);
        self.parts.get(idx).is_some_and(|p| p.contains(x))
    }

    pub fn intersects_interval(&self, iv: &Interval) -> bool {
        let idx = self.parts.partition_point(|p| p.hi < iv.lo);
        self.parts.get(idx).is_some_and(|p| p.intersects(iv))
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        IntervalUnion::normalize(parts)
    }

    pub fn intersection(&self, other: &IntervalUnion) -> IntervalUnion {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.parts.len() && j < other.parts.len() {
            let (a, b) = (&self.parts[i], &other.parts[j]);
            let lo = a.lo.max_of(&b.lo);
            let hi = a.hi.min_of(&b.hi);
            if lo <= hi {
                out.push(Interval {
                    lo: lo.clone(),
                    hi: hi.clone(),
                });
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        // Each piece lies inside one part of each (canonical) input, so the
        // pieces are already sorted and separated.
        IntervalUnion { parts: out }
    }

    pub fn is_subset(&self, other: &IntervalUnion) -> bool {
        self.parts
            .iter()
            .all(|p| other.parts.iter().any(|q| q.contains_interval(p)))
    }

    /// Distance from a point to the set. The set must be non-empty.
    pub fn point_distance(&self, x: &Scalar) -> Result<Scalar, SetError> {
        if self.is_empty() {
            return Err(SetError::EmptySet);
        }
        let idx = self.parts.partition_point(|p| &p.hi < x);
        let mut best = self.parts.get(idx).map(|p| p.distance_to(x));
        if idx > 0 {
            let left = self.parts[idx - 1].distance_to(x);
            best = Some(match best {
                Some(b) if b <= left => b,
                _ => left,
            });
        }
        Ok(best.expect("non-empty"))
    }

    /// Largest distance from a point of `self` to `other`. The supremum of
    /// `d(·, other)` over an interval is attained at one of its endpoints or
    /// at the midpoint of a gap of `other` lying inside it.
    pub fn directed_hausdorff(&self, other: &IntervalUnion) -> Result<Scalar, SetError> {
        if self.is_empty() || other.is_empty() {
            return Err(SetError::EmptySet);
        }
        let gap_mids: Vec<Scalar> = other
            .parts
            .windows(2)
            .map(|w| w[0].hi.midpoint(&w[1].lo))
            .collect();
        let mut best = Scalar::zero();
        for p in &self.parts {
            let inner = gap_mids.iter().filter(|m| p.contains(m));
            for c in [&p.lo, &p.hi].into_iter().chain(inner) {
                let d = other.point_distance(c)?;
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }

    pub fn set_distance(&self, other: &IntervalUnion) -> Result<Scalar, SetError> {
        if self.is_empty() || other.is_empty() {
            return Err(SetError::EmptySet);
        }
        let (mut i, mut j) = (0, 0);
        let mut best: Option<Scalar> = None;
        while i < self.parts.len() && j < other.parts.len() {
            let (a, b) = (&self.parts[i], &other.parts[j]);
            let g = a.gap(b);
            if g.is_zero() {
                return Ok(g);
            }
            if best.as_ref().is_none_or(|cur| &g < cur) {
                best = Some(g);
            }
            if a.hi < b.hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(best.expect("both sets non-empty"))
    }

    pub fn hausdorff_distance(&self, other: &IntervalUnion) -> Result<Scalar, SetError> {
        let ab = self.directed_hausdorff(other)?;
        let ba = other.directed_hausdorff(self)?;
        Ok(if ab >= ba { ab } else { ba })
    }

    /// Closed ε-neighborhood clipped to `ambient`.
    pub fn neighborhood(&self, eps: &Scalar, ambient: &Interval) -> Result<IntervalUnion, SetError> {
        if self.is_empty() {
            return Err(SetError::EmptySet);
        }
        if eps.is_negative() {
            return Err(SetError::NegativeRadius(eps.to_string()));
        }
        let parts = self
            .parts
            .iter()
            .filter_map(|p| {
                let lo = (&p.lo - eps).max_of(&ambient.lo).clone();
                let hi = (&p.hi + eps).min_of(&ambient.hi).clone();
                Interval::new(lo, hi).ok()
            })
            .collect();
        Ok(IntervalUnion::normalize(parts))
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "∅");
        }
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for IntervalUnion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.parts.serialize(serializer)
    }
}

/// A finite metric space given by its distance matrix.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FiniteMetricSpace {
    dist: Vec<Vec<Scalar>>,
}

/// Outcome of [`FiniteMetricSpace::validate`].
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum MetricVerdict {
    Pass,
    Fail(MetricViolation),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Error)]
pub enum MetricViolation {
    #[error("negative distance at pair ({0}, {1})")]
    Negative(usize, usize),
    #[error("asymmetric distance at pair ({0}, {1})")]
    Symmetry(usize, usize),
    #[error("identity of indiscernibles fails at pair ({0}, {1})")]
    Identity(usize, usize),
    #[error("triangle inequality fails at triple ({0}, {1}, {2})")]
    Triangle(usize, usize, usize),
}

impl FiniteMetricSpace {
    /// Checks only that the matrix is square; metric axioms are checked by
    /// [`validate`](Self::validate).
    pub fn new(dist: Vec<Vec<Scalar>>) -> Result<Self, SetError> {
        let n = dist.len();
        if n == 0 {
            return Err(SetError::EmptySpace);
        }
        if let Some((row, r)) = dist.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(SetError::NotSquare {
                row,
                len: r.len(),
                n,
            });
        }
        Ok(FiniteMetricSpace { dist })
    }

    /// All off-diagonal distances equal to one.
    pub fn discrete(n: usize) -> Self {
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Scalar::zero() } else { Scalar::one() })
                    .collect()
            })
            .collect();
        FiniteMetricSpace { dist }
    }

    /// Points on the real line with the absolute-difference metric.
    pub fn on_line(coords: &[Scalar]) -> Self {
        let dist = coords
            .iter()
            .map(|a| coords.iter().map(|b| (a - b).abs()).collect())
            .collect();
        FiniteMetricSpace { dist }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn d(&self, a: usize, b: usize) -> &Scalar {
        &self.dist[a][b]
    }

    pub fn matrix(&self) -> &[Vec<Scalar>] {
        &self.dist
    }

    pub fn diameter(&self) -> Scalar {
        self.dist
            .iter()
            .flatten()
            .max()
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    /// Scales every distance by `1/factor`.
    pub fn scaled_down(&self, factor: &Scalar) -> Self {
        let dist = self
            .dist
            .iter()
            .map(|r| r.iter().map(|d| d / factor).collect())
            .collect();
        FiniteMetricSpace { dist }
    }

    /// Checks symmetry, identity of indiscernibles and the triangle
    /// inequality, reporting the first violation in index order.
    pub fn validate(&self) -> MetricVerdict {
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let d = &self.dist[i][j];
                if d.is_negative() {
                    return MetricVerdict::Fail(MetricViolation::Negative(i, j));
                }
                if d != &self.dist[j][i] {
                    return MetricVerdict::Fail(MetricViolation::Symmetry(i.min(j), i.max(j)));
                }
                if (i == j) != d.is_zero() {
                    return MetricVerdict::Fail(MetricViolation::Identity(i, j));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.dist[i][k] > &self.dist[i][j] + &self.dist[j][k] {
                        return MetricVerdict::Fail(MetricViolation::Triangle(i, j, k));
                    }
                }
            }
        }
        MetricVerdict::Pass
    }

    pub fn set_distance(&self, a: &PointSet, b: &PointSet) -> Result<Scalar, SetError> {
        if a.is_empty() || b.is_empty() {
            return Err(SetError::EmptySet);
        }
        Ok(a.iter()
            .flat_map(|x| b.iter().map(move |y| self.d(x, y)))
            .min()
            .cloned()
            .expect("non-empty"))
    }

    fn point_distance(&self, x: usize, b: &PointSet) -> Scalar {
        b.iter()
            .map(|y| self.d(x, y))
            .min()
            .cloned()
            .expect("non-empty")
    }

    pub fn hausdorff_distance(&self, a: &PointSet, b: &PointSet) -> Result<Scalar, SetError> {
        if a.is_empty() || b.is_empty() {
            return Err(SetError::EmptySet);
        }
        let ab = a.iter().map(|x| self.point_distance(x, b));
        let ba = b.iter().map(|y| self.point_distance(y, a));
        Ok(ab.chain(ba).max().expect("non-empty"))
    }

    pub fn neighborhood(&self, eps: &Scalar, a: &PointSet) -> Result<PointSet, SetError> {
        if a.is_empty() {
            return Err(SetError::EmptySet);
        }
        if eps.is_negative() {
            return Err(SetError::NegativeRadius(eps.to_string()));
        }
        Ok(PointSet {
            members: (0..self.len())
                .filter(|&x| a.iter().any(|y| self.d(x, y) <= eps))
                .collect(),
        })
    }
}

/// A subset of a finite metric space, as strictly increasing indices.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(transparent)]
pub struct PointSet {
    members: Vec<usize>,
}

impl PointSet {
    pub fn empty() -> Self {
        PointSet::default()
    }

    pub fn singleton(x: usize) -> Self {
        PointSet { members: vec![x] }
    }

    pub fn full(n: usize) -> Self {
        PointSet {
            members: (0..n).collect(),
        }
    }

    /// Sorts and deduplicates; every index must be below `size`.
    pub fn new(mut members: Vec<usize>, size: usize) -> Result<Self, SetError> {
        if let Some(&index) = members.iter().find(|&&i| i >= size) {
            return Err(SetError::PointOutOfRange { index, size });
        }
        members.sort_unstable();
        members.dedup();
        Ok(PointSet { members })
    }

    pub(crate) fn from_sorted(members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        PointSet { members }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }

    pub fn min(&self) -> Option<usize> {
        self.members.first().copied()
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut m = self.members.clone();
        m.extend_from_slice(&other.members);
        m.sort_unstable();
        m.dedup();
        PointSet { members: m }
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        PointSet {
            members: self
                .members
                .iter()
                .copied()
                .filter(|x| other.contains(*x))
                .collect(),
        }
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.members.iter().all(|&x| other.contains(x))
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lo.cmp(&other.lo).then_with(|| self.hi.cmp(&other.hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::q;

    fn iv(lo: Scalar, hi: Scalar) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn pt(x: Scalar) -> IntervalUnion {
        IntervalUnion::point(x)
    }

    fn unit() -> Interval {
        iv(q!(0), q!(1))
    }

    #[test]
    fn normalize_merges_touching_and_overlapping() {
        let u = IntervalUnion::normalize(vec![iv(q!(0), q!(1 / 2)), iv(q!(1 / 2), q!(1))]);
        assert_eq!(u.parts(), &[unit()]);
        let u = IntervalUnion::normalize(vec![Interval::point(q!(0))]);
        assert_eq!(u.parts(), &[Interval::point(q!(0))]);
        let u = IntervalUnion::normalize(vec![iv(q!(1 / 4), q!(3 / 4)), iv(q!(0), q!(1 / 2))]);
        assert_eq!(u.parts(), &[iv(q!(0), q!(3 / 4))]);
        assert!(IntervalUnion::normalize(vec![]).is_empty());
    }

    #[test]
    fn normalize_keeps_gaps() {
        let u = IntervalUnion::normalize(vec![Interval::point(q!(1)), iv(q!(0), q!(1 / 2))]);
        assert_eq!(u.parts().len(), 2);
        assert_eq!(u.to_string(), "[0/1, 1/2] ∪ {1/1}");
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(matches!(
            Interval::new(q!(1), q!(0)),
            Err(SetError::InvalidInterval { .. })
        ));
    }

    #[test]
    fn set_distance_examples() {
        assert_eq!(pt(q!(0)).set_distance(&pt(q!(3 / 4))).unwrap(), q!(3 / 4));
        let a = IntervalUnion::normalize(vec![iv(q!(1 / 8), q!(1 / 4)), Interval::point(q!(1))]);
        assert_eq!(a.set_distance(&a).unwrap(), q!(0));
        let x = IntervalUnion::interval(unit());
        assert_eq!(pt(q!(0)).set_distance(&x).unwrap(), q!(0));
    }

    #[test]
    fn hausdorff_examples() {
        let x = IntervalUnion::interval(unit());
        assert_eq!(pt(q!(0)).hausdorff_distance(&x).unwrap(), q!(1));
        let a = IntervalUnion::normalize(vec![iv(q!(0), q!(1 / 2)), Interval::point(q!(1))]);
        assert_eq!(a.hausdorff_distance(&pt(q!(0))).unwrap(), q!(1));
        let half = IntervalUnion::interval(iv(q!(0), q!(1 / 2)));
        assert_eq!(half.hausdorff_distance(&pt(q!(0))).unwrap(), q!(1 / 2));
    }

    #[test]
    fn hausdorff_uses_gap_midpoints() {
        // [0,1] against {0} ∪ {1}: the worst point is 1/2.
        let ends = IntervalUnion::normalize(vec![Interval::point(q!(0)), Interval::point(q!(1))]);
        let x = IntervalUnion::interval(unit());
        assert_eq!(x.hausdorff_distance(&ends).unwrap(), q!(1 / 2));
    }

    #[test]
    fn empty_sets_rejected() {
        let e = IntervalUnion::empty();
        assert_eq!(e.set_distance(&pt(q!(0))), Err(SetError::EmptySet));
        assert_eq!(pt(q!(0)).hausdorff_distance(&e), Err(SetError::EmptySet));
        assert_eq!(e.neighborhood(&q!(1), &unit()), Err(SetError::EmptySet));
    }

    #[test]
    fn neighborhood_examples() {
        assert_eq!(
            pt(q!(0)).neighborhood(&q!(1 / 4), &unit()).unwrap(),
            IntervalUnion::interval(iv(q!(0), q!(1 / 4)))
        );
        let a = IntervalUnion::normalize(vec![iv(q!(1 / 8), q!(1 / 4)), Interval::point(q!(1))]);
        assert_eq!(
            a.neighborhood(&q!(2), &unit()).unwrap(),
            IntervalUnion::interval(unit())
        );
        assert_eq!(
            pt(q!(1 / 2)).neighborhood(&q!(1 / 4), &unit()).unwrap(),
            IntervalUnion::interval(iv(q!(1 / 4), q!(3 / 4)))
        );
        assert!(matches!(
            pt(q!(0)).neighborhood(&q!(-1), &unit()),
            Err(SetError::NegativeRadius(_))
        ));
    }

    #[test]
    fn intersection_and_subset() {
        let a = IntervalUnion::normalize(vec![iv(q!(0), q!(1 / 2)), Interval::point(q!(1))]);
        let b = IntervalUnion::interval(iv(q!(1 / 2), q!(1)));
        let meet = a.intersection(&b);
        assert_eq!(
            meet,
            IntervalUnion::normalize(vec![Interval::point(q!(1 / 2)), Interval::point(q!(1))])
        );
        assert!(meet.is_subset(&a) && meet.is_subset(&b));
        assert!(!a.is_subset(&b));
        assert!(a.contains(&q!(1)) && !a.contains(&q!(3 / 4)));
    }

    #[test]
    fn validate_metric_examples() {
        assert_eq!(FiniteMetricSpace::discrete(3).validate(), MetricVerdict::Pass);

        let asym = FiniteMetricSpace::new(vec![vec![q!(0), q!(1)], vec![q!(2), q!(0)]]).unwrap();
        assert_eq!(
            asym.validate(),
            MetricVerdict::Fail(MetricViolation::Symmetry(0, 1))
        );

        let tri = FiniteMetricSpace::new(vec![
            vec![q!(0), q!(1), q!(3)],
            vec![q!(1), q!(0), q!(1)],
            vec![q!(3), q!(1), q!(0)],
        ])
        .unwrap();
        assert_eq!(
            tri.validate(),
            MetricVerdict::Fail(MetricViolation::Triangle(0, 1, 2))
        );

        let ident = FiniteMetricSpace::new(vec![vec![q!(0), q!(0)], vec![q!(0), q!(0)]]).unwrap();
        assert_eq!(
            ident.validate(),
            MetricVerdict::Fail(MetricViolation::Identity(0, 1))
        );
    }

    #[test]
    fn non_square_matrix_rejected() {
        assert!(matches!(
            FiniteMetricSpace::new(vec![vec![q!(0), q!(1)], vec![q!(1)]]),
            Err(SetError::NotSquare { row: 1, .. })
        ));
    }

    #[test]
    fn finite_distances() {
        let space = FiniteMetricSpace::on_line(&[q!(0), q!(1 / 4), q!(1)]);
        let a = PointSet::new(vec![0, 1], 3).unwrap();
        let b = PointSet::singleton(2);
        assert_eq!(space.set_distance(&a, &b).unwrap(), q!(3 / 4));
        assert_eq!(space.hausdorff_distance(&a, &b).unwrap(), q!(1));
        assert_eq!(
            space.neighborhood(&q!(1 / 4), &PointSet::singleton(0)).unwrap(),
            a
        );
        assert!(PointSet::new(vec![3], 3).is_err());
    }
}
