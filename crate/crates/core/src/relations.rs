//! Closed relations as data.
//!
//! Two concrete relation types are supported: finite unions of boxes
//! `A_i × B_i` on a rational interval ([`BoxRelation`]) and adjacency
//! matrices over a finite metric space ([`FiniteRelation`]). Both implement
//! [`CrSystem`], which is everything the tracing and certification code needs
//! from a system.
//!
//! For a box relation the image of a point depends only on which domain boxes
//! contain it, so the ambient interval splits into finitely many
//! [`Cell`]s on which every iterate `F^j(y)`, `j >= 1`, is constant. For a
//! finite relation each point is its own region.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::sets::{FiniteMetricSpace, Interval, IntervalUnion, PointSet, SetError};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelationError {
    #[error("iterate {step} of the orbit is empty")]
    EmptyImage { step: usize },
    #[error("bad orbit range: k = {k} exceeds l = {l}")]
    BadRange { k: usize, l: usize },
    #[error("box {index} is not contained in the ambient interval")]
    BoxOutsideAmbient { index: usize },
    #[error("a box relation needs at least one box")]
    NoBoxes,
    #[error("adjacency matrix is {rows}x{cols} but the space has {n} points")]
    DimensionMismatch { rows: usize, cols: usize, n: usize },
    #[error("point {0} is outside the ambient space")]
    PointOutsideAmbient(String),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// Which factor of `X × X` to project onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Projection {
    First,
    Second,
}

/// A compact metric space together with a closed relation on it.
///
/// Implementations provide exact set arithmetic, images, and a finite
/// partition of the space into regions on which `F(y)` is constant.
pub trait CrSystem: Sync {
    type Point: Clone + PartialEq + fmt::Debug + fmt::Display + Serialize + Send + Sync;
    type Set: Clone + Eq + Hash + fmt::Debug + fmt::Display + Serialize + Send + Sync;
    type Region: Clone + fmt::Debug + fmt::Display + Serialize + Send + Sync;

    fn ambient_set(&self) -> Self::Set;
    fn in_ambient(&self, p: &Self::Point) -> bool;
    fn singleton(&self, p: &Self::Point) -> Self::Set;
    fn is_empty_set(&self, s: &Self::Set) -> bool;
    fn contains(&self, s: &Self::Set, p: &Self::Point) -> bool;
    /// Smallest element (leftmost endpoint or lowest index).
    fn min_element(&self, s: &Self::Set) -> Option<Self::Point>;
    fn union(&self, a: &Self::Set, b: &Self::Set) -> Self::Set;
    fn intersection(&self, a: &Self::Set, b: &Self::Set) -> Self::Set;
    fn is_subset(&self, a: &Self::Set, b: &Self::Set) -> bool;

    fn set_distance(&self, a: &Self::Set, b: &Self::Set) -> Result<Scalar, SetError>;
    fn hausdorff_distance(&self, a: &Self::Set, b: &Self::Set) -> Result<Scalar, SetError>;
    fn neighborhood(&self, eps: &Scalar, a: &Self::Set) -> Result<Self::Set, SetError>;

    /// `F(S)`, possibly empty.
    fn image(&self, s: &Self::Set) -> Self::Set;
    /// `F^{-1}(S) = {y : F(y) ∩ S ≠ ∅}`.
    fn preimage(&self, s: &Self::Set) -> Self::Set;
    fn project(&self, which: Projection) -> Self::Set;
    fn inverse(&self) -> Self
    where
        Self: Sized;
    fn is_function(&self) -> bool;

    /// Finite partition of the space; `F(y)` is constant on each region.
    fn regions(&self) -> Vec<Self::Region>;
    fn region_image(&self, r: &Self::Region) -> Self::Set;
    fn region_contains(&self, r: &Self::Region, p: &Self::Point) -> bool;
    fn region_representative(&self, r: &Self::Region) -> Self::Point;
    /// A point of `r ∩ constraint`, trying `preferred` points first.
    fn region_pick(
        &self,
        r: &Self::Region,
        constraint: &Self::Set,
        preferred: &[Self::Point],
    ) -> Option<Self::Point>;

    fn check_point(&self, p: &Self::Point) -> Result<(), RelationError> {
        if self.in_ambient(p) {
            Ok(())
        } else {
            Err(RelationError::PointOutsideAmbient(p.to_string()))
        }
    }

    /// `F^j(x)`, with `F^0(x) = {x}`.
    fn iterate(&self, x: &Self::Point, j: usize) -> Result<Self::Set, RelationError> {
        Ok(self.orbit(x, j)?.pop().expect("orbit has j+1 entries"))
    }

    /// `[F^0(x), F^1(x), ..., F^upto(x)]`.
    fn orbit(&self, x: &Self::Point, upto: usize) -> Result<Vec<Self::Set>, RelationError> {
        self.check_point(x)?;
        let mut out = Vec::with_capacity(upto + 1);
        out.push(self.singleton(x));
        for step in 1..=upto {
            let next = self.image(out.last().expect("non-empty"));
            if self.is_empty_set(&next) {
                return Err(RelationError::EmptyImage { step });
            }
            out.push(next);
        }
        Ok(out)
    }

    fn orbit_segment(
        &self,
        x: &Self::Point,
        k: usize,
        l: usize,
    ) -> Result<OrbitSegment<Self::Point, Self::Set>, RelationError> {
        if k > l {
            return Err(RelationError::BadRange { k, l });
        }
        let sets = self.orbit(x, l)?.split_off(k);
        Ok(OrbitSegment {
            base: x.clone(),
            k,
            l,
            sets,
        })
    }
}

/// `(F^k(x), ..., F^l(x))`, materialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSegment<P, S> {
    pub base: P,
    pub k: usize,
    pub l: usize,
    pub sets: Vec<S>,
}

impl<P, S> OrbitSegment<P, S> {
    /// `F^j(x)` for `k <= j <= l`.
    pub fn at(&self, j: usize) -> &S {
        &self.sets[j - self.k]
    }
}

// ---------------------------------------------------------------------------
// Box relations
// ---------------------------------------------------------------------------

/// A closed relation given as a finite union of boxes `A_i × B_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoxRelation {
    ambient: Interval,
    boxes: Vec<(Interval, Interval)>,
}

impl BoxRelation {
    pub fn new(ambient: Interval, boxes: Vec<(Interval, Interval)>) -> Result<Self, RelationError> {
        if boxes.is_empty() {
            return Err(RelationError::NoBoxes);
        }
        if let Some(index) = boxes
            .iter()
            .position(|(a, b)| !ambient.contains_interval(a) || !ambient.contains_interval(b))
        {
            return Err(RelationError::BoxOutsideAmbient { index });
        }
        Ok(BoxRelation { ambient, boxes })
    }

    pub fn ambient(&self) -> &Interval {
        &self.ambient
    }

    pub fn boxes(&self) -> &[(Interval, Interval)] {
        &self.boxes
    }

    /// Indices of the boxes whose domain contains `y`.
    pub fn pattern_at(&self, y: &Scalar) -> Vec<usize> {
        self.boxes
            .iter()
            .enumerate()
            .filter(|(_, (a, _))| a.contains(y))
            .map(|(i, _)| i)
            .collect()
    }

    fn union_of_ranges(&self, pattern: &[usize]) -> IntervalUnion {
        IntervalUnion::normalize(pattern.iter().map(|&i| self.boxes[i].1.clone()).collect())
    }

    /// Maximal pieces of the ambient interval on which the set of domain
    /// boxes containing the point is constant.
    pub fn cell_decomposition(&self) -> CellDecomposition {
        let mut breakpoints: Vec<Scalar> = vec![self.ambient.lo().clone(), self.ambient.hi().clone()];
        for (a, _) in &self.boxes {
            breakpoints.push(a.lo().clone());
            breakpoints.push(a.hi().clone());
        }
        breakpoints.sort();
        breakpoints.dedup();

        let mut pieces: Vec<Cell> = Vec::with_capacity(2 * breakpoints.len());
        for (idx, b) in breakpoints.iter().enumerate() {
            pieces.push(Cell {
                lo: b.clone(),
                hi: b.clone(),
                lo_closed: true,
                hi_closed: true,
                pattern: self.pattern_at(b),
            });
            if let Some(next) = breakpoints.get(idx + 1) {
                pieces.push(Cell {
                    lo: b.clone(),
                    hi: next.clone(),
                    lo_closed: false,
                    hi_closed: false,
                    pattern: self.pattern_at(&b.midpoint(next)),
                });
            }
        }

        let mut cells: Vec<Cell> = Vec::with_capacity(pieces.len());
        for piece in pieces {
            match cells.last_mut() {
                Some(last) if last.pattern == piece.pattern => {
                    last.hi = piece.hi;
                    last.hi_closed = piece.hi_closed;
                }
                _ => cells.push(piece),
            }
        }
        CellDecomposition { breakpoints, cells }
    }
}

/// An interval piece of the ambient space, each end open or closed, with the
/// indices of the domain boxes covering it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub lo: Scalar,
    pub hi: Scalar,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub pattern: Vec<usize>,
}

impl Cell {
    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        let above = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let below = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        above && below
    }

    /// Left end when it belongs to the cell, else the midpoint.
    pub fn representative(&self) -> Scalar {
        if self.lo_closed {
            self.lo.clone()
        } else {
            self.lo.midpoint(&self.hi)
        }
    }

    /// Some point of the cell lying in the closed interval `iv`.
    fn pick_in(&self, iv: &Interval) -> Option<Scalar> {
        let (lo, lo_closed) = if iv.lo() > &self.lo {
            (iv.lo().clone(), true)
        } else {
            (self.lo.clone(), self.lo_closed)
        };
        let (hi, hi_closed) = if iv.hi() < &self.hi {
            (iv.hi().clone(), true)
        } else {
            (self.hi.clone(), self.hi_closed)
        };
        if lo < hi {
            Some(if lo_closed { lo } else { lo.midpoint(&hi) })
        } else if lo == hi && lo_closed && hi_closed {
            Some(lo)
        } else {
            None
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{}, {}{close}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellDecomposition {
    pub breakpoints: Vec<Scalar>,
    pub cells: Vec<Cell>,
}

impl CellDecomposition {
    pub fn cell_of(&self, y: &Scalar) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(y))
    }
}

impl CrSystem for BoxRelation {
    type Point = Scalar;
    type Set = IntervalUnion;
    type Region = Cell;

    fn ambient_set(&self) -> IntervalUnion {
        IntervalUnion::interval(self.ambient.clone())
    }

    fn in_ambient(&self, p: &Scalar) -> bool {
        self.ambient.contains(p)
    }

    fn singleton(&self, p: &Scalar) -> IntervalUnion {
        IntervalUnion::point(p.clone())
    }

    fn is_empty_set(&self, s: &IntervalUnion) -> bool {
        s.is_empty()
    }

    fn contains(&self, s: &IntervalUnion, p: &Scalar) -> bool {
        s.contains(p)
    }

    fn min_element(&self, s: &IntervalUnion) -> Option<Scalar> {
        s.min().cloned()
    }

    fn union(&self, a: &IntervalUnion, b: &IntervalUnion) -> IntervalUnion {
        a.union(b)
    }

    fn intersection(&self, a: &IntervalUnion, b: &IntervalUnion) -> IntervalUnion {
        a.intersection(b)
    }

    fn is_subset(&self, a: &IntervalUnion, b: &IntervalUnion) -> bool {
        a.is_subset(b)
    }

    fn set_distance(&self, a: &IntervalUnion, b: &IntervalUnion) -> Result<Scalar, SetError> {
        a.set_distance(b)
    }

    fn hausdorff_distance(&self, a: &IntervalUnion, b: &IntervalUnion) -> Result<Scalar, SetError> {
        a.hausdorff_distance(b)
    }

    fn neighborhood(&self, eps: &Scalar, a: &IntervalUnion) -> Result<IntervalUnion, SetError> {
        a.neighborhood(eps, &self.ambient)
    }

    fn image(&self, s: &IntervalUnion) -> IntervalUnion {
        IntervalUnion::normalize(
            self.boxes
                .iter()
                .filter(|(a, _)| s.intersects_interval(a))
                .map(|(_, b)| b.clone())
                .collect(),
        )
    }

    fn preimage(&self, s: &IntervalUnion) -> IntervalUnion {
        IntervalUnion::normalize(
            self.boxes
                .iter()
                .filter(|(_, b)| s.intersects_interval(b))
                .map(|(a, _)| a.clone())
                .collect(),
        )
    }

    fn project(&self, which: Projection) -> IntervalUnion {
        IntervalUnion::normalize(
            self.boxes
                .iter()
                .map(|(a, b)| match which {
                    Projection::First => a.clone(),
                    Projection::Second => b.clone(),
                })
                .collect(),
        )
    }

    fn inverse(&self) -> Self {
        BoxRelation {
            ambient: self.ambient.clone(),
            boxes: self.boxes.iter().map(|(a, b)| (b.clone(), a.clone())).collect(),
        }
    }

    fn is_function(&self) -> bool {
        self.cell_decomposition()
            .cells
            .iter()
            .all(|c| self.union_of_ranges(&c.pattern).as_point().is_some())
    }

    fn regions(&self) -> Vec<Cell> {
        self.cell_decomposition().cells
    }

    fn region_image(&self, r: &Cell) -> IntervalUnion {
        self.union_of_ranges(&r.pattern)
    }

    fn region_contains(&self, r: &Cell, p: &Scalar) -> bool {
        r.contains(p)
    }

    fn region_representative(&self, r: &Cell) -> Scalar {
        r.representative()
    }

    fn region_pick(&self, r: &Cell, constraint: &IntervalUnion, preferred: &[Scalar]) -> Option<Scalar> {
        if let Some(p) = preferred
            .iter()
            .find(|p| r.contains(p) && constraint.contains(p))
        {
            return Some(p.clone());
        }
        constraint.parts().iter().find_map(|iv| r.pick_in(iv))
    }
}

// ---------------------------------------------------------------------------
// Finite relations
// ---------------------------------------------------------------------------

/// A relation on a finite metric space: `(x, y) ∈ F` iff `adjacency[x][y]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteRelation {
    space: FiniteMetricSpace,
    adjacency: Vec<Vec<bool>>,
}

impl FiniteRelation {
    pub fn new(space: FiniteMetricSpace, adjacency: Vec<Vec<bool>>) -> Result<Self, RelationError> {
        let n = space.len();
        let rows = adjacency.len();
        if let Some(bad) = adjacency.iter().find(|r| r.len() != n) {
            return Err(RelationError::DimensionMismatch {
                rows,
                cols: bad.len(),
                n,
            });
        }
        if rows != n {
            return Err(RelationError::DimensionMismatch { rows, cols: n, n });
        }
        Ok(FiniteRelation { space, adjacency })
    }

    /// Relation from a list of pairs.
    pub fn from_pairs(space: FiniteMetricSpace, pairs: &[(usize, usize)]) -> Result<Self, RelationError> {
        let n = space.len();
        let mut adjacency = vec![vec![false; n]; n];
        for &(x, y) in pairs {
            if x >= n || y >= n {
                return Err(SetError::PointOutOfRange {
                    index: x.max(y),
                    size: n,
                }
                .into());
            }
            adjacency[x][y] = true;
        }
        Ok(FiniteRelation { space, adjacency })
    }

    /// Graph of a function `x ↦ f[x]`.
    pub fn from_function(space: FiniteMetricSpace, f: &[usize]) -> Result<Self, RelationError> {
        let pairs: Vec<(usize, usize)> = f.iter().copied().enumerate().collect();
        Self::from_pairs(space, &pairs)
    }

    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn has(&self, x: usize, y: usize) -> bool {
        self.adjacency[x][y]
    }

    fn row(&self, x: usize) -> PointSet {
        PointSet::from_sorted((0..self.len()).filter(|&y| self.adjacency[x][y]).collect())
    }
}

impl CrSystem for FiniteRelation {
    type Point = usize;
    type Set = PointSet;
    type Region = usize;

    fn ambient_set(&self) -> PointSet {
        PointSet::full(self.len())
    }

    fn in_ambient(&self, p: &usize) -> bool {
        *p < self.len()
    }

    fn singleton(&self, p: &usize) -> PointSet {
        PointSet::singleton(*p)
    }

    fn is_empty_set(&self, s: &PointSet) -> bool {
        s.is_empty()
    }

    fn contains(&self, s: &PointSet, p: &usize) -> bool {
        s.contains(*p)
    }

    fn min_element(&self, s: &PointSet) -> Option<usize> {
        s.min()
    }

    fn union(&self, a: &PointSet, b: &PointSet) -> PointSet {
        a.union(b)
    }

    fn intersection(&self, a: &PointSet, b: &PointSet) -> PointSet {
        a.intersection(b)
    }

    fn is_subset(&self, a: &PointSet, b: &PointSet) -> bool {
        a.is_subset(b)
    }

    fn set_distance(&self, a: &PointSet, b: &PointSet) -> Result<Scalar, SetError> {
        self.space.set_distance(a, b)
    }

    fn hausdorff_distance(&self, a: &PointSet, b: &PointSet) -> Result<Scalar, SetError> {
        self.space.hausdorff_distance(a, b)
    }

    fn neighborhood(&self, eps: &Scalar, a: &PointSet) -> Result<PointSet, SetError> {
        self.space.neighborhood(eps, a)
    }

    fn image(&self, s: &PointSet) -> PointSet {
        PointSet::from_sorted(
            (0..self.len())
                .filter(|&y| s.iter().any(|x| self.adjacency[x][y]))
                .collect(),
        )
    }

    fn preimage(&self, s: &PointSet) -> PointSet {
        PointSet::from_sorted(
            (0..self.len())
                .filter(|&x| s.iter().any(|y| self.adjacency[x][y]))
                .collect(),
        )
    }

    fn project(&self, which: Projection) -> PointSet {
        let n = self.len();
        PointSet::from_sorted(
            (0..n)
                .filter(|&p| {
                    (0..n).any(|q| match which {
                        Projection::First => self.adjacency[p][q],
                        Projection::Second => self.adjacency[q][p],
                    })
                })
                .collect(),
        )
    }

    fn inverse(&self) -> Self {
        let n = self.len();
        FiniteRelation {
            space: self.space.clone(),
            adjacency: (0..n)
                .map(|y| (0..n).map(|x| self.adjacency[x][y]).collect())
                .collect(),
        }
    }

    fn is_function(&self) -> bool {
        self.adjacency
            .iter()
            .all(|r| r.iter().filter(|&&b| b).count() == 1)
    }

    fn regions(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    fn region_image(&self, r: &usize) -> PointSet {
        self.row(*r)
    }

    fn region_contains(&self, r: &usize, p: &usize) -> bool {
        r == p
    }

    fn region_representative(&self, r: &usize) -> usize {
        *r
    }

    fn region_pick(&self, r: &usize, constraint: &PointSet, _preferred: &[usize]) -> Option<usize> {
        constraint.contains(*r).then_some(*r)
    }
}

// ---------------------------------------------------------------------------
// Iterate automaton
// ---------------------------------------------------------------------------

/// The eventually periodic sequence `F^1(y), F^2(y), ...` shared by every
/// point `y` of one region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionOrbit<S> {
    pub preperiod: Vec<S>,
    pub cycle: Vec<S>,
}

impl<S> RegionOrbit<S> {
    /// `F^j(y)` for `j >= 1`.
    pub fn at(&self, j: usize) -> &S {
        assert!(j >= 1, "the automaton describes iterates from j = 1 on");
        let idx = j - 1;
        if idx < self.preperiod.len() {
            &self.preperiod[idx]
        } else {
            &self.cycle[(idx - self.preperiod.len()) % self.cycle.len()]
        }
    }

    pub fn window(&self) -> usize {
        self.preperiod.len() + self.cycle.len()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterateAutomaton<R, S> {
    pub regions: Vec<R>,
    pub orbits: Vec<RegionOrbit<S>>,
}

impl<R, S> IterateAutomaton<R, S> {
    /// Largest preperiod over all regions.
    pub fn max_preperiod(&self) -> usize {
        self.orbits.iter().map(|o| o.preperiod.len()).max().unwrap_or(0)
    }
}

/// Builds the per-region eventually periodic description of the iterates.
/// Fails with `EmptyImage` if some region's orbit dies.
pub fn iterate_automaton<R: CrSystem>(
    sys: &R,
) -> Result<IterateAutomaton<R::Region, R::Set>, RelationError> {
    let regions = sys.regions();
    let orbits = par::map(&regions, |r| region_orbit(sys, sys.region_image(r)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IterateAutomaton { regions, orbits })
}

fn region_orbit<R: CrSystem>(sys: &R, first: R::Set) -> Result<RegionOrbit<R::Set>, RelationError> {
    let mut seen: HashMap<R::Set, usize> = HashMap::new();
    let mut seq: Vec<R::Set> = Vec::new();
    let mut current = first;
    loop {
        if sys.is_empty_set(&current) {
            return Err(RelationError::EmptyImage {
                step: seq.len() + 1,
            });
        }
        if let Some(&start) = seen.get(&current) {
            let cycle = seq.split_off(start);
            return Ok(RegionOrbit {
                preperiod: seq,
                cycle,
            });
        }
        seen.insert(current.clone(), seq.len());
        let next = sys.image(&current);
        seq.push(current);
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::q;

    fn iv(lo: Scalar, hi: Scalar) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn set(parts: &[(Scalar, Scalar)]) -> IntervalUnion {
        IntervalUnion::normalize(parts.iter().map(|(a, b)| iv(a.clone(), b.clone())).collect())
    }

    fn unit_set() -> IntervalUnion {
        set(&[(q!(0), q!(1))])
    }

    #[test]
    fn image_examples() {
        let f = catalog::monica();
        assert_eq!(f.image(&IntervalUnion::point(q!(1))), unit_set());
        assert_eq!(f.image(&IntervalUnion::point(q!(0))), IntervalUnion::point(q!(0)));
        let full = catalog::full_box();
        assert_eq!(full.image(&IntervalUnion::point(q!(1 / 3))), unit_set());
    }

    #[test]
    fn iterate_examples() {
        let exi = catalog::exi();
        for y in [q!(0), q!(1 / 7), q!(1 / 2), q!(2 / 3), q!(1)] {
            assert_eq!(exi.iterate(&y, 4).unwrap(), unit_set(), "y = {y}");
            assert_eq!(exi.iterate(&y, 0).unwrap(), IntervalUnion::point(y.clone()));
        }
        let c = catalog::constant_one();
        assert_eq!(c.iterate(&q!(1 / 3), 2).unwrap(), IntervalUnion::point(q!(1)));
    }

    #[test]
    fn iterate_reports_first_empty_step() {
        // [0,1/2] x {3/4}: every point of [0,1/2] maps to 3/4, which has no image.
        let f = BoxRelation::new(iv(q!(0), q!(1)), vec![(iv(q!(0), q!(1 / 2)), Interval::point(q!(3 / 4)))])
            .unwrap();
        assert_eq!(
            f.iterate(&q!(0), 3),
            Err(RelationError::EmptyImage { step: 2 })
        );
        assert!(f.image(&IntervalUnion::point(q!(1))).is_empty());
    }

    #[test]
    fn orbit_segment_examples() {
        let f = catalog::monica();
        let seg = f.orbit_segment(&q!(0), 0, 1).unwrap();
        assert_eq!(seg.sets, vec![IntervalUnion::point(q!(0)); 2]);
        let seg = f.orbit_segment(&q!(1), 2, 3).unwrap();
        assert_eq!(seg.sets, vec![unit_set(), unit_set()]);
        assert_eq!(seg.at(3), &unit_set());
        assert_eq!(
            f.orbit_segment(&q!(0), 3, 2),
            Err(RelationError::BadRange { k: 3, l: 2 })
        );

        let space = FiniteMetricSpace::discrete(3);
        let fixed = FiniteRelation::from_pairs(space, &[(1, 1), (0, 2), (2, 0)]).unwrap();
        let seg = fixed.orbit_segment(&1, 0, 3).unwrap();
        assert_eq!(seg.sets, vec![PointSet::singleton(1); 4]);
    }

    #[test]
    fn projections() {
        let m = catalog::monica();
        assert_eq!(m.project(Projection::Second), unit_set());
        let c = catalog::constant_one();
        assert_eq!(c.project(Projection::Second), IntervalUnion::point(q!(1)));
        assert_eq!(c.project(Projection::First), unit_set());
    }

    #[test]
    fn inverse_swaps_factors() {
        let c = catalog::constant_one();
        let inv = c.inverse();
        assert_eq!(inv.boxes(), &[(Interval::point(q!(1)), iv(q!(0), q!(1)))]);
        assert_eq!(inv.inverse(), c);

        let sym = BoxRelation::new(
            iv(q!(0), q!(1)),
            vec![(iv(q!(0), q!(1 / 2)), iv(q!(0), q!(1 / 2)))],
        )
        .unwrap();
        assert_eq!(sym.inverse(), sym);

        let m = catalog::monica();
        let swapped: Vec<_> = m.boxes().iter().map(|(a, b)| (b.clone(), a.clone())).collect();
        assert_eq!(m.inverse().boxes(), swapped.as_slice());
    }

    #[test]
    fn is_function_examples() {
        let space = FiniteMetricSpace::discrete(3);
        let id = FiniteRelation::from_function(space, &[0, 1, 2]).unwrap();
        assert!(id.is_function());
        assert!(catalog::constant_one().is_function());
        assert!(!catalog::monica().is_function());
    }

    #[test]
    fn monica_cells() {
        let cells = catalog::monica().cell_decomposition().cells;
        let shown: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["[0/1, 1/2)", "{1/2}", "(1/2, 1/1)", "{1/1}"]);
    }

    #[test]
    fn single_box_has_one_cell() {
        let cells = catalog::full_box().cell_decomposition().cells;
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].to_string(), "[0/1, 1/1]");
    }

    #[test]
    fn exi_cells_match_five_cases() {
        let cells = catalog::exi().cell_decomposition().cells;
        let shown: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["{0/1}", "(0/1, 1/2)", "{1/2}", "(1/2, 1/1)", "{1/1}"]);
    }

    #[test]
    fn cell_patterns_constant_on_samples() {
        for f in [catalog::monica(), catalog::exi(), catalog::constant_one()] {
            let dec = f.cell_decomposition();
            for k in 0..=64 {
                let y = Scalar::ratio(k, 64);
                let idx = dec.cell_of(&y).expect("cells cover the ambient interval");
                assert_eq!(f.pattern_at(&y), dec.cells[idx].pattern, "y = {y}");
            }
        }
    }

    #[test]
    fn automaton_examples() {
        let c = iterate_automaton(&catalog::constant_one()).unwrap();
        for o in &c.orbits {
            assert!(o.preperiod.is_empty());
            assert_eq!(o.cycle, vec![IntervalUnion::point(q!(1))]);
        }

        let m = iterate_automaton(&catalog::monica()).unwrap();
        assert!(m.orbits[0].preperiod.is_empty());
        assert_eq!(m.orbits[0].cycle, vec![IntervalUnion::point(q!(0))]);
        // (1/2, 1): F(y) = {1}, then [0,1] forever; cross-check at y = 3/4.
        let f = catalog::monica();
        assert_eq!(m.orbits[2].preperiod, vec![IntervalUnion::point(q!(1))]);
        assert_eq!(m.orbits[2].cycle, vec![unit_set()]);
        for j in 1..6 {
            assert_eq!(&f.iterate(&q!(3 / 4), j).unwrap(), m.orbits[2].at(j));
        }
    }

    #[test]
    fn automaton_rejects_dying_cells() {
        let f = BoxRelation::new(iv(q!(0), q!(1)), vec![(iv(q!(0), q!(1 / 2)), iv(q!(0), q!(1)))]).unwrap();
        assert_eq!(
            iterate_automaton(&f).unwrap_err(),
            RelationError::EmptyImage { step: 1 }
        );
    }

    #[test]
    fn box_validation() {
        assert_eq!(
            BoxRelation::new(iv(q!(0), q!(1)), vec![]),
            Err(RelationError::NoBoxes)
        );
        assert_eq!(
            BoxRelation::new(iv(q!(0), q!(1)), vec![(iv(q!(0), q!(2)), iv(q!(0), q!(1)))]),
            Err(RelationError::BoxOutsideAmbient { index: 0 })
        );
        let space = FiniteMetricSpace::discrete(2);
        assert!(matches!(
            FiniteRelation::new(space, vec![vec![true]]),
            Err(RelationError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn preimage_is_image_of_inverse() {
        let m = catalog::monica();
        let z = IntervalUnion::point(q!(0));
        assert_eq!(m.preimage(&z), m.inverse().image(&z));
        assert_eq!(
            m.preimage(&z),
            set(&[(q!(0), q!(1 / 2)), (q!(1), q!(1))])
        );
    }
}
