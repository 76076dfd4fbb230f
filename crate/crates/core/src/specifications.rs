//! Specifications, ε-tracing and exact tracer search.
//!
//! A specification is a list of orbit segments `F^{[k_i, l_i]}(x_i)`; an
//! initial specification has every `k_i = 0` and carries gap lengths `m_i`.
//! Both reduce to a list of [`Demand`]s: "the `e`-th iterate of the tracer
//! must be within ε of this target set". Checking a candidate tracer is a
//! direct evaluation of those demands.
//!
//! Searching for a tracer is exact. Demands with `e >= 1` depend only on the
//! region of the tracer (see [`CrSystem::regions`]), and demands with `e = 0`
//! compare `{y}` with `{x_i}`, which confines `y` to an explicit closed ball.
//! So the search visits every region once, intersected with that ball.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::relations::{CrSystem, FiniteRelation, OrbitSegment, RelationError};
use crate::sets::{PointSet, SetError};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("a specification needs at least one segment")]
    EmptySpecification,
    #[error("expected {expected} gap lengths, got {got}")]
    GapCount { expected: usize, got: usize },
    #[error("gap m_{index} must be at least 1")]
    ZeroGap { index: usize },
    #[error("segments {index} and {next} are not spaced apart (k_{next} - l_{index} = {gap})", next = index + 1)]
    NonPositiveGap { index: usize, gap: i64 },
    #[error("no point reaches {0} in the required number of steps")]
    NoPreimage(String),
    #[error("conjugacy of size {phi} does not match a space of {space} points")]
    SizeMismatch { phi: usize, space: usize },
    #[error("conjugacy is not a bijection")]
    NotBijection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    /// Infimum distance between the two sets.
    Plain,
    /// Hausdorff distance between the two sets.
    Hausdorff,
}

impl fmt::Display for TraceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceMode::Plain => "plain",
            TraceMode::Hausdorff => "hausdorff",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// A list of orbit segments with their iterates materialized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Specification<P, S> {
    segments: Vec<OrbitSegment<P, S>>,
}

impl<P: Clone, S: Clone> Specification<P, S> {
    /// Materializes `F^{[k_i, l_i]}(x_i)` for each `(x_i, k_i, l_i)`.
    pub fn new<R>(sys: &R, triples: &[(P, usize, usize)]) -> Result<Self, SpecError>
    where
        R: CrSystem<Point = P, Set = S>,
    {
        if triples.is_empty() {
            return Err(SpecError::EmptySpecification);
        }
        let segments = triples
            .iter()
            .map(|(x, k, l)| sys.orbit_segment(x, *k, *l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Specification { segments })
    }

    pub fn segments(&self) -> &[OrbitSegment<P, S>] {
        &self.segments
    }

    pub fn triples(&self) -> Vec<(P, usize, usize)> {
        self.segments
            .iter()
            .map(|s| (s.base.clone(), s.k, s.l))
            .collect()
    }

    /// `k_{i+1} - l_i >= spacing` for every consecutive pair.
    pub fn is_n_spaced(&self, spacing: usize) -> bool {
        self.segments
            .windows(2)
            .all(|w| w[1].k as i64 - w[0].l as i64 >= spacing as i64)
    }

    pub fn demands(&self) -> Vec<Demand<'_, P, S>> {
        let mut out = Vec::new();
        for (idx, seg) in self.segments.iter().enumerate() {
            for j in seg.k..=seg.l {
                out.push(Demand {
                    i: idx + 1,
                    j,
                    exponent: j,
                    base: &seg.base,
                    target: seg.at(j),
                });
            }
        }
        out
    }
}

/// Initial orbit segments `F^{[0, l_i]}(x_i)` plus gaps `m_1, ..., m_{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialSpecification<P, S> {
    segments: Vec<OrbitSegment<P, S>>,
    gaps: Vec<usize>,
}

impl<P: Clone, S: Clone> InitialSpecification<P, S> {
    pub fn new<R>(sys: &R, pairs: &[(P, usize)], gaps: &[usize]) -> Result<Self, SpecError>
    where
        R: CrSystem<Point = P, Set = S>,
    {
        if pairs.is_empty() {
            return Err(SpecError::EmptySpecification);
        }
        if gaps.len() != pairs.len() - 1 {
            return Err(SpecError::GapCount {
                expected: pairs.len() - 1,
                got: gaps.len(),
            });
        }
        if let Some(pos) = gaps.iter().position(|&m| m == 0) {
            return Err(SpecError::ZeroGap { index: pos + 1 });
        }
        let segments = pairs
            .iter()
            .map(|(x, l)| sys.orbit_segment(x, 0, *l))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(InitialSpecification {
            segments,
            gaps: gaps.to_vec(),
        })
    }

    pub fn segments(&self) -> &[OrbitSegment<P, S>] {
        &self.segments
    }

    pub fn gaps(&self) -> &[usize] {
        &self.gaps
    }

    /// Same segments, different gaps.
    pub fn with_gaps(&self, gaps: &[usize]) -> Result<Self, SpecError> {
        if gaps.len() != self.gaps.len() {
            return Err(SpecError::GapCount {
                expected: self.gaps.len(),
                got: gaps.len(),
            });
        }
        if let Some(pos) = gaps.iter().position(|&m| m == 0) {
            return Err(SpecError::ZeroGap { index: pos + 1 });
        }
        Ok(InitialSpecification {
            segments: self.segments.clone(),
            gaps: gaps.to_vec(),
        })
    }

    /// Exponent offset of segment `i` (0-based): `l_1 + m_1 + ... + l_i + m_i`
    /// over the preceding segments.
    pub fn offset(&self, idx: usize) -> usize {
        self.segments[..idx]
            .iter()
            .zip(&self.gaps)
            .map(|(s, m)| s.l + m)
            .sum()
    }

    pub fn demands(&self) -> Vec<Demand<'_, P, S>> {
        let mut out = Vec::new();
        for (idx, seg) in self.segments.iter().enumerate() {
            let offset = self.offset(idx);
            for j in 0..=seg.l {
                out.push(Demand {
                    i: idx + 1,
                    j,
                    exponent: offset + j,
                    base: &seg.base,
                    target: seg.at(j),
                });
            }
        }
        out
    }
}

/// One tracing requirement: `dist(F^exponent(y), target) <= ε`, where
/// `target = F^j(x_i)`.
#[derive(Debug, Clone)]
pub struct Demand<'a, P, S> {
    pub i: usize,
    pub j: usize,
    pub exponent: usize,
    pub base: &'a P,
    pub target: &'a S,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub i: usize,
    pub j: usize,
    /// Iterate of the tracer compared at this entry.
    pub exponent: usize,
    pub distance: Scalar,
}

/// Exact distances for one candidate tracer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceReport {
    pub mode: TraceMode,
    pub eps: Scalar,
    pub entries: Vec<TraceEntry>,
    pub verdict: Verdict,
    /// First entry attaining the largest distance.
    pub worst: Option<(usize, usize)>,
    pub worst_distance: Scalar,
}

impl TraceReport {
    pub fn from_entries(mode: TraceMode, eps: Scalar, entries: Vec<TraceEntry>) -> Self {
        let mut worst = None;
        let mut worst_distance = Scalar::zero();
        for e in &entries {
            if worst.is_none() || e.distance > worst_distance {
                worst = Some((e.i, e.j));
                worst_distance = e.distance.clone();
            }
        }
        let verdict = if entries.iter().all(|e| e.distance <= eps) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        TraceReport {
            mode,
            eps,
            entries,
            verdict,
            worst,
            worst_distance,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<&TraceEntry> {
        self.entries.iter().find(|e| e.i == i && e.j == j)
    }

    /// First entry exceeding ε.
    pub fn first_failure(&self) -> Option<&TraceEntry> {
        self.entries.iter().find(|e| e.distance > self.eps)
    }
}

fn distance<R: CrSystem>(sys: &R, mode: TraceMode, a: &R::Set, b: &R::Set) -> Result<Scalar, SetError> {
    match mode {
        TraceMode::Plain => sys.set_distance(a, b),
        TraceMode::Hausdorff => sys.hausdorff_distance(a, b),
    }
}

/// Evaluates every demand for the candidate `y`.
pub fn evaluate_demands<R: CrSystem>(
    sys: &R,
    demands: &[Demand<'_, R::Point, R::Set>],
    y: &R::Point,
    eps: &Scalar,
    mode: TraceMode,
) -> Result<TraceReport, SpecError> {
    let top = demands.iter().map(|d| d.exponent).max().unwrap_or(0);
    let orbit = sys.orbit(y, top)?;
    let entries = demands
        .iter()
        .map(|d| {
            Ok(TraceEntry {
                i: d.i,
                j: d.j,
                exponent: d.exponent,
                distance: distance(sys, mode, &orbit[d.exponent], d.target)?,
            })
        })
        .collect::<Result<Vec<_>, SetError>>()?;
    Ok(TraceReport::from_entries(mode, eps.clone(), entries))
}

/// Checks whether `y` ε-traces the specification.
pub fn check_trace<R: CrSystem>(
    sys: &R,
    spec: &Specification<R::Point, R::Set>,
    y: &R::Point,
    eps: &Scalar,
    mode: TraceMode,
) -> Result<TraceReport, SpecError> {
    evaluate_demands(sys, &spec.demands(), y, eps, mode)
}

/// Checks whether `y` traces the initial specification with its gaps.
pub fn check_initial_trace<R: CrSystem>(
    sys: &R,
    spec: &InitialSpecification<R::Point, R::Set>,
    y: &R::Point,
    eps: &Scalar,
    mode: TraceMode,
) -> Result<TraceReport, SpecError> {
    evaluate_demands(sys, &spec.demands(), y, eps, mode)
}

/// Evaluation of one region: the point tested and its report.
#[derive(Debug, Clone, Serialize)]
pub struct RegionOutcome<G, P> {
    pub region: G,
    pub representative: P,
    /// Whether the region meets the set allowed by the `e = 0` demands.
    pub meets_constraint: bool,
    pub report: TraceReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct TracerWitness<G, P> {
    pub y: P,
    pub region: G,
    pub report: TraceReport,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TracerSearch<G, P> {
    Witness(TracerWitness<G, P>),
    /// Every region fails; one row per region in region order.
    NoTracer { table: Vec<RegionOutcome<G, P>> },
}

impl<G, P> TracerSearch<G, P> {
    pub fn witness(&self) -> Option<&TracerWitness<G, P>> {
        match self {
            TracerSearch::Witness(w) => Some(w),
            TracerSearch::NoTracer { .. } => None,
        }
    }

    pub fn table(&self) -> Option<&[RegionOutcome<G, P>]> {
        match self {
            TracerSearch::Witness(_) => None,
            TracerSearch::NoTracer { table } => Some(table),
        }
    }
}

type OutcomeOf<R> = RegionOutcome<<R as CrSystem>::Region, <R as CrSystem>::Point>;

/// Evaluates every region and returns all outcomes in region order.
pub fn survey_regions<R: CrSystem>(
    sys: &R,
    demands: &[Demand<'_, R::Point, R::Set>],
    eps: &Scalar,
    mode: TraceMode,
) -> Result<Vec<OutcomeOf<R>>, SpecError> {
    // Demands on F^0(y) = {y} are against F^0(x_i) = {x_i}; for singletons
    // both modes reduce to |y - x_i| <= ε, i.e. the closed ball around x_i.
    let mut constraint = sys.ambient_set();
    let mut preferred = Vec::new();
    for d in demands.iter().filter(|d| d.exponent == 0) {
        constraint = sys.intersection(&constraint, &sys.neighborhood(eps, d.target)?);
        preferred.push(d.base.clone());
    }
    let regions = sys.regions();
    par::map(&regions, |r| {
        let picked = if sys.is_empty_set(&constraint) {
            None
        } else {
            sys.region_pick(r, &constraint, &preferred)
        };
        let meets_constraint = picked.is_some();
        let representative = picked.unwrap_or_else(|| sys.region_representative(r));
        let report = evaluate_demands(sys, demands, &representative, eps, mode)?;
        Ok(RegionOutcome {
            region: r.clone(),
            representative,
            meets_constraint,
            report,
        })
    })
    .into_iter()
    .collect()
}

fn search<R: CrSystem>(
    sys: &R,
    demands: &[Demand<'_, R::Point, R::Set>],
    eps: &Scalar,
    mode: TraceMode,
) -> Result<TracerSearch<R::Region, R::Point>, SpecError> {
    let table = survey_regions(sys, demands, eps, mode)?;
    // Smallest worst distance wins; ties go to the earlier region.
    let best = table
        .iter()
        .enumerate()
        .filter(|(_, o)| o.report.passed())
        .min_by(|(a, x), (b, y)| x.report.worst_distance.cmp(&y.report.worst_distance).then(a.cmp(b)))
        .map(|(idx, _)| idx);
    match best {
        Some(idx) => {
            let o = table.into_iter().nth(idx).expect("index in range");
            Ok(TracerSearch::Witness(TracerWitness {
                y: o.representative,
                region: o.region,
                report: o.report,
            }))
        }
        None => Ok(TracerSearch::NoTracer { table }),
    }
}

/// Decides exactly whether some point ε-traces `spec`.
pub fn find_tracer<R: CrSystem>(
    sys: &R,
    spec: &Specification<R::Point, R::Set>,
    eps: &Scalar,
    mode: TraceMode,
) -> Result<TracerSearch<R::Region, R::Point>, SpecError> {
    search(sys, &spec.demands(), eps, mode)
}

/// Decides exactly whether some point traces the initial specification.
pub fn find_initial_tracer<R: CrSystem>(
    sys: &R,
    spec: &InitialSpecification<R::Point, R::Set>,
    eps: &Scalar,
    mode: TraceMode,
) -> Result<TracerSearch<R::Region, R::Point>, SpecError> {
    search(sys, &spec.demands(), eps, mode)
}

/// Where each base `z_i` of a derived initial specification came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseProvenance<P, S> {
    pub i: usize,
    pub x: P,
    pub k: usize,
    /// `F^{k_i}(x_i)`, the set `z_i` was chosen from.
    pub source: S,
    pub z: P,
}

/// Turns a spaced specification into an initial one: bases
/// `z_i = min F^{k_i}(x_i)`, lengths `l_i - k_i`, gaps `k_{i+1} - l_i`.
#[allow(clippy::type_complexity)]
pub fn derive_initial<R: CrSystem>(
    sys: &R,
    spec: &Specification<R::Point, R::Set>,
) -> Result<
    (
        InitialSpecification<R::Point, R::Set>,
        Vec<BaseProvenance<R::Point, R::Set>>,
    ),
    SpecError,
> {
    let segs = spec.segments();
    let mut gaps = Vec::with_capacity(segs.len().saturating_sub(1));
    for (idx, w) in segs.windows(2).enumerate() {
        let gap = w[1].k as i64 - w[0].l as i64;
        if gap < 1 {
            return Err(SpecError::NonPositiveGap {
                index: idx + 1,
                gap,
            });
        }
        gaps.push(gap as usize);
    }
    let mut pairs = Vec::with_capacity(segs.len());
    let mut provenance = Vec::with_capacity(segs.len());
    for (idx, seg) in segs.iter().enumerate() {
        let source = seg.at(seg.k).clone();
        let z = sys
            .min_element(&source)
            .ok_or(RelationError::EmptyImage { step: seg.k })?;
        pairs.push((z.clone(), seg.l - seg.k));
        provenance.push(BaseProvenance {
            i: idx + 1,
            x: seg.base.clone(),
            k: seg.k,
            source,
            z,
        });
    }
    let initial = InitialSpecification::new(sys, &pairs, &gaps)?;
    Ok((initial, provenance))
}

/// `{y : z ∈ F^{k_1}(y)}` for the first segment of `spec`.
pub fn lift_tracer<R: CrSystem>(
    sys: &R,
    spec: &Specification<R::Point, R::Set>,
    z: &R::Point,
) -> Result<R::Set, SpecError> {
    sys.check_point(z)?;
    let k1 = spec.segments()[0].k;
    let mut set = sys.singleton(z);
    for _ in 0..k1 {
        set = sys.preimage(&set);
        if sys.is_empty_set(&set) {
            return Err(SpecError::NoPreimage(z.to_string()));
        }
    }
    Ok(set)
}

fn invert_permutation(phi: &[usize]) -> Result<Vec<usize>, SpecError> {
    let n = phi.len();
    let mut inv = vec![usize::MAX; n];
    for (x, &y) in phi.iter().enumerate() {
        if y >= n || inv[y] != usize::MAX {
            return Err(SpecError::NotBijection);
        }
        inv[y] = x;
    }
    Ok(inv)
}

/// The system `G` on `Y` making `phi: X -> Y` an isometric conjugacy from
/// `sys`: `(phi(a), phi(b)) ∈ G` iff `(a, b) ∈ F`, `d_Y(phi a, phi b) = d_X(a, b)`.
pub fn conjugate_system(sys: &FiniteRelation, phi: &[usize]) -> Result<FiniteRelation, SpecError> {
    let n = sys.len();
    if phi.len() != n {
        return Err(SpecError::SizeMismatch {
            phi: phi.len(),
            space: n,
        });
    }
    let inv = invert_permutation(phi)?;
    let dist = (0..n)
        .map(|u| (0..n).map(|v| sys.space().d(inv[u], inv[v]).clone()).collect())
        .collect();
    let adjacency = (0..n)
        .map(|u| (0..n).map(|v| sys.has(inv[u], inv[v])).collect())
        .collect();
    let space = crate::sets::FiniteMetricSpace::new(dist)?;
    Ok(FiniteRelation::new(space, adjacency)?)
}

/// Pulls a specification on `Y` back to `X = sys` through `phi: X -> Y`:
/// same `(k_i, l_i)`, bases `phi^{-1}(y_i)`.
pub fn conjugacy_transport(
    sys: &FiniteRelation,
    phi: &[usize],
    spec: &Specification<usize, PointSet>,
) -> Result<Specification<usize, PointSet>, SpecError> {
    let inv = transport_map(sys, phi)?;
    let triples: Vec<_> = spec
        .triples()
        .into_iter()
        .map(|(y, k, l)| Ok((*inv.get(y).ok_or(SpecError::NotBijection)?, k, l)))
        .collect::<Result<_, SpecError>>()?;
    Specification::new(sys, &triples)
}

/// Initial-specification variant of [`conjugacy_transport`]; gaps unchanged.
pub fn conjugacy_transport_initial(
    sys: &FiniteRelation,
    phi: &[usize],
    spec: &InitialSpecification<usize, PointSet>,
) -> Result<InitialSpecification<usize, PointSet>, SpecError> {
    let inv = transport_map(sys, phi)?;
    let pairs: Vec<_> = spec
        .segments()
        .iter()
        .map(|s| Ok((*inv.get(s.base).ok_or(SpecError::NotBijection)?, s.l)))
        .collect::<Result<_, SpecError>>()?;
    InitialSpecification::new(sys, &pairs, spec.gaps())
}

fn transport_map(sys: &FiniteRelation, phi: &[usize]) -> Result<Vec<usize>, SpecError> {
    if phi.len() != sys.len() {
        return Err(SpecError::SizeMismatch {
            phi: phi.len(),
            space: sys.len(),
        });
    }
    invert_permutation(phi)
}
