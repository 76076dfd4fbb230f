//! Certificates for sufficient conditions, bounded refutations, and the
//! randomized implication suite.
//!
//! Nothing here decides a global property. A certificate is evidence for a
//! sufficient condition; a refutation says that for one ε, one template and
//! every tested spacing no point traces; anything else is inconclusive.

use std::fmt;
use std::ops::RangeInclusive;

use num_integer::lcm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::relations::{iterate_automaton, BoxRelation, CrSystem, FiniteRelation, RelationError};
use crate::sets::{FiniteMetricSpace, Interval, IntervalUnion, SetError};
use crate::specifications::{
    check_initial_trace, check_trace, conjugacy_transport, conjugacy_transport_initial,
    conjugate_system, derive_initial, find_initial_tracer, find_tracer, lift_tracer,
    InitialSpecification, SpecError, Specification, TraceMode, TracerSearch,
};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerdictError {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("{property} needs a {expected} template")]
    TemplateMismatch {
        property: PropertyTag,
        expected: &'static str,
    },
    #[error("empty parameter range")]
    EmptyRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateTag {
    CommonImage,
    FullImage,
    EventualHausdorff,
    EventualEqual,
    TrivialFiber,
}

impl fmt::Display for CertificateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateTag::CommonImage => "common-image",
            CertificateTag::FullImage => "full-image",
            CertificateTag::EventualHausdorff => "eventual-hausdorff",
            CertificateTag::EventualEqual => "eventual-equal",
            CertificateTag::TrivialFiber => "trivial-fiber",
        })
    }
}

/// A point shared by the `n0`-th images of two regions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonPoint<G, P> {
    pub a: G,
    pub b: G,
    pub point: P,
}

/// The largest Hausdorff distance between two regions' images over the
/// checked window `n0 ..= last`, which covers a full period of the pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairBound<G> {
    pub a: G,
    pub b: G,
    pub last: usize,
    pub worst: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence<G, P, S> {
    CommonPoints { pairs: Vec<CommonPoint<G, P>> },
    Images { images: Vec<(G, S)> },
    PairBounds { eps: Scalar, pairs: Vec<PairBound<G>> },
    Fiber { x0: P },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate<G, P, S> {
    pub tag: CertificateTag,
    pub n0: usize,
    pub evidence: Evidence<G, P, S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Certification<G, P, S> {
    Certificate(Certificate<G, P, S>),
    NotFound { searched_up_to: usize },
}

impl<G, P, S> Certification<G, P, S> {
    pub fn certificate(&self) -> Option<&Certificate<G, P, S>> {
        match self {
            Certification::Certificate(c) => Some(c),
            Certification::NotFound { .. } => None,
        }
    }
}

type CertOf<R> = Certification<<R as CrSystem>::Region, <R as CrSystem>::Point, <R as CrSystem>::Set>;

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect()
}

/// Smallest `n0 <= n0_max` such that the `n0`-th images of any two points
/// intersect.
pub fn certify_common_image<R: CrSystem>(sys: &R, n0_max: usize) -> Result<CertOf<R>, VerdictError> {
    let auto = iterate_automaton(sys)?;
    let idx = pairs(auto.regions.len());
    for n0 in 1..=n0_max {
        let found = par::map(&idx, |&(a, b)| {
            let common = sys.intersection(auto.orbits[a].at(n0), auto.orbits[b].at(n0));
            sys.min_element(&common).map(|point| CommonPoint {
                a: auto.regions[a].clone(),
                b: auto.regions[b].clone(),
                point,
            })
        });
        if found.iter().all(Option::is_some) {
            return Ok(Certification::Certificate(Certificate {
                tag: CertificateTag::CommonImage,
                n0,
                evidence: Evidence::CommonPoints {
                    pairs: found.into_iter().flatten().collect(),
                },
            }));
        }
    }
    Ok(Certification::NotFound { searched_up_to: n0_max })
}

/// Smallest `n0 <= n0_max` with `F^{n0}(y) = X` for every `y`.
pub fn certify_full_image<R: CrSystem>(sys: &R, n0_max: usize) -> Result<CertOf<R>, VerdictError> {
    let auto = iterate_automaton(sys)?;
    let full = sys.ambient_set();
    for n0 in 1..=n0_max {
        if auto.orbits.iter().all(|o| *o.at(n0) == full) {
            return Ok(Certification::Certificate(Certificate {
                tag: CertificateTag::FullImage,
                n0,
                evidence: Evidence::Images {
                    images: auto
                        .regions
                        .iter()
                        .zip(&auto.orbits)
                        .map(|(r, o)| (r.clone(), o.at(n0).clone()))
                        .collect(),
                },
            }));
        }
    }
    Ok(Certification::NotFound { searched_up_to: n0_max })
}

/// Smallest `n0 <= n0_max` with `H(F^{n0+j}(x), F^{n0+j}(y)) <= ε` for all
/// `j >= 0` and all `x, y`. Tagged eventual-equal when the images coincide.
pub fn certify_eventual_hausdorff<R: CrSystem>(
    sys: &R,
    eps: &Scalar,
    n0_max: usize,
) -> Result<CertOf<R>, VerdictError> {
    let auto = iterate_automaton(sys)?;
    let idx = pairs(auto.regions.len());
    for n0 in 1..=n0_max {
        // Both orbits are periodic from step max(preperiods) + 1 on, with
        // period dividing the lcm of the cycle lengths.
        let bounds = par::map(&idx, |&(a, b)| -> Result<PairBound<R::Region>, SetError> {
            let (oa, ob) = (&auto.orbits[a], &auto.orbits[b]);
            let settled = oa.preperiod.len().max(ob.preperiod.len()) + 1;
            let last = n0.max(settled) + lcm(oa.cycle.len(), ob.cycle.len()) - 1;
            let mut worst = Scalar::zero();
            for j in n0..=last {
                let h = sys.hausdorff_distance(oa.at(j), ob.at(j))?;
                if h > worst {
                    worst = h;
                }
            }
            Ok(PairBound {
                a: auto.regions[a].clone(),
                b: auto.regions[b].clone(),
                last,
                worst,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        if bounds.iter().all(|p| p.worst <= *eps) {
            let equal = bounds.iter().all(|p| p.worst.is_zero());
            return Ok(Certification::Certificate(Certificate {
                tag: if equal {
                    CertificateTag::EventualEqual
                } else {
                    CertificateTag::EventualHausdorff
                },
                n0,
                evidence: Evidence::PairBounds {
                    eps: eps.clone(),
                    pairs: bounds,
                },
            }));
        }
    }
    Ok(Certification::NotFound { searched_up_to: n0_max })
}

/// Finds `x0` with `X × {x0} ⊆ F`, the least one if several exist.
pub fn certify_trivial_fiber<R: CrSystem>(sys: &R) -> CertOf<R> {
    let mut common = sys.ambient_set();
    for r in sys.regions() {
        common = sys.intersection(&common, &sys.region_image(&r));
    }
    match sys.min_element(&common) {
        Some(x0) => Certification::Certificate(Certificate {
            tag: CertificateTag::TrivialFiber,
            n0: 1,
            evidence: Evidence::Fiber { x0 },
        }),
        None => Certification::NotFound { searched_up_to: 1 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PropertyTag {
    SP,
    HSP,
    ISP,
    HISP,
}

impl PropertyTag {
    pub fn mode(self) -> TraceMode {
        match self {
            PropertyTag::SP | PropertyTag::ISP => TraceMode::Plain,
            PropertyTag::HSP | PropertyTag::HISP => TraceMode::Hausdorff,
        }
    }

    pub fn is_initial(self) -> bool {
        matches!(self, PropertyTag::ISP | PropertyTag::HISP)
    }
}

impl fmt::Display for PropertyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for PropertyTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SP" => Ok(PropertyTag::SP),
            "HSP" => Ok(PropertyTag::HSP),
            "ISP" => Ok(PropertyTag::ISP),
            "HISP" => Ok(PropertyTag::HISP),
            _ => Err(format!("unknown property `{s}`")),
        }
    }
}

/// A specification family indexed by one integer parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Template<P> {
    /// First segment `(x_1; k_1, l_1)`; each later `(x_i; len_i)` starts at
    /// `k_i = l_{i-1} + N` and ends at `l_i = k_i + len_i`.
    Spaced {
        first: (P, usize, usize),
        rest: Vec<(P, usize)>,
    },
    /// Segments `(x_i; l_i)` with every gap equal to the parameter `m`.
    Initial { segments: Vec<(P, usize)> },
}

impl<P: Clone> Template<P> {
    pub fn spaced_triples(first: &(P, usize, usize), rest: &[(P, usize)], spacing: usize) -> Vec<(P, usize, usize)> {
        let mut out = vec![first.clone()];
        let mut last_l = first.2;
        for (x, len) in rest {
            let k = last_l + spacing;
            out.push((x.clone(), k, k + len));
            last_l = k + len;
        }
        out
    }
}

/// The tracer search for one value of the template parameter.
#[derive(Debug, Clone, Serialize)]
pub struct Instantiation<G, P> {
    pub parameter: usize,
    pub search: TracerSearch<G, P>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Refutation<G, P> {
    pub property: PropertyTag,
    pub eps: Scalar,
    pub template: Template<P>,
    pub range: (usize, usize),
    pub instantiations: Vec<Instantiation<G, P>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum RefuteOutcome<G, P> {
    /// Every instantiation has no tracer.
    Refutation(Refutation<G, P>),
    /// Some instantiation has a tracer; the same tables are kept.
    Inconclusive(Refutation<G, P>),
}

impl<G, P> RefuteOutcome<G, P> {
    pub fn is_refutation(&self) -> bool {
        matches!(self, RefuteOutcome::Refutation(_))
    }

    pub fn report(&self) -> &Refutation<G, P> {
        match self {
            RefuteOutcome::Refutation(r) | RefuteOutcome::Inconclusive(r) => r,
        }
    }
}

/// Instantiates `template` for every parameter in `range` and searches for a
/// tracer in the mode `property` prescribes.
pub fn refute_property<R: CrSystem>(
    sys: &R,
    property: PropertyTag,
    eps: &Scalar,
    template: &Template<R::Point>,
    range: RangeInclusive<usize>,
) -> Result<RefuteOutcome<R::Region, R::Point>, VerdictError> {
    match (template, property.is_initial()) {
        (Template::Spaced { .. }, true) => {
            return Err(VerdictError::TemplateMismatch {
                property,
                expected: "initial",
            })
        }
        (Template::Initial { .. }, false) => {
            return Err(VerdictError::TemplateMismatch {
                property,
                expected: "spaced",
            })
        }
        _ => {}
    }
    if range.is_empty() {
        return Err(VerdictError::EmptyRange);
    }
    let params: Vec<usize> = range.clone().collect();
    let mode = property.mode();
    let instantiations = par::map(&params, |&p| -> Result<_, VerdictError> {
        let search = match template {
            Template::Spaced { first, rest } => {
                let spec = Specification::new(sys, &Template::spaced_triples(first, rest, p))?;
                find_tracer(sys, &spec, eps, mode)?
            }
            Template::Initial { segments } => {
                let gaps = vec![p; segments.len().saturating_sub(1)];
                let spec = InitialSpecification::new(sys, segments, &gaps)?;
                find_initial_tracer(sys, &spec, eps, mode)?
            }
        };
        Ok(Instantiation { parameter: p, search })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let refuted = instantiations.iter().all(|i| i.search.witness().is_none());
    let report = Refutation {
        property,
        eps: eps.clone(),
        template: template.clone(),
        range: (*range.start(), *range.end()),
        instantiations,
    };
    Ok(if refuted {
        RefuteOutcome::Refutation(report)
    } else {
        RefuteOutcome::Inconclusive(report)
    })
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

/// A rational in `[0, 1]` with denominator at most `max_den`.
pub fn random_unit_rational<G: Rng>(rng: &mut G, max_den: i64) -> Scalar {
    let den = rng.random_range(1..=max_den);
    Scalar::ratio(rng.random_range(0..=den), den)
}

fn random_interval<G: Rng>(rng: &mut G, max_den: i64) -> Interval {
    let a = random_unit_rational(rng, max_den);
    if rng.random_bool(0.3) {
        return Interval::point(a);
    }
    let b = random_unit_rational(rng, max_den);
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    Interval::new(lo, hi).expect("ordered")
}

/// A non-empty union of up to `max_parts` random intervals in `[0, 1]`.
pub fn random_interval_union<G: Rng>(rng: &mut G, max_parts: usize) -> IntervalUnion {
    let n = rng.random_range(1..=max_parts);
    IntervalUnion::normalize((0..n).map(|_| random_interval(rng, 8)).collect())
}

/// A box relation on `[0, 1]` with at most `max_boxes` boxes, endpoint
/// denominators at most 8, and `p1(F) = [0, 1]`.
pub fn random_box_relation<G: Rng>(rng: &mut G, max_boxes: usize) -> BoxRelation {
    let total = rng.random_range(1..=max_boxes);
    let pieces = rng.random_range(1..=total);
    let mut cuts: Vec<Scalar> = (1..pieces).map(|_| random_unit_rational(rng, 8)).collect();
    cuts.push(Scalar::zero());
    cuts.push(Scalar::one());
    cuts.sort();
    cuts.dedup();
    let mut boxes: Vec<(Interval, Interval)> = cuts
        .windows(2)
        .map(|w| {
            (
                Interval::new(w[0].clone(), w[1].clone()).expect("sorted"),
                random_interval(rng, 8),
            )
        })
        .collect();
    while boxes.len() < total {
        boxes.push((random_interval(rng, 8), random_interval(rng, 8)));
    }
    let unit = Interval::new(Scalar::zero(), Scalar::one()).expect("unit");
    BoxRelation::new(unit, boxes).expect("boxes inside the unit interval")
}

/// `n` distinct points on a line with small rational coordinates.
pub fn random_line_space<G: Rng>(rng: &mut G, n: usize) -> FiniteMetricSpace {
    let mut coords: Vec<Scalar> = Vec::with_capacity(n);
    while coords.len() < n {
        let c = Scalar::ratio(rng.random_range(0..=16), rng.random_range(1..=4));
        if !coords.contains(&c) {
            coords.push(c);
        }
    }
    FiniteMetricSpace::on_line(&coords)
}

/// A relation on `space` with every row non-empty, and every column
/// non-empty when `onto` is set.
pub fn random_finite_relation<G: Rng>(rng: &mut G, space: FiniteMetricSpace, onto: bool) -> FiniteRelation {
    let n = space.len();
    let density = rng.random_range(0.15..0.6);
    let mut adj: Vec<Vec<bool>> = (0..n).map(|_| (0..n).map(|_| rng.random_bool(density)).collect()).collect();
    for row in adj.iter_mut() {
        if !row.iter().any(|&b| b) {
            row[rng.random_range(0..n)] = true;
        }
    }
    if onto {
        #[allow(clippy::needless_range_loop)]
        for col in 0..n {
            if !(0..n).any(|r| adj[r][col]) {
                adj[rng.random_range(0..n)][col] = true;
            }
        }
    }
    FiniteRelation::new(space, adj).expect("square")
}

fn random_permutation<G: Rng>(rng: &mut G, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

fn random_eps<G: Rng>(rng: &mut G) -> Scalar {
    const CHOICES: [(i64, i64); 6] = [(0, 1), (1, 8), (1, 4), (1, 3), (1, 2), (1, 1)];
    let (a, b) = CHOICES[rng.random_range(0..CHOICES.len())];
    Scalar::ratio(a, b)
}

/// Up to three segments with positive gaps between them.
fn random_spaced_triples<G: Rng, P>(rng: &mut G, mut point: impl FnMut(&mut G) -> P) -> Vec<(P, usize, usize)> {
    let n = rng.random_range(1..=3);
    let mut out = Vec::with_capacity(n);
    let mut k = rng.random_range(0..=2);
    for _ in 0..n {
        let l = k + rng.random_range(0..=2);
        out.push((point(rng), k, l));
        k = l + rng.random_range(1..=3);
    }
    out
}

// ---------------------------------------------------------------------------
// Implication suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Implication {
    /// `d(A, B) <= H(A, B)` for interval unions.
    DistanceBelowHausdorff,
    /// A Hausdorff trace passing implies the plain trace passes.
    HausdorffImpliesPlain,
    /// An initial tracer of the derived specification lifts to a tracer.
    InitialRoundTrip,
    /// Isometric conjugacy preserves every trace report.
    ConjugacyInvariance,
    /// On graphs of functions the relation checkers match pointwise ones.
    FunctionAgreement,
    /// Iterate automata of `r` boxes repeat within `2^r` steps.
    AutomatonPeriod,
}

impl Implication {
    pub const ALL: [Implication; 6] = [
        Implication::DistanceBelowHausdorff,
        Implication::HausdorffImpliesPlain,
        Implication::InitialRoundTrip,
        Implication::ConjugacyInvariance,
        Implication::FunctionAgreement,
        Implication::AutomatonPeriod,
    ];

    fn salt(self) -> u64 {
        Implication::ALL.iter().position(|&i| i == self).expect("listed") as u64 + 1
    }
}

impl fmt::Display for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Implication::DistanceBelowHausdorff => "distance-below-hausdorff",
            Implication::HausdorffImpliesPlain => "hausdorff-implies-plain",
            Implication::InitialRoundTrip => "initial-round-trip",
            Implication::ConjugacyInvariance => "conjugacy-invariance",
            Implication::FunctionAgreement => "function-agreement",
            Implication::AutomatonPeriod => "automaton-period",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceFailure {
    pub index: usize,
    /// Seed that regenerates this instance alone.
    pub seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertyVerdict {
    pub implication: Implication,
    pub seed: u64,
    pub instances: usize,
    /// Instances where the hypothesis held, so the conclusion was tested.
    pub exercised: usize,
    pub failures: Vec<InstanceFailure>,
}

impl PropertyVerdict {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Per-instance seed; mixes the suite seed, the implication and the index.
pub fn instance_seed(seed: u64, implication: Implication, index: usize) -> u64 {
    let mut z = seed ^ implication.salt().wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Outcome of one instance: `Ok(true)` exercised, `Ok(false)` vacuous.
type InstanceResult = Result<bool, String>;

/// Runs `count` instances of one implication.
pub fn run_implication(implication: Implication, seed: u64, count: usize) -> PropertyVerdict {
    let results = par::map_range(0..count, |i| {
        let s = instance_seed(seed, implication, i);
        (s, run_instance(implication, s))
    });
    let mut exercised = 0;
    let mut failures = Vec::new();
    for (index, (s, r)) in results.into_iter().enumerate() {
        match r {
            Ok(true) => exercised += 1,
            Ok(false) => {}
            Err(detail) => failures.push(InstanceFailure {
                index,
                seed: s,
                detail,
            }),
        }
    }
    PropertyVerdict {
        implication,
        seed,
        instances: count,
        exercised,
        failures,
    }
}

/// Every implication, `count` instances each.
pub fn implication_suite(seed: u64, count: usize) -> Vec<PropertyVerdict> {
    Implication::ALL
        .iter()
        .map(|&imp| run_implication(imp, seed, count))
        .collect()
}

/// Runs the single instance generated by `instance_seed`.
pub fn run_instance(implication: Implication, instance_seed: u64) -> InstanceResult {
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
    match implication {
        Implication::DistanceBelowHausdorff => distance_below_hausdorff(&mut rng),
        Implication::HausdorffImpliesPlain => {
            if rng.random_bool(0.5) {
                hausdorff_implies_plain_box(&mut rng)
            } else {
                hausdorff_implies_plain_finite(&mut rng)
            }
        }
        Implication::InitialRoundTrip => initial_round_trip(&mut rng),
        Implication::ConjugacyInvariance => conjugacy_invariance(&mut rng),
        Implication::FunctionAgreement => function_agreement(&mut rng),
        Implication::AutomatonPeriod => automaton_period(&mut rng),
    }
}

fn err<E: fmt::Display>(e: E) -> String {
    e.to_string()
}

fn distance_below_hausdorff(rng: &mut ChaCha8Rng) -> InstanceResult {
    let a = random_interval_union(rng, 4);
    let b = random_interval_union(rng, 4);
    let d = a.set_distance(&b).map_err(err)?;
    let h = a.hausdorff_distance(&b).map_err(err)?;
    if d > h {
        return Err(format!("d({a}, {b}) = {d} > H = {h}"));
    }
    Ok(true)
}

fn hausdorff_implies_plain<R: CrSystem>(
    sys: &R,
    triples: &[(R::Point, usize, usize)],
    y: &R::Point,
    eps: &Scalar,
) -> InstanceResult {
    let spec = Specification::new(sys, triples).map_err(err)?;
    let h = check_trace(sys, &spec, y, eps, TraceMode::Hausdorff).map_err(err)?;
    let p = check_trace(sys, &spec, y, eps, TraceMode::Plain).map_err(err)?;
    for (eh, ep) in h.entries.iter().zip(&p.entries) {
        if ep.distance > eh.distance {
            return Err(format!(
                "y = {y}: entry ({}, {}) has d = {} > H = {}",
                ep.i, ep.j, ep.distance, eh.distance
            ));
        }
    }
    if h.passed() && !p.passed() {
        return Err(format!("y = {y}, eps = {eps}: Hausdorff passes but plain fails"));
    }
    Ok(h.passed())
}

fn hausdorff_implies_plain_box(rng: &mut ChaCha8Rng) -> InstanceResult {
    let f = random_box_relation(rng, 5);
    let triples = random_spaced_triples(rng, |r| random_unit_rational(r, 8));
    let y = if rng.random_bool(0.5) {
        triples[0].0.clone()
    } else {
        random_unit_rational(rng, 8)
    };
    let eps = random_eps(rng);
    hausdorff_implies_plain(&f, &triples, &y, &eps)
}

fn hausdorff_implies_plain_finite(rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rng.random_range(2..=6);
    let space = random_line_space(rng, n);
    let f = random_finite_relation(rng, space, false);
    let triples = random_spaced_triples(rng, |r| r.random_range(0..n));
    let y = if rng.random_bool(0.5) {
        triples[0].0
    } else {
        rng.random_range(0..n)
    };
    let eps = Scalar::ratio(rng.random_range(0..=8), 2);
    hausdorff_implies_plain(&f, &triples, &y, &eps)
}

fn initial_round_trip(rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rng.random_range(2..=6);
    let space = if rng.random_bool(0.5) {
        FiniteMetricSpace::discrete(n)
    } else {
        random_line_space(rng, n)
    };
    let f = random_finite_relation(rng, space, true);
    let triples = random_spaced_triples(rng, |r| r.random_range(0..n));
    let eps = Scalar::ratio(rng.random_range(0..=6), 2);
    let spec = Specification::new(&f, &triples).map_err(err)?;
    let (initial, _) = derive_initial(&f, &spec).map_err(err)?;
    let found = find_initial_tracer(&f, &initial, &eps, TraceMode::Plain).map_err(err)?;
    let Some(w) = found.witness() else {
        return Ok(false);
    };
    let lifted = lift_tracer(&f, &spec, &w.y).map_err(err)?;
    for y in lifted.iter() {
        let r = check_trace(&f, &spec, &y, &eps, TraceMode::Plain).map_err(err)?;
        if !r.passed() {
            let bad = r.first_failure().expect("failed report");
            return Err(format!(
                "initial tracer {} lifts to {y}, which fails at ({}, {}) with {}",
                w.y, bad.i, bad.j, bad.distance
            ));
        }
    }
    if find_tracer(&f, &spec, &eps, TraceMode::Plain).map_err(err)?.witness().is_none() {
        return Err("lifted tracer exists but the tracer search found none".into());
    }
    Ok(true)
}

fn conjugacy_invariance(rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rng.random_range(2..=6);
    let space = random_line_space(rng, n);
    let f = random_finite_relation(rng, space, false);
    let phi = random_permutation(rng, n);
    let g = conjugate_system(&f, &phi).map_err(err)?;
    let eps = Scalar::ratio(rng.random_range(0..=8), 2);

    let triples = random_spaced_triples(rng, |r| r.random_range(0..n));
    let on_g = Specification::new(&g, &triples).map_err(err)?;
    let on_f = conjugacy_transport(&f, &phi, &on_g).map_err(err)?;

    let pairs: Vec<(usize, usize)> = triples.iter().map(|t| (t.0, t.2 - t.1)).collect();
    let gaps: Vec<usize> = (1..pairs.len()).map(|_| rng.random_range(1..=3)).collect();
    let init_g = InitialSpecification::new(&g, &pairs, &gaps).map_err(err)?;
    let init_f = conjugacy_transport_initial(&f, &phi, &init_g).map_err(err)?;

    for mode in [TraceMode::Plain, TraceMode::Hausdorff] {
        #[allow(clippy::needless_range_loop)]
        for x in 0..n {
            let a = check_trace(&f, &on_f, &x, &eps, mode).map_err(err)?;
            let b = check_trace(&g, &on_g, &phi[x], &eps, mode).map_err(err)?;
            if a != b {
                return Err(format!("{mode} report at x = {x} differs from phi(x) = {}", phi[x]));
            }
            let a = check_initial_trace(&f, &init_f, &x, &eps, mode).map_err(err)?;
            let b = check_initial_trace(&g, &init_g, &phi[x], &eps, mode).map_err(err)?;
            if a != b {
                return Err(format!("{mode} initial report at x = {x} differs"));
            }
        }
        let a = find_tracer(&f, &on_f, &eps, mode).map_err(err)?.witness().is_some();
        let b = find_tracer(&g, &on_g, &eps, mode).map_err(err)?.witness().is_some();
        if a != b {
            return Err(format!("{mode} tracer existence differs: {a} vs {b}"));
        }
    }
    Ok(true)
}

/// `d(f^j(y), f^j(x_i))` computed directly on points.
fn pointwise_distances(space: &FiniteMetricSpace, f: &[usize], triples: &[(usize, usize, usize)], y: usize) -> Vec<Scalar> {
    let iterate = |mut x: usize, j: usize| {
        for _ in 0..j {
            x = f[x];
        }
        x
    };
    triples
        .iter()
        .flat_map(|&(x, k, l)| (k..=l).map(move |j| (x, j)))
        .map(|(x, j)| space.d(iterate(y, j), iterate(x, j)).clone())
        .collect()
}

fn function_agreement(rng: &mut ChaCha8Rng) -> InstanceResult {
    let n = rng.random_range(1..=6);
    let space = random_line_space(rng, n);
    let map: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let f = FiniteRelation::from_function(space.clone(), &map).map_err(err)?;
    let triples = random_spaced_triples(rng, |r| r.random_range(0..n));
    let eps = Scalar::ratio(rng.random_range(0..=8), 2);
    let spec = Specification::new(&f, &triples).map_err(err)?;
    for y in 0..n {
        let want = pointwise_distances(&space, &map, &triples, y);
        for mode in [TraceMode::Plain, TraceMode::Hausdorff] {
            let got: Vec<Scalar> = check_trace(&f, &spec, &y, &eps, mode)
                .map_err(err)?
                .entries
                .into_iter()
                .map(|e| e.distance)
                .collect();
            if got != want {
                return Err(format!("{mode} distances at y = {y} disagree with the pointwise ones"));
            }
        }
    }
    // Initial variant: segment i is compared at offset + j.
    let pairs: Vec<(usize, usize)> = triples.iter().map(|t| (t.0, t.2 - t.1)).collect();
    let gaps: Vec<usize> = (1..pairs.len()).map(|_| rng.random_range(1..=3)).collect();
    let init = InitialSpecification::new(&f, &pairs, &gaps).map_err(err)?;
    for y in 0..n {
        let r = check_initial_trace(&f, &init, &y, &eps, TraceMode::Plain).map_err(err)?;
        for e in &r.entries {
            let x = pairs[e.i - 1].0;
            let mut fy = y;
            for _ in 0..e.exponent {
                fy = map[fy];
            }
            let mut fx = x;
            for _ in 0..e.j {
                fx = map[fx];
            }
            if e.distance != *space.d(fy, fx) {
                return Err(format!("initial entry ({}, {}) at y = {y} disagrees", e.i, e.j));
            }
        }
    }
    Ok(true)
}

fn automaton_period(rng: &mut ChaCha8Rng) -> InstanceResult {
    let f = random_box_relation(rng, 5);
    let r = f.boxes().len();
    let auto = iterate_automaton(&f).map_err(err)?;
    for (cell, orbit) in auto.regions.iter().zip(&auto.orbits) {
        if orbit.window() > 1 << r {
            return Err(format!(
                "cell {cell} repeats only after {} steps with {r} boxes",
                orbit.window()
            ));
        }
    }
    Ok(true)
}
