//! Mahavier products of finite relations viewed as shift spaces.
//!
//! Points of the one-sided product `X_F⁺` are sequences `(x_1, x_2, ...)` with
//! every `(x_m, x_{m+1}) ∈ F`. Only eventually periodic sequences are
//! represented; on those the weighted sup metric
//! `max_{m >= 1} d(s_m, t_m) / 2^m` has an exact value.

use std::fmt;

use num_bigint::BigUint;
use num_integer::lcm;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::par;
use crate::relations::{CrSystem, FiniteRelation, Projection};
use crate::sets::FiniteMetricSpace;
use crate::specifications::{TraceEntry, TraceMode, TraceReport};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MahavierError {
    #[error("symbol {symbol} is outside a space of {size} points")]
    SymbolOutOfRange { symbol: usize, size: usize },
    #[error("the periodic part of a sequence must be non-empty")]
    EmptyCycle,
    #[error("transition {from} -> {to} at position {position} is not in the relation")]
    NotAdmissible {
        position: usize,
        from: usize,
        to: usize,
    },
    #[error("the relation is not a function")]
    NotAFunction,
    #[error("no admissible bridge of length {steps} from {from} to {to} before segment {segment}")]
    NoBridge {
        segment: usize,
        from: usize,
        to: usize,
        steps: usize,
    },
    #[error("no admissible word of length {steps} ends at {to}")]
    NoPrefix { to: usize, steps: usize },
    #[error("segments {index} and {next} overlap once the agreement window of {window} is added", next = index + 1)]
    SpacingTooSmall { index: usize, window: usize },
}

/// A finite relation together with its diameter-normalized metric.
#[derive(Debug, Clone, Serialize)]
pub struct MahavierSystem {
    relation: FiniteRelation,
    metric: FiniteMetricSpace,
    scale: Scalar,
    label: String,
}

impl MahavierSystem {
    /// `name` labels the relation the shift is built from.
    pub fn new(relation: FiniteRelation, name: &str) -> Self {
        let diam = relation.space().diameter();
        let scale = if diam.is_zero() { Scalar::one() } else { diam };
        let metric = relation.space().scaled_down(&scale);
        MahavierSystem {
            relation,
            metric,
            scale,
            label: format!("Mahavier({name})"),
        }
    }

    pub fn relation(&self) -> &FiniteRelation {
        &self.relation
    }

    /// The metric after dividing by [`Self::scale`]; its diameter is at most 1.
    pub fn metric(&self) -> &FiniteMetricSpace {
        &self.metric
    }

    pub fn scale(&self) -> &Scalar {
        &self.scale
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn alphabet(&self) -> usize {
        self.relation.len()
    }

    fn check_word(&self, symbols: &[usize], offset: usize) -> Result<(), MahavierError> {
        let n = self.alphabet();
        if let Some(&bad) = symbols.iter().find(|&&s| s >= n) {
            return Err(MahavierError::SymbolOutOfRange { symbol: bad, size: n });
        }
        for (p, w) in symbols.windows(2).enumerate() {
            if !self.relation.has(w[0], w[1]) {
                return Err(MahavierError::NotAdmissible {
                    position: offset + p,
                    from: w[0],
                    to: w[1],
                });
            }
        }
        Ok(())
    }

    pub fn word(&self, symbols: Vec<usize>) -> Result<Word, MahavierError> {
        self.check_word(&symbols, 0)?;
        Ok(Word(symbols))
    }

    pub fn sequence(&self, preperiod: Vec<usize>, cycle: Vec<usize>) -> Result<EPSequence, MahavierError> {
        if cycle.is_empty() {
            return Err(MahavierError::EmptyCycle);
        }
        let mut glued = preperiod.clone();
        glued.extend_from_slice(&cycle);
        glued.push(cycle[0]);
        self.check_word(&glued, 1)?;
        Ok(EPSequence::canonical(preperiod, cycle))
    }

    pub fn constant(&self, a: usize) -> Result<EPSequence, MahavierError> {
        self.sequence(Vec::new(), vec![a])
    }

    pub fn bi_sequence(
        &self,
        left: Vec<usize>,
        core: Vec<usize>,
        right: Vec<usize>,
        origin: i64,
    ) -> Result<BiEPSequence, MahavierError> {
        if left.is_empty() || right.is_empty() {
            return Err(MahavierError::EmptyCycle);
        }
        let s = BiEPSequence {
            left,
            core,
            right,
            origin,
        };
        let (lo, hi) = s.window(&s);
        let symbols: Vec<usize> = (lo - 1..=hi + 1).map(|p| s.at(p)).collect();
        self.check_word(&symbols, 0)?;
        Ok(s)
    }

    /// Exact `max_{m >= 1} d(s_m, t_m) / 2^m` in the normalized metric.
    pub fn sup_metric(&self, s: &EPSequence, t: &EPSequence) -> Scalar {
        // Past both preperiods the weighted terms repeat with period
        // lcm(cycles) and shrink, so one window of that length suffices.
        let span = s.preperiod.len().max(t.preperiod.len()) + lcm(s.cycle.len(), t.cycle.len());
        let mut best = Scalar::zero();
        for m in 1..=span {
            let weight = Scalar::pow2_inv(m as u32);
            if weight <= best {
                break;
            }
            let term = self.metric.d(s.at(m), t.at(m)) * &weight;
            if term > best {
                best = term;
            }
        }
        best
    }
}

/// A finite admissible word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbols(f, &self.0)
    }
}

fn write_symbols(f: &mut fmt::Formatter<'_>, symbols: &[usize]) -> fmt::Result {
    let sep = if symbols.iter().any(|&s| s > 9) { "." } else { "" };
    for (i, s) in symbols.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{s}")?;
    }
    Ok(())
}

/// The one-sided sequence `preperiod · cycle^∞`, kept in canonical form:
/// the cycle is primitive and the preperiod is as short as possible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct EPSequence {
    preperiod: Vec<usize>,
    cycle: Vec<usize>,
}

fn primitive_root(cycle: &[usize]) -> Vec<usize> {
    let n = cycle.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| cycle[i] == cycle[i - p]) {
            return cycle[..p].to_vec();
        }
    }
    cycle.to_vec()
}

impl EPSequence {
    fn canonical(mut preperiod: Vec<usize>, cycle: Vec<usize>) -> Self {
        let mut cycle = primitive_root(&cycle);
        while let Some(&last) = preperiod.last() {
            if last != *cycle.last().expect("non-empty cycle") {
                break;
            }
            preperiod.pop();
            cycle.rotate_right(1);
        }
        EPSequence { preperiod, cycle }
    }

    pub fn preperiod(&self) -> &[usize] {
        &self.preperiod
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    /// The symbol `s_m`, counting from `m = 1`.
    pub fn at(&self, m: usize) -> usize {
        assert!(m >= 1, "positions start at 1");
        let i = m - 1;
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.cycle[(i - self.preperiod.len()) % self.cycle.len()]
        }
    }

    /// `s_1 ... s_len`.
    pub fn prefix(&self, len: usize) -> Vec<usize> {
        (1..=len).map(|m| self.at(m)).collect()
    }
}

impl fmt::Display for EPSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_symbols(f, &self.preperiod)?;
        f.write_str("(")?;
        write_symbols(f, &self.cycle)?;
        f.write_str(")^∞")
    }
}

/// Drops the first symbol.
pub fn shift_forward(s: &EPSequence) -> EPSequence {
    if s.preperiod.is_empty() {
        let mut cycle = s.cycle.clone();
        cycle.rotate_left(1);
        EPSequence {
            preperiod: Vec::new(),
            cycle,
        }
    } else {
        EPSequence {
            preperiod: s.preperiod[1..].to_vec(),
            cycle: s.cycle.clone(),
        }
    }
}

pub fn shift_forward_by(s: &EPSequence, j: usize) -> EPSequence {
    let mut out = s.clone();
    for _ in 0..j {
        out = shift_forward(&out);
    }
    out
}

/// A two-sided eventually periodic sequence `... left left · core · right right ...`.
///
/// `left` repeats towards `-∞` with its last symbol directly before `core[0]`;
/// `right` repeats towards `+∞`. Position 0 (the `;` in `x_0; x_1, x_2`) sits at
/// index `origin` of the core, which may point outside the core.
#[derive(Debug, Clone, Serialize)]
pub struct BiEPSequence {
    left: Vec<usize>,
    core: Vec<usize>,
    right: Vec<usize>,
    origin: i64,
}

impl BiEPSequence {
    /// The symbol `x_p` for any integer position `p`.
    pub fn at(&self, p: i64) -> usize {
        let idx = p + self.origin;
        let core = self.core.len() as i64;
        if idx < 0 {
            self.left[idx.rem_euclid(self.left.len() as i64) as usize]
        } else if idx < core {
            self.core[idx as usize]
        } else {
            self.right[((idx - core) as usize) % self.right.len()]
        }
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// A position range outside of which both sequences are periodic with
    /// period dividing the lcm of their cycles on each side.
    fn window(&self, other: &BiEPSequence) -> (i64, i64) {
        let ll = lcm(self.left.len(), other.left.len()) as i64;
        let rl = lcm(self.right.len(), other.right.len()) as i64;
        let lo = (-self.origin).min(-other.origin) - ll;
        let hi = (self.core.len() as i64 - self.origin).max(other.core.len() as i64 - other.origin) + rl;
        (lo, hi)
    }
}

impl PartialEq for BiEPSequence {
    fn eq(&self, other: &Self) -> bool {
        let (lo, hi) = self.window(other);
        (lo..=hi).all(|p| self.at(p) == other.at(p))
    }
}

impl Eq for BiEPSequence {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// `σ_F`: forward sends `(x_p)` to `(x_{p+1})`; backward is its inverse.
pub fn shift_two_sided(s: &BiEPSequence, direction: Direction) -> BiEPSequence {
    let mut out = s.clone();
    out.origin += match direction {
        Direction::Forward => 1,
        Direction::Backward => -1,
    };
    out
}

/// All admissible words of length `len`, in lexicographic order.
pub fn admissible_words(rel: &FiniteRelation, len: usize) -> Vec<Word> {
    if len == 0 {
        return Vec::new();
    }
    let n = rel.len();
    let starts: Vec<usize> = (0..n).collect();
    par::map(&starts, |&a| {
        let mut out = Vec::new();
        let mut stack = vec![a];
        extend_words(rel, len, &mut stack, &mut out);
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

fn extend_words(rel: &FiniteRelation, len: usize, stack: &mut Vec<usize>, out: &mut Vec<Word>) {
    if stack.len() == len {
        out.push(Word(stack.clone()));
        return;
    }
    let last = *stack.last().expect("non-empty");
    for b in 0..rel.len() {
        if rel.has(last, b) {
            stack.push(b);
            extend_words(rel, len, stack, out);
            stack.pop();
        }
    }
}

/// Whether `p1(F)` and `p2(F)` are the whole space.
pub fn check_surjectivity<R: CrSystem>(sys: &R) -> (bool, bool) {
    let full = sys.ambient_set();
    (
        sys.project(Projection::First) == full,
        sys.project(Projection::Second) == full,
    )
}

/// The 0/1 transition matrix of a finite relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionMatrix {
    adj: Vec<Vec<bool>>,
    /// `reach[a][b]`: some word of length >= 2 runs from `a` to `b`.
    reach: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingIndex {
    Primitive(usize),
    NotPrimitiveWithin(usize),
}

impl TransitionMatrix {
    pub fn from_relation(rel: &FiniteRelation) -> Self {
        Self::from_rows(rel.adjacency().to_vec())
    }

    /// Rows must be square; used for matrices given directly.
    pub fn from_rows(adj: Vec<Vec<bool>>) -> Self {
        let n = adj.len();
        let mut reach = adj.clone();
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    let via = reach[k].clone();
                    for (dst, src) in reach[i].iter_mut().zip(via) {
                        *dst |= src;
                    }
                }
            }
        }
        TransitionMatrix { adj, reach }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.adj
    }

    pub fn reaches(&self, a: usize, b: usize) -> bool {
        self.reach[a][b]
    }

    pub fn is_irreducible(&self) -> bool {
        self.reach.iter().all(|r| r.iter().all(|&x| x))
    }

    /// Entry `[a][b]` counts the words of length `steps + 1` from `a` to `b`.
    pub fn path_counts(&self, steps: usize) -> Vec<Vec<BigUint>> {
        let n = self.len();
        let mut acc: Vec<Vec<BigUint>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigUint::one() } else { BigUint::zero() }).collect())
            .collect();
        for _ in 0..steps {
            acc = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (0..n)
                                .filter(|&k| self.adj[k][j])
                                .fold(BigUint::zero(), |s, k| s + &acc[i][k])
                        })
                        .collect()
                })
                .collect();
        }
        acc
    }

    fn bool_power_step(&self, m: &[Vec<bool>]) -> Vec<Vec<bool>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|k| m[i][k] && self.adj[k][j])).collect())
            .collect()
    }

    /// Smallest `t <= t_max` with `M^t` entrywise positive.
    pub fn mixing_index(&self, t_max: usize) -> MixingIndex {
        if self.is_empty() {
            return MixingIndex::NotPrimitiveWithin(t_max);
        }
        let mut power = self.adj.clone();
        for t in 1..=t_max {
            if power.iter().all(|r| r.iter().all(|&x| x)) {
                return MixingIndex::Primitive(t);
            }
            power = self.bool_power_step(&power);
        }
        MixingIndex::NotPrimitiveWithin(t_max)
    }

    /// An admissible word `a = w_0, ..., w_steps = b`, lexicographically least.
    pub fn connecting_word(&self, a: usize, b: usize, steps: usize) -> Option<Vec<usize>> {
        let n = self.len();
        // can[s][x]: some path of exactly s steps from x ends at b.
        let mut can = vec![vec![false; n]; steps + 1];
        can[0][b] = true;
        for s in 1..=steps {
            for x in 0..n {
                can[s][x] = (0..n).any(|y| self.adj[x][y] && can[s - 1][y]);
            }
        }
        if !can[steps][a] {
            return None;
        }
        let mut word = vec![a];
        let mut cur = a;
        for s in (0..steps).rev() {
            cur = (0..n).find(|&y| self.adj[cur][y] && can[s][y])?;
            word.push(cur);
        }
        Some(word)
    }

    /// Lexicographically least admissible word of `steps + 1` symbols ending at `b`.
    pub fn word_ending_at(&self, b: usize, steps: usize) -> Option<Vec<usize>> {
        (0..self.len()).find_map(|a| self.connecting_word(a, b, steps))
    }
}

/// One segment of a classical specification in the shift: `σ^{[k, l]}(base)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShiftSegment {
    pub base: EPSequence,
    pub k: usize,
    pub l: usize,
}

/// Classical tracing in `(X_F⁺, σ)`:
/// `d_sup(σ^j(y), σ^j(x_i)) <= ε` for every `j ∈ [k_i, l_i]`.
pub fn mahavier_trace_check(
    sys: &MahavierSystem,
    spec: &[ShiftSegment],
    y: &EPSequence,
    eps: &Scalar,
) -> TraceReport {
    let mut entries = Vec::new();
    for (idx, seg) in spec.iter().enumerate() {
        let mut ys = shift_forward_by(y, seg.k);
        let mut xs = shift_forward_by(&seg.base, seg.k);
        for j in seg.k..=seg.l {
            entries.push(TraceEntry {
                i: idx + 1,
                j,
                exponent: j,
                distance: sys.sup_metric(&ys, &xs),
            });
            ys = shift_forward(&ys);
            xs = shift_forward(&xs);
        }
    }
    TraceReport::from_entries(TraceMode::Plain, eps.clone(), entries)
}

/// Smallest `M` with `2^{-(M+1)} <= ε`: agreeing on the first `M` symbols
/// keeps the sup distance within ε.
pub fn agreement_window(eps: &Scalar) -> usize {
    let mut m = 0;
    while Scalar::pow2_inv(m as u32 + 1) > *eps {
        m += 1;
    }
    m
}

/// Builds a tracer by copying each base on the positions its segment
/// constrains and bridging the gaps with connecting words.
pub fn surgery_tracer(
    sys: &MahavierSystem,
    spec: &[ShiftSegment],
    eps: &Scalar,
) -> Result<EPSequence, MahavierError> {
    let m = agreement_window(eps);
    let tm = TransitionMatrix::from_relation(sys.relation());
    // Segment i must match its base on positions k_i + 1 ..= l_i + m.
    let spans: Vec<(usize, usize)> = spec.iter().map(|s| (s.k + 1, s.l + m.max(1))).collect();
    for (idx, w) in spans.windows(2).enumerate() {
        if w[1].0 <= w[0].1 {
            return Err(MahavierError::SpacingTooSmall {
                index: idx + 1,
                window: m,
            });
        }
    }
    let first = &spec[0];
    let start = first.base.at(spans[0].0);
    let mut y: Vec<usize> = if spans[0].0 > 1 {
        let mut w = tm
            .word_ending_at(start, spans[0].0 - 1)
            .ok_or(MahavierError::NoPrefix {
                to: start,
                steps: spans[0].0 - 1,
            })?;
        w.pop();
        w
    } else {
        Vec::new()
    };
    for (idx, (seg, &(lo, hi))) in spec.iter().zip(&spans).enumerate() {
        if idx > 0 {
            let from = *y.last().expect("previous segment written");
            let to = seg.base.at(lo);
            let steps = lo - (y.len());
            let bridge = tm.connecting_word(from, to, steps).ok_or(MahavierError::NoBridge {
                segment: idx + 1,
                from,
                to,
                steps,
            })?;
            y.extend_from_slice(&bridge[1..bridge.len() - 1]);
        }
        y.extend((lo..=hi).map(|p| seg.base.at(p)));
    }
    let last = &spec[spec.len() - 1].base;
    let mut end = y.len();
    while end < last.preperiod().len() {
        end += 1;
        y.push(last.at(end));
    }
    let cycle: Vec<usize> = (end + 1..=end + last.cycle().len()).map(|p| last.at(p)).collect();
    sys.sequence(y, cycle)
}

/// Bounds for [`exhaustive_tracer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBounds {
    pub max_preperiod: usize,
    pub max_cycle: usize,
}

impl Default for EnumerationBounds {
    fn default() -> Self {
        EnumerationBounds {
            max_preperiod: 12,
            max_cycle: 4,
        }
    }
}

fn passes(sys: &MahavierSystem, spec: &[ShiftSegment], y: &EPSequence, eps: &Scalar) -> bool {
    spec.iter().all(|seg| {
        let mut ys = shift_forward_by(y, seg.k);
        let mut xs = shift_forward_by(&seg.base, seg.k);
        (seg.k..=seg.l).all(|_| {
            let ok = sys.sup_metric(&ys, &xs) <= *eps;
            ys = shift_forward(&ys);
            xs = shift_forward(&xs);
            ok
        })
    })
}

/// First tracer among all admissible `preperiod · cycle^∞` within `bounds`,
/// ordered by preperiod length, cycle length, then lexicographically.
pub fn exhaustive_tracer(
    sys: &MahavierSystem,
    spec: &[ShiftSegment],
    eps: &Scalar,
    bounds: EnumerationBounds,
) -> Option<EPSequence> {
    let n = sys.alphabet();
    if n == 0 {
        return None;
    }
    for p in 0..=bounds.max_preperiod {
        for c in 1..=bounds.max_cycle {
            let total = (n as u64).checked_pow((p + c) as u32)? as usize;
            let hit = par::find_first(0..total, |idx| {
                let mut digits = Vec::with_capacity(p + c);
                let mut rest = idx;
                for _ in 0..p + c {
                    digits.push(rest % n);
                    rest /= n;
                }
                digits.reverse();
                let cycle = digits.split_off(p);
                let y = sys.sequence(digits, cycle).ok()?;
                passes(sys, spec, &y, eps).then_some(y)
            });
            if let Some((_, y)) = hit {
                return Some(y);
            }
        }
    }
    None
}

/// `x ↦ (x, f(x), f²(x), ...)` for a function relation.
pub fn orbit_embedding(sys: &MahavierSystem, x: usize) -> Result<EPSequence, MahavierError> {
    let rel = sys.relation();
    let n = rel.len();
    if x >= n {
        return Err(MahavierError::SymbolOutOfRange { symbol: x, size: n });
    }
    if !rel.is_function() {
        return Err(MahavierError::NotAFunction);
    }
    let next = |a: usize| (0..n).find(|&b| rel.has(a, b)).expect("function relation");
    let mut seen = vec![usize::MAX; n];
    let mut path = Vec::new();
    let mut cur = x;
    while seen[cur] == usize::MAX {
        seen[cur] = path.len();
        path.push(cur);
        cur = next(cur);
    }
    let cycle = path.split_off(seen[cur]);
    sys.sequence(path, cycle)
}
