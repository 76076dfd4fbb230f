//! Scenario files: a line-oriented description of one system, some named
//! specifications and a list of commands, plus the runner that turns them
//! into a report.
//!
//! ```text
//! name monica
//! ambient interval 0 1
//! box 0 1/2 : 0 0
//! box 1/2 1 : 1 1
//! box 1 1 : 0 1
//! spec S spaced (0; 2, 3) (1; 9, 10)
//! trace S y 0 eps 1/4 mode plain expect pass
//! refute HSP eps 1/4 template (0; 2, 3) (1; 1) N 1..10 expect refutation
//! ```
//!
//! Finite systems use `ambient points n`, then `matrix adj ...` rows and
//! optionally `matrix dist ...` rows (the discrete metric otherwise).
//! `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::mahavier::{admissible_words, check_surjectivity, MixingIndex, TransitionMatrix};
use crate::relations::{BoxRelation, CrSystem, FiniteRelation};
use crate::sets::{FiniteMetricSpace, Interval, MetricVerdict};
use crate::specifications::{
    check_initial_trace, check_trace, find_initial_tracer, find_tracer, InitialSpecification,
    RegionOutcome, Specification, TraceMode, TraceReport, TracerSearch,
};
use crate::verdicts::{
    certify_common_image, certify_eventual_hausdorff, certify_full_image, certify_trivial_fiber,
    implication_suite, refute_property, Certification, Evidence, PropertyTag,
    Template,
};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: {reason}")]
    Validation { line: usize, reason: String },
    #[error("line {line}: `{command}` failed: {reason}")]
    Run {
        line: usize,
        command: String,
        reason: String,
    },
}

impl ScenarioError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse {
        line,
        reason: reason.into(),
    }
}

fn invalid(line: usize, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        line,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ambient {
    Interval(Scalar, Scalar),
    Points(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecDecl {
    Spaced(Vec<(Scalar, usize, usize)>),
    Initial {
        segments: Vec<(Scalar, usize)>,
        gaps: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertifyKind {
    CommonImage,
    FullImage,
    EventualHausdorff,
    TrivialFiber,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Certify {
        kind: CertifyKind,
        n0_max: usize,
        eps: Option<Scalar>,
    },
    Refute {
        property: PropertyTag,
        eps: Scalar,
        template: Template<Scalar>,
        range: (usize, usize),
    },
    Trace {
        spec: String,
        y: Scalar,
        eps: Scalar,
        mode: TraceMode,
    },
    Find {
        spec: String,
        eps: Scalar,
        mode: TraceMode,
    },
    Words {
        len: usize,
    },
    Mixing {
        t_max: usize,
    },
    Surjectivity,
    Suite {
        count: usize,
    },
}

impl Command {
    /// Outcome keywords an `expect` clause may name.
    fn outcomes(&self) -> &'static [&'static str] {
        match self {
            Command::Certify { .. } => &["certificate", "notfound"],
            Command::Refute { .. } => &["refutation", "inconclusive"],
            Command::Trace { .. } | Command::Suite { .. } => &["pass", "fail"],
            Command::Find { .. } => &["tracer", "no-tracer"],
            Command::Words { .. } => &["ok"],
            Command::Mixing { .. } => &["primitive", "not-primitive"],
            Command::Surjectivity => &["both", "first", "second", "neither"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandLine {
    pub line: usize,
    pub source: String,
    pub command: Command,
    pub expect: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub ambient: Ambient,
    pub boxes: Vec<(Interval, Interval)>,
    pub adjacency: Vec<Vec<bool>>,
    pub distances: Vec<Vec<Scalar>>,
    pub specs: BTreeMap<String, (usize, SpecDecl)>,
    pub commands: Vec<CommandLine>,
}

impl Scenario {
    pub fn box_count(&self) -> usize {
        self.boxes.len()
    }
}

/// Splits a line into tokens, keeping each `( ... )` group as one token.
fn tokenize(line: usize, text: &str) -> Result<Vec<String>, ScenarioError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in text.chars() {
        match ch {
            '(' => {
                if depth > 0 {
                    return Err(parse_err(line, "nested parentheses"));
                }
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                depth = 1;
                cur.push(ch);
            }
            ')' => {
                if depth == 0 {
                    return Err(parse_err(line, "unbalanced `)`"));
                }
                cur.push(ch);
                out.push(std::mem::take(&mut cur));
                depth = 0;
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if depth > 0 {
        return Err(parse_err(line, "unclosed `(`"));
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

fn scalar(line: usize, tok: &str) -> Result<Scalar, ScenarioError> {
    tok.parse()
        .map_err(|e| parse_err(line, format!("bad number `{tok}`: {e}")))
}

fn count(line: usize, tok: &str) -> Result<usize, ScenarioError> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("expected a non-negative integer, got `{tok}`")))
}

fn range(line: usize, tok: &str) -> Result<(usize, usize), ScenarioError> {
    let (a, b) = tok
        .split_once("..")
        .ok_or_else(|| parse_err(line, format!("expected a range like 1..10, got `{tok}`")))?;
    let (a, b) = (count(line, a)?, count(line, b)?);
    if a > b {
        return Err(parse_err(line, format!("empty range `{tok}`")));
    }
    Ok((a, b))
}

/// `(x; a, b)` or `(x; a)`.
fn group(line: usize, tok: &str) -> Result<(Scalar, Vec<usize>), ScenarioError> {
    let inner = tok
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| parse_err(line, format!("expected a segment like (x; k, l), got `{tok}`")))?;
    let (x, rest) = inner
        .split_once(';')
        .ok_or_else(|| parse_err(line, format!("missing `;` in `{tok}`")))?;
    let nums = rest
        .split(',')
        .map(|t| count(line, t.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((scalar(line, x)?, nums))
}

fn triple(line: usize, tok: &str) -> Result<(Scalar, usize, usize), ScenarioError> {
    match group(line, tok)? {
        (x, v) if v.len() == 2 => {
            if v[0] > v[1] {
                return Err(parse_err(line, format!("k > l in `{tok}`")));
            }
            Ok((x, v[0], v[1]))
        }
        _ => Err(parse_err(line, format!("expected (x; k, l), got `{tok}`"))),
    }
}

fn pair(line: usize, tok: &str) -> Result<(Scalar, usize), ScenarioError> {
    match group(line, tok)? {
        (x, v) if v.len() == 1 => Ok((x, v[0])),
        _ => Err(parse_err(line, format!("expected (x; l), got `{tok}`"))),
    }
}

/// Reads `key value` pairs after the leading words of a command.
fn options<'a>(line: usize, toks: &'a [String], allowed: &[&str]) -> Result<BTreeMap<&'a str, &'a str>, ScenarioError> {
    let mut out = BTreeMap::new();
    let mut it = toks.iter();
    while let Some(k) = it.next() {
        if !allowed.contains(&k.as_str()) {
            return Err(parse_err(line, format!("unexpected `{k}`")));
        }
        let v = it
            .next()
            .ok_or_else(|| parse_err(line, format!("`{k}` needs a value")))?;
        if out.insert(k.as_str(), v.as_str()).is_some() {
            return Err(parse_err(line, format!("`{k}` given twice")));
        }
    }
    Ok(out)
}

fn required<'a>(line: usize, opts: &BTreeMap<&str, &'a str>, key: &str) -> Result<&'a str, ScenarioError> {
    opts.get(key)
        .copied()
        .ok_or_else(|| parse_err(line, format!("missing `{key}`")))
}

fn mode(line: usize, tok: &str) -> Result<TraceMode, ScenarioError> {
    match tok {
        "plain" => Ok(TraceMode::Plain),
        "hausdorff" => Ok(TraceMode::Hausdorff),
        _ => Err(parse_err(line, format!("mode must be plain or hausdorff, got `{tok}`"))),
    }
}

fn split_expect(line: usize, toks: &[String]) -> Result<(&[String], Option<String>), ScenarioError> {
    match toks.iter().position(|t| t == "expect") {
        None => Ok((toks, None)),
        Some(p) if p + 2 == toks.len() => Ok((&toks[..p], Some(toks[p + 1].clone()))),
        Some(_) => Err(parse_err(line, "`expect` takes exactly one outcome at the end of the line")),
    }
}

fn parse_command(line: usize, head: &str, rest: &[String]) -> Result<Command, ScenarioError> {
    match head {
        "certify" => {
            let (kind, opts) = rest
                .split_first()
                .ok_or_else(|| parse_err(line, "certify needs a kind"))?;
            let kind = match kind.as_str() {
                "common-image" => CertifyKind::CommonImage,
                "full-image" => CertifyKind::FullImage,
                "eventual-hausdorff" => CertifyKind::EventualHausdorff,
                "trivial-fiber" => CertifyKind::TrivialFiber,
                k => return Err(parse_err(line, format!("unknown certificate kind `{k}`"))),
            };
            let opts = options(line, opts, &["n0_max", "eps"])?;
            let n0_max = match opts.get("n0_max") {
                Some(v) => count(line, v)?,
                None if kind == CertifyKind::TrivialFiber => 1,
                None => return Err(parse_err(line, "missing `n0_max`")),
            };
            let eps = opts.get("eps").map(|v| scalar(line, v)).transpose()?;
            if kind == CertifyKind::EventualHausdorff && eps.is_none() {
                return Err(parse_err(line, "eventual-hausdorff needs `eps`"));
            }
            Ok(Command::Certify { kind, n0_max, eps })
        }
        "refute" => {
            let (prop, rest) = rest
                .split_first()
                .ok_or_else(|| parse_err(line, "refute needs a property"))?;
            let property: PropertyTag = prop.parse().map_err(|e: String| parse_err(line, e))?;
            let t = rest
                .iter()
                .position(|x| x == "template")
                .ok_or_else(|| parse_err(line, "missing `template`"))?;
            let groups: Vec<&String> = rest[t + 1..].iter().take_while(|x| x.starts_with('(')).collect();
            if groups.is_empty() {
                return Err(parse_err(line, "template needs at least one segment"));
            }
            let mut tail: Vec<String> = rest[..t].to_vec();
            tail.extend(rest[t + 1 + groups.len()..].iter().cloned());
            let param = if property.is_initial() { "m" } else { "N" };
            let opts = options(line, &tail, &["eps", param])?;
            let template = if property.is_initial() {
                Template::Initial {
                    segments: groups.iter().map(|g| pair(line, g)).collect::<Result<_, _>>()?,
                }
            } else {
                Template::Spaced {
                    first: triple(line, groups[0])?,
                    rest: groups[1..].iter().map(|g| pair(line, g)).collect::<Result<_, _>>()?,
                }
            };
            Ok(Command::Refute {
                property,
                eps: scalar(line, required(line, &opts, "eps")?)?,
                template,
                range: range(line, required(line, &opts, param)?)?,
            })
        }
        "trace" | "find" => {
            let (spec, rest) = rest
                .split_first()
                .ok_or_else(|| parse_err(line, format!("{head} needs a specification name")))?;
            let allowed: &[&str] = if head == "trace" {
                &["y", "eps", "mode"]
            } else {
                &["eps", "mode"]
            };
            let opts = options(line, rest, allowed)?;
            let eps = scalar(line, required(line, &opts, "eps")?)?;
            let m = mode(line, required(line, &opts, "mode")?)?;
            if head == "trace" {
                Ok(Command::Trace {
                    spec: spec.clone(),
                    y: scalar(line, required(line, &opts, "y")?)?,
                    eps,
                    mode: m,
                })
            } else {
                Ok(Command::Find {
                    spec: spec.clone(),
                    eps,
                    mode: m,
                })
            }
        }
        "mahavier" => match rest {
            [w, n] if w == "words" => Ok(Command::Words { len: count(line, n)? }),
            [w, n] if w == "mixing" => Ok(Command::Mixing { t_max: count(line, n)? }),
            [w] if w == "surjectivity" => Ok(Command::Surjectivity),
            _ => Err(parse_err(line, "expected `mahavier words L`, `mahavier mixing T` or `mahavier surjectivity`")),
        },
        "suite" => {
            let opts = options(line, rest, &["count"])?;
            Ok(Command::Suite {
                count: count(line, required(line, &opts, "count")?)?,
            })
        }
        other => Err(parse_err(line, format!("unknown keyword `{other}`"))),
    }
}

/// Parses and validates a scenario; nothing is executed.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut name = String::from("scenario");
    let mut ambient: Option<Ambient> = None;
    let mut boxes = Vec::new();
    let mut adjacency = Vec::new();
    let mut distances = Vec::new();
    let mut specs: BTreeMap<String, (usize, SpecDecl)> = BTreeMap::new();
    let mut commands = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks = tokenize(line, content)?;
        let (head, rest) = toks.split_first().expect("non-empty line");
        if ambient.is_none() && !matches!(head.as_str(), "ambient" | "name") {
            return Err(parse_err(line, "the ambient space must be declared first"));
        }
        match head.as_str() {
            "name" => {
                name = rest.join(" ");
            }
            "ambient" => {
                if ambient.is_some() {
                    return Err(parse_err(line, "ambient declared twice"));
                }
                ambient = Some(match rest {
                    [k, a, b] if k == "interval" => {
                        let (a, b) = (scalar(line, a)?, scalar(line, b)?);
                        if a > b {
                            return Err(parse_err(line, "interval endpoints out of order"));
                        }
                        Ambient::Interval(a, b)
                    }
                    [k, n] if k == "points" => {
                        let n = count(line, n)?;
                        if n == 0 {
                            return Err(parse_err(line, "a finite space needs at least one point"));
                        }
                        Ambient::Points(n)
                    }
                    _ => return Err(parse_err(line, "expected `ambient interval a b` or `ambient points n`")),
                });
            }
            "box" => {
                if !matches!(ambient, Some(Ambient::Interval(..))) {
                    return Err(parse_err(line, "`box` needs an interval ambient"));
                }
                let [a0, a1, colon, b0, b1] = rest else {
                    return Err(parse_err(line, "expected `box a_lo a_hi : b_lo b_hi`"));
                };
                if colon != ":" {
                    return Err(parse_err(line, "expected `:` between the two intervals"));
                }
                let mk = |lo: &str, hi: &str| -> Result<Interval, ScenarioError> {
                    Interval::new(scalar(line, lo)?, scalar(line, hi)?).map_err(|e| parse_err(line, e.to_string()))
                };
                boxes.push((mk(a0, a1)?, mk(b0, b1)?));
            }
            "matrix" => {
                let Some(Ambient::Points(n)) = ambient else {
                    return Err(parse_err(line, "`matrix` needs a finite ambient"));
                };
                let (kind, row) = rest
                    .split_first()
                    .ok_or_else(|| parse_err(line, "expected `matrix adj ...` or `matrix dist ...`"))?;
                if row.len() != n {
                    return Err(parse_err(line, format!("row has {} entries, expected {n}", row.len())));
                }
                match kind.as_str() {
                    "adj" => adjacency.push(
                        row.iter()
                            .map(|t| match t.as_str() {
                                "0" => Ok(false),
                                "1" => Ok(true),
                                _ => Err(parse_err(line, format!("adjacency entries are 0 or 1, got `{t}`"))),
                            })
                            .collect::<Result<Vec<_>, _>>()?,
                    ),
                    "dist" => distances.push(row.iter().map(|t| scalar(line, t)).collect::<Result<Vec<_>, _>>()?),
                    k => return Err(parse_err(line, format!("unknown matrix kind `{k}`"))),
                }
            }
            "spec" => {
                let [spec_name, kind, body @ ..] = rest else {
                    return Err(parse_err(line, "expected `spec NAME spaced|initial ...`"));
                };
                let decl = match kind.as_str() {
                    "spaced" => SpecDecl::Spaced(body.iter().map(|g| triple(line, g)).collect::<Result<_, _>>()?),
                    "initial" => {
                        let split = body.iter().position(|t| t == "gaps").unwrap_or(body.len());
                        SpecDecl::Initial {
                            segments: body[..split].iter().map(|g| pair(line, g)).collect::<Result<_, _>>()?,
                            gaps: body[split..]
                                .iter()
                                .skip(1)
                                .map(|t| count(line, t))
                                .collect::<Result<_, _>>()?,
                        }
                    }
                    k => return Err(parse_err(line, format!("spec kind must be spaced or initial, got `{k}`"))),
                };
                if specs.insert(spec_name.clone(), (line, decl)).is_some() {
                    return Err(invalid(line, format!("specification `{spec_name}` defined twice")));
                }
            }
            _ => {
                let (rest, expect) = split_expect(line, rest)?;
                let command = parse_command(line, head, rest)?;
                commands.push(CommandLine {
                    line,
                    source: content.to_string(),
                    command,
                    expect,
                });
            }
        }
    }

    let ambient = ambient.ok_or_else(|| parse_err(text.lines().count().max(1), "no ambient space declared"))?;
    let scenario = Scenario {
        name,
        ambient,
        boxes,
        adjacency,
        distances,
        specs,
        commands,
    };
    validate(&scenario)?;
    Ok(scenario)
}

fn validate(sc: &Scenario) -> Result<(), ScenarioError> {
    match build_system(sc)? {
        System::Interval(f) => validate_with(sc, &f),
        System::Finite(f) => validate_with(sc, &f),
    }
}

fn validate_with<R: ScenarioSystem>(sc: &Scenario, sys: &R) -> Result<(), ScenarioError> {
    for (spec_name, (line, decl)) in &sc.specs {
        build_spec(sys, *line, spec_name, decl)?;
    }
    for cmd in &sc.commands {
        let line = cmd.line;
        if let Some(e) = &cmd.expect {
            if !cmd.command.outcomes().contains(&e.as_str()) {
                return Err(invalid(
                    line,
                    format!("`expect {e}` is not a possible outcome; use one of {}", cmd.command.outcomes().join(", ")),
                ));
            }
        }
        match &cmd.command {
            Command::Trace { spec, y, .. } => {
                lookup(sc, line, spec)?;
                sys.point(y).ok_or_else(|| invalid(line, format!("{y} is not a point of the space")))?;
            }
            Command::Find { spec, .. } => {
                lookup(sc, line, spec)?;
            }
            Command::Refute { template, .. } => {
                let pts: Vec<&Scalar> = match template {
                    Template::Spaced { first, rest } => {
                        std::iter::once(&first.0).chain(rest.iter().map(|p| &p.0)).collect()
                    }
                    Template::Initial { segments } => segments.iter().map(|p| &p.0).collect(),
                };
                for p in pts {
                    sys.point(p).ok_or_else(|| invalid(line, format!("{p} is not a point of the space")))?;
                }
            }
            Command::Words { .. } | Command::Mixing { .. } if !sys.is_finite() => {
                return Err(invalid(line, "Mahavier analyses need a finite relation"));
            }
            _ => {}
        }
    }
    Ok(())
}

fn lookup<'a>(sc: &'a Scenario, line: usize, name: &str) -> Result<&'a SpecDecl, ScenarioError> {
    sc.specs
        .get(name)
        .map(|(_, d)| d)
        .ok_or_else(|| invalid(line, format!("unknown specification `{name}`")))
}

enum System {
    Interval(BoxRelation),
    Finite(FiniteRelation),
}

fn build_system(sc: &Scenario) -> Result<System, ScenarioError> {
    match &sc.ambient {
        Ambient::Interval(a, b) => {
            let ambient = Interval::new(a.clone(), b.clone()).map_err(|e| invalid(1, e.to_string()))?;
            let f = BoxRelation::new(ambient, sc.boxes.clone()).map_err(|e| invalid(1, e.to_string()))?;
            Ok(System::Interval(f))
        }
        Ambient::Points(n) => {
            let space = if sc.distances.is_empty() {
                FiniteMetricSpace::discrete(*n)
            } else {
                if sc.distances.len() != *n {
                    return Err(invalid(1, format!("expected {n} distance rows, got {}", sc.distances.len())));
                }
                let space = FiniteMetricSpace::new(sc.distances.clone()).map_err(|e| invalid(1, e.to_string()))?;
                if let MetricVerdict::Fail(v) = space.validate() {
                    return Err(invalid(1, format!("not a metric: {v}")));
                }
                space
            };
            if sc.adjacency.len() != *n {
                return Err(invalid(1, format!("expected {n} adjacency rows, got {}", sc.adjacency.len())));
            }
            let f = FiniteRelation::new(space, sc.adjacency.clone()).map_err(|e| invalid(1, e.to_string()))?;
            Ok(System::Finite(f))
        }
    }
}

/// A system a scenario can describe, with literal-to-point conversion.
trait ScenarioSystem: CrSystem {
    fn point(&self, s: &Scalar) -> Option<Self::Point>;
    fn finite(&self) -> Option<&FiniteRelation>;

    fn is_finite(&self) -> bool {
        self.finite().is_some()
    }
}

impl ScenarioSystem for BoxRelation {
    fn point(&self, s: &Scalar) -> Option<Scalar> {
        self.ambient().contains(s).then(|| s.clone())
    }

    fn finite(&self) -> Option<&FiniteRelation> {
        None
    }
}

impl ScenarioSystem for FiniteRelation {
    fn point(&self, s: &Scalar) -> Option<usize> {
        s.to_usize().filter(|&i| i < self.len())
    }

    fn finite(&self) -> Option<&FiniteRelation> {
        Some(self)
    }
}

enum BuiltSpec<P, S> {
    Spaced(Specification<P, S>),
    Initial(InitialSpecification<P, S>),
}

fn to_point<R: ScenarioSystem>(sys: &R, line: usize, s: &Scalar) -> Result<R::Point, ScenarioError> {
    sys.point(s)
        .ok_or_else(|| invalid(line, format!("{s} is not a point of the space")))
}

fn build_spec<R: ScenarioSystem>(
    sys: &R,
    line: usize,
    name: &str,
    decl: &SpecDecl,
) -> Result<BuiltSpec<R::Point, R::Set>, ScenarioError> {
    let wrap = |e: crate::specifications::SpecError| invalid(line, format!("specification `{name}`: {e}"));
    match decl {
        SpecDecl::Spaced(triples) => {
            let t = triples
                .iter()
                .map(|(x, k, l)| Ok((to_point(sys, line, x)?, *k, *l)))
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            Ok(BuiltSpec::Spaced(Specification::new(sys, &t).map_err(wrap)?))
        }
        SpecDecl::Initial { segments, gaps } => {
            let p = segments
                .iter()
                .map(|(x, l)| Ok((to_point(sys, line, x)?, *l)))
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            Ok(BuiltSpec::Initial(InitialSpecification::new(sys, &p, gaps).map_err(wrap)?))
        }
    }
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct CommandResult {
    pub line: usize,
    pub command: String,
    pub outcome: String,
    pub expect: Option<String>,
    pub met: bool,
    pub result: Value,
}

/// Text and structured output of one run.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub all_met: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.all_met {
            0
        } else {
            1
        }
    }
}

/// Executes every command in order.
pub fn run(sc: &Scenario, seed: u64) -> Result<Report, ScenarioError> {
    let system = build_system(sc)?;
    let (summary, results) = match &system {
        System::Interval(f) => (
            format!("interval relation with {} boxes, {} cells", f.boxes().len(), f.regions().len()),
            run_with(sc, f, seed)?,
        ),
        System::Finite(f) => (
            format!("finite relation on {} points", f.len()),
            run_with(sc, f, seed)?,
        ),
    };
    let all_met = results.iter().all(|(r, _)| r.met);
    let mut text = String::new();
    let _ = writeln!(text, "scenario: {}", sc.name);
    let _ = writeln!(text, "system: {summary}");
    let _ = writeln!(text, "seed: {seed}");
    for (r, body) in &results {
        let _ = writeln!(text);
        let status = match &r.expect {
            None => String::new(),
            Some(e) if r.met => format!(" (expected {e}: met)"),
            Some(e) => format!(" (expected {e}: NOT MET)"),
        };
        let _ = writeln!(text, "[line {}] {}", r.line, r.command);
        let _ = writeln!(text, "  outcome: {}{status}", r.outcome);
        text.push_str(body);
    }
    let _ = writeln!(text);
    let _ = writeln!(text, "expectations: {}", if all_met { "all met" } else { "NOT all met" });
    let json = json!({
        "scenario": sc.name,
        "system": summary,
        "seed": seed,
        "all_met": all_met,
        "commands": results.iter().map(|(r, _)| r).collect::<Vec<_>>(),
    });
    Ok(Report { text, json, all_met })
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn report_lines(r: &TraceReport, out: &mut String) {
    for e in &r.entries {
        let mark = if e.distance <= r.eps { "" } else { "  > eps" };
        let _ = writeln!(out, "    ({}, {}) iterate {}: {}{mark}", e.i, e.j, e.exponent, e.distance);
    }
    if let Some((i, j)) = r.worst {
        let _ = writeln!(out, "    worst ({i}, {j}): {}", r.worst_distance);
    }
}

fn table_lines<G: std::fmt::Display, P: std::fmt::Display>(rows: &[RegionOutcome<G, P>], indent: &str, out: &mut String) {
    for row in rows {
        let at = row
            .report
            .worst
            .map(|(i, j)| format!(" at ({i}, {j})"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{indent}{}  y = {}  worst {}{at}",
            row.region, row.representative, row.report.worst_distance
        );
    }
}

fn search_lines<G: std::fmt::Display, P: std::fmt::Display>(s: &TracerSearch<G, P>, indent: &str, out: &mut String) {
    match s {
        TracerSearch::Witness(w) => {
            let _ = writeln!(out, "{indent}tracer y = {} in {}", w.y, w.region);
        }
        TracerSearch::NoTracer { table } => {
            let _ = writeln!(out, "{indent}no tracer; per region:");
            table_lines(table, &format!("{indent}  "), out);
        }
    }
}

fn run_with<R: ScenarioSystem>(sc: &Scenario, sys: &R, seed: u64) -> Result<Vec<(CommandResult, String)>, ScenarioError> {
    let mut out = Vec::with_capacity(sc.commands.len());
    for cmd in &sc.commands {
        let fail = |reason: String| ScenarioError::Run {
            line: cmd.line,
            command: cmd.source.clone(),
            reason,
        };
        let mut body = String::new();
        let (outcome, result): (String, Value) = match &cmd.command {
            Command::Certify { kind, n0_max, eps } => {
                let cert = match kind {
                    CertifyKind::CommonImage => certify_common_image(sys, *n0_max),
                    CertifyKind::FullImage => certify_full_image(sys, *n0_max),
                    CertifyKind::EventualHausdorff => {
                        certify_eventual_hausdorff(sys, eps.as_ref().expect("validated"), *n0_max)
                    }
                    CertifyKind::TrivialFiber => Ok(certify_trivial_fiber(sys)),
                }
                .map_err(|e| fail(e.to_string()))?;
                match &cert {
                    Certification::Certificate(c) => {
                        let _ = writeln!(body, "  {} with n0 = {}", c.tag, c.n0);
                        match &c.evidence {
                            Evidence::CommonPoints { pairs } => {
                                for p in pairs {
                                    let _ = writeln!(body, "    {} & {}: common point {}", p.a, p.b, p.point);
                                }
                            }
                            Evidence::Images { images } => {
                                for (g, s) in images {
                                    let _ = writeln!(body, "    {g}: {s}");
                                }
                            }
                            Evidence::PairBounds { eps, pairs } => {
                                let _ = writeln!(body, "    eps = {eps}");
                                for p in pairs {
                                    let _ = writeln!(
                                        body,
                                        "    {} & {}: max H over steps {}..={} is {}",
                                        p.a, p.b, c.n0, p.last, p.worst
                                    );
                                }
                            }
                            Evidence::Fiber { x0 } => {
                                let _ = writeln!(body, "    X x {{{x0}}} is contained in F");
                            }
                        }
                        ("certificate".into(), to_json(&cert))
                    }
                    Certification::NotFound { searched_up_to } => {
                        let _ = writeln!(body, "  nothing found for n0 <= {searched_up_to}");
                        ("notfound".into(), to_json(&cert))
                    }
                }
            }
            Command::Refute {
                property,
                eps,
                template,
                range,
            } => {
                let template = match template {
                    Template::Spaced { first, rest } => Template::Spaced {
                        first: (to_point(sys, cmd.line, &first.0)?, first.1, first.2),
                        rest: rest
                            .iter()
                            .map(|(x, l)| Ok((to_point(sys, cmd.line, x)?, *l)))
                            .collect::<Result<_, ScenarioError>>()?,
                    },
                    Template::Initial { segments } => Template::Initial {
                        segments: segments
                            .iter()
                            .map(|(x, l)| Ok((to_point(sys, cmd.line, x)?, *l)))
                            .collect::<Result<_, ScenarioError>>()?,
                    },
                };
                let res = refute_property(sys, *property, eps, &template, range.0..=range.1)
                    .map_err(|e| fail(e.to_string()))?;
                let param = if property.is_initial() { "m" } else { "N" };
                for inst in &res.report().instantiations {
                    let _ = writeln!(body, "  {param} = {}:", inst.parameter);
                    search_lines(&inst.search, "    ", &mut body);
                }
                let outcome = if res.is_refutation() { "refutation" } else { "inconclusive" };
                (outcome.into(), to_json(&res))
            }
            Command::Trace { spec, y, eps, mode } => {
                let decl = lookup(sc, cmd.line, spec)?;
                let y = to_point(sys, cmd.line, y)?;
                let report = match build_spec(sys, cmd.line, spec, decl)? {
                    BuiltSpec::Spaced(s) => check_trace(sys, &s, &y, eps, *mode),
                    BuiltSpec::Initial(s) => check_initial_trace(sys, &s, &y, eps, *mode),
                }
                .map_err(|e| fail(e.to_string()))?;
                report_lines(&report, &mut body);
                (report.verdict.to_string(), to_json(&report))
            }
            Command::Find { spec, eps, mode } => {
                let decl = lookup(sc, cmd.line, spec)?;
                let search = match build_spec(sys, cmd.line, spec, decl)? {
                    BuiltSpec::Spaced(s) => find_tracer(sys, &s, eps, *mode),
                    BuiltSpec::Initial(s) => find_initial_tracer(sys, &s, eps, *mode),
                }
                .map_err(|e| fail(e.to_string()))?;
                search_lines(&search, "  ", &mut body);
                if let TracerSearch::Witness(w) = &search {
                    report_lines(&w.report, &mut body);
                }
                let outcome = if search.witness().is_some() { "tracer" } else { "no-tracer" };
                (outcome.into(), to_json(&search))
            }
            Command::Words { len } => {
                let f = sys.finite().expect("validated");
                let words = admissible_words(f, *len);
                let _ = writeln!(body, "  {} admissible words of length {len}", words.len());
                if words.len() <= 64 {
                    let listed: Vec<String> = words.iter().map(|w| w.to_string()).collect();
                    let _ = writeln!(body, "    {}", listed.join(" "));
                }
                ("ok".into(), json!({ "length": len, "count": words.len(), "words": words }))
            }
            Command::Mixing { t_max } => {
                let f = sys.finite().expect("validated");
                let m = TransitionMatrix::from_relation(f).mixing_index(*t_max);
                let outcome = match m {
                    MixingIndex::Primitive(t) => {
                        let _ = writeln!(body, "  mixing index {t}");
                        "primitive"
                    }
                    MixingIndex::NotPrimitiveWithin(t) => {
                        let _ = writeln!(body, "  no positive power up to {t}");
                        "not-primitive"
                    }
                };
                (outcome.into(), to_json(&m))
            }
            Command::Surjectivity => {
                let (p1, p2) = check_surjectivity(sys);
                let _ = writeln!(body, "  p1(F) = X: {p1}\n  p2(F) = X: {p2}");
                let outcome = match (p1, p2) {
                    (true, true) => "both",
                    (true, false) => "first",
                    (false, true) => "second",
                    (false, false) => "neither",
                };
                (outcome.into(), json!({ "p1_full": p1, "p2_full": p2 }))
            }
            Command::Suite { count } => {
                let verdicts = implication_suite(seed, *count);
                for v in &verdicts {
                    let _ = writeln!(
                        body,
                        "  {}: {} instances, {} exercised, {} failures",
                        v.implication,
                        v.instances,
                        v.exercised,
                        v.failures.len()
                    );
                    for f in &v.failures {
                        let _ = writeln!(body, "    instance {} (seed {}): {}", f.index, f.seed, f.detail);
                    }
                }
                let ok = verdicts.iter().all(|v| v.passed());
                ((if ok { "pass" } else { "fail" }).into(), to_json(&verdicts))
            }
        };
        let met = cmd.expect.as_ref().is_none_or(|e| *e == outcome);
        out.push((
            CommandResult {
                line: cmd.line,
                command: cmd.source.clone(),
                outcome,
                expect: cmd.expect.clone(),
                met,
                result,
            },
            body,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MONICA: &str = "\
name monica
ambient interval 0 1
box 0 1/2 : 0 0
box 1/2 1 : 1 1
box 1 1 : 0 1
spec S spaced (0; 2, 3) (1; 9, 10)
trace S y 0 eps 1/4 mode plain expect pass
trace S y 1/4 eps 1/4 mode hausdorff expect fail
";

    #[test]
    fn parses_monica() {
        let sc = parse_scenario(MONICA).unwrap();
        assert_eq!(sc.box_count(), 3);
        assert_eq!(sc.commands.len(), 2);
        assert_eq!(sc.name, "monica");
    }

    #[test]
    fn rejects_decimals_with_line_number() {
        let text = MONICA.replace("box 0 1/2", "box 0 0.5");
        match parse_scenario(&text) {
            Err(ScenarioError::Parse { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("0.5"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_has_no_ambient() {
        assert!(matches!(parse_scenario(""), Err(ScenarioError::Parse { .. })));
        assert!(matches!(parse_scenario("# only a comment\n"), Err(ScenarioError::Parse { .. })));
    }

    #[test]
    fn dangling_names_and_bad_metrics_fail_validation() {
        let text = format!("{MONICA}find T eps 1/4 mode plain\n");
        assert!(matches!(parse_scenario(&text), Err(ScenarioError::Validation { line: 9, .. })));
        let finite = "ambient points 3\nmatrix adj 1 1 1\nmatrix adj 1 1 1\nmatrix adj 1 1 1\n\
                      matrix dist 0 1 3\nmatrix dist 1 0 1\nmatrix dist 3 1 0\n";
        match parse_scenario(finite) {
            Err(ScenarioError::Validation { reason, .. }) => assert!(reason.contains("triangle"), "{reason}"),
            other => panic!("{other:?}"),
        }
        let bad_expect = format!("{MONICA}find S eps 1/4 mode plain expect refutation\n");
        assert!(matches!(parse_scenario(&bad_expect), Err(ScenarioError::Validation { .. })));
    }

    #[test]
    fn expectations_drive_the_exit_code() {
        let sc = parse_scenario(MONICA).unwrap();
        let r = run(&sc, 0).unwrap();
        assert_eq!(r.exit_code(), 0, "{}", r.text);
        let wrong = MONICA.replace("mode plain expect pass", "mode plain expect fail");
        let r = run(&parse_scenario(&wrong).unwrap(), 0).unwrap();
        assert_eq!(r.exit_code(), 1);
        assert!(r.text.contains("NOT MET"));
    }

    #[test]
    fn refute_and_certify_commands() {
        let text = format!(
            "{MONICA}refute HSP eps 1/4 template (0; 2, 3) (1; 1) N 1..3 expect refutation\n\
             certify common-image n0_max 5 expect certificate\n\
             certify trivial-fiber expect notfound\n"
        );
        let r = run(&parse_scenario(&text).unwrap(), 0).unwrap();
        assert!(r.all_met, "{}", r.text);
        assert!(r.text.contains("common-image with n0 = 2"));
        assert_eq!(r.json["commands"][2]["outcome"], "refutation");
    }

    #[test]
    fn finite_scenario_runs_mahavier_commands() {
        let text = "name golden\nambient points 2\nmatrix adj 1 1\nmatrix adj 1 0\n\
                    mahavier words 3\nmahavier mixing 5 expect primitive\nmahavier surjectivity expect both\n";
        let r = run(&parse_scenario(text).unwrap(), 0).unwrap();
        assert!(r.all_met, "{}", r.text);
        assert!(r.text.contains("5 admissible words of length 3"));
    }

    #[test]
    fn runs_are_deterministic() {
        let text = format!("{MONICA}suite count 5 expect pass\n");
        let sc = parse_scenario(&text).unwrap();
        let a = run(&sc, 11).unwrap();
        let b = run(&sc, 11).unwrap();
        assert_eq!(a.text, b.text);
        assert_eq!(a.json, b.json);
    }
}
