//! JSON encoding of inputs and reports.
//!
//! Axis indices are 1-based in every document and 0-based internally.
//! Infinite numbers are written as the strings `"inf"` and `"-inf"`.
//! Parse errors are [`Error::Schema`] values carrying the JSON path of the
//! offending field, e.g. `$.f.sum[1].w`.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::divdiff::{ConvexityCertificate, DividedDifferenceReport};
use crate::error::{Error, Result};
use crate::exprfn::{parse_expression, FunctionSpec};
use crate::geometry::{slice_function, AxisSubset, BoxDomain, Interval, MultiIndex, PointSystem, Side};
use crate::inequalities::{GapReport, Marginal, RasaReport};
use crate::measures::{DiscreteSignedMeasure, FV1Function, Jump, TensorFVFunction, UniformSegment};
use crate::orders::{FailedCondition, OrderVerdict, SignClass};
use crate::pseudopoly::{grid_interpolant, lagrange_slice_interpolant, AffinityReport, Origin, PseudoPolynomial};
use crate::represent::{spline_basis, synthesize, CellMass, Mode, RepresentationSpec};

/// Largest variable index accepted when an expression's arity is inferred.
const MAX_INFERRED_ARITY: usize = 64;

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema { path: path.to_string(), message: message.into() }
}

/// Re-labels a domain error with the path of the field that caused it.
fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Schema { .. } => e,
        other => schema(path, other.to_string()),
    })
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<(&'a Value, String)> {
    let o = object(v, path)?;
    let p = format!("{path}.{key}");
    o.get(key).map(|x| (x, p.clone())).ok_or_else(|| schema(&p, "missing field"))
}

fn optional<'a>(v: &'a Value, key: &str) -> Option<&'a Value> {
    v.get(key).filter(|x| !x.is_null())
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

/// A number, or one of the strings `"inf"`, `"+inf"`, `"-inf"`.
pub fn parse_f64(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| schema(path, "number out of range")),
        Value::String(s) => match s.as_str() {
            "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
            "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
            _ => Err(schema(path, format!("expected a number, got string {s:?}"))),
        },
        _ => Err(schema(path, "expected a number")),
    }
}

fn parse_finite(v: &Value, path: &str) -> Result<f64> {
    let x = parse_f64(v, path)?;
    if !x.is_finite() {
        return Err(schema(path, "expected a finite number"));
    }
    Ok(x)
}

pub fn parse_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| schema(path, "expected a nonnegative integer"))
}

fn parse_vec(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?.iter().enumerate().map(|(i, x)| parse_finite(x, &format!("{path}[{i}]"))).collect()
}

fn parse_vec2(v: &Value, path: &str) -> Result<Vec<Vec<f64>>> {
    array(v, path)?.iter().enumerate().map(|(i, x)| parse_vec(x, &format!("{path}[{i}]"))).collect()
}

/// 1-based axis list to a subset of `{0, ..., d-1}`.
fn parse_subset(v: &Value, d: usize, path: &str) -> Result<AxisSubset> {
    let mut members = Vec::new();
    for (i, x) in array(v, path)?.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let a = parse_usize(x, &p)?;
        if a == 0 || a > d {
            return Err(schema(&p, format!("axis {a} is not in 1..={d}")));
        }
        members.push(a - 1);
    }
    at(path, AxisSubset::new(d, members))
}

/// Encodes a real, writing infinities as strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!("nan")
    }
}

fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

fn subset_json(s: &AxisSubset) -> Value {
    json!(s.members().iter().map(|a| a + 1).collect::<Vec<_>>())
}

// ---------------------------------------------------------------- geometry

pub fn parse_multi_index(v: &Value, path: &str) -> Result<MultiIndex> {
    let entries = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_usize(x, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    at(path, MultiIndex::new(entries))
}

pub fn multi_index_to_json(n: &MultiIndex) -> Value {
    json!(n.entries())
}

/// `{"axes": [{"lo": .., "hi": ..}, ..]}`.
pub fn parse_box(v: &Value, path: &str) -> Result<BoxDomain> {
    let (axes, p) = field(v, "axes", path)?;
    let intervals = array(axes, &p)?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let q = format!("{p}[{i}]");
            let (lo, lp) = field(a, "lo", &q)?;
            let (hi, hp) = field(a, "hi", &q)?;
            at(&q, Interval::new(parse_f64(lo, &lp)?, parse_f64(hi, &hp)?))
        })
        .collect::<Result<Vec<_>>>()?;
    at(path, BoxDomain::new(intervals))
}

pub fn box_to_json(b: &BoxDomain) -> Value {
    json!({ "axes": b.axes().iter().map(|iv| json!({ "lo": num(iv.lo), "hi": num(iv.hi) })).collect::<Vec<_>>() })
}

pub fn parse_point_system(v: &Value, path: &str) -> Result<PointSystem> {
    at(path, PointSystem::new(parse_vec2(v, path)?))
}

pub fn point_system_to_json(s: &PointSystem) -> Value {
    Value::Array(s.axes().iter().map(|a| nums(a)).collect())
}

// ---------------------------------------------------------------- functions

/// Parses one of
/// `{"expr": "...", "arity"?: d}`, `{"builtin": name, "params": [..]}`,
/// `{"tabulated": {"nodes": [[..]], "values": [..]}}`,
/// `{"sum": [{"w": .., "f": ..}, ..]}`, `{"tensor": [f_1, .., f_d]}`,
/// `{"slice": {"f": .., "axes": [..], "fixed": [..]}}`,
/// `{"pseudopoly": {"f": .., "nodes": [[..]], "origin": "grid" | {"slice": i}}}`,
/// `{"synthesize": representation}` and
/// `{"spline_basis": {"subset": [..], "u": [..], "n": [..]}}`.
/// A bare string is shorthand for `{"expr": string}`.
pub fn parse_function(v: &Value, path: &str) -> Result<FunctionSpec> {
    if let Value::String(s) = v {
        return parse_expr_text(s, None, path);
    }
    let o = object(v, path)?;
    let kinds = ["expr", "builtin", "tabulated", "sum", "tensor", "slice", "pseudopoly", "synthesize", "spline_basis"];
    let Some(kind) = kinds.iter().find(|k| o.contains_key(**k)) else {
        return Err(schema(path, format!("expected one of the keys {kinds:?}")));
    };
    let p = format!("{path}.{kind}");
    let body = &o[*kind];
    match *kind {
        "expr" => {
            let text = body.as_str().ok_or_else(|| schema(&p, "expected a string"))?;
            let arity = optional(v, "arity").map(|a| parse_usize(a, &format!("{path}.arity"))).transpose()?;
            parse_expr_text(text, arity, &p)
        }
        "builtin" => {
            let name = body.as_str().ok_or_else(|| schema(&p, "expected a string"))?;
            let params = match optional(v, "params") {
                Some(ps) => parse_vec(ps, &format!("{path}.params"))?,
                None => Vec::new(),
            };
            at(path, FunctionSpec::builtin(name, &params))
        }
        "tabulated" => {
            let (nodes, np) = field(body, "nodes", &p)?;
            let (values, vp) = field(body, "values", &p)?;
            at(&p, FunctionSpec::tabulated(parse_vec2(nodes, &np)?, parse_vec(values, &vp)?))
        }
        "sum" => {
            let terms = array(body, &p)?
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let q = format!("{p}[{i}]");
                    let w = match optional(t, "w") {
                        Some(w) => parse_finite(w, &format!("{q}.w"))?,
                        None => 1.0,
                    };
                    let (f, fp) = field(t, "f", &q)?;
                    Ok((w, parse_function(f, &fp)?))
                })
                .collect::<Result<Vec<_>>>()?;
            at(&p, FunctionSpec::sum(terms))
        }
        "tensor" => {
            let factors = array(body, &p)?
                .iter()
                .enumerate()
                .map(|(i, f)| parse_function(f, &format!("{p}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            at(&p, FunctionSpec::tensor(factors))
        }
        "slice" => {
            let (f, fp) = field(body, "f", &p)?;
            let f = parse_function(f, &fp)?;
            let (axes, ap) = field(body, "axes", &p)?;
            let subset = parse_subset(axes, f.arity(), &ap)?;
            let (fixed, xp) = field(body, "fixed", &p)?;
            at(&p, slice_function(&f, &subset, &parse_vec(fixed, &xp)?, None))
        }
        "pseudopoly" => Ok(parse_pseudopoly(body, &p)?.to_function()),
        "synthesize" => at(&p, synthesize(&parse_representation(body, &p)?)),
        "spline_basis" => {
            let (n, np) = field(body, "n", &p)?;
            let n = parse_multi_index(n, &np)?;
            let (s, sp) = field(body, "subset", &p)?;
            let subset = parse_subset(s, n.dim(), &sp)?;
            let (u, up) = field(body, "u", &p)?;
            at(&p, spline_basis(&subset, &parse_vec(u, &up)?, &n))
        }
        _ => unreachable!("kind list is exhaustive"),
    }
}

fn parse_expr_text(text: &str, arity: Option<usize>, path: &str) -> Result<FunctionSpec> {
    let arity = match arity {
        Some(a) => a,
        None => at(path, parse_expression(text, MAX_INFERRED_ARITY))?.max_variable().max(1),
    };
    at(path, FunctionSpec::parse(text, arity))
}

/// Inverse of [`parse_function`]; fails for custom functions that cannot
/// describe themselves.
pub fn function_to_json(f: &FunctionSpec) -> Result<Value> {
    Ok(match f {
        FunctionSpec::Expr(e) => json!({ "expr": e.source, "arity": e.arity }),
        FunctionSpec::Builtin(b) => json!({ "builtin": b.name(), "params": nums(&b.params()) }),
        FunctionSpec::Tabulated(t) => {
            json!({ "tabulated": { "nodes": t.nodes().iter().map(|a| nums(a)).collect::<Vec<_>>(), "values": nums(t.values()) } })
        }
        FunctionSpec::Sum { terms, .. } => json!({
            "sum": terms
                .iter()
                .map(|(w, g)| Ok(json!({ "w": num(*w), "f": function_to_json(g)? })))
                .collect::<Result<Vec<_>>>()?
        }),
        FunctionSpec::Tensor(fs) => json!({ "tensor": fs.iter().map(function_to_json).collect::<Result<Vec<_>>>()? }),
        FunctionSpec::Slice(s) => json!({
            "slice": { "f": function_to_json(&s.base)?, "axes": subset_json(&s.subset), "fixed": nums(&s.fixed) }
        }),
        FunctionSpec::Custom(c) => {
            c.to_json().ok_or_else(|| Error::Invalid("function has no JSON description".into()))?
        }
    })
}

fn parse_pseudopoly(v: &Value, path: &str) -> Result<PseudoPolynomial> {
    let (f, fp) = field(v, "f", path)?;
    let f = parse_function(f, &fp)?;
    let (nodes, np) = field(v, "nodes", path)?;
    let nodes = parse_vec2(nodes, &np)?;
    match optional(v, "origin") {
        None => at(path, grid_interpolant(&f, &nodes)),
        Some(Value::String(s)) if s == "grid" => at(path, grid_interpolant(&f, &nodes)),
        Some(o) => {
            let op = format!("{path}.origin");
            let (axis, ap) = field(o, "slice", &op)?;
            let axis = parse_usize(axis, &ap)?;
            if axis == 0 || axis > f.arity() || axis > nodes.len() {
                return Err(schema(&ap, format!("axis {axis} is not in 1..={}", f.arity())));
            }
            at(path, lagrange_slice_interpolant(&f, axis - 1, &nodes[axis - 1]))
        }
    }
}

/// `{"pseudopoly": {"f", "origin", "nodes", "degree"}}`; rebuilding needs
/// only `f`, `origin` and `nodes`.
pub fn pseudopoly_to_json(w: &PseudoPolynomial) -> Result<Value> {
    let origin = match w.origin() {
        Origin::Grid => json!("grid"),
        Origin::Slice { axis } => json!({ "slice": axis + 1 }),
    };
    Ok(json!({
        "pseudopoly": {
            "f": function_to_json(w.source())?,
            "origin": origin,
            "nodes": w.nodes().iter().map(|a| nums(a)).collect::<Vec<_>>(),
            "degree": w.degree(),
        }
    }))
}

// ---------------------------------------------------------------- measures

/// `{"dim": p, "atoms": [{"x": [..], "w": ..}, ..]}` or
/// `{"binomial": {"n": .., "p": ..}}`.
pub fn parse_measure(v: &Value, path: &str) -> Result<DiscreteSignedMeasure> {
    if let Some(b) = optional(v, "binomial") {
        let p = format!("{path}.binomial");
        let (n, np) = field(b, "n", &p)?;
        let (q, qp) = field(b, "p", &p)?;
        return at(&p, DiscreteSignedMeasure::binomial(parse_usize(n, &np)?, parse_finite(q, &qp)?));
    }
    let (dim, dp) = field(v, "dim", path)?;
    let dim = parse_usize(dim, &dp)?;
    let (atoms, ap) = field(v, "atoms", path)?;
    let atoms = array(atoms, &ap)?
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let q = format!("{ap}[{i}]");
            let (x, xp) = field(a, "x", &q)?;
            let (w, wp) = field(a, "w", &q)?;
            let x = match x {
                Value::Array(_) => parse_vec(x, &xp)?,
                other => vec![parse_finite(other, &xp)?],
            };
            Ok((x, parse_finite(w, &wp)?))
        })
        .collect::<Result<Vec<_>>>()?;
    at(path, DiscreteSignedMeasure::new(dim, atoms))
}

pub fn measure_to_json(m: &DiscreteSignedMeasure) -> Value {
    json!({
        "dim": m.dim(),
        "atoms": m.atoms().iter().map(|a| json!({ "x": nums(&a.x), "w": num(a.w) })).collect::<Vec<_>>(),
    })
}

/// A measure, `{"uniform": {"a", "b", "m"?}}` or `{"point": x}`.
/// `default_m` is used when a uniform segment gives no resolution.
pub fn parse_marginal(v: &Value, path: &str, default_m: usize) -> Result<Marginal> {
    if let Some(u) = optional(v, "uniform") {
        let p = format!("{path}.uniform");
        let (a, ap) = field(u, "a", &p)?;
        let (b, bp) = field(u, "b", &p)?;
        let m = match optional(u, "m") {
            Some(m) => parse_usize(m, &format!("{p}.m"))?,
            None => default_m,
        };
        return Ok(Marginal::Uniform(at(&p, UniformSegment::new(parse_finite(a, &ap)?, parse_finite(b, &bp)?, m))?));
    }
    if let Some(x) = optional(v, "point") {
        return Ok(Marginal::Point(parse_finite(x, &format!("{path}.point"))?));
    }
    Ok(Marginal::Discrete(parse_measure(v, path)?))
}

pub fn marginal_to_json(m: &Marginal) -> Value {
    match m {
        Marginal::Discrete(d) => measure_to_json(d),
        Marginal::Uniform(u) => json!({ "uniform": { "a": num(u.a), "b": num(u.b), "m": u.m } }),
        Marginal::Point(x) => json!({ "point": num(*x) }),
    }
}

// ------------------------------------------------------- finite variation

/// `{"offset"?: c, "smooth"?: f, "jumps"?: [{"t", "left", "right"}]}`.
pub fn parse_fv1(v: &Value, path: &str) -> Result<FV1Function> {
    let offset = match optional(v, "offset") {
        Some(c) => parse_finite(c, &format!("{path}.offset"))?,
        None => 0.0,
    };
    let smooth = match optional(v, "smooth") {
        Some(f) => parse_function(f, &format!("{path}.smooth"))?,
        None => FunctionSpec::constant(1, 0.0),
    };
    let jumps = match optional(v, "jumps") {
        Some(js) => {
            let p = format!("{path}.jumps");
            array(js, &p)?
                .iter()
                .enumerate()
                .map(|(i, j)| {
                    let q = format!("{p}[{i}]");
                    let get = |k: &str| -> Result<f64> {
                        match optional(j, k) {
                            Some(x) => parse_finite(x, &format!("{q}.{k}")),
                            None if k == "t" => Err(schema(&format!("{q}.t"), "missing field")),
                            None => Ok(0.0),
                        }
                    };
                    Ok(Jump { t: get("t")?, left: get("left")?, right: get("right")? })
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    at(path, FV1Function::new(smooth, offset, jumps))
}

pub fn fv1_to_json(f: &FV1Function) -> Result<Value> {
    Ok(json!({
        "offset": num(f.offset),
        "smooth": function_to_json(&f.smooth)?,
        "jumps": f.jumps().iter().map(|j| json!({ "t": num(j.t), "left": num(j.left), "right": num(j.right) })).collect::<Vec<_>>(),
    }))
}

/// `{"dim": d, "terms": [{"c"?: .., "factors": [fv1, ..]}, ..]}`.
pub fn parse_tensor_fv(v: &Value, path: &str) -> Result<TensorFVFunction> {
    let (dim, dp) = field(v, "dim", path)?;
    let dim = parse_usize(dim, &dp)?;
    let (terms, tp) = field(v, "terms", path)?;
    let terms = array(terms, &tp)?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let q = format!("{tp}[{i}]");
            let c = match optional(t, "c") {
                Some(c) => parse_finite(c, &format!("{q}.c"))?,
                None => 1.0,
            };
            let (fs, fp) = field(t, "factors", &q)?;
            let factors = array(fs, &fp)?
                .iter()
                .enumerate()
                .map(|(j, f)| parse_fv1(f, &format!("{fp}[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            Ok((c, factors))
        })
        .collect::<Result<Vec<_>>>()?;
    at(path, TensorFVFunction::new(dim, terms))
}

pub fn tensor_fv_to_json(f: &TensorFVFunction) -> Result<Value> {
    Ok(json!({
        "dim": f.dim(),
        "terms": f
            .terms()
            .iter()
            .map(|(c, fs)| Ok(json!({ "c": num(*c), "factors": fs.iter().map(fv1_to_json).collect::<Result<Vec<_>>>()? })))
            .collect::<Result<Vec<_>>>()?,
    }))
}

// ---------------------------------------------------------- representation

/// `{"n": [..], "alpha": [..], "w"?: f, "parts": {"rL": measure, ..},
/// "mode"?: "canonical" | "permissive"}`. Part labels list one side per
/// axis: `L` for `[x, y)`, `r` for `(x, y]`.
pub fn parse_representation(v: &Value, path: &str) -> Result<RepresentationSpec> {
    let (n, np) = field(v, "n", path)?;
    let n = parse_multi_index(n, &np)?;
    let (alpha, ap) = field(v, "alpha", path)?;
    let alpha = parse_vec(alpha, &ap)?;
    let w = optional(v, "w").map(|w| parse_function(w, &format!("{path}.w"))).transpose()?;
    let mode = match optional(v, "mode").map(|m| (m.as_str(), m)) {
        None | Some((Some("canonical"), _)) => Mode::Canonical,
        Some((Some("permissive"), _)) => Mode::Permissive,
        Some(_) => return Err(schema(&format!("{path}.mode"), "expected \"canonical\" or \"permissive\"")),
    };
    let mut parts = BTreeMap::new();
    if let Some(ps) = optional(v, "parts") {
        let pp = format!("{path}.parts");
        for (label, m) in object(ps, &pp)? {
            let q = format!("{pp}.{label}");
            let sides = Side::parse_label(label)
                .ok_or_else(|| schema(&q, "part labels are strings over {L, r}"))?;
            parts.insert(sides, parse_measure(m, &q)?);
        }
    }
    at(path, RepresentationSpec::new(n, alpha, w, parts, mode))
}

pub fn representation_to_json(s: &RepresentationSpec) -> Result<Value> {
    let mut parts = Map::new();
    for (b, mu) in &s.parts {
        parts.insert(Side::label(b), measure_to_json(mu));
    }
    Ok(json!({
        "n": multi_index_to_json(&s.n),
        "alpha": nums(&s.alpha),
        "w": s.w.as_ref().map(function_to_json).transpose()?,
        "parts": parts,
        "mode": s.mode.name(),
    }))
}

// ---------------------------------------------------------------- reports

pub fn divdiff_report_to_json(r: &DividedDifferenceReport) -> Value {
    json!({
        "value": num(r.value),
        "method": r.method.name(),
        "system": point_system_to_json(&r.system),
        "max_term": num(r.max_term),
    })
}

pub fn certificate_to_json(c: &ConvexityCertificate) -> Value {
    json!({
        "verdict": c.verdict.name(),
        "trials": c.trials,
        "min_value": num(c.min_value),
        "witness": c.witness.as_ref().map(point_system_to_json),
        "witness_value": c.witness_value.map(num),
        "witness_threshold": c.witness_threshold.map(num),
        "tolerance": num(c.tolerance),
    })
}

pub fn affinity_to_json(r: &AffinityReport) -> Value {
    json!({
        "affine": r.affine,
        "trials": r.trials,
        "max_abs_value": num(r.max_abs_value),
        "worst": r.worst.as_ref().map(point_system_to_json),
        "tolerance": num(r.tolerance),
    })
}

pub fn sign_class_to_json(c: &SignClass) -> Value {
    match *c {
        SignClass::Nonneg { witness, value } | SignClass::Nonpos { witness, value } => {
            json!({ "class": c.name(), "witness": num(witness), "value": num(value) })
        }
        SignClass::Mixed { neg, neg_value, pos, pos_value } => json!({
            "class": "mixed",
            "negative_at": num(neg),
            "negative_value": num(neg_value),
            "positive_at": num(pos),
            "positive_value": num(pos_value),
        }),
    }
}

pub fn failed_condition_to_json(f: &FailedCondition) -> Value {
    let details = match f {
        FailedCondition::None => Value::Null,
        FailedCondition::Moment { axis, k, value, location } => json!({
            "axis": axis.map(|a| a + 1),
            "k": k,
            "value": num(*value),
            "location": location.as_deref().map(nums),
        }),
        FailedCondition::Spline { subset, u, value } => json!({
            "subset": subset.as_ref().map(subset_json),
            "u": nums(u),
            "value": num(*value),
        }),
        FailedCondition::MixedFactor { factor } => json!({ "mixed_factor": factor + 1 }),
        FailedCondition::Parity { nonpos } => json!({ "nonpositive_factors": nonpos }),
    };
    json!({ "condition": f.name(), "details": details })
}

pub fn order_verdict_to_json(v: &OrderVerdict) -> Value {
    json!({
        "verdict": if v.holds { "holds" } else { "fails" },
        "failed": failed_condition_to_json(&v.failed),
        "classes": v.classes.iter().map(sign_class_to_json).collect::<Vec<_>>(),
        "spline_min": v.spline_min.map(|(t, value)| json!({ "at": num(t), "value": num(value) })),
        "minus_side_agrees": v.minus_side_agrees,
    })
}

pub fn gap_report_to_json(r: &GapReport) -> Value {
    json!({
        "value": num(r.value),
        "contributions": r
            .contributions
            .iter()
            .map(|(s, e)| json!({ "subset": subset_json(s), "expectation": num(*e) }))
            .collect::<Vec<_>>(),
        "resolution": r.resolution,
    })
}

pub fn rasa_report_to_json(r: &RasaReport) -> Value {
    json!({
        "verdict": order_verdict_to_json(&r.verdict),
        "factors": r
            .factors
            .iter()
            .map(|f| json!({
                "power": measure_to_json(&f.power),
                "moments_vanish": f.moments_vanish,
                "class": f.class.as_ref().map(sign_class_to_json),
                "values": f
                    .values
                    .iter()
                    .map(|&(a, bridge, direct)| json!({ "a": num(a), "value": num(bridge), "survival_convolution": num(direct) }))
                    .collect::<Vec<_>>(),
                "bridge_error": num(f.bridge_error),
            }))
            .collect::<Vec<_>>(),
    })
}

pub fn cell_masses_to_json(cells: &[CellMass]) -> Value {
    Value::Array(
        cells
            .iter()
            .map(|c| {
                json!({
                    "rect": c.rect.iter().map(|&(y, z)| json!([num(y), num(z)])).collect::<Vec<_>>(),
                    "mass": num(c.mass),
                })
            })
            .collect(),
    )
}
