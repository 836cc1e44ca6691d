//! Command dispatch for the `boxconvex` binary: one JSON document in, one
//! JSON report out, and an exit code derived from the verdict.

use std::fmt;

use boxconvex::divdiff::{divdiff_multi, divdiff_right_limit, certify_box_convexity, CertifyOptions, Method, Verdict};
use boxconvex::inequalities::{alternating_gap, hh_check, jensen_gap, rasa_check, strongly_convex_check, HHKind};
use boxconvex::io::{self, num};
use boxconvex::measures::tensor_decompose;
use boxconvex::orders::{check_box_order_joint, check_box_order_product, check_nconvex_order, check_signed_positive};
use boxconvex::pseudopoly::{check_box_affine, regularize};
use boxconvex::represent::{probe_grid, roundtrip_extract, synthesize};
use boxconvex::sampling::{Sampler, DEFAULT_SEPARATION};
use boxconvex::{Error, FunctionSpec, MultiIndex, Side};
use serde_json::{json, Value};

/// Commands accepted by the binary.
pub const COMMANDS: [&str; 13] = [
    "divdiff",
    "certify",
    "interpolate",
    "regularize",
    "order",
    "box-order",
    "hh",
    "jensen",
    "rasa",
    "synth",
    "extract-measure",
    "decompose",
    "strong",
];

pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_RESOLUTION: usize = 16;
/// Tolerance of the sampling certifiers (relative to the largest summand).
pub const DEFAULT_CERTIFY_TOL: f64 = 1e-9;
/// Tolerance below which an inequality gap counts as negative.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
/// Tolerance of pointwise comparisons (residuals, sums of parts).
pub const DEFAULT_MATCH_TOL: f64 = 1e-9;

/// Global overrides from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Config {
    pub seed: u64,
    pub tol: Option<f64>,
    pub trials: Option<usize>,
    pub resolution: Option<usize>,
}

/// A finished run: the report and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub code: i32,
}

/// Input errors; all map to exit code 2.
#[derive(Debug)]
pub enum CliError {
    UnknownCommand(String),
    Json(serde_json::Error),
    Input(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::UnknownCommand(c) => write!(f, "unknown command `{c}`"),
            CliError::Json(e) => write!(f, "malformed JSON: {e}"),
            CliError::Input(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Input(e)
    }
}

impl CliError {
    pub const EXIT_CODE: i32 = 2;

    /// JSON description written to stderr.
    pub fn to_json(&self) -> Value {
        match self {
            CliError::UnknownCommand(c) => json!({ "error": "unknown-command", "message": self.to_string(), "command": c }),
            CliError::Json(e) => json!({
                "error": "malformed-json",
                "message": self.to_string(),
                "line": e.line(),
                "column": e.column(),
            }),
            CliError::Input(Error::Schema { path, message }) => {
                json!({ "error": "schema", "message": message, "path": path })
            }
            CliError::Input(e) => json!({ "error": "invalid-input", "message": e.to_string() }),
        }
    }
}

type Res<T> = Result<T, CliError>;

fn schema(path: &str, message: impl Into<String>) -> CliError {
    CliError::Input(Error::Schema { path: path.to_string(), message: message.into() })
}

fn with_path<T>(path: &str, r: boxconvex::Result<T>) -> Res<T> {
    r.map_err(|e| match e {
        Error::Schema { .. } => CliError::Input(e),
        other => schema(path, other.to_string()),
    })
}

fn req<'a>(doc: &'a Value, key: &str) -> Res<(&'a Value, String)> {
    if !doc.is_object() {
        return Err(schema("$", "expected an object"));
    }
    let p = format!("$.{key}");
    doc.get(key).filter(|v| !v.is_null()).map(|v| (v, p.clone())).ok_or_else(|| schema(&p, "missing field"))
}

fn opt<'a>(doc: &'a Value, key: &str) -> Option<(&'a Value, String)> {
    doc.get(key).filter(|v| !v.is_null()).map(|v| (v, format!("$.{key}")))
}

fn function(doc: &Value, key: &str) -> Res<FunctionSpec> {
    let (v, p) = req(doc, key)?;
    Ok(io::parse_function(v, &p)?)
}

fn multi_index(doc: &Value, key: &str) -> Res<MultiIndex> {
    let (v, p) = req(doc, key)?;
    Ok(io::parse_multi_index(v, &p)?)
}

fn measures(doc: &Value, key: &str) -> Res<Vec<boxconvex::measures::DiscreteSignedMeasure>> {
    let (v, p) = req(doc, key)?;
    let items = v.as_array().ok_or_else(|| schema(&p, "expected an array"))?;
    items.iter().enumerate().map(|(i, m)| Ok(io::parse_measure(m, &format!("{p}[{i}]"))?)).collect()
}

fn vectors(v: &Value, p: &str) -> Res<Vec<Vec<f64>>> {
    let items = v.as_array().ok_or_else(|| schema(p, "expected an array"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let q = format!("{p}[{i}]");
            let row = row.as_array().ok_or_else(|| schema(&q, "expected an array"))?;
            row.iter().enumerate().map(|(j, x)| Ok(io::parse_f64(x, &format!("{q}[{j}]"))?)).collect()
        })
        .collect()
}

fn probes(doc: &Value, arity: usize) -> Res<Vec<Vec<f64>>> {
    let Some((v, p)) = opt(doc, "probes") else {
        return Ok(Vec::new());
    };
    let pts = vectors(v, &p)?;
    if let Some(i) = pts.iter().position(|x| x.len() != arity) {
        return Err(schema(&format!("{p}[{i}]"), format!("expected {arity} coordinates")));
    }
    Ok(pts)
}

fn flag_or<T: Copy>(flag: Option<T>, doc: &Value, key: &str, parse: impl Fn(&Value, &str) -> boxconvex::Result<T>, default: T) -> Res<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match opt(doc, key) {
        Some((v, p)) => Ok(parse(v, &p)?),
        None => Ok(default),
    }
}

/// Effective settings echoed in every report.
struct Effective {
    seed: u64,
    tol: f64,
    trials: Option<usize>,
    resolution: Option<usize>,
}

impl Effective {
    fn new(cfg: &Config, doc: &Value, tol_default: f64) -> Res<Self> {
        let tol = flag_or(cfg.tol, doc, "tol", io::parse_f64, tol_default)?;
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(schema("$.tol", "tolerance must be a finite nonnegative number"));
        }
        Ok(Self { seed: cfg.seed, tol, trials: None, resolution: None })
    }

    fn trials(&mut self, cfg: &Config, doc: &Value) -> Res<usize> {
        let t = flag_or(cfg.trials, doc, "trials", io::parse_usize, DEFAULT_TRIALS)?;
        self.trials = Some(t);
        Ok(t)
    }

    fn resolution(&mut self, cfg: &Config, doc: &Value) -> Res<usize> {
        let m = flag_or(cfg.resolution, doc, "resolution", io::parse_usize, DEFAULT_RESOLUTION)?;
        self.resolution = Some(m);
        Ok(m)
    }

    fn certify_options(&mut self, cfg: &Config, doc: &Value) -> Res<CertifyOptions> {
        let trials = self.trials(cfg, doc)?;
        let sampler = match opt(doc, "sampler") {
            None => Sampler::Random { seed: self.seed },
            Some((v, p)) => match v.as_str() {
                Some("random") => Sampler::Random { seed: self.seed },
                Some("grid") => Sampler::Grid,
                _ => return Err(schema(&p, "expected \"random\" or \"grid\"")),
            },
        };
        let separation = match opt(doc, "separation") {
            Some((v, p)) => io::parse_f64(v, &p)?,
            None => DEFAULT_SEPARATION,
        };
        Ok(CertifyOptions { trials, tol: self.tol, sampler, separation })
    }

    fn to_json(&self) -> Value {
        json!({ "seed": self.seed, "tol": num(self.tol), "trials": self.trials, "resolution": self.resolution })
    }
}

fn finish(command: &str, statement: &str, doc: &Value, eff: &Effective, holds: Option<bool>, result: Value) -> Outcome {
    let verdict = match holds {
        Some(true) => json!("holds"),
        Some(false) => json!("fails"),
        None => Value::Null,
    };
    let report = json!({
        "command": command,
        "statement": statement,
        "config": eff.to_json(),
        "input": doc,
        "verdict": verdict,
        "result": result,
    });
    Outcome { report, code: if holds == Some(false) { 1 } else { 0 } }
}

/// Parses `input` and runs `command`.
pub fn dispatch(command: &str, input: &str, cfg: &Config) -> Res<Outcome> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::UnknownCommand(command.to_string()));
    }
    let doc: Value = serde_json::from_str(input).map_err(CliError::Json)?;
    if !doc.is_object() {
        return Err(schema("$", "expected an object"));
    }
    match command {
        "divdiff" => cmd_divdiff(&doc, cfg),
        "certify" => cmd_certify(&doc, cfg),
        "interpolate" => cmd_interpolate(&doc, cfg),
        "regularize" => cmd_regularize(&doc, cfg),
        "order" => cmd_order(&doc, cfg),
        "box-order" => cmd_box_order(&doc, cfg),
        "hh" => cmd_hh(&doc, cfg),
        "jensen" => cmd_jensen(&doc, cfg),
        "rasa" => cmd_rasa(&doc, cfg),
        "synth" => cmd_synth(&doc, cfg),
        "extract-measure" => cmd_extract(&doc, cfg),
        "decompose" => cmd_decompose(&doc, cfg),
        "strong" => cmd_strong(&doc, cfg),
        _ => unreachable!("command list checked above"),
    }
}

fn axis_order(doc: &Value, d: usize) -> Res<Option<Vec<usize>>> {
    let Some((v, p)) = opt(doc, "axis_order") else {
        return Ok(None);
    };
    let items = v.as_array().ok_or_else(|| schema(&p, "expected an array"))?;
    let mut order = Vec::with_capacity(items.len());
    for (i, x) in items.iter().enumerate() {
        let q = format!("{p}[{i}]");
        let a = io::parse_usize(x, &q)?;
        if a == 0 || a > d {
            return Err(schema(&q, format!("axis {a} is not in 1..={d}")));
        }
        order.push(a - 1);
    }
    Ok(Some(order))
}

fn cmd_divdiff(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let eff = Effective::new(cfg, doc, DEFAULT_CERTIFY_TOL)?;
    let f = function(doc, "f")?;
    let (nodes, np) = req(doc, "nodes")?;
    let system = io::parse_point_system(nodes, &np)?;
    let order = axis_order(doc, system.dim())?;
    let methods: Vec<Method> = match opt(doc, "method") {
        None => vec![Method::Recursive, Method::Expanded],
        Some((v, p)) => match v.as_str() {
            Some("recursive") => vec![Method::Recursive],
            Some("expanded") => vec![Method::Expanded],
            Some("both") => vec![Method::Recursive, Method::Expanded],
            _ => return Err(schema(&p, "expected \"recursive\", \"expanded\" or \"both\"")),
        },
    };
    let mut reports = Vec::new();
    for m in &methods {
        reports.push(with_path("$", divdiff_multi(&system, &f, *m, order.as_deref()))?);
    }
    let mut result = json!({ "reports": reports.iter().map(io::divdiff_report_to_json).collect::<Vec<_>>() });
    let mut holds = None;
    if let [r, e] = reports.as_slice() {
        let diff = (r.value - e.value).abs();
        let agree = diff <= eff.tol * e.max_term.max(f64::MIN_POSITIVE);
        result["difference"] = num(diff);
        result["methods_agree"] = json!(agree);
        holds = Some(agree);
    }
    if let Some((rl, p)) = opt(doc, "right_limit") {
        if system.dim() != 1 {
            return Err(schema(&p, "the right-limit formula is one-dimensional"));
        }
        let k = io::parse_usize(rl.get("k").unwrap_or(&Value::Null), &format!("{p}.k"))?;
        let deriv = io::parse_function(rl.get("derivative").unwrap_or(&Value::Null), &format!("{p}.derivative"))?;
        let v = with_path(&p, divdiff_right_limit(system.axis(0), k, &f, &deriv))?;
        result["right_limit"] = json!({ "k": k, "value": num(v) });
    }
    Ok(finish(
        "divdiff",
        "multiple divided difference [x_1; ...; x_d; f], nested one-dimensional differences versus the expanded weighted sum",
        doc,
        &eff,
        holds,
        result,
    ))
}

fn cmd_certify(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let mut eff = Effective::new(cfg, doc, DEFAULT_CERTIFY_TOL)?;
    let f = function(doc, "f")?;
    let n = multi_index(doc, "n")?;
    let (b, bp) = req(doc, "box")?;
    let domain = io::parse_box(b, &bp)?;
    let opts = eff.certify_options(cfg, doc)?;
    let c = with_path("$", certify_box_convexity(&f, &n, &domain, &opts))?;
    let holds = c.verdict == Verdict::CertifiedOnSamples;
    Ok(finish(
        "certify",
        "a function is box-n-convex iff all its divided differences of order n are nonnegative (checked on sampled point systems)",
        doc,
        &eff,
        Some(holds),
        io::certificate_to_json(&c),
    ))
}

fn node_lists(doc: &Value) -> Res<Vec<Vec<f64>>> {
    let (v, p) = req(doc, "nodes")?;
    vectors(v, &p)
}

fn cmd_interpolate(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let mut eff = Effective::new(cfg, doc, DEFAULT_CERTIFY_TOL)?;
    let f = function(doc, "f")?;
    let mut pp = json!({ "f": req(doc, "f")?.0, "nodes": req(doc, "nodes")?.0 });
    if let Some((o, _)) = opt(doc, "origin") {
        pp["origin"] = o.clone();
    }
    let w = with_path("$", io::parse_function(&json!({ "pseudopoly": pp }), "$"))?;
    let FunctionSpec::Custom(c) = &w else { unreachable!("pseudopoly parses to a custom function") };
    let described = c.to_json().unwrap_or(Value::Null);
    let pts = probes(doc, f.arity())?;
    let mut values = Vec::new();
    for x in &pts {
        let wx = w.eval(x).map_err(|e| CliError::Input(e.into()))?;
        let fx = f.eval(x).map_err(|e| CliError::Input(e.into()))?;
        values.push(json!({ "x": x, "w": num(wx), "f": num(fx) }));
    }
    let mut result = json!({ "pseudopoly": described, "probes": values });
    let mut holds = None;
    if let Some((b, bp)) = opt(doc, "box") {
        let domain = io::parse_box(b, &bp)?;
        let degree: Vec<isize> = described["pseudopoly"]["degree"]
            .as_array()
            .map(|a| a.iter().filter_map(Value::as_i64).map(|k| k as isize).collect())
            .unwrap_or_default();
        let n = with_path("$.nodes", MultiIndex::new(degree.iter().map(|&k| (k + 1).max(1) as usize).collect()))?;
        let trials = eff.trials(cfg, doc)?;
        let r = with_path("$", check_box_affine(&w, &n, &domain, trials, eff.tol, Sampler::Random { seed: eff.seed }))?;
        holds = Some(r.affine);
        result["affinity"] = json!({ "n": io::multi_index_to_json(&n), "report": io::affinity_to_json(&r) });
    }
    Ok(finish(
        "interpolate",
        "Lagrange interpolants on node hyperplanes are pseudo-polynomials, i.e. box-n-affine functions",
        doc,
        &eff,
        holds,
        result,
    ))
}

fn cmd_regularize(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let mut eff = Effective::new(cfg, doc, DEFAULT_MATCH_TOL)?;
    let f = function(doc, "f")?;
    let n = multi_index(doc, "n")?;
    let nodes = node_lists(doc)?;
    let (g, w) = with_path("$", regularize(&f, &n, &nodes))?;
    let pts = probes(doc, f.arity())?;
    let mut values = Vec::new();
    for x in &pts {
        let gx = g.eval(x).map_err(|e| CliError::Input(e.into()))?;
        values.push(json!({ "x": x, "g": num(gx) }));
    }
    let mut result = json!({
        "w": io::pseudopoly_to_json(&w)?,
        "g": io::function_to_json(&g)?,
        "probes": values,
    });
    let mut holds = None;
    if let Some((b, bp)) = opt(doc, "box") {
        let domain = io::parse_box(b, &bp)?;
        let mut opts = eff.certify_options(cfg, doc)?;
        if opt(doc, "tol").is_none() && cfg.tol.is_none() {
            opts.tol = DEFAULT_CERTIFY_TOL;
            eff.tol = DEFAULT_CERTIFY_TOL;
        }
        let c = with_path("$", certify_box_convexity(&g, &n, &domain, &opts))?;
        holds = Some(c.verdict == Verdict::CertifiedOnSamples);
        result["certificate"] = io::certificate_to_json(&c);
    }
    Ok(finish(
        "regularize",
        "subtracting the grid interpolant W leaves g = f - W vanishing on every node hyperplane with the same box-n divided differences",
        doc,
        &eff,
        holds,
        result,
    ))
}

fn order_value(doc: &Value) -> Res<u32> {
    let (v, p) = req(doc, "n")?;
    let n = io::parse_usize(v, &p)?;
    u32::try_from(n).map_err(|_| schema(&p, "order too large"))
}

fn cmd_order(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let eff = Effective::new(cfg, doc, boxconvex::orders::ORDER_TOL)?;
    let n = order_value(doc)?;
    let (verdict, statement) = if let Some((g, gp)) = opt(doc, "gamma") {
        let gamma = io::parse_measure(g, &gp)?;
        (
            with_path("$", check_signed_positive(&gamma, n))?,
            "a zero-mass signed measure is nonnegative on n-convex functions iff its moments up to n vanish and its truncated-power profile of degree n is nonnegative",
        )
    } else {
        let (x, xp) = req(doc, "x")?;
        let (y, yp) = req(doc, "y")?;
        let x = io::parse_measure(x, &xp)?;
        let y = io::parse_measure(y, &yp)?;
        (
            with_path("$", check_nconvex_order(&x, &y, n))?,
            "X precedes Y in the n-convex order iff moments 1..n agree and E(Y-t)_+^n >= E(X-t)_+^n for all t",
        )
    };
    Ok(finish("order", statement, doc, &eff, Some(verdict.holds), io::order_verdict_to_json(&verdict)))
}

fn cmd_box_order(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let eff = Effective::new(cfg, doc, boxconvex::orders::ORDER_TOL)?;
    let n = multi_index(doc, "n")?;
    let mode = match opt(doc, "mode") {
        None => {
            if doc.get("factors").is_some() {
                "product"
            } else {
                "joint"
            }
        }
        Some((v, p)) => match v.as_str() {
            Some(m @ ("product" | "joint")) => m,
            _ => return Err(schema(&p, "expected \"product\" or \"joint\"")),
        },
    };
    let (verdict, statement) = if mode == "product" {
        let factors = measures(doc, "factors")?;
        (
            with_path("$", check_box_order_product(&factors, &n))?,
            "a product of zero-mass signed measures is nonnegative on box-n-convex functions iff each factor is one-signed against the (n_j - 1)-convex cone and the number of nonpositive factors is even",
        )
    } else {
        let (x, xp) = req(doc, "x")?;
        let (y, yp) = req(doc, "y")?;
        let x = io::parse_measure(x, &xp)?;
        let y = io::parse_measure(y, &yp)?;
        let grid = match opt(doc, "u_grid") {
            Some((v, p)) => Some(vectors(v, &p)?),
            None => None,
        };
        (
            with_path("$", check_box_order_joint(&x, &y, &n, grid.as_deref()))?,
            "X precedes Y in the box-n-convex order iff they agree on pseudo-polynomials of degree n - 1 and E f_{A,u}(Y) >= E f_{A,u}(X) for every spline kernel",
        )
    };
    let mut result = io::order_verdict_to_json(&verdict);
    result["mode"] = json!(mode);
    Ok(finish("box-order", statement, doc, &eff, Some(verdict.holds), result))
}

fn gap_outcome(command: &str, statement: &str, doc: &Value, eff: &Effective, r: &boxconvex::inequalities::GapReport) -> Outcome {
    let holds = r.value >= -eff.tol;
    finish(command, statement, doc, eff, Some(holds), io::gap_report_to_json(r))
}

fn cmd_hh(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let mut eff = Effective::new(cfg, doc, DEFAULT_GAP_TOL)?;
    let m = eff.resolution(cfg, doc)?;
    let f = function(doc, "f")?;
    if let (Some((xs, xp)), Some((ys, yp))) = (opt(doc, "x"), opt(doc, "y")) {
        let parse = |v: &Value, p: &str| -> Res<Vec<boxconvex::inequalities::Marginal>> {
            let items = v.as_array().ok_or_else(|| schema(p, "expected an array"))?;
            items.iter().enumerate().map(|(i, m0)| Ok(io::parse_marginal(m0, &format!("{p}[{i}]"), m)?)).collect()
        };
        let r = with_path("$", alternating_gap(&f, &parse(xs, &xp)?, &parse(ys, &yp)?))?;
        return Ok(gap_outcome(
            "hh",
            "sum over A of (-1)^|A| E f(Z_A) >= 0 for box-n-convex f when X_i precedes Y_i in the (n_i - 1)-convex order",
            doc,
            &eff,
            &r,
        ));
    }
    let (b, bp) = req(doc, "box")?;
    let domain = io::parse_box(b, &bp)?;
    let corners: Vec<(f64, f64)> = domain.axes().iter().map(|iv| (iv.lo, iv.hi)).collect();
    let kind = match opt(doc, "which") {
        None => HHKind::First,
        Some((v, p)) => match v.as_str() {
            Some("first") => HHKind::First,
            Some("second") => HHKind::Second,
            _ => return Err(schema(&p, "expected \"first\" or \"second\"")),
        },
    };
    let r = with_path("$", hh_check(&f, &corners, kind, m))?;
    let statement = match kind {
        HHKind::First => "first Hermite-Hadamard inequality for box-(2,...,2)-convex functions: midpoint against uniform marginals",
        HHKind::Second => "second Hermite-Hadamard inequality for box-(2,...,2)-convex functions: uniform against endpoint marginals",
    };
    Ok(gap_outcome("hh", statement, doc, &eff, &r))
}

fn cmd_jensen(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let eff = Effective::new(cfg, doc, DEFAULT_GAP_TOL)?;
    let f = function(doc, "f")?;
    let marginals = measures(doc, "marginals")?;
    let r = with_path("$", jensen_gap(&f, &marginals))?;
    Ok(gap_outcome(
        "jensen",
        "Jensen inequality for box-(2,...,2)-convex functions: point masses at the means against the discrete marginals",
        doc,
        &eff,
        &r,
    ))
}

fn cmd_rasa(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let eff = Effective::new(cfg, doc, boxconvex::orders::ORDER_TOL)?;
    let mus = measures(doc, "mu")?;
    let nus = measures(doc, "nu")?;
    let n = multi_index(doc, "n")?;
    let grid = match opt(doc, "a_grid") {
        Some((v, p)) => Some(vectors(v, &p)?),
        None => None,
    };
    let r = with_path("$", rasa_check(&mus, &nus, &n, grid.as_deref()))?;
    Ok(finish(
        "rasa",
        "the product of (nu_i - mu_i)^{*n_i} is nonnegative on box-n-convex functions iff the product of the factor functions (F_nu_i - F_mu_i)^{*n_i} is nonnegative",
        doc,
        &eff,
        Some(r.verdict.holds),
        io::rasa_report_to_json(&r),
    ))
}

fn cmd_synth(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let mut eff = Effective::new(cfg, doc, DEFAULT_CERTIFY_TOL)?;
    let (s, sp) = req(doc, "spec")?;
    let spec = io::parse_representation(s, &sp)?;
    let f = with_path(&sp, synthesize(&spec))?;
    let pts = probes(doc, spec.dim())?;
    let mut values = Vec::new();
    for x in &pts {
        let v = f.eval(x).map_err(|e| CliError::Input(e.into()))?;
        values.push(json!({ "x": x, "f": num(v) }));
    }
    let mut result = json!({ "function": io::function_to_json(&f)?, "probes": values });
    let mut holds = None;
    if let Some((b, bp)) = opt(doc, "box") {
        let domain = io::parse_box(b, &bp)?;
        let opts = eff.certify_options(cfg, doc)?;
        let c = with_path("$", certify_box_convexity(&f, &spec.n, &domain, &opts))?;
        holds = Some(c.verdict == Verdict::CertifiedOnSamples);
        result["certificate"] = io::certificate_to_json(&c);
    }
    Ok(finish(
        "synth",
        "W plus the integral of the kernels prod (x_j - u_j)^{n_j - 1}/(n_j - 1)! chi^{b_j} against nonnegative measures is box-n-convex",
        doc,
        &eff,
        holds,
        result,
    ))
}

fn cmd_extract(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let eff = Effective::new(cfg, doc, DEFAULT_MATCH_TOL)?;
    let (s, sp) = req(doc, "spec")?;
    let spec = io::parse_representation(s, &sp)?;
    let d = spec.dim();
    let rects: Vec<Vec<(f64, f64)>> = if let Some((v, p)) = opt(doc, "rects") {
        let items = v.as_array().ok_or_else(|| schema(&p, "expected an array"))?;
        items
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let q = format!("{p}[{i}]");
                let sides = vectors(r, &q)?;
                if sides.len() != d || sides.iter().any(|s| s.len() != 2) {
                    return Err(schema(&q, format!("expected {d} pairs [y, z]")));
                }
                Ok(sides.iter().map(|s| (s[0], s[1])).collect())
            })
            .collect::<Res<_>>()?
    } else {
        let (g, gp) = req(doc, "grid")?;
        let get = |k: &str| -> Res<f64> {
            Ok(io::parse_f64(g.get(k).unwrap_or(&Value::Null), &format!("{gp}.{k}"))?)
        };
        let cells = io::parse_usize(g.get("cells").unwrap_or(&Value::Null), &format!("{gp}.cells"))?;
        let (lo, hi) = (get("lo")?, get("hi")?);
        if !(lo < hi) || cells == 0 {
            return Err(schema(&gp, "need lo < hi and at least one cell"));
        }
        probe_grid(d, lo, hi, cells)
    };
    let cells = with_path("$", roundtrip_extract(&spec, &rects))?;
    let sides = spec.parts.keys().next().cloned().unwrap_or_else(|| vec![Side::R; d]);
    let mut result = json!({ "sides": Side::label(&sides), "cells": io::cell_masses_to_json(&cells) });
    let nonzero: Vec<Value> = cells.iter().filter(|c| c.mass.abs() > eff.tol).map(|c| {
        json!({ "rect": c.rect.iter().map(|&(y, z)| json!([num(y), num(z)])).collect::<Vec<_>>(), "mass": num(c.mass) })
    }).collect();
    result["nonzero_cells"] = Value::Array(nonzero);
    Ok(finish(
        "extract-measure",
        "for n = (1,...,1) the representing measure of a rectangle equals the alternating sum of f over its corners",
        doc,
        &eff,
        None,
        result,
    ))
}

fn cmd_decompose(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let eff = Effective::new(cfg, doc, DEFAULT_MATCH_TOL)?;
    let (fv, fp) = req(doc, "f")?;
    let f = io::parse_tensor_fv(fv, &fp)?;
    let (a, ap) = req(doc, "alpha")?;
    let alpha = vectors(&json!([a]), &ap)?.remove(0);
    let order = axis_order(doc, f.dim())?;
    let parts = with_path("$", tensor_decompose(&f, &alpha, order.as_deref()))?;
    let pts = probes(doc, f.dim())?;
    let mut checks = Vec::new();
    let mut all_match = true;
    for x in &pts {
        let fx = f.eval(x).map_err(|e| CliError::Input(e.into()))?;
        let mut total = 0.0;
        for p in parts.values() {
            total += p.eval(x).map_err(|e| CliError::Input(e.into()))?;
        }
        let ok = (fx - total).abs() <= eff.tol * fx.abs().max(1.0);
        all_match &= ok;
        checks.push(json!({ "x": x, "f": num(fx), "sum_of_parts": num(total), "match": ok }));
    }
    let mut out = serde_json::Map::new();
    for (b, p) in &parts {
        out.insert(Side::label(b), io::tensor_fv_to_json(p)?);
    }
    let holds = if pts.is_empty() { None } else { Some(all_match) };
    Ok(finish(
        "decompose",
        "a finite tensor sum of finite-variation functions splits into 2^d parts, left-continuous jump (L) or right-continuous remainder (r) on each axis, independent of the axis order",
        doc,
        &eff,
        holds,
        json!({ "parts": out, "probes": checks }),
    ))
}

fn cmd_strong(doc: &Value, cfg: &Config) -> Res<Outcome> {
    let mut eff = Effective::new(cfg, doc, DEFAULT_CERTIFY_TOL)?;
    let f = function(doc, "f")?;
    let (c, cp) = req(doc, "C")?;
    let c = io::parse_f64(c, &cp)?;
    let n = multi_index(doc, "n")?;
    let (b, bp) = req(doc, "box")?;
    let domain = io::parse_box(b, &bp)?;
    let opts = eff.certify_options(cfg, doc)?;
    let r = with_path("$", strongly_convex_check(&f, c, &n, &domain, &opts))?;
    Ok(finish(
        "strong",
        "f is strongly box-n-convex with modulus C iff f - C x_1^{n_1} ... x_d^{n_d} is box-n-convex",
        doc,
        &eff,
        Some(r.verdict == Verdict::CertifiedOnSamples),
        io::certificate_to_json(&r),
    ))
}

/// Serializes a report exactly as the binary prints it.
pub fn render(report: &Value) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports are valid JSON values");
    s.push('\n');
    s
}
