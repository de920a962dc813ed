//! The JSON equation document.
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "kind": "single",
//!   "A": [[[0.5, 0.0]]], "B": [[[1.0, 0.0]]], "C": [[[1.0, 0.0]]],
//!   "operator": {"name": "identity", "params": {}, "declared_period": 1},
//!   "solver": {"method": "direct"}
//! }
//! ```
//!
//! Complex entries are `[re, im]` pairs. Multi-term documents replace `A`,
//! `B` and `operator` with `"terms": [{"A", "B", "operator"}, …]` and add a
//! homogeneous `"period"`. Validation collects every problem it finds, each
//! tagged with a JSON path.

use std::fmt;

use periodic_stein::linalg::{Matrix, C64};
use periodic_stein::multiterm::{MultiTermEquation, Term};
use periodic_stein::operators::{BuiltinParams, Permutation, PeriodicOperator};
use periodic_stein::solvers::{Method, RSmithVariant, SolverConfig};
use periodic_stein::stein::LinearMatrixEquation;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    pub permutation: Option<Vec<usize>>,
    pub declared_period: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermSpec {
    pub a: Matrix,
    pub b: Matrix,
    pub operator: OperatorSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Single {
        a: Matrix,
        b: Matrix,
        c: Matrix,
        operator: OperatorSpec,
    },
    MultiTerm {
        terms: Vec<TermSpec>,
        c: Matrix,
        period: usize,
    },
}

/// Solver settings; absent fields take the library defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolverSpec {
    pub method: Option<Method>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub ell: Option<usize>,
    pub r: Option<usize>,
    pub r_smith_variant: Option<RSmithVariant>,
}

impl SolverSpec {
    pub fn config(&self) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            method: self.method.unwrap_or(d.method),
            tol: self.tol.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            ell: self.ell.unwrap_or(d.ell),
            r: self.r.unwrap_or(d.r),
            r_smith_variant: self.r_smith_variant.unwrap_or(d.r_smith_variant),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquationDocument {
    pub schema_version: String,
    pub body: Body,
    pub solver: SolverSpec,
}

/// A document turned into library objects.
pub enum Model {
    Single(LinearMatrixEquation),
    MultiTerm(MultiTermEquation),
}

impl OperatorSpec {
    pub fn build(&self) -> periodic_stein::Result<PeriodicOperator> {
        let permutation = match &self.permutation {
            Some(p) => Some(Permutation::from_indices(p.clone())?),
            None => None,
        };
        PeriodicOperator::builtin(
            &self.name,
            &BuiltinParams {
                period: self.declared_period,
                permutation,
            },
        )
    }
}

impl EquationDocument {
    pub fn model(&self) -> periodic_stein::Result<Model> {
        match &self.body {
            Body::Single { a, b, c, operator } => Ok(Model::Single(LinearMatrixEquation::new(
                a.clone(),
                b.clone(),
                c.clone(),
                operator.build()?,
            )?)),
            Body::MultiTerm { terms, c, period } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        Ok(Term {
                            a: t.a.clone(),
                            b: t.b.clone(),
                            op: t.operator.build()?,
                        })
                    })
                    .collect::<periodic_stein::Result<Vec<_>>>()?;
                Ok(Model::MultiTerm(MultiTermEquation::new(terms, c.clone(), *period)?))
            }
        }
    }
}

struct Ctx {
    errors: Vec<SchemaError>,
}

impl Ctx {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.errors.push(SchemaError {
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        match v.as_object() {
            Some(o) => Some(o),
            None => {
                self.push(path, format!("expected an object, found {}", type_name(v)));
                None
            }
        }
    }

    fn unknown_keys(&mut self, o: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in o.keys() {
            if !allowed.contains(&key.as_str()) {
                self.push(&join(path, key), "unknown field");
            }
        }
    }

    fn required<'v>(&mut self, o: &'v Map<String, Value>, path: &str, key: &str) -> Option<&'v Value> {
        let v = o.get(key);
        if v.is_none() {
            self.push(&join(path, key), "missing required field");
        }
        v
    }

    fn string(&mut self, v: &Value, path: &str) -> Option<String> {
        match v.as_str() {
            Some(s) => Some(s.to_string()),
            None => {
                self.push(path, format!("expected a string, found {}", type_name(v)));
                None
            }
        }
    }

    fn positive_int(&mut self, v: &Value, path: &str) -> Option<usize> {
        match v.as_u64() {
            Some(0) => {
                self.push(path, "must be positive");
                None
            }
            Some(n) => match usize::try_from(n) {
                Ok(n) => Some(n),
                Err(_) => {
                    self.push(path, "too large");
                    None
                }
            },
            None => {
                self.push(path, format!("expected a positive integer, found {}", type_name(v)));
                None
            }
        }
    }

    fn matrix(&mut self, v: &Value, path: &str) -> Option<Matrix> {
        let Some(rows) = v.as_array() else {
            self.push(path, format!("expected an array of rows, found {}", type_name(v)));
            return None;
        };
        if rows.is_empty() {
            self.push(path, "matrix must have at least one row");
            return None;
        }
        let mut data = Vec::new();
        let mut cols = None;
        let before = self.errors.len();
        for (i, row) in rows.iter().enumerate() {
            let rpath = format!("{path}[{i}]");
            let Some(entries) = row.as_array() else {
                self.push(&rpath, format!("expected an array of [re, im] pairs, found {}", type_name(row)));
                continue;
            };
            match cols {
                None => cols = Some(entries.len()),
                Some(c) if c != entries.len() => {
                    self.push(&rpath, format!("row has {} entries, expected {c}", entries.len()));
                    continue;
                }
                _ => {}
            }
            for (j, e) in entries.iter().enumerate() {
                let epath = format!("{rpath}[{j}]");
                match e.as_array().map(|p| p.as_slice()) {
                    Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                        (Some(re), Some(im)) => data.push(C64::new(re, im)),
                        _ => self.push(&epath, "entry parts must be numbers"),
                    },
                    _ => self.push(&epath, "expected a [re, im] pair"),
                }
            }
        }
        if self.errors.len() > before {
            return None;
        }
        let cols = cols.unwrap_or(0);
        if cols == 0 {
            self.push(path, "matrix must have at least one column");
            return None;
        }
        match Matrix::new(rows.len(), cols, data) {
            Ok(m) if m.is_square() => Some(m),
            Ok(m) => {
                self.push(path, format!("matrix must be square, got {}x{}", m.rows(), m.cols()));
                None
            }
            Err(e) => {
                self.push(path, e.to_string());
                None
            }
        }
    }

    fn operator(&mut self, v: &Value, path: &str) -> Option<OperatorSpec> {
        let o = self.object(v, path)?;
        self.unknown_keys(o, path, &["name", "params", "declared_period"]);
        let name = self.required(o, path, "name").and_then(|n| self.string(n, &join(path, "name")));
        let declared_period = match o.get("declared_period") {
            None | Some(Value::Null) => None,
            Some(p) => Some(self.positive_int(p, &join(path, "declared_period"))?),
        };
        let mut permutation = None;
        if let Some(params) = o.get("params") {
            let ppath = join(path, "params");
            if let Some(po) = self.object(params, &ppath) {
                self.unknown_keys(po, &ppath, &["permutation"]);
                if let Some(p) = po.get("permutation") {
                    let perm_path = join(&ppath, "permutation");
                    let indices: Option<Vec<usize>> = p
                        .as_array()
                        .and_then(|a| a.iter().map(|x| x.as_u64().and_then(|u| usize::try_from(u).ok())).collect());
                    match indices {
                        Some(ix) => match Permutation::from_indices(ix.clone()) {
                            Ok(_) => permutation = Some(ix),
                            Err(e) => self.push(&perm_path, e.to_string()),
                        },
                        None => self.push(&perm_path, "expected an array of non-negative integers"),
                    }
                }
            }
        }
        let spec = OperatorSpec {
            name: name?,
            permutation,
            declared_period,
        };
        if let Err(e) = spec.build() {
            self.push(path, e.to_string());
            return None;
        }
        Some(spec)
    }

    fn solver(&mut self, v: &Value, path: &str) -> SolverSpec {
        let mut spec = SolverSpec::default();
        let Some(o) = self.object(v, path) else {
            return spec;
        };
        self.unknown_keys(o, path, &["method", "tol", "max_iter", "ell", "r", "r_smith_variant"]);
        if let Some(m) = o.get("method") {
            let mpath = join(path, "method");
            if let Some(s) = self.string(m, &mpath) {
                match s.parse::<Method>() {
                    Ok(m) => spec.method = Some(m),
                    Err(e) => self.push(&mpath, e.to_string()),
                }
            }
        }
        if let Some(t) = o.get("tol") {
            match t.as_f64() {
                Some(t) if t > 0.0 => spec.tol = Some(t),
                _ => self.push(&join(path, "tol"), "expected a positive number"),
            }
        }
        spec.max_iter = o.get("max_iter").and_then(|v| self.positive_int(v, &join(path, "max_iter")));
        spec.ell = o.get("ell").and_then(|v| self.positive_int(v, &join(path, "ell")));
        if let Some(r) = o.get("r").and_then(|v| self.positive_int(v, &join(path, "r"))) {
            if r < 2 {
                self.push(&join(path, "r"), "must be at least 2");
            } else {
                spec.r = Some(r);
            }
        }
        if let Some(v) = o.get("r_smith_variant") {
            let vpath = join(path, "r_smith_variant");
            match self.string(v, &vpath).as_deref() {
                Some("accumulate") => spec.r_smith_variant = Some(RSmithVariant::Accumulate),
                Some("literal") => spec.r_smith_variant = Some(RSmithVariant::LiteralConstant),
                Some(other) => self.push(&vpath, format!("unknown variant `{other}` (accumulate|literal)")),
                None => {}
            }
        }
        spec
    }

    fn same_size(&mut self, reference: (&str, &Matrix), other: (&str, &Matrix)) -> bool {
        let (rp, r) = reference;
        let (op, o) = other;
        if r.shape() != o.shape() {
            self.push(
                op,
                format!(
                    "dimension mismatch: {op} is {}x{} but {rp} is {}x{}",
                    o.rows(),
                    o.cols(),
                    r.rows(),
                    r.cols()
                ),
            );
            return false;
        }
        true
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Parses and validates a document; on failure returns every problem found.
pub fn parse_equation(text: &str) -> Result<EquationDocument, Vec<SchemaError>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        vec![SchemaError {
            path: String::new(),
            message: format!("malformed JSON: {e}"),
        }]
    })?;
    let mut ctx = Ctx { errors: Vec::new() };
    let doc = parse_value(&mut ctx, &value);
    match doc {
        Some(doc) if ctx.errors.is_empty() => Ok(doc),
        _ => {
            if ctx.errors.is_empty() {
                ctx.push("", "invalid document");
            }
            Err(ctx.errors)
        }
    }
}

fn parse_value(ctx: &mut Ctx, value: &Value) -> Option<EquationDocument> {
    let root = ctx.object(value, "")?;
    let schema_version = ctx
        .required(root, "", "schema_version")
        .and_then(|v| ctx.string(v, "schema_version"));
    if let Some(v) = &schema_version {
        if v != SCHEMA_VERSION {
            ctx.push("schema_version", format!("unsupported version `{v}` (expected `{SCHEMA_VERSION}`)"));
        }
    }
    let kind = match root.get("kind") {
        None => Some("single".to_string()),
        Some(k) => ctx.string(k, "kind"),
    }?;
    let solver = root.get("solver").map(|s| ctx.solver(s, "solver")).unwrap_or_default();
    let body = match kind.as_str() {
        "single" => {
            ctx.unknown_keys(root, "", &["schema_version", "kind", "A", "B", "C", "operator", "solver"]);
            let a = ctx.required(root, "", "A").and_then(|v| ctx.matrix(v, "A"));
            let b = ctx.required(root, "", "B").and_then(|v| ctx.matrix(v, "B"));
            let c = ctx.required(root, "", "C").and_then(|v| ctx.matrix(v, "C"));
            let operator = ctx.required(root, "", "operator").and_then(|v| ctx.operator(v, "operator"));
            let (a, b, c, operator) = (a?, b?, c?, operator?);
            let ok = ctx.same_size(("A", &a), ("B", &b)) & ctx.same_size(("A", &a), ("C", &c));
            if !ok {
                return None;
            }
            if let Err(e) = operator.build().and_then(|op| {
                LinearMatrixEquation::new(a.clone(), b.clone(), c.clone(), op).map(|_| ())
            }) {
                ctx.push("operator", e.to_string());
                return None;
            }
            Body::Single { a, b, c, operator }
        }
        "multiterm" => {
            ctx.unknown_keys(root, "", &["schema_version", "kind", "terms", "C", "period", "solver"]);
            let c = ctx.required(root, "", "C").and_then(|v| ctx.matrix(v, "C"));
            let period = ctx.required(root, "", "period").and_then(|v| ctx.positive_int(v, "period"));
            let terms_value = ctx.required(root, "", "terms");
            let mut terms = Vec::new();
            match terms_value.map(|t| t.as_array()) {
                Some(Some(items)) if !items.is_empty() => {
                    for (k, item) in items.iter().enumerate() {
                        let path = format!("terms[{k}]");
                        let Some(o) = ctx.object(item, &path) else { continue };
                        ctx.unknown_keys(o, &path, &["A", "B", "operator"]);
                        let a = ctx.required(o, &path, "A").and_then(|v| ctx.matrix(v, &join(&path, "A")));
                        let b = ctx.required(o, &path, "B").and_then(|v| ctx.matrix(v, &join(&path, "B")));
                        let op = ctx
                            .required(o, &path, "operator")
                            .and_then(|v| ctx.operator(v, &join(&path, "operator")));
                        if let (Some(a), Some(b), Some(operator)) = (a, b, op) {
                            terms.push((path, TermSpec { a, b, operator }));
                        }
                    }
                }
                Some(Some(_)) => ctx.push("terms", "at least one term is required"),
                Some(None) => ctx.push("terms", "expected an array"),
                None => {}
            }
            let (c, period) = (c?, period?);
            let mut ok = true;
            for (path, t) in &terms {
                ok &= ctx.same_size(("C", &c), (&join(path, "A"), &t.a));
                ok &= ctx.same_size(("C", &c), (&join(path, "B"), &t.b));
            }
            if !ok || !ctx.errors.is_empty() {
                return None;
            }
            let terms: Vec<TermSpec> = terms.into_iter().map(|(_, t)| t).collect();
            let body = Body::MultiTerm { terms, c, period };
            let probe = EquationDocument {
                schema_version: SCHEMA_VERSION.into(),
                body: body.clone(),
                solver: SolverSpec::default(),
            };
            if let Err(e) = probe.model() {
                ctx.push("terms", e.to_string());
                return None;
            }
            body
        }
        other => {
            ctx.push("kind", format!("unknown kind `{other}` (single|multiterm)"));
            return None;
        }
    };
    Some(EquationDocument {
        schema_version: schema_version?,
        body,
        solver,
    })
}

pub(crate) fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array(
                    m.row(i)
                        .iter()
                        .map(|z| serde_json::json!([z.re, z.im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn operator_json(op: &OperatorSpec) -> Value {
    let mut params = Map::new();
    if let Some(p) = &op.permutation {
        params.insert("permutation".into(), serde_json::json!(p));
    }
    let mut o = Map::new();
    o.insert("name".into(), Value::String(op.name.clone()));
    o.insert("params".into(), Value::Object(params));
    if let Some(p) = op.declared_period {
        o.insert("declared_period".into(), serde_json::json!(p));
    }
    Value::Object(o)
}

fn solver_json(s: &SolverSpec) -> Value {
    let mut o = Map::new();
    if let Some(m) = s.method {
        o.insert("method".into(), Value::String(m.as_str().into()));
    }
    if let Some(t) = s.tol {
        o.insert("tol".into(), serde_json::json!(t));
    }
    if let Some(n) = s.max_iter {
        o.insert("max_iter".into(), serde_json::json!(n));
    }
    if let Some(n) = s.ell {
        o.insert("ell".into(), serde_json::json!(n));
    }
    if let Some(n) = s.r {
        o.insert("r".into(), serde_json::json!(n));
    }
    if let Some(v) = s.r_smith_variant {
        let name = match v {
            RSmithVariant::Accumulate => "accumulate",
            RSmithVariant::LiteralConstant => "literal",
        };
        o.insert("r_smith_variant".into(), Value::String(name.into()));
    }
    Value::Object(o)
}

/// Canonical JSON value of a document: explicit `kind`, empty `params`
/// objects, solver fields only when set.
pub fn to_value(doc: &EquationDocument) -> Value {
    let mut o = Map::new();
    o.insert("schema_version".into(), Value::String(doc.schema_version.clone()));
    match &doc.body {
        Body::Single { a, b, c, operator } => {
            o.insert("kind".into(), Value::String("single".into()));
            o.insert("A".into(), matrix_json(a));
            o.insert("B".into(), matrix_json(b));
            o.insert("C".into(), matrix_json(c));
            o.insert("operator".into(), operator_json(operator));
        }
        Body::MultiTerm { terms, c, period } => {
            o.insert("kind".into(), Value::String("multiterm".into()));
            let terms = terms
                .iter()
                .map(|t| {
                    let mut to = Map::new();
                    to.insert("A".into(), matrix_json(&t.a));
                    to.insert("B".into(), matrix_json(&t.b));
                    to.insert("operator".into(), operator_json(&t.operator));
                    Value::Object(to)
                })
                .collect();
            o.insert("terms".into(), Value::Array(terms));
            o.insert("C".into(), matrix_json(c));
            o.insert("period".into(), serde_json::json!(period));
        }
    }
    o.insert("solver".into(), solver_json(&doc.solver));
    Value::Object(o)
}

/// Canonical text of a document, floats with 17 significant digits.
pub fn emit(doc: &EquationDocument) -> String {
    crate::json::to_string_pretty(&to_value(doc))
}
