//! JSON renderings of library results.

use periodic_stein::linalg::Spectrum;
use periodic_stein::multiterm::HomogeneityReport;
use periodic_stein::operators::{OperatorCheckReport, PeriodicOperator};
use periodic_stein::solvability::{AntiTransposeReport, SolvabilityReport};
use periodic_stein::solvers::SolveReport;
use periodic_stein::Error;
use serde_json::{json, Value};

use crate::document::{matrix_json, SchemaError};

/// Non-finite numbers become `null`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn spectrum(s: &Spectrum) -> Value {
    Value::Array(s.values().iter().map(|z| json!([z.re, z.im])).collect())
}

pub fn solve(r: &SolveReport) -> Value {
    json!({
        "status": "solved",
        "method": r.method.as_str(),
        "iterations": r.iterations,
        "rho": num(r.rho),
        "reciprocal_free": r.reciprocal_free,
        "unique": r.unique,
        "stein_residual": num(r.stein_residual),
        "eq_residual": num(r.eq_residual),
        "solution": matrix_json(&r.solution),
        "stein_solution": matrix_json(&r.stein_solution),
        "warnings": r.warnings,
    })
}

pub fn operator(op: &PeriodicOperator) -> Value {
    json!({
        "name": op.name(),
        "period": op.period(),
        "kind": op.kind().as_str(),
    })
}

pub fn operator_check(r: &OperatorCheckReport) -> Value {
    json!({
        "dimension": r.dimension,
        "additivity_max_err": num(r.additivity_max_err),
        "multiplicativity_max_err": num(r.multiplicativity_max_err),
        "periodicity_max_err": num(r.periodicity_max_err),
        "trials": r.trials,
        "seed": r.seed,
        "tol": r.tol,
        "passed": r.passed,
    })
}

pub fn solvability(r: &SolvabilityReport) -> Value {
    json!({
        "spectrum_a": spectrum(&r.spectrum_a),
        "spectrum_b": spectrum(&r.spectrum_b),
        "reciprocal_free": r.reciprocal_free,
        "rho": num(r.rho),
        "rho_lt_one": r.rho_lt_one,
        "notes": r.notes,
    })
}

pub fn anti_transpose(r: &AntiTransposeReport) -> Value {
    json!({
        "spectrum_a_fb": spectrum(&r.spectrum),
        "minus_one_count": r.minus_one_count,
        "condition_1_reciprocal_free_without_minus_one": r.reciprocal_free_without_minus_one,
        "condition_2_minus_one_simple": r.minus_one_simple,
        "unique": r.unique,
    })
}

pub fn homogeneity(r: &HomogeneityReport) -> Value {
    json!({
        "period": r.period,
        "dimension": r.dimension,
        "commuting_max_err": num(r.commuting_max_err),
        "identity_max_err": num(r.identity_max_err),
        "tuples_checked": r.tuples_checked,
        "failing_tuple": r.failing_tuple,
        "trials": r.trials,
        "seed": r.seed,
        "tol": r.tol,
        "passed": r.passed,
    })
}

/// Diagnosis category and exit code of a library error.
pub fn classify(e: &Error) -> (&'static str, u8) {
    match e {
        Error::Divergence { .. } => ("divergence", 2),
        Error::Singular { .. } => ("singular", 2),
        Error::Inconsistent { .. } => ("inconsistent", 2),
        Error::NotASteinSolution { .. } => ("not_a_stein_solution", 2),
        Error::EigenFailure { .. } => ("internal", 1),
        Error::DimensionMismatch { .. }
        | Error::NotSquare { .. }
        | Error::NonFinite { .. }
        | Error::Empty
        | Error::UnknownOperator(_)
        | Error::NotPermutation(_)
        | Error::UnsupportedOperator { .. }
        | Error::NotHomogeneous { .. }
        | Error::InvalidParameter(_) => ("invalid_input", 1),
    }
}

pub fn error(e: &Error) -> Value {
    let (category, code) = classify(e);
    let mut detail = json!({ "category": category, "exit_code": code, "message": e.to_string() });
    if let Error::Divergence {
        method,
        iterations,
        rho,
        last_update,
    } = e
    {
        detail["trace"] = json!({
            "method": method,
            "iterations": iterations,
            "rho": num(*rho),
            "last_update": num(*last_update),
        });
    }
    json!({ "error": detail })
}

pub fn schema_errors(errors: &[SchemaError]) -> Value {
    json!({
        "error": {
            "category": "schema",
            "exit_code": 1,
            "message": format!("{} problem(s) in the equation document", errors.len()),
            "details": errors,
        }
    })
}

pub fn plain_error(category: &str, message: &str) -> Value {
    json!({ "error": { "category": category, "exit_code": 1, "message": message } })
}
