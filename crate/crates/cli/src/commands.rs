//! Subcommands as pure functions from inputs to [`Output`], so they can be
//! tested without spawning a process.
//!
//! Exit codes: 0 success, 2 a diagnosed failure (divergence, singular or
//! inconsistent system, failed demo check), 1 bad input or internal error.

use periodic_stein::linalg;
use periodic_stein::multiterm;
use periodic_stein::operators::check_operator;
use periodic_stein::solvability::{self, DEFAULT_RECIPROCAL_TOL};
use periodic_stein::solvers::{self, Method, SolverConfig};
use periodic_stein::{Error, Result};
use serde_json::{json, Value};

use crate::demo;
use crate::document::{self, EquationDocument, Model};
use crate::json::to_string_pretty;
use crate::report;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

impl Output {
    fn report(value: &Value) -> Self {
        Self {
            stdout: to_string_pretty(value) + "\n",
            stderr: String::new(),
            code: 0,
        }
    }

    fn failure(value: &Value, code: u8) -> Self {
        Self {
            stdout: String::new(),
            stderr: to_string_pretty(value) + "\n",
            code,
        }
    }

    fn from_error(e: &Error) -> Self {
        Self::failure(&report::error(e), report::classify(e).1)
    }
}

/// Command-line overrides of the document's solver section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveFlags {
    pub method: Option<Method>,
    pub ell: Option<usize>,
    pub r: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl SolveFlags {
    pub fn apply(&self, mut cfg: SolverConfig) -> SolverConfig {
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(l) = self.ell {
            cfg.ell = l;
        }
        if let Some(r) = self.r {
            cfg.r = r;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(n) = self.max_iter {
            cfg.max_iter = n;
        }
        cfg
    }
}

/// Parses document text, or renders the schema errors.
pub fn load(text: &str) -> std::result::Result<EquationDocument, Output> {
    document::parse_equation(text).map_err(|errors| Output::failure(&report::schema_errors(&errors), 1))
}

pub fn io_error(path: &str, e: &std::io::Error) -> Output {
    Output::failure(&report::plain_error("io", &format!("{path}: {e}")), 1)
}

pub fn cmd_solve(doc: &EquationDocument, flags: &SolveFlags) -> Output {
    let cfg = flags.apply(doc.solver.config());
    let result = cfg.validate().and_then(|_| doc.model()).and_then(|model| match model {
        Model::Single(eq) => solvers::solve(&eq, &cfg),
        Model::MultiTerm(mte) => {
            if cfg.method != Method::Direct {
                return Err(Error::InvalidParameter(
                    "multi-term equations are solved with the direct method only".into(),
                ));
            }
            multiterm::solve_multiterm(&mte, periodic_stein::recovery::DEFAULT_STEIN_TOL)
        }
    });
    match result {
        Ok(r) => {
            let mut out = Output::report(&report::solve(&r));
            for w in &r.warnings {
                out.stderr.push_str(&format!("warning: {w}\n"));
            }
            out
        }
        Err(e) => Output::from_error(&e),
    }
}

fn check_value(doc: &EquationDocument, seed: u64) -> Result<Value> {
    match doc.model()? {
        Model::Single(eq) => {
            let s = eq.build_stein()?;
            let op_check = check_operator(eq.op(), eq.dim(), 20, seed, 1e-12);
            let mut v = json!({
                "kind": "single",
                "operator": report::operator(eq.op()),
                "operator_check": report::operator_check(&op_check),
                "stein": report::solvability(&solvability::check_unique(&s, DEFAULT_RECIPROCAL_TOL)?),
            });
            if eq.op().name() == "anti_transpose" && eq.period() == 2 {
                let at = solvability::anti_transpose_unique(eq.a(), eq.b(), DEFAULT_RECIPROCAL_TOL)?;
                v["anti_transpose"] = report::anti_transpose(&at);
            }
            Ok(v)
        }
        Model::MultiTerm(mte) => {
            let h = multiterm::check_homogeneous(&mte.family(), mte.period(), mte.dim(), 20, seed, 1e-12);
            let mut v = json!({
                "kind": "multiterm",
                "operators": mte.terms().iter().map(|t| report::operator(&t.op)).collect::<Vec<_>>(),
                "homogeneity": report::homogeneity(&h),
            });
            if h.passed {
                let gs = multiterm::build_generalized_stein(&mte)?;
                let spec = linalg::eigenvalues(&gs.kron)?;
                let one = linalg::C64::new(1.0, 0.0);
                v["generalized_stein"] = json!({
                    "rho": report::num(spec.max_abs()),
                    "rho_lt_one": spec.max_abs() < 1.0,
                    "unique": spec.count_near(one, DEFAULT_RECIPROCAL_TOL) == 0,
                });
            }
            Ok(v)
        }
    }
}

pub fn cmd_check(doc: &EquationDocument, seed: u64) -> Output {
    match check_value(doc, seed) {
        Ok(v) => Output::report(&v),
        Err(e) => Output::from_error(&e),
    }
}

fn spectrum_value(doc: &EquationDocument) -> Result<Value> {
    match doc.model()? {
        Model::Single(eq) => {
            let s = eq.build_stein()?;
            let (sa, sb) = (linalg::eigenvalues(&s.a)?, linalg::eigenvalues(&s.b)?);
            let mut v = json!({
                "stein_a": report::spectrum(&sa),
                "stein_b": report::spectrum(&sb),
                "rho_a": report::num(sa.max_abs()),
                "rho_b": report::num(sb.max_abs()),
            });
            if eq.op().name() == "anti_transpose" && eq.period() == 2 {
                let predicted = solvability::anti_transpose_spectrum_prediction(eq.a(), eq.b())?;
                let brute = linalg::eigenvalues(&solvability::anti_transpose_kron(eq.a(), eq.b()))?;
                v["anti_transpose"] = json!({
                    "predicted": report::spectrum(&predicted),
                    "kronecker": report::spectrum(&brute),
                    "matching_distance": report::num(predicted.matching_distance(&brute)),
                });
            }
            Ok(v)
        }
        Model::MultiTerm(mte) => {
            let gs = multiterm::build_generalized_stein(&mte)?;
            let spec = linalg::eigenvalues(&gs.kron)?;
            Ok(json!({ "generalized_stein": report::spectrum(&spec), "rho": report::num(spec.max_abs()) }))
        }
    }
}

pub fn cmd_spectrum(doc: &EquationDocument) -> Output {
    match spectrum_value(doc) {
        Ok(v) => Output::report(&v),
        Err(e) => Output::from_error(&e),
    }
}

/// Human-readable log on stderr, JSON transcript on stdout.
pub fn cmd_demo(name: &str, seed: u64) -> Output {
    match demo::run(name, seed) {
        None => Output::failure(
            &report::plain_error(
                "unknown_demo",
                &format!("unknown demo `{name}` (one of {})", demo::DEMOS.join(", ")),
            ),
            1,
        ),
        Some(Err(e)) => Output::from_error(&e),
        Some(Ok(t)) => {
            let mut out = Output::report(&serde_json::to_value(&t).expect("transcript serializes"));
            out.stderr = t.log.join("\n") + "\n";
            out.stderr
                .push_str(&format!("{}: {}\n", t.demo, if t.passed { "all checks passed" } else { "CHECK FAILED" }));
            if !t.passed {
                out.code = 2;
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> EquationDocument {
        load(text).unwrap()
    }

    const COUNTER: &str = r#"{"schema_version": "1", "A": [[[-1, 0]]], "B": [[[1, 0]]], "C": [[[2, 0]]],
        "operator": {"name": "identity", "declared_period": 2}}"#;

    #[test]
    fn counterexample_solves_to_one() {
        let out = cmd_solve(&doc(COUNTER), &SolveFlags::default());
        assert_eq!(out.code, 0, "{}", out.stderr);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["solution"][0][0][0].as_f64(), Some(1.0));
        assert!(out.stderr.starts_with("warning:"));

        let check: Value = serde_json::from_str(&cmd_check(&doc(COUNTER), 0).stdout).unwrap();
        assert_eq!(check["stein"]["reciprocal_free"], json!(false));
    }

    #[test]
    fn divergence_exits_two() {
        let text = COUNTER.replace("[[[-1, 0]]]", "[[[1.5, 0]]]").replace("\"declared_period\": 2", "\"declared_period\": 1");
        let flags = SolveFlags {
            method: Some(Method::Smith),
            ..SolveFlags::default()
        };
        let out = cmd_solve(&doc(&text), &flags);
        assert_eq!(out.code, 2);
        let v: Value = serde_json::from_str(&out.stderr).unwrap();
        assert_eq!(v["error"]["category"], "divergence");
        assert!(v["error"]["trace"]["iterations"].as_u64().unwrap() > 0);
    }

    #[test]
    fn bad_flags_exit_one() {
        let flags = SolveFlags {
            method: Some(Method::RSmith),
            r: Some(1),
            ..SolveFlags::default()
        };
        assert_eq!(cmd_solve(&doc(COUNTER), &flags).code, 1);
    }

    #[test]
    fn demo_outputs() {
        let out = cmd_demo("counterexample", 3);
        assert_eq!(out.code, 0);
        assert!(out.stderr.contains("all checks passed"));
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["passed"], json!(true));
        assert_eq!(cmd_demo("nope", 0).code, 1);
    }
}
