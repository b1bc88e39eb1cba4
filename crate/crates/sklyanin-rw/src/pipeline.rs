//! The command-line modes as library functions: configuration, the checks
//! each mode runs, and the report document they produce.
//!
//! Every check ends as `pass`, `finding` (a claim about the algebra did not
//! hold), `fail` (a computed or stored object is wrong) or `skipped`. The exit
//! code is 2 if anything failed, else 3 if anything was a finding, else 0.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_traits::Zero;
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::classical::{elimination_consistency, jacobi_report, rw_so3_table, CGen, TableVariant};
use crate::discovery::{
    discover, fit_classical_tt, verify_structure, Discovery, StructureChecks, GEN_NAMES,
};
use crate::exact::{parse_rat, Mat3, Rat};
use crate::ncpoly::{diamond_check, OverlapReport, RewriteSystem};
use crate::realization::{
    build_s, expand_f, orthogonality_report, q_closed_form, q_from_linear_system, sym_products,
    JConvention, QFormula, RealizationError, SklyaninParams, SklyaninRealization,
};
use crate::sampling::{Sampler, RNG_NAME};
use crate::schema::{
    cpoly_json, emit_structure, mat_json, params_json, parse_structure, poly_json, rat_json,
    to_document, Provenance, SchemaError, SCHEMA_VERSION,
};

pub const DEFAULT_COUNT: usize = 100;
pub const DEFAULT_DEGREE_CAP: usize = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<String>,
    pub params: Option<SklyaninParams>,
    pub count: usize,
    pub seed: u64,
    pub locus: bool,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub degree_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: None,
            params: None,
            count: DEFAULT_COUNT,
            seed: 0,
            locus: false,
            out: None,
            input: None,
            degree_cap: DEFAULT_DEGREE_CAP,
        }
    }
}

fn config_rat(key: &str, v: &toml::Value) -> Result<Rat, RunError> {
    match v {
        toml::Value::Integer(n) => Ok(Rat::from_integer((*n).into())),
        toml::Value::String(s) => parse_rat(s)
            .map_err(|e| RunError::Config(format!("`{key}`: {e} (write rationals as \"p/q\")"))),
        toml::Value::Float(_) => Err(RunError::Config(format!(
            "`{key}`: floating-point values are not accepted, write \"p/q\""
        ))),
        _ => Err(RunError::Config(format!(
            "`{key}` must be a rational string"
        ))),
    }
}

fn config_uint(key: &str, v: &toml::Value) -> Result<u64, RunError> {
    v.as_integer()
        .and_then(|n| u64::try_from(n).ok())
        .ok_or_else(|| RunError::Config(format!("`{key}` must be a nonnegative integer")))
}

fn config_str<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str, RunError> {
    v.as_str()
        .ok_or_else(|| RunError::Config(format!("`{key}` must be a string")))
}

/// Parses a TOML run configuration. Unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<RunConfig, RunError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
    let mut cfg = RunConfig::default();
    let mut params: BTreeMap<&str, Rat> = BTreeMap::new();
    for (key, v) in &table {
        match key.as_str() {
            k if SklyaninParams::NAMES.contains(&k) => {
                let name = SklyaninParams::NAMES.iter().find(|n| **n == k).unwrap();
                params.insert(name, config_rat(k, v)?);
            }
            "mode" => cfg.mode = Some(config_str(key, v)?.to_string()),
            "count" => cfg.count = config_uint(key, v)? as usize,
            "seed" => cfg.seed = config_uint(key, v)?,
            "degree_cap" => cfg.degree_cap = config_uint(key, v)? as usize,
            "locus" => {
                cfg.locus = v
                    .as_bool()
                    .ok_or_else(|| RunError::Config("`locus` must be a boolean".into()))?
            }
            "out" => cfg.out = Some(config_str(key, v)?.into()),
            "input" => cfg.input = Some(config_str(key, v)?.into()),
            other => return Err(RunError::Config(format!("unknown key `{other}`"))),
        }
    }
    if !params.is_empty() {
        let missing: Vec<&str> = SklyaninParams::NAMES
            .iter()
            .copied()
            .filter(|n| !params.contains_key(n))
            .collect();
        if !missing.is_empty() {
            return Err(RunError::Config(format!(
                "missing parameters: {}",
                missing.join(", ")
            )));
        }
        let vals = SklyaninParams::NAMES.map(|n| params[n].clone());
        cfg.params = Some(SklyaninParams::new(vals));
    }
    Ok(cfg)
}

/// Six comma-separated rationals `alpha,...,zeta`.
pub fn parse_params_list(s: &str) -> Result<SklyaninParams, RunError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(RunError::Input(format!(
            "expected 6 comma-separated rationals, got {}",
            parts.len()
        )));
    }
    let vals: Vec<Rat> = parts
        .iter()
        .map(|p| parse_rat(p).map_err(|e| RunError::Input(e.to_string())))
        .collect::<Result<_, _>>()?;
    Ok(SklyaninParams::new(vals.try_into().unwrap()))
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Skipped,
    Pass,
    Finding,
    Fail,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Skipped => "skipped",
            Status::Pass => "pass",
            Status::Finding => "finding",
            Status::Fail => "fail",
        }
    }

    /// `Pass` when `ok`, otherwise `bad`.
    pub fn from(ok: bool, bad: Status) -> Status {
        if ok {
            Status::Pass
        } else {
            bad
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Fail => 2,
            Status::Finding => 3,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub summary: String,
    pub witness: Value,
}

impl Check {
    pub fn new(name: &str, status: Status, summary: impl Into<String>, witness: Value) -> Self {
        Check {
            name: name.to_string(),
            status,
            summary: summary.into(),
            witness,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "status": self.status.name(),
            "summary": self.summary,
            "witness": self.witness,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub mode: &'static str,
    pub checks: Vec<Check>,
    pub data: Map<String, Value>,
    pub provenance: Map<String, Value>,
}

impl Report {
    pub fn new(mode: &'static str) -> Self {
        let mut provenance = Map::new();
        provenance.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        provenance.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        provenance.insert("j_convention".into(), json!(JConvention::Direct.name()));
        provenance.insert("q_formula".into(), json!("corrected"));
        provenance.insert("st_action".into(), json!(TableVariant::Corrected.name()));
        Report {
            mode,
            checks: Vec::new(),
            data: Map::new(),
            provenance,
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn status(&self) -> Status {
        self.checks
            .iter()
            .map(|c| c.status)
            .max()
            .unwrap_or(Status::Pass)
            .max(Status::Pass)
    }

    pub fn exit_code(&self) -> i32 {
        self.status().exit_code()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "kind": "report",
            "mode": self.mode,
            "status": self.status().name(),
            "exit_code": self.exit_code(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "data": self.data,
            "provenance": self.provenance,
        })
    }

    pub fn to_human(&self) -> String {
        let mut s = format!(
            "{}: {} (exit {})\n",
            self.mode,
            self.status().name(),
            self.exit_code()
        );
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            s.push_str(&format!(
                "  {:<8} {:<width$}  {}\n",
                c.status.name(),
                c.name,
                c.summary
            ));
        }
        s
    }

    /// JSON (pretty, trailing newline) or the human table.
    pub fn render(&self, json: bool) -> String {
        if json {
            to_document(&self.to_json())
        } else {
            self.to_human()
        }
    }
}

fn names(w: &[u8]) -> Value {
    json!(w.iter().map(|&g| GEN_NAMES[g as usize]).collect::<Vec<_>>())
}

fn rats(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_json).collect())
}

fn overlap_witness(o: &OverlapReport, gen_names: &[&str]) -> Value {
    let word = |w: &[u8]| json!(w.iter().map(|&g| gen_names[g as usize]).collect::<Vec<_>>());
    json!({
        "checked": o.checked,
        "failures": o.failures.iter().map(|f| json!({
            "word": word(&f.word),
            "difference": poly_json(&f.difference, gen_names),
        })).collect::<Vec<_>>(),
        "errors": o.errors.iter().map(|(w, e)| json!({
            "word": word(w),
            "error": e.to_string(),
        })).collect::<Vec<_>>(),
    })
}

fn is_scalar(m: &Mat3) -> bool {
    *m == Mat3::scalar(m.0[0][0].clone())
}

// ---------------------------------------------------------------------------
// realize

fn realization_failure(e: RealizationError) -> Result<Check, RunError> {
    match e {
        RealizationError::NoSolution | RealizationError::NonUnique(_) => Ok(Check::new(
            "q.linear_system",
            Status::Finding,
            e.to_string(),
            Value::Null,
        )),
        e => Err(RunError::Input(e.to_string())),
    }
}

/// Checks on the matrix realization alone, appended to `report`.
fn realize_checks(r: &SklyaninRealization, report: &mut Report) {
    report.push(Check::new(
        "q.linear_system",
        Status::Pass,
        "unique symmetric Q",
        mat_json(&r.q),
    ));
    if let Some(p) = &r.params {
        for (name, formula, bad) in [
            ("q.closed_form", QFormula::Corrected, Status::Fail),
            ("q.printed_formula", QFormula::Printed, Status::Finding),
        ] {
            let c = match q_closed_form(p, formula) {
                Ok(q) if q == r.q => Check::new(
                    name,
                    Status::Pass,
                    "agrees with the linear solve",
                    Value::Null,
                ),
                Ok(q) => Check::new(
                    name,
                    bad,
                    "differs from the linear solve",
                    json!({"closed_form": mat_json(&q), "solved": mat_json(&r.q)}),
                ),
                Err(e) => Check::new(name, Status::Skipped, e.to_string(), Value::Null),
            };
            report.push(c);
        }
    }
    let res = r.relation_residuals();
    let bad: Vec<Value> = res
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.is_zero())
        .map(|(i, m)| json!({"relation": i + 1, "residual": mat_json(m)}))
        .collect();
    report.push(Check::new(
        "relations",
        Status::from(bad.is_empty(), Status::Fail),
        format!("{} of 3 relations hold exactly", 3 - bad.len()),
        Value::Array(bad),
    ));
    let o = orthogonality_report(r);
    report.push(Check::new(
        "orthogonality",
        Status::from(o.passes(), Status::Finding),
        format!(
            "det Q = {}, tr(SiQSj + SjQSi) = [{}]",
            crate::exact::fmt_rat(&o.det_q),
            o.q_orthogonality
                .iter()
                .map(crate::exact::fmt_rat)
                .collect::<Vec<_>>()
                .join(", ")
        ),
        json!({
            "det_q": rat_json(&o.det_q),
            "q_orthogonality": rats(&o.q_orthogonality),
            "traces": rats(&o.traces),
            "on_locus": o.on_locus,
        }),
    ));
    match expand_f(r) {
        Ok(f) => {
            report.data.insert(
                "f_coefficients".into(),
                json!(f.coefficients.iter().map(|c| rats(c)).collect::<Vec<_>>()),
            );
            report.push(Check::new(
                "f.expansion",
                Status::from(f.kernel.is_empty(), Status::Finding),
                if f.kernel.is_empty() {
                    "each F_i has unique coefficients on the symmetrized products".to_string()
                } else {
                    format!(
                        "coefficients not unique, kernel dimension {}",
                        f.kernel.len()
                    )
                },
                json!(f.kernel.iter().map(|k| rats(k)).collect::<Vec<_>>()),
            ));
            if let (Some(form), Some(j)) = (f.sklyanin_form, f.j(JConvention::Direct)) {
                report.push(Check::new(
                    "locus.sklyanin_form",
                    Status::from(form, Status::Finding),
                    if form {
                        "F_i involves only the cyclic product"
                    } else {
                        "F_i involves non-cyclic products"
                    },
                    Value::Null,
                ));
                let residual = j.identity_residual();
                let jv = json!({
                    "J12": rat_json(&j.j12),
                    "J23": rat_json(&j.j23),
                    "J31": rat_json(&j.j31),
                    "residual": rat_json(&residual),
                });
                report.data.insert("j".into(), jv.clone());
                report.push(Check::new(
                    "locus.j_identity",
                    Status::from(residual.is_zero(), Status::Finding),
                    format!(
                        "J12 + J23 + J31 + J12 J23 J31 = {}",
                        crate::exact::fmt_rat(&residual)
                    ),
                    jv,
                ));
            }
        }
        Err(e) => report.push(Check::new(
            "f.expansion",
            Status::Finding,
            e.to_string(),
            Value::Null,
        )),
    }
}

fn realization_data(r: &SklyaninRealization, report: &mut Report) {
    if let Some(p) = &r.params {
        report.data.insert("parameters".into(), params_json(p));
    }
    report.data.insert(
        "S".into(),
        json!(r.s.iter().map(mat_json).collect::<Vec<_>>()),
    );
    report.data.insert("Q".into(), mat_json(&r.q));
    report.data.insert("uvwxyz".into(), rats(&r.uvwxyz()));
}

pub fn realize_report(p: &SklyaninParams) -> Result<Report, RunError> {
    let mut report = Report::new("realize");
    report.data.insert("parameters".into(), params_json(p));
    match SklyaninRealization::from_params(p) {
        Ok(r) => {
            realization_data(&r, &mut report);
            realize_checks(&r, &mut report);
        }
        Err(e) => report.push(realization_failure(e)?),
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// classical-check

pub fn classical_report() -> Report {
    let mut report = Report::new("classical-check");
    let cnames: Vec<&str> = (0..crate::classical::NGEN as u8)
        .map(|g| CGen(g).name())
        .collect();
    for variant in TableVariant::ALL {
        let table = rw_so3_table(variant);
        let entries = jacobi_report(&table);
        let failing: Vec<Value> = entries
            .iter()
            .filter(|e| !e.residual.is_zero())
            .map(|e| {
                json!({
                    "triple": e.triple.iter().map(|g| g.name()).collect::<Vec<_>>(),
                    "residual": cpoly_json(&e.residual),
                })
            })
            .collect();
        report.push(Check::new(
            &format!("classical.jacobi.{}", variant.name()),
            Status::from(failing.is_empty(), Status::Finding),
            format!(
                "{} of {} triples violate Jacobi",
                failing.len(),
                entries.len()
            ),
            Value::Array(failing),
        ));
        let elim: Vec<Value> = elimination_consistency(variant)
            .into_iter()
            .filter(|(_, r)| !r.is_zero())
            .map(|(g, r)| json!({"generator": g.name(), "residual": cpoly_json(&r)}))
            .collect();
        report.push(Check::new(
            &format!("classical.trace_elimination.{}", variant.name()),
            Status::from(elim.is_empty(), Status::Finding),
            if elim.is_empty() {
                "t11 + t22 + t33 is central, eliminating t33 is consistent".to_string()
            } else {
                format!(
                    "t11 + t22 + t33 brackets nonzero with {} generators",
                    elim.len()
                )
            },
            Value::Array(elim),
        ));
        let name = format!("classical.pbw_degree3.{}", variant.name());
        match crate::discovery::classical_presentation(variant) {
            Ok(t) => {
                let rs = RewriteSystem::new(t, 3);
                let o = diamond_check(&rs);
                report.push(Check::new(
                    &name,
                    Status::from(o.passes(), Status::Finding),
                    format!(
                        "{} of {} overlaps fail to resolve",
                        o.failures.len() + o.errors.len(),
                        o.checked
                    ),
                    overlap_witness(&o, &cnames),
                ));
            }
            Err(e) => report.push(Check::new(
                &name,
                Status::Finding,
                e.to_string(),
                Value::Null,
            )),
        }
    }
    report
}

// ---------------------------------------------------------------------------
// discover / verify

/// Checks derived from a table and its matrices; shared by discover and verify.
fn structure_checks(c: &StructureChecks, degree_cap: usize, report: &mut Report) {
    let residuals: Vec<Value> = c
        .matrix_residuals
        .iter()
        .map(|((a, b), m)| json!({"pair": names(&[*a, *b]), "residual": mat_json(m)}))
        .collect();
    report.push(Check::new(
        "structure.matrix_evaluation",
        Status::from(residuals.is_empty(), Status::Fail),
        format!(
            "{} table entries disagree with matrix commutators",
            residuals.len()
        ),
        Value::Array(residuals),
    ));
    report.push(Check::new(
        "structure.tt_shape",
        Status::from(c.shape_violations.is_empty(), Status::Fail),
        if c.shape_violations.is_empty() {
            "[T,T] entries are sums of S_m T_p + T_p S_m".to_string()
        } else {
            format!("{} shape violations", c.shape_violations.len())
        },
        json!(c.shape_violations),
    ));
    for f in &c.jacobi {
        let witness = json!({
            "checked": f.checked,
            "failures": f.failures.iter().map(|(t, r)| json!({
                "triple": names(t),
                "residual": poly_json(r, &GEN_NAMES),
            })).collect::<Vec<_>>(),
            "errors": f.errors.iter().map(|(t, e)| json!({
                "triple": names(t),
                "error": e.to_string(),
            })).collect::<Vec<_>>(),
        });
        let bad = if f.solved {
            Status::Fail
        } else {
            Status::Finding
        };
        report.push(Check::new(
            &format!("jacobi.{}", f.name),
            Status::from(f.passes(), bad),
            format!(
                "{} of {} triples nonzero{}",
                f.failures.len() + f.errors.len(),
                f.checked,
                if f.solved { " (solved family)" } else { "" }
            ),
            witness,
        ));
    }
    report.push(Check::new(
        "structure.sigma",
        Status::from(c.sigma_nonzero.is_empty(), Status::Finding),
        if c.sigma_nonzero.is_empty() {
            "no S-free part in any [T,T]".to_string()
        } else {
            format!(
                "{} [T,T] entries have an S-free part",
                c.sigma_nonzero.len()
            )
        },
        json!(c
            .sigma_nonzero
            .iter()
            .map(|(a, b)| names(&[*a, *b]))
            .collect::<Vec<_>>()),
    ));
    report.push(Check::new(
        &format!("pbw_degree{degree_cap}"),
        Status::from(c.overlaps.passes(), Status::Finding),
        format!(
            "{} of {} overlaps fail to resolve",
            c.overlaps.failures.len() + c.overlaps.errors.len(),
            c.overlaps.checked
        ),
        overlap_witness(&c.overlaps, &GEN_NAMES),
    ));
}

fn solution_check(name: &str, sol: &crate::discovery::NewtonSolution) -> Check {
    Check::new(
        name,
        Status::from(sol.unique(), Status::Finding),
        format!(
            "{} equations, {} iterations, {}, linearized kernel dimension {}",
            sol.equations,
            sol.iterations,
            if sol.affine { "affine" } else { "nonlinear" },
            sol.kernel.len()
        ),
        json!({"kernel": sol.kernel.iter().map(|k| rats(k)).collect::<Vec<_>>()}),
    )
}

fn discovery_checks(d: &Discovery, report: &mut Report) {
    let l = &d.t_kernel;
    let r = &d.realization;
    let dim = l.kernel_dimension();
    report.push(Check::new(
        "t_kernel.kernel_nonzero",
        Status::from(dim > 0, Status::Finding),
        format!("kernel dimension {dim}"),
        json!({"kernel_dimension": dim}),
    ));
    report.push(Check::new(
        "t_kernel.traceless_proportional",
        Status::from(l.proportional(), Status::Finding),
        format!("traceless parts span rank {}", l.traceless_rank),
        json!({"traceless_rank": l.traceless_rank}),
    ));
    report.push(Check::new(
        "t_kernel.trace_proportional_to_q",
        Status::from(l.trace_proportional(), Status::Finding),
        if l.trace_proportional() {
            "a kernel element has trace part proportional to Q"
        } else {
            "no kernel element has trace part proportional to Q"
        },
        l.trace_witness
            .as_ref()
            .map(|w| rats(w))
            .unwrap_or(Value::Null),
    ));
    let candidate = l.contains(&sym_products(&r.s));
    let status = match (candidate, is_scalar(&r.q)) {
        (true, _) => Status::Pass,
        (false, true) => Status::Finding,
        (false, false) => Status::Skipped,
    };
    report.push(Check::new(
        "t_kernel.candidate_in_kernel",
        status,
        if candidate {
            "S_j S_k + S_k S_j lies in the kernel span"
        } else {
            "S_j S_k + S_k S_j is not in the kernel span"
        },
        Value::Null,
    ));
    match &l.q_orthogonality {
        Some(q) => report.push(Check::new(
            "t_kernel.q_orthogonal",
            Status::from(q.pairwise_holds() || q.mixed_holds(), Status::Finding),
            format!(
                "pairwise reading {}, mixed reading {}",
                if q.pairwise_holds() { "holds" } else { "fails" },
                if q.mixed_holds() { "holds" } else { "fails" }
            ),
            json!({"pairwise": rats(&q.pairwise), "mixed": rats(&q.mixed)}),
        )),
        None => report.push(Check::new(
            "t_kernel.q_orthogonal",
            Status::Skipped,
            "no T-family",
            Value::Null,
        )),
    }
    match l.family() {
        Ok(f) => report.push(Check::new(
            "t_kernel.family",
            Status::Pass,
            format!("T-family normalized by {}", f.normalization),
            json!({"T": f.t.iter().map(mat_json).collect::<Vec<_>>()}),
        )),
        Err(e) => {
            report.push(Check::new(
                "t_kernel.family",
                Status::Finding,
                e.to_string(),
                Value::Null,
            ));
            return;
        }
    }
    let stopped = |report: &mut Report, name: &str| {
        let msg = d
            .stopped
            .as_ref()
            .map(|e| e.to_string())
            .unwrap_or_default();
        report.push(Check::new(name, Status::Finding, msg, Value::Null));
    };
    match &d.xi {
        Some(xi) => report.push(solution_check("qt.xi", xi)),
        None => return stopped(report, "qt.xi"),
    }
    match &d.tt {
        Some(tt) => report.push(solution_check("tt.solution", tt)),
        None => return stopped(report, "tt.solution"),
    }
    if let Some(c) = &d.checks {
        let cap = d
            .structure
            .as_ref()
            .map(|s| s.degree_cap)
            .unwrap_or(DEFAULT_DEGREE_CAP);
        structure_checks(c, cap, report);
    }
    if d.structure.is_none() {
        stopped(report, "structure.assembly");
    }
    if let (Some(tt), true) = (&d.tt, is_scalar(&r.q)) {
        let mut fits = Map::new();
        let mut any = None;
        for v in [
            TableVariant::Corrected,
            TableVariant::Projected,
            TableVariant::Literal,
        ] {
            let f = fit_classical_tt(tt, v);
            let entry = match &f {
                Some(f) => {
                    any.get_or_insert((v, f.clone()));
                    json!({"kappa": rat_json(&f.kappa), "mu": rat_json(&f.mu)})
                }
                None => Value::Null,
            };
            fits.insert(v.name().to_string(), entry);
        }
        let summary = match &any {
            Some((v, f)) => format!(
                "[T,T] matches the {} classical table with t -> {} T, s -> -S",
                v.name(),
                crate::exact::fmt_rat(&f.mu)
            ),
            None => "no classical table matches after rescaling".to_string(),
        };
        report.push(Check::new(
            "classical_fit",
            Status::from(any.is_some(), Status::Finding),
            summary,
            Value::Object(fits),
        ));
    }
}

/// Report plus, when discovery got that far, the structure document.
pub fn discover_report(
    p: &SklyaninParams,
    degree_cap: usize,
) -> Result<(Report, Option<Value>), RunError> {
    let mut report = Report::new("discover");
    report.data.insert("parameters".into(), params_json(p));
    report.data.insert("degree_cap".into(), json!(degree_cap));
    let r = match SklyaninRealization::from_params(p) {
        Ok(r) => r,
        Err(e) => {
            report.push(realization_failure(e)?);
            return Ok((report, None));
        }
    };
    realization_data(&r, &mut report);
    realize_checks(&r, &mut report);
    let d = match discover(&r, degree_cap) {
        Ok(d) => d,
        Err(e) => {
            report.push(Check::new(
                "discovery",
                Status::Finding,
                e.to_string(),
                Value::Null,
            ));
            return Ok((report, None));
        }
    };
    discovery_checks(&d, &mut report);
    let doc = d.structure.as_ref().map(|s| {
        let prov = Provenance::new(
            d.t_kernel
                .family
                .as_ref()
                .map(|f| f.normalization.clone())
                .unwrap_or_default(),
            d.xi.as_ref().map_or(0, |x| x.kernel.len()),
            d.tt.as_ref().map_or(0, |t| t.kernel.len()),
        );
        emit_structure(s, &prov)
    });
    Ok((report, doc))
}

pub fn verify_report(text: &str, degree_cap: Option<usize>) -> Result<Report, RunError> {
    let stored = parse_structure(text)?;
    let doc: Value = serde_json::from_str(text).map_err(|e| SchemaError::Json(e.to_string()))?;
    let cap = degree_cap.unwrap_or(stored.degree_cap);
    let mut report = Report::new("verify");
    report.data.insert("degree_cap".into(), json!(cap));
    let r = &stored.realization;
    realization_data(r, &mut report);
    let res = r.relation_residuals();
    report.push(Check::new(
        "relations",
        Status::from(res.iter().all(Mat3::is_zero), Status::Fail),
        "stored S and Q satisfy the defining relations",
        Value::Null,
    ));
    let solved = q_from_linear_system(&r.s);
    report.push(Check::new(
        "q.linear_system",
        Status::from(solved.as_ref() == Ok(&r.q), Status::Fail),
        "stored Q is the unique solution for the stored S",
        Value::Null,
    ));
    if let Some(p) = &r.params {
        report.push(Check::new(
            "parameters",
            Status::from(build_s(p) == r.s, Status::Fail),
            "stored S matrices match the stored parameters",
            Value::Null,
        ));
    }
    let checks = verify_structure(&stored.table, &stored.matrices, cap);
    structure_checks(&checks, cap, &mut report);
    let derived = match stored.reassemble() {
        Ok(s) => {
            let again = emit_structure(&s, &stored.provenance);
            let differing: Vec<&str> = ["r_map", "t_map", "sigma"]
                .into_iter()
                .filter(|k| again.get(*k) != doc.get(*k))
                .collect();
            Check::new(
                "structure.derived_maps",
                Status::from(differing.is_empty(), Status::Fail),
                if differing.is_empty() {
                    "stored R, T and sigma maps match the table".to_string()
                } else {
                    format!(
                        "stored maps differ from the table: {}",
                        differing.join(", ")
                    )
                },
                json!(differing),
            )
        }
        Err(e) => Check::new(
            "structure.derived_maps",
            Status::Fail,
            e.to_string(),
            Value::Null,
        ),
    };
    report.push(derived);
    report.provenance.insert(
        "structure".into(),
        serde_json::to_value(&stored.provenance).expect("provenance serializes"),
    );
    Ok(report)
}

// ---------------------------------------------------------------------------
// sweep

/// Runs `discover` on `count` seeded tuples (in parallel, reported in order)
/// and aggregates each check over the tuples.
pub fn sweep_report(seed: u64, count: usize, locus: bool, degree_cap: usize) -> Report {
    let tuples = Sampler::new(seed).many(count, locus);
    let results: Vec<Result<Report, String>> = tuples
        .par_iter()
        .map(|p| {
            discover_report(p, degree_cap)
                .map(|(r, _)| r)
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut report = Report::new("sweep");
    report.provenance.insert("rng".into(), json!(RNG_NAME));
    report.provenance.insert("seed".into(), json!(seed));
    report.data.insert("count".into(), json!(count));
    report.data.insert("locus".into(), json!(locus));
    report.data.insert("degree_cap".into(), json!(degree_cap));
    let mut tally: BTreeMap<String, BTreeMap<Status, usize>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    let mut items = Vec::new();
    let mut rejected = 0;
    for (i, (p, res)) in tuples.iter().zip(&results).enumerate() {
        match res {
            Ok(r) => {
                let mut statuses = Map::new();
                for c in &r.checks {
                    if !tally.contains_key(&c.name) {
                        order.push(c.name.clone());
                    }
                    *tally
                        .entry(c.name.clone())
                        .or_default()
                        .entry(c.status)
                        .or_default() += 1;
                    statuses.insert(c.name.clone(), json!(c.status.name()));
                }
                items.push(json!({
                    "index": i,
                    "parameters": params_json(p),
                    "status": r.status().name(),
                    "checks": statuses,
                }));
            }
            Err(e) => {
                rejected += 1;
                items.push(json!({"index": i, "parameters": params_json(p), "error": e}));
            }
        }
    }
    for name in order {
        let counts = &tally[&name];
        let worst = *counts.keys().max().unwrap();
        let summary = counts
            .iter()
            .map(|(s, n)| format!("{n} {}", s.name()))
            .collect::<Vec<_>>()
            .join(", ");
        let witness: Map<String, Value> = counts
            .iter()
            .map(|(s, n)| (s.name().to_string(), json!(n)))
            .collect();
        report.push(Check::new(&name, worst, summary, Value::Object(witness)));
    }
    if rejected > 0 {
        report.push(Check::new(
            "sweep.inputs",
            Status::Finding,
            format!("{rejected} sampled tuples gave no realization"),
            Value::Null,
        ));
    }
    report.data.insert("items".into(), Value::Array(items));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn config_accepts_strings_and_integers() {
        let cfg = parse_config(
            "alpha = \"1\"\nbeta = 0\ngamma = \"-3/4\"\ndelta = \"0\"\nepsilon = \"2/5\"\nzeta = 7\nseed = 9\n",
        )
        .unwrap();
        let p = cfg.params.unwrap();
        assert_eq!(p.gamma, ratio(-3, 4));
        assert_eq!(p.zeta, ratio(7, 1));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.count, DEFAULT_COUNT);
        assert_eq!(cfg.degree_cap, DEFAULT_DEGREE_CAP);
    }

    #[test]
    fn config_rejects_floats_and_partial_tuples() {
        assert!(parse_config("alpha = 0.5").is_err());
        assert!(parse_config("alpha = \"0.5\"").is_err());
        assert!(parse_config("alpha = \"1\"").is_err());
        assert!(parse_config("colour = 1").is_err());
        assert!(parse_config("count = -1").is_err());
    }

    #[test]
    fn params_list() {
        let p = parse_params_list("1, 0, 1/2, 0, 0, -1").unwrap();
        assert_eq!(p.gamma, ratio(1, 2));
        assert!(parse_params_list("1,2,3").is_err());
    }

    #[test]
    fn exit_code_priority() {
        let mut r = Report::new("realize");
        r.push(Check::new("a", Status::Pass, "", Value::Null));
        r.push(Check::new("b", Status::Skipped, "", Value::Null));
        assert_eq!(r.exit_code(), 0);
        r.push(Check::new("c", Status::Finding, "", Value::Null));
        assert_eq!(r.exit_code(), 3);
        r.push(Check::new("d", Status::Fail, "", Value::Null));
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn realize_diagonal_point() {
        let r = realize_report(&SklyaninParams::diagonal_point()).unwrap();
        for name in [
            "q.linear_system",
            "q.closed_form",
            "relations",
            "orthogonality",
            "locus.j_identity",
        ] {
            assert_eq!(r.check(name).unwrap().status, Status::Pass, "{name}");
        }
    }

    #[test]
    fn dependent_input_is_a_usage_error() {
        let p = SklyaninParams::from_ints([0, 0, 0, 0, 0, 0]);
        assert!(matches!(realize_report(&p), Err(RunError::Input(_))));
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = to_document(&sweep_report(3, 4, false, 3).to_json());
        let b = to_document(&sweep_report(3, 4, false, 3).to_json());
        assert_eq!(a, b);
    }

    #[test]
    fn verify_catches_edited_coefficient() {
        let (_, doc) = discover_report(&SklyaninParams::diagonal_point(), 3).unwrap();
        let text = to_document(&doc.unwrap());
        let ok = verify_report(&text, None).unwrap();
        assert_eq!(
            ok.check("structure.matrix_evaluation").unwrap().status,
            Status::Pass
        );
        assert_eq!(
            ok.check("structure.derived_maps").unwrap().status,
            Status::Pass
        );
        let mut v: Value = serde_json::from_str(&text).unwrap();
        let coef = &mut v["tables"]["SS"][0]["terms"][0]["coefficient"];
        let old = coef.as_str().unwrap().to_string();
        *coef = json!(if old == "1" { "2" } else { "1" });
        let bad = verify_report(&to_document(&v), None).unwrap();
        assert_eq!(bad.exit_code(), 2);
    }
}
