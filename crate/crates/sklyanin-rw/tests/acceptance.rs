//! Acceptance criteria, one line each. Run with `cargo test --test acceptance`.
//! Exits nonzero if any criterion fails; every criterion runs regardless.

use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::Zero;
use sklyanin_rw::classical::{jacobi_report, rw_so3_table, so3_basis, TableVariant};
use sklyanin_rw::discovery::{
    classical_presentation, discover, fit_classical_tt, solve_t_system, Discovery,
};
use sklyanin_rw::exact::{fmt_rat, ratio, Mat3};
use sklyanin_rw::ncpoly::{diamond_check, so3_enveloping_table, NCPoly, RewriteSystem};
use sklyanin_rw::realization::{
    build_s, expand_f, orthogonality_report, q_closed_form, q_from_linear_system, sym_products,
    JConvention, QFormula, SklyaninParams, SklyaninRealization,
};
use sklyanin_rw::sampling::Sampler;

const GENERAL_SEED: u64 = 1;
const LOCUS_SEED: u64 = 2;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn diagonal() -> SklyaninRealization {
    SklyaninRealization::from_params(&SklyaninParams::diagonal_point()).unwrap()
}

fn diagonal_discovery() -> Discovery {
    discover(&diagonal(), 3).unwrap()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn c1_q_dual_path() -> Outcome {
    let tuples = Sampler::new(GENERAL_SEED).many(100, false);
    let start = Instant::now();
    let mut agree = 0;
    let mut unique = 0;
    let mut printed_differs = 0;
    for p in &tuples {
        let Ok(q) = q_from_linear_system(&build_s(p)) else {
            continue;
        };
        unique += 1;
        if q_closed_form(p, QFormula::Corrected).as_ref() == Ok(&q) {
            agree += 1;
        }
        if q_closed_form(p, QFormula::Printed).as_ref() != Ok(&q) {
            printed_differs += 1;
        }
    }
    let took = start.elapsed();
    outcome(
        unique == 100 && agree == 100 && took < Duration::from_secs(5),
        format!(
            "{unique}/100 unique (kernel dimension 0), {agree}/100 match the closed form, {} \
             [printed v+w formula differs on {printed_differs}/100]",
            secs(took)
        ),
    )
}

fn c2_diagonal_point() -> Outcome {
    let r = diagonal();
    let [e1, e2, e3] = so3_basis();
    let q_ok = r.q == Mat3::scalar(ratio(-1, 2));
    let s_ok = r.s == [e1, e3, e2];
    outcome(
        q_ok && s_ok,
        format!("Q = -1/2 I: {q_ok}, S = (e1, e3, e2): {s_ok}"),
    )
}

fn c3_orthogonality() -> Outcome {
    let mut points: Vec<SklyaninRealization> = Sampler::new(GENERAL_SEED)
        .many(100, false)
        .iter()
        .filter_map(|p| SklyaninRealization::from_params(p).ok())
        .collect();
    points.push(diagonal());
    let ok = points
        .iter()
        .filter(|r| orthogonality_report(r).passes())
        .count();
    outcome(
        ok == points.len() && points.len() == 101,
        format!(
            "{ok}/{} points with det Q != 0 and all traces 0",
            points.len()
        ),
    )
}

fn c4_j_identity() -> Outcome {
    let tuples = Sampler::new(LOCUS_SEED).many(100, true);
    let mut ok = 0;
    for p in &tuples {
        let j = SklyaninRealization::from_params(p)
            .ok()
            .and_then(|r| expand_f(&r).ok())
            .and_then(|f| f.j(JConvention::Direct));
        if j.is_some_and(|j| j.identity_residual().is_zero()) {
            ok += 1;
        }
    }
    outcome(
        ok == 100,
        format!("{ok}/100 locus tuples satisfy the J identity"),
    )
}

fn c5_classical_jacobi() -> Outcome {
    let start = Instant::now();
    let failing = |v| {
        jacobi_report(&rw_so3_table(v))
            .iter()
            .filter(|e| !e.residual.is_zero())
            .count()
    };
    let corrected = failing(TableVariant::Corrected);
    let literal = failing(TableVariant::Literal);
    let projected = failing(TableVariant::Projected);
    let took = start.elapsed();
    outcome(
        corrected == 0 && took < Duration::from_secs(30),
        format!(
            "corrected table: {corrected}/56 triples nonzero; literal: {literal}/56 (finding, exit 3); \
             trace-projected: {projected}/56; {}",
            secs(took)
        ),
    )
}

fn t_kernel_holds(r: &SklyaninRealization, candidate: bool) -> bool {
    let Ok(l) = solve_t_system(r) else {
        return false;
    };
    l.kernel_dimension() > 0
        && l.proportional()
        && l.trace_proportional()
        && (!candidate || l.contains(&sym_products(&r.s)))
}

fn c6_t_kernel() -> Outcome {
    let diag_ok = t_kernel_holds(&diagonal(), true);
    let locus: Vec<SklyaninRealization> = Sampler::new(LOCUS_SEED)
        .many(20, true)
        .iter()
        .map(|p| SklyaninRealization::from_params(p).unwrap())
        .collect();
    let locus_ok = locus.iter().filter(|r| t_kernel_holds(r, false)).count();
    let dims: Vec<usize> = locus
        .iter()
        .filter_map(|r| solve_t_system(r).ok().map(|l| l.kernel_dimension()))
        .collect();
    let max_dim = dims.iter().max().copied().unwrap_or(0);
    outcome(
        diag_ok && locus_ok == locus.len(),
        format!(
            "diagonal point: {}; locus: {locus_ok}/{} hold (kernel dimension at most {max_dim}, \
             no trace-proportional-to-Q element)",
            if diag_ok { "all claims hold" } else { "fails" },
            locus.len()
        ),
    )
}

fn c7_formal_jacobi(d: &Discovery) -> Outcome {
    let Some(c) = &d.checks else {
        return outcome(false, format!("discovery stopped: {:?}", d.stopped));
    };
    let solved: Vec<String> = c
        .jacobi
        .iter()
        .filter(|f| f.solved)
        .map(|f| {
            format!(
                "{} {}/{}",
                f.name,
                f.checked - f.failures.len() - f.errors.len(),
                f.checked
            )
        })
        .collect();
    let families_ok = c.jacobi.iter().filter(|f| f.solved).all(|f| f.passes());
    let ok = families_ok
        && c.matrix_residuals.is_empty()
        && c.shape_violations.is_empty()
        && c.sigma_nonzero.is_empty();
    outcome(
        ok,
        format!(
            "{}; matrix mismatches {}, [T,T] shape violations {}, sigma nonzero {}",
            solved.join(", "),
            c.matrix_residuals.len(),
            c.shape_violations.len(),
            c.sigma_nonzero.len()
        ),
    )
}

fn c8_classical_fit(d: &Discovery) -> Outcome {
    let Some(tt) = &d.tt else {
        return outcome(false, "no [T,T] solution");
    };
    let mut parts = Vec::new();
    let mut any = false;
    for v in [
        TableVariant::Projected,
        TableVariant::Corrected,
        TableVariant::Literal,
    ] {
        match fit_classical_tt(tt, v) {
            Some(f) => {
                any = true;
                parts.push(format!(
                    "{}: kappa = {}, scale t -> {} T (s -> -S)",
                    v.name(),
                    fmt_rat(&f.kappa),
                    fmt_rat(&f.mu)
                ));
            }
            None => parts.push(format!("{}: no rescaling fits", v.name())),
        }
    }
    outcome(any, parts.join("; "))
}

fn c9_diamond(d: &Discovery) -> Outcome {
    let so3 = diamond_check(&RewriteSystem::new(so3_enveloping_table(), 3)).passes();
    let mut corrupted = so3_enveloping_table();
    corrupted.set(0, 1, NCPoly::gen(2).add(&NCPoly::gen(0)));
    let corrupted_fails = !diamond_check(&RewriteSystem::new(corrupted, 3)).passes();
    let classical = classical_presentation(TableVariant::Corrected)
        .map(|t| diamond_check(&RewriteSystem::new(t, 3)));
    let classical_desc = match &classical {
        Ok(o) => format!(
            "{}/{} overlaps fail",
            o.failures.len() + o.errors.len(),
            o.checked
        ),
        Err(e) => e.to_string(),
    };
    let classical_ok = classical.as_ref().is_ok_and(|o| o.passes());
    let diag = d.checks.as_ref().map(|c| &c.overlaps);
    let diag_ok = diag.is_some_and(|o| o.passes());
    let diag_desc = match diag {
        Some(o) => format!(
            "{}/{} overlaps fail",
            o.failures.len() + o.errors.len(),
            o.checked
        ),
        None => "no structure".into(),
    };
    let mut locus_ok = 0;
    let mut locus_built = 0;
    let locus = Sampler::new(LOCUS_SEED).many(5, true);
    for p in &locus {
        let r = SklyaninRealization::from_params(p).unwrap();
        if let Ok(ld) = discover(&r, 3) {
            if let Some(c) = &ld.checks {
                locus_built += 1;
                locus_ok += c.overlaps.passes() as usize;
            }
        }
    }
    let ok = so3 && corrupted_fails && classical_ok && diag_ok && locus_ok == locus.len();
    outcome(
        ok,
        format!(
            "(a) U(so3): {}, corrupted table rejected: {corrupted_fails}; (b) classical: {classical_desc}; \
             (c) diagonal: {diag_desc}, locus: {locus_ok}/{} pass ({locus_built} reached a structure)",
            if so3 { "confluent" } else { "not confluent" },
            locus.len()
        ),
    )
}

fn c10_sweep_determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_sklyanin-rw"))
            .args(["sweep", "--seed", "7", "--count", "100"])
            .output()
            .expect("binary runs")
    };
    let start = Instant::now();
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        same && a.status.code() == b.status.code(),
        format!(
            "{} bytes, identical: {same}, exit codes {:?}/{:?}, {}",
            a.stdout.len(),
            a.status.code(),
            b.status.code(),
            secs(start.elapsed())
        ),
    )
}

fn main() {
    let start = Instant::now();
    let d = diagonal_discovery();
    let criteria: Vec<Criterion> = vec![
        ("C1  Q dual path", Box::new(c1_q_dual_path)),
        ("C2  diagonal point", Box::new(c2_diagonal_point)),
        ("C3  det Q and orthogonality", Box::new(c3_orthogonality)),
        ("C4  J identity", Box::new(c4_j_identity)),
        ("C5  classical Jacobi", Box::new(c5_classical_jacobi)),
        ("C6  T-family kernel claims", Box::new(c6_t_kernel)),
        (
            "C7  formal Jacobi and sigma",
            Box::new(|| c7_formal_jacobi(&d)),
        ),
        (
            "C8  classical [T,T] rescaling",
            Box::new(|| c8_classical_fit(&d)),
        ),
        ("C9  degree-3 diamond", Box::new(|| c9_diamond(&d))),
        ("C10 sweep determinism", Box::new(c10_sweep_determinism)),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let o = f();
        failed += !o.pass as usize;
        println!(
            "{}  {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed, {}",
        criteria.len() - failed,
        secs(start.elapsed())
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
