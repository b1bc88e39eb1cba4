//! The Racah-Wigner extension of the Sklyanin algebra: the symmetric
//! T-family of the matrix realization, the `[Q, T]` map, the `[T, T]` table
//! and the assembled structure, with the checks that go with each.
//!
//! Generator alphabet (in reduction order): `Q < S1 < S2 < S3 < T11 < T22 <
//! T12 < T13 < T23`, with `T33 = -T11 - T22`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::classical::{rw_so3_table, CGen, TableVariant, CGEN_NAMES};
use crate::exact::{
    anticommutator, commutator, eps, rat, solve_linear, ExactError, Mat3, Rat, SparseSystem,
};
use crate::ncpoly::{
    self, diamond_check, evaluate, formal_jacobi, jet_truncations, reset_jet_truncations,
    weyl_symmetrize, Jet, NCPoly, NcError, NcTable, OverlapReport, RewriteSystem, Word,
};
use crate::realization::{
    expand_f, p_of_q, QuadExpansion, RealizationError, SklyaninRealization, SYM_PAIRS,
};

pub const NGEN: usize = 9;
pub const Q: u8 = 0;
pub const GEN_NAMES: [&str; NGEN] = ["Q", "S1", "S2", "S3", "T11", "T22", "T12", "T13", "T23"];
/// Index pairs (0-based) of the five T generators.
pub const T_BASIS: [(usize, usize); 5] = [(0, 0), (1, 1), (0, 1), (0, 2), (1, 2)];
/// Pairs `a < b` of T generators, in table order.
pub const TT_PAIRS: [(usize, usize); 10] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (3, 4),
];

pub const XI_UNKNOWNS: usize = 75;
pub const TT_UNKNOWNS: usize = 150;
const NEWTON_MAX_ITER: usize = 8;

/// Unknown `xi[a][k][p]`: coefficient of `S_k T_p + T_p S_k` in `[Q, T_a]`.
pub fn xi_index(a: usize, k: usize, p: usize) -> usize {
    (a * 3 + k) * 5 + p
}

/// Unknown `c[pair][m][p]`: coefficient of `S_m T_p + T_p S_m` in `[T_a, T_b]`.
pub fn tt_index(pair: usize, m: usize, p: usize) -> usize {
    (pair * 3 + m) * 5 + p
}

pub fn s_gen(i: usize) -> u8 {
    1 + i as u8
}

pub fn t_gen(a: usize) -> u8 {
    4 + a as u8
}

pub fn is_t(g: u8) -> bool {
    g >= 4
}

pub fn gen_names() -> Vec<String> {
    GEN_NAMES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscoveryError {
    #[error(transparent)]
    Realization(#[from] RealizationError),
    #[error(transparent)]
    Nc(#[from] NcError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("no usable T-family: {0}")]
    NoFamily(String),
    #[error("{0} system is inconsistent")]
    Inconsistent(&'static str),
    #[error("{stage} iteration did not reach an exact solution in {iterations} steps")]
    NoConvergence {
        stage: &'static str,
        iterations: usize,
    },
    #[error("shape violation: {0}")]
    Shape(String),
}

fn sym<C: ncpoly::Coef>(x: &NCPoly<C>, y: &NCPoly<C>) -> NCPoly<C> {
    x.mul(y).add(&y.mul(x))
}

fn sym_index(j: usize, k: usize) -> usize {
    let key = (j.min(k), j.max(k));
    SYM_PAIRS.iter().position(|&p| p == key).unwrap()
}

/// `T_jk` as a polynomial in the T generators.
fn t_poly<C: ncpoly::Coef>(j: usize, k: usize) -> NCPoly<C> {
    let key = (j.min(k), j.max(k));
    if key == (2, 2) {
        let mut p = NCPoly::zero();
        p.add_term(vec![t_gen(0)], C::one().neg());
        p.add_term(vec![t_gen(1)], C::one().neg());
        return p;
    }
    NCPoly::gen(t_gen(T_BASIS.iter().position(|&b| b == key).unwrap()))
}

// ---------------------------------------------------------------------------
// T-family on the matrix realization

#[derive(Debug, Clone, PartialEq)]
pub struct TFamily {
    /// Traceless matrices for `T11, T22, T12, T13, T23`.
    pub t: [Mat3; 5],
    pub kernel_dimension: usize,
    pub normalization: String,
}

impl TFamily {
    pub fn get(&self, j: usize, k: usize) -> Mat3 {
        let key = (j.min(k), j.max(k));
        if key == (2, 2) {
            return -(&self.t[0] + &self.t[1]);
        }
        self.t[T_BASIS.iter().position(|&b| b == key).unwrap()].clone()
    }

    /// All six matrices in `SYM_PAIRS` order.
    pub fn full(&self) -> [Mat3; 6] {
        SYM_PAIRS.map(|(j, k)| self.get(j, k))
    }
}

/// Both readings of Q-orthogonality for symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct QOrthogonality {
    /// `tr(T_a Q T_b + T_b Q T_a)` for `a < b` in `TT_PAIRS` order.
    pub pairwise: Vec<Rat>,
    /// `tr(S_i Q T_a + T_a Q S_i)`, row-major in `(i, a)`.
    pub mixed: Vec<Rat>,
}

impl QOrthogonality {
    pub fn pairwise_holds(&self) -> bool {
        self.pairwise.iter().all(Zero::is_zero)
    }

    pub fn mixed_holds(&self) -> bool {
        self.mixed.iter().all(Zero::is_zero)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TKernelReport {
    /// Kernel basis, each element six matrices in `SYM_PAIRS` order.
    pub kernel: Vec<[Mat3; 6]>,
    /// Rank of the traceless parts (`T_ij`, `i != j`, and `T_ii - T_jj`)
    /// across the kernel. At most 1 means they are pairwise proportional.
    pub traceless_rank: usize,
    /// Kernel coordinates of an element with `T11 + T22 + T33 = Q`.
    pub trace_witness: Option<Vec<Rat>>,
    pub family: Option<TFamily>,
    pub q_orthogonality: Option<QOrthogonality>,
}

impl TKernelReport {
    pub fn kernel_dimension(&self) -> usize {
        self.kernel.len()
    }

    pub fn proportional(&self) -> bool {
        self.traceless_rank <= 1
    }

    pub fn trace_proportional(&self) -> bool {
        self.trace_witness.is_some()
    }

    pub fn claims_hold(&self) -> bool {
        !self.kernel.is_empty()
            && self.proportional()
            && self.trace_proportional()
            && self.family.is_some()
    }

    /// Whether a six-tuple lies in the span of the kernel.
    pub fn contains(&self, t: &[Mat3; 6]) -> bool {
        let target = flatten6(t);
        let cols: Vec<Vec<Rat>> = self.kernel.iter().map(flatten6).collect();
        let a: Vec<Vec<Rat>> = (0..target.len())
            .map(|r| cols.iter().map(|c| c[r].clone()).collect())
            .collect();
        if cols.is_empty() {
            return target.iter().all(Zero::is_zero);
        }
        solve_linear(&a, &target)
            .map(|s| s.is_consistent())
            .unwrap_or(false)
    }

    pub fn family(&self) -> Result<&TFamily, DiscoveryError> {
        if self.kernel.is_empty() {
            return Err(DiscoveryError::NoFamily(
                "the T-system has zero kernel".into(),
            ));
        }
        if !self.proportional() {
            return Err(DiscoveryError::NoFamily(format!(
                "traceless parts span {} dimensions",
                self.traceless_rank
            )));
        }
        self.family.as_ref().ok_or_else(|| {
            DiscoveryError::NoFamily("every kernel element has zero traceless part".into())
        })
    }
}

fn flatten6(t: &[Mat3; 6]) -> Vec<Rat> {
    t.iter().flat_map(Mat3::flat).collect()
}

/// `[S_i, T_jk] - sum_l eps_ijl p(Q) T_lk - sum_l eps_ikl p(Q) T_jl` for all
/// `i` and `j <= k`.
pub fn t_system_residuals(r: &SklyaninRealization, t: &[Mat3; 6]) -> Vec<Mat3> {
    let mut out = Vec::with_capacity(18);
    for i in 0..3 {
        for &(j, k) in &SYM_PAIRS {
            let mut res = commutator(&r.s[i], &t[sym_index(j, k)]);
            for l in 0..3 {
                let e = eps(i, j, l);
                if e != 0 {
                    res = &res - &p_of_q(&r.q, &t[sym_index(l, k)]).scale(&rat(e));
                }
                let e = eps(i, k, l);
                if e != 0 {
                    res = &res - &p_of_q(&r.q, &t[sym_index(j, l)]).scale(&rat(e));
                }
            }
            out.push(res);
        }
    }
    out
}

fn traceless_vector(t: &[Mat3; 6]) -> Vec<Rat> {
    let g = |j, k| &t[sym_index(j, k)];
    [
        g(0, 1).clone(),
        g(0, 2).clone(),
        g(1, 2).clone(),
        g(0, 0) - g(1, 1),
        g(0, 0) - g(2, 2),
    ]
    .iter()
    .flat_map(Mat3::flat)
    .collect()
}

fn trace_sum(t: &[Mat3; 6]) -> Mat3 {
    let g = |j| &t[sym_index(j, j)];
    &(g(0) + g(1)) + g(2)
}

fn combine6(coeffs: &[Rat], basis: &[[Mat3; 6]]) -> [Mat3; 6] {
    std::array::from_fn(|m| {
        coeffs
            .iter()
            .zip(basis)
            .fold(Mat3::zero(), |acc, (c, b)| &acc + &b[m].scale(c))
    })
}

fn rank_of(rows: &[Vec<Rat>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    solve_linear(rows, &vec![Rat::zero(); rows.len()])
        .map(|s| s.rank)
        .unwrap_or(0)
}

/// Solves the homogeneous T-system on the 36 entries of six symmetric
/// matrices and checks the structure of its kernel.
pub fn solve_t_system(r: &SklyaninRealization) -> Result<TKernelReport, DiscoveryError> {
    let mut cols: Vec<Vec<Rat>> = Vec::with_capacity(36);
    for m in 0..6 {
        for e in 0..6 {
            let mut unit: [Rat; 6] = Default::default();
            unit[e] = Rat::one();
            let mut t: [Mat3; 6] = Default::default();
            t[m] = Mat3::sym(unit);
            cols.push(
                t_system_residuals(r, &t)
                    .iter()
                    .flat_map(Mat3::flat)
                    .collect(),
            );
        }
    }
    let nrows = cols[0].len();
    let a: Vec<Vec<Rat>> = (0..nrows)
        .map(|row| cols.iter().map(|c| c[row].clone()).collect())
        .collect();
    let sol = solve_linear(&a, &vec![Rat::zero(); nrows])?;
    let kernel: Vec<[Mat3; 6]> = sol
        .kernel_basis
        .iter()
        .map(|v| std::array::from_fn(|m| Mat3::sym(std::array::from_fn(|e| v[m * 6 + e].clone()))))
        .collect();

    let traceless: Vec<Vec<Rat>> = kernel.iter().map(traceless_vector).collect();
    let traceless_rank = rank_of(&traceless);

    // sum_r y_r trace_r - lambda Q = 0 over the six symmetric entries
    let trace_witness = if kernel.is_empty() {
        None
    } else {
        let mut tcols: Vec<[Rat; 6]> = kernel.iter().map(|t| trace_sum(t).sym_entries()).collect();
        tcols.push((-r.q.clone()).sym_entries());
        let a: Vec<Vec<Rat>> = (0..6)
            .map(|e| tcols.iter().map(|c| c[e].clone()).collect())
            .collect();
        let s = solve_linear(&a, &vec![Rat::zero(); 6])?;
        let d = kernel.len();
        s.kernel_basis
            .iter()
            .find(|v| !v[d].is_zero())
            .map(|v| v[..d].iter().map(|y| y / &v[d]).collect::<Vec<_>>())
    };

    let source: Option<[Mat3; 6]> = trace_witness
        .as_ref()
        .map(|y| combine6(y, &kernel))
        .filter(|t| traceless_vector(t).iter().any(|x| !x.is_zero()))
        .or_else(|| {
            kernel
                .iter()
                .find(|t| traceless_vector(t).iter().any(|x| !x.is_zero()))
                .cloned()
        });

    let family = if traceless_rank == 1 {
        source.map(|t| normalized_family(&t, kernel.len()))
    } else {
        None
    };
    let q_orthogonality = family.as_ref().map(|f| q_orthogonality(r, f));
    Ok(TKernelReport {
        kernel,
        traceless_rank,
        trace_witness,
        family,
        q_orthogonality,
    })
}

fn normalized_family(t: &[Mat3; 6], kernel_dimension: usize) -> TFamily {
    let third = Rat::new(1.into(), 3.into());
    let tr = trace_sum(t).scale(&third);
    let mats: [Mat3; 5] = T_BASIS.map(|(j, k)| {
        let m = t[sym_index(j, k)].clone();
        if j == k {
            &m - &tr
        } else {
            m
        }
    });
    let (a, idx, v) = mats
        .iter()
        .enumerate()
        .find_map(|(a, m)| {
            m.flat()
                .into_iter()
                .enumerate()
                .find(|(_, x)| !x.is_zero())
                .map(|(i, x)| (a, i, x))
        })
        .expect("nonzero traceless part");
    let f = v.recip();
    let (j, k) = T_BASIS[a];
    TFamily {
        t: mats.map(|m| m.scale(&f)),
        kernel_dimension,
        normalization: format!("T{}{}[{}][{}] = 1", j + 1, k + 1, idx / 3 + 1, idx % 3 + 1),
    }
}

pub fn q_orthogonality(r: &SklyaninRealization, f: &TFamily) -> QOrthogonality {
    let q = &r.q;
    let form = |a: &Mat3, b: &Mat3| (&(&(a * q) * b) + &(&(b * q) * a)).trace();
    QOrthogonality {
        pairwise: TT_PAIRS
            .iter()
            .map(|&(a, b)| form(&f.t[a], &f.t[b]))
            .collect(),
        mixed: (0..3)
            .flat_map(|i| (0..5).map(move |a| (i, a)))
            .map(|(i, a)| form(&r.s[i], &f.t[a]))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Bracket tables

/// Known brackets: `[S_i,S_j]`, `[Q,S_i]` from the quadratic expansion and,
/// if `with_t`, `[S_i,T_a]`.
fn known_entries(f: &QuadExpansion, with_t: bool) -> Vec<((u8, u8), NCPoly<Rat>)> {
    let qp = NCPoly::<Rat>::gen(Q);
    let s = |i: usize| NCPoly::<Rat>::gen(s_gen(i));
    let pq = |x: &NCPoly<Rat>| sym(&qp, x);
    let mut out = Vec::new();
    for i in 0..3 {
        for j in i + 1..3 {
            let mut p = NCPoly::zero();
            for k in 0..3 {
                let e = eps(i, j, k);
                if e != 0 {
                    p.add_scaled(&pq(&s(k)), &rat(e));
                }
            }
            out.push(((s_gen(i), s_gen(j)), p));
        }
    }
    for i in 0..3 {
        let mut p = NCPoly::zero();
        for (idx, &(j, k)) in SYM_PAIRS.iter().enumerate() {
            p.add_scaled(&sym(&s(j), &s(k)), &f.coefficients[i][idx]);
        }
        out.push(((Q, s_gen(i)), p));
    }
    if with_t {
        for i in 0..3 {
            for (a, &(j, k)) in T_BASIS.iter().enumerate() {
                let mut p = NCPoly::zero();
                for l in 0..3 {
                    let e = eps(i, j, l);
                    if e != 0 {
                        p.add_scaled(&pq(&t_poly(l, k)), &rat(e));
                    }
                    let e = eps(i, k, l);
                    if e != 0 {
                        p.add_scaled(&pq(&t_poly(j, l)), &rat(e));
                    }
                }
                out.push(((s_gen(i), t_gen(a)), p));
            }
        }
    }
    out
}

/// The Sklyanin algebra alone, on generators `Q, S1, S2, S3`.
pub fn sklyanin_table(f: &QuadExpansion) -> NcTable<Rat> {
    let mut t = NcTable::new(GEN_NAMES[..4].iter().map(|s| s.to_string()).collect());
    for ((a, b), p) in known_entries(f, false) {
        t.set(a, b, p);
    }
    t
}

/// Full table; `[Q,T]` and `[T,T]` entries are present only when their
/// coefficients are given.
pub fn rw_table<C: ncpoly::Coef>(
    f: &QuadExpansion,
    xi: Option<&[C]>,
    tt: Option<&[C]>,
) -> NcTable<C> {
    let mut t = NcTable::new(gen_names());
    for ((a, b), p) in known_entries(f, true) {
        t.set(a, b, p.map(|c| C::from_rat(c.clone())));
    }
    let st = |m: usize, p: usize| sym(&NCPoly::<C>::gen(s_gen(m)), &NCPoly::<C>::gen(t_gen(p)));
    if let Some(xi) = xi {
        for a in 0..5 {
            let mut p = NCPoly::zero();
            for k in 0..3 {
                for q in 0..5 {
                    p.add_scaled(&st(k, q), &xi[xi_index(a, k, q)]);
                }
            }
            t.set(Q, t_gen(a), p);
        }
    }
    if let Some(c) = tt {
        for (pair, &(a, b)) in TT_PAIRS.iter().enumerate() {
            let mut p = NCPoly::zero();
            for m in 0..3 {
                for q in 0..5 {
                    p.add_scaled(&st(m, q), &c[tt_index(pair, m, q)]);
                }
            }
            t.set(t_gen(a), t_gen(b), p);
        }
    }
    t
}

pub fn xi_triples() -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for i in 0..3 {
        for a in 0..5 {
            out.push([Q, s_gen(i), t_gen(a)]);
        }
    }
    for i in 0..3 {
        for j in i + 1..3 {
            for a in 0..5 {
                out.push([s_gen(i), s_gen(j), t_gen(a)]);
            }
        }
    }
    out
}

pub fn tt_triples() -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for i in 0..3 {
        for &(a, b) in &TT_PAIRS {
            out.push([s_gen(i), t_gen(a), t_gen(b)]);
        }
    }
    for &(a, b) in &TT_PAIRS {
        out.push([Q, t_gen(a), t_gen(b)]);
    }
    out
}

/// The seven triple families, with whether each is solved for (as opposed to
/// reported as an outcome).
pub fn jacobi_families() -> Vec<(&'static str, bool, Vec<[u8; 3]>)> {
    let s = s_gen;
    let t = t_gen;
    let sss = vec![[s(0), s(1), s(2)]];
    let qss = vec![[Q, s(0), s(1)], [Q, s(0), s(2)], [Q, s(1), s(2)]];
    let l2 = xi_triples();
    let (qst, sst) = l2.split_at(15);
    let tt = tt_triples();
    let (stt, qtt) = tt.split_at(30);
    let mut ttt = Vec::new();
    for a in 0..5 {
        for b in a + 1..5 {
            for c in b + 1..5 {
                ttt.push([t(a), t(b), t(c)]);
            }
        }
    }
    vec![
        ("S,S,S", false, sss),
        ("Q,S,S", false, qss),
        ("Q,S,T", true, qst.to_vec()),
        ("S,S,T", true, sst.to_vec()),
        ("S,T,T", true, stt.to_vec()),
        ("Q,T,T", true, qtt.to_vec()),
        ("T,T,T", false, ttt),
    ]
}

// ---------------------------------------------------------------------------
// Solving for unknown coefficients

/// Solution of a polynomial system in the unknown coefficients, found by
/// Newton steps on first-order jets. `affine` records that no step dropped a
/// second-order term, i.e. the system is linear in the unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonSolution {
    pub values: Vec<Rat>,
    /// Kernel of the linearized system at the solution.
    pub kernel: Vec<Vec<Rat>>,
    pub iterations: usize,
    pub affine: bool,
    pub equations: usize,
}

impl NewtonSolution {
    pub fn unique(&self) -> bool {
        self.kernel.is_empty()
    }
}

fn newton(
    stage: &'static str,
    n: usize,
    start: Vec<Rat>,
    residual: impl Fn(&[Rat]) -> Result<Vec<Jet>, DiscoveryError>,
) -> Result<NewtonSolution, DiscoveryError> {
    let mut x = start;
    let mut affine = true;
    for it in 0..=NEWTON_MAX_ITER {
        reset_jet_truncations();
        let res = residual(&x)?;
        affine &= jet_truncations() == 0;
        let mut sys = SparseSystem::new(n);
        let mut done = true;
        for j in &res {
            done &= j.value.is_zero();
            sys.push(j.grad.clone(), -j.value.clone());
        }
        let sol = sys.solve();
        if done {
            return Ok(NewtonSolution {
                values: x,
                kernel: sol.kernel_basis,
                iterations: it,
                affine,
                equations: res.len(),
            });
        }
        let step = sol.particular.ok_or(DiscoveryError::Inconsistent(stage))?;
        for (xi, d) in x.iter_mut().zip(step) {
            *xi += d;
        }
    }
    Err(DiscoveryError::NoConvergence {
        stage,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Rows of `sum_u value[u] * mats[u] - target` as jets in the unknowns.
fn matrix_rows(terms: &[(usize, Mat3)], values: &[Rat], target: &Mat3) -> Vec<Jet> {
    (0..9)
        .map(|e| {
            let (r, c) = (e / 3, e % 3);
            let mut j = Jet::constant(-target.0[r][c].clone());
            for (u, m) in terms {
                let v = &m.0[r][c];
                if !v.is_zero() {
                    j.value += &values[*u] * v;
                    j.grad.insert(*u, v.clone());
                }
            }
            j
        })
        .collect()
}

/// Everything discovery needs once the T-family is fixed.
#[derive(Debug, Clone)]
pub struct RwContext {
    pub realization: SklyaninRealization,
    pub expansion: QuadExpansion,
    pub family: TFamily,
    pub degree_cap: usize,
}

impl RwContext {
    /// Matrices of the nine generators.
    pub fn matrices(&self) -> Vec<Mat3> {
        let mut m = vec![self.realization.q.clone()];
        m.extend(self.realization.s.iter().cloned());
        m.extend(self.family.t.iter().cloned());
        m
    }

    fn st_products(&self) -> Vec<Vec<Mat3>> {
        (0..3)
            .map(|k| {
                (0..5)
                    .map(|p| anticommutator(&self.realization.s[k], &self.family.t[p]))
                    .collect()
            })
            .collect()
    }

    fn jet_residuals(
        &self,
        table: NcTable<Jet>,
        triples: &[[u8; 3]],
    ) -> Result<Vec<Jet>, DiscoveryError> {
        let rs = RewriteSystem::new(table, self.degree_cap);
        let mut out = Vec::new();
        for &[a, b, c] in triples {
            let r = formal_jacobi(&rs, a, b, c)?;
            out.extend(r.terms().map(|(_, j)| j.clone()));
        }
        Ok(out)
    }

    /// Solves for `[Q, T_a]` from the `(Q,S,T)` and `(S,S,T)` Jacobi
    /// identities together with the matrix realization.
    pub fn solve_xi(&self) -> Result<NewtonSolution, DiscoveryError> {
        let st = self.st_products();
        let q = &self.realization.q;
        let triples = xi_triples();
        newton("Xi", XI_UNKNOWNS, vec![Rat::zero(); XI_UNKNOWNS], |xi| {
            let jets: Vec<Jet> = xi
                .iter()
                .enumerate()
                .map(|(u, v)| Jet::variable(u, v.clone()))
                .collect();
            let table = rw_table(&self.expansion, Some(&jets), None);
            let mut res = self.jet_residuals(table, &triples)?;
            for a in 0..5 {
                let terms: Vec<(usize, Mat3)> = (0..3)
                    .flat_map(|k| (0..5).map(move |p| (k, p)))
                    .map(|(k, p)| (xi_index(a, k, p), st[k][p].clone()))
                    .collect();
                res.extend(matrix_rows(&terms, xi, &commutator(q, &self.family.t[a])));
            }
            Ok(res)
        })
    }

    /// Solves for `[T_a, T_b]` from the `(S,T,T)` and `(Q,T,T)` Jacobi
    /// identities together with the matrix realization.
    pub fn solve_tt(&self, xi: &[Rat]) -> Result<NewtonSolution, DiscoveryError> {
        let st = self.st_products();
        let t = &self.family.t;
        let triples = tt_triples();
        let xi_jets: Vec<Jet> = xi.iter().map(|v| Jet::constant(v.clone())).collect();
        newton("[T,T]", TT_UNKNOWNS, vec![Rat::zero(); TT_UNKNOWNS], |c| {
            let jets: Vec<Jet> = c
                .iter()
                .enumerate()
                .map(|(u, v)| Jet::variable(u, v.clone()))
                .collect();
            let table = rw_table(&self.expansion, Some(&xi_jets), Some(&jets));
            let mut res = self.jet_residuals(table, &triples)?;
            for (pair, &(a, b)) in TT_PAIRS.iter().enumerate() {
                let terms: Vec<(usize, Mat3)> = (0..3)
                    .flat_map(|m| (0..5).map(move |p| (m, p)))
                    .map(|(m, p)| (tt_index(pair, m, p), st[m][p].clone()))
                    .collect();
                res.extend(matrix_rows(&terms, c, &commutator(&t[a], &t[b])));
            }
            Ok(res)
        })
    }
}

// ---------------------------------------------------------------------------
// Assembled structure

/// One term `coefficient * a_part (x) u` of a map into `A (x) U`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitTerm {
    pub a_part: Word,
    pub u: u8,
    pub coefficient: Rat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NWSOStructure {
    pub realization: SklyaninRealization,
    /// Matrices of the nine generators.
    pub matrices: Vec<Mat3>,
    pub table: NcTable<Rat>,
    /// `R(t (x) s)`: normal form of `t s`, keyed by `(t, s)`.
    pub r_map: BTreeMap<(u8, u8), Vec<SplitTerm>>,
    /// T-map: normal form of `[T_a, T_b]` keyed by `(a, b)` generators.
    pub t_map: BTreeMap<(u8, u8), Vec<SplitTerm>>,
    /// T-free parts of `[T_a, T_b]`; empty means the algebra is not affine.
    pub sigma: BTreeMap<(u8, u8), NCPoly<Rat>>,
    pub degree_cap: usize,
}

/// Splits a normal form whose words each end in exactly one T letter. Words
/// without a T letter are returned separately.
fn split_normal_form(p: &NCPoly<Rat>) -> Result<(Vec<SplitTerm>, NCPoly<Rat>), String> {
    let mut terms = Vec::new();
    let mut rest = NCPoly::zero();
    for (w, c) in p.terms() {
        let n_t = w.iter().filter(|&&g| is_t(g)).count();
        match n_t {
            0 => rest.add_term(w.clone(), c.clone()),
            1 if is_t(*w.last().unwrap()) => terms.push(SplitTerm {
                a_part: w[..w.len() - 1].to_vec(),
                u: *w.last().unwrap(),
                coefficient: c.clone(),
            }),
            _ => return Err(format!("word {:?} is not in A (x) U", w)),
        }
    }
    Ok((terms, rest))
}

/// Problems with the `[T, T]` entries: each must be a combination of
/// `S_m T_p + T_p S_m`.
pub fn tt_shape_violations(table: &NcTable<Rat>) -> Vec<String> {
    let mut out = Vec::new();
    for &(a, b) in &TT_PAIRS {
        let (ga, gb) = (t_gen(a), t_gen(b));
        let p = match table.bracket(ga, gb) {
            Ok(p) => p,
            Err(e) => {
                out.push(e.to_string());
                continue;
            }
        };
        for (w, c) in p.terms() {
            let ok = w.len() == 2
                && w.iter().filter(|&&g| is_t(g)).count() == 1
                && w.iter().filter(|&&g| (1..=3).contains(&g)).count() == 1;
            if !ok {
                out.push(format!(
                    "[{},{}] has word {:?}",
                    GEN_NAMES[ga as usize], GEN_NAMES[gb as usize], w
                ));
                continue;
            }
            let rev: Word = vec![w[1], w[0]];
            if p.coefficient(&rev) != Some(c) {
                out.push(format!(
                    "[{},{}] is not symmetric in {:?}",
                    GEN_NAMES[ga as usize], GEN_NAMES[gb as usize], w
                ));
            }
        }
    }
    out
}

impl NWSOStructure {
    pub fn assemble(
        realization: SklyaninRealization,
        matrices: Vec<Mat3>,
        table: NcTable<Rat>,
        degree_cap: usize,
    ) -> Result<Self, DiscoveryError> {
        let shape = tt_shape_violations(&table);
        if !shape.is_empty() {
            return Err(DiscoveryError::Shape(shape.join("; ")));
        }
        let rs = RewriteSystem::new(table.clone(), degree_cap);
        let mut r_map = BTreeMap::new();
        for a in 0..5 {
            for s in 0..4u8 {
                let nf = rs.normal_form_word(&[t_gen(a), s])?;
                let (terms, rest) = split_normal_form(&nf).map_err(DiscoveryError::Shape)?;
                if !rest.is_zero() {
                    return Err(DiscoveryError::Shape(format!(
                        "{} {} reorders outside A (x) U",
                        GEN_NAMES[t_gen(a) as usize],
                        GEN_NAMES[s as usize]
                    )));
                }
                r_map.insert((t_gen(a), s), terms);
            }
        }
        let mut t_map = BTreeMap::new();
        let mut sigma = BTreeMap::new();
        for &(a, b) in &TT_PAIRS {
            let key = (t_gen(a), t_gen(b));
            let nf = rs.normal_form(&table.bracket(key.0, key.1)?)?;
            let (terms, rest) = split_normal_form(&nf).map_err(DiscoveryError::Shape)?;
            t_map.insert(key, terms);
            if !rest.is_zero() {
                sigma.insert(key, rest);
            }
        }
        Ok(NWSOStructure {
            realization,
            matrices,
            table,
            r_map,
            t_map,
            sigma,
            degree_cap,
        })
    }

    pub fn rewrite_system(&self) -> RewriteSystem<Rat> {
        RewriteSystem::new(self.table.clone(), self.degree_cap)
    }

    /// `[T_a, T_b]` coefficients of `S_m T_p + T_p S_m`, indexed by `tt_index`.
    pub fn tt_coefficients(&self) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); TT_UNKNOWNS];
        for (pair, &(a, b)) in TT_PAIRS.iter().enumerate() {
            let Ok(p) = self.table.bracket(t_gen(a), t_gen(b)) else {
                continue;
            };
            for m in 0..3 {
                for q in 0..5 {
                    if let Some(c) = p.coefficient(&[s_gen(m), t_gen(q)]) {
                        out[tt_index(pair, m, q)] = c.clone();
                    }
                }
            }
        }
        out
    }

    /// Commutative form of each `[T,T]` right-hand side: coefficient `2c` on
    /// the monomial `S_m T_p` for each `c (S_m T_p + T_p S_m)`.
    pub fn tt_commutative(&self) -> Vec<((u8, u8), ncpoly::CommutativeTerms)> {
        let c = self.tt_coefficients();
        TT_PAIRS
            .iter()
            .enumerate()
            .map(|(pair, &(a, b))| {
                let terms = (0..3)
                    .flat_map(|m| (0..5).map(move |p| (m, p)))
                    .filter_map(|(m, p)| {
                        let v = &c[tt_index(pair, m, p)];
                        (!v.is_zero()).then(|| (vec![s_gen(m), t_gen(p)], v * rat(2)))
                    })
                    .collect();
                ((t_gen(a), t_gen(b)), terms)
            })
            .collect()
    }
}

/// Result of one Jacobi family over the assembled table.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiFamily {
    pub name: &'static str,
    pub solved: bool,
    pub checked: usize,
    pub failures: Vec<([u8; 3], NCPoly<Rat>)>,
    pub errors: Vec<([u8; 3], NcError)>,
}

impl JacobiFamily {
    pub fn passes(&self) -> bool {
        self.failures.is_empty() && self.errors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureChecks {
    /// Table entries whose matrix evaluation differs from the commutator.
    pub matrix_residuals: Vec<((u8, u8), Mat3)>,
    pub jacobi: Vec<JacobiFamily>,
    pub overlaps: OverlapReport,
    pub shape_violations: Vec<String>,
    pub sigma_nonzero: Vec<(u8, u8)>,
}

impl StructureChecks {
    /// Checks whose failure means the structure is wrong as stored.
    pub fn verification_passes(&self) -> bool {
        self.matrix_residuals.is_empty()
            && self.shape_violations.is_empty()
            && self
                .jacobi
                .iter()
                .filter(|f| f.solved)
                .all(JacobiFamily::passes)
    }

    /// Checks whose failure contradicts a claim about the algebra.
    pub fn claims_pass(&self) -> bool {
        self.overlaps.passes()
            && self.sigma_nonzero.is_empty()
            && self
                .jacobi
                .iter()
                .filter(|f| !f.solved)
                .all(JacobiFamily::passes)
    }
}

pub fn matrix_residuals(table: &NcTable<Rat>, mats: &[Mat3]) -> Vec<((u8, u8), Mat3)> {
    let mut out = Vec::new();
    for (&(a, b), p) in table.entries() {
        let lhs = commutator(&mats[a as usize], &mats[b as usize]);
        let res = &lhs - &evaluate(p, mats);
        if !res.is_zero() {
            out.push(((a, b), res));
        }
    }
    out
}

pub fn jacobi_family(
    rs: &RewriteSystem<Rat>,
    name: &'static str,
    solved: bool,
    triples: &[[u8; 3]],
) -> JacobiFamily {
    let mut fam = JacobiFamily {
        name,
        solved,
        checked: triples.len(),
        failures: Vec::new(),
        errors: Vec::new(),
    };
    for &[a, b, c] in triples {
        match formal_jacobi(rs, a, b, c) {
            Ok(r) if r.is_zero() => {}
            Ok(r) => fam.failures.push(([a, b, c], r)),
            Err(e) => fam.errors.push(([a, b, c], e)),
        }
    }
    fam
}

/// Re-checks a stored structure from its table and matrices alone.
pub fn verify_structure(table: &NcTable<Rat>, mats: &[Mat3], degree_cap: usize) -> StructureChecks {
    let rs = RewriteSystem::new(table.clone(), degree_cap);
    let jacobi = jacobi_families()
        .into_iter()
        .map(|(name, solved, triples)| jacobi_family(&rs, name, solved, &triples))
        .collect();
    let mut sigma_nonzero = Vec::new();
    for &(a, b) in &TT_PAIRS {
        let key = (t_gen(a), t_gen(b));
        let nf = table.bracket(key.0, key.1).and_then(|p| rs.normal_form(&p));
        if let Ok(nf) = nf {
            if nf.terms().any(|(w, _)| !w.iter().any(|&g| is_t(g))) {
                sigma_nonzero.push(key);
            }
        }
    }
    StructureChecks {
        matrix_residuals: matrix_residuals(table, mats),
        jacobi,
        overlaps: diamond_check(&rs),
        shape_violations: tt_shape_violations(table),
        sigma_nonzero,
    }
}

// ---------------------------------------------------------------------------
// Pipeline

/// Every stage's output, up to where discovery stopped.
#[derive(Debug, Clone)]
pub struct Discovery {
    pub realization: SklyaninRealization,
    pub expansion: QuadExpansion,
    pub t_kernel: TKernelReport,
    pub xi: Option<NewtonSolution>,
    pub tt: Option<NewtonSolution>,
    pub structure: Option<NWSOStructure>,
    pub checks: Option<StructureChecks>,
    pub stopped: Option<DiscoveryError>,
}

/// Runs the whole chain from a realization. Only failures before the
/// T-family stage are returned as errors; later ones are recorded in
/// `stopped`.
pub fn discover(r: &SklyaninRealization, degree_cap: usize) -> Result<Discovery, DiscoveryError> {
    let expansion = expand_f(r)?;
    let t_kernel = solve_t_system(r)?;
    let mut d = Discovery {
        realization: r.clone(),
        expansion: expansion.clone(),
        t_kernel,
        xi: None,
        tt: None,
        structure: None,
        checks: None,
        stopped: None,
    };
    let family = match d.t_kernel.family() {
        Ok(f) => f.clone(),
        Err(e) => {
            d.stopped = Some(e);
            return Ok(d);
        }
    };
    let ctx = RwContext {
        realization: r.clone(),
        expansion,
        family,
        degree_cap,
    };
    let run = |d: &mut Discovery| -> Result<(), DiscoveryError> {
        let xi = ctx.solve_xi()?;
        d.xi = Some(xi.clone());
        let tt = ctx.solve_tt(&xi.values)?;
        d.tt = Some(tt.clone());
        let table = rw_table(&ctx.expansion, Some(&xi.values), Some(&tt.values));
        let mats = ctx.matrices();
        d.checks = Some(verify_structure(&table, &mats, degree_cap));
        d.structure = Some(NWSOStructure::assemble(r.clone(), mats, table, degree_cap)?);
        Ok(())
    };
    if let Err(e) = run(&mut d) {
        d.stopped = Some(e);
    }
    Ok(d)
}

// ---------------------------------------------------------------------------
// Classical comparison

/// The classical table as a noncommutative presentation: each commutative
/// right-hand side replaced by its Weyl symmetrization.
pub fn classical_presentation(variant: TableVariant) -> Result<NcTable<Rat>, NcError> {
    let table = rw_so3_table(variant);
    let mut t = NcTable::new(CGEN_NAMES.iter().map(|s| s.to_string()).collect());
    for ((a, b), p) in table.entries() {
        if a.0 >= b.0 {
            continue;
        }
        let mut np = NCPoly::zero();
        for (m, c) in p.terms() {
            np.add_scaled(&weyl_symmetrize(m, 3)?, c);
        }
        t.set(a.0, b.0, np);
    }
    Ok(t)
}

/// Exact fit of a discovered `[T,T]` solution set to a classical table.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalFit {
    /// Discovered coefficient = `kappa` times the classical coefficient of
    /// the matching Weyl-ordered term.
    pub kappa: Rat,
    /// Rescaling `t -> mu T` (with `s -> -S`) carrying the classical table
    /// onto the discovered one.
    pub mu: Rat,
    /// Coordinates along the solution kernel used by the fit.
    pub kernel_coordinates: Vec<Rat>,
}

/// Finds `y` and `kappa` with `particular + K y = kappa * classical`, where a
/// classical term `d s_m t_p` maps to `d/2 (S_m T_p + T_p S_m)`. Returns
/// `None` when no fit with `kappa != 0` exists or `kappa` is not determined.
pub fn fit_classical_tt(sol: &NewtonSolution, variant: TableVariant) -> Option<ClassicalFit> {
    let table = rw_so3_table(variant);
    let half = Rat::new(1.into(), 2.into());
    let mut target = vec![Rat::zero(); TT_UNKNOWNS];
    for (pair, &(a, b)) in TT_PAIRS.iter().enumerate() {
        let p = table.bracket(CGen(3 + a as u8), CGen(3 + b as u8));
        for (m, c) in p.terms() {
            // every entry is a sum of s_m t_p
            if m.len() != 2 || m[0] >= 3 || m[1] < 3 {
                return None;
            }
            target[tt_index(pair, m[0] as usize, (m[1] - 3) as usize)] = c * &half;
        }
    }
    let k = sol.kernel.len();
    // unknowns: y_0..y_{k-1}, kappa
    let a: Vec<Vec<Rat>> = (0..TT_UNKNOWNS)
        .map(|u| {
            let mut row: Vec<Rat> = sol.kernel.iter().map(|v| v[u].clone()).collect();
            row.push(-target[u].clone());
            row
        })
        .collect();
    let b: Vec<Rat> = sol.values.iter().map(|v| -v).collect();
    let s = solve_linear(&a, &b).ok()?;
    let x = s.particular?;
    if s.kernel_basis.iter().any(|v| !v[k].is_zero()) || x[k].is_zero() {
        return None;
    }
    let kappa = x[k].clone();
    let mu = -(&kappa * rat(2)).recip();
    Some(ClassicalFit {
        kappa,
        mu,
        kernel_coordinates: x[..k].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::realization::SklyaninParams;

    fn diagonal() -> SklyaninRealization {
        SklyaninRealization::from_params(&SklyaninParams::diagonal_point()).unwrap()
    }

    fn locus() -> SklyaninRealization {
        let p = SklyaninParams::new([rat(2), rat(0), rat(3), rat(0), rat(0), ratio(-5, 7)]);
        SklyaninRealization::from_params(&p).unwrap()
    }

    #[test]
    fn diagonal_t_kernel() {
        let r = diagonal();
        let l1 = solve_t_system(&r).unwrap();
        assert!(l1.kernel_dimension() > 0);
        assert!(l1.proportional());
        assert!(l1.trace_proportional());
        let cand: [Mat3; 6] = SYM_PAIRS.map(|(j, k)| anticommutator(&r.s[j], &r.s[k]));
        assert!(l1.contains(&cand));
        // sum of the candidate's diagonal is 2(S1^2 + S2^2 + S3^2) = -4 I
        assert_eq!(trace_sum(&cand), Mat3::scalar(rat(-4)));
        let f = l1.family().unwrap();
        assert!(t_system_residuals(&r, &f.full()).iter().all(Mat3::is_zero));
        assert!(f.t.iter().all(|t| t.trace().is_zero() && t.is_symmetric()));
    }

    #[test]
    fn identity_tuple_always_in_kernel() {
        let r = locus();
        let l1 = solve_t_system(&r).unwrap();
        let id: [Mat3; 6] = SYM_PAIRS.map(|(j, k)| {
            if j == k {
                Mat3::identity()
            } else {
                Mat3::zero()
            }
        });
        assert!(t_system_residuals(&r, &id).iter().all(Mat3::is_zero));
        assert!(l1.contains(&id));
    }

    #[test]
    fn sklyanin_tables_agree_with_matrices() {
        let r = locus();
        let f = expand_f(&r).unwrap();
        let t = sklyanin_table(&f);
        let mut m = vec![r.q.clone()];
        m.extend(r.s.iter().cloned());
        assert!(matrix_residuals(&t, &m).is_empty());
    }

    #[test]
    fn sklyanin_algebra_confluent_on_locus() {
        let r = locus();
        let f = expand_f(&r).unwrap();
        let rs = RewriteSystem::new(sklyanin_table(&f), 3);
        assert!(diamond_check(&rs).passes());
        assert!(formal_jacobi(&rs, 1, 2, 3).unwrap().is_zero());
        assert!(formal_jacobi(&rs, 0, 0, 1).unwrap().is_zero());
    }

    #[test]
    fn single_terms_reorder_differently() {
        let r = diagonal();
        let f = expand_f(&r).unwrap();
        let xi = vec![Rat::zero(); XI_UNKNOWNS];
        let table: NcTable<Rat> = rw_table(&f, Some(&xi), None);
        let rs = RewriteSystem::new(table, 3);
        let a = rs.normal_form_word(&[s_gen(0), t_gen(2)]).unwrap();
        let b = rs.normal_form_word(&[t_gen(2), s_gen(0)]).unwrap();
        assert_ne!(a, b);
    }

    fn diagonal_discovery() -> Discovery {
        discover(&diagonal(), 3).unwrap()
    }

    #[test]
    fn diagonal_pipeline() {
        let d = diagonal_discovery();
        let xi = d.xi.as_ref().expect("Xi solved");
        // Q is scalar, so [Q, T] = 0 and the zero map solves everything
        assert!(xi.values.iter().all(Zero::is_zero));
        let tt = d.tt.as_ref().expect("[T,T] solved");
        assert!(tt.affine);
        let checks = d.checks.as_ref().unwrap();
        assert!(
            checks.verification_passes(),
            "{:?}",
            checks.matrix_residuals
        );
        let s = d.structure.as_ref().unwrap();
        assert!(s.sigma.is_empty());
        assert!(tt_shape_violations(&s.table).is_empty());
    }

    #[test]
    fn perturbed_xi_breaks_jacobi() {
        let r = diagonal();
        let f = expand_f(&r).unwrap();
        let mut xi = vec![Rat::zero(); XI_UNKNOWNS];
        xi[xi_index(2, 0, 3)] = rat(1);
        let table = rw_table(&f, Some(&xi), None);
        let rs = RewriteSystem::new(table, 3);
        let bad = xi_triples()
            .iter()
            .any(|&[a, b, c]| !formal_jacobi(&rs, a, b, c).unwrap().is_zero());
        assert!(bad);
    }

    #[test]
    fn classical_fit_on_diagonal() {
        let d = diagonal_discovery();
        let tt = d.tt.unwrap();
        let fit = fit_classical_tt(&tt, TableVariant::Projected).expect("projected table fits");
        assert_eq!(fit.mu, -(&fit.kappa * rat(2)).recip());
    }

    #[test]
    fn rescaling_t_rescales_tt() {
        let r = diagonal();
        let l1 = solve_t_system(&r).unwrap();
        let f = l1.family().unwrap().clone();
        let mut g = f.clone();
        g.t = f.t.clone().map(|m| m.scale(&rat(3)));
        let ctx = |family| RwContext {
            realization: r.clone(),
            expansion: expand_f(&r).unwrap(),
            family,
            degree_cap: 3,
        };
        let a = ctx(f).solve_tt(&vec![Rat::zero(); XI_UNKNOWNS]).unwrap();
        let b = ctx(g).solve_tt(&vec![Rat::zero(); XI_UNKNOWNS]).unwrap();
        let scaled: Vec<Rat> = a.values.iter().map(|v| v * rat(3)).collect();
        assert_eq!(scaled, b.values);
    }

    #[test]
    fn classical_presentation_has_all_pairs() {
        let t = classical_presentation(TableVariant::Corrected).unwrap();
        assert_eq!(t.entries().count(), 28);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::sampling::Sampler;
    use proptest::prelude::*;

    fn identity_tuple() -> [Mat3; 6] {
        SYM_PAIRS.map(|(j, k)| {
            if j == k {
                Mat3::identity()
            } else {
                Mat3::zero()
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn identity_tuple_in_every_kernel(seed in any::<u64>(), locus in any::<bool>()) {
            let mut s = Sampler::new(seed);
            let p = if locus { s.locus() } else { s.general() };
            let r = SklyaninRealization::from_params(&p).unwrap();
            let l = solve_t_system(&r).unwrap();
            prop_assert!(l.contains(&identity_tuple()));
            for t in &l.kernel {
                prop_assert!(t_system_residuals(&r, t).iter().all(Mat3::is_zero));
            }
        }

        #[test]
        fn sklyanin_table_evaluates_to_commutators(seed in any::<u64>()) {
            let p = Sampler::new(seed).general();
            let r = SklyaninRealization::from_params(&p).unwrap();
            let table = sklyanin_table(&expand_f(&r).unwrap());
            let mats = [r.q.clone(), r.s[0].clone(), r.s[1].clone(), r.s[2].clone()];
            prop_assert!(matrix_residuals(&table, &mats).is_empty());
        }
    }
}
