//! Matrix realization of the Sklyanin algebra by 3x3 skew matrices and one
//! symmetric matrix `Q`, with `[S_i,S_j] = eps_ijk (Q S_k + S_k Q)`.

use num_traits::{One, Zero};
use thiserror::Error;

use crate::classical::so3_basis;
use crate::exact::{
    anticommutator, combine, commutator, eps, express_in_span, rat, rational_sqrt, solve_linear,
    Mat3, Rat, SpanResult,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RealizationError {
    #[error("zero denominator: parameter {0} must be nonzero")]
    ZeroDenominator(&'static str),
    #[error("S1, S2, S3 are linearly dependent")]
    DependentS,
    #[error("no symmetric Q satisfies the defining relations")]
    NoSolution,
    #[error("symmetric Q is not unique (kernel dimension {})", .0.len())]
    NonUnique(Vec<Vec<Rat>>),
    #[error("F_{0} = [Q,S_{0}] lies outside the span of the symmetrized products")]
    ExpansionFailure(usize),
    #[error("p(Q) is singular on skew matrices (determinant 0, vanishing eigenvalue sums at {vanishing:?})")]
    SingularP { vanishing: Vec<(usize, usize)> },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no multipliers exist: {0}")]
    NoMultipliers(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SklyaninParams {
    pub alpha: Rat,
    pub beta: Rat,
    pub gamma: Rat,
    pub delta: Rat,
    pub epsilon: Rat,
    pub zeta: Rat,
}

impl SklyaninParams {
    pub fn new(v: [Rat; 6]) -> Self {
        let [alpha, beta, gamma, delta, epsilon, zeta] = v;
        SklyaninParams {
            alpha,
            beta,
            gamma,
            delta,
            epsilon,
            zeta,
        }
    }

    pub fn from_ints(v: [i64; 6]) -> Self {
        Self::new(v.map(rat))
    }

    /// The point where the S-triple is a permutation of the so(3) basis.
    pub fn diagonal_point() -> Self {
        Self::from_ints([1, 0, 1, 0, 0, 1])
    }

    pub fn as_array(&self) -> [&Rat; 6] {
        [
            &self.alpha,
            &self.beta,
            &self.gamma,
            &self.delta,
            &self.epsilon,
            &self.zeta,
        ]
    }

    pub fn scaled(&self, c: &Rat) -> Self {
        Self::new(self.as_array().map(|x| x * c))
    }

    pub const NAMES: [&'static str; 6] = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"];
}

pub fn build_s(p: &SklyaninParams) -> [Mat3; 3] {
    let z = Rat::zero;
    [
        Mat3::skew(p.alpha.clone(), z(), z()),
        Mat3::skew(p.beta.clone(), p.gamma.clone(), z()),
        Mat3::skew(p.delta.clone(), p.epsilon.clone(), p.zeta.clone()),
    ]
}

/// Which printed formula to use for `v + w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QFormula {
    /// Exactly as printed, including the `-eps^2 gamma^2` term.
    Printed,
    /// With `-delta^2 gamma^2` in place of `-eps^2 gamma^2`; this is the
    /// reading that agrees with the linear solve.
    Corrected,
}

/// Closed-form `Q` from the parameters.
pub fn q_closed_form(p: &SklyaninParams, formula: QFormula) -> Result<Mat3, RealizationError> {
    for (v, name) in [(&p.alpha, "alpha"), (&p.gamma, "gamma"), (&p.zeta, "zeta")] {
        if v.is_zero() {
            return Err(RealizationError::ZeroDenominator(name));
        }
    }
    let (a, b, c, d, e, z) = (&p.alpha, &p.beta, &p.gamma, &p.delta, &p.epsilon, &p.zeta);
    let sq = |x: &Rat| x * x;
    let x = (sq(a) * e + sq(b) * e - b * c * d) / (a * c);
    let y = (b * e - c * d) / a;
    let zz = b * z / a;
    let u_v = -(c * z) / a;
    let u_w = -(z * (sq(a) + sq(b))) / (a * c);
    let last = match formula {
        QFormula::Printed => sq(e) * sq(c),
        QFormula::Corrected => sq(d) * sq(c),
    };
    let v_w = (rat(2) * b * c * d * e - sq(a) * sq(e) - sq(b) * sq(e) - sq(a) * sq(c) - last)
        / (a * c * z);
    let two = rat(2);
    let u = (&u_v + &u_w - &v_w) / &two;
    let v = (&u_v + &v_w - &u_w) / &two;
    let w = (&u_w + &v_w - &u_v) / &two;
    Ok(Mat3::sym([u, x, y, v, zz, w]))
}

/// Symmetric basis matrices matching `Mat3::sym` entry order.
fn sym_basis() -> [Mat3; 6] {
    std::array::from_fn(|k| {
        let mut e: [Rat; 6] = std::array::from_fn(|_| Rat::zero());
        e[k] = Rat::one();
        Mat3::sym(e)
    })
}

/// Rank of a list of matrices viewed as vectors.
pub fn matrix_rank(ms: &[Mat3]) -> usize {
    let flats: Vec<Vec<Rat>> = ms.iter().map(Mat3::flat).collect();
    let a: Vec<Vec<Rat>> = (0..9)
        .map(|e| flats.iter().map(|f| f[e].clone()).collect())
        .collect();
    solve_linear(&a, &vec![Rat::zero(); 9]).unwrap().rank
}

/// The cyclic pairs `(i, j, k)` (0-based) with `eps_ijk = 1`.
pub const CYCLIC: [(usize, usize, usize); 3] = [(0, 1, 2), (1, 2, 0), (2, 0, 1)];

/// Solves `[S_i,S_j] = eps_ijk (Q S_k + S_k Q)` for symmetric `Q`.
pub fn q_from_linear_system(s: &[Mat3; 3]) -> Result<Mat3, RealizationError> {
    if matrix_rank(s) < 3 {
        return Err(RealizationError::DependentS);
    }
    let basis = sym_basis();
    let mut a: Vec<Vec<Rat>> = Vec::new();
    let mut b: Vec<Rat> = Vec::new();
    for &(i, j, k) in &CYCLIC {
        let cols: Vec<Vec<Rat>> = basis
            .iter()
            .map(|e| anticommutator(e, &s[k]).flat())
            .collect();
        let rhs = commutator(&s[i], &s[j]).flat();
        for ent in 0..9 {
            a.push(cols.iter().map(|c| c[ent].clone()).collect());
            b.push(rhs[ent].clone());
        }
    }
    let res = solve_linear(&a, &b).expect("27 x 6 system");
    let Some(q) = res.particular else {
        return Err(RealizationError::NoSolution);
    };
    if !res.kernel_basis.is_empty() {
        return Err(RealizationError::NonUnique(res.kernel_basis));
    }
    Ok(Mat3::sym(q.try_into().unwrap()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SklyaninRealization {
    pub params: Option<SklyaninParams>,
    pub s: [Mat3; 3],
    pub q: Mat3,
}

impl SklyaninRealization {
    pub fn from_params(p: &SklyaninParams) -> Result<Self, RealizationError> {
        let s = build_s(p);
        let q = q_from_linear_system(&s)?;
        Ok(SklyaninRealization {
            params: Some(p.clone()),
            s,
            q,
        })
    }

    pub fn from_matrices(s: [Mat3; 3]) -> Result<Self, RealizationError> {
        let q = q_from_linear_system(&s)?;
        Ok(SklyaninRealization { params: None, s, q })
    }

    /// Entries `(u, v, w, x, y, z)` of `Q`.
    pub fn uvwxyz(&self) -> [Rat; 6] {
        let m = &self.q.0;
        [
            m[0][0].clone(),
            m[1][1].clone(),
            m[2][2].clone(),
            m[0][1].clone(),
            m[0][2].clone(),
            m[1][2].clone(),
        ]
    }

    /// `[S_i,S_j] - eps_ijk (Q S_k + S_k Q)` for the three cyclic pairs.
    pub fn relation_residuals(&self) -> [Mat3; 3] {
        CYCLIC.map(|(i, j, k)| {
            &commutator(&self.s[i], &self.s[j]) - &anticommutator(&self.q, &self.s[k])
        })
    }

    pub fn on_locus(&self) -> bool {
        locus_traces(&self.s).iter().all(|t| t.is_zero())
    }
}

/// `tr(S1 S2), tr(S1 S3), tr(S2 S3)`.
pub fn locus_traces(s: &[Mat3; 3]) -> [Rat; 3] {
    [(0, 1), (0, 2), (1, 2)].map(|(i, j)| (&s[i] * &s[j]).trace())
}

/// Index pairs `j <= k` of the symmetrized products `S_j S_k + S_k S_j`.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

pub fn sym_products(s: &[Mat3; 3]) -> [Mat3; 6] {
    SYM_PAIRS.map(|(j, k)| anticommutator(&s[j], &s[k]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JValues {
    pub j12: Rat,
    pub j23: Rat,
    pub j31: Rat,
}

impl JValues {
    pub fn identity_residual(&self) -> Rat {
        &self.j12 + &self.j23 + &self.j31 + &self.j12 * &self.j23 * &self.j31
    }
}

/// How `J_jk` is read off from the coefficient of `S_j S_k + S_k S_j` in `F_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JConvention {
    /// `J_jk` equals the coefficient.
    Direct,
    /// `J_jk` is half the coefficient (antisymmetric `J`, both orders summed).
    Halved,
}

impl JConvention {
    pub const ALL: [JConvention; 2] = [JConvention::Direct, JConvention::Halved];

    pub fn name(self) -> &'static str {
        match self {
            JConvention::Direct => "direct",
            JConvention::Halved => "halved",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadExpansion {
    /// Coefficients of `F_i` against `sym_products`, one row per `i`.
    pub coefficients: [Vec<Rat>; 3],
    /// Kernel of the spanning map (non-uniqueness witness), usually empty.
    pub kernel: Vec<Vec<Rat>>,
    pub on_locus: bool,
    /// On the locus: whether each `F_i` only involves `S_j S_k + S_k S_j`
    /// with `(i, j, k)` cyclic.
    pub sklyanin_form: Option<bool>,
}

impl QuadExpansion {
    /// J values under a given convention, present only on the locus.
    pub fn j(&self, conv: JConvention) -> Option<JValues> {
        if !self.on_locus {
            return None;
        }
        let f = match conv {
            JConvention::Direct => Rat::one(),
            JConvention::Halved => Rat::new(1.into(), 2.into()),
        };
        let pos = |j: usize, k: usize| SYM_PAIRS.iter().position(|&p| p == (j, k)).unwrap();
        Some(JValues {
            j23: &self.coefficients[0][pos(1, 2)] * &f,
            j31: &self.coefficients[1][pos(0, 2)] * &f,
            j12: &self.coefficients[2][pos(0, 1)] * &f,
        })
    }
}

pub fn expand_f(r: &SklyaninRealization) -> Result<QuadExpansion, RealizationError> {
    let prods = sym_products(&r.s);
    let mut coefficients: [Vec<Rat>; 3] = Default::default();
    let mut kernel = Vec::new();
    for (i, (s, slot)) in r.s.iter().zip(coefficients.iter_mut()).enumerate() {
        let f = commutator(&r.q, s);
        match express_in_span(&f, &prods) {
            SpanResult::Found {
                coefficients: c,
                kernel: k,
            } => {
                *slot = c;
                kernel = k;
            }
            SpanResult::OutsideSpan => return Err(RealizationError::ExpansionFailure(i + 1)),
        }
    }
    let on_locus = r.on_locus();
    let sklyanin_form = on_locus.then(|| {
        CYCLIC.iter().all(|&(i, j, k)| {
            let keep = (j.min(k), j.max(k));
            SYM_PAIRS
                .iter()
                .zip(&coefficients[i])
                .all(|(&p, c)| p == keep || c.is_zero())
        })
    });
    Ok(QuadExpansion {
        coefficients,
        kernel,
        on_locus,
        sklyanin_form,
    })
}

/// The first convention under which the cubic identity holds on every sample.
pub fn select_j_convention(samples: &[QuadExpansion]) -> Option<JConvention> {
    JConvention::ALL.into_iter().find(|&c| {
        samples
            .iter()
            .filter_map(|s| s.j(c))
            .all(|j| j.identity_residual().is_zero())
    })
}

/// `p(Q) A = Q A + A Q`.
pub fn p_of_q(q: &Mat3, a: &Mat3) -> Mat3 {
    anticommutator(q, a)
}

/// Coordinates of a skew matrix in the so(3) basis `(e1, e2, e3)`.
pub fn skew_coords(a: &Mat3) -> [Rat; 3] {
    [a.0[0][1].clone(), a.0[1][2].clone(), a.0[0][2].clone()]
}

pub fn from_skew_coords(c: &[Rat]) -> Mat3 {
    combine(c, &so3_basis())
}

/// `p(Q)` restricted to skew matrices, as a 3x3 matrix in the so(3) basis.
pub fn p_on_skew(q: &Mat3) -> Vec<Vec<Rat>> {
    let cols: Vec<[Rat; 3]> = so3_basis()
        .iter()
        .map(|e| skew_coords(&p_of_q(q, e)))
        .collect();
    (0..3)
        .map(|r| (0..3).map(|c| cols[c][r].clone()).collect())
        .collect()
}

/// Inverse of `p(Q)` on the skew subspace.
pub fn p_inverse(q: &Mat3, a: &Mat3) -> Result<Mat3, RealizationError> {
    if !a.is_skew() {
        return Err(RealizationError::Precondition(
            "p_inverse needs a skew argument".into(),
        ));
    }
    let op = p_on_skew(q);
    let res = solve_linear(&op, &skew_coords(a)).unwrap();
    if res.rank < 3 {
        return Err(RealizationError::SingularP {
            vanishing: vanishing_sums(q),
        });
    }
    Ok(from_skew_coords(res.particular.as_ref().unwrap()))
}

fn vanishing_sums(q: &Mat3) -> Vec<(usize, usize)> {
    let is_diag = (0..3).all(|i| (0..3).all(|j| i == j || q.0[i][j].is_zero()));
    if !is_diag {
        return Vec::new();
    }
    [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .filter(|&(i, j)| (&q.0[i][i] + &q.0[j][j]).is_zero())
        .map(|(i, j)| (i + 1, j + 1))
        .collect()
}

/// `tr(A Q B + B Q A)`.
pub fn q_inner(q: &Mat3, a: &Mat3, b: &Mat3) -> Rat {
    (&(&(a * q) * b) + &(&(b * q) * a)).trace()
}

/// Third skew matrix `p(Q)^{-1}[S1, S2]`, checked to be Q-orthogonal to both.
pub fn third_from_pair(q: &Mat3, s1: &Mat3, s2: &Mat3) -> Result<Mat3, RealizationError> {
    if !s1.is_skew() || !s2.is_skew() {
        return Err(RealizationError::Precondition(
            "S1 and S2 must be skew".into(),
        ));
    }
    if !q_inner(q, s1, s2).is_zero() {
        return Err(RealizationError::Precondition(
            "S1 and S2 are not Q-orthogonal".into(),
        ));
    }
    let s3 = p_inverse(q, &commutator(s1, s2))?;
    for (i, s) in [s1, s2].into_iter().enumerate() {
        if !q_inner(q, s, &s3).is_zero() {
            return Err(RealizationError::Precondition(format!(
                "constructed S3 is not Q-orthogonal to S{}",
                i + 1
            )));
        }
    }
    Ok(s3)
}

/// Multipliers turning `(S1, S2, p(Q)^{-1}[S1,S2])` into a realization with
/// the given `Q`. The relations force `lambda3 = lambda1 lambda2` and fix the
/// squares of `lambda1`, `lambda2`; the remaining freedom is the two signs.
#[derive(Debug, Clone, PartialEq)]
pub struct Multipliers {
    pub lambda1_sq: Rat,
    pub lambda2_sq: Rat,
    /// Positive-sign representative, when both squares are rational squares.
    pub lambdas: Option<[Rat; 3]>,
}

pub fn find_multipliers(q: &Mat3, s1: &Mat3, s2: &Mat3) -> Result<Multipliers, RealizationError> {
    let s3 = third_from_pair(q, s1, s2)?;
    // [S2, S3] = mu1 p(Q) S1 and [S3, S1] = mu2 p(Q) S2
    let mu = |lhs: Mat3, target: &Mat3, what: &str| -> Result<Rat, RealizationError> {
        match express_in_span(&lhs, &[p_of_q(q, target)]) {
            SpanResult::Found { coefficients, .. } => Ok(coefficients[0].clone()),
            SpanResult::OutsideSpan => Err(RealizationError::NoMultipliers(format!(
                "{what} is not proportional to p(Q) applied to the matching generator"
            ))),
        }
    };
    let mu1 = mu(commutator(s2, &s3), s1, "[S2,S3]")?;
    let mu2 = mu(commutator(&s3, s1), s2, "[S3,S1]")?;
    if mu1.is_zero() || mu2.is_zero() {
        return Err(RealizationError::NoMultipliers("degenerate bracket".into()));
    }
    let lambda2_sq = mu1.recip();
    let lambda1_sq = mu2.recip();
    if lambda1_sq < Rat::zero() || lambda2_sq < Rat::zero() {
        return Err(RealizationError::NoMultipliers(
            "required squares are negative, no real multipliers".into(),
        ));
    }
    let lambdas = match (rational_sqrt(&lambda1_sq), rational_sqrt(&lambda2_sq)) {
        (Some(l1), Some(l2)) => {
            let l3 = &l1 * &l2;
            Some([l1, l2, l3])
        }
        _ => None,
    };
    Ok(Multipliers {
        lambda1_sq,
        lambda2_sq,
        lambdas,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub det_q: Rat,
    /// `tr(S_i Q S_j + S_j Q S_i)` for `(1,2), (1,3), (2,3)`.
    pub q_orthogonality: [Rat; 3],
    /// `tr(S_i S_j)` for the same pairs.
    pub traces: [Rat; 3],
    pub on_locus: bool,
    /// `beta = delta = epsilon = 0`, when parameters are known.
    pub locus_by_params: Option<bool>,
}

impl OrthogonalityReport {
    pub fn passes(&self) -> bool {
        !self.det_q.is_zero() && self.q_orthogonality.iter().all(|t| t.is_zero())
    }
}

pub fn orthogonality_report(r: &SklyaninRealization) -> OrthogonalityReport {
    let pairs = [(0, 1), (0, 2), (1, 2)];
    OrthogonalityReport {
        det_q: r.q.det(),
        q_orthogonality: pairs.map(|(i, j)| q_inner(&r.q, &r.s[i], &r.s[j])),
        traces: locus_traces(&r.s),
        on_locus: r.on_locus(),
        locus_by_params: r
            .params
            .as_ref()
            .map(|p| p.beta.is_zero() && p.delta.is_zero() && p.epsilon.is_zero()),
    }
}

/// Congruence diagonalization `P^T Q P = D` using rational operations only.
pub fn congruence_diagonalize(q: &Mat3) -> (Mat3, Mat3) {
    assert!(q.is_symmetric());
    let mut a = q.clone();
    let mut p = Mat3::identity();
    // Column operation col_j += f col_k applied to a (as a congruence) and p.
    let add_col = |a: &mut Mat3, p: &mut Mat3, j: usize, k: usize, f: &Rat| {
        for r in 0..3 {
            let v = &a.0[r][k] * f;
            a.0[r][j] += v;
        }
        for c in 0..3 {
            let v = &a.0[k][c] * f;
            a.0[j][c] += v;
        }
        for r in 0..3 {
            let v = &p.0[r][k] * f;
            p.0[r][j] += v;
        }
    };
    for k in 0..3 {
        if a.0[k][k].is_zero() {
            if let Some(j) = (k + 1..3).find(|&j| !a.0[j][j].is_zero()) {
                add_col(&mut a, &mut p, k, j, &Rat::one());
            } else if let Some(j) = (k + 1..3).find(|&j| !a.0[k][j].is_zero()) {
                add_col(&mut a, &mut p, k, j, &Rat::one());
            }
        }
        if a.0[k][k].is_zero() {
            continue;
        }
        for j in k + 1..3 {
            if a.0[j][k].is_zero() {
                continue;
            }
            let f = -(&a.0[j][k] / &a.0[k][k]);
            add_col(&mut a, &mut p, j, k, &f);
        }
    }
    (p, a)
}

/// Index `k` completing `(i, j)` to a permutation of `(0, 1, 2)` and the sign.
pub fn third_index(i: usize, j: usize) -> (usize, i64) {
    let k = 3 - i - j;
    (k, eps(i, j, k))
}
