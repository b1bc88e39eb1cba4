//! Exact rational scalars, 3x3 matrices and linear solving.
//!
//! Every computation in the crate runs over `BigRational`; nothing here ever
//! touches floating point. Matrices are flattened row-major whenever they are
//! turned into coefficient vectors.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or an integer literal. Decimal points and exponents are
/// rejected outright.
pub fn parse_rat(s: &str) -> Result<Rat, ExactError> {
    let t = s.trim();
    let ok = !t.is_empty()
        && t.chars()
            .all(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '/');
    if !ok {
        return Err(ExactError::BadRational(s.to_string()));
    }
    let r: Rat = t
        .parse()
        .map_err(|_| ExactError::BadRational(s.to_string()))?;
    Ok(r)
}

/// Canonical `"p/q"` (or `"p"` when the denominator is one) rendering.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("index {0} out of range 1..=3")]
    IndexOutOfRange(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("not an exact rational: {0:?}")]
    BadRational(String),
}

/// Levi-Civita symbol on 1-based indices, normalised so that eps(1,2,3) = 1.
pub fn levi_civita(i: usize, j: usize, k: usize) -> Result<Rat, ExactError> {
    for &x in &[i, j, k] {
        if !(1..=3).contains(&x) {
            return Err(ExactError::IndexOutOfRange(x));
        }
    }
    Ok(rat(eps(i - 1, j - 1, k - 1)))
}

/// Zero-based integer Levi-Civita symbol used internally.
pub fn eps(i: usize, j: usize, k: usize) -> i64 {
    if i == j || j == k || i == k {
        return 0;
    }
    // (0,1,2) and its cyclic shifts are even
    if (i + 1) % 3 == j && (j + 1) % 3 == k {
        1
    } else {
        -1
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat3(pub [[Rat; 3]; 3]);

impl Mat3 {
    pub fn zero() -> Self {
        Mat3(std::array::from_fn(|_| {
            std::array::from_fn(|_| Rat::zero())
        }))
    }

    pub fn identity() -> Self {
        Self::scalar(Rat::one())
    }

    pub fn scalar(c: Rat) -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.0[i][i] = c.clone();
        }
        m
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> Rat) -> Self {
        Mat3(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn from_ints(rows: [[i64; 3]; 3]) -> Self {
        Self::from_fn(|i, j| rat(rows[i][j]))
    }

    pub fn diag(a: Rat, b: Rat, c: Rat) -> Self {
        let mut m = Self::zero();
        m.0[0][0] = a;
        m.0[1][1] = b;
        m.0[2][2] = c;
        m
    }

    /// Row-major flattening.
    pub fn from_flat(v: &[Rat]) -> Self {
        assert_eq!(v.len(), 9, "Mat3::from_flat needs 9 entries");
        Self::from_fn(|i, j| v[3 * i + j].clone())
    }

    pub fn flat(&self) -> Vec<Rat> {
        self.0.iter().flat_map(|r| r.iter().cloned()).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn is_skew(&self) -> bool {
        *self == -self.transpose()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|r| r.iter().all(|x| x.is_zero()))
    }

    pub fn trace(&self) -> Rat {
        &self.0[0][0] + &self.0[1][1] + &self.0[2][2]
    }

    pub fn det(&self) -> Rat {
        let m = &self.0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::from_fn(|i, j| &self.0[i][j] * c)
    }

    /// Skew matrix with the given upper-triangle entries (1,2), (1,3), (2,3).
    pub fn skew(a12: Rat, a13: Rat, a23: Rat) -> Self {
        let mut m = Self::zero();
        m.0[0][1] = a12.clone();
        m.0[1][0] = -a12;
        m.0[0][2] = a13.clone();
        m.0[2][0] = -a13;
        m.0[1][2] = a23.clone();
        m.0[2][1] = -a23;
        m
    }

    /// Symmetric matrix from upper-triangle entries in the order
    /// (1,1), (1,2), (1,3), (2,2), (2,3), (3,3).
    pub fn sym(u: [Rat; 6]) -> Self {
        let [a11, a12, a13, a22, a23, a33] = u;
        Mat3([
            [a11, a12.clone(), a13.clone()],
            [a12, a22, a23.clone()],
            [a13, a23, a33],
        ])
    }

    pub fn sym_entries(&self) -> [Rat; 6] {
        let m = &self.0;
        [
            m[0][0].clone(),
            m[0][1].clone(),
            m[0][2].clone(),
            m[1][1].clone(),
            m[1][2].clone(),
            m[2][2].clone(),
        ]
    }
}

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::zero()
    }
}

impl fmt::Debug for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .map(|r| r.iter().map(fmt_rat).collect::<Vec<_>>().join(", "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

impl<'a> Add<&'a Mat3> for &'a Mat3 {
    type Output = Mat3;
    fn add(self, o: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| &self.0[i][j] + &o.0[i][j])
    }
}

impl<'a> Sub<&'a Mat3> for &'a Mat3 {
    type Output = Mat3;
    fn sub(self, o: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| &self.0[i][j] - &o.0[i][j])
    }
}

impl<'a> Mul<&'a Mat3> for &'a Mat3 {
    type Output = Mat3;
    fn mul(self, o: &Mat3) -> Mat3 {
        Mat3::from_fn(|i, j| (0..3).fold(Rat::zero(), |acc, k| acc + &self.0[i][k] * &o.0[k][j]))
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        Mat3::from_fn(|i, j| -&self.0[i][j])
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        &self + &o
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        &self - &o
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        &self * &o
    }
}

pub fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
    &(a * b) - &(b * a)
}

pub fn anticommutator(a: &Mat3, b: &Mat3) -> Mat3 {
    &(a * b) + &(b * a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinSolveResult {
    pub particular: Option<Vec<Rat>>,
    pub kernel_basis: Vec<Vec<Rat>>,
    pub rank: usize,
}

impl LinSolveResult {
    pub fn is_consistent(&self) -> bool {
        self.particular.is_some()
    }

    pub fn is_unique(&self) -> bool {
        self.particular.is_some() && self.kernel_basis.is_empty()
    }
}

fn lcm_of_denoms<'a>(xs: impl Iterator<Item = &'a Rat>) -> BigInt {
    xs.fold(BigInt::one(), |l, x| l.lcm(x.denom()))
}

/// Solves `A x = b` exactly with fraction-free (Bareiss) forward elimination
/// followed by rational back substitution. Free variables are set to zero in
/// the particular solution; the kernel basis has one vector per free column.
pub fn solve_linear(a: &[Vec<Rat>], b: &[Rat]) -> Result<LinSolveResult, ExactError> {
    let m = a.len();
    if b.len() != m {
        return Err(ExactError::DimensionMismatch(format!(
            "{m} rows but rhs has {} entries",
            b.len()
        )));
    }
    let n = a.first().map_or(0, |r| r.len());
    if let Some((i, r)) = a.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(ExactError::DimensionMismatch(format!(
            "row {i} has {} columns, expected {n}",
            r.len()
        )));
    }

    // Integer augmented matrix, one row scaled by the lcm of its denominators.
    let mut g: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let l = lcm_of_denoms(row.iter().chain(std::iter::once(rhs)));
            row.iter()
                .chain(std::iter::once(rhs))
                .map(|x| (x * Rat::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for col in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| !g[i][col].is_zero()) else {
            continue;
        };
        g.swap(r, p);
        let (top, rest) = g.split_at_mut(r + 1);
        let piv_row = &top[r];
        let piv = piv_row[col].clone();
        for row in rest.iter_mut() {
            let f = row[col].clone();
            for j in col + 1..=n {
                let v = &piv * &row[j] - &f * &piv_row[j];
                debug_assert!((&v % &prev).is_zero(), "Bareiss division not exact");
                row[j] = v / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = piv;
        pivots.push(col);
        r += 1;
    }
    let rank = r;
    let consistent = g[rank..].iter().all(|row| row[n].is_zero());

    let to_rat = |x: &BigInt| Rat::from_integer(x.clone());
    let is_pivot: Vec<Option<usize>> = {
        let mut v = vec![None; n];
        for (k, &c) in pivots.iter().enumerate() {
            v[c] = Some(k);
        }
        v
    };

    // Back substitution for a given assignment of free variables and rhs scaling.
    let back = |free: &dyn Fn(usize) -> Rat, with_rhs: bool| -> Vec<Rat> {
        let mut x = vec![Rat::zero(); n];
        for c in 0..n {
            if is_pivot[c].is_none() {
                x[c] = free(c);
            }
        }
        for k in (0..rank).rev() {
            let c = pivots[k];
            let row = &g[k];
            let mut s = if with_rhs {
                to_rat(&row[n])
            } else {
                Rat::zero()
            };
            for j in c + 1..n {
                if !row[j].is_zero() && !x[j].is_zero() {
                    s -= to_rat(&row[j]) * &x[j];
                }
            }
            x[c] = s / to_rat(&row[c]);
        }
        x
    };

    let particular = consistent.then(|| back(&|_| Rat::zero(), true));
    let kernel_basis = (0..n)
        .filter(|&c| is_pivot[c].is_none())
        .map(|f| back(&|c| if c == f { Rat::one() } else { Rat::zero() }, false))
        .collect();
    Ok(LinSolveResult {
        particular,
        kernel_basis,
        rank,
    })
}

/// Sparse row over column indices.
pub type SparseRow = BTreeMap<usize, Rat>;

/// Incremental reduced-row-echelon accumulator for tall sparse systems
/// (thousands of equations in at most a few hundred unknowns). Rows are
/// reduced against the current basis as they arrive, so redundant equations
/// never enlarge the working set.
#[derive(Debug, Clone, Default)]
pub struct SparseSystem {
    n: usize,
    // pivot column -> (row with leading 1 at pivot, rhs)
    rows: BTreeMap<usize, (SparseRow, Rat)>,
    inconsistent: Option<usize>,
    seen: usize,
}

impl SparseSystem {
    pub fn new(n: usize) -> Self {
        SparseSystem {
            n,
            ..Default::default()
        }
    }

    pub fn unknowns(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Index (in arrival order) of the first equation found inconsistent.
    pub fn inconsistent_at(&self) -> Option<usize> {
        self.inconsistent
    }

    fn reduce(&self, mut row: SparseRow, mut rhs: Rat) -> (SparseRow, Rat) {
        // Pivot rows are fully reduced, so one pass in column order suffices.
        let cols: Vec<usize> = row.keys().copied().collect();
        for c in cols {
            let Some(f) = row.get(&c).cloned() else {
                continue;
            };
            if let Some((prow, prhs)) = self.rows.get(&c) {
                for (j, v) in prow {
                    let e = row.entry(*j).or_insert_with(Rat::zero);
                    *e -= &f * v;
                    if e.is_zero() {
                        row.remove(j);
                    }
                }
                rhs -= &f * prhs;
            }
        }
        (row, rhs)
    }

    /// Adds the equation `sum row[j] x_j = rhs`.
    pub fn push(&mut self, row: SparseRow, rhs: Rat) {
        let idx = self.seen;
        self.seen += 1;
        let row: SparseRow = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        debug_assert!(row.keys().all(|&j| j < self.n));
        let (row, rhs) = self.reduce(row, rhs);
        let Some((&c, lead)) = row.iter().next() else {
            if !rhs.is_zero() && self.inconsistent.is_none() {
                self.inconsistent = Some(idx);
            }
            return;
        };
        let inv = lead.recip();
        let row: SparseRow = row.iter().map(|(j, v)| (*j, v * &inv)).collect();
        let rhs = rhs * &inv;
        for (prow, prhs) in self.rows.values_mut() {
            if let Some(f) = prow.get(&c).cloned() {
                for (j, v) in &row {
                    let e = prow.entry(*j).or_insert_with(Rat::zero);
                    *e -= &f * v;
                    if e.is_zero() {
                        prow.remove(j);
                    }
                }
                *prhs -= &f * &rhs;
            }
        }
        self.rows.insert(c, (row, rhs));
    }

    pub fn solve(&self) -> LinSolveResult {
        let n = self.n;
        let particular = self.inconsistent.is_none().then(|| {
            let mut x = vec![Rat::zero(); n];
            for (&c, (_, rhs)) in &self.rows {
                x[c] = rhs.clone();
            }
            x
        });
        let kernel_basis = (0..n)
            .filter(|c| !self.rows.contains_key(c))
            .map(|f| {
                let mut x = vec![Rat::zero(); n];
                x[f] = Rat::one();
                for (&c, (row, _)) in &self.rows {
                    if let Some(v) = row.get(&f) {
                        x[c] = -v;
                    }
                }
                x
            })
            .collect();
        LinSolveResult {
            particular,
            kernel_basis,
            rank: self.rows.len(),
        }
    }
}

/// Result of expressing a matrix in the span of a list of matrices.
#[derive(Debug, Clone, PartialEq)]
pub enum SpanResult {
    Found {
        coefficients: Vec<Rat>,
        kernel: Vec<Vec<Rat>>,
    },
    OutsideSpan,
}

impl SpanResult {
    pub fn coefficients(&self) -> Option<&[Rat]> {
        match self {
            SpanResult::Found { coefficients, .. } => Some(coefficients),
            SpanResult::OutsideSpan => None,
        }
    }
}

pub fn express_in_span(target: &Mat3, spanning: &[Mat3]) -> SpanResult {
    assert!(
        !spanning.is_empty(),
        "express_in_span needs a spanning list"
    );
    let flats: Vec<Vec<Rat>> = spanning.iter().map(Mat3::flat).collect();
    let a: Vec<Vec<Rat>> = (0..9)
        .map(|e| flats.iter().map(|f| f[e].clone()).collect())
        .collect();
    let res = solve_linear(&a, &target.flat()).expect("9 x k system is well formed");
    match res.particular {
        Some(coefficients) => SpanResult::Found {
            coefficients,
            kernel: res.kernel_basis,
        },
        None => SpanResult::OutsideSpan,
    }
}

/// Linear combination of matrices.
pub fn combine(coeffs: &[Rat], mats: &[Mat3]) -> Mat3 {
    coeffs
        .iter()
        .zip(mats)
        .fold(Mat3::zero(), |acc, (c, m)| &acc + &m.scale(c))
}

/// Exact square root of a non-negative rational, when it is a perfect square.
pub fn rational_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    (&n * &n == *r.numer() && &d * &d == *r.denom()).then(|| Rat::new(n, d))
}

/// Applies a dense matrix to a vector.
pub fn mat_vec(a: &[Vec<Rat>], x: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(Rat::zero(), |acc, (p, q)| acc + p * q)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> Mat3 {
        match i {
            1 => Mat3::skew(rat(1), rat(0), rat(0)),
            2 => Mat3::skew(rat(0), rat(0), rat(1)),
            _ => Mat3::skew(rat(0), rat(1), rat(0)),
        }
    }

    #[test]
    fn levi_civita_values() {
        assert_eq!(levi_civita(1, 2, 3).unwrap(), rat(1));
        assert_eq!(levi_civita(2, 1, 3).unwrap(), rat(-1));
        assert_eq!(levi_civita(1, 1, 2).unwrap(), rat(0));
        assert_eq!(levi_civita(3, 1, 2).unwrap(), rat(1));
        assert_eq!(levi_civita(0, 1, 2), Err(ExactError::IndexOutOfRange(0)));
        assert_eq!(levi_civita(1, 4, 2), Err(ExactError::IndexOutOfRange(4)));
    }

    #[test]
    fn commutator_examples() {
        assert_eq!(commutator(&e(1), &e(2)), e(3));
        assert_eq!(commutator(&e(1), &e(3)), -e(2));
        assert!(commutator(&e(2), &e(2)).is_zero());
    }

    #[test]
    fn anticommutator_examples() {
        let a = Mat3::from_ints([[1, 2, 3], [4, 5, 6], [7, 8, 10]]);
        assert_eq!(anticommutator(&Mat3::identity(), &a), a.scale(&rat(2)));
        let expected = Mat3::from_ints([[0, -1, 0], [-1, 0, 0], [0, 0, 0]]);
        assert_eq!(anticommutator(&e(2), &e(3)), expected);
    }

    #[test]
    fn solve_identity_and_zero() {
        let id: Vec<Vec<Rat>> = (0..3)
            .map(|i| (0..3).map(|j| rat((i == j) as i64)).collect())
            .collect();
        let v = vec![ratio(1, 2), rat(-3), rat(7)];
        let r = solve_linear(&id, &v).unwrap();
        assert_eq!(r.particular.as_deref(), Some(&v[..]));
        assert!(r.kernel_basis.is_empty());

        let z = vec![vec![rat(0); 4]; 2];
        let r = solve_linear(&z, &[rat(0), rat(0)]).unwrap();
        assert_eq!(r.kernel_basis.len(), 4);
        assert_eq!(r.rank, 0);
    }

    #[test]
    fn solve_inconsistent_and_mismatch() {
        let a = vec![vec![rat(1), rat(1)], vec![rat(2), rat(2)]];
        let r = solve_linear(&a, &[rat(1), rat(3)]).unwrap();
        assert!(r.particular.is_none());
        assert_eq!(r.rank, 1);
        assert!(solve_linear(&a, &[rat(1)]).is_err());
    }

    #[test]
    fn span_examples() {
        let s = express_in_span(&e(3), &[e(1), e(2), e(3)]);
        assert_eq!(
            s,
            SpanResult::Found {
                coefficients: vec![rat(0), rat(0), rat(1)],
                kernel: vec![]
            }
        );
        let sym = Mat3::from_ints([[1, 0, 0], [0, 0, 0], [0, 0, 0]]);
        assert_eq!(
            express_in_span(&sym, &[e(1), e(2), e(3)]),
            SpanResult::OutsideSpan
        );
    }

    #[test]
    fn rational_parsing_policy() {
        assert_eq!(parse_rat("2/3").unwrap(), ratio(2, 3));
        assert_eq!(parse_rat("-7").unwrap(), rat(-7));
        assert!(parse_rat("0.5").is_err());
        assert!(parse_rat("1e3").is_err());
        assert!(parse_rat("1/0").is_err());
        assert_eq!(fmt_rat(&ratio(-4, 6)), "-2/3");
        assert_eq!(fmt_rat(&rat(5)), "5");
    }

    #[test]
    fn sqrt_of_squares() {
        assert_eq!(rational_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(rational_sqrt(&ratio(2, 1)), None);
        assert_eq!(rational_sqrt(&ratio(-1, 4)), None);
    }

    #[test]
    fn det_and_trace() {
        let q = Mat3::scalar(ratio(-1, 2));
        assert_eq!(q.det(), ratio(-1, 8));
        assert_eq!(q.trace(), ratio(-3, 2));
    }
}
