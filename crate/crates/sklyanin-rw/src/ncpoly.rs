//! Noncommutative polynomials over an ordered alphabet and reduction by
//! bracket-derived rewrite rules.
//!
//! A rule replaces an out-of-order adjacent pair `x_b x_a` (`b > a`) by
//! `x_a x_b - [x_a, x_b]`. For quadratic algebras such as Sklyanin's the
//! replacement is not smaller in any monomial order, so plain rewriting can
//! cycle. The normal form used here is the fixed point of the chosen
//! reduction strategy: each strongly connected block of the rewrite graph is
//! solved as a small linear system, which gives exactly the limit of repeated
//! rewriting whenever that limit exists.

use std::cell::{Cell, RefCell};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::{fmt_rat, Mat3, Rat};

pub type Word = Vec<u8>;

/// Scalar ring for polynomial coefficients.
pub trait Coef: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: Rat) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse, `None` when the constant part vanishes.
    fn inv(&self) -> Option<Self>;
    fn value(&self) -> &Rat;
}

impl Coef for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
    fn value(&self) -> &Rat {
        self
    }
}

thread_local! {
    static TRUNCATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of jet products on this thread that dropped a second-order term.
/// Zero after a computation means every jet result is exact (the computation
/// was affine in the unknowns).
pub fn jet_truncations() -> u64 {
    TRUNCATIONS.with(Cell::get)
}

pub fn reset_jet_truncations() {
    TRUNCATIONS.with(|c| c.set(0));
}

fn note_truncation() {
    TRUNCATIONS.with(|c| c.set(c.get() + 1));
}

/// First-order jet `value + sum grad[k] * d_k` over a set of unknowns.
#[derive(Clone, PartialEq, Eq)]
pub struct Jet {
    pub value: Rat,
    pub grad: BTreeMap<usize, Rat>,
}

impl Jet {
    pub fn constant(value: Rat) -> Self {
        Jet {
            value,
            grad: BTreeMap::new(),
        }
    }

    /// The unknown `k` at base value `base`.
    pub fn variable(k: usize, base: Rat) -> Self {
        let mut grad = BTreeMap::new();
        grad.insert(k, <Rat as One>::one());
        Jet { value: base, grad }
    }

    fn combine(&self, o: &Jet, sign: bool) -> Jet {
        let mut grad = self.grad.clone();
        for (k, v) in &o.grad {
            match grad.entry(*k) {
                Entry::Occupied(mut e) => {
                    if sign {
                        *e.get_mut() += v;
                    } else {
                        *e.get_mut() -= v;
                    }
                    if Zero::is_zero(e.get()) {
                        e.remove();
                    }
                }
                Entry::Vacant(e) => {
                    e.insert(if sign { v.clone() } else { -v });
                }
            }
        }
        let value = if sign {
            &self.value + &o.value
        } else {
            &self.value - &o.value
        };
        Jet { value, grad }
    }

    fn scaled_grad(g: &BTreeMap<usize, Rat>, c: &Rat) -> BTreeMap<usize, Rat> {
        if Zero::is_zero(c) {
            return BTreeMap::new();
        }
        g.iter().map(|(k, v)| (*k, v * c)).collect()
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", fmt_rat(&self.value))?;
        for (k, v) in &self.grad {
            write!(f, " + {}*d{}", fmt_rat(v), k)?;
        }
        Ok(())
    }
}

impl Coef for Jet {
    fn zero() -> Self {
        Jet::constant(<Rat as Zero>::zero())
    }
    fn one() -> Self {
        Jet::constant(<Rat as One>::one())
    }
    fn from_rat(r: Rat) -> Self {
        Jet::constant(r)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.value) && self.grad.is_empty()
    }
    fn add(&self, o: &Self) -> Self {
        self.combine(o, true)
    }
    fn sub(&self, o: &Self) -> Self {
        self.combine(o, false)
    }
    fn mul(&self, o: &Self) -> Self {
        if !self.grad.is_empty() && !o.grad.is_empty() {
            note_truncation();
        }
        let a = Jet {
            value: &self.value * &o.value,
            grad: Self::scaled_grad(&o.grad, &self.value),
        };
        let b = Jet {
            value: <Rat as Zero>::zero(),
            grad: Self::scaled_grad(&self.grad, &o.value),
        };
        a.combine(&b, true)
    }
    fn neg(&self) -> Self {
        Jet {
            value: -&self.value,
            grad: self.grad.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(&self.value) {
            return None;
        }
        if !self.grad.is_empty() {
            note_truncation();
        }
        let iv = self.value.recip();
        let g = -(&iv * &iv);
        Some(Jet {
            grad: Self::scaled_grad(&self.grad, &g),
            value: iv,
        })
    }
    fn value(&self) -> &Rat {
        &self.value
    }
}

/// Noncommutative polynomial: words over `0..n` with coefficients in `C`.
#[derive(Clone, PartialEq)]
pub struct NCPoly<C: Coef = Rat> {
    terms: BTreeMap<Word, C>,
}

impl<C: Coef> Default for NCPoly<C> {
    fn default() -> Self {
        NCPoly {
            terms: BTreeMap::new(),
        }
    }
}

impl<C: Coef> NCPoly<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn word(w: Word) -> Self {
        Self::term(w, C::one())
    }

    pub fn term(w: Word, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(w, c);
        p
    }

    pub fn gen(g: u8) -> Self {
        Self::word(vec![g])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, w: &[u8]) -> Option<&C> {
        self.terms.get(w)
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, w: Word, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut e) => {
                let v = e.get().add(&c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn add_scaled(&mut self, o: &NCPoly<C>, c: &C) {
        if c.is_zero() {
            return;
        }
        for (w, v) in &o.terms {
            self.add_term(w.clone(), v.mul(c));
        }
    }

    pub fn add(&self, o: &NCPoly<C>) -> NCPoly<C> {
        let mut r = self.clone();
        r.add_scaled(o, &C::one());
        r
    }

    pub fn sub(&self, o: &NCPoly<C>) -> NCPoly<C> {
        let mut r = self.clone();
        r.add_scaled(o, &C::one().neg());
        r
    }

    pub fn scale(&self, c: &C) -> NCPoly<C> {
        let mut r = Self::zero();
        r.add_scaled(self, c);
        r
    }

    pub fn mul(&self, o: &NCPoly<C>) -> NCPoly<C> {
        let mut r = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                r.add_term(w, c1.mul(c2));
            }
        }
        r
    }

    pub fn map<D: Coef>(&self, f: impl Fn(&C) -> D) -> NCPoly<D> {
        let mut r = NCPoly::zero();
        for (w, c) in &self.terms {
            r.add_term(w.clone(), f(c));
        }
        r
    }

    /// Constant parts of all coefficients.
    pub fn values(&self) -> NCPoly<Rat> {
        self.map(|c| c.value().clone())
    }

    pub fn display(&self, names: &[&str]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(w, c)| {
                let ws: Vec<&str> = w.iter().map(|&g| names[g as usize]).collect();
                format!(
                    "({:?})*{}",
                    c,
                    if ws.is_empty() {
                        "1".into()
                    } else {
                        ws.join("*")
                    }
                )
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl<C: Coef> fmt::Debug for NCPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.terms.iter()).finish()
    }
}

pub fn is_ordered(w: &[u8]) -> bool {
    w.windows(2).all(|p| p[0] <= p[1])
}

/// Evaluates a polynomial on 3x3 matrices assigned to the generators.
pub fn evaluate(p: &NCPoly<Rat>, mats: &[Mat3]) -> Mat3 {
    let mut acc = Mat3::zero();
    for (w, c) in p.terms() {
        let m = w
            .iter()
            .fold(Mat3::identity(), |m, &g| &m * &mats[g as usize]);
        acc = &acc + &m.scale(c);
    }
    acc
}

/// Average of all orderings of the letters of a commutative monomial.
pub fn weyl_symmetrize(mono: &[u8], degree_cap: usize) -> Result<NCPoly<Rat>, NcError> {
    if mono.len() > degree_cap {
        return Err(NcError::DegreeCap(mono.to_vec()));
    }
    let mut perms: Vec<Word> = Vec::new();
    permutations(&mut mono.to_vec(), 0, &mut perms);
    let w = Rat::new(1.into(), (perms.len() as i64).into());
    let mut r = NCPoly::zero();
    for p in perms {
        r.add_term(p, w.clone());
    }
    Ok(r)
}

fn permutations(v: &mut Word, k: usize, out: &mut Vec<Word>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, out);
        v.swap(k, i);
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NcError {
    #[error("word {0:?} exceeds the degree cap")]
    DegreeCap(Word),
    #[error("no bracket for generators {0} and {1}")]
    MissingRule(u8, u8),
    #[error("reduction fixed point is singular on a block of {} words", .0.len())]
    SingularFixedPoint(Vec<Word>),
}

/// Antisymmetric bracket table on an ordered alphabet. Entries may be absent,
/// in which case any reduction that needs them fails with `MissingRule`.
#[derive(Clone, Debug, PartialEq)]
pub struct NcTable<C: Coef = Rat> {
    pub names: Vec<String>,
    entries: BTreeMap<(u8, u8), NCPoly<C>>,
}

impl<C: Coef> NcTable<C> {
    pub fn new(names: Vec<String>) -> Self {
        NcTable {
            names,
            entries: BTreeMap::new(),
        }
    }

    pub fn ngen(&self) -> usize {
        self.names.len()
    }

    pub fn name_refs(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    /// Sets `[x_a, x_b] = rhs`; stored under the ordered pair.
    pub fn set(&mut self, a: u8, b: u8, rhs: NCPoly<C>) {
        assert_ne!(a, b, "bracket of a generator with itself is zero");
        if a < b {
            self.entries.insert((a, b), rhs);
        } else {
            self.entries.insert((b, a), rhs.scale(&C::one().neg()));
        }
    }

    pub fn bracket(&self, a: u8, b: u8) -> Result<NCPoly<C>, NcError> {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Equal => Ok(NCPoly::zero()),
            Less => self
                .entries
                .get(&(a, b))
                .cloned()
                .ok_or(NcError::MissingRule(a, b)),
            Greater => self
                .entries
                .get(&(b, a))
                .map(|p| p.scale(&C::one().neg()))
                .ok_or(NcError::MissingRule(b, a)),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(u8, u8), &NCPoly<C>)> {
        self.entries.iter()
    }

    pub fn entry_mut(&mut self, a: u8, b: u8) -> Option<&mut NCPoly<C>> {
        self.entries.get_mut(&(a, b))
    }

    pub fn map<D: Coef>(&self, f: impl Fn(&C) -> D) -> NcTable<D> {
        NcTable {
            names: self.names.clone(),
            entries: self.entries.iter().map(|(k, p)| (*k, p.map(&f))).collect(),
        }
    }

    /// `[p, z]` for a polynomial `p` and generator `z`, by the derivation rule
    /// `[x y, z] = x [y, z] + [x, z] y`.
    pub fn bracket_poly_gen(&self, p: &NCPoly<C>, z: u8) -> Result<NCPoly<C>, NcError> {
        let mut r = NCPoly::zero();
        for (w, c) in p.terms() {
            for m in 0..w.len() {
                let inner = self.bracket(w[m], z)?;
                if inner.is_zero() {
                    continue;
                }
                let left = NCPoly::<C>::word(w[..m].to_vec());
                let right = NCPoly::<C>::word(w[m + 1..].to_vec());
                r.add_scaled(&left.mul(&inner).mul(&right), c);
            }
        }
        Ok(r)
    }
}

/// Which out-of-order pair a reduction step rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
    /// A fixed pseudo-random choice per word, determined by the seed.
    Seeded(u64),
}

impl Strategy {
    fn position(self, w: &[u8]) -> Option<usize> {
        let desc: Vec<usize> = (0..w.len().saturating_sub(1))
            .filter(|&i| w[i] > w[i + 1])
            .collect();
        match self {
            Strategy::Leftmost => desc.first().copied(),
            Strategy::Rightmost => desc.last().copied(),
            Strategy::Seeded(seed) => {
                if desc.is_empty() {
                    return None;
                }
                let mut h = std::collections::hash_map::DefaultHasher::new();
                (seed, w).hash(&mut h);
                Some(desc[(h.finish() % desc.len() as u64) as usize])
            }
        }
    }
}

/// Reduction system derived from a bracket table. Normal forms of single
/// words are cached, so one system should be reused for many reductions.
pub struct RewriteSystem<C: Coef = Rat> {
    pub table: NcTable<C>,
    pub degree_cap: usize,
    pub strategy: Strategy,
    cache: RefCell<HashMap<Word, NCPoly<C>>>,
}

impl<C: Coef> RewriteSystem<C> {
    pub fn new(table: NcTable<C>, degree_cap: usize) -> Self {
        Self::with_strategy(table, degree_cap, Strategy::Leftmost)
    }

    pub fn with_strategy(table: NcTable<C>, degree_cap: usize, strategy: Strategy) -> Self {
        RewriteSystem {
            table,
            degree_cap,
            strategy,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn ngen(&self) -> usize {
        self.table.ngen()
    }

    /// Replacement for the out-of-order pair `x_b x_a`, `b > a`.
    pub fn rule(&self, b: u8, a: u8) -> Result<NCPoly<C>, NcError> {
        debug_assert!(b > a);
        let mut r = NCPoly::word(vec![a, b]);
        r.add_scaled(&self.table.bracket(a, b)?, &C::one().neg());
        Ok(r)
    }

    /// Rules whose replacement contains a word not smaller than the pair in
    /// degree-lexicographic order. Empty means plain rewriting terminates.
    pub fn non_decreasing_rules(&self) -> Vec<(u8, u8, Word)> {
        let mut out = Vec::new();
        let n = self.ngen() as u8;
        for b in 0..n {
            for a in 0..b {
                let Ok(r) = self.rule(b, a) else { continue };
                let lhs = vec![b, a];
                for (w, _) in r.terms() {
                    let bigger = w.len() > 2 || (w.len() == 2 && *w >= lhs);
                    if bigger {
                        out.push((b, a, w.clone()));
                    }
                }
            }
        }
        out
    }

    /// One rewrite step on `w` at the strategy's position.
    fn step(&self, w: &[u8], i: usize) -> Result<NCPoly<C>, NcError> {
        let rule = self.rule(w[i], w[i + 1])?;
        let mut out = NCPoly::zero();
        for (u, c) in rule.terms() {
            let mut nw = w[..i].to_vec();
            nw.extend_from_slice(u);
            nw.extend_from_slice(&w[i + 2..]);
            if nw.len() > self.degree_cap {
                return Err(NcError::DegreeCap(nw));
            }
            out.add_term(nw, c.clone());
        }
        Ok(out)
    }

    pub fn normal_form(&self, p: &NCPoly<C>) -> Result<NCPoly<C>, NcError> {
        let mut r = NCPoly::zero();
        for (w, c) in p.terms() {
            let nf = self.normal_form_word(w)?;
            r.add_scaled(&nf, c);
        }
        Ok(r)
    }

    pub fn normal_form_word(&self, w: &[u8]) -> Result<NCPoly<C>, NcError> {
        if w.len() > self.degree_cap {
            return Err(NcError::DegreeCap(w.to_vec()));
        }
        if self.strategy.position(w).is_none() {
            return Ok(NCPoly::word(w.to_vec()));
        }
        if let Some(p) = self.cache.borrow().get(w) {
            return Ok(p.clone());
        }
        let mut t = Tarjan {
            rs: self,
            index: HashMap::new(),
            low: HashMap::new(),
            stack: Vec::new(),
            on_stack: HashSet::new(),
            counter: 0,
            steps: HashMap::new(),
        };
        t.visit(w.to_vec())?;
        Ok(self.cache.borrow()[w].clone())
    }

    fn resolved(&self, w: &[u8]) -> Option<NCPoly<C>> {
        if self.strategy.position(w).is_none() {
            Some(NCPoly::word(w.to_vec()))
        } else {
            self.cache.borrow().get(w).cloned()
        }
    }
}

struct Tarjan<'a, C: Coef> {
    rs: &'a RewriteSystem<C>,
    index: HashMap<Word, usize>,
    low: HashMap<Word, usize>,
    stack: Vec<Word>,
    on_stack: HashSet<Word>,
    counter: usize,
    steps: HashMap<Word, NCPoly<C>>,
}

impl<C: Coef> Tarjan<'_, C> {
    fn visit(&mut self, v: Word) -> Result<(), NcError> {
        self.index.insert(v.clone(), self.counter);
        self.low.insert(v.clone(), self.counter);
        self.counter += 1;
        self.stack.push(v.clone());
        self.on_stack.insert(v.clone());

        let i = self
            .rs
            .strategy
            .position(&v)
            .expect("visited words are reducible");
        let succ = self.rs.step(&v, i)?;
        for (w, _) in succ.terms() {
            if self.rs.resolved(w).is_some() {
                continue;
            }
            if !self.index.contains_key(w) {
                self.visit(w.clone())?;
                let lw = self.low[w];
                let lv = self.low.get_mut(&v).unwrap();
                *lv = (*lv).min(lw);
            } else if self.on_stack.contains(w) {
                let iw = self.index[w];
                let lv = self.low.get_mut(&v).unwrap();
                *lv = (*lv).min(iw);
            }
        }
        self.steps.insert(v.clone(), succ);

        if self.low[&v] == self.index[&v] {
            let mut block = Vec::new();
            loop {
                let w = self.stack.pop().unwrap();
                self.on_stack.remove(&w);
                let done = w == v;
                block.push(w);
                if done {
                    break;
                }
            }
            self.solve_block(block)?;
        }
        Ok(())
    }

    /// Solves `x_i = sum_j M_ij x_j + b_i` over one strongly connected block.
    fn solve_block(&mut self, block: Vec<Word>) -> Result<(), NcError> {
        let m = block.len();
        let pos: HashMap<&Word, usize> = block.iter().enumerate().map(|(k, w)| (w, k)).collect();
        let mut a: Vec<Vec<C>> = vec![vec![C::zero(); m]; m];
        let mut b: Vec<NCPoly<C>> = vec![NCPoly::zero(); m];
        for (k, w) in block.iter().enumerate() {
            a[k][k] = C::one();
            for (u, c) in self.steps[w].terms() {
                if let Some(&j) = pos.get(u) {
                    a[k][j] = a[k][j].sub(c);
                } else {
                    let nf = self
                        .rs
                        .resolved(u)
                        .expect("successor blocks are solved first");
                    b[k].add_scaled(&nf, c);
                }
            }
        }
        let x = if m == 1 {
            let inv = a[0][0]
                .inv()
                .ok_or_else(|| NcError::SingularFixedPoint(block.clone()))?;
            vec![b[0].scale(&inv)]
        } else {
            gauss_poly(a, b).ok_or_else(|| NcError::SingularFixedPoint(block.clone()))?
        };
        let mut cache = self.rs.cache.borrow_mut();
        for (w, p) in block.into_iter().zip(x) {
            cache.insert(w, p);
        }
        Ok(())
    }
}

/// Gaussian elimination with polynomial right-hand sides.
fn gauss_poly<C: Coef>(mut a: Vec<Vec<C>>, mut b: Vec<NCPoly<C>>) -> Option<Vec<NCPoly<C>>> {
    let m = a.len();
    for col in 0..m {
        let p = (col..m).find(|&r| a[r][col].inv().is_some())?;
        a.swap(col, p);
        b.swap(col, p);
        let inv = a[col][col].inv()?;
        for x in &mut a[col][col..] {
            *x = x.mul(&inv);
        }
        b[col] = b[col].scale(&inv);
        let pivot = a[col].clone();
        for r in 0..m {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for (x, pv) in a[r][col..].iter_mut().zip(&pivot[col..]) {
                *x = x.sub(&pv.mul(&f));
            }
            let pivot_rhs = b[col].clone();
            b[r].add_scaled(&pivot_rhs, &f.neg());
        }
    }
    Some(b)
}

/// One unresolved overlap `x_c x_b x_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapEntry<C: Coef = Rat> {
    pub word: [u8; 3],
    pub left: NCPoly<C>,
    pub right: NCPoly<C>,
    pub difference: NCPoly<C>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapReport<C: Coef = Rat> {
    pub checked: usize,
    pub failures: Vec<OverlapEntry<C>>,
    pub errors: Vec<([u8; 3], NcError)>,
}

impl<C: Coef> OverlapReport<C> {
    pub fn passes(&self) -> bool {
        self.failures.is_empty() && self.errors.is_empty()
    }
}

/// Resolves every overlap `x_c x_b x_a` (`c > b > a`) both ways and compares
/// normal forms. Covers all ambiguities of a system of degree-2 rules.
pub fn diamond_check<C: Coef>(rs: &RewriteSystem<C>) -> OverlapReport<C> {
    let n = rs.ngen() as u8;
    let mut report = OverlapReport {
        checked: 0,
        failures: Vec::new(),
        errors: Vec::new(),
    };
    for c in 0..n {
        for b in 0..c {
            for a in 0..b {
                report.checked += 1;
                let res = (|| -> Result<(NCPoly<C>, NCPoly<C>), NcError> {
                    let left = rs.rule(c, b)?.mul(&NCPoly::gen(a));
                    let right = NCPoly::gen(c).mul(&rs.rule(b, a)?);
                    Ok((rs.normal_form(&left)?, rs.normal_form(&right)?))
                })();
                match res {
                    Ok((left, right)) => {
                        let difference = left.sub(&right);
                        if !difference.is_zero() {
                            report.failures.push(OverlapEntry {
                                word: [c, b, a],
                                left,
                                right,
                                difference,
                            });
                        }
                    }
                    Err(e) => report.errors.push(([c, b, a], e)),
                }
            }
        }
    }
    report
}

/// `[[a,b],c] + [[b,c],a] + [[c,a],b]` expanded by the derivation rule and
/// reduced to normal form.
pub fn formal_jacobi<C: Coef>(
    rs: &RewriteSystem<C>,
    a: u8,
    b: u8,
    c: u8,
) -> Result<NCPoly<C>, NcError> {
    let t = &rs.table;
    let mut sum = t.bracket_poly_gen(&t.bracket(a, b)?, c)?;
    sum = sum.add(&t.bracket_poly_gen(&t.bracket(b, c)?, a)?);
    sum = sum.add(&t.bracket_poly_gen(&t.bracket(c, a)?, b)?);
    rs.normal_form(&sum)
}

/// Left, right and Weyl orderings of a right-hand side given as a
/// commutative polynomial (sorted monomials).
pub fn orderings<C: Coef>(
    commutative: &[(Word, C)],
    degree_cap: usize,
) -> Result<[NCPoly<C>; 3], NcError> {
    let mut left = NCPoly::zero();
    let mut right = NCPoly::zero();
    let mut weyl = NCPoly::zero();
    for (m, c) in commutative {
        let mut asc = m.clone();
        asc.sort_unstable();
        let mut desc = asc.clone();
        desc.reverse();
        left.add_term(asc.clone(), c.clone());
        right.add_term(desc, c.clone());
        let w = weyl_symmetrize(&asc, degree_cap)?;
        weyl.add_scaled(&w.map(|x| C::from_rat(x.clone())), c);
    }
    Ok([left, right, weyl])
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingEntry {
    pub pair: (u8, u8),
    pub left: NCPoly<Rat>,
    pub right: NCPoly<Rat>,
    pub weyl: NCPoly<Rat>,
}

impl OrderingEntry {
    pub fn agrees(&self) -> bool {
        self.left == self.right && self.left == self.weyl
    }
}

/// A commutative right-hand side as (sorted monomial, coefficient) pairs.
pub type CommutativeTerms = Vec<(Word, Rat)>;

/// Normal forms of the three orderings of each given right-hand side.
pub fn ordering_independence_check(
    rs: &RewriteSystem<Rat>,
    rhs: &[((u8, u8), CommutativeTerms)],
) -> Result<Vec<OrderingEntry>, NcError> {
    rhs.iter()
        .map(|(pair, comm)| {
            let [l, r, w] = orderings(comm, rs.degree_cap)?;
            Ok(OrderingEntry {
                pair: *pair,
                left: rs.normal_form(&l)?,
                right: rs.normal_form(&r)?,
                weyl: rs.normal_form(&w)?,
            })
        })
        .collect()
}

/// Rewrite rules of `U(so(3))`: `[e_i, e_j] = eps_ijk e_k`.
pub fn so3_enveloping_table() -> NcTable<Rat> {
    let mut t = NcTable::new(vec!["e1".into(), "e2".into(), "e3".into()]);
    t.set(0, 1, NCPoly::gen(2));
    t.set(1, 2, NCPoly::gen(0));
    t.set(2, 0, NCPoly::gen(1));
    t
}


#[cfg(test)]
mod props {
    use super::{
        evaluate, is_ordered, so3_enveloping_table, weyl_symmetrize, NCPoly, RewriteSystem,
        Strategy as Order,
    };
    use crate::exact::ratio;
    use crate::exact::Rat;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn arb_poly(max_len: usize) -> impl Strategy<Value = NCPoly<Rat>> {
        let term = (
            proptest::collection::vec(0u8..3, 0..=max_len),
            (-5i64..=5, 1i64..=4).prop_map(|(n, d)| ratio(n, d)),
        );
        proptest::collection::vec(term, 0..6).prop_map(|ts| {
            let mut p = NCPoly::zero();
            for (w, c) in ts {
                p.add_term(w, c);
            }
            p
        })
    }

    fn so3() -> RewriteSystem<Rat> {
        RewriteSystem::new(so3_enveloping_table(), 3)
    }

    proptest! {
        #[test]
        fn normal_form_is_idempotent_and_ordered(p in arb_poly(3)) {
            let rs = so3();
            let nf = rs.normal_form(&p).unwrap();
            prop_assert!(nf.terms().all(|(w, _)| is_ordered(w)));
            prop_assert_eq!(rs.normal_form(&nf).unwrap(), nf);
        }

        #[test]
        fn normal_form_is_linear(p in arb_poly(3), q in arb_poly(3), a in -4i64..=4, b in 1i64..=3) {
            let rs = so3();
            let c = ratio(a, b);
            let lhs = rs.normal_form(&p.scale(&c).add(&q)).unwrap();
            let rhs = rs.normal_form(&p).unwrap().scale(&c).add(&rs.normal_form(&q).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn confluent_system_is_strategy_independent(p in arb_poly(3), seed in any::<u64>()) {
            let t = so3_enveloping_table();
            let left = RewriteSystem::with_strategy(t.clone(), 3, Order::Leftmost);
            let right = RewriteSystem::with_strategy(t.clone(), 3, Order::Rightmost);
            let seeded = RewriteSystem::with_strategy(t, 3, Order::Seeded(seed));
            let nf = left.normal_form(&p).unwrap();
            prop_assert_eq!(&right.normal_form(&p).unwrap(), &nf);
            prop_assert_eq!(&seeded.normal_form(&p).unwrap(), &nf);
        }

        #[test]
        fn normal_form_preserves_matrix_value(p in arb_poly(3)) {
            let m = crate::classical::so3_basis();
            let rs = so3();
            prop_assert_eq!(evaluate(&rs.normal_form(&p).unwrap(), &m), evaluate(&p, &m));
        }

        #[test]
        fn weyl_symmetrization_averages_orderings(mut mono in proptest::collection::vec(0u8..4, 0..=3)) {
            mono.sort();
            let w = weyl_symmetrize(&mono, 3).unwrap();
            let total = w.terms().fold(<Rat as Zero>::zero(), |acc, (_, c)| acc + c);
            prop_assert_eq!(total, <Rat as One>::one());
            let first = w.terms().next().map(|(_, c)| c.clone());
            for (word, c) in w.terms() {
                let mut sorted = word.clone();
                sorted.sort();
                prop_assert_eq!(&sorted, &mono);
                prop_assert_eq!(Some(c.clone()), first.clone());
            }
        }

        #[test]
        fn generator_bracket_is_a_derivation(p in arb_poly(1), q in arb_poly(1), z in 0u8..3) {
            let t = so3_enveloping_table();
            let lhs = t.bracket_poly_gen(&p.mul(&q), z).unwrap();
            let rhs = p.mul(&t.bracket_poly_gen(&q, z).unwrap())
                .add(&t.bracket_poly_gen(&p, z).unwrap().mul(&q));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn table_is_antisymmetric(a in 0u8..3, b in 0u8..3) {
            prop_assume!(a != b);
            let t = so3_enveloping_table();
            prop_assert_eq!(t.bracket(a, b).unwrap(), t.bracket(b, a).unwrap().scale(&ratio(-1, 1)));
        }
    }
}
