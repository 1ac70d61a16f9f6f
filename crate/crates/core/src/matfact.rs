//! ℤ/2-graded matrix factorizations over polynomial rings: Koszul and cdga
//! constructions, tensor products, supertraces, Atiyah classes, Chern and
//! Todd–Chern characters, and the unit class of an LG orbifold.
//!
//! Sign conventions: a form-valued endomorphism `α ⊗ φ` (form `α`, graded
//! map `φ`) composes as `(α⊗φ)(β⊗ψ) = (−1)^{|φ||β|} (α∧β)⊗(φψ)`; the volume
//! form is `dx_1∧…∧dx_n` in ring order; the even basis is listed before the
//! odd one.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::exactalg::exterior::wedge_sign;
use crate::exactalg::poly::{Coeff, MultiPoly};
use crate::exactalg::rational::{factorial, Rational};
use crate::exactalg::{AlgebraError, Form, PolyIdeal, QuotientBasis};
use crate::glsm::{GlsmError, GlsmModel};
use crate::orbifold::GroupElement;
use crate::statespace::{sector_space, StateSpaceError, StateVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatFactError {
    #[error("block shapes do not match: {0}")]
    Shape(String),
    #[error("δ² ≠ W·id")]
    NotFactorization,
    #[error("da ≠ W·1: {0}")]
    NotCurved(String),
    #[error("homotopy hypothesis a′ − a = dh fails")]
    HomotopyFails,
    #[error("variable {0} is shared by the factors but the rings differ")]
    VariableClash(String),
    #[error("form is not a dW∧-cocycle")]
    NotCocycle,
    #[error("W has a non-isolated critical locus")]
    NonIsolated,
    #[error("coordinate {coordinate}: R-charge {charge} violates 0 ≤ c_i ≤ d_w = {d_w}")]
    ChargeOutOfRange { coordinate: String, charge: String, d_w: u32 },
    #[error("condition (†) fails for character {0}: the R-fixed locus is unstable")]
    DaggerFails(String),
    #[error("unit class has a component outside the invariant sector basis: {0}")]
    NotInvariant(String),
    #[error("bounds out of range: {0}")]
    Bounds(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Glsm(#[from] GlsmError),
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
}

fn masks_of_parity(rank: usize, parity: u32) -> Vec<u64> {
    let mut v: Vec<u64> = (0..1u64 << rank).filter(|m| m.count_ones() % 2 == parity).collect();
    v.sort_by_key(|m| (m.count_ones(), *m));
    v
}

/// A curved module `(P_even ⊕ P_odd, δ)` with `δ² = W·id`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    vars: Arc<Vec<String>>,
    /// even → odd, `odd_rank × even_rank`
    a: Vec<Vec<MultiPoly>>,
    /// odd → even, `even_rank × odd_rank`
    b: Vec<Vec<MultiPoly>>,
    even_rank: usize,
    odd_rank: usize,
    w: MultiPoly,
    koszul_rank: Option<usize>,
}

impl Factorization {
    pub fn new(
        vars: Arc<Vec<String>>,
        even_rank: usize,
        odd_rank: usize,
        a: Vec<Vec<MultiPoly>>,
        b: Vec<Vec<MultiPoly>>,
        w: MultiPoly,
    ) -> Result<Self, MatFactError> {
        if a.len() != odd_rank || a.iter().any(|r| r.len() != even_rank) {
            return Err(MatFactError::Shape(format!("A must be {odd_rank}×{even_rank}")));
        }
        if b.len() != even_rank || b.iter().any(|r| r.len() != odd_rank) {
            return Err(MatFactError::Shape(format!("B must be {even_rank}×{odd_rank}")));
        }
        let f = Factorization {
            vars,
            a,
            b,
            even_rank,
            odd_rank,
            w,
            koszul_rank: None,
        };
        if !f.check_square() {
            return Err(MatFactError::NotFactorization);
        }
        Ok(f)
    }

    /// Rank `(1|0)` with `W = 0`: the unit for `tensor`.
    pub fn trivial(vars: Arc<Vec<String>>) -> Self {
        Factorization {
            w: MultiPoly::zero(vars.clone()),
            vars,
            a: Vec::new(),
            b: vec![Vec::new()],
            even_rank: 1,
            odd_rank: 0,
            koszul_rank: Some(0),
        }
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn even_rank(&self) -> usize {
        self.even_rank
    }

    pub fn odd_rank(&self) -> usize {
        self.odd_rank
    }

    pub fn rank(&self) -> usize {
        self.even_rank + self.odd_rank
    }

    pub fn block_a(&self) -> &[Vec<MultiPoly>] {
        &self.a
    }

    pub fn block_b(&self) -> &[Vec<MultiPoly>] {
        &self.b
    }

    pub fn potential(&self) -> &MultiPoly {
        &self.w
    }

    pub fn koszul_rank(&self) -> Option<usize> {
        self.koszul_rank
    }

    fn parity(&self, i: usize) -> u32 {
        (i >= self.even_rank) as u32
    }

    /// `δ` as a square matrix on `(even, odd)`.
    pub fn full_matrix(&self) -> Vec<Vec<MultiPoly>> {
        let n = self.rank();
        let e = self.even_rank;
        let mut m = vec![vec![MultiPoly::zero(self.vars.clone()); n]; n];
        for i in 0..self.odd_rank {
            for j in 0..e {
                m[e + i][j] = self.a[i][j].clone();
            }
        }
        for i in 0..e {
            for j in 0..self.odd_rank {
                m[i][e + j] = self.b[i][j].clone();
            }
        }
        m
    }

    fn from_full(vars: Arc<Vec<String>>, even_rank: usize, m: &[Vec<MultiPoly>], w: MultiPoly) -> Result<Self, MatFactError> {
        let n = m.len();
        let odd = n - even_rank;
        for i in 0..n {
            for j in 0..n {
                if (i < even_rank) == (j < even_rank) && !m[i][j].is_zero() {
                    return Err(MatFactError::Shape("δ must be odd".into()));
                }
            }
        }
        let a = (0..odd).map(|i| (0..even_rank).map(|j| m[even_rank + i][j].clone()).collect()).collect();
        let b = (0..even_rank).map(|i| (0..odd).map(|j| m[i][even_rank + j].clone()).collect()).collect();
        Factorization::new(vars, even_rank, odd, a, b, w)
    }

    pub fn check_square(&self) -> bool {
        let m = self.full_matrix();
        let n = m.len();
        (0..n).all(|i| {
            (0..n).all(|k| {
                let mut s = MultiPoly::zero(self.vars.clone());
                for j in 0..n {
                    if !m[i][j].is_zero() && !m[j][k].is_zero() {
                        s = s.add(&m[i][j].mul(&m[j][k]));
                    }
                }
                if i == k {
                    s == self.w
                } else {
                    s.is_zero()
                }
            })
        })
    }

    /// Substitutes `x_i ↦ images[i]` in every entry and in `W`.
    pub fn substitute(&self, images: &[MultiPoly]) -> Result<Self, MatFactError> {
        let vars = images.first().map(|p| p.vars().clone()).unwrap_or_else(|| self.vars.clone());
        let m: Vec<Vec<MultiPoly>> = self
            .full_matrix()
            .iter()
            .map(|r| r.iter().map(|p| p.substitute(images)).collect())
            .collect();
        let mut f = Self::from_full(vars, self.even_rank, &m, self.w.substitute(images))?;
        f.koszul_rank = self.koszul_rank;
        Ok(f)
    }
}

/// Elements of `R[x] ⊗ ∧(e_1,…,e_r)`, `e_i` of cohomological degree −1.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtElement {
    vars: Arc<Vec<String>>,
    rank: usize,
    terms: BTreeMap<u64, MultiPoly>,
}

impl ExtElement {
    pub fn zero(vars: Arc<Vec<String>>, rank: usize) -> Self {
        ExtElement {
            vars,
            rank,
            terms: BTreeMap::new(),
        }
    }

    /// `p · e_I`.
    pub fn monomial(p: MultiPoly, rank: usize, mask: u64) -> Self {
        let mut e = Self::zero(p.vars().clone(), rank);
        e.add_term(mask, p);
        e
    }

    /// `∑ c_i e_i`.
    pub fn linear(coeffs: &[MultiPoly], vars: Arc<Vec<String>>) -> Self {
        let mut e = Self::zero(vars, coeffs.len());
        for (i, c) in coeffs.iter().enumerate() {
            e.add_term(1 << i, c.clone());
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn component(&self, mask: u64) -> MultiPoly {
        self.terms.get(&mask).cloned().unwrap_or_else(|| MultiPoly::zero(self.vars.clone()))
    }

    pub fn terms(&self) -> impl Iterator<Item = (u64, &MultiPoly)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    /// Cohomological degree if homogeneous (`−|I|`).
    pub fn degree(&self) -> Option<i64> {
        let mut d = self.terms.keys().map(|m| -(m.count_ones() as i64));
        let first = d.next()?;
        d.all(|x| x == first).then_some(first)
    }

    pub fn add_term(&mut self, mask: u64, p: MultiPoly) {
        if p.is_zero() {
            return;
        }
        let s = match self.terms.remove(&mask) {
            Some(q) => q.add(&p),
            None => p,
        };
        if !s.is_zero() {
            self.terms.insert(mask, s);
        }
    }

    pub fn add(&self, o: &ExtElement) -> ExtElement {
        let mut out = self.clone();
        for (m, p) in &o.terms {
            out.add_term(*m, p.clone());
        }
        out
    }

    pub fn sub(&self, o: &ExtElement) -> ExtElement {
        self.add(&o.scale(&Coeff::from_i64(-1)))
    }

    pub fn scale(&self, c: &Coeff) -> ExtElement {
        let mut out = Self::zero(self.vars.clone(), self.rank);
        for (m, p) in &self.terms {
            out.add_term(*m, p.scale(c));
        }
        out
    }

    pub fn mul(&self, o: &ExtElement) -> ExtElement {
        let mut out = Self::zero(self.vars.clone(), self.rank);
        for (a, p) in &self.terms {
            for (b, q) in &o.terms {
                let s = wedge_sign(*a, *b);
                if s != 0 {
                    let pq = p.mul(q);
                    out.add_term(a | b, if s > 0 { pq } else { pq.neg() });
                }
            }
        }
        out
    }

    /// `exp(x)` for nilpotent `x` without a scalar part.
    pub fn exp(&self) -> ExtElement {
        let mut out = ExtElement::monomial(MultiPoly::one(self.vars.clone()), self.rank, 0);
        let mut power = out.clone();
        for k in 1..=self.rank {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(&Coeff::from(Rational::new(1.into(), factorial(k as u32)))));
        }
        out
    }
}

/// The semi-free cdga `(R[x] ⊗ ∧(e_1..e_r), d e_i = σ_i)`.
#[derive(Clone, Debug)]
pub struct KoszulCdga {
    vars: Arc<Vec<String>>,
    sigma: Vec<MultiPoly>,
}

impl KoszulCdga {
    pub fn new(vars: Arc<Vec<String>>, sigma: Vec<MultiPoly>) -> Result<Self, MatFactError> {
        if sigma.len() > 20 {
            return Err(MatFactError::Shape("at most 20 exterior generators".into()));
        }
        for s in &sigma {
            s.check_ring(&MultiPoly::zero(vars.clone()))?;
        }
        Ok(KoszulCdga { vars, sigma })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    /// The derivation `d` (contraction with `σ`).
    pub fn d(&self, x: &ExtElement) -> ExtElement {
        let mut out = ExtElement::zero(self.vars.clone(), self.rank());
        for (mask, p) in &x.terms {
            let mut pos = 0;
            for i in 0..self.rank() {
                if mask & (1 << i) == 0 {
                    continue;
                }
                let q = p.mul(&self.sigma[i]);
                out.add_term(mask & !(1 << i), if pos % 2 == 0 { q } else { q.neg() });
                pos += 1;
            }
        }
        out
    }

    fn operator_matrix(&self, op: impl Fn(&ExtElement) -> ExtElement) -> (Vec<u64>, Vec<Vec<MultiPoly>>) {
        let r = self.rank();
        let basis: Vec<u64> = masks_of_parity(r, 0).into_iter().chain(masks_of_parity(r, 1)).collect();
        let idx: BTreeMap<u64, usize> = basis.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let n = basis.len();
        let mut m = vec![vec![MultiPoly::zero(self.vars.clone()); n]; n];
        for (j, mask) in basis.iter().enumerate() {
            let img = op(&ExtElement::monomial(MultiPoly::one(self.vars.clone()), r, *mask));
            for (k, p) in img.terms() {
                m[idx[&k]][j] = p.clone();
            }
        }
        (basis, m)
    }
}

/// The folding of `(𝔸, d + a·)`; requires `da = W·1`.
pub fn cdga_factorization(alg: &KoszulCdga, a: &ExtElement, w: &MultiPoly) -> Result<Factorization, MatFactError> {
    if a.rank() != alg.rank() || !a.is_zero() && a.degree() != Some(-1) {
        return Err(MatFactError::NotCurved("a must have degree −1".into()));
    }
    let da = alg.d(a);
    let expected = ExtElement::monomial(w.clone(), alg.rank(), 0);
    if da != expected {
        return Err(MatFactError::NotCurved(format!("da = {}", da.component(0))));
    }
    let (_, m) = alg.operator_matrix(|x| alg.d(x).add(&a.mul(x)));
    let even = 1usize << alg.rank().saturating_sub(1);
    let even = if alg.rank() == 0 { 1 } else { even };
    let mut f = Factorization::from_full(alg.vars.clone(), even, &m, w.clone())?;
    f.koszul_rank = Some(alg.rank());
    Ok(f)
}

/// Koszul factorization `{τ, σ}`: `∧•R^r` with `δ = ι_σ + τ∧`, `W = ⟨τ, σ⟩`.
pub fn koszul(tau: &[MultiPoly], sigma: &[MultiPoly]) -> Result<Factorization, MatFactError> {
    if tau.len() != sigma.len() {
        return Err(MatFactError::Shape(format!("τ has {} entries, σ has {}", tau.len(), sigma.len())));
    }
    let vars = tau
        .first()
        .or(sigma.first())
        .map(|p| p.vars().clone())
        .ok_or_else(|| MatFactError::Shape("empty Koszul datum needs a ring; use koszul_in".into()))?;
    koszul_in(vars, tau, sigma)
}

pub fn koszul_in(vars: Arc<Vec<String>>, tau: &[MultiPoly], sigma: &[MultiPoly]) -> Result<Factorization, MatFactError> {
    if tau.len() != sigma.len() {
        return Err(MatFactError::Shape(format!("τ has {} entries, σ has {}", tau.len(), sigma.len())));
    }
    let alg = KoszulCdga::new(vars.clone(), sigma.to_vec())?;
    let mut w = MultiPoly::zero(vars.clone());
    for (t, s) in tau.iter().zip(sigma) {
        w = w.add(&t.mul(s));
    }
    cdga_factorization(&alg, &ExtElement::linear(tau, vars), &w)
}

/// The intertwiner `exp(−h)·` between `(𝔸, d_a)` and `(𝔸, d_{a′})`, as a matrix.
pub fn homotopy_iso(
    alg: &KoszulCdga,
    a: &ExtElement,
    a_prime: &ExtElement,
    h: &ExtElement,
) -> Result<Vec<Vec<MultiPoly>>, MatFactError> {
    if !h.is_zero() && h.degree() != Some(-2) {
        return Err(MatFactError::HomotopyFails);
    }
    if a_prime.sub(a) != alg.d(h) {
        return Err(MatFactError::HomotopyFails);
    }
    let e = h.scale(&Coeff::from_i64(-1)).exp();
    let (_, m) = alg.operator_matrix(|x| e.mul(x));
    let (_, da) = alg.operator_matrix(|x| alg.d(x).add(&a.mul(x)));
    let (_, dap) = alg.operator_matrix(|x| alg.d(x).add(&a_prime.mul(x)));
    if poly_matmul(&m, &da) != poly_matmul(&dap, &m) {
        return Err(MatFactError::HomotopyFails);
    }
    Ok(m)
}

pub fn poly_matmul(x: &[Vec<MultiPoly>], y: &[Vec<MultiPoly>]) -> Vec<Vec<MultiPoly>> {
    let vars = x
        .iter()
        .flatten()
        .chain(y.iter().flatten())
        .next()
        .map(|p| p.vars().clone())
        .unwrap_or_default();
    let cols = y.first().map_or(0, Vec::len);
    x.iter()
        .map(|row| {
            (0..cols)
                .map(|k| {
                    let mut s = MultiPoly::zero(vars.clone());
                    for (j, p) in row.iter().enumerate() {
                        if !p.is_zero() && !y[j][k].is_zero() {
                            s = s.add(&p.mul(&y[j][k]));
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// `F₁ ⊗ F₂` with `δ = δ₁⊗1 + ε⊗δ₂`. Identical rings multiply internally;
/// disjoint rings give the external product over the concatenated ring.
pub fn tensor(f1: &Factorization, f2: &Factorization) -> Result<Factorization, MatFactError> {
    let (vars, e1, e2) = if f1.vars == f2.vars {
        (f1.vars.clone(), f1.clone(), f2.clone())
    } else {
        if let Some(v) = f1.vars.iter().find(|v| f2.vars.contains(v)) {
            return Err(MatFactError::VariableClash(v.clone()));
        }
        let vars: Arc<Vec<String>> = Arc::new(f1.vars.iter().chain(f2.vars.iter()).cloned().collect());
        let emb = |f: &Factorization| -> Result<Factorization, MatFactError> {
            let images: Vec<MultiPoly> = f
                .vars
                .iter()
                .map(|v| MultiPoly::var(vars.clone(), vars.iter().position(|x| x == v).unwrap()))
                .collect();
            if images.is_empty() {
                let m: Vec<Vec<MultiPoly>> = f.full_matrix();
                debug_assert!(m.iter().flatten().all(|p| p.is_constant()));
                let lift = |p: &MultiPoly| MultiPoly::constant(vars.clone(), p.constant_term());
                let m: Vec<Vec<MultiPoly>> = m.iter().map(|r| r.iter().map(lift).collect()).collect();
                let mut g = Factorization::from_full(vars.clone(), f.even_rank, &m, lift(&f.w))?;
                g.koszul_rank = f.koszul_rank;
                return Ok(g);
            }
            f.substitute(&images)
        };
        (vars.clone(), emb(f1)?, emb(f2)?)
    };
    let d1 = e1.full_matrix();
    let d2 = e2.full_matrix();
    let (n1, n2) = (e1.rank(), e2.rank());
    // product basis (i, j) ordered by parity, then lexicographically
    let mut basis: Vec<(usize, usize)> = (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect();
    basis.sort_by_key(|&(i, j)| ((e1.parity(i) + e2.parity(j)) % 2, i, j));
    let even = basis.iter().filter(|&&(i, j)| (e1.parity(i) + e2.parity(j)) % 2 == 0).count();
    let n = basis.len();
    let mut m = vec![vec![MultiPoly::zero(vars.clone()); n]; n];
    for (r, &(i, j)) in basis.iter().enumerate() {
        for (c, &(k, l)) in basis.iter().enumerate() {
            let mut s = MultiPoly::zero(vars.clone());
            if j == l {
                s = s.add(&d1[i][k]);
            }
            if i == k {
                let t = &d2[j][l];
                s = s.add(&if e1.parity(i) == 1 { t.neg() } else { t.clone() });
            }
            m[r][c] = s;
        }
    }
    let mut f = Factorization::from_full(vars, even, &m, e1.w.add(&e2.w))?;
    f.koszul_rank = match (e1.koszul_rank, e2.koszul_rank) {
        (Some(a), Some(b)) => Some(a + b),
        _ => None,
    };
    Ok(f)
}

/// Square matrix of differential forms on a graded free module.
#[derive(Clone, Debug, PartialEq)]
pub struct FormEndomorphism {
    vars: Arc<Vec<String>>,
    even_rank: usize,
    entries: Vec<Vec<Form>>,
}

impl FormEndomorphism {
    pub fn new(vars: Arc<Vec<String>>, even_rank: usize, entries: Vec<Vec<Form>>) -> Result<Self, MatFactError> {
        let n = entries.len();
        if even_rank > n || entries.iter().any(|r| r.len() != n) {
            return Err(MatFactError::Shape("form endomorphism must be square".into()));
        }
        Ok(FormEndomorphism { vars, even_rank, entries })
    }

    pub fn zero(vars: Arc<Vec<String>>, even_rank: usize, odd_rank: usize) -> Self {
        let n = even_rank + odd_rank;
        FormEndomorphism {
            entries: vec![vec![Form::zero(vars.clone()); n]; n],
            vars,
            even_rank,
        }
    }

    pub fn identity(vars: Arc<Vec<String>>, even_rank: usize, odd_rank: usize) -> Self {
        let mut z = Self::zero(vars.clone(), even_rank, odd_rank);
        for i in 0..even_rank + odd_rank {
            z.entries[i][i] = Form::one(vars.clone());
        }
        z
    }

    pub fn from_polys(vars: Arc<Vec<String>>, even_rank: usize, m: &[Vec<MultiPoly>]) -> Self {
        FormEndomorphism {
            entries: m.iter().map(|r| r.iter().map(|p| Form::from_poly(p.clone())).collect()).collect(),
            vars,
            even_rank,
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Form {
        &self.entries[i][j]
    }

    fn parity(&self, i: usize) -> u32 {
        (i >= self.even_rank) as u32
    }

    /// Map parity if homogeneous (off-diagonal blocks odd).
    pub fn map_parity(&self) -> Option<u32> {
        let mut p = None;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if !e.is_zero() {
                    let q = (self.parity(i) + self.parity(j)) % 2;
                    if p.is_some_and(|x| x != q) {
                        return None;
                    }
                    p = Some(q);
                }
            }
        }
        Some(p.unwrap_or(0))
    }

    pub fn form_degree(&self) -> u32 {
        self.entries.iter().flatten().flat_map(|f| f.degrees()).max().unwrap_or(0)
    }

    /// Total ℤ/2 degree (map parity + form degree) if homogeneous.
    pub fn total_parity(&self) -> Option<u32> {
        let mut p = None;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                for d in e.degrees() {
                    let q = (self.parity(i) + self.parity(j) + d) % 2;
                    if p.is_some_and(|x| x != q) {
                        return None;
                    }
                    p = Some(q);
                }
            }
        }
        Some(p.unwrap_or(0))
    }

    fn check_shape(&self, o: &FormEndomorphism) -> Result<(), MatFactError> {
        if self.size() != o.size() || self.even_rank != o.even_rank {
            return Err(MatFactError::Shape("graded shapes differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &FormEndomorphism) -> Result<FormEndomorphism, MatFactError> {
        self.check_shape(o)?;
        let mut out = self.clone();
        for i in 0..self.size() {
            for j in 0..self.size() {
                out.entries[i][j] = out.entries[i][j].add(&o.entries[i][j]);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Coeff) -> FormEndomorphism {
        let mut out = self.clone();
        for e in out.entries.iter_mut().flatten() {
            *e = e.scale(c);
        }
        out
    }

    /// Composition with the Koszul sign rule.
    pub fn mul(&self, o: &FormEndomorphism) -> Result<FormEndomorphism, MatFactError> {
        self.check_shape(o)?;
        let n = self.size();
        let mut out = Self::zero(self.vars.clone(), self.even_rank, n - self.even_rank);
        for i in 0..n {
            for j in 0..n {
                let x = &self.entries[i][j];
                if x.is_zero() {
                    continue;
                }
                let (xe, xo) = split_parity(x);
                for k in 0..n {
                    let y = &o.entries[j][k];
                    if y.is_zero() {
                        continue;
                    }
                    // the form part of x passes the map E_jk
                    let mut t = xe.wedge(y);
                    let odd = xo.wedge(y);
                    t = if (self.parity(j) + self.parity(k)) % 2 == 1 { t.sub(&odd) } else { t.add(&odd) };
                    out.entries[i][k] = out.entries[i][k].add(&t);
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<FormEndomorphism, MatFactError> {
        let n = self.size();
        let mut out = Self::identity(self.vars.clone(), self.even_rank, n - self.even_rank);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }
}

fn split_parity(f: &Form) -> (Form, Form) {
    let mut even = Form::zero(f.vars().clone());
    let mut odd = Form::zero(f.vars().clone());
    for (m, p) in f.components() {
        let target = if m.count_ones() % 2 == 0 { &mut even } else { &mut odd };
        target.add_component(m, p.clone());
    }
    (even, odd)
}

/// `tr(even block) − tr(odd block)`.
pub fn supertrace(e: &FormEndomorphism) -> Form {
    let mut s = Form::zero(e.vars.clone());
    for i in 0..e.size() {
        s = if e.parity(i) == 0 { s.add(&e.entries[i][i]) } else { s.sub(&e.entries[i][i]) };
    }
    s
}

/// Atiyah class for the trivial connection: the entrywise exterior derivative `dδ`.
pub fn atiyah(f: &Factorization) -> FormEndomorphism {
    let m = f.full_matrix();
    FormEndomorphism {
        vars: f.vars.clone(),
        even_rank: f.even_rank,
        entries: m.iter().map(|r| r.iter().map(|p| Form::from_poly(p.clone()).d()).collect()).collect(),
    }
}

/// A class in `H(Ω, dW∧) ≅ Jac(W)·dx`, with an overall factor `(2πi)^{−twist}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistedClass {
    pub jac_class: MultiPoly,
    pub twist: Rational,
    pub form: Option<Form>,
}

impl fmt::Display for TwistedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "class (twist {}): {}", crate::exactalg::rational::fmt_rational(&self.twist), self.jac_class)
    }
}

fn jacobian_ideal(w: &MultiPoly) -> Result<PolyIdeal, MatFactError> {
    let ideal = PolyIdeal::new(w.vars().clone(), w.gradient())?;
    if w.nvars() > 0 && ideal.quotient_basis() == QuotientBasis::Infinite {
        return Err(MatFactError::NonIsolated);
    }
    Ok(ideal)
}

/// Checks `dW ∧ form = 0` and reduces the top component in `Jac(W)`.
pub fn twisted_class(form: &Form, w: &MultiPoly) -> Result<TwistedClass, MatFactError> {
    form.top_coefficient().check_ring(w)?;
    let dw = Form::from_poly(w.clone()).d();
    if !dw.wedge(form).is_zero() {
        return Err(MatFactError::NotCocycle);
    }
    let ideal = jacobian_ideal(w)?;
    let n = w.nvars();
    Ok(TwistedClass {
        jac_class: ideal.normal_form(&form.top_coefficient())?,
        twist: Rational::new(n.into(), 2.into()),
        form: Some(form.clone()),
    })
}

/// `∑_{k ≤ n} (1/k!) str((dδ)^k)`; exact since forms of degree > n vanish.
pub fn chern_form(f: &Factorization) -> Result<Form, MatFactError> {
    let at = atiyah(f);
    let n = f.vars.len();
    let mut power = FormEndomorphism::identity(f.vars.clone(), f.even_rank, f.odd_rank);
    let mut ch = supertrace(&power);
    for k in 1..=n as u32 {
        power = power.mul(&at)?;
        let c = Coeff::from(Rational::new(1.into(), factorial(k)));
        ch = ch.add(&supertrace(&power).scale(&c));
    }
    Ok(ch)
}

/// The localized Chern character. For `W = 0` no Jacobian reduction is
/// made: the class is the degree-0 component with twist 0.
pub fn chern_char(f: &Factorization) -> Result<TwistedClass, MatFactError> {
    let ch = chern_form(f)?;
    if ch.degrees().iter().any(|d| d % 2 == 1) || !ch.d().is_zero() {
        return Err(MatFactError::NotCocycle);
    }
    if f.w.is_zero() {
        return Ok(TwistedClass {
            jac_class: ch.component(0),
            twist: Rational::zero(),
            form: Some(ch),
        });
    }
    twisted_class(&ch, &f.w)
}

/// Formal data of the underlying bundle: rank and Chern roots (even forms).
#[derive(Clone, Debug)]
pub struct BundleData {
    pub rank: usize,
    pub chern_roots: Vec<Form>,
}

impl BundleData {
    pub fn trivial(rank: usize) -> Self {
        BundleData {
            rank,
            chern_roots: Vec::new(),
        }
    }
}

/// Bernoulli numbers `B_0..B_n` with `B_1 = −1/2`.
pub fn bernoulli(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        let mut s = Rational::zero();
        let mut binom = Rational::one(); // C(m+1, j)
        for (j, bj) in b.iter().enumerate() {
            s += &binom * bj;
            binom = binom * Rational::from_integer((m + 1 - j).into()) / Rational::from_integer((j + 1).into());
        }
        b.push(-s / Rational::from_integer((m + 1).into()));
    }
    b
}

/// Coefficients of `x/(1 − e^{−x}) = ∑ B_k⁺ x^k / k!` up to `x^n`.
pub fn todd_series(n: usize) -> Vec<Rational> {
    bernoulli(n)
        .into_iter()
        .enumerate()
        .map(|(k, b)| {
            let b = if k == 1 { -b } else { b };
            b / Rational::from_integer(factorial(k as u32))
        })
        .collect()
}

/// `(i/2π)^{rank} td(F) ∧ ch`: multiplies by the Todd form and shifts the twist by the rank.
pub fn todd_chern(f: &Factorization, bundle: &BundleData) -> Result<TwistedClass, MatFactError> {
    let ch = chern_char(f)?;
    let n = f.vars.len();
    let series = todd_series(n);
    let mut td = Form::one(f.vars.clone());
    for x in &bundle.chern_roots {
        let mut factor = Form::zero(f.vars.clone());
        let mut power = Form::one(f.vars.clone());
        for c in &series {
            factor = factor.add(&power.scale(&Coeff::from(c.clone())));
            power = power.wedge(x);
            if power.is_zero() {
                break;
            }
        }
        td = td.wedge(&factor);
    }
    let form = td.wedge(ch.form.as_ref().expect("chern_char keeps its form"));
    let twist = &ch.twist + Rational::from_integer(bundle.rank.into());
    if f.w.is_zero() {
        return Ok(TwistedClass {
            jac_class: form.component(0),
            twist,
            form: Some(form),
        });
    }
    let mut c = twisted_class(&form, &f.w)?;
    c.twist = twist;
    Ok(c)
}

fn truncate(p: &MultiPoly, d: u32) -> MultiPoly {
    MultiPoly::from_terms(
        p.vars().clone(),
        p.terms().filter(|(m, _)| m.degree() <= d).map(|(m, c)| (m.clone(), c.clone())),
    )
}

fn series_exp_neg(x: &MultiPoly, d: u32) -> MultiPoly {
    let mut out = MultiPoly::one(x.vars().clone());
    let mut power = out.clone();
    for k in 1..=d {
        power = truncate(&power.mul(&x.neg()), d);
        out = out.add(&power.scale_rational(&Rational::new(1.into(), factorial(k))));
    }
    out
}

/// Inverse of a power series with unit constant term, truncated at degree `d`.
fn series_inverse(p: &MultiPoly, d: u32) -> MultiPoly {
    // 1/(1 − u) = ∑ u^k, u = 1 − p
    let u = MultiPoly::one(p.vars().clone()).sub(p);
    let mut out = MultiPoly::one(p.vars().clone());
    let mut power = out.clone();
    for _ in 1..=d {
        power = truncate(&power.mul(&u), d);
        out = out.add(&power);
    }
    out
}

/// Compares `∑_p (−1)^p ch(∧^p F^∨)` with `c_r(F)·td(F)^{−1}` in formal
/// Chern roots up to total degree `d`.
pub fn borel_serre_check(r: usize, d: u32) -> Result<bool, MatFactError> {
    if r > 4 || d > 10 {
        return Err(MatFactError::Bounds(format!("need r ≤ 4 and D ≤ 10, got r = {r}, D = {d}")));
    }
    let names: Vec<String> = (1..=r).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let ring = MultiPoly::ring(&refs);
    let exps: Vec<MultiPoly> = (0..r).map(|i| series_exp_neg(&MultiPoly::var(ring.clone(), i), d)).collect();
    // ∑_p (−1)^p e_p(e^{−x_1}, …, e^{−x_r})
    let mut lhs = MultiPoly::zero(ring.clone());
    for subset in 0u32..(1 << r) {
        let mut t = MultiPoly::one(ring.clone());
        for (i, e) in exps.iter().enumerate() {
            if subset & (1 << i) != 0 {
                t = truncate(&t.mul(e), d);
            }
        }
        lhs = if subset.count_ones() % 2 == 0 { lhs.add(&t) } else { lhs.sub(&t) };
    }
    let series = todd_series(d as usize);
    let mut td = MultiPoly::one(ring.clone());
    for i in 0..r {
        let x = MultiPoly::var(ring.clone(), i);
        let mut f = MultiPoly::zero(ring.clone());
        for (k, c) in series.iter().enumerate() {
            f = f.add(&x.pow(k as u32).scale_rational(c));
        }
        td = truncate(&td.mul(&truncate(&f, d)), d);
    }
    let mut cr = MultiPoly::one(ring.clone());
    for i in 0..r {
        cr = cr.mul(&MultiPoly::var(ring.clone(), i));
    }
    let rhs = truncate(&cr.mul(&series_inverse(&td, d)), d);
    Ok(lhs == rhs)
}

/// Every nonzero component of `ch` of a rank-`r` Koszul factorization sits in degree ≥ 2r.
pub fn splitting_degree_check(f: &Factorization) -> Result<bool, MatFactError> {
    let r = f
        .koszul_rank
        .ok_or_else(|| MatFactError::Shape("not a Koszul factorization".into()))?;
    let ch = chern_form(f)?;
    Ok(ch.degrees().iter().all(|&d| d as usize >= 2 * r))
}

/// The unit `𝟙 ∈ 𝓗_J`.
#[derive(Clone, Debug)]
pub struct UnitClass {
    pub sector: GroupElement,
    pub moving_vars: Vec<String>,
    pub class: TwistedClass,
    /// Coefficients on the basis of the sector space of `J`.
    pub coefficients: Vec<Coeff>,
    pub degree: Rational,
}

impl UnitClass {
    pub fn to_state_vector(&self, model: &GlsmModel) -> StateVector {
        StateVector {
            model: model.fingerprint(),
            sector: self.sector.clone(),
            coeffs: self.coefficients.clone(),
        }
    }
}

/// `tdch{s, q∘taut}` on `V_J^m`, expressed in the sector basis of `J`.
pub fn unit_class(model: &GlsmModel, character: &[Rational]) -> Result<UnitClass, MatFactError> {
    let dw = model.d_w_rational();
    for (i, c) in model.r_charges().iter().enumerate() {
        if c < &Rational::zero() || c > &dw {
            return Err(MatFactError::ChargeOutOfRange {
                coordinate: model.variables()[i].clone(),
                charge: crate::exactalg::rational::fmt_rational(c),
                d_w: model.d_w(),
            });
        }
    }
    if model.torus_rank() > 0 && !model.check_dagger(character)?.holds {
        return Err(MatFactError::DaggerFails(
            character.iter().map(crate::exactalg::rational::fmt_rational).collect::<Vec<_>>().join(","),
        ));
    }
    let j = model.j();
    let fixed = j.fixed_support();
    let w_j = model.potential().restrict(&fixed);
    let ring = w_j.vars().clone();
    let moving: Vec<usize> = (0..fixed.len()).filter(|&k| !model.r_charges()[fixed[k]].is_zero()).collect();
    let tau: Vec<MultiPoly> = moving.iter().map(|&k| w_j.derivative(k)).collect();
    let sigma: Vec<MultiPoly> = moving.iter().map(|&k| MultiPoly::var(ring.clone(), k)).collect();
    let f = koszul_in(ring.clone(), &tau, &sigma)?;
    if f.w != w_j {
        return Err(MatFactError::NotCurved("Euler splitting does not reproduce w_J".into()));
    }
    let class = todd_chern(&f, &BundleData::trivial(moving.len()))?;
    let space = sector_space(model, &j)?;
    let mut coefficients = vec![Coeff::zero(); space.dim()];
    if space.narrow() {
        coefficients[0] = class.jac_class.constant_term();
    } else {
        for (m, c) in class.jac_class.terms() {
            let pos = space
                .basis
                .iter()
                .position(|b| b == m)
                .ok_or_else(|| MatFactError::NotInvariant(format!("{:?}", m.exps())))?;
            coefficients[pos] = c.clone();
        }
    }
    Ok(UnitClass {
        sector: j,
        moving_vars: moving.iter().map(|&k| ring[k].clone()).collect(),
        class,
        coefficients,
        degree: space.degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_poly;
    use crate::exactalg::rational::{int, rat};
    use proptest::prelude::*;

    fn ring(names: &[&str]) -> Arc<Vec<String>> {
        MultiPoly::ring(names)
    }

    fn p(s: &str, r: &Arc<Vec<String>>) -> MultiPoly {
        parse_poly(s, r).unwrap()
    }

    #[test]
    fn koszul_basics() {
        let r = ring(&["x", "y"]);
        let f = koszul(&[p("y", &r)], &[p("x", &r)]).unwrap();
        assert_eq!((f.even_rank(), f.odd_rank()), (1, 1));
        assert_eq!(f.potential(), &p("x*y", &r));
        assert_eq!(f.block_a()[0][0], p("y", &r));
        assert_eq!(f.block_b()[0][0], p("x", &r));
        let g = koszul(&[p("x", &r), p("y", &r)], &[p("x", &r), p("y", &r)]).unwrap();
        assert_eq!((g.even_rank(), g.odd_rank()), (2, 2));
        // oracle: multiply the full 4×4 matrix directly
        let m = g.full_matrix();
        let sq = poly_matmul(&m, &m);
        for (i, row) in sq.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                assert_eq!(*e, if i == k { p("x^2+y^2", &r) } else { MultiPoly::zero(r.clone()) });
            }
        }
        let bad = Factorization::new(r.clone(), 1, 1, vec![vec![p("x", &r)]], vec![vec![p("x", &r)]], p("x*y", &r));
        assert_eq!(bad, Err(MatFactError::NotFactorization));
    }

    #[test]
    fn golden_chern_character() {
        let r = ring(&["x", "y"]);
        let f = koszul(&[p("y", &r)], &[p("x", &r)]).unwrap();
        let at = atiyah(&f);
        assert_eq!(at.entry(0, 1), &Form::dx(r.clone(), 0));
        assert_eq!(at.entry(1, 0), &Form::dx(r.clone(), 1));
        let ch = chern_char(&f).unwrap();
        let form = ch.form.clone().unwrap();
        assert_eq!(form, Form::volume(r.clone()).neg());
        assert_eq!(ch.jac_class, MultiPoly::constant(r.clone(), Coeff::from_i64(-1)));
        assert_eq!(ch.twist, int(1));
        assert_eq!(ch.to_string(), "class (twist 1): -1");
        let td = todd_chern(&f, &BundleData::trivial(1)).unwrap();
        assert_eq!(td.jac_class, ch.jac_class);
        assert_eq!(td.twist, int(2));
        assert!(splitting_degree_check(&f).unwrap());
        let triv = Factorization::trivial(r.clone());
        assert_eq!(chern_char(&triv).unwrap().jac_class, MultiPoly::one(r));
    }

    #[test]
    fn supertrace_examples() {
        let r = ring(&["x"]);
        assert!(supertrace(&FormEndomorphism::identity(r.clone(), 1, 1)).is_zero());
        assert_eq!(supertrace(&FormEndomorphism::identity(r.clone(), 2, 1)), Form::one(r.clone()));
        let f = koszul(&[p("x", &r)], &[p("x", &r)]).unwrap();
        let odd = FormEndomorphism::from_polys(r.clone(), 1, &f.full_matrix());
        assert!(supertrace(&odd).is_zero());
    }

    #[test]
    fn tensor_is_koszul() {
        let r = ring(&["x", "y"]);
        let s = ring(&["z", "w"]);
        let f1 = koszul(&[p("y", &r)], &[p("x", &r)]).unwrap();
        let f2 = koszul(&[p("w", &s)], &[p("z", &s)]).unwrap();
        let t = tensor(&f1, &f2).unwrap();
        let all = t.vars().clone();
        let k = koszul(&[p("y", &all), p("w", &all)], &[p("x", &all), p("z", &all)]).unwrap();
        assert_eq!(t.potential(), k.potential());
        // change of basis e_I ⊗ f_J ↦ e_I ∧ f_J (bases listed even-first in both)
        let tb: Vec<u64> = {
            let mut b: Vec<(usize, usize)> = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).collect();
            b.sort_by_key(|&(i, j)| ((i + j) % 2, i, j));
            b.iter().map(|&(i, j)| (i as u64) | ((j as u64) << 1)).collect()
        };
        let kb: Vec<u64> = masks_of_parity(2, 0).into_iter().chain(masks_of_parity(2, 1)).collect();
        let perm: Vec<usize> = tb.iter().map(|m| kb.iter().position(|x| x == m).unwrap()).collect();
        let (mt, mk) = (t.full_matrix(), k.full_matrix());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(mt[i][j], mk[perm[i]][perm[j]]);
            }
        }
        // multiplicativity of ch
        let c = chern_char(&t).unwrap();
        let (c1, c2) = (chern_char(&f1).unwrap(), chern_char(&f2).unwrap());
        let prod = c1.form.unwrap().pullback(&[p("x", &all), p("y", &all)]);
        let prod = prod.wedge(&c2.form.unwrap().pullback(&[p("z", &all), p("w", &all)]));
        assert_eq!(c.form.unwrap(), prod);
        assert_eq!(c.jac_class, MultiPoly::one(all.clone()));
        assert_eq!(c.twist, int(2));
        assert!(splitting_degree_check(&t).unwrap());
        // unit and clash
        let u = tensor(&f1, &Factorization::trivial(r.clone())).unwrap();
        assert_eq!(u.full_matrix(), f1.full_matrix());
        let clash = ring(&["x", "q"]);
        let f3 = koszul(&[p("q", &clash)], &[p("x", &clash)]).unwrap();
        assert_eq!(tensor(&f1, &f3), Err(MatFactError::VariableClash("x".into())));
    }

    #[test]
    fn cdga_and_homotopy() {
        let r = ring(&["x", "y"]);
        let sigma = vec![p("x", &r), p("y", &r)];
        let alg = KoszulCdga::new(r.clone(), sigma.clone()).unwrap();
        let tau = vec![p("x^2", &r), p("y", &r)];
        let a = ExtElement::linear(&tau, r.clone());
        let w = p("x^3+y^2", &r);
        let f = cdga_factorization(&alg, &a, &w).unwrap();
        assert_eq!(f, koszul(&tau, &sigma).unwrap());
        assert!(matches!(cdga_factorization(&alg, &a, &p("x", &r)), Err(MatFactError::NotCurved(_))));
        let zero = KoszulCdga::new(r.clone(), vec![MultiPoly::zero(r.clone())]).unwrap();
        let f0 = cdga_factorization(&zero, &ExtElement::zero(r.clone(), 1), &MultiPoly::zero(r.clone())).unwrap();
        assert!(f0.full_matrix().iter().flatten().all(MultiPoly::is_zero));

        let h = ExtElement::monomial(p("x*y+1", &r), 2, 0b11);
        let a2 = a.add(&alg.d(&h));
        let m = homotopy_iso(&alg, &a, &a2, &h).unwrap();
        assert_eq!(m[0][0], MultiPoly::one(r.clone()));
        let id = homotopy_iso(&alg, &a, &a, &ExtElement::zero(r.clone(), 2)).unwrap();
        assert_eq!(id, poly_matmul(&id, &id));
        assert_eq!(homotopy_iso(&alg, &a, &a, &h), Err(MatFactError::HomotopyFails));
    }

    #[test]
    fn twisted_classes() {
        let r = ring(&["x", "y"]);
        let w = p("x*y", &r);
        assert_eq!(twisted_class(&Form::volume(r.clone()), &w).unwrap().jac_class, MultiPoly::one(r.clone()));
        let eta = Form::monomial(p("x^2+y", &r), 0b01).add(&Form::monomial(p("3", &r), 0b10));
        let exact = Form::from_poly(w.clone()).d().wedge(&eta);
        assert!(twisted_class(&exact, &w).unwrap().jac_class.is_zero());
        assert_eq!(twisted_class(&Form::dx(r.clone(), 0), &w), Err(MatFactError::NotCocycle));
        let q = ring(&["x1", "x2", "x3", "x4", "x5"]);
        let wq = p("x1^5+x2^5+x3^5+x4^5+x5^5", &q);
        let socle = Form::volume(q.clone()).mul_poly(&p("x1^3*x2^3*x3^3*x4^3*x5^3", &q));
        assert!(!twisted_class(&socle, &wq).unwrap().jac_class.is_zero());
        let nonisolated = p("x^2", &r);
        assert_eq!(twisted_class(&Form::volume(r), &nonisolated), Err(MatFactError::NonIsolated));
    }

    #[test]
    fn bernoulli_and_borel_serre() {
        let b = bernoulli(6);
        assert_eq!(b, vec![int(1), rat(-1, 2), rat(1, 6), int(0), rat(-1, 30), int(0), rat(1, 42)]);
        assert_eq!(todd_series(2), vec![int(1), rat(1, 2), rat(1, 12)]);
        assert!(borel_serre_check(1, 4).unwrap());
        assert!(borel_serre_check(2, 6).unwrap());
        assert!(borel_serre_check(3, 6).unwrap());
        assert!(borel_serre_check(5, 2).is_err());
    }

    #[test]
    fn unit_classes() {
        let q = crate::statespace::tests::quintic();
        let u = unit_class(&q, &[]).unwrap();
        assert_eq!(u.sector.to_strings(), vec!["1/5"; 5]);
        assert_eq!(u.coefficients, vec![Coeff::one()]);
        assert_eq!(u.degree, int(0));
        let m = GlsmModel::landau_ginzburg(&["x", "y"], "x*y", &[int(2), int(0)], 2, vec![]).unwrap();
        let u = unit_class(&m, &[]).unwrap();
        assert_eq!(u.class.jac_class, MultiPoly::constant(u.class.jac_class.vars().clone(), Coeff::from_i64(-1)));
        assert_eq!(u.coefficients, vec![Coeff::from_i64(-1)]);
        let bad = GlsmModel::landau_ginzburg(&["x", "y"], "x^2*y", &[int(0), int(4)], 2, vec![]).unwrap();
        match unit_class(&bad, &[]) {
            Err(MatFactError::ChargeOutOfRange { coordinate, .. }) => assert_eq!(coordinate, "y"),
            other => panic!("{other:?}"),
        }
    }

    fn random_endo(vars: &Arc<Vec<String>>, even: usize, odd: usize, parity: u32, deg: u32, seed: &[i64]) -> FormEndomorphism {
        let n = even + odd;
        let nv = vars.len();
        let masks: Vec<u64> = (0..1u64 << nv).filter(|m| m.count_ones() == deg).collect();
        let mut e = FormEndomorphism::zero(vars.clone(), even, odd);
        let mut it = seed.iter().cycle();
        for i in 0..n {
            for j in 0..n {
                if ((i >= even) as u32 + (j >= even) as u32) % 2 != parity {
                    continue;
                }
                for &m in &masks {
                    let c = *it.next().unwrap();
                    let k = (*it.next().unwrap()).rem_euclid(nv as i64) as usize;
                    let poly = MultiPoly::var(vars.clone(), k).scale(&Coeff::from_i64(c)).add(&MultiPoly::constant(vars.clone(), Coeff::from_i64(c - 1)));
                    e.entries[i][j] = e.entries[i][j].add(&Form::monomial(poly, m));
                }
            }
        }
        e
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn supertrace_graded_cyclic(
            p1 in 0u32..2, p2 in 0u32..2, d1 in 0u32..3, d2 in 0u32..3,
            seed in prop::collection::vec(-3i64..4, 8..24),
        ) {
            let vars = ring(&["x", "y", "z"]);
            let e1 = random_endo(&vars, 2, 1, p1, d1, &seed);
            let e2 = random_endo(&vars, 2, 1, p2, d2, &seed[3..]);
            let t1 = (p1 + d1) % 2;
            let t2 = (p2 + d2) % 2;
            let lhs = supertrace(&e1.mul(&e2).unwrap());
            let rhs = supertrace(&e2.mul(&e1).unwrap());
            prop_assert_eq!(lhs, if t1 * t2 == 1 { rhs.neg() } else { rhs });
        }

        #[test]
        fn koszul_squares_and_splits(cs in prop::collection::vec((-2i64..3, 0u32..3), 4)) {
            let r = ring(&["x", "y"]);
            let mk = |c: i64, e: u32, v: usize| MultiPoly::var(r.clone(), v).pow(e).scale(&Coeff::from_i64(c)).add(&MultiPoly::var(r.clone(), 1 - v));
            let tau = vec![mk(cs[0].0, cs[0].1, 0), mk(cs[1].0, cs[1].1, 1)];
            let sigma = vec![mk(cs[2].0, cs[2].1, 1), mk(cs[3].0, cs[3].1, 0)];
            let f = koszul(&tau, &sigma).unwrap();
            prop_assert!(f.check_square());
            prop_assert!(splitting_degree_check(&f).unwrap());
            let ch = chern_form(&f).unwrap();
            prop_assert!(Form::from_poly(f.potential().clone()).d().wedge(&ch).is_zero());
        }
    }
}
