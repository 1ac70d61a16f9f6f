//! Polynomial forms on simplices, cosimplicial modules, the Thom–Sullivan
//! functor (in its Whitney-span representation), integration to the
//! normalized cochain complex, and Godement resolutions of sheaves on finite
//! posets with the Alexandrov topology (opens = up-sets).

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::linalg::Matrix;
use crate::exactalg::poly::{Coeff, MultiPoly};
use crate::exactalg::rational::{factorial, Rational};
use crate::exactalg::Form;
use crate::glsm::Num;
use crate::matfact::Factorization;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimplicialError {
    #[error("map {0:?} is not monotone into [{1}]")]
    NotMonotone(Vec<usize>, usize),
    #[error("expected a form of degree {expected} on Δ^{expected}, found degrees {found:?}")]
    DegreeMismatch { expected: usize, found: Vec<u32> },
    #[error("non-rational coefficient")]
    NonRational,
    #[error("cosimplicial identity fails: {0}")]
    Identity(String),
    #[error("degree bound {degree} is below the level bound {level}")]
    Bounds { degree: usize, level: usize },
    #[error("invalid poset sheaf: {0}")]
    Sheaf(String),
    #[error("Thom–Sullivan element is not compatible under {0:?}")]
    NotCompatible(Vec<usize>),
    #[error("unsupported site: {0}")]
    UnsupportedSite(String),
}

type Mat = Matrix<Rational>;

/// Ring of the reduced coordinates `t_1..t_n` of `Δ^n`.
pub fn simplex_ring(n: usize) -> Arc<Vec<String>> {
    Arc::new((1..=n).map(|i| format!("t{i}")).collect())
}

/// Barycentric coordinate `t_i` of `Δ^n` as a 0-form (`t_0 = 1 − ∑ t_k`).
pub fn barycentric(n: usize, i: usize) -> Form {
    let r = simplex_ring(n);
    if i > 0 {
        return Form::from_poly(MultiPoly::var(r, i - 1));
    }
    let mut p = MultiPoly::one(r.clone());
    for k in 0..n {
        p = p.sub(&MultiPoly::var(r.clone(), k));
    }
    Form::from_poly(p)
}

/// An element of `Ω[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm {
    pub level: usize,
    pub form: Form,
}

impl PolyForm {
    pub fn new(level: usize, form: Form) -> Self {
        assert_eq!(form.vars().len(), level);
        PolyForm { level, form }
    }

    pub fn zero(level: usize) -> Self {
        PolyForm::new(level, Form::zero(simplex_ring(level)))
    }

    pub fn d(&self) -> PolyForm {
        PolyForm::new(self.level, self.form.d())
    }
}

/// A monotone map `[n] → [m]`, given by its values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeltaMap {
    pub target: usize,
    pub values: Vec<usize>,
}

impl DeltaMap {
    pub fn new(values: Vec<usize>, target: usize) -> Result<Self, SimplicialError> {
        if values.is_empty() || values.windows(2).any(|w| w[0] > w[1]) || values.iter().any(|&v| v > target) {
            return Err(SimplicialError::NotMonotone(values, target));
        }
        Ok(DeltaMap { target, values })
    }

    pub fn source(&self) -> usize {
        self.values.len() - 1
    }

    pub fn identity(n: usize) -> Self {
        DeltaMap {
            target: n,
            values: (0..=n).collect(),
        }
    }

    /// `δ^i : [n−1] → [n]`, skipping `i`.
    pub fn coface(n: usize, i: usize) -> Self {
        DeltaMap {
            target: n,
            values: (0..n).map(|k| if k < i { k } else { k + 1 }).collect(),
        }
    }

    /// `σ^i : [n+1] → [n]`, hitting `i` twice.
    pub fn codegeneracy(n: usize, i: usize) -> Self {
        DeltaMap {
            target: n,
            values: (0..=n + 1).map(|k| if k <= i { k } else { k - 1 }).collect(),
        }
    }

    /// All monotone maps `[n] → [m]`.
    pub fn all(n: usize, m: usize) -> Vec<DeltaMap> {
        fn rec(prefix: &mut Vec<usize>, len: usize, m: usize, out: &mut Vec<DeltaMap>) {
            if prefix.len() == len {
                out.push(DeltaMap {
                    target: m,
                    values: prefix.clone(),
                });
                return;
            }
            let lo = prefix.last().copied().unwrap_or(0);
            for v in lo..=m {
                prefix.push(v);
                rec(prefix, len, m, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), n + 1, m, &mut out);
        out
    }
}

/// `Ω(f) : Ω[m] → Ω[n]`, `t_j ↦ ∑_{f(i)=j} t_i`.
pub fn omega_pullback(f: &DeltaMap, w: &PolyForm) -> PolyForm {
    assert_eq!(w.level, f.target);
    let n = f.source();
    let r = simplex_ring(n);
    if f.target == 0 {
        // Ω[0] = k
        return PolyForm::new(n, Form::from_poly(MultiPoly::constant(r, w.form.component(0).constant_term())));
    }
    let images: Vec<MultiPoly> = (1..=f.target)
        .map(|j| {
            let mut p = MultiPoly::zero(r.clone());
            for (i, &v) in f.values.iter().enumerate() {
                if v == j {
                    p = p.add(&barycentric(n, i).component(0));
                }
            }
            p
        })
        .collect();
    if n == 0 {
        let mut out = Form::zero(r);
        for (mask, p) in w.form.components() {
            if mask == 0 {
                out.add_component(0, p.substitute(&images));
            }
        }
        return PolyForm::new(0, out);
    }
    PolyForm::new(n, w.form.pullback(&images))
}

/// `∫_{Δ^n}` of a top-degree form, with `dt_1∧…∧dt_n` positively oriented.
pub fn integrate_simplex(w: &PolyForm) -> Result<Rational, SimplicialError> {
    let n = w.level;
    let degrees = w.form.degrees();
    if degrees.iter().any(|&d| d as usize != n) {
        return Err(SimplicialError::DegreeMismatch { expected: n, found: degrees });
    }
    integrate_top(w)
}

fn integrate_top(w: &PolyForm) -> Result<Rational, SimplicialError> {
    let n = w.level;
    let mut s = Rational::zero();
    for (m, c) in w.form.top_coefficient().terms() {
        let c = c.to_rational().ok_or(SimplicialError::NonRational)?;
        let num: num_bigint::BigInt = m.exps().iter().map(|&a| factorial(a)).product();
        s += c * Rational::new(num, factorial(n as u32 + m.degree()));
    }
    Ok(s)
}

/// Whitney form `ω_I = p!·∑_j (−1)^j t_{i_j} dt_{i_0}∧…ĵ…∧dt_{i_p}` on `Δ^n`.
pub fn whitney_form(indices: &[usize], n: usize) -> PolyForm {
    assert!(indices.windows(2).all(|w| w[0] < w[1]) && indices.iter().all(|&i| i <= n));
    let p = indices.len().saturating_sub(1);
    let mut out = Form::zero(simplex_ring(n));
    for j in 0..indices.len() {
        let mut term = barycentric(n, indices[j]);
        for (k, &i) in indices.iter().enumerate() {
            if k != j {
                term = term.wedge(&barycentric(n, i).d());
            }
        }
        out = if j % 2 == 0 { out.add(&term) } else { out.sub(&term) };
    }
    PolyForm::new(n, out.scale(&Coeff::from(Rational::from_integer(factorial(p as u32)))))
}

/// `∫_{Δ^n} dω` and `∑_i (−1)^i ∫_{Δ^{n−1}} (δ^i)^*ω` for an `(n−1)`-form.
pub fn stokes_sides(w: &PolyForm) -> Result<(Rational, Rational), SimplicialError> {
    let n = w.level;
    let lhs = integrate_simplex(&w.d())?;
    let mut rhs = Rational::zero();
    for i in 0..=n {
        let face = omega_pullback(&DeltaMap::coface(n, i), w);
        let v = integrate_simplex(&face)?;
        rhs += if i % 2 == 0 { v } else { -v };
    }
    Ok((lhs, rhs))
}

/// Cosimplicial vector spaces `A[0..N]` with cofaces and codegeneracies.
#[derive(Clone, Debug)]
pub struct CosimplicialModule {
    dims: Vec<usize>,
    /// `cofaces[n][i] : A[n−1] → A[n]`
    cofaces: Vec<Vec<Mat>>,
    /// `codegens[n][i] : A[n+1] → A[n]`
    codegens: Vec<Vec<Mat>>,
    /// structure constants `e_a e_b = ∑_c mult[n][a][b][c] e_c`, when an algebra
    mult: Option<Vec<Vec<Vec<Vec<Rational>>>>>,
}

impl CosimplicialModule {
    pub fn new(dims: Vec<usize>, cofaces: Vec<Vec<Mat>>, codegens: Vec<Vec<Mat>>) -> Result<Self, SimplicialError> {
        let a = CosimplicialModule {
            dims,
            cofaces,
            codegens,
            mult: None,
        };
        a.check_identities()?;
        Ok(a)
    }

    /// `V` in every level, all structure maps the identity.
    pub fn constant(dim: usize, levels: usize) -> Self {
        let id = Mat::identity(dim);
        CosimplicialModule {
            dims: vec![dim; levels + 1],
            cofaces: (0..=levels).map(|n| if n == 0 { Vec::new() } else { vec![id.clone(); n + 1] }).collect(),
            codegens: (0..levels).map(|n| vec![id.clone(); n + 1]).collect(),
            mult: None,
        }
    }

    /// Attaches levelwise multiplication; cofaces and codegeneracies must be algebra maps.
    pub fn with_algebra(mut self, mult: Vec<Vec<Vec<Vec<Rational>>>>) -> Result<Self, SimplicialError> {
        if mult.len() != self.dims.len() {
            return Err(SimplicialError::Identity("one multiplication table per level".into()));
        }
        self.mult = Some(mult);
        for n in 0..self.dims.len() {
            for (i, f) in self.cofaces[n].iter().enumerate() {
                self.check_multiplicative(f, n - 1, n, &format!("d^{i} into level {n}"))?;
            }
            if n + 1 < self.dims.len() {
                for (i, s) in self.codegens[n].iter().enumerate() {
                    self.check_multiplicative(s, n + 1, n, &format!("s^{i} into level {n}"))?;
                }
            }
        }
        Ok(self)
    }

    fn check_multiplicative(&self, f: &Mat, from: usize, to: usize, what: &str) -> Result<(), SimplicialError> {
        for a in 0..self.dims[from] {
            for b in 0..self.dims[from] {
                let ea = unit_vector(self.dims[from], a);
                let eb = unit_vector(self.dims[from], b);
                let lhs = f.mul_vec(&self.multiply(from, &ea, &eb));
                let rhs = self.multiply(to, &f.mul_vec(&ea), &f.mul_vec(&eb));
                if lhs != rhs {
                    return Err(SimplicialError::Identity(format!("{what} is not multiplicative")));
                }
            }
        }
        Ok(())
    }

    pub fn is_algebra(&self) -> bool {
        self.mult.is_some()
    }

    pub fn multiply(&self, level: usize, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let m = &self.mult.as_ref().expect("cosimplicial algebra")[level];
        let d = self.dims[level];
        let mut out = vec![Rational::zero(); d];
        for a in 0..d {
            if x[a].is_zero() {
                continue;
            }
            for b in 0..d {
                if y[b].is_zero() {
                    continue;
                }
                for (c, s) in m[a][b].iter().enumerate() {
                    if !s.is_zero() {
                        out[c] += &x[a] * &y[b] * s;
                    }
                }
            }
        }
        out
    }

    pub fn levels(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn coface(&self, n: usize, i: usize) -> &Mat {
        &self.cofaces[n][i]
    }

    pub fn codegeneracy(&self, n: usize, i: usize) -> &Mat {
        &self.codegens[n][i]
    }

    fn check_identities(&self) -> Result<(), SimplicialError> {
        let top = self.levels();
        let fail = |s: String| Err(SimplicialError::Identity(s));
        for n in 1..=top {
            if self.cofaces[n].len() != n + 1 {
                return fail(format!("level {n} needs {} cofaces", n + 1));
            }
            for (i, m) in self.cofaces[n].iter().enumerate() {
                if (m.rows(), m.cols()) != (self.dims[n], self.dims[n - 1]) {
                    return fail(format!("d^{i} into level {n} has the wrong shape"));
                }
            }
        }
        for n in 0..top {
            if self.codegens[n].len() != n + 1 {
                return fail(format!("level {n} needs {} codegeneracies", n + 1));
            }
            for (i, m) in self.codegens[n].iter().enumerate() {
                if (m.rows(), m.cols()) != (self.dims[n], self.dims[n + 1]) {
                    return fail(format!("s^{i} into level {n} has the wrong shape"));
                }
            }
        }
        // d^j d^i = d^i d^{j−1} (i < j), maps A[n−2] → A[n]
        for n in 2..=top {
            for j in 0..=n {
                for i in 0..j {
                    let l = self.cofaces[n][j].mul(&self.cofaces[n - 1][i]);
                    let r = self.cofaces[n][i].mul(&self.cofaces[n - 1][j - 1]);
                    if l != r {
                        return fail(format!("d^{j}d^{i} ≠ d^{i}d^{} at level {n}", j - 1));
                    }
                }
            }
        }
        // s^j s^i = s^i s^{j+1} (i ≤ j), maps A[n+2] → A[n]
        for n in 0..top.saturating_sub(1) {
            for j in 0..=n {
                for i in 0..=j {
                    let l = self.codegens[n][j].mul(&self.codegens[n + 1][i]);
                    let r = self.codegens[n][i].mul(&self.codegens[n + 1][j + 1]);
                    if l != r {
                        return fail(format!("s^{j}s^{i} ≠ s^{i}s^{} at level {n}", j + 1));
                    }
                }
            }
        }
        // s^j d^i : A[n] → A[n+1] → A[n]
        for n in 1..top {
            for j in 0..=n {
                for i in 0..=n + 1 {
                    let l = self.codegens[n][j].mul(&self.cofaces[n + 1][i]);
                    let r = if i < j {
                        self.cofaces[n][i].mul(&self.codegens[n - 1][j - 1])
                    } else if i == j || i == j + 1 {
                        Mat::identity(self.dims[n])
                    } else {
                        self.cofaces[n][i - 1].mul(&self.codegens[n - 1][j])
                    };
                    if l != r {
                        return fail(format!("s^{j}d^{i} relation fails at level {n}"));
                    }
                }
            }
        }
        if top >= 1 {
            for i in 0..2 {
                if self.codegens[0][0].mul(&self.cofaces[1][i]) != Mat::identity(self.dims[0]) {
                    return fail("s^0 d^i ≠ id at level 0".into());
                }
            }
        }
        Ok(())
    }

    /// `A(f) : A[n] → A[m]`, via the epi–mono factorization of `f`.
    pub fn apply(&self, f: &DeltaMap) -> Mat {
        let n = f.source();
        if let Some(j) = f.values.windows(2).position(|w| w[0] == w[1]) {
            // f = g ∘ σ^j
            let g = DeltaMap {
                target: f.target,
                values: f.values.iter().enumerate().filter(|&(k, _)| k != j + 1).map(|(_, v)| *v).collect(),
            };
            return self.apply(&g).mul(&self.codegens[n - 1][j]);
        }
        if n == f.target {
            return Mat::identity(self.dims[n]);
        }
        // injective: f = δ^k ∘ g with k the first value missed
        let k = (0..=f.target).find(|v| !f.values.contains(v)).unwrap();
        let g = DeltaMap {
            target: f.target - 1,
            values: f.values.iter().map(|&v| if v < k { v } else { v - 1 }).collect(),
        };
        self.cofaces[f.target][k].mul(&self.apply(&g))
    }
}

fn unit_vector(n: usize, i: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[i] = Rational::one();
    v
}

fn from_columns(rows: usize, cols: &[Vec<Rational>]) -> Mat {
    Mat::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
}

/// `N^d = ∩_i ker s^i ⊂ A[d]` with `δ = ∑ (−1)^i d^i`.
#[derive(Clone, Debug)]
pub struct NormalizedComplex {
    /// basis vectors of `N^d` in `A[d]`
    pub bases: Vec<Vec<Vec<Rational>>>,
    /// `δ : N^d → N^{d+1}` in those bases, `d < N`
    pub differentials: Vec<Mat>,
    /// `δ : A[d] → A[d+1]`
    pub full_differentials: Vec<Mat>,
}

impl NormalizedComplex {
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    /// `H^p` for `p < N` (the top level has no outgoing differential).
    pub fn cohomology(&self) -> Vec<usize> {
        let ranks: Vec<usize> = self.differentials.iter().map(Mat::rank).collect();
        (0..self.differentials.len())
            .map(|p| self.bases[p].len() - ranks[p] - if p > 0 { ranks[p - 1] } else { 0 })
            .collect()
    }

    pub fn coordinates(&self, d: usize, v: &[Rational]) -> Option<Vec<Rational>> {
        from_columns(v.len(), &self.bases[d]).solve(v)
    }
}

pub fn normalized_complex(a: &CosimplicialModule) -> NormalizedComplex {
    let top = a.levels();
    let mut bases = Vec::new();
    for d in 0..=top {
        if d == 0 {
            bases.push((0..a.dims[0]).map(|i| unit_vector(a.dims[0], i)).collect());
            continue;
        }
        let stacked: Vec<Vec<Rational>> = a.codegens[d - 1].iter().flat_map(|s| s.to_rows()).collect();
        let m = Mat::from_fn(stacked.len(), a.dims[d], |i, j| stacked[i][j].clone());
        bases.push(m.kernel());
    }
    let mut full = Vec::new();
    for d in 0..top {
        let mut delta = Mat::zeros(a.dims[d + 1], a.dims[d]);
        for (i, f) in a.cofaces[d + 1].iter().enumerate() {
            delta = if i % 2 == 0 { add(&delta, f) } else { delta.sub(f) };
        }
        full.push(delta);
    }
    let mut differentials = Vec::new();
    let probe = NormalizedComplex {
        bases: bases.clone(),
        differentials: Vec::new(),
        full_differentials: full.clone(),
    };
    for d in 0..top {
        let cols: Vec<Vec<Rational>> = bases[d]
            .iter()
            .map(|v| {
                probe
                    .coordinates(d + 1, &full[d].mul_vec(v))
                    .expect("δ preserves the normalized subcomplex")
            })
            .collect();
        differentials.push(from_columns(bases[d + 1].len(), &cols));
    }
    NormalizedComplex {
        bases,
        differentials,
        full_differentials: full,
    }
}

fn add(a: &Mat, b: &Mat) -> Mat {
    Mat::from_fn(a.rows(), a.cols(), |i, j| &a[(i, j)] + &b[(i, j)])
}

/// A truncated Thom–Sullivan element: `c_n = ∑_k e_k ⊗ forms[n][k] ∈ A[n] ⊗ Ω[n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThElement {
    pub degree: usize,
    pub components: Vec<Vec<Form>>,
}

impl ThElement {
    pub fn zero(a: &CosimplicialModule, degree: usize) -> Self {
        ThElement {
            degree,
            components: a.dims.iter().enumerate().map(|(n, &d)| vec![Form::zero(simplex_ring(n)); d]).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().flatten().all(Form::is_zero)
    }

    pub fn add(&self, o: &ThElement) -> ThElement {
        ThElement {
            degree: self.degree,
            components: self
                .components
                .iter()
                .zip(&o.components)
                .map(|(x, y)| x.iter().zip(y).map(|(a, b)| a.add(b)).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> ThElement {
        let c = Coeff::from(c.clone());
        ThElement {
            degree: self.degree,
            components: self.components.iter().map(|x| x.iter().map(|f| f.scale(&c)).collect()).collect(),
        }
    }

    /// Levelwise de Rham differential.
    pub fn d(&self) -> ThElement {
        ThElement {
            degree: self.degree + 1,
            components: self.components.iter().map(|x| x.iter().map(Form::d).collect()).collect(),
        }
    }

    /// Highest polynomial degree among the coefficients.
    pub fn polynomial_degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .flat_map(|f| f.components().filter_map(|(_, p)| p.total_degree()).collect::<Vec<_>>())
            .max()
            .unwrap_or(0)
    }

    /// The compatibility condition for all `f : [n] → [m]`, `n, m ≤ N`.
    pub fn check_compatible(&self, a: &CosimplicialModule) -> Result<(), SimplicialError> {
        let top = a.levels();
        for n in 0..=top {
            for m in 0..=top {
                for f in DeltaMap::all(n, m) {
                    let af = a.apply(&f);
                    // (A(f) ⊗ 1)(c_n)
                    let lhs: Vec<Form> = (0..a.dims[m])
                        .map(|k| {
                            let mut s = Form::zero(simplex_ring(n));
                            for (j, form) in self.components[n].iter().enumerate() {
                                if !af[(k, j)].is_zero() && !form.is_zero() {
                                    s = s.add(&form.scale(&Coeff::from(af[(k, j)].clone())));
                                }
                            }
                            s
                        })
                        .collect();
                    // (1 ⊗ Ω(f))(c_m)
                    let rhs: Vec<Form> = self.components[m]
                        .iter()
                        .map(|form| omega_pullback(&f, &PolyForm::new(m, form.clone())).form)
                        .collect();
                    if lhs != rhs {
                        return Err(SimplicialError::NotCompatible(f.values));
                    }
                }
            }
        }
        Ok(())
    }

    /// `∫ : Th → N`, integrating the level-`p` component over `Δ^p`.
    pub fn integrate(&self) -> Result<Vec<Rational>, SimplicialError> {
        let p = self.degree;
        self.components[p]
            .iter()
            .map(|f| integrate_top(&PolyForm::new(p, f.homogeneous_part(p as u32))))
            .collect()
    }

    /// Levelwise product in a cosimplicial algebra (`A` sits in degree 0).
    pub fn mul(&self, o: &ThElement, a: &CosimplicialModule) -> ThElement {
        let mut out = ThElement::zero(a, self.degree + o.degree);
        let mult = a.mult.as_ref().expect("cosimplicial algebra");
        for n in 0..=a.levels() {
            for (i, x) in self.components[n].iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in o.components[n].iter().enumerate() {
                    if y.is_zero() {
                        continue;
                    }
                    let xy = x.wedge(y);
                    for (k, c) in mult[n][i][j].iter().enumerate() {
                        if !c.is_zero() {
                            out.components[n][k] = out.components[n][k].add(&xy.scale(&Coeff::from(c.clone())));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Whitney extension `E(c)_n = ∑_{|I| = p+1} A(ι_I)(c) ⊗ ω_I` of `c ∈ N^p`.
pub fn whitney_extension(a: &CosimplicialModule, p: usize, c: &[Rational]) -> ThElement {
    let mut out = ThElement::zero(a, p);
    for n in p..=a.levels() {
        for subset in 0u64..(1 << (n + 1)) {
            if subset.count_ones() as usize != p + 1 {
                continue;
            }
            let idx: Vec<usize> = (0..=n).filter(|i| subset & (1 << i) != 0).collect();
            let v = a.apply(&DeltaMap {
                target: n,
                values: idx.clone(),
            })
            .mul_vec(c);
            let w = whitney_form(&idx, n).form;
            for (k, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    out.components[n][k] = out.components[n][k].add(&w.scale(&Coeff::from(x.clone())));
                }
            }
        }
    }
    out
}

/// The Whitney-span model of `Th•(A)` truncated at level `N` and polynomial degree `D`.
#[derive(Clone, Debug)]
pub struct ThComplex {
    pub level_bound: usize,
    pub degree_bound: usize,
    pub normalized: NormalizedComplex,
    /// `basis[p][k] = E(k-th basis vector of N^p)`
    pub basis: Vec<Vec<ThElement>>,
}

impl ThComplex {
    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(Vec::len).collect()
    }

    /// Cohomology of the span (equal to that of `N` by construction, checked).
    pub fn cohomology(&self) -> Vec<usize> {
        self.normalized.cohomology()
    }

    /// The unit `1_T` of a cosimplicial algebra, if `A[0]` has a unit vector `u`.
    pub fn unit(&self, a: &CosimplicialModule, u: &[Rational]) -> ThElement {
        whitney_extension(a, 0, u)
    }
}

/// Builds the Whitney span and verifies compatibility, `d∘E = E∘δ` and `∫∘E = id`.
pub fn th_complex(a: &CosimplicialModule, degree_bound: usize) -> Result<ThComplex, SimplicialError> {
    let top = a.levels();
    if degree_bound < top {
        return Err(SimplicialError::Bounds {
            degree: degree_bound,
            level: top,
        });
    }
    let nc = normalized_complex(a);
    let mut basis = Vec::new();
    for p in 0..=top {
        let mut level = Vec::new();
        for c in &nc.bases[p] {
            let e = whitney_extension(a, p, c);
            e.check_compatible(a)?;
            if e.integrate()? != *c {
                return Err(SimplicialError::Identity("∫∘E ≠ id".into()));
            }
            if e.polynomial_degree() as usize > degree_bound {
                return Err(SimplicialError::Bounds {
                    degree: degree_bound,
                    level: top,
                });
            }
            if p < top {
                let de = e.d();
                let ed = whitney_extension(a, p + 1, &nc.full_differentials[p].mul_vec(c));
                if de != ed {
                    return Err(SimplicialError::Identity("d∘E ≠ E∘δ".into()));
                }
            }
            level.push(e);
        }
        basis.push(level);
    }
    Ok(ThComplex {
        level_bound: top,
        degree_bound,
        normalized: nc,
        basis,
    })
}

/// Result of comparing `∫ ∘ Th(ι)` with `N(ι)` for `ι : V → A` from a constant module.
#[derive(Clone, Debug, Serialize)]
pub struct TriangleReport {
    pub level_bound: usize,
    pub level_dims: Vec<usize>,
    pub normalized_dims: Vec<usize>,
    pub cohomology: Vec<usize>,
    pub source_dim: usize,
    pub th_iota_compatible: bool,
    pub triangle_commutes: bool,
    pub quasi_isomorphism: bool,
}

impl TriangleReport {
    pub fn passed(&self) -> bool {
        self.th_iota_compatible && self.triangle_commutes && self.quasi_isomorphism
    }
}

/// `iota[n] : V → A[n]` must be a cosimplicial map from the constant module.
pub fn de_rham_triangle_check(a: &CosimplicialModule, iota: &[Mat]) -> Result<TriangleReport, SimplicialError> {
    let top = a.levels();
    let v = iota[0].cols();
    for n in 1..=top {
        for i in 0..=n {
            if a.cofaces[n][i].mul(&iota[n - 1]) != iota[n] {
                return Err(SimplicialError::Identity(format!("ι does not commute with d^{i} at level {n}")));
            }
        }
    }
    let nc = normalized_complex(a);
    let mut compatible = true;
    let mut commutes = true;
    for k in 0..v {
        // Th(ι)(e_k) = (ι_n(e_k) ⊗ 1)_n
        let mut x = ThElement::zero(a, 0);
        for n in 0..=top {
            let col = iota[n].mul_vec(&unit_vector(v, k));
            for (j, c) in col.iter().enumerate() {
                x.components[n][j] = Form::from_poly(MultiPoly::constant(simplex_ring(n), Coeff::from(c.clone())));
            }
        }
        compatible &= x.check_compatible(a).is_ok();
        commutes &= x.integrate()? == iota[0].mul_vec(&unit_vector(v, k));
    }
    let h = nc.cohomology();
    // N(ι): V → N^0 = A[0] lands in ker δ and is an isomorphism onto H^0; H^{p>0} = 0
    let injective = iota[0].rank() == v;
    let closed = top == 0 || nc.full_differentials[0].mul(&iota[0]).is_zero();
    let h0 = h.first().copied().unwrap_or(a.dims[0]);
    let quasi = injective && closed && h0 == v && h.iter().skip(1).all(|&x| x == 0);
    Ok(TriangleReport {
        level_bound: top,
        level_dims: a.dims.clone(),
        normalized_dims: nc.dims(),
        cohomology: h,
        source_dim: v,
        th_iota_compatible: compatible,
        triangle_commutes: commutes,
        quasi_isomorphism: quasi,
    })
}

/// A sheaf of finite-dimensional vector spaces on a finite poset: stalks
/// `F_x = F(↑x)` and restrictions `ρ_{xy} : F_x → F_y` for `x ≤ y`.
#[derive(Clone, Debug)]
pub struct FinitePosetSheaf {
    points: Vec<String>,
    leq: Vec<Vec<bool>>,
    stalks: Vec<usize>,
    restrictions: HashMap<(usize, usize), Mat>,
    /// structure constants per stalk when a sheaf of algebras
    algebra: Option<Vec<Vec<Vec<Vec<Rational>>>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct RestrictionSpec {
    pub from: String,
    pub to: String,
    pub matrix: Vec<Vec<Num>>,
}

/// JSON schema for poset sheaves.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct PosetSheafConfig {
    pub points: Vec<String>,
    /// generating relations `[x, y]` meaning `x ≤ y`
    pub order_pairs: Vec<(String, String)>,
    pub stalk_dims: BTreeMap<String, usize>,
    #[serde(default)]
    pub restriction_matrices: Vec<RestrictionSpec>,
}

impl FinitePosetSheaf {
    /// `restrictions` must cover the generating pairs; the rest is composed.
    pub fn new(
        points: Vec<String>,
        order_pairs: &[(usize, usize)],
        stalks: Vec<usize>,
        generating: HashMap<(usize, usize), Mat>,
    ) -> Result<Self, SimplicialError> {
        let n = points.len();
        if n > 16 || stalks.len() != n {
            return Err(SimplicialError::Sheaf("need ≤ 16 points and one stalk per point".into()));
        }
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(x, y) in order_pairs {
            leq[x][y] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i][k] && leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i][j] && leq[j][i] {
                    return Err(SimplicialError::Sheaf(format!("{} and {} form a cycle", points[i], points[j])));
                }
            }
        }
        let mut restrictions: HashMap<(usize, usize), Mat> = HashMap::new();
        for i in 0..n {
            restrictions.insert((i, i), Mat::identity(stalks[i]));
        }
        for &(x, y) in order_pairs {
            let m = generating.get(&(x, y)).cloned().unwrap_or_else(|| {
                if stalks[x] == stalks[y] {
                    Mat::identity(stalks[x])
                } else {
                    Mat::zeros(stalks[y], stalks[x])
                }
            });
            if (m.rows(), m.cols()) != (stalks[y], stalks[x]) {
                return Err(SimplicialError::Sheaf(format!("restriction {}→{} has the wrong shape", points[x], points[y])));
            }
            restrictions.insert((x, y), m);
        }
        // compose along the order until every comparable pair has a map
        loop {
            let mut added = false;
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        if restrictions.contains_key(&(x, y))
                            && restrictions.contains_key(&(y, z))
                            && !restrictions.contains_key(&(x, z))
                        {
                            let m = restrictions[&(y, z)].mul(&restrictions[&(x, y)]);
                            restrictions.insert((x, z), m);
                            added = true;
                        }
                    }
                }
            }
            if !added {
                break;
            }
        }
        let f = FinitePosetSheaf {
            points,
            leq,
            stalks,
            restrictions,
            algebra: None,
        };
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if f.leq[x][y] && f.leq[y][z] && f.restrictions[&(y, z)].mul(&f.restrictions[&(x, y)]) != f.restrictions[&(x, z)] {
                        return Err(SimplicialError::Sheaf(format!(
                            "restrictions are not functorial on {} ≤ {} ≤ {}",
                            f.points[x], f.points[y], f.points[z]
                        )));
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn from_config(cfg: &PosetSheafConfig) -> Result<Self, SimplicialError> {
        let index = |name: &str| {
            cfg.points
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| SimplicialError::Sheaf(format!("unknown point {name:?}")))
        };
        let pairs: Vec<(usize, usize)> = cfg
            .order_pairs
            .iter()
            .map(|(a, b)| Ok((index(a)?, index(b)?)))
            .collect::<Result<_, SimplicialError>>()?;
        let stalks: Vec<usize> = cfg
            .points
            .iter()
            .map(|p| cfg.stalk_dims.get(p).copied().ok_or_else(|| SimplicialError::Sheaf(format!("no stalk for {p:?}"))))
            .collect::<Result<_, _>>()?;
        let mut gen = HashMap::new();
        for r in &cfg.restriction_matrices {
            let rows: Vec<Vec<Rational>> = r
                .matrix
                .iter()
                .map(|row| row.iter().map(|x| x.to_rational().map_err(|e| SimplicialError::Sheaf(e.to_string()))).collect())
                .collect::<Result<_, _>>()?;
            let (x, y) = (index(&r.from)?, index(&r.to)?);
            let m = Mat::from_fn(stalks[y], stalks[x], |i, j| rows.get(i).and_then(|r| r.get(j)).cloned().unwrap_or_default());
            if rows.len() != stalks[y] || rows.iter().any(|r| r.len() != stalks[x]) {
                return Err(SimplicialError::Sheaf(format!("restriction {}→{} has the wrong shape", r.from, r.to)));
            }
            gen.insert((x, y), m);
        }
        Self::new(cfg.points.clone(), &pairs, stalks, gen)
    }

    pub fn from_json(text: &str) -> Result<Self, SimplicialError> {
        let cfg: PosetSheafConfig = serde_json::from_str(text).map_err(|e| SimplicialError::Sheaf(e.to_string()))?;
        Self::from_config(&cfg)
    }

    /// Attaches stalkwise algebra structures (restrictions must be algebra maps).
    pub fn with_algebra(mut self, mult: Vec<Vec<Vec<Vec<Rational>>>>) -> Result<Self, SimplicialError> {
        if mult.len() != self.points.len() {
            return Err(SimplicialError::Sheaf("one multiplication table per stalk".into()));
        }
        self.algebra = Some(mult);
        Ok(self)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn stalk_dims(&self) -> &[usize] {
        &self.stalks
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x][y]
    }

    pub fn restriction(&self, x: usize, y: usize) -> &Mat {
        &self.restrictions[&(x, y)]
    }

    pub fn whole_space(&self) -> u64 {
        (1u64 << self.points.len()) - 1
    }

    /// All up-sets, as bitmasks.
    pub fn opens(&self) -> Vec<u64> {
        let n = self.points.len();
        (0..1u64 << n)
            .filter(|&u| (0..n).all(|x| u & (1 << x) == 0 || (0..n).all(|y| !self.leq[x][y] || u & (1 << y) != 0)))
            .collect()
    }

    pub fn up_set(&self, x: usize) -> u64 {
        (0..self.points.len()).filter(|&y| self.leq[x][y]).fold(0, |m, y| m | (1 << y))
    }

    fn offsets(&self, u: u64) -> (Vec<Option<usize>>, usize) {
        let mut off = vec![None; self.points.len()];
        let mut total = 0;
        for (x, o) in off.iter_mut().enumerate() {
            if u & (1 << x) != 0 {
                *o = Some(total);
                total += self.stalks[x];
            }
        }
        (off, total)
    }

    /// `F(U)` as the limit of the stalks over `U`: basis vectors in `⊕_{x∈U} F_x`.
    pub fn sections(&self, u: u64) -> Vec<Vec<Rational>> {
        let (off, total) = self.offsets(u);
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for x in 0..self.points.len() {
            for y in 0..self.points.len() {
                let (Some(ox), Some(oy)) = (off[x], off[y]) else { continue };
                if x == y || !self.leq[x][y] {
                    continue;
                }
                let r = &self.restrictions[&(x, y)];
                for i in 0..self.stalks[y] {
                    let mut row = vec![Rational::zero(); total];
                    for j in 0..self.stalks[x] {
                        row[ox + j] = r[(i, j)].clone();
                    }
                    row[oy + i] -= Rational::one();
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            return (0..total).map(|i| unit_vector(total, i)).collect();
        }
        Mat::from_fn(rows.len(), total, |i, j| rows[i][j].clone()).kernel()
    }

    /// Rank of `F(U) → F(V)` for opens `V ⊂ U`.
    pub fn restriction_rank(&self, u: u64, v: u64) -> usize {
        let (off_u, _) = self.offsets(u);
        let secs = self.sections(u);
        let coords: Vec<usize> = (0..self.points.len())
            .filter(|x| v & (1 << x) != 0)
            .flat_map(|x| (0..self.stalks[x]).map(move |i| (x, i)))
            .map(|(x, i)| off_u[x].unwrap() + i)
            .collect();
        let m = Mat::from_fn(coords.len(), secs.len(), |i, j| secs[j][coords[i]].clone());
        m.rank()
    }

    /// Every restriction `F(X) → F(V)` is surjective.
    pub fn is_flasque(&self) -> bool {
        let x = self.whole_space();
        self.opens().into_iter().all(|v| self.restriction_rank(x, v) == self.sections(v).len())
    }

    /// Weakly increasing chains `y_0 ≤ … ≤ y_n` with `y_0 ∈ U`.
    pub fn chains(&self, u: u64, n: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.points.len()).filter(|x| u & (1 << x) != 0).map(|x| vec![x]).collect();
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|c| {
                    let last = *c.last().unwrap();
                    (0..self.points.len()).filter(move |&y| self.leq[last][y]).map(move |y| {
                        let mut d = c.clone();
                        d.push(y);
                        d
                    })
                })
                .collect();
        }
        out
    }

    /// The sheaf `G[n]F`: stalk at `x` is `∏_{chains from ↑x} F_{y_n}`, restrictions project.
    pub fn godement_level(&self, n: usize) -> FinitePosetSheaf {
        let np = self.points.len();
        let chains: Vec<Vec<Vec<usize>>> = (0..np).map(|x| self.chains(self.up_set(x), n)).collect();
        let stalks: Vec<usize> = chains.iter().map(|cs| cs.iter().map(|c| self.stalks[*c.last().unwrap()]).sum()).collect();
        let mut restrictions = HashMap::new();
        for x in 0..np {
            for y in 0..np {
                if !self.leq[x][y] {
                    continue;
                }
                let mut m = Mat::zeros(stalks[y], stalks[x]);
                let mut src = HashMap::new();
                let mut o = 0;
                for c in &chains[x] {
                    src.insert(c.clone(), o);
                    o += self.stalks[*c.last().unwrap()];
                }
                let mut r = 0;
                for c in &chains[y] {
                    let s = src[c];
                    for i in 0..self.stalks[*c.last().unwrap()] {
                        m[(r + i, s + i)] = Rational::one();
                    }
                    r += self.stalks[*c.last().unwrap()];
                }
                restrictions.insert((x, y), m);
            }
        }
        FinitePosetSheaf {
            points: self.points.clone(),
            leq: self.leq.clone(),
            stalks,
            restrictions,
            algebra: None,
        }
    }

    /// `Γ(U, G•F)` up to level `levels`, with the coaugmentation `ι : F(U) → G[n]F(U)`.
    pub fn godement(&self, u: u64, levels: usize) -> Result<(CosimplicialModule, Vec<Mat>), SimplicialError> {
        if levels < 1 {
            return Err(SimplicialError::Bounds { degree: levels, level: 1 });
        }
        let chains: Vec<Vec<Vec<usize>>> = (0..=levels).map(|n| self.chains(u, n)).collect();
        let offsets: Vec<HashMap<Vec<usize>, usize>> = chains
            .iter()
            .map(|cs| {
                let mut o = 0;
                cs.iter()
                    .map(|c| {
                        let r = (c.clone(), o);
                        o += self.stalks[*c.last().unwrap()];
                        r
                    })
                    .collect()
            })
            .collect();
        let dims: Vec<usize> = chains.iter().map(|cs| cs.iter().map(|c| self.stalks[*c.last().unwrap()]).sum()).collect();
        let mut cofaces = vec![Vec::new()];
        for n in 1..=levels {
            let mut level = Vec::new();
            for i in 0..=n {
                let mut m = Mat::zeros(dims[n], dims[n - 1]);
                for c in &chains[n] {
                    let row = offsets[n][c];
                    let mut src = c.clone();
                    src.remove(i);
                    let col = offsets[n - 1][&src];
                    let last = *c.last().unwrap();
                    if i < n {
                        for k in 0..self.stalks[last] {
                            m[(row + k, col + k)] = Rational::one();
                        }
                    } else {
                        let r = &self.restrictions[&(c[n - 1], last)];
                        for a in 0..r.rows() {
                            for b in 0..r.cols() {
                                m[(row + a, col + b)] = r[(a, b)].clone();
                            }
                        }
                    }
                }
                level.push(m);
            }
            cofaces.push(level);
        }
        let mut codegens = Vec::new();
        for n in 0..levels {
            let mut level = Vec::new();
            for i in 0..=n {
                let mut m = Mat::zeros(dims[n], dims[n + 1]);
                for c in &chains[n] {
                    let row = offsets[n][c];
                    let mut src = c.clone();
                    src.insert(i, c[i]);
                    let col = offsets[n + 1][&src];
                    for k in 0..self.stalks[*c.last().unwrap()] {
                        m[(row + k, col + k)] = Rational::one();
                    }
                }
                level.push(m);
            }
            codegens.push(level);
        }
        let mut a = CosimplicialModule::new(dims.clone(), cofaces, codegens)?;
        if let Some(alg) = &self.algebra {
            // componentwise product over chains
            let mult = (0..=levels)
                .map(|n| {
                    let d = dims[n];
                    let mut t = vec![vec![vec![Rational::zero(); d]; d]; d];
                    for c in &chains[n] {
                        let o = offsets[n][c];
                        let y = *c.last().unwrap();
                        for (a_, row) in alg[y].iter().enumerate() {
                            for (b, col) in row.iter().enumerate() {
                                for (k, s) in col.iter().enumerate() {
                                    t[o + a_][o + b][o + k] = s.clone();
                                }
                            }
                        }
                    }
                    t
                })
                .collect();
            a = a.with_algebra(mult)?;
        }
        // ι_n(s)(y_0..y_n) = s_{y_n}
        let secs = self.sections(u);
        let (off_u, _) = self.offsets(u);
        let iota = (0..=levels)
            .map(|n| {
                let mut m = Mat::zeros(dims[n], secs.len());
                for c in &chains[n] {
                    let y = *c.last().unwrap();
                    let o = offsets[n][c];
                    for (j, s) in secs.iter().enumerate() {
                        for k in 0..self.stalks[y] {
                            m[(o + k, j)] = s[off_u[y].unwrap() + k].clone();
                        }
                    }
                }
                m
            })
            .collect();
        Ok((a, iota))
    }
}

/// Simplicial cohomology of the order complex (chains `x_0 < … < x_p` in `U`) with ℚ coefficients.
pub fn order_complex_cohomology(f: &FinitePosetSheaf, u: u64, max_degree: usize) -> Vec<usize> {
    let n = f.points.len();
    let mut simplices: Vec<Vec<Vec<usize>>> = vec![(0..n).filter(|x| u & (1 << x) != 0).map(|x| vec![x]).collect()];
    for p in 1..=max_degree + 1 {
        let next: Vec<Vec<usize>> = simplices[p - 1]
            .iter()
            .flat_map(|c| {
                let last = *c.last().unwrap();
                (0..n)
                    .filter(move |&y| y != last && f.leq[last][y] && u & (1 << y) != 0)
                    .map(move |y| {
                        let mut d = c.clone();
                        d.push(y);
                        d
                    })
            })
            .collect();
        simplices.push(next);
    }
    let coboundary = |p: usize| -> Mat {
        let idx: HashMap<&Vec<usize>, usize> = simplices[p].iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut m = Mat::zeros(simplices[p + 1].len(), simplices[p].len());
        for (r, s) in simplices[p + 1].iter().enumerate() {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                m[(r, idx[&face])] += if i % 2 == 0 { Rational::one() } else { -Rational::one() };
            }
        }
        m
    };
    let ranks: Vec<usize> = (0..=max_degree).map(|p| coboundary(p).rank()).collect();
    (0..=max_degree)
        .map(|p| simplices[p].len() - ranks[p] - if p > 0 { ranks[p - 1] } else { 0 })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SheafReport {
    pub name: String,
    pub level_bound: usize,
    pub godement_level_dims: Vec<usize>,
    pub flasque_levels: Vec<bool>,
    pub sections_match_products: bool,
    pub global_cohomology: Vec<usize>,
    pub stalk_triangles: Vec<TriangleReport>,
}

impl SheafReport {
    pub fn passed(&self) -> bool {
        self.flasque_levels.iter().all(|&b| b) && self.sections_match_products && self.stalk_triangles.iter().all(TriangleReport::passed)
    }
}

/// Godement levels, flasqueness, global cohomology, and the de Rham triangle on every `↑x`.
pub fn analyze_sheaf(name: &str, f: &FinitePosetSheaf, levels: usize) -> Result<SheafReport, SimplicialError> {
    let mut flasque = Vec::new();
    let mut sections_ok = true;
    for n in 0..=levels {
        let g = f.godement_level(n);
        flasque.push(g.is_flasque());
        for u in f.opens() {
            let prod: usize = f.chains(u, n).iter().map(|c| f.stalks[*c.last().unwrap()]).sum();
            sections_ok &= g.sections(u).len() == prod;
        }
    }
    let (a, _) = f.godement(f.whole_space(), levels)?;
    let global = normalized_complex(&a).cohomology();
    let mut triangles = Vec::new();
    for x in 0..f.points.len() {
        let (a, iota) = f.godement(f.up_set(x), levels)?;
        triangles.push(de_rham_triangle_check(&a, &iota)?);
    }
    Ok(SheafReport {
        name: name.to_string(),
        level_bound: levels,
        godement_level_dims: a.dims.clone(),
        flasque_levels: flasque,
        sections_match_products: sections_ok,
        global_cohomology: global,
        stalk_triangles: triangles,
    })
}

fn points(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Small sheaves used by tests and the demo verb.
pub fn sheaf_corpus() -> Vec<(String, FinitePosetSheaf)> {
    let constant = |names: &[&str], pairs: &[(usize, usize)], d: usize| {
        FinitePosetSheaf::new(points(names), pairs, vec![d; names.len()], HashMap::new()).unwrap()
    };
    let mut out = vec![
        ("point".to_string(), constant(&["p"], &[], 1)),
        // closed point c specializes to the open point o
        ("sierpinski".to_string(), constant(&["c", "o"], &[(0, 1)], 1)),
        ("v_shape".to_string(), constant(&["l", "r", "t"], &[(0, 2), (1, 2)], 1)),
        (
            "circle4".to_string(),
            constant(&["a", "b", "c", "d"], &[(0, 2), (0, 3), (1, 2), (1, 3)], 1),
        ),
        (
            "skyscraper".to_string(),
            FinitePosetSheaf::new(points(&["c", "o"]), &[(0, 1)], vec![1, 0], HashMap::new()).unwrap(),
        ),
    ];
    out.push(("dual_numbers".to_string(), dual_numbers_sheaf()));
    out
}

/// The constant sheaf of algebras `ℚ[ε]/ε²` on the V-shaped poset.
pub fn dual_numbers_sheaf() -> FinitePosetSheaf {
    let one = Rational::one;
    let z = Rational::zero;
    // basis (1, ε): 1·1 = 1, 1·ε = ε·1 = ε, ε·ε = 0
    let table = vec![vec![vec![one(), z()], vec![z(), one()]], vec![vec![z(), one()], vec![z(), z()]]];
    FinitePosetSheaf::new(points(&["l", "r", "t"]), &[(0, 2), (1, 2)], vec![2; 3], HashMap::new())
        .unwrap()
        .with_algebra(vec![table; 3])
        .unwrap()
}

#[derive(Clone, Debug, Serialize)]
pub struct TkReport {
    /// `(even, odd)` cohomology, or ranks of `(A, B)` when `W(p) ≠ 0`
    pub koszul: (usize, usize),
    pub total: (usize, usize),
    pub curved: bool,
    pub quasi_isomorphism: bool,
}

/// `{τ, σ} → {τ, σ} ⊗ Th•G(O)` on a one-point site, with `τ, σ` evaluated at `point`.
pub fn tk_point_check(f: &Factorization, point: &[Rational], levels: usize) -> Result<TkReport, SimplicialError> {
    if point.len() != f.vars().len() {
        return Err(SimplicialError::UnsupportedSite(format!(
            "a point of the chart needs {} coordinates",
            f.vars().len()
        )));
    }
    let empty: Arc<Vec<String>> = Arc::new(Vec::new());
    let images: Vec<MultiPoly> = point.iter().map(|c| MultiPoly::constant(empty.clone(), Coeff::from(c.clone()))).collect();
    let eval = |p: &MultiPoly| -> Result<Rational, SimplicialError> {
        let v = if images.is_empty() { p.constant_term() } else { p.substitute(&images).constant_term() };
        v.to_rational().ok_or(SimplicialError::NonRational)
    };
    let full = f.full_matrix();
    let r = full.len();
    let k = Mat::from_fn(r, r, |i, j| eval(&full[i][j]).unwrap_or_default());
    for row in &full {
        for p in row {
            eval(p)?;
        }
    }
    let curved = !eval(f.potential())?.is_zero();
    let sheaf = &sheaf_corpus()[0].1;
    let (a, iota) = sheaf.godement(sheaf.whole_space(), levels)?;
    let th = th_complex(&a, levels)?;
    let tri = de_rham_triangle_check(&a, &iota)?;
    if !tri.passed() {
        return Ok(TkReport {
            koszul: (0, 0),
            total: (0, 0),
            curved,
            quasi_isomorphism: false,
        });
    }
    // total space K ⊗ (⊕_p N^p), parity = module parity + p
    let even = f.even_rank();
    let mut basis: Vec<(usize, usize, usize)> = Vec::new(); // (module index, p, k)
    for p in 0..th.basis.len() {
        for kk in 0..th.basis[p].len() {
            for i in 0..r {
                basis.push((i, p, kk));
            }
        }
    }
    let pos: HashMap<(usize, usize, usize), usize> = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let par = |i: usize| (i >= even) as usize;
    let nt = basis.len();
    let mut d = Mat::zeros(nt, nt);
    for (col, &(i, p, kk)) in basis.iter().enumerate() {
        for i2 in 0..r {
            if !k[(i2, i)].is_zero() {
                d[(pos[&(i2, p, kk)], col)] += k[(i2, i)].clone();
            }
        }
        if p < th.normalized.differentials.len() {
            let dn = &th.normalized.differentials[p];
            for k2 in 0..dn.rows() {
                let c = &dn[(k2, kk)];
                if !c.is_zero() {
                    let s = if par(i) == 1 { -c.clone() } else { c.clone() };
                    d[(pos[&(i, p + 1, k2)], col)] += s;
                }
            }
        }
    }
    let total_parity: Vec<usize> = basis.iter().map(|&(i, p, _)| (par(i) + p) % 2).collect();
    let kpar: Vec<usize> = (0..r).map(par).collect();
    let koszul = z2_cohomology(&k, &kpar, curved);
    let total = z2_cohomology(&d, &total_parity, curved);
    // j : K → K ⊗ N^0, e ↦ e ⊗ 1_T
    let j = Mat::from_fn(nt, r, |row, col| {
        let (i, p, _) = basis[row];
        if p == 0 && i == col {
            iota[0][(0, 0)].clone()
        } else {
            Rational::zero()
        }
    });
    let chain_map = d.mul(&j) == j.mul(&k);
    let iso = chain_map
        && koszul == total
        && if curved {
            true
        } else {
            // images of cocycle representatives stay independent modulo coboundaries
            let z = k.kernel();
            let bk = k.rank();
            let zk = from_columns(r, &z);
            let img = j.mul(&zk);
            let joined = Mat::from_fn(nt, img.cols() + nt, |a_, b| if b < img.cols() { img[(a_, b)].clone() } else { d[(a_, b - img.cols())].clone() });
            joined.rank() - d.rank() == z.len() - bk
        };
    Ok(TkReport {
        koszul,
        total,
        curved,
        quasi_isomorphism: iso,
    })
}

fn z2_cohomology(d: &Mat, parity: &[usize], curved: bool) -> (usize, usize) {
    let block = |from: usize, to: usize| -> Mat {
        let rows: Vec<usize> = (0..parity.len()).filter(|&i| parity[i] == to).collect();
        let cols: Vec<usize> = (0..parity.len()).filter(|&i| parity[i] == from).collect();
        Mat::from_fn(rows.len(), cols.len(), |a, b| d[(rows[a], cols[b])].clone())
    };
    let a = block(0, 1);
    let b = block(1, 0);
    if curved {
        return (a.rank(), b.rank());
    }
    let dim = |p: usize| parity.iter().filter(|&&x| x == p).count();
    (dim(0) - a.rank() - b.rank(), dim(1) - b.rank() - a.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::{int, rat};
    use crate::matfact::koszul;
    use proptest::prelude::*;

    #[test]
    fn pullbacks() {
        let t1 = PolyForm::new(1, barycentric(1, 1));
        let f = DeltaMap::new(vec![0], 1).unwrap(); // vertex 0
        assert!(omega_pullback(&f, &t1).form.is_zero());
        let t0 = PolyForm::new(1, barycentric(1, 0));
        assert_eq!(omega_pullback(&f, &t0).form, Form::one(simplex_ring(0)));
        let s = DeltaMap::codegeneracy(0, 0);
        let one = PolyForm::new(0, Form::one(simplex_ring(0)));
        assert_eq!(omega_pullback(&s, &one).form, Form::one(simplex_ring(1)));
        let w = whitney_form(&[0, 1], 2);
        assert_eq!(omega_pullback(&DeltaMap::identity(2), &w), w);
        assert!(DeltaMap::new(vec![1, 0], 1).is_err());
        assert_eq!(DeltaMap::all(1, 2).len(), 6);
    }

    #[test]
    fn integrals() {
        let r = simplex_ring(1);
        let w = PolyForm::new(1, Form::monomial(MultiPoly::var(r.clone(), 0), 1));
        assert_eq!(integrate_simplex(&w).unwrap(), rat(1, 2));
        for n in 1..5 {
            let v = PolyForm::new(n, Form::volume(simplex_ring(n)));
            assert_eq!(integrate_simplex(&v).unwrap(), Rational::new(1.into(), factorial(n as u32)));
        }
        let c = PolyForm::new(0, Form::from_poly(MultiPoly::constant(simplex_ring(0), Coeff::from_i64(7))));
        assert_eq!(integrate_simplex(&c).unwrap(), int(7));
        // orientation: dt2∧dt1 = −dt1∧dt2
        let r2 = simplex_ring(2);
        let swapped = Form::dx(r2.clone(), 1).wedge(&Form::dx(r2, 0));
        assert_eq!(integrate_simplex(&PolyForm::new(2, swapped)).unwrap(), rat(-1, 2));
        assert!(integrate_simplex(&whitney_form(&[0, 1], 2)).is_err());
    }

    #[test]
    fn whitney_forms() {
        let w = whitney_form(&[0, 1], 1);
        let t0 = barycentric(1, 0);
        let t1 = barycentric(1, 1);
        assert_eq!(w.form, t0.wedge(&t1.d()).sub(&t1.wedge(&t0.d())));
        assert_eq!(integrate_simplex(&w).unwrap(), int(1));
        assert_eq!(whitney_form(&[0], 1).form, t0);
        for n in 1..4 {
            let all: Vec<usize> = (0..=n).collect();
            assert_eq!(integrate_simplex(&whitney_form(&all, n)).unwrap(), int(1));
        }
        // restricted to the face opposite vertex 0, ω_{01} vanishes
        let face = omega_pullback(&DeltaMap::coface(2, 0), &whitney_form(&[0, 1], 2));
        assert!(face.form.is_zero());
    }

    fn random_form(n: usize, deg: usize, seed: &[i64]) -> PolyForm {
        let r = simplex_ring(n);
        let mut f = Form::zero(r.clone());
        let mut it = seed.iter().cycle();
        for mask in (0..1u64 << n).filter(|m| m.count_ones() as usize == deg) {
            let mut p = MultiPoly::zero(r.clone());
            for _ in 0..3 {
                let c = *it.next().unwrap();
                let e: Vec<u32> = (0..n).map(|_| (*it.next().unwrap()).rem_euclid(3) as u32).collect();
                p = p.add(&MultiPoly::term(r.clone(), crate::exactalg::Monomial(e), Coeff::from_i64(c)));
            }
            f.add_component(mask, p);
        }
        PolyForm::new(n, f)
    }

    proptest! {
        #[test]
        fn stokes(n in 1usize..5, seed in prop::collection::vec(-4i64..5, 6..30)) {
            let w = random_form(n, n - 1, &seed);
            let (l, r) = stokes_sides(&w).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn pullback_is_functorial(seed in prop::collection::vec(-3i64..4, 6..20), k in 0usize..6) {
            let w = random_form(2, 1, &seed);
            let g = DeltaMap::all(1, 2)[k].clone();
            let f = DeltaMap::all(1, 1)[k % 3].clone();
            let comp = DeltaMap { target: 2, values: f.values.iter().map(|&v| g.values[v]).collect() };
            let lhs = omega_pullback(&comp, &w);
            let rhs = omega_pullback(&f, &omega_pullback(&g, &w));
            prop_assert_eq!(lhs, rhs);
            // d commutes with pullback
            prop_assert_eq!(omega_pullback(&g, &w.d()), omega_pullback(&g, &w).d());
        }
    }

    #[test]
    fn constant_module() {
        let a = CosimplicialModule::constant(2, 3);
        let nc = normalized_complex(&a);
        assert_eq!(nc.dims(), vec![2, 0, 0, 0]);
        let th = th_complex(&a, 3).unwrap();
        let one = th.unit(&a, &[int(1), int(0)]);
        assert!(one.d().is_zero());
        assert_eq!(th_complex(&a, 2).unwrap_err(), SimplicialError::Bounds { degree: 2, level: 3 });
    }

    #[test]
    fn godement_corpus() {
        let corpus = sheaf_corpus();
        for (name, f) in &corpus {
            let report = analyze_sheaf(name, f, 3).unwrap();
            assert!(report.passed(), "{name}: {report:?}");
            if f.stalk_dims().iter().all(|&d| d == 1) {
                let oracle = order_complex_cohomology(f, f.whole_space(), 2);
                assert_eq!(report.global_cohomology, oracle, "{name}");
            }
        }
        let circle = &corpus[3].1;
        assert_eq!(analyze_sheaf("c", circle, 3).unwrap().global_cohomology, vec![1, 1, 0]);
        let sky = &corpus[4].1;
        assert_eq!(analyze_sheaf("s", sky, 2).unwrap().global_cohomology, vec![1, 0]);
        let sierp = &corpus[1].1;
        let (a, _) = sierp.godement(sierp.up_set(1), 1).unwrap();
        assert_eq!(a.dims()[0], 1);
        let (a, _) = sierp.godement(sierp.whole_space(), 1).unwrap();
        assert_eq!(a.dims()[0], 2);
    }

    #[test]
    fn th_products_close() {
        let f = dual_numbers_sheaf();
        let (a, _) = f.godement(f.whole_space(), 2).unwrap();
        let th = th_complex(&a, 2).unwrap();
        let b0 = &th.basis[0];
        let b1 = &th.basis[1];
        for x in b0.iter().take(3) {
            for y in b1.iter().take(4) {
                let xy = x.mul(y, &a);
                xy.check_compatible(&a).unwrap();
                let yx = y.mul(x, &a);
                assert_eq!(xy, yx);
            }
        }
    }

    #[test]
    fn json_sheaf() {
        let text = r#"{"points":["c","o"],"order_pairs":[["c","o"]],"stalk_dims":{"c":2,"o":1},
            "restriction_matrices":[{"from":"c","to":"o","matrix":[[1,"1/2"]]}]}"#;
        let f = FinitePosetSheaf::from_json(text).unwrap();
        assert_eq!(f.sections(f.whole_space()).len(), 2);
        assert!(analyze_sheaf("json", &f, 2).unwrap().passed());
        let bad = r#"{"points":["c","o"],"order_pairs":[["c","o"],["o","c"]],"stalk_dims":{"c":1,"o":1}}"#;
        assert!(FinitePosetSheaf::from_json(bad).is_err());
    }

    #[test]
    fn tk_on_a_point() {
        let r = MultiPoly::ring(&["x", "y"]);
        let zero = koszul(&[MultiPoly::zero(r.clone())], &[MultiPoly::zero(r.clone())]).unwrap();
        let rep = tk_point_check(&zero, &[int(0), int(0)], 2).unwrap();
        assert_eq!(rep.koszul, (1, 1));
        assert!(rep.quasi_isomorphism);
        let yx = koszul(&[MultiPoly::var(r.clone(), 1)], &[MultiPoly::var(r.clone(), 0)]).unwrap();
        let rep = tk_point_check(&yx, &[int(0), int(0)], 2).unwrap();
        assert!(rep.quasi_isomorphism && rep.koszul == rep.total);
        let rep = tk_point_check(&yx, &[int(1), int(2)], 2).unwrap();
        assert!(rep.curved && rep.quasi_isomorphism);
    }
}
