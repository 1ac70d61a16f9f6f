//! The state space of an affine LG orbifold: sector decomposition, the
//! age-shifted grading, Grothendieck residues, the `inv`-twisted pairing and
//! Künneth for sums of singularities.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::{Arc, OnceLock};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::exactalg::linalg::Matrix;
use crate::exactalg::poly::{Coeff, Monomial, MultiPoly};
use crate::exactalg::rational::{fmt_rational, Rational};
use crate::exactalg::{AlgebraError, CyclotomicNumber, PolyIdeal, QuotientBasis};
use crate::glsm::{GlsmError, GlsmModel};
use crate::orbifold::{enumerate_group, GroupElement, OrbifoldError, Sector};

/// Normalisation conventions embedded in every report.
pub const RESIDUE_CONVENTION: &str = "res(Hess w) = mu (Milnor number); residue = mu * socle coefficient of nf(p) / socle coefficient of nf(Hess w)";
pub const STACK_FACTOR_CONVENTION: &str = "broad pairings carry the stack-integration factor 1/|G|; dual narrow generators pair to 1";
pub const ZETA_CONVENTION: &str = "zeta = exp(pi i / d_w); inv* multiplies x^a dx_F by zeta^(sum_{j in F} c_j (a_j + 1))";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateSpaceError {
    #[error("sector {sector}: restricted potential has a non-isolated singularity")]
    NonIsolated { sector: String },
    #[error("elements belong to different models")]
    DifferentModels,
    #[error("element has {got} coefficients, sector {sector} has dimension {expected}")]
    BadElement { sector: String, expected: usize, got: usize },
    #[error("no sector {0} in this state space")]
    UnknownSector(String),
    #[error("sector {sector}: pairing Gram matrix is singular")]
    Degenerate { sector: String },
    #[error("variable {0} occurs in both summands")]
    VariableCollision(String),
    #[error("summands have different d_w ({0} and {1})")]
    MismatchedDegree(u32, u32),
    #[error(transparent)]
    Orbifold(#[from] OrbifoldError),
    #[error(transparent)]
    Glsm(#[from] GlsmError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Residue functional on the Milnor ring of a quasi-homogeneous isolated singularity.
#[derive(Clone, Debug)]
pub struct ResidueMap {
    ideal: PolyIdeal,
    socle: Monomial,
    hess_socle: Coeff,
    milnor: usize,
}

/// Quasi-homogeneous weights `q` with `Σ a_i q_i = 1` on every monomial of `w`.
pub fn quasi_homogeneous_weights(w: &MultiPoly) -> Result<Vec<Rational>, AlgebraError> {
    let rows: Vec<Vec<Rational>> = w
        .terms()
        .map(|(m, _)| m.exps().iter().map(|&e| Rational::from_integer(e.into())).collect())
        .collect();
    if rows.is_empty() {
        return Err(AlgebraError::NotQuasiHomogeneous("zero polynomial".into()));
    }
    let ones = vec![Rational::one(); rows.len()];
    Matrix::from_rows(rows)
        .solve(&ones)
        .ok_or_else(|| AlgebraError::NotQuasiHomogeneous(w.to_string()))
}

/// Determinant of the Hessian, reduced modulo `ideal` along the way.
fn hessian_mod(w: &MultiPoly, ideal: &PolyIdeal) -> Result<MultiPoly, AlgebraError> {
    let n = w.nvars();
    let grad = w.gradient();
    let h: Vec<Vec<MultiPoly>> = (0..n).map(|i| (0..n).map(|j| grad[i].derivative(j)).collect()).collect();
    let mut layer: HashMap<u64, MultiPoly> = HashMap::from([(0u64, MultiPoly::one(w.vars().clone()))]);
    for row in h.iter() {
        let mut next: HashMap<u64, MultiPoly> = HashMap::new();
        for (mask, p) in &layer {
            for (c, entry) in row.iter().enumerate() {
                if mask & (1 << c) != 0 || entry.is_zero() {
                    continue;
                }
                let inversions = (mask >> (c + 1)).count_ones();
                let mut term = p.mul(entry);
                if inversions % 2 == 1 {
                    term = term.neg();
                }
                let slot = next.entry(mask | (1 << c)).or_insert_with(|| MultiPoly::zero(w.vars().clone()));
                *slot = ideal.normal_form(&slot.add(&term))?;
            }
        }
        layer = next;
    }
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    Ok(layer.remove(&full).unwrap_or_else(|| MultiPoly::zero(w.vars().clone())))
}

impl ResidueMap {
    pub fn new(w: &MultiPoly) -> Result<Self, AlgebraError> {
        quasi_homogeneous_weights(w)?;
        let ideal = PolyIdeal::new(w.vars().clone(), w.gradient())?;
        let milnor = match ideal.quotient_basis() {
            QuotientBasis::Finite(b) => b.len(),
            QuotientBasis::Infinite => return Err(AlgebraError::NonIsolated),
        };
        let hess = hessian_mod(w, &ideal)?;
        if hess.len() != 1 {
            return Err(AlgebraError::NotQuasiHomogeneous(format!(
                "Hessian class {hess} is not a single socle monomial"
            )));
        }
        let (socle, hess_socle) = hess.leading_term().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        Ok(ResidueMap {
            ideal,
            socle,
            hess_socle,
            milnor,
        })
    }

    pub fn milnor_number(&self) -> usize {
        self.milnor
    }

    pub fn socle(&self) -> &Monomial {
        &self.socle
    }

    pub fn ideal(&self) -> &PolyIdeal {
        &self.ideal
    }

    pub fn residue(&self, p: &MultiPoly) -> Result<Coeff, AlgebraError> {
        let nf = self.ideal.normal_form(p)?;
        let c = nf.coeff(&self.socle);
        Ok((&c * &self.hess_socle.inv().unwrap()).scale(&Rational::from_integer(self.milnor.into())))
    }

    fn residue_of_monomial(&self, m: &Monomial) -> Coeff {
        let p = MultiPoly::term(self.ideal.vars().clone(), m.clone(), Coeff::one());
        self.residue(&p).expect("same ring")
    }
}

/// `res[p dx / (∂_1 w ⋯ ∂_n w)]` for a quasi-homogeneous isolated singularity.
pub fn residue(p: &MultiPoly, w: &MultiPoly) -> Result<Coeff, AlgebraError> {
    p.check_ring(w)?;
    ResidueMap::new(w)?.residue(p)
}

#[derive(Clone, Debug)]
pub struct SectorSpace {
    pub sector: Sector,
    pub fixed_vars: Vec<String>,
    /// Standard monomials in the fixed variables; `[1]` (empty exponent) for narrow sectors.
    pub basis: Vec<Monomial>,
    /// `Σ_j c_j a_j` of each basis monomial.
    pub poly_degrees: Vec<Rational>,
    /// `dim V^h + 2(age − q)`, shared by every basis element.
    pub degree: Rational,
    residue: Option<Arc<ResidueMap>>,
}

impl SectorSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn narrow(&self) -> bool {
        self.sector.narrow
    }

    /// Parity of the grading (`dim V^h mod 2`).
    pub fn parity(&self) -> u32 {
        (self.fixed_vars.len() % 2) as u32
    }

    pub fn residue_map(&self) -> Option<&ResidueMap> {
        self.residue.as_deref()
    }

    pub fn poly_degree_histogram(&self) -> BTreeMap<String, usize> {
        let mut h: BTreeMap<Rational, usize> = BTreeMap::new();
        for d in &self.poly_degrees {
            *h.entry(d.clone()).or_default() += 1;
        }
        h.into_iter().map(|(k, v)| (fmt_rational(&k), v)).collect()
    }
}

fn twist_invariant(m: &Monomial, fixed: &[usize], generators: &[GroupElement]) -> bool {
    generators.iter().all(|g| {
        let p: Rational = fixed
            .iter()
            .zip(m.exps())
            .map(|(&j, &a)| &g.phases()[j] * Rational::from_integer((a + 1).into()))
            .sum();
        p.is_integer()
    })
}

/// The `G`-invariant part of `Jac(w|_{V^h}) ⊗ det(V^h)^∨`, or the narrow line.
pub fn sector_space(model: &GlsmModel, h: &GroupElement) -> Result<SectorSpace, StateSpaceError> {
    let sector = Sector::of(h.clone());
    let fixed = sector.fixed_support.clone();
    let fixed_vars: Vec<String> = fixed.iter().map(|&i| model.variables()[i].clone()).collect();
    let q = model.q();
    let degree = Rational::from_integer(fixed.len().into()) + (&sector.age - &q) * Rational::from_integer(2.into());
    if sector.narrow {
        return Ok(SectorSpace {
            sector,
            fixed_vars,
            basis: vec![Monomial(Vec::new())],
            poly_degrees: vec![Rational::zero()],
            degree,
            residue: None,
        });
    }
    let restricted = model.potential().restrict(&fixed);
    let name = h.to_string();
    let res = ResidueMap::new(&restricted).map_err(|e| match e {
        AlgebraError::NonIsolated => StateSpaceError::NonIsolated { sector: name.clone() },
        AlgebraError::NotQuasiHomogeneous(_) if restricted.is_zero() => StateSpaceError::NonIsolated { sector: name.clone() },
        other => StateSpaceError::Algebra(other),
    })?;
    let QuotientBasis::Finite(all) = res.ideal.quotient_basis() else {
        return Err(StateSpaceError::NonIsolated { sector: name });
    };
    let gens = model.finite_generators();
    let charges: Vec<Rational> = fixed.iter().map(|&i| model.r_charges()[i].clone()).collect();
    let basis: Vec<Monomial> = all.into_iter().filter(|m| twist_invariant(m, &fixed, &gens)).collect();
    let poly_degrees = basis.iter().map(|m| m.weighted_degree(&charges)).collect();
    Ok(SectorSpace {
        sector,
        fixed_vars,
        basis,
        poly_degrees,
        degree,
        residue: Some(Arc::new(res)),
    })
}

/// An element of one sector, as coefficients on the sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub model: String,
    pub sector: GroupElement,
    pub coeffs: Vec<Coeff>,
}

#[derive(Debug)]
pub struct StateSpace {
    model: GlsmModel,
    group: Vec<GroupElement>,
    sectors: Vec<SectorSpace>,
    index: HashMap<GroupElement, usize>,
    grams: Vec<OnceLock<Matrix<Coeff>>>,
}

impl Clone for StateSpace {
    fn clone(&self) -> Self {
        StateSpace {
            model: self.model.clone(),
            group: self.group.clone(),
            sectors: self.sectors.clone(),
            index: self.index.clone(),
            grams: self
                .grams
                .iter()
                .map(|g| {
                    let l = OnceLock::new();
                    if let Some(m) = g.get() {
                        let _ = l.set(m.clone());
                    }
                    l
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorReport {
    pub element: Vec<String>,
    pub fixed_support: Vec<String>,
    pub narrow: bool,
    pub age: String,
    pub dimension: usize,
    pub degree: String,
    pub poly_degree_histogram: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateSpaceReport {
    pub group_order: usize,
    pub q: String,
    pub c_hat: String,
    pub total_dimension: usize,
    pub sector_dimensions: Vec<usize>,
    pub degree_histogram: BTreeMap<String, usize>,
    pub sectors: Vec<SectorReport>,
    pub conventions: BTreeMap<String, String>,
}

pub fn conventions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("residue".to_string(), RESIDUE_CONVENTION.to_string()),
        ("stack_factor".to_string(), STACK_FACTOR_CONVENTION.to_string()),
        ("zeta".to_string(), ZETA_CONVENTION.to_string()),
    ])
}

impl StateSpace {
    pub fn new(model: &GlsmModel, group_bound: usize) -> Result<Self, StateSpaceError> {
        if model.torus_rank() > 0 {
            return Err(OrbifoldError::NotAffine { rank: model.torus_rank() }.into());
        }
        let group = enumerate_group(&model.finite_generators(), model.n_vars(), group_bound)?;
        let sectors: Vec<SectorSpace> = group
            .par_iter()
            .map(|h| sector_space(model, h))
            .collect::<Result<_, _>>()?;
        let index = group.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let grams = (0..group.len()).map(|_| OnceLock::new()).collect();
        Ok(StateSpace {
            model: model.clone(),
            group,
            sectors,
            index,
            grams,
        })
    }

    pub fn model(&self) -> &GlsmModel {
        &self.model
    }

    pub fn group(&self) -> &[GroupElement] {
        &self.group
    }

    pub fn group_order(&self) -> usize {
        self.group.len()
    }

    pub fn sectors(&self) -> &[SectorSpace] {
        &self.sectors
    }

    pub fn sector_index(&self, h: &GroupElement) -> Option<usize> {
        self.index.get(h).copied()
    }

    pub fn sector(&self, h: &GroupElement) -> Option<&SectorSpace> {
        self.sector_index(h).map(|i| &self.sectors[i])
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.index[&self.group[i].inverse()]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.sectors.iter().map(SectorSpace::dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().sum()
    }

    pub fn degree_histogram(&self) -> BTreeMap<Rational, usize> {
        let mut h = BTreeMap::new();
        for s in &self.sectors {
            if s.dim() > 0 {
                *h.entry(s.degree.clone()).or_default() += s.dim();
            }
        }
        h
    }

    fn zeta_power(&self, exponent: &Rational) -> Coeff {
        // ζ^e = exp(2πi · e / (2 d_w))
        CyclotomicNumber::from_turns(&(exponent / (self.model.d_w_rational() * Rational::from_integer(2.into()))))
    }

    /// Scalar by which `inv*` multiplies basis element `k` of sector `i`.
    pub fn inv_factor(&self, i: usize, k: usize) -> Coeff {
        let s = &self.sectors[i];
        if s.narrow() {
            return Coeff::one();
        }
        let e: Rational = s
            .sector
            .fixed_support
            .iter()
            .zip(s.basis[k].exps())
            .map(|(&j, &a)| &self.model.r_charges()[j] * Rational::from_integer((a + 1).into()))
            .sum();
        self.zeta_power(&e)
    }

    pub fn basis_vector(&self, i: usize, k: usize) -> StateVector {
        let mut coeffs = vec![Coeff::zero(); self.sectors[i].dim()];
        coeffs[k] = Coeff::one();
        StateVector {
            model: self.model.fingerprint(),
            sector: self.group[i].clone(),
            coeffs,
        }
    }

    fn check(&self, v: &StateVector) -> Result<usize, StateSpaceError> {
        if v.model != self.model.fingerprint() {
            return Err(StateSpaceError::DifferentModels);
        }
        let i = self.sector_index(&v.sector).ok_or_else(|| StateSpaceError::UnknownSector(v.sector.to_string()))?;
        if v.coeffs.len() != self.sectors[i].dim() {
            return Err(StateSpaceError::BadElement {
                sector: v.sector.to_string(),
                expected: self.sectors[i].dim(),
                got: v.coeffs.len(),
            });
        }
        Ok(i)
    }

    /// `(x, h) ↦ (ζ·x, h⁻¹)`.
    pub fn inv_pullback(&self, v: &StateVector) -> Result<StateVector, StateSpaceError> {
        let i = self.check(v)?;
        Ok(StateVector {
            model: v.model.clone(),
            sector: v.sector.inverse(),
            coeffs: v.coeffs.iter().enumerate().map(|(k, c)| c * &self.inv_factor(i, k)).collect(),
        })
    }

    /// Gram matrix between the basis of sector `i` and that of its inverse sector.
    pub fn gram(&self, i: usize) -> &Matrix<Coeff> {
        self.grams[i].get_or_init(|| self.compute_gram(i))
    }

    fn compute_gram(&self, i: usize) -> Matrix<Coeff> {
        let s = &self.sectors[i];
        let j = self.inverse_index(i);
        let t = &self.sectors[j];
        if s.narrow() {
            return Matrix::from_rows(vec![vec![Coeff::one()]]);
        }
        let res = s.residue.as_ref().expect("broad sector has a residue map");
        let g = Rational::new(1.into(), self.group.len().into());
        let inv: Vec<Coeff> = (0..t.dim()).map(|k| self.inv_factor(j, k)).collect();
        let mut cache: HashMap<Monomial, Coeff> = HashMap::new();
        let mut rows = vec![vec![Coeff::zero(); t.dim()]; s.dim()];
        for (a, ma) in s.basis.iter().enumerate() {
            for (b, mb) in t.basis.iter().enumerate() {
                let m = ma.mul(mb);
                let r = cache.entry(m.clone()).or_insert_with(|| res.residue_of_monomial(&m)).clone();
                if !r.is_zero() {
                    rows[a][b] = (&r * &inv[b]).scale(&g);
                }
            }
        }
        Matrix::from_rows(rows)
    }

    /// `η(γ₁, γ₂) = ∫ γ₁ ∧ inv* γ₂`; zero unless the sectors are mutually inverse.
    pub fn pairing(&self, a: &StateVector, b: &StateVector) -> Result<Coeff, StateSpaceError> {
        let i = self.check(a)?;
        let j = self.check(b)?;
        if self.inverse_index(i) != j {
            return Ok(Coeff::zero());
        }
        let g = self.gram(i);
        let mut sum = Coeff::zero();
        for (x, ca) in a.coeffs.iter().enumerate() {
            if ca.is_zero() {
                continue;
            }
            for (y, cb) in b.coeffs.iter().enumerate() {
                if !cb.is_zero() && !g[(x, y)].is_zero() {
                    sum = &sum + &(&(ca * cb) * &g[(x, y)]);
                }
            }
        }
        Ok(sum)
    }

    pub fn basis_pairing(&self, i: usize, a: usize, j: usize, b: usize) -> Coeff {
        if self.inverse_index(i) != j {
            return Coeff::zero();
        }
        self.gram(i)[(a, b)].clone()
    }

    /// Checks that every Gram matrix is nonsingular.
    pub fn check_nondegenerate(&self) -> Result<(), StateSpaceError> {
        for i in 0..self.sectors.len() {
            let g = self.gram(i);
            if g.rows() != g.cols() || g.rank() != g.rows() {
                return Err(StateSpaceError::Degenerate {
                    sector: self.group[i].to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn report(&self) -> StateSpaceReport {
        StateSpaceReport {
            group_order: self.group.len(),
            q: fmt_rational(&self.model.q()),
            c_hat: fmt_rational(&self.model.c_hat()),
            total_dimension: self.total_dim(),
            sector_dimensions: self.dims(),
            degree_histogram: self.degree_histogram().iter().map(|(k, v)| (fmt_rational(k), *v)).collect(),
            sectors: self
                .sectors
                .iter()
                .map(|s| SectorReport {
                    element: s.sector.element.to_strings(),
                    fixed_support: s.fixed_vars.clone(),
                    narrow: s.narrow(),
                    age: fmt_rational(&s.sector.age),
                    dimension: s.dim(),
                    degree: fmt_rational(&s.degree),
                    poly_degree_histogram: s.poly_degree_histogram(),
                })
                .collect(),
            conventions: conventions(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KunnethEntry {
    pub h1: Vec<String>,
    pub h2: Vec<String>,
    pub dim1: usize,
    pub dim2: usize,
    pub dim_sum: usize,
    pub degree_sum: String,
    pub degrees_add: bool,
    pub basis_matches: bool,
    /// Pairing multiplicativity is only checked for sectors up to a size bound.
    pub pairing_checked: bool,
    pub pairing_matches: bool,
    /// Scalar relating the reported pairings: `η = κ·η₁⊗η₂` (κ = 1/|G_i| when only factor i is narrow).
    pub kappa: String,
}

#[derive(Clone, Debug)]
pub struct KunnethWitness {
    pub sum_model: GlsmModel,
    pub state: StateSpace,
    pub entries: Vec<KunnethEntry>,
}

impl KunnethWitness {
    pub fn is_isomorphism(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.dim_sum == e.dim1 * e.dim2 && e.degrees_add && e.basis_matches && (!e.pairing_checked || e.pairing_matches))
    }
}

/// The model `(V₁ ⊕ V₂, w₁ + w₂)` with group `G₁ × G₂`.
pub fn sum_model(m1: &GlsmModel, m2: &GlsmModel) -> Result<GlsmModel, StateSpaceError> {
    for v in m2.variables() {
        if m1.variables().contains(v) {
            return Err(StateSpaceError::VariableCollision(v.clone()));
        }
    }
    if m1.d_w() != m2.d_w() {
        return Err(StateSpaceError::MismatchedDegree(m1.d_w(), m2.d_w()));
    }
    for m in [m1, m2] {
        if m.torus_rank() > 0 {
            return Err(OrbifoldError::NotAffine { rank: m.torus_rank() }.into());
        }
    }
    let names: Vec<&str> = m1.variables().iter().chain(m2.variables()).map(String::as_str).collect();
    let ring = MultiPoly::ring(&names);
    let w = m1.potential().embed(&ring)?.add(&m2.potential().embed(&ring)?);
    let (n1, n2) = (m1.n_vars(), m2.n_vars());
    let mut gens: Vec<Vec<Rational>> = Vec::new();
    for g in m1.finite_generators() {
        gens.push(g.phases().iter().cloned().chain(std::iter::repeat(Rational::zero()).take(n2)).collect());
    }
    for g in m2.finite_generators() {
        gens.push(std::iter::repeat(Rational::zero()).take(n1).chain(g.phases().iter().cloned()).collect());
    }
    let charges: Vec<Rational> = m1.r_charges().iter().chain(m2.r_charges()).cloned().collect();
    Ok(GlsmModel::landau_ginzburg(&names, &w.to_string(), &charges, m1.d_w(), gens)?)
}

/// Builds the sum model's state space independently and matches it with `𝓗₁ ⊗ 𝓗₂`.
pub fn kunneth_sum(
    m1: &GlsmModel,
    m2: &GlsmModel,
    group_bound: usize,
    pairing_size_bound: usize,
) -> Result<KunnethWitness, StateSpaceError> {
    let sum = sum_model(m1, m2)?;
    let s1 = StateSpace::new(m1, group_bound)?;
    let s2 = StateSpace::new(m2, group_bound)?;
    let s = StateSpace::new(&sum, group_bound)?;
    let n1 = m1.n_vars();
    let mut entries = Vec::new();
    for (i1, a) in s1.sectors().iter().enumerate() {
        for (i2, b) in s2.sectors().iter().enumerate() {
            let h: Vec<Rational> = a.sector.element.phases().iter().chain(b.sector.element.phases()).cloned().collect();
            let h = GroupElement::new(h);
            let k = s.sector_index(&h).ok_or_else(|| StateSpaceError::UnknownSector(h.to_string()))?;
            let c = &s.sectors()[k];
            // fixed variables of the sum are F₁ followed by F₂ (shifted)
            let product: HashSet<Monomial> = a
                .basis
                .iter()
                .flat_map(|x| b.basis.iter().map(move |y| Monomial(x.exps().iter().chain(y.exps()).copied().collect())))
                .collect();
            let basis_matches = c.dim() == product.len() && c.basis.iter().all(|m| product.contains(m));
            let kappa = match (a.narrow(), b.narrow()) {
                (true, false) => Rational::new(1.into(), s1.group_order().into()),
                (false, true) => Rational::new(1.into(), s2.group_order().into()),
                _ => Rational::one(),
            };
            let pairing_checked = basis_matches && c.dim() <= pairing_size_bound;
            let pairing_matches = pairing_checked && {
                let (j1, j2) = (s1.inverse_index(i1), s2.inverse_index(i2));
                let kk = s.inverse_index(k);
                let pos = |sec: &SectorSpace, x: &Monomial, y: &Monomial| -> usize {
                    let m = Monomial(x.exps().iter().chain(y.exps()).copied().collect());
                    sec.basis.iter().position(|z| *z == m).unwrap()
                };
                let (t1, t2, tk) = (&s1.sectors()[j1], &s2.sectors()[j2], &s.sectors()[kk]);
                let mut ok = true;
                'outer: for (x1, mx1) in a.basis.iter().enumerate() {
                    for (x2, mx2) in b.basis.iter().enumerate() {
                        for (y1, my1) in t1.basis.iter().enumerate() {
                            for (y2, my2) in t2.basis.iter().enumerate() {
                                let lhs = s.basis_pairing(k, pos(c, mx1, mx2), kk, pos(tk, my1, my2));
                                let rhs = (&s1.basis_pairing(i1, x1, j1, y1) * &s2.basis_pairing(i2, x2, j2, y2)).scale(&kappa);
                                if lhs != rhs {
                                    ok = false;
                                    break 'outer;
                                }
                            }
                        }
                    }
                }
                ok
            };
            let _ = n1;
            entries.push(KunnethEntry {
                h1: a.sector.element.to_strings(),
                h2: b.sector.element.to_strings(),
                dim1: a.dim(),
                dim2: b.dim(),
                dim_sum: c.dim(),
                degree_sum: fmt_rational(&c.degree),
                degrees_add: c.degree == &a.degree + &b.degree,
                basis_matches,
                pairing_checked,
                pairing_matches,
                kappa: fmt_rational(&kappa),
            });
        }
    }
    Ok(KunnethWitness {
        sum_model: sum,
        state: s,
        entries,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::exactalg::parse::parse_poly;
    use crate::exactalg::rational::{int, rat};
    use crate::orbifold::DEFAULT_GROUP_ORDER_BOUND;

    pub(crate) fn quintic() -> GlsmModel {
        GlsmModel::landau_ginzburg(
            &["x1", "x2", "x3", "x4", "x5"],
            "x1^5+x2^5+x3^5+x4^5+x5^5",
            &vec![int(1); 5],
            5,
            vec![vec![rat(1, 5); 5]],
        )
        .unwrap()
    }

    fn lg(vars: &[&str], w: &str, c: &[Rational], d: u32, gens: Vec<Vec<Rational>>) -> GlsmModel {
        GlsmModel::landau_ginzburg(vars, w, c, d, gens).unwrap()
    }

    #[test]
    fn residues() {
        let r = MultiPoly::ring(&["x"]);
        let w = parse_poly("x^3", &r).unwrap();
        assert_eq!(residue(&parse_poly("x", &r).unwrap(), &w).unwrap(), Coeff::from(rat(1, 3)));
        assert_eq!(residue(&parse_poly("6*x", &r).unwrap(), &w).unwrap(), Coeff::from_i64(2));
        assert!(residue(&parse_poly("1", &r).unwrap(), &w).unwrap().is_zero());

        let vars = ["x1", "x2", "x3", "x4", "x5"];
        let r5 = MultiPoly::ring(&vars);
        let w5 = parse_poly("x1^5+x2^5+x3^5+x4^5+x5^5", &r5).unwrap();
        let p = parse_poly("x1^3*x2^3*x3^3*x4^3*x5^3", &r5).unwrap();
        // oracle: product of univariate residues res(x^3 dx / 5x^4) = 1/5
        let oracle: Rational = (0..5).map(|_| rat(1, 5)).product();
        assert_eq!(residue(&p, &w5).unwrap(), Coeff::from(oracle));
        let hess = p.scale_rational(&int(20i64.pow(5)));
        assert_eq!(residue(&hess, &w5).unwrap(), Coeff::from_i64(1024));

        let r2 = MultiPoly::ring(&["x", "y"]);
        assert!(matches!(
            residue(&MultiPoly::one(r2.clone()), &parse_poly("x^2*y", &r2).unwrap()),
            Err(AlgebraError::NonIsolated)
        ));
    }

    #[test]
    fn quintic_state_space() {
        let s = StateSpace::new(&quintic(), DEFAULT_GROUP_ORDER_BOUND).unwrap();
        assert_eq!(s.dims(), vec![204, 1, 1, 1, 1]);
        let broad = &s.sectors()[0];
        let hist = broad.poly_degree_histogram();
        assert_eq!(hist, BTreeMap::from([("0".into(), 1), ("5".into(), 101), ("10".into(), 101), ("15".into(), 1)]));
        assert_eq!(broad.degree, int(3));
        let narrow: Vec<Rational> = s.sectors()[1..].iter().map(|x| x.degree.clone()).collect();
        assert_eq!(narrow, vec![int(0), int(2), int(4), int(6)]);
        assert_eq!(s.total_dim(), 208);
        let h: Vec<(Rational, usize)> = s.degree_histogram().into_iter().collect();
        assert_eq!(h, vec![(int(0), 1), (int(2), 1), (int(3), 204), (int(4), 1), (int(6), 1)]);
    }

    #[test]
    fn quintic_pairing() {
        let s = StateSpace::new(&quintic(), DEFAULT_GROUP_ORDER_BOUND).unwrap();
        s.check_nondegenerate().unwrap();
        for k in 1..5 {
            let a = s.basis_vector(k, 0);
            let b = s.basis_vector(s.inverse_index(k), 0);
            assert_eq!(s.pairing(&a, &b).unwrap(), Coeff::one());
        }
        let x1 = s.basis_vector(1, 0);
        assert!(s.pairing(&x1, &x1).unwrap().is_zero());
        // inv* of ∏x_i^3 picks up ζ^20 = 1
        let top = s.sectors()[0].basis.iter().position(|m| m.exps() == [3, 3, 3, 3, 3]).unwrap();
        assert_eq!(s.inv_factor(0, top), CyclotomicNumber::zeta_pow(10, 20));
        // narrow inv* is the identity scalar on the partner sector
        let v = s.inv_pullback(&x1).unwrap();
        assert_eq!(v.sector, s.group()[4]);
        assert_eq!(v.coeffs, vec![Coeff::one()]);
    }

    #[test]
    fn small_examples() {
        let a1 = lg(&["x"], "x^2", &[int(1)], 2, vec![]);
        let s = StateSpace::new(&a1, 10).unwrap();
        assert_eq!(s.dims(), vec![1]);
        let z2 = lg(&["x", "y"], "x^2+y^2", &[int(1), int(1)], 2, vec![vec![rat(1, 2), int(0)]]);
        let s = StateSpace::new(&z2, 10).unwrap();
        assert_eq!(s.sectors()[1].sector.fixed_support, vec![1]);
        let bad = lg(&["x", "y"], "x^2*y", &[int(1), int(1)], 3, vec![]);
        assert!(matches!(StateSpace::new(&bad, 10), Err(StateSpaceError::NonIsolated { .. })));
    }

    #[test]
    fn kunneth_examples() {
        let a = lg(&["x"], "x^3", &[int(1)], 3, vec![]);
        let b = lg(&["y"], "y^3", &[int(1)], 3, vec![]);
        let w = kunneth_sum(&a, &b, 100, 64).unwrap();
        assert_eq!(w.state.total_dim(), 4);
        assert!(w.is_isomorphism());
        assert!(matches!(kunneth_sum(&a, &a, 100, 64), Err(StateSpaceError::VariableCollision(_))));
        let c = lg(&["z"], "z^2", &[int(1)], 2, vec![]);
        assert!(matches!(kunneth_sum(&a, &c, 100, 64), Err(StateSpaceError::MismatchedDegree(3, 2))));
    }

    #[test]
    fn kunneth_with_groups() {
        let a = lg(&["x"], "x^3", &[int(1)], 3, vec![vec![rat(1, 3)]]);
        let b = lg(&["y", "z"], "y^3+z^3", &[int(1), int(1)], 3, vec![vec![rat(1, 3), rat(1, 3)]]);
        let w = kunneth_sum(&a, &b, 100, 64).unwrap();
        assert!(w.is_isomorphism(), "{:?}", w.entries);
        assert!(w.entries.iter().all(|e| e.pairing_checked));
        // A1 factor with matching d_w shifts no degrees
        let a1 = lg(&["u"], "u^2", &[rat(3, 2)], 3, vec![]);
        let w = kunneth_sum(&b, &a1, 100, 64).unwrap();
        assert!(w.is_isomorphism());
        let sb = StateSpace::new(&b, 100).unwrap();
        assert_eq!(w.state.degree_histogram(), sb.degree_histogram());
    }
}
