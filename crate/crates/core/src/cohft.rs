//! Finite-dimensional CohFT data and checks of its axioms: metric, selection
//! rules, `S_r`-covariance, tree and loop gluing, forgetting tails, together
//! with the homogeneity shift and the virtual dimension.
//!
//! `H*(M̄_{0,3}) = ℚ`; `H*(M̄_{0,4})` and `H*(M̄_{1,1})` are modelled as `ℚ²`
//! (a degree-0 and a degree-1 class, in complex degree). Boundary pullbacks
//! are supplied as linear functionals / vectors in [`Pullbacks`].

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::linalg::Matrix;
use crate::exactalg::poly::Coeff;
use crate::exactalg::rational::{fmt_rational, int, Rational};
use crate::glsm::{GlsmModel, Num};
use crate::orbifold::GroupElement;
use crate::statespace::{StateSpace, StateSpaceError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CohftError {
    #[error("missing table {0}")]
    MissingTable(&'static str),
    #[error("missing unit")]
    MissingUnit,
    #[error("malformed data: {0}")]
    Shape(String),
    #[error("pairing is degenerate")]
    Singular,
    #[error("dual bases fail the Casimir identity on sector {0}")]
    Casimir(String),
    #[error(transparent)]
    StateSpace(#[from] StateSpaceError),
}

/// `∫_d c₁ + (ĉ − 3)(1 − g) + r − ∑ (age(h_i) − q)`.
pub fn virdim(model: &GlsmModel, g: u32, r: u32, d_pairing: &Rational, insertions: &[GroupElement]) -> Rational {
    let q = model.q();
    let genus_term = (model.c_hat() - int(3)) * (int(1) - int(g as i64));
    let ages: Rational = insertions.iter().map(|h| h.age() - &q).sum();
    d_pairing + genus_term + int(r as i64) - ages
}

/// `−2(∫_d c₁ + (1 − g)ĉ)`.
pub fn homogeneity_shift(model: &GlsmModel, g: u32, d_pairing: &Rational) -> Rational {
    shift(&model.c_hat(), g, d_pairing)
}

fn shift(c_hat: &Rational, g: u32, d_pairing: &Rational) -> Rational {
    int(-2) * (d_pairing + (int(1) - int(g as i64)) * c_hat)
}

/// Dual basis of one sector: `T_h^j = ∑_c dual[(c, j)] e_c` in the inverse
/// sector, normalized by `η(T_h^j, T^h_k) = δ_{jk}`.
#[derive(Clone, Debug)]
pub struct SectorDuals {
    pub sector: usize,
    pub partner: usize,
    pub dual: Matrix<Coeff>,
}

/// Dual bases for every sector, each verified against the Casimir identity
/// `η(a, b) = ∑_j η(a, T^h_j) η(T_h^j, b)`.
pub fn dual_bases(state: &StateSpace) -> Result<Vec<SectorDuals>, CohftError> {
    let mut out = Vec::new();
    for i in 0..state.sectors().len() {
        let p = state.inverse_index(i);
        let gp = state.gram(p);
        let inv = gp.inverse().ok_or(CohftError::Singular)?;
        let dual = inv.transpose();
        // (G_p C^T G_p) = G_p
        if gp.mul(&dual.transpose()).mul(gp) != *gp {
            return Err(CohftError::Casimir(state.group()[i].to_string()));
        }
        out.push(SectorDuals { sector: i, partner: p, dual });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisElement {
    pub label: String,
    pub sector: GroupElement,
    pub degree: Rational,
    pub parity: u32,
}

/// A correlator table: basis-index tuples ↦ coefficients on `H*(M̄_{g,r})`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub values: BTreeMap<Vec<usize>, Vec<Coeff>>,
}

impl Table {
    pub fn get(&self, t: &[usize], width: usize) -> Vec<Coeff> {
        self.values.get(t).cloned().unwrap_or_else(|| vec![Coeff::zero(); width])
    }

    pub fn set(&mut self, t: Vec<usize>, v: Vec<Coeff>) {
        if v.iter().all(Coeff::is_zero) {
            self.values.remove(&t);
        } else {
            self.values.insert(t, v);
        }
    }

    /// Multilinear evaluation on vectors of coefficients.
    pub fn eval(&self, args: &[&[Coeff]], width: usize) -> Vec<Coeff> {
        let mut out = vec![Coeff::zero(); width];
        for (t, v) in &self.values {
            let mut c = Coeff::one();
            for (k, &i) in t.iter().enumerate() {
                c = &c * &args[k][i];
                if c.is_zero() {
                    break;
                }
            }
            if !c.is_zero() {
                for (o, x) in out.iter_mut().zip(v) {
                    *o = &*o + &(&c * x);
                }
            }
        }
        out
    }
}

/// Boundary and forgetful pullbacks on the modelled cohomology rings.
#[derive(Clone, Debug, PartialEq)]
pub struct Pullbacks {
    /// `ρ_t^* : H*(M̄_{0,4}) → H*(M̄_{0,3} × M̄_{0,3}) = ℚ`
    pub tree: Vec<Coeff>,
    /// `ρ_l^* : H*(M̄_{1,1}) → H*(M̄_{0,3}) = ℚ`
    pub loop_: Vec<Coeff>,
    /// `ρ_f^*(1) ∈ H*(M̄_{0,4})`
    pub tails: Vec<Coeff>,
}

impl Default for Pullbacks {
    fn default() -> Self {
        let e0 = vec![Coeff::one(), Coeff::zero()];
        Pullbacks {
            tree: e0.clone(),
            loop_: e0.clone(),
            tails: e0,
        }
    }
}

/// Complex degrees of the modelled cohomology classes.
pub const DEGREES_0_3: [u32; 1] = [0];
pub const DEGREES_0_4: [u32; 2] = [0, 1];
pub const DEGREES_1_1: [u32; 2] = [0, 1];

#[derive(Clone, Debug)]
pub struct CohftData {
    pub basis: Vec<BasisElement>,
    /// `η(e_a, e_b)`
    pub metric: Matrix<Coeff>,
    pub unit: Option<Vec<Coeff>>,
    pub c_hat: Rational,
    pub d_pairing: Rational,
    pub omega_0_3: Option<Table>,
    pub omega_0_4: Option<Table>,
    pub omega_1_1: Option<Table>,
    pub pullbacks: Pullbacks,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    pub axiom: String,
    pub tuple: Vec<usize>,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CheckReport {
    pub entries: Vec<ReportEntry>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> Vec<&ReportEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    fn push(&mut self, axiom: &str, tuple: Vec<usize>, lhs: &[Coeff], rhs: &[Coeff]) {
        self.entries.push(ReportEntry {
            axiom: axiom.to_string(),
            tuple,
            lhs: fmt_vec(lhs),
            rhs: fmt_vec(rhs),
            pass: lhs == rhs,
        });
    }
}

fn fmt_vec(v: &[Coeff]) -> String {
    if v.len() == 1 {
        return v[0].to_string();
    }
    format!("({})", v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))
}

fn unit_vec(n: usize, i: usize) -> Vec<Coeff> {
    let mut v = vec![Coeff::zero(); n];
    v[i] = Coeff::one();
    v
}

fn tuples(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut s = t.clone();
                    s.push(i);
                    s
                })
            })
            .collect();
    }
    out
}

/// A commutative Frobenius algebra with a basis, used to generate consistent tables.
#[derive(Clone, Debug)]
pub struct FrobeniusAlgebra {
    pub labels: Vec<String>,
    /// `e_a e_b = ∑_c mult[a][b][c] e_c`
    pub mult: Vec<Vec<Vec<Rational>>>,
    pub counit: Vec<Rational>,
    pub unit: Vec<Rational>,
    pub degrees: Vec<Rational>,
    pub sectors: Vec<GroupElement>,
    pub c_hat: Rational,
}

impl FrobeniusAlgebra {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn product(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let n = self.dim();
        let mut out = vec![Rational::zero(); n];
        for a in 0..n {
            for b in 0..n {
                if x[a].is_zero() || y[b].is_zero() {
                    continue;
                }
                for c in 0..n {
                    out[c] += &x[a] * &y[b] * &self.mult[a][b][c];
                }
            }
        }
        out
    }

    pub fn epsilon(&self, x: &[Rational]) -> Rational {
        x.iter().zip(&self.counit).map(|(a, b)| a * b).sum()
    }

    fn basis(&self, a: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        v[a] = Rational::one();
        v
    }

    /// `ℚ[x]/(x^k)` with `ε(x^{k−1}) = 1`; sectors `J^1..J^k` of a `μ_{k+1}` action.
    pub fn truncated(k: usize, step: Rational, c_hat: Rational) -> Self {
        let mut mult = vec![vec![vec![Rational::zero(); k]; k]; k];
        for (a, row) in mult.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                if a + b < k {
                    v[a + b] = Rational::one();
                }
            }
        }
        let mut counit = vec![Rational::zero(); k];
        counit[k - 1] = Rational::one();
        let mut unit = vec![Rational::zero(); k];
        unit[0] = Rational::one();
        let order = (k + 1) as i64;
        FrobeniusAlgebra {
            labels: (1..=k).map(|i| format!("e{i}")).collect(),
            mult,
            counit,
            unit,
            degrees: (0..k).map(|a| &step * int(a as i64)).collect(),
            sectors: (1..=k)
                .map(|i| GroupElement::new(vec![Rational::new((i as i64).into(), order.into())]))
                .collect(),
            c_hat,
        }
    }

    /// `ℚ[x]/(x³ − 2x)` with `ε(x²) = 1`: non-symmetric Gram, non-trivial handle element.
    pub fn toy() -> Self {
        let z = Rational::zero;
        let o = Rational::one;
        // basis 1, x, x²;  x·x² = 2x, x²·x² = 2x²
        let mult = vec![
            vec![vec![o(), z(), z()], vec![z(), o(), z()], vec![z(), z(), o()]],
            vec![vec![z(), o(), z()], vec![z(), z(), o()], vec![z(), int(2), z()]],
            vec![vec![z(), z(), o()], vec![z(), int(2), z()], vec![z(), z(), int(2)]],
        ];
        FrobeniusAlgebra {
            labels: vec!["1".into(), "x".into(), "x^2".into()],
            mult,
            counit: vec![z(), z(), o()],
            unit: vec![o(), z(), z()],
            degrees: vec![z(), z(), z()],
            sectors: vec![GroupElement::identity(1); 3],
            c_hat: z(),
        }
    }

    /// Tables `Ω_{0,3}(a,b,c) = ε(abc)`, `Ω_{0,4} = (ε(abcd), 0)`, `Ω_{1,1}(a) = (ε(aE), 0)`.
    pub fn cohft_data(&self) -> Result<CohftData, CohftError> {
        let n = self.dim();
        let c = |r: Rational| Coeff::from(r);
        let metric = Matrix::from_fn(n, n, |a, b| c(self.epsilon(&self.product(&self.basis(a), &self.basis(b)))));
        let mut data = CohftData {
            basis: (0..n)
                .map(|a| BasisElement {
                    label: self.labels[a].clone(),
                    sector: self.sectors[a].clone(),
                    degree: self.degrees[a].clone(),
                    parity: 0,
                })
                .collect(),
            metric,
            unit: Some(self.unit.iter().cloned().map(c).collect()),
            c_hat: self.c_hat.clone(),
            d_pairing: Rational::zero(),
            omega_0_3: None,
            omega_0_4: None,
            omega_1_1: None,
            pullbacks: Pullbacks::default(),
        };
        let dual = data.dual_basis()?;
        let mut o3 = Table::default();
        let mut o4 = Table::default();
        for t in tuples(n, 2) {
            let ab = self.product(&self.basis(t[0]), &self.basis(t[1]));
            for x in 0..n {
                let abc = self.product(&ab, &self.basis(x));
                o3.set(vec![t[0], t[1], x], vec![c(self.epsilon(&abc))]);
                for y in 0..n {
                    let v = self.epsilon(&self.product(&abc, &self.basis(y)));
                    o4.set(vec![t[0], t[1], x, y], vec![c(v), Coeff::zero()]);
                }
            }
        }
        // handle element E = ∑_j e_j T^j
        let mut handle = vec![Rational::zero(); n];
        for j in 0..n {
            let tj: Vec<Rational> = (0..n)
                .map(|b| dual[(b, j)].to_rational().ok_or(CohftError::Shape("irrational dual basis".into())))
                .collect::<Result<_, _>>()?;
            for (h, v) in handle.iter_mut().zip(self.product(&self.basis(j), &tj)) {
                *h += v;
            }
        }
        let mut o11 = Table::default();
        for a in 0..n {
            o11.set(vec![a], vec![c(self.epsilon(&self.product(&self.basis(a), &handle))), Coeff::zero()]);
        }
        data.omega_0_3 = Some(o3);
        data.omega_0_4 = Some(o4);
        data.omega_1_1 = Some(o11);
        Ok(data)
    }
}

/// Narrow sectors `J^1..J^{d_w−1}` of a state space, with the tables of
/// `ℚ[x]/(x^{d_w−1})` on `e_k = x^{k−1} ↦ J^k` and the unit class on `J`.
/// The Gram matrix read from the state space must equal `δ_{a+b, d_w}`.
pub fn narrow_sector_data(state: &StateSpace, unit: &[Coeff]) -> Result<CohftData, CohftError> {
    let model = state.model();
    let d = model.d_w() as usize;
    let j = model.j();
    let mut idx = Vec::new();
    for k in 1..d {
        let h = j.pow(k as i64);
        let i = state.sector_index(&h).ok_or_else(|| StateSpaceError::UnknownSector(h.to_string()))?;
        if !state.sectors()[i].narrow() {
            return Err(CohftError::Shape(format!("sector {h} is broad")));
        }
        idx.push(i);
    }
    if unit.len() != 1 {
        return Err(CohftError::Shape("unit must be a narrow class on J".into()));
    }
    let alg = FrobeniusAlgebra::truncated(d - 1, int(2), model.c_hat());
    let mut data = alg.cohft_data()?;
    for (k, &i) in idx.iter().enumerate() {
        let s = &state.sectors()[i];
        data.basis[k] = BasisElement {
            label: format!("xi^{}", k + 1),
            sector: state.group()[i].clone(),
            degree: s.degree.clone(),
            parity: s.parity(),
        };
    }
    let metric = Matrix::from_fn(idx.len(), idx.len(), |a, b| state.basis_pairing(idx[a], 0, idx[b], 0));
    if metric != data.metric {
        return Err(CohftError::Shape("narrow pairing is not δ_{a+b,d_w}".into()));
    }
    let mut u = vec![Coeff::zero(); idx.len()];
    u[0] = unit[0].clone();
    data.unit = Some(u);
    Ok(data)
}

impl CohftData {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Column `j` gives `T^j` with `η(T^j, e_i) = δ_{ij}`.
    pub fn dual_basis(&self) -> Result<Matrix<Coeff>, CohftError> {
        Ok(self.metric.inverse().ok_or(CohftError::Singular)?.transpose())
    }

    fn table(&self, which: &'static str) -> Result<&Table, CohftError> {
        match which {
            "omega_0_3" => self.omega_0_3.as_ref(),
            "omega_0_4" => self.omega_0_4.as_ref(),
            _ => self.omega_1_1.as_ref(),
        }
        .ok_or(CohftError::MissingTable(which))
    }

    fn unit(&self) -> Result<&[Coeff], CohftError> {
        self.unit.as_deref().ok_or(CohftError::MissingUnit)
    }

    fn e(&self, i: usize) -> Vec<Coeff> {
        unit_vec(self.dim(), i)
    }

    /// `Ω_{0,3}(γ₁, γ₂, 𝟙) = η(γ₁, γ₂)`.
    pub fn check_metric_axiom(&self) -> Result<CheckReport, CohftError> {
        let o3 = self.table("omega_0_3")?;
        let u = self.unit()?;
        let mut rep = CheckReport::default();
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                let lhs = o3.eval(&[&self.e(a), &self.e(b), u], 1);
                rep.push("metric", vec![a, b], &lhs, &[self.metric[(a, b)].clone()]);
            }
        }
        Ok(rep)
    }

    /// `Ω_{0,3}(γ_{h₁}, γ_{h₂}, 𝟙) ≠ 0 ⇒ h₁h₂ = 1`, and `∑ deg γ_i + shift = 2·deg` on every entry.
    pub fn check_selection_rules(&self) -> Result<CheckReport, CohftError> {
        let mut rep = CheckReport::default();
        let bad = [Coeff::zero()];
        if let (Some(o3), Some(u)) = (&self.omega_0_3, &self.unit) {
            for a in 0..self.dim() {
                for b in 0..self.dim() {
                    let v = o3.eval(&[&self.e(a), &self.e(b), u], 1);
                    if v[0].is_zero() {
                        continue;
                    }
                    let trivial = self.basis[a].sector.mul(&self.basis[b].sector).is_identity();
                    rep.push("selection_h1h2", vec![a, b], &v, if trivial { &v } else { &bad });
                }
            }
        }
        let tables: [(&str, u32, &Option<Table>, &[u32]); 3] = [
            ("degree_0_3", 0, &self.omega_0_3, &DEGREES_0_3),
            ("degree_0_4", 0, &self.omega_0_4, &DEGREES_0_4),
            ("degree_1_1", 1, &self.omega_1_1, &DEGREES_1_1),
        ];
        for (name, g, table, degrees) in tables {
            let Some(t) = table else { continue };
            let s = shift(&self.c_hat, g, &self.d_pairing);
            for (tuple, v) in &t.values {
                let total: Rational = tuple.iter().map(|&i| self.basis[i].degree.clone()).sum::<Rational>() + &s;
                for (k, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let want = int(2 * degrees[k] as i64);
                    let mut t2 = tuple.clone();
                    t2.push(k);
                    rep.entries.push(ReportEntry {
                        axiom: name.to_string(),
                        tuple: t2,
                        lhs: fmt_rational(&total),
                        rhs: fmt_rational(&want),
                        pass: total == want,
                    });
                }
            }
        }
        Ok(rep)
    }

    /// `Ω(…, γ_{i+1}, γ_i, …) = (−1)^{|γ_i||γ_{i+1}|} Ω(…, γ_i, γ_{i+1}, …)`.
    pub fn check_sr_covariance(&self) -> Result<CheckReport, CohftError> {
        let mut rep = CheckReport::default();
        for (name, table, width) in [("sr_0_3", &self.omega_0_3, 1), ("sr_0_4", &self.omega_0_4, 2)] {
            let Some(t) = table else { continue };
            for tuple in t.values.keys() {
                for i in 0..tuple.len() - 1 {
                    let mut sw = tuple.clone();
                    sw.swap(i, i + 1);
                    let sign = self.basis[tuple[i]].parity * self.basis[tuple[i + 1]].parity % 2 == 1;
                    let lhs = t.get(&sw, width);
                    let rhs: Vec<Coeff> = t.get(tuple, width).iter().map(|c| if sign { -c } else { c.clone() }).collect();
                    let mut tag = tuple.clone();
                    tag.push(i);
                    rep.push(name, tag, &lhs, &rhs);
                }
            }
        }
        Ok(rep)
    }

    /// `ρ_t^*Ω_{0,4}(γ₁..γ₄) = ∑_j Ω_{0,3}(γ₁, γ₂, T_j) Ω_{0,3}(γ₃, γ₄, T^j)`.
    pub fn check_tree_gluing(&self) -> Result<CheckReport, CohftError> {
        let o3 = self.table("omega_0_3")?;
        let o4 = self.table("omega_0_4")?;
        let dual = self.dual_basis()?;
        let n = self.dim();
        let duals: Vec<Vec<Coeff>> = (0..n).map(|j| (0..n).map(|b| dual[(b, j)].clone()).collect()).collect();
        let left: BTreeMap<(usize, usize), Vec<Coeff>> = tuples(n, 2)
            .into_iter()
            .map(|t| ((t[0], t[1]), (0..n).map(|j| o3.eval(&[&self.e(t[0]), &self.e(t[1]), &self.e(j)], 1)[0].clone()).collect()))
            .collect();
        let right: BTreeMap<(usize, usize), Vec<Coeff>> = tuples(n, 2)
            .into_iter()
            .map(|t| ((t[0], t[1]), (0..n).map(|j| o3.eval(&[&self.e(t[0]), &self.e(t[1]), &duals[j]], 1)[0].clone()).collect()))
            .collect();
        let mut rep = CheckReport::default();
        for t in tuples(n, 4) {
            let v = o4.get(&t, 2);
            let lhs = dot(&self.pullbacks.tree, &v);
            let rhs = dot(&left[&(t[0], t[1])], &right[&(t[2], t[3])]);
            rep.push("tree", t, &[lhs], &[rhs]);
        }
        Ok(rep)
    }

    /// `ρ_l^*Ω_{1,1}(γ) = ∑_j Ω_{0,3}(γ, T_j, T^j)`.
    pub fn check_loop_gluing(&self) -> Result<CheckReport, CohftError> {
        let o3 = self.table("omega_0_3")?;
        let o11 = self.table("omega_1_1")?;
        let dual = self.dual_basis()?;
        let n = self.dim();
        let mut rep = CheckReport::default();
        for a in 0..n {
            let lhs = dot(&self.pullbacks.loop_, &o11.get(&[a], 2));
            let mut rhs = Coeff::zero();
            for j in 0..n {
                let tj: Vec<Coeff> = (0..n).map(|b| dual[(b, j)].clone()).collect();
                rhs = &rhs + &o3.eval(&[&self.e(a), &self.e(j), &tj], 1)[0];
            }
            rep.push("loop", vec![a], &[lhs], &[rhs]);
        }
        Ok(rep)
    }

    /// `ρ_f^*Ω_{0,3}(γ₁, γ₂, γ₃) = Ω_{0,4}(γ₁, γ₂, γ₃, 𝟙)`.
    pub fn check_forgetting_tails(&self) -> Result<CheckReport, CohftError> {
        let o3 = self.table("omega_0_3")?;
        let o4 = self.table("omega_0_4")?;
        let u = self.unit()?;
        let n = self.dim();
        let mut rep = CheckReport::default();
        for t in tuples(n, 3) {
            let v = o3.get(&t, 1)[0].clone();
            let lhs: Vec<Coeff> = self.pullbacks.tails.iter().map(|c| c * &v).collect();
            let rhs = o4.eval(&[&self.e(t[0]), &self.e(t[1]), &self.e(t[2]), u], 2);
            rep.push("tails", t, &lhs, &rhs);
        }
        Ok(rep)
    }

    /// Runs every check; a missing table skips the checks that need it.
    pub fn check_all(&self) -> BTreeMap<&'static str, Result<CheckReport, CohftError>> {
        BTreeMap::from([
            ("metric", self.check_metric_axiom()),
            ("selection", self.check_selection_rules()),
            ("sr_covariance", self.check_sr_covariance()),
            ("tree_gluing", self.check_tree_gluing()),
            ("loop_gluing", self.check_loop_gluing()),
            ("forgetting_tails", self.check_forgetting_tails()),
        ])
    }

    /// Adds `delta` to one stored coefficient.
    pub fn perturb(&mut self, table: &str, tuple: &[usize], component: usize, delta: &Coeff) {
        let (t, width) = match table {
            "omega_0_3" => (self.omega_0_3.get_or_insert_with(Table::default), 1),
            "omega_0_4" => (self.omega_0_4.get_or_insert_with(Table::default), 2),
            _ => (self.omega_1_1.get_or_insert_with(Table::default), 2),
        };
        let mut v = t.get(tuple, width);
        v[component] = &v[component] + delta;
        t.set(tuple.to_vec(), v);
    }

    pub fn from_config(cfg: &CohftConfig) -> Result<Self, CohftError> {
        let num = |x: &Num| x.to_rational().map(Coeff::from).map_err(|e| CohftError::Shape(e.to_string()));
        let n = cfg.basis.len();
        let basis = cfg
            .basis
            .iter()
            .map(|b| {
                Ok(BasisElement {
                    label: b.label.clone(),
                    sector: GroupElement::new(b.sector.iter().map(|x| x.to_rational()).collect::<Result<_, _>>().map_err(|e| CohftError::Shape(e.to_string()))?),
                    degree: b.degree.to_rational().map_err(|e| CohftError::Shape(e.to_string()))?,
                    parity: b.parity,
                })
            })
            .collect::<Result<Vec<_>, CohftError>>()?;
        if cfg.metric.len() != n || cfg.metric.iter().any(|r| r.len() != n) {
            return Err(CohftError::Shape("metric must be square over the basis".into()));
        }
        let rows: Vec<Vec<Coeff>> = cfg.metric.iter().map(|r| r.iter().map(num).collect()).collect::<Result<_, _>>()?;
        let vec_of = |v: &[Num], len: usize, what: &str| -> Result<Vec<Coeff>, CohftError> {
            if v.len() != len {
                return Err(CohftError::Shape(format!("{what} needs {len} entries")));
            }
            v.iter().map(num).collect()
        };
        let table = |entries: &Option<Vec<TableEntry>>, arity: usize, width: usize| -> Result<Option<Table>, CohftError> {
            let Some(es) = entries else { return Ok(None) };
            let mut t = Table::default();
            for e in es {
                if e.tuple.len() != arity || e.tuple.iter().any(|&i| i >= n) {
                    return Err(CohftError::Shape(format!("bad tuple {:?}", e.tuple)));
                }
                t.set(e.tuple.clone(), vec_of(&e.value, width, "table value")?);
            }
            Ok(Some(t))
        };
        let pb = match &cfg.pullbacks {
            None => Pullbacks::default(),
            Some(p) => Pullbacks {
                tree: vec_of(&p.tree, 2, "tree pullback")?,
                loop_: vec_of(&p.loop_, 2, "loop pullback")?,
                tails: vec_of(&p.tails, 2, "tails pullback")?,
            },
        };
        Ok(CohftData {
            basis,
            metric: Matrix::from_rows(rows),
            unit: cfg.unit.as_ref().map(|u| vec_of(u, n, "unit")).transpose()?,
            c_hat: cfg.c_hat.to_rational().map_err(|e| CohftError::Shape(e.to_string()))?,
            d_pairing: cfg.d_pairing.as_ref().map(|d| d.to_rational()).transpose().map_err(|e| CohftError::Shape(e.to_string()))?.unwrap_or_default(),
            omega_0_3: table(&cfg.omega_0_3, 3, 1)?,
            omega_0_4: table(&cfg.omega_0_4, 4, 2)?,
            omega_1_1: table(&cfg.omega_1_1, 1, 2)?,
            pullbacks: pb,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CohftError> {
        let cfg: CohftConfig = serde_json::from_str(text).map_err(|e| CohftError::Shape(e.to_string()))?;
        Self::from_config(&cfg)
    }
}

fn dot(a: &[Coeff], b: &[Coeff]) -> Coeff {
    a.iter().zip(b).fold(Coeff::zero(), |s, (x, y)| &s + &(x * y))
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct BasisSpec {
    pub label: String,
    /// phases of the sector's group element
    pub sector: Vec<Num>,
    pub degree: Num,
    #[serde(default)]
    pub parity: u32,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct TableEntry {
    pub tuple: Vec<usize>,
    pub value: Vec<Num>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct PullbackSpec {
    pub tree: Vec<Num>,
    #[serde(rename = "loop")]
    pub loop_: Vec<Num>,
    pub tails: Vec<Num>,
}

/// JSON schema for rational CohFT tables.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct CohftConfig {
    pub basis: Vec<BasisSpec>,
    pub metric: Vec<Vec<Num>>,
    #[serde(default)]
    pub unit: Option<Vec<Num>>,
    pub c_hat: Num,
    #[serde(default)]
    pub d_pairing: Option<Num>,
    #[serde(default)]
    pub omega_0_3: Option<Vec<TableEntry>>,
    #[serde(default)]
    pub omega_0_4: Option<Vec<TableEntry>>,
    #[serde(default)]
    pub omega_1_1: Option<Vec<TableEntry>>,
    #[serde(default)]
    pub pullbacks: Option<PullbackSpec>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::rat;
    use crate::matfact::unit_class;
    use crate::statespace::tests::quintic;
    use proptest::prelude::*;

    fn all_pass(d: &CohftData) {
        for (name, r) in d.check_all() {
            let r = r.unwrap();
            assert!(r.passed(), "{name}: {:?}", r.failures());
        }
    }

    fn quintic_narrow() -> CohftData {
        let m = quintic();
        let s = StateSpace::new(&m, 1000).unwrap();
        let u = unit_class(&m, &[]).unwrap();
        narrow_sector_data(&s, &u.coefficients).unwrap()
    }

    #[test]
    fn virtual_dimensions() {
        let m = quintic();
        let j = m.j();
        assert_eq!(virdim(&m, 0, 3, &int(0), &[j.clone(), j.clone(), j.clone()]), int(3));
        assert_eq!(virdim(&m, 0, 3, &int(0), &[j.clone(), j.pow(2), j.pow(2)]), int(1));
        assert_eq!(virdim(&m, 1, 0, &int(0), &[]), int(0));
        assert_eq!(homogeneity_shift(&m, 0, &int(0)), int(-6));
        assert_eq!(homogeneity_shift(&m, 1, &int(0)), int(0));
        assert_eq!(homogeneity_shift(&m, 0, &int(2)), int(-10));
    }

    #[test]
    fn quintic_duals() {
        let s = StateSpace::new(&quintic(), 1000).unwrap();
        let duals = dual_bases(&s).unwrap();
        for d in &duals {
            if s.sectors()[d.sector].narrow() {
                assert_eq!(d.dual, Matrix::from_rows(vec![vec![Coeff::one()]]));
                assert_ne!(d.partner, d.sector);
            } else {
                // independent oracle: η(T_h^j, T^h_k) = δ_jk entry by entry
                let g = s.gram(d.partner);
                let n = d.dual.rows();
                for j in (0..n).step_by(17) {
                    for k in 0..n {
                        let mut v = Coeff::zero();
                        for c in 0..n {
                            v = &v + &(&d.dual[(c, j)] * &g[(c, k)]);
                        }
                        assert_eq!(v, if j == k { Coeff::one() } else { Coeff::zero() });
                    }
                }
            }
        }
    }

    #[test]
    fn toy_passes_and_detects() {
        let toy = FrobeniusAlgebra::toy();
        let d = toy.cohft_data().unwrap();
        all_pass(&d);
        // trace oracle: Ω_{1,1}(a) = tr(multiplication by a)
        for a in 0..3 {
            let tr: Rational = (0..3).map(|b| toy.mult[a][b][b].clone()).sum();
            assert_eq!(d.omega_1_1.as_ref().unwrap().get(&[a], 2)[0], Coeff::from(tr));
        }
        detects(&d, &[0, 1, 2]);
    }

    fn detects(d: &CohftData, t3: &[usize]) {
        let one = Coeff::one();
        let mut p = d.clone();
        p.perturb("omega_0_3", &[t3[0], t3[1], 0], 0, &one);
        assert_eq!(p.check_metric_axiom().unwrap().failures().len(), 1);
        let mut p = d.clone();
        p.perturb("omega_0_3", t3, 0, &one);
        assert!(!p.check_sr_covariance().unwrap().passed());
        assert!(!p.check_forgetting_tails().unwrap().passed());
        let mut p = d.clone();
        p.perturb("omega_0_4", &[0, 1, 1, 2], 0, &one);
        assert!(!p.check_tree_gluing().unwrap().passed());
        let mut p = d.clone();
        p.perturb("omega_1_1", &[1], 0, &one);
        assert!(!p.check_loop_gluing().unwrap().passed());
        let mut p = d.clone();
        p.perturb("omega_0_4", &[0, 0, 0, 1], 1, &one);
        assert!(!p.check_selection_rules().unwrap().passed());
        let mut p = d.clone();
        p.unit = Some(unit_vec(d.dim(), 1));
        assert!(!p.check_metric_axiom().unwrap().passed());
    }

    #[test]
    fn quintic_narrow_passes() {
        let d = quintic_narrow();
        assert_eq!(d.basis.iter().map(|b| b.degree.clone()).collect::<Vec<_>>(), vec![int(0), int(2), int(4), int(6)]);
        all_pass(&d);
        // ξ¹ξ⁴ = 1 is not flagged; a nonzero (ξ¹, ξ¹, 𝟙) is
        let sel = d.check_selection_rules().unwrap();
        assert!(sel.entries.iter().any(|e| e.axiom == "selection_h1h2" && e.tuple == vec![0, 3] && e.pass));
        let mut p = d.clone();
        p.perturb("omega_0_3", &[0, 0, 0], 0, &Coeff::one());
        let sel = p.check_selection_rules().unwrap();
        assert!(sel.failures().iter().any(|e| e.axiom == "selection_h1h2" && e.tuple == vec![0, 0]));
        detects(&d, &[0, 1, 2]);
        // handle element of ℚ[x]/(x⁴) is 4x³
        assert_eq!(d.omega_1_1.as_ref().unwrap().get(&[0], 2)[0], Coeff::from_i64(4));
    }

    #[test]
    fn unit_only() {
        let alg = FrobeniusAlgebra::truncated(1, int(0), int(0));
        let d = alg.cohft_data().unwrap();
        all_pass(&d);
        assert_eq!(d.omega_1_1.as_ref().unwrap().get(&[0], 2)[0], Coeff::one());
        let empty = CohftData {
            omega_0_3: Some(Table::default()),
            omega_0_4: None,
            omega_1_1: None,
            ..d.clone()
        };
        assert!(empty.check_selection_rules().unwrap().passed());
        assert_eq!(empty.check_tree_gluing().unwrap_err(), CohftError::MissingTable("omega_0_4"));
    }

    #[test]
    fn odd_insertions() {
        let mut d = FrobeniusAlgebra::toy().cohft_data().unwrap();
        d.basis[1].parity = 1;
        d.basis[2].parity = 1;
        d.omega_0_4 = None;
        let mut t = Table::default();
        t.set(vec![1, 2, 0], vec![Coeff::one()]);
        t.set(vec![2, 1, 0], vec![Coeff::from_i64(-1)]);
        t.set(vec![1, 0, 2], vec![Coeff::one()]);
        t.set(vec![2, 0, 1], vec![Coeff::from_i64(-1)]);
        t.set(vec![0, 1, 2], vec![Coeff::one()]);
        t.set(vec![0, 2, 1], vec![Coeff::from_i64(-1)]);
        d.omega_0_3 = Some(t.clone());
        assert!(d.check_sr_covariance().unwrap().passed());
        t.set(vec![2, 1, 0], vec![Coeff::one()]);
        d.omega_0_3 = Some(t);
        assert!(!d.check_sr_covariance().unwrap().passed());
    }

    #[test]
    fn json_tables() {
        let text = r#"{"basis":[{"label":"1","sector":[0],"degree":0}],"metric":[[1]],"unit":[1],"c_hat":0,
            "omega_0_3":[{"tuple":[0,0,0],"value":[1]}],"omega_0_4":[{"tuple":[0,0,0,0],"value":[1,0]}],
            "omega_1_1":[{"tuple":[0],"value":[1,0]}]}"#;
        let d = CohftData::from_json(text).unwrap();
        all_pass(&d);
        assert!(CohftData::from_json(r#"{"basis":[],"metric":[[1]],"c_hat":0}"#).is_err());
    }

    proptest! {
        #[test]
        fn selection_never_flags_consistent_entries(k in 2usize..6, scale in 1i64..5) {
            // graded algebra ℚ[x]/(x^k) with deg x = 2, ĉ = k − 1
            let alg = FrobeniusAlgebra::truncated(k, int(2), int(k as i64 - 1));
            let mut d = alg.cohft_data().unwrap();
            d.metric = Matrix::from_fn(k, k, |a, b| d.metric[(a, b)].scale(&rat(scale, 1)));
            for t in d.omega_0_3.as_mut().unwrap().values.values_mut() {
                t[0] = t[0].scale(&rat(scale, 1));
            }
            prop_assert!(d.check_selection_rules().unwrap().passed());
            prop_assert!(d.check_metric_axiom().unwrap().passed());
        }
    }
}
