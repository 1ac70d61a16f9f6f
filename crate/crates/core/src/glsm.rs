//! GLSM input data `(V, Γ, χ, w, ν)` for diagonal abelian `Γ`: a torus part
//! given by a weight matrix and a finite part given by phase vectors.
//! Validation, GIT phases of diagonal torus actions, and R-charge checks.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exactalg::linalg::Matrix;
use crate::exactalg::lp::cone_membership;
use crate::exactalg::parse::{is_valid_variable_name, parse_poly};
use crate::exactalg::poly::MultiPoly;
use crate::exactalg::rational::{fmt_rational, parse_rational, Rational};
use crate::exactalg::{AlgebraError, CyclotomicNumber, PolyIdeal};
use crate::orbifold::{enumerate_group, j_element, GroupElement, DEFAULT_GROUP_ORDER_BOUND};

pub const MAX_SUPPORT_VARIABLES: usize = 24;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GlsmError {
    #[error("malformed model: {0}")]
    Config(String),
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch { what: String, expected: usize, got: usize },
    #[error("support enumeration supports at most {MAX_SUPPORT_VARIABLES} variables, model has {0}")]
    TooManyVariables(usize),
    #[error("unknown character `{0}`")]
    UnknownCharacter(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A rational entry in a config file: a JSON integer or a string like `"1/5"`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Num {
    Int(i64),
    Text(String),
}

impl Num {
    pub fn to_rational(&self) -> Result<Rational, GlsmError> {
        match self {
            Num::Int(n) => Ok(Rational::from_integer((*n).into())),
            Num::Text(s) => parse_rational(s).ok_or_else(|| GlsmError::Config(format!("not a rational number: {s:?}"))),
        }
    }
}

fn rationals(v: &[Num]) -> Result<Vec<Rational>, GlsmError> {
    v.iter().map(Num::to_rational).collect()
}

/// The JSON model schema.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct GlsmConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub variables: Vec<String>,
    #[serde(default)]
    pub torus_weights: Vec<Vec<Num>>,
    #[serde(default)]
    pub finite_generators: Vec<Vec<Num>>,
    #[serde(default)]
    pub chi: Vec<Num>,
    #[serde(default)]
    pub nu: Vec<Num>,
    /// Extra named stability characters, e.g. `{"nu_plus": [1, 0]}`.
    #[serde(default)]
    pub characters: BTreeMap<String, Vec<Num>>,
    pub r_charges: Vec<Num>,
    /// The one-parameter subgroup `ℂ×_R` in the torus lattice, when it lies in the torus.
    #[serde(default)]
    pub r_subgroup: Option<Vec<i64>>,
    pub d_w: u32,
    pub potential: String,
}

#[derive(Clone, Debug)]
pub struct GlsmModel {
    name: String,
    ring: Arc<Vec<String>>,
    torus_weights: Vec<Vec<Rational>>,
    finite_generators: Vec<GroupElement>,
    chi: Vec<Rational>,
    nu: Vec<Rational>,
    characters: BTreeMap<String, Vec<Rational>>,
    r_charges: Vec<Rational>,
    r_subgroup: Option<Vec<i64>>,
    d_w: u32,
    potential: MultiPoly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub required: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    /// True when every required check passes; advisory checks are informational.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || !c.required)
    }

    pub fn failed_required(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.required && !c.passed).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDescription {
    pub character: Vec<String>,
    /// Maximal coordinate supports of unstable points (an antichain).
    pub maximal_unstable_supports: Vec<Vec<String>>,
    pub minimal_semistable_supports: Vec<Vec<String>>,
    pub description: String,
    pub stable_equals_semistable: bool,
    #[serde(skip)]
    unstable_masks: Vec<u32>,
}

impl PhaseDescription {
    /// A point is semistable iff its support is not inside a maximal unstable support.
    pub fn is_semistable_support(&self, support: &[usize]) -> bool {
        let m = mask(support);
        !self.unstable_masks.iter().any(|&u| m & !u == 0)
    }

    pub fn unstable_masks(&self) -> &[u32] {
        &self.unstable_masks
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DaggerReport {
    pub character: Vec<String>,
    pub r_fixed_support: Vec<String>,
    /// `(V^ss)^{ℂ×_R}` is nonempty.
    pub holds: bool,
}

fn mask(support: &[usize]) -> u32 {
    support.iter().fold(0, |m, &i| m | (1 << i))
}

fn unmask(m: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| m & (1 << i) != 0).collect()
}

impl GlsmModel {
    pub fn from_config(cfg: &GlsmConfig) -> Result<Self, GlsmError> {
        let n = cfg.variables.len();
        let mut seen = HashSet::new();
        for v in &cfg.variables {
            if !is_valid_variable_name(v) {
                return Err(GlsmError::Config(format!("invalid variable name {v:?}")));
            }
            if !seen.insert(v) {
                return Err(GlsmError::Config(format!("duplicate variable {v:?}")));
            }
        }
        if cfg.d_w == 0 {
            return Err(GlsmError::Config("d_w must be a positive integer".into()));
        }
        let torus_weights: Vec<Vec<Rational>> = cfg.torus_weights.iter().map(|r| rationals(r)).collect::<Result<_, _>>()?;
        for row in &torus_weights {
            if row.len() != n {
                return Err(GlsmError::Config(format!("torus weight row has length {}, expected {n}", row.len())));
            }
        }
        let k = torus_weights.len();
        let finite_generators: Vec<GroupElement> = cfg
            .finite_generators
            .iter()
            .map(|g| {
                let p = rationals(g)?;
                if p.len() != n {
                    return Err(GlsmError::Config(format!("finite generator has length {}, expected {n}", p.len())));
                }
                Ok(GroupElement::new(p))
            })
            .collect::<Result<_, _>>()?;
        let vec_k = |what: &str, v: &[Num]| -> Result<Vec<Rational>, GlsmError> {
            if v.is_empty() {
                return Ok(vec![Rational::zero(); k]);
            }
            let r = rationals(v)?;
            if r.len() != k {
                return Err(GlsmError::Config(format!("{what} has length {}, expected torus rank {k}", r.len())));
            }
            Ok(r)
        };
        let chi = vec_k("chi", &cfg.chi)?;
        let nu = vec_k("nu", &cfg.nu)?;
        let mut characters = BTreeMap::new();
        for (name, v) in &cfg.characters {
            characters.insert(name.clone(), vec_k(name, v)?);
        }
        let r_charges = rationals(&cfg.r_charges)?;
        if r_charges.len() != n {
            return Err(GlsmError::Config(format!("r_charges has length {}, expected {n}", r_charges.len())));
        }
        if let Some(s) = &cfg.r_subgroup {
            if s.len() != k {
                return Err(GlsmError::Config(format!("r_subgroup has length {}, expected torus rank {k}", s.len())));
            }
        }
        let ring = Arc::new(cfg.variables.clone());
        let potential = parse_poly(&cfg.potential, &ring).map_err(|e| GlsmError::Config(format!("potential: {e}")))?;
        Ok(GlsmModel {
            name: cfg.name.clone().unwrap_or_default(),
            ring,
            torus_weights,
            finite_generators,
            chi,
            nu,
            characters,
            r_charges,
            r_subgroup: cfg.r_subgroup.clone(),
            d_w: cfg.d_w,
            potential,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, GlsmError> {
        let cfg: GlsmConfig = serde_json::from_str(text).map_err(|e| GlsmError::Config(e.to_string()))?;
        Self::from_config(&cfg)
    }

    /// Affine LG model with no continuous torus.
    pub fn landau_ginzburg(
        variables: &[&str],
        potential: &str,
        r_charges: &[Rational],
        d_w: u32,
        finite_generators: Vec<Vec<Rational>>,
    ) -> Result<Self, GlsmError> {
        let ring = MultiPoly::ring(variables);
        let potential = parse_poly(potential, &ring)?;
        if r_charges.len() != variables.len() {
            return Err(GlsmError::DimensionMismatch {
                what: "r_charges".into(),
                expected: variables.len(),
                got: r_charges.len(),
            });
        }
        Ok(GlsmModel {
            name: String::new(),
            ring,
            torus_weights: Vec::new(),
            finite_generators: finite_generators.into_iter().map(GroupElement::new).collect(),
            chi: Vec::new(),
            nu: Vec::new(),
            characters: BTreeMap::new(),
            r_charges: r_charges.to_vec(),
            r_subgroup: None,
            d_w,
            potential,
        })
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[String] {
        &self.ring
    }

    pub fn ring(&self) -> &Arc<Vec<String>> {
        &self.ring
    }

    pub fn n_vars(&self) -> usize {
        self.ring.len()
    }

    pub fn torus_rank(&self) -> usize {
        self.torus_weights.len()
    }

    pub fn torus_weights(&self) -> &[Vec<Rational>] {
        &self.torus_weights
    }

    pub fn finite_generators(&self) -> Vec<GroupElement> {
        self.finite_generators.clone()
    }

    pub fn chi(&self) -> &[Rational] {
        &self.chi
    }

    pub fn nu(&self) -> &[Rational] {
        &self.nu
    }

    pub fn r_charges(&self) -> &[Rational] {
        &self.r_charges
    }

    pub fn r_subgroup(&self) -> Option<&[i64]> {
        self.r_subgroup.as_deref()
    }

    pub fn d_w(&self) -> u32 {
        self.d_w
    }

    pub fn potential(&self) -> &MultiPoly {
        &self.potential
    }

    pub fn d_w_rational(&self) -> Rational {
        Rational::from_integer(self.d_w.into())
    }

    /// `q = Σ c_i / d_w`.
    pub fn q(&self) -> Rational {
        self.r_charges.iter().sum::<Rational>() / self.d_w_rational()
    }

    /// Dimension of `G = Ker χ`: one less than the torus rank when χ is nontrivial.
    pub fn dim_g(&self) -> usize {
        let k = self.torus_rank();
        if self.chi.iter().any(|c| !c.is_zero()) {
            k - 1
        } else {
            k
        }
    }

    /// `ĉ = dim V − dim G − 2q`.
    pub fn c_hat(&self) -> Rational {
        Rational::from_integer((self.n_vars() as i64 - self.dim_g() as i64).into()) - self.q() * Rational::from_integer(2.into())
    }

    /// `J = exp(2πi/d_w)` acting through the R-charges.
    pub fn j(&self) -> GroupElement {
        j_element(&self.r_charges, self.d_w)
    }

    /// Weight vector of coordinate `i` under the torus (column of the weight matrix).
    pub fn weight_column(&self, i: usize) -> Vec<Rational> {
        self.torus_weights.iter().map(|row| row[i].clone()).collect()
    }

    /// Looks up `nu`, `chi`, a named character, or parses a literal list like `-5,1`.
    pub fn resolve_character(&self, spec: &str) -> Result<Vec<Rational>, GlsmError> {
        match spec {
            "nu" => return Ok(self.nu.clone()),
            "chi" => return Ok(self.chi.clone()),
            _ => {}
        }
        if let Some(c) = self.characters.get(spec) {
            return Ok(c.clone());
        }
        let body = spec.trim().trim_start_matches('[').trim_end_matches(']');
        let parsed: Option<Vec<Rational>> = if body.trim().is_empty() {
            Some(Vec::new())
        } else {
            body.split(',').map(parse_rational).collect()
        };
        match parsed {
            Some(v) if v.len() == self.torus_rank() => Ok(v),
            Some(v) => Err(GlsmError::DimensionMismatch {
                what: "character".into(),
                expected: self.torus_rank(),
                got: v.len(),
            }),
            None => Err(GlsmError::UnknownCharacter(spec.to_string())),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let mut push = |name: &str, required: bool, passed: bool, detail: String| {
            checks.push(Check {
                name: name.into(),
                required,
                passed,
                detail,
            })
        };
        let w = &self.potential;
        let d = self.d_w_rational();

        let neg: Vec<&String> = (0..self.n_vars()).filter(|&i| self.r_charges[i].is_negative()).map(|i| &self.ring[i]).collect();
        push(
            "r_charges_nonnegative",
            true,
            neg.is_empty(),
            if neg.is_empty() { "all c_i ≥ 0".into() } else { format!("negative R-charge on {neg:?}") },
        );

        let bad_qh: Vec<String> = w
            .terms()
            .filter(|(m, _)| m.weighted_degree(&self.r_charges) != d)
            .map(|(m, _)| MultiPoly::term(self.ring.clone(), m.clone(), CyclotomicNumber::one()).to_string())
            .collect();
        push(
            "quasi_homogeneous",
            true,
            !w.is_zero() && bad_qh.is_empty(),
            if w.is_zero() {
                "potential is zero".into()
            } else if bad_qh.is_empty() {
                format!("every monomial has weighted degree d_w = {}", self.d_w)
            } else {
                format!("monomials of weighted degree ≠ {}: {}", self.d_w, bad_qh.join(", "))
            },
        );

        let mut euler = MultiPoly::zero(self.ring.clone());
        for i in 0..self.n_vars() {
            let xi_di = MultiPoly::var(self.ring.clone(), i).mul(&w.derivative(i));
            euler = euler.add(&xi_di.scale_rational(&(&self.r_charges[i] / &d)));
        }
        let euler_ok = euler == *w;
        push(
            "euler_identity",
            true,
            euler_ok,
            if euler_ok { "Σ (c_i/d_w)·x_i·∂_i w = w".into() } else { format!("Σ (c_i/d_w)·x_i·∂_i w = {euler}") },
        );

        // w(ζ·x) with ζ = exp(πi/d_w) acting by ζ^{c_i}
        let twisted = w.map_terms(|m, c| {
            let turns = m.weighted_degree(&self.r_charges) / (&d * Rational::from_integer(2.into()));
            c * &CyclotomicNumber::from_turns(&turns)
        });
        let anti = twisted == w.neg();
        push(
            "zeta_anti_invariance",
            true,
            anti,
            if anti { "w(ζ·x) = −w(x)".into() } else { "w(ζ·x) ≠ −w(x)".into() },
        );

        let mut bad_fin = Vec::new();
        for (gi, g) in self.finite_generators.iter().enumerate() {
            for (m, _) in w.terms() {
                let phase: Rational = m.exps().iter().zip(g.phases()).map(|(a, p)| p * Rational::from_integer((*a).into())).sum();
                if !phase.is_integer() {
                    bad_fin.push(format!("generator {gi} on {}", MultiPoly::term(self.ring.clone(), m.clone(), CyclotomicNumber::one())));
                }
            }
        }
        push(
            "finite_group_invariance",
            true,
            bad_fin.is_empty(),
            if bad_fin.is_empty() { "w is invariant under every finite generator".into() } else { bad_fin.join("; ") },
        );

        // Ker χ: every monomial's torus weight must be a multiple of χ
        let mut bad_ker = Vec::new();
        let mut bad_equiv = Vec::new();
        let k = self.torus_rank();
        if k > 0 {
            let chi_mat = Matrix::from_rows(vec![self.chi.clone()]);
            let ker = chi_mat.kernel();
            for (m, _) in w.terms() {
                let wt: Vec<Rational> = (0..k)
                    .map(|j| m.exps().iter().zip(&self.torus_weights[j]).map(|(a, x)| x * Rational::from_integer((*a).into())).sum())
                    .collect();
                let name = MultiPoly::term(self.ring.clone(), m.clone(), CyclotomicNumber::one()).to_string();
                if ker.iter().any(|l| l.iter().zip(&wt).map(|(a, b)| a * b).sum::<Rational>() != Rational::zero()) {
                    bad_ker.push(name.clone());
                }
                if wt != self.chi {
                    bad_equiv.push(name);
                }
            }
        }
        push(
            "torus_kernel_invariance",
            true,
            bad_ker.is_empty(),
            if bad_ker.is_empty() {
                "w is invariant under every one-parameter subgroup in Ker χ".into()
            } else {
                format!("not Ker χ-invariant: {}", bad_ker.join(", "))
            },
        );
        push(
            "chi_equivariance",
            false,
            bad_equiv.is_empty(),
            if bad_equiv.is_empty() {
                "w(g·x) = χ(g)·w(x) on the torus".into()
            } else {
                format!("monomials with torus weight ≠ χ: {}", bad_equiv.join(", "))
            },
        );

        let over: Vec<&String> = (0..self.n_vars()).filter(|&i| self.r_charges[i] > d).map(|i| &self.ring[i]).collect();
        push(
            "r_charges_bounded",
            false,
            over.is_empty(),
            if over.is_empty() { "0 ≤ c_i ≤ d_w".into() } else { format!("c_i > d_w on {over:?}") },
        );

        let j = self.j();
        let j_in = enumerate_group(&self.finite_generators, self.n_vars(), DEFAULT_GROUP_ORDER_BOUND)
            .map(|g| g.contains(&j))
            .unwrap_or(false);
        push(
            "j_in_group",
            false,
            j_in,
            format!("J = {j} {} the finite group", if j_in { "lies in" } else { "is not in" }),
        );

        let iso = PolyIdeal::new(self.ring.clone(), w.gradient())
            .map(|i| i.quotient_basis().dim().is_some())
            .unwrap_or(false);
        push(
            "isolated_singularity",
            false,
            iso,
            if iso {
                "Jacobian ring is finite-dimensional (affine properness criterion)".into()
            } else {
                "Jacobian ring is infinite-dimensional; properness over a geometric phase is not checked".into()
            },
        );

        ValidationReport { checks }
    }

    fn support_semistable(&self, theta: &[Rational], s: u32, cache: &mut HashMap<u32, bool>) -> Result<bool, GlsmError> {
        if let Some(&b) = cache.get(&s) {
            return Ok(b);
        }
        let vs: Vec<Vec<Rational>> = unmask(s, self.n_vars()).into_iter().map(|i| self.weight_column(i)).collect();
        let b = cone_membership(&vs, theta)?.is_member();
        cache.insert(s, b);
        Ok(b)
    }

    /// GIT semistable locus for the character `theta` of the torus.
    pub fn semistable_locus(&self, theta: &[Rational]) -> Result<PhaseDescription, GlsmError> {
        let n = self.n_vars();
        if n > MAX_SUPPORT_VARIABLES {
            return Err(GlsmError::TooManyVariables(n));
        }
        if theta.len() != self.torus_rank() {
            return Err(GlsmError::DimensionMismatch {
                what: "character".into(),
                expected: self.torus_rank(),
                got: theta.len(),
            });
        }
        let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
        let mut cache = HashMap::new();
        let mut unstable: Vec<u32> = Vec::new();
        let mut minimal: Vec<u32> = Vec::new();
        if !self.support_semistable(theta, full, &mut cache)? {
            unstable.push(full);
        } else if self.support_semistable(theta, 0, &mut cache)? {
            minimal.push(0);
        } else {
            let mut visited: HashSet<u32> = HashSet::from([full]);
            let mut stack = vec![full];
            while let Some(s) = stack.pop() {
                let mut all_children_unstable = true;
                for i in unmask(s, n) {
                    let t = s & !(1 << i);
                    if self.support_semistable(theta, t, &mut cache)? {
                        all_children_unstable = false;
                        if visited.insert(t) {
                            stack.push(t);
                        }
                    } else {
                        unstable.push(t);
                    }
                }
                if all_children_unstable {
                    minimal.push(s);
                }
            }
            unstable.sort_unstable();
            unstable.dedup();
            let cands = unstable.clone();
            unstable.retain(|&u| !cands.iter().any(|&v| v != u && u & !v == 0));
        }
        minimal.sort_unstable();
        minimal.dedup();
        let order = |v: &mut Vec<u32>| v.sort_by_key(|&m| (std::cmp::Reverse(m.count_ones()), m.reverse_bits()));
        order(&mut unstable);
        order(&mut minimal);

        let names = |m: u32| unmask(m, n).into_iter().map(|i| self.ring[i].clone()).collect::<Vec<_>>();
        let description = if unstable.is_empty() {
            "V^ss = V".to_string()
        } else if unstable.contains(&full) {
            "V^ss = empty".to_string()
        } else {
            let pieces: Vec<String> = unstable
                .iter()
                .map(|&u| {
                    let zero: Vec<String> = (0..n).filter(|&i| u & (1 << i) == 0).map(|i| self.ring[i].clone()).collect();
                    format!("{{{}=0}}", zero.join("="))
                })
                .collect();
            format!("V^ss = complement of {}", pieces.join(" ∪ "))
        };
        let stable = self.stable_equals_semistable(theta, &minimal)?;
        Ok(PhaseDescription {
            character: theta.iter().map(fmt_rational).collect(),
            maximal_unstable_supports: unstable.iter().map(|&m| names(m)).collect(),
            minimal_semistable_supports: minimal.iter().map(|&m| names(m)).collect(),
            description,
            stable_equals_semistable: stable,
            unstable_masks: unstable,
        })
    }

    /// For each minimal semistable support, the `G = Ker χ` weights must span and
    /// `θ|_G` must lie in the interior of their cone (finite stabilizers, closed orbits).
    fn stable_equals_semistable(&self, theta: &[Rational], minimal: &[u32]) -> Result<bool, GlsmError> {
        let k = self.torus_rank();
        let basis: Vec<Vec<Rational>> = if self.chi.iter().any(|c| !c.is_zero()) {
            Matrix::from_rows(vec![self.chi.clone()]).kernel()
        } else {
            Matrix::<Rational>::identity(k).to_rows()
        };
        let dim = basis.len();
        if dim == 0 {
            return Ok(true);
        }
        let project = |v: &[Rational]| -> Vec<Rational> {
            basis.iter().map(|b| b.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
        };
        let theta_g = project(theta);
        for &s in minimal {
            let vs: Vec<Vec<Rational>> = unmask(s, self.n_vars()).into_iter().map(|i| project(&self.weight_column(i))).collect();
            if vs.is_empty() || Matrix::from_rows(vs.clone()).rank() < dim {
                return Ok(false);
            }
            // strictly positive combination: Σ μ_i v_i − s·θ = −Σ v_i with μ, s ≥ 0
            let mut gens = vs.clone();
            gens.push(theta_g.iter().map(|x| -x).collect());
            let target: Vec<Rational> = (0..dim).map(|j| -vs.iter().map(|v| v[j].clone()).sum::<Rational>()).collect();
            if !cone_membership(&gens, &target)?.is_member() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Coordinates on which the one-parameter subgroup `λ` acts trivially.
    pub fn r_fixed_locus(&self, subgroup: &[i64]) -> Result<Vec<usize>, GlsmError> {
        if subgroup.len() != self.torus_rank() {
            return Err(GlsmError::DimensionMismatch {
                what: "one-parameter subgroup".into(),
                expected: self.torus_rank(),
                got: subgroup.len(),
            });
        }
        Ok((0..self.n_vars())
            .filter(|&i| {
                subgroup
                    .iter()
                    .zip(&self.torus_weights)
                    .map(|(l, row)| Rational::from_integer((*l).into()) * &row[i])
                    .sum::<Rational>()
                    .is_zero()
            })
            .collect())
    }

    /// R-fixed support: from `r_subgroup` when given, else the coordinates with `c_i = 0`.
    pub fn r_fixed_support(&self) -> Result<Vec<usize>, GlsmError> {
        match &self.r_subgroup {
            Some(l) => self.r_fixed_locus(l),
            None => Ok((0..self.n_vars()).filter(|&i| self.r_charges[i].is_zero()).collect()),
        }
    }

    /// Condition (†): the R-fixed coordinate subspace meets `V^ss(θ)`.
    pub fn check_dagger(&self, theta: &[Rational]) -> Result<DaggerReport, GlsmError> {
        let phase = self.semistable_locus(theta)?;
        let fixed = self.r_fixed_support()?;
        Ok(DaggerReport {
            character: theta.iter().map(fmt_rational).collect(),
            r_fixed_support: fixed.iter().map(|&i| self.ring[i].clone()).collect(),
            holds: phase.is_semistable_support(&fixed),
        })
    }

    /// Stable textual key identifying the model.
    pub fn fingerprint(&self) -> String {
        format!(
            "{}|{}|{}|{}",
            self.ring.join(","),
            self.potential,
            self.finite_generators.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(";"),
            self.r_charges.iter().map(fmt_rational).collect::<Vec<_>>().join(",")
        )
    }
}

impl Num {
    pub fn from_rational(r: &Rational) -> Num {
        if r.is_integer() {
            if let Ok(n) = i64::try_from(r.numer().clone()) {
                return Num::Int(n);
            }
        }
        Num::Text(fmt_rational(r))
    }
}
