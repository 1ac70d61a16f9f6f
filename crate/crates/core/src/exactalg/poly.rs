//! Sparse multivariate polynomials over cyclotomic fields.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::cyclotomic::{fmt_coeff_abs, CyclotomicNumber};
use super::rational::Rational;
use super::AlgebraError;

pub type Coeff = CyclotomicNumber;

/// Exponent vector, ordered by degree-reverse-lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`; caller guarantees divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    pub fn weighted_degree(&self, weights: &[Rational]) -> Rational {
        self.0
            .iter()
            .zip(weights)
            .fold(Rational::zero(), |acc, (e, w)| acc + w * Rational::from_integer((*e).into()))
    }

    pub fn is_pure_power(&self) -> Option<usize> {
        let nz: Vec<usize> = (0..self.0.len()).filter(|&i| self.0[i] > 0).collect();
        (nz.len() == 1).then(|| nz[0])
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        // grevlex tie-break: the last differing exponent decides, smaller wins
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            if a != b {
                return b.cmp(a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Monomial, Coeff>,
}

impl MultiPoly {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        MultiPoly {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: Arc<Vec<String>>, c: Coeff) -> Self {
        let n = vars.len();
        Self::term(vars, Monomial::one(n), c)
    }

    pub fn one(vars: Arc<Vec<String>>) -> Self {
        Self::constant(vars, Coeff::one())
    }

    pub fn var(vars: Arc<Vec<String>>, i: usize) -> Self {
        let n = vars.len();
        Self::term(vars, Monomial::var(n, i), Coeff::one())
    }

    pub fn term(vars: Arc<Vec<String>>, m: Monomial, c: Coeff) -> Self {
        assert_eq!(m.0.len(), vars.len(), "exponent length mismatch");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { vars, terms }
    }

    pub fn from_terms(vars: Arc<Vec<String>>, items: impl IntoIterator<Item = (Monomial, Coeff)>) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in items {
            p.add_term(m, &c);
        }
        p
    }

    pub fn ring(names: &[&str]) -> Arc<Vec<String>> {
        Arc::new(names.iter().map(|s| s.to_string()).collect())
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
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

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_else(Coeff::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Coeff)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn same_ring(&self, other: &MultiPoly) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }

    pub fn check_ring(&self, other: &MultiPoly) -> Result<(), AlgebraError> {
        if self.same_ring(other) {
            Ok(())
        } else {
            Err(AlgebraError::VariableMismatch {
                left: self.vars.to_vec(),
                right: other.vars.to_vec(),
            })
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: &Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = &*existing + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    /// In place `self -= c·m·other`.
    pub fn sub_scaled_shift(&mut self, c: &Coeff, m: &Monomial, other: &MultiPoly) {
        for (k, d) in &other.terms {
            self.add_term(k.mul(m), &-(c * d));
        }
    }

    /// Removes and returns the leading term.
    pub fn pop_leading(&mut self) -> Option<(Monomial, Coeff)> {
        self.terms.pop_last()
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert!(self.same_ring(other), "ring mismatch in add");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert!(self.same_ring(other), "ring mismatch in sub");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        out
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Coeff) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn scale_rational(&self, r: &Rational) -> MultiPoly {
        self.scale(&Coeff::from_rational(r.clone()))
    }

    /// Multiplies by `c·m`.
    pub fn mul_term(&self, m: &Monomial, c: &Coeff) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.vars.clone());
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, d)| (k.mul(m), d * c)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        debug_assert!(self.same_ring(other), "ring mismatch in mul");
        let mut out = Self::zero(self.vars.clone());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        (0..e).fold(Self::one(self.vars.clone()), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self, i: usize) -> MultiPoly {
        let mut out = Self::zero(self.vars.clone());
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut k = m.clone();
            k.0[i] -= 1;
            out.add_term(k, &c.scale(&Rational::from_integer(e.into())));
        }
        out
    }

    pub fn gradient(&self) -> Vec<MultiPoly> {
        (0..self.nvars()).map(|i| self.derivative(i)).collect()
    }

    /// Substitutes `images[i]` for variable i. All images share one ring.
    pub fn substitute(&self, images: &[MultiPoly]) -> MultiPoly {
        assert_eq!(images.len(), self.nvars(), "one image per variable");
        let target = images
            .first()
            .map(|p| p.vars.clone())
            .unwrap_or_else(|| Arc::new(Vec::new()));
        let mut out = Self::zero(target.clone());
        let mut cache: Vec<Vec<MultiPoly>> = images.iter().map(|p| vec![Self::one(target.clone()), p.clone()]).collect();
        for (m, c) in &self.terms {
            let mut t = Self::constant(target.clone(), c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap().mul(&images[i]);
                    cache[i].push(next);
                }
                t = t.mul(&cache[i][e as usize]);
            }
            out = out.add(&t);
        }
        out
    }

    /// Multiplies the coefficient of every monomial by `f(monomial)`.
    pub fn map_terms(&self, f: impl Fn(&Monomial, &Coeff) -> Coeff) -> MultiPoly {
        Self::from_terms(self.vars.clone(), self.terms.iter().map(|(m, c)| (m.clone(), f(m, c))))
    }

    /// Sets every variable outside `keep` to zero and drops it from the ring.
    pub fn restrict(&self, keep: &[usize]) -> MultiPoly {
        let vars: Arc<Vec<String>> = Arc::new(keep.iter().map(|&i| self.vars[i].clone()).collect());
        let mut out = Self::zero(vars);
        for (m, c) in &self.terms {
            let dropped = (0..self.nvars()).any(|i| m.0[i] > 0 && !keep.contains(&i));
            if !dropped {
                out.add_term(Monomial(keep.iter().map(|&i| m.0[i]).collect()), c);
            }
        }
        out
    }

    /// Re-expresses the polynomial in a ring whose variables include ours.
    pub fn embed(&self, vars: &Arc<Vec<String>>) -> Result<MultiPoly, AlgebraError> {
        if self.same_ring_names(vars) {
            return Ok(MultiPoly {
                vars: vars.clone(),
                terms: self.terms.clone(),
            });
        }
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                vars.iter().position(|w| w == v).ok_or_else(|| AlgebraError::VariableMismatch {
                    left: self.vars.to_vec(),
                    right: vars.to_vec(),
                })
            })
            .collect::<Result<_, _>>()?;
        let mut out = Self::zero(vars.clone());
        for (m, c) in &self.terms {
            let mut e = vec![0; vars.len()];
            for (i, &k) in map.iter().enumerate() {
                e[k] = m.0[i];
            }
            out.add_term(Monomial(e), c);
        }
        Ok(out)
    }

    fn same_ring_names(&self, vars: &Arc<Vec<String>>) -> bool {
        Arc::ptr_eq(&self.vars, vars) || *self.vars == **vars
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    pub fn constant_term(&self) -> Coeff {
        self.coeff(&Monomial::one(self.nvars()))
    }

    /// `Some(d)` if every monomial has weighted degree `d`.
    pub fn weighted_homogeneous_degree(&self, weights: &[Rational]) -> Option<Rational> {
        let mut degs = self.terms.keys().map(|m| m.weighted_degree(weights));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn monic(&self) -> MultiPoly {
        match self.leading_term() {
            Some((_, c)) => self.scale(&c.inv().expect("nonzero leading coefficient")),
            None => self.clone(),
        }
    }

    pub fn has_rational_coeffs(&self) -> bool {
        self.terms.values().all(Coeff::is_rational)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let order = c.order();
            for (r, k) in c.components() {
                let neg = r.is_negative();
                if first {
                    if neg {
                        write!(f, "-")?;
                    }
                } else {
                    write!(f, " {} ", if neg { "-" } else { "+" })?;
                }
                first = false;
                let mut factors: Vec<String> = Vec::new();
                if !r.abs().is_one() {
                    factors.push(fmt_coeff_abs(&r));
                }
                match k {
                    0 => {}
                    1 => factors.push(format!("z{order}")),
                    _ => factors.push(format!("z{order}^{k}")),
                }
                for (i, &e) in m.0.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(self.vars[i].clone()),
                        _ => factors.push(format!("{}^{}", self.vars[i], e)),
                    }
                }
                if factors.is_empty() {
                    factors.push("1".into());
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grevlex_order() {
        // x > y > z; x*z < y^2 in grevlex
        let xz = Monomial(vec![1, 0, 1]);
        let yy = Monomial(vec![0, 2, 0]);
        let xy = Monomial(vec![1, 1, 0]);
        assert!(yy > xz);
        assert!(xy > yy);
        assert!(Monomial(vec![0, 0, 3]) > xy);
    }

    #[test]
    fn arithmetic_and_derivative() {
        let r = MultiPoly::ring(&["x", "y"]);
        let x = MultiPoly::var(r.clone(), 0);
        let y = MultiPoly::var(r.clone(), 1);
        let p = x.add(&y).pow(2);
        assert_eq!(p.to_string(), "x^2 + 2*x*y + y^2");
        assert_eq!(p.derivative(0).to_string(), "2*x + 2*y");
        let q = p.substitute(&[y.clone(), x.clone()]);
        assert_eq!(q, p);
        assert_eq!(p.restrict(&[1]).to_string(), "y^2");
    }
}
