//! Polynomial differential forms `∑ f_I dx_I`, with `I` stored as a bitmask
//! over the ring variables (bit i ↔ dx_i).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::poly::{Coeff, MultiPoly};

#[derive(Clone, PartialEq, Eq)]
pub struct Form {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<u64, MultiPoly>,
}

/// Sign of `dx_a ∧ dx_b` reordered to increasing indices; zero on overlap.
pub fn wedge_sign(a: u64, b: u64) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl Form {
    pub fn zero(vars: Arc<Vec<String>>) -> Self {
        assert!(vars.len() <= 64, "at most 64 variables");
        Form {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let mut f = Self::zero(p.vars().clone());
        f.add_component(0, p);
        f
    }

    pub fn one(vars: Arc<Vec<String>>) -> Self {
        Self::from_poly(MultiPoly::one(vars))
    }

    /// `p · dx_I`.
    pub fn monomial(p: MultiPoly, mask: u64) -> Self {
        let mut f = Self::zero(p.vars().clone());
        f.add_component(mask, p);
        f
    }

    pub fn dx(vars: Arc<Vec<String>>, i: usize) -> Self {
        Self::monomial(MultiPoly::one(vars), 1 << i)
    }

    /// `dx_0 ∧ … ∧ dx_{n−1}`.
    pub fn volume(vars: Arc<Vec<String>>) -> Self {
        let n = vars.len();
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self::monomial(MultiPoly::one(vars), mask)
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn components(&self) -> impl Iterator<Item = (u64, &MultiPoly)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn component(&self, mask: u64) -> MultiPoly {
        self.terms
            .get(&mask)
            .cloned()
            .unwrap_or_else(|| MultiPoly::zero(self.vars.clone()))
    }

    /// Coefficient of `dx_0 ∧ … ∧ dx_{n−1}`.
    pub fn top_coefficient(&self) -> MultiPoly {
        let n = self.vars.len();
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        self.component(mask)
    }

    pub fn add_component(&mut self, mask: u64, p: MultiPoly) {
        if p.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&mask) {
            Some(q) => q.add(&p),
            None => p,
        };
        if !sum.is_zero() {
            self.terms.insert(mask, sum);
        }
    }

    /// Form degrees that occur with nonzero coefficient.
    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|m| m.count_ones()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn homogeneous_part(&self, degree: u32) -> Form {
        Form {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.count_ones() == degree)
                .map(|(m, p)| (*m, p.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        let mut out = self.clone();
        for (m, p) in &other.terms {
            out.add_component(*m, p.clone());
        }
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.map(|p| p.neg())
    }

    pub fn scale(&self, c: &Coeff) -> Form {
        self.map(|p| p.scale(c))
    }

    pub fn mul_poly(&self, q: &MultiPoly) -> Form {
        self.map(|p| p.mul(q))
    }

    fn map(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> Form {
        let mut out = Self::zero(self.vars.clone());
        for (m, p) in &self.terms {
            out.add_component(*m, f(p));
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Self::zero(self.vars.clone());
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                let s = wedge_sign(*a, *b);
                if s == 0 {
                    continue;
                }
                let pq = p.mul(q);
                out.add_component(a | b, if s > 0 { pq } else { pq.neg() });
            }
        }
        out
    }

    /// Exterior derivative.
    pub fn d(&self) -> Form {
        let mut out = Self::zero(self.vars.clone());
        for (m, p) in &self.terms {
            for i in 0..self.vars.len() {
                if m & (1 << i) != 0 {
                    continue;
                }
                let dp = p.derivative(i);
                if dp.is_zero() {
                    continue;
                }
                let s = wedge_sign(1 << i, *m);
                out.add_component(m | (1 << i), if s > 0 { dp } else { dp.neg() });
            }
        }
        out
    }

    /// Pulls back along `x_i ↦ images[i]` (so `dx_i ↦ d images[i]`).
    pub fn pullback(&self, images: &[MultiPoly]) -> Form {
        assert_eq!(images.len(), self.vars.len());
        let target = images
            .first()
            .map(|p| p.vars().clone())
            .unwrap_or_else(|| Arc::new(Vec::new()));
        let dimg: Vec<Form> = images.iter().map(|f| Form::from_poly(f.clone()).d()).collect();
        let mut out = Form::zero(target.clone());
        for (m, p) in &self.terms {
            let mut piece = Form::from_poly(p.substitute(images));
            for (i, di) in dimg.iter().enumerate() {
                if m & (1 << i) != 0 {
                    piece = piece.wedge(di);
                }
            }
            out = out.add(&piece);
        }
        out
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, p) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let dx: Vec<String> = (0..self.vars.len())
                .filter(|i| m & (1 << i) != 0)
                .map(|i| format!("d{}", self.vars[i]))
                .collect();
            if dx.is_empty() {
                write!(f, "({p})")?;
            } else {
                write!(f, "({p})*{}", dx.join("^"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_poly;

    #[test]
    fn signs() {
        assert_eq!(wedge_sign(0b01, 0b10), 1);
        assert_eq!(wedge_sign(0b10, 0b01), -1);
        assert_eq!(wedge_sign(0b11, 0b01), 0);
        assert_eq!(wedge_sign(0b110, 0b001), 1);
    }

    #[test]
    fn d_squared_and_leibniz() {
        let r = MultiPoly::ring(&["x", "y", "z"]);
        let p = parse_poly("x^2*y + z^3*x", &r).unwrap();
        let q = parse_poly("y*z - x", &r).unwrap();
        let a = Form::from_poly(p.clone()).d();
        assert!(a.d().is_zero());
        let b = Form::monomial(q.clone(), 0b001);
        // d(a∧b) = da∧b − a∧db for a 1-form a
        let lhs = a.wedge(&b).d();
        let rhs = a.d().wedge(&b).sub(&a.wedge(&b.d()));
        assert_eq!(lhs, rhs);
        let dxdy = Form::dx(r.clone(), 0).wedge(&Form::dx(r.clone(), 1));
        let dydx = Form::dx(r.clone(), 1).wedge(&Form::dx(r, 0));
        assert_eq!(dxdy, dydx.neg());
    }

    #[test]
    fn pullback_commutes_with_d() {
        let r = MultiPoly::ring(&["x", "y"]);
        let s = MultiPoly::ring(&["u"]);
        let img = vec![parse_poly("u^2", &s).unwrap(), parse_poly("u+1", &s).unwrap()];
        let w = Form::monomial(parse_poly("x*y", &r).unwrap(), 0b10);
        assert_eq!(w.d().pullback(&img), w.pullback(&img).d());
    }
}
