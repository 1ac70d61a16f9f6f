//! Buchberger's algorithm (sugar pair selection) under degrevlex, normal
//! forms, and standard-monomial bases of quotient rings.

use std::collections::HashSet;
use std::sync::Arc;

use super::poly::{Coeff, Monomial, MultiPoly};
use super::AlgebraError;

/// An ideal together with its reduced Gröbner basis (degrevlex).
#[derive(Clone, Debug)]
pub struct PolyIdeal {
    vars: Arc<Vec<String>>,
    generators: Vec<MultiPoly>,
    basis: Vec<MultiPoly>,
}

/// Standard monomials of `k[x]/I`, or `Infinite` when the quotient is not
/// finite-dimensional.
#[derive(Clone, Debug, PartialEq)]
pub enum QuotientBasis {
    Finite(Vec<Monomial>),
    Infinite,
}

impl QuotientBasis {
    pub fn dim(&self) -> Option<usize> {
        match self {
            QuotientBasis::Finite(b) => Some(b.len()),
            QuotientBasis::Infinite => None,
        }
    }
}

impl PolyIdeal {
    /// Computes the reduced Gröbner basis of the ideal generated by `generators`.
    pub fn new(vars: Arc<Vec<String>>, generators: Vec<MultiPoly>) -> Result<Self, AlgebraError> {
        for g in &generators {
            if !g.vars().is_empty() || !vars.is_empty() {
                if **g.vars() != *vars {
                    return Err(AlgebraError::VariableMismatch {
                        left: g.vars().to_vec(),
                        right: vars.to_vec(),
                    });
                }
            }
        }
        let generators: Vec<MultiPoly> = generators
            .into_iter()
            .map(|g| MultiPoly::from_terms(vars.clone(), g.terms().map(|(m, c)| (m.clone(), c.clone()))))
            .collect();
        let basis = buchberger(&vars, &generators);
        Ok(PolyIdeal {
            vars,
            generators,
            basis,
        })
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn generators(&self) -> &[MultiPoly] {
        &self.generators
    }

    /// Reduced, monic, sorted by increasing leading monomial.
    pub fn basis(&self) -> &[MultiPoly] {
        &self.basis
    }

    pub fn is_unit_ideal(&self) -> bool {
        self.basis.len() == 1 && self.basis[0].is_constant()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.basis
            .iter()
            .map(|g| g.leading_term().expect("nonzero basis element").0.clone())
            .collect()
    }

    pub fn normal_form(&self, p: &MultiPoly) -> Result<MultiPoly, AlgebraError> {
        if **p.vars() != *self.vars {
            return Err(AlgebraError::VariableMismatch {
                left: p.vars().to_vec(),
                right: self.vars.to_vec(),
            });
        }
        Ok(reduce(p, &self.basis))
    }

    pub fn contains(&self, p: &MultiPoly) -> Result<bool, AlgebraError> {
        Ok(self.normal_form(p)?.is_zero())
    }

    pub fn quotient_basis(&self) -> QuotientBasis {
        let n = self.vars.len();
        let lms = self.leading_monomials();
        if lms.iter().any(|m| m.degree() == 0) {
            return QuotientBasis::Finite(Vec::new());
        }
        let mut bounds = vec![None::<u32>; n];
        for m in &lms {
            if let Some(i) = m.is_pure_power() {
                let e = m.0[i];
                bounds[i] = Some(bounds[i].map_or(e, |b: u32| b.min(e)));
            }
        }
        if bounds.iter().any(Option::is_none) {
            return QuotientBasis::Infinite;
        }
        let bounds: Vec<u32> = bounds.into_iter().map(Option::unwrap).collect();
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        enumerate_standard(0, &mut cur, &bounds, &lms, &mut out);
        out.sort();
        QuotientBasis::Finite(out)
    }
}

fn enumerate_standard(i: usize, cur: &mut Vec<u32>, bounds: &[u32], lms: &[Monomial], out: &mut Vec<Monomial>) {
    if i == cur.len() {
        out.push(Monomial(cur.clone()));
        return;
    }
    for e in 0..bounds[i] {
        cur[i] = e;
        // prune: the partial monomial (later exponents zero) must already be standard
        let partial = Monomial(cur.clone());
        if lms.iter().any(|m| m.divides(&partial)) {
            break;
        }
        enumerate_standard(i + 1, cur, bounds, lms, out);
    }
    cur[i] = 0;
}

/// Full reduction of `p` by `basis` (all terms, not only the leading one).
pub fn reduce(p: &MultiPoly, basis: &[MultiPoly]) -> MultiPoly {
    let lts: Vec<(Monomial, Coeff)> = basis
        .iter()
        .map(|g| {
            let (m, c) = g.leading_term().expect("nonzero basis element");
            (m.clone(), c.clone())
        })
        .collect();
    let mut work = p.clone();
    let mut rem = MultiPoly::zero(p.vars().clone());
    while let Some((m, c)) = work.pop_leading() {
        match lts.iter().position(|(lm, _)| lm.divides(&m)) {
            Some(k) => {
                let q = m.div(&lts[k].0);
                let f = &c * &lts[k].1.inv().expect("nonzero leading coefficient");
                // the leading term cancels exactly; subtract the tail only
                let mut tail = basis[k].clone();
                tail.pop_leading();
                work.sub_scaled_shift(&f, &q, &tail);
            }
            None => rem.add_term(m, &c),
        }
    }
    rem
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
    sugar: u32,
}

fn s_poly(f: &MultiPoly, g: &MultiPoly, lcm: &Monomial) -> MultiPoly {
    let (mf, cf) = f.leading_term().unwrap();
    let (mg, cg) = g.leading_term().unwrap();
    let a = f.mul_term(&lcm.div(mf), &cf.inv().unwrap());
    let b = g.mul_term(&lcm.div(mg), &cg.inv().unwrap());
    a.sub(&b)
}

fn buchberger(vars: &Arc<Vec<String>>, gens: &[MultiPoly]) -> Vec<MultiPoly> {
    let mut basis: Vec<MultiPoly> = Vec::new();
    let mut sugars: Vec<u32> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();

    let lm = |p: &MultiPoly| p.leading_term().unwrap().0.clone();

    let insert = |h: MultiPoly, sugar: u32, basis: &mut Vec<MultiPoly>, sugars: &mut Vec<u32>, pairs: &mut Vec<Pair>| {
        let k = basis.len();
        let lh = lm(&h);
        // Gebauer–Möller: drop old pairs whose lcm is strictly divisible via the new element
        pairs.retain(|p| {
            let li = lm(&basis[p.i]);
            let lj = lm(&basis[p.j]);
            !(lh.divides(&p.lcm) && li.lcm(&lh) != p.lcm && lj.lcm(&lh) != p.lcm)
        });
        let mut fresh: Vec<Pair> = Vec::new();
        for i in 0..k {
            let li = lm(&basis[i]);
            let l = li.lcm(&lh);
            let s = (sugars[i] + l.degree() - li.degree()).max(sugar + l.degree() - lh.degree());
            fresh.push(Pair { i, j: k, lcm: l, sugar: s });
        }
        // among new pairs keep one per lcm class, skipping those whose lcm is a proper multiple of another
        let mut kept: Vec<Pair> = Vec::new();
        for p in fresh {
            let dominated = kept.iter().any(|q| q.lcm.divides(&p.lcm));
            if dominated {
                continue;
            }
            kept.retain(|q| !(p.lcm.divides(&q.lcm) && p.lcm != q.lcm));
            kept.push(p);
        }
        pairs.extend(kept);
        basis.push(h);
        sugars.push(sugar);
    };

    for g in gens {
        let r = reduce(g, &basis);
        if r.is_zero() {
            continue;
        }
        let s = g.total_degree().unwrap_or(0);
        insert(r.monic(), s, &mut basis, &mut sugars, &mut pairs);
    }

    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&a, &b| {
                (pairs[a].sugar, &pairs[a].lcm).cmp(&(pairs[b].sugar, &pairs[b].lcm))
            })
            .unwrap();
        let p = pairs.swap_remove(best);
        let (fi, fj) = (&basis[p.i], &basis[p.j]);
        if lm(fi).coprime(&lm(fj)) {
            continue;
        }
        let s = s_poly(fi, fj, &p.lcm);
        let r = reduce(&s, &basis);
        if !r.is_zero() {
            insert(r.monic(), p.sugar, &mut basis, &mut sugars, &mut pairs);
        }
    }

    // minimalise, then inter-reduce
    let lms: Vec<Monomial> = basis.iter().map(lm).collect();
    let mut keep: Vec<usize> = Vec::new();
    let mut seen: HashSet<Monomial> = HashSet::new();
    for (i, m) in lms.iter().enumerate() {
        let redundant = lms
            .iter()
            .enumerate()
            .any(|(j, o)| j != i && o.divides(m) && (o != m || j < i));
        if !redundant && seen.insert(m.clone()) {
            keep.push(i);
        }
    }
    let minimal: Vec<MultiPoly> = keep.into_iter().map(|i| basis[i].clone()).collect();
    let mut reduced: Vec<MultiPoly> = (0..minimal.len())
        .map(|i| {
            let mut g = minimal[i].clone();
            let (m, c) = g.pop_leading().unwrap();
            let others: Vec<MultiPoly> = minimal
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, h)| h.clone())
                .collect();
            let mut tail = reduce(&g, &others);
            tail.add_term(m, &c);
            tail.monic()
        })
        .collect();
    reduced.sort_by(|a, b| lm(a).cmp(&lm(b)));
    let _ = vars;
    reduced
}

/// Reduced Gröbner basis of the ideal.
pub fn groebner_basis(vars: Arc<Vec<String>>, generators: Vec<MultiPoly>) -> Result<PolyIdeal, AlgebraError> {
    PolyIdeal::new(vars, generators)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::parse::parse_poly;

    fn ideal(vars: &[&str], gens: &[&str]) -> PolyIdeal {
        let r = MultiPoly::ring(vars);
        let g = gens.iter().map(|s| parse_poly(s, &r).unwrap()).collect();
        PolyIdeal::new(r, g).unwrap()
    }

    fn strs(i: &PolyIdeal) -> Vec<String> {
        i.basis().iter().map(|g| g.to_string()).collect()
    }

    #[test]
    fn already_reduced_monomial_ideal() {
        let i = ideal(&["x", "y"], &["x^2", "y"]);
        assert_eq!(strs(&i), vec!["y", "x^2"]);
    }

    #[test]
    fn linear_elimination() {
        let i = ideal(&["x", "y"], &["x+y", "x-y"]);
        assert_eq!(strs(&i), vec!["y", "x"]);
    }

    #[test]
    fn fermat_quintic_jacobian() {
        let vars = ["x1", "x2", "x3", "x4", "x5"];
        let w = parse_poly("x1^5+x2^5+x3^5+x4^5+x5^5", &MultiPoly::ring(&vars)).unwrap();
        let i = PolyIdeal::new(w.vars().clone(), w.gradient()).unwrap();
        let mut got = strs(&i);
        got.sort();
        assert_eq!(got, vec!["x1^4", "x2^4", "x3^4", "x4^4", "x5^4"]);
    }

    #[test]
    fn normal_forms() {
        let i = ideal(&["x"], &["x^4"]);
        let r = i.vars().clone();
        assert!(i.normal_form(&parse_poly("x^5", &r).unwrap()).unwrap().is_zero());

        let j = ideal(&["x", "y"], &["5*x^4", "5*y^4"]);
        let p = parse_poly("x^3*y^3", j.vars()).unwrap();
        assert_eq!(j.normal_form(&p).unwrap(), p);

        let k = ideal(&["x", "y"], &["x"]);
        let q = parse_poly("(x+y)^2", k.vars()).unwrap();
        assert_eq!(k.normal_form(&q).unwrap().to_string(), "y^2");

        let other = MultiPoly::ring(&["u"]);
        assert!(matches!(
            k.normal_form(&MultiPoly::var(other, 0)),
            Err(AlgebraError::VariableMismatch { .. })
        ));
    }

    #[test]
    fn quotient_bases() {
        let a2 = ideal(&["x"], &["3*x^2"]);
        assert_eq!(a2.quotient_basis().dim(), Some(2));
        let nonisolated = ideal(&["x", "y"], &["2*x*y", "x^2"]);
        assert_eq!(nonisolated.quotient_basis(), QuotientBasis::Infinite);
    }

    #[test]
    fn nontrivial_buchberger() {
        // Jacobian of the E7 singularity x^3 + x*y^3: μ = 7
        let r = MultiPoly::ring(&["x", "y"]);
        let w = parse_poly("x^3 + x*y^3", &r).unwrap();
        let i = PolyIdeal::new(r, w.gradient()).unwrap();
        assert_eq!(i.quotient_basis().dim(), Some(7));
        // a cyclic-3 style system still terminates with a reduced basis
        let c = ideal(&["a", "b", "c"], &["a+b+c", "a*b+b*c+c*a", "a*b*c-1"]);
        for g in c.basis() {
            assert!(c.normal_form(g).unwrap().is_zero());
        }
        assert_eq!(c.quotient_basis().dim(), Some(6));
    }
}
