//! Finite diagonal abelian groups acting on coordinates: elements, group
//! closure, fixed loci, ages and inertia sectors.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::exactalg::rational::{denom_u64, fmt_rational, frac, lcm_u64, Rational};
use crate::glsm::GlsmModel;

pub const DEFAULT_GROUP_ORDER_BOUND: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrbifoldError {
    #[error("group order exceeds the bound {bound}")]
    GroupTooLarge { bound: usize },
    #[error("generator has {got} phases but the representation has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(
        "sector geometry needs the affine LG regime (no continuous torus, V^ss = V); \
         this model has a rank-{rank} torus, so only narrow-sector bookkeeping is available"
    )]
    NotAffine { rank: usize },
}

/// Diagonal element `x_i ↦ exp(2πi·phase_i)·x_i`, phases in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    phases: Vec<Rational>,
}

impl GroupElement {
    pub fn new(phases: Vec<Rational>) -> Self {
        GroupElement {
            phases: phases.iter().map(frac).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            phases: vec![Rational::zero(); n],
        }
    }

    pub fn phases(&self) -> &[Rational] {
        &self.phases
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn is_identity(&self) -> bool {
        self.phases.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement::new(self.phases.iter().zip(&other.phases).map(|(a, b)| a + b).collect())
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement::new(self.phases.iter().map(|a| -a).collect())
    }

    pub fn pow(&self, k: i64) -> GroupElement {
        GroupElement::new(self.phases.iter().map(|a| a * Rational::from_integer(k.into())).collect())
    }

    pub fn order(&self) -> u64 {
        self.phases.iter().fold(1, |acc, p| lcm_u64(acc, denom_u64(p)))
    }

    /// Coordinates fixed by the element (phase zero).
    pub fn fixed_support(&self) -> Vec<usize> {
        (0..self.phases.len()).filter(|&i| self.phases[i].is_zero()).collect()
    }

    pub fn moving_support(&self) -> Vec<usize> {
        (0..self.phases.len()).filter(|&i| !self.phases[i].is_zero()).collect()
    }

    pub fn age(&self) -> Rational {
        self.phases.iter().sum()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.phases.iter().map(fmt_rational).collect()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(","))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn age(h: &GroupElement) -> Rational {
    h.age()
}

/// All elements of the group generated by `generators`, sorted by phase vector.
pub fn enumerate_group(generators: &[GroupElement], n: usize, bound: usize) -> Result<Vec<GroupElement>, OrbifoldError> {
    for g in generators {
        if g.dim() != n {
            return Err(OrbifoldError::DimensionMismatch { expected: n, got: g.dim() });
        }
    }
    let mut seen: BTreeSet<GroupElement> = BTreeSet::new();
    seen.insert(GroupElement::identity(n));
    let mut frontier = vec![GroupElement::identity(n)];
    while let Some(x) = frontier.pop() {
        for g in generators {
            let y = x.mul(g);
            if seen.insert(y.clone()) {
                if seen.len() > bound {
                    return Err(OrbifoldError::GroupTooLarge { bound });
                }
                frontier.push(y);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectorRecord {
    pub element: Vec<String>,
    pub fixed_support: Vec<String>,
    pub narrow: bool,
    pub age: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub element: GroupElement,
    pub fixed_support: Vec<usize>,
    pub narrow: bool,
    pub age: Rational,
}

impl Sector {
    pub fn of(h: GroupElement) -> Self {
        let fixed_support = h.fixed_support();
        Sector {
            narrow: fixed_support.is_empty(),
            age: h.age(),
            fixed_support,
            element: h,
        }
    }

    pub fn record(&self, variables: &[String]) -> SectorRecord {
        SectorRecord {
            element: self.element.to_strings(),
            fixed_support: self.fixed_support.iter().map(|&i| variables[i].clone()).collect(),
            narrow: self.narrow,
            age: fmt_rational(&self.age),
        }
    }
}

/// One sector per element of the (abelian) symmetry group.
pub fn inertia_sectors(model: &GlsmModel, bound: usize) -> Result<Vec<Sector>, OrbifoldError> {
    if model.torus_rank() > 0 {
        return Err(OrbifoldError::NotAffine { rank: model.torus_rank() });
    }
    let group = enumerate_group(&model.finite_generators(), model.n_vars(), bound)?;
    Ok(group.into_iter().map(Sector::of).collect())
}

/// `J = exp(2πi c/d_w)` as a diagonal element.
pub fn j_element(r_charges: &[Rational], d_w: u32) -> GroupElement {
    let d = Rational::from_integer(d_w.into());
    GroupElement::new(r_charges.iter().map(|c| c / &d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::rat;
    use proptest::prelude::*;

    fn el(ps: &[(i64, i64)]) -> GroupElement {
        GroupElement::new(ps.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn group_sizes() {
        let g = enumerate_group(&[el(&[(1, 5); 5])], 5, 100).unwrap();
        assert_eq!(g.len(), 5);
        let k = enumerate_group(&[el(&[(1, 2), (0, 1)]), el(&[(0, 1), (1, 2)])], 2, 100).unwrap();
        assert_eq!(k.len(), 4);
        let a = enumerate_group(&[el(&[(1, 3), (1, 3)])], 2, 100).unwrap();
        let b = enumerate_group(&[el(&[(2, 3), (2, 3)])], 2, 100).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            enumerate_group(&[el(&[(1, 7)])], 1, 3),
            Err(OrbifoldError::GroupTooLarge { .. })
        ));
    }

    #[test]
    fn ages_and_fixed_loci() {
        assert_eq!(GroupElement::identity(3).age(), rat(0, 1));
        for k in 0..5 {
            assert_eq!(el(&[(k, 5); 5]).age(), rat(k, 1));
        }
        assert_eq!(el(&[(1, 2), (1, 2)]).age(), rat(1, 1));
        let s = Sector::of(el(&[(1, 2), (0, 1)]));
        assert_eq!(s.fixed_support, vec![1]);
        assert!(!s.narrow);
        assert!(Sector::of(el(&[(1, 5); 5])).narrow);
    }

    #[test]
    fn j_of_charges() {
        let j = j_element(&[rat(2, 1), rat(0, 1)], 2);
        assert!(j.is_identity());
        let q = j_element(&vec![rat(1, 1); 5], 5);
        assert_eq!(q, el(&[(1, 5); 5]));
        // fixed support of J is {i : d_w | c_i}
        let m = j_element(&[rat(5, 1), rat(2, 1), rat(0, 1)], 5);
        assert_eq!(m.fixed_support(), vec![0, 2]);
    }

    proptest! {
        #[test]
        fn inverse_symmetries(ps in prop::collection::vec((0i64..12, 1i64..12), 1..6)) {
            let h = GroupElement::new(ps.iter().map(|&(n, d)| rat(n, d)).collect());
            let hi = h.inverse();
            prop_assert_eq!(h.age() + hi.age(), Rational::from_integer(h.moving_support().len().into()));
            prop_assert_eq!(h.fixed_support(), hi.fixed_support());
            prop_assert!(h.mul(&hi).is_identity());
        }
    }
}
