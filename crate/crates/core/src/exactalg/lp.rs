//! Exact two-phase simplex (Bland's rule) for cone membership with Farkas
//! certificates.

use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq)]
pub enum ConeMembership {
    /// `target = Σ coefficients[i]·vectors[i]` with nonnegative coefficients.
    Member { coefficients: Vec<Rational> },
    /// `y·v ≤ 0` for every generator and `y·target > 0`.
    Separated { certificate: Vec<Rational> },
}

impl ConeMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, ConeMembership::Member { .. })
    }

    /// Re-checks the certificate by substitution.
    pub fn verify(&self, vectors: &[Vec<Rational>], target: &[Rational]) -> bool {
        let dot = |a: &[Rational], b: &[Rational]| -> Rational { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        match self {
            ConeMembership::Member { coefficients } => {
                coefficients.len() == vectors.len()
                    && coefficients.iter().all(|c| !c.is_negative())
                    && (0..target.len()).all(|k| {
                        let s: Rational = vectors.iter().zip(coefficients).map(|(v, c)| &v[k] * c).sum();
                        s == target[k]
                    })
            }
            ConeMembership::Separated { certificate } => {
                vectors.iter().all(|v| !dot(certificate, v).is_positive()) && dot(certificate, target).is_positive()
            }
        }
    }
}

/// Decides whether `target` lies in the nonnegative cone of `vectors`.
pub fn cone_membership(vectors: &[Vec<Rational>], target: &[Rational]) -> Result<ConeMembership, AlgebraError> {
    let d = target.len();
    for v in vectors {
        if v.len() != d {
            return Err(AlgebraError::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    if vectors.is_empty() {
        return Ok(if target.iter().all(Zero::is_zero) {
            ConeMembership::Member { coefficients: Vec::new() }
        } else {
            ConeMembership::Separated { certificate: target.to_vec() }
        });
    }
    Ok(phase_one(vectors, target))
}

fn phase_one(vectors: &[Vec<Rational>], target: &[Rational]) -> ConeMembership {
    let d = target.len();
    let m = vectors.len();
    let cols = m + d;
    // rows normalised to a nonnegative right-hand side
    let signs: Vec<Rational> = target
        .iter()
        .map(|b| if b.is_negative() { -Rational::one() } else { Rational::one() })
        .collect();
    let mut tab: Vec<Vec<Rational>> = (0..d)
        .map(|i| {
            let mut row = vec![Rational::zero(); cols + 1];
            for j in 0..m {
                row[j] = &signs[i] * &vectors[j][i];
            }
            row[m + i] = Rational::one();
            row[cols] = &signs[i] * &target[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (m..cols).collect();
    // reduced costs of "minimise Σ artificials"; last entry is −objective
    let mut cost = vec![Rational::zero(); cols + 1];
    for j in m..cols {
        cost[j] = Rational::one();
    }
    for row in &tab {
        for j in 0..=cols {
            cost[j] -= &row[j];
        }
    }

    loop {
        let Some(enter) = (0..cols).find(|&j| cost[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..d {
            if tab[i][enter].is_positive() {
                let ratio = &tab[i][cols] / &tab[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // phase one is bounded below by zero, so a leaving row always exists
        let (r, _) = leave.expect("phase one is bounded");
        let piv = tab[r][enter].clone();
        for x in tab[r].iter_mut() {
            *x /= &piv;
        }
        let prow = tab[r].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for j in 0..=cols {
                    if !prow[j].is_zero() {
                        row[j] -= &f * &prow[j];
                    }
                }
            }
        }
        let f = cost[enter].clone();
        for j in 0..=cols {
            if !prow[j].is_zero() {
                cost[j] -= &f * &prow[j];
            }
        }
        basis[r] = enter;
    }

    let objective = -cost[cols].clone();
    if objective.is_zero() {
        let mut coefficients = vec![Rational::zero(); m];
        for (i, &b) in basis.iter().enumerate() {
            if b < m {
                coefficients[b] = tab[i][cols].clone();
            }
        }
        ConeMembership::Member { coefficients }
    } else {
        // dual of the optimal phase-one basis: u_k = 1 − reduced cost of artificial k
        let certificate = (0..d).map(|k| &signs[k] * (Rational::one() - &cost[m + k])).collect();
        ConeMembership::Separated { certificate }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rational::int;
    use proptest::prelude::*;

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn spanning_cone() {
        let r = cone_membership(&[v(&[1, 0]), v(&[0, 1])], &v(&[2, 3])).unwrap();
        assert_eq!(r, ConeMembership::Member { coefficients: v(&[2, 3]) });
    }

    #[test]
    fn ray_separation() {
        let r = cone_membership(&[v(&[1, 0])], &v(&[0, 1])).unwrap();
        assert_eq!(r, ConeMembership::Separated { certificate: v(&[0, 1]) });
    }

    #[test]
    fn quintic_support() {
        let vs: Vec<Vec<Rational>> = (0..5).map(|_| v(&[1, 0])).collect();
        assert!(cone_membership(&vs, &v(&[1, 0])).unwrap().is_member());
        assert!(!cone_membership(&vs, &v(&[-5, 1])).unwrap().is_member());
    }

    #[test]
    fn empty_generators() {
        let r = cone_membership(&[], &v(&[0, 2])).unwrap();
        assert!(!r.is_member());
        assert!(r.verify(&[], &v(&[0, 2])));
        assert!(cone_membership(&[], &v(&[0, 0])).unwrap().is_member());
        assert!(cone_membership(&[v(&[1])], &v(&[1, 2])).is_err());
    }

    proptest! {
        #[test]
        fn farkas_certificates_verify(
            gens in prop::collection::vec(prop::collection::vec(-4i64..5, 3), 0..6),
            target in prop::collection::vec(-4i64..5, 3),
        ) {
            let vs: Vec<Vec<Rational>> = gens.iter().map(|g| v(g)).collect();
            let t = v(&target);
            let r = cone_membership(&vs, &t).unwrap();
            prop_assert!(r.verify(&vs, &t));
        }
    }
}
