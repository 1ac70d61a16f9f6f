//! Exact arithmetic in cyclotomic fields ℚ(ζ_N).
//!
//! An element of ℚ(ζ_N) is stored as its residue modulo the N-th cyclotomic
//! polynomial Φ_N, i.e. a coefficient vector of length φ(N) in the power
//! basis 1, ζ_N, …, ζ_N^{φ(N)-1}. Elements of different orders are combined
//! by embedding both into ℚ(ζ_lcm). Results that happen to be rational are
//! stored with order 1, so purely rational work never pays for the
//! cyclotomic reduction.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};


use super::rational::{fmt_rational, Rational};

/// Dense univariate polynomial over ℚ, lowest degree first.
type UPoly = Vec<Rational>;

fn trim(p: &mut UPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn upoly_mul(a: &[Rational], b: &[Rational]) -> UPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    trim(&mut out);
    out
}

fn upoly_sub(a: &[Rational], b: &[Rational]) -> UPoly {
    let n = a.len().max(b.len());
    let mut out: UPoly = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_else(Rational::zero);
            let y = b.get(i).cloned().unwrap_or_else(Rational::zero);
            x - y
        })
        .collect();
    trim(&mut out);
    out
}

/// Quotient and remainder; `b` must be nonzero.
fn upoly_divrem(a: &[Rational], b: &[Rational]) -> (UPoly, UPoly) {
    let mut r: UPoly = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[k + i] -= &c * bi;
        }
        q[k] = c;
        trim(&mut r);
    }
    trim(&mut q);
    (q, r)
}

/// Returns `s` with `s·a ≡ gcd (mod m)`; `gcd` is monic.
fn upoly_inverse_mod(a: &[Rational], m: &[Rational]) -> Option<UPoly> {
    let (mut r0, mut r1) = (m.to_vec(), a.to_vec());
    trim(&mut r1);
    let (mut s0, mut s1): (UPoly, UPoly) = (Vec::new(), vec![Rational::one()]);
    while !r1.is_empty() {
        let (q, r) = upoly_divrem(&r0, &r1);
        let s = upoly_sub(&s0, &upoly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = r0[0].recip();
    Some(s0.into_iter().map(|x| x * &c).collect())
}

fn cyclotomic_poly(n: u32, cache: &mut HashMap<u32, UPoly>) -> UPoly {
    if let Some(p) = cache.get(&n) {
        return p.clone();
    }
    // x^n - 1 = ∏_{d | n} Φ_d
    let mut p = vec![Rational::zero(); n as usize + 1];
    p[0] = -Rational::one();
    p[n as usize] = Rational::one();
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d, cache);
            p = upoly_divrem(&p, &phi_d).0;
        }
    }
    cache.insert(n, p.clone());
    p
}

/// The field ℚ(ζ_N) with its defining modulus Φ_N.
#[derive(Debug)]
pub struct CyclotomicField {
    order: u32,
    modulus: UPoly,
}

impl CyclotomicField {
    pub fn get(order: u32) -> Arc<CyclotomicField> {
        assert!(order >= 1, "cyclotomic order must be positive");
        static FIELDS: OnceLock<Mutex<(HashMap<u32, Arc<CyclotomicField>>, HashMap<u32, UPoly>)>> =
            OnceLock::new();
        let mut guard = FIELDS
            .get_or_init(|| Mutex::new((HashMap::new(), HashMap::new())))
            .lock()
            .expect("cyclotomic cache poisoned");
        let (fields, polys) = &mut *guard;
        if let Some(f) = fields.get(&order) {
            return f.clone();
        }
        let modulus = cyclotomic_poly(order, polys);
        let field = Arc::new(CyclotomicField { order, modulus });
        fields.insert(order, field.clone());
        field
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Euler φ(N), the degree of the field over ℚ.
    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[Rational] {
        &self.modulus
    }

    fn reduce(&self, p: &[Rational]) -> Vec<Rational> {
        let mut r = if p.len() > self.degree() {
            upoly_divrem(p, &self.modulus).1
        } else {
            p.to_vec()
        };
        r.resize(self.degree(), Rational::zero());
        r
    }
}

#[derive(Clone)]
pub struct CyclotomicNumber {
    field: Arc<CyclotomicField>,
    coeffs: Vec<Rational>,
}

impl CyclotomicNumber {
    pub fn from_rational(r: Rational) -> Self {
        CyclotomicNumber {
            field: CyclotomicField::get(1),
            coeffs: vec![r],
        }
    }

    pub fn from_i64(n: i64) -> Self {
        Self::from_rational(Rational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    /// ζ_N^k with ζ_N = exp(2πi/N).
    pub fn zeta_pow(order: u32, k: i64) -> Self {
        let field = CyclotomicField::get(order);
        let e = k.rem_euclid(order as i64) as usize;
        let mut p = vec![Rational::zero(); e + 1];
        p[e] = Rational::one();
        let coeffs = field.reduce(&p);
        Self { field, coeffs }.normalized()
    }

    /// exp(2πi·turns). Requires the denominator of `turns` to divide
    /// `order`; the result is expressed in ℚ(ζ_order).
    pub fn root_of_unity(turns: &Rational, order: u32) -> Option<Self> {
        let scaled = turns * Rational::from_integer(order.into());
        if !scaled.is_integer() {
            return None;
        }
        let k: i64 = scaled
            .to_integer()
            .mod_floor(&(order as i64).into())
            .try_into()
            .ok()?;
        Some(Self::zeta_pow(order, k))
    }

    /// exp(2πi·turns) in the smallest cyclotomic field containing it.
    pub fn from_turns(turns: &Rational) -> Self {
        let order: u32 = turns.denom().try_into().expect("root of unity order exceeds u32");
        Self::root_of_unity(turns, order).expect("denominator divides its own order")
    }

    /// Builds an element from coefficients on the power basis of ℚ(ζ_order).
    pub fn from_coeffs(order: u32, coeffs: &[Rational]) -> Self {
        let field = CyclotomicField::get(order);
        let coeffs = field.reduce(coeffs);
        Self { field, coeffs }.normalized()
    }

    pub fn order(&self) -> u32 {
        self.field.order
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational().then(|| self.coeffs[0].clone())
    }

    fn normalized(self) -> Self {
        if self.field.order != 1 && self.is_rational() {
            Self::from_rational(self.coeffs[0].clone())
        } else {
            self
        }
    }

    /// Embeds into ℚ(ζ_m); `m` must be a multiple of the current order.
    pub fn lift(&self, m: u32) -> Self {
        let n = self.field.order;
        assert!(m % n == 0, "cannot embed Q(z_{n}) into Q(z_{m})");
        if n == m {
            return self.clone();
        }
        let step = (m / n) as usize;
        let target = CyclotomicField::get(m);
        let mut p = vec![Rational::zero(); step * (self.coeffs.len() - 1) + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            p[j * step] = c.clone();
        }
        let coeffs = target.reduce(&p);
        Self {
            field: target,
            coeffs,
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let (a, b) = (self.field.order, other.field.order);
        if a == b {
            return (self.clone(), other.clone());
        }
        let m = a.lcm(&b);
        (self.lift(m), other.lift(m))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
        .normalized()
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.to_rational() {
            return Some(Self::from_rational(r.recip()));
        }
        let s = upoly_inverse_mod(&self.coeffs, &self.field.modulus)?;
        Some(
            Self {
                field: self.field.clone(),
                coeffs: self.field.reduce(&s),
            }
            .normalized(),
        )
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Nonzero components as (coefficient, power of ζ_order).
    pub fn components(&self) -> Vec<(Rational, usize)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c.clone(), k))
            .collect()
    }
}

impl PartialEq for CyclotomicNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.field.order == other.field.order {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.aligned(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CyclotomicNumber {}

impl<'a> Add<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn add(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        if self.field.order == 1 && rhs.field.order == 1 {
            return CyclotomicNumber::from_rational(&self.coeffs[0] + &rhs.coeffs[0]);
        }
        let (a, b) = self.aligned(rhs);
        CyclotomicNumber {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
            field: a.field,
        }
        .normalized()
    }
}

impl<'a> Sub<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn sub(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        if self.field.order == 1 && rhs.field.order == 1 {
            return CyclotomicNumber::from_rational(&self.coeffs[0] - &rhs.coeffs[0]);
        }
        let (a, b) = self.aligned(rhs);
        CyclotomicNumber {
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
            field: a.field,
        }
        .normalized()
    }
}

impl<'a> Mul<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn mul(self, rhs: &CyclotomicNumber) -> CyclotomicNumber {
        if rhs.field.order == 1 {
            return self.scale(&rhs.coeffs[0]);
        }
        if self.field.order == 1 {
            return rhs.scale(&self.coeffs[0]);
        }
        let (a, b) = self.aligned(rhs);
        let prod = upoly_mul(&a.coeffs, &b.coeffs);
        CyclotomicNumber {
            coeffs: a.field.reduce(&prod),
            field: a.field,
        }
        .normalized()
    }
}

impl Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        CyclotomicNumber {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CyclotomicNumber> for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $m(self, rhs: CyclotomicNumber) -> CyclotomicNumber {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        -&self
    }
}

impl super::field::Field for CyclotomicNumber {
    fn zero() -> Self {
        CyclotomicNumber::zero()
    }
    fn one() -> Self {
        CyclotomicNumber::one()
    }
    fn is_zero(&self) -> bool {
        CyclotomicNumber::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn minus(&self, other: &Self) -> Self {
        self - other
    }
    fn times(&self, other: &Self) -> Self {
        self * other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        self.inv()
    }
}

impl From<Rational> for CyclotomicNumber {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

/// Writes a rational factor the way polynomial coefficients are printed:
/// integers bare, fractions parenthesised.
pub(crate) fn fmt_coeff_abs(r: &Rational) -> String {
    let a = r.abs();
    if a.is_integer() {
        a.numer().to_string()
    } else {
        format!("({})", fmt_rational(&a))
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let comps = self.components();
        if comps.is_empty() {
            return write!(f, "0");
        }
        let n = self.field.order;
        for (i, (c, k)) in comps.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mag = fmt_coeff_abs(c);
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    let z = if *k == 1 {
                        format!("z{n}")
                    } else {
                        format!("z{n}^{k}")
                    };
                    if c.abs().is_one() {
                        write!(f, "{z}")?
                    } else {
                        write!(f, "{mag}*{z}")?
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
