use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::abelian::{Group, GroupHom, Subgroup};
use crate::error::{Error, Result};

/// An element of `Q[G]` with exact rational coefficients indexed by group elements.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupRingElement {
    group: Group,
    coeffs: Vec<BigRational>,
}

pub(crate) fn same_group(a: &Group, b: &Group) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl GroupRingElement {
    pub fn zero(g: &Group) -> Self {
        GroupRingElement { group: g.clone(), coeffs: vec![BigRational::zero(); g.order()] }
    }

    pub fn one(g: &Group) -> Self {
        Self::basis(g, 0)
    }

    /// The group element `h` viewed in the ring.
    pub fn basis(g: &Group, h: usize) -> Self {
        let mut x = Self::zero(g);
        x.coeffs[h] = BigRational::one();
        x
    }

    pub fn scalar(g: &Group, q: BigRational) -> Self {
        let mut x = Self::zero(g);
        x.coeffs[0] = q;
        x
    }

    pub fn from_coeffs(g: &Group, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != g.order() {
            return Err(Error::GroupMismatch(format!(
                "{} coefficients for a group of order {}",
                coeffs.len(),
                g.order()
            )));
        }
        Ok(GroupRingElement { group: g.clone(), coeffs })
    }

    /// Sum of `c · h` over the given pairs.
    pub fn from_terms(g: &Group, terms: &[(usize, i64)]) -> Self {
        let mut x = Self::zero(g);
        for &(h, c) in terms {
            x.coeffs[h] += BigRational::from_integer(c.into());
        }
        x
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, h: usize) -> &BigRational {
        &self.coeffs[h]
    }

    pub fn into_coeffs(self) -> Vec<BigRational> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn augmentation(&self) -> BigRational {
        self.coeffs.iter().fold(BigRational::zero(), |a, c| a + c)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::GroupMismatch(format!(
                "{:?} vs {:?}",
                self.group.parts(),
                other.group.parts()
            )))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let g = &self.group;
        let coeffs = convolve(self.coeffs(), other.coeffs(), g.order(), |i, j| (g.mul(i, j), false));
        Ok(GroupRingElement { group: g.clone(), coeffs })
    }

    fn zip(&self, other: &Self, f: impl Fn(&BigRational, &BigRational) -> BigRational) -> Self {
        GroupRingElement {
            group: self.group.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        GroupRingElement { group: self.group.clone(), coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&BigRational::from_integer(k.into()))
    }

    /// Left multiplication by the group element `h`.
    pub fn translate(&self, h: usize) -> Self {
        let mut out = vec![BigRational::zero(); self.coeffs.len()];
        for (g, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out[self.group.mul(h, g)] = c.clone();
            }
        }
        GroupRingElement { group: self.group.clone(), coeffs: out }
    }

    /// The involution `g ↦ g^{-1}`.
    pub fn involution(&self) -> Self {
        let mut out = vec![BigRational::zero(); self.coeffs.len()];
        for (g, c) in self.coeffs.iter().enumerate() {
            out[self.group.inv(g)] = c.clone();
        }
        GroupRingElement { group: self.group.clone(), coeffs: out }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.group);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()))
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    /// True when every denominator is a product of primes from `allowed`.
    pub fn is_integral_away_from(&self, allowed: &[u64]) -> bool {
        let mut d = self.denominator();
        for &p in allowed {
            let p = BigInt::from(p);
            while (&d % &p).is_zero() {
                d /= &p;
            }
        }
        d.is_one()
    }

    /// True when no denominator is divisible by `p`.
    pub fn is_p_integral(&self, p: u64) -> bool {
        !(self.denominator() % BigInt::from(p)).is_zero()
    }

    /// Exact inverse in `Q[G]`, when it exists.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.group.order();
        // y · self = 1 reads Σ_h y_h self[h^{-1} g] = δ_{g,1}
        let g = &self.group;
        let mut sys: Vec<Vec<BigRational>> = (0..n)
            .map(|x| {
                let mut row: Vec<BigRational> =
                    (0..n).map(|h| self.coeffs[g.mul(g.inv(h), x)].clone()).collect();
                row.push(if x == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        let sol = solve_rational(&mut sys, n)
            .ok_or_else(|| Error::ZeroDivisor(format!("{self}")))?;
        Ok(GroupRingElement { group: self.group.clone(), coeffs: sol })
    }

    pub fn to_string_labels(&self) -> String {
        format!("{self}")
    }
}

/// Gauss–Jordan solve of a square augmented system; `None` when singular.
pub(crate) fn solve_rational(sys: &mut [Vec<BigRational>], n: usize) -> Option<Vec<BigRational>> {
    for col in 0..n {
        let piv = (col..n).find(|&r| !sys[r][col].is_zero())?;
        sys.swap(col, piv);
        let inv = sys[col][col].recip();
        for v in sys[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = sys[col].clone();
        for (r, row) in sys.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
    }
    Some(sys.iter().map(|r| r[n].clone()).collect())
}

/// Solves a possibly overdetermined system given as augmented rows with `n`
/// unknowns. `None` when it is singular or inconsistent.
pub(crate) fn solve_consistent(mut sys: Vec<Vec<BigRational>>, n: usize) -> Option<Vec<BigRational>> {
    let m = sys.len();
    for col in 0..n {
        let piv = (col..m).find(|&r| !sys[r][col].is_zero())?;
        sys.swap(col, piv);
        let inv = sys[col][col].recip();
        for v in sys[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = sys[col].clone();
        for (r, row) in sys.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
    }
    if sys[n..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    Some(sys[..n].iter().map(|r| r[n].clone()).collect())
}

/// Convolution `a * b` where `index(i, j)` gives the target slot of the
/// product of basis elements and whether it carries a sign.
///
/// Coefficients are scaled to a common denominator; the machine-word path is
/// used only when a bound on every partial sum fits in `i128`.
pub(crate) fn convolve(
    a: &[BigRational],
    b: &[BigRational],
    n: usize,
    index: impl Fn(usize, usize) -> (usize, bool),
) -> Vec<BigRational> {
    let da = a.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let db = b.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ia: Vec<(usize, BigInt)> = a
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.numer() * (&da / c.denom())))
        .collect();
    let ib: Vec<(usize, BigInt)> = b
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| (i, c.numer() * (&db / c.denom())))
        .collect();
    let den = &da * &db;
    let max_a = ia.iter().map(|(_, c)| c.abs()).max().unwrap_or_default();
    let max_b = ib.iter().map(|(_, c)| c.abs()).max().unwrap_or_default();
    let bound = &max_a * &max_b * BigInt::from(ia.len().min(ib.len()).max(1));
    let ints: Vec<BigInt> = if bound.bits() < 126 {
        let sa: Vec<(usize, i128)> = ia.iter().map(|(i, c)| (*i, c.to_i128().unwrap())).collect();
        let sb: Vec<(usize, i128)> = ib.iter().map(|(i, c)| (*i, c.to_i128().unwrap())).collect();
        let mut acc = vec![0i128; n];
        for &(i, x) in &sa {
            for &(j, y) in &sb {
                let (k, neg) = index(i, j);
                if neg {
                    acc[k] -= x * y;
                } else {
                    acc[k] += x * y;
                }
            }
        }
        acc.into_iter().map(BigInt::from).collect()
    } else {
        let mut acc = vec![BigInt::zero(); n];
        for (i, x) in &ia {
            for (j, y) in &ib {
                let (k, neg) = index(*i, *j);
                if neg {
                    acc[k] -= x * y;
                } else {
                    acc[k] += x * y;
                }
            }
        }
        acc
    };
    ints.into_iter().map(|c| BigRational::new(c, den.clone())).collect()
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&GroupRingElement> for &GroupRingElement {
            type Output = GroupRingElement;
            fn $m(self, rhs: &GroupRingElement) -> GroupRingElement {
                self.$f(rhs).expect("group ring operands over the same group")
            }
        }
        impl std::ops::$tr<GroupRingElement> for GroupRingElement {
            type Output = GroupRingElement;
            fn $m(self, rhs: GroupRingElement) -> GroupRingElement {
                (&self).$f(&rhs).expect("group ring operands over the same group")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl std::ops::Neg for &GroupRingElement {
    type Output = GroupRingElement;
    fn neg(self) -> GroupRingElement {
        self.scale_int(-1)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (g, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                terms.push(format!("{}*{}", c, self.group.label(g)));
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupRingElement[{self}]")
    }
}

/// `N(H) = Σ_{h∈H} h`.
pub fn norm_element(h: &Subgroup) -> GroupRingElement {
    let mut x = GroupRingElement::zero(h.group());
    for &e in h.elements() {
        x.coeffs[e] = BigRational::one();
    }
    x
}

/// `e_H = N(H)/|H|`.
pub fn idempotent(h: &Subgroup) -> GroupRingElement {
    norm_element(h).scale(&BigRational::new(BigInt::one(), BigInt::from(h.order())))
}

/// Linear extension of a group map.
pub fn restriction(pi: &GroupHom, x: &GroupRingElement) -> Result<GroupRingElement> {
    if !same_group(&pi.source, x.group()) {
        return Err(Error::GroupMismatch("restriction source differs from element group".into()));
    }
    let mut out = GroupRingElement::zero(&pi.target);
    for (g, c) in x.coeffs.iter().enumerate() {
        if !c.is_zero() {
            out.coeffs[pi.apply(g)] += c;
        }
    }
    Ok(out)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{quotient_map, subgroup_from_generators, FiniteAbelianGroup};

    fn cyc(n: u64) -> Group {
        FiniteAbelianGroup::new(&[n]).unwrap().into_arc()
    }

    #[test]
    fn ring_op_examples() {
        let c2 = cyc(2);
        let a = GroupRingElement::from_terms(&c2, &[(0, 1), (1, 1)]);
        let b = GroupRingElement::from_terms(&c2, &[(0, 1), (1, -1)]);
        assert!((&a * &b).is_zero());
        let c4 = cyc(4);
        let g = GroupRingElement::basis(&c4, 1);
        let g3 = GroupRingElement::basis(&c4, 3);
        assert_eq!(&g * &g3, GroupRingElement::one(&c4));
        let x = GroupRingElement::from_terms(&c2, &[(0, 1), (1, 2)]);
        assert_eq!(x.augmentation(), rat(3, 1));
        assert!(a.try_mul(&g).is_err());
    }

    #[test]
    fn norms_and_idempotents() {
        let c2 = cyc(2);
        let whole = Subgroup::whole(&c2);
        assert_eq!(norm_element(&Subgroup::trivial(&c2)), GroupRingElement::one(&c2));
        assert_eq!(norm_element(&whole), GroupRingElement::from_terms(&c2, &[(0, 1), (1, 1)]));
        let e = idempotent(&whole);
        assert_eq!(&e * &e, e);
        assert_eq!(e.augmentation(), rat(1, 1));
        let v = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
        assert_eq!(norm_element(&Subgroup::whole(&v)).augmentation(), rat(4, 1));
        let c3 = cyc(3);
        let e3 = idempotent(&Subgroup::whole(&c3));
        assert_eq!(e3.coeff(2), &rat(1, 3));
    }

    #[test]
    fn restriction_examples() {
        let c4 = cyc(4);
        let h = subgroup_from_generators(&c4, &[2]).unwrap();
        let (q, pi) = quotient_map(&c4, &h).unwrap();
        let x = GroupRingElement::from_terms(&c4, &[(0, 1), (1, 1), (2, 1)]);
        let gbar = pi.apply(1);
        assert_eq!(restriction(&pi, &x).unwrap(), GroupRingElement::from_terms(&q, &[(0, 2), (gbar, 1)]));
        let n4 = norm_element(&Subgroup::whole(&c4));
        assert_eq!(restriction(&pi, &n4).unwrap(), norm_element(&Subgroup::whole(&q)).scale_int(2));
        assert_eq!(restriction(&pi, &GroupRingElement::one(&c4)).unwrap(), GroupRingElement::one(&q));
    }

    #[test]
    fn inverse_exact() {
        let c3 = cyc(3);
        let x = GroupRingElement::from_terms(&c3, &[(0, 2), (1, 1)]);
        let y = x.inverse().unwrap();
        assert_eq!(&x * &y, GroupRingElement::one(&c3));
        let n = norm_element(&Subgroup::whole(&c3));
        assert!(n.inverse().is_err());
    }
}
