//! The minus quotient `Z[1/2][G]/(1+c)`, realized on coset representatives of
//! `G/⟨c⟩` with `c` acting as `-1`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::element::{convolve, same_group, GroupRingElement};
use crate::abelian::Group;
use crate::error::{Error, Result};

/// Representatives of `G/⟨c⟩`: the smaller index of each pair `{g, gc}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinusBasis {
    group: Group,
    conj: usize,
    reps: Vec<usize>,
    /// For every group element: its representative slot and whether it is `-rep`.
    pos: Vec<(usize, bool)>,
}

impl MinusBasis {
    pub fn new(g: &Group) -> Result<Arc<MinusBasis>> {
        let c = g.conjugation().ok_or(Error::NoConjugation)?;
        let mut pos = vec![(usize::MAX, false); g.order()];
        let mut reps = Vec::with_capacity(g.order() / 2);
        for x in g.elements() {
            if pos[x].0 != usize::MAX {
                continue;
            }
            let slot = reps.len();
            reps.push(x);
            pos[x] = (slot, false);
            pos[g.mul(x, c)] = (slot, true);
        }
        Ok(Arc::new(MinusBasis { group: g.clone(), conj: c, reps, pos }))
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn conjugation(&self) -> usize {
        self.conj
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[usize] {
        &self.reps
    }

    /// Slot and sign of the image of a group element.
    pub fn position(&self, g: usize) -> (usize, bool) {
        self.pos[g]
    }

    /// Slot and sign of `rep_i · rep_j`.
    pub fn product_slot(&self, i: usize, j: usize) -> (usize, bool) {
        self.pos[self.group.mul(self.reps[i], self.reps[j])]
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MinusRingElement {
    basis: Arc<MinusBasis>,
    coeffs: Vec<BigRational>,
}

fn same_basis(a: &Arc<MinusBasis>, b: &Arc<MinusBasis>) -> bool {
    Arc::ptr_eq(a, b) || (same_group(&a.group, &b.group) && a.conj == b.conj)
}

impl MinusRingElement {
    pub fn zero(b: &Arc<MinusBasis>) -> Self {
        MinusRingElement { basis: b.clone(), coeffs: vec![BigRational::zero(); b.dim()] }
    }

    pub fn one(b: &Arc<MinusBasis>) -> Self {
        Self::group_element(b, 0)
    }

    /// Image of the group element `g`.
    pub fn group_element(b: &Arc<MinusBasis>, g: usize) -> Self {
        let mut x = Self::zero(b);
        let (s, neg) = b.position(g);
        x.coeffs[s] = if neg { -BigRational::one() } else { BigRational::one() };
        x
    }

    pub fn scalar(b: &Arc<MinusBasis>, q: BigRational) -> Self {
        let mut x = Self::zero(b);
        x.coeffs[0] = q;
        x
    }

    pub fn from_coeffs(b: &Arc<MinusBasis>, coeffs: Vec<BigRational>) -> Result<Self> {
        if coeffs.len() != b.dim() {
            return Err(Error::GroupMismatch(format!("{} coefficients for minus dimension {}", coeffs.len(), b.dim())));
        }
        Ok(MinusRingElement { basis: b.clone(), coeffs })
    }

    pub fn basis(&self) -> &Arc<MinusBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigRational> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    fn check(&self, o: &Self) -> Result<()> {
        if same_basis(&self.basis, &o.basis) {
            Ok(())
        } else {
            Err(Error::GroupMismatch("minus elements over different groups".into()))
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(MinusRingElement {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        Ok(MinusRingElement {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let b = &self.basis;
        let coeffs = convolve(&self.coeffs, &o.coeffs, b.dim(), |i, j| b.product_slot(i, j));
        Ok(MinusRingElement { basis: b.clone(), coeffs })
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        MinusRingElement { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&BigRational::from_integer(k.into()))
    }

    pub fn denominator(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::one(), |a, c| a.lcm(c.denom()))
    }

    /// Denominators avoid `p`.
    pub fn is_p_integral(&self, p: u64) -> bool {
        !(self.denominator() % BigInt::from(p)).is_zero()
    }

    /// Denominators are powers of 2.
    pub fn is_two_integral(&self) -> bool {
        let mut d = self.denominator();
        while d.is_even() {
            d /= 2;
        }
        d.is_one()
    }

    /// The element `½(1−c)·x` of `Q[G]` corresponding to this class.
    pub fn lift(&self) -> GroupRingElement {
        let g = &self.basis.group;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let mut out = vec![BigRational::zero(); g.order()];
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = self.basis.reps[i];
            out[r] += c * &half;
            out[g.mul(r, self.basis.conj)] -= c * &half;
        }
        GroupRingElement::from_coeffs(g, out).expect("lift has full length")
    }
}

/// Image of `x` in the minus ring: coefficient `x_r − x_{rc}` at each representative.
pub fn minus_project(x: &GroupRingElement) -> Result<MinusRingElement> {
    let b = MinusBasis::new(x.group())?;
    Ok(minus_project_to(&b, x))
}

/// As [`minus_project`] into an existing basis.
pub fn minus_project_to(b: &Arc<MinusBasis>, x: &GroupRingElement) -> MinusRingElement {
    let mut out = vec![BigRational::zero(); b.dim()];
    for (g, c) in x.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let (s, neg) = b.position(g);
        if neg {
            out[s] -= c;
        } else {
            out[s] += c;
        }
    }
    MinusRingElement { basis: b.clone(), coeffs: out }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&MinusRingElement> for &MinusRingElement {
            type Output = MinusRingElement;
            fn $m(self, rhs: &MinusRingElement) -> MinusRingElement {
                self.$f(rhs).expect("minus ring operands over the same group")
            }
        }
        impl std::ops::$tr<MinusRingElement> for MinusRingElement {
            type Output = MinusRingElement;
            fn $m(self, rhs: MinusRingElement) -> MinusRingElement {
                (&self).$f(&rhs).expect("minus ring operands over the same group")
            }
        }
    };
}
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl fmt::Display for MinusRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.basis.group;
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("{}*{}", c, g.label(self.basis.reps[i])))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for MinusRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MinusRingElement[{self}]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::FiniteAbelianGroup;
    use crate::group_ring::element::rat;

    fn c2() -> Group {
        FiniteAbelianGroup::new(&[2]).unwrap().with_conjugation(1).unwrap().into_arc()
    }

    #[test]
    fn projection_examples() {
        let g = c2();
        let one = minus_project(&GroupRingElement::one(&g)).unwrap();
        assert_eq!(one.coeffs(), &[rat(1, 1)]);
        let n = GroupRingElement::from_terms(&g, &[(0, 1), (1, 1)]);
        assert!(minus_project(&n).unwrap().is_zero());
        let theta = GroupRingElement::from_coeffs(&g, vec![rat(1, 4), rat(-1, 4)]).unwrap();
        assert_eq!(minus_project(&theta).unwrap().coeffs(), &[rat(1, 2)]);
        let plain = FiniteAbelianGroup::new(&[2]).unwrap().into_arc();
        assert_eq!(minus_project(&GroupRingElement::one(&plain)), Err(Error::NoConjugation));
    }

    #[test]
    fn lift_is_section() {
        let g = FiniteAbelianGroup::new(&[2, 4]).unwrap().with_conjugation(4).unwrap().into_arc();
        let b = MinusBasis::new(&g).unwrap();
        let x = MinusRingElement::from_coeffs(&b, vec![rat(1, 1), rat(-2, 3), rat(0, 1), rat(5, 1)]).unwrap();
        assert_eq!(minus_project_to(&b, &x.lift()), x);
    }
}
