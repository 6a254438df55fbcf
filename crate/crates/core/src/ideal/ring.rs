use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::abelian::{Group, GroupHom};
use crate::error::{Error, Result};
use crate::group_ring::element::{convolve, same_group, solve_rational};
use crate::group_ring::{
    is_minus_nonzero_divisor, is_nonzero_divisor, minus_project_to, GroupRingElement, MinusBasis, MinusRingElement,
};

/// The ambient ring of an ideal: `Q[G]` or its minus quotient.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ring {
    Full(Group),
    Minus(Arc<MinusBasis>),
}

impl Ring {
    pub fn full(g: &Group) -> Ring {
        Ring::Full(g.clone())
    }

    pub fn minus(g: &Group) -> Result<Ring> {
        Ok(Ring::Minus(MinusBasis::new(g)?))
    }

    pub fn group(&self) -> &Group {
        match self {
            Ring::Full(g) => g,
            Ring::Minus(b) => b.group(),
        }
    }

    pub fn is_minus(&self) -> bool {
        matches!(self, Ring::Minus(_))
    }

    pub fn dim(&self) -> usize {
        match self {
            Ring::Full(g) => g.order(),
            Ring::Minus(b) => b.dim(),
        }
    }

    pub fn same(&self, other: &Ring) -> bool {
        match (self, other) {
            (Ring::Full(a), Ring::Full(b)) => same_group(a, b),
            (Ring::Minus(a), Ring::Minus(b)) => {
                Arc::ptr_eq(a, b) || (same_group(a.group(), b.group()) && a.conjugation() == b.conjugation())
            }
            _ => false,
        }
    }

    /// Group elements whose translates span every orbit.
    pub fn orbit_elements(&self) -> Vec<usize> {
        match self {
            Ring::Full(g) => g.elements().collect(),
            Ring::Minus(b) => b.reps().to_vec(),
        }
    }

    pub fn one(&self) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.dim()];
        v[0] = BigRational::one();
        v
    }

    /// Image of the group element `g`.
    pub fn group_element(&self, g: usize) -> Vec<BigRational> {
        self.act(g, &self.one())
    }

    /// Multiplication by the group element `g`.
    pub fn act(&self, g: usize, v: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); v.len()];
        match self {
            Ring::Full(grp) => {
                for (h, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        out[grp.mul(g, h)] = c.clone();
                    }
                }
            }
            Ring::Minus(b) => {
                for (i, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        let (s, neg) = b.position(b.group().mul(g, b.reps()[i]));
                        out[s] = if neg { -c } else { c.clone() };
                    }
                }
            }
        }
        out
    }

    pub fn mul(&self, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        match self {
            Ring::Full(g) => convolve(a, b, g.order(), |i, j| (g.mul(i, j), false)),
            Ring::Minus(mb) => convolve(a, b, mb.dim(), |i, j| mb.product_slot(i, j)),
        }
    }

    /// Coordinates of a full group-ring element in this ring.
    pub fn embed(&self, x: &GroupRingElement) -> Result<Vec<BigRational>> {
        if !same_group(self.group(), x.group()) {
            return Err(Error::GroupMismatch("element from another group".into()));
        }
        Ok(match self {
            Ring::Full(_) => x.coeffs().to_vec(),
            Ring::Minus(b) => minus_project_to(b, x).into_coeffs(),
        })
    }

    pub fn embed_minus(&self, x: &MinusRingElement) -> Result<Vec<BigRational>> {
        match self {
            Ring::Minus(_) if Ring::Minus(x.basis().clone()).same(self) => {
                Ok(x.coeffs().to_vec())
            }
            _ => Err(Error::RingMismatch("minus element outside its minus ring".into())),
        }
    }

    /// Ring for the target of `pi`, of the same kind.
    pub fn image_ring(&self, pi: &GroupHom) -> Result<Ring> {
        match self {
            Ring::Full(_) => Ok(Ring::Full(pi.target.clone())),
            Ring::Minus(b) => {
                let c = pi.apply(b.conjugation());
                if pi.target.conjugation() != Some(c) {
                    return Err(Error::RingMismatch("projection does not carry conjugation to conjugation".into()));
                }
                Ring::minus(&pi.target)
            }
        }
    }

    /// Linear extension of `pi` from this ring to `target`.
    pub fn map_element(&self, pi: &GroupHom, target: &Ring, v: &[BigRational]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); target.dim()];
        match (self, target) {
            (Ring::Full(_), Ring::Full(_)) => {
                for (g, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        out[pi.apply(g)] += c;
                    }
                }
            }
            (Ring::Minus(b), Ring::Minus(tb)) => {
                for (i, c) in v.iter().enumerate() {
                    if !c.is_zero() {
                        let (s, neg) = tb.position(pi.apply(b.reps()[i]));
                        if neg {
                            out[s] -= c;
                        } else {
                            out[s] += c;
                        }
                    }
                }
            }
            _ => panic!("ring kinds differ"),
        }
        out
    }

    pub fn format(&self, v: &[BigRational]) -> String {
        let g = self.group();
        let terms: Vec<String> = v
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let e = match self {
                    Ring::Full(_) => i,
                    Ring::Minus(b) => b.reps()[i],
                };
                format!("{}*{}", c, g.label(e))
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }

    /// Whether `v` is invertible in the rational algebra (no character kills it).
    pub fn is_nonzero_divisor(&self, v: &[BigRational]) -> bool {
        match self {
            Ring::Full(g) => is_nonzero_divisor(&GroupRingElement::from_coeffs(g, v.to_vec()).unwrap()),
            Ring::Minus(b) => is_minus_nonzero_divisor(&MinusRingElement::from_coeffs(b, v.to_vec()).unwrap()),
        }
    }

    /// Exact inverse in the rational algebra.
    pub fn inverse(&self, v: &[BigRational]) -> Result<Vec<BigRational>> {
        let n = self.dim();
        let els = self.orbit_elements();
        let cols: Vec<Vec<BigRational>> = els.iter().map(|&g| self.act(g, v)).collect();
        // Σ_b y_b (b·v) = 1
        let mut sys: Vec<Vec<BigRational>> = (0..n)
            .map(|k| {
                let mut row: Vec<BigRational> = cols.iter().map(|c| c[k].clone()).collect();
                row.push(if k == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        let y = solve_rational(&mut sys, n).ok_or_else(|| Error::ZeroDivisor(self.format(v)))?;
        let mut out = vec![BigRational::zero(); n];
        for (yb, &g) in y.iter().zip(&els) {
            if !yb.is_zero() {
                let e = self.group_element(g);
                for (o, x) in out.iter_mut().zip(e) {
                    *o += yb * x;
                }
            }
        }
        Ok(out)
    }
}

pub fn add(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(a: &[BigRational], q: &BigRational) -> Vec<BigRational> {
    a.iter().map(|x| x * q).collect()
}

pub fn is_zero(a: &[BigRational]) -> bool {
    a.iter().all(|x| x.is_zero())
}

impl Ring {
    /// `g − 1`.
    pub fn minus_one(&self, g: usize) -> Vec<BigRational> {
        sub(&self.group_element(g), &self.one())
    }

    /// `N(H)` for a subgroup given by its elements.
    pub fn norm(&self, elements: &[usize]) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.dim()];
        for &h in elements {
            out = add(&out, &self.group_element(h));
        }
        out
    }

    /// `e_H = N(H)/|H|`.
    pub fn idempotent(&self, elements: &[usize]) -> Vec<BigRational> {
        scale(&self.norm(elements), &BigRational::new(1.into(), (elements.len() as i64).into()))
    }

    pub fn integer(&self, k: i64) -> Vec<BigRational> {
        scale(&self.one(), &BigRational::from_integer(k.into()))
    }
}
