//! Exact character values in cyclotomic fields.
//!
//! A character of `⊕ Z/d_i` is labelled by a tuple `a` with `χ(e) = exp(2πi Σ a_i e_i / d_i)`.
//! Its value on a group-ring element is accumulated in `Q[x]/(x^o − 1)` (with `o`
//! the character order) and reduced modulo the cyclotomic polynomial `Φ_o`, so
//! the result is zero exactly when the value is zero.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::element::GroupRingElement;
use super::minus::MinusRingElement;
use crate::abelian::FiniteAbelianGroup;

/// Integer coefficients of `Φ_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<i64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n − 1 divided by Φ_d for every proper divisor d
    let mut num: Vec<i64> = vec![0; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let phi = cyclotomic_polynomial(d);
            num = divide_monic(&num, &phi);
        }
    }
    let out = Arc::new(num);
    cache.lock().unwrap().insert(n, out.clone());
    out
}

fn divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let qlen = r.len() - dd;
    let mut q = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = r[i + dd];
        q[i] = c;
        if c != 0 {
            for (j, &d) in den.iter().enumerate() {
                r[i + j] = r[i + j].checked_sub(c.checked_mul(d).expect("cyclotomic overflow")).expect("cyclotomic overflow");
            }
        }
    }
    debug_assert!(r[..dd].iter().all(|&x| x == 0));
    q
}

/// Reduction of `Σ a_k x^k` modulo `Φ_o`.
fn reduce_mod_cyclotomic(mut a: Vec<BigRational>, o: u64) -> Vec<BigRational> {
    let phi = cyclotomic_polynomial(o);
    let d = phi.len() - 1;
    for k in (d..a.len()).rev() {
        if a[k].is_zero() {
            continue;
        }
        let c = std::mem::replace(&mut a[k], BigRational::zero());
        for (j, &pj) in phi.iter().enumerate().take(d) {
            if pj != 0 {
                a[k - d + j] -= &c * BigRational::from_integer(pj.into());
            }
        }
    }
    a.truncate(d);
    a
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacterValue {
    /// Label tuple over the group's cyclic factors.
    pub character: Vec<u64>,
    pub order: u64,
    /// Coordinates in the power basis `1, ζ_o, …, ζ_o^{φ(o)−1}`.
    pub exact: Vec<BigRational>,
    /// `(re, im)`, for reporting only.
    pub numeric: (f64, f64),
}

impl CharacterValue {
    pub fn is_zero(&self) -> bool {
        self.exact.iter().all(|c| c.is_zero())
    }

    /// The value as a rational number when it lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.exact.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.exact.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }
}

/// A character of `g` prepared for evaluation.
#[derive(Debug, Clone)]
pub struct Character {
    pub label: Vec<u64>,
    pub order: u64,
    /// For each cyclic factor, the multiplier turning an exponent into a power of `ζ_o`.
    weights: Vec<u64>,
}

impl Character {
    pub fn new(g: &FiniteAbelianGroup, label: &[u64]) -> Character {
        let parts = g.parts();
        let order = label
            .iter()
            .zip(parts)
            .map(|(&a, &d)| d / a.gcd(&d))
            .fold(1u64, |acc, x| acc.lcm(&x));
        let weights = label
            .iter()
            .zip(parts)
            .map(|(&a, &d)| {
                let gc = a.gcd(&d);
                (a / gc) * (order / (d / gc))
            })
            .collect();
        Character { label: label.to_vec(), order, weights }
    }

    /// `χ(g) = ζ_o^k`; returns `k`.
    pub fn exponent_at(&self, g: &FiniteAbelianGroup, x: usize) -> u64 {
        let e = g.exponents(x);
        e.iter().zip(&self.weights).fold(0u64, |acc, (&ei, &w)| (acc + ei * w) % self.order)
    }

    fn finish(&self, acc: Vec<BigRational>) -> CharacterValue {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in acc.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let t = 2.0 * std::f64::consts::PI * k as f64 / self.order as f64;
            let v = c.to_f64().unwrap_or(f64::NAN);
            re += v * t.cos();
            im += v * t.sin();
        }
        CharacterValue {
            character: self.label.clone(),
            order: self.order,
            exact: reduce_mod_cyclotomic(acc, self.order),
            numeric: (re, im),
        }
    }

    pub fn evaluate(&self, x: &GroupRingElement) -> CharacterValue {
        let g = x.group();
        let mut acc = vec![BigRational::zero(); self.order as usize];
        for (h, c) in x.coeffs().iter().enumerate() {
            if !c.is_zero() {
                acc[self.exponent_at(g, h) as usize] += c;
            }
        }
        self.finish(acc)
    }

    /// Value on a minus element; meaningful for odd characters.
    pub fn evaluate_minus(&self, x: &MinusRingElement) -> CharacterValue {
        let b = x.basis();
        let g = b.group();
        let mut acc = vec![BigRational::zero(); self.order as usize];
        for (i, c) in x.coeffs().iter().enumerate() {
            if !c.is_zero() {
                acc[self.exponent_at(g, b.reps()[i]) as usize] += c;
            }
        }
        self.finish(acc)
    }

    pub fn is_odd(&self, g: &FiniteAbelianGroup) -> bool {
        match g.conjugation() {
            Some(c) => 2 * self.exponent_at(g, c) == self.order,
            None => false,
        }
    }
}

/// All characters, in the enumeration order of their label tuples.
pub fn all_characters(g: &FiniteAbelianGroup) -> Vec<Character> {
    g.elements().map(|i| Character::new(g, &g.exponents(i))).collect()
}

/// One character from each Galois orbit.
pub fn orbit_representatives(g: &FiniteAbelianGroup) -> Vec<Character> {
    let mut seen = vec![false; g.order()];
    let mut out = Vec::new();
    for i in g.elements() {
        if seen[i] {
            continue;
        }
        let chi = Character::new(g, &g.exponents(i));
        for j in 1..=chi.order.max(1) {
            if j.gcd(&chi.order) == 1 {
                seen[g.pow(i, j as i64)] = true;
            }
        }
        out.push(chi);
    }
    out
}

/// Values at every character of the group.
pub fn character_values(x: &GroupRingElement) -> Vec<CharacterValue> {
    all_characters(x.group()).iter().map(|c| c.evaluate(x)).collect()
}

/// True when `x` is invertible in `Q[G]`.
pub fn is_nonzero_divisor(x: &GroupRingElement) -> bool {
    orbit_representatives(x.group()).iter().all(|c| !c.evaluate(x).is_zero())
}

/// True when `x` is invertible in `Q[G]^-`, i.e. nonzero at every odd character.
pub fn is_minus_nonzero_divisor(x: &MinusRingElement) -> bool {
    let g = x.basis().group();
    orbit_representatives(g)
        .iter()
        .filter(|c| c.is_odd(g))
        .all(|c| !c.evaluate_minus(x).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{FiniteAbelianGroup, Subgroup};
    use crate::group_ring::element::{idempotent, norm_element, rat};

    #[test]
    fn cyclotomic_small() {
        assert_eq!(*cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(105).len() - 1, 48);
    }

    #[test]
    fn value_examples() {
        let c2 = FiniteAbelianGroup::new(&[2]).unwrap().into_arc();
        let n = norm_element(&Subgroup::whole(&c2));
        let v: Vec<_> = character_values(&n).iter().map(|c| c.as_rational().unwrap()).collect();
        assert_eq!(v, vec![rat(2, 1), rat(0, 1)]);
        // h = 1 − e_I c + N(I) for I = C_2, σ = c
        let i = Subgroup::whole(&c2);
        let c = GroupRingElement::basis(&c2, 1);
        let h = &(&GroupRingElement::one(&c2) - &(&idempotent(&i) * &c)) + &norm_element(&i);
        let v: Vec<_> = character_values(&h).iter().map(|c| c.as_rational().unwrap()).collect();
        assert_eq!(v, vec![rat(2, 1), rat(1, 1)]);
        assert!(is_nonzero_divisor(&h));
        assert!(character_values(&GroupRingElement::zero(&c2)).iter().all(|c| c.is_zero()));
    }

    #[test]
    fn orbits_cover() {
        let g = FiniteAbelianGroup::new(&[2, 6]).unwrap();
        // number of Galois orbits of characters equals the number of cyclic subgroups
        assert_eq!(orbit_representatives(&g).len(), 8);
    }
}
