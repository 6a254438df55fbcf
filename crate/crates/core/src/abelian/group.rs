//! Finite abelian groups given by a cyclic decomposition.
//!
//! Elements are exponent vectors over the user-supplied cyclic factors and are
//! addressed by a mixed-radix index (the identity is index 0). The invariant
//! factors are computed on the side and used for isomorphism checks.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::lattice::{kernel_lattice, smith, unimodular_inverse, IntegerMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAbelianGroup {
    parts: Vec<u64>,
    invariant_factors: Vec<u64>,
    conjugation: Option<usize>,
    order: usize,
}

pub type Group = Arc<FiniteAbelianGroup>;

/// Invariant factors `d_1 | d_2 | ...` (all at least 2) of a product of cyclic groups.
pub fn invariant_factors(parts: &[u64]) -> Vec<u64> {
    let m = IntegerMatrix::new(
        parts.len(),
        (0..parts.len())
            .map(|i| {
                (0..parts.len())
                    .map(|j| if i == j { BigInt::from(parts[i]) } else { BigInt::zero() })
                    .collect()
            })
            .collect(),
    );
    let mut d: Vec<u64> = smith(&m)
        .diagonal
        .iter()
        .map(|x| x.to_u64().unwrap())
        .filter(|&x| x > 1)
        .collect();
    d.sort_unstable();
    d
}

impl FiniteAbelianGroup {
    /// Product of cyclic groups of the given orders.
    pub fn new(parts: &[u64]) -> Result<Self> {
        if let Some(&bad) = parts.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidGroup(format!("cyclic factor of order {bad}")));
        }
        let order = parts.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d as usize));
        let order = order.ok_or_else(|| Error::InvalidGroup("order overflows".into()))?;
        Ok(FiniteAbelianGroup {
            parts: parts.to_vec(),
            invariant_factors: invariant_factors(parts),
            conjugation: None,
            order,
        })
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup::new(&[]).unwrap()
    }

    /// Sets the distinguished element of order 2.
    pub fn with_conjugation(mut self, c: usize) -> Result<Self> {
        if c >= self.order {
            return Err(Error::NotInGroup(format!("index {c}")));
        }
        if self.element_order(c) != 2 {
            return Err(Error::InvalidGroup(format!(
                "conjugation {:?} has order {}",
                self.exponents(c),
                self.element_order(c)
            )));
        }
        self.conjugation = Some(c);
        Ok(self)
    }

    pub fn into_arc(self) -> Group {
        Arc::new(self)
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn conjugation(&self) -> Option<usize> {
        self.conjugation
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn exponent(&self) -> u64 {
        self.invariant_factors.last().copied().unwrap_or(1)
    }

    pub fn is_isomorphic(&self, other: &FiniteAbelianGroup) -> bool {
        self.invariant_factors == other.invariant_factors
    }

    pub fn exponents(&self, g: usize) -> Vec<u64> {
        let mut out = vec![0; self.parts.len()];
        let mut x = g;
        for i in (0..self.parts.len()).rev() {
            let d = self.parts[i] as usize;
            out[i] = (x % d) as u64;
            x /= d;
        }
        out
    }

    pub fn index_of(&self, e: &[i64]) -> usize {
        assert_eq!(e.len(), self.parts.len());
        let mut idx = 0usize;
        for (i, &d) in self.parts.iter().enumerate() {
            idx = idx * d as usize + e[i].rem_euclid(d as i64) as usize;
        }
        idx
    }

    pub fn element(&self, e: &[u64]) -> Result<usize> {
        if e.len() != self.parts.len() || e.iter().zip(&self.parts).any(|(x, d)| x >= d) {
            return Err(Error::NotInGroup(format!("{e:?}")));
        }
        Ok(self.index_of(&e.iter().map(|&x| x as i64).collect::<Vec<_>>()))
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        let (mut x, mut y) = (a, b);
        for i in (0..self.parts.len()).rev() {
            let d = self.parts[i] as usize;
            let s = (x % d + y % d) % d;
            idx += s * stride;
            stride *= d;
            x /= d;
            y /= d;
        }
        idx
    }

    pub fn inv(&self, a: usize) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        let mut x = a;
        for i in (0..self.parts.len()).rev() {
            let d = self.parts[i] as usize;
            let s = (d - x % d) % d;
            idx += s * stride;
            stride *= d;
            x /= d;
        }
        idx
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let e = self.exponents(a);
        let v: Vec<i64> = e
            .iter()
            .zip(&self.parts)
            .map(|(&x, &d)| ((x as i128 * k as i128).rem_euclid(d as i128)) as i64)
            .collect();
        self.index_of(&v)
    }

    pub fn element_order(&self, a: usize) -> u64 {
        self.exponents(a)
            .iter()
            .zip(&self.parts)
            .map(|(&x, &d)| d / x.gcd(&d))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    /// Label of an element in the input decomposition, e.g. `(1,0)`.
    pub fn label(&self, g: usize) -> String {
        let e = self.exponents(g);
        let inner: Vec<String> = e.iter().map(|x| x.to_string()).collect();
        format!("({})", inner.join(","))
    }

    /// Generators of the cyclic factors.
    pub fn standard_generators(&self) -> Vec<usize> {
        (0..self.parts.len())
            .map(|i| {
                let mut e = vec![0i64; self.parts.len()];
                e[i] = 1;
                self.index_of(&e)
            })
            .collect()
    }
}

/// Product of cyclic groups with an optional conjugation element given by
/// its exponent vector.
pub fn group_product(parts: &[u64], conjugation: Option<&[u64]>) -> Result<FiniteAbelianGroup> {
    let g = FiniteAbelianGroup::new(parts)?;
    match conjugation {
        None => Ok(g),
        Some(e) => {
            let c = g.element(e)?;
            g.with_conjugation(c)
        }
    }
}

/// A subgroup, stored as its sorted element list and a generating set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    group: Group,
    generators: Vec<usize>,
    elements: Vec<usize>,
}

impl Subgroup {
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.elements.binary_search(&g).is_ok()
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.elements.iter().all(|&g| other.contains(g))
    }

    pub fn trivial(g: &Group) -> Subgroup {
        Subgroup { group: g.clone(), generators: vec![], elements: vec![0] }
    }

    pub fn whole(g: &Group) -> Subgroup {
        let gens = g.standard_generators();
        Subgroup { group: g.clone(), generators: gens, elements: g.elements().collect() }
    }

    /// Cyclic decomposition `⊕ ⟨g_i⟩` in invariant-factor form.
    pub fn cyclic_decomposition(&self) -> Vec<usize> {
        let g = &self.group;
        let gens: Vec<usize> = self.generators.iter().copied().filter(|&x| x != 0).collect();
        if gens.is_empty() {
            return vec![];
        }
        let k = g.parts().len();
        // relations among the generators: kernel of Z^t -> ⊕ Z/d_j
        let mut rows: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|&h| g.exponents(h).iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        for (j, &d) in g.parts().iter().enumerate() {
            rows.push((0..k).map(|i| if i == j { BigInt::from(d) } else { BigInt::zero() }).collect());
        }
        let ker = kernel_lattice(&IntegerMatrix::new(k, rows));
        let t = gens.len();
        let rel = IntegerMatrix::new(t, ker.rows.iter().map(|r| r[..t].to_vec()).collect());
        let rel = super::lattice::hnf(&rel);
        let s = smith(&rel);
        let qinv = unimodular_inverse(&s.q);
        let mut out = Vec::new();
        for i in 0..t {
            let d = s.diagonal.get(i).cloned().unwrap_or_else(BigInt::zero);
            if d == BigInt::from(1) {
                continue;
            }
            let mut acc = 0usize;
            for (j, &h) in gens.iter().enumerate() {
                let c = qinv.rows[i][j].clone();
                let c = c.mod_floor(&BigInt::from(g.element_order(h))).to_i64().unwrap();
                acc = g.mul(acc, g.pow(h, c));
            }
            if acc != 0 {
                out.push(acc);
            }
        }
        out
    }
}

/// Smallest subgroup containing `gens`.
pub fn subgroup_from_generators(g: &Group, gens: &[usize]) -> Result<Subgroup> {
    for &x in gens {
        if x >= g.order() {
            return Err(Error::NotInGroup(format!("index {x}")));
        }
    }
    let mut set: BTreeSet<usize> = BTreeSet::new();
    set.insert(0);
    let mut frontier = vec![0usize];
    while let Some(x) = frontier.pop() {
        for &h in gens {
            let y = g.mul(x, h);
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    Ok(Subgroup { group: g.clone(), generators: gens.to_vec(), elements: set.into_iter().collect() })
}

/// A homomorphism given by its table on element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    pub source: Group,
    pub target: Group,
    pub map: Vec<usize>,
}

impl GroupHom {
    pub fn apply(&self, g: usize) -> usize {
        self.map[g]
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.order()];
        for &y in &self.map {
            hit[y] = true;
        }
        hit.into_iter().all(|b| b)
    }

    pub fn is_homomorphism(&self) -> bool {
        let gens = self.source.standard_generators();
        self.source.elements().all(|a| {
            gens.iter().all(|&b| {
                self.map[self.source.mul(a, b)] == self.target.mul(self.map[a], self.map[b])
            })
        })
    }

    pub fn image(&self, h: &Subgroup) -> Subgroup {
        let gens: Vec<usize> = h.generators().iter().map(|&x| self.map[x]).collect();
        subgroup_from_generators(&self.target, &gens).expect("image generators lie in target")
    }

    pub fn compose(&self, next: &GroupHom) -> GroupHom {
        GroupHom {
            source: self.source.clone(),
            target: next.target.clone(),
            map: self.map.iter().map(|&x| next.map[x]).collect(),
        }
    }

    pub fn kernel(&self) -> Subgroup {
        let els: Vec<usize> = self.source.elements().filter(|&g| self.map[g] == 0).collect();
        subgroup_from_generators(&self.source, &els).expect("kernel lies in source")
    }
}

/// The group `Z^k / (diag(orders) + relations)` in invariant-factor form, with
/// the map sending an exponent vector over the original factors to an element.
#[derive(Debug, Clone)]
pub struct PresentedGroup {
    pub group: FiniteAbelianGroup,
    transform: Vec<Vec<BigInt>>,
    diagonal: Vec<u64>,
}

impl PresentedGroup {
    pub fn new(orders: &[u64], relations: &[Vec<i64>]) -> Result<PresentedGroup> {
        let k = orders.len();
        let mut rows: Vec<Vec<BigInt>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { BigInt::from(orders[i]) } else { BigInt::zero() }).collect())
            .collect();
        for r in relations {
            assert_eq!(r.len(), k);
            rows.push(r.iter().map(|&x| BigInt::from(x)).collect());
        }
        let s = smith(&IntegerMatrix::new(k, rows));
        let mut diagonal = Vec::new();
        let mut parts = Vec::new();
        let mut keep = Vec::new();
        for i in 0..k {
            let d = s.diagonal.get(i).and_then(|x| x.to_u64()).unwrap_or(0);
            if d == 0 {
                return Err(Error::InvalidGroup("presentation is infinite".into()));
            }
            diagonal.push(d);
            if d > 1 {
                parts.push(d);
                keep.push(i);
            }
        }
        // columns of Q for the kept coordinates
        let transform: Vec<Vec<BigInt>> =
            s.q.rows.iter().map(|row| keep.iter().map(|&j| row[j].clone()).collect()).collect();
        let diag_kept = keep.iter().map(|&i| diagonal[i]).collect();
        Ok(PresentedGroup { group: FiniteAbelianGroup::new(&parts)?, transform, diagonal: diag_kept })
    }

    /// Element of the presented group for an exponent vector.
    pub fn class_of(&self, e: &[i64]) -> usize {
        let m = self.diagonal.len();
        let mut out = vec![0i64; m];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            for (i, &x) in e.iter().enumerate() {
                if x != 0 {
                    acc += &self.transform[i][j] * x;
                }
            }
            *o = acc.mod_floor(&BigInt::from(self.diagonal[j])).to_i64().unwrap();
        }
        self.group.index_of(&out)
    }
}

/// Quotient `G/H` with the projection.
pub fn quotient_map(g: &Group, h: &Subgroup) -> Result<(Group, GroupHom)> {
    if !Arc::ptr_eq(h.group(), g) && **h.group() != **g {
        return Err(Error::NotInGroup("subgroup of a different group".into()));
    }
    let rels: Vec<Vec<i64>> = h
        .generators()
        .iter()
        .map(|&x| g.exponents(x).iter().map(|&e| e as i64).collect())
        .collect();
    let pg = PresentedGroup::new(g.parts(), &rels)?;
    let q = Arc::new(pg.group.clone());
    let map = g
        .elements()
        .map(|x| pg.class_of(&g.exponents(x).iter().map(|&e| e as i64).collect::<Vec<_>>()))
        .collect();
    let hom = GroupHom { source: g.clone(), target: q.clone(), map };
    Ok((q, hom))
}

/// Quotient that carries the conjugation along when it survives.
pub fn quotient_with_conjugation(g: &Group, h: &Subgroup) -> Result<(Group, GroupHom)> {
    let (q, hom) = quotient_map(g, h)?;
    if let Some(c) = g.conjugation() {
        let cc = hom.apply(c);
        if cc != 0 {
            let q2 = Arc::new((*q).clone().with_conjugation(cc)?);
            let hom2 = GroupHom { source: hom.source, target: q2.clone(), map: hom.map };
            return Ok((q2, hom2));
        }
    }
    Ok((q, hom))
}

/// All subgroups of `g`, sorted by (order, elements).
pub fn all_subgroups(g: &Group) -> Vec<Subgroup> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out: Vec<Subgroup> = Vec::new();
    let trivial = Subgroup::trivial(g);
    found.insert(trivial.elements.clone());
    out.push(trivial);
    let mut i = 0;
    while i < out.len() {
        let cur = out[i].clone();
        for x in g.elements() {
            if cur.contains(x) {
                continue;
            }
            let mut gens = cur.generators.clone();
            gens.push(x);
            let s = subgroup_from_generators(g, &gens).unwrap();
            if found.insert(s.elements.clone()) {
                out.push(s);
            }
        }
        i += 1;
    }
    out.sort_by(|a, b| (a.order(), &a.elements).cmp(&(b.order(), &b.elements)));
    out
}

/// One representative decomposition for every isomorphism class of abelian
/// groups of order `n`, in invariant-factor form.
pub fn abelian_groups_of_order(n: u64) -> Vec<Vec<u64>> {
    fn partitions(k: u32, max: u32) -> Vec<Vec<u32>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in (1..=k.min(max)).rev() {
            for mut rest in partitions(k - first, first) {
                let mut p = vec![first];
                p.append(&mut rest);
                out.push(p);
            }
        }
        out
    }
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut m = n;
    let mut q = 2;
    while q * q <= m {
        if m.is_multiple_of(q) {
            let mut e = 0;
            while m.is_multiple_of(q) {
                m /= q;
                e += 1;
            }
            factors.push((q, e));
        }
        q += 1;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    let mut results: Vec<Vec<u64>> = vec![vec![]];
    for (p, e) in factors {
        let mut next = Vec::new();
        for r in &results {
            for part in partitions(e, e) {
                let mut parts = r.clone();
                parts.extend(part.iter().map(|&a| p.pow(a)));
                next.push(parts);
            }
        }
        results = next;
    }
    let mut out: Vec<Vec<u64>> = results.iter().map(|p| invariant_factors(p)).collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_examples() {
        let c2 = group_product(&[2], None).unwrap();
        assert_eq!(c2.order(), 2);
        let v = group_product(&[2, 2], None).unwrap();
        assert_eq!(v.invariant_factors(), &[2, 2]);
        let g = group_product(&[2, 4], Some(&[0, 2])).unwrap();
        assert_eq!(g.order(), 8);
        let c = g.conjugation().unwrap();
        assert_eq!(g.mul(c, c), 0);
        assert!(group_product(&[1], None).is_err());
        assert!(group_product(&[4], Some(&[1])).is_err());
    }

    #[test]
    fn subgroup_examples() {
        let c4 = FiniteAbelianGroup::new(&[4]).unwrap().into_arc();
        assert_eq!(subgroup_from_generators(&c4, &[]).unwrap().order(), 1);
        let h = subgroup_from_generators(&c4, &[2]).unwrap();
        assert_eq!(h.elements(), &[0, 2]);
        let v = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
        let a = v.element(&[1, 0]).unwrap();
        let b = v.element(&[0, 1]).unwrap();
        assert_eq!(subgroup_from_generators(&v, &[a, b]).unwrap().order(), 4);
    }

    #[test]
    fn quotient_examples() {
        let c4 = FiniteAbelianGroup::new(&[4]).unwrap().into_arc();
        let (q, _) = quotient_map(&c4, &Subgroup::trivial(&c4)).unwrap();
        assert!(q.is_isomorphic(&c4));
        let h = subgroup_from_generators(&c4, &[2]).unwrap();
        let (q, pi) = quotient_map(&c4, &h).unwrap();
        assert_eq!(q.order(), 2);
        assert!(pi.is_homomorphism() && pi.is_surjective());
        let v = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
        let d = v.element(&[1, 1]).unwrap();
        let h = subgroup_from_generators(&v, &[d]).unwrap();
        let (q, pi) = quotient_map(&v, &h).unwrap();
        assert_eq!(q.order(), 2);
        assert_ne!(pi.apply(v.element(&[1, 0]).unwrap()), 0);
        assert_eq!(pi.apply(v.element(&[1, 0]).unwrap()), pi.apply(v.element(&[0, 1]).unwrap()));
    }

    #[test]
    fn decomposition_of_subgroups() {
        let g = FiniteAbelianGroup::new(&[2, 4]).unwrap().into_arc();
        for s in all_subgroups(&g) {
            let dec = s.cyclic_decomposition();
            let prod: u64 = dec.iter().map(|&x| g.element_order(x)).product();
            assert_eq!(prod as usize, s.order());
            let span = subgroup_from_generators(&g, &dec).unwrap();
            assert_eq!(span.elements(), s.elements());
        }
        assert_eq!(all_subgroups(&g).len(), 8);
    }

    #[test]
    fn group_counts() {
        assert_eq!(abelian_groups_of_order(16).len(), 5);
        assert_eq!(abelian_groups_of_order(36).len(), 4);
        assert_eq!(abelian_groups_of_order(1), vec![Vec::<u64>::new()]);
    }
}
