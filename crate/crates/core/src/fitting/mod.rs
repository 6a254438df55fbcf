//! Fitting ideals of finitely presented modules over group rings, shifted
//! Fitting ideals along `0 → N → R/(f) → A → 0`, and the ideal `𝒥(I)`.

mod shifted;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::abelian::lattice::{kernel_modulo, Echelon};
use crate::abelian::{hnf, kernel_lattice, IntegerMatrix};
use crate::error::{Error, Result};
use crate::ideal::ring::{is_zero, scale, sub};
use crate::ideal::{FractionalIdeal, Ring};

pub use shifted::{
    admissible_cases, calj_by_definition, calj_generators, cyclic_decompositions, fitt1_direct_sum, shifted_fitt1,
    shifted_fitt1_with_caps, verify_calj_independence, verify_shifted_fitting_formula, CaljIndependenceReport,
    ShiftedFittingCase, ShiftedFittingReport,
};

/// Limits on minor enumeration. Beyond them `fitt0` refuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FittingCaps {
    pub max_generators: usize,
    pub max_relations: usize,
}

impl Default for FittingCaps {
    fn default() -> Self {
        FittingCaps { max_generators: 4, max_relations: 64 }
    }
}

/// `R^s / (relation columns)`.
#[derive(Debug, Clone)]
pub struct PresentedModule {
    pub ring: Ring,
    pub num_generators: usize,
    /// Each relation is a column with one ring element per generator.
    pub relations: Vec<Vec<Vec<BigRational>>>,
    /// A positive integer known to annihilate the module, if any.
    pub exponent: Option<BigInt>,
}

impl PresentedModule {
    pub fn new(ring: &Ring, num_generators: usize, relations: Vec<Vec<Vec<BigRational>>>) -> Result<Self> {
        for col in &relations {
            if col.len() != num_generators || col.iter().any(|x| x.len() != ring.dim()) {
                return Err(Error::RingMismatch("relation column has the wrong shape".into()));
            }
        }
        Ok(PresentedModule { ring: ring.clone(), num_generators, relations, exponent: None })
    }

    /// Records that `e` annihilates the module; `e·x_r = 0` is then a valid relation.
    pub fn with_exponent(mut self, e: BigInt) -> Self {
        self.exponent = Some(e);
        self
    }

    /// `R/(x_1, …, x_k)`.
    pub fn cyclic(ring: &Ring, gens: Vec<Vec<BigRational>>) -> Result<Self> {
        Self::new(ring, 1, gens.into_iter().map(|x| vec![x]).collect())
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if !self.ring.same(&other.ring) {
            return Err(Error::RingMismatch("direct sum over different rings".into()));
        }
        let s = self.num_generators + other.num_generators;
        let zero = vec![BigRational::zero(); self.ring.dim()];
        let mut rels = Vec::new();
        for c in &self.relations {
            let mut col = c.clone();
            col.extend(std::iter::repeat_n(zero.clone(), other.num_generators));
            rels.push(col);
        }
        for c in &other.relations {
            let mut col = vec![zero.clone(); self.num_generators];
            col.extend(c.iter().cloned());
            rels.push(col);
        }
        let exponent = match (&self.exponent, &other.exponent) {
            (Some(a), Some(b)) => Some(a.lcm(b)),
            _ => None,
        };
        Ok(PresentedModule { exponent, ..Self::new(&self.ring, s, rels)? })
    }

    /// Removes generators killed by a relation with a unit entry `±g`.
    pub fn simplified(&self) -> PresentedModule {
        let mut m = self.clone();
        loop {
            let mut hit = None;
            'search: for (j, col) in m.relations.iter().enumerate() {
                for (r, x) in col.iter().enumerate() {
                    if let Some(inv) = unit_inverse(&m.ring, x) {
                        hit = Some((j, r, inv));
                        break 'search;
                    }
                }
            }
            let Some((j, r, inv)) = hit else { return m };
            let ring = m.ring.clone();
            let pivot: Vec<Vec<BigRational>> = m.relations[j].iter().map(|x| ring.mul(x, &inv)).collect();
            let mut rels = Vec::with_capacity(m.relations.len() - 1);
            for (k, col) in m.relations.iter().enumerate() {
                if k == j {
                    continue;
                }
                let a = &col[r];
                let new: Vec<Vec<BigRational>> = if is_zero(a) {
                    col.clone()
                } else {
                    col.iter().zip(&pivot).map(|(x, p)| sub(x, &ring.mul(a, p))).collect()
                };
                let mut new = new;
                new.remove(r);
                if new.iter().any(|x| !is_zero(x)) {
                    rels.push(new);
                }
            }
            m = PresentedModule { ring, num_generators: m.num_generators - 1, relations: rels, exponent: m.exponent };
        }
    }

    /// A subset of the relation columns generating the same submodule of `R^s`.
    ///
    /// With a known exponent `e` the scalar relations `e·x_r` are added first;
    /// the span then has full rank from the start and stays reduced modulo `e`.
    pub fn pruned(&self) -> PresentedModule {
        let n = self.ring.dim();
        let s = self.num_generators;
        let mut cols: Vec<Vec<Vec<BigRational>>> = Vec::new();
        if let Some(e) = &self.exponent {
            for r in 0..s {
                let mut col = vec![vec![BigRational::zero(); n]; s];
                col[r] = scale(&self.ring.one(), &BigRational::from_integer(e.clone()));
                cols.push(col);
            }
        }
        let d = self
            .relations
            .iter()
            .flatten()
            .flatten()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let els = self.ring.orbit_elements();
        let mut span = match &self.exponent {
            Some(e) if n * s > 0 => Echelon::with_modulus(n * s, &(e * &d)),
            _ => Echelon::new(n * s),
        };
        let mut keep = cols;
        for col in &self.relations {
            let orbit: Vec<Vec<BigInt>> = els
                .iter()
                .map(|&g| {
                    col.iter()
                        .flat_map(|x| self.ring.act(g, x))
                        .map(|c| c.numer() * (&d / c.denom()))
                        .collect()
                })
                .collect();
            let mut grew = false;
            for v in orbit {
                grew |= span.insert(v);
            }
            if grew {
                keep.push(col.clone());
            }
        }
        PresentedModule { ring: self.ring.clone(), num_generators: s, relations: keep, exponent: self.exponent.clone() }
    }
}

/// For a unit `q·g` (`q = ±1`, or a signed power of 2 in the minus ring),
/// returns its inverse `q^{-1}·g^{-1}`.
fn unit_inverse(ring: &Ring, x: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut nz = x.iter().enumerate().filter(|(_, c)| !c.is_zero());
    let (slot, c) = nz.next()?;
    if nz.next().is_some() {
        return None;
    }
    let unit = if ring.is_minus() {
        let mut n = c.numer().magnitude().clone();
        let mut d = c.denom().magnitude().clone();
        while n.is_even() {
            n /= 2u32;
        }
        while d.is_even() {
            d /= 2u32;
        }
        n.is_one() && d.is_one()
    } else {
        c.numer().magnitude().is_one() && c.denom().is_one()
    };
    if !unit {
        return None;
    }
    let g = ring.orbit_elements()[slot];
    let inv = ring.group_element(ring.group().inv(g));
    Some(inv.iter().map(|e| e / c).collect())
}

fn determinant(ring: &Ring, m: &[&Vec<Vec<BigRational>>], rows: usize) -> Vec<BigRational> {
    // Leibniz expansion over permutations
    let mut perm: Vec<usize> = (0..rows).collect();
    let mut acc = vec![BigRational::zero(); ring.dim()];
    loop {
        let sign = permutation_sign(&perm);
        let mut term = ring.one();
        let mut dead = false;
        for (c, &r) in perm.iter().enumerate() {
            let x = &m[c][r];
            if is_zero(x) {
                dead = true;
                break;
            }
            term = ring.mul(&term, x);
        }
        if !dead {
            for (a, t) in acc.iter_mut().zip(term) {
                if sign {
                    *a += t;
                } else {
                    *a -= t;
                }
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    acc
}

fn permutation_sign(p: &[usize]) -> bool {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    inv % 2 == 0
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Maximal minors of the relation matrix, before any simplification.
pub fn maximal_minors(m: &PresentedModule) -> Vec<Vec<BigRational>> {
    let s = m.num_generators;
    combinations(m.relations.len(), s)
        .par_iter()
        .map(|cols| {
            let sel: Vec<&Vec<Vec<BigRational>>> = cols.iter().map(|&c| &m.relations[c]).collect();
            determinant(&m.ring, &sel, s)
        })
        .filter(|d| !is_zero(d))
        .collect()
}

/// `Fitt_0` with the default caps.
pub fn fitt0(m: &PresentedModule) -> Result<FractionalIdeal> {
    fitt0_with_caps(m, FittingCaps::default())
}

pub fn fitt0_with_caps(m: &PresentedModule, caps: FittingCaps) -> Result<FractionalIdeal> {
    let m = m.simplified().pruned();
    if m.num_generators == 0 {
        return Ok(FractionalIdeal::unit(&m.ring));
    }
    if m.relations.len() < m.num_generators {
        return Ok(FractionalIdeal::zero(&m.ring));
    }
    if m.num_generators > caps.max_generators || m.relations.len() > caps.max_relations {
        return Err(Error::CapExceeded(format!(
            "{} generators and {} relations (caps {} and {})",
            m.num_generators,
            m.relations.len(),
            caps.max_generators,
            caps.max_relations
        )));
    }
    FractionalIdeal::from_generators(&m.ring, maximal_minors(&m))
}

fn integer_rows(ring: &Ring, v: &[BigRational], d: &BigInt) -> Vec<BigInt> {
    debug_assert_eq!(v.len(), ring.dim());
    v.iter().map(|c| c.numer() * (d / c.denom())).collect()
}

fn project_kernel(k: &IntegerMatrix, width: usize) -> IntegerMatrix {
    IntegerMatrix::new(width, k.rows.iter().map(|r| r[..width].to_vec()).collect())
}

/// The module `(x_1, …, x_t)/(y_1, …, y_k)` presented on the classes of the
/// `x_i`, with a Z-generating set of syzygies as relations.
pub fn quotient_ideal_module(
    ring: &Ring,
    numerator: &[Vec<BigRational>],
    denominator: &[Vec<BigRational>],
) -> Result<PresentedModule> {
    let num = FractionalIdeal::from_generators(ring, numerator.to_vec())?;
    for y in denominator {
        if !num.contains(y)? {
            return Err(Error::NotContained { witness: y.iter().map(|c| c.to_string()).collect() });
        }
    }
    let den = FractionalIdeal::from_generators(ring, denominator.to_vec())?;
    let n = ring.dim();
    let t = numerator.len();
    let canon = den.canonical();
    // denominator lattice rows, as rationals
    let den_rows: Vec<Vec<BigRational>> = canon
        .basis
        .rows
        .iter()
        .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone()) * &canon.scale).collect())
        .collect();
    let els = ring.orbit_elements();
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(t * n + den_rows.len());
    for x in numerator {
        for &b in &els {
            rows.push(ring.act(b, x));
        }
    }
    rows.extend(den_rows);
    let d = rows.iter().flatten().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<Vec<BigInt>> = rows.iter().map(|r| integer_rows(ring, r, &d)).collect();
    let mut exponent = None;
    let ker = if canon.basis.nrows() == n {
        // the denominator has full rank, so it contains det·Z^n
        let (w, l) = ints.split_at(t * n);
        let l = IntegerMatrix::new(n, l.to_vec());
        let mut det = BigInt::one();
        for (i, row) in hnf(&l).rows.iter().enumerate() {
            det *= &row[i];
        }
        exponent = Some(det.clone());
        kernel_modulo(w, &l, &det)
    } else {
        project_kernel(&kernel_lattice(&IntegerMatrix::new(n, ints)), t * n)
    };
    let mut relations = Vec::with_capacity(ker.nrows());
    for k in &ker.rows {
        debug_assert!(k.len() >= t * n);
        let col: Vec<Vec<BigRational>> = (0..t)
            .map(|i| {
                let mut a = vec![BigRational::zero(); n];
                for (bi, &b) in els.iter().enumerate() {
                    let c = &k[i * n + bi];
                    if !c.is_zero() {
                        let e = ring.group_element(b);
                        for (slot, v) in a.iter_mut().zip(e) {
                            if !v.is_zero() {
                                *slot += BigRational::from_integer(c.clone()) * v;
                            }
                        }
                    }
                }
                a
            })
            .collect();
        if col.iter().any(|x| !is_zero(x)) {
            relations.push(col);
        }
    }
    let m = PresentedModule::new(ring, t, relations)?;
    // d·y_0 generates a lattice containing det·Z^n, and x_i ∈ (1/d)Z^n,
    // so det·x_i lies in the denominator
    Ok(match exponent {
        Some(e) => m.with_exponent(e),
        None => m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{FiniteAbelianGroup, Group};
    use crate::group_ring::rat;

    fn v(xs: &[i64]) -> Vec<BigRational> {
        xs.iter().map(|&x| rat(x, 1)).collect()
    }

    fn c2() -> Group {
        FiniteAbelianGroup::new(&[2]).unwrap().into_arc()
    }

    #[test]
    fn fitt0_examples() {
        let r = Ring::full(&c2());
        let x = v(&[1, 1]);
        let m = PresentedModule::cyclic(&r, vec![x.clone()]).unwrap();
        assert_eq!(fitt0(&m).unwrap(), FractionalIdeal::principal(&r, x.clone()).unwrap());
        let m = PresentedModule::cyclic(&r, vec![x.clone(), v(&[2, 0])]).unwrap();
        assert_eq!(fitt0(&m).unwrap(), FractionalIdeal::from_generators(&r, vec![x, v(&[2, 0])]).unwrap());
        let z = v(&[0, 0]);
        let m = PresentedModule::new(&r, 2, vec![vec![v(&[2, 0]), z.clone()], vec![z, v(&[3, 0])]]).unwrap();
        assert_eq!(fitt0(&m).unwrap(), FractionalIdeal::principal(&r, v(&[6, 0])).unwrap());
    }

    #[test]
    fn quotient_of_equal_ideals_is_zero() {
        let r = Ring::full(&c2());
        let x = v(&[1, 1]);
        let m = quotient_ideal_module(&r, &[x.clone()], &[x]).unwrap();
        assert_eq!(m.num_generators, 1);
        assert!(fitt0(&m).unwrap().is_unit());
        assert!(quotient_ideal_module(&r, &[v(&[2, 0])], &[v(&[1, 0])]).is_err());
    }

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 3).len(), 1);
        assert_eq!(combinations(2, 3).len(), 0);
        assert_eq!(combinations(4, 0).len(), 1);
    }
}
