//! Fractional ideals of `Z[G]` and `Z[1/2][G]^-` as `G`-stable lattices.
//!
//! An ideal is stored as `scale · L` with `L ⊆ Z^n` a primitive lattice in HNF.
//! The generator list is kept verbatim, because transition maps along a tower
//! are compared generator by generator.

pub mod plocal;
pub mod ring;

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::abelian::lattice::{kernel_lattice, Echelon};
use crate::abelian::{lattice_index, GroupHom, Index, IntegerMatrix};
use crate::error::{Error, Result};
use crate::group_ring::GroupRingElement;
pub use plocal::{plocal_form, PLocalForm};
pub use ring::Ring;

/// Dimension above which p-local comparisons use [`plocal_form`] rather than
/// exact lattice indices.
const EXACT_INDEX_MAX_DIM: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Canonical {
    /// Positive rational scale; for minus ideals its 2-part is removed.
    #[serde(serialize_with = "ser_rat")]
    pub scale: BigRational,
    pub basis: IntegerMatrix,
    /// `N` with `N · I` coefficient-integral.
    #[serde(serialize_with = "ser_int")]
    pub bound: BigInt,
}

fn ser_rat<S: serde::Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_int<S: serde::Serializer>(q: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

#[derive(Clone)]
pub struct FractionalIdeal {
    ring: Ring,
    gens: Vec<Vec<BigRational>>,
    canon: OnceLock<Canonical>,
}

fn lcm_denominators<'a>(vs: impl Iterator<Item = &'a Vec<BigRational>>) -> BigInt {
    let mut d = BigInt::one();
    for v in vs {
        for c in v {
            d = d.lcm(c.denom());
        }
    }
    d
}

fn to_integers(v: &[BigRational], d: &BigInt) -> Vec<BigInt> {
    v.iter().map(|c| c.numer() * (d / c.denom())).collect()
}

fn odd_part(mut x: BigInt) -> BigInt {
    while !x.is_zero() && x.is_even() {
        x /= 2;
    }
    x
}

/// The 2-saturation `{v ∈ Z^n : 2^k v ∈ L}`.
fn two_saturate(h: &IntegerMatrix) -> IntegerMatrix {
    if h.is_empty() {
        return h.clone();
    }
    let mut prod = BigInt::one();
    let mut e = Echelon::new(h.cols);
    for r in &h.rows {
        e.insert(r.clone());
    }
    for (row, &c) in h.rows.iter().zip(e.pivots()) {
        prod *= row[c].abs();
    }
    let mut k = 0u32;
    while prod.is_even() {
        prod /= 2;
        k += 1;
    }
    if k == 0 {
        return h.clone();
    }
    let n = h.cols;
    let two_k = BigInt::from(2).pow(k);
    let mut rows = h.rows.clone();
    for i in 0..n {
        rows.push((0..n).map(|j| if i == j { two_k.clone() } else { BigInt::zero() }).collect());
    }
    let ker = kernel_lattice(&IntegerMatrix::new(n, rows));
    let r = h.nrows();
    let mut sat = Echelon::new(n);
    for row in &ker.rows {
        sat.insert(row[r..].to_vec());
    }
    sat.into_hnf()
}

/// How a generator's image compares to the matching target generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorClass {
    Good,
    Bad,
    Unaligned,
}

#[derive(Debug, Clone)]
pub struct TransitionImage {
    pub image: FractionalIdeal,
    pub classes: Vec<GeneratorClass>,
}

impl FractionalIdeal {
    pub fn from_generators(ring: &Ring, gens: Vec<Vec<BigRational>>) -> Result<Self> {
        for g in &gens {
            if g.len() != ring.dim() {
                return Err(Error::RingMismatch(format!("generator of length {} in dimension {}", g.len(), ring.dim())));
            }
        }
        Ok(FractionalIdeal { ring: ring.clone(), gens, canon: OnceLock::new() })
    }

    pub fn from_elements(ring: &Ring, gens: &[GroupRingElement]) -> Result<Self> {
        let v = gens.iter().map(|x| ring.embed(x)).collect::<Result<Vec<_>>>()?;
        Self::from_generators(ring, v)
    }

    pub fn unit(ring: &Ring) -> Self {
        Self::from_generators(ring, vec![ring.one()]).unwrap()
    }

    pub fn zero(ring: &Ring) -> Self {
        Self::from_generators(ring, vec![]).unwrap()
    }

    pub fn principal(ring: &Ring, x: Vec<BigRational>) -> Result<Self> {
        Self::from_generators(ring, vec![x])
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn generators(&self) -> &[Vec<BigRational>] {
        &self.gens
    }

    /// Every `g · x_i` for `g` running through orbit representatives.
    pub fn orbit_vectors(&self) -> Vec<Vec<BigRational>> {
        let els = self.ring.orbit_elements();
        let mut out = Vec::with_capacity(els.len() * self.gens.len());
        for x in &self.gens {
            if x.iter().all(|c| c.is_zero()) {
                continue;
            }
            for &g in &els {
                out.push(self.ring.act(g, x));
            }
        }
        out
    }

    fn integer_orbit(&self) -> (BigInt, Vec<Vec<BigInt>>) {
        let orbit = self.orbit_vectors();
        let d = lcm_denominators(self.gens.iter());
        let ints = orbit.iter().map(|v| to_integers(v, &d)).collect();
        (d, ints)
    }

    pub fn canonical(&self) -> &Canonical {
        self.canon.get_or_init(|| self.compute_canonical())
    }

    fn compute_canonical(&self) -> Canonical {
        let (d, ints) = self.integer_orbit();
        let mut e = Echelon::new(self.ring.dim());
        for v in ints {
            e.insert(v);
        }
        let mut h = e.into_hnf();
        if self.ring.is_minus() {
            h = two_saturate(&h);
        }
        if h.is_empty() {
            return Canonical { scale: BigRational::one(), basis: h, bound: BigInt::one() };
        }
        let content = h.rows.iter().flatten().fold(BigInt::zero(), |a, x| a.gcd(x));
        let basis = IntegerMatrix::new(h.cols, h.rows.iter().map(|r| r.iter().map(|x| x / &content).collect()).collect());
        let mut scale = BigRational::new(content, d);
        if self.ring.is_minus() {
            scale = BigRational::new(odd_part(scale.numer().clone()), odd_part(scale.denom().clone()));
        }
        let bound = scale.denom().clone();
        Canonical { scale, basis, bound }
    }

    pub fn is_zero(&self) -> bool {
        self.canonical().basis.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.canonical().basis.nrows()
    }

    pub fn is_unit(&self) -> bool {
        *self == Self::unit(&self.ring)
    }

    fn check_ring(&self, other: &Self) -> Result<()> {
        if self.ring.same(&other.ring) {
            Ok(())
        } else {
            Err(Error::RingMismatch("ideals live in different rings".into()))
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Self::from_generators(&self.ring, gens)
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_ring(other)?;
        let mut gens = Vec::with_capacity(self.gens.len() * other.gens.len());
        for a in &self.gens {
            for b in &other.gens {
                gens.push(self.ring.mul(a, b));
            }
        }
        Self::from_generators(&self.ring, gens)
    }

    /// `x · I`.
    pub fn scale_by(&self, x: &[BigRational]) -> Self {
        let gens = self.gens.iter().map(|g| self.ring.mul(x, g)).collect();
        Self::from_generators(&self.ring, gens).unwrap()
    }

    pub fn contains(&self, x: &[BigRational]) -> Result<bool> {
        if x.len() != self.ring.dim() {
            return Err(Error::RingMismatch("element of the wrong dimension".into()));
        }
        if x.iter().all(|c| c.is_zero()) {
            return Ok(true);
        }
        let c = self.canonical();
        if c.basis.is_empty() {
            return Ok(false);
        }
        let y: Vec<BigRational> = x.iter().map(|v| v / &c.scale).collect();
        let d = lcm_denominators(std::iter::once(&y));
        // a power of 2 in the denominator is harmless in the minus ring, whose
        // lattices are 2-saturated
        if !d.is_one() && (!self.ring.is_minus() || !odd_part(d.clone()).is_one()) {
            return Ok(false);
        }
        let ints = to_integers(&y, &d);
        let mut e = Echelon::new(self.ring.dim());
        for r in &c.basis.rows {
            e.insert(r.clone());
        }
        Ok(e.contains(&ints))
    }

    pub fn contains_element(&self, x: &GroupRingElement) -> Result<bool> {
        self.contains(&self.ring.embed(x)?)
    }

    /// Whether `gI = I` for every group element.
    pub fn is_g_stable(&self) -> bool {
        let c = self.canonical();
        let mut e = Echelon::new(self.ring.dim());
        for r in &c.basis.rows {
            e.insert(r.clone());
        }
        let gens = self.ring.group().standard_generators();
        c.basis.rows.iter().all(|r| {
            let v: Vec<BigRational> = r.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            gens.iter().all(|&g| {
                let w = self.ring.act(g, &v);
                e.contains(&w.iter().map(|q| q.numer().clone()).collect::<Vec<_>>())
            })
        })
    }

    /// Integer vectors spanning `u · I` for a `p`-local unit `u`, together with
    /// `v_p` of the scale that was cleared.
    fn p_integral_orbit(&self, p: u64) -> (i64, Vec<Vec<BigInt>>) {
        let (d, ints) = self.integer_orbit();
        let pb = BigInt::from(p);
        let mut v = 0i64;
        let mut dd = d;
        while (&dd % &pb).is_zero() {
            dd /= &pb;
            v += 1;
        }
        (v, ints)
    }

    /// Certified p-local form of `p^shift · I` (up to a p-local unit).
    pub fn plocal(&self, p: u64, shift: i64) -> Result<PLocalForm> {
        let (v, mut ints) = self.p_integral_orbit(p);
        let extra = shift + v;
        if extra < 0 {
            return Err(Error::Precondition("p-local shift makes the lattice non-integral".into()));
        }
        if extra > 0 {
            let f = BigInt::from(p).pow(extra as u32);
            for r in ints.iter_mut() {
                for x in r.iter_mut() {
                    *x *= &f;
                }
            }
        }
        plocal_form(&ints, self.ring.dim(), p)
    }

    /// Equality after tensoring with `Z_(p)`.
    pub fn p_local_equal(&self, other: &Self, p: u64) -> Result<bool> {
        self.check_ring(other)?;
        if p <= 2 {
            return Err(Error::BadPrime(p));
        }
        if self.ring.dim() <= EXACT_INDEX_MAX_DIM {
            return self.p_local_equal_exact(other, p);
        }
        let (va, _) = self.p_integral_orbit(p);
        let (vb, _) = other.p_integral_orbit(p);
        let m = va.max(vb);
        match (self.plocal(p, m - va), other.plocal(p, m - vb)) {
            (Ok(a), Ok(b)) => Ok(a == b),
            // not certified: fall back to exact indices
            _ => self.p_local_equal_exact(other, p),
        }
    }

    fn p_local_equal_exact(&self, other: &Self, p: u64) -> Result<bool> {
        let d = lcm_denominators(self.gens.iter().chain(other.gens.iter()));
        let ia: Vec<Vec<BigInt>> = self.orbit_vectors().iter().map(|v| to_integers(v, &d)).collect();
        let ib: Vec<Vec<BigInt>> = other.orbit_vectors().iter().map(|v| to_integers(v, &d)).collect();
        let n = self.ring.dim();
        let mut ea = Echelon::new(n);
        for v in &ia {
            ea.insert(v.clone());
        }
        let mut eb = Echelon::new(n);
        for v in &ib {
            eb.insert(v.clone());
        }
        let mut es = ea.clone();
        for v in &ib {
            es.insert(v.clone());
        }
        if es.rank() != ea.rank() || es.rank() != eb.rank() {
            return Ok(false);
        }
        let s = es.into_hnf();
        let pb = BigInt::from(p);
        for sub in [ea.into_hnf(), eb.into_hnf()] {
            match lattice_index(&s, &sub)? {
                Index::Finite(k) => {
                    if (k % &pb).is_zero() {
                        return Ok(false);
                    }
                }
                Index::Infinite => return Ok(false),
            }
        }
        Ok(true)
    }

    /// `p`-local containment `I ⊆ J`.
    pub fn p_local_contained_in(&self, other: &Self, p: u64) -> Result<bool> {
        let s = self.sum(other)?;
        s.p_local_equal(other, p)
    }

    /// Image under a projection, with each generator classified against the
    /// generator of `target` in the same position.
    pub fn transition_image(&self, pi: &GroupHom, target: Option<&FractionalIdeal>, p: u64) -> Result<TransitionImage> {
        let ring = self.ring.image_ring(pi)?;
        let gens: Vec<Vec<BigRational>> =
            self.gens.iter().map(|g| self.ring.map_element(pi, &ring, g)).collect();
        let pq = BigRational::from_integer(p.into());
        let classes = gens
            .iter()
            .enumerate()
            .map(|(i, g)| match target.and_then(|t| t.gens.get(i)) {
                Some(t) if t == g => GeneratorClass::Good,
                Some(t) if t.iter().map(|x| x * &pq).collect::<Vec<_>>() == *g => GeneratorClass::Bad,
                _ => GeneratorClass::Unaligned,
            })
            .collect();
        Ok(TransitionImage { image: Self::from_generators(&ring, gens)?, classes })
    }

    pub fn generator_strings(&self) -> Vec<String> {
        self.gens.iter().map(|g| self.ring.format(g)).collect()
    }
}

impl PartialEq for FractionalIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.ring.same(&other.ring) && self.canonical() == other.canonical()
    }
}

impl Eq for FractionalIdeal {}

impl fmt::Debug for FractionalIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FractionalIdeal({})", self.generator_strings().join(", "))
    }
}
