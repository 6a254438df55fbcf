//! Abelian CM fields `H ⊆ Q(ζ_f)` given by the subgroup `K ⊆ (Z/f)^×` they fix.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::abelian::{
    quotient_with_conjugation, subgroup_from_generators, FiniteAbelianGroup, Group, GroupHom, Subgroup,
};
use crate::error::{Error, Result};

/// Conductor and generators of `K`; `H` is the fixed field of `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianFieldSpec {
    pub conductor: u64,
    #[serde(default)]
    pub subgroup_gens: Vec<u64>,
}

impl AbelianFieldSpec {
    pub fn new(conductor: u64, subgroup_gens: &[u64]) -> Self {
        AbelianFieldSpec { conductor, subgroup_gens: subgroup_gens.to_vec() }
    }

    /// `Q(ζ_f)`.
    pub fn cyclotomic(conductor: u64) -> Self {
        Self::new(conductor, &[])
    }
}

/// A place of `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinite,
    Prime(u64),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinite => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for Place {
    type Err = Error;

    fn from_str(s: &str) -> Result<Place> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Place::Infinite);
        }
        let p: u64 = t.parse().map_err(|_| Error::Config(format!("bad place {t:?}")))?;
        if !is_prime(p) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        Ok(Place::Prime(p))
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Place, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(p) => Place::from_str(&p.to_string()),
            Raw::Str(s) => Place::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// Parses `"2,3,inf"`; the empty string is the empty set.
pub fn parse_places(s: &str) -> Result<BTreeSet<Place>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(Place::from_str).collect()
}

pub fn format_places(s: &BTreeSet<Place>) -> Vec<String> {
    s.iter().map(|p| p.to_string()).collect()
}

/// Miller–Rabin with the first twelve prime bases, deterministic on `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    if let Some(&b) = BASES.iter().find(|&&b| n.is_multiple_of(b)) {
        return n == b;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    BASES.iter().all(|&a| {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            return true;
        }
        (1..s).any(|_| {
            x = (x as u128 * x as u128 % n as u128) as u64;
            x == n - 1
        })
    })
}

/// `(ℓ, k)` with `ℓ^k ∥ n`.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d <= n / d {
        if n.is_multiple_of(d) {
            let mut k = 0;
            while n.is_multiple_of(d) {
                n /= d;
                k += 1;
            }
            out.push((d, k));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

pub fn mod_inv(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i128) as u64)
}

/// `x ≡ r (mod q)`, `x ≡ 1 (mod m/q)` for coprime `q | m`.
fn crt_one(r: u64, q: u64, m: u64) -> u64 {
    crt_one_pair(r % q, q, 1, m / q)
}

/// Cyclic generators and their orders for `(Z/m)^×`.
fn unit_generators(m: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for (l, k) in factorize(m) {
        let q = l.pow(k);
        if l == 2 {
            if k >= 2 {
                out.push((crt_one(q - 1, q, m), 2));
            }
            if k >= 3 {
                out.push((crt_one(5, q, m), q / 4));
            }
        } else {
            let phi = q / l * (l - 1);
            let primes: Vec<u64> = factorize(phi).into_iter().map(|(r, _)| r).collect();
            let g = (2..q)
                .find(|&g| g % l != 0 && primes.iter().all(|&r| mod_pow(g, phi / r, q) != 1))
                .expect("primitive root exists");
            out.push((crt_one(g, q, m), phi));
        }
    }
    out
}

/// Decomposition and inertia data of a prime in `H/Q`.
#[derive(Debug, Clone)]
pub struct PlaceInfo {
    pub prime: u64,
    pub decomposition: Subgroup,
    pub inertia: Subgroup,
    /// The class of the residue `≡ ℓ` away from `ℓ` and `≡ 1` at `ℓ`.
    pub frobenius: usize,
    pub frobenius_residue: u64,
    pub residue_degree: usize,
}

impl PlaceInfo {
    pub fn is_ramified(&self) -> bool {
        self.inertia.order() > 1
    }
}

/// `G = (Z/f)^×/K` with the class map on residues and `c = [−1]`.
#[derive(Debug, Clone)]
pub struct AbelianField {
    spec: AbelianFieldSpec,
    group: Group,
    class: Vec<usize>,
    representative: Vec<u64>,
    kernel: BTreeSet<u64>,
    units_hom: GroupHom,
}

impl AbelianField {
    pub fn new(spec: &AbelianFieldSpec) -> Result<AbelianField> {
        let f = spec.conductor;
        if f < 3 {
            return Err(Error::InvalidField(format!("conductor {f} has no imaginary subfield")));
        }
        if f > 1 << 20 {
            return Err(Error::InvalidField(format!("conductor {f} too large")));
        }
        for &k in &spec.subgroup_gens {
            if k.gcd(&f) != 1 {
                return Err(Error::InvalidField(format!("{k} is not a unit mod {f}")));
            }
        }
        let gens = unit_generators(f);
        let orders: Vec<u64> = gens.iter().map(|&(_, o)| o).collect();
        let units = FiniteAbelianGroup::new(&orders)?.into_arc();
        let mut residue_of = vec![0u64; units.order()];
        let mut index_of = vec![usize::MAX; f as usize];
        for u in units.elements() {
            let r = units
                .exponents(u)
                .iter()
                .zip(&gens)
                .fold(1u64, |acc, (&e, &(g, _))| (acc as u128 * mod_pow(g, e, f) as u128 % f as u128) as u64);
            residue_of[u] = r;
            index_of[r as usize] = u;
        }
        let k_elems: Vec<usize> = spec.subgroup_gens.iter().map(|&k| index_of[(k % f) as usize]).collect();
        let k = subgroup_from_generators(&units, &k_elems)?;
        let minus_one = index_of[(f - 1) as usize];
        if k.contains(minus_one) {
            return Err(Error::InvalidField(format!("−1 lies in K, so the fixed field is real (conductor {f})")));
        }
        let units_c = FiniteAbelianGroup::clone(&units).with_conjugation(minus_one)?.into_arc();
        let k = subgroup_from_generators(&units_c, &k_elems)?;
        let (group, pi) = quotient_with_conjugation(&units_c, &k)?;
        let mut class = vec![usize::MAX; f as usize];
        let mut representative = vec![u64::MAX; group.order()];
        for r in 1..f {
            if r.gcd(&f) == 1 {
                let g = pi.apply(index_of[r as usize]);
                class[r as usize] = g;
                if representative[g] == u64::MAX {
                    representative[g] = r;
                }
            }
        }
        let kernel = k.elements().iter().map(|&u| residue_of[u]).collect();
        Ok(AbelianField { spec: spec.clone(), group, class, representative, kernel, units_hom: pi })
    }

    pub fn spec(&self) -> &AbelianFieldSpec {
        &self.spec
    }

    pub fn conductor(&self) -> u64 {
        self.spec.conductor
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// `c`, the class of `−1`.
    pub fn conjugation(&self) -> usize {
        self.group.conjugation().expect("CM field")
    }

    /// `σ_a`, the class of `a` modulo `f`.
    pub fn sigma(&self, a: i64) -> Result<usize> {
        let f = self.conductor() as i64;
        let r = a.rem_euclid(f) as usize;
        match self.class[r] {
            usize::MAX => Err(Error::InvalidField(format!("{a} is not a unit mod {f}"))),
            g => Ok(g),
        }
    }

    /// Smallest positive residue in the class `g`.
    pub fn representative(&self, g: usize) -> u64 {
        self.representative[g]
    }

    pub fn label(&self, g: usize) -> String {
        format!("sigma_{}", self.representative(g))
    }

    pub fn kernel(&self) -> &BTreeSet<u64> {
        &self.kernel
    }

    /// The projection `(Z/f)^× → G`.
    pub fn units_projection(&self) -> &GroupHom {
        &self.units_hom
    }

    /// Residues `a` in `1..f` coprime to `f`.
    pub fn units(&self) -> impl Iterator<Item = u64> + '_ {
        let f = self.conductor();
        (1..f).filter(move |a| a.gcd(&f) == 1)
    }

    /// Decomposition, inertia and the fixed Frobenius lift at `ℓ`.
    pub fn place(&self, l: u64) -> Result<PlaceInfo> {
        if !is_prime(l) {
            return Err(Error::InvalidField(format!("{l} is not prime")));
        }
        let f = self.conductor();
        let mut q = 1;
        while f.is_multiple_of(q * l) {
            q *= l;
        }
        let rest = f / q;
        let frob_res = if rest == 1 { 1 } else { crt_one_pair(l % rest, rest, 1, q) };
        let frobenius = self.sigma(frob_res as i64)?;
        // inertia: classes of residues ≡ 1 away from ℓ
        let inertia_gens: Vec<usize> = if q == 1 {
            Vec::new()
        } else {
            unit_generators(q).iter().map(|&(g, _)| self.sigma(crt_one_pair(1, rest, g, q) as i64)).collect::<Result<_>>()?
        };
        let inertia = subgroup_from_generators(&self.group, &inertia_gens)?;
        let mut dgens = inertia_gens.clone();
        dgens.push(frobenius);
        let decomposition = subgroup_from_generators(&self.group, &dgens)?;
        Ok(PlaceInfo {
            prime: l,
            residue_degree: decomposition.order() / inertia.order(),
            decomposition,
            inertia,
            frobenius,
            frobenius_residue: frob_res,
        })
    }

    /// Primes ramified in `H/Q`.
    pub fn ramified_primes(&self) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for (l, _) in factorize(self.conductor()) {
            if self.place(l)?.is_ramified() {
                out.push(l);
            }
        }
        Ok(out)
    }

    /// Whether `ζ_p ∈ H`, i.e. `K` lies in the kernel of reduction mod `p`.
    pub fn contains_mu_p(&self, p: u64) -> bool {
        self.conductor().is_multiple_of(p) && self.kernel.iter().all(|&k| k % p == 1)
    }

    /// `H` viewed at the smaller level `f0 | f`, when `H ⊆ Q(ζ_{f0})`.
    pub fn at_conductor(&self, f0: u64) -> Result<Option<AbelianField>> {
        let f = self.conductor();
        if !f.is_multiple_of(f0) || f0 < 3 {
            return Err(Error::InvalidField(format!("{f0} does not divide {f} or is below 3")));
        }
        // H ⊆ Q(ζ_{f0}) iff every a ≡ 1 (mod f0) lies in K
        if !self.units().filter(|a| a % f0 == 1).all(|a| self.kernel.contains(&a)) {
            return Ok(None);
        }
        let gens: BTreeSet<u64> = self.kernel.iter().map(|k| k % f0).filter(|&k| k != 1 % f0).collect();
        let gens: Vec<u64> = gens.into_iter().collect();
        AbelianField::new(&AbelianFieldSpec::new(f0, &gens)).map(Some)
    }

    /// Smallest level at which `H` is defined.
    pub fn minimal_conductor(&self) -> Result<u64> {
        let f = self.conductor();
        for d in 3..=f {
            if f.is_multiple_of(d) && self.at_conductor(d)?.is_some() {
                return Ok(d);
            }
        }
        Ok(f)
    }

    /// Group isomorphism to the same field at another level, through residues.
    pub fn transport_to(&self, other: &AbelianField) -> Result<Vec<usize>> {
        let (big, small) = (self.conductor().max(other.conductor()), self.conductor().min(other.conductor()));
        if big % small != 0 || self.group.order() != other.group.order() {
            return Err(Error::InvalidField("fields are not the same field at two levels".into()));
        }
        let mut map = vec![usize::MAX; self.group.order()];
        for a in (1..big).filter(|a| a.gcd(&big) == 1) {
            let s = self.sigma(a as i64)?;
            let t = other.sigma(a as i64)?;
            if map[s] != usize::MAX && map[s] != t {
                return Err(Error::InvalidField("residue classes do not correspond".into()));
            }
            map[s] = t;
        }
        Ok(map)
    }
}

/// `x ≡ a (mod m)`, `x ≡ b (mod n)` for coprime `m`, `n`, in `[0, mn)`.
pub fn crt_one_pair(a: u64, m: u64, b: u64, n: u64) -> u64 {
    let mn = m as u128 * n as u128;
    let e = (m as i128).extended_gcd(&(n as i128));
    debug_assert_eq!(e.gcd, 1);
    let x = a as i128 * n as i128 * e.y + b as i128 * m as i128 * e.x;
    x.rem_euclid(mn as i128) as u64
}

/// All CM subfields of `Q(ζ_f)`, each given by a sorted generating set of `K`.
pub fn cm_subfields(f: u64) -> Result<Vec<AbelianFieldSpec>> {
    let full = AbelianField::new(&AbelianFieldSpec::cyclotomic(f))?;
    let g = full.group();
    let mut out = Vec::new();
    for k in crate::abelian::all_subgroups(g) {
        if k.contains(full.conjugation()) {
            continue;
        }
        let gens: Vec<u64> = k.generators().iter().map(|&x| full.representative(x)).collect();
        out.push(AbelianFieldSpec::new(f, &gens));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_agrees_with_trial_division() {
        for n in 0..20_000u64 {
            let trial = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), trial, "{n}");
        }
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(!is_prime(u64::MAX));
        // strong pseudoprime to bases 2..=23
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert_eq!(factorize(u64::MAX), vec![(3, 1), (5, 1), (17, 1), (257, 1), (641, 1), (65537, 1), (6_700_417, 1)]);
    }

    #[test]
    fn gaussian_field() {
        let h = AbelianField::new(&AbelianFieldSpec::cyclotomic(4)).unwrap();
        assert_eq!(h.group().order(), 2);
        assert_eq!(h.sigma(3).unwrap(), h.conjugation());
        let p2 = h.place(2).unwrap();
        assert!(p2.is_ramified());
        let p5 = h.place(5).unwrap();
        assert_eq!(p5.frobenius, 0);
        let p3 = h.place(3).unwrap();
        assert_eq!(p3.frobenius, h.conjugation());
        assert_eq!(p3.residue_degree, 2);
    }

    #[test]
    fn q_i_inside_level_twelve() {
        // K = {1, 5}: 5 ≡ 1 mod 4
        let h = AbelianField::new(&AbelianFieldSpec::new(12, &[5])).unwrap();
        assert_eq!(h.group().order(), 2);
        assert_eq!(h.ramified_primes().unwrap(), vec![2]);
        assert_eq!(h.minimal_conductor().unwrap(), 4);
        assert!(!h.place(3).unwrap().is_ramified());
    }

    #[test]
    fn real_fields_rejected() {
        assert!(AbelianField::new(&AbelianFieldSpec::new(5, &[4])).is_err());
        assert!(AbelianField::new(&AbelianFieldSpec::cyclotomic(2)).is_err());
    }

    #[test]
    fn unit_group_structure() {
        for f in 3..200u64 {
            let h = AbelianField::new(&AbelianFieldSpec::cyclotomic(f)).unwrap();
            let phi = (1..f).filter(|a| a.gcd(&f) == 1).count();
            assert_eq!(h.group().order(), phi, "f = {f}");
            for a in h.units() {
                for b in h.units() {
                    let ab = (a * b % f) as i64;
                    assert_eq!(h.group().mul(h.sigma(a as i64).unwrap(), h.sigma(b as i64).unwrap()), h.sigma(ab).unwrap());
                }
                if f > 60 {
                    break;
                }
            }
        }
    }

    #[test]
    fn mu_p_detection() {
        let z3 = AbelianField::new(&AbelianFieldSpec::cyclotomic(3)).unwrap();
        assert!(z3.contains_mu_p(3));
        let qi = AbelianField::new(&AbelianFieldSpec::cyclotomic(4)).unwrap();
        assert!(!qi.contains_mu_p(3));
        // Q(√−3) inside Q(ζ_12): K = {1, 7}
        let h = AbelianField::new(&AbelianFieldSpec::new(12, &[7])).unwrap();
        assert!(h.contains_mu_p(3));
    }

    #[test]
    fn places_parse() {
        let s = parse_places("2, inf,5").unwrap();
        assert_eq!(s.into_iter().collect::<Vec<_>>(), vec![Place::Infinite, Place::Prime(2), Place::Prime(5)]);
        assert!(parse_places("4").is_err());
        assert!(parse_places("x").is_err());
    }
}
