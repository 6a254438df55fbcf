//! Brute-force residue-field model of `A^{T,−}` for fields whose minus class
//! group is known.
//!
//! Builds its own model of `G = (Z/f)^×/K` from residues and never touches the
//! L-value or tower code, so comparisons against those are two-sided.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::abelian::lattice::{kernel_modulo, Echelon};
use crate::abelian::{lattice_index, subgroup_from_generators, FiniteAbelianGroup, Group, Index, IntegerMatrix, PresentedGroup, Subgroup};
use crate::error::{Error, Result};
use crate::fitting::{fitt0_with_caps, FittingCaps, PresentedModule};
use crate::ideal::ring as ops;
use crate::ideal::{FractionalIdeal, Ring};

fn prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// `(Z/f)^×/K` built by greedy generators with triangular relations.
#[derive(Debug, Clone)]
pub struct ResidueGroup {
    pub conductor: u64,
    pub group: Group,
    /// Class of each residue, `usize::MAX` off the units.
    class: Vec<usize>,
    /// Smallest residue in each class.
    residue: Vec<u64>,
}

impl ResidueGroup {
    pub fn new(f: u64, kernel_gens: &[u64]) -> Result<ResidueGroup> {
        if !(3..=1 << 16).contains(&f) {
            return Err(Error::InvalidField(format!("oracle conductor {f} out of range")));
        }
        let n = f as usize;
        // exponent vector of every residue in the current subgroup ⟨K, a_1, …⟩
        let mut vec_of: Vec<Option<Vec<i64>>> = vec![None; n];
        let mut members = vec![1u64];
        vec_of[1] = Some(Vec::new());
        // close K
        let mut i = 0;
        while i < members.len() {
            for &k in kernel_gens {
                if k.gcd(&f) != 1 {
                    return Err(Error::InvalidField(format!("{k} is not a unit mod {f}")));
                }
                let r = members[i] * k % f;
                if vec_of[r as usize].is_none() {
                    vec_of[r as usize] = Some(Vec::new());
                    members.push(r);
                }
            }
            i += 1;
        }
        let mut orders = Vec::new();
        let mut relations: Vec<Vec<i64>> = Vec::new();
        for a in 2..f {
            if a.gcd(&f) != 1 || vec_of[a as usize].is_some() {
                continue;
            }
            let j = orders.len();
            for v in vec_of.iter_mut().flatten() {
                v.push(0);
            }
            // relative order and the relation a^o = h
            let mut o = 1u64;
            let mut x = a;
            while vec_of[x as usize].is_none() {
                x = x * a % f;
                o += 1;
            }
            let mut rel = vec_of[x as usize].clone().unwrap();
            for r in rel.iter_mut() {
                *r = -*r;
            }
            rel[j] = o as i64;
            relations.push(rel);
            let old = members.clone();
            let mut ap = 1u64;
            for t in 1..o {
                ap = ap * a % f;
                for &h in &old {
                    let r = h * ap % f;
                    let mut v = vec_of[h as usize].clone().unwrap();
                    v[j] = t as i64;
                    vec_of[r as usize] = Some(v);
                    members.push(r);
                }
            }
            orders.push(o);
        }
        let k = orders.len();
        for r in relations.iter_mut() {
            r.resize(k, 0);
        }
        // diagonal entries: full orders in (Z/f)^×/K are multiples of the relative ones
        let full: Vec<u64> = orders.iter().map(|_| members.len() as u64).collect();
        let pg = PresentedGroup::new(&full, &relations)?;
        let mut class = vec![usize::MAX; n];
        let mut residue = vec![u64::MAX; pg.group.order()];
        for r in 1..f {
            if let Some(v) = &vec_of[r as usize] {
                let mut v = v.clone();
                v.resize(k, 0);
                let g = pg.class_of(&v);
                class[r as usize] = g;
                if residue[g] == u64::MAX {
                    residue[g] = r;
                }
            }
        }
        if residue.contains(&u64::MAX) {
            return Err(Error::Inconsistency("residue model does not cover its group".into()));
        }
        let c = class[n - 1];
        if c == pg.group.identity() {
            return Err(Error::InvalidField(format!("−1 lies in K, so the fixed field is real (conductor {f})")));
        }
        let group = FiniteAbelianGroup::clone(&pg.group).with_conjugation(c)?.into_arc();
        Ok(ResidueGroup { conductor: f, group, class, residue })
    }

    pub fn class(&self, a: u64) -> Result<usize> {
        match self.class[(a % self.conductor) as usize] {
            usize::MAX => Err(Error::InvalidField(format!("{a} is not a unit mod {}", self.conductor))),
            g => Ok(g),
        }
    }

    pub fn residue(&self, g: usize) -> u64 {
        self.residue[g]
    }

    /// Whether every residue in `K` is `≡ 1 (mod m)`.
    fn kernel_is_one_mod(&self, m: u64) -> bool {
        let id = self.group.identity();
        (1..self.conductor).filter(|&r| self.class[r as usize] == id).all(|r| r % m == 1)
    }
}

/// Residue-field data at one `ℓ ∈ T`.
#[derive(Debug, Clone)]
pub struct ResiduePlace {
    pub prime: u64,
    pub inertia: Subgroup,
    pub decomposition: Subgroup,
    pub frobenius: usize,
    pub residue_degree: u32,
    /// Representatives of `G/D_v`, one place `w | v` each.
    pub cosets: Vec<usize>,
    /// `|κ(w)^×| = ℓ^{f_v} − 1`.
    pub residue_units: u64,
}

fn residue_place(h: &ResidueGroup, l: u64) -> Result<ResiduePlace> {
    let f = h.conductor;
    let mut q = 1;
    while f.is_multiple_of(q * l) {
        q *= l;
    }
    let rest = f / q;
    let units = (1..f).filter(|r| r.gcd(&f) == 1);
    let inertia: Vec<usize> = units.clone().filter(|r| r % rest == 1 % rest).map(|r| h.class(r)).collect::<Result<_>>()?;
    let frob_res =
        units.clone().find(|r| r % rest == l % rest && r % q == 1 % q).ok_or_else(|| Error::Inconsistency("no Frobenius residue".into()))?;
    let frobenius = h.class(frob_res)?;
    let inertia = subgroup_from_generators(&h.group, &inertia)?;
    let mut dg = inertia.elements().to_vec();
    dg.push(frobenius);
    let decomposition = subgroup_from_generators(&h.group, &dg)?;
    let fv = (decomposition.order() / inertia.order()) as u32;
    let mut covered = vec![false; h.group.order()];
    let mut cosets = Vec::new();
    let mut elems: Vec<usize> = h.group.elements().collect();
    elems.sort_by_key(|&g| h.residue(g));
    for g in elems {
        if !covered[g] {
            cosets.push(g);
            for &d in decomposition.elements() {
                covered[h.group.mul(g, d)] = true;
            }
        }
    }
    let residue_units = l.checked_pow(fv).and_then(|x| x.checked_sub(1)).ok_or_else(|| Error::CapExceeded(format!("{l}^{fv}")))?;
    Ok(ResiduePlace { prime: l, inertia, decomposition, frobenius, residue_degree: fv, cosets, residue_units })
}

/// The oracle's output for `coker(μ_{p^∞} → (⊕_{w∈T_H} κ(w)^× ⊗ Z_p)^−)`.
#[derive(Debug, Clone)]
pub struct RayClassMinus {
    pub group: ResidueGroup,
    pub ring: Ring,
    pub p: u64,
    pub places: Vec<ResiduePlace>,
    /// `p^a = |μ(H)_p|`.
    pub mu_order: u64,
    /// Presentation with one generator `E_v` per `v ∈ T`.
    pub module: PresentedModule,
    /// `|M_p|`.
    pub order: BigInt,
    /// `Fitt` of the presentation itself.
    pub fitting: FractionalIdeal,
    /// `Fitt` of the Pontryagin dual, from the transposed Z-structure.
    pub dual_fitting: FractionalIdeal,
    /// `[Z[G] : (σ_v − ℓ, i − 1)] = (ℓ^{f_v} − 1)^{[G:D_v]}` at each `v`.
    pub index_checks: Vec<bool>,
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

fn to_ints(v: &[BigRational]) -> Result<Vec<BigInt>> {
    v.iter()
        .map(|c| if c.is_integer() { Ok(c.to_integer()) } else { Err(Error::Inconsistency("non-integral relation".into())) })
        .collect()
}

/// `A^{T,−}_p` modulo the class group part: the residue-field module, the
/// image of `μ_p`, and the Fitting ideals of the cokernel and of its dual.
pub fn oracle_ray_class_minus(conductor: u64, kernel_gens: &[u64], p: u64, t: &[u64]) -> Result<RayClassMinus> {
    if p == 2 || !prime(p) {
        return Err(Error::BadPrime(p));
    }
    if t.is_empty() {
        return Err(Error::Precondition("T is empty".into()));
    }
    let h = ResidueGroup::new(conductor, kernel_gens)?;
    let ring = Ring::minus(&h.group)?;
    let full = Ring::full(&h.group);
    let mut places = Vec::new();
    let mut index_checks = Vec::new();
    for &l in t {
        if !prime(l) || l == p {
            return Err(Error::Precondition(format!("T must consist of primes other than p, got {l}")));
        }
        let v = residue_place(&h, l)?;
        let mut e = Echelon::new(full.dim());
        for r in relations_at(&full, &v) {
            let r = to_ints(&r)?;
            for g in h.group.elements() {
                e.insert(act_blocks(&full, g, &r));
            }
        }
        let expected = BigInt::from(v.residue_units).pow(v.cosets.len() as u32);
        index_checks.push(lattice_index(&IntegerMatrix::identity(full.dim()), &e.into_hnf())? == Index::Finite(expected));
        places.push(v);
    }
    // μ(H)_p = μ_{p^a}, a maximal with ζ_{p^a} ∈ H
    let mut pa = 1u64;
    while conductor.is_multiple_of(pa * p) && h.kernel_is_one_mod(pa * p) {
        pa *= p;
    }
    let k = places.len();
    let mut relations: Vec<Vec<Vec<BigRational>>> = Vec::new();
    for (j, v) in places.iter().enumerate() {
        for r in relations_at(&ring, v) {
            let mut col = vec![vec![BigRational::zero(); ring.dim()]; k];
            col[j] = r;
            relations.push(col);
        }
    }
    if pa > 1 {
        // ζ reduces at g(w_0) to g(γ^{N χ(g)^{-1}}), N = (ℓ^{f_v} − 1)/p^a
        let mut col = Vec::with_capacity(k);
        for v in &places {
            if v.residue_units % pa != 0 {
                return Err(Error::Inconsistency(format!("μ_{pa} does not inject into κ(w)^× at {}", v.prime)));
            }
            let n = (v.residue_units / pa) as i64;
            let mut x = vec![BigRational::zero(); ring.dim()];
            for &g in &v.cosets {
                let chi = h.residue(g) % pa;
                let inv = (1..pa).find(|&y| chi * y % pa == 1).expect("unit mod p^a") as i64;
                x = ops::add(&x, &ops::scale(&ring.group_element(g), &int(inv * n)));
            }
            col.push(x);
        }
        relations.push(col);
    }
    let module = PresentedModule::new(&ring, k, relations)?;
    let (order, basis) = p_part_structure(&ring, &module, p)?;
    let caps = FittingCaps { max_generators: 4, max_relations: 64.max(k * ring.dim() + module.relations.len()) };
    let fitting = fitt0_with_caps(&module, caps)?;
    let dual_fitting = match &basis {
        None => FractionalIdeal::unit(&ring),
        Some(b) => fitt0_with_caps(&dual_presentation(&ring, b, &order)?, caps)?,
    };
    Ok(RayClassMinus { group: h, ring, p, places, mu_order: pa, module, order, fitting, dual_fitting, index_checks })
}

/// `(σ_v − ℓ)` and `(i − 1)` for generators `i` of `I_v`.
fn relations_at(ring: &Ring, v: &ResiduePlace) -> Vec<Vec<BigRational>> {
    let mut out = vec![ops::sub(&ring.group_element(v.frobenius), &ring.integer(v.prime as i64))];
    for &i in v.inertia.generators() {
        out.push(ops::sub(&ring.group_element(i), &ring.one()));
    }
    out
}

/// Coordinates of `u` in the upper-triangular full-rank row basis `b`.
fn coordinates(b: &[Vec<BigInt>], u: &[BigInt]) -> Vec<BigInt> {
    let mut w = u.to_vec();
    let mut out = Vec::with_capacity(b.len());
    for (i, row) in b.iter().enumerate() {
        let (q, r) = w[i].div_rem(&row[i]);
        assert!(r.is_zero(), "vector outside the lattice");
        for (x, y) in w.iter_mut().zip(row) {
            *x -= &q * y;
        }
        out.push(q);
    }
    debug_assert!(w.iter().all(Zero::is_zero));
    out
}

fn act_blocks(ring: &Ring, g: usize, x: &[BigInt]) -> Vec<BigInt> {
    let d = ring.dim();
    let mut out = Vec::with_capacity(x.len());
    for block in x.chunks(d) {
        let v: Vec<BigRational> = block.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        out.extend(ring.act(g, &v).into_iter().map(|c| c.to_integer()));
    }
    out
}

/// `|M ⊗ Z_p|` and an HNF basis of the relation lattice of `M ⊗ Z_p` in
/// `Z^{kd}` (none when the p-part vanishes). `|M ⊗ Z_p|` annihilates it.
fn p_part_structure(ring: &Ring, m: &PresentedModule, p: u64) -> Result<(BigInt, Option<Vec<Vec<BigInt>>>)> {
    let d = ring.dim();
    let n = m.num_generators * d;
    let reps = ring.orbit_elements();
    let mut e = Echelon::new(n);
    for col in &m.relations {
        let flat: Vec<BigInt> = col.iter().map(|x| to_ints(x)).collect::<Result<Vec<_>>>()?.concat();
        for &g in &reps {
            e.insert(act_blocks(ring, g, &flat));
        }
    }
    let l = e.into_hnf();
    let index = match lattice_index(&IntegerMatrix::identity(n), &l)? {
        Index::Finite(x) => x,
        Index::Infinite => return Err(Error::Precondition("residue-field module is infinite".into())),
    };
    let bp = BigInt::from(p);
    let mut order = BigInt::one();
    let mut rest = index;
    while (&rest % &bp).is_zero() {
        rest /= &bp;
        order *= &bp;
    }
    if order.is_one() {
        return Ok((order, None));
    }
    let mut e = Echelon::with_modulus(n, &order);
    for r in &l.rows {
        e.insert(r.clone());
    }
    let b = e.into_hnf().rows;
    debug_assert!(b.iter().enumerate().all(|(i, r)| r[i].is_positive()));
    Ok((order, Some(b)))
}

/// Presentation of `Hom(M_p, Q_p/Z_p)` with `g·φ = φ∘g`.
///
/// With relation rows `b_i` and `g·b_i = Σ_j D_{ij} b_j`, the dual is
/// `Z^n / (columns of B)` with `g` acting by `D_g`.
fn dual_presentation(ring: &Ring, b: &[Vec<BigInt>], m_p: &BigInt) -> Result<PresentedModule> {
    let d = ring.dim();
    let n = b.len();
    let reps = ring.orbit_elements();
    // D_g for each basis element of the ring
    let actions: Vec<Vec<Vec<BigInt>>> = reps
        .iter()
        .map(|&g| b.iter().map(|row| coordinates(b, &act_blocks(ring, g, row))).collect())
        .collect();
    let apply = |dg: &Vec<Vec<BigInt>>, z: &[BigInt]| -> Vec<BigInt> {
        dg.iter().map(|row| row.iter().zip(z).fold(BigInt::zero(), |a, (x, y)| a + x * y)).collect()
    };
    let dual_lattice = IntegerMatrix::new(n, (0..n).map(|j| b.iter().map(|r| r[j].clone()).collect()).collect());
    let mut span = Echelon::with_modulus(n, m_p);
    for r in &dual_lattice.rows {
        span.insert(r.clone());
    }
    let mut gens: Vec<Vec<BigInt>> = Vec::new();
    for t in 0..n {
        let et: Vec<BigInt> = (0..n).map(|i| if i == t { BigInt::one() } else { BigInt::zero() }).collect();
        if span.contains(&et) {
            continue;
        }
        for dg in &actions {
            span.insert(apply(dg, &et));
        }
        gens.push(et);
    }
    let images: Vec<Vec<BigInt>> = gens.iter().flat_map(|z| actions.iter().map(move |dg| apply(dg, z))).collect();
    let ker = kernel_modulo(&images, &dual_lattice, m_p);
    let s = gens.len();
    let relations = ker
        .rows
        .iter()
        .map(|row| row.chunks(d).map(|c| c.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect())
        .collect();
    Ok(PresentedModule::new(ring, s, relations)?.with_exponent(m_p.clone()))
}

/// `v_p` of a nonzero integer.
pub fn valuation(x: &BigInt, p: u64) -> u32 {
    let bp = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while !x.is_zero() && (&x % &bp).is_zero() {
        x /= &bp;
        v += 1;
    }
    v
}

/// `|M_p|` as `p^v`.
pub fn order_exponent(o: &RayClassMinus) -> u32 {
    valuation(&o.order, o.p)
}
