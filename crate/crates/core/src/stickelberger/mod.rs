//! Equivariant L-values at `s = 0` for abelian CM fields over `Q`, built from
//! the partial zeta values `ζ_f(0, a) = 1/2 − a/f`.

pub mod field;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::abelian::GroupHom;
use crate::error::{Error, Result};
use crate::group_ring::{minus_project, rat, GroupRingElement, MinusRingElement};
use crate::group_ring::{orbit_representatives, Character};
use crate::ideal::Ring;

pub use field::{
    cm_subfields, factorize, format_places, is_prime, parse_places, AbelianField, AbelianFieldSpec, Place, PlaceInfo,
};

/// An equivariant L-value with the sets it encodes.
#[derive(Debug, Clone)]
pub struct LValue {
    pub field: AbelianField,
    pub s: BTreeSet<Place>,
    pub s_prime: BTreeSet<Place>,
    pub t: BTreeSet<Place>,
    pub value: GroupRingElement,
    /// `value` in `Q[G]^−`, with basis the representatives of `{g, gc}`.
    pub minus: MinusRingElement,
    pub layer: Option<usize>,
}

impl LValue {
    fn new(field: &AbelianField, s: &BTreeSet<Place>, t: &BTreeSet<Place>, value: GroupRingElement) -> Result<Self> {
        let minus = minus_project(&value)?;
        Ok(LValue { field: field.clone(), s: s.clone(), s_prime: BTreeSet::new(), t: t.clone(), value, minus, layer: None })
    }

    pub fn minus_ring(&self) -> Ring {
        Ring::Minus(self.minus.basis().clone())
    }

    /// `e^+·Θ = 0`, i.e. `x_g + x_{gc} = 0` for every `g`.
    pub fn is_minus_pure(&self) -> bool {
        let v = &self.value;
        let g = self.field.group();
        let c = self.field.conjugation();
        g.elements().all(|x| (v.coeff(x) + v.coeff(g.mul(x, c))).is_zero())
    }

    pub fn to_json(&self) -> LValueJson {
        let g = self.field.group();
        let mut elems: Vec<usize> = g.elements().collect();
        elems.sort_by_key(|&x| self.field.representative(x));
        let coeffs =
            Some(Coefficients(elems.iter().map(|&x| (self.field.label(x), self.value.coeff(x).to_string())).collect()));
        let reps = self.minus.basis().reps().to_vec();
        let minus = Coefficients(
            reps.iter()
                .zip(self.minus.coeffs())
                .map(|(&r, c)| (self.field.label(r), c.to_string()))
                .collect(),
        );
        LValueJson {
            conductor: self.field.conductor(),
            subgroup_gens: self.field.spec().subgroup_gens.clone(),
            s: format_places(&self.s),
            s_prime: format_places(&self.s_prime),
            t: format_places(&self.t),
            coeffs,
            minus_coeffs: minus,
        }
    }
}

/// Ordered `label → "p/q"` pairs, serialized as a JSON object.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(from = "std::collections::BTreeMap<String, String>")]
pub struct Coefficients(pub Vec<(String, String)>);

impl From<std::collections::BTreeMap<String, String>> for Coefficients {
    fn from(m: std::collections::BTreeMap<String, String>) -> Self {
        Coefficients(m.into_iter().collect())
    }
}

impl Serialize for Coefficients {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LValueJson {
    pub conductor: u64,
    pub subgroup_gens: Vec<u64>,
    #[serde(rename = "S", default)]
    pub s: Vec<String>,
    #[serde(rename = "Sprime", default)]
    pub s_prime: Vec<String>,
    #[serde(rename = "T", default)]
    pub t: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coeffs: Option<Coefficients>,
    #[serde(default = "empty_coeffs")]
    pub minus_coeffs: Coefficients,
}

fn empty_coeffs() -> Coefficients {
    Coefficients(Vec::new())
}

/// Parses a rational written `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| Error::Config(format!("bad numerator in {t:?}")))?;
    let d: BigInt = d.parse().map_err(|_| Error::Config(format!("bad denominator in {t:?}")))?;
    if d.is_zero() {
        return Err(Error::Config(format!("zero denominator in {t:?}")));
    }
    Ok(BigRational::new(n, d))
}

/// Reads an L-value back from its JSON form. `coeffs` keys are `sigma_a`
/// for any residue `a` in the class.
pub fn lvalue_from_json(text: &str) -> Result<GroupRingElement> {
    let j: LValueJson = serde_json::from_str(text).map_err(|e| Error::Config(format!("L-value JSON: {e}")))?;
    let field = AbelianField::new(&AbelianFieldSpec::new(j.conductor, &j.subgroup_gens))?;
    let coeffs = j.coeffs.ok_or_else(|| Error::Config("missing \"coeffs\"".into()))?;
    let mut v = GroupRingElement::zero(field.group());
    let mut seen = BTreeSet::new();
    for (k, c) in &coeffs.0 {
        let a: i64 = k
            .strip_prefix("sigma_")
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad coefficient key {k:?}")))?;
        let g = field.sigma(a)?;
        if !seen.insert(g) {
            return Err(Error::Config(format!("class of {k} given twice")));
        }
        v = v + GroupRingElement::basis(field.group(), g).scale(&parse_rational(c)?);
    }
    Ok(v)
}

/// `Θ_{S_f ∪ {∞}}(Q(ζ_f)/Q) = Σ_a (1/2 − a/f)·σ_a^{-1}`.
pub fn theta_full_level(f: u64) -> Result<LValue> {
    let field = AbelianField::new(&AbelianFieldSpec::cyclotomic(f))?;
    let s = level_places(&field);
    let v = restricted_full_level(&field)?;
    LValue::new(&field, &s, &BTreeSet::new(), v)
}

fn level_places(field: &AbelianField) -> BTreeSet<Place> {
    let mut s: BTreeSet<Place> = factorize(field.conductor()).into_iter().map(|(l, _)| Place::Prime(l)).collect();
    s.insert(Place::Infinite);
    s
}

/// The level-`f` value pushed down to `G = (Z/f)^×/K`.
fn restricted_full_level(field: &AbelianField) -> Result<GroupRingElement> {
    let f = field.conductor() as i64;
    let g = field.group();
    let mut coeffs = vec![BigRational::zero(); g.order()];
    for a in field.units() {
        let inv = g.inv(field.sigma(a as i64)?);
        coeffs[inv] += rat(1, 2) - rat(a as i64, f);
    }
    GroupRingElement::from_coeffs(g, coeffs)
}

/// `1 − e_{I_v}φ_v^{-1}·k`.
fn euler_factor(field: &AbelianField, info: &PlaceInfo, k: &BigRational) -> GroupRingElement {
    let g = field.group();
    let e = crate::group_ring::idempotent(&info.inertia);
    let phi_inv = GroupRingElement::basis(g, g.inv(info.frobenius));
    GroupRingElement::one(g) - e * phi_inv.scale(k)
}

/// Candidate inverse of `1 − e_Iφ^{-1}` on the characters where it is
/// invertible: `(1 − e_I) − (e_I/m)·Σ_{k<m} k·φ^{-k}`, `m` the order of `φ`,
/// using `1/(1 − ζ) = −(1/m)Σ k ζ^k` for `ζ^m = 1 ≠ ζ`.
fn euler_inverse_candidate(field: &AbelianField, info: &PlaceInfo) -> GroupRingElement {
    let g = field.group();
    let e = crate::group_ring::idempotent(&info.inertia);
    let phi_inv = g.inv(info.frobenius);
    let m = g.element_order(phi_inv) as i64;
    let mut sum = vec![BigRational::zero(); g.order()];
    let mut x = 0;
    for k in 0..m {
        sum[x] += rat(k, 1);
        x = g.mul(x, phi_inv);
    }
    let s = GroupRingElement::from_coeffs(g, sum).expect("dimension matches");
    GroupRingElement::one(g) - e.clone() - e * s.scale(&rat(1, m))
}

fn primes_of(set: &BTreeSet<Place>) -> Vec<u64> {
    set.iter()
        .filter_map(|p| match p {
            Place::Prime(l) => Some(*l),
            Place::Infinite => None,
        })
        .collect()
}

fn describe_character(field: &AbelianField, chi: &Character) -> String {
    let g = field.group();
    let vals: Vec<String> = g
        .standard_generators()
        .iter()
        .map(|&x| format!("{}↦ζ_{}^{}", field.label(x), chi.order, chi.exponent_at(g, x)))
        .collect();
    format!("χ[{}]", vals.join(","))
}

/// An odd character (up to Galois conjugacy) killing `x`, if any.
fn killing_odd_character(field: &AbelianField, x: &GroupRingElement) -> Option<String> {
    let g = field.group();
    orbit_representatives(g)
        .into_iter()
        .find(|chi| chi.is_odd(g) && chi.evaluate(x).is_zero())
        .map(|chi| describe_character(field, &chi))
}

/// `Θ_S^T(H/Q)(0)`, from the level-`f` value with Euler factors added for
/// `S` beyond the level primes, removed for level primes outside `S`, and
/// T-factors `1 − e_{I_v}φ_v^{-1}·ℓ` applied.
pub fn theta_for_field(spec: &AbelianFieldSpec, s: &BTreeSet<Place>, t: &BTreeSet<Place>) -> Result<LValue> {
    let field = AbelianField::new(spec)?;
    theta_on_field(&field, s, t)
}

pub fn theta_on_field(field: &AbelianField, s: &BTreeSet<Place>, t: &BTreeSet<Place>) -> Result<LValue> {
    if !s.contains(&Place::Infinite) {
        return Err(Error::Precondition("S must contain ∞".into()));
    }
    if t.contains(&Place::Infinite) {
        return Err(Error::Precondition("T must consist of finite primes".into()));
    }
    if let Some(v) = s.intersection(t).next() {
        return Err(Error::Precondition(format!("S and T share {v}")));
    }
    let level = level_places(field);
    let mut v = if level.is_subset(s) {
        let mut v = restricted_full_level(field)?;
        for l in primes_of(s) {
            if !level.contains(&Place::Prime(l)) {
                v = v * euler_factor(field, &field.place(l)?, &BigRational::one());
            }
        }
        v
    } else {
        let mut v = primitive_theta(field)?;
        for l in primes_of(s) {
            v = v * euler_factor(field, &field.place(l)?, &BigRational::one());
        }
        v
    };
    for l in primes_of(t) {
        let k = BigRational::from_integer(BigInt::from(l));
        v = v * euler_factor(field, &field.place(l)?, &k);
    }
    LValue::new(field, s, t, v)
}

/// `Σ_χ L(0, χ̄)·e_χ` over all characters, with primitive `L`-values.
///
/// The level-`d` value of `H ∩ Q(ζ_d)` is exact at characters of conductor
/// exactly `d`; the rational idempotent of those characters is
/// `Σ_{d'|d} μ(d/d')·e_{K_{d'}}` with `K_d` the image of `{a ≡ 1 mod d}`.
pub fn primitive_theta(field: &AbelianField) -> Result<GroupRingElement> {
    let f = field.conductor();
    let g = field.group();
    let divs = divisors(f);
    let kernels: Vec<Vec<usize>> = divs.iter().map(|&d| kernel_at_level(field, d)).collect();
    let mut out = vec![BigRational::zero(); g.order()];
    for &d in &divs {
        let y = level_value(field, d)?;
        for (j, &dp) in divs.iter().enumerate() {
            if d % dp != 0 {
                continue;
            }
            let mu = mobius(d / dp);
            if mu == 0 {
                continue;
            }
            let avg = average_over(g, &kernels[j], &y);
            for (o, a) in out.iter_mut().zip(avg) {
                if mu > 0 {
                    *o += a;
                } else {
                    *o -= a;
                }
            }
        }
    }
    GroupRingElement::from_coeffs(g, out)
}

/// `Σ_{a ∈ (Z/d)^×} (1/2 − a/d)·σ_{ã}^{-1}` for lifts `ã` of `a` to `(Z/f)^×`.
fn level_value(field: &AbelianField, d: u64) -> Result<Vec<BigRational>> {
    let f = field.conductor();
    let g = field.group();
    let mut y = vec![BigRational::zero(); g.order()];
    for a in 1..=d {
        if num_integer::Integer::gcd(&a, &d) != 1 {
            continue;
        }
        let lift = (0..f / d.max(1))
            .map(|k| a % f + k * d)
            .map(|x| if x == 0 { f } else { x })
            .find(|&x| num_integer::Integer::gcd(&x, &f) == 1)
            .ok_or_else(|| Error::Inconsistency(format!("no lift of {a} mod {d} to a unit mod {f}")))?;
        let idx = g.inv(field.sigma(lift as i64)?);
        y[idx] += rat(1, 2) - rat(a as i64, d as i64);
    }
    Ok(y)
}

/// Elements of `G` coming from residues `≡ 1 (mod d)`.
fn kernel_at_level(field: &AbelianField, d: u64) -> Vec<usize> {
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for a in field.units() {
        if a % d == 1 % d {
            seen.insert(field.sigma(a as i64).expect("unit"));
        }
    }
    seen.into_iter().collect()
}

/// `e_K·y` for the subgroup with elements `k`.
fn average_over(g: &crate::abelian::Group, k: &[usize], y: &[BigRational]) -> Vec<BigRational> {
    let mut coset = vec![usize::MAX; g.order()];
    let mut sums: Vec<BigRational> = Vec::new();
    for x in g.elements() {
        if coset[x] != usize::MAX {
            continue;
        }
        let id = sums.len();
        let mut s = BigRational::zero();
        for &h in k {
            let z = g.mul(x, h);
            coset[z] = id;
            s += &y[z];
        }
        sums.push(s / BigRational::from_integer(BigInt::from(k.len())));
    }
    coset.iter().map(|&c| sums[c].clone()).collect()
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    out.sort_unstable();
    out
}

fn mobius(n: u64) -> i32 {
    let mut sign = 1;
    for (_, e) in factorize(n) {
        if e > 1 {
            return 0;
        }
        sign = -sign;
    }
    sign
}

/// Divides a minus part by the Euler factor `1 − e_{I_ℓ}φ_ℓ^{-1}`, rejecting
/// with an odd character at which the factor vanishes.
pub fn remove_euler_factor(field: &AbelianField, x: &MinusRingElement, l: u64) -> Result<MinusRingElement> {
    let info = field.place(l)?;
    let e = euler_factor(field, &info, &BigRational::one());
    let inv = minus_project(&euler_inverse_candidate(field, &info))?;
    let em = minus_project(&e)?;
    if em.try_mul(&inv)? != MinusRingElement::one(em.basis()) {
        let who = killing_odd_character(field, &e).unwrap_or_else(|| "an odd character".into());
        return Err(Error::ZeroDivisor(format!("Euler factor at {l} vanishes at {who}")));
    }
    x.try_mul(&inv)
}

/// `Θ_{S,S'}^T = Θ_S^T·Π_{v∈S'}(1 − e_{I_v}(φ_v^{-1} − |I_v|))`.
pub fn theta_s_sprime(
    spec: &AbelianFieldSpec,
    s: &BTreeSet<Place>,
    s_prime: &BTreeSet<Place>,
    t: &BTreeSet<Place>,
) -> Result<LValue> {
    let field = AbelianField::new(spec)?;
    if s_prime.contains(&Place::Infinite) {
        return Err(Error::Precondition("S' must consist of finite primes".into()));
    }
    if let Some(v) = s_prime.intersection(s).chain(s_prime.intersection(t)).next() {
        return Err(Error::Precondition(format!("S' meets S ∪ T at {v}")));
    }
    let mut out = theta_on_field(&field, s, t)?;
    for l in primes_of(s_prime) {
        let info = field.place(l)?;
        let h = s_prime_factor(&field, &info);
        out.value = out.value * h;
    }
    out.minus = minus_project(&out.value)?;
    out.s_prime = s_prime.clone();
    Ok(out)
}

/// `h_v = 1 − e_{I_v}(φ_v^{-1} − |I_v|)`.
pub fn s_prime_factor(field: &AbelianField, info: &PlaceInfo) -> GroupRingElement {
    let g = field.group();
    let e = crate::group_ring::idempotent(&info.inertia);
    let phi_inv = GroupRingElement::basis(g, g.inv(info.frobenius));
    let order = GroupRingElement::scalar(g, BigRational::from_integer(BigInt::from(info.inertia.order())));
    GroupRingElement::one(g) - e * (phi_inv - order)
}

/// `μ(H)_p^T = 1`: no `ζ_p` in `H`, or some `v ∈ T` prime to `p`.
pub fn mu_pt_trivial(spec: &AbelianFieldSpec, p: u64, t: &BTreeSet<Place>) -> Result<bool> {
    let field = AbelianField::new(spec)?;
    Ok(mu_trivial_on(&field, p, t))
}

fn mu_trivial_on(field: &AbelianField, p: u64, t: &BTreeSet<Place>) -> bool {
    !field.contains_mu_p(p) || primes_of(t).iter().any(|&l| l != p)
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrityHypotheses {
    pub wild: Vec<u64>,
    pub wild_in_s_or_t: bool,
    pub wild_above_p_in_s: bool,
    pub mu_trivial: bool,
}

impl IntegrityHypotheses {
    pub fn hold(&self) -> bool {
        self.wild_in_s_or_t && self.wild_above_p_in_s && self.mu_trivial
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralityReport {
    pub conductor: u64,
    pub subgroup_gens: Vec<u64>,
    pub p: u64,
    #[serde(rename = "S")]
    pub s: Vec<String>,
    #[serde(rename = "T")]
    pub t: Vec<String>,
    pub hypotheses: IntegrityHypotheses,
    pub minus_denominator: String,
    /// `None` when the hypotheses fail and no verdict is owed.
    pub p_integral: Option<bool>,
}

/// Checks the integrality hypotheses and, when they hold, that the minus part
/// of `Θ_S^T` has denominators prime to `p`. A hypothesis-holds but
/// non-integral case is an [`Error::Inconsistency`].
pub fn integrality_scan(spec: &AbelianFieldSpec, p: u64, s: &BTreeSet<Place>, t: &BTreeSet<Place>) -> Result<IntegralityReport> {
    if p == 2 || !is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    let field = AbelianField::new(spec)?;
    let mut wild = Vec::new();
    for (l, _) in factorize(field.conductor()) {
        if field.place(l)?.inertia.order() % p as usize == 0 {
            wild.push(l);
        }
    }
    let in_s = |l: u64| s.contains(&Place::Prime(l));
    let in_t = |l: u64| t.contains(&Place::Prime(l));
    let hyp = IntegrityHypotheses {
        wild_in_s_or_t: wild.iter().all(|&l| in_s(l) || in_t(l)),
        wild_above_p_in_s: wild.iter().filter(|&&l| l == p).all(|&l| in_s(l)),
        mu_trivial: mu_trivial_on(&field, p, t),
        wild,
    };
    let theta = theta_on_field(&field, s, t)?;
    let den = theta.minus.denominator();
    let p_integral = if hyp.hold() {
        let ok = (&den % BigInt::from(p)) != BigInt::zero();
        if !ok {
            return Err(Error::Inconsistency(format!(
                "Θ_S^T minus part has denominator {den} divisible by {p} at conductor {} with hypotheses holding",
                field.conductor()
            )));
        }
        Some(true)
    } else {
        None
    };
    Ok(IntegralityReport {
        conductor: field.conductor(),
        subgroup_gens: field.spec().subgroup_gens.clone(),
        p,
        s: format_places(s),
        t: format_places(t),
        hypotheses: hyp,
        minus_denominator: den.to_string(),
        p_integral,
    })
}

/// Outcome counts of [`integrality_sweep`].
#[derive(Debug, Clone, Serialize)]
pub struct IntegralitySweep {
    pub max_conductor: u64,
    pub primes: Vec<u64>,
    pub fields: usize,
    pub configurations: usize,
    pub hypotheses_hold: usize,
    pub integral: usize,
    pub failures: Vec<String>,
}

impl IntegralitySweep {
    pub fn pass(&self) -> bool {
        self.failures.is_empty() && self.hypotheses_hold == self.integral
    }
}

/// `S` and `T` choices for one field and prime: `S = {∞} ∪ A` with `A` drawn
/// from the level primes, `p` and the least prime outside them, and `T` of
/// size at most two from the primes up to 13 outside `S`.
pub fn sweep_configurations(f: u64, p: u64) -> Vec<(BTreeSet<Place>, BTreeSet<Place>)> {
    let mut pool: BTreeSet<u64> = factorize(f).into_iter().map(|(l, _)| l).collect();
    pool.insert(p);
    let extra = (2..).find(|&q| is_prime(q) && !pool.contains(&q)).expect("infinitely many primes");
    pool.insert(extra);
    let pool: Vec<u64> = pool.into_iter().collect();
    let small: Vec<u64> = (2..=13).filter(|&q| is_prime(q)).collect();
    let mut out = Vec::new();
    for mask in 0..(1u32 << pool.len()) {
        let mut s: BTreeSet<Place> = BTreeSet::from([Place::Infinite]);
        for (i, &l) in pool.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s.insert(Place::Prime(l));
            }
        }
        let free: Vec<u64> = small.iter().copied().filter(|&q| !s.contains(&Place::Prime(q))).collect();
        out.push((s.clone(), BTreeSet::new()));
        for (i, &a) in free.iter().enumerate() {
            out.push((s.clone(), BTreeSet::from([Place::Prime(a)])));
            for &b in &free[i + 1..] {
                out.push((s.clone(), BTreeSet::from([Place::Prime(a), Place::Prime(b)])));
            }
        }
    }
    out
}

/// Runs [`integrality_scan`] over every CM subfield of `Q(ζ_f)`, `f ≤ max_conductor`,
/// for each prime and every configuration from [`sweep_configurations`].
pub fn integrality_sweep(max_conductor: u64, primes: &[u64]) -> Result<IntegralitySweep> {
    use rayon::prelude::*;
    let mut fields = Vec::new();
    for f in 3..=max_conductor {
        if f % 4 == 2 {
            continue;
        }
        fields.extend(cm_subfields(f)?);
    }
    let results: Vec<(usize, usize, usize, Vec<String>)> = fields
        .par_iter()
        .map(|spec| {
            let (mut n, mut hold, mut ok, mut bad) = (0, 0, 0, Vec::new());
            for &p in primes {
                for (s, t) in sweep_configurations(spec.conductor, p) {
                    n += 1;
                    match integrality_scan(spec, p, &s, &t) {
                        Ok(r) if r.hypotheses.hold() => {
                            hold += 1;
                            ok += usize::from(r.p_integral == Some(true));
                        }
                        Ok(_) => {}
                        Err(e) => {
                            if matches!(e, Error::Inconsistency(_)) {
                                hold += 1;
                            }
                            bad.push(format!(
                                "f={} K={:?} p={p} S={:?} T={:?}: {e}",
                                spec.conductor,
                                spec.subgroup_gens,
                                format_places(&s),
                                format_places(&t)
                            ))
                        }
                    }
                }
            }
            (n, hold, ok, bad)
        })
        .collect();
    let mut sweep = IntegralitySweep {
        max_conductor,
        primes: primes.to_vec(),
        fields: fields.len(),
        configurations: 0,
        hypotheses_hold: 0,
        integral: 0,
        failures: Vec::new(),
    };
    for (n, hold, ok, bad) in results {
        sweep.configurations += n;
        sweep.hypotheses_hold += hold;
        sweep.integral += ok;
        sweep.failures.extend(bad);
    }
    Ok(sweep)
}

/// The layer `H_n = H·B_n` of the cyclotomic `Z_p`-extension, inside
/// `Q(ζ_{f'·p^{max(k, n+1)}})` where `f = p^k f'`.
#[derive(Debug, Clone)]
pub struct Layer {
    pub n: usize,
    pub field: AbelianField,
}

pub fn layer_conductor(f: u64, p: u64, n: usize) -> u64 {
    let mut k = 0u32;
    let mut rest = f;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    rest * p.pow(k.max(n as u32 + 1))
}

/// The `n`-th layer: `K_n = {a : a mod f ∈ K, a^{p−1} ≡ 1 mod p^{n+1}}`.
/// Requires `H ∩ B_1 = Q`, so that `G_n ≅ G × Z/p^n` with order `|G|·p^n`.
pub fn layer_field(base: &AbelianField, p: u64, n: usize) -> Result<Layer> {
    if p == 2 || !is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    let f = base.conductor();
    let fn_ = layer_conductor(f, p, n);
    let pn1 = p.pow(n as u32 + 1);
    let gens: Vec<u64> = (1..fn_)
        .filter(|&a| num_integer::Integer::gcd(&a, &fn_) == 1)
        .filter(|&a| base.kernel().contains(&(a % f)) && field::mod_pow(a, p - 1, pn1) == 1)
        .filter(|&a| a != 1)
        .collect();
    let spec = AbelianFieldSpec::new(fn_, &minimal_generators(fn_, &gens));
    let field = AbelianField::new(&spec)?;
    let expected = base.group().order() * (p as usize).pow(n as u32);
    if field.group().order() != expected {
        return Err(Error::Precondition(format!(
            "H meets the cyclotomic Z_{p}-extension nontrivially (layer {n} has degree {} not {expected}); re-base H first",
            field.group().order()
        )));
    }
    Ok(Layer { n, field })
}

/// A small generating set of the subgroup of `(Z/m)^×` made of `elems ∪ {1}`.
fn minimal_generators(m: u64, elems: &[u64]) -> Vec<u64> {
    let mut span: BTreeSet<u64> = BTreeSet::from([1 % m]);
    let mut gens = Vec::new();
    for &e in elems {
        if span.contains(&e) {
            continue;
        }
        gens.push(e);
        let mut frontier: Vec<u64> = span.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = (x as u128 * g as u128 % m as u128) as u64;
                if span.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    gens
}

/// `π_n^{n+1}: G_{n+1} → G_n` by reducing residues.
pub fn layer_projection(upper: &AbelianField, lower: &AbelianField) -> Result<GroupHom> {
    let (fu, fl) = (upper.conductor(), lower.conductor());
    if fu % fl != 0 {
        return Err(Error::InvalidField(format!("{fl} does not divide {fu}")));
    }
    let mut map = vec![usize::MAX; upper.group().order()];
    for a in upper.units() {
        let s = upper.sigma(a as i64)?;
        let t = lower.sigma((a % fl) as i64)?;
        if map[s] != usize::MAX && map[s] != t {
            return Err(Error::Inconsistency("reduction is not constant on classes".into()));
        }
        map[s] = t;
    }
    let hom = GroupHom { source: upper.group().clone(), target: lower.group().clone(), map };
    if !hom.is_surjective() || !hom.is_homomorphism() {
        return Err(Error::Inconsistency("layer projection is not a surjective homomorphism".into()));
    }
    Ok(hom)
}

#[derive(Debug, Clone, Serialize)]
pub struct NormCompatibilityReport {
    pub p: u64,
    #[serde(rename = "S")]
    pub s: Vec<String>,
    #[serde(rename = "T")]
    pub t: Vec<String>,
    pub conductors: Vec<u64>,
    pub transitions: Vec<bool>,
    pub pass: bool,
}

/// Whether `π(upper) = lower` in `Q[G_n]`.
pub fn project_lvalue(pi: &GroupHom, upper: &LValue, lower: &LValue) -> Result<bool> {
    Ok(crate::group_ring::restriction(pi, &upper.value)? == lower.value)
}

/// Computes `Θ_S^T(H_n)` for `n ≤ n_max` and checks `π_n^{n+1}(Θ_{n+1}) = Θ_n`.
pub fn norm_compatibility_check(
    spec: &AbelianFieldSpec,
    p: u64,
    s: &BTreeSet<Place>,
    t: &BTreeSet<Place>,
    n_max: usize,
) -> Result<NormCompatibilityReport> {
    let base = AbelianField::new(spec)?;
    if !s.contains(&Place::Prime(p)) {
        return Err(Error::Precondition(format!("S must contain {p}")));
    }
    let layers: Vec<Layer> = (0..=n_max).map(|n| layer_field(&base, p, n)).collect::<Result<_>>()?;
    let thetas: Vec<LValue> = layers.iter().map(|l| theta_on_field(&l.field, s, t)).collect::<Result<_>>()?;
    let mut transitions = Vec::new();
    for n in 0..n_max {
        let pi = layer_projection(&layers[n + 1].field, &layers[n].field)?;
        transitions.push(project_lvalue(&pi, &thetas[n + 1], &thetas[n])?);
    }
    Ok(NormCompatibilityReport {
        p,
        s: format_places(s),
        t: format_places(t),
        conductors: layers.iter().map(|l| l.field.conductor()).collect(),
        pass: transitions.iter().all(|&b| b),
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn places(s: &str) -> BTreeSet<Place> {
        parse_places(s).unwrap()
    }

    fn coeff_map(l: &LValue) -> Vec<(String, String)> {
        l.to_json().coeffs.unwrap().0
    }

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn full_level_values() {
        assert_eq!(coeff_map(&theta_full_level(4).unwrap()), pairs(&[("sigma_1", "1/4"), ("sigma_3", "-1/4")]));
        assert_eq!(coeff_map(&theta_full_level(3).unwrap()), pairs(&[("sigma_1", "1/6"), ("sigma_2", "-1/6")]));
        assert_eq!(
            coeff_map(&theta_full_level(12).unwrap()),
            pairs(&[("sigma_1", "5/12"), ("sigma_5", "1/12"), ("sigma_7", "-1/12"), ("sigma_11", "-5/12")])
        );
        assert!(theta_full_level(2).is_err());
    }

    #[test]
    fn t_smoothing_q_i() {
        let v = theta_for_field(&AbelianFieldSpec::cyclotomic(4), &places("2,inf"), &places("5")).unwrap();
        assert_eq!(coeff_map(&v), pairs(&[("sigma_1", "-1"), ("sigma_3", "1")]));
        assert!(v.is_minus_pure());
    }

    #[test]
    fn two_routes_at_twelve() {
        let spec = AbelianFieldSpec::new(12, &[5]);
        let a = theta_for_field(&spec, &places("2,3,inf"), &BTreeSet::new()).unwrap();
        assert_eq!(coeff_map(&a), pairs(&[("sigma_1", "1/2"), ("sigma_7", "-1/2")]));
        let b = theta_for_field(&AbelianFieldSpec::cyclotomic(4), &places("2,3,inf"), &BTreeSet::new()).unwrap();
        assert_eq!(coeff_map(&b), pairs(&[("sigma_1", "1/2"), ("sigma_3", "-1/2")]));
    }

    #[test]
    fn s_prime_factor_example() {
        let v = theta_s_sprime(&AbelianFieldSpec::cyclotomic(4), &places("2,inf"), &places("3"), &places("5")).unwrap();
        assert_eq!(coeff_map(&v), pairs(&[("sigma_1", "-3"), ("sigma_3", "3")]));
        let same = theta_s_sprime(&AbelianFieldSpec::cyclotomic(4), &places("2,inf"), &BTreeSet::new(), &places("5")).unwrap();
        assert_eq!(coeff_map(&same), pairs(&[("sigma_1", "-1"), ("sigma_3", "1")]));
    }

    #[test]
    fn removal_via_primitive_values() {
        // Θ_{∞}^{5}(Q(i)) = (−1/2·e_G + 1/4 − c/4)(1 − 5) = 2c
        let qi = AbelianFieldSpec::cyclotomic(4);
        let v = theta_for_field(&qi, &places("inf"), &places("5")).unwrap();
        assert_eq!(coeff_map(&v), pairs(&[("sigma_1", "0"), ("sigma_3", "2")]));
        assert_eq!(v.minus.coeffs(), &[rat(-2, 1)]);
        let with_two = theta_for_field(&qi, &places("2,inf"), &places("5")).unwrap();
        let field = AbelianField::new(&qi).unwrap();
        assert_eq!(remove_euler_factor(&field, &with_two.minus, 2).unwrap(), v.minus);
    }

    #[test]
    fn removal_where_division_fails() {
        // Q(√−7) at level 28: χ(2) = 1, so the factor at 2 kills χ, yet L(0, χ) = 1
        let spec = AbelianFieldSpec::new(28, &[9, 15]);
        let field = AbelianField::new(&spec).unwrap();
        assert_eq!(field.group().order(), 2);
        let v = theta_for_field(&spec, &places("inf"), &BTreeSet::new()).unwrap();
        assert_eq!(v.minus.coeffs(), &[rat(1, 1)]);
        let full = theta_for_field(&spec, &places("2,7,inf"), &BTreeSet::new()).unwrap();
        assert!(full.minus.is_zero());
        assert!(matches!(remove_euler_factor(&field, &full.minus, 2), Err(Error::ZeroDivisor(_))));
        let at_seven = theta_for_field(&AbelianFieldSpec::cyclotomic(7), &places("7,inf"), &BTreeSet::new()).unwrap();
        assert_eq!(at_seven.minus.coeffs().len(), 3);
    }

    #[test]
    fn primitive_route_matches_level_route() {
        for f in [3u64, 4, 5, 7, 8, 9, 12, 15, 16, 20, 21] {
            let field = AbelianField::new(&AbelianFieldSpec::cyclotomic(f)).unwrap();
            let mut v = primitive_theta(&field).unwrap();
            for (l, _) in factorize(f) {
                v = v * euler_factor(&field, &field.place(l).unwrap(), &BigRational::one());
            }
            assert_eq!(v, restricted_full_level(&field).unwrap(), "conductor {f}");
        }
    }

    #[test]
    fn mu_examples() {
        let qi = AbelianFieldSpec::cyclotomic(4);
        let z3 = AbelianFieldSpec::cyclotomic(3);
        assert!(mu_pt_trivial(&qi, 3, &BTreeSet::new()).unwrap());
        assert!(mu_pt_trivial(&z3, 3, &places("5")).unwrap());
        assert!(!mu_pt_trivial(&z3, 3, &BTreeSet::new()).unwrap());
        assert!(!mu_pt_trivial(&z3, 3, &places("3")).unwrap());
    }

    #[test]
    fn integrality_examples() {
        let r = integrality_scan(&AbelianFieldSpec::cyclotomic(4), 3, &places("2,inf"), &places("5")).unwrap();
        assert_eq!(r.p_integral, Some(true));
        let r = integrality_scan(&AbelianFieldSpec::cyclotomic(3), 3, &places("3,inf"), &BTreeSet::new()).unwrap();
        assert!(!r.hypotheses.mu_trivial);
        assert_eq!(r.p_integral, None);
        assert_eq!(r.minus_denominator, "3");
        let r = integrality_scan(&AbelianFieldSpec::cyclotomic(3), 5, &places("3,inf"), &BTreeSet::new()).unwrap();
        assert_eq!(r.p_integral, Some(true));
        assert!(integrality_scan(&AbelianFieldSpec::cyclotomic(3), 2, &places("3,inf"), &BTreeSet::new()).is_err());
    }

    #[test]
    fn small_integrality_sweep() {
        let r = integrality_sweep(12, &[3, 5]).unwrap();
        assert!(r.pass(), "{:?}", r.failures);
        assert!(r.hypotheses_hold > 100);
    }

    #[test]
    fn norm_compatibility_examples() {
        let r = norm_compatibility_check(&AbelianFieldSpec::cyclotomic(4), 3, &places("2,3,inf"), &places("5"), 2).unwrap();
        assert_eq!(r.conductors, vec![12, 36, 108]);
        assert!(r.pass);
        let r = norm_compatibility_check(&AbelianFieldSpec::cyclotomic(3), 5, &places("3,5,inf"), &places("7"), 1).unwrap();
        assert_eq!(r.conductors, vec![15, 75]);
        assert!(r.pass);
        let r = norm_compatibility_check(&AbelianFieldSpec::cyclotomic(4), 3, &places("2,3,inf"), &places("5"), 0).unwrap();
        assert!(r.pass && r.transitions.is_empty());
    }

    #[test]
    fn json_round_trip() {
        let v = theta_for_field(&AbelianFieldSpec::cyclotomic(12), &places("2,3,inf"), &places("5")).unwrap();
        let text = serde_json::to_string(&v.to_json()).unwrap();
        assert_eq!(lvalue_from_json(&text).unwrap(), v.value);
        assert!(lvalue_from_json("{\"conductor\": 4, \"subgroup_gens\": [], \"coeffs\": {\"sigma_2\": \"1\"}}").is_err());
    }
}
