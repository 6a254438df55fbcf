//! Truncated cyclotomic `Z_p`-towers `H_0 ⊂ … ⊂ H_N`: per-place data with
//! coherent generator choices, the layer images of the limit ideals, and the
//! finite-layer checks behind their projective limits.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::abelian::{subgroup_from_generators, GroupHom, Subgroup};
use crate::error::{Error, Result};
use crate::group_ring::{orbit_representatives, MinusRingElement};
use crate::ideal::{ring, FractionalIdeal, GeneratorClass, Ring};
use crate::stickelberger::field::{crt_one_pair, mod_inv, mod_pow};
use crate::stickelberger::{
    format_places, is_prime, layer_field, layer_projection, mu_pt_trivial, parse_places, theta_on_field, AbelianField,
    AbelianFieldSpec, Place,
};

/// Largest top-layer group order a tower may reach.
pub const MAX_LAYER_ORDER: usize = 10_000;

/// Serialized tower request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerSpec {
    pub conductor: u64,
    #[serde(default)]
    pub subgroup_gens: Vec<u64>,
    pub p: u64,
    pub depth: usize,
    #[serde(rename = "S", default = "default_s")]
    pub s: Vec<String>,
    #[serde(rename = "T", default)]
    pub t: Vec<String>,
    #[serde(rename = "Sprime", default)]
    pub s_prime: Vec<String>,
}

fn default_s() -> Vec<String> {
    vec!["inf".into()]
}

impl TowerSpec {
    pub fn from_json(text: &str) -> Result<TowerSpec> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("tower spec: {e}")))
    }

    pub fn field_spec(&self) -> AbelianFieldSpec {
        AbelianFieldSpec::new(self.conductor, &self.subgroup_gens)
    }

    pub fn s_places(&self) -> Result<BTreeSet<Place>> {
        parse_places(&self.s.join(","))
    }

    pub fn t_places(&self) -> Result<BTreeSet<Place>> {
        parse_places(&self.t.join(","))
    }

    pub fn s_prime_places(&self) -> Result<BTreeSet<Place>> {
        parse_places(&self.s_prime.join(","))
    }
}

/// Data of a place at one layer.
#[derive(Debug, Clone)]
pub struct LayerPlace {
    pub decomposition: Subgroup,
    pub inertia: Subgroup,
    /// `σ_{v,n}`: the class of the residue `≡ ℓ` away from `ℓ`, `≡ 1` at `ℓ`.
    pub frobenius: usize,
    pub frobenius_residue: u64,
    pub frobenius_order: u64,
    /// Away from `p` the cyclic decomposition of `I_v`; above `p` the
    /// generators `g_1, …, g_{s−1}` of the torsion of inertia.
    pub finite_generators: Vec<usize>,
    /// `g_s^{(n)}` above `p`.
    pub ramified_generator: Option<usize>,
    /// Generators of `𝒢_{v,n}`, in the order finite part, `g_s^{(n)}`, `σ`.
    pub decomposition_generators: Vec<usize>,
    pub decomposition_names: Vec<String>,
    /// The image of `Tor(𝒢_v)`: `𝒢_{v,n}` meets the base copy of `G` in it.
    pub torsion: Subgroup,
    /// Generator of the `p`-Sylow subgroup of `𝒢_{v,n}`.
    pub pro_p_generator: usize,
}

#[derive(Debug, Clone)]
pub struct PlaceData {
    pub prime: u64,
    pub above_p: bool,
    pub layers: Vec<LayerPlace>,
    /// Away from `p`: `v_p(ℓ^{p−1} − 1)`. `σ_{v,n}` leaves the base copy of
    /// `G` exactly from this layer on, which certifies infinite order.
    pub escape_layer: Option<usize>,
    pub frobenius_infinite_order: bool,
}

impl PlaceData {
    pub fn label(&self) -> String {
        self.prime.to_string()
    }
}

/// `H_0 ⊂ … ⊂ H_N` with `𝒢 ≅ G × Γ` normalized so that `G_n ≅ G × Z/p^n`.
#[derive(Debug, Clone)]
pub struct Tower {
    pub base: AbelianField,
    pub p: u64,
    pub layers: Vec<AbelianField>,
    pub rings: Vec<Ring>,
    /// `projections[n] = π_n^{n+1}`.
    pub projections: Vec<GroupHom>,
    /// The copy of `G` in `G_n`: elements of order prime to `p`.
    pub base_parts: Vec<Subgroup>,
    pub places: Vec<PlaceData>,
}

/// Assumption on the sets: `S_∞ ⊆ S` and `T ∩ S_p = ∅`.
pub fn check_assumption(p: u64, s: &BTreeSet<Place>, t: &BTreeSet<Place>) -> Result<()> {
    if !s.contains(&Place::Infinite) {
        return Err(Error::Precondition("S must contain the infinite place".into()));
    }
    if t.contains(&Place::Prime(p)) {
        return Err(Error::Precondition(format!("T must avoid the primes above p = {p}")));
    }
    Ok(())
}

fn prime_power_part(f: u64, l: u64) -> u64 {
    let mut q = 1;
    while f.is_multiple_of(q * l) {
        q *= l;
    }
    q
}

/// The residue mod `f` that is `r` at `ℓ` and `1` elsewhere.
fn local_lift(f: u64, l: u64, r: u64) -> u64 {
    let q = prime_power_part(f, l);
    let rest = f / q;
    if q == 1 {
        1
    } else if rest == 1 {
        r % q
    } else {
        crt_one_pair(r % q, q, 1, rest)
    }
}

fn primitive_root(p: u64) -> u64 {
    let factors: Vec<u64> = crate::stickelberger::factorize(p - 1).into_iter().map(|(q, _)| q).collect();
    (2..p).find(|&g| factors.iter().all(|&q| mod_pow(g, (p - 1) / q, p) != 1)).unwrap_or(1)
}

/// `v_p(ℓ^{p−1} − 1)`.
fn unit_valuation(l: u64, p: u64) -> usize {
    let x = BigInt::from(l).pow(p as u32 - 1) - BigInt::one();
    let pb = BigInt::from(p);
    let mut k = 0;
    let mut y = x;
    while (&y % &pb).is_zero() {
        y /= &pb;
        k += 1;
    }
    k
}

fn cyclic(field: &AbelianField, x: usize) -> Subgroup {
    subgroup_from_generators(field.group(), &[x]).expect("element lies in the group")
}

fn same_subgroup(a: &Subgroup, b: &Subgroup) -> bool {
    a.elements() == b.elements()
}

/// The `p`-primary component of `x`.
fn p_component(field: &AbelianField, x: usize, p: u64) -> usize {
    let g = field.group();
    let mut r = g.element_order(x);
    let mut pp = 1u64;
    while r.is_multiple_of(p) {
        r /= p;
        pp *= p;
    }
    if pp == 1 {
        return 0;
    }
    // x^{r·u} with r·u ≡ 1 mod pp
    let u = mod_inv(r % pp, pp).expect("r is prime to p");
    g.pow(x, (r * u) as i64)
}

/// Builds the layers, transitions and the data of `places`, together with
/// every prime ramified in `H_∞/Q`.
pub fn derive_tower(spec: &AbelianFieldSpec, p: u64, depth: usize, places: &[u64]) -> Result<Tower> {
    if p == 2 || !is_prime(p) {
        return Err(Error::BadPrime(p));
    }
    let base = AbelianField::new(spec)?;
    let order = base.group().order();
    if (order as u64).is_multiple_of(p) {
        return Err(Error::Precondition(format!(
            "p = {p} divides |G| = {order}; the splitting G_n = G × Γ_n is only computed for p ∤ |G|"
        )));
    }
    let top = (p as usize).checked_pow(depth as u32).and_then(|x| x.checked_mul(order));
    if top.is_none_or(|x| x > MAX_LAYER_ORDER) {
        return Err(Error::CapExceeded(format!("layer {depth} would exceed order {MAX_LAYER_ORDER}")));
    }
    let layers: Vec<AbelianField> =
        (0..=depth).map(|n| layer_field(&base, p, n).map(|l| l.field)).collect::<Result<_>>()?;
    let rings: Vec<Ring> = layers.iter().map(|l| Ring::minus(l.group())).collect::<Result<_>>()?;
    let projections: Vec<GroupHom> =
        (0..depth).map(|n| layer_projection(&layers[n + 1], &layers[n])).collect::<Result<_>>()?;
    let base_parts: Vec<Subgroup> = layers
        .iter()
        .map(|l| {
            let g = l.group();
            let els: Vec<usize> = g.elements().filter(|&x| g.pow(x, order as i64) == 0).collect();
            subgroup_from_generators(g, &els)
        })
        .collect::<Result<_>>()?;
    for b in &base_parts {
        if b.order() != order {
            return Err(Error::Inconsistency("base copy of G has the wrong order".into()));
        }
    }
    let mut tower = Tower { base, p, layers, rings, projections, base_parts, places: Vec::new() };
    let mut primes: BTreeSet<u64> = places.iter().copied().collect();
    primes.extend(tower.ramified_primes()?);
    for l in primes {
        let data = tower.derive_place(l)?;
        tower.places.push(data);
    }
    Ok(tower)
}

impl Tower {
    pub fn from_spec(spec: &TowerSpec) -> Result<Tower> {
        let (s, t, sp) = (spec.s_places()?, spec.t_places()?, spec.s_prime_places()?);
        check_assumption(spec.p, &s, &t)?;
        let mut primes = Vec::new();
        for v in s.iter().chain(&t).chain(&sp) {
            if let Place::Prime(l) = v {
                primes.push(*l);
            }
        }
        derive_tower(&spec.field_spec(), spec.p, spec.depth, &primes)
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// `S_ram(H_∞/Q)`: the primes ramified in `H` together with `p`.
    pub fn ramified_primes(&self) -> Result<BTreeSet<u64>> {
        let mut out: BTreeSet<u64> = self.base.ramified_primes()?.into_iter().collect();
        out.insert(self.p);
        Ok(out)
    }

    pub fn place(&self, l: u64) -> Result<&PlaceData> {
        self.places
            .iter()
            .find(|d| d.prime == l)
            .ok_or_else(|| Error::Precondition(format!("place {l} was not derived for this tower")))
    }

    /// `π_m^n` for `m ≤ n`.
    pub fn projection(&self, n: usize, m: usize) -> GroupHom {
        let g = self.layers[n].group();
        let mut hom = GroupHom { source: g.clone(), target: g.clone(), map: g.elements().collect() };
        for k in (m..n).rev() {
            hom = hom.compose(&self.projections[k]);
        }
        hom
    }

    fn derive_place(&self, l: u64) -> Result<PlaceData> {
        let p = self.p;
        let above_p = l == p;
        let base_field = &self.layers[0];
        // residues at ℓ of the layer-0 cyclic decomposition of inertia
        let mut residues = Vec::new();
        if !above_p {
            let f0 = base_field.conductor();
            let q = prime_power_part(f0, l);
            let inertia = base_field.place(l)?.inertia;
            for g in inertia.cyclic_decomposition() {
                let r = (1..q.max(2))
                    .filter(|r| r % l != 0)
                    .find(|&r| base_field.sigma(local_lift(f0, l, r) as i64).ok() == Some(g))
                    .ok_or_else(|| Error::Inconsistency(format!("inertia generator at {l} has no local residue")))?;
                residues.push(r);
            }
        }
        let mut layers = Vec::new();
        for (n, field) in self.layers.iter().enumerate() {
            let f = field.conductor();
            let info = field.place(l)?;
            let frobenius_order = field.group().element_order(info.frobenius);
            let (finite_generators, ramified_generator) = if above_p {
                let q = prime_power_part(f, p);
                // Teichmüller lift ω(g) = g^{q/p} mod q
                let omega = mod_pow(primitive_root(p), q / p, q);
                let t = field.sigma(local_lift(f, p, omega) as i64)?;
                let y = field.sigma(local_lift(f, p, 1 + p) as i64)?;
                (if t == 0 { vec![] } else { vec![t] }, Some(y))
            } else {
                let gens = residues.iter().map(|&r| field.sigma(local_lift(f, l, r) as i64)).collect::<Result<Vec<_>>>()?;
                (gens, None)
            };
            // the chosen generators decompose inertia as an internal direct product
            let mut igens = finite_generators.clone();
            igens.extend(ramified_generator);
            let span = subgroup_from_generators(field.group(), &igens)?;
            let prod: u64 = igens.iter().map(|&x| field.group().element_order(x)).product();
            if !same_subgroup(&span, &info.inertia) || prod as usize != info.inertia.order() {
                return Err(Error::Inconsistency(format!("inertia generators at {l} fail at layer {n}")));
            }
            let mut dgens = igens.clone();
            dgens.push(info.frobenius);
            let mut names: Vec<String> = (1..=finite_generators.len()).map(|i| format!("g_{i}")).collect();
            if ramified_generator.is_some() {
                names.push(format!("g_{}", finite_generators.len() + 1));
            }
            names.push(format!("sigma_{l}"));
            if !same_subgroup(&subgroup_from_generators(field.group(), &dgens)?, &info.decomposition) {
                return Err(Error::Inconsistency(format!("decomposition generators at {l} fail at layer {n}")));
            }
            let base_part = &self.base_parts[n];
            let tor: Vec<usize> = info.decomposition.elements().iter().copied().filter(|&x| base_part.contains(x)).collect();
            let torsion = subgroup_from_generators(field.group(), &tor)?;
            let pro_p_generator = match ramified_generator {
                Some(y) => y,
                None => p_component(field, info.frobenius, p),
            };
            let pro = cyclic(field, pro_p_generator);
            if torsion.order() * pro.order() != info.decomposition.order() {
                return Err(Error::Inconsistency(format!("decomposition group at {l} does not split at layer {n}")));
            }
            layers.push(LayerPlace {
                decomposition: info.decomposition,
                inertia: info.inertia,
                frobenius: info.frobenius,
                frobenius_residue: info.frobenius_residue,
                frobenius_order,
                finite_generators,
                ramified_generator,
                decomposition_generators: dgens,
                decomposition_names: names,
                torsion,
                pro_p_generator,
            });
        }
        // coherence under π_n^{n+1}
        for n in 0..self.depth() {
            let pi = &self.projections[n];
            let (up, lo) = (&layers[n + 1], &layers[n]);
            let ok = pi.apply(up.frobenius) == lo.frobenius
                && up.decomposition_generators.iter().map(|&x| pi.apply(x)).eq(lo.decomposition_generators.iter().copied())
                && same_subgroup(&pi.image(&up.inertia), &lo.inertia)
                && same_subgroup(&pi.image(&up.decomposition), &lo.decomposition)
                && up.torsion.order() == lo.torsion.order();
            if !ok {
                return Err(Error::Inconsistency(format!("place {l} is not coherent between layers {n} and {}", n + 1)));
            }
            if !above_p && up.inertia.order() != lo.inertia.order() {
                return Err(Error::Inconsistency(format!("inertia at {l} grows in the tower")));
            }
        }
        let (escape_layer, infinite) = if above_p {
            (None, false)
        } else {
            let a = unit_valuation(l, p);
            for (n, lp) in layers.iter().enumerate() {
                let escaped = !self.base_parts[n].contains(lp.frobenius);
                let expected = layers[0].frobenius_order * p.pow((n + 1).saturating_sub(a) as u32);
                if escaped != (n >= a) || lp.frobenius_order != expected {
                    return Err(Error::Inconsistency(format!(
                        "Frobenius at {l} has order {} at layer {n}, expected {expected}",
                        lp.frobenius_order
                    )));
                }
            }
            (Some(a), true)
        };
        Ok(PlaceData { prime: l, above_p, layers, escape_layer, frobenius_infinite_order: infinite })
    }

    /// First layer `n_0` from which every `H_{n+1}/H_n` is totally ramified
    /// above `p` and the primes of `T` are inert.
    pub fn alignment_layer(&self, t: &BTreeSet<Place>) -> Result<usize> {
        let p = self.p as usize;
        let mut watch = vec![(self.place(self.p)?, true)];
        for v in t {
            if let Place::Prime(l) = v {
                watch.push((self.place(*l)?, false));
            }
        }
        let good = |n: usize| {
            watch.iter().all(|(d, ram)| {
                let (a, b) = (&d.layers[n], &d.layers[n + 1]);
                if *ram {
                    b.inertia.order() == p * a.inertia.order()
                } else {
                    b.decomposition.order() == p * a.decomposition.order() && b.inertia.order() == a.inertia.order()
                }
            })
        };
        let mut n0 = self.depth();
        while n0 > 0 && good(n0 - 1) {
            n0 -= 1;
        }
        Ok(n0)
    }
}

/// A layer ideal with its generator origins and the expected behaviour
/// of each generator under the transition into the layer below.
#[derive(Debug, Clone)]
pub struct LayerIdeal {
    pub n: usize,
    pub ideal: FractionalIdeal,
    pub labels: Vec<String>,
    pub classes: Vec<GeneratorClass>,
}

fn combine(a: GeneratorClass, b: GeneratorClass) -> GeneratorClass {
    use GeneratorClass::*;
    match (a, b) {
        (Good, x) | (x, Good) => x,
        _ => Unaligned,
    }
}

impl LayerIdeal {
    pub fn from_parts(n: usize, ring: &Ring, parts: Vec<(String, Vec<BigRational>, GeneratorClass)>) -> Result<Self> {
        let mut labels = Vec::new();
        let mut classes = Vec::new();
        let mut gens = Vec::new();
        for (l, g, c) in parts {
            labels.push(l);
            gens.push(g);
            classes.push(c);
        }
        Ok(LayerIdeal { n, ideal: FractionalIdeal::from_generators(ring, gens)?, labels, classes })
    }

    pub fn unit(n: usize, ring: &Ring) -> Self {
        LayerIdeal { n, ideal: FractionalIdeal::unit(ring), labels: vec!["1".into()], classes: vec![GeneratorClass::Good] }
    }

    pub fn ring(&self) -> &Ring {
        self.ideal.ring()
    }

    /// Product with all pairwise generator products kept in order.
    pub fn product(&self, other: &LayerIdeal) -> Result<LayerIdeal> {
        let ring = self.ring();
        let mut parts = Vec::new();
        for ((a, la), ca) in self.ideal.generators().iter().zip(&self.labels).zip(&self.classes) {
            for ((b, lb), cb) in other.ideal.generators().iter().zip(&other.labels).zip(&other.classes) {
                let label = match (la.as_str(), lb.as_str()) {
                    ("1", x) | (x, "1") => x.to_string(),
                    _ => format!("{la}·{lb}"),
                };
                parts.push((label, ring.mul(a, b), combine(*ca, *cb)));
            }
        }
        LayerIdeal::from_parts(self.n, ring, parts)
    }

    /// Odd characters (orbit representatives) at which every generator
    /// vanishes; empty exactly when the rationalization is the whole algebra.
    pub fn rationalization_defects(&self) -> Result<Vec<String>> {
        let b = match self.ring() {
            Ring::Minus(b) => b.clone(),
            Ring::Full(_) => return Err(Error::RingMismatch("minus ring expected".into())),
        };
        let g = b.group();
        let gens: Vec<MinusRingElement> = self
            .ideal
            .generators()
            .iter()
            .map(|v| MinusRingElement::from_coeffs(&b, v.clone()))
            .collect::<Result<_>>()?;
        let mut out = Vec::new();
        for chi in orbit_representatives(g) {
            if chi.is_odd(g) && gens.iter().all(|x| chi.evaluate_minus(x).is_zero()) {
                out.push(format!("{:?}", chi.label));
            }
        }
        Ok(out)
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if k > n {
        return vec![];
    }
    let mut out = Vec::new();
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out.extend(subsets(n - 1, k));
    out.iter_mut().for_each(|s| s.sort_unstable());
    out.sort();
    out
}

/// Multisets of size `k` from `0..n`, as sorted index lists.
fn multisets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = Vec::new();
        for s in &out {
            let lo = s.last().copied().unwrap_or(0);
            for j in lo..n {
                let mut t = s.clone();
                t.push(j);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn norm_of(tower: &Tower, n: usize, x: usize) -> Vec<BigRational> {
    tower.rings[n].norm(cyclic(&tower.layers[n], x).elements())
}

/// `1 − e_{I_v} σ_v^{−1}` at layer `n`.
fn euler_generator(tower: &Tower, n: usize, lp: &LayerPlace) -> Vec<BigRational> {
    let ring = &tower.rings[n];
    let g = tower.layers[n].group();
    let e = ring.idempotent(lp.inertia.elements());
    ring::sub(&ring.one(), &ring.mul(&e, &ring.group_element(g.inv(lp.frobenius))))
}

/// Layer-`n` image of `J̃_v^∞ = Σ_i Z̃_{i,v} Δ𝒢_v` for `v | p`.
pub fn tilde_j_infinity(tower: &Tower, l: u64, n: usize) -> Result<LayerIdeal> {
    let pd = tower.place(l)?;
    if !pd.above_p {
        return Err(Error::Precondition(format!("{l} is prime to p; use J_v^∞")));
    }
    let lp = &pd.layers[n];
    let ring = &tower.rings[n];
    let fin = &lp.finite_generators;
    let s = fin.len() + 1;
    let mut parts = Vec::new();
    for i in 1..=s {
        for sub in subsets(fin.len(), s - i) {
            let mut z = ring.one();
            let mut zl = Vec::new();
            for &j in &sub {
                z = ring.mul(&z, &norm_of(tower, n, fin[j]));
                zl.push(format!("N<g_{}>", j + 1));
            }
            for (d, name) in lp.decomposition_generators.iter().zip(&lp.decomposition_names) {
                let mut label = zl.clone();
                label.push(format!("({name}-1)"));
                parts.push((label.join("·"), ring.mul(&z, &ring.minus_one(*d)), GeneratorClass::Good));
            }
        }
    }
    LayerIdeal::from_parts(n, ring, parts)
}

/// Layer-`n` image of `J_v^∞ = Σ_i Z_{i,v} Δ𝒢_v^{i−1}` for `v ∤ p`.
pub fn j_infinity(tower: &Tower, l: u64, n: usize) -> Result<LayerIdeal> {
    let pd = tower.place(l)?;
    if pd.above_p {
        return Err(Error::Precondition(format!("{l} lies above p; use J̃_v^∞")));
    }
    let lp = &pd.layers[n];
    let ring = &tower.rings[n];
    let fin = &lp.finite_generators;
    let s = fin.len();
    if s == 0 {
        return Ok(LayerIdeal::unit(n, ring));
    }
    let dg = &lp.decomposition_generators;
    let mut parts = Vec::new();
    for i in 1..=s {
        for sub in subsets(s, s - i) {
            let mut z = ring.one();
            let mut zl = Vec::new();
            for &j in &sub {
                z = ring.mul(&z, &norm_of(tower, n, fin[j]));
                zl.push(format!("N<g_{}>", j + 1));
            }
            for ms in multisets(dg.len(), i - 1) {
                let mut x = z.clone();
                let mut label = zl.clone();
                for &j in &ms {
                    x = ring.mul(&x, &ring.minus_one(dg[j]));
                    label.push(format!("({}-1)", lp.decomposition_names[j]));
                }
                let label = if label.is_empty() { "1".to_string() } else { label.join("·") };
                parts.push((label, x, GeneratorClass::Good));
            }
        }
    }
    LayerIdeal::from_parts(n, ring, parts)
}

/// Layer-`n` image of `Q_v = (N(I_v), (1 − e_{I_v}σ_v^{−1}) J_v^∞)` for `v ∤ p`.
pub fn q_v_ideal(tower: &Tower, l: u64, n: usize) -> Result<LayerIdeal> {
    let j = j_infinity(tower, l, n)?;
    let lp = &tower.place(l)?.layers[n];
    let ring = &tower.rings[n];
    let u = euler_generator(tower, n, lp);
    let mut parts = vec![("N(I_v)".to_string(), ring.norm(lp.inertia.elements()), GeneratorClass::Good)];
    for ((x, lab), c) in j.ideal.generators().iter().zip(&j.labels).zip(&j.classes) {
        let label = if lab == "1" { "(1-e_I sigma^-1)".to_string() } else { format!("(1-e_I sigma^-1)·{lab}") };
        parts.push((label, ring.mul(&u, x), *c));
    }
    LayerIdeal::from_parts(n, ring, parts)
}

/// `N(A)·ΔB^{−1}` terms of `R_v`, which have no finite-layer value.
#[derive(Debug, Clone, Serialize)]
pub struct SymbolicTerm {
    pub a_order: usize,
    pub numerator: String,
    pub denominator: String,
}

#[derive(Debug, Clone)]
pub struct RIdeal {
    pub place: u64,
    pub decompositions: usize,
    /// Generators `N(A)·ΔB^{r_B−2}` with `r_B ≥ 2`.
    pub honest: LayerIdeal,
    pub symbolic: Vec<SymbolicTerm>,
}

impl RIdeal {
    /// The layer ideal, when no term needs `ΔB^{−1}`.
    pub fn evaluate(&self) -> Result<&LayerIdeal> {
        if self.symbolic.is_empty() {
            Ok(&self.honest)
        } else {
            Err(Error::Symbolic(format!(
                "R_{} has {} term(s) N(A)·ΔB^(-1) with B topologically cyclic",
                self.place,
                self.symbolic.len()
            )))
        }
    }
}

fn subgroups_within(field: &AbelianField, h: &Subgroup) -> Result<Vec<Subgroup>> {
    let g = field.group();
    let mut found: Vec<Subgroup> = vec![Subgroup::trivial(g)];
    let mut i = 0;
    while i < found.len() {
        for &x in h.elements() {
            if found[i].contains(x) {
                continue;
            }
            let mut gens = found[i].generators().to_vec();
            gens.push(x);
            let s = subgroup_from_generators(g, &gens)?;
            if !found.iter().any(|t| same_subgroup(t, &s)) {
                found.push(s);
            }
        }
        i += 1;
    }
    found.sort_by(|a, b| (a.order(), a.elements()).cmp(&(b.order(), b.elements())));
    Ok(found)
}

/// `log_q |C / C^q|`.
fn rank_at(field: &AbelianField, c: &Subgroup, q: u64) -> Result<usize> {
    let g = field.group();
    let powers: Vec<usize> = c.generators().iter().map(|&x| g.pow(x, q as i64)).collect();
    let cq = subgroup_from_generators(g, &powers)?;
    let mut idx = c.order() / cq.order();
    let mut r = 0;
    while idx > 1 {
        idx /= q as usize;
        r += 1;
    }
    Ok(r)
}

/// Layer-`n` image of `R_v = (N(A)ΔB^{r_B−2} | 𝒢_v = A × B, A finite)`.
///
/// With `F = Tor(𝒢_v)` and `P` its `p`-Sylow complement, the decompositions
/// are `A × (C × P)` for `F = A × C`, and
/// `r_B = max(max_{q≠p} rank_q C, rank_p C + 1)`.
pub fn r_v_ideal(tower: &Tower, l: u64, n: usize) -> Result<RIdeal> {
    let lp = &tower.place(l)?.layers[n];
    let field = &tower.layers[n];
    let ring = &tower.rings[n];
    let p = tower.p;
    let f = &lp.torsion;
    let subs = subgroups_within(field, f)?;
    let primes: Vec<u64> = crate::stickelberger::factorize(f.order().max(1) as u64).into_iter().map(|(q, _)| q).collect();
    let mut parts = Vec::new();
    let mut symbolic = Vec::new();
    let mut decompositions = 0;
    for a in &subs {
        for c in &subs {
            if a.order() * c.order() != f.order() || a.elements().iter().any(|&x| x != 0 && c.contains(x)) {
                continue;
            }
            decompositions += 1;
            let mut r_b = rank_at(field, c, p)? + 1;
            for &q in primes.iter().filter(|&&q| q != p) {
                r_b = r_b.max(rank_at(field, c, q)?);
            }
            let na = ring.norm(a.elements());
            let mut bgens = c.generators().to_vec();
            bgens.push(lp.pro_p_generator);
            if r_b == 1 {
                let g = field.group();
                let b = bgens.iter().fold(0usize, |acc, &x| g.mul(acc, x));
                symbolic.push(SymbolicTerm {
                    a_order: a.order(),
                    numerator: ring.format(&na),
                    denominator: ring.format(&ring.minus_one(b)),
                });
                continue;
            }
            for ms in multisets(bgens.len(), r_b - 2) {
                let mut x = na.clone();
                for &j in &ms {
                    x = ring.mul(&x, &ring.minus_one(bgens[j]));
                }
                parts.push((format!("N(A:{})·ΔB^{}", a.order(), r_b - 2), x, GeneratorClass::Good));
            }
        }
    }
    let honest = LayerIdeal::from_parts(n, ring, parts)?;
    Ok(RIdeal { place: l, decompositions, honest, symbolic })
}

fn theta_ideal(tower: &Tower, n: usize, s: &BTreeSet<Place>, t: &BTreeSet<Place>, label: &str) -> Result<LayerIdeal> {
    let th = theta_on_field(&tower.layers[n], s, t)?;
    let ring = &tower.rings[n];
    LayerIdeal::from_parts(n, ring, vec![(label.to_string(), ring.embed_minus(&th.minus)?, GeneratorClass::Good)])
}

/// Kurihara's ideal `(Θ_{S_∞}^T)·Π_{v∈S_ram∖T} (N(I_v), 1 − e_{I_v}σ_v^{−1})`
/// for one field.
pub fn kurihara_rhs(field: &AbelianField, p: u64, t: &BTreeSet<Place>) -> Result<LayerIdeal> {
    if !mu_pt_trivial(field.spec(), p, t)? {
        return Err(Error::Precondition(format!("μ(H)_{p}^T is not trivial")));
    }
    if t.contains(&Place::Prime(p)) && (field.place(p)?.inertia.order() as u64).is_multiple_of(p) {
        return Err(Error::Precondition(format!("T contains the wildly ramified prime {p}")));
    }
    let ring = Ring::minus(field.group())?;
    let th = theta_on_field(field, &BTreeSet::from([Place::Infinite]), t)?;
    let mut out =
        LayerIdeal::from_parts(0, &ring, vec![("Theta".into(), ring.embed_minus(&th.minus)?, GeneratorClass::Good)])?;
    for l in field.ramified_primes()? {
        if t.contains(&Place::Prime(l)) {
            continue;
        }
        let info = field.place(l)?;
        let e = ring.idempotent(info.inertia.elements());
        let u = ring::sub(&ring.one(), &ring.mul(&e, &ring.group_element(field.group().inv(info.frobenius))));
        let factor = LayerIdeal::from_parts(
            0,
            &ring,
            vec![
                (format!("N(I_{l})"), ring.norm(info.inertia.elements()), GeneratorClass::Good),
                (format!("(1-e_I sigma_{l}^-1)"), u, GeneratorClass::Good),
            ],
        )?;
        out = out.product(&factor)?;
    }
    Ok(out)
}

fn kurihara_factor(tower: &Tower, l: u64, n: usize) -> Result<LayerIdeal> {
    let pd = tower.place(l)?;
    let lp = &pd.layers[n];
    let ring = &tower.rings[n];
    let norm_class = if pd.above_p { GeneratorClass::Bad } else { GeneratorClass::Good };
    LayerIdeal::from_parts(
        n,
        ring,
        vec![
            (format!("N(I_{l})"), ring.norm(lp.inertia.elements()), norm_class),
            (format!("(1-e_I sigma_{l}^-1)"), euler_generator(tower, n, lp), GeneratorClass::Good),
        ],
    )
}

/// Kurihara's ideal at layer `n`, with the factors running over
/// `S_ram(H_∞)∖T` (a factor is `(1)` where `v` is unramified in `H_n`).
pub fn kurihara_layer(tower: &Tower, t: &BTreeSet<Place>, n: usize) -> Result<LayerIdeal> {
    if !mu_pt_trivial(tower.layers[n].spec(), tower.p, t)? {
        return Err(Error::Precondition(format!("μ(H_{n})_{}^T is not trivial", tower.p)));
    }
    let mut out = theta_ideal(tower, n, &BTreeSet::from([Place::Infinite]), t, "Theta")?;
    for l in tower.ramified_primes()? {
        if !t.contains(&Place::Prime(l)) {
            out = out.product(&kurihara_factor(tower, l, n)?)?;
        }
    }
    Ok(out)
}

/// The limit form: `Θ_{S_∞∪S_p}^T · Π_{v∈S_ram∖(T∪S_p)} (N(I_v), 1 − e_{I_v}σ_v^{−1})`.
pub fn kurihara_limit_layer(tower: &Tower, t: &BTreeSet<Place>, n: usize) -> Result<LayerIdeal> {
    let p = tower.p;
    check_assumption(p, &BTreeSet::from([Place::Infinite]), t)?;
    let s = BTreeSet::from([Place::Infinite, Place::Prime(p)]);
    let mut out = theta_ideal(tower, n, &s, t, "Theta_p")?;
    for l in tower.ramified_primes()? {
        if l != p && !t.contains(&Place::Prime(l)) {
            out = out.product(&kurihara_factor(tower, l, n)?)?;
        }
    }
    Ok(out)
}

/// Layer-`n` right-hand side
/// `Θ_{(S∩S_ram)∪S_p∪S_∞}^T · Π Q_v · Π_{v∈S_p∖S} J̃_v^∞ · Π_{v∈S∩S_ram} R_v`.
pub fn main_rhs(tower: &Tower, s: &BTreeSet<Place>, t: &BTreeSet<Place>, n: usize) -> Result<LayerIdeal> {
    let p = tower.p;
    if t.is_empty() {
        return Err(Error::Precondition("T is always assumed to be nonempty".into()));
    }
    check_assumption(p, s, t)?;
    let ram = tower.ramified_primes()?;
    let in_s = |l: u64| s.contains(&Place::Prime(l));
    let in_t = |l: u64| t.contains(&Place::Prime(l));
    let mut theta_set: BTreeSet<Place> = BTreeSet::from([Place::Infinite, Place::Prime(p)]);
    theta_set.extend(ram.iter().filter(|&&l| in_s(l)).map(|&l| Place::Prime(l)));
    let mut out = theta_ideal(tower, n, &theta_set, t, "Theta")?;
    for &l in &ram {
        let factor = if l == p {
            if in_s(l) {
                r_v_ideal(tower, l, n)?.evaluate()?.clone()
            } else {
                tilde_j_infinity(tower, l, n)?
            }
        } else if in_s(l) {
            r_v_ideal(tower, l, n)?.evaluate()?.clone()
        } else if in_t(l) {
            continue;
        } else {
            q_v_ideal(tower, l, n)?
        };
        let factor = LayerIdeal {
            labels: factor.labels.iter().map(|x| if x == "1" { x.clone() } else { format!("[{l}]{x}") }).collect(),
            ..factor
        };
        out = out.product(&factor)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayCheck {
    pub from: usize,
    pub to: usize,
    pub exact: bool,
    pub limit_agreement: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub family: String,
    pub n0: usize,
    pub depth: usize,
    pub generators: usize,
    pub good: usize,
    pub bad: usize,
    pub containment: Vec<bool>,
    pub decay: Vec<DecayCheck>,
    pub pass: bool,
}

/// Checks a family `I_0, …, I_N` of layer ideals for `n ≥ n0`:
/// each observed generator class matches the expected one (a mismatch is an
/// error), `π(I_{n+1}) ⊆ I_n`, every generator descends from layer `n` to
/// layer `m` multiplied by `p^{#bad steps}`, and
/// `π_m^n(I_n) = (good_m) + p^{n−m}(bad_m)`.
pub fn limit_stability(tower: &Tower, name: &str, family: &[LayerIdeal], n0: usize) -> Result<StabilityReport> {
    let p = tower.p;
    let depth = family.len().saturating_sub(1);
    let k = family.first().map_or(0, |f| f.labels.len());
    if family.iter().any(|f| f.labels.len() != k) {
        return Err(Error::Inconsistency(format!("{name}: generator lists change length along the tower")));
    }
    let mut containment = Vec::new();
    for n in n0..depth {
        let ti = family[n + 1].ideal.transition_image(&tower.projections[n], Some(&family[n].ideal), p)?;
        for (i, (&obs, &exp)) in ti.classes.iter().zip(&family[n + 1].classes).enumerate() {
            // a vanishing generator is both good and bad
            let vanishes = ring::is_zero(&family[n].ideal.generators()[i]) && obs == GeneratorClass::Good;
            if exp != GeneratorClass::Unaligned && obs != exp && !vanishes {
                return Err(Error::Inconsistency(format!(
                    "{name}: generator {} expected {exp:?} but is {obs:?} under π_{n}^{}",
                    family[n + 1].labels[i],
                    n + 1
                )));
            }
        }
        containment.push(ti.image.p_local_contained_in(&family[n].ideal, p)?);
    }
    let mut decay = Vec::new();
    for m in n0..depth {
        for n in m + 1..=depth {
            let pi = tower.projection(n, m);
            let (src, dst) = (&family[n], &family[m]);
            let target = dst.ring();
            let mut exact = true;
            let mut scaled = Vec::new();
            for i in 0..k {
                let bad_steps = (m + 1..=n).filter(|&j| family[j].classes[i] == GeneratorClass::Bad).count();
                let factor = BigRational::from_integer(BigInt::from(p).pow(bad_steps as u32));
                let want = ring::scale(&dst.ideal.generators()[i], &factor);
                if family[m + 1..=n].iter().any(|f| f.classes[i] == GeneratorClass::Unaligned) {
                    scaled.push(src.ring().map_element(&pi, target, &src.ideal.generators()[i]));
                    continue;
                }
                let got = src.ring().map_element(&pi, target, &src.ideal.generators()[i]);
                exact &= got == want;
                scaled.push(want);
            }
            let image = src.ideal.transition_image(&pi, None, p)?.image;
            let expected = FractionalIdeal::from_generators(target, scaled)?;
            let limit_agreement = image.p_local_equal(&expected, p)?;
            decay.push(DecayCheck { from: n, to: m, exact, limit_agreement });
        }
    }
    let last = family.last();
    let good = last.map_or(0, |f| f.classes.iter().filter(|&&c| c == GeneratorClass::Good).count());
    let bad = last.map_or(0, |f| f.classes.iter().filter(|&&c| c == GeneratorClass::Bad).count());
    let pass = containment.iter().all(|&b| b) && decay.iter().all(|d| d.exact && d.limit_agreement);
    Ok(StabilityReport { family: name.to_string(), n0, depth, generators: k, good, bad, containment, decay, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct PlaceSummary {
    pub prime: u64,
    pub above_p: bool,
    pub inertia_orders: Vec<usize>,
    pub decomposition_orders: Vec<usize>,
    pub frobenius_orders: Vec<u64>,
    pub frobenius_residues: Vec<u64>,
    pub escape_layer: Option<usize>,
    pub frobenius_infinite_order: bool,
}

impl PlaceData {
    pub fn summary(&self) -> PlaceSummary {
        PlaceSummary {
            prime: self.prime,
            above_p: self.above_p,
            inertia_orders: self.layers.iter().map(|l| l.inertia.order()).collect(),
            decomposition_orders: self.layers.iter().map(|l| l.decomposition.order()).collect(),
            frobenius_orders: self.layers.iter().map(|l| l.frobenius_order).collect(),
            frobenius_residues: self.layers.iter().map(|l| l.frobenius_residue).collect(),
            escape_layer: self.escape_layer,
            frobenius_infinite_order: self.frobenius_infinite_order,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RationalizationCheck {
    pub family: String,
    pub layer: usize,
    pub defects: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerReport {
    pub conductor: u64,
    pub subgroup_gens: Vec<u64>,
    pub p: u64,
    pub depth: usize,
    #[serde(rename = "S")]
    pub s: Vec<String>,
    #[serde(rename = "T")]
    pub t: Vec<String>,
    pub layer_conductors: Vec<u64>,
    pub layer_orders: Vec<usize>,
    pub n0: usize,
    pub places: Vec<PlaceSummary>,
    pub families: Vec<StabilityReport>,
    pub rationalization: Vec<RationalizationCheck>,
    /// Generator labels of the assembled right-hand side at the top layer.
    pub main_rhs_generators: Vec<String>,
    pub pass: bool,
}

/// Every tracked family along the tower: `Θ`, `Q_v`, `J̃_v^∞`, both forms of
/// Kurihara's ideal and the assembled right-hand side, with stability and
/// characterwise rationalization checks.
pub fn tower_report(tower: &Tower, s: &BTreeSet<Place>, t: &BTreeSet<Place>) -> Result<TowerReport> {
    let p = tower.p;
    check_assumption(p, s, t)?;
    let n0 = tower.alignment_layer(t)?;
    let layers = 0..=tower.depth();
    let ram = tower.ramified_primes()?;
    let theta_set = BTreeSet::from([Place::Infinite, Place::Prime(p)]);
    let mut families: Vec<(String, Vec<LayerIdeal>, bool)> = Vec::new();
    families.push((
        "Theta_{S_inf ∪ S_p}^T".into(),
        layers.clone().map(|n| theta_ideal(tower, n, &theta_set, t, "Theta")).collect::<Result<_>>()?,
        false,
    ));
    for &l in &ram {
        if l == p {
            families.push((
                format!("J~_{l}"),
                layers.clone().map(|n| tilde_j_infinity(tower, l, n)).collect::<Result<_>>()?,
                true,
            ));
        } else if !t.contains(&Place::Prime(l)) {
            families.push((format!("Q_{l}"), layers.clone().map(|n| q_v_ideal(tower, l, n)).collect::<Result<_>>()?, true));
        }
    }
    families.push(("kurihara".into(), layers.clone().map(|n| kurihara_layer(tower, t, n)).collect::<Result<_>>()?, false));
    families.push((
        "kurihara_limit".into(),
        layers.clone().map(|n| kurihara_limit_layer(tower, t, n)).collect::<Result<_>>()?,
        false,
    ));
    families.push(("main_rhs".into(), layers.clone().map(|n| main_rhs(tower, s, t, n)).collect::<Result<_>>()?, true));
    let mut reports = Vec::new();
    let mut rationalization = Vec::new();
    for (name, fam, rational) in &families {
        reports.push(limit_stability(tower, name, fam, n0)?);
        if *rational {
            for li in fam {
                rationalization.push(RationalizationCheck {
                    family: name.clone(),
                    layer: li.n,
                    defects: li.rationalization_defects()?,
                });
            }
        }
    }
    let main_rhs_generators = families.last().map(|f| f.1.last().unwrap().labels.clone()).unwrap_or_default();
    let pass = reports.iter().all(|r| r.pass) && rationalization.iter().all(|r| r.defects.is_empty());
    Ok(TowerReport {
        conductor: tower.base.conductor(),
        subgroup_gens: tower.base.spec().subgroup_gens.clone(),
        p,
        depth: tower.depth(),
        s: format_places(s),
        t: format_places(t),
        layer_conductors: tower.layers.iter().map(|l| l.conductor()).collect(),
        layer_orders: tower.layers.iter().map(|l| l.group().order()).collect(),
        n0,
        places: tower.places.iter().map(|d| d.summary()).collect(),
        families: reports,
        rationalization,
        main_rhs_generators,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn places(s: &str) -> BTreeSet<Place> {
        parse_places(s).unwrap()
    }

    fn q_i_tower(depth: usize) -> Tower {
        derive_tower(&AbelianFieldSpec::cyclotomic(4), 3, depth, &[2, 3, 5]).unwrap()
    }

    #[test]
    fn q_i_tower_places() {
        let tw = q_i_tower(2);
        assert_eq!(tw.layers.iter().map(|l| l.conductor()).collect::<Vec<_>>(), vec![12, 36, 108]);
        assert_eq!(tw.layers.iter().map(|l| l.group().order()).collect::<Vec<_>>(), vec![2, 6, 18]);
        let at3 = tw.place(3).unwrap().summary();
        assert_eq!(at3.inertia_orders, vec![1, 3, 9]);
        let at5 = tw.place(5).unwrap().summary();
        assert_eq!(at5.inertia_orders, vec![1, 1, 1]);
        assert_eq!(at5.frobenius_residues, vec![5, 5, 5]);
        assert_eq!(at5.escape_layer, Some(1));
        assert_eq!(at5.frobenius_orders, vec![1, 3, 9]);
        let at2 = tw.place(2).unwrap().summary();
        assert_eq!(at2.inertia_orders, vec![2, 2, 2]);
    }

    #[test]
    fn q_zeta3_tower_places() {
        let tw = derive_tower(&AbelianFieldSpec::cyclotomic(3), 5, 1, &[3, 5]).unwrap();
        assert_eq!(tw.layers.iter().map(|l| l.conductor()).collect::<Vec<_>>(), vec![15, 75]);
        let tw0 = derive_tower(&AbelianFieldSpec::cyclotomic(3), 5, 0, &[3, 5]).unwrap();
        assert!(tw0.projections.is_empty());
        // 7 ≡ 1 mod 3 and v_5(7^4 − 1) = 2
        let tw = derive_tower(&AbelianFieldSpec::cyclotomic(3), 5, 2, &[7]).unwrap();
        assert_eq!(tw.place(7).unwrap().escape_layer, Some(2));
        assert_eq!(tw.alignment_layer(&places("7")).unwrap(), 1);
    }

    #[test]
    fn rejections() {
        assert!(matches!(derive_tower(&AbelianFieldSpec::cyclotomic(4), 2, 1, &[]), Err(Error::BadPrime(2))));
        assert!(matches!(derive_tower(&AbelianFieldSpec::cyclotomic(7), 3, 1, &[]), Err(Error::Precondition(_))));
        let tw = q_i_tower(1);
        assert!(tilde_j_infinity(&tw, 2, 0).is_err());
        assert!(q_v_ideal(&tw, 3, 0).is_err());
        let err = main_rhs(&tw, &places("inf"), &BTreeSet::new(), 1).unwrap_err();
        assert!(err.to_string().contains("T is always assumed to be nonempty"));
        assert!(main_rhs(&tw, &places("2,inf"), &places("5"), 1).is_err());
    }

    #[test]
    fn tilde_j_is_augmentation_of_decomposition_group() {
        let tw = q_i_tower(2);
        for n in 0..=2 {
            let j = tilde_j_infinity(&tw, 3, n).unwrap();
            let d = &tw.place(3).unwrap().layers[n].decomposition;
            let ring = &tw.rings[n];
            let aug: Vec<Vec<BigRational>> = d.elements().iter().map(|&x| ring.minus_one(x)).collect();
            let aug = FractionalIdeal::from_generators(ring, aug).unwrap();
            assert_eq!(j.ideal, aug);
        }
    }

    #[test]
    fn q_v_examples() {
        let tw = q_i_tower(1);
        // I_2 = ⟨c⟩: N(I_2) and e_{I_2} vanish in the minus ring
        for n in 0..=1 {
            let q = q_v_ideal(&tw, 2, n).unwrap();
            assert_eq!(q.labels, vec!["N(I_v)", "(1-e_I sigma^-1)"]);
            assert!(q.ideal.is_unit());
        }
        // unramified places give Q_v = (1)
        let q = q_v_ideal(&tw, 5, 1).unwrap();
        assert!(q.ideal.is_unit());
    }

    #[test]
    fn r_v_examples() {
        // Q(ζ_12), p = 3, v = 2: Tor(𝒢_2) = C_2 × C_2
        let tw = derive_tower(&AbelianFieldSpec::cyclotomic(12), 3, 1, &[2]).unwrap();
        for n in 0..=1 {
            let r = r_v_ideal(&tw, 2, n).unwrap();
            assert_eq!(tw.place(2).unwrap().layers[n].torsion.order(), 4);
            // A ∈ {1, three C_2's, C_2×C_2}, with one complement each ... C has
            // two choices per C_2
            assert_eq!(r.decompositions, 1 + 3 * 2 + 1);
            assert_eq!(r.symbolic.len(), 7);
            assert!(r.evaluate().is_err());
            let h = &r.honest;
            assert_eq!(h.labels, vec!["N(A:1)·ΔB^0"]);
            assert!(h.ideal.is_g_stable());
            let unit = FractionalIdeal::unit(&tw.rings[n]);
            assert!(h.ideal.generators().iter().all(|g| unit.contains(g).unwrap()));
        }
        // Q(i), v = 2: Tor = C_2, only procyclic complements or C_2 × Z_3
        let tw = q_i_tower(1);
        let r = r_v_ideal(&tw, 2, 1).unwrap();
        assert_eq!(r.decompositions, 2);
        assert_eq!(r.symbolic.len(), 2);
        assert!(r.honest.labels.is_empty());
    }

    #[test]
    fn kurihara_examples() {
        let t = places("5");
        let qi = AbelianField::new(&AbelianFieldSpec::cyclotomic(4)).unwrap();
        let k = kurihara_rhs(&qi, 3, &t).unwrap();
        assert!(k.ideal.p_local_equal(&FractionalIdeal::unit(k.ring()), 3).unwrap());
        let qz = AbelianField::new(&AbelianFieldSpec::cyclotomic(3)).unwrap();
        let k = kurihara_rhs(&qz, 3, &t).unwrap();
        assert_eq!(k.ideal, FractionalIdeal::principal(k.ring(), k.ring().integer(2)).unwrap());
        assert!(k.ideal.p_local_equal(&FractionalIdeal::unit(k.ring()), 3).unwrap());
        // μ_3 ⊂ Q(ζ_3) is not killed by T = {3}
        assert!(kurihara_rhs(&qz, 3, &places("3")).is_err());
    }

    #[test]
    fn stability_of_q_i_families() {
        let tw = q_i_tower(3);
        let t = places("5");
        let n0 = tw.alignment_layer(&t).unwrap();
        assert_eq!(n0, 0);
        let fam: Vec<LayerIdeal> = (0..=3).map(|n| kurihara_layer(&tw, &t, n)).collect::<Result<_>>().unwrap();
        let r = limit_stability(&tw, "kurihara", &fam, n0).unwrap();
        assert!(r.bad > 0 && r.pass, "{r:?}");
        let fam: Vec<LayerIdeal> = (0..=3).map(|n| tilde_j_infinity(&tw, 3, n)).collect::<Result<_>>().unwrap();
        let r = limit_stability(&tw, "J~", &fam, n0).unwrap();
        assert!(r.bad == 0 && r.pass);
        let units: Vec<LayerIdeal> = (0..=3).map(|n| LayerIdeal::unit(n, &tw.rings[n])).collect();
        assert!(limit_stability(&tw, "unit", &units, 0).unwrap().pass);
    }

    #[test]
    fn misclassified_generator_is_fatal() {
        let tw = q_i_tower(2);
        let t = places("5");
        let mut fam: Vec<LayerIdeal> = (0..=2).map(|n| kurihara_layer(&tw, &t, n)).collect::<Result<_>>().unwrap();
        for f in &mut fam {
            f.classes.iter_mut().for_each(|c| *c = GeneratorClass::Good);
        }
        assert!(matches!(limit_stability(&tw, "k", &fam, 0), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn main_rhs_small_tower() {
        let tw = q_i_tower(1);
        let s = places("inf");
        let t = places("5");
        let r0 = main_rhs(&tw, &s, &t, 0).unwrap();
        let r1 = main_rhs(&tw, &s, &t, 1).unwrap();
        assert!(r1.rationalization_defects().unwrap().is_empty());
        let img = r1.ideal.transition_image(&tw.projections[0], Some(&r0.ideal), 3).unwrap();
        assert!(img.image.p_local_contained_in(&r0.ideal, 3).unwrap());
        let rep = tower_report(&tw, &s, &t).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn spec_json() {
        let s = TowerSpec::from_json(r#"{"conductor":4,"subgroup_gens":[],"p":3,"depth":1,"T":["5"]}"#).unwrap();
        assert_eq!(s.s, vec!["inf"]);
        let tw = Tower::from_spec(&s).unwrap();
        assert_eq!(tw.depth(), 1);
        assert!(TowerSpec::from_json(r#"{"conductor":4}"#).is_err());
        assert!(Tower::from_spec(&TowerSpec { t: vec!["3".into()], ..s }).is_err());
    }
}
