use num_rational::BigRational;
use serde::Serialize;

use super::{fitt0_with_caps, quotient_ideal_module, FittingCaps};
use crate::abelian::{all_subgroups, quotient_map, subgroup_from_generators, Group, Subgroup};
use crate::error::{Error, Result};
use crate::ideal::ring::{add, sub};
use crate::ideal::{FractionalIdeal, Ring};

/// `Fitt^[1](A)` for `A = R/(gens, f)`, computed as `Fitt_0(N)·f^{-1}` along
/// `0 → N → R/(f) → A → 0`.
pub fn shifted_fitt1(ring: &Ring, gens: &[Vec<BigRational>], f: &[BigRational]) -> Result<FractionalIdeal> {
    shifted_fitt1_with_caps(ring, gens, f, FittingCaps::default())
}

pub fn shifted_fitt1_with_caps(
    ring: &Ring,
    gens: &[Vec<BigRational>],
    f: &[BigRational],
    caps: FittingCaps,
) -> Result<FractionalIdeal> {
    if !ring.is_nonzero_divisor(f) {
        return Err(Error::ZeroDivisor(ring.format(f)));
    }
    let mut num = gens.to_vec();
    num.push(f.to_vec());
    let n = quotient_ideal_module(ring, &num, &[f.to_vec()])?;
    let fit = fitt0_with_caps(&n, caps)?;
    let finv = ring.inverse(f)?;
    Ok(fit.scale_by(&finv))
}

/// Product of the shifted Fitting ideals of the summands `R/(gens_v, f_v)`.
pub fn fitt1_direct_sum(ring: &Ring, factors: &[(Vec<Vec<BigRational>>, Vec<BigRational>)]) -> Result<FractionalIdeal> {
    let mut acc = FractionalIdeal::unit(ring);
    for (gens, f) in factors {
        acc = acc.product(&shifted_fitt1(ring, gens, f)?)?;
    }
    Ok(acc)
}

/// Checks that `decomposition` is an internal direct product decomposition
/// and returns the subgroup it generates.
fn decomposed_subgroup(g: &Group, decomposition: &[usize]) -> Result<Subgroup> {
    let i = subgroup_from_generators(g, decomposition)?;
    let prod: u64 = decomposition.iter().map(|&x| g.element_order(x)).product();
    if prod as usize != i.order() || decomposition.contains(&0) {
        return Err(Error::Precondition(format!(
            "{:?} is not a cyclic decomposition",
            decomposition.iter().map(|&x| g.label(x)).collect::<Vec<_>>()
        )));
    }
    Ok(i)
}

/// Checks `I ⊆ D`, `D/I` cyclic, and that `σ` lifts a generator of `D/I`.
fn check_cyclic_quotient(g: &Group, i: &Subgroup, d: &Subgroup, sigma: usize) -> Result<()> {
    if !i.is_subgroup_of(d) {
        return Err(Error::NotInGroup("I is not contained in D".into()));
    }
    let (_, pi) = quotient_map(g, i)?;
    let index = d.order() / i.order();
    let cyclic = d.elements().iter().any(|&x| pi.target.element_order(pi.apply(x)) as usize == index);
    if !cyclic {
        return Err(Error::NotCyclic(format!("D/I of order {index}")));
    }
    if !d.contains(sigma) || pi.target.element_order(pi.apply(sigma)) as usize != index {
        return Err(Error::Precondition(format!("{} does not generate D/I", g.label(sigma))));
    }
    Ok(())
}

fn increasing_tuples(len: usize, max: usize, strict: bool) -> Vec<Vec<usize>> {
    fn go(len: usize, start: usize, max: usize, strict: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for x in start..max {
            cur.push(x);
            go(len, if strict { x + 1 } else { x }, max, strict, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(len, 0, max, strict, &mut Vec::new(), &mut out);
    out
}

/// `𝒥(I)` from the explicit generators `e(λ,μ)(σ−1)^{i−1−j}`, with the
/// generator list kept in a fixed order.
pub fn calj_generators(ring: &Ring, decomposition: &[usize], d: &Subgroup, sigma: usize) -> Result<FractionalIdeal> {
    let g = ring.group();
    let i = decomposed_subgroup(g, decomposition)?;
    check_cyclic_quotient(g, &i, d, sigma)?;
    let s = decomposition.len();
    let norms: Vec<Vec<BigRational>> = decomposition
        .iter()
        .map(|&x| ring.norm(subgroup_from_generators(g, &[x]).unwrap().elements()))
        .collect();
    let aug: Vec<Vec<BigRational>> = decomposition.iter().map(|&x| ring.minus_one(x)).collect();
    let sm1 = ring.minus_one(sigma);
    let mut gens = Vec::new();
    for ii in 1..=s {
        for lambda in increasing_tuples(s - ii, s, true) {
            let mut e_l = ring.one();
            for &l in &lambda {
                e_l = ring.mul(&e_l, &norms[l]);
            }
            for j in 0..ii {
                for mu in increasing_tuples(j, s, false) {
                    let mut e = e_l.clone();
                    for &m in &mu {
                        e = ring.mul(&e, &aug[m]);
                    }
                    for _ in 0..(ii - 1 - j) {
                        e = ring.mul(&e, &sm1);
                    }
                    gens.push(e);
                }
            }
        }
    }
    FractionalIdeal::from_generators(ring, gens)
}

/// `𝒥(I) = Σ_i Z_i ΔD^{i−1}` straight from the definition, with `ΔD`
/// generated by every `d − 1`.
pub fn calj_by_definition(ring: &Ring, decomposition: &[usize], d: &Subgroup) -> Result<FractionalIdeal> {
    let g = ring.group();
    decomposed_subgroup(g, decomposition)?;
    let s = decomposition.len();
    let delta = FractionalIdeal::from_generators(ring, d.elements().iter().map(|&x| ring.minus_one(x)).collect())?;
    let norms: Vec<Vec<BigRational>> = decomposition
        .iter()
        .map(|&x| ring.norm(subgroup_from_generators(g, &[x]).unwrap().elements()))
        .collect();
    let mut total = FractionalIdeal::zero(ring);
    let mut delta_pow = FractionalIdeal::unit(ring);
    for ii in 1..=s {
        let zi_gens: Vec<Vec<BigRational>> = increasing_tuples(s - ii, s, true)
            .iter()
            .map(|l| l.iter().fold(ring.one(), |acc, &k| ring.mul(&acc, &norms[k])))
            .collect();
        let zi = FractionalIdeal::from_generators(ring, zi_gens)?;
        total = total.sum(&zi.product(&delta_pow)?)?;
        delta_pow = delta_pow.product(&delta)?;
    }
    Ok(total)
}

/// One admissible configuration `(G, I, D, σ)`.
#[derive(Debug, Clone)]
pub struct ShiftedFittingCase {
    pub group: Group,
    pub decomposition: Vec<usize>,
    pub d: Subgroup,
    pub sigma: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftedFittingReport {
    pub group: Vec<u64>,
    pub inertia: Vec<String>,
    pub decomposition_group: Vec<String>,
    pub sigma: String,
    pub lhs_scale: String,
    pub lhs_hnf: Vec<Vec<String>>,
    pub rhs_scale: String,
    pub rhs_hnf: Vec<Vec<String>>,
    pub calj_matches_definition: bool,
    pub equal: bool,
}

/// Compares `(h)·Fitt^[1](A)` with `(N(I), (1−e_Iσ^{-1})𝒥(I))` for
/// `A = Z[G]/(i−1, 1−σ^{-1}+|I|)` and `h = 1−e_Iσ^{-1}+N(I)`.
pub fn verify_shifted_fitting_formula(case: &ShiftedFittingCase) -> Result<ShiftedFittingReport> {
    let g = &case.group;
    let ring = Ring::full(g);
    let i = decomposed_subgroup(g, &case.decomposition)?;
    check_cyclic_quotient(g, &i, &case.d, case.sigma)?;
    let n_i = ring.norm(i.elements());
    let e_i = ring.idempotent(i.elements());
    let sigma_inv = ring.group_element(g.inv(case.sigma));
    let order = ring.integer(i.order() as i64);
    // f = 1 − σ^{-1} + |I|
    let f = add(&sub(&ring.one(), &sigma_inv), &order);
    let gens: Vec<Vec<BigRational>> = case.decomposition.iter().map(|&x| ring.minus_one(x)).collect();
    let fitt1 = shifted_fitt1(&ring, &gens, &f)?;
    let e_sigma = ring.mul(&e_i, &sigma_inv);
    let one_minus = sub(&ring.one(), &e_sigma);
    let h = add(&one_minus, &n_i);
    let lhs = fitt1.scale_by(&h);

    let calj = calj_generators(&ring, &case.decomposition, &case.d, case.sigma)?;
    let calj_def = calj_by_definition(&ring, &case.decomposition, &case.d)?;
    let mut rhs_gens = vec![n_i];
    rhs_gens.extend(calj.generators().iter().map(|x| ring.mul(&one_minus, x)));
    let rhs = FractionalIdeal::from_generators(&ring, rhs_gens)?;

    let lc = lhs.canonical();
    let rc = rhs.canonical();
    Ok(ShiftedFittingReport {
        group: g.parts().to_vec(),
        inertia: case.decomposition.iter().map(|&x| g.label(x)).collect(),
        decomposition_group: case.d.generators().iter().map(|&x| g.label(x)).collect(),
        sigma: g.label(case.sigma),
        lhs_scale: lc.scale.to_string(),
        lhs_hnf: lc.basis.to_strings(),
        rhs_scale: rc.scale.to_string(),
        rhs_hnf: rc.basis.to_strings(),
        calj_matches_definition: calj == calj_def,
        equal: lhs == rhs,
    })
}

/// Every `(I, D, σ)` in `G` with `D/I` cyclic and `σ ∈ D` lifting a generator.
/// `I` carries the invariant-factor decomposition from
/// [`Subgroup::cyclic_decomposition`].
pub fn admissible_cases(g: &Group) -> Vec<ShiftedFittingCase> {
    let subs = all_subgroups(g);
    let mut out = Vec::new();
    for d in &subs {
        for i in subs.iter().filter(|i| i.is_subgroup_of(d)) {
            let (_, pi) = quotient_map(g, i).expect("subgroup of g");
            let index = d.order() / i.order();
            let sigmas: Vec<usize> = d
                .elements()
                .iter()
                .copied()
                .filter(|&x| pi.target.element_order(pi.apply(x)) as usize == index)
                .collect();
            let decomposition = i.cyclic_decomposition();
            for sigma in sigmas {
                out.push(ShiftedFittingCase { group: g.clone(), decomposition: decomposition.clone(), d: d.clone(), sigma });
            }
        }
    }
    out
}

/// Every ordered tuple of nontrivial elements expressing `I` as an internal
/// direct product of the cyclic groups they generate.
pub fn cyclic_decompositions(i: &Subgroup) -> Vec<Vec<usize>> {
    fn go(g: &Group, i: &Subgroup, cur: &mut Vec<usize>, size: usize, out: &mut Vec<Vec<usize>>) {
        if size == i.order() {
            out.push(cur.clone());
            return;
        }
        for &x in i.elements().iter().filter(|&&x| x != 0) {
            cur.push(x);
            let next = g.element_order(x) as usize * size;
            if subgroup_from_generators(g, cur).map(|h| h.order()) == Ok(next) {
                go(g, i, cur, next, out);
            }
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(i.group(), i, &mut Vec::new(), 1, &mut out);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CaljIndependenceReport {
    pub group: Vec<u64>,
    pub inertia: Vec<String>,
    pub decomposition_group: Vec<String>,
    pub decompositions: usize,
    pub independent: bool,
}

/// Builds `𝒥(I)` from every cyclic decomposition of `I`, both from the
/// explicit generators and from the definition, and checks they all agree.
pub fn verify_calj_independence(g: &Group, i: &Subgroup, d: &Subgroup) -> Result<CaljIndependenceReport> {
    let ring = Ring::full(g);
    let (_, pi) = quotient_map(g, i)?;
    let index = d.order() / i.order();
    let sigma = d
        .elements()
        .iter()
        .copied()
        .find(|&x| pi.target.element_order(pi.apply(x)) as usize == index)
        .ok_or_else(|| Error::NotCyclic(format!("D/I of order {index}")))?;
    let decs = cyclic_decompositions(i);
    let mut reference: Option<FractionalIdeal> = None;
    let mut independent = true;
    for dec in &decs {
        let a = calj_generators(&ring, dec, d, sigma)?;
        let b = calj_by_definition(&ring, dec, d)?;
        independent &= a == b;
        match &reference {
            None => reference = Some(a),
            Some(r) => independent &= *r == a,
        }
    }
    Ok(CaljIndependenceReport {
        group: g.parts().to_vec(),
        inertia: i.generators().iter().map(|&x| g.label(x)).collect(),
        decomposition_group: d.generators().iter().map(|&x| g.label(x)).collect(),
        decompositions: decs.len(),
        independent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::FiniteAbelianGroup;

    #[test]
    fn calj_cyclic_is_unit() {
        let g = FiniteAbelianGroup::new(&[4]).unwrap().into_arc();
        let r = Ring::full(&g);
        let d = Subgroup::whole(&g);
        let j = calj_generators(&r, &[2], &d, 1).unwrap();
        assert!(j.is_unit());
    }

    #[test]
    fn calj_klein() {
        let g = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
        let r = Ring::full(&g);
        let a = g.element(&[1, 0]).unwrap();
        let b = g.element(&[0, 1]).unwrap();
        let d = Subgroup::whole(&g);
        let j = calj_generators(&r, &[a, b], &d, 0).unwrap();
        let expect = FractionalIdeal::from_generators(
            &r,
            vec![r.norm(&[0, a]), r.norm(&[0, b]), r.minus_one(a), r.minus_one(b)],
        )
        .unwrap();
        assert_eq!(j, expect);
        let c = g.element(&[1, 1]).unwrap();
        assert_eq!(calj_generators(&r, &[a, c], &d, 0).unwrap(), j);
    }

    #[test]
    fn formula_small_cases() {
        let c2 = FiniteAbelianGroup::new(&[2]).unwrap().into_arc();
        let case = ShiftedFittingCase { group: c2.clone(), decomposition: vec![1], d: Subgroup::whole(&c2), sigma: 0 };
        assert!(verify_shifted_fitting_formula(&case).unwrap().equal);
        let v = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
        let i = v.element(&[1, 0]).unwrap();
        let s = v.element(&[0, 1]).unwrap();
        let case = ShiftedFittingCase { group: v.clone(), decomposition: vec![i], d: Subgroup::whole(&v), sigma: s };
        let rep = verify_shifted_fitting_formula(&case).unwrap();
        assert!(rep.equal && rep.calj_matches_definition);
    }

    #[test]
    fn klein_decompositions() {
        let v = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
        let decs = cyclic_decompositions(&Subgroup::whole(&v));
        assert_eq!(decs.len(), 6);
        let c4 = FiniteAbelianGroup::new(&[4]).unwrap().into_arc();
        assert_eq!(cyclic_decompositions(&Subgroup::whole(&c4)), vec![vec![1], vec![3]]);
        let rep = verify_calj_independence(&v, &Subgroup::whole(&v), &Subgroup::whole(&v)).unwrap();
        assert!(rep.independent);
    }

    #[test]
    fn trivial_inertia() {
        let c3 = FiniteAbelianGroup::new(&[3]).unwrap().into_arc();
        let case = ShiftedFittingCase { group: c3.clone(), decomposition: vec![], d: Subgroup::whole(&c3), sigma: 1 };
        assert!(verify_shifted_fitting_formula(&case).unwrap().equal);
    }

    #[test]
    fn non_cyclic_rejected() {
        let v = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
        let r = Ring::full(&v);
        assert!(matches!(calj_generators(&r, &[], &Subgroup::whole(&v), 1), Err(Error::NotCyclic(_))));
    }
}
